//! Newline-delimited JSON request/response protocol used by `quadconic serve`.
//!
//! Request: `{"id": .., "op": .., "session": .., "payload": {..}}`.
//! Response: `{"id": .., "ok": true, "result": ..}` or
//! `{"id": .., "ok": false, "error": {"code": .., "message": ..}}`.
//!
//! Ops: `open`, `drag`, `claims`, `orbit_step`, `sequence_step`, `render`,
//! `close`. A failed `drag` or `sequence_step` leaves the session as it was.
//! Sessions are independent; a second request on a session that is still
//! busy gets a `Busy` error instead of queueing.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::claims::run_all;
use crate::config::{BuildOptions, Names, QuadConfig};
use crate::conic::{on_conic, second_intersection, ConicPointParam, Param};
use crate::error::Error;
use crate::poncelet::{conic_sequence, tangent_chain, Branch, SequenceRule};
use crate::projective::HPoint;
use crate::render::render_scene;
use crate::scalar::{Backend, Field, Float, Rational, Scalar};
use crate::scene::{RenderSpec, SceneDocument};

pub const PROTOCOL_VERSION: u32 = 1;

/// Protocol-level failure; kernel errors keep their own codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: String,
    pub message: String,
}

impl Failure {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Failure {
            code: code.into(),
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

type Reply = std::result::Result<Value, Failure>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Request {
    #[serde(default)]
    id: Value,
    op: String,
    #[serde(default)]
    session: Option<String>,
    #[serde(default)]
    payload: Value,
}

fn payload<T: for<'de> Deserialize<'de>>(v: &Value) -> std::result::Result<T, Failure> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| Failure::new("BadRequest", e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenPayload {
    scene: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DragPayload {
    /// `"A2"` or the 1-based index.
    vertex: Value,
    #[serde(default)]
    t: Option<Scalar>,
    #[serde(default)]
    point: Option<Vec<Scalar>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimsPayload {
    #[serde(default)]
    ids: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitPayload {
    #[serde(default = "outer_default")]
    outer: String,
    #[serde(default = "inner_default")]
    inner: String,
    /// Point name or `[x, y]`; omitted to continue the previous orbit.
    #[serde(default)]
    start: Option<Value>,
    #[serde(default = "one")]
    steps: usize,
    #[serde(default)]
    second: bool,
}

fn outer_default() -> String {
    "E".into()
}

fn inner_default() -> String {
    "C".into()
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequencePayload {
    #[serde(default = "rule_default")]
    rule: SequenceRule,
}

fn rule_default() -> SequenceRule {
    SequenceRule::Z
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderPayload {
    render: RenderSpec,
}

struct State<F: Field> {
    scene: SceneDocument,
    cfg: QuadConfig<F>,
    par: Option<ConicPointParam<F>>,
    /// Last vertex of the running orbit and the conics it uses.
    orbit: Option<(String, String, HPoint<F>)>,
    generation: usize,
}

enum Session {
    Exact(State<Rational>),
    Float(State<Float>),
}

fn scalar<F: Field>(s: &Scalar) -> std::result::Result<F, Failure> {
    Ok(F::from_scalar(s)?)
}

fn point_from_json<F: Field>(v: &[Scalar]) -> std::result::Result<HPoint<F>, Failure> {
    match v {
        [x, y] => Ok(HPoint::affine(scalar(x)?, scalar(y)?)),
        [x, y, z] => Ok(HPoint::new(scalar(x)?, scalar(y)?, scalar(z)?)?),
        _ => Err(Failure::new("BadRequest", "a point has 2 or 3 coordinates")),
    }
}

fn vertex_index(v: &Value) -> std::result::Result<usize, Failure> {
    let i = match v {
        Value::Number(n) => n.as_u64().map(|x| x as usize),
        Value::String(s) => s.strip_prefix('A').and_then(|d| d.parse::<usize>().ok()),
        _ => None,
    };
    match i {
        Some(i @ 1..=4) => Ok(i - 1),
        _ => Err(Failure::new("BadRequest", format!("vertex must be A1..A4, got {v}"))),
    }
}

impl<F: Field> State<F> {
    fn new(scene: SceneDocument) -> std::result::Result<Self, Failure> {
        let cfg = scene.build::<F>()?;
        let par = scene.conic::<F>()?.1;
        Ok(State {
            scene,
            cfg,
            par,
            orbit: None,
            generation: 0,
        })
    }

    fn params(&self) -> Value {
        let Some(par) = &self.par else {
            return Value::Null;
        };
        if self.generation > 0 {
            return Value::Null;
        }
        self.cfg
            .vertices()
            .iter()
            .map(|v| match par.parameter_of(v) {
                Ok(Param::Finite(t)) => serde_json::to_value(t.to_scalar()).expect("serializable"),
                Ok(Param::Infinity) => json!("inf"),
                Err(_) => Value::Null,
            })
            .collect()
    }

    fn claims(&self, ids: &[String]) -> Reply {
        let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
        let reports = run_all(&self.cfg, &ids, &self.scene.tolerance())?;
        Ok(serde_json::to_value(reports).expect("serializable"))
    }

    fn snapshot(&self) -> Reply {
        let mut v = json!({
            "config": self.cfg.to_json(),
            "params": self.params(),
            "generation": self.generation,
        });
        if !self.scene.claims.is_empty() {
            v["claims"] = self.claims(&self.scene.claims)?;
        }
        Ok(v)
    }

    fn drag(&mut self, p: DragPayload) -> Reply {
        let i = vertex_index(&p.vertex)?;
        let point = match (&p.t, &p.point) {
            (Some(t), None) => {
                let par = self.par.as_ref().filter(|_| self.generation == 0).ok_or_else(|| {
                    Failure::new("BadRequest", "this conic has no parametrization; drag by point")
                })?;
                par.point_at_value(scalar(t)?)
            }
            (None, Some(xy)) => point_from_json(xy)?,
            _ => return Err(Failure::new("BadRequest", "give exactly one of t and point")),
        };
        let tol = self.scene.tolerance();
        if !on_conic(self.cfg.base_conic(), &point, &tol).0 {
            return Err(Error::VertexNotOnConic(format!("A{}", i + 1)).into());
        }
        let mut v = self.cfg.vertices();
        v[i] = point.clone();
        let opts = BuildOptions {
            tol,
            seed: self.cfg.fingerprint().seed,
        };
        let cfg = QuadConfig::build(self.cfg.base_conic().clone(), v, opts)?;
        if self.generation == 0 {
            self.scene = self.scene.with_vertex(&self.cfg, i, &point);
        }
        self.cfg = cfg;
        self.orbit = None;
        self.snapshot()
    }

    fn orbit_step(&mut self, p: OrbitPayload) -> Reply {
        let conic = |n: &str| self.cfg.conic(n).map_err(|m| Failure::from(m.into_error()));
        let (outer, inner) = (conic(&p.outer)?, conic(&p.inner)?);
        let start = match &p.start {
            Some(Value::String(name)) => self.cfg.point(name).map_err(|m| m.into_error())?,
            Some(v) => {
                let xy: Vec<Scalar> = payload(v)?;
                point_from_json(&xy)?
            }
            None => match &self.orbit {
                Some((o, i, q)) if *o == p.outer && *i == p.inner => q.clone(),
                _ => return Err(Failure::new("BadRequest", "no running orbit; give a start")),
            },
        };
        if !on_conic(&outer, &start, &self.scene.tolerance()).0 {
            return Err(Error::PointNotOnConic.into());
        }
        let branch = if p.second { Branch::Second } else { Branch::First };
        let orbit = tangent_chain(&outer, &inner, None, &start, p.steps.max(1), branch)?;
        // the chain reports k vertices; the k-th successor is one more meet
        let next = match (orbit.vertices.last(), orbit.lines.last()) {
            (Some(v), Some(l)) => second_intersection(&outer, v, l)?,
            _ => start.clone(),
        };
        self.orbit = Some((p.outer.clone(), p.inner.clone(), next.clone()));
        Ok(json!({
            "vertices": orbit.vertices,
            "lines": orbit.lines,
            "next": next,
            "closure_residual": orbit.closure_residual.to_scalar(),
        }))
    }

    fn sequence_step(&mut self, p: SequencePayload) -> Reply {
        let seq = conic_sequence(&self.cfg, 2, p.rule)?;
        self.cfg = seq.into_iter().nth(1).expect("two conics");
        self.generation += 1;
        self.orbit = None;
        self.snapshot()
    }

    fn render(&self, p: RenderPayload) -> Reply {
        Ok(json!({ "svg": render_scene(&self.cfg, &p.render)? }))
    }
}

macro_rules! each {
    ($s:expr, $st:ident => $body:expr) => {
        match $s {
            Session::Exact($st) => $body,
            Session::Float($st) => $body,
        }
    };
}

/// All sessions of one server; shared by every connection.
#[derive(Default)]
pub struct Server {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl Server {
    pub fn new() -> Self {
        Self::default()
    }

    /// Answers one request line with one response line (no newline).
    pub fn handle(&self, line: &str) -> String {
        let req: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                let id = serde_json::from_str::<Value>(line)
                    .ok()
                    .and_then(|v| v.get("id").cloned())
                    .unwrap_or(Value::Null);
                return respond(id, Err(Failure::new("BadRequest", e.to_string())));
            }
        };
        let reply = self.dispatch(&req);
        respond(req.id, reply)
    }

    fn session(&self, name: &Option<String>) -> std::result::Result<Arc<Mutex<Session>>, Failure> {
        let name = name
            .as_ref()
            .ok_or_else(|| Failure::new("BadRequest", "missing session"))?;
        self.sessions
            .lock()
            .expect("session table")
            .get(name)
            .cloned()
            .ok_or_else(|| Failure::new("UnknownSession", format!("no session {name}")))
    }

    fn dispatch(&self, req: &Request) -> Reply {
        match req.op.as_str() {
            "version" => Ok(json!({ "protocol": PROTOCOL_VERSION })),
            "open" => {
                let name = req
                    .session
                    .clone()
                    .ok_or_else(|| Failure::new("BadRequest", "missing session"))?;
                let p: OpenPayload = payload(&req.payload)?;
                let scene = SceneDocument::parse(&p.scene.to_string())?;
                let session = match scene.backend {
                    Backend::Exact => Session::Exact(State::new(scene)?),
                    Backend::Float => Session::Float(State::new(scene)?),
                };
                let result = each!(&session, s => s.snapshot())?;
                self.sessions
                    .lock()
                    .expect("session table")
                    .insert(name, Arc::new(Mutex::new(session)));
                Ok(result)
            }
            "close" => {
                let name = req.session.clone().unwrap_or_default();
                match self.sessions.lock().expect("session table").remove(&name) {
                    Some(_) => Ok(json!({ "closed": name })),
                    None => Err(Failure::new("UnknownSession", format!("no session {name}"))),
                }
            }
            op @ ("drag" | "claims" | "orbit_step" | "sequence_step" | "render") => {
                let cell = self.session(&req.session)?;
                let mut guard = cell
                    .try_lock()
                    .map_err(|_| Failure::new("Busy", "session has a request in flight"))?;
                let s = &mut *guard;
                match op {
                    "drag" => {
                        let p = payload(&req.payload)?;
                        each!(s, st => st.drag(p))
                    }
                    "claims" => {
                        let p: ClaimsPayload = payload(&req.payload)?;
                        each!(s, st => {
                            let ids = p.ids.clone().unwrap_or_else(|| st.scene.claims.clone());
                            st.claims(&ids)
                        })
                    }
                    "orbit_step" => {
                        let p = payload(&req.payload)?;
                        each!(s, st => st.orbit_step(p))
                    }
                    "sequence_step" => {
                        let p = payload(&req.payload)?;
                        each!(s, st => st.sequence_step(p))
                    }
                    _ => {
                        let p = payload(&req.payload)?;
                        each!(s, st => st.render(p))
                    }
                }
            }
            other => Err(Failure::new("UnknownOp", format!("unknown op {other}"))),
        }
    }
}

fn respond(id: Value, reply: Reply) -> String {
    let v = match reply {
        Ok(result) => json!({ "id": id, "ok": true, "result": result }),
        Err(f) => json!({ "id": id, "ok": false, "error": { "code": f.code, "message": f.message } }),
    };
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(s: &Server, v: Value) -> Value {
        serde_json::from_str(&s.handle(&v.to_string())).unwrap()
    }

    fn open(s: &Server) -> Value {
        call(
            s,
            json!({"id": 1, "op": "open", "session": "a", "payload": {"scene": {
                "version": 1, "backend": "float",
                "conic": {"kind": "unit-circle"},
                "vertices": {"kind": "params", "params": [3, "1/2", -1, -4]},
                "claims": ["lemma-2.1"]
            }}}),
        )
    }

    #[test]
    fn open_reports_params_and_claims() {
        let s = Server::new();
        let r = open(&s);
        assert_eq!(r["ok"], true, "{r}");
        let t: Vec<f64> = r["result"]["params"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for (a, b) in t.iter().zip([3.0, 0.5, -1.0, -4.0]) {
            assert!((a - b).abs() < 1e-12, "{t:?}");
        }
        let claims = r["result"]["claims"].as_array().unwrap();
        assert_eq!(claims.len(), 3);
        assert!(claims.iter().all(|c| c["status"] == "holds"));
    }

    #[test]
    fn failed_drag_keeps_the_last_state() {
        let s = Server::new();
        open(&s);
        // A2 onto A1
        let r = call(&s, json!({"id": 2, "op": "drag", "session": "a", "payload": {"vertex": "A2", "t": 3}}));
        assert_eq!(r["ok"], false);
        assert_eq!(r["id"], 2);
        let r = call(&s, json!({"id": 3, "op": "claims", "session": "a"}));
        assert_eq!(r["result"].as_array().unwrap().len(), 3);
        let r = call(&s, json!({"id": 4, "op": "drag", "session": "a", "payload": {"vertex": 2, "t": 2}}));
        assert_eq!(r["ok"], true, "{r}");
        assert!((r["result"]["params"][1].as_f64().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_codes() {
        let s = Server::new();
        let r = call(&s, json!({"id": "x", "op": "claims", "session": "nope"}));
        assert_eq!(r["error"]["code"], "UnknownSession");
        let r = call(&s, json!({"id": 5, "op": "fly"}));
        assert_eq!(r["error"]["code"], "UnknownOp");
        let r: Value = serde_json::from_str(&s.handle("{not json")).unwrap();
        assert_eq!(r["error"]["code"], "BadRequest");
        open(&s);
        let r = call(&s, json!({"id": 6, "op": "drag", "session": "a", "payload": {"vertex": "A1", "point": [2, 0]}}));
        assert_eq!(r["error"]["code"], "VertexNotOnConic");
    }

    #[test]
    fn orbit_continues_from_the_last_vertex() {
        let s = Server::new();
        open(&s);
        let r = call(&s, json!({"id": 1, "op": "orbit_step", "session": "a", "payload": {"start": "N1", "steps": 4}}));
        assert_eq!(r["ok"], true, "{r}");
        assert!(r["result"]["closure_residual"].as_f64().unwrap() < 1e-9);
        let r = call(&s, json!({"id": 2, "op": "orbit_step", "session": "a", "payload": {}}));
        assert_eq!(r["ok"], true, "{r}");
        assert_eq!(r["result"]["vertices"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn sequence_step_moves_to_the_next_conic() {
        let s = Server::new();
        open(&s);
        let r = call(&s, json!({"id": 1, "op": "sequence_step", "session": "a", "payload": {"rule": "z"}}));
        assert_eq!(r["ok"], true, "{r}");
        assert_eq!(r["result"]["generation"], 1);
        assert_eq!(r["result"]["params"], Value::Null);
        let r = call(&s, json!({"id": 2, "op": "close", "session": "a"}));
        assert_eq!(r["ok"], true);
    }
}
