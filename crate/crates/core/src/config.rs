//! The named-point configuration of a quadrilateral inscribed in a conic.
//!
//! Points are defined declaratively as incidence expressions (see
//! [`crate::expr`]) and evaluated in three stages: the eager basic stage
//! (vertices, diagonal points, tangent intersections, tangency points and
//! the side/tangent families), the deep stage built on the conic `C1`
//! (`J`, `K`, conics `C1..C3`, `D1`) and the late stage built on the
//! tangency points (`Z`, `R`, conics `E`, `F`). The last two are computed on
//! first use and cached.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde_json::{json, Map, Value};

use crate::conic::{fit_conic_all, on_conic, polar, tangency_points_from, Conic};
use crate::errata;
use crate::error::{Error, Result};
use crate::expr::{cyc, family, parse_point, LineExpr, PointExpr};
use crate::projective::{collinear, det3, join, meet, HLine, HPoint};
use crate::scalar::{Backend, Field, Scalar, Tolerance};

/// Why a name could not be produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Missing {
    /// Known name, blocked by the given cause.
    Absent(Error),
    /// Not a name of the configuration.
    Unknown(String),
}

impl Missing {
    pub fn into_error(self) -> Error {
        match self {
            Missing::Absent(e) => e,
            Missing::Unknown(n) => Error::UnknownSubject(n),
        }
    }
}

pub type Found<T> = std::result::Result<T, Missing>;

/// Name resolution shared by configurations and overlays.
pub trait Names<F: Field> {
    fn point(&self, name: &str) -> Found<HPoint<F>>;
    fn conic(&self, name: &str) -> Found<Conic<F>>;

    fn eval_line(&self, e: &LineExpr) -> Found<HLine<F>> {
        match e {
            LineExpr::Join(a, b) => {
                join(&self.point(a)?, &self.point(b)?).map_err(Missing::Absent)
            }
            LineExpr::Polar { conic, point } => {
                polar(&self.conic(conic)?, &self.point(point)?).map_err(Missing::Absent)
            }
        }
    }

    fn eval_point(&self, e: &PointExpr) -> Found<HPoint<F>> {
        match e {
            PointExpr::Name(n) => self.point(n),
            PointExpr::Meet(l, m) => {
                meet(&self.eval_line(l)?, &self.eval_line(m)?).map_err(Missing::Absent)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StageId {
    Basic,
    Deep,
    Late,
}

fn stage_of_point(name: &str) -> StageId {
    match &family(name)[..] {
        "J" | "K" => StageId::Deep,
        "Z" | "R" => StageId::Late,
        _ => StageId::Basic,
    }
}

fn stage_of_conic(name: &str) -> Option<StageId> {
    match name {
        "C" => Some(StageId::Basic),
        "C1" | "C2" | "C3" | "D1" => Some(StageId::Deep),
        "E" | "F" => Some(StageId::Late),
        _ => None,
    }
}

#[derive(Debug, Clone)]
struct Stage<F> {
    points: BTreeMap<String, Found<HPoint<F>>>,
    conics: BTreeMap<String, Found<Conic<F>>>,
}

impl<F> Default for Stage<F> {
    fn default() -> Self {
        Stage {
            points: BTreeMap::new(),
            conics: BTreeMap::new(),
        }
    }
}

/// Reproducibility tag carried into reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub seed: Option<u64>,
    pub backend: Backend,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub tol: Tolerance,
    pub seed: Option<u64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            tol: Tolerance::from_env(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadConfig<F: Field> {
    conic: Conic<F>,
    tol: Tolerance,
    fingerprint: Fingerprint,
    basic: Stage<F>,
    deep: OnceLock<Stage<F>>,
    late: OnceLock<Stage<F>>,
    overrides: BTreeMap<String, HPoint<F>>,
}

/// Point names of the basic stage in construction order.
pub fn basic_names() -> Vec<String> {
    let mut v = Vec::new();
    let mut push = |l: &str, n: usize| {
        for i in 1..=n {
            v.push(format!("{l}{i}"));
        }
    };
    push("A", 4);
    push("M", 3);
    push("N", 3);
    push("P", 3);
    push("U", 2);
    push("V", 2);
    push("W", 2);
    push("T", 4);
    push("X", 4);
    push("Y", 4);
    for l in ["B", "C", "D", "E", "F", "G", "H", "I"] {
        push(l, 3);
    }
    for i in 1..=4 {
        v.push(format!("Y{i}'"));
    }
    v.push("E1'".into());
    v
}

pub fn deep_names() -> Vec<String> {
    (1..=8)
        .map(|i| format!("J{i}"))
        .chain((1..=8).map(|i| format!("K{i}")))
        .collect()
}

pub fn late_names() -> Vec<String> {
    (1..=4)
        .map(|i| format!("Z{i}"))
        .chain((1..=16).map(|i| format!("R{i}")))
        .collect()
}

pub fn all_point_names() -> Vec<String> {
    let mut v = basic_names();
    v.extend(deep_names());
    v.extend(late_names());
    v
}

pub const DERIVED_CONICS: [&str; 6] = ["C1", "C2", "C3", "D1", "E", "F"];

/// Defining expressions of the basic stage, except the tangency points.
fn basic_definitions() -> Vec<(String, String)> {
    let t = errata::embedded();
    let mut d: Vec<(String, String)> = Vec::new();
    let mut def = |n: &str, e: String| d.push((n.to_string(), e));
    def("M1", "A1A2^A3A4".into());
    def("M2", "A2A3^A4A1".into());
    def("M3", "A3A1^A2A4".into());
    let tan = |i: usize| format!("t[C](A{i})");
    for (n, a, b) in [
        ("N3", 1, 3),
        ("P3", 2, 4),
        ("N2", 1, 4),
        ("P2", 2, 3),
        ("N1", 1, 2),
        ("P1", 3, 4),
    ] {
        def(n, format!("{}^{}", tan(a), tan(b)));
    }
    for (n, side, at) in [
        ("T1", "A3A4", 1),
        ("T2", "A4A1", 2),
        ("T3", "A1A2", 3),
        ("T4", "A2A3", 4),
        ("X1", "A2A3", 1),
        ("X2", "A3A4", 2),
        ("X3", "A4A1", 3),
        ("X4", "A1A2", 4),
    ] {
        def(n, format!("{side}^{}", tan(at)));
    }
    for (i, (a, b)) in t.y_lines().iter().enumerate() {
        def(&format!("Y{}", i + 1), format!("A{a}A{b}^{}", tan(i + 1)));
    }
    for (i, (a, b)) in Y_PRINTED.iter().enumerate() {
        def(&format!("Y{}'", i + 1), format!("A{a}A{b}^{}", tan(i + 1)));
    }
    let [e1_v, e1_w] = E1_PRINTED;
    let (e1, i1) = if t.e1_from_v() { (e1_v, e1_w) } else { (e1_w, e1_v) };
    for (n, e) in [
        ("B1", "A2V1^A1V2"),
        ("C1", "A1V1^A2V2"),
        ("D1", "A3V1^A4V2"),
        ("E1", e1),
        ("B3", "A4V1^A2V2"),
        ("C3", "A4V2^A2V1"),
        ("D3", "A1V1^A3V2"),
        ("E3", "A1V2^A3V1"),
        ("D2", "A4U1^A1U2"),
        ("E2", "A1U1^A4U2"),
        ("B2", "A3U1^A2U2"),
        ("C2", "A2U1^A3U2"),
        ("F3", "A4U1^A2U2"),
        ("H3", "A4U2^A2U1"),
        ("G3", "A1U1^A3U2"),
        ("I3", "A1U2^A3U1"),
        ("I1", i1),
        ("E1'", e1_w),
        ("F1", "A1W1^A2W2"),
        ("G1", "A3W1^A4W2"),
        ("H1", "A4W1^A3W2"),
        ("H2", "A4W1^A1W2"),
        ("I2", "A4W2^A1W1"),
        ("F2", "A2W1^A3W2"),
        ("G2", "A2W2^A3W1"),
    ] {
        def(n, e.into());
    }
    d
}

fn deep_definitions() -> Vec<(String, String)> {
    let mut d = Vec::new();
    for i in 1..=4i64 {
        let t1 = |p: String| format!("t[C1]({p})");
        d.push((
            format!("J{}", 2 * i - 1),
            format!("{}^{}", t1(cyc("X", i - 2, 4)), t1(format!("T{i}"))),
        ));
        d.push((
            format!("J{}", 2 * i),
            format!("{}^{}", t1(cyc("X", i - 1, 4)), t1(format!("T{i}"))),
        ));
    }
    for i in 1..=8i64 {
        let j = |k: i64| cyc("J", k, 8);
        d.push((
            format!("K{i}"),
            format!("{}{}^{}{}", j(i), j(i + 1), j(i + 2), j(i + 3)),
        ));
    }
    d
}

/// Sides met by the tangents at `A1..A4` in the printed definition of `Y`
/// (the first one gives back `X1`).
pub const Y_PRINTED: [(usize, usize); 4] = [(2, 3), (1, 4), (1, 4), (2, 3)];

/// The two points printed under the label `E1`: the V-based one and the
/// W-based one.
pub const E1_PRINTED: [&str; 2] = ["A4V1^A3V2", "A2W1^A1W2"];

/// `R_k = l(Z_a Z_b) ^ l(p q)` for k = 1..16.
pub const R_TABLE: [(&str, &str); 16] = [
    ("Z1Z2", "N1N2"),
    ("Z1Z2", "N1P2"),
    ("Z2Z3", "N1P2"),
    ("Z2Z3", "P1P2"),
    ("Z3Z4", "P1P2"),
    ("Z3Z4", "P1N2"),
    ("Z1Z4", "P1N2"),
    ("Z1Z4", "N1N2"),
    ("Z1Z2", "P1P2"),
    ("Z3Z4", "N1P2"),
    ("Z2Z3", "P1N2"),
    ("Z1Z4", "P1P2"),
    ("Z3Z4", "N1N2"),
    ("Z1Z2", "P1N2"),
    ("Z1Z4", "N1P2"),
    ("Z2Z3", "N1N2"),
];

fn late_definitions() -> Vec<(String, String)> {
    let mut d: Vec<(String, String)> = [
        ("Z1", "M1U1^M2V1"),
        ("Z2", "M1U1^M2V2"),
        ("Z3", "M1U2^M2V2"),
        ("Z4", "M1U2^M2V1"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    for (k, (a, b)) in R_TABLE.iter().enumerate() {
        d.push((format!("R{}", k + 1), format!("{a}^{b}")));
    }
    d
}

/// Defining point sets of the derived conics.
pub fn conic_members(name: &str) -> Vec<String> {
    let s: &str = match name {
        "C1" => "X1 X2 X3 X4 T1 T2 T3 T4",
        "C2" => "Y1 Y2 Y3 Y4 X1 X3 T2 T4",
        "C3" => "T1 T3 X2 X4 Y1 Y2 Y3 Y4",
        "D1" => "K1 K2 K3 K4 K5 K6 K7 K8",
        "E" => "N1 N2 P1 P2 Z1 Z2 Z3 Z4",
        "F" => "R1 R2 R3 R4 R5 R6 R7 R8",
        _ => "",
    };
    s.split_whitespace().map(String::from).collect()
}

/// The defining expression of a constructed point, if it has one (vertices
/// and tangency points do not).
pub fn definition_of(name: &str) -> Option<String> {
    basic_definitions()
        .into_iter()
        .chain(deep_definitions())
        .chain(late_definitions())
        .find(|(n, _)| n == name)
        .map(|(_, e)| e)
}

/// Orders the contact points `[s, s2]` of the tangents from `m` so that the
/// first one's tangent is adjacent to the line `m r` in the pencil at `m`,
/// where `q` lies on the other secant through `m`. The rule only uses
/// signs of brackets, so it is projectively invariant.
fn order_contacts<F: Field>(
    m: &HPoint<F>,
    pair: [HPoint<F>; 2],
    q: &HPoint<F>,
    r: &HPoint<F>,
) -> [HPoint<F>; 2] {
    let [s, s2] = pair;
    let br = |a: &HPoint<F>, b: &HPoint<F>| det3(m.coords(), a.coords(), b.coords());
    // cross ratio (s, q; r, s2) of lines through m
    let num = br(&s, r) * br(q, &s2);
    let den = br(&s, &s2) * br(q, r);
    let negative = num.is_negative() != den.is_negative();
    if negative {
        [s, s2]
    } else {
        [s2, s]
    }
}

struct Eval<'a, F: Field> {
    cfg: &'a QuadConfig<F>,
    upto: StageId,
    stage: &'a Stage<F>,
}

impl<F: Field> Names<F> for Eval<'_, F> {
    fn point(&self, name: &str) -> Found<HPoint<F>> {
        if let Some(p) = self.stage.points.get(name) {
            return p.clone();
        }
        self.cfg.point_upto(name, self.upto)
    }

    fn conic(&self, name: &str) -> Found<Conic<F>> {
        if let Some(c) = self.stage.conics.get(name) {
            return c.clone();
        }
        self.cfg.conic_upto(name, self.upto)
    }
}

fn define_all<F: Field>(
    cfg: &QuadConfig<F>,
    upto: StageId,
    stage: &mut Stage<F>,
    defs: &[(String, String)],
) {
    for (name, e) in defs {
        let expr = parse_point(e).expect("built-in definitions parse");
        let v = Eval {
            cfg,
            upto,
            stage,
        }
        .eval_point(&expr);
        stage.points.insert(name.clone(), v);
    }
}

fn fit_named<F: Field>(
    cfg: &QuadConfig<F>,
    upto: StageId,
    stage: &mut Stage<F>,
    name: &str,
) {
    let members = conic_members(name);
    let ev = Eval {
        cfg,
        upto,
        stage,
    };
    let pts: Found<Vec<HPoint<F>>> = members.iter().map(|m| ev.point(m)).collect();
    let c = pts.and_then(|p| {
        fit_conic_all(&p)
            .map(|f| f.conic)
            .map_err(Missing::Absent)
    });
    stage.conics.insert(name.to_string(), c);
}

impl<F: Field> QuadConfig<F> {
    /// Builds the configuration of `a` inscribed in `conic`.
    pub fn build(conic: Conic<F>, a: [HPoint<F>; 4], opts: BuildOptions) -> Result<Self> {
        if conic.is_degenerate() {
            return Err(Error::DegenerateConic);
        }
        for (i, p) in a.iter().enumerate() {
            if !on_conic(&conic, p, &opts.tol).0 {
                return Err(Error::VertexNotOnConic(format!("A{}", i + 1)));
            }
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if join(&a[i], &a[j]).is_err() || a[i].proj_eq(&a[j], &opts.tol) {
                    return Err(Error::DegenerateQuadrilateral(format!(
                        "A{} and A{} coincide",
                        i + 1,
                        j + 1
                    )));
                }
                for k in j + 1..4 {
                    let tri = [a[i].clone(), a[j].clone(), a[k].clone()];
                    if collinear(&tri, &opts.tol).map(|c| c.0).unwrap_or(true) {
                        return Err(Error::DegenerateQuadrilateral(format!(
                            "A{}, A{} and A{} are collinear",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        let mut cfg = QuadConfig {
            conic,
            tol: opts.tol,
            fingerprint: Fingerprint {
                seed: opts.seed,
                backend: F::BACKEND,
            },
            basic: Stage::default(),
            deep: OnceLock::new(),
            late: OnceLock::new(),
            overrides: BTreeMap::new(),
        };
        let mut stage = Stage::default();
        stage.conics.insert("C".into(), Ok(cfg.conic.clone()));
        for (i, p) in a.iter().enumerate() {
            stage.points.insert(format!("A{}", i + 1), Ok(p.clone()));
        }
        let defs = basic_definitions();
        let (diag, rest) = defs.split_at(9);
        define_all(&cfg, StageId::Basic, &mut stage, diag);
        for k in ["M1", "M2", "M3", "N1", "N2", "N3", "P1", "P2", "P3"] {
            if let Err(m) = &stage.points[k] {
                return Err(Error::DegenerateQuadrilateral(format!(
                    "{k} is undefined: {}",
                    m.clone().into_error()
                )));
            }
        }
        // tangency points, labelled by the adjacency rule of order_contacts
        let pt = |s: &Stage<F>, n: &str| s.points[n].clone().expect("present");
        for (fam, m, q, r) in [("U", "M1", "A1", "A3"), ("V", "M2", "A2", "A4"), ("W", "M3", "A1", "A2")] {
            let mp = pt(&stage, m);
            let res = tangency_points_from(&cfg.conic, &mp)
                .map(|pair| order_contacts(&mp, pair, &pt(&stage, q), &pt(&stage, r)));
            for k in 0..2 {
                let v = res.clone().map(|p| p[k].clone()).map_err(Missing::Absent);
                stage.points.insert(format!("{fam}{}", k + 1), v);
            }
        }
        define_all(&cfg, StageId::Basic, &mut stage, rest);
        cfg.basic = stage;
        Ok(cfg)
    }

    pub fn base_conic(&self) -> &Conic<F> {
        &self.conic
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn vertices(&self) -> [HPoint<F>; 4] {
        std::array::from_fn(|i| self.point(&format!("A{}", i + 1)).expect("vertices exist"))
    }

    fn deep(&self) -> &Stage<F> {
        self.deep.get_or_init(|| {
            let mut s = Stage::default();
            for c in ["C1", "C2", "C3"] {
                fit_named(self, StageId::Deep, &mut s, c);
            }
            define_all(self, StageId::Deep, &mut s, &deep_definitions());
            fit_named(self, StageId::Deep, &mut s, "D1");
            s
        })
    }

    fn late(&self) -> &Stage<F> {
        self.late.get_or_init(|| {
            let mut s = Stage::default();
            define_all(self, StageId::Late, &mut s, &late_definitions());
            fit_named(self, StageId::Late, &mut s, "E");
            fit_named(self, StageId::Late, &mut s, "F");
            s
        })
    }

    fn stage(&self, id: StageId) -> &Stage<F> {
        match id {
            StageId::Basic => &self.basic,
            StageId::Deep => self.deep(),
            StageId::Late => self.late(),
        }
    }

    fn point_upto(&self, name: &str, upto: StageId) -> Found<HPoint<F>> {
        let id = stage_of_point(name);
        let reachable = match upto {
            StageId::Basic => id == StageId::Basic,
            StageId::Deep => id != StageId::Late,
            StageId::Late => id != StageId::Deep,
        };
        if !reachable {
            return Err(Missing::Unknown(name.to_string()));
        }
        if let Some(p) = self.overrides.get(name) {
            return Ok(p.clone());
        }
        self.stage(id)
            .points
            .get(name)
            .cloned()
            .unwrap_or_else(|| Err(Missing::Unknown(name.to_string())))
    }

    fn conic_upto(&self, name: &str, upto: StageId) -> Found<Conic<F>> {
        let id = stage_of_conic(name).ok_or_else(|| Missing::Unknown(name.to_string()))?;
        let reachable = match upto {
            StageId::Basic => id == StageId::Basic,
            StageId::Deep => id != StageId::Late,
            StageId::Late => id != StageId::Deep,
        };
        if !reachable {
            return Err(Missing::Unknown(name.to_string()));
        }
        self.stage(id)
            .conics
            .get(name)
            .cloned()
            .unwrap_or_else(|| Err(Missing::Unknown(name.to_string())))
    }

    /// Forces the lazy stages.
    pub fn complete(&self) -> &Self {
        self.deep();
        self.late();
        self
    }

    /// Present/absent status per family, in name order.
    pub fn family_status(&self) -> BTreeMap<String, std::result::Result<(), Error>> {
        let mut out: BTreeMap<String, std::result::Result<(), Error>> = BTreeMap::new();
        for n in all_point_names() {
            let f = family(&n);
            let st = match self.point(&n) {
                Ok(_) => Ok(()),
                Err(m) => Err(m.into_error()),
            };
            let slot = out.entry(f).or_insert(Ok(()));
            if slot.is_ok() {
                *slot = st;
            }
        }
        out
    }

    /// A copy with one point displaced by a relative amount along a fixed
    /// direction; dependants are not recomputed. Used for negative controls.
    pub fn perturbed(&self, name: &str, relative: f64) -> Result<QuadConfig<F>> {
        self.complete();
        let p = self.point(name).map_err(Missing::into_error)?;
        let c = p.to_f64();
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let dir = [0.48, -0.6, 0.64];
        let moved: Result<Vec<F>> = (0..3)
            .map(|i| {
                let x = c[i] / n + relative * dir[i];
                let r = num_rational::BigRational::from_float(x).ok_or(Error::NonFiniteResult)?;
                F::from_scalar(&Scalar::Exact(r))
            })
            .collect();
        let moved = moved?;
        let mut out = self.clone();
        out.overrides.insert(
            name.to_string(),
            HPoint::new(moved[0].clone(), moved[1].clone(), moved[2].clone())?,
        );
        Ok(out)
    }

    /// Condition number of the projective frame taking the standard square
    /// to the vertices (unit representatives); large values flag nearly
    /// degenerate quadrilaterals.
    pub fn condition(&self) -> f64 {
        let a = self.vertices();
        let cols: Vec<[f64; 3]> = a
            .iter()
            .map(|p| {
                let c = p.to_f64();
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                [c[0] / n, c[1] / n, c[2] / n]
            })
            .collect();
        let s = nalgebra::Matrix3::from_fn(|i, j| cols[j][i]);
        let Some(inv) = s.try_inverse() else {
            return f64::INFINITY;
        };
        let lam = inv * nalgebra::Vector3::new(cols[3][0], cols[3][1], cols[3][2]);
        let m = nalgebra::Matrix3::from_fn(|i, j| s[(i, j)] * lam[j]);
        let sv = m.singular_values();
        let (mx, mn) = (sv.max(), sv.min());
        if mn == 0.0 {
            f64::INFINITY
        } else {
            mx / mn
        }
    }

    /// Full configuration as JSON, keyed by name; absent entries carry the
    /// blocking cause.
    pub fn to_json(&self) -> Value {
        self.complete();
        let mut points = Map::new();
        for n in all_point_names() {
            let v = match self.point(&n) {
                Ok(p) => serde_json::to_value(&p).expect("serializable"),
                Err(m) => json!({ "absent": m.into_error().code() }),
            };
            points.insert(n, v);
        }
        let mut conics = Map::new();
        for n in DERIVED_CONICS {
            let v = match self.conic(n) {
                Ok(c) => serde_json::to_value(&c).expect("serializable"),
                Err(m) => json!({ "absent": m.into_error().code() }),
            };
            conics.insert(n.to_string(), v);
        }
        let mut families = Map::new();
        for (f, st) in self.family_status() {
            let v = match st {
                Ok(()) => json!("present"),
                Err(e) => json!({ "absent": e.code() }),
            };
            families.insert(f, v);
        }
        json!({
            "backend": F::BACKEND,
            "seed": self.fingerprint.seed,
            "conic": serde_json::to_value(&self.conic).expect("serializable"),
            "points": points,
            "conics": conics,
            "families": families,
        })
    }
}

impl<F: Field> Names<F> for QuadConfig<F> {
    fn point(&self, name: &str) -> Found<HPoint<F>> {
        self.point_upto(name, stage_of_point(name))
    }

    fn conic(&self, name: &str) -> Found<Conic<F>> {
        match stage_of_conic(name) {
            Some(id) => self.conic_upto(name, id),
            None => Err(Missing::Unknown(name.to_string())),
        }
    }
}

/// A configuration with some names replaced or added; used by the erratum
/// oracle to evaluate candidate readings.
pub struct Overlay<'a, F: Field> {
    pub base: &'a QuadConfig<F>,
    pub extra: BTreeMap<String, HPoint<F>>,
}

impl<F: Field> Names<F> for Overlay<'_, F> {
    fn point(&self, name: &str) -> Found<HPoint<F>> {
        match self.extra.get(name) {
            Some(p) => Ok(p.clone()),
            None => self.base.point(name),
        }
    }

    fn conic(&self, name: &str) -> Found<Conic<F>> {
        self.base.conic(name)
    }
}

/// The sides of the diagonal triangle, `m_i` through the two diagonal
/// points other than `M_i`, each checked against the polar of `M_i`.
pub fn polar_triangle_lines<F: Field>(cfg: &QuadConfig<F>) -> Result<[HLine<F>; 3]> {
    let m = |i: usize| {
        cfg.point(&format!("M{i}"))
            .map_err(|_| Error::MissingFamily("M".into()))
    };
    let (m1, m2, m3) = (m(1)?, m(2)?, m(3)?);
    let lines = [join(&m2, &m3)?, join(&m3, &m1)?, join(&m1, &m2)?];
    for (i, (l, mp)) in lines.iter().zip([&m1, &m2, &m3]).enumerate() {
        let p = polar(cfg.base_conic(), mp)?;
        if !l.proj_eq(&p, cfg.tolerance()) {
            return Err(Error::DegeneratePosition(format!(
                "side m{} differs from the polar of M{}",
                i + 1,
                i + 1
            )));
        }
    }
    Ok(lines)
}
