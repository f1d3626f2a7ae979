//! The claim registry and its verifier.
//!
//! Claims are data (`data/claims.json`): an id, a kind, subject names in the
//! [`crate::expr`] grammar, and a provenance. Running a claim against a
//! configuration yields a [`VerificationReport`]; a claim whose subjects are
//! missing or coincide is skipped with the cause rather than failed.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Fingerprint, Missing, Names, QuadConfig};
use crate::conic::{conconic, Conic};
use crate::error::{Error, Result};
use crate::expr::{parse_line, parse_point};
use crate::poncelet::{sample_points, tangent_chain, Branch};
use crate::projective::{
    adjugate, collinear, concurrent, incidence_residual, join, mat_vec, meet, HLine, HPoint,
};
use crate::scalar::{Backend, Field, Float, Scalar, Tolerance};

pub const REGISTRY_VERSION: u32 = 1;

static EMBEDDED: &str = include_str!("../data/claims.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    Collinear,
    Concurrent,
    /// First subject is a point, the rest are lines through it.
    LinesThroughPoint,
    /// First subject is a line, the rest are points on it.
    PointsOnLine,
    Conconic,
    Orthocenter,
    /// Subjects are the outer and inner conic names.
    Closure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    PaperLiteral,
    ErratumCorrected,
    /// The printed reading of a corrected claim; reported, never counted.
    SupersededLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub id: String,
    pub kind: ClaimKind,
    pub subjects: Vec<String>,
    pub provenance: Provenance,
    pub statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sibling: Option<String>,
    /// Chain length for closure claims.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Point every closed chain's diagonals must pass through.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub version: u32,
    pub claims: Vec<Claim>,
}

impl Registry {
    pub fn parse(json: &str) -> Result<Self> {
        let r: Registry = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
        if r.version != REGISTRY_VERSION {
            return Err(Error::Version {
                found: r.version,
                expected: REGISTRY_VERSION,
            });
        }
        Ok(r)
    }

    pub fn get(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    /// Claims whose id equals a selector or starts with `selector/`.
    pub fn select(&self, selectors: &[&str]) -> Result<Vec<&Claim>> {
        if selectors.is_empty() {
            return Ok(self.claims.iter().collect());
        }
        let mut out: Vec<&Claim> = Vec::new();
        for s in selectors {
            let prefix = format!("{s}/");
            let hit: Vec<&Claim> = self
                .claims
                .iter()
                .filter(|c| c.id == *s || c.id.starts_with(&prefix))
                .collect();
            if hit.is_empty() {
                return Err(Error::UnknownSubject(s.to_string()));
            }
            for c in hit {
                if !out.iter().any(|o| o.id == c.id) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }
}

/// The shipped registry.
pub fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Registry::parse(EMBEDDED).expect("embedded registry is valid"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Holds,
    Fails,
    Skipped(Error),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Skipped(_) => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub id: String,
    pub status: Status,
    pub residual: Scalar,
    pub witness: Value,
    pub provenance: Provenance,
    pub fingerprint: Fingerprint,
}

impl Serialize for VerificationReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut v = json!({
            "id": self.id,
            "status": self.status.label(),
            "residual": self.residual,
            "witness": self.witness,
            "provenance": self.provenance,
            "fingerprint": {
                "seed": self.fingerprint.seed,
                "backend": self.fingerprint.backend,
            },
        });
        if let Status::Skipped(e) = &self.status {
            v["cause"] = json!(e.code());
        }
        v.serialize(s)
    }
}

fn skip(e: Error) -> (Status, Option<Scalar>, Value) {
    (Status::Skipped(e), None, Value::Null)
}

fn missing(m: Missing) -> Error {
    m.into_error()
}

fn verdict<F: Field>(ok: bool, r: F, witness: Value) -> (Status, Option<Scalar>, Value) {
    let st = if ok { Status::Holds } else { Status::Fails };
    (st, Some(r.to_scalar()), witness)
}

fn points_of<F: Field, N: Names<F> + ?Sized>(
    src: &N,
    subjects: &[String],
) -> Result<Vec<HPoint<F>>> {
    subjects
        .iter()
        .map(|s| src.eval_point(&parse_point(s)?).map_err(missing))
        .collect()
}

fn lines_of<F: Field, N: Names<F> + ?Sized>(
    src: &N,
    subjects: &[String],
) -> Result<Vec<HLine<F>>> {
    subjects
        .iter()
        .map(|s| src.eval_line(&parse_line(s)?).map_err(missing))
        .collect()
}

fn distinct<T, G: Fn(&T, &T) -> bool>(xs: &[T], same: G, err: Error) -> Result<()> {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if same(&xs[i], &xs[j]) {
                return Err(err);
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn evaluate<F: Field, N: Names<F> + ?Sized>(
    claim: &Claim,
    src: &N,
    fp: &Fingerprint,
    tol: &Tolerance,
) -> Result<(Status, Option<Scalar>, Value)> {
    let same_p = |a: &HPoint<F>, b: &HPoint<F>| a.proj_eq(b, tol);
    let same_l = |a: &HLine<F>, b: &HLine<F>| a.proj_eq(b, tol);
    match claim.kind {
        ClaimKind::Collinear => {
            let pts = points_of(src, &claim.subjects)?;
            distinct(&pts, same_p, Error::CoincidentPoints)?;
            let (ok, r) = collinear(&pts, tol)?;
            Ok(verdict(ok, r, to_json(&join(&pts[0], &pts[1])?)))
        }
        ClaimKind::Concurrent => {
            let ls = lines_of(src, &claim.subjects)?;
            distinct(&ls, same_l, Error::CoincidentLines)?;
            let (ok, r) = concurrent(&ls, tol)?;
            Ok(verdict(ok, r, to_json(&meet(&ls[0], &ls[1])?)))
        }
        ClaimKind::LinesThroughPoint => {
            let p = points_of(src, &claim.subjects[..1])?.remove(0);
            let ls = lines_of(src, &claim.subjects[1..])?;
            distinct(&ls, same_l, Error::CoincidentLines)?;
            let r = ls
                .iter()
                .map(|l| incidence_residual(&p, l, tol))
                .fold(F::zero(), F::max_of);
            Ok(verdict(r.is_zero(tol), r, to_json(&p)))
        }
        ClaimKind::PointsOnLine => {
            let l = lines_of(src, &claim.subjects[..1])?.remove(0);
            let pts = points_of(src, &claim.subjects[1..])?;
            let r = pts
                .iter()
                .map(|p| incidence_residual(p, &l, tol))
                .fold(F::zero(), F::max_of);
            Ok(verdict(r.is_zero(tol), r, to_json(&l)))
        }
        ClaimKind::Conconic => {
            let pts = points_of(src, &claim.subjects)?;
            distinct(&pts, same_p, Error::CoincidentPoints)?;
            let rep = conconic(&pts, tol)?;
            Ok(verdict(rep.holds, rep.residual, to_json(&rep.conic)))
        }
        ClaimKind::Orthocenter => {
            let (ok, r, o) = brocard(src, tol)?;
            Ok(verdict(ok, r, to_json(&o)))
        }
        ClaimKind::Closure => closure(claim, src, fp, tol),
    }
}

/// Checks one claim. Never fails: errors become `Skipped`.
pub fn run_claim<F: Field, N: Names<F> + ?Sized>(
    claim: &Claim,
    src: &N,
    fp: &Fingerprint,
    tol: &Tolerance,
) -> VerificationReport {
    let (status, residual, witness) = evaluate(claim, src, fp, tol).unwrap_or_else(skip);
    VerificationReport {
        id: claim.id.clone(),
        status,
        residual: residual.unwrap_or(Scalar::Float(f64::NAN)),
        witness,
        provenance: claim.provenance,
        fingerprint: fp.clone(),
    }
}

/// Runs the given claims (all of them when `ids` is empty) in parallel.
pub fn run_all<F: Field>(
    cfg: &QuadConfig<F>,
    ids: &[&str],
    tol: &Tolerance,
) -> Result<Vec<VerificationReport>> {
    let claims = registry().select(ids)?;
    cfg.complete();
    let fp = cfg.fingerprint().clone();
    Ok(claims
        .par_iter()
        .map(|c| run_claim(c, cfg, &fp, tol))
        .collect())
}

/// Center of a circle, or `NotACircle`.
pub fn circle_center<F: Field>(c: &Conic<F>) -> Result<HPoint<F>> {
    let m = c.matrix();
    let scale = F::norm(&m.iter().flatten().cloned().collect::<Vec<_>>());
    if !(m[0][0].clone() - m[1][1].clone()).negligible(&scale)
        || !m[0][1].negligible(&scale)
        || m[0][0].negligible(&scale)
    {
        return Err(Error::NotACircle);
    }
    let z = [F::zero(), F::zero(), F::one()];
    HPoint::from_vec(mat_vec(&adjugate(m), &z))
}

/// The centre as orthocentre of the diagonal triangle: largest normalized
/// dot product `(O - Mi) . (Mj - Mk)` over the three altitudes.
fn brocard<F: Field, N: Names<F> + ?Sized>(
    src: &N,
    tol: &Tolerance,
) -> Result<(bool, F, HPoint<F>)> {
    let c = src.conic("C").map_err(missing)?;
    let o = circle_center(&c)?;
    let (ox, oy) = o.to_affine().ok_or(Error::NotACircle)?;
    let mut aff = Vec::new();
    for i in 1..=3 {
        let name = format!("M{i}");
        let p = src.point(&name).map_err(missing)?;
        let xy = p.to_affine().filter(|_| !p.is_at_infinity(tol));
        aff.push(xy.ok_or(Error::InfiniteVertex(name))?);
    }
    let mut worst = F::zero();
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let a = (ox.clone() - aff[i].0.clone(), oy.clone() - aff[i].1.clone());
        let b = (
            aff[j].0.clone() - aff[k].0.clone(),
            aff[j].1.clone() - aff[k].1.clone(),
        );
        let dot = a.0.clone() * b.0.clone() + a.1.clone() * b.1.clone();
        let r = if F::BACKEND == Backend::Exact {
            dot.abs()
        } else {
            let n = F::norm(&[a.0, a.1]) * F::norm(&[b.0, b.1]);
            if n.is_exact_zero() {
                dot.abs()
            } else {
                dot.abs().checked_div(&n)?
            }
        };
        worst = F::max_of(worst, r);
    }
    Ok((worst.is_zero(tol), worst, o))
}

/// Brocard's theorem on a configuration inscribed in a circle.
pub fn brocard_check<F: Field>(cfg: &QuadConfig<F>, tol: &Tolerance) -> VerificationReport {
    let claim = registry().get("thm-2.1").expect("registered");
    run_claim(claim, cfg, cfg.fingerprint(), tol)
}

/// Number of chains started by closure claims.
pub const CLOSURE_STARTS: usize = 16;

fn closure<F: Field, N: Names<F> + ?Sized>(
    claim: &Claim,
    src: &N,
    fp: &Fingerprint,
    tol: &Tolerance,
) -> Result<(Status, Option<Scalar>, Value)> {
    if F::BACKEND == Backend::Exact {
        // chains need square roots
        return Err(Error::BackendMismatch);
    }
    let [outer, inner] = [&claim.subjects[0], &claim.subjects[1]]
        .map(|n| src.conic(n).map_err(missing).and_then(|c| c.convert::<Float>()));
    let (outer, inner) = (outer?, inner?);
    let k = claim.k.unwrap_or(4);
    let diag: Option<HPoint<Float>> = match &claim.diagonal {
        Some(n) => Some(src.point(n).map_err(missing)?.convert()?),
        None => None,
    };
    let mut worst = 0.0f64;
    let mut used = 0;
    for s in sample_points(&outer, CLOSURE_STARTS, fp.seed.unwrap_or(0)) {
        let orbit = match tangent_chain(&outer, &inner, None, &s, k, Branch::First) {
            Ok(o) => o,
            Err(Error::InsideInner) | Err(Error::TangentFromOnConic) => continue,
            Err(e) => return Err(e),
        };
        used += 1;
        worst = worst.max(orbit.closure_residual.0);
        if let (Some(d), Some(p)) = (&diag, &orbit.diagonal_point) {
            worst = worst.max(d.distance(p).0);
        }
    }
    if used == 0 {
        return Err(Error::InsideInner);
    }
    let r = Float(worst);
    Ok(verdict(r.is_zero(tol), r, json!({ "starts": used, "k": k })))
}

/// Counts of a batch of reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub holds: usize,
    pub fails: usize,
    pub skipped: usize,
    /// Largest residual over executed claims that count (as a double).
    pub max_residual: f64,
    /// Failing claims that count towards the exit code.
    pub counted_failures: Vec<String>,
}

pub fn summarize(reports: &[VerificationReport]) -> Summary {
    let mut s = Summary::default();
    for r in reports {
        match &r.status {
            Status::Holds => s.holds += 1,
            Status::Fails => {
                s.fails += 1;
                if r.provenance != Provenance::SupersededLiteral {
                    s.counted_failures.push(r.id.clone());
                }
            }
            Status::Skipped(_) => s.skipped += 1,
        }
        if !matches!(r.status, Status::Skipped(_)) && r.provenance != Provenance::SupersededLiteral {
            s.max_residual = s.max_residual.max(r.residual.to_f64());
        }
    }
    s
}

/// 0 when no counted claim fails, 1 otherwise.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if summarize(reports).counted_failures.is_empty() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BuildOptions;
    use crate::sampler::{sample, SamplerSpec};
    use crate::scalar::Rational;

    #[test]
    fn registry_is_consistent() {
        let reg = registry();
        for c in &reg.claims {
            if c.provenance != Provenance::PaperLiteral {
                let sib = c.sibling.as_deref().expect("corrected claims name a sibling");
                assert!(reg.get(sib).is_some(), "{}", c.id);
            }
            match c.kind {
                ClaimKind::Collinear | ClaimKind::Conconic => {
                    for s in &c.subjects {
                        parse_point(s).unwrap();
                    }
                }
                ClaimKind::Concurrent => {
                    for s in &c.subjects {
                        parse_line(s).unwrap();
                    }
                }
                _ => {}
            }
        }
        assert_eq!(reg.select(&["prop-3.1"]).unwrap().len(), 16 + 8);
        assert_eq!(reg.select(&["prop-3.3"]).unwrap().len(), 25);
        assert_eq!(reg.select(&["thm-4.1/bullet-3"]).unwrap().len(), 4);
        assert!(reg.select(&["nope"]).is_err());
    }

    fn exact_cfg(seed: u64) -> QuadConfig<Rational> {
        sample(&SamplerSpec::perfect_square(seed)).unwrap()
    }

    #[test]
    fn lemma_2_1_holds_exactly() {
        let cfg = exact_cfg(1);
        let tol = Tolerance::default();
        for r in run_all(&cfg, &["lemma-2.1"], &tol).unwrap() {
            assert_eq!(r.status, Status::Holds, "{}", r.id);
            assert_eq!(r.residual.to_f64(), 0.0);
        }
    }

    #[test]
    fn missing_family_is_skipped() {
        let a = [(1, 0), (0, 1), (-1, 0), (0, -1)].map(|(x, y)| HPoint::from_i64(x, y, 1));
        let cfg = QuadConfig::<Rational>::build(
            Conic::unit_circle(),
            a,
            BuildOptions {
                tol: Tolerance::default(),
                seed: None,
            },
        )
        .unwrap();
        let r = &run_all(&cfg, &["lemma-2.3/U"], &Tolerance::default()).unwrap()[0];
        assert_eq!(r.status, Status::Skipped(Error::NonSquareDiscriminant));
        let j = serde_json::to_value(r).unwrap();
        assert_eq!(j["cause"], "NonSquareDiscriminant");
        // M1, M2 at infinity
        let b = brocard_check(&cfg, &Tolerance::default());
        assert_eq!(b.status, Status::Skipped(Error::InfiniteVertex("M1".into())));
    }

    #[test]
    fn brocard_on_circle_of_radius_five() {
        let c = Conic::from_coefficients(
            Rational::from_i64(1),
            Rational::from_i64(0),
            Rational::from_i64(1),
            Rational::from_i64(0),
            Rational::from_i64(0),
            Rational::from_i64(-25),
        )
        .unwrap();
        let a = [(5, 0), (4, 3), (-5, 0), (0, -5)].map(|(x, y)| HPoint::from_i64(x, y, 1));
        let cfg = QuadConfig::build(
            c,
            a,
            BuildOptions {
                tol: Tolerance::default(),
                seed: None,
            },
        )
        .unwrap();
        let r = brocard_check(&cfg, &Tolerance::default());
        assert_eq!(r.status, Status::Holds);
        assert_eq!(r.witness, json!(["0", "0", "1"]));
    }

    #[test]
    fn ellipse_is_not_a_circle() {
        let cfg = exact_cfg(2);
        let r = brocard_check(&cfg, &Tolerance::default());
        assert_eq!(r.status, Status::Skipped(Error::NotACircle));
    }

    #[test]
    fn literal_y_claims_are_degenerate() {
        let cfg = exact_cfg(3);
        let r = &run_all(&cfg, &["lemma-4.1/C2/literal"], &Tolerance::default()).unwrap()[0];
        assert_eq!(r.status, Status::Skipped(Error::CoincidentPoints));
        assert_eq!(exit_code(std::slice::from_ref(r)), 0);
    }
}
