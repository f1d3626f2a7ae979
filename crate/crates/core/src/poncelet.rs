//! Poncelet quadrilaterals: the canonical pencil, tangent chains, closure
//! and connectivity tests, and the sequence of conics obtained by iterating
//! the quadrilateral construction.
//!
//! The pencil is
//!
//! ```text
//! outer:  lambda x^2 + (1 - lambda) y^2 - 1 = 0
//! inner:  x^2 + mu xy + y^2 + c = 0,   c = (mu^2 - 4) / 4
//! ```
//!
//! With this constant the four lines `x = ±1`, `y = ±1` touch the inner conic
//! and the square `(±1, ±1)` is inscribed in the outer one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{BuildOptions, Names, QuadConfig};
use crate::conic::{
    line_conic_intersect, on_conic, rational_point_param, second_intersection,
    tangency_points_from, transform_conic, Conic, Param,
};
use crate::error::{Error, Result};
use crate::projective::{
    adjugate, dot, join, map_from_correspondence, mat_vec, meet, HLine, HPoint, ProjMap,
};
use crate::scalar::{Field, Float, Tolerance};

/// Which constant to put in the inner conic.
#[derive(Debug, Clone, PartialEq)]
pub enum PencilConstant<F> {
    /// `(mu^2 - 4) / 4`, the value forced by the tangency condition.
    Derived,
    /// `(mu^2 - 1) / 4`, as printed.
    Printed,
    Custom(F),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PonceletPencil<F: Field> {
    pub lambda: F,
    pub mu: F,
    pub c: F,
    pub outer: Conic<F>,
    pub inner: Conic<F>,
}

fn fr<F: Field>(n: i64, d: i64) -> F {
    F::from_ratio(n, d).expect("nonzero denominator")
}

fn derived_constant<F: Field>(mu: &F) -> F {
    (mu.square() - F::from_i64(4)) * fr(1, 4)
}

/// The pencil with the derived constant; verifies the inscribed square and
/// its tangent sides.
pub fn make_pencil<F: Field>(lambda: F, mu: F) -> Result<PonceletPencil<F>> {
    let p = pencil_with_constant(lambda, mu, PencilConstant::Derived)?;
    let tol = Tolerance::default();
    for (x, y) in [(1, 1), (1, -1), (-1, -1), (-1, 1)] {
        if !on_conic(&p.outer, &HPoint::from_i64(x, y, 1), &tol).0 {
            return Err(Error::DegeneratePencil("square not inscribed".into()));
        }
    }
    for l in [[1, 0, -1], [1, 0, 1], [0, 1, -1], [0, 1, 1]] {
        let l = HLine::from_i64(l[0], l[1], l[2]);
        if !line_tangent_residual(&p.inner, &l).negligible(&F::one()) {
            return Err(Error::DegeneratePencil("square sides not tangent".into()));
        }
    }
    Ok(p)
}

/// The pencil with an arbitrary inner constant, without the square checks.
/// Used for negative controls.
pub fn pencil_with_constant<F: Field>(
    lambda: F,
    mu: F,
    constant: PencilConstant<F>,
) -> Result<PonceletPencil<F>> {
    if lambda.is_exact_zero() || (lambda.clone() - F::one()).is_exact_zero() {
        return Err(Error::DegeneratePencil("lambda must differ from 0 and 1".into()));
    }
    if (mu.square() - F::from_i64(4)).is_exact_zero() {
        return Err(Error::DegeneratePencil("|mu| = 2 makes the inner conic a line pair".into()));
    }
    let c = match constant {
        PencilConstant::Derived => derived_constant(&mu),
        PencilConstant::Printed => (mu.square() - F::one()) * fr(1, 4),
        PencilConstant::Custom(c) => c,
    };
    let outer = Conic::from_coefficients(
        lambda.clone(),
        F::zero(),
        F::one() - lambda.clone(),
        F::zero(),
        F::zero(),
        -F::one(),
    )?;
    let inner = Conic::from_coefficients(
        F::one(),
        mu.clone(),
        F::one(),
        F::zero(),
        F::zero(),
        c.clone(),
    )?;
    if outer.is_degenerate() || inner.is_degenerate() {
        return Err(Error::DegeneratePencil("degenerate conic".into()));
    }
    Ok(PonceletPencil {
        lambda,
        mu,
        c,
        outer,
        inner,
    })
}

/// `n^2 - k^2 - mu k - 1`; zero iff `y = kx + n` touches the inner conic.
pub fn tangency_condition<F: Field>(k: &F, n: &F, mu: &F) -> F {
    n.square() - k.square() - mu.clone() * k.clone() - F::one()
}

/// `l^T adj(C) l`, normalized; zero iff `l` is tangent to `C`.
pub fn line_tangent_residual<F: Field>(c: &Conic<F>, l: &HLine<F>) -> F {
    let adj = adjugate(c.matrix());
    let v = l.coords();
    let r = dot(v, &mat_vec(&adj, v));
    let scale = F::norm(v).square() * F::norm(&adj.iter().flatten().cloned().collect::<Vec<_>>());
    if F::BACKEND == crate::scalar::Backend::Exact || scale.is_exact_zero() {
        r
    } else {
        r.checked_div(&scale).unwrap_or(r)
    }
}

/// A non-vertical line `y = kx + n`, or a vertical one `x = x0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TangentLine<F: Field> {
    Slope { k: F, n: F },
    Vertical { x: F },
}

impl<F: Field> TangentLine<F> {
    pub fn from_line(l: &HLine<F>) -> Result<Self> {
        let [a, b, c] = l.coords().clone();
        if b.negligible(&F::norm(l.coords())) {
            if a.negligible(&F::norm(l.coords())) {
                return Err(Error::DegenerateInput("line at infinity".into()));
            }
            return Ok(TangentLine::Vertical {
                x: (-c).checked_div(&a)?,
            });
        }
        Ok(TangentLine::Slope {
            k: (-a).checked_div(&b)?,
            n: (-c).checked_div(&b)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Branch<F: Field> {
    /// Tangent whose contact point has the smaller parameter on the inner
    /// conic's rational parametrization.
    First,
    Second,
    /// The tangent other than the given line.
    Avoid(HLine<F>),
}

fn tangents_from<F: Field>(inner: &Conic<F>, a: &HPoint<F>) -> Result<[(HPoint<F>, HLine<F>); 2]> {
    let pts = tangency_points_from(inner, a).map_err(|e| match e {
        Error::InsidePoint => Error::InsideInner,
        e => e,
    })?;
    let [p, q] = pts;
    Ok([(p.clone(), join(a, &p)?), (q.clone(), join(a, &q)?)])
}

fn param_key<F: Field>(p: &Param<F>) -> f64 {
    match p {
        Param::Finite(t) => t.to_f64(),
        Param::Infinity => f64::INFINITY,
    }
}

fn choose<F: Field>(
    inner: &Conic<F>,
    inner_base: Option<&HPoint<F>>,
    pair: [(HPoint<F>, HLine<F>); 2],
    branch: &Branch<F>,
) -> Result<HLine<F>> {
    let [(p, lp), (q, lq)] = pair;
    match branch {
        Branch::Avoid(prev) => {
            if lp.distance(prev).to_f64() >= lq.distance(prev).to_f64() {
                Ok(lp)
            } else {
                Ok(lq)
            }
        }
        Branch::First | Branch::Second => {
            let first_is_p = match inner_base {
                Some(b) => {
                    let par = rational_point_param(inner, b)?;
                    param_key(&par.parameter_of(&p)?) <= param_key(&par.parameter_of(&q)?)
                }
                None => true,
            };
            let want_p = first_is_p == (*branch == Branch::First);
            Ok(if want_p { lp } else { lq })
        }
    }
}

impl<F: Field> PonceletPencil<F> {
    /// Contact point of `x = -1` with the inner conic, `(-1, mu/2)`; base
    /// of the parametrization used by the branch rule.
    pub fn inner_base(&self) -> HPoint<F> {
        HPoint::new(-F::one(), self.mu.clone() * fr(1, 2), F::one()).expect("nonzero")
    }

    /// One tangent step from `a` on the outer conic.
    pub fn step(&self, a: &HPoint<F>, branch: &Branch<F>) -> Result<(HPoint<F>, TangentLine<F>)> {
        if !on_conic(&self.outer, a, &Tolerance::default()).0 {
            return Err(Error::PointNotOnConic);
        }
        let base = self.inner_base();
        let pair = tangents_from(&self.inner, a)?;
        let l = choose(&self.inner, Some(&base), pair, branch)?;
        let b = second_intersection(&self.outer, a, &l)?;
        Ok((b, TangentLine::from_line(&l)?))
    }
}

/// Result of the antipodal-pair check.
#[derive(Debug, Clone)]
pub struct SymmetricPair<F: Field> {
    pub b: HPoint<F>,
    pub b_prime: HPoint<F>,
    /// Distance between `b` and the reflection of `b_prime` in the origin.
    pub residual: F,
    /// Largest residual of the closed-form slope and intercept of the line
    /// through the reflection of `a` and `b`, and of its tangency condition.
    /// `None` when the first tangent is horizontal or vertical.
    pub closed_form_residual: Option<F>,
}

fn reflect<F: Field>(p: &HPoint<F>) -> HPoint<F> {
    let [x, y, z] = p.coords().clone();
    HPoint::new(-x, -y, z).expect("nonzero")
}

pub fn symmetric_pair_check<F: Field>(
    pencil: &PonceletPencil<F>,
    a: &HPoint<F>,
) -> Result<SymmetricPair<F>> {
    let (b, t) = pencil.step(a, &Branch::First)?;
    let (b_prime, _) = pencil.step(a, &Branch::Second)?;
    let residual = b.distance(&reflect(&b_prime));
    let closed_form_residual = closed_form(pencil, a, &b, &t)?;
    Ok(SymmetricPair {
        b,
        b_prime,
        residual,
        closed_form_residual,
    })
}

/// Checks the explicit slope and intercept of the reflected chord.
fn closed_form<F: Field>(
    p: &PonceletPencil<F>,
    a: &HPoint<F>,
    b: &HPoint<F>,
    t: &TangentLine<F>,
) -> Result<Option<F>> {
    let TangentLine::Slope { k, n } = t else {
        return Ok(None);
    };
    let (Some((x1, _)), Some((x2, _))) = (a.to_affine(), b.to_affine()) else {
        return Ok(None);
    };
    if k.negligible(&F::one()) {
        return Ok(None);
    }
    let lam = p.lambda.clone();
    let one_m = F::one() - lam.clone();
    let two = F::from_i64(2);
    let denom = lam.clone() + one_m.clone() * k.square();
    // x2 - x1 = sqrt(D) / denom, with the sign fixed by the order of a and b
    let sqrt_d = (x2 - x1) * denom;
    let d = F::from_i64(4)
        * (lam.clone() - lam.clone() * one_m.clone() * n.square() + one_m.clone() * k.square());
    let kt = (-lam).checked_div(&(one_m.clone() * k.clone()))?;
    let nt = sqrt_d.checked_div(&(two * k.clone() * one_m))?;
    let chord = join(&reflect(a), b)?;
    let TangentLine::Slope { k: k2, n: n2 } = TangentLine::from_line(&chord)? else {
        return Ok(None);
    };
    let parts = [
        (sqrt_d.square() - d.clone()).abs().checked_div(&F::max_of(d.abs(), F::one()))?,
        (k2 - kt.clone()).abs(),
        (n2 - nt.clone()).abs(),
        tangency_condition(&kt, &nt, &p.mu).abs(),
    ];
    Ok(Some(parts.into_iter().fold(F::zero(), F::max_of)))
}

/// A tangent chain of `k` steps and its closure data.
#[derive(Debug, Clone, Serialize)]
pub struct PonceletOrbit<F: Field> {
    pub vertices: Vec<HPoint<F>>,
    pub lines: Vec<HLine<F>>,
    /// Distance between the `k`-th successor and the start.
    pub closure_residual: F,
    /// Meet of the diagonals `v1v3`, `v2v4` (four-step chains only).
    pub diagonal_point: Option<HPoint<F>>,
    /// Line through the meets of opposite sides (four-step chains only).
    pub side_line: Option<HLine<F>>,
}

/// Runs `k` tangent steps from `start` on `outer` around `inner`.
pub fn tangent_chain<F: Field>(
    outer: &Conic<F>,
    inner: &Conic<F>,
    inner_base: Option<&HPoint<F>>,
    start: &HPoint<F>,
    k: usize,
    branch: Branch<F>,
) -> Result<PonceletOrbit<F>> {
    let mut vertices = vec![start.clone()];
    let mut lines: Vec<HLine<F>> = Vec::new();
    let mut branch = branch;
    for _ in 0..k {
        let p = vertices.last().unwrap().clone();
        let l = choose(inner, inner_base, tangents_from(inner, &p)?, &branch)?;
        let q = second_intersection(outer, &p, &l)?;
        branch = Branch::Avoid(l.clone());
        lines.push(l);
        vertices.push(q);
    }
    let closure_residual = vertices[k].distance(start);
    let (diagonal_point, side_line) = if k == 4 {
        let v = &vertices;
        let d = join(&v[0], &v[2]).and_then(|a| meet(&a, &join(&v[1], &v[3])?)).ok();
        let s = (|| {
            let p = meet(&join(&v[0], &v[1])?, &join(&v[2], &v[3])?)?;
            let q = meet(&join(&v[1], &v[2])?, &join(&v[3], &v[0])?)?;
            join(&p, &q)
        })()
        .ok();
        (d, s)
    } else {
        (None, None)
    };
    vertices.truncate(k);
    Ok(PonceletOrbit {
        vertices,
        lines,
        closure_residual,
        diagonal_point,
        side_line,
    })
}

/// Four steps of the pencil from `a`.
pub fn closure_check<F: Field>(pencil: &PonceletPencil<F>, a: &HPoint<F>) -> Result<PonceletOrbit<F>> {
    if !on_conic(&pencil.outer, a, &Tolerance::default()).0 {
        return Err(Error::PointNotOnConic);
    }
    let base = pencil.inner_base();
    tangent_chain(&pencil.outer, &pencil.inner, Some(&base), a, 4, Branch::First)
}

/// Result of moving a poristic pair to the canonical pencil.
#[derive(Debug, Clone)]
pub struct Canonical<F: Field> {
    /// Sends the quadrilateral to `(1,1), (1,-1), (-1,-1), (-1,1)`.
    pub map: ProjMap<F>,
    pub pencil: PonceletPencil<F>,
}

/// Normalizes a symmetric matrix so that entry `(i, i)` equals `target`.
fn scaled<F: Field>(c: &Conic<F>, i: usize, target: F) -> Result<[[F; 3]; 3]> {
    let m = c.matrix();
    let s = target.checked_div(&m[i][i])?;
    Ok(std::array::from_fn(|r| {
        std::array::from_fn(|col| m[r][col].clone() * s.clone())
    }))
}

pub fn canonicalize_porism<F: Field>(
    outer: &Conic<F>,
    quad: &[HPoint<F>; 4],
    inner: &Conic<F>,
    tol: &Tolerance,
) -> Result<Canonical<F>> {
    for p in quad {
        if !on_conic(outer, p, tol).0 {
            return Err(Error::NotInscribed);
        }
    }
    for i in 0..4 {
        let l = join(&quad[i], &quad[(i + 1) % 4])?;
        let r = line_tangent_residual(inner, &l);
        if !r.is_zero(tol) {
            return Err(Error::NotCircumscribed);
        }
    }
    let square = [(1, 1), (1, -1), (-1, -1), (-1, 1)].map(|(x, y)| HPoint::from_i64(x, y, 1));
    let map = map_from_correspondence(quad, &square)?;
    let o = scaled(&transform_conic(&map, outer), 2, -F::one())?;
    let n = scaled(&transform_conic(&map, inner), 0, F::one())?;
    let lambda = o[0][0].clone();
    let mu = n[0][1].clone() * F::from_i64(2);
    let off = |m: &[[F; 3]; 3]| [m[0][2].clone(), m[1][2].clone()];
    let mut bad = vec![
        o[0][1].clone(),
        o[1][1].clone() - (F::one() - lambda.clone()),
        n[1][1].clone() - F::one(),
        n[2][2].clone() - derived_constant(&mu),
    ];
    bad.extend(off(&o));
    bad.extend(off(&n));
    if let Some(x) = bad.iter().find(|x| !x.is_zero(tol)) {
        return Err(Error::PencilMismatch(format!("entry off by {}", x.to_f64())));
    }
    let pencil = make_pencil(lambda, mu)?;
    Ok(Canonical { map, pencil })
}

/// Outcome of a Poncelet connectivity test.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityReport {
    pub k: usize,
    pub residuals: Vec<f64>,
    /// Starts skipped because their tangents to the inner conic are not real.
    pub skipped: usize,
    pub max_residual: f64,
    pub connected: bool,
}

/// Random points of a real conic, found by intersecting it with random
/// lines through random points.
pub fn sample_points(c: &Conic<Float>, count: usize, seed: u64) -> Vec<HPoint<Float>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 100 * count + 100 {
        tries += 1;
        let p = HPoint::new(
            Float(rng.gen_range(-1.0..1.0)),
            Float(rng.gen_range(-1.0..1.0)),
            Float(rng.gen_range(-1.0..1.0)),
        );
        let q = HPoint::new(
            Float(rng.gen_range(-1.0..1.0)),
            Float(rng.gen_range(-1.0..1.0)),
            Float(rng.gen_range(-1.0..1.0)),
        );
        let (Ok(p), Ok(q)) = (p, q) else { continue };
        let Ok(l) = join(&p, &q) else { continue };
        if let Ok(pts) = line_conic_intersect(c, &l) {
            if pts.len() == 2 {
                out.push(pts[rng.gen_range(0..2)].clone());
            }
        }
    }
    out
}

/// Runs `k`-step chains from `starts` random points of `outer`; connected
/// iff every chain with real tangents closes within `tol`.
pub fn connectivity_test(
    outer: &Conic<Float>,
    inner: &Conic<Float>,
    k: usize,
    starts: usize,
    seed: u64,
    tol: f64,
) -> Result<ConnectivityReport> {
    if outer.is_degenerate() || inner.is_degenerate() {
        return Err(Error::DegenerateConic);
    }
    let mut residuals = Vec::new();
    let mut skipped = 0;
    for s in sample_points(outer, starts, seed) {
        match tangent_chain(outer, inner, None, &s, k, Branch::First) {
            Ok(o) => residuals.push(o.closure_residual.0),
            Err(Error::InsideInner) | Err(Error::TangentFromOnConic) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(ConnectivityReport {
        k,
        connected: !residuals.is_empty() && max_residual < tol,
        residuals,
        skipped,
        max_residual,
    })
}

/// Successor quadrilateral in the conic sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceRule {
    /// `(Z1, Z2, Z3, Z4)` on the conic through the N, P and Z points.
    Z,
    /// The tangential quadrilateral `(N1, P2, P1, N2)` on the same conic.
    NP,
}

/// Conics `C_0 = cfg.conic, C_1, ...`, `depth` of them in all, each with
/// the configuration built on it.
pub fn conic_sequence<F: Field>(
    cfg: &QuadConfig<F>,
    depth: usize,
    rule: SequenceRule,
) -> Result<Vec<QuadConfig<F>>> {
    let mut out = vec![cfg.clone()];
    while out.len() < depth {
        let step = out.len();
        let cur = out.last().unwrap();
        let degenerate = |reason: String| Error::SequenceDegenerated { step, reason };
        let next = cur
            .conic("E")
            .map_err(|m| degenerate(m.into_error().to_string()))?;
        let names = match rule {
            SequenceRule::Z => ["Z1", "Z2", "Z3", "Z4"],
            SequenceRule::NP => ["N1", "P2", "P1", "N2"],
        };
        let quad: Vec<HPoint<F>> = names
            .iter()
            .map(|n| cur.point(n).map_err(|m| degenerate(m.into_error().to_string())))
            .collect::<Result<_>>()?;
        let quad: [HPoint<F>; 4] = quad.try_into().expect("four points");
        let opts = BuildOptions {
            tol: *cur.tolerance(),
            seed: cur.fingerprint().seed,
        };
        let built = QuadConfig::build(next, quad, opts).map_err(|e| degenerate(e.to_string()))?;
        out.push(built);
    }
    Ok(out)
}
