//! Conics as symmetric 3x3 matrices: fitting, incidence, tangency, polarity
//! and line intersection.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::projective::{
    adjugate, cross, dot, join, mat_det, mat_mul, mat_vec, meet, transpose, HLine, HPoint, Mat3,
    ProjMap, Vec3,
};
use crate::scalar::{Backend, Field, Scalar, Tolerance};

/// Float conics whose normalized determinant falls below this are degenerate.
pub const FLOAT_DET_THRESHOLD: f64 = 1e-12;

/// A float five-point fit is rejected when `s5 / s1` drops below this.
pub const FIT_RANK_THRESHOLD: f64 = 1e-11;

/// Symmetric matrix `M` with the conic `p^T M p = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conic<F> {
    m: Mat3<F>,
}

fn frobenius<F: Field>(m: &Mat3<F>) -> F {
    let flat: Vec<F> = m.iter().flatten().cloned().collect();
    F::norm(&flat)
}

impl<F: Field> Conic<F> {
    /// Builds a conic from a symmetric nonzero matrix. The representative is
    /// rescaled to a primitive integer matrix (exact) or unit Frobenius norm
    /// (float), with the first nonzero entry positive.
    pub fn new(m: Mat3<F>) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteResult);
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if m[i][j] != m[j][i] {
                    return Err(Error::DegenerateInput("conic matrix is not symmetric".into()));
                }
            }
        }
        let mut flat: Vec<F> = m.iter().flatten().cloned().collect();
        if flat.iter().all(|x| x.is_exact_zero()) {
            return Err(Error::ZeroVector);
        }
        F::normalize_projective(&mut flat);
        // normalize_projective fixes the sign of the last entry for exact;
        // prefer the leading entry for matrices in both backends
        let lead = flat.iter().find(|x| !x.negligible(&F::one())).cloned();
        if lead.is_some_and(|x| x.is_negative()) {
            for x in flat.iter_mut() {
                *x = -x.clone();
            }
        }
        let m = std::array::from_fn(|i| std::array::from_fn(|j| flat[3 * i + j].clone()));
        Ok(Conic { m })
    }

    /// `a x^2 + b xy + c y^2 + d xz + e yz + f z^2`.
    pub fn from_coefficients(a: F, b: F, c: F, d: F, e: F, f: F) -> Result<Self> {
        let two = F::from_i64(2);
        Conic::new([
            [two.clone() * a, b.clone(), d.clone()],
            [b, two.clone() * c, e.clone()],
            [d, e, two * f],
        ])
    }

    pub fn unit_circle() -> Self {
        Conic::from_coefficients(
            F::one(),
            F::zero(),
            F::one(),
            F::zero(),
            F::zero(),
            -F::one(),
        )
        .expect("unit circle")
    }

    pub fn matrix(&self) -> &Mat3<F> {
        &self.m
    }

    /// Coefficients `[a, b, c, d, e, f]` of the quadratic form.
    pub fn coefficients(&self) -> [F; 6] {
        let two = F::from_i64(2);
        let h = |x: &F| x.checked_div(&two).expect("two is nonzero");
        [
            h(&self.m[0][0]),
            self.m[0][1].clone(),
            h(&self.m[1][1]),
            self.m[0][2].clone(),
            self.m[1][2].clone(),
            h(&self.m[2][2]),
        ]
    }

    pub fn quad_form(&self, p: &Vec3<F>) -> F {
        dot(p, &mat_vec(&self.m, p))
    }

    pub fn bilinear(&self, p: &Vec3<F>, q: &Vec3<F>) -> F {
        dot(p, &mat_vec(&self.m, q))
    }

    /// Determinant of the normalized representative.
    pub fn det(&self) -> F {
        mat_det(&self.m)
    }

    pub fn is_degenerate(&self) -> bool {
        match F::BACKEND {
            Backend::Exact => self.det().is_exact_zero(),
            Backend::Float => self.det().to_f64().abs() < FLOAT_DET_THRESHOLD,
        }
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateConic)
        } else {
            Ok(())
        }
    }

    /// Projective equality of conics (proportional matrices).
    pub fn proj_eq(&self, other: &Conic<F>, tol: &Tolerance) -> bool {
        let a: Vec<F> = self.m.iter().flatten().cloned().collect();
        let b: Vec<F> = other.m.iter().flatten().cloned().collect();
        match F::BACKEND {
            Backend::Exact => a == b,
            Backend::Float => {
                let d: f64 = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x.to_f64() - y.to_f64()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let s: f64 = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x.to_f64() + y.to_f64()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                d.min(s) <= tol.epsilon
            }
        }
    }

    pub fn convert<G: Field>(&self) -> Result<Conic<G>> {
        let m: Result<Vec<G>> = self
            .m
            .iter()
            .flatten()
            .map(|x| G::from_scalar(&x.to_scalar()))
            .collect();
        let m = m?;
        Conic::new(std::array::from_fn(|i| {
            std::array::from_fn(|j| m[3 * i + j].clone())
        }))
    }
}

/// Residual `|p^T C p| / (|C| |p|^2)` and whether it is zero.
pub fn on_conic<F: Field>(c: &Conic<F>, p: &HPoint<F>, tol: &Tolerance) -> (bool, F) {
    let v = p.coords();
    let raw = c.quad_form(v).abs();
    let r = if tol.relative {
        let pn = F::norm(v);
        raw.checked_div(&(frobenius(&c.m) * pn.clone() * pn))
            .unwrap_or_else(|_| raw.clone())
    } else {
        raw
    };
    (r.is_zero(tol), r)
}

fn veronese<F: Field>(p: &Vec3<F>) -> Vec<F> {
    let [x, y, z] = p.clone();
    vec![
        x.clone() * x.clone(),
        x.clone() * y.clone(),
        y.clone() * y.clone(),
        x.clone() * z.clone(),
        y.clone() * z.clone(),
        z.clone() * z,
    ]
}

fn conic_from_null<F: Field>(v: &[F]) -> Result<Conic<F>> {
    Conic::from_coefficients(
        v[0].clone(),
        v[1].clone(),
        v[2].clone(),
        v[3].clone(),
        v[4].clone(),
        v[5].clone(),
    )
}

/// Result of a five-point fit; `conditioning` is `s5 / s1` of the
/// row-normalized Veronese system (1 for exact fits).
#[derive(Debug, Clone)]
pub struct ConicFit<F> {
    pub conic: Conic<F>,
    pub conditioning: f64,
}

/// The conic through five points, with a conditioning estimate.
pub fn fit_conic<F: Field>(points: &[HPoint<F>]) -> Result<ConicFit<F>> {
    if points.len() != 5 {
        return Err(Error::DegenerateInput(format!(
            "a conic needs 5 points, got {}",
            points.len()
        )));
    }
    let rows: Vec<Vec<F>> = points.iter().map(|p| veronese(p.coords())).collect();
    match linalg::exact_rows(&rows) {
        Some(int_rows) => {
            let v = linalg::exact_null_vector(&int_rows)?;
            let v: Result<Vec<F>> = v
                .into_iter()
                .map(|x| F::from_scalar(&Scalar::Exact(BigRational::from_integer(x))))
                .collect();
            Ok(ConicFit {
                conic: conic_from_null(&v?)?,
                conditioning: 1.0,
            })
        }
        None => {
            let unit: Vec<[f64; 6]> = points
                .iter()
                .map(|p| {
                    let c = p.to_f64();
                    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                    let [x, y, z] = [c[0] / n, c[1] / n, c[2] / n];
                    [x * x, x * y, y * y, x * z, y * z, z * z]
                })
                .collect();
            let (v, s) = linalg::float_null_vector(&unit);
            let conditioning = s[4] / s[0];
            if conditioning < FIT_RANK_THRESHOLD {
                return Err(Error::NoUniqueConic);
            }
            let v: Result<Vec<F>> = v
                .into_iter()
                .map(|x| F::from_scalar(&Scalar::Float(x)))
                .collect();
            Ok(ConicFit {
                conic: conic_from_null(&v?)?,
                conditioning,
            })
        }
    }
}

/// Conic through five or more points: exact fits use a well separated
/// 5-subset, float fits take the least-squares null vector of all points.
pub fn fit_conic_all<F: Field>(points: &[HPoint<F>]) -> Result<ConicFit<F>> {
    if F::BACKEND == Backend::Exact || points.len() < 6 {
        return fit_well_separated(points).map(|(_, f)| f);
    }
    let unit: Vec<[f64; 6]> = points
        .iter()
        .map(|p| {
            let c = p.to_f64();
            let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let [x, y, z] = [c[0] / n, c[1] / n, c[2] / n];
            [x * x, x * y, y * y, x * z, y * z, z * z]
        })
        .collect();
    let (v, s) = linalg::float_null_vector(&unit);
    let conditioning = s[4] / s[0];
    if conditioning < FIT_RANK_THRESHOLD {
        return Err(Error::NoUniqueConic);
    }
    let v: Result<Vec<F>> = v
        .into_iter()
        .map(|x| F::from_scalar(&Scalar::Float(x)))
        .collect();
    Ok(ConicFit {
        conic: conic_from_null(&v?)?,
        conditioning,
    })
}

/// The unique conic through five points (possibly a line pair).
pub fn conic_through_5<F: Field>(points: &[HPoint<F>]) -> Result<Conic<F>> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if join(&points[i], &points[j]).is_err() {
                return Err(Error::NoUniqueConic);
            }
        }
    }
    fit_conic(points).map(|f| f.conic)
}

/// Tangent line at a point of the conic.
pub fn tangent_at<F: Field>(c: &Conic<F>, p: &HPoint<F>) -> Result<HLine<F>> {
    c.require_nondegenerate()?;
    if !on_conic(c, p, &Tolerance::default()).0 {
        return Err(Error::PointNotOnConic);
    }
    HLine::from_vec(mat_vec(&c.m, p.coords()))
}

pub fn polar<F: Field>(c: &Conic<F>, p: &HPoint<F>) -> Result<HLine<F>> {
    c.require_nondegenerate()?;
    HLine::from_vec(mat_vec(&c.m, p.coords()))
}

pub fn pole<F: Field>(c: &Conic<F>, l: &HLine<F>) -> Result<HPoint<F>> {
    c.require_nondegenerate()?;
    HPoint::from_vec(mat_vec(&adjugate(&c.m), l.coords()))
}

/// Two distinct points spanning a line, chosen as the best separated pair
/// among its intersections with the coordinate lines.
fn line_basis<F: Field>(l: &HLine<F>) -> (Vec3<F>, Vec3<F>) {
    let e = |k: usize| -> Vec3<F> { std::array::from_fn(|i| if i == k { F::one() } else { F::zero() }) };
    let cands: Vec<Vec3<F>> = (0..3).map(|k| cross(l.coords(), &e(k))).collect();
    let mut best = (0, 1, F::zero());
    for i in 0..3 {
        for j in i + 1..3 {
            let s = F::norm(&cross(&cands[i], &cands[j]));
            if s > best.2 {
                best = (i, j, s);
            }
        }
    }
    let mut a = cands[best.0].clone();
    let mut b = cands[best.1].clone();
    F::normalize_projective(&mut a);
    F::normalize_projective(&mut b);
    (a, b)
}

fn combine<F: Field>(u: F, a: &Vec3<F>, v: F, b: &Vec3<F>) -> Vec3<F> {
    std::array::from_fn(|i| u.clone() * a[i].clone() + v.clone() * b[i].clone())
}

/// Relative size below which a float discriminant counts as zero.
const FLOAT_TANGENCY: f64 = 1e-10;

/// Real intersection points of a line with a nondegenerate conic: none, one
/// (tangency) or two.
pub fn line_conic_intersect<F: Field>(c: &Conic<F>, l: &HLine<F>) -> Result<Vec<HPoint<F>>> {
    c.require_nondegenerate()?;
    let (a, b) = line_basis(l);
    // points u a + v b: alpha u^2 + 2 beta u v + gamma v^2 = 0
    let alpha = c.quad_form(&a);
    let beta = c.bilinear(&a, &b);
    let gamma = c.quad_form(&b);
    let disc = beta.clone() * beta.clone() - alpha.clone() * gamma.clone();
    let scale = beta.clone() * beta.clone() + (alpha.clone() * gamma.clone()).abs();
    let tangent = match F::BACKEND {
        Backend::Exact => disc.is_exact_zero(),
        Backend::Float => disc.to_f64().abs() <= FLOAT_TANGENCY * scale.to_f64(),
    };
    if !tangent && disc.is_negative() {
        return Ok(vec![]);
    }
    let root = if tangent {
        F::zero()
    } else {
        disc.sqrt().map_err(|e| match e {
            Error::NonSquareRational(_) => Error::NonSquareDiscriminant,
            other => other,
        })?
    };
    let mag = |x: &F| x.abs();
    let pts: Vec<Vec3<F>> = if mag(&alpha) >= mag(&gamma) && !alpha.is_exact_zero() {
        // v = alpha, u = -beta -+ root
        let mk = |s: F| combine(-beta.clone() + s, &a, alpha.clone(), &b);
        if tangent {
            vec![mk(F::zero())]
        } else {
            vec![mk(-root.clone()), mk(root)]
        }
    } else if !gamma.is_exact_zero() {
        let mk = |s: F| combine(gamma.clone(), &a, -beta.clone() + s, &b);
        if tangent {
            vec![mk(F::zero())]
        } else {
            vec![mk(-root.clone()), mk(root)]
        }
    } else if !beta.is_exact_zero() {
        vec![a.clone(), b.clone()]
    } else {
        return Err(Error::DegenerateConic);
    };
    pts.into_iter().map(HPoint::from_vec).collect()
}

/// Points of contact of the two tangents from `p`.
pub fn tangency_points_from<F: Field>(c: &Conic<F>, p: &HPoint<F>) -> Result<[HPoint<F>; 2]> {
    let l = polar(c, p)?;
    let pts = line_conic_intersect(c, &l)?;
    match pts.len() {
        0 => Err(Error::InsidePoint),
        1 => Err(Error::TangentFromOnConic),
        _ => {
            let mut it = pts.into_iter();
            Ok([it.next().unwrap(), it.next().unwrap()])
        }
    }
}

/// Second intersection of a line through `p` (on the conic) with the conic;
/// returns `p` itself for a tangent line.
pub fn second_intersection<F: Field>(
    c: &Conic<F>,
    p: &HPoint<F>,
    l: &HLine<F>,
) -> Result<HPoint<F>> {
    c.require_nondegenerate()?;
    let (a, b) = line_basis(l);
    // pick the basis point farther from p as direction
    let pv = p.coords();
    let sa = F::norm(&cross(pv, &a));
    let sb = F::norm(&cross(pv, &b));
    let d = if sa >= sb { a } else { b };
    // p + s d with s = -2 p^T C d / d^T C d
    let dcd = c.quad_form(&d);
    let pcd = c.bilinear(pv, &d);
    let two = F::from_i64(2);
    if dcd.negligible(&(F::norm(&d) * F::norm(&d) * frobenius(&c.m))) {
        if pcd.negligible(&(F::norm(&d) * F::norm(pv) * frobenius(&c.m))) {
            return Err(Error::DegenerateConic);
        }
        return HPoint::from_vec(d);
    }
    HPoint::from_vec(combine(dcd, pv, -(two * pcd), &d))
}

/// The conic `(M^{-1})^T C M^{-1}` carried by a projective map.
pub fn transform_conic<F: Field>(m: &ProjMap<F>, c: &Conic<F>) -> Conic<F> {
    let inv = adjugate(m.matrix());
    let r = mat_mul(&transpose(&inv), &mat_mul(&c.m, &inv));
    // rounding can break symmetry on the float backend
    let half = F::from_ratio(1, 2).expect("nonzero");
    let sym = std::array::from_fn(|i| {
        std::array::from_fn(|j| (r[i][j].clone() + r[j][i].clone()) * half.clone())
    });
    Conic::new(sym).expect("congruence of nonzero")
}

/// Outcome of a conconicity test.
#[derive(Debug, Clone)]
pub struct ConconicReport<F> {
    pub holds: bool,
    pub residual: F,
    pub conic: Conic<F>,
    /// Indices of the five points the witness conic was fitted to.
    pub basis: [usize; 5],
    pub conditioning: f64,
}

fn sign_free_unit(p: &HPoint<impl Field>) -> [f64; 3] {
    let c = p.to_f64();
    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let mut u = [c[0] / n, c[1] / n, c[2] / n];
    let k = (0..3).max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap();
    if u[k] < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    u
}

fn sep(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d: f64 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
    let s: f64 = (0..3).map(|i| (a[i] + b[i]).powi(2)).sum::<f64>().sqrt();
    d.min(s)
}

/// Greedy max-min separated 5-subset, seeded by the most separated pair.
pub fn greedy_five<F: Field>(points: &[HPoint<F>]) -> Vec<usize> {
    let u: Vec<[f64; 3]> = points.iter().map(sign_free_unit).collect();
    let n = u.len();
    let mut best = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let s = sep(&u[i], &u[j]);
            if s > best.2 {
                best = (i, j, s);
            }
        }
    }
    let mut sel = vec![best.0, best.1];
    while sel.len() < 5.min(n) {
        let next = (0..n)
            .filter(|i| !sel.contains(i))
            .max_by(|&a, &b| {
                let da = sel.iter().map(|&s| sep(&u[a], &u[s])).fold(f64::INFINITY, f64::min);
                let db = sel.iter().map(|&s| sep(&u[b], &u[s])).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        sel.push(next);
    }
    sel.sort_unstable();
    sel
}

fn five_subsets(n: usize) -> impl Iterator<Item = [usize; 5]> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| {
            (b + 1..n).flat_map(move |c| {
                (c + 1..n).flat_map(move |d| (d + 1..n).map(move |e| [a, b, c, d, e]))
            })
        })
    })
}

/// Fits a conic through a well separated 5-subset of `points` (greedy
/// choice first, then any subset that determines a unique conic).
pub fn fit_well_separated<F: Field>(points: &[HPoint<F>]) -> Result<([usize; 5], ConicFit<F>)> {
    if points.len() < 5 {
        return Err(Error::DegenerateInput(format!(
            "need at least 5 points, got {}",
            points.len()
        )));
    }
    let greedy: [usize; 5] = greedy_five(points).try_into().unwrap();
    for basis in std::iter::once(greedy).chain(five_subsets(points.len())) {
        let subset: Vec<HPoint<F>> = basis.iter().map(|&i| points[i].clone()).collect();
        if let Ok(fit) = conic_through_5(&subset).and_then(|_| fit_conic(&subset)) {
            return Ok((basis, fit));
        }
    }
    Err(Error::DegeneratePosition(
        "no five of the points determine a unique conic".into(),
    ))
}

/// Whether six or more points lie on one conic. A witness conic is fitted
/// through a well separated 5-subset and the remaining points are scored
/// with [`on_conic`]; the exact backend also certifies that the full
/// Veronese matrix has rank at most 5.
pub fn conconic<F: Field>(points: &[HPoint<F>], tol: &Tolerance) -> Result<ConconicReport<F>> {
    if points.len() < 6 {
        return Err(Error::DegenerateInput(format!(
            "conconic needs at least 6 points, got {}",
            points.len()
        )));
    }
    let (basis, fit) = fit_well_separated(points)?;
    let mut worst = F::zero();
    for (i, p) in points.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        worst = F::max_of(worst, on_conic(&fit.conic, p, tol).1);
    }
    let mut holds = worst.is_zero(tol);
    if F::BACKEND == Backend::Exact {
        let rows: Vec<Vec<F>> = points.iter().map(|p| veronese(p.coords())).collect();
        let ints: Vec<Vec<BigInt>> = linalg::exact_rows(&rows).expect("exact backend");
        let certified = linalg::bigint_rank(ints) <= 5;
        debug_assert_eq!(certified, holds);
        holds = holds && certified;
    }
    Ok(ConconicReport {
        holds,
        residual: worst,
        conic: fit.conic,
        basis,
        conditioning: fit.conditioning,
    })
}

// ---------------------------------------------------------------------------
// rational parametrization

/// Parameter of a point on a conic: a scalar or the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum Param<F> {
    Finite(F),
    Infinity,
}

/// Projection of a conic from a base point onto a coordinate line. Every
/// rational parameter gives a rational point when base and conic are
/// rational.
#[derive(Debug, Clone)]
pub struct ConicPointParam<F> {
    conic: Conic<F>,
    base: HPoint<F>,
    /// Index of the coordinate that vanishes on the reference line.
    axis: usize,
}

impl<F: Field> ConicPointParam<F> {
    pub fn base(&self) -> &HPoint<F> {
        &self.base
    }

    pub fn conic(&self) -> &Conic<F> {
        &self.conic
    }

    fn others(&self) -> (usize, usize) {
        match self.axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    fn direction(&self, t: &Param<F>) -> Vec3<F> {
        let (i, j) = self.others();
        let mut d: Vec3<F> = std::array::from_fn(|_| F::zero());
        match t {
            Param::Finite(t) => {
                d[i] = F::one();
                d[j] = t.clone();
            }
            Param::Infinity => d[j] = F::one(),
        }
        d
    }

    /// Second intersection of the conic with the line from the base point
    /// towards the reference-line point of parameter `t`.
    pub fn point_at(&self, t: &Param<F>) -> HPoint<F> {
        let d = self.direction(t);
        let b = self.base.coords();
        let dcd = self.conic.quad_form(&d);
        let bcd = self.conic.bilinear(b, &d);
        let two = F::from_i64(2);
        HPoint::from_vec(combine(dcd, b, -(two * bcd), &d)).expect("nonzero by construction")
    }

    pub fn point_at_value(&self, t: F) -> HPoint<F> {
        self.point_at(&Param::Finite(t))
    }

    /// Inverse of [`ConicPointParam::point_at`].
    pub fn parameter_of(&self, p: &HPoint<F>) -> Result<Param<F>> {
        if !on_conic(&self.conic, p, &Tolerance::default()).0 {
            return Err(Error::PointNotOnConic);
        }
        let reference = {
            let mut v: Vec3<F> = std::array::from_fn(|_| F::zero());
            v[self.axis] = F::one();
            HLine::from_vec(v)?
        };
        let through = if p.proj_eq(&self.base, &Tolerance::default()) {
            tangent_at(&self.conic, &self.base)?
        } else {
            join(&self.base, p)?
        };
        let d = meet(&through, &reference)?;
        let (i, j) = self.others();
        let c = d.coords();
        if c[i].negligible(&F::norm(c)) {
            Ok(Param::Infinity)
        } else {
            Ok(Param::Finite(c[j].checked_div(&c[i])?))
        }
    }
}

/// Rational parametrization of `c` from a base point on it.
pub fn rational_point_param<F: Field>(
    c: &Conic<F>,
    base: &HPoint<F>,
) -> Result<ConicPointParam<F>> {
    c.require_nondegenerate()?;
    if !on_conic(c, base, &Tolerance::default()).0 {
        return Err(Error::PointNotOnConic);
    }
    let v = base.coords();
    let n = F::norm(v);
    // reference line z = 0 unless the base lies on it
    let axis = [2, 1, 0]
        .into_iter()
        .find(|&k| !v[k].negligible(&n))
        .expect("nonzero point");
    Ok(ConicPointParam {
        conic: c.clone(),
        base: base.clone(),
        axis,
    })
}

// ---------------------------------------------------------------------------
// serde

impl<F: Field> Serialize for Conic<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            conic: [[Scalar; 3]; 3],
        }
        Raw {
            conic: std::array::from_fn(|i| std::array::from_fn(|j| self.m[i][j].to_scalar())),
        }
        .serialize(s)
    }
}

impl<'de, F: Field> Deserialize<'de> for Conic<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            conic: [[Scalar; 3]; 3],
        }
        let raw = Raw::deserialize(d)?;
        let mut m: Vec<F> = Vec::with_capacity(9);
        for x in raw.conic.iter().flatten() {
            m.push(F::from_scalar(x).map_err(serde::de::Error::custom)?);
        }
        Conic::new(std::array::from_fn(|i| std::array::from_fn(|j| m[3 * i + j].clone())))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::ProjMap;
    use crate::scalar::{q, Float, Rational};
    use proptest::prelude::*;

    type P = HPoint<Rational>;
    type C = Conic<Rational>;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn pt(x: Rational, y: Rational) -> P {
        P::affine(x, y)
    }

    #[test]
    fn five_point_circle() {
        let pts = vec![
            P::from_i64(1, 0, 1),
            P::from_i64(0, 1, 1),
            P::from_i64(-1, 0, 1),
            P::from_i64(0, -1, 1),
            pt(q(3, 5), q(4, 5)),
        ];
        let c = conic_through_5(&pts).unwrap();
        assert_eq!(c, C::unit_circle());
        // independent check: coefficients proportional to x^2 + y^2 - z^2
        let k = c.coefficients();
        assert_eq!(k[0], k[2]);
        assert_eq!(k[5], -k[0].clone());
        assert!(k[1].is_exact_zero() && k[3].is_exact_zero() && k[4].is_exact_zero());
    }

    #[test]
    fn five_points_with_three_collinear_give_line_pair() {
        // three on y = 0, two on x = 3
        let pts = vec![
            P::from_i64(0, 0, 1),
            P::from_i64(1, 0, 1),
            P::from_i64(2, 0, 1),
            P::from_i64(3, 1, 1),
            P::from_i64(3, 2, 1),
        ];
        let c = conic_through_5(&pts).unwrap();
        assert!(c.is_degenerate());
        // y (x - 3z) = xy - 3yz
        let expect = C::from_coefficients(q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(-3, 1), q(0, 1))
            .unwrap();
        assert_eq!(c, expect);
    }

    #[test]
    fn four_collinear_points_have_no_unique_conic() {
        let pts = vec![
            P::from_i64(0, 0, 1),
            P::from_i64(1, 0, 1),
            P::from_i64(2, 0, 1),
            P::from_i64(3, 0, 1),
            P::from_i64(0, 1, 1),
        ];
        assert_eq!(conic_through_5(&pts), Err(Error::NoUniqueConic));
        let fpts: Vec<HPoint<Float>> = pts.iter().map(|p| p.convert().unwrap()).collect();
        assert_eq!(conic_through_5(&fpts), Err(Error::NoUniqueConic));
    }

    #[test]
    fn on_conic_examples() {
        let c = C::unit_circle();
        let (on, r) = on_conic(&c, &pt(q(3, 5), q(4, 5)), &tol());
        assert!(on && r.is_exact_zero());
        assert!(!on_conic(&c, &P::from_i64(1, 1, 1), &tol()).0);
        // lambda x^2 + (1 - lambda) y^2 = 1 passes through (1, 1)
        let lam = q(2, 7);
        let outer = C::from_coefficients(
            lam.clone(),
            q(0, 1),
            q(1, 1) - lam,
            q(0, 1),
            q(0, 1),
            q(-1, 1),
        )
        .unwrap();
        assert!(on_conic(&outer, &P::from_i64(1, 1, 1), &tol()).0);
    }

    #[test]
    fn tangent_examples() {
        let c = C::unit_circle();
        assert_eq!(
            tangent_at(&c, &P::from_i64(1, 0, 1)).unwrap(),
            HLine::from_i64(1, 0, -1)
        );
        assert_eq!(
            tangent_at(&c, &P::from_i64(0, 1, 1)).unwrap(),
            HLine::from_i64(0, 1, -1)
        );
        assert_eq!(
            tangent_at(&c, &P::from_i64(1, 1, 1)),
            Err(Error::PointNotOnConic)
        );
    }

    #[test]
    fn polar_examples() {
        let c = C::unit_circle();
        assert_eq!(
            polar(&c, &P::from_i64(0, 0, 1)).unwrap(),
            HLine::from_i64(0, 0, 1)
        );
        // diag(1, 1, -1) (2, 0, 1) = (2, 0, -1): the line x = 1/2
        assert_eq!(
            polar(&c, &P::from_i64(2, 0, 1)).unwrap(),
            HLine::from_i64(2, 0, -1)
        );
        let p = pt(q(3, 5), q(-4, 5));
        assert_eq!(polar(&c, &p).unwrap(), tangent_at(&c, &p).unwrap());
        let l = HLine::from_i64(3, -1, 4);
        assert_eq!(polar(&c, &pole(&c, &l).unwrap()).unwrap(), l);
    }

    #[test]
    fn intersection_examples() {
        let c = C::unit_circle();
        let two = line_conic_intersect(&c, &HLine::from_i64(0, 1, 0)).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.contains(&P::from_i64(1, 0, 1)) && two.contains(&P::from_i64(-1, 0, 1)));
        let one = line_conic_intersect(&c, &HLine::from_i64(1, 0, -1)).unwrap();
        assert_eq!(one, vec![P::from_i64(1, 0, 1)]);
        assert!(line_conic_intersect(&c, &HLine::from_i64(1, 0, -2))
            .unwrap()
            .is_empty());
        assert_eq!(
            line_conic_intersect(&c, &HLine::from_i64(2, 0, -1)),
            Err(Error::NonSquareDiscriminant)
        );
    }

    #[test]
    fn tangency_point_examples() {
        let c = C::unit_circle();
        let [a, b] = tangency_points_from(&c, &P::from_i64(0, 1, 0)).unwrap();
        let mut got = [a, b];
        got.sort_by_key(|p| p.to_string());
        assert!(got.contains(&P::from_i64(1, 0, 1)) && got.contains(&P::from_i64(-1, 0, 1)));
        assert_eq!(
            tangency_points_from(&c, &P::from_i64(2, 0, 1)),
            Err(Error::NonSquareDiscriminant)
        );
        let fc: Conic<Float> = C::unit_circle().convert().unwrap();
        let [a, b] = tangency_points_from(&fc, &HPoint::from_i64(2, 0, 1)).unwrap();
        let s3 = 3f64.sqrt() / 2.0;
        for p in [a, b] {
            let (x, y) = p.to_affine().unwrap();
            assert!((x.0 - 0.5).abs() < 1e-12 && (y.0.abs() - s3).abs() < 1e-12);
        }
        assert_eq!(
            tangency_points_from(&c, &P::from_i64(0, 0, 1)),
            Err(Error::InsidePoint)
        );
    }

    #[test]
    fn rotating_an_ellipse() {
        let e = C::from_coefficients(q(1, 4), q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(-1, 1))
            .unwrap();
        let rot = ProjMap::new([
            [q(0, 1), q(-1, 1), q(0, 1)],
            [q(1, 1), q(0, 1), q(0, 1)],
            [q(0, 1), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        let expect = C::from_coefficients(q(1, 1), q(0, 1), q(1, 4), q(0, 1), q(0, 1), q(-1, 1))
            .unwrap();
        assert_eq!(transform_conic(&rot, &e), expect);
        assert_eq!(transform_conic(&ProjMap::identity(), &e), e);
    }

    #[test]
    fn parametrization_examples() {
        let c = C::unit_circle();
        let par = rational_point_param(&c, &P::from_i64(-1, 0, 1)).unwrap();
        assert_eq!(par.point_at_value(q(1, 2)), pt(q(3, 5), q(4, 5)));
        let zero = par.point_at_value(q(0, 1));
        assert!(on_conic(&c, &zero, &tol()).0);
        assert_eq!(zero, P::from_i64(1, 0, 1));
        assert_eq!(par.point_at(&Param::Infinity), P::from_i64(-1, 0, 1));
        assert_eq!(
            par.parameter_of(&pt(q(3, 5), q(4, 5))).unwrap(),
            Param::Finite(q(1, 2))
        );
        // base on the line at infinity uses another reference line
        let hyper = C::from_coefficients(q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(-1, 1))
            .unwrap();
        let par = rational_point_param(&hyper, &P::from_i64(1, 0, 0)).unwrap();
        for t in [q(1, 3), q(-2, 1), q(5, 7)] {
            let p = par.point_at_value(t.clone());
            assert!(on_conic(&hyper, &p, &tol()).0);
            assert_eq!(par.parameter_of(&p).unwrap(), Param::Finite(t));
        }
    }

    #[test]
    fn conconic_examples() {
        let c = C::unit_circle();
        let par = rational_point_param(&c, &P::from_i64(-1, 0, 1)).unwrap();
        let pts: Vec<P> = (1..=8).map(|k| par.point_at_value(q(k, 3))).collect();
        let rep = conconic(&pts, &tol()).unwrap();
        assert!(rep.holds && rep.residual.is_exact_zero());
        let fpts: Vec<HPoint<Float>> = pts.iter().map(|p| p.convert().unwrap()).collect();
        let ftol = Tolerance::new(1e-9);
        assert!(conconic(&fpts, &ftol).unwrap().holds);
        let mut bad = fpts.clone();
        let c7 = bad[7].to_f64();
        bad[7] = HPoint::new(Float(c7[0] * (1.0 + 1e-3)), Float(c7[1]), Float(c7[2])).unwrap();
        assert!(!conconic(&bad, &ftol).unwrap().holds);
        let mut bad = pts.clone();
        bad[7] = P::from_i64(7, 7, 1);
        let rep = conconic(&bad, &tol()).unwrap();
        assert!(!rep.holds && !rep.residual.is_exact_zero());
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-30i64..30, 1i64..12).prop_map(|(a, b)| q(a, b))
    }

    fn random_conic() -> impl Strategy<Value = C> {
        proptest::array::uniform6(-6i64..6).prop_filter_map("nondegenerate", |k| {
            let c = C::from_coefficients(
                Rational::from_i64(k[0]),
                Rational::from_i64(k[1]),
                Rational::from_i64(k[2]),
                Rational::from_i64(k[3]),
                Rational::from_i64(k[4]),
                Rational::from_i64(k[5]),
            )
            .ok()?;
            (!c.is_degenerate()).then_some(c)
        })
    }

    /// A rational conic with a known rational point: image of the unit
    /// circle under an integer map.
    fn pointed_conic() -> impl Strategy<Value = (C, P)> {
        proptest::array::uniform9(-5i64..5).prop_filter_map("invertible", |a| {
            let m = ProjMap::new(std::array::from_fn(|i| {
                std::array::from_fn(|j| Rational::from_i64(a[3 * i + j]))
            }))
            .ok()?;
            let c = transform_conic(&m, &C::unit_circle());
            Some((c, m.apply(&P::from_i64(1, 0, 1))))
        })
    }

    proptest! {
        #[test]
        fn parametrized_points_lie_on_conic((c, base) in pointed_conic(), t in rational()) {
            let par = rational_point_param(&c, &base).unwrap();
            let p = par.point_at_value(t.clone());
            let (on, r) = on_conic(&c, &p, &tol());
            prop_assert!(on && r.is_exact_zero());
            prop_assert_eq!(par.parameter_of(&p).unwrap(), Param::Finite(t));
        }

        #[test]
        fn pole_inverts_polar(c in random_conic(), x in -9i64..9, y in -9i64..9) {
            let p = P::from_i64(x, y, 1);
            prop_assert_eq!(pole(&c, &polar(&c, &p).unwrap()).unwrap(), p);
        }

        #[test]
        fn la_hire(c in random_conic(), a in proptest::array::uniform3(-9i64..9), b in proptest::array::uniform3(-9i64..9)) {
            prop_assume!(a != [0, 0, 0] && b != [0, 0, 0]);
            let p = P::from_i64(a[0], a[1], a[2]);
            let r = P::from_i64(b[0], b[1], b[2]);
            let t = tol();
            let forward = crate::projective::incident(&p, &polar(&c, &r).unwrap(), &t).0;
            let back = crate::projective::incident(&r, &polar(&c, &p).unwrap(), &t).0;
            prop_assert_eq!(forward, back);
        }

        #[test]
        fn tangent_meets_once((c, base) in pointed_conic(), t in rational()) {
            let par = rational_point_param(&c, &base).unwrap();
            let p = par.point_at_value(t);
            let l = tangent_at(&c, &p).unwrap();
            prop_assert_eq!(line_conic_intersect(&c, &l).unwrap(), vec![p]);
        }

        #[test]
        fn conconic_projective_invariance(
            (c, base) in pointed_conic(),
            ts in proptest::collection::vec(rational(), 7),
            g in proptest::array::uniform9(-4i64..4),
            scale in proptest::collection::vec(1i64..9, 7),
        ) {
            let par = rational_point_param(&c, &base).unwrap();
            let mut pts: Vec<P> = ts.iter().map(|t| par.point_at_value(t.clone())).collect();
            pts.sort_by_key(|p| p.to_string());
            pts.dedup();
            prop_assume!(pts.len() >= 6);
            let Ok(m) = ProjMap::new(std::array::from_fn(|i| std::array::from_fn(|j| Rational::from_i64(g[3 * i + j])))) else {
                return Ok(());
            };
            let moved: Vec<P> = pts
                .iter()
                .zip(&scale)
                .map(|(p, &s)| {
                    let v = m.apply(p);
                    let c = v.coords();
                    let k = Rational::from_i64(s);
                    P::new(c[0].clone() * k.clone(), c[1].clone() * k.clone(), c[2].clone() * k).unwrap()
                })
                .collect();
            let before = conconic(&pts, &tol());
            let after = conconic(&moved, &tol());
            if let (Ok(a), Ok(b)) = (before, after) {
                prop_assert!(a.holds && b.holds);
            }
        }
    }
}
