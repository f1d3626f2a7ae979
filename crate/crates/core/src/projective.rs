//! Homogeneous points and lines of the real projective plane.
//!
//! Points at infinity (`z = 0`) are ordinary elements here; nothing in this
//! module special-cases the affine chart.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, Tolerance};

pub type Vec3<F> = [F; 3];
pub type Mat3<F> = [[F; 3]; 3];

pub fn dot<F: Field>(a: &Vec3<F>, b: &Vec3<F>) -> F {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

pub fn cross<F: Field>(a: &Vec3<F>, b: &Vec3<F>) -> Vec3<F> {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

pub fn det3<F: Field>(a: &Vec3<F>, b: &Vec3<F>, c: &Vec3<F>) -> F {
    dot(a, &cross(b, c))
}

pub fn mat_vec<F: Field>(m: &Mat3<F>, v: &Vec3<F>) -> Vec3<F> {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn transpose<F: Field>(m: &Mat3<F>) -> Mat3<F> {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i].clone()))
}

pub fn mat_mul<F: Field>(a: &Mat3<F>, b: &Mat3<F>) -> Mat3<F> {
    let bt = transpose(b);
    std::array::from_fn(|i| std::array::from_fn(|j| dot(&a[i], &bt[j])))
}

pub fn mat_det<F: Field>(m: &Mat3<F>) -> F {
    det3(&m[0], &m[1], &m[2])
}

/// Adjugate: `m * adj(m) = det(m) * I`.
pub fn adjugate<F: Field>(m: &Mat3<F>) -> Mat3<F> {
    let cols = transpose(m);
    // rows of the adjugate are cross products of pairs of columns
    [
        cross(&cols[1], &cols[2]),
        cross(&cols[2], &cols[0]),
        cross(&cols[0], &cols[1]),
    ]
}

fn is_zero_vec<F: Field>(v: &Vec3<F>) -> bool {
    v.iter().all(|x| x.is_exact_zero())
}

fn check_finite<F: Field>(v: &Vec3<F>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteResult)
    }
}

/// Distance between two normalized float representatives, insensitive to
/// the overall sign; `None` for the exact backend.
fn sign_free_distance<F: Field>(a: &Vec3<F>, b: &Vec3<F>) -> F {
    let minus: Vec3<F> = std::array::from_fn(|i| a[i].clone() - b[i].clone());
    let plus: Vec3<F> = std::array::from_fn(|i| a[i].clone() + b[i].clone());
    let (dm, dp) = (F::norm(&minus), F::norm(&plus));
    if dp < dm {
        dp
    } else {
        dm
    }
}

macro_rules! homogeneous {
    ($name:ident, $dual:ident) => {
        impl<F: Field> $name<F> {
            /// Builds an element from a nonzero finite triple; the stored
            /// representative is normalized (see [`Field::normalize_projective`]).
            pub fn new(x: F, y: F, z: F) -> Result<Self> {
                Self::from_vec([x, y, z])
            }

            pub fn from_vec(mut v: Vec3<F>) -> Result<Self> {
                check_finite(&v)?;
                if is_zero_vec(&v) {
                    return Err(Error::ZeroVector);
                }
                F::normalize_projective(&mut v);
                Ok($name { v })
            }

            pub fn from_i64(x: i64, y: i64, z: i64) -> Self {
                Self::new(F::from_i64(x), F::from_i64(y), F::from_i64(z))
                    .expect("nonzero integer triple")
            }

            pub fn coords(&self) -> &Vec3<F> {
                &self.v
            }

            /// Projective equality: literal for exact, distance of normalized
            /// representatives for float.
            pub fn proj_eq(&self, other: &Self, tol: &Tolerance) -> bool {
                self.distance(other).is_zero(tol)
            }

            /// Exact: the max-norm of the cross product (zero iff equal).
            /// Float: Euclidean distance of sign-normalized unit vectors.
            pub fn distance(&self, other: &Self) -> F {
                match F::BACKEND {
                    crate::scalar::Backend::Exact => F::norm(&cross(&self.v, &other.v)),
                    crate::scalar::Backend::Float => sign_free_distance(&self.v, &other.v),
                }
            }

            /// Canonical representative for serialization: last nonzero
            /// coordinate scaled to one for exact, unit norm with a positive
            /// leading entry for float.
            pub fn canonical(&self) -> Vec3<F> {
                match F::BACKEND {
                    crate::scalar::Backend::Exact => {
                        let last = self.v.iter().rev().find(|x| !x.is_exact_zero()).unwrap();
                        std::array::from_fn(|i| self.v[i].checked_div(last).unwrap())
                    }
                    crate::scalar::Backend::Float => self.v.clone(),
                }
            }

            pub fn to_f64(&self) -> [f64; 3] {
                std::array::from_fn(|i| self.v[i].to_f64())
            }

            /// Converts the representative between backends (exact to float).
            pub fn convert<G: Field>(&self) -> Result<$name<G>> {
                $name::from_vec([
                    G::from_scalar(&self.v[0].to_scalar())?,
                    G::from_scalar(&self.v[1].to_scalar())?,
                    G::from_scalar(&self.v[2].to_scalar())?,
                ])
            }

            /// The dual element with the same coordinates.
            pub fn dual(&self) -> $dual<F> {
                $dual { v: self.v.clone() }
            }
        }

        impl<F: Field> fmt::Display for $name<F> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let c = self.canonical();
                write!(f, "({} : {} : {})", c[0], c[1], c[2])
            }
        }
    };
}

/// A point `(x : y : z)` of the projective plane.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint<F> {
    v: Vec3<F>,
}

/// The line `a x + b y + c z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HLine<F> {
    v: Vec3<F>,
}

homogeneous!(HPoint, HLine);
homogeneous!(HLine, HPoint);

impl<F: Field> HPoint<F> {
    /// Affine point `(x, y)`.
    pub fn affine(x: F, y: F) -> Self {
        HPoint::new(x, y, F::one()).expect("z = 1 is nonzero")
    }

    pub fn is_at_infinity(&self, tol: &Tolerance) -> bool {
        let n = F::norm(&self.v);
        match crate::scalar::Backend::Exact == F::BACKEND {
            true => self.v[2].is_exact_zero(),
            false => self.v[2]
                .checked_div(&n)
                .map(|r| r.is_zero(tol))
                .unwrap_or(true),
        }
    }

    /// Affine coordinates, `None` at infinity.
    pub fn to_affine(&self) -> Option<(F, F)> {
        if self.v[2].negligible(&F::norm(&self.v)) {
            return None;
        }
        Some((
            self.v[0].checked_div(&self.v[2]).ok()?,
            self.v[1].checked_div(&self.v[2]).ok()?,
        ))
    }
}

/// Line through two points.
pub fn join<F: Field>(p: &HPoint<F>, q: &HPoint<F>) -> Result<HLine<F>> {
    let c = cross(&p.v, &q.v);
    let scale = F::norm(&p.v) * F::norm(&q.v);
    if F::norm(&c).negligible(&scale) {
        return Err(Error::CoincidentPoints);
    }
    HLine::from_vec(c)
}

/// Intersection point of two lines.
pub fn meet<F: Field>(l: &HLine<F>, m: &HLine<F>) -> Result<HPoint<F>> {
    let c = cross(&l.v, &m.v);
    let scale = F::norm(&l.v) * F::norm(&m.v);
    if F::norm(&c).negligible(&scale) {
        return Err(Error::CoincidentLines);
    }
    HPoint::from_vec(c)
}

/// `|<p, l>| / (|p| |l|)` (or the raw pairing when `tol.relative` is off).
pub fn incidence_residual<F: Field>(p: &HPoint<F>, l: &HLine<F>, tol: &Tolerance) -> F {
    let raw = dot(&p.v, &l.v).abs();
    if tol.relative {
        let scale = F::norm(&p.v) * F::norm(&l.v);
        raw.checked_div(&scale).unwrap_or(raw)
    } else {
        raw
    }
}

pub fn incident<F: Field>(p: &HPoint<F>, l: &HLine<F>, tol: &Tolerance) -> (bool, F) {
    let r = incidence_residual(p, l, tol);
    (r.is_zero(tol), r)
}

fn triple_residual<F: Field>(a: &Vec3<F>, b: &Vec3<F>, c: &Vec3<F>, tol: &Tolerance) -> F {
    let d = det3(a, b, c).abs();
    if tol.relative {
        let scale = F::norm(a) * F::norm(b) * F::norm(c);
        d.checked_div(&scale).unwrap_or(d)
    } else {
        d
    }
}

/// Collinearity of three or more points with the largest normalized
/// residual. Exact: every triple determinant. Float: residuals against the
/// line through the two most separated points.
fn aligned<F: Field>(vs: &[&Vec3<F>], tol: &Tolerance) -> Result<(bool, F)> {
    if vs.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 elements, got {}",
            vs.len()
        )));
    }
    // farthest pair
    let mut best: Option<(usize, usize, F)> = None;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let d = F::norm(&cross(vs[i], vs[j]))
                .checked_div(&(F::norm(vs[i]) * F::norm(vs[j])))
                .unwrap_or_else(|_| F::zero());
            if best.as_ref().is_none_or(|b| d > b.2) {
                best = Some((i, j, d));
            }
        }
    }
    let (i, j, sep) = best.unwrap();
    if sep.negligible(&F::one()) {
        return Err(Error::DegenerateInput("all elements coincide".into()));
    }
    let mut worst = F::zero();
    match F::BACKEND {
        crate::scalar::Backend::Exact => {
            for a in 0..vs.len() {
                for b in a + 1..vs.len() {
                    for c in b + 1..vs.len() {
                        worst = F::max_of(worst, triple_residual(vs[a], vs[b], vs[c], tol));
                    }
                }
            }
        }
        crate::scalar::Backend::Float => {
            let line = cross(vs[i], vs[j]);
            let ln = F::norm(&line);
            for (k, v) in vs.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                let raw = dot(v, &line).abs();
                let r = if tol.relative {
                    raw.checked_div(&(ln.clone() * F::norm(*v)))
                        .unwrap_or_else(|_| raw.clone())
                } else {
                    raw
                };
                worst = F::max_of(worst, r);
            }
        }
    }
    Ok((worst.is_zero(tol), worst))
}

pub fn collinear<F: Field>(points: &[HPoint<F>], tol: &Tolerance) -> Result<(bool, F)> {
    let vs: Vec<&Vec3<F>> = points.iter().map(|p| &p.v).collect();
    aligned(&vs, tol)
}

pub fn concurrent<F: Field>(lines: &[HLine<F>], tol: &Tolerance) -> Result<(bool, F)> {
    let vs: Vec<&Vec3<F>> = lines.iter().map(|l| &l.v).collect();
    aligned(&vs, tol)
}

/// An invertible projective transformation, acting on points by `M p` and
/// on lines by `M^{-T} l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjMap<F> {
    m: Mat3<F>,
}

impl<F: Field> ProjMap<F> {
    pub fn new(m: Mat3<F>) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteResult);
        }
        let scale = F::norm(&m.iter().flatten().cloned().collect::<Vec<_>>());
        let s3 = scale.clone() * scale.clone() * scale;
        if mat_det(&m).negligible(&s3) {
            return Err(Error::SingularMap);
        }
        Ok(ProjMap { m })
    }

    pub fn identity() -> Self {
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { F::one() } else { F::zero() })
        });
        ProjMap { m }
    }

    pub fn matrix(&self) -> &Mat3<F> {
        &self.m
    }

    pub fn apply(&self, p: &HPoint<F>) -> HPoint<F> {
        HPoint::from_vec(mat_vec(&self.m, &p.v)).expect("invertible map")
    }

    pub fn apply_line(&self, l: &HLine<F>) -> HLine<F> {
        // adj(M)^T is a nonzero multiple of M^{-T}
        let adj_t = transpose(&adjugate(&self.m));
        HLine::from_vec(mat_vec(&adj_t, &l.v)).expect("invertible map")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &ProjMap<F>) -> ProjMap<F> {
        ProjMap {
            m: mat_mul(&self.m, &other.m),
        }
    }

    pub fn inverse(&self) -> ProjMap<F> {
        ProjMap {
            m: adjugate(&self.m),
        }
    }

    /// Condition number of the matrix (float estimate via SVD).
    pub fn condition(&self) -> f64 {
        let m = nalgebra::Matrix3::from_fn(|i, j| self.m[i][j].to_f64());
        let sv = m.singular_values();
        sv.max() / sv.min()
    }
}

/// Matrix sending `e1, e2, e3, (1,1,1)` to the four given points.
fn frame_matrix<F: Field>(pts: &[HPoint<F>; 4]) -> Result<Mat3<F>> {
    let cols: Mat3<F> = [pts[0].v.clone(), pts[1].v.clone(), pts[2].v.clone()];
    let s = transpose(&cols);
    let scale = F::norm(&pts[0].v) * F::norm(&pts[1].v) * F::norm(&pts[2].v);
    if mat_det(&s).negligible(&scale) {
        return Err(Error::DegeneratePosition("three points are collinear".into()));
    }
    let lambda = mat_vec(&adjugate(&s), &pts[3].v);
    let lscale = F::norm(&lambda);
    if lambda.iter().any(|l| l.negligible(&lscale)) {
        return Err(Error::DegeneratePosition("three points are collinear".into()));
    }
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| s[i][j].clone() * lambda[j].clone())
    }))
}

/// The unique projective map with `src[i] -> dst[i]`.
pub fn map_from_correspondence<F: Field>(
    src: &[HPoint<F>; 4],
    dst: &[HPoint<F>; 4],
) -> Result<ProjMap<F>> {
    let a = frame_matrix(src)?;
    let b = frame_matrix(dst)?;
    ProjMap::new(mat_mul(&b, &adjugate(&a)))
}

/// Cross-ratio `(a, b; c, d) = [ac][bd] / ([ad][bc])` of four collinear points.
pub fn cross_ratio<F: Field>(
    a: &HPoint<F>,
    b: &HPoint<F>,
    c: &HPoint<F>,
    d: &HPoint<F>,
    tol: &Tolerance,
) -> Result<F> {
    let pts = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i].proj_eq(pts[j], &Tolerance::new(0.0)) || join(pts[i], pts[j]).is_err() {
                return Err(Error::CoincidentPoints);
            }
        }
    }
    let owned: Vec<HPoint<F>> = pts.iter().map(|p| (*p).clone()).collect();
    if !collinear(&owned, tol)?.0 {
        return Err(Error::NotCollinear);
    }
    let line = join(a, b)?;
    // reference point off the line: basis vector with the largest pairing
    let k = (0..3)
        .max_by(|&i, &j| {
            line.v[i]
                .abs()
                .partial_cmp(&line.v[j].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let r: Vec3<F> = std::array::from_fn(|i| if i == k { F::one() } else { F::zero() });
    let br = |p: &HPoint<F>, q: &HPoint<F>| det3(&p.v, &q.v, &r);
    (br(a, c) * br(b, d)).checked_div(&(br(a, d) * br(b, c)))
}

// ---------------------------------------------------------------------------
// serde: points as [x, y, z], lines as {"line": [a, b, c]}, maps row-major

fn scalars<F: Field>(v: &Vec3<F>) -> [Scalar; 3] {
    std::array::from_fn(|i| v[i].to_scalar())
}

fn from_scalars<F: Field>(s: &[Scalar; 3]) -> Result<Vec3<F>> {
    Ok([
        F::from_scalar(&s[0])?,
        F::from_scalar(&s[1])?,
        F::from_scalar(&s[2])?,
    ])
}

impl<F: Field> Serialize for HPoint<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        scalars(&self.canonical()).serialize(s)
    }
}

impl<'de, F: Field> Deserialize<'de> for HPoint<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = <[Scalar; 3]>::deserialize(d)?;
        from_scalars(&raw)
            .and_then(HPoint::from_vec)
            .map_err(serde::de::Error::custom)
    }
}

impl<F: Field> Serialize for HLine<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("HLine", 1)?;
        st.serialize_field("line", &scalars(&self.canonical()))?;
        st.end()
    }
}

impl<'de, F: Field> Deserialize<'de> for HLine<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            line: [Scalar; 3],
        }
        let raw = Raw::deserialize(d)?;
        from_scalars(&raw.line)
            .and_then(HLine::from_vec)
            .map_err(serde::de::Error::custom)
    }
}

impl<F: Field> Serialize for ProjMap<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: [[Scalar; 3]; 3] = std::array::from_fn(|i| scalars(&self.m[i]));
        rows.serialize(s)
    }
}

impl<'de, F: Field> Deserialize<'de> for ProjMap<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = <[[Scalar; 3]; 3]>::deserialize(d)?;
        let rows: Result<Vec<Vec3<F>>> = raw.iter().map(from_scalars).collect();
        rows.and_then(|r| ProjMap::new([r[0].clone(), r[1].clone(), r[2].clone()]))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Float, Rational};
    use proptest::prelude::*;

    type P = HPoint<Rational>;
    type L = HLine<Rational>;

    fn exact() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn join_examples() {
        let l = join(&P::from_i64(1, 0, 1), &P::from_i64(0, 1, 1)).unwrap();
        assert_eq!(l, L::from_i64(-1, -1, 1));
        let inf = join(&P::from_i64(1, 0, 0), &P::from_i64(0, 1, 0)).unwrap();
        assert_eq!(inf, L::from_i64(0, 0, 1));
        let p = P::from_i64(2, 3, 1);
        assert_eq!(join(&p, &p), Err(Error::CoincidentPoints));
    }

    #[test]
    fn meet_examples() {
        let origin = meet(&L::from_i64(1, 0, 0), &L::from_i64(0, 1, 0)).unwrap();
        assert_eq!(origin, P::from_i64(0, 0, 1));
        // x = 1 and x = -1 are parallel
        let far = meet(&L::from_i64(1, 0, -1), &L::from_i64(1, 0, 1)).unwrap();
        assert!(far.proj_eq(&P::from_i64(0, 1, 0), &exact()));
        assert!(far.is_at_infinity(&exact()));
        let l = L::from_i64(3, 1, 2);
        assert_eq!(meet(&l, &l), Err(Error::CoincidentLines));
    }

    #[test]
    fn incidence_examples() {
        let tol = exact();
        let (on, r) = incident(&P::from_i64(1, 1, 1), &L::from_i64(1, 1, -2), &tol);
        assert!(on);
        assert!(r.is_exact_zero());
        assert!(incident(&P::from_i64(1, 0, 1), &L::from_i64(0, 1, 0), &tol).0);
        assert!(!incident(&P::from_i64(1, 1, 1), &L::from_i64(0, 1, 0), &tol).0);
    }

    #[test]
    fn collinear_examples() {
        let tol = exact();
        let pts = [P::from_i64(0, 0, 1), P::from_i64(1, 1, 1), P::from_i64(2, 2, 1)];
        assert!(collinear(&pts, &tol).unwrap().0);
        let pts = [P::from_i64(0, 0, 1), P::from_i64(1, 0, 1), P::from_i64(0, 1, 1)];
        assert!(!collinear(&pts, &tol).unwrap().0);
        let p = P::from_i64(1, 2, 3);
        assert!(matches!(
            collinear(&[p.clone(), p.clone(), p], &tol),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn concurrent_examples() {
        let tol = exact();
        let ls = [L::from_i64(1, 0, 0), L::from_i64(0, 1, 0), L::from_i64(1, 1, 0)];
        assert!(concurrent(&ls, &tol).unwrap().0);
        let ls = [L::from_i64(1, 0, 0), L::from_i64(0, 1, 0), L::from_i64(1, 1, -1)];
        assert!(!concurrent(&ls, &tol).unwrap().0);
    }

    #[test]
    fn float_collinear_uses_tolerance() {
        let tol = Tolerance::new(1e-9);
        let pts: Vec<HPoint<Float>> = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0 + 1e-12)]
            .iter()
            .map(|&(x, y)| HPoint::affine(Float(x), Float(y)))
            .collect();
        assert!(collinear(&pts, &tol).unwrap().0);
        let pts: Vec<HPoint<Float>> = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.001)]
            .iter()
            .map(|&(x, y)| HPoint::affine(Float(x), Float(y)))
            .collect();
        assert!(!collinear(&pts, &tol).unwrap().0);
    }

    fn square() -> [P; 4] {
        [
            P::from_i64(1, 1, 1),
            P::from_i64(1, -1, 1),
            P::from_i64(-1, -1, 1),
            P::from_i64(-1, 1, 1),
        ]
    }

    #[test]
    fn correspondence_identity() {
        let sq = square();
        let m = map_from_correspondence(&sq, &sq).unwrap();
        for p in &sq {
            assert_eq!(m.apply(p), *p);
        }
        let probe = P::from_i64(5, -2, 3);
        assert_eq!(m.apply(&probe), probe);
    }

    #[test]
    fn correspondence_standard_frame_to_square() {
        let frame = [
            P::from_i64(1, 0, 0),
            P::from_i64(0, 1, 0),
            P::from_i64(0, 0, 1),
            P::from_i64(1, 1, 1),
        ];
        let sq = square();
        let m = map_from_correspondence(&frame, &sq).unwrap();
        for (s, d) in frame.iter().zip(&sq) {
            assert_eq!(m.apply(s).canonical(), d.canonical());
        }
    }

    #[test]
    fn correspondence_rejects_collinear() {
        let bad = [
            P::from_i64(0, 0, 1),
            P::from_i64(1, 0, 1),
            P::from_i64(2, 0, 1),
            P::from_i64(0, 1, 1),
        ];
        assert!(matches!(
            map_from_correspondence(&bad, &square()),
            Err(Error::DegeneratePosition(_))
        ));
    }

    #[test]
    fn scaling_map_is_identity_on_points() {
        let m = ProjMap::new([
            [q(2, 1), q(0, 1), q(0, 1)],
            [q(0, 1), q(2, 1), q(0, 1)],
            [q(0, 1), q(0, 1), q(2, 1)],
        ])
        .unwrap();
        let p = P::from_i64(3, -1, 7);
        assert_eq!(m.apply(&p), p);
        assert_eq!(
            ProjMap::new([[q(1, 1), q(2, 1), q(3, 1)], [q(2, 1), q(4, 1), q(6, 1)], [q(0, 1), q(0, 1), q(1, 1)]]),
            Err(Error::SingularMap)
        );
    }

    #[test]
    fn cross_ratio_examples() {
        let tol = exact();
        let on_x = |t: i64| P::from_i64(t, 0, 1);
        let cr = cross_ratio(&on_x(0), &on_x(1), &on_x(2), &on_x(3), &tol).unwrap();
        assert_eq!(cr, q(4, 3));
        // parameters 0, inf, 1, -1 form a harmonic set
        let cr = cross_ratio(&on_x(0), &P::from_i64(1, 0, 0), &on_x(1), &on_x(-1), &tol).unwrap();
        assert_eq!(cr, q(-1, 1));
        assert_eq!(
            cross_ratio(&on_x(0), &on_x(1), &on_x(2), &P::from_i64(0, 1, 1), &tol),
            Err(Error::NotCollinear)
        );
    }

    #[test]
    fn serde_shapes() {
        let p = P::from_i64(2, 4, 2);
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"["1","2","1"]"#);
        let l = L::from_i64(0, 0, 3);
        assert_eq!(serde_json::to_string(&l).unwrap(), r#"{"line":["0","0","1"]}"#);
        let back: P = serde_json::from_str(r#"["1/2", 1, "1"]"#).unwrap();
        assert_eq!(back, P::from_i64(1, 2, 2));
        let fp: HPoint<Float> = serde_json::from_str("[0.0, 3.0, 4.0]").unwrap();
        let json = serde_json::to_string(&fp).unwrap();
        assert_eq!(json, "[0.0,0.6,0.8]");
    }

    fn small() -> impl Strategy<Value = i64> {
        -9i64..=9
    }

    fn point() -> impl Strategy<Value = P> {
        (small(), small(), small())
            .prop_filter("nonzero", |(x, y, z)| (*x, *y, *z) != (0, 0, 0))
            .prop_map(|(x, y, z)| P::from_i64(x, y, z))
    }

    fn map() -> impl Strategy<Value = ProjMap<Rational>> {
        proptest::array::uniform9(small()).prop_filter_map("invertible", |a| {
            ProjMap::new(std::array::from_fn(|i| {
                std::array::from_fn(|j| Rational::from_i64(a[3 * i + j]))
            }))
            .ok()
        })
    }

    proptest! {
        #[test]
        fn join_meet_duality(p in point(), q in point(), r in point()) {
            let tol = exact();
            prop_assume!(!collinear(&[p.clone(), q.clone(), r.clone()], &tol).map(|c| c.0).unwrap_or(true));
            let back = meet(&join(&p, &q).unwrap(), &join(&p, &r).unwrap()).unwrap();
            prop_assert_eq!(back, p.clone());
            prop_assert_eq!(join(&p, &q).unwrap(), join(&q, &p).unwrap());
        }

        #[test]
        fn maps_preserve_incidence(m in map(), p in point(), q in point(), r in point()) {
            let tol = exact();
            prop_assume!(join(&p, &q).is_ok());
            let l = join(&p, &q).unwrap();
            prop_assert!(incident(&m.apply(&p), &m.apply_line(&l), &tol).0);
            let before = incident(&r, &l, &tol).0;
            prop_assert_eq!(before, incident(&m.apply(&r), &m.apply_line(&l), &tol).0);
            let pts = [p.clone(), q.clone(), r.clone()];
            let img: Vec<P> = pts.iter().map(|x| m.apply(x)).collect();
            if let (Ok(a), Ok(b)) = (collinear(&pts, &tol), collinear(&img, &tol)) {
                prop_assert_eq!(a.0, b.0);
            }
        }

        #[test]
        fn cross_ratio_invariant(m in map(), t in proptest::array::uniform4(-20i64..20)) {
            let tol = exact();
            let mut ts = t.to_vec();
            ts.sort();
            ts.dedup();
            prop_assume!(ts.len() == 4);
            let pts: Vec<P> = ts.iter().map(|&x| P::from_i64(x, 2 * x + 1, 1)).collect();
            let before = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3], &tol).unwrap();
            let img: Vec<P> = pts.iter().map(|p| m.apply(p)).collect();
            let after = cross_ratio(&img[0], &img[1], &img[2], &img[3], &tol).unwrap();
            prop_assert_eq!(before, after);
        }
    }
}
