//! Reproducible random configurations.
//!
//! The perfect-square mode builds exact configurations whose two real
//! tangency pairs are rational. It does not search for parameters with
//! square discriminants; it starts from rational tangency points and
//! constructs the quadrilateral around them with the two harmonic
//! involutions of the conic (the one centred at a point and the one centred
//! at a conjugate point commute, so the chain closes after four steps).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{BuildOptions, QuadConfig};
use crate::conic::{
    pole, rational_point_param, second_intersection, transform_conic, Conic, ConicPointParam,
};
use crate::error::{Error, Result};
use crate::projective::{join, HPoint, ProjMap};
use crate::scalar::{Backend, Field, Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConicSource {
    UnitCircle,
    /// Outer conic of the canonical pencil, `lambda x^2 + (1 - lambda) y^2 = z^2`.
    /// A missing `lambda` is drawn at random.
    CanonicalPencil { lambda: Option<Scalar> },
    /// Image of the unit circle under a random well-conditioned matrix.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum VertexSource {
    /// Parameters on the rational parametrization of the conic, used in
    /// the given order.
    Params([Scalar; 4]),
    Random,
    PerfectSquare,
}

/// Which diagonal point ends up inside the conic (and so which tangency
/// family is missing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Roles {
    /// Vertices in cyclic order; `M3` inside.
    Convex,
    M1Inside,
    M2Inside,
    /// Drawn from the seed.
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub seed: u64,
    pub backend: Backend,
    pub conic: ConicSource,
    pub vertices: VertexSource,
    #[serde(default = "default_roles")]
    pub roles: Roles,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

fn default_roles() -> Roles {
    Roles::Convex
}

fn default_retries() -> usize {
    1000
}

impl SamplerSpec {
    pub fn new(seed: u64, backend: Backend) -> Self {
        SamplerSpec {
            seed,
            backend,
            conic: ConicSource::Random,
            vertices: VertexSource::Random,
            roles: Roles::Convex,
            max_retries: default_retries(),
        }
    }

    pub fn perfect_square(seed: u64) -> Self {
        SamplerSpec {
            vertices: VertexSource::PerfectSquare,
            roles: Roles::Any,
            ..SamplerSpec::new(seed, Backend::Exact)
        }
    }
}

/// A value in `[lo, hi]`: a small-height rational on the exact backend, a
/// uniform double otherwise.
fn draw<F: Field>(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> F {
    if F::BACKEND == Backend::Exact {
        let den = rng.gen_range(1..=9i64);
        let num = rng.gen_range(lo * den..=hi * den);
        F::from_ratio(num, den).expect("nonzero denominator")
    } else {
        F::from_scalar(&Scalar::Float(rng.gen_range(lo as f64..=hi as f64))).expect("finite")
    }
}

fn sample_conic<F: Field>(
    rng: &mut ChaCha8Rng,
    src: &ConicSource,
) -> Result<ConicPointParam<F>> {
    match src {
        ConicSource::UnitCircle => {
            rational_point_param(&Conic::unit_circle(), &HPoint::from_i64(-1, 0, 1))
        }
        ConicSource::CanonicalPencil { lambda } => {
            let lam: F = match lambda {
                Some(s) => F::from_scalar(s)?,
                None => loop {
                    let l: F = draw(rng, -3, 3);
                    if !l.is_exact_zero() && !(l.clone() - F::one()).is_exact_zero() {
                        break l;
                    }
                },
            };
            let c = Conic::from_coefficients(
                lam.clone(),
                F::zero(),
                F::one() - lam,
                F::zero(),
                F::zero(),
                -F::one(),
            )?;
            rational_point_param(&c, &HPoint::from_i64(1, 1, 1))
        }
        ConicSource::Random => random_conic(rng),
    }
}

/// The unit circle pushed through a random map with condition at most 30,
/// parametrized from the image of `(-1, 0)`.
pub fn random_conic<F: Field>(rng: &mut ChaCha8Rng) -> Result<ConicPointParam<F>> {
    loop {
        let m: [[F; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| draw(rng, -3, 3)));
        let Ok(g) = ProjMap::new(m) else { continue };
        if g.condition() > 30.0 {
            continue;
        }
        let c = transform_conic(&g, &Conic::unit_circle());
        return rational_point_param(&c, &g.apply(&HPoint::from_i64(-1, 0, 1)));
    }
}

/// A parameter for a random point: a small rational on the exact backend;
/// for floats `tan(theta / 2)` with `theta` uniform, which spreads points
/// evenly around the circle model.
pub fn random_param<F: Field>(rng: &mut ChaCha8Rng) -> F {
    if F::BACKEND == Backend::Exact {
        draw(rng, -4, 4)
    } else {
        let th: f64 = rng.gen_range(-3.0..3.0);
        F::from_scalar(&Scalar::Float((th / 2.0).tan())).expect("finite")
    }
}

fn reorder<T: Clone>(a: [T; 4], roles: Roles, rng: &mut ChaCha8Rng) -> [T; 4] {
    let roles = match roles {
        Roles::Any => [Roles::Convex, Roles::M1Inside, Roles::M2Inside][rng.gen_range(0..3)],
        r => r,
    };
    let [p1, p2, p3, p4] = a;
    match roles {
        Roles::M1Inside => [p1, p3, p2, p4],
        Roles::M2Inside => [p1, p2, p4, p3],
        _ => [p1, p2, p3, p4],
    }
}

/// Four vertices built around rational tangency points; cyclic order.
fn perfect_square_vertices<F: Field>(
    rng: &mut ChaCha8Rng,
    par: &ConicPointParam<F>,
) -> Result<[HPoint<F>; 4]> {
    let c = par.conic();
    let at = |t: F| par.point_at_value(t);
    let u1 = at(draw(rng, -4, 4));
    let u2 = at(draw(rng, -4, 4));
    let m1 = pole(c, &join(&u1, &u2)?)?;
    let v1 = at(draw(rng, -4, 4));
    let v2 = second_intersection(c, &v1, &join(&m1, &v1)?)?;
    let m2 = pole(c, &join(&v1, &v2)?)?;
    let a1 = at(draw(rng, -4, 4));
    let a2 = second_intersection(c, &a1, &join(&m1, &a1)?)?;
    let a3 = second_intersection(c, &a2, &join(&m2, &a2)?)?;
    let a4 = second_intersection(c, &a3, &join(&m1, &a3)?)?;
    Ok([a1, a2, a3, a4])
}

fn random_vertices<F: Field>(
    rng: &mut ChaCha8Rng,
    par: &ConicPointParam<F>,
) -> [HPoint<F>; 4] {
    let mut t: Vec<F> = (0..4).map(|_| random_param(rng)).collect();
    t.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
    std::array::from_fn(|i| par.point_at_value(t[i].clone()))
}

/// Samples a configuration. Retries on degenerate draws; with the
/// perfect-square mode every retry also redraws the tangency points.
pub fn sample<F: Field>(spec: &SamplerSpec) -> Result<QuadConfig<F>> {
    if spec.backend != F::BACKEND {
        return Err(Error::BackendMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let par = sample_conic::<F>(&mut rng, &spec.conic)?;
    sample_vertices(&mut rng, &par, spec)
}

/// Like [`sample`] on a given parametrized conic; `spec.conic` is ignored.
pub fn sample_on<F: Field>(par: &ConicPointParam<F>, spec: &SamplerSpec) -> Result<QuadConfig<F>> {
    if spec.backend != F::BACKEND {
        return Err(Error::BackendMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    sample_vertices(&mut rng, par, spec)
}

fn sample_vertices<F: Field>(
    rng: &mut ChaCha8Rng,
    par: &ConicPointParam<F>,
    spec: &SamplerSpec,
) -> Result<QuadConfig<F>> {
    let opts = BuildOptions {
        tol: if F::BACKEND == Backend::Exact {
            Tolerance::default()
        } else {
            Tolerance::from_env()
        },
        seed: Some(spec.seed),
    };
    if let VertexSource::Params(t) = &spec.vertices {
        let a: Result<Vec<HPoint<F>>> = t
            .iter()
            .map(|s| Ok(par.point_at_value(F::from_scalar(s)?)))
            .collect();
        let a: [HPoint<F>; 4] = a?.try_into().expect("four vertices");
        return QuadConfig::build(par.conic().clone(), a, opts);
    }
    let mut last = String::new();
    for _ in 0..=spec.max_retries {
        let a = match spec.vertices {
            VertexSource::PerfectSquare => match perfect_square_vertices(rng, par) {
                Ok(a) => a,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            },
            _ => random_vertices(rng, par),
        };
        let a = reorder(a, spec.roles, rng);
        match QuadConfig::build(par.conic().clone(), a, opts.clone()) {
            Ok(cfg) => return Ok(cfg),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::SamplerExhausted {
        retries: spec.max_retries,
        reason: last,
    })
}

/// Float batches drop configurations whose frame condition exceeds this.
pub const FLOAT_MAX_CONDITION: f64 = 1e3;

/// `n` configurations for claim runs, drawn from seeds `seed, seed + 1, ..`.
/// Exact batches use the perfect-square sampler; float batches use random
/// vertices and skip ill-conditioned draws, so they may consume more seeds.
pub fn batch<F: Field>(n: usize, seed: u64, roles: Roles) -> Result<Vec<QuadConfig<F>>> {
    let mut out = Vec::with_capacity(n);
    let mut s = seed;
    let limit = seed.wrapping_add(20 * n as u64 + 100);
    while out.len() < n {
        if s == limit {
            return Err(Error::SamplerExhausted {
                retries: 20 * n + 100,
                reason: "too many ill-conditioned draws".into(),
            });
        }
        let spec = match F::BACKEND {
            Backend::Exact => SamplerSpec {
                roles,
                ..SamplerSpec::perfect_square(s)
            },
            Backend::Float => SamplerSpec {
                roles,
                ..SamplerSpec::new(s, Backend::Float)
            },
        };
        let cfg = sample::<F>(&spec)?;
        if F::BACKEND == Backend::Exact || cfg.condition() <= FLOAT_MAX_CONDITION {
            out.push(cfg);
        }
        s = s.wrapping_add(1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Names;
    use crate::error::Error;
    use crate::scalar::{Float, Rational};

    #[test]
    fn deterministic_json() {
        let spec = SamplerSpec::new(42, Backend::Float);
        let a = sample::<Float>(&spec).unwrap().to_json();
        let b = sample::<Float>(&spec).unwrap().to_json();
        assert_eq!(a.to_string(), b.to_string());
        let e = SamplerSpec::perfect_square(42);
        let a = sample::<Rational>(&e).unwrap().to_json();
        let b = sample::<Rational>(&e).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn float_random_conic_has_one_inside_diagonal_point() {
        let cfg = sample::<Float>(&SamplerSpec::new(42, Backend::Float)).unwrap();
        let absent: Vec<_> = ["U1", "V1", "W1"]
            .iter()
            .filter_map(|n| cfg.point(n).err())
            .collect();
        assert_eq!(absent.len(), 1);
        assert_eq!(absent[0], crate::config::Missing::Absent(Error::InsidePoint));
        // convex order puts the inside point at M3
        assert!(cfg.point("W1").is_err());
    }

    #[test]
    fn perfect_square_configs_have_rational_tangency_points() {
        for seed in 0..12 {
            let cfg = sample::<Rational>(&SamplerSpec::perfect_square(seed)).unwrap();
            let present = ["U1", "V1", "W1"]
                .iter()
                .filter(|n| cfg.point(n).is_ok())
                .count();
            assert_eq!(present, 2, "seed {seed}");
        }
    }

    #[test]
    fn roles_choose_the_inside_point() {
        for (roles, missing) in [
            (Roles::Convex, "W1"),
            (Roles::M1Inside, "U1"),
            (Roles::M2Inside, "V1"),
        ] {
            let spec = SamplerSpec {
                roles,
                ..SamplerSpec::perfect_square(5)
            };
            let cfg = sample::<Rational>(&spec).unwrap();
            assert_eq!(
                cfg.point(missing),
                Err(crate::config::Missing::Absent(Error::InsidePoint))
            );
        }
    }

    #[test]
    fn backend_must_match() {
        let spec = SamplerSpec::new(1, Backend::Float);
        assert_eq!(sample::<Rational>(&spec).err(), Some(Error::BackendMismatch));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = SamplerSpec {
            conic: ConicSource::CanonicalPencil {
                lambda: Some(Scalar::exact(1, 3).unwrap()),
            },
            ..SamplerSpec::perfect_square(3)
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SamplerSpec>(&s).unwrap(), spec);
        assert!(sample::<Rational>(&spec).is_ok());
    }
}
