//! Randomized invariants across modules.

use proptest::prelude::*;
use quadconic::claims::{registry, run_all, ClaimKind, Status, VerificationReport};
use quadconic::config::{BuildOptions, QuadConfig};
use quadconic::conic::{line_conic_intersect, transform_conic};
use quadconic::expr::{parse_line, parse_point};
use quadconic::pentagram::{pi_map, random_inscribed};
use quadconic::poncelet::{
    closure_check, make_pencil, tangency_condition, tangent_chain, Branch,
};
use quadconic::projective::{collinear, HLine, HPoint, ProjMap};
use quadconic::sampler::{sample, SamplerSpec, FLOAT_MAX_CONDITION};
use quadconic::scalar::{q, Backend, Field, Float, Rational, Tolerance};

fn float_cfg(seed: u64) -> Option<QuadConfig<Float>> {
    let cfg = sample::<Float>(&SamplerSpec::new(seed, Backend::Float)).ok()?;
    (cfg.condition() <= FLOAT_MAX_CONDITION).then_some(cfg)
}

fn float_map() -> impl Strategy<Value = ProjMap<Float>> {
    proptest::array::uniform9(-3i64..=3).prop_filter_map("well conditioned", |a| {
        let g = ProjMap::new(std::array::from_fn(|i| {
            std::array::from_fn(|j| Float(a[3 * i + j] as f64))
        }))
        .ok()?;
        (g.condition() < 1e3).then_some(g)
    })
}

fn rational_map() -> impl Strategy<Value = ProjMap<Rational>> {
    proptest::array::uniform9(-4i64..=4).prop_filter_map("invertible", |a| {
        ProjMap::new(std::array::from_fn(|i| {
            std::array::from_fn(|j| Rational::from_i64(a[3 * i + j]))
        }))
        .ok()
    })
}

/// Statuses compared only where the residual is clear of the threshold.
fn clear(r: &VerificationReport, eps: f64) -> bool {
    let x = r.residual.to_f64();
    !(eps / 10.0..=eps * 10.0).contains(&x)
}

fn referenced_points(subjects: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for s in subjects {
        if let Ok(p) = parse_point(s) {
            out.extend(p.point_names().into_iter().map(String::from));
        } else if let Ok(l) = parse_line(s) {
            out.extend(l.point_names().into_iter().map(String::from));
        }
    }
    out
}

fn canonical_point(lam: f64, th: f64) -> HPoint<Float> {
    HPoint::affine(Float(th.cos() / lam.sqrt()), Float(th.sin() / (1.0 - lam).sqrt()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reports_are_deterministic(seed in 0u64..10_000) {
        let a = sample::<Float>(&SamplerSpec::new(seed, Backend::Float)).unwrap();
        let b = sample::<Float>(&SamplerSpec::new(seed, Backend::Float)).unwrap();
        let tol = Tolerance::new(1e-8);
        let ra = serde_json::to_string(&run_all(&a, &[], &tol).unwrap()).unwrap();
        let rb = serde_json::to_string(&run_all(&b, &[], &tol).unwrap()).unwrap();
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn exact_zero_claims_hold_in_floats(seed in 0u64..10_000) {
        let exact = sample::<Rational>(&SamplerSpec::perfect_square(seed)).unwrap();
        // same filter as float batches
        prop_assume!(exact.condition() <= FLOAT_MAX_CONDITION);
        let conic = exact.base_conic().convert::<Float>().unwrap();
        let verts = exact.vertices().map(|v| v.convert::<Float>().unwrap());
        let opts = BuildOptions { tol: Tolerance::new(1e-8), seed: Some(seed) };
        let float = QuadConfig::build(conic, verts, opts).unwrap();
        let ex = run_all(&exact, &[], &Tolerance::default()).unwrap();
        let fl = run_all(&float, &[], &Tolerance::new(1e-8)).unwrap();
        for (e, f) in ex.iter().zip(&fl) {
            if e.status == Status::Holds {
                prop_assert!(f.status != Status::Fails, "{} {:?}", f.id, f.residual);
            }
        }
    }

    #[test]
    fn statuses_survive_projective_maps(seed in 0u64..10_000, g in float_map()) {
        let Some(cfg) = float_cfg(seed) else { return Ok(()) };
        let conic = transform_conic(&g, cfg.base_conic());
        let verts = cfg.vertices().map(|v| g.apply(&v));
        let opts = BuildOptions { tol: Tolerance::new(1e-8), seed: Some(seed) };
        let Ok(img) = QuadConfig::build(conic, verts, opts) else { return Ok(()) };
        prop_assume!(img.condition() <= FLOAT_MAX_CONDITION);
        let ids: Vec<&str> = registry()
            .select(&[])
            .unwrap()
            .iter()
            .filter(|c| c.kind != ClaimKind::Closure)
            .map(|c| c.id.as_str())
            .collect();
        let tol = Tolerance::new(1e-8);
        let before = run_all(&cfg, &ids, &tol).unwrap();
        let after = run_all(&img, &ids, &tol).unwrap();
        for (a, b) in before.iter().zip(&after) {
            if clear(a, 1e-8) && clear(b, 1e-8) {
                prop_assert_eq!(a.status.label(), b.status.label(), "{}", a.id);
            }
        }
    }

    #[test]
    fn moving_a_point_breaks_a_claim_that_names_it(seed in 0u64..10_000, pick in 0usize..1000) {
        let Some(cfg) = float_cfg(seed) else { return Ok(()) };
        let tol = Tolerance::new(1e-8);
        let reports = run_all(&cfg, &[], &tol).unwrap();
        let claims = registry().select(&[]).unwrap();
        let mut named: Vec<String> = claims
            .iter()
            .zip(&reports)
            .filter(|(_, r)| r.status == Status::Holds)
            .flat_map(|(c, _)| referenced_points(&c.subjects))
            .filter(|n| !n.starts_with('A'))
            .collect();
        named.sort();
        named.dedup();
        prop_assume!(!named.is_empty());
        let name = &named[pick % named.len()];
        let moved = cfg.perturbed(name, 1e-3).unwrap();
        let after = run_all(&moved, &[], &tol).unwrap();
        let flipped = reports
            .iter()
            .zip(&after)
            .any(|(a, b)| a.status == Status::Holds && b.status == Status::Fails);
        prop_assert!(flipped, "{}", name);
    }

    #[test]
    fn pi_commutes_with_maps(seed in 0u64..10_000, g in rational_map()) {
        let Ok((_, p)) = random_inscribed::<Rational>(seed) else { return Ok(()) };
        let (Ok(a), Ok(b)) = (pi_map(&p.mapped(&g)), pi_map(&p)) else { return Ok(()) };
        let b = b.mapped(&g);
        for i in 0..12 {
            prop_assert_eq!(a.at(i), b.at(i));
        }
    }
}

proptest! {
    #[test]
    fn exact_and_float_collinearity_agree(c in proptest::array::uniform9(-30i64..30)) {
        let pts: Vec<HPoint<Rational>> = (0..3)
            .filter_map(|i| HPoint::new(q(c[3 * i], 1), q(c[3 * i + 1], 1), q(c[3 * i + 2], 7)).ok())
            .collect();
        prop_assume!(pts.len() == 3);
        let fl: Vec<HPoint<Float>> = pts.iter().map(|p| p.convert().unwrap()).collect();
        let (Ok(e), Ok(f)) = (collinear(&pts, &Tolerance::default()), collinear(&fl, &Tolerance::default())) else {
            return Ok(());
        };
        if f.1 .0 > 1e-8 || e.1.is_exact_zero() {
            prop_assert_eq!(e.0, f.0);
        }
    }

    /// Rational tangents `n = 1 + s k` meet the inner conic once; moving
    /// the intercept does not.
    #[test]
    fn tangency_condition_means_one_contact(mu in -19i64..19, s in -9i64..9, d in 1i64..5) {
        let mu = q(mu, 10);
        let s = q(s, d);
        let p = make_pencil(q(1, 3), mu.clone()).unwrap();
        let Ok(k) = (mu.clone() - q(2, 1) * s.clone()).checked_div(&(s.clone() * s.clone() - q(1, 1))) else {
            return Ok(());
        };
        let n = q(1, 1) + s * k.clone();
        prop_assert!(tangency_condition(&k, &n, &mu).is_exact_zero());
        let line = |n: Rational| HLine::new(k.clone(), -q(1, 1), n).unwrap();
        prop_assert_eq!(line_conic_intersect(&p.inner, &line(n.clone())).unwrap().len(), 1);
        let off = n + q(1, 3);
        prop_assert!(!tangency_condition(&k, &off, &mu).is_exact_zero());
        prop_assert!(line_conic_intersect(&p.inner, &line(off)).map_or(true, |v| v.len() != 1));
    }

    #[test]
    fn reversed_branch_walks_the_same_square(lam in 0.1f64..0.9, mu in -1.8f64..1.8, th in 0.0f64..std::f64::consts::TAU) {
        let p = make_pencil(Float(lam), Float(mu)).unwrap();
        let a = canonical_point(lam, th);
        let base = p.inner_base();
        let fwd = tangent_chain(&p.outer, &p.inner, Some(&base), &a, 4, Branch::First).unwrap();
        let back = tangent_chain(&p.outer, &p.inner, Some(&base), &a, 4, Branch::Second).unwrap();
        let tol = Tolerance::new(1e-9);
        for i in 1..4 {
            prop_assert!(fwd.vertices[i].proj_eq(&back.vertices[4 - i], &tol));
        }
    }

    #[test]
    fn diagonals_meet_at_the_origin(lam in 0.05f64..0.95, mu in -1.9f64..1.9, th in 0.0f64..std::f64::consts::TAU) {
        let p = make_pencil(Float(lam), Float(mu)).unwrap();
        let o = closure_check(&p, &canonical_point(lam, th)).unwrap();
        prop_assert!(o.closure_residual.0 < 1e-9);
        let d = o.diagonal_point.unwrap();
        prop_assert!(d.distance(&HPoint::from_i64(0, 0, 1)).0 < 1e-9);
    }
}
