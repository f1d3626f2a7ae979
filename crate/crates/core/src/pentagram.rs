//! The diagonal map on 12-gons and the experiment around its third iterate.
//!
//! `pi` sends vertex `i` to the meet of the diagonals `X_i X_{i+s}` and
//! `X_{i+1} X_{i+1+s}`. The span `s` comes from the errata table: with the
//! printed span 4 the third image of an inscribed 12-gon is not conconic,
//! with span 3 it is (and those diagonals are the sides of the three
//! embedded quadrilaterals). Results of the experiment are evidence for an
//! open conjecture, never a proof; reports say so in their status.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conic::{conconic, Conic};
use crate::errata;
use crate::error::{Error, Result};
use crate::projective::{join, meet, HPoint, ProjMap};
use crate::sampler::{random_conic, random_param};
use crate::scalar::{Field, Float, Tolerance};

/// Trials whose conic matrix is worse conditioned than this are kept out of
/// the summary statistics.
pub const QUARANTINE_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Polygon12<F: Field> {
    pub vertices: [HPoint<F>; 12],
}

impl<F: Field> Polygon12<F> {
    /// Consecutive vertices must differ.
    pub fn new(vertices: [HPoint<F>; 12]) -> Result<Self> {
        for i in 0..12 {
            if join(&vertices[i], &vertices[(i + 1) % 12]).is_err() {
                return Err(Error::DegenerateInput(format!(
                    "vertices {} and {} coincide",
                    i + 1,
                    (i + 1) % 12 + 1
                )));
            }
        }
        Ok(Polygon12 { vertices })
    }

    /// Vertex `i` with indices mod 12 (0-based).
    pub fn at(&self, i: usize) -> &HPoint<F> {
        &self.vertices[i % 12]
    }

    /// Relabels so the old vertex `k` becomes vertex 0.
    pub fn rotated(&self, k: usize) -> Self {
        Polygon12 {
            vertices: std::array::from_fn(|i| self.at(i + k).clone()),
        }
    }

    pub fn mapped(&self, g: &ProjMap<F>) -> Self {
        Polygon12 {
            vertices: std::array::from_fn(|i| g.apply(&self.vertices[i])),
        }
    }
}

/// The map with an explicit diagonal span.
pub fn pi_map_span<F: Field>(p: &Polygon12<F>, span: usize) -> Result<Polygon12<F>> {
    let mut out = Vec::with_capacity(12);
    for i in 0..12 {
        let bad = |_| Error::DegenerateDiagonals(i + 1);
        let l = join(p.at(i), p.at(i + span)).map_err(bad)?;
        let m = join(p.at(i + 1), p.at(i + 1 + span)).map_err(bad)?;
        out.push(meet(&l, &m).map_err(bad)?);
    }
    let vertices: [HPoint<F>; 12] = out.try_into().expect("twelve vertices");
    Ok(Polygon12 { vertices })
}

/// The map with the span from the errata table.
pub fn pi_map<F: Field>(p: &Polygon12<F>) -> Result<Polygon12<F>> {
    pi_map_span(p, errata::embedded().pi_span())
}

/// `A1A4A7A10`, `A2A5A8A11`, `A3A6A9A12`.
pub fn embedded_quads<F: Field>(p: &Polygon12<F>) -> [[HPoint<F>; 4]; 3] {
    std::array::from_fn(|k| std::array::from_fn(|j| p.at(k + 3 * j).clone()))
}

/// The regular 12-gon on the unit circle.
pub fn regular_polygon() -> Polygon12<Float> {
    let vertices = std::array::from_fn(|i| {
        let a = std::f64::consts::PI * i as f64 / 6.0;
        HPoint::affine(Float(a.cos()), Float(a.sin()))
    });
    Polygon12 { vertices }
}

/// A random conic and twelve points on it, in parameter order.
pub fn random_inscribed<F: Field>(seed: u64) -> Result<(Conic<F>, Polygon12<F>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let par = random_conic::<F>(&mut rng)?;
    for _ in 0..100 {
        let mut t: Vec<F> = (0..12).map(|_| random_param(&mut rng)).collect();
        t.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
        let v: [HPoint<F>; 12] =
            std::array::from_fn(|i| par.point_at_value(t[i].clone()));
        if let Ok(p) = Polygon12::new(v) {
            return Ok((par.conic().clone(), p));
        }
    }
    Err(Error::SamplerExhausted {
        retries: 100,
        reason: "repeated vertices".into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PiExperimentReport {
    pub seed: u64,
    pub conic: Conic<Float>,
    pub initial: Polygon12<Float>,
    /// Conconic residual of the images after one, two and three steps;
    /// `None` once a step degenerates.
    pub residuals: [Option<f64>; 3],
    pub condition: f64,
    pub flags: Vec<String>,
    /// Always `"evidence"`.
    pub status: &'static str,
}

impl PiExperimentReport {
    pub fn quarantined(&self) -> bool {
        self.condition > QUARANTINE_CONDITION || !self.flags.is_empty()
    }
}

/// Applies the map three times to a given inscribed 12-gon.
pub fn run_trial(
    seed: u64,
    conic: Conic<Float>,
    initial: Polygon12<Float>,
    tol: &Tolerance,
) -> PiExperimentReport {
    let m = conic.matrix();
    let condition = ProjMap::new(*m).map(|g| g.condition()).unwrap_or(f64::INFINITY);
    let mut flags = Vec::new();
    if condition > QUARANTINE_CONDITION {
        flags.push("ill-conditioned".to_string());
    }
    let mut residuals = [None; 3];
    let mut cur = initial.clone();
    for r in residuals.iter_mut() {
        match pi_map(&cur) {
            Ok(next) => cur = next,
            Err(e) => {
                flags.push(e.to_string());
                break;
            }
        }
        match conconic(&cur.vertices, tol) {
            Ok(rep) => *r = Some(rep.residual.0),
            Err(e) => {
                flags.push(e.to_string());
                break;
            }
        }
    }
    PiExperimentReport {
        seed,
        conic,
        initial,
        residuals,
        condition,
        flags,
        status: "evidence",
    }
}

/// `trials` independent trials; trial `i` uses seed `seed + i`.
pub fn run_4c_experiment(trials: usize, seed: u64, tol: &Tolerance) -> Vec<PiExperimentReport> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            match random_inscribed::<Float>(s) {
                Ok((c, p)) => run_trial(s, c, p, tol),
                Err(e) => PiExperimentReport {
                    seed: s,
                    conic: Conic::unit_circle(),
                    initial: regular_polygon(),
                    residuals: [None; 3],
                    condition: f64::INFINITY,
                    flags: vec![e.to_string()],
                    status: "evidence",
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub quarantined: usize,
    pub median: [f64; 3],
    pub max: [f64; 3],
    pub status: &'static str,
}

pub fn summarize_experiment(reports: &[PiExperimentReport]) -> ExperimentSummary {
    let kept: Vec<&PiExperimentReport> = reports.iter().filter(|r| !r.quarantined()).collect();
    let stat = |k: usize| {
        let mut v: Vec<f64> = kept.iter().filter_map(|r| r.residuals[k]).collect();
        v.sort_by(f64::total_cmp);
        let med = if v.is_empty() { f64::NAN } else { v[v.len() / 2] };
        (med, v.last().copied().unwrap_or(f64::NAN))
    };
    let s: [(f64, f64); 3] = std::array::from_fn(stat);
    ExperimentSummary {
        trials: reports.len(),
        quarantined: reports.len() - kept.len(),
        median: s.map(|x| x.0),
        max: s.map(|x| x.1),
        status: "evidence",
    }
}
