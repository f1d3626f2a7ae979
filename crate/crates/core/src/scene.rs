//! Scene documents: the JSON input of the CLI and of the serve protocol.
//!
//! A scene names a backend, a conic, four vertices and optionally the
//! families, claims and render layers wanted. Unknown fields are rejected
//! and the version is checked before anything is built.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{all_point_names, BuildOptions, QuadConfig};
use crate::conic::{rational_point_param, Conic, ConicPointParam};
use crate::error::{Error, Result};
use crate::expr::family;
use crate::projective::HPoint;
use crate::sampler::{random_conic, sample_on, Roles, SamplerSpec, VertexSource};
use crate::scalar::{Backend, Field, Scalar, Tolerance};

pub const SCENE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConicSpec {
    UnitCircle,
    Circle {
        center: [Scalar; 2],
        radius: Scalar,
    },
    /// `a x^2 + b xy + c y^2 + d x + e y + f`; `base` is a point on the
    /// conic, needed only for parameter-based vertices.
    Coefficients {
        coefficients: [Scalar; 6],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Vec<Scalar>>,
    },
    /// Outer conic of the canonical pencil.
    CanonicalPencil { lambda: Scalar },
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VertexSpec {
    /// Affine `[x, y]` or homogeneous `[x, y, z]`.
    Points { points: Vec<Vec<Scalar>> },
    /// Parameters along the conic's rational parametrization.
    Params { params: [Scalar; 4] },
    Random {
        seed: u64,
        #[serde(default = "convex")]
        roles: Roles,
    },
    PerfectSquare {
        seed: u64,
        #[serde(default = "convex")]
        roles: Roles,
    },
}

fn convex() -> Roles {
    Roles::Convex
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Viewport {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Points,
    Lines,
    Conics,
    /// Points joined cyclically.
    Polygon,
}

/// Style tokens; each maps to one CSS class of the SVG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Style {
    Vertex,
    Diagonal,
    Tangent,
    Family,
    Conic,
    Derived,
    Highlight,
    Muted,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub kind: LayerKind,
    /// Point names or family letters, line expressions, or conic names.
    pub names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<Style>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewport: Option<Viewport>,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "yes")]
    pub labels: bool,
    pub layers: Vec<Layer>,
}

fn default_width() -> u32 {
    600
}

fn yes() -> bool {
    true
}

fn default_backend() -> Backend {
    Backend::Float
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub version: u32,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    /// Float zero tolerance; `QUADCONIC_EPSILON` or the default otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub conic: ConicSpec,
    pub vertices: VertexSpec,
    /// Families to emit (all when empty).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderSpec>,
}

fn scalar<F: Field>(s: &Scalar) -> Result<F> {
    F::from_scalar(s).map_err(|e| match e {
        Error::BackendMismatch => {
            Error::Schema("exact scenes take integers or \"p/q\" strings, not decimals".into())
        }
        e => e,
    })
}

fn point<F: Field>(v: &[Scalar]) -> Result<HPoint<F>> {
    match v {
        [x, y] => Ok(HPoint::affine(scalar(x)?, scalar(y)?)),
        [x, y, z] => HPoint::new(scalar(x)?, scalar(y)?, scalar(z)?),
        _ => Err(Error::Schema(format!(
            "a point has 2 or 3 coordinates, got {}",
            v.len()
        ))),
    }
}

impl SceneDocument {
    pub fn parse(json: &str) -> Result<Self> {
        // version first, so an old document gets a version error rather
        // than a complaint about some renamed field
        let raw: serde_json::Value =
            serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
        match raw.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCENE_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Version {
                    found: v as u32,
                    expected: SCENE_VERSION,
                })
            }
            None => return Err(Error::Schema("missing field `version`".into())),
        }
        serde_json::from_value(raw).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn tolerance(&self) -> Tolerance {
        match (self.backend, self.tolerance) {
            (Backend::Exact, _) => Tolerance::default(),
            (_, Some(e)) => Tolerance::new(e),
            (_, None) => Tolerance::from_env(),
        }
    }

    /// The conic with a parametrization when one is available.
    pub fn conic<F: Field>(&self) -> Result<(Conic<F>, Option<ConicPointParam<F>>)> {
        let with = |c: Conic<F>, base: HPoint<F>| -> Result<(Conic<F>, Option<ConicPointParam<F>>)> {
            let par = rational_point_param(&c, &base)?;
            Ok((c, Some(par)))
        };
        match &self.conic {
            ConicSpec::UnitCircle => with(Conic::unit_circle(), HPoint::from_i64(-1, 0, 1)),
            ConicSpec::Circle { center, radius } => {
                let (a, b, r): (F, F, F) = (scalar(&center[0])?, scalar(&center[1])?, scalar(radius)?);
                let two = F::from_i64(2);
                let c = Conic::from_coefficients(
                    F::one(),
                    F::zero(),
                    F::one(),
                    -(two.clone() * a.clone()),
                    -(two * b.clone()),
                    a.square() + b.square() - r.square(),
                )?;
                with(c, HPoint::affine(a - r, b))
            }
            ConicSpec::Coefficients { coefficients, base } => {
                let k: Vec<F> = coefficients.iter().map(scalar).collect::<Result<_>>()?;
                let [a, b, c, d, e, f]: [F; 6] = k.try_into().expect("six coefficients");
                let conic = Conic::from_coefficients(a, b, c, d, e, f)?;
                conic.require_nondegenerate()?;
                match base {
                    Some(p) => with(conic, point(p)?),
                    None => Ok((conic, None)),
                }
            }
            ConicSpec::CanonicalPencil { lambda } => {
                let l: F = scalar(lambda)?;
                let c = Conic::from_coefficients(
                    l.clone(),
                    F::zero(),
                    F::one() - l,
                    F::zero(),
                    F::zero(),
                    -F::one(),
                )?;
                with(c, HPoint::from_i64(1, 1, 1))
            }
            ConicSpec::Random { seed } => {
                let par = random_conic::<F>(&mut ChaCha8Rng::seed_from_u64(*seed))?;
                Ok((par.conic().clone(), Some(par)))
            }
        }
    }

    fn sampler_spec(&self, seed: u64, vertices: VertexSource, roles: Roles) -> SamplerSpec {
        SamplerSpec {
            vertices,
            roles,
            ..SamplerSpec::new(seed, self.backend)
        }
    }

    pub fn build<F: Field>(&self) -> Result<QuadConfig<F>> {
        if self.backend != F::BACKEND {
            return Err(Error::BackendMismatch);
        }
        let (conic, par) = self.conic::<F>()?;
        let need_par = || {
            par.clone().ok_or_else(|| {
                Error::Schema("this vertex spec needs a conic with a base point".into())
            })
        };
        let opts = BuildOptions {
            tol: self.tolerance(),
            seed: None,
        };
        match &self.vertices {
            VertexSpec::Points { points } => {
                if points.len() != 4 {
                    return Err(Error::Schema(format!("need 4 vertices, got {}", points.len())));
                }
                let a: Vec<HPoint<F>> = points.iter().map(|p| point(p)).collect::<Result<_>>()?;
                QuadConfig::build(conic, a.try_into().expect("four"), opts)
            }
            VertexSpec::Params { params } => {
                let par = need_par()?;
                let a: Vec<HPoint<F>> = params
                    .iter()
                    .map(|t| Ok(par.point_at_value(scalar(t)?)))
                    .collect::<Result<_>>()?;
                QuadConfig::build(conic, a.try_into().expect("four"), opts)
            }
            VertexSpec::Random { seed, roles } => {
                let spec = self.sampler_spec(*seed, VertexSource::Random, *roles);
                sample_on(&need_par()?, &spec)
            }
            VertexSpec::PerfectSquare { seed, roles } => {
                if self.backend != Backend::Exact {
                    return Err(Error::Schema("perfect-square vertices need the exact backend".into()));
                }
                let spec = self.sampler_spec(*seed, VertexSource::PerfectSquare, *roles);
                sample_on(&need_par()?, &spec)
            }
        }
    }

    /// The same scene with vertex `index` (0-based) replaced.
    pub fn with_vertex<F: Field>(&self, cfg: &QuadConfig<F>, index: usize, p: &HPoint<F>) -> Self {
        let mut v = cfg.vertices();
        v[index] = p.clone();
        let points = v
            .iter()
            .map(|q| q.coords().iter().map(|x| x.to_scalar()).collect())
            .collect();
        SceneDocument {
            vertices: VertexSpec::Points { points },
            ..self.clone()
        }
    }
}

/// Expands family letters (`"J"`) into point names; other names pass through.
pub fn expand_names(names: &[String]) -> Vec<String> {
    let all = all_point_names();
    let mut out = Vec::new();
    for n in names {
        if n.chars().all(|c| c.is_ascii_uppercase()) && all.iter().any(|a| family(a) == *n) {
            out.extend(all.iter().filter(|a| family(a) == *n && !a.ends_with('\'')).cloned());
        } else {
            out.push(n.clone());
        }
    }
    out
}
