//! Fixed pictures of the main constructions, kept as golden files.

use crate::conic::fit_conic_all;
use crate::error::{Error, Result};
use crate::conic::Conic;
use crate::pentagram::{pi_map, Polygon12};
use crate::projective::HPoint;
use crate::poncelet::{conic_sequence, SequenceRule};
use crate::render::{fit_viewport, render_scene, Canvas};
use crate::scalar::Float;
use crate::scene::{Layer, LayerKind, RenderSpec, SceneDocument, Style, Viewport};

pub const FIGURES: [&str; 5] = ["fig1", "fig2", "fig9", "fig13", "fig15"];

/// The quadrilateral used by the configuration figures.
pub const REFERENCE_SCENE: &str = r#"{
  "version": 1,
  "backend": "float",
  "conic": {"kind": "unit-circle"},
  "vertices": {"kind": "points", "points": [[1, 0], ["-5/13", "12/13"], ["-4/5", "-3/5"], ["3/5", "-4/5"]]}
}"#;

fn layer(kind: LayerKind, names: &[&str], style: Option<Style>) -> Layer {
    Layer {
        kind,
        names: names.iter().map(|s| s.to_string()).collect(),
        style,
    }
}

const TANGENTS: [&str; 4] = ["t[C](A1)", "t[C](A2)", "t[C](A3)", "t[C](A4)"];

fn spec(name: &str) -> Option<RenderSpec> {
    use LayerKind::*;
    let view = |xmin, xmax, ymin, ymax| Some(Viewport { xmin, xmax, ymin, ymax });
    let (viewport, layers) = match name {
        // two diagonal points and two tangent meets on one line
        "fig1" => (
            view(-2.4, 3.2, -2.0, 2.0),
            vec![
                layer(Conics, &["C"], None),
                layer(Lines, &["A1A2", "A2A3", "A3A4", "A4A1", "A1A3", "A2A4"], Some(Style::Muted)),
                layer(Lines, &TANGENTS, Some(Style::Tangent)),
                layer(Lines, &["M3M1"], Some(Style::Highlight)),
                layer(Points, &["A", "M1", "M3", "N2", "P2"], None),
            ],
        ),
        // the concurrency point of four lines
        "fig2" => (
            view(-2.2, 2.2, -2.0, 2.0),
            vec![
                layer(Conics, &["C"], None),
                layer(Lines, &TANGENTS, Some(Style::Tangent)),
                layer(Lines, &["N1P1", "N2P2", "A1A3", "A2A4"], Some(Style::Highlight)),
                layer(Points, &["A", "N1", "N2", "P1", "P2", "M3"], None),
            ],
        ),
        // tangents to C1 at the X and T points meet in the J points
        "fig9" => (
            view(-4.5, 3.5, -3.0, 5.0),
            vec![
                layer(Conics, &["C"], Some(Style::Muted)),
                layer(Conics, &["C1"], None),
                layer(
                    Lines,
                    &[
                        "t[C1](X1)", "t[C1](X2)", "t[C1](X3)", "t[C1](X4)",
                        "t[C1](T1)", "t[C1](T2)", "t[C1](T3)", "t[C1](T4)",
                    ],
                    Some(Style::Tangent),
                ),
                layer(Lines, &["J1J5", "J2J6", "J3J7", "J4J8"], Some(Style::Highlight)),
                layer(Points, &["X", "T"], Some(Style::Vertex)),
                layer(Points, &["J", "M3"], None),
            ],
        ),
        _ => return None,
    };
    Some(RenderSpec {
        viewport,
        width: 600,
        labels: true,
        layers,
    })
}

fn sequence_figure() -> Result<String> {
    let cfg = SceneDocument::parse(REFERENCE_SCENE)?.build::<Float>()?;
    let seq = conic_sequence(&cfg, 5, SequenceRule::Z)?;
    let mut pts = Vec::new();
    // later conics grow quickly; frame the first three and clip the rest
    for c in &seq[..3] {
        for v in c.vertices() {
            pts.extend(v.to_affine().map(|(x, y)| (x.0, y.0)));
        }
    }
    let mut canvas = Canvas::new(fit_viewport(&pts, 0.1), 600)?;
    for (k, c) in seq.iter().enumerate() {
        let style = if k == 0 { Style::Conic } else { Style::Family };
        canvas.conic(&format!("C{k}"), c.base_conic(), style);
        canvas.polygon(&format!("Q{k}"), &c.vertices(), Style::Muted);
    }
    for (k, c) in seq.iter().enumerate() {
        for (i, v) in c.vertices().iter().enumerate() {
            let style = if k == 0 { Style::Vertex } else { Style::Derived };
            let name = if k == 0 { format!("A{}", i + 1) } else { format!("{k}.{}", i + 1) };
            canvas.point(&name, v, style, k == 0);
        }
    }
    Ok(canvas.finish())
}

/// Twelve points of the unit circle, each a little off the regular position.
fn irregular_polygon() -> Result<Polygon12<Float>> {
    const JITTER: [f64; 12] = [0.04, -0.06, 0.02, 0.08, -0.04, 0.0, 0.06, -0.08, 0.04, -0.02, 0.08, -0.04];
    let v = std::array::from_fn(|i| {
        let a = std::f64::consts::PI * i as f64 / 6.0 + JITTER[i];
        HPoint::affine(Float(a.cos()), Float(a.sin()))
    });
    Polygon12::new(v)
}

fn pentagram_figure() -> Result<String> {
    pentagram_svg(&Conic::unit_circle(), irregular_polygon()?)
}

/// A 12-gon on `conic`, its three images, and the conic fitted to the last.
pub fn pentagram_svg(conic: &Conic<Float>, p0: Polygon12<Float>) -> Result<String> {
    let mut gens = vec![p0];
    for _ in 0..3 {
        gens.push(pi_map(gens.last().unwrap())?);
    }
    let pts: Vec<(f64, f64)> = gens
        .iter()
        .flat_map(|g| g.vertices.iter())
        .filter_map(|v| v.to_affine().map(|(x, y)| (x.0, y.0)))
        .collect();
    let mut canvas = Canvas::new(fit_viewport(&pts, 0.05), 600)?;
    canvas.conic("C", conic, Style::Conic);
    let fitted = fit_conic_all(&gens[3].vertices)?;
    canvas.conic("fit", &fitted.conic, Style::Highlight);
    // the third image is shown by its points on the fitted conic
    let styles = [Style::Family, Style::Muted, Style::Muted];
    for (k, g) in gens[..3].iter().enumerate() {
        canvas.polygon(&format!("gen{k}"), &g.vertices, styles[k]);
    }
    for (i, v) in gens[0].vertices.iter().enumerate() {
        canvas.point(&format!("X{}", i + 1), v, Style::Vertex, true);
    }
    for (i, v) in gens[3].vertices.iter().enumerate() {
        canvas.point(&format!("X{}'''", i + 1), v, Style::Derived, false);
    }
    Ok(canvas.finish())
}

/// One of [`FIGURES`] as an SVG document.
pub fn figure(name: &str) -> Result<String> {
    match name {
        "fig13" => sequence_figure(),
        "fig15" => pentagram_figure(),
        _ => {
            let spec = spec(name).ok_or_else(|| Error::UnknownSubject(name.into()))?;
            let cfg = SceneDocument::parse(REFERENCE_SCENE)?.build::<Float>()?;
            render_scene(&cfg, &spec)
        }
    }
}
