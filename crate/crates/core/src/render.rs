//! SVG output.
//!
//! Everything is drawn in float after conversion. Output is byte-stable:
//! fixed two-decimal coordinates, elements in layer order, no timestamps
//! or random ids.

use std::fmt::Write as _;

use crate::config::{Missing, Names, QuadConfig};
use crate::conic::Conic;
use crate::error::{Error, Result};
use crate::expr::parse_line;
use crate::projective::{HLine, HPoint};
use crate::scalar::{Field, Float};
use crate::scene::{expand_names, LayerKind, RenderSpec, Style, Viewport};

/// Samples per conic, over a half turn of lines through a base point.
pub const CONIC_SAMPLES: usize = 720;

const CSS: &str = "\
.background { fill: #ffffff; }
.vertex { fill: #1f3b73; stroke: #1f3b73; stroke-width: 1.5; }
.diagonal { fill: none; stroke: #7a7a7a; stroke-width: 1; }
.tangent { fill: none; stroke: #3a8f5c; stroke-width: 1; stroke-dasharray: 4 3; }
.family { fill: none; stroke: #8a4fb0; stroke-width: 1.2; }
.conic { fill: none; stroke: #1f3b73; stroke-width: 1.6; }
.derived { fill: #c0392b; stroke: #c0392b; stroke-width: 1.2; }
.highlight { fill: none; stroke: #e67e22; stroke-width: 2.2; }
.muted { fill: none; stroke: #b8b8b8; stroke-width: 0.8; }
.infinite { fill: #d35400; stroke: #d35400; stroke-width: 1.4; }
.label { font-family: sans-serif; font-size: 12px; fill: #222222; }
";

pub fn style_class(s: Style) -> &'static str {
    match s {
        Style::Vertex => "vertex",
        Style::Diagonal => "diagonal",
        Style::Tangent => "tangent",
        Style::Family => "family",
        Style::Conic => "conic",
        Style::Derived => "derived",
        Style::Highlight => "highlight",
        Style::Muted => "muted",
        Style::Infinite => "infinite",
    }
}

/// Two decimals, no negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn finite_xy(p: &HPoint<Float>) -> Option<(f64, f64)> {
    p.to_affine().map(|(x, y)| (x.0, y.0))
}

/// A window with sides padded by `pad` times the larger extent.
pub fn fit_viewport(points: &[(f64, f64)], pad: f64) -> Viewport {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in points {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if points.is_empty() {
        (xmin, xmax, ymin, ymax) = (-1.0, 1.0, -1.0, 1.0);
    }
    let ext = (xmax - xmin).max(ymax - ymin).max(1.0);
    let p = pad * ext;
    Viewport {
        xmin: xmin - p,
        xmax: xmax + p,
        ymin: ymin - p,
        ymax: ymax + p,
    }
}

/// Collects SVG elements for one picture.
pub struct Canvas {
    view: Viewport,
    width: f64,
    height: f64,
    shapes: String,
    marks: String,
    labels: String,
}

impl Canvas {
    pub fn new(view: Viewport, width: u32) -> Result<Self> {
        let (w, h) = (view.xmax - view.xmin, view.ymax - view.ymin);
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::DegenerateInput("empty viewport".into()));
        }
        let width = width.max(16) as f64;
        Ok(Canvas {
            view,
            width,
            height: (width * h / w).round(),
            shapes: String::new(),
            marks: String::new(),
            labels: String::new(),
        })
    }

    pub fn viewport(&self) -> Viewport {
        self.view
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let v = &self.view;
        (
            (x - v.xmin) / (v.xmax - v.xmin) * self.width,
            (v.ymax - y) / (v.ymax - v.ymin) * self.height,
        )
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        let v = &self.view;
        x >= v.xmin && x <= v.xmax && y >= v.ymin && y <= v.ymax
    }

    fn label(&mut self, name: &str, x: f64, y: f64) {
        let _ = writeln!(
            self.labels,
            "<text class=\"label\" x=\"{}\" y=\"{}\">{}</text>",
            num(x + 5.0),
            num(y - 5.0),
            escape(name)
        );
    }

    /// A dot with a label, or a boundary arrow for a point at infinity.
    /// Finite points outside the window are left out.
    pub fn point(&mut self, name: &str, p: &HPoint<Float>, style: Style, label: bool) {
        match finite_xy(p) {
            Some((x, y)) if self.inside(x, y) => {
                let (u, v) = self.px(x, y);
                let _ = writeln!(
                    self.marks,
                    "<circle class=\"{}\" data-name=\"{}\" cx=\"{}\" cy=\"{}\" r=\"3\"/>",
                    style_class(style),
                    escape(name),
                    num(u),
                    num(v)
                );
                if label {
                    self.label(name, u, v);
                }
            }
            Some(_) => {}
            None => self.infinite_point(name, p, label),
        }
    }

    fn infinite_point(&mut self, name: &str, p: &HPoint<Float>, label: bool) {
        let c = p.coords();
        let (dx, dy) = (c[0].0, c[1].0);
        let n = dx.hypot(dy);
        if n == 0.0 {
            return;
        }
        // in pixel space, y points down
        let (dx, dy) = (dx / n, -dy / n);
        let (cx, cy) = (self.width / 2.0, self.height / 2.0);
        let sx = if dx != 0.0 { (cx - 2.0) / dx.abs() } else { f64::INFINITY };
        let sy = if dy != 0.0 { (cy - 2.0) / dy.abs() } else { f64::INFINITY };
        let s = sx.min(sy);
        let (tx, ty) = (cx + s * dx, cy + s * dy);
        let (fx, fy) = (tx - 24.0 * dx, ty - 24.0 * dy);
        let _ = writeln!(
            self.marks,
            "<line class=\"infinite\" data-name=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" marker-end=\"url(#arrow)\"/>",
            escape(name),
            num(fx),
            num(fy),
            num(tx),
            num(ty)
        );
        if label {
            self.label(name, fx - 18.0 * dx, fy - 18.0 * dy);
        }
    }

    /// A full line clipped to the window; the line at infinity is skipped.
    pub fn line(&mut self, name: &str, l: &HLine<Float>, style: Style) {
        let c = l.coords();
        let (a, b, k) = (c[0].0, c[1].0, c[2].0);
        let v = self.view;
        let mut hits: Vec<(f64, f64)> = Vec::new();
        let mut push = |x: f64, y: f64| {
            let eps = 1e-12 * (v.xmax - v.xmin).max(v.ymax - v.ymin);
            if x >= v.xmin - eps && x <= v.xmax + eps && y >= v.ymin - eps && y <= v.ymax + eps
                && !hits.iter().any(|h| (h.0 - x).abs() + (h.1 - y).abs() < eps)
            {
                hits.push((x, y));
            }
        };
        if b != 0.0 {
            push(v.xmin, -(a * v.xmin + k) / b);
            push(v.xmax, -(a * v.xmax + k) / b);
        }
        if a != 0.0 {
            push(-(b * v.ymin + k) / a, v.ymin);
            push(-(b * v.ymax + k) / a, v.ymax);
        }
        if hits.len() < 2 {
            return;
        }
        let (p, q) = (self.px(hits[0].0, hits[0].1), self.px(hits[1].0, hits[1].1));
        let _ = writeln!(
            self.shapes,
            "<line class=\"{}\" data-name=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            style_class(style),
            escape(name),
            num(p.0),
            num(p.1),
            num(q.0),
            num(q.1)
        );
    }

    /// Closed polygon through the finite points; edges touching a point at
    /// infinity are dropped.
    pub fn polygon(&mut self, name: &str, pts: &[HPoint<Float>], style: Style) {
        let xy: Vec<Option<(f64, f64)>> = pts.iter().map(finite_xy).collect();
        let mut d = String::new();
        let mut pen = false;
        for i in 0..=xy.len() {
            match xy[i % xy.len()] {
                Some((x, y)) => {
                    let (u, v) = self.px(x, y);
                    let _ = write!(d, "{}{} {} ", if pen { "L" } else { "M" }, num(u), num(v));
                    pen = true;
                }
                None => pen = false,
            }
        }
        self.path(name, d.trim_end(), style);
    }

    fn path(&mut self, name: &str, d: &str, style: Style) {
        if d.is_empty() {
            return;
        }
        let _ = writeln!(
            self.shapes,
            "<path class=\"{}\" data-name=\"{}\" d=\"{}\"/>",
            style_class(style),
            escape(name),
            d
        );
    }

    /// A point of `c`, found on lines through the window centre.
    fn base_point(&self, c: &Conic<Float>) -> Option<[f64; 3]> {
        let v = self.view;
        let (cx, cy) = ((v.xmin + v.xmax) / 2.0, (v.ymin + v.ymax) / 2.0);
        let m = c.matrix().map(|r| r.map(|x| x.0));
        let q = |p: [f64; 3], d: [f64; 3]| -> f64 {
            (0..3).map(|i| (0..3).map(|j| p[i] * m[i][j] * d[j]).sum::<f64>()).sum()
        };
        for k in 0..64 {
            let a = std::f64::consts::PI * k as f64 / 64.0;
            let (p, d) = ([cx, cy, 1.0], [a.cos(), a.sin(), 0.0]);
            // Q(p + s d) = Q(p) + 2 s B(p, d) + s^2 Q(d)
            let (qa, qb, qc) = (q(d, d), q(p, d), q(p, p));
            let disc = qb * qb - qa * qc;
            if qa.abs() > 1e-14 && disc >= 0.0 {
                let s = (-qb + disc.sqrt()) / qa;
                return Some([cx + s * d[0], cy + s * d[1], 1.0]);
            }
        }
        None
    }

    /// Polyline of the real part of `c`. Lines through a point `P` of the
    /// conic with direction `d` meet it again at `Q(d) P - 2 B(P, d) d`,
    /// which runs once around the conic as `d` turns by a half turn.
    pub fn conic(&mut self, name: &str, c: &Conic<Float>, style: Style) {
        let Some(p) = self.base_point(c) else {
            let _ = writeln!(self.shapes, "<!-- {}: no real points in view -->", escape(name));
            return;
        };
        let m = c.matrix().map(|r| r.map(|x| x.0));
        let b = |u: [f64; 3], w: [f64; 3]| -> f64 {
            (0..3).map(|i| (0..3).map(|j| u[i] * m[i][j] * w[j]).sum::<f64>()).sum()
        };
        let v = self.view;
        let (w, h) = (v.xmax - v.xmin, v.ymax - v.ymin);
        let far = |x: f64, y: f64| {
            x < v.xmin - 2.0 * w || x > v.xmax + 2.0 * w || y < v.ymin - 2.0 * h || y > v.ymax + 2.0 * h
        };
        let mut d = String::new();
        let mut pen = false;
        let mut broken = false;
        for k in 0..=CONIC_SAMPLES {
            let a = std::f64::consts::PI * k as f64 / CONIC_SAMPLES as f64;
            let dir = [a.cos(), a.sin(), 0.0];
            let (qd, bpd) = (b(dir, dir), b(p, dir));
            let x: [f64; 3] = std::array::from_fn(|i| qd * p[i] - 2.0 * bpd * dir[i]);
            let n = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            let affine = (x[2].abs() > 1e-12 * n).then(|| (x[0] / x[2], x[1] / x[2]));
            match affine {
                Some((ax, ay)) if !far(ax, ay) => {
                    let (u, vv) = self.px(ax, ay);
                    let _ = write!(d, "{}{} {} ", if pen { "L" } else { "M" }, num(u), num(vv));
                    pen = true;
                }
                _ => {
                    pen = false;
                    broken = true;
                }
            }
        }
        let mut d = d.trim_end().to_string();
        if !broken && !d.is_empty() {
            d.push_str(" Z");
        }
        self.path(name, &d, style);
    }

    pub fn finish(&self) -> String {
        let (w, h) = (num(self.width), num(self.height));
        let mut s = String::new();
        let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
        );
        let _ = writeln!(s, "<style>\n{CSS}</style>");
        let _ = writeln!(s, "<defs>");
        let _ = writeln!(s, "<clipPath id=\"view\"><rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\"/></clipPath>");
        let _ = writeln!(
            s,
            "<marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" orient=\"auto\"><path class=\"infinite\" d=\"M 0 0 L 10 5 L 0 10 Z\"/></marker>"
        );
        let _ = writeln!(s, "</defs>");
        let _ = writeln!(s, "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\"/>");
        let _ = writeln!(s, "<g clip-path=\"url(#view)\">\n{}</g>", self.shapes);
        let _ = writeln!(s, "<g>\n{}</g>", self.marks);
        let _ = writeln!(s, "<g>\n{}</g>", self.labels);
        s.push_str("</svg>\n");
        s
    }
}

fn default_style(kind: LayerKind, name: &str) -> Style {
    match kind {
        LayerKind::Points if name.starts_with('A') && name.len() == 2 => Style::Vertex,
        LayerKind::Points => Style::Derived,
        LayerKind::Lines => Style::Diagonal,
        LayerKind::Conics => Style::Conic,
        LayerKind::Polygon => Style::Family,
    }
}

fn z_order(kind: LayerKind) -> u8 {
    match kind {
        LayerKind::Conics => 0,
        LayerKind::Polygon => 1,
        LayerKind::Lines => 2,
        LayerKind::Points => 3,
    }
}

/// `Ok(None)` for a known name that is absent in this configuration.
fn resolve<T>(r: std::result::Result<T, Missing>) -> Result<Option<T>> {
    match r {
        Ok(t) => Ok(Some(t)),
        Err(Missing::Absent(_)) => Ok(None),
        Err(Missing::Unknown(n)) => Err(Error::UnknownSubject(n)),
    }
}

fn to_float_point<F: Field>(p: &HPoint<F>) -> Result<HPoint<Float>> {
    p.convert()
}

/// Renders the layers of `spec` for a configuration.
///
/// Names that are unknown are errors; names blocked in this configuration
/// (an absent tangency family, say) leave an XML comment.
pub fn render_scene<F: Field>(cfg: &QuadConfig<F>, spec: &RenderSpec) -> Result<String> {
    let view = match spec.viewport {
        Some(v) => v,
        None => {
            let mut pts = Vec::new();
            for p in cfg.vertices() {
                pts.extend(finite_xy(&to_float_point(&p)?));
            }
            for layer in spec.layers.iter().filter(|l| l.kind != LayerKind::Conics) {
                if layer.kind == LayerKind::Lines {
                    continue;
                }
                for n in expand_names(&layer.names) {
                    if let Ok(p) = cfg.point(&n) {
                        pts.extend(finite_xy(&to_float_point(&p)?));
                    }
                }
            }
            // far-off points would squash the picture
            let (cx, cy) = {
                let v = cfg.vertices();
                let xy: Vec<(f64, f64)> = v.iter().filter_map(|p| finite_xy(&p.convert().ok()?)).collect();
                let n = xy.len().max(1) as f64;
                (xy.iter().map(|p| p.0).sum::<f64>() / n, xy.iter().map(|p| p.1).sum::<f64>() / n)
            };
            pts.retain(|(x, y)| (x - cx).abs() < 8.0 && (y - cy).abs() < 8.0);
            fit_viewport(&pts, 0.12)
        }
    };
    let mut canvas = Canvas::new(view, spec.width)?;
    let mut layers: Vec<_> = spec.layers.iter().collect();
    layers.sort_by_key(|l| z_order(l.kind));
    for layer in layers {
        match layer.kind {
            LayerKind::Points => {
                for n in expand_names(&layer.names) {
                    match resolve(cfg.point(&n))? {
                        Some(p) => {
                            let style = layer.style.unwrap_or_else(|| default_style(layer.kind, &n));
                            canvas.point(&n, &to_float_point(&p)?, style, spec.labels);
                        }
                        None => canvas.marks.push_str(&format!("<!-- {} absent -->\n", escape(&n))),
                    }
                }
            }
            LayerKind::Lines => {
                for n in &layer.names {
                    let e = parse_line(n)?;
                    match resolve(cfg.eval_line(&e))? {
                        Some(l) => {
                            let style = layer.style.unwrap_or_else(|| default_style(layer.kind, n));
                            canvas.line(n, &l.convert()?, style);
                        }
                        None => canvas.shapes.push_str(&format!("<!-- {} absent -->\n", escape(n))),
                    }
                }
            }
            LayerKind::Conics => {
                for n in &layer.names {
                    match resolve(cfg.conic(n))? {
                        Some(c) => {
                            let style = layer.style.unwrap_or_else(|| default_style(layer.kind, n));
                            canvas.conic(n, &c.convert()?, style);
                        }
                        None => canvas.shapes.push_str(&format!("<!-- {} absent -->\n", escape(n))),
                    }
                }
            }
            LayerKind::Polygon => {
                let names = expand_names(&layer.names);
                let mut pts = Vec::new();
                for n in &names {
                    match resolve(cfg.point(n))? {
                        Some(p) => pts.push(to_float_point(&p)?),
                        None => return Err(Error::MissingFamily(n.clone())),
                    }
                }
                let style = layer.style.unwrap_or(Style::Family);
                canvas.polygon(&names.concat(), &pts, style);
            }
        }
    }
    Ok(canvas.finish())
}
