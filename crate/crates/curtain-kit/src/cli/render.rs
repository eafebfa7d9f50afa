//! Deterministic SVG rendering of scenes: geodesics, curtains as shaded
//! regions, chains, routes and point sets. Hyperbolic scenes project to the
//! Poincare disk; trees use a radial layout.

use crate::curtains::{side, Chain, Curtain, Side};
use crate::error::{Error, Result};
use crate::geom::hyperboloid as hyp;
use crate::geom::tree::{MetricTree, TreePoint};
use crate::spaces::{self, Geodesic, Model, PathPolyline, Point, Space};
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum SceneObject {
    Geodesic(Geodesic),
    Curtain(Curtain),
    Chain(Chain),
    Route(PathPolyline),
    Points(Vec<Point>),
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// Planar coordinates of a point for drawing.
fn plane_coords(space: &Space, p: &Point, layout: &TreeLayout) -> (f64, f64) {
    match (&space.model, p) {
        (Model::Euclidean { .. }, Point::Euclidean(v)) => (v[0], v[1]),
        (Model::Hyperbolic2, Point::Hyperboloid(v)) => {
            let d = hyp::to_poincare(*v);
            (d[0], d[1])
        }
        (Model::Tree(t), Point::Tree(tp)) => layout.position(t, tp),
        _ => (0.0, 0.0),
    }
}

/// Radial layout of a tree: leaves at evenly spaced angles, internal
/// vertices at the mean of their descendant directions, radius equal to the
/// metric distance from vertex 0.
struct TreeLayout {
    positions: Vec<(f64, f64)>,
}

impl TreeLayout {
    fn new(t: &MetricTree) -> TreeLayout {
        let n = t.vertex_count();
        let mut angle = vec![f64::NAN; n];
        let leaves = t.leaves();
        let leaf_count = leaves.len().max(1);
        for (i, &v) in leaves.iter().enumerate() {
            angle[v] = std::f64::consts::TAU * i as f64 / leaf_count as f64;
        }
        // Propagate angles inward by averaging over several passes.
        for _ in 0..n {
            for v in 0..n {
                if angle[v].is_nan() {
                    let mut sum = 0.0;
                    let mut count = 0;
                    for e in t.edges() {
                        let other = if e.u == v {
                            Some(e.v)
                        } else if e.v == v {
                            Some(e.u)
                        } else {
                            None
                        };
                        if let Some(o) = other {
                            if !angle[o].is_nan() {
                                sum += angle[o];
                                count += 1;
                            }
                        }
                    }
                    if count > 0 {
                        angle[v] = sum / count as f64;
                    }
                }
            }
        }
        let positions = (0..n)
            .map(|v| {
                let r = t.dist_pv(TreePoint::Vertex(v), 0);
                let a = if angle[v].is_nan() { 0.0 } else { angle[v] };
                (r * a.cos(), r * a.sin())
            })
            .collect();
        TreeLayout { positions }
    }

    fn empty() -> TreeLayout {
        TreeLayout { positions: Vec::new() }
    }

    fn position(&self, t: &MetricTree, p: &TreePoint) -> (f64, f64) {
        match p {
            TreePoint::Vertex(v) => self.positions[*v],
            TreePoint::Edge { edge, offset } => {
                let e = &t.edges()[*edge];
                let (ax, ay) = self.positions[e.u];
                let (bx, by) = self.positions[e.v];
                let f = offset / e.len;
                (ax + (bx - ax) * f, ay + (by - ay) * f)
            }
        }
    }
}

/// Samples of a geodesic in plane coordinates, clamping infinite domains.
fn geodesic_samples(
    space: &Space,
    g: &Geodesic,
    layout: &TreeLayout,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let reach = match space.model {
        Model::Hyperbolic2 => 20.0,
        _ => 50.0,
    };
    let lo = if g.lo.is_finite() { g.lo } else { -reach };
    let hi = if g.hi.is_finite() { g.hi } else { reach };
    let mut out = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = lo + (hi - lo) * i as f64 / samples as f64;
        let p = spaces::evaluate(space, g, t)?;
        out.push(plane_coords(space, &p, layout));
    }
    Ok(out)
}

fn polyline_path(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{} {} ", fmt(*x), fmt(*y));
    }
    d.trim_end().to_string()
}

/// Renders a scene to an SVG 1.1 document. Euclidean scenes of dimension
/// two, hyperbolic scenes on the disk, trees as embedded graphs; products
/// are not drawable.
pub fn render_scene(space: &Space, objects: &[SceneObject]) -> Result<String> {
    match &space.model {
        Model::Euclidean { dim: 2 } | Model::Hyperbolic2 | Model::Tree(_) => {}
        Model::Euclidean { dim } => {
            return Err(Error::UnsupportedModel(format!(
                "rendering needs a planar model, euclidean({dim}) is not"
            )))
        }
        Model::Product(..) => {
            return Err(Error::UnsupportedModel(
                "product spaces have no planar drawing".into(),
            ))
        }
    }
    let layout = match &space.model {
        Model::Tree(t) => TreeLayout::new(t),
        _ => TreeLayout::empty(),
    };

    let mut body = String::new();
    let mut all_points: Vec<(f64, f64)> = Vec::new();

    // Background: the disk boundary or the tree skeleton.
    match &space.model {
        Model::Hyperbolic2 => {
            body.push_str(
                "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#888888\" stroke-width=\"0.008\"/>\n",
            );
            all_points.push((-1.0, -1.0));
            all_points.push((1.0, 1.0));
        }
        Model::Tree(t) => {
            for e in t.edges() {
                let (ax, ay) = layout.positions[e.u];
                let (bx, by) = layout.positions[e.v];
                let _ = write!(
                    body,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\" stroke-width=\"0.05\"/>\n",
                    fmt(ax), fmt(ay), fmt(bx), fmt(by)
                );
                all_points.push((ax, ay));
                all_points.push((bx, by));
            }
        }
        _ => {}
    }

    let draw_curtain = |body: &mut String,
                            all: &mut Vec<(f64, f64)>,
                            h: &Curtain,
                            color: &str|
     -> Result<()> {
        match &space.model {
            Model::Euclidean { .. } => {
                // Slab between the two boundary lines orthogonal to the base.
                let (lo_pt, hi_pt) = (h.pole_start, h.pole_end);
                let (ax, ay) = plane_coords(space, &lo_pt, &layout);
                let (bx, by) = plane_coords(space, &hi_pt, &layout);
                let (dx, dy) = (bx - ax, by - ay);
                let norm = (dx * dx + dy * dy).sqrt().max(1e-12);
                let (wx, wy) = (-dy / norm, dx / norm);
                let ext = 100.0;
                let poly = [
                    (ax + wx * ext, ay + wy * ext),
                    (bx + wx * ext, by + wy * ext),
                    (bx - wx * ext, by - wy * ext),
                    (ax - wx * ext, ay - wy * ext),
                ];
                let pts: Vec<String> = poly
                    .iter()
                    .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
                    .collect();
                let _ = write!(
                    body,
                    "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"none\"/>\n",
                    pts.join(" ")
                );
                all.push((ax, ay));
                all.push((bx, by));
            }
            Model::Hyperbolic2 => {
                // Region bounded by the perpendicular geodesics at the pole
                // endpoints, sampled as polylines.
                let (p, u) = h
                    .base
                    .hyperboloid_frame()
                    .ok_or_else(|| Error::MismatchedSpace("hyperbolic curtain".into()))?;
                let mut boundary = Vec::new();
                for (idx, c) in [h.r - 0.5, h.r + 0.5].into_iter().enumerate() {
                    let (q, w) = hyp::perpendicular_at(p, u, c);
                    let mut pts: Vec<(f64, f64)> = (0..=64)
                        .map(|i| {
                            let s = -8.0 + 16.0 * i as f64 / 64.0;
                            let z = hyp::renormalise(hyp::evaluate(q, w, s));
                            let d = hyp::to_poincare(z);
                            (d[0], d[1])
                        })
                        .collect();
                    if idx == 1 {
                        pts.reverse();
                    }
                    boundary.extend(pts);
                }
                let _ = write!(
                    body,
                    "<path d=\"{} Z\" fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"none\"/>\n",
                    polyline_path(&boundary)
                );
            }
            Model::Tree(t) => {
                // Highlight the sub-intervals of each edge inside the curtain.
                for (ei, e) in t.edges().iter().enumerate() {
                    let samples = 32;
                    let mut run: Option<(f64, f64)> = None;
                    for i in 0..=samples {
                        let off = e.len * i as f64 / samples as f64;
                        let pt = t
                            .canonical(TreePoint::Edge { edge: ei, offset: off })
                            .expect("in range");
                        let on = side(space, h, &Point::Tree(pt))? == Side::On;
                        match (&mut run, on) {
                            (None, true) => run = Some((off, off)),
                            (Some((_, hi_run)), true) => *hi_run = off,
                            (Some((lo_run, hi_run)), false) => {
                                let a = layout.position(t, &TreePoint::Edge { edge: ei, offset: *lo_run });
                                let b = layout.position(t, &TreePoint::Edge { edge: ei, offset: *hi_run });
                                let _ = write!(
                                    body,
                                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"0.12\" stroke-opacity=\"0.6\"/>\n",
                                    fmt(a.0), fmt(a.1), fmt(b.0), fmt(b.1)
                                );
                                run = None;
                            }
                            (None, false) => {}
                        }
                    }
                    if let Some((lo_run, hi_run)) = run {
                        let a = layout.position(t, &TreePoint::Edge { edge: ei, offset: lo_run });
                        let b = layout.position(t, &TreePoint::Edge { edge: ei, offset: hi_run });
                        let _ = write!(
                            body,
                            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"0.12\" stroke-opacity=\"0.6\"/>\n",
                            fmt(a.0), fmt(a.1), fmt(b.0), fmt(b.1)
                        );
                    }
                }
            }
            Model::Product(..) => unreachable!(),
        }
        Ok(())
    };

    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    for (oi, obj) in objects.iter().enumerate() {
        let color = palette[oi % palette.len()];
        match obj {
            SceneObject::Geodesic(g) => {
                let pts = geodesic_samples(space, g, &layout, 64)?;
                all_points.extend(pts.iter().copied());
                let _ = write!(
                    body,
                    "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"0.03\"/>\n",
                    polyline_path(&pts)
                );
            }
            SceneObject::Curtain(h) => draw_curtain(&mut body, &mut all_points, h, color)?,
            SceneObject::Chain(c) => {
                for h in &c.curtains {
                    draw_curtain(&mut body, &mut all_points, h, color)?;
                }
            }
            SceneObject::Route(route) => {
                let pts: Vec<(f64, f64)> = route
                    .points
                    .iter()
                    .map(|p| plane_coords(space, p, &layout))
                    .collect();
                all_points.extend(pts.iter().copied());
                let _ = write!(
                    body,
                    "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"0.04\" stroke-dasharray=\"0.1,0.05\"/>\n",
                    polyline_path(&pts)
                );
            }
            SceneObject::Points(ps) => {
                for p in ps {
                    let (x, y) = plane_coords(space, p, &layout);
                    all_points.push((x, y));
                    let _ = write!(
                        body,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"0.06\" fill=\"{color}\"/>\n",
                        fmt(x),
                        fmt(y)
                    );
                }
            }
        }
    }

    // View box from content bounds.
    let (mut x0, mut y0, mut x1, mut y1) = (-1.0f64, -1.0f64, 1.0f64, 1.0f64);
    for (x, y) in &all_points {
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(*x);
            y0 = y0.min(*y);
            x1 = x1.max(*x);
            y1 = y1.max(*y);
        }
    }
    let pad = 0.05 * ((x1 - x0).max(y1 - y0)).max(1.0);
    let vb = format!(
        "{} {} {} {}",
        fmt(x0 - pad),
        fmt(y0 - pad),
        fmt(x1 - x0 + 2.0 * pad),
        fmt(y1 - y0 + 2.0 * pad)
    );
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{vb}\" width=\"640\" height=\"640\">\n{body}</svg>\n"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::GeodesicKind;
    use std::sync::Arc;

    #[test]
    fn euclidean_slab_renders() {
        let s = Space::euclidean(2).unwrap();
        let g = Arc::new(
            spaces::geodesic(
                &s,
                &Point::euclidean(&[0.0, 0.0]),
                &Point::euclidean(&[1.0, 0.0]),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let h = crate::curtains::curtain_at(&s, &g, 5.0).unwrap();
        let svg = render_scene(&s, &[SceneObject::Curtain(h)]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polygon"));
    }

    #[test]
    fn hyperbolic_curtain_renders_lens() {
        let s = Space::hyperbolic2();
        let g = Arc::new(
            spaces::geodesic(
                &s,
                &Point::poincare(0.0, 0.0).unwrap(),
                &Point::poincare(0.5, 0.0).unwrap(),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let h = crate::curtains::curtain_at(&s, &g, 0.0).unwrap();
        let svg = render_scene(&s, &[SceneObject::Curtain(h)]).unwrap();
        assert!(svg.contains("circle"));
        assert!(svg.contains("path"));
    }

    #[test]
    fn product_rendering_unsupported() {
        let t = MetricTree::from_edges(&[("a".into(), "b".into(), 1.0)]).unwrap();
        let s = Space::product(t.clone(), t);
        assert!(matches!(
            render_scene(&s, &[]),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn rendering_is_deterministic() {
        let s = Space::euclidean(2).unwrap();
        let pts = SceneObject::Points(vec![
            Point::euclidean(&[0.0, 0.0]),
            Point::euclidean(&[2.0, 1.0]),
        ]);
        let a = render_scene(&s, &[pts.clone()]).unwrap();
        let b = render_scene(&s, &[pts]).unwrap();
        assert_eq!(a, b);
    }
}
