//! Rerouting one polygon side around a forbidden ball.
//!
//! Given polygon vertices whose sides other than `[x1, x2]` stay outside the
//! open ball around `p`, builds a path from `x1` to `x2` that also stays
//! outside and whose length is at most `8 (n r + d(x1, x2))`. The route
//! first prunes redundant vertices, then cuts each remaining corner with a
//! chord tangent to the ball.

use super::{distance, evaluate, geodesic, project, GeodesicKind, Model, PathPolyline, Point, Space};
use crate::error::{Error, Result};

/// Avoidance samples per returned polyline segment.
pub const AVOIDANCE_SAMPLES: usize = 64;

/// Exact minimum distance from `p` to the segment `[a, b]`.
fn seg_min_dist(space: &Space, a: &Point, b: &Point, p: &Point) -> Result<f64> {
    if distance(space, a, b)? <= space.eps {
        return distance(space, a, p);
    }
    let g = geodesic(space, a, b, GeodesicKind::Segment)?;
    Ok(project(space, p, &g)?.dist)
}

/// Point at fraction `u` of the segment `[a, b]`.
fn lerp(space: &Space, a: &Point, b: &Point, u: f64) -> Result<Point> {
    let d = distance(space, a, b)?;
    if d <= space.eps {
        return Ok(*a);
    }
    let g = geodesic(space, a, b, GeodesicKind::Segment)?;
    evaluate(space, &g, (u * d).clamp(0.0, d))
}

/// Largest `u` with `f(u) >= 0` on a sign change from `f(0) >= 0` to
/// `f(1) < 0`; used to slide chord endpoints up to tangency while staying on
/// the safe side.
fn bisect_last_safe(mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn circumnavigate(space: &Space, xs: &[Point], p: &Point, r: f64) -> Result<PathPolyline> {
    circumnavigate_with(space, xs, p, r, AVOIDANCE_SAMPLES)
}

pub fn circumnavigate_with(
    space: &Space,
    xs: &[Point],
    p: &Point,
    r: f64,
    samples: usize,
) -> Result<PathPolyline> {
    match space.model {
        Model::Euclidean { .. } | Model::Hyperbolic2 => {}
        _ => {
            return Err(Error::UnsupportedModel(
                "circumnavigation runs on euclidean and hyperbolic2 models; balls in trees are \
                 themselves trees"
                    .into(),
            ))
        }
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::PreconditionViolated(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    if r <= 0.0 {
        return Err(Error::PreconditionViolated(format!("radius {r} <= 0")));
    }
    let tol = 1e-6;

    // Degenerate call: the open ball misses [x1, x2], so the side itself is
    // an admissible route.
    if seg_min_dist(space, &xs[0], &xs[1], p)? >= r - tol {
        return PathPolyline::new(space, vec![xs[0], xs[1]]);
    }

    // p must lie on [x1, x2].
    if seg_min_dist(space, &xs[0], &xs[1], p)? > tol {
        return Err(Error::PreconditionViolated(
            "p does not lie on [x1, x2]".into(),
        ));
    }
    // Every other side must avoid the open ball.
    for i in 1..n {
        let a = &xs[i];
        let b = &xs[(i + 1) % n];
        if seg_min_dist(space, a, b, p)? < r - tol {
            return Err(Error::PreconditionViolated(format!(
                "side [x{}, x{}] enters the open ball",
                i + 1,
                (i + 1) % n + 1
            )));
        }
    }

    let d12 = distance(space, &xs[0], &xs[1])?;

    // Walk x3, x4, ..., xn, x1 and prune vertices whose corner can be cut
    // without touching the closed ball.
    let mut chain: Vec<Point> = xs[2..].to_vec();
    chain.push(xs[0]);
    let mut i = 0;
    while i + 2 < chain.len() {
        if seg_min_dist(space, &chain[i], &chain[i + 2], p)? >= r {
            chain.remove(i + 1);
        } else {
            // Slide chain[i+1] along [chain[i+1], chain[i+2]] until the side
            // from chain[i] becomes tangent to the ball.
            let a = chain[i];
            let b = chain[i + 1];
            let c = chain[i + 2];
            let u = bisect_last_safe(|u| {
                let q = lerp(space, &b, &c, u)?;
                Ok(seg_min_dist(space, &a, &q, p)? - r)
            })?;
            chain[i + 1] = lerp(space, &b, &c, u)?;
            i += 1;
        }
    }
    // Primed vertices x3', ..., xm' (x1 stays the terminal).
    let primed: Vec<Point> = chain[..chain.len() - 1].to_vec();
    let m = primed.len() + 2;
    let x1 = xs[0];
    let x2 = xs[1];

    // Tangent chord of the corner between segments [corner -> left] and
    // [corner -> right]: endpoints slide out from the corner until the chord
    // touches the ball. Returns the chord endpoints on each side.
    let corner_chord = |corner: &Point, left: &Point, right: &Point| -> Result<(Point, Point)> {
        let full = seg_min_dist(space, left, right, p)? - r;
        if full >= 0.0 {
            return Ok((*left, *right));
        }
        let u = bisect_last_safe(|u| {
            let a = lerp(space, corner, left, u)?;
            let b = lerp(space, corner, right, u)?;
            Ok(seg_min_dist(space, &a, &b, p)? - r)
        })?;
        Ok((lerp(space, corner, left, u)?, lerp(space, corner, right, u)?))
    };

    let mut route: Vec<Point> = vec![x1];
    if m == 3 {
        let corner = primed[0];
        let (w1, w3) = corner_chord(&corner, &x1, &x2)?;
        route.push(w1);
        route.push(w3);
    } else {
        // Closest points y_i of the inner sides, at distance exactly r.
        let mut y = Vec::with_capacity(primed.len().saturating_sub(1));
        for w in primed.windows(2) {
            let g = geodesic(space, &w[0], &w[1], GeodesicKind::Segment)?;
            let proj = project(space, p, &g)?;
            y.push(proj.foot);
        }
        let last = primed.len() - 1; // index of xm'
        let (w1, wm) = corner_chord(&primed[last], &x1, &y[last - 1])?;
        route.push(w1);
        route.push(wm);
        // Corner chords z_i at interior corners, walked from xm' back to x3'.
        for i in (1..last).rev() {
            let (z_plus, z_minus) = corner_chord(&primed[i], &y[i], &y[i - 1])?;
            route.push(z_plus);
            route.push(z_minus);
        }
        let (w3, w2) = corner_chord(&primed[0], &y[0], &x2)?;
        route.push(w3);
        route.push(w2);
    }
    route.push(x2);
    route.dedup_by(|a, b| distance(space, a, b).map(|d| d <= space.eps).unwrap_or(false));

    let polyline = PathPolyline::new(space, route)?;

    // Certify avoidance by sampling each segment.
    for w in polyline.points.windows(2) {
        let d = distance(space, &w[0], &w[1])?;
        if d <= space.eps {
            continue;
        }
        let g = geodesic(space, &w[0], &w[1], GeodesicKind::Segment)?;
        for k in 0..=samples {
            let t = d * k as f64 / samples as f64;
            let q = evaluate(space, &g, t)?;
            if distance(space, &q, p)? < r - tol {
                return Err(Error::PreconditionViolated(format!(
                    "constructed route entered the open ball (depth {})",
                    r - distance(space, &q, p)?
                )));
            }
        }
    }
    debug_assert!(polyline.length <= 8.0 * (n as f64 * r + d12) + 1e-6);
    Ok(polyline)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_detour_around_unit_disk() {
        let s = Space::euclidean(2).unwrap();
        let xs = vec![
            Point::euclidean(&[-2.0, 0.0]),
            Point::euclidean(&[2.0, 0.0]),
            Point::euclidean(&[2.0, 2.0]),
            Point::euclidean(&[-2.0, 2.0]),
        ];
        let p = Point::euclidean(&[0.0, 0.0]);
        let route = circumnavigate(&s, &xs, &p, 1.0).unwrap();
        assert!(route.length <= 8.0 * (4.0 * 1.0 + 4.0));
        assert_eq!(route.points[0], xs[0]);
        assert_eq!(*route.points.last().unwrap(), xs[1]);
        // The detour must beat the naive tour over the far corners.
        assert!(route.length >= 4.0);
    }

    #[test]
    fn triangle_detour_n3() {
        let s = Space::euclidean(2).unwrap();
        let xs = vec![
            Point::euclidean(&[-2.0, 0.0]),
            Point::euclidean(&[2.0, 0.0]),
            Point::euclidean(&[0.0, 2.0]),
        ];
        let p = Point::euclidean(&[0.0, 0.0]);
        let route = circumnavigate(&s, &xs, &p, 1.0).unwrap();
        assert!(route.length <= 8.0 * (3.0 * 1.0 + 4.0));
    }

    #[test]
    fn ball_missing_segment_returns_direct_route() {
        let s = Space::euclidean(2).unwrap();
        let xs = vec![
            Point::euclidean(&[0.0, 0.0]),
            Point::euclidean(&[4.0, 0.0]),
            Point::euclidean(&[2.0, 5.0]),
        ];
        // p far from [x1, x2]: the open ball misses the side entirely.
        let p = Point::euclidean(&[2.0, 3.0]);
        let route = circumnavigate(&s, &xs, &p, 1.0).unwrap();
        assert_eq!(route.points.len(), 2);
        assert!((route.length - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_sides_through_ball() {
        let s = Space::euclidean(2).unwrap();
        let xs = vec![
            Point::euclidean(&[-2.0, 0.0]),
            Point::euclidean(&[2.0, 0.0]),
            Point::euclidean(&[0.0, 0.5]),
        ];
        let p = Point::euclidean(&[0.0, 0.0]);
        assert!(matches!(
            circumnavigate(&s, &xs, &p, 1.0),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn hyperbolic_triangle_detour() {
        let s = Space::hyperbolic2();
        let x1 = Point::poincare(-0.6, 0.0).unwrap();
        let x2 = Point::poincare(0.6, 0.0).unwrap();
        let x3 = Point::poincare(0.0, 0.7).unwrap();
        let p = Point::poincare(0.0, 0.0).unwrap();
        let d12 = distance(&s, &x1, &x2).unwrap();
        let route = circumnavigate(&s, &[x1, x2, x3], &p, 0.5).unwrap();
        assert!(route.length <= 8.0 * (3.0 * 0.5 + d12));
        for w in route.points.windows(2) {
            let g = geodesic(&s, &w[0], &w[1], GeodesicKind::Segment).unwrap();
            let d = distance(&s, &w[0], &w[1]).unwrap();
            for k in 0..=64 {
                let q = evaluate(&s, &g, d * k as f64 / 64.0).unwrap();
                assert!(distance(&s, &q, &p).unwrap() >= 0.5 - 1e-6);
            }
        }
    }

    #[test]
    fn trees_are_unsupported() {
        let t = crate::geom::tree::MetricTree::from_edges(&[("a".into(), "b".into(), 5.0)])
            .unwrap();
        let s = Space::tree(t);
        let a = Point::Tree(crate::geom::tree::TreePoint::Vertex(0));
        let b = Point::Tree(crate::geom::tree::TreePoint::Vertex(1));
        assert!(matches!(
            circumnavigate(&s, &[a, b, a], &a, 1.0),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
