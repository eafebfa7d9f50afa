//! Probes of the visual boundary: angle estimation between rays, curtain
//! limit sets, separation of tails, and chain-crossing detection.
//!
//! Boundary points are represented by truncated rays; every "for all t"
//! claim is sampled up to the truncation, which is recorded on the ray.

use crate::curtains::{curtain_at, side, Chain, Curtain, Side};
use crate::error::{Error, Result};
use crate::geom::hyperboloid as hyp;
use crate::geom::linalg;
use crate::spaces::{self, Geodesic, GeodesicKind, Model, Point, Space};
use std::sync::Arc;

/// Truncation used for hyperbolic rays: hyperboloid coordinates grow like
/// `exp(t)`, so staying near 300 keeps squared Minkowski products inside
/// f64 range.
pub const HYPERBOLIC_TRUNCATION: f64 = 300.0;
pub const EUCLIDEAN_TRUNCATION: f64 = 1e4;

/// A geodesic ray from a fixed base point, truncated for numerics.
#[derive(Debug, Clone)]
pub struct BoundaryRay {
    pub ray: Geodesic,
    pub truncation: f64,
}

impl BoundaryRay {
    pub fn new(space: &Space, base: &Point, toward: &Point) -> Result<BoundaryRay> {
        let ray = spaces::geodesic(space, base, toward, GeodesicKind::Ray)?;
        let truncation = match space.model {
            Model::Hyperbolic2 => HYPERBOLIC_TRUNCATION,
            _ => EUCLIDEAN_TRUNCATION,
        };
        Ok(BoundaryRay { ray, truncation })
    }

    pub fn with_truncation(mut self, t: f64) -> Self {
        self.truncation = t;
        self
    }

    pub fn base(&self, space: &Space) -> Result<Point> {
        spaces::evaluate(space, &self.ray, 0.0)
    }
}

/// Comparison-triangle angle between two rays from a common base point:
/// the side-ratio limit `c` is extrapolated from two sample radii and turned
/// into the apex angle of the isosceles Euclidean triangle with legs 1.
pub fn tits_angle_estimate(
    space: &Space,
    r1: &BoundaryRay,
    r2: &BoundaryRay,
    t_max: f64,
) -> Result<f64> {
    let b1 = r1.base(space)?;
    let b2 = r2.base(space)?;
    if spaces::distance(space, &b1, &b2)? > space.eps * 10.0 + 1e-9 {
        return Err(Error::PreconditionViolated(
            "rays must share their base point".into(),
        ));
    }
    let t_max = t_max.min(r1.truncation).min(r2.truncation);
    let c_at = |t: f64| -> Result<f64> {
        let p = spaces::evaluate(space, &r1.ray, t)?;
        let q = spaces::evaluate(space, &r2.ray, t)?;
        Ok(spaces::distance(space, &p, &q)? / t)
    };
    let c_half = c_at(t_max / 2.0)?;
    let c_full = c_at(t_max)?;
    // Richardson step for the 1/t error term.
    let c = (2.0 * c_full - c_half).clamp(0.0, 2.0);
    Ok(2.0 * (c / 2.0).asin())
}

/// The ray from `p` asymptotic to the ideal direction of `ray`.
fn asymptotic_ray_from(space: &Space, p: &Point, ray: &BoundaryRay) -> Result<Geodesic> {
    match (&space.model, p) {
        (Model::Euclidean { .. }, Point::Euclidean(base)) => {
            let a = spaces::evaluate(space, &ray.ray, 0.0)?;
            let b = spaces::evaluate(space, &ray.ray, 1.0)?;
            let (Point::Euclidean(a), Point::Euclidean(b)) = (a, b) else {
                unreachable!()
            };
            let dir = linalg::sub(b, a);
            let target = Point::Euclidean(linalg::add(*base, dir));
            spaces::geodesic(space, p, &target, GeodesicKind::Ray)
        }
        (Model::Hyperbolic2, Point::Hyperboloid(pc)) => {
            let a = spaces::evaluate(space, &ray.ray, 0.0)?;
            let b = spaces::evaluate(space, &ray.ray, 1.0)?;
            let (Point::Hyperboloid(ac), Point::Hyperboloid(bc)) = (a, b) else {
                unreachable!()
            };
            let u = hyp::direction(ac, bc).ok_or_else(|| {
                Error::PreconditionViolated("degenerate ray direction".into())
            })?;
            let (xi, _) = hyp::ideal_endpoints(ac, u);
            // Tangent at p toward the ideal point xi.
            let m = linalg::mdot(xi, *pc);
            let v = linalg::add(xi, linalg::scale(*pc, m));
            let norm = linalg::mdot(v, v).max(1e-300).sqrt();
            let dir = linalg::scale(v, 1.0 / norm);
            let target = Point::Hyperboloid(hyp::renormalise(hyp::evaluate(*pc, dir, 1.0)));
            spaces::geodesic(space, p, &target, GeodesicKind::Ray)
        }
        _ => Err(Error::UnsupportedModel(
            "asymptotic rays exist in the euclidean and hyperbolic models".into(),
        )),
    }
}

/// Membership of the ray's ideal point in the limit set of `h`: some pole
/// point `p` must satisfy "the ray from `p` to the ideal point projects
/// entirely to `p`". The pole is searched on a grid of 33 points, refined
/// once around the best candidate; a miss reports "not found" rather than a
/// definite negative.
pub fn limit_set_membership(
    space: &Space,
    h: &Curtain,
    ray: &BoundaryRay,
    _budget: u64,
) -> Result<bool> {
    let (pole_lo, pole_hi) = h.pole_interval();
    let tol = 1e-6;
    let check_pole_point = |c: f64| -> Result<f64> {
        let p = spaces::evaluate(space, &h.base, c)?;
        let asy = asymptotic_ray_from(space, &p, ray)?;
        let mut worst: f64 = 0.0;
        let mut t = 1.0;
        while t <= ray.truncation {
            let z = spaces::evaluate(space, &asy, t)?;
            let foot_t = spaces::project(space, &z, &h.base)?.t;
            worst = worst.max((foot_t - c).abs());
            t *= 2.0;
        }
        Ok(worst)
    };
    let grid = 33;
    let mut best = (f64::INFINITY, pole_lo);
    for i in 0..grid {
        let c = pole_lo + (pole_hi - pole_lo) * i as f64 / (grid - 1) as f64;
        let w = check_pole_point(c)?;
        if w < best.0 {
            best = (w, c);
        }
    }
    if best.0 <= tol {
        return Ok(true);
    }
    // One refinement pass around the best candidate.
    let span = (pole_hi - pole_lo) / (grid - 1) as f64;
    for i in 0..grid {
        let c = (best.1 - span + 2.0 * span * i as f64 / (grid - 1) as f64)
            .clamp(pole_lo, pole_hi);
        let w = check_pole_point(c)?;
        if w <= tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True iff the curtain eventually separates the ray's base point from its
/// tail: base on the Minus side, all sampled parameters beyond some t0 on
/// Plus, with the tail certified by a monotone projection parameter where
/// the model admits it.
///
/// When the curtain's base shares the ray's line, sides come from exact
/// parameter arithmetic; projecting far ray points back would saturate in
/// f64 once the tail correction drops below one ulp.
pub fn separates_at_infinity(space: &Space, h: &Curtain, ray: &BoundaryRay) -> Result<bool> {
    let base = ray.base(space)?;
    let map = spaces::common_line(space, &h.base, &ray.ray, space.eps.max(1e-9));
    let side_at = |t: f64| -> Result<Side> {
        if let Some(m) = &map {
            let mapped = m.apply(t);
            let (lo, hi) = h.pole_interval();
            Ok(if mapped < lo - space.eps {
                Side::Minus
            } else if mapped <= hi + space.eps {
                Side::On
            } else {
                Side::Plus
            })
        } else {
            let p = spaces::evaluate(space, &ray.ray, t)?;
            side(space, h, &p)
        }
    };
    if side_at(0.0)? != Side::Minus || side(space, h, &base)? != Side::Minus {
        return Ok(false);
    }
    // Cross-line projections saturate beyond moderate distances, so cap the
    // sampled stretch there and let the ideal certificate handle the tail.
    let sample_reach = if map.is_some() {
        ray.truncation
    } else {
        ray.truncation.min(15.0)
    };
    let samples = 64;
    let mut last_non_plus = None;
    for i in 1..=samples {
        let t = sample_reach * i as f64 / samples as f64;
        if side_at(t)? != Side::Plus {
            last_non_plus = Some(i);
        }
    }
    if last_non_plus.unwrap_or(0) >= samples {
        return Ok(false);
    }
    // Tail certificate.
    match &space.model {
        Model::Euclidean { .. } => {
            let r0 = spaces::evaluate(space, &ray.ray, 0.0)?;
            let r1 = spaces::evaluate(space, &ray.ray, 1.0)?;
            let h0 = spaces::project(space, &r0, &h.base)?.t;
            let h1 = spaces::project(space, &r1, &h.base)?.t;
            Ok(h1 > h0 - space.eps)
        }
        Model::Hyperbolic2 => {
            let a = spaces::evaluate(space, &ray.ray, 0.0)?;
            let b = spaces::evaluate(space, &ray.ray, 1.0)?;
            let (Point::Hyperboloid(ac), Point::Hyperboloid(bc)) = (a, b) else {
                unreachable!()
            };
            let u = hyp::direction(ac, bc)
                .ok_or_else(|| Error::PreconditionViolated("degenerate ray".into()))?;
            let (xi, _) = hyp::ideal_endpoints(ac, u);
            let (hp, hu) = h
                .base
                .hyperboloid_frame()
                .ok_or_else(|| Error::MismatchedSpace("hyperbolic curtain expected".into()))?;
            let limit = hyp::ideal_parameter(hp, hu, xi);
            Ok(limit > h.pole_interval().1 + space.eps)
        }
        _ => Ok(true),
    }
}

/// Searches for a verified chain of `target_len` curtains dual to the ray,
/// each separating the base point from the tail, pairwise separated at the
/// requested level.
pub fn find_crossed_l_chain(
    space: &Space,
    ray: &BoundaryRay,
    level: u32,
    target_len: usize,
    budget: u64,
) -> Result<Option<Chain>> {
    if target_len == 0 {
        return Ok(Some(Chain::empty()));
    }
    let spacing = match &space.model {
        Model::Euclidean { dim: 1 } => {
            if level == 0 {
                2.0 + 1e-3
            } else {
                1.0 + 1e-3
            }
        }
        Model::Hyperbolic2 => {
            let d_hat = crate::rankone::hyperbolic_contraction_constant();
            if (level as f64) < 10.0 * d_hat + 3.0 {
                return Ok(None);
            }
            8.0 * d_hat
        }
        _ => return Ok(None),
    };
    let mut truncated = ray.ray.clone();
    truncated.hi = ray.truncation;
    let base = Arc::new(truncated);
    let mut curtains = Vec::with_capacity(target_len);
    let mut r = 1.0;
    while curtains.len() < target_len && r + 0.5 < ray.truncation {
        let h = curtain_at(space, &base, r)?;
        if separates_at_infinity(space, &h, ray)? {
            curtains.push(h);
        }
        r += spacing;
    }
    if curtains.len() < target_len {
        return Ok(None);
    }
    let chain = Chain {
        curtains,
        status: crate::curtains::ChainStatus::DualDisjointPoles,
        level: Some(level),
    };
    // Spot-verify pairwise separation where decidable.
    for w in chain.curtains.windows(2) {
        match crate::curtains::is_l_separated(space, &w[0], &w[1], level, budget)? {
            crate::curtains::SeparationVerdict::Separated(_) => {}
            crate::curtains::SeparationVerdict::NotSeparated(_) => return Ok(None),
            crate::curtains::SeparationVerdict::Unknown { .. } => return Ok(None),
        }
    }
    Ok(Some(chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn euclidean_angles_recovered() {
        let s = Space::euclidean(2).unwrap();
        let o = Point::euclidean(&[0.0, 0.0]);
        let mk = |x: f64, y: f64| BoundaryRay::new(&s, &o, &Point::euclidean(&[x, y])).unwrap();
        let east = mk(1.0, 0.0);
        let north = mk(0.0, 1.0);
        let west = mk(-1.0, 0.0);
        let a = tits_angle_estimate(&s, &east, &north, 1e4).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-3);
        let b = tits_angle_estimate(&s, &east, &west, 1e4).unwrap();
        assert!((b - PI).abs() < 1e-3);
        let c = tits_angle_estimate(&s, &east, &mk(1.0, 1.0), 1e4).unwrap();
        assert!((c - PI / 4.0).abs() < 1e-3);
    }

    #[test]
    fn hyperbolic_distinct_rays_at_angle_pi() {
        let s = Space::hyperbolic2();
        let o = Point::poincare(0.0, 0.0).unwrap();
        let r1 = BoundaryRay::new(&s, &o, &Point::poincare(0.5, 0.0).unwrap()).unwrap();
        let r2 = BoundaryRay::new(&s, &o, &Point::poincare(0.0, 0.5).unwrap()).unwrap();
        let a = tits_angle_estimate(&s, &r1, &r2, 300.0).unwrap();
        assert!((a - PI).abs() < 1e-2, "angle {a}");
    }

    #[test]
    fn perpendicular_ray_in_limit_set() {
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
        let h = curtain_at(&s, &g, 0.0).unwrap();
        let o = Point::euclidean(&[0.0, 0.0]);
        let up = BoundaryRay::new(&s, &o, &Point::euclidean(&[0.0, 1.0])).unwrap();
        assert!(limit_set_membership(&s, &h, &up, 64).unwrap());
        let along = BoundaryRay::new(&s, &o, &Point::euclidean(&[1.0, 0.0])).unwrap();
        assert!(!limit_set_membership(&s, &h, &along, 64).unwrap());
    }

    #[test]
    fn hyperbolic_perpendicular_in_limit_set() {
        let s = Space::hyperbolic2();
        let o = Point::poincare(0.0, 0.0).unwrap();
        let g = Arc::new(
            spaces::geodesic(&s, &o, &Point::poincare(0.5, 0.0).unwrap(), GeodesicKind::Line)
                .unwrap(),
        );
        let h = curtain_at(&s, &g, 0.0).unwrap();
        let up = BoundaryRay::new(&s, &o, &Point::poincare(0.0, 0.5).unwrap()).unwrap();
        assert!(limit_set_membership(&s, &h, &up, 64).unwrap());
    }

    #[test]
    fn tail_separation_on_line() {
        let s = Space::euclidean(1).unwrap();
        let g = Arc::new(
            spaces::geodesic(
                &s,
                &Point::euclidean(&[0.0]),
                &Point::euclidean(&[1.0]),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let h = curtain_at(&s, &g, 0.0).unwrap();
        let from_left = BoundaryRay::new(
            &s,
            &Point::euclidean(&[-5.0]),
            &Point::euclidean(&[-4.0]),
        )
        .unwrap();
        assert!(separates_at_infinity(&s, &h, &from_left).unwrap());
        let away = BoundaryRay::new(
            &s,
            &Point::euclidean(&[-5.0]),
            &Point::euclidean(&[-6.0]),
        )
        .unwrap();
        assert!(!separates_at_infinity(&s, &h, &away).unwrap());
    }

    #[test]
    fn crossed_chain_on_line_and_plane() {
        let s = Space::euclidean(1).unwrap();
        let ray = BoundaryRay::new(&s, &Point::euclidean(&[0.0]), &Point::euclidean(&[1.0]))
            .unwrap();
        let chain = find_crossed_l_chain(&s, &ray, 1, 10, 10_000).unwrap();
        assert_eq!(chain.map(|c| c.len()), Some(10));

        let s2 = Space::euclidean(2).unwrap();
        let ray2 = BoundaryRay::new(
            &s2,
            &Point::euclidean(&[0.0, 0.0]),
            &Point::euclidean(&[1.0, 0.0]),
        )
        .unwrap();
        assert!(find_crossed_l_chain(&s2, &ray2, 5, 2, 10_000)
            .unwrap()
            .is_none());
    }

    #[test]
    fn crossed_chain_in_hyperbolic_plane() {
        let s = Space::hyperbolic2();
        let d_hat = crate::rankone::hyperbolic_contraction_constant();
        let level = (10.0 * d_hat + 3.0).ceil() as u32;
        let ray = BoundaryRay::new(
            &s,
            &Point::poincare(0.0, 0.0).unwrap(),
            &Point::poincare(0.5, 0.0).unwrap(),
        )
        .unwrap();
        let chain = find_crossed_l_chain(&s, &ray, level, 10, 10_000).unwrap();
        assert_eq!(chain.map(|c| c.len()), Some(10));
    }
}
