//! Seeded random points for the property suites. All generators take an
//! explicit RNG so runs are reproducible from the recorded seed.

use crate::geom::tree::TreePoint;
use crate::spaces::{Model, Point, Space};
use rand::Rng;

/// A random point at scale `scale` (coordinate range, hyperbolic radius, or
/// ignored for trees, whose extent is fixed by the edge lengths).
pub fn random_point(space: &Space, rng: &mut impl Rng, scale: f64) -> Point {
    match &space.model {
        Model::Euclidean { dim } => {
            let mut v = [0.0; 3];
            for c in v.iter_mut().take(*dim) {
                *c = rng.gen_range(-scale..=scale);
            }
            Point::Euclidean(v)
        }
        Model::Hyperbolic2 => {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let rho = rng.gen_range(0.0..=scale);
            Point::Hyperboloid([
                rho.cosh(),
                rho.sinh() * theta.cos(),
                rho.sinh() * theta.sin(),
            ])
        }
        Model::Tree(t) => Point::Tree(random_tree_point(t, rng)),
        Model::Product(ta, tb) => {
            Point::Product(random_tree_point(ta, rng), random_tree_point(tb, rng))
        }
    }
}

pub fn random_tree_point(t: &crate::geom::tree::MetricTree, rng: &mut impl Rng) -> TreePoint {
    let edge = rng.gen_range(0..t.edges().len());
    let len = t.edges()[edge].len;
    let offset = rng.gen_range(0.0..=len);
    t.canonical(TreePoint::Edge { edge, offset })
        .expect("offset in range")
}

/// A pair of distinct points.
pub fn random_pair(space: &Space, rng: &mut impl Rng, scale: f64) -> (Point, Point) {
    loop {
        let x = random_point(space, rng, scale);
        let y = random_point(space, rng, scale);
        if crate::spaces::distance(space, &x, &y).unwrap_or(0.0) > 1e-6 {
            return (x, y);
        }
    }
}
