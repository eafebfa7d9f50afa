use curtain_kit::boundary::*;
use curtain_kit::curtains::*;
use curtain_kit::spaces::{self, Point, Space};
use std::sync::Arc;

fn main() {
    let s = Space::hyperbolic2();
    let ray = BoundaryRay::new(
        &s,
        &Point::poincare(0.0, 0.0).unwrap(),
        &Point::poincare(0.5, 0.0).unwrap(),
    )
    .unwrap();
    let mut truncated = ray.ray.clone();
    truncated.hi = ray.truncation;
    let base = Arc::new(truncated);
    let h = curtain_at(&s, &base, 28.941).unwrap();
    let base_pt = ray.base(&s).unwrap();
    println!("side(base) = {:?}", side(&s, &h, &base_pt).unwrap());
    for i in [1usize, 4, 6, 7, 8, 16, 32, 64] {
        let t = 300.0 * i as f64 / 64.0;
        let p = spaces::evaluate(&s, &ray.ray, t).unwrap();
        let pr = spaces::project(&s, &p, &h.base).unwrap();
        println!("i={i} t={t:.2} proj.t={:.4} side={:?}", pr.t, side(&s, &h, &p).unwrap());
    }
    println!("sep = {:?}", separates_at_infinity(&s, &h, &ray));
}
