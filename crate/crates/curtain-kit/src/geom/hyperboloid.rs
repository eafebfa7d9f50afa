//! Hyperbolic plane on the hyperboloid `{x : <x,x> = -1, x0 > 0}` in
//! Minkowski 3-space with signature (-,+,+).
//!
//! Geodesics are stored as a base point `p` and a unit spacelike tangent `u`
//! (`<p,u> = 0`, `<u,u> = 1`), evaluated as `p cosh t + u sinh t`. All
//! closest-point formulas below are exact; the only approximation anywhere is
//! f64 rounding.

use super::linalg::{add, mcross, mdot, scale, sub, V3};

/// Renormalises a near-hyperboloid vector back onto the sheet by recomputing
/// the time coordinate from the spatial ones. Unlike radial rescaling this
/// has no cancellation, so it stays exact for far points.
pub fn renormalise(p: V3) -> V3 {
    [(1.0 + p[1] * p[1] + p[2] * p[2]).sqrt(), p[1], p[2]]
}

pub fn on_sheet(p: V3, tol: f64) -> bool {
    // Relative tolerance: the Minkowski square of a far point is a
    // cancellation of terms of size |p|^2.
    let scale = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    p[0] > 0.0 && (mdot(p, p) + 1.0).abs() <= (tol * 10.0 + 1e-9) * scale.max(1.0)
}

/// arccosh that tolerates arguments slightly below 1.
fn acosh_safe(c: f64) -> f64 {
    if c <= 1.0 {
        0.0
    } else {
        c.acosh()
    }
}

pub fn distance(x: V3, y: V3) -> f64 {
    acosh_safe(-mdot(x, y))
}

/// Unit tangent at `x` pointing toward `y`; `None` when the points coincide.
pub fn direction(x: V3, y: V3) -> Option<V3> {
    let c = -mdot(x, y);
    let s = (c * c - 1.0).max(0.0).sqrt();
    if s < 1e-12 {
        return None;
    }
    Some(scale(sub(y, scale(x, c)), 1.0 / s))
}

pub fn evaluate(p: V3, u: V3, t: f64) -> V3 {
    add(scale(p, t.cosh()), scale(u, t.sinh()))
}

/// Unconstrained minimiser of `t -> d(z, p cosh t + u sinh t)`.
///
/// Writing `a = -<z,p>` and `b = -<z,u>`, the squared Minkowski decomposition
/// gives `a^2 - b^2 >= 1`, so `tanh t* = -b/a` always has a solution.
pub fn project_parameter(p: V3, u: V3, z: V3) -> f64 {
    let a = -mdot(z, p);
    let b = -mdot(z, u);
    // 0.5 ln((a-b)/(a+b)) = artanh(-b/a), in a form stable for |b| close to a.
    0.5 * ((a - b).max(1e-300) / (a + b).max(1e-300)).ln()
}

/// Unit normal to the geodesic `(p,u)`: spacelike, Minkowski-orthogonal to
/// both `p` and `u`. The sign is a fixed orientation convention.
pub fn normal(p: V3, u: V3) -> V3 {
    let n = mcross(p, u);
    let s = mdot(n, n).max(1e-300).sqrt();
    scale(n, 1.0 / s)
}

/// The complete geodesic through `alpha(c)` orthogonal to `(p,u)`.
pub fn perpendicular_at(p: V3, u: V3, c: f64) -> (V3, V3) {
    (evaluate(p, u, c), normal(p, u))
}

/// Ideal endpoints of the geodesic `(p,u)` as null vectors, forward first.
pub fn ideal_endpoints(p: V3, u: V3) -> (V3, V3) {
    (add(p, u), sub(p, u))
}

/// Extension of the projection parameter to an ideal (null) point.
///
/// Returns `+inf`/`-inf` when `xi` is an ideal endpoint of the geodesic
/// itself, i.e. when the ratio reaches +-1.
pub fn ideal_parameter(p: V3, u: V3, xi: V3) -> f64 {
    let a = -mdot(xi, p);
    let b = -mdot(xi, u);
    let r = -b / a;
    if r >= 1.0 - 1e-12 {
        f64::INFINITY
    } else if r <= -1.0 + 1e-12 {
        f64::NEG_INFINITY
    } else {
        r.atanh()
    }
}

/// Solves `project_parameter(p, u, gamma(s)) = target` for `s` along the
/// geodesic `gamma = (q, w)`. Returns `None` when no finite solution exists
/// (the target value is not attained on `gamma`).
pub fn solve_parameter_along(p: V3, u: V3, q: V3, w: V3, target: f64) -> Option<f64> {
    // -<gamma(s), p> = a1 cosh s + a2 sinh s, likewise for u. The condition
    // tanh(t*) = -B/A becomes B + A tanh(target) = 0, a linear equation in
    // (cosh s, sinh s).
    let tau = target.tanh();
    let a1 = -mdot(q, p);
    let a2 = -mdot(w, p);
    let b1 = -mdot(q, u);
    let b2 = -mdot(w, u);
    let c_cosh = b1 + a1 * tau;
    let c_sinh = b2 + a2 * tau;
    // c_cosh cosh s + c_sinh sinh s = 0  =>  tanh s = -c_cosh / c_sinh.
    if c_sinh.abs() <= c_cosh.abs() {
        return None;
    }
    Some((-c_cosh / c_sinh).atanh())
}

/// Poincare disk point to hyperboloid coordinates.
pub fn from_poincare(v: [f64; 2]) -> Option<V3> {
    let n2 = v[0] * v[0] + v[1] * v[1];
    if n2 >= 1.0 {
        return None;
    }
    let d = 1.0 - n2;
    Some([(1.0 + n2) / d, 2.0 * v[0] / d, 2.0 * v[1] / d])
}

/// Hyperboloid point to the Poincare disk.
pub fn to_poincare(p: V3) -> [f64; 2] {
    [p[1] / (1.0 + p[0]), p[2] / (1.0 + p[0])]
}

/// Ideal (null) vector to its boundary point on the unit circle.
pub fn ideal_to_disk(xi: V3) -> [f64; 2] {
    let n = (xi[1] * xi[1] + xi[2] * xi[2]).sqrt().max(1e-300);
    [xi[1] / n, xi[2] / n]
}

/// Hyperbolic law of cosines: side `c` opposite the angle `gamma` between
/// sides `a` and `b`.
pub fn side_from_angle(a: f64, b: f64, gamma: f64) -> f64 {
    acosh_safe(a.cosh() * b.cosh() - a.sinh() * b.sinh() * gamma.cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> V3 {
        from_poincare([x, y]).unwrap()
    }

    #[test]
    fn geodesic_midpoint_is_equidistant() {
        let x = pt(0.1, 0.2);
        let y = pt(-0.4, 0.35);
        let d = distance(x, y);
        let u = direction(x, y).unwrap();
        let m = evaluate(x, u, d / 2.0);
        assert!((distance(x, m) - d / 2.0).abs() < 1e-9);
        assert!((distance(m, y) - d / 2.0).abs() < 1e-9);
        assert!(on_sheet(m, 1e-9));
    }

    #[test]
    fn projection_is_orthogonal_foot() {
        let p = pt(0.0, 0.0);
        let u = direction(p, pt(0.5, 0.0)).unwrap();
        let z = pt(0.3, 0.4);
        let t = project_parameter(p, u, z);
        // The foot minimises the distance: compare against a parameter sweep.
        let foot = evaluate(p, u, t);
        let d0 = distance(z, foot);
        for k in -100..=100 {
            let s = t + k as f64 * 0.01;
            assert!(distance(z, evaluate(p, u, s)) + 1e-12 >= d0);
        }
    }

    #[test]
    fn perpendicular_points_project_to_base() {
        let p = pt(0.0, 0.0);
        let u = direction(p, pt(0.5, 0.0)).unwrap();
        let (q, w) = perpendicular_at(p, u, 0.7);
        for k in -5..=5 {
            let z = evaluate(q, w, k as f64 * 0.3);
            assert!((project_parameter(p, u, z) - 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn ideal_parameter_matches_limit() {
        let p = pt(0.0, 0.0);
        let u = direction(p, pt(0.5, 0.0)).unwrap();
        let q = pt(0.2, 0.4);
        let w = direction(q, pt(-0.1, 0.6)).unwrap();
        let (fwd, _) = ideal_endpoints(q, w);
        let lim = ideal_parameter(p, u, fwd);
        let far = project_parameter(p, u, evaluate(q, w, 20.0));
        assert!((lim - far).abs() < 1e-6);
    }

    #[test]
    fn solve_parameter_along_hits_target() {
        let p = pt(0.0, 0.0);
        let u = direction(p, pt(0.5, 0.0)).unwrap();
        let q = pt(0.2, 0.4);
        let w = direction(q, pt(-0.3, -0.2)).unwrap();
        let target = 0.25;
        let s = solve_parameter_along(p, u, q, w, target).unwrap();
        let z = evaluate(q, w, s);
        assert!((project_parameter(p, u, z) - target).abs() < 1e-9);
    }
}
