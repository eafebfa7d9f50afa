//! Small fixed-size linear algebra used by the Euclidean and hyperboloid models.
//!
//! Everything here works on `[f64; 3]`; Euclidean points of dimension 1 or 2
//! are zero-padded. The Minkowski form has signature (-,+,+) with the time
//! coordinate first.

pub type V3 = [f64; 3];

pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Minkowski inner product with signature (-,+,+).
pub fn mdot(a: V3, b: V3) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Minkowski analogue of the cross product: `mdot(mcross(a,b), a) = 0` and
/// likewise for `b`.
pub fn mcross(a: V3, b: V3) -> V3 {
    // Raise the index of the Euclidean cross product: flip the sign of the
    // time coordinate.
    let c = cross(a, b);
    [-c[0], c[1], c[2]]
}

/// Solves the 2x2 system `[[a,b],[c,d]] x = [e,f]`. Returns `None` when the
/// determinant is (numerically) zero.
pub fn solve2(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Option<(f64, f64)> {
    let det = a * d - b * c;
    if det.abs() < 1e-14 * (a.abs() + b.abs() + c.abs() + d.abs()).max(1e-300) {
        return None;
    }
    Some(((e * d - b * f) / det, (a * f - e * c) / det))
}

/// 3x3 matrix, row major.
pub type M3 = [[f64; 3]; 3];

pub const IDENTITY: M3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mat_vec(m: &M3, v: V3) -> V3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(m: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[j][i] = x;
        }
    }
    out
}

pub fn trace(m: &M3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Gaussian elimination with partial pivoting on the augmented system
/// `m x = rhs`, tolerant of rank deficiency: free variables are set to zero
/// and `None` is returned only for inconsistent systems.
pub fn solve3_least_norm(m: &M3, rhs: V3, tol: f64) -> Option<V3> {
    let mut a = [
        [m[0][0], m[0][1], m[0][2], rhs[0]],
        [m[1][0], m[1][1], m[1][2], rhs[1]],
        [m[2][0], m[2][1], m[2][2], rhs[2]],
    ];
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..3 {
        let (best, best_val) = (row..3)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((row, 0.0));
        if best_val <= tol {
            continue;
        }
        a.swap(row, best);
        for r in 0..3 {
            if r != row {
                let f = a[r][col] / a[row][col];
                for c in col..4 {
                    a[r][c] -= f * a[row][c];
                }
            }
        }
        pivot_cols.push((row, col));
        row += 1;
        if row == 3 {
            break;
        }
    }
    // Inconsistent row: all coefficients ~0 but rhs not.
    for r in row..3 {
        if a[r][3].abs() > tol * 100.0 {
            return None;
        }
    }
    let mut x = [0.0; 3];
    for &(r, c) in &pivot_cols {
        x[c] = a[r][3] / a[r][c];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve2_inverts() {
        let (x, y) = solve2(2.0, 1.0, 1.0, 3.0, 5.0, 10.0).unwrap();
        assert!((2.0 * x + y - 5.0).abs() < 1e-12);
        assert!((x + 3.0 * y - 10.0).abs() < 1e-12);
    }

    #[test]
    fn solve3_handles_rank_deficiency() {
        // x + y = 2 twice, z free.
        let m = [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
        let x = solve3_least_norm(&m, [2.0, 2.0, 0.0], 1e-12).unwrap();
        assert!((x[0] + x[1] - 2.0).abs() < 1e-12);
        assert_eq!(x[2], 0.0);
        assert!(solve3_least_norm(&m, [2.0, 3.0, 0.0], 1e-12).is_none());
    }

    #[test]
    fn mcross_is_morthogonal() {
        let a = [1.2, 0.3, -0.7];
        let b = [0.5, -1.1, 0.2];
        let c = mcross(a, b);
        assert!(mdot(c, a).abs() < 1e-12);
        assert!(mdot(c, b).abs() < 1e-12);
    }
}
