//! Hyperbolicity instrumentation: four-point deltas, triangle thinness,
//! quasigeodesic profiles of ambient geodesics in the chain metrics, and the
//! three-condition path-family checker.

use crate::error::Result;
use crate::metrics::{dist_infinity, estimate_dl};
use crate::spaces::{self, Geodesic, GeodesicKind, Point, Space};

/// Which metric the probes are evaluated in.
#[derive(Debug, Clone, Copy)]
pub enum MetricChoice {
    /// The ambient model distance.
    Ambient,
    /// The ceiling metric.
    Ceiling,
    /// Certified lower bounds of the level metric. Lower bounds are used for
    /// all six pairwise distances of a four-tuple; mixing bounds would break
    /// the one-sided bias.
    Level { level: u32, budget: u64 },
}

pub fn metric_value(space: &Space, m: &MetricChoice, x: &Point, y: &Point) -> Result<f64> {
    Ok(match m {
        MetricChoice::Ambient => spaces::distance(space, x, y)?,
        MetricChoice::Ceiling => dist_infinity(space, x, y)? as f64,
        MetricChoice::Level { level, budget } => {
            estimate_dl(space, x, y, *level, *budget)?.lower as f64
        }
    })
}

#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub sample_size: usize,
    pub tuples: usize,
    pub level: Option<u32>,
    pub delta_hat: f64,
}

/// Four-point delta: half the gap between the two largest pairings, taken
/// over four-element subsets of `points` (exhaustive up to a cap, strided
/// beyond it).
pub fn four_point_delta(
    space: &Space,
    points: &[Point],
    metric: &MetricChoice,
) -> Result<DeltaReport> {
    let n = points.len();
    let level = match metric {
        MetricChoice::Level { level, .. } => Some(*level),
        _ => None,
    };
    if n < 4 {
        return Ok(DeltaReport {
            sample_size: n,
            tuples: 0,
            level,
            delta_hat: 0.0,
        });
    }
    // Pairwise distances once.
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric_value(space, metric, &points[i], &points[j])?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut delta_hat: f64 = 0.0;
    let mut tuples = 0usize;
    let cap = 250_000usize;
    let total = n * (n - 1) * (n - 2) * (n - 3) / 24;
    let stride = (total / cap).max(1);
    let mut counter = 0usize;
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for e in (c + 1)..n {
                    counter += 1;
                    if counter % stride != 0 {
                        continue;
                    }
                    let s1 = dist[a][b] + dist[c][e];
                    let s2 = dist[a][c] + dist[b][e];
                    let s3 = dist[a][e] + dist[b][c];
                    let mut v = [s1, s2, s3];
                    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    delta_hat = delta_hat.max((v[2] - v[1]) / 2.0);
                    tuples += 1;
                }
            }
        }
    }
    Ok(DeltaReport {
        sample_size: n,
        tuples,
        level,
        delta_hat,
    })
}

/// Maximum over samples of `[x, y]` of the distance (ceiling-metric proxy)
/// to the union of the other two sides.
pub fn thin_triangle_defect(
    space: &Space,
    x: &Point,
    y: &Point,
    z: &Point,
    step: f64,
) -> Result<f64> {
    let side_samples = |a: &Point, b: &Point| -> Result<Vec<Point>> {
        let d = spaces::distance(space, a, b)?;
        if d <= space.eps {
            return Ok(vec![*a]);
        }
        let g = spaces::geodesic(space, a, b, GeodesicKind::Segment)?;
        let n = (d / step).ceil() as usize;
        (0..=n)
            .map(|i| spaces::evaluate(space, &g, d * i as f64 / n as f64))
            .collect()
    };
    let main = side_samples(x, y)?;
    let mut others = side_samples(x, z)?;
    others.extend(side_samples(z, y)?);
    let mut defect: f64 = 0.0;
    for p in &main {
        let mut best = f64::INFINITY;
        for q in &others {
            best = best.min(dist_infinity(space, p, q)? as f64);
        }
        defect = defect.max(best);
    }
    Ok(defect)
}

/// The bound the triangle defect must satisfy at a given level.
pub fn thin_triangle_bound(level: u32) -> f64 {
    let l = level as f64;
    let l_half = 1.0 + (level / 2) as f64;
    (2.0 * l_half + 4.0) * (3.0 * l + 7.0)
}

/// Lower/upper level-metric bounds along a finite geodesic.
pub fn quasigeodesic_profile(
    space: &Space,
    g: &Geodesic,
    level: u32,
    step: f64,
    budget: u64,
) -> Result<Vec<(f64, u64, u64)>> {
    let len = g.length();
    let start = spaces::evaluate(space, g, 0.0)?;
    let n = (len / step).ceil() as usize;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = len * i as f64 / n as f64;
        let p = spaces::evaluate(space, g, t)?;
        let rep = estimate_dl(space, &start, &p, level, budget)?;
        out.push((t, rep.lower, rep.upper));
    }
    Ok(out)
}

/// Results of the three-part path-family check: short pairs have bounded
/// diameter, subsegments are stable, triangles are thin.
#[derive(Debug, Clone)]
pub struct GuessingReport {
    pub g1: bool,
    pub g2: bool,
    pub g3: bool,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub cases: usize,
}

/// Runs the checker on ambient geodesics measured with the level-metric
/// estimator, over the supplied sample of endpoint pairs (triples reuse
/// consecutive pairs).
pub fn guessing_geodesics_check(
    space: &Space,
    level: u32,
    sample: &[(Point, Point)],
    budget: u64,
) -> Result<GuessingReport> {
    let q = 2.0 * level as f64 + 6.0;
    let est = |a: &Point, b: &Point| -> Result<f64> {
        Ok(estimate_dl(space, a, b, level, budget)?.lower as f64)
    };
    let mut d1: f64 = 0.0;
    let mut d2: f64 = 0.0;
    let mut d3: f64 = 0.0;
    let mut cases = 0usize;
    for (x, y) in sample {
        cases += 1;
        let d = spaces::distance(space, x, y)?;
        if d <= space.eps {
            continue;
        }
        let g = spaces::geodesic(space, x, y, GeodesicKind::Segment)?;
        let samples: Vec<Point> = (0..=8)
            .map(|i| spaces::evaluate(space, &g, d * i as f64 / 8.0))
            .collect::<Result<_>>()?;
        // Short pairs: diameter of the connecting path stays bounded.
        if est(x, y)? <= 2.0 * q {
            for (i, p) in samples.iter().enumerate() {
                for qpt in samples.iter().skip(i + 1) {
                    d1 = d1.max(est(p, qpt)?);
                }
            }
        }
        // Subsegment stability: the path between two path points is the
        // corresponding subsegment; measure the estimator gap between
        // matched sample points.
        let sub = spaces::geodesic(space, &samples[2], &samples[6], GeodesicKind::Segment)?;
        let sub_len = spaces::distance(space, &samples[2], &samples[6])?;
        for i in 0..=4 {
            let t = sub_len * i as f64 / 4.0;
            let p_sub = spaces::evaluate(space, &sub, t)?;
            let p_orig = spaces::evaluate(
                space,
                &g,
                d * 2.0 / 8.0 + t,
            )?;
            d2 = d2.max(est(&p_sub, &p_orig)?);
        }
        // Thinness through the midpoint of the previous pair.
        if cases >= 2 {
            let (zx, _) = &sample[cases - 2];
            d3 = d3.max(thin_triangle_defect(space, x, y, zx, (d / 8.0).max(0.5))?);
        }
    }
    Ok(GuessingReport {
        g1: d1.is_finite(),
        g2: d2 <= 1.0 + space.eps,
        g3: d3 <= thin_triangle_bound(level),
        d1,
        d2,
        d3,
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_have_zero_delta() {
        let s = Space::euclidean(1).unwrap();
        let pts: Vec<Point> = [0.0, 1.0, 3.5, 7.0]
            .iter()
            .map(|&x| Point::euclidean(&[x]))
            .collect();
        let rep = four_point_delta(&s, &pts, &MetricChoice::Ambient).unwrap();
        assert!(rep.delta_hat.abs() < 1e-12);
    }

    #[test]
    fn unit_square_delta() {
        let s = Space::euclidean(2).unwrap();
        let pts = vec![
            Point::euclidean(&[0.0, 0.0]),
            Point::euclidean(&[1.0, 0.0]),
            Point::euclidean(&[1.0, 1.0]),
            Point::euclidean(&[0.0, 1.0]),
        ];
        let rep = four_point_delta(&s, &pts, &MetricChoice::Ambient).unwrap();
        assert!((rep.delta_hat - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn three_points_degenerate() {
        let s = Space::euclidean(2).unwrap();
        let pts = vec![
            Point::euclidean(&[0.0, 0.0]),
            Point::euclidean(&[1.0, 0.0]),
            Point::euclidean(&[0.0, 1.0]),
        ];
        let rep = four_point_delta(&s, &pts, &MetricChoice::Ambient).unwrap();
        assert_eq!(rep.delta_hat, 0.0);
        assert_eq!(rep.tuples, 0);
    }

    #[test]
    fn degenerate_triangle_defect_small() {
        let s = Space::euclidean(2).unwrap();
        let x = Point::euclidean(&[0.0, 0.0]);
        let y = Point::euclidean(&[8.0, 0.0]);
        let z = Point::euclidean(&[4.0, 0.0]);
        let defect = thin_triangle_defect(&s, &x, &y, &z, 0.5).unwrap();
        assert!(defect <= 2.0);
    }

    #[test]
    fn line_profile_tracks_slope_one() {
        let s = Space::euclidean(1).unwrap();
        let g = spaces::geodesic(
            &s,
            &Point::euclidean(&[0.0]),
            &Point::euclidean(&[12.0]),
            GeodesicKind::Segment,
        )
        .unwrap();
        let profile = quasigeodesic_profile(&s, &g, 2, 1.0, 50_000).unwrap();
        let mut prev = 0;
        for (t, lower, upper) in profile {
            assert!(lower >= prev, "profile decreased");
            prev = lower;
            assert!((lower as f64) >= t - 2.0 - 1.0);
            assert!(upper as f64 >= t - 1e-9);
        }
    }

    #[test]
    fn plane_profile_capped_at_two() {
        let s = Space::euclidean(2).unwrap();
        let g = spaces::geodesic(
            &s,
            &Point::euclidean(&[0.0, 0.0]),
            &Point::euclidean(&[15.0, 0.0]),
            GeodesicKind::Segment,
        )
        .unwrap();
        let profile = quasigeodesic_profile(&s, &g, 3, 2.5, 10_000).unwrap();
        for (_, lower, _) in profile {
            assert!(lower <= 2);
        }
    }
}
