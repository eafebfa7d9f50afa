//! Contraction measurement, the conversions between contracting geodesics
//! and frequently-met separated chains, and skewering detection for model
//! isometries.

use crate::curtains::{curtain_at, halfspace_param_image, Chain, ChainStatus, Curtain, Side};
use crate::error::{Error, Result};
use crate::geom::hyperboloid as hyp;
use crate::geom::linalg::{self, M3, V3};
use crate::geom::tree::TreePoint;
use crate::spaces::{self, Geodesic, GeodesicKind, Model, Point, Space};
use once_cell::sync::Lazy;
use std::sync::Arc;

/// A model isometry.
#[derive(Debug, Clone)]
pub enum Isometry {
    /// x -> map x + translation, with `map` orthogonal.
    Euclidean { map: M3, translation: V3 },
    /// A Lorentz matrix preserving the upper hyperboloid sheet.
    Hyperbolic2 { map: M3 },
    /// Vertex permutation respecting edges and lengths.
    Tree { perm: Vec<usize> },
    /// Pair of factor automorphisms, optionally composed with the factor
    /// swap (only meaningful when the factors agree).
    Product {
        a: Vec<usize>,
        b: Vec<usize>,
        swap: bool,
    },
}

impl Isometry {
    pub fn euclidean_translation(v: &[f64]) -> Isometry {
        let mut t = [0.0; 3];
        for (i, &c) in v.iter().take(3).enumerate() {
            t[i] = c;
        }
        Isometry::Euclidean {
            map: linalg::IDENTITY,
            translation: t,
        }
    }

    pub fn euclidean_rotation_2d(theta: f64) -> Isometry {
        let (s, c) = theta.sin_cos();
        Isometry::Euclidean {
            map: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    /// Boost of translation length `l` along the geodesic through the
    /// origin in the disk's x-direction.
    pub fn hyperbolic_boost_x(l: f64) -> Isometry {
        Isometry::Hyperbolic2 {
            map: [
                [l.cosh(), l.sinh(), 0.0],
                [l.sinh(), l.cosh(), 0.0],
                [0.0, 0.0, 1.0],
            ],
        }
    }

    pub fn hyperbolic_rotation(theta: f64) -> Isometry {
        let (s, c) = theta.sin_cos();
        Isometry::Hyperbolic2 {
            map: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }
}

/// Checks distance preservation on a deterministic probe set.
pub fn validate_isometry(space: &Space, g: &Isometry) -> Result<()> {
    let probes = probe_points(space);
    for (i, x) in probes.iter().enumerate() {
        for y in probes.iter().skip(i + 1) {
            let d0 = spaces::distance(space, x, y)?;
            let d1 =
                spaces::distance(space, &apply_point(space, g, x)?, &apply_point(space, g, y)?)?;
            if (d0 - d1).abs() > space.eps * 100.0 + 1e-7 {
                return Err(Error::PreconditionViolated(format!(
                    "map distorts a probe pair by {}",
                    (d0 - d1).abs()
                )));
            }
        }
    }
    Ok(())
}

fn probe_points(space: &Space) -> Vec<Point> {
    match &space.model {
        Model::Euclidean { dim } => {
            let coords: &[[f64; 3]] = &[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.3, 1.2, 0.0],
                [-0.7, 0.4, 0.9],
                [2.0, -1.0, 0.5],
            ];
            coords
                .iter()
                .map(|c| {
                    let mut v = *c;
                    for x in v.iter_mut().skip(*dim) {
                        *x = 0.0;
                    }
                    Point::Euclidean(v)
                })
                .collect()
        }
        Model::Hyperbolic2 => [[0.0, 0.0], [0.4, 0.1], [-0.3, 0.5], [0.2, -0.6]]
            .iter()
            .map(|c| Point::poincare(c[0], c[1]).unwrap())
            .collect(),
        Model::Tree(t) => (0..t.vertex_count())
            .map(|v| Point::Tree(TreePoint::Vertex(v)))
            .collect(),
        Model::Product(ta, tb) => {
            let mut out = Vec::new();
            for va in 0..ta.vertex_count().min(4) {
                for vb in 0..tb.vertex_count().min(4) {
                    out.push(Point::Product(TreePoint::Vertex(va), TreePoint::Vertex(vb)));
                }
            }
            out
        }
    }
}

fn apply_tree_point(
    tree: &crate::geom::tree::MetricTree,
    perm: &[usize],
    p: &TreePoint,
) -> Result<TreePoint> {
    match p {
        TreePoint::Vertex(v) => Ok(TreePoint::Vertex(perm[*v])),
        TreePoint::Edge { edge, offset } => {
            let e = &tree.edges()[*edge];
            let (iu, iv) = (perm[e.u], perm[e.v]);
            for (ei, f) in tree.edges().iter().enumerate() {
                if f.u == iu && f.v == iv {
                    return tree.canonical(TreePoint::Edge {
                        edge: ei,
                        offset: *offset,
                    });
                }
                if f.u == iv && f.v == iu {
                    return tree.canonical(TreePoint::Edge {
                        edge: ei,
                        offset: f.len - *offset,
                    });
                }
            }
            Err(Error::PreconditionViolated(
                "permutation does not respect the edge set".into(),
            ))
        }
    }
}

pub fn apply_point(space: &Space, g: &Isometry, x: &Point) -> Result<Point> {
    match (&space.model, g, x) {
        (
            Model::Euclidean { .. },
            Isometry::Euclidean { map, translation },
            Point::Euclidean(v),
        ) => Ok(Point::Euclidean(linalg::add(
            linalg::mat_vec(map, *v),
            *translation,
        ))),
        (Model::Hyperbolic2, Isometry::Hyperbolic2 { map }, Point::Hyperboloid(v)) => Ok(
            Point::Hyperboloid(hyp::renormalise(linalg::mat_vec(map, *v))),
        ),
        (Model::Tree(t), Isometry::Tree { perm }, Point::Tree(p)) => {
            Ok(Point::Tree(apply_tree_point(t, perm, p)?))
        }
        (Model::Product(ta, tb), Isometry::Product { a, b, swap }, Point::Product(pa, pb)) => {
            if *swap {
                Ok(Point::Product(
                    apply_tree_point(tb, a, pb)?,
                    apply_tree_point(ta, b, pa)?,
                ))
            } else {
                Ok(Point::Product(
                    apply_tree_point(ta, a, pa)?,
                    apply_tree_point(tb, b, pb)?,
                ))
            }
        }
        _ => Err(Error::MismatchedSpace(
            "isometry and operand models disagree".into(),
        )),
    }
}

/// Image geodesic, parametrised so that `image(t) = g(geodesic(t))`. All
/// geodesic kinds are anchored at parameter zero, so transporting the anchor
/// and one more point reproduces the parametrisation.
pub fn apply_geodesic(space: &Space, g: &Isometry, geo: &Geodesic) -> Result<Geodesic> {
    let (lo, hi) = geo.domain();
    let t1 = if hi.is_finite() { hi } else { 1.0 };
    let pa = spaces::evaluate(space, geo, 0.0)?;
    let pb = spaces::evaluate(space, geo, t1)?;
    let qa = apply_point(space, g, &pa)?;
    let qb = apply_point(space, g, &pb)?;
    let mut out = spaces::geodesic(space, &qa, &qb, geo.kind)?;
    out.lo = lo;
    out.hi = hi;
    Ok(out)
}

/// Curtains map to curtains of the image geodesic with the same `r`.
pub fn apply_curtain(space: &Space, g: &Isometry, h: &Curtain) -> Result<Curtain> {
    let image = apply_geodesic(space, g, &h.base)?;
    let base = Arc::new(image);
    curtain_at(space, &base, h.r)
}

pub fn apply_chain(space: &Space, g: &Isometry, c: &Chain) -> Result<Chain> {
    let mut curtains = Vec::with_capacity(c.len());
    for h in &c.curtains {
        curtains.push(apply_curtain(space, g, h)?);
    }
    Ok(Chain {
        curtains,
        status: c.status,
        level: c.level,
    })
}

/// Minimal displacement data of a semisimple isometry.
#[derive(Debug, Clone)]
pub struct TranslationData {
    pub length: f64,
    pub axis: Option<Geodesic>,
    pub fixed_point: Option<Point>,
}

/// Orthonormal basis of the kernel of `m` (tolerance `tol`).
fn kernel_basis(m: &M3, tol: f64) -> Vec<V3> {
    let mut basis: Vec<V3> = Vec::new();
    for cand in [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 1.0],
        [1.0, 0.0, 1.0],
    ] {
        let mv = linalg::mat_vec(m, cand);
        if linalg::norm(mv) > tol {
            continue;
        }
        let mut v = cand;
        for b in &basis {
            v = linalg::sub(v, linalg::scale(*b, linalg::dot(v, *b)));
        }
        if linalg::norm(v) > 1e-9 {
            basis.push(linalg::scale(v, 1.0 / linalg::norm(v)));
        }
    }
    basis
}

pub fn translation_data(space: &Space, g: &Isometry, budget: u64) -> Result<TranslationData> {
    validate_isometry(space, g)?;
    match (&space.model, g) {
        (Model::Euclidean { dim }, Isometry::Euclidean { map, translation }) => {
            let mut m = *map;
            for (i, row) in m.iter_mut().enumerate() {
                row[i] -= 1.0;
            }
            let mut fix_dirs = kernel_basis(&m, 1e-9);
            fix_dirs.retain(|v| v.iter().skip(*dim).all(|c| c.abs() < 1e-9));
            let mut v_fix = [0.0; 3];
            for b in &fix_dirs {
                v_fix = linalg::add(v_fix, linalg::scale(*b, linalg::dot(*translation, *b)));
            }
            let v_perp = linalg::sub(*translation, v_fix);
            let x0 = linalg::solve3_least_norm(&m, linalg::scale(v_perp, -1.0), 1e-9)
                .ok_or(Error::NotSemisimpleDetected)?;
            let length = linalg::norm(v_fix);
            if length <= space.eps {
                Ok(TranslationData {
                    length: 0.0,
                    axis: None,
                    fixed_point: Some(Point::Euclidean(x0)),
                })
            } else {
                let a = Point::Euclidean(x0);
                let b = Point::Euclidean(linalg::add(x0, v_fix));
                let axis = spaces::geodesic(space, &a, &b, GeodesicKind::Line)?;
                Ok(TranslationData {
                    length,
                    axis: Some(axis),
                    fixed_point: None,
                })
            }
        }
        (Model::Hyperbolic2, Isometry::Hyperbolic2 { map }) => {
            let tr = linalg::trace(map);
            if tr > 3.0 + 1e-9 {
                let length = ((tr - 1.0) / 2.0).acosh();
                let inv = lorentz_inverse(map);
                let fwd = dominant_null(map, budget.max(64));
                let bwd = dominant_null(&inv, budget.max(64));
                let inner = linalg::mdot(fwd, bwd);
                if inner >= -1e-12 {
                    return Err(Error::NotSemisimpleDetected);
                }
                let bwd = linalg::scale(bwd, -2.0 / inner);
                let p = hyp::renormalise(linalg::scale(linalg::add(fwd, bwd), 0.5));
                let u = linalg::sub(fwd, bwd);
                let u = linalg::scale(u, 1.0 / linalg::mdot(u, u).max(1e-300).sqrt());
                let axis = Geodesic {
                    kind: GeodesicKind::Line,
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                    rep: spaces::Rep::Hyperboloid { base: p, dir: u },
                };
                Ok(TranslationData {
                    length,
                    axis: Some(axis),
                    fixed_point: None,
                })
            } else if tr >= 3.0 - 1e-9 {
                let is_identity = (0..3).all(|i| {
                    (0..3).all(|j| (map[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9)
                });
                if is_identity {
                    Ok(TranslationData {
                        length: 0.0,
                        axis: None,
                        fixed_point: Some(Point::poincare(0.0, 0.0).unwrap()),
                    })
                } else {
                    // Parabolic: the displacement infimum is zero but never
                    // attained.
                    Err(Error::NotSemisimpleDetected)
                }
            } else {
                // Elliptic: fixed point is the timelike eigenvector for 1.
                let mut m = *map;
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] -= 1.0;
                }
                let candidates = [
                    linalg::cross(m[0], m[1]),
                    linalg::cross(m[1], m[2]),
                    linalg::cross(m[0], m[2]),
                ];
                let v = candidates
                    .into_iter()
                    .max_by(|a, b| linalg::norm(*a).total_cmp(&linalg::norm(*b)))
                    .unwrap();
                if linalg::mdot(v, v) >= 0.0 {
                    return Err(Error::NotSemisimpleDetected);
                }
                Ok(TranslationData {
                    length: 0.0,
                    axis: None,
                    fixed_point: Some(Point::Hyperboloid(hyp::renormalise(v))),
                })
            }
        }
        (Model::Tree(t), Isometry::Tree { perm }) => {
            // Finite-tree automorphisms are elliptic: a vertex or an edge
            // midpoint is fixed.
            for v in 0..t.vertex_count() {
                if perm[v] == v {
                    return Ok(TranslationData {
                        length: 0.0,
                        axis: None,
                        fixed_point: Some(Point::Tree(TreePoint::Vertex(v))),
                    });
                }
            }
            for (ei, e) in t.edges().iter().enumerate() {
                if perm[e.u] == e.v && perm[e.v] == e.u {
                    return Ok(TranslationData {
                        length: 0.0,
                        axis: None,
                        fixed_point: Some(Point::Tree(TreePoint::Edge {
                            edge: ei,
                            offset: e.len / 2.0,
                        })),
                    });
                }
            }
            Err(Error::NotSemisimpleDetected)
        }
        (Model::Product(ta, tb), Isometry::Product { swap: false, a, b }) => {
            let fa = translation_data(
                &Space::tree(ta.clone()),
                &Isometry::Tree { perm: a.clone() },
                budget,
            )?;
            let fb = translation_data(
                &Space::tree(tb.clone()),
                &Isometry::Tree { perm: b.clone() },
                budget,
            )?;
            let (Some(Point::Tree(pa)), Some(Point::Tree(pb))) = (fa.fixed_point, fb.fixed_point)
            else {
                return Err(Error::NotSemisimpleDetected);
            };
            Ok(TranslationData {
                length: 0.0,
                axis: None,
                fixed_point: Some(Point::Product(pa, pb)),
            })
        }
        (Model::Product(..), Isometry::Product { swap: true, .. }) => {
            let probes = probe_points(space);
            let mut best: Option<(f64, Point)> = None;
            for p in probes {
                let d = spaces::distance(space, &p, &apply_point(space, g, &p)?)?;
                if best.as_ref().map(|(bd, _)| d < *bd).unwrap_or(true) {
                    best = Some((d, p));
                }
            }
            let (d, p) = best.ok_or(Error::NotSemisimpleDetected)?;
            if d <= space.eps {
                Ok(TranslationData {
                    length: 0.0,
                    axis: None,
                    fixed_point: Some(p),
                })
            } else {
                Err(Error::NotSemisimpleDetected)
            }
        }
        _ => Err(Error::MismatchedSpace(
            "isometry does not act on this model".into(),
        )),
    }
}

fn lorentz_inverse(m: &M3) -> M3 {
    // M^{-1} = J M^T J with J = diag(-1, 1, 1).
    let t = linalg::transpose(m);
    let mut out = t;
    out[0][1] = -t[0][1];
    out[0][2] = -t[0][2];
    out[1][0] = -t[1][0];
    out[2][0] = -t[2][0];
    out
}

fn dominant_null(m: &M3, iterations: u64) -> V3 {
    let mut v = [1.0, 0.6, 0.3];
    for _ in 0..iterations.min(512) {
        v = linalg::mat_vec(m, v);
        let n = linalg::norm(v);
        v = linalg::scale(v, 1.0 / n.max(1e-300));
    }
    let spatial = (v[1] * v[1] + v[2] * v[2]).sqrt();
    [spatial, v[1], v[2]]
}

/// Contraction evidence.
#[derive(Debug, Clone)]
pub enum ContractionCertificate {
    /// A ball disjoint from the geodesic whose projection has the stated
    /// diameter: a lower-bound witness.
    LowerBoundWitness {
        center: Point,
        radius: f64,
        projected_diameter: f64,
    },
    /// Upper bound derived from a frequently-met separated chain.
    UpperBoundFromChain {
        level: u32,
        spacing: f64,
        constant: f64,
    },
}

impl ContractionCertificate {
    pub fn value(&self) -> f64 {
        match self {
            ContractionCertificate::LowerBoundWitness {
                projected_diameter, ..
            } => *projected_diameter,
            ContractionCertificate::UpperBoundFromChain { constant, .. } => *constant,
        }
    }
}

/// Maximises the projected diameter of sampled balls disjoint from `g`.
pub fn contraction_lower_bound(
    space: &Space,
    g: &Geodesic,
    budget: u64,
) -> Result<ContractionCertificate> {
    let (lo, hi) = g.domain();
    let lo_f = if lo.is_finite() { lo } else { -40.0 };
    let hi_f = if hi.is_finite() { hi } else { 40.0 };
    let mid = 0.5 * (lo_f + hi_f);
    let probes = ball_probe_configs(space, g, mid, budget)?;
    let mut best: Option<(f64, Point, f64)> = None;
    for (center, radius) in probes {
        let d_to_g = spaces::project(space, &center, g)?.dist;
        if d_to_g <= radius {
            continue;
        }
        let diam = projected_ball_diameter(space, g, &center, radius, budget)?;
        if best.as_ref().map(|(b, _, _)| diam > *b).unwrap_or(true) {
            best = Some((diam, center, radius));
        }
    }
    let (diam, center, radius) = best.ok_or_else(|| {
        Error::PreconditionViolated("no admissible ball configuration sampled".into())
    })?;
    Ok(ContractionCertificate::LowerBoundWitness {
        center,
        radius,
        projected_diameter: diam,
    })
}

/// Deterministic ball configurations: centers pushed off the geodesic at a
/// range of heights, radii just under the clearance.
fn ball_probe_configs(
    space: &Space,
    g: &Geodesic,
    mid: f64,
    budget: u64,
) -> Result<Vec<(Point, f64)>> {
    let mut out = Vec::new();
    match &space.model {
        Model::Euclidean { .. } => {
            let base = spaces::evaluate(space, g, mid)?;
            let next = spaces::evaluate(space, g, mid + 1.0)?;
            let Point::Euclidean(b) = base else { unreachable!() };
            let Point::Euclidean(b1) = next else { unreachable!() };
            let d = linalg::sub(b1, b);
            let w = {
                let cand = if d[0].abs() < 0.9 {
                    [1.0, 0.0, 0.0]
                } else {
                    [0.0, 1.0, 0.0]
                };
                let p = linalg::sub(cand, linalg::scale(d, linalg::dot(cand, d)));
                linalg::scale(p, 1.0 / linalg::norm(p))
            };
            for s in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
                out.push((
                    Point::Euclidean(linalg::add(b, linalg::scale(w, s))),
                    s - 0.01,
                ));
            }
        }
        Model::Hyperbolic2 => {
            let (p, u) = g
                .hyperboloid_frame()
                .ok_or_else(|| Error::MismatchedSpace("hyperbolic geodesic expected".into()))?;
            let (q, n) = hyp::perpendicular_at(p, u, mid);
            let mut heights = vec![1.0, 2.0, 3.0, 5.0, 8.0, 12.0];
            if budget > 512 {
                heights.extend([16.0, 20.0]);
            }
            for s in heights {
                let center = Point::Hyperboloid(hyp::renormalise(hyp::evaluate(q, n, s)));
                out.push((center, s - 0.01));
            }
        }
        Model::Tree(t) => {
            for v in 0..t.vertex_count() {
                let center = Point::Tree(TreePoint::Vertex(v));
                let d = spaces::project(space, &center, g)?.dist;
                if d > 0.1 {
                    out.push((center, d * 0.9));
                }
            }
        }
        Model::Product(ta, tb) => {
            for va in 0..ta.vertex_count() {
                for vb in 0..tb.vertex_count() {
                    let center = Point::Product(TreePoint::Vertex(va), TreePoint::Vertex(vb));
                    let d = spaces::project(space, &center, g)?.dist;
                    if d > 0.1 {
                        out.push((center, d * 0.9));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Spread of the projection parameters over sampled points of the ball.
fn projected_ball_diameter(
    space: &Space,
    g: &Geodesic,
    center: &Point,
    radius: f64,
    budget: u64,
) -> Result<f64> {
    let n = (budget.clamp(64, 4096)) as usize;
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut push = |t: f64| {
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    };
    match (&space.model, center) {
        (Model::Euclidean { dim }, Point::Euclidean(c)) => {
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let mut q = *c;
                q[0] += radius * theta.cos();
                if *dim >= 2 {
                    q[1] += radius * theta.sin();
                }
                let p = Point::Euclidean(q);
                if spaces::distance(space, center, &p)? <= radius + 1e-12 {
                    push(spaces::project(space, &p, g)?.t);
                }
            }
        }
        (Model::Hyperbolic2, Point::Hyperboloid(_)) => {
            // Work in the frame adapted to the foot of the center: with the
            // center at height s over the geodesic, the boundary circle of
            // radius R projects to
            //   t0 + atanh(sin(theta) sinh R / (cosh s cosh R + cos(theta) sinh s sinh R)),
            // which avoids the cancellations of global coordinates.
            let proj = spaces::project(space, center, g)?;
            let s = proj.dist;
            let (shr, chr) = (radius.sinh(), radius.cosh());
            let (shs, chs) = (s.sinh(), s.cosh());
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let denom = chs * chr + theta.cos() * shs * shr;
                let ratio = theta.sin() * shr / denom;
                if ratio.abs() < 1.0 {
                    push(proj.t + ratio.atanh());
                }
            }
        }
        _ => {
            // Trees and products: probe along geodesics toward a fixed cloud.
            for target in probe_points(space) {
                let d = spaces::distance(space, center, &target)?;
                if d <= space.eps {
                    push(spaces::project(space, center, g)?.t);
                    continue;
                }
                let seg = spaces::geodesic(space, center, &target, GeodesicKind::Segment)?;
                let q = spaces::evaluate(space, &seg, d.min(radius * 0.999))?;
                push(spaces::project(space, &q, g)?.t);
            }
        }
    }
    if t_min.is_finite() && t_max.is_finite() {
        Ok(t_max - t_min)
    } else {
        Ok(0.0)
    }
}

/// Derived contraction constant of hyperbolic-plane geodesics, measured once
/// by the ball oracle and stored with its probe budgets.
pub struct DerivedContractionConstant {
    pub value: f64,
    pub budget_low: u64,
    pub budget_high: u64,
    pub stable: bool,
}

static HYPERBOLIC_CONTRACTION: Lazy<DerivedContractionConstant> = Lazy::new(|| {
    let space = Space::hyperbolic2();
    // Base the probe geodesic at the coordinate origin so the sampled ball
    // configurations stay well inside f64 range.
    let a = Point::poincare(0.0, 0.0).unwrap();
    let b = Point::poincare(0.5, 0.0).unwrap();
    let g = spaces::geodesic(&space, &a, &b, GeodesicKind::Line).unwrap();
    let budget_low = 512;
    let budget_high = 2048;
    let low = contraction_lower_bound(&space, &g, budget_low)
        .map(|c| c.value())
        .unwrap_or(0.0);
    let high = contraction_lower_bound(&space, &g, budget_high)
        .map(|c| c.value())
        .unwrap_or(0.0);
    DerivedContractionConstant {
        value: low.max(high),
        budget_low,
        budget_high,
        stable: (high - low).abs() <= 0.05 * high.max(1e-9),
    }
});

pub fn hyperbolic_contraction_data() -> &'static DerivedContractionConstant {
    &HYPERBOLIC_CONTRACTION
}

/// The stored constant itself.
pub fn hyperbolic_contraction_constant() -> f64 {
    HYPERBOLIC_CONTRACTION.value
}

/// Chain of curtains dual to a contracting geodesic at pole spacing `8 D`,
/// recorded at level `10 D + 3`.
pub fn chain_from_contracting(space: &Space, g: &Arc<Geodesic>, d: f64) -> Result<Chain> {
    if d <= 0.0 {
        return Err(Error::PreconditionViolated(
            "contraction constant must be positive".into(),
        ));
    }
    let (lo, hi) = g.domain();
    let spacing = 8.0 * d;
    let mut curtains = Vec::new();
    let i_min = if lo.is_finite() {
        ((lo + 0.5 + 1e-9) / spacing).ceil() as i64
    } else {
        -((1e4 / spacing) as i64)
    };
    let i_max = if hi.is_finite() {
        ((hi - 0.5 - 1e-9) / spacing).floor() as i64
    } else {
        (1e4 / spacing) as i64
    };
    for i in i_min..=i_max {
        let r = spacing * i as f64;
        if r - 0.5 > lo && r + 0.5 < hi {
            curtains.push(curtain_at(space, g, r)?);
        }
    }
    if curtains.len() < 2 {
        return Err(Error::GeodesicTooShort);
    }
    Ok(Chain {
        curtains,
        status: ChainStatus::DualDisjointPoles,
        level: Some((10.0 * d + 3.0).ceil() as u32),
    })
}

/// Upper-bound contraction certificate from a verified chain met at the
/// given parameters along its common base line. Chains not dual to a common
/// line are first replaced by a dual chain at spacing `4 T (L + 3)`.
pub fn contraction_from_chain(
    space: &Space,
    c: &Chain,
    crossings: &[f64],
) -> Result<ContractionCertificate> {
    if c.len() < 2 {
        return Err(Error::ChainTooShort {
            need: 2,
            got: c.len(),
        });
    }
    if crossings.len() != c.len() {
        return Err(Error::FrequencyViolated(format!(
            "{} crossings for {} curtains",
            crossings.len(),
            c.len()
        )));
    }
    let mut spacing: f64 = 0.0;
    for w in crossings.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            return Err(Error::FrequencyViolated(
                "crossing parameters must be strictly increasing".into(),
            ));
        }
        spacing = spacing.max(dt);
    }
    let t = spacing.max(1.0);
    let level = c
        .level
        .ok_or_else(|| Error::PreconditionViolated("chain carries no separation level".into()))?;
    crate::curtains::verify_chain(space, c, None)?;
    if crate::curtains::common_base_intervals(space, &c.curtains).is_none() {
        // Replace by a dual chain along the segment joining the extreme pole
        // midpoints, at the guaranteed spacing.
        let start = c.curtains[0].pole_midpoint(space)?;
        let end = c.curtains[c.len() - 1].pole_midpoint(space)?;
        let gamma = Arc::new(spaces::geodesic(space, &start, &end, GeodesicKind::Segment)?);
        let dual_spacing = 4.0 * t * (level as f64 + 3.0);
        let mut r = 0.5 + 1e-6;
        let mut replaced = 0usize;
        while r + 0.5 < gamma.length() {
            curtain_at(space, &gamma, r)?;
            replaced += 1;
            r += dual_spacing;
        }
        if replaced < 1 {
            return Err(Error::ChainTooShort { need: 1, got: 0 });
        }
    }
    let constant = 16.0 * t * (level as f64 + 3.0) + 3.0;
    Ok(ContractionCertificate::UpperBoundFromChain {
        level,
        spacing: t,
        constant,
    })
}

/// Smallest `m <= m_max` such that `g^m h1^+` nests strictly inside `h2^+`
/// which nests strictly inside `h1^+` (either orientation), or `None`.
pub fn skewer_check(
    space: &Space,
    g: &Isometry,
    h1: &Curtain,
    h2: &Curtain,
    m_max: usize,
) -> Result<Option<usize>> {
    let mut moved = h1.clone();
    for m in 1..=m_max {
        moved = apply_curtain(space, g, &moved)?;
        for orientation in [Side::Plus, Side::Minus] {
            let inner_ok = halfspace_strictly_inside(space, &moved, orientation, h2, orientation);
            let outer_ok = halfspace_strictly_inside(space, h2, orientation, h1, orientation);
            if inner_ok && outer_ok {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

/// Certifies that the `inner_side` halfspace of `inner` is strictly
/// contained in the `outer_side` halfspace of `outer`.
fn halfspace_strictly_inside(
    space: &Space,
    inner: &Curtain,
    inner_side: Side,
    outer: &Curtain,
    outer_side: Side,
) -> bool {
    let Some(img) = halfspace_param_image(space, outer, inner, inner_side) else {
        return false;
    };
    let (lo, hi) = outer.pole_interval();
    match outer_side {
        Side::Plus => img.lo > hi + space.eps,
        Side::Minus => img.hi < lo - space.eps,
        Side::On => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_translation_data() {
        let s = Space::euclidean(2).unwrap();
        let g = Isometry::euclidean_translation(&[3.0, 0.0]);
        let td = translation_data(&s, &g, 64).unwrap();
        assert!((td.length - 3.0).abs() < 1e-9);
        assert!(td.axis.is_some());
    }

    #[test]
    fn euclidean_rotation_fixed_point() {
        let s = Space::euclidean(2).unwrap();
        let g = Isometry::euclidean_rotation_2d(std::f64::consts::FRAC_PI_2);
        let td = translation_data(&s, &g, 64).unwrap();
        assert!(td.length.abs() < 1e-9);
        assert!(td.fixed_point.is_some());
    }

    #[test]
    fn hyperbolic_boost_recovers_length_and_axis() {
        let s = Space::hyperbolic2();
        let g = Isometry::hyperbolic_boost_x(2.0);
        let td = translation_data(&s, &g, 256).unwrap();
        assert!((td.length - 2.0).abs() < 1e-6);
        let axis = td.axis.unwrap();
        let origin = Point::poincare(0.0, 0.0).unwrap();
        let proj = spaces::project(&s, &origin, &axis).unwrap();
        assert!(proj.dist < 1e-6);
        let moved = apply_point(&s, &g, &origin).unwrap();
        assert!((spaces::distance(&s, &origin, &moved).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn translation_applied_to_pole() {
        let s = Space::euclidean(1).unwrap();
        let g = spaces::geodesic(
            &s,
            &Point::euclidean(&[0.0]),
            &Point::euclidean(&[1.0]),
            GeodesicKind::Line,
        )
        .unwrap();
        let base = Arc::new(g);
        let h = curtain_at(&s, &base, 0.0).unwrap();
        let iso = Isometry::euclidean_translation(&[3.0]);
        let img = apply_curtain(&s, &iso, &h).unwrap();
        assert_eq!(img.pole_start, Point::euclidean(&[2.5]));
        assert_eq!(img.pole_end, Point::euclidean(&[3.5]));
    }

    #[test]
    fn tripod_leg_swap() {
        let t = crate::geom::tree::MetricTree::from_edges(&[
            ("o".into(), "a".into(), 2.0),
            ("o".into(), "b".into(), 2.0),
            ("o".into(), "c".into(), 2.0),
        ])
        .unwrap();
        let id = |n: &str| t.vertex_id(n).unwrap();
        let mut perm = vec![0; 4];
        perm[id("o")] = id("o");
        perm[id("a")] = id("b");
        perm[id("b")] = id("a");
        perm[id("c")] = id("c");
        let s = Space::tree(t.clone());
        let iso = Isometry::Tree { perm };
        let a = Point::Tree(TreePoint::Vertex(id("a")));
        let b = Point::Tree(TreePoint::Vertex(id("b")));
        assert_eq!(apply_point(&s, &iso, &a).unwrap(), b);
        let td = translation_data(&s, &iso, 64).unwrap();
        assert_eq!(td.length, 0.0);
    }

    #[test]
    fn tree_geodesics_have_zero_contraction() {
        let t = crate::geom::tree::MetricTree::from_edges(&[
            ("o".into(), "a".into(), 2.0),
            ("o".into(), "b".into(), 2.0),
            ("o".into(), "c".into(), 2.0),
        ])
        .unwrap();
        let id = |n: &str| t.vertex_id(n).unwrap();
        let a = Point::Tree(TreePoint::Vertex(id("a")));
        let b = Point::Tree(TreePoint::Vertex(id("b")));
        let s = Space::tree(t);
        let g = spaces::geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap();
        let cert = contraction_lower_bound(&s, &g, 128).unwrap();
        assert!(cert.value() < 1e-9);
    }

    #[test]
    fn euclidean_lines_are_not_contracting() {
        let s = Space::euclidean(2).unwrap();
        let g = spaces::geodesic(
            &s,
            &Point::euclidean(&[0.0, 0.0]),
            &Point::euclidean(&[1.0, 0.0]),
            GeodesicKind::Line,
        )
        .unwrap();
        let cert = contraction_lower_bound(&s, &g, 256).unwrap();
        assert!(cert.value() > 10.0);
    }

    #[test]
    fn hyperbolic_contraction_constant_is_stable() {
        let data = hyperbolic_contraction_data();
        assert!(data.value > 1.0 && data.value < 2.5, "D = {}", data.value);
        assert!(data.stable);
    }

    #[test]
    fn skewer_translation_on_line() {
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
        let h1 = curtain_at(&s, &g, 0.0).unwrap();
        let h2 = curtain_at(&s, &g, 1.5).unwrap();
        let iso = Isometry::euclidean_translation(&[3.0]);
        assert_eq!(skewer_check(&s, &iso, &h1, &h2, 4).unwrap(), Some(1));

        let rot = Isometry::euclidean_rotation_2d(std::f64::consts::FRAC_PI_2);
        let s2 = Space::euclidean(2).unwrap();
        let g2 = Arc::new(
            spaces::geodesic(
                &s2,
                &Point::euclidean(&[0.0, 0.0]),
                &Point::euclidean(&[1.0, 0.0]),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let k1 = curtain_at(&s2, &g2, 0.0).unwrap();
        let k2 = curtain_at(&s2, &g2, 1.5).unwrap();
        assert_eq!(skewer_check(&s2, &rot, &k1, &k2, 4).unwrap(), None);
    }

    #[test]
    fn hyperbolic_boost_skewers_axis_curtains() {
        let s = Space::hyperbolic2();
        let g = Isometry::hyperbolic_boost_x(3.0);
        let td = translation_data(&s, &g, 256).unwrap();
        let axis = Arc::new(td.axis.unwrap());
        let h1 = curtain_at(&s, &axis, 0.0).unwrap();
        let h2 = curtain_at(&s, &axis, 2.0).unwrap();
        assert_eq!(skewer_check(&s, &g, &h1, &h2, 4).unwrap(), Some(1));
    }
}
