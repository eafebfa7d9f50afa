//! Deciding how curtains interact: meeting, disjointness, L-separation.
//!
//! The workhorse is the image of the projection parameter of one curtain's
//! base line over another curtain. On a common base line this is interval
//! arithmetic; Euclidean slabs reduce to 1-D; hyperbolic bands are handled
//! exactly through their ideal endpoints; trees through per-edge
//! piecewise-linear gate functions. Products are searched within budget and
//! may come back `Unknown` — three-valued verdicts are values, never
//! silently coerced.

use super::{curtain_at, side, Chain, ChainStatus, Curtain, Side, POLE_HALF};
use crate::error::{Error, Result};
use crate::geom::hyperboloid as hyp;
use crate::geom::linalg::{self, V3};
use crate::geom::tree::{MetricTree, TreePath, TreePoint};
use crate::spaces::{self, Geodesic, GeodesicKind, Model, ParamMap, Point, Space};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Outcome of the pairwise meeting test.
#[derive(Debug, Clone)]
pub enum MeetResult {
    /// Witness point lying on both curtains.
    Meets(Point),
    /// Certified disjointness with the separating gap along the deciding axis.
    Disjoint { gap: f64, method: &'static str },
    Unknown,
}

impl MeetResult {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, MeetResult::Disjoint { .. })
    }
    pub fn is_meets(&self) -> bool {
        matches!(self, MeetResult::Meets(_))
    }
}

/// Machine-checkable evidence that every chain meeting both curtains has at
/// most `level` elements.
#[derive(Debug, Clone)]
pub struct SeparatedCertificate {
    pub level: f64,
    pub method: &'static str,
    pub gap: f64,
}

/// Three-valued separation verdict.
#[derive(Debug, Clone)]
pub enum SeparationVerdict {
    Separated(SeparatedCertificate),
    /// A verified chain of `L + 1` curtains, each meeting both inputs.
    NotSeparated(Chain),
    Unknown { budget_spent: u64 },
}

impl SeparationVerdict {
    pub fn is_separated(&self) -> bool {
        matches!(self, SeparationVerdict::Separated(_))
    }
}

use super::base_map;

fn map_interval(map: &ParamMap, (a, b): (f64, f64)) -> (f64, f64) {
    let x = map.apply(a);
    let y = map.apply(b);
    (x.min(y), x.max(y))
}

/// Interval image of a projection parameter over a region, with attainment
/// flags for the ends (ideal limits are not attained).
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamImage {
    pub lo: f64,
    pub hi: f64,
    pub lo_attained: bool,
    pub hi_attained: bool,
}

/// Image of the projection parameter of `target.base` over the curtain
/// `region`. `None` when the pair is not decidable in closed form.
pub(crate) fn curtain_param_image(
    space: &Space,
    target: &Curtain,
    region: &Curtain,
) -> Option<ParamImage> {
    if let Some(map) = base_map(space, &target.base, &region.base) {
        let (lo, hi) = map_interval(&map, region.pole_interval());
        return Some(ParamImage {
            lo,
            hi,
            lo_attained: true,
            hi_attained: true,
        });
    }
    match &space.model {
        Model::Euclidean { .. } => {
            let (tb, td) = target.base.euclidean_frame()?;
            let (rb, rd) = region.base.euclidean_frame()?;
            euclidean_slab_image(tb, td, rb, rd, region.pole_interval())
        }
        Model::Hyperbolic2 => {
            let tf = target.base.hyperboloid_frame()?;
            let rf = region.base.hyperboloid_frame()?;
            Some(hyperbolic_band_image(tf, rf, region.pole_interval()))
        }
        Model::Tree(tree) => {
            let tp = target.base.tree_path()?;
            let rp = region.base.tree_path()?;
            let (lo, hi, _, _) =
                tree_image_under_constraint(tree, tp, rp, region.pole_interval())?;
            Some(ParamImage {
                lo,
                hi,
                lo_attained: true,
                hi_attained: true,
            })
        }
        Model::Product(..) => None,
    }
}

/// Image of the target parameter over one halfspace of `region`.
pub(crate) fn halfspace_param_image(
    space: &Space,
    target: &Curtain,
    region: &Curtain,
    region_side: Side,
) -> Option<ParamImage> {
    let (pole_lo, pole_hi) = region.pole_interval();
    let half: (f64, f64) = match region_side {
        Side::Minus => (f64::NEG_INFINITY, pole_lo),
        Side::Plus => (pole_hi, f64::INFINITY),
        Side::On => (pole_lo, pole_hi),
    };
    if let Some(map) = base_map(space, &target.base, &region.base) {
        let (lo, hi) = map_interval(&map, half);
        return Some(ParamImage {
            lo,
            hi,
            lo_attained: lo.is_finite(),
            hi_attained: hi.is_finite(),
        });
    }
    match &space.model {
        Model::Euclidean { .. } => {
            let (tb, td) = target.base.euclidean_frame()?;
            let (rb, rd) = region.base.euclidean_frame()?;
            euclidean_slab_image(tb, td, rb, rd, half)
        }
        Model::Hyperbolic2 => {
            let tf = target.base.hyperboloid_frame()?;
            let rf = region.base.hyperboloid_frame()?;
            Some(hyperbolic_halfplane_image(tf, rf, half, region_side))
        }
        Model::Tree(tree) => {
            let tp = target.base.tree_path()?;
            let rp = region.base.tree_path()?;
            let (lo, hi, _, _) = tree_image_under_constraint(tree, tp, rp, half)?;
            Some(ParamImage {
                lo,
                hi,
                lo_attained: true,
                hi_attained: true,
            })
        }
        Model::Product(..) => None,
    }
}

/// Image of a Euclidean slab (region with direction `rd`, absolute interval
/// taken from `interval` in `rb`-based parameters) under the parameter of
/// the target line `(tb, td)`.
fn euclidean_slab_image(
    tb: V3,
    td: V3,
    rb: V3,
    rd: V3,
    interval: (f64, f64),
) -> Option<ParamImage> {
    let align = linalg::dot(td, rd);
    if align.abs() < 1.0 - 1e-9 {
        // Skew slabs sweep the whole target axis.
        return Some(ParamImage {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_attained: false,
            hi_attained: false,
        });
    }
    let shift = linalg::dot(linalg::sub(rb, tb), td);
    let sigma = align.signum();
    let a = shift + sigma * interval.0;
    let b = shift + sigma * interval.1;
    Some(ParamImage {
        lo: a.min(b),
        hi: a.max(b),
        lo_attained: a.min(b).is_finite(),
        hi_attained: a.max(b).is_finite(),
    })
}

/// Exact image of a hyperbolic band over the target parameter, computed from
/// the ideal endpoints of the band's boundary fibers.
fn hyperbolic_band_image(
    (tp, tu): (V3, V3),
    (rp, ru): (V3, V3),
    pole: (f64, f64),
) -> ParamImage {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in [pole.0, pole.1] {
        let (q, w) = hyp::perpendicular_at(rp, ru, c);
        let (xi_a, xi_b) = hyp::ideal_endpoints(q, w);
        for xi in [xi_a, xi_b] {
            let t = hyp::ideal_parameter(tp, tu, xi);
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    // If an ideal endpoint of the target line lies in the band's closure at
    // infinity, the image is unbounded on that side.
    let (fwd, bwd) = hyp::ideal_endpoints(tp, tu);
    let t_fwd = hyp::ideal_parameter(rp, ru, fwd);
    if t_fwd >= pole.0 - 1e-12 && t_fwd <= pole.1 + 1e-12 {
        hi = f64::INFINITY;
    }
    let t_bwd = hyp::ideal_parameter(rp, ru, bwd);
    if t_bwd >= pole.0 - 1e-12 && t_bwd <= pole.1 + 1e-12 {
        lo = f64::NEG_INFINITY;
    }
    ParamImage {
        lo,
        hi,
        lo_attained: false,
        hi_attained: false,
    }
}

/// Image of a hyperbolic halfplane (one side of a band) over the target
/// parameter.
fn hyperbolic_halfplane_image(
    (tp, tu): (V3, V3),
    (rp, ru): (V3, V3),
    half: (f64, f64),
    region_side: Side,
) -> ParamImage {
    let boundary = match region_side {
        Side::Minus => half.1,
        Side::Plus => half.0,
        Side::On => half.0,
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let (q, w) = hyp::perpendicular_at(rp, ru, boundary);
    let (xi_a, xi_b) = hyp::ideal_endpoints(q, w);
    for xi in [xi_a, xi_b] {
        let t = hyp::ideal_parameter(tp, tu, xi);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let (fwd, bwd) = hyp::ideal_endpoints(tp, tu);
    for (xi, unbounded_hi) in [(fwd, true), (bwd, false)] {
        let t_r = hyp::ideal_parameter(rp, ru, xi);
        let inside = match region_side {
            Side::Minus => t_r <= half.1 + 1e-12,
            Side::Plus => t_r >= half.0 - 1e-12,
            Side::On => t_r >= half.0 - 1e-12 && t_r <= half.1 + 1e-12,
        };
        if inside {
            if unbounded_hi {
                hi = f64::INFINITY;
            } else {
                lo = f64::NEG_INFINITY;
            }
        }
    }
    ParamImage {
        lo,
        hi,
        lo_attained: false,
        hi_attained: false,
    }
}

/// Extremes of the gate parameter onto `target_path` over the subset of the
/// tree where the gate onto `region_path` lies in `constraint`. Returns
/// `(lo, hi, lo_witness, hi_witness)`.
fn tree_image_under_constraint(
    tree: &MetricTree,
    target_path: &TreePath,
    region_path: &TreePath,
    constraint: (f64, f64),
) -> Option<(f64, f64, TreePoint, TreePoint)> {
    let mut best: Option<(f64, f64, TreePoint, TreePoint)> = None;
    let mut consider = |value: f64, point: TreePoint| match &mut best {
        None => best = Some((value, value, point, point)),
        Some((lo, hi, lo_w, hi_w)) => {
            if value < *lo {
                *lo = value;
                *lo_w = point;
            }
            if value > *hi {
                *hi = value;
                *hi_w = point;
            }
        }
    };
    for edge in 0..tree.edges().len() {
        let mut breaks = tree.gate_breakpoints_on_edge(region_path, edge);
        breaks.extend(tree.gate_breakpoints_on_edge(target_path, edge));
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for w in breaks.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            if s1 - s0 < 1e-12 {
                continue;
            }
            let r0 = tree.gate_at_edge_offset(region_path, edge, s0);
            let r1 = tree.gate_at_edge_offset(region_path, edge, s1);
            let t0 = tree.gate_at_edge_offset(target_path, edge, s0);
            let t1 = tree.gate_at_edge_offset(target_path, edge, s1);
            // Both gates are affine in s on this piece. Clip to the region
            // constraint in u-space (u in [0,1] along the piece).
            let Some((ua, ub)) = affine_preimage(r0, r1, constraint) else {
                continue;
            };
            for u in [ua, ub] {
                let s = s0 + u * (s1 - s0);
                let value = t0 + u * (t1 - t0);
                let point = tree
                    .canonical(TreePoint::Edge { edge, offset: s })
                    .expect("offset within edge");
                consider(value, point);
            }
        }
    }
    best
}

/// `u`-interval in `[0, 1]` where the affine map `u -> v0 + u (v1 - v0)`
/// lands in `[c.0, c.1]`.
fn affine_preimage(v0: f64, v1: f64, c: (f64, f64)) -> Option<(f64, f64)> {
    let lo = c.0;
    let hi = c.1;
    if (v1 - v0).abs() < 1e-12 {
        return if v0 >= lo - 1e-12 && v0 <= hi + 1e-12 {
            Some((0.0, 1.0))
        } else {
            None
        };
    }
    let t_lo = (lo - v0) / (v1 - v0);
    let t_hi = (hi - v0) / (v1 - v0);
    let (a, b) = (t_lo.min(t_hi), t_lo.max(t_hi));
    let (a, b) = (a.max(0.0), b.min(1.0));
    if a <= b {
        Some((a, b))
    } else {
        None
    }
}

fn interval_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.1.min(b.1) - a.0.max(b.0)
}

/// Pairwise meeting test: a witness point for `Meets`, an exact certificate
/// for `Disjoint` where the model admits one, `Unknown` otherwise.
pub fn meets(space: &Space, h: &Curtain, k: &Curtain, budget: u64) -> Result<MeetResult> {
    // Common base line: pole interval arithmetic with an on-line witness.
    if let Some(map) = base_map(space, &h.base, &k.base) {
        let hk = map_interval(&map, k.pole_interval());
        let hh = h.pole_interval();
        let overlap = interval_overlap(hh, hk);
        if overlap >= -space.eps {
            let c = 0.5 * (hh.0.max(hk.0) + hh.1.min(hk.1));
            let witness = spaces::evaluate(space, &h.base, c.clamp(hh.0, hh.1))?;
            return Ok(MeetResult::Meets(witness));
        }
        return Ok(MeetResult::Disjoint {
            gap: -overlap,
            method: "pole-intervals",
        });
    }
    match &space.model {
        Model::Euclidean { dim } => {
            let (hb, hd) = h.base.euclidean_frame().unwrap();
            let (kb, kd) = k.base.euclidean_frame().unwrap();
            let align = linalg::dot(hd, kd);
            if align.abs() >= 1.0 - 1e-9 {
                // Parallel slabs on distinct lines: compare absolute axis
                // intervals.
                let img = euclidean_slab_image(hb, hd, kb, kd, k.pole_interval()).unwrap();
                let overlap = interval_overlap(h.pole_interval(), (img.lo, img.hi));
                if overlap >= -space.eps {
                    // Witness: point of h's base line at a common parameter.
                    let c = 0.5
                        * (h.pole_interval().0.max(img.lo) + h.pole_interval().1.min(img.hi));
                    let p = Point::Euclidean(linalg::add(hb, linalg::scale(hd, c)));
                    return Ok(MeetResult::Meets(p));
                }
                return Ok(MeetResult::Disjoint {
                    gap: -overlap,
                    method: "parallel-slabs",
                });
            }
            // Skew slabs always intersect in dimension >= 2.
            debug_assert!(*dim >= 2);
            let mh = linalg::dot(hb, hd) + h.r;
            let mk = linalg::dot(kb, kd) + k.r;
            let g = linalg::dot(hd, kd);
            // x = a hd + b kd with <x,hd> = mh, <x,kd> = mk.
            if let Some((a, b)) = linalg::solve2(1.0, g, g, 1.0, mh, mk) {
                let x = linalg::add(linalg::scale(hd, a), linalg::scale(kd, b));
                let p = Point::Euclidean(x);
                if side(space, h, &p)? == Side::On && side(space, k, &p)? == Side::On {
                    return Ok(MeetResult::Meets(p));
                }
            }
            Ok(MeetResult::Unknown)
        }
        Model::Hyperbolic2 => {
            let tf = h.base.hyperboloid_frame().unwrap();
            let rf = k.base.hyperboloid_frame().unwrap();
            let img = hyperbolic_band_image(tf, rf, k.pole_interval());
            let hh = h.pole_interval();
            let overlap = interval_overlap(hh, (img.lo, img.hi));
            if overlap < -space.eps {
                return Ok(MeetResult::Disjoint {
                    gap: -overlap,
                    method: "band-image",
                });
            }
            let closed_ends = img.lo_attained && img.hi_attained;
            if overlap <= space.eps && !closed_ends {
                // Touching only in the ideal limit: not decidable at
                // tolerance, and not attained by any finite point.
                return Ok(MeetResult::Unknown);
            }
            // Interior overlap: find a witness on the fiber of h at a common
            // parameter.
            let c = 0.5 * (hh.0.max(img.lo) + hh.1.min(img.hi));
            let fiber = hyp::perpendicular_at(tf.0, tf.1, c);
            let (xi_a, xi_b) = hyp::ideal_endpoints(fiber.0, fiber.1);
            let la = hyp::ideal_parameter(rf.0, rf.1, xi_a);
            let lb = hyp::ideal_parameter(rf.0, rf.1, xi_b);
            let range = (la.min(lb), la.max(lb));
            let kk = k.pole_interval();
            let target_lo = kk.0.max(range.0);
            let target_hi = kk.1.min(range.1);
            if target_hi - target_lo > -space.eps {
                let target = 0.5 * (target_lo + target_hi);
                if let Some(s) =
                    hyp::solve_parameter_along(rf.0, rf.1, fiber.0, fiber.1, target)
                {
                    let z = hyp::renormalise(hyp::evaluate(fiber.0, fiber.1, s));
                    let p = Point::Hyperboloid(z);
                    if side(space, h, &p)? == Side::On && side(space, k, &p)? == Side::On {
                        return Ok(MeetResult::Meets(p));
                    }
                }
            }
            Ok(MeetResult::Unknown)
        }
        Model::Tree(tree) => {
            let hp = h.base.tree_path().unwrap();
            let kp = k.base.tree_path().unwrap();
            if let Some(p) = tree_joint_point(tree, hp, h.pole_interval(), kp, k.pole_interval())
            {
                return Ok(MeetResult::Meets(Point::Tree(p)));
            }
            // Gap between the carrying subtrees: distance between the gate
            // preimages, for the certificate record.
            let img = tree_image_under_constraint(tree, hp, kp, k.pole_interval());
            let gap = img
                .map(|(lo, hi, _, _)| {
                    let hh = h.pole_interval();
                    (-interval_overlap(hh, (lo, hi))).max(0.0)
                })
                .unwrap_or(f64::INFINITY);
            Ok(MeetResult::Disjoint {
                gap,
                method: "tree-gates",
            })
        }
        Model::Product(..) => {
            // Sampled feasibility search within budget.
            let samples = budget.clamp(8, 4096) as usize;
            if let Some(p) = product_meet_search(space, h, k, samples)? {
                return Ok(MeetResult::Meets(p));
            }
            Ok(MeetResult::Unknown)
        }
    }
}

/// Point of the tree where the gates onto both paths land in the respective
/// intervals, if one exists. Exact per-edge piecewise-linear solve.
fn tree_joint_point(
    tree: &MetricTree,
    path1: &TreePath,
    i1: (f64, f64),
    path2: &TreePath,
    i2: (f64, f64),
) -> Option<TreePoint> {
    for edge in 0..tree.edges().len() {
        let mut breaks = tree.gate_breakpoints_on_edge(path1, edge);
        breaks.extend(tree.gate_breakpoints_on_edge(path2, edge));
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for w in breaks.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let g1 = (
                tree.gate_at_edge_offset(path1, edge, s0),
                tree.gate_at_edge_offset(path1, edge, s1),
            );
            let g2 = (
                tree.gate_at_edge_offset(path2, edge, s0),
                tree.gate_at_edge_offset(path2, edge, s1),
            );
            let Some((a1, b1)) = affine_preimage(g1.0, g1.1, i1) else {
                continue;
            };
            let Some((a2, b2)) = affine_preimage(g2.0, g2.1, i2) else {
                continue;
            };
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                let s = s0 + 0.5 * (lo + hi) * (s1 - s0);
                return Some(
                    tree.canonical(TreePoint::Edge { edge, offset: s })
                        .expect("offset within edge"),
                );
            }
        }
    }
    None
}

/// Seeded deterministic search for a point on both product curtains.
fn product_meet_search(
    space: &Space,
    h: &Curtain,
    k: &Curtain,
    samples: usize,
) -> Result<Option<Point>> {
    let Model::Product(ta, tb) = &space.model else {
        return Ok(None);
    };
    let mut candidates: Vec<Point> = Vec::new();
    // Structured grid: vertex pairs and pole-adjacent points.
    for va in 0..ta.vertex_count() {
        for vb in 0..tb.vertex_count() {
            candidates.push(Point::Product(TreePoint::Vertex(va), TreePoint::Vertex(vb)));
        }
    }
    candidates.push(h.pole_midpoint(space)?);
    candidates.push(k.pole_midpoint(space)?);
    // Edge-interior refinements of the best structured candidates.
    for ea in 0..ta.edges().len() {
        for eb in 0..tb.edges().len() {
            let la = ta.edges()[ea].len;
            let lb = tb.edges()[eb].len;
            let per = ((samples / (ta.edges().len() * tb.edges().len()).max(1)).max(1) as f64)
                .sqrt()
                .ceil() as usize;
            for i in 1..=per {
                for j in 1..=per {
                    let oa = la * i as f64 / (per + 1) as f64;
                    let ob = lb * j as f64 / (per + 1) as f64;
                    candidates.push(Point::Product(
                        ta.canonical(TreePoint::Edge { edge: ea, offset: oa }).unwrap(),
                        tb.canonical(TreePoint::Edge { edge: eb, offset: ob }).unwrap(),
                    ));
                }
            }
        }
    }
    for p in candidates {
        if side(space, h, &p)? == Side::On && side(space, k, &p)? == Side::On {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Exact or model-derived certificate that the disjoint pair `(h, k)` is
/// `level`-separated, when one is available.
pub fn separation_certificate(space: &Space, h: &Curtain, k: &Curtain) -> Option<SeparatedCertificate> {
    let same_line = base_map(space, &h.base, &k.base).map(|map| {
        let hk = map_interval(&map, k.pole_interval());
        -interval_overlap(h.pole_interval(), hk)
    });
    match &space.model {
        Model::Euclidean { dim: 1 } => {
            let gap = same_line?;
            if gap <= 0.0 {
                return None;
            }
            if gap > 1.0 + space.eps {
                // No unit pole can reach both curtains.
                Some(SeparatedCertificate {
                    level: 0.0,
                    method: "line-intervals",
                    gap,
                })
            } else {
                // Any two bridging unit intervals overlap, so bridge chains
                // have at most one element.
                Some(SeparatedCertificate {
                    level: 1.0,
                    method: "line-intervals",
                    gap,
                })
            }
        }
        Model::Tree(tree) => {
            // Any connected set meeting both curtains contains the unique
            // shortest path between their carrying subtrees, so two bridges
            // always intersect: every disjoint pair is 1-separated.
            let hp = h.base.tree_path()?;
            let kp = k.base.tree_path()?;
            let img = tree_image_under_constraint(tree, hp, kp, k.pole_interval())?;
            let gap = -interval_overlap(h.pole_interval(), (img.0, img.1));
            if gap <= 0.0 {
                return None;
            }
            if bridge_exists_tree(space, h, k).is_none() {
                Some(SeparatedCertificate {
                    level: 0.0,
                    method: "tree-gates",
                    gap,
                })
            } else {
                Some(SeparatedCertificate {
                    level: 1.0,
                    method: "tree-gates",
                    gap,
                })
            }
        }
        Model::Hyperbolic2 => {
            let gap = same_line?;
            if gap <= 0.0 {
                return None;
            }
            let d_hat = crate::rankone::hyperbolic_contraction_constant();
            if gap >= 8.0 * d_hat - 1.0 - 1e-9 {
                // Any bridge pole projects to a unit set on the common base,
                // so some mid-gap point is missed; bounded geodesic image
                // keeps every bridge within 5D+1 of that point, and a chain
                // confined to a set of diameter 10D+2 has at most 10D+3
                // elements.
                Some(SeparatedCertificate {
                    level: 10.0 * d_hat + 3.0,
                    method: "corridor-bound",
                    gap,
                })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Constructive bridge existence on trees: any curtain meeting both inputs,
/// found by sweeping poles over leaf-to-leaf carrier paths. Complete because
/// every curtain coincides with one whose base is a maximal path.
pub fn bridge_exists_tree(space: &Space, h: &Curtain, k: &Curtain) -> Option<Curtain> {
    let Model::Tree(tree) = &space.model else {
        return None;
    };
    let hp = h.base.tree_path()?;
    let kp = k.base.tree_path()?;
    let leaves = tree.leaves();
    for (i, &a) in leaves.iter().enumerate() {
        for &b in leaves.iter().skip(i + 1) {
            let path = tree.path(TreePoint::Vertex(a), TreePoint::Vertex(b)).ok()?;
            if path.total <= 1.0 + 2e-9 {
                continue;
            }
            let img_h = tree_image_under_constraint(tree, &path, hp, h.pole_interval());
            let img_k = tree_image_under_constraint(tree, &path, kp, k.pole_interval());
            let (Some(ih), Some(ik)) = (img_h, img_k) else {
                continue;
            };
            // Pole center c must have [c - 1/2, c + 1/2] reach both images
            // and fit strictly inside the path domain.
            let lo = (ih.0 - POLE_HALF).max(ik.0 - POLE_HALF).max(POLE_HALF + 1e-9);
            let hi = (ih.1 + POLE_HALF)
                .min(ik.1 + POLE_HALF)
                .min(path.total - POLE_HALF - 1e-9);
            if lo <= hi {
                let c = 0.5 * (lo + hi);
                let base = Arc::new(Geodesic {
                    kind: GeodesicKind::Segment,
                    lo: 0.0,
                    hi: path.total,
                    rep: crate::spaces::Rep::Tree(path.clone()),
                });
                if let Ok(bridge) = curtain_at(space, &base, c) {
                    let m1 = meets(space, &bridge, h, 64).ok()?;
                    let m2 = meets(space, &bridge, k, 64).ok()?;
                    if m1.is_meets() && m2.is_meets() {
                        return Some(bridge);
                    }
                }
            }
        }
    }
    None
}

/// Greedily grown verified chain of curtains, each meeting both `h` and `k`.
/// Its length is a lower bound for the true separation level.
pub fn max_bridge_chain(space: &Space, h: &Curtain, k: &Curtain, budget: u64) -> Result<Chain> {
    bridge_chain_search(space, h, k, budget, None)
}

pub(crate) fn bridge_chain_search(
    space: &Space,
    h: &Curtain,
    k: &Curtain,
    budget: u64,
    target: Option<usize>,
) -> Result<Chain> {
    let cap = target
        .map(|t| t as u64)
        .unwrap_or(budget)
        .min(budget)
        .min(1000) as usize;
    if cap == 0 {
        return Ok(Chain::empty());
    }
    let same = base_map(space, &h.base, &k.base);
    match &space.model {
        Model::Euclidean { dim: 1 } => {
            let map = same.ok_or(Error::PreconditionViolated("1-d lines always share".into()))?;
            let hk = map_interval(&map, k.pole_interval());
            let hh = h.pole_interval();
            let gap = -interval_overlap(hh, hk);
            if gap <= 0.0 {
                return Err(Error::NotDisjoint);
            }
            if gap > 1.0 {
                return Ok(Chain::empty());
            }
            // One bridging unit interval centred between the facing pole
            // endpoints.
            let c = if hh.1 < hk.0 {
                0.5 * (hh.1 + hk.0)
            } else {
                0.5 * (hk.1 + hh.0)
            };
            let bridge = line_curtain_through(space, &h.base, c)?;
            let chain = Chain {
                curtains: vec![bridge],
                status: ChainStatus::DualDisjointPoles,
                level: None,
            };
            return Ok(chain);
        }
        Model::Euclidean { .. } => {
            let (hb, hd) = h.base.euclidean_frame().unwrap();
            let (kb, kd) = k.base.euclidean_frame().unwrap();
            if linalg::dot(hd, kd).abs() < 1.0 - 1e-9 {
                return Err(Error::NotDisjoint);
            }
            // Orthogonal slab family: slabs normal to any direction w
            // perpendicular to the common normal meet both inputs and form a
            // chain at pole spacing 2.
            let w = perpendicular_direction(hd);
            let mid = linalg::scale(linalg::add(hb, kb), 0.5);
            let base = Arc::new(Geodesic {
                kind: GeodesicKind::Line,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                rep: crate::spaces::Rep::Euclidean { base: mid, dir: w },
            });
            let mut curtains = Vec::with_capacity(cap);
            for j in 0..cap {
                curtains.push(curtain_at(space, &base, 2.0 * j as f64)?);
            }
            return Ok(Chain {
                curtains,
                status: ChainStatus::DualDisjointPoles,
                level: None,
            });
        }
        Model::Tree(_) => {
            if let Some(bridge) = bridge_exists_tree(space, h, k) {
                return Ok(Chain {
                    curtains: vec![bridge],
                    status: ChainStatus::DualDisjointPoles,
                    level: None,
                });
            }
            return Ok(Chain::empty());
        }
        Model::Hyperbolic2 => {
            let mut curtains: Vec<Curtain> = Vec::new();
            if let Some(map) = same {
                let hk = map_interval(&map, k.pole_interval());
                let hh = h.pole_interval();
                let gap = -interval_overlap(hh, hk);
                if gap <= 0.0 {
                    return Err(Error::NotDisjoint);
                }
                // Bridges dual to the mid-gap fiber, marching outward.
                let c = if hh.1 < hk.0 {
                    0.5 * (hh.1 + hk.0)
                } else {
                    0.5 * (hk.1 + hh.0)
                };
                let (tp, tu) = h.base.hyperboloid_frame().unwrap();
                let (q, wdir) = hyp::perpendicular_at(tp, tu, c);
                let fiber = Arc::new(Geodesic {
                    kind: GeodesicKind::Line,
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                    rep: crate::spaces::Rep::Hyperboloid { base: q, dir: wdir },
                });
                // Candidate poles at spacing slightly above 1 on both sides.
                let spacing = 1.0 + 1e-3;
                let mut offsets: Vec<f64> = Vec::new();
                for j in 0..cap {
                    let base_off = (j / 2 + usize::from(j % 2 == 1)) as f64 * spacing;
                    offsets.push(if j % 2 == 0 { base_off } else { -base_off });
                }
                for s in offsets {
                    if curtains.len() >= cap {
                        break;
                    }
                    let cand = curtain_at(space, &fiber, s)?;
                    let m1 = meets(space, &cand, h, 64)?;
                    let m2 = meets(space, &cand, k, 64)?;
                    if m1.is_meets() && m2.is_meets() {
                        curtains.push(cand);
                    }
                }
                // Co-axial bridge for small gaps.
                if gap <= 1.0 && curtains.is_empty() {
                    let bridge = line_curtain_through(space, &h.base, c)?;
                    let m1 = meets(space, &bridge, h, 64)?;
                    let m2 = meets(space, &bridge, k, 64)?;
                    if m1.is_meets() && m2.is_meets() {
                        curtains.push(bridge);
                    }
                }
                curtains.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap());
            } else {
                // Distinct base lines: bridges dual to the connecting
                // geodesic between the pole midpoints.
                let pm_h = h.pole_midpoint(space)?;
                let pm_k = k.pole_midpoint(space)?;
                let d = spaces::distance(space, &pm_h, &pm_k)?;
                if d > space.eps {
                    let gamma = Arc::new(spaces::geodesic(
                        space,
                        &pm_h,
                        &pm_k,
                        GeodesicKind::Line,
                    )?);
                    let spacing = 1.0 + 1e-3;
                    let mut r = 0.0;
                    while r <= d && curtains.len() < cap {
                        if let Ok(cand) = curtain_at(space, &gamma, r) {
                            let m1 = meets(space, &cand, h, 64)?;
                            let m2 = meets(space, &cand, k, 64)?;
                            if m1.is_meets() && m2.is_meets() {
                                curtains.push(cand);
                            }
                        }
                        r += spacing;
                    }
                }
            }
            return Ok(Chain {
                curtains,
                status: ChainStatus::DualDisjointPoles,
                level: None,
            });
        }
        Model::Product(..) => {
            // Bridges dual to the connecting segment between pole midpoints.
            let pm_h = h.pole_midpoint(space)?;
            let pm_k = k.pole_midpoint(space)?;
            let d = spaces::distance(space, &pm_h, &pm_k)?;
            let mut curtains = Vec::new();
            if d > 2.0 {
                let gamma = Arc::new(spaces::geodesic(
                    space,
                    &pm_h,
                    &pm_k,
                    GeodesicKind::Segment,
                )?);
                let spacing = 1.0 + 1e-3;
                let mut r = POLE_HALF + 1e-3;
                while r + POLE_HALF < d && curtains.len() < cap {
                    if let Ok(cand) = curtain_at(space, &gamma, r) {
                        let m1 = meets(space, &cand, h, budget.min(512))?;
                        let m2 = meets(space, &cand, k, budget.min(512))?;
                        if m1.is_meets() && m2.is_meets() {
                            curtains.push(cand);
                        }
                    }
                    r += spacing;
                }
            }
            Ok(Chain {
                curtains,
                status: ChainStatus::DualDisjointPoles,
                level: None,
            })
        }
    }
}

/// Curtain on the complete extension of `base` at parameter `c`, falling
/// back to the base itself when it already hosts the pole.
fn line_curtain_through(space: &Space, base: &Arc<Geodesic>, c: f64) -> Result<Curtain> {
    if c - POLE_HALF > base.lo && c + POLE_HALF < base.hi {
        return curtain_at(space, base, c);
    }
    // Extend: evaluate two nearby in-domain points and build a line.
    let (lo, hi) = base.domain();
    let a = spaces::evaluate(space, base, (c - 1.0).clamp(lo, hi))?;
    let b = spaces::evaluate(space, base, (c + 1.0).clamp(lo, hi))?;
    let line = Arc::new(spaces::geodesic(space, &a, &b, GeodesicKind::Line)?);
    // Parameter of c on the new line.
    let p = spaces::evaluate(space, base, c.clamp(lo, hi))?;
    let proj = spaces::project(space, &p, &line)?;
    curtain_at(space, &line, proj.t)
}

fn perpendicular_direction(d: V3) -> V3 {
    let cand = if d[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let proj = linalg::scale(d, linalg::dot(cand, d));
    let w = linalg::sub(cand, proj);
    linalg::scale(w, 1.0 / linalg::norm(w))
}

/// Decides `L`-separation of a disjoint pair within budget.
pub fn is_l_separated(
    space: &Space,
    h: &Curtain,
    k: &Curtain,
    level: u32,
    budget: u64,
) -> Result<SeparationVerdict> {
    match meets(space, h, k, budget)? {
        MeetResult::Meets(_) => return Err(Error::NotDisjoint),
        MeetResult::Unknown => {
            return Ok(SeparationVerdict::Unknown {
                budget_spent: budget,
            })
        }
        MeetResult::Disjoint { .. } => {}
    }
    if let Some(cert) = separation_certificate(space, h, k) {
        if cert.level <= level as f64 {
            return Ok(SeparationVerdict::Separated(cert));
        }
    }
    let need = level as usize + 1;
    let bridge = bridge_chain_search(space, h, k, budget, Some(need))?;
    if bridge.len() >= need {
        let mut chain = bridge;
        chain.curtains.truncate(need);
        return Ok(SeparationVerdict::NotSeparated(chain));
    }
    Ok(SeparationVerdict::Unknown {
        budget_spent: budget,
    })
}

/// Hashable fingerprint of a point, quantised to a fixed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum PointKey {
    Euclidean([i64; 3]),
    Hyperboloid([i64; 3]),
    Tree(u8, usize, i64),
    Product(usize, i64, usize, i64),
}

pub(crate) fn point_key(p: &Point) -> PointKey {
    let q = |x: f64| (x * 1e7).round() as i64;
    let tk = |t: &TreePoint| match t {
        TreePoint::Vertex(v) => (0u8, *v, 0i64),
        TreePoint::Edge { edge, offset } => (1u8, *edge, q(*offset)),
    };
    match p {
        Point::Euclidean(v) => PointKey::Euclidean([q(v[0]), q(v[1]), q(v[2])]),
        Point::Hyperboloid(v) => PointKey::Hyperboloid([q(v[0]), q(v[1]), q(v[2])]),
        Point::Tree(t) => {
            let (a, b, c) = tk(t);
            PointKey::Tree(a, b, c)
        }
        Point::Product(a, b) => {
            let (_, ea, oa) = tk(a);
            let (_, eb, ob) = tk(b);
            PointKey::Product(ea, oa, eb, ob)
        }
    }
}

type PairKey = (PointKey, PointKey, PointKey, PointKey, u32);

/// Concurrent cache of separation outcomes keyed by canonical curtain pairs.
/// Writes are idempotent: verdicts for a pair never change within a run.
#[derive(Debug, Default)]
pub struct VerdictCache {
    map: RwLock<HashMap<PairKey, bool>>,
}

impl VerdictCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(h: &Curtain, k: &Curtain, level: u32) -> PairKey {
        (
            point_key(&h.pole_start),
            point_key(&h.pole_end),
            point_key(&k.pole_start),
            point_key(&k.pole_end),
            level,
        )
    }

    /// Cached "certified separated at `level`" check.
    pub fn separated(
        &self,
        space: &Space,
        h: &Curtain,
        k: &Curtain,
        level: u32,
        budget: u64,
    ) -> Result<bool> {
        let key = Self::key(h, k, level);
        if let Some(&v) = self.map.read().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let v = matches!(
            is_l_separated(space, h, k, level, budget)?,
            SeparationVerdict::Separated(_)
        );
        self.map.write().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::geodesic;

    fn line() -> (Space, Arc<Geodesic>) {
        let s = Space::euclidean(1).unwrap();
        let g = geodesic(
            &s,
            &Point::euclidean(&[0.0]),
            &Point::euclidean(&[1.0]),
            GeodesicKind::Line,
        )
        .unwrap();
        (s, Arc::new(g))
    }

    fn plane_line(s: &Space, a: [f64; 2], b: [f64; 2]) -> Arc<Geodesic> {
        Arc::new(
            geodesic(
                s,
                &Point::euclidean(&a),
                &Point::euclidean(&b),
                GeodesicKind::Line,
            )
            .unwrap(),
        )
    }

    #[test]
    fn disjoint_poles_on_line() {
        let (s, g) = line();
        let h = curtain_at(&s, &g, 0.0).unwrap();
        let k = curtain_at(&s, &g, 2.0).unwrap();
        let m = meets(&s, &h, &k, 64).unwrap();
        assert!(m.is_disjoint());
        let touching = curtain_at(&s, &g, 1.0).unwrap();
        assert!(meets(&s, &h, &touching, 64).unwrap().is_meets());
    }

    #[test]
    fn crossing_slabs_meet() {
        let s = Space::euclidean(2).unwrap();
        let gx = plane_line(&s, [0.0, 0.0], [1.0, 0.0]);
        let gy = plane_line(&s, [0.0, 0.0], [0.0, 1.0]);
        let h = curtain_at(&s, &gx, 0.5).unwrap();
        let k = curtain_at(&s, &gy, 0.5).unwrap();
        match meets(&s, &h, &k, 64).unwrap() {
            MeetResult::Meets(p) => {
                assert_eq!(side(&s, &h, &p).unwrap(), Side::On);
                assert_eq!(side(&s, &k, &p).unwrap(), Side::On);
            }
            other => panic!("expected meet, got {other:?}"),
        }
    }

    #[test]
    fn parallel_slabs_disjoint() {
        let s = Space::euclidean(2).unwrap();
        let g1 = plane_line(&s, [0.0, 0.0], [1.0, 0.0]);
        let g2 = plane_line(&s, [0.0, 5.0], [1.0, 5.0]);
        let h = curtain_at(&s, &g1, 0.5).unwrap();
        let k = curtain_at(&s, &g2, 3.5).unwrap();
        match meets(&s, &h, &k, 64).unwrap() {
            MeetResult::Disjoint { gap, .. } => assert!((gap - 2.0).abs() < 1e-9),
            other => panic!("expected disjoint, got {other:?}"),
        }
    }

    #[test]
    fn line_separation_levels() {
        let (s, g) = line();
        let h = curtain_at(&s, &g, 0.0).unwrap();
        // Gap 2 > 1: no unit interval reaches both.
        let k = curtain_at(&s, &g, 3.0).unwrap();
        assert!(is_l_separated(&s, &h, &k, 0, 64).unwrap().is_separated());
        // Gap 0.1: a bridge exists, so not 0-separated, but 1-separated.
        let k2 = curtain_at(&s, &g, 1.1).unwrap();
        match is_l_separated(&s, &h, &k2, 0, 64).unwrap() {
            SeparationVerdict::NotSeparated(c) => assert_eq!(c.len(), 1),
            other => panic!("expected bridge witness, got {other:?}"),
        }
        assert!(is_l_separated(&s, &h, &k2, 1, 64).unwrap().is_separated());
    }

    #[test]
    fn euclidean_plane_never_separates() {
        let s = Space::euclidean(2).unwrap();
        let g1 = plane_line(&s, [0.0, 0.0], [1.0, 0.0]);
        let h = curtain_at(&s, &g1, 0.5).unwrap();
        let k = curtain_at(&s, &g1, 5.5).unwrap();
        for level in [0u32, 3, 10] {
            match is_l_separated(&s, &h, &k, level, 1000).unwrap() {
                SeparationVerdict::NotSeparated(c) => {
                    assert_eq!(c.len(), level as usize + 1);
                    assert_eq!(
                        crate::curtains::verify_chain(&s, &c, None).unwrap(),
                        ChainStatus::DualDisjointPoles
                    );
                    for b in &c.curtains {
                        assert!(meets(&s, b, &h, 64).unwrap().is_meets());
                        assert!(meets(&s, b, &k, 64).unwrap().is_meets());
                    }
                }
                other => panic!("expected bridging chain, got {other:?}"),
            }
        }
    }

    #[test]
    fn tree_pairs_deep_in_legs_are_zero_separated() {
        let t = MetricTree::from_edges(&[
            ("o".into(), "a".into(), 4.0),
            ("o".into(), "b".into(), 4.0),
            ("o".into(), "c".into(), 4.0),
        ])
        .unwrap();
        let id = |n: &str| t.vertex_id(n).unwrap();
        let a = Point::Tree(TreePoint::Vertex(id("a")));
        let b = Point::Tree(TreePoint::Vertex(id("b")));
        let s = Space::tree(t);
        let g = Arc::new(geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap());
        // Poles deep inside different legs: every candidate base collapses
        // one carrying subtree to a point too far from the other's image.
        let h = curtain_at(&s, &g, 1.0).unwrap();
        let k = curtain_at(&s, &g, 6.5).unwrap();
        assert!(meets(&s, &h, &k, 64).unwrap().is_disjoint());
        assert!(bridge_exists_tree(&s, &h, &k).is_none());
        assert!(is_l_separated(&s, &h, &k, 0, 64).unwrap().is_separated());
    }

    #[test]
    fn tree_pairs_with_branch_bridge_are_one_separated() {
        let t = MetricTree::from_edges(&[
            ("o".into(), "a".into(), 4.0),
            ("o".into(), "b".into(), 4.0),
            ("o".into(), "c".into(), 4.0),
        ])
        .unwrap();
        let id = |n: &str| t.vertex_id(n).unwrap();
        let a = Point::Tree(TreePoint::Vertex(id("a")));
        let b = Point::Tree(TreePoint::Vertex(id("b")));
        let s = Space::tree(t);
        let g = Arc::new(geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap());
        // The first pole straddles the branch point, so its curtain swallows
        // the whole c-branch; a pole on the (c, b) path bridges the gap.
        let h = curtain_at(&s, &g, 4.0).unwrap();
        let k = curtain_at(&s, &g, 6.0).unwrap();
        assert!(meets(&s, &h, &k, 64).unwrap().is_disjoint());
        assert!(bridge_exists_tree(&s, &h, &k).is_some());
        assert!(is_l_separated(&s, &h, &k, 1, 64).unwrap().is_separated());
        match is_l_separated(&s, &h, &k, 0, 64).unwrap() {
            SeparationVerdict::NotSeparated(c) => assert_eq!(c.len(), 1),
            other => panic!("expected bridge, got {other:?}"),
        }
    }

    #[test]
    fn bare_segment_tree_is_zero_separated() {
        let t = MetricTree::from_edges(&[("a".into(), "b".into(), 10.0)]).unwrap();
        let a = Point::Tree(TreePoint::Vertex(0));
        let b = Point::Tree(TreePoint::Vertex(1));
        let s = Space::tree(t);
        let g = Arc::new(geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap());
        let h = curtain_at(&s, &g, 2.0).unwrap();
        let k = curtain_at(&s, &g, 7.0).unwrap();
        assert!(bridge_exists_tree(&s, &h, &k).is_none());
        assert!(is_l_separated(&s, &h, &k, 0, 64).unwrap().is_separated());
    }

    #[test]
    fn hyperbolic_same_base_certificate() {
        let s = Space::hyperbolic2();
        let x = Point::poincare(0.0, 0.0).unwrap();
        let y = Point::poincare(0.5, 0.0).unwrap();
        let g = Arc::new(geodesic(&s, &x, &y, GeodesicKind::Line).unwrap());
        let d_hat = crate::rankone::hyperbolic_contraction_constant();
        let h = curtain_at(&s, &g, 0.0).unwrap();
        let k = curtain_at(&s, &g, 8.0 * d_hat).unwrap();
        let level = (10.0 * d_hat + 3.0).ceil() as u32;
        assert!(is_l_separated(&s, &h, &k, level, 64)
            .unwrap()
            .is_separated());
    }

    #[test]
    fn hyperbolic_bands_meet_and_disjoin() {
        let s = Space::hyperbolic2();
        let x = Point::poincare(0.0, 0.0).unwrap();
        let ex = Point::poincare(0.5, 0.0).unwrap();
        let ey = Point::poincare(0.0, 0.5).unwrap();
        let gx = Arc::new(geodesic(&s, &x, &ex, GeodesicKind::Line).unwrap());
        let gy = Arc::new(geodesic(&s, &x, &ey, GeodesicKind::Line).unwrap());
        // Bands around two perpendicular lines through the origin meet.
        let h = curtain_at(&s, &gx, 0.0).unwrap();
        let k = curtain_at(&s, &gy, 0.0).unwrap();
        match meets(&s, &h, &k, 64).unwrap() {
            MeetResult::Meets(p) => {
                assert_eq!(side(&s, &h, &p).unwrap(), Side::On);
                assert_eq!(side(&s, &k, &p).unwrap(), Side::On);
            }
            other => panic!("expected meet, got {other:?}"),
        }
        // A band around the y-axis with its pole pushed up misses a band
        // around the x-axis with its pole pushed out: the carrying regions
        // separate once neither pole sits near the crossing point.
        let high = curtain_at(&s, &gy, 6.0).unwrap();
        let out_x = curtain_at(&s, &gx, 6.0).unwrap();
        assert!(meets(&s, &high, &out_x, 64).unwrap().is_disjoint());
    }
}
