//! Curtains and chains.
//!
//! A curtain is the preimage of a unit pole segment `alpha[r-1/2, r+1/2]`
//! under closest-point projection to a geodesic `alpha`. It splits the space
//! into the curtain itself and two open halfspaces; ordered families in
//! which each member separates its neighbours ("chains") measure distance.

mod chains;
mod separation;

pub use chains::{dual_chain, dualize_chain, glue_chains, glue_disjoint_chains};
pub use separation::{
    bridge_exists_tree, is_l_separated, max_bridge_chain, meets, separation_certificate,
    MeetResult, SeparatedCertificate, SeparationVerdict, VerdictCache,
};
pub(crate) use separation::halfspace_param_image;

use crate::error::{Error, Result};
use crate::spaces::{self, Geodesic, Point, Space};
use std::sync::Arc;

/// Pole half-width: poles have length exactly one.
pub const POLE_HALF: f64 = 0.5;

/// A curtain dual to `base` at `r`, with the pole endpoints cached.
#[derive(Debug, Clone)]
pub struct Curtain {
    pub base: Arc<Geodesic>,
    pub r: f64,
    pub pole_start: Point,
    pub pole_end: Point,
}

impl Curtain {
    pub fn pole_interval(&self) -> (f64, f64) {
        (self.r - POLE_HALF, self.r + POLE_HALF)
    }

    pub fn pole_midpoint(&self, space: &Space) -> Result<Point> {
        spaces::evaluate(space, &self.base, self.r)
    }

    /// Structural identity: same base-geodesic image and same pole endpoints
    /// within `tol`.
    pub fn same_curtain(&self, space: &Space, other: &Curtain, tol: f64) -> bool {
        spaces::points_close(space, &self.pole_start, &other.pole_start, tol)
            && spaces::points_close(space, &self.pole_end, &other.pole_end, tol)
            && spaces::common_line(space, &self.base, &other.base, tol).is_some()
    }
}

/// Which part of the curtain partition a point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    On,
    Plus,
}

/// How a chain was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStatus {
    /// All curtains share a base geodesic with pairwise-disjoint poles.
    DualDisjointPoles,
    /// Explicit witness points certified the side ordering.
    WitnessVerified,
    Unverified,
}

/// An ordered family of curtains in which each member separates its
/// neighbours. Pairwise disjointness follows from that condition and is
/// re-checked rather than assumed.
#[derive(Debug, Clone)]
pub struct Chain {
    pub curtains: Vec<Curtain>,
    pub status: ChainStatus,
    pub level: Option<u32>,
}

impl Chain {
    pub fn empty() -> Chain {
        Chain {
            curtains: Vec::new(),
            status: ChainStatus::DualDisjointPoles,
            level: None,
        }
    }

    pub fn len(&self) -> usize {
        self.curtains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curtains.is_empty()
    }
}

/// Builds the curtain dual to `g` at `r`. The pole must sit strictly inside
/// the domain of `g`.
pub fn curtain_at(space: &Space, g: &Arc<Geodesic>, r: f64) -> Result<Curtain> {
    let (lo, hi) = g.domain();
    if !(r - POLE_HALF > lo && r + POLE_HALF < hi) {
        return Err(Error::PoleOutsideDomain {
            lo: r - POLE_HALF,
            hi: r + POLE_HALF,
        });
    }
    let pole_start = spaces::evaluate(space, g, r - POLE_HALF)?;
    let pole_end = spaces::evaluate(space, g, r + POLE_HALF)?;
    Ok(Curtain {
        base: Arc::clone(g),
        r,
        pole_start,
        pole_end,
    })
}

/// Side of `x` with respect to `h`. The `On` band is widened by `eps` on
/// both ends so floating-point feet never oscillate between labels.
pub fn side(space: &Space, h: &Curtain, x: &Point) -> Result<Side> {
    let proj = spaces::project(space, x, &h.base)?;
    let (lo, hi) = h.pole_interval();
    Ok(if proj.t < lo - space.eps {
        Side::Minus
    } else if proj.t <= hi + space.eps {
        Side::On
    } else {
        Side::Plus
    })
}

/// True iff `h` separates `a_side` from `b_side`: one family entirely in the
/// Minus halfspace, the other entirely in Plus. Points on the curtain defeat
/// separation.
pub fn separates(space: &Space, h: &Curtain, a_side: &[Point], b_side: &[Point]) -> Result<bool> {
    if a_side.is_empty() || b_side.is_empty() {
        return Err(Error::PreconditionViolated(
            "separation needs nonempty point families".into(),
        ));
    }
    let mut sides_a = Vec::with_capacity(a_side.len());
    for p in a_side {
        sides_a.push(side(space, h, p)?);
    }
    let mut sides_b = Vec::with_capacity(b_side.len());
    for p in b_side {
        sides_b.push(side(space, h, p)?);
    }
    let all = |v: &[Side], s: Side| v.iter().all(|&x| x == s);
    Ok((all(&sides_a, Side::Minus) && all(&sides_b, Side::Plus))
        || (all(&sides_a, Side::Plus) && all(&sides_b, Side::Minus)))
}

/// Verifies the chain condition.
///
/// Route (a): all curtains share a base geodesic and the pole intervals are
/// strictly increasing and disjoint. Route (b): witness points, one per
/// curtain, certify the side ordering. Returns the verified status, or
/// `InsufficientWitnesses` when neither route applies.
pub fn verify_chain(
    space: &Space,
    chain: &Chain,
    witnesses: Option<&[Point]>,
) -> Result<ChainStatus> {
    if chain.is_empty() {
        return Err(Error::PreconditionViolated("empty chain".into()));
    }
    if chain.len() == 1 {
        return Ok(ChainStatus::DualDisjointPoles);
    }
    if let Some(intervals) = common_base_intervals(space, &chain.curtains) {
        let mut ok = true;
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 + space.eps {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(ChainStatus::DualDisjointPoles);
        }
        // Also accept the reverse orientation.
        let mut rev = true;
        for w in intervals.windows(2) {
            if w[1].1 >= w[0].0 - space.eps {
                rev = false;
                break;
            }
        }
        if rev {
            return Ok(ChainStatus::DualDisjointPoles);
        }
    }
    if let Some(ws) = witnesses {
        if ws.len() != chain.len() {
            return Err(Error::InsufficientWitnesses(format!(
                "{} witnesses for {} curtains",
                ws.len(),
                chain.len()
            )));
        }
        for (i, h) in chain.curtains.iter().enumerate() {
            for (j, w) in ws.iter().enumerate() {
                let s = side(space, h, w)?;
                let expect = match j.cmp(&i) {
                    std::cmp::Ordering::Less => Side::Minus,
                    std::cmp::Ordering::Equal => Side::On,
                    std::cmp::Ordering::Greater => Side::Plus,
                };
                if s != expect {
                    return Err(Error::InsufficientWitnesses(format!(
                        "witness {j} lies on side {s:?} of curtain {i}, expected {expect:?}"
                    )));
                }
            }
        }
        return Ok(ChainStatus::WitnessVerified);
    }
    Err(Error::InsufficientWitnesses(
        "curtains do not share a base geodesic and no witnesses were supplied".into(),
    ))
}

/// Convenience: verify and return a boolean, treating verification failure
/// as `false` and missing evidence as an error.
pub fn chain_is_verified(space: &Space, chain: &Chain, witnesses: Option<&[Point]>) -> bool {
    verify_chain(space, chain, witnesses).is_ok()
}

/// Parameter map between base lines: identical geodesic objects map by the
/// identity, otherwise the structural common-line detection decides.
pub(crate) fn base_map(
    space: &Space,
    a: &Arc<Geodesic>,
    b: &Arc<Geodesic>,
) -> Option<spaces::ParamMap> {
    if Arc::ptr_eq(a, b) {
        return Some(spaces::ParamMap {
            scale: 1.0,
            shift: 0.0,
        });
    }
    spaces::common_line(space, a, b, space.eps.max(1e-9))
}

/// Pole intervals of the curtains expressed in the parameters of the first
/// curtain's base line, when all bases share that line.
pub(crate) fn common_base_intervals(space: &Space, curtains: &[Curtain]) -> Option<Vec<(f64, f64)>> {
    let first = curtains.first()?;
    let mut out = Vec::with_capacity(curtains.len());
    for h in curtains {
        let map = base_map(space, &first.base, &h.base)?;
        let a = map.apply(h.r - POLE_HALF);
        let b = map.apply(h.r + POLE_HALF);
        out.push((a.min(b), a.max(b)));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{geodesic, GeodesicKind};

    fn line_space() -> (Space, Arc<Geodesic>) {
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

    #[test]
    fn pole_is_unit_interval() {
        let (s, g) = line_space();
        let h = curtain_at(&s, &g, 0.0).unwrap();
        assert_eq!(h.pole_interval(), (-0.5, 0.5));
        assert_eq!(h.pole_start, Point::euclidean(&[-0.5]));
        assert_eq!(h.pole_end, Point::euclidean(&[0.5]));
    }

    #[test]
    fn pole_must_fit_in_segments() {
        let s = Space::euclidean(1).unwrap();
        let g = Arc::new(
            geodesic(
                &s,
                &Point::euclidean(&[0.0]),
                &Point::euclidean(&[2.0]),
                GeodesicKind::Segment,
            )
            .unwrap(),
        );
        assert!(matches!(
            curtain_at(&s, &g, 0.2),
            Err(Error::PoleOutsideDomain { .. })
        ));
        assert!(curtain_at(&s, &g, 1.0).is_ok());
    }

    #[test]
    fn line_side_labels() {
        let (s, g) = line_space();
        let h = curtain_at(&s, &g, 0.0).unwrap();
        assert_eq!(side(&s, &h, &Point::euclidean(&[-2.0])).unwrap(), Side::Minus);
        assert_eq!(side(&s, &h, &Point::euclidean(&[0.3])).unwrap(), Side::On);
        assert_eq!(side(&s, &h, &Point::euclidean(&[1.0])).unwrap(), Side::Plus);
    }

    #[test]
    fn slab_side_in_plane() {
        let s = Space::euclidean(2).unwrap();
        let g = Arc::new(
            geodesic(
                &s,
                &Point::euclidean(&[0.0, 0.0]),
                &Point::euclidean(&[1.0, 0.0]),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let h = curtain_at(&s, &g, 5.0).unwrap();
        assert_eq!(
            side(&s, &h, &Point::euclidean(&[5.2, 7.0])).unwrap(),
            Side::On
        );
        assert!(separates(
            &s,
            &h,
            &[Point::euclidean(&[0.0, 0.0]), Point::euclidean(&[1.0, 9.0])],
            &[Point::euclidean(&[9.0, -3.0])]
        )
        .unwrap());
    }

    #[test]
    fn tripod_tip_is_on_the_curtain() {
        let t = crate::geom::tree::MetricTree::from_edges(&[
            ("o".into(), "a".into(), 2.0),
            ("o".into(), "b".into(), 2.0),
            ("o".into(), "c".into(), 2.0),
        ])
        .unwrap();
        let id = |n: &str| t.vertex_id(n).unwrap();
        let a = Point::Tree(crate::geom::tree::TreePoint::Vertex(id("a")));
        let b = Point::Tree(crate::geom::tree::TreePoint::Vertex(id("b")));
        let c = Point::Tree(crate::geom::tree::TreePoint::Vertex(id("c")));
        let s = Space::tree(t);
        let g = Arc::new(geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap());
        let h = curtain_at(&s, &g, 2.0).unwrap();
        assert_eq!(side(&s, &h, &c).unwrap(), Side::On);
        // tip(c) defeats separation of tip(a) from tip(c).
        assert!(!separates(&s, &h, &[a], &[c]).unwrap());
    }

    #[test]
    fn verify_chain_routes() {
        let (s, g) = line_space();
        let h1 = curtain_at(&s, &g, 0.0).unwrap();
        let h2 = curtain_at(&s, &g, 2.0).unwrap();
        let h3 = curtain_at(&s, &g, 4.0).unwrap();
        let chain = Chain {
            curtains: vec![h1.clone(), h2.clone(), h3],
            status: ChainStatus::Unverified,
            level: None,
        };
        assert_eq!(
            verify_chain(&s, &chain, None).unwrap(),
            ChainStatus::DualDisjointPoles
        );
        let overlapping = Chain {
            curtains: vec![h1, h2, curtain_at(&s, &g, 2.4).unwrap()],
            status: ChainStatus::Unverified,
            level: None,
        };
        assert!(verify_chain(&s, &overlapping, None).is_err());
    }

    #[test]
    fn curtain_thickness_between_halfspaces() {
        // d(h^-, h^+) = 1: sampled halfspace points never come closer.
        let (s, g) = line_space();
        let h = curtain_at(&s, &g, 0.0).unwrap();
        for i in 0..20 {
            let a = Point::euclidean(&[-0.5 - 0.1 * i as f64 - 1e-6]);
            for j in 0..20 {
                let b = Point::euclidean(&[0.5 + 0.1 * j as f64 + 1e-6]);
                assert_eq!(side(&s, &h, &a).unwrap(), Side::Minus);
                assert_eq!(side(&s, &h, &b).unwrap(), Side::Plus);
                assert!(spaces::distance(&s, &a, &b).unwrap() > 1.0);
            }
        }
    }
}
