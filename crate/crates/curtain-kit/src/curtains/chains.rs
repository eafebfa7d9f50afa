//! Chain construction and the combinatorial chain calculus: dual chains
//! realising the ceiling of the distance, gluing of separated chains, and
//! replacing a chain by one dual to a fixed geodesic.

use super::separation::{curtain_param_image, meets};
use super::{curtain_at, separates, side, verify_chain, Chain, ChainStatus, Curtain, Side, POLE_HALF};
use crate::error::{Error, Result};
use crate::spaces::{self, GeodesicKind, Point, Space};
use std::sync::Arc;

/// Snapping width for treating a distance as an integer; placement margins
/// must stay clear of the side tolerance.
const INTEGER_SNAP: f64 = 1e-7;

/// Chain of `ceil(d) - 1` curtains dual to `[x, y]` with pairwise-disjoint
/// poles, separating `x` from `y`. Placement uses the fractional part spread
/// evenly across the poles; at integer distances a unit gap budget is spread
/// instead so poles stay strictly disjoint and clear of the endpoints.
pub fn dual_chain(space: &Space, x: &Point, y: &Point) -> Result<Chain> {
    let d = spaces::distance(space, x, y)?;
    if d <= 1.0 + INTEGER_SNAP {
        return Ok(Chain::empty());
    }
    let base = Arc::new(spaces::geodesic(space, x, y, GeodesicKind::Segment)?);
    let rounded = d.round();
    let integer_like = (d - rounded).abs() <= INTEGER_SNAP && rounded >= 1.0;
    let big_d = if integer_like { rounded } else { d.ceil() };
    let n = big_d as usize - 1;
    let mut curtains = Vec::with_capacity(n);
    for i in 1..=n {
        let r = if integer_like {
            i as f64 - 0.5 + i as f64 / (big_d + 1.0)
        } else {
            let delta = d - d.floor();
            i as f64 - 0.5 + i as f64 * delta / big_d
        };
        curtains.push(curtain_at(space, &base, r)?);
    }
    let chain = Chain {
        curtains,
        status: ChainStatus::DualDisjointPoles,
        level: None,
    };
    debug_assert!(chain.is_empty() || verify_chain(space, &chain, None).is_ok());
    Ok(chain)
}

/// True when every chain element is certified disjoint from every element of
/// the other chain.
fn chains_disjoint(space: &Space, c: &Chain, c2: &Chain) -> Result<bool> {
    for (i, a) in c.curtains.iter().enumerate() {
        for (j, b) in c2.curtains.iter().enumerate() {
            match meets(space, a, b, 256)? {
                super::MeetResult::Disjoint { .. } => {}
                _ => {
                    return Err(Error::PreconditionViolated(format!(
                        "elements {i} and {j} of the two chains are not certified disjoint"
                    )))
                }
            }
        }
    }
    Ok(true)
}

/// Certifies that curtain `region` lies entirely in the given halfspace of
/// `h`.
fn contained_in_halfspace(space: &Space, h: &Curtain, region: &Curtain, side_of: Side) -> bool {
    let Some(img) = curtain_param_image(space, h, region) else {
        return false;
    };
    let (lo, hi) = h.pole_interval();
    match side_of {
        Side::Minus => img.hi < lo - space.eps,
        Side::Plus => img.lo > hi + space.eps,
        Side::On => img.lo >= lo - space.eps && img.hi <= hi + space.eps,
    }
}

/// Glues two disjoint verified chains: the maximal element of the first is
/// dropped and the rest concatenate. The separation level carries over.
pub fn glue_disjoint_chains(space: &Space, c: &Chain, c2: &Chain) -> Result<Chain> {
    if c.is_empty() || c2.is_empty() {
        return Err(Error::PreconditionViolated("chains must be nonempty".into()));
    }
    verify_chain(space, c, None)?;
    verify_chain(space, c2, None)?;
    chains_disjoint(space, c, c2)?;
    // Every element of c must lie in the Minus halfspace of min(c2).
    let first2 = &c2.curtains[0];
    for (i, a) in c.curtains.iter().enumerate() {
        if !contained_in_halfspace(space, first2, a, Side::Minus) {
            return Err(Error::PreconditionViolated(format!(
                "element {i} of the first chain is not inside the Minus side of min(c')"
            )));
        }
    }
    let mut curtains: Vec<Curtain> = c.curtains[..c.len() - 1].to_vec();
    curtains.extend(c2.curtains.iter().cloned());
    let glued = Chain {
        curtains,
        status: ChainStatus::Unverified,
        level: match (c.level, c2.level) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        },
    };
    if glued.is_empty() {
        return Ok(glued);
    }
    let status = verify_chain(space, &glued, None)?;
    Ok(Chain { status, ..glued })
}

/// Glues two overlapping-position verified `L`-chains into one of
/// cardinality `n + m - L - 2`, dropping the maximal element of the first
/// and the first `L + 1` elements of the second.
pub fn glue_chains(space: &Space, c: &Chain, c2: &Chain, level: u32) -> Result<Chain> {
    let n = c.len();
    let m = c2.len();
    if n <= 1 {
        return Err(Error::PreconditionViolated(format!(
            "first chain must have more than one element, got {n}"
        )));
    }
    if m <= level as usize + 1 {
        return Err(Error::PreconditionViolated(format!(
            "second chain must have more than L+1 = {} elements, got {m}",
            level + 1
        )));
    }
    verify_chain(space, c, None)?;
    verify_chain(space, c2, None)?;
    // Every element of c must meet the Minus halfspace of min(c2): its
    // parameter image must reach below the pole.
    let first2 = &c2.curtains[0];
    for (i, a) in c.curtains.iter().enumerate() {
        let Some(img) = curtain_param_image(space, first2, a) else {
            return Err(Error::PreconditionViolated(format!(
                "cannot decide how element {i} sits against min(c')"
            )));
        };
        let (lo, _) = first2.pole_interval();
        if img.lo >= lo - space.eps {
            return Err(Error::PreconditionViolated(format!(
                "element {i} of the first chain does not meet the Minus side of min(c')"
            )));
        }
    }
    let mut curtains: Vec<Curtain> = c.curtains[..n - 1].to_vec();
    curtains.extend(c2.curtains[level as usize + 1..].iter().cloned());
    let glued = Chain {
        curtains,
        status: ChainStatus::Unverified,
        level: Some(level),
    };
    debug_assert_eq!(glued.len(), n + m - level as usize - 2);
    let status = verify_chain(space, &glued, None)?;
    Ok(Chain { status, ..glued })
}

/// First and last parameters at which the geodesic `[x, y]` crosses `h`,
/// found by scanning and bisection refinement.
fn crossing_interval(
    space: &Space,
    g: &Arc<spaces::Geodesic>,
    h: &Curtain,
) -> Result<(f64, f64)> {
    // Exact route when h's parameter image along g is available.
    let probe = curtain_at(space, g, g.length() / 2.0).ok();
    if let Some(center) = probe {
        if let Some(map) = spaces::common_line(space, &center.base, &h.base, space.eps.max(1e-9))
        {
            let a = map.apply(h.r - POLE_HALF);
            let b = map.apply(h.r + POLE_HALF);
            return Ok((a.min(b).max(0.0), a.max(b).min(g.length())));
        }
    }
    let len = g.length();
    let steps = 256;
    let mut first = None;
    let mut last = None;
    let mut prev_side = None;
    for i in 0..=steps {
        let t = len * i as f64 / steps as f64;
        let p = spaces::evaluate(space, g, t)?;
        let s = side(space, h, &p)?;
        if s == Side::On {
            if first.is_none() {
                first = Some(t);
            }
            last = Some(t);
        }
        prev_side = Some(s);
    }
    let _ = prev_side;
    let (Some(mut a), Some(mut b)) = (first, last) else {
        return Err(Error::PreconditionViolated(
            "geodesic does not cross the curtain".into(),
        ));
    };
    // Refine both ends by bisection.
    let refine = |mut inside: f64, mut outside: f64| -> Result<f64> {
        for _ in 0..50 {
            let mid = 0.5 * (inside + outside);
            let p = spaces::evaluate(space, g, mid)?;
            if side(space, h, &p)? == Side::On {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    };
    if a > 0.0 {
        a = refine(a, (a - len / steps as f64).max(0.0))?;
    }
    if b < len {
        b = refine(b, (b + len / steps as f64).min(len))?;
    }
    Ok((a, b))
}

/// Replaces a long chain separating `x` from `y` by an `L`-chain dual to
/// `[x, y]`: one block of `4L + 10` input curtains yields one dual pair, and
/// the per-block pairs are glued. Output length is at least
/// `floor(|c| / (4L+10)) + 1`.
pub fn dualize_chain(
    space: &Space,
    c: &Chain,
    x: &Point,
    y: &Point,
    level: u32,
) -> Result<Chain> {
    let block = 4 * level as usize + 10;
    if c.len() < block {
        return Err(Error::ChainTooShort {
            need: block,
            got: c.len(),
        });
    }
    for (i, h) in c.curtains.iter().enumerate() {
        if !separates(space, h, &[*x], &[*y])? {
            return Err(Error::PreconditionViolated(format!(
                "element {i} does not separate x from y"
            )));
        }
    }
    let n_blocks = c.len() / block;
    let g = Arc::new(spaces::geodesic(space, x, y, GeodesicKind::Segment)?);
    // Orient the chain along [x, y] by first-crossing parameter.
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(c.len());
    for (i, h) in c.curtains.iter().enumerate() {
        let (a, _) = crossing_interval(space, &g, h)?;
        order.push((a, i));
    }
    order.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let mut result: Option<Chain> = None;
    for blk in 0..n_blocks {
        let ids = &order[blk * block..(blk + 1) * block];
        // Entry of the block's early curtain and exit of its late curtain
        // bound a stretch of [x, y] long enough for a dual chain of 2L+1.
        let early = &c.curtains[ids[2].1];
        let late = &c.curtains[ids[block - 3].1];
        let (a_t, _) = crossing_interval(space, &g, early)?;
        let (_, b_t) = crossing_interval(space, &g, late)?;
        let a_pt = spaces::evaluate(space, &g, a_t)?;
        let b_pt = spaces::evaluate(space, &g, b_t)?;
        let inner = dual_chain(space, &a_pt, &b_pt)?;
        if inner.len() < 2 * level as usize + 1 {
            return Err(Error::PreconditionViolated(format!(
                "block {blk} spans only {} dual curtains, need {}",
                inner.len(),
                2 * level + 1
            )));
        }
        // Middle picks skip `level` curtains at each end of the block's dual
        // chain, keeping the pair clear of the block boundary.
        let pick1 = &inner.curtains[level as usize];
        let pick2 = &inner.curtains[inner.len() - 1 - level as usize];
        // Re-anchor the picks on the full geodesic [x, y].
        let offset = spaces::project(space, &a_pt, &g)?.t;
        let mk = |p: &Curtain| curtain_at(space, &g, offset + p.r);
        let pair = Chain {
            curtains: vec![mk(pick1)?, mk(pick2)?],
            status: ChainStatus::DualDisjointPoles,
            level: Some(level),
        };
        result = Some(match result {
            None => pair,
            Some(acc) => glue_disjoint_chains(space, &acc, &pair)?,
        });
    }
    let out = result.expect("at least one block");
    // The output must still separate x from y.
    for h in &out.curtains {
        debug_assert!(separates(space, h, &[*x], &[*y])?);
    }
    verify_chain(space, &out, None)?;
    Ok(Chain {
        level: Some(level),
        ..out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> Space {
        Space::euclidean(1).unwrap()
    }

    #[test]
    fn dual_chain_matches_ceiling() {
        let s = e1();
        let x = Point::euclidean(&[0.0]);
        let y = Point::euclidean(&[2.5]);
        let c = dual_chain(&s, &x, &y).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.curtains[0].r - (0.5 + 0.5 / 3.0)).abs() < 1e-9);
        assert!((c.curtains[1].r - (1.5 + 1.0 / 3.0)).abs() < 1e-9);
        for h in &c.curtains {
            assert!(separates(&s, h, &[x], &[y]).unwrap());
        }
        assert_eq!(verify_chain(&s, &c, None).unwrap(), ChainStatus::DualDisjointPoles);
    }

    #[test]
    fn dual_chain_integer_distance_adjustment() {
        let s = e1();
        let x = Point::euclidean(&[0.0]);
        let y = Point::euclidean(&[3.0]);
        let c = dual_chain(&s, &x, &y).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.curtains[0].r - 0.75).abs() < 1e-9);
        assert!((c.curtains[1].r - 2.0).abs() < 1e-9);
        for h in &c.curtains {
            assert!(separates(&s, h, &[x], &[y]).unwrap());
        }
    }

    #[test]
    fn short_distance_gives_empty_chain() {
        let s = e1();
        let c = dual_chain(&s, &Point::euclidean(&[0.0]), &Point::euclidean(&[0.8])).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn glue_disjoint_line_chains() {
        let s = e1();
        let g = Arc::new(
            spaces::geodesic(
                &s,
                &Point::euclidean(&[0.0]),
                &Point::euclidean(&[1.0]),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let mk = |r: f64| curtain_at(&s, &g, r).unwrap();
        let c = Chain {
            curtains: vec![mk(0.0), mk(3.0)],
            status: ChainStatus::DualDisjointPoles,
            level: Some(0),
        };
        let c2 = Chain {
            curtains: vec![mk(6.0), mk(9.0)],
            status: ChainStatus::DualDisjointPoles,
            level: Some(0),
        };
        let glued = glue_disjoint_chains(&s, &c, &c2).unwrap();
        assert_eq!(glued.len(), 3);
        let rs: Vec<f64> = glued.curtains.iter().map(|h| h.r).collect();
        assert_eq!(rs, vec![0.0, 6.0, 9.0]);

        // Reversed containment fails.
        assert!(glue_disjoint_chains(&s, &c2, &c).is_err());
    }

    #[test]
    fn glue_chains_cardinality() {
        let s = e1();
        let g = Arc::new(
            spaces::geodesic(
                &s,
                &Point::euclidean(&[0.0]),
                &Point::euclidean(&[1.0]),
                GeodesicKind::Line,
            )
            .unwrap(),
        );
        let mk = |r: f64| curtain_at(&s, &g, r).unwrap();
        // n = 3 curtains, all reaching below the first pole of the second
        // chain, then m = 4 continuing to the right.
        let c = Chain {
            curtains: vec![mk(0.0), mk(2.0), mk(3.2)],
            status: ChainStatus::DualDisjointPoles,
            level: Some(1),
        };
        let c2 = Chain {
            curtains: vec![mk(4.5), mk(7.5), mk(10.5), mk(13.5)],
            status: ChainStatus::DualDisjointPoles,
            level: Some(1),
        };
        let glued = glue_chains(&s, &c, &c2, 1).unwrap();
        assert_eq!(glued.len(), 3 + 4 - 1 - 2);

        // m = L + 1 fails.
        let small = Chain {
            curtains: vec![mk(20.0), mk(23.0)],
            status: ChainStatus::DualDisjointPoles,
            level: Some(1),
        };
        assert!(glue_chains(&s, &c, &small, 1).is_err());
        // n = 1 fails.
        let single = Chain {
            curtains: vec![mk(0.0)],
            status: ChainStatus::DualDisjointPoles,
            level: Some(1),
        };
        assert!(glue_chains(&s, &single, &c2, 1).is_err());
    }

    #[test]
    fn dualize_line_chain() {
        let s = e1();
        let x = Point::euclidean(&[0.0]);
        let y = Point::euclidean(&[14.0]);
        // A 10-element chain separating x from y (L = 0 block size).
        let g = Arc::new(
            spaces::geodesic(&s, &x, &Point::euclidean(&[1.0]), GeodesicKind::Line).unwrap(),
        );
        let curtains: Vec<Curtain> = (0..10)
            .map(|i| curtain_at(&s, &g, 1.0 + 1.2 * i as f64).unwrap())
            .collect();
        let c = Chain {
            curtains,
            status: ChainStatus::DualDisjointPoles,
            level: Some(0),
        };
        let out = dualize_chain(&s, &c, &x, &y, 0).unwrap();
        assert!(out.len() >= 2);
        for h in &out.curtains {
            assert!(separates(&s, h, &[x], &[y]).unwrap());
        }
        // Dual to [x, y]: poles inside (0, 14).
        for h in &out.curtains {
            assert!(h.r > 0.0 && h.r < 14.0);
        }
    }

    #[test]
    fn dualize_rejects_short_chains() {
        let s = e1();
        let x = Point::euclidean(&[0.0]);
        let y = Point::euclidean(&[10.0]);
        let g = Arc::new(
            spaces::geodesic(&s, &x, &Point::euclidean(&[1.0]), GeodesicKind::Line).unwrap(),
        );
        let curtains: Vec<Curtain> = (0..3)
            .map(|i| curtain_at(&s, &g, 2.0 + 2.0 * i as f64).unwrap())
            .collect();
        let c = Chain {
            curtains,
            status: ChainStatus::DualDisjointPoles,
            level: Some(0),
        };
        assert!(matches!(
            dualize_chain(&s, &c, &x, &y, 0),
            Err(Error::ChainTooShort { .. })
        ));
    }
}
