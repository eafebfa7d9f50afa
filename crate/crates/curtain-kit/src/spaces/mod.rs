//! The concrete model spaces and their geodesic calculus: distances,
//! unit-speed geodesics, closest-point projection and comparison angles.
//!
//! Every operation is a pure function of immutable values. Projection is a
//! closed form in the Euclidean and hyperbolic models, a gate computation in
//! trees, and a golden-section search on the convex distance function in
//! products.

mod circumnavigate;

pub use circumnavigate::circumnavigate;

use crate::error::{Error, Result};
use crate::geom::hyperboloid as hyp;
use crate::geom::linalg::{self, V3};
use crate::geom::tree::{MetricTree, TreePath, TreePoint};

pub const DEFAULT_EPS: f64 = 1e-9;

/// Golden-section iteration cap for product projections.
pub const PROJECTION_ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone)]
pub enum Model {
    Euclidean { dim: usize },
    Hyperbolic2,
    Tree(MetricTree),
    Product(MetricTree, MetricTree),
}

/// A tagged model space together with its numeric tolerance.
#[derive(Debug, Clone)]
pub struct Space {
    pub model: Model,
    pub eps: f64,
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::ValidationError(format!(
                "euclidean dimension must be 1..3, got {dim}"
            )));
        }
        Ok(Space {
            model: Model::Euclidean { dim },
            eps: DEFAULT_EPS,
        })
    }

    pub fn hyperbolic2() -> Self {
        Space {
            model: Model::Hyperbolic2,
            eps: DEFAULT_EPS,
        }
    }

    pub fn tree(tree: MetricTree) -> Self {
        Space {
            model: Model::Tree(tree),
            eps: DEFAULT_EPS,
        }
    }

    pub fn product(a: MetricTree, b: MetricTree) -> Self {
        Space {
            model: Model::Product(a, b),
            eps: DEFAULT_EPS,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn model_name(&self) -> &'static str {
        match self.model {
            Model::Euclidean { .. } => "euclidean",
            Model::Hyperbolic2 => "hyperbolic2",
            Model::Tree(_) => "tree",
            Model::Product(..) => "product",
        }
    }
}

/// A point of a model space. Euclidean coordinates are zero-padded to three
/// entries; hyperbolic points live on the hyperboloid sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Euclidean(V3),
    Hyperboloid(V3),
    Tree(TreePoint),
    Product(TreePoint, TreePoint),
}

impl Point {
    pub fn euclidean(coords: &[f64]) -> Point {
        let mut v = [0.0; 3];
        for (i, &c) in coords.iter().take(3).enumerate() {
            v[i] = c;
        }
        Point::Euclidean(v)
    }

    /// Hyperbolic point from Poincare-disk coordinates.
    pub fn poincare(x: f64, y: f64) -> Result<Point> {
        hyp::from_poincare([x, y])
            .map(Point::Hyperboloid)
            .ok_or_else(|| Error::MismatchedSpace(format!("|({x},{y})| >= 1 is outside the disk")))
    }
}

pub fn validate_point(space: &Space, p: &Point) -> Result<()> {
    match (&space.model, p) {
        (Model::Euclidean { dim }, Point::Euclidean(v)) => {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::MismatchedSpace("non-finite coordinate".into()));
            }
            if v.iter().skip(*dim).any(|&c| c != 0.0) {
                return Err(Error::MismatchedSpace(format!(
                    "coordinates beyond dimension {dim} must vanish"
                )));
            }
            Ok(())
        }
        (Model::Hyperbolic2, Point::Hyperboloid(v)) => {
            if hyp::on_sheet(*v, space.eps) {
                Ok(())
            } else {
                Err(Error::MismatchedSpace(
                    "point violates x0^2 - x1^2 - x2^2 = 1, x0 > 0".into(),
                ))
            }
        }
        (Model::Tree(t), Point::Tree(p)) => t.canonical(*p).map(|_| ()),
        (Model::Product(a, b), Point::Product(p, q)) => {
            a.canonical(*p)?;
            b.canonical(*q)?;
            Ok(())
        }
        _ => Err(Error::MismatchedSpace(format!(
            "point {p:?} in a {} space",
            space.model_name()
        ))),
    }
}

pub fn distance(space: &Space, x: &Point, y: &Point) -> Result<f64> {
    validate_point(space, x)?;
    validate_point(space, y)?;
    Ok(match (&space.model, x, y) {
        (Model::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
            linalg::norm(linalg::sub(*b, *a))
        }
        (Model::Hyperbolic2, Point::Hyperboloid(a), Point::Hyperboloid(b)) => {
            hyp::distance(*a, *b)
        }
        (Model::Tree(t), Point::Tree(a), Point::Tree(b)) => t.distance(*a, *b),
        (Model::Product(ta, tb), Point::Product(a1, a2), Point::Product(b1, b2)) => {
            let d1 = ta.distance(*a1, *b1);
            let d2 = tb.distance(*a2, *b2);
            (d1 * d1 + d2 * d2).sqrt()
        }
        _ => unreachable!("validated above"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeodesicKind {
    Segment,
    Ray,
    Line,
}

#[derive(Debug, Clone)]
pub(crate) enum Rep {
    Euclidean { base: V3, dir: V3 },
    Hyperboloid { base: V3, dir: V3 },
    Tree(TreePath),
    Product { a: TreePath, b: TreePath, wa: f64, wb: f64 },
}

/// A unit-speed geodesic `alpha : [lo, hi] -> X` with `alpha(0)` the first
/// generating point.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub kind: GeodesicKind,
    pub lo: f64,
    pub hi: f64,
    pub(crate) rep: Rep,
}

impl Geodesic {
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub(crate) fn euclidean_frame(&self) -> Option<(V3, V3)> {
        match &self.rep {
            Rep::Euclidean { base, dir } => Some((*base, *dir)),
            _ => None,
        }
    }

    pub(crate) fn hyperboloid_frame(&self) -> Option<(V3, V3)> {
        match &self.rep {
            Rep::Hyperboloid { base, dir } => Some((*base, *dir)),
            _ => None,
        }
    }

    pub(crate) fn tree_path(&self) -> Option<&TreePath> {
        match &self.rep {
            Rep::Tree(p) => Some(p),
            _ => None,
        }
    }
}

pub fn geodesic(space: &Space, x: &Point, y: &Point, kind: GeodesicKind) -> Result<Geodesic> {
    validate_point(space, x)?;
    validate_point(space, y)?;
    let d = distance(space, x, y)?;
    if d <= space.eps && kind != GeodesicKind::Segment {
        return Err(Error::PreconditionViolated(
            "rays and lines need two distinct generating points".into(),
        ));
    }
    let (lo, hi) = match kind {
        GeodesicKind::Segment => (0.0, d),
        GeodesicKind::Ray => (0.0, f64::INFINITY),
        GeodesicKind::Line => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let rep = match (&space.model, x, y) {
        (Model::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
            let dir = if d <= space.eps {
                [1.0, 0.0, 0.0]
            } else {
                linalg::scale(linalg::sub(*b, *a), 1.0 / d)
            };
            Rep::Euclidean { base: *a, dir }
        }
        (Model::Hyperbolic2, Point::Hyperboloid(a), Point::Hyperboloid(b)) => {
            let dir = hyp::direction(*a, *b).unwrap_or_else(|| {
                let probe = hyp::from_poincare([0.1, 0.0]).unwrap();
                hyp::direction(*a, probe).unwrap_or([0.0, 1.0, 0.0])
            });
            Rep::Hyperboloid { base: *a, dir }
        }
        (Model::Tree(t), Point::Tree(a), Point::Tree(b)) => {
            if kind != GeodesicKind::Segment {
                return Err(Error::NoCanonicalExtension(
                    "finite trees stop at leaves or branch vertices of degree != 2".into(),
                ));
            }
            Rep::Tree(t.path(*a, *b)?)
        }
        (Model::Product(ta, tb), Point::Product(a1, a2), Point::Product(b1, b2)) => {
            if kind != GeodesicKind::Segment {
                return Err(Error::NoCanonicalExtension(
                    "product factors are finite trees; no canonical extension".into(),
                ));
            }
            let pa = ta.path(*a1, *b1)?;
            let pb = tb.path(*a2, *b2)?;
            let (wa, wb) = if d <= space.eps {
                (0.0, 0.0)
            } else {
                (pa.total / d, pb.total / d)
            };
            Rep::Product { a: pa, b: pb, wa, wb }
        }
        _ => unreachable!("validated above"),
    };
    Ok(Geodesic { kind, lo, hi, rep })
}

pub fn evaluate(space: &Space, g: &Geodesic, t: f64) -> Result<Point> {
    if t < g.lo - space.eps || t > g.hi + space.eps {
        return Err(Error::OutOfDomain {
            t,
            lo: g.lo,
            hi: g.hi,
        });
    }
    let t = t.clamp(g.lo, g.hi);
    Ok(match (&space.model, &g.rep) {
        (Model::Euclidean { .. }, Rep::Euclidean { base, dir }) => {
            Point::Euclidean(linalg::add(*base, linalg::scale(*dir, t)))
        }
        (Model::Hyperbolic2, Rep::Hyperboloid { base, dir }) => {
            Point::Hyperboloid(hyp::renormalise(hyp::evaluate(*base, *dir, t)))
        }
        (Model::Tree(tr), Rep::Tree(path)) => Point::Tree(tr.path_point(path, t)),
        (Model::Product(ta, tb), Rep::Product { a, b, wa, wb }) => {
            Point::Product(ta.path_point(a, wa * t), tb.path_point(b, wb * t))
        }
        _ => {
            return Err(Error::MismatchedSpace(
                "geodesic representation does not match the space".into(),
            ))
        }
    })
}

/// Closest-point projection data: minimising parameter, foot and distance.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub t: f64,
    pub foot: Point,
    pub dist: f64,
}

pub fn project(space: &Space, x: &Point, g: &Geodesic) -> Result<Projection> {
    validate_point(space, x)?;
    let t = match (&space.model, &g.rep, x) {
        (Model::Euclidean { .. }, Rep::Euclidean { base, dir }, Point::Euclidean(p)) => {
            linalg::dot(linalg::sub(*p, *base), *dir).clamp(g.lo, g.hi)
        }
        (Model::Hyperbolic2, Rep::Hyperboloid { base, dir }, Point::Hyperboloid(p)) => {
            hyp::project_parameter(*base, *dir, *p).clamp(g.lo, g.hi)
        }
        (Model::Tree(tr), Rep::Tree(path), Point::Tree(p)) => tr.gate_parameter(path, *p),
        (Model::Product(..), Rep::Product { .. }, Point::Product(..)) => {
            golden_section_projection(space, x, g)?
        }
        _ => {
            return Err(Error::MismatchedSpace(
                "point, geodesic and space models disagree".into(),
            ))
        }
    };
    let foot = evaluate(space, g, t)?;
    let dist = distance(space, x, &foot)?;
    Ok(Projection { t, foot, dist })
}

/// Golden-section minimisation of the convex map `t -> d(x, g(t))`.
fn golden_section_projection(space: &Space, x: &Point, g: &Geodesic) -> Result<f64> {
    let f = |t: f64| -> f64 {
        let p = evaluate(space, g, t).expect("parameter stays in domain");
        distance(space, x, &p).expect("validated")
    };
    let (mut lo, mut hi) = (g.lo, g.hi);
    if !lo.is_finite() || !hi.is_finite() {
        // Bracket the minimum by doubling steps from 0; the objective is
        // convex and proper, so growth on both sides brackets it.
        let mut r = 1.0;
        let f0 = f(0.0);
        while f(-r).min(f(r)) < f0 + r * 0.5 {
            r *= 2.0;
            if r > 1e12 {
                return Err(Error::BudgetExceeded("projection bracket expansion".into()));
            }
        }
        lo = (-r).max(g.lo);
        hi = r.min(g.hi);
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > space.eps {
        iterations += 1;
        if iterations > PROJECTION_ITERATION_CAP {
            return Err(Error::BudgetExceeded(format!(
                "golden-section cap {PROJECTION_ITERATION_CAP} reached with bracket {}",
                b - a
            )));
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// Angle at the `x`-vertex of the Euclidean comparison triangle for
/// `(x, y, z)`, via the law of cosines.
pub fn comparison_angle(space: &Space, x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let a = distance(space, x, y)?;
    let b = distance(space, x, z)?;
    if a <= space.eps {
        return Err(Error::DegenerateTriangle("x-y".into()));
    }
    if b <= space.eps {
        return Err(Error::DegenerateTriangle("x-z".into()));
    }
    let c = distance(space, y, z)?;
    let cos = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
    Ok(cos.acos())
}

/// An ordered list of points with the induced length.
#[derive(Debug, Clone)]
pub struct PathPolyline {
    pub points: Vec<Point>,
    pub length: f64,
}

impl PathPolyline {
    pub fn new(space: &Space, points: Vec<Point>) -> Result<Self> {
        let mut length = 0.0;
        for w in points.windows(2) {
            length += distance(space, &w[0], &w[1])?;
        }
        Ok(PathPolyline { points, length })
    }
}

/// Two geodesics with the same oriented image, expressed as a parameter map
/// `other(t) = self(scale * t + shift)` with `scale = +-1`.
#[derive(Debug, Clone, Copy)]
pub struct ParamMap {
    pub scale: f64,
    pub shift: f64,
}

impl ParamMap {
    pub fn apply(&self, t: f64) -> f64 {
        self.scale * t + self.shift
    }
}

/// Detects whether `g` and `h` lie on a common complete geodesic and returns
/// the map sending `h`-parameters to `g`-parameters. Points are compared
/// within `tol`.
pub fn common_line(space: &Space, g: &Geodesic, h: &Geodesic, tol: f64) -> Option<ParamMap> {
    match (&space.model, &g.rep, &h.rep) {
        (Model::Euclidean { .. }, Rep::Euclidean { base: bg, dir: dg }, Rep::Euclidean { base: bh, dir: dh }) => {
            let cross = linalg::norm(linalg::cross(*dg, *dh));
            if cross > tol {
                return None;
            }
            let off = linalg::sub(*bh, *bg);
            if linalg::norm(linalg::cross(off, *dg)) > tol * (1.0 + linalg::norm(off)) {
                return None;
            }
            let scale = if linalg::dot(*dg, *dh) >= 0.0 { 1.0 } else { -1.0 };
            let shift = linalg::dot(off, *dg);
            Some(ParamMap { scale, shift })
        }
        (Model::Hyperbolic2, Rep::Hyperboloid { base: bg, dir: dg }, Rep::Hyperboloid { base: bh, dir: dh }) => {
            let n = hyp::normal(*bg, *dg);
            // Relative tolerance: Minkowski products of far points cancel at
            // the scale of the coordinates.
            let scale_b = linalg::norm(*bh).max(1.0);
            let scale_d = linalg::norm(*dh).max(1.0);
            if linalg::mdot(*bh, n).abs() > tol * 10.0 * scale_b
                || linalg::mdot(*dh, n).abs() > tol * 10.0 * scale_d
            {
                return None;
            }
            let shift = hyp::project_parameter(*bg, *dg, *bh);
            let probe = hyp::evaluate(*bh, *dh, 0.25);
            let fwd = hyp::project_parameter(*bg, *dg, probe);
            let scale = if fwd >= shift { 1.0 } else { -1.0 };
            Some(ParamMap { scale, shift })
        }
        (Model::Tree(t), Rep::Tree(pg), Rep::Tree(ph)) => {
            let pts = [
                pg.nodes[0],
                *pg.nodes.last().unwrap(),
                ph.nodes[0],
                *ph.nodes.last().unwrap(),
            ];
            let pos = t.collinear_positions(&pts)?;
            // Positions are measured along the spanning path; translate into
            // g-parameters using g's own endpoints.
            let g_start = pos[0];
            let g_end = pos[1];
            if (g_end - g_start).abs() < 1e-12 {
                return None;
            }
            let to_g = |p: f64| (p - g_start) / (g_end - g_start) * pg.total;
            let h_start = to_g(pos[2]);
            let h_end = to_g(pos[3]);
            if ph.total < 1e-12 {
                return None;
            }
            let scale = if h_end >= h_start { 1.0 } else { -1.0 };
            Some(ParamMap {
                scale,
                shift: h_start,
            })
        }
        _ => None,
    }
}

pub fn points_close(space: &Space, x: &Point, y: &Point, tol: f64) -> bool {
    distance(space, x, y).map(|d| d <= tol).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_pythagoras() {
        let s = Space::euclidean(2).unwrap();
        let d = distance(&s, &Point::euclidean(&[0.0, 0.0]), &Point::euclidean(&[3.0, 4.0]))
            .unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn product_l2_combination() {
        let chain = MetricTree::from_edges(&[
            ("a".into(), "b".into(), 1.0),
            ("b".into(), "c".into(), 1.0),
        ])
        .unwrap();
        let s = Space::product(chain.clone(), chain);
        let a = Point::Product(TreePoint::Vertex(0), TreePoint::Vertex(0));
        let c = Point::Product(TreePoint::Vertex(2), TreePoint::Vertex(2));
        let d = distance(&s, &a, &c).unwrap();
        assert!((d - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn euclidean_segment_evaluation() {
        let s = Space::euclidean(2).unwrap();
        let g = geodesic(
            &s,
            &Point::euclidean(&[0.0, 0.0]),
            &Point::euclidean(&[2.0, 0.0]),
            GeodesicKind::Segment,
        )
        .unwrap();
        assert_eq!(g.domain(), (0.0, 2.0));
        let p = evaluate(&s, &g, 1.5).unwrap();
        assert_eq!(p, Point::euclidean(&[1.5, 0.0]));
        assert!(matches!(
            evaluate(&s, &g, 2.5),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn hyperbolic_midpoint_equidistant() {
        let s = Space::hyperbolic2();
        let x = Point::poincare(0.3, 0.1).unwrap();
        let y = Point::poincare(-0.2, 0.4).unwrap();
        let d = distance(&s, &x, &y).unwrap();
        let g = geodesic(&s, &x, &y, GeodesicKind::Segment).unwrap();
        let m = evaluate(&s, &g, d / 2.0).unwrap();
        assert!((distance(&s, &x, &m).unwrap() - d / 2.0).abs() < 1e-9);
        assert!((distance(&s, &m, &y).unwrap() - d / 2.0).abs() < 1e-9);
        let end = evaluate(&s, &g, d).unwrap();
        assert!(points_close(&s, &end, &y, 1e-9));
    }

    #[test]
    fn tree_path_through_branch() {
        let t = MetricTree::from_edges(&[
            ("a".into(), "b".into(), 1.0),
            ("b".into(), "c".into(), 1.0),
        ])
        .unwrap();
        let a = Point::Tree(TreePoint::Vertex(t.vertex_id("a").unwrap()));
        let c = Point::Tree(TreePoint::Vertex(t.vertex_id("c").unwrap()));
        let b = Point::Tree(TreePoint::Vertex(t.vertex_id("b").unwrap()));
        let s = Space::tree(t);
        let g = geodesic(&s, &a, &c, GeodesicKind::Segment).unwrap();
        assert_eq!(g.domain(), (0.0, 2.0));
        assert_eq!(evaluate(&s, &g, 1.0).unwrap(), b);
    }

    #[test]
    fn tree_ray_has_no_extension() {
        let t = MetricTree::from_edges(&[("a".into(), "b".into(), 3.0)]).unwrap();
        let a = Point::Tree(TreePoint::Vertex(0));
        let b = Point::Tree(TreePoint::Vertex(1));
        let s = Space::tree(t);
        assert!(matches!(
            geodesic(&s, &a, &b, GeodesicKind::Ray),
            Err(Error::NoCanonicalExtension(_))
        ));
    }

    #[test]
    fn orthogonal_projection_examples() {
        let s = Space::euclidean(2).unwrap();
        let g = geodesic(
            &s,
            &Point::euclidean(&[0.0, 0.0]),
            &Point::euclidean(&[10.0, 0.0]),
            GeodesicKind::Segment,
        )
        .unwrap();
        let p = project(&s, &Point::euclidean(&[3.0, 4.0]), &g).unwrap();
        assert!((p.t - 3.0).abs() < 1e-12);
        assert!((p.dist - 4.0).abs() < 1e-12);
        assert_eq!(p.foot, Point::euclidean(&[3.0, 0.0]));

        // A point on the geodesic projects to itself.
        let q = project(&s, &Point::euclidean(&[6.0, 0.0]), &g).unwrap();
        assert!(q.dist < 1e-12);
    }

    #[test]
    fn tripod_projection_gate() {
        let t = MetricTree::from_edges(&[
            ("o".into(), "a".into(), 2.0),
            ("o".into(), "b".into(), 2.0),
            ("o".into(), "c".into(), 2.0),
        ])
        .unwrap();
        let tip = |tree: &MetricTree, n: &str| Point::Tree(TreePoint::Vertex(tree.vertex_id(n).unwrap()));
        let (a, b, c) = (tip(&t, "a"), tip(&t, "b"), tip(&t, "c"));
        let s = Space::tree(t);
        let g = geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap();
        let p = project(&s, &c, &g).unwrap();
        assert!((p.t - 2.0).abs() < 1e-12);
        assert!((p.dist - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_projection_matches_factor_projection() {
        let chain = MetricTree::from_edges(&[
            ("a".into(), "b".into(), 2.0),
            ("b".into(), "c".into(), 2.0),
        ])
        .unwrap();
        let s = Space::product(chain.clone(), chain);
        // Geodesic along the first factor only; projecting (x1, y) recovers
        // the first-factor gate.
        let a = Point::Product(TreePoint::Vertex(0), TreePoint::Vertex(1));
        let b = Point::Product(TreePoint::Vertex(2), TreePoint::Vertex(1));
        let g = geodesic(&s, &a, &b, GeodesicKind::Segment).unwrap();
        let x = Point::Product(TreePoint::Edge { edge: 0, offset: 1.0 }, TreePoint::Vertex(2));
        let p = project(&s, &x, &g).unwrap();
        assert!((p.t - 1.0).abs() < 1e-6);
    }

    #[test]
    fn comparison_angles() {
        let s = Space::euclidean(2).unwrap();
        let x = Point::euclidean(&[0.0, 0.0]);
        let y = Point::euclidean(&[1.0, 0.0]);
        let z = Point::euclidean(&[0.0, 1.0]);
        let a = comparison_angle(&s, &x, &y, &z).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(matches!(
            comparison_angle(&s, &x, &x, &z),
            Err(Error::DegenerateTriangle(_))
        ));
    }

    #[test]
    fn hyperbolic_comparison_angle_dominates_interior() {
        // Comparison angles shrink to the interior angle as the triangle
        // shrinks; verify against the hyperbolic law of cosines.
        let s = Space::hyperbolic2();
        let x = Point::poincare(0.0, 0.0).unwrap();
        let interior = 1.1_f64;
        let mut last_gap = f64::INFINITY;
        for &scale in &[0.5_f64, 0.25, 0.125] {
            let y = {
                let g = geodesic(&s, &x, &Point::poincare(0.5, 0.0).unwrap(), GeodesicKind::Segment)
                    .unwrap();
                evaluate(&s, &g, scale).unwrap()
            };
            let z = {
                let dir = Point::poincare(0.5 * interior.cos(), 0.5 * interior.sin()).unwrap();
                let g = geodesic(&s, &x, &dir, GeodesicKind::Segment).unwrap();
                evaluate(&s, &g, scale).unwrap()
            };
            let side = crate::geom::hyperboloid::side_from_angle(scale, scale, interior);
            let yz = distance(&s, &y, &z).unwrap();
            assert!((yz - side).abs() < 1e-9);
            let comp = comparison_angle(&s, &x, &y, &z).unwrap();
            assert!(comp >= interior - 1e-9);
            let gap = comp - interior;
            assert!(gap <= last_gap + 1e-12);
            last_gap = gap;
        }
        assert!(last_gap < 0.01);
    }

    #[test]
    fn common_line_detection() {
        let s = Space::euclidean(2).unwrap();
        let g = geodesic(
            &s,
            &Point::euclidean(&[0.0, 0.0]),
            &Point::euclidean(&[1.0, 0.0]),
            GeodesicKind::Line,
        )
        .unwrap();
        let h = geodesic(
            &s,
            &Point::euclidean(&[3.0, 0.0]),
            &Point::euclidean(&[2.0, 0.0]),
            GeodesicKind::Segment,
        )
        .unwrap();
        let map = common_line(&s, &g, &h, 1e-9).unwrap();
        assert_eq!(map.scale, -1.0);
        assert!((map.apply(0.0) - 3.0).abs() < 1e-12);
        let k = geodesic(
            &s,
            &Point::euclidean(&[0.0, 1.0]),
            &Point::euclidean(&[1.0, 1.0]),
            GeodesicKind::Segment,
        )
        .unwrap();
        assert!(common_line(&s, &g, &k, 1e-9).is_none());
    }
}
