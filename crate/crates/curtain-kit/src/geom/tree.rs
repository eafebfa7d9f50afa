//! Finite metric trees: weighted, connected, acyclic graphs whose points are
//! vertices or interior positions on edges.
//!
//! Projections to paths are gates and every distance below is an exact
//! closed form, which is what makes curtain membership decidable on trees.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricTree {
    names: Vec<String>,
    edges: Vec<TreeEdge>,
    #[serde(skip)]
    adj: Vec<Vec<(usize, usize)>>, // vertex -> (edge id, other endpoint)
    #[serde(skip)]
    dist_vv: Vec<Vec<f64>>,
}

/// A point of a metric tree in canonical form: `Edge` offsets are strictly
/// inside `(0, len)`, endpoints are stored as `Vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TreePoint {
    Vertex(usize),
    Edge { edge: usize, offset: f64 },
}

impl MetricTree {
    /// Builds a tree from named weighted edges, validating connectivity,
    /// acyclicity and positive weights.
    pub fn from_edges(edge_list: &[(String, String, f64)]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let id = |names: &mut Vec<String>, n: &str| -> usize {
            if let Some(i) = names.iter().position(|x| x == n) {
                i
            } else {
                names.push(n.to_string());
                names.len() - 1
            }
        };
        let mut edges = Vec::new();
        for (a, b, len) in edge_list {
            if *len <= 0.0 || !len.is_finite() {
                return Err(Error::ValidationError(format!(
                    "edge {a}-{b} has non-positive length {len}"
                )));
            }
            let u = id(&mut names, a);
            let v = id(&mut names, b);
            if u == v {
                return Err(Error::ValidationError(format!("self-loop at {a}")));
            }
            edges.push(TreeEdge { u, v, len: *len });
        }
        if names.is_empty() {
            return Err(Error::ValidationError("empty tree".into()));
        }
        if edges.len() + 1 != names.len() {
            return Err(Error::ValidationError(format!(
                "{} edges on {} vertices: not a tree",
                edges.len(),
                names.len()
            )));
        }
        let mut tree = MetricTree {
            names,
            edges,
            adj: Vec::new(),
            dist_vv: Vec::new(),
        };
        tree.rebuild_caches();
        // Edge count is right; connectivity now implies acyclicity.
        if tree.dist_vv[0].iter().any(|d| !d.is_finite()) {
            return Err(Error::ValidationError("tree is not connected".into()));
        }
        Ok(tree)
    }

    /// Recomputes adjacency and the all-pairs vertex distances. Called after
    /// deserialisation.
    pub fn rebuild_caches(&mut self) {
        let n = self.names.len();
        let mut adj = vec![Vec::new(); n];
        for (ei, e) in self.edges.iter().enumerate() {
            adj[e.u].push((ei, e.v));
            adj[e.v].push((ei, e.u));
        }
        self.adj = adj;
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (src, row) in dist.iter_mut().enumerate() {
            row[src] = 0.0;
            let mut stack = vec![src];
            while let Some(x) = stack.pop() {
                for &(ei, y) in &self.adj[x] {
                    let d = row[x] + self.edges[ei].len;
                    if d < row[y] {
                        row[y] = d;
                        stack.push(y);
                    }
                }
            }
        }
        self.dist_vv = dist;
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.names.len())
            .filter(|&v| self.adj[v].len() == 1)
            .collect()
    }

    pub fn structurally_equal(&self, other: &MetricTree) -> bool {
        self.names == other.names
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.u == b.u && a.v == b.v && (a.len - b.len).abs() < 1e-12)
    }

    /// Canonicalises a point: edge offsets at 0 or `len` collapse to vertices.
    pub fn canonical(&self, p: TreePoint) -> Result<TreePoint> {
        match p {
            TreePoint::Vertex(v) if v < self.names.len() => Ok(p),
            TreePoint::Vertex(v) => Err(Error::MismatchedSpace(format!("no vertex {v}"))),
            TreePoint::Edge { edge, offset } => {
                let e = self
                    .edges
                    .get(edge)
                    .ok_or_else(|| Error::MismatchedSpace(format!("no edge {edge}")))?;
                if !(0.0..=e.len).contains(&offset) {
                    return Err(Error::MismatchedSpace(format!(
                        "offset {offset} outside edge of length {}",
                        e.len
                    )));
                }
                if offset <= 1e-12 {
                    Ok(TreePoint::Vertex(e.u))
                } else if offset >= e.len - 1e-12 {
                    Ok(TreePoint::Vertex(e.v))
                } else {
                    Ok(p)
                }
            }
        }
    }

    fn vertex_dist(&self, u: usize, v: usize) -> f64 {
        self.dist_vv[u][v]
    }

    /// Distance from a point to a vertex.
    pub fn dist_pv(&self, p: TreePoint, x: usize) -> f64 {
        match p {
            TreePoint::Vertex(v) => self.vertex_dist(v, x),
            TreePoint::Edge { edge, offset } => {
                let e = &self.edges[edge];
                (offset + self.vertex_dist(e.u, x))
                    .min((e.len - offset) + self.vertex_dist(e.v, x))
            }
        }
    }

    pub fn distance(&self, p: TreePoint, q: TreePoint) -> f64 {
        match (p, q) {
            (TreePoint::Vertex(a), _) => self.dist_pv(q, a),
            (_, TreePoint::Vertex(b)) => self.dist_pv(p, b),
            (
                TreePoint::Edge { edge: e1, offset: o1 },
                TreePoint::Edge { edge: e2, offset: o2 },
            ) => {
                if e1 == e2 {
                    (o1 - o2).abs()
                } else {
                    let e = &self.edges[e1];
                    (o1 + self.dist_pv(q, e.u)).min((e.len - o1) + self.dist_pv(q, e.v))
                }
            }
        }
    }

    /// Ordered vertex path from `u` to `v` (inclusive).
    fn vertex_path(&self, u: usize, v: usize) -> Vec<usize> {
        let n = self.names.len();
        let mut parent = vec![usize::MAX; n];
        parent[u] = u;
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            if x == v {
                break;
            }
            for &(_, y) in &self.adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    stack.push(y);
                }
            }
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// The geodesic from `p` to `q` as a breakpoint sequence with cumulative
    /// arc-length parameters.
    pub fn path(&self, p: TreePoint, q: TreePoint) -> Result<TreePath> {
        let p = self.canonical(p)?;
        let q = self.canonical(q)?;
        let total = self.distance(p, q);
        if total <= 1e-12 {
            return Ok(TreePath {
                nodes: vec![p],
                cum: vec![0.0],
                total: 0.0,
            });
        }
        // Same-edge interior shortcut.
        if let (TreePoint::Edge { edge: e1, offset: o1 }, TreePoint::Edge { edge: e2, offset: o2 }) =
            (p, q)
        {
            if e1 == e2 {
                return Ok(TreePath {
                    nodes: vec![p, q],
                    cum: vec![0.0, (o2 - o1).abs()],
                    total: (o2 - o1).abs(),
                });
            }
        }
        // Entry vertices: the endpoint of the carrying edge through which the
        // geodesic leaves, chosen by total length.
        let entry = |pt: TreePoint, other: TreePoint| -> usize {
            match pt {
                TreePoint::Vertex(v) => v,
                TreePoint::Edge { edge, offset } => {
                    let e = &self.edges[edge];
                    let via_u = offset + self.dist_pv(other, e.u);
                    let via_v = (e.len - offset) + self.dist_pv(other, e.v);
                    if via_u <= via_v {
                        e.u
                    } else {
                        e.v
                    }
                }
            }
        };
        let a = entry(p, q);
        let b = entry(q, p);
        let mut nodes: Vec<TreePoint> = Vec::new();
        nodes.push(p);
        for v in self.vertex_path(a, b) {
            if nodes.last() != Some(&TreePoint::Vertex(v)) {
                nodes.push(TreePoint::Vertex(v));
            }
        }
        if nodes.last() != Some(&q) {
            nodes.push(q);
        }
        if nodes.first() != Some(&p) {
            nodes.insert(0, p);
        }
        let mut cum = vec![0.0];
        for w in nodes.windows(2) {
            let d = self.distance(w[0], w[1]);
            cum.push(cum.last().unwrap() + d);
        }
        let computed_total = *cum.last().unwrap();
        debug_assert!((computed_total - total).abs() < 1e-9);
        Ok(TreePath {
            nodes,
            cum,
            total: computed_total,
        })
    }

    /// Evaluates a path at arc-length `t` from its start.
    pub fn path_point(&self, path: &TreePath, t: f64) -> TreePoint {
        if path.total <= 0.0 || t <= 0.0 {
            return path.nodes[0];
        }
        if t >= path.total {
            return *path.nodes.last().unwrap();
        }
        let i = match path
            .cum
            .binary_search_by(|c| c.partial_cmp(&t).unwrap())
        {
            Ok(i) => return path.nodes[i],
            Err(i) => i - 1,
        };
        let (a, b) = (path.nodes[i], path.nodes[i + 1]);
        let local = t - path.cum[i];
        // Locate the edge carrying the sub-segment [a, b].
        let (edge, from_u) = self.carrying_edge(a, b);
        let e = &self.edges[edge];
        let offset_a = match a {
            TreePoint::Vertex(v) => {
                if v == e.u {
                    0.0
                } else {
                    e.len
                }
            }
            TreePoint::Edge { offset, .. } => offset,
        };
        let offset = if from_u { offset_a + local } else { offset_a - local };
        self.canonical(TreePoint::Edge { edge, offset })
            .expect("interpolated point stays on edge")
    }

    /// Edge carrying the segment between two points known to be adjacent on a
    /// common edge; the flag says whether the segment runs u -> v.
    fn carrying_edge(&self, a: TreePoint, b: TreePoint) -> (usize, bool) {
        let edge_of = |p: TreePoint| match p {
            TreePoint::Edge { edge, .. } => Some(edge),
            TreePoint::Vertex(_) => None,
        };
        let edge = edge_of(a)
            .or_else(|| edge_of(b))
            .unwrap_or_else(|| match (a, b) {
                (TreePoint::Vertex(u), TreePoint::Vertex(v)) => self
                    .adj[u]
                    .iter()
                    .find(|&&(_, y)| y == v)
                    .map(|&(ei, _)| ei)
                    .expect("consecutive path vertices are adjacent"),
                _ => unreachable!(),
            });
        let e = &self.edges[edge];
        let pos = |p: TreePoint| match p {
            TreePoint::Vertex(v) => {
                if v == e.u {
                    0.0
                } else {
                    e.len
                }
            }
            TreePoint::Edge { offset, .. } => offset,
        };
        (edge, pos(b) > pos(a))
    }

    /// Gate parameter: the arc-length position on `path` closest to `x`.
    /// In a tree this is `(d(x,a) + |path| - d(x,b)) / 2`, clamped.
    pub fn gate_parameter(&self, path: &TreePath, x: TreePoint) -> f64 {
        if path.total <= 0.0 {
            return 0.0;
        }
        let a = path.nodes[0];
        let b = *path.nodes.last().unwrap();
        let t = 0.5 * (self.distance(x, a) + path.total - self.distance(x, b));
        t.clamp(0.0, path.total)
    }

    /// Positions of `points` along a common geodesic, if one carries them
    /// all. Feeds the collinearity checks used by same-base certificates.
    pub fn collinear_positions(&self, points: &[TreePoint]) -> Option<Vec<f64>> {
        if points.len() < 2 {
            return Some(vec![0.0; points.len()]);
        }
        // Find the diameter pair among the points; a common carrier must be
        // the path between the two extremes.
        let (mut bi, mut bj, mut best) = (0, 1, -1.0);
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = self.distance(points[i], points[j]);
                if d > best {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        let path = self.path(points[bi], points[bj]).ok()?;
        let mut pos = Vec::with_capacity(points.len());
        for &p in points {
            let t = self.gate_parameter(&path, p);
            if self.distance(self.path_point(&path, t), p) > 1e-9 {
                return None;
            }
            pos.push(t);
        }
        Some(pos)
    }

    /// `s`-breakpoints on `edge` of the gate parameter onto `path`
    /// (positions where one of the distance terms switches branch).
    pub fn gate_breakpoints_on_edge(&self, path: &TreePath, edge: usize) -> Vec<f64> {
        let e = &self.edges[edge];
        let ends = [path.nodes[0], *path.nodes.last().unwrap()];
        let mut s = vec![0.0, e.len];
        for p in ends {
            // s + d(u,p) = (len - s) + d(v,p)
            let k = 0.5 * (e.len + self.dist_pv(p, e.v) - self.dist_pv(p, e.u));
            if k > 0.0 && k < e.len {
                s.push(k);
            }
        }
        // Clamp crossings of the unclamped affine pieces are located by a
        // fine pass in the caller; the kinks above are the only genuine
        // non-linearities of the distance terms.
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        s
    }

    /// Gate parameter of the edge point at offset `s` on `edge`.
    pub fn gate_at_edge_offset(&self, path: &TreePath, edge: usize, s: f64) -> f64 {
        let p = self
            .canonical(TreePoint::Edge { edge, offset: s })
            .expect("offset in range");
        self.gate_parameter(path, p)
    }
}

/// A geodesic in a tree: breakpoints (endpoints and traversed vertices) with
/// cumulative arc-length.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePath {
    pub nodes: Vec<TreePoint>,
    pub cum: Vec<f64>,
    pub total: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod() -> MetricTree {
        MetricTree::from_edges(&[
            ("o".into(), "a".into(), 2.0),
            ("o".into(), "b".into(), 2.0),
            ("o".into(), "c".into(), 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn path_distance_on_chain() {
        let t = MetricTree::from_edges(&[
            ("a".into(), "b".into(), 1.0),
            ("b".into(), "c".into(), 1.0),
        ])
        .unwrap();
        let a = TreePoint::Vertex(t.vertex_id("a").unwrap());
        let c = TreePoint::Vertex(t.vertex_id("c").unwrap());
        assert_eq!(t.distance(a, c), 2.0);
        let p = t.path(a, c).unwrap();
        assert_eq!(p.total, 2.0);
        assert_eq!(
            t.path_point(&p, 1.0),
            TreePoint::Vertex(t.vertex_id("b").unwrap())
        );
    }

    #[test]
    fn tripod_gate_is_branch_point() {
        let t = tripod();
        let a = TreePoint::Vertex(t.vertex_id("a").unwrap());
        let b = TreePoint::Vertex(t.vertex_id("b").unwrap());
        let c = TreePoint::Vertex(t.vertex_id("c").unwrap());
        let o = TreePoint::Vertex(t.vertex_id("o").unwrap());
        let path = t.path(a, b).unwrap();
        assert_eq!(path.total, 4.0);
        let g = t.gate_parameter(&path, c);
        assert!((g - 2.0).abs() < 1e-12);
        assert_eq!(t.path_point(&path, g), o);
        assert!((t.distance(c, o) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_is_rejected() {
        let r = MetricTree::from_edges(&[
            ("a".into(), "b".into(), 1.0),
            ("b".into(), "c".into(), 1.0),
            ("c".into(), "a".into(), 1.0),
        ]);
        assert!(matches!(r, Err(Error::ValidationError(_))));
    }

    #[test]
    fn canonicalisation_prefers_vertices() {
        let t = tripod();
        let p = t.canonical(TreePoint::Edge { edge: 0, offset: 2.0 }).unwrap();
        assert!(matches!(p, TreePoint::Vertex(_)));
        let q = t.canonical(TreePoint::Edge { edge: 0, offset: 0.7 }).unwrap();
        assert!(matches!(q, TreePoint::Edge { .. }));
    }

    #[test]
    fn collinear_detects_shared_carrier() {
        let t = tripod();
        let a = TreePoint::Vertex(t.vertex_id("a").unwrap());
        let b = TreePoint::Vertex(t.vertex_id("b").unwrap());
        let c = TreePoint::Vertex(t.vertex_id("c").unwrap());
        let mid_a = TreePoint::Edge { edge: 0, offset: 1.0 };
        assert!(t.collinear_positions(&[a, b, mid_a]).is_some());
        assert!(t.collinear_positions(&[a, b, c]).is_none());
    }
}
