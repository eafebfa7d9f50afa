//! JSON wire formats: space descriptors, points, geodesics, curtains and
//! isometries. All reals are 64-bit floats; hyperbolic points are exchanged
//! in Poincare-disk coordinates and converted at the interface.

use crate::error::{Error, Result};
use crate::geom::hyperboloid as hyp;
use crate::geom::tree::{MetricTree, TreePoint};
use crate::rankone::Isometry;
use crate::spaces::{self, Geodesic, GeodesicKind, Model, Point, Space};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
enum SpaceDescriptor {
    Euclidean {
        dim: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    Hyperbolic2 {
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    Tree {
        edges: Vec<(String, String, f64)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    Product {
        #[serde(rename = "treeA")]
        tree_a: Vec<(String, String, f64)>,
        #[serde(rename = "treeB")]
        tree_b: Vec<(String, String, f64)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
}

fn json_error(e: &serde_json::Error) -> Error {
    Error::ParseError {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    }
}

/// Parses and validates a space descriptor.
pub fn parse_space_descriptor(text: &str) -> Result<Space> {
    let desc: SpaceDescriptor = serde_json::from_str(text).map_err(|e| json_error(&e))?;
    let (space, eps) = match desc {
        SpaceDescriptor::Euclidean { dim, eps } => (Space::euclidean(dim)?, eps),
        SpaceDescriptor::Hyperbolic2 { eps } => (Space::hyperbolic2(), eps),
        SpaceDescriptor::Tree { edges, eps } => (Space::tree(MetricTree::from_edges(&edges)?), eps),
        SpaceDescriptor::Product { tree_a, tree_b, eps } => (
            Space::product(
                MetricTree::from_edges(&tree_a)?,
                MetricTree::from_edges(&tree_b)?,
            ),
            eps,
        ),
    };
    match eps {
        Some(e) if e > 0.0 => Ok(space.with_eps(e)),
        Some(e) => Err(Error::ValidationError(format!(
            "eps must be positive, got {e}"
        ))),
        None => Ok(space),
    }
}

/// Serialises a space back to its descriptor text.
pub fn serialise_space(space: &Space) -> String {
    let eps = if (space.eps - spaces::DEFAULT_EPS).abs() < 1e-18 {
        None
    } else {
        Some(space.eps)
    };
    let tree_edges = |t: &MetricTree| -> Vec<(String, String, f64)> {
        t.edges()
            .iter()
            .map(|e| {
                (
                    t.vertex_name(e.u).to_string(),
                    t.vertex_name(e.v).to_string(),
                    e.len,
                )
            })
            .collect()
    };
    let desc = match &space.model {
        Model::Euclidean { dim } => SpaceDescriptor::Euclidean { dim: *dim, eps },
        Model::Hyperbolic2 => SpaceDescriptor::Hyperbolic2 { eps },
        Model::Tree(t) => SpaceDescriptor::Tree {
            edges: tree_edges(t),
            eps,
        },
        Model::Product(a, b) => SpaceDescriptor::Product {
            tree_a: tree_edges(a),
            tree_b: tree_edges(b),
            eps,
        },
    };
    serde_json::to_string(&desc).expect("descriptor serialises")
}

fn tree_point_from_json(t: &MetricTree, v: &Value) -> Result<TreePoint> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::ValidationError(format!("tree point must be an array: {v}")))?;
    let tag = arr
        .first()
        .and_then(Value::as_str)
        .ok_or_else(|| Error::ValidationError("tree point tag missing".into()))?;
    match tag {
        "vertex" => {
            let id = match arr.get(1) {
                Some(Value::String(name)) => t
                    .vertex_id(name)
                    .ok_or_else(|| Error::ValidationError(format!("unknown vertex `{name}`")))?,
                Some(Value::Number(n)) => n
                    .as_u64()
                    .ok_or_else(|| Error::ValidationError("vertex index must be unsigned".into()))?
                    as usize,
                _ => return Err(Error::ValidationError("vertex id missing".into())),
            };
            t.canonical(TreePoint::Vertex(id))
        }
        "edge" => {
            let edge = arr
                .get(1)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::ValidationError("edge index missing".into()))?
                as usize;
            let offset = arr
                .get(2)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::ValidationError("edge offset missing".into()))?;
            t.canonical(TreePoint::Edge { edge, offset })
        }
        other => Err(Error::ValidationError(format!(
            "unknown tree point tag `{other}`"
        ))),
    }
}

fn tree_point_to_json(t: &MetricTree, p: &TreePoint) -> Value {
    match p {
        TreePoint::Vertex(v) => serde_json::json!(["vertex", t.vertex_name(*v)]),
        TreePoint::Edge { edge, offset } => serde_json::json!(["edge", edge, offset]),
    }
}

/// Parses a point in the model's wire encoding.
pub fn parse_point(space: &Space, v: &Value) -> Result<Point> {
    let point = match &space.model {
        Model::Euclidean { dim } => {
            let coords: Vec<f64> =
                serde_json::from_value(v.clone()).map_err(|e| json_error(&e))?;
            if coords.len() != *dim {
                return Err(Error::ValidationError(format!(
                    "expected {dim} coordinates, got {}",
                    coords.len()
                )));
            }
            Point::euclidean(&coords)
        }
        Model::Hyperbolic2 => {
            let coords: [f64; 2] =
                serde_json::from_value(v.clone()).map_err(|e| json_error(&e))?;
            Point::poincare(coords[0], coords[1])?
        }
        Model::Tree(t) => Point::Tree(tree_point_from_json(t, v)?),
        Model::Product(a, b) => {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::ValidationError("product point must be a pair".into()))?;
            Point::Product(
                tree_point_from_json(a, &arr[0])?,
                tree_point_from_json(b, &arr[1])?,
            )
        }
    };
    spaces::validate_point(space, &point)?;
    Ok(point)
}

pub fn point_to_json(space: &Space, p: &Point) -> Value {
    match (&space.model, p) {
        (Model::Euclidean { dim }, Point::Euclidean(v)) => {
            serde_json::json!(v[..*dim].to_vec())
        }
        (Model::Hyperbolic2, Point::Hyperboloid(v)) => {
            let d = hyp::to_poincare(*v);
            serde_json::json!([d[0], d[1]])
        }
        (Model::Tree(t), Point::Tree(tp)) => tree_point_to_json(t, tp),
        (Model::Product(a, b), Point::Product(pa, pb)) => {
            serde_json::json!([tree_point_to_json(a, pa), tree_point_to_json(b, pb)])
        }
        _ => Value::Null,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicSpec {
    pub from: Value,
    pub to: Value,
    #[serde(default = "default_kind")]
    pub kind: GeodesicKind,
}

fn default_kind() -> GeodesicKind {
    GeodesicKind::Segment
}

pub fn parse_geodesic(space: &Space, v: &Value) -> Result<Geodesic> {
    let spec: GeodesicSpec = serde_json::from_value(v.clone()).map_err(|e| json_error(&e))?;
    let from = parse_point(space, &spec.from)?;
    let to = parse_point(space, &spec.to)?;
    spaces::geodesic(space, &from, &to, spec.kind)
}

/// Curtains serialise as `{geodesic spec, r}`.
pub fn parse_curtain(space: &Space, v: &Value) -> Result<crate::curtains::Curtain> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::ValidationError("curtain must be an object".into()))?;
    let gv = obj
        .get("geodesic")
        .ok_or_else(|| Error::ValidationError("curtain needs a `geodesic` field".into()))?;
    let r = obj
        .get("r")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::ValidationError("curtain needs a numeric `r`".into()))?;
    let g = Arc::new(parse_geodesic(space, gv)?);
    crate::curtains::curtain_at(space, &g, r)
}

pub fn curtain_to_json(space: &Space, h: &crate::curtains::Curtain) -> Value {
    let (lo, hi) = h.base.domain();
    let from = spaces::evaluate(space, &h.base, if lo.is_finite() { lo } else { 0.0 })
        .map(|p| point_to_json(space, &p))
        .unwrap_or(Value::Null);
    let to_t = if hi.is_finite() { hi } else { 1.0 };
    let to = spaces::evaluate(space, &h.base, to_t)
        .map(|p| point_to_json(space, &p))
        .unwrap_or(Value::Null);
    serde_json::json!({
        "geodesic": {"from": from, "to": to, "kind": h.base.kind},
        "r": h.r,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum IsometrySpec {
    Euclidean {
        matrix: Vec<Vec<f64>>,
        translation: Vec<f64>,
    },
    Hyperbolic2 {
        matrix: Vec<Vec<f64>>,
    },
    Tree {
        perm: Vec<usize>,
    },
    Product {
        a: Vec<usize>,
        b: Vec<usize>,
        #[serde(default)]
        swap: bool,
    },
}

pub fn parse_isometry(space: &Space, v: &Value) -> Result<Isometry> {
    let spec: IsometrySpec = serde_json::from_value(v.clone()).map_err(|e| json_error(&e))?;
    let to_m3 = |m: &[Vec<f64>]| -> Result<crate::geom::linalg::M3> {
        let mut out = crate::geom::linalg::IDENTITY;
        if m.len() > 3 || m.iter().any(|r| r.len() > 3) {
            return Err(Error::ValidationError("matrix larger than 3x3".into()));
        }
        for (i, row) in m.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                out[i][j] = x;
            }
        }
        Ok(out)
    };
    let iso = match spec {
        IsometrySpec::Euclidean { matrix, translation } => {
            let mut t = [0.0; 3];
            for (i, &c) in translation.iter().take(3).enumerate() {
                t[i] = c;
            }
            Isometry::Euclidean {
                map: to_m3(&matrix)?,
                translation: t,
            }
        }
        IsometrySpec::Hyperbolic2 { matrix } => Isometry::Hyperbolic2 {
            map: to_m3(&matrix)?,
        },
        IsometrySpec::Tree { perm } => Isometry::Tree { perm },
        IsometrySpec::Product { a, b, swap } => Isometry::Product { a, b, swap },
    };
    crate::rankone::validate_isometry(space, &iso)?;
    Ok(iso)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_descriptor_roundtrip() {
        let s = parse_space_descriptor(r#"{"model":"euclidean","dim":2}"#).unwrap();
        assert_eq!(s.model_name(), "euclidean");
        let text = serialise_space(&s);
        let s2 = parse_space_descriptor(&text).unwrap();
        assert_eq!(serialise_space(&s2), text);
    }

    #[test]
    fn tree_descriptor_and_cycle_rejection() {
        let s = parse_space_descriptor(r#"{"model":"tree","edges":[["a","b",1.0],["b","c",2.0]]}"#)
            .unwrap();
        assert_eq!(s.model_name(), "tree");
        let text = serialise_space(&s);
        assert_eq!(
            parse_space_descriptor(&text)
                .map(|x| serialise_space(&x))
                .unwrap(),
            text
        );

        let cyclic = parse_space_descriptor(
            r#"{"model":"tree","edges":[["a","b",1.0],["b","c",1.0],["c","a",1.0]]}"#,
        );
        assert!(matches!(cyclic, Err(Error::ValidationError(_))));
    }

    #[test]
    fn parse_error_carries_position() {
        match parse_space_descriptor("{oops") {
            Err(Error::ParseError { line, column, .. }) => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn point_roundtrip_all_models() {
        let e = parse_space_descriptor(r#"{"model":"euclidean","dim":2}"#).unwrap();
        let p = parse_point(&e, &serde_json::json!([1.5, -2.0])).unwrap();
        assert_eq!(point_to_json(&e, &p), serde_json::json!([1.5, -2.0]));

        let h = parse_space_descriptor(r#"{"model":"hyperbolic2"}"#).unwrap();
        let p = parse_point(&h, &serde_json::json!([0.3, 0.4])).unwrap();
        let back = point_to_json(&h, &p);
        let arr = back.as_array().unwrap();
        assert!((arr[0].as_f64().unwrap() - 0.3).abs() < 1e-12);
        assert!(parse_point(&h, &serde_json::json!([0.9, 0.9])).is_err());

        let t = parse_space_descriptor(r#"{"model":"tree","edges":[["a","b",1.0],["b","c",2.0]]}"#)
            .unwrap();
        let p = parse_point(&t, &serde_json::json!(["vertex", "c"])).unwrap();
        assert_eq!(point_to_json(&t, &p), serde_json::json!(["vertex", "c"]));
        let q = parse_point(&t, &serde_json::json!(["edge", 1, 0.5])).unwrap();
        assert_eq!(point_to_json(&t, &q), serde_json::json!(["edge", 1, 0.5]));
    }

    #[test]
    fn curtain_roundtrip() {
        let s = parse_space_descriptor(r#"{"model":"euclidean","dim":2}"#).unwrap();
        let v = serde_json::json!({
            "geodesic": {"from": [0.0, 0.0], "to": [1.0, 0.0], "kind": "line"},
            "r": 5.0,
        });
        let h = parse_curtain(&s, &v).unwrap();
        assert_eq!(h.r, 5.0);
        let back = curtain_to_json(&s, &h);
        let h2 = parse_curtain(&s, &back).unwrap();
        assert!(h.same_curtain(&s, &h2, 1e-9));
    }
}
