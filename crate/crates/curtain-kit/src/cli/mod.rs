//! Command-line front end: descriptor parsing, scene rendering and the
//! deterministic suite runner.

pub mod descriptor;
pub mod render;
pub mod suites;

pub use descriptor::{
    parse_curtain, parse_geodesic, parse_isometry, parse_point, parse_space_descriptor,
    point_to_json, serialise_space,
};
pub use render::{render_scene, SceneObject};
pub use suites::{run_suite, suite_names, SuiteReport};
