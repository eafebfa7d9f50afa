//! Model-specific geometric primitives.

pub mod hyperboloid;
pub mod linalg;
pub mod tree;
