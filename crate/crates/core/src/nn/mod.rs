//! Small neural-network toolkit: reverse-mode autodiff on a tape,
//! tanh MLPs, categorical distributions and Adam.
//!
//! All learner math is `f64`.

pub mod adam;
pub mod dist;
pub mod graph;
pub mod kernels;
pub mod mlp;
pub mod params;

pub use adam::{AdamConfig, AdamState, StepReport};
pub use dist::Categorical;
pub use graph::{Graph, NodeId};
pub use mlp::{orthogonal, Layer, Mlp};
pub use params::{Param, ParamId, ParameterSet};
