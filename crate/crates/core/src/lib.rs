//! Fingertip workspace and thumb-opposability analysis for five-finger hands
//! with optional palm fold joints.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the report pipeline and CLI use.

pub mod cases;
pub mod error;
pub mod kinematics;
pub mod overlap;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod voxelize;

pub use cases::{case_spec, catalog, normalized_params, CaseSpec, HandConfig, JointLimits, PalmJoint};
pub use error::{Error, Result};
pub use kinematics::{
    build_hand, chain_fk, dh_transform, Digit, DhRow, HandParams, KinematicChain, Theta, Transform,
};
pub use overlap::{overlap, overlap_ratio, vwrc, OverlapResult, VwrcStats};
pub use report::{
    compare, convergence_study, run_case, Analyzer, CaseReport, CaseRun, ConvergenceStudy, ExportFormat,
    ReferenceTable,
};
pub use sampling::{grid_samples, sample_axis, Coupling, JointGrid, JointRange};
pub use scalar::Scalar;
pub use voxelize::{voxel_index, volume, workspace, workspace_serial, VoxelKey, VoxelSet};

pub type DhRow64 = DhRow<f64>;
pub type Chain64 = KinematicChain<f64>;
pub type Transform64 = Transform<f64>;
pub type HandParams64 = HandParams<f64>;
pub type CaseSpec64 = CaseSpec<f64>;
pub type JointRange64 = JointRange<f64>;
pub type JointGrid64 = JointGrid<f64>;
pub type VoxelSet64 = VoxelSet<f64>;
pub type Overlap64 = OverlapResult<f64>;

pub type Chain32 = KinematicChain<f32>;
pub type VoxelSet32 = VoxelSet<f32>;
