//! Conditional selective inference for stepwise feature selection.
//!
//! The test statistic for a selected coefficient is restricted to a line
//! `y(z) = a + b z` through the observed response, and the set of `z` on
//! which the selector reproduces its observed output is traced exactly by
//! walking the breakpoints of the selector along that line. The resulting
//! truncated-normal pivot yields selective p-values and confidence
//! intervals.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases fix the common double-precision case.

pub mod cv;
pub mod error;
pub mod experiment;
pub mod fbsfs;
pub mod homotopy;
pub mod inference;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod real;
pub mod sfs;

pub use cv::{run_si_sfs_cv, CvOutcome};
pub use error::{Error, Result};
pub use fbsfs::{aic, run_fbsfs, FbStart};
pub use homotopy::{
    compute_truncation_region_fbsfs, compute_truncation_region_sfs, test_direction, HomotopyConfig, LineParam,
};
pub use inference::{
    data_split_inference, run_si_fbsfs, run_si_fbsfs_modes, run_si_sfs, run_si_sfs_modes, InferenceResult, Method,
};
pub use model::{ConditioningMode, Covariance, Dataset, FeatureSet, History, Interval, Matrix, Region, Signs};
pub use real::Real;
pub use sfs::{forward_path, run_sfs, selected_set, ForwardPath};

pub type Region64 = Region<f64>;
pub type Interval64 = Interval<f64>;
pub type Matrix64 = Matrix<f64>;
pub type Dataset64 = Dataset<f64>;
pub type Covariance64 = Covariance<f64>;
pub type LineParam64 = LineParam<f64>;
pub type InferenceResult64 = InferenceResult<f64>;
pub type HomotopyConfig64 = HomotopyConfig<f64>;
