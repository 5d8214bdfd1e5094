//! Wehrl moments and the geometric measure of entanglement (GME) of
//! symmetric multiqubit pure states, with three estimators of the GME from a
//! truncated moment sequence: bare moment ratios, E-algorithm acceleration
//! and a trained feed-forward regressor.

pub mod accel;
pub mod ann;
pub mod dataset;
pub mod config;
pub mod error;
pub mod gme;
pub mod metrics;
pub mod moments;
pub mod numeric;
pub mod permanent;
pub mod quadrature;
pub mod states;

pub use accel::{accel_estimate, e_algorithm};
pub use error::{Error, Result};
pub use gme::{gme_reference, max_gme_check, GmeEstimate, Method};
pub use moments::{moments_dicke, moments_permanent, moments_quadrature, ratio_estimate, MomentSequence};
pub use states::{
    coherent_overlap, coherent_qubit, from_majorana, husimi, to_majorana, BlochDirection,
    MajoranaConstellation, SymmetricState,
};
pub use ann::{predict_gme, train, MlpModel, TrainConfig};
pub use config::Preset;
pub use dataset::{DatasetBuilder, DatasetRecord, Manifest, Subset};
pub use metrics::{compare_methods, mre, percentile_bars, relative_difference, EvalReport};
