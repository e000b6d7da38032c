//! Pressure and entropy laboratory: estimator series, the sequential
//! decomposition identity, information nets along the group's past, the
//! cavity pressure representation, and variational diagnostics.

pub mod cavity;
pub mod decompose;
pub mod entropy;
pub mod estimators;
pub mod series;
pub mod smb;

pub use cavity::{
    cavity_pressure, depth_schedule, information_net, l1_defect, InfoMode, InformationNet,
    L1Defect,
};
pub use decompose::{decomposition_check, decomposition_slots, decomposition_sweep, Slot};
pub use entropy::{entropy_decomposition, variational_gap};
pub use estimators::{pressure_sequence, strip_pressure_2d, transfer_pressure_1d};
pub use series::{ConvergenceSeries, SeriesEntry};
pub use smb::{ergodic_average, gt_prediction, smb_ratio_series};
