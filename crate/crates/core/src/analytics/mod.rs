//! Measurements built on the solver: energy defect and its σ-scaling,
//! bilinear and defect constants, analytic-radius tracking and the radius
//! schedule for long horizons.

pub mod bilinear;
pub mod calibration;
pub mod defect;
pub mod radius;
pub mod schedule;

pub use bilinear::{calibrate_bilinear_constant, BilinearCalibration};
pub use calibration::Calibration;
pub use defect::{
    defect_scaling_fit, fit_defect_slope, measure_defect, trilinear_defect_rate,
    ConservationReport, ScalingFit,
};
pub use radius::{estimate_radius, track_radius, BandPolicy, RadiusEstimate, RadiusFit};
pub use schedule::{schedule_sigma, ScheduleResult};
