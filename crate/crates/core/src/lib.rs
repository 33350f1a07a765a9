//! Simulation, calibration and design-space search for fibre-optic joint-angle
//! sensors built around curvature-varying reflectors.
//!
//! A single fibre faces a reflector whose thickness varies around the joint.
//! Rotating the joint changes the fibre-to-reflector gap, which modulates the
//! Gaussian-coupled flux returned into the fibre and hence the detector voltage.
//!
//! - [`geometry`]: reflector thickness profiles and mounting geometry
//! - [`optics`]: Gaussian coupling model and voltage conversion
//! - [`sim`]: forward simulation of voltage-vs-angle response curves
//! - [`calibration`]: polynomial angle-from-voltage estimators and usable range
//! - [`shape`]: planar chain kinematics and shape reconstruction
//! - [`design`]: grid sweep and pattern search over reflector designs
//! - [`io`]: config, CSV, calibration files and SVG output
//!
//! Grid sweeps run on rayon when the `parallel` feature (default) is enabled
//! and fall back to a sequential loop otherwise.

// Negated comparisons are used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod design;
pub mod error;
pub mod geometry;
pub mod io;
pub mod optics;
pub mod par;
pub mod quadrature;
pub mod shape;
pub mod sim;

pub use calibration::{fit_angle_model, predict_angle, rmse, usable_range, CalibrationModel, UsableRange};
pub use design::{
    evaluate_design, evaluate_profile, grid_sweep, grid_sweep_with, pattern_search, refine_local, Axis, Design,
    DesignSpace, MountPolicy, Objective, ScoredDesign,
};
pub use error::{Error, Result};
pub use geometry::{
    export_outline, gap_at, thickness_at, MountingConfig, ProfileShape, ReflectorProfile, SurfaceFinish,
};
pub use optics::{coupled_flux, coupled_flux_quadrature, gaussian_width, theoretical_voltage, FiberSpec};
pub use par::Execution;
pub use shape::{
    angles_from_voltages, forward_kinematics, reconstruct_shape, ChainLink, ChainShape, JointChain, Pose2,
};
pub use sim::{simulate_response, sweep_surfaces, AngleGrid, NoiseModel, ResponseCurve, Sample, Sensor};
