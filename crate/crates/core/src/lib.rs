//! Two-hop ground-to-aerial-to-satellite connectivity on spherical shells.
//!
//! Ground users (GUs) reach a LEO satellite through a relaying aerial
//! vehicle (AV). GUs form a Poisson process on the Earth's surface, AVs a
//! Matérn type-II hard-core process on a shell above it. The crate computes
//! per-hop success probabilities in closed form and checks them by Monte
//! Carlo.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.
//!
//! ```
//! use gass::{overall_connectivity, presets, Quadrature};
//!
//! let scenario = presets::reference_scenario(100.0);
//! let r = overall_connectivity(&scenario, &Quadrature::default()).unwrap();
//! assert!(r.p_overall > 0.0 && r.p_overall <= r.p1.min(r.p2));
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod geom3d;
pub mod numerics;
pub mod pointproc;
pub mod presets;
pub mod scalar;
pub mod scenario;
pub mod simcore;
pub mod sweep;

pub use analytic::{
    asp, conditional_success, laplace_interference, overall_connectivity, ConnectivityResult, Method,
    PropositionTerms, Uncertainty,
};
pub use channel::HopConfig;
pub use config::RunConfig;
pub use error::{Error, Result};
pub use geom3d::{CapAnnulus, Hop, ShellGeometry};
pub use numerics::QuadratureSpec;
pub use pointproc::DeploymentConfig;
pub use scalar::Scalar;
pub use scenario::{HopModel, Scenario};
pub use simcore::{simulate, Estimate, SimMode, SimulationReport, TrialPlan};
pub use sweep::{run_sweep, SweepRow, SweepSpec, SweepVariable};

pub type Shell = ShellGeometry<f64>;
pub type Cap = CapAnnulus<f64>;
pub type RadioConfig = HopConfig<f64>;
pub type Deployment = DeploymentConfig<f64>;
pub type Scenario64 = Scenario<f64>;
pub type Quadrature = QuadratureSpec<f64>;
pub type Connectivity = ConnectivityResult<f64>;
