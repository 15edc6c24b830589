//! Simulation of single-photon weak measurements where the pointer is the
//! photon's own energy distribution.
//!
//! A photon with a broad energy wavefunction couples, through energy
//! conservation alone, to the translational state of a two-level perfect
//! absorber sitting in a superposition of being inside and outside the
//! photon's path. Conditioned on the photon *not* being absorbed, each
//! absorber energy transition shifts the photon's energy distribution by the
//! opposite amount, and post-selection turns the shifted distribution into a
//! weak-value readout.
//!
//! Two scenarios are modeled end to end:
//!
//! * the photon incident directly on the absorber, post-selected on the
//!   absorber ending up outside the path;
//! * the absorber placed on one arm of a tuned Mach-Zehnder interferometer,
//!   post-selected on a dark-port detection — an interaction-free measurement
//!   that transfers energy to the absorber.
//!
//! Everything is computed from complex amplitudes on a uniform frequency
//! grid; no Monte-Carlo sampling is involved. The core is generic over the
//! real scalar type via [`Scalar`]; the `*64` aliases below fix `f64`, which
//! is what the stated tolerances assume.

pub mod absorber;
pub mod analysis;
pub mod error;
pub mod joint_state;
pub mod optics;
pub mod pointer_grid;
pub mod scalar;
pub mod scenarios;
pub mod selftest;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` frequency grid.
pub type FrequencyGrid64 = pointer_grid::FrequencyGrid<f64>;
/// `f64` pointer wavefunction.
pub type PointerWavefunction64 = pointer_grid::PointerWavefunction<f64>;
/// `f64` absorber parameters.
pub type AbsorberParams64 = absorber::AbsorberParams<f64>;
/// `f64` absorber state vector.
pub type AbsorberVec64 = absorber::AbsorberVec<f64>;
/// `f64` joint photon-path/absorber/pointer state.
pub type JointState64 = joint_state::JointState<f64>;
/// `f64` path-and-level amplitude vector with the pointer factored out.
pub type DiscreteVec64 = joint_state::DiscreteVec<f64>;
/// `f64` reduced absorber density matrix.
pub type AbsorberDensity64 = joint_state::AbsorberDensity<f64>;
/// `f64` observable on the (path, level) factor.
pub type Observable64 = analysis::Observable<f64>;
/// `f64` post-selection.
pub type PostSelection64 = analysis::PostSelection<f64>;
/// `f64` scenario configuration.
pub type ScenarioConfig64 = scenarios::ScenarioConfig<f64>;
/// `f64` scenario report.
pub type ScenarioReport64 = scenarios::ScenarioReport<f64>;
