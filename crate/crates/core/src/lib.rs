//! Gaussian simulation of a continuous-variable entanglement interface.
//!
//! A squeezed vacuum at 1550 nm is split on a variable beam splitter, one
//! output is frequency up-converted to 532 nm, and both outputs are measured
//! by balanced homodyne detectors whose signals are summed. The crate models
//! that chain with Gaussian covariance matrices and certifies entanglement
//! with the Duan criterion.
//!
//! - [`gaussian`]: states, symplectic maps and loss channels.
//! - [`criteria`]: quadrature variances, the Duan quantity, dB conversion.
//! - [`spectral`]: Lorentzian source spectrum and landmark calibration.
//! - [`scenario`]: the experiment pipeline, balance condition and optimiser.
//! - [`mc`]: Monte-Carlo sampling oracle.
//! - [`config`], [`report`], [`trace`]: file formats.
//! - [`cli`]: the `cvbridge` command line.

pub mod cli;
pub mod config;
pub mod criteria;
pub mod error;
pub mod gaussian;
pub mod mc;
pub mod report;
pub mod scenario;
pub mod search;
pub mod spectral;
pub mod trace;

pub use criteria::{duan, joint_variance, quadrature_variance, DuanResult, JointCombination, NoiseLevel, QuadratureObservable};
pub use error::{Error, Result};
pub use gaussian::{GaussianState, LossChannel, SymplecticMap};
pub use scenario::{analytic_variances, build_state, evaluate, optimize_vbs, phase_scan, solve_balance, ScenarioConfig};
pub use spectral::{calibrate_to_landmarks, spectrum_sweep, Landmarks, SourceSpectrumModel};
pub use trace::{Grid, TraceSeries};
