//! Cramér–Rao bounds and CRLB-constrained power allocation for cell-free
//! MIMO integrated sensing and communication.
//!
//! The crate is layered bottom-up:
//!
//! * [`scene`]: geometry, delays, Doppler shifts and their derivatives, SINR.
//! * [`waveform`]: the OCDM pulse and its moments.
//! * [`crlb`]: Fisher blocks, weight extraction, location/velocity bounds and
//!   their gradients with respect to the allocation.
//! * [`optimizer`]: penalty/projection solvers with inexact line search.
//! * [`harness`]: scenario files, experiment runs, CSV/JSON output.

pub mod crlb;
pub mod error;
pub mod harness;
pub mod mat2;
pub mod optimizer;
pub mod quadrature;
pub mod scene;
pub mod waveform;

pub use crlb::{CrlbPair, FimBlocks, FimWeights, TraceGradient};
pub use error::{Error, Result};
pub use mat2::Mat2;
pub use optimizer::{Constraints, SolveTrace, SolverConfig, SolverKind};
pub use scene::{Scenario, SpreadParams};
pub use waveform::{WaveformMoments, WaveformSpec};
