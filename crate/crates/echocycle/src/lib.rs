//! Phase-cycling toolkit for inversion-pulse dynamical decoupling (IDD).
//!
//! The crate covers the full loop from scheme design to signal analysis:
//!
//! - [`hadamard`]: Sylvester Hadamard matrices and exact Hadamard-product
//!   orthogonality (HPO) counting over ±1 column groups.
//! - [`schemes`]: construction of two-step (TPC), complete (CPC), and
//!   Hadamard (HPC) phase-cycling schemes plus an exact echo-cancellation
//!   verifier.
//! - [`pathways`]: coherence-transfer pathway enumeration, echo times and
//!   phases, and per-pathway amplitudes that serve as an analytic oracle for
//!   the density-matrix simulator.
//! - [`simulator`]: piecewise-exact single-qubit density-matrix propagation
//!   through timed, noisy pulse sequences with relaxation and ensemble
//!   detuning averaging.
//! - [`analysis`]: decay fitting, scaling-exponent regression, effective-state
//!   reconstruction, and state fidelity.
//!
//! All randomness flows through seeded ChaCha streams; identical inputs
//! produce bit-identical outputs.

pub mod analysis;
pub mod hadamard;
pub mod mat2;
pub mod pathways;
pub mod schemes;
pub mod simulator;

pub use analysis::{fidelity, fit_decay, scaling_exponent, DecayFit, DecayModel};
pub use hadamard::{sylvester, HadamardMatrix, SignVector};
pub use schemes::{build_cpc, build_hpc, build_tpc, verify_scheme, PhaseScheme, SchemeKind};
pub use simulator::{build_sequence, NoiseModel, PulseSequence, QubitState, SequenceKind};
