//! Piecewise-exact single-qubit density-matrix propagation through timed,
//! noisy pulse sequences.
//!
//! The Hamiltonian is piecewise static: pulses are instantaneous unitaries,
//! free evolution applies the closed-form dephasing/relaxation map. No time
//! discretization error enters anywhere; traces are sampled by evolving the
//! exact state to each readout instant.
//!
//! The state is stored as the excited population P1 and the coherence C+
//! (the upper off-diagonal of the density matrix), so the trace is unity by
//! construction and free evolution is two scalar multiplications.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat2::{rotation, Mat2};
use crate::schemes::PhaseScheme;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("timing parameter must be positive, got {0}")]
    NonPositiveTiming(f64),
    #[error("inversion pulse count must be at least 1")]
    NoPulses,
    #[error("noise model invalid: {0}")]
    InvalidNoise(String),
    #[error("scheme row has {got} flags, sequence needs m+1 = {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("readout window [{start}, {end}] begins before the last pulse at {last_pulse}")]
    WindowBeforeLastPulse { start: f64, end: f64, last_pulse: f64 },
    #[error("evolution duration must be nonnegative, got {0}")]
    NegativeDuration(f64),
    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,
}

/// Single-qubit state: excited population and the C+ coherence.
///
/// The density matrix is [[1-P1, C+], [conj(C+), P1]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub p1: f64,
    pub coherence: Complex64,
}

impl QubitState {
    pub fn ground() -> Self {
        Self { p1: 0.0, coherence: Complex64::new(0.0, 0.0) }
    }

    pub fn density_matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(1.0 - self.p1, 0.0),
            self.coherence,
            self.coherence.conj(),
            Complex64::new(self.p1, 0.0),
        )
    }

    pub fn from_density_matrix(rho: &Mat2) -> Self {
        Self { p1: rho.e[3].re, coherence: rho.e[1] }
    }

    pub fn sx(&self) -> f64 {
        2.0 * self.coherence.re
    }

    pub fn sy(&self) -> f64 {
        -2.0 * self.coherence.im
    }

    pub fn sz(&self) -> f64 {
        1.0 - 2.0 * self.p1
    }

    /// det(rho) = P1(1-P1) - |C+|^2; negative values signal positivity loss.
    pub fn positivity_defect(&self) -> f64 {
        self.coherence.norm_sqr() - self.p1 * (1.0 - self.p1)
    }
}

/// One pulse: an instantaneous rotation at a point in time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Seconds from the start of the sequence.
    pub time: f64,
    /// Nominal rotation angle in radians.
    pub flip: f64,
    /// Nominal rotation axis azimuth in radians from +x.
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Cp,
    Cpmg,
    Udd,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWindow {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl ReadoutWindow {
    pub fn times(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step).round() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

/// A timed pulse train: preparation pi/2 pulse followed by m inversions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub kind: SequenceKind,
    pub m: usize,
    pub pulses: Vec<PulseSpec>,
    pub readout: ReadoutWindow,
    /// Nominal time of the desired echo.
    pub echo_time: f64,
}

impl PulseSequence {
    /// Gaps between consecutive pulses, seconds.
    pub fn durations(&self) -> Vec<f64> {
        self.pulses.windows(2).map(|w| w[1].time - w[0].time).collect()
    }

    pub fn prep_phase(&self) -> f64 {
        self.pulses[0].phase
    }

    pub fn last_pulse_time(&self) -> f64 {
        self.pulses.last().map_or(0.0, |p| p.time)
    }
}

/// Timing parameter for [`build_sequence`]: CP/CPMG take the base spacing
/// tau, UDD takes the total sequence time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    Spacing(f64),
    TotalTime(f64),
}

const READOUT_POINTS_PER_SIDE: usize = 50;

/// Builds CP, CPMG, or UDD timing.
///
/// CP:   pi/2 at 0, pi pulses at odd multiples of tau, all along +x.
/// CPMG: same timing, inversion axis orthogonal to the preparation (+y).
/// UDD:  pulses at t sin^2(n pi / (2(m+1))), all along +x; echo at t.
pub fn build_sequence(kind: SequenceKind, m: usize, timing: Timing) -> Result<PulseSequence, SimError> {
    if m == 0 {
        return Err(SimError::NoPulses);
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    match (kind, timing) {
        (SequenceKind::Cp | SequenceKind::Cpmg, Timing::Spacing(tau)) => {
            if tau.is_nan() || tau <= 0.0 {
                return Err(SimError::NonPositiveTiming(tau));
            }
            let inv_phase = if kind == SequenceKind::Cpmg { half_pi } else { 0.0 };
            let mut pulses = vec![PulseSpec { time: 0.0, flip: half_pi, phase: 0.0 }];
            for i in 1..=m {
                pulses.push(PulseSpec { time: (2 * i - 1) as f64 * tau, flip: pi, phase: inv_phase });
            }
            let echo_time = 2.0 * m as f64 * tau;
            let readout = ReadoutWindow {
                start: echo_time - tau,
                end: echo_time + tau,
                step: tau / READOUT_POINTS_PER_SIDE as f64,
            };
            Ok(PulseSequence { kind, m, pulses, readout, echo_time })
        }
        (SequenceKind::Udd, Timing::TotalTime(t)) => {
            if t.is_nan() || t <= 0.0 {
                return Err(SimError::NonPositiveTiming(t));
            }
            let mut pulses = vec![PulseSpec { time: 0.0, flip: half_pi, phase: 0.0 }];
            for n_idx in 1..=m {
                let frac = (n_idx as f64 * pi / (2.0 * (m as f64 + 1.0))).sin().powi(2);
                pulses.push(PulseSpec { time: t * frac, flip: pi, phase: 0.0 });
            }
            let last = pulses.last().unwrap().time;
            let gap = t - last;
            let readout = ReadoutWindow {
                start: last,
                end: t + gap,
                step: gap / READOUT_POINTS_PER_SIDE as f64,
            };
            Ok(PulseSequence { kind, m, pulses, readout, echo_time: t })
        }
        (SequenceKind::Cp | SequenceKind::Cpmg, Timing::TotalTime(t)) => {
            // total time 2 m tau
            build_sequence(kind, m, Timing::Spacing(t / (2.0 * m as f64)))
        }
        (SequenceKind::Udd, Timing::Spacing(tau)) => {
            // interpret as matching the CP total time with the same spacing
            build_sequence(kind, m, Timing::TotalTime(2.0 * m as f64 * tau))
        }
        (SequenceKind::Custom, _) => Err(SimError::InvalidNoise(
            "custom sequences are constructed directly, not via build_sequence".into(),
        )),
    }
}

/// Relaxation, dephasing, detuning ensemble, and systematic pulse errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Longitudinal relaxation time, seconds. May be infinite.
    pub t1: f64,
    /// Transverse relaxation time, seconds. May be infinite.
    pub t2: f64,
    /// Width of the static Gaussian detuning ensemble, rad/s.
    pub detuning_sigma: f64,
    /// Systematic fractional flip-angle error: actual = nominal * (1 + eps).
    pub flip_error: f64,
    /// Systematic pulse phase error, radians.
    pub phase_error: f64,
    /// Seed for the detuning draw stream.
    pub seed: u64,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            detuning_sigma: 0.0,
            flip_error: 0.0,
            phase_error: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.t1.is_nan() || self.t1 <= 0.0 {
            return Err(SimError::InvalidNoise(format!("T1 must be positive, got {}", self.t1)));
        }
        if self.t2.is_nan() || self.t2 <= 0.0 {
            return Err(SimError::InvalidNoise(format!("T2 must be positive, got {}", self.t2)));
        }
        if self.detuning_sigma < 0.0 {
            return Err(SimError::InvalidNoise("detuning sigma must be nonnegative".into()));
        }
        Ok(())
    }

    /// The common detuning stream shared by every scheme row.
    pub fn draw_detunings(&self, count: usize) -> Vec<f64> {
        if self.detuning_sigma == 0.0 {
            return vec![0.0; count];
        }
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.detuning_sigma).expect("sigma validated nonnegative");
        (0..count).map(|_| normal.sample(&mut rng)).collect()
    }
}

/// Exact pulse unitary on the density matrix. The scheme flag adds pi to the
/// pulse phase when negative.
pub fn apply_pulse(state: &QubitState, pulse: &PulseSpec, flag: i8, noise: &NoiseModel) -> QubitState {
    let flip = pulse.flip * (1.0 + noise.flip_error);
    let phase =
        pulse.phase + noise.phase_error + if flag < 0 { std::f64::consts::PI } else { 0.0 };
    let u = rotation(flip, phase);
    QubitState::from_density_matrix(&state.density_matrix().conjugate_by(&u))
}

/// Closed-form free evolution: C+ <- C+ e^{-i dw t - t/T2}, P1 <- P1 e^{-t/T1}.
pub fn free_evolve(
    state: &QubitState,
    duration: f64,
    detuning: f64,
    noise: &NoiseModel,
) -> Result<QubitState, SimError> {
    if duration < 0.0 {
        return Err(SimError::NegativeDuration(duration));
    }
    let damp = Complex64::new(-duration / noise.t2, -detuning * duration).exp();
    Ok(QubitState { p1: state.p1 * (-duration / noise.t1).exp(), coherence: state.coherence * damp })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl TracePoint {
    fn from_state(time: f64, s: &QubitState) -> Self {
        Self { time, sx: s.sx(), sy: s.sy(), sz: s.sz() }
    }
}

/// Propagates the ground state through all pulses of the sequence; returns
/// the state immediately after the last pulse.
pub fn propagate_to_last_pulse(
    sequence: &PulseSequence,
    row: &[i8],
    noise: &NoiseModel,
    detuning: f64,
) -> Result<QubitState, SimError> {
    if row.len() != sequence.pulses.len() {
        return Err(SimError::RowWidth { expected: sequence.pulses.len(), got: row.len() });
    }
    noise.validate()?;
    let mut state = QubitState::ground();
    for (i, pulse) in sequence.pulses.iter().enumerate() {
        state = apply_pulse(&state, pulse, row[i], noise);
        if i + 1 < sequence.pulses.len() {
            let gap = sequence.pulses[i + 1].time - pulse.time;
            state = free_evolve(&state, gap, detuning, noise)?;
        }
    }
    Ok(state)
}

/// State at an absolute time at or after the last pulse.
pub fn state_at(
    sequence: &PulseSequence,
    row: &[i8],
    noise: &NoiseModel,
    detuning: f64,
    time: f64,
) -> Result<QubitState, SimError> {
    let after = propagate_to_last_pulse(sequence, row, noise, detuning)?;
    free_evolve(&after, time - sequence.last_pulse_time(), detuning, noise)
}

#[derive(Clone, Debug)]
pub struct CircuitRun {
    /// Expectation values sampled across the readout window.
    pub trace: Vec<TracePoint>,
    /// State immediately after the last pulse.
    pub state_after_pulses: QubitState,
}

/// Runs one shot: pulses with the row's phase flags, then the sampled
/// readout window.
pub fn run_circuit(
    sequence: &PulseSequence,
    row: &[i8],
    noise: &NoiseModel,
    detuning: f64,
) -> Result<CircuitRun, SimError> {
    let last = sequence.last_pulse_time();
    if sequence.readout.start < last - 1e-12 * last.abs().max(1.0) {
        return Err(SimError::WindowBeforeLastPulse {
            start: sequence.readout.start,
            end: sequence.readout.end,
            last_pulse: last,
        });
    }
    let state_after_pulses = propagate_to_last_pulse(sequence, row, noise, detuning)?;
    let mut trace = Vec::new();
    let mut state = state_after_pulses;
    let mut t_prev = last;
    for t in sequence.readout.times() {
        let gap = (t - t_prev).max(0.0);
        state = free_evolve(&state, gap, detuning, noise)?;
        t_prev = t_prev.max(t);
        trace.push(TracePoint::from_state(t, &state));
    }
    Ok(CircuitRun { trace, state_after_pulses })
}

#[derive(Clone, Debug)]
pub struct SchemeRun {
    /// Sign-combined, row-normalized trace: sum_r sign_r <trace_r> / S.
    pub combined: Vec<TracePoint>,
    /// Ensemble-averaged trace of each scheme row.
    pub per_row: Vec<Vec<TracePoint>>,
    /// Phase-cycled expectation values (v_x, v_y, v_z): raw signed sums of
    /// the ensemble-averaged expectations at the nominal echo time.
    pub expectations: [f64; 3],
    pub echo_time: f64,
    pub ensemble_size: usize,
}

/// Runs every scheme row over a common detuning ensemble and combines the
/// results with the sign vector.
///
/// Every row sees the identical detuning draws (a common seed-derived
/// stream), so cancellations between rows are exact rather than statistical.
/// Aggregation order is fixed; results are bit-identical across runs.
pub fn run_scheme(
    sequence: &PulseSequence,
    scheme: &PhaseScheme,
    noise: &NoiseModel,
    ensemble_size: usize,
) -> Result<SchemeRun, SimError> {
    if ensemble_size == 0 {
        return Err(SimError::EmptyEnsemble);
    }
    if scheme.m + 1 != sequence.pulses.len() {
        return Err(SimError::RowWidth { expected: sequence.pulses.len(), got: scheme.m + 1 });
    }
    let detunings = noise.draw_detunings(ensemble_size);
    let times = sequence.readout.times();
    let n_samples = times.len();
    let rows = scheme.row_count();
    let inv_ens = 1.0 / ensemble_size as f64;

    let mut per_row: Vec<Vec<TracePoint>> = Vec::with_capacity(rows);
    let mut expectations = [0.0f64; 3];
    for r in 0..rows {
        let mut acc: Vec<TracePoint> =
            times.iter().map(|&t| TracePoint { time: t, sx: 0.0, sy: 0.0, sz: 0.0 }).collect();
        let mut echo_acc = [0.0f64; 3];
        for &dw in &detunings {
            let run = run_circuit(sequence, &scheme.rows[r], noise, dw)?;
            for (a, p) in acc.iter_mut().zip(&run.trace) {
                a.sx += p.sx * inv_ens;
                a.sy += p.sy * inv_ens;
                a.sz += p.sz * inv_ens;
            }
            let echo_state = free_evolve(
                &run.state_after_pulses,
                sequence.echo_time - sequence.last_pulse_time(),
                dw,
                noise,
            )?;
            echo_acc[0] += echo_state.sx() * inv_ens;
            echo_acc[1] += echo_state.sy() * inv_ens;
            echo_acc[2] += echo_state.sz() * inv_ens;
        }
        let s = scheme.sign[r] as f64;
        for k in 0..3 {
            expectations[k] += s * echo_acc[k];
        }
        per_row.push(acc);
    }

    let inv_rows = 1.0 / rows as f64;
    let mut combined: Vec<TracePoint> =
        times.iter().map(|&t| TracePoint { time: t, sx: 0.0, sy: 0.0, sz: 0.0 }).collect();
    for r in 0..rows {
        let s = scheme.sign[r] as f64 * inv_rows;
        for (c, p) in combined.iter_mut().zip(&per_row[r]) {
            c.sx += s * p.sx;
            c.sy += s * p.sy;
            c.sz += s * p.sz;
        }
    }
    for k in 0..n_samples {
        combined[k].time = times[k];
    }
    Ok(SchemeRun {
        combined,
        per_row,
        expectations,
        echo_time: sequence.echo_time,
        ensemble_size,
    })
}

/// Magnitude of the in-phase quadrature at the local extremum nearest
/// `expected_time`, searched within ±`window`.
///
/// The in-phase quadrature is the transverse component aligned with the
/// coherence created by a pi/2 pulse of the given preparation phase.
pub fn echo_amplitude(
    trace: &[TracePoint],
    expected_time: f64,
    window: f64,
    prep_phase: f64,
) -> Option<f64> {
    let ip: Vec<f64> =
        trace.iter().map(|p| p.sx * prep_phase.sin() - p.sy * prep_phase.cos()).collect();
    let mut best: Option<(f64, f64)> = None; // (distance, |amplitude|)
    for k in 0..trace.len() {
        if (trace[k].time - expected_time).abs() > window {
            continue;
        }
        let v = ip[k].abs();
        if v == 0.0 {
            continue;
        }
        let left_ok = k == 0 || v >= ip[k - 1].abs();
        let right_ok = k + 1 == trace.len() || v >= ip[k + 1].abs();
        if left_ok && right_ok {
            let dist = (trace[k].time - expected_time).abs();
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, v));
            }
        }
    }
    best.map(|(_, v)| v)
}
