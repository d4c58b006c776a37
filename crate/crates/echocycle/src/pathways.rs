//! Coherence-transfer pathway enumeration and per-pathway echo prediction.
//!
//! A pathway lists the coherence order (+1, -1, or 0) the state occupies in
//! each inter-pulse interval, starting from population (order 0) before the
//! preparation pulse. Pathways predict where echoes form, how their phase
//! responds to pulse phase flips, and what amplitude they carry under noisy
//! pulses and relaxation. Summing every pathway amplitude (plus the
//! relaxation source terms that longitudinal recovery injects during each
//! interval) reproduces the density-matrix propagation exactly, which makes
//! this module an independent oracle for the simulator.

use num_complex::Complex64;
use std::collections::BTreeSet;
use thiserror::Error;

use crate::mat2::{rotation, Mat2, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z};
use crate::simulator::{NoiseModel, PulseSequence, QubitState};

#[derive(Debug, Error)]
pub enum PathwayError {
    #[error("sequence has {pulses} pulses, enumeration budget allows {max}")]
    TooManyPulses { pulses: usize, max: usize },
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("invalid pathway: {0}")]
    InvalidOrders(String),
}

/// Coherence orders per interval: `orders()[0]` is always 0 (initial
/// population); entry i is the order after pulse i (1-based pulses).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pathway {
    orders: Vec<i8>,
}

impl Pathway {
    pub fn new(orders: Vec<i8>) -> Result<Self, PathwayError> {
        if orders.len() < 2 {
            return Err(PathwayError::InvalidOrders("need at least one pulse".into()));
        }
        if orders[0] != 0 {
            return Err(PathwayError::InvalidOrders("initial order must be 0".into()));
        }
        if orders.iter().any(|&p| !(-1..=1).contains(&p)) {
            return Err(PathwayError::InvalidOrders("orders must be -1, 0, or +1".into()));
        }
        Ok(Self { orders })
    }

    pub fn orders(&self) -> &[i8] {
        &self.orders
    }

    pub fn num_pulses(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn final_order(&self) -> i8 {
        *self.orders.last().unwrap()
    }

    /// Coherence-order change at each pulse.
    pub fn deltas(&self) -> Vec<i8> {
        self.orders.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Negates every order (the conjugate pathway).
    pub fn mirrored(&self) -> Pathway {
        Pathway { orders: self.orders.iter().map(|&p| -p).collect() }
    }
}

/// Inversion-pulse indices (1-based) where the coherence order changes by ±1.
///
/// The preparation pulse is excluded: it is supposed to create coherence.
pub fn classify(pathway: &Pathway) -> BTreeSet<usize> {
    pathway
        .deltas()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &d)| d.abs() == 1)
        .map(|(i, _)| i)
        .collect()
}

/// Echo delay after the last pulse: t = sum_i p_i tau_i must be positive for
/// final order -1 (negative for +1). Returns the positive delay, or None for
/// anti-echoes and non-refocusing pathways.
pub fn echo_time(pathway: &Pathway, durations: &[f64]) -> Result<Option<f64>, PathwayError> {
    let intervals = pathway.num_pulses() - 1;
    if durations.len() != intervals {
        return Err(PathwayError::LengthMismatch {
            what: "inter-pulse durations",
            expected: intervals,
            got: durations.len(),
        });
    }
    let t: f64 =
        durations.iter().enumerate().map(|(i, &d)| pathway.orders[i + 1] as f64 * d).sum();
    Ok(match pathway.final_order() {
        -1 if t > 0.0 => Some(t),
        1 if t < 0.0 => Some(-t),
        _ => None,
    })
}

/// Signal phase shift from per-pulse phase changes: sum_i dp_i dphi_i mod 2pi.
pub fn echo_phase_shift(pathway: &Pathway, phase_deltas: &[f64]) -> Result<f64, PathwayError> {
    if phase_deltas.len() != pathway.num_pulses() {
        return Err(PathwayError::LengthMismatch {
            what: "per-pulse phase deltas",
            expected: pathway.num_pulses(),
            got: phase_deltas.len(),
        });
    }
    let raw: f64 = pathway
        .deltas()
        .iter()
        .zip(phase_deltas)
        .map(|(&d, &phi)| d as f64 * phi)
        .sum();
    let tau = 2.0 * std::f64::consts::PI;
    Ok(raw.rem_euclid(tau))
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    /// Keep only pathways that form an echo after the last pulse.
    pub echo_forming_only: bool,
    /// Refuse sequences with more pulses than this (3^(pulses-1) blow-up).
    pub max_pulses: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { echo_forming_only: false, max_pulses: 16 }
    }
}

/// Enumerates every order assignment over {-1, 0, +1} for the free intervals,
/// with the final order fixed.
pub fn enumerate_pathways(
    sequence: &PulseSequence,
    final_order: i8,
    opts: &EnumerationOptions,
) -> Result<Vec<Pathway>, PathwayError> {
    let pulses = sequence.pulses.len();
    if pulses > opts.max_pulses {
        return Err(PathwayError::TooManyPulses { pulses, max: opts.max_pulses });
    }
    let durations = sequence.durations();
    let free = pulses - 1;
    let total = 3usize.pow(free as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut orders = Vec::with_capacity(pulses + 1);
        orders.push(0i8);
        let mut rest = idx;
        for _ in 0..free {
            orders.push((rest % 3) as i8 - 1);
            rest /= 3;
        }
        orders.push(final_order);
        let p = Pathway { orders };
        if opts.echo_forming_only && echo_time(&p, &durations)?.is_none() {
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

/// An echo predicted from one pathway: when it refocuses, how its phase
/// relates to the reference, and the complex amplitude it carries.
#[derive(Clone, Debug)]
pub struct EchoPrediction {
    pub pathway: Pathway,
    /// Delay of the echo after the last pulse, seconds.
    pub echo_time: f64,
    /// Inversion-pulse class of the pathway.
    pub class: BTreeSet<usize>,
    pub amplitude: Complex64,
}

/// Predicts every echo a sequence can form at the given final order.
pub fn predict_echoes(
    sequence: &PulseSequence,
    noise: &NoiseModel,
    detuning: f64,
    final_order: i8,
    opts: &EnumerationOptions,
) -> Result<Vec<EchoPrediction>, PathwayError> {
    let durations = sequence.durations();
    let mut out = Vec::new();
    for pathway in enumerate_pathways(sequence, final_order, opts)? {
        let Some(t) = echo_time(&pathway, &durations)? else {
            continue;
        };
        let amplitude = pathway_amplitude(&pathway, sequence, noise, detuning)?;
        out.push(EchoPrediction { class: classify(&pathway), echo_time: t, pathway, amplitude });
    }
    Ok(out)
}

const ORDER_INDEX: [i8; 3] = [1, -1, 0];

fn order_idx(p: i8) -> usize {
    match p {
        1 => 0,
        -1 => 1,
        _ => 2,
    }
}

/// Single-pulse transfer coefficients in the {S+, S-, Sz} operator basis,
/// computed by conjugating the basis operators with the exact rotation.
///
/// `t[out][in]` is the coefficient of basis operator `out` in U B_in U†,
/// with index order (+1, -1, 0).
pub fn transfer_matrix(flip: f64, phase: f64) -> [[Complex64; 3]; 3] {
    let u = rotation(flip, phase);
    let basis = [SIGMA_PLUS, SIGMA_MINUS, SIGMA_Z];
    let mut t = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (in_idx, b) in basis.iter().enumerate() {
        let a: Mat2 = b.conjugate_by(&u);
        t[0][in_idx] = a.e[1]; // S+ coefficient
        t[1][in_idx] = a.e[2]; // S- coefficient
        t[2][in_idx] = 0.5 * (a.e[0] - a.e[3]); // Sz coefficient
    }
    t
}

fn interval_damping(order: i8, duration: f64, noise: &NoiseModel, detuning: f64) -> Complex64 {
    if order == 0 {
        Complex64::new((-duration / noise.t1).exp(), 0.0)
    } else {
        Complex64::new(-duration / noise.t2, -(order as f64) * detuning * duration).exp()
    }
}

fn actual_transfer(seq: &PulseSequence, noise: &NoiseModel, i: usize) -> [[Complex64; 3]; 3] {
    let p = &seq.pulses[i];
    transfer_matrix(p.flip * (1.0 + noise.flip_error), p.phase + noise.phase_error)
}

/// Complex amplitude a pathway contributes to the traceless state right after
/// the last pulse, including the initial population seed (+1/2 on Sz), each
/// pulse's transfer coefficient, per-interval relaxation damping, and the
/// accumulated detuning phase.
pub fn pathway_amplitude(
    pathway: &Pathway,
    sequence: &PulseSequence,
    noise: &NoiseModel,
    detuning: f64,
) -> Result<Complex64, PathwayError> {
    let k = sequence.pulses.len();
    if pathway.num_pulses() != k {
        return Err(PathwayError::LengthMismatch {
            what: "pulses",
            expected: k,
            got: pathway.num_pulses(),
        });
    }
    let durations = sequence.durations();
    let mut amp = Complex64::new(0.5, 0.0);
    for i in 0..k {
        let t = actual_transfer(sequence, noise, i);
        amp *= t[order_idx(pathway.orders[i + 1])][order_idx(pathway.orders[i])];
        if amp.norm_sqr() == 0.0 {
            return Ok(amp);
        }
        if i < k - 1 {
            amp *= interval_damping(pathway.orders[i + 1], durations[i], noise, detuning);
        }
    }
    Ok(amp)
}

/// Traceless components of a state: rho = I/2 + c_plus S+ + c_minus S- + z Sz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracelessState {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub z: Complex64,
}

impl TracelessState {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { c_plus: z, c_minus: z, z }
    }

    pub fn from_qubit_state(s: &QubitState) -> Self {
        Self {
            c_plus: s.coherence,
            c_minus: s.coherence.conj(),
            z: Complex64::new(0.5 - s.p1, 0.0),
        }
    }

    fn add_channel(&mut self, order: i8, amp: Complex64) {
        match order {
            1 => self.c_plus += amp,
            -1 => self.c_minus += amp,
            _ => self.z += amp,
        }
    }
}

/// Coherent sum of all pathway amplitudes, including the relaxation source
/// seeds injected during each interval: longitudinal recovery adds
/// (1 - e^{-tau/T1})/2 of Sz at the end of every interval, and that
/// component then propagates through the remaining pulses like any other
/// population term.
///
/// The result equals the simulator's traceless state immediately after the
/// last pulse, which is the module's master oracle property.
pub fn pathway_sum_state(
    sequence: &PulseSequence,
    noise: &NoiseModel,
    detuning: f64,
) -> Result<TracelessState, PathwayError> {
    let k = sequence.pulses.len();
    if k > 12 {
        return Err(PathwayError::TooManyPulses { pulses: k, max: 12 });
    }
    let durations = sequence.durations();
    let transfers: Vec<[[Complex64; 3]; 3]> =
        (0..k).map(|i| actual_transfer(sequence, noise, i)).collect();

    let mut total = TracelessState::zero();

    // suffix walk: inject `seed` into channel 0 just before pulse `start`
    // and accumulate over every order assignment of the remaining pulses
    fn walk(
        total: &mut TracelessState,
        transfers: &[[[Complex64; 3]; 3]],
        durations: &[f64],
        noise: &NoiseModel,
        detuning: f64,
        start: usize,
        order: i8,
        amp: Complex64,
    ) {
        let k = transfers.len();
        if start == k {
            total.add_channel(order, amp);
            return;
        }
        for &next in &ORDER_INDEX {
            let mut a = amp * transfers[start][order_idx(next)][order_idx(order)];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if start < k - 1 {
                a *= interval_damping(next, durations[start], noise, detuning);
            }
            walk(total, transfers, durations, noise, detuning, start + 1, next, a);
        }
    }

    // pathways seeded by the initial state |0><0| = I/2 + Sz/2
    walk(
        &mut total,
        &transfers,
        &durations,
        noise,
        detuning,
        0,
        0,
        Complex64::new(0.5, 0.0),
    );
    // relaxation sources: one seed per interval
    for (j, &tau) in durations.iter().enumerate() {
        let seed = 0.5 * (1.0 - (-tau / noise.t1).exp());
        if seed == 0.0 {
            continue;
        }
        walk(
            &mut total,
            &transfers,
            &durations,
            noise,
            detuning,
            j + 1,
            0,
            Complex64::new(seed, 0.0),
        );
    }
    Ok(total)
}
