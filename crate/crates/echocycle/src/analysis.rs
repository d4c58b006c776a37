//! Decay fitting, scaling regression, effective-state reconstruction, and
//! state fidelity.

use num_complex::Complex64;
use thiserror::Error;

use crate::mat2::{Mat2, SIGMA_X, SIGMA_Y, SIGMA_Z};
use crate::schemes::{build_cpc, build_hpc, build_tpc, PhaseScheme, SchemeError, SchemeKind};
use crate::simulator::{
    apply_pulse, build_sequence, state_at, NoiseModel, PulseSpec, QubitState, SequenceKind,
    SimError, Timing,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("times must be strictly increasing (violation at index {0})")]
    NonIncreasingTimes(usize),
    #[error("data is degenerate (flat within numerical precision)")]
    DegenerateData,
    #[error("fit did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("expectation vector is zero; effective state direction undefined")]
    ZeroVector,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayModel {
    /// A e^{-t/T}
    Mono,
    /// A e^{-(t/T)^beta}
    Stretched,
    /// A (1 - 2 e^{-(t/T)^beta}), for inversion-recovery data
    InversionRecovery,
}

#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Fitted time constant (apparent T2, or T1 for inversion recovery).
    pub t2_apparent: f64,
    /// Stretch exponent; exactly 1 for the mono model.
    pub stretch: f64,
    pub amplitude: f64,
    pub residual_rms: f64,
}

fn model_value(model: DecayModel, t: f64, a: f64, tc: f64, beta: f64) -> f64 {
    let u = if t == 0.0 { 0.0 } else { (t / tc).powf(beta) };
    match model {
        DecayModel::Mono | DecayModel::Stretched => a * (-u).exp(),
        DecayModel::InversionRecovery => a * (1.0 - 2.0 * (-u).exp()),
    }
}

/// Gradient of the model in (A, T, beta).
fn model_gradient(model: DecayModel, t: f64, a: f64, tc: f64, beta: f64) -> [f64; 3] {
    let u = if t == 0.0 { 0.0 } else { (t / tc).powf(beta) };
    let e = (-u).exp();
    let du_dt = beta * u / tc; // -du/dT actually: du/dT = -beta u / T
    let lnterm = if t == 0.0 { 0.0 } else { u * (t / tc).ln() };
    match model {
        DecayModel::Mono | DecayModel::Stretched => {
            // f = A e^{-u}
            [e, a * e * du_dt, -a * e * lnterm]
        }
        DecayModel::InversionRecovery => {
            // f = A (1 - 2 e^{-u})
            [1.0 - 2.0 * e, -2.0 * a * e * du_dt, 2.0 * a * e * lnterm]
        }
    }
}

fn solve_symmetric(h: &[[f64; 3]; 3], g: &[f64; 3], p: usize) -> Option<[f64; 3]> {
    // Gaussian elimination with partial pivoting on a p x p system.
    let mut a = [[0.0f64; 4]; 3];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = h[i][j];
        }
        a[i][p] = g[i];
    }
    for col in 0..p {
        let mut pivot = col;
        for r in (col + 1)..p {
            if a[r][col].abs() > a[pivot][col].abs() {
                pivot = r;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for r in (col + 1)..p {
            let f = a[r][col] / a[col][col];
            for c in col..=p {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..p).rev() {
        let mut s = a[i][p];
        for j in (i + 1)..p {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

fn cost(model: DecayModel, pts: &[(f64, f64)], a: f64, tc: f64, beta: f64) -> f64 {
    pts.iter().map(|&(t, y)| (y - model_value(model, t, a, tc, beta)).powi(2)).sum()
}

/// Damped least squares from one starting point. Returns (A, T, beta, cost)
/// on convergence.
fn levenberg_fit(
    model: DecayModel,
    pts: &[(f64, f64)],
    start: (f64, f64, f64),
) -> Option<(f64, f64, f64, f64)> {
    let nparams = if model == DecayModel::Mono { 2 } else { 3 };
    let (mut a, mut tc, mut beta) = start;
    let mut lambda = 1e-3;
    let mut current = cost(model, pts, a, tc, beta);
    for _ in 0..500 {
        let mut h = [[0.0f64; 3]; 3];
        let mut g = [0.0f64; 3];
        for &(t, y) in pts {
            let r = y - model_value(model, t, a, tc, beta);
            let grad = model_gradient(model, t, a, tc, beta);
            for i in 0..nparams {
                g[i] += grad[i] * r;
                for j in 0..nparams {
                    h[i][j] += grad[i] * grad[j];
                }
            }
        }
        let mut damped = h;
        for i in 0..nparams {
            damped[i][i] += lambda * h[i][i].max(1e-12);
        }
        let Some(step) = solve_symmetric(&damped, &g, nparams) else {
            return None;
        };
        let (na, ntc, nbeta) = (a + step[0], tc + step[1], beta + if nparams == 3 { step[2] } else { 0.0 });
        let feasible = ntc > 0.0 && nbeta > 0.05 && nbeta <= 3.0;
        let new_cost = if feasible { cost(model, pts, na, ntc, nbeta) } else { f64::INFINITY };
        if new_cost < current {
            let rel = (step[0].abs() / a.abs().max(1e-300))
                .max(step[1].abs() / tc.abs().max(1e-300))
                .max(if nparams == 3 { step[2].abs() / beta.abs().max(1e-300) } else { 0.0 });
            a = na;
            tc = ntc;
            beta = nbeta;
            current = new_cost;
            lambda = (lambda / 3.0).max(1e-12);
            if rel < 1e-8 {
                return Some((a, tc, beta, current));
            }
        } else {
            lambda *= 5.0;
            if lambda > 1e12 {
                // stuck: accept if already at a sharp minimum
                return Some((a, tc, beta, current));
            }
        }
    }
    Some((a, tc, beta, current))
}

/// Nonlinear least squares for decay curves with multi-start initialization:
/// 8 log-spaced time-constant starts and, for stretched models, beta starts
/// {0.8, 1.0, 1.5, 2.0}.
pub fn fit_decay(points: &[(f64, f64)], model: DecayModel) -> Result<DecayFit, AnalysisError> {
    if points.len() < 4 {
        return Err(AnalysisError::TooFewPoints { needed: 4, got: points.len() });
    }
    for (i, w) in points.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(AnalysisError::NonIncreasingTimes(i + 1));
        }
    }
    let ymax = points.iter().map(|p| p.1.abs()).fold(0.0f64, f64::max);
    let yspread = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if ymax == 0.0 || yspread < 1e-12 * ymax {
        return Err(AnalysisError::DegenerateData);
    }
    let t_max = points.last().unwrap().0;
    let t_lo = t_max / 50.0;
    let tc_starts: Vec<f64> =
        (0..8).map(|k| t_lo * (5.0 * t_max / t_lo).powf(k as f64 / 7.0)).collect();
    let beta_starts: &[f64] = match model {
        DecayModel::Mono => &[1.0],
        _ => &[0.8, 1.0, 1.5, 2.0],
    };
    let a_start = match model {
        DecayModel::InversionRecovery => points.last().unwrap().1,
        _ => points[0].1,
    };
    let a_starts = [a_start, ymax, -ymax];

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for &tc0 in &tc_starts {
        for &b0 in beta_starts {
            for &a0 in &a_starts {
                if a0 == 0.0 {
                    continue;
                }
                if let Some(fit) = levenberg_fit(model, points, (a0, tc0, b0)) {
                    if best.is_none_or(|b| fit.3 < b.3) {
                        best = Some(fit);
                    }
                }
            }
        }
    }
    let (a, tc, beta, c) = best.ok_or_else(|| {
        AnalysisError::NoConvergence(format!(
            "no start among {} time constants x {} beta values converged",
            tc_starts.len(),
            beta_starts.len()
        ))
    })?;
    if !tc.is_finite() || tc <= 0.0 {
        return Err(AnalysisError::NoConvergence(format!("time constant {tc} not positive")));
    }
    Ok(DecayFit {
        model,
        t2_apparent: tc,
        stretch: if model == DecayModel::Mono { 1.0 } else { beta },
        amplitude: a,
        residual_rms: (c / points.len() as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingFit {
    /// Slope of ln T2 against ln m.
    pub alpha: f64,
    pub std_error: f64,
    pub intercept: f64,
}

/// Ordinary least squares of ln T2 on ln m.
pub fn scaling_exponent(series: &[(f64, f64)]) -> Result<ScalingFit, AnalysisError> {
    if series.len() < 3 {
        return Err(AnalysisError::TooFewPoints { needed: 3, got: series.len() });
    }
    for &(m, t2) in series {
        if m <= 0.0 || t2 <= 0.0 {
            return Err(AnalysisError::InvalidInput(format!(
                "m and T2 must be positive, got ({m}, {t2})"
            )));
        }
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::InvalidInput("all m values identical".into()));
    }
    let alpha = sxy / sxx;
    let intercept = ybar - alpha * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + alpha * x)).powi(2))
        .sum();
    let std_error = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(ScalingFit { alpha, std_error, intercept })
}

/// Validated density matrix wrapper used by the fidelity routines.
fn check_density_matrix(rho: &Mat2) -> Result<(), AnalysisError> {
    let tol = 1e-8;
    if !rho.is_hermitian(tol) {
        return Err(AnalysisError::InvalidDensityMatrix("not Hermitian".into()));
    }
    if (rho.trace().re - 1.0).abs() > tol {
        return Err(AnalysisError::InvalidDensityMatrix(format!(
            "trace {} is not 1",
            rho.trace().re
        )));
    }
    let (lo, _) = rho.hermitian_eigenvalues();
    if lo < -tol {
        return Err(AnalysisError::InvalidDensityMatrix(format!(
            "negative eigenvalue {lo:.3e}"
        )));
    }
    Ok(())
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via spectral
/// square roots.
pub fn fidelity(rho: &Mat2, sigma: &Mat2) -> Result<f64, AnalysisError> {
    check_density_matrix(rho)?;
    check_density_matrix(sigma)?;
    let tol = 1e-10;
    let root = rho.sqrt_psd(tol).map_err(AnalysisError::InvalidDensityMatrix)?;
    let inner = root.mul(sigma).mul(&root);
    let inner_root = inner.sqrt_psd(1e-8).map_err(AnalysisError::InvalidDensityMatrix)?;
    let f = inner_root.trace().re.powi(2);
    Ok(f.clamp(0.0, 1.0))
}

/// Two-dimensional closed form F = Tr(rho sigma) + 2 sqrt(det rho det sigma);
/// agrees with [`fidelity`] on valid 2x2 inputs.
pub fn fidelity_closed_form(rho: &Mat2, sigma: &Mat2) -> Result<f64, AnalysisError> {
    check_density_matrix(rho)?;
    check_density_matrix(sigma)?;
    let t = rho.mul(sigma).trace().re;
    let d = (rho.det().re.max(0.0)) * (sigma.det().re.max(0.0));
    Ok((t + 2.0 * d.sqrt()).clamp(0.0, 1.0))
}

/// Phase-cycled Bloch reconstruction: the raw signed expectation sums, their
/// unit direction, and the pure effective density matrix.
#[derive(Clone, Copy, Debug)]
pub struct EffectiveState {
    pub v: [f64; 3],
    pub bloch: [f64; 3],
    pub rho_eff: Mat2,
}

pub fn effective_state(v_x: f64, v_y: f64, v_z: f64) -> Result<EffectiveState, AnalysisError> {
    let norm = (v_x * v_x + v_y * v_y + v_z * v_z).sqrt();
    if norm == 0.0 {
        return Err(AnalysisError::ZeroVector);
    }
    let bloch = [v_x / norm, v_y / norm, v_z / norm];
    let half = Complex64::new(0.5, 0.0);
    let rho_eff = Mat2::identity()
        .add(&SIGMA_X.scale(Complex64::new(bloch[0], 0.0)))
        .add(&SIGMA_Y.scale(Complex64::new(bloch[1], 0.0)))
        .add(&SIGMA_Z.scale(Complex64::new(bloch[2], 0.0)))
        .scale(half);
    Ok(EffectiveState { v: [v_x, v_y, v_z], bloch, rho_eff })
}

/// Bloch components of a state via the hardware tomography protocol:
/// Sx from a pi/2 pulse about -y before measuring Sz, Sy from a pi/2 pulse
/// about +x, Sz directly. The pre-readout pulses are ideal.
pub fn tomography_expectations(state: &QubitState) -> [f64; 3] {
    let ideal = NoiseModel::ideal();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let for_x = apply_pulse(state, &PulseSpec { time: 0.0, flip: half_pi, phase: -half_pi }, 1, &ideal);
    let for_y = apply_pulse(state, &PulseSpec { time: 0.0, flip: half_pi, phase: 0.0 }, 1, &ideal);
    [for_x.sz(), for_y.sz(), state.sz()]
}

fn make_scheme(kind: SchemeKind, m: usize) -> Result<PhaseScheme, SchemeError> {
    match kind {
        SchemeKind::Tpc => Ok(build_tpc(m)),
        SchemeKind::Cpc => build_cpc(m),
        SchemeKind::Hpc => build_hpc(m),
        SchemeKind::Custom => Err(SchemeError::Malformed(
            "fidelity benchmark needs a named scheme kind".into(),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct FidelityPoint {
    pub m: usize,
    pub f_eff: f64,
    pub effective: EffectiveState,
    pub target_bloch: [f64; 3],
}

/// Effective-state fidelity of a phase-cycled IDD run against the ideal
/// final state, for each pulse count in `m_list`.
///
/// The timing parameter is applied per sequence (CP/CPMG: fixed spacing;
/// UDD: fixed total time), mirroring the hardware benchmarks. Detunings are
/// drawn once per benchmark from the noise seed and shared by every scheme
/// row and every m.
pub fn fidelity_benchmark(
    family: SequenceKind,
    m_list: &[usize],
    scheme_kind: SchemeKind,
    noise: &NoiseModel,
    timing: Timing,
    ensemble_size: usize,
) -> Result<Vec<FidelityPoint>, AnalysisError> {
    if ensemble_size == 0 {
        return Err(AnalysisError::InvalidInput("ensemble size must be at least 1".into()));
    }
    noise.validate()?;
    let detunings = noise.draw_detunings(ensemble_size);
    let inv_ens = 1.0 / ensemble_size as f64;
    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let seq = build_sequence(family, m, timing)?;
        let scheme = make_scheme(scheme_kind, m)?;
        let mut v = [0.0f64; 3];
        for (r, row) in scheme.rows.iter().enumerate() {
            let sign = scheme.sign[r] as f64;
            for &dw in &detunings {
                let state = state_at(&seq, row, noise, dw, seq.echo_time)?;
                let s = tomography_expectations(&state);
                for k in 0..3 {
                    v[k] += sign * s[k] * inv_ens;
                }
            }
        }
        let effective = effective_state(v[0], v[1], v[2])?;
        let ideal_row = vec![1i8; m + 1];
        let target = state_at(&seq, &ideal_row, &NoiseModel::ideal(), 0.0, seq.echo_time)?;
        let target_rho = target.density_matrix();
        let f_eff = fidelity(&effective.rho_eff, &target_rho)?;
        out.push(FidelityPoint {
            m,
            f_eff,
            effective,
            target_bloch: [target.sx(), target.sy(), target.sz()],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synth(model: DecayModel, a: f64, tc: f64, beta: f64, n: usize, tmax: f64) -> Vec<(f64, f64)> {
        (1..=n)
            .map(|k| {
                let t = tmax * k as f64 / n as f64;
                (t, model_value(model, t, a, tc, beta))
            })
            .collect()
    }

    #[test]
    fn mono_fit_recovers_exactly() {
        let pts = synth(DecayModel::Mono, 1.0, 10e-6, 1.0, 20, 30e-6);
        let fit = fit_decay(&pts, DecayModel::Mono).unwrap();
        assert!((fit.t2_apparent - 10e-6).abs() / 10e-6 < 1e-3);
        assert_relative_eq!(fit.stretch, 1.0);
        assert!(fit.residual_rms < 1e-10);
    }

    #[test]
    fn stretched_fit_recovers_beta() {
        let pts = synth(DecayModel::Stretched, 2.0, 5.0, 1.5, 25, 12.0);
        let fit = fit_decay(&pts, DecayModel::Stretched).unwrap();
        assert!((fit.stretch - 1.5).abs() / 1.5 < 0.02, "beta {}", fit.stretch);
        assert!((fit.t2_apparent - 5.0).abs() / 5.0 < 0.02);
    }

    #[test]
    fn inversion_recovery_fit() {
        let pts = synth(DecayModel::InversionRecovery, 1.0, 4.0, 1.0, 24, 16.0);
        let fit = fit_decay(&pts, DecayModel::InversionRecovery).unwrap();
        assert!((fit.t2_apparent - 4.0).abs() / 4.0 < 0.01);
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let pts = synth(DecayModel::Stretched, 1.0, 7.0, 1.2, 20, 20.0);
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(t, y)| (t, 3.5 * y)).collect();
        let f1 = fit_decay(&pts, DecayModel::Stretched).unwrap();
        let f2 = fit_decay(&scaled, DecayModel::Stretched).unwrap();
        assert_relative_eq!(f1.t2_apparent, f2.t2_apparent, max_relative = 1e-9);
        assert_relative_eq!(f1.stretch, f2.stretch, max_relative = 1e-9);
        assert_relative_eq!(3.5 * f1.amplitude, f2.amplitude, max_relative = 1e-9);
    }

    #[test]
    fn fit_input_validation() {
        assert!(matches!(
            fit_decay(&[(0.0, 1.0), (1.0, 0.5)], DecayModel::Mono),
            Err(AnalysisError::TooFewPoints { .. })
        ));
        let bad = vec![(0.0, 1.0), (1.0, 0.9), (1.0, 0.8), (2.0, 0.7)];
        assert!(matches!(fit_decay(&bad, DecayModel::Mono), Err(AnalysisError::NonIncreasingTimes(_))));
        let flat = vec![(0.0, 0.5), (1.0, 0.5), (2.0, 0.5), (3.0, 0.5)];
        assert!(matches!(fit_decay(&flat, DecayModel::Mono), Err(AnalysisError::DegenerateData)));
    }

    #[test]
    fn scaling_exponent_exact_power_law() {
        let series: Vec<(f64, f64)> = (1..=8).map(|m| (m as f64, 3.0 * (m as f64).powf(0.4))).collect();
        let fit = scaling_exponent(&series).unwrap();
        assert_relative_eq!(fit.alpha, 0.4, epsilon = 1e-12);
        assert!(fit.std_error < 1e-12);
        // invariance under uniform T2 rescaling
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(m, t)| (m, 1e-6 * t)).collect();
        assert_relative_eq!(scaling_exponent(&scaled).unwrap().alpha, 0.4, epsilon = 1e-12);
        assert!(scaling_exponent(&series[..2]).is_err());
        assert!(scaling_exponent(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]).is_err());
    }

    fn pure_state(bloch: [f64; 3]) -> Mat2 {
        effective_state(bloch[0], bloch[1], bloch[2]).unwrap().rho_eff
    }

    #[test]
    fn fidelity_reference_values() {
        let up = pure_state([0.0, 0.0, 1.0]);
        let down = pure_state([0.0, 0.0, -1.0]);
        assert_relative_eq!(fidelity(&up, &up).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(fidelity(&up, &down).unwrap(), 0.0, epsilon = 1e-14);
        let mixed = Mat2::identity().scale(Complex64::new(0.5, 0.0));
        assert_relative_eq!(fidelity(&mixed, &up).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_symmetric_and_matches_closed_form() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        for _ in 0..200 {
            let rand_state = |rng: &mut rand_chacha::ChaCha12Rng| {
                let r: f64 = rng.gen_range(0.0..1.0);
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let b = [
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * theta.cos(),
                ];
                Mat2::identity()
                    .add(&SIGMA_X.scale(Complex64::new(b[0], 0.0)))
                    .add(&SIGMA_Y.scale(Complex64::new(b[1], 0.0)))
                    .add(&SIGMA_Z.scale(Complex64::new(b[2], 0.0)))
                    .scale(Complex64::new(0.5, 0.0))
            };
            let rho = rand_state(&mut rng);
            let sigma = rand_state(&mut rng);
            let f = fidelity(&rho, &sigma).unwrap();
            let g = fidelity(&sigma, &rho).unwrap();
            let c = fidelity_closed_form(&rho, &sigma).unwrap();
            assert!((f - g).abs() < 1e-10);
            assert!((f - c).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_monotone_under_depolarizing() {
        let target = pure_state([0.0, 1.0, 0.0]);
        let mut last = 1.0;
        for k in 1..=10 {
            let p = k as f64 / 10.0;
            let mixed = target
                .scale(Complex64::new(1.0 - p, 0.0))
                .add(&Mat2::identity().scale(Complex64::new(0.5 * p, 0.0)));
            let f = fidelity(&mixed, &target).unwrap();
            assert!(f <= last + 1e-12);
            last = f;
        }
    }

    #[test]
    fn fidelity_rejects_invalid_inputs() {
        let not_unit_trace = Mat2::identity();
        let up = pure_state([0.0, 0.0, 1.0]);
        assert!(fidelity(&not_unit_trace, &up).is_err());
        let non_psd = Mat2::new(
            Complex64::new(1.5, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.5, 0.0),
        );
        assert!(fidelity(&non_psd, &up).is_err());
    }

    #[test]
    fn effective_state_examples() {
        let e = effective_state(0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(e.rho_eff.e[1].im, -0.5, epsilon = 1e-14);
        let e2 = effective_state(3.0, 4.0, 0.0).unwrap();
        assert_relative_eq!(e2.bloch[0], 0.6, epsilon = 1e-14);
        assert_relative_eq!(e2.bloch[1], 0.8, epsilon = 1e-14);
        assert!(e2.rho_eff.det().re.abs() < 1e-12, "effective state must be pure");
        assert!(matches!(effective_state(0.0, 0.0, 0.0), Err(AnalysisError::ZeroVector)));
    }

    #[test]
    fn effective_fidelity_closed_form_against_pure_target() {
        // F(rho_eff, pure target) = (1 + v . b) / 2
        let e = effective_state(0.3, -0.9, 0.2).unwrap();
        let b = [0.6, 0.8, 0.0];
        let target = pure_state(b);
        let f = fidelity(&e.rho_eff, &target).unwrap();
        let dot: f64 = e.bloch.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert_relative_eq!(f, (1.0 + dot) / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn tomography_round_trip() {
        let state = QubitState { p1: 0.3, coherence: Complex64::new(0.21, -0.17) };
        let s = tomography_expectations(&state);
        assert_relative_eq!(s[0], state.sx(), epsilon = 1e-10);
        assert_relative_eq!(s[1], state.sy(), epsilon = 1e-10);
        assert_relative_eq!(s[2], state.sz(), epsilon = 1e-10);
    }

    #[test]
    fn ideal_benchmark_is_unity() {
        let noise = NoiseModel::ideal();
        for kind in [SchemeKind::Tpc, SchemeKind::Hpc] {
            let pts = fidelity_benchmark(
                SequenceKind::Cp,
                &[2, 4, 8],
                kind,
                &noise,
                Timing::Spacing(1e-6),
                1,
            )
            .unwrap();
            for p in pts {
                assert!((p.f_eff - 1.0).abs() < 1e-9, "m={} f={}", p.m, p.f_eff);
            }
        }
    }
}
