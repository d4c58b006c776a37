//! Command implementations.

use crate::config::{
    CliError, FidelityConfig, NoiseSpec, SchemeRef, SequenceSpec, SimulateConfig, SimulateTask,
};
use crate::output::{ensure_dir, sig, write_json, write_manifest, write_text, write_trace_csv};
use echocycle::analysis::{
    fidelity_benchmark, fit_decay, scaling_exponent, DecayFit, DecayModel,
};
use echocycle::pathways::{
    classify, echo_time, echo_phase_shift, enumerate_pathways, pathway_amplitude,
    EnumerationOptions,
};
use echocycle::schemes::{
    build_cpc, build_hpc, build_tpc, scheme_complexity, verify_scheme, OrthogonalityReport,
    PhaseScheme, SchemeKind, VerifyMethod,
};
use echocycle::simulator::{
    build_sequence, echo_amplitude, run_scheme, state_at, PulseSequence, PulseSpec,
    ReadoutWindow, SequenceKind, Timing,
};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub fn parse_scheme_kind(s: &str) -> Result<SchemeKind, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "tpc" => Ok(SchemeKind::Tpc),
        "cpc" => Ok(SchemeKind::Cpc),
        "hpc" => Ok(SchemeKind::Hpc),
        other => Err(CliError::Validation(format!("unknown scheme kind '{other}'"))),
    }
}

pub fn parse_sequence_kind(s: &str) -> Result<SequenceKind, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "cp" => Ok(SequenceKind::Cp),
        "cpmg" => Ok(SequenceKind::Cpmg),
        "udd" => Ok(SequenceKind::Udd),
        other => Err(CliError::Validation(format!("unknown sequence kind '{other}'"))),
    }
}

fn build_named_scheme(kind: SchemeKind, m: usize) -> Result<PhaseScheme, CliError> {
    Ok(match kind {
        SchemeKind::Tpc => build_tpc(m),
        SchemeKind::Cpc => build_cpc(m)?,
        SchemeKind::Hpc => build_hpc(m)?,
        SchemeKind::Custom => {
            return Err(CliError::Validation("custom schemes come from files".into()))
        }
    })
}

fn load_scheme_file(path: &Path) -> Result<PhaseScheme, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let scheme: PhaseScheme = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    scheme.validate()?;
    Ok(scheme)
}

fn resolve_scheme(re: &SchemeRef, m: usize) -> Result<PhaseScheme, CliError> {
    match (&re.kind, &re.file) {
        (Some(kind), None) => build_named_scheme(*kind, m),
        (None, Some(path)) => {
            let scheme = load_scheme_file(path)?;
            if scheme.m != m {
                return Err(CliError::Validation(format!(
                    "scheme file is for m={}, sequence has m={m}",
                    scheme.m
                )));
            }
            Ok(scheme)
        }
        _ => Err(CliError::Validation("scheme must name exactly one of kind or file".into())),
    }
}

fn sequence_timing(spec: &SequenceSpec) -> Result<Timing, CliError> {
    match (spec.kind, spec.tau, spec.total_time) {
        (SequenceKind::Udd, _, Some(t)) => Ok(Timing::TotalTime(t)),
        (SequenceKind::Udd, Some(tau), None) => Ok(Timing::Spacing(tau)),
        (_, Some(tau), _) => Ok(Timing::Spacing(tau)),
        (_, None, Some(t)) => Ok(Timing::TotalTime(t)),
        _ => Err(CliError::Validation(format!(
            "sequence kind {:?} needs tau or total_time",
            spec.kind
        ))),
    }
}

fn build_spec_sequence(spec: &SequenceSpec) -> Result<PulseSequence, CliError> {
    Ok(build_sequence(spec.kind, spec.m, sequence_timing(spec)?)?)
}

// ---------------------------------------------------------------- scheme --

pub fn cmd_scheme(kind: SchemeKind, m: usize, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let scheme = build_named_scheme(kind, m)?;
    let path = out.join("scheme.json");
    write_json(&path, &scheme)?;
    let report = verify_scheme(&scheme)?;
    println!("rows: {}", scheme.row_count());
    println!("complexity: {}", scheme_complexity(kind, m)?);
    println!("orthogonality ratio: {}", sig(report.ratio_f64()));
    let config = serde_json::json!({ "kind": kind, "m": m });
    write_manifest(out, "scheme", config, &[path])?;
    Ok(())
}

// ---------------------------------------------------------------- verify --

#[derive(Serialize)]
struct VerifyReportJson {
    m: usize,
    total_classes: String,
    cancelled: String,
    ratio: f64,
    ratio_exact: String,
    method: String,
    desired_preserved: bool,
    survivors_exhaustive: bool,
    surviving_classes: Vec<Vec<usize>>,
}

fn method_label(report: &OrthogonalityReport) -> String {
    match report.method {
        VerifyMethod::ExactGroupWalk => "exact (subgroup walk)".into(),
        VerifyMethod::ExactEnumeration => "exact (class enumeration)".into(),
        VerifyMethod::Sampled { sample_size } => {
            format!("sampled ({sample_size} classes; ratio is an estimate)")
        }
    }
}

pub fn cmd_verify(scheme_path: &Path, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let scheme = load_scheme_file(scheme_path)?;
    let report = verify_scheme(&scheme)?;
    println!("m:                {}", report.m);
    println!("rows:             {}", scheme.row_count());
    println!("classes:          {}", report.total_classes);
    println!("cancelled:        {}", report.cancelled);
    println!("ratio:            {}", sig(report.ratio_f64()));
    println!("method:           {}", method_label(&report));
    println!("desired echo ok:  {}", report.desired_preserved);
    if report.surviving_classes.is_empty() {
        println!("survivors:        none");
    } else {
        let suffix = if report.survivors_exhaustive { "" } else { " (truncated)" };
        println!("survivors{suffix}:");
        for class in &report.surviving_classes {
            let names: Vec<String> = class.iter().map(|j| j.to_string()).collect();
            println!("  {{{}}}", names.join(", "));
        }
    }
    let json = VerifyReportJson {
        m: report.m,
        total_classes: report.total_classes.to_string(),
        cancelled: report.cancelled.to_string(),
        ratio: report.ratio_f64(),
        ratio_exact: report.ratio.to_string(),
        method: method_label(&report),
        desired_preserved: report.desired_preserved,
        survivors_exhaustive: report.survivors_exhaustive,
        surviving_classes: report.surviving_classes.clone(),
    };
    let path = out.join("verify.json");
    write_json(&path, &json)?;
    let config = serde_json::json!({ "scheme_file": scheme_path.display().to_string() });
    write_manifest(out, "verify", config, &[path])?;
    Ok(())
}

// -------------------------------------------------------------- pathways --

#[allow(clippy::too_many_arguments)]
pub fn cmd_pathways(
    kind: SequenceKind,
    m: usize,
    tau: Option<f64>,
    total_time: Option<f64>,
    final_order: i8,
    include_all: bool,
    noise: NoiseSpec,
    out: &Path,
) -> Result<(), CliError> {
    ensure_dir(out)?;
    let spec = SequenceSpec { kind, m, tau, total_time };
    let seq = build_spec_sequence(&spec)?;
    let opts = EnumerationOptions { echo_forming_only: !include_all, ..Default::default() };
    let pathways = enumerate_pathways(&seq, final_order, &opts)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let durations = seq.durations();
    let model = noise.to_model(0);
    let mut csv = String::from("orders,class_f,echo_time_s,phase_rad,amplitude\n");
    for p in &pathways {
        let orders: Vec<String> = p.orders().iter().map(|o| o.to_string()).collect();
        let class: Vec<String> = classify(p).into_iter().map(|j| j.to_string()).collect();
        let t = echo_time(p, &durations).map_err(|e| CliError::Validation(e.to_string()))?;
        let amp = pathway_amplitude(p, &seq, &model, 0.0)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        // phase deltas of zero keep the nominal phases; report the amplitude arg
        let _ = echo_phase_shift(p, &vec![0.0; p.num_pulses()]);
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            orders.join(";"),
            class.join(";"),
            t.map_or(String::new(), sig),
            sig(amp.arg()),
            sig(amp.norm()),
        ));
    }
    let path = out.join("pathways.csv");
    write_text(&path, &csv)?;
    println!("pathways: {}", pathways.len());
    let config = serde_json::json!({
        "kind": kind, "m": m, "tau": tau, "total_time": total_time,
        "final_order": final_order, "all": include_all, "noise": noise,
    });
    write_manifest(out, "pathways", config, &[path])?;
    Ok(())
}

// -------------------------------------------------------------- simulate --

fn validate_simulate(cfg: &SimulateConfig) -> Result<(), CliError> {
    let mut problems = Vec::new();
    if cfg.ensemble == 0 {
        problems.push("ensemble must be at least 1".to_string());
    }
    if cfg.sequence.m == 0 {
        problems.push("sequence.m must be at least 1".to_string());
    }
    if cfg.sequence.tau.is_none() && cfg.sequence.total_time.is_none() {
        problems.push("sequence needs tau or total_time".to_string());
    }
    if let Some(t) = cfg.noise.t1 {
        if t.is_nan() || t <= 0.0 {
            problems.push(format!("noise.t1 must be positive, got {t}"));
        }
    }
    if let Some(t) = cfg.noise.t2 {
        if t.is_nan() || t <= 0.0 {
            problems.push(format!("noise.t2 must be positive, got {t}"));
        }
    }
    match (&cfg.scheme.kind, &cfg.scheme.file) {
        (Some(_), Some(_)) | (None, None) => {
            problems.push("scheme must name exactly one of kind or file".to_string())
        }
        _ => {}
    }
    match cfg.task {
        SimulateTask::Decay if cfg.sweep_taus.as_ref().is_none_or(Vec::is_empty) => {
            problems.push("decay task needs sweep_taus".to_string())
        }
        SimulateTask::SweepM if cfg.sweep_m.as_ref().is_none_or(Vec::is_empty) => {
            problems.push("sweep_m task needs sweep_m".to_string())
        }
        SimulateTask::Split if cfg.storage_times.as_ref().is_none_or(Vec::is_empty) => {
            problems.push("split task needs storage_times".to_string())
        }
        _ => {}
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "config invalid ({} problems):\n  - {}",
            problems.len(),
            problems.join("\n  - ")
        )))
    }
}

#[derive(Serialize)]
struct EchoSummary {
    echo_time_s: f64,
    echo_amplitude: Option<f64>,
    expectations: [f64; 3],
    rows: usize,
    ensemble: usize,
}

/// Row-normalized in-phase quadrature of the phase-cycled expectations, so
/// different schemes report comparable echo amplitudes.
fn in_phase(run: &echocycle::simulator::SchemeRun, prep_phase: f64) -> f64 {
    let v = run.expectations;
    (v[0] * prep_phase.sin() - v[1] * prep_phase.cos()).abs() / run.per_row.len() as f64
}

fn simulate_trace(cfg: &SimulateConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let seq = build_spec_sequence(&cfg.sequence)?;
    let scheme = resolve_scheme(&cfg.scheme, cfg.sequence.m)?;
    let noise = cfg.noise.to_model(cfg.seed);
    let run = run_scheme(&seq, &scheme, &noise, cfg.ensemble)?;
    let mut outputs = Vec::new();
    let combined_path = out.join("combined.csv");
    write_trace_csv(&combined_path, &run.combined)?;
    outputs.push(combined_path);
    for (r, trace) in run.per_row.iter().enumerate() {
        let p = out.join(format!("row_{r:04}.csv"));
        write_trace_csv(&p, trace)?;
        outputs.push(p);
    }
    let window = (seq.readout.end - seq.readout.start) / 2.0;
    let summary = EchoSummary {
        echo_time_s: seq.echo_time,
        echo_amplitude: echo_amplitude(&run.combined, seq.echo_time, window, seq.prep_phase()),
        expectations: run.expectations,
        rows: scheme.row_count(),
        ensemble: cfg.ensemble,
    };
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &summary)?;
    outputs.push(summary_path);
    Ok(outputs)
}

#[derive(Serialize)]
struct DecayFitJson {
    model: String,
    time_constant_s: f64,
    stretch: f64,
    amplitude: f64,
    residual_rms: f64,
}

impl From<&DecayFit> for DecayFitJson {
    fn from(f: &DecayFit) -> Self {
        DecayFitJson {
            model: format!("{:?}", f.model).to_lowercase(),
            time_constant_s: f.t2_apparent,
            stretch: f.stretch,
            amplitude: f.amplitude,
            residual_rms: f.residual_rms,
        }
    }
}

fn simulate_decay(cfg: &SimulateConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let taus = cfg.sweep_taus.as_ref().expect("validated");
    let scheme = resolve_scheme(&cfg.scheme, cfg.sequence.m)?;
    let noise = cfg.noise.to_model(cfg.seed);
    let mut csv = String::from("total_time_s,amplitude\n");
    let mut pts = Vec::new();
    for &tau in taus {
        let spec = SequenceSpec { tau: Some(tau), total_time: None, ..cfg.sequence };
        let seq = build_spec_sequence(&spec)?;
        let run = run_scheme(&seq, &scheme, &noise, cfg.ensemble)?;
        let amp = in_phase(&run, seq.prep_phase());
        csv.push_str(&format!("{},{}\n", sig(seq.echo_time), sig(amp)));
        pts.push((seq.echo_time, amp));
    }
    let decay_path = out.join("decay.csv");
    write_text(&decay_path, &csv)?;
    let fit = fit_decay(&pts, DecayModel::Mono)?;
    println!("apparent T2: {} s", sig(fit.t2_apparent));
    let fit_path = out.join("fit.json");
    write_json(&fit_path, &DecayFitJson::from(&fit))?;
    Ok(vec![decay_path, fit_path])
}

fn simulate_sweep_m(cfg: &SimulateConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ms = cfg.sweep_m.as_ref().expect("validated");
    let kinds = cfg
        .compare_schemes
        .clone()
        .unwrap_or_else(|| vec![SchemeKind::Tpc, SchemeKind::Hpc]);
    let noise = cfg.noise.to_model(cfg.seed);
    let mut csv = String::from("m,total_time_s,scheme,amplitude\n");
    for &m in ms {
        let spec = SequenceSpec { m, ..cfg.sequence };
        let seq = build_spec_sequence(&spec)?;
        for &kind in &kinds {
            let scheme = build_named_scheme(kind, m)?;
            let run = run_scheme(&seq, &scheme, &noise, cfg.ensemble)?;
            let amp = in_phase(&run, seq.prep_phase());
            let label = serde_json::to_string(&kind)?.trim_matches('"').to_string();
            csv.push_str(&format!("{m},{},{label},{}\n", sig(seq.echo_time), sig(amp)));
        }
    }
    let path = out.join("sweep_m.csv");
    write_text(&path, &csv)?;
    Ok(vec![path])
}

/// Modified two-inversion experiment: pi/2 - tau - pi - T - pi with the
/// storage interval T swept. The desired echo (T - tau after the last
/// pulse) and the coherence-population-mixing channel (tau after) are
/// separated by character-weighted CPC combination.
fn simulate_split(cfg: &SimulateConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    const PI: f64 = std::f64::consts::PI;
    let storage = cfg.storage_times.as_ref().expect("validated");
    let tau = cfg
        .sequence
        .tau
        .ok_or_else(|| CliError::Validation("split task needs sequence.tau".into()))?;
    let noise = cfg.noise.to_model(cfg.seed);
    let scheme = build_cpc(2)?;
    let detunings = noise.draw_detunings(cfg.ensemble);
    let mut desired_csv = String::from("storage_time_s,amplitude\n");
    let mut undesired_csv = String::from("storage_time_s,amplitude\n");
    let mut desired_pts = Vec::new();
    let mut undesired_pts = Vec::new();
    for &big_t in storage {
        let pulses = vec![
            PulseSpec { time: 0.0, flip: PI / 2.0, phase: 0.0 },
            PulseSpec { time: tau, flip: PI, phase: PI / 2.0 },
            PulseSpec { time: tau + big_t, flip: PI, phase: PI / 2.0 },
        ];
        let last = tau + big_t;
        let seq = PulseSequence {
            kind: SequenceKind::Custom,
            m: 2,
            pulses,
            readout: ReadoutWindow { start: last, end: last + big_t, step: tau / 10.0 },
            echo_time: last + big_t - tau,
        };
        let mut desired = 0.0;
        let mut undesired = 0.0;
        for (r, row) in scheme.rows.iter().enumerate() {
            let chi_mixing = (scheme.rows[r][1] * scheme.rows[r][2]) as f64;
            for &dw in &detunings {
                desired += state_at(&seq, row, &noise, dw, last + big_t - tau)?.sy();
                undesired += chi_mixing * state_at(&seq, row, &noise, dw, last + tau)?.sy();
            }
        }
        let norm = (scheme.row_count() * detunings.len()) as f64;
        desired_pts.push((big_t, (desired / norm).abs()));
        undesired_pts.push((big_t, (undesired / norm).abs()));
        desired_csv.push_str(&format!("{},{}\n", sig(big_t), sig((desired / norm).abs())));
        undesired_csv.push_str(&format!("{},{}\n", sig(big_t), sig((undesired / norm).abs())));
    }
    let desired_path = out.join("desired.csv");
    let undesired_path = out.join("undesired.csv");
    write_text(&desired_path, &desired_csv)?;
    write_text(&undesired_path, &undesired_csv)?;
    let fit_d = fit_decay(&desired_pts, DecayModel::Mono)?;
    let fit_u = fit_decay(&undesired_pts, DecayModel::Mono)?;
    println!(
        "desired channel constant: {} s; mixing channel constant: {} s; separation: {}x",
        sig(fit_d.t2_apparent),
        sig(fit_u.t2_apparent),
        sig(fit_u.t2_apparent / fit_d.t2_apparent)
    );
    let summary_path = out.join("split_fits.json");
    write_json(
        &summary_path,
        &serde_json::json!({
            "desired": DecayFitJson::from(&fit_d),
            "undesired": DecayFitJson::from(&fit_u),
            "separation": fit_u.t2_apparent / fit_d.t2_apparent,
        }),
    )?;
    Ok(vec![desired_path, undesired_path, summary_path])
}

pub fn cmd_simulate(cfg: &SimulateConfig, out: &Path) -> Result<(), CliError> {
    validate_simulate(cfg)?;
    ensure_dir(out)?;
    let outputs = match cfg.task {
        SimulateTask::Trace => simulate_trace(cfg, out)?,
        SimulateTask::Decay => simulate_decay(cfg, out)?,
        SimulateTask::SweepM => simulate_sweep_m(cfg, out)?,
        SimulateTask::Split => simulate_split(cfg, out)?,
    };
    write_manifest(out, "simulate", serde_json::to_value(cfg)?, &outputs)?;
    Ok(())
}

// ------------------------------------------------------------------- fit --

pub struct FitFilters {
    pub cycling: Option<String>,
    pub sequence: Option<String>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
}

fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> =
        reader.headers().map_err(|e| CliError::Validation(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::Validation(format!("{} row {}: {e}", path.display(), i + 2))
        })?;
        rows.push(record.iter().map(String::from).collect());
    }
    Ok((headers, rows))
}

fn column(headers: &[String], names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| {
        let h = h.to_ascii_lowercase();
        names.iter().any(|n| h == *n || h.starts_with(n))
    })
}

fn numeric(path: &Path, rows: &[Vec<String>], col: usize) -> Result<Vec<f64>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            r.get(col)
                .ok_or_else(|| {
                    CliError::Validation(format!("{} row {}: missing column", path.display(), i + 2))
                })?
                .parse::<f64>()
                .map_err(|e| {
                    CliError::Validation(format!("{} row {}: {e}", path.display(), i + 2))
                })
        })
        .collect()
}

pub fn cmd_fit(
    data: &Path,
    model: &str,
    filters: &FitFilters,
    out: &Path,
) -> Result<(), CliError> {
    ensure_dir(out)?;
    let (headers, rows) = read_csv_rows(data)?;
    let report: serde_json::Value = if model.eq_ignore_ascii_case("scaling") {
        let m_col = column(&headers, &["m"]).ok_or_else(|| {
            CliError::Validation(format!("{}: no m column", data.display()))
        })?;
        let t2_col = column(&headers, &["t2", "t2_us", "t2_s"]).ok_or_else(|| {
            CliError::Validation(format!("{}: no t2 column", data.display()))
        })?;
        let cyc_col = column(&headers, &["phase_cycling", "cycling"]);
        let seq_col = column(&headers, &["sequence"]);
        let selected: Vec<&Vec<String>> = rows
            .iter()
            .filter(|r| {
                let m: usize = r[m_col].parse().unwrap_or(0);
                let keep_m = filters.m_min.is_none_or(|lo| m >= lo)
                    && filters.m_max.is_none_or(|hi| m <= hi);
                let keep_cyc = match (&filters.cycling, cyc_col) {
                    (Some(want), Some(c)) => r[c].eq_ignore_ascii_case(want),
                    (Some(_), None) => false,
                    _ => true,
                };
                let keep_seq = match (&filters.sequence, seq_col) {
                    (Some(want), Some(c)) => r[c].eq_ignore_ascii_case(want),
                    (Some(_), None) => false,
                    _ => true,
                };
                keep_m && keep_cyc && keep_seq
            })
            .collect();
        let series: Vec<(f64, f64)> = selected
            .iter()
            .enumerate()
            .map(|(i, r)| -> Result<(f64, f64), CliError> {
                let m: f64 = r[m_col].parse().map_err(|e| {
                    CliError::Validation(format!("{} row {}: {e}", data.display(), i + 2))
                })?;
                let t2: f64 = r[t2_col].parse().map_err(|e| {
                    CliError::Validation(format!("{} row {}: {e}", data.display(), i + 2))
                })?;
                Ok((m, t2))
            })
            .collect::<Result<_, _>>()?;
        let fit = scaling_exponent(&series)?;
        println!("alpha: {} +- {}", sig(fit.alpha), sig(fit.std_error));
        serde_json::json!({
            "model": "scaling",
            "points": series.len(),
            "alpha": fit.alpha,
            "std_error": fit.std_error,
            "intercept": fit.intercept,
        })
    } else {
        let decay_model = match model.to_ascii_lowercase().as_str() {
            "mono" => DecayModel::Mono,
            "stretched" => DecayModel::Stretched,
            "ir" | "inversion_recovery" => DecayModel::InversionRecovery,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown model '{other}' (mono, stretched, ir, scaling)"
                )))
            }
        };
        let t_col = column(&headers, &["time", "total_time", "t_s"]).unwrap_or(0);
        let a_col = column(&headers, &["amplitude", "signal", "echo"]).unwrap_or(1);
        let times = numeric(data, &rows, t_col)?;
        let amps = numeric(data, &rows, a_col)?;
        let pts: Vec<(f64, f64)> = times.into_iter().zip(amps).collect();
        let fit = fit_decay(&pts, decay_model)?;
        println!(
            "time constant: {} s (stretch {}, amplitude {})",
            sig(fit.t2_apparent),
            sig(fit.stretch),
            sig(fit.amplitude)
        );
        serde_json::to_value(DecayFitJson::from(&fit))?
    };
    let path = out.join("fit.json");
    write_json(&path, &report)?;
    let config = serde_json::json!({
        "data": data.display().to_string(),
        "model": model,
        "cycling": filters.cycling,
        "sequence": filters.sequence,
        "m_min": filters.m_min,
        "m_max": filters.m_max,
    });
    write_manifest(out, "fit", config, &[path])?;
    Ok(())
}

// -------------------------------------------------------------- fidelity --

pub fn cmd_fidelity(cfg: &FidelityConfig, out: &Path) -> Result<(), CliError> {
    if cfg.m_list.is_empty() {
        return Err(CliError::Validation("m_list must not be empty".into()));
    }
    ensure_dir(out)?;
    let timing = match (cfg.family, cfg.tau, cfg.total_time) {
        (SequenceKind::Udd, _, Some(t)) => Timing::TotalTime(t),
        (_, Some(tau), _) => Timing::Spacing(tau),
        (_, None, Some(t)) => Timing::TotalTime(t),
        _ => return Err(CliError::Validation("fidelity needs tau or total_time".into())),
    };
    let noise = cfg.noise.to_model(cfg.seed);
    let points = fidelity_benchmark(cfg.family, &cfg.m_list, cfg.scheme, &noise, timing, cfg.ensemble)?;
    let mut csv = String::from("m,f_eff\n");
    for p in &points {
        csv.push_str(&format!("{},{}\n", p.m, sig(p.f_eff)));
    }
    let curve_path = out.join("fidelity.csv");
    write_text(&curve_path, &csv)?;
    let states: Vec<serde_json::Value> = points
        .iter()
        .map(|p| {
            serde_json::json!({
                "m": p.m,
                "f_eff": p.f_eff,
                "v": p.effective.v,
                "bloch": p.effective.bloch,
                "target_bloch": p.target_bloch,
            })
        })
        .collect();
    let states_path = out.join("effective_states.json");
    write_json(&states_path, &states)?;
    for p in &points {
        println!("m={:<4} F_eff={}", p.m, sig(p.f_eff));
    }
    write_manifest(out, "fidelity", serde_json::to_value(cfg)?, &[curve_path, states_path])?;
    Ok(())
}
