//! Runs an [`ExperimentSpec`] and writes its artifacts into one directory.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytics::{
    best_response_curve, classify_ensemble, classify_regime, estimate_tau_c, golden_rule, lead_lag,
    orbit_signed_area, oscillation_period, rck_reference_trajectory, s_star_tau, savings_histogram, scaling_study,
    PeriodConfig, PeriodEstimate, RckSteadyState, Regime, RegimeConfig, RegimeReport,
};
use crate::config::{ExperimentSpec, Mode, MANIFEST_FILE};
use crate::econ::Aggregates;
use crate::engine::{fmt_f64, read_aggregates_csv, read_snapshots_csv, RunSummary, Snapshot, Trajectory};
use crate::ensemble::{run_members, with_workers, MemberSpec};
use crate::error::{Error, Result};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SNAPSHOT_FILE: &str = "snapshots.csv";
pub const EVENT_FILE: &str = "events.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const REPORT_FILE: &str = "report.json";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SCALING_FILE: &str = "scaling.csv";
pub const BEST_RESPONSE_FILE: &str = "bestresponse.csv";
pub const GRAPH_FILE: &str = "graph.edges";
pub const SADDLE_FILE: &str = "saddle.csv";
pub const LOCUS_FILE: &str = "locus.csv";
pub const ANALYSIS_FILE: &str = "analysis.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberFailure {
    /// Sweep value the member belonged to, if any.
    pub tau: Option<f64>,
    pub member: usize,
    pub error: String,
}

/// What an experiment produced. Failed members do not abort the run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub failures: Vec<MemberFailure>,
}

impl Outcome {
    pub fn degraded(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Cycle statistics of an aggregate series past a burn-in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleAnalysis {
    pub window_start: f64,
    pub samples: usize,
    pub s_tilde_mean: f64,
    pub s_tilde_std: f64,
    pub output_mean: f64,
    pub consumption_mean: f64,
    pub period: Option<PeriodEstimate>,
    /// Lag of `Y` behind `s_tilde` at peak cross-correlation, in time units.
    pub output_lag: Option<f64>,
    pub output_lag_correlation: Option<f64>,
    /// Signed `(k, c)` orbit area per dominant period; positive is counter-clockwise.
    pub orbit_area_per_period: Option<f64>,
    pub notes: Vec<String>,
}

/// Period, lead/lag and orbit orientation of `times`/`aggs` at or after
/// `burn_in`. `labor` converts totals to per-worker `k` and `c`.
pub fn analyze_cycles(times: &[f64], aggs: &[Aggregates], burn_in: f64, labor: f64) -> Result<CycleAnalysis> {
    let start = times.partition_point(|&t| t < burn_in);
    let (times, aggs) = (&times[start..], &aggs[start..]);
    if aggs.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} aggregate samples past t = {burn_in}",
            aggs.len()
        )));
    }
    let n = aggs.len() as f64;
    let s: Vec<f64> = aggs.iter().map(|a| a.s_tilde).collect();
    let y: Vec<f64> = aggs.iter().map(|a| a.output).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let s_mean = mean(&s);
    let s_std = (s.iter().map(|v| (v - s_mean).powi(2)).sum::<f64>() / n).sqrt();
    let interval = (times[times.len() - 1] - times[0]) / (n - 1.0);
    let mut out = CycleAnalysis {
        window_start: times[0],
        samples: aggs.len(),
        s_tilde_mean: s_mean,
        s_tilde_std: s_std,
        output_mean: mean(&y),
        consumption_mean: aggs.iter().map(|a| a.consumption).sum::<f64>() / n,
        period: None,
        output_lag: None,
        output_lag_correlation: None,
        orbit_area_per_period: None,
        notes: Vec::new(),
    };
    let period = match oscillation_period(&s, interval, &PeriodConfig::default()) {
        Ok(p) => p,
        Err(e) => {
            out.notes.push(format!("period: {e}"));
            return Ok(out);
        }
    };
    let max_lag = ((0.5 * period.dominant / interval).round() as usize).max(1);
    match lead_lag(&s, &y, max_lag) {
        Ok((lag, r)) => {
            out.output_lag = Some(lag as f64 * interval);
            out.output_lag_correlation = Some(r);
        }
        Err(e) => out.notes.push(format!("lead-lag: {e}")),
    }
    let k: Vec<f64> = aggs.iter().map(|a| a.capital / labor).collect();
    let c: Vec<f64> = aggs.iter().map(|a| a.consumption / labor).collect();
    let span = times[times.len() - 1] - times[0];
    out.orbit_area_per_period = Some(orbit_signed_area(&k, &c) * period.dominant / span);
    out.period = Some(period);
    Ok(out)
}

fn create(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    files.push(path);
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, files: &mut Vec<PathBuf>) -> Result<()> {
    let mut w = create(dir, name, files)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_histogram_rows(w: &mut impl Write, bins: usize, rows: &[(f64, Vec<f64>)]) -> Result<()> {
    write!(w, "tau")?;
    for b in 0..bins {
        write!(w, ",bin{b}")?;
    }
    writeln!(w)?;
    for (tau, h) in rows {
        write!(w, "{}", fmt_f64(*tau))?;
        for v in h {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Runs the experiment in `spec.out`, using `workers` threads (0 = all cores).
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<Outcome> {
    spec.validate()?;
    let dir = spec.out.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::config("out", format!("{}: {e}", dir.display())))?;
    let mut outcome = Outcome {
        dir: dir.clone(),
        ..Default::default()
    };
    let mut w = create(&dir, MANIFEST_FILE, &mut outcome.files)?;
    w.write_all(spec.to_manifest()?.as_bytes())?;
    w.flush()?;
    with_workers(workers, || match spec.mode {
        Mode::Single => run_single(spec, &mut outcome),
        Mode::Ensemble => run_ensemble_mode(spec, &mut outcome),
        Mode::TauSweep => run_sweep(spec, &mut outcome),
        Mode::TauCSearch => run_tau_c(spec, &mut outcome),
        Mode::ScalingStudy => run_scaling(spec, &mut outcome),
        Mode::BestResponseCurve => run_best_response(spec, &mut outcome),
    })?;
    Ok(outcome)
}

#[derive(Serialize)]
struct SingleReport<'a> {
    mode: Mode,
    summary: &'a RunSummary,
    regime: Option<RegimeReport>,
    cycles: Option<CycleAnalysis>,
    golden_rule: RckSteadyState,
    s_star_tau: f64,
    notes: Vec<String>,
}

fn run_single(spec: &ExperimentSpec, outcome: &mut Outcome) -> Result<()> {
    let dir = outcome.dir.clone();
    let files = &mut outcome.files;
    let (graph, traj) = spec.member_spec().run_member(0, None)?;
    let mut w = create(&dir, TRAJECTORY_FILE, files)?;
    traj.write_aggregates_csv(&mut w)?;
    w.flush()?;
    if !traj.snapshots.is_empty() {
        let mut w = create(&dir, SNAPSHOT_FILE, files)?;
        traj.write_snapshots_csv(&mut w)?;
        w.flush()?;
    }
    if spec.record.events {
        let mut w = create(&dir, EVENT_FILE, files)?;
        traj.write_events_csv(&mut w)?;
        w.flush()?;
    }
    let mut w = create(&dir, GRAPH_FILE, files)?;
    graph.write_edge_list(&mut w)?;
    w.flush()?;

    let mut notes = Vec::new();
    let regime = classify_regime(
        &traj.pooled_savings(traj.summary.window_start),
        traj.summary.std_s_tilde,
        traj.summary.mean_s_tilde,
        &spec.regime,
    )
    .map_err(|e| notes.push(format!("regime: {e}")))
    .ok();
    let cycles = analyze_cycles(&traj.times, &traj.aggregates, traj.summary.window_start, spec.params.big_l)
        .map_err(|e| notes.push(format!("cycles: {e}")))
        .ok();
    let p = &spec.params;
    let golden = golden_rule(p.alpha, p.delta, p.rho);
    match rck_reference_trajectory(p, 0.2 * golden.k_star, 3.0 * golden.k_star, 200) {
        Ok(rck) => {
            let mut w = create(&dir, SADDLE_FILE, files)?;
            writeln!(w, "k,c")?;
            for (k, c) in rck.saddle_path() {
                writeln!(w, "{},{}", fmt_f64(k), fmt_f64(c))?;
            }
            w.flush()?;
            let mut w = create(&dir, LOCUS_FILE, files)?;
            writeln!(w, "k,c")?;
            for (k, c) in &rck.locus {
                writeln!(w, "{},{}", fmt_f64(*k), fmt_f64(*c))?;
            }
            w.flush()?;
        }
        Err(e) => notes.push(format!("saddle path: {e}")),
    }
    let report = SingleReport {
        mode: Mode::Single,
        summary: &traj.summary,
        regime,
        cycles,
        golden_rule: golden,
        s_star_tau: s_star_tau(p.tau, p.delta),
        notes,
    };
    write_json(&dir, REPORT_FILE, &report, files)
}

/// Per-`tau` result of an ensemble.
#[derive(Debug, Clone, Serialize)]
struct EnsembleStats {
    tau: f64,
    members: usize,
    failed: usize,
    mean_s_tilde: f64,
    /// Spread of per-member mean `s_tilde`.
    sd_s_tilde: f64,
    mean_output: f64,
    mean_consumption: f64,
    s_star_tau: f64,
    oscillatory_fraction: f64,
    regime: Option<RegimeReport>,
    #[serde(skip)]
    histogram: Vec<f64>,
    #[serde(skip)]
    summaries: Vec<Option<RunSummary>>,
}

fn ensemble_stats(
    spec: &MemberSpec,
    members: usize,
    regime_cfg: &RegimeConfig,
    failures: &mut Vec<MemberFailure>,
    tau_label: Option<f64>,
) -> Result<EnsembleStats> {
    let results = run_members(spec, members)?;
    let mut ok: Vec<Trajectory> = Vec::with_capacity(members);
    let mut summaries = Vec::with_capacity(members);
    let mut votes = 0usize;
    let mut classified = 0usize;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => {
                if let Ok(rep) = classify_regime(
                    &t.pooled_savings(t.summary.window_start),
                    t.summary.std_s_tilde,
                    t.summary.mean_s_tilde,
                    regime_cfg,
                ) {
                    classified += 1;
                    votes += (rep.classification == Regime::Oscillatory) as usize;
                }
                summaries.push(Some(t.summary.clone()));
                ok.push(t);
            }
            Err(e) => {
                summaries.push(None);
                failures.push(MemberFailure {
                    tau: tau_label,
                    member: i,
                    error: e.to_string(),
                });
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::InsufficientData(format!(
            "all {members} ensemble members failed at tau = {}",
            spec.params.tau
        )));
    }
    let m = ok.len() as f64;
    let mean_s = ok.iter().map(|t| t.summary.mean_s_tilde).sum::<f64>() / m;
    let sd_s = (ok.iter().map(|t| (t.summary.mean_s_tilde - mean_s).powi(2)).sum::<f64>() / m).sqrt();
    let pooled: Vec<f64> = ok.iter().flat_map(|t| t.pooled_savings(t.summary.window_start)).collect();
    let refs: Vec<&Trajectory> = ok.iter().collect();
    Ok(EnsembleStats {
        tau: spec.params.tau,
        members,
        failed: members - ok.len(),
        mean_s_tilde: mean_s,
        sd_s_tilde: sd_s,
        mean_output: ok.iter().map(|t| t.summary.mean_output).sum::<f64>() / m,
        mean_consumption: ok.iter().map(|t| t.summary.mean_consumption).sum::<f64>() / m,
        s_star_tau: s_star_tau(spec.params.tau, spec.params.delta),
        oscillatory_fraction: if classified > 0 { votes as f64 / classified as f64 } else { f64::NAN },
        regime: classify_ensemble(&refs, regime_cfg).ok(),
        histogram: savings_histogram(&pooled, regime_cfg.bins()),
        summaries,
    })
}

fn run_ensemble_mode(spec: &ExperimentSpec, outcome: &mut Outcome) -> Result<()> {
    let dir = outcome.dir.clone();
    let member = spec.member_spec();
    let stats = ensemble_stats(&member, spec.ensemble.members, &spec.regime, &mut outcome.failures, None)?;
    let files = &mut outcome.files;
    let mut w = create(&dir, ENSEMBLE_FILE, files)?;
    writeln!(
        w,
        "member,status,mean_s_tilde,std_s_tilde,mean_output,mean_consumption,mean_capital,final_s_tilde"
    )?;
    for (i, s) in stats.summaries.iter().enumerate() {
        match s {
            Some(s) => writeln!(
                w,
                "{i},ok,{},{},{},{},{},{}",
                fmt_f64(s.mean_s_tilde),
                fmt_f64(s.std_s_tilde),
                fmt_f64(s.mean_output),
                fmt_f64(s.mean_consumption),
                fmt_f64(s.mean_capital),
                fmt_f64(s.final_s_tilde)
            )?,
            None => writeln!(w, "{i},failed,,,,,,")?,
        }
    }
    w.flush()?;
    let mut w = create(&dir, HISTOGRAM_FILE, files)?;
    write_histogram_rows(&mut w, spec.regime.bins(), &[(stats.tau, stats.histogram.clone())])?;
    w.flush()?;
    #[derive(Serialize)]
    struct Report<'a> {
        mode: Mode,
        ensemble: &'a EnsembleStats,
        failures: &'a [MemberFailure],
    }
    let report = Report {
        mode: Mode::Ensemble,
        ensemble: &stats,
        failures: &outcome.failures,
    };
    write_json(&dir, REPORT_FILE, &report, files)
}

fn run_sweep(spec: &ExperimentSpec, outcome: &mut Outcome) -> Result<()> {
    let dir = outcome.dir.clone();
    let mut rows = Vec::with_capacity(spec.sweep.taus.len());
    for &tau in &spec.sweep.taus {
        let mut member = spec.member_spec();
        member.params.tau = tau;
        member.params.validate()?;
        member.record = spec.record.record_spec(&member.params);
        rows.push(ensemble_stats(
            &member,
            spec.ensemble.members,
            &spec.regime,
            &mut outcome.failures,
            Some(tau),
        )?);
    }
    let files = &mut outcome.files;
    let mut w = create(&dir, HISTOGRAM_FILE, files)?;
    let hist: Vec<(f64, Vec<f64>)> = rows.iter().map(|r| (r.tau, r.histogram.clone())).collect();
    write_histogram_rows(&mut w, spec.regime.bins(), &hist)?;
    w.flush()?;
    let mut w = create(&dir, SWEEP_FILE, files)?;
    writeln!(
        w,
        "tau,members,failed,mean_s_tilde,sd_s_tilde,s_star_tau,mean_output,mean_consumption,oscillatory_fraction,classification"
    )?;
    for r in &rows {
        let class = match r.regime.as_ref().map(|g| g.classification) {
            Some(Regime::Stable) => "stable",
            Some(Regime::Oscillatory) => "oscillatory",
            None => "unknown",
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{class}",
            fmt_f64(r.tau),
            r.members,
            r.failed,
            fmt_f64(r.mean_s_tilde),
            fmt_f64(r.sd_s_tilde),
            fmt_f64(r.s_star_tau),
            fmt_f64(r.mean_output),
            fmt_f64(r.mean_consumption),
            fmt_f64(r.oscillatory_fraction)
        )?;
    }
    w.flush()?;
    #[derive(Serialize)]
    struct Report<'a> {
        mode: Mode,
        sweep: &'a [EnsembleStats],
        failures: &'a [MemberFailure],
    }
    let report = Report {
        mode: Mode::TauSweep,
        sweep: &rows,
        failures: &outcome.failures,
    };
    write_json(&dir, REPORT_FILE, &report, files)
}

fn tau_c_failures(probes: &[crate::analytics::Probe], failures: &mut Vec<MemberFailure>) {
    for p in probes.iter().filter(|p| p.failed > 0) {
        failures.push(MemberFailure {
            tau: Some(p.tau),
            member: usize::MAX,
            error: format!("{} probe members failed", p.failed),
        });
    }
}

fn run_tau_c(spec: &ExperimentSpec, outcome: &mut Outcome) -> Result<()> {
    let estimate = estimate_tau_c(&spec.member_spec(), &spec.probe_config(), &spec.bisection)?;
    tau_c_failures(&estimate.probes, &mut outcome.failures);
    let dir = outcome.dir.clone();
    write_json(&dir, REPORT_FILE, &estimate, &mut outcome.files)
}

fn run_scaling(spec: &ExperimentSpec, outcome: &mut Outcome) -> Result<()> {
    let study = scaling_study(
        &spec.member_spec(),
        &spec.scaling.ns,
        &spec.scaling.ps,
        spec.scaling.policy,
        &spec.probe_config(),
        &spec.bisection,
    )?;
    for cell in &study.cells {
        tau_c_failures(&cell.estimate.probes, &mut outcome.failures);
    }
    let dir = outcome.dir.clone();
    let files = &mut outcome.files;
    let mut w = create(&dir, SCALING_FILE, files)?;
    writeln!(w, "n,p,chi,mean_degree,tau_c,tau_c_lo,tau_c_hi,residual")?;
    for (cell, res) in study.cells.iter().zip(&study.fit.residuals) {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            cell.n,
            fmt_f64(cell.p),
            fmt_f64(cell.point.chi),
            fmt_f64(cell.point.mean_degree),
            fmt_f64(cell.point.tau_c),
            fmt_f64(cell.estimate.lo),
            fmt_f64(cell.estimate.hi),
            fmt_f64(*res)
        )?;
    }
    w.flush()?;
    write_json(&dir, REPORT_FILE, &study, files)
}

fn run_best_response(spec: &ExperimentSpec, outcome: &mut Outcome) -> Result<()> {
    let rows = best_response_curve(&spec.best_response.taus, spec.best_response.perturbation, &spec.params)?;
    let dir = outcome.dir.clone();
    let files = &mut outcome.files;
    let mut w = create(&dir, BEST_RESPONSE_FILE, files)?;
    writeln!(w, "tau,s_star,above,below")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(r.tau),
            fmt_f64(r.s_star),
            fmt_f64(r.above),
            fmt_f64(r.below)
        )?;
    }
    w.flush()?;
    write_json(&dir, REPORT_FILE, &rows, files)
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectoryAnalysis {
    pub regime: Option<RegimeReport>,
    pub cycles: Option<CycleAnalysis>,
    pub notes: Vec<String>,
}

/// Re-analyses the CSVs of a finished single run and writes `analysis.json`.
/// `burn_in` defaults to half the recorded span; `labor` to 1.
pub fn analyze_directory(
    dir: &Path,
    burn_in: Option<f64>,
    labor: f64,
    regime_cfg: &RegimeConfig,
) -> Result<(DirectoryAnalysis, PathBuf)> {
    let traj_path = dir.join(TRAJECTORY_FILE);
    let file = File::open(&traj_path).map_err(|e| Error::config(traj_path.display().to_string(), e.to_string()))?;
    let (times, aggs) = read_aggregates_csv(BufReader::new(file))?;
    let t_end = times.last().copied().unwrap_or(0.0);
    let from = burn_in.unwrap_or(0.5 * t_end);
    let mut notes = Vec::new();
    let cycles = analyze_cycles(&times, &aggs, from, labor)
        .map_err(|e| notes.push(format!("cycles: {e}")))
        .ok();
    let snap_path = dir.join(SNAPSHOT_FILE);
    let regime = if snap_path.exists() {
        let snaps: Vec<Snapshot> = read_snapshots_csv(BufReader::new(File::open(&snap_path)?))?;
        let samples: Vec<f64> = snaps
            .iter()
            .filter(|s| s.t >= from)
            .flat_map(|s| s.savings.iter().copied())
            .collect();
        let (order, mean) = cycles
            .as_ref()
            .map(|c| (c.s_tilde_std, c.s_tilde_mean))
            .unwrap_or((0.0, f64::NAN));
        classify_regime(&samples, order, mean, regime_cfg)
            .map_err(|e| notes.push(format!("regime: {e}")))
            .ok()
    } else {
        notes.push(format!("regime: no {SNAPSHOT_FILE}"));
        None
    };
    let analysis = DirectoryAnalysis { regime, cycles, notes };
    let mut files = Vec::new();
    write_json(dir, ANALYSIS_FILE, &analysis, &mut files)?;
    Ok((analysis, files.remove(0)))
}
