//! Experiment specifications: TOML files, flag overrides and manifests.
//!
//! Resolution order is preset defaults, then the file, then flags. The
//! fully resolved spec is written back as `manifest.txt`, which loads like
//! any other config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::analytics::{er_topology, BisectionConfig, ProbeConfig, RegimeConfig};
use crate::engine::{InitSpec, RecordSpec, ScheduleMode};
use crate::ensemble::{MemberSpec, Topology};
use crate::error::{Error, Result};
use crate::network::ConnectivityPolicy;
use crate::params::Params;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Single,
    Ensemble,
    TauSweep,
    TauCSearch,
    ScalingStudy,
    BestResponseCurve,
}

/// Named starting points for the parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Defaults,
    /// Faster depreciation, used for topology studies.
    NetworkStudy,
}

impl Preset {
    pub fn params(self) -> Params {
        match self {
            Preset::Defaults => Params::default(),
            Preset::NetworkStudy => Params::network_study(),
        }
    }
}

/// What a run stores. Counts are spread evenly over the horizon; 0 disables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordPlan {
    pub aggregate_samples: u64,
    pub snapshot_samples: u64,
    pub events: bool,
    /// Start of the analysis window; unset means half the horizon.
    pub burn_in: Option<f64>,
}

impl Default for RecordPlan {
    fn default() -> Self {
        RecordPlan {
            aggregate_samples: 100_000,
            snapshot_samples: 200,
            events: false,
            burn_in: None,
        }
    }
}

impl RecordPlan {
    pub fn record_spec(&self, params: &Params) -> RecordSpec {
        let steps = params.steps();
        let stride = |samples: u64| if samples == 0 { 0 } else { (steps / samples).max(1) };
        RecordSpec {
            aggregate_stride: stride(self.aggregate_samples),
            snapshot_stride: stride(self.snapshot_samples),
            record_from: 0.0,
            burn_in: self.burn_in,
            events: self.events,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSpec {
    pub members: usize,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec { members: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub taus: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            taus: vec![10.0, 50.0, 100.0, 250.0, 500.0],
        }
    }
}

/// Per-probe ensemble used by the critical-time search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSpec {
    pub members: usize,
    pub horizon_taus: f64,
    pub snapshots: u64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        let p = ProbeConfig::default();
        ProbeSpec {
            members: p.members,
            horizon_taus: p.horizon_taus,
            snapshots: p.snapshots,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSpec {
    pub ns: Vec<usize>,
    /// Edge probabilities; 1 means the complete graph.
    pub ps: Vec<f64>,
    pub policy: ConnectivityPolicy,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec {
            ns: vec![50, 100, 200],
            ps: vec![0.2, 0.5, 1.0],
            policy: ConnectivityPolicy::Connected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BestResponseSpec {
    pub taus: Vec<f64>,
    pub perturbation: f64,
}

impl Default for BestResponseSpec {
    fn default() -> Self {
        // 1 to 10^4, ten points per decade.
        let taus = (0..=40).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        BestResponseSpec { taus, perturbation: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub preset: Preset,
    pub out: PathBuf,
    /// Version that wrote the manifest; informational on load.
    pub code_version: String,
    pub schedule: ScheduleMode,
    pub params: Params,
    pub network: Topology,
    pub init: InitSpec,
    pub record: RecordPlan,
    pub ensemble: EnsembleSpec,
    pub sweep: SweepSpec,
    pub bisection: BisectionConfig,
    pub probe: ProbeSpec,
    pub scaling: ScalingSpec,
    pub best_response: BestResponseSpec,
    pub regime: RegimeConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec::with_preset(Preset::Defaults)
    }
}

impl ExperimentSpec {
    pub fn with_preset(preset: Preset) -> Self {
        ExperimentSpec {
            mode: Mode::default(),
            preset,
            out: PathBuf::from("out"),
            code_version: CODE_VERSION.to_string(),
            schedule: ScheduleMode::default(),
            params: preset.params(),
            network: Topology::default(),
            init: InitSpec::default(),
            record: RecordPlan::default(),
            ensemble: EnsembleSpec::default(),
            sweep: SweepSpec::default(),
            bisection: BisectionConfig::default(),
            probe: ProbeSpec::default(),
            scaling: ScalingSpec::default(),
            best_response: BestResponseSpec::default(),
            regime: RegimeConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| match e {
            Error::InvalidParam { name, reason } => Error::config(format!("params.{name}"), reason),
            other => other,
        })?;
        if self.params.seed > i64::MAX as u64 {
            return Err(Error::config("params.seed", "must fit in a signed 64-bit integer"));
        }
        self.init
            .validate(self.params.n)
            .map_err(|e| Error::config("init", e.to_string()))?;
        match self.network {
            Topology::Complete => {}
            Topology::Er { p, .. } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::config("network.p", format!("must lie in (0, 1], got {p}")));
                }
            }
            Topology::Ws { k_ring, p_rewire } => {
                if k_ring < 2 || k_ring % 2 != 0 || k_ring >= self.params.n {
                    return Err(Error::config(
                        "network.k_ring",
                        format!("must be even, at least 2 and below n, got {k_ring}"),
                    ));
                }
                if !(0.0..=1.0).contains(&p_rewire) {
                    return Err(Error::config("network.p_rewire", format!("must lie in [0, 1], got {p_rewire}")));
                }
            }
        }
        if self.record.burn_in.is_some_and(|b| !(b >= 0.0 && b.is_finite())) {
            return Err(Error::config("record.burn_in", "must be finite and non-negative"));
        }
        if self.ensemble.members == 0 {
            return Err(Error::config("ensemble.members", "must be at least 1"));
        }
        positive_list("sweep.taus", &self.sweep.taus)?;
        positive_list("best_response.taus", &self.best_response.taus)?;
        if !(self.best_response.perturbation > 0.0 && self.best_response.perturbation < 0.5) {
            return Err(Error::config("best_response.perturbation", "must lie in (0, 0.5)"));
        }
        let b = &self.bisection;
        if !(b.lo > 0.0 && b.hi > b.lo && b.hi.is_finite()) {
            return Err(Error::config("bisection", format!("need 0 < lo < hi, got [{}, {}]", b.lo, b.hi)));
        }
        if !(b.rel_width > 0.0) {
            return Err(Error::config("bisection.rel_width", "must be positive"));
        }
        if self.probe.members == 0 {
            return Err(Error::config("probe.members", "must be at least 1"));
        }
        if !(self.probe.horizon_taus > 0.0 && self.probe.horizon_taus.is_finite()) {
            return Err(Error::config("probe.horizon_taus", "must be positive"));
        }
        if self.scaling.ns.iter().any(|&n| n < 2) || self.scaling.ns.is_empty() {
            return Err(Error::config("scaling.ns", "need at least one size, each at least 2"));
        }
        if self.scaling.ps.is_empty() || self.scaling.ps.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::config("scaling.ps", "need probabilities in (0, 1]"));
        }
        let r = &self.regime;
        if !(r.bin_width > 0.0 && r.bin_width <= 0.5) {
            return Err(Error::config("regime.bin_width", "must lie in (0, 0.5]"));
        }
        Ok(())
    }

    /// Base member for ensembles built from this spec.
    pub fn member_spec(&self) -> MemberSpec {
        MemberSpec {
            params: self.params.clone(),
            topology: self.network.clone(),
            init: self.init.clone(),
            record: self.record.record_spec(&self.params),
            schedule: self.schedule,
        }
    }

    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig {
            members: self.probe.members,
            horizon_taus: self.probe.horizon_taus,
            snapshots: self.probe.snapshots,
            regime: self.regime.clone(),
        }
    }

    pub fn scaling_topology(&self, p: f64) -> Topology {
        er_topology(p, self.scaling.policy)
    }

    /// Manifest text: the resolved spec stamped with the running version.
    pub fn to_manifest(&self) -> Result<String> {
        let stamped = ExperimentSpec {
            code_version: CODE_VERSION.to_string(),
            ..self.clone()
        };
        let body = toml::to_string(&stamped).map_err(|e| Error::config("manifest", e.to_string()))?;
        Ok(format!("# rck-abm experiment manifest\n{body}"))
    }
}

fn positive_list(key: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::config(key, "need a non-empty list of positive values"));
    }
    Ok(())
}

/// Parses `key=value` as a dotted key and a TOML value; bare words become strings.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "expected key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

/// Sets a dotted key, creating tables on the way. Changing a `kind` drops
/// the sibling keys that belonged to the previous variant.
fn set_dotted(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config(key, "empty key"))?;
    let mut cur = table;
    for part in parts {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
    }
    if last == "kind" && cur.get("kind") != Some(&value) {
        cur.clear();
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => {
                if o.get("kind").is_some_and(|kind| b.get("kind") != Some(kind)) {
                    *b = o;
                } else {
                    merge(b, o);
                }
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Resolves a spec from TOML text plus ordered overrides.
pub fn resolve(text: &str, overrides: &[(String, Value)]) -> Result<ExperimentSpec> {
    let mut raw: Table = text.parse().map_err(|e: toml::de::Error| Error::config("file", e.to_string()))?;
    // `kind` first so that a variant switch does not discard its own fields.
    let mut ordered: Vec<&(String, Value)> = overrides.iter().collect();
    ordered.sort_by_key(|(k, _)| !k.ends_with(".kind"));
    for (k, v) in ordered {
        set_dotted(&mut raw, k, v.clone())?;
    }
    let preset: Preset = match raw.get("preset") {
        Some(v) => v.clone().try_into().map_err(|e: toml::de::Error| Error::config("preset", e.to_string()))?,
        None => Preset::default(),
    };
    let mut table = match Value::try_from(ExperimentSpec::with_preset(preset)) {
        Ok(Value::Table(t)) => t,
        _ => return Err(Error::config("defaults", "could not materialise defaults")),
    };
    merge(&mut table, raw);
    check_network_keys(&table)?;
    let spec: ExperimentSpec = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(offending_key(&e.to_string()), e.message().trim().to_string()))?;
    if spec.code_version != CODE_VERSION {
        eprintln!(
            "warning: manifest written by version {}, running {}",
            spec.code_version, CODE_VERSION
        );
    }
    spec.validate()?;
    Ok(spec)
}

/// Unit variants ignore stray keys during deserialization, so check by hand.
fn check_network_keys(table: &Table) -> Result<()> {
    let Some(Value::Table(net)) = table.get("network") else {
        return Ok(());
    };
    let allowed: &[&str] = match net.get("kind").and_then(Value::as_str) {
        Some("er") => &["kind", "p", "policy"],
        Some("ws") => &["kind", "k_ring", "p_rewire"],
        _ => &["kind"],
    };
    match net.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::config(
            format!("network.{k}"),
            format!("not a field of this topology (expected one of {allowed:?})"),
        )),
        None => Ok(()),
    }
}

/// Best-effort key name from a deserializer message.
fn offending_key(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string())
}

/// Reads an optional config file and applies flag overrides on top.
pub fn load_config(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<ExperimentSpec> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::config(p.display().to_string(), e.to_string()))?,
        None => String::new(),
    };
    resolve(&text, overrides)
}
