//! Time stepping: Euler capital dynamics every step, Poisson-clocked
//! imitate-the-best revisions of savings rates, and recording.

mod imitation;
mod schedule;
mod trajectory;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use imitation::{imitate_best, Imitation};
pub use schedule::{update_probability, ScheduleMode, Scheduler};
pub use trajectory::{
    fmt_f64, read_aggregates_csv, read_snapshots_csv, write_aggregates_csv, RunSummary, Snapshot, Trajectory,
    UpdateEvent, AGGREGATE_HEADER, EVENT_HEADER, SNAPSHOT_HEADER,
};

use crate::econ::{factor_prices, production, Aggregates, EconomyState, Household};
use crate::error::{Error, Result};
use crate::network::SocialGraph;
use crate::params::Params;
use trajectory::SummaryAccumulator;

pub type SimRng = ChaCha8Rng;

/// Independent RNG stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum InitSavings {
    /// i.i.d. Uniform(0, 1).
    #[default]
    Uniform,
    Constant(f64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSpec {
    pub k0: f64,
    pub savings: InitSavings,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            k0: 1.0,
            savings: InitSavings::Uniform,
        }
    }
}

impl InitSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return Err(Error::param("k0", format!("must be finite and > 0, got {}", self.k0)));
        }
        match &self.savings {
            InitSavings::Uniform => Ok(()),
            InitSavings::Constant(v) if (0.0..=1.0).contains(v) => Ok(()),
            InitSavings::Constant(v) => Err(Error::param("s0", format!("must lie in [0,1], got {v}"))),
            InitSavings::Explicit(v) if v.len() != n => Err(Error::param(
                "s0",
                format!("explicit list has {} entries for {n} households", v.len()),
            )),
            InitSavings::Explicit(v) => match v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                Some(x) => Err(Error::param("s0", format!("rate {x} outside [0,1]"))),
                None => Ok(()),
            },
        }
    }

    pub fn households<R: Rng + ?Sized>(&self, params: &Params, rng: &mut R) -> Vec<Household> {
        let labor = params.labor_per_household();
        (0..params.n)
            .map(|i| {
                let s = match &self.savings {
                    InitSavings::Uniform => rng.random::<f64>(),
                    InitSavings::Constant(v) => *v,
                    InitSavings::Explicit(v) => v[i],
                };
                Household::new(self.k0, s, labor)
            })
            .collect()
    }
}

/// Which series to keep. Strides count steps; zero disables the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordSpec {
    pub aggregate_stride: u64,
    pub snapshot_stride: u64,
    /// Time before which neither aggregates nor snapshots are stored.
    pub record_from: f64,
    /// Start of the summary-statistics window; `None` means half the horizon.
    pub burn_in: Option<f64>,
    pub events: bool,
}

impl Default for RecordSpec {
    fn default() -> Self {
        RecordSpec {
            aggregate_stride: 1,
            snapshot_stride: 0,
            record_from: 0.0,
            burn_in: None,
            events: false,
        }
    }
}

impl RecordSpec {
    /// Summary statistics only; nothing stored per step.
    pub fn summary_only() -> Self {
        RecordSpec {
            aggregate_stride: 0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: Params,
    pub graph: Arc<SocialGraph>,
    pub init: InitSpec,
    pub record: RecordSpec,
    pub schedule: ScheduleMode,
}

impl SimConfig {
    pub fn new(params: Params, graph: Arc<SocialGraph>) -> Self {
        SimConfig {
            params,
            graph,
            init: InitSpec::default(),
            record: RecordSpec::default(),
            schedule: ScheduleMode::Bernoulli,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.graph.n() != self.params.n {
            return Err(Error::param(
                "n",
                format!("graph has {} nodes but n = {}", self.graph.n(), self.params.n),
            ));
        }
        if self.graph.has_isolated_node() {
            return Err(Error::Graph("graph has an isolated node".into()));
        }
        self.init.validate(self.params.n)
    }

    pub fn burn_in(&self) -> f64 {
        self.record.burn_in.unwrap_or(0.5 * self.params.horizon())
    }
}

/// A running economy. Owns the cross-section, scheduler and scratch buffers.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    state: EconomyState,
    step_index: u64,
    total_capital: f64,
    scheduler: Scheduler,
    due: Vec<usize>,
    savings_seen: Vec<f64>,
    consumption_seen: Vec<f64>,
    pending: Vec<(usize, Imitation)>,
}

impl Simulation {
    pub fn new<R: Rng + ?Sized>(config: SimConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let p = &config.params;
        if p.dt > p.tau && config.schedule != ScheduleMode::Disabled {
            eprintln!("warning: dt = {} exceeds tau = {}; several updates per step are merged", p.dt, p.tau);
        }
        let households = config.init.households(p, rng);
        let scheduler = Scheduler::new(config.schedule, p.n, p.tau, p.dt, rng);
        let n = p.n;
        let state = EconomyState { t: 0.0, households };
        Ok(Simulation {
            total_capital: state.total_capital(),
            state,
            config,
            step_index: 0,
            scheduler,
            due: Vec::with_capacity(n),
            savings_seen: vec![0.0; n],
            consumption_seen: vec![0.0; n],
            pending: Vec::with_capacity(n),
        })
    }

    pub fn state(&self) -> &EconomyState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// Advances one `dt`:
    /// 1. prices from current aggregate capital;
    /// 2. incomes and consumptions;
    /// 3. scheduled households revise in random order, all reading phase-2 values;
    /// 4. Euler capital update with the revised rates;
    /// 5. `t += dt`.
    ///
    /// Returns the aggregates in force over the step (revised rates, capital at
    /// the start of the step). Copy events are appended to `events` if given.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        mut events: Option<&mut Vec<UpdateEvent>>,
    ) -> Result<Aggregates> {
        let p = &self.config.params;
        let labor = p.big_l;
        let capital = self.total_capital;
        let prices = factor_prices(capital, labor, p.alpha)?;

        self.scheduler
            .due(self.step_index, self.state.t, p.dt, rng, &mut self.due);
        if !self.due.is_empty() {
            for (i, h) in self.state.households.iter().enumerate() {
                let income = prices.r * h.capital + prices.w * h.labor;
                self.savings_seen[i] = h.savings_rate;
                self.consumption_seen[i] = (1.0 - h.savings_rate) * income;
            }
            self.due.shuffle(rng);
            self.pending.clear();
            for &i in &self.due {
                let imitation = imitate_best(
                    i,
                    &self.savings_seen,
                    &self.consumption_seen,
                    &self.config.graph,
                    rng,
                    p.eps_width,
                );
                self.pending.push((i, imitation));
            }
            for &(i, imitation) in &self.pending {
                if let Some(j) = imitation.copied_from {
                    if let Some(log) = events.as_deref_mut() {
                        log.push(UpdateEvent {
                            t: self.state.t,
                            household: i,
                            old_rate: self.state.households[i].savings_rate,
                            new_rate: imitation.new_rate,
                            copied_from: j,
                        });
                    }
                }
                self.state.households[i].savings_rate = imitation.new_rate;
            }
        }

        let (delta, dt) = (p.delta, p.dt);
        let mut income_total = 0.0;
        let mut investment = 0.0;
        let mut next_capital = 0.0;
        for (i, h) in self.state.households.iter_mut().enumerate() {
            let income = prices.r * h.capital + prices.w * h.labor;
            let invest = h.savings_rate * income;
            income_total += income;
            investment += invest;
            let k = h.capital + dt * (invest - delta * h.capital);
            if !k.is_finite() {
                return Err(Error::NumericalBlowUp {
                    step: self.step_index,
                    household: i,
                    detail: format!("capital became {k}"),
                });
            }
            h.capital = k.max(0.0);
            next_capital += h.capital;
        }
        let output = production(capital, labor, p.alpha)?;
        let aggregates = Aggregates {
            capital,
            output,
            r: prices.r,
            w: prices.w,
            s_tilde: investment / income_total,
            consumption: income_total - investment,
        };
        self.total_capital = next_capital;
        self.step_index += 1;
        self.state.t = self.step_index as f64 * dt;
        Ok(aggregates)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.state.t,
            capital: self.state.households.iter().map(|h| h.capital).collect(),
            savings: self.state.households.iter().map(|h| h.savings_rate).collect(),
        }
    }

    /// Runs to the configured horizon, recording per `RecordSpec`.
    pub fn run_to_end<R: Rng + ?Sized>(mut self, rng: &mut R) -> Result<Trajectory> {
        let steps = self.config.params.steps();
        let record = self.config.record.clone();
        let burn_in = self.config.burn_in();
        let mut summary = SummaryAccumulator::new(burn_in);
        let mut times = Vec::new();
        let mut aggregates = Vec::new();
        let mut snapshots = Vec::new();
        let mut events = Vec::new();
        for _ in 0..steps {
            let k = self.step_index;
            let t = self.state.t;
            if record.snapshot_stride > 0 && k % record.snapshot_stride == 0 && t >= record.record_from {
                snapshots.push(self.snapshot());
            }
            let agg = self.step(rng, record.events.then_some(&mut events))?;
            if record.aggregate_stride > 0 && k % record.aggregate_stride == 0 && t >= record.record_from {
                times.push(t);
                aggregates.push(agg);
            }
            if t >= burn_in {
                summary.push(&agg);
            }
        }
        if record.snapshot_stride > 0 && self.step_index % record.snapshot_stride == 0 {
            snapshots.push(self.snapshot());
        }
        Ok(Trajectory {
            times,
            aggregates,
            snapshots,
            events,
            final_state: self.state,
            summary: summary.finish(),
        })
    }
}

/// Runs `config` with the RNG stream derived from its seed alone.
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    let mut rng = stream_rng(config.params.seed, 0);
    run_with_rng(config, &mut rng)
}

pub fn run_with_rng<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Trajectory> {
    Simulation::new(config.clone(), rng)?.run_to_end(rng)
}
