//! Seed-indexed ensembles of independent runs.
//!
//! Member `i` of an ensemble with master seed `s` always draws from ChaCha
//! stream `i` under key `s`, so results do not depend on how members are
//! scheduled across workers and ensembles can grow without reshuffling.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{stream_rng, InitSpec, RecordSpec, ScheduleMode, SimConfig, Simulation, Trajectory};
use crate::error::Result;
use crate::network::{
    complete_graph, erdos_renyi, watts_strogatz, ConnectivityPolicy, SocialGraph, DEFAULT_MAX_ATTEMPTS,
};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Topology {
    Complete,
    Er {
        p: f64,
        #[serde(default)]
        policy: ConnectivityPolicy,
    },
    Ws {
        k_ring: usize,
        p_rewire: f64,
    },
}

impl Default for Topology {
    fn default() -> Self {
        Topology::Complete
    }
}

impl Topology {
    pub fn build<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SocialGraph> {
        match *self {
            Topology::Complete => complete_graph(n),
            Topology::Er { p, policy } => erdos_renyi(n, p, rng, policy, DEFAULT_MAX_ATTEMPTS),
            Topology::Ws { k_ring, p_rewire } => watts_strogatz(n, k_ring, p_rewire, rng),
        }
    }

    pub fn is_random(&self) -> bool {
        match *self {
            Topology::Complete => false,
            Topology::Er { p, .. } => p < 1.0,
            Topology::Ws { .. } => true,
        }
    }
}

/// Everything needed to run member `i` of an ensemble.
#[derive(Debug, Clone)]
pub struct MemberSpec {
    pub params: Params,
    pub topology: Topology,
    pub init: InitSpec,
    pub record: RecordSpec,
    pub schedule: ScheduleMode,
}

impl MemberSpec {
    pub fn new(params: Params, topology: Topology) -> Self {
        MemberSpec {
            params,
            topology,
            init: InitSpec::default(),
            record: RecordSpec::summary_only(),
            schedule: ScheduleMode::Bernoulli,
        }
    }

    /// Graph and trajectory for member `index`. Random topologies are drawn
    /// from the member's own stream before the dynamics start.
    pub fn run_member(&self, index: u64, shared_graph: Option<&Arc<SocialGraph>>) -> Result<(Arc<SocialGraph>, Trajectory)> {
        let mut rng = stream_rng(self.params.seed, index);
        let graph = match shared_graph {
            Some(g) if !self.topology.is_random() => Arc::clone(g),
            _ => Arc::new(self.topology.build(self.params.n, &mut rng)?),
        };
        let config = SimConfig {
            params: self.params.clone(),
            graph: Arc::clone(&graph),
            init: self.init.clone(),
            record: self.record.clone(),
            schedule: self.schedule,
        };
        let trajectory = Simulation::new(config, &mut rng)?.run_to_end(&mut rng)?;
        Ok((graph, trajectory))
    }
}

/// Evaluates `f(0..members)` and returns results in index order.
pub fn run_ensemble<T, F>(members: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        run_ensemble_parallel(members, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_ensemble_sequential(members, f)
    }
}

pub fn run_ensemble_sequential<T, F>(members: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..members).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn run_ensemble_parallel<T, F>(members: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..members).into_par_iter().map(f).collect()
}

/// Runs `op` inside a pool of `workers` threads (0 = available parallelism).
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: usize, op: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(_workers: usize, op: impl FnOnce() -> T + Send) -> T {
    op()
}

/// Runs every member of an ensemble; the shared complete graph is built once.
/// The outer error covers setup shared by all members; inner errors are per member.
pub fn run_members(spec: &MemberSpec, members: usize) -> Result<Vec<Result<Trajectory>>> {
    let shared = if spec.topology.is_random() {
        None
    } else {
        let mut rng = stream_rng(spec.params.seed, u64::MAX);
        Some(Arc::new(spec.topology.build(spec.params.n, &mut rng)?))
    };
    Ok(run_ensemble(members, |i| {
        spec.run_member(i as u64, shared.as_ref()).map(|(_, t)| t)
    }))
}
