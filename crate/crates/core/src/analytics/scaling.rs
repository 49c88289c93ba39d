//! Log-linear fit of `<k> tau_c` against the average shortest path length.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::tau_c::{estimate_tau_c, BisectionConfig, ProbeConfig, TauCEstimate};
use crate::engine::stream_rng;
use crate::ensemble::{MemberSpec, Topology};
use crate::error::{Error, Result};
use crate::network::{avg_shortest_path, mean_degree, ConnectivityPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub chi: f64,
    pub mean_degree: f64,
    pub tau_c: f64,
}

/// One cell of a scaling study: an ER graph family and its critical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCell {
    pub n: usize,
    pub p: f64,
    pub point: ScalingPoint,
    pub estimate: TauCEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub cells: Vec<ScalingCell>,
    pub fit: ScalingFit,
}

/// Erdos-Renyi family for `p < 1`, the complete graph otherwise.
pub fn er_topology(p: f64, policy: ConnectivityPolicy) -> Topology {
    if p >= 1.0 {
        Topology::Complete
    } else {
        Topology::Er { p, policy }
    }
}

/// Mean path length and degree over the graphs the first `members` runs of
/// `spec` will use. Each member draws its graph first from its own stream.
pub fn ensemble_graph_statistics(spec: &MemberSpec, members: usize) -> Result<(f64, f64)> {
    let draws = if spec.topology.is_random() { members.max(1) } else { 1 };
    let (mut chi, mut k) = (0.0, 0.0);
    for i in 0..draws {
        let stream = if spec.topology.is_random() { i as u64 } else { u64::MAX };
        let g = spec.topology.build(spec.params.n, &mut stream_rng(spec.params.seed, stream))?;
        chi += avg_shortest_path(&g)?;
        k += mean_degree(&g);
    }
    Ok((chi / draws as f64, k / draws as f64))
}

/// Critical time on every `(n, p)` cell, then the log-linear fit.
/// Disconnected graphs have no finite path length, so `policy` should
/// usually be [`ConnectivityPolicy::Connected`].
pub fn scaling_study(
    base: &MemberSpec,
    ns: &[usize],
    ps: &[f64],
    policy: ConnectivityPolicy,
    probe: &ProbeConfig,
    bisection: &BisectionConfig,
) -> Result<ScalingStudy> {
    let mut cells = Vec::with_capacity(ns.len() * ps.len());
    for &n in ns {
        for &p in ps {
            let mut spec = base.clone();
            spec.params.n = n;
            spec.topology = er_topology(p, policy);
            let (chi, k) = ensemble_graph_statistics(&spec, probe.members)?;
            let estimate = estimate_tau_c(&spec, probe, bisection).map_err(|e| match e {
                Error::Bracket(msg) => Error::Bracket(format!("N = {n}, p = {p}: {msg}")),
                Error::InsufficientData(msg) => Error::InsufficientData(format!("N = {n}, p = {p}: {msg}")),
                other => other,
            })?;
            cells.push(ScalingCell {
                n,
                p,
                point: ScalingPoint { chi, mean_degree: k, tau_c: estimate.tau_c },
                estimate,
            });
        }
    }
    let points: Vec<ScalingPoint> = cells.iter().map(|c| c.point).collect();
    let fit = scaling_fit(&points)?;
    Ok(ScalingStudy { cells, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: (f64, f64),
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

/// Least squares of `ln(<k> tau_c) = slope * chi + intercept`.
pub fn scaling_fit(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.mean_degree > 0.0 && p.tau_c > 0.0 && p.chi.is_finite())) {
        return Err(Error::Domain(format!("invalid scaling point {p:?}")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.chi).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.mean_degree * p.tau_c).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) * n {
        return Err(Error::Domain("degenerate design: all path lengths are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let dof = n - 2.0;
    let slope_stderr = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Domain(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ScalingFit {
        points: points.to_vec(),
        slope,
        intercept,
        slope_stderr,
        slope_ci: (slope - t * slope_stderr, slope + t * slope_stderr),
        residuals,
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    })
}
