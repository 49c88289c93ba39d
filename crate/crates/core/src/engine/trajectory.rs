//! Recorded output of a run and its CSV forms.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::econ::{Aggregates, EconomyState};
use crate::error::{Error, Result};

pub const AGGREGATE_HEADER: &str = "t,K,Y,C,s_tilde,r,w";
pub const SNAPSHOT_HEADER: &str = "t,i,K_i,s_i";
pub const EVENT_HEADER: &str = "t,i,old_s,new_s,copied_from";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub capital: Vec<f64>,
    pub savings: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub t: f64,
    pub household: usize,
    pub old_rate: f64,
    pub new_rate: f64,
    pub copied_from: usize,
}

/// Streaming statistics over the part of the run past burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub window_start: f64,
    pub samples: u64,
    pub mean_s_tilde: f64,
    /// Standard deviation of the aggregate savings rate; the order parameter.
    pub std_s_tilde: f64,
    pub mean_output: f64,
    pub mean_consumption: f64,
    pub mean_capital: f64,
    pub final_s_tilde: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct SummaryAccumulator {
    pub window_start: f64,
    n: u64,
    mean_s: f64,
    m2_s: f64,
    sum_y: f64,
    sum_c: f64,
    sum_k: f64,
    last_s: f64,
}

impl SummaryAccumulator {
    pub fn new(window_start: f64) -> Self {
        SummaryAccumulator {
            window_start,
            ..Default::default()
        }
    }

    pub fn push(&mut self, agg: &Aggregates) {
        self.n += 1;
        let d = agg.s_tilde - self.mean_s;
        self.mean_s += d / self.n as f64;
        self.m2_s += d * (agg.s_tilde - self.mean_s);
        self.sum_y += agg.output;
        self.sum_c += agg.consumption;
        self.sum_k += agg.capital;
        self.last_s = agg.s_tilde;
    }

    pub fn finish(&self) -> RunSummary {
        let n = self.n.max(1) as f64;
        RunSummary {
            window_start: self.window_start,
            samples: self.n,
            mean_s_tilde: self.mean_s,
            std_s_tilde: if self.n > 1 { (self.m2_s / (self.n - 1) as f64).sqrt() } else { 0.0 },
            mean_output: self.sum_y / n,
            mean_consumption: self.sum_c / n,
            mean_capital: self.sum_k / n,
            final_s_tilde: self.last_s,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub aggregates: Vec<Aggregates>,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<UpdateEvent>,
    pub final_state: EconomyState,
    pub summary: RunSummary,
}

impl Trajectory {
    pub fn s_tilde(&self) -> Vec<f64> {
        self.aggregates.iter().map(|a| a.s_tilde).collect()
    }

    pub fn output(&self) -> Vec<f64> {
        self.aggregates.iter().map(|a| a.output).collect()
    }

    pub fn final_savings(&self) -> Vec<f64> {
        self.final_state.households.iter().map(|h| h.savings_rate).collect()
    }

    /// Savings rates pooled over every snapshot at or after `from`, or the
    /// final cross-section when no snapshot qualifies.
    pub fn pooled_savings(&self, from: f64) -> Vec<f64> {
        let pooled: Vec<f64> = self
            .snapshots
            .iter()
            .filter(|s| s.t >= from)
            .flat_map(|s| s.savings.iter().copied())
            .collect();
        if pooled.is_empty() {
            self.final_savings()
        } else {
            pooled
        }
    }

    /// Aggregates recorded at or after `from`, with their times.
    pub fn window(&self, from: f64) -> (Vec<f64>, Vec<Aggregates>) {
        let start = self.times.partition_point(|&t| t < from);
        (self.times[start..].to_vec(), self.aggregates[start..].to_vec())
    }

    pub fn write_aggregates_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_aggregates_csv(out, &self.times, &self.aggregates)
    }

    pub fn write_snapshots_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SNAPSHOT_HEADER}")?;
        for s in &self.snapshots {
            let t = fmt_f64(s.t);
            for (i, (k, r)) in s.capital.iter().zip(&s.savings).enumerate() {
                writeln!(out, "{t},{i},{},{}", fmt_f64(*k), fmt_f64(*r))?;
            }
        }
        Ok(())
    }

    pub fn write_events_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{EVENT_HEADER}")?;
        for e in &self.events {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(e.t),
                e.household,
                fmt_f64(e.old_rate),
                fmt_f64(e.new_rate),
                e.copied_from
            )?;
        }
        Ok(())
    }
}

pub fn write_aggregates_csv<W: Write>(mut out: W, times: &[f64], aggs: &[Aggregates]) -> std::io::Result<()> {
    writeln!(out, "{AGGREGATE_HEADER}")?;
    for (t, a) in times.iter().zip(aggs) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(a.capital),
            fmt_f64(a.output),
            fmt_f64(a.consumption),
            fmt_f64(a.s_tilde),
            fmt_f64(a.r),
            fmt_f64(a.w)
        )?;
    }
    Ok(())
}

fn parse_fields(line: &str, lineno: usize, expected: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.trim().split(',').collect();
    if fields.len() != expected {
        return Err(Error::InsufficientData(format!(
            "line {lineno}: expected {expected} fields, got {}",
            fields.len()
        )));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::InsufficientData(format!("line {lineno}: {f:?}: {e}")))
        })
        .collect()
}

fn check_header(first: Option<std::io::Result<String>>, header: &str) -> Result<()> {
    match first {
        Some(Ok(h)) if h.trim() == header => Ok(()),
        Some(Ok(h)) => Err(Error::InsufficientData(format!("expected header {header:?}, got {h:?}"))),
        Some(Err(e)) => Err(e.into()),
        None => Err(Error::InsufficientData("empty file".into())),
    }
}

pub fn read_aggregates_csv<R: BufRead>(input: R) -> Result<(Vec<f64>, Vec<Aggregates>)> {
    let mut lines = input.lines();
    check_header(lines.next(), AGGREGATE_HEADER)?;
    let mut times = Vec::new();
    let mut aggs = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_fields(&line, n + 2, 7)?;
        times.push(v[0]);
        aggs.push(Aggregates {
            capital: v[1],
            output: v[2],
            consumption: v[3],
            s_tilde: v[4],
            r: v[5],
            w: v[6],
        });
    }
    Ok((times, aggs))
}

pub fn read_snapshots_csv<R: BufRead>(input: R) -> Result<Vec<Snapshot>> {
    let mut lines = input.lines();
    check_header(lines.next(), SNAPSHOT_HEADER)?;
    let mut out: Vec<Snapshot> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_fields(&line, n + 2, 4)?;
        match out.last_mut() {
            Some(s) if s.t == v[0] => {
                s.capital.push(v[2]);
                s.savings.push(v[3]);
            }
            _ => out.push(Snapshot {
                t: v[0],
                capital: vec![v[2]],
                savings: vec![v[3]],
            }),
        }
    }
    Ok(out)
}
