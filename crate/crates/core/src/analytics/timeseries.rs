//! Periodicity, lead/lag and orbit orientation of aggregate time series.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Removes the least-squares line.
pub fn detrend(series: &[f64]) -> Vec<f64> {
    let n = series.len() as f64;
    if series.len() < 2 {
        return series.iter().map(|_| 0.0).collect();
    }
    let mx = (n - 1.0) / 2.0;
    let my = series.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, y) in series.iter().enumerate() {
        let dx = i as f64 - mx;
        sxx += dx * dx;
        sxy += dx * (y - my);
    }
    let slope = sxy / sxx;
    series
        .iter()
        .enumerate()
        .map(|(i, y)| y - my - slope * (i as f64 - mx))
        .collect()
}

/// Biased sample autocorrelation for lags `0..n`, computed by FFT.
pub fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    fwd.process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let c0 = buf[0].re;
    if c0 <= 0.0 {
        return vec![0.0; n];
    }
    buf[..n].iter().map(|z| z.re / c0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodConfig {
    /// Peaks below this autocorrelation never count, whatever the sample size.
    pub min_peak: f64,
    pub max_secondary: usize,
}

impl Default for PeriodConfig {
    fn default() -> Self {
        PeriodConfig {
            min_peak: 0.05,
            max_secondary: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub dominant: f64,
    pub dominant_acf: f64,
    pub secondary: Vec<f64>,
}

/// Sub-sample peak position from a parabola through three points.
fn refine(acf: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= acf.len() {
        return k as f64;
    }
    let (a, b, c) = (acf[k - 1], acf[k], acf[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-300 {
        k as f64
    } else {
        k as f64 + 0.5 * (a - c) / denom
    }
}

/// Dominant period from the tallest point of the first positive
/// autocorrelation lobe past the first zero crossing; later lobes give
/// secondary periods. `sample_interval` converts lags to time.
pub fn oscillation_period(series: &[f64], sample_interval: f64, config: &PeriodConfig) -> Result<PeriodEstimate> {
    let n = series.len();
    if n < 8 {
        return Err(Error::InsufficientData(format!("need at least 8 samples, got {n}")));
    }
    let x = detrend(series);
    let scale = series.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if x.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return Err(Error::NoPeriodicity);
    }
    let acf = autocorrelation(&x);
    let max_lag = n / 2;
    let floor = (1.96 / (n as f64).sqrt()).max(config.min_peak);

    let mut lobes = Vec::new();
    let mut k = match acf[..max_lag].iter().position(|&v| v < 0.0) {
        Some(k) => k,
        None => return Err(Error::NoPeriodicity),
    };
    while k < max_lag {
        // Skip the negative stretch, then take the argmax of the positive one.
        while k < max_lag && acf[k] <= 0.0 {
            k += 1;
        }
        if k >= max_lag {
            break;
        }
        let start = k;
        while k < max_lag && acf[k] > 0.0 {
            k += 1;
        }
        let peak = (start..k)
            .max_by(|&a, &b| acf[a].partial_cmp(&acf[b]).unwrap())
            .unwrap();
        if lobes.is_empty() && acf[peak] <= floor {
            // Only the first lobe may set the dominant period.
            return Err(Error::NoPeriodicity);
        }
        if acf[peak] > floor {
            lobes.push(peak);
            if lobes.len() > config.max_secondary {
                break;
            }
        }
    }
    let (&first, rest) = lobes.split_first().ok_or(Error::NoPeriodicity)?;
    Ok(PeriodEstimate {
        dominant: refine(&acf, first) * sample_interval,
        dominant_acf: acf[first],
        secondary: rest.iter().map(|&k| refine(&acf, k) * sample_interval).collect(),
    })
}

/// Lag (in samples) maximising `corr(x_t, y_{t+lag})` over `|lag| <= max_lag`.
/// Positive means `y` follows `x`.
pub fn lead_lag(x: &[f64], y: &[f64], max_lag: usize) -> Result<(i64, f64)> {
    let n = x.len().min(y.len());
    if n <= 2 * max_lag + 2 {
        return Err(Error::InsufficientData(format!(
            "{n} samples is too short for lags up to {max_lag}"
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&x[..n]), mean(&y[..n]));
    let sx = x[..n].iter().map(|v| (v - mx).powi(2)).sum::<f64>().sqrt();
    let sy = y[..n].iter().map(|v| (v - my).powi(2)).sum::<f64>().sqrt();
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::InsufficientData("constant series has no correlation".into()));
    }
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -(max_lag as i64)..=(max_lag as i64) {
        let mut acc = 0.0;
        for t in 0..n {
            let u = t as i64 + lag;
            if u < 0 || u >= n as i64 {
                continue;
            }
            acc += (x[t] - mx) * (y[u as usize] - my);
        }
        let r = acc / (sx * sy);
        if r > best.1 {
            best = (lag, r);
        }
    }
    Ok(best)
}

/// Shoelace area swept by the polyline `(xs, ys)` about its centroid.
/// Positive for counter-clockwise motion.
pub fn orbit_signed_area(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return 0.0;
    }
    let cx = xs[..n].iter().sum::<f64>() / n as f64;
    let cy = ys[..n].iter().sum::<f64>() / n as f64;
    (0..n - 1)
        .map(|i| {
            let (x0, y0) = (xs[i] - cx, ys[i] - cy);
            let (x1, y1) = (xs[i + 1] - cx, ys[i + 1] - cy);
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn sine_period() {
        let s: Vec<f64> = (0..4000).map(|t| (TAU * t as f64 / 80.0).sin() + 0.001 * t as f64).collect();
        let p = oscillation_period(&s, 1.0, &PeriodConfig::default()).unwrap();
        assert!((p.dominant - 80.0).abs() <= 1.0, "{}", p.dominant);
        // Later lobes sit at multiples of the period.
        assert!((p.secondary[0] - 160.0).abs() <= 2.0);

        let p = oscillation_period(&s[..2000], 5.0, &PeriodConfig::default()).unwrap();
        assert!((p.dominant - 400.0).abs() <= 5.0);
    }

    #[test]
    fn constant_and_linear_series_have_no_period() {
        assert!(matches!(
            oscillation_period(&[3.0; 500], 1.0, &PeriodConfig::default()),
            Err(Error::NoPeriodicity)
        ));
        let line: Vec<f64> = (0..500).map(|t| 2.0 * t as f64).collect();
        assert!(matches!(
            oscillation_period(&line, 1.0, &PeriodConfig::default()),
            Err(Error::NoPeriodicity)
        ));
        assert!(oscillation_period(&[1.0, 2.0], 1.0, &PeriodConfig::default()).is_err());
    }

    #[test]
    fn autocorrelation_matches_direct_sum() {
        let x: Vec<f64> = (0..200).map(|t| ((t * 37 % 101) as f64).sin()).collect();
        let fast = autocorrelation(&x);
        let c0: f64 = x.iter().map(|v| v * v).sum();
        for k in [0, 1, 5, 50, 199] {
            let direct: f64 = (0..x.len() - k).map(|t| x[t] * x[t + k]).sum::<f64>() / c0;
            assert!((fast[k] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn lead_lag_sign() {
        let x: Vec<f64> = (0..2000).map(|t| (TAU * t as f64 / 100.0).sin()).collect();
        let y: Vec<f64> = (0..2000).map(|t| (TAU * (t as f64 - 7.0) / 100.0).sin()).collect();
        let (lag, r) = lead_lag(&x, &y, 40).unwrap();
        assert_eq!(lag, 7);
        assert!(r > 0.9);
        let (lag, _) = lead_lag(&y, &x, 40).unwrap();
        assert_eq!(lag, -7);
    }

    #[test]
    fn orbit_orientation() {
        let ts: Vec<f64> = (0..=400).map(|i| TAU * i as f64 / 200.0).collect();
        let xs: Vec<f64> = ts.iter().map(|t| 5.0 + t.cos()).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 + t.sin()).collect();
        let area = orbit_signed_area(&xs, &ys);
        // Two laps of a regular 200-gon inscribed in the unit circle.
        let polygon = 2.0 * 100.0 * (TAU / 200.0).sin();
        assert!((area - polygon).abs() < 1e-9, "{area}");
        let rev: Vec<f64> = ys.iter().map(|y| 4.0 - y).collect();
        assert!(orbit_signed_area(&xs, &rev) < 0.0);
    }
}
