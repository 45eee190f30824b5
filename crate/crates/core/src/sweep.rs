//! Scale sweeps and log-log exponent fits.

use crate::error::{Error, Result};
use log::warn;
use serde::{Deserialize, Serialize};

/// Least-squares slope of `ln value` against `ln epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
    pub dropped: usize,
}

/// Fits `value ~ C eps^exponent`. Non-positive values are dropped with a
/// warning; fewer than four remaining points is an error.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, v)| *e > 0.0 && *v > 0.0 && v.is_finite())
        .map(|&(e, v)| (e.ln(), v.ln()))
        .collect();
    let dropped = points.len() - kept.len();
    if dropped > 0 {
        warn!("scaling fit: dropped {dropped} non-positive value(s)");
    }
    if kept.len() < 4 {
        return Err(Error::TooFewPoints(kept.len()));
    }
    let n = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = kept.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("all epsilons coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = kept
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r2 = if syy <= f64::EPSILON * n {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent,
        intercept,
        r2,
        used: kept.len(),
        dropped,
    })
}

/// Geometric sequence from `max` down to `min` (inclusive up to rounding).
pub fn geometric_sweep(max: f64, min: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(ratio > 1.0 && max >= min && min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad sweep max={max} min={min} ratio={ratio}"
        )));
    }
    let mut out = Vec::new();
    let mut e = max;
    while e >= min * (1.0 - 1e-9) {
        out.push(e);
        e /= ratio;
    }
    Ok(out)
}

/// Default sweep: ratio sqrt(2) from 16 to 4 grid spacings.
pub fn default_epsilons(spacing: f64) -> Vec<f64> {
    geometric_sweep(16.0 * spacing, 4.0 * spacing, std::f64::consts::SQRT_2)
        .expect("valid default sweep")
}

/// `(epsilon, value)` series with its log-log fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(rename = "exponent")]
    pub fitted_exponent: Option<f64>,
    #[serde(rename = "r2")]
    pub fit_quality: Option<f64>,
    pub region_label: String,
}

impl SweepReport {
    /// Validates the series and fits it; the fit is skipped (with a warning)
    /// when fewer than four values are positive.
    pub fn new(epsilons: Vec<f64>, values: Vec<f64>, region_label: impl Into<String>) -> Result<Self> {
        if epsilons.len() != values.len() {
            return Err(Error::InvalidArgument("epsilons and values differ in length".into()));
        }
        if epsilons.windows(2).any(|w| !(w[1] < w[0])) || epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidArgument(
                "epsilons must be positive and strictly decreasing".into(),
            ));
        }
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("sweep values must be finite and >= 0".into()));
        }
        let pts: Vec<(f64, f64)> = epsilons.iter().copied().zip(values.iter().copied()).collect();
        let (fitted_exponent, fit_quality) = match scaling_fit(&pts) {
            Ok(f) => (Some(f.exponent), Some(f.r2)),
            Err(e) => {
                warn!("sweep fit skipped: {e}");
                (None, None)
            }
        };
        Ok(Self {
            epsilons,
            values,
            fitted_exponent,
            fit_quality,
            region_label: region_label.into(),
        })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.epsilons.iter().copied().zip(self.values.iter().copied()).collect()
    }

    /// Smallest value over the sweep (the sampled liminf).
    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `epsilon,value` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,value\n");
        for (e, v) in self.epsilons.iter().zip(&self.values) {
            s.push_str(&format!("{e:e},{v:e}\n"));
        }
        s
    }

    /// Parses the CSV written by [`SweepReport::to_csv`] (or any two-column
    /// `epsilon,value` file with a header).
    pub fn points_from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for (ln, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|x| x.trim().parse().ok()).ok_or_else(|| {
                    Error::InvalidArgument(format!("bad CSV line {}: `{line}`", ln + 1))
                })
            };
            out.push((parse(it.next())?, parse(it.next())?));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
