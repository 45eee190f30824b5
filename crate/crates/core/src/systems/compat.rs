//! Numerical check of the multiplier identities `D_U eta = B D_U A` and
//! `D_U q_j = B D_U F_j` on random states.

use super::scalar::{Dual, Scalar, MAX_STATE};
use super::SystemSpec;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Maxima over all sampled states.
#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    pub system: String,
    pub samples: usize,
    pub seed: u64,
    /// `max |D_U eta - B D_U A|_inf`.
    pub eta_residual: f64,
    /// `max_j |D_U q_j - B D_U F_j|_inf`.
    pub flux_residual: f64,
    pub max_residual: f64,
    /// Largest relative gap between exact and central-difference Jacobians.
    pub fd_relative: f64,
    /// Largest second difference of an affine row of `G`.
    pub affine_second_difference: f64,
}

pub fn check_compatibility(system: &SystemSpec, n_samples: usize, seed: u64) -> Result<CompatReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let n = system.n();
    if n > MAX_STATE {
        return Err(Error::InvalidArgument(format!(
            "state dimension {n} exceeds {MAX_STATE}"
        )));
    }
    if let Some(c) = system
        .state_domain()
        .iter()
        .position(|&(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "degenerate state domain for component {}",
            system.state_names()[c]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = system.rows();
    let k = system.k();
    let c = k + 1;

    let mut report = CompatReport {
        system: system.name().into(),
        samples: n_samples,
        seed,
        eta_residual: 0.0,
        flux_residual: 0.0,
        max_residual: 0.0,
        fd_relative: 0.0,
        affine_second_difference: 0.0,
    };

    let mut u = vec![0.0; n];
    let mut b = vec![0.0; rows];
    let mut gd = vec![Dual::cst(0.0); rows * c];
    let mut qd = vec![Dual::cst(0.0); k];
    for _ in 0..n_samples {
        for (x, &(lo, hi)) in u.iter_mut().zip(system.state_domain()) {
            *x = rng.gen_range(lo..=hi);
        }
        if let Some(bad) = system.domain_violation(&u) {
            return Err(Error::InvalidArgument(format!(
                "sampled state outside domain in component {bad}"
            )));
        }
        let ud = Dual::vars(&u);
        system.fill_b(&u, &mut b);
        system.fill_g(&ud, &mut gd);
        system.fill_q(&ud, &mut qd);
        let etad = system.eta(&ud);

        // column j of G against entropy-pair component j (0 = eta, j = q_j)
        for col in 0..c {
            let lhs = if col == 0 { etad } else { qd[col - 1] };
            let mut res = 0.0f64;
            for var in 0..n {
                let rhs: f64 = (0..rows).map(|r| b[r] * gd[r * c + col].d[var]).sum();
                res = res.max((lhs.d[var] - rhs).abs());
            }
            if col == 0 {
                report.eta_residual = report.eta_residual.max(res);
            } else {
                report.flux_residual = report.flux_residual.max(res);
            }
        }

        report.fd_relative = report
            .fd_relative
            .max(fd_gap(system, &u, &gd, &qd, etad));
        report.affine_second_difference = report
            .affine_second_difference
            .max(affine_gap(system, &u, &mut rng));
    }
    report.max_residual = report.eta_residual.max(report.flux_residual);
    Ok(report)
}

/// Outputs `[G..., eta, q...]` on `f64`.
fn outputs(system: &SystemSpec, u: &[f64], out: &mut Vec<f64>) {
    let c = system.k() + 1;
    out.clear();
    out.resize(system.rows() * c + 1 + system.k(), 0.0);
    let (g, rest) = out.split_at_mut(system.rows() * c);
    system.fill_g(u, g);
    rest[0] = system.eta(u);
    system.fill_q(u, &mut rest[1..]);
}

fn fd_gap(system: &SystemSpec, u: &[f64], gd: &[Dual], qd: &[Dual], etad: Dual) -> f64 {
    let exact: Vec<&Dual> = gd.iter().chain(std::iter::once(&etad)).chain(qd).collect();
    let mut up = u.to_vec();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut worst = 0.0f64;
    for var in 0..u.len() {
        let h = 1e-5 * u[var].abs().max(1.0);
        up[var] = u[var] + h;
        outputs(system, &up, &mut plus);
        up[var] = u[var] - h;
        outputs(system, &up, &mut minus);
        up[var] = u[var];
        for (o, e) in exact.iter().enumerate() {
            let fd = (plus[o] - minus[o]) / (2.0 * h);
            let ad = e.d[var];
            worst = worst.max((fd - ad).abs() / ad.abs().max(1.0));
        }
    }
    worst
}

fn affine_gap(system: &SystemSpec, u: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    if system.affine_rows().is_empty() {
        return 0.0;
    }
    let c = system.k() + 1;
    let dir: Vec<f64> = system
        .state_domain()
        .iter()
        .map(|&(lo, hi)| 0.05 * (hi - lo) * rng.gen_range(-1.0..=1.0))
        .collect();
    let shifted = |s: f64| -> Vec<f64> {
        let v: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
        let mut g = vec![0.0; system.rows() * c];
        system.fill_g(&v, &mut g);
        g
    };
    let (gp, g0, gm) = (shifted(1.0), shifted(0.0), shifted(-1.0));
    let mut worst = 0.0f64;
    for &r in system.affine_rows() {
        for col in 0..c {
            let i = r * c + col;
            worst = worst.max((gp[i] - 2.0 * g0[i] + gm[i]).abs());
        }
    }
    worst
}
