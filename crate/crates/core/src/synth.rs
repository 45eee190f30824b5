//! Seeded generators of test fields with known regularity.
//!
//! Random draws use ChaCha8 seeded from the user seed, with one stream per
//! component (`set_stream(c)`), so output is bit-identical across runs and
//! platforms.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::systems::{system, SystemKind, SystemSpec};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

fn component_rng(seed: u64, component: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(component as u64);
    rng
}

/// Unnormalised inverse DFT along every axis of a row-major array.
fn ifft_nd(data: &mut [Complex64], shape: &[usize]) {
    let mut planner = FftPlanner::new();
    for a in 0..shape.len() {
        let n = shape[a];
        let fft = planner.plan_fft_inverse(n);
        let stride: usize = shape[a + 1..].iter().product();
        let outer: usize = shape[..a].iter().product();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = data[base + i * stride];
                }
                fft.process(&mut buf);
                for (i, b) in buf.iter().enumerate() {
                    data[base + i * stride] = *b;
                }
            }
        }
    }
}

fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Random-phase field with spectrum `|kappa|^-(alpha + d/2)`, normalised to
/// zero mean and unit standard deviation, replicated along time.
///
/// `cutoff` bounds the Euclidean wavenumber (in cycles per domain length);
/// by default every mode below the Nyquist limit is used.
pub fn holder_field(
    grid: &Grid,
    alpha: f64,
    n_components: usize,
    seed: u64,
    cutoff: Option<f64>,
) -> Result<Field> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in (0, 1)")));
    }
    if n_components == 0 {
        return Err(Error::InvalidArgument("need at least one component".into()));
    }
    let sg = grid.spatial_grid();
    if let Some(a) = (0..sg.ndim()).find(|&a| !sg.is_periodic(a)) {
        return Err(Error::InvalidArgument(format!(
            "holder_field needs periodic spatial axes; axis {a} is bounded (window a periodic field instead)"
        )));
    }
    let shape = sg.extents().to_vec();
    let d = shape.len() as f64;
    let nyq = shape.iter().map(|&n| (n / 2) as f64).fold(f64::INFINITY, f64::min);
    let kmax = cutoff.unwrap_or(nyq - 1.0).min(nyq - 1.0);
    let m = sg.len();
    let mut idx = vec![0; shape.len()];
    let names: Vec<String> = if n_components == 1 {
        vec!["u".into()]
    } else {
        (0..n_components).map(|c| format!("u{c}")).collect()
    };
    let nt = grid.num_snapshots();
    let mut data = Vec::with_capacity(n_components * grid.len());
    for c in 0..n_components {
        let mut rng = component_rng(seed, c);
        let mut spec = vec![Complex64::new(0.0, 0.0); m];
        for p in 0..m {
            let theta: f64 = rng.gen::<f64>() * TAU;
            sg.unravel(p, &mut idx);
            let kv: Vec<i64> = idx.iter().zip(&shape).map(|(&i, &n)| wavenumber(i, n)).collect();
            // keep one representative of each +-kappa pair
            match kv.iter().find(|&&x| x != 0) {
                Some(&first) if first > 0 => {}
                _ => continue,
            }
            let kappa = kv
                .iter()
                .enumerate()
                .map(|(a, &x)| (x as f64 / sg.axis_length(a)).powi(2))
                .sum::<f64>()
                .sqrt();
            let kint = kv.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
            if kint > kmax {
                continue;
            }
            let amp = kappa.powf(-(alpha + d / 2.0));
            let z = Complex64::from_polar(amp, theta);
            spec[p] = z;
            let mirror: Vec<usize> = idx
                .iter()
                .zip(&shape)
                .map(|(&i, &n)| (n - i) % n)
                .collect();
            spec[sg.ravel(&mirror)] = z.conj();
        }
        ifft_nd(&mut spec, &shape);
        let vals: Vec<f64> = spec.iter().map(|z| z.re).collect();
        let mean = vals.iter().sum::<f64>() / m as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::InvalidArgument("cutoff leaves no active modes".into()));
        }
        for _ in 0..nt {
            data.extend(vals.iter().map(|v| (v - mean) / sd));
        }
    }
    Field::new(grid.clone(), names, data)
}

/// One-dimensional Hölder profile of `n` samples scaled to `max |f| = 1`.
pub fn rough_profile(n: usize, alpha: f64, seed: u64) -> Result<Vec<f64>> {
    let g = Grid::unit_box(1, n, &[true])?;
    let f = holder_field(&g, alpha, 1, seed, None)?;
    let peak = f.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(f.data().iter().map(|v| v / peak).collect())
}

/// Travelling Burgers shock `u_left` for `x < x0 + s t`, `u_right` after,
/// with `s = (u_left + u_right)/2`. Snapshots after the shock leaves the
/// domain are dropped with a warning.
pub fn burgers_shock(grid: &Grid, u_left: f64, u_right: f64, x0: f64) -> Result<Field> {
    if grid.spatial_dims() != 1 || !grid.has_time() {
        return Err(Error::InvalidArgument(
            "burgers_shock needs a 1D grid with a time axis".into(),
        ));
    }
    if u_left < u_right {
        return Err(Error::InvalidArgument(format!(
            "u_left = {u_left} < u_right = {u_right} is rarefaction data, not a single entropic shock"
        )));
    }
    let len = grid.axis_length(1);
    let s = 0.5 * (u_left + u_right);
    let t_exit = if s > 0.0 {
        (len - x0) / s
    } else if s < 0.0 {
        x0 / -s
    } else {
        f64::INFINITY
    };
    let nt = grid.extent(0);
    let keep = (0..nt).take_while(|&i| grid.coord(0, i) <= t_exit).count();
    let grid = if keep < nt {
        warn!("shock exits the domain at t = {t_exit}; keeping {keep} of {nt} snapshots");
        if keep < 2 {
            return Err(Error::InvalidArgument(format!(
                "shock leaves the domain at t = {t_exit} before two snapshots"
            )));
        }
        grid.with_time(keep, grid.spacing(0))?
    } else {
        grid.clone()
    };
    Field::from_fn(grid, vec!["u".into()], |x, u| {
        let front = x0 + s * x[0];
        u[0] = if x[1] < front {
            u_left
        } else if x[1] > front {
            u_right
        } else {
            s
        };
    })
}

fn check_channel(grid: &Grid) -> Result<()> {
    let ok = grid.spatial_dims() >= 2
        && grid.is_periodic(grid.spatial_axis(0))
        && !grid.is_periodic(grid.spatial_axis(1));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "shear flow needs a channel: spatial axis 0 periodic, axis 1 bounded".into(),
        ))
    }
}

/// Incompressible-Euler state `(f(y), 0, .., p0)` on a channel.
pub fn shear_flow(grid: &Grid, profile: impl Fn(f64) -> f64, p0: f64) -> Result<Field> {
    check_channel(grid)?;
    let k = grid.spatial_dims();
    let names = system("incomp-euler", k)?.state_names().to_vec();
    let ya = grid.spatial_axis(1);
    Field::from_fn(grid.clone(), names, |x, u| {
        u.fill(0.0);
        u[0] = profile(x[ya]);
        u[k] = p0;
    })
}

/// Shear flow whose profile is given cell by cell along the bounded axis.
pub fn shear_flow_from_samples(grid: &Grid, samples: &[f64], p0: f64) -> Result<Field> {
    check_channel(grid)?;
    let ya = grid.spatial_axis(1);
    if samples.len() != grid.extent(ya) {
        return Err(Error::InvalidArgument(format!(
            "{} profile samples for {} cells",
            samples.len(),
            grid.extent(ya)
        )));
    }
    let h = grid.spacing(ya);
    let n = samples.len();
    shear_flow(grid, |y| samples[((y / h) as usize).min(n - 1)], p0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedMode {
    /// Rest state: `rho = 1`, `F = I`, everything else zero.
    Constant,
    /// A few low Fourier modes per component, kept inside the state box.
    SmoothRandom { seed: u64 },
}

impl std::str::FromStr for ManufacturedMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "smooth-random" => Ok(Self::SmoothRandom { seed: 0 }),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (expected constant or smooth-random)"
            ))),
        }
    }
}

/// In-domain sample field for any registry system.
pub fn manufactured_state(sys: &SystemSpec, grid: &Grid, mode: ManufacturedMode) -> Result<Field> {
    if grid.spatial_dims() != sys.k() {
        return Err(Error::InvalidArgument(format!(
            "system has k = {}, grid has {} spatial axes",
            sys.k(),
            grid.spatial_dims()
        )));
    }
    let names = sys.state_names().to_vec();
    match mode {
        ManufacturedMode::Constant => {
            let k = sys.k();
            let mut state = vec![0.0; sys.n()];
            match sys.kind() {
                SystemKind::InhomIncompEuler | SystemKind::CompEuler | SystemKind::CompMhd => {
                    state[0] = 1.0
                }
                SystemKind::Elasto => {
                    for i in 0..k {
                        state[k + i * k + i] = 1.0;
                    }
                }
                _ => {}
            }
            Field::constant(grid.clone(), names, &state)
        }
        ManufacturedMode::SmoothRandom { seed } => {
            const MODES: usize = 3;
            let nd = grid.ndim();
            let lens: Vec<f64> = (0..nd).map(|a| grid.axis_length(a)).collect();
            let waves: Vec<Vec<(Vec<f64>, f64, f64)>> = (0..sys.n())
                .map(|c| {
                    let mut rng = component_rng(seed, c);
                    (0..MODES)
                        .map(|_| {
                            let kv: Vec<f64> = (0..nd)
                                .map(|a| rng.gen_range(-2i32..=2) as f64 / lens[a])
                                .collect();
                            (kv, rng.gen_range(0.5..1.0), rng.gen::<f64>() * TAU)
                        })
                        .collect()
                })
                .collect();
            let domain = sys.state_domain().to_vec();
            Field::from_fn(grid.clone(), names, |x, u| {
                for (c, modes) in waves.iter().enumerate() {
                    let norm: f64 = modes.iter().map(|m| m.1).sum();
                    let s: f64 = modes
                        .iter()
                        .map(|(kv, a, th)| {
                            let ph: f64 = kv.iter().zip(x).map(|(k, x)| k * x).sum();
                            a * (TAU * ph + th).cos()
                        })
                        .sum::<f64>()
                        / norm;
                    let (lo, hi) = domain[c];
                    u[c] = 0.5 * (lo + hi) + 0.4 * (hi - lo) * s;
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{evaluate, Quantity, SYSTEM_NAMES};

    #[test]
    fn holder_field_is_deterministic_and_normalised() {
        let g = Grid::unit_box(1, 512, &[true]).unwrap();
        let a = holder_field(&g, 0.4, 2, 7, None).unwrap();
        let b = holder_field(&g, 0.4, 2, 7, None).unwrap();
        assert_eq!(a.data(), b.data());
        let c = holder_field(&g, 0.4, 2, 8, None).unwrap();
        assert_ne!(a.data(), c.data());
        assert_ne!(a.component(0), a.component(1));
        let u = a.component(0);
        let mean = u.iter().sum::<f64>() / 512.0;
        let var = u.iter().map(|v| v * v).sum::<f64>() / 512.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holder_field_rejects_bounded_axes_and_bad_alpha() {
        let g = Grid::unit_box(2, 16, &[true, false]).unwrap();
        assert!(holder_field(&g, 0.4, 1, 1, None).is_err());
        let g = Grid::unit_box(1, 16, &[true]).unwrap();
        assert!(holder_field(&g, 1.0, 1, 1, None).is_err());
    }

    #[test]
    fn holder_field_in_2d_with_time_is_real_and_replicated() {
        let g = Grid::unit_box(2, 32, &[true, true]).unwrap().with_time(3, 0.1).unwrap();
        let f = holder_field(&g, 0.5, 1, 3, Some(8.0)).unwrap();
        let m = g.spatial_len();
        assert_eq!(&f.data()[..m], &f.data()[m..2 * m]);
    }

    #[test]
    fn stationary_and_moving_shocks() {
        let g = Grid::unit_box(1, 8, &[false]).unwrap().with_time(4, 0.25).unwrap();
        let f = burgers_shock(&g, 1.0, -1.0, 0.5).unwrap();
        assert_eq!(&f.data()[..8], &[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(&f.data()[..8], &f.data()[24..]);
        assert!(burgers_shock(&g, -1.0, 1.0, 0.5).is_err());
        // s = 1 from x0 = 0.25: exits at t = 0.75, snapshot centres 0.125..0.875
        let f = burgers_shock(&g, 2.0, 0.0, 0.25).unwrap();
        assert_eq!(f.grid().num_snapshots(), 3);
    }

    #[test]
    fn shear_flow_layout() {
        let g = Grid::unit_box(2, 8, &[true, false]).unwrap();
        let f = shear_flow(&g, |y| y, 0.3).unwrap();
        assert_eq!(f.names(), &["v1", "v2", "p"]);
        assert!((f.value(0, 1) - 1.5 / 8.0).abs() < 1e-15);
        assert!(f.component(1).iter().all(|&v| v == 0.0));
        let g = Grid::unit_box(2, 8, &[false, true]).unwrap();
        assert!(shear_flow(&g, |y| y, 0.0).is_err());
    }

    #[test]
    fn manufactured_states_stay_in_domain() {
        for name in SYSTEM_NAMES.iter().copied() {
            let k = if name == "burgers" { 1 } else { 2 };
            let sys = system(name, k).unwrap();
            let g = Grid::unit_box(k, 12, &vec![false; k]).unwrap().with_time(3, 0.1).unwrap();
            for mode in [ManufacturedMode::Constant, ManufacturedMode::SmoothRandom { seed: 5 }] {
                let f = manufactured_state(&sys, &g, mode).unwrap();
                sys.check_field(&f).unwrap();
            }
        }
    }

    #[test]
    fn elasto_rest_state_energy() {
        let sys = system("elasto", 2).unwrap();
        let g = Grid::unit_box(2, 4, &[true, true]).unwrap();
        let f = manufactured_state(&sys, &g, ManufacturedMode::Constant).unwrap();
        let eta = evaluate(&sys, &f, Quantity::Eta).unwrap();
        let expect = 1.0 + 0.1 * 2.0 * 2f64.ln();
        assert!(eta.data().iter().all(|&e| (e - expect).abs() < 1e-14));
    }
}
