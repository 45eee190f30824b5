//! Boundary shells, the cutoff family `phi^eps` and the global entropy
//! balance on bounded (or channel) domains.

use crate::besov::vmo_modulus;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::BoundaryGeometry;
use crate::grid::{Grid, Region};
use crate::reduce::{det_sum, det_sum_range};
use crate::residuals::{smoothstep, smoothstep_derivative, dissipation_density, KernelAxes, TestFunction};
use crate::systems::SystemSpec;
use rayon::prelude::*;
use serde::Serialize;

/// Shell `{eps/4 <= d <= eps/2}` of spatial points.
#[derive(Debug, Clone)]
pub struct ShellSpec {
    epsilon: f64,
    geometry: BoundaryGeometry,
    points: Vec<usize>,
}

impl ShellSpec {
    pub fn new(grid: &Grid, epsilon: f64) -> Result<Self> {
        let geometry = BoundaryGeometry::new(grid)?;
        check_epsilon(&geometry, epsilon)?;
        let (lo, hi) = (0.25 * epsilon, 0.5 * epsilon);
        let tol = 1e-12 * epsilon;
        let points: Vec<usize> = geometry
            .distances()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d >= lo - tol && d <= hi + tol)
            .map(|(p, _)| p)
            .collect();
        if points.is_empty() {
            return Err(Error::EmptyShell(epsilon));
        }
        Ok(Self {
            epsilon,
            geometry,
            points,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Spatial flat indices of the shell points.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn geometry(&self) -> &BoundaryGeometry {
        &self.geometry
    }
}

fn check_epsilon(geometry: &BoundaryGeometry, epsilon: f64) -> Result<()> {
    let eps0 = geometry.eps0();
    if !(epsilon > 0.0 && epsilon < eps0) {
        return Err(Error::EpsilonTooLarge { epsilon, eps0 });
    }
    Ok(())
}

/// Snapshots whose time lies in `range` (all when `None`) and the time step;
/// a field without time axis counts as one snapshot of duration `t1 - t0`
/// (1 by default).
fn time_slices(grid: &Grid, range: Option<(f64, f64)>) -> Result<(Vec<usize>, f64)> {
    if let Some((t0, t1)) = range {
        if !(t1 > t0) {
            return Err(Error::InvalidArgument(format!("empty time range [{t0}, {t1}]")));
        }
    }
    if !grid.has_time() {
        return Ok((vec![0], range.map_or(1.0, |(a, b)| b - a)));
    }
    let ts: Vec<usize> = (0..grid.num_snapshots())
        .filter(|&i| {
            let t = grid.coord(0, i);
            range.is_none_or(|(a, b)| t >= a && t <= b)
        })
        .collect();
    if ts.is_empty() {
        return Err(Error::InvalidArgument("time range selects no snapshot".into()));
    }
    Ok((ts, grid.spacing(0)))
}

/// `(1/eps) int int_shell |q(U) . n(sigma(x))| dx dt`.
pub fn shell_integral(
    field: &Field,
    system: &SystemSpec,
    shell: &ShellSpec,
    time_range: Option<(f64, f64)>,
) -> Result<f64> {
    system.check_field(field)?;
    let grid = field.grid();
    if grid.spatial_grid() != *shell.geometry.spatial_grid() {
        return Err(Error::InvalidArgument("shell and field grids differ".into()));
    }
    let (ts, dt) = time_slices(grid, time_range)?;
    let m = grid.spatial_len();
    let geom = &shell.geometry;
    let n = system.n();
    let k = system.k();
    let pairs: Vec<(usize, usize)> = ts
        .iter()
        .flat_map(|&t| shell.points.iter().map(move |&p| (t, p)))
        .collect();
    let sum = det_sum(&pairs, |&(t, p)| {
        let mut u = vec![0.0; n];
        let mut q = vec![0.0; k];
        field.state_at(t * m + p, &mut u);
        system.fill_q(u.as_slice(), q.as_mut_slice());
        let (axis, _) = geom.face(p);
        (q[axis] * geom.normal_sign(p)).abs()
    });
    Ok(sum * grid.spatial_cell_volume() * dt / shell.epsilon)
}

/// `phi(s)`: 0 for `s <= 1/4`, 1 for `s >= 1/2`, quintic smoothstep between.
pub fn shell_profile(s: f64) -> f64 {
    smoothstep(4.0 * (s - 0.25))
}

pub fn shell_profile_derivative(s: f64) -> f64 {
    4.0 * smoothstep_derivative(4.0 * (s - 0.25))
}

/// `phi^eps(x) = phi(d(x)/eps)` on the spatial grid, with the exact gradient
/// `-(1/eps) phi'(d/eps) n(sigma(x))`.
pub fn boundary_test_function(grid: &Grid, epsilon: f64) -> Result<TestFunction> {
    let geom = BoundaryGeometry::new(grid)?;
    check_epsilon(&geom, epsilon)?;
    boundary_test_function_from(&geom, epsilon)
}

fn boundary_test_function_from(geom: &BoundaryGeometry, epsilon: f64) -> Result<TestFunction> {
    let sg = geom.spatial_grid();
    let m = sg.len();
    let mut values = vec![0.0; m];
    let mut gradient = vec![0.0; sg.ndim() * m];
    for p in 0..m {
        let s = geom.distance(p) / epsilon;
        values[p] = shell_profile(s);
        let (axis, _) = geom.face(p);
        gradient[axis * m + p] = -shell_profile_derivative(s) / epsilon * geom.normal_sign(p);
    }
    TestFunction::from_parts(sg, values, gradient, 0.0)
}

/// Terms of `dE/dt + interior + shell = 0`, one entry per snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceReport {
    pub epsilon: f64,
    pub times: Vec<f64>,
    /// `E(t) = int eta(U)`.
    pub energy: Vec<f64>,
    #[serde(rename = "dEdt")]
    pub de_dt: Vec<f64>,
    /// `-int_{d >= eps} D_eps`, the entropy dissipated in the interior.
    pub interior: Vec<f64>,
    /// `-int grad phi^eps . q`, the net entropy outflux through the walls.
    pub shell: Vec<f64>,
    pub closure: Vec<f64>,
}

impl BalanceReport {
    /// Largest magnitude among the three balance terms.
    pub fn max_term(&self) -> f64 {
        self.de_dt
            .iter()
            .chain(&self.interior)
            .chain(&self.shell)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_closure(&self) -> f64 {
        self.closure.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |closure| <= rel * max_term` (with an absolute floor of 1e-12).
    pub fn closes(&self, rel: f64) -> bool {
        self.max_closure() <= rel * self.max_term() + 1e-12
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Global entropy ledger of a field series at mollification scale
/// `epsilon`. The interior term uses space-only mollification of each
/// snapshot, which is exact for the affine time fluxes of the registry.
/// Fully periodic domains get a zero shell term and an interior over all
/// of space.
pub fn global_balance(field: &Field, system: &SystemSpec, epsilon: f64) -> Result<BalanceReport> {
    let grid = field.grid();
    let nt = if grid.has_time() { grid.num_snapshots() } else { 0 };
    if nt < 3 {
        return Err(Error::TooFewSnapshots(nt));
    }
    system.check_field(field)?;
    let geom = match BoundaryGeometry::new(grid) {
        Ok(g) => {
            check_epsilon(&g, epsilon)?;
            Some(g)
        }
        Err(Error::NoBoundary) => None,
        Err(e) => return Err(e),
    };
    let sg = grid.spatial_grid();
    let phi = geom
        .as_ref()
        .map(|g| boundary_test_function_from(g, epsilon))
        .transpose()?;
    let inner: Vec<bool> = match &geom {
        Some(g) => g.distances().iter().map(|&d| d >= epsilon * (1.0 - 1e-12)).collect(),
        None => vec![true; sg.len()],
    };
    let kernel = KernelAxes::Spatial.kernel(&sg, epsilon)?;
    let vol = sg.cell_volume();
    let k = system.k();
    let n = system.n();
    let per_snapshot: Vec<(f64, f64, f64)> = (0..nt)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64, f64)> {
            let slice = field.snapshot(t)?;
            let energy = det_sum_range(sg.len(), |p| {
                let mut u = vec![0.0; n];
                slice.state_at(p, &mut u);
                system.eta(u.as_slice())
            }) * vol;
            let d = dissipation_density(&slice, system, &kernel)?;
            let mut outside = 0usize;
            let interior = -det_sum_range(sg.len(), |p| {
                if inner[p] {
                    d.field.value(0, p)
                } else {
                    0.0
                }
            }) * vol;
            for (p, &is_inner) in inner.iter().enumerate() {
                if is_inner && !d.window.contains_flat(&sg, p) {
                    outside += 1;
                }
            }
            if outside > 0 {
                return Err(Error::UnderResolved(format!(
                    "{outside} points with d >= {epsilon} lie outside the dissipation window"
                )));
            }
            let shell = match &phi {
                Some(phi) => det_sum_range(sg.len(), |p| {
                    let mut u = vec![0.0; n];
                    let mut q = vec![0.0; k];
                    slice.state_at(p, &mut u);
                    system.fill_q(u.as_slice(), q.as_mut_slice());
                    -(0..k).map(|j| phi.gradient(j)[p] * q[j]).sum::<f64>()
                }) * vol,
                None => 0.0,
            };
            Ok((energy, interior, shell))
        })
        .collect::<Result<_>>()?;
    let times: Vec<f64> = (0..nt).map(|i| grid.coord(0, i)).collect();
    let energy: Vec<f64> = per_snapshot.iter().map(|s| s.0).collect();
    let interior: Vec<f64> = per_snapshot.iter().map(|s| s.1).collect();
    let shell: Vec<f64> = per_snapshot.iter().map(|s| s.2).collect();
    let dt = grid.spacing(0);
    let de_dt: Vec<f64> = (0..nt)
        .map(|i| match i {
            0 => (energy[1] - energy[0]) / dt,
            i if i == nt - 1 => (energy[i] - energy[i - 1]) / dt,
            i => (energy[i + 1] - energy[i - 1]) / (2.0 * dt),
        })
        .collect();
    let closure = (0..nt).map(|i| de_dt[i] + interior[i] + shell[i]).collect();
    Ok(BalanceReport {
        epsilon,
        times,
        energy,
        de_dt,
        interior,
        shell,
        closure,
    })
}

/// Modulus on a nested family of interior subdomains `{d >= margin}`,
/// showing how regularity degrades toward the boundary.
pub fn nested_moduli(field: &Field, margins: &[f64], epsilon: f64) -> Result<Vec<(f64, f64)>> {
    margins
        .iter()
        .map(|&m| {
            let r = Region::interior(field.grid(), m);
            Ok((m, vmo_modulus(field, &r, epsilon)?))
        })
        .collect()
}
