//! Weak-form residuals, the localized companion-law residual and the
//! dissipation density `D_eps`.
//!
//! Derivatives of products with the multiplier are taken by second-order
//! central differences, so pairing `D_eps` with a test function reproduces
//! the companion residual by exact discrete summation by parts.

use crate::error::{Error, Result};
use crate::field::{lp_norm, Field};
use crate::grid::{Grid, Region, Window};
use crate::mollify::{commutator_parts, mollifier_kernel, Kernel, Mollified};
use crate::reduce::det_sum;
use crate::sweep::SweepReport;
use crate::systems::{evaluate, Quantity, SystemSpec};
use rayon::prelude::*;
use serde::Serialize;

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn smoothstep_derivative(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

/// C^2 bump on `[0, 1]` built from two smoothsteps, peak 1 at `1/2`.
fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else if s < 0.5 {
        smoothstep(2.0 * s)
    } else {
        smoothstep(2.0 - 2.0 * s)
    }
}

/// Central difference of `data` along `axis` at flat index `p`; samples
/// beyond a bounded edge count as zero.
fn central_diff_zero(grid: &Grid, data: &[f64], pos: &[usize], p: usize, axis: usize) -> f64 {
    let stride = grid.strides()[axis];
    let at = |off: isize| -> f64 {
        match grid.shift_index(axis, pos[axis], off) {
            Some(j) => data[p - pos[axis] * stride + j * stride],
            None => 0.0,
        }
    };
    (at(1) - at(-1)) / (2.0 * grid.spacing(axis))
}

/// Grid axis differentiated by flux column `col` (0 = time flux), or `None`
/// for the time column of a field without a time axis.
pub fn column_axis(grid: &Grid, col: usize) -> Option<usize> {
    match (col, grid.has_time()) {
        (0, true) => Some(0),
        (0, false) => None,
        (j, _) => Some(grid.spatial_axis(j - 1)),
    }
}

/// Sampled test function with its gradient.
#[derive(Debug, Clone)]
pub struct TestFunction {
    grid: Grid,
    values: Vec<f64>,
    /// `[axis][point]`.
    gradient: Vec<f64>,
    support: Window,
    support_margin: f64,
}

impl TestFunction {
    /// Tensor product of C^2 bumps, axis `a` supported on `(lo[a], hi[a])`.
    /// Every grid axis (time included) gets a factor.
    pub fn bump(grid: &Grid, lo: &[f64], hi: &[f64]) -> Result<Self> {
        let nd = grid.ndim();
        if lo.len() != nd || hi.len() != nd {
            return Err(Error::InvalidArgument(format!(
                "test-function box needs {nd} bounds per side"
            )));
        }
        if (0..nd).any(|a| !(hi[a] > lo[a])) {
            return Err(Error::InvalidArgument("test-function box is empty".into()));
        }
        let mut margin = f64::INFINITY;
        for a in 0..nd {
            if !grid.is_periodic(a) {
                margin = margin.min(lo[a]).min(grid.axis_length(a) - hi[a]);
            }
        }
        if !(margin > 0.0) {
            return Err(Error::Support(format!(
                "bump box reaches the domain boundary (margin {margin})"
            )));
        }
        let f = Field::from_fn(grid.clone(), vec!["psi".into()], |x, out| {
            out[0] = (0..nd)
                .map(|a| bump((x[a] - lo[a]) / (hi[a] - lo[a])))
                .product();
        })?;
        Self::from_values(grid, f.into_data(), margin)
    }

    /// Bump on the middle half of every axis.
    pub fn default_for(grid: &Grid) -> Result<Self> {
        let lo: Vec<f64> = (0..grid.ndim()).map(|a| 0.25 * grid.axis_length(a)).collect();
        let hi: Vec<f64> = (0..grid.ndim()).map(|a| 0.75 * grid.axis_length(a)).collect();
        Self::bump(grid, &lo, &hi)
    }

    /// Wraps sampled values; the gradient is taken by central differences.
    pub fn from_values(grid: &Grid, values: Vec<f64>, support_margin: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument("test-function length mismatch".into()));
        }
        let nd = grid.ndim();
        let mut gradient = vec![0.0; nd * grid.len()];
        let mut pos = vec![0; nd];
        for p in 0..grid.len() {
            grid.unravel(p, &mut pos);
            for a in 0..nd {
                gradient[a * grid.len() + p] = central_diff_zero(grid, &values, &pos, p, a);
            }
        }
        Self::from_parts(grid, values, gradient, support_margin)
    }

    /// Values with an explicitly supplied gradient (`[axis][point]`).
    pub fn from_parts(grid: &Grid, values: Vec<f64>, gradient: Vec<f64>, support_margin: f64) -> Result<Self> {
        if values.len() != grid.len() || gradient.len() != grid.ndim() * grid.len() {
            return Err(Error::InvalidArgument("test-function length mismatch".into()));
        }
        let nd = grid.ndim();
        let mut lo = grid.extents().to_vec();
        let mut hi = vec![0; nd];
        let mut pos = vec![0; nd];
        for p in 0..grid.len() {
            let nonzero = values[p] != 0.0 || (0..nd).any(|a| gradient[a * grid.len() + p] != 0.0);
            if nonzero {
                grid.unravel(p, &mut pos);
                for a in 0..nd {
                    lo[a] = lo[a].min(pos[a]);
                    hi[a] = hi[a].max(pos[a] + 1);
                }
            }
        }
        if (0..nd).any(|a| lo[a] >= hi[a]) {
            lo = vec![0; nd];
            hi = vec![0; nd];
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            gradient,
            support: Window { lo, hi },
            support_margin,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradient(&self, axis: usize) -> &[f64] {
        let n = self.grid.len();
        &self.gradient[axis * n..(axis + 1) * n]
    }

    /// Index box containing every point where the function or its gradient
    /// is nonzero.
    pub fn support(&self) -> &Window {
        &self.support
    }

    pub fn support_margin(&self) -> f64 {
        self.support_margin
    }

    /// `max |psi| + max |grad psi|`.
    pub fn c1_norm(&self) -> f64 {
        let n = self.grid.len();
        let nd = self.grid.ndim();
        let vmax = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gmax = (0..n)
            .map(|p| {
                (0..nd)
                    .map(|a| self.gradient[a * n + p].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        vmax + gmax
    }

    /// Riemann sum of the values.
    pub fn integral(&self) -> f64 {
        det_sum(&self.values, |v| *v) * self.grid.cell_volume()
    }

    fn check_compatible(&self, field: &Field) -> Result<()> {
        if self.grid != *field.grid() {
            return Err(Error::InvalidArgument("test function and field grids differ".into()));
        }
        Ok(())
    }

    fn check_inside(&self) -> Result<()> {
        if !(self.support_margin > 0.0) {
            return Err(Error::Support("test function support touches the boundary".into()));
        }
        let g = &self.grid;
        for a in 0..g.ndim() {
            if !g.is_periodic(a) && (self.support.lo[a] == 0 || self.support.hi[a] >= g.extent(a)) {
                return Err(Error::Support(format!(
                    "test function support reaches the edge of axis {a}"
                )));
            }
        }
        Ok(())
    }
}

/// `int dpsi/dt A(U) + grad psi : F(U)`, one value per equation row.
pub fn weak_residual(field: &Field, system: &SystemSpec, psi: &TestFunction) -> Result<Vec<f64>> {
    psi.check_compatible(field)?;
    psi.check_inside()?;
    let g = evaluate(system, field, Quantity::G)?;
    let grid = field.grid();
    let cols = system.k() + 1;
    let pts = psi.support().indices(grid);
    let vol = grid.cell_volume();
    Ok((0..system.rows())
        .map(|r| {
            det_sum(&pts, |&p| {
                (0..cols)
                    .filter_map(|c| column_axis(grid, c).map(|a| psi.gradient(a)[p] * g.value(r * cols + c, p)))
                    .sum::<f64>()
            }) * vol
        })
        .collect())
}

/// Acceptance line for a discrete weak solution:
/// `10 * dx * ||F(U)||_L1 * ||psi||_C1`.
pub fn tol_weak(field: &Field, system: &SystemSpec, psi: &TestFunction) -> Result<f64> {
    let f = evaluate(system, field, Quantity::F)?;
    let l1 = lp_norm(&f, 1.0, &Region::all(field.grid()))?;
    Ok(10.0 * field.grid().max_spatial_spacing() * l1 * psi.c1_norm())
}

/// Weak residual with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct WeakCheck {
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub tolerance: f64,
    pub accepted: bool,
}

pub fn weak_check(field: &Field, system: &SystemSpec, psi: &TestFunction) -> Result<WeakCheck> {
    let residuals = weak_residual(field, system, psi)?;
    let tolerance = tol_weak(field, system, psi)?;
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(WeakCheck {
        accepted: max_abs <= tolerance,
        residuals,
        max_abs,
        tolerance,
    })
}

/// Companion residual at one scale, with the terms that bound it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompanionResidual {
    pub epsilon: f64,
    /// `int (G([U]) - [G(U)]) . D(B([U]) psi)`.
    pub value: f64,
    /// `||G([U]) - [G(U)]||_{3/2} * ||D(B([U]) psi)||_3`.
    pub majorant: f64,
    /// `int [G(U)] . D(B([U]) psi)`, zero for exact weak solutions.
    pub defect: f64,
}

/// Rows of `B([U]_eps)` on the window, zero outside.
fn multiplier_field(system: &SystemSpec, state: &Field, window: &Window) -> Vec<f64> {
    let grid = state.grid();
    let npts = grid.len();
    let rows = system.rows();
    let idx = window.indices(grid);
    let vals: Vec<Vec<f64>> = idx
        .par_iter()
        .map_init(
            || vec![0.0; system.n()],
            |u, &p| {
                state.state_at(p, u);
                let mut b = vec![0.0; rows];
                system.fill_b(u.as_slice(), &mut b);
                b
            },
        )
        .collect();
    let mut out = vec![0.0; rows * npts];
    for (&p, b) in idx.iter().zip(vals) {
        for (r, v) in b.into_iter().enumerate() {
            out[r * npts + p] = v;
        }
    }
    out
}

fn active_columns(grid: &Grid, system: &SystemSpec) -> Vec<(usize, usize)> {
    (0..=system.k())
        .filter_map(|c| column_axis(grid, c).map(|a| (c, a)))
        .collect()
}

pub fn companion_residual(
    field: &Field,
    system: &SystemSpec,
    psi: &TestFunction,
    kernel: &Kernel,
) -> Result<CompanionResidual> {
    psi.check_compatible(field)?;
    let parts = commutator_parts(field, system, kernel)?;
    let grid = field.grid();
    let mut inner = parts.window.clone();
    for a in 0..grid.ndim() {
        if !grid.is_periodic(a) {
            inner.shrink(a, 1);
        }
    }
    if psi.support().is_empty() {
        return Err(Error::Support("test function vanishes identically".into()));
    }
    if psi.support().intersect(&inner) != *psi.support() {
        return Err(Error::Support(format!(
            "test function support {:?}..{:?} leaves the shrunk interior {:?}..{:?} at epsilon = {}",
            psi.support().lo,
            psi.support().hi,
            inner.lo,
            inner.hi,
            kernel.epsilon()
        )));
    }
    let npts = grid.len();
    let rows = system.rows();
    let cols = system.k() + 1;
    let b = multiplier_field(system, &parts.state, &parts.window);
    let phi: Vec<f64> = (0..rows * npts)
        .map(|i| b[i] * psi.values()[i % npts])
        .collect();
    let active = active_columns(grid, system);
    let idx = parts.window.indices(grid);
    let vol = grid.cell_volume();
    let nd = grid.ndim();
    // (value, defect, |comm|^{3/2}, |D phi|^3) per point
    let terms: Vec<[f64; 4]> = idx
        .par_iter()
        .map_init(
            || vec![0usize; nd],
            |pos, &p| {
                grid.unravel(p, pos);
                let mut t = [0.0; 4];
                let mut c2 = 0.0;
                let mut d2 = 0.0;
                for r in 0..rows {
                    let row = &phi[r * npts..(r + 1) * npts];
                    for &(c, a) in &active {
                        let d = central_diff_zero(grid, row, pos, p, a);
                        let comm = parts.commutator.value(r * cols + c, p);
                        t[0] -= comm * d;
                        t[1] += parts.flux.value(r * cols + c, p) * d;
                        c2 += comm * comm;
                        d2 += d * d;
                    }
                }
                t[2] = c2.powf(0.75);
                t[3] = d2 * d2.sqrt();
                t
            },
        )
        .collect();
    let sum = |i: usize| det_sum(&terms, |t| t[i]) * vol;
    Ok(CompanionResidual {
        epsilon: kernel.epsilon(),
        value: sum(0),
        majorant: sum(2).powf(2.0 / 3.0) * sum(3).cbrt(),
        defect: sum(1),
    })
}

/// `D_eps = B([U]) . div_X (G([U]) - [G(U)])`, valid on the returned window.
pub fn dissipation_density(field: &Field, system: &SystemSpec, kernel: &Kernel) -> Result<Mollified> {
    let parts = commutator_parts(field, system, kernel)?;
    let grid = field.grid();
    let mut window = parts.window.clone();
    for a in 0..grid.ndim() {
        if !grid.is_periodic(a) {
            window.shrink(a, 1);
        }
    }
    if window.is_empty() {
        return Err(Error::EmptyInterior(kernel.epsilon()));
    }
    let npts = grid.len();
    let rows = system.rows();
    let cols = system.k() + 1;
    let b = multiplier_field(system, &parts.state, &parts.window);
    let active = active_columns(grid, system);
    let idx = window.indices(grid);
    let nd = grid.ndim();
    let vals: Vec<f64> = idx
        .par_iter()
        .map_init(
            || vec![0usize; nd],
            |pos, &p| {
                grid.unravel(p, pos);
                let mut acc = 0.0;
                for r in 0..rows {
                    let mut div = 0.0;
                    for &(c, a) in &active {
                        let comm = parts.commutator.component(r * cols + c);
                        div += central_diff_zero(grid, comm, pos, p, a);
                    }
                    acc -= b[r * npts + p] * div;
                }
                acc
            },
        )
        .collect();
    let mut data = vec![0.0; npts];
    for (&p, v) in idx.iter().zip(vals) {
        data[p] = v;
    }
    Ok(Mollified {
        field: Field::new(grid.clone(), vec!["D_eps".into()], data)?,
        window,
    })
}

/// `int D psi` over the valid window.
pub fn pair(density: &Mollified, psi: &TestFunction) -> f64 {
    let grid = density.field.grid();
    let idx = density.window.indices(grid);
    det_sum(&idx, |&p| density.field.value(0, p) * psi.values()[p]) * grid.cell_volume()
}

/// `int_region D` divided by the time span covered by the valid window
/// (or the plain integral for a field without time axis).
pub fn integral_per_unit_time(density: &Mollified, region: &Region) -> f64 {
    let grid = density.field.grid();
    let idx: Vec<usize> = density
        .window
        .indices(grid)
        .into_iter()
        .filter(|&p| region.contains(p))
        .collect();
    let total = det_sum(&idx, |&p| density.field.value(0, p)) * grid.cell_volume();
    if grid.has_time() {
        let span = (density.window.hi[0] - density.window.lo[0]) as f64 * grid.spacing(0);
        total / span
    } else {
        total
    }
}

/// Which grid axes the mollifier acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelAxes {
    #[default]
    SpaceTime,
    Spatial,
}

impl KernelAxes {
    pub fn kernel(self, grid: &Grid, epsilon: f64) -> Result<Kernel> {
        let axes: Vec<usize> = match self {
            KernelAxes::SpaceTime => (0..grid.ndim()).collect(),
            KernelAxes::Spatial => grid.spatial_axes().collect(),
        };
        mollifier_kernel(grid, epsilon, &axes)
    }
}

/// Companion residuals over a sweep of scales (computed in parallel).
pub fn companion_sweep(
    field: &Field,
    system: &SystemSpec,
    psi: &TestFunction,
    epsilons: &[f64],
    axes: KernelAxes,
) -> Result<Vec<CompanionResidual>> {
    epsilons
        .par_iter()
        .map(|&e| companion_residual(field, system, psi, &axes.kernel(field.grid(), e)?))
        .collect()
}

/// `|companion_residual|` across `epsilons` with a log-log fit.
pub fn epsilon_sweep_residual(
    field: &Field,
    system: &SystemSpec,
    psi: &TestFunction,
    epsilons: &[f64],
    axes: KernelAxes,
) -> Result<SweepReport> {
    let res = companion_sweep(field, system, psi, epsilons, axes)?;
    SweepReport::new(
        epsilons.to_vec(),
        res.iter().map(|r| r.value.abs()).collect(),
        "psi",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{burgers_shock, shear_flow};
    use crate::systems::system;

    fn shock(n: usize, nt: usize) -> Field {
        let g = Grid::unit_box(1, n, &[false]).unwrap().with_time(nt, 1.0 / nt as f64).unwrap();
        burgers_shock(&g, 1.0, -1.0, 0.5).unwrap()
    }

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
        assert!((smoothstep_derivative(0.5) - 1.875).abs() < 1e-15);
    }

    #[test]
    fn bump_support_and_gradient() {
        let g = Grid::unit_box(2, 32, &[false, true]).unwrap();
        let psi = TestFunction::default_for(&g).unwrap();
        assert!(psi.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        // gradient reaches one cell beyond the nonzero values
        assert_eq!(psi.support().lo[0], 7);
        assert_eq!(psi.support().hi[0], 25);
        assert!(psi.support_margin() > 0.2);
        // discrete summation by parts against a linear function
        let s: f64 = (0..g.len()).map(|p| psi.gradient(0)[p] * (p / 32) as f64).sum();
        let m: f64 = psi.values().iter().sum::<f64>() / g.spacing(0);
        assert!((s + m).abs() < 1e-9 * m);
        assert!(TestFunction::bump(&g, &[0.0, 0.2], &[0.5, 0.8]).is_err());
    }

    #[test]
    fn shear_flow_is_weak_solution() {
        let g = Grid::unit_box(2, 32, &[true, false]).unwrap().with_time(8, 0.125).unwrap();
        let f = shear_flow(&g, |y| (std::f64::consts::PI * y).sin(), 0.0).unwrap();
        let sys = system("incomp-euler", 2).unwrap();
        let psi = TestFunction::default_for(&g).unwrap();
        let chk = weak_check(&f, &sys, &psi).unwrap();
        assert!(chk.max_abs <= 1e-10, "{chk:?}");
        assert!(chk.accepted);
    }

    #[test]
    fn stationary_shock_is_weak_solution_and_noise_is_not() {
        let f = shock(256, 16);
        let sys = system("burgers", 1).unwrap();
        let psi = TestFunction::default_for(f.grid()).unwrap();
        let chk = weak_check(&f, &sys, &psi).unwrap();
        assert!(chk.accepted, "{chk:?}");
        // uniform growth in time violates the law at O(1)
        let g = Grid::unit_box(1, 4096, &[false]).unwrap().with_time(16, 1.0 / 16.0).unwrap();
        let bad = Field::from_fn(g.clone(), vec!["u".into()], |x, u| u[0] = 1.8 * (2.0 * x[0] - 1.0)).unwrap();
        let psi = TestFunction::default_for(&g).unwrap();
        let chk = weak_check(&bad, &sys, &psi).unwrap();
        assert!(chk.max_abs >= 10.0 * chk.tolerance, "{chk:?}");
    }

    #[test]
    fn constant_field_has_zero_companion_residual() {
        let g = Grid::unit_box(1, 128, &[true]).unwrap().with_time(32, 1.0 / 32.0).unwrap();
        let f = Field::constant(g.clone(), vec!["u".into()], &[0.7]).unwrap();
        let sys = system("burgers", 1).unwrap();
        let psi = TestFunction::default_for(&g).unwrap();
        let k = Kernel::space_time(&g, 0.07).unwrap();
        let r = companion_residual(&f, &sys, &psi, &k).unwrap();
        assert!(r.value.abs() < 1e-15 && r.majorant < 1e-15);
        let d = dissipation_density(&f, &sys, &k).unwrap();
        assert!(d.field.data().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn pairing_matches_companion_residual() {
        let f = shock(512, 16);
        let sys = system("burgers", 1).unwrap();
        let psi = TestFunction::default_for(f.grid()).unwrap();
        let k = KernelAxes::Spatial.kernel(f.grid(), 0.02).unwrap();
        let r = companion_residual(&f, &sys, &psi, &k).unwrap();
        let d = dissipation_density(&f, &sys, &k).unwrap();
        let p = pair(&d, &psi);
        assert!((p + r.value).abs() <= 1e-10 * r.value.abs(), "{p} vs {}", r.value);
        assert!(r.value.abs() <= r.majorant + r.defect.abs());
    }

    #[test]
    fn shock_dissipation_rate() {
        let f = shock(1024, 8);
        let sys = system("burgers", 1).unwrap();
        let k = KernelAxes::Spatial.kernel(f.grid(), 1.0 / 64.0).unwrap();
        let d = dissipation_density(&f, &sys, &k).unwrap();
        let mid = Region::from_predicate(f.grid(), "mid", |x| (0.25..=0.75).contains(&x[1]));
        let rate = integral_per_unit_time(&d, &mid);
        assert!((rate + 2.0 / 3.0).abs() < 0.01 * 2.0 / 3.0, "{rate}");
    }

    #[test]
    fn support_outside_shrunk_interior() {
        let f = shock(128, 8);
        let sys = system("burgers", 1).unwrap();
        let g = f.grid();
        let psi = TestFunction::bump(g, &[0.1, 0.02], &[0.9, 0.98]).unwrap();
        let k = KernelAxes::Spatial.kernel(g, 0.1).unwrap();
        assert!(matches!(companion_residual(&f, &sys, &psi, &k), Err(Error::Support(_))));
    }
}
