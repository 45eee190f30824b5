//! Compactly supported mollifiers and convolution on the shrunk interior.
//!
//! On periodic axes the convolution wraps. On bounded axes (and on the time
//! axis) an output value is kept only where the whole stencil lies inside
//! the grid; [`Mollified::window`] records that box.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, Window};
use crate::systems::{evaluate, Quantity, SystemSpec};
use rayon::prelude::*;

pub const PROFILE_NAME: &str = "c2-bump (1-|s/eps|^2)^3";

/// Discrete radial bump `(1 - |s/eps|^2)^3`, renormalised to unit mass.
#[derive(Debug, Clone)]
pub struct Kernel {
    epsilon: f64,
    axes: Vec<usize>,
    ndim: usize,
    spacings: Vec<f64>,
    /// Offsets over all grid axes (zero on non-kernel axes).
    offsets: Vec<Vec<isize>>,
    /// Weights with `sum(weights) * volume == 1`.
    weights: Vec<f64>,
    /// Derivative weights, one vector per kernel axis, moment-corrected so
    /// that affine fields differentiate exactly.
    grad: Vec<Vec<f64>>,
    radius: Vec<usize>,
    volume: f64,
}

/// Builds the kernel of scale `epsilon` acting on the grid axes `axes`.
pub fn mollifier_kernel(grid: &Grid, epsilon: f64, axes: &[usize]) -> Result<Kernel> {
    if axes.is_empty() {
        return Err(Error::InvalidArgument("kernel needs at least one axis".into()));
    }
    let mut axes = axes.to_vec();
    axes.sort_unstable();
    axes.dedup();
    if let Some(&a) = axes.iter().find(|&&a| a >= grid.ndim()) {
        return Err(Error::InvalidArgument(format!("axis {a} out of range")));
    }
    let hmax = axes.iter().map(|&a| grid.spacing(a)).fold(0.0, f64::max);
    if !(epsilon >= 2.0 * hmax * (1.0 - 1e-12)) {
        return Err(Error::UnderResolved(format!(
            "epsilon = {epsilon} < 2 x spacing {hmax}"
        )));
    }

    let ndim = grid.ndim();
    let mut radius = vec![0usize; ndim];
    for &a in &axes {
        // largest r with r*h < eps
        let mut r = (epsilon / grid.spacing(a)).floor() as usize;
        while r > 0 && r as f64 * grid.spacing(a) >= epsilon {
            r -= 1;
        }
        radius[a] = r;
    }

    let eps2 = epsilon * epsilon;
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    let mut raw_grad: Vec<Vec<f64>> = vec![Vec::new(); axes.len()];
    let mut cur: Vec<isize> = vec![0; ndim];
    for &a in &axes {
        cur[a] = -(radius[a] as isize);
    }
    loop {
        let r2: f64 = axes
            .iter()
            .map(|&a| (cur[a] as f64 * grid.spacing(a)).powi(2))
            .sum();
        if r2 < eps2 {
            let t = 1.0 - r2 / eps2;
            offsets.push(cur.clone());
            raw.push(t * t * t);
            for (ai, &a) in axes.iter().enumerate() {
                let s = cur[a] as f64 * grid.spacing(a);
                raw_grad[ai].push(-6.0 * t * t * s / eps2);
            }
        }
        // odometer over the kernel axes
        let mut done = true;
        for &a in axes.iter().rev() {
            if cur[a] < radius[a] as isize {
                cur[a] += 1;
                done = false;
                break;
            }
            cur[a] = -(radius[a] as isize);
        }
        if done {
            break;
        }
    }

    let volume: f64 = axes.iter().map(|&a| grid.spacing(a)).product();
    let mass: f64 = raw.iter().sum::<f64>() * volume;
    let weights: Vec<f64> = raw.iter().map(|w| w / mass).collect();
    let grad = axes
        .iter()
        .enumerate()
        .map(|(ai, &a)| {
            // first moment -sum s_a d_a eta vol must equal one
            let m: f64 = -offsets
                .iter()
                .zip(&raw_grad[ai])
                .map(|(o, g)| o[a] as f64 * grid.spacing(a) * g)
                .sum::<f64>()
                * volume;
            raw_grad[ai].iter().map(|g| g / m).collect()
        })
        .collect();

    Ok(Kernel {
        epsilon,
        axes,
        ndim,
        spacings: grid.spacings().to_vec(),
        offsets,
        weights,
        grad,
        radius,
        volume,
    })
}

impl Kernel {
    /// Kernel over every axis of the grid (space-time when the grid has time).
    pub fn space_time(grid: &Grid, epsilon: f64) -> Result<Self> {
        let axes: Vec<usize> = (0..grid.ndim()).collect();
        mollifier_kernel(grid, epsilon, &axes)
    }

    /// Kernel over the spatial axes only.
    pub fn spatial(grid: &Grid, epsilon: f64) -> Result<Self> {
        let axes: Vec<usize> = grid.spatial_axes().collect();
        mollifier_kernel(grid, epsilon, &axes)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn profile(&self) -> &'static str {
        PROFILE_NAME
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offsets(&self) -> &[Vec<isize>] {
        &self.offsets
    }

    /// Cell volume of the kernel axes.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Stencil half-width in points along each grid axis.
    pub fn radius(&self) -> &[usize] {
        &self.radius
    }

    /// Discrete mass `sum w * vol`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.volume
    }

    /// Second moment `sum w s_a^2 vol` along grid axis `axis`.
    pub fn second_moment(&self, axis: usize) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| w * (o[axis] as f64 * self.spacings[axis]).powi(2))
            .sum::<f64>()
            * self.volume
    }

    /// Largest physical offset in the stencil.
    pub fn support_radius(&self) -> f64 {
        self.offsets
            .iter()
            .map(|o| {
                self.axes
                    .iter()
                    .map(|&a| (o[a] as f64 * self.spacings[a]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.ndim() != self.ndim || grid.spacings() != self.spacings.as_slice() {
            return Err(Error::InvalidArgument(
                "kernel was built for a different grid".into(),
            ));
        }
        Ok(())
    }

    /// Output window on `grid`; errors when empty.
    pub fn window(&self, grid: &Grid) -> Result<Window> {
        self.check_grid(grid)?;
        let mut w = Window::full(grid);
        for &a in &self.axes {
            if !grid.is_periodic(a) {
                w.shrink(a, self.radius[a]);
            }
        }
        if w.is_empty() {
            return Err(Error::EmptyInterior(self.epsilon));
        }
        Ok(w)
    }
}

/// A field whose values are meaningful only inside `window`; outside it the
/// samples are zero.
#[derive(Debug, Clone)]
pub struct Mollified {
    pub field: Field,
    pub window: Window,
}

struct Stencil<'a> {
    offsets: &'a [Vec<isize>],
    flat: Vec<isize>,
    weights: Vec<f64>,
}

impl<'a> Stencil<'a> {
    fn new(grid: &Grid, offsets: &'a [Vec<isize>], weights: &[f64], scale: f64) -> Self {
        let strides = grid.strides();
        let flat = offsets
            .iter()
            .map(|o| o.iter().zip(&strides).map(|(&d, &s)| d * s as isize).sum())
            .collect();
        Self {
            offsets,
            flat,
            weights: weights.iter().map(|w| w * scale).collect(),
        }
    }
}

/// `out(X) = sum_s w(s) src(X - s)` on the window, zero elsewhere.
fn convolve(grid: &Grid, src: &[f64], st: &Stencil, radius: &[usize], window: &Window) -> Vec<f64> {
    let idx = window.indices(grid);
    let nd = grid.ndim();
    let extents = grid.extents();
    let vals: Vec<f64> = idx
        .par_iter()
        .map_init(
            || vec![0usize; nd],
            |pos, &p| {
                grid.unravel(p, pos);
                let safe = (0..nd).all(|a| pos[a] >= radius[a] && pos[a] + radius[a] < extents[a]);
                if safe {
                    st.flat
                        .iter()
                        .zip(&st.weights)
                        .map(|(&f, &w)| w * src[(p as isize - f) as usize])
                        .sum()
                } else {
                    let mut acc = 0.0;
                    for (o, &w) in st.offsets.iter().zip(&st.weights) {
                        let mut q = 0usize;
                        let mut inside = true;
                        for a in 0..nd {
                            match grid.shift_index(a, pos[a], -o[a]) {
                                Some(j) => q = q * extents[a] + j,
                                None => {
                                    inside = false;
                                    break;
                                }
                            }
                        }
                        if inside {
                            acc += w * src[q];
                        }
                    }
                    acc
                }
            },
        )
        .collect();
    let mut out = vec![0.0; grid.len()];
    for (&p, v) in idx.iter().zip(vals) {
        out[p] = v;
    }
    out
}

/// `[U]_eps` on the shrunk interior.
pub fn mollify(field: &Field, kernel: &Kernel) -> Result<Mollified> {
    let grid = field.grid();
    let window = kernel.window(grid)?;
    let st = Stencil::new(grid, &kernel.offsets, &kernel.weights, kernel.volume);
    let data: Vec<f64> = (0..field.n_components())
        .flat_map(|c| convolve(grid, field.component(c), &st, &kernel.radius, &window))
        .collect();
    Ok(Mollified {
        field: Field::new(grid.clone(), field.names().to_vec(), data)?,
        window,
    })
}

/// `D_X [U]_eps` by convolution with the kernel derivative. Components are
/// ordered `[component][kernel axis]`.
pub fn mollified_gradient(field: &Field, kernel: &Kernel) -> Result<Mollified> {
    let grid = field.grid();
    let window = kernel.window(grid)?;
    let stencils: Vec<Stencil> = kernel
        .grad
        .iter()
        .map(|g| Stencil::new(grid, &kernel.offsets, g, kernel.volume))
        .collect();
    let mut names = Vec::new();
    let mut data = Vec::new();
    for c in 0..field.n_components() {
        for (st, &a) in stencils.iter().zip(&kernel.axes) {
            names.push(format!("d{a}_{}", field.names()[c]));
            data.extend(convolve(grid, field.component(c), st, &kernel.radius, &window));
        }
    }
    Ok(Mollified {
        field: Field::new(grid.clone(), names, data)?,
        window,
    })
}

/// Mollified state, mollified flux and their commutator at one scale.
#[derive(Debug, Clone)]
pub struct CommutatorParts {
    /// `[U]_eps`.
    pub state: Field,
    /// `[G(U)]_eps`, `rows x (k+1)` components.
    pub flux: Field,
    /// `[G(U)]_eps - G([U]_eps)`.
    pub commutator: Field,
    pub window: Window,
}

pub fn commutator_parts(field: &Field, system: &SystemSpec, kernel: &Kernel) -> Result<CommutatorParts> {
    system.check_field(field)?;
    let g = evaluate(system, field, Quantity::G)?;
    let Mollified { field: flux, window } = mollify(&g, kernel)?;
    let state = mollify(field, kernel)?.field;
    let grid = field.grid();
    let npts = grid.len();
    let w = system.quantity_width(Quantity::G);
    let idx = window.indices(grid);
    let vals: Vec<Vec<f64>> = idx
        .par_iter()
        .map_init(
            || (vec![0.0; system.n()], vec![0.0; w]),
            |(u, gu), &p| {
                state.state_at(p, u);
                system.fill_g(u.as_slice(), gu.as_mut_slice());
                (0..w).map(|c| flux.value(c, p) - gu[c]).collect()
            },
        )
        .collect();
    let mut data = vec![0.0; w * npts];
    for (&p, v) in idx.iter().zip(vals) {
        for (c, x) in v.into_iter().enumerate() {
            data[c * npts + p] = x;
        }
    }
    let commutator = Field::new(grid.clone(), flux.names().to_vec(), data)?;
    Ok(CommutatorParts {
        state,
        flux,
        commutator,
        window,
    })
}

/// `[G(U)]_eps - G([U]_eps)` on the shrunk interior.
pub fn commutator(field: &Field, system: &SystemSpec, kernel: &Kernel) -> Result<Mollified> {
    let parts = commutator_parts(field, system, kernel)?;
    Ok(Mollified {
        field: parts.commutator,
        window: parts.window,
    })
}
