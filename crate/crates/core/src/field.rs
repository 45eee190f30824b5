//! Multi-component samples on a [`Grid`].

use crate::error::{Error, Result};
use crate::grid::{Grid, Region};
use crate::reduce::det_sum;

/// `n` real components sampled on a grid, stored `[component][t][x1]..[xk]`
/// in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    names: Vec<String>,
    data: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, names: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidField("field needs at least one component".into()));
        }
        let expected = names.len() * grid.len();
        if data.len() != expected {
            return Err(Error::InvalidField(format!(
                "data length {} != {} components x {} points",
                data.len(),
                names.len(),
                grid.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite sample at component {}, index {}",
                i / grid.len(),
                i % grid.len()
            )));
        }
        Ok(Self { grid, names, data })
    }

    pub fn zeros(grid: Grid, names: Vec<String>) -> Self {
        let data = vec![0.0; names.len() * grid.len()];
        Self { grid, names, data }
    }

    pub fn constant(grid: Grid, names: Vec<String>, state: &[f64]) -> Result<Self> {
        if state.len() != names.len() {
            return Err(Error::InvalidField("state length does not match names".into()));
        }
        let npts = grid.len();
        let data = state
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, npts))
            .collect();
        Self::new(grid, names, data)
    }

    /// Time slice `t` as a field on the spatial grid (the field itself when
    /// there is no time axis).
    pub fn snapshot(&self, t: usize) -> Result<Self> {
        let g = &self.grid;
        if !g.has_time() {
            return Ok(self.clone());
        }
        if t >= g.num_snapshots() {
            return Err(Error::InvalidArgument(format!(
                "snapshot {t} out of range (have {})",
                g.num_snapshots()
            )));
        }
        let m = g.spatial_len();
        let data = (0..self.n_components())
            .flat_map(|c| self.component(c)[t * m..(t + 1) * m].iter().copied())
            .collect();
        Ok(Self {
            grid: g.spatial_grid(),
            names: self.names.clone(),
            data,
        })
    }

    /// Builds a field by evaluating `f(coords, out)` at every point.
    pub fn from_fn(
        grid: Grid,
        names: Vec<String>,
        f: impl Fn(&[f64], &mut [f64]),
    ) -> Result<Self> {
        let n = names.len();
        let npts = grid.len();
        let mut data = vec![0.0; n * npts];
        let mut x = vec![0.0; grid.ndim()];
        let mut u = vec![0.0; n];
        for p in 0..npts {
            grid.coords_of(p, &mut x);
            f(&x, &mut u);
            for c in 0..n {
                data[c * npts + p] = u[c];
            }
        }
        Self::new(grid, names, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn value(&self, c: usize, p: usize) -> f64 {
        self.data[c * self.grid.len() + p]
    }

    /// Copies the state vector at point `p` into `out`.
    #[inline]
    pub fn state_at(&self, p: usize, out: &mut [f64]) {
        let n = self.grid.len();
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.data[c * n + p];
        }
    }

    /// Euclidean norm of the state vector at `p`.
    #[inline]
    pub fn magnitude_at(&self, p: usize) -> f64 {
        let n = self.grid.len();
        (0..self.names.len())
            .map(|c| self.data[c * n + p].powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Applies `f` to every sample, keeping names and grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.names.clone(),
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Stacks the components of several fields on the same grid.
    pub fn stack(fields: &[&Field]) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidField("nothing to stack".into()))?;
        let mut names = Vec::new();
        let mut data = Vec::new();
        for f in fields {
            if f.grid != first.grid {
                return Err(Error::InvalidField("stacked fields live on different grids".into()));
            }
            names.extend(f.names.iter().cloned());
            data.extend_from_slice(&f.data);
        }
        Self::new(first.grid.clone(), names, data)
    }

    /// Keeps only the listed components.
    pub fn select(&self, comps: &[usize]) -> Result<Self> {
        let names = comps.iter().map(|&c| self.names[c].clone()).collect();
        let data = comps
            .iter()
            .flat_map(|&c| self.component(c).iter().copied())
            .collect();
        Self::new(self.grid.clone(), names, data)
    }
}

/// Discrete `L^p` norm over `region`: `(sum |U|^p * cell volume)^(1/p)`,
/// with `|U|` the Euclidean norm across components.
pub fn lp_norm(field: &Field, p: f64, region: &Region) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 1")));
    }
    let idx = region.indices();
    if idx.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(lp_norm_at(field, p, &idx))
}

/// `L^p` norm over an explicit list of flat indices.
pub(crate) fn lp_norm_at(field: &Field, p: f64, idx: &[usize]) -> f64 {
    let vol = field.grid().cell_volume();
    let s = det_sum(idx, |&q| field.magnitude_at(q).powf(p));
    (s * vol).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Grid {
        Grid::new(1, vec![n], vec![1.0 / n as f64], vec![true], false).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_bad_length() {
        let g = line(4);
        assert!(Field::new(g.clone(), vec!["u".into()], vec![0.0; 3]).is_err());
        assert!(Field::new(g, vec!["u".into()], vec![0.0, 1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn constant_norm_is_exact() {
        let g = Grid::unit_box(2, 16, &[true, false]).unwrap();
        let f = Field::constant(g.clone(), vec!["c".into()], &[-2.5]).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let v = lp_norm(&f, p, &Region::all(&g)).unwrap();
            assert!((v - 2.5).abs() < 1e-14, "p={p}: {v}");
        }
    }

    #[test]
    fn sine_l2_norm() {
        let g = line(1024);
        let f = Field::from_fn(g.clone(), vec!["u".into()], |x, u| {
            u[0] = (2.0 * std::f64::consts::PI * x[0]).sin()
        })
        .unwrap();
        let v = lp_norm(&f, 2.0, &Region::all(&g)).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn half_region_scales_with_measure() {
        let g = Grid::unit_box(2, 32, &[false, false]).unwrap();
        let f = Field::constant(g.clone(), vec!["c".into()], &[3.0]).unwrap();
        let half = Region::from_predicate(&g, "left", |x| x[0] < 0.5);
        for p in [1.0, 2.0, 3.0] {
            let v = lp_norm(&f, p, &half).unwrap();
            assert!((v - 3.0 * 0.5f64.powf(1.0 / p)).abs() < 1e-13);
        }
    }

    #[test]
    fn empty_region_is_an_error() {
        let g = line(8);
        let f = Field::constant(g.clone(), vec!["c".into()], &[1.0]).unwrap();
        let none = Region::from_predicate(&g, "none", |_| false);
        assert!(matches!(lp_norm(&f, 2.0, &none), Err(Error::EmptyRegion)));
    }
}
