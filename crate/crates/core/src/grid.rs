//! Uniform rectilinear space(-time) lattices, index windows and point regions.
//!
//! Axis order is `[t, x1, .., xk]` when the grid carries a time axis and
//! `[x1, .., xk]` otherwise. Samples sit at cell centres: along axis `a`
//! point `i` has coordinate `(i + 1/2) * spacing[a]`, so the axis covers
//! `[0, extent[a] * spacing[a]]`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    spatial_dims: usize,
    has_time: bool,
    extents: Vec<usize>,
    spacings: Vec<f64>,
    periodic: Vec<bool>,
}

impl Grid {
    /// Validates and builds a grid. `extents`, `spacings` and `periodic`
    /// list every axis, time first when `has_time` is set.
    pub fn new(
        spatial_dims: usize,
        extents: Vec<usize>,
        spacings: Vec<f64>,
        periodic: Vec<bool>,
        has_time: bool,
    ) -> Result<Self> {
        if !(1..=3).contains(&spatial_dims) {
            return Err(Error::InvalidGrid(format!(
                "spatial dimension {spatial_dims} not in 1..=3"
            )));
        }
        let naxes = spatial_dims + usize::from(has_time);
        if extents.len() != naxes || spacings.len() != naxes || periodic.len() != naxes {
            return Err(Error::InvalidGrid(format!(
                "expected {naxes} axes, got extents={}, spacings={}, periodic={}",
                extents.len(),
                spacings.len(),
                periodic.len()
            )));
        }
        if let Some(n) = extents.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("extent {n} < 2")));
        }
        if let Some(h) = spacings.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid(format!("spacing {h} must be positive")));
        }
        if has_time && periodic[0] {
            return Err(Error::InvalidGrid("time axis cannot be periodic".into()));
        }
        Ok(Self {
            spatial_dims,
            has_time,
            extents,
            spacings,
            periodic,
        })
    }

    /// Space-only grid on the unit box with `n` points per axis.
    pub fn unit_box(spatial_dims: usize, n: usize, periodic: &[bool]) -> Result<Self> {
        Self::new(
            spatial_dims,
            vec![n; spatial_dims],
            vec![1.0 / n as f64; spatial_dims],
            periodic.to_vec(),
            false,
        )
    }

    pub fn spatial_dims(&self) -> usize {
        self.spatial_dims
    }

    pub fn has_time(&self) -> bool {
        self.has_time
    }

    pub fn ndim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.extents[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacings[axis]
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn time_axis(&self) -> Option<usize> {
        self.has_time.then_some(0)
    }

    /// Axis index of spatial direction `j` (0-based).
    pub fn spatial_axis(&self, j: usize) -> usize {
        j + usize::from(self.has_time)
    }

    pub fn spatial_axes(&self) -> std::ops::Range<usize> {
        let off = usize::from(self.has_time);
        off..off + self.spatial_dims
    }

    /// Number of lattice points.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_snapshots(&self) -> usize {
        if self.has_time {
            self.extents[0]
        } else {
            1
        }
    }

    /// Points per time slice.
    pub fn spatial_len(&self) -> usize {
        self.extents[usize::from(self.has_time)..].iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    pub fn spatial_cell_volume(&self) -> f64 {
        self.spacings[usize::from(self.has_time)..].iter().product()
    }

    pub fn axis_length(&self, axis: usize) -> f64 {
        self.extents[axis] as f64 * self.spacings[axis]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacings[axis]
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.ndim()];
        for a in (0..self.ndim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.extents[a + 1];
        }
        s
    }

    pub fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        for a in (0..self.ndim()).rev() {
            idx[a] = flat % self.extents[a];
            flat /= self.extents[a];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.extents)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn coords_of(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.ndim()];
        self.unravel(flat, &mut idx);
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.coord(a, idx[a]);
        }
    }

    /// Neighbour index of `i` moved by `off` along `axis`; wraps on periodic
    /// axes, `None` when it leaves a bounded axis.
    #[inline]
    pub fn shift_index(&self, axis: usize, i: usize, off: isize) -> Option<usize> {
        let n = self.extents[axis] as isize;
        let j = i as isize + off;
        if self.periodic[axis] {
            Some(j.rem_euclid(n) as usize)
        } else if (0..n).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    /// The spatial sub-grid (time axis dropped).
    pub fn spatial_grid(&self) -> Grid {
        let off = usize::from(self.has_time);
        Grid {
            spatial_dims: self.spatial_dims,
            has_time: false,
            extents: self.extents[off..].to_vec(),
            spacings: self.spacings[off..].to_vec(),
            periodic: self.periodic[off..].to_vec(),
        }
    }

    /// Same lattice with the time axis replaced by `nt` snapshots of step `dt`.
    pub fn with_time(&self, nt: usize, dt: f64) -> Result<Grid> {
        let s = self.spatial_grid();
        let mut extents = vec![nt];
        extents.extend(&s.extents);
        let mut spacings = vec![dt];
        spacings.extend(&s.spacings);
        let mut periodic = vec![false];
        periodic.extend(&s.periodic);
        Grid::new(self.spatial_dims, extents, spacings, periodic, true)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_spatial_spacing(&self) -> f64 {
        self.spatial_axes()
            .map(|a| self.spacings[a])
            .fold(0.0, f64::max)
    }

    pub fn bounded_spatial_axes(&self) -> Vec<usize> {
        self.spatial_axes().filter(|&a| !self.periodic[a]).collect()
    }
}

/// A box of lattice indices: per axis the half-open range `lo..hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Window {
    pub fn full(grid: &Grid) -> Self {
        Self {
            lo: vec![0; grid.ndim()],
            hi: grid.extents().to_vec(),
        }
    }

    /// Shrinks by `r` points at both ends of `axis`.
    pub fn shrink(&mut self, axis: usize, r: usize) {
        self.lo[axis] += r;
        self.hi[axis] = self.hi[axis].saturating_sub(r);
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l >= h)
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&i, (&l, &h))| i >= l && i < h)
    }

    pub fn contains_flat(&self, grid: &Grid, flat: usize) -> bool {
        let mut idx = vec![0; grid.ndim()];
        grid.unravel(flat, &mut idx);
        self.contains(&idx)
    }

    /// Flat indices of the window in row-major order.
    pub fn indices(&self, grid: &Grid) -> Vec<usize> {
        if self.is_empty() {
            return Vec::new();
        }
        let nd = grid.ndim();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = self.lo.clone();
        loop {
            out.push(grid.ravel(&idx));
            let mut a = nd;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < self.hi[a] {
                    break;
                }
                idx[a] = self.lo[a];
            }
        }
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect(),
        }
    }
}

/// A set of lattice points, stored as a mask over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    mask: Vec<bool>,
    label: String,
}

impl Region {
    pub fn all(grid: &Grid) -> Self {
        Self {
            mask: vec![true; grid.len()],
            label: "all".into(),
        }
    }

    /// Points whose coordinates (time first when present) satisfy `pred`.
    pub fn from_predicate(grid: &Grid, label: &str, pred: impl Fn(&[f64]) -> bool) -> Self {
        let mut x = vec![0.0; grid.ndim()];
        let mask = (0..grid.len())
            .map(|p| {
                grid.coords_of(p, &mut x);
                pred(&x)
            })
            .collect();
        Self {
            mask,
            label: label.into(),
        }
    }

    /// Points at distance at least `margin` from both ends of every
    /// non-periodic axis (time included).
    pub fn interior(grid: &Grid, margin: f64) -> Self {
        let bounded: Vec<usize> = (0..grid.ndim()).filter(|&a| !grid.is_periodic(a)).collect();
        let lens: Vec<f64> = (0..grid.ndim()).map(|a| grid.axis_length(a)).collect();
        let mut r = Self::from_predicate(grid, "", |x| {
            bounded
                .iter()
                .all(|&a| x[a] >= margin && lens[a] - x[a] >= margin)
        });
        r.label = format!("interior(margin={margin})");
        r
    }

    pub fn from_window(grid: &Grid, w: &Window) -> Self {
        let mut mask = vec![false; grid.len()];
        for p in w.indices(grid) {
            mask[p] = true;
        }
        Self {
            mask,
            label: "window".into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn intersect(&self, other: &Region) -> Region {
        Region {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a && *b)
                .collect(),
            label: format!("{}&{}", self.label, other.label),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_circle() {
        let g = Grid::new(1, vec![256], vec![1.0 / 256.0], vec![true], false).unwrap();
        assert_eq!(g.len(), 256);
        assert!(g.is_periodic(0));
        assert!(g.bounded_spatial_axes().is_empty());
    }

    #[test]
    fn channel_flags_pass_through() {
        let g = Grid::new(2, vec![64, 64], vec![1.0 / 64.0; 2], vec![true, false], false).unwrap();
        assert_eq!(g.bounded_spatial_axes(), vec![1]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Grid::new(1, vec![8], vec![0.0], vec![true], false).is_err());
        assert!(Grid::new(1, vec![1], vec![0.1], vec![true], false).is_err());
        assert!(Grid::new(1, vec![4, 8], vec![0.1, 0.1], vec![true, true], true).is_err());
        assert!(Grid::new(4, vec![4; 4], vec![0.1; 4], vec![true; 4], false).is_err());
    }

    #[test]
    fn ravel_round_trip() {
        let g = Grid::new(2, vec![3, 4, 5], vec![0.1; 3], vec![false, true, false], true).unwrap();
        let mut idx = [0; 3];
        for p in 0..g.len() {
            g.unravel(p, &mut idx);
            assert_eq!(g.ravel(&idx), p);
        }
    }

    #[test]
    fn window_indices_are_row_major() {
        let g = Grid::unit_box(2, 4, &[false, false]).unwrap();
        let mut w = Window::full(&g);
        w.shrink(0, 1);
        w.shrink(1, 1);
        assert_eq!(w.indices(&g), vec![5, 6, 9, 10]);
        assert!(w.contains_flat(&g, 10));
        assert!(!w.contains_flat(&g, 3));
    }

    #[test]
    fn interior_region_respects_margin() {
        let g = Grid::unit_box(1, 10, &[false]).unwrap();
        let r = Region::interior(&g, 0.2);
        // centres 0.05 .. 0.95; keep 0.25 ..= 0.75
        assert_eq!(r.indices(), vec![2, 3, 4, 5, 6, 7]);
    }
}
