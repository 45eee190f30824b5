//! Distance to the boundary, projection onto it and the outward normal for
//! boxes with some periodic axes.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Nearest-face data at one spatial point.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePoint {
    /// Distance to the nearest bounded face.
    pub distance: f64,
    /// Projection of the point onto that face.
    pub sigma: Vec<f64>,
    /// Outward unit normal at `sigma`.
    pub normal: Vec<f64>,
    /// Spatial direction (0-based) orthogonal to the face.
    pub axis: usize,
}

/// Boundary data for every point of the spatial lattice of a grid.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    spatial: Grid,
    lengths: Vec<f64>,
    bounded: Vec<usize>,
    distance: Vec<f64>,
    axis: Vec<usize>,
    lower: Vec<bool>,
}

impl BoundaryGeometry {
    pub fn new(grid: &Grid) -> Result<Self> {
        let spatial = grid.spatial_grid();
        let bounded: Vec<usize> = (0..spatial.ndim())
            .filter(|&a| !spatial.is_periodic(a))
            .collect();
        if bounded.is_empty() {
            return Err(Error::NoBoundary);
        }
        let lengths: Vec<f64> = (0..spatial.ndim()).map(|a| spatial.axis_length(a)).collect();
        let npts = spatial.len();
        let mut distance = Vec::with_capacity(npts);
        let mut axis = Vec::with_capacity(npts);
        let mut lower = Vec::with_capacity(npts);
        let mut x = vec![0.0; spatial.ndim()];
        for p in 0..npts {
            spatial.coords_of(p, &mut x);
            let (d, a, lo) = nearest_face(&x, &lengths, &bounded);
            distance.push(d);
            axis.push(a);
            lower.push(lo);
        }
        Ok(Self {
            spatial,
            lengths,
            bounded,
            distance,
            axis,
            lower,
        })
    }

    pub fn spatial_grid(&self) -> &Grid {
        &self.spatial
    }

    /// Tubular-neighbourhood width: half the shortest bounded-axis length.
    pub fn eps0(&self) -> f64 {
        0.5 * self
            .bounded
            .iter()
            .map(|&a| self.lengths[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the boundary at spatial point `p`.
    #[inline]
    pub fn distance(&self, p: usize) -> f64 {
        self.distance[p]
    }

    pub fn distances(&self) -> &[f64] {
        &self.distance
    }

    /// Spatial direction of the nearest face at `p` and whether it is the
    /// lower (`x = 0`) face.
    #[inline]
    pub fn face(&self, p: usize) -> (usize, bool) {
        (self.axis[p], self.lower[p])
    }

    /// Normal component along the nearest-face axis (`-1` lower, `+1` upper).
    #[inline]
    pub fn normal_sign(&self, p: usize) -> f64 {
        if self.lower[p] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn normal(&self, p: usize) -> Vec<f64> {
        let mut n = vec![0.0; self.spatial.ndim()];
        n[self.axis[p]] = self.normal_sign(p);
        n
    }

    pub fn point(&self, p: usize) -> FacePoint {
        let mut x = vec![0.0; self.spatial.ndim()];
        self.spatial.coords_of(p, &mut x);
        self.at(&x)
    }

    /// Face data at an arbitrary point of the box.
    pub fn at(&self, x: &[f64]) -> FacePoint {
        let (d, a, lo) = nearest_face(x, &self.lengths, &self.bounded);
        let mut sigma = x.to_vec();
        sigma[a] = if lo { 0.0 } else { self.lengths[a] };
        let mut normal = vec![0.0; x.len()];
        normal[a] = if lo { -1.0 } else { 1.0 };
        FacePoint {
            distance: d,
            sigma,
            normal,
            axis: a,
        }
    }
}

/// Ties go to the smallest axis, then to the lower face.
fn nearest_face(x: &[f64], lengths: &[f64], bounded: &[usize]) -> (f64, usize, bool) {
    let mut best = (f64::INFINITY, 0, true);
    for &a in bounded {
        let dl = x[a];
        let du = lengths[a] - x[a];
        if dl < best.0 {
            best = (dl, a, true);
        }
        if du < best.0 {
            best = (du, a, false);
        }
    }
    best
}
