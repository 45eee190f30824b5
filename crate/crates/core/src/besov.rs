//! Third-order structure functions and the Besov-VMO modulus
//!
//! `omega(eps) = (1/eps) * int_region avg_{B_eps(X)} |U(X) - U(Y)|^3 dY dX`.
//!
//! The ball `B_eps` is the set of lattice offsets of Euclidean length at most
//! `eps`, and the average divides by the number of offsets.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, Region};
use crate::reduce::det_sum;
use serde::Serialize;

/// Lattice offsets with `|o| <= eps` over `axes` (zero elsewhere).
pub fn ball_offsets(grid: &Grid, epsilon: f64, axes: &[usize]) -> Vec<Vec<isize>> {
    let nd = grid.ndim();
    let r: Vec<isize> = (0..nd)
        .map(|a| {
            if axes.contains(&a) {
                (epsilon / grid.spacing(a) + 1e-9).floor() as isize
            } else {
                0
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<isize> = r.iter().map(|x| -x).collect();
    let tol = epsilon * epsilon * (1.0 + 1e-12);
    loop {
        let d2: f64 = (0..nd).map(|a| (cur[a] as f64 * grid.spacing(a)).powi(2)).sum();
        if d2 <= tol {
            out.push(cur.clone());
        }
        let mut done = true;
        for a in (0..nd).rev() {
            if cur[a] < r[a] {
                cur[a] += 1;
                done = false;
                break;
            }
            cur[a] = -r[a];
        }
        if done {
            return out;
        }
    }
}

fn cubed_increment(field: &Field, p: usize, q: usize) -> f64 {
    let n = field.n_components();
    let s: f64 = (0..n)
        .map(|c| (field.value(c, p) - field.value(c, q)).powi(2))
        .sum();
    s * s.sqrt()
}

/// Neighbour of `pos` shifted by `off`, or `None` when it leaves the grid.
fn shifted(grid: &Grid, pos: &[usize], off: &[isize]) -> Option<usize> {
    let mut q = 0usize;
    for a in 0..grid.ndim() {
        q = q * grid.extent(a) + grid.shift_index(a, pos[a], off[a])?;
    }
    Some(q)
}

/// Besov-VMO modulus with the ball taken over every grid axis.
pub fn vmo_modulus(field: &Field, region: &Region, epsilon: f64) -> Result<f64> {
    let axes: Vec<usize> = (0..field.grid().ndim()).collect();
    vmo_modulus_on_axes(field, region, epsilon, &axes)
}

/// Besov-VMO modulus with the ball restricted to `axes` (e.g. spatial axes
/// only, averaging over time slices).
pub fn vmo_modulus_on_axes(field: &Field, region: &Region, epsilon: f64, axes: &[usize]) -> Result<f64> {
    let grid = field.grid();
    let hmax = axes.iter().map(|&a| grid.spacing(a)).fold(0.0, f64::max);
    if !(epsilon >= 2.0 * hmax * (1.0 - 1e-12)) {
        return Err(Error::UnderResolved(format!(
            "epsilon = {epsilon} < 2 x spacing {hmax}"
        )));
    }
    let idx = region.indices();
    if idx.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let ball = ball_offsets(grid, epsilon, axes);
    let reach: Vec<usize> = (0..grid.ndim())
        .map(|a| ball.iter().map(|o| o[a].unsigned_abs()).max().unwrap_or(0))
        .collect();
    let mut pos = vec![0; grid.ndim()];
    for &p in &idx {
        grid.unravel(p, &mut pos);
        for a in 0..grid.ndim() {
            if !grid.is_periodic(a) && (pos[a] < reach[a] || pos[a] + reach[a] >= grid.extent(a)) {
                return Err(Error::RegionTouchesBoundary(format!(
                    "point {p} within epsilon = {epsilon} of axis {a} end"
                )));
            }
        }
    }
    let count = ball.len() as f64;
    let vol = grid.cell_volume();
    let total = det_sum(&idx, |&p| {
        let mut pos = vec![0; grid.ndim()];
        grid.unravel(p, &mut pos);
        ball.iter()
            .map(|o| cubed_increment(field, p, shifted(grid, &pos, o).expect("checked")))
            .sum::<f64>()
            / count
    });
    Ok(total * vol / epsilon)
}

/// Moduli of component groups, e.g. velocity, density and pressure blocks.
pub fn group_moduli(field: &Field, region: &Region, epsilon: f64, groups: &[Vec<usize>]) -> Result<Vec<f64>> {
    groups
        .iter()
        .map(|g| vmo_modulus(&field.select(g)?, region, epsilon))
        .collect()
}

/// `(1/|Z|) * int |U(X) - U(X+Z)|^3 dX` for a lattice shift `Z`; wraps on
/// periodic axes and restricts `X` on bounded ones.
pub fn directional_modulus(field: &Field, shift: &[isize]) -> Result<f64> {
    let grid = field.grid();
    if shift.len() != grid.ndim() {
        return Err(Error::InvalidArgument(format!(
            "shift has {} entries, grid has {} axes",
            shift.len(),
            grid.ndim()
        )));
    }
    let len = shift
        .iter()
        .enumerate()
        .map(|(a, &z)| (z as f64 * grid.spacing(a)).powi(2))
        .sum::<f64>()
        .sqrt();
    if len == 0.0 {
        return Err(Error::InvalidArgument("shift must be nonzero".into()));
    }
    for (a, &z) in shift.iter().enumerate() {
        if !grid.is_periodic(a) && z.unsigned_abs() >= grid.extent(a) {
            return Err(Error::ShiftOutOfDomain(format!(
                "|{z}| points along bounded axis {a} of extent {}",
                grid.extent(a)
            )));
        }
    }
    let total = crate::reduce::det_sum_range(grid.len(), |p| {
        let mut pos = vec![0; grid.ndim()];
        grid.unravel(p, &mut pos);
        match shifted(grid, &pos, shift) {
            Some(q) => cubed_increment(field, p, q),
            None => 0.0,
        }
    });
    Ok(total * grid.cell_volume() / len)
}

/// Third-order structure function `S_3(Z) = int |U(X) - U(X+Z)|^3 dX`.
pub fn structure_function(field: &Field, shift: &[isize]) -> Result<f64> {
    let len = shift
        .iter()
        .enumerate()
        .map(|(a, &z)| (z as f64 * field.grid().spacing(a)).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(directional_modulus(field, shift)? * len)
}

/// Mixed-exponent criteria under which energy is conserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `2 alpha + beta > 1`.
    InhomEuler,
    /// `beta > max(1 - 2 alpha, (1 - alpha) / 2)`.
    CompEuler,
    /// `alpha > 1/3` and `alpha + 2 beta > 1`.
    MhdCaflisch,
    /// `alpha >= 1/3` and `alpha + 2 beta >= 1`.
    MhdKangLee,
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "inhom-euler" => Self::InhomEuler,
            "comp-euler" => Self::CompEuler,
            "mhd-caflisch" => Self::MhdCaflisch,
            "mhd-kang-lee" => Self::MhdKangLee,
            other => return Err(Error::UnknownCriterion(other.into())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    /// `LHS - RHS`; for two-part conditions the smaller of the two margins.
    pub margin: f64,
}

pub fn exponent_condition_check(alpha: f64, beta: f64, criterion: &str) -> Result<ConditionCheck> {
    let criterion: Criterion = criterion.parse()?;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} = {v} not in [0, 1]")));
        }
    }
    Ok(match criterion {
        Criterion::InhomEuler => {
            let m = 2.0 * alpha + beta - 1.0;
            ConditionCheck { holds: m > 0.0, margin: m }
        }
        Criterion::CompEuler => {
            let m = beta - f64::max(1.0 - 2.0 * alpha, (1.0 - alpha) / 2.0);
            ConditionCheck { holds: m > 0.0, margin: m }
        }
        Criterion::MhdCaflisch => {
            let m1 = alpha - 1.0 / 3.0;
            let m2 = alpha + 2.0 * beta - 1.0;
            ConditionCheck {
                holds: m1 > 0.0 && m2 > 0.0,
                margin: m1.min(m2),
            }
        }
        Criterion::MhdKangLee => {
            let m1 = alpha - 1.0 / 3.0;
            let m2 = alpha + 2.0 * beta - 1.0;
            ConditionCheck {
                holds: m1 >= 0.0 && m2 >= 0.0,
                margin: m1.min(m2),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn sine(n: usize) -> Field {
        let g = Grid::unit_box(1, n, &[true]).unwrap();
        Field::from_fn(g, vec!["u".into()], |x, u| u[0] = (TAU * x[0]).sin()).unwrap()
    }

    #[test]
    fn constant_field_has_zero_modulus() {
        let g = Grid::unit_box(2, 32, &[true, false]).unwrap();
        let f = Field::constant(g.clone(), vec!["c".into()], &[2.0]).unwrap();
        let r = Region::interior(&g, 0.2);
        assert_eq!(vmo_modulus(&f, &r, 0.1).unwrap(), 0.0);
        assert_eq!(directional_modulus(&f, &[1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn cubic_homogeneity() {
        let f = sine(256);
        let r = Region::all(f.grid());
        let w = vmo_modulus(&f, &r, 0.05).unwrap();
        let g = f.map(|v| -2.0 * v).unwrap();
        let w2 = vmo_modulus(&g, &r, 0.05).unwrap();
        assert!((w2 - 8.0 * w).abs() <= 1e-12 * w2);
    }

    #[test]
    fn region_too_close_to_boundary() {
        let g = Grid::unit_box(1, 64, &[false]).unwrap();
        let f = Field::constant(g.clone(), vec!["c".into()], &[1.0]).unwrap();
        let r = Region::interior(&g, 0.05);
        assert!(matches!(
            vmo_modulus(&f, &r, 0.1),
            Err(Error::RegionTouchesBoundary(_))
        ));
        assert!(vmo_modulus(&f, &Region::interior(&g, 0.11), 0.1).is_ok());
    }

    #[test]
    fn shift_out_of_domain() {
        let g = Grid::unit_box(1, 16, &[false]).unwrap();
        let f = Field::constant(g, vec!["c".into()], &[1.0]).unwrap();
        assert!(matches!(
            directional_modulus(&f, &[16]),
            Err(Error::ShiftOutOfDomain(_))
        ));
        assert!(directional_modulus(&f, &[0]).is_err());
    }

    #[test]
    fn boundary_cases_of_exponent_conditions() {
        let c = exponent_condition_check(1.0 / 3.0, 1.0 / 3.0, "inhom-euler").unwrap();
        assert!(!c.holds);
        assert_eq!(c.margin, 0.0);
        let c = exponent_condition_check(0.5, 0.1, "comp-euler").unwrap();
        assert!(!c.holds);
        assert!((c.margin + 0.15).abs() < 1e-15);
        let c = exponent_condition_check(0.4, 0.4, "mhd-caflisch").unwrap();
        assert!(c.holds);
        let c = exponent_condition_check(1.0 / 3.0, 1.0 / 3.0, "mhd-kang-lee").unwrap();
        assert!(c.holds);
        assert!(exponent_condition_check(0.2, 0.2, "navier").is_err());
        assert!(exponent_condition_check(1.2, 0.2, "comp-euler").is_err());
    }
}
