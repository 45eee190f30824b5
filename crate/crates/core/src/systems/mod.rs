//! Registry of conservation-law systems `div_X G(U) = 0` together with an
//! entropy pair `(eta, q)` and the multiplier `B` relating them through
//! `D_U q_j = B . D_U F_j` and `D_U eta = B . D_U A`.
//!
//! `G` is stored row by row, one row per equation, with column 0 holding the
//! time flux `A` and columns `1..=k` the spatial fluxes `F_j`. Some systems
//! carry more equations than state components (constraint rows such as
//! `div h = 0`), so `rows() >= n()`.

mod compat;
mod pressure;
pub mod scalar;

pub use compat::{check_compatibility, CompatReport};
pub use pressure::PressureLaw;

use crate::error::{Error, Result};
use crate::field::Field;
use scalar::Scalar;
use serde::Serialize;

/// Names accepted by [`register_system`].
pub const SYSTEM_NAMES: [&str; 7] = [
    "burgers",
    "incomp-euler",
    "inhom-incomp-euler",
    "comp-euler",
    "elasto",
    "incomp-mhd",
    "comp-mhd",
];

/// Coefficient `c` of the default stored energy `|F|^2/2 + c sum ln(1 + F_ij^2)`.
pub const DEFAULT_ELASTIC_COEFF: f64 = 0.1;

const VEL_BOX: (f64, f64) = (-2.0, 2.0);
const RHO_BOX: (f64, f64) = (0.5, 2.0);
const P_BOX: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Burgers,
    IncompEuler,
    InhomIncompEuler,
    CompEuler,
    Elasto,
    IncompMhd,
    CompMhd,
}

impl SystemKind {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "burgers" => Self::Burgers,
            "incomp-euler" => Self::IncompEuler,
            "inhom-incomp-euler" => Self::InhomIncompEuler,
            "comp-euler" => Self::CompEuler,
            "elasto" => Self::Elasto,
            "incomp-mhd" => Self::IncompMhd,
            "comp-mhd" => Self::CompMhd,
            other => return Err(Error::UnknownSystem(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Burgers => "burgers",
            Self::IncompEuler => "incomp-euler",
            Self::InhomIncompEuler => "inhom-incomp-euler",
            Self::CompEuler => "comp-euler",
            Self::Elasto => "elasto",
            Self::IncompMhd => "incomp-mhd",
            Self::CompMhd => "comp-mhd",
        }
    }

    fn needs_pressure_law(self) -> bool {
        matches!(self, Self::CompEuler | Self::CompMhd)
    }
}

/// Which multiplier to use. Only the standard one satisfies the
/// compatibility relations; the others exist to exercise the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierVariant {
    Standard,
    /// Literature forms that fail the checker: `P' + |m|^2/(2 rho^2)` for
    /// compressible Euler, no constraint multiplier and the reduced flux
    /// `(|v|^2 + |h|^2) v / 2 - (v.h) h` for incompressible MHD.
    Printed,
    /// Drops the quadratic kinetic term of the multiplier (e.g. `-|v|^2/2`).
    DropQuadratic,
}

/// Pointwise quantity selector for [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    A,
    F,
    B,
    Eta,
    Q,
    G,
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" | "a" => Self::A,
            "F" | "f" => Self::F,
            "B" | "b" => Self::B,
            "eta" => Self::Eta,
            "q" => Self::Q,
            "G" | "g" => Self::G,
            other => return Err(Error::InvalidArgument(format!("unknown quantity `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemSpec {
    kind: SystemKind,
    k: usize,
    state_names: Vec<String>,
    row_names: Vec<String>,
    state_domain: Vec<(f64, f64)>,
    affine_rows: Vec<usize>,
    superlinear_multipliers: Vec<usize>,
    pressure_law: Option<PressureLaw>,
    elastic_coeff: f64,
    variant: MultiplierVariant,
    notes: Vec<String>,
}

/// Looks up a registry system in its default spatial dimension (1 for
/// Burgers, 3 otherwise) with the default pressure law `p = rho^2`.
pub fn register_system(name: &str) -> Result<SystemSpec> {
    let kind = SystemKind::from_name(name)?;
    let k = if kind == SystemKind::Burgers { 1 } else { 3 };
    SystemSpec::builder(name, k)?.build()
}

/// Registry system in `k` space dimensions with default parameters.
pub fn system(name: &str, k: usize) -> Result<SystemSpec> {
    SystemSpec::builder(name, k)?.build()
}

/// Names, rows, state box, affine rows and superlinear multipliers.
type Layout = (Vec<String>, Vec<String>, Vec<(f64, f64)>, Vec<usize>, Vec<usize>);

pub struct SystemBuilder {
    kind: SystemKind,
    k: usize,
    pressure_law: Option<PressureLaw>,
    elastic_coeff: f64,
    variant: MultiplierVariant,
}

impl SystemBuilder {
    pub fn pressure_law(mut self, law: Option<PressureLaw>) -> Self {
        self.pressure_law = law;
        self
    }

    pub fn elastic_coeff(mut self, c: f64) -> Self {
        self.elastic_coeff = c;
        self
    }

    pub fn variant(mut self, v: MultiplierVariant) -> Self {
        self.variant = v;
        self
    }

    pub fn build(self) -> Result<SystemSpec> {
        let Self {
            kind,
            k,
            pressure_law,
            elastic_coeff,
            variant,
        } = self;
        if kind.needs_pressure_law() && pressure_law.is_none() {
            return Err(Error::MissingPressureLaw(kind.name().into()));
        }
        let idx = |prefix: &str| -> Vec<String> { (1..=k).map(|i| format!("{prefix}{i}")).collect() };
        let mut notes = Vec::new();
        let (state_names, row_names, state_domain, affine_rows, superlinear): Layout = match kind {
            SystemKind::Burgers => (
                vec!["u".into()],
                vec!["u".into()],
                vec![VEL_BOX],
                vec![],
                vec![],
            ),
            SystemKind::IncompEuler => {
                let mut s = idx("v");
                s.push("p".into());
                let mut rows = idx("mom");
                rows.push("div_v".into());
                let mut dom = vec![VEL_BOX; k];
                dom.push(P_BOX);
                (s, rows, dom, vec![k], vec![k])
            }
            SystemKind::InhomIncompEuler => {
                let mut s = vec!["rho".to_string()];
                s.extend(idx("m"));
                s.push("p".into());
                let mut rows = vec!["mass".to_string()];
                rows.extend(idx("mom"));
                rows.push("div_v".into());
                let mut dom = vec![RHO_BOX];
                dom.extend(vec![VEL_BOX; k]);
                dom.push(P_BOX);
                (s, rows, dom, vec![0], vec![0])
            }
            SystemKind::CompEuler => {
                let mut s = vec!["rho".to_string()];
                s.extend(idx("m"));
                let mut rows = vec!["mass".to_string()];
                rows.extend(idx("mom"));
                let mut dom = vec![RHO_BOX];
                dom.extend(vec![VEL_BOX; k]);
                notes.push(
                    "density multiplier is P'(rho) - |m|^2/(2 rho^2); the '+' sign variant fails D_U eta = B D_U A"
                        .into(),
                );
                (s, rows, dom, vec![0], vec![0])
            }
            SystemKind::Elasto => {
                let mut s = idx("v");
                for i in 1..=k {
                    for j in 1..=k {
                        s.push(format!("F{i}{j}"));
                    }
                }
                let mut rows: Vec<String> = idx("mom");
                for i in 1..=k {
                    for j in 1..=k {
                        rows.push(format!("compat_F{i}{j}"));
                    }
                }
                let n = k + k * k;
                let affine = if elastic_coeff == 0.0 {
                    (0..n).collect()
                } else {
                    (k..n).collect()
                };
                notes.push(
                    "written as dt U - div(S, v) = 0, so the spatial fluxes are -S and -v and q_j = -v_i S_ij".into(),
                );
                (s, rows, vec![VEL_BOX; n], affine, vec![])
            }
            SystemKind::IncompMhd => {
                let mut s = idx("v");
                s.extend(idx("h"));
                s.push("p".into());
                let mut rows = idx("mom");
                rows.extend(idx("ind"));
                rows.push("div_v".into());
                rows.push("div_h".into());
                let mut dom = vec![VEL_BOX; 2 * k];
                dom.push(P_BOX);
                notes.push(
                    "includes the div h = 0 row with multiplier v.h; entropy flux (|v|^2/2 + |h|^2 + p) v - (v.h) h".into(),
                );
                (s, rows, dom, vec![2 * k, 2 * k + 1], vec![2 * k, 2 * k + 1])
            }
            SystemKind::CompMhd => {
                let mut s = vec!["rho".to_string()];
                s.extend(idx("m"));
                s.extend(idx("h"));
                let mut rows = vec!["mass".to_string()];
                rows.extend(idx("mom"));
                rows.extend(idx("ind"));
                rows.push("div_h".into());
                let mut dom = vec![RHO_BOX];
                dom.extend(vec![VEL_BOX; 2 * k]);
                notes.push("includes the div h = 0 row with multiplier (m.h)/rho".into());
                (s, rows, dom, vec![0, 2 * k + 1], vec![0, 2 * k + 1])
            }
        };
        Ok(SystemSpec {
            kind,
            k,
            state_names,
            row_names,
            state_domain,
            affine_rows,
            superlinear_multipliers: superlinear,
            pressure_law,
            elastic_coeff,
            variant,
            notes,
        })
    }
}

impl SystemSpec {
    pub fn builder(name: &str, k: usize) -> Result<SystemBuilder> {
        let kind = SystemKind::from_name(name)?;
        if kind == SystemKind::Burgers && k != 1 {
            return Err(Error::InvalidArgument("burgers is one-dimensional".into()));
        }
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidArgument(format!("spatial dimension {k} not in 1..=3")));
        }
        Ok(SystemBuilder {
            kind,
            k,
            pressure_law: kind
                .needs_pressure_law()
                .then_some(PressureLaw::default()),
            elastic_coeff: DEFAULT_ELASTIC_COEFF,
            variant: MultiplierVariant::Standard,
        })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.state_names.len()
    }

    /// Number of equations (rows of `G`).
    pub fn rows(&self) -> usize {
        self.row_names.len()
    }

    /// Spatial dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    pub fn state_domain(&self) -> &[(f64, f64)] {
        &self.state_domain
    }

    pub fn affine_rows(&self) -> &[usize] {
        &self.affine_rows
    }

    /// Multiplier components that grow faster than linearly; each sits on an
    /// affine row of `G`.
    pub fn superlinear_multipliers(&self) -> &[usize] {
        &self.superlinear_multipliers
    }

    pub fn pressure_law(&self) -> Option<&PressureLaw> {
        self.pressure_law.as_ref()
    }

    pub fn variant(&self) -> MultiplierVariant {
        self.variant
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Index of the first state component outside the state domain.
    pub fn domain_violation(&self, u: &[f64]) -> Option<usize> {
        u.iter()
            .zip(&self.state_domain)
            .position(|(&v, &(lo, hi))| !(v >= lo && v <= hi))
    }

    fn law(&self) -> &PressureLaw {
        self.pressure_law
            .as_ref()
            .expect("pressure law checked at build time")
    }

    /// Fills `g` (`rows x (k+1)`, row-major, column 0 = `A`).
    pub fn fill_g<S: Scalar>(&self, u: &[S], g: &mut [S]) {
        let k = self.k;
        let c = k + 1;
        let z = S::zero();
        g.iter_mut().for_each(|x| *x = z);
        match self.kind {
            SystemKind::Burgers => {
                g[0] = u[0];
                g[1] = u[0].sq().scale(0.5);
            }
            SystemKind::IncompEuler => {
                let p = u[k];
                for i in 0..k {
                    g[i * c] = u[i];
                    for j in 0..k {
                        let mut f = u[i] * u[j];
                        if i == j {
                            f += p;
                        }
                        g[i * c + 1 + j] = f;
                    }
                }
                for j in 0..k {
                    g[k * c + 1 + j] = u[j];
                }
            }
            SystemKind::InhomIncompEuler => {
                let rho = u[0];
                let m = &u[1..=k];
                let p = u[k + 1];
                g[0] = rho;
                g[1..=k].copy_from_slice(&m[..k]);
                for i in 0..k {
                    let r = (1 + i) * c;
                    g[r] = m[i];
                    for j in 0..k {
                        let mut f = m[i] * m[j] / rho;
                        if i == j {
                            f += p;
                        }
                        g[r + 1 + j] = f;
                    }
                }
                let r = (k + 1) * c;
                for j in 0..k {
                    g[r + 1 + j] = m[j] / rho;
                }
            }
            SystemKind::CompEuler => {
                let rho = u[0];
                let m = &u[1..=k];
                let p = self.law().pressure(rho);
                g[0] = rho;
                g[1..=k].copy_from_slice(&m[..k]);
                for i in 0..k {
                    let r = (1 + i) * c;
                    g[r] = m[i];
                    for j in 0..k {
                        let mut f = m[i] * m[j] / rho;
                        if i == j {
                            f += p;
                        }
                        g[r + 1 + j] = f;
                    }
                }
            }
            SystemKind::Elasto => {
                let v = &u[..k];
                let def = &u[k..];
                for i in 0..k {
                    g[i * c] = v[i];
                    for j in 0..k {
                        g[i * c + 1 + j] = -self.stress(def[i * k + j]);
                    }
                }
                for i in 0..k {
                    for l in 0..k {
                        let r = (k + i * k + l) * c;
                        g[r] = def[i * k + l];
                        g[r + 1 + l] = -v[i];
                    }
                }
            }
            SystemKind::IncompMhd => {
                let v = &u[..k];
                let h = &u[k..2 * k];
                let p = u[2 * k];
                let h2 = dot(h, h).scale(0.5);
                for i in 0..k {
                    g[i * c] = v[i];
                    g[(k + i) * c] = h[i];
                    for j in 0..k {
                        let mut f = v[i] * v[j] - h[i] * h[j];
                        if i == j {
                            f += p + h2;
                        }
                        g[i * c + 1 + j] = f;
                        g[(k + i) * c + 1 + j] = h[i] * v[j] - v[i] * h[j];
                    }
                }
                for j in 0..k {
                    g[2 * k * c + 1 + j] = v[j];
                    g[(2 * k + 1) * c + 1 + j] = h[j];
                }
            }
            SystemKind::CompMhd => {
                let rho = u[0];
                let m = &u[1..=k];
                let h = &u[k + 1..=2 * k];
                let ptot = self.law().pressure(rho) + dot(h, h).scale(0.5);
                g[0] = rho;
                g[1..=k].copy_from_slice(&m[..k]);
                for i in 0..k {
                    let rm = (1 + i) * c;
                    let rh = (1 + k + i) * c;
                    g[rm] = m[i];
                    g[rh] = h[i];
                    for j in 0..k {
                        let mut f = m[i] * m[j] / rho - h[i] * h[j];
                        if i == j {
                            f += ptot;
                        }
                        g[rm + 1 + j] = f;
                        g[rh + 1 + j] = (h[i] * m[j] - m[i] * h[j]) / rho;
                    }
                }
                let r = (2 * k + 1) * c;
                for j in 0..k {
                    g[r + 1 + j] = h[j];
                }
            }
        }
    }

    /// Fills the multiplier `B` (length `rows`).
    pub fn fill_b<S: Scalar>(&self, u: &[S], b: &mut [S]) {
        let k = self.k;
        let printed = self.variant == MultiplierVariant::Printed;
        let drop = self.variant == MultiplierVariant::DropQuadratic;
        match self.kind {
            SystemKind::Burgers => b[0] = u[0],
            SystemKind::IncompEuler => {
                b[..k].copy_from_slice(&u[..k]);
                let v2 = dot(&u[..k], &u[..k]).scale(0.5);
                b[k] = if drop { u[k] } else { u[k] - v2 };
            }
            SystemKind::InhomIncompEuler => {
                let rho = u[0];
                let m = &u[1..=k];
                b[0] = if drop {
                    S::zero()
                } else {
                    -dot(m, m) / rho.sq().scale(2.0)
                };
                for i in 0..k {
                    b[1 + i] = m[i] / rho;
                }
                b[k + 1] = u[k + 1];
            }
            SystemKind::CompEuler => {
                let rho = u[0];
                let m = &u[1..=k];
                let kin = dot(m, m) / rho.sq().scale(2.0);
                let dp = self.law().potential_derivative(rho);
                b[0] = match self.variant {
                    MultiplierVariant::Standard => dp - kin,
                    MultiplierVariant::Printed => dp + kin,
                    MultiplierVariant::DropQuadratic => dp,
                };
                for i in 0..k {
                    b[1 + i] = m[i] / rho;
                }
            }
            SystemKind::Elasto => {
                b[..k].copy_from_slice(&u[..k]);
                for (bi, &f) in b[k..].iter_mut().zip(&u[k..]) {
                    *bi = self.stress(f);
                }
            }
            SystemKind::IncompMhd => {
                let v = &u[..k];
                let h = &u[k..2 * k];
                b[..2 * k].copy_from_slice(&u[..2 * k]);
                b[2 * k] = if drop {
                    u[2 * k]
                } else {
                    u[2 * k] - dot(v, v).scale(0.5)
                };
                b[2 * k + 1] = if printed { S::zero() } else { dot(v, h) };
            }
            SystemKind::CompMhd => {
                let rho = u[0];
                let m = &u[1..=k];
                let h = &u[k + 1..=2 * k];
                let kin = dot(m, m) / rho.sq().scale(2.0);
                let dp = self.law().potential_derivative(rho);
                b[0] = if drop { dp } else { dp - kin };
                for i in 0..k {
                    b[1 + i] = m[i] / rho;
                    b[1 + k + i] = h[i];
                }
                b[2 * k + 1] = dot(m, h) / rho;
            }
        }
    }

    pub fn eta<S: Scalar>(&self, u: &[S]) -> S {
        let k = self.k;
        match self.kind {
            SystemKind::Burgers => u[0].sq().scale(0.5),
            SystemKind::IncompEuler => dot(&u[..k], &u[..k]).scale(0.5),
            SystemKind::InhomIncompEuler => dot(&u[1..=k], &u[1..=k]) / u[0].scale(2.0),
            SystemKind::CompEuler => {
                dot(&u[1..=k], &u[1..=k]) / u[0].scale(2.0) + self.law().potential(u[0])
            }
            SystemKind::Elasto => {
                let mut e = dot(&u[..k], &u[..k]).scale(0.5);
                for &f in &u[k..] {
                    e += self.stored_energy(f);
                }
                e
            }
            SystemKind::IncompMhd => dot(&u[..2 * k], &u[..2 * k]).scale(0.5),
            SystemKind::CompMhd => {
                let rho = u[0];
                let m = &u[1..=k];
                let h = &u[k + 1..=2 * k];
                dot(m, m) / rho.scale(2.0) + self.law().potential(rho) + dot(h, h).scale(0.5)
            }
        }
    }

    /// Fills the entropy flux `q` (length `k`).
    pub fn fill_q<S: Scalar>(&self, u: &[S], q: &mut [S]) {
        let k = self.k;
        match self.kind {
            SystemKind::Burgers => q[0] = u[0] * u[0] * u[0] / S::cst(3.0),
            SystemKind::IncompEuler => {
                let s = dot(&u[..k], &u[..k]).scale(0.5) + u[k];
                for j in 0..k {
                    q[j] = s * u[j];
                }
            }
            SystemKind::InhomIncompEuler => {
                let rho = u[0];
                let m = &u[1..=k];
                let s = dot(m, m) / rho.scale(2.0) + u[k + 1];
                for j in 0..k {
                    q[j] = s * m[j] / rho;
                }
            }
            SystemKind::CompEuler => {
                let rho = u[0];
                let m = &u[1..=k];
                let law = self.law();
                let s = dot(m, m) / rho.scale(2.0) + law.potential(rho) + law.pressure(rho);
                for j in 0..k {
                    q[j] = s * m[j] / rho;
                }
            }
            SystemKind::Elasto => {
                let v = &u[..k];
                let def = &u[k..];
                for j in 0..k {
                    let mut s = S::zero();
                    for i in 0..k {
                        s += v[i] * self.stress(def[i * k + j]);
                    }
                    q[j] = -s;
                }
            }
            SystemKind::IncompMhd => {
                let v = &u[..k];
                let h = &u[k..2 * k];
                let vh = dot(v, h);
                let s = if self.variant == MultiplierVariant::Printed {
                    dot(&u[..2 * k], &u[..2 * k]).scale(0.5)
                } else {
                    dot(v, v).scale(0.5) + dot(h, h) + u[2 * k]
                };
                for j in 0..k {
                    q[j] = s * v[j] - vh * h[j];
                }
            }
            SystemKind::CompMhd => {
                let rho = u[0];
                let m = &u[1..=k];
                let h = &u[k + 1..=2 * k];
                let law = self.law();
                let s = dot(m, m) / rho.scale(2.0)
                    + law.potential(rho)
                    + law.pressure(rho)
                    + dot(h, h);
                let vh = dot(m, h) / rho;
                for j in 0..k {
                    q[j] = s * m[j] / rho - vh * h[j];
                }
            }
        }
    }

    /// Stress `dG/dF_ij` of the elastic stored energy, entrywise.
    fn stress<S: Scalar>(&self, f: S) -> S {
        f + f.scale(2.0 * self.elastic_coeff) / (S::cst(1.0) + f.sq())
    }

    fn stored_energy<S: Scalar>(&self, f: S) -> S {
        f.sq().scale(0.5) + (S::cst(1.0) + f.sq()).ln().scale(self.elastic_coeff)
    }

    /// Components per point produced by [`evaluate`] for `which`.
    pub fn quantity_width(&self, which: Quantity) -> usize {
        match which {
            Quantity::A | Quantity::B => self.rows(),
            Quantity::F => self.rows() * self.k,
            Quantity::Eta => 1,
            Quantity::Q => self.k,
            Quantity::G => self.rows() * (self.k + 1),
        }
    }

    fn quantity_names(&self, which: Quantity) -> Vec<String> {
        let rows = &self.row_names;
        match which {
            Quantity::A => rows.iter().map(|r| format!("A_{r}")).collect(),
            Quantity::B => rows.iter().map(|r| format!("B_{r}")).collect(),
            Quantity::F => rows
                .iter()
                .flat_map(|r| (1..=self.k).map(move |j| format!("F_{r}_{j}")))
                .collect(),
            Quantity::G => rows
                .iter()
                .flat_map(|r| (0..=self.k).map(move |j| format!("G_{r}_{j}")))
                .collect(),
            Quantity::Eta => vec!["eta".into()],
            Quantity::Q => (1..=self.k).map(|j| format!("q{j}")).collect(),
        }
    }

    /// Pointwise `f64` evaluation of one quantity into `out`.
    pub fn eval_into(&self, which: Quantity, u: &[f64], out: &mut [f64]) {
        let c = self.k + 1;
        match which {
            Quantity::G => self.fill_g(u, out),
            Quantity::A | Quantity::F => {
                let mut g = vec![0.0; self.rows() * c];
                self.fill_g(u, &mut g);
                for r in 0..self.rows() {
                    if which == Quantity::A {
                        out[r] = g[r * c];
                    } else {
                        out[r * self.k..(r + 1) * self.k]
                            .copy_from_slice(&g[r * c + 1..(r + 1) * c]);
                    }
                }
            }
            Quantity::B => self.fill_b(u, out),
            Quantity::Eta => out[0] = self.eta(u),
            Quantity::Q => self.fill_q(u, out),
        }
    }

    /// Checks that `field` matches the system layout and lies in the state
    /// domain.
    pub fn check_field(&self, field: &Field) -> Result<()> {
        if field.n_components() != self.n() {
            return Err(Error::InvalidField(format!(
                "{} expects {} components, field has {}",
                self.name(),
                self.n(),
                field.n_components()
            )));
        }
        if field.grid().spatial_dims() != self.k {
            return Err(Error::InvalidField(format!(
                "{} is {}-dimensional, grid has {} spatial axes",
                self.name(),
                self.k,
                field.grid().spatial_dims()
            )));
        }
        for c in 0..self.n() {
            let (lo, hi) = self.state_domain[c];
            if let Some((index, &value)) = field
                .component(c)
                .iter()
                .enumerate()
                .find(|(_, &v)| !(v >= lo && v <= hi))
            {
                return Err(Error::StateDomain {
                    component: self.state_names[c].clone(),
                    value,
                    lo,
                    hi,
                    index,
                });
            }
        }
        Ok(())
    }
}

/// Pointwise application of `which` to every sample of `field`.
pub fn evaluate(system: &SystemSpec, field: &Field, which: Quantity) -> Result<Field> {
    system.check_field(field)?;
    let grid = field.grid().clone();
    let npts = grid.len();
    let w = system.quantity_width(which);
    let mut data = vec![0.0; w * npts];
    let mut u = vec![0.0; system.n()];
    let mut out = vec![0.0; w];
    for p in 0..npts {
        field.state_at(p, &mut u);
        system.eval_into(which, &u, &mut out);
        for (c, v) in out.iter().enumerate() {
            data[c * npts + p] = *v;
        }
    }
    Field::new(grid, system.quantity_names(which), data)
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}
