use crate::args::*;
use crate::config::Config;
use anyhow::{bail, Context, Result};
use cldiag_core::besov::{exponent_condition_check, vmo_modulus};
use cldiag_core::boundary::{global_balance, shell_integral, ShellSpec};
use cldiag_core::residuals::{
    companion_sweep, dissipation_density, weak_check, CompanionResidual, KernelAxes, TestFunction,
    WeakCheck,
};
use cldiag_core::sweep::{geometric_sweep, scaling_fit, SweepReport};
use cldiag_core::synth::{
    burgers_shock, holder_field, manufactured_state, rough_profile, shear_flow, shear_flow_from_samples,
    ManufacturedMode,
};
use cldiag_core::systems::{check_compatibility, register_system, system, PressureLaw, SystemSpec, SYSTEM_NAMES};
use cldiag_core::{snapshot, Field, Grid, Region};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// How a successful run ended.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// The diagnostic ran but a configured threshold was missed.
    Threshold(String),
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Systems(cmd) => systems(cmd),
        Command::Synth(cmd) => synth(cmd, &cfg),
        Command::Structure(a) => structure(a, &cfg),
        Command::CheckCompat(a) => check_compat(a, &cfg),
        Command::Dissipation(a) => dissipation(a, &cfg),
        Command::BoundaryFlux(a) => boundary_flux(a, &cfg),
        Command::Balance(a) => balance(a, &cfg),
        Command::Scaling(cmd) => scaling(cmd),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<Field> {
    snapshot::load(path).with_context(|| format!("cannot load snapshot {}", path.display()))
}

fn system_name<'a>(flag: &'a Option<String>, cfg: &'a Config) -> Result<&'a str> {
    flag.as_deref()
        .or(cfg.system.as_deref())
        .context("no system given (use --system or set `system` in the config)")
}

/// Registry system matching the spatial dimension of `field`.
fn system_for(name: &str, field: &Field) -> Result<SystemSpec> {
    Ok(system(name, field.grid().spatial_dims())?)
}

/// Explicit scales from the flag or config, else the geometric sweep from
/// `max_cells * h` down to `min_cells * h`. Returned strictly decreasing.
fn epsilons(flag: &Option<Vec<f64>>, cfg: &Config, h: f64) -> Result<Vec<f64>> {
    let mut eps = match flag.as_ref().or(cfg.sweep.epsilons.as_ref()) {
        Some(list) => list.clone(),
        None => geometric_sweep(cfg.sweep.max_cells * h, cfg.sweep.min_cells * h, cfg.sweep.ratio)?,
    };
    if eps.is_empty() {
        bail!("empty epsilon list");
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        bail!("epsilon {e} must be positive");
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    Ok(eps)
}

fn sweep_text(report: &SweepReport, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    }
}

#[derive(Serialize)]
struct SystemInfo<'a> {
    name: &'a str,
    n: usize,
    k: usize,
    rows: usize,
    state_names: &'a [String],
    row_names: &'a [String],
    /// Infinite bounds serialize as `null`.
    state_domain: &'a [(f64, f64)],
    affine_rows: &'a [usize],
    superlinear_multipliers: &'a [usize],
    pressure_law: Option<&'a PressureLaw>,
    notes: &'a [String],
}

impl<'a> From<&'a SystemSpec> for SystemInfo<'a> {
    fn from(s: &'a SystemSpec) -> Self {
        Self {
            name: s.name(),
            n: s.n(),
            k: s.k(),
            rows: s.rows(),
            state_names: s.state_names(),
            row_names: s.row_names(),
            state_domain: s.state_domain(),
            affine_rows: s.affine_rows(),
            superlinear_multipliers: s.superlinear_multipliers(),
            pressure_law: s.pressure_law(),
            notes: s.notes(),
        }
    }
}

fn systems(cmd: SystemsCmd) -> Result<Outcome> {
    let text = match cmd {
        SystemsCmd::List => {
            let specs = SYSTEM_NAMES
                .iter()
                .map(|n| register_system(n))
                .collect::<cldiag_core::Result<Vec<_>>>()?;
            json(&specs.iter().map(SystemInfo::from).collect::<Vec<_>>())
        }
        SystemsCmd::Describe { name, k } => {
            let spec = match k {
                Some(k) => system(&name, k)?,
                None => register_system(&name)?,
            };
            json(&SystemInfo::from(&spec))
        }
    };
    emit(&text, None)?;
    Ok(Outcome::Ok)
}

fn make_grid(g: &GridArgs, periodic: &[bool]) -> Result<Grid> {
    let grid = Grid::unit_box(periodic.len(), g.n, periodic)?;
    if g.nt == 0 {
        return Ok(grid);
    }
    if !(g.t_end > 0.0) {
        bail!("--t-end must be positive");
    }
    Ok(grid.with_time(g.nt, g.t_end / g.nt as f64)?)
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    output: String,
    components: &'a [String],
    extents: &'a [usize],
    spacings: &'a [f64],
    periodic: &'a [bool],
    has_time: bool,
}

fn synth(cmd: SynthCmd, cfg: &Config) -> Result<Outcome> {
    let seed = |s: Option<u64>| s.or(cfg.seed).unwrap_or(0);
    let (field, output) = match cmd {
        SynthCmd::Holder { grid, dims, alpha, components, seed: s, cutoff, output } => {
            let g = make_grid(&grid, &vec![true; dims])?;
            (holder_field(&g, alpha, components, seed(s), cutoff)?, output)
        }
        SynthCmd::Shock { grid, u_left, u_right, x0, output } => {
            if grid.nt < 2 {
                bail!("a shock needs --nt >= 2");
            }
            let g = make_grid(&grid, &[false])?;
            (burgers_shock(&g, u_left, u_right, x0)?, output)
        }
        SynthCmd::Shear { grid, alpha, seed: s, p0, output } => {
            let g = make_grid(&grid, &[true, false])?;
            let f = match alpha {
                Some(a) => shear_flow_from_samples(&g, &rough_profile(grid.n, a, seed(s))?, p0)?,
                None => shear_flow(&g, |y| (std::f64::consts::PI * y).sin(), p0)?,
            };
            (f, output)
        }
        SynthCmd::Manufactured { grid, system: name, dims, mode, seed: s, bounded, output } => {
            let name = system_name(&name, cfg)?;
            let sys = match dims {
                Some(k) => system(name, k)?,
                None => register_system(name)?,
            };
            let g = make_grid(&grid, &vec![!bounded; sys.k()])?;
            let mode = match mode.parse::<ManufacturedMode>()? {
                ManufacturedMode::SmoothRandom { .. } => ManufacturedMode::SmoothRandom { seed: seed(s) },
                m => m,
            };
            (manufactured_state(&sys, &g, mode)?, output)
        }
    };
    snapshot::save(&output, &field).with_context(|| format!("cannot write {}", output.display()))?;
    let g = field.grid();
    let summary = SynthSummary {
        output: output.display().to_string(),
        components: field.names(),
        extents: g.extents(),
        spacings: g.spacings(),
        periodic: g.periodic(),
        has_time: g.has_time(),
    };
    emit(&json(&summary), None)?;
    Ok(Outcome::Ok)
}

fn structure(a: StructureArgs, cfg: &Config) -> Result<Outcome> {
    let mut field = load(&a.input)?;
    if let Some(comps) = &a.components {
        if let Some(c) = comps.iter().find(|&&c| c >= field.n_components()) {
            bail!("component {c} out of range (field has {})", field.n_components());
        }
        field = field.select(comps)?;
    }
    let grid = field.grid();
    let region = match a.region_margin.or(cfg.region.margin) {
        Some(m) if m > 0.0 => Region::interior(grid, m),
        _ => Region::all(grid),
    };
    let eps = epsilons(&a.sweep.epsilons, cfg, grid.max_spacing())?;
    let values = eps
        .iter()
        .map(|&e| vmo_modulus(&field, &region, e))
        .collect::<cldiag_core::Result<Vec<_>>>()?;
    let report = SweepReport::new(eps, values, region.label())?;
    emit(&sweep_text(&report, a.sweep.format), a.sweep.output.as_deref())?;
    Ok(Outcome::Ok)
}

fn check_compat(a: CompatArgs, cfg: &Config) -> Result<Outcome> {
    let name = system_name(&a.system, cfg)?;
    let sys = match a.k {
        Some(k) => system(name, k)?,
        None => register_system(name)?,
    };
    let samples = a.samples.or(cfg.samples).unwrap_or(200);
    let seed = a.seed.or(cfg.seed).unwrap_or(1);
    let report = check_compatibility(&sys, samples, seed)?;
    emit(&json(&report), a.output.as_deref())?;
    let tol = &cfg.tolerances;
    if report.max_residual > tol.compat_residual {
        return Ok(Outcome::Threshold(format!(
            "compatibility residual {:e} exceeds {:e}",
            report.max_residual, tol.compat_residual
        )));
    }
    if report.fd_relative > tol.compat_fd_relative {
        return Ok(Outcome::Threshold(format!(
            "finite-difference gap {:e} exceeds {:e}",
            report.fd_relative, tol.compat_fd_relative
        )));
    }
    Ok(Outcome::Ok)
}

fn test_function(grid: &Grid, cfg: &Config) -> Result<TestFunction> {
    match (&cfg.psi.lo, &cfg.psi.hi) {
        (None, None) => Ok(TestFunction::default_for(grid)?),
        (Some(lo), Some(hi)) => {
            let scale = |v: &[f64]| -> Vec<f64> {
                v.iter().enumerate().map(|(a, f)| f * grid.axis_length(a)).collect()
            };
            if lo.len() != grid.ndim() || hi.len() != grid.ndim() {
                bail!("[psi] lo and hi need {} entries (time first)", grid.ndim());
            }
            Ok(TestFunction::bump(grid, &scale(lo), &scale(hi))?)
        }
        _ => bail!("[psi] needs both lo and hi"),
    }
}

#[derive(Serialize)]
struct DissipationReport {
    #[serde(flatten)]
    sweep: SweepReport,
    companion: Vec<CompanionResidual>,
    weak: WeakCheck,
}

fn dissipation(a: DissipationArgs, cfg: &Config) -> Result<Outcome> {
    let field = load(&a.input)?;
    let sys = system_for(system_name(&a.system, cfg)?, &field)?;
    sys.check_field(&field)?;
    let grid = field.grid();
    let axes: KernelAxes = a.kernel.or(cfg.sweep.kernel).map(Into::into).unwrap_or_default();
    let h = match axes {
        KernelAxes::SpaceTime => grid.max_spacing(),
        KernelAxes::Spatial => grid.max_spatial_spacing(),
    };
    let eps = epsilons(&a.sweep.epsilons, cfg, h)?;
    let psi = test_function(grid, cfg)?;
    let companion = companion_sweep(&field, &sys, &psi, &eps, axes)?;
    let values = companion.iter().map(|r| r.value.abs()).collect();
    let sweep = SweepReport::new(eps.clone(), values, "psi")?;
    let finest = *sweep.values.last().expect("non-empty sweep");
    let text = match a.sweep.format {
        Format::Csv => sweep.to_csv(),
        Format::Json => json(&DissipationReport {
            sweep,
            companion,
            weak: weak_check(&field, &sys, &psi)?,
        }),
    };
    emit(&text, a.sweep.output.as_deref())?;
    if let Some(path) = &a.density_output {
        let e = *eps.last().expect("non-empty sweep");
        let d = dissipation_density(&field, &sys, &axes.kernel(grid, e)?)?;
        snapshot::save(path, &d.field).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(tol) = cfg.tolerances.residual {
        if finest > tol {
            return Ok(Outcome::Threshold(format!(
                "companion residual {finest:e} at the finest scale exceeds {tol:e}"
            )));
        }
    }
    Ok(Outcome::Ok)
}

fn boundary_flux(a: BoundaryFluxArgs, cfg: &Config) -> Result<Outcome> {
    let field = load(&a.input)?;
    let sys = system_for(system_name(&a.system, cfg)?, &field)?;
    let grid = field.grid();
    let range = match (a.t0, a.t1) {
        (None, None) => None,
        (t0, t1) => Some((t0.unwrap_or(f64::NEG_INFINITY), t1.unwrap_or(f64::INFINITY))),
    };
    let eps = epsilons(&a.sweep.epsilons, cfg, grid.max_spatial_spacing())?;
    let values = eps
        .iter()
        .map(|&e| shell_integral(&field, &sys, &ShellSpec::new(grid, e)?, range))
        .collect::<cldiag_core::Result<Vec<_>>>()?;
    let report = SweepReport::new(eps, values, "shell")?;
    emit(&sweep_text(&report, a.sweep.format), a.sweep.output.as_deref())?;
    if let Some(tol) = cfg.tolerances.shell {
        let finest = *report.values.last().expect("non-empty sweep");
        if finest > tol {
            return Ok(Outcome::Threshold(format!(
                "shell integral {finest:e} at the finest scale exceeds {tol:e}"
            )));
        }
    }
    Ok(Outcome::Ok)
}

fn balance(a: BalanceArgs, cfg: &Config) -> Result<Outcome> {
    let field = load(&a.input)?;
    let sys = system_for(system_name(&a.system, cfg)?, &field)?;
    let eps = a
        .epsilon
        .or(cfg.balance.epsilon)
        .unwrap_or(8.0 * field.grid().max_spatial_spacing());
    let report = global_balance(&field, &sys, eps)?;
    let mut text = report.to_json();
    text.push('\n');
    emit(&text, a.output.as_deref())?;
    let rel = cfg.tolerances.balance_closure;
    if !report.closes(rel) {
        return Ok(Outcome::Threshold(format!(
            "balance closure {:e} exceeds {rel} of the largest term {:e}",
            report.max_closure(),
            report.max_term()
        )));
    }
    Ok(Outcome::Ok)
}

fn scaling(cmd: ScalingCmd) -> Result<Outcome> {
    match cmd {
        ScalingCmd::Fit { input, expect, tolerance, output } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let fit = scaling_fit(&SweepReport::points_from_csv(&text)?)?;
            emit(&json(&fit), output.as_deref())?;
            if let (Some(p), Some(tol)) = (expect, tolerance) {
                if (fit.exponent - p).abs() > tol {
                    return Ok(Outcome::Threshold(format!(
                        "fitted exponent {} is not within {tol} of {p}",
                        fit.exponent
                    )));
                }
            }
            Ok(Outcome::Ok)
        }
        ScalingCmd::Condition { alpha, beta, criterion, output } => {
            let check = exponent_condition_check(alpha, beta, &criterion)?;
            emit(&json(&check), output.as_deref())?;
            Ok(Outcome::Ok)
        }
    }
}
