//! Run settings from command-line flags and `key = value` files.
//!
//! Every setting is optional at parse time; a config file fills the gaps the
//! flags leave open, and [`Settings::resolve`] turns the result into a case
//! plus discretization with documented defaults.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use cutfem::analysis::{Sweep, DEFAULT_ALPHAS};
use cutfem::assembly::Stabilization;
use cutfem::cases::{case_manufactured, case_mjr_at, case_quarter_circle_with, CaseId, CaseSpec, MJR_THICKNESS};
use cutfem::solver::{Discretization, LinearSolver};
use cutfem::{Error, Formulation};

pub const DEFAULT_OUTPUT: &str = "output";
pub const DEFAULT_LEVELS: usize = 4;
/// Coarsest `nx` of convergence studies and h-sweeps.
pub const DEFAULT_NX0: usize = 11;

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    match s {
        "alpha" => Ok(Sweep::Alpha),
        "h" => Ok(Sweep::H),
        _ => Err(format!("unknown sweep '{s}' (expected alpha or h)")),
    }
}

fn sweep_name(s: Sweep) -> &'static str {
    match s {
        Sweep::Alpha => "alpha",
        Sweep::H => "h",
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("{e}: '{t}'")))
        .collect()
}

/// Settings shared by all commands. Field names double as config-file keys.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Case number: 1 manufactured, 2 low-permeability crack, 3 quarter circle.
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long, value_parser = parse_formulation)]
    pub formulation: Option<Formulation>,
    /// Cells along x (coarsest level for studies).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Cells along y; derived from the domain aspect ratio by default.
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// Crack thickness of the thickness-driven cases.
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_name = "BOOL")]
    pub bulk_jumps: Option<bool>,
    #[arg(long, value_name = "BOOL")]
    pub band_jumps: Option<bool>,
    #[arg(long, value_name = "BOOL")]
    pub band_normal: Option<bool>,
    #[arg(long)]
    pub band_normal_scale: Option<f64>,
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<LinearSolver>,
    #[arg(long)]
    pub cg_tol: Option<f64>,
    #[arg(long, value_name = "BOOL")]
    pub refined_tau: Option<bool>,
    /// Abscissa of the crack in case 2.
    #[arg(long)]
    pub crack_x: Option<f64>,
    #[arg(long)]
    pub arc_center_x: Option<f64>,
    #[arg(long)]
    pub arc_center_y: Option<f64>,
    #[arg(long)]
    pub arc_radius: Option<f64>,
    /// Condition study sweep: alpha or h.
    #[arg(long, value_parser = parse_sweep)]
    pub sweep: Option<Sweep>,
    /// Comma-separated α values of an alpha sweep.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Also estimate κ for every convergence level.
    #[arg(long, value_name = "BOOL")]
    pub with_condition: Option<bool>,
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<LinearSolver, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, Error>
where
    T::Err: Display,
{
    raw.parse()
        .map_err(|e| Error::Config(format!("invalid value '{raw}' for '{key}': {e}")))
}

fn set<T>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

impl Settings {
    /// Fill unset fields from `key = value` lines. Unknown keys are errors.
    pub fn merge_file_text(&mut self, text: &str) -> Result<(), Error> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, raw) = (key.trim(), raw.trim());
            match key {
                "case" => set(&mut self.case, value(key, raw)?),
                "formulation" => set(&mut self.formulation, value(key, raw)?),
                "nx" => set(&mut self.nx, value(key, raw)?),
                "ny" => set(&mut self.ny, value(key, raw)?),
                "levels" => set(&mut self.levels, value(key, raw)?),
                "alpha" => set(&mut self.alpha, value(key, raw)?),
                "xi" => set(&mut self.xi, value(key, raw)?),
                "d" => set(&mut self.d, value(key, raw)?),
                "beta" => set(&mut self.beta, value(key, raw)?),
                "gamma" => set(&mut self.gamma, value(key, raw)?),
                "bulk_jumps" => set(&mut self.bulk_jumps, value(key, raw)?),
                "band_jumps" => set(&mut self.band_jumps, value(key, raw)?),
                "band_normal" => set(&mut self.band_normal, value(key, raw)?),
                "band_normal_scale" => set(&mut self.band_normal_scale, value(key, raw)?),
                "solver" => set(&mut self.solver, value(key, raw)?),
                "cg_tol" => set(&mut self.cg_tol, value(key, raw)?),
                "refined_tau" => set(&mut self.refined_tau, value(key, raw)?),
                "crack_x" => set(&mut self.crack_x, value(key, raw)?),
                "arc_center_x" => set(&mut self.arc_center_x, value(key, raw)?),
                "arc_center_y" => set(&mut self.arc_center_y, value(key, raw)?),
                "arc_radius" => set(&mut self.arc_radius, value(key, raw)?),
                "sweep" => set(&mut self.sweep, parse_sweep(raw).map_err(Error::Config)?),
                "alphas" => set(&mut self.alphas, parse_list(raw).map_err(Error::Config)?),
                "with_condition" => set(&mut self.with_condition, value(key, raw)?),
                "output" => set(&mut self.output, PathBuf::from(raw)),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{key}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        self.merge_file_text(&text)
    }

    /// Build the case and discretization. `study` selects the coarse default
    /// `nx` used by convergence studies and h-sweeps.
    pub fn resolve(&self, study: bool) -> Result<Resolved, Error> {
        let id = CaseId::from_number(self.case.unwrap_or(1))?;
        let gamma = self.gamma.unwrap_or(Stabilization::default().gamma);
        let mut case = match id {
            CaseId::Manufactured => {
                if self.d.is_some() {
                    return Err(Error::Config("case 1 has no crack thickness; set alpha and xi".into()));
                }
                case_manufactured()
            }
            CaseId::LowPermeabilityCrack => {
                let case = case_mjr_at(gamma, self.crack_x.unwrap_or(1.0))?;
                match self.d {
                    Some(d) => case.with_thickness(d)?,
                    None => case,
                }
            }
            CaseId::QuarterCircle => case_quarter_circle_with(
                self.d.unwrap_or(MJR_THICKNESS),
                [self.arc_center_x.unwrap_or(0.0), self.arc_center_y.unwrap_or(0.0)],
                self.arc_radius.unwrap_or(0.75),
            )?,
        };
        if id != CaseId::LowPermeabilityCrack && self.crack_x.is_some() {
            return Err(Error::Config("crack_x only applies to case 2".into()));
        }
        let arc = [self.arc_center_x, self.arc_center_y, self.arc_radius];
        if id != CaseId::QuarterCircle && arc.iter().any(Option::is_some) {
            return Err(Error::Config("arc parameters only apply to case 3".into()));
        }
        case = case.with_coupling(self.alpha, self.xi)?;

        let mut stab = case.stabilization;
        stab.gamma = gamma;
        if let Some(v) = self.bulk_jumps {
            stab.bulk_jumps = v;
        }
        if let Some(v) = self.band_jumps {
            stab.band_jumps = v;
        }
        if let Some(v) = self.band_normal {
            stab.band_normal = v;
        }
        if let Some(v) = self.band_normal_scale {
            stab.band_normal_scale = v;
        }
        if !(stab.gamma >= 0.0) || !(stab.band_normal_scale >= 0.0) {
            return Err(Error::Config("stabilization scales must be non-negative".into()));
        }
        let default_nx = if study { DEFAULT_NX0 } else { case.default_nx };
        let mut disc = Discretization::new(
            self.nx.unwrap_or(default_nx),
            self.formulation.unwrap_or(Formulation::Robust),
        );
        disc.ny = self.ny;
        disc.beta = Some(self.beta.unwrap_or(case.beta));
        disc.stabilization = Some(stab);
        disc.refined_tau = self.refined_tau.unwrap_or(false);
        disc.solver = self.solver.unwrap_or(LinearSolver::Direct);
        if let Some(tol) = self.cg_tol {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("cg_tol must be positive, got {tol}")));
            }
            disc.cg_tol = tol;
        }
        if disc.nx == 0 || disc.ny == Some(0) {
            return Err(Error::Config("nx and ny must be positive".into()));
        }
        let levels = self.levels.unwrap_or(DEFAULT_LEVELS);
        if levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        Ok(Resolved {
            case,
            disc,
            levels,
            sweep: self.sweep.unwrap_or(Sweep::Alpha),
            alphas: self.alphas.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec()),
            with_condition: self.with_condition.unwrap_or(false),
            output: self.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
        })
    }
}

/// Fully specified run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub case: CaseSpec,
    pub disc: Discretization,
    pub levels: usize,
    pub sweep: Sweep,
    pub alphas: Vec<f64>,
    pub with_condition: bool,
    pub output: PathBuf,
}

impl Resolved {
    /// Effective configuration, echoed at the top of every output file.
    pub fn echo(&self, command: &str) -> Vec<(String, String)> {
        let d = &self.disc;
        let stab = d.stabilization.unwrap_or(self.case.stabilization);
        let coupling = self
            .case
            .coeffs
            .coupling_at([
                0.5 * (self.case.bbox.xmin + self.case.bbox.xmax),
                0.5 * (self.case.bbox.ymin + self.case.bbox.ymax),
            ])
            .map(|c| (c.alpha.to_string(), c.xi.to_string()))
            .unwrap_or_else(|_| ("n/a".into(), "n/a".into()));
        let mut out: Vec<(String, String)> = vec![
            ("command".into(), command.into()),
            ("case".into(), self.case.id.number().to_string()),
            ("case_name".into(), self.case.name.clone()),
            ("interface".into(), self.case.interface.describe()),
            ("formulation".into(), d.formulation.to_string()),
            ("nx".into(), d.nx.to_string()),
            (
                "ny".into(),
                d.ny.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
            ),
            ("levels".into(), self.levels.to_string()),
            ("alpha".into(), coupling.0),
            ("xi".into(), coupling.1),
            (
                "d".into(),
                self.case.thickness().map(|v| v.to_string()).unwrap_or_else(|| "n/a".into()),
            ),
            ("beta".into(), d.beta.unwrap_or(self.case.beta).to_string()),
            ("gamma".into(), stab.gamma.to_string()),
            ("bulk_jumps".into(), stab.bulk_jumps.to_string()),
            ("band_jumps".into(), stab.band_jumps.to_string()),
            ("band_normal".into(), stab.band_normal.to_string()),
            ("band_normal_scale".into(), stab.band_normal_scale.to_string()),
            ("solver".into(), d.solver.to_string()),
            ("cg_tol".into(), format!("{:e}", d.cg_tol)),
            ("refined_tau".into(), d.refined_tau.to_string()),
            ("cond".into(), "spectral condition number of the constrained matrix".into()),
        ];
        if command == "condition" {
            out.push(("sweep".into(), sweep_name(self.sweep).into()));
            let alphas: Vec<String> = self.alphas.iter().map(f64::to_string).collect();
            out.push(("alphas".into(), alphas.join(",")));
        }
        if command == "convergence" {
            out.push(("with_condition".into(), self.with_condition.to_string()));
        }
        for (k, a) in self.case.assumptions.iter().enumerate() {
            out.push((format!("assumption_{k}"), a.clone()));
        }
        out
    }
}
