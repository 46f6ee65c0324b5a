//! Command line driver: single solves with VTK output, convergence studies
//! and condition-number studies with CSV output.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};

use cutfem::analysis::{
    condition_study, convergence_study, error_norms, gamma_oscillation, max_bulk_jump, value_range, Sweep,
};
use cutfem::fem::Field;
use cutfem::io::{fmt_f64, write_condition_csv, write_convergence_csv, write_summary_csv, write_vtk};
use cutfem::solver::solve;
use cutfem::{Error, Formulation};

use config::{Resolved, Settings};

#[derive(Debug, Parser)]
#[command(name = "cutfem", version, about = "Cut finite element pressure solver for fractured media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem; writes u1.vtk, u2.vtk, uGamma.vtk and summary.csv.
    Solve(Settings),
    /// Error norms and fitted rates over uniformly refined meshes.
    Convergence(Settings),
    /// Condition numbers over mesh levels or coupling strengths.
    Condition(Settings),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Convergence(_) => "convergence",
            Command::Condition(_) => "condition",
        }
    }

    fn settings(&self) -> &Settings {
        match self {
            Command::Solve(s) | Command::Convergence(s) | Command::Condition(s) => s,
        }
    }
}

/// Exit status per error category; clap uses 2 for malformed arguments.
fn exit_code(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            let code = match e.category() {
                "config" => 2,
                "geometry" => 3,
                "solver" => 4,
                "convergence" => 5,
                _ => 6,
            };
            return (code, e.category());
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (6, "io");
        }
    }
    (1, "error")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn run_solve(run: &Resolved, echo: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let solution = solve(&run.case, &run.disc)?;
    let mut diagnostics = vec![("residual".to_string(), solution.residual)];
    if let Some(it) = solution.iterations {
        diagnostics.push(("cg_iterations".into(), it as f64));
    }
    let (lo, hi) = value_range(&solution);
    diagnostics.push(("value_min".into(), lo));
    diagnostics.push(("value_max".into(), hi));
    diagnostics.push(("gamma_oscillation".into(), gamma_oscillation(&solution)));
    diagnostics.push(("max_bulk_jump".into(), max_bulk_jump(&solution)?));
    if run.case.exact.is_some() {
        let r = error_norms(&solution)?;
        diagnostics.extend([
            ("errL2_bulk".into(), r.err_l2_bulk),
            ("errH1semi_bulk".into(), r.err_h1semi_bulk),
            ("errL2_gamma".into(), r.err_l2_gamma),
            ("errH1semi_gamma".into(), r.err_h1semi_gamma),
            ("energy_err".into(), r.energy_err),
        ]);
    }
    prepare(&run.output)?;
    let mut written = Vec::new();
    for (field, name) in [(Field::Bulk1, "u1.vtk"), (Field::Bulk2, "u2.vtk"), (Field::Gamma, "uGamma.vtk")] {
        let mut w = create(&run.output, name)?;
        write_vtk(&mut w, echo, &solution, field)?;
        w.flush()?;
        written.push(run.output.join(name));
    }
    let mut w = create(&run.output, "summary.csv")?;
    write_summary_csv(&mut w, echo, &solution, &diagnostics)?;
    w.flush()?;
    written.push(run.output.join("summary.csv"));
    for (k, v) in &diagnostics {
        println!("{k} = {}", fmt_f64(*v));
    }
    Ok(written)
}

fn run_convergence(run: &Resolved, echo: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let table = convergence_study(&run.case, &run.disc, run.levels, run.with_condition)?;
    prepare(&run.output)?;
    let mut w = create(&run.output, "convergence.csv")?;
    write_convergence_csv(&mut w, echo, &table)?;
    w.flush()?;
    for row in &table.rows {
        let r = &row.report;
        println!(
            "level {} nx {} h {} errL2 {} errH1 {} errL2_gamma {} errH1_gamma {}",
            row.level,
            row.nx,
            fmt_f64(r.h),
            fmt_f64(r.err_l2_bulk),
            fmt_f64(r.err_h1semi_bulk),
            fmt_f64(r.err_l2_gamma),
            fmt_f64(r.err_h1semi_gamma),
        );
    }
    match table.rates() {
        Some(r) => println!(
            "rates: L2 {:.3} H1 {:.3} L2_gamma {:.3} H1_gamma {:.3} energy {:.3}",
            r.l2_bulk, r.h1semi_bulk, r.l2_gamma, r.h1semi_gamma, r.energy
        ),
        None => eprintln!("warning: fewer than three levels, no rates fitted"),
    }
    if let Some(msg) = &table.failure {
        eprintln!("warning: study stopped early: {msg}");
        if table.rows.is_empty() {
            eprintln!("warning: no level completed, wrote a header-only table");
        }
    }
    Ok(vec![run.output.join("convergence.csv")])
}

fn run_condition(run: &Resolved, settings: &Settings, echo: &[(String, String)]) -> Result<Vec<PathBuf>> {
    // an alpha sweep compares both formulations unless one was chosen
    let formulations = match (run.sweep, settings.formulation) {
        (Sweep::Alpha, None) => vec![Formulation::Robust, Formulation::Standard],
        _ => vec![run.disc.formulation],
    };
    prepare(&run.output)?;
    let mut written = Vec::new();
    for f in formulations {
        let disc = cutfem::solver::Discretization {
            formulation: f,
            ..run.disc
        };
        let table = condition_study(&run.case, &disc, run.sweep, run.levels, &run.alphas)?;
        let sweep = match run.sweep {
            Sweep::Alpha => "alpha",
            Sweep::H => "h",
        };
        let name = format!("condition_{sweep}_{f}.csv");
        let mut echo = echo.to_vec();
        if let Some(entry) = echo.iter_mut().find(|(k, _)| k == "formulation") {
            entry.1 = f.to_string();
        }
        let mut w = create(&run.output, &name)?;
        write_condition_csv(&mut w, &echo, &table)?;
        w.flush()?;
        for row in &table.rows {
            println!("{f} {sweep} {} cond {}", fmt_f64(row.parameter), fmt_f64(row.kappa));
        }
        if let Some(s) = table.slope() {
            println!("{f} slope {s:.3}");
        }
        written.push(run.output.join(name));
    }
    Ok(written)
}

fn run(cli: Cli) -> Result<()> {
    let mut settings = cli.command.settings().clone();
    if let Some(path) = settings.config.clone() {
        settings.merge_file(&path)?;
    }
    let study = match &cli.command {
        Command::Solve(_) => false,
        Command::Convergence(_) => true,
        Command::Condition(_) => settings.sweep == Some(Sweep::H),
    };
    let resolved = settings.resolve(study)?;
    let echo = resolved.echo(cli.command.name());
    let written = match &cli.command {
        Command::Solve(_) => run_solve(&resolved, &echo)?,
        Command::Convergence(_) => run_convergence(&resolved, &echo)?,
        Command::Condition(_) => run_condition(&resolved, &settings, &echo)?,
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, category) = exit_code(&err);
            eprintln!("error [{category}]: {err:#}");
            ExitCode::from(code)
        }
    }
}
