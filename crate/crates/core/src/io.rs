//! CSV tables and legacy VTK output.

use std::io::{self, Write};

use crate::analysis::{pair_rates, ConditionTable, ConvergenceTable, Sweep};
use crate::fem::Field;
use crate::solver::Solution;

pub const CONVERGENCE_HEADER: &str =
    "level,h,ndof,errL2_bulk,errH1semi_bulk,errL2_gamma,errH1semi_gamma,energy_err,cond";

/// Effective configuration as ordered `key = value` pairs.
pub type ConfigEcho = [(String, String)];

/// Twelve significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "nan".into())
}

pub fn write_config_comment(w: &mut impl Write, config: &ConfigEcho) -> io::Result<()> {
    for (k, v) in config {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

pub fn write_convergence_csv(w: &mut impl Write, config: &ConfigEcho, table: &ConvergenceTable) -> io::Result<()> {
    write_config_comment(w, config)?;
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for row in &table.rows {
        let r = &row.report;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            row.level,
            fmt_f64(r.h),
            r.ndof,
            fmt_f64(r.err_l2_bulk),
            fmt_f64(r.err_h1semi_bulk),
            fmt_f64(r.err_l2_gamma),
            fmt_f64(r.err_h1semi_gamma),
            fmt_f64(r.energy_err),
            fmt_opt(row.cond),
        )?;
    }
    if let Some(rates) = table.rates() {
        let columns: [(&str, f64); 5] = [
            ("errL2_bulk", rates.l2_bulk),
            ("errH1semi_bulk", rates.h1semi_bulk),
            ("errL2_gamma", rates.l2_gamma),
            ("errH1semi_gamma", rates.h1semi_gamma),
            ("energy_err", rates.energy),
        ];
        for (name, rate) in columns {
            writeln!(w, "#rate,{name},{}", fmt_f64(rate))?;
        }
        if let Some(c) = rates.cond {
            writeln!(w, "#rate,cond,{}", fmt_f64(c))?;
        }
        let h = table.h();
        let pairs = pair_rates(&h, &table.column(|r| r.err_l2_bulk));
        let pairs: Vec<String> = pairs.into_iter().map(fmt_opt).collect();
        writeln!(w, "#pair_rate,errL2_bulk,{}", pairs.join(","))?;
    }
    if let Some(msg) = &table.failure {
        writeln!(w, "#failure,{}", msg.replace('\n', " "))?;
    }
    Ok(())
}

pub fn write_condition_csv(w: &mut impl Write, config: &ConfigEcho, table: &ConditionTable) -> io::Result<()> {
    write_config_comment(w, config)?;
    let param = match table.sweep {
        Sweep::H => "level",
        Sweep::Alpha => "alpha",
    };
    writeln!(w, "{param},h,ndof,cond")?;
    for (k, row) in table.rows.iter().enumerate() {
        let p = match table.sweep {
            Sweep::H => k.to_string(),
            Sweep::Alpha => fmt_f64(row.parameter),
        };
        writeln!(w, "{p},{},{},{}", fmt_f64(row.h), row.ndof, fmt_f64(row.kappa))?;
    }
    if let Some(s) = table.slope() {
        writeln!(w, "#rate,cond,{}", fmt_f64(s))?;
    }
    Ok(())
}

/// Per-field value ranges plus scalar diagnostics of a single solve.
pub fn write_summary_csv(
    w: &mut impl Write,
    config: &ConfigEcho,
    solution: &Solution,
    diagnostics: &[(String, f64)],
) -> io::Result<()> {
    write_config_comment(w, config)?;
    writeln!(w, "quantity,value")?;
    writeln!(w, "h,{}", fmt_f64(solution.problem.h()))?;
    writeln!(w, "ndof,{}", solution.problem.n_dofs())?;
    for field in Field::ALL {
        let v = solution.field_values(field);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        writeln!(w, "{}_ndof,{}", field.name(), v.len())?;
        writeln!(w, "{}_min,{}", field.name(), fmt_f64(lo))?;
        writeln!(w, "{}_max,{}", field.name(), fmt_f64(hi))?;
    }
    for (k, v) in diagnostics {
        writeln!(w, "{k},{}", fmt_f64(*v))?;
    }
    Ok(())
}

/// Legacy VTK allows a single title line of at most 256 characters, which
/// carries the configuration echo.
fn vtk_title(config: &ConfigEcho) -> String {
    let mut s: String = config
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    s.retain(|c| c != '\n');
    if s.len() > 255 {
        let mut end = 255;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        s.truncate(end);
    }
    s
}

/// ASCII unstructured grid of the active elements of `field` with nodal
/// point data `pressure`.
pub fn write_vtk(w: &mut impl Write, config: &ConfigEcho, solution: &Solution, field: Field) -> io::Result<()> {
    let p = &solution.problem;
    let nodal = solution.nodal(field);
    let mut local = vec![usize::MAX; p.mesh.n_nodes()];
    let mut points = Vec::new();
    for (n, v) in nodal.iter().enumerate() {
        if let Some(v) = v {
            local[n] = points.len();
            points.push((p.mesh.nodes[n], *v));
        }
    }
    let cells = p.decomp.elements(field);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", vtk_title(config))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for ([x, y], _) in &points {
        writeln!(w, "{x} {y} 0")?;
    }
    writeln!(w, "CELLS {} {}", cells.len(), 4 * cells.len())?;
    for &e in cells {
        let [a, b, c] = p.mesh.triangles[e].map(|n| local[n]);
        writeln!(w, "3 {a} {b} {c}")?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", points.len())?;
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for (_, v) in &points {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Parsed CSV table: column names, numeric rows and `#rate` footers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedCsv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub rates: Vec<(String, f64)>,
    pub config: Vec<(String, String)>,
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv, String> {
    let mut out = ParsedCsv::default();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("#rate,") {
            let (name, v) = rest.split_once(',').ok_or("malformed rate line")?;
            out.rates
                .push((name.to_string(), v.parse().map_err(|e| format!("{e}: {v}"))?));
        } else if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(" = ") {
                out.config.push((k.to_string(), v.to_string()));
            }
        } else if line.starts_with('#') || line.is_empty() {
            continue;
        } else if out.header.is_empty() {
            out.header = line.split(',').map(str::to_string).collect();
        } else {
            let row = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("{e}: {f}")))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != out.header.len() {
                return Err(format!("row has {} fields, header {}", row.len(), out.header.len()));
            }
            out.rows.push(row);
        }
    }
    Ok(out)
}
