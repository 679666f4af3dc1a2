use std::fmt;
use std::path::Path;

use gme_core::boundent;
use gme_core::gme;
use gme_core::linalg::{partial_transpose, DensityMatrix, TAU_EIG};
use gme_core::separability::{self, TAU_DECOMP};
use gme_core::states::{isotropic_ghz, Partition};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{fmt_float, round_json, Cell, Table};
use crate::{Format, Grid, WitnessMode};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters; exit code 2.
    Config(String),
    /// A computed quantity broke its tolerance; exit code 3. The output is
    /// still emitted.
    Contract { message: String, output: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Contract { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Contract { message, .. } => write!(f, "numerical contract violated: {message}"),
        }
    }
}

impl From<gme_core::Error> for CliError {
    fn from(e: gme_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

type Out = Result<String, CliError>;

pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GME_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("GME_LAB_THREADS must be a positive integer, got {raw:?}")))?;
    // A second initialization (e.g. in tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn grid_points(g: &Grid) -> Result<Vec<f64>, CliError> {
    if g.steps == 0 {
        return Err(CliError::Config("grid needs at least one step".into()));
    }
    if !(g.start.is_finite() && g.stop.is_finite()) || g.start > g.stop {
        return Err(CliError::Config(format!(
            "grid start {} must not exceed stop {}",
            g.start, g.stop
        )));
    }
    if g.steps == 1 {
        return Ok(vec![g.start]);
    }
    let h = (g.stop - g.start) / (g.steps - 1) as f64;
    Ok((0..g.steps)
        .map(|i| if i + 1 == g.steps { g.stop } else { g.start + h * i as f64 })
        .collect())
}

fn render_table(t: &Table, fmt: Format) -> String {
    match fmt {
        Format::Csv => t.csv(),
        Format::Json => render_json(t.json()),
    }
}

fn render_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("json value serializes");
    s.push('\n');
    s
}

fn finish(output: String, violations: Vec<String>) -> Out {
    if violations.is_empty() {
        Ok(output)
    } else {
        Err(CliError::Contract {
            message: violations.join("; "),
            output,
        })
    }
}

pub fn thresholds(n: usize, n_max: usize, kmax: usize, fmt: Format) -> Out {
    if kmax == 0 {
        return Err(CliError::Config("empty k range: --kmax must be at least 1".into()));
    }
    if n_max < n {
        return Err(CliError::Config(format!("--n-max {n_max} is below --n {n}")));
    }
    let mut t = Table::new(vec!["N", "k", "p_threshold", "kind"]);
    for n in n..=n_max {
        let mut reports = vec![gme::single_copy_threshold(n)?];
        for k in 2..=kmax {
            reports.push(gme::k_copy_threshold(n, k)?);
        }
        reports.push(gme::partition_threshold(n)?);
        for r in reports {
            t.rows.push(vec![
                Cell::Int(r.n_qubits),
                r.k.map_or(Cell::Empty, Cell::Int),
                Cell::Float(r.p_threshold),
                Cell::Text(r.kind.as_str().into()),
            ]);
        }
    }
    Ok(render_table(&t, fmt))
}

pub fn concurrence(n: usize, grid: &Grid, tol: Option<f64>, fmt: Format) -> Out {
    let tol = tol.unwrap_or(1e-12);
    let points = grid_points(grid)?;
    let rows: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|&p| {
            let c = gme::gm_concurrence_xform(&isotropic_ghz(n, p)?);
            let closed = gme::gm_concurrence_isotropic(n, p)?;
            Ok((p, c, closed))
        })
        .collect::<Result<_, gme_core::Error>>()?;
    let mut t = Table::new(vec!["p", "c_gm", "is_gme"]);
    let mut bad = Vec::new();
    for (p, c, closed) in rows {
        if (c - closed).abs() > tol {
            bad.push(format!("p = {}: X-form {c} vs closed form {closed}", fmt_float(p)));
        }
        t.rows.push(vec![Cell::Float(p), Cell::Float(c), Cell::Bool(c > 0.0)]);
    }
    finish(render_table(&t, fmt), bad)
}

pub fn verify_decomposition(n: usize, grid: &Grid, tol: Option<f64>, fmt: Format) -> Out {
    if n != 3 {
        return Err(CliError::Config(format!(
            "unsupported N = {n}: the two-copy decomposition exists for N = 3 only"
        )));
    }
    let tol = tol.unwrap_or(TAU_DECOMP);
    let points = grid_points(grid)?;
    let reports: Vec<separability::VerificationReport> = points
        .par_iter()
        .map(|&p| Ok(separability::two_copy_decomposition(p)?.report()))
        .collect::<Result<_, gme_core::Error>>()?;
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !(r.residual_max <= tol))
        .map(|r| format!("p = {}: residual {:e}", fmt_float(r.p), r.residual_max))
        .collect();
    let text = match fmt {
        Format::Json => render_json(serde_json::to_value(&reports).expect("reports serialize")),
        Format::Csv => {
            let mut t = Table::new(vec![
                "p",
                "residual_max",
                "weight_diagonal",
                "weight_gamma1",
                "weight_gamma2",
                "weight_sigma",
                "diag_min",
                "valid",
                "gamma1_correction_applied",
            ]);
            for r in &reports {
                t.rows.push(vec![
                    Cell::Float(r.p),
                    Cell::Float(r.residual_max),
                    Cell::Float(r.weights.diagonal),
                    Cell::Float(r.weights.gamma1),
                    Cell::Float(r.weights.gamma2),
                    Cell::Float(r.weights.sigma),
                    Cell::Float(r.diag_min),
                    Cell::Bool(r.valid),
                    r.gamma1_correction_applied
                        .clone()
                        .map_or(Cell::Empty, Cell::Text),
                ]);
            }
            t.csv()
        }
    };
    finish(text, bad)
}

struct PptRow {
    p: f64,
    cut: String,
    min: f64,
    flagged: f64,
    flagged_gap: f64,
}

pub fn ppt_scan(n: usize, grid: &Grid, tol: Option<f64>, fmt: Format) -> Out {
    let tol = tol.unwrap_or(TAU_EIG);
    if n < 2 {
        return Err(gme_core::Error::TooFewQubits { got: n, min: 2 }.into());
    }
    let cuts = Partition::all_bipartitions(n);
    let jobs: Vec<(f64, &Partition)> = grid_points(grid)?
        .into_iter()
        .flat_map(|p| cuts.iter().map(move |c| (p, c)))
        .collect();
    let rows: Vec<PptRow> = jobs
        .par_iter()
        .map(|&(p, cut)| {
            let spectrum = separability::pt_spectrum_isotropic(n, p, cut)?;
            let flagged = separability::flagged_pt_eigenvalue(n, p);
            let flagged_gap = spectrum
                .iter()
                .map(|e| (e - flagged).abs())
                .fold(f64::INFINITY, f64::min);
            Ok(PptRow {
                p,
                cut: cut.label(),
                min: spectrum[0],
                flagged,
                flagged_gap,
            })
        })
        .collect::<Result<_, gme_core::Error>>()?;
    let p_crit = separability::ppt_crit(n)?;
    let mut t = Table::new(vec!["N", "p", "cut", "pt_min_eig", "flagged_eigenvalue", "p_crit", "ppt"]);
    let mut bad = Vec::new();
    for r in rows {
        if r.flagged_gap > tol {
            bad.push(format!(
                "p = {}, cut {}: flagged eigenvalue missing from spectrum",
                fmt_float(r.p),
                r.cut
            ));
        }
        t.rows.push(vec![
            Cell::Int(n),
            Cell::Float(r.p),
            Cell::Text(r.cut),
            Cell::Float(r.min),
            Cell::Float(r.flagged),
            Cell::Float(p_crit),
            Cell::Bool(r.min >= -tol),
        ]);
    }
    finish(render_table(&t, fmt), bad)
}

pub fn ppt_scan_state(path: &Path, tol: Option<f64>, fmt: Format) -> Out {
    let tol = tol.unwrap_or(TAU_EIG);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let rho = DensityMatrix::from_json(&text)?;
    if rho.num_subsystems() < 2 {
        return Err(CliError::Config("state needs at least two subsystems".into()));
    }
    let cuts = Partition::all_bipartitions(rho.num_subsystems());
    let mins: Vec<f64> = cuts
        .par_iter()
        .map(|cut| Ok(partial_transpose(&rho, &cut.blocks()[0])?.min_eigenvalue()))
        .collect::<Result<_, gme_core::Error>>()?;
    let mut t = Table::new(vec!["cut", "pt_min_eig", "ppt"]);
    for (cut, min) in cuts.iter().zip(mins) {
        t.rows.push(vec![
            Cell::Text(cut.label()),
            Cell::Float(min),
            Cell::Bool(min >= -tol),
        ]);
    }
    Ok(render_table(&t, fmt))
}

pub fn witness_scan(mode: WitnessMode, x: Option<f64>, grid: &Grid, tol: Option<f64>, fmt: Format) -> Out {
    let tol = tol.unwrap_or(1e-10);
    let points = grid_points(grid)?;
    let rows: Vec<(f64, f64, Option<f64>, f64, f64)> = points
        .par_iter()
        .map(|&y| match mode {
            WitnessMode::Triangle => {
                let x = x.unwrap_or(1.0);
                Ok((
                    x,
                    y,
                    Some(y),
                    boundent::witness_trace_triangle(x, y, y)?,
                    boundent::witness_trace_triangle_dense(x, y, y)?,
                ))
            }
            WitnessMode::Wedge => {
                let x = x.unwrap_or(y);
                Ok((
                    x,
                    y,
                    None,
                    boundent::witness_trace_wedge(x, y)?,
                    boundent::witness_trace_wedge_dense(x, y)?,
                ))
            }
        })
        .collect::<Result<_, gme_core::Error>>()?;
    let mut t = Table::new(vec!["x", "y", "z", "closed_form", "dense_trace", "gme_detected"]);
    let mut bad = Vec::new();
    for (x, y, z, closed, dense) in rows {
        if !((closed - dense).abs() <= tol) {
            bad.push(format!(
                "x = {}, y = {}: closed {closed} vs dense {dense}",
                fmt_float(x),
                fmt_float(y)
            ));
        }
        t.rows.push(vec![
            Cell::Float(x),
            Cell::Float(y),
            z.map_or(Cell::Empty, Cell::Float),
            Cell::Float(closed),
            Cell::Float(dense),
            Cell::Bool(closed < 0.0),
        ]);
    }
    finish(render_table(&t, fmt), bad)
}

pub fn locc_demo(
    probs: &[f64],
    x: f64,
    y: f64,
    z: f64,
    export: Option<&Path>,
    tol: Option<f64>,
    fmt: Format,
) -> Out {
    let tol = tol.unwrap_or(1e-12);
    boundent::check_probabilities(probs)?;
    let p = [probs[0], probs[1], probs[2]];
    let report = boundent::locc_demo(p, x, y, z)?;
    let source = boundent::biseparable_source_state(p[0], p[1], p[2], x, y, z)?;
    let ppt_min = boundent::source_ppt_certificate(&source)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    if let Some(path) = export {
        let outcome = boundent::simulate_locc_triangle(&[source.clone(), source.clone(), source])?;
        std::fs::write(path, outcome.state.to_json())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    let conclusion = if report.gme_detected {
        format!("GME activated: witness = {}", fmt_float(report.witness))
    } else {
        format!("GME not detected: witness = {}", fmt_float(report.witness))
    };
    let text = match fmt {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["source_pt_min_eig"] = json!(ppt_min);
            v["conclusion"] = json!(conclusion);
            render_json(v)
        }
        Format::Csv => format!(
            "source: p = ({}, {}, {}), factor-wise PT minimum across party cuts = {}\n\
             triangle parameters: x = {}, y = {}, z = {}\n\
             success probability: {}\n\
             max deviation from triangle state: {}\n\
             {conclusion}\n",
            fmt_float(p[0]),
            fmt_float(p[1]),
            fmt_float(p[2]),
            fmt_float(ppt_min),
            fmt_float(x),
            fmt_float(y),
            fmt_float(z),
            fmt_float(report.success_probability),
            fmt_float(report.max_deviation_from_triangle),
        ),
    };
    let bad = if report.max_deviation_from_triangle <= tol {
        vec![]
    } else {
        vec![format!(
            "protocol output deviates from the triangle state by {:e}",
            report.max_deviation_from_triangle
        )]
    };
    finish(text, bad)
}
