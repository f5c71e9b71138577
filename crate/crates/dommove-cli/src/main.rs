//! Command-line harness around the dominance-move library: pairwise
//! computations, ranked indicator reports, correlation tables, running
//! indicator matrices and LP-model emission.

mod harness;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dommove::io::read_point_set;
use dommove::model::{build_model, emit_lp, model_size};
use dommove::point::{prefilter_pair, translate_nonnegative};
use dommove::solver::{dom, Backend, SolveOptions};
use dommove::{DomError, Result};

use harness::{
    assignment_json, build_report, correlate_reports, csv_files, generation_number, render_table,
    running_matrix, CorrelationCell, ReportDocument, RunSeries,
};

#[derive(Parser)]
#[command(name = "dommove", version, about = "Dominance-move quality indicator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args)]
struct GlobalOpts {
    /// Solver backend
    #[arg(long, global = true, value_enum, default_value_t = BackendChoice::Auto)]
    backend: BackendChoice,
    /// Relative optimality gap target
    #[arg(long, global = true, default_value_t = 1e-8)]
    gap: f64,
    /// Time limit in seconds for the external solver
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// External solver command template with {lp_file}, {sol_file}, {gap}
    /// and {time_limit} placeholders (falls back to $DOM_EXTERNAL_CMD)
    #[arg(long, global = true)]
    external_cmd: Option<String>,
    /// Largest |Q| the exact subset DP accepts
    #[arg(long, global = true, default_value_t = 20)]
    dp_limit: usize,
    /// Hypervolume reference point as comma-separated values
    #[arg(long, global = true)]
    hv_ref: Option<String>,
    /// Reproducible output: omit timings from reports
    #[arg(long, global = true)]
    deterministic: bool,
    /// Write the machine-readable JSON document to this path
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Auto,
    ExactDp,
    Exact2d,
    External,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the dominance move of set P towards set Q
    Compute {
        p_file: PathBuf,
        q_file: PathBuf,
        /// Write the MIP model to this path instead of solving
        #[arg(long, value_name = "PATH")]
        emit_lp: Option<PathBuf>,
    },
    /// Rank the algorithm CSVs of a directory against their joint front
    Report {
        /// Directory with one CSV point set per algorithm
        dir: PathBuf,
    },
    /// Correlate dominance move with -HV, IGD+ and additive epsilon
    Correlate {
        /// Report JSON documents produced by `report --json`
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Score per-generation archives against pivot generations
    Running {
        /// Directory of generation CSVs named with their generation number
        dir: PathBuf,
        /// Pivot generations (default: every generation)
        #[arg(long, value_delimiter = ',')]
        pivots: Vec<u64>,
        /// Terminal reference set scored as an extra pivot column
        #[arg(long, value_name = "CSV")]
        reference: Option<PathBuf>,
        /// Write the long-format CSV here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Write the MIP model for a pair of point sets
    EmitLp {
        p_file: PathBuf,
        q_file: PathBuf,
        #[arg(short, long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Print model dimensions for the given set sizes
    Size { np: usize, nq: usize, m: usize },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &DomError) -> u8 {
    match err {
        DomError::DimensionMismatch(..)
        | DomError::InvalidInput(_)
        | DomError::Csv { .. }
        | DomError::DpSizeLimit { .. }
        | DomError::UnsupportedDimension(_) => 2,
        DomError::Backend(_) | DomError::Io(_) => 3,
        DomError::Reconstruction(_) => 4,
    }
}

impl GlobalOpts {
    fn external_command(&self) -> Option<String> {
        self.external_cmd
            .clone()
            .or_else(|| std::env::var("DOM_EXTERNAL_CMD").ok())
    }

    fn hv_reference(&self) -> Result<Option<Vec<f64>>> {
        match &self.hv_ref {
            None => Ok(None),
            Some(text) => text
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| DomError::InvalidInput(format!("bad --hv-ref value {tok:?}")))
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Pins a concrete backend: the bi-objective algorithm for M = 2, the
    /// subset DP while |Q| fits, the external solver otherwise.
    fn resolve_backend(&self, m_dim: usize, q_len: usize) -> Result<Backend> {
        let resolved = match self.backend {
            BackendChoice::ExactDp => Backend::ExactDp,
            BackendChoice::Exact2d => Backend::Exact2d,
            BackendChoice::External => Backend::External,
            BackendChoice::Auto => {
                if m_dim == 2 {
                    Backend::Exact2d
                } else if q_len <= self.dp_limit {
                    Backend::ExactDp
                } else if self.external_command().is_some() {
                    Backend::External
                } else {
                    return Err(DomError::Backend(format!(
                        "|Q| = {q_len} exceeds --dp-limit {} and no external solver is \
                         configured; set --external-cmd or DOM_EXTERNAL_CMD",
                        self.dp_limit
                    )));
                }
            }
        };
        Ok(resolved)
    }

    fn solve_options(&self, backend: Backend) -> SolveOptions {
        SolveOptions {
            backend,
            relative_gap_target: self.gap,
            time_limit: self.time_limit,
            external_command: self.external_command(),
            dp_size_limit: self.dp_limit,
        }
    }

    fn write_json(&self, value: &serde_json::Value) -> Result<()> {
        if let Some(path) = &self.json {
            let mut text = serde_json::to_string_pretty(value)
                .map_err(|e| DomError::InvalidInput(e.to_string()))?;
            text.push('\n');
            std::fs::write(path, text)?;
        }
        Ok(())
    }
}

fn backend_label(backend: Backend) -> &'static str {
    match backend {
        Backend::ExactDp => "exact-dp",
        Backend::Exact2d => "exact-2d",
        Backend::External => "external",
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Compute {
            p_file,
            q_file,
            emit_lp,
        } => cmd_compute(&cli.global, &p_file, &q_file, emit_lp.as_deref()),
        Cmd::Report { dir } => cmd_report(&cli.global, &dir),
        Cmd::Correlate { reports } => cmd_correlate(&cli.global, &reports),
        Cmd::Running {
            dir,
            pivots,
            reference,
            out,
        } => cmd_running(&cli.global, &dir, pivots, reference.as_deref(), out.as_deref()),
        Cmd::EmitLp { p_file, q_file, out } => {
            write_model(&p_file, &q_file, &out)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Size { np, nq, m } => cmd_size(&cli.global, np, nq, m),
    }
}

fn write_model(p_file: &Path, q_file: &Path, out: &Path) -> Result<()> {
    let p = read_point_set(p_file)?;
    let q = read_point_set(q_file)?;
    let pre = prefilter_pair(&p, &q)?;
    let p_red = pre.p_reduced.as_ref().expect("P never empties");
    let q_red = pre.q_reduced.as_ref().ok_or_else(|| {
        DomError::InvalidInput(
            "P already weakly dominates Q; the dominance move is 0 and the model is empty".into(),
        )
    })?;
    let (p_t, q_t, _) = translate_nonnegative(p_red, q_red)?;
    let model = build_model(&p_t, &q_t)?;
    let file = std::fs::File::create(out)?;
    emit_lp(&model, std::io::BufWriter::new(file))?;
    Ok(())
}

fn cmd_compute(
    global: &GlobalOpts,
    p_file: &Path,
    q_file: &Path,
    emit: Option<&Path>,
) -> Result<ExitCode> {
    if let Some(path) = emit {
        write_model(p_file, q_file, path)?;
        println!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    }
    let p = read_point_set(p_file)?;
    let q = read_point_set(q_file)?;
    let backend = global.resolve_backend(p.dim().max(q.dim()), q.len())?;
    let opts = global.solve_options(backend);
    let started = Instant::now();
    let solution = dom(&p, &q, &opts)?;
    let seconds = started.elapsed().as_secs_f64();

    println!("value: {}", solution.value);
    println!("status: {}", solution.status.as_str());
    println!("best bound: {}", solution.best_bound);
    println!("gap: {}", solution.gap);
    println!("changed points: {} of {}", solution.changed_points, p.len());
    println!("backend: {}", backend_label(backend));
    if !global.deterministic {
        println!("time: {seconds:.4} s");
    }

    let mut doc = json!({
        "command": "compute",
        "p_file": p_file.display().to_string(),
        "q_file": q_file.display().to_string(),
        "backend": backend_label(backend),
        "gap_target": opts.relative_gap_target,
        "value": solution.value,
        "best_bound": solution.best_bound,
        "gap": solution.gap,
        "status": solution.status.as_str(),
        "changed_points": solution.changed_points,
        "assignment": assignment_json(&solution.assignment),
        "moved_points": solution.moved_points,
        "decomposition": serde_json::to_value(&solution.decomposition)
            .map_err(|e| DomError::InvalidInput(e.to_string()))?,
    });
    if !global.deterministic {
        doc["solve_seconds"] = json!(seconds);
    }
    global.write_json(&doc)?;

    Ok(if solution.status.is_success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn trimmed(v: f64) -> String {
    let text = format!("{v:.6}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text.is_empty() || text == "-" {
        "0".into()
    } else {
        text.to_string()
    }
}

fn cmd_report(global: &GlobalOpts, dir: &Path) -> Result<ExitCode> {
    let files = csv_files(dir)?;
    let mut algorithms = Vec::new();
    for file in &files {
        let label = file
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("unnamed")
            .to_string();
        algorithms.push((label, read_point_set(file)?));
    }
    let dim = algorithms[0].1.dim();
    // size the backend choice by the worst-case reference: the union
    let union_len: usize = algorithms.iter().map(|(_, s)| s.len()).sum();
    let backend = global.resolve_backend(dim, union_len)?;
    let opts = global.solve_options(backend);
    let problem = dir
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("report")
        .to_string();
    let doc = build_report(
        &problem,
        &algorithms,
        &opts,
        backend_label(backend),
        global.hv_reference()?,
        !global.deterministic,
    )?;

    println!("problem: {}", doc.problem);
    println!(
        "reference front: {} points; hv reference: [{}]",
        doc.metadata.reference_size,
        doc.metadata
            .hv_reference
            .iter()
            .map(|v| trimmed(*v))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let rows: Vec<Vec<String>> = doc
        .rows
        .iter()
        .map(|r| {
            vec![
                r.algorithm.clone(),
                trimmed(r.dom_value),
                trimmed(r.hv_value),
                trimmed(r.igd_plus_value),
                trimmed(r.eps_additive_value),
            ]
        })
        .collect();
    print!(
        "{}",
        render_table(&["algorithm", "dom", "hv", "igd+", "eps"], &rows)
    );

    let value = serde_json::to_value(&doc).map_err(|e| DomError::InvalidInput(e.to_string()))?;
    global.write_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn cell_text(cell: &CorrelationCell) -> String {
    match cell.result() {
        Some(r) => format!(
            "{:.3}{}",
            r.r,
            if r.significant { "" } else { "*" }
        ),
        None => "-".into(),
    }
}

fn cmd_correlate(global: &GlobalOpts, files: &[PathBuf]) -> Result<ExitCode> {
    let mut docs = Vec::new();
    for file in files {
        let text = std::fs::read_to_string(file)?;
        let doc: ReportDocument = serde_json::from_str(&text).map_err(|e| {
            DomError::InvalidInput(format!("{} is not a report document: {e}", file.display()))
        })?;
        docs.push(doc);
    }
    let report = correlate_reports(&docs)?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for row in report.problems.iter().chain(std::iter::once(&report.combined)) {
        rows.push(vec![
            row.problem.clone(),
            row.n.to_string(),
            cell_text(&row.neg_hv),
            cell_text(&row.igd_plus),
            cell_text(&row.eps_additive),
        ]);
    }
    print!(
        "{}",
        render_table(&["problem", "n", "-hv", "igd+", "eps"], &rows)
    );
    println!("* not significant at alpha = {}", report.alpha);

    let value = serde_json::to_value(&report).map_err(|e| DomError::InvalidInput(e.to_string()))?;
    global.write_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_running(
    global: &GlobalOpts,
    dir: &Path,
    pivots: Vec<u64>,
    reference: Option<&Path>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let mut generations = Vec::new();
    for file in csv_files(dir)? {
        let number = generation_number(&file).ok_or_else(|| {
            DomError::InvalidInput(format!(
                "cannot read a generation number from {}",
                file.display()
            ))
        })?;
        generations.push((number, read_point_set(&file)?));
    }
    let reference = reference.map(read_point_set).transpose()?;
    let series = RunSeries::new(generations, pivots, reference)?;

    let dim = series.generations[0].1.dim();
    let max_q = series.generations.iter().map(|(_, s)| s.len()).max().unwrap_or(1);
    let backend = global.resolve_backend(dim, max_q)?;
    let opts = global.solve_options(backend);
    let cells = running_matrix(&series, &opts)?;

    let mut csv = String::from("generation,pivot,value\n");
    for cell in &cells {
        csv.push_str(&format!("{},{},{}\n", cell.generation, cell.pivot, cell.value));
    }
    match out {
        Some(path) => std::fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    let value = json!({ "command": "running", "cells": cells });
    global.write_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_size(global: &GlobalOpts, np: usize, nq: usize, m: usize) -> Result<ExitCode> {
    let (continuous, binary, constraints) = model_size(np, nq, m)?;
    println!("continuous variables: {continuous}");
    println!("binary variables: {binary}");
    println!("constraints: {constraints}");
    let value = json!({
        "command": "size",
        "np": np,
        "nq": nq,
        "m": m,
        "continuous_variables": continuous,
        "binary_variables": binary,
        "constraints": constraints,
    });
    global.write_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hv_ref_parsing() {
        let g = GlobalOpts {
            backend: BackendChoice::Auto,
            gap: 1e-8,
            time_limit: None,
            external_cmd: None,
            dp_limit: 20,
            hv_ref: Some("1.0, 2.5,3".into()),
            deterministic: false,
            json: None,
        };
        assert_eq!(g.hv_reference().unwrap(), Some(vec![1.0, 2.5, 3.0]));
        let bad = GlobalOpts {
            hv_ref: Some("1.0,x".into()),
            ..g
        };
        assert!(bad.hv_reference().is_err());
    }

    #[test]
    fn backend_resolution_rules() {
        let g = GlobalOpts {
            backend: BackendChoice::Auto,
            gap: 1e-8,
            time_limit: None,
            external_cmd: None,
            dp_limit: 10,
            hv_ref: None,
            deterministic: false,
            json: None,
        };
        assert_eq!(g.resolve_backend(2, 50).unwrap(), Backend::Exact2d);
        assert_eq!(g.resolve_backend(3, 5).unwrap(), Backend::ExactDp);
        assert!(g.resolve_backend(3, 50).is_err());
        let with_cmd = GlobalOpts {
            external_cmd: Some("solver {lp_file} {sol_file}".into()),
            ..g
        };
        assert_eq!(with_cmd.resolve_backend(3, 50).unwrap(), Backend::External);
    }

    #[test]
    fn trimmed_numbers() {
        assert_eq!(trimmed(0.5), "0.5");
        assert_eq!(trimmed(1.0), "1");
        assert_eq!(trimmed(0.0000001), "0");
    }
}
