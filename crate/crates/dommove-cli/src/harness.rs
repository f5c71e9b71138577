//! Report, correlation and running-indicator machinery behind the CLI verbs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use dommove::indicators::{
    additive_epsilon, hypervolume, igd_plus, pearson, CorrelationResult, IndicatorRow,
};
use dommove::point::nondominated_filter;
use dommove::solver::{dom, SolveOptions};
use dommove::{DomError, PointSet, Result};

/// A ranked comparison of algorithm result sets against their joint
/// non-dominated reference front.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub problem: String,
    /// Sorted ascending by dominance move; ties broken by label.
    pub rows: Vec<IndicatorRow>,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub backend: String,
    pub gap_target: f64,
    pub reference_size: usize,
    pub hv_reference: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_seconds: Option<Vec<f64>>,
}

/// Builds a [`ReportDocument`] from labelled algorithm sets. The reference
/// front is the non-dominated filter of the union of every set, and the
/// hypervolume reference point is the componentwise maximum over the union
/// unless one is supplied.
pub fn build_report(
    problem: &str,
    algorithms: &[(String, PointSet)],
    opts: &SolveOptions,
    backend_label: &str,
    hv_ref: Option<Vec<f64>>,
    keep_timings: bool,
) -> Result<ReportDocument> {
    if algorithms.len() < 2 {
        return Err(DomError::InvalidInput(format!(
            "a report needs at least 2 algorithm sets, found {}",
            algorithms.len()
        )));
    }
    let dim = algorithms[0].1.dim();
    for (label, set) in algorithms {
        if set.dim() != dim {
            return Err(DomError::InvalidInput(format!(
                "algorithm {label:?} has {} objectives, expected {dim}",
                set.dim()
            )));
        }
    }
    let union: Vec<Vec<f64>> = algorithms
        .iter()
        .flat_map(|(_, s)| s.points().iter().cloned())
        .collect();
    let union = PointSet::new(union)?;
    let joint = nondominated_filter(&union);
    let hv_reference = match hv_ref {
        Some(r) => {
            if r.len() != dim {
                return Err(DomError::DimensionMismatch(dim, r.len()));
            }
            r
        }
        None => union.upper_corner(),
    };

    let mut rows = Vec::new();
    let mut seconds = Vec::new();
    for (label, set) in algorithms {
        let started = Instant::now();
        let solution = dom(set, &joint, opts)?;
        seconds.push(started.elapsed().as_secs_f64());
        rows.push(IndicatorRow {
            algorithm: label.clone(),
            dom_value: solution.value,
            hv_value: hypervolume(set, &hv_reference)?,
            igd_plus_value: igd_plus(set, &joint)?,
            eps_additive_value: additive_epsilon(set, &joint)?,
        });
    }
    rows.sort_by(|a, b| {
        a.dom_value
            .total_cmp(&b.dom_value)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });
    Ok(ReportDocument {
        problem: problem.to_string(),
        rows,
        metadata: ReportMetadata {
            backend: backend_label.to_string(),
            gap_target: opts.relative_gap_target,
            reference_size: joint.len(),
            hv_reference,
            solve_seconds: keep_timings.then_some(seconds),
        },
    })
}

/// One correlation cell: a result, or the reason it could not be computed.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CorrelationCell {
    Ok(CorrelationResult),
    Error { error: String },
}

impl CorrelationCell {
    fn from(result: Result<CorrelationResult>) -> Self {
        match result {
            Ok(r) => CorrelationCell::Ok(r),
            Err(e) => CorrelationCell::Error {
                error: e.to_string(),
            },
        }
    }

    pub fn result(&self) -> Option<&CorrelationResult> {
        match self {
            CorrelationCell::Ok(r) => Some(r),
            CorrelationCell::Error { .. } => None,
        }
    }
}

/// Dominance move correlated against negated hypervolume, IGD+ and the
/// additive epsilon indicator.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub problem: String,
    pub n: usize,
    pub neg_hv: CorrelationCell,
    pub igd_plus: CorrelationCell,
    pub eps_additive: CorrelationCell,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub alpha: f64,
    pub problems: Vec<CorrelationRow>,
    pub combined: CorrelationRow,
}

struct NormalizedColumns {
    dom: Vec<f64>,
    neg_hv: Vec<f64>,
    igd: Vec<f64>,
    eps: Vec<f64>,
}

fn normalize_columns(rows: &[IndicatorRow]) -> Result<NormalizedColumns> {
    let dom: Vec<f64> = rows.iter().map(|r| r.dom_value).collect();
    let neg_hv: Vec<f64> = rows.iter().map(|r| -r.hv_value).collect();
    let igd: Vec<f64> = rows.iter().map(|r| r.igd_plus_value).collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps_additive_value).collect();
    Ok(NormalizedColumns {
        dom: dommove::minmax_normalize(&dom)?,
        neg_hv: dommove::minmax_normalize(&neg_hv)?,
        igd: dommove::minmax_normalize(&igd)?,
        eps: dommove::minmax_normalize(&eps)?,
    })
}

fn correlation_row(problem: &str, cols: &NormalizedColumns) -> CorrelationRow {
    CorrelationRow {
        problem: problem.to_string(),
        n: cols.dom.len(),
        neg_hv: CorrelationCell::from(pearson(&cols.dom, &cols.neg_hv)),
        igd_plus: CorrelationCell::from(pearson(&cols.dom, &cols.igd)),
        eps_additive: CorrelationCell::from(pearson(&cols.dom, &cols.eps)),
    }
}

/// Correlates the dominance move with the companion indicators, per problem
/// and pooled. Values are min-max normalized per problem before pooling, and
/// hypervolume is negated so that lower is better for every column.
pub fn correlate_reports(reports: &[ReportDocument]) -> Result<CorrelationReport> {
    let total: usize = reports.iter().map(|d| d.rows.len()).sum();
    if total < 3 {
        return Err(DomError::InvalidInput(format!(
            "correlation needs at least 3 rows in total, found {total}"
        )));
    }
    let mut problems = Vec::new();
    let mut pooled = NormalizedColumns {
        dom: Vec::new(),
        neg_hv: Vec::new(),
        igd: Vec::new(),
        eps: Vec::new(),
    };
    for doc in reports {
        let cols = normalize_columns(&doc.rows)?;
        problems.push(correlation_row(&doc.problem, &cols));
        pooled.dom.extend(&cols.dom);
        pooled.neg_hv.extend(&cols.neg_hv);
        pooled.igd.extend(&cols.igd);
        pooled.eps.extend(&cols.eps);
    }
    let combined = correlation_row("combined", &pooled);
    Ok(CorrelationReport {
        alpha: 0.05,
        problems,
        combined,
    })
}

/// Ordered per-generation snapshots plus the pivots they are scored against.
#[derive(Debug, Clone)]
pub struct RunSeries {
    pub generations: Vec<(u64, PointSet)>,
    pub pivots: Vec<u64>,
    pub reference: Option<PointSet>,
}

impl RunSeries {
    pub fn new(
        mut generations: Vec<(u64, PointSet)>,
        pivots: Vec<u64>,
        reference: Option<PointSet>,
    ) -> Result<Self> {
        if generations.is_empty() {
            return Err(DomError::InvalidInput("no generation files found".into()));
        }
        generations.sort_by_key(|(g, _)| *g);
        if generations.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(DomError::InvalidInput(
                "duplicate generation numbers in the series".into(),
            ));
        }
        for pivot in &pivots {
            if !generations.iter().any(|(g, _)| g == pivot) {
                return Err(DomError::InvalidInput(format!(
                    "pivot generation {pivot} has no generation file"
                )));
            }
        }
        Ok(RunSeries {
            generations,
            pivots,
            reference,
        })
    }
}

/// One cell of the running-indicator matrix.
#[derive(Debug, Clone, Serialize)]
pub struct RunningCell {
    pub generation: u64,
    pub pivot: String,
    pub value: f64,
}

/// Scores every generation against each pivot's non-dominated archive (and
/// the terminal reference set, when given). The cell at `t == pivot` is zero
/// by construction.
pub fn running_matrix(series: &RunSeries, opts: &SolveOptions) -> Result<Vec<RunningCell>> {
    let mut pivot_sets: Vec<(String, PointSet)> = Vec::new();
    let pivots = if series.pivots.is_empty() {
        series.generations.iter().map(|(g, _)| *g).collect()
    } else {
        series.pivots.clone()
    };
    for pivot in &pivots {
        let set = &series
            .generations
            .iter()
            .find(|(g, _)| g == pivot)
            .expect("pivot existence checked on construction")
            .1;
        pivot_sets.push((pivot.to_string(), nondominated_filter(set)));
    }
    if let Some(reference) = &series.reference {
        pivot_sets.push(("reference".into(), nondominated_filter(reference)));
    }
    let mut cells = Vec::new();
    for (generation, set) in &series.generations {
        for (label, pivot_set) in &pivot_sets {
            let value = dom(set, pivot_set, opts)?.value;
            cells.push(RunningCell {
                generation: *generation,
                pivot: label.clone(),
                value,
            });
        }
    }
    Ok(cells)
}

/// Extracts the generation number from a file name as its last digit run,
/// e.g. `gen_010.csv` -> 10.
pub fn generation_number(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let mut digits: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, c) in stem.char_indices() {
        if c.is_ascii_digit() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            digits = Some((s, i));
        }
    }
    if let Some(s) = start {
        digits = Some((s, stem.len()));
    }
    let (s, e) = digits?;
    stem[s..e].parse().ok()
}

/// All CSV files of a directory, sorted by file name.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(DomError::InvalidInput(format!(
            "no .csv files in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Renders rows as an aligned text table.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let render = |cells: Vec<String>, out: &mut String| {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    render(header.iter().map(|s| s.to_string()).collect(), &mut out);
    render(widths.iter().map(|w| "-".repeat(*w)).collect(), &mut out);
    for row in rows {
        render(row.clone(), &mut out);
    }
    out
}

/// Assignments of q indices to p indices as a JSON-friendly map.
pub fn assignment_json(map: &BTreeMap<usize, usize>) -> serde_json::Value {
    serde_json::Value::Object(
        map.iter()
            .map(|(q, p)| (q.to_string(), serde_json::json!(p)))
            .collect(),
    )
}
