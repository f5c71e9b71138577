//! Dominance-move solvers: the subset-DP oracle, the external MIP backend
//! with solution reconstruction, and the shared solve pipeline.

use std::collections::{BTreeMap, HashMap};
use std::io::Write as _;
use std::process::Command;

use serde::Serialize;

use crate::error::{DomError, Result};
use crate::exact2d;
use crate::model::{build_model, emit_lp, DomMipModel, VarKind};
use crate::point::{prefilter_pair, translate_nonnegative, PointSet, Translation};

/// Which engine computes the dominance move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ExactDp,
    Exact2d,
    External,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub backend: Backend,
    /// Relative optimality gap at which a solve may stop.
    pub relative_gap_target: f64,
    /// Wall-clock budget in seconds for the external solver.
    pub time_limit: Option<f64>,
    /// Command template with `{lp_file}`, `{sol_file}`, `{gap}` and
    /// `{time_limit}` placeholders.
    pub external_command: Option<String>,
    /// Largest |Q| the subset DP accepts.
    pub dp_size_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            backend: Backend::ExactDp,
            relative_gap_target: 1e-8,
            time_limit: None,
            external_command: None,
            dp_size_limit: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    WithinGap,
    TimeLimit,
    InfeasibleError,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::WithinGap => "within-gap",
            SolveStatus::TimeLimit => "time-limit",
            SolveStatus::InfeasibleError => "infeasible-error",
        }
    }

    /// True when the incumbent is proven optimal or within the gap target.
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::WithinGap)
    }
}

/// Movement totals split the way the MIP splits them: a first stage per
/// point and objective, and a covering stage per point, target and objective.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MoveBreakdown {
    pub zp: Vec<((usize, usize), f64)>,
    pub zpq: Vec<((usize, usize, usize), f64)>,
}

impl MoveBreakdown {
    pub fn total(&self) -> f64 {
        self.zp.iter().map(|(_, v)| v).sum::<f64>()
            + self.zpq.iter().map(|(_, v)| v).sum::<f64>()
    }
}

/// A dominance-move result in the caller's index space.
#[derive(Debug, Clone, Serialize)]
pub struct DomSolution {
    /// Incumbent dominance move (total Manhattan movement, >= 0).
    pub value: f64,
    /// Proven lower bound on the optimum (== value for exact backends).
    pub best_bound: f64,
    /// (value - best_bound) / max(value, 1e-12).
    pub gap: f64,
    pub status: SolveStatus,
    /// Q index -> index of the P point whose moved image covers it.
    pub assignment: BTreeMap<usize, usize>,
    /// Moved set P' in the original frame, aligned with the input P.
    pub moved_points: Vec<Vec<f64>>,
    /// How many points of P' differ from their originals.
    pub changed_points: usize,
    pub decomposition: MoveBreakdown,
}

/// Cheapest point that weakly dominates every member of `subset` while
/// staying componentwise at or below `p`: the componentwise minimum of `p`
/// and the subset, at Manhattan cost `sum_m (p_m - p'_m)`.
pub fn cover_cost(p: &[f64], subset: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    if subset.is_empty() {
        return Err(DomError::InvalidInput(
            "cover requires a non-empty subset".into(),
        ));
    }
    let mut p_prime = p.to_vec();
    for q in subset {
        if q.len() != p.len() {
            return Err(DomError::DimensionMismatch(p.len(), q.len()));
        }
        for (t, v) in p_prime.iter_mut().zip(q.iter()) {
            *t = t.min(*v);
        }
    }
    let cost = p.iter().zip(&p_prime).map(|(a, b)| a - b).sum();
    Ok((cost, p_prime))
}

/// Exact dominance move by dynamic programming over subsets of Q.
///
/// `g(k, S)` is the cheapest way for the first `k` points of P to cover the
/// subset `S` of Q, each point covering one (possibly empty) group. Runs in
/// `O(|P| 3^|Q|)`; refuses when |Q| exceeds `dp_size_limit`.
pub fn solve_dp_exact(p: &PointSet, q: &PointSet, dp_size_limit: usize) -> Result<DomSolution> {
    if p.dim() != q.dim() {
        return Err(DomError::DimensionMismatch(p.dim(), q.dim()));
    }
    let nq = q.len();
    if nq > dp_size_limit {
        return Err(DomError::DpSizeLimit {
            size: nq,
            limit: dp_size_limit,
        });
    }
    let np = p.len();
    let m = p.dim();
    let n_masks = 1usize << nq;
    let full = n_masks - 1;

    // Componentwise minima per subset, built from each subset's lowest bit.
    let mut ideal = vec![0.0f64; n_masks * m];
    for mask in 1..n_masks {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        for k in 0..m {
            let v = q.point(low)[k];
            ideal[mask * m + k] = if rest == 0 {
                v
            } else {
                v.min(ideal[rest * m + k])
            };
        }
    }
    let cover_of = |i: usize, mask: usize| -> f64 {
        let mut c = 0.0;
        for k in 0..m {
            c += (p.point(i)[k] - ideal[mask * m + k]).max(0.0);
        }
        c
    };

    // suffix[k][S]: cheapest cover of S using points k..np (1-based layers).
    let inf = f64::INFINITY;
    let mut suffix = vec![vec![inf; n_masks]; np + 1];
    suffix[np][0] = 0.0;
    for k in (0..np).rev() {
        for mask in 0..n_masks {
            let mut best = suffix[k + 1][mask]; // this point covers nothing
            let mut sub = mask;
            while sub != 0 {
                let rest = suffix[k + 1][mask ^ sub];
                if rest < inf {
                    let cand = cover_of(k, sub) + rest;
                    if cand < best {
                        best = cand;
                    }
                }
                sub = (sub - 1) & mask;
            }
            suffix[k][mask] = best;
        }
    }

    // Forward backtrack; ties prefer assigning low q indices to low p
    // indices, which keeps golden outputs stable.
    let prefers = |a: usize, b: usize| -> bool {
        let d = a ^ b;
        if d == 0 {
            return false;
        }
        let low = d & d.wrapping_neg();
        a & low != 0
    };
    let mut groups: Vec<usize> = vec![0; np];
    let mut remaining = full;
    for k in 0..np {
        let mut best_cost = suffix[k + 1][remaining];
        let mut best_sub = 0usize;
        let mut sub = remaining;
        while sub != 0 {
            let rest = suffix[k + 1][remaining ^ sub];
            if rest < inf {
                let cand = cover_of(k, sub) + rest;
                if cand < best_cost - 1e-15 {
                    best_cost = cand;
                    best_sub = sub;
                } else if cand <= best_cost + 1e-15 && prefers(sub, best_sub) {
                    best_cost = best_cost.min(cand);
                    best_sub = sub;
                }
            }
            sub = (sub - 1) & remaining;
        }
        groups[k] = best_sub;
        remaining ^= best_sub;
    }
    debug_assert_eq!(remaining, 0);

    let mut assignment = BTreeMap::new();
    let mut moved: Vec<Vec<f64>> = p.points().to_vec();
    let mut zp = Vec::new();
    let mut value = 0.0;
    for (i, &mask) in groups.iter().enumerate() {
        if mask == 0 {
            continue;
        }
        let members: Vec<&[f64]> = (0..nq).filter(|j| mask >> j & 1 == 1).map(|j| q.point(j)).collect();
        let (cost, p_prime) = cover_cost(p.point(i), &members)?;
        for j in 0..nq {
            if mask >> j & 1 == 1 {
                assignment.insert(j, i);
            }
        }
        for k in 0..m {
            let delta = p.point(i)[k] - p_prime[k];
            if delta > 0.0 {
                zp.push(((i, k), delta));
            }
        }
        value += cost;
        moved[i] = p_prime;
    }
    let changed_points = moved
        .iter()
        .zip(p.points())
        .filter(|(a, b)| a != b)
        .count();
    Ok(DomSolution {
        value,
        best_bound: value,
        gap: 0.0,
        status: SolveStatus::Optimal,
        assignment,
        moved_points: moved,
        changed_points,
        decomposition: MoveBreakdown { zp, zpq: Vec::new() },
    })
}

/// Raw outcome of an external solve: a valuation indexed like the model's
/// variables, the reported objective and an optional proven bound.
#[derive(Debug, Clone)]
pub struct ExternalOutcome {
    pub values: Vec<f64>,
    pub objective: f64,
    pub bound: Option<f64>,
}

/// Writes the model to a temporary LP file, runs the configured command and
/// parses the solution file it produces.
pub fn solve_external(model: &DomMipModel, opts: &SolveOptions) -> Result<ExternalOutcome> {
    let template = opts.external_command.as_deref().ok_or_else(|| {
        DomError::Backend("external backend requires a solver command template".into())
    })?;
    let dir = tempfile::tempdir()?;
    let lp_path = dir.path().join("model.lp");
    let sol_path = dir.path().join("model.sol");
    {
        let file = std::fs::File::create(&lp_path)?;
        let mut writer = std::io::BufWriter::new(file);
        emit_lp(model, &mut writer)?;
        writer.flush()?;
    }

    let time_limit = opts.time_limit.map(|t| t.to_string()).unwrap_or_else(|| "0".into());
    let rendered = template
        .replace("{lp_file}", &lp_path.display().to_string())
        .replace("{sol_file}", &sol_path.display().to_string())
        .replace("{gap}", &opts.relative_gap_target.to_string())
        .replace("{time_limit}", &time_limit);
    let mut parts = rendered.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| DomError::Backend("empty solver command".into()))?;
    let output = Command::new(program)
        .args(parts)
        .output()
        .map_err(|e| DomError::Backend(format!("cannot run {program}: {e}")))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(DomError::Backend(format!(
            "solver exited with {}: {}",
            output.status,
            stderr.trim()
        )));
    }
    let text = std::fs::read_to_string(&sol_path).map_err(|e| {
        DomError::Backend(format!("missing solution file {}: {e}", sol_path.display()))
    })?;
    parse_solution_file(&text, model)
}

/// Parses `objective`/`bound` lines followed by `name value` pairs.
/// Unknown variable names are rejected; absent variables default to zero.
pub fn parse_solution_file(text: &str, model: &DomMipModel) -> Result<ExternalOutcome> {
    let index: HashMap<&str, usize> = model
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut values = vec![0.0; model.variables().len()];
    let mut objective = None;
    let mut bound = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        let value: f64 = it
            .next()
            .ok_or_else(|| DomError::Backend(format!("missing value after {key:?}")))?
            .parse()
            .map_err(|_| DomError::Backend(format!("unparseable value in line {line:?}")))?;
        if it.next().is_some() {
            return Err(DomError::Backend(format!("trailing tokens in line {line:?}")));
        }
        match key {
            "objective" => objective = Some(value),
            "bound" => bound = Some(value),
            name => match index.get(name) {
                Some(&i) => values[i] = value,
                None => {
                    return Err(DomError::Backend(format!(
                        "unknown variable {name:?} in solution file"
                    )))
                }
            },
        }
    }
    let objective =
        objective.ok_or_else(|| DomError::Backend("solution file has no objective line".into()))?;
    Ok(ExternalOutcome {
        values,
        objective,
        bound,
    })
}

/// Turns a solver valuation into a verified [`DomSolution`] over the
/// (translated) pair the model was built from, then shifts the moved points
/// back into the original frame.
///
/// The value is recomputed from the moved points rather than taken from the
/// solver objective, and the two are cross-checked.
pub fn reconstruct_solution(
    model: &DomMipModel,
    values: &[f64],
    p: &PointSet,
    q: &PointSet,
    translation: &Translation,
) -> Result<DomSolution> {
    if values.len() != model.variables().len() {
        return Err(DomError::Reconstruction(format!(
            "valuation covers {} of {} variables",
            values.len(),
            model.variables().len()
        )));
    }
    for (idx, var) in model.variables().iter().enumerate() {
        if var.kind == VarKind::Binary {
            let v = values[idx];
            if (v - v.round()).abs() > 1e-4 || !(v > -1e-4 && v < 1.0 + 1e-4) {
                return Err(DomError::Reconstruction(format!(
                    "binary {} = {v} is not within 1e-4 of {{0,1}}",
                    var.name
                )));
            }
        }
    }
    let (np, nq, m) = (model.np(), model.nq(), model.dim());
    let active = |i: usize, j: usize| values[model.xpq_var(i, j) as usize].round() == 1.0;

    let mut assignment = BTreeMap::new();
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); np];
    for j in 0..nq {
        let owners: Vec<usize> = (0..np).filter(|&i| active(i, j)).collect();
        if owners.len() != 1 {
            return Err(DomError::Reconstruction(format!(
                "q {} is assigned to {} points, expected exactly 1",
                j + 1,
                owners.len()
            )));
        }
        assignment.insert(j, owners[0]);
        clusters[owners[0]].push(j);
    }

    let mut moved: Vec<Vec<f64>> = p.points().to_vec();
    let mut value = 0.0;
    for (i, members) in clusters.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        for k in 0..m {
            let phat = values[model.phat_var(i, k) as usize];
            let covering: f64 = members
                .iter()
                .map(|&j| values[model.zpq_var(i, j, k) as usize])
                .sum();
            let lo = model.lower_phat(i, k);
            let hi = phat.min(p.point(i)[k]).max(lo);
            let mut coord = (phat - covering).max(lo).min(hi);
            // Given the assignment, the optimal image sits at the
            // componentwise minimum; absorb solver round-off onto it.
            let min_q = members
                .iter()
                .map(|&j| q.point(j)[k])
                .fold(f64::INFINITY, f64::min);
            let target = min_q.min(p.point(i)[k]);
            if (coord - target).abs() <= 1e-6 * (1.0 + target.abs()) {
                coord = target;
            }
            if coord > min_q + 1e-9 * (1.0 + min_q.abs()) {
                return Err(DomError::Reconstruction(format!(
                    "moved point {} does not weakly dominate its targets in objective {} ({} > {})",
                    i + 1,
                    k + 1,
                    coord,
                    min_q
                )));
            }
            moved[i][k] = coord.min(min_q);
            value += p.point(i)[k] - moved[i][k];
        }
    }
    let objective = model.objective_value(values);
    if (value - objective).abs() > 1e-5 * (1.0 + value.abs()) {
        return Err(DomError::Reconstruction(format!(
            "recomputed movement {value} disagrees with solver objective {objective}"
        )));
    }

    let mut zp = Vec::new();
    for i in 0..np {
        for k in 0..m {
            let v = values[model.zp_var(i, k) as usize];
            if v > 1e-12 {
                zp.push(((i, k), v));
            }
        }
    }
    let mut zpq = Vec::new();
    for i in 0..np {
        for j in 0..nq {
            for k in 0..m {
                let v = values[model.zpq_var(i, j, k) as usize];
                if v > 1e-12 {
                    zpq.push(((i, j, k), v));
                }
            }
        }
    }

    let changed_points = moved
        .iter()
        .zip(p.points())
        .filter(|(a, b)| a != b)
        .count();
    let moved_points = moved.iter().map(|pt| translation.undo(pt)).collect();
    Ok(DomSolution {
        value,
        best_bound: value,
        gap: 0.0,
        status: SolveStatus::Optimal,
        assignment,
        moved_points,
        changed_points,
        decomposition: MoveBreakdown { zp, zpq },
    })
}

/// Computes the dominance move of `p` towards `q`.
///
/// Pipeline: prefilter the pair, translate to nonnegative coordinates,
/// dispatch to the selected backend, translate back and merge the points
/// removed by the prefilter into the assignment. When the prefilter leaves
/// no Q point, the value is zero and no solver runs.
pub fn dom(p: &PointSet, q: &PointSet, opts: &SolveOptions) -> Result<DomSolution> {
    if p.dim() != q.dim() {
        return Err(DomError::DimensionMismatch(p.dim(), q.dim()));
    }
    let pre = prefilter_pair(p, q)?;
    let p_red = pre.p_reduced.as_ref().expect("P never empties");

    let mut assignment: BTreeMap<usize, usize> = pre.zero_cost_covers.iter().cloned().collect();
    let q_red = match pre.q_reduced.as_ref() {
        None => {
            return Ok(DomSolution {
                value: 0.0,
                best_bound: 0.0,
                gap: 0.0,
                status: SolveStatus::Optimal,
                assignment,
                moved_points: p.points().to_vec(),
                changed_points: 0,
                decomposition: MoveBreakdown::default(),
            });
        }
        Some(q_red) => q_red,
    };

    let (p_t, q_t, translation) = translate_nonnegative(p_red, q_red)?;
    let inner = match opts.backend {
        Backend::ExactDp => solve_dp_exact(&p_t, &q_t, opts.dp_size_limit)?,
        Backend::Exact2d => exact2d::dom_2d(&p_t, &q_t)?,
        Backend::External => {
            let model = build_model(&p_t, &q_t)?;
            let outcome = solve_external(&model, opts)?;
            let mut sol = reconstruct_solution(&model, &outcome.values, &p_t, &q_t, &translation)?;
            let bound = outcome
                .bound
                .unwrap_or(sol.value)
                .min(sol.value)
                .max(0.0);
            sol.best_bound = bound;
            sol.gap = ((sol.value - bound) / sol.value.max(1e-12)).max(0.0);
            sol.status = if sol.gap <= 1e-9 {
                SolveStatus::Optimal
            } else if sol.gap <= opts.relative_gap_target * (1.0 + 1e-6) + 1e-12 {
                SolveStatus::WithinGap
            } else {
                SolveStatus::TimeLimit
            };
            sol
        }
    };

    // Exact backends worked on translated coordinates; shift their moved
    // points back. The external path already untranslated inside
    // reconstruction.
    let moved_reduced: Vec<Vec<f64>> = match opts.backend {
        Backend::External => inner.moved_points.clone(),
        _ => inner
            .moved_points
            .iter()
            .map(|pt| translation.undo(pt))
            .collect(),
    };

    let mut moved_points: Vec<Vec<f64>> = p.points().to_vec();
    let mut changed_points = 0;
    for (red_i, pt) in moved_reduced.into_iter().enumerate() {
        let orig = pre.p_index_map[red_i];
        if pt != moved_points[orig] {
            changed_points += 1;
        }
        moved_points[orig] = pt;
    }
    for (red_j, &red_i) in &inner.assignment {
        assignment.insert(pre.q_index_map[*red_j], pre.p_index_map[red_i]);
    }
    for &(orig_q, dominator_q) in &pre.absorbed_q {
        let covering = *assignment
            .get(&dominator_q)
            .expect("dominator survives prefiltering");
        assignment.insert(orig_q, covering);
    }
    let decomposition = MoveBreakdown {
        zp: inner
            .decomposition
            .zp
            .iter()
            .map(|&((i, k), v)| ((pre.p_index_map[i], k), v))
            .collect(),
        zpq: inner
            .decomposition
            .zpq
            .iter()
            .map(|&((i, j, k), v)| ((pre.p_index_map[i], pre.q_index_map[j], k), v))
            .collect(),
    };

    Ok(DomSolution {
        value: inner.value,
        best_bound: inner.best_bound,
        gap: inner.gap,
        status: inner.status,
        assignment,
        moved_points,
        changed_points,
        decomposition,
    })
}
