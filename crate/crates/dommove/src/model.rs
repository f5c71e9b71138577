//! Mixed-integer model of the dominance move between two point sets, plus
//! size accounting and deterministic LP-format emission.
//!
//! For nonnegative, mutually prefiltered sets P and Q the model minimizes the
//! total Manhattan movement `sum zp + sum zpq` subject to the activation and
//! assignment structure over the binaries `xp`, `xpq` and `xpqd`. Variable
//! names are a stable contract: `zp_{i}_{m}`, `zpq_{i}_{j}_{m}`,
//! `phat_{i}_{m}`, `xp_{i}`, `xpq_{i}_{j}`, `xpqd_{i}_{j}_{m}` and its
//! complement `xpqdn_{i}_{j}_{m}`, all 1-based.

use std::fmt::Write as FmtWrite;
use std::io::Write;

use crate::error::{DomError, Result};
use crate::io::fmt_f64;
use crate::point::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// A model variable with its bounds. Binary variables are bounded {0,1}.
#[derive(Debug, Clone)]
pub struct ModelVariable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// One linear row. Terms reference variables by index into the owning model.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(f64, u32)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Variable, binary-variable and constraint counts of a model of the given
/// dimensions: `(2+nq)(np*m)` continuous variables, `np(1 + nq(1+2m))`
/// binaries and `nq + np(1+3m) + (np*nq)(3+4m)` constraints.
pub fn model_size(np: usize, nq: usize, m: usize) -> Result<(u64, u64, u64)> {
    if np == 0 || nq == 0 || m == 0 {
        return Err(DomError::InvalidInput(
            "model size requires all counts >= 1".into(),
        ));
    }
    let (np, nq, m) = (np as u64, nq as u64, m as u64);
    let continuous = (2 + nq) * (np * m);
    let binary = np * (1 + nq * (1 + 2 * m));
    let constraints = nq + np * (1 + 3 * m) + (np * nq) * (3 + 4 * m);
    Ok((continuous, binary, constraints))
}

/// The symbolic MIP instance for a prefiltered nonnegative pair (P, Q).
#[derive(Debug, Clone)]
pub struct DomMipModel {
    variables: Vec<ModelVariable>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(f64, u32)>,
    np: usize,
    nq: usize,
    m: usize,
    zp: Vec<u32>,
    zpq: Vec<u32>,
    phat: Vec<u32>,
    xp: Vec<u32>,
    xpq: Vec<u32>,
    xpqd: Vec<u32>,
    xpqdn: Vec<u32>,
    big_m: Vec<f64>,
    lp_bound: Vec<f64>,
    up_bound: Vec<f64>,
}

impl DomMipModel {
    pub fn np(&self) -> usize {
        self.np
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn variables(&self) -> &[ModelVariable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(f64, u32)] {
        &self.objective
    }

    pub fn var_index(&self, name: &str) -> Option<u32> {
        self.variables.iter().position(|v| v.name == name).map(|i| i as u32)
    }

    pub fn zp_var(&self, i: usize, m: usize) -> u32 {
        self.zp[i * self.m + m]
    }

    pub fn zpq_var(&self, i: usize, j: usize, m: usize) -> u32 {
        self.zpq[(i * self.nq + j) * self.m + m]
    }

    pub fn phat_var(&self, i: usize, m: usize) -> u32 {
        self.phat[i * self.m + m]
    }

    pub fn xp_var(&self, i: usize) -> u32 {
        self.xp[i]
    }

    pub fn xpq_var(&self, i: usize, j: usize) -> u32 {
        self.xpq[i * self.nq + j]
    }

    pub fn xpqd_var(&self, i: usize, j: usize, m: usize) -> u32 {
        self.xpqd[(i * self.nq + j) * self.m + m]
    }

    pub fn xpqd_complement_var(&self, i: usize, j: usize, m: usize) -> u32 {
        self.xpqdn[(i * self.nq + j) * self.m + m]
    }

    pub fn big_m(&self, i: usize, j: usize, m: usize) -> f64 {
        self.big_m[(i * self.nq + j) * self.m + m]
    }

    pub fn lower_phat(&self, i: usize, m: usize) -> f64 {
        self.lp_bound[i * self.m + m]
    }

    pub fn upper_phat(&self, i: usize, m: usize) -> f64 {
        self.up_bound[i * self.m + m]
    }

    pub fn continuous_count(&self) -> u64 {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Continuous)
            .count() as u64
    }

    pub fn binary_count(&self) -> u64 {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count() as u64
    }

    /// Constraint count, including the z-variable nonnegativity constraints
    /// that are carried as variable lower bounds rather than explicit rows.
    pub fn constraint_count(&self) -> u64 {
        let nonneg = (self.np * self.m + self.np * self.nq * self.m) as u64;
        self.constraints.len() as u64 + nonneg
    }

    /// Evaluates every row and bound at `values` (indexed by variable) and
    /// returns a description of each violation beyond `tol`.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if values.len() != self.variables.len() {
            out.push(format!(
                "valuation covers {} of {} variables",
                values.len(),
                self.variables.len()
            ));
            return out;
        }
        for (idx, var) in self.variables.iter().enumerate() {
            let v = values[idx];
            if v < var.lower - tol || v > var.upper + tol {
                out.push(format!(
                    "{} = {} outside [{}, {}]",
                    var.name, v, var.lower, var.upper
                ));
            }
            if var.kind == VarKind::Binary && (v - v.round()).abs() > tol {
                out.push(format!("{} = {} not integral", var.name, v));
            }
        }
        for row in &self.constraints {
            let lhs: f64 = row.terms.iter().map(|&(c, x)| c * values[x as usize]).sum();
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + tol,
                Sense::Ge => lhs >= row.rhs - tol,
                Sense::Eq => (lhs - row.rhs).abs() <= tol,
            };
            if !ok {
                out.push(format!(
                    "{}: lhs {} violates {} {}",
                    row.name,
                    lhs,
                    row.sense.symbol(),
                    row.rhs
                ));
            }
        }
        out
    }

    /// Objective value of a valuation.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(c, x)| c * values[x as usize]).sum()
    }
}

/// Builds the MIP instance for a nonnegative pair. The sets are expected to
/// be mutually prefiltered; the model stays valid (merely larger) otherwise.
pub fn build_model(p: &PointSet, q: &PointSet) -> Result<DomMipModel> {
    if p.dim() != q.dim() {
        return Err(DomError::DimensionMismatch(p.dim(), q.dim()));
    }
    for (set, name) in [(p, "P"), (q, "Q")] {
        if set.is_empty() {
            return Err(DomError::InvalidInput(format!("{name} is empty")));
        }
        if set.points().iter().flatten().any(|&v| v < 0.0) {
            return Err(DomError::InvalidInput(format!(
                "{name} has a negative coordinate; translate the pair first"
            )));
        }
    }
    let (np, nq, m) = (p.len(), q.len(), p.dim());

    // Bounds and activation constants.
    let mut lp_bound = vec![0.0; np * m];
    let mut up_bound = vec![0.0; np * m];
    let mut big_m = vec![0.0; np * nq * m];
    let mut q_min = vec![f64::INFINITY; m];
    for qj in q.points() {
        for (k, v) in qj.iter().enumerate() {
            q_min[k] = q_min[k].min(*v);
        }
    }
    for i in 0..np {
        for k in 0..m {
            let pv = p.point(i)[k];
            lp_bound[i * m + k] = pv.min(q_min[k]);
            up_bound[i * m + k] = pv;
            for j in 0..nq {
                big_m[(i * nq + j) * m + k] = (pv - q.point(j)[k]).max(0.0);
            }
        }
    }

    let mut b = ModelBuilder::default();
    let zp: Vec<u32> = iter_im(np, m)
        .map(|(i, k)| b.continuous(format!("zp_{}_{}", i + 1, k + 1), 0.0, f64::INFINITY))
        .collect();
    let zpq: Vec<u32> = iter_ijm(np, nq, m)
        .map(|(i, j, k)| {
            b.continuous(format!("zpq_{}_{}_{}", i + 1, j + 1, k + 1), 0.0, f64::INFINITY)
        })
        .collect();
    let phat: Vec<u32> = iter_im(np, m)
        .map(|(i, k)| {
            b.continuous(
                format!("phat_{}_{}", i + 1, k + 1),
                lp_bound[i * m + k],
                up_bound[i * m + k],
            )
        })
        .collect();
    let xp: Vec<u32> = (0..np).map(|i| b.binary(format!("xp_{}", i + 1))).collect();
    let xpq: Vec<u32> = iter_ij(np, nq)
        .map(|(i, j)| b.binary(format!("xpq_{}_{}", i + 1, j + 1)))
        .collect();
    let xpqd: Vec<u32> = iter_ijm(np, nq, m)
        .map(|(i, j, k)| b.binary(format!("xpqd_{}_{}_{}", i + 1, j + 1, k + 1)))
        .collect();
    // The complement of xpqd. The deactivation row carries the expanded
    // (1 - xpqd) algebra directly, which leaves the complement inert, but it
    // is part of the model's published variable inventory.
    let xpqdn: Vec<u32> = iter_ijm(np, nq, m)
        .map(|(i, j, k)| b.binary(format!("xpqdn_{}_{}_{}", i + 1, j + 1, k + 1)))
        .collect();

    let objective: Vec<(f64, u32)> = zp.iter().chain(zpq.iter()).map(|&x| (1.0, x)).collect();

    // zp rows: zp >= p*xp - phat and zp <= p*xp (zp >= 0 lives in the bound).
    for (i, k) in iter_im(np, m) {
        let pv = p.point(i)[k];
        b.row(
            format!("zp_floor_{}_{}", i + 1, k + 1),
            vec![(1.0, zp[i * m + k]), (1.0, phat[i * m + k]), (-pv, xp[i])],
            Sense::Ge,
            0.0,
        );
        b.row(
            format!("zp_cap_{}_{}", i + 1, k + 1),
            vec![(1.0, zp[i * m + k]), (-pv, xp[i])],
            Sense::Le,
            0.0,
        );
    }

    // zpq rows: activation floor, deactivated cap, activated cap.
    for (i, j, k) in iter_ijm(np, nq, m) {
        let pv = p.point(i)[k];
        let qv = q.point(j)[k];
        let mm = big_m[(i * nq + j) * m + k];
        let z = zpq[(i * nq + j) * m + k];
        // zpq >= phat - q - p(1 - xpq)
        b.row(
            format!("zpq_floor_{}_{}_{}", i + 1, j + 1, k + 1),
            vec![(1.0, z), (-1.0, phat[i * m + k]), (-pv, xpq[i * nq + j])],
            Sense::Ge,
            -qv - pv,
        );
        // zpq <= phat - q + (M - lp + q)(1 - xpqd); the constant is the
        // smallest M - (lp - q) style value that makes the row vacuous when
        // xpqd = 0, since phat - q can reach lp - q from below.
        let slack = mm - lp_bound[i * m + k] + qv;
        b.row(
            format!("zpq_cap_off_{}_{}_{}", i + 1, j + 1, k + 1),
            vec![
                (1.0, z),
                (-1.0, phat[i * m + k]),
                (slack, xpqd[(i * nq + j) * m + k]),
            ],
            Sense::Le,
            -qv + slack,
        );
        // zpq <= M * xpqd
        b.row(
            format!("zpq_cap_on_{}_{}_{}", i + 1, j + 1, k + 1),
            vec![(1.0, z), (-mm, xpqd[(i * nq + j) * m + k])],
            Sense::Le,
            0.0,
        );
    }

    // Linking: xp_i >= xpq_ij for all j, then xp_i <= sum_j xpq_ij.
    for (i, j) in iter_ij(np, nq) {
        b.row(
            format!("link_{}_{}", i + 1, j + 1),
            vec![(1.0, xp[i]), (-1.0, xpq[i * nq + j])],
            Sense::Ge,
            0.0,
        );
    }
    for i in 0..np {
        let mut terms = vec![(1.0, xp[i])];
        terms.extend((0..nq).map(|j| (-1.0, xpq[i * nq + j])));
        b.row(format!("activity_{}", i + 1), terms, Sense::Le, 0.0);
    }

    // Assignment: each q belongs to exactly one p.
    for j in 0..nq {
        let terms = (0..np).map(|i| (1.0, xpq[i * nq + j])).collect();
        b.row(format!("assign_{}", j + 1), terms, Sense::Eq, 1.0);
    }

    // Domain rows for the assignment binaries.
    for (i, j) in iter_ij(np, nq) {
        b.row(
            format!("xpq_dom_lo_{}_{}", i + 1, j + 1),
            vec![(1.0, xpq[i * nq + j])],
            Sense::Ge,
            0.0,
        );
        b.row(
            format!("xpq_dom_hi_{}_{}", i + 1, j + 1),
            vec![(1.0, xpq[i * nq + j])],
            Sense::Le,
            1.0,
        );
    }

    Ok(DomMipModel {
        variables: b.variables,
        constraints: b.constraints,
        objective,
        np,
        nq,
        m,
        zp,
        zpq,
        phat,
        xp,
        xpq,
        xpqd,
        xpqdn,
        big_m,
        lp_bound,
        up_bound,
    })
}

fn iter_im(np: usize, m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..np).flat_map(move |i| (0..m).map(move |k| (i, k)))
}

fn iter_ij(np: usize, nq: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..np).flat_map(move |i| (0..nq).map(move |j| (i, j)))
}

fn iter_ijm(np: usize, nq: usize, m: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..np).flat_map(move |i| (0..nq).flat_map(move |j| (0..m).map(move |k| (i, j, k))))
}

#[derive(Default)]
struct ModelBuilder {
    variables: Vec<ModelVariable>,
    constraints: Vec<LinearConstraint>,
}

impl ModelBuilder {
    fn continuous(&mut self, name: String, lower: f64, upper: f64) -> u32 {
        self.variables.push(ModelVariable {
            name,
            kind: VarKind::Continuous,
            lower,
            upper,
        });
        (self.variables.len() - 1) as u32
    }

    fn binary(&mut self, name: String) -> u32 {
        self.variables.push(ModelVariable {
            name,
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
        });
        (self.variables.len() - 1) as u32
    }

    fn row(&mut self, name: String, terms: Vec<(f64, u32)>, sense: Sense, rhs: f64) {
        self.constraints.push(LinearConstraint {
            name,
            terms,
            sense,
            rhs,
        });
    }
}

fn write_terms(out: &mut String, model: &DomMipModel, terms: &[(f64, u32)]) {
    for (pos, &(coef, var)) in terms.iter().enumerate() {
        let name = &model.variables[var as usize].name;
        let mag = coef.abs();
        if pos == 0 {
            if coef < 0.0 {
                out.push_str("- ");
            }
        } else if coef < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag != 1.0 {
            let _ = write!(out, "{} ", fmt_f64(mag));
        }
        out.push_str(name);
    }
}

/// Writes the model as deterministic CPLEX-LP-style text. Identical models
/// produce byte-identical output.
pub fn emit_lp(model: &DomMipModel, mut sink: impl Write) -> Result<()> {
    let mut line = String::new();

    sink.write_all(b"Minimize\n obj:")?;
    for (pos, &(coef, var)) in model.objective.iter().enumerate() {
        line.clear();
        if pos == 0 {
            line.push(' ');
        } else if pos % 8 == 0 {
            line.push_str("\n   + ");
        } else {
            line.push_str(" + ");
        }
        if coef != 1.0 {
            let _ = write!(line, "{} ", fmt_f64(coef));
        }
        line.push_str(&model.variables[var as usize].name);
        sink.write_all(line.as_bytes())?;
    }
    sink.write_all(b"\nSubject To\n")?;

    for row in &model.constraints {
        line.clear();
        let _ = write!(line, " {}: ", row.name);
        write_terms(&mut line, model, &row.terms);
        let _ = write!(line, " {} {}\n", row.sense.symbol(), fmt_f64(row.rhs));
        sink.write_all(line.as_bytes())?;
    }

    sink.write_all(b"Bounds\n")?;
    for var in &model.variables {
        if var.kind != VarKind::Continuous {
            continue;
        }
        line.clear();
        if var.upper.is_finite() {
            let _ = write!(
                line,
                " {} <= {} <= {}\n",
                fmt_f64(var.lower),
                var.name,
                fmt_f64(var.upper)
            );
        } else {
            let _ = write!(line, " {} >= {}\n", var.name, fmt_f64(var.lower));
        }
        sink.write_all(line.as_bytes())?;
    }

    sink.write_all(b"Binaries\n")?;
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    for chunk in binaries.chunks(10) {
        line.clear();
        line.push(' ');
        line.push_str(&chunk.join(" "));
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    sink.write_all(b"End\n")?;
    Ok(())
}
