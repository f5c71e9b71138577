//! Exact bi-objective dominance move via inward-neighbor clustering.
//!
//! Every Q point starts as its own subset. Each round computes the inward
//! neighbor of every subset representative over R = P plus the other
//! representatives; two representatives that are each other's inward
//! neighbor form a loop and collapse into their ideal point. Once no loop
//! remains, every subset reaches a P point through its neighbor chain, and
//! that point covers the subset's members.

use std::collections::BTreeMap;

use crate::error::{DomError, Result};
use crate::point::{prefilter_pair, PointSet};
use crate::solver::{cover_cost, DomSolution, MoveBreakdown, SolveStatus};

/// Dominance-move distance: the Manhattan length of the move that takes `b`
/// onto a point weakly dominating `a`. Zero iff `b` already weakly
/// dominates `a`.
pub fn move_distance(b: &[f64], a: &[f64]) -> f64 {
    debug_assert_eq!(b.len(), a.len());
    b.iter().zip(a).map(|(x, y)| (x - y).max(0.0)).sum()
}

/// Index of the member of `r` with the smallest dominance-move distance to
/// `a`; ties go to the lowest index. The caller excludes `a` itself from `r`.
pub fn inward_neighbor(a: &[f64], r: &PointSet) -> Result<usize> {
    if a.len() != r.dim() {
        return Err(DomError::DimensionMismatch(a.len(), r.dim()));
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, candidate) in r.points().iter().enumerate() {
        let d = move_distance(candidate, a);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(best)
}

#[derive(Clone)]
struct Cluster {
    /// Indices into the reduced Q.
    members: Vec<usize>,
    /// Ideal point of the members.
    rep: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Neighbor {
    Point(usize),
    Rep(usize),
}

/// Exact dominance move for two-objective sets.
pub fn dom_2d(p: &PointSet, q: &PointSet) -> Result<DomSolution> {
    if p.dim() != 2 {
        return Err(DomError::UnsupportedDimension(p.dim()));
    }
    if q.dim() != 2 {
        return Err(DomError::UnsupportedDimension(q.dim()));
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
            })
        }
        Some(q_red) => q_red,
    };

    let mut clusters: Vec<Cluster> = (0..q_red.len())
        .map(|j| Cluster {
            members: vec![j],
            rep: q_red.point(j).to_vec(),
        })
        .collect();

    let mut rounds = 0usize;
    let owners: Vec<usize> = loop {
        rounds += 1;
        assert!(
            rounds <= q_red.len().max(1),
            "inward-neighbor collapse exceeded |Q| iterations"
        );
        // R is the P points followed by the other representatives; scanning
        // P first realizes the lowest-index tie rule.
        let neighbors: Vec<Neighbor> = clusters
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let mut best = Neighbor::Point(0);
                let mut best_d = f64::INFINITY;
                for (pi, pp) in p_red.points().iter().enumerate() {
                    let d = move_distance(pp, &c.rep);
                    if d < best_d {
                        best_d = d;
                        best = Neighbor::Point(pi);
                    }
                }
                for (cj, other) in clusters.iter().enumerate() {
                    if cj == ci {
                        continue;
                    }
                    let d = move_distance(&other.rep, &c.rep);
                    if d < best_d {
                        best_d = d;
                        best = Neighbor::Rep(cj);
                    }
                }
                best
            })
            .collect();

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for ci in 0..clusters.len() {
            if let Neighbor::Rep(cj) = neighbors[ci] {
                if cj > ci && neighbors[cj] == Neighbor::Rep(ci) {
                    pairs.push((ci, cj));
                }
            }
        }

        if pairs.is_empty() {
            match chase_chains(&clusters, &neighbors) {
                Ok(owners) => break owners,
                // a longer cycle: collapse one of its edges and go round again
                Err(edge) => pairs.push(edge),
            }
        }

        // Collapse loops into their ideal solutions; removing higher indices
        // first keeps the pair indices valid.
        pairs.sort_by_key(|&(_, cj)| std::cmp::Reverse(cj));
        for (ci, cj) in pairs {
            let other = clusters.remove(cj);
            let target = &mut clusters[ci];
            target.members.extend(other.members);
            target.members.sort_unstable();
            for (t, v) in target.rep.iter_mut().zip(&other.rep) {
                *t = t.min(*v);
            }
        }
    };

    // Sum the cluster costs per covering point; chained subsets that share a
    // point are covered jointly.
    let mut coverage: Vec<Vec<usize>> = vec![Vec::new(); p_red.len()];
    for (c, &owner) in clusters.iter().zip(&owners) {
        coverage[owner].extend(c.members.iter().copied());
    }
    let mut value = 0.0;
    let mut moved: Vec<Vec<f64>> = p.points().to_vec();
    let mut changed_points = 0;
    let mut zp = Vec::new();
    for (pi, members) in coverage.iter_mut().enumerate() {
        if members.is_empty() {
            continue;
        }
        members.sort_unstable();
        let targets: Vec<&[f64]> = members.iter().map(|&j| q_red.point(j)).collect();
        let (cost, p_prime) = cover_cost(p_red.point(pi), &targets)?;
        value += cost;
        let orig_p = pre.p_index_map[pi];
        for k in 0..2 {
            let delta = p_red.point(pi)[k] - p_prime[k];
            if delta > 0.0 {
                zp.push(((orig_p, k), delta));
            }
        }
        if p_prime != moved[orig_p] {
            changed_points += 1;
        }
        moved[orig_p] = p_prime;
        for &j in members.iter() {
            assignment.insert(pre.q_index_map[j], orig_p);
        }
    }
    for &(orig_q, dominator_q) in &pre.absorbed_q {
        let covering = *assignment
            .get(&dominator_q)
            .expect("dominator survives prefiltering");
        assignment.insert(orig_q, covering);
    }
    zp.sort_by_key(|&((i, k), _)| (i, k));

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

/// Follows each cluster's neighbor chain to the P point that covers it.
/// Returns an edge of an unexpected representative cycle if one shows up.
fn chase_chains(
    clusters: &[Cluster],
    neighbors: &[Neighbor],
) -> std::result::Result<Vec<usize>, (usize, usize)> {
    let mut owner: Vec<Option<usize>> = vec![None; clusters.len()];
    for start in 0..clusters.len() {
        if owner[start].is_some() {
            continue;
        }
        let mut trail = vec![start];
        let found = loop {
            match neighbors[*trail.last().unwrap()] {
                Neighbor::Point(pi) => break pi,
                Neighbor::Rep(cj) => {
                    if let Some(pi) = owner[cj] {
                        break pi;
                    }
                    if let Some(pos) = trail.iter().position(|&x| x == cj) {
                        let a = trail[pos];
                        let b = trail[(pos + 1).min(trail.len() - 1)];
                        return Err((a.min(b), a.max(b)));
                    }
                    trail.push(cj);
                }
            }
        };
        for c in trail {
            owner[c] = Some(found);
        }
    }
    Ok(owner.into_iter().map(|o| o.unwrap()).collect())
}
