//! Point sets in objective space and dominance predicates.
//!
//! All objectives are minimized. Callers with maximization objectives negate
//! them before constructing a [`PointSet`].

use serde::{Deserialize, Serialize};

use crate::error::{DomError, Result};

/// An ordered collection of objective vectors of a fixed dimension.
///
/// Construction rejects empty input and non-finite coordinates, and drops
/// exact duplicate vectors (first occurrence kept).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
    m_dim: usize,
    labels: Option<Vec<String>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(points, None)
    }

    /// Like [`PointSet::new`], keeping one label per (surviving) point.
    pub fn with_labels(points: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(DomError::InvalidInput(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        Self::build(points, Some(labels))
    }

    fn build(points: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        if points.is_empty() {
            return Err(DomError::InvalidInput("point set must not be empty".into()));
        }
        let m_dim = points[0].len();
        if m_dim == 0 {
            return Err(DomError::InvalidInput(
                "points must have at least one objective".into(),
            ));
        }
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        let mut kept_labels = labels.as_ref().map(|_| Vec::with_capacity(points.len()));
        for (idx, pt) in points.into_iter().enumerate() {
            if pt.len() != m_dim {
                return Err(DomError::DimensionMismatch(m_dim, pt.len()));
            }
            if let Some(k) = pt.iter().position(|v| !v.is_finite()) {
                return Err(DomError::InvalidInput(format!(
                    "non-finite coordinate {} in point {}",
                    k + 1,
                    idx + 1
                )));
            }
            if kept.iter().any(|seen| seen == &pt) {
                continue; // exact duplicate, first occurrence kept
            }
            if let (Some(ls), Some(src)) = (kept_labels.as_mut(), labels.as_ref()) {
                ls.push(src[idx].clone());
            }
            kept.push(pt);
        }
        Ok(PointSet {
            points: kept,
            m_dim,
            labels: kept_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of objectives M.
    pub fn dim(&self) -> usize {
        self.m_dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Componentwise minimum over all points (the set's ideal point).
    pub fn ideal(&self) -> Vec<f64> {
        let mut ideal = self.points[0].clone();
        for pt in &self.points[1..] {
            for (lo, v) in ideal.iter_mut().zip(pt) {
                *lo = lo.min(*v);
            }
        }
        ideal
    }

    /// Componentwise maximum over all points (the set's nadir-like corner).
    pub fn upper_corner(&self) -> Vec<f64> {
        let mut hi = self.points[0].clone();
        for pt in &self.points[1..] {
            for (up, v) in hi.iter_mut().zip(pt) {
                *up = up.max(*v);
            }
        }
        hi
    }
}

fn check_dims(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(DomError::DimensionMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// Weak dominance: `p` is componentwise less than or equal to `q`.
pub fn weakly_leq(p: &[f64], q: &[f64]) -> Result<bool> {
    check_dims(p, q)?;
    Ok(weak_leq(p, q))
}

pub(crate) fn weak_leq(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a <= b)
}

/// Pareto dominance: weakly dominates with at least one strict objective.
pub fn dominates(p: &[f64], q: &[f64]) -> Result<bool> {
    check_dims(p, q)?;
    Ok(strictly_dominates(p, q))
}

pub(crate) fn strictly_dominates(p: &[f64], q: &[f64]) -> bool {
    weak_leq(p, q) && p.iter().zip(q).any(|(a, b)| a < b)
}

/// Maximal subset of mutually non-dominated points, survivor order preserved.
pub fn nondominated_filter(s: &PointSet) -> PointSet {
    let keep = nondominated_mask(s.points());
    let points = s
        .points()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| p.clone())
        .collect();
    let labels = s.labels().map(|ls| {
        ls.iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(l, _)| l.clone())
            .collect()
    });
    // Survivors are non-empty (a minimum element is never dominated) and
    // already deduplicated, so reconstruction cannot fail.
    match labels {
        Some(ls) => PointSet::with_labels(points, ls).expect("filtered set stays valid"),
        None => PointSet::new(points).expect("filtered set stays valid"),
    }
}

pub(crate) fn nondominated_mask(points: &[Vec<f64>]) -> Vec<bool> {
    points
        .iter()
        .map(|p| !points.iter().any(|other| strictly_dominates(other, p)))
        .collect()
}

/// Result of reducing a pair of sets before a dominance-move computation.
///
/// Dropped Q points fall in two groups: those already weakly dominated by a
/// surviving P point (`zero_cost_covers`) and those only dominated by another
/// surviving Q point (`absorbed_q`); the latter inherit the assignment of
/// their dominator once a solve has run.
#[derive(Debug, Clone)]
pub struct PrefilterOutcome {
    pub p_reduced: Option<PointSet>,
    pub q_reduced: Option<PointSet>,
    /// (original q index, original p index): q is weakly dominated by p.
    pub zero_cost_covers: Vec<(usize, usize)>,
    /// (original q index, original q index of a surviving dominator).
    pub absorbed_q: Vec<(usize, usize)>,
    /// Reduced index -> original index, for P.
    pub p_index_map: Vec<usize>,
    /// Reduced index -> original index, for Q.
    pub q_index_map: Vec<usize>,
}

/// Removes dominated points within each set, then every Q point weakly
/// dominated by a surviving P point. The dominance-move value is unchanged.
pub fn prefilter_pair(p: &PointSet, q: &PointSet) -> Result<PrefilterOutcome> {
    if p.dim() != q.dim() {
        return Err(DomError::DimensionMismatch(p.dim(), q.dim()));
    }
    let p_keep = nondominated_mask(p.points());
    let p_index_map: Vec<usize> = (0..p.len()).filter(|&i| p_keep[i]).collect();
    let p_points: Vec<Vec<f64>> = p_index_map.iter().map(|&i| p.point(i).to_vec()).collect();

    let q_keep_internal = nondominated_mask(q.points());
    let mut q_index_map = Vec::new();
    let mut q_points = Vec::new();
    let mut zero_cost_covers = Vec::new();
    let mut absorbed_q = Vec::new();
    for j in 0..q.len() {
        let cover = p_index_map
            .iter()
            .position(|&orig| weak_leq(p.point(orig), q.point(j)));
        match cover {
            Some(red) => zero_cost_covers.push((j, p_index_map[red])),
            None if q_keep_internal[j] => {
                q_index_map.push(j);
                q_points.push(q.point(j).to_vec());
            }
            None => {
                // Dominated within Q and not coverable by P directly: it will
                // be covered by whichever point covers its dominator.
                let dominator = (0..q.len())
                    .find(|&k| q_keep_internal[k] && strictly_dominates(q.point(k), q.point(j)))
                    .expect("a dominated point has a non-dominated dominator");
                absorbed_q.push((j, dominator));
            }
        }
    }
    // An absorbed point's dominator may itself be covered by P; resolve those
    // to direct zero-cost covers so only solver-dependent cases remain.
    let mut still_absorbed = Vec::new();
    for (j, dominator) in absorbed_q {
        match zero_cost_covers.iter().find(|(qj, _)| *qj == dominator) {
            Some(&(_, pi)) => zero_cost_covers.push((j, pi)),
            None => still_absorbed.push((j, dominator)),
        }
    }
    zero_cost_covers.sort_unstable();

    let p_reduced = Some(PointSet::new(p_points).expect("reduced P stays valid"));
    let q_reduced = if q_points.is_empty() {
        None
    } else {
        Some(PointSet::new(q_points).expect("reduced Q stays valid"))
    };
    Ok(PrefilterOutcome {
        p_reduced,
        q_reduced,
        zero_cost_covers,
        absorbed_q: still_absorbed,
        p_index_map,
        q_index_map,
    })
}

/// A common per-objective shift applied to both sets of a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub offset: Vec<f64>,
}

impl Translation {
    pub fn is_zero(&self) -> bool {
        self.offset.iter().all(|&v| v == 0.0)
    }

    pub fn apply(&self, point: &[f64]) -> Vec<f64> {
        point.iter().zip(&self.offset).map(|(v, o)| v + o).collect()
    }

    pub fn undo(&self, point: &[f64]) -> Vec<f64> {
        point.iter().zip(&self.offset).map(|(v, o)| v - o).collect()
    }
}

/// Shifts both sets by one common offset so every coordinate is >= 0.
///
/// Manhattan moves are translation-invariant, so the dominance move of the
/// shifted pair equals that of the original pair.
pub fn translate_nonnegative(p: &PointSet, q: &PointSet) -> Result<(PointSet, PointSet, Translation)> {
    if p.dim() != q.dim() {
        return Err(DomError::DimensionMismatch(p.dim(), q.dim()));
    }
    let mut offset = vec![0.0; p.dim()];
    for (m, o) in offset.iter_mut().enumerate() {
        let mut lo = f64::INFINITY;
        for pt in p.points().iter().chain(q.points()) {
            lo = lo.min(pt[m]);
        }
        *o = (-lo).max(0.0);
    }
    let translation = Translation { offset };
    let shift = |s: &PointSet| {
        PointSet::new(s.points().iter().map(|pt| translation.apply(pt)).collect())
            .expect("translation preserves validity")
    };
    Ok((shift(p), shift(q), translation))
}

/// Affine map of a list onto [0, 1]; a constant list maps to all zeros.
pub fn minmax_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(DomError::InvalidInput(
            "normalization needs at least two values".into(),
        ));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(DomError::InvalidInput("non-finite value".into()));
    }
    if lo == hi {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(points: &[&[f64]]) -> PointSet {
        PointSet::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn weak_leq_examples() {
        assert!(weakly_leq(&[2.0, 2.0], &[2.2, 2.0]).unwrap());
        assert!(!weakly_leq(&[2.0, 2.5], &[2.2, 2.0]).unwrap());
        let p = [1.5, 0.25, 3.0];
        assert!(weakly_leq(&p, &p).unwrap());
        assert!(matches!(
            weakly_leq(&[1.0], &[1.0, 2.0]),
            Err(DomError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn dominates_examples() {
        assert!(dominates(&[0.0, 0.0], &[1.0, 1.0]).unwrap());
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(!dominates(&[0.0, 1.0], &[1.0, 0.0]).unwrap());
        assert!(!dominates(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
    }

    #[test]
    fn construction_rules() {
        assert!(PointSet::new(vec![]).is_err());
        assert!(PointSet::new(vec![vec![1.0, f64::NAN]]).is_err());
        assert!(PointSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let s = ps(&[&[1.0, 2.0], &[1.0, 2.0], &[3.0, 0.0]]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(0), &[1.0, 2.0]);
    }

    #[test]
    fn filter_drops_dominated() {
        let s = ps(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let f = nondominated_filter(&s);
        assert_eq!(f.points(), &[vec![1.0, 1.0]]);

        let s = ps(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(nondominated_filter(&s), s);
    }

    #[test]
    fn filter_is_idempotent_and_matches_pairwise_scan() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 10.0
        };
        for _ in 0..50 {
            let pts: Vec<Vec<f64>> = (0..6).map(|_| vec![next(), next(), next()]).collect();
            let s = PointSet::new(pts.clone()).unwrap();
            let filtered = nondominated_filter(&s);
            // oracle: O(n^2) pairwise dominance scan
            let expect: Vec<Vec<f64>> = pts
                .iter()
                .filter(|p| !pts.iter().any(|o| strictly_dominates(o, p)))
                .cloned()
                .collect();
            assert_eq!(filtered.points(), &expect[..]);
            assert_eq!(nondominated_filter(&filtered), filtered);
        }
    }

    #[test]
    fn prefilter_full_domination() {
        let p = ps(&[&[0.0, 0.0]]);
        let q = ps(&[&[1.0, 1.0]]);
        let out = prefilter_pair(&p, &q).unwrap();
        assert!(out.q_reduced.is_none());
        assert_eq!(out.zero_cost_covers, vec![(0, 0)]);
        assert!(out.absorbed_q.is_empty());
    }

    #[test]
    fn prefilter_keeps_incomparable_pair() {
        // Figure-style instance: no dominance across the sets.
        let p = ps(&[&[2.0, 2.5], &[3.0, 1.9]]);
        let q = ps(&[&[2.2, 2.0], &[3.0, 1.5]]);
        let out = prefilter_pair(&p, &q).unwrap();
        assert_eq!(out.p_reduced.as_ref().unwrap(), &p);
        assert_eq!(out.q_reduced.as_ref().unwrap(), &q);
        assert!(out.zero_cost_covers.is_empty());
    }

    #[test]
    fn prefilter_accounts_for_every_dropped_q() {
        // q2 dominated by q1 but by no p: it must be absorbed, not covered.
        let p = ps(&[&[5.0, 5.0]]);
        let q = ps(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let out = prefilter_pair(&p, &q).unwrap();
        assert_eq!(out.q_reduced.as_ref().unwrap().len(), 1);
        assert!(out.zero_cost_covers.is_empty());
        assert_eq!(out.absorbed_q, vec![(1, 0)]);
    }

    #[test]
    fn translate_examples() {
        let p = ps(&[&[1.0, 2.0]]);
        let q = ps(&[&[0.5, 3.0]]);
        let (_, _, t) = translate_nonnegative(&p, &q).unwrap();
        assert_eq!(t.offset, vec![0.0, 0.0]);

        let p = ps(&[&[-1.0, 2.0]]);
        let q = ps(&[&[0.0, -3.0]]);
        let (tp, tq, t) = translate_nonnegative(&p, &q).unwrap();
        assert_eq!(t.offset, vec![1.0, 3.0]);
        assert!(tp.points().iter().chain(tq.points()).flatten().all(|&v| v >= 0.0));
        assert_eq!(t.undo(tp.point(0)), vec![-1.0, 2.0]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(minmax_normalize(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_normalize(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(minmax_normalize(&[0.312, 11.139]).unwrap(), vec![0.0, 1.0]);
        assert!(minmax_normalize(&[1.0]).is_err());
    }
}
