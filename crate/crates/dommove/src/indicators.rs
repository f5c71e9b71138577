//! Companion quality indicators: additive epsilon, IGD+, exact hypervolume
//! and Pearson correlation with a two-sided significance test.

use serde::{Deserialize, Serialize};

use crate::error::{DomError, Result};
use crate::point::{weak_leq, PointSet};

/// One algorithm's row in a ranked comparison table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub algorithm: String,
    pub dom_value: f64,
    pub hv_value: f64,
    pub igd_plus_value: f64,
    pub eps_additive_value: f64,
}

/// Additive epsilon indicator: the smallest shift that makes some point of P
/// weakly dominate each point of Q, maximized over Q.
pub fn additive_epsilon(p: &PointSet, q: &PointSet) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(DomError::DimensionMismatch(p.dim(), q.dim()));
    }
    let mut worst = f64::NEG_INFINITY;
    for qj in q.points() {
        let mut best = f64::INFINITY;
        for pi in p.points() {
            let needed = pi
                .iter()
                .zip(qj)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(needed);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Inverted generational distance plus: mean over the reference set of the
/// dominance-aware distance to the nearest member of `a`.
pub fn igd_plus(a: &PointSet, reference: &PointSet) -> Result<f64> {
    if a.dim() != reference.dim() {
        return Err(DomError::DimensionMismatch(a.dim(), reference.dim()));
    }
    let total: f64 = reference
        .points()
        .iter()
        .map(|r| {
            a.points()
                .iter()
                .map(|pt| {
                    pt.iter()
                        .zip(r)
                        .map(|(x, y)| (x - y).max(0.0).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference.len() as f64)
}

const HV_MAX_DIM: usize = 10;
const HV_MAX_POINTS: usize = 100;

/// Exact hypervolume dominated by `s` within the box below `ref_point`,
/// by exclusive-volume recursion. Points not below the reference point are
/// discarded. Refuses instances beyond M = 10 or n = 100, where the
/// worst-case exponential cost becomes unreasonable.
pub fn hypervolume(s: &PointSet, ref_point: &[f64]) -> Result<f64> {
    if s.dim() != ref_point.len() {
        return Err(DomError::DimensionMismatch(s.dim(), ref_point.len()));
    }
    if s.dim() > HV_MAX_DIM || s.len() > HV_MAX_POINTS {
        return Err(DomError::InvalidInput(format!(
            "exact hypervolume is limited to M <= {HV_MAX_DIM} and n <= {HV_MAX_POINTS}"
        )));
    }
    let pts: Vec<Vec<f64>> = s
        .points()
        .iter()
        .filter(|p| weak_leq(p, ref_point))
        .cloned()
        .collect();
    Ok(hv_recursive(pts, ref_point))
}

fn hv_recursive(mut pts: Vec<Vec<f64>>, ref_point: &[f64]) -> f64 {
    match pts.len() {
        0 => 0.0,
        1 => box_volume(&pts[0], ref_point),
        _ => {
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
            (0..pts.len())
                .map(|i| exclusive_volume(&pts[i], &pts[i + 1..], ref_point))
                .sum()
        }
    }
}

/// Volume dominated by `pt` alone, minus what the remaining points also
/// dominate inside pt's box.
fn exclusive_volume(pt: &[f64], rest: &[Vec<f64>], ref_point: &[f64]) -> f64 {
    let limited: Vec<Vec<f64>> = rest
        .iter()
        .map(|other| {
            pt.iter()
                .zip(other)
                .map(|(a, b)| a.max(*b))
                .collect::<Vec<f64>>()
        })
        .collect();
    // weakly dominated boxes add nothing to the union; keep the first of
    // exact duplicates
    let mut keep: Vec<Vec<f64>> = Vec::new();
    'candidates: for (i, cand) in limited.iter().enumerate() {
        for (k, other) in limited.iter().enumerate() {
            if k != i && weak_leq(other, cand) && (other != cand || k < i) {
                continue 'candidates;
            }
        }
        keep.push(cand.clone());
    }
    box_volume(pt, ref_point) - hv_recursive(keep, ref_point)
}

fn box_volume(pt: &[f64], ref_point: &[f64]) -> f64 {
    pt.iter().zip(ref_point).map(|(a, r)| r - a).product()
}

/// Pearson correlation with a two-sided significance test at alpha = 0.05.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    pub significant: bool,
}

/// Sample Pearson correlation; the p-value comes from the Student-t
/// distribution of `r sqrt((n-2)/(1-r^2))` with n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(DomError::DimensionMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(DomError::InvalidInput(
            "correlation needs at least three samples".into(),
        ));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(DomError::InvalidInput(
            "correlation is undefined for a zero-variance sample".into(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let dof = nf - 2.0;
    let p_value = if 1.0 - r * r <= f64::EPSILON {
        0.0
    } else {
        let t = r * (dof / (1.0 - r * r)).sqrt();
        // two-sided tail of the t distribution
        regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))
    };
    Ok(CorrelationResult {
        r,
        p_value,
        n,
        significant: p_value <= 0.05,
    })
}

/// I_x(a, b) by the standard continued-fraction expansion.
pub(crate) fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln())
        .exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-12;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(points: &[&[f64]]) -> PointSet {
        PointSet::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn epsilon_many_objective_information_loss() {
        let mut p1 = vec![0.0; 10];
        p1[9] = 1.0;
        let mut q1 = vec![1.0; 10];
        q1[9] = 0.0;
        let p = PointSet::new(vec![p1]).unwrap();
        let q = PointSet::new(vec![q1]).unwrap();
        assert_eq!(additive_epsilon(&p, &q).unwrap(), 1.0);
        assert_eq!(additive_epsilon(&q, &p).unwrap(), 1.0);
    }

    #[test]
    fn epsilon_zero_on_equal_sets() {
        let s = ps(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(additive_epsilon(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn epsilon_matches_brute_force() {
        let mut state = 0x5deece66du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 5.0
        };
        for _ in 0..50 {
            let p = PointSet::new((0..5).map(|_| vec![next(), next(), next()]).collect()).unwrap();
            let q = PointSet::new((0..5).map(|_| vec![next(), next(), next()]).collect()).unwrap();
            let mut brute = f64::NEG_INFINITY;
            for qj in q.points() {
                let mut inner = f64::INFINITY;
                for pi in p.points() {
                    let mut m = f64::NEG_INFINITY;
                    for k in 0..3 {
                        m = m.max(pi[k] - qj[k]);
                    }
                    inner = inner.min(m);
                }
                brute = brute.max(inner);
            }
            assert!((additive_epsilon(&p, &q).unwrap() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn igd_plus_zero_cases() {
        let s = ps(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(igd_plus(&s, &s).unwrap(), 0.0);
        let better = ps(&[&[0.5, 1.5], &[1.5, 0.5]]);
        assert_eq!(igd_plus(&better, &s).unwrap(), 0.0);
    }

    #[test]
    fn igd_plus_matches_brute_force() {
        let a = ps(&[&[1.0, 3.0], &[2.0, 2.0], &[3.5, 0.5]]);
        let r = ps(&[&[0.5, 2.5], &[1.5, 1.5], &[3.0, 1.0]]);
        let mut total = 0.0;
        for rp in r.points() {
            let mut best = f64::INFINITY;
            for ap in a.points() {
                let d = ((ap[0] - rp[0]).max(0.0).powi(2) + (ap[1] - rp[1]).max(0.0).powi(2)).sqrt();
                best = best.min(d);
            }
            total += best;
        }
        let expect = total / 3.0;
        assert!((igd_plus(&a, &r).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn hypervolume_small_cases() {
        let s = ps(&[&[0.0, 0.0]]);
        assert_eq!(hypervolume(&s, &[1.0, 1.0]).unwrap(), 1.0);

        let s = ps(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(hypervolume(&s, &[2.0, 2.0]).unwrap(), 3.0);

        // dominated and out-of-box points contribute nothing
        let s = ps(&[&[0.0, 1.0], &[1.0, 0.0], &[1.5, 1.5], &[3.0, 0.5]]);
        assert_eq!(hypervolume(&s, &[2.0, 2.0]).unwrap(), 3.0);
    }

    #[test]
    fn hypervolume_is_monotone_in_points() {
        let base = ps(&[&[2.0, 5.0], &[4.0, 3.0]]);
        let more = ps(&[&[2.0, 5.0], &[4.0, 3.0], &[1.0, 6.0]]);
        let r = [10.0, 10.0];
        assert!(hypervolume(&more, &r).unwrap() >= hypervolume(&base, &r).unwrap());
    }

    #[test]
    fn hypervolume_guard() {
        let s = ps(&[&[0.0; 11]]);
        assert!(hypervolume(&s, &[1.0; 11]).is_err());
    }

    #[test]
    fn pearson_perfect_correlation() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 6.0, 8.0, 10.0];
        let res = pearson(&x, &y).unwrap();
        assert!((res.r - 1.0).abs() < 1e-12);
        assert!(res.p_value < 1e-9);
        assert!(res.significant);

        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let res = pearson(&x, &neg).unwrap();
        assert!((res.r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_error_paths() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_p_value_matches_quadrature() {
        // oracle: two-sided tail mass of the t distribution by Simpson rule
        let tail = |t: f64, dof: f64| {
            let pdf = |x: f64| {
                let c = (ln_gamma((dof + 1.0) / 2.0)
                    - ln_gamma(dof / 2.0)
                    - 0.5 * (dof * std::f64::consts::PI).ln())
                .exp();
                c * (1.0 + x * x / dof).powf(-(dof + 1.0) / 2.0)
            };
            let (a, b, n) = (t, t + 60.0, 40_000);
            let h = (b - a) / n as f64;
            let mut s = pdf(a) + pdf(b);
            for i in 1..n {
                let x = a + i as f64 * h;
                s += pdf(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            2.0 * s * h / 3.0
        };
        let x = [0.2, 1.1, 1.9, 3.2, 4.1];
        let y = [0.5, 0.9, 2.4, 2.9, 4.6];
        let res = pearson(&x, &y).unwrap();
        let t = res.r * ((res.n as f64 - 2.0) / (1.0 - res.r * res.r)).sqrt();
        let expect = tail(t.abs(), res.n as f64 - 2.0);
        assert!(
            (res.p_value - expect).abs() < 1e-3,
            "p {} vs quadrature {}",
            res.p_value,
            expect
        );
    }

    #[test]
    fn incomplete_beta_reference_values() {
        // I_0.5(a, a) = 0.5 by symmetry
        for a in [0.5, 1.0, 2.5, 7.0] {
            assert!((regularized_incomplete_beta(a, a, 0.5) - 0.5).abs() < 1e-10);
        }
        // I_x(1, b) = 1 - (1-x)^b
        let x = 0.3;
        let b = 4.0;
        let expect = 1.0 - (1.0f64 - x).powf(b);
        assert!((regularized_incomplete_beta(1.0, b, x) - expect).abs() < 1e-10);
    }
}
