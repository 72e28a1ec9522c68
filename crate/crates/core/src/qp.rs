//! Maximum variance over mixtures of finitely many distributions.
//!
//! For laws with means `m_k` and second moments about the origin
//! `c_k = |m_k|² + v_k`, the quantity
//!
//! ```text
//! inf_θ max_k E_k|X − θ|² = max_{λ ∈ Δ} Σ λ_k c_k − |Σ λ_k m_k|²
//! ```
//!
//! is the largest total variance of a mixture, and the optimal center
//! `θ* = Σ λ_k m_k` lies in the convex hull of the means. The right-hand
//! side is a concave quadratic on the simplex.

use nalgebra::{DMatrix, DVector};

use crate::vector::{dot, norm_sq};

/// Exact enumeration of active sets is used up to this many laws.
const EXACT_LIMIT: usize = 16;

/// Maximizes `Σ λ_k (|m_k|² + v_k) − |Σ λ_k m_k|²` over the simplex.
pub fn max_mixture_variance(means: &[Vec<f64>], variances: &[f64]) -> f64 {
    assert_eq!(means.len(), variances.len());
    assert!(!means.is_empty());
    let c: Vec<f64> = means.iter().zip(variances).map(|(m, v)| norm_sq(m) + v).collect();
    let weights = if means.len() <= EXACT_LIMIT {
        exact(means, &c)
    } else {
        frank_wolfe(means, &c)
    };
    objective(means, &c, &weights)
}

fn objective(means: &[Vec<f64>], c: &[f64], w: &[f64]) -> f64 {
    let center = mix(means, w);
    w.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() - norm_sq(&center)
}

fn mix(means: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut center = vec![0.0; means[0].len()];
    for (m, wk) in means.iter().zip(w) {
        for (x, y) in center.iter_mut().zip(m) {
            *x += wk * y;
        }
    }
    center
}

/// Stationary points of every face of the simplex; the best feasible one
/// is the global maximum of the concave objective.
fn exact(means: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let m = means.len();
    let mut best_w = vec![0.0; m];
    best_w[0] = 1.0;
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1u32 << m) {
        let idx: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
        let s = idx.len();
        // KKT on the face: c_k − 2⟨m_k, Σ λ_j m_j⟩ = ν, Σ λ = 1.
        let mut a = DMatrix::<f64>::zeros(s + 1, s + 1);
        let mut rhs = DVector::<f64>::zeros(s + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (col, &j) in idx.iter().enumerate() {
                a[(r, col)] = 2.0 * dot(&means[i], &means[j]);
            }
            a[(r, s)] = 1.0;
            a[(s, r)] = 1.0;
            rhs[r] = c[i];
        }
        rhs[s] = 1.0;
        let Some(sol) = a.lu().solve(&rhs) else { continue };
        if sol.iter().any(|v| !v.is_finite()) || sol.iter().take(s).any(|&l| l < -1e-12) {
            continue;
        }
        let mut w = vec![0.0; m];
        for (r, &i) in idx.iter().enumerate() {
            w[i] = sol[r].max(0.0);
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let val = objective(means, c, &w);
        if val > best {
            best = val;
            best_w = w;
        }
    }
    best_w
}

/// Away-step Frank–Wolfe with exact line search, for large law counts.
fn frank_wolfe(means: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let m = means.len();
    let mut w = vec![1.0 / m as f64; m];
    for _ in 0..200_000 {
        let center = mix(means, &w);
        // gradient_k = c_k − 2⟨m_k, center⟩
        let grad: Vec<f64> = means.iter().zip(c).map(|(mk, ck)| ck - 2.0 * dot(mk, &center)).collect();
        let avg: f64 = grad.iter().zip(&w).map(|(g, x)| g * x).sum();
        let toward = (0..m).max_by(|&a, &b| grad[a].total_cmp(&grad[b])).expect("nonempty");
        let away = (0..m)
            .filter(|&k| w[k] > 0.0)
            .min_by(|&a, &b| grad[a].total_cmp(&grad[b]))
            .expect("weights sum to one");
        let fw_gap = grad[toward] - avg;
        let away_gap = avg - grad[away];
        if fw_gap <= 1e-14 {
            break;
        }
        // Along w + γ·dir the objective is a concave quadratic.
        let (vertex, sign, gap, max_step) = if fw_gap >= away_gap {
            (toward, 1.0, fw_gap, 1.0)
        } else {
            (away, -1.0, away_gap, w[away] / (1.0 - w[away]))
        };
        let shift: Vec<f64> = means[vertex].iter().zip(&center).map(|(a, b)| a - b).collect();
        let curvature = norm_sq(&shift);
        let step = if curvature > 0.0 { (gap / (2.0 * curvature)).min(max_step) } else { max_step };
        for (k, x) in w.iter_mut().enumerate() {
            // toward: w ← (1−γ)w + γe_j; away: w ← (1+γ)w − γe_a
            *x *= 1.0 - sign * step;
            if k == vertex {
                *x += sign * step;
            }
        }
        if sign < 0.0 && step == max_step {
            w[away] = 0.0;
        }
    }
    w
}
