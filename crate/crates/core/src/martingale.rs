//! Martingale-difference reduction under a fixed product prior, and the
//! Freedman tail used by the Bernstein route.
//!
//! Under a product measure the conditional mean of `X_i` given the past is
//! its unconditional mean `μ_i`, so `Y_i = X_i − μ_i` exactly.

use rayon::prelude::*;
use serde::Serialize;

use crate::convex_sets::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::priors::{PriorFamily, PriorPoint};
use crate::rng;
use crate::vector::{norm, norm_sq};

/// Slack in `ρ_Θ(X̄ₙ) ≤ |Ȳₙ|`, covering projection tolerance.
pub const REDUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedSample {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// Conditional means `E_P[X_i | F_{i−1}]`.
    pub theta: Vec<Vec<f64>>,
    pub m_bound: f64,
    pub sigma_bar_sq: f64,
}

impl ReducedSample {
    pub fn mean_x(&self) -> Vec<f64> {
        mean(&self.x)
    }
    pub fn mean_y(&self) -> Vec<f64> {
        mean(&self.y)
    }
}

fn mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; rows[0].len()];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// `Y_i = X_i − μ_i` for a draw `x` under the product prior `prior`.
///
/// Panics if some `|Y_i|` exceeds `2M`, which no draw of the family can do.
pub fn reduce(family: &PriorFamily, x: Vec<Vec<f64>>, prior: &PriorPoint) -> Result<ReducedSample> {
    family.check_admissible(prior)?;
    check_dim(family.n(), x.len())?;
    for xi in &x {
        check_dim(family.d(), xi.len())?;
    }
    Ok(reduce_unchecked(family, x, prior, family.sigma_bar_sq()?))
}

fn reduce_unchecked(family: &PriorFamily, x: Vec<Vec<f64>>, prior: &PriorPoint, sigma_bar_sq: f64) -> ReducedSample {
    let theta = family.prior_means(prior);
    let m = family.m_bound();
    let y: Vec<Vec<f64>> = x
        .iter()
        .zip(&theta)
        .map(|(xi, mu)| xi.iter().zip(mu).map(|(a, b)| a - b).collect())
        .collect();
    for (i, yi) in y.iter().enumerate() {
        let len = norm(yi);
        assert!(len <= 2.0 * m * (1.0 + 1e-12), "|Y_{i}| = {len} exceeds 2M = {}", 2.0 * m);
    }
    ReducedSample {
        x,
        y,
        theta,
        m_bound: m,
        sigma_bar_sq,
    }
}

/// `ρ_Θ(X̄ₙ) ≤ |Ȳₙ|` up to [`REDUCTION_TOL`].
pub fn check_reduction_bound(rs: &ReducedSample, theta_avg: &ConvexBody) -> Result<bool> {
    let rho = theta_avg.distance_to(&rs.mean_x())?;
    Ok(rho <= norm(&rs.mean_y()) + REDUCTION_TOL)
}

/// `Ψ(s) = exp(−s²/(2nσ² + 4Ms/3))`, clamped to `(0, 1]`.
///
/// The clamp keeps the smallest positive `f64` when the exponent is beyond
/// range; use [`freedman_log_tail`] for the unclamped logarithm.
pub fn freedman_tail(s: f64, n: u64, sigma_sq: f64, m: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must be > 0")));
    }
    if n == 0 || !(sigma_sq >= 0.0) || !(m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1, sigma_sq >= 0, M > 0 (n = {n}, sigma_sq = {sigma_sq}, M = {m})"
        )));
    }
    Ok(freedman_log_tail(s, n, sigma_sq, m).exp().clamp(f64::from_bits(1), 1.0))
}

/// `ln Ψ(s) = −s²/(2nσ² + 4Ms/3)`.
pub fn freedman_log_tail(s: f64, n: u64, sigma_sq: f64, m: f64) -> f64 {
    -s * s / (2.0 * n as f64 * sigma_sq + 4.0 * m * s / 3.0)
}

/// Per-coordinate Monte Carlo summary of the reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStats {
    pub replicates: u64,
    /// Empirical mean of each coordinate of each `Y_i`, `[i][k]`.
    pub mean_y: Vec<Vec<f64>>,
    /// Standard error of `mean_y`.
    pub se_mean_y: Vec<Vec<f64>>,
    /// Empirical `E|Y_i|²` and its standard error.
    pub second_moment: Vec<f64>,
    pub se_second_moment: Vec<f64>,
    pub max_norm_y: f64,
    pub sigma_bar_sq: f64,
    pub m_bound: f64,
    /// Draws where `ρ_Θ(X̄ₙ) > |Ȳₙ| + tol`.
    pub bound_failures: u64,
}

impl ReductionStats {
    /// Mean zero within `k` standard errors, for every index and coordinate.
    pub fn centered_within(&self, k: f64) -> bool {
        self.mean_y
            .iter()
            .zip(&self.se_mean_y)
            .all(|(m, s)| m.iter().zip(s).all(|(a, b)| a.abs() <= k * b))
    }

    /// `E|Y_i|² ≤ σ̄ₙ² + k·se` for every `i`.
    pub fn variance_dominated(&self, k: f64) -> bool {
        self.second_moment
            .iter()
            .zip(&self.se_second_moment)
            .all(|(m, s)| *m <= self.sigma_bar_sq + k * s)
    }
}

const CHUNK: u64 = 1000;

#[derive(Default, Clone)]
struct Acc {
    sum: Vec<Vec<f64>>,
    sum_sq: Vec<Vec<f64>>,
    norm2: Vec<f64>,
    norm4: Vec<f64>,
    max_norm: f64,
    failures: u64,
}

impl Acc {
    fn new(n: usize, d: usize) -> Self {
        Self {
            sum: vec![vec![0.0; d]; n],
            sum_sq: vec![vec![0.0; d]; n],
            norm2: vec![0.0; n],
            norm4: vec![0.0; n],
            max_norm: 0.0,
            failures: 0,
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        for i in 0..self.sum.len() {
            for k in 0..self.sum[i].len() {
                self.sum[i][k] += o.sum[i][k];
                self.sum_sq[i][k] += o.sum_sq[i][k];
            }
            self.norm2[i] += o.norm2[i];
            self.norm4[i] += o.norm4[i];
        }
        self.max_norm = self.max_norm.max(o.max_norm);
        self.failures += o.failures;
        self
    }
}

/// Draws `replicates` samples under `prior`, reduces each, and checks the
/// four reduction properties. Chunk `c` uses stream `(seed, 0, c)`; chunk
/// sums are merged in chunk order, so results do not depend on threads.
pub fn verify_reduction(family: &PriorFamily, prior: &PriorPoint, replicates: u64, seed: u64) -> Result<ReductionStats> {
    family.check_admissible(prior)?;
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicates".into()));
    }
    let theta = family.theta()?;
    let sigma_bar_sq = family.sigma_bar_sq()?;
    let (n, d) = (family.n(), family.d());
    let chunks = replicates.div_ceil(CHUNK);
    let partial: Vec<Result<Acc>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, 0, c as u32);
            let count = CHUNK.min(replicates - c * CHUNK);
            let mut acc = Acc::new(n, d);
            for _ in 0..count {
                let rs = reduce_unchecked(family, family.draw(prior, &mut rng), prior, sigma_bar_sq);
                for (i, yi) in rs.y.iter().enumerate() {
                    for (k, v) in yi.iter().enumerate() {
                        acc.sum[i][k] += v;
                        acc.sum_sq[i][k] += v * v;
                    }
                    let q = norm_sq(yi);
                    acc.norm2[i] += q;
                    acc.norm4[i] += q * q;
                    acc.max_norm = acc.max_norm.max(q.sqrt());
                }
                if !check_reduction_bound(&rs, &theta)? {
                    acc.failures += 1;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = Acc::new(n, d);
    for p in partial {
        total = total.merge(p?);
    }
    let r = replicates as f64;
    let se = |s: f64, s2: f64| ((s2 - s * s / r).max(0.0) / (r - 1.0) / r).sqrt();
    Ok(ReductionStats {
        replicates,
        mean_y: total.sum.iter().map(|v| v.iter().map(|s| s / r).collect()).collect(),
        se_mean_y: total
            .sum
            .iter()
            .zip(&total.sum_sq)
            .map(|(v, w)| v.iter().zip(w).map(|(s, s2)| se(*s, *s2)).collect())
            .collect(),
        second_moment: total.norm2.iter().map(|s| s / r).collect(),
        se_second_moment: total.norm2.iter().zip(&total.norm4).map(|(s, s2)| se(*s, *s2)).collect(),
        max_norm_y: total.max_norm,
        sigma_bar_sq,
        m_bound: family.m_bound(),
        bound_failures: total.failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reduce_examples() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 2).unwrap();
        let prior = PriorPoint::constant(vec![1.0], 2);
        let rs = reduce(&fam, vec![vec![1.0], vec![1.0]], &prior).unwrap();
        assert_eq!(rs.y, vec![vec![0.0], vec![0.0]]);
        let theta = fam.theta().unwrap();
        assert!(check_reduction_bound(&rs, &theta).unwrap());

        let rs = reduce(&fam, vec![vec![1.3], vec![1.1]], &prior).unwrap();
        assert!((rs.y[0][0] - 0.3).abs() < 1e-15);
        // μ ≡ a: ρ = X̄ − a = Ȳ, the bound is an equality
        let rho = theta.distance_to(&rs.mean_x()).unwrap();
        assert!((rho - rs.mean_y()[0]).abs() < 1e-15);
        assert!(check_reduction_bound(&rs, &theta).unwrap());

        assert!(reduce(&fam, vec![vec![1.0]], &prior).is_err());
    }

    #[test]
    fn freedman_examples() {
        let v = freedman_tail(250.0, 1000, 0.25, 1.0).unwrap();
        // e^−75, mpmath at 30 digits
        assert_relative_eq!(v, 2.678_636_961_808_078e-33, max_relative = 1e-13);
        assert_relative_eq!(freedman_log_tail(250.0, 1000, 0.25, 1.0), -75.0, max_relative = 1e-15);
        assert!(freedman_tail(1e-12, 1000, 0.25, 1.0).unwrap() > 1.0 - 1e-12);
        assert!(freedman_tail(500.0, 1000, 0.25, 1.0).unwrap() < v);
        assert!(freedman_tail(0.0, 1000, 0.25, 1.0).is_err());
        assert!(freedman_tail(1e6, 1, 0.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn reduction_properties_uniform() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 4).unwrap();
        for prior in [PriorPoint::constant(vec![1.0], 4), PriorPoint::Shift { mu: vec![vec![0.3], vec![-1.0], vec![0.0], vec![1.0]] }] {
            let s = verify_reduction(&fam, &prior, 20_000, 7).unwrap();
            assert!(s.centered_within(4.0), "{:?}", s.mean_y);
            assert!(s.variance_dominated(4.0));
            assert!(s.max_norm_y <= 2.0 * s.m_bound);
            assert_eq!(s.bound_failures, 0);
        }
    }

    #[test]
    fn reduction_properties_ball() {
        let body = ConvexBody::polytope(vec![vec![0.4, 0.0], vec![-0.2, 0.3], vec![-0.2, -0.3]]).unwrap();
        let fam = PriorFamily::ball_shift(0.5, 0.5, 3, body).unwrap();
        let prior = fam.corner_priors(&[1.0, 0.0], 1, 3).unwrap().pop().unwrap();
        let s = verify_reduction(&fam, &prior, 20_000, 9).unwrap();
        assert!(s.centered_within(4.0));
        assert!(s.variance_dominated(4.0));
        assert_eq!(s.bound_failures, 0);
    }
}
