//! Monte Carlo estimates of `V̂(ρ_Θ(X̄ₙ) > t)` and `Ê[ρ_Θ²(X̄ₙ)]` over a
//! finite set of priors.
//!
//! Replicates are split into fixed chunks of [`CHUNK`]; chunk `c` of prior
//! `p` draws from stream `(seed, p, c)`. Results are collected in chunk
//! order, so they do not depend on the number of worker threads.
//!
//! A finite prior search underestimates `V̂`, so estimates are lower
//! approximations of the capacity.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::{beta_reg, inv_beta_reg};

use crate::bounds::{
    azuma_bound, bernstein_bound, dimfree_bound, moment_bound, sharpness_lower_bound, sharpness_sigma, BoundInput,
    BoundValue, SharpnessBound,
};
use crate::convex_sets::ConvexBody;
use crate::error::{Error, Result};
use crate::priors::{FamilyKind, PriorFamily, PriorPoint};
use crate::rng;

pub const CHUNK: u64 = 1000;
pub const MIN_REPLICATES: u64 = 1000;
/// Two-sided level of the binomial intervals.
pub const CI_LEVEL: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub t: f64,
    pub n: usize,
    pub point: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub exceedances: u64,
    pub replicates: u64,
    pub priors_searched: usize,
    /// Index of the prior attaining `point` (first on ties).
    pub argmax_prior: usize,
    pub seed: u64,
}

/// Run options shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub replicates: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl McOptions {
    pub fn new(replicates: u64, seed: u64) -> Self {
        Self { replicates, seed, workers: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidParameter(format!(
                "replicates = {} below the minimum {MIN_REPLICATES}",
                self.replicates
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        Ok(())
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(job()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Exact (Clopper–Pearson) two-sided interval for `k` successes in `n`
/// trials at confidence `level`.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n && level > 0.0 && level < 1.0);
    let alpha = 1.0 - level;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 { 0.0 } else { beta_quantile(kf, nf - kf + 1.0, alpha / 2.0) };
    let hi = if k == n { 1.0 } else { beta_quantile(kf + 1.0, nf - kf, 1.0 - alpha / 2.0) };
    (lo, hi)
}

/// Beta quantile: statrs' inverse, then bisection on the regularized
/// incomplete beta to full precision.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let guess = inv_beta_reg(a, b, p);
    let width = 1e-6_f64.max(guess * 1e-6);
    let (mut lo, mut hi) = ((guess - width).max(0.0), (guess + width).min(1.0));
    if beta_reg(a, b, lo) > p {
        lo = 0.0;
    }
    if beta_reg(a, b, hi) < p {
        hi = 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ρ_Θ(X̄ₙ)` for `replicates` draws under one prior, in replicate order.
fn rho_samples(family: &PriorFamily, theta: &ConvexBody, prior_index: usize, prior: &PriorPoint, opts: &McOptions) -> Result<Vec<f64>> {
    let (n, d) = (family.n(), family.d());
    let chunks = opts.replicates.div_ceil(CHUNK);
    let interval = theta.bounds_1d();
    let per_chunk: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(opts.seed, prior_index as u32, c as u32);
            let count = CHUNK.min(opts.replicates - c * CHUNK);
            let mut out = Vec::with_capacity(count as usize);
            let mut buf = vec![0.0; d];
            let mut sum = vec![0.0; d];
            for _ in 0..count {
                sum.iter_mut().for_each(|s| *s = 0.0);
                for i in 0..n {
                    family.draw_coordinate(prior, i, &mut rng, &mut buf);
                    for (s, x) in sum.iter_mut().zip(&buf) {
                        *s += x;
                    }
                }
                sum.iter_mut().for_each(|s| *s /= n as f64);
                let rho = match interval {
                    Some((lo, hi)) => (lo - sum[0]).max(sum[0] - hi).max(0.0),
                    None => theta.distance_to(&sum)?,
                };
                out.push(rho);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(opts.replicates as usize);
    for chunk in per_chunk {
        all.extend(chunk?);
    }
    Ok(all)
}

fn family_for(family: &PriorFamily, n: usize) -> Result<PriorFamily> {
    if n == family.n() {
        Ok(family.clone())
    } else {
        family.with_n(n)
    }
}

fn check_priors(family: &PriorFamily, priors: &[PriorPoint]) -> Result<()> {
    if priors.is_empty() {
        return Err(Error::Empty("prior list"));
    }
    priors.iter().try_for_each(|p| family.check_admissible(p))
}

/// Tail estimates at every `t` in `ts`, sharing one set of draws per prior.
pub fn estimate_tails(family: &PriorFamily, priors: &[PriorPoint], n: usize, ts: &[f64], opts: &McOptions) -> Result<Vec<CapacityEstimate>> {
    opts.validate()?;
    let family = family_for(family, n)?;
    check_priors(&family, priors)?;
    if ts.is_empty() {
        return Err(Error::Empty("t grid"));
    }
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("t = {t} must be > 0")));
    }
    let theta = family.theta()?;
    let counts: Vec<Vec<u64>> = opts.run(|| {
        priors
            .iter()
            .enumerate()
            .map(|(p, prior)| {
                let rho = rho_samples(&family, &theta, p, prior, opts)?;
                Ok(ts.iter().map(|t| rho.iter().filter(|r| **r > *t).count() as u64).collect())
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (argmax, k) = counts
                .iter()
                .enumerate()
                .fold((0, 0u64), |best, (p, c)| if c[j] > best.1 { (p, c[j]) } else { best });
            let (ci_lo, ci_hi) = clopper_pearson(k, opts.replicates, CI_LEVEL);
            CapacityEstimate {
                t,
                n,
                point: k as f64 / opts.replicates as f64,
                ci_lo,
                ci_hi,
                exceedances: k,
                replicates: opts.replicates,
                priors_searched: priors.len(),
                argmax_prior: argmax,
                seed: opts.seed,
            }
        })
        .collect())
}

pub fn estimate_tail(family: &PriorFamily, priors: &[PriorPoint], n: usize, t: f64, opts: &McOptions) -> Result<CapacityEstimate> {
    Ok(estimate_tails(family, priors, n, &[t], opts)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichRow {
    pub t: f64,
    pub mc: CapacityEstimate,
    /// Lower bound at `μ ≡ a`; only the one-dimensional uniform family has one.
    pub lower: Option<SharpnessBound>,
    pub azuma: BoundValue,
    pub bernstein: BoundValue,
    pub dimfree: BoundValue,
}

impl SandwichRow {
    pub fn min_upper(&self) -> f64 {
        self.azuma.clamped.min(self.bernstein.clamped).min(self.dimfree.clamped)
    }

    /// `ci_lo ≤ min upper bound`.
    pub fn upper_holds(&self) -> bool {
        self.mc.ci_lo <= self.min_upper()
    }

    /// `ci_hi ≥ lower` where the lower bound is valid; true otherwise.
    pub fn lower_holds(&self) -> bool {
        match self.lower {
            Some(l) if l.valid => self.mc.ci_hi >= l.value,
            _ => true,
        }
    }
}

/// Corner priors in direction `e₁` plus `random_priors` random corners.
pub fn default_priors(family: &PriorFamily, random_priors: usize, seed: u64) -> Result<Vec<PriorPoint>> {
    let mut dir = vec![0.0; family.d()];
    dir[0] = 1.0;
    family.corner_priors(&dir, random_priors, seed)
}

/// One row per `t`: the Monte Carlo estimate over corner priors, the three
/// upper bounds, and the sharpness lower bound with its validity flag.
/// All rows share the same draws, so point estimates are nonincreasing in `t`.
pub fn sandwich_sweep(family: &PriorFamily, n: usize, ts: &[f64], random_priors: usize, opts: &McOptions) -> Result<Vec<SandwichRow>> {
    if ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("t grid must be strictly ascending".into()));
    }
    let family = family_for(family, n)?;
    let priors = default_priors(&family, random_priors, opts.seed)?;
    let mc = estimate_tails(&family, &priors, n, ts, opts)?;
    let (m, s2) = (family.m_bound(), family.sigma_bar_sq()?);
    mc.into_iter()
        .map(|est| {
            let input = BoundInput::new(n as u64, family.d(), m, s2, est.t)?;
            let lower = match family.kind() {
                FamilyKind::UniformShift { r, .. } => Some(sharpness_lower_bound(n as u64, sharpness_sigma(*r), est.t)?),
                _ => None,
            };
            Ok(SandwichRow {
                t: est.t,
                mc: est,
                lower,
                azuma: azuma_bound(&input)?,
                bernstein: bernstein_bound(&input)?,
                dimfree: dimfree_bound(&input)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub n: usize,
    /// Largest empirical mean of `ρ_Θ²(X̄ₙ)` over the searched priors.
    pub value: f64,
    pub se: f64,
    pub argmax_prior: usize,
    pub priors_searched: usize,
    pub sigma_bar_sq: f64,
    /// `σ̄ₙ²/n`.
    pub variance_bound: f64,
    pub moment_bound: f64,
}

impl MomentEstimate {
    /// `value ≤ σ̄ₙ²/n + k·se`.
    pub fn within_variance_bound(&self, k: f64) -> bool {
        self.value <= self.variance_bound + k * self.se
    }
}

/// `max_P mean ρ_Θ²(X̄ₙ)` over corner priors, with its standard error.
pub fn moment_estimate(family: &PriorFamily, n: usize, opts: &McOptions) -> Result<MomentEstimate> {
    opts.validate()?;
    let family = family_for(family, n)?;
    let priors = default_priors(&family, 0, opts.seed)?;
    let theta = family.theta()?;
    let stats: Vec<(f64, f64)> = opts.run(|| {
        priors
            .iter()
            .enumerate()
            .map(|(p, prior)| {
                let rho = rho_samples(&family, &theta, p, prior, opts)?;
                let r = rho.len() as f64;
                let mean = rho.iter().map(|x| x * x).sum::<f64>() / r;
                let var = rho.iter().map(|x| (x * x - mean).powi(2)).sum::<f64>() / (r - 1.0);
                Ok((mean, (var / r).sqrt()))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let (argmax, &(value, se)) = stats
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &(f64, f64))>, (p, s)| match best {
            Some((_, b)) if b.0 >= s.0 => best,
            _ => Some((p, s)),
        })
        .expect("at least one prior");
    let s2 = family.sigma_bar_sq()?;
    Ok(MomentEstimate {
        n,
        value,
        se,
        argmax_prior: argmax,
        priors_searched: priors.len(),
        sigma_bar_sq: s2,
        variance_bound: s2 / n as f64,
        moment_bound: moment_bound(n as u64, family.d(), family.m_bound(), s2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clopper_pearson_closed_forms() {
        // k = 0: upper solves (1 − p)^n = α/2
        let (lo, hi) = clopper_pearson(0, 20_000, 0.99);
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 1.0 - 0.005f64.powf(1.0 / 20_000.0), max_relative = 1e-10);
        // k = n: lower solves p^n = α/2
        let (lo, hi) = clopper_pearson(50, 50, 0.99);
        assert_relative_eq!(lo, 0.005f64.powf(1.0 / 50.0), max_relative = 1e-12);
        assert_eq!(hi, 1.0);
        // k = 1, n = 2: P(X ≥ 1) = 1 − (1−p)² and P(X ≤ 1) = 1 − p²
        let (lo, hi) = clopper_pearson(1, 2, 0.99);
        assert_relative_eq!(lo, 1.0 - 0.995f64.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(hi, 0.995f64.sqrt(), max_relative = 1e-12);
        let (lo, hi) = clopper_pearson(300, 1000, 0.99);
        assert!(lo < 0.3 && 0.3 < hi);
    }

    #[test]
    fn impossible_event_has_zero_point() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 10).unwrap();
        let priors = default_priors(&fam, 2, 1).unwrap();
        let est = estimate_tail(&fam, &priors, 10, 3.0, &McOptions::new(2000, 4)).unwrap();
        assert_eq!(est.point, 0.0);
        assert_eq!(est.ci_lo, 0.0);
        assert!(est.ci_lo <= est.point && est.point <= est.ci_hi && est.ci_hi <= 1.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 50).unwrap();
        let priors = default_priors(&fam, 3, 8).unwrap();
        let ts = [0.01, 0.03, 0.05];
        let base = estimate_tails(&fam, &priors, 50, &ts, &McOptions::new(5500, 21).with_workers(1)).unwrap();
        for w in [4, 16] {
            let other = estimate_tails(&fam, &priors, 50, &ts, &McOptions::new(5500, 21).with_workers(w)).unwrap();
            assert_eq!(base, other);
        }
    }

    #[test]
    fn lower_side_small() {
        // σ = 1/√3 for r = 0.5; t = σ/(4√n) is half a standard deviation of Z̄.
        let n = 400;
        let fam = PriorFamily::uniform_shift(1.0, 0.5, n).unwrap();
        let sigma = sharpness_sigma(0.5);
        let t = sigma / (4.0 * (n as f64).sqrt());
        let est = estimate_tail(&fam, &[PriorPoint::constant(vec![1.0], n)], n, t, &McOptions::new(20_000, 3)).unwrap();
        let lb = sharpness_lower_bound(n as u64, sigma, t).unwrap();
        assert!(lb.valid);
        assert_relative_eq!(lb.value, 0.25 * (-0.125f64).exp(), max_relative = 1e-15);
        assert!(est.ci_hi >= lb.value);
        // P(Z > 0.5) = 0.30854 for the Gaussian limit
        assert!((est.point - 0.3085).abs() < 0.02, "{}", est.point);
    }

    #[test]
    fn sandwich_rows_hold() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 100).unwrap();
        let ts = [0.005, 0.01, 0.02, 0.05, 0.1];
        let rows = sandwich_sweep(&fam, 100, &ts, 2, &McOptions::new(4000, 12)).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert!(r.upper_holds());
            assert!(r.lower_holds());
        }
        assert!(rows.windows(2).all(|w| w[1].mc.point <= w[0].mc.point));
        assert!(sandwich_sweep(&fam, 100, &[0.1, 0.05], 0, &McOptions::new(4000, 12)).is_err());
    }

    #[test]
    fn moment_estimate_singleton_theta() {
        let (r, n) = (1.0, 100);
        let fam = PriorFamily::uniform_shift(0.0, r, n).unwrap();
        let m = moment_estimate(&fam, n, &McOptions::new(40_000, 5)).unwrap();
        let exact = r * r / (3.0 * n as f64);
        assert_relative_eq!(m.variance_bound, exact, max_relative = 1e-15);
        assert!((m.value - exact).abs() <= 4.0 * m.se, "{} vs {exact}", m.value);
        assert!(m.value <= m.moment_bound);
    }

    #[test]
    fn ball_shift_estimates() {
        let body = ConvexBody::ball(vec![0.0, 0.0], 0.5).unwrap();
        let fam = PriorFamily::ball_shift(0.5, 0.5, 20, body).unwrap();
        let rows = sandwich_sweep(&fam, 20, &[0.05, 0.2], 1, &McOptions::new(2000, 2)).unwrap();
        assert!(rows.iter().all(|r| r.lower.is_none() && r.upper_holds()));
        let m = moment_estimate(&fam, 20, &McOptions::new(2000, 2)).unwrap();
        assert!(m.within_variance_bound(4.0));
    }

    #[test]
    fn rejects_bad_options() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 10).unwrap();
        let priors = default_priors(&fam, 0, 0).unwrap();
        assert!(estimate_tail(&fam, &priors, 10, 0.1, &McOptions::new(999, 0)).is_err());
        assert!(estimate_tail(&fam, &[], 10, 0.1, &McOptions::new(1000, 0)).is_err());
        assert!(estimate_tails(&fam, &priors, 10, &[], &McOptions::new(1000, 0)).is_err());
        assert!(estimate_tail(&fam, &priors, 10, 0.1, &McOptions::new(1000, 0).with_workers(0)).is_err());
    }
}
