//! Exact computation on finite sublinear-expectation spaces.
//!
//! A [`FiniteSpace`] has `n` coordinates, each taking finitely many values
//! (atoms) in ℝ^d, and a finite family of product measures. The sublinear
//! expectation is the largest linear expectation over the prior set, which
//! is attained at an extreme measure, so everything here is a finite
//! enumeration.
//!
//! Two prior-set structures are supported:
//!
//! * `explicit`: the prior set is the convex hull of the listed product
//!   measures. `Ê[f] = max_e E_e[f]`.
//! * `rectangular`: each coordinate `i` has a kernel set `K_i` (the distinct
//!   `i`-th marginals of the listed measures) and the prior set contains
//!   every measure that picks the law of `X_i` from `K_i` as a function of
//!   the history `X_1, …, X_{i−1}`. Its extreme points are these adapted
//!   selections; the maximum over them is computed by backward induction.
//!   This is the structure under which coordinates are independent in the
//!   iterated-expectation sense for every test function.
//!
//! Regularity and weak compactness hold automatically on a finite space.

use serde::{Deserialize, Serialize};

use crate::convex_sets::{self, ConvexBody};
use crate::error::{Error, Result};
use crate::qp::max_mixture_variance;
use crate::vector::{dot, norm, norm_sq};

/// Largest number of joint atoms any enumeration will visit.
pub const ATOM_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorStructure {
    Rectangular,
    Explicit,
}

/// Serialized form of a finite space.
///
/// `coordinates` lists the atoms of each coordinate; a single entry is
/// shared by all `n` coordinates. Each extreme gives one probability vector
/// per coordinate (again, a single vector is shared by all coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpaceRecord {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub structure: PriorStructure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_independent: Option<bool>,
    pub coordinates: Vec<CoordinateRecord>,
    pub extremes: Vec<ExtremeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateRecord {
    pub atoms: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRecord {
    pub marginals: Vec<Vec<f64>>,
}

/// A validated finite sublinear-expectation space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteSpaceRecord", into = "FiniteSpaceRecord")]
pub struct FiniteSpace {
    name: String,
    n: usize,
    d: usize,
    structure: PriorStructure,
    expect_independent: Option<bool>,
    atoms: Vec<Vec<Vec<f64>>>,
    extremes: Vec<Vec<Vec<f64>>>,
    kernels: Vec<Vec<Vec<f64>>>,
    m_bound: f64,
}

fn broadcast<T: Clone>(items: Vec<T>, n: usize, what: &str) -> Result<Vec<T>> {
    match items.len() {
        1 if n > 1 => Ok(vec![items[0].clone(); n]),
        len if len == n => Ok(items),
        len => Err(Error::InvalidSpace(format!("{what}: expected 1 or {n} entries, got {len}"))),
    }
}

impl TryFrom<FiniteSpaceRecord> for FiniteSpace {
    type Error = Error;

    fn try_from(rec: FiniteSpaceRecord) -> Result<Self> {
        if rec.n == 0 || rec.d == 0 {
            return Err(Error::InvalidSpace("n and d must be positive".into()));
        }
        if rec.extremes.is_empty() {
            return Err(Error::InvalidSpace("no extreme measures".into()));
        }
        let atoms: Vec<Vec<Vec<f64>>> = broadcast(rec.coordinates, rec.n, "coordinates")?
            .into_iter()
            .map(|c| c.atoms)
            .collect();
        for (i, set) in atoms.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidSpace(format!("coordinate {i} has no atoms")));
            }
            if set.iter().any(|a| a.len() != rec.d || a.iter().any(|x| !x.is_finite())) {
                return Err(Error::InvalidSpace(format!("coordinate {i}: atoms must be finite vectors of length {}", rec.d)));
            }
        }
        let mut extremes = Vec::with_capacity(rec.extremes.len());
        for (e, ext) in rec.extremes.into_iter().enumerate() {
            let margs = broadcast(ext.marginals, rec.n, "marginals")?;
            for (i, p) in margs.iter().enumerate() {
                if p.len() != atoms[i].len() {
                    return Err(Error::InvalidSpace(format!(
                        "extreme {e}, coordinate {i}: {} weights for {} atoms",
                        p.len(),
                        atoms[i].len()
                    )));
                }
                let total: f64 = p.iter().sum();
                if p.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-15 * p.len() as f64 {
                    return Err(Error::InvalidSpace(format!(
                        "extreme {e}, coordinate {i}: weights must be nonnegative and sum to 1 (sum {total})"
                    )));
                }
            }
            extremes.push(margs);
        }
        let kernels = (0..rec.n)
            .map(|i| {
                let mut ks: Vec<Vec<f64>> = Vec::new();
                for ext in &extremes {
                    if !ks.contains(&ext[i]) {
                        ks.push(ext[i].clone());
                    }
                }
                ks
            })
            .collect();
        let m_bound = atoms.iter().flatten().map(|a| norm(a)).fold(0.0, f64::max);
        Ok(FiniteSpace {
            name: rec.name,
            n: rec.n,
            d: rec.d,
            structure: rec.structure,
            expect_independent: rec.expect_independent,
            atoms,
            extremes,
            kernels,
            m_bound,
        })
    }
}

impl From<FiniteSpace> for FiniteSpaceRecord {
    fn from(s: FiniteSpace) -> Self {
        FiniteSpaceRecord {
            name: s.name,
            n: s.n,
            d: s.d,
            structure: s.structure,
            expect_independent: s.expect_independent,
            coordinates: s.atoms.into_iter().map(|atoms| CoordinateRecord { atoms }).collect(),
            extremes: s.extremes.into_iter().map(|marginals| ExtremeRecord { marginals }).collect(),
        }
    }
}

/// A named test function of the first `k` coordinates.
pub struct TestFunction {
    pub name: String,
    f: Box<dyn Fn(&[&[f64]]) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(&[&[f64]]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Box::new(f),
        }
    }

    pub fn eval(&self, xs: &[&[f64]]) -> f64 {
        (self.f)(xs)
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

/// Bounded Lipschitz test functions of a variable number of coordinates,
/// including non-separable ones and a few pseudo-random ridge functions.
pub fn standard_test_functions(seed: u64) -> Vec<TestFunction> {
    let mut fns = vec![
        TestFunction::new("sum", |xs: &[&[f64]]| xs.iter().flat_map(|x| x.iter()).sum()),
        TestFunction::new("last_minus_first", |xs: &[&[f64]]| {
            let (a, b) = (xs[0], xs[xs.len() - 1]);
            b.iter().zip(a).map(|(p, q)| p - q).sum()
        }),
        TestFunction::new("product", |xs: &[&[f64]]| xs.iter().map(|x| x[0]).product()),
        TestFunction::new("mean_sq", |xs: &[&[f64]]| {
            let d = xs[0].len();
            let k = xs.len() as f64;
            (0..d).map(|c| (xs.iter().map(|x| x[c]).sum::<f64>() / k).powi(2)).sum()
        }),
        TestFunction::new("abs_last_times_first", |xs: &[&[f64]]| {
            xs[0][0] * xs[xs.len() - 1][0].abs()
        }),
        TestFunction::new("max_first_coord", |xs: &[&[f64]]| {
            xs.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max)
        }),
        TestFunction::new("sin_weighted", |xs: &[&[f64]]| {
            xs.iter().enumerate().map(|(j, x)| (j as f64 + 1.0) * x[0]).sum::<f64>().sin()
        }),
        TestFunction::new("clamped_cross", |xs: &[&[f64]]| {
            (xs[0][0] * xs[xs.len() - 1][0]).clamp(-0.5, 0.5)
        }),
    ];
    // Deterministic ridge functions tanh(⟨w, x⟩ + b).
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for r in 0..6 {
        let w: Vec<f64> = (0..64).map(|_| 2.0 * next()).collect();
        let b = next();
        fns.push(TestFunction::new(format!("ridge_{r}"), move |xs: &[&[f64]]| {
            let mut s = b;
            let mut k = 0;
            for x in xs {
                for v in x.iter() {
                    s += w[k % w.len()] * v;
                    k += 1;
                }
            }
            s.tanh() * if r % 2 == 0 { 1.0 } else { xs[0][0].cos() }
        }));
    }
    fns
}

/// Discrepancies of one check, per coordinate index and test function.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub index: usize,
    pub function: String,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub space: String,
    /// Largest discrepancy (absolute difference for identities, positive
    /// part of `lhs − rhs` for inequalities).
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    fn new(check: &str, space: &str, tolerance: f64, entries: Vec<CheckEntry>) -> Self {
        let max_discrepancy = entries.iter().map(|e| e.discrepancy).fold(0.0, f64::max);
        CheckReport {
            check: check.into(),
            space: space.into(),
            max_discrepancy,
            tolerance,
            passed: max_discrepancy <= tolerance,
            entries,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub space: String,
    /// `Ê[ρ_Θ²(X̄ₙ)]`, computed by enumeration.
    pub lhs: f64,
    pub sigma_bar_sq: f64,
    /// `σ̄ₙ² / n`.
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Exact mean and variance of a law on the atoms `atoms`.
fn moments(atoms: &[Vec<f64>], p: &[f64]) -> (Vec<f64>, f64) {
    let d = atoms[0].len();
    let mut mean = vec![0.0; d];
    for (a, w) in atoms.iter().zip(p) {
        for (m, x) in mean.iter_mut().zip(a) {
            *m += w * x;
        }
    }
    let var = atoms
        .iter()
        .zip(p)
        .map(|(a, w)| w * a.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
        .sum();
    (mean, var)
}

impl FiniteSpace {
    pub fn from_record(rec: FiniteSpaceRecord) -> Result<Self> {
        rec.try_into()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn structure(&self) -> PriorStructure {
        self.structure
    }
    pub fn expect_independent(&self) -> Option<bool> {
        self.expect_independent
    }
    /// Largest atom norm, the almost-sure bound `M`.
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }
    pub fn atoms(&self, i: usize) -> &[Vec<f64>] {
        &self.atoms[i]
    }
    pub fn extremes(&self) -> &[Vec<Vec<f64>>] {
        &self.extremes
    }
    /// Distinct laws available for coordinate `i`.
    pub fn kernels(&self, i: usize) -> &[Vec<f64>] {
        &self.kernels[i]
    }

    fn joint_count(&self, k: usize) -> usize {
        self.atoms[..k]
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .unwrap_or(usize::MAX)
    }

    fn values<'a>(&'a self, idx: &[usize]) -> Vec<&'a [f64]> {
        idx.iter().enumerate().map(|(j, &a)| self.atoms[j][a].as_slice()).collect()
    }

    /// `Ê[f(X_1, …, X_k)]` for `f` given on atom indices.
    pub fn expect_indices(&self, k: usize, f: &dyn Fn(&[usize]) -> f64) -> Result<f64> {
        assert!(k <= self.n);
        let count = self.joint_count(k);
        if count > ATOM_CAP {
            return Err(Error::AtomCap { count, cap: ATOM_CAP });
        }
        Ok(match self.structure {
            PriorStructure::Explicit => self
                .extremes
                .iter()
                .map(|ext| self.linear_expect(k, f, |j| &ext[j]))
                .fold(f64::NEG_INFINITY, f64::max),
            PriorStructure::Rectangular => {
                let mut idx = Vec::with_capacity(k);
                self.backward(k, f, &mut idx)
            }
        })
    }

    /// `Ê[f(X_1, …, X_k)]` for `f` given on atom values.
    pub fn sublinear_expect(&self, k: usize, f: &dyn Fn(&[&[f64]]) -> f64) -> Result<f64> {
        self.expect_indices(k, &|idx| f(&self.values(idx)))
    }

    /// `E_P[f]` for the product of the laws `law(j)`, j < k.
    fn linear_expect<'a>(&self, k: usize, f: &dyn Fn(&[usize]) -> f64, law: impl Fn(usize) -> &'a Vec<f64>) -> f64 {
        let mut idx = vec![0usize; k];
        let mut total = 0.0;
        loop {
            let w: f64 = idx.iter().enumerate().map(|(j, &a)| law(j)[a]).product();
            if w != 0.0 {
                total += w * f(&idx);
            }
            // odometer
            let mut j = k;
            loop {
                if j == 0 {
                    return total;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.atoms[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    fn backward(&self, k: usize, f: &dyn Fn(&[usize]) -> f64, idx: &mut Vec<usize>) -> f64 {
        let j = idx.len();
        if j == k {
            return f(idx);
        }
        let cont: Vec<f64> = (0..self.atoms[j].len())
            .map(|a| {
                let used = self.kernels[j].iter().any(|p| p[a] != 0.0);
                if !used {
                    return 0.0;
                }
                idx.push(a);
                let v = self.backward(k, f, idx);
                idx.pop();
                v
            })
            .collect();
        self.kernels[j]
            .iter()
            .map(|p| p.iter().zip(&cont).filter(|(w, _)| **w != 0.0).map(|(w, v)| w * v).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Ê[φ(X_i)]`: only coordinate `i` matters, so the maximum runs over
    /// the kernel set of `i`.
    pub fn marginal_expect(&self, i: usize, phi: &dyn Fn(&[f64]) -> f64) -> f64 {
        let vals: Vec<f64> = self.atoms[i].iter().map(|a| phi(a)).collect();
        self.kernels[i]
            .iter()
            .map(|p| p.iter().zip(&vals).filter(|(w, _)| **w != 0.0).map(|(w, v)| w * v).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Means `E_P[X_i]` of the available laws of coordinate `i`.
    pub fn kernel_means(&self, i: usize) -> Vec<Vec<f64>> {
        self.kernels[i].iter().map(|p| moments(&self.atoms[i], p).0).collect()
    }

    /// Iterated-expectation identity for each `i < n` and test function:
    /// `Ê[ψ(X_1..X_{i+1})]` against `Ê[ Ê[ψ(x, X_{i+1})]|_{x = (X_1..X_i)} ]`.
    pub fn check_independence(&self, tests: &[TestFunction]) -> Result<CheckReport> {
        let mut entries = Vec::new();
        for i in 1..self.n {
            for t in tests {
                let lhs = self.sublinear_expect(i + 1, &|xs| t.eval(xs))?;
                let inner = |idx: &[usize]| {
                    let head = self.values(idx);
                    self.marginal_expect(i, &|y| {
                        let mut xs = head.clone();
                        xs.push(y);
                        t.eval(&xs)
                    })
                };
                let rhs = self.expect_indices(i, &inner)?;
                entries.push(CheckEntry {
                    index: i,
                    function: t.name.clone(),
                    lhs,
                    rhs,
                    discrepancy: (lhs - rhs).abs(),
                });
            }
        }
        Ok(CheckReport::new("independence", &self.name, 1e-12, entries))
    }

    /// Exact expectation set of coordinate `i`: the hull of kernel means.
    pub fn theta_exact(&self, i: usize) -> Result<ConvexBody> {
        let means = self.kernel_means(i);
        if self.d == 1 {
            let lo = means.iter().map(|m| m[0]).fold(f64::INFINITY, f64::min);
            let hi = means.iter().map(|m| m[0]).fold(f64::NEG_INFINITY, f64::max);
            ConvexBody::interval_1d(lo, hi)
        } else {
            ConvexBody::polytope(convex_sets::hull_points(means, self.d))
        }
    }

    /// Compares the support function of [`theta_exact`](Self::theta_exact)
    /// with `g_i(p) = Ê[⟨p, X_i⟩]` on `probes` directions.
    pub fn check_theta(&self, i: usize, probes: usize) -> Result<CheckReport> {
        let body = self.theta_exact(i)?;
        let mut entries = Vec::with_capacity(probes);
        for k in 0..probes {
            let p = probe_direction(self.d, k, probes);
            let lhs = body.support_function(&p)?;
            let rhs = self.marginal_expect(i, &|x| dot(&p, x));
            entries.push(CheckEntry {
                index: i,
                function: format!("probe_{k}"),
                lhs,
                rhs,
                discrepancy: (lhs - rhs).abs(),
            });
        }
        Ok(CheckReport::new("theta_support", &self.name, 1e-12, entries))
    }

    /// `Θ_i` hulls averaged: the target set of the sample mean.
    pub fn theta_average(&self) -> Result<ConvexBody> {
        let bodies = (0..self.n).map(|i| self.theta_exact(i)).collect::<Result<Vec<_>>>()?;
        convex_sets::minkowski_average(&bodies)
    }

    /// `σ̄ₙ² = max_i min_θ max_{P} E_P|X_i − θ|²`, solved exactly as the
    /// largest variance of a mixture of the coordinate's laws.
    pub fn sigma_bar_sq(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (means, vars): (Vec<_>, Vec<_>) =
                    self.kernels[i].iter().map(|p| moments(&self.atoms[i], p)).unzip();
                max_mixture_variance(&means, &vars)
            })
            .fold(0.0, f64::max)
    }

    /// Conditional expectations of `φ(X_i)` given every reachable history,
    /// under every extreme measure, against `Ê[φ(X_i)]`.
    pub fn verify_conditional_domination(&self) -> Result<CheckReport> {
        let mut entries = Vec::new();
        for i in 0..self.n {
            let theta = self.theta_exact(i)?;
            let mut phis: Vec<(String, Box<dyn Fn(&[f64]) -> f64>)> = Vec::new();
            for (k, c) in theta_grid(&theta, &self.kernel_means(i)).into_iter().enumerate() {
                phis.push((format!("sq_dev_{k}"), Box::new(move |x: &[f64]| {
                    x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum()
                })));
            }
            phis.push(("first_coord".into(), Box::new(|x: &[f64]| x[0])));
            phis.push(("neg_norm".into(), Box::new(|x: &[f64]| -norm(x))));
            phis.push(("sin".into(), Box::new(|x: &[f64]| (2.0 * x[0]).sin())));

            let histories = self.history_masses(i);
            for (name, phi) in &phis {
                let sublinear = self.marginal_expect(i, phi.as_ref());
                let vals: Vec<f64> = self.atoms[i].iter().map(|a| phi(a)).collect();
                let mut worst = f64::NEG_INFINITY;
                for (mass, law) in &histories {
                    // P(history, X_i = a) = mass · law[a]
                    let joint: f64 = law.iter().zip(&vals).map(|(w, v)| mass * w * v).sum();
                    let marginal: f64 = law.iter().map(|w| mass * w).sum();
                    worst = worst.max(joint / marginal);
                }
                entries.push(CheckEntry {
                    index: i,
                    function: name.clone(),
                    lhs: worst,
                    rhs: sublinear,
                    discrepancy: (worst - sublinear).max(0.0),
                });
            }
        }
        Ok(CheckReport::new("conditional_domination", &self.name, 1e-12, entries))
    }

    /// Pairs `(history mass, law of X_i)` over every history `(x_1..x_{i−1})`
    /// and every extreme measure charging it. For explicit products the law
    /// at step `i` is the extreme's own marginal; an adapted selection can
    /// use any kernel of `K_i` at any history it reaches.
    fn history_masses(&self, i: usize) -> Vec<(f64, &Vec<f64>)> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; i];
        for _ in 0..self.joint_count(i) {
            match self.structure {
                PriorStructure::Rectangular => {
                    let mass: f64 = idx
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| self.kernels[j].iter().map(|p| p[a]).fold(0.0, f64::max))
                        .product();
                    if mass > 0.0 {
                        out.extend(self.kernels[i].iter().map(|law| (mass, law)));
                    }
                }
                PriorStructure::Explicit => {
                    for ext in &self.extremes {
                        let mass: f64 = idx.iter().enumerate().map(|(j, &a)| ext[j][a]).product();
                        if mass > 0.0 {
                            out.push((mass, &ext[i]));
                        }
                    }
                }
            }
            for j in (0..i).rev() {
                idx[j] += 1;
                if idx[j] < self.atoms[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
        out
    }

    /// `Ê[ρ_Θ²(X̄ₙ)] ≤ σ̄ₙ²/n` by full enumeration.
    pub fn verify_moment_inequality(&self) -> Result<MomentReport> {
        let count = self.joint_count(self.n);
        if count.saturating_mul(self.n) > ATOM_CAP {
            return Err(Error::AtomCap {
                count: count.saturating_mul(self.n),
                cap: ATOM_CAP,
            });
        }
        let theta = self.theta_average()?;
        let n = self.n as f64;
        let failure = std::cell::Cell::new(None);
        let lhs = self.sublinear_expect(self.n, &|xs| {
            let mut mean = vec![0.0; self.d];
            for x in xs {
                for (m, v) in mean.iter_mut().zip(x.iter()) {
                    *m += v / n;
                }
            }
            match theta.distance_to(&mean) {
                Ok(r) => r * r,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        })?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let sigma_bar_sq = self.sigma_bar_sq();
        let rhs = sigma_bar_sq / n;
        Ok(MomentReport {
            space: self.name.clone(),
            lhs,
            sigma_bar_sq,
            rhs,
            slack: rhs - lhs,
            passed: lhs <= rhs + 1e-12,
        })
    }
}

/// Every check on one space.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub space: String,
    pub structure: PriorStructure,
    pub n: usize,
    pub d: usize,
    pub expect_independent: Option<bool>,
    pub independence: CheckReport,
    pub theta: Vec<CheckReport>,
    pub domination: CheckReport,
    pub moment: MomentReport,
    /// All checks pass, except independence, which must match
    /// `expect_independent` (default: independent).
    pub verdict_ok: bool,
}

impl FiniteSpace {
    pub fn run_suite(&self, probes: usize, seed: u64) -> Result<SuiteReport> {
        let independence = self.check_independence(&standard_test_functions(seed))?;
        let theta = (0..self.n).map(|i| self.check_theta(i, probes)).collect::<Result<Vec<_>>>()?;
        let domination = self.verify_conditional_domination()?;
        let moment = self.verify_moment_inequality()?;
        let verdict_ok = independence.passed == self.expect_independent.unwrap_or(true)
            && theta.iter().all(|r| r.passed)
            && domination.passed
            && moment.passed;
        Ok(SuiteReport {
            space: self.name.clone(),
            structure: self.structure,
            n: self.n,
            d: self.d,
            expect_independent: self.expect_independent,
            independence,
            theta,
            domination,
            moment,
            verdict_ok,
        })
    }
}

/// Deterministic probe directions: `±1` multiples in d = 1, angles on the
/// circle in d = 2, a golden-ratio spiral family otherwise.
pub fn probe_direction(d: usize, k: usize, total: usize) -> Vec<f64> {
    match d {
        1 => vec![if k % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + (k / 2) as f64 * 0.25)],
        2 => {
            let a = std::f64::consts::TAU * k as f64 / total as f64;
            vec![a.cos(), a.sin()]
        }
        _ => {
            let golden = 0.618_033_988_749_895_f64;
            let v: Vec<f64> = (0..d)
                .map(|c| ((k as f64 + 1.0) * golden * (c as f64 + 1.0) * 7.0).fract() * 2.0 - 1.0)
                .collect();
            let len = norm_sq(&v).sqrt().max(1e-300);
            v.iter().map(|x| x / len).collect()
        }
    }
}

/// Grid of centers over an expectation set: the kernel means, their
/// centroid, and midpoints (every point lies in the hull).
fn theta_grid(body: &ConvexBody, means: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut grid: Vec<Vec<f64>> = means.to_vec();
    if let crate::convex_sets::Shape::Interval { lo, hi } = body.shape() {
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            grid.push(lo.iter().zip(hi).map(|(l, h)| l + s * (h - l)).collect());
        }
    }
    let d = means[0].len();
    let centroid: Vec<f64> = (0..d)
        .map(|c| means.iter().map(|m| m[c]).sum::<f64>() / means.len() as f64)
        .collect();
    for a in means {
        grid.push(a.iter().zip(&centroid).map(|(x, y)| 0.5 * (x + y)).collect());
    }
    grid.push(centroid);
    grid
}

/// Reference spaces shipped with the library.
pub fn reference_spaces() -> Vec<FiniteSpace> {
    [
        include_str!("../data/trivial.toml"),
        include_str!("../data/shift_three_atom.toml"),
        include_str!("../data/negative_control.toml"),
    ]
    .iter()
    .map(|src| toml::from_str::<FiniteSpace>(src).expect("shipped space parses"))
    .collect()
}
