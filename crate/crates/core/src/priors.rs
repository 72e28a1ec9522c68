//! Parametric prior families realizing the prior set by its extreme
//! product measures.
//!
//! * `UniformShift { a, r }` (d = 1): `P_μ = ⊗ Uniform[μ_i − r, μ_i + r]`
//!   for `μ ∈ [−a, a]^n`.
//! * `BallShift { a, r, theta1 }` (d ≥ 2): `X_i` uniform on the radius-`r`
//!   ball centered at `μ_i ∈ Θ₁`, with `Θ₁` inside the radius-`a` ball.
//! * `Discrete`: the extreme measures of a [`FiniteSpace`].
//!
//! Only extreme measures are ever sampled: suprema of expectations over a
//! convex hull are attained at its extreme points.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::convex_sets::{self, ConvexBody};
use crate::error::{check_dim, Error, Result};
use crate::oracle::FiniteSpace;
use crate::qp::max_mixture_variance;
use crate::rng::{self, StreamRng};
use crate::vector::{norm, normalized};

/// Relative slack in admissibility and support checks.
const ADMISSIBLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    UniformShift { a: f64, r: f64 },
    BallShift { a: f64, r: f64, theta1: ConvexBody },
    Discrete(Arc<FiniteSpace>),
}

/// A family of product priors on `(X_1, …, X_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorFamily {
    kind: FamilyKind,
    n: usize,
    d: usize,
    m_bound: f64,
}

/// One extreme product measure of a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PriorPoint {
    /// Per-coordinate shifts `μ_i` (length-1 vectors for d = 1).
    Shift { mu: Vec<Vec<f64>> },
    /// Index of a listed extreme measure of a finite space.
    Discrete { extreme: usize },
}

impl PriorPoint {
    /// Constant shift `μ_i = mu` for all `n` coordinates.
    pub fn constant(mu: Vec<f64>, n: usize) -> Self {
        PriorPoint::Shift { mu: vec![mu; n] }
    }
}

impl PriorFamily {
    pub fn uniform_shift(a: f64, r: f64, n: usize) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift bound a = {a} must be >= 0")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius r = {r} must be > 0")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Ok(Self {
            kind: FamilyKind::UniformShift { a, r },
            n,
            d: 1,
            m_bound: a + r,
        })
    }

    /// Ball-shift family; `theta1` must lie in the closed radius-`a` ball.
    pub fn ball_shift(a: f64, r: f64, n: usize, theta1: ConvexBody) -> Result<Self> {
        let d = theta1.dim();
        if d < 2 {
            return Err(Error::InvalidParameter("ball shift family needs d >= 2".into()));
        }
        if !(a >= 0.0 && a.is_finite()) || !(r > 0.0 && r.is_finite()) || n == 0 {
            return Err(Error::InvalidParameter(format!("need a >= 0, r > 0, n >= 1 (a = {a}, r = {r}, n = {n})")));
        }
        let reach = theta1.max_norm();
        if reach > a * (1.0 + ADMISSIBLE_TOL) + ADMISSIBLE_TOL {
            return Err(Error::InvalidParameter(format!(
                "theta1 reaches norm {reach}, outside the radius-{a} ball"
            )));
        }
        Ok(Self {
            kind: FamilyKind::BallShift { a, r, theta1 },
            n,
            d,
            m_bound: a + r,
        })
    }

    pub fn discrete(space: Arc<FiniteSpace>) -> Self {
        Self {
            n: space.n(),
            d: space.d(),
            m_bound: space.m_bound(),
            kind: FamilyKind::Discrete(space),
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    /// Almost-sure bound `M` on `|X_i|`.
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// Same family with a different number of coordinates.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        match &self.kind {
            FamilyKind::UniformShift { a, r } => Self::uniform_shift(*a, *r, n),
            FamilyKind::BallShift { a, r, theta1 } => Self::ball_shift(*a, *r, n, theta1.clone()),
            FamilyKind::Discrete(_) => Err(Error::InvalidParameter(
                "a finite space fixes its own n".into(),
            )),
        }
    }

    pub fn check_admissible(&self, prior: &PriorPoint) -> Result<()> {
        match (&self.kind, prior) {
            (FamilyKind::UniformShift { a, .. }, PriorPoint::Shift { mu }) => {
                check_dim(self.n, mu.len())?;
                for (i, m) in mu.iter().enumerate() {
                    check_dim(1, m.len())?;
                    if !(m[0].abs() <= a * (1.0 + ADMISSIBLE_TOL)) {
                        return Err(Error::InadmissiblePrior(format!("mu[{i}] = {} outside [-{a}, {a}]", m[0])));
                    }
                }
                Ok(())
            }
            (FamilyKind::BallShift { theta1, .. }, PriorPoint::Shift { mu }) => {
                check_dim(self.n, mu.len())?;
                for (i, m) in mu.iter().enumerate() {
                    check_dim(self.d, m.len())?;
                    let gap = theta1.distance_to(m)?;
                    if gap > 1e-9 {
                        return Err(Error::InadmissiblePrior(format!("mu[{i}] lies {gap:e} outside theta1")));
                    }
                }
                Ok(())
            }
            (FamilyKind::Discrete(space), PriorPoint::Discrete { extreme }) => {
                if *extreme < space.extremes().len() {
                    Ok(())
                } else {
                    Err(Error::InadmissiblePrior(format!("no extreme measure {extreme}")))
                }
            }
            _ => Err(Error::InadmissiblePrior("prior kind does not match family".into())),
        }
    }

    /// One draw of `(X_1, …, X_n)` under `prior`, on stream `(0, 0)` of `seed`.
    pub fn sample(&self, prior: &PriorPoint, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.check_admissible(prior)?;
        let mut rng = rng::stream(seed, 0, 0);
        Ok(self.draw(prior, &mut rng))
    }

    /// Draws `(X_1, …, X_n)`; the prior must already be admissible.
    pub fn draw(&self, prior: &PriorPoint, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n);
        let mut buf = vec![0.0; self.d];
        for i in 0..self.n {
            self.draw_coordinate(prior, i, rng, &mut buf);
            out.push(buf.clone());
        }
        out
    }

    /// Writes `X_i` into `out`. Panics if the draw leaves the `|x| ≤ M` support.
    pub(crate) fn draw_coordinate(&self, prior: &PriorPoint, i: usize, rng: &mut StreamRng, out: &mut [f64]) {
        match (&self.kind, prior) {
            (FamilyKind::UniformShift { r, .. }, PriorPoint::Shift { mu }) => {
                let u: f64 = rng.random();
                out[0] = mu[i][0] + r * (2.0 * u - 1.0);
            }
            (FamilyKind::BallShift { r, .. }, PriorPoint::Shift { mu }) => {
                let d = self.d;
                loop {
                    for v in out.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    let len = norm(out);
                    if len > 0.0 {
                        let radius = r * rng.random::<f64>().powf(1.0 / d as f64);
                        for (v, m) in out.iter_mut().zip(&mu[i]) {
                            *v = m + *v * radius / len;
                        }
                        break;
                    }
                }
            }
            (FamilyKind::Discrete(space), PriorPoint::Discrete { extreme }) => {
                let law = &space.extremes()[*extreme][i];
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = law.iter().rposition(|w| *w > 0.0).unwrap_or(0);
                for (k, w) in law.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = k;
                        break;
                    }
                }
                out.copy_from_slice(&space.atoms(i)[pick]);
            }
            _ => unreachable!("prior checked against family"),
        }
        let len = norm(out);
        assert!(
            len <= self.m_bound * (1.0 + 1e-12) + 1e-12,
            "draw |X_{i}| = {len} exceeds M = {}",
            self.m_bound
        );
    }

    /// Expectation set `Θ_i` (0-based index).
    pub fn mean_set(&self, i: usize) -> Result<ConvexBody> {
        if i >= self.n {
            return Err(Error::InvalidParameter(format!("index {i} out of range for n = {}", self.n)));
        }
        match &self.kind {
            FamilyKind::UniformShift { a, .. } => ConvexBody::interval_1d(-a, *a),
            FamilyKind::BallShift { theta1, .. } => Ok(theta1.clone()),
            FamilyKind::Discrete(space) => space.theta_exact(i),
        }
    }

    /// Minkowski average `Θ` of the expectation sets.
    pub fn theta(&self) -> Result<ConvexBody> {
        match &self.kind {
            FamilyKind::Discrete(space) => space.theta_average(),
            _ => self.mean_set(0),
        }
    }

    /// Mean of the centered shift law's squared norm: `E|U|² = d r²/(d + 2)`
    /// for `U` uniform on the radius-`r` ball (`r²/3` when d = 1).
    fn spread_second_moment(&self, r: f64) -> f64 {
        let d = self.d as f64;
        d * r * r / (d + 2.0)
    }

    /// `σ̄ₙ² = sup_i inf_{θ ∈ Θ_i} sup_P E_P|X_i − θ|²`.
    ///
    /// For shift families `E_{P_μ}|X_i − θ|² = |μ_i − θ|² + E|U|²`; the inner
    /// supremum over `μ_i` is attained at a farthest point of the shift set.
    /// The outer minimization runs golden-section search over θ in d = 1.
    /// For d ≥ 2 it is the squared radius of the smallest ball enclosing
    /// `Θ₁`, exact for boxes and balls and obtained from the mixture-variance
    /// program over vertices for polytopes.
    pub fn sigma_bar_sq(&self) -> Result<f64> {
        match &self.kind {
            FamilyKind::UniformShift { a, r } => {
                let spread = self.spread_second_moment(*r);
                if *a == 0.0 {
                    return Ok(spread);
                }
                let worst = |theta: f64| (a - theta).abs().max((a + theta).abs()).powi(2);
                let (theta, value) = golden_section(worst, -a, *a, 1e-10);
                if (theta.abs() - a).abs() < 1e-6 * a {
                    return Err(Error::CoarseGrid(format!("minimizer θ = {theta} on the boundary of [-{a}, {a}]")));
                }
                Ok(value + spread)
            }
            FamilyKind::BallShift { r, theta1, .. } => {
                let spread = self.spread_second_moment(*r);
                let enclosing = match theta1.shape() {
                    convex_sets::Shape::Interval { lo, hi } => {
                        lo.iter().zip(hi).map(|(l, h)| ((h - l) / 2.0).powi(2)).sum()
                    }
                    convex_sets::Shape::Ball { radius, .. } => radius * radius,
                    convex_sets::Shape::Polytope { vertices } => {
                        max_mixture_variance(vertices, &vec![0.0; vertices.len()])
                    }
                };
                Ok(enclosing + spread)
            }
            FamilyKind::Discrete(space) => Ok(space.sigma_bar_sq()),
        }
    }

    /// Extreme shift assignments aligned and anti-aligned with `direction`,
    /// plus `random` corners drawn from stream `(u32::MAX, 0)` of `seed`.
    ///
    /// d = 1: `μ ≡ a·sign` and `μ ≡ −a·sign`; a random corner picks each
    /// `μ_i = ±a` independently. Ball shift: `μ_i` is the support point of
    /// `Θ₁` in direction `±ν`, or in a random direction per coordinate.
    pub fn corner_priors(&self, direction: &[f64], random: usize, seed: u64) -> Result<Vec<PriorPoint>> {
        check_dim(self.d, direction.len())?;
        let nu = normalized(direction)
            .ok_or_else(|| Error::InvalidParameter("direction must be nonzero".into()))?;
        let neg: Vec<f64> = nu.iter().map(|x| -x).collect();
        let mut rng = rng::stream(seed, u32::MAX, 0);
        let mut out: Vec<PriorPoint> = Vec::new();
        let push = |p: PriorPoint, out: &mut Vec<PriorPoint>| {
            if !out.contains(&p) {
                out.push(p);
            }
        };
        match &self.kind {
            FamilyKind::UniformShift { a, .. } => {
                let s = nu[0].signum();
                push(PriorPoint::constant(vec![a * s], self.n), &mut out);
                push(PriorPoint::constant(vec![-a * s], self.n), &mut out);
                for _ in 0..random {
                    let mu = (0..self.n)
                        .map(|_| vec![if rng.random::<bool>() { *a } else { -a }])
                        .collect();
                    push(PriorPoint::Shift { mu }, &mut out);
                }
            }
            FamilyKind::BallShift { theta1, .. } => {
                push(PriorPoint::constant(theta1.support_point(&nu)?, self.n), &mut out);
                push(PriorPoint::constant(theta1.support_point(&neg)?, self.n), &mut out);
                for _ in 0..random {
                    let mut mu = Vec::with_capacity(self.n);
                    for _ in 0..self.n {
                        let dir: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
                        mu.push(theta1.support_point(&dir)?);
                    }
                    push(PriorPoint::Shift { mu }, &mut out);
                }
            }
            FamilyKind::Discrete(space) => {
                for e in 0..space.extremes().len() {
                    push(PriorPoint::Discrete { extreme: e }, &mut out);
                }
            }
        }
        Ok(out)
    }

    /// Mean vector `E_P[X_i]` for every coordinate under `prior`.
    pub fn prior_means(&self, prior: &PriorPoint) -> Vec<Vec<f64>> {
        match (&self.kind, prior) {
            (FamilyKind::Discrete(space), PriorPoint::Discrete { extreme }) => (0..self.n)
                .map(|i| {
                    let law = &space.extremes()[*extreme][i];
                    let mut m = vec![0.0; self.d];
                    for (atom, w) in space.atoms(i).iter().zip(law) {
                        for (mm, x) in m.iter_mut().zip(atom) {
                            *mm += w * x;
                        }
                    }
                    m
                })
                .collect(),
            (_, PriorPoint::Shift { mu }) => mu.clone(),
            _ => panic!("prior kind does not match family"),
        }
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_support_and_moments() {
        let fam = PriorFamily::uniform_shift(0.0, 1.0, 50).unwrap();
        let x = fam.sample(&PriorPoint::constant(vec![0.0], 50), 3).unwrap();
        assert!(x.iter().all(|v| v[0].abs() <= 1.0));

        let fam = PriorFamily::uniform_shift(1.0, 0.5, 1000).unwrap();
        let prior = PriorPoint::constant(vec![1.0], 1000);
        let mut rng = rng::stream(11, 0, 0);
        let draws: Vec<f64> = (0..1000).flat_map(|_| fam.draw(&prior, &mut rng)).map(|v| v[0]).collect();
        assert!(draws.iter().all(|x| (0.5..=1.5).contains(x)));
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = (0.25f64 / 3.0).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sd / n.sqrt(), "mean {mean}");
        // Var of the sample variance for a uniform: (μ4 − σ⁴)/N with μ4 = 9σ⁴/5
        let se_var = ((9.0 / 5.0 - 1.0) * sd.powi(4) / n).sqrt();
        assert!((var - 0.25 / 3.0).abs() < 4.0 * se_var, "var {var}");
    }

    #[test]
    fn mean_sets() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 4).unwrap();
        assert_eq!(fam.mean_set(2).unwrap(), ConvexBody::interval_1d(-1.0, 1.0).unwrap());
        let fam0 = PriorFamily::uniform_shift(0.0, 0.5, 4).unwrap();
        assert_eq!(fam0.theta().unwrap(), ConvexBody::interval_1d(0.0, 0.0).unwrap());
        assert!(fam.mean_set(4).is_err());
    }

    #[test]
    fn sigma_bar_sq_uniform() {
        let r = 0.8;
        let fam = PriorFamily::uniform_shift(0.0, r, 3).unwrap();
        assert_abs_diff_eq!(fam.sigma_bar_sq().unwrap(), r * r / 3.0, epsilon = 1e-15);

        // Nested grid oracle: min over θ of max over μ of (μ−θ)² + r²/3.
        let (a, r) = (1.0, 0.5);
        let grid = |k: usize, m: usize| -a + 2.0 * a * k as f64 / m as f64;
        let oracle = (0..=2000)
            .map(|i| {
                let th = grid(i, 2000);
                (0..=200).map(|j| (grid(j, 200) - th).powi(2)).fold(0.0, f64::max) + r * r / 3.0
            })
            .fold(f64::INFINITY, f64::min);
        let fam = PriorFamily::uniform_shift(a, r, 3).unwrap();
        let got = fam.sigma_bar_sq().unwrap();
        assert_abs_diff_eq!(oracle, 1.0 + 0.25 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(got, 1.083_333_333_333_333_3, epsilon = 1e-9);
    }

    #[test]
    fn sigma_bar_sq_ball_shift() {
        let d = 3;
        let r = 0.4;
        let spread = d as f64 * r * r / (d as f64 + 2.0);
        let ball = ConvexBody::ball(vec![0.0; 3], 0.6).unwrap();
        let fam = PriorFamily::ball_shift(0.6, r, 5, ball).unwrap();
        assert_abs_diff_eq!(fam.sigma_bar_sq().unwrap(), 0.36 + spread, epsilon = 1e-15);

        // Triangle: the enclosing radius of an obtuse triangle is half the long side.
        let tri = ConvexBody::polytope(vec![vec![-0.5, 0.0], vec![0.5, 0.0], vec![0.0, 0.1]]).unwrap();
        let fam = PriorFamily::ball_shift(0.6, r, 5, tri).unwrap();
        let spread2 = 2.0 * r * r / 4.0;
        assert_abs_diff_eq!(fam.sigma_bar_sq().unwrap(), 0.25 + spread2, epsilon = 1e-12);
    }

    #[test]
    fn ball_shift_samples_inside_ball() {
        let body = ConvexBody::interval(vec![-0.3, -0.3], vec![0.3, 0.3]).unwrap();
        let fam = PriorFamily::ball_shift(0.5, 0.5, 200, body).unwrap();
        let prior = fam.corner_priors(&[1.0, 1.0], 0, 0).unwrap().remove(0);
        let x = fam.sample(&prior, 5).unwrap();
        for (xi, mu) in x.iter().zip(fam.prior_means(&prior)) {
            assert!(crate::vector::dist(xi, &mu) <= 0.5 + 1e-12);
        }
        assert_eq!(fam.prior_means(&prior)[0], vec![0.3, 0.3]);
    }

    #[test]
    fn corner_priors_examples() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 3).unwrap();
        let c = fam.corner_priors(&[1.0], 4, 9).unwrap();
        assert_eq!(c[0], PriorPoint::constant(vec![1.0], 3));
        assert_eq!(c[1], PriorPoint::constant(vec![-1.0], 3));
        assert!(c.iter().all(|p| fam.check_admissible(p).is_ok()));

        let fam0 = PriorFamily::uniform_shift(0.0, 0.5, 3).unwrap();
        assert_eq!(fam0.corner_priors(&[1.0], 5, 9).unwrap(), vec![PriorPoint::constant(vec![0.0], 3)]);

        let ball = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let fam = PriorFamily::ball_shift(1.0, 0.2, 2, ball).unwrap();
        let c = fam.corner_priors(&[0.0, 2.0], 0, 0).unwrap();
        assert_eq!(c[0], PriorPoint::constant(vec![0.0, 1.0], 2));
    }

    #[test]
    fn inadmissible_priors_rejected() {
        let fam = PriorFamily::uniform_shift(1.0, 0.5, 2).unwrap();
        let bad = PriorPoint::Shift { mu: vec![vec![1.5], vec![0.0]] };
        assert!(matches!(fam.sample(&bad, 0), Err(Error::InadmissiblePrior(_))));
        let short = PriorPoint::Shift { mu: vec![vec![0.0]] };
        assert!(fam.sample(&short, 0).is_err());
        assert!(fam.sample(&PriorPoint::Discrete { extreme: 0 }, 0).is_err());
        assert!(PriorFamily::uniform_shift(-1.0, 0.5, 2).is_err());
        assert!(PriorFamily::uniform_shift(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn discrete_family_mean_set_and_sigma() {
        let src = r#"
            name = "two"
            n = 2
            d = 1
            structure = "explicit"
            [[coordinates]]
            atoms = [[0.0], [1.0]]
            [[extremes]]
            marginals = [[0.8, 0.2]]
            [[extremes]]
            marginals = [[0.4, 0.6]]
        "#;
        let space: FiniteSpace = toml::from_str(src).unwrap();
        let fam = PriorFamily::discrete(Arc::new(space.clone()));
        assert_eq!(fam.mean_set(0).unwrap(), ConvexBody::interval_1d(0.2, 0.6).unwrap());
        assert_eq!(fam.sigma_bar_sq().unwrap(), space.sigma_bar_sq());
        let x = fam.sample(&PriorPoint::Discrete { extreme: 1 }, 4).unwrap();
        assert!(x.iter().all(|v| v[0] == 0.0 || v[0] == 1.0));
    }
}
