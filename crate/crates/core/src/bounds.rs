//! Closed-form tail bounds for `V̂(ρ_Θ(X̄ₙ) > t)`, the regime classifier,
//! the layer-cake moment bound, the uniform rate function and the
//! sharpness lower bound.
//!
//! Every bound has the form `prefactor · exp(−exponent)`. The exponent is
//! kept separately and `log10` is computed in log space, so values far
//! below `f64` range stay informative in reports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::martingale::freedman_log_tail;

/// Inputs shared by every bound: `n`, `d`, `M`, `σ̄ₙ²` and `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInput {
    pub n: u64,
    pub d: usize,
    pub m: f64,
    pub sigma_bar_sq: f64,
    pub t: f64,
}

impl BoundInput {
    pub fn new(n: u64, d: usize, m: f64, sigma_bar_sq: f64, t: f64) -> Result<Self> {
        let b = Self { n, d, m, sigma_bar_sq, t };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidParameter("n and d must be >= 1".into()));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!("M = {} must be > 0", self.m)));
        }
        if !(self.sigma_bar_sq >= 0.0 && self.sigma_bar_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_bar_sq = {} must be >= 0", self.sigma_bar_sq)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t = {} must be > 0", self.t)));
        }
        Ok(())
    }

    /// `ρ_Θ(X̄ₙ) ≤ 2M`, so the event is empty beyond `2M`.
    pub fn vacuous(&self) -> bool {
        self.t > 2.0 * self.m
    }

    fn n_f64(&self) -> f64 {
        self.n as f64
    }
}

/// `raw = prefactor · exp(−exponent)`, `clamped = min(1, raw)`.
///
/// `raw` underflows to 0 once the exponent passes about 745; `log10`
/// keeps the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
    pub exponent: f64,
    pub prefactor: f64,
    pub log10: f64,
    pub vacuous: bool,
}

impl BoundValue {
    pub fn from_parts(prefactor: f64, exponent: f64, vacuous: bool) -> Self {
        let ln = prefactor.ln() - exponent;
        let raw = ln.exp();
        Self {
            raw,
            clamped: raw.min(1.0),
            exponent,
            prefactor,
            log10: ln / std::f64::consts::LN_10,
            vacuous,
        }
    }

    /// Clamped value in log10, capped at 0.
    pub fn log10_clamped(&self) -> f64 {
        self.log10.min(0.0)
    }
}

/// Prefactor `2·5^d` of the covering route.
pub fn net_prefactor(d: usize) -> f64 {
    2.0 * 5f64.powi(d as i32)
}

pub fn azuma_bound(b: &BoundInput) -> Result<BoundValue> {
    b.validate()?;
    let exponent = b.n_f64() * b.t * b.t / (32.0 * b.m * b.m);
    Ok(BoundValue::from_parts(net_prefactor(b.d), exponent, b.vacuous()))
}

/// Scalar route for d = 1: prefactor 2, exponent `nt²/(8M²)`.
pub fn azuma_bound_scalar(b: &BoundInput) -> Result<BoundValue> {
    b.validate()?;
    if b.d != 1 {
        return Err(Error::InvalidParameter(format!("scalar Azuma bound needs d = 1, got {}", b.d)));
    }
    let exponent = b.n_f64() * b.t * b.t / (8.0 * b.m * b.m);
    Ok(BoundValue::from_parts(2.0, exponent, b.vacuous()))
}

pub fn bernstein_bound(b: &BoundInput) -> Result<BoundValue> {
    b.validate()?;
    let denom = 8.0 * b.sigma_bar_sq + 8.0 * b.m * b.t / 3.0;
    let exponent = b.n_f64() * b.t * b.t / denom;
    Ok(BoundValue::from_parts(net_prefactor(b.d), exponent, b.vacuous()))
}

pub fn dimfree_bound(b: &BoundInput) -> Result<BoundValue> {
    b.validate()?;
    let denom = 2.0 * b.sigma_bar_sq + 4.0 * b.m * b.t / 3.0;
    let exponent = b.n_f64() * b.t * b.t / denom;
    Ok(BoundValue::from_parts(b.d as f64 + 1.0, exponent, b.vacuous()))
}

/// `2·5^d·Ψ(nt/2)` for a tail function Ψ.
///
/// Ψ is probed on a geometric grid around `nt/2`; it must take values in
/// `[0, 1]` and be nonincreasing there.
pub fn general_bound(n: u64, d: usize, t: f64, psi: impl Fn(f64) -> f64) -> Result<BoundValue> {
    general_bound_log(n, d, t, |s| psi(s).ln())
}

/// [`general_bound`] for a tail given as `ln Ψ`, which avoids underflow.
pub fn general_bound_log(n: u64, d: usize, t: f64, ln_psi: impl Fn(f64) -> f64) -> Result<BoundValue> {
    if n == 0 || d == 0 || !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("need n, d >= 1 and t > 0 (n = {n}, d = {d}, t = {t})")));
    }
    let s0 = n as f64 * t / 2.0;
    let mut prev = f64::INFINITY;
    for k in -40..=40 {
        let s = s0 * 2f64.powf(k as f64 / 8.0);
        let v = ln_psi(s);
        if v.is_nan() || v > 1e-15 {
            return Err(Error::NotDecreasing(s));
        }
        if v > prev + 1e-12 * prev.abs().max(1.0) {
            return Err(Error::NotDecreasing(s));
        }
        prev = v;
    }
    let ln = ln_psi(s0);
    Ok(BoundValue::from_parts(net_prefactor(d), -ln, false))
}

/// Azuma tail `Ψ(s) = exp(−s²/(8nM²))`, as `ln Ψ`.
pub fn azuma_log_tail(s: f64, n: u64, m: f64) -> f64 {
    -s * s / (8.0 * n as f64 * m * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SubGaussian,
    SubExponential,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SubGaussian => "sub_gaussian",
            Regime::SubExponential => "sub_exponential",
        })
    }
}

/// Sub-Gaussian iff `t ≤ 3σ̄²/M` (ties included). Accepts `t = 0`.
pub fn regime_classify(m: f64, sigma_bar_sq: f64, t: f64) -> Regime {
    if t <= 3.0 * sigma_bar_sq / m {
        Regime::SubGaussian
    } else {
        Regime::SubExponential
    }
}

/// Layer-cake integral `∫₀^{(2M)²} min(1, bernstein(√s)) ds`, an upper
/// estimate of `Ê[ρ_Θ²(X̄ₙ)]`. Absolute tolerance 1e-10.
///
/// The integrand is 1 up to the crossing `s* = t*²` where the raw bound
/// reaches 1; past it the integral runs in `t` (`ds = 2t dt`) on panels
/// whose edges grow geometrically from `t*`.
pub fn moment_bound(n: u64, d: usize, m: f64, sigma_bar_sq: f64) -> Result<f64> {
    BoundInput::new(n, d, m, sigma_bar_sq, 1.0)?;
    let nf = n as f64;
    let ln_pref = net_prefactor(d).ln();
    let top = 2.0 * m;
    // n t² = L (8σ² + 8Mt/3)
    let p = 8.0 * ln_pref * m / 3.0;
    let t_star = (p + (p * p + 32.0 * nf * ln_pref * sigma_bar_sq).sqrt()) / (2.0 * nf);
    if t_star >= top {
        return Ok(top * top);
    }
    let f = |t: f64| {
        let exponent = nf * t * t / (8.0 * sigma_bar_sq + 8.0 * m * t / 3.0);
        2.0 * t * (ln_pref - exponent).exp().min(1.0)
    };
    const TOL: f64 = 1e-10;
    let mut total = t_star * t_star;
    let mut lo = t_star;
    let ratio = 2f64.powf(0.25);
    let panels = ((top / t_star).ln() / ratio.ln()).ceil().max(1.0);
    let panel_tol = TOL / panels;
    while lo < top {
        let hi = (lo * ratio).min(top);
        // Remaining mass is below f(lo)·(top − lo) since f decreases past t*.
        if f(lo) * (top - lo) < 1e-3 * TOL {
            break;
        }
        total += adaptive_simpson(&f, lo, hi, panel_tol, 50)?;
        lo = hi;
    }
    Ok(total)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let c = 0.5 * (a + b);
    let (l, r) = (0.5 * (a + c), 0.5 * (c + b));
    let (fl, fr) = (f(l), f(r));
    let left = (c - a) / 6.0 * (fa + 4.0 * fl + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fr + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(delta.abs()));
    }
    Ok(simpson_step(f, a, c, fa, fc, fl, left, tol / 2.0, depth - 1)?
        + simpson_step(f, c, b, fc, fb, fr, right, tol / 2.0, depth - 1)?)
}

/// Smallest `C ≥ 0` with `value ≤ 16σ̄²(1 + d ln 5 + ln 2)/n + C·M²/n²`
/// over the given `(n, d, M, σ̄², value)` points. A diagnostic only.
pub fn fit_moment_constant(points: &[(u64, usize, f64, f64, f64)]) -> f64 {
    points
        .iter()
        .map(|&(n, d, m, s2, value)| {
            let nf = n as f64;
            let lead = 16.0 * s2 * (1.0 + d as f64 * 5f64.ln() + 2f64.ln()) / nf;
            (value - lead) * nf * nf / (m * m)
        })
        .fold(0.0, f64::max)
}

/// `Λ*(u) = ½[(1+u)ln(1+u) + (1−u)ln(1−u)]` for the centered uniform law
/// on `[−1, 1]`; `Λ*(±1) = ln 2`.
pub fn rate_function_uniform(u: f64) -> Result<f64> {
    if !(u.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|u| = {} exceeds 1", u.abs())));
    }
    if u.abs() == 1.0 {
        return Ok(std::f64::consts::LN_2);
    }
    Ok(0.5 * ((1.0 + u) * u.ln_1p() + (1.0 - u) * (-u).ln_1p()))
}

/// Power series `Σ_{k≥1} u^{2k}/(2k(2k−1))`, stopped once a term drops
/// below 1e-14. Requires `|u| < 1`.
pub fn rate_function_series(u: f64) -> Result<f64> {
    if !(u.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("series needs |u| < 1, got {u}")));
    }
    let u2 = u * u;
    let mut pow = u2;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        let term = pow / (2.0 * k * (2.0 * k - 1.0));
        sum += term;
        if term < 1e-14 {
            return Ok(sum);
        }
        pow *= u2;
        k += 1.0;
    }
}

/// Rate function of Uniform[−r, r] at `x`: `Λ*(x/r)`.
pub fn rate_function(x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must be > 0")));
    }
    rate_function_uniform(x / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticBound {
    pub value: f64,
    /// `|x| ≤ r/2`
    pub valid: bool,
}

/// `3x²/(2r²)`, with the `|x| ≤ r/2` validity flag.
pub fn rate_quadratic_bound(x: f64, r: f64) -> QuadraticBound {
    QuadraticBound {
        value: 3.0 * x * x / (2.0 * r * r),
        valid: x.abs() <= r / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessBound {
    pub value: f64,
    /// `t ≤ σ/(4√n)`
    pub valid: bool,
    /// Half-width `r = σ√3/2` of the uniform laws in the construction.
    pub r: f64,
}

/// `¼·exp(−2nt²/σ²)`, valid for `t ≤ σ/(4√n)`.
pub fn sharpness_lower_bound(n: u64, sigma: f64, t: f64) -> Result<SharpnessBound> {
    if n == 0 || !(sigma > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("need n >= 1, sigma > 0, t > 0 (n = {n}, sigma = {sigma}, t = {t})")));
    }
    let nf = n as f64;
    Ok(SharpnessBound {
        value: 0.25 * (-2.0 * nf * t * t / (sigma * sigma)).exp(),
        valid: t <= sigma / (4.0 * nf.sqrt()),
        r: sharpness_radius(sigma),
    })
}

/// `r = σ√3/2`, for which `3/(2r²) = 2/σ²`.
pub fn sharpness_radius(sigma: f64) -> f64 {
    sigma * 3f64.sqrt() / 2.0
}

/// `σ = 2r/√3`, the inverse of [`sharpness_radius`].
pub fn sharpness_sigma(r: f64) -> f64 {
    2.0 * r / 3f64.sqrt()
}

/// One line of a bound sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub bound_name: &'static str,
    pub n: u64,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub sigma_sq: f64,
    pub t: f64,
    pub raw: f64,
    pub clamped: f64,
    pub exponent: f64,
    pub prefactor: f64,
    pub regime: Regime,
}

/// Azuma, Bernstein and dimension-free rows for each `t`, grouped by bound.
pub fn sweep(n: u64, d: usize, m: f64, sigma_bar_sq: f64, ts: &[f64]) -> Result<Vec<BoundRow>> {
    type Eval = fn(&BoundInput) -> Result<BoundValue>;
    let evals: [(&'static str, Eval); 3] = [
        ("azuma", azuma_bound),
        ("bernstein", bernstein_bound),
        ("dimfree", dimfree_bound),
    ];
    let mut rows = Vec::with_capacity(3 * ts.len());
    for (name, eval) in evals {
        for &t in ts {
            let input = BoundInput::new(n, d, m, sigma_bar_sq, t)?;
            let v = eval(&input)?;
            rows.push(BoundRow {
                bound_name: name,
                n,
                d,
                m,
                sigma_sq: sigma_bar_sq,
                t,
                raw: v.raw,
                clamped: v.clamped,
                exponent: v.exponent,
                prefactor: v.prefactor,
                regime: regime_classify(m, sigma_bar_sq, t),
            });
        }
    }
    Ok(rows)
}

/// Freedman tail, as used by the Bernstein route: `ln Ψ` at `s`.
pub fn freedman_general_bound(b: &BoundInput) -> Result<BoundValue> {
    general_bound_log(b.n, b.d, b.t, |s| freedman_log_tail(s, b.n, b.sigma_bar_sq, b.m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn input(n: u64, d: usize, m: f64, s2: f64, t: f64) -> BoundInput {
        BoundInput::new(n, d, m, s2, t).unwrap()
    }

    #[test]
    fn azuma_examples() {
        let b = input(1000, 1, 1.0, 0.25, 0.5);
        let v = azuma_bound(&b).unwrap();
        assert_eq!(v.prefactor, 10.0);
        assert_eq!(v.exponent, 7.8125);
        // 10·exp(−7.8125), evaluated with mpmath at 30 digits
        assert_relative_eq!(v.raw, 4.046_451_693_262_645e-3, max_relative = 1e-14);
        let s = azuma_bound_scalar(&b).unwrap();
        assert_eq!(s.exponent, 31.25);
        assert_relative_eq!(s.raw, 5.362_007_735_563_606e-14, max_relative = 1e-14);
        assert!(azuma_bound_scalar(&input(1000, 2, 1.0, 0.25, 0.5)).is_err());
        assert_eq!(azuma_bound(&input(1000, 1, 1.0, 0.25, 1e-9)).unwrap().clamped, 1.0);
    }

    #[test]
    fn bernstein_and_dimfree_examples() {
        let b = input(1000, 1, 1.0, 0.25, 0.5);
        let v = bernstein_bound(&b).unwrap();
        assert_relative_eq!(v.exponent, 75.0, max_relative = 1e-15);
        assert_relative_eq!(v.raw, 2.678_636_961_808_078e-32, max_relative = 1e-13);
        let w = dimfree_bound(&b).unwrap();
        assert_relative_eq!(w.exponent, 214.285_714_285_714_3, max_relative = 1e-15);
        assert_eq!(w.prefactor, 2.0);
        assert_relative_eq!(w.log10, (2f64.ln() - 1500.0 / 7.0) / std::f64::consts::LN_10, max_relative = 1e-15);
        assert!(w.raw <= v.raw);
        let huge = bernstein_bound(&input(10, 1, 1.0, 1e12, 0.5)).unwrap();
        assert_eq!(huge.clamped, 1.0);
    }

    #[test]
    fn log_space_survives_underflow() {
        let v = dimfree_bound(&input(1_000_000, 1, 1.0, 0.0, 2.0)).unwrap();
        assert_eq!(v.raw, 0.0);
        assert!(v.log10 < -100_000.0 && v.log10.is_finite());
        assert!(dimfree_bound(&input(10, 1, 1.0, 0.1, 2.5)).unwrap().vacuous);
    }

    #[test]
    fn general_bound_reproduces_closed_forms() {
        let b = input(1000, 2, 1.3, 0.4, 0.3);
        let g = general_bound(b.n, b.d, b.t, |s| azuma_log_tail(s, b.n, b.m).exp()).unwrap();
        assert_relative_eq!(g.raw, azuma_bound(&b).unwrap().raw, max_relative = 1e-12);
        let g = freedman_general_bound(&b).unwrap();
        assert_relative_eq!(g.raw, bernstein_bound(&b).unwrap().raw, max_relative = 1e-12);
        assert_eq!(general_bound(10, 1, 0.1, |_| 1.0).unwrap().clamped, 1.0);
        assert!(matches!(general_bound(10, 1, 0.1, |s| (s - 3.0).abs().min(1.0)), Err(Error::NotDecreasing(_))));
        assert!(general_bound(10, 1, 0.1, |_| 1.5).is_err());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(regime_classify(1.0, 0.25, 0.0), Regime::SubGaussian);
        assert_eq!(regime_classify(1.0, 0.25, 0.5), Regime::SubGaussian);
        assert_eq!(regime_classify(1.0, 0.1, 0.5), Regime::SubExponential);
        assert_eq!(regime_classify(1.0, 0.25, 0.75), Regime::SubGaussian);
    }

    /// Trapezoid rule on a fine uniform grid in `s`.
    fn moment_oracle(n: u64, d: usize, m: f64, s2: f64) -> f64 {
        let steps = 4_000_000;
        let top = 4.0 * m * m;
        let h = top / steps as f64;
        let g = |s: f64| {
            if s == 0.0 {
                return 1.0;
            }
            bernstein_bound(&input(n, d, m, s2, s.sqrt())).unwrap().clamped
        };
        let mut acc = 0.5 * (g(0.0) + g(top));
        for k in 1..steps {
            acc += g(k as f64 * h);
        }
        acc * h
    }

    #[test]
    fn moment_bound_matches_trapezoid() {
        for (n, d, m, s2) in [(100, 1, 1.0, 0.25), (1000, 2, 1.5, 1.0), (50, 3, 1.0, 0.0), (3, 1, 1.0, 1.0)] {
            let got = moment_bound(n, d, m, s2).unwrap();
            let want = moment_oracle(n, d, m, s2);
            assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        }
        // crossing past 2M: the bound is the whole square
        assert_eq!(moment_bound(1, 1, 1.0, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn moment_bound_rate() {
        let mut prev = moment_bound(1000, 1, 1.0, 0.25).unwrap();
        for n in [2000, 4000, 8000, 16_000, 1_000_000] {
            let v = moment_bound(n, 1, 1.0, 0.25).unwrap();
            assert!(v / prev <= 0.6 || n == 1_000_000);
            prev = v;
        }
        let zero_a = moment_bound(1000, 1, 1.0, 0.0).unwrap();
        let zero_b = moment_bound(10_000, 1, 1.0, 0.0).unwrap();
        assert!(zero_b < zero_a / 50.0);
    }

    #[test]
    fn rate_function_examples() {
        assert_eq!(rate_function_uniform(0.0).unwrap(), 0.0);
        // ½(1.5 ln 1.5 + 0.5 ln 0.5), mpmath at 30 digits
        assert_relative_eq!(rate_function_uniform(0.5).unwrap(), 0.130_812_035_941_136_96, max_relative = 1e-15);
        assert_eq!(rate_function_uniform(1.0).unwrap(), std::f64::consts::LN_2);
        assert_eq!(rate_function_uniform(-1.0).unwrap(), std::f64::consts::LN_2);
        assert!(rate_function_uniform(1.01).is_err());
        assert_abs_diff_eq!(rate_function_series(0.5).unwrap(), 0.130_812_035_941_136_96, epsilon = 1e-13);
        assert!(rate_function_series(1.0).is_err());

        let q = rate_quadratic_bound(0.5, 1.0);
        assert_eq!(q.value, 0.375);
        assert!(q.valid);
        assert!(!rate_quadratic_bound(0.6, 1.0).valid);
        assert_eq!(rate_quadratic_bound(0.0, 1.0).value, 0.0);
        // Series coefficients of the quadratic comparison: Σ 1/(2k(2k−1)) over k ≥ 1 is ln 2 < 3/2.
        let coeff: f64 = (1..200_000).map(|k| 1.0 / (2.0 * k as f64 * (2.0 * k as f64 - 1.0))).sum();
        assert!(coeff < 1.5);
    }

    #[test]
    fn sharpness_examples() {
        let s = sharpness_lower_bound(100, 1.0, 0.02).unwrap();
        assert_relative_eq!(s.value, 0.25 * (-0.08f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(s.value, 0.230_779_086_596_658_95, max_relative = 1e-14);
        assert!(s.valid);
        assert!(!sharpness_lower_bound(100, 1.0, 0.05).unwrap().valid);
        assert_relative_eq!(sharpness_lower_bound(100, 1.0, 1e-9).unwrap().value, 0.25, max_relative = 1e-12);
        let r = sharpness_radius(1.0);
        assert_relative_eq!(3.0 / (2.0 * r * r), 2.0, max_relative = 1e-15);
        assert_relative_eq!(sharpness_sigma(r), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn sweep_shape() {
        let ts: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
        let rows = sweep(1000, 1, 1.0, 0.25, &ts).unwrap();
        assert_eq!(rows.len(), 30);
        for chunk in rows.chunks(10) {
            assert!(chunk.windows(2).all(|w| w[1].clamped <= w[0].clamped));
        }
        assert!(sweep(1000, 1, 1.0, 0.25, &[0.0]).is_err());
    }

    fn tuple() -> impl Strategy<Value = BoundInput> {
        (1u64..1_000_000, 1usize..=8, 0.01..10.0f64, 0.0..1.0f64, 0.001..1.0f64).prop_map(|(n, d, m, s, t)| {
            BoundInput::new(n, d, m, s * 4.0 * m * m, t * 2.0 * m).unwrap()
        })
    }

    proptest! {
        #[test]
        fn monotone_in_t_and_n(b in tuple(), bump in 1.001..2.0f64) {
            for eval in [azuma_bound, bernstein_bound, dimfree_bound] {
                let base = eval(&b).unwrap();
                let bigger_t = eval(&BoundInput { t: b.t * bump, ..b }).unwrap();
                let bigger_n = eval(&BoundInput { n: b.n + 1, ..b }).unwrap();
                let bigger_m = eval(&BoundInput { m: b.m * bump, ..b }).unwrap();
                prop_assert!(bigger_t.log10 < base.log10);
                prop_assert!(bigger_n.log10 < base.log10);
                prop_assert!(bigger_m.log10 > base.log10);
            }
            let s_up = BoundInput { sigma_bar_sq: b.sigma_bar_sq * bump + 1e-3, ..b };
            prop_assert!(bernstein_bound(&s_up).unwrap().log10 > bernstein_bound(&b).unwrap().log10);
            prop_assert!(dimfree_bound(&s_up).unwrap().log10 > dimfree_bound(&b).unwrap().log10);
        }

        #[test]
        fn dimfree_dominated(b in tuple()) {
            prop_assert!(dimfree_bound(&b).unwrap().log10 <= bernstein_bound(&b).unwrap().log10);
            prop_assert!(dimfree_bound(&b).unwrap().raw <= bernstein_bound(&b).unwrap().raw);
        }

        #[test]
        fn sharpness_at_most_quarter(n in 1u64..100_000, sigma in 0.01..10.0f64, t in 1e-6..5.0f64) {
            let s = sharpness_lower_bound(n, sigma, t).unwrap();
            prop_assert!(s.value <= 0.25);
        }
    }
}
