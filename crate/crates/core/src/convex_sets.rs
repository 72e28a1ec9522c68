//! Convex compact bodies in ℝ^d: boxes, Euclidean balls and vertex polytopes.
//!
//! A body answers three questions: its support function `h(p) = sup ⟨θ, p⟩`,
//! the Euclidean projection of a point onto it, and the distance from a point
//! to it. Expectation sets of random vectors and their Minkowski averages are
//! stored as bodies.
//!
//! Polytope projection uses Wolfe's minimum-norm-point iteration on the
//! translated vertex set. It stops once the variational inequality
//! `⟨x − π, v − π⟩ ≤ tol` holds for every vertex `v`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vector::{dot, norm, norm_sq};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 16;

/// Default tolerance of the polytope projection stopping rule.
pub const PROJECTION_TOL: f64 = 1e-9;

/// Default cap on the number of vertex combinations formed in one
/// Minkowski summation step.
pub const COMBINATION_CAP: usize = 1_000_000;

/// Geometric description of a body; also the serialized record.
///
/// ```toml
/// kind = "interval"
/// lo = [-1.0]
/// hi = [1.0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Axis-aligned box `∏ [lo_k, hi_k]`.
    Interval { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Convex hull of a finite vertex list.
    Polytope { vertices: Vec<Vec<f64>> },
}

impl Shape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Shape::Interval { .. } => "interval",
            Shape::Ball { .. } => "ball",
            Shape::Polytope { .. } => "polytope",
        }
    }
}

/// A validated convex compact body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct ConvexBody {
    shape: Shape,
    dim: usize,
}

impl TryFrom<Shape> for ConvexBody {
    type Error = Error;

    fn try_from(shape: Shape) -> Result<Self> {
        let dim = match &shape {
            Shape::Interval { lo, hi } => {
                check_dim(lo.len(), hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::InvalidBody("interval requires lo <= hi".into()));
                }
                lo.len()
            }
            Shape::Ball { center, radius } => {
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidBody(format!("ball radius {radius} must be >= 0")));
                }
                center.len()
            }
            Shape::Polytope { vertices } => {
                let first = vertices
                    .first()
                    .ok_or_else(|| Error::InvalidBody("polytope needs at least one vertex".into()))?;
                for v in vertices {
                    check_dim(first.len(), v.len())?;
                }
                first.len()
            }
        };
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim, 1, MAX_DIM));
        }
        let finite = match &shape {
            Shape::Interval { lo, hi } => lo.iter().chain(hi).all(|x| x.is_finite()),
            Shape::Ball { center, .. } => center.iter().all(|x| x.is_finite()),
            Shape::Polytope { vertices } => vertices.iter().flatten().all(|x| x.is_finite()),
        };
        if !finite {
            return Err(Error::InvalidBody("non-finite coordinate".into()));
        }
        Ok(ConvexBody { shape, dim })
    }
}

impl From<ConvexBody> for Shape {
    fn from(body: ConvexBody) -> Shape {
        body.shape
    }
}

impl ConvexBody {
    pub fn interval(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Shape::Interval { lo, hi }.try_into()
    }

    /// One-dimensional interval `[lo, hi]`.
    pub fn interval_1d(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(vec![lo], vec![hi])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Shape::Ball { center, radius }.try_into()
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Shape::Polytope { vertices }.try_into()
    }

    /// The singleton `{x}`, stored as a degenerate box.
    pub fn point(x: Vec<f64>) -> Result<Self> {
        Self::interval(x.clone(), x)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `h(p) = sup_{θ ∈ body} ⟨θ, p⟩`.
    pub fn support_function(&self, p: &[f64]) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        Ok(match &self.shape {
            Shape::Interval { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(p)
                .map(|((l, h), q)| (l * q).max(h * q))
                .sum(),
            Shape::Ball { center, radius } => dot(center, p) + radius * norm(p),
            Shape::Polytope { vertices } => vertices
                .iter()
                .map(|v| dot(v, p))
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// A maximizer of `⟨θ, p⟩` over the body. Ties among box coordinates
    /// with `p_k = 0` resolve to the midpoint.
    pub fn support_point(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, p.len())?;
        Ok(match &self.shape {
            Shape::Interval { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(p)
                .map(|((l, h), q)| {
                    if *q > 0.0 {
                        *h
                    } else if *q < 0.0 {
                        *l
                    } else {
                        0.5 * (l + h)
                    }
                })
                .collect(),
            Shape::Ball { center, radius } => {
                let len = norm(p);
                if len == 0.0 {
                    center.clone()
                } else {
                    center.iter().zip(p).map(|(c, q)| c + radius * q / len).collect()
                }
            }
            Shape::Polytope { vertices } => {
                let mut best = &vertices[0];
                let mut best_val = dot(best, p);
                for v in &vertices[1..] {
                    let val = dot(v, p);
                    if val > best_val {
                        best = v;
                        best_val = val;
                    }
                }
                best.clone()
            }
        })
    }

    /// `sup_{θ ∈ body} |θ − x|²`, the squared distance to the farthest point.
    pub fn farthest_sq(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.shape {
            Shape::Interval { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(x)
                .map(|((l, h), xi)| (xi - l).abs().max((h - xi).abs()).powi(2))
                .sum(),
            Shape::Ball { center, radius } => {
                let d = crate::vector::dist(center, x) + radius;
                d * d
            }
            Shape::Polytope { vertices } => vertices
                .iter()
                .map(|v| crate::vector::dist(v, x).powi(2))
                .fold(0.0, f64::max),
        })
    }

    /// `sup_{θ ∈ body} |θ|`.
    pub fn max_norm(&self) -> f64 {
        self.farthest_sq(&vec![0.0; self.dim])
            .map(f64::sqrt)
            .unwrap_or(f64::NAN)
    }

    /// Euclidean projection with the default tolerance.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.project_with_tol(x, PROJECTION_TOL)
    }

    pub fn project_with_tol(&self, x: &[f64], tol: f64) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        match &self.shape {
            Shape::Interval { lo, hi } => Ok(x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(xi, (l, h))| xi.clamp(*l, *h))
                .collect()),
            Shape::Ball { center, radius } => {
                let offset = crate::vector::sub(x, center);
                let len = norm(&offset);
                if len <= *radius {
                    Ok(x.to_vec())
                } else {
                    let s = radius / len;
                    Ok(center.iter().zip(&offset).map(|(c, o)| c + s * o).collect())
                }
            }
            Shape::Polytope { vertices } => {
                let shifted: Vec<Vec<f64>> =
                    vertices.iter().map(|v| crate::vector::sub(v, x)).collect();
                let cap = 10 * vertices.len() * self.dim;
                let y = min_norm_point(&shifted, tol, cap.max(10))?;
                Ok(x.iter().zip(&y).map(|(a, b)| a + b).collect())
            }
        }
    }

    /// `ρ(x) = inf_{θ ∈ body} |x − θ|`.
    pub fn distance_to(&self, x: &[f64]) -> Result<f64> {
        let pi = self.project(x)?;
        Ok(crate::vector::dist(x, &pi))
    }

    /// `[lo, hi]` of a one-dimensional body, for Monte Carlo fast paths.
    pub(crate) fn bounds_1d(&self) -> Option<(f64, f64)> {
        if self.dim != 1 {
            return None;
        }
        Some(match &self.shape {
            Shape::Interval { lo, hi } => (lo[0], hi[0]),
            Shape::Ball { center, radius } => (center[0] - radius, center[0] + radius),
            Shape::Polytope { vertices } => vertices.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(l, h), v| (l.min(v[0]), h.max(v[0])),
            ),
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance_to(x)? <= tol)
    }

    /// Vertex list of a polytope body, `None` for other shapes.
    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        match &self.shape {
            Shape::Polytope { vertices } => Some(vertices),
            _ => None,
        }
    }
}

/// Minimum-norm point of `conv(points)` by Wolfe's method.
///
/// Returns the point `y`; the stopping rule is
/// `|y|² − ⟨y, p⟩ ≤ tol · scale` for every input point `p`, where `scale`
/// is `max(1, max |p|²)`.
pub(crate) fn min_norm_point(points: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let scale = points.iter().map(|p| norm_sq(p)).fold(1.0, f64::max);
    let tol_eff = tol * scale;
    let weak_eps = 1e-14;

    let start = (0..points.len())
        .min_by(|&a, &b| norm_sq(&points[a]).total_cmp(&norm_sq(&points[b])))
        .ok_or(Error::Empty("point set"))?;
    let mut active: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut y = points[start].clone();
    let mut gap = f64::INFINITY;

    for _ in 0..max_iter {
        let yy = norm_sq(&y);
        let (j, yp) = points
            .iter()
            .enumerate()
            .map(|(k, p)| (k, dot(&y, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        gap = yy - yp;
        if gap <= tol_eff {
            return Ok(y);
        }
        if active.contains(&j) {
            // Stalled by round-off; accept a near-optimal point.
            if gap <= 1e3 * tol_eff {
                return Ok(y);
            }
            break;
        }
        active.push(j);
        lambda.push(0.0);

        loop {
            let alpha = affine_minimizer(points, &active);
            if alpha.iter().all(|&a| a > weak_eps) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= weak_eps {
                    let denom = l - a;
                    if denom > 0.0 {
                        theta = theta.min(l / denom);
                    }
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let mut k = 0;
            while k < active.len() {
                if lambda[k] <= weak_eps {
                    active.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            if active.len() <= 1 {
                if active.is_empty() {
                    active.push(j);
                    lambda.push(1.0);
                } else {
                    lambda[0] = 1.0;
                }
                break;
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }

        y = vec![0.0; y.len()];
        for (&k, &l) in active.iter().zip(&lambda) {
            for (yi, pi) in y.iter_mut().zip(&points[k]) {
                *yi += l * pi;
            }
        }
    }
    Err(Error::ProjectionDiverged {
        iterations: max_iter,
        residual: gap,
    })
}

/// Minimizer of `|Σ α_k p_k|²` over the affine hull (`Σ α_k = 1`) of the
/// active points.
fn affine_minimizer(points: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let m = active.len();
    if m == 1 {
        return vec![1.0];
    }
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[(r, c)] = dot(&points[i], &points[j]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = a
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .or_else(|| a.svd(true, true).solve(&rhs, 1e-13).ok())
        .unwrap_or_else(|| {
            let mut v = DVector::zeros(m + 1);
            v[0] = 1.0;
            v
        });
    sol.iter().take(m).copied().collect()
}

/// Options for [`minkowski_average_with`].
#[derive(Debug, Clone, Copy)]
pub struct MinkowskiOptions {
    /// Maximum `|acc| · |V_k|` allowed in one summation step.
    pub combination_cap: usize,
}

impl Default for MinkowskiOptions {
    fn default() -> Self {
        Self {
            combination_cap: COMBINATION_CAP,
        }
    }
}

/// `(1/n) Σ Θ_i` with default options.
pub fn minkowski_average(bodies: &[ConvexBody]) -> Result<ConvexBody> {
    minkowski_average_with(bodies, MinkowskiOptions::default())
}

/// Minkowski average of a homogeneous list of bodies.
///
/// Boxes and balls average their parameters. Polytopes are summed one body
/// at a time; duplicate sums are merged and, in dimensions 1 and 2,
/// non-extreme points are dropped. The result is scaled by `1/n`.
pub fn minkowski_average_with(bodies: &[ConvexBody], opts: MinkowskiOptions) -> Result<ConvexBody> {
    let first = bodies.first().ok_or(Error::Empty("body list"))?;
    let dim = first.dim;
    for b in bodies {
        check_dim(dim, b.dim)?;
        if std::mem::discriminant(&b.shape) != std::mem::discriminant(&first.shape) {
            return Err(Error::MixedShapes(first.shape.kind_name(), b.shape.kind_name()));
        }
    }
    // A convex set equals the average of its own copies.
    if bodies.iter().all(|b| b == first) {
        return Ok(first.clone());
    }
    let n = bodies.len() as f64;
    match &first.shape {
        Shape::Interval { .. } => {
            let mut lo = vec![0.0; dim];
            let mut hi = vec![0.0; dim];
            for b in bodies {
                if let Shape::Interval { lo: l, hi: h } = &b.shape {
                    for k in 0..dim {
                        lo[k] += l[k] / n;
                        hi[k] += h[k] / n;
                    }
                }
            }
            // Averaging can reorder equal endpoints by one ulp.
            for k in 0..dim {
                if lo[k] > hi[k] {
                    let m = 0.5 * (lo[k] + hi[k]);
                    lo[k] = m;
                    hi[k] = m;
                }
            }
            ConvexBody::interval(lo, hi)
        }
        Shape::Ball { .. } => {
            let mut center = vec![0.0; dim];
            let mut radius = 0.0;
            for b in bodies {
                if let Shape::Ball { center: c, radius: r } = &b.shape {
                    for k in 0..dim {
                        center[k] += c[k] / n;
                    }
                    radius += r / n;
                }
            }
            ConvexBody::ball(center, radius)
        }
        Shape::Polytope { .. } => {
            let mut acc: Vec<Vec<f64>> = vec![vec![0.0; dim]];
            for b in bodies {
                let verts = b.vertices().expect("homogeneous polytopes");
                let count = acc.len().saturating_mul(verts.len());
                if count > opts.combination_cap {
                    return Err(Error::CombinationCap {
                        count,
                        cap: opts.combination_cap,
                    });
                }
                let mut next = Vec::with_capacity(count);
                for a in &acc {
                    for v in verts {
                        next.push(a.iter().zip(v).map(|(x, y)| x + y).collect());
                    }
                }
                acc = prune(dedup(next), dim);
            }
            let avg = acc.into_iter().map(|v| v.iter().map(|x| x / n).collect()).collect();
            ConvexBody::polytope(avg)
        }
    }
}

/// Deduplicated point set with non-extreme points dropped where cheap
/// (dimensions 1 and 2).
pub(crate) fn hull_points(points: Vec<Vec<f64>>, dim: usize) -> Vec<Vec<f64>> {
    prune(dedup(points), dim)
}

fn dedup(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = HashSet::with_capacity(points.len());
    points
        .into_iter()
        .filter(|p| {
            let key: Vec<u64> = p
                .iter()
                .map(|x| ((x * 1e12).round() / 1e12 + 0.0).to_bits())
                .collect();
            seen.insert(key)
        })
        .collect()
}

fn prune(points: Vec<Vec<f64>>, dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                vec![vec![lo]]
            } else {
                vec![vec![lo], vec![hi]]
            }
        }
        2 => hull_2d(points),
        _ => points,
    }
}

/// Andrew's monotone chain; collinear points are dropped.
fn hull_2d(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: &[f64], a: &[f64], b: &[f64]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<Vec<f64>> = Vec::with_capacity(2 * pts.len());
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p.clone());
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p.clone());
    }
    hull.pop();
    if hull.is_empty() {
        hull.push(pts[0].clone());
    }
    hull
}
