//! 1/2-nets of the unit sphere `S^{d−1}` and the covering transfer from a
//! vector norm to finitely many directions.

use rand_distr::StandardNormal;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::vector::{dot, norm};

pub const MAX_NET_DIM: usize = 8;
pub const DEFAULT_NET_SEED: u64 = 0x5eed_4e37;
/// Fresh directions used to verify a constructed net.
pub const VERIFY_SAMPLES: usize = 100_000;
const CHUNK: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereNet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub target_radius: f64,
    /// Covering radius of the net over its candidate set.
    pub build_radius: f64,
    /// Sampled covering radius from construction-time verification.
    pub verified_radius: f64,
}

impl SphereNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The volumetric budget `5^d`.
    pub fn budget(&self) -> u64 {
        5u64.pow(self.dim as u32)
    }

    /// Builds a net from given directions, normalizing each.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::Empty("net points"))?;
        let points = points
            .into_iter()
            .map(|p| {
                crate::error::check_dim(dim, p.len())?;
                crate::vector::normalized(&p).ok_or_else(|| Error::InvalidParameter("zero net point".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            points,
            target_radius: 0.5,
            build_radius: f64::NAN,
            verified_radius: f64::NAN,
        })
    }
}

/// Uniform direction on `S^{d−1}`.
pub fn random_unit(d: usize, rng: &mut StreamRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Candidate count and greedy stopping radius per dimension.
fn schedule(d: usize) -> (usize, f64) {
    match d {
        2 => (20_000, 0.45),
        3 => (40_000, 0.45),
        4 => (80_000, 0.42),
        _ => (120_000, 0.40),
    }
}

pub fn build_half_net(d: usize) -> Result<SphereNet> {
    build_half_net_seeded(d, DEFAULT_NET_SEED)
}

/// d = 1 gives `{−1, +1}`. For d ≥ 2, greedy farthest-point selection over
/// seeded random candidates runs until every candidate lies within the
/// stopping radius; the result is then checked on [`VERIFY_SAMPLES`] fresh
/// directions. A failed check retries with twice the candidates.
pub fn build_half_net_seeded(d: usize, seed: u64) -> Result<SphereNet> {
    if !(1..=MAX_NET_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d, 1, MAX_NET_DIM));
    }
    if d == 1 {
        return Ok(SphereNet {
            dim: 1,
            points: vec![vec![-1.0], vec![1.0]],
            target_radius: 0.5,
            build_radius: 0.0,
            verified_radius: 0.0,
        });
    }
    let (mut count, radius) = schedule(d);
    for attempt in 0..4u32 {
        let mut rng = rng::stream(seed, d as u32, attempt);
        let candidates: Vec<Vec<f64>> = (0..count).map(|_| random_unit(d, &mut rng)).collect();
        let (points, build_radius) = farthest_point(&candidates, radius);
        let mut net = SphereNet {
            dim: d,
            points,
            target_radius: 0.5,
            build_radius,
            verified_radius: f64::NAN,
        };
        net.verified_radius = covering_radius(&net, VERIFY_SAMPLES, seed ^ 0x9e37_79b9)?;
        if net.verified_radius <= net.target_radius {
            return Ok(net);
        }
        count *= 2;
    }
    Err(Error::CoarseGrid(format!("no verified 1/2-net for d = {d} after 4 attempts")))
}

/// Greedy farthest-point traversal until the covering radius over
/// `candidates` is at most `radius`. Returns the chosen points and the
/// achieved radius.
fn farthest_point(candidates: &[Vec<f64>], radius: f64) -> (Vec<Vec<f64>>, f64) {
    // Track the best inner product with the net; distance² = 2 − 2·dot.
    let mut best = vec![f64::NEG_INFINITY; candidates.len()];
    let mut chosen = Vec::new();
    let mut next = 0usize;
    loop {
        let p = candidates[next].clone();
        best.par_iter_mut().zip(candidates.par_iter()).for_each(|(b, c)| {
            let v = dot(&p, c);
            if v > *b {
                *b = v;
            }
        });
        chosen.push(p);
        let (idx, worst) = best
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &b)| if b < acc.1 { (i, b) } else { acc });
        let dist = (2.0 - 2.0 * worst).max(0.0).sqrt();
        if dist <= radius {
            return (chosen, dist);
        }
        next = idx;
    }
}

/// `max_u min_p |u − p|` over `samples` random unit vectors `u`. Chunk `c`
/// draws from stream `(seed, 0, c)`, so the value does not depend on the
/// number of threads.
pub fn covering_radius(net: &SphereNet, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    if net.is_empty() {
        return Err(Error::Empty("net points"));
    }
    let chunks = samples.div_ceil(CHUNK);
    let worst = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, 0, c as u32);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut worst_dot = f64::INFINITY;
            for _ in 0..count {
                let u = random_unit(net.dim, &mut rng);
                let best = net.points.iter().map(|p| dot(p, &u)).fold(f64::NEG_INFINITY, f64::max);
                worst_dot = worst_dot.min(best);
            }
            worst_dot
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok((2.0 - 2.0 * worst).max(0.0).sqrt())
}

/// `|S| ≤ nt`, or some `±p` in the net has `⟨±p, S⟩ > nt/2`.
pub fn covering_transfer_check(net: &SphereNet, s: &[f64], n: u64, t: f64) -> bool {
    let level = n as f64 * t;
    if norm(s) <= level {
        return true;
    }
    net.points.iter().any(|p| dot(p, s).abs() > level / 2.0)
}

/// Randomized transfer trials: `S = ρ·u` with `u` uniform on the sphere and
/// `ρ` uniform on `(nt, 3nt]`. Returns the number of failures.
pub fn covering_transfer_trials(net: &SphereNet, trials: usize, n: u64, t: f64, seed: u64) -> u64 {
    let level = n as f64 * t;
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, 1, c as u32);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut fails = 0u64;
            for _ in 0..count {
                let u = random_unit(net.dim, &mut rng);
                let rho = level * (1.0 + 2.0 * (1.0 - rng.random::<f64>()));
                let s: Vec<f64> = u.iter().map(|x| x * rho).collect();
                if !covering_transfer_check(net, &s, n, t) {
                    fails += 1;
                }
            }
            fails
        })
        .sum()
}

/// One unit vector per line, components separated by commas.
pub fn net_table(net: &SphereNet) -> String {
    let mut out = String::new();
    for p in &net.points {
        let row: Vec<String> = p.iter().map(|x| format!("{x:.17e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_net_is_exact() {
        let net = build_half_net(1).unwrap();
        assert_eq!(net.points, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(covering_radius(&net, 1000, 3).unwrap(), 0.0);
        assert!(covering_transfer_check(&net, &[3.0], 2, 1.0));
        assert!(covering_transfer_check(&net, &[0.0], 2, 1.0));
        assert!(covering_transfer_check(&net, &[-3.0], 2, 1.0));
    }

    #[test]
    fn out_of_range_dimension() {
        assert!(matches!(build_half_net(0), Err(Error::UnsupportedDimension(0, 1, 8))));
        assert!(matches!(build_half_net(9), Err(Error::UnsupportedDimension(9, 1, 8))));
    }

    #[test]
    fn single_point_covers_badly() {
        let net = SphereNet::from_points(vec![vec![1.0, 0.0]]).unwrap();
        let r = covering_radius(&net, 100_000, 1).unwrap();
        assert!(r > 1.999 && r <= 2.0);
    }

    #[test]
    fn small_nets_within_budget() {
        for d in 2..=3 {
            let net = build_half_net(d).unwrap();
            assert!(net.len() as u64 <= net.budget(), "d = {d}: {}", net.len());
            assert!(net.points.iter().all(|p| (norm(p) - 1.0).abs() <= 1e-12));
            let r = covering_radius(&net, 100_000, 77).unwrap();
            assert!(r <= 0.5, "d = {d}: radius {r}");
            assert_eq!(covering_transfer_trials(&net, 20_000, 10, 0.3, 5), 0);
        }
    }

    #[test]
    fn table_round_trips() {
        let net = build_half_net(2).unwrap();
        let table = net_table(&net);
        let parsed: Vec<Vec<f64>> = table
            .lines()
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(parsed, net.points);
    }
}
