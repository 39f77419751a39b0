//! Shortest paths on random ladders and Monte Carlo for the percolation rate
//! and the central limit theorem.
//!
//! Indexing: `X_k`, `Y_k` are the horizontal edges of rails 0 and 1 entering
//! column `k` (`1 <= k <= n`), and `Z_k` is the rung at column `k`
//! (`0 <= k <= n`). The chain state after column `k` is
//! `M_k = (Δ_k, X_{k+1}, Y_{k+1}, Z_{k+1})`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Lifted;
use crate::rng::{exp1, stream_rng};
use crate::specfun::{bessel_j, bessel_j_reverse, hyp2f3, CompensatedSum};
use crate::stats::{ks_normal, moments, Moments};

/// Edge weights of a ladder with `n` columns after the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderSample {
    /// `X_1..X_n`
    pub x: Vec<f64>,
    /// `Y_1..Y_n`
    pub y: Vec<f64>,
    /// `Z_0..Z_n`
    pub z: Vec<f64>,
}

impl LadderSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || z.len() != x.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "ladder needs |X| = |Y| = n and |Z| = n+1, got {}, {}, {}",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        if x.iter().chain(&y).chain(&z).any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("edge weights must be positive".into()));
        }
        Ok(LadderSample { x, y, z })
    }

    /// I.i.d. Exp(1) weights.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = (0..n).map(|_| exp1(rng)).collect();
        let y = (0..n).map(|_| exp1(rng)).collect();
        let z = (0..=n).map(|_| exp1(rng)).collect();
        LadderSample { x, y, z }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Chain state after column `k < n`.
    pub fn state(&self, k: usize, delta: f64) -> Lifted {
        Lifted {
            r: delta,
            x: self.x[k],
            y: self.y[k],
            z: self.z[k + 1],
        }
    }
}

/// First-passage times to both ends of every column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstPassage {
    /// `l_0..l_n`
    pub l: Vec<f64>,
    /// `l'_0..l'_n`
    pub l_prime: Vec<f64>,
}

impl FirstPassage {
    pub fn l_n(&self) -> f64 {
        *self.l.last().expect("non-empty")
    }

    pub fn l_prime_n(&self) -> f64 {
        *self.l_prime.last().expect("non-empty")
    }

    /// `Δ_k = l'_k - l_k`.
    pub fn delta_path(&self) -> Vec<f64> {
        self.l.iter().zip(&self.l_prime).map(|(a, b)| b - a).collect()
    }

    /// `W_k = l_{k+1} - l_k`.
    pub fn increments(&self) -> Vec<f64> {
        self.l.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Column-by-column recursion
/// `l_k = min{l_{k-1} + X_k, l'_{k-1} + Y_k + Z_k}`,
/// `l'_k = min{l'_{k-1} + Y_k, l_{k-1} + X_k + Z_k}`, from `l_0 = 0`, `l'_0 = Z_0`.
pub fn dp_first_passage(s: &LadderSample) -> FirstPassage {
    let n = s.n();
    let mut l = Vec::with_capacity(n + 1);
    let mut lp = Vec::with_capacity(n + 1);
    l.push(0.0);
    lp.push(s.z[0]);
    for k in 1..=n {
        let (a, b) = (l[k - 1], lp[k - 1]);
        let (x, y, z) = (s.x[k - 1], s.y[k - 1], s.z[k]);
        l.push((a + x).min(b + y + z));
        lp.push((b + y).min(a + x + z));
    }
    FirstPassage { l, l_prime: lp }
}

/// `l_n` alone, drawing the weights on the fly.
pub fn sample_l_n<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    let (mut l, mut lp) = (0.0, exp1(rng));
    for _ in 0..n {
        let (x, y, z) = (exp1(rng), exp1(rng), exp1(rng));
        let next = (l + x).min(lp + y + z);
        lp = (lp + y).min(l + x + z);
        l = next;
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest distance from `(0,0)` to `(n,0)` on the full undirected ladder,
/// backtracking allowed.
pub fn dijkstra_oracle(s: &LadderSample) -> f64 {
    let n = s.n();
    // vertex (k, side) has index 2k + side
    let v = 2 * (n + 1);
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); v];
    let mut link = |a: usize, b: usize, w: f64| {
        adj[a].push((b, w));
        adj[b].push((a, w));
    };
    for k in 0..=n {
        link(2 * k, 2 * k + 1, s.z[k]);
        if k > 0 {
            link(2 * (k - 1), 2 * k, s.x[k - 1]);
            link(2 * (k - 1) + 1, 2 * k + 1, s.y[k - 1]);
        }
    }
    let mut dist = vec![f64::INFINITY; v];
    let mut heap = BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(Reverse((Dist(0.0), 0usize)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == 2 * n {
            return d;
        }
        for &(w, c) in &adj[u] {
            let nd = d + c;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((Dist(nd), w)));
            }
        }
    }
    dist[2 * n]
}

/// `χ = 3/2 - J_1(2)/(2J_2(2))`.
pub fn chi_closed_form() -> f64 {
    1.5 - bessel_j(1, 2.0) / (2.0 * bessel_j(2, 2.0))
}

/// The same constant through reverse-order Bessel summation.
pub fn chi_reverse_sum() -> f64 {
    1.5 - bessel_j_reverse(1, 2.0) / (2.0 * bessel_j_reverse(2, 2.0))
}

/// `∫ f² dπ̃ = (2J_1(2) - 3J_0(2) + ₂F₃({1,1},{2,2,2};-1) - 1) / J_2(2)`.
pub fn integral_f_squared() -> f64 {
    (2.0 * bessel_j(1, 2.0) - 3.0 * bessel_j(0, 2.0) + hyp2f3(-1.0) - 1.0) / bessel_j(2, 2.0)
}

const CHUNK: usize = 50_000;

/// Monte Carlo means of `f` and `f²` under the stationary law `π̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryMoments {
    pub samples: usize,
    pub mean_f: f64,
    pub stderr_f: f64,
    pub mean_f2: f64,
    pub stderr_f2: f64,
}

pub fn stationary_moments(samples: usize, seed: u64) -> StationaryMoments {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
            for _ in 0..len {
                let f = Lifted::stationary(&mut rng).increment();
                let f2 = f * f;
                acc[0].add(f);
                acc[1].add(f2);
                acc[2].add(f2);
                acc[3].add(f2 * f2);
            }
            acc.map(|a| a.value())
        })
        .collect();
    let mut tot = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
    for p in &parts {
        for (t, v) in tot.iter_mut().zip(p) {
            t.add(*v);
        }
    }
    let n = samples as f64;
    let [s1, s2, t1, t2] = tot.map(|t| t.value() / n);
    let se = |m: f64, m2: f64| ((m2 - m * m).max(0.0) * n / (n - 1.0) / n).sqrt();
    StationaryMoments {
        samples,
        mean_f: s1,
        stderr_f: se(s1, s2),
        mean_f2: t1,
        stderr_f2: se(t1, t2),
    }
}

/// Independent replicates of `l_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRun {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

/// Replicate `i` uses stream `i`, so the output does not depend on the
/// number of worker threads.
pub fn simulate_l_n(n: usize, replicates: usize, seed: u64) -> Result<SimRun> {
    if n == 0 || replicates < 2 {
        return Err(Error::InvalidParameter("need n >= 1 and at least two replicates".into()));
    }
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| sample_l_n(n, &mut stream_rng(seed, i as u64)))
        .collect();
    let m = moments(&values);
    Ok(SimRun {
        n,
        replicates,
        seed,
        mean: m.mean,
        variance: m.variance,
        stderr: m.stderr(),
        values,
    })
}

/// Monte Carlo estimate of `χ` from `l_n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub chi_closed: f64,
    pub chi_hat: f64,
    pub stderr: f64,
    /// `(chi_hat - chi_closed) / stderr`
    pub z_score: f64,
}

impl RateReport {
    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score.abs() <= sigmas
    }
}

pub fn rate_check(n: usize, replicates: usize, seed: u64) -> Result<RateReport> {
    let run = simulate_l_n(n, replicates, seed)?;
    let chi = chi_closed_form();
    let nf = n as f64;
    let (chi_hat, stderr) = (run.mean / nf, run.stderr / nf);
    Ok(RateReport {
        n,
        replicates,
        seed,
        chi_closed: chi,
        chi_hat,
        stderr,
        z_score: (chi_hat - chi) / stderr,
    })
}

/// Distributional check of `(l_n - nχ)/√n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub chi_closed: f64,
    pub chi_hat: f64,
    pub sigma2_hat: f64,
    pub sigma2_stderr: f64,
    pub ks_stat: f64,
    pub p_value: f64,
    pub moments: Moments,
    #[serde(skip)]
    pub standardized: Vec<f64>,
}

pub fn clt_check(n: usize, replicates: usize, seed: u64) -> Result<CltReport> {
    if n < 500 || replicates < 1000 {
        return Err(Error::InvalidParameter("CLT check needs n >= 500 and replicates >= 1000".into()));
    }
    let run = simulate_l_n(n, replicates, seed)?;
    let chi = chi_closed_form();
    let sn = (n as f64).sqrt();
    let standardized: Vec<f64> = run.values.iter().map(|l| (l - n as f64 * chi) / sn).collect();
    let m = moments(&standardized);
    let (ks_stat, p_value) = ks_normal(&standardized, 0.0, m.variance.sqrt());
    Ok(CltReport {
        n,
        replicates,
        seed,
        chi_closed: chi,
        chi_hat: run.mean / n as f64,
        sigma2_hat: m.variance,
        sigma2_stderr: m.variance_stderr(),
        ks_stat,
        p_value,
        moments: m,
        standardized,
    })
}

/// Increments `W_k = f(M_k)` of a single long ladder after `burn_in`
/// discarded columns.
pub fn increment_series(steps: usize, burn_in: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let mut m = Lifted {
        r: exp1(&mut rng),
        x: exp1(&mut rng),
        y: exp1(&mut rng),
        z: exp1(&mut rng),
    };
    let mut out = Vec::with_capacity(steps);
    for k in 0..burn_in + steps {
        if k >= burn_in {
            out.push(m.increment());
        }
        m = crate::kernel::lifted_step_sample(&m, &mut rng);
    }
    out
}
