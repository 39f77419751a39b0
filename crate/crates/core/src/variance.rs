//! Two estimates of the CLT variance `σ² = Var f(M_0) + 2 Σ_{n>=1} Cov(f(M_0), f(M_n))`:
//! batch means on a simulated increment series, and a kernel expansion in
//! which each covariance is an outer Monte Carlo over `π̃` of an inner
//! quadrature against `K^{n-1}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{pi_density, KernelDensity, KernelFamily, Lifted};
use crate::quadrature::Quadrature;
use crate::report::{json_f64, json_report};
use crate::rng::stream_rng;
use crate::simulate::{chi_closed_form, increment_series, integral_f_squared};
use crate::specfun::CompensatedSum;
use crate::stats::{batch_means, overlapping_batch_means, LongRunVariance};

/// `E[f(M) | Δ = r]` with `f(m) = min{r+y+z, x}` and independent Exp(1)
/// weights: `1 - e^{-r}/4` for `r >= 0`, `2 + r - e^r(5-2r)/4` for `r < 0`.
pub fn m1(r: f64) -> f64 {
    if r >= 0.0 {
        1.0 - 0.25 * (-r).exp()
    } else {
        2.0 + r - 0.25 * r.exp() * (5.0 - 2.0 * r)
    }
}

/// `E[f(M)² | Δ = r]`: `2 - e^{-r}(r+2)/2` for `r >= 0`,
/// `r² + 4r + 6 - e^r(5 - 3r/2)` for `r < 0`.
pub fn m2(r: f64) -> f64 {
    if r >= 0.0 {
        2.0 - 0.5 * (-r).exp() * (r + 2.0)
    } else {
        r * r + 4.0 * r + 6.0 - r.exp() * (5.0 - 1.5 * r)
    }
}

/// Centred conditional mean `u(r) = m1(r) - χ`.
pub fn u(r: f64) -> f64 {
    m1(r) - chi_closed_form()
}

/// Simulation estimate of `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimVariance {
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub batch_means: LongRunVariance,
    pub overlapping: LongRunVariance,
}

impl SimVariance {
    pub fn estimate(&self) -> f64 {
        self.batch_means.estimate
    }

    pub fn stderr(&self) -> f64 {
        self.batch_means.stderr
    }
}

/// Batch-means estimate of the long-run variance of `W_k - χ` along one
/// stationary-started chain.
pub fn sigma2_simulation(steps: usize, burn_in: usize, seed: u64, batch_size: usize) -> Result<SimVariance> {
    if steps < 1_000_000 {
        return Err(Error::InvalidParameter(format!("steps {steps} below 10^6")));
    }
    if batch_size == 0 || steps / batch_size < 20 {
        return Err(Error::InvalidParameter(format!("batch size {batch_size} leaves too few batches")));
    }
    let chi = chi_closed_form();
    let w: Vec<f64> = increment_series(steps, burn_in, seed).into_iter().map(|x| x - chi).collect();
    Ok(SimVariance {
        steps,
        burn_in,
        seed,
        batch_means: batch_means(&w, batch_size),
        overlapping: overlapping_batch_means(&w, batch_size),
    })
}

/// Tabulated function on a uniform grid with a node at zero, interpolated by
/// four-point Lagrange stencils that never straddle the origin.
#[derive(Debug, Clone)]
pub struct GridFn {
    lo: f64,
    h: f64,
    zero: usize,
    values: Vec<f64>,
}

impl GridFn {
    /// Nodes `-half_width + i·h`; `half_width / h` must be an integer.
    pub fn tabulate(half_width: f64, h: f64, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let zero = (half_width / h).round() as usize;
        let values = (0..=2 * zero)
            .into_par_iter()
            .map(|i| f((i as f64 - zero as f64) * h))
            .collect();
        GridFn {
            lo: -(zero as f64) * h,
            h,
            zero,
            values,
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.lo && s <= -self.lo
    }

    pub fn eval(&self, s: f64) -> Option<f64> {
        if !self.contains(s) {
            return None;
        }
        let last = self.values.len() - 1;
        let t = (s - self.lo) / self.h;
        let i = (t.floor() as usize).min(last - 1);
        let mut j0 = i.saturating_sub(1);
        if i >= self.zero {
            j0 = j0.max(self.zero);
        } else {
            j0 = j0.min(self.zero - 3);
        }
        j0 = j0.min(last - 3);
        let xs: [f64; 4] = std::array::from_fn(|k| (j0 + k) as f64);
        let mut acc = 0.0;
        for k in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != k {
                    w *= (t - xs[m]) / (xs[k] - xs[m]);
                }
            }
            acc += w * self.values[j0 + k];
        }
        Some(acc)
    }
}

/// `g(s) = ∫ K^j(s, r) u(r) dr`.
fn propagate_u(k: &KernelDensity, s: f64, quad: &Quadrature, chi: f64) -> f64 {
    quad.integrate(|r| k.eval(s, r) * (m1(r) - chi), &[0.0, s, s / 2.0])
}

/// Settings for [`sigma2_kernel`].
#[derive(Debug, Clone)]
pub struct KernelVarianceConfig {
    pub n_max: usize,
    pub quad: Quadrature,
    pub mc_outer: usize,
    pub seed: u64,
    /// Half width of the interpolation grid for `K^j u`.
    pub grid_half_width: f64,
    pub grid_step: f64,
}

impl KernelVarianceConfig {
    pub fn new(n_max: usize, mc_outer: usize, seed: u64) -> Self {
        KernelVarianceConfig {
            n_max,
            quad: Quadrature::default(),
            mc_outer,
            seed,
            grid_half_width: 15.0,
            grid_step: 0.02,
        }
    }
}

/// One term of the covariance expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovTerm {
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Kernel-side estimate of `σ²` with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub n_max: usize,
    pub mc_outer: usize,
    pub seed: u64,
    pub chi: f64,
    /// `Var f(M_0)` by quadrature of `π·m2`.
    pub term0_quadrature: f64,
    /// `∫ f² dπ̃ - χ²` from the closed form.
    pub term0_closed: f64,
    /// `Cov(f(M_0), f(M_n))`, `n = 1..=n_max`.
    pub terms: Vec<CovTerm>,
    pub sigma2: f64,
    /// Monte Carlo standard error of `sigma2`.
    pub stderr: f64,
    /// Geometric bound on `2 Σ_{n > n_max} |C_n|`.
    pub tail_bound: f64,
    pub warnings: Vec<String>,
}

impl VarianceReport {
    /// `|C_{n+1}| <= ratio · |C_n|` for every `n >= 3`.
    pub fn decays_geometrically(&self, ratio: f64) -> bool {
        self.terms
            .windows(2)
            .filter(|w| w[0].n >= 3)
            .all(|w| w[1].value.abs() <= ratio * w[0].value.abs())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| serde_json::json!({"n": t.n, "value": json_f64(t.value), "stderr": json_f64(t.stderr)}))
            .collect();
        json_report([
            ("n_max", self.n_max.into()),
            ("mc_outer", self.mc_outer.into()),
            ("seed", self.seed.into()),
            ("chi", json_f64(self.chi)),
            ("term0_quadrature", json_f64(self.term0_quadrature)),
            ("term0_closed", json_f64(self.term0_closed)),
            ("terms", terms.into()),
            ("sigma2_kernel", json_f64(self.sigma2)),
            ("stderr", json_f64(self.stderr)),
            ("tail_bound", json_f64(self.tail_bound)),
            ("warnings", self.warnings.clone().into()),
        ])
    }
}

const OUTER_CHUNK: usize = 20_000;

/// Per-chunk sums: per-term values and squares, then the sum over terms and its square.
type OuterPart = (Vec<f64>, Vec<f64>, f64, f64);

/// `σ² = C_0 + 2 Σ_{n=1}^{n_max} C_n` where `C_0 = ∫ π m2 - χ²` and
/// `C_n = E_π̃[(f(M_0) - χ) g_{n-1}(Δ_1(M_0))]` with `g_0 = u` and
/// `g_j(s) = ∫ K^j(s, r) u(r) dr`. The `g_j` are tabulated once and the
/// outer expectation shares its draws across all `n`.
pub fn sigma2_kernel(cfg: &KernelVarianceConfig) -> Result<VarianceReport> {
    let n_max = cfg.n_max;
    if !(3..=10).contains(&n_max) {
        return Err(Error::InvalidParameter(format!("n_max {n_max} outside 3..=10")));
    }
    if cfg.mc_outer < 1000 {
        return Err(Error::InvalidParameter("mc_outer below 1000".into()));
    }
    let chi = chi_closed_form();
    let quad = &cfg.quad;
    let term0_quadrature = quad.integrate(|r| pi_density(r) * m2(r), &[0.0]) - chi * chi;
    let term0_closed = integral_f_squared() - chi * chi;

    let family = KernelFamily::upto(n_max - 1)?;
    let mut grids = Vec::with_capacity(n_max - 1);
    for j in 1..n_max {
        let k = family.density(j)?;
        grids.push(GridFn::tabulate(cfg.grid_half_width, cfg.grid_step, |s| propagate_u(k, s, quad, chi)));
    }
    // g_{n-1}(s) for n = 1..=n_max
    let g = |j: usize, s: f64| -> f64 {
        if j == 0 {
            return m1(s) - chi;
        }
        grids[j - 1]
            .eval(s)
            .unwrap_or_else(|| propagate_u(family.density(j).expect("built"), s, quad, chi))
    };

    let chunks = cfg.mc_outer.div_ceil(OUTER_CHUNK);
    let parts: Vec<OuterPart> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(cfg.seed, c as u64);
            let len = OUTER_CHUNK.min(cfg.mc_outer - c * OUTER_CHUNK);
            let mut sum = vec![CompensatedSum::new(); n_max];
            let mut sq = vec![CompensatedSum::new(); n_max];
            let (mut tot, mut tot_sq) = (CompensatedSum::new(), CompensatedSum::new());
            for _ in 0..len {
                let m = Lifted::stationary(&mut rng);
                let fbar = m.increment() - chi;
                let s = m.next_delta();
                let mut all = 0.0;
                for j in 0..n_max {
                    let v = fbar * g(j, s);
                    sum[j].add(v);
                    sq[j].add(v * v);
                    all += v;
                }
                tot.add(all);
                tot_sq.add(all * all);
            }
            (
                sum.iter().map(CompensatedSum::value).collect(),
                sq.iter().map(CompensatedSum::value).collect(),
                tot.value(),
                tot_sq.value(),
            )
        })
        .collect();

    let nf = cfg.mc_outer as f64;
    let reduce = |pick: &dyn Fn(&OuterPart) -> f64| -> f64 {
        parts.iter().map(pick).collect::<CompensatedSum>().value() / nf
    };
    let se = |mean: f64, mean_sq: f64| ((mean_sq - mean * mean).max(0.0) / (nf - 1.0)).sqrt();
    let terms: Vec<CovTerm> = (0..n_max)
        .map(|j| {
            let mean = reduce(&|p| p.0[j]);
            let mean_sq = reduce(&|p| p.1[j]);
            CovTerm {
                n: j + 1,
                value: mean,
                stderr: se(mean, mean_sq),
            }
        })
        .collect();
    let tot = reduce(&|p| p.2);
    let tot_sq = reduce(&|p| p.3);

    let sigma2 = term0_quadrature + 2.0 * terms.iter().map(|t| t.value).sum::<f64>();
    let last = terms[n_max - 1].value.abs();
    let prev = terms[n_max - 2].value.abs();
    let rho = if prev > 0.0 { (last / prev).min(0.99) } else { 0.99 };
    let tail_bound = 2.0 * last * rho / (1.0 - rho);
    let mut warnings = Vec::new();
    if 2.0 * last > 0.01 * sigma2.abs() {
        warnings.push(format!(
            "truncation: last term 2|C_{n_max}| = {:.3e} exceeds 1% of the running total {sigma2:.6}",
            2.0 * last
        ));
    }
    Ok(VarianceReport {
        n_max,
        mc_outer: cfg.mc_outer,
        seed: cfg.seed,
        chi,
        term0_quadrature,
        term0_closed,
        terms,
        sigma2,
        stderr: 2.0 * se(tot, tot_sq),
        tail_bound,
        warnings,
    })
}
