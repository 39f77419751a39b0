//! Transition kernels of the rung-difference chain `Δ`, its stationary law,
//! the lift to `M = (Δ, X, Y, Z)`, exact samplers and quadrature oracles.

use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::twin_factorial;
use crate::quadrature::Quadrature;
use crate::rng::{exp1, open_unit};
use crate::specfun::bessel_j;
use crate::tables::CoeffTables;

/// One-step kernel `K(r', r)`.
pub fn k1(r_prev: f64, r: f64) -> f64 {
    if (r_prev < r && r < 0.0) || (r_prev > r && r > 0.0) {
        (-r.abs()).exp()
    } else {
        (-(r_prev - 2.0 * r).abs()).exp()
    }
}

/// Evaluable n-step density for `n >= 1`, built from exact tables.
#[derive(Debug, Clone)]
pub struct KernelDensity {
    n: usize,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    // (-1)^{n-1}/(n-1)^!
    lead: f64,
    // (-1)^n/((p)^!(n-p-2)^!), p = 0..=n-2
    mid: Vec<f64>,
}

fn to_float(m: &[Vec<crate::exact::Rational>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| row.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect()
}

impl KernelDensity {
    pub fn new(tables: &CoeffTables) -> Self {
        let n = tables.n;
        let sg = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let tf = |k: usize| twin_factorial(k as u64).to_f64().unwrap_or(f64::INFINITY);
        let mid = (0..n.saturating_sub(1)).map(|p| sg / (tf(p) * tf(n - p - 2))).collect();
        KernelDensity {
            n,
            a: to_float(&tables.a),
            b: to_float(&tables.b),
            c: to_float(&tables.c),
            lead: -sg / tf(n - 1),
            mid,
        }
    }

    /// Checks that `tables` belong to step `n`.
    pub fn for_step(n: usize, tables: &CoeffTables) -> Result<Self> {
        if n == 0 {
            return Err(Error::DiracEvaluation);
        }
        if tables.n != n {
            return Err(Error::TableLevelMismatch {
                tables: tables.n,
                requested: n,
            });
        }
        Ok(Self::new(tables))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `K^n(r', r)`.
    pub fn eval(&self, r_prev: f64, r: f64) -> f64 {
        if r < 0.0 {
            return self.eval_nonneg(-r_prev, -r);
        }
        self.eval_nonneg(r_prev, r)
    }

    fn eval_nonneg(&self, rp: f64, r: f64) -> f64 {
        let n = self.n;
        let er = (-r).exp();
        // e^{-(q+2) r}
        let mut eq = Vec::with_capacity(n + 1);
        let mut t = er * er;
        for _ in 0..=n {
            eq.push(t);
            t *= er;
        }
        let table_sum = |m: &[Vec<f64>], step: f64| -> f64 {
            let mut ep = 1.0;
            let mut s = 0.0;
            for row in m {
                let inner: f64 = row.iter().zip(&eq).map(|(c, e)| c * e).sum();
                s += ep * inner;
                ep *= step;
            }
            s
        };
        if rp <= 0.0 {
            return table_sum(&self.a, rp.exp());
        }
        let erp = (-rp).exp();
        // Σ_p mid_p · e^{-p r' - (n-p) r}
        let mid_sum = |weight: f64| -> f64 {
            let mut s = 0.0;
            let mut e = er.powi(n as i32);
            let ratio = erp / er;
            for m in &self.mid {
                s += m * e;
                e *= ratio;
            }
            weight * s
        };
        if rp <= r {
            self.lead * (rp - (n as f64 + 1.0) * r).exp() + mid_sum(rp) + table_sum(&self.b, erp)
        } else {
            self.lead * (-(n as f64 - 1.0) * rp - r).exp() + mid_sum(r) + table_sum(&self.c, erp)
        }
    }

    /// Densities on a grid, evaluated in parallel and returned in row-major
    /// order as `(r', r, value)`.
    pub fn grid(&self, r_prev: &[f64], r: &[f64]) -> Vec<(f64, f64, f64)> {
        r_prev
            .par_iter()
            .flat_map_iter(|&rp| r.iter().map(move |&x| (rp, x, self.eval(rp, x))))
            .collect()
    }
}

/// `K^n(r', r)` from tables for step `n`.
pub fn kn(n: usize, r_prev: f64, r: f64, tables: &CoeffTables) -> Result<f64> {
    Ok(KernelDensity::for_step(n, tables)?.eval(r_prev, r))
}

/// Kernels for steps `0..=n_max`; step 0 is the identity (a point mass).
#[derive(Debug, Clone)]
pub struct KernelFamily {
    densities: Vec<KernelDensity>,
}

impl KernelFamily {
    pub fn new(tables: &[CoeffTables]) -> Self {
        KernelFamily {
            densities: tables.iter().map(KernelDensity::new).collect(),
        }
    }

    /// Builds exact tables for steps `1..=n_max` and converts them.
    pub fn upto(n_max: usize) -> Result<Self> {
        Ok(Self::new(&crate::genfun::coeff_tables_upto(n_max)?))
    }

    pub fn n_max(&self) -> usize {
        self.densities.len()
    }

    /// Density of step `n >= 1`.
    pub fn density(&self, n: usize) -> Result<&KernelDensity> {
        if n == 0 {
            return Err(Error::DiracEvaluation);
        }
        self.densities.get(n - 1).ok_or(Error::TableLevelMismatch {
            tables: self.densities.len(),
            requested: n,
        })
    }

    /// `∫ K^n(s, r) g(r) dr`, with `g(s)` for `n = 0`.
    pub fn apply(&self, n: usize, s: f64, g: impl Fn(f64) -> f64, quad: &Quadrature, breaks: &[f64]) -> Result<f64> {
        if n == 0 {
            return Ok(g(s));
        }
        let k = self.density(n)?;
        let mut all = vec![0.0, s, s / 2.0];
        all.extend_from_slice(breaks);
        Ok(quad.integrate(|r| k.eval(s, r) * g(r), &all))
    }
}

/// `∫ K^n(r', r) dr`.
pub fn kn_mass(k: &KernelDensity, r_prev: f64, quad: &Quadrature) -> f64 {
    quad.integrate(|r| k.eval(r_prev, r), &[0.0, r_prev, r_prev / 2.0])
}

/// `∫ K(r', s) K^{n-1}(s, r) ds`, which must equal `K^n(r', r)`.
pub fn ck_oracle(n: usize, r_prev: f64, r: f64, quad: &Quadrature, family: &KernelFamily) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("Chapman-Kolmogorov needs n >= 2".into()));
    }
    let k = family.density(n - 1)?;
    Ok(quad.integrate(|s| k1(r_prev, s) * k.eval(s, r), &[0.0, r_prev, r_prev / 2.0, r]))
}

/// `∫ π(r') K^n(r', r) dr'`, which must equal `π(r)`.
pub fn stationarity_oracle(k: &KernelDensity, r: f64, quad: &Quadrature) -> f64 {
    quad.integrate(|rp| pi_density(rp) * k.eval(rp, r), &[0.0, r, 2.0 * r])
}

fn j2_at_2() -> f64 {
    bessel_j(2, 2.0)
}

/// Stationary density `π(r) = e^{-3|r|/2} J_1(2e^{-|r|/2}) / (2J_2(2))`.
pub fn pi_density(r: f64) -> f64 {
    let u = (-r.abs() / 2.0).exp();
    u * u * u * bessel_j(1, 2.0 * u) / (2.0 * j2_at_2())
}

/// Distribution function of `π`: `e^r J_2(2e^{r/2}) / (2J_2(2))` for `r <= 0`.
pub fn pi_cdf(r: f64) -> f64 {
    let lower = |r: f64| r.exp() * bessel_j(2, 2.0 * (r / 2.0).exp()) / (2.0 * j2_at_2());
    if r <= 0.0 {
        lower(r)
    } else {
        1.0 - lower(-r)
    }
}

/// Exact draw from `π`: Laplace(1/2) proposal accepted with probability
/// `J_1(2u)/u`, `u = e^{-|r|/2}` (overall acceptance `2J_2(2) ≈ 0.71`).
pub fn pi_sample<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let e = exp1(rng) / 2.0;
        let u = (-e / 2.0).exp();
        if open_unit(rng) <= bessel_j(1, 2.0 * u) / u {
            return if rng.random::<bool>() { e } else { -e };
        }
    }
}

/// Exact draw from `K(r', ·)`. For `r' > 0` the density splits into
/// `e^{2r - r'}` on `r < 0` (mass `e^{-r'}/2`), `e^{-r}` on `(0, r')`
/// (mass `1 - e^{-r'}`) and `e^{r' - 2r}` on `r > r'` (mass `e^{-r'}/2`);
/// `r' < 0` is the mirror image and `r' = 0` is Laplace(1/2).
pub fn delta_step_sample<R: Rng + ?Sized>(r_prev: f64, rng: &mut R) -> f64 {
    if r_prev == 0.0 {
        let e = exp1(rng) / 2.0;
        return if rng.random::<bool>() { e } else { -e };
    }
    let rp = r_prev.abs();
    let tail = 0.5 * (-rp).exp();
    let u = rng.random::<f64>();
    let r = if u < tail {
        -exp1(rng) / 2.0
    } else if u < 2.0 * tail {
        rp + exp1(rng) / 2.0
    } else {
        // inverse CDF of e^{-r} truncated to (0, r')
        let v = open_unit(rng);
        -(-v * (-(-rp).exp_m1())).ln_1p()
    };
    r.signum() * r.abs() * r_prev.signum()
}

/// State of the lifted chain `M_n = (Δ_n, X_{n+1}, Y_{n+1}, Z_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lifted {
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Lifted {
    /// Next rung difference `min{r+y, x+z} - min{r+y+z, x}`, which equals
    /// `r + y - x` clamped to `[-z, z]`.
    pub fn next_delta(&self) -> f64 {
        (self.r + self.y - self.x).clamp(-self.z, self.z)
    }

    /// Increment of the first-passage time, `f(m) = min{r+y+z, x}`.
    pub fn increment(&self) -> f64 {
        (self.r + self.y + self.z).min(self.x)
    }

    /// Draw from the stationary law `π ⊗ Exp(1)^3`.
    pub fn stationary<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Lifted {
            r: pi_sample(rng),
            x: exp1(rng),
            y: exp1(rng),
            z: exp1(rng),
        }
    }
}

/// One step of the lifted chain: the new rung difference is a deterministic
/// function of the old state and the new weights are fresh. This is the
/// push-forward form of the one-step lifted kernel, whose `r`-marginal is a
/// point mass.
pub fn lifted_step_sample<R: Rng + ?Sized>(m: &Lifted, rng: &mut R) -> Lifted {
    Lifted {
        r: m.next_delta(),
        x: exp1(rng),
        y: exp1(rng),
        z: exp1(rng),
    }
}

/// `K̃^n(m', m) = e^{-(x+y+z)} K^{n-1}(Δ_1(m'), r)` for `n >= 2`.
pub fn kn_lifted(n: usize, m_prev: &Lifted, m: &Lifted, family: &KernelFamily) -> Result<f64> {
    if n <= 1 {
        return Err(Error::DiracEvaluation);
    }
    if m.x < 0.0 || m.y < 0.0 || m.z < 0.0 {
        return Ok(0.0);
    }
    let k = family.density(n - 1)?;
    Ok((-(m.x + m.y + m.z)).exp() * k.eval(m_prev.next_delta(), m.r))
}

/// `ψ(r) = 1 - ∫ e^{-|ρ|} K(r, ρ) dρ`, the one-step drift of `V(r) = 1 - e^{-|r|}`.
pub fn psi(r: f64, quad: &Quadrature) -> f64 {
    1.0 - quad.integrate(|rho| (-rho.abs()).exp() * k1(r, rho), &[0.0, r, r / 2.0])
}

/// Closed form `(3 - 2e^{-|r|} + e^{-2|r|}) / 6`.
pub fn psi_closed(r: f64) -> f64 {
    let e = (-r.abs()).exp();
    (3.0 - 2.0 * e + e * e) / 6.0
}

/// Lyapunov function `V(r) = 1 - e^{-|r|}`.
pub fn lyapunov(r: f64) -> f64 {
    1.0 - (-r.abs()).exp()
}

/// Points spaced evenly on `[lo, hi]` and nudged off the case boundaries
/// `r = 0`, `r = r'` so that no comparison lands on a measure-zero seam.
pub fn offset_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64 + 0.0173)
        .collect()
}

/// Worst residuals of the quadrature oracles for one step count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResiduals {
    pub n: usize,
    /// `max |∫K^n(r', ·) - 1|` over `r' ∈ {-3, -1, 0, 1, 3}`.
    pub normalization: f64,
    /// `max |CK - K^n|` on a 9×9 grid over `[-3, 3]²`; absent for `n = 1`.
    pub chapman_kolmogorov: Option<f64>,
    /// `max |πK^n - π|` on 11 points over `[-4, 4]`.
    pub stationarity: f64,
    /// `max |K^n(r', r) - K^n(-r', -r)|` on the 9×9 grid.
    pub symmetry: f64,
}

pub fn oracle_residuals(n: usize, family: &KernelFamily, quad: &Quadrature) -> Result<OracleResiduals> {
    let k = family.density(n)?;
    let normalization = [-3.0, -1.0, 0.0, 1.0, 3.0]
        .iter()
        .map(|&rp| (kn_mass(k, rp, quad) - 1.0).abs())
        .fold(0.0, f64::max);
    let grid = offset_grid(-3.0, 3.0, 9);
    let pairs: Vec<(f64, f64)> = grid.iter().flat_map(|&a| grid.iter().map(move |&b| (a, b))).collect();
    let chapman_kolmogorov = if n >= 2 {
        let worst = pairs
            .par_iter()
            .map(|&(rp, r)| ck_oracle(n, rp, r, quad, family).map(|v| (v - k.eval(rp, r)).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Some(worst)
    } else {
        None
    };
    let stationarity = offset_grid(-4.0, 4.0, 11)
        .into_iter()
        .map(|r| (stationarity_oracle(k, r, quad) - pi_density(r)).abs())
        .fold(0.0, f64::max);
    let symmetry = pairs
        .iter()
        .map(|&(rp, r)| (k.eval(rp, r) - k.eval(-rp, -r)).abs())
        .fold(0.0, f64::max);
    Ok(OracleResiduals {
        n,
        normalization,
        chapman_kolmogorov,
        stationarity,
        symmetry,
    })
}

/// Drift of `V` evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    /// Rows `(r, ψ by quadrature, closed form, V(r))`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    pub max_closed_residual: f64,
    pub sup_psi: f64,
    /// `min (V(r) - 1/10 - ψ(r))` over grid points with `|r| >= 1`.
    pub lyapunov_margin: f64,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        self.max_closed_residual <= 1e-10 && (self.sup_psi - 0.5).abs() <= 1e-6 && self.lyapunov_margin >= 0.0
    }
}

/// `ψ` on `[-half_width, half_width]` with spacing `step`. The supremum is
/// the larger of the grid maximum and the closed form far out in the tail,
/// since `ψ` increases in `|r|` towards its limit.
pub fn drift_report(half_width: f64, step: f64, quad: &Quadrature) -> DriftReport {
    let count = (2.0 * half_width / step).round() as i64;
    let rows: Vec<(f64, f64, f64, f64)> = (0..=count)
        .into_par_iter()
        .map(|i| {
            let r = -half_width + i as f64 * step;
            (r, psi(r, quad), psi_closed(r), lyapunov(r))
        })
        .collect();
    let max_closed_residual = rows.iter().map(|t| (t.1 - t.2).abs()).fold(0.0, f64::max);
    let far = quad.cutoff() - 1.0;
    let sup_psi = rows.iter().map(|t| t.1).fold(psi(far, quad), f64::max);
    let lyapunov_margin = rows
        .iter()
        .filter(|t| t.0.abs() >= 1.0)
        .map(|t| t.3 - 0.1 - t.1)
        .fold(f64::INFINITY, f64::min);
    DriftReport {
        rows,
        max_closed_residual,
        sup_psi,
        lyapunov_margin,
    }
}
