//! Bessel functions of integer order, `₂F₃({1,1},{2,2,2};x)`, the
//! b-derivative of the regularized `₀F̃₁`, and the summation identities
//! used to evaluate the kernel generating functions in closed form.
//!
//! Arguments never exceed a few units, so everything is plain power series
//! summed until the terms drop below `1e-18` relative (at most 200 terms).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::EULER_GAMMA;

const MAX_TERMS: usize = 200;
const REL_TOL: f64 = 1e-18;

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Sums `term(0), term(1), ...` until a term is negligible.
fn series_sum(mut term: impl FnMut(usize) -> f64) -> f64 {
    let mut s = CompensatedSum::new();
    for k in 0..MAX_TERMS {
        let t = term(k);
        s.add(t);
        // a leading term may vanish (e.g. a factor H_0 = 0), so never stop at k = 0
        if k > 0 && (t == 0.0 || t.abs() <= REL_TOL * s.value().abs()) {
            break;
        }
    }
    s.value()
}

fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |a, k| a * k as f64)
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// `J_ν(x)` by its power series with compensated summation.
pub fn bessel_j(nu: usize, x: f64) -> f64 {
    let h = x / 2.0;
    let lead = h.powi(nu as i32) / factorial(nu);
    let q = -h * h;
    // term_k = lead · q^k / (k!(k+ν)!/ν!)
    let mut t = lead;
    series_sum(|k| {
        if k > 0 {
            t *= q / (k as f64 * (k + nu) as f64);
        }
        t
    })
}

/// `J_ν(x)` summed naively from the highest term down; an independent
/// route to the same value used as a cross-check.
pub fn bessel_j_reverse(nu: usize, x: f64) -> f64 {
    let h = x / 2.0;
    let terms: Vec<f64> = (0..60)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * h.powi((2 * k + nu) as i32) / (factorial(k) * factorial(k + nu))
        })
        .collect();
    terms.iter().rev().sum()
}

/// `Y_ν(x)` for `x > 0` from the logarithmic series
/// `πY_ν(x) = 2J_ν(x)(log(x/2)+γ) - Σ_{k<ν} (ν-k-1)!/k! (x/2)^{2k-ν}
///            - Σ_k (-1)^k (H_k + H_{k+ν}) (x/2)^{2k+ν}/(k!(k+ν)!)`.
pub fn bessel_y(nu: usize, x: f64) -> Result<f64> {
    if x <= 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("Y_{nu}({x}) requires x > 0")));
    }
    let h = x / 2.0;
    let finite: f64 = (0..nu)
        .map(|k| factorial(nu - k - 1) / factorial(k) * h.powi(2 * k as i32 - nu as i32))
        .sum();
    let q = -h * h;
    let mut t = h.powi(nu as i32) / factorial(nu);
    let tail = series_sum(|k| {
        if k > 0 {
            t *= q / (k as f64 * (k + nu) as f64);
        }
        t * (harmonic(k) + harmonic(k + nu))
    });
    Ok((2.0 * bessel_j(nu, x) * (h.ln() + EULER_GAMMA) - finite - tail) / PI)
}

/// `₂F₃({1,1},{2,2,2};x) = Σ_k x^k / ((k+1)³ k!²)`.
pub fn hyp2f3(x: f64) -> f64 {
    let mut c = 1.0;
    series_sum(|k| {
        if k > 0 {
            c *= x / (k as f64 * k as f64);
        }
        c / ((k + 1) as f64).powi(3)
    })
}

/// `1/Γ(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    1.0 / statrs::function::gamma::gamma(x)
}

/// `₀F̃₁(;b;-z) = Σ_k (-z)^k/(k! Γ(k+b))` summed directly.
pub fn hyp0f1_regularized(b: f64, z: f64) -> f64 {
    let mut s = CompensatedSum::new();
    let mut p = 1.0;
    for k in 0..80 {
        if k > 0 {
            p *= -z / k as f64;
        }
        s.add(p * recip_gamma(k as f64 + b));
    }
    s.value()
}

/// Central finite difference of [`hyp0f1_regularized`] in `b`.
pub fn d0f1tilde_db_numeric(b: f64, z: f64, step: f64) -> f64 {
    (hyp0f1_regularized(b + step, z) - hyp0f1_regularized(b - step, z)) / (2.0 * step)
}

/// Closed form of `∂_b ₀F̃₁(;b;-z)` at `b = ν` for nonzero integer `ν`.
pub fn d0f1tilde_db(nu: i32, z: f64) -> Result<f64> {
    if z <= 0.0 {
        return Err(Error::Domain(format!("z = {z} must be positive")));
    }
    if nu == 0 || nu.abs() > 8 {
        return Err(Error::InvalidParameter(format!("nu = {nu} outside 1..=8 in absolute value")));
    }
    let x = 2.0 * z.sqrt();
    if nu > 0 {
        let v = nu as usize;
        let mut t = 1.0 / factorial(v - 1);
        let sum = series_sum(|k| {
            if k > 0 {
                t *= -z / (k as f64 * (k + v - 1) as f64);
            }
            t * harmonic(k + v - 1)
        });
        Ok(EULER_GAMMA * z.powf((1.0 - nu as f64) / 2.0) * bessel_j(v - 1, x) - sum)
    } else {
        let m = (-nu) as usize;
        let sgn = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut t = (-z).powi(m as i32 + 1) / factorial(m + 1);
        let sum = series_sum(|k| {
            if k > 0 {
                t *= -z / (k as f64 * (k + m + 1) as f64);
            }
            t * harmonic(k)
        });
        let finite: f64 = (0..=m).map(|k| z.powi(k as i32) * factorial(m - k) / factorial(k)).sum();
        Ok(-sgn * EULER_GAMMA * z.powf((m as f64 + 1.0) / 2.0) * bessel_j(m + 1, x) - sum + sgn * finite)
    }
}

/// The `b = -1` value written directly in Bessel functions.
pub fn d0f1tilde_db_minus_one(z: f64) -> Result<f64> {
    let x = 2.0 * z.sqrt();
    let l = z.ln();
    Ok(0.5
        * (PI * z * bessel_y(2, x)? - z.sqrt() * bessel_j(1, x) * (2.0 + l)
            + bessel_j(0, x) * (z * l - 1.0)))
}

/// `z^{-ν/2} J_ν(2√z)` written in terms of `J`.
fn jz(nu: usize, w: f64) -> f64 {
    bessel_j(nu, 2.0 * w.sqrt())
}

fn piy(nu: usize, w: f64) -> Result<f64> {
    Ok(PI * bessel_y(nu, 2.0 * w.sqrt())?)
}

/// Auxiliary functions evaluated numerically from their Bessel closed forms.
pub mod aux {
    use super::*;

    pub fn s1(z: f64) -> f64 {
        (z - 2.0 * jz(2, z)) / z
    }

    pub fn s2(z: f64) -> f64 {
        (2.0 * (z - 1.0) + 2.0 * jz(0, z)) / z
    }

    pub fn g(z: f64) -> Result<f64> {
        let ratio = piy(2, z)? / jz(2, z);
        Ok(-z.powi(3) / 4.0 * (5.0 - 4.0 * EULER_GAMMA + 2.0 * ratio - 2.0 * z.ln()))
    }

    pub fn alpha(z: f64) -> f64 {
        let s = z.sqrt();
        z.powi(4) / (4.0 * s * jz(2, z) * (s * jz(0, z) + (z - 1.0) * jz(1, z)))
    }

    pub fn h(z: f64) -> Result<f64> {
        let br = 3.0 * z - 3.0 + 2.0 * piy(0, z)? + jz(0, z) * (5.0 - 4.0 * EULER_GAMMA - 2.0 * z.ln());
        Ok(z * z / (2.0 * (1.0 - z)) * br)
    }

    pub fn d(z: f64) -> Result<f64> {
        let s = z.sqrt();
        Ok((s * jz(1, z) * (2.0 * EULER_GAMMA + z.ln()) - s * piy(1, z)? - 1.0) / z)
    }
}

/// Summation formulas and relation lemmas that can be checked numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IdentityName {
    S1,
    S2,
    S3,
    S4,
    Sigma1,
    Sigma2,
    Sigma3,
    Sigma4,
    T1,
    T2,
    U1,
    U2,
    Upsilon1,
    Upsilon2,
    Rel1,
    Rel2,
    HG1,
    HG2,
}

impl IdentityName {
    /// The fourteen summation formulas.
    pub const FORMULAS: [IdentityName; 14] = [
        IdentityName::S1,
        IdentityName::S2,
        IdentityName::S3,
        IdentityName::S4,
        IdentityName::Sigma1,
        IdentityName::Sigma2,
        IdentityName::Sigma3,
        IdentityName::Sigma4,
        IdentityName::T1,
        IdentityName::T2,
        IdentityName::U1,
        IdentityName::U2,
        IdentityName::Upsilon1,
        IdentityName::Upsilon2,
    ];

    pub const RELATIONS: [IdentityName; 2] = [IdentityName::Rel1, IdentityName::Rel2];

    pub const ALL: [IdentityName; 18] = [
        IdentityName::S1,
        IdentityName::S2,
        IdentityName::S3,
        IdentityName::S4,
        IdentityName::Sigma1,
        IdentityName::Sigma2,
        IdentityName::Sigma3,
        IdentityName::Sigma4,
        IdentityName::T1,
        IdentityName::T2,
        IdentityName::U1,
        IdentityName::U2,
        IdentityName::Upsilon1,
        IdentityName::Upsilon2,
        IdentityName::Rel1,
        IdentityName::Rel2,
        IdentityName::HG1,
        IdentityName::HG2,
    ];

    /// Formulas whose argument is the product `ζz`.
    pub fn takes_zeta(self) -> bool {
        use IdentityName::*;
        matches!(self, Sigma1 | Sigma2 | Sigma3 | Sigma4 | T1 | T2 | Upsilon1 | Upsilon2)
    }

    pub fn as_str(self) -> &'static str {
        use IdentityName::*;
        match self {
            S1 => "S1",
            S2 => "S2",
            S3 => "S3",
            S4 => "S4",
            Sigma1 => "Sigma1",
            Sigma2 => "Sigma2",
            Sigma3 => "Sigma3",
            Sigma4 => "Sigma4",
            T1 => "T1",
            T2 => "T2",
            U1 => "U1",
            U2 => "U2",
            Upsilon1 => "Upsilon1",
            Upsilon2 => "Upsilon2",
            Rel1 => "Rel1",
            Rel2 => "Rel2",
            HG1 => "HG1",
            HG2 => "HG2",
        }
    }
}

impl fmt::Display for IdentityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownIdentity(s.into()))
    }
}

/// One point at which an identity is checked. For the `HG` lemmas `nu` is the
/// order of the derivative point `b = ±nu`; it is ignored otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCase {
    pub name: IdentityName,
    pub z: f64,
    pub zeta: f64,
    pub nu: i32,
    pub k: usize,
}

impl IdentityCase {
    /// Argument actually fed to the formula.
    pub fn arg(&self) -> f64 {
        if self.name.takes_zeta() {
            self.zeta * self.z
        } else {
            self.z
        }
    }
}

fn fact(n: usize) -> f64 {
    factorial(n)
}

fn twin(n: usize) -> f64 {
    factorial(n) * factorial(n + 1)
}

fn rung(k: usize) -> f64 {
    (2..=k).map(|l| (2 * l + 1) as f64 / (l * (l + 1)) as f64).sum()
}

fn neg_pow(w: f64, k: usize) -> f64 {
    (-w).powi(k as i32)
}

fn s3_closed(w: f64) -> f64 {
    1.0 - jz(0, w) - w.sqrt() * jz(1, w)
}

fn u1_closed(z: f64) -> Result<f64> {
    let s = z.sqrt();
    let l = z.ln();
    Ok(0.75 * z * z - z - 2.0 - z * piy(2, z)?
        + s / 2.0 * jz(1, z) * (4.0 * EULER_GAMMA - 3.0 + 2.0 * l)
        + jz(0, z) * (1.0 + 2.5 * z - 2.0 * EULER_GAMMA * z - z * l))
}

fn u2_closed(z: f64) -> Result<f64> {
    Ok(z / 2.0
        * (-5.0 + 3.0 * z + 2.0 * piy(0, z)? - 2.0 * z * hyp2f3(-z)
            + jz(0, z) * (5.0 - 4.0 * EULER_GAMMA - 2.0 * z.ln())))
}

fn rel1_at(z: f64) -> Result<f64> {
    use aux::*;
    let (s1v, s2v) = (s1(z), s2(z));
    Ok((s2v / (2.0 * (1.0 - z)) + 1.0 / z) * g(z)?
        - (s1v / z + s2v / (1.0 - z) + 1.0 / z) * alpha(z)
        + h(z)? / 2.0
        + 0.75 * z * z)
}

/// Right-hand side of an identity (closed form in Bessel / hypergeometric
/// functions). For the relation lemmas this is the full left-hand
/// combination; for the `HG` lemmas it is the lemma's closed form.
pub fn closed_form(c: &IdentityCase) -> Result<f64> {
    use IdentityName::*;
    let w = c.arg();
    if w <= 0.0 {
        return Err(Error::Domain(format!("argument {w} must be positive")));
    }
    let s = w.sqrt();
    Ok(match c.name {
        S1 => (2.0 * jz(2, w) - w) / (2.0 * w),
        S2 => (1.0 - w - jz(0, w)) / w,
        S3 => s3_closed(w),
        S4 => w * w * hyp2f3(-w),
        Sigma1 => jz(1, w) / s * s3_closed(w),
        Sigma2 => (2.0 * jz(2, w) - w) * s * jz(1, w),
        Sigma3 => 2.0 * (w - 1.0 + jz(0, w)) * jz(1, w) / s,
        Sigma4 => -s * jz(1, w) * hyp2f3(-w),
        T1 => jz(1, w) / s,
        T2 => 1.0 - jz(0, w) - s * jz(1, w),
        U1 => u1_closed(w)?,
        U2 => u2_closed(w)?,
        Upsilon1 => jz(1, w) / s * u1_closed(w)?,
        Upsilon2 => -jz(1, w) / w.powf(1.5) * u2_closed(w)?,
        Rel1 => {
            // removable singularity at z = 1
            if (w - 1.0).abs() < 1e-3 {
                let e = 1e-4;
                0.5 * (rel1_at(w + e)? + rel1_at(w - e)?)
            } else {
                rel1_at(w)?
            }
        }
        Rel2 => u1_closed(w)? + s3_closed(w) + (aux::s1(w) - 1.0) / w * aux::g(w)?,
        HG1 => d0f1tilde_db(c.nu.abs(), w)?,
        HG2 => d0f1tilde_db(-c.nu.abs(), w)?,
    })
}

/// Left-hand side of an identity summed directly to truncation `k`. For the
/// relation lemmas this is the stated right-hand side; for the `HG` lemmas it
/// is a central finite difference of the directly summed `₀F̃₁`.
pub fn raw_sum(c: &IdentityCase) -> Result<f64> {
    use IdentityName::*;
    let w = c.arg();
    let kk = c.k;
    if kk < 20 {
        return Err(Error::InvalidParameter(format!("truncation {kk} below 20")));
    }
    let single = |f: &dyn Fn(usize) -> f64, from: usize| -> f64 {
        (from..kk).map(f).collect::<CompensatedSum>().value()
    };
    // Σ_{q<K} Σ_{k=lo}^{q-off} f(q,k)
    let double = |f: &dyn Fn(usize, usize) -> f64, lo: usize, off: usize| -> f64 {
        let mut s = CompensatedSum::new();
        for q in 0..kk {
            for k in lo..(q + 1).saturating_sub(off) {
                s.add(f(q, k));
            }
        }
        s.value()
    };
    Ok(match c.name {
        S1 => single(&|k| neg_pow(w, k) / (fact(k) * fact(k + 2)), 1),
        S2 => single(&|k| neg_pow(w, k) / fact(k + 1).powi(2), 1),
        S3 => single(&|n| neg_pow(w, n + 2) / (twin(n) * ((n + 2) as f64).powi(2)), 0),
        S4 => single(&|n| neg_pow(w, n + 2) / (twin(n) * ((n + 1) as f64).powi(2)), 0),
        Sigma1 => double(
            &|q, k| neg_pow(w, q) / (twin(k) * twin(q - k - 2) * ((k + 2) as f64).powi(2)),
            0,
            2,
        ),
        Sigma2 => double(
            &|q, k| 2.0 * neg_pow(w, q) / (fact(k) * fact(k + 2) * twin(q - k - 2)),
            1,
            2,
        ),
        Sigma3 => double(&|q, k| 2.0 * neg_pow(w, q) / (twin(q - k - 1) * fact(k + 1).powi(2)), 1, 1),
        Sigma4 => double(
            &|q, k| neg_pow(w, q) / (twin(k) * twin(q - k - 1) * ((k + 1) as f64).powi(2)),
            0,
            1,
        ),
        T1 => single(&|q| neg_pow(w, q) / twin(q), 0),
        T2 => single(&|q| neg_pow(w, q + 1) * q as f64 / fact(q + 1).powi(2), 0),
        U1 => single(&|k| neg_pow(w, k + 2) / (fact(k) * fact(k + 2)) * rung(k), 1),
        U2 => single(&|k| neg_pow(w, k + 2) / fact(k + 1).powi(2) * rung(k), 1),
        Upsilon1 => double(
            &|q, k| neg_pow(w, q) / (twin(q - k - 2) * fact(k) * fact(k + 2)) * rung(k),
            1,
            2,
        ),
        Upsilon2 => double(
            &|q, k| neg_pow(w, q) / (twin(q - k - 1) * fact(k + 1).powi(2)) * rung(k),
            1,
            1,
        ),
        Rel1 => 0.0,
        Rel2 => 0.75 * w * w - w - 1.0,
        HG1 => d0f1tilde_db_numeric(c.nu.abs() as f64, w, 1e-5),
        HG2 => d0f1tilde_db_numeric(-(c.nu.abs() as f64), w, 1e-5),
    })
}

/// One row of an identity-check report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: IdentityName,
    pub z: f64,
    pub zeta: f64,
    pub nu: i32,
    pub raw: f64,
    pub closed: f64,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Tolerance used by the check suite: `1e-10` except the finite-difference
/// comparisons of the `HG` lemmas (`1e-7`).
pub fn tolerance(name: IdentityName) -> f64 {
    match name {
        IdentityName::HG1 | IdentityName::HG2 => 1e-7,
        _ => 1e-10,
    }
}

pub fn check(c: &IdentityCase) -> Result<IdentityCheck> {
    let raw = raw_sum(c)?;
    let closed = closed_form(c)?;
    Ok(IdentityCheck {
        name: c.name,
        z: c.z,
        zeta: c.zeta,
        nu: c.nu,
        raw,
        closed,
        residual: (raw - closed).abs(),
        tolerance: tolerance(c.name),
    })
}

/// The grid `{0.25, 0.5, 1, 1.5, 2}` used throughout the checks.
pub const GRID: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

/// Every formula on the full grid (both `z` and `ζ` where the formula takes
/// `ζz`), both relation lemmas, and both branches of the `HG` lemma for
/// `ν ∈ {1,2,3}` at `z ∈ {0.5, 1, 2}`.
pub fn standard_cases(k: usize) -> Vec<IdentityCase> {
    let mut out = Vec::new();
    for name in IdentityName::FORMULAS.into_iter().chain(IdentityName::RELATIONS) {
        for z in GRID {
            let zetas: &[f64] = if name.takes_zeta() { &GRID } else { &[1.0] };
            for &zeta in zetas {
                out.push(IdentityCase { name, z, zeta, nu: 0, k });
            }
        }
    }
    for name in [IdentityName::HG1, IdentityName::HG2] {
        for nu in 1..=3 {
            for z in [0.5, 1.0, 2.0] {
                out.push(IdentityCase { name, z, zeta: 1.0, nu, k });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{bessel_piy_core, SeriesOrder};

    fn case(name: IdentityName, z: f64) -> IdentityCase {
        IdentityCase { name, z, zeta: 1.0, nu: 0, k: 40 }
    }

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn j_recurrence_at_two() {
        let r = bessel_j(2, 2.0) - (bessel_j(1, 2.0) - bessel_j(0, 2.0));
        assert!(r.abs() <= 1e-13, "{r}");
    }

    #[test]
    fn j_two_summation_orders_agree() {
        for nu in 0..4 {
            for x in [0.3, 1.0, 2.0, 3.5] {
                let d = bessel_j(nu, x) - bessel_j_reverse(nu, x);
                assert!(d.abs() <= 1e-13, "nu {nu} x {x}: {d}");
            }
        }
        // Reference values of J_1(2), J_2(2)
        assert!((bessel_j(1, 2.0) - 0.576_724_807_756_873_6).abs() < 1e-14);
        assert!((bessel_j(2, 2.0) - 0.352_834_028_615_637_73).abs() < 1e-14);
    }

    #[test]
    fn y_reference_values() {
        // Y_0(1), Y_1(1), Y_2(2)
        assert!((bessel_y(0, 1.0).unwrap() - 0.088_256_964_215_677).abs() < 1e-13);
        assert!((bessel_y(1, 1.0).unwrap() + 0.781_212_821_300_288_9).abs() < 1e-13);
        assert!((bessel_y(2, 2.0).unwrap() + 0.617_408_104_190_682_8).abs() < 1e-13);
    }

    #[test]
    fn y_domain() {
        assert!(matches!(bessel_y(0, 0.0), Err(Error::Domain(_))));
        assert!(bessel_y(0, 1e-8).unwrap() < -10.0);
    }

    #[test]
    fn y0_decomposition_is_even_series() {
        // πY_0(x) - 2J_0(x)(log(x/2)+γ) = -Σ (-1)^k 2H_k (x/2)^{2k}/k!²
        let x: f64 = 1.0;
        let lhs = PI * bessel_y(0, x).unwrap() - 2.0 * bessel_j(0, x) * ((x / 2.0).ln() + EULER_GAMMA);
        let rhs: f64 = -(0..30)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * 2.0 * harmonic(k) * (x / 2.0).powi(2 * k as i32) / factorial(k).powi(2)
            })
            .sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn piy_core_matches_numeric_y() {
        for nu in 0..4 {
            let s = bessel_piy_core(nu, SeriesOrder::new(30).unwrap());
            for z in [0.05f64, 0.25, 0.7, 1.3, 2.0] {
                let want = z.powf(nu as f64 / 2.0) * PI * bessel_y(nu, 2.0 * z.sqrt()).unwrap();
                assert!((s.eval(z) - want).abs() <= 1e-10, "nu {nu} z {z}");
            }
        }
    }

    #[test]
    fn hyp2f3_values() {
        assert_eq!(hyp2f3(0.0), 1.0);
        let h = 1e-6;
        let slope = (hyp2f3(h) - hyp2f3(-h)) / (2.0 * h);
        assert!((slope - 0.125).abs() < 1e-9);
        let direct: f64 = (0..30).map(|k| (-1f64).powi(k) / ((k + 1) as f64).powi(3) / factorial(k as usize).powi(2)).sum();
        assert!((hyp2f3(-1.0) - direct).abs() < 1e-15);
    }

    #[test]
    fn hg_lemma_minus_one_matches_bessel_form() {
        let z = 0.5;
        let d = d0f1tilde_db(-1, z).unwrap() - d0f1tilde_db_minus_one(z).unwrap();
        assert!(d.abs() <= 1e-10, "{d}");
    }

    #[test]
    fn hg_lemma_matches_finite_difference() {
        for nu in [2, -1] {
            let fd = d0f1tilde_db_numeric(nu as f64, 1.0, 1e-5);
            let cf = d0f1tilde_db(nu, 1.0).unwrap();
            assert!((fd - cf).abs() <= 1e-7, "nu {nu}: {fd} vs {cf}");
        }
    }

    #[test]
    fn t1_near_zero() {
        let c = closed_form(&case(IdentityName::T1, 1e-12)).unwrap();
        assert!((c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn s3_at_one() {
        let c = case(IdentityName::S3, 1.0);
        assert!((raw_sum(&c).unwrap() - closed_form(&c).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn rel1_at_point_seven() {
        let r = closed_form(&case(IdentityName::Rel1, 0.7)).unwrap();
        assert!(r.abs() <= 1e-10, "{r}");
    }

    #[test]
    fn unknown_identity() {
        assert!(matches!("S9".parse::<IdentityName>(), Err(Error::UnknownIdentity(_))));
        assert_eq!("sigma3".parse::<IdentityName>().unwrap(), IdentityName::Sigma3);
    }

    #[test]
    fn short_truncation_rejected() {
        let mut c = case(IdentityName::S1, 1.0);
        c.k = 10;
        assert!(raw_sum(&c).is_err());
    }
}
