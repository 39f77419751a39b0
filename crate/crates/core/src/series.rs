//! Truncated Laurent series over the rationals, extended linearly by Euler's
//! constant and by a single `log z` channel.
//!
//! A [`GSeries`] represents
//!
//! ```text
//!   Σ_k (a_k + a'_k γ) z^k  +  log(z) · Σ_k (b_k + b'_k γ) z^k  +  O(z^{order+1})
//! ```
//!
//! which is exactly the shape of the small-argument expansions of
//! `J_ν(2√z)` and `π Y_ν(2√z)` at integer order. Products that would create
//! `log² z` or `γ²` are rejected: they never arise when assembling the kernel
//! generating functions, and every assembled function must end up with both
//! auxiliary channels identically zero.
//!
//! Each series carries its own precision (`order`): products and quotients
//! shrink it the way formal power series arithmetic requires, so a
//! coefficient reported by [`GSeries::coeff`] is always exact.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, harmonic, int, sign, Rational};

/// Lowest power of `z` a series may start at.
pub const MIN_VALUATION: i64 = -8;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Truncation order shared by a pipeline computation: every series is
/// expanded through `z^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SeriesOrder(usize);

impl SeriesOrder {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("series order must be >= 1".into()));
        }
        Ok(SeriesOrder(n))
    }

    /// Order sufficient for kernel coefficients up to step `n_max`.
    pub fn for_steps(n_max: usize) -> Self {
        SeriesOrder(n_max.max(1) + 2)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub(crate) fn as_i64(self) -> i64 {
        self.0 as i64
    }
}

/// `c0 + cγ·γ` with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GCoeff {
    pub value: Rational,
    pub gamma: Rational,
}

impl GCoeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(value: Rational) -> Self {
        GCoeff {
            value,
            gamma: Rational::zero(),
        }
    }

    pub fn new(value: Rational, gamma: Rational) -> Self {
        GCoeff { value, gamma }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero() && self.gamma.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.gamma.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        GCoeff {
            value: &self.value * c,
            gamma: &self.gamma * c,
        }
    }

    pub fn try_mul(&self, other: &GCoeff) -> Result<GCoeff> {
        if !self.gamma.is_zero() && !other.gamma.is_zero() {
            return Err(Error::GammaOverflow);
        }
        Ok(GCoeff {
            value: &self.value * &other.value,
            gamma: &self.value * &other.gamma + &self.gamma * &other.value,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN) + self.gamma.to_f64().unwrap_or(f64::NAN) * EULER_GAMMA
    }
}

impl Add for &GCoeff {
    type Output = GCoeff;
    fn add(self, rhs: &GCoeff) -> GCoeff {
        GCoeff {
            value: &self.value + &rhs.value,
            gamma: &self.gamma + &rhs.gamma,
        }
    }
}

impl Neg for &GCoeff {
    type Output = GCoeff;
    fn neg(self) -> GCoeff {
        GCoeff {
            value: -&self.value,
            gamma: -&self.gamma,
        }
    }
}

impl fmt::Display for GCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gamma.is_zero() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{} + ({})γ", self.value, self.gamma)
        }
    }
}

/// Truncated Laurent series with a γ channel and a `log z` channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSeries {
    valuation: i64,
    order: i64,
    plain: Vec<GCoeff>,
    // Empty when the log channel vanishes; otherwise same indexing as `plain`.
    log: Vec<GCoeff>,
}

impl GSeries {
    /// The zero series, known through `z^order`.
    pub fn zero(order: i64) -> Self {
        GSeries {
            valuation: order + 1,
            order,
            plain: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn one(order: i64) -> Self {
        Self::monomial(int(1), 0, order)
    }

    /// `c·z^power`, known through `z^order`.
    pub fn monomial(c: Rational, power: i64, order: i64) -> Self {
        Self::from_rationals(power, vec![c], order)
    }

    /// Series whose plain coefficients start at `z^valuation`.
    pub fn from_rationals(valuation: i64, coeffs: Vec<Rational>, order: i64) -> Self {
        let plain = coeffs.into_iter().map(GCoeff::rational).collect();
        Self::from_parts(valuation, plain, Vec::new(), order)
    }

    /// General constructor; `log` may be shorter than `plain` or empty.
    pub fn from_parts(valuation: i64, plain: Vec<GCoeff>, log: Vec<GCoeff>, order: i64) -> Self {
        let mut s = GSeries {
            valuation,
            order,
            plain,
            log,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let keep = (self.order - self.valuation + 1).max(0) as usize;
        self.plain.resize(keep, GCoeff::zero());
        if !self.log.is_empty() {
            self.log.resize(keep, GCoeff::zero());
        }
        if self.log.iter().all(GCoeff::is_zero) {
            self.log.clear();
        }
        let lead = (0..self.plain.len())
            .find(|&i| !self.plain[i].is_zero() || self.log.get(i).is_some_and(|c| !c.is_zero()));
        match lead {
            None => {
                self.valuation = self.order + 1;
                self.plain.clear();
                self.log.clear();
            }
            Some(0) => {}
            Some(i) => {
                self.plain.drain(..i);
                if !self.log.is_empty() {
                    self.log.drain(..i);
                }
                self.valuation += i as i64;
            }
        }
    }

    /// Lowest power with a nonzero coefficient (`order + 1` for zero).
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// Coefficients are exact through `z^order`.
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.plain.is_empty()
    }

    pub fn has_log(&self) -> bool {
        !self.log.is_empty()
    }

    pub fn has_gamma(&self) -> bool {
        self.plain.iter().chain(&self.log).any(|c| !c.is_rational())
    }

    /// No log channel and no γ anywhere.
    pub fn is_purely_rational(&self) -> bool {
        !self.has_log() && !self.has_gamma()
    }

    fn index(&self, power: i64) -> Option<usize> {
        if power < self.valuation || power > self.order {
            None
        } else {
            Some((power - self.valuation) as usize)
        }
    }

    /// Plain-part coefficient of `z^power`; zero outside the stored range.
    pub fn coeff(&self, power: i64) -> GCoeff {
        self.index(power)
            .and_then(|i| self.plain.get(i).cloned())
            .unwrap_or_default()
    }

    /// Coefficient of `z^power·log z`.
    pub fn log_coeff(&self, power: i64) -> GCoeff {
        self.index(power)
            .and_then(|i| self.log.get(i).cloned())
            .unwrap_or_default()
    }

    /// Exact rational coefficient of `z^power`. Fails if `power` lies beyond
    /// the known order.
    pub fn rational_coeff(&self, power: i64) -> Result<Rational> {
        if power > self.order {
            return Err(Error::InsufficientOrder {
                name: "series".into(),
                known: self.order,
                needed: power,
            });
        }
        Ok(self.coeff(power).value)
    }

    /// Fails with `ChannelResidue` if any γ or log coefficient is nonzero.
    pub fn check_rational(&self, name: &str) -> Result<()> {
        for (i, c) in self.plain.iter().enumerate() {
            if !c.is_rational() {
                return Err(Error::ChannelResidue {
                    name: name.into(),
                    power: self.valuation + i as i64,
                });
            }
        }
        if let Some(i) = self.log.iter().position(|c| !c.is_zero()) {
            return Err(Error::ChannelResidue {
                name: name.into(),
                power: self.valuation + i as i64,
            });
        }
        Ok(())
    }

    /// Drop everything above `z^order`.
    pub fn truncate(&self, order: i64) -> GSeries {
        let mut s = self.clone();
        s.order = s.order.min(order);
        s.normalize();
        s
    }

    /// Multiply by `z^k` (exact; precision moves with the shift).
    pub fn shift(&self, k: i64) -> GSeries {
        if self.is_zero() {
            return GSeries::zero(self.order + k);
        }
        GSeries {
            valuation: self.valuation + k,
            order: self.order + k,
            plain: self.plain.clone(),
            log: self.log.clone(),
        }
    }

    pub fn scale(&self, c: &Rational) -> GSeries {
        if c.is_zero() {
            return GSeries::zero(self.order);
        }
        GSeries {
            valuation: self.valuation,
            order: self.order,
            plain: self.plain.iter().map(|x| x.scale(c)).collect(),
            log: self.log.iter().map(|x| x.scale(c)).collect(),
        }
    }

    /// Multiply by a γ-linear scalar `c0 + cγ·γ`.
    pub fn scale_g(&self, c: &GCoeff) -> Result<GSeries> {
        let plain = self.plain.iter().map(|x| x.try_mul(c)).collect::<Result<Vec<_>>>()?;
        let log = self.log.iter().map(|x| x.try_mul(c)).collect::<Result<Vec<_>>>()?;
        Ok(GSeries::from_parts(self.valuation, plain, log, self.order))
    }

    fn combine(&self, other: &GSeries, negate: bool) -> GSeries {
        let order = self.order.min(other.order);
        let lo = self.valuation.min(other.valuation);
        if lo > order {
            return GSeries::zero(order);
        }
        let len = (order - lo + 1) as usize;
        let with_log = self.has_log() || other.has_log();
        let mut plain = vec![GCoeff::zero(); len];
        let mut log = if with_log { vec![GCoeff::zero(); len] } else { Vec::new() };
        for (i, slot) in plain.iter_mut().enumerate() {
            let p = lo + i as i64;
            let b = other.coeff(p);
            let b = if negate { -&b } else { b };
            *slot = &self.coeff(p) + &b;
        }
        for (i, slot) in log.iter_mut().enumerate() {
            let p = lo + i as i64;
            let b = other.log_coeff(p);
            let b = if negate { -&b } else { b };
            *slot = &self.log_coeff(p) + &b;
        }
        GSeries::from_parts(lo, plain, log, order)
    }

    /// Cauchy product, truncated at the joint precision.
    pub fn try_mul(&self, other: &GSeries) -> Result<GSeries> {
        if self.has_log() && other.has_log() {
            return Err(Error::LogSquared);
        }
        let order = (self.order + other.valuation).min(other.order + self.valuation);
        if self.is_zero() || other.is_zero() {
            return Ok(GSeries::zero(order));
        }
        let valuation = self.valuation + other.valuation;
        if valuation > order {
            return Ok(GSeries::zero(order));
        }
        let len = (order - valuation + 1) as usize;
        let convolve = |a: &[GCoeff], b: &[GCoeff]| -> Result<Vec<GCoeff>> {
            let mut out = vec![GCoeff::zero(); len];
            for (i, x) in a.iter().enumerate().take(len) {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b.iter().enumerate().take(len - i) {
                    if y.is_zero() {
                        continue;
                    }
                    let t = x.try_mul(y)?;
                    out[i + j] = &out[i + j] + &t;
                }
            }
            Ok(out)
        };
        let plain = convolve(&self.plain, &other.plain)?;
        let log = if self.has_log() {
            convolve(&self.log, &other.plain)?
        } else if other.has_log() {
            convolve(&self.plain, &other.log)?
        } else {
            Vec::new()
        };
        let out = GSeries::from_parts(valuation, plain, log, order);
        out.check_valuation()?;
        Ok(out)
    }

    /// Multiplicative inverse of a purely rational series.
    pub fn try_inverse(&self) -> Result<GSeries> {
        if self.is_zero() {
            return Err(Error::DivideByZeroSeries { order: self.order });
        }
        if !self.is_purely_rational() {
            return Err(Error::NonRationalDivisor);
        }
        let v = self.valuation;
        // 1/b = z^{-v} / b̃ with b̃ = b / z^v known through z^{order - v}.
        let inner_order = self.order - v;
        let len = (inner_order + 1) as usize;
        let b: Vec<&Rational> = self.plain.iter().map(|c| &c.value).collect();
        let lead_inv = Rational::from_integer(1.into()) / b[0];
        let mut inv: Vec<Rational> = Vec::with_capacity(len);
        inv.push(lead_inv.clone());
        for n in 1..len {
            let mut acc = Rational::zero();
            for k in 1..=n.min(b.len() - 1) {
                if !b[k].is_zero() {
                    acc += b[k] * &inv[n - k];
                }
            }
            inv.push(-acc * &lead_inv);
        }
        let out = GSeries::from_rationals(-v, inv, inner_order - v);
        out.check_valuation()?;
        Ok(out)
    }

    /// Laurent quotient `self / other`; `other` must be purely rational.
    pub fn try_div(&self, other: &GSeries) -> Result<GSeries> {
        let inv = other.try_inverse()?;
        self.try_mul(&inv)
    }

    fn check_valuation(&self) -> Result<()> {
        if !self.is_zero() && self.valuation < MIN_VALUATION {
            return Err(Error::ValuationUnderflow {
                valuation: self.valuation,
                min: MIN_VALUATION,
            });
        }
        Ok(())
    }

    /// Numeric value at `z > 0`, substituting γ and `log z`. Only meaningful
    /// where the truncated series has converged.
    pub fn eval(&self, z: f64) -> f64 {
        let mut plain = 0.0;
        let mut log = 0.0;
        for (i, c) in self.plain.iter().enumerate() {
            let zp = z.powi((self.valuation + i as i64) as i32);
            plain += c.to_f64() * zp;
            if let Some(l) = self.log.get(i) {
                log += l.to_f64() * zp;
            }
        }
        plain + log * z.ln()
    }
}

impl Add for &GSeries {
    type Output = GSeries;
    fn add(self, rhs: &GSeries) -> GSeries {
        self.combine(rhs, false)
    }
}

impl Sub for &GSeries {
    type Output = GSeries;
    fn sub(self, rhs: &GSeries) -> GSeries {
        self.combine(rhs, true)
    }
}

impl Neg for &GSeries {
    type Output = GSeries;
    fn neg(self) -> GSeries {
        self.scale(&int(-1))
    }
}

impl fmt::Display for GSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.plain.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})z^{}", self.valuation + i as i64)?;
        }
        for (i, c) in self.log.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})z^{}·log z", self.valuation + i as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.order + 1)
    }
}

/// `j_ν(z) = z^{-ν/2} J_ν(2√z) = Σ_k (-z)^k / (k!(k+ν)!)`.
pub fn bessel_j_core(nu: usize, order: SeriesOrder) -> GSeries {
    let n = order.as_i64();
    let coeffs = (0..=n as u64)
        .map(|k| Rational::new(sign(k as i64).into(), factorial(k) * factorial(k + nu as u64)))
        .collect();
    GSeries::from_rationals(0, coeffs, n)
}

/// `z^{ν/2}·π·Y_ν(2√z)` expanded around `z = 0`:
///
/// ```text
///   (log z + 2γ)·z^ν j_ν(z)
///     - Σ_{k<ν} (ν-k-1)!/k! z^k
///     - Σ_k (-1)^k (H_k + H_{k+ν}) z^{k+ν} / (k!(k+ν)!)
/// ```
pub fn bessel_piy_core(nu: usize, order: SeriesOrder) -> GSeries {
    let n = order.as_i64();
    let len = (n + 1) as usize;
    let mut plain = vec![GCoeff::zero(); len];
    let mut log = vec![GCoeff::zero(); len];
    for (k, slot) in plain.iter_mut().enumerate().take(nu) {
        slot.value -= Rational::new(factorial((nu - k - 1) as u64), factorial(k as u64));
    }
    for k in 0..len.saturating_sub(nu) {
        let base = Rational::new(
            sign(k as i64).into(),
            factorial(k as u64) * factorial((k + nu) as u64),
        );
        let slot = k + nu;
        plain[slot].value -= (harmonic(k) + harmonic(k + nu)) * &base;
        plain[slot].gamma += &base * int(2);
        log[slot].value += base;
    }
    GSeries::from_parts(0, plain, log, n)
}
