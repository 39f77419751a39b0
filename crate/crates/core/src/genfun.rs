//! Generating functions of the kernel coefficients.
//!
//! Every function is assembled from the Bessel cores of [`crate::series`]
//! with its Euler-γ and `log z` terms carried formally; after assembly both
//! channels must cancel, which is asserted rather than assumed.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{int, rat, rung_correction, sign, twin_factorial, Rational};
use crate::series::{bessel_j_core, bessel_piy_core, GCoeff, GSeries, SeriesOrder};
use crate::tables::CoeffTables;

/// Precision margin given to exact polynomials so they never limit a product.
const POLY_MARGIN: i64 = 8;

/// The auxiliary functions entering the coefficient generating functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesName {
    S1,
    S2,
    G,
    Alpha,
    H,
    D,
}

impl SeriesName {
    pub const ALL: [SeriesName; 6] = [
        SeriesName::S1,
        SeriesName::S2,
        SeriesName::G,
        SeriesName::Alpha,
        SeriesName::H,
        SeriesName::D,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesName::S1 => "S1",
            SeriesName::S2 => "S2",
            SeriesName::G => "G",
            SeriesName::Alpha => "alpha",
            SeriesName::H => "H",
            SeriesName::D => "D",
        }
    }
}

impl fmt::Display for SeriesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SeriesName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown series {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeries {
    pub name: SeriesName,
    pub series: GSeries,
}

fn poly(valuation: i64, coeffs: &[Rational], order: SeriesOrder) -> GSeries {
    GSeries::from_rationals(valuation, coeffs.to_vec(), order.as_i64() + POLY_MARGIN)
}

/// `c0 + cγ·γ + cl·log z` as a constant-term series.
fn const_with_channels(c0: i64, c_gamma: i64, c_log: i64, order: SeriesOrder) -> GSeries {
    GSeries::from_parts(
        0,
        vec![GCoeff::new(int(c0), int(c_gamma))],
        vec![GCoeff::rational(int(c_log))],
        order.as_i64() + POLY_MARGIN,
    )
}

/// Builds one of the auxiliary series, asserting that the γ and log
/// channels cancel.
pub fn build_named(name: SeriesName, order: SeriesOrder) -> Result<NamedSeries> {
    if order.get() < 3 {
        return Err(Error::InvalidParameter("series order must be >= 3".into()));
    }
    let series = match name {
        SeriesName::S1 => {
            // (z - 2 J_2(2√z))/z = 1 - 2 j_2
            &poly(0, &[int(1)], order) - &bessel_j_core(2, order).scale(&int(2))
        }
        SeriesName::S2 => {
            // (2(z-1) + 2 J_0(2√z))/z
            let num = &poly(0, &[int(-2), int(2)], order) + &bessel_j_core(0, order).scale(&int(2));
            num.shift(-1)
        }
        SeriesName::G => {
            // -z^3/4 [5 - 4γ + 2 πY_2/J_2 - 2 log z], πY_2/J_2 = piY_2 / (z^2 j_2)
            let ratio = bessel_piy_core(2, order).try_div(&bessel_j_core(2, order).shift(2))?;
            let bracket = &const_with_channels(5, -4, -2, order) + &ratio.scale(&int(2));
            bracket.shift(3).scale(&rat(-1, 4))
        }
        SeriesName::Alpha => {
            // z^2 / (4 j_2 (j_0 + (z-1) j_1))
            let j1_term = poly(0, &[int(-1), int(1)], order).try_mul(&bessel_j_core(1, order))?;
            let inner = &bessel_j_core(0, order) + &j1_term;
            let den = bessel_j_core(2, order).try_mul(&inner)?.scale(&int(4));
            poly(2, &[int(1)], order).try_div(&den)?
        }
        SeriesName::H => {
            // z^2/(2(1-z)) [3z - 3 + 2πY_0 + J_0 (5 - 4γ - 2 log z)]
            let j0_term = bessel_j_core(0, order).try_mul(&const_with_channels(5, -4, -2, order))?;
            let bracket = &(&poly(0, &[int(-3), int(3)], order) + &bessel_piy_core(0, order).scale(&int(2))) + &j0_term;
            let pre = poly(2, &[rat(1, 2)], order).try_div(&poly(0, &[int(1), int(-1)], order))?;
            pre.try_mul(&bracket)?
        }
        SeriesName::D => {
            // (1/z)[z j_1 (2γ + log z) - piY_1 - 1]
            let chan = const_with_channels(0, 2, 1, order);
            let first = bessel_j_core(1, order).shift(1).try_mul(&chan)?;
            let num = &(&first - &bessel_piy_core(1, order)) - &poly(0, &[int(1)], order);
            num.shift(-1)
        }
    };
    series.check_rational(name.as_str())?;
    Ok(NamedSeries { name, series })
}

/// All auxiliary series plus the generating functions `A`, `B`, `C` built
/// from them at a fixed expansion order.
#[derive(Debug, Clone)]
pub struct GenFun {
    order: SeriesOrder,
    s1: GSeries,
    s2: GSeries,
    g: GSeries,
    alpha: GSeries,
    h: GSeries,
    d: GSeries,
    // S2/(1-z)
    s2_geo: GSeries,
    // S1 + z S2/(2(1-z))
    c1_factor: GSeries,
}

impl GenFun {
    pub fn new(order: SeriesOrder) -> Result<Self> {
        let get = |name| build_named(name, order).map(|s| s.series);
        let s1 = get(SeriesName::S1)?;
        let s2 = get(SeriesName::S2)?;
        let geo = poly(0, &[int(1), int(-1)], order).try_inverse()?;
        let s2_geo = s2.try_mul(&geo)?;
        let c1_factor = &s1 + &s2_geo.shift(1).scale(&rat(1, 2));
        Ok(GenFun {
            order,
            s1,
            s2,
            g: get(SeriesName::G)?,
            alpha: get(SeriesName::Alpha)?,
            h: get(SeriesName::H)?,
            d: get(SeriesName::D)?,
            s2_geo,
            c1_factor,
        })
    }

    /// Pipeline sized for kernel coefficients up to step `n_max`.
    pub fn for_steps(n_max: usize) -> Result<Self> {
        Self::new(SeriesOrder::for_steps(n_max))
    }

    pub fn order(&self) -> SeriesOrder {
        self.order
    }

    pub fn named(&self, name: SeriesName) -> &GSeries {
        match name {
            SeriesName::S1 => &self.s1,
            SeriesName::S2 => &self.s2,
            SeriesName::G => &self.g,
            SeriesName::Alpha => &self.alpha,
            SeriesName::H => &self.h,
            SeriesName::D => &self.d,
        }
    }

    /// `d_q = [z^q] D`.
    pub fn d(&self, q: usize) -> Result<Rational> {
        self.d.rational_coeff(q as i64).map_err(|e| rename(e, "D"))
    }

    /// `(-z)^k / (k)^!` scaled by `c`.
    fn mono(&self, c: Rational, k: usize, twin: usize) -> GSeries {
        let c = c * Rational::new(sign(k as i64).into(), twin_factorial(twin as u64));
        GSeries::monomial(c, k as i64, self.order.as_i64() + POLY_MARGIN)
    }

    /// Multiply by `2(-z)^{p-1}/(p)^!`.
    fn lift(&self, s: &GSeries, p: usize) -> GSeries {
        let c = Rational::new((2 * sign(p as i64 - 1)).into(), twin_factorial(p as u64));
        s.shift(p as i64 - 1).scale(&c)
    }

    fn twin_shift(&self, s: &GSeries, q: usize) -> GSeries {
        let c = Rational::new(sign(q as i64).into(), twin_factorial(q as u64));
        s.shift(q as i64).scale(&c)
    }

    pub fn a(&self, p: usize, q: usize) -> Result<GSeries> {
        let a1 = self.twin_shift(&self.alpha, q);
        Ok(match p {
            0 => self.s2_geo.try_mul(&a1)?,
            1 => a1,
            _ => self.lift(&a1, p),
        })
    }

    fn b1(&self, q: usize) -> Result<GSeries> {
        Ok(&self.twin_shift(&self.g, q) - &self.a(1, q)?)
    }

    pub fn b(&self, p: usize, q: usize) -> Result<GSeries> {
        let b1 = self.b1(q)?;
        Ok(match p {
            0 => &self.s2_geo.try_mul(&b1)? + &self.twin_shift(&self.h, q),
            1 => b1,
            _ => {
                let corr = self.mono(rung_correction(p), p + q + 2, p);
                let corr = corr.scale(&Rational::new(1.into(), twin_factorial(q as u64)));
                &self.lift(&b1, p) + &corr
            }
        })
    }

    fn c0(&self, q: usize) -> Result<GSeries> {
        let dq = GSeries::monomial(self.d(q)?, q as i64 + 2, self.order.as_i64() + POLY_MARGIN);
        Ok(&(&dq + &self.b(0, q)?) - &self.mono(int(1), q + 2, q))
    }

    pub fn c(&self, p: usize, q: usize) -> Result<GSeries> {
        let c0 = self.c0(q)?;
        if p == 0 {
            return Ok(c0);
        }
        let c1 = &self.c1_factor.try_mul(&self.a(1, q)?)? - &c0.shift(1).scale(&rat(1, 2));
        Ok(if p == 1 { c1 } else { self.lift(&c1, p) })
    }

    /// Exact tables for every step `1..=n_max` from one expansion.
    pub fn tables_upto(&self, n_max: usize) -> Result<Vec<CoeffTables>> {
        let mut out: Vec<CoeffTables> = (1..=n_max).map(CoeffTables::zeros).collect();
        let extract = |s: &GSeries, name: &str, n: usize| {
            s.rational_coeff(n as i64).map_err(|e| rename(e, name))
        };
        for p in 0..=n_max {
            for q in 0..=n_max {
                let (a, b, c) = (self.a(p, q)?, self.b(p, q)?, self.c(p, q)?);
                for t in out.iter_mut().filter(|t| p <= t.n && q <= t.n) {
                    let n = t.n;
                    t.a[p][q] = extract(&a, "A", n)?;
                    t.b[p][q] = extract(&b, "B", n)?;
                    t.c[p][q] = extract(&c, "C", n)?;
                }
            }
        }
        for t in &mut out {
            t.d = (0..=t.n).map(|q| self.d(q)).collect::<Result<_>>()?;
        }
        Ok(out)
    }
}

fn rename(e: Error, name: &str) -> Error {
    match e {
        Error::InsufficientOrder { known, needed, .. } => Error::InsufficientOrder {
            name: name.into(),
            known,
            needed,
        },
        other => other,
    }
}

/// `A_{p,q}` expanded at `order`.
pub fn build_a(p: usize, q: usize, order: SeriesOrder) -> Result<GSeries> {
    GenFun::new(order)?.a(p, q)
}

pub fn build_b(p: usize, q: usize, order: SeriesOrder) -> Result<GSeries> {
    GenFun::new(order)?.b(p, q)
}

pub fn build_c(p: usize, q: usize, order: SeriesOrder) -> Result<GSeries> {
    GenFun::new(order)?.c(p, q)
}

/// Kernel coefficient tables at step `n`.
pub fn coeff_tables(n: usize) -> Result<CoeffTables> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut all = coeff_tables_upto(n)?;
    Ok(all.pop().expect("n >= 1"))
}

/// Tables for steps `1..=n_max`.
pub fn coeff_tables_upto(n_max: usize) -> Result<Vec<CoeffTables>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    GenFun::for_steps(n_max)?.tables_upto(n_max)
}

/// `(-1)^q (H_q + H_{q+1}) / (q!(q+1)!)`, a closed form for `[z^q] D`.
pub fn d_closed_form(q: usize) -> Rational {
    use crate::exact::harmonic;
    (harmonic(q) + harmonic(q + 1)) * Rational::new(sign(q as i64).into(), twin_factorial(q as u64))
}

/// True when every entry with `p + q > n` vanishes in all three tables.
pub fn support_holds(t: &CoeffTables) -> bool {
    (0..=t.n).all(|p| {
        (0..=t.n)
            .filter(|q| p + q > t.n)
            .all(|q| t.a[p][q].is_zero() && t.b[p][q].is_zero() && t.c[p][q].is_zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(n: usize) -> SeriesOrder {
        SeriesOrder::new(n).unwrap()
    }

    #[test]
    fn named_series_are_rational() {
        for name in SeriesName::ALL {
            let s = build_named(name, ord(10)).unwrap();
            assert!(s.series.is_purely_rational(), "{name}");
        }
    }

    #[test]
    fn s1_low_coefficients() {
        let s1 = build_named(SeriesName::S1, ord(5)).unwrap().series;
        assert_eq!(s1.rational_coeff(0).unwrap(), int(0));
        assert_eq!(s1.rational_coeff(1).unwrap(), rat(1, 3));
    }

    #[test]
    fn alpha_starts_at_z() {
        let a = build_named(SeriesName::Alpha, ord(5)).unwrap().series;
        assert_eq!(a.valuation(), 1);
        assert_eq!(a.rational_coeff(1).unwrap(), int(1));
        assert_eq!(a.rational_coeff(3).unwrap(), rat(11, 18));
    }

    #[test]
    fn d_low_coefficients() {
        let g = GenFun::for_steps(6).unwrap();
        let expect = [rat(1, 1), rat(-5, 4), rat(5, 18), rat(-47, 1728)];
        for (q, e) in expect.iter().enumerate() {
            assert_eq!(&g.d(q).unwrap(), e);
        }
    }

    #[test]
    fn d_matches_harmonic_closed_form() {
        let g = GenFun::for_steps(12).unwrap();
        for q in 0..=12 {
            assert_eq!(g.d(q).unwrap(), d_closed_form(q), "q = {q}");
        }
    }

    #[test]
    fn generating_functions_start_at_z() {
        let g = GenFun::for_steps(5).unwrap();
        for p in 0..5 {
            for q in 0..5 {
                for s in [g.a(p, q).unwrap(), g.b(p, q).unwrap(), g.c(p, q).unwrap()] {
                    assert!(s.is_zero() || s.valuation() >= 1, "({p},{q})");
                }
            }
        }
    }

    #[test]
    fn first_step_tables() {
        let t = coeff_tables(1).unwrap();
        for p in 0..=1 {
            for q in 0..=1 {
                let want = if (p, q) == (1, 0) { int(1) } else { int(0) };
                assert_eq!(t.a[p][q], want);
                assert!(t.b[p][q].is_zero() && t.c[p][q].is_zero());
            }
        }
    }

    #[test]
    fn unknown_series_name() {
        assert!("beta".parse::<SeriesName>().is_err());
        assert_eq!("Alpha".parse::<SeriesName>().unwrap(), SeriesName::Alpha);
    }

    #[test]
    fn low_order_rejected() {
        assert!(build_named(SeriesName::G, ord(2)).is_err());
    }
}
