//! Small exact-integer helpers shared by the series and recurrence engines.

use std::cell::RefCell;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Arbitrary-precision exact fraction, always in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `k!·(k+1)!`, the product that appears throughout the kernel formulas.
pub fn twin_factorial(k: u64) -> BigInt {
    let f = factorial(k);
    let g = &f * (k + 1);
    f * g
}

/// `(-1)^k`
pub fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `sign / denominator` as an exact rational.
pub fn signed_recip(sign: i64, den: BigInt) -> Rational {
    Rational::new(BigInt::from(sign), den)
}

thread_local! {
    static HARMONIC: RefCell<Vec<Rational>> = RefCell::new(vec![Rational::zero()]);
}

/// Harmonic number `H_k = 1 + 1/2 + ... + 1/k`, memoized per thread.
pub fn harmonic(k: usize) -> Rational {
    HARMONIC.with(|cache| {
        let mut cache = cache.borrow_mut();
        while cache.len() <= k {
            let next = cache.len();
            let value = cache[next - 1].clone() + rat(1, next as i64);
            cache.push(value);
        }
        cache[k].clone()
    })
}

/// `Σ_{l=2}^{k} (2l+1)/(l(l+1))`, zero for `k < 2`.
pub fn rung_correction(k: usize) -> Rational {
    (2..=k as i64).fold(Rational::zero(), |acc, l| {
        acc + rat(2 * l + 1, l * (l + 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), int(0));
        assert_eq!(harmonic(1), int(1));
        assert_eq!(harmonic(4), rat(25, 12));
    }

    #[test]
    fn twin_factorial_values() {
        assert_eq!(twin_factorial(0), BigInt::from(1));
        assert_eq!(twin_factorial(3), BigInt::from(144));
    }

    #[test]
    fn rung_correction_matches_harmonic_form() {
        // Σ_{l=2}^k (1/l + 1/(l+1)) = 2H_k - (5k+3)/(2(k+1))
        for k in 1..12usize {
            let closed = harmonic(k) * int(2) - rat(5 * k as i64 + 3, 2 * (k as i64 + 1));
            assert_eq!(rung_correction(k), closed, "k = {k}");
        }
    }
}
