//! Coefficient tables by direct recursion in the step count `n`.
//!
//! This engine shares no code with [`crate::genfun`] beyond exact integer
//! helpers, so agreement of the two is a genuine cross-check. The auxiliary
//! quantity `β^{n+1}_q` is computed from the step-`n` tables and compared
//! against its known value on every step.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, int, sign, twin_factorial, Rational};
use crate::genfun::d_closed_form;
use crate::tables::{CoeffTables, Table};

/// Tables at step `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecState {
    pub tables: CoeffTables,
}

impl RecState {
    pub fn n(&self) -> usize {
        self.tables.n
    }
}

fn d_list(n: usize) -> Vec<Rational> {
    (0..=n).map(d_closed_form).collect()
}

/// `σ / ((i)^! (j)^! · w²)` with `w` a positive integer weight.
fn twin_term(sg: i64, i: usize, j: usize, w: i64) -> Rational {
    Rational::new(
        sg.into(),
        twin_factorial(i as u64) * twin_factorial(j as u64) * (w * w),
    )
}

fn frac(num: i64, den: num_bigint::BigInt) -> Rational {
    Rational::new(num.into(), den)
}

/// Step 1: `a_{1,0} = 1`, everything else zero.
pub fn recur_init() -> RecState {
    let mut t = CoeffTables::zeros(1);
    t.a[1][0] = int(1);
    t.d = d_list(1);
    RecState { tables: t }
}

/// `Σ_{k=0}^{q-2} x_{k,q-k-2}/(k+2)`
fn diag_sum2(t: &CoeffTables, tab: Table, q: usize) -> Rational {
    (0..q.saturating_sub(1))
        .map(|k| t.get(tab, k as i64, (q - k - 2) as i64) / int(k as i64 + 2))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `Σ_{k=0}^{q-1} x_{k,q-k-1}/(k+1)`
fn diag_sum1(t: &CoeffTables, tab: Table, q: usize) -> Rational {
    (0..q)
        .map(|k| t.get(tab, k as i64, (q - k - 1) as i64) / int(k as i64 + 1))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `Σ_{k=0}^{n} x_{k,q}/(k+w)`
fn col_sum(t: &CoeffTables, tab: Table, q: usize, w: i64) -> Rational {
    (0..=t.n)
        .map(|k| t.get(tab, k as i64, q as i64) / int(k as i64 + w))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `Σ_{k=0}^{n-2} σ/((k)^!(n-k-2)^!(k+2)²)`
fn boundary_sum(n: usize, sg: i64) -> Rational {
    (0..n.saturating_sub(1))
        .map(|k| twin_term(sg, k, n - k - 2, k as i64 + 2))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Advances the tables from step `n` to `n+1`.
pub fn recur_step(s: &RecState) -> Result<RecState> {
    let t = &s.tables;
    let n = t.n;
    let m = n + 1;
    let sg = sign(n as i64);
    let mut out = CoeffTables::zeros(m);

    for q in 0..=m {
        let beta = beta_next(t, q);
        let expected = if q == n {
            frac(sg, twin_factorial(n as u64))
        } else {
            Rational::zero()
        };
        if beta != expected {
            return Err(Error::BetaMismatch {
                level: m,
                q,
                got: beta.to_string(),
                expected: expected.to_string(),
            });
        }
    }

    for p in 0..=m {
        for q in 0..=m {
            out.a[p][q] = next_a(t, p, q, sg);
            out.b[p][q] = next_b(t, p, q, sg);
            out.c[p][q] = next_c(t, p, q, sg);
        }
    }
    out.d = d_list(m);
    Ok(RecState { tables: out })
}

fn next_a(t: &CoeffTables, p: usize, q: usize, sg: i64) -> Rational {
    let n = t.n;
    let mut v = Rational::zero();
    if p == 0 {
        v += col_sum(t, Table::A, q, 1);
    } else {
        v -= t.get(Table::A, p as i64 - 1, q as i64) / int((p * (p + 1)) as i64);
    }
    if p == 1 {
        if q + 2 <= n {
            v += twin_term(sg, n - q - 2, q, (n - q) as i64);
        }
        if q + 1 == n {
            v -= frac(sg, twin_factorial(n as u64 - 1));
        }
        if q == n {
            v -= boundary_sum(n, sg);
            v += frac(sg * n as i64, factorial(n as u64 - 1) * factorial(n as u64 + 1));
        }
        v += col_sum(t, Table::B, q, 2);
        v -= diag_sum2(t, Table::B, q);
        v += diag_sum2(t, Table::C, q);
    }
    v
}

fn next_b(t: &CoeffTables, p: usize, q: usize, sg: i64) -> Rational {
    let n = t.n;
    let mut v = Rational::zero();
    if p == 1 {
        v += col_sum(t, Table::A, q, 2);
    }
    if p == 0 {
        if q + 1 == n {
            v -= frac(sg, twin_factorial(n as u64 - 1));
        }
        if q + 2 <= n {
            v += twin_term(sg, n - q - 2, q, (n - q - 1) as i64);
        }
        v += col_sum(t, Table::B, q, 1);
    } else {
        v -= t.get(Table::B, p as i64 - 1, q as i64) / int((p * (p + 1)) as i64);
        if p + q + 1 == n {
            let den = twin_factorial(p as u64) * twin_factorial((n - p - 1) as u64) * (p * (p + 1));
            v -= frac(sg * (2 * p as i64 + 1), den);
        }
    }
    v
}

fn next_c(t: &CoeffTables, p: usize, q: usize, sg: i64) -> Rational {
    let n = t.n;
    let mut v = Rational::zero();
    if p == 1 {
        v += col_sum(t, Table::A, q, 2);
    }
    if p >= 1 {
        v -= t.get(Table::C, p as i64 - 1, q as i64) / int((p * (p + 1)) as i64);
    } else {
        if q + 2 <= n {
            v += twin_term(sg, n - q - 2, q, (n - q - 1) as i64);
        }
        if q + 1 == n {
            let inner: Rational = (0..n - 1)
                .map(|k| twin_term(1, k, n - k - 2, k as i64 + 1))
                .fold(Rational::zero(), |a, b| a + b);
            let nf = factorial(n as u64);
            v -= (inner + Rational::new(1.into(), &nf * &nf)) * int(sg);
        }
        v += col_sum(t, Table::B, q, 1);
        v -= diag_sum1(t, Table::B, q);
        v += diag_sum1(t, Table::C, q);
    }
    v
}

/// `β^{n+1}_q` computed from the step-`n` tables.
fn beta_next(t: &CoeffTables, q: usize) -> Rational {
    let n = t.n;
    let sg = sign(n as i64);
    let mut v = diag_sum2(t, Table::C, q) - diag_sum2(t, Table::B, q);
    if q == n {
        let tf = twin_factorial(n as u64 - 1);
        v += frac(-sg, &tf * (n + 1)) + frac(sg, tf) - boundary_sum(n, sg);
    }
    v
}

/// Largest absolute defect of the relation
/// `Σ b_{k,q-k-2}/(k+2) - Σ c_{k,q-k-2}/(k+2) = δ_{q,n}[σ(n-1)/n!² - Σ σ/((k)^!(n-k-2)^!(k+2)²)]`
/// over `0 <= q <= n+2`. Zero for correct tables.
pub fn verify_beta_relation(s: &RecState) -> Rational {
    beta_relation_residual(&s.tables)
}

pub fn beta_relation_residual(t: &CoeffTables) -> Rational {
    let n = t.n;
    let sg = sign(n as i64);
    (0..=n + 2)
        .map(|q| {
            let lhs = diag_sum2(t, Table::B, q) - diag_sum2(t, Table::C, q);
            let rhs = if q == n {
                let nf = factorial(n as u64);
                frac(sg * (n as i64 - 1), &nf * &nf) - boundary_sum(n, sg)
            } else {
                Rational::zero()
            };
            (lhs - rhs).abs()
        })
        .max()
        .unwrap_or_default()
}

/// Largest absolute defect of the `d_q` relation
/// `Σ b_{k,q-k-1}/(k+1) - Σ c_{k,q-k-1}/(k+1) = δ_{q,n-1}[(-1)^{n-1}/n!² + Σ_k (-1)^q/((k)^!(q-k-1)^!(k+1)²) - d_q]`
/// over `0 <= q <= n+2`.
pub fn d_relation_residual(t: &CoeffTables) -> Rational {
    let n = t.n;
    (0..=n + 2)
        .map(|q| {
            let lhs = diag_sum1(t, Table::B, q) - diag_sum1(t, Table::C, q);
            let rhs = if q + 1 == n {
                let nf = factorial(n as u64);
                let sum: Rational = (0..q)
                    .map(|k| twin_term(sign(q as i64), k, q - k - 1, k as i64 + 1))
                    .fold(Rational::zero(), |a, b| a + b);
                Rational::new(sign(n as i64 - 1).into(), &nf * &nf) + sum - &t.d[q]
            } else {
                Rational::zero()
            };
            (lhs - rhs).abs()
        })
        .max()
        .unwrap_or_default()
}

/// Tables for steps `1..=n_max` by iterating [`recur_step`].
pub fn recur_tables_upto(n_max: usize) -> Result<Vec<CoeffTables>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut s = recur_init();
    let mut out = vec![s.tables.clone()];
    while s.n() < n_max {
        s = recur_step(&s)?;
        out.push(s.tables.clone());
    }
    Ok(out)
}
