//! Exact and numeric tools for first-passage percolation on the ladder graph
//! `{0..n} x {0,1}` with i.i.d. unit-mean exponential edge weights.
//!
//! * [`series`]: truncated Laurent series over the rationals with formal
//!   Euler-γ and `log z` channels.
//! * [`genfun`]: generating functions of the n-step kernel coefficients.
//! * [`recurrence`]: the same coefficients by recursion in `n`.
//! * [`specfun`]: Bessel and hypergeometric functions and the summation
//!   identities behind the generating functions.
//! * [`kernel`]: one-step, n-step and lifted transition kernels, the
//!   stationary law, samplers and quadrature oracles.
//! * [`simulate`]: shortest paths, rate and CLT Monte Carlo.
//! * [`variance`]: two estimates of the CLT variance.

pub mod error;
pub mod exact;
pub mod genfun;
pub mod kernel;
pub mod quadrature;
pub mod recurrence;
pub mod report;
pub mod rng;
pub mod series;
pub mod simulate;
pub mod specfun;
pub mod stats;
pub mod tables;
pub mod variance;

pub use error::{Error, Result};
pub use exact::Rational;
pub use genfun::{coeff_tables, coeff_tables_upto, GenFun, NamedSeries, SeriesName};
pub use recurrence::{recur_init, recur_step, RecState};
pub use series::{GCoeff, GSeries, SeriesOrder};
pub use tables::CoeffTables;
