//! Composite Gauss–Legendre quadrature on a truncated real line.

use crate::error::{Error, Result};
use crate::specfun::CompensatedSum;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else { p1 };
            dp = m as f64 * (t * p - p0) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[m - 1 - i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite rule: the interval is cut at the supplied breakpoints and then
/// into panels no wider than `panel_width`, each integrated with an
/// `points`-point Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct Quadrature {
    cutoff: f64,
    panel_width: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(cutoff: f64, panels: usize, points: usize) -> Result<Self> {
        if cutoff < 30.0 {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff} below 30")));
        }
        if panels < 64 {
            return Err(Error::InvalidParameter(format!("panel count {panels} below 64")));
        }
        if points < 2 {
            return Err(Error::InvalidParameter("need at least 2 points per panel".into()));
        }
        let (nodes, weights) = gauss_legendre(points);
        Ok(Quadrature {
            cutoff,
            panel_width: 2.0 * cutoff / panels as f64,
            nodes,
            weights,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn panels(&self) -> usize {
        (2.0 * self.cutoff / self.panel_width).round() as usize
    }

    /// `∫_{-R}^{R} f` with extra breakpoints where `f` has kinks.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        self.integrate_on(f, -self.cutoff, self.cutoff, breaks)
    }

    /// `∫_a^b f` with extra breakpoints.
    pub fn integrate_on(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
        let mut acc = CompensatedSum::new();
        for seg in cuts.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            let n = ((hi - lo) / self.panel_width).ceil().max(1.0) as usize;
            let h = (hi - lo) / n as f64;
            for j in 0..n {
                let mid = lo + (j as f64 + 0.5) * h;
                let half = 0.5 * h;
                let mut s = 0.0;
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    s += w * f(mid + half * x);
                }
                acc.add(s * half);
            }
        }
        acc.value()
    }
}

impl Default for Quadrature {
    /// `[-30, 30]`, 120 panels of 16 points.
    fn default() -> Self {
        Quadrature::new(30.0, 120, 16).expect("valid defaults")
    }
}
