//! Shared numerical kernels: stable log-sum-exp accumulation, log-binomials,
//! bracketed bisection and adaptive Simpson quadrature.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log Σ exp(x_i) over a slice (two-pass, max-subtracted).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - mx).exp()).sum();
    mx + s.ln()
}

/// Streaming log-sum-exp accumulator.
///
/// Terms are folded in the order they arrive; callers that need
/// schedule-independent results must feed terms in a fixed index order.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAcc {
    max: f64,
    sum: f64,
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

/// log cosh(x), stable for large |x|: |x| + log1p(e^{-2|x|}) - log 2.
#[inline]
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Table of log-factorials, log k! for k = 0..=n.
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn up_to(n: usize) -> Self {
        LnFactorials((0..=n).map(|k| ln_gamma(k as f64 + 1.0)).collect())
    }

    #[inline]
    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// log C(n, k).
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n);
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// Bisection on a bracket [lo, hi] with f(lo) and f(hi) of opposite sign.
/// Refines until the interval width drops below `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, f: F, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "bisect: no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scan [lo, hi] with the given step, bisecting every sign change of `f`.
/// Returns the refined roots in ascending order.
pub fn bracketed_roots<F: Fn(f64) -> f64 + Copy>(
    lo: f64,
    hi: f64,
    step: f64,
    f: F,
    xtol: f64,
) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..=n {
        let x = if i == n { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if f_prev.signum() != fx.signum() {
            if let Ok(r) = bisect(x_prev, x, f, xtol) {
                roots.push(r);
            }
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        roots.push(x_prev);
    }
    roots
}

/// Adaptive Simpson quadrature to absolute tolerance `tol` on [a, b].
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(Error::Numeric(
                "adaptive quadrature failed to converge".into(),
            ));
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}
