//! Model parameters and the closed-form scalar functions of the mean-field
//! random-field Ising model and its single-parameter approximant: the field
//! shift induced by summing out the random fields, the Curie-Weiss
//! magnetization, the free-energy landscape and the single-site kernel with
//! its conditional means.

use crate::error::{Error, Result};
use crate::numerics::{log_cosh, log_sum_exp};
use serde::Serialize;

/// Physical parameters: inverse temperature, random-field strength and
/// homogeneous external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub beta: f64,
    pub eps: f64,
    pub h0: f64,
}

impl ModelParams {
    /// Requires beta > 0 and eps >= 0, all fields finite. eps = 0 is allowed
    /// as the pure Curie-Weiss degeneracy.
    pub fn new(beta: f64, eps: f64, h0: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::Domain(format!(
                "eps must be nonnegative, got {eps}"
            )));
        }
        if !h0.is_finite() {
            return Err(Error::Domain(format!("h0 must be finite, got {h0}")));
        }
        Ok(ModelParams { beta, eps, h0 })
    }

    pub fn with_h0(self, h0: f64) -> Result<Self> {
        ModelParams::new(self.beta, self.eps, h0)
    }
}

/// Model parameters together with the chemical potential lambda biasing the
/// random fields in the approximant joint measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoritaParams {
    pub model: ModelParams,
    pub lambda: f64,
}

impl MoritaParams {
    pub fn new(model: ModelParams, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(MoritaParams { model, lambda })
    }

    /// Effective homogeneous field h0 + shift felt by the spin marginal after
    /// the random fields are summed out.
    pub fn effective_field(&self) -> f64 {
        self.model.h0 + field_shift(self.model.beta, self.model.eps, self.lambda).unwrap()
    }
}

/// Branch selector for the Curie-Weiss magnetization at zero field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Field shift (1/2β)·log(cosh(λ+βε)/cosh(λ−βε)).
///
/// Odd and strictly increasing in λ, maps the reals into (−ε, ε). Evaluated
/// through `log_cosh` so large |λ| cannot overflow.
pub fn field_shift(beta: f64, eps: f64, lambda: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    if !eps.is_finite() || eps < 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "field_shift needs finite eps >= 0 and lambda, got eps={eps}, lambda={lambda}"
        )));
    }
    let be = beta * eps;
    Ok((log_cosh(lambda + be) - log_cosh(lambda - be)) / (2.0 * beta))
}

/// Curie-Weiss magnetization: the solution of m = tanh(β(m+h)) with the sign
/// of h. At h = 0 the `side` selector picks the branch; for β ≤ 1 the root is
/// 0 regardless of side.
pub fn curie_weiss_magnetization(beta: f64, h: f64, side: Side) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    if !h.is_finite() {
        return Err(Error::Domain(format!("h must be finite, got {h}")));
    }
    if h == 0.0 {
        if beta <= 1.0 {
            return Ok(0.0);
        }
        // positive spontaneous root; f < 0 just above 0 and f(1) > 0
        let root = crate::numerics::bisect(1e-15, 1.0, |m| m - (beta * m).tanh(), 1e-16)?;
        return Ok(side.sign() * root);
    }
    // Grid scan brackets every sign change of m - tanh(β(m+h)); the branch
    // with the sign of h holds exactly one root.
    let bound = 1.0 + h.abs();
    let roots = crate::numerics::bracketed_roots(
        -bound,
        bound,
        1e-3,
        |m| m - (beta * (m + h)).tanh(),
        1e-16,
    );
    let root = if h > 0.0 {
        roots.iter().cloned().find(|&m| m > 0.0)
    } else {
        roots.iter().rev().cloned().find(|&m| m < 0.0)
    };
    root.ok_or_else(|| Error::Numeric(format!("no magnetization root with the sign of h = {h}")))
}

fn kernel_exponent(m: f64, p: &MoritaParams, sigma: f64, eta: f64) -> f64 {
    let ModelParams { beta, eps, h0 } = p.model;
    beta * (m + eps * eta + h0) * sigma + p.lambda * eta
}

/// Free-energy landscape of the approximant at magnetization parameter m:
/// m²/2 − (1/β)·log Σ_{k=±1} cosh(β(m+εk+h₀))·e^{λk}, with no additive
/// constant subtracted. Stationary points satisfy m = tanh(β(m+ĥ)).
pub fn free_energy(m: f64, params: &MoritaParams) -> f64 {
    let xs = [
        kernel_exponent(m, params, 1.0, 1.0),
        kernel_exponent(m, params, 1.0, -1.0),
        kernel_exponent(m, params, -1.0, 1.0),
        kernel_exponent(m, params, -1.0, -1.0),
    ];
    // Σ_k cosh(·)e^{λk} = (1/2) Σ_{s,k} exp(s·β(m+εk+h₀)+λk)
    m * m / 2.0 - (log_sum_exp(&xs) - std::f64::consts::LN_2) / params.model.beta
}

/// The 4-entry joint probability table of one (spin, field) pair given the
/// magnetization parameter m.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingleSiteKernel {
    /// Entries indexed by [σ][η] with index 0 ↦ +1 and 1 ↦ −1.
    p: [[f64; 2]; 2],
    /// The magnetization parameter the table was built from.
    pub m: f64,
}

#[inline]
fn idx(v: f64) -> usize {
    if v > 0.0 {
        0
    } else {
        1
    }
}

#[inline]
fn sign_of(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SingleSiteKernel {
    /// Normalized table exp(β(m+εη+h₀)σ + λη)/Z, max-subtracted before
    /// exponentiation.
    pub fn new(m: f64, params: &MoritaParams) -> Self {
        let mut x = [[0.0; 2]; 2];
        let mut mx = f64::NEG_INFINITY;
        for (si, se) in [(0usize, 1.0), (1, -1.0)] {
            for (ei, ee) in [(0usize, 1.0), (1, -1.0)] {
                let v = kernel_exponent(m, params, se, ee);
                x[si][ei] = v;
                mx = mx.max(v);
            }
        }
        let mut p = [[0.0; 2]; 2];
        let mut z = 0.0;
        for s in 0..2 {
            for e in 0..2 {
                p[s][e] = (x[s][e] - mx).exp();
                z += p[s][e];
            }
        }
        for row in &mut p {
            for v in row.iter_mut() {
                *v /= z;
            }
        }
        SingleSiteKernel { p, m }
    }

    /// Probability of (σ, η), each argument ±1.
    pub fn prob(&self, sigma: i8, eta: i8) -> f64 {
        self.p[idx(sigma as f64)][idx(eta as f64)]
    }

    /// The same entry through the factorized form
    /// Prob(σ)·Prob(η|σ) = logistic(2β(m+ĥ)σ)·logistic(2(βεσ+λ)η).
    pub fn factorized_prob(&self, params: &MoritaParams, sigma: i8, eta: i8) -> f64 {
        fn logistic(x: f64) -> f64 {
            if x >= 0.0 {
                1.0 / (1.0 + (-x).exp())
            } else {
                let e = x.exp();
                e / (1.0 + e)
            }
        }
        let s = sigma as f64;
        let e = eta as f64;
        let hhat = params.effective_field();
        let beta = params.model.beta;
        logistic(2.0 * beta * (self.m + hhat) * s)
            * logistic(2.0 * (beta * params.model.eps * s + params.lambda) * e)
    }

    pub fn entries(&self) -> [(i8, i8, f64); 4] {
        [
            (1, 1, self.p[0][0]),
            (1, -1, self.p[0][1]),
            (-1, 1, self.p[1][0]),
            (-1, -1, self.p[1][1]),
        ]
    }

    /// Expectation of σ computed from the table.
    pub fn spin_expectation(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += sign_of(i) * self.p[i][j];
            }
        }
        s
    }

    /// Expectation of η computed from the table.
    pub fn field_expectation(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += sign_of(j) * self.p[i][j];
            }
        }
        s
    }
}

/// Build the single-site kernel table for parameter m.
pub fn single_site_kernel(m: f64, params: &MoritaParams) -> SingleSiteKernel {
    SingleSiteKernel::new(m, params)
}

fn mean_ratio(m: f64, params: &MoritaParams, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let combos = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let xs: Vec<f64> = combos
        .iter()
        .map(|&(s, e)| kernel_exponent(m, params, s, e))
        .collect();
    let mx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&(s, e), &x) in combos.iter().zip(&xs) {
        let w = (x - mx).exp();
        num += weight(s, e) * w;
        den += w;
    }
    num / den
}

/// Mean of σ under the single-site kernel:
/// Σ_k sinh(β(m+εk+h₀))e^{λk} / Σ_k cosh(β(m+εk+h₀))e^{λk}.
pub fn spin_mean(m: f64, params: &MoritaParams) -> f64 {
    mean_ratio(m, params, |s, _| s)
}

/// Mean of η under the single-site kernel:
/// Σ_k k·cosh(β(m+εk+h₀))e^{λk} / Σ_k cosh(β(m+εk+h₀))e^{λk}.
pub fn field_mean(m: f64, params: &MoritaParams) -> f64 {
    mean_ratio(m, params, |_, e| e)
}

/// Mean of η through the tanh identity
/// (B(1−L²)·s̄ + L(1−B²))/(1−B²L²) with L = tanh λ, B = tanh βε and s̄ the
/// spin mean. Used as an algebraic cross-route for `field_mean`.
pub fn field_mean_tanh_form(spin_mean: f64, beta: f64, eps: f64, lambda: f64) -> f64 {
    let l = lambda.tanh();
    let b = (beta * eps).tanh();
    (b * (1.0 - l * l) * spin_mean + l * (1.0 - b * b)) / (1.0 - b * b * l * l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(beta: f64, eps: f64, h0: f64, lambda: f64) -> MoritaParams {
        MoritaParams::new(ModelParams::new(beta, eps, h0).unwrap(), lambda).unwrap()
    }

    #[test]
    fn field_shift_odd_at_zero() {
        assert_eq!(field_shift(1.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn field_shift_reference_value() {
        // (1/2)·log(cosh 2 / cosh 0), high-precision reference 0.66250137367893221547
        let v = field_shift(1.0, 1.0, 1.0).unwrap();
        assert!((v - 0.66250137367893221547).abs() < 1e-14);
    }

    #[test]
    fn field_shift_saturates_from_below() {
        let v = field_shift(1.0, 1.0, 20.0).unwrap();
        assert!(v > 0.999 && v < 1.0);
    }

    #[test]
    fn field_shift_rejects_non_finite() {
        assert!(field_shift(1.0, 1.0, f64::NAN).is_err());
        assert!(field_shift(f64::INFINITY, 1.0, 0.0).is_err());
        assert!(field_shift(1.0, -0.5, 0.0).is_err());
    }

    #[test]
    fn magnetization_subcritical_is_zero() {
        assert_eq!(
            curie_weiss_magnetization(0.5, 0.0, Side::Plus).unwrap(),
            0.0
        );
    }

    #[test]
    fn magnetization_reference_value() {
        // root of m = tanh(2m), high-precision reference 0.95750402407726874068
        let m = curie_weiss_magnetization(2.0, 0.0, Side::Plus).unwrap();
        assert!((m - 0.95750402407726874068).abs() < 1e-13);
        assert!((m - (2.0 * m).tanh()).abs() < 1e-12);
    }

    #[test]
    fn magnetization_odd_in_h() {
        let mp_ = curie_weiss_magnetization(2.0, 0.1, Side::Plus).unwrap();
        let mm = curie_weiss_magnetization(2.0, -0.1, Side::Plus).unwrap();
        assert!((mp_ + mm).abs() < 1e-12);
    }

    #[test]
    fn magnetization_side_selects_branch() {
        let p = curie_weiss_magnetization(2.0, 0.0, Side::Plus).unwrap();
        let m = curie_weiss_magnetization(2.0, 0.0, Side::Minus).unwrap();
        assert_eq!(p, -m);
        assert!(p > 0.9);
    }

    #[test]
    fn free_energy_stationary_at_effective_magnetization() {
        let p = mp(2.0, 0.3, 0.1, 0.4);
        let hhat = p.effective_field();
        let m = curie_weiss_magnetization(2.0, hhat, Side::Plus).unwrap();
        let d = 1e-6;
        let deriv = (free_energy(m + d, &p) - free_energy(m - d, &p)) / (2.0 * d);
        assert!(deriv.abs() < 1e-6, "derivative {deriv} at stationary point");
    }

    #[test]
    fn free_energy_flip_symmetry_at_zero_h0() {
        let p1 = mp(1.7, 0.4, 0.0, 0.6);
        let p2 = mp(1.7, 0.4, 0.0, -0.6);
        for m in [-1.3, -0.2, 0.7] {
            assert!((free_energy(m, &p1) - free_energy(-m, &p2)).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_normalized_and_symmetric_case_uniform_marginal() {
        let p = mp(1.1, 0.5, 0.0, 0.0);
        let k = single_site_kernel(0.0, &p);
        let total: f64 = k.entries().iter().map(|&(_, _, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // η-marginal uniform at full symmetry
        let eta_plus = k.prob(1, 1) + k.prob(-1, 1);
        assert!((eta_plus - 0.5).abs() < 1e-14);
    }

    #[test]
    fn kernel_lines_agree_entrywise() {
        let p = mp(1.9, 0.7, -0.2, 0.8);
        let k = single_site_kernel(0.45, &p);
        for (s, e, v) in k.entries() {
            assert!((v - k.factorized_prob(&p, s, e)).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_conditional_field_mean_is_tanh() {
        let p = mp(1.4, 0.6, 0.15, -0.35);
        let k = single_site_kernel(0.3, &p);
        for s in [1i8, -1] {
            let ps = k.prob(s, 1) + k.prob(s, -1);
            let cond = (k.prob(s, 1) - k.prob(s, -1)) / ps;
            let expect = (p.lambda + p.model.beta * p.model.eps * s as f64).tanh();
            assert!((cond - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn means_vanish_in_symmetric_case() {
        let p = mp(2.0, 0.3, 0.0, 0.0);
        assert!(spin_mean(0.0, &p).abs() < 1e-15);
        assert!(field_mean(0.0, &p).abs() < 1e-15);
    }

    #[test]
    fn means_reference_values() {
        // (β=2, ε=0.3, h₀=0, λ=0, m=0.5), high-precision kernel expectations:
        // spin 0.76159415595576488812 (= tanh 1), field 0.40901381168427768951
        let p = mp(2.0, 0.3, 0.0, 0.0);
        assert!((spin_mean(0.5, &p) - 0.76159415595576488812).abs() < 1e-14);
        assert!((field_mean(0.5, &p) - 0.40901381168427768951).abs() < 1e-14);
    }

    #[test]
    fn means_match_kernel_expectations() {
        let p = mp(1.6, 0.45, -0.1, 0.25);
        for m in [-0.8, 0.0, 0.33, 1.2] {
            let k = single_site_kernel(m, &p);
            assert!((spin_mean(m, &p) - k.spin_expectation()).abs() < 1e-13);
            assert!((field_mean(m, &p) - k.field_expectation()).abs() < 1e-13);
        }
    }

    #[test]
    fn field_mean_matches_tanh_form() {
        let p = mp(2.2, 0.55, 0.05, -0.7);
        for m in [-1.0, -0.1, 0.6] {
            let s = spin_mean(m, &p);
            let via_tanh = field_mean_tanh_form(s, p.model.beta, p.model.eps, p.lambda);
            assert!((field_mean(m, &p) - via_tanh).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        // β(|m|+ε+|h₀|)+|λ| far beyond naive cosh overflow
        let p = mp(30.0, 2.0, 5.0, 80.0);
        let k = single_site_kernel(20.0, &p);
        let total: f64 = k.entries().iter().map(|&(_, _, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(free_energy(20.0, &p).is_finite());
        assert!(spin_mean(20.0, &p).abs() <= 1.0);
        assert!(field_mean(20.0, &p).abs() <= 1.0);
    }
}
