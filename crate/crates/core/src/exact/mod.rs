//! Exact finite-N computation of the quenched, true-joint and approximant
//! measures by combinatorial sums.
//!
//! Partition functions and laws are assembled from binomial-weighted double
//! sums over the up-spin counts of the two field groups, with all
//! accumulation in log space. Every quantity here has a brute-force
//! counterpart in [`enumeration`] used as its oracle at small N.

pub mod enumeration;

use crate::error::{Error, Result};
use crate::model::{
    field_mean, field_mean_tanh_form, free_energy, single_site_kernel, spin_mean, ModelParams,
    MoritaParams,
};
use crate::numerics::{adaptive_simpson, log_sum_exp, LnFactorials, LogSumAcc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Default cap for the O(N²) partition sums.
pub const DEFAULT_LOGZ_CAP: usize = 4000;
/// Default cap for the O(N³) joint-law computation.
pub const DEFAULT_LAW_CAP: usize = 1200;

fn env_cap(var: &str, default: usize) -> usize {
    std::env::var(var)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

/// Cap for partition-function sums; override with CWRFIM_CAP_LOGZ.
pub fn logz_cap() -> usize {
    env_cap("CWRFIM_CAP_LOGZ", DEFAULT_LOGZ_CAP)
}

/// Cap for joint-law computations; override with CWRFIM_CAP_LAW.
pub fn law_cap() -> usize {
    env_cap("CWRFIM_CAP_LAW", DEFAULT_LAW_CAP)
}

/// Exact log partition function of the quenched measure for a field
/// configuration with `n_plus` positive fields.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuenchedLogZ {
    pub n_total: usize,
    pub n_plus: usize,
    pub params: ModelParams,
    pub log_z: f64,
}

/// log Z by the double sum over up-spin counts of the two field groups,
/// binomial logs through log-gamma, streaming log-sum-exp in fixed index
/// order.
pub fn quenched_log_z(n: usize, n_plus: usize, p: &ModelParams) -> Result<QuenchedLogZ> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if n_plus > n {
        return Err(Error::Domain(format!("n_plus = {n_plus} exceeds N = {n}")));
    }
    let cap = logz_cap();
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "partition sum N",
            n,
            cap,
        });
    }
    let lf = LnFactorials::up_to(n);
    Ok(QuenchedLogZ {
        n_total: n,
        n_plus,
        params: *p,
        log_z: log_z_inner(n, n_plus, p, &lf),
    })
}

fn log_z_inner(n: usize, n_plus: usize, p: &ModelParams, lf: &LnFactorials) -> f64 {
    let n_minus = n - n_plus;
    let nf = n as f64;
    let mut acc = LogSumAcc::new();
    for kp in 0..=n_plus {
        let mp = (2 * kp) as f64 - n_plus as f64;
        let lcp = lf.ln_binomial(n_plus, kp);
        for km in 0..=n_minus {
            let mm = (2 * km) as f64 - n_minus as f64;
            let m = mp + mm;
            let e = p.beta * m * m / (2.0 * nf) + p.beta * (p.eps * (mp - mm) + p.h0 * m);
            acc.add(lcp + lf.ln_binomial(n_minus, km) + e);
        }
    }
    acc.value()
}

/// Quenched expectation of the spin average (1/N)Σσ at `n_plus` positive
/// fields, through the same double sum with a signed numerator.
pub fn quenched_mean_spin(n: usize, n_plus: usize, p: &ModelParams) -> Result<f64> {
    quenched_log_z(n, n_plus, p)?; // validates
    let lf = LnFactorials::up_to(n);
    let n_minus = n - n_plus;
    let nf = n as f64;
    let mut max = f64::NEG_INFINITY;
    let mut den = 0.0;
    let mut num = 0.0;
    for kp in 0..=n_plus {
        let mp = (2 * kp) as f64 - n_plus as f64;
        let lcp = lf.ln_binomial(n_plus, kp);
        for km in 0..=n_minus {
            let mm = (2 * km) as f64 - n_minus as f64;
            let m = mp + mm;
            let x = lcp
                + lf.ln_binomial(n_minus, km)
                + p.beta * m * m / (2.0 * nf)
                + p.beta * (p.eps * (mp - mm) + p.h0 * m);
            if x <= max {
                let w = (x - max).exp();
                den += w;
                num += m * w;
            } else {
                let r = (max - x).exp();
                den = den * r + 1.0;
                num = num * r + m;
                max = x;
            }
        }
    }
    Ok(num / den / nf)
}

/// The stochastic chemical potential: half the log-ratio of the partition
/// functions with the first field flipped down versus up, at `n_plus_rest`
/// positive fields among the other N−1 sites.
pub fn lambda_n(n: usize, n_plus_rest: usize, p: &ModelParams) -> Result<f64> {
    if n == 0 || n_plus_rest > n - 1 {
        return Err(Error::Domain(format!(
            "need 0 <= n_plus_rest <= N-1, got N = {n}, n_plus_rest = {n_plus_rest}"
        )));
    }
    let lo = quenched_log_z(n, n_plus_rest, p)?;
    let hi = quenched_log_z(n, n_plus_rest + 1, p)?;
    Ok(0.5 * (lo.log_z - hi.log_z))
}

/// Conditioning event for the joint law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conditioning {
    None,
    /// Restrict to Ση_i > 0 (strict; ties at even N are excluded).
    PositiveFieldSum,
}

/// Exact law of the pair (spin average of sites 2..N, λ_N of the rest
/// fields). Probabilities are indexed by [rest plus-count j][spin-sum index].
#[derive(Debug, Clone, Serialize)]
pub struct JointLaw2D {
    pub n_total: usize,
    pub conditioning: Conditioning,
    /// Spin-average support: (2s − (N−1))/N for s = 0..N−1.
    pub m_bar: Vec<f64>,
    /// λ_N value for each rest plus-count j = 0..N−1.
    pub lambda: Vec<f64>,
    pub prob: Vec<Vec<f64>>,
}

impl JointLaw2D {
    pub fn total_mass(&self) -> f64 {
        self.prob.iter().flatten().sum()
    }

    /// Marginal law of the spin average, indexed like `m_bar`.
    pub fn spin_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m_bar.len()];
        for row in &self.prob {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    /// Marginal law of λ_N, indexed like `lambda`.
    pub fn lambda_marginal(&self) -> Vec<f64> {
        self.prob.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn mean_spin(&self) -> f64 {
        self.spin_marginal()
            .iter()
            .zip(&self.m_bar)
            .map(|(p, m)| p * m)
            .sum()
    }

    pub fn variance_spin(&self) -> f64 {
        let mean = self.mean_spin();
        self.spin_marginal()
            .iter()
            .zip(&self.m_bar)
            .map(|(p, m)| p * (m - mean) * (m - mean))
            .sum()
    }

    /// Probability mass on the set where the predicate holds.
    pub fn mass_where(&self, pred: impl Fn(f64, f64) -> bool) -> f64 {
        let mut mass = 0.0;
        for (j, row) in self.prob.iter().enumerate() {
            for (s, p) in row.iter().enumerate() {
                if pred(self.m_bar[s], self.lambda[j]) {
                    mass += p;
                }
            }
        }
        mass
    }

    /// Flat (m_bar, lambda, probability) triples in row-major (j, s) order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.prob.iter().enumerate().flat_map(move |(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(s, &p)| (self.m_bar[s], self.lambda[j], p))
        })
    }
}

struct JBlock {
    lambda: f64,
    /// Conditioning-weighted probabilities per spin-sum index.
    prob: Vec<f64>,
}

/// Exact joint law of (spin average over sites 2..N, λ_N), outer sum over the
/// rest-field plus-count with binomial weight, inner exact distribution of
/// the partial spin sum. The outer loop runs in parallel; each block is
/// accumulated in fixed index order so results do not depend on the
/// schedule.
pub fn true_joint_law(
    n: usize,
    p: &ModelParams,
    conditioning: Conditioning,
) -> Result<JointLaw2D> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let cap = law_cap();
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "joint law N",
            n,
            cap,
        });
    }
    let lf = LnFactorials::up_to(n);
    let nf = n as f64;
    let ln2 = std::f64::consts::LN_2;

    let blocks: Vec<JBlock> = (0..n)
        .into_par_iter()
        .map(|j| {
            let n_rest_minus = n - 1 - j;
            let ln_prior = lf.ln_binomial(n - 1, j) - (n - 1) as f64 * ln2 - ln2;
            let mut log_block = [Vec::new(), Vec::new()]; // per η₁ ∈ {+1, −1}
            let mut log_z_block = [0.0f64; 2];
            for (ei, eta1) in [(0usize, 1.0f64), (1, -1.0)] {
                let mut bins = vec![LogSumAcc::new(); n];
                for kp in 0..=j {
                    let mp = (2 * kp) as f64 - j as f64;
                    let lcp = lf.ln_binomial(j, kp);
                    for km in 0..=n_rest_minus {
                        let mm = (2 * km) as f64 - n_rest_minus as f64;
                        let s = mp + mm;
                        let base = lcp + lf.ln_binomial(n_rest_minus, km);
                        let bin = &mut bins[kp + km];
                        for s1 in [1.0f64, -1.0] {
                            let m = s + s1;
                            bin.add(
                                base + p.beta * m * m / (2.0 * nf)
                                    + p.beta * (p.eps * (mp - mm + eta1 * s1) + p.h0 * m),
                            );
                        }
                    }
                }
                let logs: Vec<f64> = bins.iter().map(|b| b.value()).collect();
                log_z_block[ei] = log_sum_exp(&logs);
                log_block[ei] = logs;
            }
            // η₁ = −1 leaves j positive fields in total, η₁ = +1 gives j+1
            let lambda = 0.5 * (log_z_block[1] - log_z_block[0]);
            let mut prob = vec![0.0; n];
            for (ei, _) in [(0usize, 1.0f64), (1, -1.0)] {
                let n_plus_total = if ei == 0 { j + 1 } else { j };
                if conditioning == Conditioning::PositiveFieldSum
                    && 2 * n_plus_total <= n
                {
                    continue;
                }
                for (s, lw) in log_block[ei].iter().enumerate() {
                    prob[s] += (ln_prior + lw - log_z_block[ei]).exp();
                }
            }
            JBlock { lambda, prob }
        })
        .collect();

    let m_bar = (0..n)
        .map(|s| ((2 * s) as f64 - (n - 1) as f64) / nf)
        .collect();
    let lambda = blocks.iter().map(|b| b.lambda).collect();
    let mut prob: Vec<Vec<f64>> = blocks.into_iter().map(|b| b.prob).collect();
    if conditioning == Conditioning::PositiveFieldSum {
        let total: f64 = prob.iter().flatten().sum();
        if total <= 0.0 {
            return Err(Error::Numeric("conditioning event has zero mass".into()));
        }
        for row in prob.iter_mut() {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
    }
    Ok(JointLaw2D {
        n_total: n,
        conditioning,
        m_bar,
        lambda,
        prob,
    })
}

/// Exact law of the spin average under the approximant measure, and the
/// resulting single-field mean.
#[derive(Debug, Clone, Serialize)]
pub struct MoritaLaw {
    pub n_total: usize,
    /// Spin-average support (2k − N)/N for k = 0..=N.
    pub m_bar: Vec<f64>,
    pub prob: Vec<f64>,
    pub spin_expectation: f64,
    pub field_expectation: f64,
}

/// The spin marginal is a Curie-Weiss model in the effective field; its law
/// is a single binomial-weighted sum over the total spin. The field mean
/// follows from the tanh identity applied to the exact E[m̄].
pub fn morita_law(n: usize, mp: &MoritaParams) -> Result<MoritaLaw> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let cap = logz_cap();
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "spin-average law N",
            n,
            cap,
        });
    }
    let p = mp.model;
    let hhat = mp.effective_field();
    let lf = LnFactorials::up_to(n);
    let nf = n as f64;
    let logw: Vec<f64> = (0..=n)
        .map(|k| {
            let m = (2 * k) as f64 - nf;
            lf.ln_binomial(n, k) + p.beta * m * m / (2.0 * nf) + p.beta * hhat * m
        })
        .collect();
    let log_z = log_sum_exp(&logw);
    let prob: Vec<f64> = logw.iter().map(|w| (w - log_z).exp()).collect();
    let m_bar: Vec<f64> = (0..=n).map(|k| ((2 * k) as f64 - nf) / nf).collect();
    let spin_expectation: f64 = prob.iter().zip(&m_bar).map(|(p, m)| p * m).sum();
    let field_expectation =
        field_mean_tanh_form(spin_expectation, p.beta, p.eps, mp.lambda);
    Ok(MoritaLaw {
        n_total: n,
        m_bar,
        prob,
        spin_expectation,
        field_expectation,
    })
}

/// Residuals of the two finite-N consistency identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConsistencyResiduals {
    /// |E[σ₁] − E[spin_mean kernel]|.
    pub magnetization: f64,
    /// |E[field_mean kernel]| (the exact value is zero).
    pub neutrality: f64,
}

/// Evaluate both sides of the finite-N consistency identities. The kernel
/// side integrates the single-site conditional means against the exact law
/// of (spin average of the rest, λ_N); the direct side computes E[σ₁] by
/// full enumeration for N ≤ 12 and by the binomial-weighted quenched
/// magnetization otherwise. These are identities at every N, not limits.
pub fn verify_consistency_identities(n: usize, p: &ModelParams) -> Result<ConsistencyResiduals> {
    let law = true_joint_law(n, p, Conditioning::None)?;
    let mut rhs_spin = 0.0;
    let mut rhs_field = 0.0;
    for (j, row) in law.prob.iter().enumerate() {
        let mp = MoritaParams::new(*p, law.lambda[j])?;
        for (s, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let m = law.m_bar[s];
            rhs_spin += w * spin_mean(m, &mp);
            rhs_field += w * field_mean(m, &mp);
        }
    }
    let lhs_spin = if n <= enumeration::ENUM_CAP.min(12) {
        enumeration::true_spin_site_mean(n, p)?
    } else {
        // E[σ₁] = E[m̄] by exchangeability; average the quenched means over
        // the binomial field prior.
        let lf = LnFactorials::up_to(n);
        let ln2 = std::f64::consts::LN_2;
        let mut acc = 0.0;
        for n_plus in 0..=n {
            let w = (lf.ln_binomial(n, n_plus) - n as f64 * ln2).exp();
            acc += w * quenched_mean_spin(n, n_plus, p)?;
        }
        acc
    };
    Ok(ConsistencyResiduals {
        magnetization: (lhs_spin - rhs_spin).abs(),
        neutrality: rhs_field.abs(),
    })
}

/// Compare the enumerated single-site conditional probabilities of the true
/// joint measure against the kernel at (rest spin average, λ_N of the rest
/// plus-count), over every conditioning. Returns the maximum absolute
/// discrepancy; the identity is exact, so this measures round-off only.
pub fn conditional_kernel_check(n: usize, p: &ModelParams) -> Result<f64> {
    if n > 12 {
        return Err(Error::ResourceLimit {
            what: "kernel check N",
            n,
            cap: 12,
        });
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    // log Z[η] for every field mask, by direct spin enumeration.
    let size = 1u32 << n;
    let mut log_z = vec![0.0f64; size as usize];
    for eta in 0..size {
        log_z[eta as usize] = enumeration::quenched_log_z(n, eta, p)?;
    }
    // kernel tables per (rest up-spin count, rest plus-field count)
    let mut kernels = Vec::with_capacity(n * n);
    for j in 0..n {
        let lam = lambda_n(n, j, p)?;
        let mp = MoritaParams::new(*p, lam)?;
        for up in 0..n {
            let m_rest = ((2 * up) as f64 - (n - 1) as f64) / n as f64;
            kernels.push(single_site_kernel(m_rest, &mp));
        }
    }
    let rest_size = 1u32 << (n - 1);
    let nf = n as f64;
    let mut max_err = 0.0f64;
    for sigma_rest in 0..rest_size {
        let s_rest = 2 * sigma_rest.count_ones() as i32 - (n as i32 - 1);
        let up = sigma_rest.count_ones() as usize;
        for eta_rest in 0..rest_size {
            let j = eta_rest.count_ones() as usize;
            let kernel = &kernels[j * n + up];
            // conditional of (σ₁, η₁) given the rest, from the joint weights
            let mut lw = [0.0f64; 4];
            let mut idx = 0;
            for s1 in [1i32, -1] {
                for e1 in [1i32, -1] {
                    let m = (s_rest + s1) as f64;
                    let dot_rest = (n as i32 - 1 - 2 * (sigma_rest ^ eta_rest).count_ones() as i32)
                        as f64;
                    let dot = dot_rest + (s1 * e1) as f64;
                    let eta_mask = (eta_rest << 1) | u32::from(e1 > 0);
                    lw[idx] = p.beta * m * m / (2.0 * nf)
                        + p.beta * (p.eps * dot + p.h0 * m)
                        - log_z[eta_mask as usize];
                    idx += 1;
                }
            }
            let norm = log_sum_exp(&lw);
            let mut idx = 0;
            for s1 in [1i8, -1] {
                for e1 in [1i8, -1] {
                    let cond = (lw[idx] - norm).exp();
                    let err = (cond - kernel.prob(s1, e1)).abs();
                    max_err = max_err.max(err);
                    idx += 1;
                }
            }
        }
    }
    Ok(max_err)
}

/// Check the integral representation of the approximant measure: the
/// m-integral of exp(−βN·Φ(m)) times the product of kernel entries, against
/// the directly enumerated configuration probabilities. Quadrature is
/// adaptive Simpson on m ∈ [−4, 4]; the report is the maximum discrepancy
/// over `samples` seeded random configurations.
pub fn verify_hs_representation(
    n: usize,
    mp: &MoritaParams,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if n > 10 {
        return Err(Error::ResourceLimit {
            what: "integral check N",
            n,
            cap: 10,
        });
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let p = mp.model;
    let nf = n as f64;
    // log of the direct normalization over all configurations
    let mut acc = LogSumAcc::new();
    for sigma in 0..(1u32 << n) {
        for eta in 0..(1u32 << n) {
            acc.add(direct_exponent(sigma, eta, n, mp));
        }
    }
    let log_z = acc.value();

    // shift the landscape so the integrand is O(1) at its peak
    let phi_min = (0..=8000)
        .map(|i| free_energy(-4.0 + i as f64 * 1e-3, mp))
        .fold(f64::INFINITY, f64::min);
    let weight = |m: f64| (-p.beta * nf * (free_energy(m, mp) - phi_min)).exp();
    let denom = adaptive_simpson(weight, -4.0, 4.0, 1e-12)?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut max_err = 0.0f64;
    for _ in 0..samples {
        let sigma: u32 = rng.gen_range(0..(1u32 << n));
        let eta: u32 = rng.gen_range(0..(1u32 << n));
        // counts of the four (σ_i, η_i) combinations
        let mut counts = [0i32; 4];
        for i in 0..n {
            let s = (sigma >> i) & 1;
            let e = (eta >> i) & 1;
            counts[(s * 2 + e) as usize] += 1;
        }
        let integrand = |m: f64| {
            let k = single_site_kernel(m, mp);
            let prod = k.prob(-1, -1).powi(counts[0])
                * k.prob(-1, 1).powi(counts[1])
                * k.prob(1, -1).powi(counts[2])
                * k.prob(1, 1).powi(counts[3]);
            weight(m) * prod
        };
        let numer = adaptive_simpson(integrand, -4.0, 4.0, 1e-12)?;
        let direct = (direct_exponent(sigma, eta, n, mp) - log_z).exp();
        max_err = max_err.max((numer / denom - direct).abs());
    }
    Ok(max_err)
}

fn direct_exponent(sigma: u32, eta: u32, n: usize, mp: &MoritaParams) -> f64 {
    let p = mp.model;
    let m = (2 * sigma.count_ones() as i32 - n as i32) as f64;
    let f = (2 * eta.count_ones() as i32 - n as i32) as f64;
    let dot = (n as i32 - 2 * (sigma ^ eta).count_ones() as i32) as f64;
    p.beta * m * m / (2.0 * n as f64) + p.beta * (p.eps * dot + p.h0 * m) + mp.lambda * f
}

/// λ_N tabulated against the empirical field bias of the conditioning.
#[derive(Debug, Clone, Serialize)]
pub struct DiscontinuityProfile {
    pub n_total: usize,
    /// (realized field bias, λ_N) per requested bias, in request order.
    pub entries: Vec<(f64, f64)>,
}

/// Tabulate λ_N against the field bias (2n₊ − (N−1))/(N−1). Requested biases
/// are rounded to the nearest representable plus-count and the realized bias
/// is recorded.
pub fn discontinuity_profile(
    n: usize,
    p: &ModelParams,
    bias_grid: &[f64],
) -> Result<DiscontinuityProfile> {
    if n < 2 {
        return Err(Error::Domain("profile needs N >= 2".into()));
    }
    let rest = (n - 1) as f64;
    let mut entries = Vec::with_capacity(bias_grid.len());
    for &bias in bias_grid {
        if !(-1.0..=1.0).contains(&bias) {
            return Err(Error::Domain(format!("bias {bias} outside [-1, 1]")));
        }
        let n_plus = ((rest * (1.0 + bias) / 2.0).round() as usize).min(n - 1);
        let realized = (2 * n_plus) as f64 / rest - 1.0;
        entries.push((realized, lambda_n(n, n_plus, p)?));
    }
    Ok(DiscontinuityProfile {
        n_total: n,
        entries,
    })
}

/// Magnitude of the λ_N jump across zero field bias, evaluated at the
/// shrinking window ±N^{-0.4}.
pub fn lambda_jump(n: usize, p: &ModelParams) -> Result<f64> {
    let bias = (n as f64).powf(-0.4);
    let profile = discontinuity_profile(n, p, &[bias, -bias])?;
    Ok((profile.entries[0].1 - profile.entries[1].1).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Side;
    use crate::solvers::{solve_naive_system, Branch};

    fn params(beta: f64, eps: f64, h0: f64) -> ModelParams {
        ModelParams::new(beta, eps, h0).unwrap()
    }

    #[test]
    fn log_z_single_site_closed_form() {
        let p = params(1.3, 0.4, 0.1);
        let expect = (2.0 * (p.beta / 2.0).exp() * (p.beta * (p.eps + p.h0)).cosh()).ln();
        let got = quenched_log_z(1, 1, &p).unwrap().log_z;
        assert!((got - expect).abs() < 1e-13);
    }

    #[test]
    fn log_z_matches_enumeration() {
        let p = params(1.3, 0.4, 0.1);
        let comb = quenched_log_z(8, 3, &p).unwrap().log_z;
        let brute = enumeration::quenched_log_z_by_count(8, 3, &p).unwrap();
        assert!((comb - brute).abs() < 1e-12);
    }

    #[test]
    fn log_z_flip_symmetry_at_zero_field() {
        let p = params(1.7, 0.5, 0.0);
        let a = quenched_log_z(12, 4, &p).unwrap().log_z;
        let b = quenched_log_z(12, 8, &p).unwrap().log_z;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn log_z_over_cap_errors() {
        let p = params(1.0, 0.3, 0.0);
        assert!(matches!(
            quenched_log_z(logz_cap() + 1, 0, &p),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn lambda_n_two_site_closed_form() {
        // N=2, β=1, ε=0.5, h₀=0: Z(n₊=0) = 3 + e², Z(n₊=1) = 3e + 1/e,
        // so λ₂(0) = (1/2)·log(e(3+e²)/(3e²+1)) and λ₂(1) = −λ₂(0).
        let p = params(1.0, 0.5, 0.0);
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let expect = 0.5 * (std::f64::consts::E * (3.0 + e2) / (3.0 * e2 + 1.0)).ln();
        let l0 = lambda_n(2, 0, &p).unwrap();
        let l1 = lambda_n(2, 1, &p).unwrap();
        assert!((l0 - expect).abs() < 1e-14);
        assert!((l1 + expect).abs() < 1e-14);
    }

    #[test]
    fn lambda_n_vanishes_at_balanced_fields() {
        let p = params(1.4, 0.6, 0.0);
        let l = lambda_n(9, 4, &p).unwrap();
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn lambda_n_approaches_limit_value() {
        // at N=2000 just above half filling, λ_N is close to the
        // metastable-branch λ* = (1/2)log(cosh β(m*−ε)/cosh β(m*+ε))
        let p = params(2.0, 0.3, 0.0);
        let sol = solve_naive_system(&p, Branch::Plus).unwrap();
        let n = 2000;
        let bias = (n as f64).powf(-0.4);
        let n_plus = ((n as f64 - 1.0) * (1.0 + bias) / 2.0).round() as usize;
        let l = lambda_n(n, n_plus, &p).unwrap();
        assert!(
            (l - sol.lambda).abs() < 0.1 * sol.lambda.abs(),
            "λ_N = {l}, λ* = {}",
            sol.lambda
        );
    }

    #[test]
    fn quenched_mean_spin_matches_enumeration() {
        let p = params(1.1, 0.5, 0.2);
        let comb = quenched_mean_spin(7, 2, &p).unwrap();
        let brute =
            enumeration::quenched_spin_mean(7, (1u32 << 2) - 1, &p).unwrap();
        assert!((comb - brute).abs() < 1e-13);
    }

    #[test]
    fn joint_law_matches_enumeration() {
        let p = params(1.3, 0.4, 0.1);
        let n = 6;
        let law = true_joint_law(n, &p, Conditioning::None).unwrap();
        let brute = enumeration::true_pair_law(n, &p).unwrap();
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
        let mut max_err = 0.0f64;
        for (j, row) in law.prob.iter().enumerate() {
            for (s, &v) in row.iter().enumerate() {
                let key = (2 * s as i32 - (n as i32 - 1), j);
                let b = brute.get(&key).cloned().unwrap_or(0.0);
                max_err = max_err.max((v - b).abs());
            }
        }
        assert!(max_err < 1e-12, "max deviation {max_err}");
    }

    #[test]
    fn joint_law_flip_symmetry_at_zero_field() {
        let p = params(2.0, 0.3, 0.0);
        let n = 10;
        let law = true_joint_law(n, &p, Conditioning::None).unwrap();
        for j in 0..n {
            assert!((law.lambda[j] + law.lambda[n - 1 - j]).abs() < 1e-12);
            for s in 0..n {
                let a = law.prob[j][s];
                let b = law.prob[n - 1 - j][n - 1 - s];
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn conditioning_excludes_ties_and_renormalizes() {
        let p = params(1.2, 0.4, 0.0);
        let law = true_joint_law(6, &p, Conditioning::PositiveFieldSum).unwrap();
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
        // every row with mass must have total plus fields > N/2 for at least
        // one η₁ value, so rows with j + 1 <= N/2 are empty
        for (j, row) in law.prob.iter().enumerate() {
            let mass: f64 = row.iter().sum();
            if 2 * (j + 1) <= 6 {
                assert_eq!(mass, 0.0, "row j = {j} should be excluded");
            }
        }
    }

    #[test]
    fn morita_law_matches_enumeration() {
        let p = params(1.4, 0.5, 0.1);
        let mp = MoritaParams::new(p, 0.3).unwrap();
        let n = 8;
        let law = morita_law(n, &mp).unwrap();
        let (brute_law, brute_spin, brute_eta) = enumeration::morita_law(n, &mp).unwrap();
        for k in 0..=n {
            assert!((law.prob[k] - brute_law[k]).abs() < 1e-12);
        }
        assert!((law.spin_expectation - brute_spin).abs() < 1e-12);
        assert!((law.field_expectation - brute_eta).abs() < 1e-12);
    }

    #[test]
    fn morita_field_mean_zero_by_symmetry() {
        let p = params(2.0, 0.3, 0.0);
        let mp = MoritaParams::new(p, 0.0).unwrap();
        for n in [3, 17, 64] {
            let law = morita_law(n, &mp).unwrap();
            assert!(law.field_expectation.abs() < 1e-14);
        }
    }

    #[test]
    fn morita_field_mean_decays_at_neutral_point() {
        let p = params(2.0, 0.3, 0.0);
        let l_min = crate::solvers::neutral_l_min(&p).unwrap();
        let pt = crate::solvers::neutral_point_for_l(&p, 0.5 * (l_min + 0.6)).unwrap();
        let mp =
            MoritaParams::new(p.with_h0(pt.h0).unwrap(), pt.lambda).unwrap();
        let mut prev = f64::INFINITY;
        for n in [100, 200, 400, 800] {
            let e = morita_law(n, &mp).unwrap().field_expectation.abs();
            assert!(e < prev, "|E[η₁]| must decrease, {e} at N = {n}");
            prev = e;
        }
    }

    #[test]
    fn consistency_identities_hold_at_small_n() {
        let p = params(1.5, 0.4, 0.1);
        for n in [2, 4, 6, 8] {
            let r = verify_consistency_identities(n, &p).unwrap();
            assert!(r.magnetization < 1e-12, "N = {n}: {r:?}");
            assert!(r.neutrality < 1e-12, "N = {n}: {r:?}");
        }
    }

    #[test]
    fn consistency_identities_combinatorial_path() {
        // N above the enumeration window exercises the binomial-averaged side
        let p = params(1.5, 0.4, 0.1);
        let r = verify_consistency_identities(14, &p).unwrap();
        assert!(r.magnetization < 1e-11, "{r:?}");
        assert!(r.neutrality < 1e-11, "{r:?}");
    }

    #[test]
    fn kernel_check_small_sizes() {
        let p = params(1.2, 0.7, 0.2);
        assert!(conditional_kernel_check(2, &p).unwrap() < 1e-13);
        assert!(conditional_kernel_check(4, &p).unwrap() < 1e-12);
    }

    #[test]
    fn kernel_check_infinite_temperature_uniform() {
        let p = params(1e-8, 0.5, 0.0);
        let law = true_joint_law(3, &p, Conditioning::None).unwrap();
        assert!((law.total_mass() - 1.0).abs() < 1e-12);
        // kernel entries all approach 1/4
        let mp = MoritaParams::new(p, lambda_n(3, 1, &p).unwrap()).unwrap();
        let k = single_site_kernel(0.0, &mp);
        for (_, _, v) in k.entries() {
            assert!((v - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn hs_representation_exact_at_small_n() {
        let p = params(1.0, 0.5, 0.0);
        let mp = MoritaParams::new(p, 0.3).unwrap();
        let err = verify_hs_representation(4, &mp, 100, 7).unwrap();
        assert!(err < 1e-8, "max integral mismatch {err}");
    }

    #[test]
    fn hs_representation_single_site() {
        let p = params(1.2, 0.4, 0.2);
        let mp = MoritaParams::new(p, -0.5).unwrap();
        let err = verify_hs_representation(1, &mp, 4, 3).unwrap();
        assert!(err < 1e-9, "max integral mismatch {err}");
    }

    #[test]
    fn hs_representation_mirror_symmetry() {
        let p = params(1.1, 0.6, 0.25);
        let mp = MoritaParams::new(p, 0.45).unwrap();
        let mirrored = MoritaParams::new(params(1.1, 0.6, -0.25), -0.45).unwrap();
        let a = verify_hs_representation(3, &mp, 40, 11).unwrap();
        let b = verify_hs_representation(3, &mirrored, 40, 11).unwrap();
        // the sampled configurations differ, but both runs probe the same
        // mirrored measure; the error scale must match to rounding
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn profile_antisymmetric_at_zero_field() {
        let p = params(2.0, 0.3, 0.0);
        let grid = [-0.3, -0.1, 0.1, 0.3];
        let prof = discontinuity_profile(51, &p, &grid).unwrap();
        for k in 0..2 {
            let (b_neg, l_neg) = prof.entries[k];
            let (b_pos, l_pos) = prof.entries[3 - k];
            assert!((b_neg + b_pos).abs() < 1e-12);
            assert!((l_neg + l_pos).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_develops_only_below_critical_temperature() {
        let cold = lambda_jump(400, &params(2.0, 0.3, 0.0)).unwrap();
        let warm = lambda_jump(400, &params(0.8, 0.3, 0.0)).unwrap();
        assert!(cold > 1.0, "cold jump {cold}");
        assert!(warm < 0.05, "warm jump {warm}");
    }

    #[test]
    fn concentration_mass_grows_with_n() {
        // coarse, fast version of the concentration statement
        let p = params(2.0, 0.3, 0.0);
        let sol = solve_naive_system(&p, Branch::Plus).unwrap();
        let mut prev = 0.0;
        for n in [40, 80, 160] {
            let law = true_joint_law(n, &p, Conditioning::PositiveFieldSum).unwrap();
            let mass = law.mass_where(|m, _| (m - sol.m).abs() < 0.1);
            assert!(mass > prev, "mass {mass} at N = {n}");
            prev = mass;
        }
        assert!(prev > 0.8);
    }

    #[test]
    fn curie_weiss_reduction_sanity() {
        // ε → 0 queched model is a pure Curie-Weiss model whose mean spin
        // approaches the spontaneous magnetization at large N under a tiny
        // symmetry-breaking field
        let p = params(2.0, 0.0, 0.05);
        let mean = quenched_mean_spin(900, 450, &p).unwrap();
        let m = crate::model::curie_weiss_magnetization(2.0, 0.05, Side::Plus).unwrap();
        assert!((mean - m).abs() < 0.01, "{mean} vs {m}");
    }
}
