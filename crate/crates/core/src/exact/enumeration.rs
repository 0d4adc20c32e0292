//! Brute-force enumeration over all 2^N spin and 2^N field configurations.
//!
//! These routines are the independence oracle for the combinatorial engines
//! in the parent module: everything here walks configuration space directly
//! with no binomial bookkeeping, so agreement between the two routes checks
//! the counting arguments end to end. Sizes are capped accordingly.

use crate::error::{Error, Result};
use crate::model::{ModelParams, MoritaParams};
use crate::numerics::LogSumAcc;
use std::collections::HashMap;

/// Hard cap for 2^{2N} walks.
pub const ENUM_CAP: usize = 14;

fn check_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if n > ENUM_CAP {
        return Err(Error::ResourceLimit {
            what: "enumeration N",
            n,
            cap: ENUM_CAP,
        });
    }
    Ok(())
}

/// Σ over the n sites of ±1 values encoded as a bitmask (bit set ↦ +1).
#[inline]
fn mask_sum(mask: u32, n: usize) -> i32 {
    2 * mask.count_ones() as i32 - n as i32
}

/// Exponent of the quenched Gibbs weight for one (σ, η) pair.
#[inline]
fn quenched_exponent(sigma: u32, eta: u32, n: usize, p: &ModelParams) -> f64 {
    let m = mask_sum(sigma, n) as f64;
    let dot = (n as i32 - 2 * (sigma ^ eta).count_ones() as i32) as f64;
    p.beta * m * m / (2.0 * n as f64) + p.beta * (p.eps * dot + p.h0 * m)
}

/// log Z[η] by direct summation over all 2^N spin configurations.
pub fn quenched_log_z(n: usize, eta: u32, p: &ModelParams) -> Result<f64> {
    check_cap(n)?;
    let mut acc = LogSumAcc::new();
    for sigma in 0..(1u32 << n) {
        acc.add(quenched_exponent(sigma, eta, n, p));
    }
    Ok(acc.value())
}

/// log Z for a field configuration with the given number of +1 fields.
pub fn quenched_log_z_by_count(n: usize, n_plus: usize, p: &ModelParams) -> Result<f64> {
    if n_plus > n {
        return Err(Error::Domain(format!("n_plus = {n_plus} exceeds N = {n}")));
    }
    quenched_log_z(n, (1u32 << n_plus) - 1, p)
}

/// Quenched expectation of the spin average (1/N)Σσ at fixed fields.
pub fn quenched_spin_mean(n: usize, eta: u32, p: &ModelParams) -> Result<f64> {
    check_cap(n)?;
    let mut max = f64::NEG_INFINITY;
    let mut den = 0.0;
    let mut num = 0.0;
    for sigma in 0..(1u32 << n) {
        let x = quenched_exponent(sigma, eta, n, p);
        let m = mask_sum(sigma, n) as f64;
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
    Ok(num / den / n as f64)
}

/// Mean of σ₁ under the true joint measure (uniform fields composed with the
/// quenched measure), by full 2^{2N} enumeration.
pub fn true_spin_site_mean(n: usize, p: &ModelParams) -> Result<f64> {
    check_cap(n)?;
    let mut total = 0.0;
    for eta in 0..(1u32 << n) {
        let log_z = quenched_log_z(n, eta, p)?;
        for sigma in 0..(1u32 << n) {
            let w = (quenched_exponent(sigma, eta, n, p) - log_z).exp();
            let s1 = if sigma & 1 != 0 { 1.0 } else { -1.0 };
            total += s1 * w;
        }
    }
    Ok(total / (1u64 << n) as f64)
}

/// Exact law of the pair (Σ_{i≥2} σ_i, #{i≥2 : η_i = +1}) under the true
/// joint measure. Keys are (partial spin sum, rest plus-count).
pub fn true_pair_law(n: usize, p: &ModelParams) -> Result<HashMap<(i32, usize), f64>> {
    check_cap(n)?;
    let prior = 1.0 / (1u64 << n) as f64;
    let mut law = HashMap::new();
    for eta in 0..(1u32 << n) {
        let log_z = quenched_log_z(n, eta, p)?;
        let j = (eta >> 1).count_ones() as usize;
        for sigma in 0..(1u32 << n) {
            let w = (quenched_exponent(sigma, eta, n, p) - log_z).exp();
            let s = mask_sum(sigma >> 1, n - 1);
            *law.entry((s, j)).or_insert(0.0) += prior * w;
        }
    }
    Ok(law)
}

/// Law of the total spin sum and the single-field mean under the approximant
/// joint measure, by full enumeration. Returns (probability per spin sum
/// index k with M = 2k − N, E[m̄], E[η₁]).
pub fn morita_law(n: usize, mp: &MoritaParams) -> Result<(Vec<f64>, f64, f64)> {
    check_cap(n)?;
    let p = mp.model;
    let mut max = f64::NEG_INFINITY;
    let mut z = 0.0;
    let mut law = vec![0.0; n + 1];
    let mut e_spin = 0.0;
    let mut e_eta1 = 0.0;
    for eta in 0..(1u32 << n) {
        let lam_term = mp.lambda * mask_sum(eta, n) as f64;
        for sigma in 0..(1u32 << n) {
            let x = quenched_exponent(sigma, eta, n, &p) + lam_term;
            let w;
            if x <= max {
                w = (x - max).exp();
            } else {
                let r = (max - x).exp();
                z *= r;
                e_spin *= r;
                e_eta1 *= r;
                for v in law.iter_mut() {
                    *v *= r;
                }
                max = x;
                w = 1.0;
            }
            z += w;
            let k = sigma.count_ones() as usize;
            law[k] += w;
            e_spin += w * mask_sum(sigma, n) as f64;
            e_eta1 += w * if eta & 1 != 0 { 1.0 } else { -1.0 };
        }
    }
    for v in law.iter_mut() {
        *v /= z;
    }
    Ok((law, e_spin / z / n as f64, e_eta1 / z))
}

/// Probability of every (σ, η) configuration under the approximant measure,
/// indexed by (σ_mask << N) | η_mask.
pub fn morita_config_probs(n: usize, mp: &MoritaParams) -> Result<Vec<f64>> {
    if n > 7 {
        return Err(Error::ResourceLimit {
            what: "configuration table N",
            n,
            cap: 7,
        });
    }
    check_cap(n)?;
    let p = mp.model;
    let mut logw = Vec::with_capacity(1 << (2 * n));
    let mut acc = LogSumAcc::new();
    for sigma in 0..(1u32 << n) {
        for eta in 0..(1u32 << n) {
            let x =
                quenched_exponent(sigma, eta, n, &p) + mp.lambda * mask_sum(eta, n) as f64;
            logw.push(x);
            acc.add(x);
        }
    }
    let log_z = acc.value();
    Ok(logw.into_iter().map(|x| (x - log_z).exp()).collect())
}
