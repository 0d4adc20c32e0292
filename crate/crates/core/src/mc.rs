//! Seeded single-site Metropolis samplers for the approximant joint measure
//! and the quenched measure, used as a statistically independent cross-check
//! of the exact finite-N engines.
//!
//! RNG contract: every chain uses the ChaCha12 generator with the run seed
//! and word stream equal to the chain index, so the same (seed, config) pair
//! reproduces bit-identical estimates on any platform.

use crate::error::{Error, Result};
use crate::model::{ModelParams, MoritaParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Target measure of a run.
#[derive(Debug, Clone, Serialize)]
pub enum McTarget {
    /// Joint (σ, η) measure with chemical potential λ; proposals flip a
    /// uniformly chosen spin or field variable.
    Morita(MoritaParams),
    /// Quenched measure at a fixed field configuration with `n_plus`
    /// positive fields; proposals flip spins only.
    Quenched { params: ModelParams, n_plus: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct McConfig {
    pub n_total: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub target: McTarget,
}

/// Number of batches used for the batch-means standard error.
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean_spin_average: f64,
    /// Present for the joint target only.
    pub mean_field_average: Option<f64>,
    /// Batch-means standard error of the spin-average estimate.
    pub std_error: f64,
    pub n_samples: usize,
}

fn validate(config: &McConfig) -> Result<()> {
    if config.n_total == 0 {
        return Err(Error::Config("n_total must be at least 1".into()));
    }
    if config.sweeps == 0 {
        return Err(Error::Config("sweeps must be positive".into()));
    }
    if config.burn_in >= config.sweeps {
        return Err(Error::Config(format!(
            "burn_in = {} must be smaller than sweeps = {}",
            config.burn_in, config.sweeps
        )));
    }
    if config.sweeps - config.burn_in < BATCHES {
        return Err(Error::Config(format!(
            "need at least {BATCHES} post-burn-in sweeps for batch means"
        )));
    }
    if let McTarget::Quenched { n_plus, .. } = config.target {
        if n_plus > config.n_total {
            return Err(Error::Config(format!(
                "n_plus = {n_plus} exceeds n_total = {}",
                config.n_total
            )));
        }
    }
    Ok(())
}

fn chain_rng(seed: u64, chain: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Run the chain, handing every post-burn-in sweep's state to the observer.
fn run_chain(
    config: &McConfig,
    mut observe: impl FnMut(&[i8], &[i8], f64, f64),
) -> Result<()> {
    validate(config)?;
    let n = config.n_total;
    let nf = n as f64;
    let mut rng = chain_rng(config.seed, 0);

    let (params, lambda, flip_fields) = match &config.target {
        McTarget::Morita(mp) => (mp.model, mp.lambda, true),
        McTarget::Quenched { params, .. } => (*params, 0.0, false),
    };
    let mut sigma: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut eta: Vec<i8> = match &config.target {
        McTarget::Morita(_) => (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
        McTarget::Quenched { n_plus, .. } => {
            (0..n).map(|i| if i < *n_plus { 1 } else { -1 }).collect()
        }
    };
    let mut spin_sum: f64 = sigma.iter().map(|&s| s as f64).sum();
    let mut field_sum: f64 = eta.iter().map(|&e| e as f64).sum();

    let proposals_per_sweep = if flip_fields { 2 * n } else { n };
    for sweep in 0..config.sweeps {
        for _ in 0..proposals_per_sweep {
            let pick = rng.gen_range(0..proposals_per_sweep);
            let (site, flip_field) = if pick < n {
                (pick, false)
            } else {
                (pick - n, true)
            };
            let dh = if flip_field {
                let e = eta[site] as f64;
                -2.0 * e * (params.beta * params.eps * sigma[site] as f64 + lambda)
            } else {
                let s = sigma[site] as f64;
                2.0 * params.beta / nf * (1.0 - s * spin_sum)
                    - 2.0 * params.beta * (params.eps * eta[site] as f64 + params.h0) * s
            };
            if dh >= 0.0 || rng.gen::<f64>() < dh.exp() {
                if flip_field {
                    field_sum -= 2.0 * eta[site] as f64;
                    eta[site] = -eta[site];
                } else {
                    spin_sum -= 2.0 * sigma[site] as f64;
                    sigma[site] = -sigma[site];
                }
            }
        }
        if sweep >= config.burn_in {
            observe(&sigma, &eta, spin_sum / nf, field_sum / nf);
        }
    }
    Ok(())
}

/// Run one chain and return the batch-means estimates. Identical
/// (seed, config) pairs produce bit-identical results.
pub fn sample(config: &McConfig) -> Result<McEstimate> {
    let n_samples = config.sweeps - config.burn_in;
    let mut batch_sums = vec![0.0f64; BATCHES];
    let mut spin_total = 0.0f64;
    let mut field_total = 0.0f64;
    let mut index = 0usize;
    run_chain(config, |_, _, m_bar, f_bar| {
        let batch = index * BATCHES / n_samples;
        batch_sums[batch] += m_bar;
        spin_total += m_bar;
        field_total += f_bar;
        index += 1;
    })?;
    let mean = spin_total / n_samples as f64;
    let mut var = 0.0;
    for (b, sum) in batch_sums.iter().enumerate() {
        let lo = b * n_samples / BATCHES;
        let hi = (b + 1) * n_samples / BATCHES;
        let bm = sum / (hi - lo) as f64;
        var += (bm - mean) * (bm - mean);
    }
    let std_error = (var / (BATCHES * (BATCHES - 1)) as f64).sqrt();
    Ok(McEstimate {
        mean_spin_average: mean,
        mean_field_average: match config.target {
            McTarget::Morita(_) => Some(field_total / n_samples as f64),
            McTarget::Quenched { .. } => None,
        },
        std_error,
        n_samples,
    })
}

/// Empirical configuration frequencies of a joint-target chain, indexed by
/// (σ_mask << N) | η_mask. Used by the detailed-balance checks.
pub fn configuration_frequencies(config: &McConfig) -> Result<Vec<f64>> {
    let n = config.n_total;
    if n > 7 {
        return Err(Error::ResourceLimit {
            what: "frequency table N",
            n,
            cap: 7,
        });
    }
    let mut counts = vec![0u64; 1 << (2 * n)];
    run_chain(config, |sigma, eta, _, _| {
        let mut idx = 0usize;
        for (i, &s) in sigma.iter().enumerate() {
            if s > 0 {
                idx |= 1 << (n + i);
            }
        }
        for (i, &e) in eta.iter().enumerate() {
            if e > 0 {
                idx |= 1 << i;
            }
        }
        counts[idx] += 1;
    })?;
    let total = (config.sweeps - config.burn_in) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::exact::enumeration;

    fn morita_config(
        n: usize,
        beta: f64,
        eps: f64,
        h0: f64,
        lambda: f64,
        sweeps: usize,
        seed: u64,
    ) -> McConfig {
        McConfig {
            n_total: n,
            sweeps,
            burn_in: sweeps / 10,
            seed,
            target: McTarget::Morita(
                MoritaParams::new(ModelParams::new(beta, eps, h0).unwrap(), lambda).unwrap(),
            ),
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let config = morita_config(20, 0.7, 0.4, 0.1, 0.2, 2000, 42);
        let a = sample(&config).unwrap();
        let b = sample(&config).unwrap();
        assert_eq!(a, b);
        let c = sample(&morita_config(20, 0.7, 0.4, 0.1, 0.2, 2000, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn symmetric_case_field_mean_near_zero() {
        let config = morita_config(30, 2.0, 0.3, 0.0, 0.0, 20_000, 11);
        let est = sample(&config).unwrap();
        let field = est.mean_field_average.unwrap();
        // field flips are driven by λ + βεσ only; at λ = 0 the field mean
        // tracks the spin mean, so allow the same scale of error
        assert!(field.abs() < 0.1, "field mean {field}");
    }

    #[test]
    fn matches_exact_spin_expectation() {
        let config = morita_config(50, 0.8, 0.5, 0.1, 0.3, 40_000, 2024);
        let est = sample(&config).unwrap();
        let exact = exact::morita_law(50, &match &config.target {
            McTarget::Morita(mp) => *mp,
            _ => unreachable!(),
        })
        .unwrap();
        let dev = (est.mean_spin_average - exact.spin_expectation).abs();
        assert!(
            dev < 3.0 * est.std_error,
            "deviation {dev} vs 3σ = {}",
            3.0 * est.std_error
        );
    }

    #[test]
    fn quenched_target_matches_exact_mean() {
        let params = ModelParams::new(0.9, 0.6, 0.05).unwrap();
        let config = McConfig {
            n_total: 40,
            sweeps: 40_000,
            burn_in: 4000,
            seed: 5,
            target: McTarget::Quenched { params, n_plus: 25 },
        };
        let est = sample(&config).unwrap();
        assert!(est.mean_field_average.is_none());
        let exact_mean = exact::quenched_mean_spin(40, 25, &params).unwrap();
        let dev = (est.mean_spin_average - exact_mean).abs();
        assert!(dev < 3.0 * est.std_error, "deviation {dev}");
    }

    #[test]
    fn detailed_balance_smoke() {
        // N = 3 joint chain against the enumerated configuration law
        let config = morita_config(3, 0.9, 0.5, 0.1, 0.2, 1_000_000, 31);
        let freq = configuration_frequencies(&config).unwrap();
        let probs = enumeration::morita_config_probs(3, &match &config.target {
            McTarget::Morita(mp) => *mp,
            _ => unreachable!(),
        })
        .unwrap();
        let n_samples = (config.sweeps - config.burn_in) as f64;
        for (cell, (&f, &p)) in freq.iter().zip(&probs).enumerate() {
            // correlated samples: inflate the binomial σ by a mixing factor
            let sigma = (p * (1.0 - p) / n_samples).sqrt() * 2.0;
            assert!(
                (f - p).abs() < 4.0 * sigma,
                "cell {cell}: frequency {f} vs probability {p}"
            );
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut config = morita_config(10, 1.0, 0.3, 0.0, 0.1, 100, 1);
        config.burn_in = 100;
        assert!(matches!(sample(&config), Err(Error::Config(_))));
        let mut config = morita_config(10, 1.0, 0.3, 0.0, 0.1, 100, 1);
        config.sweeps = 0;
        assert!(matches!(sample(&config), Err(Error::Config(_))));
        let config = McConfig {
            n_total: 4,
            sweeps: 100,
            burn_in: 10,
            seed: 9,
            target: McTarget::Quenched {
                params: ModelParams::new(1.0, 0.2, 0.0).unwrap(),
                n_plus: 9,
            },
        };
        assert!(matches!(sample(&config), Err(Error::Config(_))));
    }

    #[test]
    fn estimates_stay_in_range() {
        let config = morita_config(15, 2.5, 0.8, -0.2, -0.4, 5000, 77);
        let est = sample(&config).unwrap();
        assert!(est.mean_spin_average.abs() <= 1.0);
        assert!(est.mean_field_average.unwrap().abs() <= 1.0);
        assert!(est.std_error >= 0.0);
        assert_eq!(est.n_samples, 4500);
    }
}
