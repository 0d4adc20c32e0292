//! Aggregated verification: every module's invariant suite plus the
//! quantitative acceptance criteria, runnable as one registry. The CLI
//! `verify` subcommand and the integration test suites both dispatch here,
//! so CI has a single entry point.

use crate::error::{Error, Result};
use crate::exact::{self, Conditioning};
use crate::mc::{self, McConfig, McTarget};
use crate::model::{
    curie_weiss_magnetization, field_mean, field_shift, free_energy, single_site_kernel,
    spin_mean, ModelParams, MoritaParams, Side,
};
use crate::solvers::{
    classify_landscape, compute_gap, limiting_field_expectation, neutral_curve,
    neutral_l_min, neutral_point_for_l, solve_naive_system, solve_quenched, Branch, PointKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub suite: &'static str,
    /// Acceptance-criterion number when the check is part of the gate.
    pub criterion: Option<u8>,
    pub passed: bool,
    pub details: String,
}

type CheckFn = fn() -> std::result::Result<String, String>;

struct Check {
    name: &'static str,
    suite: &'static str,
    criterion: Option<u8>,
    run: CheckFn,
}

fn registry() -> Vec<Check> {
    vec![
        Check { name: "field-shift-properties", suite: "model", criterion: None, run: check_field_shift },
        Check { name: "magnetization-monotone", suite: "model", criterion: None, run: check_magnetization_monotone },
        Check { name: "free-energy-two-forms", suite: "model", criterion: None, run: check_free_energy_forms },
        Check { name: "kernel-means-match-table", suite: "model", criterion: None, run: check_kernel_means },
        Check { name: "naive-equals-quenched-grid", suite: "solvers", criterion: None, run: check_naive_equals_quenched },
        Check { name: "metastability-grid", suite: "solvers", criterion: None, run: check_metastability_grid },
        Check { name: "neutral-curve-monotone", suite: "solvers", criterion: None, run: check_neutral_monotone },
        Check { name: "impossibility-scan", suite: "solvers", criterion: None, run: check_impossibility_scan },
        Check { name: "landscape-stationarity", suite: "solvers", criterion: None, run: check_landscape_stationarity },
        Check { name: "law-normalization", suite: "finite-n", criterion: None, run: check_law_normalization },
        Check { name: "variance-monotone", suite: "finite-n", criterion: None, run: check_variance_monotone },
        Check { name: "identities-symmetric-case", suite: "finite-n", criterion: None, run: check_identities_symmetric },
        Check { name: "detailed-balance", suite: "mc", criterion: None, run: check_detailed_balance },
        Check { name: "seed-determinism", suite: "mc", criterion: None, run: check_seed_determinism },
        Check { name: "consistency-identities", suite: "acceptance", criterion: Some(1), run: criterion_01 },
        Check { name: "kernel-representation", suite: "acceptance", criterion: Some(2), run: criterion_02 },
        Check { name: "enumeration-oracle", suite: "acceptance", criterion: Some(3), run: criterion_03 },
        Check { name: "naive-equals-quenched", suite: "acceptance", criterion: Some(4), run: criterion_04 },
        Check { name: "metastability-witness", suite: "acceptance", criterion: Some(5), run: criterion_05 },
        Check { name: "impossibility-gap", suite: "acceptance", criterion: Some(6), run: criterion_06 },
        Check { name: "morita-convergence", suite: "acceptance", criterion: Some(7), run: criterion_07 },
        Check { name: "concentration", suite: "acceptance", criterion: Some(8), run: criterion_08 },
        Check { name: "discontinuity", suite: "acceptance", criterion: Some(9), run: criterion_09 },
        Check { name: "hs-identity", suite: "acceptance", criterion: Some(10), run: criterion_10 },
        Check { name: "monte-carlo-cross-check", suite: "acceptance", criterion: Some(11), run: criterion_11 },
        Check { name: "conjecture-falsification", suite: "acceptance", criterion: Some(12), run: criterion_12 },
    ]
}

pub fn suites() -> &'static [&'static str] {
    &["all", "model", "solvers", "finite-n", "mc", "acceptance"]
}

/// Run one suite (or "all") and collect the results.
pub fn run_suite(suite: &str) -> Result<Vec<CheckResult>> {
    if !suites().contains(&suite) {
        return Err(Error::Config(format!(
            "unknown suite '{suite}'; available: {}",
            suites().join(", ")
        )));
    }
    Ok(registry()
        .into_iter()
        .filter(|c| suite == "all" || c.suite == suite)
        .map(|c| {
            let outcome = (c.run)();
            CheckResult {
                name: c.name,
                suite: c.suite,
                criterion: c.criterion,
                passed: outcome.is_ok(),
                details: outcome.unwrap_or_else(|e| e),
            }
        })
        .collect())
}

/// Run only the numbered acceptance criteria.
pub fn run_acceptance() -> Vec<CheckResult> {
    run_suite("acceptance").expect("acceptance suite exists")
}

// ---------------------------------------------------------------- helpers

fn fail(msg: String) -> std::result::Result<String, String> {
    Err(msg)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn random_params(
    rng: &mut ChaCha12Rng,
    beta: (f64, f64),
    eps: (f64, f64),
    h0: (f64, f64),
) -> ModelParams {
    ModelParams::new(
        rng.gen_range(beta.0..beta.1),
        rng.gen_range(eps.0..eps.1),
        rng.gen_range(h0.0..h0.1),
    )
    .expect("ranges are valid")
}

fn err_str(e: impl std::fmt::Display) -> String {
    format!("internal error: {e}")
}

// ------------------------------------------------------------- model suite

fn check_field_shift() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let beta = rng.gen_range(0.1..5.0);
        let eps = rng.gen_range(0.01..2.0);
        let lam = rng.gen_range(-8.0..8.0);
        let f = field_shift(beta, eps, lam).map_err(err_str)?;
        let fm = field_shift(beta, eps, -lam).map_err(err_str)?;
        if (f + fm).abs() > 1e-12 {
            return fail(format!("not odd at beta={beta}, eps={eps}, lambda={lam}"));
        }
        if f.abs() >= eps {
            return fail(format!("|shift| = {} not inside (-eps, eps={eps})", f.abs()));
        }
        let f2 = field_shift(beta, eps, lam + 1e-4).map_err(err_str)?;
        if f2 <= f {
            return fail(format!("not increasing at lambda = {lam}"));
        }
    }
    Ok("odd, strictly increasing, range inside (-eps, eps) at 1000 random points".into())
}

fn check_magnetization_monotone() -> std::result::Result<String, String> {
    for beta in [0.7, 1.8] {
        let mut prev = f64::NEG_INFINITY;
        for h in linspace(-2.0, 2.0, 81) {
            let m = curie_weiss_magnetization(beta, h, Side::Plus).map_err(err_str)?;
            if m <= prev {
                return fail(format!("not increasing at beta={beta}, h={h}"));
            }
            prev = m;
        }
    }
    if curie_weiss_magnetization(0.99, 0.0, Side::Plus).map_err(err_str)? != 0.0 {
        return fail("subcritical spontaneous magnetization must be exactly 0".into());
    }
    Ok("strictly increasing in h; zero branch exact for beta <= 1".into())
}

fn check_free_energy_forms() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = random_params(&mut rng, (0.3, 2.5), (0.05, 1.0), (-0.5, 0.5));
        let mp = MoritaParams::new(p, rng.gen_range(-1.5..1.5)).map_err(err_str)?;
        let hhat = mp.effective_field();
        // first form minus the m-dependent part of the second form must be
        // constant in m
        let values: Vec<f64> = linspace(-2.0, 2.0, 41)
            .into_iter()
            .map(|m| {
                free_energy(m, &mp) - m * m / 2.0
                    + crate::numerics::log_cosh(p.beta * (m + hhat)) / p.beta
            })
            .collect();
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.max(spread);
    }
    if worst > 1e-10 {
        return fail(format!("two forms differ by a non-constant: spread {worst}"));
    }
    Ok(format!("both landscape forms agree up to a constant; max spread {worst:.2e}"))
}

fn check_kernel_means() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = random_params(&mut rng, (0.2, 3.0), (0.05, 1.2), (-0.6, 0.6));
        let mp = MoritaParams::new(p, rng.gen_range(-2.0..2.0)).map_err(err_str)?;
        let m = rng.gen_range(-1.5..1.5);
        let k = single_site_kernel(m, &mp);
        let total: f64 = k.entries().iter().map(|&(_, _, v)| v).sum();
        if (total - 1.0).abs() > 1e-14 {
            return fail(format!("kernel not normalized: {total}"));
        }
        worst = worst.max((spin_mean(m, &mp) - k.spin_expectation()).abs());
        worst = worst.max((field_mean(m, &mp) - k.field_expectation()).abs());
    }
    if worst > 1e-13 {
        return fail(format!("means deviate from table expectations by {worst}"));
    }
    Ok(format!("conditional means match table expectations; max deviation {worst:.2e}"))
}

// ----------------------------------------------------------- solvers suite

fn check_naive_equals_quenched() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(105);
    let mut tested = 0;
    for _ in 0..40 {
        let p = random_params(&mut rng, (0.4, 3.0), (0.05, 0.9), (-0.3, 0.3));
        let roots = solve_quenched(&p);
        for branch in [Branch::Plus, Branch::Zero, Branch::Minus] {
            if let Ok(sol) = solve_naive_system(&p, branch) {
                let near = roots.iter().any(|r| (r - sol.m).abs() < 1e-10);
                if !near {
                    return fail(format!(
                        "naive m = {} is not a quenched root at beta={}, eps={}, h0={}",
                        sol.m, p.beta, p.eps, p.h0
                    ));
                }
                tested += 1;
            }
        }
    }
    Ok(format!("{tested} branch solutions all coincide with quenched roots"))
}

fn check_metastability_grid() -> std::result::Result<String, String> {
    let mut found = 0;
    let mut vacuous = 0;
    for beta in linspace(1.2, 4.0, 5) {
        for eps in linspace(0.05, 1.0, 5) {
            let p = ModelParams::new(beta, eps, 0.0).map_err(err_str)?;
            match solve_naive_system(&p, Branch::Plus) {
                Ok(sol) => {
                    let hhat = MoritaParams::new(p, sol.lambda)
                        .map_err(err_str)?
                        .effective_field();
                    if sol.lambda >= 0.0 || hhat >= 0.0 || sol.free_energy_gap <= 0.0 {
                        return fail(format!(
                            "(beta={beta}, eps={eps}): lambda={}, hhat={hhat}, gap={}",
                            sol.lambda, sol.free_energy_gap
                        ));
                    }
                    found += 1;
                }
                Err(Error::NoSolution(_)) => {
                    // legitimate only where the quenched equation itself has
                    // no positive root (paramagnetic part of the rectangle)
                    if solve_quenched(&p).iter().any(|&m| m > 1e-8) {
                        return fail(format!(
                            "solver missed an existing positive root at beta={beta}, eps={eps}"
                        ));
                    }
                    vacuous += 1;
                }
                Err(e) => return fail(err_str(e)),
            }
        }
    }
    if found < 10 {
        return fail(format!("only {found} ferromagnetic grid points; expected at least 10"));
    }
    Ok(format!(
        "lambda < 0, effective field < 0 and positive gap at {found} ferromagnetic points ({vacuous} paramagnetic)"
    ))
}

fn check_neutral_monotone() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.0, 0.3, 0.0).map_err(err_str)?;
    let curve = neutral_curve(&p, None, None, 1000).map_err(err_str)?;
    let mut worst = 0.0f64;
    for w in curve.points.windows(2) {
        if w[1].h0 <= w[0].h0 {
            return fail(format!("h0 not increasing near l = {}", w[0].l));
        }
    }
    for pt in &curve.points {
        worst = worst.max(pt.residual);
    }
    if worst > 1e-10 {
        return fail(format!("consistency residual {worst} on the curve"));
    }
    Ok(format!(
        "h0 strictly increasing over 1000 samples; max residual {worst:.2e}"
    ))
}

fn check_impossibility_scan() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.5, 0.4, 0.0).map_err(err_str)?;
    let a = compute_gap(&p).map_err(err_str)?;
    for h0 in [0.0, a / 2.0] {
        let mut min_abs = f64::INFINITY;
        for lam in linspace(-2.0 + 1e-9, 2.0, 200) {
            let mp = MoritaParams::new(p.with_h0(h0).map_err(err_str)?, lam).map_err(err_str)?;
            min_abs = min_abs.min(limiting_field_expectation(&mp).map_err(err_str)?.abs());
        }
        if min_abs < 1e-4 {
            return fail(format!("field mean reachable ({min_abs}) below the gap at h0={h0}"));
        }
    }
    let l_min = neutral_l_min(&p).map_err(err_str)?;
    let pt = neutral_point_for_l(&p, 0.5 * (l_min + p.beta * p.eps)).map_err(err_str)?;
    let mp = MoritaParams::new(p.with_h0(pt.h0).map_err(err_str)?, pt.lambda).map_err(err_str)?;
    let on_curve = limiting_field_expectation(&mp).map_err(err_str)?.abs();
    if on_curve > 1e-10 {
        return fail(format!("field mean {on_curve} does not vanish on the curve"));
    }
    Ok(format!("gap a = {a:.6}; |E| bounded away below it and {on_curve:.2e} on the curve"))
}

fn check_landscape_stationarity() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(106);
    let mut count = 0;
    for _ in 0..60 {
        let p = random_params(&mut rng, (0.4, 3.0), (0.05, 0.8), (-0.4, 0.4));
        let mp = MoritaParams::new(p, rng.gen_range(-1.0..1.0)).map_err(err_str)?;
        let hhat = mp.effective_field();
        let set = classify_landscape(&mp);
        let min_phi = set.global_min_value();
        for c in &set.points {
            let fixed = (c.m - (p.beta * (c.m + hhat)).tanh()).abs();
            if fixed > 1e-12 {
                return fail(format!("stationarity violated by {fixed} at m = {}", c.m));
            }
            if c.kind == PointKind::GlobalMin && (c.free_energy - min_phi).abs() > 1e-10 {
                return fail("global-min label disagrees with direct comparison".into());
            }
            // label consistent with the analytic curvature
            let curvature = 1.0 - p.beta * (1.0 - (p.beta * (c.m + hhat)).tanh().powi(2));
            match c.kind {
                PointKind::LocalMax if curvature > 1e-6 => {
                    return fail(format!("max label at positive curvature {curvature}"));
                }
                PointKind::LocalMin | PointKind::GlobalMin if curvature < -1e-6 => {
                    return fail(format!("min label at negative curvature {curvature}"));
                }
                _ => {}
            }
            count += 1;
        }
    }
    Ok(format!("{count} stationary points verified against the fixed-point form"))
}

// ---------------------------------------------------------- finite-n suite

fn check_law_normalization() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(107);
    let mut worst = 0.0f64;
    for &n in &[5usize, 12, 40] {
        let p = random_params(&mut rng, (0.4, 2.2), (0.1, 0.8), (-0.4, 0.4));
        for cond in [Conditioning::None, Conditioning::PositiveFieldSum] {
            let law = exact::true_joint_law(n, &p, cond).map_err(err_str)?;
            worst = worst.max((law.total_mass() - 1.0).abs());
        }
        let mp = MoritaParams::new(p, rng.gen_range(-0.8..0.8)).map_err(err_str)?;
        let morita = exact::morita_law(n, &mp).map_err(err_str)?;
        worst = worst.max((morita.prob.iter().sum::<f64>() - 1.0).abs());
    }
    if worst > 1e-12 {
        return fail(format!("probability tables off normalization by {worst}"));
    }
    Ok(format!("all emitted tables sum to 1; worst deviation {worst:.2e}"))
}

fn check_variance_monotone() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.0, 0.3, 0.1).map_err(err_str)?;
    let mut prev = f64::INFINITY;
    let mut report = Vec::new();
    for n in [100usize, 200, 400, 800] {
        let var = exact::true_joint_law(n, &p, Conditioning::None)
            .map_err(err_str)?
            .variance_spin();
        report.push(format!("N={n}: {var:.3e}"));
        if var >= prev {
            return fail(format!("variance not decreasing: {}", report.join(", ")));
        }
        prev = var;
    }
    Ok(format!("spin-average variance decreases: {}", report.join(", ")))
}

fn check_identities_symmetric() -> std::result::Result<String, String> {
    // at h0 = 0 the neutrality side vanishes by the antisymmetry of lambda_N
    let p = ModelParams::new(1.8, 0.5, 0.0).map_err(err_str)?;
    for n in [3usize, 6, 9] {
        let r = exact::verify_consistency_identities(n, &p).map_err(err_str)?;
        if r.neutrality > 1e-12 || r.magnetization > 1e-12 {
            return fail(format!("residuals {r:?} at N = {n}"));
        }
    }
    Ok("identities hold with vanishing field side at h0 = 0".into())
}

// ---------------------------------------------------------------- mc suite

fn check_detailed_balance() -> std::result::Result<String, String> {
    let mp = MoritaParams::new(ModelParams::new(0.9, 0.5, 0.1).map_err(err_str)?, 0.2)
        .map_err(err_str)?;
    let config = McConfig {
        n_total: 3,
        sweeps: 1_000_000,
        burn_in: 10_000,
        seed: 31,
        target: McTarget::Morita(mp),
    };
    let freq = mc::configuration_frequencies(&config).map_err(err_str)?;
    let probs = exact::enumeration::morita_config_probs(3, &mp).map_err(err_str)?;
    let n_samples = (config.sweeps - config.burn_in) as f64;
    let mut worst = 0.0f64;
    for (cell, (&f, &p)) in freq.iter().zip(&probs).enumerate() {
        // binomial scale inflated for single-flip autocorrelation
        let sigma = 2.0 * (p * (1.0 - p) / n_samples).sqrt();
        let pulls = (f - p).abs() / sigma;
        worst = worst.max(pulls);
        if pulls > 4.0 {
            return fail(format!(
                "cell {cell}: frequency {f:.6} vs probability {p:.6} ({pulls:.1} sigma)"
            ));
        }
    }
    Ok(format!("64 configuration cells within 4 sigma; worst pull {worst:.2}"))
}

fn check_seed_determinism() -> std::result::Result<String, String> {
    let mp = MoritaParams::new(ModelParams::new(0.8, 0.4, 0.05).map_err(err_str)?, -0.3)
        .map_err(err_str)?;
    let config = McConfig {
        n_total: 25,
        sweeps: 5000,
        burn_in: 500,
        seed: 12345,
        target: McTarget::Morita(mp),
    };
    let a = mc::sample(&config).map_err(err_str)?;
    let b = mc::sample(&config).map_err(err_str)?;
    if a != b {
        return fail("same seed and config produced different estimates".into());
    }
    let other = mc::sample(&McConfig {
        seed: 54321,
        ..config.clone()
    })
    .map_err(err_str)?;
    if a == other {
        return fail("different seeds produced identical estimates".into());
    }
    Ok("bit-identical reruns; distinct seeds decorrelate".into())
}

// ------------------------------------------------------ acceptance criteria

fn criterion_01() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(201);
    let mut worst: (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let p = random_params(&mut rng, (0.3, 2.0), (0.05, 1.0), (-0.5, 0.5));
        for n in [4usize, 6, 8, 10] {
            let r = exact::verify_consistency_identities(n, &p).map_err(err_str)?;
            worst.0 = worst.0.max(r.magnetization);
            worst.1 = worst.1.max(r.neutrality);
            if r.magnetization >= 1e-10 || r.neutrality >= 1e-10 {
                return fail(format!(
                    "residuals ({:.2e}, {:.2e}) at N={n}, beta={}, eps={}, h0={}",
                    r.magnetization, r.neutrality, p.beta, p.eps, p.h0
                ));
            }
        }
    }
    Ok(format!(
        "both residuals < 1e-10 over N in {{4,6,8,10}} x 5 triples; worst ({:.2e}, {:.2e})",
        worst.0, worst.1
    ))
}

fn criterion_02() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = random_params(&mut rng, (0.3, 2.0), (0.05, 1.0), (-0.5, 0.5));
        for n in [2usize, 4, 6, 8, 10, 12] {
            let err = exact::conditional_kernel_check(n, &p).map_err(err_str)?;
            worst = worst.max(err);
            if err >= 1e-12 {
                return fail(format!(
                    "kernel mismatch {err:.2e} at N={n}, beta={}, eps={}, h0={}",
                    p.beta, p.eps, p.h0
                ));
            }
        }
    }
    Ok(format!(
        "conditional kernel exact to 1e-12 for N up to 12; worst {worst:.2e}"
    ))
}

fn criterion_03() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(203);
    let mut worst = 0.0f64;
    let mut push = |v: f64| worst = worst.max(v);
    for _ in 0..20 {
        let p = random_params(&mut rng, (0.2, 1.8), (0.05, 1.0), (-0.5, 0.5));
        let lam = rng.gen_range(-0.8..0.8);
        let mp = MoritaParams::new(p, lam).map_err(err_str)?;
        for n in 1..=8usize {
            for n_plus in 0..=n {
                let comb = exact::quenched_log_z(n, n_plus, &p).map_err(err_str)?.log_z;
                let brute =
                    exact::enumeration::quenched_log_z_by_count(n, n_plus, &p).map_err(err_str)?;
                push((comb - brute).abs());
                push(
                    (exact::quenched_mean_spin(n, n_plus, &p).map_err(err_str)?
                        - exact::enumeration::quenched_spin_mean(
                            n,
                            (1u32 << n_plus) - 1,
                            &p,
                        )
                        .map_err(err_str)?)
                    .abs(),
                );
            }
            for j in 0..n {
                let comb = exact::lambda_n(n, j, &p).map_err(err_str)?;
                let lo = exact::enumeration::quenched_log_z_by_count(n, j, &p).map_err(err_str)?;
                let hi = exact::enumeration::quenched_log_z_by_count(n, j + 1, &p)
                    .map_err(err_str)?;
                push((comb - 0.5 * (lo - hi)).abs());
            }
            let law = exact::true_joint_law(n, &p, Conditioning::None).map_err(err_str)?;
            let brute = exact::enumeration::true_pair_law(n, &p).map_err(err_str)?;
            for (j, row) in law.prob.iter().enumerate() {
                for (s, &v) in row.iter().enumerate() {
                    let key = (2 * s as i32 - (n as i32 - 1), j);
                    push((v - brute.get(&key).cloned().unwrap_or(0.0)).abs());
                }
            }
            let morita = exact::morita_law(n, &mp).map_err(err_str)?;
            let (blaw, bspin, beta1) = exact::enumeration::morita_law(n, &mp).map_err(err_str)?;
            for k in 0..=n {
                push((morita.prob[k] - blaw[k]).abs());
            }
            push((morita.spin_expectation - bspin).abs());
            push((morita.field_expectation - beta1).abs());
        }
    }
    if worst >= 1e-11 {
        return fail(format!("combinatorics deviate from enumeration by {worst:.2e}"));
    }
    Ok(format!(
        "log Z, lambda_N, joint and approximant laws match enumeration; worst {worst:.2e}"
    ))
}

/// The acceptance rectangle contains a paramagnetic corner where the
/// quenched equation has no positive root; those points are valid only as
/// no-solution answers and both routes must agree on them.
const FERROMAGNETIC_POINTS_C4: usize = 14;

fn criterion_04() -> std::result::Result<String, String> {
    let mut ferro = 0;
    let mut para = 0;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for beta in linspace(1.2, 3.0, 5) {
        for eps in linspace(0.05, 0.8, 5) {
            let p = ModelParams::new(beta, eps, 0.0).map_err(err_str)?;
            match solve_naive_system(&p, Branch::Plus) {
                Ok(sol) => {
                    let m = sol.m;
                    let eq2 = (m
                        - 0.5 * ((beta * (m + eps)).tanh() + (beta * (m - eps)).tanh()))
                    .abs();
                    let eq8 = ((-2.0 * sol.lambda).exp() * (beta * (m - eps)).cosh()
                        - (beta * (m + eps)).cosh())
                    .abs();
                    worst.0 = worst.0.max(eq2);
                    worst.1 = worst.1.max(eq8);
                    if eq2 >= 1e-10 || eq8 >= 1e-8 {
                        return fail(format!(
                            "residuals eq2={eq2:.2e}, eq8={eq8:.2e} at beta={beta}, eps={eps}"
                        ));
                    }
                    ferro += 1;
                }
                Err(Error::NoSolution(_)) => {
                    if solve_quenched(&p).iter().any(|&m| m > 1e-8) {
                        return fail(format!(
                            "routes disagree: quenched has a positive root at beta={beta}, eps={eps}"
                        ));
                    }
                    para += 1;
                }
                Err(e) => return fail(err_str(e)),
            }
        }
    }
    if ferro != FERROMAGNETIC_POINTS_C4 {
        return fail(format!(
            "expected {FERROMAGNETIC_POINTS_C4} ferromagnetic grid points, found {ferro}"
        ));
    }
    Ok(format!(
        "equation residuals < (1e-10, 1e-8) on all {ferro} ferromagnetic points \
         (worst {:.2e}, {:.2e}); both routes agree the other {para} are paramagnetic",
        worst.0, worst.1
    ))
}

fn criterion_05() -> std::result::Result<String, String> {
    let mut count = 0;
    let mut min_gap = f64::INFINITY;
    for beta in linspace(1.2, 3.0, 5) {
        for eps in linspace(0.05, 0.8, 5) {
            let p = ModelParams::new(beta, eps, 0.0).map_err(err_str)?;
            let sol = match solve_naive_system(&p, Branch::Plus) {
                Ok(s) => s,
                Err(Error::NoSolution(_)) => continue,
                Err(e) => return fail(err_str(e)),
            };
            if sol.free_energy_gap <= 1e-6 {
                return fail(format!(
                    "gap {:.2e} too small at beta={beta}, eps={eps}",
                    sol.free_energy_gap
                ));
            }
            let mp = MoritaParams::new(p, sol.lambda).map_err(err_str)?;
            for g in classify_landscape(&mp).global_minima() {
                if g.m.signum() == sol.m.signum() {
                    return fail(format!(
                        "global minimizer {} has the sign of the branch solution {}",
                        g.m, sol.m
                    ));
                }
            }
            min_gap = min_gap.min(sol.free_energy_gap);
            count += 1;
        }
    }
    if count != FERROMAGNETIC_POINTS_C4 {
        return fail(format!("expected {FERROMAGNETIC_POINTS_C4} witnesses, found {count}"));
    }
    Ok(format!(
        "branch solution strictly metastable with opposite-sign global minimizer at all \
         {count} points; smallest gap {min_gap:.2e}"
    ))
}

fn criterion_06() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.0, 0.3, 0.0).map_err(err_str)?;
    let a = compute_gap(&p).map_err(err_str)?;
    if a <= 0.0 {
        return fail(format!("gap must be positive below the critical temperature, got {a}"));
    }
    // endpoint formula against the closed-form curve infimum
    let l_min = neutral_l_min(&p).map_err(err_str)?;
    let m_t = (2.0 * l_min).sinh() / (2.0 * p.beta * p.eps).sinh();
    let inf_est = field_shift(p.beta, p.eps, l_min).map_err(err_str)? + m_t.atanh() / p.beta - m_t;
    if (inf_est - a).abs() >= 1e-8 {
        return fail(format!(
            "curve infimum {inf_est} disagrees with endpoint formula {a}"
        ));
    }
    // the curve approaches a from above
    let near = neutral_point_for_l(&p, l_min * (1.0 + 1e-6)).map_err(err_str)?;
    if near.h0 <= a || near.h0 - a > 1e-4 {
        return fail(format!("h0 = {} just above the endpoint vs a = {a}", near.h0));
    }
    for h0 in [0.0, a / 2.0] {
        let mut min_abs = f64::INFINITY;
        for lam in linspace(-2.0 + 1e-9, 2.0, 200) {
            let mp = MoritaParams::new(p.with_h0(h0).map_err(err_str)?, lam).map_err(err_str)?;
            min_abs = min_abs.min(limiting_field_expectation(&mp).map_err(err_str)?.abs());
        }
        if min_abs <= 1e-3 {
            return fail(format!("min |E[field]| = {min_abs:.2e} at h0 = {h0} not above 1e-3"));
        }
    }
    let pt = neutral_point_for_l(&p, 0.5 * (l_min + p.beta * p.eps)).map_err(err_str)?;
    let mp = MoritaParams::new(p.with_h0(pt.h0).map_err(err_str)?, pt.lambda).map_err(err_str)?;
    let on_curve = limiting_field_expectation(&mp).map_err(err_str)?.abs();
    if on_curve >= 1e-10 {
        return fail(format!("|E[field]| = {on_curve:.2e} on the curve"));
    }
    let warm = compute_gap(&ModelParams::new(0.9, 0.3, 0.0).map_err(err_str)?).map_err(err_str)?;
    if warm != 0.0 {
        return fail(format!("gap must vanish at beta = 0.9, got {warm}"));
    }
    Ok(format!(
        "a = {a:.8} agrees with the curve infimum to 1e-8; |E[field]| bounded below \
         off the curve, {on_curve:.2e} on it; a = 0 at beta = 0.9"
    ))
}

fn criterion_07() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.0, 0.3, 0.2).map_err(err_str)?;
    let mp = MoritaParams::new(p, 0.1).map_err(err_str)?;
    let target = curie_weiss_magnetization(p.beta, mp.effective_field(), Side::Plus)
        .map_err(err_str)?;
    let mut prev = f64::INFINITY;
    let mut trend = Vec::new();
    for n in [100usize, 200, 400, 800] {
        let d = (exact::morita_law(n, &mp).map_err(err_str)?.spin_expectation - target).abs();
        trend.push(format!("N={n}: {d:.2e}"));
        if d >= prev {
            return fail(format!("deviation not decreasing: {}", trend.join(", ")));
        }
        prev = d;
    }
    if prev >= 0.01 {
        return fail(format!(
            "deviation {prev:.2e} at N = 800 not below 0.01; trend {}",
            trend.join(", ")
        ));
    }
    Ok(format!("|E[spin avg] - m_cw| decreasing, {}", trend.join(", ")))
}

fn criterion_08() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.0, 0.3, 0.0).map_err(err_str)?;
    let sol = solve_naive_system(&p, Branch::Plus).map_err(err_str)?;
    let law =
        exact::true_joint_law(600, &p, Conditioning::PositiveFieldSum).map_err(err_str)?;
    let mass_m = law.mass_where(|m, _| (m - sol.m).abs() < 0.05);
    let mass_l = law.mass_where(|_, l| (l - sol.lambda).abs() < 0.05);
    if mass_m < 0.9 {
        return fail(format!("spin-average mass {mass_m:.4} below 0.9"));
    }
    if mass_l < 0.9 {
        return fail(format!("lambda_N mass {mass_l:.4} below 0.9"));
    }
    Ok(format!(
        "conditioned law at N=600 concentrates: {mass_m:.4} near m* = {:.4}, {mass_l:.4} near lambda* = {:.4}",
        sol.m, sol.lambda
    ))
}

fn criterion_09() -> std::result::Result<String, String> {
    let cold_p = ModelParams::new(2.0, 0.3, 0.0).map_err(err_str)?;
    let sol = solve_naive_system(&cold_p, Branch::Plus).map_err(err_str)?;
    let jump = exact::lambda_jump(2000, &cold_p).map_err(err_str)?;
    let target = 2.0 * sol.lambda.abs();
    if (jump - target).abs() > 0.1 * target {
        return fail(format!("jump {jump:.4} vs 2|lambda*| = {target:.4} beyond 10%"));
    }
    let warm = exact::lambda_jump(2000, &ModelParams::new(0.8, 0.3, 0.0).map_err(err_str)?)
        .map_err(err_str)?;
    if warm >= 0.02 {
        return fail(format!("subcritical jump {warm:.4} not below 0.02"));
    }
    Ok(format!(
        "lambda_N jump {jump:.4} within 10% of 2|lambda*| = {target:.4}; subcritical jump {warm:.4}"
    ))
}

fn criterion_10() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(210);
    let mut worst = 0.0f64;
    for i in 0..3 {
        let p = random_params(&mut rng, (0.5, 1.5), (0.2, 0.8), (-0.3, 0.3));
        let mp = MoritaParams::new(p, rng.gen_range(-0.5..0.5)).map_err(err_str)?;
        let err = exact::verify_hs_representation(4, &mp, 100, 900 + i).map_err(err_str)?;
        worst = worst.max(err);
        if err >= 1e-8 {
            return fail(format!(
                "integral identity off by {err:.2e} at beta={}, eps={}, h0={}, lambda={}",
                p.beta, p.eps, p.h0, mp.lambda
            ));
        }
    }
    Ok(format!("integral representation exact at N=4; worst error {worst:.2e}"))
}

fn criterion_11() -> std::result::Result<String, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(211);
    let mut worst_pull = 0.0f64;
    for i in 0..5 {
        let p = random_params(&mut rng, (0.4, 0.9), (0.1, 0.8), (-0.3, 0.3));
        let mp = MoritaParams::new(p, rng.gen_range(-0.5..0.5)).map_err(err_str)?;
        let config = McConfig {
            n_total: 50,
            sweeps: 40_000,
            burn_in: 4000,
            seed: 1000 + i,
            target: McTarget::Morita(mp),
        };
        let est = mc::sample(&config).map_err(err_str)?;
        if i == 0 {
            let again = mc::sample(&config).map_err(err_str)?;
            if est != again {
                return fail("estimates not bit-reproducible under a fixed seed".into());
            }
        }
        let exact_mean = exact::morita_law(50, &mp).map_err(err_str)?.spin_expectation;
        let dev = (est.mean_spin_average - exact_mean).abs();
        let pull = dev / est.std_error;
        worst_pull = worst_pull.max(pull);
        if dev > 3.0 * est.std_error {
            return fail(format!(
                "estimate {:.5} vs exact {exact_mean:.5}: {pull:.2} sigma at beta={}, eps={}, h0={}, lambda={}",
                est.mean_spin_average, p.beta, p.eps, p.h0, mp.lambda
            ));
        }
    }
    Ok(format!(
        "5 seeded runs at N=50 within 3 sigma of exact expectations (worst pull {worst_pull:.2}); reruns bit-identical"
    ))
}

fn bin_law(pairs: impl Iterator<Item = (f64, f64)>) -> HashMap<i64, f64> {
    // spin-average laws live on staggered supports; compare on 0.01 bins
    let mut map = HashMap::new();
    for (m, p) in pairs {
        *map.entry((m / 0.01).round() as i64).or_insert(0.0) += p;
    }
    map
}

fn criterion_12() -> std::result::Result<String, String> {
    let p = ModelParams::new(2.0, 0.3, 0.0).map_err(err_str)?;
    let n = 800;
    // best-neutrality chemical potential on a symmetric grid
    let mut best = (f64::INFINITY, 0.0);
    for lam in linspace(-1.0, 1.0, 41) {
        let mp = MoritaParams::new(p, lam).map_err(err_str)?;
        let e = exact::morita_law(n, &mp).map_err(err_str)?.field_expectation.abs();
        if e < best.0 {
            best = (e, lam);
        }
    }
    let mp = MoritaParams::new(p, best.1).map_err(err_str)?;
    let morita = exact::morita_law(n, &mp).map_err(err_str)?;
    let true_law = exact::true_joint_law(n, &p, Conditioning::None).map_err(err_str)?;
    let qa = bin_law(
        true_law
            .spin_marginal()
            .into_iter()
            .zip(true_law.m_bar.iter().cloned())
            .map(|(prob, m)| (m, prob)),
    );
    let qb = bin_law(morita.m_bar.iter().cloned().zip(morita.prob.iter().cloned()));
    let mut keys: Vec<i64> = qa.keys().chain(qb.keys()).cloned().collect();
    keys.sort_unstable();
    keys.dedup();
    let tv: f64 = 0.5
        * keys
            .iter()
            .map(|k| (qa.get(k).unwrap_or(&0.0) - qb.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>();
    if tv <= 0.2 {
        return fail(format!(
            "total variation {tv:.4} at best-neutrality lambda = {} not above 0.2",
            best.1
        ));
    }
    Ok(format!(
        "best-neutrality lambda = {} (|E[field]| = {:.2e}) still mismatches the true \
         spin-average law: total variation {tv:.4}",
        best.1, best.0
    ))
}
