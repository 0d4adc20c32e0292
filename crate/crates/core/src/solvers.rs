//! Fixed-point solvers for the quenched magnetization equation and the
//! two-parameter approximant system, classification of the free-energy
//! landscape, and the neutral set with its gap endpoint.

use crate::error::{Error, Result};
use crate::model::{
    curie_weiss_magnetization, field_mean, field_mean_tanh_form, field_shift, free_energy,
    spin_mean, ModelParams, MoritaParams, Side,
};
use crate::numerics::{bracketed_roots, log_cosh};
use serde::Serialize;

/// Root-branch selector by the sign of m. The zero branch exists only at
/// h0 = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Zero,
    Minus,
}

/// Stability label of a stationary point of the free-energy landscape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    GlobalMin,
    LocalMin,
    LocalMax,
    /// Second difference below resolution; reported instead of guessed.
    Marginal,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalPoint {
    pub m: f64,
    pub kind: PointKind,
    pub free_energy: f64,
    /// |dΦ/dm| at the point by Richardson-extrapolated central differences.
    pub stationarity_residual: f64,
    /// Raw second central difference (step 1e-3) used for the label.
    pub second_difference: f64,
}

/// All stationary points of the free-energy landscape for fixed parameters.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointSet {
    pub points: Vec<CriticalPoint>,
    pub params: MoritaParams,
}

impl CriticalPointSet {
    /// The lowest free-energy value among the stationary points.
    pub fn global_min_value(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.free_energy)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn global_minima(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points
            .iter()
            .filter(|p| p.kind == PointKind::GlobalMin)
    }
}

/// Solution of the coupled magnetization / field-neutrality system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NaiveSolution {
    pub m: f64,
    pub lambda: f64,
    /// |m − spin_mean(m)| at the returned (m, λ).
    pub eos_residual: f64,
    /// |field_mean(m)| at the returned (m, λ).
    pub neutrality_residual: f64,
    /// True when the solution sits strictly above the global minimum of the
    /// landscape at its own λ.
    pub metastable: bool,
    /// free_energy(m) − global landscape minimum at the returned λ.
    pub free_energy_gap: f64,
}

/// One point of the neutral set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NeutralPoint {
    pub h0: f64,
    pub lambda: f64,
    pub l: f64,
    /// |m_cw(β, h0 − shift(l)) − sinh(2l)/sinh(2βε)|, checked independently.
    pub residual: f64,
}

/// Sampled branch of the neutral set, together with its gap endpoint.
#[derive(Debug, Clone, Serialize)]
pub struct NeutralCurve {
    pub points: Vec<NeutralPoint>,
    pub l_min: f64,
    /// The gap endpoint a(β, ε): infimum of h0 along the curve.
    pub gap: f64,
    pub params: ModelParams,
}

/// Quenched rate function whose stationary points solve the quenched
/// magnetization equation; used to pick the thermodynamically relevant root
/// when a sign branch carries more than one.
fn quenched_free_energy(m: f64, p: &ModelParams) -> f64 {
    m * m / 2.0
        - (log_cosh(p.beta * (m + p.eps + p.h0)) + log_cosh(p.beta * (m - p.eps + p.h0)))
            / (2.0 * p.beta)
}

/// λ eliminated through the neutrality condition:
/// λ(m) = (1/2)·log(cosh β(m−ε+h₀) / cosh β(m+ε+h₀)).
pub fn lambda_for_m(m: f64, p: &ModelParams) -> f64 {
    0.5 * (log_cosh(p.beta * (m - p.eps + p.h0)) - log_cosh(p.beta * (m + p.eps + p.h0)))
}

/// All roots of m = (tanh β(m+ε+h₀) + tanh β(m−ε+h₀))/2, ascending.
///
/// Sign changes are bracketed on a 1e-3 grid and refined by bisection. In
/// most of the parameter plane there are 1 or 3 roots; deep in the
/// strong-field low-temperature region a five-root window exists and all
/// roots are returned.
pub fn solve_quenched(p: &ModelParams) -> Vec<f64> {
    let g = |m: f64| {
        m - 0.5
            * ((p.beta * (m + p.eps + p.h0)).tanh() + (p.beta * (m - p.eps + p.h0)).tanh())
    };
    let bound = 1.0 + p.h0.abs() + p.eps;
    let mut roots = bracketed_roots(-bound, bound, 1e-3, g, 1e-15);
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-8);
    roots
}

/// Solve the coupled system on the requested branch by eliminating λ, which
/// reduces the magnetization equation to the quenched one. The branch root is
/// returned with λ(m) and both residuals; `metastable` is set by comparing
/// against the landscape minimum at that λ.
pub fn solve_naive_system(p: &ModelParams, branch: Branch) -> Result<NaiveSolution> {
    let roots = solve_quenched(p);
    let candidates: Vec<f64> = roots
        .iter()
        .cloned()
        .filter(|&m| match branch {
            Branch::Plus => m > 1e-9,
            Branch::Zero => m.abs() <= 1e-9,
            Branch::Minus => m < -1e-9,
        })
        .collect();
    let m = candidates
        .iter()
        .cloned()
        .min_by(|&a, &b| {
            quenched_free_energy(a, p)
                .partial_cmp(&quenched_free_energy(b, p))
                .unwrap()
        })
        .ok_or_else(|| {
            Error::NoSolution(format!(
                "branch {branch:?} has no root at beta={}, eps={}, h0={}",
                p.beta, p.eps, p.h0
            ))
        })?;
    let lambda = lambda_for_m(m, p);
    let mp = MoritaParams::new(*p, lambda)?;
    let eos_residual = (m - spin_mean(m, &mp)).abs();
    let neutrality_residual = field_mean(m, &mp).abs();
    let landscape = classify_landscape(&mp);
    let gap = free_energy(m, &mp) - landscape.global_min_value();
    Ok(NaiveSolution {
        m,
        lambda,
        eos_residual,
        neutrality_residual,
        metastable: gap > 1e-9,
        free_energy_gap: gap,
    })
}

/// Locate and label all stationary points of m ↦ free_energy(m).
///
/// Stationarity is bracketed through m = tanh(β(m+ĥ)); labels come from the
/// sign of the second central difference (step 1e-3, marginal below 1e-8).
/// Every local minimum within rounding distance of the lowest value is
/// labeled a global minimum, so the symmetric landscape reports both wells.
pub fn classify_landscape(params: &MoritaParams) -> CriticalPointSet {
    let p = params.model;
    let hhat = params.effective_field();
    let psi = |m: f64| m - (p.beta * (m + hhat)).tanh();
    let bound = 2.0 + p.eps + p.h0.abs();
    let roots = bracketed_roots(-bound, bound, 1e-3, psi, 1e-15);

    let mut points: Vec<CriticalPoint> = roots
        .into_iter()
        .map(|m| {
            let phi = free_energy(m, params);
            let d = 1e-3;
            let second =
                free_energy(m + d, params) - 2.0 * phi + free_energy(m - d, params);
            let kind = if second.abs() <= 1e-8 {
                PointKind::Marginal
            } else if second > 0.0 {
                PointKind::LocalMin
            } else {
                PointKind::LocalMax
            };
            let h = 1e-5;
            let d1 = (free_energy(m + h, params) - free_energy(m - h, params)) / (2.0 * h);
            let d2 =
                (free_energy(m + 2.0 * h, params) - free_energy(m - 2.0 * h, params)) / (4.0 * h);
            let stationarity_residual = ((4.0 * d1 - d2) / 3.0).abs();
            CriticalPoint {
                m,
                kind,
                free_energy: phi,
                stationarity_residual,
                second_difference: second,
            }
        })
        .collect();

    let min_phi = points
        .iter()
        .filter(|c| c.kind == PointKind::LocalMin)
        .map(|c| c.free_energy)
        .fold(f64::INFINITY, f64::min);
    if min_phi.is_finite() {
        let tol = 1e-12 * (1.0 + min_phi.abs());
        for c in points.iter_mut() {
            if c.kind == PointKind::LocalMin && c.free_energy - min_phi <= tol {
                c.kind = PointKind::GlobalMin;
            }
        }
    } else if let Some(best) = points
        .iter_mut()
        .min_by(|a, b| a.free_energy.partial_cmp(&b.free_energy).unwrap())
    {
        best.kind = PointKind::GlobalMin;
    }
    CriticalPointSet {
        points,
        params: *params,
    }
}

/// Left endpoint of the l-interval carrying the neutral branch:
/// (1/2)·asinh(sinh(2βε)·m_cw(β, 0+)).
pub fn neutral_l_min(p: &ModelParams) -> Result<f64> {
    let m0 = curie_weiss_magnetization(p.beta, 0.0, Side::Plus)?;
    Ok(0.5 * ((2.0 * p.beta * p.eps).sinh() * m0).asinh())
}

/// The unique neutral pair (h0, λ = −l) for l in the open interval
/// (l_min, βε), in closed form: with m_t = sinh(2l)/sinh(2βε),
/// h0 = shift(l) + atanh(m_t)/β − m_t.
pub fn neutral_point_for_l(p: &ModelParams, l: f64) -> Result<NeutralPoint> {
    if p.eps <= 0.0 {
        return Err(Error::Domain(
            "the neutral set needs eps > 0".into(),
        ));
    }
    if !l.is_finite() {
        return Err(Error::Domain(format!("l must be finite, got {l}")));
    }
    let l_min = neutral_l_min(p)?;
    let l_max = p.beta * p.eps;
    if l <= l_min || l >= l_max {
        return Err(Error::OutOfRange(format!(
            "no neutral point at l = {l}; the branch lives on ({l_min}, {l_max})"
        )));
    }
    let m_t = (2.0 * l).sinh() / (2.0 * p.beta * p.eps).sinh();
    if !m_t.is_finite() || m_t >= 1.0 {
        return Err(Error::Numeric(format!("target magnetization {m_t} at l = {l}")));
    }
    let shift = field_shift(p.beta, p.eps, l)?;
    let h0 = shift + m_t.atanh() / p.beta - m_t;
    let back = curie_weiss_magnetization(p.beta, h0 - shift, Side::Plus)?;
    Ok(NeutralPoint {
        h0,
        lambda: -l,
        l,
        residual: (back - m_t).abs(),
    })
}

/// Sample the positive branch of the neutral set at `count` evenly spaced l
/// values. Defaults cover the open interval (l_min, βε) up to a relative
/// margin of 1e-6 on each end.
pub fn neutral_curve(
    p: &ModelParams,
    l_lo: Option<f64>,
    l_hi: Option<f64>,
    count: usize,
) -> Result<NeutralCurve> {
    if count < 2 {
        return Err(Error::Config("neutral curve needs at least 2 points".into()));
    }
    let l_min = neutral_l_min(p)?;
    let l_max = p.beta * p.eps;
    let width = l_max - l_min;
    let lo = l_lo.unwrap_or(l_min + 1e-6 * width);
    let hi = l_hi.unwrap_or(l_max - 1e-6 * width);
    if lo >= hi {
        return Err(Error::Config(format!("empty l range [{lo}, {hi}]")));
    }
    let gap = compute_gap(p)?;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let l = lo + (hi - lo) * i as f64 / (count - 1) as f64;
        points.push(neutral_point_for_l(p, l)?);
    }
    Ok(NeutralCurve {
        points,
        l_min,
        gap,
        params: *p,
    })
}

/// Gap endpoint a(β, ε) = shift(l_min): the infimum of h0 over the neutral
/// branch. Zero exactly when β ≤ 1.
pub fn compute_gap(p: &ModelParams) -> Result<f64> {
    let l_min = neutral_l_min(p)?;
    field_shift(p.beta, p.eps, l_min)
}

/// Large-N mean of a single random field under the approximant:
/// (B(1−L²)·m_cw(β, ĥ) + L(1−B²))/(1−B²L²).
///
/// Errors with an ambiguous phase when ĥ = 0 and β > 1, where the limit is a
/// symmetric mixture and no single branch applies.
pub fn limiting_field_expectation(params: &MoritaParams) -> Result<f64> {
    let p = params.model;
    let hhat = params.effective_field();
    let m = if hhat == 0.0 {
        if p.beta > 1.0 {
            return Err(Error::AmbiguousPhase(format!(
                "effective field vanishes at beta = {} > 1; use the mixture semantics",
                p.beta
            )));
        }
        0.0
    } else {
        curie_weiss_magnetization(p.beta, hhat, Side::Plus)?
    };
    Ok(field_mean_tanh_form(m, p.beta, p.eps, params.lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, eps: f64, h0: f64) -> ModelParams {
        ModelParams::new(beta, eps, h0).unwrap()
    }

    const M_STAR: f64 = 0.912934157639563695; // positive quenched root at (2, 0.3, 0)
    const LAMBDA_STAR: f64 = -0.56257536987024428447;

    #[test]
    fn quenched_subcritical_unique_zero() {
        let roots = solve_quenched(&params(0.5, 0.3, 0.0));
        assert_eq!(roots.len(), 1);
        assert!(roots[0].abs() < 1e-12);
    }

    #[test]
    fn quenched_reduces_to_curie_weiss_at_zero_eps() {
        let roots = solve_quenched(&params(2.0, 0.0, 0.0));
        let m0 = curie_weiss_magnetization(2.0, 0.0, Side::Plus).unwrap();
        assert_eq!(roots.len(), 3);
        assert!((roots[0] + m0).abs() < 1e-12);
        assert!(roots[1].abs() < 1e-12);
        assert!((roots[2] - m0).abs() < 1e-12);
    }

    #[test]
    fn quenched_reference_roots() {
        let roots = solve_quenched(&params(2.0, 0.3, 0.0));
        assert_eq!(roots.len(), 3);
        assert!((roots[2] - M_STAR).abs() < 1e-12);
        assert!((roots[0] + M_STAR).abs() < 1e-12);
        for m in roots {
            let r = m - 0.5 * ((2.0 * (m + 0.3)).tanh() + (2.0 * (m - 0.3)).tanh());
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn quenched_five_root_window() {
        // strong-field first-order region: two positive roots
        let roots = solve_quenched(&params(2.55, 0.425, 0.0));
        assert_eq!(roots.len(), 5);
        let pos: Vec<f64> = roots.iter().cloned().filter(|&m| m > 0.0).collect();
        assert_eq!(pos.len(), 2);
        // the branch solution is the thermodynamically stable (outer) one
        let sol = solve_naive_system(&params(2.55, 0.425, 0.0), Branch::Plus).unwrap();
        assert!((sol.m - pos[1]).abs() < 1e-12);
    }

    #[test]
    fn naive_positive_branch_is_metastable() {
        let sol = solve_naive_system(&params(2.0, 0.3, 0.0), Branch::Plus).unwrap();
        assert!((sol.m - M_STAR).abs() < 1e-11);
        assert!((sol.lambda - LAMBDA_STAR).abs() < 1e-11);
        assert!(sol.lambda < 0.0);
        assert!(sol.metastable);
        assert!(sol.eos_residual < 1e-10);
        assert!(sol.neutrality_residual < 1e-10);
    }

    #[test]
    fn naive_zero_branch_is_symmetric_fixed_point() {
        let sol = solve_naive_system(&params(1.7, 0.4, 0.0), Branch::Zero).unwrap();
        assert!(sol.m.abs() < 1e-12);
        assert!(sol.lambda.abs() < 1e-12);
        assert!(sol.eos_residual < 1e-12);
        assert!(sol.neutrality_residual < 1e-12);
    }

    #[test]
    fn naive_positive_branch_missing_when_subcritical() {
        let err = solve_naive_system(&params(0.8, 0.1, 0.0), Branch::Plus);
        assert!(matches!(err, Err(Error::NoSolution(_))));
    }

    /// Independent oracle: damped Newton on the raw two-dimensional system
    /// (m − spin_mean, field_mean) with finite-difference Jacobian.
    fn newton_2d(p: &ModelParams, mut m: f64, mut lam: f64) -> (f64, f64) {
        for _ in 0..200 {
            let f = |m: f64, lam: f64| {
                let mp = MoritaParams::new(*p, lam).unwrap();
                (m - spin_mean(m, &mp), field_mean(m, &mp))
            };
            let (f1, f2) = f(m, lam);
            if f1.abs() < 1e-13 && f2.abs() < 1e-13 {
                break;
            }
            let d = 1e-7;
            let (a1, a2) = f(m + d, lam);
            let (b1, b2) = f(m, lam + d);
            let j11 = (a1 - f1) / d;
            let j12 = (b1 - f1) / d;
            let j21 = (a2 - f2) / d;
            let j22 = (b2 - f2) / d;
            let det = j11 * j22 - j12 * j21;
            let dm = (f1 * j22 - f2 * j12) / det;
            let dl = (j11 * f2 - j21 * f1) / det;
            m -= 0.8 * dm;
            lam -= 0.8 * dl;
        }
        (m, lam)
    }

    #[test]
    fn naive_matches_two_dimensional_iteration_oracle() {
        let p = params(2.0, 0.3, 0.05);
        let sol = solve_naive_system(&p, Branch::Plus).unwrap();
        assert!(sol.eos_residual < 1e-10);
        assert!(sol.neutrality_residual < 1e-10);
        let (m, lam) = newton_2d(&p, 0.9, -0.4);
        assert!((sol.m - m).abs() < 1e-9, "m {} vs oracle {}", sol.m, m);
        assert!((sol.lambda - lam).abs() < 1e-9);
    }

    #[test]
    fn landscape_positive_lambda_single_global_min() {
        let mp = MoritaParams::new(params(2.0, 0.3, 0.0), 0.4).unwrap();
        let set = classify_landscape(&mp);
        let globals: Vec<_> = set.global_minima().collect();
        assert_eq!(globals.len(), 1);
        assert!(globals[0].m > 0.0);
        for c in &set.points {
            assert!(c.stationarity_residual < 1e-10);
            let fixed = c.m - (2.0 * (c.m + mp.effective_field())).tanh();
            assert!(fixed.abs() < 1e-12);
        }
    }

    #[test]
    fn landscape_symmetric_double_well() {
        let mp = MoritaParams::new(params(2.0, 0.3, 0.0), 0.0).unwrap();
        let set = classify_landscape(&mp);
        let globals: Vec<_> = set.global_minima().collect();
        assert_eq!(globals.len(), 2);
        assert!((globals[0].m + globals[1].m).abs() < 1e-12);
        assert!((globals[0].free_energy - globals[1].free_energy).abs() < 1e-12);
    }

    #[test]
    fn landscape_subcritical_single_point() {
        for lambda in [-0.8, 0.0, 1.3] {
            let mp = MoritaParams::new(params(0.8, 0.3, 0.0), lambda).unwrap();
            let set = classify_landscape(&mp);
            assert_eq!(set.points.len(), 1);
            assert_eq!(set.points[0].kind, PointKind::GlobalMin);
        }
    }

    #[test]
    fn naive_free_energy_gap_positive() {
        let p = params(2.0, 0.3, 0.0);
        let sol = solve_naive_system(&p, Branch::Plus).unwrap();
        let mp = MoritaParams::new(p, sol.lambda).unwrap();
        let set = classify_landscape(&mp);
        // global minimizer sits on the opposite side
        for g in set.global_minima() {
            assert!(g.m < 0.0);
        }
        assert!(sol.free_energy_gap > 1e-6);
    }

    #[test]
    fn neutral_curve_reaches_origin_subcritically() {
        let p = params(0.5, 0.3, 0.0);
        let pt = neutral_point_for_l(&p, 1e-6).unwrap();
        assert!(pt.h0 > 0.0 && pt.h0 < 1e-5);
        assert!(pt.residual < 1e-10);
    }

    #[test]
    fn neutral_point_mid_interval() {
        let p = params(2.0, 0.3, 0.0);
        let l_min = neutral_l_min(&p).unwrap();
        let l = 0.5 * (l_min + 0.6);
        let pt = neutral_point_for_l(&p, l).unwrap();
        assert!(pt.residual < 1e-10);
        assert_eq!(pt.lambda, -l);
        assert!(pt.h0 > 0.0);
        // mirrored pair is neutral as well: E[η] vanishes there too
        let mirrored = MoritaParams::new(p.with_h0(-pt.h0).unwrap(), l).unwrap();
        assert!(limiting_field_expectation(&mirrored).unwrap().abs() < 1e-10);
    }

    #[test]
    fn neutral_point_out_of_range_errors() {
        let p = params(2.0, 0.3, 0.0);
        assert!(matches!(
            neutral_point_for_l(&p, 0.1),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            neutral_point_for_l(&p, 0.65),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn gap_zero_iff_subcritical() {
        assert_eq!(compute_gap(&params(0.9, 0.3, 0.0)).unwrap(), 0.0);
        let a = compute_gap(&params(2.0, 0.3, 0.0)).unwrap();
        // high-precision reference via l_min = asinh(sinh(1.2)·m0)/2
        assert!((a - 0.14464719451770797913).abs() < 1e-13);
        assert!(a > 0.0 && a < 0.3);
    }

    #[test]
    fn field_expectation_zero_in_trivial_case() {
        let mp = MoritaParams::new(params(0.7, 0.5, 0.0), 0.0).unwrap();
        assert_eq!(limiting_field_expectation(&mp).unwrap(), 0.0);
    }

    #[test]
    fn field_expectation_ambiguous_below_critical_temperature() {
        let mp = MoritaParams::new(params(2.0, 0.3, 0.0), 0.0).unwrap();
        assert!(matches!(
            limiting_field_expectation(&mp),
            Err(Error::AmbiguousPhase(_))
        ));
    }

    #[test]
    fn neutral_curve_monotone_and_above_gap() {
        let p = params(2.0, 0.3, 0.0);
        let curve = neutral_curve(&p, None, None, 64).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].h0 > w[0].h0, "h0 must increase with l");
        }
        for pt in &curve.points {
            assert!(pt.h0 > curve.gap);
        }
    }
}
