//! Stationarity testing for the robust loss at non-smooth points.
//!
//! The loss is subdifferentiable everywhere. At a point w the subdifferential
//! is parameterized by a sign choice s_i in [-1, 1] for every sample whose
//! residual ties zero (others are pinned to sign(r_i)), and — at the origin —
//! by a direction g with ||g||_2 <= 1 replacing w/||w||_2. Deciding
//! 0 in dL(w) is therefore a box- (or ball-) constrained least-norm problem:
//!
//! ```text
//! minimize || b + A sigma ||_2   over sigma in [-1, 1]^F,
//! A = eps ||w||_2 X_free^T,
//! b = X^T r + eps ||w||_2 sum_fixed sign(r_i) x_i
//!     + (eps ||r||_1 / ||w||_2 + eps^2 n) w.
//! ```
//!
//! A direct minimum-norm solve short-circuits the common cases (at an
//! interpolating point of independent rows the sign choice is unique);
//! otherwise a projected accelerated gradient pass over the box finishes the
//! job. Feasibility of the origin reduces to ||X^T y||_2 <= eps ||y||_1.

#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::vec::Vec;

use crate::closed_form::alpha_coefficients;
use crate::error::{Error, Result};
use crate::linalg::{min_norm_least_squares, Matrix, Norm, Svd, Vector};
use crate::problem::SyntheticProblem;
use crate::robust_loss::{RobustLossSpec, ORIGIN_TOL};

/// Residual at which the feasibility program counts as solved.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-10;

/// Slack allowed on the box constraint when accepting a direct solve.
const BOX_SLACK: f64 = 1e-9;

const MAX_PROJECTED_ITERS: usize = 20_000;

/// Which subdifferential parameters are free at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdifferentialQuery {
    /// Samples whose residual ties zero: their sign is free in [-1, 1].
    pub free_indices: Vec<usize>,
    /// True when ||w||_2 is at the origin tolerance: the radial direction
    /// ranges over the unit ball.
    pub origin_flag: bool,
}

pub fn subdifferential_query(spec: &RobustLossSpec, w: &Vector) -> Result<SubdifferentialQuery> {
    if w.len() != spec.dim() {
        return Err(Error::DimMismatch { what: "query point", expected: spec.dim(), got: w.len() });
    }
    let r = spec.residual(w);
    let tol = spec.tie_tolerance();
    let free_indices = (0..spec.n()).filter(|&i| r[i].abs() <= tol).collect();
    Ok(SubdifferentialQuery { free_indices, origin_flag: w.norm(Norm::L2) <= ORIGIN_TOL })
}

/// A certified element of the subdifferential witnessing stationarity.
#[derive(Debug, Clone)]
pub struct StationarityWitness {
    /// Per-sample signs: pinned entries equal sign(r_i), free entries carry
    /// the solved value in [-1, 1].
    pub signs: Vector,
    /// The radial direction used: w/||w||_2 away from the origin, otherwise
    /// the unit-ball element that cancels the data term.
    pub radial: Vector,
}

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub is_stationary: bool,
    /// Distance from 0 to the nearest subdifferential element found.
    pub residual: f64,
    /// Present exactly when stationary.
    pub witness: Option<StationarityWitness>,
}

/// Decides whether 0 lies in the subdifferential of the robust loss at w.
pub fn subgradient_feasibility(
    spec: &RobustLossSpec,
    w: &Vector,
    tol: f64,
) -> Result<FeasibilityReport> {
    if w.len() != spec.dim() {
        return Err(Error::DimMismatch { what: "query point", expected: spec.dim(), got: w.len() });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParam { what: "tol", detail: "must be positive".into() });
    }
    let r = spec.residual(w);
    let wn = w.norm(Norm::L2);
    let eps = spec.epsilon();
    let n = spec.n();

    if wn <= ORIGIN_TOL {
        // Samples with r_i = 0 contribute nothing at the origin (their inner
        // max value is 0), so the set is X^T r + eps ||r||_1 * ball.
        let b = spec.x().tr_matvec(&r);
        let radius = eps * r.norm(Norm::L1);
        let b_norm = b.norm(Norm::L2);
        let residual = (b_norm - radius).max(0.0);
        let is_stationary = b_norm <= radius + tol;
        let witness = is_stationary.then(|| {
            let radial = if radius > 0.0 { b.scaled(-1.0 / radius) } else { Vector::zeros(w.len()) };
            let signs = Vector::from_fn(n, |i| if r[i] >= 0.0 { 1.0 } else { -1.0 });
            StationarityWitness { signs, radial }
        });
        return Ok(FeasibilityReport { is_stationary, residual, witness });
    }

    let tie = spec.tie_tolerance();
    let free: Vec<usize> = (0..n).filter(|&i| r[i].abs() <= tie).collect();
    let radial = w.scaled(1.0 / wn);

    // Fixed part of the subdifferential.
    let mut b = spec.x().tr_matvec(&r);
    let mut fixed_signs = Vector::zeros(n);
    for i in 0..n {
        if r[i].abs() > tie {
            fixed_signs[i] = if r[i] >= 0.0 { 1.0 } else { -1.0 };
        }
    }
    b.add_scaled(eps * wn, &spec.x().tr_matvec(&fixed_signs));
    b.add_scaled(eps * r.norm(Norm::L1) / wn + eps * eps * n as f64, w);

    let finish = |sigma: Option<&Vector>, residual: f64| -> FeasibilityReport {
        let is_stationary = residual <= tol;
        let witness = is_stationary.then(|| {
            let mut signs = fixed_signs.clone();
            if let Some(sigma) = sigma {
                for (k, &i) in free.iter().enumerate() {
                    signs[i] = sigma[k].clamp(-1.0, 1.0);
                }
            }
            StationarityWitness { signs, radial: radial.clone() }
        });
        FeasibilityReport { is_stationary, residual, witness }
    };

    if free.is_empty() {
        return Ok(finish(None, b.norm(Norm::L2)));
    }

    // Columns of A are the free samples' rows scaled by eps ||w||.
    let d = spec.dim();
    let mut a = Matrix::zeros(d, free.len());
    for (k, &i) in free.iter().enumerate() {
        for j in 0..d {
            a.set(j, k, eps * wn * spec.x().get(i, j));
        }
    }
    let target = b.scaled(-1.0);

    // Direct minimum-norm solve; accepted when it lands (close to) inside
    // the box, which settles both interpolating points and generic ties.
    let sigma = min_norm_least_squares(&a, &target)?;
    let direct_residual = a.matvec(&sigma).sub(&target).norm(Norm::L2);
    if direct_residual <= tol && sigma.iter().all(|v| v.abs() <= 1.0 + BOX_SLACK) {
        return Ok(finish(Some(&sigma), direct_residual));
    }

    // Projected accelerated gradient over the box.
    let lip = {
        let s = Svd::of(&a).sigma_max();
        (s * s).max(1e-300)
    };
    let clip = |v: &mut Vector| {
        for k in 0..v.len() {
            v[k] = v[k].clamp(-1.0, 1.0);
        }
    };
    let mut x_prev = sigma.clone();
    clip(&mut x_prev);
    let mut y = x_prev.clone();
    let mut t = 1.0_f64;
    let mut best_residual = a.matvec(&x_prev).sub(&target).norm(Norm::L2);
    let mut best_sigma = x_prev.clone();
    let mut converged = false;
    for _ in 0..MAX_PROJECTED_ITERS {
        let grad = a.tr_matvec(&a.matvec(&y).sub(&target));
        let mut x = y.clone();
        x.add_scaled(-1.0 / lip, &grad);
        clip(&mut x);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut y_next = x.clone();
        y_next.add_scaled((t - 1.0) / t_next, &x.sub(&x_prev));

        let res = a.matvec(&x).sub(&target).norm(Norm::L2);
        if res < best_residual {
            best_residual = res;
            best_sigma = x.clone();
        }
        // Fixed-point check on the projected gradient mapping at x.
        let g = a.tr_matvec(&a.matvec(&x).sub(&target));
        let mut step = x.clone();
        step.add_scaled(-1.0 / lip, &g);
        clip(&mut step);
        let movement = step.sub(&x).norm(Norm::L2);

        x_prev = x;
        y = y_next;
        t = t_next;
        if best_residual <= 0.1 * tol || movement <= 1e-14 * (1.0 + x_prev.norm(Norm::L2)) {
            converged = true;
            break;
        }
    }
    if !converged && best_residual > tol {
        return Err(Error::NoConvergence {
            what: "subdifferential feasibility solve",
            residual: best_residual,
        });
    }
    Ok(finish(Some(&best_sigma), best_residual))
}

/// Budget thresholds for the interpolating solution X^T alpha to be optimal:
/// the tabulated closed form (`printed`), the first-principles value
/// derived from the unique sign witness (`oracle`), and the class-imbalance
/// lower bound on the printed form.
#[derive(Debug, Clone, Copy)]
pub struct Theorem4Threshold {
    pub printed: f64,
    pub oracle: f64,
    pub sufficient_bound: f64,
}

impl Theorem4Threshold {
    pub fn matches_oracle(&self) -> bool {
        (self.printed - self.oracle).abs() <= 1e-9 * self.oracle.max(1.0)
    }
}

pub fn theorem4_threshold(n_plus: usize, n_minus: usize) -> Result<Theorem4Threshold> {
    if n_plus == 0 || n_minus == 0 {
        return Err(Error::InvalidParam {
            what: "class counts",
            detail: "both classes need at least one sample".into(),
        });
    }
    let np = n_plus as f64;
    let nm = n_minus as f64;
    let poly = 64.0 * np * np * nm * nm
        + 160.0 * np * np * nm
        + 75.0 * np * np
        + 32.0 * np * nm * nm
        + 60.0 * np * nm
        + 70.0 * np
        + 3.0 * nm * nm
        + 5.0 * nm;
    let den = (4.0 * nm * nm + 4.0 * np * nm + 5.0 * np + 5.0 * nm)
        .max(4.0 * np * np + 4.0 * np * nm + np + nm);
    let printed = poly.sqrt() / den;

    let alpha = alpha_coefficients(n_plus, n_minus)?;
    let w_norm = (np * alpha.alpha_plus - nm * alpha.alpha_minus).sqrt();
    let n = np + nm;
    let oracle = w_norm / (n * alpha.alpha_plus.max(alpha.alpha_minus.abs()));

    let c = np / nm;
    let sufficient_bound = (2.0 * c / (1.0 + c)).min(2.0 / (1.0 + c));
    Ok(Theorem4Threshold { printed, oracle, sufficient_bound })
}

/// Locates the budget at which stationarity of the interpolating solution
/// flips, by bisecting `subgradient_feasibility` over [lo, hi]. Independent
/// of the closed-form threshold; used to validate it.
pub fn bisect_interpolation_flip(
    prob: &SyntheticProblem,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<f64> {
    if !(0.0 < lo && lo < hi) {
        return Err(Error::InvalidParam {
            what: "bisection bracket",
            detail: "need 0 < lo < hi".into(),
        });
    }
    let w = crate::closed_form::min_norm_weight(prob.labels())?;
    let feasible_at = |eps: f64| -> Result<bool> {
        let spec = RobustLossSpec::for_problem(prob, eps)?;
        Ok(subgradient_feasibility(&spec, &w, DEFAULT_FEASIBILITY_TOL)?.is_stationary)
    };
    if !feasible_at(lo)? {
        return Err(Error::InvalidParam {
            what: "bisection bracket",
            detail: "lower end is already infeasible".into(),
        });
    }
    if feasible_at(hi)? {
        return Err(Error::InvalidParam {
            what: "bisection bracket",
            detail: "upper end is still feasible".into(),
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::min_norm_weight;
    use alloc::vec;

    const ORACLE_ONE_ONE: f64 = 1.157_370_369_777_758_9; // sqrt(434)/18

    fn one_one() -> SyntheticProblem {
        SyntheticProblem::generate(1, 1).unwrap()
    }

    #[test]
    fn query_structure_at_canonical_points() {
        let prob = one_one();
        let spec = RobustLossSpec::for_problem(&prob, 1.0).unwrap();
        let q = subdifferential_query(&spec, &Vector::zeros(spec.dim())).unwrap();
        assert!(q.origin_flag);
        assert!(q.free_indices.is_empty(), "labels are nonzero at the origin");
        let w = min_norm_weight(prob.labels()).unwrap();
        let q = subdifferential_query(&spec, &w).unwrap();
        assert!(!q.origin_flag);
        assert_eq!(q.free_indices, vec![0, 1], "interpolation ties every residual");
    }

    #[test]
    fn closed_form_witness_at_interpolating_point() {
        let prob = one_one();
        let eps = 0.5;
        let spec = RobustLossSpec::for_problem(&prob, eps).unwrap();
        let w = min_norm_weight(prob.labels()).unwrap();
        let report = subgradient_feasibility(&spec, &w, 1e-10).unwrap();
        assert!(report.is_stationary, "below the threshold the interpolant is optimal");
        assert!(report.residual <= 1e-10);
        let witness = report.witness.unwrap();
        // Unique sign choice: s_i = -eps n alpha_class(i) / ||w||.
        let alpha = alpha_coefficients(1, 1).unwrap();
        let wn = w.norm(Norm::L2);
        let n = spec.n() as f64;
        for i in 0..spec.n() {
            let a = if prob.labels()[i] > 0.0 { alpha.alpha_plus } else { alpha.alpha_minus };
            let expect = -eps * n * a / wn;
            assert!(
                (witness.signs[i] - expect).abs() < 1e-8,
                "sign {i}: {} vs {expect}",
                witness.signs[i]
            );
            assert!(witness.signs[i].abs() <= 1.0 + 1e-9);
        }
        // Radial part is w / ||w||.
        assert!(witness.radial.sub(&w.scaled(1.0 / wn)).norm(Norm::L2) < 1e-12);
    }

    #[test]
    fn feasibility_flips_just_above_the_threshold() {
        let prob = one_one();
        let w = min_norm_weight(prob.labels()).unwrap();
        for (eps, expect) in [
            (ORACLE_ONE_ONE * 0.999, true),
            (ORACLE_ONE_ONE * 1.01, false),
            (0.1, true),
            (2.0, false),
        ] {
            let spec = RobustLossSpec::for_problem(&prob, eps).unwrap();
            let got = subgradient_feasibility(&spec, &w, 1e-10).unwrap();
            assert_eq!(got.is_stationary, expect, "eps = {eps}");
            if !expect {
                assert!(got.residual > 1e-10, "infeasible report needs positive residual");
                assert!(got.witness.is_none());
            }
        }
    }

    #[test]
    fn threshold_hand_values() {
        let t = theorem4_threshold(1, 1).unwrap();
        assert!((t.oracle - 434.0_f64.sqrt() / 18.0).abs() < 1e-14);
        assert!((t.oracle - ORACLE_ONE_ONE).abs() < 1e-12);
        assert!((t.printed - 469.0_f64.sqrt() / 18.0).abs() < 1e-14);
        assert!((t.sufficient_bound - 1.0).abs() < 1e-15);
        assert!(!t.matches_oracle(), "the tabulated polynomial is known to differ");

        let t3 = theorem4_threshold(60, 20).unwrap();
        assert!((t3.sufficient_bound - 0.5).abs() < 1e-15);
        assert!((t3.oracle - 0.531).abs() < 1e-3);
        assert!((t3.oracle - t3.sufficient_bound).abs() < 0.05);
        let t_inv = theorem4_threshold(20, 60).unwrap();
        assert!((t_inv.sufficient_bound - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sufficient_bound_stays_below_oracle() {
        for n_plus in 1..=8 {
            for n_minus in 1..=8 {
                let t = theorem4_threshold(n_plus, n_minus).unwrap();
                assert!(
                    t.sufficient_bound <= t.oracle + 1e-12,
                    "bound {} above oracle {} at ({n_plus},{n_minus})",
                    t.sufficient_bound,
                    t.oracle
                );
            }
        }
    }

    #[test]
    fn bisection_recovers_the_oracle_threshold() {
        let prob = one_one();
        let flip = bisect_interpolation_flip(&prob, 0.5, 2.0, 60).unwrap();
        let oracle = theorem4_threshold(1, 1).unwrap().oracle;
        assert!(
            (flip - oracle).abs() <= 1e-3 * oracle,
            "bisection {flip} vs closed form {oracle}"
        );
    }

    #[test]
    fn origin_stationarity_boundary() {
        // ||X^T y||_2 = sqrt(10), ||y||_1 = 2: the origin is stationary
        // exactly when eps >= sqrt(10)/2.
        let prob = one_one();
        let w0 = Vector::zeros(3 + 5 * prob.n());
        let critical = 10.0_f64.sqrt() / 2.0;
        let spec = RobustLossSpec::for_problem(&prob, 1.0).unwrap();
        let report = subgradient_feasibility(&spec, &w0, 1e-10).unwrap();
        assert!(!report.is_stationary);
        assert!((report.residual - (10.0_f64.sqrt() - 2.0)).abs() < 1e-12);

        let spec = RobustLossSpec::for_problem(&prob, critical * 1.001).unwrap();
        let report = subgradient_feasibility(&spec, &w0, 1e-10).unwrap();
        assert!(report.is_stationary, "large budgets kill the signal: w = 0 is optimal");
        let witness = report.witness.unwrap();
        assert!(witness.radial.norm(Norm::L2) <= 1.0 + 1e-9);
        // The witness cancels the data term: X^T r + eps ||r||_1 g = 0.
        let mut cancel = spec.x().tr_matvec(&spec.residual(&w0));
        cancel.add_scaled(
            spec.epsilon() * spec.residual(&w0).norm(Norm::L1),
            &witness.radial,
        );
        assert!(cancel.norm(Norm::L2) < 1e-9);
    }

    #[test]
    fn partial_ties_solve_the_one_dimensional_box_exactly() {
        // w = x_0 / 4 zeroes the first residual of the (2, 1) problem and
        // leaves the other two pinned, so the box program is 1-D with a
        // closed-form answer to compare against.
        let prob = SyntheticProblem::generate(2, 1).unwrap();
        let eps = 0.3;
        let spec = RobustLossSpec::for_problem(&prob, eps).unwrap();
        let w = prob.x().row_vector(0).scaled(0.25);
        let q = subdifferential_query(&spec, &w).unwrap();
        assert_eq!(q.free_indices, vec![0]);

        let report = subgradient_feasibility(&spec, &w, 1e-10).unwrap();
        assert!(!report.is_stationary);

        // Rebuild b and the single column by hand and minimize over [-1, 1].
        let r = spec.residual(&w);
        let wn = w.norm(Norm::L2);
        let mut fixed = Vector::zeros(3);
        for i in 1..3 {
            fixed[i] = if r[i] >= 0.0 { 1.0 } else { -1.0 };
        }
        let mut b = spec.x().tr_matvec(&r);
        b.add_scaled(eps * wn, &spec.x().tr_matvec(&fixed));
        b.add_scaled(eps * r.norm(Norm::L1) / wn + eps * eps * 3.0, &w);
        let col = spec.x().row_vector(0).scaled(eps * wn);
        let sigma = (-col.dot(&b) / col.dot(&col)).clamp(-1.0, 1.0);
        let mut best = b.clone();
        best.add_scaled(sigma, &col);
        let expect = best.norm(Norm::L2);
        assert!(
            (report.residual - expect).abs() <= 1e-9 * expect.max(1.0),
            "solver residual {} vs closed form {expect}",
            report.residual
        );
    }
}
