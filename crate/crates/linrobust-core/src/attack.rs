//! PGD attacks on linear scorers, per-sample multi-attack aggregation,
//! robust-accuracy curves, and the normalized area-under-curve metric.
//!
//! The attack objective is the classification margin y * <w, x'>: descending
//! it always walks the score toward the decision boundary. (Ascending the
//! squared regression error does not — for a point whose score sits beyond
//! its label the ascent direction points *away* from the boundary — so the
//! margin objective is what makes PGD comparable to the exact flip radius.)
//! For a linear scorer each step direction is constant, which is exactly why
//! the margin oracle can adjudicate PGD's success per sample.

#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{Norm, Vector};
use crate::problem::TestPoint;
use crate::radii::margin_radius;

const SEED_GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub norm: Norm,
    pub epsilon: f64,
    pub steps: usize,
    pub step_size: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl AttackConfig {
    /// 100 steps at the classic 2.5 eps / steps schedule, one restart.
    pub fn standard(norm: Norm, epsilon: f64) -> Self {
        let steps = 100;
        AttackConfig {
            norm,
            epsilon,
            steps,
            step_size: (2.5 * epsilon / steps as f64).max(1e-12),
            restarts: 1,
            seed: 0,
        }
    }

    /// Same attack with a decorrelated stream, for per-sample seeding.
    pub fn with_seed_offset(&self, offset: u64) -> Self {
        let mut c = self.clone();
        c.seed = self.seed ^ offset.wrapping_mul(SEED_GOLDEN).rotate_left(17);
        c
    }

    fn validate(&self) -> Result<()> {
        if self.norm == Norm::L1 {
            return Err(Error::InvalidParam {
                what: "attack norm",
                detail: String::from("only L2 and Linf budgets are supported"),
            });
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParam {
                what: "attack epsilon",
                detail: String::from("must be finite and nonnegative"),
            });
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParam {
                what: "attack step_size",
                detail: String::from("must be positive"),
            });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParam {
                what: "attack restarts",
                detail: String::from("need at least one restart"),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PgdOutcome {
    pub success: bool,
    pub adversarial_x: Vector,
}

/// Predicted label with the sign(0) = +1 convention.
fn predicts_wrong(score: f64, y: f64) -> bool {
    let predicted = if score >= 0.0 { 1.0 } else { -1.0 };
    predicted != y
}

/// Uniform draw from the radius-eps ball centered at x.
fn random_start(x: &Vector, norm: Norm, eps: f64, rng: &mut ChaCha8Rng) -> Vector {
    let d = x.len();
    match norm {
        Norm::Linf => Vector::from_fn(d, |j| x[j] + rng.random_range(-eps..=eps)),
        _ => {
            // Gaussian direction normalized, radius scaled by U^(1/d).
            let mut g = Vector::from_fn(d, |_| {
                let u1: f64 = rng.random_range(1e-12..1.0);
                let u2: f64 = rng.random_range(0.0..core::f64::consts::TAU);
                (-2.0 * u1.ln()).sqrt() * u2.cos()
            });
            let gn = g.norm(Norm::L2).max(1e-300);
            let radius = eps * rng.random_range(0.0..1.0_f64).powf(1.0 / d as f64);
            g.scale(radius / gn);
            g.add(x)
        }
    }
}

/// Project x' back into the eps-ball around x, exactly per norm.
fn project(x_adv: &mut Vector, x: &Vector, norm: Norm, eps: f64) {
    match norm {
        Norm::Linf => {
            for j in 0..x.len() {
                x_adv[j] = x_adv[j].clamp(x[j] - eps, x[j] + eps);
            }
        }
        _ => {
            let delta = x_adv.sub(x);
            let dn = delta.norm(Norm::L2);
            if dn > eps {
                let mut back = x.clone();
                back.add_scaled(eps / dn, &delta);
                *x_adv = back;
            }
        }
    }
}

/// Margin-descent PGD. Restart 0 starts from the clean point; later restarts
/// start uniformly inside the budget ball. Success means the perturbed point
/// is classified differently from y.
pub fn pgd_attack(w: &Vector, x: &Vector, y: f64, cfg: &AttackConfig) -> Result<PgdOutcome> {
    cfg.validate()?;
    if w.len() != x.len() {
        return Err(Error::DimMismatch { what: "attack input", expected: w.len(), got: x.len() });
    }
    if y != 1.0 && y != -1.0 {
        return Err(Error::InvalidParam {
            what: "attack label",
            detail: String::from("must be +1 or -1"),
        });
    }
    let clean_score = w.dot(x);
    if cfg.epsilon == 0.0 || cfg.steps == 0 {
        return Ok(PgdOutcome { success: predicts_wrong(clean_score, y), adversarial_x: x.clone() });
    }

    // Descent direction of y * <w, x'> is constant in x'.
    let dir = w.scaled(-y);
    let mut best = x.clone();
    let mut best_margin = y * clean_score;
    for restart in 0..cfg.restarts {
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add((restart as u64).wrapping_mul(SEED_GOLDEN)));
        let mut x_adv = if restart == 0 {
            x.clone()
        } else {
            random_start(x, cfg.norm, cfg.epsilon, &mut rng)
        };
        project(&mut x_adv, x, cfg.norm, cfg.epsilon);
        for _ in 0..cfg.steps {
            match cfg.norm {
                Norm::Linf => {
                    for j in 0..x_adv.len() {
                        let s = if dir[j] > 0.0 {
                            1.0
                        } else if dir[j] < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        x_adv[j] += cfg.step_size * s;
                    }
                }
                _ => {
                    let dn = dir.norm(Norm::L2);
                    if dn > 0.0 {
                        x_adv.add_scaled(cfg.step_size / dn, &dir);
                    }
                }
            }
            project(&mut x_adv, x, cfg.norm, cfg.epsilon);
            let margin = y * w.dot(&x_adv);
            if margin < best_margin {
                best_margin = margin;
                best = x_adv.clone();
            }
            if predicts_wrong(w.dot(&x_adv), y) {
                return Ok(PgdOutcome { success: true, adversarial_x: x_adv });
            }
        }
    }
    Ok(PgdOutcome { success: predicts_wrong(w.dot(&best), y), adversarial_x: best })
}

/// Fraction of samples that are naturally correct and survive every attack.
/// Attacks are re-seeded per sample so results do not depend on evaluation
/// order. An empty suite measures natural accuracy.
pub fn robust_accuracy(w: &Vector, testset: &[TestPoint], cfgs: &[AttackConfig]) -> Result<f64> {
    if testset.is_empty() {
        return Err(Error::Empty { what: "test set" });
    }
    if let Some(first) = cfgs.first() {
        for c in cfgs {
            if c.norm != first.norm || c.epsilon != first.epsilon {
                return Err(Error::InvalidParam {
                    what: "attack suite",
                    detail: String::from("all configs must share norm and epsilon"),
                });
            }
        }
    }
    let mut robust = 0usize;
    for (i, point) in testset.iter().enumerate() {
        if predicts_wrong(w.dot(&point.x), point.y) {
            continue;
        }
        let mut broken = false;
        for cfg in cfgs {
            let outcome = pgd_attack(w, &point.x, point.y, &cfg.with_seed_offset(i as u64))?;
            if outcome.success {
                broken = true;
                break;
            }
        }
        if !broken {
            robust += 1;
        }
    }
    Ok(robust as f64 / testset.len() as f64)
}

/// Trapezoidal NAUC of sampled (eps, accuracy) points, normalized by eps_max.
pub fn nauc(samples: &[(f64, f64)], eps_max: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidParam {
            what: "curve samples",
            detail: String::from("need at least two points"),
        });
    }
    if !(eps_max > 0.0 && eps_max.is_finite()) {
        return Err(Error::InvalidParam {
            what: "eps_max",
            detail: String::from("must be positive"),
        });
    }
    for pair in samples.windows(2) {
        if pair[1].0 < pair[0].0 {
            return Err(Error::InvalidParam {
                what: "curve samples",
                detail: String::from("eps values must be sorted"),
            });
        }
    }
    for &(e, a) in samples {
        if !(0.0..=eps_max + 1e-12).contains(&e) || !(-1e-12..=1.0 + 1e-12).contains(&a) {
            return Err(Error::InvalidParam {
                what: "curve samples",
                detail: String::from("eps outside [0, eps_max] or accuracy outside [0, 1]"),
            });
        }
    }
    let mut area = 0.0;
    for pair in samples.windows(2) {
        area += (pair[1].0 - pair[0].0) * 0.5 * (pair[0].1 + pair[1].1);
    }
    Ok(area / eps_max)
}

/// Attack settings shared across a curve sweep. Each grid point runs one
/// attack per step-size factor (an aggregated per-sample suite), all at
/// `steps` iterations with `restarts` starts.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub steps: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Multipliers on the standard 2.5 eps / steps step size.
    pub step_factors: Vec<f64>,
}

impl SweepSettings {
    pub fn standard() -> Self {
        SweepSettings { steps: 100, restarts: 1, seed: 0, step_factors: alloc::vec![1.0, 0.25] }
    }
}

#[derive(Debug, Clone)]
pub struct RobustnessCurve {
    pub norm: Norm,
    pub eps_grid: Vec<f64>,
    /// PGD-measured robust accuracy per grid point.
    pub accuracy: Vec<f64>,
    /// Margin-oracle step curve sampled on the same grid.
    pub accuracy_exact: Vec<f64>,
    /// Trapezoid on the PGD curve.
    pub nauc: f64,
    /// Exact integral of the oracle step curve: the grid plays no part.
    pub nauc_exact: f64,
}

/// Exact flip radius of one test point, or None when the sample is already
/// misclassified (it contributes nothing at any budget).
fn exact_radius(w: &Vector, point: &TestPoint, norm: Norm) -> Result<Option<f64>> {
    if predicts_wrong(w.dot(&point.x), point.y) {
        return Ok(None);
    }
    match margin_radius(w, &point.x, norm) {
        Ok(r) => Ok(Some(r)),
        // On-boundary scores count as predicted +1; a correct prediction
        // there (y = +1) flips under any positive budget.
        Err(Error::OnBoundary) => Ok(Some(0.0)),
        Err(e) => Err(e),
    }
}

/// Robust-accuracy curve over an increasing eps grid, with the exact
/// margin-oracle curve and both NAUC values attached.
pub fn sweep_curve(
    w: &Vector,
    testset: &[TestPoint],
    norm: Norm,
    eps_grid: &[f64],
    settings: &SweepSettings,
) -> Result<RobustnessCurve> {
    if testset.is_empty() {
        return Err(Error::Empty { what: "test set" });
    }
    if eps_grid.len() < 2 {
        return Err(Error::InvalidParam {
            what: "eps grid",
            detail: String::from("need at least two points"),
        });
    }
    for pair in eps_grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidParam {
                what: "eps grid",
                detail: String::from("must be strictly increasing"),
            });
        }
    }
    if eps_grid[0] < 0.0 {
        return Err(Error::InvalidParam {
            what: "eps grid",
            detail: String::from("budgets must be nonnegative"),
        });
    }
    let eps_max = *eps_grid.last().expect("nonempty grid");

    let radii: Vec<Option<f64>> =
        testset.iter().map(|p| exact_radius(w, p, norm)).collect::<Result<_>>()?;

    let mut accuracy = Vec::with_capacity(eps_grid.len());
    let mut accuracy_exact = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let cfgs: Vec<AttackConfig> = if eps == 0.0 {
            Vec::new()
        } else {
            settings
                .step_factors
                .iter()
                .enumerate()
                .map(|(k, &f)| AttackConfig {
                    norm,
                    epsilon: eps,
                    steps: settings.steps,
                    step_size: (f * 2.5 * eps / settings.steps as f64).max(1e-12),
                    restarts: settings.restarts,
                    seed: settings.seed.wrapping_add(k as u64),
                })
                .collect()
        };
        accuracy.push(robust_accuracy(w, testset, &cfgs)?);

        let surviving = radii
            .iter()
            .zip(testset)
            .filter(|(r, p)| match r {
                // At a budget exactly equal to the radius the score reaches
                // zero, which still reads as +1: only y = -1 flips there.
                Some(r) => eps < *r || (eps == *r && p.y > 0.0),
                None => false,
            })
            .count();
        accuracy_exact.push(surviving as f64 / testset.len() as f64);
    }

    let samples: Vec<(f64, f64)> =
        eps_grid.iter().copied().zip(accuracy.iter().copied()).collect();
    let nauc_pgd = nauc(&samples, eps_max)?;
    let nauc_exact = radii
        .iter()
        .map(|r| match r {
            Some(r) => r.min(eps_max) / eps_max,
            None => 0.0,
        })
        .sum::<f64>()
        / testset.len() as f64;

    Ok(RobustnessCurve {
        norm,
        eps_grid: eps_grid.to_vec(),
        accuracy,
        accuracy_exact,
        nauc: nauc_pgd,
        nauc_exact,
    })
}

/// Uniform grid of `points` budgets over [0, eps_max].
pub fn uniform_grid(eps_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(eps_max > 0.0 && eps_max.is_finite()) {
        return Err(Error::InvalidParam {
            what: "eps grid",
            detail: String::from("need eps_max > 0 and at least two points"),
        });
    }
    Ok((0..points).map(|k| eps_max * k as f64 / (points - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{adaptive_weight, label_coordinate_weight, min_norm_weight};
    use crate::problem::{canonical_test_input, SyntheticProblem};
    use alloc::vec;

    fn two_point_testset(n: usize) -> Vec<TestPoint> {
        vec![
            TestPoint { x: canonical_test_input(n, 1.0).unwrap(), y: 1.0 },
            TestPoint { x: canonical_test_input(n, -1.0).unwrap(), y: -1.0 },
        ]
    }

    #[test]
    fn budget_is_never_exceeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for norm in [Norm::L2, Norm::Linf] {
            for _ in 0..20 {
                let d = rng.random_range(2..10);
                let w = Vector::from_fn(d, |_| rng.random_range(-2.0..2.0));
                let x = Vector::from_fn(d, |_| rng.random_range(-2.0..2.0));
                let eps = rng.random_range(0.01..1.5);
                let mut cfg = AttackConfig::standard(norm, eps);
                cfg.restarts = 3;
                cfg.seed = rng.random();
                let out = pgd_attack(&w, &x, 1.0, &cfg).unwrap();
                let dist = out.adversarial_x.sub(&x).norm(norm);
                assert!(dist <= eps + 1e-9, "{norm:?}: {dist} > {eps}");
            }
        }
    }

    #[test]
    fn pgd_brackets_the_exact_radius() {
        let prob = SyntheticProblem::generate(1, 1).unwrap();
        let w = min_norm_weight(prob.labels()).unwrap();
        for norm in [Norm::L2, Norm::Linf] {
            for point in two_point_testset(prob.n()) {
                let r = margin_radius(&w, &point.x, norm).unwrap();
                let over = pgd_attack(&w, &point.x, point.y, &AttackConfig::standard(norm, 1.05 * r))
                    .unwrap();
                assert!(over.success, "{norm:?} y={} should break above the radius", point.y);
                let under =
                    pgd_attack(&w, &point.x, point.y, &AttackConfig::standard(norm, 0.95 * r))
                        .unwrap();
                assert!(!under.success, "{norm:?} y={} must hold below the radius", point.y);
            }
        }
    }

    #[test]
    fn zero_budget_reports_natural_classification() {
        let w = label_coordinate_weight(8).unwrap();
        let x = canonical_test_input(1, 1.0).unwrap();
        let cfg = AttackConfig::standard(Norm::L2, 0.0);
        assert!(!pgd_attack(&w, &x, 1.0, &cfg).unwrap().success);
        // Flipping the model misclassifies the clean point already.
        assert!(pgd_attack(&w.scaled(-1.0), &x, 1.0, &cfg).unwrap().success);
    }

    #[test]
    fn attacks_are_deterministic_under_a_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = Vector::from_fn(6, |_| rng.random_range(-1.0..1.0));
        let x = Vector::from_fn(6, |_| rng.random_range(-1.0..1.0));
        let mut cfg = AttackConfig::standard(Norm::L2, 0.4);
        cfg.restarts = 4;
        cfg.seed = 99;
        let a = pgd_attack(&w, &x, 1.0, &cfg).unwrap();
        let b = pgd_attack(&w, &x, 1.0, &cfg).unwrap();
        assert_eq!(a.success, b.success);
        assert!(a.adversarial_x.sub(&b.adversarial_x).norm(Norm::L2) == 0.0);
    }

    #[test]
    fn robust_accuracy_aggregates_per_sample() {
        let prob = SyntheticProblem::generate(2, 2).unwrap();
        let w = min_norm_weight(prob.labels()).unwrap();
        let testset = two_point_testset(prob.n());
        // Empty suite: natural accuracy, here perfect.
        assert_eq!(robust_accuracy(&w, &testset, &[]).unwrap(), 1.0);
        // A budget above one class's radius but below the other's.
        let r_plus = margin_radius(&w, &testset[0].x, Norm::L2).unwrap();
        let r_minus = margin_radius(&w, &testset[1].x, Norm::L2).unwrap();
        let eps = 0.5 * (r_plus.min(r_minus) + r_plus.max(r_minus));
        let cfg = AttackConfig::standard(Norm::L2, eps);
        let acc = robust_accuracy(&w, &testset, &[cfg.clone()]).unwrap();
        assert_eq!(acc, 0.5);
        // Adding attacks can only remove robustness.
        let mut stronger = cfg.clone();
        stronger.step_size *= 0.25;
        let acc2 = robust_accuracy(&w, &testset, &[cfg, stronger]).unwrap();
        assert!(acc2 <= acc);
        assert!(robust_accuracy(&w, &[], &[]).is_err());
    }

    #[test]
    fn nauc_hand_values() {
        let flat: Vec<(f64, f64)> = (0..=10).map(|k| (k as f64 / 10.0, 1.0)).collect();
        assert!((nauc(&flat, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let ramp: Vec<(f64, f64)> = (0..=10).map(|k| {
            let e = k as f64 / 10.0;
            (e, 1.0 - e)
        })
        .collect();
        assert!((nauc(&ramp, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(nauc(&[(0.0, 1.0)], 1.0).is_err());
        assert!(nauc(&[(0.5, 1.0), (0.1, 1.0)], 1.0).is_err(), "unsorted grid must fail");
    }

    #[test]
    fn ideal_weights_trace_a_unit_step_curve() {
        let w = label_coordinate_weight(13).unwrap();
        let testset = two_point_testset(2);
        let grid = uniform_grid(2.0, 101).unwrap();
        for norm in [Norm::L2, Norm::Linf] {
            let curve = sweep_curve(&w, &testset, norm, &grid, &SweepSettings::standard()).unwrap();
            assert!((curve.nauc_exact - 0.5).abs() < 1e-6, "{norm:?} exact nauc {}", curve.nauc_exact);
            for (k, &eps) in grid.iter().enumerate() {
                let expect = if eps < 1.0 {
                    1.0
                } else if eps == 1.0 {
                    0.5
                } else {
                    0.0
                };
                assert_eq!(curve.accuracy_exact[k], expect, "{norm:?} exact curve at {eps}");
                // PGD curve matches except within 1% of the radius 1.
                if (eps - 1.0).abs() > 0.01 {
                    assert_eq!(curve.accuracy[k], expect, "{norm:?} pgd curve at {eps}");
                }
            }
        }
    }

    #[test]
    fn min_norm_weights_beat_adaptive_weights_on_nauc() {
        let prob = SyntheticProblem::generate(20, 20).unwrap();
        let w_sgd = min_norm_weight(prob.labels()).unwrap();
        let w_ada = adaptive_weight(prob.labels(), 0.25).unwrap();
        let testset = two_point_testset(prob.n());
        for norm in [Norm::L2, Norm::Linf] {
            let r_max = testset
                .iter()
                .map(|p| margin_radius(&w_sgd, &p.x, norm).unwrap())
                .fold(0.0_f64, f64::max);
            let grid = uniform_grid(2.0 * r_max, 41).unwrap();
            // Exact curves only: the comparison is about the oracle areas.
            let fast = SweepSettings { steps: 10, restarts: 1, seed: 0, step_factors: vec![1.0] };
            let c_sgd = sweep_curve(&w_sgd, &testset, norm, &grid, &fast).unwrap();
            let c_ada = sweep_curve(&w_ada, &testset, norm, &grid, &fast).unwrap();
            assert!(
                c_sgd.nauc_exact > c_ada.nauc_exact,
                "{norm:?}: {} vs {}",
                c_sgd.nauc_exact,
                c_ada.nauc_exact
            );
        }
    }

    #[test]
    fn config_validation() {
        assert!(pgd_attack(
            &Vector::new(vec![1.0]).unwrap(),
            &Vector::new(vec![1.0]).unwrap(),
            1.0,
            &AttackConfig::standard(Norm::L1, 0.5),
        )
        .is_err());
        let mut cfg = AttackConfig::standard(Norm::L2, 0.5);
        cfg.restarts = 0;
        assert!(pgd_attack(
            &Vector::new(vec![1.0]).unwrap(),
            &Vector::new(vec![1.0]).unwrap(),
            1.0,
            &cfg,
        )
        .is_err());
        assert!(pgd_attack(
            &Vector::new(vec![1.0]).unwrap(),
            &Vector::new(vec![1.0]).unwrap(),
            0.5,
            &AttackConfig::standard(Norm::L2, 0.5),
        )
        .is_err());
    }
}
