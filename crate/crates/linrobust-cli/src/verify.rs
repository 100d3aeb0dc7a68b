//! Self-verification suites: oracle-arbitrated checks over the closed
//! forms, margin tables, loss geometry, optimizer limits, and the
//! evaluation harness. Printed-formula mismatches that the margin oracle
//! adjudicates are reported as documented discrepancies, not failures.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linrobust_core::attack::{sweep_curve, uniform_grid, AttackConfig, SweepSettings};
use linrobust_core::attack::pgd_attack;
use linrobust_core::closed_form::{
    adaptive_weight, alpha_coefficients, label_coordinate_weight, min_norm_weight, SolutionKind,
};
use linrobust_core::convexity::{classify_convexity, zero_curvature_directions};
use linrobust_core::landscape::{demo_spec, landscape_grid};
use linrobust_core::linalg::{Cholesky, Matrix, Norm, Vector};
use linrobust_core::optim::{train_adversarial, train_natural, OptimizerConfig, OptimizerKind};
use linrobust_core::problem::{canonical_test_input, SyntheticProblem, TestPoint};
use linrobust_core::radii::{
    bisection_attack_radius, margin_radius, oracle_radii, theorem1_radii, theorem2_radii,
};
use linrobust_core::robust_loss::RobustLossSpec;
use linrobust_core::stationarity::{bisect_interpolation_flip, theorem4_threshold};

use crate::emit::{g17, json_escape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    DocumentedDiscrepancy,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::DocumentedDiscrepancy => "documented_discrepancy",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub criterion: u8,
    pub status: Status,
    pub detail: String,
}

fn check(criterion: u8, name: &str, ok: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        criterion,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn documented(criterion: u8, name: &str, detail: String) -> Check {
    Check { name: name.to_string(), criterion, status: Status::DocumentedDiscrepancy, detail }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn to_json(&self) -> String {
        let mut body = String::new();
        for (i, c) in self.checks.iter().enumerate() {
            let sep = if i + 1 == self.checks.len() { "" } else { "," };
            let _ = writeln!(
                body,
                "    {{\"name\": \"{}\", \"criterion\": {}, \"status\": \"{}\", \"detail\": \"{}\"}}{}",
                json_escape(&c.name),
                c.criterion,
                c.status.label(),
                json_escape(&c.detail),
                sep,
            );
        }
        let passed = self.checks.iter().filter(|c| c.status == Status::Pass).count();
        let discrepancies =
            self.checks.iter().filter(|c| c.status == Status::DocumentedDiscrepancy).count();
        format!(
            "{{\n  \"suite\": \"{}\",\n  \"checks\": [\n{}  ],\n  \"passed\": {},\n  \"failed\": {},\n  \"documented_discrepancies\": {}\n}}\n",
            json_escape(&self.suite),
            body,
            passed,
            self.failed(),
            discrepancies,
        )
    }
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let checks = match name {
        "radii" => suite_radii(),
        "geometry" => suite_geometry(),
        "optimizers" => suite_optimizers(),
        "theorem4" => suite_theorem4(),
        "all" => {
            let mut all = suite_radii();
            all.extend(suite_geometry());
            all.extend(suite_optimizers());
            all.extend(suite_theorem4());
            all
        }
        other => bail!("unknown suite '{other}' (expected radii, geometry, optimizers, theorem4, or all)"),
    };
    Ok(SuiteReport { suite: name.to_string(), checks })
}

// ---------------------------------------------------------------- radii --

/// Closed-form coefficients, kernel table, printed-vs-oracle margin tables,
/// asymptotic limits, and the attack harness against the margin oracle.
pub fn suite_radii() -> Vec<Check> {
    let mut out = Vec::new();

    // Coefficient pair vs a dense solve of the kernel system, exact kernel
    // entries against the 4/8/3/1 table.
    let mut max_alpha_dev = 0.0_f64;
    let mut kernel_exact = true;
    for n_plus in 1..=20 {
        for n_minus in 1..=20 {
            let prob = SyntheticProblem::generate(n_plus, n_minus).expect("valid counts");
            let alpha = alpha_coefficients(n_plus, n_minus).expect("valid counts");
            let k = prob.kernel_matrix();
            for i in 0..prob.n() {
                for j in 0..prob.n() {
                    let li = prob.labels()[i];
                    let lj = prob.labels()[j];
                    let expect = if i == j {
                        if li > 0.0 {
                            4.0
                        } else {
                            8.0
                        }
                    } else if li == lj {
                        3.0
                    } else {
                        1.0
                    };
                    if k.get(i, j) != expect {
                        kernel_exact = false;
                    }
                }
            }
            let solved = Cholesky::factor(&k, 1e-12).expect("kernel is PD").solve(&prob.label_vector());
            for (i, &label) in prob.labels().iter().enumerate() {
                let expect = if label > 0.0 { alpha.alpha_plus } else { alpha.alpha_minus };
                max_alpha_dev = max_alpha_dev.max((solved[i] - expect).abs());
            }
        }
    }
    out.push(check(
        1,
        "alpha_closed_form_matches_dense_solve",
        max_alpha_dev <= 1e-10,
        format!("max deviation {} over the [1,20]^2 grid", g17(max_alpha_dev)),
    ));
    // The kernel is also the row Gram matrix of the materialized data.
    let probe = SyntheticProblem::generate(2, 3).expect("valid counts");
    let gram_exact = {
        let k = probe.kernel_matrix();
        let mut ok = true;
        for i in 0..probe.n() {
            for j in 0..probe.n() {
                let dot = probe.x().row_vector(i).dot(&probe.x().row_vector(j));
                if dot != k.get(i, j) {
                    ok = false;
                }
            }
        }
        ok
    };
    out.push(check(
        1,
        "kernel_matches_entry_table_exactly",
        kernel_exact && gram_exact,
        "entries equal 4/8 on the diagonal and 3/1 off it, and equal X X^T".to_string(),
    ));

    // Printed max-norm radii against the margin oracle on the same grid.
    let mut max_linf_dev = 0.0_f64;
    let mut l2_gap_lo = f64::INFINITY;
    let mut l2_gap_hi = 0.0_f64;
    let mut l2_oracle_dev = 0.0_f64;
    for n_plus in 1..=20usize {
        for n_minus in 1..=20usize {
            let t1 = theorem1_radii(n_plus, n_minus).expect("valid counts");
            let ada_linf =
                oracle_radii(n_plus, n_minus, SolutionKind::Adaptive, 1.0, Norm::Linf).unwrap();
            max_linf_dev = max_linf_dev.max((t1.linf - ada_linf).abs());
            let ada_l2 =
                oracle_radii(n_plus, n_minus, SolutionKind::Adaptive, 1.0, Norm::L2).unwrap();
            let closed = 3.0 / ((3 + n_plus + 5 * n_minus) as f64).sqrt();
            l2_oracle_dev = l2_oracle_dev.max((ada_l2 - closed).abs());
            l2_gap_lo = l2_gap_lo.min((t1.l2 - ada_l2).abs() / ada_l2);
            l2_gap_hi = l2_gap_hi.max((t1.l2 - ada_l2).abs() / ada_l2);
            for y_test in [1.0, -1.0] {
                let t2 = theorem2_radii(n_plus, n_minus, y_test).expect("valid counts");
                let sgd_linf =
                    oracle_radii(n_plus, n_minus, SolutionKind::MinNorm, y_test, Norm::Linf)
                        .unwrap();
                if 5 * n_plus > n_minus {
                    max_linf_dev = max_linf_dev.max((t2.linf - sgd_linf).abs());
                }
                let sgd_l2 =
                    oracle_radii(n_plus, n_minus, SolutionKind::MinNorm, y_test, Norm::L2).unwrap();
                l2_gap_lo = l2_gap_lo.min((t2.l2 - sgd_l2).abs() / sgd_l2);
                l2_gap_hi = l2_gap_hi.max((t2.l2 - sgd_l2).abs() / sgd_l2);
            }
        }
    }
    out.push(check(
        2,
        "linf_printed_matches_oracle",
        max_linf_dev <= 1e-9,
        format!("max deviation {} (min-norm rows restricted to 5 n+ > n-)", g17(max_linf_dev)),
    ));
    let sgd_11 = oracle_radii(1, 1, SolutionKind::MinNorm, 1.0, Norm::L2).unwrap();
    out.push(check(
        2,
        "l2_oracle_closed_forms",
        l2_oracle_dev <= 1e-12 && (sgd_11 - 22.0 / 434.0_f64.sqrt()).abs() <= 1e-12,
        format!(
            "adaptive oracle is 3/sqrt(3+n+5m) (max dev {}), min-norm oracle at (1,1) is 22/sqrt(434)",
            g17(l2_oracle_dev)
        ),
    ));
    out.push(documented(
        2,
        "l2_printed_formulas_disagree_with_oracle",
        format!(
            "both tabulated L2 formulas differ from the margin oracle everywhere on the grid (relative gap between {} and {}); the oracle values are authoritative",
            g17(l2_gap_lo),
            g17(l2_gap_hi)
        ),
    ));

    // Oracle vs an independent bisection along the optimal attack direction.
    let mut max_bisect_dev = 0.0_f64;
    for n_plus in [1usize, 2, 3, 7, 20] {
        for n_minus in [1usize, 2, 5, 20] {
            let prob = SyntheticProblem::generate(n_plus, n_minus).unwrap();
            let w_sgd = min_norm_weight(prob.labels()).unwrap();
            let w_ada = adaptive_weight(prob.labels(), 1.0).unwrap();
            for norm in [Norm::L2, Norm::Linf] {
                for (w, y) in [(&w_sgd, 1.0), (&w_sgd, -1.0), (&w_ada, 1.0)] {
                    let x = canonical_test_input(prob.n(), y).unwrap();
                    let oracle = margin_radius(w, &x, norm).unwrap();
                    let bisect = bisection_attack_radius(w, &x, norm, 1e-12).unwrap();
                    max_bisect_dev = max_bisect_dev.max((oracle - bisect).abs());
                }
            }
        }
    }
    out.push(check(
        2,
        "oracle_matches_bisection_attack",
        max_bisect_dev <= 1e-8,
        format!("max deviation {}", g17(max_bisect_dev)),
    ));

    // Large-count limits of the min-norm radii and scaling of the adaptive
    // radii, on explicit weight vectors only.
    let mut limit_dev_l2 = 0.0_f64;
    let mut limit_dev_linf = 0.0_f64;
    for y in [1.0, -1.0] {
        let r2 = oracle_radii(10_000, 10_000, SolutionKind::MinNorm, y, Norm::L2).unwrap();
        let ri = oracle_radii(10_000, 10_000, SolutionKind::MinNorm, y, Norm::Linf).unwrap();
        limit_dev_l2 = limit_dev_l2.max((r2 - 1.0).abs());
        limit_dev_linf = limit_dev_linf.max((ri - 0.25).abs());
    }
    out.push(check(
        3,
        "min_norm_radii_approach_their_limits",
        limit_dev_l2 <= 0.01 && limit_dev_linf <= 0.01,
        format!(
            "at n+=n-=10^4: |L2 - 1| = {}, |Linf - 1/4| = {}",
            g17(limit_dev_l2),
            g17(limit_dev_linf)
        ),
    ));
    let m = 1_000usize;
    let ratio_l2 = oracle_radii(2 * m, 2 * m, SolutionKind::Adaptive, 1.0, Norm::L2).unwrap()
        / oracle_radii(m, m, SolutionKind::Adaptive, 1.0, Norm::L2).unwrap();
    let ratio_linf = oracle_radii(2 * m, 2 * m, SolutionKind::Adaptive, 1.0, Norm::Linf).unwrap()
        / oracle_radii(m, m, SolutionKind::Adaptive, 1.0, Norm::Linf).unwrap();
    let dev_l2 = (ratio_l2 - 1.0 / 2.0_f64.sqrt()).abs() / (1.0 / 2.0_f64.sqrt());
    let dev_linf = (ratio_linf - 0.5).abs() / 0.5;
    out.push(check(
        3,
        "adaptive_radii_scale_as_expected",
        dev_l2 <= 0.02 && dev_linf <= 0.02,
        format!(
            "doubling ratios at n = 10^3: L2 {} (target 1/sqrt(2)), Linf {} (target 1/2)",
            g17(ratio_l2),
            g17(ratio_linf)
        ),
    ));

    out.extend(attack_checks());
    out
}

fn attack_checks() -> Vec<Check> {
    let mut out = Vec::new();

    // PGD success against the exact flip radius, outside a 1% band.
    let prob = SyntheticProblem::generate(1, 1).unwrap();
    let w_sgd = min_norm_weight(prob.labels()).unwrap();
    let w_ada = adaptive_weight(prob.labels(), 0.25).unwrap();
    let mut disagreements = 0usize;
    let mut compared = 0usize;
    for norm in [Norm::L2, Norm::Linf] {
        for (w, y) in [(&w_sgd, 1.0), (&w_sgd, -1.0), (&w_ada, 1.0)] {
            let x = canonical_test_input(prob.n(), y).unwrap();
            let r = margin_radius(w, &x, norm).unwrap();
            for k in 0..=100 {
                let eps = 2.0 * r * k as f64 / 100.0;
                if (eps - r).abs() <= 0.01 * r {
                    continue;
                }
                let outcome = pgd_attack(w, &x, y, &AttackConfig::standard(norm, eps)).unwrap();
                compared += 1;
                if outcome.success != (eps > r) {
                    disagreements += 1;
                }
            }
        }
    }
    out.push(check(
        7,
        "pgd_matches_margin_oracle",
        disagreements == 0,
        format!("{disagreements} disagreements over {compared} grid points"),
    ));

    // The label-coordinate weight traces the unit step curve: exact NAUC is
    // min(1, eps_max)/eps_max regardless of the grid.
    let w_star = label_coordinate_weight(13).unwrap();
    let testset = vec![
        TestPoint { x: canonical_test_input(2, 1.0).unwrap(), y: 1.0 },
        TestPoint { x: canonical_test_input(2, -1.0).unwrap(), y: -1.0 },
    ];
    let mut nauc_dev = 0.0_f64;
    for eps_max in [2.0, 0.7] {
        let grid = uniform_grid(eps_max, 101).unwrap();
        let curve =
            sweep_curve(&w_star, &testset, Norm::L2, &grid, &SweepSettings::standard()).unwrap();
        let expect = 1.0_f64.min(eps_max) / eps_max;
        nauc_dev = nauc_dev.max((curve.nauc_exact - expect).abs());
    }
    out.push(check(
        7,
        "ideal_weight_exact_nauc",
        nauc_dev <= 1e-6,
        format!("max deviation {} from min(1, eps_max)/eps_max", g17(nauc_dev)),
    ));

    // The min-norm limit dominates the adaptive limit on robustness area.
    let prob20 = SyntheticProblem::generate(20, 20).unwrap();
    let w_sgd20 = min_norm_weight(prob20.labels()).unwrap();
    let w_ada20 = adaptive_weight(prob20.labels(), 0.25).unwrap();
    let testset20 = vec![
        TestPoint { x: canonical_test_input(prob20.n(), 1.0).unwrap(), y: 1.0 },
        TestPoint { x: canonical_test_input(prob20.n(), -1.0).unwrap(), y: -1.0 },
    ];
    let mut ordering_ok = true;
    let mut detail = String::new();
    for norm in [Norm::L2, Norm::Linf] {
        let r_max = testset20
            .iter()
            .map(|p| margin_radius(&w_sgd20, &p.x, norm).unwrap())
            .fold(0.0_f64, f64::max);
        let grid = uniform_grid(2.0 * r_max, 41).unwrap();
        let fast = SweepSettings { steps: 20, restarts: 1, seed: 0, step_factors: vec![1.0] };
        let c_sgd = sweep_curve(&w_sgd20, &testset20, norm, &grid, &fast).unwrap();
        let c_ada = sweep_curve(&w_ada20, &testset20, norm, &grid, &fast).unwrap();
        if c_sgd.nauc_exact <= c_ada.nauc_exact {
            ordering_ok = false;
        }
        let _ = write!(
            detail,
            "{}: min-norm {} vs adaptive {}; ",
            norm.label(),
            g17(c_sgd.nauc_exact),
            g17(c_ada.nauc_exact)
        );
    }
    out.push(check(7, "min_norm_nauc_dominates_adaptive", ordering_ok, detail));
    out
}

// ------------------------------------------------------------- geometry --

fn geometry_spec_pool() -> Vec<RobustLossSpec> {
    let mut pool = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let n = rng.random_range(1..=5);
        let d = rng.random_range(2..=8);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y = Vector::from_fn(n, |_| if rng.random::<bool>() { 1.0 } else { -1.0 });
        let eps = rng.random_range(0.2..2.0);
        pool.push(RobustLossSpec::new(Matrix::from_rows(&rows).unwrap(), y, eps).unwrap());
    }
    // Canned: the 2-D demo, a synthetic instance, and an inconsistent system.
    pool.push(demo_spec(0.5).unwrap());
    let prob = SyntheticProblem::generate(1, 1).unwrap();
    pool.push(RobustLossSpec::for_problem(&prob, 1.0).unwrap());
    pool.push(
        RobustLossSpec::new(
            Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(),
            Vector::new(vec![1.0, -1.0]).unwrap(),
            0.7,
        )
        .unwrap(),
    );
    pool
}

fn random_smooth_point(spec: &RobustLossSpec, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let w = Vector::from_fn(spec.dim(), |_| rng.random_range(-2.0..2.0));
        if spec.is_smooth_at(&w) {
            return w;
        }
    }
}

/// Gradient/Hessian finite differences, curvature probes, case
/// classification, flat directions, and the landscape convexity claims.
pub fn suite_geometry() -> Vec<Check> {
    let mut out = Vec::new();
    let pool = geometry_spec_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(55);

    let mut grad_dev = 0.0_f64;
    let mut hess_dev = 0.0_f64;
    for spec in &pool {
        for _ in 0..2 {
            let w = random_smooth_point(spec, &mut rng);
            let g = spec.gradient(&w).unwrap();
            let h = 1e-6;
            for j in 0..spec.dim() {
                let mut wp = w.clone();
                wp[j] += h;
                let mut wm = w.clone();
                wm[j] -= h;
                let fd = (spec.loss(&wp).unwrap() - spec.loss(&wm).unwrap()) / (2.0 * h);
                grad_dev = grad_dev.max((fd - g[j]).abs() / g[j].abs().max(1.0));
            }
        }
        let w = random_smooth_point(spec, &mut rng);
        let hess = spec.hessian(&w).unwrap();
        let step = 1e-5;
        for j in 0..spec.dim() {
            let mut wp = w.clone();
            wp[j] += step;
            let mut wm = w.clone();
            wm[j] -= step;
            if !(spec.is_smooth_at(&wp) && spec.is_smooth_at(&wm)) {
                continue;
            }
            let gp = spec.gradient(&wp).unwrap();
            let gm = spec.gradient(&wm).unwrap();
            for a in 0..spec.dim() {
                let fd = (gp[a] - gm[a]) / (2.0 * step);
                hess_dev = hess_dev.max((fd - hess.get(a, j)).abs() / hess.get(a, j).abs().max(1.0));
            }
        }
    }
    out.push(check(
        4,
        "gradient_matches_finite_differences",
        grad_dev <= 1e-5,
        format!("max relative deviation {}", g17(grad_dev)),
    ));
    out.push(check(
        4,
        "hessian_matches_finite_differences",
        hess_dev <= 1e-4,
        format!("max relative deviation {}", g17(hess_dev)),
    ));

    let probes_per_spec = 10_000usize.div_ceil(pool.len());
    let mut min_probe = f64::INFINITY;
    let mut probe_count = 0usize;
    for spec in &pool {
        for _ in 0..probes_per_spec {
            let w = random_smooth_point(spec, &mut rng);
            let mut v = Vector::from_fn(spec.dim(), |_| rng.random_range(-1.0..1.0));
            let vn = v.norm(Norm::L2);
            if vn < 1e-6 {
                continue;
            }
            v.scale(1.0 / vn);
            let probe = spec.curvature_probe(&w, &v).unwrap();
            min_probe = min_probe.min(probe.value);
            probe_count += 1;
        }
    }
    out.push(check(
        4,
        "curvature_probes_nonnegative",
        min_probe >= -1e-8 && probe_count >= 10_000,
        format!("minimum of {} over {probe_count} probes", g17(min_probe)),
    ));

    // Case classification around the consistency threshold.
    let prob = SyntheticProblem::generate(1, 1).unwrap();
    let theta_expected = (31.0 / 14.0_f64).sqrt();
    let below = classify_convexity(&RobustLossSpec::for_problem(&prob, 0.5 * theta_expected).unwrap())
        .unwrap();
    let at = classify_convexity(&RobustLossSpec::for_problem(&prob, theta_expected).unwrap()).unwrap();
    let above =
        classify_convexity(&RobustLossSpec::for_problem(&prob, 2.0 * theta_expected).unwrap())
            .unwrap();
    let inconsistent = classify_convexity(
        &RobustLossSpec::new(
            Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(),
            Vector::new(vec![1.0, -1.0]).unwrap(),
            0.7,
        )
        .unwrap(),
    )
    .unwrap();
    let theta = below.threshold().unwrap_or(f64::NAN);
    let cases_ok = below.case_id() == 2
        && at.case_id() == 3
        && above.case_id() == 4
        && inconsistent.case_id() == 1
        && (theta - theta_expected).abs() <= 1e-12;
    out.push(check(
        4,
        "case_classification_matches_threshold",
        cases_ok,
        format!(
            "cases (below, at, above, inconsistent) = ({}, {}, {}, {}); theta = {}",
            below.case_id(),
            at.case_id(),
            above.case_id(),
            inconsistent.case_id(),
            g17(theta)
        ),
    ));

    // Flat directions: zero curvature with a live gradient along the way.
    let flat_spec = RobustLossSpec::for_problem(&prob, 0.5).unwrap();
    let segments = zero_curvature_directions(&flat_spec).unwrap();
    let mut max_flat_curvature = 0.0_f64;
    let mut min_grad_norm = f64::INFINITY;
    for seg in &segments {
        for t in [0.3, 0.6, 0.9] {
            let w = seg.endpoint.scaled(t);
            let probe = flat_spec.curvature_probe(&w, &seg.direction).unwrap();
            max_flat_curvature = max_flat_curvature.max(probe.value.abs());
            min_grad_norm = min_grad_norm.min(flat_spec.gradient(&w).unwrap().norm(Norm::L2));
        }
    }
    out.push(check(
        4,
        "flat_directions_have_zero_curvature",
        segments.len() == 2 && max_flat_curvature <= 1e-8 && min_grad_norm >= 1e-6,
        format!(
            "{} segments, max |curvature| {}, min gradient norm {}",
            segments.len(),
            g17(max_flat_curvature),
            g17(min_grad_norm)
        ),
    ));

    out.extend(landscape_checks());
    out
}

fn landscape_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let steps = 61usize;
    let rows = landscape_grid(&demo_spec(0.5).unwrap(), -3.0, 3.0, steps).unwrap();
    let full = |i: usize, j: usize| rows[i * steps + j].full_loss;
    let eps_term = |i: usize, j: usize| rows[i * steps + j].eps_term;
    let mut min_second = f64::INFINITY;
    let mut violation = false;
    for i in 0..steps {
        for j in 1..steps - 1 {
            min_second = min_second.min(full(i, j - 1) - 2.0 * full(i, j) + full(i, j + 1));
            min_second = min_second.min(full(j - 1, i) - 2.0 * full(j, i) + full(j + 1, i));
            if eps_term(i, j) > 0.5 * (eps_term(i, j - 1) + eps_term(i, j + 1)) + 1e-9
                || eps_term(j, i) > 0.5 * (eps_term(j - 1, i) + eps_term(j + 1, i)) + 1e-9
            {
                violation = true;
            }
        }
    }
    out.push(check(
        8,
        "full_loss_grid_is_convex",
        min_second >= -1e-9,
        format!("minimum discrete second difference {}", g17(min_second)),
    ));
    out.push(check(
        8,
        "interaction_term_alone_is_not_convex",
        violation,
        "found a grid segment violating midpoint convexity".to_string(),
    ));
    out
}

// ----------------------------------------------------------- optimizers --

/// Training limits: non-adaptive methods reach the min-norm interpolant,
/// adaptive methods align with the sign structure, and every kind agrees on
/// the robust objective's minimizer.
pub fn suite_optimizers() -> Vec<Check> {
    let mut out = Vec::new();
    let prob = SyntheticProblem::generate(1, 1).unwrap();
    let w_sgd = min_norm_weight(prob.labels()).unwrap();

    let cfg = OptimizerConfig::natural_default(OptimizerKind::Gd);
    let trace =
        train_natural(&prob, &cfg, &Vector::zeros(prob.dim()), 200_000, 1e-13).unwrap();
    let gd_gap = trace.final_w.sub(&w_sgd).norm(Norm::L2);
    out.push(check(
        6,
        "gd_reaches_the_min_norm_interpolant",
        gd_gap <= 1e-6,
        format!("distance {}", g17(gd_gap)),
    ));

    let v_dir = adaptive_weight(prob.labels(), 1.0).unwrap();
    let mut min_cosine = f64::INFINITY;
    for kind in [OptimizerKind::Adam, OptimizerKind::Adagrad, OptimizerKind::Rmsprop] {
        let mut cfg = OptimizerConfig::natural_default(kind);
        cfg.learning_rate = Some(1e-3);
        let trace =
            train_natural(&prob, &cfg, &Vector::zeros(prob.dim()), 100_000, 1e-300).unwrap();
        let cosine =
            trace.final_w.dot(&v_dir) / (trace.final_w.norm(Norm::L2) * v_dir.norm(Norm::L2));
        min_cosine = min_cosine.min(cosine);
    }
    out.push(check(
        6,
        "adaptive_methods_align_with_the_sign_direction",
        min_cosine >= 0.999,
        format!("minimum cosine {}", g17(min_cosine)),
    ));

    // Robust objective at eps = 0.5: below the stationarity threshold the
    // minimizer is exactly the min-norm interpolant, for every kind.
    let spec = RobustLossSpec::for_problem(&prob, 0.5).unwrap();
    let mut init_rng = ChaCha8Rng::seed_from_u64(424242);
    let inits: Vec<Vector> = (0..5)
        .map(|_| Vector::from_fn(prob.dim(), |_| init_rng.random_range(-1.0..1.0)))
        .collect();
    let mut finals: Vec<Vector> = Vec::new();
    let mut max_target_gap = 0.0_f64;
    for kind in OptimizerKind::ALL {
        for (i, init) in inits.iter().enumerate() {
            let mut cfg = OptimizerConfig::adversarial_default(kind);
            cfg.seed = 9000 + i as u64;
            // The subgradient method's final offset scales with its last step
            // size (~eta_0 / sqrt(T)); give it the budget that puts the
            // orbit radius well inside the agreement tolerance.
            let steps =
                if kind == OptimizerKind::Subgradient { 4_000_000 } else { 1_000_000 };
            let trace = train_adversarial(&spec, &cfg, init, steps, 1e-300).unwrap();
            max_target_gap = max_target_gap.max(trace.final_w.sub(&w_sgd).norm(Norm::L2));
            finals.push(trace.final_w);
        }
    }
    let mut max_pairwise = 0.0_f64;
    for a in 0..finals.len() {
        for b in a + 1..finals.len() {
            max_pairwise = max_pairwise.max(finals[a].sub(&finals[b]).norm(Norm::L2));
        }
    }
    out.push(check(
        6,
        "all_kinds_agree_on_the_robust_minimizer",
        max_target_gap <= 1e-4 && max_pairwise <= 1e-4,
        format!(
            "max distance to the interpolant {}, max pairwise {}",
            g17(max_target_gap),
            g17(max_pairwise)
        ),
    ));
    out
}

// ------------------------------------------------------------- theorem4 --

/// Stationarity threshold of the interpolating solution: bisection against
/// the closed forms and the imbalance bound.
pub fn suite_theorem4() -> Vec<Check> {
    let mut out = Vec::new();
    let threshold = theorem4_threshold(1, 1).unwrap();
    let prob = SyntheticProblem::generate(1, 1).unwrap();
    let flip = bisect_interpolation_flip(&prob, 0.5, 2.0, 60).unwrap();
    let rel = (flip - threshold.oracle).abs() / threshold.oracle;
    out.push(check(
        5,
        "feasibility_flips_at_the_oracle_threshold",
        rel <= 1e-3,
        format!("bisection {} vs oracle {} (relative gap {})", g17(flip), g17(threshold.oracle), g17(rel)),
    ));
    out.push(documented(
        5,
        "printed_threshold_differs_from_oracle",
        format!(
            "tabulated value {} vs oracle {} at (1,1); the oracle is confirmed by bisection",
            g17(threshold.printed),
            g17(threshold.oracle)
        ),
    ));

    let bound_1 = theorem4_threshold(2, 2).unwrap().sufficient_bound;
    let bound_3 = theorem4_threshold(3, 1).unwrap().sufficient_bound;
    let bound_third = theorem4_threshold(1, 3).unwrap().sufficient_bound;
    out.push(check(
        5,
        "sufficient_bound_peaks_at_balance",
        (bound_1 - 1.0).abs() <= 1e-12
            && (bound_3 - 0.5).abs() <= 1e-12
            && (bound_third - 0.5).abs() <= 1e-12,
        format!("bounds at c = 1, 3, 1/3: {}, {}, {}", g17(bound_1), g17(bound_3), g17(bound_third)),
    ));

    let imbalanced = theorem4_threshold(60, 20).unwrap();
    let gap = (imbalanced.oracle - imbalanced.sufficient_bound).abs();
    out.push(check(
        5,
        "imbalanced_oracle_is_near_the_bound",
        gap <= 0.05,
        format!("oracle {} vs bound {} at (60,20)", g17(imbalanced.oracle), g17(imbalanced.sufficient_bound)),
    ));
    out
}
