//! Cross-module properties: convexity of the full objective, row-space
//! optimality, route-independence of the closed forms, and the robustness
//! ordering between the two limit solutions.

use proptest::prelude::*;

use linrobust_core::closed_form::{adaptive_weight, alpha_coefficients, min_norm_weight};
use linrobust_core::linalg::{Cholesky, Norm, Vector};
use linrobust_core::problem::{canonical_test_input, SyntheticProblem};
use linrobust_core::radii::margin_radius;
use linrobust_core::robust_loss::RobustLossSpec;

fn random_weight(dim: usize, seedish: u64) -> Vector {
    // Cheap deterministic fill; the values only need to be varied.
    Vector::from_fn(dim, |j| {
        let h = seedish
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(j as u64)
            .wrapping_mul(0xBF58_476D_1CE4_E5B9);
        (h >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The full objective is convex: midpoints never rise above chords.
    #[test]
    fn robust_loss_is_midpoint_convex(
        n_plus in 1usize..4,
        n_minus in 1usize..4,
        eps in 0.1f64..2.0,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
        t in 0.05f64..0.95,
    ) {
        let prob = SyntheticProblem::generate(n_plus, n_minus).unwrap();
        let spec = RobustLossSpec::for_problem(&prob, eps).unwrap();
        let w1 = random_weight(prob.dim(), s1);
        let w2 = random_weight(prob.dim(), s2);
        let mut mid = w1.scaled(t);
        mid.add_scaled(1.0 - t, &w2);
        let l1 = spec.loss(&w1).unwrap();
        let l2 = spec.loss(&w2).unwrap();
        let lm = spec.loss(&mid).unwrap();
        let chord = t * l1 + (1.0 - t) * l2;
        prop_assert!(lm <= chord + 1e-10 * (1.0 + chord.abs()),
            "midpoint {lm} above chord {chord}");
    }

    /// Removing the null-space component of a weight vector never increases
    /// the objective, and strictly decreases it when the component is real.
    #[test]
    fn projecting_out_the_nullspace_helps(
        n_plus in 1usize..4,
        n_minus in 1usize..4,
        eps in 0.1f64..2.0,
        s in any::<u64>(),
    ) {
        let prob = SyntheticProblem::generate(n_plus, n_minus).unwrap();
        let spec = RobustLossSpec::for_problem(&prob, eps).unwrap();
        let w = random_weight(prob.dim(), s);
        let projected = linrobust_core::linalg::project_rowspace(prob.x(), &w).unwrap();
        let lw = spec.loss(&w).unwrap();
        let lp = spec.loss(&projected).unwrap();
        prop_assert!(lp <= lw + 1e-12 * (1.0 + lw.abs()));
        let leftover = w.sub(&projected).norm(Norm::L2);
        if leftover > 1e-6 {
            prop_assert!(lp < lw, "null-space mass {leftover} did not cost anything");
        }
    }

    /// The closed-form coefficient pair solves the kernel system K alpha-by-class = y:
    /// route independence between the tabulated formula and a dense solve.
    #[test]
    fn alpha_matches_a_dense_kernel_solve(
        n_plus in 1usize..12,
        n_minus in 1usize..12,
    ) {
        let prob = SyntheticProblem::generate(n_plus, n_minus).unwrap();
        let alpha = alpha_coefficients(n_plus, n_minus).unwrap();
        let k = prob.kernel_matrix();
        let chol = Cholesky::factor(&k, 1e-12).expect("kernel matrix is positive definite");
        let solved = chol.solve(&prob.label_vector());
        for (i, &label) in prob.labels().iter().enumerate() {
            let expect = if label > 0.0 { alpha.alpha_plus } else { alpha.alpha_minus };
            prop_assert!((solved[i] - expect).abs() < 1e-10,
                "sample {i}: dense {} vs closed form {expect}", solved[i]);
        }
    }

    /// The sign-pattern limit is strictly less robust than the min-norm
    /// limit: smaller flip radius on the test point it still gets right,
    /// and an outright miss on the other one.
    #[test]
    fn adaptive_limit_is_less_robust(
        n_plus in 1usize..8,
        n_minus in 1usize..8,
    ) {
        let prob = SyntheticProblem::generate(n_plus, n_minus).unwrap();
        let w_sgd = min_norm_weight(prob.labels()).unwrap();
        let w_ada = adaptive_weight(prob.labels(), 0.25).unwrap();
        let x_plus = canonical_test_input(prob.n(), 1.0).unwrap();
        for norm in [Norm::L2, Norm::Linf] {
            let r_sgd = margin_radius(&w_sgd, &x_plus, norm).unwrap();
            let r_ada = margin_radius(&w_ada, &x_plus, norm).unwrap();
            prop_assert!(r_ada < r_sgd,
                "{norm:?}: adaptive {r_ada} >= min-norm {r_sgd}");
        }
        // The y = -1 test point: min-norm classifies it, the sign pattern
        // scores it positive and gets it wrong at zero budget.
        let x_minus = canonical_test_input(prob.n(), -1.0).unwrap();
        prop_assert!(w_sgd.dot(&x_minus) < 0.0);
        prop_assert!(w_ada.dot(&x_minus) > 0.0);
    }
}

#[test]
fn interpolating_weights_zero_the_data_terms() {
    for (n_plus, n_minus) in [(1, 1), (2, 1), (3, 4)] {
        let prob = SyntheticProblem::generate(n_plus, n_minus).unwrap();
        for w in [
            min_norm_weight(prob.labels()).unwrap(),
            adaptive_weight(prob.labels(), 0.25).unwrap(),
        ] {
            let r = prob.x().matvec(&w).sub(&prob.label_vector());
            assert!(r.norm(Norm::Linf) < 1e-12, "({n_plus},{n_minus}) residual {r:?}");
        }
    }
}
