//! Closed-form limit solutions on the synthetic family.
//!
//! Two training limits matter here. Non-adaptive gradient methods started in
//! the row space converge to the minimum-norm interpolant w_sgd = X^T alpha,
//! where alpha takes one value per class. Adaptive methods converge (up to
//! scale) to the sign-structured direction v that puts equal weight on every
//! coordinate the data touches. Both are available without forming X, which
//! keeps the large-n asymptotics cheap.
//!
//! The per-class coefficients solve the 2x2 system
//!
//! ```text
//! (3 n+ + 1) a+ +       n-  a- =  1
//!       n+  a+ + (3 n- + 5) a- = -1
//! ```
//!
//! giving a+ = (4 n- + 5)/D, a- = -(4 n+ + 1)/D with
//! D = 15 n+ + 3 n- + 8 n+ n- + 5.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problem::SyntheticProblem;

/// Per-class interpolation coefficients of the minimum-norm solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCoefficients {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub denominator: f64,
}

/// Which limit a closed-form weight vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    /// Scaled sign-structure direction tau * v (adaptive-method limit).
    Adaptive,
    /// Minimum-norm interpolant X^T alpha (non-adaptive limit).
    MinNorm,
}

/// A closed-form weight vector together with the scale and class counts it
/// was built from.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    pub w: Vector,
    pub kind: SolutionKind,
    /// Free scale of the adaptive direction; 1.0 for the minimum-norm kind.
    pub tau: f64,
    n_plus: usize,
    n_minus: usize,
}

pub fn alpha_coefficients(n_plus: usize, n_minus: usize) -> Result<AlphaCoefficients> {
    if n_plus == 0 || n_minus == 0 {
        return Err(Error::InvalidParam {
            what: "class counts",
            detail: "both classes need at least one sample".into(),
        });
    }
    let (np, nm) = (n_plus as f64, n_minus as f64);
    let d = 15.0 * np + 3.0 * nm + 8.0 * np * nm + 5.0;
    Ok(AlphaCoefficients {
        alpha_plus: (4.0 * nm + 5.0) / d,
        alpha_minus: -(4.0 * np + 1.0) / d,
        denominator: d,
    })
}

/// The adaptive direction tau * v from a label sequence: ones on the three
/// shared coordinates, and y_i on the coordinates sample i actually touches
/// (one for a positive sample, five for a negative one).
pub fn adaptive_weight(labels: &[f64], tau: f64) -> Result<Vector> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParam { what: "tau", detail: "must be positive".into() });
    }
    let n = labels.len();
    let mut w = Vector::zeros(3 + 5 * n);
    w[0] = tau;
    w[1] = tau;
    w[2] = tau;
    for (i, &y) in labels.iter().enumerate() {
        let block = 3 + 5 * i;
        if y == 1.0 {
            w[block] = tau;
        } else {
            for j in 0..5 {
                w[block + j] = -tau;
            }
        }
    }
    Ok(w)
}

/// The minimum-norm interpolant X^T alpha from a label sequence, assembled
/// coordinate-wise so no data matrix is needed.
pub fn min_norm_weight(labels: &[f64]) -> Result<Vector> {
    let n_plus = labels.iter().filter(|&&y| y == 1.0).count();
    let n_minus = labels.len() - n_plus;
    let alpha = alpha_coefficients(n_plus, n_minus)?;
    let n = labels.len();
    let mut w = Vector::zeros(3 + 5 * n);
    for (i, &y) in labels.iter().enumerate() {
        let a = if y == 1.0 { alpha.alpha_plus } else { alpha.alpha_minus };
        w[0] += a * y;
        w[1] += a;
        w[2] += a;
        let block = 3 + 5 * i;
        w[block] = a;
        if y != 1.0 {
            for j in 1..5 {
                w[block + j] = a;
            }
        }
    }
    Ok(w)
}

/// Weight vector that reads the label coordinate directly: e_1 in the
/// training dimension. It interpolates (the first column of X is y) and its
/// flip radius is exactly 1 in both the L2 and L-infinity budgets.
pub fn label_coordinate_weight(dim: usize) -> Result<Vector> {
    if dim == 0 {
        return Err(Error::Empty { what: "dimension" });
    }
    let mut w = Vector::zeros(dim);
    w[0] = 1.0;
    Ok(w)
}

pub fn adaptive_solution(prob: &SyntheticProblem, tau: f64) -> Result<ClosedFormSolution> {
    Ok(ClosedFormSolution {
        w: adaptive_weight(prob.labels(), tau)?,
        kind: SolutionKind::Adaptive,
        tau,
        n_plus: prob.n_plus(),
        n_minus: prob.n_minus(),
    })
}

pub fn min_norm_solution(prob: &SyntheticProblem) -> Result<ClosedFormSolution> {
    Ok(ClosedFormSolution {
        w: min_norm_weight(prob.labels())?,
        kind: SolutionKind::MinNorm,
        tau: 1.0,
        n_plus: prob.n_plus(),
        n_minus: prob.n_minus(),
    })
}

impl ClosedFormSolution {
    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    /// Closed-form score on the canonical test input with the given label:
    /// tau * (y + 2) for the adaptive kind, and for the minimum-norm kind
    /// (15 n+ + 8 n+ n- - n-)/D at y = +1, (5 n+ - 8 n+ n- - 3 n-)/D at
    /// y = -1.
    pub fn test_margin(&self, y_test: f64) -> Result<f64> {
        if y_test != 1.0 && y_test != -1.0 {
            return Err(Error::InvalidParam { what: "y_test", detail: "must be +-1".into() });
        }
        match self.kind {
            SolutionKind::Adaptive => Ok(self.tau * (y_test + 2.0)),
            SolutionKind::MinNorm => {
                let (np, nm) = (self.n_plus as f64, self.n_minus as f64);
                let d = 15.0 * np + 3.0 * nm + 8.0 * np * nm + 5.0;
                if y_test == 1.0 {
                    Ok((15.0 * np + 8.0 * np * nm - nm) / d)
                } else {
                    Ok((5.0 * np - 8.0 * np * nm - 3.0 * nm) / d)
                }
            }
        }
    }
}
