//! Dense 2-D surface grids of the robust objective and its pieces, for
//! external contour plotting.
//!
//! Each grid point carries the data-fit l1 magnitude, the norm-times-l1
//! interaction term, the full objective, and a bitmask identifying which
//! side of each sample hyperplane x_i' w = y_i the point sits on. The full
//! objective is convex, so its discrete second differences along grid lines
//! stay nonnegative; the interaction term alone is not, which is visible as
//! midpoint-convexity violations on the same grid.

#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Norm, Vector};
use crate::robust_loss::RobustLossSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeRow {
    pub w1: f64,
    pub w2: f64,
    /// ‖Xw − y‖₁
    pub l1_term: f64,
    /// ε ‖w‖₂ ‖Xw − y‖₁ — the non-convex interaction piece.
    pub eps_term: f64,
    pub full_loss: f64,
    /// Bit i set iff residual i is nonnegative (sign(0) = +1 convention).
    pub signature_code: u32,
}

/// Evaluate the surfaces on a `steps` x `steps` grid over [min, max]^2.
/// Rows are emitted with the w1 index outermost: row k = i * steps + j has
/// w1 = grid[i], w2 = grid[j].
pub fn landscape_grid(
    spec: &RobustLossSpec,
    grid_min: f64,
    grid_max: f64,
    steps: usize,
) -> Result<Vec<LandscapeRow>> {
    if spec.dim() != 2 {
        return Err(Error::InvalidParam {
            what: "landscape dimension",
            detail: String::from("surface export only supports 2-D weight spaces"),
        });
    }
    if spec.n() > 32 {
        return Err(Error::InvalidParam {
            what: "landscape samples",
            detail: String::from("signature bitmask supports at most 32 samples"),
        });
    }
    if steps < 2 || !(grid_min < grid_max) || !grid_min.is_finite() || !grid_max.is_finite() {
        return Err(Error::InvalidParam {
            what: "landscape grid",
            detail: String::from("need finite grid_min < grid_max and at least two steps"),
        });
    }
    let coord = |k: usize| grid_min + (grid_max - grid_min) * k as f64 / (steps - 1) as f64;
    let mut rows = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            let w = Vector::new(alloc::vec![coord(i), coord(j)])?;
            let r = spec.residual(&w);
            let l1_term = r.norm(Norm::L1);
            let eps_term = spec.epsilon() * w.norm(Norm::L2) * l1_term;
            let full_loss = spec.loss(&w)?;
            let mut signature_code = 0u32;
            for s in 0..spec.n() {
                if r[s] >= 0.0 {
                    signature_code |= 1 << s;
                }
            }
            rows.push(LandscapeRow {
                w1: w[0],
                w2: w[1],
                l1_term,
                eps_term,
                full_loss,
                signature_code,
            });
        }
    }
    Ok(rows)
}

/// The canned 2-D demonstration problem: two samples in general position
/// whose hyperplanes cross inside the plotting window.
pub fn demo_spec(epsilon: f64) -> Result<RobustLossSpec> {
    let x = Matrix::from_rows(&[alloc::vec![1.0, 0.3], alloc::vec![-0.4, 1.0]])?;
    let y = Vector::new(alloc::vec![1.0, -1.0])?;
    RobustLossSpec::new(x, y, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STEPS: usize = 61;

    fn demo_rows() -> Vec<LandscapeRow> {
        landscape_grid(&demo_spec(0.5).unwrap(), -3.0, 3.0, STEPS).unwrap()
    }

    fn surface(rows: &[LandscapeRow], pick: fn(&LandscapeRow) -> f64) -> Vec<Vec<f64>> {
        (0..STEPS)
            .map(|i| (0..STEPS).map(|j| pick(&rows[i * STEPS + j])).collect())
            .collect()
    }

    #[test]
    fn full_loss_is_convex_along_grid_lines() {
        let grid = surface(&demo_rows(), |r| r.full_loss);
        for i in 0..STEPS {
            for j in 1..STEPS - 1 {
                let along_row = grid[i][j - 1] - 2.0 * grid[i][j] + grid[i][j + 1];
                assert!(along_row >= -1e-9, "row {i} col {j}: {along_row}");
                let along_col = grid[j - 1][i] - 2.0 * grid[j][i] + grid[j + 1][i];
                assert!(along_col >= -1e-9, "col {i} row {j}: {along_col}");
            }
        }
    }

    #[test]
    fn eps_term_alone_breaks_midpoint_convexity() {
        let grid = surface(&demo_rows(), |r| r.eps_term);
        let mut violated = false;
        'outer: for i in 0..STEPS {
            for j in 1..STEPS - 1 {
                if grid[i][j] > 0.5 * (grid[i][j - 1] + grid[i][j + 1]) + 1e-9
                    || grid[j][i] > 0.5 * (grid[j - 1][i] + grid[j + 1][i]) + 1e-9
                {
                    violated = true;
                    break 'outer;
                }
            }
        }
        assert!(violated, "interaction term looked convex on the demo grid");
    }

    #[test]
    fn l1_surface_creases_at_sample_hyperplanes() {
        // Walking w1 along the row w2 = 0 crosses x_0' w = y_0 at w1 = 1:
        // the slope of |w1 + 0.3 w2 - 1| jumps by 2 there, so the discrete
        // second difference at the crossing cell is about 2h, far above the
        // curvature-free cells on either side.
        let rows = demo_rows();
        let grid = surface(&rows, |r| r.l1_term);
        let mid = STEPS / 2; // w2 = 0 exactly
        let h = 6.0 / (STEPS - 1) as f64;
        let mut max_kink = 0.0_f64;
        for j in 1..STEPS - 1 {
            max_kink = max_kink.max(grid[j - 1][mid] - 2.0 * grid[j][mid] + grid[j + 1][mid]);
        }
        assert!(max_kink > 0.5 * h, "no crease found along w2 = 0: {max_kink}");
    }

    #[test]
    fn signature_codes_track_residual_signs() {
        let rows = demo_rows();
        let corner = |w1: f64, w2: f64| {
            rows.iter()
                .find(|r| r.w1 == w1 && r.w2 == w2)
                .expect("corner present")
                .signature_code
        };
        // Both residuals positive in the far top-right corner.
        assert_eq!(corner(3.0, 3.0), 0b11);
        // Both negative in the far bottom-left corner.
        assert_eq!(corner(-3.0, -3.0), 0b00);
        // Codes partition the grid into all four cells.
        let mut seen = [false; 4];
        for r in &rows {
            seen[r.signature_code as usize] = true;
        }
        assert!(seen.iter().all(|&s| s), "expected all four arrangement cells");
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = demo_spec(0.5).unwrap();
        assert!(landscape_grid(&spec, -3.0, 3.0, 1).is_err());
        assert!(landscape_grid(&spec, 3.0, -3.0, 10).is_err());
        let tall = RobustLossSpec::new(
            Matrix::from_rows(&alloc::vec![alloc::vec![1.0, 1.0]; 33]).unwrap(),
            Vector::zeros(33),
            0.5,
        )
        .unwrap();
        assert!(landscape_grid(&tall, -1.0, 1.0, 5).is_err());
        let d3 = RobustLossSpec::new(
            Matrix::from_rows(&[alloc::vec![1.0, 0.0, 0.0]]).unwrap(),
            Vector::new(alloc::vec![1.0]).unwrap(),
            0.5,
        )
        .unwrap();
        assert!(landscape_grid(&d3, -1.0, 1.0, 5).is_err());
    }
}
