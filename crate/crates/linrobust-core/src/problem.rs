//! The synthetic binary classification family.
//!
//! Each of the n samples owns a private block of five coordinates on top of
//! three shared ones, so the data matrix is n x (3 + 5n) with linearly
//! independent rows: row i is
//!
//! ```text
//! x_i = ( y_i, 1, 1, 0...0, [1, (1-y_i)/2 x4], 0...0 )
//! ```
//!
//! with the bracketed block starting at column 3 + 5i. A positive row has 4
//! nonzero entries, a negative row 8, and the row Gram matrix depends only on
//! the labels, which is what makes the closed-form analysis tractable.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// A generated problem instance: labels in generation order plus the dense
/// data matrix they induce.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    n_plus: usize,
    n_minus: usize,
    labels: Vec<f64>,
    x: Matrix,
    p: Option<f64>,
    resamples: u32,
}

/// A test input embedded in the training dimension, with its true label.
#[derive(Debug, Clone)]
pub struct TestPoint {
    pub x: Vector,
    pub y: f64,
}

impl SyntheticProblem {
    /// Build the instance for an explicit label sequence (entries +-1, at
    /// least one of each class).
    pub fn from_labels(labels: &[f64]) -> Result<Self> {
        Self::from_labels_tagged(labels, None, 0)
    }

    fn from_labels_tagged(labels: &[f64], p: Option<f64>, resamples: u32) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidParam {
                what: "labels",
                detail: "need at least two samples".into(),
            });
        }
        if !labels.iter().all(|&y| y == 1.0 || y == -1.0) {
            return Err(Error::InvalidParam { what: "labels", detail: "entries must be +-1".into() });
        }
        let n_plus = labels.iter().filter(|&&y| y == 1.0).count();
        let n_minus = labels.len() - n_plus;
        if n_plus == 0 || n_minus == 0 {
            return Err(Error::InvalidParam {
                what: "labels",
                detail: "each class needs at least one sample".into(),
            });
        }
        let n = labels.len();
        let d = 3 + 5 * n;
        let mut x = Matrix::zeros(n, d);
        for (i, &y) in labels.iter().enumerate() {
            x.set(i, 0, y);
            x.set(i, 1, 1.0);
            x.set(i, 2, 1.0);
            let block = 3 + 5 * i;
            x.set(i, block, 1.0);
            for j in 1..5 {
                x.set(i, block + j, (1.0 - y) / 2.0);
            }
        }
        Ok(SyntheticProblem { n_plus, n_minus, labels: labels.to_vec(), x, p, resamples })
    }

    /// Fixed class counts; classes alternate starting positive until one is
    /// exhausted, so (2, 1) yields the label order (+1, -1, +1).
    pub fn generate(n_plus: usize, n_minus: usize) -> Result<Self> {
        if n_plus == 0 || n_minus == 0 {
            return Err(Error::InvalidParam {
                what: "class counts",
                detail: "both classes need at least one sample".into(),
            });
        }
        let mut labels = Vec::with_capacity(n_plus + n_minus);
        let (mut np, mut nm) = (n_plus, n_minus);
        let mut turn_plus = true;
        while np + nm > 0 {
            let take_plus = if np == 0 { false } else if nm == 0 { true } else { turn_plus };
            if take_plus {
                labels.push(1.0);
                np -= 1;
            } else {
                labels.push(-1.0);
                nm -= 1;
            }
            turn_plus = !turn_plus;
        }
        Self::from_labels(&labels)
    }

    /// Random labels, +1 with probability p (0.5 < p <= 1). Draws are
    /// resampled (up to 1000 times) if a class comes out empty; the number of
    /// resamples is recorded on the instance.
    pub fn generate_random(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParam { what: "n", detail: "need at least two samples".into() });
        }
        if !(p > 0.5 && p <= 1.0) {
            return Err(Error::InvalidParam { what: "p", detail: "need 0.5 < p <= 1".into() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        const MAX_ATTEMPTS: u32 = 1000;
        for attempt in 0..MAX_ATTEMPTS {
            let labels: Vec<f64> =
                (0..n).map(|_| if rng.random::<f64>() < p { 1.0 } else { -1.0 }).collect();
            let n_plus = labels.iter().filter(|&&y| y == 1.0).count();
            if n_plus == 0 || n_plus == n {
                continue;
            }
            return Self::from_labels_tagged(&labels, Some(p), attempt);
        }
        Err(Error::EmptyClass { attempts: MAX_ATTEMPTS })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    /// Ambient dimension 3 + 5n.
    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label_vector(&self) -> Vector {
        Vector::from_fn(self.labels.len(), |i| self.labels[i])
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn resamples(&self) -> u32 {
        self.resamples
    }

    /// Row Gram matrix straight from the label table: diagonal 4 (positive
    /// row) or 8 (negative row), off-diagonal 3 for equal labels and 1
    /// otherwise. Equals X X^T exactly.
    pub fn kernel_matrix(&self) -> Matrix {
        let n = self.n();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = if i == j {
                    if self.labels[i] == 1.0 { 4.0 } else { 8.0 }
                } else if self.labels[i] == self.labels[j] {
                    3.0
                } else {
                    1.0
                };
                k.set(i, j, v);
            }
        }
        k
    }

    /// The canonical test input (y, 1, 1, 0, ..., 0), embedded in the
    /// training dimension.
    pub fn make_test_point(&self, y_test: f64) -> Result<TestPoint> {
        Ok(TestPoint { x: canonical_test_input(self.n(), y_test)?, y: y_test })
    }
}

/// Canonical test input (y, 1, 1, 0, ..., 0) for an instance with n training
/// samples, without materializing the instance itself. Length 3 + 5n.
pub fn canonical_test_input(n: usize, y_test: f64) -> Result<Vector> {
    if y_test != 1.0 && y_test != -1.0 {
        return Err(Error::InvalidParam { what: "y_test", detail: "must be +-1".into() });
    }
    let mut x = Vector::zeros(3 + 5 * n);
    x[0] = y_test;
    x[1] = 1.0;
    x[2] = 1.0;
    Ok(x)
}
