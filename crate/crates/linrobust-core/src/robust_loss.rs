//! The adversarially robust square loss for a linear scorer under an L2
//! perturbation budget eps, after maximizing each sample's perturbation in
//! closed form:
//!
//! ```text
//! L(w) = 1/2 ||Xw - y||^2 + eps ||w||_2 ||Xw - y||_1 + eps^2 n / 2 ||w||_2^2
//!      = sum_i 1/2 (|r_i| + eps ||w||_2)^2,     r = Xw - y.
//! ```
//!
//! The middle term couples a norm with an L1 norm, which makes the loss
//! piecewise smooth: space is carved into cells by the n residual hyperplanes
//! r_i = 0 (tracked by the sign pattern s, with sign(0) = +1), and inside a
//! cell away from the origin the loss is twice differentiable with Hessian
//!
//! ```text
//! H = X^T X + (eps/||w||)(X^T s w^T + w s^T X) + (eps^2 n/||w||^2) w w^T
//!     - (eps q/||w||^3) w w^T + (eps q/||w||) I,      q = ||r||_1 + eps n ||w||.
//! ```
//!
//! A probe direction v splits v^T H v into two individually nonnegative
//! pieces, which is how convexity is certified without eigenvalues:
//! `|| Xv + (eps (w.v)/||w||) s ||^2` plus
//! `eps (||r||_1/||w|| + eps n) (1 - cos^2 angle(w, v))`.

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Norm, Vector};
use crate::problem::SyntheticProblem;

/// A robust-loss instance: data, targets, and the perturbation budget.
#[derive(Debug, Clone)]
pub struct RobustLossSpec {
    x: Matrix,
    y: Vector,
    epsilon: f64,
}

/// Residual magnitudes at or below `RESIDUAL_TIE_REL * (1 + ||y||_inf)`
/// count as sitting on a cell boundary.
pub const RESIDUAL_TIE_REL: f64 = 1e-9;

/// Weight norms at or below this count as the origin (the radial term is not
/// differentiable there).
pub const ORIGIN_TOL: f64 = 1e-12;

/// Two-part curvature certificate at a smooth point.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureProbe {
    /// ||X v + (eps (w.v)/||w||) s||^2; nonnegative by construction.
    pub data_term: f64,
    /// eps (||r||_1/||w|| + eps n) (1 - cos^2 angle(w, v)); nonnegative up
    /// to roundoff in the cosine.
    pub alignment_term: f64,
    /// v^T H v = data_term + alignment_term.
    pub value: f64,
}

impl RobustLossSpec {
    pub fn new(x: Matrix, y: Vector, epsilon: f64) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimMismatch { what: "targets", expected: x.rows(), got: y.len() });
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParam { what: "epsilon", detail: "must be positive".into() });
        }
        Ok(RobustLossSpec { x, y, epsilon })
    }

    pub fn for_problem(prob: &SyntheticProblem, epsilon: f64) -> Result<Self> {
        Self::new(prob.x().clone(), prob.label_vector(), epsilon)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn residual(&self, w: &Vector) -> Vector {
        self.x.matvec(w).sub(&self.y)
    }

    pub fn tie_tolerance(&self) -> f64 {
        RESIDUAL_TIE_REL * (1.0 + self.y.norm(Norm::Linf))
    }

    fn check_dim(&self, w: &Vector, what: &'static str) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimMismatch { what, expected: self.dim(), got: w.len() });
        }
        Ok(())
    }

    pub fn loss(&self, w: &Vector) -> Result<f64> {
        self.check_dim(w, "loss input")?;
        let r = self.residual(w);
        let wn = w.norm(Norm::L2);
        let n = self.n() as f64;
        Ok(0.5 * r.dot(&r)
            + self.epsilon * wn * r.norm(Norm::L1)
            + 0.5 * self.epsilon * self.epsilon * n * wn * wn)
    }

    /// Sign pattern of the residual, with sign(0) = +1.
    pub fn signature(&self, w: &Vector) -> Result<Vector> {
        self.check_dim(w, "signature input")?;
        let r = self.residual(w);
        Ok(Vector::from_fn(r.len(), |i| if r[i] >= 0.0 { 1.0 } else { -1.0 }))
    }

    /// True when no residual ties the cell boundary and w is away from the
    /// origin, i.e. the loss is differentiable at w.
    pub fn is_smooth_at(&self, w: &Vector) -> bool {
        if w.len() != self.dim() || w.norm(Norm::L2) <= ORIGIN_TOL {
            return false;
        }
        let tol = self.tie_tolerance();
        self.residual(w).iter().all(|r| r.abs() > tol)
    }

    /// Exact gradient at a smooth point:
    /// X^T r + eps ||w|| X^T s + eps ||r||_1 w/||w|| + eps^2 n w.
    pub fn gradient(&self, w: &Vector) -> Result<Vector> {
        self.check_dim(w, "gradient input")?;
        let wn = w.norm(Norm::L2);
        if wn <= ORIGIN_TOL {
            return Err(Error::NonSmooth { detail: "gradient at the origin" });
        }
        let r = self.residual(w);
        let tol = self.tie_tolerance();
        if r.iter().any(|v| v.abs() <= tol) {
            return Err(Error::NonSmooth { detail: "residual tie on a cell boundary" });
        }
        Ok(self.gradient_unchecked(w, &r, wn))
    }

    /// A subgradient valid everywhere: the gradient formula evaluated with
    /// the sign(0) = +1 signature, and the radial direction taken as 0 at the
    /// origin (a legal choice from the unit ball). Coincides with `gradient`
    /// at smooth points; optimizers use this as their oracle.
    pub fn subgradient(&self, w: &Vector) -> Result<Vector> {
        self.check_dim(w, "subgradient input")?;
        let r = self.residual(w);
        let wn = w.norm(Norm::L2);
        if wn <= ORIGIN_TOL {
            // Only the data term survives; ||r||_1 multiplies a zero vector.
            let s = Vector::from_fn(r.len(), |i| if r[i] >= 0.0 { 1.0 } else { -1.0 });
            let mut g = self.x.tr_matvec(&r);
            g.add_scaled(self.epsilon * wn, &self.x.tr_matvec(&s));
            return Ok(g);
        }
        Ok(self.gradient_unchecked(w, &r, wn))
    }

    fn gradient_unchecked(&self, w: &Vector, r: &Vector, wn: f64) -> Vector {
        let s = Vector::from_fn(r.len(), |i| if r[i] >= 0.0 { 1.0 } else { -1.0 });
        let n = self.n() as f64;
        let mut g = self.x.tr_matvec(r);
        g.add_scaled(self.epsilon * wn, &self.x.tr_matvec(&s));
        g.add_scaled(self.epsilon * r.norm(Norm::L1) / wn + self.epsilon * self.epsilon * n, w);
        g
    }

    /// Exact Hessian at a smooth point (see the module header for the five
    /// terms).
    pub fn hessian(&self, w: &Vector) -> Result<Matrix> {
        self.check_dim(w, "hessian input")?;
        let wn = w.norm(Norm::L2);
        if wn <= ORIGIN_TOL {
            return Err(Error::NonSmooth { detail: "hessian at the origin" });
        }
        let r = self.residual(w);
        let tol = self.tie_tolerance();
        if r.iter().any(|v| v.abs() <= tol) {
            return Err(Error::NonSmooth { detail: "residual tie on a cell boundary" });
        }
        let s = Vector::from_fn(r.len(), |i| if r[i] >= 0.0 { 1.0 } else { -1.0 });
        let n = self.n() as f64;
        let eps = self.epsilon;
        let d = self.dim();
        let q = r.norm(Norm::L1) + eps * n * wn;

        let mut h = Matrix::zeros(d, d);
        for i in 0..self.n() {
            let xi = self.x.row_vector(i);
            h.add_outer(1.0, &xi, &xi);
        }
        let xts = self.x.tr_matvec(&s);
        h.add_outer(eps / wn, &xts, w);
        h.add_outer(eps / wn, w, &xts);
        h.add_outer(eps * eps * n / (wn * wn) - eps * q / (wn * wn * wn), w, w);
        let diag = eps * q / wn;
        for j in 0..d {
            h.set(j, j, h.get(j, j) + diag);
        }
        Ok(h)
    }

    /// Curvature v^T H v at a smooth point, split into its two nonnegative
    /// certificates. v must be a unit vector.
    pub fn curvature_probe(&self, w: &Vector, v: &Vector) -> Result<CurvatureProbe> {
        self.check_dim(w, "curvature point")?;
        self.check_dim(v, "curvature direction")?;
        if (v.norm(Norm::L2) - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParam {
                what: "probe direction",
                detail: "must be a unit vector".into(),
            });
        }
        let wn = w.norm(Norm::L2);
        if wn <= ORIGIN_TOL {
            return Err(Error::NonSmooth { detail: "curvature at the origin" });
        }
        let r = self.residual(w);
        let tol = self.tie_tolerance();
        if r.iter().any(|x| x.abs() <= tol) {
            return Err(Error::NonSmooth { detail: "residual tie on a cell boundary" });
        }
        let s = Vector::from_fn(r.len(), |i| if r[i] >= 0.0 { 1.0 } else { -1.0 });
        let eps = self.epsilon;
        let n = self.n() as f64;
        let wv = w.dot(v);

        let mut z = self.x.matvec(v);
        z.add_scaled(eps * wv / wn, &s);
        let data_term = z.dot(&z);

        let cos2 = (wv / wn) * (wv / wn);
        let alignment_term = eps * (r.norm(Norm::L1) / wn + eps * n) * (1.0 - cos2);

        Ok(CurvatureProbe { data_term, alignment_term, value: data_term + alignment_term })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig_values;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_one_spec(eps: f64) -> RobustLossSpec {
        let prob = SyntheticProblem::generate(1, 1).unwrap();
        RobustLossSpec::for_problem(&prob, eps).unwrap()
    }

    fn random_spec(rng: &mut ChaCha8Rng) -> RobustLossSpec {
        let n = rng.random_range(2..6);
        let d = rng.random_range(2..8);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y = Vector::from_fn(n, |_| if rng.random::<bool>() { 1.0 } else { -1.0 });
        RobustLossSpec::new(Matrix::from_rows(&rows).unwrap(), y, rng.random_range(0.2..2.0))
            .unwrap()
    }

    /// Random point that avoids cell boundaries and the origin.
    fn random_smooth_point(spec: &RobustLossSpec, rng: &mut ChaCha8Rng) -> Vector {
        loop {
            let w = Vector::from_fn(spec.dim(), |_| rng.random_range(-2.0..2.0));
            if spec.is_smooth_at(&w)
                && spec.residual(&w).iter().all(|r| r.abs() > 1e-3)
                && w.norm(Norm::L2) > 1e-2
            {
                return w;
            }
        }
    }

    #[test]
    fn loss_hand_values_on_small_problem() {
        let spec = one_one_spec(1.0);
        // w = e1 interpolates, so only the ridge term survives.
        let mut e1 = Vector::zeros(spec.dim());
        e1[0] = 1.0;
        assert!((spec.loss(&e1).unwrap() - 1.0).abs() < 1e-15);
        // w = 0 leaves only the data term 1/2 ||y||^2.
        let w0 = Vector::zeros(spec.dim());
        assert!((spec.loss(&w0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loss_equals_per_sample_maximization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let spec = random_spec(&mut rng);
            let w = Vector::from_fn(spec.dim(), |_| rng.random_range(-3.0..3.0));
            let r = spec.residual(&w);
            let wn = w.norm(Norm::L2);
            let per_sample: f64 = r
                .iter()
                .map(|ri| {
                    let m = ri.abs() + spec.epsilon() * wn;
                    0.5 * m * m
                })
                .sum();
            let loss = spec.loss(&w).unwrap();
            assert!((loss - per_sample).abs() <= 1e-12 * (1.0 + loss), "identity violated");
            // The maximizing perturbation for sample i moves along
            // sign(r_i) w / ||w||; evaluating there reproduces the loss.
            if wn > 1e-9 {
                let attacked: f64 = (0..spec.n())
                    .map(|i| {
                        let xi = spec.x().row_vector(i);
                        let sign = if r[i] >= 0.0 { 1.0 } else { -1.0 };
                        let mut xp = xi.clone();
                        xp.add_scaled(spec.epsilon() * sign / wn, &w);
                        let v = xp.dot(&w) - spec.y()[i];
                        0.5 * v * v
                    })
                    .sum();
                assert!((loss - attacked).abs() <= 1e-10 * (1.0 + loss), "witness mismatch");
            }
        }
    }

    #[test]
    fn signature_sign_convention() {
        let spec = one_one_spec(0.5);
        let w0 = Vector::zeros(spec.dim());
        // Residual at 0 is -y, and sign(0) = +1 never appears here since
        // labels are nonzero: s = -y.
        let s = spec.signature(&w0).unwrap();
        for i in 0..spec.n() {
            assert_eq!(s[i], -spec.y()[i]);
        }
        // An interpolating point has residual 0: signature all +1.
        let mut e1 = Vector::zeros(spec.dim());
        e1[0] = 1.0;
        let s = spec.signature(&e1).unwrap();
        assert!(s.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn gradient_refuses_non_smooth_points() {
        let spec = one_one_spec(1.0);
        let w0 = Vector::zeros(spec.dim());
        assert!(matches!(spec.gradient(&w0), Err(Error::NonSmooth { .. })));
        // Interpolating point: every residual ties.
        let mut e1 = Vector::zeros(spec.dim());
        e1[0] = 1.0;
        assert!(matches!(spec.gradient(&e1), Err(Error::NonSmooth { .. })));
        // Subgradient is total on both.
        assert!(spec.subgradient(&w0).is_ok());
        assert!(spec.subgradient(&e1).is_ok());
    }

    #[test]
    fn subgradient_at_origin_is_data_term_only() {
        let spec = one_one_spec(0.7);
        let g = spec.subgradient(&Vector::zeros(spec.dim())).unwrap();
        // -X^T y plus eps * 0 * X^T s = -X^T y.
        let expect = spec.x().tr_matvec(spec.y()).scaled(-1.0);
        for j in 0..spec.dim() {
            assert!((g[j] - expect[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let spec = random_spec(&mut rng);
            let w = random_smooth_point(&spec, &mut rng);
            let g = spec.gradient(&w).unwrap();
            let h = 1e-6;
            for j in 0..spec.dim() {
                let mut wp = w.clone();
                wp[j] += h;
                let mut wm = w.clone();
                wm[j] -= h;
                let fd = (spec.loss(&wp).unwrap() - spec.loss(&wm).unwrap()) / (2.0 * h);
                let scale = g[j].abs().max(1.0);
                assert!((fd - g[j]).abs() <= 1e-5 * scale, "coord {j}: fd {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let spec = random_spec(&mut rng);
            let w = random_smooth_point(&spec, &mut rng);
            let h = spec.hessian(&w).unwrap();
            for a in 0..spec.dim() {
                for b in 0..spec.dim() {
                    assert!((h.get(a, b) - h.get(b, a)).abs() < 1e-12, "asymmetry at ({a},{b})");
                }
            }
            let step = 1e-5;
            for j in 0..spec.dim() {
                let mut wp = w.clone();
                wp[j] += step;
                let mut wm = w.clone();
                wm[j] -= step;
                // Stay inside the cell: skip the rare probe that crosses.
                if !(spec.is_smooth_at(&wp) && spec.is_smooth_at(&wm)) {
                    continue;
                }
                let gp = spec.gradient(&wp).unwrap();
                let gm = spec.gradient(&wm).unwrap();
                for i in 0..spec.dim() {
                    let fd = (gp[i] - gm[i]) / (2.0 * step);
                    let scale = h.get(i, j).abs().max(1.0);
                    assert!(
                        (fd - h.get(i, j)).abs() <= 1e-4 * scale,
                        "H({i},{j}): fd {fd} vs {}",
                        h.get(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_probe_matches_quadratic_form_and_stays_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let spec = random_spec(&mut rng);
            let w = random_smooth_point(&spec, &mut rng);
            let h = spec.hessian(&w).unwrap();
            for _ in 0..20 {
                let mut v = Vector::from_fn(spec.dim(), |_| rng.random_range(-1.0..1.0));
                let n = v.norm(Norm::L2);
                if n < 1e-6 {
                    continue;
                }
                v.scale(1.0 / n);
                let probe = spec.curvature_probe(&w, &v).unwrap();
                let direct = v.dot(&h.matvec(&v));
                assert!(
                    (probe.value - direct).abs() <= 1e-8 * direct.abs().max(1.0),
                    "probe {} vs direct {direct}",
                    probe.value
                );
                assert!(probe.data_term >= -1e-10);
                assert!(probe.alignment_term >= -1e-10);
            }
        }
    }

    #[test]
    fn hessian_positive_semidefinite_in_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..15 {
            let spec = random_spec(&mut rng);
            let w = random_smooth_point(&spec, &mut rng);
            let h = spec.hessian(&w).unwrap();
            let eig = sym_eig_values(&h);
            let scale = eig.last().unwrap().abs().max(1.0);
            assert!(eig[0] >= -1e-8 * scale, "negative eigenvalue {}", eig[0]);
        }
    }

    #[test]
    fn strict_positivity_away_from_the_singular_cell() {
        // In a cell with s != -y the loss is strictly convex.
        let spec = one_one_spec(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut found = 0;
        while found < 10 {
            let w = random_smooth_point(&spec, &mut rng);
            let s = spec.signature(&w).unwrap();
            let neg_y = spec.y().scaled(-1.0);
            if s == neg_y {
                continue;
            }
            found += 1;
            let eig = sym_eig_values(&spec.hessian(&w).unwrap());
            assert!(eig[0] > 1e-10, "cell with s != -y not strictly convex: {}", eig[0]);
        }
    }

    #[test]
    fn probe_rejects_non_unit_directions() {
        let spec = one_one_spec(1.0);
        let w = Vector::from_fn(spec.dim(), |j| 0.1 * (j as f64 + 1.0));
        let v = Vector::from_fn(spec.dim(), |_| 1.0);
        assert!(matches!(spec.curvature_probe(&w, &v), Err(Error::InvalidParam { .. })));
    }

    #[test]
    fn constructor_validation() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let y = Vector::new(vec![1.0]).unwrap();
        assert!(RobustLossSpec::new(x.clone(), y.clone(), 0.0).is_err());
        assert!(RobustLossSpec::new(x.clone(), y.clone(), -1.0).is_err());
        let y2 = Vector::new(vec![1.0, -1.0]).unwrap();
        assert!(RobustLossSpec::new(x, y2, 1.0).is_err());
    }
}
