//! Classification of the robust loss's convexity regime.
//!
//! The loss is always convex. Whether it is *strictly* convex depends on how
//! the budget eps compares to the threshold theta = 1 / ||w_dag||_2, where
//! w_dag is the min-norm interpolator of (X, y):
//!
//! * inconsistent system: strictly convex for every eps;
//! * eps < theta: flat exactly on two segments through the origin, along the
//!   unit directions v = eps w_dag +/- u0 with u0 in the nullspace of X and
//!   ||u0|| = sqrt(1 - eps^2 ||w_dag||^2); each segment ends at v / eps,
//!   where the residual reaches zero;
//! * eps = theta: the two directions merge into one, w_dag / ||w_dag||;
//! * eps > theta: strictly convex.
//!
//! The flat-segment construction needs a nullspace direction. Data with full
//! column rank has none, so a consistent full-column-rank system below the
//! threshold is also strictly convex and is reported as `StrictConsistent`.

#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{min_norm_least_squares, nullspace_basis, Norm, Vector};
use crate::robust_loss::RobustLossSpec;

/// Relative residual above which (X, y) counts as inconsistent.
pub const CONSISTENCY_REL_TOL: f64 = 1e-8;

/// Relative half-width of the eps == theta tie band.
pub const THRESHOLD_TIE_REL: f64 = 1e-10;

/// A ray segment on which the loss restricted to it is affine (zero
/// curvature): {t * direction : 0 <= t <= 1/eps}.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSegment {
    /// Unit direction of the segment.
    pub direction: Vector,
    /// direction / eps — the far end, where the residual reaches zero.
    pub endpoint: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexityCase {
    /// y is not in the range of X: strictly convex for every budget.
    InconsistentStrict,
    /// eps below threshold with a nullspace available: flat on two segments.
    FlatTwoSegments { threshold: f64, segments: [FlatSegment; 2] },
    /// eps equals the threshold: flat on a single segment.
    FlatOneSegment { threshold: f64, segment: FlatSegment },
    /// Consistent but strictly convex: eps above the threshold, or no
    /// nullspace direction exists (full column rank), or y = 0.
    StrictConsistent { threshold: f64 },
}

impl ConvexityCase {
    pub fn case_id(&self) -> u8 {
        match self {
            ConvexityCase::InconsistentStrict => 1,
            ConvexityCase::FlatTwoSegments { .. } => 2,
            ConvexityCase::FlatOneSegment { .. } => 3,
            ConvexityCase::StrictConsistent { .. } => 4,
        }
    }

    /// The critical budget 1 / ||w_dag||, when the system is consistent.
    pub fn threshold(&self) -> Option<f64> {
        match self {
            ConvexityCase::InconsistentStrict => None,
            ConvexityCase::FlatTwoSegments { threshold, .. }
            | ConvexityCase::FlatOneSegment { threshold, .. }
            | ConvexityCase::StrictConsistent { threshold } => Some(*threshold),
        }
    }

    /// The zero-curvature segments, when any exist.
    pub fn segments(&self) -> &[FlatSegment] {
        match self {
            ConvexityCase::FlatTwoSegments { segments, .. } => segments,
            ConvexityCase::FlatOneSegment { segment, .. } => core::slice::from_ref(segment),
            _ => &[],
        }
    }

    pub fn is_strictly_convex(&self) -> bool {
        matches!(
            self,
            ConvexityCase::InconsistentStrict | ConvexityCase::StrictConsistent { .. }
        )
    }
}

pub fn classify_convexity(spec: &RobustLossSpec) -> Result<ConvexityCase> {
    let w_dag = min_norm_least_squares(spec.x(), spec.y())?;
    let y_norm = spec.y().norm(Norm::L2);
    let residual = spec.x().matvec(&w_dag).sub(spec.y()).norm(Norm::L2);
    if residual > CONSISTENCY_REL_TOL * y_norm {
        return Ok(ConvexityCase::InconsistentStrict);
    }
    let w_dag_norm = w_dag.norm(Norm::L2);
    if w_dag_norm <= 1e-300 {
        // y = 0: the loss is minimized at the origin and strictly convex.
        return Ok(ConvexityCase::StrictConsistent { threshold: f64::INFINITY });
    }
    let threshold = 1.0 / w_dag_norm;
    let eps = spec.epsilon();
    if (eps - threshold).abs() <= THRESHOLD_TIE_REL * threshold {
        let direction = w_dag.scaled(1.0 / w_dag_norm);
        let endpoint = direction.scaled(1.0 / eps);
        return Ok(ConvexityCase::FlatOneSegment {
            threshold,
            segment: FlatSegment { direction, endpoint },
        });
    }
    if eps > threshold {
        return Ok(ConvexityCase::StrictConsistent { threshold });
    }
    let null = nullspace_basis(spec.x());
    if null.is_empty() {
        return Ok(ConvexityCase::StrictConsistent { threshold });
    }
    // Among all valid nullspace offsets the representative uses the first
    // deterministic nullspace basis vector.
    let u = &null[0];
    let offset = (1.0 - eps * eps * w_dag_norm * w_dag_norm).sqrt();
    let make = |sign: f64| {
        let mut direction = w_dag.scaled(eps);
        direction.add_scaled(sign * offset, u);
        let endpoint = direction.scaled(1.0 / eps);
        FlatSegment { direction, endpoint }
    };
    Ok(ConvexityCase::FlatTwoSegments { threshold, segments: [make(1.0), make(-1.0)] })
}

/// The segments along which curvature vanishes, for the two flat cases.
/// Errors with `WrongCase` when the regime is strictly convex.
pub fn zero_curvature_directions(spec: &RobustLossSpec) -> Result<Vec<FlatSegment>> {
    match classify_convexity(spec)? {
        ConvexityCase::FlatOneSegment { segment, .. } => Ok(vec![segment]),
        ConvexityCase::FlatTwoSegments { segments, .. } => Ok(segments.into_iter().collect()),
        ConvexityCase::InconsistentStrict => {
            Err(Error::WrongCase { detail: "inconsistent data: strictly convex" })
        }
        ConvexityCase::StrictConsistent { .. } => {
            Err(Error::WrongCase { detail: "budget at or above the strict-convexity threshold" })
        }
    }
}
