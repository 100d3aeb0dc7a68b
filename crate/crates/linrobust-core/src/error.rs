//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vector/matrix dimensions do not line up.
    DimMismatch { what: &'static str, expected: usize, got: usize },
    /// An input contained NaN or infinity.
    NonFinite { what: &'static str },
    /// An input that must be non-empty was empty.
    Empty { what: &'static str },
    /// A parameter was outside its legal range.
    InvalidParam { what: &'static str, detail: String },
    /// The point sits on the decision boundary; no margin radius exists.
    OnBoundary,
    /// Derivative requested at a non-smooth point (a residual tie, or w = 0).
    NonSmooth { detail: &'static str },
    /// Training loss exceeded the divergence guard.
    Diverged { step: usize, loss: f64 },
    /// Random label sampling produced an empty class on every retry.
    EmptyClass { attempts: u32 },
    /// An iterative solver ran out of budget before reaching its tolerance.
    NoConvergence { what: &'static str, residual: f64 },
    /// Operation only applies to other convexity cases.
    WrongCase { detail: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch { what, expected, got } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, got {got}")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::Empty { what } => write!(f, "{what} must be non-empty"),
            Error::InvalidParam { what, detail } => write!(f, "invalid {what}: {detail}"),
            Error::OnBoundary => write!(f, "point lies on the decision boundary"),
            Error::NonSmooth { detail } => write!(f, "non-smooth point: {detail}"),
            Error::Diverged { step, loss } => {
                write!(f, "training diverged at step {step} (loss {loss:e})")
            }
            Error::EmptyClass { attempts } => {
                write!(f, "label sampling left a class empty after {attempts} attempts")
            }
            Error::NoConvergence { what, residual } => {
                write!(f, "{what} did not converge (residual {residual:e})")
            }
            Error::WrongCase { detail } => write!(f, "{detail}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
