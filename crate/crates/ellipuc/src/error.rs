//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument left its admissible range (modulus outside
    /// `(0, 1)`, non-positive step, nome outside `(0, 1)`, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The step `w` sits on (or numerically indistinguishable from) the
    /// degeneration lattice: `sn(w(s+1))` vanishes for the reported
    /// index, so the elliptic binomial coefficients are undefined.
    #[error("degenerate step: sn(w({} + 1)) vanishes", s)]
    Degenerate { s: usize },

    /// `|a_index| = 1`: the reflection-coefficient sequence terminates
    /// and only finitely many orthogonal polynomials exist.  Raised when
    /// a caller asks for the infinite regime anyway.
    #[error("finite case: |a_{index}| = 1, the family terminates at degree {}", index + 1)]
    FiniteCase { index: usize },

    /// A Toeplitz determinant in the determinantal construction is too
    /// close to zero for the quotient formula to be trustworthy.
    #[error("near-singular Toeplitz determinant at size {n}")]
    NearSingular { n: usize },

    /// Levinson recursion produced `|a_index| >= 1` from moments that
    /// were supposed to be positive definite.
    #[error("positivity lost at step {index}: reflection coefficient left (-1, 1)")]
    PositivityLoss { index: usize },

    /// A measure/profile transform hit a parameter point where it is not
    /// defined (zero denominator in a weight, vanishing normalisation).
    #[error("degenerate transform: {0}")]
    DegenerateTransform(String),

    /// Best-approximation search needs convergents beyond the computed
    /// continued-fraction depth.
    #[error("continued fraction too shallow: extend the expansion depth")]
    ExtendDepth,

    /// A configuration value (CLI flag, profile file) failed validation.
    #[error("bad configuration for `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    /// Shorthand for a [`Error::Domain`] value.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Shorthand for a [`Error::Config`] value.
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
