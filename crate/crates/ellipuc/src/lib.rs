//! Orthogonal polynomials on the unit circle whose reflection coefficients
//! are Jacobi elliptic function values on an arithmetic lattice.
//!
//! For a modulus `0 < k < 1` and an argument step `w`, the sequences
//!
//! ```text
//! a_n = cn(w(n+1); k)   (n even),   a_n = -dn(w(n+1); k)   (n odd)
//! ```
//!
//! (and the companion family with `cn` and `dn` exchanged) are valid
//! reflection coefficients: every `a_n` lies in `(-1, 1)` whenever `w`
//! avoids the degeneration lattice, and the associated Toeplitz
//! determinants stay positive.  The resulting monic polynomials have
//! closed-form coefficients built from elliptic binomial coefficients,
//! are orthogonal with respect to an explicit measure supported on a
//! countable dense set of points of the unit circle (a geometric-weight
//! Fourier series of `cn` or `dn`), and degenerate in the limits
//! `k -> 0` and `k -> 1` to trigonometric and `q`-hypergeometric
//! families.  Rational `w/K` collapses everything to a finite measure on
//! the vertices of a regular polygon.
//!
//! The crate is organised bottom-up:
//!
//! * [`elliptic`] — real Jacobi functions `sn`, `cn`, `dn`, complete
//!   integrals, nome/modulus conversions, and a Landen-type transform;
//! * [`ebc`] — elliptic binomial coefficients and their Pascal-style
//!   recurrences;
//! * [`circle`] — four independent constructions of the polynomials
//!   (recursive, explicit, determinantal, Levinson) plus the functional
//!   orthogonality and sign-reflection transports;
//! * [`measures`] — the discrete orthogonality measures and Gram/moment
//!   verification against them;
//! * [`ederiv`] — the degree-lowering "elliptic derivative" operator and
//!   its action connecting the two families;
//! * [`hyperbolic`] — the `k -> 1` limit in explicit basic-hypergeometric
//!   form, with its absolutely continuous weight;
//! * [`polygon`] — the finite case `w = K/N` with closed-form weights;
//! * [`interval`] — unit-interval polynomials obtained from the circle
//!   family, their three-term recurrences and quadratic decompositions;
//! * [`scheme`] — the general construction scheme for even periodic
//!   moment profiles, continued fractions and best rational
//!   approximations of `w`, and the sparsity phenomenon for badly
//!   approximable `w`.
//!
//! # Example
//!
//! ```
//! use ellipuc::elliptic::EllipticContext;
//! use ellipuc::circle::{reflection_cn, szego_build};
//!
//! let ctx = EllipticContext::new(0.6).unwrap();
//! let a = reflection_cn(&ctx, 0.31, 8).unwrap();
//! let phi = szego_build(&a, 8);
//! // Monic of degree 8, and every reflection coefficient is inside (-1, 1).
//! assert_eq!(phi.coeffs.len(), 9);
//! assert!((phi.coeffs[8] - 1.0).abs() < 1e-15);
//! assert!(a.iter().all(|x| x.abs() < 1.0));
//! ```

pub mod circle;
mod dd;
pub mod ebc;
pub mod ederiv;
pub mod elliptic;
pub mod error;
pub mod hyperbolic;
pub mod interval;
pub mod measures;
pub mod polygon;
pub mod scheme;

pub use error::{Error, Result};
