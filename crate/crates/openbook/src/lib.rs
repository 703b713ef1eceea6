//! Knot Floer homology ranks of fibered knots, computed two independent ways.
//!
//! A fibered knot is presented by an *open book*: a compact surface with one
//! boundary circle (the *page*) together with a boundary-fixing
//! self-homeomorphism (the *monodromy*), given here as a word in Dehn twists
//! about the standard curves on the page.
//!
//! The crate computes, for the binding of such an open book:
//!
//! * the ranks of knot Floer homology in the bottom two Alexander gradings,
//!   combinatorially, from a *page diagram* — a pair of arc systems on the
//!   page whose intersection pattern plays the role of a Heegaard diagram
//!   ([`diagram`], [`floer`]);
//! * an independent prediction of the next-to-bottom rank from Nielsen
//!   fixed-point theory of the monodromy ([`fixedpoint`]);
//! * supporting machinery: exact curve arithmetic on surfaces ([`surface`]),
//!   the mapping-class side (twist words, homology action, classification,
//!   fractional boundary rotation — [`mapping`]), and chain-complex
//!   utilities over the two-element field ([`homalg`]).
//!
//! The two computations are linked by an exact-triangle structure which the
//! crate can also verify on concrete monodromies.

pub mod complex;
pub mod diagram;
pub mod fixedpoint;
pub mod floer;
pub mod guide;
pub mod homalg;
pub mod mapping;
mod nice;
pub mod surface;

/// Crate-wide error type.
///
/// The three variants deliberately mirror the process exit codes of the
/// command-line front end: invalid input (2), unsupported-but-valid
/// configuration (3), and violated internal invariants (4).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The input is malformed: out-of-range genus, unknown curve name,
    /// a grading outside the supported range, an inconsistent matrix, …
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The input is well-formed but outside what the algorithms cover
    /// (e.g. a reducible mapping class on the fixed-point side).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    /// An internal consistency check failed. Always a bug, never user error.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
