//! Crate-wide error type.
//!
//! Diagnostics are carried as `f64` regardless of the working scalar so the
//! variants stay object-safe and printable without generic plumbing.

/// Errors produced by the modal analysis, synthesis and simulation layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A physical or numerical parameter violated its domain.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },

    /// The characteristic-equation scan found fewer sign changes than modes
    /// requested before hitting the overflow cap on `beta * l`.
    #[error(
        "root search exhausted: {found} roots found below beta*l = {cap}, {requested} requested"
    )]
    RootSearchExhausted {
        found: usize,
        requested: usize,
        cap: f64,
    },

    /// The 4x4 boundary-condition system did not have a one-dimensional
    /// nullspace at the given spatial frequency.
    #[error("degenerate nullspace at beta = {beta}: nullity {nullity} (expected 1)")]
    DegenerateNullspace { beta: f64, nullity: usize },

    /// The mass matrix is not invertible.
    #[error("singular mass matrix: diagonal entry {index} is {value:e}")]
    SingularMass { index: usize, value: f64 },

    /// A vector or matrix had the wrong dimension for the requested operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The scalar `Gamma * B` is too close to zero to invert.
    #[error("Gamma * B is numerically singular: |Gamma * B| = {value:e}")]
    SingularGammaB { value: f64 },

    /// The observer dynamics matrix shares an eigenvalue with the plant, so
    /// the Sylvester-type equation is unsolvable or ill-conditioned.
    #[error("observer and plant spectra overlap: minimum eigenvalue gap {gap:e}")]
    SpectraOverlap { gap: f64 },

    /// The requested functional gain does not lie in the row span of the
    /// stacked output and Sylvester-solution matrices.
    #[error(
        "functional gain not realizable: rank [C; T] = {rank_ct}, rank [C; T; F] = {rank_ctf}"
    )]
    Unrealizable { rank_ct: usize, rank_ctf: usize },

    /// The composite closed-loop matrix has an eigenvalue outside the open
    /// left half-plane.
    #[error("composite system unstable: eigenvalue with real part {max_re}")]
    CompositeUnstable { max_re: f64 },

    /// A simulated state left the admissible region or became non-finite.
    #[error("simulation diverged at t = {t}: max |state| = {magnitude:e}")]
    Divergence { t: f64, magnitude: f64 },

    /// The integration step does not resolve the fastest retained mode.
    #[error("step too large: dt = {dt}, limit {limit} for the fastest mode")]
    StepTooLarge { dt: f64, limit: f64 },

    /// The sliding variable never entered the requested band.
    #[error("sliding variable never entered the band |sigma| <= {band:e}")]
    NeverReached { band: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
