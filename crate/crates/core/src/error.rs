use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not orthogonal (defect {0:e})")]
    NotOrthogonal(f64),
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("lattice basis is degenerate or has invalid rank")]
    DegenerateLattice,
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("point group enumeration did not close within {0} elements")]
    Diverged(usize),
    #[error("no finite order up to {0}")]
    NoFiniteOrder(u32),
    #[error("fitted linear part is not conformal (singular value ratio {0})")]
    NonConformal(f64),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("point lies on the image of the branch set")]
    BranchImage,
    #[error("periodic point is a branch image; no linearizer of the form h(x+u)")]
    BranchPoint,
    #[error("linear system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("steps do not contract geometrically (last ratio {0})")]
    NotContracting(f64),
    #[error("mean radius methods disagree (relative difference {0:.3e})")]
    MethodDisagreement(f64),
    #[error("poor power-law fit (max log deviation {0:e})")]
    PoorFit(f64),
    #[error("rescaled maps are not converging (discrepancies {0:?})")]
    NotConverging(Vec<f64>),
    #[error("degenerate Jacobian (det {0:e})")]
    DegenerateJacobian(f64),
    #[error("fixed point classification is inconclusive: {0}")]
    Inconclusive(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
