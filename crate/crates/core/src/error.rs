use thiserror::Error;

/// Everything that can go wrong inside the solver core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sites {0} and {1} coincide")]
    DuplicateSites(usize, usize),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("density is not strictly positive on the domain")]
    NonPositiveDensity,
    #[error("invalid density: {0}")]
    InvalidDensity(&'static str),
    #[error("could not construct heights giving every cell positive area")]
    FeasibilityFailed,
    #[error("target {0} is not strictly positive")]
    NonPositiveTarget(usize),
    #[error("targets sum to {target_sum} but the domain carries mass {mass}")]
    Unbalanced { target_sum: f64, mass: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("reduced hessian is singular")]
    SingularHessian,
    #[error("line search step fell below the minimum after {iterations} iterations")]
    StepTooSmall { iterations: usize },
    #[error("no convergence after {0} iterations")]
    MaxItersExceeded(usize),
    #[error("boundary vertex {0} is not in strictly convex position")]
    InvalidBoundary(usize),
    #[error("interior point {0} is not strictly inside the boundary polygon")]
    InteriorPointOutside(usize),
    #[error("point is on the boundary of the subdivision")]
    BoundaryVertex,
    #[error("point is not a vertex of the subdivision")]
    NotAVertex,
    #[error("all sites are collinear")]
    CollinearSites,
    #[error("transport problem is infeasible: supply {supply} vs demand {demand}")]
    Infeasible { supply: f64, demand: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
