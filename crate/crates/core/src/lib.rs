//! Semi-discrete optimal transport and the Dirichlet problem for the
//! discrete Monge-Ampere equation in the plane.
//!
//! Given distinct sites `p_i`, a convex domain with a positive density and
//! target masses `A_i`, the solver finds heights `h` such that the cells of
//! the max-affine function `u_h(x) = max_i (x . p_i + h_i)` carry exactly the
//! prescribed masses. The heights minimise a convex energy whose gradient is
//! the vector of cell masses minus targets; a damped Newton method keeps
//! every iterate inside the set where all cells are nonempty.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `parallel` to build the
//! cells of a diagram on a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dmae;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod measure;
pub mod oracle;
pub mod power_diagram;
pub mod solver;

pub use energy::{EnergyReport, OtProblem, TargetMeasure};
pub use error::{Error, Result};
pub use geometry::{HalfPlane, Point2, Polygon, Segment};
pub use measure::{Density, GridDensity, MeasureVector};
pub use power_diagram::{build_diagram, PowerDiagram, SiteSet};
pub use solver::{solve_ot, SolveResult, SolverConfig, Termination};
