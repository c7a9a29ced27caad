//! Masked-grid discretization of the Allen-Cahn energy, Dirichlet data
//! built from 1D connections, and the gradient-flow minimizers.

pub mod dirichlet;
pub mod domain;
pub mod field;
pub mod init;
pub mod solver;
pub mod sweep;

pub use dirichlet::{make_dirichlet, ArcSpec, BoundaryArc, DirichletData, DEFAULT_TRANSITION};
pub use domain::{BoundaryNode, Domain2D, NodeKind, Shape};
pub use field::{energy, energy_gradient, read_snapshot, Field, Snapshot};
pub use init::{initialize, InitialCondition};
pub use solver::{minimize, minimize_mass_constrained, Descent, SolveReport, SolverOptions, StopReason};
pub use sweep::{check_eps_list, epsilon_sweep, resolvability_floor, BoundarySetup, SweepSetup, SweepStep};
