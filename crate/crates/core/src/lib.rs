//! Synthesis of localized state-feedback controllers for linear systems
//! interconnected over a network.
//!
//! The toolkit optimizes the closed-loop disturbance-to-state and
//! disturbance-to-input maps directly, as a finite impulse response subject
//! to linear achievability constraints and an optional locality (sparsity)
//! pattern, then realizes the result as a distributed controller that each
//! node can execute with information from its graph neighborhood. A
//! Riccati-based centralized solution and a seeded closed-loop simulator
//! serve as references for validating the synthesized responses.

pub mod controller;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod mask;
pub mod plant;
pub mod response;
pub mod riccati;
pub mod sim;
pub mod synthesis;
pub mod tol;

pub use controller::Controller;
pub use error::{Error, Result};
pub use graph::Graph;
pub use mask::SupportMask;
pub use plant::{network_plant, PlantModel};
pub use response::SystemResponse;
pub use riccati::{dare_solve, lqg_infinite_cost, RiccatiSolution};
pub use sim::{DisturbanceSpec, Trajectory};
pub use synthesis::{
    achievability_residual, assemble, extract_column_problem, h2_cost, solve_column, synthesize,
    ColumnProblem, ColumnSolution, SynthesisProblem,
};
