//! Shared fixtures for the criterion benchmarks.

use nalgebra::DMatrix;
use slsnet::{network_plant, Graph, PlantModel, SupportMask, SynthesisProblem};

/// Chain plant with the default couplings used across the benchmarks.
pub fn chain_plant(n: usize) -> PlantModel {
    let g = Graph::chain(n).expect("valid chain");
    network_plant(&g, 0.5, 0.2, 1.0, 1.0).expect("valid plant")
}

/// Synthesis instance on a chain, dense or `d`-hop localized.
pub fn chain_problem(n: usize, horizon: usize, d: Option<usize>) -> SynthesisProblem {
    let g = Graph::chain(n).expect("valid chain");
    let plant = chain_plant(n);
    let mask = match d {
        None => SupportMask::dense(n, n, horizon).expect("valid mask"),
        Some(d) => SupportMask::locality(&g, &plant, d, horizon).expect("valid mask"),
    };
    SynthesisProblem::new(
        plant,
        horizon,
        DMatrix::identity(n, n),
        DMatrix::identity(n, n),
        mask,
    )
    .expect("valid problem")
}
