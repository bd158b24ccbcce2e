//! Sparsity (locality) constraints on the closed-loop response.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::plant::PlantModel;
use crate::response::SystemResponse;

/// Boolean support pattern for the response pair, one `n x n` state mask and
/// one `m x n` input mask for each tap `tau = 1..=T`.
///
/// Entry `(i, j)` of `x_at(tau)` states whether disturbance site `j` may
/// influence state `i` after `tau` steps. Feasibility of the synthesis
/// problem requires the diagonal of `x_at(1)` to be true, since the first
/// state tap is pinned to the identity; constructors here always satisfy
/// that, but the solver re-checks it and reports infeasibility otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    mask_x: Vec<DMatrix<bool>>,
    mask_u: Vec<DMatrix<bool>>,
}

impl SupportMask {
    /// Mask from explicit per-tap patterns.
    pub fn new(mask_x: Vec<DMatrix<bool>>, mask_u: Vec<DMatrix<bool>>) -> Result<Self> {
        if mask_x.is_empty() || mask_x.len() != mask_u.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask needs matching nonempty tap lists, got {} state and {} input taps",
                mask_x.len(),
                mask_u.len()
            )));
        }
        let n = mask_x[0].nrows();
        let m = mask_u[0].nrows();
        for mx in &mask_x {
            if mx.shape() != (n, n) {
                return Err(Error::DimensionMismatch(
                    "inconsistent state mask shapes".into(),
                ));
            }
        }
        for mu in &mask_u {
            if mu.shape() != (m, n) {
                return Err(Error::DimensionMismatch(
                    "inconsistent input mask shapes".into(),
                ));
            }
        }
        Ok(Self { mask_x, mask_u })
    }

    /// Unconstrained support: every entry allowed at every tap.
    pub fn dense(n_states: usize, n_inputs: usize, horizon: usize) -> Result<Self> {
        if n_states == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(
                "dense mask needs at least one state and one tap".into(),
            ));
        }
        let mx = DMatrix::from_element(n_states, n_states, true);
        let mu = DMatrix::from_element(n_inputs, n_states, true);
        Ok(Self {
            mask_x: vec![mx; horizon],
            mask_u: vec![mu; horizon],
        })
    }

    /// `d`-hop locality on `graph`: entry `(i, j)` is allowed iff the owning
    /// nodes of coordinate `i` and disturbance site `j` are at most `d` hops
    /// apart. Pairs in different components stay disallowed for every `d`.
    pub fn locality(graph: &Graph, plant: &PlantModel, d: usize, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidArgument(
                "mask horizon must be at least 1".into(),
            ));
        }
        if graph.n_nodes() != plant.n_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes but plant has {}",
                graph.n_nodes(),
                plant.n_nodes()
            )));
        }
        let n = plant.n_states();
        let m = plant.n_inputs();
        let state_owner = plant.state_owner();
        let input_owner = plant.input_owner();
        let mut mx = DMatrix::from_element(n, n, false);
        let mut mu = DMatrix::from_element(m, n, false);
        for j in 0..n {
            let dist = graph.distances_from(state_owner[j])?;
            let near = |owner: usize| matches!(dist[owner], Some(h) if h <= d);
            for i in 0..n {
                mx[(i, j)] = near(state_owner[i]);
            }
            for k in 0..m {
                mu[(k, j)] = near(input_owner[k]);
            }
        }
        Ok(Self {
            mask_x: vec![mx; horizon],
            mask_u: vec![mu; horizon],
        })
    }

    pub fn horizon(&self) -> usize {
        self.mask_x.len()
    }

    pub fn n_states(&self) -> usize {
        self.mask_x[0].nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.mask_u[0].nrows()
    }

    /// State pattern at tap `tau` (1-based).
    pub fn x_at(&self, tau: usize) -> &DMatrix<bool> {
        &self.mask_x[tau - 1]
    }

    /// Input pattern at tap `tau` (1-based).
    pub fn u_at(&self, tau: usize) -> &DMatrix<bool> {
        &self.mask_u[tau - 1]
    }

    /// Count of allowed (state, input) entries across all taps.
    pub fn allowed_entries(&self) -> (usize, usize) {
        let count = |ms: &[DMatrix<bool>]| {
            ms.iter()
                .map(|m| m.iter().filter(|&&v| v).count())
                .sum::<usize>()
        };
        (count(&self.mask_x), count(&self.mask_u))
    }

    /// Whether every entry allowed by `self` is also allowed by `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.mask_x.len() == other.mask_x.len()
            && self.n_states() == other.n_states()
            && self.n_inputs() == other.n_inputs()
            && self
                .mask_x
                .iter()
                .zip(&other.mask_x)
                .chain(self.mask_u.iter().zip(&other.mask_u))
                .all(|(a, b)| a.iter().zip(b.iter()).all(|(&x, &y)| y || !x))
    }

    /// Number of response entries that are nonzero outside the mask.
    pub fn violations(&self, phi: &SystemResponse) -> Result<usize> {
        if phi.horizon() != self.horizon()
            || phi.n_states() != self.n_states()
            || phi.n_inputs() != self.n_inputs()
        {
            return Err(Error::DimensionMismatch(format!(
                "mask is {}x{} over {} taps but response is {}x{} over {}",
                self.n_states(),
                self.n_inputs(),
                self.horizon(),
                phi.n_states(),
                phi.n_inputs(),
                phi.horizon()
            )));
        }
        let mut count = 0;
        for tau in 1..=self.horizon() {
            count += phi
                .x_at(tau)
                .iter()
                .zip(self.x_at(tau).iter())
                .chain(phi.u_at(tau).iter().zip(self.u_at(tau).iter()))
                .filter(|&(&v, &ok)| !ok && v != 0.0)
                .count();
        }
        Ok(count)
    }
}
