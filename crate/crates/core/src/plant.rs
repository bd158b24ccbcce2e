//! Discrete-time linear plant `x[t+1] = A x[t] + B u[t] + w[t]` partitioned
//! over the nodes of an interaction graph.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;

/// Plant matrices together with the ownership map from nodes to state and
/// input coordinates.
///
/// `node_state_index[v]` lists the global state indices owned by node `v`
/// (and likewise for inputs); together the lists partition `0..n` and
/// `0..m`. Nodes without actuation own an empty input list.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub sigma_w: DMatrix<f64>,
    pub node_state_index: Vec<Vec<usize>>,
    pub node_input_index: Vec<Vec<usize>>,
}

impl PlantModel {
    /// Validates shapes, the node partitions, and positive semidefiniteness
    /// of the disturbance covariance.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        sigma_w: DMatrix<f64>,
        node_state_index: Vec<Vec<usize>>,
        node_input_index: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "plant must have at least one state".into(),
            ));
        }
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows but A has {}",
                b.nrows(),
                n
            )));
        }
        if sigma_w.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "sigma_w must be {n}x{n}, got {}x{}",
                sigma_w.nrows(),
                sigma_w.ncols()
            )));
        }
        if node_state_index.len() != node_input_index.len() {
            return Err(Error::DimensionMismatch(format!(
                "state partition covers {} nodes but input partition covers {}",
                node_state_index.len(),
                node_input_index.len()
            )));
        }
        if node_state_index.is_empty() {
            return Err(Error::InvalidArgument(
                "plant must have at least one node".into(),
            ));
        }
        check_partition("state", &node_state_index, n)?;
        check_partition("input", &node_input_index, b.ncols())?;
        linalg::check_psd("sigma_w", &sigma_w)?;
        for (name, matrix) in [("A", &a), ("B", &b), ("sigma_w", &sigma_w)] {
            if matrix.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} contains non-finite entries"
                )));
            }
        }
        Ok(Self {
            a,
            b,
            sigma_w,
            node_state_index,
            node_input_index,
        })
    }

    /// Plant in which node `v` owns exactly state `v` and input `v`.
    pub fn scalar_nodes(a: DMatrix<f64>, b: DMatrix<f64>, sigma_w: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let states = (0..n).map(|i| vec![i]).collect::<Vec<_>>();
        let mut inputs = vec![Vec::new(); n.max(1)];
        for (k, slot) in inputs.iter_mut().take(m).enumerate() {
            *slot = vec![k];
        }
        Self::new(a, b, sigma_w, states, inputs)
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_nodes(&self) -> usize {
        self.node_state_index.len()
    }

    /// Owning node of each global state index.
    pub fn state_owner(&self) -> Vec<usize> {
        invert_partition(&self.node_state_index, self.n_states())
    }

    /// Owning node of each global input index.
    pub fn input_owner(&self) -> Vec<usize> {
        invert_partition(&self.node_input_index, self.n_inputs())
    }

    /// Whether every off-diagonal coupling in `A` and `B` connects nodes that
    /// are adjacent in `graph`.
    pub fn respects_topology(&self, graph: &Graph) -> Result<bool> {
        if graph.n_nodes() != self.n_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes but plant has {}",
                graph.n_nodes(),
                self.n_nodes()
            )));
        }
        let state_owner = self.state_owner();
        let input_owner = self.input_owner();
        for i in 0..self.n_states() {
            for j in 0..self.n_states() {
                let (vi, vj) = (state_owner[i], state_owner[j]);
                if vi != vj && self.a[(i, j)] != 0.0 && graph.hop_distance(vi, vj)? != Some(1) {
                    return Ok(false);
                }
            }
            for (k, &vk) in input_owner.iter().enumerate() {
                let vi = state_owner[i];
                if vi != vk && self.b[(i, k)] != 0.0 && graph.hop_distance(vi, vk)? != Some(1) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Homogeneous scalar-subsystem plant on `graph`: `A` carries
/// `self_coupling` on the diagonal and `neighbor_coupling` on every edge,
/// `B = b_scale * I`, and `sigma_w = sigma^2 * I`. The construction is
/// deterministic in its arguments.
pub fn network_plant(
    graph: &Graph,
    self_coupling: f64,
    neighbor_coupling: f64,
    b_scale: f64,
    sigma: f64,
) -> Result<PlantModel> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma must be nonnegative, got {sigma}"
        )));
    }
    for (name, v) in [
        ("self_coupling", self_coupling),
        ("neighbor_coupling", neighbor_coupling),
        ("b_scale", b_scale),
    ] {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite, got {v}"
            )));
        }
    }
    let n = graph.n_nodes();
    let mut a = DMatrix::from_diagonal_element(n, n, self_coupling);
    for &(i, j) in graph.edges() {
        a[(i, j)] = neighbor_coupling;
        a[(j, i)] = neighbor_coupling;
    }
    let b = DMatrix::from_diagonal_element(n, n, b_scale);
    let sigma_w = DMatrix::from_diagonal_element(n, n, sigma * sigma);
    PlantModel::scalar_nodes(a, b, sigma_w)
}

fn check_partition(kind: &str, partition: &[Vec<usize>], len: usize) -> Result<()> {
    let mut owner = vec![None; len];
    for (node, indices) in partition.iter().enumerate() {
        for &i in indices {
            if i >= len {
                return Err(Error::InvalidArgument(format!(
                    "{kind} index {i} out of range (dimension {len})"
                )));
            }
            if let Some(prev) = owner[i] {
                return Err(Error::InvalidArgument(format!(
                    "{kind} index {i} owned by both node {prev} and node {node}"
                )));
            }
            owner[i] = Some(node);
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(Error::InvalidArgument(format!(
            "{kind} index {i} not owned by any node"
        )));
    }
    Ok(())
}

fn invert_partition(partition: &[Vec<usize>], len: usize) -> Vec<usize> {
    let mut owner = vec![0; len];
    for (node, indices) in partition.iter().enumerate() {
        for &i in indices {
            owner[i] = node;
        }
    }
    owner
}
