//! Distributed controller realization of a synthesized response.
//!
//! At each step the controller reconstructs the disturbance that acted one
//! step ago as the gap between the measured state and its own prediction,
//! then drives the input from the window of reconstructed disturbances:
//!
//! ```text
//!   x_hat[t] = sum_{s=2}^{T} phi_x[s] delta[t+1-s]
//!   delta[t] = x[t] - x_hat[t]
//!   u[t]     = sum_{s=1}^{T} phi_u[s] delta[t+1-s]
//! ```
//!
//! Under an exact plant model `delta[t]` equals the disturbance applied at
//! step `t-1` (and `delta[0]` the initial state), so the closed loop
//! realizes the synthesized FIR response. Only the last `T-1` disturbance
//! estimates are retained, in a fixed-capacity deque that never reallocates
//! after construction.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::plant::PlantModel;
use crate::response::SystemResponse;
use crate::synthesis::achievability_residual;
use crate::tol;

/// Runtime state of the disturbance-feedback controller.
#[derive(Debug, Clone)]
pub struct Controller {
    phi: SystemResponse,
    /// `history[k]` holds `delta[t-1-k]`; at most `T-1` entries.
    history: VecDeque<DVector<f64>>,
    last_delta: Option<DVector<f64>>,
    t: usize,
}

impl Controller {
    /// Wraps a response for execution against `plant`, rejecting responses
    /// whose achievability residual exceeds the crate tolerance (such a
    /// response would not realize the closed loop it promises).
    pub fn new(plant: &PlantModel, phi: SystemResponse) -> Result<Self> {
        let worst = achievability_residual(plant, &phi)?
            .into_iter()
            .fold(0.0f64, f64::max);
        if worst > tol::ACHIEVABILITY_TOL {
            return Err(Error::NotAchievable {
                residual: worst,
                tol: tol::ACHIEVABILITY_TOL,
            });
        }
        let window = phi.horizon() - 1;
        Ok(Self {
            history: VecDeque::with_capacity(window.max(1)),
            last_delta: None,
            t: 0,
            phi,
        })
    }

    /// Consumes the measured state at the current step and returns the input
    /// to apply.
    pub fn step(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.phi.n_states();
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "state has length {}, controller expects {n}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: self.t });
        }
        let mut x_hat = DVector::zeros(n);
        for (k, delta) in self.history.iter().enumerate() {
            x_hat += self.phi.x_at(k + 2) * delta;
        }
        let delta = x - x_hat;
        let mut u = self.phi.u_at(1) * &delta;
        for (k, past) in self.history.iter().enumerate() {
            u += self.phi.u_at(k + 2) * past;
        }
        if self.phi.horizon() > 1 {
            if self.history.len() == self.phi.horizon() - 1 {
                self.history.pop_back();
            }
            self.history.push_front(delta.clone());
        }
        self.last_delta = Some(delta);
        self.t += 1;
        Ok(u)
    }

    /// Steps taken since construction or the last reset.
    pub fn timestep(&self) -> usize {
        self.t
    }

    /// Disturbance estimate formed at the most recent step.
    pub fn last_delta(&self) -> Option<&DVector<f64>> {
        self.last_delta.as_ref()
    }

    pub fn response(&self) -> &SystemResponse {
        &self.phi
    }

    /// Forgets all history, returning to the fresh state `t = 0`.
    pub fn reset(&mut self) {
        self.history.clear();
        self.last_delta = None;
        self.t = 0;
    }
}
