//! Closed-loop simulation: seeded disturbance generation, rollouts,
//! quadratic costs, and Monte Carlo estimates.
//!
//! Disturbance indexing follows the response convention: the draw at index
//! `-1` becomes the initial state, and the draw at index `t` is added when
//! stepping from `x[t]` to `x[t+1]`. All randomness flows through a
//! counter-based generator seeded explicitly, with one independent stream
//! per rollout, so every result is reproducible byte for byte regardless of
//! thread count or platform.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::controller::Controller;
use crate::error::{Error, Result};
use crate::linalg;
use crate::plant::PlantModel;
use crate::response::SystemResponse;

/// Norm defining the ball for bounded disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallNorm {
    Two,
    Inf,
}

/// Disturbance process driving a rollout.
#[derive(Debug, Clone)]
pub enum DisturbanceSpec {
    /// No disturbances and a zero initial state.
    Zeros,
    /// Iid draws from `N(0, sigma_w)`, including the initial state.
    Gaussian { sigma_w: DMatrix<f64>, seed: u64 },
    /// A single pulse of the given magnitude on every state owned by
    /// `node`, at step `time`; `time = -1` places it in the initial state.
    Impulse {
        node: usize,
        time: i64,
        magnitude: f64,
    },
    /// Iid draws uniform over the ball of the given radius.
    UniformBounded {
        bound: f64,
        norm: BallNorm,
        seed: u64,
    },
}

impl DisturbanceSpec {
    pub fn validate(&self, plant: &PlantModel) -> Result<()> {
        match self {
            Self::Zeros => Ok(()),
            Self::Gaussian { sigma_w, .. } => {
                let n = plant.n_states();
                if sigma_w.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!(
                        "sigma_w must be {n}x{n}, got {}x{}",
                        sigma_w.nrows(),
                        sigma_w.ncols()
                    )));
                }
                linalg::check_psd("sigma_w", sigma_w)
            }
            Self::Impulse {
                node,
                time,
                magnitude,
            } => {
                if *node >= plant.n_nodes() {
                    return Err(Error::VertexOutOfRange {
                        vertex: *node,
                        n_nodes: plant.n_nodes(),
                    });
                }
                if *time < -1 {
                    return Err(Error::InvalidArgument(format!(
                        "impulse time must be >= -1, got {time}"
                    )));
                }
                if !magnitude.is_finite() {
                    return Err(Error::InvalidArgument(
                        "impulse magnitude must be finite".into(),
                    ));
                }
                Ok(())
            }
            Self::UniformBounded { bound, .. } => {
                if !(bound.is_finite() && *bound >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "uniform bound must be finite and nonnegative, got {bound}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Same process with the embedded seed replaced (no-op for the
    /// deterministic variants).
    fn with_seed(&self, seed: u64) -> Self {
        match self.clone() {
            Self::Gaussian { sigma_w, .. } => Self::Gaussian { sigma_w, seed },
            Self::UniformBounded { bound, norm, .. } => Self::UniformBounded { bound, norm, seed },
            other => other,
        }
    }

    /// Draws the `horizon + 1` disturbance vectors of one rollout (index 0
    /// is the initial state) on the given generator stream.
    fn generate(
        &self,
        plant: &PlantModel,
        horizon: usize,
        stream: u64,
    ) -> Result<Vec<DVector<f64>>> {
        self.validate(plant)?;
        let n = plant.n_states();
        match self {
            Self::Zeros => Ok(vec![DVector::zeros(n); horizon + 1]),
            Self::Impulse {
                node,
                time,
                magnitude,
            } => {
                if *time >= horizon as i64 {
                    return Err(Error::InvalidArgument(format!(
                        "impulse time {time} beyond rollout horizon {horizon}"
                    )));
                }
                let mut draws = vec![DVector::zeros(n); horizon + 1];
                let slot = (*time + 1) as usize;
                for &i in &plant.node_state_index[*node] {
                    draws[slot][i] = *magnitude;
                }
                Ok(draws)
            }
            Self::Gaussian { sigma_w, seed } => {
                let mut rng = stream_rng(*seed, stream);
                // Factor once: sigma_w = U diag(lambda) U' with negatives
                // (roundoff on a PSD input) clipped.
                let eig = sigma_w.clone().symmetric_eigen();
                let mut factor = eig.eigenvectors;
                for (mut col, lambda) in factor.column_iter_mut().zip(eig.eigenvalues.iter()) {
                    col *= lambda.max(0.0).sqrt();
                }
                Ok((0..=horizon)
                    .map(|_| {
                        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                        &factor * z
                    })
                    .collect())
            }
            Self::UniformBounded { bound, norm, seed } => {
                let mut rng = stream_rng(*seed, stream);
                Ok((0..=horizon)
                    .map(|_| match norm {
                        BallNorm::Inf => {
                            DVector::from_fn(n, |_, _| rng.random_range(-bound..=*bound))
                        }
                        BallNorm::Two => {
                            let z =
                                DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                            let radius = bound * rng.random::<f64>().powf(1.0 / n as f64);
                            let len = z.norm();
                            if len == 0.0 {
                                DVector::zeros(n)
                            } else {
                                z * (radius / len)
                            }
                        }
                    })
                    .collect())
            }
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// States, inputs, and applied disturbances of one rollout: `x` has
/// `horizon + 1` entries, `u` and `w` have `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub w: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.u.len()
    }

    fn check(&self) -> Result<()> {
        let h = self.u.len();
        if self.x.len() != h + 1 || self.w.len() != h {
            return Err(Error::DimensionMismatch(format!(
                "trajectory with {} states, {} inputs, {} disturbances",
                self.x.len(),
                self.u.len(),
                self.w.len()
            )));
        }
        let n = self.x[0].len();
        if self.x.iter().any(|v| v.len() != n) || self.w.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("ragged trajectory".into()));
        }
        if let Some(u0) = self.u.first() {
            let m = u0.len();
            if self.u.iter().any(|v| v.len() != m) {
                return Err(Error::DimensionMismatch("ragged trajectory".into()));
            }
        }
        Ok(())
    }

    pub fn max_abs_state(&self) -> f64 {
        self.x
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Writes `t,kind,index,value` records: states at `t = 0..=H`, inputs
    /// and disturbances at `t = 0..H`, values with 17 significant digits.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        self.check()?;
        writeln!(out, "t,kind,index,value")?;
        for t in 0..=self.horizon() {
            for (i, v) in self.x[t].iter().enumerate() {
                writeln!(out, "{t},x,{i},{v:.16e}")?;
            }
            if t < self.horizon() {
                for (i, v) in self.u[t].iter().enumerate() {
                    writeln!(out, "{t},u,{i},{v:.16e}")?;
                }
                for (i, v) in self.w[t].iter().enumerate() {
                    writeln!(out, "{t},w,{i},{v:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

/// One step of the open-loop plant map.
pub fn step_plant(
    plant: &PlantModel,
    x: &DVector<f64>,
    u: &DVector<f64>,
    w: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (n, m) = (plant.n_states(), plant.n_inputs());
    if x.len() != n || u.len() != m || w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "step with x {}, u {}, w {} on a {n}-state {m}-input plant",
            x.len(),
            u.len(),
            w.len()
        )));
    }
    Ok(&plant.a * x + &plant.b * u + w)
}

/// Closed-loop rollout with explicitly supplied disturbance draws;
/// `disturbances[0]` becomes the initial state and `disturbances[t + 1]` is
/// applied when stepping from `x[t]`. The controller must be fresh.
pub fn rollout_with(
    plant: &PlantModel,
    controller: &mut Controller,
    disturbances: &[DVector<f64>],
) -> Result<Trajectory> {
    if controller.timestep() != 0 {
        return Err(Error::InvalidArgument(
            "rollout requires a fresh controller (timestep 0)".into(),
        ));
    }
    if controller.response().n_states() != plant.n_states()
        || controller.response().n_inputs() != plant.n_inputs()
    {
        return Err(Error::DimensionMismatch(format!(
            "controller is {}x{} but plant is {}x{}",
            controller.response().n_states(),
            controller.response().n_inputs(),
            plant.n_states(),
            plant.n_inputs()
        )));
    }
    let Some((x0, applied)) = disturbances.split_first() else {
        return Err(Error::InvalidArgument(
            "disturbance sequence is empty".into(),
        ));
    };
    let horizon = applied.len();
    let mut x = Vec::with_capacity(horizon + 1);
    let mut u = Vec::with_capacity(horizon);
    x.push(x0.clone());
    for (t, w) in applied.iter().enumerate() {
        let input = controller.step(&x[t])?;
        let next = step_plant(plant, &x[t], &input, w)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        x.push(next);
        u.push(input);
    }
    Ok(Trajectory {
        x,
        u,
        w: applied.to_vec(),
    })
}

/// Rollout on a specific generator stream of the disturbance process.
pub fn rollout_stream(
    plant: &PlantModel,
    controller: &mut Controller,
    disturbance: &DisturbanceSpec,
    horizon: usize,
    stream: u64,
) -> Result<Trajectory> {
    let draws = disturbance.generate(plant, horizon, stream)?;
    rollout_with(plant, controller, &draws)
}

/// Rollout over `horizon` steps on stream 0 of the disturbance process.
pub fn rollout(
    plant: &PlantModel,
    controller: &mut Controller,
    disturbance: &DisturbanceSpec,
    horizon: usize,
) -> Result<Trajectory> {
    rollout_stream(plant, controller, disturbance, horizon, 0)
}

/// Total quadratic cost `sum_{t=0}^{H-1} x[t]'Q x[t] + u[t]'R u[t]` of one
/// rollout (weights are assumed validated by the caller).
pub fn quadratic_cost(traj: &Trajectory, q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<f64> {
    traj.check()?;
    let n = traj.x[0].len();
    let m = traj.u.first().map_or(q.ncols(), |u| u.len());
    if q.shape() != (n, n) || (traj.horizon() > 0 && r.shape() != (m, m)) {
        return Err(Error::DimensionMismatch(format!(
            "weights Q {}x{}, R {}x{} for a {n}-state {m}-input trajectory",
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    let mut total = 0.0;
    for t in 0..traj.horizon() {
        total += (q * &traj.x[t]).dot(&traj.x[t]);
        total += (r * &traj.u[t]).dot(&traj.u[t]);
    }
    Ok(total)
}

/// Exact expectation of [`quadratic_cost`] over Gaussian rollouts of length
/// `horizon` under covariance `sigma_w`:
/// `sum_{s=1}^{min(T,H)} (H - s + 1) (tr(phi_x[s]' Q phi_x[s] sigma_w) +
/// tr(phi_u[s]' R phi_u[s] sigma_w))`, each tap weighted by the number of
/// steps at which it has already come into effect.
pub fn expected_gaussian_cost(
    phi: &SystemResponse,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    sigma_w: &DMatrix<f64>,
    horizon: usize,
) -> Result<f64> {
    let (n, m) = (phi.n_states(), phi.n_inputs());
    if q.shape() != (n, n) || r.shape() != (m, m) || sigma_w.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "weights Q {}x{}, R {}x{}, sigma_w {}x{} for a {n}x{m} response",
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols(),
            sigma_w.nrows(),
            sigma_w.ncols()
        )));
    }
    let mut total = 0.0;
    for s in 1..=phi.horizon().min(horizon) {
        let px = phi.x_at(s);
        let pu = phi.u_at(s);
        let per_step = px.dot(&(q * px * sigma_w)) + pu.dot(&(r * pu * sigma_w));
        total += (horizon - s + 1) as f64 * per_step;
    }
    Ok(total)
}

/// Mean and standard error of the total quadratic cost over `n_rollouts`
/// independent rollouts. Rollout `k` runs on stream `k` of `seed` (which
/// replaces any seed embedded in the disturbance spec), so the estimate is
/// reproducible and rollout 0 coincides with [`rollout`] under that seed.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_cost(
    plant: &PlantModel,
    phi: &SystemResponse,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    disturbance: &DisturbanceSpec,
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_rollouts < 2 {
        return Err(Error::InvalidArgument(format!(
            "standard error needs at least 2 rollouts, got {n_rollouts}"
        )));
    }
    let seeded = disturbance.with_seed(seed);
    let mut costs = Vec::with_capacity(n_rollouts);
    for k in 0..n_rollouts {
        let mut controller = Controller::new(plant, phi.clone())?;
        let traj = rollout_stream(plant, &mut controller, &seeded, horizon, k as u64)?;
        costs.push(quadratic_cost(&traj, q, r)?);
    }
    let n = n_rollouts as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let var = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Max-abs gap between the controller's internal disturbance estimates and
/// the disturbances recorded in the trajectory, replayed on a fresh
/// controller. Near zero under an exact plant model; grows with model
/// mismatch between the recorded plant and `plant`.
pub fn delta_reconstruction_drift(
    plant: &PlantModel,
    phi: &SystemResponse,
    traj: &Trajectory,
) -> Result<f64> {
    traj.check()?;
    let mut controller = Controller::new(plant, phi.clone())?;
    let mut drift = 0.0f64;
    for t in 0..traj.horizon() {
        controller.step(&traj.x[t])?;
        let delta = controller.last_delta().expect("step records a delta");
        let expected = if t == 0 { &traj.x[0] } else { &traj.w[t - 1] };
        drift = drift.max((delta - expected).amax());
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::mask::SupportMask;
    use crate::plant::network_plant;
    use crate::synthesis::{h2_cost, synthesize, SynthesisProblem};
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    fn chain_setup(n: usize, horizon: usize) -> (PlantModel, SystemResponse) {
        let g = Graph::chain(n).unwrap();
        let plant = network_plant(&g, 0.5, 0.2, 1.0, 1.0).unwrap();
        let prob = SynthesisProblem::new(
            plant.clone(),
            horizon,
            DMatrix::identity(n, n),
            DMatrix::identity(n, n),
            SupportMask::dense(n, n, horizon).unwrap(),
        )
        .unwrap();
        let phi = synthesize(&prob).unwrap();
        (plant, phi)
    }

    fn fresh(plant: &PlantModel, phi: &SystemResponse) -> Controller {
        Controller::new(plant, phi.clone()).unwrap()
    }

    #[test]
    fn zeros_disturbance_stays_at_rest() {
        let (plant, phi) = chain_setup(3, 4);
        let mut ctl = fresh(&plant, &phi);
        let traj = rollout(&plant, &mut ctl, &DisturbanceSpec::Zeros, 10).unwrap();
        assert_eq!(traj.horizon(), 10);
        assert_eq!(traj.max_abs_state(), 0.0);
        let q = DMatrix::identity(3, 3);
        assert_eq!(quadratic_cost(&traj, &q, &q).unwrap(), 0.0);
    }

    #[test]
    fn impulse_response_reproduces_the_taps() {
        let (plant, phi) = chain_setup(4, 6);
        let node = 2;
        let magnitude = 2.0;
        let mut ctl = fresh(&plant, &phi);
        let dist = DisturbanceSpec::Impulse {
            node,
            time: -1,
            magnitude,
        };
        let traj = rollout(&plant, &mut ctl, &dist, 10).unwrap();
        for t in 0..=10usize {
            let expected = if t < 6 {
                phi.x_at(t + 1).column(node) * magnitude
            } else {
                DVector::zeros(4).column(0).into_owned()
            };
            assert_abs_diff_eq!(traj.x[t], expected, epsilon = 1e-12);
            if t < 10 {
                let expected_u = if t < 6 {
                    phi.u_at(t + 1).column(node) * magnitude
                } else {
                    DVector::zeros(4)
                };
                assert_abs_diff_eq!(traj.u[t], expected_u, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn delayed_impulse_shifts_the_response() {
        let (plant, phi) = chain_setup(3, 5);
        let dist = DisturbanceSpec::Impulse {
            node: 0,
            time: 3,
            magnitude: 1.0,
        };
        let mut ctl = fresh(&plant, &phi);
        let traj = rollout(&plant, &mut ctl, &dist, 12).unwrap();
        for t in 0..=12usize {
            let expected = if t >= 4 && t - 4 < 5 {
                phi.x_at(t - 3).column(0).into_owned()
            } else {
                DVector::zeros(3)
            };
            assert_abs_diff_eq!(traj.x[t], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn superposition_of_impulses() {
        let (plant, phi) = chain_setup(3, 4);
        let d1 = DisturbanceSpec::Impulse {
            node: 0,
            time: -1,
            magnitude: 1.0,
        };
        let d2 = DisturbanceSpec::Impulse {
            node: 2,
            time: 1,
            magnitude: -0.5,
        };
        let h = 9;
        let w1 = d1.generate(&plant, h, 0).unwrap();
        let w2 = d2.generate(&plant, h, 0).unwrap();
        let combined: Vec<DVector<f64>> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let t1 = rollout_with(&plant, &mut fresh(&plant, &phi), &w1).unwrap();
        let t2 = rollout_with(&plant, &mut fresh(&plant, &phi), &w2).unwrap();
        let tc = rollout_with(&plant, &mut fresh(&plant, &phi), &combined).unwrap();
        for t in 0..=h {
            assert_abs_diff_eq!(&t1.x[t] + &t2.x[t], tc.x[t], epsilon = 1e-9);
        }
        for t in 0..h {
            assert_abs_diff_eq!(&t1.u[t] + &t2.u[t], tc.u[t], epsilon = 1e-9);
        }
    }

    #[test]
    fn gaussian_rollouts_are_reproducible_and_streams_differ() {
        let (plant, phi) = chain_setup(3, 4);
        let dist = DisturbanceSpec::Gaussian {
            sigma_w: DMatrix::identity(3, 3),
            seed: 7,
        };
        let a = rollout(&plant, &mut fresh(&plant, &phi), &dist, 20).unwrap();
        let b = rollout(&plant, &mut fresh(&plant, &phi), &dist, 20).unwrap();
        assert_eq!(a, b);
        let c = rollout_stream(&plant, &mut fresh(&plant, &phi), &dist, 20, 1).unwrap();
        assert_ne!(a, c);
        let other = DisturbanceSpec::Gaussian {
            sigma_w: DMatrix::identity(3, 3),
            seed: 8,
        };
        let d = rollout(&plant, &mut fresh(&plant, &phi), &other, 20).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn delta_tracks_disturbances_on_gaussian_rollouts() {
        let (plant, phi) = chain_setup(4, 6);
        let dist = DisturbanceSpec::Gaussian {
            sigma_w: DMatrix::identity(4, 4),
            seed: 3,
        };
        let traj = rollout(&plant, &mut fresh(&plant, &phi), &dist, 100).unwrap();
        let drift = delta_reconstruction_drift(&plant, &phi, &traj).unwrap();
        assert!(drift <= 1e-12, "drift {drift}");
        // A mismatched model shows up as nonzero drift.
        let mut wrong = plant.clone();
        wrong.a[(0, 0)] += 0.125;
        let bad_drift = delta_reconstruction_drift(&wrong, &phi, &traj);
        match bad_drift {
            Ok(d) => assert!(d > 1e-3, "drift {d} too small for a wrong model"),
            Err(Error::NotAchievable { .. }) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn uniform_disturbances_respect_their_bounds() {
        let (plant, phi) = chain_setup(2, 3);
        for norm in [BallNorm::Inf, BallNorm::Two] {
            let dist = DisturbanceSpec::UniformBounded {
                bound: 0.3,
                norm,
                seed: 11,
            };
            let traj = rollout(&plant, &mut fresh(&plant, &phi), &dist, 50).unwrap();
            for w in &traj.w {
                let size = match norm {
                    BallNorm::Inf => w.amax(),
                    BallNorm::Two => w.norm(),
                };
                assert!(size <= 0.3 + 1e-12, "draw {w:?} outside ball");
            }
        }
    }

    #[test]
    fn monte_carlo_equals_hand_average_and_handles_zeros() {
        let (plant, phi) = chain_setup(2, 3);
        let q = DMatrix::identity(2, 2);
        let r = DMatrix::identity(2, 2);
        let dist = DisturbanceSpec::Gaussian {
            sigma_w: DMatrix::identity(2, 2),
            seed: 5,
        };
        let (mean, se) = monte_carlo_cost(&plant, &phi, &q, &r, &dist, 15, 2, 5).unwrap();
        let c0 = quadratic_cost(
            &rollout_stream(&plant, &mut fresh(&plant, &phi), &dist, 15, 0).unwrap(),
            &q,
            &r,
        )
        .unwrap();
        let c1 = quadratic_cost(
            &rollout_stream(&plant, &mut fresh(&plant, &phi), &dist, 15, 1).unwrap(),
            &q,
            &r,
        )
        .unwrap();
        assert_eq!(mean, (c0 + c1) / 2.0);
        assert!(se > 0.0);
        let (zero_mean, zero_se) =
            monte_carlo_cost(&plant, &phi, &q, &r, &DisturbanceSpec::Zeros, 15, 4, 0).unwrap();
        assert_eq!((zero_mean, zero_se), (0.0, 0.0));
        assert!(monte_carlo_cost(&plant, &phi, &q, &r, &dist, 15, 1, 5).is_err());
    }

    #[test]
    fn expected_cost_approaches_the_h2_rate() {
        let (plant, phi) = chain_setup(3, 5);
        let q = DMatrix::identity(3, 3);
        let r = DMatrix::identity(3, 3);
        let sigma = plant.sigma_w.clone();
        let h2 = h2_cost(&phi, &q, &r, &sigma).unwrap();
        let h = 400;
        let expected = expected_gaussian_cost(&phi, &q, &r, &sigma, h).unwrap();
        let per_step = expected / h as f64;
        assert!(per_step <= h2 + 1e-12);
        // The gap is the FIR warm-up, at most (T-1)/H of the rate.
        assert!(h2 - per_step <= h2 * 4.0 / h as f64 + 1e-12);
        // Truncated horizons count only the taps already active.
        let first = expected_gaussian_cost(&phi, &q, &r, &sigma, 1).unwrap();
        let tap1 = {
            let px = phi.x_at(1);
            let pu = phi.u_at(1);
            px.dot(&(&q * px * &sigma)) + pu.dot(&(&r * pu * &sigma))
        };
        assert_abs_diff_eq!(first, tap1, epsilon = 1e-13);
    }

    #[test]
    fn trajectory_csv_is_stable() {
        let traj = Trajectory {
            x: vec![dvector_of(&[1.0, 0.0]), dvector_of(&[0.5, -0.25])],
            u: vec![dvector_of(&[-0.5])],
            w: vec![dvector_of(&[0.0, 0.125])],
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "t,kind,index,value\n\
            0,x,0,1.0000000000000000e0\n\
            0,x,1,0.0000000000000000e0\n\
            0,u,0,-5.0000000000000000e-1\n\
            0,w,0,0.0000000000000000e0\n\
            0,w,1,1.2500000000000000e-1\n\
            1,x,0,5.0000000000000000e-1\n\
            1,x,1,-2.5000000000000000e-1\n";
        assert_eq!(text, expected);
    }

    fn dvector_of(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn validation_errors() {
        let (plant, phi) = chain_setup(2, 3);
        let bad_sigma = DisturbanceSpec::Gaussian {
            sigma_w: dmatrix![1.0],
            seed: 0,
        };
        assert!(bad_sigma.validate(&plant).is_err());
        let bad_node = DisturbanceSpec::Impulse {
            node: 2,
            time: -1,
            magnitude: 1.0,
        };
        assert!(bad_node.validate(&plant).is_err());
        let early = DisturbanceSpec::Impulse {
            node: 0,
            time: -2,
            magnitude: 1.0,
        };
        assert!(early.validate(&plant).is_err());
        let late = DisturbanceSpec::Impulse {
            node: 0,
            time: 10,
            magnitude: 1.0,
        };
        assert!(rollout(&plant, &mut fresh(&plant, &phi), &late, 5).is_err());
        let bad_bound = DisturbanceSpec::UniformBounded {
            bound: -1.0,
            norm: BallNorm::Inf,
            seed: 0,
        };
        assert!(bad_bound.validate(&plant).is_err());
        // Rollouts demand a fresh controller.
        let mut ctl = fresh(&plant, &phi);
        ctl.step(&nalgebra::dvector![0.0, 0.0]).unwrap();
        assert!(rollout(&plant, &mut ctl, &DisturbanceSpec::Zeros, 5).is_err());
        // step_plant checks shapes.
        let x = nalgebra::dvector![1.0, 2.0];
        let u_bad = nalgebra::dvector![1.0];
        assert!(step_plant(&plant, &x, &u_bad, &x).is_err());
    }
}
