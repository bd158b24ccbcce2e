//! Flat TOML experiment configuration shared by every subcommand.
//!
//! The schema is strict both ways: unknown keys are rejected by serde, and
//! keys that do not apply to the selected topology or disturbance kind are
//! rejected by [`ExperimentConfig::validate`]. A valid config therefore
//! serializes back to an equivalent document with no silent dropouts.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use slsnet::sim::BallNorm;
use slsnet::synthesis::SynthesisProblem;
use slsnet::{network_plant, DisturbanceSpec, Error, Graph, PlantModel, Result, SupportMask};

/// Locality constraint: an integer hop radius, or the string `"dense"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Locality {
    Radius(usize),
    Named(String),
}

impl Locality {
    /// `Some(d)` for a radius, `None` for dense.
    pub fn radius(&self) -> Option<usize> {
        match self {
            Locality::Radius(d) => Some(*d),
            Locality::Named(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Locality::Radius(d) => format!("d={d}"),
            Locality::Named(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"chain"` or `"grid"`.
    pub topology_kind: String,
    /// Node count; chain topologies only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology_n: Option<usize>,
    /// Grid dimensions; grid topologies only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology_cols: Option<usize>,

    pub plant_self_coupling: f64,
    pub plant_neighbor_coupling: f64,
    pub plant_b_scale: f64,
    /// Process-noise standard deviation; `sigma_w = plant_sigma^2 I`.
    pub plant_sigma: f64,
    /// Accepted and echoed for provenance; plant construction is
    /// deterministic and does not consume it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant_seed: Option<u64>,

    /// FIR horizon `T >= 1`.
    pub synthesis_horizon: usize,
    pub synthesis_locality: Locality,
    pub synthesis_q_diag: f64,
    pub synthesis_r_diag: f64,

    pub simulation_horizon: usize,
    pub simulation_n_rollouts: usize,
    pub simulation_seed: u64,

    /// `"gaussian"`, `"impulse"`, `"uniform"`, or `"zeros"`.
    pub disturbance_kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbance_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbance_node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbance_time: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbance_magnitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbance_bound: Option<f64>,
    /// `"two"` or `"inf"`; uniform disturbances only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbance_norm: Option<String>,

    /// Where artifacts land unless `--out` overrides it. Default `out`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_directory: Option<String>,
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

/// Rejects keys that are set but meaningless for the selected kind.
fn forbid<T>(key: &str, value: &Option<T>, context: &str) -> Result<()> {
    if value.is_some() {
        return Err(invalid(format!("{key} does not apply to {context}")));
    }
    Ok(())
}

fn require<T: Copy>(key: &str, value: &Option<T>, context: &str) -> Result<T> {
    value.ok_or_else(|| invalid(format!("{key} is required for {context}")))
}

impl ExperimentConfig {
    /// Parses and validates a config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.topology_kind.as_str() {
            "chain" => {
                let n = require("topology_n", &self.topology_n, "chain topologies")?;
                if n == 0 {
                    return Err(invalid("topology_n must be positive".into()));
                }
                forbid("topology_rows", &self.topology_rows, "chain topologies")?;
                forbid("topology_cols", &self.topology_cols, "chain topologies")?;
            }
            "grid" => {
                let rows = require("topology_rows", &self.topology_rows, "grid topologies")?;
                let cols = require("topology_cols", &self.topology_cols, "grid topologies")?;
                if rows == 0 || cols == 0 {
                    return Err(invalid("grid dimensions must be positive".into()));
                }
                forbid("topology_n", &self.topology_n, "grid topologies")?;
            }
            other => {
                return Err(invalid(format!(
                    "topology_kind must be \"chain\" or \"grid\", got \"{other}\""
                )));
            }
        }

        for (key, v) in [
            ("plant_self_coupling", self.plant_self_coupling),
            ("plant_neighbor_coupling", self.plant_neighbor_coupling),
            ("plant_b_scale", self.plant_b_scale),
            ("plant_sigma", self.plant_sigma),
            ("synthesis_q_diag", self.synthesis_q_diag),
            ("synthesis_r_diag", self.synthesis_r_diag),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{key} must be finite, got {v}")));
            }
        }
        if self.plant_sigma < 0.0 {
            return Err(invalid("plant_sigma must be nonnegative".into()));
        }
        if self.synthesis_horizon == 0 {
            return Err(invalid("synthesis_horizon must be at least 1".into()));
        }
        if let Locality::Named(name) = &self.synthesis_locality {
            if name != "dense" {
                return Err(invalid(format!(
                    "synthesis_locality must be a hop radius or \"dense\", got \"{name}\""
                )));
            }
        }
        if self.synthesis_q_diag < 0.0 {
            return Err(invalid("synthesis_q_diag must be nonnegative".into()));
        }
        if self.synthesis_r_diag <= 0.0 {
            return Err(invalid("synthesis_r_diag must be positive".into()));
        }
        if self.simulation_horizon == 0 {
            return Err(invalid("simulation_horizon must be at least 1".into()));
        }
        if self.simulation_n_rollouts < 2 {
            return Err(invalid(
                "simulation_n_rollouts must be at least 2 for a standard error".into(),
            ));
        }

        match self.disturbance_kind.as_str() {
            "gaussian" => {
                let sigma = require("disturbance_sigma", &self.disturbance_sigma, "gaussian")?;
                if !sigma.is_finite() || sigma < 0.0 {
                    return Err(invalid(format!(
                        "disturbance_sigma must be a nonnegative finite number, got {sigma}"
                    )));
                }
                forbid("disturbance_node", &self.disturbance_node, "gaussian")?;
                forbid("disturbance_time", &self.disturbance_time, "gaussian")?;
                forbid(
                    "disturbance_magnitude",
                    &self.disturbance_magnitude,
                    "gaussian",
                )?;
                forbid("disturbance_bound", &self.disturbance_bound, "gaussian")?;
                forbid("disturbance_norm", &self.disturbance_norm, "gaussian")?;
            }
            "impulse" => {
                require("disturbance_node", &self.disturbance_node, "impulse")?;
                let time = require("disturbance_time", &self.disturbance_time, "impulse")?;
                if time < -1 {
                    return Err(invalid(format!(
                        "disturbance_time must be -1 (initial state) or later, got {time}"
                    )));
                }
                let mag = require(
                    "disturbance_magnitude",
                    &self.disturbance_magnitude,
                    "impulse",
                )?;
                if !mag.is_finite() {
                    return Err(invalid("disturbance_magnitude must be finite".into()));
                }
                forbid("disturbance_sigma", &self.disturbance_sigma, "impulse")?;
                forbid("disturbance_bound", &self.disturbance_bound, "impulse")?;
                forbid("disturbance_norm", &self.disturbance_norm, "impulse")?;
            }
            "uniform" => {
                let bound = require("disturbance_bound", &self.disturbance_bound, "uniform")?;
                if !bound.is_finite() || bound < 0.0 {
                    return Err(invalid(format!(
                        "disturbance_bound must be a nonnegative finite number, got {bound}"
                    )));
                }
                match self.disturbance_norm.as_deref() {
                    Some("two") | Some("inf") => {}
                    Some(other) => {
                        return Err(invalid(format!(
                            "disturbance_norm must be \"two\" or \"inf\", got \"{other}\""
                        )));
                    }
                    None => {
                        return Err(invalid("disturbance_norm is required for uniform".into()));
                    }
                }
                forbid("disturbance_sigma", &self.disturbance_sigma, "uniform")?;
                forbid("disturbance_node", &self.disturbance_node, "uniform")?;
                forbid("disturbance_time", &self.disturbance_time, "uniform")?;
                forbid(
                    "disturbance_magnitude",
                    &self.disturbance_magnitude,
                    "uniform",
                )?;
            }
            "zeros" => {
                forbid("disturbance_sigma", &self.disturbance_sigma, "zeros")?;
                forbid("disturbance_node", &self.disturbance_node, "zeros")?;
                forbid("disturbance_time", &self.disturbance_time, "zeros")?;
                forbid(
                    "disturbance_magnitude",
                    &self.disturbance_magnitude,
                    "zeros",
                )?;
                forbid("disturbance_bound", &self.disturbance_bound, "zeros")?;
                forbid("disturbance_norm", &self.disturbance_norm, "zeros")?;
            }
            other => {
                return Err(invalid(format!(
                    "disturbance_kind must be one of gaussian, impulse, uniform, zeros; got \"{other}\""
                )));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<Graph> {
        match self.topology_kind.as_str() {
            "chain" => Graph::chain(self.topology_n.expect("validated")),
            "grid" => Graph::grid(
                self.topology_rows.expect("validated"),
                self.topology_cols.expect("validated"),
            ),
            _ => unreachable!("validated"),
        }
    }

    pub fn plant(&self, graph: &Graph) -> Result<PlantModel> {
        network_plant(
            graph,
            self.plant_self_coupling,
            self.plant_neighbor_coupling,
            self.plant_b_scale,
            self.plant_sigma,
        )
    }

    pub fn mask(&self, graph: &Graph, plant: &PlantModel) -> Result<SupportMask> {
        match self.synthesis_locality.radius() {
            Some(d) => SupportMask::locality(graph, plant, d, self.synthesis_horizon),
            None => SupportMask::dense(plant.n_states(), plant.n_inputs(), self.synthesis_horizon),
        }
    }

    pub fn weights(&self, plant: &PlantModel) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = plant.n_states();
        let m = plant.n_inputs();
        (
            DMatrix::identity(n, n) * self.synthesis_q_diag,
            DMatrix::identity(m, m) * self.synthesis_r_diag,
        )
    }

    pub fn problem(&self) -> Result<SynthesisProblem> {
        let graph = self.graph()?;
        let plant = self.plant(&graph)?;
        let mask = self.mask(&graph, &plant)?;
        let (q, r) = self.weights(&plant);
        SynthesisProblem::new(plant, self.synthesis_horizon, q, r, mask)
    }

    /// Disturbance process for rollouts, seeded with `simulation_seed`.
    pub fn disturbance(&self, plant: &PlantModel) -> Result<DisturbanceSpec> {
        let n = plant.n_states();
        let spec = match self.disturbance_kind.as_str() {
            "zeros" => DisturbanceSpec::Zeros,
            "gaussian" => {
                let sigma = self.disturbance_sigma.expect("validated");
                DisturbanceSpec::Gaussian {
                    sigma_w: DMatrix::identity(n, n) * (sigma * sigma),
                    seed: self.simulation_seed,
                }
            }
            "impulse" => DisturbanceSpec::Impulse {
                node: self.disturbance_node.expect("validated"),
                time: self.disturbance_time.expect("validated"),
                magnitude: self.disturbance_magnitude.expect("validated"),
            },
            "uniform" => DisturbanceSpec::UniformBounded {
                bound: self.disturbance_bound.expect("validated"),
                norm: match self.disturbance_norm.as_deref().expect("validated") {
                    "two" => BallNorm::Two,
                    _ => BallNorm::Inf,
                },
                seed: self.simulation_seed,
            },
            _ => unreachable!("validated"),
        };
        spec.validate(plant)?;
        Ok(spec)
    }

    pub fn output_directory(&self) -> PathBuf {
        PathBuf::from(self.output_directory.as_deref().unwrap_or("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> String {
        r#"
topology_kind = "chain"
topology_n = 5
plant_self_coupling = 0.6
plant_neighbor_coupling = 0.25
plant_b_scale = 1.0
plant_sigma = 1.0
synthesis_horizon = 4
synthesis_locality = 2
synthesis_q_diag = 1.0
synthesis_r_diag = 1.0
simulation_horizon = 20
simulation_n_rollouts = 16
simulation_seed = 7
disturbance_kind = "gaussian"
disturbance_sigma = 1.0
"#
        .to_string()
    }

    fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn base_config_parses_and_builds() {
        let cfg = parse(&base()).unwrap();
        assert_eq!(cfg.synthesis_locality.radius(), Some(2));
        let prob = cfg.problem().unwrap();
        assert_eq!(prob.plant.n_states(), 5);
        assert_eq!(prob.horizon, 4);
        let plant = prob.plant.clone();
        assert!(matches!(
            cfg.disturbance(&plant).unwrap(),
            DisturbanceSpec::Gaussian { .. }
        ));
    }

    #[test]
    fn round_trip_is_stable() {
        let cfg = parse(&base()).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn dense_locality_and_grid_round_trip() {
        let text = base()
            .replace("topology_kind = \"chain\"", "topology_kind = \"grid\"")
            .replace("topology_n = 5", "topology_rows = 2\ntopology_cols = 3")
            .replace("synthesis_locality = 2", "synthesis_locality = \"dense\"");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.synthesis_locality.radius(), None);
        assert_eq!(cfg.graph().unwrap().n_nodes(), 6);
        let serialized = toml::to_string(&cfg).unwrap();
        assert_eq!(cfg, parse(&serialized).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = base() + "mystery_knob = 3\n";
        assert!(parse(&text).is_err());
    }

    #[test]
    fn irrelevant_keys_are_rejected() {
        for (needle, extra) in [
            ("", "topology_rows = 2\n"),
            ("", "disturbance_bound = 1.0\n"),
            ("", "disturbance_node = 0\n"),
        ] {
            let text = base() + needle + extra;
            assert!(parse(&text).is_err(), "accepted {extra:?}");
        }
    }

    #[test]
    fn missing_conditional_keys_are_rejected() {
        let no_sigma = base().replace("disturbance_sigma = 1.0", "");
        assert!(parse(&no_sigma).is_err());
        let no_n = base().replace("topology_n = 5", "");
        assert!(parse(&no_n).is_err());
    }

    #[test]
    fn impulse_and_uniform_kinds_build() {
        let impulse = base().replace(
            "disturbance_kind = \"gaussian\"\ndisturbance_sigma = 1.0",
            "disturbance_kind = \"impulse\"\ndisturbance_node = 2\ndisturbance_time = -1\ndisturbance_magnitude = 1.5",
        );
        let cfg = parse(&impulse).unwrap();
        let plant = cfg.plant(&cfg.graph().unwrap()).unwrap();
        assert!(matches!(
            cfg.disturbance(&plant).unwrap(),
            DisturbanceSpec::Impulse {
                node: 2,
                time: -1,
                ..
            }
        ));

        let uniform = base().replace(
            "disturbance_kind = \"gaussian\"\ndisturbance_sigma = 1.0",
            "disturbance_kind = \"uniform\"\ndisturbance_bound = 0.5\ndisturbance_norm = \"inf\"",
        );
        let cfg = parse(&uniform).unwrap();
        assert!(matches!(
            cfg.disturbance(&plant).unwrap(),
            DisturbanceSpec::UniformBounded {
                norm: BallNorm::Inf,
                ..
            }
        ));
    }

    #[test]
    fn bad_values_are_rejected() {
        for (from, to) in [
            ("synthesis_horizon = 4", "synthesis_horizon = 0"),
            ("synthesis_r_diag = 1.0", "synthesis_r_diag = 0.0"),
            ("simulation_n_rollouts = 16", "simulation_n_rollouts = 1"),
            ("plant_sigma = 1.0", "plant_sigma = -1.0"),
            ("synthesis_locality = 2", "synthesis_locality = \"sparse\""),
            (
                "disturbance_kind = \"gaussian\"",
                "disturbance_kind = \"bursty\"",
            ),
        ] {
            let text = base().replace(from, to);
            assert!(parse(&text).is_err(), "accepted {to:?}");
        }
    }
}
