//! Command-line frontend for the slsnet toolkit.
//!
//! Subcommands cover the full experiment loop: `synth` solves a synthesis
//! problem and writes the response to disk, `check` audits a response file
//! against a configuration, `simulate` rolls the controller out in closed
//! loop, and `compare-oracle` scores finite-horizon costs against the
//! stationary Riccati baseline.
//!
//! Exit codes: 0 success, 1 failed check, 2 bad input (config, file format,
//! dimensions, I/O), 3 infeasible synthesis, 4 Riccati divergence. Timing
//! goes to stderr so stdout is bit-for-bit reproducible for a fixed config.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use slsnet::synthesis::{achievability_residual, h2_cost, synthesize};
use slsnet::{
    dare_solve, lqg_infinite_cost, sim, Controller, Error, Result, SupportMask, SystemResponse,
};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "slsnet",
    version,
    about = "Localized FIR controller synthesis for networks"
)]
struct Cli {
    /// Worker threads for synthesis (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a closed-loop response and write `phi.sls`.
    Synth {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output_directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a response file: achievability residuals and mask support.
    Check {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Roll out the controller, write `trajectory.csv`, and estimate cost.
    Simulate {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep horizons and locality radii against the Riccati baseline.
    CompareOracle {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            std::process::exit(2);
        }
    }
    let outcome = match cli.command {
        Command::Synth { config, out } => cmd_synth(&config, out),
        Command::Check { phi, config } => cmd_check(&phi, &config),
        Command::Simulate { phi, config, out } => cmd_simulate(&phi, &config, out),
        Command::CompareOracle { config } => cmd_compare_oracle(&config),
    };
    let code = match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible { .. } => 3,
        Error::RiccatiDiverged { .. } => 4,
        _ => 2,
    }
}

fn worst(residuals: &[f64]) -> f64 {
    residuals.iter().copied().fold(0.0, f64::max)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_synth(config_path: &Path, out: Option<PathBuf>) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let prob = cfg.problem()?;
    let started = Instant::now();
    let phi = synthesize(&prob)?;
    let elapsed = started.elapsed();
    let residual = worst(&achievability_residual(&prob.plant, &phi)?);
    let cost = h2_cost(&phi, &prob.q, &prob.r, &prob.plant.sigma_w)?;

    let dir = out.unwrap_or_else(|| cfg.output_directory());
    ensure_dir(&dir)?;
    let path = dir.join("phi.sls");
    phi.save(&path)?;

    println!(
        "synth: plant n={} m={} topology={}",
        prob.plant.n_states(),
        prob.plant.n_inputs(),
        cfg.topology_kind
    );
    if let Some(seed) = cfg.plant_seed {
        println!("synth: plant_seed={seed}");
    }
    println!(
        "synth: horizon T={} locality={}",
        prob.horizon,
        cfg.synthesis_locality.label()
    );
    println!("synth: h2_cost={cost:.12e}");
    println!("synth: worst_block_residual={residual:.3e}");
    println!(
        "synth: nonzeros={}/{}",
        phi.nonzero_entries(),
        phi.total_entries()
    );
    println!("synth: wrote {}", path.display());
    eprintln!("synth: elapsed_ms={}", elapsed.as_millis());
    Ok(0)
}

fn cmd_check(phi_path: &Path, config_path: &Path) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let phi = SystemResponse::load(phi_path)?;
    let graph = cfg.graph()?;
    let plant = cfg.plant(&graph)?;
    let mask = cfg.mask(&graph, &plant)?;
    if phi.horizon() != cfg.synthesis_horizon {
        return Err(Error::DimensionMismatch(format!(
            "response has horizon {} but the config says {}",
            phi.horizon(),
            cfg.synthesis_horizon
        )));
    }

    let residuals = achievability_residual(&plant, &phi)?;
    let violations = mask.violations(&phi)?;
    println!(
        "check: phi n={} m={} T={}",
        phi.n_states(),
        phi.n_inputs(),
        phi.horizon()
    );
    println!("check: block residuals (max-abs)");
    for (tau, r) in residuals.iter().enumerate() {
        println!("check:   r{tau:<3} {r:.3e}");
    }
    let worst_residual = worst(&residuals);
    println!("check: worst_residual={worst_residual:.3e}");
    println!("check: support_violations={violations}");
    let pass = worst_residual <= slsnet::tol::ACHIEVABILITY_TOL && violations == 0;
    println!("check: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

fn cmd_simulate(phi_path: &Path, config_path: &Path, out: Option<PathBuf>) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let phi = SystemResponse::load(phi_path)?;
    let graph = cfg.graph()?;
    let plant = cfg.plant(&graph)?;
    let (q, r) = cfg.weights(&plant);
    let disturbance = cfg.disturbance(&plant)?;

    let mut controller = Controller::new(&plant, phi.clone())?;
    let started = Instant::now();
    let traj = sim::rollout(
        &plant,
        &mut controller,
        &disturbance,
        cfg.simulation_horizon,
    )?;
    let drift = sim::delta_reconstruction_drift(&plant, &phi, &traj)?;
    let (mc_mean, mc_se) = sim::monte_carlo_cost(
        &plant,
        &phi,
        &q,
        &r,
        &disturbance,
        cfg.simulation_horizon,
        cfg.simulation_n_rollouts,
        cfg.simulation_seed,
    )?;
    let elapsed = started.elapsed();

    let dir = out.unwrap_or_else(|| cfg.output_directory());
    ensure_dir(&dir)?;
    let path = dir.join("trajectory.csv");
    let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
    traj.write_csv(&mut file)?;

    println!(
        "simulate: horizon={} disturbance={} rng=chacha8 seed={}",
        cfg.simulation_horizon, cfg.disturbance_kind, cfg.simulation_seed
    );
    println!("simulate: max_abs_state={:.6e}", traj.max_abs_state());
    println!("simulate: delta_drift={drift:.3e}");
    println!(
        "simulate: mc_rollouts={} mc_cost_mean={mc_mean:.12e} mc_cost_se={mc_se:.6e}",
        cfg.simulation_n_rollouts
    );
    if let slsnet::DisturbanceSpec::Gaussian { sigma_w, .. } = &disturbance {
        let expected = sim::expected_gaussian_cost(&phi, &q, &r, sigma_w, cfg.simulation_horizon)?;
        println!("simulate: expected_cost={expected:.12e}");
    }
    println!("simulate: wrote {}", path.display());
    eprintln!("simulate: elapsed_ms={}", elapsed.as_millis());
    Ok(0)
}

fn cmd_compare_oracle(config_path: &Path) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let graph = cfg.graph()?;
    let plant = cfg.plant(&graph)?;
    let (q, r) = cfg.weights(&plant);

    let started = Instant::now();
    let oracle = dare_solve(
        &plant.a,
        &plant.b,
        &q,
        &r,
        slsnet::tol::DARE_MAX_ITER,
        slsnet::tol::DARE_TOL,
    )?;
    let baseline = lqg_infinite_cost(&oracle, &plant.sigma_w)?;
    println!(
        "compare-oracle: stationary_cost={baseline:.12e} riccati_iterations={}",
        oracle.iterations
    );

    let cost_for = |mask: SupportMask, horizon: usize| -> Result<f64> {
        let prob = slsnet::synthesis::SynthesisProblem::new(
            plant.clone(),
            horizon,
            q.clone(),
            r.clone(),
            mask,
        )?;
        let phi = synthesize(&prob)?;
        h2_cost(&phi, &q, &r, &plant.sigma_w)
    };

    let mut horizons = vec![5, 10, 20, 30, cfg.synthesis_horizon];
    horizons.sort_unstable();
    horizons.dedup();
    println!("compare-oracle: horizon sweep (dense)");
    for horizon in horizons {
        let mask = SupportMask::dense(plant.n_states(), plant.n_inputs(), horizon)?;
        let cost = cost_for(mask, horizon)?;
        let gap = (cost - baseline) / baseline;
        println!("compare-oracle:   T={horizon:<3} cost={cost:.12e} rel_gap={gap:+.3e}");
    }

    let horizon = cfg.synthesis_horizon;
    let mut radii: Vec<Option<usize>> = vec![Some(0), Some(1), Some(2)];
    if let Some(d) = cfg.synthesis_locality.radius() {
        radii.push(Some(d));
    }
    radii.sort_unstable();
    radii.dedup();
    radii.push(None);
    println!("compare-oracle: locality sweep (T={horizon})");
    for d in radii {
        let (label, mask) = match d {
            Some(d) => (
                format!("d={d}"),
                SupportMask::locality(&graph, &plant, d, horizon)?,
            ),
            None => (
                "dense".to_string(),
                SupportMask::dense(plant.n_states(), plant.n_inputs(), horizon)?,
            ),
        };
        match cost_for(mask, horizon) {
            Ok(cost) => {
                let gap = (cost - baseline) / baseline;
                println!("compare-oracle:   {label:<5} cost={cost:.12e} rel_gap={gap:+.3e}");
            }
            Err(Error::Infeasible { columns, residual }) => {
                println!(
                    "compare-oracle:   {label:<5} infeasible columns={columns:?} residual={residual:.3e}"
                );
            }
            Err(other) => return Err(other),
        }
    }
    eprintln!(
        "compare-oracle: elapsed_ms={}",
        started.elapsed().as_millis()
    );
    Ok(0)
}
