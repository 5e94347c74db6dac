//! `bml sweep`: trajectory ensembles over a density x switch-probability
//! grid, one CSV row per grid point.

use std::io::Write;

use rayon::prelude::*;

use bml_core::diagonal::detect_free_movement;
use bml_core::dynamics::{mean_velocity, simulate, SimOptions, SwitchPolicy};
use bml_core::generate::random_configuration_with;
use bml_core::lattice::LatticeShape;
use bml_core::rng::derive_rng;

use crate::cli::SweepArgs;
use crate::config::{resolve, ConfigFile};
use crate::error::CliError;
use crate::output::{RunClock, SWEEP_SCHEMA};

const KEYS: &[&str] = &[
    "shape",
    "densities",
    "q-grid",
    "trajectories",
    "steps",
    "seed",
    "tail",
    "out",
];

pub fn run(args: SweepArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    cfg.check_keys(KEYS)?;
    let shape = super::parse_shape(&resolve(args.shape, cfg, "shape", None)?)?;
    let densities_raw: String = resolve(args.densities, cfg, "densities", None)?;
    let q_raw: String = resolve(args.q_grid, cfg, "q-grid", Some("0".to_string()))?;
    let trajectories = resolve(args.trajectories, cfg, "trajectories", Some(16))?;
    let steps = resolve(args.steps, cfg, "steps", Some(1000))?;
    let seed = resolve(args.seed, cfg, "seed", Some(0))?;
    let tail = resolve(args.tail, cfg, "tail", Some(0.25))?;
    let out = args.out.or(cfg.get("out")?);
    if trajectories == 0 || steps == 0 {
        return Err(CliError::Usage(
            "--trajectories and --steps must be at least 1".into(),
        ));
    }
    if !(tail > 0.0 && tail <= 1.0) {
        return Err(CliError::Usage(format!(
            "--tail must be in (0, 1], got {tail}"
        )));
    }
    let m_grid = parse_densities(&densities_raw, &shape)?;
    let q_grid = parse_q_grid(&q_raw)?;

    let mut clock = RunClock::start("sweep");
    clock.note("shape", &shape);
    clock.note("densities", &densities_raw);
    clock.note("q-grid", &q_raw);
    clock.note("trajectories", trajectories);
    clock.note("steps", steps);
    clock.note("seed", seed);
    clock.note("tail", tail);

    // Grid points in density-major, q-minor order; the row index is also
    // the stream index for seed derivation.
    let points: Vec<(usize, f64)> = m_grid
        .iter()
        .flat_map(|&m| q_grid.iter().map(move |&q| (m, q)))
        .collect();
    let tail_len = ((steps as f64) * tail).floor().max(1.0) as usize;

    let rows = points
        .par_iter()
        .enumerate()
        .map(|(point_idx, &(m, q))| {
            let policy = SwitchPolicy::new(q)?;
            let mut velocity_sum = 0.0f64;
            let mut free = 0u64;
            let mut onset_sum = 0u128;
            for traj_idx in 0..trajectories {
                // One stream per (master seed, grid point, trajectory):
                // the initial state and the switch draws share it.
                let mut rng = derive_rng(seed, point_idx as u64, traj_idx as u64);
                let initial = random_configuration_with(&shape, m, &mut rng)?;
                let opts = SimOptions {
                    max_steps: steps,
                    snapshot_stride: None,
                    seed: Some(seed),
                };
                let traj = simulate(&initial, &policy, &opts, &mut rng, &mut [])?;
                let len = traj.stats.len();
                velocity_sum += mean_velocity(&traj, len.saturating_sub(tail_len)..len)?;
                if let Some(report) = detect_free_movement(&traj) {
                    free += 1;
                    onset_sum += report.onset as u128;
                }
            }
            let mean_v = velocity_sum / trajectories as f64;
            let free_fraction = free as f64 / trajectories as f64;
            let mean_onset = if free > 0 {
                (onset_sum as f64 / free as f64).to_string()
            } else {
                String::new()
            };
            let density = m as f64 / shape.cell_count() as f64;
            Ok(format!(
                "{SWEEP_SCHEMA},{shape},{m},{density},{q},{trajectories},{mean_v},{free_fraction},{mean_onset}"
            ))
        })
        .collect::<Result<Vec<String>, CliError>>()?;

    let header = "schema,shape,m,density,q,trajectories,mean_velocity,free_fraction,mean_onset";
    match &out {
        Some(path) => {
            let mut text = String::with_capacity(rows.len() * 64);
            text.push_str(header);
            text.push('\n');
            for row in &rows {
                text.push_str(row);
                text.push('\n');
            }
            std::fs::write(path, text)
                .map_err(CliError::io(format!("writing {}", path.display())))?;
            clock.write_sidecar(path)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            writeln!(w, "{header}").map_err(CliError::io("writing sweep rows"))?;
            for row in &rows {
                writeln!(w, "{row}").map_err(CliError::io("writing sweep rows"))?;
            }
        }
    }
    Ok(())
}

/// Grid entries are particle counts (integers) or densities in (0, 1)
/// (fractions of the cell count, rounded down, rejected if they round to
/// zero). Every resulting m must satisfy 1 <= m < cell_count.
fn parse_densities(raw: &str, shape: &LatticeShape) -> Result<Vec<usize>, CliError> {
    let cells = shape.cell_count();
    let mut out = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let m = if let Ok(m) = item.parse::<u64>() {
            m
        } else {
            let density: f64 = item.parse().map_err(|_| {
                CliError::Usage(format!("density entry {item:?} is neither m nor a fraction"))
            })?;
            if !(0.0..1.0).contains(&density) {
                return Err(CliError::Usage(format!(
                    "density {density} outside [0, 1)"
                )));
            }
            let m = (density * cells as f64).floor() as u64;
            if m == 0 {
                return Err(CliError::Usage(format!(
                    "density {density} rounds down to zero particles on {shape}"
                )));
            }
            m
        };
        if m == 0 || m >= cells {
            return Err(CliError::Usage(format!(
                "m = {m} outside the sweep range 1..{cells}"
            )));
        }
        out.push(m as usize);
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty density grid".into()));
    }
    Ok(out)
}

fn parse_q_grid(raw: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let q: f64 = item
            .parse()
            .map_err(|_| CliError::Usage(format!("bad q entry {item:?}")))?;
        SwitchPolicy::new(q)?;
        out.push(q);
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty q grid".into()));
    }
    Ok(out)
}
