//! `bml simulate`: one trajectory, per-step records, and a summary with
//! the mean velocity and the free-movement onset.

use std::io::Write;

use bml_core::diagonal::{detect_free_movement, OnsetConfirmation, OnsetReport};
use bml_core::dynamics::{mean_velocity, simulate, SimOptions, SwitchPolicy};
use bml_core::generate::random_configuration_with;
use bml_core::rng::{derive_rng, STREAM_DYNAMICS, STREAM_INITIAL_STATE};

use crate::cli::{RecordFormat, SimulateArgs};
use crate::config::{resolve, ConfigFile};
use crate::error::CliError;
use crate::output::{write_steps_csv, write_steps_jsonl, RunClock};

const KEYS: &[&str] = &[
    "shape",
    "particles",
    "q",
    "seed",
    "steps",
    "out",
    "format",
    "init",
    "redraw",
];

pub fn run(args: SimulateArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    cfg.check_keys(KEYS)?;
    let seed = resolve(args.seed, cfg, "seed", Some(0))?;
    let steps = resolve(args.steps, cfg, "steps", Some(1000))?;
    let q = resolve(args.q, cfg, "q", Some(0.0))?;
    let redraw = resolve(args.redraw, cfg, "redraw", Some(crate::cli::RedrawArg::Other))?;
    let format = resolve(args.format, cfg, "format", Some(RecordFormat::Csv))?;
    let out = args.out.or(cfg.get("out")?);
    let init_path = args.init.or(cfg.get("init")?);
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let policy = SwitchPolicy::with_rule(q, redraw.into())?;

    let initial = match &init_path {
        Some(path) => {
            if args.shape.is_some() || args.particles.is_some() {
                return Err(CliError::Usage(
                    "--init carries its own shape and particles; drop --shape/--particles".into(),
                ));
            }
            super::load_initial(path)?
        }
        None => {
            let shape = super::parse_shape(&resolve(args.shape, cfg, "shape", None)?)?;
            let m = resolve(args.particles, cfg, "particles", None)? as usize;
            random_configuration_with(&shape, m, &mut derive_rng(seed, STREAM_INITIAL_STATE, 0))?
        }
    };

    let mut clock = RunClock::start("simulate");
    clock.note("shape", initial.shape());
    clock.note("particles", initial.len());
    clock.note("q", q);
    clock.note("seed", seed);
    clock.note("steps", steps);
    clock.note("format", format);

    let mut rng = derive_rng(seed, STREAM_DYNAMICS, 0);
    let opts = SimOptions {
        max_steps: steps,
        snapshot_stride: None,
        seed: Some(seed),
    };
    let traj = simulate(&initial, &policy, &opts, &mut rng, &mut [])?;

    match &out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(CliError::io(format!("creating {}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            match format {
                RecordFormat::Csv => write_steps_csv(&mut w, &traj.stats),
                RecordFormat::Jsonl => write_steps_jsonl(&mut w, &traj.stats),
            }
            .and_then(|_| w.flush())
            .map_err(CliError::io(format!("writing {}", path.display())))?;
            clock.write_sidecar(path)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            match format {
                RecordFormat::Csv => write_steps_csv(&mut w, &traj.stats),
                RecordFormat::Jsonl => write_steps_jsonl(&mut w, &traj.stats),
            }
            .map_err(CliError::io("writing records to stdout"))?;
        }
    }

    // With records on stdout the summary moves to stderr to keep the
    // payload stream clean.
    let mut summary: Box<dyn Write> = if out.is_some() {
        Box::new(std::io::stdout())
    } else {
        Box::new(std::io::stderr())
    };
    let overall = mean_velocity(&traj, 0..traj.stats.len())?;
    let final_velocity = traj.stats.last().map(|s| s.velocity_instant).unwrap_or(0.0);
    let onset = detect_free_movement(&traj);
    writeln!(
        summary,
        "shape {}  m {}  q {}  seed {}  steps {}",
        initial.shape(),
        initial.len(),
        q,
        seed,
        traj.steps_run()
    )
    .and_then(|_| writeln!(summary, "mean velocity: {overall}"))
    .and_then(|_| writeln!(summary, "final velocity: {final_velocity}"))
    .and_then(|_| writeln!(summary, "{}", onset_line(&onset)))
    .map_err(CliError::io("writing summary"))?;
    Ok(())
}

fn onset_line(report: &Option<OnsetReport>) -> String {
    match report {
        None => "free movement: none detected".to_string(),
        Some(r) => {
            let method = match r.confirmation {
                OnsetConfirmation::CycleAnalysis => "cycle analysis",
                OnsetConfirmation::Certificate => "certificate",
            };
            let cert = match r.certificate_onset {
                Some(t) => format!("certificate at {t}"),
                None => "certificate never held".to_string(),
            };
            let delay = match r.last_delay {
                Some(t) => format!("last delay at {t}"),
                None => "no delays".to_string(),
            };
            format!(
                "free movement: onset {} ({method}; {cert}; {delay})",
                r.onset
            )
        }
    }
}
