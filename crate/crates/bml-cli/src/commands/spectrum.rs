//! `bml spectrum`: exact velocity spectrum of the deterministic system.

use bml_core::buslaev::CycleBudget;
use bml_core::generate::EnumerationBudget;
use bml_core::spectrum::{spectrum, SpectrumMode};

use crate::cli::{SpectrumArgs, SpectrumModeArg};
use crate::config::{resolve, ConfigFile};
use crate::error::CliError;
use crate::output::{write_json_report, RunClock};

const KEYS: &[&str] = &[
    "shape",
    "particles",
    "q",
    "mode",
    "samples",
    "seed",
    "max-states",
    "out",
];

pub fn run(args: SpectrumArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    cfg.check_keys(KEYS)?;
    let shape = super::parse_shape(&resolve(args.shape, cfg, "shape", None)?)?;
    let m = resolve(args.particles, cfg, "particles", None)? as usize;
    let q = resolve(args.q, cfg, "q", Some(0.0))?;
    if q != 0.0 {
        return Err(CliError::Usage(format!(
            "the spectrum is defined for the deterministic system; got q = {q}, expected 0 \
             (long-run velocities of the stochastic system are estimated by `bml sweep`)"
        )));
    }
    let mode_arg = resolve(args.mode, cfg, "mode", Some(SpectrumModeArg::Exhaustive))?;
    let seed = resolve(args.seed, cfg, "seed", Some(0))?;
    let samples = resolve(args.samples, cfg, "samples", Some(1024))?;
    let max_states = resolve(
        args.max_states,
        cfg,
        "max-states",
        Some(EnumerationBudget::default().max_states),
    )?;
    let out = args.out.or(cfg.get("out")?);
    let mode = match mode_arg {
        SpectrumModeArg::Exhaustive => SpectrumMode::Exhaustive,
        SpectrumModeArg::Sampled => SpectrumMode::Sampled { seed, samples },
    };

    let mut clock = RunClock::start("spectrum");
    clock.note("shape", &shape);
    clock.note("particles", m);
    clock.note("mode", mode_arg);
    if matches!(mode, SpectrumMode::Sampled { .. }) {
        clock.note("seed", seed);
        clock.note("samples", samples);
    }

    let report = spectrum(
        &shape,
        m,
        mode,
        &EnumerationBudget { max_states },
        &CycleBudget::default(),
    )?;

    println!("velocity spectrum: {}", report.velocity_set_string());
    println!(
        "states examined: {}; distinct attractors: {}; self-organized: {}",
        report.states_examined,
        report.attractors.len(),
        report.self_organized()
    );

    if let Some(path) = &out {
        write_json_report(path, &report.to_record())?;
        clock.write_sidecar(path)?;
    }
    Ok(())
}
