//! `bml verify`: run the self-organization checker and emit the report.

use bml_core::dynamics::SwitchPolicy;
use bml_core::generate::EnumerationBudget;
use bml_core::verify::{verify_self_organization, VerifyOptions};

use crate::cli::VerifyArgs;
use crate::config::{resolve, ConfigFile};
use crate::error::CliError;
use crate::output::{write_json_report, RunClock};

const KEYS: &[&str] = &[
    "shape",
    "particles",
    "q",
    "seed",
    "steps",
    "switch-samples",
    "override-hypothesis",
    "max-states",
    "out",
];

pub fn run(args: VerifyArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    cfg.check_keys(KEYS)?;
    let shape = super::parse_shape(&resolve(args.shape, cfg, "shape", None)?)?;
    let m = resolve(args.particles, cfg, "particles", None)? as usize;
    let q = resolve(args.q, cfg, "q", Some(0.0))?;
    let seed = resolve(args.seed, cfg, "seed", Some(0))?;
    let max_steps = resolve(args.steps, cfg, "steps", Some(10_000))?;
    let switch_samples = resolve(args.switch_samples, cfg, "switch-samples", Some(16))?;
    let override_hypothesis =
        args.override_hypothesis || cfg.get::<bool>("override-hypothesis")?.unwrap_or(false);
    let max_states = resolve(
        args.max_states,
        cfg,
        "max-states",
        Some(EnumerationBudget::default().max_states),
    )?;
    let out = args.out.or(cfg.get("out")?);

    let mut clock = RunClock::start("verify");
    clock.note("shape", &shape);
    clock.note("particles", m);
    clock.note("q", q);
    clock.note("seed", seed);
    clock.note("switch-samples", switch_samples);
    clock.note("override-hypothesis", override_hypothesis);

    let options = VerifyOptions {
        policy: SwitchPolicy::new(q)?,
        enumeration: EnumerationBudget { max_states },
        max_steps,
        switch_samples,
        master_seed: seed,
        override_hypothesis,
        ..VerifyOptions::default()
    };
    let report = verify_self_organization(&shape, m, &options)?;

    println!(
        "verify: shape {}  m {}  d {}  q {}  mode {}",
        report.shape, report.m, report.d, report.q, report.mode
    );
    println!(
        "states {}; realizations {}; free {}; all free: {}",
        report.states_enumerated, report.realizations, report.free_count, report.all_free
    );
    if let (Some(max), Some(mean)) = (report.max_onset, report.mean_onset) {
        println!("onset: max {max}, mean {mean}");
    }
    if let Some(ce) = &report.counterexample {
        println!("counterexample: {}", ce.detail);
    }
    if !report.hypothesis_met {
        println!("note: m > d/2, beyond the self-organization condition; results are informational");
    }

    if let Some(path) = &out {
        write_json_report(path, &report)?;
        clock.write_sidecar(path)?;
    }

    if !report.all_free && report.hypothesis_met {
        return Err(CliError::Falsification(format!(
            "{} of {} realizations did not reach free movement despite m <= d/2",
            report.realizations - report.free_count,
            report.realizations
        )));
    }
    Ok(())
}
