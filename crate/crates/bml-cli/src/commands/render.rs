//! `bml render`: per-step frames of a 2-D trajectory.
//!
//! Coordinate 1 runs horizontally to the right, coordinate 2 vertically
//! downward: type-1 particles ('>', red) stream rightward, type-2 ('v',
//! blue) downward.

use std::path::Path;

use bml_core::dynamics::{step, SwitchPolicy};
use bml_core::generate::random_configuration_with;
use bml_core::lattice::Configuration;
use bml_core::rng::{derive_rng, STREAM_DYNAMICS, STREAM_INITIAL_STATE};

use crate::cli::{FrameStyle, RenderArgs};
use crate::config::{resolve, ConfigFile};
use crate::error::CliError;
use crate::output::RunClock;

const KEYS: &[&str] = &[
    "shape",
    "particles",
    "q",
    "seed",
    "steps",
    "out",
    "style",
    "scale",
    "init",
];

/// Fixed render palette by type; entries past the first two are reserved
/// for slice views of higher-dimensional lattices.
const PALETTE: [(u8, u8, u8); 8] = [
    (255, 0, 0),
    (0, 0, 255),
    (0, 160, 0),
    (255, 160, 0),
    (128, 0, 192),
    (0, 192, 192),
    (255, 0, 255),
    (96, 96, 96),
];
const VACANT: (u8, u8, u8) = (255, 255, 255);

pub fn run(args: RenderArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    cfg.check_keys(KEYS)?;
    let seed = resolve(args.seed, cfg, "seed", Some(0))?;
    let steps = resolve(args.steps, cfg, "steps", Some(50))?;
    let q = resolve(args.q, cfg, "q", Some(0.0))?;
    let style = resolve(args.style, cfg, "style", Some(FrameStyle::Ascii))?;
    let scale = resolve(args.scale, cfg, "scale", Some(1))?;
    let out: std::path::PathBuf = match args.out.or(cfg.get("out")?) {
        Some(p) => p,
        None => return Err(CliError::Usage("--out directory is required".into())),
    };
    if scale == 0 {
        return Err(CliError::Usage("--scale must be at least 1".into()));
    }
    let init_path: Option<std::path::PathBuf> = args.init.or(cfg.get("init")?);
    let policy = SwitchPolicy::new(q)?;

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
    if initial.shape().axes() != 2 {
        return Err(CliError::Usage(format!(
            "rendering needs a 2-D lattice, got {}",
            initial.shape()
        )));
    }

    std::fs::create_dir_all(&out)
        .map_err(CliError::io(format!("creating {}", out.display())))?;
    let mut clock = RunClock::start("render");
    clock.note("shape", initial.shape());
    clock.note("particles", initial.len());
    clock.note("q", q);
    clock.note("seed", seed);
    clock.note("steps", steps);
    clock.note("style", style);
    clock.note("scale", scale);

    let mut state = initial;
    let mut rng = derive_rng(seed, STREAM_DYNAMICS, 0);
    write_frame(&out, 0, &state, style, scale)?;
    for t in 0..steps {
        let (next, _) = step(&state, &policy, t, &mut rng)?;
        state = next;
        write_frame(&out, t + 1, &state, style, scale)?;
    }
    clock.write_sidecar(&out)?;
    println!("wrote {} frames to {}", steps + 1, out.display());
    Ok(())
}

fn write_frame(
    dir: &Path,
    t: u64,
    config: &Configuration,
    style: FrameStyle,
    scale: u32,
) -> Result<(), CliError> {
    let (name, bytes) = match style {
        FrameStyle::Ascii => (format!("frame_{t:06}.txt"), ascii_frame(config).into_bytes()),
        FrameStyle::Ppm => (format!("frame_{t:06}.ppm"), ppm_frame(config, scale)),
    };
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(CliError::io(format!("writing {}", path.display())))
}

/// One text line per row (coordinate 2), '.' vacant, '>' type 1, 'v' type 2.
pub fn ascii_frame(config: &Configuration) -> String {
    let shape = config.shape();
    let (w, h) = (shape.extent(0), shape.extent(1));
    let mut text = String::with_capacity((w as usize + 1) * h as usize);
    for y in 0..h {
        for x in 0..w {
            let lin = shape.linearize(&[x, y]);
            text.push(match config.occupant(lin) {
                None => '.',
                Some(id) => match config.type_of(id) {
                    1 => '>',
                    _ => 'v',
                },
            });
        }
        text.push('\n');
    }
    text
}

/// Binary P6, `scale` x `scale` pixels per cell.
pub fn ppm_frame(config: &Configuration, scale: u32) -> Vec<u8> {
    let shape = config.shape();
    let (w, h) = (shape.extent(0) * scale, shape.extent(1) * scale);
    let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
    bytes.reserve((w * h * 3) as usize);
    for py in 0..h {
        let y = py / scale;
        for px in 0..w {
            let x = px / scale;
            let lin = shape.linearize(&[x, y]);
            let (r, g, b) = match config.occupant(lin) {
                None => VACANT,
                Some(id) => PALETTE[(config.type_of(id) as usize - 1) % PALETTE.len()],
            };
            bytes.extend_from_slice(&[r, g, b]);
        }
    }
    bytes
}
