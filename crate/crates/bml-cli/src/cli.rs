//! Command-line surface.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "bml",
    version,
    about = "n-dimensional BML traffic cellular automaton: simulation, verification, spectra, sweeps, rendering",
    after_help = "Exit codes: 0 success, 1 usage/config error, 2 budget exceeded, \
                  3 counterexample/falsification, 4 runtime failure.\n\
                  Payload outputs are byte-identical for identical flags and seed; \
                  wall-clock metadata goes to a .meta.json sidecar."
)]
pub struct Cli {
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one trajectory and write per-step statistics.
    Simulate(SimulateArgs),
    /// Check that every initial state reaches free movement (m <= d/2).
    Verify(VerifyArgs),
    /// Velocity spectrum of the deterministic (q = 0) system.
    Spectrum(SpectrumArgs),
    /// Sweep a density x switch-probability grid of trajectory ensembles.
    Sweep(SweepArgs),
    /// Render a 2-D trajectory as per-step ASCII or PPM frames.
    Render(RenderArgs),
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    /// Lattice shape, e.g. 4x4 or 2x2x2.
    #[arg(long)]
    pub shape: Option<String>,
    /// Particle count m.
    #[arg(short = 'm', long = "particles")]
    pub particles: Option<u64>,
    /// Type-switch probability in [0, 1).
    #[arg(long)]
    pub q: Option<f64>,
    /// Master seed (initial state and switch draws derive from it).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of steps to run.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Per-step records file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step record format.
    #[arg(long, value_enum)]
    pub format: Option<RecordFormat>,
    /// Initial configuration JSON, replacing the seeded random state.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Redraw rule when a particle switches type.
    #[arg(long, value_enum)]
    pub redraw: Option<RedrawArg>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(short = 'm', long = "particles")]
    pub particles: Option<u64>,
    /// Type-switch probability; q = 0 verifies exhaustively, q > 0 samples
    /// switch sequences.
    #[arg(long)]
    pub q: Option<f64>,
    /// Master seed for the sampled switch sequences (q > 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Step horizon per sampled realization (q > 0).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Switch-sequence samples per initial state (q > 0).
    #[arg(long = "switch-samples")]
    pub switch_samples: Option<u32>,
    /// Explore beyond m <= d/2; failures become informational.
    #[arg(long = "override-hypothesis")]
    pub override_hypothesis: bool,
    /// Enumeration budget (number of initial states).
    #[arg(long = "max-states")]
    pub max_states: Option<u64>,
    /// Verification report JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(short = 'm', long = "particles")]
    pub particles: Option<u64>,
    /// Must be 0; the spectrum is defined for the deterministic system.
    #[arg(long)]
    pub q: Option<f64>,
    /// Initial-state enumeration mode.
    #[arg(long, value_enum)]
    pub mode: Option<SpectrumModeArg>,
    /// Sample count for --mode sampled.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Master seed for --mode sampled.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumeration budget (number of initial states).
    #[arg(long = "max-states")]
    pub max_states: Option<u64>,
    /// Spectrum report JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    #[arg(long)]
    pub shape: Option<String>,
    /// Comma-separated density grid: integers are particle counts,
    /// fractions in (0,1) are densities m = floor(density * cells).
    #[arg(long)]
    pub densities: Option<String>,
    /// Comma-separated switch probabilities.
    #[arg(long = "q-grid")]
    pub q_grid: Option<String>,
    /// Trajectories per grid point.
    #[arg(long)]
    pub trajectories: Option<u32>,
    /// Steps per trajectory.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Master seed; per-trajectory streams derive from
    /// (seed, grid point index, trajectory index).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tail fraction of steps over which the mean velocity is taken.
    #[arg(long)]
    pub tail: Option<f64>,
    /// Sweep CSV file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct RenderArgs {
    /// Lattice shape; rendering is 2-D only.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(short = 'm', long = "particles")]
    pub particles: Option<u64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Steps to run; steps + 1 frames are written (t = 0 included).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Output directory for the frame files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Frame style.
    #[arg(long, value_enum)]
    pub style: Option<FrameStyle>,
    /// Integer upscaling factor for PPM frames (pixels per cell side).
    #[arg(long)]
    pub scale: Option<u32>,
    /// Initial configuration JSON, replacing the seeded random state.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
        pub enum $name {
            $($variant),+
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(format!("unknown value {other:?}")),
                }
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                match self {
                    $(Self::$variant => write!(f, $text)),+
                }
            }
        }
    };
}

keyword_enum!(RecordFormat {
    Csv => "csv",
    Jsonl => "jsonl",
});

keyword_enum!(FrameStyle {
    Ascii => "ascii",
    Ppm => "ppm",
});

keyword_enum!(SpectrumModeArg {
    Exhaustive => "exhaustive",
    Sampled => "sampled",
});

keyword_enum!(RedrawArg {
    Other => "other",
    All => "all",
});
