//! Batch front end for the cavity-QED single-photon toolbox: loads
//! parameter presets, runs synthesis/dynamics/gate/sweep operations, and
//! reproduces the published tables and figures as CSV/JSON/SVG with a
//! manifest per run.
//!
//! Exit codes: 0 success, 1 failed reproduction cell or runtime failure,
//! 2 usage error.

mod commands;
mod out;
mod par;
mod reproduce;
mod svg;

use clap::{Parser, Subcommand};
use commands::{
    CliError, Ctx, GateArgs, ModeArg, MultiplexArgs, ProtocolArgs, SweepArgs, SweepKind,
    SynthArgs, TransmissionArgs,
};
use out::Formats;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cavqed", version, about = "Cavity-QED single-photon toolbox")]
struct Cli {
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Artifact formats (comma-separated): csv, json, svg. Default: all.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<String>,
    /// Samples on the [0, T] synthesis/integration grid.
    #[arg(long, global = true, default_value_t = 4096)]
    grid: usize,
    /// Worker threads for sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Suppress wall-clock fields so reruns are byte-identical.
    #[arg(long, global = true)]
    reproducible: bool,
    /// Preset file overriding the built-in table (grammar: name.key = number).
    #[arg(long, global = true)]
    presets_file: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ModeOpt {
    Sine2,
    Gauss,
}

#[derive(clap::Args)]
struct SynthOpts {
    /// Preset name (e.g. cavity1a, cavity5, zeeman).
    #[arg(long)]
    preset: String,
    /// Target retrieval efficiency (default: 1 − published infidelity).
    #[arg(long)]
    eta_r: Option<f64>,
    /// Photon duration override (ns).
    #[arg(long, alias = "T", value_name = "NS")]
    t: Option<f64>,
    /// Temporal mode shape.
    #[arg(long, value_enum, default_value = "sine2")]
    mode: ModeOpt,
    /// Retrieval case override: 1 (resonant) or 2 (shifted point).
    #[arg(long)]
    case: Option<u8>,
    /// Use the adiabatic closed forms instead of exact synthesis.
    #[arg(long)]
    adiabatic: bool,
}

impl SynthOpts {
    fn to_args(&self) -> SynthArgs {
        SynthArgs {
            preset: self.preset.clone(),
            eta_r: self.eta_r,
            t_ns: self.t,
            mode: if self.mode == ModeOpt::Sine2 { ModeArg::Sine2 } else { ModeArg::Gauss },
            case: self.case,
            adiabatic: self.adiabatic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a retrieval control pulse.
    Synthesize(SynthOpts),
    /// Synthesize and integrate a retrieval run.
    Retrieve(SynthOpts),
    /// Absorb a photon with the time-reversed pulse.
    Absorb(SynthOpts),
    /// Evaluate the waveguide transmission coefficient.
    Transmission {
        #[arg(long)]
        preset: String,
        /// Atom coupled (|g⟩); use --uncoupled for the empty cavity.
        #[arg(long, conflicts_with = "uncoupled")]
        coupled: bool,
        #[arg(long)]
        uncoupled: bool,
        /// Atom-probe detuning (GHz, multiplied by 2π internally).
        #[arg(long, default_value_t = 0.0)]
        delta_ap: f64,
        /// Cavity-probe detuning (GHz).
        #[arg(long, default_value_t = 0.0)]
        delta_cp: f64,
        /// Also emit a transmission spectrum.
        #[arg(long)]
        spectrum: bool,
        /// Spectrum half-span (GHz).
        #[arg(long)]
        span: Option<f64>,
        /// Spectrum sample count.
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
    /// Emit an atom-photon gate matrix.
    Gate {
        /// ideal | measured | unmeasured | w
        #[arg(long)]
        which: String,
        /// Coupling phase φ for the non-chiral sequences.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Preset fixing g/κ_ex (needed for the W gate).
        #[arg(long)]
        preset: Option<String>,
    },
    /// Sweep the coupling drift Δg/g and fit the infidelity.
    SweepDg {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Sweep the absorption direction instead of retrieval.
        #[arg(long)]
        absorption: bool,
    },
    /// Sweep the common Doppler shift Δd/g and fit the infidelity.
    SweepDoppler {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long)]
        absorption: bool,
    },
    /// Multiplexing plan for a per-cavity occupation probability.
    Multiplex {
        #[arg(long)]
        p: f64,
        /// Passive-chain length for the loss estimate.
        #[arg(long)]
        chain_n: Option<u32>,
        #[arg(long)]
        preset: Option<String>,
        /// Also emit a CSV sweep over p ∈ [p_min, p_max] with this many points.
        #[arg(long)]
        sweep_points: Option<usize>,
        #[arg(long, default_value_t = 0.001)]
        p_min: f64,
        #[arg(long, default_value_t = 0.5)]
        p_max: f64,
    },
    /// Run a verification protocol.
    Protocol {
        #[command(subcommand)]
        which: ProtocolCmd,
    },
    /// Reproduce a published table or figure and gate on its tolerances.
    Reproduce {
        /// table1 | table2 | table3 | fig6 | fig7 | fig9 | fig10 | all
        target: String,
    },
}

#[derive(Subcommand)]
enum ProtocolCmd {
    /// Key-distribution truth table by exhaustive branch enumeration.
    Qkd {
        /// fock | polarization
        #[arg(long)]
        encoding: String,
        /// x | y
        #[arg(long)]
        basis: String,
    },
    /// Single-rail GHZ state with stabilizer verification.
    Ghz {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// 1D path cluster state with stabilizer verification.
    Cluster {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// single-rail | dual-rail
        #[arg(long, default_value = "single-rail")]
        encoding: String,
    },
    /// Ring cluster state (single rail).
    Ring {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Photon-photon controlled-phase circuit check.
    Ppcz,
    /// Non-destructive photon detection circuit check.
    Qnd,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let formats = Formats::parse(&cli.format).map_err(CliError::Usage)?;
    if cli.grid < 16 {
        return Err(CliError::usage("--grid must be at least 16 samples"));
    }
    let ctx = Ctx {
        out_dir: cli.out,
        formats,
        grid: cli.grid,
        jobs: cli.jobs,
        reproducible: cli.reproducible,
        presets: Ctx::load(cli.presets_file.as_deref())?,
    };
    match cli.command {
        Command::Synthesize(opts) => commands::synthesize(&ctx, &opts.to_args())?,
        Command::Retrieve(opts) => commands::retrieve(&ctx, &opts.to_args())?,
        Command::Absorb(opts) => commands::absorb(&ctx, &opts.to_args())?,
        Command::Transmission {
            preset,
            coupled,
            uncoupled,
            delta_ap,
            delta_cp,
            spectrum,
            span,
            points,
        } => {
            let coupled = match (coupled, uncoupled) {
                (false, false) => true,
                (c, _) => c,
            };
            commands::transmission_cmd(
                &ctx,
                &TransmissionArgs {
                    preset,
                    coupled,
                    delta_ap_ghz: delta_ap,
                    delta_cp_ghz: delta_cp,
                    spectrum,
                    span_ghz: span,
                    points,
                },
            )?;
        }
        Command::Gate { which, phi, preset } => {
            commands::gate(&ctx, &GateArgs { which, phi, preset })?
        }
        Command::SweepDg { preset, half_width, points, absorption } => commands::sweep(
            &ctx,
            SweepKind::CouplingDrift,
            &SweepArgs { preset, half_width, points, absorption },
        )?,
        Command::SweepDoppler { preset, half_width, points, absorption } => commands::sweep(
            &ctx,
            SweepKind::Doppler,
            &SweepArgs { preset, half_width, points, absorption },
        )?,
        Command::Multiplex { p, chain_n, preset, sweep_points, p_min, p_max } => {
            commands::multiplex_cmd(
                &ctx,
                &MultiplexArgs { p, chain_n, preset, sweep_points, p_min, p_max },
            )?
        }
        Command::Protocol { which } => {
            let args = match which {
                ProtocolCmd::Qkd { encoding, basis } => ProtocolArgs::Qkd { encoding, basis },
                ProtocolCmd::Ghz { n } => ProtocolArgs::Ghz { n },
                ProtocolCmd::Cluster { n, encoding } => ProtocolArgs::Cluster { n, encoding },
                ProtocolCmd::Ring { n } => ProtocolArgs::Ring { n },
                ProtocolCmd::Ppcz => ProtocolArgs::Ppcz,
                ProtocolCmd::Qnd => ProtocolArgs::Qnd,
            };
            commands::protocol(&ctx, &args)?;
        }
        Command::Reproduce { target } => {
            let failures = reproduce::reproduce(&ctx, &target)?;
            if failures > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
