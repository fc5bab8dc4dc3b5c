use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use kerr_qfi::TruncationPolicy;

use crate::output::{self, Format};
use crate::states::{AuxDefaults, StateChoice};
use crate::sweep::SweepConfig;
use crate::verify::Level;
use crate::{dist, sweep, verify};

#[derive(Debug, Parser)]
#[command(name = "kerr-qfi", version, about = "Quantum Fisher information of phase-averaged inputs under a quadratic phase")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// QFI and sensitivity over a grid of mean photon numbers.
    Sweep(SweepArgs),
    /// Photon-number distribution of one state.
    Dist(DistArgs),
    /// Check the closed forms against the brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct AuxArgs {
    /// Coherent weight |α|²/N for squeezed coherent states.
    #[arg(long, default_value_t = 0.5)]
    pub z: f64,
    /// Displacement phase for squeezed coherent states, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    /// Number-state index for squeezed number states.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Cat phase for `cat` states, radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
}

impl AuxArgs {
    fn defaults(&self) -> AuxDefaults {
        AuxDefaults {
            z: self.z,
            phi: self.phi,
            m: self.m,
            delta: self.delta,
        }
    }
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long, default_value_t = TruncationPolicy::default().min_fidelity)]
    pub min_fidelity: f64,
    #[arg(long, default_value_t = TruncationPolicy::default().hard_ceiling)]
    pub hard_ceiling: usize,
}

impl PolicyArgs {
    fn policy(&self) -> TruncationPolicy {
        TruncationPolicy {
            min_fidelity: self.min_fidelity,
            hard_ceiling: self.hard_ceiling,
            ..TruncationPolicy::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated states: ts, cs, svs, scs, sn, ecs, ocs, yscs, cat, ns.
    /// Parameters may be given inline, e.g. `scs:z=0.2:phi=1.5708`.
    #[arg(long, default_value = "svs,ts,cs")]
    pub states: String,
    #[arg(long, default_value_t = 1.0)]
    pub n_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub n_max: f64,
    #[arg(long, default_value_t = 20)]
    pub n_steps: usize,
    #[command(flatten)]
    pub aux: AuxArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// One state token, as for `sweep --states`.
    #[arg(long)]
    pub state: String,
    /// Mean photon number N.
    #[arg(long, allow_negative_numbers = true)]
    pub mean: f64,
    /// Largest photon number listed; by default the QFI stopping rule decides.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[command(flatten)]
    pub aux: AuxArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    pub level: Level,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `cli`; `Ok(false)` means verification ran and found a failure.
pub fn execute(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sweep(a) => {
            let config = SweepConfig {
                states: StateChoice::parse_list(&a.states, &a.aux.defaults())?,
                n_min: a.n_min,
                n_max: a.n_max,
                n_steps: a.n_steps,
                policy: a.policy.policy(),
            };
            let rows = sweep::run(&config)?;
            let mut out = output::open(a.output.out.as_deref())?;
            sweep::write(&mut *out, &rows, a.output.format)?;
            out.flush()?;
            Ok(true)
        }
        Command::Dist(a) => {
            let choice = StateChoice::parse(&a.state, &a.aux.defaults())?;
            let policy = a.policy.policy();
            policy.validate()?;
            let report = dist::run(&choice, a.mean, a.cutoff, &policy)?;
            let mut out = output::open(a.output.out.as_deref())?;
            dist::write(&mut *out, &report, a.output.format)?;
            out.flush()?;
            Ok(true)
        }
        Command::Verify(a) => {
            let report = verify::run(a.seed, a.level);
            let mut out = output::open(a.out.as_deref())?;
            verify::write(&mut *out, &report, a.format)?;
            out.flush()?;
            Ok(report.passed)
        }
    }
}
