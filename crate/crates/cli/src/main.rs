//! `entfilter`: build, inspect and simulate the heralded entanglement filter.

mod commands;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use entfilter::elements::DetectorModel;
use entfilter::filter::FilterVariant;
use entfilter::noise::VisibilityParams;
use entfilter::{Error, Result};

use report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "entfilter",
    version,
    about = "Exact simulation of a heralded two-photon entanglement filter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Circuit build: `ppbs` (partially polarizing splitters) or `original`.
    #[arg(long, global = true, default_value = "ppbs", value_parser = parse_variant)]
    variant: FilterVariant,

    /// HOM visibility for photons of the same pair.
    #[arg(long, global = true, default_value_t = 0.96)]
    v_same: f64,

    /// HOM visibility for photons of different pairs.
    #[arg(long, global = true, default_value_t = 0.85)]
    v_cross: f64,

    /// Perfectly indistinguishable photons (overrides the visibilities).
    #[arg(long, global = true)]
    ideal: bool,

    /// Detector model: `threshold`, `number` (exactly one photon) or `number:N`.
    #[arg(long, global = true, default_value = "threshold", value_parser = parse_detector)]
    detector: DetectorModel,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Seed for synthetic count sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Emit Poisson-sampled count tables for this many seconds.
    #[arg(long, global = true)]
    counts: Option<f64>,

    /// Signal-pair rate per input setting, in pairs per second.
    #[arg(long, global = true, default_value_t = 2.0)]
    pair_rate: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Heralded 4x4 map, success probabilities and deviation from the target.
    HeraldMap,
    /// Z->Z, X->Y and X->X truth tables with fidelities and process report.
    TruthTables,
    /// Process fidelity from three fidelities or a JSON file of tables.
    ProcessReport {
        /// F_zz F_xy F_xx.
        #[arg(num_args = 0..=3, allow_negative_numbers = true)]
        fidelities: Vec<f64>,
        /// JSON object with `zz`, `xy` and `xx` 4x4 tables.
        #[arg(long, conflicts_with = "fidelities")]
        tables: Option<PathBuf>,
    },
    /// Double-pair ancilla background with vacuum signal inputs.
    Background,
    /// Run a circuit file on a photon list.
    Simulate {
        circuit: PathBuf,
        /// Photons as `path:pol[:overlap]`, comma separated, e.g. `s1:V,s2:V,a1:H,a2:H`.
        #[arg(long)]
        input: String,
    },
    /// Write the built-in filter in the circuit-description format.
    ExportCircuit {
        /// Output file (standard output when absent).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn parse_variant(s: &str) -> std::result::Result<FilterVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_detector(s: &str) -> std::result::Result<DetectorModel, String> {
    match s.split_once(':') {
        None if s == "threshold" => Ok(DetectorModel::Threshold),
        None if s == "number" => Ok(DetectorModel::NumberResolving(1)),
        Some(("number", n)) => n
            .parse()
            .map(DetectorModel::NumberResolving)
            .map_err(|_| format!("'{n}' is not a photon count")),
        _ => Err(format!(
            "unknown detector '{s}' (expected threshold, number or number:N)"
        )),
    }
}

/// Settings shared by the scenario commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub variant: FilterVariant,
    pub v_same: f64,
    pub v_cross: f64,
    pub ideal: bool,
    pub detector: DetectorModel,
    pub seed: u64,
    pub counts: Option<f64>,
    pub pair_rate: f64,
}

impl RunConfig {
    pub fn visibilities(&self) -> Result<VisibilityParams> {
        if self.ideal {
            Ok(VisibilityParams::ideal())
        } else {
            VisibilityParams::new(self.v_same, self.v_cross)
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(d) = self.counts {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Validation(format!(
                    "--counts {d} must be a positive duration"
                )));
            }
        }
        if !(self.pair_rate.is_finite() && self.pair_rate > 0.0) {
            return Err(Error::Validation(format!(
                "--pair-rate {} must be positive",
                self.pair_rate
            )));
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<String> {
    let cfg = RunConfig {
        variant: cli.variant,
        v_same: cli.v_same,
        v_cross: cli.v_cross,
        ideal: cli.ideal,
        detector: cli.detector,
        seed: cli.seed,
        counts: cli.counts,
        pair_rate: cli.pair_rate,
    };
    cfg.validate()?;
    let report = match &cli.command {
        Command::HeraldMap => commands::herald_map(&cfg)?,
        Command::TruthTables => commands::truth_tables(&cfg)?,
        Command::ProcessReport { fidelities, tables } => {
            commands::process(fidelities, tables.as_deref())?
        }
        Command::Background => commands::background(&cfg)?,
        Command::Simulate { circuit, input } => commands::simulate(circuit, input)?,
        Command::ExportCircuit { output } => {
            let text = commands::export(&cfg);
            return match output {
                Some(path) => {
                    fs::write(path, &text).map_err(|e| {
                        Error::Config(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok(String::new())
                }
                None => Ok(text),
            };
        }
    };
    Ok(report.render(cli.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
