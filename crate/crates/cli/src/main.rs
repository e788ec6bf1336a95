mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sima_core::CaptionFormat;

use crate::config::{Overrides, Settings, ENV_CONFIG};
use crate::io::Failure;

#[derive(Parser, Debug)]
#[command(name = "sima", version, about = "Compile annotated narration scripts into edit plans")]
struct Cli {
    /// Project config (TOML)
    #[arg(long, global = true, env = ENV_CONFIG, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Machine-readable console reports
    #[arg(long, global = true)]
    json: bool,
    /// Add a generation timestamp to reports
    #[arg(long, global = true)]
    stamp: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the script and print its canonical form
    Parse,
    /// Check the script for structure, pacing and coverage problems
    Validate,
    /// Polish caption files and align them to the script
    Captions {
        #[arg(long, default_value = "all", value_parser = commands::parse_split_arg)]
        split: commands::SplitArg,
    },
    /// Compile splits into EDLs, a rewritten script and coverage reports
    Compile {
        #[arg(long, default_value = "all", value_parser = commands::parse_split_arg)]
        split: commands::SplitArg,
    },
    /// Write the image and video download manifests
    Manifest,
    /// Check collected assets, transition graphics and thumbnails
    Verify,
    /// Estimate pipeline workload
    Estimate,
    /// Export polished captions for the whole video
    ExportCaptions {
        #[arg(long, default_value = "srt")]
        format: CaptionFormat,
    },
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let settings = Settings::resolve(cli.config.as_deref(), &cli.overrides).map_err(Failure::Setup)?;
    let ctx = commands::Context { settings, json: cli.json, stamp: cli.stamp };
    match cli.command {
        Command::Parse => commands::parse(&ctx),
        Command::Validate => commands::validate(&ctx),
        Command::Captions { split } => commands::captions(&ctx, split),
        Command::Compile { split } => commands::compile(&ctx, split),
        Command::Manifest => commands::manifest(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Estimate => commands::estimate(&ctx),
        Command::ExportCaptions { format } => commands::export_captions(&ctx, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {f}");
            match f {
                Failure::Setup(_) => ExitCode::from(2),
                Failure::Input(_) => ExitCode::from(1),
            }
        }
    }
}
