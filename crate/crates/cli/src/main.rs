//! `daf`: training runs, ablations, ROC curves, gradient checking, and
//! synthetic data for the dynamic-attention-fusion sentiment model.

mod args;
mod commands;
mod config_file;
mod run_config;

use clap::Parser;
use daf_core::DafError;

/// Exit codes: 0 success, 2 configuration error, 3 data/format error,
/// 4 numeric failure, 1 anything else. (clap's own usage errors also
/// exit with 2.)
fn exit_code(e: &DafError) -> i32 {
    match e {
        DafError::Config(_) => 2,
        DafError::Data(_) | DafError::Json(_) | DafError::Io(_) => 3,
        e if e.is_numeric() => 4,
        _ => 1,
    }
}

fn main() {
    let cli = args::Cli::parse();
    let result = match &cli.command {
        args::Command::Train(a) => commands::train::run(a),
        args::Command::Evaluate(a) => commands::evaluate::run(a),
        args::Command::Ablate(a) => commands::ablate::run(a),
        args::Command::Roc(a) => commands::roc::run(a),
        args::Command::Gradcheck(a) => commands::gradcheck::run(a),
        args::Command::GenSynth(a) => commands::gen_synth::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
