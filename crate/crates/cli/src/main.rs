use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod output;

use args::{Cli, Command};
use commands::{Ctx, Status};
use output::{input_err, internal_err, CliError, CliResult, RunManifest};

fn dispatch(command: &Command, out: &Path, argv: &[String]) -> CliResult<Status> {
    let ctx = Ctx { out, argv };
    match command {
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Bench(a) => commands::bench(&ctx, a),
        Command::Anneal(a) => commands::anneal(&ctx, a),
        Command::Walksat(a) => commands::walksat(&ctx, a),
        Command::SweepTau(a) => commands::sweep_tau(&ctx, a),
        Command::Discretize(a) => commands::discretize(&ctx, a),
        Command::CopyDemo(a) => commands::copy_demo(&ctx, a),
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Replay(a) => replay(&a.manifest, out),
    }
}

/// Re-parses the recorded arguments in the recorded working directory and
/// writes everything under `out` instead of the original location.
fn replay(manifest: &Path, out: &Path) -> CliResult<Status> {
    let m = RunManifest::load(manifest)?;
    let out = std::path::absolute(out).map_err(internal_err)?;
    let argv: Vec<String> = std::iter::once("lagonn".to_string()).chain(m.args.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| input_err(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(input_err("a replay manifest cannot be replayed"));
    }
    std::env::set_current_dir(&m.cwd).map_err(|e| input_err(format!("{}: {e}", m.cwd.display())))?;
    dispatch(&cli.command, &out, &m.args)
}

fn run() -> CliResult<Status> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { Err(CliError::Input(String::new())) } else { Ok(Status::Ok) };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        pool = pool.num_threads(jobs);
    }
    pool.build_global().map_err(internal_err)?;
    dispatch(&cli.command, &cli.out, &argv)
}

fn main() -> ExitCode {
    match run() {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NoSolution) => ExitCode::from(10),
        Err(e) => {
            if !matches!(&e, CliError::Input(m) if m.is_empty()) {
                eprintln!("lagonn: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
