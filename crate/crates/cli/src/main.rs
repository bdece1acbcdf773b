use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use strobofp_cli::error::{EXIT_OK, EXIT_USAGE};
use strobofp_cli::{commands, init_thread_pool, Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK } as u8);
        }
    };
    let code = match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("strobofp: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_thread_pool(std::env::var("STROBOFP_THREADS").ok().as_deref())?;
    let config = cli.command.into_config();
    let stderr = std::io::stderr();
    let mut log = stderr.lock();
    if cli.dump_config {
        serde_json::to_writer_pretty(&mut log, &config)?;
        writeln!(log)?;
    }
    log::debug!("config: {config:?}");
    commands::run(&config, &mut log)
}
