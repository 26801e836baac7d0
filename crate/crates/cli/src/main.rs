use std::process::ExitCode;

use wanroute_cli::{parse_config, run_sweep, ConfigError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WANROUTE_LOG", "info"))
        .format_timestamp(None)
        .init();
    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(ConfigError::Cli(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_sweep(&config) {
        Ok(outcome) => {
            log::info!(
                "wrote {} runs and {} matrix cells to {}",
                outcome.rows.len(),
                outcome.matrix.len(),
                config.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
