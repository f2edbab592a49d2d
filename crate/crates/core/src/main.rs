use std::process::ExitCode;

use blockade::cli::{config_path, execute, parse_config, EXIT_USAGE};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let config = match config_path(&argv).map(std::fs::read_to_string).transpose() {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read config file: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let cfg = match parse_config(&argv, config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) if e.help => {
            print!("{}", e.message);
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", e.message.trim_end());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    ExitCode::from(execute(&cfg) as u8)
}
