use clap::Parser;
use mesh3d_bench::cli::Cli;
use mesh3d_bench::error::{exit, CliError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            std::process::exit(exit::OK);
        }
        Err(e) => {
            let err = CliError::validation(e.render().to_string().trim_end());
            eprintln!("{}", err.to_json());
            std::process::exit(exit::INVALID);
        }
    };
    let code = match mesh3d_bench::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
