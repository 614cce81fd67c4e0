use clap::Parser;
use mgd_bench::config::Cli;
use mgd_bench::{runner, verify};

// exit codes: 0 solves attempted and report written, 2 configuration
// error, 3 verify-suite failure
fn main() {
    let cli = Cli::parse();

    if let Some(suite) = cli.verify.clone() {
        match verify::run_suite(&suite) {
            Ok(true) => return,
            Ok(false) => std::process::exit(3),
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
        }
    }

    let cfg = match cli.merge_config_file().and_then(|c| c.into_bench_config()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };

    match runner::run_bench(&cfg) {
        Ok(csv) => {
            print!("{csv}");
            eprintln!("report written to {}", cfg.output.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
