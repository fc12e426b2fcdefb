use clap::Parser;
use solvkernel_cli::{args::Cli, run, EXIT_ERROR};

fn main() {
    let echo = std::env::args().collect::<Vec<_>>().join(" ");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(&cli, &echo));
}
