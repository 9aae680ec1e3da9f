use clap::Parser;
use ctls_dynamics::cli::{run, Cli, Command};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.command == Command::Derive {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            }
        }
        Err(e) => {
            eprintln!("ctls: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
