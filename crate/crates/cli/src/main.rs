use clap::Parser;

use spnet_cli::{run, Command};

#[derive(Parser)]
#[command(name = "spnet", version, about = "Dialog summarization with slot-aware pointer-generator networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
