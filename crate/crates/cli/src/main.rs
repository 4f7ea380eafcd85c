use clap::Parser;
use hopfion_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("hopfion: {e}");
        std::process::exit(e.exit_code());
    }
}
