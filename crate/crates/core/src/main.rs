use clap::Parser;

use amenable_entropy::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
