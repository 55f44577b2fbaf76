use clap::Parser;

use hgs::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    run(Cli::parse())
}
