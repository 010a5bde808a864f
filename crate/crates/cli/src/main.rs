use clap::Parser;

fn main() -> anyhow::Result<()> {
    msp_cli::main_with(msp_cli::Cli::parse())
}
