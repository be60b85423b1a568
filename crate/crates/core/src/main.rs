use clap::Parser;

fn main() {
    let cli = squatcalc_core::cli::Cli::parse();
    std::process::exit(squatcalc_core::cli::main_with(cli));
}
