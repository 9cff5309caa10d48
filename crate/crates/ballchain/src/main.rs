use clap::Parser;

fn main() {
    let cli = ballchain::cli::Cli::parse();
    std::process::exit(ballchain::cli::main_with(cli));
}
