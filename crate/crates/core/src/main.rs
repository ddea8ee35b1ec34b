use clap::Parser;

fn main() {
    let cli = apack::cli::Cli::parse();
    std::process::exit(apack::cli::run(cli));
}
