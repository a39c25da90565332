use clap::Parser;

fn main() {
    std::process::exit(sumsq::cli::run(sumsq::cli::Cli::parse()));
}
