use clap::Parser;

fn main() {
    std::process::exit(bringhome::cli::run(bringhome::cli::Cli::parse()));
}
