//! Prints the effective default configuration as TOML.

fn main() {
    print!("{}", bringhome::cli::RunConfig::default().to_toml());
}
