use clap::Parser;
use eqkit::cli::{run, RunConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EQKIT_LOG", "warn")).init();
    let config = RunConfig::parse();
    std::process::exit(run(&config));
}
