use cal_cli::{run, Cli};
use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CAL_LOG", "warn")).init();
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
