use clap::Parser;
use ordinal_risk::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(&cli) {
        Ok(out) => print!("{}", out.report),
        Err(e) => {
            eprintln!("error: code={} message={:?}", e.code(), e.to_string());
            std::process::exit(1);
        }
    }
}
