use clap::Parser;
use techdraw_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(cli, &mut std::io::stdout()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
