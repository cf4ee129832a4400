use clap::Parser;
use shellbound_cli::{run, Cli, EXIT_CONFIG};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let threads = std::env::var("SHELLBOUND_THREADS").ok();
    let code = run(&cli, threads.as_deref(), &mut std::io::stderr());
    std::process::exit(code);
}
