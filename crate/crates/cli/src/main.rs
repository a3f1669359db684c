use clap::Parser;
use hgt_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("HGT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(&cli.command) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("hgt {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
