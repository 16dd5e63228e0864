use clap::Parser;
use gpc_cli::{run, Cli, EXIT_INPUT};

fn main() {
    let cli = Cli::parse();
    let code = match run(
        cli,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    ) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    };
    std::process::exit(code);
}
