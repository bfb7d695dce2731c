use clap::Parser;
use emission_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.results).unwrap_or_default());
            println!("wrote {} files to {}", m.outputs.len() + 1, cli.command.args().out.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
