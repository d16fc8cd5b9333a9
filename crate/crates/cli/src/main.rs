use clap::Parser;

fn main() {
    let cli = rieopt_cli::Cli::parse();
    if let Err(e) = rieopt_cli::run(cli) {
        eprintln!("rieopt: {e}");
        std::process::exit(e.exit_code());
    }
}
