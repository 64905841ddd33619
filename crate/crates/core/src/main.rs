use clap::Parser;

fn main() {
    let cli = rfdgraph::cli::Cli::parse();
    std::process::exit(rfdgraph::cli::run(&cli));
}
