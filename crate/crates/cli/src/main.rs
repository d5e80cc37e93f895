use clap::{Parser, Subcommand};

use srmap::commands::{
    run_eigen, run_explore, run_language, run_mds, run_navigate, run_oracle, EigenArgs,
    ExploreArgs, LanguageArgs, MdsArgs, NavigateArgs, OracleArgs,
};

#[derive(Parser)]
#[command(
    name = "srmap",
    version,
    about = "Learn and analyze successor representations of grid and language state spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the supervised exploration model and emit TP/SR artifacts
    Explore(ExploreArgs),
    /// Train the navigation agent on a maze and emit policy TP/SR artifacts
    Navigate(NavigateArgs),
    /// Train on generated sentences and emit TP/SR and the transition graph
    Language(LanguageArgs),
    /// Decompose a ground-truth SR into eigenmaps
    Eigen(EigenArgs),
    /// Project language matrices to 2D and score word-class clustering
    Mds(MdsArgs),
    /// Emit ground-truth matrices only
    Oracle(OracleArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Explore(args) => run_explore(&args),
        Command::Navigate(args) => run_navigate(&args),
        Command::Language(args) => run_language(&args),
        Command::Eigen(args) => run_eigen(&args),
        Command::Mds(args) => run_mds(&args),
        Command::Oracle(args) => run_oracle(&args),
    };
    match result {
        Ok(manifest) => {
            println!("{} run complete", manifest.kind);
            for (name, value) in &manifest.metrics {
                println!("  {name} = {value}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
