//! `corpuskit`: the command line over the crawl, clean, anonymize, langid and
//! analyze stages.

mod args;
mod commands;

use clap::Parser;
use tracing::Level;

use args::{Cli, Command};

fn init_logging(cli: &Cli) {
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => Level::WARN,
        (false, 0) => Level::INFO,
        (false, 1) => Level::DEBUG,
        _ => Level::TRACE,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
}

fn main() {
    let cli = Cli::parse();
    init_logging(&cli);
    let result = commands::base_config(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Crawl(a) => commands::crawl(cfg, a),
        Command::Clean(a) => commands::clean(cfg, a),
        Command::Anonymize(a) => commands::anonymize(cfg, a),
        Command::Langid(a) => commands::langid(cfg, a),
        Command::Analyze(a) => commands::analyze(cfg, a),
        Command::Run(a) => commands::run_all(cfg, a),
        Command::Report(a) => commands::report(cfg, a),
    });
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            tracing::error!("{e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
