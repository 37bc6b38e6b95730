use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::Parser;
use corpuskit_core::model::read_corpus;
use corpuskit_crawler::{MockData, MockOptions, MockServer};

/// Serves a local copy of the forum API for development and tests.
#[derive(Debug, Parser)]
#[command(name = "corpuskit-mock-server", version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Number of synthetic posts (ignored with --corpus).
    #[arg(long, default_value_t = 200)]
    posts: usize,
    /// Serve the posts of an interchange file instead.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 25)]
    page_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Added to every response, in milliseconds.
    #[arg(long, default_value_t = 0)]
    latency_ms: u64,
    /// Require this bearer token.
    #[arg(long)]
    bearer: Option<String>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let data = match &args.corpus {
        Some(path) => {
            let corpus = read_corpus(path).with_context(|| format!("reading {}", path.display()))?;
            MockData::from_posts(corpus.posts)
        }
        None => MockData::synthetic(args.posts, args.seed),
    };
    let opts = MockOptions {
        page_size: args.page_size,
        latency: Duration::from_millis(args.latency_ms),
        bearer: args.bearer,
        ..MockOptions::default()
    };
    let listener = tokio::net::TcpListener::bind(&args.addr)
        .await
        .with_context(|| format!("binding {}", args.addr))?;
    eprintln!("mock server listening on http://{}", listener.local_addr()?);
    MockServer::new(data, opts).serve(listener).await?;
    Ok(())
}
