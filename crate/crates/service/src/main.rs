use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use pfp_core::SessionStore;

/// Serve the elicitation session API.
#[derive(Debug, Parser)]
#[command(name = "pfp-service", version)]
struct Args {
    /// Directory holding one JSON document per session.
    #[arg(long, env = "PFP_DATA_DIR", default_value = "pfp-data")]
    data_dir: PathBuf,

    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let store = SessionStore::open(&args.data_dir).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(args.bind).await?;
    eprintln!(
        "pfp-service listening on {} (data in {})",
        listener.local_addr()?,
        args.data_dir.display()
    );
    axum::serve(listener, pfp_service::router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
