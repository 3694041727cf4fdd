// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use std::{io::Write, path::PathBuf};

/// MiniMove language server.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Speak LSP over stdin and stdout (the only transport).
    #[arg(long, default_value_t = true)]
    stdio: bool,
    /// Append a trace of received messages and pipeline metrics to this file.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let log: Option<Box<dyn Write + Send>> = match &args.log {
        Some(p) => Some(Box::new(
            std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)?,
        )),
        None => None,
    };
    let stdin = std::io::BufReader::new(std::io::stdin());
    let stdout = std::io::stdout().lock();
    let code = minimove_lsp::serve(stdin, stdout, log);
    std::process::exit(code);
}
