//! Write a synthetic structure set and metadata table for trying the CLI.
//!
//! `cargo run -p cromech-cli --example synthetic_fixture -- <dir> [n] [seed]`

#[path = "../tests/common/mod.rs"]
mod common;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = std::path::PathBuf::from(args.next().expect("usage: synthetic_fixture <dir> [n] [seed]"));
    let n = args.next().map_or(60, |v| v.parse().expect("n"));
    let seed = args.next().map_or(0, |v| v.parse().expect("seed"));
    let fx = common::write_fixture(&dir, n, 0, seed);
    println!("metadata:   {}", fx.metadata.display());
    println!("structures: {}", fx.structures.display());
    println!("config:     {}", fx.config.display());
}
