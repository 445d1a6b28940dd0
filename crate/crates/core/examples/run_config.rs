//! Loads a bundled run configuration, validates it and runs it into a temporary
//! directory, then prints the manifest.
//!
//! Run with `cargo run --example run_config -- [configs/encoding_cost.toml]`.

use std::path::PathBuf;

use rqsim::cli::{load_config, run};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/encoding_cost.toml"));
    let mut cfg = match load_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    cfg.out = Some(std::env::temp_dir().join("rqsim-example").join(cfg.kind.name()));
    match run(&cfg) {
        Ok(m) => {
            println!("{} in {:.2} s", m.kind, m.wall_time_s);
            for a in &m.artifacts {
                println!("  {:<24} {} bytes  sha256 {}", a.path, a.bytes, &a.sha256[..16]);
            }
            println!("written to {}", cfg.out.unwrap().display());
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
