//! Runs a TOML config end to end and writes the artifact directory.
//!
//!     cargo run --release --example run_config -- examples/configs/triangle.toml /tmp/triangle

use std::path::PathBuf;

use signet_id::commands::cmd_simulate;

fn main() -> signet_id::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/triangle.toml"
        ))
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("signet-run"));
    let manifest = cmd_simulate(&config, &out)?;
    println!(
        "wrote {} files to {} in {:.2} s",
        manifest.outputs.len(),
        out.display(),
        manifest.duration_s
    );
    for f in &manifest.outputs {
        println!("  {f}");
    }
    Ok(())
}
