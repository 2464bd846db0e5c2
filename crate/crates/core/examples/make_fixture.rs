//! Writes the demo grid fixture: `cargo run -p clusterlens-core --example make_fixture -- <dir>`.

use std::path::PathBuf;

use clusterlens_core::synthetic::demo_fixture;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/grid20".into()));
    std::fs::create_dir_all(&dir)?;
    let (geometry, values) = demo_fixture(20, 20, 6, 42);
    std::fs::write(dir.join("geometry.geojson"), geometry)?;
    std::fs::write(dir.join("values.csv"), values)?;
    println!("wrote {}", dir.display());
    Ok(())
}
