//! Loading sample files into a workspace and writing them back canonically.

use situskit::cli::Workspace;
use std::path::PathBuf;

fn main() -> situskit::Result<()> {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data"));
    let files: Vec<PathBuf> = ["chain4.struct", "chain2.order", "line3.metric", "sierpinski.topo"].iter().map(|f| dir.join(f)).collect();
    let refs: Vec<&std::path::Path> = files.iter().map(|p| p.as_path()).collect();
    let ws = Workspace::load(&refs)?;
    for name in ws.names() {
        let obj = ws.get(name)?;
        println!("== {name} ({})\n{}", obj.kind(), obj.write());
    }
    Ok(())
}
