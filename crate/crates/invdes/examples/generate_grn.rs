//! Regenerates the bundled gene regulatory network data file from the
//! deterministic builder. Run from the crate root:
//!
//! ```text
//! cargo run -p invdes --example generate_grn
//! ```

use invdes::model::canonical_json_pretty;
use invdes::oracles::perturbation::build_network;

fn main() {
    let model = build_network();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/grn_v1.json");
    std::fs::write(path, canonical_json_pretty(&model)).expect("write grn_v1.json");
    println!(
        "wrote {path}: {} genes, {} edges, noise scale {}",
        model.genes.len(),
        model.edges.len(),
        model.noise_scale
    );
}
