//! Writes a dataset in the on-disk text formats, reads it back through its
//! manifest, normalizes feature rows, and saves the kNN graph edge list.
//!
//! cargo run --example load_files [-- OUT_DIR]

use std::path::PathBuf;

use partial_label::dataset::MANIFEST_FILE;
use partial_label::prelude::*;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("partial-label-demo"));

    let ds = make_synthetic(&SyntheticSpec {
        n: 60,
        ..SyntheticSpec::default()
    })?;
    ds.save(&dir)?;
    println!("wrote {}", dir.display());

    let loaded = load_manifest(&dir.join(MANIFEST_FILE))?;
    assert_eq!(loaded.candidates(), ds.candidates());
    println!(
        "reloaded n={} d={} c={} avg candidates {:.2}",
        loaded.n(),
        loaded.d(),
        loaded.c(),
        loaded.average_candidates()
    );

    let unit = normalize_unit_length(&loaded)?;
    let graph = build_knn_graph(&unit, 5, Theta::Auto)?;
    let edges = dir.join("graph_edges.tsv");
    graph.write_edge_list(&edges)?;
    println!(
        "graph on normalized features: {} edges, theta {:.4}, written to {}",
        graph.num_edges(),
        graph.theta(),
        edges.display()
    );
    Ok(())
}
