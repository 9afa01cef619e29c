//! Bundled networks.

use std::io::Cursor;
use std::path::Path;

use crate::error::Result;
use crate::graph::{parse_edge_list, parse_labels, Graph, LabelVector, LoadOptions, NodeIndexing};

const KARATE_EDGES: &str = include_str!("../data/karate.edges");
const KARATE_LABELS: &str = include_str!("../data/karate.labels");

/// Zachary's karate club: 34 members, 78 friendships, and the two factions
/// after the split (label 1 = instructor's group, 2 = administrator's).
pub fn karate() -> (Graph, LabelVector) {
    let opts = LoadOptions {
        indexing: NodeIndexing::OneBased,
        ..LoadOptions::default()
    };
    let load = || -> Result<(Graph, LabelVector)> {
        let (graph, _) = parse_edge_list(Cursor::new(KARATE_EDGES), Path::new("karate.edges"), &opts)?;
        let labels = parse_labels(Cursor::new(KARATE_LABELS), Path::new("karate.labels"), &graph)?;
        Ok((graph, labels))
    };
    load().expect("bundled karate data is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karate_shape() {
        let (g, labels) = karate();
        assert_eq!(g.n(), 34);
        assert_eq!(g.edge_count(), 78);
        assert!(g.is_connected());
        assert_eq!(labels.sizes(), vec![16, 18]);
        assert_eq!(g.degrees()[33], 17);
        assert_eq!(g.degrees()[0], 16);
    }
}
