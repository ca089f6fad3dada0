use std::collections::{BTreeMap, BTreeSet};

/// A cumulative interaction graph at the end of `day`. Nodes are sorted by id
/// and edges are deduplicated pairs of node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    day: u32,
    directed: bool,
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl Snapshot {
    pub fn from_edges<'a>(
        day: u32,
        directed: bool,
        seeds: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Self {
        let edges: Vec<(&str, &str)> = edges.into_iter().collect();
        let names: BTreeSet<&str> = seeds
            .into_iter()
            .chain(edges.iter().flat_map(|&(s, d)| [s, d]))
            .collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let pairs = edges.iter().map(|(s, d)| (index[s], index[d]));
        Self::from_indexed(day, directed, names.into_iter().map(String::from).collect(), pairs)
    }

    /// `nodes` must be sorted and unique; edge endpoints index into it.
    pub(crate) fn from_indexed(
        day: u32,
        directed: bool,
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| if directed || a <= b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Snapshot {
            day,
            directed,
            nodes,
            edges,
        }
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, node: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(node)).ok()
    }

    /// Edges as index pairs, sorted.
    pub fn edge_indices(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    pub fn has_edge(&self, src: &str, dst: &str) -> bool {
        let (Some(a), Some(b)) = (self.index_of(src), self.index_of(dst)) else {
            return false;
        };
        let key = if self.directed || a <= b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).is_ok()
    }

    /// Successor lists; in undirected snapshots both directions are listed.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            if !self.directed && a != b {
                adj[b].push(a);
            }
        }
        adj
    }

    /// Distinct neighbours ignoring direction and self-loops.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Subgraph induced by the given node indices.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Snapshot {
        let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let nodes = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|(a, b)| Some((*remap.get(a)?, *remap.get(b)?)));
        Snapshot::from_indexed(self.day, self.directed, nodes, edges)
    }

    /// Graphviz rendering, for external layout tools.
    pub fn to_dot(&self) -> String {
        let (kw, arrow) = if self.directed {
            ("digraph", "->")
        } else {
            ("graph", "--")
        };
        let mut out = format!("{kw} snapshot_{} {{\n", self.day);
        for n in &self.nodes {
            out.push_str(&format!("  \"{}\";\n", escape(n)));
        }
        for (a, b) in self.edges() {
            out.push_str(&format!("  \"{}\" {arrow} \"{}\";\n", escape(a), escape(b)));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "day": self.day,
            "directed": self.directed,
            "nodes": self.nodes,
            "edges": self.edges().map(|(s, d)| serde_json::json!({"src": s, "dst": d})).collect::<Vec<_>>(),
        })
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
