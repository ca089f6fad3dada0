use std::collections::{BTreeSet, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::snapshot::Snapshot;
use crate::error::{Error, Result};

pub const DEFAULT_P_FORWARD: f64 = 0.7;

/// Forest-fire subsample of `g` with `target_nodes` nodes, returned as the
/// induced subgraph.
///
/// Each burning node ignites a geometric number (mean `p/(1-p)`) of its
/// not-yet-burned successors. Only forward links burn. When the fire dies
/// out a new one starts at a uniformly chosen unburned node.
pub fn forest_fire_sample(g: &Snapshot, target_nodes: usize, p_forward: f64, seed: u64) -> Result<Snapshot> {
    if !(p_forward > 0.0 && p_forward < 1.0) {
        return Err(Error::invalid(format!("p_forward {p_forward} outside (0, 1)")));
    }
    if target_nodes > g.node_count() {
        return Err(Error::invalid(format!(
            "target of {target_nodes} nodes exceeds graph size {}",
            g.node_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn_count = Geometric::new(1.0 - p_forward).map_err(|e| Error::invalid(e.to_string()))?;
    let adj = g.out_adjacency();
    let mut burned = vec![false; g.node_count()];
    let mut sampled = BTreeSet::new();

    while sampled.len() < target_nodes {
        let unburned: Vec<usize> = (0..g.node_count()).filter(|&i| !burned[i]).collect();
        let &start = unburned.choose(&mut rng).expect("target bounded by node count");
        burned[start] = true;
        sampled.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            if sampled.len() >= target_nodes {
                break;
            }
            let mut fresh: Vec<usize> = adj[v].iter().copied().filter(|&u| !burned[u]).collect();
            fresh.sort_unstable();
            fresh.dedup();
            fresh.shuffle(&mut rng);
            let want = (burn_count.sample(&mut rng) as usize)
                .min(fresh.len())
                .min(target_nodes - sampled.len());
            for &u in &fresh[..want] {
                burned[u] = true;
                sampled.insert(u);
                queue.push_back(u);
            }
        }
    }
    Ok(g.induced(&sampled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(n: usize) -> Snapshot {
        let names: Vec<String> = (0..n).map(|i| format!("n{i:03}")).collect();
        Snapshot::from_edges(
            0,
            true,
            [],
            (0..n)
                .flat_map(|i| {
                    let a = names[i].as_str();
                    [(a, names[(i + 1) % n].as_str()), (a, names[(i + 7) % n].as_str())]
                })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn saturation_and_degenerate() {
        let g = ring(40);
        let all = forest_fire_sample(&g, 40, 0.7, 1).unwrap();
        assert_eq!(all.nodes(), g.nodes());
        assert_eq!(all.edge_count(), g.edge_count());
        let one = forest_fire_sample(&g, 1, 0.7, 1).unwrap();
        assert_eq!((one.node_count(), one.edge_count()), (1, 0));
        assert!(forest_fire_sample(&g, 41, 0.7, 1).is_err());
        assert!(forest_fire_sample(&g, 5, 1.0, 1).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let g = ring(100);
        let a = forest_fire_sample(&g, 30, 0.7, 9).unwrap();
        let b = forest_fire_sample(&g, 30, 0.7, 9).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn sample_is_induced_subgraph(n in 5usize..60, frac in 0.1f64..1.0, seed in 0u64..1000) {
            let g = ring(n);
            let target = ((n as f64 * frac) as usize).max(1);
            let s = forest_fire_sample(&g, target, 0.7, seed).unwrap();
            prop_assert_eq!(s.node_count(), target);
            for (a, b) in s.edges() {
                prop_assert!(g.has_edge(a, b));
            }
            // every parent edge between sampled nodes is kept
            for (a, b) in g.edges() {
                if s.index_of(a).is_some() && s.index_of(b).is_some() {
                    prop_assert!(s.has_edge(a, b));
                }
            }
        }
    }
}
