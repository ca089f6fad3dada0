use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tempograph::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankConfig {
    pub damping: f64,
    /// L1 change between iterations at which power iteration stops.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tolerance: 1e-9,
            max_iter: 200,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::invalid(format!("damping {} outside (0, 1)", self.damping)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub scores: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Dense PageRank aligned with `g.nodes()`.
pub(crate) fn pagerank_vector(g: &Snapshot, cfg: &PageRankConfig) -> Result<(Vec<f64>, usize, bool)> {
    cfg.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Ok((Vec::new(), 0, true));
    }
    let adj = g.out_adjacency();
    let nf = n as f64;
    let d = cfg.damping;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let dangling: f64 = adj
            .iter()
            .zip(&rank)
            .filter(|(out, _)| out.is_empty())
            .map(|(_, r)| r)
            .sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (i, out) in adj.iter().enumerate() {
            if out.is_empty() {
                continue;
            }
            let share = d * rank[i] / out.len() as f64;
            for &j in out {
                next[j] += share;
            }
        }
        let diff: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if diff < cfg.tolerance {
            converged = true;
            break;
        }
    }
    let total: f64 = rank.iter().sum();
    rank.iter_mut().for_each(|r| *r /= total);
    Ok((rank, iterations, converged))
}

/// Power-iteration PageRank over the snapshot's edges. Dangling nodes spread
/// their mass uniformly. Undirected snapshots follow edges both ways.
pub fn pagerank(g: &Snapshot, cfg: &PageRankConfig) -> Result<PageRankResult> {
    let (v, iterations, converged) = pagerank_vector(g, cfg)?;
    Ok(PageRankResult {
        scores: g.nodes().iter().cloned().zip(v).collect(),
        iterations,
        converged,
    })
}

/// PageRank of every user on every snapshot, zero where the user is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRankSeries {
    users: Vec<String>,
    days: Vec<u32>,
    /// `values[t][u]` for timestep `t` (0-based) and user index `u`.
    values: Vec<Vec<f64>>,
    pub config: PageRankConfig,
    /// Days whose power iteration hit `max_iter` without converging.
    pub unconverged_days: Vec<u32>,
}

impl PageRankSeries {
    pub fn compute(snapshots: &[Snapshot], cfg: &PageRankConfig) -> Result<Self> {
        let users: Vec<String> = snapshots
            .iter()
            .flat_map(|s| s.nodes().iter().map(String::as_str))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(String::from)
            .collect();
        let per_day: Vec<(Vec<f64>, usize, bool)> = snapshots
            .par_iter()
            .map(|s| pagerank_vector(s, cfg))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(snapshots.len());
        let mut unconverged_days = Vec::new();
        for (s, (v, _, ok)) in snapshots.iter().zip(per_day) {
            if !ok {
                unconverged_days.push(s.day());
            }
            let mut dense = vec![0.0; users.len()];
            for (name, pr) in s.nodes().iter().zip(v) {
                let idx = users.binary_search(name).expect("user collected above");
                dense[idx] = pr;
            }
            values.push(dense);
        }
        Ok(PageRankSeries {
            users,
            days: snapshots.iter().map(Snapshot::day).collect(),
            values,
            config: *cfg,
            unconverged_days,
        })
    }

    /// Build from explicit per-timestep maps; missing users read as zero.
    pub fn from_maps(maps: &[BTreeMap<String, f64>]) -> Self {
        let users: Vec<String> = maps
            .iter()
            .flat_map(|m| m.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let values = maps
            .iter()
            .map(|m| users.iter().map(|u| m.get(u).copied().unwrap_or(0.0)).collect())
            .collect();
        PageRankSeries {
            users,
            days: (0..maps.len() as u32).collect(),
            values,
            config: PageRankConfig::default(),
            unconverged_days: Vec::new(),
        }
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn days(&self) -> &[u32] {
        &self.days
    }

    pub fn timesteps(&self) -> usize {
        self.values.len()
    }

    /// PageRank vector for 0-based timestep `t`, indexed like [`Self::users`].
    pub fn at(&self, t: usize) -> &[f64] {
        &self.values[t]
    }

    /// `day,user,pr` rows for users present that day.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("day,user,pr\n");
        for (day, v) in self.days.iter().zip(&self.values) {
            for (u, &pr) in self.users.iter().zip(v) {
                if pr > 0.0 {
                    out.push_str(&format!("{day},{u},{pr:.12}\n"));
                }
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn snap(edges: &[(&str, &str)]) -> Snapshot {
        Snapshot::from_edges(0, true, [], edges.iter().copied())
    }

    #[test]
    fn two_cycle_uniform() {
        let r = pagerank(&snap(&[("a", "b"), ("b", "a")]), &PageRankConfig::default()).unwrap();
        assert_abs_diff_eq!(r.scores["a"], 0.5, epsilon = 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn star_into_dangling_sink() {
        // a = 0.05 + 0.85 * b / 3, b = 1 - 2a  =>  a = 1 / (3 * (1 + 0.85 * 2 / 3))
        let r = pagerank(&snap(&[("a", "b"), ("c", "b")]), &PageRankConfig::default()).unwrap();
        let a = 1.0 / (3.0 * (1.0 + 0.85 * 2.0 / 3.0));
        assert_abs_diff_eq!(r.scores["a"], a, epsilon = 1e-9);
        assert_abs_diff_eq!(r.scores["b"], 1.0 - 2.0 * a, epsilon = 1e-9);
        assert_abs_diff_eq!(r.scores["a"], 0.2128, epsilon = 1e-3);
        assert_abs_diff_eq!(r.scores["b"], 0.5745, epsilon = 1e-3);
        assert_abs_diff_eq!(r.scores.values().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_and_bad_config() {
        assert!(pagerank(&snap(&[]), &PageRankConfig::default())
            .unwrap()
            .scores
            .is_empty());
        let bad = PageRankConfig {
            damping: 1.0,
            ..Default::default()
        };
        assert!(pagerank(&snap(&[("a", "b")]), &bad).is_err());
    }

    #[test]
    fn undirected_follows_both_ways() {
        let g = Snapshot::from_edges(0, false, [], [("a", "b"), ("b", "c")]);
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        assert!(r.scores["b"] > r.scores["a"]);
        assert_abs_diff_eq!(r.scores["a"], r.scores["c"], epsilon = 1e-12);
    }

    #[test]
    fn series_zero_fills_absent() {
        let s0 = Snapshot::from_edges(0, true, [], [("a", "b")]);
        let s1 = Snapshot::from_edges(1, true, [], [("a", "b"), ("c", "b")]);
        let series = PageRankSeries::compute(&[s0, s1], &PageRankConfig::default()).unwrap();
        assert_eq!(series.users(), ["a", "b", "c"]);
        assert_eq!(series.at(0)[2], 0.0);
        assert!(series.at(1)[2] > 0.0);
    }
}
