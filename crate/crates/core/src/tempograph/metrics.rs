use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::edges::TemporalEdgeList;
use super::union_find::UnionFind;
use crate::error::{Error, Result};
use crate::stats::{ols_slope, pct_change};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    EdgeInflux,
    AvgDegreeCentrality,
    ComponentCount,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::EdgeInflux => "edge_influx",
            Metric::AvgDegreeCentrality => "avg_degree_centrality",
            Metric::ComponentCount => "component_count",
        })
    }
}

/// One value per day of the window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub metric: Metric,
    pub values: Vec<(u32, f64)>,
}

impl MetricSeries {
    pub fn value(&self, day: u32) -> Option<f64> {
        self.values.get(day as usize).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluxReport {
    pub pre_rate: f64,
    pub post_rate: f64,
    pub pct_change: Option<f64>,
}

/// Mean new edges per day before `t1` (days `0..t1`) and from `t1` to the
/// end of the window (inclusive).
pub fn edge_influx(edges: &TemporalEdgeList, t1: u32) -> Result<InfluxReport> {
    let end = edges.end_day();
    if t1 == 0 || t1 >= end {
        return Err(Error::invalid(format!("takeover day {t1} must lie in (0, {end})")));
    }
    let pre = edges.edges().iter().filter(|e| e.day < t1).count();
    let post = edges.len() - pre;
    let pre_rate = pre as f64 / t1 as f64;
    let post_rate = post as f64 / (end - t1 + 1) as f64;
    Ok(InfluxReport {
        pre_rate,
        post_rate,
        pct_change: pct_change(pre_rate, post_rate),
    })
}

pub fn edge_influx_series(edges: &TemporalEdgeList) -> MetricSeries {
    MetricSeries {
        metric: Metric::EdgeInflux,
        values: edges
            .daily_counts()
            .into_iter()
            .enumerate()
            .map(|(d, c)| (d as u32, c as f64))
            .collect(),
    }
}

// Dense ids assigned as nodes first appear, seeds first.
struct Interner<'a> {
    ids: HashMap<&'a str, usize>,
}

impl<'a> Interner<'a> {
    fn id(&mut self, name: &'a str, on_new: impl FnOnce()) -> usize {
        let next = self.ids.len();
        *self.ids.entry(name).or_insert_with(|| {
            on_new();
            next
        })
    }
}

/// Per day, the mean over snapshot nodes of `degree / (N - 1)`, using
/// undirected degree over distinct neighbours. Zero when `N <= 1`.
///
/// Equivalent to `2 * |E_undirected| / (N * (N - 1))`, maintained incrementally.
pub fn avg_degree_centrality_series(edges: &TemporalEdgeList) -> MetricSeries {
    let mut interner = Interner { ids: HashMap::new() };
    for s in edges.seeds() {
        interner.id(s, || {});
    }
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    let mut values = Vec::with_capacity(edges.end_day() as usize + 1);
    let mut it = edges.edges().iter().peekable();
    for day in 0..=edges.end_day() {
        while let Some(e) = it.next_if(|e| e.day <= day) {
            let a = interner.id(&e.src, || {});
            let b = interner.id(&e.dst, || {});
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
        let n = interner.ids.len() as f64;
        let v = if n <= 1.0 {
            0.0
        } else {
            2.0 * pairs.len() as f64 / (n * (n - 1.0))
        };
        values.push((day, v));
    }
    MetricSeries {
        metric: Metric::AvgDegreeCentrality,
        values,
    }
}

/// Weakly connected components per day, streaming edges through a union-find.
pub fn component_count_series(edges: &TemporalEdgeList) -> MetricSeries {
    let mut uf = UnionFind::new(0);
    let mut interner = Interner { ids: HashMap::new() };
    for s in edges.seeds() {
        interner.id(s, || {
            uf.push();
        });
    }
    let mut values = Vec::with_capacity(edges.end_day() as usize + 1);
    let mut it = edges.edges().iter().peekable();
    for day in 0..=edges.end_day() {
        while let Some(e) = it.next_if(|e| e.day <= day) {
            let a = interner.id(&e.src, || {
                uf.push();
            });
            let b = interner.id(&e.dst, || {
                uf.push();
            });
            uf.union(a, b);
        }
        values.push((day, uf.components() as f64));
    }
    MetricSeries {
        metric: Metric::ComponentCount,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthComparison {
    pub pre_slope: f64,
    pub post_slope: f64,
    /// `None` when the pre-takeover slope is zero.
    pub pct_change: Option<f64>,
}

/// OLS slope of the series on days `[0, t1)` and `[t1, end]`.
pub fn growth_rate_comparison(series: &MetricSeries, t1: u32) -> Result<GrowthComparison> {
    type Segment = Vec<(u32, f64)>;
    let (pre, post): (Segment, Segment) = series.values.iter().partition(|(d, _)| *d < t1);
    let slope = |seg: &[(u32, f64)]| -> Result<f64> {
        if seg.len() < 2 {
            return Err(Error::ShortSegment(seg.len()));
        }
        let x: Vec<f64> = seg.iter().map(|&(d, _)| d as f64).collect();
        let y: Vec<f64> = seg.iter().map(|&(_, v)| v).collect();
        ols_slope(&x, &y).ok_or(Error::ShortSegment(1))
    };
    let pre_slope = slope(&pre)?;
    let post_slope = slope(&post)?;
    Ok(GrowthComparison {
        pre_slope,
        post_slope,
        pct_change: pct_change(pre_slope, post_slope),
    })
}

/// Long-format `day,metric,value` rows for plotting.
pub fn write_metrics_csv(path: &Path, series: &[&MetricSeries]) -> Result<()> {
    let mut out = String::from("day,metric,value\n");
    for s in series {
        for &(d, v) in &s.values {
            out.push_str(&format!("{d},{},{v}\n", s.metric));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
