//! Brute-force verification on the binary Tanner graph.
//!
//! Nothing here looks at exponents: codes are expanded to binary matrices and
//! cycles are found by plain graph search, which makes this module an
//! independent check of the polynomial cycle machinery.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{BinaryPcm, BivariatePolyMatrix};
use crate::cycles::Girth;
use crate::spreading::{default_batches, ScCode};

/// Largest graph (in edges) accepted by [`exhaustive_cycle_count`].
pub const MAX_EXHAUSTIVE_EDGES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TannerNode {
    Check(usize),
    Variable(usize),
}

impl fmt::Display for TannerNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TannerNode::Check(i) => write!(f, "c{i}"),
            TannerNode::Variable(j) => write!(f, "v{j}"),
        }
    }
}

/// Bipartite graph of a parity-check matrix. Check `i` is node `i`,
/// variable `j` is node `rows + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    checks: usize,
    adj: Vec<Vec<u32>>,
    edges: usize,
}

impl TannerGraph {
    pub fn new(h: &BinaryPcm) -> Self {
        let checks = h.rows();
        let mut adj = vec![Vec::new(); checks + h.cols()];
        let mut edges = 0;
        for (i, j) in h.iter_ones() {
            adj[i].push((checks + j) as u32);
            adj[checks + j].push(i as u32);
            edges += 1;
        }
        TannerGraph { checks, adj, edges }
    }

    pub fn check_count(&self) -> usize {
        self.checks
    }

    pub fn variable_count(&self) -> usize {
        self.adj.len() - self.checks
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn node(&self, id: usize) -> TannerNode {
        if id < self.checks {
            TannerNode::Check(id)
        } else {
            TannerNode::Variable(id - self.checks)
        }
    }

    fn id(&self, node: TannerNode) -> usize {
        match node {
            TannerNode::Check(i) => i,
            TannerNode::Variable(j) => self.checks + j,
        }
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[id].iter().map(|&v| v as usize)
    }

    pub fn has_edge(&self, a: TannerNode, b: TannerNode) -> bool {
        let (a, b) = (self.id(a), self.id(b));
        a < self.adj.len() && self.adj[a].contains(&(b as u32))
    }

    /// Whether `cycle` lists at least 4 distinct nodes, each adjacent to the
    /// next and the last to the first.
    pub fn is_cycle(&self, cycle: &[TannerNode]) -> bool {
        let mut seen: Vec<_> = cycle.to_vec();
        seen.sort();
        seen.dedup();
        cycle.len() >= 4
            && seen.len() == cycle.len()
            && (0..cycle.len()).all(|k| self.has_edge(cycle[k], cycle[(k + 1) % cycle.len()]))
    }

    /// Shortest cycle through `root` of length below `limit`, as a node list.
    fn shortest_cycle_from(&self, root: usize, limit: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut dist = vec![u32::MAX; n];
        let mut parent = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        let mut best: Option<(usize, usize, usize)> = None;
        while let Some(u) = queue.pop_front() {
            let du = dist[u] as usize;
            // Any cycle closed from here has length >= 2 du + 1.
            let bound = best.map_or(limit, |b| b.0);
            if 2 * du + 1 >= bound {
                break;
            }
            for v in self.neighbors(u) {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u as u32;
                    queue.push_back(v);
                } else if parent[u] as usize != v {
                    let len = du + dist[v] as usize + 1;
                    if len < best.map_or(limit, |b| b.0) {
                        best = Some((len, u, v));
                    }
                }
            }
        }
        let (_, u, v) = best?;
        let trace = |mut x: usize| {
            let mut path = vec![x];
            while x != root {
                x = parent[x] as usize;
                path.push(x);
            }
            path.reverse();
            path
        };
        let (pu, pv) = (trace(u), trace(v));
        let common = pu.iter().zip(&pv).take_while(|(a, b)| a == b).count();
        let mut cycle = pu[common - 1..].to_vec();
        cycle.extend(pv[common..].iter().rev());
        Some(cycle)
    }

    /// Girth below `cap` with a shortest cycle, or `AtLeast(cap)`.
    pub fn girth_with_witness(&self, cap: usize) -> (Girth, Option<Vec<TannerNode>>) {
        let best = AtomicUsize::new(cap);
        let found = (0..self.adj.len())
            .into_par_iter()
            .filter_map(|r| {
                let limit = best.load(Ordering::Relaxed);
                let c = self.shortest_cycle_from(r, limit)?;
                best.fetch_min(c.len(), Ordering::Relaxed);
                Some((c.len(), r, c))
            })
            .min_by_key(|(len, r, _)| (*len, *r));
        match found {
            Some((len, _, c)) => (
                Girth::Exact(len),
                Some(c.into_iter().map(|id| self.node(id)).collect()),
            ),
            None => (Girth::AtLeast(cap), None),
        }
    }

    /// Exact girth when below `cap`, else `AtLeast(cap)`.
    pub fn girth(&self, cap: usize) -> Girth {
        self.girth_with_witness(cap).0
    }
}

pub fn graph_girth(h: &BinaryPcm, cap: usize) -> Girth {
    TannerGraph::new(h).girth(cap)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {edges} edges, exhaustive counting is limited to {limit}")]
    TooLarge { edges: usize, limit: usize },
}

/// Number of simple cycles of each length up to `ell_max`.
pub fn exhaustive_cycle_count(
    g: &TannerGraph,
    ell_max: usize,
) -> Result<BTreeMap<usize, u64>, OracleError> {
    exhaustive_cycle_count_limited(g, ell_max, MAX_EXHAUSTIVE_EDGES)
}

pub fn exhaustive_cycle_count_limited(
    g: &TannerGraph,
    ell_max: usize,
    max_edges: usize,
) -> Result<BTreeMap<usize, u64>, OracleError> {
    if g.edge_count() > max_edges {
        return Err(OracleError::TooLarge {
            edges: g.edge_count(),
            limit: max_edges,
        });
    }
    // Each cycle is found from its smallest node, once per direction.
    let per_root: Vec<Vec<u64>> = (0..g.node_count())
        .into_par_iter()
        .map(|s| {
            let mut counts = vec![0u64; ell_max + 1];
            let mut on_path = vec![false; g.node_count()];
            on_path[s] = true;
            let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
            while let Some(&mut (u, ref mut k)) = stack.last_mut() {
                let Some(&v) = g.adj[u].get(*k) else {
                    on_path[u] = u == s;
                    stack.pop();
                    continue;
                };
                *k += 1;
                let v = v as usize;
                let len = stack.len();
                if v == s && len >= 3 {
                    counts[len] += 1;
                } else if v > s && !on_path[v] && len < ell_max {
                    on_path[v] = true;
                    stack.push((v, 0));
                }
            }
            counts
        })
        .collect();
    let mut out = BTreeMap::new();
    for ell in 3..=ell_max {
        let total: u64 = per_root.iter().map(|c| c[ell]).sum();
        if total > 0 {
            out.insert(ell, total / 2);
        }
    }
    Ok(out)
}

/// Outcome of a successful verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub target: usize,
    pub girth: Girth,
    pub batches: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row weight → number of rows.
    pub row_weights: BTreeMap<usize, usize>,
    /// Column weight → number of columns.
    pub col_weights: BTreeMap<usize, usize>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hist = |m: &BTreeMap<usize, usize>| {
            m.iter()
                .map(|(w, c)| format!("{w}:{c}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "target girth: {}", self.target)?;
        writeln!(f, "girth: {}", self.girth)?;
        writeln!(f, "batches: {}", self.batches)?;
        writeln!(f, "size: {} x {}", self.rows, self.cols)?;
        writeln!(f, "row weights: {}", hist(&self.row_weights))?;
        write!(f, "column weights: {}", hist(&self.col_weights))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("girth {} is below the target {}; witness cycle: {}", .report.girth, .report.target, fmt_cycle(.witness))]
pub struct VerifyError {
    pub report: VerifyReport,
    pub witness: Vec<TannerNode>,
}

fn fmt_cycle(c: &[TannerNode]) -> String {
    c.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn histogram(weights: Vec<usize>) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for w in weights {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Verifies that `pcm` has girth at least `g`.
pub fn verify_pcm(pcm: &BinaryPcm, g: usize, batches: usize) -> Result<VerifyReport, VerifyError> {
    let graph = TannerGraph::new(pcm);
    let (girth, witness) = graph.girth_with_witness(g + 2);
    let report = VerifyReport {
        target: g,
        girth,
        batches,
        rows: pcm.rows(),
        cols: pcm.cols(),
        row_weights: histogram(pcm.row_weights()),
        col_weights: histogram(pcm.col_weights()),
    };
    match witness {
        Some(w) if !girth.at_least(g) => Err(VerifyError { report, witness: w }),
        _ => Ok(report),
    }
}

/// Expands `code` to `batches` replications (default: enough to contain
/// every cycle shorter than `g`) and checks its girth on the binary graph.
pub fn verify_construction(
    code: &ScCode,
    g: usize,
    batches: Option<usize>,
) -> Result<VerifyReport, VerifyError> {
    let batches = batches.unwrap_or_else(|| default_batches(code.w(), g));
    verify_pcm(&code.expand(batches), g, batches)
}

pub fn verify_block(h: &BivariatePolyMatrix, g: usize) -> Result<VerifyReport, VerifyError> {
    verify_pcm(&h.full_expand(), g, 1)
}
