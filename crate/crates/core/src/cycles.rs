//! Closed paths in polynomial matrices and the cycle condition.
//!
//! A polynomial matrix is viewed as a bipartite multigraph between row and
//! column nodes with one edge per monomial term. A closed path of length `ℓ`
//! is a sequence of edges `e_0 .. e_{ℓ-1}` where `e_{2k}, e_{2k+1}` share a
//! column, `e_{2k+1}, e_{2k+2}` share a row (indices mod `ℓ`) and consecutive
//! edges are distinct. It lifts to cycles iff the alternating exponent sums
//! `Σ (-1)^i s_i` vanish modulo the lifting factors.
//!
//! A path and its even rotations and reversal describe the same walk; the
//! enumerator yields one representative per class, the lexicographically
//! smallest sequence of edge ids.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::algebra::{BivariatePolyMatrix, EntryGrid, Monomial};
use crate::modular::reduce;
use crate::spreading::ScCode;

pub type EdgeId = u32;

/// Result of a girth search bounded by some maximum length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Girth {
    Exact(usize),
    /// No cycle shorter than the bound exists.
    AtLeast(usize),
}

impl Girth {
    /// True when the girth is known to be at least `g`.
    pub fn at_least(self, g: usize) -> bool {
        match self {
            Girth::Exact(v) | Girth::AtLeast(v) => v >= g,
        }
    }

    pub fn value(self) -> usize {
        match self {
            Girth::Exact(v) | Girth::AtLeast(v) => v,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Exact(v) => write!(f, "{v}"),
            Girth::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// Row/column incidence structure of a polynomial matrix.
///
/// Edge ids are assigned column-major (column, then row, then term order), so
/// every edge in the first `n` columns has a smaller id than any edge to the
/// right of them.
#[derive(Debug, Clone)]
pub struct PathGraph {
    rows: usize,
    edges: Vec<(u32, u32)>,
    slots: Vec<(usize, usize, usize)>,
    row_edges: Vec<Vec<EdgeId>>,
    col_edges: Vec<Vec<EdgeId>>,
}

impl PathGraph {
    pub fn from_grid<T>(grid: &EntryGrid<T>) -> Self {
        let mut edges = Vec::new();
        let mut slots = Vec::new();
        let mut row_edges = vec![Vec::new(); grid.rows()];
        let mut col_edges = vec![Vec::new(); grid.cols()];
        for (j, col) in col_edges.iter_mut().enumerate() {
            for (i, row) in row_edges.iter_mut().enumerate() {
                for k in 0..grid.cell(i, j).len() {
                    let id = edges.len() as EdgeId;
                    edges.push((i as u32, j as u32));
                    slots.push((i, j, k));
                    row.push(id);
                    col.push(id);
                }
            }
        }
        PathGraph {
            rows: grid.rows(),
            edges,
            slots,
            row_edges,
            col_edges,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(row, col)` of an edge.
    pub fn endpoints(&self, e: EdgeId) -> (usize, usize) {
        let (r, c) = self.edges[e as usize];
        (r as usize, c as usize)
    }

    /// `(row, col, index within the entry)` of an edge.
    pub fn slot(&self, e: EdgeId) -> (usize, usize, usize) {
        self.slots[e as usize]
    }

    pub fn term<'a, T>(&self, grid: &'a EntryGrid<T>, e: EdgeId) -> &'a T {
        let (i, j, k) = self.slot(e);
        &grid.cell(i, j)[k]
    }

    /// Number of edges lying in columns `0..n`.
    pub fn edges_in_first_cols(&self, n: usize) -> usize {
        self.col_edges.iter().take(n).map(Vec::len).sum()
    }

    /// Lazily enumerates canonical closed paths of length `ell` whose minimal
    /// edge lies in `roots`.
    pub fn closed_paths(&self, ell: usize, roots: std::ops::Range<usize>) -> ClosedPaths<'_> {
        ClosedPaths::new(self, ell, roots)
    }

    /// All canonical closed paths of length `ell`, optionally restricted to
    /// classes that touch one of the first `restrict_cols` columns.
    pub fn collect_closed_paths(&self, ell: usize, restrict_cols: Option<usize>) -> Vec<ClosedPath> {
        let roots = match restrict_cols {
            Some(n) => self.edges_in_first_cols(n),
            None => self.edge_count(),
        };
        (0..roots)
            .into_par_iter()
            .flat_map_iter(|r| self.closed_paths(ell, r..r + 1))
            .collect()
    }

    /// BFS distances (in edges) from row node `r0` using only edges `>= min_edge`.
    /// Rows are nodes `0..R`, columns `R..R+C`.
    fn distances_from_row(&self, r0: usize, min_edge: EdgeId) -> Vec<u32> {
        let total = self.rows + self.col_edges.len();
        let mut dist = vec![u32::MAX; total];
        dist[r0] = 0;
        let mut queue = VecDeque::from([r0]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u] + 1;
            let (list, to_col) = if u < self.rows {
                (&self.row_edges[u], true)
            } else {
                (&self.col_edges[u - self.rows], false)
            };
            for &e in list.iter().filter(|&&e| e >= min_edge) {
                let (r, c) = self.edges[e as usize];
                let v = if to_col { self.rows + c as usize } else { r as usize };
                if dist[v] == u32::MAX {
                    dist[v] = d;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// An alternating closed walk over matrix terms, stored as edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedPath {
    pub edges: Vec<EdgeId>,
}

impl ClosedPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `Σ (-1)^i value(e_i)`.
    pub fn alternating_sum(&self, mut value: impl FnMut(EdgeId) -> i64) -> i64 {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &e)| if i % 2 == 0 { value(e) } else { -value(e) })
            .sum()
    }

    /// Net signed coefficient of every variable in the alternating sum,
    /// where `var` maps an edge to the variable its exponent is bound to.
    /// Variables with zero net coefficient are kept with `κ = 0`.
    pub fn multiplicities(&self, mut var: impl FnMut(EdgeId) -> usize) -> BTreeMap<usize, i64> {
        let mut kappa = BTreeMap::new();
        for (i, &e) in self.edges.iter().enumerate() {
            *kappa.entry(var(e)).or_insert(0) += if i % 2 == 0 { 1 } else { -1 };
        }
        kappa
    }

    /// All `ℓ` representations (even rotations of the path and its reversal).
    pub fn representations(&self) -> Vec<Vec<EdgeId>> {
        let l = self.edges.len();
        let rev: Vec<EdgeId> = self.edges.iter().rev().copied().collect();
        let mut out = Vec::with_capacity(l);
        for seq in [&self.edges, &rev] {
            for r in (0..l).step_by(2) {
                out.push(seq[r..].iter().chain(&seq[..r]).copied().collect());
            }
        }
        out
    }

    /// Number of distinct sequences in the class.
    pub fn distinct_representations(&self) -> usize {
        self.representations().into_iter().collect::<HashSet<_>>().len()
    }

    /// True when this sequence is the smallest representation of its class.
    pub fn is_canonical(&self) -> bool {
        is_canonical(&self.edges)
    }

    /// Row/column/edge triples along the walk.
    pub fn steps(&self, g: &PathGraph) -> Vec<(usize, usize, EdgeId)> {
        self.edges
            .iter()
            .map(|&e| {
                let (r, c) = g.endpoints(e);
                (r, c, e)
            })
            .collect()
    }

    /// Checks the alternating row/column adjacency and non-backtracking.
    pub fn is_well_formed(&self, g: &PathGraph) -> bool {
        let l = self.edges.len();
        if l < 2 || !l.is_multiple_of(2) {
            return false;
        }
        (0..l).all(|i| {
            let a = self.edges[i];
            let b = self.edges[(i + 1) % l];
            let (ra, ca) = g.endpoints(a);
            let (rb, cb) = g.endpoints(b);
            a != b && if i % 2 == 0 { ca == cb } else { ra == rb }
        })
    }
}

fn is_canonical(path: &[EdgeId]) -> bool {
    let l = path.len();
    let first = path[0];
    let less = |other: &mut dyn Iterator<Item = EdgeId>| -> bool {
        for (a, b) in other.zip(path.iter().copied()) {
            if a != b {
                return a < b;
            }
        }
        false
    };
    for r in (2..l).step_by(2) {
        if path[r] == first && less(&mut path[r..].iter().chain(&path[..r]).copied()) {
            return false;
        }
    }
    // Reversal is e_{ℓ-1} .. e_0; its even rotations start at odd positions of the original.
    for r in (1..l).step_by(2) {
        if path[r] == first {
            let mut rev = (0..l).map(|k| path[(r + l - k) % l]);
            if less(&mut rev) {
                return false;
            }
        }
    }
    true
}

struct Frame {
    along_col: bool,
    node: usize,
    pos: usize,
}

/// Depth-first enumerator of canonical closed paths of a fixed length.
pub struct ClosedPaths<'g> {
    g: &'g PathGraph,
    ell: usize,
    roots: std::ops::Range<usize>,
    root: Option<EdgeId>,
    dist: Vec<u32>,
    path: Vec<EdgeId>,
    stack: Vec<Frame>,
}

impl<'g> ClosedPaths<'g> {
    fn new(g: &'g PathGraph, ell: usize, roots: std::ops::Range<usize>) -> Self {
        assert!(ell >= 2 && ell.is_multiple_of(2), "closed paths have even length");
        let end = roots.end.min(g.edge_count());
        ClosedPaths {
            g,
            ell,
            roots: roots.start.min(end)..end,
            root: None,
            dist: Vec::new(),
            path: Vec::with_capacity(ell),
            stack: Vec::with_capacity(ell),
        }
    }

    fn start_root(&mut self) -> bool {
        let Some(r) = self.roots.next() else {
            return false;
        };
        let root = r as EdgeId;
        let (r0, c0) = self.g.endpoints(root);
        self.dist = self.g.distances_from_row(r0, root);
        self.root = Some(root);
        self.path.clear();
        self.stack.clear();
        self.path.push(root);
        if (self.dist[self.g.rows + c0] as usize) < self.ell {
            self.stack.push(Frame {
                along_col: true,
                node: c0,
                pos: 0,
            });
        }
        true
    }
}

impl Iterator for ClosedPaths<'_> {
    type Item = ClosedPath;

    fn next(&mut self) -> Option<ClosedPath> {
        let g = self.g;
        let ell = self.ell;
        loop {
            if self.stack.is_empty() && !self.start_root() {
                return None;
            }
            let Some(root) = self.root else { continue };
            let Some(frame) = self.stack.last_mut() else {
                continue;
            };
            let list = if frame.along_col {
                &g.col_edges[frame.node]
            } else {
                &g.row_edges[frame.node]
            };
            if frame.pos >= list.len() {
                self.stack.pop();
                self.path.pop();
                continue;
            }
            let e = list[frame.pos];
            frame.pos += 1;
            let along_col = frame.along_col;
            let prev = *self.path.last().expect("path holds the root");
            if e < root || e == prev {
                continue;
            }
            let k = self.path.len();
            let (r, c) = g.endpoints(e);
            let r0 = g.endpoints(root).0;
            if k == ell - 1 {
                if r == r0 && e != root {
                    self.path.push(e);
                    let done = is_canonical(&self.path);
                    let out = done.then(|| ClosedPath {
                        edges: self.path.clone(),
                    });
                    self.path.pop();
                    if out.is_some() {
                        return out;
                    }
                }
                continue;
            }
            // After a column step we stand on a row node, after a row step on a column node.
            let remaining = (ell - 1 - k) as u32;
            let (next_node, next_along_col, here) = if along_col {
                (r, false, r)
            } else {
                (c, true, g.rows + c)
            };
            if self.dist[here] > remaining {
                continue;
            }
            self.path.push(e);
            self.stack.push(Frame {
                along_col: next_along_col,
                node: next_node,
                pos: 0,
            });
        }
    }
}

/// Cycle analysis of a concrete bivariate polynomial matrix.
#[derive(Debug, Clone)]
pub struct PolyCycles<'a> {
    h: &'a BivariatePolyMatrix,
    graph: PathGraph,
    terms: Vec<Monomial>,
}

impl<'a> PolyCycles<'a> {
    pub fn new(h: &'a BivariatePolyMatrix) -> Self {
        let graph = PathGraph::from_grid(h.grid());
        let terms = (0..graph.edge_count() as EdgeId)
            .map(|e| *graph.term(h.grid(), e))
            .collect();
        PolyCycles { h, graph, terms }
    }

    pub fn graph(&self) -> &PathGraph {
        &self.graph
    }

    pub fn monomial(&self, e: EdgeId) -> Monomial {
        self.terms[e as usize]
    }

    /// Streams canonical closed paths of length `ell`. With `restrict_cols =
    /// Some(n)` only classes touching one of the first `n` columns appear.
    pub fn paths(&self, ell: usize, restrict_cols: Option<usize>) -> ClosedPaths<'_> {
        let roots = match restrict_cols {
            Some(n) => self.graph.edges_in_first_cols(n),
            None => self.graph.edge_count(),
        };
        self.graph.closed_paths(ell, 0..roots)
    }

    /// `(Σ_x, Σ_y)` of a path.
    pub fn sigma(&self, p: &ClosedPath) -> (i64, i64) {
        (
            p.alternating_sum(|e| i64::from(self.terms[e as usize].x)),
            p.alternating_sum(|e| i64::from(self.terms[e as usize].y)),
        )
    }

    /// The cycle condition: both alternating sums vanish.
    pub fn is_cycle(&self, p: &ClosedPath) -> bool {
        let (sx, sy) = self.sigma(p);
        reduce(sx, self.h.sx()) == 0 && reduce(sy, self.h.sy()) == 0
    }

    /// True when the lifted closed walk visits no lifted node twice, i.e. it
    /// is a genuine cycle of the expanded Tanner graph and not a repeated or
    /// figure-eight walk.
    pub fn lifts_to_simple_cycle(&self, p: &ClosedPath) -> bool {
        if !self.is_cycle(p) {
            return false;
        }
        let (sx, sy) = (self.h.sx(), self.h.sy());
        let mut seen = HashSet::with_capacity(p.len());
        let (mut ox, mut oy) = (0i64, 0i64);
        for (i, &e) in p.edges.iter().enumerate() {
            let (r, c) = self.graph.endpoints(e);
            // Node reached before traversing e_i.
            let node = if i % 2 == 0 { (false, r) } else { (true, c) };
            if !seen.insert((node, reduce(ox, sx), reduce(oy, sy))) {
                return false;
            }
            let m = self.terms[e as usize];
            let sign = if i % 2 == 0 { -1 } else { 1 };
            ox += sign * i64::from(m.x);
            oy += sign * i64::from(m.y);
        }
        true
    }

    /// Number of Tanner-graph cycles the class of `p` expands to: the lift
    /// multiplicity `Sx*Sy` divided by the class's rotational symmetry.
    pub fn lifted_cycles(&self, p: &ClosedPath) -> u64 {
        if !self.lifts_to_simple_cycle(p) {
            return 0;
        }
        let k = u64::from(self.h.sx()) * u64::from(self.h.sy());
        k * p.distinct_representations() as u64 / p.len() as u64
    }

    /// `N_ℓ` for `ℓ = 4, 6, .., up_to`: classes that lift to genuine cycles.
    pub fn count_cycles(&self, up_to: usize) -> BTreeMap<usize, u64> {
        self.tally(up_to, |p| u64::from(self.lifts_to_simple_cycle(p)))
    }

    /// Cycle counts of the fully expanded Tanner graph, computed from classes.
    pub fn lifted_cycle_counts(&self, up_to: usize) -> BTreeMap<usize, u64> {
        self.tally(up_to, |p| self.lifted_cycles(p))
    }

    fn tally(&self, up_to: usize, f: impl Fn(&ClosedPath) -> u64) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for ell in (4..=up_to).step_by(2) {
            let n: u64 = self.paths(ell, None).map(|p| f(&p)).sum();
            if n > 0 {
                out.insert(ell, n);
            }
        }
        out
    }

    /// Smallest `ℓ < g_max` with a closed path satisfying the cycle condition.
    pub fn girth(&self, g_max: usize, restrict_cols: Option<usize>) -> Girth {
        for ell in (4..g_max).step_by(2) {
            if self.paths(ell, restrict_cols).any(|p| self.is_cycle(&p)) {
                return Girth::Exact(ell);
            }
        }
        Girth::AtLeast(g_max)
    }

    /// First path of length `ell` that satisfies the cycle condition.
    pub fn find_cycle(&self, ell: usize, restrict_cols: Option<usize>) -> Option<ClosedPath> {
        self.paths(ell, restrict_cols).find(|p| self.is_cycle(p))
    }
}

/// Canonical closed paths of length `ell` in `h`.
pub fn enumerate_closed_paths(
    h: &BivariatePolyMatrix,
    ell: usize,
    restrict_cols: Option<usize>,
) -> Vec<ClosedPath> {
    PolyCycles::new(h).graph.collect_closed_paths(ell, restrict_cols)
}

pub fn count_cycles(h: &BivariatePolyMatrix, up_to: usize) -> BTreeMap<usize, u64> {
    PolyCycles::new(h).count_cycles(up_to)
}

/// Girth of the Tanner graph of `full_expand(h)`, searched up to `g_max`.
pub fn poly_girth(h: &BivariatePolyMatrix, g_max: usize) -> Girth {
    PolyCycles::new(h).girth(g_max, None)
}

/// Girth of an SC code of any length, found through its cycle-relevant
/// submatrices with paths restricted to the first block column.
pub fn sc_girth(code: &ScCode, g_max: usize) -> Girth {
    for ell in (4..g_max).step_by(2) {
        let crm = code.crm(ell);
        if PolyCycles::new(&crm).find_cycle(ell, Some(code.n())).is_some() {
            return Girth::Exact(ell);
        }
    }
    Girth::AtLeast(g_max)
}
