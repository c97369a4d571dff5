//! Greedy girth optimization of exponent assignments.
//!
//! Every term of a (possibly spread) protograph carries one x-exponent
//! variable in `[0, Sx)` and one y-exponent variable in `[0, Sy)`. Closed
//! paths of the relevant lengths are enumerated once per template; each one
//! is reduced to its variable multiplicities `κ`. For a current assignment
//! the cost table entry `C[e][s]` is the weighted number of paths through `e`
//! (with `κ_e ≠ 0`) that satisfy the cycle condition once `e` is set to `s`.
//! The descent repeatedly applies the single change with the most negative
//! `C[e][s] - C[e][current]` until no change lowers the cost.
//!
//! Three constructions are built on top:
//!
//! - [`hqc_construct`]: block code, all closed paths of the block matrix.
//! - [`construct_and_spread`]: block code optimized for girth `g - 2`, then
//!   spread and accepted only if the SC code reaches girth `g`.
//! - [`crm_construct`]: optimization directly on the symbolic cycle-relevant
//!   submatrix of the SC code, counting only paths through its first block
//!   column.

use std::fmt;
use std::ops::RangeInclusive;

use log::debug;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{BivariatePolyMatrix, EntryGrid, Monomial, Protomatrix};
use crate::cycles::{sc_girth, PathGraph};
use crate::modular::{reduce, solve_linear};
use crate::spreading::{self, ScCode, SpreadError, SpreadingSpec};

pub type TermId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("infeasible input: {0}")]
    Infeasible(String),
    #[error("no construction reached girth {girth} within {attempts} attempts")]
    Exhausted { girth: usize, attempts: usize },
    #[error(transparent)]
    Spread(#[from] SpreadError),
}

/// Where a term lives: component `t`, entry `(row, col)` of the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermSlot {
    pub component: usize,
    pub row: usize,
    pub col: usize,
}

/// Symbolic (spread) polynomial matrix: every term is a handle whose
/// exponents are the optimization variables.
///
/// Terms are numbered component-major, then row-major, then by position in
/// the entry.
#[derive(Debug, Clone)]
pub struct Template {
    components: Vec<EntryGrid<TermId>>,
    slots: Vec<TermSlot>,
    siblings: Vec<Vec<TermId>>,
}

impl Template {
    pub fn from_spec(spec: &SpreadingSpec) -> Self {
        let (m, n) = (spec.m(), spec.n());
        let mut slots = Vec::new();
        let mut components = Vec::with_capacity(spec.w());
        for (t, p) in spec.components().iter().enumerate() {
            let mut grid = EntryGrid::new(m, n);
            for i in 0..m {
                for j in 0..n {
                    for _ in 0..p.get(i, j) {
                        grid.cell_mut(i, j).push(slots.len());
                        slots.push(TermSlot {
                            component: t,
                            row: i,
                            col: j,
                        });
                    }
                }
            }
            components.push(grid);
        }
        let siblings = slots
            .iter()
            .enumerate()
            .map(|(id, s)| {
                components[s.component]
                    .cell(s.row, s.col)
                    .iter()
                    .copied()
                    .filter(|&o| o != id)
                    .collect()
            })
            .collect();
        Template {
            components,
            slots,
            siblings,
        }
    }

    pub fn block(p: &Protomatrix) -> Self {
        Self::from_spec(&SpreadingSpec::unspread(p))
    }

    pub fn w(&self) -> usize {
        self.components.len()
    }

    pub fn m(&self) -> usize {
        self.components[0].rows()
    }

    pub fn n(&self) -> usize {
        self.components[0].cols()
    }

    pub fn term_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, id: TermId) -> TermSlot {
        self.slots[id]
    }

    /// Terms sharing a component entry with `id`.
    pub fn siblings(&self, id: TermId) -> &[TermId] {
        &self.siblings[id]
    }

    pub fn components(&self) -> &[EntryGrid<TermId>] {
        &self.components
    }

    /// Symbolic cycle-relevant submatrix for cycles of length `ell`.
    pub fn crm(&self, ell: usize) -> EntryGrid<TermId> {
        spreading::crm(&self.components, ell)
    }

    /// Substitutes exponent values, one component matrix per coupling index.
    pub fn instantiate(&self, x: &[u32], y: &[u32], sx: u32, sy: u32) -> ScCode {
        let comps = self
            .components
            .iter()
            .map(|g| {
                let mut h = BivariatePolyMatrix::new(g.rows(), g.cols(), sx, sy)
                    .expect("lifting factors validated by the caller");
                for (i, j, cell) in g.iter() {
                    for &id in cell {
                        h.insert_shared_y(i, j, Monomial::new(x[id], y[id]))
                            .expect("distinct terms of one entry differ in y");
                    }
                }
                h
            })
            .collect();
        ScCode::new(comps).expect("components share one shape")
    }
}

/// Weights `w_ℓ` of the weighted short-cycle count: powers of 5 decreasing
/// with length, `w_4 = 125, w_6 = 25, w_8 = 5, w_10 = 1`, extended as
/// `w_ℓ = 5^((g - 2 - ℓ) / 2)` for `g > 12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleWeights {
    top: usize,
}

impl CycleWeights {
    pub fn for_girth(g: usize) -> Self {
        CycleWeights { top: g.max(12) - 2 }
    }

    pub fn weight(&self, ell: usize) -> u64 {
        5u64.pow(((self.top - ell) / 2) as u32)
    }
}

/// Closed paths of one template reduced to `(term, κ)` lists.
#[derive(Debug, Clone)]
pub struct PathSet {
    offsets: Vec<usize>,
    terms: Vec<TermId>,
    kappas: Vec<i64>,
    weights: Vec<u64>,
    lengths: Vec<usize>,
    by_term: Vec<Vec<u32>>,
    fixed_weight: u64,
    fixed_min_len: Option<usize>,
}

impl PathSet {
    /// Enumerates paths of length `4..=g-2` in `grid`. With `restrict_cols`,
    /// only classes touching the first columns are kept.
    pub fn build(
        grid: &EntryGrid<TermId>,
        term_count: usize,
        g: usize,
        restrict_cols: Option<usize>,
    ) -> Self {
        let weights = CycleWeights::for_girth(g);
        let graph = PathGraph::from_grid(grid);
        let mut set = PathSet {
            offsets: vec![0],
            terms: Vec::new(),
            kappas: Vec::new(),
            weights: Vec::new(),
            lengths: Vec::new(),
            by_term: vec![Vec::new(); term_count],
            fixed_weight: 0,
            fixed_min_len: None,
        };
        for ell in (4..=g.saturating_sub(2)).step_by(2) {
            let w = weights.weight(ell);
            for p in graph.collect_closed_paths(ell, restrict_cols) {
                let kappa = p.multiplicities(|e| *graph.term(grid, e));
                let nonzero: Vec<_> = kappa.into_iter().filter(|&(_, k)| k != 0).collect();
                if nonzero.is_empty() {
                    // A cycle under every assignment.
                    set.fixed_weight += w;
                    set.fixed_min_len.get_or_insert(ell);
                    continue;
                }
                let idx = set.weights.len() as u32;
                for (t, k) in nonzero {
                    set.terms.push(t);
                    set.kappas.push(k);
                    set.by_term[t].push(idx);
                }
                set.offsets.push(set.terms.len());
                set.weights.push(w);
                set.lengths.push(ell);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of paths that are cycles regardless of the exponents.
    pub fn fixed_weight(&self) -> u64 {
        self.fixed_weight
    }

    /// `(term, κ)` pairs of path `p`, all with `κ ≠ 0`.
    pub fn path(&self, p: usize) -> impl Iterator<Item = (TermId, i64)> + '_ {
        let r = self.offsets[p]..self.offsets[p + 1];
        self.terms[r.clone()].iter().copied().zip(self.kappas[r].iter().copied())
    }

    pub fn weight(&self, p: usize) -> u64 {
        self.weights[p]
    }

    pub fn length(&self, p: usize) -> usize {
        self.lengths[p]
    }

    /// Paths in which `t` has nonzero multiplicity.
    pub fn paths_through(&self, t: TermId) -> impl Iterator<Item = usize> + '_ {
        self.by_term[t].iter().map(|&p| p as usize)
    }

    fn sigma(&self, p: usize, values: &[u32]) -> i64 {
        self.path(p).map(|(t, k)| k * i64::from(values[t])).sum()
    }
}

/// A template together with its lifting factors, target girth and paths.
#[derive(Debug, Clone)]
pub struct Problem {
    template: Template,
    sx: u32,
    sy: u32,
    girth: usize,
    paths: PathSet,
}

impl Problem {
    /// Block-code problem: every closed path of the block matrix counts.
    pub fn block(p: &Protomatrix, sx: u32, sy: u32, girth: usize) -> Self {
        let template = Template::block(p);
        let paths = PathSet::build(&template.components[0], template.term_count(), girth, None);
        Problem {
            template,
            sx,
            sy,
            girth,
            paths,
        }
    }

    /// SC problem on the symbolic cycle-relevant submatrix for length
    /// `g - 2`, counting only classes through the first block column.
    pub fn crm(spec: &SpreadingSpec, sx: u32, sy: u32, girth: usize) -> Self {
        let template = Template::from_spec(spec);
        let grid = template.crm(girth.saturating_sub(2).max(4));
        let paths = PathSet::build(&grid, template.term_count(), girth, Some(template.n()));
        Problem {
            template,
            sx,
            sy,
            girth,
            paths,
        }
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    pub fn sx(&self) -> u32 {
        self.sx
    }

    pub fn sy(&self) -> u32 {
        self.sy
    }

    pub fn girth(&self) -> usize {
        self.girth
    }

    pub fn modulus(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X => self.sx,
            Axis::Y => self.sy,
        }
    }

    /// Uniform x-exponents; y-exponents drawn without replacement within each
    /// component entry.
    pub fn random_assignment<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<u32>, Vec<u32>) {
        let n = self.template.term_count();
        let x = (0..n).map(|_| rng.random_range(0..self.sx)).collect();
        let mut y = vec![0u32; n];
        for grid in &self.template.components {
            for (_, _, cell) in grid.iter() {
                if cell.is_empty() {
                    continue;
                }
                let picks = sample(rng, self.sy as usize, cell.len());
                for (&id, v) in cell.iter().zip(picks.iter()) {
                    y[id] = v as u32;
                }
            }
        }
        (x, y)
    }

    /// Total weighted count of paths satisfying the cycle condition.
    pub fn total_cost(&self, x: &[u32], y: &[u32]) -> u64 {
        let live: u64 = (0..self.paths.len())
            .filter(|&p| self.is_cycle(p, x, y))
            .map(|p| self.paths.weight(p))
            .sum();
        live + self.paths.fixed_weight
    }

    /// Whether some path of length at most `max_len` is a cycle.
    pub fn has_cycle_up_to(&self, max_len: usize, x: &[u32], y: &[u32]) -> bool {
        self.paths.fixed_min_len.is_some_and(|l| l <= max_len)
            || (0..self.paths.len())
                .any(|p| self.paths.length(p) <= max_len && self.is_cycle(p, x, y))
    }

    fn is_cycle(&self, p: usize, x: &[u32], y: &[u32]) -> bool {
        reduce(self.paths.sigma(p, x), self.sx) == 0 && reduce(self.paths.sigma(p, y), self.sy) == 0
    }
}

/// Entry of a cost table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cost {
    Finite(u64),
    /// The value repeats a y-exponent already used in the same entry.
    Infeasible,
}

/// Cost tables `C[e][s]` for both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTables {
    sx: usize,
    sy: usize,
    x_rows: Vec<u64>,
    y_rows: Vec<u64>,
    y_blocked: Vec<bool>,
}

impl CostTables {
    fn zeroed(terms: usize, sx: u32, sy: u32) -> Self {
        let (sx, sy) = (sx as usize, sy as usize);
        CostTables {
            sx,
            sy,
            x_rows: vec![0; terms * sx],
            y_rows: vec![0; terms * sy],
            y_blocked: vec![false; terms * sy],
        }
    }

    pub fn terms(&self) -> usize {
        self.x_rows.len() / self.sx.max(1)
    }

    pub fn cost(&self, axis: Axis, term: TermId, value: u32) -> Cost {
        let v = value as usize;
        match axis {
            Axis::X => Cost::Finite(self.x_rows[term * self.sx + v]),
            Axis::Y if self.y_blocked[term * self.sy + v] => Cost::Infeasible,
            Axis::Y => Cost::Finite(self.y_rows[term * self.sy + v]),
        }
    }

    pub fn row(&self, axis: Axis, term: TermId) -> Vec<Cost> {
        let width = match axis {
            Axis::X => self.sx,
            Axis::Y => self.sy,
        };
        (0..width as u32).map(|s| self.cost(axis, term, s)).collect()
    }
}

/// Adds (`sign = 1`) or removes (`sign = -1`) the contributions of path `p`.
///
/// For every term `f` with multiplicity `κ` the problematic values `s'` solve
/// `κ (s_0 - s') ≡ Σ`, i.e. `κ s' ≡ κ s_0 - Σ`; the other axis must already
/// satisfy its congruence for the path to close.
fn apply_path(
    problem: &Problem,
    tables: &mut CostTables,
    p: usize,
    x: &[u32],
    y: &[u32],
    sign: i64,
) {
    let paths = &problem.paths;
    let w = paths.weight(p);
    let sig_x = paths.sigma(p, x);
    let sig_y = paths.sigma(p, y);
    let closed_x = reduce(sig_x, problem.sx) == 0;
    let closed_y = reduce(sig_y, problem.sy) == 0;
    if !closed_x && !closed_y {
        // Changing one exponent moves only one of the two sums.
        return;
    }
    let bump = |cell: &mut u64| {
        if sign > 0 {
            *cell += w;
        } else {
            *cell -= w;
        }
    };
    for (t, k) in paths.path(p) {
        if closed_y {
            let sol = solve_linear(k, k * i64::from(x[t]) - sig_x, problem.sx);
            for s in sol.iter() {
                bump(&mut tables.x_rows[t * tables.sx + s as usize]);
            }
        }
        if closed_x {
            let sol = solve_linear(k, k * i64::from(y[t]) - sig_y, problem.sy);
            for s in sol.iter() {
                bump(&mut tables.y_rows[t * tables.sy + s as usize]);
            }
        }
    }
}

fn refresh_blocked(problem: &Problem, tables: &mut CostTables, t: TermId, y: &[u32]) {
    let sy = tables.sy;
    let row = &mut tables.y_blocked[t * sy..(t + 1) * sy];
    row.fill(false);
    for &o in problem.template.siblings(t) {
        row[y[o] as usize] = true;
    }
}

/// Full computation of both cost tables for the assignment `(x, y)`.
pub fn build_cost_tables(problem: &Problem, x: &[u32], y: &[u32]) -> CostTables {
    let terms = problem.template.term_count();
    let mut tables = CostTables::zeroed(terms, problem.sx, problem.sy);
    for p in 0..problem.paths.len() {
        apply_path(problem, &mut tables, p, x, y, 1);
    }
    for t in 0..terms {
        refresh_blocked(problem, &mut tables, t, y);
    }
    tables
}

/// A single exponent change chosen by the greedy rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub axis: Axis,
    pub term: TermId,
    pub value: u32,
    /// `C[term][value] - C[term][current]`, always negative.
    pub reduction: i64,
}

/// Picks the most negative entry of the cost reduction tables, ties broken
/// by axis (x first), term id and value. `None` once every reduction is
/// nonnegative.
pub fn greedy_step(tables: &CostTables, x: &[u32], y: &[u32]) -> Option<Step> {
    let mut best: Option<Step> = None;
    let mut consider = |axis: Axis, term: TermId, row: &[u64], blocked: Option<&[bool]>, cur: u32| {
        let base = row[cur as usize] as i64;
        for (s, &c) in row.iter().enumerate() {
            if blocked.is_some_and(|b| b[s]) {
                continue;
            }
            let r = c as i64 - base;
            if r < 0 && best.is_none_or(|b| r < b.reduction) {
                best = Some(Step {
                    axis,
                    term,
                    value: s as u32,
                    reduction: r,
                });
            }
        }
    };
    let (sx, sy) = (tables.sx, tables.sy);
    for (t, &cur) in x.iter().enumerate() {
        consider(Axis::X, t, &tables.x_rows[t * sx..(t + 1) * sx], None, cur);
    }
    for (t, &cur) in y.iter().enumerate() {
        let r = t * sy..(t + 1) * sy;
        consider(Axis::Y, t, &tables.y_rows[r.clone()], Some(&tables.y_blocked[r]), cur);
    }
    best
}

/// State of one greedy descent with incrementally maintained tables.
#[derive(Debug, Clone)]
pub struct Descent<'p> {
    problem: &'p Problem,
    x: Vec<u32>,
    y: Vec<u32>,
    tables: CostTables,
    cost: u64,
    trace: Vec<u64>,
}

impl<'p> Descent<'p> {
    pub fn new(problem: &'p Problem, x: Vec<u32>, y: Vec<u32>) -> Self {
        let tables = build_cost_tables(problem, &x, &y);
        let cost = problem.total_cost(&x, &y);
        Descent {
            problem,
            x,
            y,
            tables,
            cost,
            trace: vec![cost],
        }
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn y(&self) -> &[u32] {
        &self.y
    }

    pub fn tables(&self) -> &CostTables {
        &self.tables
    }

    /// Current total weighted cycle cost.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    /// Cost after initialization and after every applied step.
    pub fn trace(&self) -> &[u64] {
        &self.trace
    }

    pub fn next_step(&self) -> Option<Step> {
        greedy_step(&self.tables, &self.x, &self.y)
    }

    /// Applies `step`, updating only the paths through the changed term.
    pub fn apply(&mut self, step: Step) {
        let problem = self.problem;
        let affected: Vec<usize> = problem.paths.paths_through(step.term).collect();
        for &p in &affected {
            apply_path(problem, &mut self.tables, p, &self.x, &self.y, -1);
        }
        match step.axis {
            Axis::X => self.x[step.term] = step.value,
            Axis::Y => {
                self.y[step.term] = step.value;
                for &o in problem.template.siblings(step.term) {
                    refresh_blocked(problem, &mut self.tables, o, &self.y);
                }
            }
        }
        for &p in &affected {
            apply_path(problem, &mut self.tables, p, &self.x, &self.y, 1);
        }
        self.cost = (self.cost as i64 + step.reduction) as u64;
        self.trace.push(self.cost);
    }

    /// Runs to a local minimum; returns the number of steps taken.
    pub fn run(&mut self) -> usize {
        let mut steps = 0;
        while let Some(s) = self.next_step() {
            self.apply(s);
            steps += 1;
        }
        steps
    }

    pub fn into_assignment(self) -> (Vec<u32>, Vec<u32>) {
        (self.x, self.y)
    }
}

/// Lifting factors, target girth, seed and restart budget of a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructParams {
    pub sx: u32,
    pub sy: u32,
    pub girth: usize,
    pub seed: u64,
    /// Number of greedy descents (random restarts) allowed.
    pub budget: usize,
}

impl ConstructParams {
    pub const DEFAULT_BUDGET: usize = 50;

    fn validate(&self) -> Result<(), ConstructError> {
        if self.sx == 0 || self.sy == 0 {
            return Err(ConstructError::Infeasible("lifting factors must be at least 1".into()));
        }
        if self.girth < 4 || !self.girth.is_multiple_of(2) {
            return Err(ConstructError::Infeasible(format!(
                "target girth must be even and at least 4, got {}",
                self.girth
            )));
        }
        Ok(())
    }

    fn attempt_rng(&self, attempt: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(attempt as u64);
        rng
    }
}

/// Draws `candidates` random spreadings of `block` and keeps the one whose
/// cycle-relevant submatrix has the smallest weighted count of closed paths
/// shorter than `girth` (earliest draw on ties).
pub fn select_spreading(
    block: &Protomatrix,
    w: usize,
    girth: usize,
    candidates: usize,
    seed: u64,
) -> SpreadingSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<_> = (0..candidates.max(1))
        .map(|_| SpreadingSpec::random(block, w, &mut rng))
        .collect();
    let scores: Vec<u64> = specs
        .par_iter()
        .map(|spec| {
            let problem = Problem::crm(spec, 1, 1, girth);
            let paths = problem.paths();
            (0..paths.len()).map(|p| paths.weight(p)).sum::<u64>() + paths.fixed_weight()
        })
        .collect();
    let best = (0..specs.len()).min_by_key(|&i| (scores[i], i)).unwrap();
    specs[best].clone()
}

/// A successful construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction<T> {
    pub code: T,
    /// Zero-based index of the successful attempt.
    pub attempt: usize,
    pub steps: usize,
}

fn first_success<T: Send>(
    budget: usize,
    attempt: impl Fn(usize) -> Option<T> + Sync + Send,
) -> Option<(usize, T)> {
    (0..budget)
        .into_par_iter()
        .with_max_len(1)
        .find_map_first(|i| attempt(i).map(|t| (i, t)))
}

/// One greedy descent from a random start to a local minimum.
fn descend_any(problem: &Problem, rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<u32>, usize, u64) {
    let (x, y) = problem.random_assignment(rng);
    let mut d = Descent::new(problem, x, y);
    let steps = d.run();
    debug!("descent finished after {steps} steps at cost {}", d.cost());
    let cost = d.cost();
    let (x, y) = d.into_assignment();
    (x, y, steps, cost)
}

/// One greedy descent; `Some` when the cost reaches 0.
fn descend(problem: &Problem, rng: &mut ChaCha8Rng) -> Option<(Vec<u32>, Vec<u32>, usize)> {
    if problem.paths.fixed_weight() > 0 {
        return None;
    }
    let (x, y, steps, cost) = descend_any(problem, rng);
    (cost == 0).then_some((x, y, steps))
}

fn check_multiplicity(max_entry: u32, sy: u32) -> Result<(), ConstructError> {
    if max_entry > sy {
        return Err(ConstructError::Infeasible(format!(
            "Sy = {sy} cannot give {max_entry} distinct y-exponents in one entry"
        )));
    }
    Ok(())
}

/// Block HQC construction of a girth-`g` code from protograph `p`.
pub fn hqc_construct(
    p: &Protomatrix,
    params: &ConstructParams,
) -> Result<Construction<BivariatePolyMatrix>, ConstructError> {
    params.validate()?;
    check_multiplicity(p.max_entry(), params.sy)?;
    let problem = Problem::block(p, params.sx, params.sy, params.girth);
    first_success(params.budget, |i| descend(&problem, &mut params.attempt_rng(i)))
        .map(|(attempt, (x, y, steps))| {
            let code = problem.template.instantiate(&x, &y, params.sx, params.sy);
            Construction {
                code: code.components()[0].clone(),
                attempt,
                steps,
            }
        })
        .ok_or(ConstructError::Exhausted {
            girth: params.girth,
            attempts: params.budget,
        })
}

/// Cost function of the block descent inside [`construct_and_spread`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum BlockDescent {
    /// Cycles up to length `g - 4` only: a plain girth-`(g - 2)` block
    /// construction.
    Lowered,
    /// Cycles up to length `g - 2`, accepting any local minimum free of
    /// cycles shorter than `g - 2`. The leftover `(g - 2)`-cycles are then
    /// few, which is what the spread check needs.
    #[default]
    Penalized,
}

/// Despread, build a block code of girth at least `g - 2`, spread back and
/// keep the result if the SC code has girth at least `g`.
pub fn construct_and_spread(
    spec: &SpreadingSpec,
    params: &ConstructParams,
) -> Result<Construction<ScCode>, ConstructError> {
    construct_and_spread_with(spec, params, BlockDescent::default())
}

pub fn construct_and_spread_with(
    spec: &SpreadingSpec,
    params: &ConstructParams,
    descent: BlockDescent,
) -> Result<Construction<ScCode>, ConstructError> {
    params.validate()?;
    let block = spec.block();
    check_multiplicity(block.max_entry(), params.sy)?;
    let assignment = spec.assignment();
    let lowered = params.girth.saturating_sub(2).max(4);
    let problem = match descent {
        BlockDescent::Lowered => Problem::block(&block, params.sx, params.sy, lowered),
        BlockDescent::Penalized => Problem::block(&block, params.sx, params.sy, params.girth),
    };
    let result = first_success(params.budget, |i| {
        let (x, y, steps, _) = descend_any(&problem, &mut params.attempt_rng(i));
        if problem.has_cycle_up_to(lowered - 2, &x, &y) {
            return None;
        }
        let h = problem.template.instantiate(&x, &y, params.sx, params.sy);
        let comps = spreading::spread(&h.components()[0], &assignment).ok()?;
        let code = ScCode::new(comps).ok()?;
        sc_girth(&code, params.girth)
            .at_least(params.girth)
            .then_some((code, steps))
    });
    result
        .map(|(attempt, (code, steps))| Construction {
            code,
            attempt,
            steps,
        })
        .ok_or(ConstructError::Exhausted {
            girth: params.girth,
            attempts: params.budget,
        })
}

/// Optimizes the exponents of the SC code directly on its symbolic
/// cycle-relevant submatrix.
pub fn crm_construct(
    spec: &SpreadingSpec,
    params: &ConstructParams,
) -> Result<Construction<ScCode>, ConstructError> {
    params.validate()?;
    check_multiplicity(spec.max_component_entry(), params.sy)?;
    let problem = Problem::crm(spec, params.sx, params.sy, params.girth);
    first_success(params.budget, |i| descend(&problem, &mut params.attempt_rng(i)))
        .map(|(attempt, (x, y, steps))| Construction {
            code: problem.template.instantiate(&x, &y, params.sx, params.sy),
            attempt,
            steps,
        })
        .ok_or(ConstructError::Exhausted {
            girth: params.girth,
            attempts: params.budget,
        })
}

/// Construction algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Block HQC construction (the spreading is ignored, `w = 1`).
    Block,
    /// Block construction at `g - 2`, spread, check.
    ConstructAndSpread,
    /// Construction on the cycle-relevant submatrix.
    Crm,
}

impl Algorithm {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Algorithm::Block),
            2 => Some(Algorithm::ConstructAndSpread),
            3 => Some(Algorithm::Crm),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Algorithm::Block => 1,
            Algorithm::ConstructAndSpread => 2,
            Algorithm::Crm => 3,
        }
    }
}

/// Runs `alg` and returns the result as an SC code (`w = 1` for blocks).
pub fn construct(
    alg: Algorithm,
    spec: &SpreadingSpec,
    params: &ConstructParams,
) -> Result<Construction<ScCode>, ConstructError> {
    match alg {
        Algorithm::Block => hqc_construct(&spec.block(), params).map(|c| Construction {
            code: ScCode::block(c.code),
            attempt: c.attempt,
            steps: c.steps,
        }),
        Algorithm::ConstructAndSpread => construct_and_spread(spec, params),
        Algorithm::Crm => crm_construct(spec, params),
    }
}

/// One row of a minimum-lifting sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPoint {
    pub w: usize,
    /// Smallest `Sx` in the searched range at which some attempt succeeded.
    pub s_min: Option<u32>,
    /// Attempts spent at the reported `Sx` (or at the last tried one).
    pub trials: usize,
    pub code: Option<ScCode>,
}

/// Minimum-lifting search for one spreading: ascending `Sx` over
/// `sx_range`, `trials` attempts per value.
pub fn min_lifting(
    alg: Algorithm,
    spec: &SpreadingSpec,
    sx_range: RangeInclusive<u32>,
    sy: u32,
    girth: usize,
    trials: usize,
    seed: u64,
) -> Result<SweepPoint, ConstructError> {
    let w = spec.w();
    let mut last_trials = 0;
    for sx in sx_range {
        let params = ConstructParams {
            sx,
            sy,
            girth,
            seed: seed ^ u64::from(sx) << 32,
            budget: trials,
        };
        match construct(alg, spec, &params) {
            Ok(c) => {
                return Ok(SweepPoint {
                    w,
                    s_min: Some(sx),
                    trials: c.attempt + 1,
                    code: Some(c.code),
                })
            }
            Err(ConstructError::Exhausted { .. }) => last_trials = trials,
            Err(e) => return Err(e),
        }
    }
    Ok(SweepPoint {
        w,
        s_min: None,
        trials: last_trials,
        code: None,
    })
}

/// Settings of a minimum-lifting sweep over coupling widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub alg: Algorithm,
    pub widths: Vec<usize>,
    pub sx_range: RangeInclusive<u32>,
    pub sy: u32,
    pub girth: usize,
    pub trials: usize,
    /// Random spreadings scored per width by [`select_spreading`].
    pub candidates: usize,
    pub seed: u64,
}

/// Sweeps coupling widths for a block protograph. The spreading for each
/// width comes from [`select_spreading`]; `on_point` sees every row as soon
/// as it is known.
pub fn sweep_min_lifting(
    block: &Protomatrix,
    cfg: &SweepConfig,
    mut on_point: impl FnMut(&SweepPoint),
) -> Result<Vec<SweepPoint>, ConstructError> {
    let mut out = Vec::new();
    for &w in &cfg.widths {
        let spec = match cfg.alg {
            Algorithm::Block => SpreadingSpec::unspread(block),
            _ => select_spreading(block, w, cfg.girth, cfg.candidates, cfg.seed ^ w as u64),
        };
        let point = min_lifting(
            cfg.alg,
            &spec,
            cfg.sx_range.clone(),
            cfg.sy,
            cfg.girth,
            cfg.trials,
            cfg.seed,
        )?;
        on_point(&point);
        out.push(point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::poly_girth;
    use proptest::prelude::*;

    fn eq4_protograph() -> Protomatrix {
        Protomatrix::from_rows(&[vec![1, 2, 0], vec![1, 1, 2]]).unwrap()
    }

    #[test]
    fn default_weights() {
        let w = CycleWeights::for_girth(12);
        assert_eq!([w.weight(4), w.weight(6), w.weight(8), w.weight(10)], [125, 25, 5, 1]);
        let w = CycleWeights::for_girth(10);
        assert_eq!(w.weight(4), 125);
        let w = CycleWeights::for_girth(14);
        assert_eq!([w.weight(4), w.weight(12)], [625, 1]);
    }

    #[test]
    fn eq4_template_has_seven_terms() {
        let t = Template::block(&eq4_protograph());
        assert_eq!(t.term_count(), 7);
        assert_eq!(t.siblings(1), &[2]);
        assert_eq!(t.siblings(6), &[5]);
        assert!(t.siblings(0).is_empty());
    }

    #[test]
    fn greedy_step_selection() {
        let mut tables = CostTables::zeroed(2, 4, 1);
        assert_eq!(greedy_step(&tables, &[0, 0], &[0, 0]), None);
        tables.x_rows[4 + 1] = 125;
        tables.x_rows[4 + 3] = 0;
        tables.x_rows[4] = 125;
        tables.x_rows[4 + 2] = 125;
        let s = greedy_step(&tables, &[0, 1], &[0, 0]).unwrap();
        assert_eq!((s.axis, s.term, s.value, s.reduction), (Axis::X, 1, 3, -125));
    }

    #[test]
    fn blocked_y_values_are_infeasible() {
        let p = Protomatrix::from_rows(&[vec![2]]).unwrap();
        let problem = Problem::block(&p, 5, 3, 6);
        let tables = build_cost_tables(&problem, &[0, 0], &[0, 2]);
        assert_eq!(tables.cost(Axis::Y, 0, 2), Cost::Infeasible);
        assert_eq!(tables.cost(Axis::Y, 1, 0), Cost::Infeasible);
        assert!(matches!(tables.cost(Axis::Y, 0, 1), Cost::Finite(_)));
    }

    #[test]
    fn girth_four_needs_no_work() {
        let params = ConstructParams {
            sx: 3,
            sy: 3,
            girth: 4,
            seed: 1,
            budget: 1,
        };
        let c = hqc_construct(&eq4_protograph(), &params).unwrap();
        assert_eq!((c.attempt, c.steps), (0, 0));
        assert!(c.code.has_distinct_y());
    }

    #[test]
    fn eq4_shape_reaches_girth_six() {
        let params = ConstructParams {
            sx: 10,
            sy: 3,
            girth: 6,
            seed: 7,
            budget: 20,
        };
        let c = hqc_construct(&eq4_protograph(), &params).unwrap();
        assert_eq!(c.code.protograph(), eq4_protograph());
        assert!(c.code.has_distinct_y());
        assert!(poly_girth(&c.code, 6).at_least(6));
    }

    #[test]
    fn infeasible_multiplicity() {
        let params = ConstructParams {
            sx: 10,
            sy: 1,
            girth: 6,
            seed: 0,
            budget: 1,
        };
        assert!(matches!(
            hqc_construct(&eq4_protograph(), &params),
            Err(ConstructError::Infeasible(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let params = ConstructParams {
            sx: 9,
            sy: 1,
            girth: 8,
            seed: 3,
            budget: 30,
        };
        let p = Protomatrix::all_ones(3, 4);
        let a = hqc_construct(&p, &params);
        let b = hqc_construct(&p, &params);
        assert_eq!(a, b);
    }

    fn incremental_matches_full(problem: &Problem, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = problem.random_assignment(&mut rng);
        let mut d = Descent::new(problem, x, y);
        while let Some(s) = d.next_step() {
            d.apply(s);
            assert_eq!(d.tables(), &build_cost_tables(problem, d.x(), d.y()));
            assert_eq!(d.cost(), problem.total_cost(d.x(), d.y()));
        }
    }

    #[test]
    fn incremental_tables_equal_recomputed() {
        incremental_matches_full(&Problem::block(&eq4_protograph(), 7, 3, 10), 1);
        let spec = SpreadingSpec::new(vec![
            Protomatrix::from_rows(&[vec![1, 1]]).unwrap(),
            Protomatrix::from_rows(&[vec![0, 1]]).unwrap(),
            Protomatrix::from_rows(&[vec![1, 1]]).unwrap(),
        ])
        .unwrap();
        incremental_matches_full(&Problem::crm(&spec, 5, 2, 10), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn descent_strictly_decreases(seed in 0u64..1000, sx in 2u32..12, sy in 1u32..3) {
            let p = Protomatrix::from_rows(&[vec![1, 1, 1], vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
            let problem = Problem::block(&p, sx, sy, 10);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = problem.random_assignment(&mut rng);
            let mut d = Descent::new(&problem, x, y);
            d.run();
            prop_assert!(d.trace().windows(2).all(|w| w[1] < w[0]));
            prop_assert_eq!(d.cost(), problem.total_cost(d.x(), d.y()));
        }
    }
}
