//! Protographs, one- and two-level polynomial matrices and the lifting maps
//! between them.
//!
//! Circulant convention: the monomial `x^s` over a lifting factor `S` is the
//! `S x S` permutation matrix with ones at `(t, (t - s) mod S)`. The same
//! convention is used for the `y` level.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("lifting factor must be at least 1")]
    ZeroLifting,
    #[error("entry ({row}, {col}) already holds x^{x} y^{y}")]
    DuplicateMonomial { row: usize, col: usize, x: u32, y: u32 },
    #[error("entry ({row}, {col}) already holds a term with y-exponent {y}")]
    DuplicateY { row: usize, col: usize, y: u32 },
    #[error("entry ({row}, {col}) is outside a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("ragged protomatrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("construction incomplete: exponent variable {0} has no value")]
    Incomplete(usize),
}

/// Nonnegative integer edge multiplicities of a protograph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Protomatrix {
    rows: usize,
    cols: usize,
    mult: Vec<u32>,
}

impl Protomatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Protomatrix {
            rows,
            cols,
            mult: vec![0; rows * cols],
        }
    }

    /// The `dv x dc` all-ones protomatrix of a regular `(dv, dc)` ensemble.
    pub fn all_ones(dv: usize, dc: usize) -> Self {
        Protomatrix {
            rows: dv,
            cols: dc,
            mult: vec![1; dv * dc],
        }
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut mult = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(AlgebraError::Ragged {
                    row: i,
                    found: r.len(),
                    expected: cols,
                });
            }
            mult.extend_from_slice(r);
        }
        Ok(Protomatrix {
            rows: rows.len(),
            cols,
            mult,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.mult[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.mult[i * self.cols + j] = v;
    }

    pub fn increment(&mut self, i: usize, j: usize) {
        self.mult[i * self.cols + j] += 1;
    }

    pub fn row_weight(&self, i: usize) -> u32 {
        self.mult[i * self.cols..(i + 1) * self.cols].iter().sum()
    }

    pub fn col_weight(&self, j: usize) -> u32 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }

    pub fn max_entry(&self) -> u32 {
        self.mult.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> u32 {
        self.mult.iter().sum()
    }

    /// `1 - M/N`; only meaningful for full-rank regular protographs.
    pub fn design_rate(&self) -> f64 {
        if self.cols == 0 {
            return 0.0;
        }
        1.0 - self.rows as f64 / self.cols as f64
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.mult.chunks(self.cols.max(1)).map(<[u32]>::to_vec).take(self.rows).collect()
    }
}

impl fmt::Display for Protomatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// A dense grid of (possibly empty) entry sets.
///
/// Polynomial matrices at every level share this layout; the element type is
/// a concrete monomial, an x-exponent, or a symbolic term handle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntryGrid<T> {
    rows: usize,
    cols: usize,
    cells: Vec<Vec<T>>,
}

impl<T> EntryGrid<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        cells.resize_with(rows * cols, Vec::new);
        EntryGrid { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, i: usize, j: usize) -> &[T] {
        &self.cells[i * self.cols + j]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut Vec<T> {
        &mut self.cells[i * self.cols + j]
    }

    /// Iterates `(row, col, entry)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &[T])> {
        let cols = self.cols.max(1);
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, c)| (k / cols, k % cols, c.as_slice()))
    }

    pub fn len_total(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn multiplicities(&self) -> Protomatrix {
        let mut p = Protomatrix::zeros(self.rows, self.cols);
        for (i, j, c) in self.iter() {
            p.set(i, j, c.len() as u32);
        }
        p
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> EntryGrid<U> {
        EntryGrid {
            rows: self.rows,
            cols: self.cols,
            cells: self
                .cells
                .iter()
                .map(|c| c.iter().map(&mut f).collect())
                .collect(),
        }
    }
}

/// A bivariate monomial `x^x y^y` with reduced exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub x: u32,
    pub y: u32,
}

impl Monomial {
    pub fn new(x: u32, y: u32) -> Self {
        Monomial { x, y }
    }
}

/// A matrix over `F2[x, y] / (x^Sx - 1, y^Sy - 1)`.
///
/// Constructed codes keep the y-exponents within an entry pairwise distinct
/// so that the y-lift is type-I; [`insert`](Self::insert) enforces this and
/// [`insert_shared_y`](Self::insert_shared_y) relaxes it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BivariatePolyMatrix {
    sx: u32,
    sy: u32,
    grid: EntryGrid<Monomial>,
}

impl BivariatePolyMatrix {
    pub fn new(rows: usize, cols: usize, sx: u32, sy: u32) -> Result<Self, AlgebraError> {
        if sx == 0 || sy == 0 {
            return Err(AlgebraError::ZeroLifting);
        }
        Ok(BivariatePolyMatrix {
            sx,
            sy,
            grid: EntryGrid::new(rows, cols),
        })
    }

    pub(crate) fn from_grid(sx: u32, sy: u32, grid: EntryGrid<Monomial>) -> Self {
        BivariatePolyMatrix { sx, sy, grid }
    }

    /// Builds a type-I matrix from `(row, col, x, y)` tuples.
    pub fn from_terms(
        rows: usize,
        cols: usize,
        sx: u32,
        sy: u32,
        terms: impl IntoIterator<Item = (usize, usize, u32, u32)>,
    ) -> Result<Self, AlgebraError> {
        let mut h = Self::new(rows, cols, sx, sy)?;
        for (i, j, x, y) in terms {
            h.insert(i, j, Monomial::new(x, y))?;
        }
        Ok(h)
    }

    /// Like [`from_terms`](Self::from_terms) but allows several terms of one
    /// entry to share a y-exponent (the lift is then not type-I).
    pub fn from_terms_shared_y(
        rows: usize,
        cols: usize,
        sx: u32,
        sy: u32,
        terms: impl IntoIterator<Item = (usize, usize, u32, u32)>,
    ) -> Result<Self, AlgebraError> {
        let mut h = Self::new(rows, cols, sx, sy)?;
        for (i, j, x, y) in terms {
            h.insert_shared_y(i, j, Monomial::new(x, y))?;
        }
        Ok(h)
    }

    /// Adds a monomial to entry `(i, j)` after reducing its exponents. The
    /// entry must not already hold a term with the same y-exponent.
    pub fn insert(&mut self, i: usize, j: usize, m: Monomial) -> Result<(), AlgebraError> {
        let m = self.reduce_checked(i, j, m)?;
        if let Some(o) = self.grid.cell(i, j).iter().find(|o| o.y == m.y) {
            return Err(if o.x == m.x {
                AlgebraError::DuplicateMonomial {
                    row: i,
                    col: j,
                    x: m.x,
                    y: m.y,
                }
            } else {
                AlgebraError::DuplicateY {
                    row: i,
                    col: j,
                    y: m.y,
                }
            });
        }
        self.place(i, j, m);
        Ok(())
    }

    /// Adds a monomial; only an identical monomial in the entry is an error.
    pub fn insert_shared_y(&mut self, i: usize, j: usize, m: Monomial) -> Result<(), AlgebraError> {
        let m = self.reduce_checked(i, j, m)?;
        if self.grid.cell(i, j).contains(&m) {
            return Err(AlgebraError::DuplicateMonomial {
                row: i,
                col: j,
                x: m.x,
                y: m.y,
            });
        }
        self.place(i, j, m);
        Ok(())
    }

    fn reduce_checked(&self, i: usize, j: usize, m: Monomial) -> Result<Monomial, AlgebraError> {
        if i >= self.rows() || j >= self.cols() {
            return Err(AlgebraError::OutOfBounds {
                row: i,
                col: j,
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(Monomial::new(m.x % self.sx, m.y % self.sy))
    }

    fn place(&mut self, i: usize, j: usize, m: Monomial) {
        let cell = self.grid.cell_mut(i, j);
        let pos = cell.partition_point(|o| *o < m);
        cell.insert(pos, m);
    }

    /// True when all y-exponents within each entry are distinct, so that the
    /// y-lift is a type-I QC matrix.
    pub fn has_distinct_y(&self) -> bool {
        self.grid.iter().all(|(_, _, c)| {
            c.iter()
                .enumerate()
                .all(|(k, m)| c[..k].iter().all(|o| o.y != m.y))
        })
    }

    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    pub fn sx(&self) -> u32 {
        self.sx
    }

    pub fn sy(&self) -> u32 {
        self.sy
    }

    pub fn entry(&self, i: usize, j: usize) -> &[Monomial] {
        self.grid.cell(i, j)
    }

    pub fn grid(&self) -> &EntryGrid<Monomial> {
        &self.grid
    }

    pub fn monomial_count(&self) -> usize {
        self.grid.len_total()
    }

    pub fn protograph(&self) -> Protomatrix {
        self.grid.multiplicities()
    }

    /// Lifts `H(x, y)` to `H(x)`: every entry becomes an `Sy x Sy` circulant
    /// block of x-monomials.
    pub fn y_expand(&self) -> UnivariatePolyMatrix {
        let sy = self.sy as usize;
        let mut out = EntryGrid::new(self.rows() * sy, self.cols() * sy);
        for (i, j, cell) in self.grid.iter() {
            for m in cell {
                for r in 0..sy {
                    let c = (r + sy - m.y as usize) % sy;
                    out.cell_mut(i * sy + r, j * sy + c).push(m.x);
                }
            }
        }
        for c in out.cells.iter_mut() {
            c.sort_unstable();
        }
        UnivariatePolyMatrix {
            s: self.sx,
            grid: out,
        }
    }

    /// Lifts all the way to the binary parity-check matrix.
    pub fn full_expand(&self) -> BinaryPcm {
        let sx = self.sx as usize;
        let sy = self.sy as usize;
        let block = sx * sy;
        let mut pcm = BinaryPcm::zeros(self.rows() * block, self.cols() * block);
        for (i, j, cell) in self.grid.iter() {
            for m in cell {
                for r in 0..sy {
                    let c = (r + sy - m.y as usize) % sy;
                    for t in 0..sx {
                        let u = (t + sx - m.x as usize) % sx;
                        pcm.row_adj[(i * sy + r) * sx + t].push((j * sy + c) * sx + u);
                    }
                }
            }
        }
        pcm.normalize();
        pcm
    }
}

/// A matrix over `F2[x] / (x^S - 1)`; entries are sets of exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnivariatePolyMatrix {
    s: u32,
    grid: EntryGrid<u32>,
}

impl UnivariatePolyMatrix {
    pub fn new(rows: usize, cols: usize, s: u32) -> Result<Self, AlgebraError> {
        if s == 0 {
            return Err(AlgebraError::ZeroLifting);
        }
        Ok(UnivariatePolyMatrix {
            s,
            grid: EntryGrid::new(rows, cols),
        })
    }

    /// Builds a matrix from rows of entries, each entry a list of exponents.
    pub fn from_entries(s: u32, rows: &[Vec<Vec<u32>>]) -> Result<Self, AlgebraError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut h = Self::new(rows.len(), cols, s)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(AlgebraError::Ragged {
                    row: i,
                    found: r.len(),
                    expected: cols,
                });
            }
            for (j, e) in r.iter().enumerate() {
                let cell = h.grid.cell_mut(i, j);
                cell.extend(e.iter().map(|x| x % s));
                cell.sort_unstable();
                cell.dedup();
            }
        }
        Ok(h)
    }

    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    pub fn lifting(&self) -> u32 {
        self.s
    }

    pub fn entry(&self, i: usize, j: usize) -> &[u32] {
        self.grid.cell(i, j)
    }

    pub fn grid(&self) -> &EntryGrid<u32> {
        &self.grid
    }

    /// True when every entry is zero or a single monomial.
    pub fn is_type_one(&self) -> bool {
        self.grid.iter().all(|(_, _, c)| c.len() <= 1)
    }

    /// Replaces every exponent by its `S x S` circulant permutation matrix.
    pub fn x_expand(&self) -> BinaryPcm {
        let s = self.s as usize;
        let mut pcm = BinaryPcm::zeros(self.rows() * s, self.cols() * s);
        for (i, j, cell) in self.grid.iter() {
            for &e in cell {
                for t in 0..s {
                    let u = (t + s - e as usize) % s;
                    pcm.row_adj[i * s + t].push(j * s + u);
                }
            }
        }
        pcm.normalize();
        pcm
    }
}

/// Sparse binary parity-check matrix stored as sorted row adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryPcm {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
}

impl BinaryPcm {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryPcm {
            rows,
            cols,
            row_adj: vec![Vec::new(); rows],
        }
    }

    /// Builds a matrix from one-positions; duplicates collapse.
    pub fn from_ones(
        rows: usize,
        cols: usize,
        ones: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, AlgebraError> {
        let mut pcm = Self::zeros(rows, cols);
        for (i, j) in ones {
            if i >= rows || j >= cols {
                return Err(AlgebraError::OutOfBounds {
                    row: i,
                    col: j,
                    rows,
                    cols,
                });
            }
            pcm.row_adj[i].push(j);
        }
        pcm.normalize();
        Ok(pcm)
    }

    fn normalize(&mut self) {
        for r in self.row_adj.iter_mut() {
            r.sort_unstable();
            r.dedup();
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.row_adj[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row_adj[i].binary_search(&j).is_ok()
    }

    pub fn ones(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    pub fn col_adj(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (i, r) in self.row_adj.iter().enumerate() {
            for &j in r {
                cols[j].push(i);
            }
        }
        cols
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.row_adj.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in &self.row_adj {
            for &j in r {
                w[j] += 1;
            }
        }
        w
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_adj
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i, j)))
    }

    /// Leading `rows x cols` submatrix.
    pub fn submatrix(&self, rows: usize, cols: usize) -> BinaryPcm {
        let rows = rows.min(self.rows);
        let cols = cols.min(self.cols);
        BinaryPcm {
            rows,
            cols,
            row_adj: self.row_adj[..rows]
                .iter()
                .map(|r| r.iter().copied().filter(|&j| j < cols).collect())
                .collect(),
        }
    }

    /// Flips entry `(i, j)`.
    pub fn toggle(&mut self, i: usize, j: usize) {
        let r = &mut self.row_adj[i];
        match r.binary_search(&j) {
            Ok(p) => {
                r.remove(p);
            }
            Err(p) => r.insert(p, j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked two-level example with `Sx = 10`, `Sy = 3`. Entry (1, 2) is
    /// `y^1 (x^3 + x^8)`, which is not type-I.
    pub(crate) fn example_bivariate() -> BivariatePolyMatrix {
        BivariatePolyMatrix::from_terms_shared_y(
            2,
            3,
            10,
            3,
            [
                (0, 0, 2, 1),
                (0, 1, 5, 0),
                (0, 1, 7, 2),
                (1, 0, 1, 0),
                (1, 1, 8, 2),
                (1, 2, 3, 1),
                (1, 2, 8, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn y_expand_single_block() {
        let h = BivariatePolyMatrix::from_terms(1, 1, 10, 3, [(0, 0, 2, 1)]).unwrap();
        let u = h.y_expand();
        assert_eq!(u.entry(0, 2), &[2]);
        assert_eq!(u.entry(1, 0), &[2]);
        assert_eq!(u.entry(2, 1), &[2]);
        assert_eq!(u.entry(0, 0), &[] as &[u32]);
    }

    #[test]
    fn y_expand_identity_case() {
        let h = BivariatePolyMatrix::from_terms(1, 1, 5, 1, [(0, 0, 0, 0)]).unwrap();
        let u = h.y_expand();
        assert_eq!((u.rows(), u.cols()), (1, 1));
        assert_eq!(u.entry(0, 0), &[0]);
    }

    #[test]
    fn y_expand_two_terms() {
        let h = BivariatePolyMatrix::from_terms(1, 1, 10, 2, [(0, 0, 3, 0), (0, 0, 8, 1)]).unwrap();
        let u = h.y_expand();
        assert_eq!(u.entry(0, 0), &[3]);
        assert_eq!(u.entry(0, 1), &[8]);
        assert_eq!(u.entry(1, 0), &[8]);
        assert_eq!(u.entry(1, 1), &[3]);
        assert!(u.is_type_one());
    }

    #[test]
    fn duplicate_y_rejected() {
        let r = BivariatePolyMatrix::from_terms(1, 1, 10, 2, [(0, 0, 3, 1), (0, 0, 8, 1)]);
        assert_eq!(
            r,
            Err(AlgebraError::DuplicateY {
                row: 0,
                col: 0,
                y: 1
            })
        );
        let shared =
            BivariatePolyMatrix::from_terms_shared_y(1, 1, 10, 2, [(0, 0, 3, 1), (0, 0, 8, 1)])
                .unwrap();
        assert!(!shared.has_distinct_y());
        assert!(!shared.y_expand().is_type_one());
        assert!(matches!(
            BivariatePolyMatrix::from_terms_shared_y(1, 1, 10, 2, [(0, 0, 3, 1), (0, 0, 13, 1)]),
            Err(AlgebraError::DuplicateMonomial { .. })
        ));
    }

    #[test]
    fn x_expand_shift_convention() {
        let u = UnivariatePolyMatrix::from_entries(3, &[vec![vec![1]]]).unwrap();
        let b = u.x_expand();
        let ones: Vec<_> = b.iter_ones().collect();
        assert_eq!(ones, vec![(0, 2), (1, 0), (2, 1)]);

        let id = UnivariatePolyMatrix::from_entries(4, &[vec![vec![0]]]).unwrap().x_expand();
        assert_eq!(id.iter_ones().collect::<Vec<_>>(), (0..4).map(|t| (t, t)).collect::<Vec<_>>());
    }

    #[test]
    fn full_expand_composes_levels() {
        let h = BivariatePolyMatrix::from_terms(1, 1, 2, 2, [(0, 0, 1, 1)]).unwrap();
        let b = h.full_expand();
        assert_eq!(b, h.y_expand().x_expand());
        // y-shift moves the 2x2 x-block off the diagonal; x-shift swaps inside it.
        assert_eq!(
            b.iter_ones().collect::<Vec<_>>(),
            vec![(0, 3), (1, 2), (2, 1), (3, 0)]
        );
    }

    #[test]
    fn full_expand_zero_matrix() {
        let h = BivariatePolyMatrix::new(2, 3, 4, 2).unwrap();
        let b = h.full_expand();
        assert_eq!((b.rows(), b.cols(), b.ones()), (16, 24, 0));
    }

    #[test]
    fn protograph_of_example() {
        let h = example_bivariate();
        assert_eq!(
            h.protograph(),
            Protomatrix::from_rows(&[vec![1, 2, 0], vec![1, 1, 2]]).unwrap()
        );
        let empty = BivariatePolyMatrix::new(0, 0, 1, 1).unwrap();
        assert_eq!(empty.protograph(), Protomatrix::zeros(0, 0));
    }

    #[test]
    fn protomatrix_weights() {
        let p = Protomatrix::from_rows(&[vec![1, 2, 0], vec![1, 1, 2]]).unwrap();
        assert_eq!(p.row_weight(1), 4);
        assert_eq!(p.col_weight(1), 3);
        assert_eq!(p.max_entry(), 2);
        assert_eq!(p.edge_count(), 7);
        assert!((Protomatrix::all_ones(3, 6).design_rate() - 0.5).abs() < 1e-12);
        assert!(Protomatrix::from_rows(&[vec![1, 2], vec![1]]).is_err());
    }
}
