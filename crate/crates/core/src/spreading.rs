//! Edge spreading of block codes into spatially-coupled (SC) form.
//!
//! A block matrix `H` is split into components `H_0 .. H_{w-1}` with
//! `sum H_t = H`. The SC matrix of `L` batches has `(L + w - 1)` block rows
//! and `L` block columns, with block `(r, c)` equal to `H_{r-c}` when
//! `0 <= r - c < w` and zero otherwise.

use rand::Rng;
use thiserror::Error;

use crate::algebra::{AlgebraError, BinaryPcm, BivariatePolyMatrix, EntryGrid, Protomatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpreadError {
    #[error("coupling width must be at least 1")]
    NoComponents,
    #[error("component {index} is {found_rows}x{found_cols}, expected {rows}x{cols}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("components sum to {found} at ({row}, {col}) but the block protomatrix has {expected}")]
    SumMismatch {
        row: usize,
        col: usize,
        expected: u32,
        found: u32,
    },
    #[error("assignment at ({row}, {col}) covers {found} terms, entry has {expected}")]
    NotAPartition {
        row: usize,
        col: usize,
        expected: usize,
        found: usize,
    },
    #[error("assignment at ({row}, {col}) names component {component} but w = {w}")]
    ComponentOutOfRange {
        row: usize,
        col: usize,
        component: usize,
        w: usize,
    },
    #[error("lifting factors differ between components")]
    LiftingMismatch,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Number of block rows and block columns of the cycle-relevant submatrix
/// for cycles of length `ell` at coupling width `w`.
pub fn crm_blocks(w: usize, ell: usize) -> (usize, usize) {
    let w1 = w.saturating_sub(1);
    (1 + (ell + 2) / 4 * w1, 1 + ell / 4 * w1)
}

/// Batches used when checking an SC code for girth `g`: one more than the
/// widest cycle-relevant submatrix consulted.
pub fn default_batches(w: usize, g: usize) -> usize {
    1 + g / 4 * w.saturating_sub(1) + 1
}

/// Places `components` on the banded block diagonal and keeps the leading
/// `row_blocks x col_blocks` blocks. Nothing outside that window is built.
pub fn leading_blocks<T: Clone>(
    components: &[EntryGrid<T>],
    row_blocks: usize,
    col_blocks: usize,
) -> EntryGrid<T> {
    let m = components.first().map_or(0, EntryGrid::rows);
    let n = components.first().map_or(0, EntryGrid::cols);
    let mut out = EntryGrid::new(row_blocks * m, col_blocks * n);
    for c in 0..col_blocks {
        for (t, comp) in components.iter().enumerate() {
            let r = c + t;
            if r >= row_blocks {
                break;
            }
            for (i, j, cell) in comp.iter() {
                out.cell_mut(r * m + i, c * n + j).extend_from_slice(cell);
            }
        }
    }
    out
}

/// The terminated SC matrix of `batches` replications.
pub fn assemble<T: Clone>(components: &[EntryGrid<T>], batches: usize) -> EntryGrid<T> {
    let w = components.len();
    if batches == 0 {
        return leading_blocks(components, 0, 0);
    }
    leading_blocks(components, batches + w - 1, batches)
}

/// The cycle-relevant submatrix for cycles of length `ell`.
pub fn crm<T: Clone>(components: &[EntryGrid<T>], ell: usize) -> EntryGrid<T> {
    let (rb, cb) = crm_blocks(components.len(), ell);
    leading_blocks(components, rb, cb)
}

/// Component protomatrices `P_0 .. P_{w-1}` of a spread protograph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpreadingSpec {
    components: Vec<Protomatrix>,
}

impl SpreadingSpec {
    pub fn new(components: Vec<Protomatrix>) -> Result<Self, SpreadError> {
        let first = components.first().ok_or(SpreadError::NoComponents)?;
        let (rows, cols) = (first.rows(), first.cols());
        for (index, c) in components.iter().enumerate() {
            if c.rows() != rows || c.cols() != cols {
                return Err(SpreadError::ShapeMismatch {
                    index,
                    rows,
                    cols,
                    found_rows: c.rows(),
                    found_cols: c.cols(),
                });
            }
        }
        Ok(SpreadingSpec { components })
    }

    /// The trivial spreading `w = 1`.
    pub fn unspread(block: &Protomatrix) -> Self {
        SpreadingSpec {
            components: vec![block.clone()],
        }
    }

    /// Assigns every unit edge of `block` independently and uniformly to one
    /// of `w` components.
    pub fn random<R: Rng + ?Sized>(block: &Protomatrix, w: usize, rng: &mut R) -> Self {
        assert!(w >= 1, "coupling width must be at least 1");
        let mut components = vec![Protomatrix::zeros(block.rows(), block.cols()); w];
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                for _ in 0..block.get(i, j) {
                    let t = rng.random_range(0..w);
                    components[t].increment(i, j);
                }
            }
        }
        SpreadingSpec { components }
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

    pub fn components(&self) -> &[Protomatrix] {
        &self.components
    }

    /// The block protomatrix `sum_t P_t`.
    pub fn block(&self) -> Protomatrix {
        despread_protographs(&self.components)
    }

    /// Largest multiplicity of any component entry.
    pub fn max_component_entry(&self) -> u32 {
        self.components.iter().map(Protomatrix::max_entry).max().unwrap_or(0)
    }

    /// Checks `sum_t P_t = block` entrywise.
    pub fn check_block(&self, block: &Protomatrix) -> Result<(), SpreadError> {
        let sum = self.block();
        if sum.rows() != block.rows() || sum.cols() != block.cols() {
            return Err(SpreadError::ShapeMismatch {
                index: 0,
                rows: block.rows(),
                cols: block.cols(),
                found_rows: sum.rows(),
                found_cols: sum.cols(),
            });
        }
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                if sum.get(i, j) != block.get(i, j) {
                    return Err(SpreadError::SumMismatch {
                        row: i,
                        col: j,
                        expected: block.get(i, j),
                        found: sum.get(i, j),
                    });
                }
            }
        }
        Ok(())
    }

    /// Spreading a protomatrix: returns the components after checking they
    /// sum to it.
    pub fn spread_protograph(&self, block: &Protomatrix) -> Result<Vec<Protomatrix>, SpreadError> {
        self.check_block(block)?;
        Ok(self.components.clone())
    }

    /// Canonical per-term assignment: within each block entry, the first
    /// `P_0[i][j]` terms go to component 0, the next `P_1[i][j]` to 1, and so on.
    pub fn assignment(&self) -> Assignment {
        let (m, n) = (self.m(), self.n());
        let mut cells = vec![Vec::new(); m * n];
        for (t, c) in self.components.iter().enumerate() {
            for i in 0..m {
                for j in 0..n {
                    cells[i * n + j].extend(std::iter::repeat_n(t, c.get(i, j) as usize));
                }
            }
        }
        Assignment {
            rows: m,
            cols: n,
            w: self.w(),
            cells,
        }
    }
}

pub fn despread_protographs(components: &[Protomatrix]) -> Protomatrix {
    let Some(first) = components.first() else {
        return Protomatrix::zeros(0, 0);
    };
    let mut sum = Protomatrix::zeros(first.rows(), first.cols());
    for c in components {
        for i in 0..sum.rows() {
            for j in 0..sum.cols() {
                sum.set(i, j, sum.get(i, j) + c.get(i, j));
            }
        }
    }
    sum
}

/// Component index of every term of every entry of a block matrix, in the
/// entry's stored order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    rows: usize,
    cols: usize,
    w: usize,
    cells: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn w(&self) -> usize {
        self.w
    }

    pub fn cell(&self, i: usize, j: usize) -> &[usize] {
        &self.cells[i * self.cols + j]
    }

    /// The component protomatrices this assignment induces.
    pub fn spec(&self) -> SpreadingSpec {
        let mut comps = vec![Protomatrix::zeros(self.rows, self.cols); self.w];
        for i in 0..self.rows {
            for j in 0..self.cols {
                for &t in self.cell(i, j) {
                    comps[t].increment(i, j);
                }
            }
        }
        SpreadingSpec { components: comps }
    }
}

/// Splits `h` into components according to `assignment`.
pub fn spread(
    h: &BivariatePolyMatrix,
    assignment: &Assignment,
) -> Result<Vec<BivariatePolyMatrix>, SpreadError> {
    if assignment.rows != h.rows() || assignment.cols != h.cols() {
        return Err(SpreadError::ShapeMismatch {
            index: 0,
            rows: h.rows(),
            cols: h.cols(),
            found_rows: assignment.rows,
            found_cols: assignment.cols,
        });
    }
    let w = assignment.w;
    if w == 0 {
        return Err(SpreadError::NoComponents);
    }
    let mut grids: Vec<EntryGrid<_>> = (0..w).map(|_| EntryGrid::new(h.rows(), h.cols())).collect();
    for (i, j, cell) in h.grid().iter() {
        let a = assignment.cell(i, j);
        if a.len() != cell.len() {
            return Err(SpreadError::NotAPartition {
                row: i,
                col: j,
                expected: cell.len(),
                found: a.len(),
            });
        }
        for (m, &t) in cell.iter().zip(a) {
            if t >= w {
                return Err(SpreadError::ComponentOutOfRange {
                    row: i,
                    col: j,
                    component: t,
                    w,
                });
            }
            grids[t].cell_mut(i, j).push(*m);
        }
    }
    Ok(grids
        .into_iter()
        .map(|g| BivariatePolyMatrix::from_grid(h.sx(), h.sy(), g))
        .collect())
}

/// Entrywise union of components, with the assignment that inverts it.
pub fn despread(
    components: &[BivariatePolyMatrix],
) -> Result<(BivariatePolyMatrix, Assignment), SpreadError> {
    let first = components.first().ok_or(SpreadError::NoComponents)?;
    let (rows, cols, sx, sy) = (first.rows(), first.cols(), first.sx(), first.sy());
    for (index, c) in components.iter().enumerate() {
        if c.rows() != rows || c.cols() != cols {
            return Err(SpreadError::ShapeMismatch {
                index,
                rows,
                cols,
                found_rows: c.rows(),
                found_cols: c.cols(),
            });
        }
        if c.sx() != sx || c.sy() != sy {
            return Err(SpreadError::LiftingMismatch);
        }
    }
    let mut block = BivariatePolyMatrix::new(rows, cols, sx, sy)?;
    for c in components {
        for (i, j, cell) in c.grid().iter() {
            for m in cell {
                block.insert(i, j, *m)?;
            }
        }
    }
    let mut cells = vec![Vec::new(); rows * cols];
    for (i, j, cell) in block.grid().iter() {
        cells[i * cols + j] = cell
            .iter()
            .map(|m| {
                components
                    .iter()
                    .position(|c| c.entry(i, j).contains(m))
                    .expect("term came from a component")
            })
            .collect();
    }
    Ok((
        block,
        Assignment {
            rows,
            cols,
            w: components.len(),
            cells,
        },
    ))
}

/// A time-invariant SC code given by its component polynomial matrices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScCode {
    components: Vec<BivariatePolyMatrix>,
}

impl ScCode {
    pub fn new(components: Vec<BivariatePolyMatrix>) -> Result<Self, SpreadError> {
        let first = components.first().ok_or(SpreadError::NoComponents)?;
        for (index, c) in components.iter().enumerate() {
            if c.rows() != first.rows() || c.cols() != first.cols() {
                return Err(SpreadError::ShapeMismatch {
                    index,
                    rows: first.rows(),
                    cols: first.cols(),
                    found_rows: c.rows(),
                    found_cols: c.cols(),
                });
            }
            if c.sx() != first.sx() || c.sy() != first.sy() {
                return Err(SpreadError::LiftingMismatch);
            }
        }
        Ok(ScCode { components })
    }

    /// A block code viewed as an SC code with `w = 1`.
    pub fn block(h: BivariatePolyMatrix) -> Self {
        ScCode {
            components: vec![h],
        }
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

    pub fn sx(&self) -> u32 {
        self.components[0].sx()
    }

    pub fn sy(&self) -> u32 {
        self.components[0].sy()
    }

    pub fn components(&self) -> &[BivariatePolyMatrix] {
        &self.components
    }

    pub fn spec(&self) -> SpreadingSpec {
        SpreadingSpec {
            components: self.components.iter().map(BivariatePolyMatrix::protograph).collect(),
        }
    }

    pub fn despread(&self) -> Result<(BivariatePolyMatrix, Assignment), SpreadError> {
        despread(&self.components)
    }

    fn grids(&self) -> Vec<EntryGrid<crate::algebra::Monomial>> {
        self.components.iter().map(|c| c.grid().clone()).collect()
    }

    fn wrap(&self, grid: EntryGrid<crate::algebra::Monomial>) -> BivariatePolyMatrix {
        BivariatePolyMatrix::from_grid(self.sx(), self.sy(), grid)
    }

    /// `H_SC(x, y)` terminated after `batches` replications.
    pub fn assemble(&self, batches: usize) -> BivariatePolyMatrix {
        self.wrap(assemble(&self.grids(), batches))
    }

    /// Cycle-relevant submatrix for cycles of length `ell`.
    pub fn crm(&self, ell: usize) -> BivariatePolyMatrix {
        self.wrap(crm(&self.grids(), ell))
    }

    /// Binary parity-check matrix of `batches` replications.
    pub fn expand(&self, batches: usize) -> BinaryPcm {
        self.assemble(batches).full_expand()
    }
}
