//! Construction and verification of high-girth quasi-cyclic (QC) and
//! spatially-coupled (SC) LDPC codes with a hierarchical (two-level) circulant
//! structure.
//!
//! The crate is organized bottom-up:
//!
//! - [`algebra`]: protographs, bivariate/univariate polynomial matrices and
//!   the lifting maps down to a binary parity-check matrix.
//! - [`spreading`]: edge spreading, SC assembly and cycle-relevant
//!   submatrices.
//! - [`cycles`]: closed-path enumeration and girth at the polynomial level.
//! - [`optimizer`]: greedy cost-table exponent optimization and the three
//!   construction algorithms.
//! - [`oracle`]: independent Tanner-graph girth and cycle counting.
//! - [`simulate`]: BPSK/AWGN belief-propagation Monte-Carlo.
//! - [`io`]: text formats (poly, alist, protographs, CSV).

pub mod algebra;
pub mod cycles;
pub mod io;
pub mod modular;
pub mod optimizer;
pub mod oracle;
pub mod simulate;
pub mod spreading;

pub use algebra::{BinaryPcm, BivariatePolyMatrix, Monomial, Protomatrix, UnivariatePolyMatrix};
pub use cycles::Girth;
pub use spreading::{ScCode, SpreadingSpec};
