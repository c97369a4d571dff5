//! Text formats: protographs, spreadings, polynomial matrices, alist, CSV.
//!
//! The "poly" format is one header line `M N Sx Sy w` followed by one line
//! `t i j a b` per monomial `x^a y^b` at entry `(i, j)` of component `t`,
//! sorted. Lines starting with `#` are comments.

use std::fmt::Write as _;

use thiserror::Error;

use crate::algebra::{BinaryPcm, BivariatePolyMatrix, Monomial, Protomatrix};
use crate::simulate::SimResult;
use crate::spreading::{ScCode, SpreadingSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// One-based line number; 0 when the error concerns the whole input.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their one-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>, ParseError> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| err(line, format!("expected a nonnegative integer, found `{tok}`")))
        })
        .collect()
}

fn exact<const K: usize, T: std::str::FromStr + Copy>(
    line: usize,
    s: &str,
    what: &str,
) -> Result<[T; K], ParseError> {
    let v = numbers::<T>(line, s)?;
    v.try_into()
        .map_err(|v: Vec<T>| err(line, format!("expected {K} values ({what}), found {}", v.len())))
}

fn parse_proto_lines<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<Protomatrix, ParseError> {
    let (ln, header) = lines.next().ok_or_else(|| err(0, "missing `M N` header"))?;
    let [m, n] = exact::<2, usize>(ln, header, "M N")?;
    if m == 0 || n == 0 {
        return Err(err(ln, "protograph dimensions must be positive"));
    }
    let mut rows = Vec::with_capacity(m);
    let mut last = ln;
    for k in 0..m {
        let (ln, s) = lines
            .next()
            .ok_or_else(|| err(last + 1, format!("expected {m} rows, found {k}")))?;
        let row = numbers::<u32>(ln, s)?;
        if row.len() != n {
            return Err(err(ln, format!("expected {n} entries, found {}", row.len())));
        }
        rows.push(row);
        last = ln;
    }
    Protomatrix::from_rows(&rows).map_err(|e| err(ln, e.to_string()))
}

/// `M N` followed by `M` rows of `N` integers.
pub fn parse_protograph(text: &str) -> Result<Protomatrix, ParseError> {
    let mut lines = content_lines(text);
    let p = parse_proto_lines(&mut lines)?;
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "unexpected content after the protograph"));
    }
    Ok(p)
}

pub fn write_protograph(p: &Protomatrix) -> String {
    let mut s = format!("{} {}\n", p.rows(), p.cols());
    for row in p.to_rows() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

/// Component protographs in protograph format, separated by blank lines.
pub fn parse_spreading(text: &str) -> Result<SpreadingSpec, ParseError> {
    let mut lines = content_lines(text).peekable();
    let mut comps = Vec::new();
    while lines.peek().is_some() {
        comps.push(parse_proto_lines(&mut lines)?);
    }
    SpreadingSpec::new(comps).map_err(|e| err(0, e.to_string()))
}

pub fn write_spreading(spec: &SpreadingSpec) -> String {
    spec.components()
        .iter()
        .map(write_protograph)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Serializes `code` with `comments` as leading `#` lines.
pub fn write_poly(code: &ScCode, comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(s, "# {line}");
        }
    }
    let _ = writeln!(
        s,
        "{} {} {} {} {}",
        code.m(),
        code.n(),
        code.sx(),
        code.sy(),
        code.w()
    );
    let mut terms = Vec::new();
    for (t, h) in code.components().iter().enumerate() {
        for (i, j, cell) in h.grid().iter() {
            for m in cell {
                terms.push((t, i, j, m.x, m.y));
            }
        }
    }
    terms.sort();
    for (t, i, j, a, b) in terms {
        let _ = writeln!(s, "{t} {i} {j} {a} {b}");
    }
    s
}

pub fn parse_poly(text: &str) -> Result<ScCode, ParseError> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| err(0, "missing `M N Sx Sy w` header"))?;
    let [m, n, sx, sy, w] = exact::<5, usize>(ln, header, "M N Sx Sy w")?;
    if m == 0 || n == 0 || w == 0 {
        return Err(err(ln, "M, N and w must be positive"));
    }
    let (sx, sy) = (
        u32::try_from(sx).map_err(|_| err(ln, "Sx too large"))?,
        u32::try_from(sy).map_err(|_| err(ln, "Sy too large"))?,
    );
    let mut comps = (0..w)
        .map(|_| BivariatePolyMatrix::new(m, n, sx, sy))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| err(ln, e.to_string()))?;
    for (ln, s) in lines {
        let [t, i, j, a, b] = exact::<5, usize>(ln, s, "t i j a b")?;
        if t >= w || i >= m || j >= n {
            return Err(err(ln, format!("term position ({t}, {i}, {j}) outside {w} x {m} x {n}")));
        }
        if a >= sx as usize || b >= sy as usize {
            return Err(err(ln, format!("exponents ({a}, {b}) outside [0, {sx}) x [0, {sy})")));
        }
        comps[t]
            .insert_shared_y(i, j, Monomial::new(a as u32, b as u32))
            .map_err(|e| err(ln, e.to_string()))?;
    }
    ScCode::new(comps).map_err(|e| err(0, e.to_string()))
}

/// Standard alist: sizes, maximum degrees, degree lists, then one-based
/// neighbor lists padded with zeros to the maximum degree.
pub fn write_alist(h: &BinaryPcm) -> String {
    let cols = h.col_adj();
    let rows: Vec<&[usize]> = (0..h.rows()).map(|i| h.row(i)).collect();
    let max_c = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_r = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let join = |v: &mut dyn Iterator<Item = usize>| {
        v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let padded = |adj: &[usize], width: usize| {
        let mut v: Vec<usize> = adj.iter().map(|&x| x + 1).collect();
        v.sort_unstable();
        v.resize(width.max(1), 0);
        join(&mut v.into_iter())
    };
    let mut s = format!("{} {}\n{} {}\n", h.cols(), h.rows(), max_c, max_r);
    let _ = writeln!(s, "{}", join(&mut cols.iter().map(Vec::len)));
    let _ = writeln!(s, "{}", join(&mut rows.iter().map(|r| r.len())));
    for c in &cols {
        let _ = writeln!(s, "{}", padded(c, max_c));
    }
    for r in &rows {
        let _ = writeln!(s, "{}", padded(r, max_r));
    }
    s
}

pub fn parse_alist(text: &str) -> Result<BinaryPcm, ParseError> {
    let mut lines = content_lines(text);
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, format!("missing {what}")));
    let (ln, s) = next("`n m` line")?;
    let [n, m] = exact::<2, usize>(ln, s, "n m")?;
    next("maximum degrees")?;
    next("column degrees")?;
    next("row degrees")?;
    let mut ones = Vec::new();
    for j in 0..n {
        let (ln, s) = next("column lists")?;
        for r in numbers::<usize>(ln, s)? {
            if r > m {
                return Err(err(ln, format!("row index {r} exceeds {m}")));
            }
            if r > 0 {
                ones.push((r - 1, j));
            }
        }
    }
    BinaryPcm::from_ones(m, n, ones).map_err(|e| err(0, e.to_string()))
}

pub const SWEEP_CSV_HEADER: &str = "alg,dv,dc,w,g,Sy,Smin_found,trials,seed,wall_ms";

/// One sweep CSV row; `s_min` is empty when nothing was found.
#[allow(clippy::too_many_arguments)]
pub fn sweep_csv_row(
    alg: u8,
    dv: usize,
    dc: usize,
    w: usize,
    g: usize,
    sy: u32,
    s_min: Option<u32>,
    trials: usize,
    seed: u64,
    wall_ms: u128,
) -> String {
    let s = s_min.map(|v| v.to_string()).unwrap_or_default();
    format!("{alg},{dv},{dc},{w},{g},{sy},{s},{trials},{seed},{wall_ms}")
}

pub const BER_CSV_HEADER: &str = "ebn0_db,frames,bit_errors,frame_errors,ber,fer,avg_iters";

pub fn ber_csv_row(r: &SimResult) -> String {
    format!(
        "{},{},{},{},{:e},{:e},{:.3}",
        r.ebn0_db, r.frames, r.bit_errors, r.frame_errors, r.ber, r.fer, r.avg_iters
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protograph_round_trip() {
        let p = Protomatrix::from_rows(&[vec![1, 2, 0], vec![1, 1, 2]]).unwrap();
        let text = write_protograph(&p);
        assert_eq!(text, "2 3\n1 2 0\n1 1 2\n");
        assert_eq!(parse_protograph(&text).unwrap(), p);
    }

    #[test]
    fn protograph_diagnostics() {
        let e = parse_protograph("2 3\n1 2 0\n1 x 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_protograph("# c\n2 3\n1 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_protograph("2 3\n1 2 0\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn spreading_round_trip() {
        let text = "1 2\n1 1\n\n1 2\n0 1\n\n1 2\n1 1\n";
        let spec = parse_spreading(text).unwrap();
        assert_eq!(spec.w(), 3);
        assert_eq!(spec.block().to_rows(), vec![vec![2, 3]]);
        assert_eq!(write_spreading(&spec), text);
    }

    #[test]
    fn poly_round_trip() {
        let mut h = BivariatePolyMatrix::new(1, 2, 7, 2).unwrap();
        h.insert(0, 1, Monomial::new(3, 1)).unwrap();
        h.insert(0, 1, Monomial::new(5, 0)).unwrap();
        h.insert(0, 0, Monomial::new(0, 0)).unwrap();
        let code = ScCode::block(h);
        let text = write_poly(&code, &["seed 4".into()]);
        assert_eq!(text, "# seed 4\n1 2 7 2 1\n0 0 0 0 0\n0 0 1 3 1\n0 0 1 5 0\n");
        let back = parse_poly(&text).unwrap();
        assert_eq!(back, code);
        assert_eq!(write_poly(&back, &["seed 4".into()]), text);
    }

    #[test]
    fn poly_diagnostics() {
        assert_eq!(parse_poly("1 2 7 2 1\n0 0 2 7 0\n").unwrap_err().line, 2);
        assert_eq!(parse_poly("1 2 7 2\n").unwrap_err().line, 1);
        assert_eq!(parse_poly("1 2 7 2 1\n0 0 0 1 0\n0 0 0 1 0\n").unwrap_err().line, 3);
    }

    #[test]
    fn alist_round_trip() {
        let h = BinaryPcm::from_ones(2, 3, [(0, 0), (0, 1), (1, 1), (1, 2)]).unwrap();
        let text = write_alist(&h);
        assert_eq!(text, "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n");
        assert_eq!(parse_alist(&text).unwrap(), h);
    }
}
