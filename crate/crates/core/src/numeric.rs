//! Exact rational scalars and matrix kernels.
//!
//! Scalars are `num_rational::BigRational`, always reduced with a positive
//! denominator. Matrices are stored densely; elimination works on the
//! nonzero pattern only, which keeps the hierarchical difference operators
//! (a few nonzeros per row) cheap to factor exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::{map_indices, ExecMode};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `1 / base^exp` as an exact rational.
pub fn inv_pow(base: usize, exp: usize) -> Rational {
    Rational::new(BigInt::one(), num_traits::pow(BigInt::from(base), exp))
}

/// Renders as `p/q`, or `p` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("{t:?}: {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("{t:?}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("{t:?}: zero denominator")));
        }
        Ok(Rational::new(n, d))
    } else {
        let n = BigInt::from_str(t).map_err(|e| Error::Parse(format!("{t:?}: {e}")))?;
        Ok(Rational::from_integer(n))
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with 12 significant digits.
pub fn decimal(r: &Rational) -> String {
    decimal_f64(to_f64(r))
}

/// [`decimal`] for a float.
pub fn decimal_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let places = (11 - e).max(0) as usize;
        format!("{x:.places$}")
    } else {
        format!("{x:.11e}")
    }
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Dense rectangular matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `(column, value)` pairs of the nonzero entries of row `i`.
    pub fn row_nonzeros(&self, i: usize) -> Vec<(usize, Rational)> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (j, v.clone()))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.matmul_with(other, ExecMode::default())
    }

    /// Product that only visits nonzero entries of both factors.
    pub fn matmul_with(&self, other: &Self, mode: ExecMode) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let right: Vec<Vec<(usize, Rational)>> =
            map_indices(mode, other.rows, |k| other.row_nonzeros(k));
        let out_rows = map_indices(mode, self.rows, |i| {
            let mut acc = vec![Rational::zero(); other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in &right[k] {
                    acc[*j] += a * b;
                }
            }
            acc
        });
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data: out_rows.into_iter().flatten().collect(),
        })
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Rows and columns picked by index, in the given order.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        let mut m = Self::zeros(row_idx.len(), col_idx.len());
        for (a, &i) in row_idx.iter().enumerate() {
            for (b, &j) in col_idx.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    /// CSV of `p/q` strings, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(format_rational).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{op} {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

type SparseRow = Vec<(usize, Rational)>;

/// `row - factor * pivot`, both sorted by column; exact zeros are dropped.
fn axpy_row(row: &SparseRow, factor: &Rational, pivot: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i == row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_piv {
            out.push((pivot[j].0, -(factor * &pivot[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - factor * &pivot[j].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Exact Gaussian elimination over the nonzero pattern.
///
/// Columns `0..pivot_cols` are eliminated from the last to the first,
/// choosing the sparsest available row each time. Columns at or beyond
/// `pivot_cols` (right-hand sides) are carried along but never pivoted.
struct Elimination {
    rows: Vec<SparseRow>,
    /// (column, row) in elimination order.
    pivots: Vec<(usize, usize)>,
}

impl Elimination {
    fn run(mut rows: Vec<SparseRow>, pivot_cols: usize) -> Self {
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); pivot_cols];
        for (r, row) in rows.iter().enumerate() {
            for (c, _) in row {
                if *c < pivot_cols {
                    col_rows[*c].insert(r);
                }
            }
        }
        let mut pivots = Vec::new();
        for c in (0..pivot_cols).rev() {
            let Some(&pr) = col_rows[c].iter().min_by_key(|&&r| (rows[r].len(), r)) else {
                continue;
            };
            for (cc, _) in &rows[pr] {
                if *cc < pivot_cols {
                    col_rows[*cc].remove(&pr);
                }
            }
            let pivot_row = rows[pr].clone();
            let pivot_val = pivot_row
                .iter()
                .find(|(cc, _)| *cc == c)
                .map(|(_, v)| v.clone())
                .expect("pivot entry present");
            let targets: Vec<usize> = col_rows[c].iter().copied().collect();
            for r in targets {
                let entry = rows[r]
                    .iter()
                    .find(|(cc, _)| *cc == c)
                    .map(|(_, v)| v.clone())
                    .expect("indexed entry present");
                let factor = entry / &pivot_val;
                let updated = axpy_row(&rows[r], &factor, &pivot_row);
                for (cc, _) in &rows[r] {
                    if *cc < pivot_cols {
                        col_rows[*cc].remove(&r);
                    }
                }
                for (cc, _) in &updated {
                    if *cc < pivot_cols {
                        col_rows[*cc].insert(r);
                    }
                }
                rows[r] = updated;
            }
            pivots.push((c, pr));
        }
        Self { rows, pivots }
    }
}

fn sparse_rows(a: &RationalMatrix) -> Vec<SparseRow> {
    (0..a.rows()).map(|i| a.row_nonzeros(i)).collect()
}

/// Exact rank over the rationals.
pub fn rank(a: &RationalMatrix) -> usize {
    Elimination::run(sparse_rows(a), a.cols()).pivots.len()
}

/// Solves `a x = b` exactly for square nonsingular `a`.
pub fn solve_linear(a: &RationalMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    let mut cols = solve_columns(a, std::slice::from_ref(&b.to_vec()))?;
    Ok(cols.pop().expect("one right-hand side"))
}

/// Solves `a x = b_k` for several right-hand sides with one elimination.
pub fn solve_columns(a: &RationalMatrix, rhs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if let Some(b) = rhs.iter().find(|b| b.len() != a.rows()) {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {} entries",
            a.rows(),
            b.len()
        )));
    }
    let n = a.cols();
    let mut rows = sparse_rows(a);
    for (k, b) in rhs.iter().enumerate() {
        for (row, bi) in rows.iter_mut().zip(b) {
            if !bi.is_zero() {
                row.push((n + k, bi.clone()));
            }
        }
    }
    let elim = Elimination::run(rows, n);
    if elim.pivots.len() < n {
        return Err(Error::Singular);
    }
    let mut x = vec![vec![Rational::zero(); n]; rhs.len()];
    for &(c, r) in elim.pivots.iter().rev() {
        let mut acc = vec![Rational::zero(); rhs.len()];
        let mut diag = Rational::zero();
        for (cc, v) in &elim.rows[r] {
            if *cc >= n {
                acc[*cc - n] += v;
            } else if *cc == c {
                diag = v.clone();
            } else {
                for (k, xk) in x.iter().enumerate() {
                    if !xk[*cc].is_zero() {
                        acc[k] -= v * &xk[*cc];
                    }
                }
            }
        }
        for (k, a) in acc.into_iter().enumerate() {
            x[k][c] = a / &diag;
        }
    }
    Ok(x)
}

/// Inverse of a square nonsingular matrix.
pub fn inverse(a: &RationalMatrix) -> Result<RationalMatrix> {
    let n = a.rows();
    let identity: Vec<Vec<Rational>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let cols = solve_columns(a, &identity)?;
    let mut inv = RationalMatrix::zeros(n, n);
    for (j, col) in cols.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            if !v.is_zero() {
                inv.set(i, j, v);
            }
        }
    }
    Ok(inv)
}

/// Result of the 64-bit fallback solver.
#[derive(Debug, Clone)]
pub struct FloatSolution {
    pub x: Vec<f64>,
    /// `max_i |(A x - b)_i|`.
    pub residual: f64,
}

/// Dense row-major f64 system solved by partial-pivot Gaussian elimination.
pub fn solve_f64(a: &[f64], n: usize, b: &[f64], mode: ExecMode) -> Result<FloatSolution> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "float solve: {} matrix entries and {} rhs entries for n={n}",
            a.len(),
            b.len()
        )));
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .expect("nonempty range");
        if m[p * n + k].abs() < 1e-300 {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            rhs.swap(k, p);
        }
        let (head, tail) = m.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        let pivot = pivot_row[k];
        let pivot_rhs = rhs[k];
        let updates: Vec<(usize, f64)> = map_indices(mode, n - k - 1, |off| {
            let f = tail[off * n + k] / pivot;
            (off, f)
        });
        let rows: Vec<&mut [f64]> = tail.chunks_mut(n).collect();
        eliminate_rows(mode, rows, &updates, pivot_row, k);
        for (off, f) in &updates {
            rhs[k + 1 + off] -= f * pivot_rhs;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = ((k + 1)..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (rhs[k] - s) / m[k * n + k];
    }
    let residual = (0..n)
        .map(|i| {
            let ax: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            (ax - b[i]).abs()
        })
        .fold(0.0, f64::max);
    Ok(FloatSolution { x, residual })
}

fn eliminate_rows(
    mode: ExecMode,
    rows: Vec<&mut [f64]>,
    updates: &[(usize, f64)],
    pivot_row: &[f64],
    k: usize,
) {
    let apply = |(row, (_, f)): (&mut [f64], &(usize, f64))| {
        if *f != 0.0 {
            for j in k..row.len() {
                row[j] -= f * pivot_row[j];
            }
        }
    };
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        rows.into_par_iter().zip(updates.par_iter()).for_each(apply);
        return;
    }
    let _ = mode;
    rows.into_iter().zip(updates.iter()).for_each(apply);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "3", "-7/2", "1/3"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("4/6").unwrap(), ratio(2, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&ratio(1, 3)), "0.333333333333");
        assert_eq!(decimal(&int(-1)), "-1.00000000000");
        assert_eq!(decimal(&int(0)), "0");
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let id = RationalMatrix::identity(2);
        assert_eq!(
            solve_linear(&id, &[int(3), ratio(1, 2)]).unwrap(),
            vec![int(3), ratio(1, 2)]
        );
        let d = RationalMatrix::from_i64_rows(&[&[2, 0], &[0, 4]]).unwrap();
        assert_eq!(
            solve_linear(&d, &[int(1), int(1)]).unwrap(),
            vec![ratio(1, 2), ratio(1, 4)]
        );
    }

    #[test]
    fn solve_errors_are_distinct() {
        let sing = RationalMatrix::from_i64_rows(&[&[1, 1], &[2, 2]]).unwrap();
        assert_eq!(solve_linear(&sing, &[int(1), int(2)]), Err(Error::Singular));
        let id = RationalMatrix::identity(2);
        assert!(matches!(
            solve_linear(&id, &[int(1)]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(rank(&RationalMatrix::identity(3)), 3);
        assert_eq!(rank(&RationalMatrix::zeros(2, 2)), 0);
        let h0 = RationalMatrix::from_i64_rows(&[&[-1, 1], &[1, -1]]).unwrap();
        assert_eq!(rank(&h0), 1);
        let wide = RationalMatrix::from_i64_rows(&[&[1, 2, 3], &[2, 4, 6]]).unwrap();
        assert_eq!(rank(&wide), 1);
    }

    #[test]
    fn matmul_identity_and_transpose() {
        let a = RationalMatrix::from_rows(vec![
            vec![ratio(1, 2), int(0), int(3)],
            vec![int(-1), ratio(2, 3), int(0)],
        ])
        .unwrap();
        assert_eq!(RationalMatrix::identity(2).matmul(&a).unwrap(), a);
        assert_eq!(a.transpose().transpose(), a);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn float_solver_matches_exact() {
        let a = [4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let b = [1.0, 2.0, 3.0];
        let s = solve_f64(&a, 3, &b, ExecMode::Sequential).unwrap();
        let p = solve_f64(&a, 3, &b, ExecMode::Parallel).unwrap();
        assert!(s.residual < 1e-12);
        assert_eq!(s.x, p.x);
        let ex = solve_linear(
            &RationalMatrix::from_i64_rows(&[&[4, 1, 0], &[1, 3, 1], &[0, 1, 2]]).unwrap(),
            &[int(1), int(2), int(3)],
        )
        .unwrap();
        for (xf, xe) in s.x.iter().zip(&ex) {
            assert!((xf - to_f64(xe)).abs() < 1e-12);
        }
    }
}
