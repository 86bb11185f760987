//! Dense arbitrary-precision integer matrices.
//!
//! Everything here is exact. Matrices are immutable values: every operation
//! returns a fresh matrix.

use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ntkit::{self, Prime};

/// A nonnegative integer or `+∞`, the codomain of p-adic valuations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedNat {
    Finite(u64),
    Infinity,
}

impl ExtendedNat {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedNat::Infinity)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtendedNat::Finite(v) => Some(v),
            ExtendedNat::Infinity => None,
        }
    }
}

impl From<u64> for ExtendedNat {
    fn from(v: u64) -> Self {
        ExtendedNat::Finite(v)
    }
}

impl Add for ExtendedNat {
    type Output = ExtendedNat;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedNat::Finite(a), ExtendedNat::Finite(b)) => ExtendedNat::Finite(a + b),
            _ => ExtendedNat::Infinity,
        }
    }
}

impl fmt::Display for ExtendedNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedNat::Finite(v) => write!(f, "{v}"),
            ExtendedNat::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedNat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedNat::Finite(v) => s.serialize_u64(*v),
            ExtendedNat::Infinity => s.serialize_str("inf"),
        }
    }
}

/// Dense row-major matrix over the integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(IntMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from a list of rows, which must all have the same length.
    pub fn from_rows<T: Into<BigInt>>(rows: Vec<Vec<T>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            entries.extend(row.into_iter().map(Into::into));
        }
        IntMatrix::new(nrows, ncols, entries)
    }

    pub fn identity(size: usize) -> Self {
        Self::diagonal((0..size).map(|_| BigInt::one()).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn diagonal(diag: Vec<BigInt>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.into_iter().enumerate() {
            m.entries[i * n + i] = d;
        }
        m
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

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.cols).map(<[_]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        IntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn checked_add(&self, other: &IntMatrix) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    /// Exact product `self · other`.
    pub fn mul(&self, other: &IntMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for (k, a) in row.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        acc += a * b;
                    }
                }
                entries.push(acc);
            }
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// `self^n` by binary exponentiation; `A^0 = I`.
    pub fn pow(&self, mut n: u64) -> Result<Self> {
        let size = self.require_square()?;
        let mut result = IntMatrix::identity(size);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        IntMatrix {
            rows: rows.len(),
            cols: cols.len(),
            entries,
        }
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &IntMatrix) -> Self {
        let rows = self.rows + other.rows;
        let cols = self.cols + other.cols;
        let mut m = IntMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.entries[i * cols + j] = self.get(i, j).clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.entries[(self.rows + i) * cols + self.cols + j] = other.get(i, j).clone();
            }
        }
        m
    }

    pub fn determinant(&self) -> Result<BigInt> {
        self.require_square()?;
        Ok(bareiss_det(self.to_rows()))
    }

    /// Determinant of the submatrix on the given row and column index sets.
    ///
    /// Orders up to 3 are expanded directly; larger orders go through
    /// fraction-free elimination.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> BigInt {
        debug_assert_eq!(rows.len(), cols.len());
        let e = |a: usize, b: usize| self.get(rows[a], cols[b]);
        match rows.len() {
            0 => BigInt::one(),
            1 => e(0, 0).clone(),
            2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
            3 => {
                e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                    - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                    + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
            }
            _ => bareiss_det(self.submatrix(rows, cols).to_rows()),
        }
    }

    /// The `r`-th compound matrix: all `r×r` minors, with row and column
    /// subsets in lexicographic order.
    pub fn compound(&self, r: usize) -> Result<Self> {
        let max = self.rows.min(self.cols);
        if r == 0 || r > max {
            return Err(Error::OrderOutOfRange { order: r, max });
        }
        let row_sets = combinations(self.rows, r);
        let col_sets = combinations(self.cols, r);
        let entries = row_sets
            .iter()
            .flat_map(|rs| col_sets.iter().map(move |cs| (rs, cs)))
            .map(|(rs, cs)| self.minor(rs, cs))
            .collect();
        Ok(IntMatrix {
            rows: row_sets.len(),
            cols: col_sets.len(),
            entries,
        })
    }

    /// Nonnegative gcd of all entries; zero only for the zero matrix.
    pub fn content_gcd(&self) -> BigInt {
        self.entries.iter().fold(
            BigInt::zero(),
            |g, e| if e.is_zero() { g } else { g.gcd(e) },
        )
    }

    /// Entrywise minimum of the p-adic valuations.
    pub fn valuation(&self, p: Prime) -> ExtendedNat {
        self.entries
            .iter()
            .map(|e| ntkit::int_valuation(e, p))
            .min()
            .unwrap_or(ExtendedNat::Infinity)
    }

    /// Characteristic polynomial `det(xI − A)`, coefficients constant term first.
    ///
    /// Faddeev–LeVerrier over the integers; every division by `k` is exact.
    pub fn charpoly(&self) -> Result<Vec<BigInt>> {
        let m = self.require_square()?;
        let mut coeffs = vec![BigInt::zero(); m + 1];
        coeffs[m] = BigInt::one();
        let mut aux = IntMatrix::zeros(m, m);
        for k in 1..=m {
            // aux_k = A·aux_{k-1} + c_{m-k+1}·I
            let mut next = self.mul(&aux)?;
            for i in 0..m {
                next.entries[i * m + i] += &coeffs[m - k + 1];
            }
            let trace: BigInt = (0..m)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .enumerate()
                        .map(|(j, a)| a * next.get(j, i))
                        .sum::<BigInt>()
                })
                .sum();
            let (q, r) = trace.div_rem(&BigInt::from(k));
            debug_assert!(r.is_zero(), "Faddeev-LeVerrier division must be exact");
            coeffs[m - k] = -q;
            aux = next;
        }
        Ok(coeffs)
    }

    /// `A^m = 0` for an `m×m` matrix.
    pub fn is_nilpotent(&self) -> Result<bool> {
        let m = self.require_square()?;
        Ok(self.pow(m as u64)?.is_zero())
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut a = self.to_rows();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        let mut prev = BigInt::one();
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for i in rank + 1..rows {
                for j in c + 1..cols {
                    let v = (&a[i][j] * &a[rank][c] - &a[i][c] * &a[rank][j]) / &prev;
                    a[i][j] = v;
                }
                a[i][c] = BigInt::zero();
            }
            prev = a[rank][c].clone();
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    /// Reads the plain text format: a `rows cols` header line followed by one
    /// line of decimal integers per row. Blank lines are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `rows cols` header".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| Error::Parse {
                    line: hline,
                    message: format!("invalid dimension {s:?}"),
                })
        };
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: hline,
                message: format!("expected `rows cols`, found {header:?}"),
            });
        }
        let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (lno, line) = lines.next().ok_or(Error::Parse {
                line: hline + r + 1,
                message: format!("expected {rows} rows, found {r}"),
            })?;
            let row: Vec<&str> = line.split_whitespace().collect();
            if row.len() != cols {
                return Err(Error::Parse {
                    line: lno,
                    message: format!("expected {cols} entries, found {}", row.len()),
                });
            }
            for tok in row {
                let v = tok.parse::<BigInt>().map_err(|_| Error::Parse {
                    line: lno,
                    message: format!("not an integer: {tok:?}"),
                })?;
                entries.push(v);
            }
        }
        if let Some((lno, _)) = lines.next() {
            return Err(Error::Parse {
                line: lno,
                message: "unexpected trailing content".into(),
            });
        }
        IntMatrix::new(rows, cols, entries)
    }

    /// Parses either the text format or the JSON object format, whichever the
    /// input looks like.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            })
        } else {
            Self::parse_text(text)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    #[serde(with = "crate::decimal::nested")]
    entries: Vec<Vec<BigInt>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.to_rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.entries.len() != raw.rows {
            return Err(serde::de::Error::custom(format!(
                "declared {} rows, found {}",
                raw.rows,
                raw.entries.len()
            )));
        }
        let m = IntMatrix::from_rows(raw.entries).map_err(serde::de::Error::custom)?;
        if m.cols != raw.cols {
            return Err(serde::de::Error::custom(format!(
                "declared {} columns, found {}",
                raw.cols, m.cols
            )));
        }
        Ok(m)
    }
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Fraction-free Gaussian elimination determinant.
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}
