//! Smith normal form over the integers.
//!
//! [`smith_form`] diagonalizes by unimodular row and column operations.
//! [`determinantal_divisors`] followed by [`snf_from_divisors`] is a second,
//! independent route through the gcds of minors (`d_i = γ_i / γ_{i−1}`); the
//! two are kept apart so each can check the other.
//!
//! Elimination rule: at step `k` the pivot is the nonzero entry of smallest
//! absolute value in the trailing submatrix, ties broken by lowest row and then
//! lowest column. After diagonalization a gcd/lcm pass over diagonal pairs
//! restores the divisibility chain, and signs are normalized to be nonnegative.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::ntkit::{self, Prime};

/// Unimodular `U`, `V` with `U · S · V = M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    pub u: IntMatrix,
    pub v: IntMatrix,
}

/// Invariant factors `d_1 | d_2 | …`, nonnegative, zeros trailing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmithForm {
    #[serde(with = "crate::decimal::vec")]
    diag: Vec<BigInt>,
    rank: usize,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    witnesses: Option<Witnesses>,
}

impl SmithForm {
    /// Validates the chain and builds a form without witnesses.
    pub fn from_diag(diag: Vec<BigInt>) -> Result<Self> {
        let rank = diag.iter().take_while(|d| !d.is_zero()).count();
        if diag[rank..].iter().any(|d| !d.is_zero()) {
            return Err(Error::InvalidArgument(
                "zeros must trail the nonzero factors".into(),
            ));
        }
        if diag.iter().any(|d| d.is_negative()) {
            return Err(Error::InvalidArgument(
                "invariant factors must be nonnegative".into(),
            ));
        }
        if diag[..rank].windows(2).any(|w| !w[1].is_multiple_of(&w[0])) {
            return Err(Error::InvalidArgument(
                "divisibility chain is broken".into(),
            ));
        }
        Ok(SmithForm {
            diag,
            rank,
            witnesses: None,
        })
    }

    pub fn diag(&self) -> &[BigInt] {
        &self.diag
    }

    pub fn into_diag(self) -> Vec<BigInt> {
        self.diag
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn witnesses(&self) -> Option<&Witnesses> {
        self.witnesses.as_ref()
    }

    /// The diagonal matrix `S` with the shape of the original matrix.
    pub fn matrix(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut out = vec![vec![BigInt::zero(); cols]; rows];
        for (i, d) in self.diag.iter().enumerate() {
            out[i][i] = d.clone();
        }
        IntMatrix::from_rows(out).expect("nonempty shape")
    }

    /// The form over the localization at `p`: each nonzero `d_i` replaced by
    /// its `p`-part `p^{ν_p(d_i)}`.
    pub fn localize(&self, p: Prime) -> SmithForm {
        SmithForm {
            diag: self.diag.iter().map(|d| ntkit::p_part(d, p)).collect(),
            rank: self.rank,
            witnesses: None,
        }
    }

    /// `γ_i = d_1 ⋯ d_i` for `i = 0..=size`.
    pub fn divisors(&self) -> DeterminantalDivisors {
        let mut gamma = Vec::with_capacity(self.diag.len() + 1);
        gamma.push(BigInt::one());
        for d in &self.diag {
            let next = gamma.last().expect("seeded") * d;
            gamma.push(next);
        }
        DeterminantalDivisors { gamma }
    }
}

/// `γ_0 = 1, γ_1, …`: gcds of the `i×i` minors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterminantalDivisors {
    #[serde(with = "crate::decimal::vec")]
    pub gamma: Vec<BigInt>,
}

impl DeterminantalDivisors {
    /// Largest nonzero divisor `γ_r`, `r` the rank.
    pub fn top_nonzero(&self) -> &BigInt {
        self.gamma
            .iter()
            .rev()
            .find(|g| !g.is_zero())
            .expect("γ_0 = 1")
    }
}

struct Elimination {
    w: Vec<Vec<BigInt>>,
    u: Option<Vec<Vec<BigInt>>>,
    v: Option<Vec<Vec<BigInt>>>,
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

// Invariant throughout: M = U · W · V.
impl Elimination {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.w.swap(i, j);
        if let Some(u) = &mut self.u {
            for row in u.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.w.iter_mut() {
            row.swap(i, j);
        }
        if let Some(v) = &mut self.v {
            v.swap(i, j);
        }
    }

    /// row_i −= q · row_j
    fn sub_row(&mut self, i: usize, j: usize, q: &BigInt) {
        let (src, dst) = two_rows(&mut self.w, j, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d -= q * s;
        }
        if let Some(u) = &mut self.u {
            // U ← U · (I + q e_ij): col_j += q · col_i
            for row in u.iter_mut() {
                let add = q * &row[i];
                row[j] += add;
            }
        }
    }

    /// col_i −= q · col_j
    fn sub_col(&mut self, i: usize, j: usize, q: &BigInt) {
        for row in self.w.iter_mut() {
            let sub = q * &row[j];
            row[i] -= sub;
        }
        if let Some(v) = &mut self.v {
            // V ← (I + q e_ji) · V: row_j += q · row_i
            let (src, dst) = two_rows(v, i, j);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += q * s;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.w[i].iter_mut() {
            *x = -&*x;
        }
        if let Some(u) = &mut self.u {
            for row in u.iter_mut() {
                row[i] = -&row[i];
            }
        }
    }

    /// Rows `(i, j)` of W ← `l · (rows)`, columns `(i, j)` of W ← `(cols) · r`,
    /// for 2×2 matrices of determinant 1.
    fn apply_pair(&mut self, i: usize, j: usize, l: [[BigInt; 2]; 2], r: [[BigInt; 2]; 2]) {
        let cols = self.w[0].len();
        for c in 0..cols {
            let (a, b) = (self.w[i][c].clone(), self.w[j][c].clone());
            self.w[i][c] = &l[0][0] * &a + &l[0][1] * &b;
            self.w[j][c] = &l[1][0] * &a + &l[1][1] * &b;
        }
        for row in self.w.iter_mut() {
            let (a, b) = (row[i].clone(), row[j].clone());
            row[i] = &a * &r[0][0] + &b * &r[1][0];
            row[j] = &a * &r[0][1] + &b * &r[1][1];
        }
        if let Some(u) = &mut self.u {
            // U ← U · l⁻¹, l⁻¹ = [[l11, −l01], [−l10, l00]]
            for row in u.iter_mut() {
                let (a, b) = (row[i].clone(), row[j].clone());
                row[i] = &a * &l[1][1] - &b * &l[1][0];
                row[j] = &b * &l[0][0] - &a * &l[0][1];
            }
        }
        if let Some(v) = &mut self.v {
            // V ← r⁻¹ · V
            for c in 0..v[0].len() {
                let (a, b) = (v[i][c].clone(), v[j][c].clone());
                v[i][c] = &r[1][1] * &a - &r[0][1] * &b;
                v[j][c] = &r[0][0] * &b - &r[1][0] * &a;
            }
        }
    }

    /// Position of the nonzero entry of least absolute value in `W[k.., k..]`.
    fn pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in self.w.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if x.is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => x.magnitude() < self.w[bi][bj].magnitude(),
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        best
    }

    fn eliminate(&mut self) {
        let (rows, cols) = (self.w.len(), self.w[0].len());
        for k in 0..rows.min(cols) {
            let Some((pi, pj)) = self.pivot(k) else {
                return;
            };
            self.swap_rows(k, pi);
            self.swap_cols(k, pj);
            loop {
                let mut clean = true;
                for i in k + 1..rows {
                    if self.w[i][k].is_zero() {
                        continue;
                    }
                    let q = self.w[i][k].div_floor(&self.w[k][k]);
                    self.sub_row(i, k, &q);
                    clean &= self.w[i][k].is_zero();
                }
                for j in k + 1..cols {
                    if self.w[k][j].is_zero() {
                        continue;
                    }
                    let q = self.w[k][j].div_floor(&self.w[k][k]);
                    self.sub_col(j, k, &q);
                    clean &= self.w[k][j].is_zero();
                }
                if clean {
                    break;
                }
                let (pi, pj) = self.pivot(k).expect("a nonzero remainder exists");
                self.swap_rows(k, pi);
                self.swap_cols(k, pj);
            }
        }
    }

    fn normalize_signs(&mut self) {
        for k in 0..self.w.len().min(self.w[0].len()) {
            if self.w[k][k].sign() == Sign::Minus {
                self.negate_row(k);
            }
        }
    }

    /// Replaces each diagonal pair `(a, b)` with `(gcd, lcm)` until the chain holds.
    fn fix_divisibility(&mut self, rank: usize) {
        for i in 0..rank {
            for j in i + 1..rank {
                let (a, b) = (self.w[i][i].clone(), self.w[j][j].clone());
                if b.is_multiple_of(&a) {
                    continue;
                }
                let e = a.extended_gcd(&b);
                let (g, s, t) = (e.gcd, e.x, e.y);
                let (ag, bg) = (&a / &g, &b / &g);
                let l = [[s.clone(), t.clone()], [-&bg, ag.clone()]];
                let r = [[BigInt::one(), -(&t * &bg)], [BigInt::one(), &s * &ag]];
                self.apply_pair(i, j, l, r);
                debug_assert_eq!(self.w[i][i], g);
            }
        }
    }
}

fn two_rows<T>(rows: &mut [Vec<T>], src: usize, dst: usize) -> (&Vec<T>, &mut Vec<T>) {
    assert_ne!(src, dst);
    if src < dst {
        let (a, b) = rows.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = rows.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}

fn from_rows(rows: Vec<Vec<BigInt>>) -> IntMatrix {
    IntMatrix::from_rows(rows).expect("nonempty")
}

/// Smith normal form of `m`, optionally with unimodular witnesses `U, V`
/// satisfying `U · S · V = m`. Rectangular input is accepted.
pub fn smith_form(m: &IntMatrix, with_witnesses: bool) -> SmithForm {
    let mut el = Elimination {
        w: m.to_rows(),
        u: with_witnesses.then(|| identity_rows(m.rows())),
        v: with_witnesses.then(|| identity_rows(m.cols())),
    };
    el.eliminate();
    el.normalize_signs();
    let size = m.rows().min(m.cols());
    let rank = (0..size).take_while(|&k| !el.w[k][k].is_zero()).count();
    el.fix_divisibility(rank);
    let diag = (0..size).map(|k| el.w[k][k].clone()).collect();
    let witnesses = match (el.u, el.v) {
        (Some(u), Some(v)) => Some(Witnesses {
            u: from_rows(u),
            v: from_rows(v),
        }),
        _ => None,
    };
    SmithForm {
        diag,
        rank,
        witnesses,
    }
}

/// `γ_i = gcd` of the `i×i` minors, i.e. the entry gcd of the `i`-th compound.
pub fn determinantal_divisors(m: &IntMatrix) -> DeterminantalDivisors {
    let size = m.rows().min(m.cols());
    let mut gamma = vec![BigInt::one()];
    for i in 1..=size {
        let g = m.compound(i).expect("order in range").content_gcd();
        let zero = g.is_zero();
        gamma.push(g);
        if zero {
            // every larger minor expands into vanishing ones
            gamma.resize(size + 1, BigInt::zero());
            break;
        }
    }
    DeterminantalDivisors { gamma }
}

/// `d_i = γ_i / γ_{i−1}`, and `d_i = 0` past the rank.
pub fn snf_from_divisors(g: &DeterminantalDivisors) -> Result<SmithForm> {
    let gamma = &g.gamma;
    if gamma.first().is_none_or(|g0| !g0.is_one()) {
        return Err(Error::CorruptDivisors("γ_0 must be 1".into()));
    }
    let mut diag = Vec::with_capacity(gamma.len() - 1);
    for i in 1..gamma.len() {
        let (prev, cur) = (&gamma[i - 1], &gamma[i]);
        if cur.is_negative() {
            return Err(Error::CorruptDivisors(format!("γ_{i} is negative")));
        }
        if cur.is_zero() {
            diag.push(BigInt::zero());
            continue;
        }
        if prev.is_zero() {
            return Err(Error::CorruptDivisors(format!(
                "γ_{i} is nonzero after γ_{} = 0",
                i - 1
            )));
        }
        let (q, r) = cur.div_rem(prev);
        if !r.is_zero() {
            return Err(Error::CorruptDivisors(format!(
                "γ_{} does not divide γ_{i}",
                i - 1
            )));
        }
        diag.push(q);
    }
    SmithForm::from_diag(diag)
        .map_err(|e| Error::CorruptDivisors(format!("ratios do not form a Smith chain: {e}")))
}

/// Smith form over the localization of the integers at `p`.
pub fn local_smith(m: &IntMatrix, p: Prime) -> SmithForm {
    smith_form(m, false).localize(p)
}

/// Entrywise product of localized forms.
pub fn reconstruct_global(parts: &[(Prime, SmithForm)]) -> Result<SmithForm> {
    let (_, first) = parts
        .first()
        .ok_or_else(|| Error::MismatchedParts("no localized parts".into()))?;
    let mut diag = vec![BigInt::one(); first.size()];
    for (p, part) in parts {
        if part.size() != first.size() || part.rank() != first.rank() {
            return Err(Error::MismatchedParts(format!(
                "part at p = {p} has size {} and rank {}, expected {} and {}",
                part.size(),
                part.rank(),
                first.size(),
                first.rank()
            )));
        }
        if let Some(bad) = part.diag[..part.rank]
            .iter()
            .find(|d| !ntkit::is_positive_power_of(d, *p))
        {
            return Err(Error::MismatchedParts(format!(
                "entry {bad} of the part at p = {p} is not a power of {p}"
            )));
        }
        for (acc, d) in diag.iter_mut().zip(&part.diag) {
            *acc *= d;
        }
    }
    SmithForm::from_diag(diag).map_err(|e| Error::MismatchedParts(e.to_string()))
}
