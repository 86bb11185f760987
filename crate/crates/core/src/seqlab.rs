//! Finite windows of eventually periodic sequences.
//!
//! A [`FiniteSeq`] is a contiguous run of samples `f(start), f(start+1), …`
//! with exact rational values or `+∞`. The combinators mirror the closure
//! properties of eventually periodic sequences under sum, product, minimum and
//! quotient, and [`detect_period`] recovers the threshold `n0` and period `T`
//! from a finite horizon.
//!
//! Detection is empirical. For `T = 1, 2, …` the smallest `n0` with
//! `f(n + T) = f(n)` on the whole sampled range `n ≥ n0` is computed, and the
//! pair is accepted when the verified tail `[n0, end]` holds at least
//! `confirm_factor` full periods and is at least as long as the transient
//! `[start, n0)`. The first accepted `T` is reported.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::decimal::format_rational;
use crate::error::{Error, Result};
use crate::Rational;

/// Default number of full periods a detection must be confirmed over.
pub const DEFAULT_CONFIRM_FACTOR: usize = 3;

/// A sample: an exact rational or `+∞`. `+∞` is larger than every rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeqValue {
    Finite(Rational),
    Infinity,
}

impl SeqValue {
    pub fn int(v: impl Into<BigInt>) -> Self {
        SeqValue::Finite(Rational::from_integer(v.into()))
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            SeqValue::Finite(q) => Some(q),
            SeqValue::Infinity => None,
        }
    }
}

impl From<Rational> for SeqValue {
    fn from(q: Rational) -> Self {
        SeqValue::Finite(q)
    }
}

impl fmt::Display for SeqValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqValue::Finite(q) => f.write_str(&format_rational(q)),
            SeqValue::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for SeqValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Samples `f(start), …, f(start + len − 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteSeq {
    start: u64,
    samples: Vec<SeqValue>,
}

impl FiniteSeq {
    pub fn new(start: u64, samples: Vec<SeqValue>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(FiniteSeq { start, samples })
    }

    pub fn from_ints<I, T>(start: u64, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Self::new(start, values.into_iter().map(SeqValue::int).collect())
    }

    pub fn from_rationals(start: u64, values: impl IntoIterator<Item = Rational>) -> Result<Self> {
        Self::new(start, values.into_iter().map(SeqValue::Finite).collect())
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Index of the last sample.
    pub fn end(&self) -> u64 {
        self.start + self.samples.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[SeqValue] {
        &self.samples
    }

    pub fn get(&self, n: u64) -> Option<&SeqValue> {
        n.checked_sub(self.start)
            .and_then(|i| self.samples.get(i as usize))
    }

    pub fn finite_values(&self) -> Option<Vec<&Rational>> {
        self.samples.iter().map(SeqValue::as_finite).collect()
    }

    /// `Δf(n) = f(n+1) − f(n)` over `[start, end − 1]`.
    pub fn first_differences(&self) -> Result<FiniteSeq> {
        if self.samples.len() < 2 {
            return Err(Error::InsufficientSamples(
                "first differences need at least two samples".into(),
            ));
        }
        let diffs = self
            .samples
            .windows(2)
            .enumerate()
            .map(|(i, w)| match (&w[0], &w[1]) {
                (SeqValue::Finite(a), SeqValue::Finite(b)) => Ok(SeqValue::Finite(b - a)),
                _ => Err(Error::InfiniteOperand {
                    op: "difference",
                    index: self.start + i as u64,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteSeq::new(self.start, diffs)
    }

    /// Sub-window starting at absolute index `from`.
    pub fn tail_from(&self, from: u64) -> Result<FiniteSeq> {
        let offset = from
            .checked_sub(self.start)
            .filter(|&o| (o as usize) < self.samples.len())
            .ok_or_else(|| Error::InvalidArgument(format!("index {from} outside the window")))?;
        FiniteSeq::new(from, self.samples[offset as usize..].to_vec())
    }
}

/// Pointwise combination rule for [`combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combinator {
    Sum,
    Product,
    Min,
    Quotient,
}

fn finite_operand(v: &SeqValue, op: &'static str, index: u64) -> Result<Rational> {
    v.as_finite()
        .cloned()
        .ok_or(Error::InfiniteOperand { op, index })
}

/// Pointwise sum, product, minimum or quotient of sequences on the same window.
///
/// `+∞` takes part in minima only; it is an error in the arithmetic
/// combinators. A quotient takes exactly two sequences and fails on a zero
/// divisor anywhere in the window.
pub fn combine(seqs: &[FiniteSeq], op: Combinator) -> Result<FiniteSeq> {
    let first = seqs.first().ok_or(Error::EmptySequence)?;
    if seqs
        .iter()
        .any(|s| s.start != first.start || s.len() != first.len())
    {
        return Err(Error::DimensionMismatch(
            "sequences must share the same index range".into(),
        ));
    }
    if op == Combinator::Quotient && seqs.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "quotient takes exactly two sequences, got {}",
            seqs.len()
        )));
    }
    let mut out = Vec::with_capacity(first.len());
    for i in 0..first.len() {
        let n = first.start + i as u64;
        let column = seqs.iter().map(|s| &s.samples[i]);
        let v = match op {
            Combinator::Min => column.min().cloned().expect("nonempty"),
            Combinator::Sum => {
                let mut acc = Rational::zero();
                for v in column {
                    acc += finite_operand(v, "sum", n)?;
                }
                SeqValue::Finite(acc)
            }
            Combinator::Product => {
                let mut acc = Rational::from_integer(BigInt::from(1));
                for v in column {
                    acc *= finite_operand(v, "product", n)?;
                }
                SeqValue::Finite(acc)
            }
            Combinator::Quotient => {
                let num = finite_operand(&seqs[0].samples[i], "quotient", n)?;
                let den = finite_operand(&seqs[1].samples[i], "quotient", n)?;
                if den.is_zero() {
                    return Err(Error::DivisionByZero(n));
                }
                SeqValue::Finite(num / den)
            }
        };
        out.push(v);
    }
    FiniteSeq::new(first.start, out)
}

/// How a [`PeriodReport`] was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PeriodStatus {
    /// Verified over the sampled horizon with the required confirmation.
    ConfirmedWindow,
    /// Matched a closed-form oracle exactly.
    OracleExact,
    /// No `(n0, T)` fits within the horizon.
    NotFound,
}

/// Detected threshold and period of a sampled sequence.
///
/// `n0`, `period` and `block` are absent when `status` is `NotFound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodReport<V = SeqValue> {
    pub n0: Option<u64>,
    #[serde(rename = "T")]
    pub period: Option<u64>,
    pub block: Vec<V>,
    pub confirmed_window: u64,
    pub status: PeriodStatus,
}

impl<V> PeriodReport<V> {
    pub fn not_found() -> Self {
        PeriodReport {
            n0: None,
            period: None,
            block: Vec::new(),
            confirmed_window: 0,
            status: PeriodStatus::NotFound,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status != PeriodStatus::NotFound
    }

    /// `(n0, T)` when found.
    pub fn pair(&self) -> Option<(u64, u64)> {
        self.n0.zip(self.period)
    }

    pub fn map_block<W>(self, f: impl FnMut(V) -> W) -> PeriodReport<W> {
        PeriodReport {
            n0: self.n0,
            period: self.period,
            block: self.block.into_iter().map(f).collect(),
            confirmed_window: self.confirmed_window,
            status: self.status,
        }
    }
}

/// Smallest offset `o` such that `values[i + t] == values[i]` for all `i ≥ o`.
fn minimal_threshold<V: PartialEq>(values: &[V], t: usize) -> usize {
    (0..values.len().saturating_sub(t))
        .rev()
        .find(|&i| values[i] != values[i + t])
        .map_or(0, |i| i + 1)
}

fn accepted(len: usize, offset: usize, t: usize, confirm_factor: usize) -> bool {
    let tail = len - offset;
    tail >= confirm_factor * t && tail >= offset
}

/// Period detection on a slice whose first element has index `start`.
pub fn detect_in_slice<V: PartialEq + Clone>(
    values: &[V],
    start: u64,
    confirm_factor: usize,
) -> Result<PeriodReport<V>> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    if confirm_factor < 2 {
        return Err(Error::InvalidArgument(format!(
            "confirm factor must be ≥ 2, got {confirm_factor}"
        )));
    }
    let len = values.len();
    for t in 1..=len / confirm_factor {
        let offset = minimal_threshold(values, t);
        if accepted(len, offset, t, confirm_factor) {
            return Ok(PeriodReport {
                n0: Some(start + offset as u64),
                period: Some(t as u64),
                block: values[offset..offset + t].to_vec(),
                confirmed_window: ((len - offset) / t) as u64,
                status: PeriodStatus::ConfirmedWindow,
            });
        }
    }
    Ok(PeriodReport::not_found())
}

/// Minimal period, then minimal threshold, within the sampled horizon.
pub fn detect_period(seq: &FiniteSeq, confirm_factor: usize) -> Result<PeriodReport> {
    detect_in_slice(&seq.samples, seq.start, confirm_factor)
}

/// Detection for vector-valued sequences (`values[n - start]` is the vector
/// at `n`): each component is detected on its own, periods are combined by
/// lcm and thresholds by max, and the combined pair is re-verified on the
/// vectors with the same acceptance rule.
pub fn detect_vector_period<V: PartialEq + Clone>(
    values: &[Vec<V>],
    start: u64,
    confirm_factor: usize,
) -> Result<PeriodReport<Vec<V>>> {
    let first = values.first().ok_or(Error::EmptySequence)?;
    let width = first.len();
    if values.iter().any(|v| v.len() != width) {
        return Err(Error::DimensionMismatch(
            "vector samples have different lengths".into(),
        ));
    }
    let mut period = 1u64;
    let mut n0 = start;
    for c in 0..width {
        let column: Vec<V> = values.iter().map(|v| v[c].clone()).collect();
        let report = detect_in_slice(&column, start, confirm_factor)?;
        let Some((cn0, ct)) = report.pair() else {
            return Ok(PeriodReport::not_found());
        };
        period = period.lcm(&ct);
        n0 = n0.max(cn0);
    }
    let (len, offset, t) = (values.len(), (n0 - start) as usize, period as usize);
    if offset + t > len
        || !accepted(len, offset, t, confirm_factor)
        || minimal_threshold(values, t) > offset
    {
        return Ok(PeriodReport::not_found());
    }
    Ok(PeriodReport {
        n0: Some(n0),
        period: Some(period),
        block: values[offset..offset + t].to_vec(),
        confirmed_window: ((len - offset) / t) as u64,
        status: PeriodStatus::ConfirmedWindow,
    })
}

/// Pointwise minimum of sequences whose first differences are eventually
/// periodic, together with the detection report for the minimum's own first
/// differences.
///
/// Fails with [`Error::InsufficientSamples`] when some input's differences
/// cannot be confirmed periodic within the window.
pub fn min_of_difference_periodic(
    seqs: &[FiniteSeq],
    confirm_factor: usize,
) -> Result<(FiniteSeq, PeriodReport)> {
    for (i, s) in seqs.iter().enumerate() {
        let report = detect_period(&s.first_differences()?, confirm_factor)?;
        if !report.is_found() {
            return Err(Error::InsufficientSamples(format!(
                "first differences of input {i} are not confirmed periodic"
            )));
        }
    }
    let min = combine(seqs, Combinator::Min)?;
    let report = detect_period(&min.first_differences()?, confirm_factor)?;
    Ok((min, report))
}
