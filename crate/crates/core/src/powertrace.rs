//! Smith forms along the powers of a square matrix.
//!
//! A [`PowerTrace`] holds `S_0, …, S_N` (the Smith forms of `A^0, …, A^N`) and
//! the diagonal quotients `D_0, …, D_{N−1}` with `S_{n+1} = D_n S_n`. Where
//! `S_n[i] = 0` the quotient is set to zero. The module also produces the
//! gcd-ratio sequence `g(n) = gcd(A^{n+1}) / gcd(A^n)` and the decomposition
//! `ν_p(A^n) = a·n + h(n)`, with `a` read off the Newton polygon of the
//! characteristic polynomial.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmat::{ExtendedNat, IntMatrix};
use crate::ntkit::{self, Prime};
use crate::seqlab::{self, FiniteSeq, PeriodReport, SeqValue};
use crate::smith::{determinantal_divisors, smith_form, SmithForm};
use crate::Rational;

/// A diagonal, serialized as a list of decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Diag(#[serde(with = "crate::decimal::vec")] pub Vec<BigInt>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerTrace {
    matrix: IntMatrix,
    horizon: u64,
    smith: Vec<SmithForm>,
    quotients: Vec<Vec<BigInt>>,
}

impl PowerTrace {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `S_0, …, S_horizon`.
    pub fn smith_seq(&self) -> &[SmithForm] {
        &self.smith
    }

    /// `D_0, …, D_{horizon−1}`.
    pub fn d_seq(&self) -> &[Vec<BigInt>] {
        &self.quotients
    }
}

fn require_square(a: &IntMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

fn require_horizon(horizon: u64) -> Result<()> {
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!(
            "horizon too small: {horizon} (need ≥ 2)"
        )));
    }
    Ok(())
}

fn require_not_nilpotent(a: &IntMatrix) -> Result<()> {
    if a.is_nilpotent()? {
        Err(Error::Nilpotent)
    } else {
        Ok(())
    }
}

/// `A^0, …, A^last`, each obtained from the previous one.
fn powers(a: &IntMatrix, last: u64) -> Vec<IntMatrix> {
    let mut out = Vec::with_capacity(last as usize + 1);
    out.push(IntMatrix::identity(a.rows()));
    for n in 0..last as usize {
        let next = a.mul(&out[n]).expect("square");
        out.push(next);
    }
    out
}

fn quotient(prev: &SmithForm, next: &SmithForm) -> Vec<BigInt> {
    prev.diag()
        .iter()
        .zip(next.diag())
        .map(|(s, t)| {
            if s.is_zero() {
                assert!(t.is_zero(), "invariant factor reappeared after vanishing");
                return BigInt::zero();
            }
            let (q, r) = t.div_rem(s);
            assert!(r.is_zero(), "S_n does not divide S_(n+1)");
            q
        })
        .collect()
}

pub fn trace_powers(a: &IntMatrix, horizon: u64) -> Result<PowerTrace> {
    require_square(a)?;
    require_horizon(horizon)?;
    let smith: Vec<SmithForm> = powers(a, horizon)
        .par_iter()
        .map(|m| smith_form(m, false))
        .collect();
    let quotients = smith.windows(2).map(|w| quotient(&w[0], &w[1])).collect();
    Ok(PowerTrace {
        matrix: a.clone(),
        horizon,
        smith,
        quotients,
    })
}

/// `(n0, T)` of the quotient sequence `D_n`.
pub fn detect_dn_periodicity(t: &PowerTrace, confirm_factor: usize) -> Result<PeriodReport<Diag>> {
    Ok(seqlab::detect_vector_period(&t.quotients, 0, confirm_factor)?.map_block(Diag))
}

/// `ν_p(D_n)` componentwise, `+∞` where `D_n[i] = 0`.
pub fn quotient_valuations(t: &PowerTrace, p: Prime) -> Vec<Vec<ExtendedNat>> {
    t.quotients
        .iter()
        .map(|d| d.iter().map(|x| ntkit::int_valuation(x, p)).collect())
        .collect()
}

/// Period of the `p`-part of `D_n`. The period of `D_n` itself is the lcm of
/// these over the relevant primes.
pub fn detect_prime_periodicity(
    t: &PowerTrace,
    p: Prime,
    confirm_factor: usize,
) -> Result<PeriodReport<Vec<ExtendedNat>>> {
    seqlab::detect_vector_period(&quotient_valuations(t, p), 0, confirm_factor)
}

/// `g(n) = gcd(A^{n+1}) / gcd(A^n)` for `n = 0..=horizon`.
pub fn gcd_ratio_seq(a: &IntMatrix, horizon: u64) -> Result<FiniteSeq> {
    require_square(a)?;
    require_not_nilpotent(a)?;
    let gcds: Vec<BigInt> = powers(a, horizon + 1)
        .par_iter()
        .map(IntMatrix::content_gcd)
        .collect();
    let ratios = gcds.windows(2).map(|w| {
        let (q, r) = w[1].div_rem(&w[0]);
        debug_assert!(r.is_zero());
        q
    });
    FiniteSeq::from_ints(0, ratios)
}

fn valuations(a: &IntMatrix, p: Prime, horizon: u64) -> Vec<u64> {
    powers(a, horizon)
        .par_iter()
        .map(|m| {
            m.valuation(p)
                .finite()
                .expect("non-nilpotent powers are nonzero")
        })
        .collect()
}

/// `ν_p(A^n)` for `n = 0..=horizon`.
pub fn valuation_seq(a: &IntMatrix, p: Prime, horizon: u64) -> Result<FiniteSeq> {
    require_square(a)?;
    require_not_nilpotent(a)?;
    FiniteSeq::from_ints(0, valuations(a, p, horizon))
}

/// `ν_p(A^n) = a·n + h(n)` over the sampled horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationDecomposition {
    pub p: Prime,
    #[serde(with = "crate::decimal::rational")]
    pub a: Rational,
    #[serde(skip)]
    pub valuations: FiniteSeq,
    #[serde(skip)]
    pub h_samples: FiniteSeq,
    pub h_report: PeriodReport,
    /// Detection on the first differences of `h`.
    pub diff_report: PeriodReport,
}

impl ValuationDecomposition {
    /// `h` is bounded on the window: it is eventually periodic and every value
    /// past the threshold lies within the range of one period block.
    pub fn h_bounded(&self) -> bool {
        let Some(n0) = self.h_report.n0 else {
            return false;
        };
        let block = &self.h_report.block;
        let (lo, hi) = (block.iter().min(), block.iter().max());
        let tail = &self.h_samples.samples()[(n0 - self.h_samples.start()) as usize..];
        tail.iter().all(|v| Some(v) >= lo && Some(v) <= hi)
    }
}

/// Minimum valuation among the nonzero eigenvalues of `a`.
pub fn eigen_slope(a: &IntMatrix, p: Prime) -> Result<Rational> {
    let poly = ntkit::newton_polygon(&a.charpoly()?, p)?;
    poly.min_finite_slope().cloned().ok_or(Error::Nilpotent)
}

pub fn decompose_valuation(
    a: &IntMatrix,
    p: Prime,
    horizon: u64,
    confirm_factor: usize,
) -> Result<ValuationDecomposition> {
    let valuations = valuation_seq(a, p, horizon)?;
    let slope = eigen_slope(a, p)?;
    let h: Vec<Rational> = valuations
        .samples()
        .iter()
        .zip(0u64..)
        .map(|(v, n)| {
            let v = v.as_finite().expect("finite valuation");
            v - &slope * Rational::from_integer(BigInt::from(n))
        })
        .collect();
    let h_samples = FiniteSeq::from_rationals(0, h)?;
    let h_report = seqlab::detect_period(&h_samples, confirm_factor)?;
    let diff_report = seqlab::detect_period(&h_samples.first_differences()?, confirm_factor)?;
    Ok(ValuationDecomposition {
        p,
        a: slope,
        valuations,
        h_samples,
        h_report,
        diff_report,
    })
}

/// Primes that can divide a nonzero invariant factor of some power of `a`.
///
/// For invertible `a` these are the primes of `det a`. A singular matrix can
/// have `γ_rank(a)` unrelated to its later powers (`[[2, 1], [0, 0]]` has
/// `γ_1 = 1` but `A^2 = 2A`), so the set is the union of the primes of
/// `γ_rank(A^n)` for `n ≤ size` and of the lowest nonzero coefficient of the
/// characteristic polynomial.
pub fn relevant_primes(a: &IntMatrix) -> Result<Vec<Prime>> {
    require_square(a)?;
    let mut found = BTreeSet::new();
    let mut power = a.clone();
    for _ in 0..a.rows() {
        let top = determinantal_divisors(&power).top_nonzero().clone();
        found.extend(ntkit::prime_divisors(&top)?);
        power = power.mul(a)?;
    }
    if let Some(low) = a.charpoly()?.iter().find(|c| !c.is_zero()) {
        found.extend(ntkit::prime_divisors(low)?);
    }
    Ok(found.into_iter().collect())
}

/// Per-prime section of a [`TraceReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeSection {
    pub p: Prime,
    #[serde(with = "crate::decimal::rational")]
    pub a: Rational,
    pub h_period: PeriodReport,
    /// Period of `ν_p(D_n)`.
    pub d_period: PeriodReport<Vec<ExtendedNat>>,
    #[serde(skip)]
    pub valuations: Vec<SeqValue>,
}

/// The full report behind the `trace` subcommand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub matrix: IntMatrix,
    pub horizon: u64,
    #[serde(with = "crate::decimal::nested")]
    pub smith: Vec<Vec<BigInt>>,
    #[serde(rename = "D", with = "crate::decimal::nested")]
    pub d: Vec<Vec<BigInt>>,
    pub period: PeriodReport<Diag>,
    /// Empty for nilpotent input, where valuations are undefined.
    pub per_prime: Vec<PrimeSection>,
}

/// Trace, combined period and per-prime analyses. `primes = None` selects
/// [`relevant_primes`].
pub fn trace_report(
    a: &IntMatrix,
    horizon: u64,
    primes: Option<&[Prime]>,
    confirm_factor: usize,
) -> Result<TraceReport> {
    let trace = trace_powers(a, horizon)?;
    let period = detect_dn_periodicity(&trace, confirm_factor)?;
    let primes = match primes {
        Some(list) => list.to_vec(),
        None => relevant_primes(a)?,
    };
    let per_prime = if a.is_nilpotent()? {
        Vec::new()
    } else {
        primes
            .par_iter()
            .map(|&p| {
                let dec = decompose_valuation(a, p, horizon, confirm_factor)?;
                Ok(PrimeSection {
                    p,
                    a: dec.a,
                    h_period: dec.h_report,
                    d_period: detect_prime_periodicity(&trace, p, confirm_factor)?,
                    valuations: dec.valuations.samples().to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(TraceReport {
        matrix: a.clone(),
        horizon,
        smith: trace.smith.iter().map(|s| s.diag().to_vec()).collect(),
        d: trace.quotients,
        period,
        per_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqlab::PeriodStatus;

    fn m(rows: Vec<Vec<i64>>) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn identity_trace() {
        let t = trace_powers(&IntMatrix::identity(3), 5).unwrap();
        assert!(t.smith_seq().iter().all(|s| s.diag() == ints(&[1, 1, 1])));
        assert!(t.d_seq().iter().all(|d| d == &ints(&[1, 1, 1])));
        assert_eq!(t.smith_seq().len(), 6);
        assert_eq!(t.d_seq().len(), 5);
    }

    #[test]
    fn jordan_three_quotient() {
        let t = trace_powers(&m(vec![vec![3, 1], vec![0, 3]]), 6).unwrap();
        assert_eq!(t.smith_seq()[3].diag(), ints(&[27, 27]));
        assert_eq!(t.smith_seq()[4].diag(), ints(&[27, 243]));
        assert_eq!(t.d_seq()[3], ints(&[1, 9]));
    }

    #[test]
    fn reconstruction_invariant() {
        let a = m(vec![vec![2, 1, 0], vec![0, 6, 3], vec![4, 0, 0]]);
        let t = trace_powers(&a, 12).unwrap();
        for n in 0..12 {
            let (s, next, d) = (&t.smith_seq()[n], &t.smith_seq()[n + 1], &t.d_seq()[n]);
            for ((di, si), ti) in d.iter().zip(s.diag()).zip(next.diag()) {
                assert!(di >= &BigInt::zero());
                if !si.is_zero() {
                    assert_eq!(&(di * si), ti);
                }
            }
        }
    }

    #[test]
    fn nilpotent_trace_ends_in_zero() {
        let a = m(vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
        let t = trace_powers(&a, 6).unwrap();
        assert_eq!(t.smith_seq()[1].diag(), ints(&[1, 1, 0]));
        assert_eq!(t.smith_seq()[3].diag(), ints(&[0, 0, 0]));
        assert!(t.d_seq()[3..].iter().all(|d| d.iter().all(Zero::is_zero)));
        assert_eq!(gcd_ratio_seq(&a, 5), Err(Error::Nilpotent));
        assert_eq!(valuation_seq(&a, prime(2), 5), Err(Error::Nilpotent));
    }

    #[test]
    fn horizon_and_shape_checks() {
        assert!(matches!(
            trace_powers(&IntMatrix::identity(2), 1),
            Err(Error::InvalidArgument(msg)) if msg.contains("horizon too small")
        ));
        assert!(matches!(
            trace_powers(&IntMatrix::zeros(2, 3), 4),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn jordan_two_period() {
        let t = trace_powers(&m(vec![vec![2, 1], vec![0, 2]]), 40).unwrap();
        let r = detect_dn_periodicity(&t, 3).unwrap();
        assert_eq!(r.period, Some(2));
        assert_eq!(r.status, PeriodStatus::ConfirmedWindow);
    }

    #[test]
    fn diagonal_constant_quotient() {
        let t = trace_powers(&m(vec![vec![2, 0], vec![0, 6]]), 20).unwrap();
        let r = detect_dn_periodicity(&t, 3).unwrap();
        assert_eq!(r.pair(), Some((0, 1)));
        assert_eq!(r.block, vec![Diag(ints(&[2, 6]))]);
    }

    #[test]
    fn bruner_m4_period() {
        let a = crate::gen::bruner_counterexample(4).unwrap().matrix;
        let t = trace_powers(&a, 60).unwrap();
        assert_eq!(t.smith_seq()[5].diag(), ints(&[32, 256, 65536, 65536]));
        let r = detect_dn_periodicity(&t, 3).unwrap();
        assert_eq!(r.pair(), Some((3, 3)));
    }

    #[test]
    fn gcd_ratios() {
        let g = gcd_ratio_seq(&m(vec![vec![3, 1], vec![0, 3]]), 20).unwrap();
        for n in 0..=20u64 {
            let expected = if (n + 1) % 3 == 0 {
                9
            } else if n % 3 == 0 {
                1
            } else {
                3
            };
            assert_eq!(g.get(n), Some(&SeqValue::int(expected)), "n={n}");
        }
        let twice = gcd_ratio_seq(&IntMatrix::diagonal(ints(&[2, 2])), 6).unwrap();
        assert!(twice.samples().iter().all(|v| v == &SeqValue::int(2)));
        let b = crate::gen::bruner_counterexample(4).unwrap().matrix;
        assert_eq!(
            gcd_ratio_seq(&b, 6).unwrap().get(2),
            Some(&SeqValue::int(8))
        );
    }

    #[test]
    fn jordan_valuations() {
        let v = valuation_seq(&m(vec![vec![2, 1], vec![0, 2]]), prime(2), 30).unwrap();
        assert_eq!(v.get(0), Some(&SeqValue::int(0)));
        for n in 1..=30u64 {
            let expected = n as i64 - 1 + (n % 2 == 0) as i64;
            assert_eq!(v.get(n), Some(&SeqValue::int(expected)), "n={n}");
        }
    }

    #[test]
    fn coprime_diagonal_valuations() {
        let v = valuation_seq(&IntMatrix::diagonal(ints(&[2, 3])), prime(2), 10).unwrap();
        assert!(v.samples().iter().all(|x| x == &SeqValue::int(0)));
    }

    #[test]
    fn decompositions() {
        let d = decompose_valuation(&m(vec![vec![2, 1], vec![0, 2]]), prime(2), 40, 3).unwrap();
        assert_eq!(d.a, q(1, 1));
        assert_eq!(d.h_report.period, Some(2));
        assert_eq!(d.h_report.n0, Some(0));
        assert!(d.h_bounded());
        for n in 1..=40u64 {
            let expected = -1 + (n % 2 == 0) as i64;
            assert_eq!(d.h_samples.get(n), Some(&SeqValue::int(expected)));
        }

        let d = decompose_valuation(&IntMatrix::diagonal(ints(&[2, 3])), prime(2), 20, 3).unwrap();
        assert_eq!(d.a, q(0, 1));
        assert_eq!(d.h_report.pair(), Some((0, 1)));

        let u = m(vec![vec![2, 1], vec![1, 1]]);
        let d = decompose_valuation(&u, prime(5), 20, 3).unwrap();
        assert_eq!(d.a, q(0, 1));
        assert!(d.h_samples.samples().iter().all(|x| x == &SeqValue::int(0)));
    }

    #[test]
    fn fractional_slope() {
        // eigenvalues ±√2 have 2-adic valuation 1/2
        let d = decompose_valuation(&m(vec![vec![0, 2], vec![1, 0]]), prime(2), 40, 3).unwrap();
        assert_eq!(d.a, q(1, 2));
        assert!(d.h_bounded());
        assert_eq!(d.h_report.period, Some(2));
    }

    #[test]
    fn primes_of_singular_matrix() {
        let a = m(vec![vec![2, 1], vec![0, 0]]);
        assert_eq!(relevant_primes(&a).unwrap(), vec![prime(2)]);
        let b = m(vec![vec![6, 0], vec![0, 35]]);
        assert_eq!(
            relevant_primes(&b).unwrap(),
            vec![prime(2), prime(3), prime(5), prime(7)]
        );
        assert!(relevant_primes(&IntMatrix::identity(3)).unwrap().is_empty());
    }

    #[test]
    fn period_is_lcm_of_prime_periods() {
        let a = m(vec![vec![2, 1, 0], vec![0, 2, 0], vec![0, 0, 3]])
            .direct_sum(&m(vec![vec![3, 1], vec![0, 3]]));
        let t = trace_powers(&a, 60).unwrap();
        let whole = detect_dn_periodicity(&t, 3).unwrap();
        let mut lcm = 1u64;
        for p in relevant_primes(&a).unwrap() {
            lcm = lcm.lcm(&detect_prime_periodicity(&t, p, 3).unwrap().period.unwrap());
        }
        assert_eq!(whole.period, Some(lcm));
        assert_eq!(lcm, 6);
    }

    #[test]
    fn report_json_shape() {
        let a = m(vec![vec![2, 1], vec![0, 2]]);
        let r = trace_report(&a, 12, None, 3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["horizon"], 12);
        assert_eq!(v["smith"][1], serde_json::json!(["1", "4"]));
        assert_eq!(v["D"][0], serde_json::json!(["1", "4"]));
        assert_eq!(v["period"]["T"], 2);
        assert_eq!(v["per_prime"][0]["p"], 2);
        assert_eq!(v["per_prime"][0]["a"], "1");
        assert_eq!(v["per_prime"][0]["h_period"]["T"], 2);
    }

    #[test]
    fn nilpotent_report_has_no_prime_sections() {
        let a = m(vec![vec![0, 2], vec![0, 0]]);
        let r = trace_report(&a, 6, None, 3).unwrap();
        assert!(r.per_prime.is_empty());
    }
}
