//! Acceptance suites, shared by the `acceptance` test target and the CLI
//! `selftest` command. Every check is exact; random instances are seeded so a
//! run is reproducible.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::gen;
use crate::ntkit::{self, PolyProbe, Prime};
use crate::powertrace::{self, PowerTrace};
use crate::seqlab::{self, Combinator, FiniteSeq, PeriodStatus};
use crate::smith::{self, SmithForm};
use crate::Rational;

const CONFIRM: usize = 3;
const ENTRY_BOUND: u64 = 9;

/// Suite names with the criterion number each one establishes.
pub const SUITES: [(&str, u8); 10] = [
    ("jordan", 1),
    ("bruner", 2),
    ("divisors", 3),
    ("compound", 4),
    ("localization", 5),
    ("periodicity", 6),
    ("slope", 7),
    ("kummer", 8),
    ("probe", 9),
    ("seqalg", 10),
];

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub criterion: u8,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl SuiteOutcome {
    /// One-line summary, e.g. `[PASS] 8 kummer (0.42s): …`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|(name, _)| *name)
}

pub fn run_suite(name: &str) -> Result<SuiteOutcome> {
    let &(name, criterion) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name:?}")))?;
    let started = Instant::now();
    let result = match name {
        "jordan" => jordan(),
        "bruner" => bruner(),
        "divisors" => divisors(),
        "compound" => compound(),
        "localization" => localization(),
        "periodicity" => periodicity(),
        "slope" => slope(),
        "kummer" => kummer(),
        "probe" => probe(),
        "seqalg" => seqalg(),
        _ => unreachable!(),
    };
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Ok(SuiteOutcome {
        name,
        criterion,
        passed,
        detail,
        elapsed: started.elapsed(),
    })
}

pub fn run_all() -> Vec<SuiteOutcome> {
    suite_names()
        .map(|n| run_suite(n).expect("listed suite"))
        .collect()
}

fn prime(p: u64) -> Prime {
    Prime::new(p).expect("small prime")
}

// Random pools

/// 200 square matrices, sizes cycling through 1..=5.
fn divisor_pool() -> Vec<IntMatrix> {
    (0..200u64)
        .map(|i| gen::random_instance(1 + (i % 5) as usize, ENTRY_BOUND, 1000 + i).expect("valid"))
        .collect()
}

fn compound_pool() -> Vec<IntMatrix> {
    (0..50u64)
        .map(|i| gen::random_instance(4, ENTRY_BOUND, 5000 + i).expect("valid"))
        .collect()
}

/// 30 non-nilpotent 3×3 and 30 non-nilpotent 4×4 matrices.
pub fn periodicity_pool() -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for (size, base) in [(3usize, 9000u64), (4, 19000)] {
        let mut seed = base;
        for _ in 0..30 {
            let (a, used) = gen::random_non_nilpotent(size, ENTRY_BOUND, seed).expect("valid");
            out.push(a);
            seed = used + 1;
        }
    }
    out
}

// Jordan example

fn jordan() -> Check {
    for p in [2u64, 3, 5] {
        let inst = gen::jordan_example(prime(p), 0);
        let trace = lift(powertrace::trace_powers(&inst.matrix, 60))?;
        for n in 0..=60u64 {
            let got = trace.smith_seq()[n as usize].diag();
            ensure!(
                got == inst.oracle(n).as_slice(),
                "p={p} n={n}: SNF {got:?} differs from the closed form"
            );
        }
        let report = lift(powertrace::detect_dn_periodicity(&trace, CONFIRM))?;
        ensure!(
            report.period == Some(p) && report.status == PeriodStatus::ConfirmedWindow,
            "p={p}: detected {:?}, expected T={p}",
            report.pair()
        );
    }
    Ok("p ∈ {2,3,5}, n ≤ 60: closed form exact, T = p".into())
}

// Counterexample family

fn bruner() -> Check {
    for m in 3..=5usize {
        let inst = lift(gen::bruner_counterexample(m))?;
        let horizon = 20 * (m as u64 - 1);
        let trace = lift(powertrace::trace_powers(&inst.matrix, horizon))?;
        for n in 0..=horizon {
            let got = trace.smith_seq()[n as usize].diag();
            ensure!(
                got == inst.oracle(n).as_slice(),
                "m={m} n={n}: invariant factors {got:?} differ from the multiset rule"
            );
        }
        let report = lift(powertrace::detect_dn_periodicity(&trace, CONFIRM))?;
        let expected = (m as u64 - 1, m as u64 - 1);
        ensure!(
            report.pair() == Some(expected),
            "m={m}: detected {:?}, expected {expected:?}",
            report.pair()
        );
        let d = trace.d_seq();
        for t in 1..=2 * (m - 1) {
            ensure!(
                (0..m - 1).any(|n| d[n + t] != d[n]),
                "m={m}: D_n is periodic from n = 0 with period {t}"
            );
        }
    }
    Ok("m ∈ {3,4,5}: multiset rule exact, (n0, T) = (m−1, m−1), no period from 0".into())
}

// Smith form from determinantal divisors

fn divisors() -> Check {
    let pool = divisor_pool();
    let failures: Vec<usize> = pool
        .par_iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let direct = smith::smith_form(a, false);
            let via = smith::snf_from_divisors(&smith::determinantal_divisors(a));
            (via.as_ref() != Ok(&direct)).then_some(i)
        })
        .collect();
    ensure!(
        failures.is_empty(),
        "divisor route disagrees on matrices {failures:?}"
    );
    Ok(format!(
        "{} matrices, sizes 1..=5, |entries| ≤ {ENTRY_BOUND}",
        pool.len()
    ))
}

// Compound of powers

fn compound() -> Check {
    let pool = compound_pool();
    let failures: Vec<String> = pool
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, a)| {
            (1..=3usize).flat_map(move |r| {
                let c = a.compound(r).expect("order in range");
                (0..=6u64).filter_map(move |n| {
                    let lhs = a.pow(n).and_then(|p| p.compound(r));
                    let rhs = c.pow(n);
                    (lhs != rhs).then(|| format!("matrix {i}, r={r}, n={n}"))
                })
            })
        })
        .collect();
    ensure!(
        failures.is_empty(),
        "C_r(A^n) ≠ C_r(A)^n at {}",
        failures.join("; ")
    );
    Ok(format!("{} 4×4 matrices, r ∈ {{1,2,3}}, n ≤ 6", pool.len()))
}

// Localization

/// Product of the localized forms over the primes of `γ_rank`, or the all-ones
/// form when there are none.
fn product_of_local_forms(a: &IntMatrix) -> Result<SmithForm> {
    let divisors = smith::determinantal_divisors(a);
    let primes = ntkit::prime_divisors(divisors.top_nonzero())?;
    if primes.is_empty() {
        let size = divisors.gamma.len() - 1;
        let rank = divisors
            .gamma
            .iter()
            .skip(1)
            .take_while(|g| !g.is_zero())
            .count();
        let diag = (0..size)
            .map(|i| {
                if i < rank {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            })
            .collect();
        return SmithForm::from_diag(diag);
    }
    let parts: Vec<(Prime, SmithForm)> = primes
        .into_iter()
        .map(|p| (p, smith::local_smith(a, p)))
        .collect();
    smith::reconstruct_global(&parts)
}

fn localization() -> Check {
    let pool = divisor_pool();
    let failures: Vec<usize> = pool
        .par_iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let global = smith::smith_form(a, false);
            (product_of_local_forms(a).as_ref() != Ok(&global)).then_some(i)
        })
        .collect();
    ensure!(
        failures.is_empty(),
        "product of local forms differs on matrices {failures:?}"
    );
    Ok(format!(
        "{} matrices reassembled from their local forms",
        pool.len()
    ))
}

// Random powers

/// Trace at the given horizon, doubled once if the quotients are not yet
/// confirmed periodic.
fn confirmed_trace(a: &IntMatrix, horizon: u64) -> Result<PowerTrace> {
    let trace = powertrace::trace_powers(a, horizon)?;
    if powertrace::detect_dn_periodicity(&trace, CONFIRM)?.is_found() {
        return Ok(trace);
    }
    powertrace::trace_powers(a, 2 * horizon)
}

/// The period of `D_n` is the lcm of the periods of its `p`-parts.
fn lcm_of_prime_periods(a: &IntMatrix, trace: &PowerTrace) -> Result<Option<u64>> {
    let mut lcm = 1u64;
    for p in powertrace::relevant_primes(a)? {
        match powertrace::detect_prime_periodicity(trace, p, CONFIRM)?.period {
            Some(t) => lcm = lcm.lcm(&t),
            None => return Ok(None),
        }
    }
    Ok(Some(lcm))
}

/// Horizon used, detected period and lcm of the `p`-part periods.
type PeriodRun = (u64, Option<u64>, Option<u64>);

fn periodicity() -> Check {
    let pool = periodicity_pool();
    let results: Vec<Result<PeriodRun>> = pool
        .par_iter()
        .map(|a| {
            let trace = confirmed_trace(a, 200)?;
            let period = powertrace::detect_dn_periodicity(&trace, CONFIRM)?.period;
            Ok((trace.horizon(), period, lcm_of_prime_periods(a, &trace)?))
        })
        .collect();
    let mut doubled = 0;
    let mut max_period = 0;
    for (i, r) in results.into_iter().enumerate() {
        let (horizon, period, lcm) = lift(r)?;
        doubled += (horizon > 200) as usize;
        let Some(t) = period else {
            return Err(format!(
                "instance {i}: no confirmed period at horizon {horizon}"
            ));
        };
        ensure!(
            lcm == Some(t),
            "instance {i}: period {t} but the p-part periods give lcm {lcm:?}"
        );
        max_period = max_period.max(t);
    }
    Ok(format!(
        "{} matrices (3×3 and 4×4) confirmed, {doubled} needed horizon 400, \
         largest T = {max_period}, T = lcm of p-part periods",
        pool.len()
    ))
}

fn slope() -> Check {
    let pool = periodicity_pool();
    let results: Vec<std::result::Result<usize, String>> = pool
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let primes = lift(powertrace::relevant_primes(a))?;
            for &p in &primes {
                let mut dec = lift(powertrace::decompose_valuation(a, p, 200, CONFIRM))?;
                if !dec.diff_report.is_found() {
                    dec = lift(powertrace::decompose_valuation(a, p, 400, CONFIRM))?;
                }
                ensure!(
                    dec.diff_report.is_found(),
                    "instance {i}, p={p}: differences of h are not confirmed periodic"
                );
                ensure!(dec.h_bounded(), "instance {i}, p={p}: h is not bounded");
            }
            Ok(primes.len())
        })
        .collect();
    let mut checked = 0;
    for r in results {
        checked += r?;
    }
    Ok(format!(
        "{} matrices, {checked} (matrix, prime) pairs: h bounded, Δh periodic",
        pool.len()
    ))
}

// Kummer

fn kummer() -> Check {
    let mut count = 0;
    for p in [2u64, 3, 5] {
        let pr = prime(p);
        for l in 0..=6u32 {
            let n = p.pow(l);
            let nb = BigInt::from(n);
            let mut binom = BigInt::one();
            for k in 1..=n {
                binom = binom * (&nb - k + 1u32) / k;
                let carries = lift(ntkit::binom_valuation(n, k, pr))?;
                let closed = l - ntkit::u64_valuation(k, pr);
                let exact = ntkit::int_valuation(&binom, pr).finite().expect("nonzero");
                ensure!(
                    carries == closed && u64::from(carries) == exact,
                    "p={p} L={l} k={k}: carries {carries}, closed form {closed}, exact {exact}"
                );
                count += 1;
            }
        }
    }
    Ok(format!("{count} binomials C(p^L, k), p ∈ {{2,3,5}}, L ≤ 6"))
}

// Polynomial probes

fn random_probe_poly(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    loop {
        let degree = rng.gen_range(0..=4usize);
        let coeffs: Vec<Rational> = (0..=degree)
            .map(|_| {
                let num: i64 = rng.gen_range(-20..=20);
                let den: i64 = rng.gen_range(1..=20);
                Rational::new(num.into(), den.into())
            })
            .collect();
        if coeffs.iter().any(|c| !c.is_zero()) {
            return coeffs;
        }
    }
}

fn probe() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4141);
    let polys: Vec<Vec<Rational>> = (0..20).map(|_| random_probe_poly(&mut rng)).collect();
    let thresholds = [
        Rational::zero(),
        Rational::one(),
        Rational::new(3.into(), 2.into()),
    ];
    let mut max_bound = 0;
    for (i, coeffs) in polys.iter().enumerate() {
        for c in &thresholds {
            for p in [2u64, 3] {
                let probe = lift(PolyProbe::new(coeffs.clone(), c.clone(), prime(p)))?;
                let d = probe.exponent_bound();
                let bound = p.pow(d as u32);
                max_bound = max_bound.max(bound);
                let (_, report) = lift(ntkit::poly_probe_seq(&probe, 4 * bound, CONFIRM))?;
                let Some(t) = report.period else {
                    return Err(format!("poly {i}, c={c}, p={p}: no period within 4·p^{d}"));
                };
                ensure!(
                    bound % t == 0,
                    "poly {i}, c={c}, p={p}: period {t} does not divide p^{d} = {bound}"
                );
            }
        }
    }
    Ok(format!(
        "{} polynomials × 3 thresholds × 2 primes, largest p^D = {max_bound}",
        polys.len()
    ))
}

// Sequence algebra

const SEQ_LEN: usize = 240;

/// `prefix` followed by `block` repeated; returns the values and the period.
fn random_periodic(rng: &mut ChaCha8Rng, nonzero: bool) -> (Vec<i64>, u64) {
    let period = rng.gen_range(1..=6usize);
    let prefix = rng.gen_range(0..=5usize);
    let draw = |rng: &mut ChaCha8Rng| loop {
        let v: i64 = rng.gen_range(-6..=6);
        if !(nonzero && v == 0) {
            return v;
        }
    };
    let head: Vec<i64> = (0..prefix).map(|_| draw(rng)).collect();
    let block: Vec<i64> = (0..period).map(|_| draw(rng)).collect();
    let values = head
        .into_iter()
        .chain(block.into_iter().cycle())
        .take(SEQ_LEN)
        .collect();
    (values, period as u64)
}

fn closure_case(rng: &mut ChaCha8Rng, op: Combinator) -> std::result::Result<(), String> {
    let arity = if op == Combinator::Quotient {
        2
    } else {
        rng.gen_range(1..=3)
    };
    let mut seqs = Vec::new();
    let mut lcm = 1u64;
    for i in 0..arity {
        let (values, t) = random_periodic(rng, op == Combinator::Quotient && i == 1);
        lcm = lcm.lcm(&t);
        seqs.push(lift(FiniteSeq::from_ints(0, values))?);
    }
    let combined = lift(seqlab::combine(&seqs, op))?;
    let report = lift(seqlab::detect_period(&combined, CONFIRM))?;
    let t = report
        .period
        .ok_or_else(|| format!("{op:?}: combined sequence not periodic (lcm {lcm})"))?;
    ensure!(
        lcm.is_multiple_of(t),
        "{op:?}: period {t} does not divide lcm {lcm}"
    );
    Ok(())
}

/// `slope·n + periodic`, so the first differences are eventually periodic.
fn random_difference_periodic(rng: &mut ChaCha8Rng) -> FiniteSeq {
    let slope: i64 = rng.gen_range(-3..=3);
    let (wobble, _) = random_periodic(rng, false);
    let values = wobble.iter().zip(0i64..).map(|(w, n)| slope * n + w);
    FiniteSeq::from_ints(0, values).expect("nonempty")
}

fn seqalg() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ops = [
        Combinator::Sum,
        Combinator::Product,
        Combinator::Min,
        Combinator::Quotient,
    ];
    for op in ops {
        for case in 0..100 {
            closure_case(&mut rng, op).map_err(|e| format!("case {case}: {e}"))?;
        }
    }
    for case in 0..100 {
        let arity = rng.gen_range(1..=3);
        let seqs: Vec<FiniteSeq> = (0..arity)
            .map(|_| random_difference_periodic(&mut rng))
            .collect();
        let (_, report) = lift(seqlab::min_of_difference_periodic(&seqs, CONFIRM))?;
        ensure!(
            report.is_found(),
            "case {case}: min of difference-periodic inputs lost periodic differences"
        );
    }
    Ok(
        "100 cases each for sum, product, min, quotient and min of difference-periodic inputs"
            .into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn suites_are_unique() {
        let mut names: Vec<_> = suite_names().collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
    }

    #[test]
    fn empty_prime_set_gives_units() {
        let a = IntMatrix::from_rows(vec![vec![1, 2], vec![2, 4]]).unwrap();
        let f = product_of_local_forms(&a).unwrap();
        assert_eq!(f.diag(), [BigInt::one(), BigInt::zero()]);
    }

    #[test]
    fn outcome_line_format() {
        let o = SuiteOutcome {
            name: "kummer",
            criterion: 8,
            passed: true,
            detail: "ok".into(),
            elapsed: Duration::from_millis(1500),
        };
        assert_eq!(o.line(), "[PASS] 8 kummer (1.50s): ok");
    }

    #[test]
    fn pools_are_deterministic() {
        assert_eq!(divisor_pool(), divisor_pool());
        let pool = periodicity_pool();
        assert_eq!(pool.len(), 60);
        assert!(pool.iter().all(|a| !a.is_nilpotent().unwrap()));
    }

    #[test]
    fn sequence_generator_keeps_divisors_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (v, t) = random_periodic(&mut rng, true);
            assert!(v.iter().all(|&x| x != 0));
            assert!((1..=6).contains(&t));
        }
    }
}
