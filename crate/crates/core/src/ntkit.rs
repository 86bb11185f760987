//! Number-theoretic helpers: primes and factoring, scalar p-adic valuations,
//! Newton polygons, Kummer's carry count, the constant bounding
//! `ν_p(k) − k/e`, rational-polynomial valuation probes and Fermat-type
//! period candidates.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactmat::ExtendedNat;
use crate::seqlab::{self, FiniteSeq, PeriodReport, SeqValue};
use crate::Rational;

/// A rational prime, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller–Rabin; the first twelve prime bases are exact for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin with the fixed bases 2..37. Exact below 3.3·10^24; above that
/// a composite passing all twelve bases is not known to exist.
fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard–Brent rho with a fixed sequence of polynomial constants; returns a
/// nontrivial factor of the odd composite `n`.
fn pollard_brent(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..(128.min(r - k)) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += 128;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
    }
    unreachable!("rho loop runs until a factor is found")
}

/// `(r, k)` with `r^k = n` and `k ≥ 2` maximal, if any.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    (2..=bits).rev().find_map(|k| {
        let r = n.nth_root(k);
        (r > BigUint::one() && num_traits::pow(r.clone(), k as usize) == *n).then_some((r, k))
    })
}

fn factor_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    // rho needs about sqrt(q) steps to find q as a repeated factor; roots are cheap
    if let Some((root, k)) = perfect_power(&n) {
        let mut parts = Vec::new();
        factor_into(root, &mut parts);
        for _ in 0..k {
            out.extend(parts.iter().cloned());
        }
        return;
    }
    let d = pollard_brent(&n);
    let rest = &n / &d;
    factor_into(d, out);
    factor_into(rest, out);
}

/// Prime factorization of `|n|` as `(prime, exponent)` pairs in increasing
/// order. Trial division up to 10^6, then Miller–Rabin and Pollard–Brent rho
/// on the cofactor. Returns an empty list for 0 and ±1.
pub fn factorize(n: &BigInt) -> Vec<(BigUint, u32)> {
    let mut rest = n.magnitude().clone();
    let mut factors: Vec<BigUint> = Vec::new();
    if rest.is_zero() {
        return Vec::new();
    }
    let mut d = 2u32;
    while d <= 1_000_000 {
        let dd = BigUint::from(d);
        if &dd * &dd > rest {
            break;
        }
        while (&rest % d).is_zero() {
            rest /= d;
            factors.push(dd.clone());
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let mut big = Vec::new();
        factor_into(rest, &mut big);
        factors.extend(big);
    }
    factors.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for f in factors {
        match out.last_mut() {
            Some((q, e)) if *q == f => *e += 1,
            _ => out.push((f, 1)),
        }
    }
    out
}

/// Distinct primes dividing `n`, each of which must fit in 64 bits.
pub fn prime_divisors(n: &BigInt) -> Result<Vec<Prime>> {
    factorize(n)
        .into_iter()
        .map(|(q, _)| {
            let v = q.to_u64().ok_or_else(|| {
                Error::InvalidArgument(format!("prime factor {q} does not fit in 64 bits"))
            })?;
            Prime::new(v)
        })
        .collect()
}

/// `ν_p(x)`; `+∞` for zero. Sign is ignored.
pub fn int_valuation(x: &BigInt, p: Prime) -> ExtendedNat {
    if x.is_zero() {
        return ExtendedNat::Infinity;
    }
    if p.0 == 2 {
        return ExtendedNat::Finite(x.trailing_zeros().unwrap_or(0));
    }
    let mut m = x.magnitude().clone();
    let pb = BigUint::from(p.0);
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return ExtendedNat::Finite(v);
        }
        m = q;
        v += 1;
    }
}

/// `ν_p(k)` for a positive machine integer.
pub fn u64_valuation(mut k: u64, p: Prime) -> u32 {
    assert!(k > 0, "valuation of zero");
    let mut v = 0;
    while k.is_multiple_of(p.0) {
        k /= p.0;
        v += 1;
    }
    v
}

/// `ν_p(a/b) = ν_p(a) − ν_p(b)`; `None` stands for `+∞` (the zero rational).
pub fn rat_valuation(x: &Rational, p: Prime) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let num = int_valuation(x.numer(), p).finite()?;
    let den = int_valuation(x.denom(), p).finite()?;
    Some(num as i64 - den as i64)
}

/// One edge of a Newton polygon: `multiplicity` roots of valuation `valuation`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonSlope {
    #[serde(with = "crate::decimal::rational")]
    pub valuation: Rational,
    pub multiplicity: usize,
}

/// Lower convex hull of `{(i, ν_p(c_i))}` for a polynomial `Σ c_i x^i`.
///
/// `slopes` holds the negated edge slopes from left to right, which are the
/// p-adic valuations of the roots; roots at zero (vanishing low coefficients)
/// are counted separately in `zero_roots`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    pub p: Prime,
    pub points: Vec<(usize, u64)>,
    pub slopes: Vec<NewtonSlope>,
    pub zero_roots: usize,
}

impl NewtonPolygon {
    pub fn min_finite_slope(&self) -> Option<&Rational> {
        self.slopes.iter().map(|s| &s.valuation).min()
    }

    pub fn degree(&self) -> usize {
        self.zero_roots + self.slopes.iter().map(|s| s.multiplicity).sum::<usize>()
    }
}

pub fn newton_polygon(coeffs: &[BigInt], p: Prime) -> Result<NewtonPolygon> {
    let top = coeffs
        .iter()
        .rposition(|c| !c.is_zero())
        .ok_or(Error::ZeroPolynomial)?;
    let low = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let points: Vec<(usize, u64)> = coeffs[..=top]
        .iter()
        .enumerate()
        .filter_map(|(i, c)| int_valuation(c, p).finite().map(|v| (i, v)))
        .collect();

    // Monotone chain; collinear interior points are dropped.
    let mut hull: Vec<(usize, u64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as i128 - a.0 as i128) * (pt.1 as i128 - a.1 as i128)
                - (b.1 as i128 - a.1 as i128) * (pt.0 as i128 - a.0 as i128);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let slopes = hull
        .windows(2)
        .map(|w| {
            let run = (w[1].0 - w[0].0) as i64;
            let rise = w[1].1 as i64 - w[0].1 as i64;
            NewtonSlope {
                valuation: Rational::new(BigInt::from(-rise), BigInt::from(run)),
                multiplicity: run as usize,
            }
        })
        .collect();

    Ok(NewtonPolygon {
        p,
        points,
        slopes,
        zero_roots: low,
    })
}

/// `ν_p(C(n, k))` as the number of carries when adding `k` and `n − k` in base `p`.
pub fn binom_valuation(n: u64, k: u64, p: Prime) -> Result<u32> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    let (mut a, mut b) = (k, n - k);
    let mut carry = 0u64;
    let mut carries = 0;
    while a > 0 || b > 0 || carry > 0 {
        let digit_sum = a % p.0 + b % p.0 + carry;
        carry = u64::from(digit_sum >= p.0);
        carries += carry as u32;
        a /= p.0;
        b /= p.0;
    }
    Ok(carries)
}

/// Exact `max_{k ≥ 1} (ν_p(k) − k/e)`.
///
/// Scans `k` in base-`p` digit bands `[p^d, p^{d+1})`. Inside band `d` the
/// quantity is at most `d − p^d/e`, and that bound is nonincreasing in `d` once
/// `p^d (p − 1) ≥ e`, so the scan stops at the first such band whose bound is
/// already below the running maximum.
pub fn valuation_excess_max(e: u64, p: Prime) -> Result<Rational> {
    if e == 0 {
        return Err(Error::InvalidArgument(
            "ramification index must be ≥ 1".into(),
        ));
    }
    let eb = BigInt::from(e);
    let pb = BigInt::from(p.0);
    let mut best: Option<Rational> = None;
    let mut lo = BigInt::one();
    for d in 0u64.. {
        let hi = &lo * &pb;
        let bound = Rational::from_integer(BigInt::from(d)) - Rational::new(lo.clone(), eb.clone());
        if let Some(b) = &best {
            let decreasing = &lo * (&pb - 1) >= eb;
            if decreasing && &bound < b {
                break;
            }
        }
        let mut k = lo.clone();
        while k < hi {
            let kv = k.to_u64().ok_or_else(|| {
                Error::InvalidArgument("excess search exceeded 64-bit range".into())
            })?;
            let v = Rational::from_integer(BigInt::from(u64_valuation(kv, p)))
                - Rational::new(k.clone(), eb.clone());
            if best.as_ref().is_none_or(|b| &v > b) {
                best = Some(v);
            }
            k += 1;
        }
        lo = hi;
    }
    Ok(best.expect("band 0 always contributes k = 1"))
}

/// The constant `M = ⌈max{0, max_k (ν_p(k) − k/e)}⌉`.
pub fn m_constant(e: u64, p: Prime) -> Result<u64> {
    let hat = valuation_excess_max(e, p)?;
    if hat.is_positive() {
        Ok(hat.ceil().to_integer().to_u64().expect("small constant"))
    } else {
        Ok(0)
    }
}

/// A polynomial `q` with rational coefficients (constant term first), a
/// threshold `c` and a prime: the data of the sequence
/// `f(n) = min{0, ν_p(q(n)) − c}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyProbe {
    coeffs: Vec<Rational>,
    c: Rational,
    p: Prime,
}

impl PolyProbe {
    pub fn new(coeffs: Vec<Rational>, c: Rational, p: Prime) -> Result<Self> {
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::ZeroPolynomial);
        }
        Ok(PolyProbe { coeffs, c, p })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn threshold(&self) -> &Rational {
        &self.c
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Least positive integer clearing every denominator of `q`.
    pub fn clearing_scalar(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
    }

    /// `D = ⌈c + ν_p(θ)⌉`, floored at zero; the period of `f` divides `p^D`.
    pub fn exponent_bound(&self) -> u64 {
        let theta_val = int_valuation(&self.clearing_scalar(), self.p)
            .finite()
            .expect("clearing scalar is nonzero");
        let d = (&self.c + Rational::from_integer(BigInt::from(theta_val))).ceil();
        d.to_integer().to_u64().unwrap_or(0)
    }

    pub fn eval(&self, n: u64) -> Rational {
        let x = Rational::from_integer(BigInt::from(n));
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * &x + c)
    }

    /// `f(n) = min{0, ν_p(q(n)) − c}`; zero where `q(n) = 0`.
    pub fn value(&self, n: u64) -> Rational {
        match rat_valuation(&self.eval(n), self.p) {
            None => Rational::zero(),
            Some(v) => {
                let shifted = Rational::from_integer(BigInt::from(v)) - &self.c;
                shifted.min(Rational::zero())
            }
        }
    }
}

/// Samples `f(0..=horizon)` of a probe and runs the period detector on them.
pub fn poly_probe_seq(
    probe: &PolyProbe,
    horizon: u64,
    confirm_factor: usize,
) -> Result<(FiniteSeq, PeriodReport)> {
    let samples = (0..=horizon)
        .map(|n| SeqValue::Finite(probe.value(n)))
        .collect();
    let seq = FiniteSeq::new(0, samples)?;
    let report = seqlab::detect_period(&seq, confirm_factor)?;
    Ok((seq, report))
}

/// Sorted distinct values `(p^f − 1)·p^L` for `1 ≤ f ≤ max_f`, `0 ≤ L ≤ max_l`.
pub fn period_candidates(p: Prime, max_f: u32, max_l: u32) -> Result<Vec<u64>> {
    if max_f == 0 {
        return Err(Error::InvalidArgument("max_f must be ≥ 1".into()));
    }
    let overflow = || Error::InvalidArgument("period candidate overflows 64 bits".into());
    let mut out = Vec::new();
    for f in 1..=max_f {
        let t = p.0.checked_pow(f).ok_or_else(overflow)? - 1;
        for l in 0..=max_l {
            let pl = p.0.checked_pow(l).ok_or_else(overflow)?;
            out.push(t.checked_mul(pl).ok_or_else(overflow)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// The `p`-part `p^{ν_p(x)}` of a nonzero integer; zero stays zero.
pub fn p_part(x: &BigInt, p: Prime) -> BigInt {
    match int_valuation(x, p) {
        ExtendedNat::Infinity => BigInt::zero(),
        ExtendedNat::Finite(v) => num_traits::pow(p.to_bigint(), v as usize),
    }
}

pub(crate) fn is_positive_power_of(x: &BigInt, p: Prime) -> bool {
    x.sign() == Sign::Plus && {
        let v = int_valuation(x, p).finite().unwrap_or(0);
        num_traits::pow(p.to_bigint(), v as usize) == *x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(big(n), big(d))
    }

    fn binomial(n: u64, k: u64) -> BigInt {
        (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751));
        assert_eq!(Prime::new(9), Err(Error::NotPrime(9)));
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn factorization() {
        let f = factorize(&big(-360));
        let expect: Vec<(BigUint, u32)> = vec![
            (BigUint::from(2u32), 3),
            (BigUint::from(3u32), 2),
            (BigUint::from(5u32), 1),
        ];
        assert_eq!(f, expect);
        assert!(factorize(&big(1)).is_empty());
        assert!(factorize(&big(0)).is_empty());
        // cofactor beyond the trial-division range
        let a = BigInt::from(1_000_003u64) * BigInt::from(998_244_353u64) * BigInt::from(4u32);
        let f = factorize(&a);
        assert_eq!(
            f,
            vec![
                (BigUint::from(2u32), 2),
                (BigUint::from(1_000_003u32), 1),
                (BigUint::from(998_244_353u32), 1)
            ]
        );
        let m61 = (BigInt::one() << 61) - 1;
        let sq = &m61 * &m61 * big(3);
        assert_eq!(
            prime_divisors(&sq).unwrap(),
            vec![p(3), Prime::new((1 << 61) - 1).unwrap()]
        );
    }

    #[test]
    fn int_valuation_examples() {
        assert_eq!(int_valuation(&big(0), p(5)), ExtendedNat::Infinity);
        assert_eq!(int_valuation(&big(48), p(2)), ExtendedNat::Finite(4));
        assert_eq!(int_valuation(&big(-9), p(3)), ExtendedNat::Finite(2));
        assert_eq!(int_valuation(&big(7), p(3)), ExtendedNat::Finite(0));
    }

    #[test]
    fn rat_valuation_examples() {
        assert_eq!(rat_valuation(&rat(3, 4), p(2)), Some(-2));
        assert_eq!(rat_valuation(&rat(0, 1), p(7)), None);
        assert_eq!(rat_valuation(&rat(5, 1), p(5)), Some(1));
        assert_eq!(rat_valuation(&rat(-50, 3), p(5)), Some(2));
    }

    #[test]
    fn newton_polygon_jordan_charpoly() {
        // x^2 - 2p x + p^2 for p = 3
        let np = newton_polygon(&[big(9), big(-6), big(1)], p(3)).unwrap();
        assert_eq!(
            np.slopes,
            vec![NewtonSlope {
                valuation: rat(1, 1),
                multiplicity: 2
            }]
        );
        assert_eq!(np.zero_roots, 0);
    }

    #[test]
    fn newton_polygon_two_slopes() {
        let np = newton_polygon(&[big(6), big(-5), big(1)], p(2)).unwrap();
        let vals: Vec<Rational> = np.slopes.iter().map(|s| s.valuation.clone()).collect();
        assert_eq!(vals, vec![rat(1, 1), rat(0, 1)]);
        assert_eq!(np.min_finite_slope(), Some(&rat(0, 1)));
    }

    #[test]
    fn newton_polygon_nilpotent_and_fractional() {
        let np = newton_polygon(&[big(0), big(0), big(0), big(1)], p(2)).unwrap();
        assert!(np.slopes.is_empty());
        assert_eq!(np.zero_roots, 3);
        assert_eq!(np.min_finite_slope(), None);
        // x^3 - 256 over 2: one edge of slope 8/3
        let np = newton_polygon(&[big(-256), big(0), big(0), big(1)], p(2)).unwrap();
        assert_eq!(
            np.slopes,
            vec![NewtonSlope {
                valuation: rat(8, 3),
                multiplicity: 3
            }]
        );
        // x^2 (x - 2): zero roots peeled, one root of valuation 1
        let np = newton_polygon(&[big(0), big(0), big(-2), big(1)], p(2)).unwrap();
        assert_eq!(np.zero_roots, 2);
        assert_eq!(np.degree(), 3);
        assert_eq!(np.min_finite_slope(), Some(&rat(1, 1)));
        assert_eq!(newton_polygon(&[big(0)], p(2)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn newton_slopes_sum_to_constant_valuation() {
        let polys: Vec<Vec<i64>> = vec![
            vec![72, -30, 0, 4, 1],
            vec![0, 18, 9, 1],
            vec![-1024, 3, 0, 0, 0, 1],
            vec![250, 25, 5, 1],
        ];
        for coeffs in polys {
            let c: Vec<BigInt> = coeffs.iter().map(|&v| big(v)).collect();
            for pr in [2, 3, 5] {
                let np = newton_polygon(&c, p(pr)).unwrap();
                let total: Rational = np
                    .slopes
                    .iter()
                    .map(|s| &s.valuation * Rational::from_integer(BigInt::from(s.multiplicity)))
                    .sum();
                let low = int_valuation(&c[np.zero_roots], p(pr)).finite().unwrap();
                let lead = int_valuation(c.last().unwrap(), p(pr)).finite().unwrap();
                assert_eq!(total, Rational::from_integer(big(low as i64 - lead as i64)));
            }
        }
    }

    #[test]
    fn binom_valuation_examples() {
        assert_eq!(binom_valuation(17, 0, p(3)).unwrap(), 0);
        assert_eq!(binom_valuation(4, 2, p(2)).unwrap(), 1);
        assert!(binom_valuation(3, 4, p(2)).is_err());
    }

    #[test]
    fn kummer_matches_exact_binomials() {
        for pr in [2, 3, 5, 7] {
            for n in 0..=60u64 {
                for k in 0..=n {
                    let exact = int_valuation(&binomial(n, k), p(pr)).finite().unwrap();
                    assert_eq!(
                        binom_valuation(n, k, p(pr)).unwrap() as u64,
                        exact,
                        "C({n},{k}) p={pr}"
                    );
                }
            }
        }
    }

    #[test]
    fn m_constant_examples() {
        assert_eq!(m_constant(1, p(2)).unwrap(), 0);
        assert_eq!(valuation_excess_max(1, p(2)).unwrap(), rat(-1, 1));
        assert_eq!(m_constant(1, p(3)).unwrap(), 0);
        // e = 4, p = 2: k = 4 gives 2 - 1 = 1, nothing larger
        assert_eq!(valuation_excess_max(4, p(2)).unwrap(), rat(1, 1));
        assert_eq!(m_constant(4, p(2)).unwrap(), 1);
        assert!(m_constant(0, p(2)).is_err());
    }

    #[test]
    fn m_constant_bounds_a_long_brute_force() {
        for pr in [2, 3, 5] {
            for e in 1..=12u64 {
                let hat = valuation_excess_max(e, p(pr)).unwrap();
                let m = m_constant(e, p(pr)).unwrap();
                let mut seen_max: Option<Rational> = None;
                for k in 1..=20_000u64 {
                    let v = Rational::from_integer(big(u64_valuation(k, p(pr)) as i64))
                        - rat(k as i64, e as i64);
                    assert!(v <= Rational::from_integer(big(m as i64)));
                    if seen_max.as_ref().is_none_or(|s| &v > s) {
                        seen_max = Some(v);
                    }
                }
                assert_eq!(seen_max.unwrap(), hat, "p={pr} e={e}");
            }
        }
    }

    #[test]
    fn probe_identity_polynomial() {
        let probe = PolyProbe::new(vec![rat(0, 1), rat(1, 1)], rat(1, 1), p(2)).unwrap();
        assert_eq!(probe.exponent_bound(), 1);
        let (seq, report) = poly_probe_seq(&probe, 16, 3).unwrap();
        for n in 0..=16u64 {
            let expected = if n % 2 == 1 { rat(-1, 1) } else { rat(0, 1) };
            assert_eq!(seq.get(n), Some(&SeqValue::Finite(expected)));
        }
        assert_eq!(report.period, Some(2));
    }

    #[test]
    fn probe_constant_polynomial() {
        let probe = PolyProbe::new(vec![rat(1, 1)], rat(0, 1), p(3)).unwrap();
        assert_eq!(probe.exponent_bound(), 0);
        let (_, report) = poly_probe_seq(&probe, 10, 3).unwrap();
        assert_eq!(report.period, Some(1));
        assert!(PolyProbe::new(vec![rat(0, 1)], rat(0, 1), p(3)).is_err());
    }

    #[test]
    fn probe_triangular_numbers() {
        // n(n-1)/2 = -n/2 + n^2/2
        let probe =
            PolyProbe::new(vec![rat(0, 1), rat(-1, 2), rat(1, 2)], rat(2, 1), p(2)).unwrap();
        assert_eq!(probe.clearing_scalar(), big(2));
        assert_eq!(probe.exponent_bound(), 3);
        let (_, report) = poly_probe_seq(&probe, 32, 3).unwrap();
        let t = report.period.unwrap();
        assert_eq!(8 % t, 0);
        // exhaustive check that 8 is a period
        for n in 0..64 {
            assert_eq!(probe.value(n), probe.value(n + 8));
        }
    }

    #[test]
    fn candidates() {
        assert_eq!(period_candidates(p(2), 1, 0).unwrap(), vec![1]);
        assert_eq!(period_candidates(p(2), 2, 1).unwrap(), vec![1, 2, 3, 6]);
        assert_eq!(period_candidates(p(3), 1, 1).unwrap(), vec![2, 6]);
        assert!(period_candidates(p(2), 0, 1).is_err());
        assert!(period_candidates(p(2), 70, 0).is_err());
    }

    #[test]
    fn p_parts() {
        assert_eq!(p_part(&big(12), p(2)), big(4));
        assert_eq!(p_part(&big(12), p(5)), big(1));
        assert_eq!(p_part(&big(0), p(5)), big(0));
        assert!(is_positive_power_of(&big(27), p(3)));
        assert!(!is_positive_power_of(&big(6), p(3)));
        assert!(!is_positive_power_of(&big(-3), p(3)));
    }
}
