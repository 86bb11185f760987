//! Instance families with closed-form Smith forms, plus companion matrices and
//! seeded random matrices.
//!
//! Random matrices come from ChaCha8 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`, so a seed gives the same matrix on every
//! platform.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;
use crate::ntkit::Prime;

/// A family with a known closed form for the Smith form of every power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `[[p, 1], [0, p]] ⊕ I_pad`.
    Jordan { p: Prime, pad: usize },
    /// `C ⊕ [2]` with `C` the companion matrix of `x^{m−1} − 4^m`.
    Bruner { m: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleInstance {
    pub family: Family,
    pub matrix: IntMatrix,
}

impl OracleInstance {
    /// Expected invariant factors of `A^n`, in divisibility order.
    pub fn oracle(&self, n: u64) -> Vec<BigInt> {
        match self.family {
            Family::Jordan { p, pad } => {
                let pb = p.to_bigint();
                let pair = if n.is_multiple_of(p.get()) {
                    let pn = pow(&pb, n);
                    [pn.clone(), pn]
                } else {
                    [pow(&pb, n - 1), pow(&pb, n + 1)]
                };
                let mut out = vec![BigInt::one(); pad];
                out.extend(pair);
                out
            }
            Family::Bruner { m } => {
                let block = (m - 1) as u64;
                let (k, r) = (n / block, (n % block) as usize);
                let four = BigInt::from(4);
                let mut out = vec![pow(&BigInt::from(2), n)];
                out.extend(std::iter::repeat_n(pow(&four, m as u64 * (k + 1)), r));
                out.extend(std::iter::repeat_n(pow(&four, m as u64 * k), m - 1 - r));
                // all entries are powers of two, so ascending order is the chain
                out.sort();
                out
            }
        }
    }

    pub fn to_instance(&self) -> Instance {
        let (family, params) = match self.family {
            Family::Jordan { p, pad } => (
                "jordan",
                params([("p", Value::from(p.get())), ("pad", Value::from(pad))]),
            ),
            Family::Bruner { m } => ("bruner", params([("m", Value::from(m))])),
        };
        Instance {
            family: family.into(),
            params,
            matrix: self.matrix.clone(),
        }
    }
}

/// The serialized form of a generated matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Instance {
    pub family: String,
    pub params: BTreeMap<String, Value>,
    pub matrix: IntMatrix,
}

fn params<const N: usize>(kv: [(&str, Value); N]) -> BTreeMap<String, Value> {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn pow(base: &BigInt, e: u64) -> BigInt {
    num_traits::pow(base.clone(), e as usize)
}

pub fn jordan_example(p: Prime, pad: usize) -> OracleInstance {
    let pb = p.to_bigint();
    let block = IntMatrix::from_rows(vec![
        vec![pb.clone(), BigInt::one()],
        vec![BigInt::zero(), pb],
    ])
    .expect("2x2");
    let matrix = if pad == 0 {
        block
    } else {
        block.direct_sum(&IntMatrix::identity(pad))
    };
    OracleInstance {
        family: Family::Jordan { p, pad },
        matrix,
    }
}

/// Companion matrix of the monic polynomial `Σ c_i x^i` (constant term first):
/// ones on the subdiagonal and `−c_0, …, −c_{d−1}` down the last column.
pub fn companion(coeffs: &[BigInt]) -> Result<IntMatrix> {
    let Some(lead) = coeffs.last() else {
        return Err(Error::ZeroPolynomial);
    };
    if coeffs.len() < 2 {
        return Err(Error::InvalidArgument("companion needs degree ≥ 1".into()));
    }
    if !lead.is_one() {
        return Err(Error::NotMonic);
    }
    let d = coeffs.len() - 1;
    let mut rows = vec![vec![BigInt::zero(); d]; d];
    for i in 1..d {
        rows[i][i - 1] = BigInt::one();
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[d - 1] = -&coeffs[i];
    }
    IntMatrix::from_rows(rows)
}

pub fn bruner_counterexample(m: usize) -> Result<OracleInstance> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "family needs m ≥ 3, got {m}"
        )));
    }
    let mut poly = vec![BigInt::zero(); m];
    poly[0] = -pow(&BigInt::from(4), m as u64);
    poly[m - 1] = BigInt::one();
    let c = companion(&poly)?;
    let matrix = c.direct_sum(&IntMatrix::diagonal(vec![BigInt::from(2)]));
    Ok(OracleInstance {
        family: Family::Bruner { m },
        matrix,
    })
}

/// `size × size` matrix with entries uniform in `[−bound, bound]`.
pub fn random_instance(size: usize, bound: u64, seed: u64) -> Result<IntMatrix> {
    if size == 0 || bound == 0 {
        return Err(Error::InvalidArgument("size and bound must be ≥ 1".into()));
    }
    let bound = i64::try_from(bound)
        .map_err(|_| Error::InvalidArgument("entry bound exceeds 63 bits".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..size * size)
        .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
        .collect();
    IntMatrix::new(size, size, entries)
}

/// First non-nilpotent random matrix for seeds `seed, seed + 1, …`; returns
/// the matrix and the seed that produced it.
pub fn random_non_nilpotent(size: usize, bound: u64, seed: u64) -> Result<(IntMatrix, u64)> {
    for s in seed.. {
        let a = random_instance(size, bound, s)?;
        if !a.is_nilpotent()? {
            return Ok((a, s));
        }
    }
    unreachable!("some seed yields a non-nilpotent matrix")
}

pub fn random_as_instance(size: usize, bound: u64, seed: u64) -> Result<Instance> {
    Ok(Instance {
        family: "random".into(),
        params: params([
            ("bound", Value::from(bound)),
            ("seed", Value::from(seed)),
            ("size", Value::from(size)),
        ]),
        matrix: random_instance(size, bound, seed)?,
    })
}
