//! Serde adapters that encode big integers as decimal strings.

use num_bigint::BigInt;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::Deserialize;

use crate::Rational;

#[derive(Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Text(String),
    Int(i64),
}

impl IntRepr {
    fn into_bigint<E: de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntRepr::Text(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| E::custom(format!("not a decimal integer: {s:?}"))),
            IntRepr::Int(v) => Ok(BigInt::from(v)),
        }
    }
}

/// `Vec<BigInt>` as a list of decimal strings.
pub(crate) mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

/// `Vec<Vec<BigInt>>` as nested lists of decimal strings.
pub(crate) mod nested {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = v
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Vec::<Vec<IntRepr>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(IntRepr::into_bigint).collect())
            .collect()
    }
}

/// Exact rational as `"num/den"` (or `"num"` when integral).
pub(crate) fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }
}
