//! Serde adapters that write `rug::Float` values as decimal strings.

use rug::Float;
use serde::{Deserialize, Deserializer, Serializer};

use crate::series::{float_string, parse_float};

/// Precision used when reading report values back.
pub const READ_PRECISION: u32 = 256;

pub fn serialize<S: Serializer>(x: &Float, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&float_string(x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Float, D::Error> {
    let text = String::deserialize(d)?;
    parse_float(&text, READ_PRECISION).map_err(serde::de::Error::custom)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Float>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&float_string(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Float>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_float(&t, READ_PRECISION).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Float], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&float_string(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Float>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_float(t, READ_PRECISION).map_err(serde::de::Error::custom))
            .collect()
    }
}
