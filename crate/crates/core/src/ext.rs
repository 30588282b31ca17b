//! Extended-real serialization: finite values as JSON numbers, `±∞` and NaN
//! as the strings `"inf"`, `"-inf"` and `"nan"`.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;

/// An `f64` that round-trips through JSON including non-finite values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

struct ExtVisitor;

impl Visitor<'_> for ExtVisitor {
    type Value = Ext;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Ext, E> {
        Ok(Ext(v))
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Ext, E> {
        Ok(Ext(v as f64))
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Ext, E> {
        Ok(Ext(v as f64))
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<Ext, E> {
        match v {
            "inf" | "+inf" => Ok(Ext(f64::INFINITY)),
            "-inf" => Ok(Ext(f64::NEG_INFINITY)),
            "nan" => Ok(Ext(f64::NAN)),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Ext, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}

/// `#[serde(with = "ext::scalar")]`
pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Ext(*v).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ext::deserialize(d).map(|e| e.0)
    }
}

/// `#[serde(with = "ext::vec")]`
pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| Ext(*x)))
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Ext>::deserialize(d).map(|v| v.into_iter().map(|e| e.0).collect())
    }
}

/// `#[serde(with = "ext::option")]`
pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Ext).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Ext>::deserialize(d).map(|v| v.map(|e| e.0))
    }
}
