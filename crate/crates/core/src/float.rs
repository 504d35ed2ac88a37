//! Serde adapters for `f64` fields that may hold `±inf` or `NaN`.
//!
//! JSON has no literal for non-finite numbers and `serde_json` writes them
//! as `null`, which loses the value. These adapters write finite values as
//! plain numbers and the rest as the strings `"Infinity"`, `"-Infinity"`
//! and `"NaN"`, so reports round-trip exactly.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy)]
struct Wrap(f64);

impl Serialize for Wrap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if v > 0.0 {
            s.serialize_str("Infinity")
        } else {
            s.serialize_str("-Infinity")
        }
    }
}

struct WrapVisitor;

impl Visitor<'_> for WrapVisitor {
    type Value = Wrap;

    fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("a number, \"Infinity\", \"-Infinity\" or \"NaN\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Wrap, E> {
        Ok(Wrap(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Wrap, E> {
        Ok(Wrap(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Wrap, E> {
        Ok(Wrap(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Wrap, E> {
        match v {
            "Infinity" => Ok(Wrap(f64::INFINITY)),
            "-Infinity" => Ok(Wrap(f64::NEG_INFINITY)),
            "NaN" => Ok(Wrap(f64::NAN)),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Wrap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(WrapVisitor)
    }
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    Wrap(*v).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Wrap::deserialize(d).map(|w| w.0)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| Wrap(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (Wrap(v.0), Wrap(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Wrap, Wrap)>::deserialize(d)?;
        Ok((a.0, b.0))
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Serialize, Deserialize)]
    struct S {
        #[serde(with = "crate::float")]
        a: f64,
        #[serde(with = "crate::float::vec")]
        b: Vec<f64>,
        #[serde(with = "crate::float::opt")]
        c: Option<f64>,
    }

    #[test]
    fn non_finite_round_trip() {
        let s = S { a: f64::INFINITY, b: vec![1.5, f64::NEG_INFINITY, f64::NAN], c: Some(2.0) };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"a":"Infinity","b":[1.5,"-Infinity","NaN"],"c":2.0}"#);
        let back: S = serde_json::from_str(&text).unwrap();
        assert_eq!(back.a, f64::INFINITY);
        assert_eq!(back.b[..2], [1.5, f64::NEG_INFINITY]);
        assert!(back.b[2].is_nan());
        assert_eq!(back.c, Some(2.0));
        assert!(serde_json::from_str::<S>(r#"{"a":"inf","b":[],"c":null}"#).is_err());
    }
}
