//! Number formatting shared by the JSON and CSV writers: 12 significant digits,
//! non-finite values spelled out.

use serde::ser::{SerializeSeq, SerializeTuple};
use serde::Serializer;

/// Round to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// CSV cell for a real number.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.11e}")
    }
}

pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(round12(*v))
    } else {
        s.serialize_str(&num(*v))
    }
}

pub fn ser_f64_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&Real(*x))?;
    }
    seq.end()
}

pub fn ser_f64_pair<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&Real(v.0))?;
    t.serialize_element(&Real(v.1))?;
    t.end()
}

struct Real(f64);

impl serde::Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_f64(&self.0, s)
    }
}
