//! Structured verification records.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real or complex quantity as it appears in a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn as_complex(&self) -> Complex64 {
        match *self {
            Value::Real(x) => Complex64::new(x, 0.0),
            Value::Complex(z) => z,
        }
    }

    pub fn norm(&self) -> f64 {
        self.as_complex().norm()
    }

    pub fn is_finite(&self) -> bool {
        let z = self.as_complex();
        z.re.is_finite() && z.im.is_finite()
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<Complex64> for Value {
    fn from(z: Complex64) -> Self {
        Value::Complex(z)
    }
}

fn encode_f64(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::Value::from(x)
    } else if x.is_nan() {
        serde_json::Value::from("NaN")
    } else if x > 0.0 {
        serde_json::Value::from("inf")
    } else {
        serde_json::Value::from("-inf")
    }
}

fn decode_f64(v: &serde_json::Value) -> Option<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => match s.as_str() {
            "NaN" => Some(f64::NAN),
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            _ => None,
        },
        serde_json::Value::Null => Some(f64::NAN),
        _ => None,
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Value::Real(x) => encode_f64(x).serialize(s),
            Value::Complex(z) => {
                serde_json::Value::Array(vec![encode_f64(z.re), encode_f64(z.im)]).serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        if let serde_json::Value::Array(items) = &raw {
            if items.len() == 2 {
                if let (Some(re), Some(im)) = (decode_f64(&items[0]), decode_f64(&items[1])) {
                    return Ok(Value::Complex(Complex64::new(re, im)));
                }
            }
            return Err(serde::de::Error::custom("complex value must be [re, im]"));
        }
        decode_f64(&raw)
            .map(Value::Real)
            .ok_or_else(|| serde::de::Error::custom("expected a number"))
    }
}

mod lossy {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::encode_f64(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        super::decode_f64(&raw).ok_or_else(|| serde::de::Error::custom("expected a number"))
    }
}

/// One verification: what was compared, how far apart, and whether it passed.
///
/// `pass` holds iff `rel_err <= max(tolerance, 10 * error_estimate)`, where
/// `rel_err` falls back to the absolute error when the expected value is zero.
/// The tolerance used is recorded under `params["tolerance"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub expected: Value,
    pub computed: Value,
    #[serde(with = "lossy")]
    pub abs_err: f64,
    #[serde(with = "lossy")]
    pub rel_err: f64,
    #[serde(with = "lossy")]
    pub error_estimate: f64,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// Builder-style parameter map.
#[derive(Debug, Clone, Default)]
pub struct Params(BTreeMap<String, serde_json::Value>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        self.0.insert(key.to_string(), encode_f64(x));
        self
    }

    pub fn int(mut self, key: &str, n: i64) -> Self {
        self.0.insert(key.to_string(), serde_json::Value::from(n));
        self
    }

    pub fn text(mut self, key: &str, s: &str) -> Self {
        self.0.insert(key.to_string(), serde_json::Value::from(s));
        self
    }

    pub fn complex(mut self, key: &str, z: Complex64) -> Self {
        self.0.insert(
            key.to_string(),
            serde_json::Value::Array(vec![encode_f64(z.re), encode_f64(z.im)]),
        );
        self
    }

    pub fn into_map(self) -> BTreeMap<String, serde_json::Value> {
        self.0
    }
}

impl CheckReport {
    /// Compares `computed` against `expected`.
    pub fn identity(
        check_id: impl Into<String>,
        params: Params,
        expected: impl Into<Value>,
        computed: impl Into<Value>,
        error_estimate: f64,
        tolerance: f64,
    ) -> Self {
        let expected = expected.into();
        let computed = computed.into();
        let abs_err = (computed.as_complex() - expected.as_complex()).norm();
        let scale = expected.norm();
        let rel_err = if scale > 0.0 { abs_err / scale } else { abs_err };
        let threshold = tolerance.max(10.0 * error_estimate);
        let pass = computed.is_finite() && rel_err.is_finite() && rel_err <= threshold;
        CheckReport {
            check_id: check_id.into(),
            params: params.num("tolerance", tolerance).into_map(),
            expected,
            computed,
            abs_err,
            rel_err,
            error_estimate,
            pass,
            runtime_ms: 0,
        }
    }

    /// A sampled certificate: expected zero violations, computed the count.
    pub fn certificate(check_id: impl Into<String>, params: Params, violations: usize) -> Self {
        let v = violations as f64;
        CheckReport {
            check_id: check_id.into(),
            params: params.num("tolerance", 0.0).into_map(),
            expected: Value::Real(0.0),
            computed: Value::Real(v),
            abs_err: v,
            rel_err: v,
            error_estimate: 0.0,
            pass: violations == 0,
            runtime_ms: 0,
        }
    }

    /// A check whose evaluation failed outright.
    pub fn failure(check_id: impl Into<String>, params: Params, err: &crate::Error) -> Self {
        CheckReport {
            check_id: check_id.into(),
            params: params.text("error", &err.to_string()).into_map(),
            expected: Value::Real(0.0),
            computed: Value::Real(f64::NAN),
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            error_estimate: f64::NAN,
            pass: false,
            runtime_ms: 0,
        }
    }

    pub fn with_runtime(mut self, ms: u64) -> Self {
        self.runtime_ms = ms;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.params
            .get("tolerance")
            .and_then(decode_f64)
            .unwrap_or(f64::NAN)
    }

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(decode_f64)
    }
}
