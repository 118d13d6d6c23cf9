//! JSON fixture formats. Tables are indexed by bitmask; entries may be JSON
//! numbers or `"p/q"` strings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::setfn::SetFunction;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetFunctionJson {
    pub n: usize,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionJson {
    pub n: usize,
    pub pmf: Vec<Value>,
}

pub fn scalar_from_json<T: Scalar>(v: &Value, field: &str, index: usize) -> Result<T> {
    let text = match v {
        Value::Number(num) => num.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(Error::Parse(format!("{field}[{index}]: expected number or \"p/q\" string, got {other}"))),
    };
    T::parse_literal(&text).map_err(|e| Error::Parse(format!("{field}[{index}]: {e}")))
}

pub fn scalars_from_json<T: Scalar>(values: &[Value], field: &str) -> Result<Vec<T>> {
    values.iter().enumerate().map(|(i, v)| scalar_from_json(v, field, i)).collect()
}

pub fn scalars_to_json<T: Scalar>(values: &[T]) -> Vec<Value> {
    values.iter().map(Scalar::to_json).collect()
}

impl<T: Scalar> From<SetFunction<T>> for SetFunctionJson {
    fn from(f: SetFunction<T>) -> Self {
        Self { n: f.n(), values: scalars_to_json(f.values()) }
    }
}

impl<T: Scalar> TryFrom<SetFunctionJson> for SetFunction<T> {
    type Error = Error;
    fn try_from(raw: SetFunctionJson) -> Result<Self> {
        let values = scalars_from_json(&raw.values, "values")?;
        SetFunction::new(raw.n, values).map_err(|e| Error::Parse(format!("values: {e}")))
    }
}

impl<T: Scalar> From<Distribution<T>> for DistributionJson {
    fn from(d: Distribution<T>) -> Self {
        Self { n: d.n(), pmf: scalars_to_json(d.pmf()) }
    }
}

impl<T: Scalar> TryFrom<DistributionJson> for Distribution<T> {
    type Error = Error;
    fn try_from(raw: DistributionJson) -> Result<Self> {
        let pmf = scalars_from_json(&raw.pmf, "pmf")?;
        Distribution::new(raw.n, pmf).map_err(|e| Error::Parse(format!("pmf: {e}")))
    }
}

pub fn distribution_from_str<T: Scalar>(text: &str) -> Result<Distribution<T>> {
    let raw: DistributionJson = serde_json::from_str(text)?;
    raw.try_into()
}

pub fn set_function_from_str<T: Scalar>(text: &str) -> Result<SetFunction<T>> {
    let raw: SetFunctionJson = serde_json::from_str(text)?;
    raw.try_into()
}
