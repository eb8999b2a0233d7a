use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which representation produced a price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Laplace,
    Hermite,
    Yor,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Laplace => "laplace",
            Method::Hermite => "hermite",
            Method::Yor => "yor",
            Method::MonteCarlo => "monte_carlo",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// One diagnostic entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiagValue {
    Flag(bool),
    Count(u64),
    Number(f64),
    Text(String),
}

impl From<bool> for DiagValue {
    fn from(v: bool) -> Self {
        DiagValue::Flag(v)
    }
}

impl From<f64> for DiagValue {
    fn from(v: f64) -> Self {
        DiagValue::Number(v)
    }
}

impl From<usize> for DiagValue {
    fn from(v: usize) -> Self {
        DiagValue::Count(v as u64)
    }
}

impl From<&str> for DiagValue {
    fn from(v: &str) -> Self {
        DiagValue::Text(v.to_string())
    }
}

impl From<String> for DiagValue {
    fn from(v: String) -> Self {
        DiagValue::Text(v)
    }
}

pub type Diagnostics = BTreeMap<String, DiagValue>;

/// A normalized price with its provenance and an error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub diagnostics: Diagnostics,
}

impl PriceResult {
    pub fn new(value: f64, method: Method, error_estimate: f64) -> Self {
        Self {
            value,
            method,
            error_estimate,
            diagnostics: Diagnostics::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<DiagValue>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }
}
