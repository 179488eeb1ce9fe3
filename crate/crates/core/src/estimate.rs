use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Route by which a module value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    /// Closed elliptic chain for `σ = 1/2`.
    ExactSigmaHalf,
    /// Bowman closed form for `H = 1`.
    Bowman,
    /// Leading-order asymptote.
    Leading,
    /// Large-`H` estimator chain.
    LargeH,
    /// Finite-difference capacity oracle.
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ExactSigmaHalf,
        Method::Bowman,
        Method::Leading,
        Method::LargeH,
        Method::Oracle,
    ];

    /// Name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::ExactSigmaHalf => "exact",
            Method::Bowman => "bowman",
            Method::Leading => "leading",
            Method::LargeH => "large-h",
            Method::Oracle => "oracle",
        }
    }

    /// Name used in CSV and JSON records.
    pub fn tag(self) -> &'static str {
        match self {
            Method::ExactSigmaHalf => "EXACT_SIGMA_HALF",
            Method::Bowman => "BOWMAN",
            Method::Leading => "LEADING",
            Method::LargeH => "LARGE_H",
            Method::Oracle => "ORACLE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.cli_name() == lower || m.tag().eq_ignore_ascii_case(&lower))
            .or(match lower.as_str() {
                "exact_sigma_half" | "large_h" | "largeh" => Some(if lower.starts_with('e') {
                    Method::ExactSigmaHalf
                } else {
                    Method::LargeH
                }),
                _ => None,
            })
            .ok_or_else(|| Error::Domain(format!("unknown method '{s}'")))
    }
}

/// A module value with its provenance.
///
/// `est_error` is present exactly for [`Method::Oracle`] values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleEstimate {
    value: f64,
    method: Method,
    est_error: Option<f64>,
    trace_ref: Option<String>,
}

impl ModuleEstimate {
    /// An analytic (non-oracle) estimate.
    pub fn analytic(value: f64, method: Method) -> Result<Self> {
        if method == Method::Oracle {
            return Err(Error::InvalidEstimate(
                "oracle estimates need an error estimate".into(),
            ));
        }
        check_value(value)?;
        Ok(Self {
            value,
            method,
            est_error: None,
            trace_ref: None,
        })
    }

    pub fn oracle(value: f64, est_error: f64) -> Result<Self> {
        check_value(value)?;
        if !(est_error >= 0.0 && est_error.is_finite()) {
            return Err(Error::InvalidEstimate(format!(
                "error estimate {est_error} is not ≥ 0"
            )));
        }
        Ok(Self {
            value,
            method: Method::Oracle,
            est_error: Some(est_error),
            trace_ref: None,
        })
    }

    pub fn with_trace_ref(mut self, trace_ref: impl Into<String>) -> Self {
        self.trace_ref = Some(trace_ref.into());
        self
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn est_error(&self) -> Option<f64> {
        self.est_error
    }

    pub fn trace_ref(&self) -> Option<&str> {
        self.trace_ref.as_deref()
    }
}

fn check_value(value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEstimate(format!(
            "module value {value} is not a positive real"
        )))
    }
}
