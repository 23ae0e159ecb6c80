//! Run configuration: method, CPT parameters, constraint bounds, start
//! specification, and solver options. Validation collects every problem
//! before any computation starts.

use std::fmt;
use std::str::FromStr;

use cptport_core::{ConstraintSet, CptParams};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mm,
    Cc,
    Ga,
    GaSoftmax,
    Mv,
    Grid,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mm => "mm",
            Method::Cc => "cc",
            Method::Ga => "ga",
            Method::GaSoftmax => "ga-softmax",
            Method::Mv => "mv",
            Method::Grid => "grid",
        }
    }

    pub fn is_iterative(&self) -> bool {
        matches!(self, Method::Mm | Method::Cc | Method::Ga | Method::GaSoftmax)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mm" => Ok(Method::Mm),
            "cc" => Ok(Method::Cc),
            "ga" => Ok(Method::Ga),
            "ga-softmax" => Ok(Method::GaSoftmax),
            "mv" => Ok(Method::Mv),
            "grid" => Ok(Method::Grid),
            other => Err(format!(
                "unknown method {other:?} (expected mm, cc, ga, ga-softmax, mv, grid)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where iterative methods begin.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum StartSpec {
    Equal,
    /// Seed with the MV-heuristic portfolio.
    Mv,
    /// `dirichlet:<count>` random starts.
    Dirichlet(usize),
    Explicit(Vec<f64>),
}

impl StartSpec {
    pub fn describe(&self) -> String {
        match self {
            StartSpec::Equal => "equal".into(),
            StartSpec::Mv => "mv".into(),
            StartSpec::Dirichlet(n) => format!("dirichlet:{n}"),
            StartSpec::Explicit(_) => "explicit".into(),
        }
    }
}

impl FromStr for StartSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equal" => return Ok(StartSpec::Equal),
            "mv" => return Ok(StartSpec::Mv),
            _ => {}
        }
        if let Some(count) = s.strip_prefix("dirichlet:") {
            let count: usize = count
                .parse()
                .map_err(|_| format!("bad start count in {s:?}"))?;
            if count == 0 {
                return Err("dirichlet start count must be at least 1".into());
            }
            return Ok(StartSpec::Dirichlet(count));
        }
        let body = s.strip_prefix("explicit:").unwrap_or(s);
        if body.contains(',') {
            let weights = parse_float_list(body)
                .map_err(|e| format!("bad explicit weights {s:?}: {e}"))?;
            return Ok(StartSpec::Explicit(weights));
        }
        Err(format!(
            "unknown start spec {s:?} (expected equal, mv, dirichlet:<count>, or weights)"
        ))
    }
}

pub fn parse_float_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|cell| {
            cell.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {:?}", cell.trim()))
        })
        .collect()
}

/// `γ+,γ-,δ+,δ-`.
pub fn parse_params(s: &str) -> Result<CptParams, String> {
    let values = parse_float_list(s)?;
    if values.len() != 4 {
        return Err(format!(
            "expected 4 comma-separated parameters (gamma+, gamma-, delta+, delta-), got {}",
            values.len()
        ));
    }
    CptParams::new(values[0], values[1], values[2], values[3]).map_err(|e| e.to_string())
}

/// Per-asset bounds from optional comma lists; defaults to long-only.
pub fn build_constraints(
    n_assets: usize,
    lower: Option<&str>,
    upper: Option<&str>,
    errors: &mut Vec<String>,
) -> Option<ConstraintSet> {
    let parse_bounds = |spec: Option<&str>, default: f64, errors: &mut Vec<String>| -> Vec<f64> {
        match spec {
            None => vec![default; n_assets],
            Some(s) => match parse_float_list(s) {
                Ok(v) if v.len() == n_assets => v,
                Ok(v) => {
                    errors.push(format!(
                        "bounds need {n_assets} entries to match the dataset, got {}",
                        v.len()
                    ));
                    vec![default; n_assets]
                }
                Err(e) => {
                    errors.push(format!("bad bounds: {e}"));
                    vec![default; n_assets]
                }
            },
        }
    };
    let lo = parse_bounds(lower, 0.0, errors);
    let hi = parse_bounds(upper, f64::INFINITY, errors);
    match ConstraintSet::new(lo, hi) {
        Ok(set) => Some(set),
        Err(e) => {
            errors.push(format!("constraints: {e}"));
            None
        }
    }
}

/// Solver options shared across subcommands, echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct SolverOptions {
    pub max_iter: Option<usize>,
    pub steps: Option<usize>,
    pub trust_radius: Option<f64>,
    pub grid_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: None,
            steps: None,
            trust_radius: None,
            grid_step: 0.01,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_methods_and_starts() {
        assert_eq!(Method::from_str("ga-softmax").unwrap(), Method::GaSoftmax);
        assert!(Method::from_str("sgd").is_err());
        assert_eq!(StartSpec::from_str("equal").unwrap(), StartSpec::Equal);
        assert_eq!(
            StartSpec::from_str("dirichlet:100").unwrap(),
            StartSpec::Dirichlet(100)
        );
        assert_eq!(
            StartSpec::from_str("0.2,0.8").unwrap(),
            StartSpec::Explicit(vec![0.2, 0.8])
        );
        assert_eq!(
            StartSpec::from_str("explicit:0.5,0.5").unwrap(),
            StartSpec::Explicit(vec![0.5, 0.5])
        );
        assert!(StartSpec::from_str("dirichlet:0").is_err());
        assert!(StartSpec::from_str("bogus").is_err());
    }

    #[test]
    fn parses_params() {
        let p = parse_params("8.4,11.4,0.77,0.79").unwrap();
        assert_eq!(p.gamma_pos, 8.4);
        assert_eq!(p.delta_neg, 0.79);
        assert!(parse_params("1,2,3").is_err());
        assert!(parse_params("0,1,1,1").is_err());
    }

    #[test]
    fn collects_constraint_errors() {
        let mut errors = Vec::new();
        let set = build_constraints(3, Some("0,0"), None, &mut errors);
        assert!(set.is_some()); // falls back to defaults but records the error
        assert_eq!(errors.len(), 1);
    }
}
