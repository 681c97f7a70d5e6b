//! Problem files and JSON shapes for series, rationals and realizations.
//!
//! A transfer function is written either as `{"num": [...], "den": [...]}`
//! or, for a finite series, `{"triples": [...]}`; each list holds
//! `[i, t, value]` entries for the coefficient of `z^i lambda^t`.

use std::path::Path;

use cone_h2::{Mat, Problem, Rational, Realization, Series, ZMatrix};
use serde::{Deserialize, Serialize};

use crate::format::round;
use crate::CliError;

pub type Triple = (i64, i64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransferSpec {
    Rational { num: Vec<Triple>, den: Vec<Triple> },
    Polynomial { triples: Vec<Triple> },
}

impl TransferSpec {
    pub fn to_rational(&self, what: &str) -> Result<Rational, CliError> {
        let r = match self {
            Self::Rational { num, den } => {
                if den.iter().all(|&(_, _, v)| v == 0.0) {
                    return Err(CliError::invalid(format!("{what}: denominator is identically zero")));
                }
                Rational::new(series(num), series(den))
            }
            Self::Polynomial { triples } => Rational::polynomial(series(triples)),
        };
        r.map_err(|e| CliError::from_core(&format!("loading {what}"), e))
    }

    /// Rounded to the report format.
    pub fn rounded(r: &Rational) -> Self {
        Self::build(r, triples)
    }

    /// Full precision, for files that are read back as input.
    pub fn exact(r: &Rational) -> Self {
        Self::build(r, |s| s.triples())
    }

    fn build(r: &Rational, f: impl Fn(&Series) -> Vec<Triple>) -> Self {
        if r.is_polynomial() {
            Self::Polynomial { triples: f(r.num()) }
        } else {
            Self::Rational { num: f(r.num()), den: f(r.den()) }
        }
    }
}

fn series(t: &[Triple]) -> Series {
    Series::from_triples(t.iter().copied())
}

/// Nonzero coefficients, ordered by `t` then `i`, rounded for output.
pub fn triples(s: &Series) -> Vec<Triple> {
    s.triples().into_iter().map(|(i, t, v)| (i, t, round(v))).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orders {
    #[serde(default)]
    pub m: Option<i64>,
    #[serde(default, rename = "S")]
    pub s: Option<i64>,
    #[serde(default, rename = "T")]
    pub t: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ProblemFile {
    DisturbanceAttenuation {
        #[serde(rename = "G")]
        g: TransferSpec,
        #[serde(rename = "W")]
        w: TransferSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orders: Option<Orders>,
    },
    General {
        #[serde(rename = "T1")]
        t1: TransferSpec,
        #[serde(rename = "T2")]
        t2: TransferSpec,
        #[serde(rename = "Gyu")]
        gyu: TransferSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orders: Option<Orders>,
    },
}

impl ProblemFile {
    pub fn orders(&self) -> Orders {
        match self {
            Self::DisturbanceAttenuation { orders, .. } | Self::General { orders, .. } => orders.unwrap_or_default(),
        }
    }

    /// Builds and validates the problem.
    pub fn to_problem(&self) -> Result<Problem<f64>, CliError> {
        let p = match self {
            Self::DisturbanceAttenuation { g, w, .. } => {
                Problem::disturbance_attenuation(g.to_rational("G")?, w.to_rational("W")?)
            }
            Self::General { t1, t2, gyu, .. } => {
                Problem::general(t1.to_rational("T1")?, t2.to_rational("T2")?, gyu.to_rational("Gyu")?)
            }
        };
        p.validate().map_err(|e| CliError::from_core("synthesis::Problem::validate", e))?;
        Ok(p)
    }
}

/// Contents of an input file: a full problem or a single transfer function.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Problem(ProblemFile),
    Transfer(TransferSpec),
}

pub fn load(path: &Path) -> Result<Input, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("reading {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::invalid(format!("{}: {}", path.display(), e.message)))
}

pub fn parse(text: &str) -> Result<Input, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::invalid(format!("not valid JSON: {e}")))?;
    if value.get("mode").is_some() {
        serde_json::from_value(value)
            .map(Input::Problem)
            .map_err(|e| CliError::invalid(format!("bad problem file: {e}")))
    } else {
        serde_json::from_value(value).map(Input::Transfer).map_err(|_| {
            CliError::invalid(
                "expected a problem ({\"mode\": ...}) or a transfer function ({\"num\", \"den\"} or {\"triples\"})",
            )
        })
    }
}

/// `M(z)` as its three coefficient matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZMatrixJson {
    #[serde(rename = "z^-1")]
    pub minus: Vec<Vec<f64>>,
    #[serde(rename = "z^0")]
    pub zero: Vec<Vec<f64>>,
    #[serde(rename = "z^1")]
    pub plus: Vec<Vec<f64>>,
}

fn rows(m: &Mat<f64>) -> Vec<Vec<f64>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(round).collect()).collect()
}

impl From<&ZMatrix<f64>> for ZMatrixJson {
    fn from(m: &ZMatrix<f64>) -> Self {
        Self { minus: rows(&m.minus), zero: rows(&m.zero), plus: rows(&m.plus) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationJson {
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    #[serde(rename = "A")]
    pub a: ZMatrixJson,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: ZMatrixJson,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

impl From<&Realization> for RealizationJson {
    fn from(g: &Realization) -> Self {
        Self {
            states: g.states(),
            inputs: g.inputs(),
            outputs: g.outputs(),
            a: (&g.a).into(),
            b: rows(&g.b),
            c: (&g.c).into(),
            d: rows(&g.d),
        }
    }
}
