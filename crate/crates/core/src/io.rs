//! Chain files and named chain generators.
//!
//! A chain file is `{"states": N, "mode": "exact"|"float", "rows": [[…]]}`
//! with `"p/q"` strings in exact mode and JSON numbers in float mode.
//! Generators: `lazy-torus(n,d)`, `biased-cycle(n,p)`, `gnm(n,m,lazy|plain)`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{biased_cycle, MarkovChain};
use crate::error::{Error, Result};
use crate::gnm::{build_gnm, walk_chain, LongEdgeRule};
use crate::scalar::{parse_rational, NumericMode, Rational, Scalar};
use crate::torus::lazy_torus_kernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub states: usize,
    pub mode: NumericMode,
    pub rows: Vec<Vec<Value>>,
}

/// A chain in whichever numeric mode it was loaded or converted to.
#[derive(Debug, Clone)]
pub enum AnyChain {
    Exact(MarkovChain<Rational>),
    Float(MarkovChain<f64>),
}

impl AnyChain {
    pub fn mode(&self) -> NumericMode {
        match self {
            Self::Exact(_) => NumericMode::Exact,
            Self::Float(_) => NumericMode::Float,
        }
    }

    pub fn n_states(&self) -> usize {
        match self {
            Self::Exact(c) => c.n_states(),
            Self::Float(c) => c.n_states(),
        }
    }

    /// Exact to float is lossy but always possible; float to exact reads
    /// each entry as the rational it denotes.
    pub fn into_mode(self, mode: NumericMode) -> Result<Self> {
        match (self, mode) {
            (Self::Exact(c), NumericMode::Float) => Ok(Self::Float(c.map_scalar(|p| p.to_f64())?)),
            (Self::Float(c), NumericMode::Exact) => Ok(Self::Exact(c.map_scalar(|p| crate::scalar::convert::<f64, Rational>(p))?)),
            (same, _) => Ok(same),
        }
    }
}

pub fn chain_to_file<S: Scalar>(chain: &MarkovChain<S>) -> ChainFile {
    let rows = chain
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| match S::MODE {
                    NumericMode::Exact => Value::String(p.to_text()),
                    NumericMode::Float => serde_json::json!(p.to_f64()),
                })
                .collect()
        })
        .collect();
    ChainFile { states: chain.n_states(), mode: S::MODE, rows }
}

pub fn chain_from_file(file: &ChainFile) -> Result<AnyChain> {
    if file.rows.len() != file.states {
        return Err(Error::LengthMismatch { left: file.rows.len(), right: file.states });
    }
    match file.mode {
        NumericMode::Exact => {
            let rows = file
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| match v {
                            Value::String(s) => parse_rational(s),
                            other => Err(Error::Parse(format!("exact entries must be \"p/q\" strings, got {other}"))),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyChain::Exact(MarkovChain::new(rows)?))
        }
        NumericMode::Float => {
            let rows = file
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| v.as_f64().ok_or_else(|| Error::Parse(format!("float entries must be numbers, got {v}"))))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyChain::Float(MarkovChain::new(rows)?))
        }
    }
}

/// `name(arg, …)` split into its parts, or `None` if `spec` is not of that shape.
fn split_call(spec: &str) -> Option<(&str, Vec<&str>)> {
    let (name, rest) = spec.trim().split_once('(')?;
    let args = rest.strip_suffix(')')?;
    Some((name.trim(), args.split(',').map(str::trim).collect()))
}

pub fn generate(spec: &str) -> Result<AnyChain> {
    let bad = |why: &str| Error::Parse(format!("generator {spec:?}: {why}"));
    let (name, args) = split_call(spec).ok_or_else(|| bad("expected name(args)"))?;
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad("expected an integer argument"));
    match (name, args.as_slice()) {
        ("lazy-torus", [n, d]) => Ok(AnyChain::Exact(lazy_torus_kernel(int(n)?, int(d)?)?)),
        ("biased-cycle", [n, p]) => Ok(AnyChain::Exact(biased_cycle(int(n)?, &parse_rational(p)?)?)),
        ("gnm", [n, m, laziness, rest @ ..]) if rest.len() <= 1 => {
            let lazy = match *laziness {
                "lazy" => true,
                "plain" => false,
                _ => return Err(bad("third argument must be lazy or plain")),
            };
            let rule = rest.first().map(|r| r.parse()).transpose()?.unwrap_or(LongEdgeRule::Literal);
            let g = build_gnm(int(n)?, int(m)?, rule)?;
            Ok(AnyChain::Exact(walk_chain(&g, lazy)?))
        }
        _ => Err(bad("unknown generator or wrong number of arguments")),
    }
}

/// A generator expression or the path of a chain file, optionally converted.
pub fn load_chain(spec: &str, mode: Option<NumericMode>) -> Result<AnyChain> {
    let chain = if split_call(spec).is_some() && !Path::new(spec).exists() {
        generate(spec)?
    } else {
        let text = std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
        let file: ChainFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
        chain_from_file(&file)?
    };
    match mode {
        Some(mode) => chain.into_mode(mode),
        None => Ok(chain),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn file_round_trip_exact_and_float() {
        let chain = biased_cycle::<Rational>(5, &rational(3, 4)).unwrap();
        let file = chain_to_file(&chain);
        assert_eq!(file.rows[0][1], Value::String("3/4".into()));
        let text = serde_json::to_string(&file).unwrap();
        let back: ChainFile = serde_json::from_str(&text).unwrap();
        match chain_from_file(&back).unwrap() {
            AnyChain::Exact(c) => assert_eq!(c.rows(), chain.rows()),
            AnyChain::Float(_) => panic!("mode lost"),
        }
        let float = chain.map_scalar(|p| p.to_f64()).unwrap();
        let file = chain_to_file(&float);
        assert_eq!(file.rows[0][1], serde_json::json!(0.75));
        assert!(matches!(chain_from_file(&file).unwrap(), AnyChain::Float(_)));
    }

    #[test]
    fn file_validation() {
        let bad_entry = r#"{"states": 1, "mode": "exact", "rows": [[1]]}"#;
        let file: ChainFile = serde_json::from_str(bad_entry).unwrap();
        assert!(chain_from_file(&file).is_err());
        let extra = r#"{"states": 1, "mode": "exact", "rows": [["1"]], "name": "x"}"#;
        assert!(serde_json::from_str::<ChainFile>(extra).is_err());
        let not_stochastic = r#"{"states": 2, "mode": "exact", "rows": [["1/2","1/3"],["1/2","1/2"]]}"#;
        let file: ChainFile = serde_json::from_str(not_stochastic).unwrap();
        assert!(chain_from_file(&file).is_err());
    }

    #[test]
    fn generators() {
        assert_eq!(generate("lazy-torus(3,1)").unwrap().n_states(), 3);
        assert_eq!(generate("lazy-torus(4, 2)").unwrap().n_states(), 16);
        assert_eq!(generate("biased-cycle(16,3/4)").unwrap().n_states(), 16);
        assert_eq!(generate("gnm(2,12,lazy)").unwrap().n_states(), 48);
        assert_eq!(generate("gnm(2,12,plain,both)").unwrap().n_states(), 48);
        assert!(generate("gnm(2,12,sleepy)").is_err());
        assert!(generate("torus(3)").is_err());
        let float = load_chain("biased-cycle(4,0.75)", Some(NumericMode::Float)).unwrap();
        assert_eq!(float.mode(), NumericMode::Float);
    }
}
