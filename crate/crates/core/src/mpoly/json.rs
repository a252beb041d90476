//! Polynomial file format:
//! `{"vars":["x","y","z"],"terms":[["c",ex,ey,ez],...]}`, `c` a decimal
//! integer string.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::MPoly;

#[derive(Debug, thiserror::Error)]
pub enum PolyFormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown variable {0:?}; expected x, y or z")]
    UnknownVar(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVar(String),
    #[error("term {index}: {reason}")]
    BadTerm { index: usize, reason: String },
    #[error("coefficient {0:?} is not a decimal integer")]
    BadCoefficient(String),
    #[error("polynomial has non-integer coefficient {0}")]
    NonInteger(BigRational),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFile {
    pub vars: Vec<String>,
    pub terms: Vec<Value>,
}

impl PolyFile {
    pub fn parse(text: &str) -> Result<MPoly, PolyFormatError> {
        let file: PolyFile = serde_json::from_str(text)?;
        file.to_poly()
    }

    pub fn to_poly(&self) -> Result<MPoly, PolyFormatError> {
        let mut slots = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let idx = match v.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => return Err(PolyFormatError::UnknownVar(v.clone())),
            };
            if slots.contains(&idx) {
                return Err(PolyFormatError::DuplicateVar(v.clone()));
            }
            slots.push(idx);
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (index, t) in self.terms.iter().enumerate() {
            let bad = |reason: &str| PolyFormatError::BadTerm { index, reason: reason.to_string() };
            let arr = t.as_array().ok_or_else(|| bad("not an array"))?;
            if arr.len() != slots.len() + 1 {
                return Err(bad("wrong number of entries"));
            }
            let cs = arr[0].as_str().ok_or_else(|| bad("coefficient must be a string"))?;
            let c = parse_integer(cs)?;
            let mut e = [0u32; 3];
            for (k, slot) in slots.iter().enumerate() {
                let v = arr[k + 1].as_u64().ok_or_else(|| bad("exponent must be a non-negative integer"))?;
                e[*slot] = u32::try_from(v).map_err(|_| bad("exponent too large"))?;
            }
            terms.push((e, BigRational::from_integer(c)));
        }
        Ok(MPoly::from_terms(terms))
    }

    /// Canonical file for an integer polynomial: vars `x, y, z`, terms in
    /// ascending exponent order.
    pub fn from_poly(p: &MPoly) -> Result<PolyFile, PolyFormatError> {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (e, c) in p.terms() {
            if !c.is_integer() {
                return Err(PolyFormatError::NonInteger(c.clone()));
            }
            terms.push(serde_json::json!([c.numer().to_string(), e[0], e[1], e[2]]));
        }
        Ok(PolyFile { vars: vec!["x".into(), "y".into(), "z".into()], terms })
    }

    pub fn to_json(p: &MPoly) -> Result<String, PolyFormatError> {
        Ok(serde_json::to_string(&Self::from_poly(p)?)?)
    }
}

fn parse_integer(s: &str) -> Result<BigInt, PolyFormatError> {
    let digits = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(PolyFormatError::BadCoefficient(s.to_string()));
    }
    s.parse::<BigInt>().map_err(|_| PolyFormatError::BadCoefficient(s.to_string()))
}

impl MPoly {
    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms().all(|(_, c)| c.is_integer() || c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_cusp_file() {
        let text = r#"{"vars":["x","y","z"],"terms":[["1",0,0,3],["1",1,0,1],["1",0,1,0]]}"#;
        let p = PolyFile::parse(text).unwrap();
        assert_eq!(p, MPoly::from_int_terms(&[(1, 0, 0, 3), (1, 1, 0, 1), (1, 0, 1, 0)]));
        // canonical text round-trips byte for byte
        let canon = PolyFile::to_json(&p).unwrap();
        assert_eq!(PolyFile::to_json(&PolyFile::parse(&canon).unwrap()).unwrap(), canon);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            PolyFile::parse(r#"{"vars":["x","w"],"terms":[]}"#),
            Err(PolyFormatError::UnknownVar(_))
        ));
        assert!(matches!(
            PolyFile::parse(r#"{"vars":["x"],"terms":[["1.5",1]]}"#),
            Err(PolyFormatError::BadCoefficient(_))
        ));
        assert!(matches!(
            PolyFile::parse(r#"{"vars":["x"],"terms":[[1,1]]}"#),
            Err(PolyFormatError::BadTerm { .. })
        ));
        // partial var lists map by name
        let p = PolyFile::parse(r#"{"vars":["z","x"],"terms":[["-7",2,1]]}"#).unwrap();
        assert_eq!(p, MPoly::from_int_terms(&[(-7, 1, 0, 2)]));
    }

    proptest! {
        #[test]
        fn roundtrip_is_exact(terms in proptest::collection::vec((-(1i64<<40)..(1i64<<40), 0u32..5, 0u32..5, 0u32..5), 0..12)) {
            let p = MPoly::from_int_terms(&terms);
            let text = PolyFile::to_json(&p).unwrap();
            let back = PolyFile::parse(&text).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(PolyFile::to_json(&back).unwrap(), text);
        }
    }
}
