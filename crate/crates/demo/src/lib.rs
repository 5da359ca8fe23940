//! Browser demo: generate a pair, classify or canonicalize it, and plot P(λ).
//!
//! The plain functions are usable natively; the `wasm` module wraps them for
//! JavaScript.

use bimetric3::classifier::ClassId;
use bimetric3::document::{canonicalize_document, classify_document, PairDocument, PairInput};
use bimetric3::invariants::{associated_operator, char_poly, CharPoly};
use bimetric3::numeric::{cubic_roots, FloatToleranceConfig};
use bimetric3::scalar::Field;
use bimetric3::testkit::{rng_from_seed, sample_with};
use serde::Serialize;

pub type DemoResult = Result<String, String>;

fn parse_pair(json: &str) -> Result<PairInput, String> {
    let doc: PairDocument = serde_json::from_str(json).map_err(|e| format!("invalid pair: {e}"))?;
    doc.to_pair(None).map_err(|e| e.to_string())
}

fn pretty<T: Serialize>(v: &T) -> DemoResult {
    Ok(bimetric3::document::to_json(v))
}

/// Random exact pair of the given class (`"T5"`, `"5"` or the full name).
pub fn generate(class: &str, seed: u64, bound: i64) -> DemoResult {
    let class: ClassId = class.parse().map_err(|e: bimetric3::Error| e.to_string())?;
    let sample = sample_with(&mut rng_from_seed(seed), class, None, bound.max(1))
        .map_err(|e| e.to_string())?;
    pretty(&PairDocument::from_exact(&sample.pair, None))
}

pub fn classify(pair_json: &str) -> DemoResult {
    let input = parse_pair(pair_json)?;
    let doc =
        classify_document(&input, &FloatToleranceConfig::default()).map_err(|e| e.to_string())?;
    pretty(&doc)
}

pub fn canonicalize(pair_json: &str, tol: f64) -> DemoResult {
    let input = parse_pair(pair_json)?;
    let doc = canonicalize_document(&input, &FloatToleranceConfig::default(), tol)
        .map_err(|e| e.to_string())?;
    pretty(&doc)
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Real roots with multiplicities.
    pub roots: Vec<(f64, u8)>,
    /// Real and imaginary part of the upper complex root.
    pub complex: Option<(f64, f64)>,
}

/// Samples of the characteristic polynomial on a window around its roots.
pub fn curve(pair_json: &str, samples: usize) -> Result<Curve, String> {
    let coeffs: CharPoly<f64> = match parse_pair(pair_json)? {
        PairInput::Exact(p) => char_poly(&associated_operator(&p)).map(|v| v.to_f64()),
        PairInput::Float(p) => char_poly(&associated_operator(&p)),
    };
    let roots = cubic_roots(&coeffs, &FloatToleranceConfig::default());
    let mut marks: Vec<f64> = roots.real_roots.iter().map(|r| r.0).collect();
    if let Some((re, im)) = roots.complex_pair {
        marks.extend([re - im, re + im]);
    }
    let lo = marks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = marks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.25).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let n = samples.clamp(2, 4096);
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let ys = xs.iter().map(|x| coeffs.eval(x)).collect();
    Ok(Curve {
        xs,
        ys,
        roots: roots.real_roots,
        complex: roots.complex_pair,
    })
}

pub fn curve_json(pair_json: &str, samples: usize) -> DemoResult {
    pretty(&curve(pair_json, samples)?)
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    fn js(r: super::DemoResult) -> Result<String, JsError> {
        r.map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn generate(class: &str, seed: u32, bound: i32) -> Result<String, JsError> {
        js(super::generate(class, seed as u64, bound as i64))
    }

    #[wasm_bindgen]
    pub fn classify(pair_json: &str) -> Result<String, JsError> {
        js(super::classify(pair_json))
    }

    #[wasm_bindgen]
    pub fn canonicalize(pair_json: &str, tol: f64) -> Result<String, JsError> {
        js(super::canonicalize(pair_json, tol))
    }

    #[wasm_bindgen]
    pub fn curve(pair_json: &str, samples: u32) -> Result<String, JsError> {
        js(super::curve_json(pair_json, samples as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_then_canonicalize() {
        for c in ClassId::ALL {
            let pair = generate(c.name(), 11, 3).unwrap();
            let out: serde_json::Value =
                serde_json::from_str(&canonicalize(&pair, 1e-9).unwrap()).unwrap();
            assert_eq!(out["class"], c.name());
            assert!(out["residual"].as_f64().unwrap() <= 1e-9);
        }
    }

    #[test]
    fn classify_reports_errors_as_text() {
        let bad = r#"{"g":[["1","0","0"],["0","1","0"],["0","0","-1"]],"g_check":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#;
        assert_eq!(
            classify(bad).unwrap_err(),
            "signature (2,1,0), expected (1,2,0)"
        );
        assert!(generate("T11", 0, 5).is_err());
    }

    #[test]
    fn curve_brackets_roots() {
        let pair = r#"{"g":[[1,0,0],[0,-1,0],[0,0,-1]],"g_check":[[2,0,0],[0,1,0],[0,0,3]]}"#;
        let c = curve(pair, 200).unwrap();
        assert_eq!(c.xs.len(), 200);
        assert_eq!(c.roots.len(), 3);
        let (lo, hi) = (c.xs[0], c.xs[199]);
        assert!(c.roots.iter().all(|r| lo < r.0 && r.0 < hi));
        // P(λ) = −λ³ + …, so it falls to the right
        assert!(c.ys[199] < 0.0 && c.ys[0] > 0.0);
    }
}
