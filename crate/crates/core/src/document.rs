//! JSON documents exchanged by the command-line tool and the browser demo.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonicalize, canonicalize_float, CanonicalForm, CanonicalResult};
use crate::classifier::{class_conditions, class_from_report, classify_with_report, ClassId};
use crate::error::{Error, Result};
use crate::invariants::{InvariantReport, MetricPair, Mode};
use crate::matrix::{Matrix3, SymMatrix3};
use crate::numeric::{classify_float, float_pair, FloatClassification, FloatToleranceConfig};
use crate::scalar::{float_entry, Entry, Field, Scalar, Q};

pub type EntryMatrix = [[Entry; 3]; 3];

/// Input pair: string entries are exact rationals, numbers are binary64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDocument {
    pub g: EntryMatrix,
    pub g_check: EntryMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairInput {
    Exact(MetricPair<Q>),
    Float(MetricPair<f64>),
}

impl PairInput {
    pub fn mode(&self) -> Mode {
        match self {
            PairInput::Exact(_) => Mode::Exact,
            PairInput::Float(_) => Mode::Float,
        }
    }
}

fn entries_of<T: Field>(m: &SymMatrix3<T>, entry: impl Fn(&T) -> Entry) -> EntryMatrix {
    std::array::from_fn(|i| std::array::from_fn(|j| entry(m.get(i, j))))
}

fn exact_entries(m: &SymMatrix3<Q>) -> EntryMatrix {
    entries_of(m, |v| Entry::from(&Scalar::Exact(v.clone())))
}

fn float_entries(m: &SymMatrix3<f64>) -> EntryMatrix {
    entries_of(m, |v| float_entry(*v))
}

fn matrix_entries_float(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    *m.rows()
}

impl PairDocument {
    pub fn from_exact(pair: &MetricPair<Q>, label: Option<String>) -> Self {
        PairDocument {
            g: exact_entries(pair.g()),
            g_check: exact_entries(pair.g_check()),
            label,
        }
    }

    pub fn from_float(pair: &MetricPair<f64>, label: Option<String>) -> Self {
        PairDocument {
            g: float_entries(pair.g()),
            g_check: float_entries(pair.g_check()),
            label,
        }
    }

    /// Mode implied by the entries; a document may not mix strings and numbers.
    pub fn inferred_mode(&self) -> Result<Mode> {
        let all = self.g.iter().chain(self.g_check.iter()).flatten();
        let (mut text, mut num) = (false, false);
        for e in all {
            match e {
                Entry::Text(_) => text = true,
                Entry::Number(_) => num = true,
            }
        }
        match (text, num) {
            (true, true) => Err(Error::Parse(
                "document mixes string (exact) and number (float) entries".into(),
            )),
            (true, false) => Ok(Mode::Exact),
            _ => Ok(Mode::Float),
        }
    }

    /// Validated pair in the inferred mode, or in `force` when given.
    pub fn to_pair(&self, force: Option<Mode>) -> Result<PairInput> {
        let inferred = self.inferred_mode()?;
        match force.unwrap_or(inferred) {
            Mode::Exact => {
                let read = |m: &EntryMatrix| -> Result<SymMatrix3<Q>> {
                    let mut rows: [[Q; 3]; 3] = Default::default();
                    for i in 0..3 {
                        for j in 0..3 {
                            rows[i][j] = m[i][j].to_exact()?;
                        }
                    }
                    SymMatrix3::from_rows(rows)
                };
                Ok(PairInput::Exact(MetricPair::new(
                    read(&self.g)?,
                    read(&self.g_check)?,
                )?))
            }
            Mode::Float => {
                let read = |m: &EntryMatrix| -> Result<[[f64; 3]; 3]> {
                    let mut rows = [[0.0; 3]; 3];
                    for i in 0..3 {
                        for j in 0..3 {
                            rows[i][j] = m[i][j].to_float()?;
                        }
                    }
                    Ok(rows)
                };
                Ok(PairInput::Float(float_pair(
                    read(&self.g)?,
                    read(&self.g_check)?,
                    1e-12,
                )?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantsDoc {
    pub a0: Entry,
    pub a1: Entry,
    pub a2: Entry,
    #[serde(rename = "D2")]
    pub d2: Entry,
    #[serde(rename = "D3")]
    pub d3: Entry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma3: Option<i8>,
}

impl InvariantsDoc {
    fn from_report<T: Field>(r: &InvariantReport<T>) -> Self {
        let e = |v: &T| Entry::from(&v.clone().into_scalar());
        InvariantsDoc {
            a0: e(&r.coeffs.a0),
            a1: e(&r.coeffs.a1),
            a2: e(&r.coeffs.a2),
            d2: e(&r.d2),
            d3: e(&r.d3),
            sigma0: r.sigma0,
            sigma1: r.sigma1,
            sigma2: r.sigma2,
            sigma3: r.sigma3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDoc {
    pub g: EntryMatrix,
    pub g_check: EntryMatrix,
    pub params: BTreeMap<String, Entry>,
}

impl CanonicalDoc {
    pub fn from_form(form: &CanonicalForm<Scalar>) -> Self {
        let (g, g_check) = match form.to_exact() {
            Some(f) => (
                exact_entries(&f.canonical_g()),
                exact_entries(&f.canonical_g_check()),
            ),
            None => {
                let f = form.to_f64();
                (
                    float_entries(&f.canonical_g()),
                    float_entries(&f.canonical_g_check()),
                )
            }
        };
        let params = form
            .class
            .param_names()
            .iter()
            .zip(&form.params)
            .map(|(n, v)| (n.to_string(), Entry::from(v)))
            .collect();
        CanonicalDoc { g, g_check, params }
    }

    /// Parameters in the class's order, as binary64.
    pub fn params_for(&self, class: ClassId) -> Result<Vec<f64>> {
        class
            .param_names()
            .iter()
            .map(|n| {
                self.params
                    .get(*n)
                    .ok_or_else(|| Error::Parse(format!("canonical params lack '{n}'")))?
                    .to_float()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub class: ClassId,
    pub conditions: String,
    pub invariants: InvariantsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub mode: Mode,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ResultDocument {
    fn new<T: Field>(class: ClassId, report: &InvariantReport<T>, mode: Mode) -> Self {
        ResultDocument {
            class,
            conditions: class_conditions(class).to_string(),
            invariants: InvariantsDoc::from_report(report),
            canonical: None,
            transform: None,
            residual: None,
            mode,
            warnings: Vec::new(),
        }
    }

    fn with_canonical(mut self, r: &CanonicalResult) -> Self {
        self.canonical = Some(CanonicalDoc::from_form(&r.form));
        self.transform = Some(matrix_entries_float(&r.transform));
        self.residual = Some(r.residual);
        if !r.form.is_exact() && self.mode == Mode::Exact {
            self.warnings
                .push("canonical parameters are irrational; reported as binary64".into());
        }
        self
    }

    fn from_float(fc: &FloatClassification) -> Self {
        let mut doc = ResultDocument::new(fc.class, &fc.report, Mode::Float);
        doc.warnings.extend(fc.notes.iter().cloned());
        doc
    }
}

pub fn classify_document(input: &PairInput, cfg: &FloatToleranceConfig) -> Result<ResultDocument> {
    match input {
        PairInput::Exact(p) => {
            let (class, report) = classify_with_report(p)?;
            Ok(ResultDocument::new(class, &report, Mode::Exact))
        }
        PairInput::Float(p) => Ok(ResultDocument::from_float(&classify_float(p, cfg)?)),
    }
}

pub fn canonicalize_document(
    input: &PairInput,
    cfg: &FloatToleranceConfig,
    tol: f64,
) -> Result<ResultDocument> {
    match input {
        PairInput::Exact(p) => {
            let (class, report) = classify_with_report(p)?;
            let r = canonicalize(p, tol)?;
            Ok(ResultDocument::new(class, &report, Mode::Exact).with_canonical(&r))
        }
        PairInput::Float(p) => {
            let (r, fc) = canonicalize_float(p, cfg, tol)?;
            Ok(ResultDocument::from_float(&fc).with_canonical(&r))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn read_float_matrix(m: &EntryMatrix) -> Result<SymMatrix3<f64>> {
    let mut rows = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            rows[i][j] = m[i][j].to_float()?;
        }
    }
    Ok(SymMatrix3::symmetrize(&Matrix3::from_rows(rows)))
}

/// Checks a result against its pair: the declared class agrees with freshly
/// computed invariants, the canonical matrices follow the class pattern, and
/// the transform reproduces them within `tol`.
pub fn verify_documents(
    pair: &PairDocument,
    result: &ResultDocument,
    cfg: &FloatToleranceConfig,
    tol: f64,
) -> Result<VerifyReport> {
    let input = pair.to_pair(Some(result.mode))?;
    let mut checks = Vec::new();

    let recomputed = match &input {
        PairInput::Exact(p) => classify_with_report(p).map(|(c, _)| c),
        PairInput::Float(p) => classify_float(p, cfg).and_then(|fc| class_from_report(&fc.report)),
    };
    checks.push(match recomputed {
        Ok(c) if c == result.class => Check {
            name: "conditions".into(),
            pass: true,
            detail: format!("{} holds ({})", result.class, class_conditions(c)),
        },
        Ok(c) => Check {
            name: "conditions".into(),
            pass: false,
            detail: format!(
                "condition mismatch: declared {} ({}) but recomputed invariants give {} ({})",
                result.class,
                class_conditions(result.class),
                c,
                class_conditions(c)
            ),
        },
        Err(e) => Check {
            name: "conditions".into(),
            pass: false,
            detail: format!("invariants could not be recomputed: {e}"),
        },
    });

    let (Some(canonical), Some(transform)) = (&result.canonical, &result.transform) else {
        checks.push(Check {
            name: "residual".into(),
            pass: false,
            detail: "result has no canonical form or transform".into(),
        });
        return Ok(VerifyReport { checks });
    };
    let can_g = read_float_matrix(&canonical.g)?;
    let can_gc = read_float_matrix(&canonical.g_check)?;

    let pattern = canonical
        .params_for(result.class)
        .and_then(|p| CanonicalForm::new(result.class, p));
    checks.push(match pattern {
        Ok(form) => {
            let dev = form
                .canonical_g()
                .sub(&can_g)
                .max_abs()
                .max(form.canonical_g_check().sub(&can_gc).max_abs());
            let ok = dev <= tol;
            Check {
                name: "pattern".into(),
                pass: ok,
                detail: if ok {
                    format!("canonical matrices match the {} pattern", result.class)
                } else {
                    format!(
                        "canonical matrices deviate from the {} pattern by {dev:.3e}",
                        result.class
                    )
                },
            }
        }
        Err(e) => Check {
            name: "pattern".into(),
            pass: false,
            detail: format!("canonical params invalid: {e}"),
        },
    });

    let t = Matrix3::from_rows(*transform);
    let (g, gc) = match &input {
        PairInput::Exact(p) => (p.g().to_f64(), p.g_check().to_f64()),
        PairInput::Float(p) => (p.g().clone(), p.g_check().clone()),
    };
    let residual = g
        .congruence(&t)
        .sub(&can_g)
        .max_abs()
        .max(gc.congruence(&t).sub(&can_gc).max_abs());
    let ok = residual <= tol && t.det() != 0.0;
    checks.push(Check {
        name: "residual".into(),
        pass: ok,
        detail: format!(
            "residual {residual:.3e} {} tolerance {tol:.3e}",
            if ok { "within" } else { "exceeds" }
        ),
    });
    Ok(VerifyReport { checks })
}

/// Pretty JSON with arrays of scalars kept on one line, so matrices read as rows.
pub fn to_json<T: Serialize>(value: &T) -> String {
    static FLAT: OnceLock<Regex> = OnceLock::new();
    let flat = FLAT.get_or_init(|| Regex::new(r#"\[\s*((?:"[^"]*"|[^\[\]{}"])*?)\s*\]"#).unwrap());
    let pretty = serde_json::to_string_pretty(value).expect("documents serialize");
    let mut s = flat
        .replace_all(&pretty, |c: &regex::Captures| {
            let inner: Vec<&str> = c[1].split(",\n").map(str::trim).collect();
            format!("[{}]", inner.join(", "))
        })
        .into_owned();
    s.push('\n');
    s
}
