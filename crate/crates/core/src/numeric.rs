//! Binary64 root finding and tolerance-based classification for decimal input.

use nalgebra::Matrix3 as NaMatrix3;
use serde::{Deserialize, Serialize};

use crate::classifier::{class_from_report, ClassId};
use crate::error::{Error, Result};
use crate::invariants::{
    associated_operator, char_poly, discriminant_d2, discriminant_d3, Branch, CharPoly,
    InvariantReport, MetricPair,
};
use crate::matrix::{kernel_of_rows, norm_f64, null_vector, Matrix3, SymMatrix3, Vector3};

/// Real roots with multiplicities and at most one complex-conjugate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicRoots {
    /// Ascending by value.
    pub real_roots: Vec<(f64, u8)>,
    /// `(re, im)` with `im > 0`.
    pub complex_pair: Option<(f64, f64)>,
}

impl CubicRoots {
    pub fn distinct_real(&self) -> usize {
        self.real_roots.len()
    }

    pub fn multiplicities(&self) -> Vec<u8> {
        self.real_roots.iter().map(|r| r.1).collect()
    }

    /// All three roots as `(re, im)` with multiplicity expanded.
    pub fn expanded(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(3);
        for &(v, m) in &self.real_roots {
            out.extend(std::iter::repeat_n((v, 0.0), m as usize));
        }
        if let Some((re, im)) = self.complex_pair {
            out.push((re, im));
            out.push((re, -im));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatToleranceConfig {
    pub tol: f64,
}

impl Default for FloatToleranceConfig {
    fn default() -> Self {
        FloatToleranceConfig { tol: 1e-10 }
    }
}

impl FloatToleranceConfig {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Parse(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(FloatToleranceConfig { tol })
    }

    /// Eigenvalue scale `s = max(1, |a0|, |a1|^½, |a2|^⅓)`.
    pub fn scale(c: &CharPoly<f64>) -> f64 {
        1f64.max(c.a0.abs())
            .max(c.a1.abs().sqrt())
            .max(c.a2.abs().cbrt())
    }

    pub fn d3_threshold(&self, s: f64) -> f64 {
        self.tol * s.powi(6)
    }

    pub fn d2_threshold(&self, s: f64) -> f64 {
        self.tol * s * s
    }

    /// Two real roots closer than this are one double root.
    pub fn pair_cluster(&self, s: f64) -> f64 {
        self.tol.sqrt() * s
    }

    /// Three real roots spread less than this are one triple root.
    pub fn triple_cluster(&self, s: f64) -> f64 {
        self.tol.cbrt() * s
    }

    /// Relative magnitude below which a σ pivot counts as zero.
    pub fn sigma_threshold(&self) -> f64 {
        self.tol.sqrt()
    }
}

fn newton_polish(c: &CharPoly<f64>, mut x: f64) -> f64 {
    for _ in 0..3 {
        let p = c.eval(&x);
        let dp = c.derivative(&x);
        if dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() || c.eval(&next).abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Roots of `−λ³ + a0λ² − a1λ + a2` by the trigonometric or Cardano formula
/// on the depressed cubic, polished by Newton steps and clustered into
/// multiple roots at the configured tolerances.
pub fn cubic_roots(c: &CharPoly<f64>, cfg: &FloatToleranceConfig) -> CubicRoots {
    let s = FloatToleranceConfig::scale(c);
    let shift = c.a0 / 3.0;
    // λ = y + a0/3 turns the monic cubic into y³ + p·y + q
    let p = c.a1 - c.a0 * c.a0 / 3.0;
    let q = -2.0 * c.a0.powi(3) / 27.0 + c.a0 * c.a1 / 3.0 - c.a2;
    let disc = -(4.0 * p.powi(3) + 27.0 * q * q);

    let mut reals: Vec<f64>;
    let mut complex = None;
    if p == 0.0 && q == 0.0 {
        reals = vec![shift; 3];
    } else if disc >= 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        reals = (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect();
    } else {
        let root = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        let a = -q.signum() * (q.abs() / 2.0 + root).cbrt();
        let b = if a == 0.0 { 0.0 } else { -p / (3.0 * a) };
        let y0 = a + b;
        let im = (3.0 * y0 * y0 + 4.0 * p).max(0.0).sqrt() / 2.0;
        reals = vec![y0 + shift];
        complex = Some((-y0 / 2.0 + shift, im));
    }
    for r in reals.iter_mut() {
        *r = newton_polish(c, *r);
    }

    if let Some((re, im)) = complex {
        if im <= cfg.pair_cluster(s) {
            reals.push(re);
            reals.push(re);
            complex = None;
        }
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let real_roots = if reals.len() == 3 && reals[2] - reals[0] <= cfg.triple_cluster(s) {
        vec![(c.a0 / 3.0, 3)]
    } else {
        let mut out: Vec<(f64, u8)> = Vec::new();
        for r in reals {
            match out.last_mut() {
                Some((v, m)) if (r - *v).abs() <= cfg.pair_cluster(s) => {
                    *v = (*v * *m as f64 + r) / (*m as f64 + 1.0);
                    *m += 1;
                }
                _ => out.push((r, 1)),
            }
        }
        // a double root is better conditioned as (a0 − simple)/2
        if out.len() == 2 {
            let (di, si) = if out[0].1 == 2 { (0, 1) } else { (1, 0) };
            out[di].0 = (c.a0 - out[si].0) / 2.0;
        }
        out
    };
    CubicRoots {
        real_roots,
        complex_pair: complex,
    }
}

/// Critical points `a0/3 ∓ √D2/6` of `P`.
pub fn critical_points(c: &CharPoly<f64>) -> Result<(f64, f64)> {
    let d2 = discriminant_d2(c);
    if d2 <= 0.0 {
        return Err(Error::precondition("D2 must be positive"));
    }
    let h = d2.sqrt() / 6.0;
    Ok((c.a0 / 3.0 - h, c.a0 / 3.0 + h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatClassification {
    pub class: ClassId,
    pub report: InvariantReport<f64>,
    pub roots: CubicRoots,
    /// Quantities that came within 10× of a threshold.
    pub notes: Vec<String>,
}

impl FloatClassification {
    pub fn is_flagged(&self) -> bool {
        !self.notes.is_empty()
    }
}

/// Zero/sign decision with a tenfold ambiguity band above `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decision {
    Zero { near_threshold: bool },
    Sign(i8),
    Band,
}

fn decide(v: f64, threshold: f64) -> Decision {
    let a = v.abs();
    if a <= threshold {
        Decision::Zero {
            near_threshold: a > 0.0,
        }
    } else if a <= 10.0 * threshold {
        Decision::Band
    } else {
        Decision::Sign(if v > 0.0 { 1 } else { -1 })
    }
}

fn form_scale(pair: &MetricPair<f64>, lambda: f64) -> f64 {
    (pair.g_check().max_abs() + lambda.abs() * pair.g().max_abs()).max(f64::MIN_POSITIVE)
}

fn sigma0_float(
    pair: &MetricPair<f64>,
    f: &Matrix3<f64>,
    lambda: f64,
    t: f64,
) -> Result<(i8, Vector3<f64>)> {
    let v = null_vector(&f.shifted(&lambda));
    let n = norm_f64(&v);
    if n == 0.0 {
        return Err(Error::AmbiguousClassification(
            "no well-defined simple eigenvector".into(),
        ));
    }
    let rel = pair.g().quadratic(&v) / (n * n * pair.g().max_abs());
    match decide(rel, t) {
        Decision::Sign(s) => Ok((s, v)),
        _ => Err(Error::AmbiguousClassification(format!(
            "simple eigenvector is nearly null (g(v,v)/|v|² = {rel:.3e})"
        ))),
    }
}

/// Sign of the restricted form `(ǧ − λ·g)|W`, which has rank at most one.
fn sigma1_float(pair: &MetricPair<f64>, lambda: f64, v: &Vector3<f64>, t: f64) -> Result<i8> {
    let gv = pair.g().to_matrix().mul_vec(v);
    let w = kernel_of_rows(vec![gv.to_vec()], 1e-12);
    let h = pair.g_check().sub(&pair.g().scale(&lambda));
    let scale = form_scale(pair, lambda);
    let tr: f64 = w
        .iter()
        .map(|x| h.quadratic(x) / (norm_f64(x).powi(2) * scale))
        .sum();
    match decide(tr, t) {
        Decision::Zero { .. } => Ok(0),
        Decision::Sign(s) => Ok(s),
        Decision::Band => Err(Error::AmbiguousClassification(format!(
            "restricted form (ǧ − λ·g)|W is near the zero threshold ({tr:.3e})"
        ))),
    }
}

fn sigma2_float(f: &Matrix3<f64>, lambda: f64, t: f64) -> Result<u8> {
    let n = f.shifted(&lambda);
    let na = NaMatrix3::from_fn(|i, j| n[(i, j)]);
    let scale = f.max_abs().max(lambda.abs()).max(1.0);
    let mut rank = 0;
    for sv in na.singular_values().iter() {
        match decide(sv / scale, t) {
            Decision::Zero { .. } => {}
            Decision::Sign(_) => rank += 1,
            Decision::Band => {
                return Err(Error::AmbiguousClassification(format!(
                    "singular value {sv:.3e} of F − λ0·I is near the rank threshold"
                )))
            }
        }
    }
    if rank == 3 {
        return Err(Error::AmbiguousClassification(
            "F − λ0·I is numerically invertible at the triple root".into(),
        ));
    }
    Ok(rank)
}

/// Sign of the rank-one form `ǧ − λ0·g`, read off its trace.
fn sigma3_float(pair: &MetricPair<f64>, lambda: f64, t: f64) -> Result<i8> {
    let h = pair.g_check().sub(&pair.g().scale(&lambda));
    let tr = (0..3).map(|i| *h.get(i, i)).sum::<f64>() / form_scale(pair, lambda);
    match decide(tr, t) {
        Decision::Sign(s) => Ok(s),
        _ => Err(Error::AmbiguousClassification(format!(
            "rank-one form ǧ − λ0·g is nearly zero ({tr:.3e})"
        ))),
    }
}

/// Same decision tree as the exact classifier with `|D3| ≤ tol·s⁶` read as
/// `D3 = 0` and `|D2| ≤ tol·s²` as `D2 = 0`.
pub fn classify_float(
    pair: &MetricPair<f64>,
    cfg: &FloatToleranceConfig,
) -> Result<FloatClassification> {
    let op = associated_operator(pair);
    let coeffs = char_poly(&op);
    let s = FloatToleranceConfig::scale(&coeffs);
    let d2 = discriminant_d2(&coeffs);
    let d3 = discriminant_d3(&coeffs);
    let t = cfg.sigma_threshold();
    let mut notes = Vec::new();
    let mut note_if_near = |name: &str, v: f64, thr: f64| {
        if v != 0.0 && v.abs() <= 10.0 * thr {
            notes.push(format!(
                "{name} = {v:.3e} is within 10x of its threshold {thr:.3e}"
            ));
        }
    };
    let thr3 = cfg.d3_threshold(s);
    let thr2 = cfg.d2_threshold(s);
    note_if_near("D3", d3, thr3);

    let mut report = InvariantReport {
        coeffs: coeffs.clone(),
        d2,
        d3,
        sigma0: None,
        sigma1: None,
        sigma2: None,
        sigma3: None,
        branch: Branch::ThreeDistinct,
    };
    if d3.abs() <= thr3 {
        note_if_near("D2", d2, thr2);
        if d2 < -thr2 {
            return Err(Error::AmbiguousClassification(format!(
                "D3 = {d3:.3e} is within tolerance of zero but D2 = {d2:.3e} < 0"
            )));
        }
        if d2 > thr2 {
            let double = coeffs.double_root_formula();
            let simple = coeffs.a0 - 2.0 * double;
            let (s0, v) = sigma0_float(pair, &op.f, simple, t)?;
            report.sigma0 = Some(s0);
            if s0 < 0 {
                report.sigma1 = Some(sigma1_float(pair, double, &v, t)?);
            }
            report.branch = Branch::SimpleDouble { simple, double };
        } else {
            let root = coeffs.a0 / 3.0;
            let s2 = sigma2_float(&op.f, root, t)?;
            report.sigma2 = Some(s2);
            if s2 == 1 {
                report.sigma3 = Some(sigma3_float(pair, root, t)?);
            }
            report.branch = Branch::Triple { root };
        }
    } else if d3 < 0.0 {
        report.branch = Branch::ComplexPair;
    }
    let class = class_from_report(&report)?;
    Ok(FloatClassification {
        class,
        roots: cubic_roots(&coeffs, cfg),
        report,
        notes,
    })
}

/// Float pair from decimal matrices, symmetrising asymmetry up to `1e−12`.
pub fn float_pair(g: [[f64; 3]; 3], g_check: [[f64; 3]; 3], tol: f64) -> Result<MetricPair<f64>> {
    let sym = |m: [[f64; 3]; 3], name: &str| -> Result<SymMatrix3<f64>> {
        let scale = m.iter().flatten().fold(1f64, |a, v| a.max(v.abs()));
        for i in 0..3 {
            for j in 0..i {
                if (m[i][j] - m[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::Parse(format!("{name} is not symmetric")));
                }
            }
        }
        Ok(SymMatrix3::symmetrize(&Matrix3::from_rows(m)))
    };
    MetricPair::with_tolerance(sym(g, "g")?, sym(g_check, "g_check")?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(a0: f64, a1: f64, a2: f64) -> CharPoly<f64> {
        CharPoly::new(a0, a1, a2)
    }

    fn cfg() -> FloatToleranceConfig {
        FloatToleranceConfig::default()
    }

    fn diag(d: [f64; 3]) -> [[f64; 3]; 3] {
        [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
    }

    const MINK: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];

    #[test]
    fn cubic_roots_examples() {
        let r = cubic_roots(&cp(-2.0, -5.0, 6.0), &cfg());
        assert!(r.complex_pair.is_none());
        let want = [-3.0, -1.0, 2.0];
        for (got, w) in r.real_roots.iter().zip(want) {
            assert!((got.0 - w).abs() < 1e-12 && got.1 == 1);
        }
        assert_eq!(
            cubic_roots(&cp(3.0, 3.0, 1.0), &cfg()).real_roots,
            vec![(1.0, 3)]
        );
        let r = cubic_roots(&cp(0.0, 1.0, 0.0), &cfg());
        assert_eq!(r.real_roots.len(), 1);
        assert!(r.real_roots[0].0.abs() < 1e-12);
        let (re, im) = r.complex_pair.unwrap();
        assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_roots_double() {
        let r = cubic_roots(&cp(5.0, 8.0, 4.0), &cfg());
        assert_eq!(r.multiplicities(), vec![1, 2]);
        assert!((r.real_roots[0].0 - 1.0).abs() < 1e-9);
        assert!((r.real_roots[1].0 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn critical_points_examples() {
        assert_eq!(critical_points(&cp(0.0, -3.0, 0.0)).unwrap(), (-1.0, 1.0));
        let (lo, hi) = critical_points(&cp(5.0, 8.0, 4.0)).unwrap();
        assert!((lo - 4.0 / 3.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!(critical_points(&cp(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn classify_float_examples() {
        let p = float_pair(MINK, diag([2.0, 1.0, 3.0]), 1e-12).unwrap();
        assert_eq!(classify_float(&p, &cfg()).unwrap().class, ClassId::T1);
        let p = float_pair(MINK, MINK, 1e-12).unwrap();
        let c = classify_float(&p, &cfg()).unwrap();
        assert_eq!(c.class, ClassId::T7);
        assert!(!c.is_flagged());
        let p = float_pair(MINK, diag([2.0, 1.0, 1.0 + 1e-15]), 1e-12).unwrap();
        let c = classify_float(&p, &cfg()).unwrap();
        assert_eq!(c.class, ClassId::T2);
        assert!(c.is_flagged(), "expected an ambiguity note");
    }

    #[test]
    fn classify_float_jordan_classes() {
        let hyp = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]];
        let cases = [
            (
                [[1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -2.0]],
                ClassId::T5,
            ),
            (
                [[0.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, -2.0]],
                ClassId::T6,
            ),
            (
                [[1.0, 2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, -2.0]],
                ClassId::T8,
            ),
            (
                [[0.0, 2.0, 0.0], [2.0, -1.0, 0.0], [0.0, 0.0, -2.0]],
                ClassId::T9,
            ),
            (
                [[0.0, 2.0, 0.0], [2.0, 0.0, 1.0], [0.0, 1.0, -2.0]],
                ClassId::T10,
            ),
        ];
        for (gc, want) in cases {
            let p = float_pair(hyp, gc, 1e-12).unwrap();
            assert_eq!(classify_float(&p, &cfg()).unwrap().class, want);
        }
        let p = float_pair(MINK, diag([1.0, -1.0, 2.0]), 1e-12).unwrap();
        assert_eq!(classify_float(&p, &cfg()).unwrap().class, ClassId::T4);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut gc = diag([1.0, 2.0, 3.0]);
        gc[0][1] = 1e-3;
        assert!(float_pair(MINK, gc, 1e-12).is_err());
        gc[0][1] = 1e-14;
        assert!(float_pair(MINK, gc, 1e-12).is_ok());
    }
}
