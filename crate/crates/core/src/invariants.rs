//! The associated operator `F = G⁻¹Ǧ` of a metric pair, its characteristic
//! polynomial, the discriminants `D2`/`D3`, closed-form degenerate roots and
//! the discrete σ invariants.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::matrix::{
    count_signs, diagonalize_congruence, orthogonal_complement, Matrix3, SignatureTriple,
    SymMatrix3, Vector3,
};
use crate::scalar::{sign_of, Field, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Exact,
    Float,
}

/// Validated pair `(g, ǧ)`: `g` has signature `(+,−,−)`, `ǧ` is any symmetric form.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPair<T> {
    g: SymMatrix3<T>,
    g_check: SymMatrix3<T>,
    g_inv: Matrix3<T>,
}

impl<T: Field> MetricPair<T> {
    /// Validates the signature of `g` at relative tolerance `tol` (ignored for
    /// exact scalars).
    pub fn with_tolerance(g: SymMatrix3<T>, g_check: SymMatrix3<T>, tol: f64) -> Result<Self> {
        let found = g.signature_tol(tol);
        if found != SignatureTriple::MINKOWSKI {
            return Err(Error::InvalidSignature { found });
        }
        let g_inv = g.to_matrix().inverse_tol(tol)?;
        Ok(MetricPair { g, g_check, g_inv })
    }

    pub fn g(&self) -> &SymMatrix3<T> {
        &self.g
    }

    pub fn g_check(&self) -> &SymMatrix3<T> {
        &self.g_check
    }

    pub fn g_inverse(&self) -> &Matrix3<T> {
        &self.g_inv
    }

    pub fn mode(&self) -> Mode {
        if T::EXACT {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    /// Both forms expressed in the basis given by the columns of `t`.
    pub fn congruent(&self, t: &Matrix3<T>, tol: f64) -> Result<Self> {
        MetricPair::with_tolerance(self.g.congruence(t), self.g_check.congruence(t), tol)
    }

    /// `(g, ǧ + t·g)`
    pub fn shifted(&self, t: &T) -> Self {
        MetricPair {
            g: self.g.clone(),
            g_check: self.g_check.add(&self.g.scale(t)),
            g_inv: self.g_inv.clone(),
        }
    }

    /// `(g, c·ǧ)`
    pub fn scaled(&self, c: &T) -> Self {
        MetricPair {
            g: self.g.clone(),
            g_check: self.g_check.scale(c),
            g_inv: self.g_inv.clone(),
        }
    }

    pub fn to_f64(&self) -> MetricPair<f64> {
        MetricPair {
            g: self.g.to_f64(),
            g_check: self.g_check.to_f64(),
            g_inv: self.g_inv.to_f64(),
        }
    }
}

impl MetricPair<Q> {
    pub fn new(g: SymMatrix3<Q>, g_check: SymMatrix3<Q>) -> Result<Self> {
        MetricPair::with_tolerance(g, g_check, 0.0)
    }
}

/// Components `F^i_j` of the associated operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator3<T> {
    pub f: Matrix3<T>,
}

impl<T: Field> Operator3<T> {
    /// `G·F` is symmetric exactly when `F` is self-adjoint for `g`.
    pub fn is_g_symmetric(&self, g: &SymMatrix3<T>, tol: f64) -> bool {
        let gf = g.to_matrix().matmul(&self.f);
        let threshold = tol * gf.max_abs();
        (0..3).all(|i| {
            (0..3).all(|j| (gf[(i, j)].clone() - gf[(j, i)].clone()).is_negligible(threshold))
        })
    }
}

pub fn associated_operator<T: Field>(pair: &MetricPair<T>) -> Operator3<T> {
    Operator3 {
        f: pair.g_inverse().matmul(&pair.g_check().to_matrix()),
    }
}

/// Coefficients of `P(λ) = det(F − λI) = −λ³ + a0·λ² − a1·λ + a2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly<T> {
    pub a0: T,
    pub a1: T,
    pub a2: T,
}

impl<T: Field> CharPoly<T> {
    pub fn new(a0: T, a1: T, a2: T) -> Self {
        CharPoly { a0, a1, a2 }
    }

    /// Monic cubic with the given roots, rewritten in the `P(λ)` sign convention.
    pub fn from_roots(r: [T; 3]) -> Self {
        let [x, y, z] = r;
        CharPoly {
            a0: x.clone() + y.clone() + z.clone(),
            a1: x.clone() * y.clone() + x.clone() * z.clone() + y.clone() * z.clone(),
            a2: x * y * z,
        }
    }

    pub fn eval(&self, lambda: &T) -> T {
        // ((−λ + a0)λ − a1)λ + a2
        ((-lambda.clone() + self.a0.clone()) * lambda.clone() - self.a1.clone()) * lambda.clone()
            + self.a2.clone()
    }

    /// `Q(λ) = P′(λ) = −3λ² + 2a0·λ − a1`
    pub fn derivative(&self, lambda: &T) -> T {
        let three = T::from_i64(3);
        let two = T::from_i64(2);
        -(three * lambda.clone() * lambda.clone()) + two * self.a0.clone() * lambda.clone()
            - self.a1.clone()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> CharPoly<U> {
        CharPoly {
            a0: f(&self.a0),
            a1: f(&self.a1),
            a2: f(&self.a2),
        }
    }

    pub fn to_f64(&self) -> CharPoly<f64> {
        self.map(|v| v.to_f64())
    }

    /// `2a0³ − 9a0a1 + 27a2`, the numerator shared by both degenerate-root formulas.
    fn cubic_term(&self) -> T {
        let (a0, a1, a2) = (&self.a0, &self.a1, &self.a2);
        T::from_i64(2) * a0.clone() * a0.clone() * a0.clone()
            - T::from_i64(9) * a0.clone() * a1.clone()
            + T::from_i64(27) * a2.clone()
    }

    /// Double root from the coefficients; meaningful only when `D3 = 0, D2 > 0`.
    pub fn double_root_formula(&self) -> T {
        let denom =
            T::from_i64(6) * self.a0.clone() * self.a0.clone() - T::from_i64(18) * self.a1.clone();
        self.a0.clone() / T::from_i64(3) - self.cubic_term() / denom
    }

    /// Simple root from the coefficients; meaningful only when `D3 = 0, D2 > 0`.
    pub fn simple_root_formula(&self) -> T {
        let denom =
            T::from_i64(3) * self.a0.clone() * self.a0.clone() - T::from_i64(9) * self.a1.clone();
        self.a0.clone() / T::from_i64(3) + self.cubic_term() / denom
    }
}

pub fn char_poly<T: Field>(op: &Operator3<T>) -> CharPoly<T> {
    let f = &op.f;
    let tr = f.trace();
    let tr_sq = f.matmul(f).trace();
    CharPoly {
        a0: tr.clone(),
        a1: (tr.clone() * tr - tr_sq) / T::from_i64(2),
        a2: f.det(),
    }
}

/// Discriminant of `P′`: `D2 = 4a0² − 12a1`.
pub fn discriminant_d2<T: Field>(c: &CharPoly<T>) -> T {
    T::from_i64(4) * c.a0.clone() * c.a0.clone() - T::from_i64(12) * c.a1.clone()
}

/// Discriminant of `P`:
/// `D3 = −27a2² + 18a0a1a2 + a1²a0² − 4a0³a2 − 4a1³`.
pub fn discriminant_d3<T: Field>(c: &CharPoly<T>) -> T {
    let (a0, a1, a2) = (c.a0.clone(), c.a1.clone(), c.a2.clone());
    let n = T::from_i64;
    -(n(27) * a2.clone() * a2.clone())
        + n(18) * a0.clone() * a1.clone() * a2.clone()
        + a1.clone() * a1.clone() * a0.clone() * a0.clone()
        - n(4) * a0.clone() * a0.clone() * a0 * a2
        - n(4) * a1.clone() * a1.clone() * a1
}

fn require_double_branch(c: &CharPoly<Q>) -> Result<()> {
    if !discriminant_d3(c).is_zero() {
        return Err(Error::precondition("D3 must vanish"));
    }
    if !discriminant_d2(c).is_positive() {
        return Err(Error::precondition("D2 must be positive"));
    }
    Ok(())
}

pub fn double_root(c: &CharPoly<Q>) -> Result<Q> {
    require_double_branch(c)?;
    Ok(c.double_root_formula())
}

pub fn simple_root(c: &CharPoly<Q>) -> Result<Q> {
    require_double_branch(c)?;
    Ok(c.simple_root_formula())
}

pub fn triple_root(c: &CharPoly<Q>) -> Result<Q> {
    if !discriminant_d3(c).is_zero() || !discriminant_d2(c).is_zero() {
        return Err(Error::precondition("D3 and D2 must both vanish"));
    }
    Ok(c.a0.clone() / Q::from_i64(3))
}

/// Spanning vector of `Ker(F − λI)`, checked to be one-dimensional.
pub fn simple_eigenvector(pair: &MetricPair<Q>, lambda: &Q) -> Result<Vector3<Q>> {
    let f = associated_operator(pair).f;
    let kernel = f.shifted(lambda).kernel_basis();
    if kernel.len() != 1 {
        return Err(Error::invariant(format!(
            "eigenspace of a simple eigenvalue has dimension {}",
            kernel.len()
        )));
    }
    Ok(kernel.into_iter().next().unwrap())
}

/// Sign of `g(v, v)` on the eigenvector of the simple eigenvalue. A null
/// eigenvector here is impossible for a `(+,−,−)` metric, so it is reported
/// as an internal invariant violation.
pub fn sigma0(pair: &MetricPair<Q>, lambda_simple: &Q) -> Result<i8> {
    let v = simple_eigenvector(pair, lambda_simple)?;
    match sign_of(&pair.g().quadratic(&v)) {
        0 => Err(Error::invariant(
            "simple eigenvalue with a null eigenvector",
        )),
        s => Ok(s),
    }
}

/// Signed rank of `(ǧ − λ1·g)` restricted to the `g`-orthogonal complement of
/// the space-like simple eigenvector.
pub fn sigma1(pair: &MetricPair<Q>, lambda_double: &Q, v_simple: &Vector3<Q>) -> Result<i8> {
    let gv = pair.g().to_matrix().mul_vec(v_simple);
    let w = orthogonal_complement(&gv);
    let h = pair.g_check().sub(&pair.g().scale(lambda_double));
    let d = diagonalize_congruence(h.gram(&w), 0.0);
    let s = count_signs(&d.pivots, 0.0);
    if s.zeros == 0 {
        return Err(Error::invariant(
            "restricted form (ǧ − λ·g)|W has rank 2 at a double eigenvalue",
        ));
    }
    Ok(s.positives as i8 - s.negatives as i8)
}

/// `rank(F − λ0·I)` at the triple eigenvalue.
pub fn sigma2(op: &Operator3<Q>, lambda0: &Q) -> Result<u8> {
    let r = op.f.shifted(lambda0).rank();
    if r == 3 {
        return Err(Error::invariant(
            "F − λ0·I is invertible at the triple root",
        ));
    }
    Ok(r as u8)
}

/// Root structure of `P` as far as the invariants determine it.
#[derive(Debug, Clone, PartialEq)]
pub enum Branch<T> {
    /// `D3 > 0`
    ThreeDistinct,
    /// `D3 < 0`
    ComplexPair,
    /// `D3 = 0, D2 > 0`
    SimpleDouble { simple: T, double: T },
    /// `D3 = 0, D2 = 0`
    Triple { root: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport<T> {
    pub coeffs: CharPoly<T>,
    pub d2: T,
    pub d3: T,
    pub sigma0: Option<i8>,
    pub sigma1: Option<i8>,
    pub sigma2: Option<u8>,
    pub sigma3: Option<i8>,
    pub branch: Branch<T>,
}

impl<T: Field> InvariantReport<T> {
    /// Which σ fields the branch makes applicable.
    pub fn branch_note(&self) -> &'static str {
        match (&self.branch, self.sigma0, self.sigma2) {
            (Branch::ThreeDistinct, ..) => "D3>0: no sigma invariants",
            (Branch::ComplexPair, ..) => "D3<0: no sigma invariants",
            (Branch::SimpleDouble { .. }, Some(1), _) => "D3=0, D2>0: sigma0",
            (Branch::SimpleDouble { .. }, ..) => "D3=0, D2>0: sigma0, sigma1",
            (Branch::Triple { .. }, _, Some(1)) => "D3=0, D2=0: sigma2, sigma3",
            (Branch::Triple { .. }, ..) => "D3=0, D2=0: sigma2",
        }
    }
}

/// Coefficients, discriminants and exactly the σ invariants that the
/// detected branch makes meaningful.
pub fn invariant_report(pair: &MetricPair<Q>) -> Result<InvariantReport<Q>> {
    let op = associated_operator(pair);
    let coeffs = char_poly(&op);
    let d2 = discriminant_d2(&coeffs);
    let d3 = discriminant_d3(&coeffs);
    let mut report = InvariantReport {
        coeffs,
        d2,
        d3,
        sigma0: None,
        sigma1: None,
        sigma2: None,
        sigma3: None,
        branch: Branch::ThreeDistinct,
    };
    if report.d3.is_positive() {
        return Ok(report);
    }
    if report.d3.is_negative() {
        report.branch = Branch::ComplexPair;
        return Ok(report);
    }
    if report.d2.is_negative() {
        return Err(Error::invariant("D3 = 0 with D2 < 0"));
    }
    if report.d2.is_positive() {
        let simple = simple_root(&report.coeffs)?;
        let double = double_root(&report.coeffs)?;
        let v = simple_eigenvector(pair, &simple)?;
        let s0 = sigma0(pair, &simple)?;
        report.sigma0 = Some(s0);
        if s0 < 0 {
            report.sigma1 = Some(sigma1(pair, &double, &v)?);
        }
        report.branch = Branch::SimpleDouble { simple, double };
        return Ok(report);
    }
    let root = triple_root(&report.coeffs)?;
    let s2 = sigma2(&op, &root)?;
    report.sigma2 = Some(s2);
    if s2 == 1 {
        report.sigma3 = Some(canonical::sigma3(pair, &root)?);
    }
    report.branch = Branch::Triple { root };
    Ok(report)
}

/// `true` when `v` is a null vector of `g`.
pub fn is_null<T: Field>(g: &SymMatrix3<T>, v: &Vector3<T>, threshold: f64) -> bool {
    g.quadratic(v).abs().to_f64() <= threshold
}
