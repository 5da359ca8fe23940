//! Explicit bases that bring a pair to its canonical presentation.
//!
//! Every construction works over a generic [`Field`]: exact pairs keep
//! eigenvectors and Jordan chains rational, and only the final normalisations
//! `g(v, v) = ±1` pass through binary64 square roots.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_with_report, ClassId};
use crate::error::{Error, Result};
use crate::invariants::{associated_operator, char_poly, Branch, CharPoly, MetricPair};
use crate::matrix::{
    cross, diagonalize_congruence, kernel_of_rows, norm_f64, null_vector, vadd, vec_to_f64, vscale,
    Matrix3, SymMatrix3, Vector3,
};
use crate::numeric::{classify_float, cubic_roots, FloatClassification, FloatToleranceConfig};
use crate::scalar::{rational_sqrt, rationalize, Field, Scalar, Q};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative tolerance for zero tests inside float constructions.
const FLOAT_EPS: f64 = 1e-6;

fn minkowski<T: Field>() -> SymMatrix3<T> {
    SymMatrix3::diag([T::one(), -T::one(), -T::one()])
}

fn hyperbolic<T: Field>() -> SymMatrix3<T> {
    let (o, z) = (T::one(), T::zero());
    SymMatrix3::from_upper([z.clone(), o.clone(), z.clone(), z.clone(), z, -o])
}

/// A class together with its parameters, in the order of [`ClassId::param_names`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm<T> {
    pub class: ClassId,
    pub params: Vec<T>,
}

impl<T: Field> CanonicalForm<T> {
    /// Checks the parameter count and the class's side conditions.
    pub fn new(class: ClassId, params: Vec<T>) -> Result<Self> {
        let names = class.param_names();
        if params.len() != names.len() {
            return Err(Error::InvalidParams(format!(
                "{class} takes {} parameter(s) ({}), got {}",
                names.len(),
                names.join(","),
                params.len()
            )));
        }
        let p = |i: usize| params[i].clone();
        let violated = match class {
            ClassId::T1 => {
                let (a, b, c) = (p(0), p(1), p(2));
                if a.clone() + b.clone() == T::zero() {
                    Some("a≠−b")
                } else if a + c.clone() == T::zero() {
                    Some("a≠−c")
                } else if b == c {
                    Some("b≠c")
                } else {
                    None
                }
            }
            ClassId::T2 => (p(0) + p(1) == T::zero()).then_some("a≠−b"),
            ClassId::T3 => p(1).is_zero().then_some("b≠0"),
            ClassId::T4 | ClassId::T5 | ClassId::T6 => (p(0) + p(1) == T::zero()).then_some("a≠−c"),
            _ => None,
        };
        if let Some(cond) = violated {
            return Err(Error::InvalidParams(format!("{class} requires {cond}")));
        }
        Ok(CanonicalForm { class, params })
    }

    pub fn param(&self, name: &str) -> Option<&T> {
        let i = self.class.param_names().iter().position(|n| *n == name)?;
        self.params.get(i)
    }

    /// Same form with the ordering conventions applied: `b < c` for T1 and
    /// `b > 0` for T3.
    pub fn normalized(&self) -> Self {
        let mut params = self.params.clone();
        match self.class {
            ClassId::T1 if params[1] > params[2] => params.swap(1, 2),
            ClassId::T3 => params[1] = params[1].abs(),
            _ => {}
        }
        CanonicalForm {
            class: self.class,
            params,
        }
    }

    pub fn canonical_g(&self) -> SymMatrix3<T> {
        if self.class.uses_hyperbolic_g() {
            hyperbolic()
        } else {
            minkowski()
        }
    }

    pub fn canonical_g_check(&self) -> SymMatrix3<T> {
        let p = |i: usize| self.params[i].clone();
        let z = T::zero;
        let o = T::one;
        match self.class {
            ClassId::T1 => SymMatrix3::diag([p(0), p(1), p(2)]),
            ClassId::T2 => SymMatrix3::diag([p(0), p(1), p(1)]),
            ClassId::T3 => SymMatrix3::from_upper([p(0), p(1), z(), -p(0), z(), p(2)]),
            ClassId::T4 => SymMatrix3::diag([p(0), -p(0), p(1)]),
            ClassId::T5 => SymMatrix3::from_upper([o(), p(0), z(), z(), z(), p(1)]),
            ClassId::T6 => SymMatrix3::from_upper([z(), p(0), z(), -o(), z(), p(1)]),
            ClassId::T7 => SymMatrix3::diag([p(0), -p(0), -p(0)]),
            ClassId::T8 => SymMatrix3::from_upper([o(), p(0), z(), z(), z(), -p(0)]),
            ClassId::T9 => SymMatrix3::from_upper([z(), p(0), z(), -o(), z(), -p(0)]),
            ClassId::T10 => SymMatrix3::from_upper([z(), p(0), z(), z(), o(), -p(0)]),
        }
    }

    /// The canonical pair itself.
    pub fn pair(&self, tol: f64) -> Result<MetricPair<T>> {
        MetricPair::with_tolerance(self.canonical_g(), self.canonical_g_check(), tol)
    }
}

impl<T> CanonicalForm<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> CanonicalForm<U> {
        CanonicalForm {
            class: self.class,
            params: self.params.iter().map(f).collect(),
        }
    }
}

impl CanonicalForm<Scalar> {
    pub fn to_f64(&self) -> CanonicalForm<f64> {
        self.map(|s| s.to_f64())
    }

    /// Exact copy when every parameter is exact.
    pub fn to_exact(&self) -> Option<CanonicalForm<Q>> {
        let params = self
            .params
            .iter()
            .map(|s| s.as_exact().cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(CanonicalForm {
            class: self.class,
            params,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.params.iter().all(Scalar::is_exact)
    }
}

/// Jordan chain of `F − λ0·I`: `N·e0 = 0`, `N·e1 = e0`, and `N·e2 = e1` at depth 3.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain<T> {
    pub eigenvalue: T,
    pub e0: Vector3<T>,
    pub e1: Vector3<T>,
    pub e2: Option<Vector3<T>>,
}

impl<T: Field> JordanChain<T> {
    pub fn depth(&self) -> usize {
        if self.e2.is_some() {
            3
        } else {
            2
        }
    }
}

/// Output of a per-class construction before verification.
#[derive(Debug, Clone)]
pub struct Construction<T> {
    pub form: CanonicalForm<Scalar>,
    /// New basis vectors in input coordinates.
    pub columns: [Vector3<f64>; 3],
    pub chain: Option<JordanChain<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalResult {
    pub form: CanonicalForm<Scalar>,
    /// Columns are the canonical basis in input coordinates.
    pub transform: Matrix3<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

fn invariant_violation(msg: impl Into<String>) -> Error {
    Error::InternalInvariantViolation(msg.into())
}

fn is_small<T: Field>(v: &T, scale: f64, eps: f64) -> bool {
    v.is_negligible(eps * scale)
}

/// `v / √|n|` in binary64.
fn unit<T: Field>(v: &Vector3<T>, n: &T) -> Vector3<f64> {
    let s = n.to_f64().abs().sqrt();
    vec_to_f64(v).map(|x| x / s)
}

fn combine<T: Field>(coeffs: &[T], vecs: &[Vector3<T>]) -> Vector3<T> {
    coeffs
        .iter()
        .zip(vecs)
        .fold(std::array::from_fn(|_| T::zero()), |acc, (c, v)| {
            vadd(&acc, &vscale(v, c))
        })
}

/// First index with a nonzero entry for exact data, the largest otherwise.
fn pick<T: Field>(norms: [f64; 3]) -> Option<usize> {
    if T::EXACT {
        norms.iter().position(|&n| n > 0.0)
    } else {
        let (i, &m) = norms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))?;
        (m > 0.0).then_some(i)
    }
}

fn eps_for<T: Field>() -> f64 {
    if T::EXACT {
        0.0
    } else {
        FLOAT_EPS
    }
}

/// Eigenvector of a simple eigenvalue, checked to be non-null for `g`.
fn simple_vector<T: Field>(
    pair: &MetricPair<T>,
    f: &Matrix3<T>,
    lambda: &T,
) -> Result<(Vector3<T>, T)> {
    let eps = eps_for::<T>();
    let v = null_vector(&f.shifted(lambda));
    let nv = norm_f64(&v);
    let fscale = f.max_abs() + lambda.to_f64().abs();
    if nv == 0.0 || nv <= eps * fscale * fscale {
        return Err(invariant_violation(
            "eigenspace of a simple eigenvalue is not one-dimensional",
        ));
    }
    let n = pair.g().quadratic(&v);
    if is_small(&n, pair.g().max_abs() * nv * nv, eps.max(1e-12)) {
        return Err(invariant_violation(
            "simple eigenvalue with a null eigenvector",
        ));
    }
    Ok((v, n))
}

/// Basis of the `g`-orthogonal complement of `v`, diagonalised for `g` with
/// the positive vector first when there is one.
fn complement_frame<T: Field>(
    pair: &MetricPair<T>,
    v: &Vector3<T>,
) -> Result<Vec<(Vector3<T>, T)>> {
    let gv = pair.g().to_matrix().mul_vec(v);
    let w = kernel_of_rows(vec![gv.to_vec()], 1e-12);
    if w.len() != 2 {
        return Err(invariant_violation("orthogonal complement is not a plane"));
    }
    let scale = pair.g().max_abs() * norm_f64(&w[0]) * norm_f64(&w[1]);
    let d = diagonalize_congruence(pair.g().gram(&w), eps_for::<T>() * scale);
    let mut out: Vec<(Vector3<T>, T)> = d
        .basis
        .iter()
        .zip(d.pivots)
        .map(|(c, p)| (combine(c, &w), p))
        .collect();
    if out
        .iter()
        .any(|(v, p)| is_small(p, pair.g().max_abs() * norm_f64(v).powi(2), eps_for::<T>()))
    {
        return Err(invariant_violation(
            "g is degenerate on an orthogonal complement",
        ));
    }
    out.sort_by_key(|(_, p)| p.is_negative());
    Ok(out)
}

/// Three distinct real eigenvalues: `g`-orthogonal eigenvectors, the time-like
/// one first, the space-like ones ordered so that `b < c`.
pub fn canon_t1<T: Field>(pair: &MetricPair<T>, roots: [T; 3]) -> Result<Construction<T>> {
    let f = associated_operator(pair).f;
    let mut time = None;
    let mut space = Vec::new();
    for lambda in roots {
        let (v, n) = simple_vector(pair, &f, &lambda)?;
        if n.is_positive() {
            if time.is_some() {
                return Err(invariant_violation("two time-like eigenvectors"));
            }
            time = Some((v, n, lambda));
        } else {
            space.push((v, n, lambda));
        }
    }
    let (v0, n0, a) = time.ok_or_else(|| invariant_violation("no time-like eigenvector"))?;
    // b = −λ ascending
    space.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap_or(std::cmp::Ordering::Equal));
    let columns = [
        unit(&v0, &n0),
        unit(&space[0].0, &space[0].1),
        unit(&space[1].0, &space[1].1),
    ];
    let params = vec![
        a.into_scalar(),
        (-space[0].2.clone()).into_scalar(),
        (-space[1].2.clone()).into_scalar(),
    ];
    Ok(Construction {
        form: CanonicalForm {
            class: ClassId::T1,
            params,
        },
        columns,
        chain: None,
    })
}

/// Time-like simple eigenvalue: its eigenvector and any `g`-orthonormal basis
/// of the complement, on which `F` is scalar.
pub fn canon_t2<T: Field>(pair: &MetricPair<T>, simple: &T, double: &T) -> Result<Construction<T>> {
    let f = associated_operator(pair).f;
    let (v0, n0) = simple_vector(pair, &f, simple)?;
    if !n0.is_positive() {
        return Err(invariant_violation(
            "T2 requires a time-like simple eigenvector",
        ));
    }
    let w = complement_frame(pair, &v0)?;
    if w.iter().any(|(_, p)| p.is_positive()) {
        return Err(invariant_violation(
            "complement of a time-like vector is not space-like",
        ));
    }
    Ok(Construction {
        form: CanonicalForm {
            class: ClassId::T2,
            params: vec![
                simple.clone().into_scalar(),
                (-double.clone()).into_scalar(),
            ],
        },
        columns: [
            unit(&v0, &n0),
            unit(&w[0].0, &w[0].1),
            unit(&w[1].0, &w[1].1),
        ],
        chain: None,
    })
}

/// Complex pair: the real eigenvector, then a boost of a `g`-orthonormal basis
/// of its complement that makes the restricted `ǧ` trace-free.
pub fn canon_t3<T: Field>(pair: &MetricPair<T>, real_root: &T) -> Result<Construction<T>> {
    let f = associated_operator(pair).f;
    let (v2, n2) = simple_vector(pair, &f, real_root)?;
    if !n2.is_negative() {
        return Err(invariant_violation(
            "T3 requires a space-like real eigenvector",
        ));
    }
    let w = complement_frame(pair, &v2)?;
    let f0 = unit(&w[0].0, &w[0].1);
    let f1 = unit(&w[1].0, &w[1].1);
    let gc = pair.g_check().to_f64();
    let (p, q, s) = (
        gc.bilinear(&f0, &f0),
        gc.bilinear(&f0, &f1),
        gc.bilinear(&f1, &f1),
    );
    let ratio = -(p + s) / (2.0 * q);
    if ratio.is_nan() || ratio.abs() >= 1.0 {
        return Err(invariant_violation(
            "restricted operator of a complex pair has real eigenvalues",
        ));
    }
    let t = ratio.atanh() / 2.0;
    let (ch, sh) = (t.cosh(), t.sinh());
    let e0: Vector3<f64> = std::array::from_fn(|i| ch * f0[i] + sh * f1[i]);
    let mut e1: Vector3<f64> = std::array::from_fn(|i| sh * f0[i] + ch * f1[i]);
    if gc.bilinear(&e0, &e1) < 0.0 {
        e1 = e1.map(|x| -x);
    }

    let coeffs = char_poly(&associated_operator(pair));
    let two = T::from_i64(2);
    let a = (coeffs.a0.clone() - real_root.clone()) / two.clone();
    let b_sq = coeffs.a1.clone() - two * a.clone() * real_root.clone() - a.clone() * a.clone();
    let b = sqrt_scalar(&b_sq);
    Ok(Construction {
        form: CanonicalForm {
            class: ClassId::T3,
            params: vec![a.into_scalar(), b, (-real_root.clone()).into_scalar()],
        },
        columns: [e0, e1, unit(&v2, &n2)],
        chain: None,
    })
}

/// Square root, exact when the value is an exact rational square.
fn sqrt_scalar<T: Field>(v: &T) -> Scalar {
    if let Scalar::Exact(x) = v.clone().into_scalar() {
        if let Some(r) = rational_sqrt(&x) {
            return Scalar::Exact(r);
        }
    }
    Scalar::Float(v.to_f64().max(0.0).sqrt())
}

/// Space-like simple eigenvalue: `e2` is its eigenvector; on the complement
/// either `F` is scalar (T4) or a 2-dimensional Jordan pair is normalised so
/// that `g|W` is hyperbolic (T5, T6).
pub fn canon_t4_t5_t6<T: Field>(
    pair: &MetricPair<T>,
    class: ClassId,
    double: &T,
    simple: &T,
) -> Result<Construction<T>> {
    let eps = eps_for::<T>();
    let f = associated_operator(pair).f;
    let (v2, n2) = simple_vector(pair, &f, simple)?;
    if !n2.is_negative() {
        return Err(invariant_violation(
            "expected a space-like simple eigenvector",
        ));
    }
    let params = vec![
        double.clone().into_scalar(),
        (-simple.clone()).into_scalar(),
    ];
    let last = unit(&v2, &n2);
    if class == ClassId::T4 {
        let w = complement_frame(pair, &v2)?;
        if !w[0].1.is_positive() || !w[1].1.is_negative() {
            return Err(invariant_violation(
                "complement of a space-like vector is not Lorentzian",
            ));
        }
        return Ok(Construction {
            form: CanonicalForm { class, params },
            columns: [unit(&w[0].0, &w[0].1), unit(&w[1].0, &w[1].1), last],
            chain: None,
        });
    }

    let n = f.shifted(double);
    let w = null_vector(&n);
    let gscale = pair.g().max_abs();
    if norm_f64(&w) == 0.0 {
        return Err(invariant_violation(
            "double eigenvalue has a 2-dimensional eigenspace",
        ));
    }
    if !is_small(&pair.g().quadratic(&w), gscale * norm_f64(&w).powi(2), eps) {
        return Err(invariant_violation(
            "eigenvector of the double eigenvalue is not null",
        ));
    }
    // strip the e2-component from each standard vector and keep one that N moves
    let candidates: Vec<Vector3<T>> = crate::matrix::standard_basis::<T>()
        .iter()
        .map(|e| {
            let c = pair.g().bilinear(e, &v2) / n2.clone();
            crate::matrix::vsub(e, &vscale(&v2, &c))
        })
        .collect();
    let images: Vec<Vector3<T>> = candidates.iter().map(|u| n.mul_vec(u)).collect();
    let k = pick::<T>(std::array::from_fn(|i| norm_f64(&images[i])))
        .ok_or_else(|| invariant_violation("no Jordan chain vector at the double eigenvalue"))?;
    let alpha = crate::matrix::dot(&images[k], &w) / crate::matrix::dot(&w, &w);
    let mut u = vscale(&candidates[k], &(T::one() / alpha));
    let guw = pair.g().bilinear(&u, &w);
    if is_small(&guw, gscale * norm_f64(&u) * norm_f64(&w), eps) {
        return Err(invariant_violation("Jordan pair with g(u, w) = 0"));
    }
    let expect_plus = class == ClassId::T5;
    if guw.is_positive() != expect_plus {
        return Err(invariant_violation("sign of g(u, w) disagrees with sigma1"));
    }
    let beta = -pair.g().quadratic(&u) / (T::from_i64(2) * guw.clone());
    u = vadd(&u, &vscale(&w, &beta));
    let uf = unit(&u, &guw);
    let wf = unit(&w, &guw);
    let columns = if expect_plus {
        [uf, wf, last]
    } else {
        [wf, uf.map(|x| -x), last]
    };
    Ok(Construction {
        form: CanonicalForm { class, params },
        columns,
        chain: Some(JordanChain {
            eigenvalue: double.clone(),
            e0: w,
            e1: u,
            e2: None,
        }),
    })
}

/// Scalar operator: any basis that brings `g` to `diag(1, −1, −1)`.
pub fn canon_t7<T: Field>(pair: &MetricPair<T>, root: &T) -> Result<Construction<T>> {
    let basis = crate::matrix::standard_basis::<T>();
    let d = diagonalize_congruence(pair.g().gram(&basis), eps_for::<T>() * pair.g().max_abs());
    let mut vecs: Vec<(Vector3<T>, T)> = d
        .basis
        .iter()
        .zip(d.pivots)
        .map(|(c, p)| (combine(c, &basis), p))
        .collect();
    vecs.sort_by_key(|(_, p)| p.is_negative());
    Ok(Construction {
        form: CanonicalForm {
            class: ClassId::T7,
            params: vec![root.clone().into_scalar()],
        },
        columns: std::array::from_fn(|i| unit(&vecs[i].0, &vecs[i].1)),
        chain: None,
    })
}

/// Depth-2 Jordan basis `(e0, e1, e2)` of a rank-one nilpotent part after the
/// shear that clears `g11` and `g12`.
#[derive(Debug, Clone)]
pub struct RankOneStage<T> {
    pub chain: JordanChain<T>,
    pub g01: T,
    pub g22: T,
}

pub fn rank_one_stage<T: Field>(pair: &MetricPair<T>, root: &T) -> Result<RankOneStage<T>> {
    let eps = eps_for::<T>();
    let g = pair.g();
    let n = associated_operator(pair).f.shifted(root);
    let k = pick::<T>(std::array::from_fn(|j| norm_f64(&n.column(j))))
        .ok_or_else(|| invariant_violation("F − λ0·I vanishes"))?;
    let mut e1: Vector3<T> = crate::matrix::standard_basis::<T>()[k].clone();
    let e0 = n.column(k);
    let r = pick::<T>(std::array::from_fn(|i| norm_f64(&n.row(i)))).unwrap_or(0);
    let kernel = kernel_of_rows(vec![n.row(r).to_vec()], 1e-12);
    let crosses: Vec<f64> = kernel.iter().map(|z| norm_f64(&cross(z, &e0))).collect();
    let zi = pick::<T>(std::array::from_fn(|i| {
        crosses.get(i).copied().unwrap_or(0.0)
    }))
    .ok_or_else(|| invariant_violation("kernel of F − λ0·I is one-dimensional"))?;
    let mut e2 = kernel[zi].clone();

    let scale = |u: &Vector3<T>, v: &Vector3<T>| g.max_abs() * norm_f64(u) * norm_f64(v);
    let g00 = g.quadratic(&e0);
    let g02 = g.bilinear(&e0, &e2);
    if !is_small(&g00, scale(&e0, &e0), eps) {
        return Err(invariant_violation("g00 ≠ 0 on the rank-one Jordan chain"));
    }
    if !is_small(&g02, scale(&e0, &e2), eps) {
        return Err(invariant_violation("g02 ≠ 0 on the rank-one Jordan chain"));
    }
    let g01 = g.bilinear(&e0, &e1);
    if is_small(&g01, scale(&e0, &e1), eps) {
        return Err(invariant_violation("g01 = 0 on the rank-one Jordan chain"));
    }
    let two = T::from_i64(2);
    let beta = -g.quadratic(&e1) / (two * g01.clone());
    let theta = -g.bilinear(&e1, &e2) / g01.clone();
    e1 = vadd(&e1, &vscale(&e0, &beta));
    e2 = vadd(&e2, &vscale(&e0, &theta));
    let g22 = g.quadratic(&e2);
    if !g22.is_negative() || is_small(&g22, scale(&e2, &e2), eps) {
        return Err(invariant_violation("g22 ≥ 0 on the rank-one Jordan chain"));
    }
    Ok(RankOneStage {
        chain: JordanChain {
            eigenvalue: root.clone(),
            e0,
            e1,
            e2: Some(e2),
        },
        g01,
        g22,
    })
}

/// Sign of `g01` in the rank-one Jordan basis.
pub fn sigma3<T: Field>(pair: &MetricPair<T>, root: &T) -> Result<i8> {
    let stage = rank_one_stage(pair, root)?;
    Ok(if stage.g01.is_positive() { 1 } else { -1 })
}

/// Triple root with a rank-one nilpotent part.
pub fn canon_t8_t9<T: Field>(pair: &MetricPair<T>, root: &T) -> Result<Construction<T>> {
    let stage = rank_one_stage(pair, root)?;
    let c = &stage.chain;
    let e2 = c.e2.clone().unwrap_or_else(|| unreachable!());
    let last = unit(&e2, &stage.g22);
    let x = unit(&c.e1, &stage.g01);
    let y = unit(&c.e0, &stage.g01);
    let (class, columns) = if stage.g01.is_positive() {
        (ClassId::T8, [x, y, last])
    } else {
        (ClassId::T9, [y.map(|v| -v), x, last])
    };
    Ok(Construction {
        form: CanonicalForm {
            class,
            params: vec![root.clone().into_scalar()],
        },
        columns,
        chain: Some(JordanChain {
            eigenvalue: c.eigenvalue.clone(),
            e0: c.e0.clone(),
            e1: c.e1.clone(),
            e2: None,
        }),
    })
}

/// Triple root with a rank-two nilpotent part: a depth-3 chain sheared until
/// `g` is skew-diagonal.
pub fn canon_t10<T: Field>(pair: &MetricPair<T>, root: &T) -> Result<Construction<T>> {
    let eps = eps_for::<T>();
    let g = pair.g();
    let n = associated_operator(pair).f.shifted(root);
    let n2 = n.matmul(&n);
    let basis = crate::matrix::standard_basis::<T>();
    let norms: [f64; 3] = std::array::from_fn(|k| norm_f64(&n2.column(k)));
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let k = if T::EXACT {
        norms.iter().position(|&v| v > 0.0)
    } else {
        norms.iter().position(|&v| v > 0.0 && v >= 0.5 * top)
    }
    .ok_or_else(|| invariant_violation("(F − λ0·I)² vanishes"))?;
    let mut e2 = basis[k].clone();
    let mut e1 = n.mul_vec(&e2);
    let e0 = n.mul_vec(&e1);

    let scale = |u: &Vector3<T>, v: &Vector3<T>| g.max_abs() * norm_f64(u) * norm_f64(v);
    let g00 = g.quadratic(&e0);
    let g01 = g.bilinear(&e0, &e1);
    let g02 = g.bilinear(&e0, &e2);
    let g11 = g.quadratic(&e1);
    if !is_small(&g00, scale(&e0, &e0), eps) || !is_small(&g01, scale(&e0, &e1), eps) {
        return Err(invariant_violation(
            "g00 or g01 ≠ 0 on the depth-3 Jordan chain",
        ));
    }
    if !is_small(
        &(g11.clone() - g02),
        scale(&e1, &e1).max(scale(&e0, &e2)),
        eps,
    ) {
        return Err(invariant_violation("g11 ≠ g02 on the depth-3 Jordan chain"));
    }
    if is_small(&g11, scale(&e1, &e1), eps) {
        return Err(invariant_violation("g11 = 0 on the depth-3 Jordan chain"));
    }
    let g12 = g.bilinear(&e1, &e2);
    let g22 = g.quadratic(&e2);
    let two = T::from_i64(2);
    let beta = -g12.clone() / (two.clone() * g11.clone());
    let gamma = -g22 / (two * g11.clone())
        + T::from_i64(3) * g12.clone() * g12 / (T::from_i64(8) * g11.clone() * g11.clone());
    e2 = vadd(&vadd(&e2, &vscale(&e1, &beta)), &vscale(&e0, &gamma));
    e1 = vadd(&e1, &vscale(&e0, &beta));
    if !g11.is_negative() {
        return Err(invariant_violation(
            "g11 > 0 on the skew-diagonal Jordan basis",
        ));
    }
    let columns = [
        unit(&e0, &g11).map(|v| -v),
        unit(&e2, &g11),
        unit(&e1, &g11).map(|v| -v),
    ];
    Ok(Construction {
        form: CanonicalForm {
            class: ClassId::T10,
            params: vec![root.clone().into_scalar()],
        },
        columns,
        chain: Some(JordanChain {
            eigenvalue: root.clone(),
            e0,
            e1,
            e2: Some(e2),
        }),
    })
}

/// Basis vectors whose signs must flip together to keep the form unchanged.
fn sign_groups(class: ClassId) -> &'static [&'static [usize]] {
    match class {
        ClassId::T1 | ClassId::T2 | ClassId::T4 | ClassId::T7 => &[&[0], &[1], &[2]],
        ClassId::T3 | ClassId::T5 | ClassId::T6 | ClassId::T8 | ClassId::T9 => &[&[0, 1], &[2]],
        ClassId::T10 => &[&[0, 1, 2]],
    }
}

/// Makes the first clearly nonzero coordinate of each group's lead vector positive.
fn normalize_signs(class: ClassId, columns: &mut [Vector3<f64>; 3]) {
    for group in sign_groups(class) {
        let lead = columns[group[0]];
        let m = lead.iter().fold(0f64, |a, v| a.max(v.abs()));
        let first = lead
            .iter()
            .find(|v| v.abs() > 1e-9 * m)
            .copied()
            .unwrap_or(0.0);
        if first < 0.0 {
            for &i in group.iter() {
                columns[i] = columns[i].map(|v| -v);
            }
        }
    }
}

fn residual_of(
    g: &SymMatrix3<f64>,
    g_check: &SymMatrix3<f64>,
    form: &CanonicalForm<f64>,
    t: &Matrix3<f64>,
) -> f64 {
    let rg = g.congruence(t).sub(&form.canonical_g()).max_abs();
    let rc = g_check
        .congruence(t)
        .sub(&form.canonical_g_check())
        .max_abs();
    rg.max(rc)
}

/// Recomputes both congruences in binary64 against the canonical matrices.
pub fn verify_canonical<T: Field>(
    pair: &MetricPair<T>,
    result: &CanonicalResult,
    tol: f64,
) -> ResidualReport {
    let residual = residual_of(
        &pair.g().to_f64(),
        &pair.g_check().to_f64(),
        &result.form.to_f64(),
        &result.transform,
    );
    ResidualReport {
        residual,
        tol,
        pass: residual <= tol,
    }
}

/// Normalises signs, assembles the transform and checks the residual.
pub fn finish<T: Field>(
    pair: &MetricPair<T>,
    construction: Construction<T>,
    tol: f64,
) -> Result<CanonicalResult> {
    let mut columns = construction.columns;
    normalize_signs(construction.form.class, &mut columns);
    let transform = Matrix3::from_columns(columns);
    if transform.det().abs() == 0.0 || !transform.det().is_finite() {
        return Err(invariant_violation("canonical basis is degenerate"));
    }
    let mut result = CanonicalResult {
        form: construction.form,
        transform,
        residual: 0.0,
    };
    let report = verify_canonical(pair, &result, tol);
    result.residual = report.residual;
    if !report.pass {
        return Err(Error::ResidualTooLarge {
            residual: report.residual,
            tol,
        });
    }
    Ok(result)
}

/// Binary64 roots of `P` without clustering, ascending, plus the complex pair.
fn raw_roots(c: &CharPoly<f64>) -> (Vec<f64>, Option<(f64, f64)>) {
    let r = cubic_roots(c, &FloatToleranceConfig { tol: 1e-300 });
    let mut reals = Vec::new();
    for (v, m) in r.real_roots {
        reals.extend(std::iter::repeat_n(v, m as usize));
    }
    (reals, r.complex_pair)
}

/// Exact root near `x`, if there is a small-denominator one.
fn rational_root(c: &CharPoly<Q>, x: f64) -> Option<Q> {
    let r = rationalize(x, 1_000_000)?;
    c.eval(&r).is_zero().then_some(r)
}

/// Exact classification, then the matching construction. Eigenvalues stay
/// exact whenever they are rational.
pub fn canonicalize(pair: &MetricPair<Q>, tol: f64) -> Result<CanonicalResult> {
    let (class, report) = classify_with_report(pair)?;
    match (&report.branch, class) {
        (Branch::ThreeDistinct, _) => {
            let (roots, _) = raw_roots(&report.coeffs.to_f64());
            if roots.len() != 3 {
                return Err(invariant_violation(
                    "D3 > 0 but fewer than three real roots",
                ));
            }
            let exact: Option<Vec<Q>> = roots
                .iter()
                .map(|&x| rational_root(&report.coeffs, x))
                .collect();
            match exact {
                Some(r) if r[0] != r[1] && r[1] != r[2] && r[0] != r[2] => {
                    let c = canon_t1(pair, [r[0].clone(), r[1].clone(), r[2].clone()])?;
                    finish(pair, c, tol)
                }
                _ => {
                    let pf = pair.to_f64();
                    let c = canon_t1(&pf, [roots[0], roots[1], roots[2]])?;
                    finish(&pf, c, tol)
                }
            }
        }
        (Branch::ComplexPair, _) => {
            let (roots, _) = raw_roots(&report.coeffs.to_f64());
            let x = *roots
                .first()
                .ok_or_else(|| invariant_violation("no real root of a cubic"))?;
            match rational_root(&report.coeffs, x) {
                Some(r) => finish(pair, canon_t3(pair, &r)?, tol),
                None => {
                    let pf = pair.to_f64();
                    let mut c = canon_t3(&pf, &x)?;
                    // keep a and b tied to the exact coefficients
                    c.form = t3_params_from(&report.coeffs.to_f64(), x);
                    finish(&pf, c, tol)
                }
            }
        }
        (Branch::SimpleDouble { simple, double }, ClassId::T2) => {
            finish(pair, canon_t2(pair, simple, double)?, tol)
        }
        (Branch::SimpleDouble { simple, double }, _) => {
            finish(pair, canon_t4_t5_t6(pair, class, double, simple)?, tol)
        }
        (Branch::Triple { root }, ClassId::T7) => finish(pair, canon_t7(pair, root)?, tol),
        (Branch::Triple { root }, ClassId::T10) => finish(pair, canon_t10(pair, root)?, tol),
        (Branch::Triple { root }, _) => finish(pair, canon_t8_t9(pair, root)?, tol),
    }
}

fn t3_params_from(c: &CharPoly<f64>, real_root: f64) -> CanonicalForm<Scalar> {
    let a = (c.a0 - real_root) / 2.0;
    let b = (c.a1 - 2.0 * a * real_root - a * a).max(0.0).sqrt();
    CanonicalForm {
        class: ClassId::T3,
        params: vec![
            Scalar::Float(a),
            Scalar::Float(b),
            Scalar::Float(-real_root),
        ],
    }
}

/// Tolerance-based classification, then the matching construction in binary64.
pub fn canonicalize_float(
    pair: &MetricPair<f64>,
    cfg: &FloatToleranceConfig,
    tol: f64,
) -> Result<(CanonicalResult, FloatClassification)> {
    let fc = classify_float(pair, cfg)?;
    let construction = match (&fc.report.branch, fc.class) {
        (Branch::ThreeDistinct, _) => {
            let (roots, _) = raw_roots(&fc.report.coeffs);
            if roots.len() != 3 {
                return Err(Error::AmbiguousClassification(
                    "D3 > 0 but the cubic solver found a complex pair".into(),
                ));
            }
            canon_t1(pair, [roots[0], roots[1], roots[2]])?
        }
        (Branch::ComplexPair, _) => {
            let (roots, _) = raw_roots(&fc.report.coeffs);
            let x = *roots
                .first()
                .ok_or_else(|| invariant_violation("no real root of a cubic"))?;
            let mut c = canon_t3(pair, &x)?;
            c.form = t3_params_from(&fc.report.coeffs, x);
            c
        }
        (Branch::SimpleDouble { simple, double }, ClassId::T2) => canon_t2(pair, simple, double)?,
        (Branch::SimpleDouble { simple, double }, class) => {
            canon_t4_t5_t6(pair, class, double, simple)?
        }
        (Branch::Triple { root }, ClassId::T7) => canon_t7(pair, root)?,
        (Branch::Triple { root }, ClassId::T10) => canon_t10(pair, root)?,
        (Branch::Triple { root }, _) => canon_t8_t9(pair, root)?,
    };
    Ok((finish(pair, construction, tol)?, fc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::standard_basis;
    use crate::scalar::{q, qi};

    fn form(class: ClassId, params: &[Q]) -> CanonicalForm<Q> {
        CanonicalForm::new(class, params.to_vec()).unwrap()
    }

    fn table_fixtures() -> Vec<CanonicalForm<Q>> {
        vec![
            form(ClassId::T1, &[qi(2), qi(1), qi(3)]),
            form(ClassId::T2, &[qi(2), qi(1)]),
            form(ClassId::T3, &[qi(2), qi(1), qi(1)]),
            form(ClassId::T4, &[qi(1), qi(2)]),
            form(ClassId::T5, &[qi(1), qi(2)]),
            form(ClassId::T6, &[qi(1), qi(2)]),
            form(ClassId::T7, &[qi(1)]),
            form(ClassId::T8, &[qi(0)]),
            form(ClassId::T9, &[qi(0)]),
            form(ClassId::T10, &[qi(0)]),
        ]
    }

    #[test]
    fn fixtures_are_fixed_points() {
        for f in table_fixtures() {
            let pair = f.pair(0.0).unwrap();
            let r = canonicalize(&pair, 1e-12).unwrap();
            assert_eq!(r.form.to_exact().unwrap(), f, "{}", f.class);
            assert_eq!(r.transform, Matrix3::identity(), "{}", f.class);
            assert_eq!(r.residual, 0.0);
        }
    }

    #[test]
    fn side_conditions() {
        let err = CanonicalForm::new(ClassId::T1, vec![qi(1), qi(2), qi(2)]).unwrap_err();
        assert_eq!(
            err.to_string(),
            "invalid parameters: T1_THREE_REAL_DISTINCT requires b≠c"
        );
        assert!(CanonicalForm::new(ClassId::T3, vec![qi(1), qi(0), qi(1)]).is_err());
        assert!(CanonicalForm::new(ClassId::T5, vec![qi(1), qi(-1)]).is_err());
        assert!(CanonicalForm::new(ClassId::T7, vec![qi(1), qi(2)]).is_err());
    }

    #[test]
    fn t3_negated_b_reflects() {
        let f = CanonicalForm {
            class: ClassId::T3,
            params: vec![qi(2), qi(-1), qi(1)],
        };
        let r = canonicalize(&f.pair(0.0).unwrap(), 1e-12).unwrap();
        assert_eq!(r.form.to_exact().unwrap().params, vec![qi(2), qi(1), qi(1)]);
        assert!(r.transform.det() < 0.0);
    }

    #[test]
    fn t7_hyperbolic_g() {
        let pair = MetricPair::new(hyperbolic(), hyperbolic::<Q>().scale(&qi(2))).unwrap();
        let r = canonicalize(&pair, 1e-12).unwrap();
        assert_eq!(r.form.to_exact().unwrap().params, vec![qi(2)]);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn scrambled_t10_recovers_params() {
        let t = Matrix3::from_rows([[1, 2, 0], [0, 1, -1], [3, 0, 1]].map(|r| r.map(qi)));
        let base = form(ClassId::T10, &[q(1, 2)]);
        let pair = MetricPair::new(
            base.canonical_g().congruence(&t),
            base.canonical_g_check().congruence(&t),
        )
        .unwrap();
        let r = canonicalize(&pair, 1e-9).unwrap();
        assert_eq!(r.form.to_exact().unwrap(), base);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn chain_identities_are_exact() {
        let t = Matrix3::from_rows([[2, 1, 0], [1, 1, 1], [0, -1, 3]].map(|r| r.map(qi)));
        for f in [
            form(ClassId::T5, &[qi(3), qi(1)]),
            form(ClassId::T6, &[qi(3), qi(1)]),
            form(ClassId::T8, &[qi(2)]),
            form(ClassId::T9, &[q(-1, 3)]),
            form(ClassId::T10, &[qi(1)]),
        ] {
            let pair = MetricPair::new(
                f.canonical_g().congruence(&t),
                f.canonical_g_check().congruence(&t),
            )
            .unwrap();
            let report = crate::invariants::invariant_report(&pair).unwrap();
            let c = match (f.class, report.branch) {
                (ClassId::T5 | ClassId::T6, Branch::SimpleDouble { simple, double }) => {
                    canon_t4_t5_t6(&pair, f.class, &double, &simple).unwrap()
                }
                (ClassId::T10, Branch::Triple { root }) => canon_t10(&pair, &root).unwrap(),
                (_, Branch::Triple { root }) => canon_t8_t9(&pair, &root).unwrap(),
                other => panic!("unexpected branch {other:?}"),
            };
            let chain = c.chain.unwrap();
            let n = associated_operator(&pair).f.shifted(&chain.eigenvalue);
            assert!(n.mul_vec(&chain.e0).iter().all(Zero::is_zero));
            assert_eq!(n.mul_vec(&chain.e1), chain.e0);
            if let Some(e2) = &chain.e2 {
                assert_eq!(n.mul_vec(e2), chain.e1);
                assert_eq!(chain.depth(), 3);
            }
        }
    }

    #[test]
    fn corrupted_transform_fails_verification() {
        let f = form(ClassId::T10, &[qi(0)]);
        let pair = f.pair(0.0).unwrap();
        let mut r = canonicalize(&pair, 1e-12).unwrap();
        let mut rows = *r.transform.rows();
        rows[1][2] += 0.1;
        r.transform = Matrix3::from_rows(rows);
        let rep = verify_canonical(&pair, &r, 1e-9);
        assert!(rep.residual > 1e-3 && !rep.pass);
    }

    #[test]
    fn irrational_t1_uses_float_path() {
        // ǧ = [[0,1,0],[1,3,0],[0,0,2]] has eigenvalues (−3±√5)/2 … irrational
        let g = minkowski::<Q>();
        let gc =
            SymMatrix3::from_rows([[0, 1, 0], [1, 3, 0], [0, 0, 5]].map(|r| r.map(qi))).unwrap();
        let pair = MetricPair::new(g, gc).unwrap();
        let r = canonicalize(&pair, 1e-9).unwrap();
        assert_eq!(r.form.class, ClassId::T1);
        assert!(!r.form.is_exact());
        let _ = standard_basis::<Q>();
    }

    #[test]
    fn sigma3_examples() {
        assert_eq!(
            sigma3(&form(ClassId::T8, &[qi(0)]).pair(0.0).unwrap(), &qi(0)).unwrap(),
            1
        );
        assert_eq!(
            sigma3(&form(ClassId::T9, &[qi(0)]).pair(0.0).unwrap(), &qi(0)).unwrap(),
            -1
        );
    }

    #[test]
    fn float_canonicalization() {
        for f in table_fixtures() {
            let pair = f.pair(0.0).unwrap().to_f64();
            let (r, fc) =
                canonicalize_float(&pair, &FloatToleranceConfig::default(), 1e-12).unwrap();
            assert_eq!(fc.class, f.class);
            assert_eq!(r.transform, Matrix3::identity(), "{}", f.class);
        }
    }
}
