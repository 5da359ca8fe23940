//! Seeded class-conditioned samples, random congruences and an independent
//! brute-force classifier for differential testing.

use nalgebra::{Complex, Matrix3 as Na3, Vector3 as NaV3};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::CanonicalForm;
use crate::classifier::ClassId;
use crate::error::{Error, Result};
use crate::invariants::{associated_operator, MetricPair};
use crate::matrix::Matrix3;
use crate::scalar::{q, qi, Field, Q};

pub type TestRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub class: ClassId,
    /// Explicit parameters; drawn from the seeded sampler when absent.
    pub params: Option<Vec<Q>>,
    pub bound: i64,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(class: ClassId, seed: u64) -> Self {
        SampleSpec {
            class,
            params: None,
            bound: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub pair: MetricPair<Q>,
    /// The scrambling matrix `T` with `pair = (Tᵀ g_can T, Tᵀ ǧ_can T)`.
    pub congruence: Matrix3<Q>,
    /// Ground truth with the ordering conventions applied.
    pub truth: CanonicalForm<Q>,
}

/// Integer matrix with entries in `[−bound, bound]`, redrawn until invertible.
pub fn random_congruence_with(rng: &mut impl Rng, bound: i64) -> Matrix3<Q> {
    let bound = bound.max(1);
    loop {
        let m = Matrix3::from_fn(|_, _| qi(rng.random_range(-bound..=bound)));
        if !m.det().is_zero() {
            return m;
        }
    }
}

pub fn random_congruence(seed: u64, bound: i64) -> Matrix3<Q> {
    random_congruence_with(&mut rng_from_seed(seed), bound)
}

/// `p/q` with `|p| ≤ 9` and `1 ≤ q ≤ 4`.
pub fn random_rational(rng: &mut impl Rng) -> Q {
    q(rng.random_range(-9..=9), rng.random_range(1..=4))
}

/// Parameters for `class`, redrawn until the side conditions hold.
pub fn random_params(rng: &mut impl Rng, class: ClassId) -> Vec<Q> {
    let n = class.param_names().len();
    loop {
        let params: Vec<Q> = (0..n).map(|_| random_rational(rng)).collect();
        if CanonicalForm::new(class, params.clone()).is_ok() {
            return params;
        }
    }
}

fn scramble(form: &CanonicalForm<Q>, t: Matrix3<Q>) -> Result<Sample> {
    let pair = MetricPair::new(
        form.canonical_g().congruence(&t),
        form.canonical_g_check().congruence(&t),
    )?;
    Ok(Sample {
        pair,
        congruence: t,
        truth: form.normalized(),
    })
}

pub fn sample_with(
    rng: &mut impl Rng,
    class: ClassId,
    params: Option<Vec<Q>>,
    bound: i64,
) -> Result<Sample> {
    let params = match params {
        Some(p) => p,
        None => random_params(rng, class),
    };
    let form = CanonicalForm::new(class, params)?;
    let t = random_congruence_with(rng, bound);
    scramble(&form, t)
}

pub fn sample_class(spec: &SampleSpec) -> Result<Sample> {
    let mut rng = rng_from_seed(spec.seed);
    sample_with(&mut rng, spec.class, spec.params.clone(), spec.bound)
}

/// The canonical pair scrambled by a given matrix.
pub fn sample_with_transform(form: &CanonicalForm<Q>, t: Matrix3<Q>) -> Result<Sample> {
    if t.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    scramble(form, t)
}

/// Roots closer than this fraction of the scale are one multiple root.
const ORACLE_MERGE: f64 = 1e-4;
/// Ambiguity band above the merge radius.
const ORACLE_MERGE_BAND: f64 = 10.0;
/// Relative size below which a singular value or form value is zero.
const ORACLE_ZERO: f64 = 1e-9;
/// Width of the ambiguity band above the zero threshold.
const ORACLE_BAND: f64 = 100.0;

fn ambiguous(msg: String) -> Error {
    Error::AmbiguousClassification(format!("oracle: {msg}"))
}

fn na(m: &Matrix3<f64>) -> Na3<f64> {
    Na3::from_fn(|i, j| m[(i, j)])
}

/// `-1`, `0` or `+1` with an ambiguity band of width [`ORACLE_BAND`].
fn oracle_sign(v: f64, zero: f64, what: &str) -> Result<i8> {
    if v.abs() <= zero {
        Ok(0)
    } else if v.abs() <= ORACLE_BAND * zero {
        Err(ambiguous(format!("{what} = {v:.3e} is near zero")))
    } else {
        Ok(if v > 0.0 { 1 } else { -1 })
    }
}

fn oracle_rank(m: &Na3<f64>, scale: f64) -> Result<usize> {
    let mut rank = 0;
    for sv in m.singular_values().iter() {
        if oracle_sign(*sv, ORACLE_ZERO * scale, "singular value")? != 0 {
            rank += 1;
        }
    }
    Ok(rank)
}

/// All three roots of `λ³ − a0λ² + a1λ − a2` by Durand–Kerner iteration.
fn durand_kerner([a0, a1, a2]: [f64; 3]) -> [Complex<f64>; 3] {
    let scale = 1f64.max(a0.abs()).max(a1.abs().sqrt()).max(a2.abs().cbrt());
    let p = |z: Complex<f64>| ((z - a0) * z + a1) * z - a2;
    let seed = Complex::new(0.4, 0.9) * scale;
    let mut z = [Complex::new(1.0, 0.0) * scale, seed, seed * seed / scale];
    for _ in 0..2000 {
        let mut delta = 0f64;
        for i in 0..3 {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-17 * scale {
            break;
        }
    }
    z
}

/// Right singular vector of the smallest singular value.
fn null_direction(m: &Na3<f64>) -> NaV3<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("three singular values");
    v_t.row(k).transpose()
}

/// Classification by a structurally different path: roots of the companion
/// matrix, clustered into multiplicities, then eigenvector norms, numeric
/// ranks and restricted-form signs. The discriminants are never consulted.
pub fn brute_force_class(pair: &MetricPair<Q>) -> Result<ClassId> {
    let f_exact = associated_operator(pair).f;
    // a1 as the sum of principal 2×2 minors
    let minor = |i: usize, j: usize| {
        f_exact[(i, i)].clone() * f_exact[(j, j)].clone()
            - f_exact[(i, j)].clone() * f_exact[(j, i)].clone()
    };
    let a0 = f_exact.trace().to_f64();
    let a1 = (minor(0, 1) + minor(0, 2) + minor(1, 2)).to_f64();
    let a2 = f_exact.det().to_f64();
    let f = f_exact.to_f64();
    let g = na(&pair.g().to_f64().to_matrix());
    let gc = na(&pair.g_check().to_f64().to_matrix());
    let fm = na(&f);

    let eig = durand_kerner([a0, a1, a2]);
    let s = eig.iter().fold(1f64, |m, z| m.max(z.norm()));
    let merge = ORACLE_MERGE * s;

    let mut real: Vec<f64> = Vec::new();
    let mut complex = false;
    for z in eig.iter() {
        if z.im.abs() <= merge {
            real.push(z.re);
        } else if z.im.abs() <= ORACLE_MERGE_BAND * merge {
            return Err(ambiguous(format!(
                "imaginary part {:.3e} near the merge radius",
                z.im
            )));
        } else {
            complex = true;
        }
    }
    if complex {
        return Ok(ClassId::T3);
    }
    real.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let gaps = [real[1] - real[0], real[2] - real[1]];
    for gap in gaps {
        if gap > merge && gap <= ORACLE_MERGE_BAND * merge {
            return Err(ambiguous(format!(
                "root gap {gap:.3e} near the merge radius"
            )));
        }
    }
    let merged = [gaps[0] <= merge, gaps[1] <= merge];
    let fscale = f.max_abs().max(s);
    let form_scale = |lambda: f64| {
        pair.g_check().to_f64().max_abs() + lambda.abs() * pair.g().to_f64().max_abs()
    };

    match merged {
        [false, false] => Ok(ClassId::T1),
        [true, true] => {
            let lambda = a0 / 3.0;
            let n = fm - Na3::identity() * lambda;
            match oracle_rank(&n, fscale)? {
                0 => Ok(ClassId::T7),
                1 => {
                    // sign of h(x, x) = g(N x, x) where N x is largest
                    let k = (0..3)
                        .max_by(|&i, &j| {
                            n.column(i).norm().partial_cmp(&n.column(j).norm()).unwrap()
                        })
                        .unwrap_or(0);
                    let h = gc - g * lambda;
                    let v = h[(k, k)] / form_scale(lambda);
                    match oracle_sign(v, ORACLE_ZERO, "rank-one form")? {
                        1 => Ok(ClassId::T8),
                        -1 => Ok(ClassId::T9),
                        _ => Err(ambiguous("rank-one form vanishes on its image".into())),
                    }
                }
                2 => Ok(ClassId::T10),
                _ => Err(ambiguous("F − λ·I is invertible at a triple root".into())),
            }
        }
        _ => {
            let simple = if merged[0] { real[2] } else { real[0] };
            let double = (a0 - simple) / 2.0;
            let v = null_direction(&(fm - Na3::identity() * simple));
            let gv = g * v;
            let norm = v.dot(&gv) / g.abs().max();
            match oracle_sign(norm, ORACLE_ZERO, "g(v, v)")? {
                1 => return Ok(ClassId::T2),
                -1 => {}
                _ => return Err(ambiguous("simple eigenvector is null".into())),
            }
            // Euclidean-orthonormal basis of the g-orthogonal complement of v
            let a = if gv.x.abs() < 0.5 * gv.norm() {
                NaV3::x()
            } else {
                NaV3::y()
            };
            let w1 = gv.cross(&a).normalize();
            let w2 = gv.cross(&w1).normalize();
            let h = gc - g * double;
            let hw = |x: &NaV3<f64>, y: &NaV3<f64>| x.dot(&(h * y));
            let m = nalgebra::Matrix2::new(hw(&w1, &w1), hw(&w1, &w2), hw(&w2, &w1), hw(&w2, &w2));
            let ev = m.symmetric_eigenvalues();
            let scale = form_scale(double);
            let mut pos = 0;
            let mut neg = 0;
            for e in ev.iter() {
                match oracle_sign(e / scale, ORACLE_ZERO, "restricted form eigenvalue")? {
                    1 => pos += 1,
                    -1 => neg += 1,
                    _ => {}
                }
            }
            match (pos, neg) {
                (0, 0) => Ok(ClassId::T4),
                (1, 0) => Ok(ClassId::T5),
                (0, 1) => Ok(ClassId::T6),
                _ => Err(ambiguous(
                    "restricted form has rank 2 at a double root".into(),
                )),
            }
        }
    }
}
