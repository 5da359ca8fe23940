//! Dense 3×3 algebra over any [`Field`]: determinants, inverses, congruence,
//! signature counting, and exact row reduction.
//!
//! Routines that decide whether a value is zero take a *relative* tolerance.
//! The absolute threshold is `tol * max_abs(input)`; exact scalars ignore it.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Q};

pub type Vector3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignatureTriple {
    pub positives: u8,
    pub negatives: u8,
    pub zeros: u8,
}

impl SignatureTriple {
    pub const MINKOWSKI: SignatureTriple = SignatureTriple {
        positives: 1,
        negatives: 2,
        zeros: 0,
    };

    pub fn new(positives: u8, negatives: u8, zeros: u8) -> Self {
        SignatureTriple {
            positives,
            negatives,
            zeros,
        }
    }
}

impl fmt::Display for SignatureTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.positives, self.negatives, self.zeros)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix3<T> {
    rows: [[T; 3]; 3],
}

impl<T> Index<(usize, usize)> for Matrix3<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.rows[i][j]
    }
}

impl<T: Field> Matrix3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Matrix3 { rows }
    }

    pub fn from_columns(cols: [Vector3<T>; 3]) -> Self {
        Matrix3::from_fn(|i, j| cols[j][i].clone())
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Matrix3 {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn zeros() -> Self {
        Matrix3::from_fn(|_, _| T::zero())
    }

    pub fn identity() -> Self {
        Matrix3::from_fn(|i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: [T; 3]) -> Self {
        Matrix3::from_fn(|i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    pub fn rows(&self) -> &[[T; 3]; 3] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Vector3<T> {
        self.rows[i].clone()
    }

    pub fn column(&self, j: usize) -> Vector3<T> {
        std::array::from_fn(|i| self.rows[i][j].clone())
    }

    pub fn map<U: Field>(&self, mut f: impl FnMut(&T) -> U) -> Matrix3<U> {
        Matrix3::from_fn(|i, j| f(&self.rows[i][j]))
    }

    pub fn to_f64(&self) -> Matrix3<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn transpose(&self) -> Self {
        Matrix3::from_fn(|i, j| self.rows[j][i].clone())
    }

    pub fn matmul(&self, other: &Matrix3<T>) -> Self {
        Matrix3::from_fn(|i, j| {
            (0..3).fold(T::zero(), |acc, k| {
                acc + self.rows[i][k].clone() * other.rows[k][j].clone()
            })
        })
    }

    pub fn mul_vec(&self, v: &Vector3<T>) -> Vector3<T> {
        std::array::from_fn(|i| dot(&self.rows[i], v))
    }

    pub fn add(&self, other: &Matrix3<T>) -> Self {
        Matrix3::from_fn(|i, j| self.rows[i][j].clone() + other.rows[i][j].clone())
    }

    pub fn sub(&self, other: &Matrix3<T>) -> Self {
        Matrix3::from_fn(|i, j| self.rows[i][j].clone() - other.rows[i][j].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    /// `self - lambda * I`
    pub fn shifted(&self, lambda: &T) -> Self {
        Matrix3::from_fn(|i, j| {
            if i == j {
                self.rows[i][j].clone() - lambda.clone()
            } else {
                self.rows[i][j].clone()
            }
        })
    }

    pub fn trace(&self) -> T {
        self.rows[0][0].clone() + self.rows[1][1].clone() + self.rows[2][2].clone()
    }

    pub fn det(&self) -> T {
        let m = &self.rows;
        m[0][0].clone() * minor(m, 1, 2, 1, 2) - m[0][1].clone() * minor(m, 1, 2, 0, 2)
            + m[0][2].clone() * minor(m, 1, 2, 0, 1)
    }

    pub fn adjugate(&self) -> Self {
        let m = &self.rows;
        // cofactor C_ij, adjugate is its transpose
        let cof = |i: usize, j: usize| {
            let r: Vec<usize> = (0..3).filter(|&r| r != i).collect();
            let c: Vec<usize> = (0..3).filter(|&c| c != j).collect();
            let v = minor(m, r[0], r[1], c[0], c[1]);
            if (i + j).is_multiple_of(2) {
                v
            } else {
                -v
            }
        };
        Matrix3::from_fn(|i, j| cof(j, i))
    }

    /// Inverse via the adjugate. Floats are rejected when `|det|` is at most
    /// `tol * max_abs^3`.
    pub fn inverse_tol(&self, tol: f64) -> Result<Self> {
        let det = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if det.is_negligible(tol * scale.powi(3)) {
            return Err(Error::SingularMatrix);
        }
        Ok(self.adjugate().map(|v| v.clone() / det.clone()))
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    /// Rank by row reduction.
    pub fn rank_tol(&self, tol: f64) -> usize {
        let (_, pivots) = rref(self.rows.iter().map(|r| r.to_vec()).collect(), 3, tol);
        pivots.len()
    }

    /// Null-space basis. Reduced row echelon form with leftmost pivots; each
    /// free variable is set to 1 in turn, in index order.
    pub fn kernel_basis_tol(&self, tol: f64) -> Vec<Vector3<T>> {
        kernel_of_rows(self.rows.iter().map(|r| r.to_vec()).collect(), tol)
    }

    /// One solution of `self * x = b` (free variables set to zero), or `None`
    /// when the system is inconsistent.
    pub fn solve_tol(&self, b: &Vector3<T>, tol: f64) -> Option<Vector3<T>> {
        let scale = self
            .max_abs()
            .max(b.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max));
        let aug: Vec<Vec<T>> = (0..3)
            .map(|i| {
                let mut r = self.rows[i].to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        let (red, pivots) = rref_abs(aug, 3, tol * scale);
        // inconsistent when a zero row carries a nonzero right-hand side
        for row in red.iter().skip(pivots.len()) {
            if !row[3].is_negligible(tol * scale) {
                return None;
            }
        }
        let mut x: Vector3<T> = std::array::from_fn(|_| T::zero());
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = red[r][3].clone();
        }
        Some(x)
    }
}

impl Matrix3<Q> {
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_tol(0.0)
    }

    pub fn rank(&self) -> usize {
        self.rank_tol(0.0)
    }

    /// Exact null-space basis, each vector cleared to coprime integers.
    pub fn kernel_basis(&self) -> Vec<Vector3<Q>> {
        self.kernel_basis_tol(0.0)
            .into_iter()
            .map(|v| clear_denominators(&v))
            .collect()
    }

    pub fn solve(&self, b: &Vector3<Q>) -> Option<Vector3<Q>> {
        self.solve_tol(b, 0.0)
    }
}

impl Matrix3<f64> {
    /// Exact rational copy; every finite binary64 value is a dyadic rational.
    pub fn to_exact(&self) -> Matrix3<Q> {
        self.map(|v| Q::from_float(*v).unwrap_or_else(Q::zero))
    }
}

fn minor<T: Field>(m: &[[T; 3]; 3], r0: usize, r1: usize, c0: usize, c1: usize) -> T {
    m[r0][c0].clone() * m[r1][c1].clone() - m[r0][c1].clone() * m[r1][c0].clone()
}

/// Symmetric 3×3 matrix with one stored value per unordered index pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix3<T> {
    // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
    upper: [T; 6],
}

const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

impl<T> Index<(usize, usize)> for SymMatrix3<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.upper[sym_index(i, j)]
    }
}

impl<T: Field> SymMatrix3<T> {
    /// Entries `m00, m01, m02, m11, m12, m22`.
    pub fn from_upper(upper: [T; 6]) -> Self {
        SymMatrix3 { upper }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        SymMatrix3 {
            upper: [f(0, 0), f(0, 1), f(0, 2), f(1, 1), f(1, 2), f(2, 2)],
        }
    }

    /// Builds from full rows; fails unless the rows are exactly symmetric.
    pub fn from_rows(rows: [[T; 3]; 3]) -> Result<Self> {
        let m = Matrix3::from_rows(rows);
        if !m.is_symmetric() {
            return Err(Error::Parse("matrix is not symmetric".into()));
        }
        Ok(SymMatrix3::from_fn(|i, j| m[(i, j)].clone()))
    }

    /// Symmetric part `(M + Mᵀ)/2` of a general matrix.
    pub fn symmetrize(m: &Matrix3<T>) -> Self {
        let two = T::from_i64(2);
        SymMatrix3::from_fn(|i, j| (m[(i, j)].clone() + m[(j, i)].clone()) / two.clone())
    }

    pub fn diag(d: [T; 3]) -> Self {
        let z = T::zero;
        let [a, b, c] = d;
        SymMatrix3::from_upper([a, z(), z(), b, z(), c])
    }

    pub fn identity() -> Self {
        SymMatrix3::diag([T::one(), T::one(), T::one()])
    }

    pub fn zeros() -> Self {
        SymMatrix3::from_fn(|_, _| T::zero())
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.upper[sym_index(i, j)]
    }

    pub fn to_matrix(&self) -> Matrix3<T> {
        Matrix3::from_fn(|i, j| self[(i, j)].clone())
    }

    pub fn map<U: Field>(&self, f: impl FnMut(&T) -> U) -> SymMatrix3<U> {
        SymMatrix3 {
            upper: self.upper.each_ref().map(f),
        }
    }

    pub fn to_f64(&self) -> SymMatrix3<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn add(&self, other: &SymMatrix3<T>) -> Self {
        SymMatrix3::from_fn(|i, j| self[(i, j)].clone() + other[(i, j)].clone())
    }

    pub fn sub(&self, other: &SymMatrix3<T>) -> Self {
        SymMatrix3::from_fn(|i, j| self[(i, j)].clone() - other[(i, j)].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn det(&self) -> T {
        self.to_matrix().det()
    }

    pub fn max_abs(&self) -> f64 {
        self.upper
            .iter()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// `uᵀ M v`
    pub fn bilinear(&self, u: &Vector3<T>, v: &Vector3<T>) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..3 {
                acc = acc + u[i].clone() * self[(i, j)].clone() * v[j].clone();
            }
        }
        acc
    }

    pub fn quadratic(&self, v: &Vector3<T>) -> T {
        self.bilinear(v, v)
    }

    /// `Tᵀ M T`; column `k` of `T` is the `k`-th new basis vector.
    pub fn congruence(&self, t: &Matrix3<T>) -> Self {
        let cols = [t.column(0), t.column(1), t.column(2)];
        SymMatrix3::from_fn(|i, j| self.bilinear(&cols[i], &cols[j]))
    }

    /// Gram matrix of the form on a list of vectors.
    pub fn gram(&self, basis: &[Vector3<T>]) -> Vec<Vec<T>> {
        basis
            .iter()
            .map(|u| basis.iter().map(|v| self.bilinear(u, v)).collect())
            .collect()
    }

    pub fn signature_tol(&self, tol: f64) -> SignatureTriple {
        let n = self.gram(&standard_basis());
        let threshold = tol * self.max_abs();
        let d = diagonalize_congruence(n, threshold);
        count_signs(&d.pivots, threshold)
    }
}

impl SymMatrix3<Q> {
    pub fn signature(&self) -> SignatureTriple {
        self.signature_tol(0.0)
    }
}

pub fn standard_basis<T: Field>() -> [Vector3<T>; 3] {
    std::array::from_fn(|k| std::array::from_fn(|i| if i == k { T::one() } else { T::zero() }))
}

pub(crate) fn count_signs<T: Field>(pivots: &[T], threshold: f64) -> SignatureTriple {
    let mut s = SignatureTriple::new(0, 0, 0);
    for p in pivots {
        if p.is_negligible(threshold) {
            s.zeros += 1;
        } else if p.is_positive() {
            s.positives += 1;
        } else {
            s.negatives += 1;
        }
    }
    s
}

/// Result of diagonalizing a symmetric form by congruence.
#[derive(Debug, Clone)]
pub struct Diagonalization<T> {
    /// New basis vectors, coordinates relative to the input basis.
    pub basis: Vec<Vec<T>>,
    /// The form's value on each new basis vector, in order.
    pub pivots: Vec<T>,
}

/// Congruence diagonalization of an `n×n` symmetric Gram matrix without square
/// roots. Pivot policy: the smallest-index nonzero diagonal entry; if the
/// remaining diagonal vanishes but some `m[i][j]` does not, the pair is split
/// hyperbolically into `e_i + e_j` and `e_i - e_j`.
pub fn diagonalize_congruence<T: Field>(gram: Vec<Vec<T>>, threshold: f64) -> Diagonalization<T> {
    let n = gram.len();
    let form = |u: &[T], v: &[T]| {
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + u[i].clone() * gram[i][j].clone() * v[j].clone();
            }
        }
        acc
    };
    let unit = |k: usize| -> Vec<T> {
        (0..n)
            .map(|i| if i == k { T::one() } else { T::zero() })
            .collect()
    };
    let mut remaining: Vec<Vec<T>> = (0..n).map(unit).collect();
    let mut basis = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);

    while !remaining.is_empty() {
        let diag: Vec<T> = remaining.iter().map(|v| form(v, v)).collect();
        let pick = diag.iter().position(|d| !d.is_negligible(threshold));
        let pick = match pick {
            Some(i) => i,
            None => {
                let mut split = None;
                'search: for i in 0..remaining.len() {
                    for j in i + 1..remaining.len() {
                        if !form(&remaining[i], &remaining[j]).is_negligible(threshold) {
                            split = Some((i, j));
                            break 'search;
                        }
                    }
                }
                match split {
                    Some((i, j)) => {
                        let plus: Vec<T> = remaining[i]
                            .iter()
                            .zip(&remaining[j])
                            .map(|(a, b)| a.clone() + b.clone())
                            .collect();
                        let minus: Vec<T> = remaining[i]
                            .iter()
                            .zip(&remaining[j])
                            .map(|(a, b)| a.clone() - b.clone())
                            .collect();
                        remaining[i] = plus;
                        remaining[j] = minus;
                        i
                    }
                    None => {
                        // form vanishes on what is left
                        for v in remaining.drain(..) {
                            pivots.push(T::zero());
                            basis.push(v);
                        }
                        break;
                    }
                }
            }
        };
        let v = remaining.remove(pick);
        let d = form(&v, &v);
        for w in remaining.iter_mut() {
            let c = form(&v, w) / d.clone();
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = wi.clone() - c.clone() * vi.clone();
            }
        }
        basis.push(v);
        pivots.push(d);
    }
    Diagonalization { basis, pivots }
}

pub fn dot<T: Field>(u: &Vector3<T>, v: &Vector3<T>) -> T {
    u.iter()
        .zip(v)
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn vadd<T: Field>(u: &Vector3<T>, v: &Vector3<T>) -> Vector3<T> {
    std::array::from_fn(|i| u[i].clone() + v[i].clone())
}

pub fn vsub<T: Field>(u: &Vector3<T>, v: &Vector3<T>) -> Vector3<T> {
    std::array::from_fn(|i| u[i].clone() - v[i].clone())
}

pub fn vscale<T: Field>(v: &Vector3<T>, s: &T) -> Vector3<T> {
    std::array::from_fn(|i| v[i].clone() * s.clone())
}

pub fn cross<T: Field>(u: &Vector3<T>, v: &Vector3<T>) -> Vector3<T> {
    [
        u[1].clone() * v[2].clone() - u[2].clone() * v[1].clone(),
        u[2].clone() * v[0].clone() - u[0].clone() * v[2].clone(),
        u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone(),
    ]
}

pub fn vec_to_f64<T: Field>(v: &Vector3<T>) -> Vector3<f64> {
    std::array::from_fn(|i| v[i].to_f64())
}

pub fn is_zero_vector<T: Field>(v: &Vector3<T>, threshold: f64) -> bool {
    v.iter().all(|x| x.is_negligible(threshold))
}

/// Multiplies out denominators and divides by the gcd of the numerators.
pub fn clear_denominators(v: &Vector3<Q>) -> Vector3<Q> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.clone();
    }
    std::array::from_fn(|i| Q::from_integer(&ints[i] / &g))
}

/// Reduced row echelon form of a matrix with `ncols` columns; pivot rows use
/// the largest-magnitude candidate in the leftmost usable column.
pub(crate) fn rref<T: Field>(
    rows: Vec<Vec<T>>,
    ncols: usize,
    tol: f64,
) -> (Vec<Vec<T>>, Vec<usize>) {
    let scale = rows
        .iter()
        .flatten()
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max);
    rref_abs(rows, ncols, tol * scale)
}

fn rref_abs<T: Field>(
    mut rows: Vec<Vec<T>>,
    ncols: usize,
    threshold: f64,
) -> (Vec<Vec<T>>, Vec<usize>) {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let best = (r..nrows)
            .filter(|&i| !rows[i][c].is_negligible(threshold))
            .max_by(|&a, &b| {
                rows[a][c]
                    .abs()
                    .partial_cmp(&rows[b][c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(p) = best else {
            for row in rows.iter_mut().skip(r) {
                row[c] = T::zero();
            }
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        for i in 0..nrows {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c].clone();
            for k in 0..rows[i].len() {
                let sub = factor.clone() * rows[r][k].clone();
                rows[i][k] = rows[i][k].clone() - sub;
            }
            rows[i][c] = T::zero();
        }
        pivots.push(c);
        r += 1;
    }
    (rows, pivots)
}

pub(crate) fn kernel_of_rows<T: Field>(rows: Vec<Vec<T>>, tol: f64) -> Vec<Vector3<T>> {
    let (red, pivots) = rref(rows, 3, tol);
    (0..3)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v: Vector3<T> = std::array::from_fn(|_| T::zero());
            v[free] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -red[r][free].clone();
            }
            v
        })
        .collect()
}

/// Exact basis of `{x : uᵀ x = 0}` for a nonzero `u`, integer-cleared.
pub fn orthogonal_complement(u: &Vector3<Q>) -> Vec<Vector3<Q>> {
    kernel_of_rows(vec![u.to_vec()], 0.0)
        .into_iter()
        .map(|v| clear_denominators(&v))
        .collect()
}

pub fn det3<T: Field>(m: &Matrix3<T>) -> T {
    m.det()
}

pub fn inverse3(m: &Matrix3<Q>) -> Result<Matrix3<Q>> {
    m.inverse()
}

pub fn congruence<T: Field>(t: &Matrix3<T>, m: &SymMatrix3<T>) -> SymMatrix3<T> {
    m.congruence(t)
}

pub fn signature(m: &SymMatrix3<Q>) -> SignatureTriple {
    m.signature()
}

pub fn rank3(m: &Matrix3<Q>) -> usize {
    m.rank()
}

pub fn kernel_basis(m: &Matrix3<Q>) -> Vec<Vector3<Q>> {
    m.kernel_basis()
}

/// Null vector of a rank-2 matrix: the cross product of two rows with the
/// largest magnitude. Zero when the rank is below 2.
pub fn null_vector<T: Field>(m: &Matrix3<T>) -> Vector3<T> {
    let mut best: Vector3<T> = std::array::from_fn(|_| T::zero());
    let mut best_norm = 0.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = cross(&m.row(i), &m.row(j));
        let n = vec_to_f64(&c).iter().map(|x| x * x).sum::<f64>();
        if n > best_norm || (T::EXACT && best_norm == 0.0 && !is_zero_vector(&c, 0.0)) {
            best_norm = n;
            best = c;
        }
    }
    best
}

/// Euclidean norm in binary64.
pub fn norm_f64<T: Field>(v: &Vector3<T>) -> f64 {
    vec_to_f64(v).iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `true` when `u` and `v` are linearly dependent.
pub fn parallel<T: Field>(u: &Vector3<T>, v: &Vector3<T>, threshold: f64) -> bool {
    is_zero_vector(&cross(u, v), threshold)
}

pub fn is_negative_q(v: &Q) -> bool {
    v.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn mq(rows: [[i64; 3]; 3]) -> Matrix3<Q> {
        Matrix3::from_rows(rows.map(|r| r.map(qi)))
    }

    fn sq(rows: [[i64; 3]; 3]) -> SymMatrix3<Q> {
        SymMatrix3::from_rows(rows.map(|r| r.map(qi))).unwrap()
    }

    fn v(x: [i64; 3]) -> Vector3<Q> {
        x.map(qi)
    }

    const MINK: [[i64; 3]; 3] = [[1, 0, 0], [0, -1, 0], [0, 0, -1]];
    const HYP: [[i64; 3]; 3] = [[0, 1, 0], [1, 0, 0], [0, 0, -1]];

    #[test]
    fn det3_examples() {
        assert_eq!(det3(&Matrix3::<Q>::identity()), qi(1));
        assert_eq!(det3(&mq(MINK)), qi(1));
        assert_eq!(det3(&mq(HYP)), qi(1));
        assert_eq!(sq(HYP).det(), qi(1));
    }

    #[test]
    fn inverse3_examples() {
        assert_eq!(inverse3(&mq(MINK)).unwrap(), mq(MINK));
        assert_eq!(inverse3(&mq(HYP)).unwrap(), mq(HYP));
        assert_eq!(
            inverse3(&mq([[1, 0, 0], [0, 0, 0], [0, 0, 0]])),
            Err(Error::SingularMatrix)
        );
        let m = mq([[2, 1, 0], [1, 3, 4], [0, 5, -1]]);
        assert_eq!(m.matmul(&m.inverse().unwrap()), Matrix3::identity());
    }

    #[test]
    fn float_inverse_rejects_near_singular() {
        let m = Matrix3::from_rows([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0 + 1e-14], [0.0, 1.0, 1.0]]);
        assert_eq!(m.inverse_tol(1e-10), Err(Error::SingularMatrix));
        let id = Matrix3::<f64>::identity();
        assert_eq!(id.inverse_tol(1e-10).unwrap(), id);
    }

    #[test]
    fn congruence_examples() {
        let m = sq([[3, 1, 2], [1, 0, 5], [2, 5, -7]]);
        assert_eq!(congruence(&Matrix3::identity(), &m), m);
        assert_eq!(
            congruence(&mq([[2, 0, 0], [0, 1, 0], [0, 0, 1]]), &sq(MINK)),
            sq([[4, 0, 0], [0, -1, 0], [0, 0, -1]])
        );
        assert_eq!(
            congruence(&mq([[0, 1, 0], [1, 0, 0], [0, 0, 1]]), &sq(MINK)),
            sq([[-1, 0, 0], [0, 1, 0], [0, 0, -1]])
        );
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&sq(MINK)), SignatureTriple::new(1, 2, 0));
        assert_eq!(signature(&sq(HYP)), SignatureTriple::new(1, 2, 0));
        assert_eq!(
            signature(&sq([[1, 0, 0], [0, 0, 0], [0, 0, -1]])),
            SignatureTriple::new(1, 1, 1)
        );
        assert_eq!(
            signature(&sq([[0, 0, 0], [0, 0, 0], [0, 0, 0]])),
            SignatureTriple::new(0, 0, 3)
        );
        // rank-1 indefinite pieces that need the hyperbolic split twice
        assert_eq!(
            signature(&sq([[0, 1, 1], [1, 0, 1], [1, 1, 0]])),
            SignatureTriple::new(1, 2, 0)
        );
        assert_eq!(SignatureTriple::new(2, 1, 0).to_string(), "(2,1,0)");
    }

    #[test]
    fn rank3_examples() {
        assert_eq!(rank3(&Matrix3::zeros()), 0);
        assert_eq!(rank3(&mq([[1, 0, 0], [0, 0, 0], [0, 0, 0]])), 1);
        assert_eq!(rank3(&mq([[0, 0, 1], [0, 0, 0], [0, -1, 0]])), 2);
        assert_eq!(rank3(&mq([[1, 2, 3], [2, 4, 6], [1, 1, 1]])), 2);
    }

    #[test]
    fn kernel_basis_examples() {
        assert_eq!(
            kernel_basis(&Matrix3::zeros()),
            vec![v([1, 0, 0]), v([0, 1, 0]), v([0, 0, 1])]
        );
        assert_eq!(
            kernel_basis(&mq([[1, 0, 0], [0, 1, 0], [0, 0, 0]])),
            vec![v([0, 0, 1])]
        );
        assert_eq!(
            kernel_basis(&mq([[0, 0, 1], [0, 0, 0], [0, -1, 0]])),
            vec![v([1, 0, 0])]
        );
        // denominators cleared, gcd removed
        let m = Matrix3::from_rows([
            [qi(2), qi(3), qi(0)],
            [qi(0), qi(0), qi(0)],
            [qi(0), qi(0), qi(0)],
        ]);
        assert_eq!(kernel_basis(&m), vec![v([-3, 2, 0]), v([0, 0, 1])]);
        assert!(kernel_basis(&Matrix3::<Q>::identity()).is_empty());
    }

    #[test]
    fn solve_particular() {
        let n = mq([[0, 0, 0], [1, 0, 0], [0, 0, -3]]);
        assert_eq!(n.solve(&v([0, 1, 0])), Some(v([1, 0, 0])));
        assert_eq!(n.solve(&v([1, 0, 0])), None);
    }

    #[test]
    fn diagonalization_pivots_in_order() {
        let g = sq(HYP);
        let d = diagonalize_congruence(g.gram(&standard_basis()), 0.0);
        assert_eq!(d.pivots, vec![qi(-1), qi(2), qi(-2)]);
        assert_eq!(d.basis[0], vec![qi(0), qi(0), qi(1)]);
        assert_eq!(d.basis[1], vec![qi(1), qi(1), qi(0)]);
        assert_eq!(d.basis[2], vec![qi(1), qi(-1), qi(0)]);
    }

    #[test]
    fn orthogonal_complement_basis() {
        let w = orthogonal_complement(&v([0, 0, -1]));
        assert_eq!(w, vec![v([1, 0, 0]), v([0, 1, 0])]);
        let w = orthogonal_complement(&[q(1, 2), qi(1), qi(0)]);
        assert_eq!(w, vec![v([-2, 1, 0]), v([0, 0, 1])]);
    }
}
