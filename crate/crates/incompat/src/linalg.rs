//! Complex dense linear algebra substrate: Hermitian eigendecomposition, tensor
//! products, partial trace and partial transpose, PSD projection, the symmetric
//! subspace projector, and Haar-random unitaries/states.
//!
//! Everything is dense and desk-scale; dimensions are capped at [`DIM_CAP`].

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Global Hermiticity tolerance. A single knob so verdicts stay consistent
/// across modules; CLI flags can pass an override down explicitly.
pub const HERM_TOL: f64 = 1e-10;

/// Default cap on any dense operator dimension (covers d^n tensor powers).
pub const DIM_CAP: usize = 4096;

/// Square complex matrix. The wrapper guarantees squareness; Hermiticity is
/// checked at the operations that require it.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    m: DMatrix<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        CMatrix {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// Wraps an owned `DMatrix`, which must be square.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(CMatrix { m })
    }

    /// Builds from row-major nested vectors.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Ok(CMatrix {
            m: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix {
            m: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        CMatrix {
            m: DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// Rank-one matrix u v†.
    pub fn outer(u: &DVector<C64>, v: &DVector<C64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(CMatrix { m: u * v.adjoint() })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix {
            m: self.m.adjoint(),
        }
    }

    pub fn conj_transpose_entrywise(&self) -> CMatrix {
        CMatrix {
            m: self.m.transpose(),
        }
    }

    /// max_{ij} |M_ij − (M†)_ij|, zero for exactly Hermitian matrices.
    pub fn herm_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let d = (self.m[(i, j)] - self.m[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.herm_defect() <= tol
    }

    /// (M + M†)/2.
    pub fn symmetrize(&self) -> CMatrix {
        CMatrix {
            m: (&self.m + self.m.adjoint()).map(|x| x * 0.5),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Real part of the trace (the trace itself for Hermitian matrices).
    pub fn trace_re(&self) -> f64 {
        self.m.trace().re
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            m: self.m.map(|x| x * s),
        }
    }

    pub fn scale_c(&self, s: C64) -> CMatrix {
        CMatrix {
            m: self.m.map(|x| x * s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// ⟨v|M|v⟩, real part.
    pub fn expectation(&self, v: &DVector<C64>) -> f64 {
        (v.adjoint() * &self.m * v)[(0, 0)].re
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            m: self.m.kronecker(&other.m),
        }
    }
}

impl Deref for CMatrix {
    type Target = DMatrix<C64>;

    fn deref(&self) -> &Self::Target {
        &self.m
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { m: &self.m * &rhs.m }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix { m: -self.m.clone() }
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.m[(i, j)].re, self.m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let n = rows.len();
        if n == 0 {
            return Err(D::Error::custom("matrix must be nonempty"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(D::Error::custom(format!(
                    "matrix is not square: row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    n
                )));
            }
        }
        Ok(CMatrix {
            m: DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])),
        })
    }
}

/// Entrywise max absolute difference.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let mut worst = 0.0f64;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let d = (a[(i, j)] - b[(i, j)]).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Kronecker product a ⊗ b.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Kronecker product of a sequence, left to right.
pub fn tensor_all(factors: &[&CMatrix]) -> CMatrix {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = acc.kron(f);
    }
    acc
}

/// Traces out every tensor factor except `keep`.
///
/// `dims` lists the factor dimensions in tensor order; their product must
/// equal the matrix dimension.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: usize) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if total != m.dim() {
        return Err(Error::DimMismatch {
            expected: m.dim(),
            got: total,
        });
    }
    if keep >= dims.len() {
        return Err(Error::OutOfRange(format!(
            "keep index {} with {} factors",
            keep,
            dims.len()
        )));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let dk = dims[keep];
    let sk = strides[keep];
    let rest_dims: Vec<usize> = (0..n).filter(|&f| f != keep).map(|f| dims[f]).collect();
    let rest_strides: Vec<usize> = (0..n).filter(|&f| f != keep).map(|f| strides[f]).collect();
    let rest_total: usize = rest_dims.iter().product();

    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for r in 0..rest_total {
        let mut base = 0usize;
        let mut rem = r;
        for (f, &df) in rest_dims.iter().enumerate().rev() {
            base += (rem % df) * rest_strides[f];
            rem /= df;
        }
        for i in 0..dk {
            for j in 0..dk {
                out[(i, j)] += m[(base + i * sk, base + j * sk)];
            }
        }
    }
    Ok(CMatrix { m: out })
}

/// Transposes one factor of a bipartite operator on C^{da} ⊗ C^{db}.
pub fn partial_transpose(m: &CMatrix, dims: (usize, usize), factor: usize) -> Result<CMatrix> {
    let (da, db) = dims;
    if da * db != m.dim() {
        return Err(Error::DimMismatch {
            expected: m.dim(),
            got: da * db,
        });
    }
    if factor > 1 {
        return Err(Error::OutOfRange(format!("factor {factor} for 2 factors")));
    }
    let mut out = DMatrix::<C64>::zeros(m.dim(), m.dim());
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    let src = if factor == 0 {
                        (ap * db + b, a * db + bp)
                    } else {
                        (a * db + bp, ap * db + b)
                    };
                    out[(a * db + b, ap * db + bp)] = m[src];
                }
            }
        }
    }
    Ok(CMatrix { m: out })
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Returns (eigenvalues, V) with m = V diag(λ) V† and V unitary. Rejects
/// inputs whose Hermiticity defect exceeds `tol`.
pub fn eig_hermitian(m: &CMatrix, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    let defect = m.herm_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let sym = m.symmetrize();
    let eig = sym.m.symmetric_eigen();
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, CMatrix { m: vectors }))
}

fn eig2_bounds(m: &DMatrix<C64>) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let c = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mid = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    (mid - disc, mid + disc)
}

pub(crate) fn min_eigenvalue_raw(m: &DMatrix<C64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].re,
        2 => eig2_bounds(m).0,
        _ => {
            let sym = (m + m.adjoint()).map(|x| x * 0.5);
            sym.symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        }
    }
}

pub(crate) fn max_eigenvalue_raw(m: &DMatrix<C64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].re,
        2 => eig2_bounds(m).1,
        _ => {
            let sym = (m + m.adjoint()).map(|x| x * 0.5);
            sym.symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    min_eigenvalue_raw(&m.m)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    max_eigenvalue_raw(&m.m)
}

pub(crate) fn psd_project_raw(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    match n {
        1 => DMatrix::from_element(1, 1, C64::new(m[(0, 0)].re.max(0.0), 0.0)),
        2 => {
            let sym = (m + m.adjoint()).map(|x| x * 0.5);
            let (lo, hi) = eig2_bounds(&sym);
            if lo >= 0.0 {
                sym
            } else if hi <= 0.0 {
                DMatrix::zeros(2, 2)
            } else if hi - lo < 1e-300 {
                sym
            } else {
                let id = DMatrix::<C64>::identity(2, 2);
                (sym - id.map(|x| x * lo)).map(|x| x * (hi / (hi - lo)))
            }
        }
        _ => {
            let sym = (m + m.adjoint()).map(|x| x * 0.5);
            let eig = sym.symmetric_eigen();
            let mut acc = DMatrix::<C64>::zeros(n, n);
            for k in 0..n {
                let lam = eig.eigenvalues[k];
                if lam > 0.0 {
                    let v = eig.eigenvectors.column(k);
                    acc += (v * v.adjoint()).map(|x| x * lam);
                }
            }
            acc
        }
    }
}

/// PSD projection together with the smallest eigenvalue of the input, so a
/// caller needing both pays for one eigendecomposition.
pub(crate) fn psd_project_with_min(m: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let n = m.nrows();
    match n {
        1 => {
            let x = m[(0, 0)].re;
            (DMatrix::from_element(1, 1, C64::new(x.max(0.0), 0.0)), x)
        }
        2 => {
            let sym = (m + m.adjoint()).map(|x| x * 0.5);
            let (lo, hi) = eig2_bounds(&sym);
            let proj = if lo >= 0.0 {
                sym
            } else if hi <= 0.0 {
                DMatrix::zeros(2, 2)
            } else if hi - lo < 1e-300 {
                sym
            } else {
                let id = DMatrix::<C64>::identity(2, 2);
                (sym - id.map(|x| x * lo)).map(|x| x * (hi / (hi - lo)))
            };
            (proj, lo)
        }
        _ => {
            let sym = (m + m.adjoint()).map(|x| x * 0.5);
            let eig = sym.symmetric_eigen();
            let mut acc = DMatrix::<C64>::zeros(n, n);
            let mut lo = f64::INFINITY;
            for k in 0..n {
                let lam = eig.eigenvalues[k];
                lo = lo.min(lam);
                if lam > 0.0 {
                    let v = eig.eigenvectors.column(k);
                    acc += (v * v.adjoint()).map(|x| x * lam);
                }
            }
            (acc, lo)
        }
    }
}

/// Nearest positive semidefinite matrix in Frobenius norm (eigenvalue
/// clipping at zero). Rejects non-Hermitian input.
pub fn psd_project(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let defect = m.herm_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(CMatrix {
        m: psd_project_raw(&m.m),
    })
}

/// Binomial coefficient, exact for the desk-scale arguments used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Projector onto the symmetric subspace of (C^d)^⊗n, as the average of all
/// n! permutation operators.
pub fn symmetric_projector(d: usize, n: usize, cap: usize) -> Result<CMatrix> {
    if d < 1 || n < 1 {
        return Err(Error::OutOfRange(format!("d = {d}, n = {n}")));
    }
    let total = d.checked_pow(n as u32).ok_or(Error::ResourceCap {
        what: "tensor power dimension",
        needed: usize::MAX,
        cap,
    })?;
    if total > cap {
        return Err(Error::ResourceCap {
            what: "tensor power dimension",
            needed: total,
            cap,
        });
    }
    let mut strides = vec![1usize; n];
    for k in (0..n - 1).rev() {
        strides[k] = strides[k + 1] * d;
    }
    let mut acc = DMatrix::<C64>::zeros(total, total);
    let mut digits = vec![0usize; n];
    let mut permuted = vec![0usize; n];
    let perms: Vec<Vec<usize>> = itertools::Itertools::permutations(0..n, n).collect();
    let weight = C64::new(1.0 / perms.len() as f64, 0.0);
    for perm in &perms {
        for b in 0..total {
            let mut rem = b;
            for k in (0..n).rev() {
                digits[k] = rem % d;
                rem /= d;
            }
            for k in 0..n {
                permuted[k] = digits[perm[k]];
            }
            let row: usize = (0..n).map(|k| permuted[k] * strides[k]).sum();
            acc[(row, b)] += weight;
        }
    }
    Ok(CMatrix { m: acc })
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the R-diagonal
/// phase fix. Deterministic for a given random stream state.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let mut g = DMatrix::<C64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    CMatrix { m: u }
}

/// Haar-random pure state (normalized complex Gaussian vector); distributed
/// as U|e_0⟩ for Haar U.
pub fn haar_state(d: usize, rng: &mut impl Rng) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let n = v.norm();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
    .unwrap()
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
    .unwrap()
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
    .unwrap()
}

/// v⃗·σ⃗ for a real 3-vector.
pub fn bloch_operator(v: [f64; 3]) -> CMatrix {
    let x = pauli_x().scale(v[0]);
    let y = pauli_y().scale(v[1]);
    let z = pauli_z().scale(v[2]);
    &(&x + &y) + &z
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(d, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
        random_matrix(d, rng).symmetrize()
    }

    #[test]
    fn tensor_identities() {
        let i2 = CMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), CMatrix::identity(4));

        let xx = tensor(&pauli_x(), &pauli_x());
        let e00 = DVector::from_fn(4, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let out = xx.as_dmatrix() * e00;
        assert!((out[3].re - 1.0).abs() < 1e-15);
        assert!(out[0].norm() + out[1].norm() + out[2].norm() < 1e-15);
    }

    #[test]
    fn tensor_trace_multiplicative() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        let lhs = tensor(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn tensor_associative() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let c = random_matrix(2, &mut rng);
        let lhs = tensor(&tensor(&a, &b), &c);
        let rhs = tensor(&a, &tensor(&b, &c));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
    }

    #[test]
    fn partial_trace_product_factorization() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let ab = tensor(&a, &b);
        let got = partial_trace(&ab, &[2, 3], 0).unwrap();
        let want = a.scale_c(b.trace());
        assert!(max_abs_diff(&got, &want) < 1e-13);
        let got1 = partial_trace(&ab, &[2, 3], 1).unwrap();
        let want1 = b.scale_c(a.trace());
        assert!(max_abs_diff(&got1, &want1) < 1e-13);
    }

    #[test]
    fn partial_trace_identity_and_trace_preserving() {
        let got = partial_trace(&CMatrix::identity(4), &[2, 2], 1).unwrap();
        assert!(max_abs_diff(&got, &CMatrix::identity(2).scale(2.0)) < 1e-15);

        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let m = random_hermitian(4, &mut rng);
        let pt = partial_trace(&m, &[2, 2], 0).unwrap();
        assert!((pt.trace() - m.trace()).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_three_factors() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(2, &mut rng);
        let c = random_matrix(3, &mut rng);
        let abc = tensor_all(&[&a, &b, &c]);
        let got = partial_trace(&abc, &[2, 2, 3], 1).unwrap();
        let want = b.scale_c(a.trace() * c.trace());
        assert!(max_abs_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn eig_hermitian_basics() {
        let (vals, _) = eig_hermitian(&CMatrix::from_diagonal(&[2.0, 1.0]), HERM_TOL).unwrap();
        assert_eq!(vals, vec![1.0, 2.0]);

        let (vals, _) = eig_hermitian(&pauli_x(), HERM_TOL).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_hermitian_reconstruction() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let m = random_hermitian(5, &mut rng);
        let (vals, v) = eig_hermitian(&m, HERM_TOL).unwrap();
        let rebuilt = &(&v * &CMatrix::from_diagonal(&vals)) * &v.adjoint();
        assert!(max_abs_diff(&rebuilt, &m) < 1e-10 * 5.0);
        let vtv = &v.adjoint() * &v;
        assert!(max_abs_diff(&vtv, &CMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn eig_hermitian_rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            eig_hermitian(&m, HERM_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn symmetric_projector_small_cases() {
        let s = symmetric_projector(2, 2, DIM_CAP).unwrap();
        let mut sw = DMatrix::<C64>::zeros(4, 4);
        for (i, j) in [(0usize, 0usize), (1, 2), (2, 1), (3, 3)] {
            sw[(i, j)] = C64::new(1.0, 0.0);
        }
        let swap = CMatrix::from_dmatrix(sw).unwrap();
        let want = (&swap + &CMatrix::identity(4)).scale(0.5);
        assert!(max_abs_diff(&s, &want) < 1e-15);
        assert!((s.trace_re() - 3.0).abs() < 1e-12);

        let s1 = symmetric_projector(5, 1, DIM_CAP).unwrap();
        assert!(max_abs_diff(&s1, &CMatrix::identity(5)) < 1e-15);
    }

    #[test]
    fn symmetric_projector_idempotent_trace() {
        let s = symmetric_projector(2, 3, DIM_CAP).unwrap();
        assert!((s.trace_re() - binomial(4, 3) as f64).abs() < 1e-10);
        let s2 = &s * &s;
        assert!(max_abs_diff(&s2, &s) < 1e-12);
        assert!(s.herm_defect() < 1e-12);

        let s32 = symmetric_projector(3, 2, DIM_CAP).unwrap();
        assert!((s32.trace_re() - binomial(4, 2) as f64).abs() < 1e-10);
        let spectrum = eig_hermitian(&s32, HERM_TOL).unwrap().0;
        for lam in spectrum {
            assert!(lam.abs() < 1e-12 || (lam - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_projector_cap() {
        assert!(matches!(
            symmetric_projector(8, 5, DIM_CAP),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn haar_unitary_is_unitary_and_seeded() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let u = haar_unitary(5, &mut rng);
        let utu = &u.adjoint() * &u;
        assert!(max_abs_diff(&utu, &CMatrix::identity(5)) < 1e-12);

        let mut rng1 = ChaCha12Rng::seed_from_u64(8);
        let mut rng2 = ChaCha12Rng::seed_from_u64(8);
        let a = haar_unitary(4, &mut rng1);
        let b = haar_unitary(4, &mut rng2);
        assert_eq!(a, b);

        let mut rng3 = ChaCha12Rng::seed_from_u64(9);
        let u1 = haar_unitary(1, &mut rng3);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psd_project_cases() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let m = random_hermitian(3, &mut rng);
        let p = psd_project(&m, HERM_TOL).unwrap();
        let pp = psd_project(&p, HERM_TOL).unwrap();
        assert!(max_abs_diff(&p, &pp) < 1e-12);

        let clipped = psd_project(&CMatrix::from_diagonal(&[1.0, -1.0]), HERM_TOL).unwrap();
        assert!(max_abs_diff(&clipped, &CMatrix::from_diagonal(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn psd_project_is_optimal_clipping() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for d in [2usize, 3, 4] {
            let m = random_hermitian(d, &mut rng);
            let p = psd_project(&m, HERM_TOL).unwrap();
            assert!(min_eigenvalue(&p) > -1e-12);
            let ours = (&p - &m).frobenius_norm();
            let (vals, v) = eig_hermitian(&m, HERM_TOL).unwrap();
            for mask in 0..(1usize << d) {
                let kept: Vec<f64> = (0..d)
                    .map(|k| if mask >> k & 1 == 1 { vals[k] } else { 0.0 })
                    .collect();
                if kept.iter().any(|&x| x < 0.0) {
                    continue;
                }
                let cand = &(&v * &CMatrix::from_diagonal(&kept)) * &v.adjoint();
                let dist = (&cand - &m).frobenius_norm();
                assert!(ours <= dist + 1e-12);
            }
        }
    }

    #[test]
    fn min_eigenvalue_2x2_matches_full_eig() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..50 {
            let m = random_hermitian(2, &mut rng);
            let fast = min_eigenvalue(&m);
            let slow = eig_hermitian(&m, HERM_TOL).unwrap().0[0];
            assert!((fast - slow).abs() < 1e-13);
            let fast_max = max_eigenvalue(&m);
            let slow_max = eig_hermitian(&m, HERM_TOL).unwrap().0[1];
            assert!((fast_max - slow_max).abs() < 1e-13);
        }
    }

    #[test]
    fn partial_transpose_swap_spectrum() {
        let e = |k: usize| DVector::from_fn(4, |i, _| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0));
        let psi = (e(0) + e(3)).map(|x| x * std::f64::consts::FRAC_1_SQRT_2);
        let rho = CMatrix::outer(&psi, &psi).unwrap();
        let pt = partial_transpose(&rho, (2, 2), 0).unwrap();
        let min = min_eigenvalue(&pt);
        assert!((min + 0.5).abs() < 1e-12);
        let back = partial_transpose(&pt, (2, 2), 0).unwrap();
        assert!(max_abs_diff(&back, &rho) < 1e-15);

        let pt1 = partial_transpose(&rho, (2, 2), 1).unwrap();
        let min1 = min_eigenvalue(&pt1);
        assert!((min1 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let m = random_matrix(3, &mut rng);
        let json = serde_json::to_string(&m).unwrap();
        let back: CMatrix = serde_json::from_str(&json).unwrap();
        assert!(max_abs_diff(&m, &back) < 1e-15);

        let ragged = "[[ [0,0], [1,0] ], [ [0,0] ]]";
        assert!(serde_json::from_str::<CMatrix>(ragged).is_err());
    }

    #[test]
    fn bloch_operator_pauli_axes() {
        assert!(max_abs_diff(&bloch_operator([1.0, 0.0, 0.0]), &pauli_x()) < 1e-15);
        assert!(max_abs_diff(&bloch_operator([0.0, 0.0, 1.0]), &pauli_z()) < 1e-15);
        let m = bloch_operator([0.6, 0.0, 0.8]);
        let (vals, _) = eig_hermitian(&m, HERM_TOL).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }
}
