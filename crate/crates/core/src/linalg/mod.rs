//! Dense complex linear algebra for the 2-, 4-, 8- and 16-dimensional
//! objects that appear in the protocol.

mod jacobi;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;
use thiserror::Error;

use crate::tol;

pub use jacobi::{symmetric_eigen, SymEigen};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("expected {expected} entries for dimension {dim}, got {got}")]
    Storage { dim: usize, expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("factor dimensions multiply to {product}, operator has dimension {dim}")]
    FactorDims { product: usize, dim: usize },
    #[error("invalid subsystem index {0}")]
    Subsystem(usize),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
}

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<C64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if dim == 0 || data.len() != dim * dim {
            return Err(LinalgError::Storage { dim, expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Real matrix from row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= tol::STRUCTURAL
    }

    /// Hermitian, unit trace and no eigenvalue below `-1e-10`.
    pub fn is_density(&self) -> bool {
        if !self.is_hermitian() || (self.trace() - C64::new(1.0, 0.0)).norm() > tol::SPECTRAL {
            return false;
        }
        match hermitian_eig(self) {
            Ok(e) => e.values[0] >= -tol::SPECTRAL,
            Err(_) => false,
        }
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian() && hermitian_eig(self).map(|e| e.values[0] >= -tol).unwrap_or(false)
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = C64::zero();
        for r in 0..n {
            for k in 0..n {
                acc += self.data[r * n + k] * other.data[k * n + r];
            }
        }
        acc
    }

    pub fn apply(&self, ket: &Ket) -> Ket {
        assert_eq!(self.dim, ket.dim(), "dimension mismatch");
        let n = self.dim;
        let amps = (0..n)
            .map(|r| (0..n).map(|c| self.data[r * n + c] * ket.amps[c]).sum())
            .collect();
        Ket { amps }
    }

    /// `<psi| self |psi>`.
    pub fn expectation(&self, ket: &Ket) -> C64 {
        ket.inner(&self.apply(ket))
    }

    /// `self * other * self^dagger`.
    pub fn conjugate(&self, other: &Self) -> Self {
        &(self * other) * &self.dagger()
    }
}

impl<'a> Mul<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &'a DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = DenseOperator::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &'a DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &'a DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;

    fn neg(self) -> DenseOperator {
        self.scale_real(-1.0)
    }
}

/// State vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn from_real(amps: &[f64]) -> Self {
        Self { amps: amps.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::zero(); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self, LinalgError> {
        let n = self.norm();
        if n == 0.0 {
            return Err(LinalgError::ZeroVector);
        }
        Ok(Self { amps: self.amps.iter().map(|a| a / n).collect() })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn projector(&self) -> DenseOperator {
        let n = self.dim();
        let mut out = DenseOperator::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        out
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ket { amps }
    }
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = DenseOperator::zeros(n);
    for ar in 0..na {
        for ac in 0..na {
            let x = a.get(ar, ac);
            if x.is_zero() {
                continue;
            }
            for br in 0..nb {
                for bc in 0..nb {
                    out.data[(ar * nb + br) * n + ac * nb + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    out
}

/// Tensor product of a list of factors, left to right.
pub fn kron_all(factors: &[&DenseOperator]) -> DenseOperator {
    let mut it = factors.iter();
    let first = (*it.next().expect("at least one factor")).clone();
    it.fold(first, |acc, f| kron(&acc, f))
}

/// Trace out every factor not listed in `keep`. Factors keep their original order.
pub fn partial_trace(
    a: &DenseOperator,
    dims: &[usize],
    keep: &[usize],
) -> Result<DenseOperator, LinalgError> {
    let product: usize = dims.iter().product();
    if product != a.dim {
        return Err(LinalgError::FactorDims { product, dim: a.dim });
    }
    for (i, &k) in keep.iter().enumerate() {
        if k >= dims.len() || keep[..i].contains(&k) {
            return Err(LinalgError::Subsystem(k));
        }
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();

    // split every full index into (kept index, traced index)
    let split: Vec<(usize, usize)> = (0..product)
        .map(|mut idx| {
            let mut digits = vec![0usize; dims.len()];
            for f in (0..dims.len()).rev() {
                digits[f] = idx % dims[f];
                idx /= dims[f];
            }
            let (mut k, mut t) = (0usize, 0usize);
            for (f, &d) in digits.iter().enumerate() {
                if kept.contains(&f) {
                    k = k * dims[f] + d;
                } else {
                    t = t * dims[f] + d;
                }
            }
            (k, t)
        })
        .collect();

    let out_dim: usize = kept.iter().map(|&f| dims[f]).product();
    let mut out = DenseOperator::zeros(out_dim);
    for r in 0..product {
        let (kr, tr) = split[r];
        for c in 0..product {
            let (kc, tc) = split[c];
            if tr == tc {
                out.data[kr * out_dim + kc] += a.data[r * product + c];
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Ket>,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> DenseOperator {
        let n = self.vectors.first().map(Ket::dim).unwrap_or(0);
        let mut out = DenseOperator::zeros(n);
        for (l, v) in self.values.iter().zip(&self.vectors) {
            out = &out + &v.projector().scale_real(*l);
        }
        out
    }
}

/// Hermitian eigensolver via the real symmetric embedding `[[Re, -Im], [Im, Re]]`.
pub fn hermitian_eig(a: &DenseOperator) -> Result<HermitianEigen, LinalgError> {
    let defect = a.hermitian_defect();
    if defect > tol::STRUCTURAL {
        return Err(LinalgError::NotHermitian(defect));
    }
    let n = a.dim;
    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = a.get(r, c);
            emb[r * m + c] = z.re;
            emb[r * m + n + c] = -z.im;
            emb[(n + r) * m + c] = z.im;
            emb[(n + r) * m + n + c] = z.re;
        }
    }
    let eig = symmetric_eigen(&emb, m);

    // each eigenvalue shows up twice; keep one complex vector per copy,
    // Gram-Schmidt against what has been accepted so far
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Ket> = Vec::with_capacity(n);
    for k in 0..m {
        if vectors.len() == n {
            break;
        }
        let col = eig.vector(k);
        let mut z = Ket { amps: (0..n).map(|i| C64::new(col[i], col[n + i])).collect() };
        for v in &vectors {
            let overlap = v.inner(&z);
            for (zi, vi) in z.amps.iter_mut().zip(&v.amps) {
                *zi -= overlap * vi;
            }
        }
        let norm = z.norm();
        if norm > 0.5 {
            vectors.push(Ket { amps: z.amps.iter().map(|x| x / norm).collect() });
            values.push(eig.values[k]);
        }
    }
    debug_assert_eq!(vectors.len(), n);
    Ok(HermitianEigen { values, vectors })
}

/// Trace norm of `rho - sigma` (not halved).
pub fn trace_distance(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64, LinalgError> {
    if rho.dim != sigma.dim {
        return Err(LinalgError::DimMismatch(rho.dim, sigma.dim));
    }
    let diff = rho - sigma;
    Ok(hermitian_eig(&diff)?.values.iter().map(|l| l.abs()).sum())
}

/// `<psi| rho |psi>`.
pub fn state_fidelity(psi: &Ket, rho: &DenseOperator) -> Result<f64, LinalgError> {
    if psi.dim() != rho.dim {
        return Err(LinalgError::DimMismatch(psi.dim(), rho.dim));
    }
    Ok(rho.expectation(psi).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bell_phi_plus, pauli, singlet, werner};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identities() {
        let i2 = DenseOperator::identity(2);
        assert!(kron(&i2, &i2).approx_eq(&DenseOperator::identity(4), 0.0));

        let z = pauli(3).unwrap().matrix().clone();
        let zz = kron(&z, &z);
        let k00 = Ket::basis(4, 0);
        assert!((zz.expectation(&k00) - c(1.0, 0.0)).norm() < 1e-15);

        let x = pauli(1).unwrap().matrix().clone();
        let y = pauli(2).unwrap().matrix().clone();
        assert!(kron(&x, &y).trace().norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let phi = bell_phi_plus(2).unwrap().projector();
        let rb = partial_trace(&phi, &[2, 2], &[0]).unwrap();
        assert!(rb.approx_eq(&DenseOperator::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let w = werner(0.3).unwrap();
        let same = partial_trace(&w, &[2, 2], &[1, 0]).unwrap();
        assert!(same.approx_eq(&w, 0.0));
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let w = werner(0.3).unwrap();
        assert_eq!(
            partial_trace(&w, &[2, 3], &[0]),
            Err(LinalgError::FactorDims { product: 6, dim: 4 })
        );
        assert_eq!(partial_trace(&w, &[2, 2], &[2]), Err(LinalgError::Subsystem(2)));
    }

    #[test]
    fn eig_of_sigma_z() {
        let e = hermitian_eig(pauli(3).unwrap().matrix()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_handles_degenerate_complex_spectrum() {
        // sigma_y ⊗ I has two doubly degenerate eigenvalues
        let y = pauli(2).unwrap().matrix().clone();
        let m = kron(&y, &DenseOperator::identity(2));
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.values.len(), 4);
        assert!(e.reconstruct().approx_eq(&m, 1e-12));
        for i in 0..4 {
            for j in 0..4 {
                let g = e.vectors[i].inner(&e.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = DenseOperator::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn trace_distance_examples() {
        let w = werner(0.4).unwrap();
        assert!(trace_distance(&w, &w).unwrap() < 1e-12);
        let p0 = Ket::basis(2, 0).projector();
        let p1 = Ket::basis(2, 1).projector();
        assert!((trace_distance(&p0, &p1).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            trace_distance(&w, &p0),
            Err(LinalgError::DimMismatch(4, 2))
        );
    }

    #[test]
    fn fidelity_examples() {
        let phi = bell_phi_plus(2).unwrap();
        assert!((state_fidelity(&phi, &phi.projector()).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DenseOperator::identity(4).scale_real(0.25);
        assert!((state_fidelity(&phi, &mixed).unwrap() - 0.25).abs() < 1e-15);
        // direct evaluation: <Psi-| (v P + (1-v) I/4) |Psi-> = v + (1-v)/4
        for &v in &[0.0, 0.3, 0.7015, 1.0] {
            let f = state_fidelity(&singlet(), &werner(v).unwrap()).unwrap();
            assert!((f - (v + (1.0 - v) / 4.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn density_predicate() {
        assert!(werner(0.5).unwrap().is_density());
        assert!(!DenseOperator::identity(2).is_density());
        let not_psd = DenseOperator::from_real(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(!not_psd.is_density());
    }
}
