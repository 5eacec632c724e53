//! Superoperator algebra on a finite Hilbert space.
//!
//! Operators are vectorized row by row: `vec[i * n + j] = O[i][j]`, so a qubit
//! in the basis `(g, e)` is stored in the order `(gg, ge, eg, ee)`. With this
//! convention left multiplication is `A ⊗ I` and right multiplication is
//! `I ⊗ Bᵀ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A square operator on a `dim`-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertOperator {
    mat: CMat,
    hermitian: bool,
}

impl HilbertOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        Ok(Self {
            mat,
            hermitian: false,
        })
    }

    /// Builds an operator flagged Hermitian, rejecting inputs that deviate from
    /// their adjoint by more than `HERMITIAN_TOL` (relative to the largest entry).
    pub fn hermitian(mat: CMat) -> Result<Self> {
        let op = Self::new(mat)?;
        let dev = op.hermiticity_deviation();
        let scale = op.mat.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self {
            hermitian: true,
            ..op
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// A length-`dim²` vector in Liouville space.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedOperator {
    dim: usize,
    vec: CVec,
}

impl VectorizedOperator {
    pub fn from_vec(dim: usize, vec: CVec) -> Result<Self> {
        if vec.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                got: vec.len(),
            });
        }
        Ok(Self { dim, vec })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vec(&self) -> &CVec {
        &self.vec
    }

    pub fn into_vec(self) -> CVec {
        self.vec
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.vec[i * self.dim + i]).sum()
    }
}

/// A `dim² × dim²` superoperator.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleOperator {
    dim: usize,
    mat: CMat,
}

impl LiouvilleOperator {
    pub fn from_mat(dim: usize, mat: CMat) -> Result<Self> {
        let n = dim * dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { dim, mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: CMat::zeros(dim * dim, dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, v: &VectorizedOperator) -> Result<VectorizedOperator> {
        check_dims(self.dim, v.dim)?;
        Ok(VectorizedOperator {
            dim: self.dim,
            vec: &self.mat * &v.vec,
        })
    }

    pub fn compose(&self, other: &LiouvilleOperator) -> Result<LiouvilleOperator> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat * s,
        }
    }
}

impl std::ops::Add for LiouvilleOperator {
    type Output = LiouvilleOperator;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "superoperator dimensions differ");
        Self {
            dim: self.dim,
            mat: self.mat + rhs.mat,
        }
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimMismatch { expected, got });
    }
    Ok(())
}

pub fn vectorize(op: &HilbertOperator) -> VectorizedOperator {
    vectorize_mat(op.mat())
}

pub fn vectorize_mat(m: &CMat) -> VectorizedOperator {
    let n = m.nrows();
    let vec = CVec::from_iterator(n * n, (0..n * n).map(|k| m[(k / n, k % n)]));
    VectorizedOperator { dim: n, vec }
}

pub fn devectorize(v: &VectorizedOperator) -> HilbertOperator {
    HilbertOperator {
        mat: devectorize_mat(v),
        hermitian: false,
    }
}

pub fn devectorize_mat(v: &VectorizedOperator) -> CMat {
    let n = v.dim;
    CMat::from_fn(n, n, |i, j| v.vec[i * n + j])
}

/// `Tr[a† b]`.
pub fn hs_inner(a: &HilbertOperator, b: &HilbertOperator) -> Result<C64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.mat()
        .iter()
        .zip(b.mat().iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `⟨⟨a|b⟩⟩` for vectorized operators.
pub fn liouville_inner(a: &VectorizedOperator, b: &VectorizedOperator) -> Result<C64> {
    check_dims(a.dim, b.dim)?;
    Ok(a.vec.dotc(&b.vec))
}

/// The trace functional `⟨⟨I|`, returned as the vector of `I`.
pub fn trace_vector(dim: usize) -> CVec {
    vectorize_mat(&CMat::identity(dim, dim)).vec
}

/// Left multiplication `X ↦ A X`.
pub fn spre(a: &CMat) -> CMat {
    let n = a.nrows();
    a.kronecker(&CMat::identity(n, n))
}

/// Right multiplication `X ↦ X B`.
pub fn spost(b: &CMat) -> CMat {
    let n = b.nrows();
    CMat::identity(n, n).kronecker(&b.transpose())
}

/// Matrix of `X ↦ A X B`.
pub fn sprepost(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(&b.transpose())
}

/// `−i[h, ·]`.
pub fn commutator_superop(h: &HilbertOperator) -> LiouvilleOperator {
    let m = h.mat();
    let i = c(0.0, 1.0);
    LiouvilleOperator {
        dim: h.dim(),
        mat: (spre(m) - spost(m)) * (-i),
    }
}

/// `𝓓[o]· = 2 o · o† − o†o · − · o†o`.
pub fn lindblad_dissipator(o: &HilbertOperator) -> LiouvilleOperator {
    let m = o.mat();
    let od = m.adjoint();
    let odo = &od * m;
    LiouvilleOperator {
        dim: o.dim(),
        mat: sprepost(m, &od) * c(2.0, 0.0) - spre(&odo) - spost(&odo),
    }
}

/// `𝓢[o]· = 2 o · o − o² · − · o²`.
pub fn squeeze_dissipator(o: &HilbertOperator) -> LiouvilleOperator {
    let m = o.mat();
    let o2 = m * m;
    LiouvilleOperator {
        dim: o.dim(),
        mat: sprepost(m, m) * c(2.0, 0.0) - spre(&o2) - spost(&o2),
    }
}

/// Dense matrix exponential (Padé scaling and squaring).
pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

/// `e^{−𝓛₀ t} 𝓛 e^{𝓛₀ t}`.
pub fn frame_transform(
    l: &LiouvilleOperator,
    l0: &LiouvilleOperator,
    t: f64,
) -> Result<LiouvilleOperator> {
    check_dims(l.dim, l0.dim)?;
    let scaled = l0.mat() * c(t, 0.0);
    let fwd = expm(&scaled);
    let back = expm(&(-scaled));
    Ok(LiouvilleOperator {
        dim: l.dim,
        mat: back * l.mat() * fwd,
    })
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `σ₋ = |g⟩⟨e|` in the basis `(g, e)`.
pub fn sigma_minus() -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = c(1.0, 0.0);
    m
}

pub fn sigma_plus() -> CMat {
    sigma_minus().adjoint()
}

/// `σ_z = |g⟩⟨g| − |e⟩⟨e|`.
pub fn sigma_z() -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(-1.0, 0.0);
    m
}

/// Truncated annihilation operator on `n` Fock levels.
pub fn destroy(n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
    }
    m
}

/// Density matrix of a pure state.
pub fn pure_state(psi: &[C64]) -> VectorizedOperator {
    let n = psi.len();
    let m = CMat::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
    vectorize_mat(&m)
}

/// Partial trace over the second factor of a `ds ⊗ db` operator.
pub fn partial_trace_second(m: &CMat, ds: usize, db: usize) -> CMat {
    CMat::from_fn(ds, ds, |a, b| {
        (0..db).map(|j| m[(a * db + j, b * db + j)]).sum()
    })
}

/// Partial trace over the first factor of a `ds ⊗ db` operator.
pub fn partial_trace_first(m: &CMat, ds: usize, db: usize) -> CMat {
    CMat::from_fn(db, db, |a, b| {
        (0..ds).map(|j| m[(j * db + a, j * db + b)]).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(v: &VectorizedOperator) -> Vec<C64> {
        v.vec().iter().copied().collect()
    }

    #[test]
    fn identity_vectorizes_to_diagonal_pattern() {
        let v = vectorize_mat(&identity(2));
        assert_eq!(
            vals(&v),
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
        );
    }

    #[test]
    fn sigma_minus_sits_in_ge_slot() {
        let v = vectorize_mat(&sigma_minus());
        assert_eq!(v.vec()[1], c(1.0, 0.0));
        assert_eq!(v.vec().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn hs_inner_examples() {
        let i2 = HilbertOperator::new(identity(2)).unwrap();
        let sm = HilbertOperator::new(sigma_minus()).unwrap();
        let sp = HilbertOperator::new(sigma_plus()).unwrap();
        assert_eq!(hs_inner(&i2, &i2).unwrap(), c(2.0, 0.0));
        assert_eq!(hs_inner(&sm, &sp).unwrap(), c(0.0, 0.0));
        assert_eq!(hs_inner(&sm, &sm).unwrap(), c(1.0, 0.0));
        let three = HilbertOperator::new(identity(3)).unwrap();
        assert!(hs_inner(&i2, &three).is_err());
    }

    #[test]
    fn free_qubit_commutator_is_diagonal() {
        let h = HilbertOperator::hermitian(sigma_z() * c(-0.5, 0.0)).unwrap();
        let l = commutator_superop(&h);
        let expect = [c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { expect[i] } else { c(0.0, 0.0) };
                assert!((l.mat()[(i, j)] - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        assert!(matches!(
            HilbertOperator::hermitian(sigma_minus()),
            Err(Error::NotHermitian { .. })
        ));
        assert!(HilbertOperator::new(CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn dissipator_on_excited_state() {
        let d = lindblad_dissipator(&HilbertOperator::new(sigma_minus()).unwrap());
        let ee = vectorize_mat(&CMat::from_fn(2, 2, |i, j| {
            if i == 1 && j == 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }));
        let out = devectorize_mat(&d.apply(&ee).unwrap());
        assert_eq!(out[(0, 0)], c(2.0, 0.0));
        assert_eq!(out[(1, 1)], c(-2.0, 0.0));
        assert_eq!(out[(0, 1)], c(0.0, 0.0));
        let gg = pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(d.apply(&gg).unwrap().vec().norm() < 1e-15);
    }

    #[test]
    fn squeeze_dissipator_only_couples_coherences() {
        let s = squeeze_dissipator(&HilbertOperator::new(sigma_minus()).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let z = s.mat()[(i, j)];
                if (i, j) == (1, 2) {
                    assert_eq!(z, c(2.0, 0.0));
                } else {
                    assert_eq!(z, c(0.0, 0.0));
                }
            }
        }
        let zero = squeeze_dissipator(&HilbertOperator::new(identity(2)).unwrap());
        assert!(zero.mat().norm() < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, 1.0), c(-1.0, 0.0)]));
        let e = expm(&m);
        assert!((e[(0, 0)] - c(1f64.cos(), 1f64.sin())).norm() < 1e-14);
        assert!((e[(1, 1)] - c((-1f64).exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn partial_traces() {
        let a = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, i as f64));
        let b = CMat::from_fn(3, 3, |i, j| c((i * j) as f64 + 1.0, 0.0));
        let ab = a.kronecker(&b);
        let tb = b.trace();
        let ta = a.trace();
        assert!((partial_trace_second(&ab, 2, 3) - &a * tb).norm() < 1e-12);
        assert!((partial_trace_first(&ab, 2, 3) - &b * ta).norm() < 1e-12);
    }
}
