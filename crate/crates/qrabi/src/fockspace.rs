//! Operators on the truncated Hilbert space `Fock(n_max) ⊗ C²`.
//!
//! Basis ordering is `|n, σ⟩` with the spin index varying fastest:
//! `index = 2 n + s`, `s = 0` for `|g⟩` and `s = 1` for `|e⟩`. This makes the
//! 2×2 spin blocks of the coupled Hamiltonian directly visible in the matrix.
//!
//! Spin conventions: `σ_z |g⟩ = −|g⟩`, `σ_z |e⟩ = +|e⟩`, `σ_+ = |e⟩⟨g|`, and
//! the triple `(σ_x, σ_y, σ_z)` is right-handed, `[σ_x, σ_y] = 2 i σ_z`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Hermiticity tolerance for flagged operators, in model units.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Truncated Hilbert-space descriptor: Fock levels `0..=n_max` times spin-1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    n_max: usize,
}

/// Spin-1/2 basis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Ground,
    Excited,
}

impl Truncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Ok(Truncation { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Total dimension `2 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Flat index of `|n, σ⟩`.
    pub fn index(&self, n: usize, spin: Spin) -> usize {
        debug_assert!(n <= self.n_max);
        2 * n + match spin {
            Spin::Ground => 0,
            Spin::Excited => 1,
        }
    }

    /// Inverse of [`Truncation::index`].
    pub fn basis_state(&self, index: usize) -> (usize, Spin) {
        let n = index / 2;
        let spin = if index % 2 == 0 {
            Spin::Ground
        } else {
            Spin::Excited
        };
        (n, spin)
    }
}

/// Dense complex operator on the truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    trunc: Truncation,
    mat: Array2<C64>,
}

fn kron_fock_spin(trunc: Truncation, fock: &Array2<C64>, spin: &Array2<C64>) -> Operator {
    let nf = trunc.n_max + 1;
    let dim = trunc.dim();
    let mut mat = Array2::zeros((dim, dim));
    for nr in 0..nf {
        for nc in 0..nf {
            let f = fock[[nr, nc]];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for sr in 0..2 {
                for sc in 0..2 {
                    mat[[2 * nr + sr, 2 * nc + sc]] = f * spin[[sr, sc]];
                }
            }
        }
    }
    Operator { trunc, mat }
}

fn spin_identity() -> Array2<C64> {
    Array2::eye(2)
}

impl Operator {
    pub fn zeros(trunc: Truncation) -> Self {
        Operator {
            trunc,
            mat: Array2::zeros((trunc.dim(), trunc.dim())),
        }
    }

    pub fn identity(trunc: Truncation) -> Self {
        Operator {
            trunc,
            mat: Array2::eye(trunc.dim()),
        }
    }

    pub fn from_matrix(trunc: Truncation, mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != trunc.dim() || mat.ncols() != trunc.dim() {
            return Err(Error::DimensionMismatch(mat.nrows(), trunc.dim()));
        }
        Ok(Operator { trunc, mat })
    }

    /// Phonon annihilation operator `a ⊗ I`: `⟨m|a|n⟩ = √n δ_{m,n−1}`.
    pub fn annihilation(trunc: Truncation) -> Self {
        let nf = trunc.n_max + 1;
        let mut fock = Array2::zeros((nf, nf));
        for n in 1..nf {
            fock[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
        }
        kron_fock_spin(trunc, &fock, &spin_identity())
    }

    /// Phonon creation operator `a† ⊗ I`.
    pub fn creation(trunc: Truncation) -> Self {
        Self::annihilation(trunc).dagger()
    }

    /// Phonon number operator `a†a ⊗ I`.
    pub fn number(trunc: Truncation) -> Self {
        let nf = trunc.n_max + 1;
        let mut fock = Array2::zeros((nf, nf));
        for n in 0..nf {
            fock[[n, n]] = C64::new(n as f64, 0.0);
        }
        kron_fock_spin(trunc, &fock, &spin_identity())
    }

    /// Pauli matrix on the spin factor, identity on the Fock factor.
    pub fn pauli(axis: Axis, trunc: Truncation) -> Self {
        let nf = trunc.n_max + 1;
        let fock = Array2::eye(nf);
        kron_fock_spin(trunc, &fock, &axis.matrix())
    }

    /// Spin raising operator `σ_+ = (σ_x + iσ_y)/2 = |e⟩⟨g|` on every Fock level.
    pub fn sigma_plus(trunc: Truncation) -> Self {
        let mut spin = Array2::zeros((2, 2));
        spin[[1, 0]] = C64::new(1.0, 0.0);
        let nf = trunc.n_max + 1;
        kron_fock_spin(trunc, &Array2::eye(nf), &spin)
    }

    /// Spin lowering operator `σ_− = (σ_x − iσ_y)/2 = |g⟩⟨e|` on every Fock level.
    pub fn sigma_minus(trunc: Truncation) -> Self {
        Self::sigma_plus(trunc).dagger()
    }

    /// Parity of the total excitation number,
    /// `P = exp[iπ(a†a + (1 + σ_z)/2)]`: diagonal with entries ±1.
    pub fn parity(trunc: Truncation) -> Self {
        let dim = trunc.dim();
        let mut mat = Array2::zeros((dim, dim));
        for idx in 0..dim {
            let (n, spin) = trunc.basis_state(idx);
            let excitations = n + match spin {
                Spin::Ground => 0,
                Spin::Excited => 1,
            };
            let sign = if excitations % 2 == 0 { 1.0 } else { -1.0 };
            mat[[idx, idx]] = C64::new(sign, 0.0);
        }
        Operator { trunc, mat }
    }

    /// Projector `|q⟩⟨q| ⊗ I` onto Fock level `q`.
    pub fn fock_projector(trunc: Truncation, q: usize) -> Self {
        let dim = trunc.dim();
        let mut mat = Array2::zeros((dim, dim));
        if q <= trunc.n_max {
            for s in [Spin::Ground, Spin::Excited] {
                let i = trunc.index(q, s);
                mat[[i, i]] = C64::new(1.0, 0.0);
            }
        }
        Operator { trunc, mat }
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mat = self.mat.t().mapv(|x| x.conj());
        Operator {
            trunc: self.trunc,
            mat,
        }
    }

    /// Matrix product, checked for matching truncations.
    pub fn checked_mul(&self, rhs: &Operator) -> Result<Operator> {
        if self.trunc != rhs.trunc {
            return Err(Error::DimensionMismatch(self.dim(), rhs.dim()));
        }
        Ok(Operator {
            trunc: self.trunc,
            mat: self.mat.dot(&rhs.mat),
        })
    }

    /// Sum, checked for matching truncations.
    pub fn checked_add(&self, rhs: &Operator) -> Result<Operator> {
        if self.trunc != rhs.trunc {
            return Err(Error::DimensionMismatch(self.dim(), rhs.dim()));
        }
        Ok(Operator {
            trunc: self.trunc,
            mat: &self.mat + &rhs.mat,
        })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            trunc: self.trunc,
            mat: self.mat.mapv(|x| x * factor),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Operator {
        self.scale(C64::new(factor, 0.0))
    }

    /// Commutator `[self, rhs]`.
    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        let ab = self.checked_mul(rhs)?;
        let ba = rhs.checked_mul(self)?;
        Ok(Operator {
            trunc: self.trunc,
            mat: ab.mat - ba.mat,
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[[i, i]]).sum()
    }

    /// Largest elementwise deviation from Hermiticity, `max |A − A†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let r = (self.mat[[i, j]] - self.mat[[j, i]].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Largest absolute entry (max norm).
    pub fn max_norm(&self) -> f64 {
        self.mat.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Apply to a state vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        debug_assert_eq!(v.len(), d);
        (0..d)
            .map(|i| (0..d).map(|j| self.mat[[i, j]] * v[j]).sum())
            .collect()
    }
}

/// Pauli axis selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn matrix(&self) -> Array2<C64> {
        let mut m = Array2::zeros((2, 2));
        match self {
            Axis::X => {
                m[[0, 1]] = C64::new(1.0, 0.0);
                m[[1, 0]] = C64::new(1.0, 0.0);
            }
            Axis::Y => {
                // right-handed with σ_z|g⟩ = −|g⟩: ⟨g|σ_y|e⟩ = +i
                m[[0, 1]] = C64::new(0.0, 1.0);
                m[[1, 0]] = C64::new(0.0, -1.0);
            }
            Axis::Z => {
                m[[0, 0]] = C64::new(-1.0, 0.0);
                m[[1, 1]] = C64::new(1.0, 0.0);
            }
        }
        m
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.checked_add(rhs).expect("operator addition: truncation mismatch")
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.trunc, rhs.trunc, "operator subtraction: truncation mismatch");
        Operator {
            trunc: self.trunc,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.checked_mul(rhs).expect("operator product: truncation mismatch")
    }
}
