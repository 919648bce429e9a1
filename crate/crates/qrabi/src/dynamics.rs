//! Liouvillian assembly, steady-state solves, and propagation of arbitrary
//! operators under the master equation
//!
//! ```text
//! dρ/dt = −i[H', ρ] + (κ_e/2) D[σ₋]ρ + (κ_d/2) D[a]ρ + γ_d D[a†a]ρ,
//! D[o]ρ = 2 o ρ o† − o†o ρ − ρ o†o
//! ```
//!
//! transcribed with exactly these prefactors. Density matrices are
//! column-stacked: `vec(ρ)[c·D + r] = ρ[r, c]`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`
//! and the coherent part is `−i(I ⊗ H − Hᵀ ⊗ I)`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{Operator, Spin, Truncation};
use crate::linalg::{self, CsrMatrix};
use crate::model::{hamiltonian_rotated, ModelParams};

/// Steady-state residual tolerance, ∞-norm of `L vec(ρ)`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Numerical positivity tolerance on density-matrix eigenvalues.
pub const PSD_TOL: f64 = -1e-8;
/// Relative tolerance of the propagator.
pub const PROPAGATOR_TOL: f64 = 1e-9;
/// Hilbert dimension at or below which the dense SVD fallback is available.
pub const SVD_FALLBACK_MAX_DIM: usize = 64;

/// The three Lindblad rates, in units of g_x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    /// Atomic spontaneous emission rate of the clock state, κ_e.
    pub kappa_e: f64,
    /// Phonon decay rate κ_d.
    pub kappa_d: f64,
    /// Phonon dephasing factor γ_d.
    pub gamma_d: f64,
}

impl Default for DissipationParams {
    /// The paper's fixed rates: κ_d = 0.005 g_x, γ_d = 0.0005 g_x,
    /// κ_e = 1.1e-8 g_x (equivalently κ_e/κ_d = 2.2e-6).
    fn default() -> Self {
        DissipationParams {
            kappa_e: 1.1e-8,
            kappa_d: 0.005,
            gamma_d: 0.0005,
        }
    }
}

impl DissipationParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa_e < 0.0 || self.kappa_d < 0.0 || self.gamma_d < 0.0 {
            return Err(Error::InvalidParameter(
                "dissipation rates must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn none() -> Self {
        DissipationParams {
            kappa_e: 0.0,
            kappa_d: 0.0,
            gamma_d: 0.0,
        }
    }
}

/// Hermitian, unit-trace state on the truncated space.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    trunc: Truncation,
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Wrap a matrix after checking Hermiticity (1e-10), unit trace (1e-10)
    /// and numerical positivity (min eigenvalue ≥ −1e-8).
    pub fn new(trunc: Truncation, mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != trunc.dim() || mat.ncols() != trunc.dim() {
            return Err(Error::DimensionMismatch(mat.nrows(), trunc.dim()));
        }
        let rho = DensityMatrix { trunc, mat };
        let herm = rho.hermiticity_residual();
        if herm > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian: residual {herm:.3e}"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} != 1"
            )));
        }
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < PSD_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(rho)
    }

    /// Pure state ρ = |ψ⟩⟨ψ| from a (normalized) state vector.
    pub fn from_pure(trunc: Truncation, psi: &[C64]) -> Result<Self> {
        let d = trunc.dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch(psi.len(), d));
        }
        let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj() / norm);
        Ok(DensityMatrix { trunc, mat })
    }

    /// `|n, σ⟩⟨n, σ|`.
    pub fn fock(trunc: Truncation, n: usize, spin: Spin) -> Self {
        let d = trunc.dim();
        let mut mat = Array2::zeros((d, d));
        let i = trunc.index(n, spin);
        mat[[i, i]] = C64::new(1.0, 0.0);
        DensityMatrix { trunc, mat }
    }

    /// Vacuum with the atom in `|g⟩`.
    pub fn vacuum(trunc: Truncation) -> Self {
        Self::fock(trunc, 0, Spin::Ground)
    }

    /// Truncated coherent state `|α⟩ ⊗ |g⟩`, renormalized on the truncated
    /// space.
    pub fn coherent(trunc: Truncation, alpha: C64) -> Self {
        let d = trunc.dim();
        let mut psi = vec![C64::new(0.0, 0.0); d];
        let mut amp = C64::new(1.0, 0.0);
        for n in 0..=trunc.n_max() {
            if n > 0 {
                amp *= alpha / C64::new((n as f64).sqrt(), 0.0);
            }
            psi[trunc.index(n, Spin::Ground)] = amp;
        }
        Self::from_pure(trunc, &psi).expect("coherent state construction")
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

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[[i, i]]).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..=i {
                worst = worst.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = linalg::eigh(&self.mat)?;
        Ok(vals[0])
    }

    /// ⟨O⟩ = tr(O ρ).
    pub fn expect(&self, op: &Operator) -> C64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += op.matrix()[[i, j]] * self.mat[[j, i]];
            }
        }
        acc
    }

    /// Purity tr(ρ²).
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.mat[[i, j]] * self.mat[[j, i]]).re;
            }
        }
        acc
    }
}

/// Sparse master-equation generator acting on column-stacked density
/// matrices.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    trunc: Truncation,
    dim_h: usize,
    matrix: CsrMatrix,
}

fn vec_index(dim_h: usize, row: usize, col: usize) -> usize {
    col * dim_h + row
}

/// Triplets of `Bᵀ ⊗ A` (column-stacking superoperator of `X ↦ A X B`).
fn kron_superop(
    dim_h: usize,
    a: &Array2<C64>,
    b: &Array2<C64>,
    factor: C64,
    out: &mut Vec<(usize, usize, C64)>,
) {
    for ar in 0..dim_h {
        for ac in 0..dim_h {
            let av = a[[ar, ac]];
            if av == C64::new(0.0, 0.0) {
                continue;
            }
            for br in 0..dim_h {
                for bc in 0..dim_h {
                    let bv = b[[br, bc]];
                    if bv == C64::new(0.0, 0.0) {
                        continue;
                    }
                    // vec(A X B)[bc*D + ar] += A[ar,ac] B[br,bc] X[ac, br]
                    out.push((
                        vec_index(dim_h, ar, bc),
                        vec_index(dim_h, ac, br),
                        factor * av * bv,
                    ));
                }
            }
        }
    }
}

impl Liouvillian {
    /// Assemble the generator for the rotated-frame Hamiltonian and the three
    /// dissipators with the printed prefactors κ_e/2, κ_d/2 and γ_d.
    pub fn build(m: &ModelParams, d: &DissipationParams, t: Truncation) -> Result<Self> {
        d.validate()?;
        let h = hamiltonian_rotated(m, t)?;
        Self::from_hamiltonian(&h, d)
    }

    /// Assemble from an explicit Hamiltonian (used by tests and the verify
    /// suite to inject modified generators).
    pub fn from_hamiltonian(h: &Operator, d: &DissipationParams) -> Result<Self> {
        d.validate()?;
        let t = h.truncation();
        let dim_h = t.dim();
        let id = Array2::<C64>::eye(dim_h);
        let mut triplets: Vec<(usize, usize, C64)> = Vec::new();

        // -i (H ρ - ρ H)
        kron_superop(dim_h, h.matrix(), &id, C64::new(0.0, -1.0), &mut triplets);
        kron_superop(dim_h, &id, h.matrix(), C64::new(0.0, 1.0), &mut triplets);

        // dissipators: weight w ⇒ w (2 OρO† − O†Oρ − ρO†O)
        let channels: [(Operator, f64); 3] = [
            (Operator::sigma_minus(t), 0.5 * d.kappa_e),
            (Operator::annihilation(t), 0.5 * d.kappa_d),
            (Operator::number(t), d.gamma_d),
        ];
        for (op, w) in channels.iter() {
            if *w == 0.0 {
                continue;
            }
            let o = op.matrix();
            let odag_o = op.dagger().checked_mul(op)?.into_matrix();
            let o_dag = op.dagger().into_matrix();
            let two_w = C64::new(2.0 * w, 0.0);
            let neg_w = C64::new(-w, 0.0);
            // 2w O ρ O†
            kron_superop(dim_h, o, &o_dag, two_w, &mut triplets);
            // -w O†O ρ
            kron_superop(dim_h, &odag_o, &id, neg_w, &mut triplets);
            // -w ρ O†O
            kron_superop(dim_h, &id, &odag_o, neg_w, &mut triplets);
        }

        let matrix = CsrMatrix::from_triplets(dim_h * dim_h, &triplets);
        Ok(Liouvillian {
            trunc: t,
            dim_h,
            matrix,
        })
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn dim_hilbert(&self) -> usize {
        self.dim_h
    }

    pub fn dim(&self) -> usize {
        self.dim_h * self.dim_h
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Apply to a column-stacked matrix: `L vec(X)` reshaped back.
    pub fn apply(&self, x: &Array2<C64>) -> Array2<C64> {
        let v = vectorize(x);
        let w = self.matrix.matvec_alloc(&v);
        unvectorize(self.dim_h, &w)
    }

    /// ∞-norm of the trace functional acting on the generator,
    /// `max_j |Σ_i (vec I)_i L[i, j]|`; zero for a trace-preserving generator.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim_h;
        let mut trace_vec = vec![C64::new(0.0, 0.0); self.dim()];
        for i in 0..d {
            trace_vec[vec_index(d, i, i)] = C64::new(1.0, 0.0);
        }
        let row = self.matrix.adjoint_matvec(&trace_vec);
        row.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn dense(&self) -> Array2<C64> {
        self.matrix.to_dense()
    }
}

pub fn vectorize(x: &Array2<C64>) -> Vec<C64> {
    let d = x.nrows();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for c in 0..d {
        for r in 0..d {
            v[c * d + r] = x[[r, c]];
        }
    }
    v
}

pub fn unvectorize(dim_h: usize, v: &[C64]) -> Array2<C64> {
    Array2::from_shape_fn((dim_h, dim_h), |(r, c)| v[c * dim_h + r])
}

/// Outcome of a steady-state solve with its quality diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyStateSolution {
    pub rho: DensityMatrix,
    /// ∞-norm of `L vec(ρ)`.
    pub residual: f64,
    /// Minimum eigenvalue of ρ (≥ −1e-8 required).
    pub min_eigenvalue: f64,
}

/// Solve `L vec(ρ) = 0, tr ρ = 1` directly: one row of the generator is
/// replaced by the vectorized trace constraint and the sparse system is
/// LU-factorized. For Hilbert dimensions ≤ 64 a dense SVD null-space
/// fallback diagnoses degenerate steady-state manifolds.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateSolution> {
    let d = l.dim_h;
    let n = l.dim();

    // replace row 0 with the trace row
    let mut triplets: Vec<(usize, usize, C64)> = l
        .matrix
        .triplets()
        .into_iter()
        .filter(|&(r, _, _)| r != 0)
        .collect();
    for i in 0..d {
        triplets.push((0, vec_index(d, i, i), C64::new(1.0, 0.0)));
    }
    let mut b = vec![C64::new(0.0, 0.0); n];
    b[0] = C64::new(1.0, 0.0);

    let direct = linalg::sparse_solve(n, &triplets, &b).and_then(|x| finish_steady_state(l, x));
    match direct {
        Ok(sol) => Ok(sol),
        Err(first_err) => {
            if d <= SVD_FALLBACK_MAX_DIM {
                match steady_state_svd_fallback(l) {
                    Ok(sol) => Ok(sol),
                    Err(e @ Error::DegenerateSteadyState { .. }) => Err(e),
                    Err(_) => Err(first_err),
                }
            } else {
                Err(first_err)
            }
        }
    }
}

fn finish_steady_state(l: &Liouvillian, x: Vec<C64>) -> Result<SteadyStateSolution> {
    let d = l.dim_h;
    let raw = unvectorize(d, &x);
    // hermitize and renormalize
    let mut rho = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            rho[[i, j]] = 0.5 * (raw[[i, j]] + raw[[j, i]].conj());
        }
    }
    let tr: C64 = (0..d).map(|i| rho[[i, i]]).sum();
    if tr.norm() < 1e-300 {
        return Err(Error::Solver("steady-state solve returned zero trace".into()));
    }
    let rho = rho.mapv(|v| v / tr);

    let residual = {
        let lv = l.matrix.matvec_alloc(&vectorize(&rho));
        lv.iter().map(|v| v.norm()).fold(0.0, f64::max)
    };
    // negated comparisons so NaN residuals fail
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::ResidualTooLarge {
            residual,
            tol: RESIDUAL_TOL,
        });
    }
    let (vals, _) = linalg::eigh(&rho)?;
    let min_eigenvalue = vals[0];
    if !(min_eigenvalue >= PSD_TOL) {
        return Err(Error::NotPositive(min_eigenvalue));
    }
    Ok(SteadyStateSolution {
        rho: DensityMatrix {
            trunc: l.trunc,
            mat: rho,
        },
        residual,
        min_eigenvalue,
    })
}

fn steady_state_svd_fallback(l: &Liouvillian) -> Result<SteadyStateSolution> {
    let dense = l.dense();
    let scale = l.matrix.norm_inf().max(1.0);
    let basis = linalg::null_space(&dense, 1e-10 * scale)?;
    match basis.len() {
        0 => Err(Error::Solver(
            "no null vector found in SVD fallback".into(),
        )),
        1 => finish_steady_state(l, basis.into_iter().next().unwrap()),
        k => Err(Error::DegenerateSteadyState { null_dim: k }),
    }
}

/// Truncation-growth policy for steady-state solves.
#[derive(Clone, Copy, Debug)]
pub struct TruncationPolicy {
    pub adaptive: bool,
    /// Tail-mass threshold p(n_max−1) + p(n_max).
    pub tail_threshold: f64,
    pub max_retries: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            adaptive: true,
            tail_threshold: 1e-10,
            max_retries: 3,
        }
    }
}

/// Steady-state solve with adaptive truncation growth: if the steady-state
/// tail mass `p(n_max−1) + p(n_max)` exceeds the threshold, `n_max` grows by
/// 50% and the solve repeats (up to `max_retries`).
#[derive(Clone, Debug)]
pub struct AdaptiveSolution {
    pub solution: SteadyStateSolution,
    pub truncation: Truncation,
    pub tail_mass: f64,
    pub attempts: usize,
    pub tail_converged: bool,
}

pub fn steady_state_adaptive(
    m: &ModelParams,
    d: &DissipationParams,
    t0: Truncation,
    policy: &TruncationPolicy,
) -> Result<AdaptiveSolution> {
    let mut t = t0;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let l = Liouvillian::build(m, d, t)?;
        let solution = steady_state(&l)?;
        let tail = tail_mass(&solution.rho);
        let converged = tail < policy.tail_threshold;
        if converged || !policy.adaptive || attempts > policy.max_retries {
            return Ok(AdaptiveSolution {
                solution,
                truncation: t,
                tail_mass: tail,
                attempts,
                tail_converged: converged,
            });
        }
        let grown = (t.n_max() * 3).div_ceil(2);
        t = Truncation::new(grown)?;
    }
}

/// p(n_max−1) + p(n_max): the spectral weight at the truncation edge.
pub fn tail_mass(rho: &DensityMatrix) -> f64 {
    let t = rho.truncation();
    let n_max = t.n_max();
    let mut mass = 0.0;
    for n in [n_max - 1, n_max] {
        for s in [Spin::Ground, Spin::Excited] {
            let i = t.index(n, s);
            mass += rho.matrix()[[i, i]].re;
        }
    }
    mass
}

/// Propagate an arbitrary matrix through `X(τ) = e^{Lτ} X(0)` on an ascending
/// τ grid. The input need not be a state; linearity and trace preservation
/// hold for any X. Relative tolerance 1e-9.
pub fn propagate(
    l: &Liouvillian,
    x0: &Array2<C64>,
    tau_grid: &[f64],
) -> Result<Vec<Array2<C64>>> {
    if x0.nrows() != l.dim_h || x0.ncols() != l.dim_h {
        return Err(Error::DimensionMismatch(x0.nrows(), l.dim_h));
    }
    if tau_grid.is_empty() {
        return Ok(Vec::new());
    }
    if tau_grid[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "tau grid must start at a nonnegative time".into(),
        ));
    }
    if tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("tau grid must be ascending".into()));
    }
    let mut out = Vec::with_capacity(tau_grid.len());
    let mut v = vectorize(x0);
    let mut t_now = 0.0;
    for &tau in tau_grid {
        let dt = tau - t_now;
        if dt > 0.0 {
            v = linalg::expm_action(&l.matrix, &v, dt, PROPAGATOR_TOL)?;
            t_now = tau;
        }
        out.push(unvectorize(l.dim_h, &v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::Axis;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn trunc(n_max: usize) -> Truncation {
        Truncation::new(n_max).unwrap()
    }

    fn random_density(t: Truncation, rng: &mut impl Rng) -> Array2<C64> {
        let d = t.dim();
        let g = Array2::from_shape_fn((d, d), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        // G G† is PSD; normalize the trace
        let gg = {
            let gdag = g.t().mapv(C64::conj);
            g.dot(&gdag)
        };
        let tr: C64 = (0..d).map(|i| gg[[i, i]]).sum();
        gg.mapv(|v| v / tr)
    }

    /// Straight-line evaluation of the master-equation right-hand side,
    /// independent of the vectorized generator. This is the oracle the
    /// Liouvillian assembly is checked against.
    fn master_equation_rhs(
        h: &Operator,
        d: &DissipationParams,
        rho: &Array2<C64>,
    ) -> Array2<C64> {
        let hm = h.matrix();
        let minus_i = C64::new(0.0, -1.0);
        let mut rhs = (hm.dot(rho) - rho.dot(hm)).mapv(|x| x * minus_i);
        let t = h.truncation();
        let channels: [(Operator, f64); 3] = [
            (Operator::sigma_minus(t), 0.5 * d.kappa_e),
            (Operator::annihilation(t), 0.5 * d.kappa_d),
            (Operator::number(t), d.gamma_d),
        ];
        for (op, w) in channels {
            let o = op.matrix();
            let odag = op.dagger().into_matrix();
            let oo = odag.dot(o);
            let jump = o.dot(rho).dot(&odag);
            let term = jump.mapv(|x| x * 2.0) - oo.dot(rho) - rho.dot(&oo);
            rhs = rhs + term.mapv(|x| x * w);
        }
        rhs
    }

    #[test]
    fn liouvillian_matches_termwise_oracle() {
        // random 8-dimensional instances: n_max = 3 so dim = 8
        let t = trunc(3);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let m = ModelParams::model_units(
                rng.gen_range(0.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-0.2..0.2),
                rng.gen_range(-1.5..1.5),
            );
            let d = DissipationParams {
                kappa_e: rng.gen_range(0.0..0.1),
                kappa_d: rng.gen_range(0.0..0.2),
                gamma_d: rng.gen_range(0.0..0.05),
            };
            let l = Liouvillian::build(&m, &d, t).unwrap();
            let h = hamiltonian_rotated(&m, t).unwrap();
            let rho = random_density(t, &mut rng);
            let via_l = l.apply(&rho);
            let direct = master_equation_rhs(&h, &d, &rho);
            let err = (&via_l - &direct)
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "termwise mismatch {err}");
        }
    }

    #[test]
    fn trace_preservation_at_generator_level() {
        let t = trunc(5);
        let m = ModelParams::model_units(1.0, 1.0, 0.005, 1.0);
        let l = Liouvillian::build(&m, &DissipationParams::default(), t).unwrap();
        assert!(l.trace_preservation_residual() < 1e-10);
    }

    #[test]
    fn zero_rates_give_unitary_evolution() {
        let t = trunc(4);
        let m = ModelParams::model_units(1.0, 0.8, 0.02, 0.6);
        let l = Liouvillian::build(&m, &DissipationParams::none(), t).unwrap();
        let rho0 = DensityMatrix::coherent(t, C64::new(0.4, 0.1));
        let states = propagate(&l, rho0.matrix(), &[0.0, 5.0, 10.0]).unwrap();
        for s in &states {
            // purity conserved under unitary evolution
            let purity: f64 = {
                let mut acc = 0.0;
                for i in 0..t.dim() {
                    for j in 0..t.dim() {
                        acc += (s[[i, j]] * s[[j, i]]).re;
                    }
                }
                acc
            };
            assert_relative_eq!(purity, rho0.purity(), epsilon = 1e-10);
        }
    }

    #[test]
    fn damped_fock_state_decays_at_kappa_d() {
        // decoupled oscillator: populations of |1><1| decay as exp(-kappa_d t)
        let t = trunc(4);
        let m = ModelParams {
            omega: 1.0,
            rabi: 0.0,
            delta: 0.0,
            g_x: 1e-300,
            g_k: 0.0,
        };
        let d = DissipationParams {
            kappa_e: 0.0,
            kappa_d: 0.08,
            gamma_d: 0.0,
        };
        let l = Liouvillian::build(&m, &d, t).unwrap();
        let rho0 = DensityMatrix::fock(t, 1, Spin::Ground);
        let times = [0.0, 1.0 / d.kappa_d, 2.0 / d.kappa_d];
        let states = propagate(&l, rho0.matrix(), &times).unwrap();
        let i1 = t.index(1, Spin::Ground);
        assert_relative_eq!(states[0][[i1, i1]].re, 1.0, epsilon = 1e-9);
        assert_relative_eq!(states[1][[i1, i1]].re, (-1.0f64).exp(), epsilon = 1e-8);
        assert_relative_eq!(states[2][[i1, i1]].re, (-2.0f64).exp(), epsilon = 1e-8);
        // trace preserved
        for s in &states {
            let tr: C64 = (0..t.dim()).map(|i| s[[i, i]]).sum();
            assert_relative_eq!(tr.re, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn decoupled_damped_system_reaches_vacuum() {
        let t = trunc(5);
        let m = ModelParams {
            omega: 1.0,
            rabi: 0.4,
            delta: 0.0,
            g_x: 1e-300,
            g_k: 0.0,
        };
        let d = DissipationParams {
            kappa_e: 0.01,
            kappa_d: 0.05,
            gamma_d: 0.0,
        };
        let l = Liouvillian::build(&m, &d, t).unwrap();
        let sol = steady_state(&l).unwrap();
        // vacuum ⊗ spin ground state
        let i0 = t.index(0, Spin::Ground);
        assert_relative_eq!(sol.rho.matrix()[[i0, i0]].re, 1.0, epsilon = 1e-8);
        assert!(sol.residual < RESIDUAL_TOL);
    }

    #[test]
    fn steady_state_is_propagation_fixed_point() {
        let t = trunc(8);
        let m = ModelParams::model_units(1.0, 1.0, 0.005, 1.0);
        let d = DissipationParams {
            kappa_e: 0.0,
            kappa_d: 0.1,
            gamma_d: 0.01,
        };
        let l = Liouvillian::build(&m, &d, t).unwrap();
        let sol = steady_state(&l).unwrap();
        let states = propagate(&l, sol.rho.matrix(), &[0.0, 3.0, 17.0]).unwrap();
        for s in &states {
            let dev = (s - sol.rho.matrix())
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-8, "fixed point drifted by {dev}");
        }
    }

    #[test]
    fn direct_solve_agrees_with_long_time_propagation() {
        // cross-validation at seeded random parameter points
        let t = trunc(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..5 {
            let m = ModelParams::model_units(
                rng.gen_range(0.6..1.4),
                rng.gen_range(0.3..1.2),
                rng.gen_range(0.0..0.1),
                rng.gen_range(-1.0..1.0),
            );
            let d = DissipationParams {
                kappa_e: 0.0,
                kappa_d: rng.gen_range(0.08..0.2),
                gamma_d: rng.gen_range(0.005..0.02),
            };
            let l = Liouvillian::build(&m, &d, t).unwrap();
            let sol = steady_state(&l).unwrap();
            let t_final = 50.0 / d.kappa_d;
            let rho0 = DensityMatrix::vacuum(t);
            let evolved = propagate(&l, rho0.matrix(), &[t_final]).unwrap();
            let dev = (&evolved[0] - sol.rho.matrix())
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-6, "direct vs propagated deviation {dev}");
        }
    }

    #[test]
    fn propagation_keeps_states_positive() {
        let t = trunc(5);
        let m = ModelParams::model_units(1.0, 0.9, 0.01, 0.8);
        let l = Liouvillian::build(&m, &DissipationParams::default(), t).unwrap();
        let rho0 = DensityMatrix::coherent(t, C64::new(0.5, -0.2));
        let grid: Vec<f64> = (0..8).map(|k| k as f64 * 25.0).collect();
        let states = propagate(&l, rho0.matrix(), &grid).unwrap();
        for s in states {
            let (vals, _) = linalg::eigh(&s).unwrap();
            assert!(vals[0] > -1e-7, "negative eigenvalue {}", vals[0]);
        }
    }

    #[test]
    fn tau_zero_returns_input() {
        let t = trunc(3);
        let m = ModelParams::model_units(1.0, 1.0, 0.0, 1.0);
        let l = Liouvillian::build(&m, &DissipationParams::default(), t).unwrap();
        let x = Operator::pauli(Axis::X, t).into_matrix();
        let out = propagate(&l, &x, &[0.0]).unwrap();
        let dev = (&out[0] - &x).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-14);
    }

    #[test]
    fn adaptive_truncation_grows_until_tail_converges() {
        let m = ModelParams::model_units(1.0, 1.0, 0.005, 1.0);
        let d = DissipationParams::default();
        // deliberately small starting truncation
        let t0 = trunc(4);
        let adaptive = steady_state_adaptive(&m, &d, t0, &TruncationPolicy::default()).unwrap();
        assert!(adaptive.tail_converged);
        assert!(adaptive.truncation.n_max() > 4);
        assert!(adaptive.tail_mass < 1e-10);
        // non-adaptive keeps the truncation
        let fixed = steady_state_adaptive(
            &m,
            &d,
            t0,
            &TruncationPolicy {
                adaptive: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(fixed.truncation.n_max(), 4);
    }

    #[test]
    fn steady_state_unique_gap_positive() {
        let t = trunc(3);
        let m = ModelParams::model_units(1.0, 1.0, 0.005, 1.0);
        let l = Liouvillian::build(&m, &DissipationParams::default(), t).unwrap();
        let svals = linalg::singular_values(&l.dense()).unwrap();
        // exactly one near-zero singular value; the next one is the gap
        let n = svals.len();
        assert!(svals[n - 1] < 1e-10);
        assert!(svals[n - 2] > 1e-6);
    }

    #[test]
    fn degenerate_manifold_detected() {
        // two decoupled dissipation-free spin sectors + pure phonon decay:
        // both |g><g| ⊗ vac and |e><e| ⊗ vac are steady
        let t = trunc(2);
        let m = ModelParams {
            omega: 1.0,
            rabi: 0.0,
            delta: 0.0,
            g_x: 1e-300,
            g_k: 0.0,
        };
        let d = DissipationParams {
            kappa_e: 0.0,
            kappa_d: 0.1,
            gamma_d: 0.0,
        };
        let l = Liouvillian::build(&m, &d, t).unwrap();
        match steady_state(&l) {
            Err(Error::DegenerateSteadyState { null_dim }) => assert!(null_dim >= 2),
            other => panic!("expected degenerate steady state, got {other:?}"),
        }
    }
}
