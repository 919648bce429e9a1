//! Linear-algebra backend: dense Hermitian eigensolves, sparse LU, and a
//! Krylov matrix-exponential action, all specialized to complex `f64`.
//!
//! Dense factorizations and the sparse LU are delegated to `faer`; the
//! Krylov propagator and the Padé exponential of the small projected
//! Hessenberg matrix are implemented here.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu as SparseLu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) fn nd_to_faer(a: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn faer_to_nd(a: faer::MatRef<'_, C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, in the
/// same order as the eigenvalues.
pub fn eigh(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh: matrix must be square");
    let m = nd_to_faer(a);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| evd.S()[i].re).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let u = evd.U();
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| u[(i, order[j])]);
    Ok((sorted_vals, vecs))
}

/// Eigenvalues of a general (non-Hermitian) complex matrix.
pub fn eigenvalues(a: &Array2<C64>) -> Result<Vec<C64>> {
    let m = nd_to_faer(a);
    m.eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(a: &Array2<C64>) -> Result<Vec<f64>> {
    let m = nd_to_faer(a);
    let svd = m
        .svd()
        .map_err(|e| Error::Eigensolver(format!("svd: {e:?}")))?;
    Ok((0..a.nrows().min(a.ncols()))
        .map(|i| svd.S()[i].re)
        .collect())
}

/// Right null-space basis of a square complex matrix: columns of V whose
/// singular values fall below `tol`, descending singular value order.
pub fn null_space(a: &Array2<C64>, tol: f64) -> Result<Vec<Vec<C64>>> {
    let n = a.nrows();
    let m = nd_to_faer(a);
    let svd = m
        .svd()
        .map_err(|e| Error::Eigensolver(format!("svd: {e:?}")))?;
    let v = svd.V();
    let mut basis = Vec::new();
    for j in 0..n {
        if svd.S()[j].re < tol {
            basis.push((0..n).map(|i| v[(i, j)]).collect());
        }
    }
    Ok(basis)
}

/// Solve the dense square system `a x = b`.
pub fn dense_solve(a: &Array2<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.nrows();
    let m = nd_to_faer(a);
    let lu = m.partial_piv_lu();
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Compressed sparse row matrix over complex doubles. Rows are sorted by
/// construction; used for matrix-vector products and norm estimates.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Build from unsorted triplets, summing duplicates and dropping zeros.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut sorted: Vec<(usize, usize, C64)> = triplets
            .iter()
            .copied()
            .filter(|(_, _, v)| v.norm_sqr() > 0.0)
            .collect();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = merged.iter().map(|&(_, c, _)| c).collect();
        let values = merged.iter().map(|&(_, _, v)| v).collect();
        CsrMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.values[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Left product yᴴ = wᴴ A, returned conjugated back (i.e. returns Aᴴ w).
    pub fn adjoint_matvec(&self, w: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for r in 0..self.dim {
            let wr = w[r].conj();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += (self.values[k] * wr).conj();
            }
        }
        y
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[[r, self.col_idx[k]]] += self.values[k];
            }
        }
        a
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                t.push((r, self.col_idx[k], self.values[k]));
            }
        }
        t
    }
}

/// Sparse LU solve of `a x = b` where `a` is given in triplet form.
pub fn sparse_solve(dim: usize, triplets: &[(usize, usize, C64)], b: &[C64]) -> Result<Vec<C64>> {
    let entries: Vec<Triplet<usize, usize, C64>> = triplets
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let mat: SparseColMat<usize, C64> = SparseColMat::try_new_from_triplets(dim, dim, &entries)
        .map_err(|e| Error::Solver(format!("sparse assembly: {e:?}")))?;
    let symbolic = SymbolicLu::try_new(mat.symbolic())
        .map_err(|e| Error::Solver(format!("symbolic LU: {e:?}")))?;
    let lu = SparseLu::try_new_with_symbolic(symbolic, mat.as_ref())
        .map_err(|e| Error::Solver(format!("numeric LU: {e:?}")))?;
    let rhs = Mat::from_fn(dim, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    Ok((0..dim).map(|i| x[(i, 0)]).collect())
}

/// Dense matrix exponential by Padé-13 approximation with scaling and
/// squaring (Higham 2005). Intended for small projected matrices.
pub fn expm_dense(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // 1-norm
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 {
        ((norm1 / theta13).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(s), 0.0);
    let a_s = a.mapv(|x| x * scale);

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let id: Array2<C64> = Array2::eye(n);
    let a2 = a_s.dot(&a_s);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = a6.mapv(|x| x * B[13])
        + a4.mapv(|x| x * B[11])
        + a2.mapv(|x| x * B[9]);
    let u = a_s.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|x| x * B[7])
            + a4.mapv(|x| x * B[5])
            + a2.mapv(|x| x * B[3])
            + id.mapv(|x| x * B[1])),
    );
    let v_inner = a6.mapv(|x| x * B[12]) + a4.mapv(|x| x * B[10]) + a2.mapv(|x| x * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|x| x * B[6])
        + a4.mapv(|x| x * B[4])
        + a2.mapv(|x| x * B[2])
        + id.mapv(|x| x * B[0]);

    // (V - U) F = (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let lhs_f = nd_to_faer(&lhs);
    let rhs_f = nd_to_faer(&rhs);
    let lu = lhs_f.partial_piv_lu();
    let f = lu.solve(&rhs_f);
    let mut result = faer_to_nd(f.as_ref());
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// Krylov (Arnoldi) approximation of `exp(t A) v` for a sparse operator,
/// with adaptive sub-stepping after Sidje's EXPOKIT scheme.
///
/// `tol` is the target relative accuracy of the full propagation.
pub fn expm_action(a: &CsrMatrix, v: &[C64], t: f64, tol: f64) -> Result<Vec<C64>> {
    let n = a.dim;
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    // tiny systems: direct dense exponential
    if n <= 40 {
        let dense = a.to_dense().mapv(|x| x * C64::new(t, 0.0));
        let e = expm_dense(&dense);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                out[i] += e[[i, j]] * v[j];
            }
        }
        return Ok(out);
    }

    let m = 30.min(n - 1);
    let anorm = a.norm_inf().max(1e-300);
    let mut w: Vec<C64> = v.to_vec();
    let mut t_now = 0.0f64;
    let gamma = 0.9;
    let delta = 1.2;
    let mxrej = 10;
    let btol = 1e-14;

    let beta0 = norm2(&w);
    if beta0 == 0.0 {
        return Ok(w);
    }
    // initial step size heuristic
    let xm = 1.0 / m as f64;
    let fact = ((m + 1) as f64 / std::f64::consts::E).powi(m as i32 + 1)
        * (2.0 * std::f64::consts::PI * (m + 1) as f64).sqrt();
    let mut t_step = (1.0 / anorm) * ((fact * tol) / (4.0 * beta0 * anorm)).powf(xm);
    t_step = t_step.min(t);

    while t_now < t {
        t_step = t_step.min(t - t_now);
        let beta = norm2(&w);
        if beta < 1e-300 {
            return Ok(w);
        }
        // Arnoldi of size m from w/beta
        let mut vbasis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        vbasis.push(w.iter().map(|x| x / beta).collect());
        let mut h = Array2::<C64>::zeros((m + 2, m + 2));
        let mut k_eff = m;
        let mut happy = false;
        for j in 0..m {
            let mut p = a.matvec_alloc(&vbasis[j]);
            for i in 0..=j {
                let hij = dotc(&vbasis[i], &p);
                h[[i, j]] = hij;
                axpy(&mut p, &vbasis[i], -hij);
            }
            // one re-orthogonalization pass for stability
            for i in 0..=j {
                let corr = dotc(&vbasis[i], &p);
                h[[i, j]] += corr;
                axpy(&mut p, &vbasis[i], -corr);
            }
            let pnorm = norm2(&p);
            if pnorm < btol * anorm.max(1.0) {
                k_eff = j + 1;
                happy = true;
                break;
            }
            h[[j + 1, j]] = C64::new(pnorm, 0.0);
            vbasis.push(p.iter().map(|x| x / pnorm).collect());
        }

        if happy {
            // exact in the Krylov subspace: take the full remaining time
            t_step = t - t_now;
            let hk = h.slice(ndarray::s![0..k_eff, 0..k_eff]).to_owned();
            let f = expm_dense(&hk.mapv(|x| x * C64::new(t_step, 0.0)));
            let mut wn = vec![C64::new(0.0, 0.0); n];
            for (j, basis_vec) in vbasis.iter().take(k_eff).enumerate() {
                let coef = f[[j, 0]] * beta;
                axpy(&mut wn, basis_vec, coef);
            }
            w = wn;
            break;
        }

        let avnorm = norm2(&a.matvec_alloc(&vbasis[m]));
        h[[m + 1, m]] = C64::new(1.0, 0.0);

        let mut accepted = false;
        let mut ireject = 0;
        while !accepted {
            let f = expm_dense(&h.mapv(|x| x * C64::new(t_step, 0.0)));
            let err1 = (beta * f[[m, 0]].norm()).abs();
            let err2 = (beta * f[[m + 1, 0]].norm() * avnorm).abs();
            let (err_loc, xm_loc) = if err1 > 10.0 * err2 {
                (err2, 1.0 / m as f64)
            } else if err1 > err2 {
                ((err1 * err2) / (err1 - err2), 1.0 / m as f64)
            } else {
                (err1, 1.0 / (m as f64 - 1.0))
            };
            if err_loc <= delta * t_step * tol * beta.max(1.0) {
                // accept
                let mut wn = vec![C64::new(0.0, 0.0); n];
                for (j, basis_vec) in vbasis.iter().take(m + 1).enumerate() {
                    let coef = f[[j, 0]] * beta;
                    axpy(&mut wn, basis_vec, coef);
                }
                w = wn;
                t_now += t_step;
                let factor =
                    gamma * (t_step * tol * beta.max(1.0) / err_loc.max(1e-300)).powf(xm_loc);
                t_step *= factor.clamp(0.2, 5.0);
                accepted = true;
            } else {
                let factor =
                    gamma * (t_step * tol * beta.max(1.0) / err_loc.max(1e-300)).powf(xm_loc);
                t_step *= factor.clamp(0.1, 0.9);
                ireject += 1;
                if ireject > mxrej {
                    return Err(Error::Integrator(format!(
                        "Krylov propagator failed to meet tolerance {tol} at t = {t_now}"
                    )));
                }
            }
        }
    }
    Ok(w)
}

pub(crate) fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [C64], x: &[C64], alpha: C64) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut impl Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn eigh_recovers_diagonal() {
        let mut a = Array2::<C64>::zeros((3, 3));
        a[[0, 0]] = C64::new(2.0, 0.0);
        a[[1, 1]] = C64::new(-1.0, 0.0);
        a[[2, 2]] = C64::new(0.5, 0.0);
        let (vals, _) = eigh(&a).unwrap();
        assert_relative_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn eigh_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 12;
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v = random_complex(&mut rng);
                a[[i, j]] = v;
                a[[j, i]] = v.conj();
            }
            a[[i, i]] = C64::new(a[[i, i]].re, 0.0);
        }
        let (vals, vecs) = eigh(&a).unwrap();
        for k in 0..n {
            let vk: Vec<C64> = (0..n).map(|i| vecs[[i, k]]).collect();
            let av: Vec<C64> = (0..n)
                .map(|i| (0..n).map(|j| a[[i, j]] * vk[j]).sum())
                .collect();
            let res: f64 = av
                .iter()
                .zip(&vk)
                .map(|(x, y)| (x - y * C64::new(vals[k], 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "residual {res} for eigenpair {k}");
        }
    }

    #[test]
    fn expm_dense_matches_scalar_exponentials() {
        // diagonal matrix: exp is elementwise on the diagonal
        let mut a = Array2::<C64>::zeros((2, 2));
        a[[0, 0]] = C64::new(0.3, -0.7);
        a[[1, 1]] = C64::new(-1.1, 2.0);
        let e = expm_dense(&a);
        assert_relative_eq!(e[[0, 0]].re, a[[0, 0]].exp().re, epsilon = 1e-13);
        assert_relative_eq!(e[[1, 1]].im, a[[1, 1]].exp().im, epsilon = 1e-13);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn expm_dense_pauli_rotation() {
        // exp(i theta sigma_x) = cos(theta) I + i sin(theta) sigma_x
        let theta = 0.8321;
        let mut a = Array2::<C64>::zeros((2, 2));
        a[[0, 1]] = C64::new(0.0, theta);
        a[[1, 0]] = C64::new(0.0, theta);
        let e = expm_dense(&a);
        assert_relative_eq!(e[[0, 0]].re, theta.cos(), epsilon = 1e-13);
        assert_relative_eq!(e[[0, 1]].im, theta.sin(), epsilon = 1e-13);
    }

    #[test]
    fn sparse_solve_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 25;
        let mut triplets = Vec::new();
        let mut dense = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            let d = C64::new(3.0 + rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5));
            triplets.push((i, i, d));
            dense[[i, i]] = d;
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                let v = random_complex(&mut rng);
                triplets.push((i, j, v));
                dense[[i, j]] += v;
            }
        }
        let b: Vec<C64> = (0..n).map(|_| random_complex(&mut rng)).collect();
        let x = sparse_solve(n, &triplets, &b).unwrap();
        let xd = dense_solve(&dense, &b).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn expm_action_matches_dense_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let mut triplets = Vec::new();
        for i in 0..n {
            // skew-ish sparse operator with moderate norm
            triplets.push((i, i, C64::new(-0.05 * rng.gen_range(0.0..1.0), rng.gen_range(-2.0..2.0))));
            let j = (i + 1) % n;
            let v = random_complex(&mut rng);
            triplets.push((i, j, v));
            triplets.push((j, i, -v.conj()));
        }
        let a = CsrMatrix::from_triplets(n, &triplets);
        let v: Vec<C64> = (0..n).map(|_| random_complex(&mut rng)).collect();
        let t = 3.7;
        let w = expm_action(&a, &v, t, 1e-10).unwrap();
        let e = expm_dense(&a.to_dense().mapv(|x| x * C64::new(t, 0.0)));
        let mut wd = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                wd[i] += e[[i, j]] * v[j];
            }
        }
        let err: f64 = w
            .iter()
            .zip(&wd)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / norm2(&wd);
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn csr_matvec_and_duplicate_merge() {
        let triplets = vec![
            (0, 0, C64::new(1.0, 0.0)),
            (0, 0, C64::new(2.0, 0.0)),
            (1, 0, C64::new(0.0, 1.0)),
        ];
        let a = CsrMatrix::from_triplets(2, &triplets);
        assert_eq!(a.nnz(), 2);
        let y = a.matvec_alloc(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_relative_eq!(y[0].re, 3.0, epsilon = 1e-15);
        assert_relative_eq!(y[1].im, 1.0, epsilon = 1e-15);
    }
}
