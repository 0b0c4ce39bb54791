use nalgebra::{DMatrix, SymmetricEigen};

use super::envelope::{rcm_ordering, EnvelopeCholesky};
use super::sparse::Csr;
use crate::error::Result;

/// Direct solver for s·I + t·(B⊗I_z + (I + c·N)⊗V), where B and N act on one
/// horizontal layer and V on one column. V is diagonalised once; each vertical
/// mode leaves a sparse SPD layer problem that is factored by envelope
/// Cholesky.
#[derive(Debug, Clone)]
pub struct TensorSolver {
    plane: usize,
    nz: usize,
    /// Column k of `modes` is the k-th eigenvector of V.
    modes: DMatrix<f64>,
    theta: Vec<f64>,
    factors: Vec<EnvelopeCholesky>,
}

impl TensorSolver {
    pub fn new(b: &Csr, n: &Csr, c: f64, v: &DMatrix<f64>, s: f64, t: f64) -> Result<Self> {
        let plane = b.n;
        let nz = v.nrows();
        let eig = SymmetricEigen::new(v.clone());
        let pattern = {
            let mut trip = Vec::with_capacity(b.nnz() + n.nnz() + plane);
            for r in 0..plane {
                trip.push((r, r, 1.0));
                trip.extend(b.row(r).map(|(c, v)| (r, c, v.abs() + 1.0)));
                trip.extend(n.row(r).map(|(c, v)| (r, c, v.abs() + 1.0)));
            }
            Csr::from_triplets(plane, trip)
        };
        let perm = rcm_ordering(&pattern);
        let mut factors = Vec::with_capacity(nz);
        for m in 0..nz {
            let th = eig.eigenvalues[m];
            let mut trip = Vec::with_capacity(b.nnz() + n.nnz() + plane);
            for r in 0..plane {
                trip.push((r, r, s + t * th));
                trip.extend(b.row(r).map(|(col, val)| (r, col, t * val)));
                trip.extend(n.row(r).map(|(col, val)| (r, col, t * th * c * val)));
            }
            factors.push(EnvelopeCholesky::factor(&Csr::from_triplets(plane, trip), &perm)?);
        }
        Ok(TensorSolver {
            plane,
            nz,
            modes: eig.eigenvectors,
            theta: eig.eigenvalues.iter().copied().collect(),
            factors,
        })
    }

    /// Eigenvalues of the column operator V.
    pub fn vertical_spectrum(&self) -> &[f64] {
        &self.theta
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (p, nz) = (self.plane, self.nz);
        let mut hat = vec![0.0; p * nz];
        for k in 0..nz {
            let src = &rhs[k * p..(k + 1) * p];
            for m in 0..nz {
                let q = self.modes[(k, m)];
                if q != 0.0 {
                    let dst = &mut hat[m * p..(m + 1) * p];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += q * s;
                    }
                }
            }
        }
        let solved: Vec<Vec<f64>> = (0..nz)
            .map(|m| self.factors[m].solve(&hat[m * p..(m + 1) * p]))
            .collect();
        let mut out = vec![0.0; p * nz];
        for k in 0..nz {
            let dst = &mut out[k * p..(k + 1) * p];
            for (m, u) in solved.iter().enumerate() {
                let q = self.modes[(k, m)];
                for (d, s) in dst.iter_mut().zip(u) {
                    *d += q * s;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_kronecker_sum() {
        // 1-D layer of 6 points, 4-point column
        let p = 6;
        let mut tb = Vec::new();
        let mut tn = Vec::new();
        for i in 0..p {
            tb.push((i, i, 2.0));
            tn.push((i, i, 1.0 + i as f64 * 0.1));
            if i + 1 < p {
                tb.push((i, i + 1, -1.0));
                tb.push((i + 1, i, -1.0));
            }
        }
        let b = Csr::from_triplets(p, tb);
        let n = Csr::from_triplets(p, tn);
        let v = DMatrix::from_row_slice(4, 4, &[
            1.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 1.5,
        ]);
        let (s, t, c) = (0.3, 0.7, 0.5);
        let solver = TensorSolver::new(&b, &n, c, &v, s, t).unwrap();
        let x: Vec<f64> = (0..p * 4).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        // apply the operator directly
        let mut y = vec![0.0; p * 4];
        for k in 0..4 {
            let bx = b.matvec(&x[k * p..(k + 1) * p]);
            for i in 0..p {
                y[k * p + i] += s * x[k * p + i] + t * bx[i];
            }
            for kk in 0..4 {
                let vk = v[(k, kk)];
                if vk == 0.0 {
                    continue;
                }
                let col = &x[kk * p..(kk + 1) * p];
                let nx = n.matvec(col);
                for i in 0..p {
                    y[k * p + i] += t * vk * (col[i] + c * nx[i]);
                }
            }
        }
        let back = solver.solve(&y);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }
}
