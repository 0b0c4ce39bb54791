use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy, dot, norm};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Block width; should exceed the number of wanted pairs plus the size of
    /// any eigenvalue cluster straddling the cut.
    pub block: usize,
    /// Krylov blocks generated per restart cycle.
    pub steps: usize,
    pub max_cycles: usize,
    /// Converged when ‖Aφ − θφ‖ ≤ tol·|θ| + floor.
    pub tol: f64,
    pub floor: f64,
    pub seed: u64,
}

impl EigenOptions {
    pub fn for_count(want: usize) -> Self {
        EigenOptions {
            block: want + want / 4 + 4,
            steps: 5,
            max_cycles: 40,
            tol: 1e-8,
            floor: 0.0,
            seed: 7,
        }
    }
}

/// Lowest eigenpairs, Euclidean-normalised vectors, ascending values.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub cycles: usize,
}

/// Restarted block Lanczos on the shift-inverted operator with Rayleigh–Ritz
/// extraction on A itself. `solve` must apply (A + σI)⁻¹ for some σ that makes
/// A + σI positive definite.
pub fn lowest_eigenpairs(
    n: usize,
    want: usize,
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    solve: impl Fn(&[f64]) -> Vec<f64>,
    opts: &EigenOptions,
) -> Result<EigenPairs> {
    if want == 0 || want > n {
        return Err(Error::precondition(format!(
            "requested {want} eigenpairs of a {n}-dimensional operator"
        )));
    }
    let p = opts.block.max(want).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut last_converged = 0;
    for cycle in 1..=opts.max_cycles {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p * opts.steps);
        let mut current = block;
        for step in 0..opts.steps {
            let mut fresh = Vec::with_capacity(current.len());
            for v in current {
                if let Some(q) = orthonormalize(v, &basis) {
                    basis.push(q.clone());
                    fresh.push(q);
                }
                if basis.len() >= n {
                    break;
                }
            }
            if basis.len() >= n || fresh.is_empty() || step + 1 == opts.steps {
                break;
            }
            current = fresh.iter().map(|v| solve(v)).collect();
        }
        let k = basis.len();
        let abasis: Vec<Vec<f64>> = basis.iter().map(|v| apply_a(v)).collect();
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = 0.5 * (dot(&basis[i], &abasis[j]) + dot(&basis[j], &abasis[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let keep = p.min(k);
        let mut values = Vec::with_capacity(keep);
        let mut vectors = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        for &idx in order.iter().take(keep) {
            let theta = eig.eigenvalues[idx];
            let mut y = vec![0.0; n];
            let mut ay = vec![0.0; n];
            for j in 0..k {
                let c = eig.eigenvectors[(j, idx)];
                axpy(&mut y, c, &basis[j]);
                axpy(&mut ay, c, &abasis[j]);
            }
            let scale = norm(&y);
            for (a, b) in y.iter_mut().zip(ay.iter_mut()) {
                *a /= scale;
                *b /= scale;
            }
            let r: Vec<f64> = ay.iter().zip(&y).map(|(a, b)| a - theta * b).collect();
            values.push(theta);
            residuals.push(norm(&r));
            vectors.push(y);
        }
        let converged = (0..want.min(keep))
            .take_while(|&i| residuals[i] <= opts.tol * values[i].abs() + opts.floor)
            .count();
        log::debug!(
            "eigen cycle {cycle}: basis {k}, {converged}/{want} converged, worst residual {:e}",
            residuals.iter().take(want).fold(0.0f64, |m, r| m.max(*r))
        );
        last_converged = converged;
        if converged == want {
            values.truncate(want);
            vectors.truncate(want);
            residuals.truncate(want);
            return Ok(EigenPairs {
                values,
                vectors,
                residuals,
                cycles: cycle,
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("eigensolver Ritz values".into()));
        }
        block = vectors;
    }
    Err(Error::EigenDivergence {
        converged: last_converged,
        wanted: want,
        iterations: opts.max_cycles,
    })
}

/// Two passes of classical Gram–Schmidt; `None` if `v` lies in the span.
fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let before = norm(&v);
    if before == 0.0 || !before.is_finite() {
        return None;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, &v)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(&mut v, -c, q);
        }
    }
    let after = norm(&v);
    if after <= 1e-10 * before {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= after);
    Some(v)
}
