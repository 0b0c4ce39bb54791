use super::{axpy, dot, norm};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// ‖b − Ax‖ / ‖b‖ at exit.
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator. Stops when ‖b − Ax‖ ≤ tol·‖b‖.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome> {
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(PcgOutcome {
            x: vec![0.0; b.len()],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut x = x0.map_or_else(|| vec![0.0; b.len()], <[f64]>::to_vec);
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut rel = norm(&r) / bnorm;
    if rel <= tol {
        return Ok(PcgOutcome {
            x,
            iterations: 0,
            relative_residual: rel,
        });
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NonFinite(format!(
                "conjugate gradients: non-positive curvature {pap:e}"
            )));
        }
        let a = rz / pap;
        axpy(&mut x, a, &p);
        axpy(&mut r, -a, &ap);
        rel = norm(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::NonFinite("conjugate gradients residual".into()));
        }
        if rel <= tol {
            // recompute the true residual so round-off drift cannot fake convergence
            let ax = apply(&x);
            let true_rel = norm(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / bnorm;
            if true_rel <= tol {
                return Ok(PcgOutcome {
                    x,
                    iterations: it,
                    relative_residual: true_rel,
                });
            }
            r = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::SolverDivergence {
        residual: rel,
        iterations: max_iter,
        tol,
    })
}
