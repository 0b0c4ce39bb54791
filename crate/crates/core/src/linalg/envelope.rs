use std::collections::VecDeque;

use super::sparse::Csr;
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee ordering of a structurally symmetric matrix.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &Csr) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|r| a.row_ptr[r + 1] - a.row_ptr[r]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| degree[v])
            .unwrap();
        let start = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).map(|(c, _)| c).filter(|&c| !visited[c]).collect();
            nb.sort_by_key(|&c| (degree[c], c));
            for c in nb {
                visited[c] = true;
                queue.push_back(c);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &Csr, start: usize) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; a.n];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = vec![start];
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        for (c, _) in a.row(v) {
            if level[c] == usize::MAX {
                level[c] = level[v] + 1;
                if level[c] > depth {
                    depth = level[c];
                    last.clear();
                }
                if level[c] == depth {
                    last.push(c);
                }
                queue.push_back(c);
            }
        }
    }
    (depth, last)
}

fn pseudo_peripheral(a: &Csr, seed: usize, degree: &[usize]) -> usize {
    let mut v = seed;
    let (mut depth, mut last) = bfs_levels(a, v);
    for _ in 0..8 {
        let u = *last.iter().min_by_key(|&&c| degree[c]).unwrap();
        let (d, l) = bfs_levels(a, u);
        if d <= depth {
            break;
        }
        v = u;
        depth = d;
        last = l;
    }
    v
}

/// Cholesky factor in variable-band (envelope) storage under a symmetric
/// permutation.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    l: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `a` (symmetric positive definite, lower triangle used) in the
    /// order given by `perm`.
    pub fn factor(a: &Csr, perm: &[usize]) -> Result<Self> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (c, _) in a.row(old) {
                let cn = inv[c];
                if cn < first[new] {
                    first[new] = cn;
                }
            }
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut l = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (c, v) in a.row(old) {
                let cn = inv[c];
                if cn <= new {
                    l[start[new] + cn - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let mut s = l[si + j - fi];
                let ri = &l[si + k0 - fi..si + j - fi];
                let rj = &l[sj + k0 - fj..sj + j - fj];
                for (x, y) in ri.iter().zip(rj) {
                    s -= x * y;
                }
                l[si + j - fi] = s / l[sj + j - fj];
            }
            let row = &l[si..si + i - fi];
            let d = l[si + i - fi] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot: d,
                });
            }
            l[si + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            n,
            perm: perm.to_vec(),
            first,
            start,
            l,
        })
    }

    pub fn stored(&self) -> usize {
        self.l.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let row = &self.l[si..si + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.l[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            y[i] /= self.l[si + i - fi];
            let yi = y[i];
            for (k, v) in self.l[si..si + i - fi].iter().enumerate() {
                y[fi + k] -= v * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
