//! The dissipative operator A R = ∇·q(R) − K_v R_zz and its bilinear form.
//!
//! The horizontal part is written as λLᵀL + K_h GᵀG with L the discrete
//! ∇·(Hᵀ∇·) from [`crate::stencil`]; the vertical part V is a tridiagonal
//! column operator with Neumann bottom and Robin top. Wall fluxes are zero by
//! construction, so A is symmetric without any post-processing and
//! ⟨AR, R⟩ equals the face-sum form a(R, R) to rounding.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::ScalarField3;
use crate::grid::Grid;
use crate::linalg::{Csr, TensorSolver};
use crate::params::PhysParams;
use crate::stencil::Plane;

/// Default cap on assembled unknowns.
pub const DEFAULT_CAP: usize = 200_000;

/// Column operator −K_v ∂zz with −K_v ∂zT = 0 at z = −h and
/// −K_v ∂zT = α T at z = 0.
#[derive(Debug, Clone, Copy)]
pub struct Vertical {
    pub nz: usize,
    pub dz: f64,
    pub k_v: f64,
    pub alpha: f64,
}

impl Vertical {
    /// Ratio ghost/top value that realises the Robin condition across the top
    /// face.
    pub fn robin_ratio(&self) -> f64 {
        1.0 - self.alpha * self.dz / self.k_v
    }

    /// Applies V to every column of a layer-major array.
    pub fn apply(&self, t: &[f64], plane: usize) -> Vec<f64> {
        let nz = self.nz;
        let c = self.k_v / (self.dz * self.dz);
        let mut out = vec![0.0; t.len()];
        for k in 0..nz {
            for p in 0..plane {
                let here = t[k * plane + p];
                let mut v = 0.0;
                if k > 0 {
                    v += c * (here - t[(k - 1) * plane + p]);
                }
                if k + 1 < nz {
                    v += c * (here - t[(k + 1) * plane + p]);
                } else {
                    v += self.alpha / self.dz * here;
                }
                out[k * plane + p] = v;
            }
        }
        out
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let nz = self.nz;
        let c = self.k_v / (self.dz * self.dz);
        let mut m = DMatrix::zeros(nz, nz);
        for k in 0..nz {
            if k > 0 {
                m[(k, k)] += c;
                m[(k, k - 1)] -= c;
            }
            if k + 1 < nz {
                m[(k, k)] += c;
                m[(k, k + 1)] -= c;
            } else {
                m[(k, k)] += self.alpha / self.dz;
            }
        }
        m
    }
}

/// Horizontal flux q on faces of every layer, same layout as the stencil
/// face arrays stacked by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFlux {
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    grid: Grid,
    params: PhysParams,
    plane: Plane,
    vertical: Vertical,
    layer: Csr,
    layer_raw: Csr,
    layer_laplacian: Csr,
    layer_asymmetry: f64,
    sparse: Option<Csr>,
    asymmetry_before: f64,
}

impl DiffusionOperator {
    /// Matrix-free operator plus the probed single-layer blocks.
    pub fn new(grid: &Grid, params: &PhysParams) -> Result<Self> {
        params.validate()?;
        if (params.h - grid.h).abs() > 1e-12 * grid.h {
            return Err(Error::GridMismatch(format!(
                "grid depth {} differs from parameter h {}",
                grid.h, params.h
            )));
        }
        let plane = Plane::new(grid, params);
        let vertical = Vertical {
            nz: grid.nz,
            dz: grid.dz,
            k_v: params.k_v,
            alpha: params.alpha,
        };
        let (lambda, k_h) = (params.lambda, params.k_h);
        let raw = probe(&plane, |t| {
            let lt = plane.elliptic_t(&plane.elliptic(t));
            let nl = plane.neg_laplacian(t);
            lt.iter().zip(&nl).map(|(a, b)| lambda * a + k_h * b).collect()
        });
        let layer_asymmetry = raw.relative_asymmetry();
        let lap = probe(&plane, |t| plane.neg_laplacian(t));
        Ok(DiffusionOperator {
            grid: *grid,
            params: *params,
            plane,
            vertical,
            layer: raw.symmetrized(),
            layer_raw: raw,
            layer_laplacian: lap.symmetrized(),
            layer_asymmetry,
            sparse: None,
            asymmetry_before: layer_asymmetry,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn vertical(&self) -> &Vertical {
        &self.vertical
    }

    /// Layer block B = λLᵀL + K_h GᵀG and the layer Laplacian GᵀG.
    pub fn layer_blocks(&self) -> (&Csr, &Csr) {
        (&self.layer, &self.layer_laplacian)
    }

    pub fn mixed_coefficient(&self) -> f64 {
        self.params.mu / self.params.k_v
    }

    /// Assembled 3-D matrix, if [`assemble`] built one.
    pub fn sparse(&self) -> Option<&Csr> {
        self.sparse.as_ref()
    }

    /// Relative asymmetry of the assembled matrix before averaging with its
    /// transpose.
    pub fn asymmetry_before(&self) -> f64 {
        self.asymmetry_before
    }

    pub fn layer_asymmetry(&self) -> f64 {
        self.layer_asymmetry
    }

    /// Largest diagonal entry of A.
    pub fn diagonal_scale(&self) -> f64 {
        let vmax = self.vertical.matrix().diagonal().max();
        let bmax = self.layer.diagonal().into_iter().fold(0.0, f64::max);
        let nmax = self.layer_laplacian.diagonal().into_iter().fold(0.0, f64::max);
        bmax + vmax * (1.0 + self.mixed_coefficient() * nmax)
    }

    /// Diagonal of A in layer-major order.
    pub fn diagonal(&self) -> Vec<f64> {
        let p = self.grid.plane();
        let bd = self.layer.diagonal();
        let nd = self.layer_laplacian.diagonal();
        let vd = self.vertical.matrix().diagonal();
        let c = self.mixed_coefficient();
        let mut out = Vec::with_capacity(self.grid.cells());
        for k in 0..self.grid.nz {
            for i in 0..p {
                out.push(bd[i] + vd[k] * (1.0 + c * nd[i]));
            }
        }
        out
    }

    /// Horizontal flux q(R) on faces.
    pub fn flux(&self, t: &[f64]) -> FaceFlux {
        let p = self.grid.plane();
        let PhysParams {
            lambda, k_h, mu, k_v, ..
        } = self.params;
        let vt = self.vertical.apply(t, p);
        let mut qx = Vec::with_capacity(t.len());
        let mut qy = Vec::with_capacity(t.len());
        for k in 0..self.grid.nz {
            let layer = &t[k * p..(k + 1) * p];
            let tzz: Vec<f64> = vt[k * p..(k + 1) * p].iter().map(|v| -v / k_v).collect();
            let psi = self.plane.elliptic(layer);
            let (ox, oy) = self.plane.outer_flux(&psi);
            let gx = self.plane.grad_x(layer);
            let gy = self.plane.grad_y(layer);
            let zx = self.plane.grad_x(&tzz);
            let zy = self.plane.grad_y(&tzz);
            for i in 0..p {
                qx.push(lambda * ox[i] - k_h * gx[i] + mu * zx[i]);
                qy.push(lambda * oy[i] - k_h * gy[i] + mu * zy[i]);
            }
        }
        FaceFlux { qx, qy }
    }

    /// Matrix-free A R = ∇·q(R) + V R on a layer-major interior vector.
    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        let p = self.grid.plane();
        let q = self.flux(t);
        let mut out = self.vertical.apply(t, p);
        for k in 0..self.grid.nz {
            let span = k * p..(k + 1) * p;
            let d = self.plane.div(&q.qx[span.clone()], &q.qy[span.clone()]);
            for (o, v) in out[span].iter_mut().zip(d) {
                *o += v;
            }
        }
        out
    }

    /// Face-sum evaluation of the bilinear form.
    pub fn bilinear(&self, r1: &[f64], r2: &[f64]) -> f64 {
        let g = &self.grid;
        let p = g.plane();
        let nz = g.nz;
        let PhysParams {
            lambda,
            k_h,
            mu,
            k_v,
            alpha,
            ..
        } = self.params;
        let dv = g.cell_volume();
        let da = g.cell_area();
        let top = (nz - 1) * p;
        let (t1, t2) = (&r1[top..top + p], &r2[top..top + p]);

        let surface = alpha * t1.iter().zip(t2).map(|(a, b)| a * b).sum::<f64>() * da;
        let surface_mixed = alpha * (mu / k_v) * self.plane.face_dot(t1, t2) * da;

        let mut horizontal = 0.0;
        let mut hyper = 0.0;
        for k in 0..nz {
            let a = &r1[k * p..(k + 1) * p];
            let b = &r2[k * p..(k + 1) * p];
            horizontal += self.plane.face_dot(a, b);
            let pa = self.plane.elliptic(a);
            let pb = self.plane.elliptic(b);
            hyper += pa.iter().zip(&pb).map(|(x, y)| x * y).sum::<f64>();
        }

        let mut vertical = 0.0;
        let mut mixed = 0.0;
        for k in 0..nz - 1 {
            let dz1: Vec<f64> = (0..p).map(|i| (r1[(k + 1) * p + i] - r1[k * p + i]) / g.dz).collect();
            let dz2: Vec<f64> = (0..p).map(|i| (r2[(k + 1) * p + i] - r2[k * p + i]) / g.dz).collect();
            vertical += dz1.iter().zip(&dz2).map(|(a, b)| a * b).sum::<f64>();
            mixed += self.plane.face_dot(&dz1, &dz2);
        }

        surface + surface_mixed + (k_h * horizontal + k_v * vertical + lambda * hyper + mu * mixed) * dv
    }

    /// Direct solver for s·I + t·A.
    pub fn tensor_solver(&self, s: f64, t: f64) -> Result<TensorSolver> {
        TensorSolver::new(
            &self.layer,
            &self.layer_laplacian,
            self.mixed_coefficient(),
            &self.vertical.matrix(),
            s,
            t,
        )
    }

    fn build_sparse(&mut self) {
        let raw_layer = &self.layer_raw;
        let p = self.grid.plane();
        let nz = self.grid.nz;
        let v = self.vertical.matrix();
        let c = self.mixed_coefficient();
        let lap = &self.layer_laplacian;
        let mut trip = Vec::with_capacity(nz * (raw_layer.nnz() + 3 * (p + lap.nnz())));
        for k in 0..nz {
            for r in 0..p {
                for (col, val) in raw_layer.row(r) {
                    trip.push((k * p + r, k * p + col, val));
                }
            }
            for kk in k.saturating_sub(1)..(k + 2).min(nz) {
                let vk = v[(k, kk)];
                if vk == 0.0 {
                    continue;
                }
                for r in 0..p {
                    trip.push((k * p + r, kk * p + r, vk));
                    for (col, val) in lap.row(r) {
                        trip.push((k * p + r, kk * p + col, c * vk * val));
                    }
                }
            }
        }
        let raw = Csr::from_triplets(self.grid.cells(), trip);
        self.asymmetry_before = raw.relative_asymmetry();
        self.sparse = Some(raw.symmetrized());
    }
}

/// Builds the sparse matrix of a layer operator by applying it to sums of
/// unit vectors whose supports cannot overlap (distance-4 colouring for the
/// 5×5 stencil footprint).
fn probe(plane: &Plane, op: impl Fn(&[f64]) -> Vec<f64>) -> Csr {
    let (nx, ny) = (plane.nx, plane.ny);
    let n = nx * ny;
    let window = |i: usize, j: usize, reach: isize| -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let (ii, jj) = (i as isize + di, j as isize + dj);
                let (ii, jj) = if plane.periodic {
                    (ii.rem_euclid(nx as isize), jj.rem_euclid(ny as isize))
                } else if ii < 0 || jj < 0 || ii >= nx as isize || jj >= ny as isize {
                    continue;
                } else {
                    (ii, jj)
                };
                set.insert(jj as usize * nx + ii as usize);
            }
        }
        set
    };
    let mut colour = vec![usize::MAX; n];
    let mut ncolours = 0;
    for c in 0..n {
        let used: BTreeSet<usize> = window(c % nx, c / nx, 4)
            .into_iter()
            .filter(|&o| colour[o] != usize::MAX)
            .map(|o| colour[o])
            .collect();
        let pick = (0..).find(|x| !used.contains(x)).unwrap();
        colour[c] = pick;
        ncolours = ncolours.max(pick + 1);
    }
    let mut trip = Vec::new();
    for s in 0..ncolours {
        let e: Vec<f64> = colour.iter().map(|&c| if c == s { 1.0 } else { 0.0 }).collect();
        let y = op(&e);
        for r in 0..n {
            for c in window(r % nx, r / nx, 2) {
                if colour[c] == s {
                    trip.push((r, c, y[r]));
                }
            }
        }
    }
    Csr::from_triplets(n, trip)
}

/// Builds the operator and its explicit sparse matrix, refusing grids with
/// more than `cap` unknowns.
pub fn assemble_with_cap(grid: &Grid, params: &PhysParams, cap: usize) -> Result<DiffusionOperator> {
    if grid.cells() > cap {
        return Err(Error::TooLarge {
            unknowns: grid.cells(),
            cap,
        });
    }
    let mut op = DiffusionOperator::new(grid, params)?;
    op.build_sparse();
    log::info!(
        "assembled {} unknowns, {} nonzeros, pre-symmetrisation asymmetry {:e}",
        grid.cells(),
        op.sparse.as_ref().map_or(0, Csr::nnz),
        op.asymmetry_before
    );
    Ok(op)
}

pub fn assemble(grid: &Grid, params: &PhysParams) -> Result<DiffusionOperator> {
    assemble_with_cap(grid, params, DEFAULT_CAP)
}

/// Fills both ghost layers from the interior values.
///
/// Lateral first layer: the oblique condition, i.e. zero normal component of
/// Hᵀ∇T at the wall face with the tangential derivative taken from the
/// adjacent cell. Lateral second layer: zero normal flux q·n written with
/// ghost differences and solved for the outer ghost. Corners: the common value
/// of the two edge extrapolations. Vertical: Neumann mirror at the bottom,
/// Robin ratio at the top.
pub fn fill_ghosts(t: &ScalarField3, params: &PhysParams) -> ScalarField3 {
    let mut out = t.clone();
    let g = *t.grid();
    let (nx, ny, nz) = (g.nx as isize, g.ny as isize, g.nz as isize);
    if g.periodic() {
        for k in 0..nz {
            for j in -2..ny + 2 {
                for i in -2..nx + 2 {
                    if (0..nx).contains(&i) && (0..ny).contains(&j) {
                        continue;
                    }
                    let v = t.at(i.rem_euclid(nx), j.rem_euclid(ny), k);
                    out.set_ghost(i, j, k, v);
                }
            }
        }
    } else {
        fill_lateral(&mut out, params);
    }
    let vert = Vertical {
        nz: g.nz,
        dz: g.dz,
        k_v: params.k_v,
        alpha: params.alpha,
    };
    let r = vert.robin_ratio();
    for j in -2..ny + 2 {
        for i in -2..nx + 2 {
            let b0 = out.at(i, j, 0);
            let b1 = out.at(i, j, 1);
            out.set_ghost(i, j, -1, b0);
            out.set_ghost(i, j, -2, b1);
            let top = out.at(i, j, nz - 1);
            let g1 = r * top;
            out.set_ghost(i, j, nz, g1);
            out.set_ghost(i, j, nz + 1, 2.0 * g1 - top);
        }
    }
    out.mark_ghosts_filled();
    out
}

fn fill_lateral(out: &mut ScalarField3, params: &PhysParams) {
    let g = *out.grid();
    let plane = Plane::new(&g, params);
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let (sx, sy) = (nx as isize, ny as isize);
    let p = g.plane();
    let data = out.interior();
    let vert = Vertical {
        nz,
        dz: g.dz,
        k_v: params.k_v,
        alpha: params.alpha,
    };
    let tzz_of = |col: &[f64]| -> Vec<f64> {
        vert.apply(col, 1).into_iter().map(|v| -v / params.k_v).collect()
    };
    let r_south = params.rotation_ratio_at(0.0);
    let r_north = params.rotation_ratio_at(g.ly);
    let b_eps = params.beta / params.epsilon;
    let (lambda, k_h, mu) = (params.lambda, params.k_h, params.mu);

    // first layer
    for k in 0..nz {
        let layer = &data[k * p..(k + 1) * p];
        let cx = plane.cdiff_x(layer);
        let cy = plane.cdiff_y(layer);
        for j in 0..ny {
            let r = plane.rc[j];
            let w = layer[j * nx] + g.dx * r * cy[j * nx];
            let e = layer[j * nx + nx - 1] - g.dx * r * cy[j * nx + nx - 1];
            out.set_ghost(-1, j as isize, k as isize, w);
            out.set_ghost(sx, j as isize, k as isize, e);
        }
        for i in 0..nx {
            let s = layer[i] - g.dy * r_south * cx[i];
            let n = layer[(ny - 1) * nx + i] + g.dy * r_north * cx[(ny - 1) * nx + i];
            out.set_ghost(i as isize, -1, k as isize, s);
            out.set_ghost(i as isize, sy, k as isize, n);
        }
    }

    // column second derivatives in the interior edge cells and first ghosts
    let column = |o: &ScalarField3, i: isize, j: isize| -> Vec<f64> {
        tzz_of(&(0..nz as isize).map(|k| o.at(i, j, k)).collect::<Vec<_>>())
    };
    let mut second: Vec<(isize, isize, isize, f64)> = Vec::new();
    for k in 0..nz {
        let layer = &data[k * p..(k + 1) * p];
        let psi = plane.elliptic(layer);
        let cpx = plane.cdiff_x(&psi);
        let cpy = plane.cdiff_y(&psi);
        let ki = k as isize;
        let at = |i: isize, j: isize| out.at(i, j, ki);
        let clamp_j = |j: isize| j.clamp(0, sy - 1);
        let clamp_i = |i: isize| i.clamp(0, sx - 1);
        for j in 0..sy {
            let ju = j as usize;
            let r = plane.rc[ju];
            let dyy = |i: isize| (at(i, clamp_j(j - 1)) - 2.0 * at(i, j) + at(i, clamp_j(j + 1))) / (g.dy * g.dy);
            // west
            let (t0, tg) = (at(0, j), at(-1, j));
            let q = -k_h * (t0 - tg) / g.dx + mu * (column(out, 0, j)[k] - column(out, -1, j)[k]) / g.dx;
            let coef = 1.0 / (g.dx * g.dx) + b_eps / (2.0 * g.dx);
            let v = if lambda > 0.0 && coef.abs() > 1e-12 / (g.dx * g.dx) {
                let psi_g = psi[ju * nx] - g.dx * r * cpy[ju * nx] + g.dx * q / lambda;
                let rest = (t0 - 2.0 * tg) / (g.dx * g.dx) + dyy(-1) - b_eps * t0 / (2.0 * g.dx);
                (psi_g - rest) / coef
            } else {
                2.0 * tg - t0
            };
            second.push((-2, j, ki, v));
            // east
            let (tn, tg) = (at(sx - 1, j), at(sx, j));
            let q = -k_h * (tg - tn) / g.dx + mu * (column(out, sx, j)[k] - column(out, sx - 1, j)[k]) / g.dx;
            let coef = 1.0 / (g.dx * g.dx) - b_eps / (2.0 * g.dx);
            let v = if lambda > 0.0 && coef.abs() > 1e-12 / (g.dx * g.dx) {
                let c = ju * nx + nx - 1;
                let psi_g = psi[c] + g.dx * r * cpy[c] - g.dx * q / lambda;
                let rest = (tn - 2.0 * tg) / (g.dx * g.dx) + dyy(sx) + b_eps * tn / (2.0 * g.dx);
                (psi_g - rest) / coef
            } else {
                2.0 * tg - tn
            };
            second.push((sx + 1, j, ki, v));
        }
        for i in 0..sx {
            let iu = i as usize;
            let dxx = |j: isize| (at(clamp_i(i - 1), j) - 2.0 * at(i, j) + at(clamp_i(i + 1), j)) / (g.dx * g.dx);
            let cxg = |j: isize| (at(clamp_i(i + 1), j) - at(clamp_i(i - 1), j)) / (g.dx * ((clamp_i(i + 1) - clamp_i(i - 1)) as f64));
            let coef = 1.0 / (g.dy * g.dy);
            // south
            let (t0, tg) = (at(i, 0), at(i, -1));
            let q = -k_h * (t0 - tg) / g.dy + mu * (column(out, i, 0)[k] - column(out, i, -1)[k]) / g.dy;
            let v = if lambda > 0.0 {
                let psi_g = psi[iu] + g.dy * r_south * cpx[iu] + g.dy * q / lambda;
                let rest = dxx(-1) + (t0 - 2.0 * tg) / (g.dy * g.dy) - b_eps * cxg(-1);
                (psi_g - rest) / coef
            } else {
                2.0 * tg - t0
            };
            second.push((i, -2, ki, v));
            // north
            let (tn, tg) = (at(i, sy - 1), at(i, sy));
            let q = -k_h * (tg - tn) / g.dy + mu * (column(out, i, sy)[k] - column(out, i, sy - 1)[k]) / g.dy;
            let v = if lambda > 0.0 {
                let c = (ny - 1) * nx + iu;
                let psi_g = psi[c] - g.dy * r_north * cpx[c] - g.dy * q / lambda;
                let rest = dxx(sy) + (tn - 2.0 * tg) / (g.dy * g.dy) - b_eps * cxg(sy);
                (psi_g - rest) / coef
            } else {
                2.0 * tg - tn
            };
            second.push((i, sy + 1, ki, v));
        }
    }
    for (i, j, k, v) in second {
        out.set_ghost(i, j, k, v);
    }

    // corners
    for k in 0..nz as isize {
        for j in [-2, -1, sy, sy + 1] {
            for i in [-2, -1, sx, sx + 1] {
                let (ie, je) = (i.clamp(0, sx - 1), j.clamp(0, sy - 1));
                let v = out.at(i, je, k) + out.at(ie, j, k) - out.at(ie, je, k);
                out.set_ghost(i, j, k, v);
            }
        }
    }
}

/// ∇·(Hᵀ∇T) on every layer.
pub fn elliptic_core(t: &ScalarField3, params: &PhysParams) -> Result<ScalarField3> {
    t.require_ghosts()?;
    let g = *t.grid();
    let plane = Plane::new(&g, params);
    let data = t.interior();
    let p = g.plane();
    let mut out = Vec::with_capacity(data.len());
    for k in 0..g.nz {
        out.extend(plane.elliptic(&data[k * p..(k + 1) * p]));
    }
    ScalarField3::from_interior(&g, &out)
}

/// q(T) on horizontal faces.
pub fn flux_q(t: &ScalarField3, op: &DiffusionOperator) -> Result<FaceFlux> {
    t.require_ghosts()?;
    t.grid().check_same(op.grid())?;
    Ok(op.flux(&t.interior()))
}

/// A T on interior cells.
pub fn apply_a(t: &ScalarField3, op: &DiffusionOperator) -> Result<ScalarField3> {
    t.require_ghosts()?;
    t.grid().check_same(op.grid())?;
    ScalarField3::from_interior(op.grid(), &op.apply(&t.interior()))
}

pub fn bilinear_a(r1: &ScalarField3, r2: &ScalarField3, op: &DiffusionOperator) -> Result<f64> {
    r1.require_ghosts()?;
    r2.require_ghosts()?;
    r1.grid().check_same(op.grid())?;
    r2.grid().check_same(op.grid())?;
    Ok(op.bilinear(&r1.interior(), &r2.interior()))
}

/// ‖R‖² = a(R, R).
pub fn v2_norm_sq(r: &ScalarField3, op: &DiffusionOperator) -> Result<f64> {
    bilinear_a(r, r, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::inner_l2;
    use crate::grid::LateralMode;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn periodic_params(beta: f64, epsilon: f64) -> PhysParams {
        PhysParams {
            beta,
            epsilon,
            alpha: 0.0,
            ..PhysParams::default()
        }
    }

    fn random_field(g: &Grid, seed: u64) -> ScalarField3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..g.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField3::from_interior(g, &data).unwrap()
    }

    #[test]
    fn elliptic_core_needs_ghosts() {
        let g = Grid::unit(8, 8, 4, LateralMode::Physical).unwrap();
        let t = ScalarField3::constant(&g, 1.0);
        assert!(matches!(
            elliptic_core(&t, &PhysParams::default()),
            Err(Error::GhostsNotFilled)
        ));
        let filled = fill_ghosts(&t, &PhysParams::default());
        let e = elliptic_core(&filled, &PhysParams::default()).unwrap();
        assert!(e.max_abs() < 1e-12);
    }

    #[test]
    fn elliptic_core_matches_closed_form() {
        // ΔT − (β/ε)T_x for T = sin(2πx)
        let g = Grid::unit(64, 16, 4, LateralMode::PeriodicTest).unwrap();
        for (beta, eps) in [(0.0, 0.1), (0.5, 1.0)] {
            let p = periodic_params(beta, eps);
            let t = fill_ghosts(&ScalarField3::from_fn(&g, |x, _, _| (2.0 * PI * x).sin()), &p);
            let e = elliptic_core(&t, &p).unwrap();
            let mut worst = 0.0f64;
            // the β-plane is not periodic in y, so skip the wrap row
            for k in 0..g.nz {
                for j in 1..g.ny {
                    for i in 0..g.nx {
                        let x = g.x(i as isize);
                        let exact = -4.0 * PI * PI * (2.0 * PI * x).sin()
                            - beta / eps * 2.0 * PI * (2.0 * PI * x).cos();
                        worst = worst.max((e.get(i, j, k) - exact).abs());
                    }
                }
            }
            assert!(worst < 4.0 * PI * PI * 2e-3, "beta {beta}: {worst}");
        }
    }

    #[test]
    fn elliptic_core_second_order_in_closed_basin() {
        // interior error of ΔT − (β/ε)T_x with β ≠ 0 drops by ~4 per refinement
        let p = PhysParams::default();
        let err = |n: usize| {
            let g = Grid::unit(n, n, 4, LateralMode::Physical).unwrap();
            let t = fill_ghosts(
                &ScalarField3::from_fn(&g, |x, y, _| (2.0 * x).sin() * (3.0 * y).cos()),
                &p,
            );
            let e = elliptic_core(&t, &p).unwrap();
            let mut worst = 0.0f64;
            for j in n / 4..3 * n / 4 {
                for i in n / 4..3 * n / 4 {
                    let (x, y) = (g.x(i as isize), g.y(j as isize));
                    let exact = -13.0 * (2.0 * x).sin() * (3.0 * y).cos()
                        - p.beta / p.epsilon * 2.0 * (2.0 * x).cos() * (3.0 * y).cos();
                    worst = worst.max((e.get(i, j, 1) - exact).abs());
                }
            }
            worst
        };
        let order = (err(16) / err(32)).log2();
        assert!(order > 1.9, "observed order {order}");
    }

    #[test]
    fn dispersion_relation_for_cosine_mode() {
        let g = Grid::unit(32, 32, 16, LateralMode::PeriodicTest).unwrap();
        let p = periodic_params(0.0, 0.1);
        let op = DiffusionOperator::new(&g, &p).unwrap();
        for (kk, ll, mm) in [(1.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.0, 2.0, 1.0)] {
            let t = ScalarField3::from_fn(&g, |x, y, z| {
                (2.0 * PI * kk * x).cos() * (2.0 * PI * ll * y).cos() * (mm * PI * (z + 1.0)).cos()
            });
            let at = op.apply(&t.interior());
            let kappa2 = 4.0 * PI * PI * (kk * kk + ll * ll);
            let m2 = (mm * PI).powi(2);
            let sigma = p.lambda * kappa2 * kappa2 + p.k_h * kappa2 + p.mu * kappa2 * m2 + p.k_v * m2;
            let ti = t.interior();
            let ratio = at.iter().zip(&ti).map(|(a, b)| a * b).sum::<f64>()
                / ti.iter().map(|b| b * b).sum::<f64>();
            assert!((ratio - sigma).abs() < 0.02 * sigma, "({kk},{ll},{mm}): {ratio} vs {sigma}");
            // pointwise proportionality (discrete eigenfunction)
            for (a, b) in at.iter().zip(&ti) {
                assert!((a - ratio * b).abs() < 1e-9 * sigma);
            }
        }
    }

    #[test]
    fn symmetry_and_form_identity() {
        let g = Grid::new(9, 7, 5, 1.0, 0.8, 1.0, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let op = DiffusionOperator::new(&g, &p).unwrap();
        for seed in 0..5 {
            let r1 = fill_ghosts(&random_field(&g, 2 * seed), &p);
            let r2 = fill_ghosts(&random_field(&g, 2 * seed + 1), &p);
            let a1 = apply_a(&r1, &op).unwrap();
            let a2 = apply_a(&r2, &op).unwrap();
            let l = inner_l2(&a1, &r2).unwrap();
            let r = inner_l2(&r1, &a2).unwrap();
            let scale = inner_l2(&a1, &a1).unwrap().sqrt() * inner_l2(&r2, &r2).unwrap().sqrt();
            assert!((l - r).abs() <= 1e-12 * scale, "{l} {r}");
            let form = bilinear_a(&r1, &r2, &op).unwrap();
            assert!((form - l).abs() <= 1e-10 * scale);
            assert!((form - bilinear_a(&r2, &r1, &op).unwrap()).abs() <= 1e-12 * scale);
            let q = v2_norm_sq(&r1, &op).unwrap();
            assert!((q - inner_l2(&a1, &r1).unwrap()).abs() <= 1e-10 * q);
        }
    }

    #[test]
    fn form_of_constants() {
        let g = Grid::unit(8, 8, 4, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let op = DiffusionOperator::new(&g, &p).unwrap();
        let c = fill_ghosts(&ScalarField3::constant(&g, 2.0), &p);
        let a = bilinear_a(&c, &c, &op).unwrap();
        assert!((a - p.alpha * 4.0).abs() < 1e-13);
        let one = fill_ghosts(&ScalarField3::constant(&g, 1.0), &p);
        assert!((v2_norm_sq(&one, &op).unwrap() - p.alpha).abs() < 1e-13);
        let zero = fill_ghosts(&ScalarField3::zeros(&g), &p);
        assert_eq!(v2_norm_sq(&zero, &op).unwrap(), 0.0);
    }

    #[test]
    fn flux_examples() {
        let g = Grid::unit(64, 8, 4, LateralMode::PeriodicTest).unwrap();
        let p = periodic_params(0.0, 0.1);
        let op = DiffusionOperator::new(&g, &p).unwrap();
        let c = fill_ghosts(&ScalarField3::constant(&g, 1.5), &p);
        let q = flux_q(&c, &op).unwrap();
        assert!(q.qx.iter().chain(&q.qy).all(|v| v.abs() < 1e-12));
        let tz = fill_ghosts(&ScalarField3::from_fn(&g, |_, _, z| z * z), &p);
        let q = flux_q(&tz, &op).unwrap();
        assert!(q.qx.iter().chain(&q.qy).all(|v| v.abs() < 1e-12));

        // T = sin(2πx): q = λ H∇(ΔT) − K_h∇T, ΔT = −4π² T
        let t = fill_ghosts(&ScalarField3::from_fn(&g, |x, _, _| (2.0 * PI * x).sin()), &p);
        let q = flux_q(&t, &op).unwrap();
        let r = p.f0 / p.epsilon;
        let w = 2.0 * PI;
        for i in 0..g.nx {
            let xf = (i as f64 + 1.0) * g.dx;
            let q1 = -(p.lambda * w * w * w + p.k_h * w) * (w * xf).cos();
            let q2 = -r * p.lambda * w * w * w * (w * g.x(i as isize)).cos();
            let scale = r * p.lambda * w * w * w;
            assert!((q.qx[2 * g.nx + i] - q1).abs() < 5e-3 * scale, "q1 {i}");
            assert!((q.qy[2 * g.nx + i] - q2).abs() < 5e-3 * scale, "q2 {i}");
        }
    }

    #[test]
    fn ghost_examples() {
        let g = Grid::unit(8, 6, 4, LateralMode::Physical).unwrap();
        let p0 = PhysParams {
            alpha: 0.0,
            ..PhysParams::default()
        };
        let c = fill_ghosts(&ScalarField3::constant(&g, 3.0), &p0);
        for k in -2..6 {
            for j in -2..8 {
                for i in -2..10 {
                    assert!((c.at(i, j, k) - 3.0).abs() < 1e-12, "({i},{j},{k}) {}", c.at(i, j, k));
                }
            }
        }
        let p = PhysParams::default();
        let c = fill_ghosts(&ScalarField3::constant(&g, 3.0), &p);
        let ratio = 1.0 - p.alpha * g.dz / p.k_v;
        assert!((c.at(2, 2, 4) - 3.0 * ratio).abs() < 1e-12);

        // f ≡ 0: the oblique condition is a Neumann mirror
        let pf = PhysParams {
            f0: 0.0,
            beta: 0.0,
            ..PhysParams::default()
        };
        let t = fill_ghosts(&random_field(&g, 3), &pf);
        for k in 0..4 {
            for j in 0..6 {
                assert_eq!(t.at(-1, j, k), t.at(0, j, k));
                assert_eq!(t.at(8, j, k), t.at(7, j, k));
            }
        }
    }

    #[test]
    fn ghosts_reproduce_zero_wall_flux_and_are_idempotent() {
        let g = Grid::unit(8, 6, 4, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let t = fill_ghosts(&random_field(&g, 11), &p);
        let again = fill_ghosts(&t, &p);
        assert_eq!(t, again);
        let plane = Plane::new(&g, &p);
        let layer: Vec<f64> = t.interior()[..g.plane()].to_vec();
        let cy = plane.cdiff_y(&layer);
        for j in 0..6 {
            // (Hᵀ∇T)·n at the west face with ghost difference
            let flux = (t.at(0, j, 0) - t.at(-1, j, 0)) / g.dx + plane.rc[j as usize] * cy[j as usize * 8];
            assert!(flux.abs() < 1e-10);
        }
    }

    #[test]
    fn second_ghost_layer_zeroes_wall_flux() {
        let g = Grid::unit(8, 6, 4, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let t = fill_ghosts(&random_field(&g, 5), &p);
        let b = p.beta / p.epsilon;
        let plane = Plane::new(&g, &p);
        let k = 1;
        let layer: Vec<f64> = t.interior()[k * 48..(k + 1) * 48].to_vec();
        let psi = plane.elliptic(&layer);
        let cpy = plane.cdiff_y(&psi);
        let tzz = |i: isize, j: isize| {
            let col: Vec<f64> = (0..4).map(|kk| t.at(i, j, kk)).collect();
            let v = Vertical { nz: 4, dz: g.dz, k_v: p.k_v, alpha: p.alpha };
            -v.apply(&col, 1)[k as usize] / p.k_v
        };
        for j in 1..5isize {
            let at = |i: isize, jj: isize| t.at(i, jj, k as isize);
            let psi_g = (at(0, j) - 2.0 * at(-1, j) + at(-2, j)) / (g.dx * g.dx)
                + (at(-1, j - 1) - 2.0 * at(-1, j) + at(-1, j + 1)) / (g.dy * g.dy)
                - b * (at(0, j) - at(-2, j)) / (2.0 * g.dx);
            let ju = j as usize;
            let qn = p.lambda * ((psi[ju * 8] - psi_g) / g.dx - plane.rc[ju] * cpy[ju * 8])
                - p.k_h * (at(0, j) - at(-1, j)) / g.dx
                + p.mu * (tzz(0, j) - tzz(-1, j)) / g.dx;
            assert!(qn.abs() < 1e-8, "row {j}: {qn}");
        }
    }

    #[test]
    fn assembled_matrix_matches_matrix_free() {
        for lateral in [LateralMode::Physical, LateralMode::PeriodicTest] {
            let g = Grid::unit(8, 7, 4, lateral).unwrap();
            let p = PhysParams::default();
            let op = assemble(&g, &p).unwrap();
            let a = op.sparse().unwrap();
            assert!(op.asymmetry_before() < 1e-12);
            assert!(a.relative_asymmetry() <= 1e-12);
            for seed in 0..20 {
                let x = random_field(&g, 100 + seed).interior();
                let y1 = a.matvec(&x);
                let y2 = op.apply(&x);
                let scale = y2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (u, v) in y1.iter().zip(&y2) {
                    assert!((u - v).abs() <= 1e-11 * scale);
                }
            }
            for (u, v) in a.diagonal().iter().zip(op.diagonal()) {
                assert!((u - v).abs() <= 1e-13 * v.abs());
            }
        }
    }

    #[test]
    fn dense_spectrum_at_tiny_size() {
        let dense = |op: &DiffusionOperator| {
            let a = op.sparse().unwrap();
            let n = a.n;
            let mut m = nalgebra::DMatrix::zeros(n, n);
            for r in 0..n {
                for (c, v) in a.row(r) {
                    m[(r, c)] = v;
                }
            }
            let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            e.sort_by(f64::total_cmp);
            e
        };
        let g = Grid::unit(8, 8, 4, LateralMode::Physical).unwrap();
        let e = dense(&assemble(&g, &PhysParams::default()).unwrap());
        assert!(e[0] > 0.0, "min eigenvalue {}", e[0]);

        let g = Grid::unit(8, 8, 4, LateralMode::PeriodicTest).unwrap();
        let e = dense(&assemble(&g, &periodic_params(0.0, 0.1)).unwrap());
        let top = e[e.len() - 1];
        let kernel = e.iter().filter(|v| v.abs() < 1e-10 * top).count();
        assert_eq!(kernel, 1);
        assert!(e[0] > -1e-10 * top);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Grid::unit(8, 8, 8, LateralMode::Physical).unwrap();
        assert!(matches!(
            assemble_with_cap(&g, &PhysParams::default(), 100),
            Err(Error::TooLarge { unknowns: 512, cap: 100 })
        ));
    }

    #[test]
    fn tensor_solver_inverts_operator() {
        let g = Grid::unit(8, 6, 5, LateralMode::Physical).unwrap();
        let op = DiffusionOperator::new(&g, &PhysParams::default()).unwrap();
        let solver = op.tensor_solver(1.0, 0.3).unwrap();
        let x = random_field(&g, 8).interior();
        let ax = op.apply(&x);
        let rhs: Vec<f64> = x.iter().zip(&ax).map(|(a, b)| a + 0.3 * b).collect();
        let back = solver.solve(&rhs);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
