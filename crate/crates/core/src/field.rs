//! Field containers and the discrete integrals shared by every module.

use crate::error::{Error, Result};
use crate::grid::{Grid, GHOST};

/// Scalar on Ω with a two-deep ghost layer on every face.
///
/// Interior writes invalidate the ghosts; stencil consumers check
/// [`ScalarField3::ghosts_filled`] before reading them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    grid: Grid,
    sx: usize,
    sy: usize,
    values: Vec<f64>,
    ghosts_filled: bool,
}

impl ScalarField3 {
    pub fn zeros(grid: &Grid) -> Self {
        let sx = grid.nx + 2 * GHOST;
        let sy = grid.ny + 2 * GHOST;
        let sz = grid.nz + 2 * GHOST;
        ScalarField3 {
            grid: *grid,
            sx,
            sy,
            values: vec![0.0; sx * sy * sz],
            ghosts_filled: false,
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField3::from_fn(grid, |_, _, _| c)
    }

    /// Samples `f(x, y, z)` at cell centres.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut out = ScalarField3::zeros(grid);
        for k in 0..grid.nz {
            let z = grid.z(k as isize);
            for j in 0..grid.ny {
                let y = grid.y(j as isize);
                for i in 0..grid.nx {
                    out.set(i, j, k, f(grid.x(i as isize), y, z));
                }
            }
        }
        out
    }

    /// Builds a field from interior values in x-fastest order.
    pub fn from_interior(grid: &Grid, data: &[f64]) -> Result<Self> {
        if data.len() != grid.cells() {
            return Err(Error::GridMismatch(format!(
                "expected {} interior values, got {}",
                grid.cells(),
                data.len()
            )));
        }
        let mut out = ScalarField3::zeros(grid);
        out.set_interior(data);
        Ok(out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ghosts_filled(&self) -> bool {
        self.ghosts_filled
    }

    pub(crate) fn mark_ghosts_filled(&mut self) {
        self.ghosts_filled = true;
    }

    pub fn require_ghosts(&self) -> Result<()> {
        if self.ghosts_filled {
            Ok(())
        } else {
            Err(Error::GhostsNotFilled)
        }
    }

    #[inline]
    fn offset(&self, i: isize, j: isize, k: isize) -> usize {
        let g = GHOST as isize;
        debug_assert!(i >= -g && i < self.grid.nx as isize + g);
        debug_assert!(j >= -g && j < self.grid.ny as isize + g);
        debug_assert!(k >= -g && k < self.grid.nz as isize + g);
        (((k + g) as usize * self.sy) + (j + g) as usize) * self.sx + (i + g) as usize
    }

    /// Reads any cell, ghosts included.
    #[inline]
    pub fn at(&self, i: isize, j: isize, k: isize) -> f64 {
        self.values[self.offset(i, j, k)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.at(i as isize, j as isize, k as isize)
    }

    /// Writes an interior cell.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i as isize, j as isize, k as isize);
        self.values[o] = v;
        self.ghosts_filled = false;
    }

    #[inline]
    pub(crate) fn set_ghost(&mut self, i: isize, j: isize, k: isize, v: f64) {
        let o = self.offset(i, j, k);
        self.values[o] = v;
    }

    pub fn interior(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(g.cells());
        for k in 0..g.nz {
            for j in 0..g.ny {
                let start = self.offset(0, j as isize, k as isize);
                out.extend_from_slice(&self.values[start..start + g.nx]);
            }
        }
        out
    }

    pub fn set_interior(&mut self, data: &[f64]) {
        let g = self.grid;
        assert_eq!(data.len(), g.cells());
        for k in 0..g.nz {
            for j in 0..g.ny {
                let start = self.offset(0, j as isize, k as isize);
                let src = g.index(0, j, k);
                self.values[start..start + g.nx].copy_from_slice(&data[src..src + g.nx]);
            }
        }
        self.ghosts_filled = false;
    }

    pub fn map_interior(&self, f: impl Fn(f64) -> f64) -> ScalarField3 {
        let data: Vec<f64> = self.interior().into_iter().map(f).collect();
        ScalarField3::from_interior(&self.grid, &data).expect("same grid")
    }

    /// `self + s·other` on interior cells.
    pub fn axpy(&self, s: f64, other: &ScalarField3) -> Result<ScalarField3> {
        self.grid.check_same(&other.grid)?;
        let a = self.interior();
        let b = other.interior();
        let data: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        ScalarField3::from_interior(&self.grid, &data)
    }

    pub fn scaled(&self, s: f64) -> ScalarField3 {
        self.map_interior(|v| s * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.interior().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.interior().iter().all(|v| v.is_finite())
    }

    /// Surface layer (k = nz−1) as a horizontal field.
    pub fn top_layer(&self) -> ScalarField2 {
        let g = &self.grid;
        let mut out = ScalarField2::zeros(g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                out.set(i, j, self.get(i, j, g.nz - 1));
            }
        }
        out
    }
}

/// Scalar on M (no vertical dependence).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2 {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField2 {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField2 {
            grid: *grid,
            values: vec![0.0; grid.plane()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = ScalarField2::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                out.values[grid.plane_index(i, j)] = f(grid.x(i as isize), grid.y(j as isize));
            }
        }
        out
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.plane() {
            return Err(Error::GridMismatch(format!(
                "expected {} surface values, got {}",
                grid.plane(),
                values.len()
            )));
        }
        Ok(ScalarField2 {
            grid: *grid,
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nx = self.grid.nx;
        self.values[j * nx + i] = v;
    }

    /// Copies the field into every layer of a 3-D field.
    pub fn extend_in_depth(&self) -> ScalarField3 {
        let g = self.grid;
        let mut data = Vec::with_capacity(g.cells());
        for _ in 0..g.nz {
            data.extend_from_slice(&self.values);
        }
        ScalarField3::from_interior(&g, &data).expect("same grid")
    }

    pub fn is_constant(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first)
    }

    /// Midpoint approximation of ∫_M a² dxdy.
    pub fn l2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }
}

/// Diagnostic velocity: (v1, v2) at cell centres, w on z-interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// `nx·ny·(nz+1)` values, interface k of column p at `k·plane + p`.
    pub w: Vec<f64>,
}

impl VelocityField {
    pub fn zeros(grid: &Grid) -> Self {
        VelocityField {
            grid: *grid,
            v1: vec![0.0; grid.cells()],
            v2: vec![0.0; grid.cells()],
            w: vec![0.0; grid.plane() * (grid.nz + 1)],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn w_at(&self, i: usize, j: usize, interface: usize) -> f64 {
        self.w[interface * self.grid.plane() + self.grid.plane_index(i, j)]
    }

    /// Normal velocity on x-faces: entry `i` is the face between cells i and
    /// i+1. In a closed basin the last entry of each row is the east wall and
    /// is zero; the west wall is implicit.
    pub fn x_face_velocity(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut u = vec![0.0; g.cells()];
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let ip = if i + 1 < g.nx {
                        i + 1
                    } else if g.periodic() {
                        0
                    } else {
                        continue;
                    };
                    u[g.index(i, j, k)] = 0.5 * (self.v1[g.index(i, j, k)] + self.v1[g.index(ip, j, k)]);
                }
            }
        }
        u
    }

    /// Normal velocity on y-faces, same layout as [`Self::x_face_velocity`].
    pub fn y_face_velocity(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut v = vec![0.0; g.cells()];
        for k in 0..g.nz {
            for j in 0..g.ny {
                let jp = if j + 1 < g.ny {
                    j + 1
                } else if g.periodic() {
                    0
                } else {
                    continue;
                };
                for i in 0..g.nx {
                    v[g.index(i, j, k)] = 0.5 * (self.v2[g.index(i, j, k)] + self.v2[g.index(i, jp, k)]);
                }
            }
        }
        v
    }

    /// Discrete horizontal divergence of the face velocities at cell centres.
    pub fn horizontal_divergence(&self) -> Vec<f64> {
        let g = &self.grid;
        let u = self.x_face_velocity();
        let v = self.y_face_velocity();
        let mut div = vec![0.0; g.cells()];
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let c = g.index(i, j, k);
                    let west = if i > 0 {
                        u[g.index(i - 1, j, k)]
                    } else if g.periodic() {
                        u[g.index(g.nx - 1, j, k)]
                    } else {
                        0.0
                    };
                    let south = if j > 0 {
                        v[g.index(i, j - 1, k)]
                    } else if g.periodic() {
                        v[g.index(i, g.ny - 1, k)]
                    } else {
                        0.0
                    };
                    div[c] = (u[c] - west) / g.dx + (v[c] - south) / g.dy;
                }
            }
        }
        div
    }

    /// Per-cell residual of ∇·v + δ_z w.
    pub fn continuity_residual(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut res = self.horizontal_divergence();
        let plane = g.plane();
        for k in 0..g.nz {
            for p in 0..plane {
                res[k * plane + p] += (self.w[(k + 1) * plane + p] - self.w[k * plane + p]) / g.dz;
            }
        }
        res
    }

    /// Largest |v1|, |v2| and |w|.
    pub fn max_components(&self) -> [f64; 3] {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        [m(&self.v1), m(&self.v2), m(&self.w)]
    }

    pub fn max_speed(&self) -> f64 {
        let [a, b, c] = self.max_components();
        a.max(b).max(c)
    }

    pub fn all_finite(&self) -> bool {
        self.v1.iter().chain(&self.v2).chain(&self.w).all(|v| v.is_finite())
    }
}

/// Midpoint approximation of ∫_Ω a·b.
pub fn inner_l2(a: &ScalarField3, b: &ScalarField3) -> Result<f64> {
    a.grid().check_same(b.grid())?;
    Ok(dot(&a.interior(), &b.interior()) * a.grid().cell_volume())
}

/// |a|² = ∫_Ω a².
pub fn l2_norm_sq(a: &ScalarField3) -> f64 {
    let v = a.interior();
    dot(&v, &v) * a.grid().cell_volume()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cumulative midpoint integral from the bottom to each cell centre:
/// `Σ_{k'<k} f_k' dz + f_k dz/2`.
pub fn depth_integral(field: &ScalarField3) -> ScalarField3 {
    let g = *field.grid();
    let mut out = ScalarField3::zeros(&g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let mut acc = 0.0;
            for k in 0..g.nz {
                let f = field.get(i, j, k);
                out.set(i, j, k, acc + 0.5 * f * g.dz);
                acc += f * g.dz;
            }
        }
    }
    out
}

/// Midpoint integral over the whole column, ∫_{−h}^{0} f dz.
pub fn column_integral(field: &ScalarField3) -> ScalarField2 {
    let g = *field.grid();
    let mut out = ScalarField2::zeros(&g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let s: f64 = (0..g.nz).map(|k| field.get(i, j, k)).sum();
            out.set(i, j, s * g.dz);
        }
    }
    out
}
