//! Horizontal stencils on one z-layer.
//!
//! Cell arrays and face arrays are both `nx·ny` long, x fastest. Entry `(i, j)`
//! of an x-face array is the face between cells `i` and `i+1`; entry `(i, j)` of
//! a y-face array sits between rows `j` and `j+1`. In a closed basin the last
//! entry of each line is the east/north wall face and always holds zero; the
//! west/south walls are implicit zeros. In periodic mode the last entry is the
//! wrap face.
//!
//! Every operator here comes with its exact transpose so that the assembled
//! diffusion operator is symmetric by construction.

use crate::grid::Grid;
use crate::params::PhysParams;

#[derive(Debug, Clone)]
pub struct Plane {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub periodic: bool,
    /// f/ε at cell-centre rows.
    pub rc: Vec<f64>,
    /// f/ε at y-face rows (entry j is y = (j+1)·dy).
    pub rf: Vec<f64>,
}

impl Plane {
    pub fn new(grid: &Grid, params: &PhysParams) -> Self {
        Plane {
            nx: grid.nx,
            ny: grid.ny,
            dx: grid.dx,
            dy: grid.dy,
            periodic: grid.periodic(),
            rc: (0..grid.ny)
                .map(|j| params.rotation_ratio_at(grid.y(j as isize)))
                .collect(),
            rf: (0..grid.ny)
                .map(|j| params.rotation_ratio_at(grid.y_face(j as isize)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn east(&self, i: usize) -> Option<usize> {
        if i + 1 < self.nx {
            Some(i + 1)
        } else if self.periodic {
            Some(0)
        } else {
            None
        }
    }

    #[inline]
    fn west(&self, i: usize) -> Option<usize> {
        if i > 0 {
            Some(i - 1)
        } else if self.periodic {
            Some(self.nx - 1)
        } else {
            None
        }
    }

    #[inline]
    fn north(&self, j: usize) -> Option<usize> {
        if j + 1 < self.ny {
            Some(j + 1)
        } else if self.periodic {
            Some(0)
        } else {
            None
        }
    }

    #[inline]
    fn south(&self, j: usize) -> Option<usize> {
        if j > 0 {
            Some(j - 1)
        } else if self.periodic {
            Some(self.ny - 1)
        } else {
            None
        }
    }

    /// Cells → x-faces: (T_{i+1} − T_i)/dx.
    pub fn grad_x(&self, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let row = j * self.nx;
            for i in 0..self.nx {
                if let Some(e) = self.east(i) {
                    out[row + i] = (t[row + e] - t[row + i]) / self.dx;
                }
            }
        }
        out
    }

    /// Cells → y-faces: (T_{j+1} − T_j)/dy.
    pub fn grad_y(&self, t: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            if let Some(n) = self.north(j) {
                for i in 0..nx {
                    out[j * nx + i] = (t[n * nx + i] - t[j * nx + i]) / self.dy;
                }
            }
        }
        out
    }

    /// Faces → cells with zero wall flux. Equals −(grad_x, grad_y)ᵀ.
    pub fn div(&self, fx: &[f64], fy: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let s = self.south(j);
            for i in 0..nx {
                let c = j * nx + i;
                let w = self.west(i).map_or(0.0, |w| fx[j * nx + w]);
                let so = s.map_or(0.0, |s| fy[s * nx + i]);
                out[c] = (fx[c] - w) / self.dx + (fy[c] - so) / self.dy;
            }
        }
        out
    }

    /// Cells → x-faces average.
    pub fn avg_x(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let row = j * self.nx;
            for i in 0..self.nx {
                if let Some(e) = self.east(i) {
                    out[row + i] = 0.5 * (c[row + i] + c[row + e]);
                }
            }
        }
        out
    }

    /// Transpose of [`Self::avg_x`].
    pub fn avg_x_t(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let row = j * self.nx;
            for i in 0..self.nx {
                let own = if self.east(i).is_some() { p[row + i] } else { 0.0 };
                let w = self.west(i).map_or(0.0, |w| p[row + w]);
                out[row + i] = 0.5 * (own + w);
            }
        }
        out
    }

    pub fn avg_y(&self, c: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            if let Some(n) = self.north(j) {
                for i in 0..nx {
                    out[j * nx + i] = 0.5 * (c[j * nx + i] + c[n * nx + i]);
                }
            }
        }
        out
    }

    pub fn avg_y_t(&self, p: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let has_own = self.north(j).is_some();
            let s = self.south(j);
            for i in 0..nx {
                let own = if has_own { p[j * nx + i] } else { 0.0 };
                let so = s.map_or(0.0, |s| p[s * nx + i]);
                out[j * nx + i] = 0.5 * (own + so);
            }
        }
        out
    }

    /// Centred x-derivative at cells: mean of the two adjacent face gradients,
    /// the missing wall gradient replaced by its interior neighbour.
    pub fn cdiff_x(&self, t: &[f64]) -> Vec<f64> {
        let g = self.grad_x(t);
        let nx = self.nx;
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let row = j * nx;
            for i in 0..nx {
                out[row + i] = if self.periodic {
                    0.5 * (g[row + self.west(i).unwrap()] + g[row + i])
                } else if i == 0 {
                    g[row]
                } else if i == nx - 1 {
                    g[row + nx - 2]
                } else {
                    0.5 * (g[row + i - 1] + g[row + i])
                };
            }
        }
        out
    }

    /// Face field P such that cdiff_xᵀ p = −div_x(P).
    pub fn cdiff_x_adj_face(&self, p: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let mut out = vec![0.0; self.len()];
        for j in 0..self.ny {
            let row = j * nx;
            if self.periodic {
                for i in 0..nx {
                    let e = self.east(i).unwrap();
                    out[row + i] = 0.5 * (p[row + i] + p[row + e]);
                }
            } else {
                for i in 0..nx - 1 {
                    out[row + i] = 0.5 * (p[row + i] + p[row + i + 1]);
                }
                out[row] += 0.5 * p[row];
                out[row + nx - 2] += 0.5 * p[row + nx - 1];
            }
        }
        out
    }

    pub fn cdiff_y(&self, t: &[f64]) -> Vec<f64> {
        let g = self.grad_y(t);
        let nx = self.nx;
        let ny = self.ny;
        let mut out = vec![0.0; self.len()];
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = if self.periodic {
                    0.5 * (g[self.south(j).unwrap() * nx + i] + g[j * nx + i])
                } else if j == 0 {
                    g[i]
                } else if j == ny - 1 {
                    g[(ny - 2) * nx + i]
                } else {
                    0.5 * (g[(j - 1) * nx + i] + g[j * nx + i])
                };
            }
        }
        out
    }

    /// Face field P such that cdiff_yᵀ p = −div_y(P).
    pub fn cdiff_y_adj_face(&self, p: &[f64]) -> Vec<f64> {
        let nx = self.nx;
        let ny = self.ny;
        let mut out = vec![0.0; self.len()];
        if self.periodic {
            for j in 0..ny {
                let n = self.north(j).unwrap();
                for i in 0..nx {
                    out[j * nx + i] = 0.5 * (p[j * nx + i] + p[n * nx + i]);
                }
            }
        } else {
            for j in 0..ny - 1 {
                for i in 0..nx {
                    out[j * nx + i] = 0.5 * (p[j * nx + i] + p[(j + 1) * nx + i]);
                }
            }
            for i in 0..nx {
                out[i] += 0.5 * p[i];
                out[(ny - 2) * nx + i] += 0.5 * p[(ny - 1) * nx + i];
            }
        }
        out
    }

    /// Face components of Hᵀ∇T. Wall entries are zero, which is the oblique
    /// condition in flux form.
    pub fn inner_flux(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nx = self.nx;
        let mut fx = self.grad_x(t);
        let mut fy = self.grad_y(t);
        let cx = self.avg_y(&self.cdiff_x(t));
        let cy = self.avg_x(&self.cdiff_y(t));
        for j in 0..self.ny {
            for i in 0..nx {
                let c = j * nx + i;
                fx[c] += self.rc[j] * cy[c];
                fy[c] -= self.rf[j] * cx[c];
            }
        }
        (fx, fy)
    }

    /// ∇·(Hᵀ∇T).
    pub fn elliptic(&self, t: &[f64]) -> Vec<f64> {
        let (fx, fy) = self.inner_flux(t);
        self.div(&fx, &fy)
    }

    /// Face components of H∇ψ arranged so that div of them is the exact
    /// transpose of [`Self::elliptic`].
    pub fn outer_flux(&self, psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nx = self.nx;
        let px = self.grad_x(psi);
        let py = self.grad_y(psi);
        let mut sx = px.clone();
        let mut sy = py.clone();
        for j in 0..self.ny {
            for i in 0..nx {
                let c = j * nx + i;
                sx[c] *= self.rc[j];
                sy[c] *= self.rf[j];
            }
        }
        let ox_cross = self.cdiff_x_adj_face(&self.avg_y_t(&sy));
        let oy_cross = self.cdiff_y_adj_face(&self.avg_x_t(&sx));
        let ox = px.iter().zip(&ox_cross).map(|(a, b)| a - b).collect();
        let oy = py.iter().zip(&oy_cross).map(|(a, b)| a + b).collect();
        (ox, oy)
    }

    /// Transpose of [`Self::elliptic`].
    pub fn elliptic_t(&self, psi: &[f64]) -> Vec<f64> {
        let (ox, oy) = self.outer_flux(psi);
        self.div(&ox, &oy)
    }

    /// −Δ_h = GᵀG with zero wall flux.
    pub fn neg_laplacian(&self, t: &[f64]) -> Vec<f64> {
        let gx = self.grad_x(t);
        let gy = self.grad_y(t);
        self.div(&gx, &gy).into_iter().map(|v| -v).collect()
    }

    /// Σ over faces of gx·gx' + gy·gy' (no area weight).
    pub fn face_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let ax = self.grad_x(a);
        let ay = self.grad_y(a);
        let bx = self.grad_x(b);
        let by = self.grad_y(b);
        ax.iter().zip(&bx).map(|(p, q)| p * q).sum::<f64>()
            + ay.iter().zip(&by).map(|(p, q)| p * q).sum::<f64>()
    }
}
