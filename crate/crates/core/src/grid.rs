use std::fmt;

use crate::error::{Error, Result};

/// Treatment of the lateral boundary of M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LateralMode {
    /// Closed basin with oblique and zero-flux conditions on the side walls.
    Physical,
    /// Doubly periodic in x and y, used for analytic oracles.
    PeriodicTest,
}

impl fmt::Display for LateralMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LateralMode::Physical => write!(f, "physical"),
            LateralMode::PeriodicTest => write!(f, "periodic_test"),
        }
    }
}

/// Number of ghost layers on every face.
pub const GHOST: usize = 2;

/// Cell-centred discretization of Ω = (0,Lx)×(0,Ly)×(−h,0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub lateral: LateralMode,
}

impl Grid {
    pub fn new(
        nx: usize,
        ny: usize,
        nz: usize,
        lx: f64,
        ly: f64,
        h: f64,
        lateral: LateralMode,
    ) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if n < 4 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("at least 4 cells required, got {n}"),
                });
            }
        }
        for (name, l) in [("Lx", lx), ("Ly", ly), ("h", h)] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("extent must be > 0, got {l}"),
                });
            }
        }
        Ok(Grid {
            nx,
            ny,
            nz,
            lx,
            ly,
            h,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
            dz: h / nz as f64,
            lateral,
        })
    }

    /// Unit box with the given cell counts.
    pub fn unit(nx: usize, ny: usize, nz: usize, lateral: LateralMode) -> Result<Self> {
        Grid::new(nx, ny, nz, 1.0, 1.0, 1.0, lateral)
    }

    pub fn periodic(&self) -> bool {
        self.lateral == LateralMode::PeriodicTest
    }

    pub fn x(&self, i: isize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn y(&self, j: isize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }

    pub fn z(&self, k: isize) -> f64 {
        -self.h + (k as f64 + 0.5) * self.dz
    }

    /// y-coordinate of the face between rows j and j+1.
    pub fn y_face(&self, j: isize) -> f64 {
        (j as f64 + 1.0) * self.dy
    }

    /// z-coordinate of interface k (interface 0 is the bottom, nz the surface).
    pub fn z_interface(&self, k: usize) -> f64 {
        -self.h + k as f64 * self.dz
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn plane(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.h
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Linear index of an interior cell, x fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    pub fn plane_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{}x{} ({}) vs {}x{}x{} ({})",
                self.nx, self.ny, self.nz, self.lateral, other.nx, other.ny, other.nz, other.lateral
            )))
        }
    }

    /// Same box refined by an integer factor in every direction.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid::new(
            self.nx * factor,
            self.ny * factor,
            self.nz * factor,
            self.lx,
            self.ly,
            self.h,
            self.lateral,
        )
        .expect("refining a valid grid stays valid")
    }
}
