use crate::error::{Error, Result};

/// Dimensionless model coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Rayleigh drag.
    pub epsilon: f64,
    pub f0: f64,
    pub beta: f64,
    pub k_v: f64,
    pub k_h: f64,
    /// Hyper-diffusion coefficient.
    pub lambda: f64,
    /// Mixed horizontal-vertical diffusion coefficient.
    pub mu: f64,
    /// Surface relaxation coefficient.
    pub alpha: f64,
    pub h: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            epsilon: 0.1,
            f0: 1.0,
            beta: 1.0,
            k_v: 1e-2,
            k_h: 1e-2,
            lambda: 1e-4,
            mu: 1e-4,
            alpha: 0.1,
            h: 1.0,
        }
    }
}

impl PhysParams {
    /// Checks the positivity constraints. `lambda` is allowed to be zero so the
    /// second-order comparison model can be run through the same code path.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("K_v", self.k_v),
            ("K_h", self.k_h),
            ("mu", self.mu),
            ("h", self.h),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        let nonneg = [("lambda", self.lambda), ("alpha", self.alpha)];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        for (name, value) in [("f0", self.f0), ("beta", self.beta)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// Coriolis parameter on the β-plane.
    pub fn coriolis_at(&self, y: f64) -> f64 {
        self.f0 + self.beta * y
    }

    /// γ = (f² + ε²)⁻¹.
    pub fn gamma_at(&self, y: f64) -> f64 {
        let f = self.coriolis_at(y);
        1.0 / (f * f + self.epsilon * self.epsilon)
    }

    /// f/ε, the off-diagonal entry of H.
    pub fn rotation_ratio_at(&self, y: f64) -> f64 {
        self.coriolis_at(y) / self.epsilon
    }

    pub fn h_matrix(&self, y: f64) -> HMatrix {
        HMatrix::new(self.rotation_ratio_at(y))
    }
}

/// The 2×2 matrix [[1, −f/ε], [f/ε, 1]] at one latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMatrix {
    pub ratio: f64,
}

impl HMatrix {
    pub fn new(ratio: f64) -> Self {
        HMatrix { ratio }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[1.0, -self.ratio], [self.ratio, 1.0]]
    }

    pub fn transpose(&self) -> HMatrix {
        HMatrix { ratio: -self.ratio }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [v[0] - self.ratio * v[1], self.ratio * v[0] + v[1]]
    }

    /// H·Hᵀ, which equals (1 + f²/ε²)·I.
    pub fn times_transpose(&self) -> [[f64; 2]; 2] {
        let a = self.entries();
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * a[j][0] + a[i][1] * a[j][1];
            }
        }
        out
    }
}
