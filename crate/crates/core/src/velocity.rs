//! Diagnostic velocity and pressure from the temperature field.

use crate::diffusion::fill_ghosts;
use crate::error::Result;
use crate::field::{ScalarField2, ScalarField3, VelocityField};
use crate::grid::Grid;
use crate::params::PhysParams;

/// Centred horizontal gradient at cell centres using the first ghost layer.
pub fn horizontal_gradient(t: &ScalarField3) -> Result<(Vec<f64>, Vec<f64>)> {
    t.require_ghosts()?;
    let g = t.grid();
    let mut gx = vec![0.0; g.cells()];
    let mut gy = vec![0.0; g.cells()];
    for k in 0..g.nz as isize {
        for j in 0..g.ny as isize {
            for i in 0..g.nx as isize {
                let c = g.index(i as usize, j as usize, k as usize);
                gx[c] = (t.at(i + 1, j, k) - t.at(i - 1, j, k)) / (2.0 * g.dx);
                gy[c] = (t.at(i, j + 1, k) - t.at(i, j - 1, k)) / (2.0 * g.dy);
            }
        }
    }
    Ok((gx, gy))
}

/// Centred gradient of a surface field, with the same lateral ghosts as a
/// depth-independent 3-D field.
pub fn surface_gradient(s: &ScalarField2, params: &PhysParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = *s.grid();
    let flat = Grid { nz: 4, dz: g.h / 4.0, ..g };
    let col = ScalarField2::from_values(&flat, s.values().to_vec())?.extend_in_depth();
    let surface_params = PhysParams { alpha: 0.0, ..*params };
    let (gx, gy) = horizontal_gradient(&fill_ghosts(&col, &surface_params))?;
    let p = g.plane();
    Ok((gx[..p].to_vec(), gy[..p].to_vec()))
}

/// γ(εT_x + fT_y, −fT_x + εT_y) at one cell.
#[inline]
fn shear(params: &PhysParams, y: f64, tx: f64, ty: f64) -> (f64, f64) {
    let f = params.coriolis_at(y);
    let gam = params.gamma_at(y);
    let e = params.epsilon;
    (gam * (e * tx + f * ty), gam * (-f * tx + e * ty))
}

/// Horizontal velocity: the depth integral from the bottom of the thermal-wind
/// shear of T̃, the (z + h/2)-weighted shear of T*, minus the column mean.
pub fn diagnose_v(
    ttilde: &ScalarField3,
    tstar: &ScalarField2,
    params: &PhysParams,
) -> Result<VelocityField> {
    let g = *ttilde.grid();
    let (tx, ty) = horizontal_gradient(ttilde)?;
    let (sx, sy) = surface_gradient(tstar, params)?;
    let p = g.plane();
    let mut vel = VelocityField::zeros(&g);
    for j in 0..g.ny {
        let y = g.y(j as isize);
        for i in 0..g.nx {
            let pi = g.plane_index(i, j);
            let (s1, s2) = shear(params, y, sx[pi], sy[pi]);
            let mut acc = (0.0, 0.0);
            let mut mean = (0.0, 0.0);
            for k in 0..g.nz {
                let c = k * p + pi;
                let (a1, a2) = shear(params, y, tx[c], ty[c]);
                let zc = g.z(k as isize) + 0.5 * g.h;
                let v1 = acc.0 + 0.5 * a1 * g.dz + zc * s1;
                let v2 = acc.1 + 0.5 * a2 * g.dz + zc * s2;
                acc.0 += a1 * g.dz;
                acc.1 += a2 * g.dz;
                vel.v1[c] = v1;
                vel.v2[c] = v2;
                mean.0 += v1;
                mean.1 += v2;
            }
            mean.0 /= g.nz as f64;
            mean.1 /= g.nz as f64;
            for k in 0..g.nz {
                vel.v1[k * p + pi] -= mean.0;
                vel.v2[k * p + pi] -= mean.1;
            }
        }
    }
    Ok(vel)
}

/// w on z-interfaces from −Σ (∇·v) dz accumulated upward from w(−h) = 0.
pub fn diagnose_w(vel: &VelocityField) -> VelocityField {
    let g = *vel.grid();
    let p = g.plane();
    let div = vel.horizontal_divergence();
    let mut out = vel.clone();
    out.w = vec![0.0; p * (g.nz + 1)];
    for k in 0..g.nz {
        for c in 0..p {
            out.w[(k + 1) * p + c] = out.w[k * p + c] - div[k * p + c] * g.dz;
        }
    }
    out
}

/// Full diagnostic velocity (v, w).
pub fn diagnose(ttilde: &ScalarField3, tstar: &ScalarField2, params: &PhysParams) -> Result<VelocityField> {
    Ok(diagnose_w(&diagnose_v(ttilde, tstar, params)?))
}

/// p = −∫_{−h}^{z} (T̃ + T*) dz′ plus the function of (x, y) that makes every
/// column mean zero.
pub fn reconstruct_pressure(
    ttilde: &ScalarField3,
    tstar: &ScalarField2,
) -> Result<ScalarField3> {
    let g = *ttilde.grid();
    ttilde.grid().check_same(tstar.grid()).or_else(|_| {
        if g.nx == tstar.grid().nx && g.ny == tstar.grid().ny {
            Ok(())
        } else {
            Err(crate::error::Error::GridMismatch("T* plane differs from T grid".into()))
        }
    })?;
    let mut p = ScalarField3::zeros(&g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let s = tstar.get(i, j);
            let mut acc = 0.0;
            let mut col = Vec::with_capacity(g.nz);
            for k in 0..g.nz {
                let t = ttilde.get(i, j, k) + s;
                col.push(-(acc + 0.5 * t * g.dz));
                acc += t * g.dz;
            }
            let mean = col.iter().sum::<f64>() / g.nz as f64;
            for (k, v) in col.into_iter().enumerate() {
                p.set(i, j, k, v - mean);
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LateralMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(g: &Grid, seed: u64, p: &PhysParams) -> ScalarField3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<f64> = (0..g.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        fill_ghosts(&ScalarField3::from_interior(g, &d).unwrap(), p)
    }

    #[test]
    fn trivial_cases() {
        let g = Grid::unit(8, 8, 6, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let zero = fill_ghosts(&ScalarField3::zeros(&g), &p);
        let v = diagnose(&zero, &ScalarField2::zeros(&g), &p).unwrap();
        assert_eq!(v.max_speed(), 0.0);
        let tz = fill_ghosts(&ScalarField3::from_fn(&g, |_, _, z| z.exp()), &p);
        let c = ScalarField2::from_fn(&g, |_, _| 0.4);
        let v = diagnose(&tz, &c, &p).unwrap();
        assert!(v.max_speed() < 1e-13);
    }

    #[test]
    fn structure_on_random_state() {
        let g = Grid::unit(12, 10, 8, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let t = random(&g, 1, &p);
        let s = ScalarField2::from_fn(&g, |_, y| (std::f64::consts::PI * y).cos());
        let v = diagnose(&t, &s, &p).unwrap();
        let vmax = v.max_speed();
        let plane = g.plane();
        for c in 0..plane {
            let m1: f64 = (0..g.nz).map(|k| v.v1[k * plane + c]).sum::<f64>() / g.nz as f64;
            let m2: f64 = (0..g.nz).map(|k| v.v2[k * plane + c]).sum::<f64>() / g.nz as f64;
            assert!(m1.abs().max(m2.abs()) <= 1e-12 * vmax);
            assert_eq!(v.w[c], 0.0);
            assert!(v.w[g.nz * plane + c].abs() <= 1e-12 * vmax);
        }
        let res = v.continuity_residual();
        assert!(res.iter().all(|r| r.abs() <= 1e-12 * vmax / g.dx));
    }

    #[test]
    fn w_of_divergence_free_flow_vanishes() {
        let g = Grid::unit(8, 8, 4, LateralMode::PeriodicTest).unwrap();
        let mut v = VelocityField::zeros(&g);
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    v.v1[g.index(i, j, k)] = (2.0 * std::f64::consts::PI * g.y(j as isize)).sin();
                }
            }
        }
        let w = diagnose_w(&v);
        assert!(w.w.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn pressure_examples() {
        let g = Grid::unit(6, 6, 10, LateralMode::Physical).unwrap();
        let one = ScalarField3::constant(&g, 1.0);
        let p = reconstruct_pressure(&one, &ScalarField2::zeros(&g)).unwrap();
        for k in 0..g.nz {
            assert!((p.get(2, 3, k) + g.z(k as isize) + 0.5).abs() < 1e-14);
        }
        let z = reconstruct_pressure(&ScalarField3::zeros(&g), &ScalarField2::zeros(&g)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn frictional_geostrophic_balance() {
        let g = Grid::unit(16, 14, 8, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let t = random(&g, 4, &p);
        let s = ScalarField2::from_fn(&g, |x, y| (x * y).sin());
        let v = diagnose(&t, &s, &p).unwrap();
        let pr = reconstruct_pressure(&t, &s).unwrap();
        let mut worst = 0.0f64;
        for k in 0..g.nz {
            for j in 1..g.ny - 1 {
                let f = p.coriolis_at(g.y(j as isize));
                for i in 1..g.nx - 1 {
                    let px = (pr.get(i + 1, j, k) - pr.get(i - 1, j, k)) / (2.0 * g.dx);
                    let py = (pr.get(i, j + 1, k) - pr.get(i, j - 1, k)) / (2.0 * g.dy);
                    let c = g.index(i, j, k);
                    let r1 = px - f * v.v2[c] + p.epsilon * v.v1[c];
                    let r2 = py + f * v.v1[c] + p.epsilon * v.v2[c];
                    worst = worst.max(r1.abs()).max(r2.abs());
                }
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    /// Gaussian bump with its gradient and Laplacian.
    fn bump(x: f64, y: f64, a: f64, b: f64, s: f64) -> (f64, f64, f64, f64) {
        let (dx, dy) = (x - a, y - b);
        let v = (-(dx * dx + dy * dy) / s).exp();
        let lap = (4.0 * (dx * dx + dy * dy) / (s * s) - 4.0 / s) * v;
        (v, -2.0 * dx / s * v, -2.0 * dy / s * v, lap)
    }

    /// ∇·G(T) for a field with the given gradient and Laplacian.
    fn div_shear(p: &PhysParams, y: f64, tx: f64, ty: f64, lap: f64) -> f64 {
        let f = p.coriolis_at(y);
        let gam = p.gamma_at(y);
        gam * (p.epsilon * lap - p.beta * tx) - 2.0 * p.beta * f * gam * gam * (-f * tx + p.epsilon * ty)
    }

    fn w_error(n: usize) -> f64 {
        let g = Grid::unit(n, n, 8, LateralMode::Physical).unwrap();
        let p = PhysParams::default();
        let t = fill_ghosts(
            &ScalarField3::from_fn(&g, |x, y, z| bump(x, y, 0.5, 0.48, 0.02).0 * (z + 1.0)),
            &p,
        );
        let s = ScalarField2::from_fn(&g, |x, y| bump(x, y, 0.48, 0.52, 0.025).0);
        let vel = diagnose(&t, &s, &p).unwrap();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in n / 8..7 * n / 8 {
            let y = g.y(j as isize);
            for i in n / 8..7 * n / 8 {
                let x = g.x(i as isize);
                let (_, bx, by, bl) = bump(x, y, 0.5, 0.48, 0.02);
                let (_, cx, cy, cl) = bump(x, y, 0.48, 0.52, 0.025);
                let db = div_shear(&p, y, bx, by, bl);
                let dc = div_shear(&p, y, cx, cy, cl);
                for k in 0..=g.nz {
                    let z = g.z_interface(k);
                    let zp = z + 1.0;
                    let exact = db * (-zp.powi(3) / 6.0 + zp / 6.0) - z * zp / 2.0 * dc;
                    worst = worst.max((vel.w_at(i, j, k) - exact).abs());
                    scale = scale.max(exact.abs());
                }
            }
        }
        worst / scale
    }

    #[test]
    fn w_matches_double_integral_formula() {
        let (e1, e2) = (w_error(48), w_error(96));
        assert!(e2 < 2e-2, "relative error {e2}");
        assert!((e1 / e2).log2() > 1.8, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn vertical_shear_is_thermal_wind() {
        let err = |n: usize| {
            let g = Grid::unit(n, n, n / 4, LateralMode::Physical).unwrap();
            let p = PhysParams::default();
            let t = fill_ghosts(
                &ScalarField3::from_fn(&g, |x, y, z| bump(x, y, 0.5, 0.5, 0.02).0 * (2.0 * z).sin()),
                &p,
            );
            let s = ScalarField2::from_fn(&g, |x, y| bump(x, y, 0.4, 0.6, 0.03).0);
            let vel = diagnose(&t, &s, &p).unwrap();
            let mut worst = 0.0f64;
            for k in 0..g.nz - 1 {
                let z = g.z_interface(k + 1);
                for j in n / 4..3 * n / 4 {
                    let y = g.y(j as isize);
                    let f = p.coriolis_at(y);
                    let gam = p.gamma_at(y);
                    for i in n / 4..3 * n / 4 {
                        let x = g.x(i as isize);
                        let (_, bx, by, _) = bump(x, y, 0.5, 0.5, 0.02);
                        let (_, cx, cy, _) = bump(x, y, 0.4, 0.6, 0.03);
                        let tx = bx * (2.0 * z).sin() + cx;
                        let ty = by * (2.0 * z).sin() + cy;
                        let c0 = g.index(i, j, k);
                        let c1 = g.index(i, j, k + 1);
                        let d1 = (vel.v1[c1] - vel.v1[c0]) / g.dz;
                        let d2 = (vel.v2[c1] - vel.v2[c0]) / g.dz;
                        worst = worst
                            .max((d1 - gam * (p.epsilon * tx + f * ty)).abs())
                            .max((d2 - gam * (-f * tx + p.epsilon * ty)).abs());
                    }
                }
            }
            worst
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 1.8, "order {order}");
    }
}
