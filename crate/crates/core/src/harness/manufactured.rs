//! Manufactured solution on the unit square: separable in time with factor
//! `g(t) = (6 + 4 cos 4t) / 10`, velocity vanishing on the boundary and
//! exactly divergence-free.

use std::f64::consts::PI;

use crate::{Point, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub nu: f64,
}

/// `y (1 - y) (1 - 2y)` and its first two derivatives.
fn a(y: f64) -> (f64, f64, f64) {
    (y - 3.0 * y * y + 2.0 * y.powi(3), 1.0 - 6.0 * y + 6.0 * y * y, -6.0 + 12.0 * y)
}

/// `(y (1 - y))^2`; its derivative is `2 a(y)`.
fn b(y: f64) -> f64 {
    (y * (1.0 - y)).powi(2)
}

impl ManufacturedSolution {
    pub fn new(nu: f64) -> Self {
        Self { nu }
    }

    pub fn time_factor(t: f64) -> f64 {
        (6.0 + 4.0 * (4.0 * t).cos()) / 10.0
    }

    pub fn time_factor_derivative(t: f64) -> f64 {
        -1.6 * (4.0 * t).sin()
    }

    /// Spatial profile `U` of the velocity.
    pub fn profile(p: &Point) -> Vector {
        let s = (PI * p.x).sin();
        Vector::new(16.0 * s * s * a(p.y).0, -8.0 * PI * (2.0 * PI * p.x).sin() * b(p.y))
    }

    /// Jacobian `[[dU1/dx, dU1/dy], [dU2/dx, dU2/dy]]` of the profile.
    pub fn profile_jacobian(p: &Point) -> [[f64; 2]; 2] {
        let (av, ad, _) = a(p.y);
        let s = (PI * p.x).sin();
        let s2 = (2.0 * PI * p.x).sin();
        let c2 = (2.0 * PI * p.x).cos();
        [[16.0 * PI * s2 * av, 16.0 * s * s * ad], [-16.0 * PI * PI * c2 * b(p.y), -16.0 * PI * s2 * av]]
    }

    pub fn profile_laplacian(p: &Point) -> Vector {
        let (av, ad, add) = a(p.y);
        let s = (PI * p.x).sin();
        let s2 = (2.0 * PI * p.x).sin();
        let c2 = (2.0 * PI * p.x).cos();
        Vector::new(
            32.0 * PI * PI * c2 * av + 16.0 * s * s * add,
            32.0 * PI.powi(3) * s2 * b(p.y) - 16.0 * PI * s2 * ad,
        )
    }

    /// `(U . grad) U`.
    pub fn profile_advection(p: &Point) -> Vector {
        let u = Self::profile(p);
        let j = Self::profile_jacobian(p);
        Vector::new(u.x * j[0][0] + u.y * j[0][1], u.x * j[1][0] + u.y * j[1][1])
    }

    /// Spatial profile `P` of the pressure.
    pub fn pressure_profile(p: &Point) -> f64 {
        (PI * p.x).sin() * (PI * p.y).cos()
    }

    pub fn pressure_gradient_profile(p: &Point) -> Vector {
        Vector::new(PI * (PI * p.x).cos() * (PI * p.y).cos(), -PI * (PI * p.x).sin() * (PI * p.y).sin())
    }

    pub fn velocity(&self, p: &Point, t: f64) -> Vector {
        Self::profile(p) * Self::time_factor(t)
    }

    pub fn pressure(&self, p: &Point, t: f64) -> f64 {
        Self::pressure_profile(p) * Self::time_factor(t)
    }

    /// `f = du/dt - nu lap u + (u . grad) u + grad p`.
    pub fn forcing(&self, p: &Point, t: f64) -> Vector {
        let g = Self::time_factor(t);
        Self::profile(p) * Self::time_factor_derivative(t) - Self::profile_laplacian(p) * (self.nu * g)
            + Self::profile_advection(p) * (g * g)
            + Self::pressure_gradient_profile(p) * g
    }

    /// `(u, p, f)` at `(p, t)`.
    pub fn eval(&self, p: &Point, t: f64) -> (Vector, f64, Vector) {
        (self.velocity(p, t), self.pressure(p, t), self.forcing(p, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let m = ManufacturedSolution::new(1.0);
        let (u, p, _) = m.eval(&Point::new(0.5, 0.5), 0.0);
        assert!(u.norm() < 1e-15 && p.abs() < 1e-15);
        let (u, _, _) = m.eval(&Point::new(0.25, 0.25), 0.0);
        assert!((u.x - 0.75).abs() < 1e-14);
        assert!((u.y + 0.28125 * PI).abs() < 1e-14);
    }

    #[test]
    fn divergence_free_and_zero_on_boundary() {
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            for p in [Point::new(s, 0.0), Point::new(s, 1.0), Point::new(0.0, s), Point::new(1.0, s)] {
                assert!(ManufacturedSolution::profile(&p).norm() < 1e-14);
            }
            for j in 0..=10 {
                let jac = ManufacturedSolution::profile_jacobian(&Point::new(s, j as f64 / 10.0));
                assert!((jac[0][0] + jac[1][1]).abs() < 1e-12);
            }
        }
    }
}
