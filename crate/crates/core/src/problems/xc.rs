//! Exchange-only local density approximation.
//!
//! Energy per particle `e_x(rho) = -3/4 (3 rho / pi)^{1/3}`, with its first
//! two density derivatives.  The curvature is floored at a tiny density to
//! keep the linearized operator finite where the density vanishes.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

const DENSITY_FLOOR: f64 = 1e-12;

fn cbrt_scale<T: Real>() -> T {
    real((3.0 / std::f64::consts::PI).powf(1.0 / 3.0))
}

fn check_sign<T: Real>(rho: T) -> Result<()> {
    if rho < T::zero() {
        return Err(Error::param(format!("negative density {rho:?}")));
    }
    Ok(())
}

/// `e_x(rho)`.
pub fn xc_energy_density<T: Real>(rho: T) -> Result<T> {
    check_sign(rho)?;
    Ok(-real::<T>(0.75) * cbrt_scale::<T>() * rho.powf(real(1.0 / 3.0)))
}

/// `mu_x(rho) = d(rho e_x)/d rho = -(3 rho / pi)^{1/3}`.
pub fn xc_potential<T: Real>(rho: T) -> Result<T> {
    check_sign(rho)?;
    Ok(-cbrt_scale::<T>() * rho.powf(real(1.0 / 3.0)))
}

/// `d mu_x / d rho`, evaluated at `max(rho, 1e-12)`.
pub fn xc_potential_derivative<T: Real>(rho: T) -> Result<T> {
    check_sign(rho)?;
    let floored = rho.max(real(DENSITY_FLOOR));
    Ok(-cbrt_scale::<T>() / real::<T>(3.0) * floored.powf(real(-2.0 / 3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values_at_special_densities() {
        // rho = pi/3 makes the cube root equal one.
        let rho = std::f64::consts::PI / 3.0;
        assert!((xc_energy_density(rho).unwrap() + 0.75).abs() <= 1e-14);
        assert!((xc_potential(rho).unwrap() + 1.0).abs() <= 1e-14);
        assert_eq!(xc_energy_density(0.0f64).unwrap(), 0.0);
        assert_eq!(xc_potential(0.0f64).unwrap(), 0.0);
        assert!(xc_potential_derivative(0.0f64).unwrap().is_finite());
    }

    #[test]
    fn potential_is_the_derivative_of_the_energy_term() {
        let rho = 1.0f64;
        let t = 1e-6;
        let fd = ((rho + t) * xc_energy_density(rho + t).unwrap()
            - (rho - t) * xc_energy_density(rho - t).unwrap())
            / (2.0 * t);
        assert!((fd - xc_potential(rho).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn curvature_is_the_derivative_of_the_potential() {
        let rho = 0.37f64;
        let t = 1e-6;
        let fd = (xc_potential(rho + t).unwrap() - xc_potential(rho - t).unwrap()) / (2.0 * t);
        assert!((fd - xc_potential_derivative(rho).unwrap()).abs() <= 1e-7);
    }

    #[test]
    fn negative_densities_are_rejected() {
        assert!(xc_energy_density(-1e-9f64).is_err());
        assert!(xc_potential(-1.0f64).is_err());
        assert!(xc_potential_derivative(-0.5f64).is_err());
    }
}
