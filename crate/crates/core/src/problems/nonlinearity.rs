//! Mean-field nonlinearities entering the interaction energy `1/2 int G(rho)`.

use crate::scalar::{real, Real};

/// A smooth interaction density `G` with its first two derivatives.
///
/// The energy contribution is `1/2 int G(rho)`; `G'` enters the frozen
/// operator `A(Phi)` as a multiplicative potential and `G''` weights the
/// density-derivative term `B`.
pub trait NonlinearityModel<T>: Send + Sync {
    /// `G(rho)`.
    fn interaction(&self, rho: T) -> T;
    /// `G'(rho)`.
    fn potential(&self, rho: T) -> T;
    /// `G''(rho)`.
    fn curvature(&self, rho: T) -> T;
}

/// The defocusing cubic interaction `G(rho) = kappa rho^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct CubicNonlinearity<T> {
    kappa: T,
}

impl<T: Real> CubicNonlinearity<T> {
    pub fn new(kappa: T) -> Self {
        CubicNonlinearity { kappa }
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }
}

impl<T: Real> NonlinearityModel<T> for CubicNonlinearity<T> {
    fn interaction(&self, rho: T) -> T {
        self.kappa * rho * rho * real(0.5)
    }

    fn potential(&self, rho: T) -> T {
        self.kappa * rho
    }

    fn curvature(&self, _rho: T) -> T {
        self.kappa
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_are_consistent_by_finite_differences() {
        let model = CubicNonlinearity::new(7.5f64);
        let rho = 0.83;
        let t = 1e-6;
        let fd1 = (model.interaction(rho + t) - model.interaction(rho - t)) / (2.0 * t);
        assert!((fd1 - model.potential(rho)).abs() <= 1e-8);
        let fd2 = (model.potential(rho + t) - model.potential(rho - t)) / (2.0 * t);
        assert!((fd2 - model.curvature(rho)).abs() <= 1e-8);
    }
}
