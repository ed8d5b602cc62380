//! Finite-difference reference derivatives along retraction curves.
//!
//! These are deliberately independent of the analytic operator plumbing:
//! they only evaluate energies, so they can arbitrate whether gradients and
//! Hessian applications are implemented correctly.

use super::GroundStateProblem;
use crate::error::Result;
use crate::linalg::Frame;
use crate::manifold::{retract_polar, retract_qr, ManifoldPoint};
use crate::scalar::{real, Real};

/// First derivative at zero by central differences with two Richardson
/// sweeps, `O(t0^6)` accurate for smooth integrands.
pub fn first_derivative<T: Real>(f: impl Fn(T) -> Result<T>, t0: T) -> Result<T> {
    let half: T = real(0.5);
    let central = |t: T| -> Result<T> { Ok((f(t)? - f(-t)?) / (t + t)) };
    let d1 = central(t0)?;
    let d2 = central(t0 * half)?;
    let d3 = central(t0 * half * half)?;
    let four: T = real(4.0);
    let r1 = (four * d2 - d1) / real(3.0);
    let r2 = (four * d3 - d2) / real(3.0);
    Ok((real::<T>(16.0) * r2 - r1) / real(15.0))
}

/// Second derivative at zero from symmetric second differences, with the
/// same extrapolation.
pub fn second_derivative<T: Real>(f: impl Fn(T) -> Result<T>, t0: T) -> Result<T> {
    let half: T = real(0.5);
    let f0 = f(T::zero())?;
    let diff = |t: T| -> Result<T> { Ok((f(t)? - f0 - f0 + f(-t)?) / (t * t)) };
    let s1 = diff(t0)?;
    let s2 = diff(t0 * half)?;
    let s3 = diff(t0 * half * half)?;
    let four: T = real(4.0);
    let r1 = (four * s2 - s1) / real(3.0);
    let r2 = (four * s3 - s2) / real(3.0);
    Ok((real::<T>(16.0) * r2 - r1) / real(15.0))
}

fn base_step<T: Real>(point: &ManifoldPoint<T>, direction: &Frame<T>) -> T {
    real::<T>(1e-2) / (T::one() + point.metric().norm(direction))
}

/// `d/dt E(R_qr(t eta))` at `t = 0`, the directional derivative along a
/// tangent direction.
pub fn energy_derivative_along<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    point: &ManifoldPoint<T>,
    direction: &Frame<T>,
) -> Result<T> {
    first_derivative(
        |t| problem.energy(&retract_qr(point, &direction.scaled(t))?),
        base_step(point, direction),
    )
}

/// `d^2/dt^2 E(R_polar(t eta))` at `t = 0`.
///
/// The polar retraction is second order with acceleration in the normal
/// space, so for feasible base points this second difference converges to
/// the Hessian quadratic form of the constrained energy, without curvature
/// contamination from the retraction itself.
pub fn energy_second_derivative_along<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    point: &ManifoldPoint<T>,
    direction: &Frame<T>,
) -> Result<T> {
    second_derivative(
        |t| problem.energy(&retract_polar(point, &direction.scaled(t))?),
        base_step(point, direction),
    )
}
