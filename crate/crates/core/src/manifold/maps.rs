//! Retractions, the quotient exponential, and the subspace distance.

use super::{outer, HorizontalVector, ManifoldPoint};
use crate::error::{Error, Result};
use crate::linalg::{m_orthonormalize, DenseMatrix, Frame};
use crate::scalar::{real, Real};

/// First-order retraction by `M`-orthonormalization of `Phi + eta`.
///
/// The triangular factor of the underlying qR decomposition has a positive
/// diagonal, which makes the map single-valued and smooth near `eta = 0`.
pub fn retract_qr<T: Real>(
    base: &ManifoldPoint<T>,
    step: &Frame<T>,
) -> Result<ManifoldPoint<T>> {
    let mut y = base.frame().add(step);
    m_orthonormalize(&mut y, base.metric().matrix())?;
    ManifoldPoint::new(y, base.metric().clone())
}

/// Second-order retraction `Y <<Y, Y>>^{-1/2}` with `Y = Phi + eta`.
///
/// Along tangent curves `t -> R(t eta)` the second derivative at zero is
/// `-Phi <<eta, eta>>`, which is `M`-orthogonal to every tangent vector, so
/// second differences of smooth energies along these curves converge to the
/// Hessian quadratic form without curvature pollution.
pub fn retract_polar<T: Real>(
    base: &ManifoldPoint<T>,
    step: &Frame<T>,
) -> Result<ManifoldPoint<T>> {
    let y = base.frame().add(step);
    let gram = outer(&y, &y, base.metric().matrix())?;
    let inv_sqrt = gram.spd_inv_sqrt(real(1e-13))?;
    ManifoldPoint::new(y.mul_small(&inv_sqrt), base.metric().clone())
}

/// Exponential map of the Grassmann quotient along a horizontal direction.
///
/// From the thin decomposition `psi = U Sigma W^T` (singular values of the
/// `M`-Gram matrix `<<psi, psi>>`), the geodesic endpoint is
/// `Phi W cos(Sigma) + U sin(Sigma)`.  Vanishing singular values contribute
/// frozen columns, so rank-deficient directions are handled without branching.
pub fn grassmann_exp<T: Real>(
    base: &ManifoldPoint<T>,
    direction: &HorizontalVector<T>,
) -> Result<ManifoldPoint<T>> {
    let psi = direction.frame();
    let p = base.states();
    let gram = outer(psi, psi, base.metric().matrix())?;
    let (eigs, w) = gram.sym_eig()?;
    let scale = eigs.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let tol = scale.max(T::one()) * T::eps() * real(1e2);
    let mut sigma = vec![T::zero(); p];
    for (s, &v) in sigma.iter_mut().zip(eigs.iter()) {
        *s = v.max(T::zero()).sqrt();
    }
    // Columns of U = psi W Sigma^{-1} where sigma is meaningful, zero otherwise.
    let mut u = psi.mul_small(&w);
    for j in 0..p {
        let col = u.col_mut(j);
        if sigma[j] * sigma[j] > tol {
            for v in col.iter_mut() {
                *v /= sigma[j];
            }
        } else {
            sigma[j] = T::zero();
            col.fill(T::zero());
        }
    }
    let cos = DenseMatrix::from_fn(p, p, |i, j| {
        if i == j {
            sigma[i].cos()
        } else {
            T::zero()
        }
    });
    let mut endpoint = base.frame().mul_small(&w).mul_small(&cos);
    for j in 0..p {
        let s = sigma[j].sin();
        let u_col: Vec<T> = u.col(j).to_vec();
        for (dst, &uv) in endpoint.col_mut(j).iter_mut().zip(u_col.iter()) {
            *dst += s * uv;
        }
    }
    ManifoldPoint::new(endpoint, base.metric().clone())
}

/// Geodesic distance between the subspaces spanned by two points: the
/// Euclidean norm of the principal angles `acos` of the singular values of
/// `<<Phi_a, Phi_b>>`.
pub fn subspace_distance<T: Real>(a: &ManifoldPoint<T>, b: &ManifoldPoint<T>) -> Result<T> {
    if a.dofs() != b.dofs() || a.states() != b.states() {
        return Err(Error::dim(format!(
            "subspace distance between {}x{} and {}x{} frames",
            a.dofs(),
            a.states(),
            b.dofs(),
            b.states()
        )));
    }
    let s = a.outer_with(b.frame());
    let sts = s.transpose().matmul(&s);
    let (eigs, _) = sts.sym_eig()?;
    let mut sum = T::zero();
    for &v in &eigs {
        let cosine = v.max(T::zero()).sqrt().min(T::one());
        let angle = cosine.acos();
        sum += angle * angle;
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{project_horizontal, ManifoldPoint};
    use super::*;

    fn feasibility(point: &ManifoldPoint<f64>) -> f64 {
        let g = point.outer_with(point.frame());
        let mut sum = 0.0;
        for i in 0..point.states() {
            for j in 0..point.states() {
                let want = if i == j { 1.0 } else { 0.0 };
                sum += (g[(i, j)] - want).powi(2);
            }
        }
        sum.sqrt()
    }

    #[test]
    fn zero_step_is_identity_for_all_retractions() {
        let point = random_point(24, 3, 31);
        let zero = Frame::zeros(24, 3);
        for retracted in [
            retract_qr(&point, &zero).unwrap(),
            retract_polar(&point, &zero).unwrap(),
        ] {
            assert!(retracted.frame().sub(point.frame()).norm_fro() <= 1e-12);
        }
        let dir = HorizontalVector::new(&point, zero).unwrap();
        let exp = grassmann_exp(&point, &dir).unwrap();
        assert!(exp.frame().sub(point.frame()).norm_fro() <= 1e-12);
    }

    #[test]
    fn single_column_retractions_match_sphere_formulas() {
        let point = random_point(30, 1, 32);
        let eta = project_horizontal(&point, &random_frame(30, 1, 33)).into_frame();
        let m = point.metric();
        // qR with one column is plain normalization of phi + eta.
        let y = point.frame().add(&eta);
        let scale = 1.0 / m.norm(&y);
        let qr = retract_qr(&point, &eta).unwrap();
        assert!(qr.frame().sub(&y.scaled(scale)).norm_fro() <= 1e-12);
        // Polar agrees: <<y, y>>^{-1/2} is the same scalar.
        let polar = retract_polar(&point, &eta).unwrap();
        assert!(polar.frame().sub(&y.scaled(scale)).norm_fro() <= 1e-12);
        // The sphere geodesic: cos(s) phi + sin(s) eta / s with s = ||eta||_M.
        let s = m.norm(&eta);
        let dir = HorizontalVector::new(&point, eta.clone()).unwrap();
        let exp = grassmann_exp(&point, &dir).unwrap();
        let want = point.frame().scaled(s.cos()).add(&eta.scaled(s.sin() / s));
        assert!(exp.frame().sub(&want).norm_fro() <= 1e-12);
    }

    #[test]
    fn retraction_outputs_stay_feasible() {
        let point = random_point(24, 3, 34);
        let eta = super::super::project_tangent(&point, &random_frame(24, 3, 35)).into_frame();
        let psi = project_horizontal(&point, &random_frame(24, 3, 36)).into_frame();
        let dir = HorizontalVector::new(&point, psi).unwrap();
        for candidate in [
            retract_qr(&point, &eta).unwrap(),
            retract_polar(&point, &eta).unwrap(),
            grassmann_exp(&point, &dir).unwrap(),
        ] {
            assert!(feasibility(&candidate) <= 1e-12);
        }
    }

    #[test]
    fn retractions_are_first_order_along_tangents() {
        let point = random_point(24, 2, 37);
        let eta = super::super::project_tangent(&point, &random_frame(24, 2, 38)).into_frame();
        // ||R(t eta) - (Phi + t eta)|| = O(t^2): halving t divides the error
        // by about four.
        let mut previous = f64::NAN;
        for &t in &[1e-2, 5e-3, 2.5e-3] {
            let r = retract_qr(&point, &eta.scaled(t)).unwrap();
            let linear = point.frame().add(&eta.scaled(t));
            let err = r.frame().sub(&linear).norm_fro();
            if previous.is_finite() {
                assert!(err <= previous / 3.2, "qR error decays slower than t^2");
            }
            previous = err;
        }
    }

    #[test]
    fn polar_retraction_is_second_order() {
        let point = random_point(24, 2, 39);
        let eta = super::super::project_tangent(&point, &random_frame(24, 2, 40)).into_frame();
        let gram = outer(&eta, &eta, point.metric().matrix()).unwrap();
        // R(t eta) = Phi + t eta - t^2/2 Phi <<eta,eta>> + O(t^3).
        let correction = point.frame().mul_small(&gram);
        let mut previous = f64::NAN;
        for &t in &[1e-2, 5e-3, 2.5e-3] {
            let r = retract_polar(&point, &eta.scaled(t)).unwrap();
            let mut model = point.frame().add(&eta.scaled(t));
            model.axpy(-0.5 * t * t, &correction);
            let err = r.frame().sub(&model).norm_fro();
            if previous.is_finite() {
                assert!(err <= previous / 6.0, "polar error decays slower than t^3");
            }
            previous = err;
        }
    }

    #[test]
    fn exponential_endpoint_distance_matches_direction_norm() {
        let point = random_point(30, 2, 41);
        let psi = project_horizontal(&point, &random_frame(30, 2, 42))
            .into_frame()
            .scaled(0.05);
        let norm = point.metric().norm(&psi);
        let dir = HorizontalVector::new(&point, psi).unwrap();
        let end = grassmann_exp(&point, &dir).unwrap();
        // For small steps the geodesic distance equals the step length to
        // high order.
        let dist = subspace_distance(&point, &end).unwrap();
        assert!((dist - norm).abs() <= 1e-6 * norm);
    }

    #[test]
    fn subspace_distance_ignores_representative() {
        let point = random_point(24, 2, 43);
        let (c, s) = (0.28f64.cos(), 0.28f64.sin());
        let q = DenseMatrix::from_vec(2, 2, vec![c, -s, s, c]).unwrap();
        let rotated =
            ManifoldPoint::new(point.frame().mul_small(&q), point.metric().clone()).unwrap();
        assert!(subspace_distance(&point, &rotated).unwrap() <= 1e-7);
        let other = random_point(24, 2, 44);
        let d = subspace_distance(&point, &other).unwrap();
        assert!(d > 1e-3);
    }

    #[test]
    fn rank_deficient_exponential_freezes_null_columns() {
        let point = random_point(24, 2, 45);
        // Direction with a single nonzero column: the orthogonal complement
        // column of the frame must stay put (up to the mixing basis W).
        let mut psi = project_horizontal(&point, &random_frame(24, 2, 46)).into_frame();
        psi.col_mut(1).fill(0.0);
        let psi = project_horizontal(&point, &psi).into_frame();
        let dir = HorizontalVector::new(&point, psi).unwrap();
        let end = grassmann_exp(&point, &dir).unwrap();
        assert!(feasibility(&end) <= 1e-12);
    }
}
