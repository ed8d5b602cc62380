//! MINRES for symmetric operators restricted to a linear subspace.
//!
//! The operator and the subspace are supplied as closures.  All inner
//! products are Frobenius inner products on frames, so a frame-valued
//! unknown is treated as one long vector.  The projector is applied to every
//! operator output, which keeps the Lanczos basis inside the subspace up to
//! roundoff and makes the method well defined for operators that are only
//! symmetric on the subspace itself.

use super::frame::Frame;
use crate::error::Result;
use crate::scalar::{real, Real};

/// Outcome of a projected MINRES solve.
#[derive(Debug, Clone)]
pub struct MinresOutcome<T> {
    /// Approximate solution, inside the subspace.
    pub solution: Frame<T>,
    /// Lanczos iterations performed.
    pub iterations: usize,
    /// Final residual estimate relative to the right-hand side norm.
    pub relative_residual: T,
    /// Whether the requested tolerance was reached.
    pub converged: bool,
}

/// Runs MINRES on `P A P x = P b` where `apply` evaluates `A` and `project`
/// evaluates the orthogonal projector `P` onto the subspace.
///
/// Stops when the residual estimate drops below `rel_tol` times the norm of
/// the projected right-hand side, or after `max_iter` iterations.  A
/// breakdown of the Lanczos recurrence (exhausted Krylov space) terminates
/// early with the current iterate.
pub fn minres_projected<T, A, P>(
    mut apply: A,
    project: P,
    rhs: &Frame<T>,
    rel_tol: T,
    max_iter: usize,
) -> Result<MinresOutcome<T>>
where
    T: Real,
    A: FnMut(&Frame<T>) -> Result<Frame<T>>,
    P: Fn(&Frame<T>) -> Frame<T>,
{
    let b = project(rhs);
    let beta1 = b.norm_fro();
    let mut x = Frame::zeros(rhs.n_rows(), rhs.n_cols());
    if beta1 == T::zero() {
        return Ok(MinresOutcome {
            solution: x,
            iterations: 0,
            relative_residual: T::zero(),
            converged: true,
        });
    }
    let tiny = T::eps() * real::<T>(16.0);

    let mut v = b.scaled(T::one() / beta1);
    let mut v_old = Frame::zeros(rhs.n_rows(), rhs.n_cols());
    let mut w_prev = Frame::zeros(rhs.n_rows(), rhs.n_cols());
    let mut w_prev2 = Frame::zeros(rhs.n_rows(), rhs.n_cols());
    let mut gamma = beta1; // subdiagonal entry entering the current step
    let mut eta = beta1;
    let (mut c_prev2, mut c_prev) = (T::one(), T::one());
    let (mut s_prev2, mut s_prev) = (T::zero(), T::zero());
    let mut res = beta1;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let mut z = project(&apply(&v)?);
        let delta = z.dot(&v);
        z.axpy(-delta, &v);
        z.axpy(-gamma, &v_old);
        let gamma_next = z.norm_fro();

        let alpha0 = c_prev * delta - c_prev2 * s_prev * gamma;
        let alpha1 = (alpha0 * alpha0 + gamma_next * gamma_next).sqrt();
        let alpha2 = s_prev * delta + c_prev2 * c_prev * gamma;
        let alpha3 = s_prev2 * gamma;
        let c = alpha0 / alpha1;
        let s = gamma_next / alpha1;

        // w = (v - alpha3 w_prev2 - alpha2 w_prev) / alpha1
        let mut w = v.clone();
        w.axpy(-alpha3, &w_prev2);
        w.axpy(-alpha2, &w_prev);
        w.scale_in_place(T::one() / alpha1);
        x.axpy(c * eta, &w);

        eta = -s * eta;
        res = res * s.abs();
        w_prev2 = w_prev;
        w_prev = w;
        c_prev2 = c_prev;
        c_prev = c;
        s_prev2 = s_prev;
        s_prev = s;

        if res <= rel_tol * beta1 {
            return Ok(MinresOutcome {
                solution: x,
                iterations,
                relative_residual: res / beta1,
                converged: true,
            });
        }
        if gamma_next <= tiny * beta1 {
            // Krylov space exhausted; the iterate is exact in the explored
            // subspace.
            return Ok(MinresOutcome {
                solution: x,
                iterations,
                relative_residual: res / beta1,
                converged: res <= rel_tol * beta1,
            });
        }
        v_old = v;
        v = z.scaled(T::one() / gamma_next);
        gamma = gamma_next;
    }

    Ok(MinresOutcome {
        solution: x,
        iterations,
        relative_residual: res / beta1,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::SparseMatrix;

    fn diag_apply(d: Vec<f64>) -> impl FnMut(&Frame<f64>) -> Result<Frame<f64>> {
        move |x: &Frame<f64>| {
            let mut y = x.clone();
            for j in 0..y.n_cols() {
                for (i, di) in d.iter().enumerate() {
                    y[(i, j)] *= di;
                }
            }
            Ok(y)
        }
    }

    #[test]
    fn identity_operator_converges_in_one_iteration() {
        let b = Frame::from_vec(vec![1.0, -2.0, 0.5]);
        let out = minres_projected(
            |x: &Frame<f64>| Ok(x.clone()),
            |x| x.clone(),
            &b,
            1e-12,
            10,
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert!(out.solution.sub(&b).norm_fro() < 1e-12);
    }

    #[test]
    fn indefinite_diagonal_system_is_solved() {
        let d = vec![-2.0, -1.0, 1.0, 2.0, 3.0, 4.0];
        let b = Frame::from_vec(vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let out = minres_projected(diag_apply(d.clone()), |x| x.clone(), &b, 1e-12, 50).unwrap();
        assert!(out.converged);
        for i in 0..6 {
            assert!((out.solution[(i, 0)] - 1.0 / d[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn projected_solve_stays_in_subspace() {
        // Subspace orthogonal to the all-ones vector.
        let n = 6;
        let ones = Frame::from_vec(vec![1.0; n]);
        let project = move |x: &Frame<f64>| {
            let mut y = x.clone();
            let c = y.dot(&ones) / (n as f64);
            y.axpy(-c, &ones);
            y
        };
        let a = SparseMatrix::from_triplets(
            n,
            n,
            &(0..n)
                .map(|i| (i, i, (i + 1) as f64))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let rhs = Frame::from_vec(vec![2.0, -1.0, 0.5, 3.0, -2.0, 1.0]);
        let apply = |x: &Frame<f64>| a.spmv(x);
        let out = minres_projected(apply, project, &rhs, 1e-12, 100).unwrap();
        assert!(out.converged);
        // Solution lies in the subspace.
        let mut sum = 0.0;
        for i in 0..n {
            sum += out.solution[(i, 0)];
        }
        assert!(sum.abs() < 1e-10, "component along ones: {:e}", sum);
        // Projected residual vanishes.
        let ones2 = Frame::from_vec(vec![1.0; n]);
        let project2 = |x: &Frame<f64>| {
            let mut y = x.clone();
            let c = y.dot(&ones2) / (n as f64);
            y.axpy(-c, &ones2);
            y
        };
        let r = project2(&a.spmv(&out.solution).unwrap().sub(&rhs));
        let scale = project2(&rhs).norm_fro();
        assert!(r.norm_fro() < 1e-10 * scale, "residual {:e}", r.norm_fro());
    }

    #[test]
    fn zero_right_hand_side_returns_zero() {
        let b = Frame::zeros(4, 1);
        let out = minres_projected(
            |x: &Frame<f64>| Ok(x.clone()),
            |x| x.clone(),
            &b,
            1e-12,
            10,
        )
        .unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
        assert_eq!(out.solution.norm_fro(), 0.0);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let d: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let b = Frame::from_vec(vec![1.0; 40]);
        let out = minres_projected(diag_apply(d), |x| x.clone(), &b, 1e-14, 3).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        assert!(out.relative_residual > 0.0);
    }
}
