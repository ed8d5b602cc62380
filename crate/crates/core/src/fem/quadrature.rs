//! Gauss-Legendre rules on `[-1, 1]`, computed at construction time.

use crate::scalar::{real, Real};

/// Nodes and weights of the `g`-point Gauss-Legendre rule, exact for
/// polynomials of degree `2g - 1`.
///
/// Nodes are the roots of the Legendre polynomial `P_g`, found by Newton
/// iteration from the Chebyshev-like initial guess; weights follow from the
/// derivative values.  Nodes are returned in ascending order.
pub fn gauss_legendre<T: Real>(g: usize) -> (Vec<T>, Vec<T>) {
    assert!(g >= 1, "quadrature rule needs at least one point");
    let mut nodes = vec![T::zero(); g];
    let mut weights = vec![T::zero(); g];
    let gf: T = real(g as f64);
    for i in 0..g {
        // Guess for the i-th root in descending order.
        let angle = real::<T>(std::f64::consts::PI) * (real::<T>(i as f64) + real(0.75))
            / (gf + real(0.5));
        let mut x = angle.cos();
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(g, x);
            // P_g'(x) = g (x P_g - P_{g-1}) / (x^2 - 1).
            let dp = gf * (x * p - p_prev) / (x * x - T::one());
            let step = p / dp;
            x -= step;
            if step.abs() <= T::eps() * real(4.0) {
                break;
            }
        }
        let (_, p_prev) = legendre_pair(g, x);
        let dp = gf * (x * legendre_pair(g, x).0 - p_prev) / (x * x - T::one());
        nodes[g - 1 - i] = x;
        weights[g - 1 - i] = real::<T>(2.0) / ((T::one() - x * x) * dp * dp);
    }
    // The midpoint root of odd rules is exactly zero.
    if g % 2 == 1 {
        nodes[g / 2] = T::zero();
    }
    (nodes, weights)
}

/// `(P_g(x), P_{g-1}(x))` by the three-term recurrence.
fn legendre_pair<T: Real>(g: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    if g == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=g {
        let kf: T = real(k as f64);
        let next = ((real::<T>(2.0) * kf - T::one()) * x * p - (kf - T::one()) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}
