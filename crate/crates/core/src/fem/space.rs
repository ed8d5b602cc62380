//! Tensor-product Lagrange elements with eliminated Dirichlet boundary.

use super::mesh::CartesianMesh;
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::linalg::Frame;
use crate::scalar::{real, Real};

/// Value of the 1D Lagrange shape function `a` of the given order at `xi` on
/// the reference interval `[-1, 1]`.
pub fn shape_1d<T: Real>(order: usize, a: usize, xi: T) -> T {
    let half: T = real(0.5);
    match (order, a) {
        (1, 0) => half * (T::one() - xi),
        (1, 1) => half * (T::one() + xi),
        (2, 0) => half * xi * (xi - T::one()),
        (2, 1) => T::one() - xi * xi,
        (2, 2) => half * xi * (xi + T::one()),
        _ => unreachable!("order {order} node {a}"),
    }
}

/// Reference derivative of [`shape_1d`].
pub fn shape_1d_deriv<T: Real>(order: usize, a: usize, xi: T) -> T {
    let half: T = real(0.5);
    match (order, a) {
        (1, 0) => -half,
        (1, 1) => half,
        (2, 0) => xi - half,
        (2, 1) => -(xi + xi),
        (2, 2) => xi + half,
        _ => unreachable!("order {order} node {a}"),
    }
}

/// Continuous piecewise polynomial space of order 1 (bilinear) or 2
/// (biquadratic) on a Cartesian mesh, with homogeneous Dirichlet boundary
/// values eliminated.
///
/// Interior nodes are numbered lexicographically, `x` fastest.  Quadrature
/// uses the tensorized Gauss-Legendre rule with enough points per direction
/// for the quartic density integrand: 3 points for order 1, 5 for order 2.
#[derive(Debug, Clone)]
pub struct FeSpace<T> {
    mesh: CartesianMesh<T>,
    order: usize,
    quad_nodes: Vec<T>,
    quad_weights: Vec<T>,
    /// `shape_vals[q][a]`, cached at the quadrature nodes.
    shape_vals: Vec<Vec<T>>,
    shape_ders: Vec<Vec<T>>,
}

impl<T: Real> FeSpace<T> {
    pub fn new(mesh: CartesianMesh<T>, order: usize) -> Result<Self> {
        if order != 1 && order != 2 {
            return Err(Error::param(format!(
                "element order must be 1 or 2, got {order}"
            )));
        }
        // Exact for per-direction degree 2g-1 >= 4*order (the density-squared
        // integrand); order+2 points would fall short for order 2.
        let g = (order + 2).max(2 * order + 1);
        let (quad_nodes, quad_weights) = gauss_legendre::<T>(g);
        let shape_vals = quad_nodes
            .iter()
            .map(|&xi| (0..=order).map(|a| shape_1d(order, a, xi)).collect())
            .collect();
        let shape_ders = quad_nodes
            .iter()
            .map(|&xi| (0..=order).map(|a| shape_1d_deriv(order, a, xi)).collect())
            .collect();
        Ok(FeSpace {
            mesh,
            order,
            quad_nodes,
            quad_weights,
            shape_vals,
            shape_ders,
        })
    }

    pub fn mesh(&self) -> &CartesianMesh<T> {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Gauss points per direction.
    pub fn quad_points_1d(&self) -> usize {
        self.quad_nodes.len()
    }

    pub(super) fn quad_data(&self) -> (&[T], &[T], &[Vec<T>], &[Vec<T>]) {
        (
            &self.quad_nodes,
            &self.quad_weights,
            &self.shape_vals,
            &self.shape_ders,
        )
    }

    /// Interior nodes per direction.
    pub fn interior_per_dim(&self) -> usize {
        self.order * self.mesh.cells() - 1
    }

    pub fn n_dofs(&self) -> usize {
        let w = self.interior_per_dim();
        w * w
    }

    /// Node spacing `h / order`.
    pub fn node_spacing(&self) -> T {
        self.mesh.h() / real(self.order as f64)
    }

    /// Interior dof index of grid node `(nx, ny)`, or `None` on the boundary.
    pub fn dof_of_node(&self, nx: usize, ny: usize) -> Option<usize> {
        let w = self.interior_per_dim();
        let last = self.order * self.mesh.cells();
        if nx == 0 || ny == 0 || nx == last || ny == last {
            None
        } else {
            Some((ny - 1) * w + (nx - 1))
        }
    }

    /// Dof of local node `(a, b)` of element `(ex, ey)`.
    pub fn element_dof(&self, ex: usize, ey: usize, a: usize, b: usize) -> Option<usize> {
        self.dof_of_node(ex * self.order + a, ey * self.order + b)
    }

    /// Coordinates of every interior dof, in dof order.
    pub fn dof_coords(&self) -> Vec<(T, T)> {
        let w = self.interior_per_dim();
        let hn = self.node_spacing();
        let l = self.mesh.half_width();
        let mut coords = Vec::with_capacity(w * w);
        for ny in 1..=w {
            for nx in 1..=w {
                coords.push((
                    -l + real::<T>(nx as f64) * hn,
                    -l + real::<T>(ny as f64) * hn,
                ));
            }
        }
        coords
    }

    /// Nodal interpolant of `f`, restricted to interior dofs.
    pub fn interpolate(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        self.dof_coords().iter().map(|&(x, y)| f(x, y)).collect()
    }

    /// Total quadrature points: elements times points per element.
    pub fn n_quad_total(&self) -> usize {
        let g = self.quad_nodes.len();
        self.mesh.n_elements() * g * g
    }

    /// Flat index of quadrature point `(qx, qy)` in element `(ex, ey)`.
    ///
    /// Elements run lexicographically (`ex` fastest), then points within the
    /// element (`qx` fastest).
    pub fn quad_index(&self, ex: usize, ey: usize, qx: usize, qy: usize) -> usize {
        let g = self.quad_nodes.len();
        let cells = self.mesh.cells();
        ((ey * cells + ex) * g + qy) * g + qx
    }

    /// Physical coordinates of all quadrature points, in flat order.
    pub fn quadrature_coords(&self) -> Vec<(T, T)> {
        let g = self.quad_nodes.len();
        let cells = self.mesh.cells();
        let h = self.mesh.h();
        let half: T = real(0.5);
        let mut coords = vec![(T::zero(), T::zero()); self.n_quad_total()];
        for ey in 0..cells {
            for ex in 0..cells {
                let (x0, y0) = self.mesh.element_origin(ex, ey);
                for qy in 0..g {
                    let y = y0 + (self.quad_nodes[qy] + T::one()) * half * h;
                    for qx in 0..g {
                        let x = x0 + (self.quad_nodes[qx] + T::one()) * half * h;
                        coords[self.quad_index(ex, ey, qx, qy)] = (x, y);
                    }
                }
            }
        }
        coords
    }

    /// Values of the FE functions in `frame` at every quadrature point.
    ///
    /// Returns a frame with `n_quad_total` rows, one column per input column.
    pub fn eval_at_quadrature(&self, frame: &Frame<T>) -> Result<Frame<T>> {
        if frame.n_rows() != self.n_dofs() {
            return Err(Error::dim(format!(
                "frame has {} rows, space has {} dofs",
                frame.n_rows(),
                self.n_dofs()
            )));
        }
        let g = self.quad_nodes.len();
        let cells = self.mesh.cells();
        let nodes = self.order + 1;
        let p = frame.n_cols();
        let mut out = Frame::zeros(self.n_quad_total(), p);
        let mut local = vec![T::zero(); nodes * nodes];
        for col in 0..p {
            let coeffs = frame.col(col);
            for ey in 0..cells {
                for ex in 0..cells {
                    for b in 0..nodes {
                        for a in 0..nodes {
                            local[b * nodes + a] = self
                                .element_dof(ex, ey, a, b)
                                .map_or(T::zero(), |d| coeffs[d]);
                        }
                    }
                    for qy in 0..g {
                        for qx in 0..g {
                            let mut v = T::zero();
                            for b in 0..nodes {
                                let ny = self.shape_vals[qy][b];
                                for a in 0..nodes {
                                    v += local[b * nodes + a] * self.shape_vals[qx][a] * ny;
                                }
                            }
                            out.col_mut(col)[self.quad_index(ex, ey, qx, qy)] = v;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Quadrature approximation of the integral of a function given by its
    /// values at all quadrature points.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        if values.len() != self.n_quad_total() {
            return Err(Error::dim(format!(
                "integrand has {} values, rule has {} points",
                values.len(),
                self.n_quad_total()
            )));
        }
        let g = self.quad_nodes.len();
        let cells = self.mesh.cells();
        let half: T = real(0.5);
        let jac = (half * self.mesh.h()) * (half * self.mesh.h());
        let mut total = T::zero();
        for ey in 0..cells {
            for ex in 0..cells {
                for qy in 0..g {
                    for qx in 0..g {
                        total += self.quad_weights[qx]
                            * self.quad_weights[qy]
                            * values[self.quad_index(ex, ey, qx, qy)];
                    }
                }
            }
        }
        Ok(total * jac)
    }

    /// Point value of the FE function with the given interior coefficients.
    pub fn eval_at_point(&self, coeffs: &[T], x: T, y: T) -> Result<T> {
        if coeffs.len() != self.n_dofs() {
            return Err(Error::dim(format!(
                "coefficient vector has {} entries, space has {} dofs",
                coeffs.len(),
                self.n_dofs()
            )));
        }
        let l = self.mesh.half_width();
        if x.abs() > l || y.abs() > l {
            return Ok(T::zero());
        }
        let (ex, ey) = self.mesh.element_of(x, y);
        let (x0, y0) = self.mesh.element_origin(ex, ey);
        let two: T = real(2.0);
        let xi = two * (x - x0) / self.mesh.h() - T::one();
        let eta = two * (y - y0) / self.mesh.h() - T::one();
        let mut v = T::zero();
        for b in 0..=self.order {
            let nb = shape_1d(self.order, b, eta);
            for a in 0..=self.order {
                if let Some(d) = self.element_dof(ex, ey, a, b) {
                    v += coeffs[d] * shape_1d(self.order, a, xi) * nb;
                }
            }
        }
        Ok(v)
    }

    /// Nodal interpolation of FE functions from another (typically coarser)
    /// space on the same domain into this one.
    pub fn interpolate_from(&self, source: &FeSpace<T>, frame: &Frame<T>) -> Result<Frame<T>> {
        let source_half = source.mesh().half_width();
        if (source_half - self.mesh.half_width()).abs()
            > real::<T>(1e-12) * self.mesh.half_width()
        {
            return Err(Error::param(
                "interpolation requires spaces on the same domain".to_string(),
            ));
        }
        let coords = self.dof_coords();
        let mut out = Frame::zeros(self.n_dofs(), frame.n_cols());
        for col in 0..frame.n_cols() {
            let src = frame.col(col);
            let dst = out.col_mut(col);
            for (i, &(x, y)) in coords.iter().enumerate() {
                dst[i] = source.eval_at_point(src, x, y)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(l: f64, cells: usize, order: usize) -> FeSpace<f64> {
        FeSpace::new(CartesianMesh::new(l, cells).unwrap(), order).unwrap()
    }

    #[test]
    fn dof_counts_match_small_cases() {
        assert_eq!(space(0.5, 2, 1).n_dofs(), 1);
        assert_eq!(space(0.5, 2, 2).n_dofs(), 9);
        assert_eq!(space(8.0, 32, 2).n_dofs(), 3969);
    }

    #[test]
    fn quadrature_order_covers_the_quartic_term() {
        assert_eq!(space(1.0, 2, 1).quad_points_1d(), 3);
        assert_eq!(space(1.0, 2, 2).quad_points_1d(), 5);
    }

    #[test]
    fn shapes_form_a_partition_of_unity() {
        for order in [1usize, 2] {
            let s = space(1.0, 2, order);
            for q in 0..s.quad_points_1d() {
                let total: f64 = s.shape_vals[q].iter().sum();
                assert!((total - 1.0).abs() <= 1e-14);
                let dtotal: f64 = s.shape_ders[q].iter().sum();
                assert!(dtotal.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn dof_numbering_is_lexicographic() {
        let s = space(1.0, 4, 1);
        assert_eq!(s.dof_of_node(0, 1), None);
        assert_eq!(s.dof_of_node(1, 1), Some(0));
        assert_eq!(s.dof_of_node(2, 1), Some(1));
        assert_eq!(s.dof_of_node(1, 2), Some(3));
        let coords = s.dof_coords();
        assert!((coords[0].0 + 0.5).abs() <= 1e-15);
        assert!((coords[0].1 + 0.5).abs() <= 1e-15);
        assert!((coords[1].0 - 0.0).abs() <= 1e-15);
    }

    #[test]
    fn constant_one_integrates_to_the_domain_area() {
        for order in [1usize, 2] {
            let s = space(2.0, 4, order);
            let ones = vec![1.0; s.n_quad_total()];
            let area = s.integrate(&ones).unwrap();
            assert!((area - 16.0).abs() <= 1e-12, "order {order}: {area}");
        }
    }

    #[test]
    fn biquadratic_interpolant_is_reproduced_exactly() {
        // (1 - x^2)(1 - y^2) vanishes on the boundary of (-1,1)^2 and lies in
        // the order-2 space, so interpolation and evaluation are exact.
        let s = space(1.0, 4, 2);
        let f = |x: f64, y: f64| (1.0 - x * x) * (1.0 - y * y);
        let coeffs = s.interpolate(f);
        let vals = s
            .eval_at_quadrature(&Frame::from_vec(coeffs.clone()))
            .unwrap();
        for (v, &(x, y)) in vals.col(0).iter().zip(s.quadrature_coords().iter()) {
            assert!((v - f(x, y)).abs() <= 1e-13);
        }
        // Integral of the square: (16/15)^2.
        let sq: Vec<f64> = vals.col(0).iter().map(|&v| v * v).collect();
        let want = (16.0 / 15.0f64).powi(2);
        assert!((s.integrate(&sq).unwrap() - want).abs() <= 1e-12);
        // Point evaluation away from nodes.
        assert!((s.eval_at_point(&coeffs, 0.3, -0.77).unwrap() - f(0.3, -0.77)).abs() <= 1e-13);
    }

    #[test]
    fn coarse_to_fine_interpolation_is_exact_for_nested_polynomials() {
        let coarse = space(1.0, 4, 2);
        let fine = space(1.0, 16, 2);
        let f = |x: f64, y: f64| (1.0 - x * x) * (1.0 - y * y);
        let frame = Frame::from_vec(coarse.interpolate(f));
        let lifted = fine.interpolate_from(&coarse, &frame).unwrap();
        let direct = fine.interpolate(f);
        for (got, want) in lifted.col(0).iter().zip(direct.iter()) {
            assert!((got - want).abs() <= 1e-13);
        }
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = space(1.0, 4, 1);
        let b = space(2.0, 4, 1);
        let frame = Frame::zeros(a.n_dofs(), 1);
        assert!(b.interpolate_from(&a, &frame).is_err());
    }
}
