//! Assembly of stiffness and (weighted) mass matrices.

use super::space::FeSpace;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::{real, Real};

/// 1D element integrals on an element of width `h`: mass `int N_a N_b` and
/// stiffness `int N_a' N_b'` in physical coordinates.
fn element_matrices_1d<T: Real>(space: &FeSpace<T>) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let (_, weights, vals, ders) = space.quad_data();
    let nodes = space.order() + 1;
    let h = space.mesh().h();
    let half: T = real(0.5);
    let mut mass = vec![vec![T::zero(); nodes]; nodes];
    let mut stiff = vec![vec![T::zero(); nodes]; nodes];
    for (q, &w) in weights.iter().enumerate() {
        for a in 0..nodes {
            for b in 0..nodes {
                mass[a][b] += w * vals[q][a] * vals[q][b] * half * h;
                stiff[a][b] += w * ders[q][a] * ders[q][b] * real::<T>(2.0) / h;
            }
        }
    }
    (mass, stiff)
}

/// Scatters one local matrix into the triplet list, skipping boundary nodes.
fn scatter<T: Real>(
    space: &FeSpace<T>,
    ex: usize,
    ey: usize,
    local: &[T],
    triplets: &mut Vec<(usize, usize, T)>,
) {
    let nodes = space.order() + 1;
    for b in 0..nodes {
        for a in 0..nodes {
            let Some(row) = space.element_dof(ex, ey, a, b) else {
                continue;
            };
            for bb in 0..nodes {
                for aa in 0..nodes {
                    let Some(col) = space.element_dof(ex, ey, aa, bb) else {
                        continue;
                    };
                    let v = local[(b * nodes + a) * nodes * nodes + bb * nodes + aa];
                    if v != T::zero() {
                        triplets.push((row, col, v));
                    }
                }
            }
        }
    }
}

/// Stiffness matrix `int grad phi_i . grad phi_j` on interior dofs.
pub fn assemble_stiffness<T: Real>(space: &FeSpace<T>) -> SparseMatrix<T> {
    let (mass_1d, stiff_1d) = element_matrices_1d(space);
    let nodes = space.order() + 1;
    let nn = nodes * nodes;
    let mut local = vec![T::zero(); nn * nn];
    for b in 0..nodes {
        for a in 0..nodes {
            for bb in 0..nodes {
                for aa in 0..nodes {
                    local[(b * nodes + a) * nn + bb * nodes + aa] =
                        stiff_1d[a][aa] * mass_1d[b][bb] + mass_1d[a][aa] * stiff_1d[b][bb];
                }
            }
        }
    }
    let cells = space.mesh().cells();
    let mut triplets = Vec::with_capacity(cells * cells * nn * nn);
    for ey in 0..cells {
        for ex in 0..cells {
            scatter(space, ex, ey, &local, &mut triplets);
        }
    }
    let n = space.n_dofs();
    SparseMatrix::from_triplets(n, n, &triplets)
        .expect("assembly indices are in range")
        .into_symmetric(real(1e-12))
        .expect("element matrices are symmetric")
}

/// Mass matrix `int w phi_i phi_j` on interior dofs.
///
/// `weight` holds values at all quadrature points in the flat ordering of
/// [`FeSpace::quad_index`]; `None` assembles the plain mass matrix.
pub fn assemble_mass<T: Real>(
    space: &FeSpace<T>,
    weight: Option<&[T]>,
) -> Result<SparseMatrix<T>> {
    let nodes = space.order() + 1;
    let nn = nodes * nodes;
    let cells = space.mesh().cells();
    let n = space.n_dofs();
    let mut triplets = Vec::with_capacity(cells * cells * nn * nn);
    match weight {
        None => {
            let (mass_1d, _) = element_matrices_1d(space);
            let mut local = vec![T::zero(); nn * nn];
            for b in 0..nodes {
                for a in 0..nodes {
                    for bb in 0..nodes {
                        for aa in 0..nodes {
                            local[(b * nodes + a) * nn + bb * nodes + aa] =
                                mass_1d[a][aa] * mass_1d[b][bb];
                        }
                    }
                }
            }
            for ey in 0..cells {
                for ex in 0..cells {
                    scatter(space, ex, ey, &local, &mut triplets);
                }
            }
        }
        Some(values) => {
            if values.len() != space.n_quad_total() {
                return Err(Error::dim(format!(
                    "weight has {} values, rule has {} points",
                    values.len(),
                    space.n_quad_total()
                )));
            }
            let (_, weights, vals, _) = space.quad_data();
            let g = weights.len();
            let half: T = real(0.5);
            let jac = (half * space.mesh().h()) * (half * space.mesh().h());
            let mut local = vec![T::zero(); nn * nn];
            for ey in 0..cells {
                for ex in 0..cells {
                    local.iter_mut().for_each(|v| *v = T::zero());
                    for qy in 0..g {
                        for qx in 0..g {
                            let scale = weights[qx]
                                * weights[qy]
                                * values[space.quad_index(ex, ey, qx, qy)]
                                * jac;
                            if scale == T::zero() {
                                continue;
                            }
                            for b in 0..nodes {
                                for a in 0..nodes {
                                    let left = vals[qx][a] * vals[qy][b] * scale;
                                    let row = (b * nodes + a) * nn;
                                    for bb in 0..nodes {
                                        for aa in 0..nodes {
                                            local[row + bb * nodes + aa] +=
                                                left * vals[qx][aa] * vals[qy][bb];
                                        }
                                    }
                                }
                            }
                        }
                    }
                    scatter(space, ex, ey, &local, &mut triplets);
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
        .expect("assembly indices are in range")
        .into_symmetric(real(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::CartesianMesh;
    use crate::linalg::{smallest_eigenpairs, EigsConfig, Frame};

    fn space(l: f64, cells: usize, order: usize) -> FeSpace<f64> {
        FeSpace::new(CartesianMesh::new(l, cells).unwrap(), order).unwrap()
    }

    #[test]
    fn bilinear_mass_matches_tensor_products_of_hand_values() {
        // 1D rows for linear elements: diagonal 2h/3, neighbors h/6.
        let s = space(1.0, 4, 1);
        let h: f64 = 0.5;
        let m = assemble_mass(&s, None).unwrap();
        let center = s.dof_of_node(2, 2).unwrap();
        let right = s.dof_of_node(3, 2).unwrap();
        let diag_nb = s.dof_of_node(3, 3).unwrap();
        let d = 2.0 * h / 3.0;
        let o = h / 6.0;
        assert!((m.value_at(center, center) - d * d).abs() <= 1e-14);
        assert!((m.value_at(center, right) - o * d).abs() <= 1e-14);
        assert!((m.value_at(center, diag_nb) - o * o).abs() <= 1e-14);
    }

    #[test]
    fn bilinear_stiffness_reproduces_the_classic_stencil() {
        // Tensorized linear elements give diagonal 8/3, all neighbors -1/3,
        // independently of h.
        let s = space(1.0, 4, 1);
        let k = assemble_stiffness(&s);
        let center = s.dof_of_node(2, 2).unwrap();
        let right = s.dof_of_node(3, 2).unwrap();
        let diag_nb = s.dof_of_node(3, 3).unwrap();
        assert!((k.value_at(center, center) - 8.0 / 3.0).abs() <= 1e-13);
        assert!((k.value_at(center, right) + 1.0 / 3.0).abs() <= 1e-13);
        assert!((k.value_at(center, diag_nb) + 1.0 / 3.0).abs() <= 1e-13);
    }

    #[test]
    fn unit_weight_reproduces_the_plain_mass_matrix() {
        let s = space(1.5, 4, 2);
        let plain = assemble_mass(&s, None).unwrap();
        let ones = vec![1.0; s.n_quad_total()];
        let weighted = assemble_mass(&s, Some(&ones)).unwrap();
        let diff = weighted.add_scaled(&plain, -1.0).unwrap();
        assert!(diff.max_abs() <= 1e-13);
    }

    #[test]
    fn weighted_quadratic_form_matches_an_analytic_integral() {
        // f = (1-x^2)(1-y^2) interpolated exactly by order 2; weight
        // (x^2+y^2)/2.  int w f^2 = 256/1575 on (-1,1)^2, and the integrand
        // degree stays within the rule's exactness.
        let s = space(1.0, 4, 2);
        let f = |x: f64, y: f64| (1.0 - x * x) * (1.0 - y * y);
        let coeffs = Frame::from_vec(s.interpolate(f));
        let weight: Vec<f64> = s
            .quadrature_coords()
            .iter()
            .map(|&(x, y)| 0.5 * (x * x + y * y))
            .collect();
        let mw = assemble_mass(&s, Some(&weight)).unwrap();
        let form = coeffs.dot(&mw.spmv(&coeffs).unwrap());
        assert!((form - 256.0 / 1575.0).abs() <= 1e-13);
    }

    #[test]
    fn smallest_pencil_eigenvalue_matches_the_discrete_formula() {
        // On the unit square the tensor structure separates, so the first
        // eigenvalue is twice the 1D value (6/h^2)(1-cos pi h)/(2+cos pi h).
        let s = space(0.5, 8, 1);
        let k = assemble_stiffness(&s);
        let m = assemble_mass(&s, None).unwrap();
        let pairs = smallest_eigenpairs(&k, &m, 1, &EigsConfig::default()).unwrap();
        let h: f64 = 1.0 / 8.0;
        let lam_1d =
            6.0 / (h * h) * (1.0 - (std::f64::consts::PI * h).cos())
                / (2.0 + (std::f64::consts::PI * h).cos());
        let want = 2.0 * lam_1d;
        assert!(
            (pairs.values[0] - want).abs() <= 1e-9 * want,
            "got {}, want {want}",
            pairs.values[0]
        );
    }

    #[test]
    fn biquadratic_eigenvalue_error_decays_at_fourth_order() {
        let exact = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        let mut errors = Vec::new();
        for cells in [4usize, 8] {
            let s = space(0.5, cells, 2);
            let k = assemble_stiffness(&s);
            let m = assemble_mass(&s, None).unwrap();
            let pairs = smallest_eigenpairs(&k, &m, 1, &EigsConfig::default()).unwrap();
            errors.push((pairs.values[0] - exact).abs());
        }
        let ratio = errors[0] / errors[1];
        assert!(
            (10.0..26.0).contains(&ratio),
            "error ratio {ratio} not near 16"
        );
    }
}
