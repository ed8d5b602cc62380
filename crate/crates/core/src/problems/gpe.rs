//! Gross-Pitaevskii energy on a 2D FEM space.
//!
//! `E(Phi) = 1/2 tr(Phi^T K Phi) + tr(Phi^T M_theta Phi) + 1/2 int G(rho)`
//! with the FE density `rho = sum_l |phi_l|^2` evaluated at quadrature
//! points.  The frozen operator is `A(Phi) = K + 2 M_theta + M_{G'(rho)}`;
//! its density derivative contributes the blocks
//! `B_{lm} = 2 M_{G''(rho) phi_l phi_m}`.

use super::nonlinearity::{CubicNonlinearity, NonlinearityModel};
use super::{FrozenOperator, GroundStateProblem};
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness, FeSpace, Potential, PotentialField};
use crate::linalg::{DenseMatrix, Frame, SparseMatrix};
use crate::manifold::{ManifoldPoint, Metric};
use crate::scalar::{real, Real};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub struct GpeProblem<T> {
    space: FeSpace<T>,
    stiffness: SparseMatrix<T>,
    m_theta: Option<SparseMatrix<T>>,
    theta_quad: Option<Vec<T>>,
    model: Box<dyn NonlinearityModel<T>>,
    metric: Arc<Metric<T>>,
    states: usize,
    counter: Arc<AtomicU64>,
}

impl<T: Real> GpeProblem<T> {
    pub fn new(
        space: FeSpace<T>,
        potential: &Potential<T>,
        model: Box<dyn NonlinearityModel<T>>,
        states: usize,
    ) -> Result<Self> {
        if states == 0 || states > space.n_dofs() {
            return Err(Error::param(format!(
                "cannot seek {states} states in a space of {} dofs",
                space.n_dofs()
            )));
        }
        let metric = Arc::new(Metric::new(assemble_mass(&space, None)?)?);
        let stiffness = assemble_stiffness(&space);
        let field = PotentialField::new(potential, space.mesh())?;
        let (theta_quad, m_theta) = if field.is_zero() {
            (None, None)
        } else {
            let values: Vec<T> = space
                .quadrature_coords()
                .iter()
                .map(|&(x, y)| field.value_at(x, y))
                .collect();
            let matrix = assemble_mass(&space, Some(&values))?;
            (Some(values), Some(matrix))
        };
        Ok(GpeProblem {
            space,
            stiffness,
            m_theta,
            theta_quad,
            model,
            metric,
            states,
            counter: Arc::new(AtomicU64::new(0)),
        })
    }

    /// The cubic model with repulsion strength `kappa`.
    pub fn cubic(
        space: FeSpace<T>,
        potential: &Potential<T>,
        kappa: T,
        states: usize,
    ) -> Result<Self> {
        Self::new(
            space,
            potential,
            Box::new(CubicNonlinearity::new(kappa)),
            states,
        )
    }

    pub fn space(&self) -> &FeSpace<T> {
        &self.space
    }

    pub fn stiffness(&self) -> &SparseMatrix<T> {
        &self.stiffness
    }

    fn check_point(&self, point: &ManifoldPoint<T>) -> Result<()> {
        if point.dofs() != self.space.n_dofs() || point.states() != self.states {
            return Err(Error::dim(format!(
                "point is {}x{}, problem wants {}x{}",
                point.dofs(),
                point.states(),
                self.space.n_dofs(),
                self.states
            )));
        }
        Ok(())
    }

    /// Density at all quadrature points for the given frame values there.
    fn density_from_values(values: &Frame<T>) -> Vec<T> {
        let mut rho = vec![T::zero(); values.n_rows()];
        for l in 0..values.n_cols() {
            for (r, &v) in rho.iter_mut().zip(values.col(l).iter()) {
                *r += v * v;
            }
        }
        rho
    }

    /// `A(rho) = K + 2 M_theta + M_{G'(rho)}` for a given quadrature density.
    fn operator_from_density(&self, rho: &[T]) -> Result<SparseMatrix<T>> {
        if rho.len() != self.space.n_quad_total() {
            return Err(Error::dim(format!(
                "density has {} values, rule has {} points",
                rho.len(),
                self.space.n_quad_total()
            )));
        }
        let two: T = real(2.0);
        let mut weight: Vec<T> = rho.iter().map(|&r| self.model.potential(r)).collect();
        if let Some(theta) = &self.theta_quad {
            for (w, &t) in weight.iter_mut().zip(theta.iter()) {
                *w += two * t;
            }
        }
        let shifted = assemble_mass(&self.space, Some(&weight))?;
        self.stiffness.add_scaled(&shifted, T::one())
    }
}

impl<T: Real> GroundStateProblem<T> for GpeProblem<T> {
    type Frozen = GpeOperator<T>;

    fn name(&self) -> &'static str {
        "gpe"
    }

    fn dofs(&self) -> usize {
        self.space.n_dofs()
    }

    fn states(&self) -> usize {
        self.states
    }

    fn metric(&self) -> &Arc<Metric<T>> {
        &self.metric
    }

    fn energy(&self, point: &ManifoldPoint<T>) -> Result<T> {
        self.check_point(point)?;
        let frame = point.frame();
        let half: T = real(0.5);
        let mut e = half * frame.dot(&self.stiffness.spmv(frame)?);
        if let Some(m_theta) = &self.m_theta {
            e += frame.dot(&m_theta.spmv(frame)?);
        }
        let values = self.space.eval_at_quadrature(frame)?;
        let rho = Self::density_from_values(&values);
        let interaction: Vec<T> = rho.iter().map(|&r| self.model.interaction(r)).collect();
        e += half * self.space.integrate(&interaction)?;
        Ok(e)
    }

    fn linearize(&self, point: &ManifoldPoint<T>) -> Result<GpeOperator<T>> {
        self.check_point(point)?;
        let values = self.space.eval_at_quadrature(point.frame())?;
        let rho = Self::density_from_values(&values);
        let a = self.operator_from_density(&rho)?;
        let two: T = real(2.0);
        let curvature: Vec<T> = rho.iter().map(|&r| self.model.curvature(r)).collect();
        let p = self.states;
        let mut b_blocks = Vec::with_capacity(p * (p + 1) / 2);
        let mut weight = vec![T::zero(); rho.len()];
        for l in 0..p {
            for m in 0..=l {
                for (q, w) in weight.iter_mut().enumerate() {
                    *w = two * curvature[q] * values.col(l)[q] * values.col(m)[q];
                }
                b_blocks.push(assemble_mass(&self.space, Some(&weight))?);
            }
        }
        Ok(GpeOperator {
            a,
            b_blocks,
            states: p,
            counter: self.counter.clone(),
        })
    }

    fn density(&self, point: &ManifoldPoint<T>) -> Result<Vec<T>> {
        self.check_point(point)?;
        let values = self.space.eval_at_quadrature(point.frame())?;
        Ok(Self::density_from_values(&values))
    }

    fn mean_field(&self, density: &[T]) -> Result<SparseMatrix<T>> {
        self.operator_from_density(density)
    }

    /// Nodal interpolants of tensor monomials `x^a y^b`, ordered by the
    /// larger exponent: `1, x, y, xy, x^2, y^2, x^2 y, x y^2, x^2 y^2, ...`.
    fn guess_frame(&self) -> Result<Frame<T>> {
        let n = self.space.n_dofs();
        let mut frame = Frame::zeros(n, self.states);
        let mut exponents = Vec::with_capacity(self.states);
        let mut degree = 0i32;
        while exponents.len() < self.states {
            for a in 0..degree {
                exponents.push((degree, a));
                if exponents.len() >= self.states {
                    break;
                }
                exponents.push((a, degree));
                if exponents.len() >= self.states {
                    break;
                }
            }
            if exponents.len() < self.states {
                exponents.push((degree, degree));
            }
            degree += 1;
        }
        for (j, &(a, b)) in exponents.iter().enumerate() {
            let values = self.space.interpolate(|x, y| x.powi(a) * y.powi(b));
            frame.col_mut(j).copy_from_slice(&values);
        }
        Ok(frame)
    }

    fn operator_applies(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

/// Frozen Gross-Pitaevskii operator pair.
pub struct GpeOperator<T> {
    a: SparseMatrix<T>,
    /// Blocks `B_{lm}` for `l >= m`; the map is symmetric in `(l, m)`.
    b_blocks: Vec<SparseMatrix<T>>,
    states: usize,
    counter: Arc<AtomicU64>,
}

impl<T: Real> GpeOperator<T> {
    fn block(&self, l: usize, m: usize) -> &SparseMatrix<T> {
        let (hi, lo) = if l >= m { (l, m) } else { (m, l) };
        &self.b_blocks[hi * (hi + 1) / 2 + lo]
    }

    fn check_frame(&self, v: &Frame<T>) -> Result<()> {
        if v.n_rows() != self.a.n_rows() || v.n_cols() != self.states {
            return Err(Error::dim(format!(
                "operator input is {}x{}, expected {}x{}",
                v.n_rows(),
                v.n_cols(),
                self.a.n_rows(),
                self.states
            )));
        }
        Ok(())
    }
}

impl<T: Real> FrozenOperator<T> for GpeOperator<T> {
    fn apply_a(&self, v: &Frame<T>) -> Result<Frame<T>> {
        self.counter.fetch_add(1, Ordering::Relaxed);
        self.a.spmv(v)
    }

    fn apply_b(&self, v: &Frame<T>) -> Result<Frame<T>> {
        self.check_frame(v)?;
        self.counter.fetch_add(1, Ordering::Relaxed);
        let mut out = Frame::zeros(v.n_rows(), v.n_cols());
        for l in 0..self.states {
            for j in 0..self.states {
                let contrib = self.block(l, j).spmv_vec(v.col(j))?;
                for (o, &c) in out.col_mut(l).iter_mut().zip(contrib.iter()) {
                    *o += c;
                }
            }
        }
        Ok(out)
    }

    fn a_matrix(&self) -> &SparseMatrix<T> {
        &self.a
    }

    fn dense_operator(&self) -> Result<DenseMatrix<T>> {
        let n = self.a.n_rows();
        let np = n * self.states;
        if np > 5000 {
            return Err(Error::param(format!(
                "dense operator of dimension {np} refused"
            )));
        }
        let a_dense = self.a.to_dense();
        let mut out = DenseMatrix::zeros(np, np);
        for l in 0..self.states {
            for j in 0..self.states {
                let b_dense = self.block(l, j).to_dense();
                for i in 0..n {
                    for k in 0..n {
                        let mut v = b_dense[(i, k)];
                        if l == j {
                            v += a_dense[(i, k)];
                        }
                        out[(l * n + i, j * n + k)] = v;
                    }
                }
            }
        }
        Ok(out)
    }
}
