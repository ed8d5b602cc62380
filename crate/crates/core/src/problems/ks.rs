//! A small Kohn-Sham model: finite differences on a 3D box, Gaussian ionic
//! wells, Hartree repulsion through the discrete Poisson operator, and
//! exchange-only LDA.
//!
//! On the grid the mass matrix is the identity, densities live at grid
//! points, and integrals carry the cell weight `w = hx hy hz`:
//! `E(Phi) = 1/2 tr(Phi^T (L + 2 D_ion) Phi) + w/2 rho^T L^{-1} rho
//!  + w sum_i rho_i e_x(rho_i)`.

use super::xc::{xc_energy_density, xc_potential, xc_potential_derivative};
use super::{FrozenOperator, GroundStateProblem};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Frame, SparseCholesky, SparseMatrix};
use crate::manifold::{ManifoldPoint, Metric};
use crate::scalar::{real, Real};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Uniform Dirichlet grid on the box `(-L, L)^3`.
#[derive(Debug, Clone)]
pub struct KsGrid<T> {
    half_width: T,
    dims: [usize; 3],
    spacing: [T; 3],
}

impl<T: Real> KsGrid<T> {
    /// `dims` counts interior points per direction.
    pub fn new(half_width: T, dims: [usize; 3]) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::param(format!(
                "grid half-width must be positive, got {half_width:?}"
            )));
        }
        if dims.iter().any(|&m| m < 2) {
            return Err(Error::param(format!(
                "grid needs at least 2 interior points per direction, got {dims:?}"
            )));
        }
        let spacing = [
            real::<T>(2.0) * half_width / real(dims[0] as f64 + 1.0),
            real::<T>(2.0) * half_width / real(dims[1] as f64 + 1.0),
            real::<T>(2.0) * half_width / real(dims[2] as f64 + 1.0),
        ];
        Ok(KsGrid {
            half_width,
            dims,
            spacing,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn n_points(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Volume of one grid cell.
    pub fn cell_weight(&self) -> T {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.dims[1] + iy) * self.dims[0] + ix
    }

    pub fn coords(&self, idx: usize) -> [T; 3] {
        let ix = idx % self.dims[0];
        let iy = (idx / self.dims[0]) % self.dims[1];
        let iz = idx / (self.dims[0] * self.dims[1]);
        [
            -self.half_width + real::<T>(ix as f64 + 1.0) * self.spacing[0],
            -self.half_width + real::<T>(iy as f64 + 1.0) * self.spacing[1],
            -self.half_width + real::<T>(iz as f64 + 1.0) * self.spacing[2],
        ]
    }

    /// Seven-point Dirichlet Laplacian.
    pub fn laplacian(&self) -> SparseMatrix<T> {
        let n = self.n_points();
        let [mx, my, mz] = self.dims;
        let inv2 = [
            T::one() / (self.spacing[0] * self.spacing[0]),
            T::one() / (self.spacing[1] * self.spacing[1]),
            T::one() / (self.spacing[2] * self.spacing[2]),
        ];
        let diag = real::<T>(2.0) * (inv2[0] + inv2[1] + inv2[2]);
        let mut triplets = Vec::with_capacity(7 * n);
        for iz in 0..mz {
            for iy in 0..my {
                for ix in 0..mx {
                    let row = self.index(ix, iy, iz);
                    triplets.push((row, row, diag));
                    if ix > 0 {
                        triplets.push((row, self.index(ix - 1, iy, iz), -inv2[0]));
                    }
                    if ix + 1 < mx {
                        triplets.push((row, self.index(ix + 1, iy, iz), -inv2[0]));
                    }
                    if iy > 0 {
                        triplets.push((row, self.index(ix, iy - 1, iz), -inv2[1]));
                    }
                    if iy + 1 < my {
                        triplets.push((row, self.index(ix, iy + 1, iz), -inv2[1]));
                    }
                    if iz > 0 {
                        triplets.push((row, self.index(ix, iy, iz - 1), -inv2[2]));
                    }
                    if iz + 1 < mz {
                        triplets.push((row, self.index(ix, iy, iz + 1), -inv2[2]));
                    }
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &triplets)
            .expect("laplacian indices are in range")
            .into_symmetric(real(1e-14))
            .expect("stencil is symmetric")
    }
}

/// A Gaussian ionic well.
#[derive(Debug, Clone)]
pub struct KsAtom<T> {
    pub center: [T; 3],
    pub depth: T,
    pub width: T,
}

impl<T: Real> KsAtom<T> {
    fn potential_at(&self, x: &[T; 3]) -> T {
        let mut r2 = T::zero();
        for d in 0..3 {
            let delta = x[d] - self.center[d];
            r2 += delta * delta;
        }
        -self.depth * (-r2 / (real::<T>(2.0) * self.width * self.width)).exp()
    }
}

pub struct KsProblem<T> {
    grid: KsGrid<T>,
    laplacian: SparseMatrix<T>,
    /// `L + 2 D_ion`.
    base: SparseMatrix<T>,
    poisson: Arc<SparseCholesky<T>>,
    metric: Arc<Metric<T>>,
    states: usize,
    counter: Arc<AtomicU64>,
}

impl<T: Real> KsProblem<T> {
    pub fn new(grid: KsGrid<T>, atoms: &[KsAtom<T>], states: usize) -> Result<Self> {
        let n = grid.n_points();
        if states == 0 || states > n {
            return Err(Error::param(format!(
                "cannot seek {states} states on a grid of {n} points"
            )));
        }
        for atom in atoms {
            if !(atom.width > T::zero()) || atom.depth < T::zero() {
                return Err(Error::param(
                    "ionic wells need positive width and nonnegative depth",
                ));
            }
        }
        let laplacian = grid.laplacian();
        let ion: Vec<T> = (0..n)
            .map(|i| {
                let x = grid.coords(i);
                atoms.iter().map(|a| a.potential_at(&x)).sum()
            })
            .collect();
        let base = laplacian.add_scaled(&SparseMatrix::from_diagonal(&ion), real(2.0))?;
        let poisson = Arc::new(SparseCholesky::factor(&laplacian)?);
        let metric = Arc::new(Metric::new(SparseMatrix::identity(n))?);
        Ok(KsProblem {
            grid,
            laplacian,
            base,
            poisson,
            metric,
            states,
            counter: Arc::new(AtomicU64::new(0)),
        })
    }

    pub fn grid(&self) -> &KsGrid<T> {
        &self.grid
    }

    pub fn laplacian(&self) -> &SparseMatrix<T> {
        &self.laplacian
    }

    /// Solves the discrete Poisson problem `L v = rho`.
    pub fn hartree_potential(&self, rho: &[T]) -> Result<Vec<T>> {
        if rho.len() != self.grid.n_points() {
            return Err(Error::dim(format!(
                "density has {} entries, grid has {} points",
                rho.len(),
                self.grid.n_points()
            )));
        }
        self.poisson.solve_vec(rho)
    }

    fn check_point(&self, point: &ManifoldPoint<T>) -> Result<()> {
        if point.dofs() != self.grid.n_points() || point.states() != self.states {
            return Err(Error::dim(format!(
                "point is {}x{}, problem wants {}x{}",
                point.dofs(),
                point.states(),
                self.grid.n_points(),
                self.states
            )));
        }
        Ok(())
    }

    fn density_of_frame(frame: &Frame<T>) -> Vec<T> {
        let mut rho = vec![T::zero(); frame.n_rows()];
        for l in 0..frame.n_cols() {
            for (r, &v) in rho.iter_mut().zip(frame.col(l).iter()) {
                *r += v * v;
            }
        }
        rho
    }
}

impl<T: Real> GroundStateProblem<T> for KsProblem<T> {
    type Frozen = KsOperator<T>;

    fn name(&self) -> &'static str {
        "ks"
    }

    fn dofs(&self) -> usize {
        self.grid.n_points()
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
        let w = self.grid.cell_weight();
        let mut e = half * frame.dot(&self.base.spmv(frame)?);
        let rho = Self::density_of_frame(frame);
        let hartree = self.hartree_potential(&rho)?;
        let mut coulomb = T::zero();
        let mut exchange = T::zero();
        for (&r, &v) in rho.iter().zip(hartree.iter()) {
            coulomb += r * v;
            exchange += r * xc_energy_density(r)?;
        }
        e += half * w * coulomb + w * exchange;
        Ok(e)
    }

    fn linearize(&self, point: &ManifoldPoint<T>) -> Result<KsOperator<T>> {
        self.check_point(point)?;
        let rho = Self::density_of_frame(point.frame());
        let a = self.mean_field(&rho)?;
        let zeta = rho
            .iter()
            .map(|&r| xc_potential_derivative(r))
            .collect::<Result<Vec<T>>>()?;
        Ok(KsOperator {
            a,
            phi: point.frame().clone(),
            zeta,
            poisson: self.poisson.clone(),
            cell_weight: self.grid.cell_weight(),
            counter: self.counter.clone(),
        })
    }

    fn density(&self, point: &ManifoldPoint<T>) -> Result<Vec<T>> {
        self.check_point(point)?;
        Ok(Self::density_of_frame(point.frame()))
    }

    /// `A(rho) = L + 2 D_ion + 2 w Diag(L^{-1} rho + mu_xc(rho))`.
    fn mean_field(&self, density: &[T]) -> Result<SparseMatrix<T>> {
        let hartree = self.hartree_potential(density)?;
        let w = self.grid.cell_weight();
        let shift = density
            .iter()
            .zip(hartree.iter())
            .map(|(&r, &v)| Ok(w * (v + xc_potential(r)?)))
            .collect::<Result<Vec<T>>>()?;
        self.base
            .add_scaled(&SparseMatrix::from_diagonal(&shift), real(2.0))
    }

    /// Grid samples of low-order monomials: the constant, the three
    /// coordinates, their pairwise products, then the squares.
    fn guess_frame(&self) -> Result<Frame<T>> {
        const EXPONENTS: [[i32; 3]; 10] = [
            [0, 0, 0],
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 1, 0],
            [1, 0, 1],
            [0, 1, 1],
            [2, 0, 0],
            [0, 2, 0],
            [0, 0, 2],
        ];
        if self.states > EXPONENTS.len() {
            return Err(Error::param(format!(
                "seed frame supports up to {} states, {} requested",
                EXPONENTS.len(),
                self.states
            )));
        }
        let n = self.grid.n_points();
        let mut frame = Frame::zeros(n, self.states);
        for (j, exps) in EXPONENTS.iter().take(self.states).enumerate() {
            for i in 0..n {
                let [x, y, z] = self.grid.coords(i);
                frame.col_mut(j)[i] = x.powi(exps[0]) * y.powi(exps[1]) * z.powi(exps[2]);
            }
        }
        Ok(frame)
    }

    fn operator_applies(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

/// Frozen Kohn-Sham operator pair.
pub struct KsOperator<T> {
    a: SparseMatrix<T>,
    phi: Frame<T>,
    zeta: Vec<T>,
    poisson: Arc<SparseCholesky<T>>,
    cell_weight: T,
    counter: Arc<AtomicU64>,
}

impl<T: Real> FrozenOperator<T> for KsOperator<T> {
    fn apply_a(&self, v: &Frame<T>) -> Result<Frame<T>> {
        self.counter.fetch_add(1, Ordering::Relaxed);
        self.a.spmv(v)
    }

    /// `B(Phi, V) = 2 w Diag((L^{-1} + Diag(zeta)) drho) Phi` with the
    /// linearized density `drho = 2 sum_j phi_j v_j` pointwise.
    fn apply_b(&self, v: &Frame<T>) -> Result<Frame<T>> {
        if v.n_rows() != self.phi.n_rows() || v.n_cols() != self.phi.n_cols() {
            return Err(Error::dim(format!(
                "operator input is {}x{}, expected {}x{}",
                v.n_rows(),
                v.n_cols(),
                self.phi.n_rows(),
                self.phi.n_cols()
            )));
        }
        self.counter.fetch_add(1, Ordering::Relaxed);
        let n = self.phi.n_rows();
        let p = self.phi.n_cols();
        let two: T = real(2.0);
        let mut drho = vec![T::zero(); n];
        for j in 0..p {
            for ((d, &f), &g) in drho.iter_mut().zip(self.phi.col(j)).zip(v.col(j)) {
                *d += two * f * g;
            }
        }
        let mut shift = self.poisson.solve_vec(&drho)?;
        for ((s, &z), &d) in shift.iter_mut().zip(self.zeta.iter()).zip(drho.iter()) {
            *s += z * d;
        }
        let scale = two * self.cell_weight;
        let mut out = Frame::zeros(n, p);
        for l in 0..p {
            for ((o, &s), &f) in out
                .col_mut(l)
                .iter_mut()
                .zip(shift.iter())
                .zip(self.phi.col(l))
            {
                *o = scale * s * f;
            }
        }
        Ok(out)
    }

    fn a_matrix(&self) -> &SparseMatrix<T> {
        &self.a
    }

    fn dense_operator(&self) -> Result<DenseMatrix<T>> {
        let n = self.phi.n_rows();
        let p = self.phi.n_cols();
        let np = n * p;
        if np > 5000 {
            return Err(Error::param(format!(
                "dense operator of dimension {np} refused"
            )));
        }
        // Dense inverse Laplacian, one Poisson solve per unit vector.
        let mut linv = DenseMatrix::zeros(n, n);
        let mut unit = vec![T::zero(); n];
        for k in 0..n {
            unit[k] = T::one();
            let col = self.poisson.solve_vec(&unit)?;
            unit[k] = T::zero();
            for i in 0..n {
                linv[(i, k)] = col[i];
            }
        }
        let a_dense = self.a.to_dense();
        let four_w: T = real::<T>(4.0) * self.cell_weight;
        let mut out = DenseMatrix::zeros(np, np);
        for l in 0..p {
            for j in 0..p {
                for i in 0..n {
                    let fi = self.phi.col(l)[i];
                    for k in 0..n {
                        let mut kernel = linv[(i, k)];
                        if i == k {
                            kernel += self.zeta[i];
                        }
                        let mut v = four_w * fi * kernel * self.phi.col(j)[k];
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
