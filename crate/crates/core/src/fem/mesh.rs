//! Uniform Cartesian meshes of the square `(-L, L)^2`.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// A square mesh with `cells x cells` equal elements.
///
/// Cell counts are restricted to powers of two so that mesh hierarchies nest
/// and the piecewise-constant disorder lattice divides evenly.
#[derive(Debug, Clone)]
pub struct CartesianMesh<T> {
    half_width: T,
    cells: usize,
    h: T,
}

impl<T: Real> CartesianMesh<T> {
    pub fn new(half_width: T, cells: usize) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::param(format!(
                "mesh half-width must be positive, got {half_width:?}"
            )));
        }
        if cells < 2 || !cells.is_power_of_two() {
            return Err(Error::param(format!(
                "cell count per direction must be a power of two >= 2, got {cells}"
            )));
        }
        let h = real::<T>(2.0) * half_width / real(cells as f64);
        Ok(CartesianMesh {
            half_width,
            cells,
            h,
        })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// Elements per direction.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Element edge length.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn n_elements(&self) -> usize {
        self.cells * self.cells
    }

    /// Lower-left corner of element `(ex, ey)`.
    pub fn element_origin(&self, ex: usize, ey: usize) -> (T, T) {
        debug_assert!(ex < self.cells && ey < self.cells);
        (
            -self.half_width + real::<T>(ex as f64) * self.h,
            -self.half_width + real::<T>(ey as f64) * self.h,
        )
    }

    /// Element containing `(x, y)`, clamping points on the far boundary.
    pub fn element_of(&self, x: T, y: T) -> (usize, usize) {
        let locate = |v: T| -> usize {
            let shifted = (v + self.half_width) / self.h;
            let idx = shifted.floor().to_f64().unwrap_or(0.0).max(0.0) as usize;
            idx.min(self.cells - 1)
        };
        (locate(x), locate(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_origins() {
        let mesh = CartesianMesh::new(8.0f64, 32).unwrap();
        assert!((mesh.h() - 0.5).abs() <= 1e-15);
        let (x0, y0) = mesh.element_origin(0, 0);
        assert!((x0 + 8.0).abs() <= 1e-15 && (y0 + 8.0).abs() <= 1e-15);
        let (x1, _) = mesh.element_origin(31, 0);
        assert!((x1 - 7.5).abs() <= 1e-15);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(CartesianMesh::new(0.0f64, 4).is_err());
        assert!(CartesianMesh::new(1.0f64, 3).is_err());
        assert!(CartesianMesh::new(1.0f64, 1).is_err());
    }

    #[test]
    fn point_location_clamps_the_far_edge() {
        let mesh = CartesianMesh::new(1.0f64, 4).unwrap();
        assert_eq!(mesh.element_of(-1.0, -1.0), (0, 0));
        assert_eq!(mesh.element_of(0.999, 0.2), (3, 2));
        assert_eq!(mesh.element_of(1.0, 1.0), (3, 3));
    }
}
