//! External trapping potentials: harmonic confinement and a rough
//! piecewise-constant disorder landscape.

use super::mesh::CartesianMesh;
use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Kind of external potential on `(-L, L)^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential<T> {
    None,
    /// `|x|^2 / 2`.
    Harmonic,
    /// Checkerboard-like random landscape of amplitude `epsilon^{-2}` on
    /// coarse cells of width `2 L epsilon`.
    Disorder { epsilon: T, seed: u64 },
    /// Sum of the two.
    HarmonicDisorder { epsilon: T, seed: u64 },
}

pub fn harmonic<T: Real>(x: T, y: T) -> T {
    (x * x + y * y) * real(0.5)
}

/// Realization of the disorder landscape: an `s x s` lattice of coarse cells
/// (`s = 1/epsilon`) whose values are drawn i.i.d. from `{0, epsilon^{-2}}`
/// with equal probability, in lexicographic cell order from a seeded stream.
#[derive(Debug, Clone)]
pub struct DisorderField<T> {
    half_width: T,
    per_dim: usize,
    coarse_h: T,
    values: Vec<T>,
}

impl<T: Real> DisorderField<T> {
    /// Draws the field, checking that the coarse lattice is resolved by the
    /// FE mesh: `1/epsilon` must be a power of two no finer than the mesh.
    pub fn build(mesh: &CartesianMesh<T>, epsilon: T, seed: u64) -> Result<Self> {
        if !(epsilon > T::zero()) || epsilon > T::one() {
            return Err(Error::param(format!(
                "disorder width fraction must lie in (0, 1], got {epsilon:?}"
            )));
        }
        let inv = (T::one() / epsilon).to_f64().unwrap_or(f64::NAN);
        if !inv.is_finite() {
            return Err(Error::param("disorder width fraction is degenerate"));
        }
        let per_dim = inv.round() as usize;
        let exact = (real::<T>(per_dim as f64) * epsilon - T::one()).abs() <= real(1e-12);
        if per_dim == 0 || !per_dim.is_power_of_two() || !exact {
            return Err(Error::param(format!(
                "disorder width fraction must be an inverse power of two, got {epsilon:?}"
            )));
        }
        if mesh.cells() % per_dim != 0 {
            return Err(Error::param(format!(
                "disorder lattice of {per_dim} cells per direction does not align \
                 with a mesh of {} cells",
                mesh.cells()
            )));
        }
        let amplitude = T::one() / (epsilon * epsilon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..per_dim * per_dim)
            .map(|_| if rng.gen::<bool>() { amplitude } else { T::zero() })
            .collect();
        Ok(DisorderField {
            half_width: mesh.half_width(),
            per_dim,
            coarse_h: real::<T>(2.0) * mesh.half_width() / real(per_dim as f64),
            values,
        })
    }

    /// Coarse cells per direction.
    pub fn per_dim(&self) -> usize {
        self.per_dim
    }

    pub fn value_at(&self, x: T, y: T) -> T {
        let locate = |v: T| -> usize {
            let shifted = (v + self.half_width) / self.coarse_h;
            let idx = shifted.floor().to_f64().unwrap_or(0.0).max(0.0) as usize;
            idx.min(self.per_dim - 1)
        };
        self.values[locate(y) * self.per_dim + locate(x)]
    }
}

/// A potential resolved against a mesh, ready for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct PotentialField<T> {
    harmonic: bool,
    disorder: Option<DisorderField<T>>,
}

impl<T: Real> PotentialField<T> {
    pub fn new(potential: &Potential<T>, mesh: &CartesianMesh<T>) -> Result<Self> {
        let (harmonic, disorder) = match potential {
            Potential::None => (false, None),
            Potential::Harmonic => (true, None),
            Potential::Disorder { epsilon, seed } => {
                (false, Some(DisorderField::build(mesh, *epsilon, *seed)?))
            }
            Potential::HarmonicDisorder { epsilon, seed } => {
                (true, Some(DisorderField::build(mesh, *epsilon, *seed)?))
            }
        };
        Ok(PotentialField { harmonic, disorder })
    }

    /// True when the potential vanishes identically.
    pub fn is_zero(&self) -> bool {
        !self.harmonic && self.disorder.is_none()
    }

    pub fn value_at(&self, x: T, y: T) -> T {
        let mut v = T::zero();
        if self.harmonic {
            v += harmonic(x, y);
        }
        if let Some(field) = &self.disorder {
            v += field.value_at(x, y);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(cells: usize) -> CartesianMesh<f64> {
        CartesianMesh::new(1.0, cells).unwrap()
    }

    #[test]
    fn harmonic_value() {
        assert!((harmonic(3.0f64, -4.0) - 12.5).abs() <= 1e-15);
    }

    #[test]
    fn disorder_values_come_from_the_two_point_set() {
        let field = DisorderField::build(&mesh(8), 0.5f64, 3).unwrap();
        assert_eq!(field.per_dim(), 2);
        for &v in &field.values {
            assert!(v == 0.0 || v == 4.0);
        }
    }

    #[test]
    fn disorder_is_deterministic_per_seed() {
        let a = DisorderField::build(&mesh(16), 0.25f64, 7).unwrap();
        let b = DisorderField::build(&mesh(16), 0.25f64, 7).unwrap();
        assert_eq!(a.values, b.values);
        let c = DisorderField::build(&mesh(16), 0.25f64, 8).unwrap();
        // 16 cells of two values collide with probability 2^-16.
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn disorder_is_piecewise_constant_on_coarse_cells() {
        let field = DisorderField::build(&mesh(16), 0.25f64, 5).unwrap();
        // Points inside the same coarse cell of width 0.5.
        let v = field.value_at(-0.99, 0.51);
        assert_eq!(field.value_at(-0.51, 0.99), v);
        // Lexicographic layout: cell (ix, iy) = (0, 3) is entry 3*4 + 0.
        assert_eq!(v, field.values[3 * 4]);
    }

    #[test]
    fn incompatible_widths_are_rejected() {
        assert!(DisorderField::build(&mesh(8), 1.0 / 3.0, 1).is_err());
        // Lattice finer than the mesh.
        assert!(DisorderField::build(&mesh(4), 1.0 / 8.0, 1).is_err());
        assert!(DisorderField::build(&mesh(8), -0.5, 1).is_err());
    }

    #[test]
    fn combined_potential_sums_both_parts() {
        let m = mesh(8);
        let field = PotentialField::new(
            &Potential::HarmonicDisorder {
                epsilon: 0.5,
                seed: 11,
            },
            &m,
        )
        .unwrap();
        let lone = PotentialField::new(
            &Potential::Disorder {
                epsilon: 0.5,
                seed: 11,
            },
            &m,
        )
        .unwrap();
        let (x, y) = (0.3, -0.2);
        assert!((field.value_at(x, y) - lone.value_at(x, y) - harmonic(x, y)).abs() <= 1e-15);
        assert!(PotentialField::new(&Potential::None, &m).unwrap().is_zero());
    }
}
