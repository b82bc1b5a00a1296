use nalgebra::DVector;

use crate::error::{Error, Result};

/// A point `(u, v)` of the energy space `H¹₀ × L²` on a grid.
///
/// `u` is the displacement, `v` the velocity; both hold one value per
/// interior grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
}

impl State {
    pub fn new(u: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::GridMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(Self { u, v })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            u: DVector::zeros(len),
            v: DVector::zeros(len),
        }
    }

    pub fn from_slices(u: &[f64], v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(u), DVector::from_column_slice(v))
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &State) {
        self.u.axpy(a, &other.u, 1.0);
        self.v.axpy(a, &other.v, 1.0);
    }

    pub fn scale_mut(&mut self, a: f64) {
        self.u *= a;
        self.v *= a;
    }

    pub fn scaled(&self, a: f64) -> State {
        State {
            u: &self.u * a,
            v: &self.v * a,
        }
    }

    pub fn sub(&self, other: &State) -> State {
        State {
            u: &self.u - &other.u,
            v: &self.v - &other.v,
        }
    }

    pub fn add(&self, other: &State) -> State {
        State {
            u: &self.u + &other.u,
            v: &self.v + &other.v,
        }
    }

    /// Largest absolute entry over both components.
    pub fn max_abs(&self) -> f64 {
        self.u.amax().max(self.v.amax())
    }

    /// Fails with [`Error::GridMismatch`] unless both components have `expected` entries.
    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.u.len() != expected || self.v.len() != expected {
            return Err(Error::GridMismatch {
                expected,
                got: self.u.len().max(self.v.len()),
            });
        }
        Ok(())
    }
}
