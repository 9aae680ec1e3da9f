//! Rectangular sample lattices on the complex plane and trapezoidal
//! quadrature over them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Uniform `nx × ny` lattice covering `[x_min, x_max] × [y_min, y_max]`,
/// endpoints included. Values on it are stored row-major with `y` as the
/// slow index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    /// Square window of the given half-width centred on `center`.
    pub fn square(center: Complex64, half_width: f64, points: usize) -> Self {
        assert!(points >= 2, "lattice needs at least two points per axis");
        Self {
            x_min: center.re - half_width,
            x_max: center.re + half_width,
            y_min: center.im - half_width,
            y_max: center.im + half_width,
            nx: points,
            ny: points,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy()
    }

    pub fn point(&self, index: usize) -> Complex64 {
        Complex64::new(self.x(index % self.nx), self.y(index / self.nx))
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// One-dimensional trapezoid weights along x.
    pub fn x_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.nx, self.dx())
    }

    pub fn y_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.ny, self.dy())
    }

    /// Trapezoidal integral of row-major samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.integrate_with(values, |_, v| v)
    }

    /// Trapezoidal integral of `f(point, value)`.
    pub fn integrate_with(&self, values: &[f64], f: impl Fn(Complex64, f64) -> f64) -> f64 {
        assert_eq!(values.len(), self.len());
        let wx = self.x_weights();
        let wy = self.y_weights();
        let mut total = 0.0;
        for iy in 0..self.ny {
            let mut row = 0.0;
            for ix in 0..self.nx {
                let i = iy * self.nx + ix;
                row += wx[ix] * f(self.point(i), values[i]);
            }
            total += wy[iy] * row;
        }
        total
    }
}

pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}
