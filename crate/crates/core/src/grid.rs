use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Equidistant periodic mesh on `[a, b)` together with the matching FFT wavenumbers.
///
/// The right endpoint is excluded, so `points[n - 1] == b - dx` and the FFT length is `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    dx: f64,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 points, got {n}")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("point count must be even, got {n}")));
        }
        let dx = (b - a) / n as f64;
        let points = (0..n).map(|i| a + i as f64 * dx).collect();
        let k_unit = 2.0 * PI / (b - a);
        let half = n / 2;
        let wavenumbers = (0..n)
            .map(|j| {
                if j < half {
                    k_unit * j as f64
                } else {
                    k_unit * (j as f64 - n as f64)
                }
            })
            .collect();
        Ok(Self {
            a,
            b,
            n,
            dx,
            points,
            wavenumbers,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Mesh width `(b - a) / n`.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Fundamental wavenumber `2π / (b - a)`.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / (self.b - self.a)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Wavenumbers in standard FFT order; the Nyquist mode carries `-(n/2)·k_unit`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.a == other.a && self.b == other.b
    }
}
