//! Periodic rectangular grids and the real grid functions that live on them.
//!
//! Values are stored row-major with the x index `j` running fastest:
//! the sample at `(x_j, y_k)` sits at offset `k * nx + j`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A uniform periodic grid on `[0, lx) x [0, ly)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
}

impl Grid2D {
    /// Builds a grid with `nx x ny` collocation points. Both counts must be
    /// even and at least 4; both lengths must be positive and finite.
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        for (name, n) in [("Nx", nx), ("Ny", ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be an even integer >= 4"
                )));
            }
        }
        for (name, l) in [("Lx", lx), ("Ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Grid2D { lx, ly, nx, ny })
    }

    /// Square grid on `[0, l)^2` with `n x n` points.
    pub fn square(l: f64, n: usize) -> Result<Self> {
        Self::new(l, l, n, n)
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    /// Fundamental wavenumber `2π / Lx`.
    pub fn mu_x(&self) -> f64 {
        2.0 * PI / self.lx
    }
    pub fn mu_y(&self) -> f64 {
        2.0 * PI / self.ly
    }
    /// Number of collocation points.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// `|Ω| = Lx * Ly`.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
    /// Quadrature weight of a single cell, `hx * hy`.
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.hx()
    }
    pub fn y(&self, k: usize) -> f64 {
        k as f64 * self.hy()
    }
}

/// A real scalar grid function, one finite value per collocation point.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(x_j, y_k)` at every collocation point.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.ny() {
            let y = grid.y(k);
            for j in 0..grid.nx() {
                values.push(f(grid.x(j), y));
            }
        }
        Field { grid, values }
    }

    /// Wraps raw row-major values. Rejects wrong lengths and non-finite data.
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = Field { grid, values };
        field.ensure_finite("Field::from_values")?;
        Ok(field)
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `(x_j, y_k)`.
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[k * self.grid.nx + j]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite {
                context: context.to_string(),
            })
        }
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        self.grid == other.grid
    }

    pub(crate) fn check_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Discrete inner product `hx hy Σ f_jk g_jk`.
    pub fn inner_h(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Field) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        s * self.grid.cell_area()
    }

    /// Discrete L² norm `sqrt((f, f)_h)`.
    pub fn norm_h(&self) -> f64 {
        self.inner_unchecked(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature `(f, 1)_h`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    ///
    /// Panics if the grids differ.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert!(self.same_grid(other), "grid mismatch in Field::zip_map");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    /// Pointwise (Hadamard) product.
    pub fn mul_pointwise(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self += a * x`.
    pub(crate) fn axpy(&mut self, a: f64, x: &Field) {
        debug_assert!(self.same_grid(x));
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    /// Largest pointwise difference `max |f - g|`.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `seed + (i + 1) * GOLDEN_GAMMA`.
///
/// Counter-based, so sample `i` never depends on the order of generation.
pub fn splitmix64(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform sample in `[0, 1)` built from the top 53 bits of [`splitmix64`].
pub fn uniform01(seed: u64, i: u64) -> f64 {
    (splitmix64(seed, i) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `amplitude * (2 rand - 1)` at every point, with `rand` uniform on `[0, 1)`.
///
/// Point `(j, k)` uses counter `k * nx + j`, so output is identical on every
/// platform for the same seed.
pub fn random_field(grid: Grid2D, amplitude: f64, seed: u64) -> Result<Field> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::param("amplitude", "must be finite and >= 0"));
    }
    let values = (0..grid.len() as u64)
        .map(|i| amplitude * (2.0 * uniform01(seed, i) - 1.0))
        .collect();
    Ok(Field::from_raw(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_grid_metadata() {
        let g = Grid2D::new(1.0, 1.0, 4, 4).unwrap();
        assert_eq!(g.hx(), 0.25);
        assert_eq!(g.hy(), 0.25);
        assert!((g.mu_x() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn coarsening_grid_spacing() {
        let l = 4.0 * PI;
        let g = Grid2D::square(l, 256).unwrap();
        assert!((g.hx() - PI / 64.0).abs() < 1e-15);
        assert_eq!(g.hx() * g.nx() as f64, l);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(1.0, 1.0, 3, 4).is_err());
        assert!(Grid2D::new(1.0, 1.0, 4, 2).is_err());
        assert!(Grid2D::new(0.0, 1.0, 4, 4).is_err());
        assert!(Grid2D::new(1.0, -2.0, 4, 4).is_err());
    }

    #[test]
    fn constant_inner_product_is_area() {
        let g = Grid2D::new(1.0, 1.0, 8, 6).unwrap();
        let one = Field::constant(g, 1.0);
        assert!((one.inner_h(&one).unwrap() - 1.0).abs() < 1e-14);
        let g = Grid2D::new(3.5, 0.7, 10, 4).unwrap();
        let one = Field::constant(g, 1.0);
        assert!((one.inner_h(&one).unwrap() - 3.5 * 0.7).abs() < 1e-14 * 3.5 * 0.7);
    }

    #[test]
    fn discrete_orthogonality() {
        let g = Grid2D::square(1.0, 16).unwrap();
        let s = Field::from_fn(g, |x, _| (2.0 * PI * x).sin());
        let c = Field::from_fn(g, |x, _| (2.0 * PI * x).cos());
        assert!(s.inner_h(&c).unwrap().abs() < 1e-15);
        assert!((s.inner_h(&s).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let a = Field::zeros(Grid2D::square(1.0, 4).unwrap());
        let b = Field::zeros(Grid2D::square(1.0, 8).unwrap());
        assert!(matches!(a.inner_h(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn from_values_rejects_nan() {
        let g = Grid2D::square(1.0, 4).unwrap();
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(Field::from_values(g, v).is_err());
        assert!(Field::from_values(g, vec![0.0; 15]).is_err());
    }

    #[test]
    fn random_field_contract() {
        let g = Grid2D::square(1.0, 32).unwrap();
        let z = random_field(g, 0.0, 7).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let a = random_field(g, 0.001, 42).unwrap();
        let b = random_field(g, 0.001, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs() <= 0.001);
        let c = random_field(g, 0.001, 43).unwrap();
        assert_ne!(a, c);
        assert!(random_field(g, -1.0, 0).is_err());
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 stream seeded with 0.
        assert_eq!(splitmix64(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0, 1), 0x6E78_9E6A_A1B9_65F4);
    }
}
