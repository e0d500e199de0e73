//! Fourier pseudospectral differentiation and constant-coefficient operators.
//!
//! Every constant-coefficient operator on a periodic grid is diagonal in
//! Fourier space, so it is stored as a [`SpectralSymbol`]: one multiplier per
//! mode. Applying the operator is transform, multiply, inverse transform.
//!
//! Nyquist convention: on the `|m| = N/2` mode, odd-order derivative symbols
//! are zero and even-order symbols keep their natural real value. This is
//! exactly what differentiating the trigonometric interpolant (with its
//! halved Nyquist coefficient) gives at the collocation points, and it makes
//! the first derivative skew-adjoint under the discrete inner product.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{plan, signed_mode};
use crate::grid::{Field, Grid2D};

/// Per-mode multipliers of a constant-coefficient operator.
///
/// `values` are real; when `imaginary` is set the multiplier is `i * value`
/// (odd total derivative order). Values are indexed in x-major mode order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSymbol {
    grid: Grid2D,
    values: Vec<f64>,
    imaginary: bool,
}

/// Policy for solving with a symbol that vanishes on the mean mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullMode {
    /// Any vanishing mode is an error.
    Reject,
    /// The mean mode of the right-hand side is discarded and the solution is
    /// returned mean-free. Other vanishing modes are still an error.
    ProjectMean,
}

impl SpectralSymbol {
    /// Real symbol from a function of the physical wavenumbers `(kx, ky)`.
    pub fn from_wavenumbers(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..nx {
            let kx = signed_mode(j, nx) as f64 * grid.mu_x();
            for k in 0..ny {
                let ky = signed_mode(k, ny) as f64 * grid.mu_y();
                values.push(f(kx, ky));
            }
        }
        SpectralSymbol {
            grid,
            values,
            imaginary: false,
        }
    }

    pub fn identity(grid: Grid2D) -> Self {
        Self::constant(grid, 1.0)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        SpectralSymbol {
            grid,
            values: vec![c; grid.len()],
            imaginary: false,
        }
    }

    /// The discrete Laplacian `Δ_h`, symbol `-(kx² + ky²)`.
    pub fn laplacian(grid: Grid2D) -> Self {
        Self::from_wavenumbers(grid, |kx, ky| -(kx * kx + ky * ky))
    }

    /// Symbol of `∂x^s1 ∂y^s2` applied to the trigonometric interpolant.
    pub fn derivative(grid: Grid2D, s1: u32, s2: u32) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let order = s1 + s2;
        // i^order = sign * (1 or i)
        let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..nx {
            let mx = signed_mode(j, nx);
            let kx = mx as f64 * grid.mu_x();
            let zero_x = s1 % 2 == 1 && mx.unsigned_abs() as usize == nx / 2;
            for k in 0..ny {
                let my = signed_mode(k, ny);
                let ky = my as f64 * grid.mu_y();
                let zero_y = s2 % 2 == 1 && my.unsigned_abs() as usize == ny / 2;
                let v = if zero_x || zero_y {
                    0.0
                } else {
                    sign * kx.powi(s1 as i32) * ky.powi(s2 as i32)
                };
                values.push(v);
            }
        }
        SpectralSymbol {
            grid,
            values,
            imaginary: order % 2 == 1,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Real per-mode values in x-major mode order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_imaginary(&self) -> bool {
        self.imaginary
    }

    /// Value on the mean mode.
    pub fn mean_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multiplier of mode with signed indices `(m1, m2)` as a complex number.
    pub fn at_mode(&self, m1: i64, m2: i64) -> Complex64 {
        let (nx, ny) = (self.grid.nx() as i64, self.grid.ny() as i64);
        let j = m1.rem_euclid(nx) as usize;
        let k = m2.rem_euclid(ny) as usize;
        self.complex_at(j * self.grid.ny() + k)
    }

    pub(crate) fn complex_at(&self, idx: usize) -> Complex64 {
        let v = self.values[idx];
        if self.imaginary {
            Complex64::new(0.0, v)
        } else {
            Complex64::new(v, 0.0)
        }
    }

    fn check(&self, other: &SpectralSymbol) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Symbol of the composed operator (pointwise product of multipliers).
    pub fn compose(&self, other: &SpectralSymbol) -> Result<SpectralSymbol> {
        self.check(other)?;
        let both = self.imaginary && other.imaginary;
        let s = if both { -1.0 } else { 1.0 };
        Ok(SpectralSymbol {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| s * a * b)
                .collect(),
            imaginary: self.imaginary != other.imaginary,
        })
    }

    /// Sum of two operators with the same parity.
    pub fn add(&self, other: &SpectralSymbol) -> Result<SpectralSymbol> {
        self.check(other)?;
        if self.imaginary != other.imaginary {
            return Err(Error::Unsupported(
                "sum of real and imaginary symbols".to_string(),
            ));
        }
        Ok(SpectralSymbol {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            imaginary: self.imaginary,
        })
    }

    pub fn scale(&self, s: f64) -> SpectralSymbol {
        SpectralSymbol {
            grid: self.grid,
            values: self.values.iter().map(|v| s * v).collect(),
            imaginary: self.imaginary,
        }
    }

    /// `c * I + self` for a real symbol.
    pub fn shift(&self, c: f64) -> Result<SpectralSymbol> {
        self.add(&SpectralSymbol::constant(self.grid, c))
    }

    pub(crate) fn multiply_spectrum(&self, spec: &mut [Complex64]) {
        if self.imaginary {
            for (z, &v) in spec.iter_mut().zip(&self.values) {
                *z = Complex64::new(-z.im * v, z.re * v);
            }
        } else {
            for (z, &v) in spec.iter_mut().zip(&self.values) {
                *z *= v;
            }
        }
    }

    /// Applies the operator to `f`.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.apply_unchecked(f))
    }

    pub(crate) fn apply_unchecked(&self, f: &Field) -> Field {
        let p = plan(&self.grid);
        let mut spec = p.forward(f.values());
        self.multiply_spectrum(&mut spec);
        Field::from_raw(self.grid, p.inverse_real(spec))
    }

    /// Solves `self(u) = rhs` mode by mode.
    pub fn solve(&self, rhs: &Field, null_mode: NullMode) -> Result<Field> {
        if *rhs.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let tiny = 1e-14 * scale;
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let p = plan(&self.grid);
        let mut spec = p.forward(rhs.values());
        for (idx, z) in spec.iter_mut().enumerate() {
            let v = self.values[idx];
            if v.abs() <= tiny {
                if idx == 0 && null_mode == NullMode::ProjectMean {
                    *z = Complex64::default();
                    continue;
                }
                return Err(Error::SingularSymbol {
                    m1: signed_mode(idx / ny, nx),
                    m2: signed_mode(idx % ny, ny),
                });
            }
            *z = if self.imaginary {
                // z / (i v) = -i z / v
                Complex64::new(z.im / v, -z.re / v)
            } else {
                *z / v
            };
        }
        Ok(Field::from_raw(self.grid, p.inverse_real(spec)))
    }
}

/// Pseudospectral derivative `∂x^s1 ∂y^s2 I_N f` at the collocation points.
pub fn deriv(f: &Field, s1: u32, s2: u32) -> Field {
    SpectralSymbol::derivative(*f.grid(), s1, s2).apply_unchecked(f)
}

/// `Δ_h f`.
pub fn laplacian(f: &Field) -> Field {
    SpectralSymbol::laplacian(*f.grid()).apply_unchecked(f)
}

/// Pseudospectral gradient `(D1x f, D1y f)`.
pub fn gradient(f: &Field) -> [Field; 2] {
    let g = *f.grid();
    let p = plan(&g);
    let spec = p.forward(f.values());
    let dx = SpectralSymbol::derivative(g, 1, 0);
    let dy = SpectralSymbol::derivative(g, 0, 1);
    let mut sx = spec.clone();
    let mut sy = spec;
    dx.multiply_spectrum(&mut sx);
    dy.multiply_spectrum(&mut sy);
    let (gx, gy) = p.inverse_real_pair(&sx, &sy);
    [Field::from_raw(g, gx), Field::from_raw(g, gy)]
}

/// Pseudospectral divergence `D1x u + D1y v`.
pub fn divergence(u: &Field, v: &Field) -> Field {
    let g = *u.grid();
    let p = plan(&g);
    let (mut su, mut sv) = p.forward_pair(u.values(), v.values());
    SpectralSymbol::derivative(g, 1, 0).multiply_spectrum(&mut su);
    SpectralSymbol::derivative(g, 0, 1).multiply_spectrum(&mut sv);
    for (a, b) in su.iter_mut().zip(&sv) {
        *a += b;
    }
    Field::from_raw(g, p.inverse_real(su))
}
