//! 2D complex FFTs over row-major real grid data.
//!
//! Spectra are kept in x-major ("transposed") order: mode `(j, k)` lives at
//! `j * ny + k`, where `j` indexes the x wavenumber and `k` the y wavenumber.
//! Forward transforms are unnormalized; inverse transforms carry `1/(nx ny)`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid2D;

pub(crate) struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scratch: RefCell<Vec<Complex64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<(usize, usize), Rc<Fft2>>> = RefCell::new(HashMap::new());
}

/// Per-thread cached plan for the grid's shape.
pub(crate) fn plan(grid: &Grid2D) -> Rc<Fft2> {
    let key = (grid.nx(), grid.ny());
    PLANS.with(|plans| {
        plans
            .borrow_mut()
            .entry(key)
            .or_insert_with(|| Rc::new(Fft2::new(key.0, key.1)))
            .clone()
    })
}

impl Fft2 {
    fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_y = planner.plan_fft_inverse(ny);
        let scratch_len = [&fwd_x, &inv_x, &fwd_y, &inv_y]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2 {
            nx,
            ny,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            scratch: RefCell::new(vec![Complex64::default(); scratch_len]),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.nx * self.ny
    }

    fn run(&self, f: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let mut scratch = self.scratch.borrow_mut();
        f.process_with_scratch(buf, &mut scratch);
    }

    /// Forward transform of real row-major data into x-major spectrum.
    pub(crate) fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        let mut rows: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_complex_rows(&mut rows)
    }

    /// Forward transform of two real arrays at once, packing them as
    /// `a + i b` and splitting with Hermitian symmetry.
    pub(crate) fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut rows: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        let z = self.forward_complex_rows(&mut rows);
        let (nx, ny) = (self.nx, self.ny);
        let mut fa = vec![Complex64::default(); z.len()];
        let mut fb = vec![Complex64::default(); z.len()];
        for j in 0..nx {
            let jm = (nx - j) % nx;
            for k in 0..ny {
                let km = (ny - k) % ny;
                let zp = z[j * ny + k];
                let zm = z[jm * ny + km].conj();
                fa[j * ny + k] = (zp + zm) * 0.5;
                // (zp - zm) / (2i)
                let d = (zp - zm) * 0.5;
                fb[j * ny + k] = Complex64::new(d.im, -d.re);
            }
        }
        (fa, fb)
    }

    fn forward_complex_rows(&self, rows: &mut [Complex64]) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        self.run(&self.fwd_x, rows);
        let mut cols = vec![Complex64::default(); nx * ny];
        transpose(rows, &mut cols, ny, nx);
        self.run(&self.fwd_y, &mut cols);
        cols
    }

    /// Inverse transform; returns the real part scaled by `1/(nx ny)`.
    pub(crate) fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        let rows = self.inverse_complex_rows(&mut spec);
        let s = 1.0 / self.len() as f64;
        rows.iter().map(|c| c.re * s).collect()
    }

    /// Inverse of two spectra of real fields at once.
    pub(crate) fn inverse_real_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut spec: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| x + Complex64::new(-y.im, y.re))
            .collect();
        let rows = self.inverse_complex_rows(&mut spec);
        let s = 1.0 / self.len() as f64;
        (
            rows.iter().map(|c| c.re * s).collect(),
            rows.iter().map(|c| c.im * s).collect(),
        )
    }

    fn inverse_complex_rows(&self, spec: &mut [Complex64]) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        self.run(&self.inv_y, spec);
        let mut rows = vec![Complex64::default(); nx * ny];
        transpose(spec, &mut rows, nx, ny);
        self.run(&self.inv_x, &mut rows);
        rows
    }
}

/// `dst[c * rows + r] = src[r * cols + c]` for a `rows x cols` source.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Signed wavenumber index for FFT slot `i` of an `n`-point transform.
/// The Nyquist slot `n/2` maps to `-n/2`.
pub(crate) fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
