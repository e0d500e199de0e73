//! Linear implicit solves with frozen coefficients.
//!
//! Every implicit step reduces to the coupled stage problem
//!
//! ```text
//! Y_i = R_i + θ Σ_j a_ij N(f_j) B Y_j,    i = 1..s
//! ```
//!
//! (`s = 1`, `a = [[1]]` for the prediction-correction and BDF schemes).
//! Writing `ν_j = C(f_j) B Y_j` for the chemical potential of stage `j` and
//! `w_j = G ν_j`, the solution is `Y_i = R_i + θ Σ_j a_ij (w_j, c_j*(w_j))`,
//! so only the scalar fields `ν_j` are unknown. They satisfy
//!
//! ```text
//! ν_i − θ Σ_j a_ij (L + c_i c_j*) G ν_j = C(f_i) B R_i,
//! ```
//!
//! solved by restarted GMRES, right-preconditioned with the
//! constant-coefficient operator `L + s0 − s1 Δ` in place of `L + c_i c_j*`.
//! The preconditioner is diagonal in Fourier space up to an `s × s` block
//! per mode.
//!
//! Newton steps on the Gauss stage equations have the same shape with two
//! extra terms, since `g` and `p` are linear in `φ`: `ν_i` gains
//! `c_i'[φ_i](q̄_i)` and the `q` row gains `c_j'[φ_j]*(w̄_j)`, where `q̄`, `w̄`
//! belong to the linearization point. Those terms make the operator
//! indefinite in the spinodal regime, hence GMRES rather than a stationary
//! iteration.

use rustfft::num_complex::Complex64;

use crate::eq::{Coupling, QuadState, QuadSystem};
use crate::error::{Error, Result};
use crate::fft::{plan, Fft2};
use crate::grid::{Field, Grid2D};
use crate::spectral::SpectralSymbol;

use std::rc::Rc;

/// Stopping rule for the implicit solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearTolerance {
    /// Residual bound relative to `1 + ‖R‖∞`.
    pub eps: f64,
    pub max_iters: usize,
}

impl Default for LinearTolerance {
    fn default() -> Self {
        LinearTolerance {
            eps: 1e-12,
            max_iters: 1000,
        }
    }
}

/// Output of a stage solve.
#[derive(Clone, Debug)]
pub(crate) struct StageSolution {
    pub y: Vec<QuadState>,
    pub iterations: usize,
    /// Final chemical potentials `ν̂_j`, usable as a warm start.
    pub nu: Vec<Spectrum>,
}

/// Jacobian terms of one stage about a Newton iterate.
pub(crate) struct Linearization {
    /// `g = slope φ` or `p = slope ∇φ`.
    pub slope: f64,
    pub q: Vec<f64>,
    pub w: Vec<f64>,
}

/// Coefficients of one stage of the linear problem.
pub(crate) struct StageTerm {
    pub coupling: Coupling,
    pub lin: Option<Linearization>,
}

impl StageTerm {
    pub fn frozen(coupling: Coupling) -> Self {
        StageTerm {
            coupling,
            lin: None,
        }
    }
}

/// Grid-level data shared by all solves of one system.
pub(crate) struct ImplicitSolver {
    grid: Grid2D,
    fft: Rc<Fft2>,
    l_hat: Vec<f64>,
    g_hat: Vec<f64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// `kx² + ky²` with the Nyquist modes of the first derivatives dropped.
    k2: Vec<f64>,
}

pub(crate) type Spectrum = Vec<Complex64>;

const MACHINE_EPS: f64 = f64::EPSILON;
const RESTART: usize = 100;

/// Fixed data of one stage solve.
struct Problem<'a> {
    theta: f64,
    a: &'a [Vec<f64>],
    terms: &'a [StageTerm],
    rhs: &'a [QuadState],
    r_phi_hat: Vec<Spectrum>,
    /// `∇w̄` for linearized gradient couplings.
    grad_w: Vec<Option<(Vec<f64>, Vec<f64>)>>,
}

/// `Y(ν)` and `ν(Y(ν))` for one set of chemical potentials.
struct Sweep {
    phi: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    nu: Vec<Spectrum>,
}

impl ImplicitSolver {
    pub fn new(sys: &QuadSystem) -> Self {
        let grid = *sys.grid();
        let kx = SpectralSymbol::derivative(grid, 1, 0).values().to_vec();
        let ky = SpectralSymbol::derivative(grid, 0, 1).values().to_vec();
        let k2 = kx.iter().zip(&ky).map(|(a, b)| a * a + b * b).collect();
        ImplicitSolver {
            grid,
            fft: plan(&grid),
            l_hat: sys.l_symbol().values().to_vec(),
            g_hat: sys.g_symbol().values().to_vec(),
            kx,
            ky,
            k2,
        }
    }

    fn len(&self) -> usize {
        self.grid.len()
    }

    /// Solves `y = rhs + θ N1 B y` (constant coefficients, exact per mode).
    pub fn solve_n1(&self, theta: f64, rhs: &QuadState) -> QuadState {
        let mut spec = self.fft.forward(rhs.phi.values());
        for (idx, z) in spec.iter_mut().enumerate() {
            *z /= 1.0 - theta * self.g_hat[idx] * self.l_hat[idx];
        }
        QuadState {
            phi: Field::from_raw(self.grid, self.fft.inverse_real(spec)),
            q: rhs.q.clone(),
        }
    }

    /// `N(f) B y` as `(w, c*(w))` with `w = G C B y`.
    pub fn slope(&self, c: &Coupling, y: &QuadState) -> (Vec<f64>, Vec<f64>) {
        let mut nu = self.column(c, y.q.values(), None);
        let phi_hat = self.fft.forward(y.phi.values());
        for m in 0..nu.len() {
            nu[m] = (nu[m] + phi_hat[m] * self.l_hat[m]) * self.g_hat[m];
        }
        self.adjoint(c, &nu)
    }

    /// `c*(w)` in physical space given `ŵ`, along with `w` itself.
    fn adjoint(&self, c: &Coupling, w_hat: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let w = self.fft.inverse_real(w_hat.to_vec());
        let mut out = match &c.g {
            Some(g) => g.values().iter().zip(&w).map(|(a, b)| a * b).collect(),
            None => vec![0.0; w.len()],
        };
        if let Some([px, py]) = &c.p {
            let (wx, wy) = self.gradient(w_hat);
            for (i, o) in out.iter_mut().enumerate() {
                *o += px.values()[i] * wx[i] + py.values()[i] * wy[i];
            }
        }
        (w, out)
    }

    fn gradient_spectra(&self, f_hat: &[Complex64]) -> (Spectrum, Spectrum) {
        let sx = f_hat
            .iter()
            .zip(&self.kx)
            .map(|(z, &k)| Complex64::new(-z.im * k, z.re * k))
            .collect();
        let sy = f_hat
            .iter()
            .zip(&self.ky)
            .map(|(z, &k)| Complex64::new(-z.im * k, z.re * k))
            .collect();
        (sx, sy)
    }

    fn gradient(&self, f_hat: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let (sx, sy) = self.gradient_spectra(f_hat);
        self.fft.inverse_real_pair(&sx, &sy)
    }

    /// Spectrum of `c(u) = g u − ∇·(p u)`, plus the linearized term
    /// `slope (q̄ φ)` or `−slope ∇·(q̄ ∇φ)` when `extra` is given.
    fn column(&self, c: &Coupling, u: &[f64], extra: Option<Extra<'_>>) -> Spectrum {
        let mut spec = match &c.g {
            Some(g) => {
                let mut gu: Vec<f64> = g.values().iter().zip(u).map(|(a, b)| a * b).collect();
                if let Some(Extra::Point { slope, q, phi }) = extra {
                    for m in 0..gu.len() {
                        gu[m] += slope * q[m] * phi[m];
                    }
                }
                self.fft.forward(&gu)
            }
            None => vec![Complex64::default(); u.len()],
        };
        if let Some([px, py]) = &c.p {
            let mut ux: Vec<f64> = px.values().iter().zip(u).map(|(a, b)| a * b).collect();
            let mut uy: Vec<f64> = py.values().iter().zip(u).map(|(a, b)| a * b).collect();
            if let Some(Extra::Flux { slope, q, dx, dy }) = extra {
                for m in 0..ux.len() {
                    ux[m] += slope * q[m] * dx[m];
                    uy[m] += slope * q[m] * dy[m];
                }
            }
            let (fx, fy) = self.fft.forward_pair(&ux, &uy);
            for (idx, z) in spec.iter_mut().enumerate() {
                // − (i kx fx + i ky fy)
                let d = fx[idx] * self.kx[idx] + fy[idx] * self.ky[idx];
                *z += Complex64::new(d.im, -d.re);
            }
        }
        spec
    }

    /// Evaluates `Y(ν)` and `ν(Y(ν))`; `with_rhs = false` drops `R`.
    fn sweep(&self, pb: &Problem<'_>, nu_hat: &[Spectrum], with_rhs: bool) -> Sweep {
        let s = pb.rhs.len();
        let n = self.len();
        let w_hat: Vec<Spectrum> = nu_hat
            .iter()
            .map(|nu| nu.iter().zip(&self.g_hat).map(|(z, g)| z * g).collect())
            .collect();
        // z_j = c_j*(w_j) plus the linearized q-row term
        let (w, mut z): (Vec<Vec<f64>>, Vec<Vec<f64>>) = pb
            .terms
            .iter()
            .zip(&w_hat)
            .map(|(t, wh)| self.adjoint(&t.coupling, wh))
            .unzip();

        let mut phi_hat: Vec<Spectrum> = Vec::with_capacity(s);
        let mut phi: Vec<Vec<f64>> = Vec::with_capacity(s);
        for i in 0..s {
            let mut ph = if with_rhs {
                pb.r_phi_hat[i].clone()
            } else {
                vec![Complex64::default(); n]
            };
            let mut pr = if with_rhs {
                pb.rhs[i].phi.values().to_vec()
            } else {
                vec![0.0; n]
            };
            for j in 0..s {
                let c = pb.theta * pb.a[i][j];
                if c != 0.0 {
                    for m in 0..n {
                        ph[m] += w_hat[j][m] * c;
                        pr[m] += w[j][m] * c;
                    }
                }
            }
            phi_hat.push(ph);
            phi.push(pr);
        }

        let mut grads: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; s];
        for j in 0..s {
            let Some(lin) = &pb.terms[j].lin else { continue };
            if pb.terms[j].coupling.g.is_some() {
                for m in 0..n {
                    z[j][m] += lin.slope * phi[j][m] * lin.w[m];
                }
            }
            if let Some((wx, wy)) = &pb.grad_w[j] {
                let (dx, dy) = self.gradient(&phi_hat[j]);
                for m in 0..n {
                    z[j][m] += lin.slope * (dx[m] * wx[m] + dy[m] * wy[m]);
                }
                grads[j] = Some((dx, dy));
            }
        }

        let q: Vec<Vec<f64>> = (0..s)
            .map(|i| {
                let mut qi = if with_rhs {
                    pb.rhs[i].q.values().to_vec()
                } else {
                    vec![0.0; n]
                };
                for j in 0..s {
                    let c = pb.theta * pb.a[i][j];
                    if c != 0.0 {
                        for m in 0..n {
                            qi[m] += c * z[j][m];
                        }
                    }
                }
                qi
            })
            .collect();

        let nu = (0..s)
            .map(|i| {
                let extra = pb.terms[i].lin.as_ref().map(|lin| match &grads[i] {
                    Some((dx, dy)) => Extra::Flux {
                        slope: lin.slope,
                        q: &lin.q,
                        dx,
                        dy,
                    },
                    None => Extra::Point {
                        slope: lin.slope,
                        q: &lin.q,
                        phi: &phi[i],
                    },
                });
                let mut col = self.column(&pb.terms[i].coupling, &q[i], extra);
                for m in 0..n {
                    col[m] += phi_hat[i][m] * self.l_hat[m];
                }
                col
            })
            .collect();
        Sweep { phi, q, nu }
    }

    /// `max |Y(ν) − R − θ A K(Y(ν))|` given `r = ν(Y(ν)) − ν`, which equals
    /// `θ Σ_j a_ij (G r_j, c_j*(G r_j))`.
    fn y_residual(&self, pb: &Problem<'_>, r: &[Spectrum]) -> f64 {
        let s = r.len();
        let gr: Vec<(Vec<f64>, Vec<f64>)> = pb
            .terms
            .iter()
            .zip(r)
            .map(|(t, rj)| {
                let gr_hat: Spectrum = rj.iter().zip(&self.g_hat).map(|(z, g)| z * g).collect();
                self.adjoint(&t.coupling, &gr_hat)
            })
            .collect();
        let mut res = 0.0f64;
        for i in 0..s {
            for m in 0..self.len() {
                let (mut rp, mut rq) = (0.0, 0.0);
                for j in 0..s {
                    rp += pb.a[i][j] * gr[j].0[m];
                    rq += pb.a[i][j] * gr[j].1[m];
                }
                res = res.max(rp.abs()).max(rq.abs());
            }
        }
        pb.theta * res
    }

    /// Preconditioner shifts `(s0, s1)` and a bound on the coupling part of
    /// the operator (`max g²`, `max |p|²`).
    fn shifts(terms: &[StageTerm]) -> (f64, f64, f64, f64) {
        let (mut lo0, mut hi0) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut b0, mut b1) = (0.0f64, 0.0f64);
        for t in terms {
            if let Some(g) = &t.coupling.g {
                for (m, &v) in g.values().iter().enumerate() {
                    let e = t.lin.as_ref().map_or(0.0, |l| l.slope * l.q[m]);
                    lo0 = lo0.min(v * v + e);
                    hi0 = hi0.max(v * v + e);
                    b0 = b0.max(v * v + e.abs());
                }
            }
            if let Some([px, py]) = &t.coupling.p {
                for (m, (a, b)) in px.values().iter().zip(py.values()).enumerate() {
                    let e = t.lin.as_ref().map_or(0.0, |l| l.slope * l.q[m]);
                    let p2 = a * a + b * b;
                    // eigenvalues of p pᵀ + e I
                    lo1 = lo1.min(e.min(p2 + e));
                    hi1 = hi1.max(e.max(p2 + e));
                    b1 = b1.max(p2 + e.abs());
                }
            }
        }
        let mid = |lo: f64, hi: f64| if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 };
        (mid(lo0, hi0), mid(lo1, hi1), b0, b1)
    }

    /// Solves the coupled stage problem described in the module docs.
    ///
    /// Stops once the stage residual is below `base_tol` plus a round-off
    /// allowance proportional to `θ ‖operator‖ ‖Y‖`. With `inexact`, a
    /// stalled solve that at least halved the residual is returned as is.
    pub fn solve_stages(
        &self,
        theta: f64,
        a: &[Vec<f64>],
        terms: &[StageTerm],
        rhs: &[QuadState],
        base_tol: f64,
        max_iters: usize,
        guess: Option<&[Spectrum]>,
        inexact: bool,
    ) -> Result<StageSolution> {
        let s = rhs.len();
        assert!(s >= 1 && a.len() == s && terms.len() == s);
        let n = self.len();
        for r in rhs {
            if *r.grid() != self.grid {
                return Err(Error::GridMismatch);
            }
            r.ensure_finite("implicit solve right-hand side")?;
        }

        let (s0, s1, b0, b1) = Self::shifts(terms);
        let pinv = self.preconditioner(theta, a, s0, s1);
        let a_abs_max = a
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let sigma_max = (0..n)
            .map(|m| self.g_hat[m].abs() * (self.l_hat[m] + b0 + b1 * self.k2[m]))
            .fold(0.0, f64::max);

        let pb = Problem {
            theta,
            a,
            terms,
            rhs,
            r_phi_hat: rhs.iter().map(|r| self.fft.forward(r.phi.values())).collect(),
            grad_w: terms
                .iter()
                .map(|t| match (&t.lin, &t.coupling.p) {
                    (Some(l), Some(_)) => Some(self.gradient(&self.fft.forward(&l.w))),
                    _ => None,
                })
                .collect(),
        };

        let mut x: Vec<Spectrum> = match guess {
            Some(g) if g.len() == s && g.iter().all(|v| v.len() == n) => g.to_vec(),
            _ => vec![vec![Complex64::default(); n]; s],
        };
        let mut iterations = 0;
        let mut last_residual = f64::INFINITY;
        let mut first_residual = f64::INFINITY;
        let mut stalled = 0;
        loop {
            let sw = self.sweep(&pb, &x, true);
            iterations += 1;
            let r: Vec<Spectrum> = sw
                .nu
                .iter()
                .zip(&x)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
                .collect();
            let res = self.y_residual(&pb, &r);
            if !res.is_finite() {
                return Err(Error::LinearSolve {
                    iterations,
                    residual: res,
                    tolerance: base_tol,
                });
            }
            let y_norm = sw
                .phi
                .iter()
                .chain(&sw.q)
                .flat_map(|v| v.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let target = base_tol + 16.0 * MACHINE_EPS * theta * sigma_max * a_abs_max * y_norm;
            if res <= target {
                let mut sol = self.assemble(sw, iterations);
                sol.nu = x;
                return Ok(sol);
            }
            stalled = if res >= 0.5 * last_residual { stalled + 1 } else { 0 };
            let give_up = iterations >= max_iters || stalled >= if inexact { 2 } else { 4 };
            if give_up && inexact && res <= 0.5 * first_residual {
                // good enough as an inexact Newton direction
                let mut sol = self.assemble(sw, iterations);
                sol.nu = x;
                return Ok(sol);
            }
            if give_up {
                return Err(Error::LinearSolve {
                    iterations,
                    residual: res,
                    tolerance: target,
                });
            }
            if first_residual.is_infinite() {
                first_residual = res;
            }
            last_residual = last_residual.min(res);
            let reduction = (0.3 * target / res).clamp(1e-14, 0.1);
            let budget = max_iters - iterations;
            let (dx, used) = self.gmres(&pb, &pinv, r, reduction, budget.min(RESTART));
            iterations += used;
            for (xi, di) in x.iter_mut().zip(dx) {
                for (u, v) in xi.iter_mut().zip(di) {
                    *u += v;
                }
            }
        }
    }

    /// One GMRES cycle for `T d = r`, `T v = v − Φ_h(v)`, right-preconditioned.
    /// Returns the correction and the number of operator applications.
    fn gmres(
        &self,
        pb: &Problem<'_>,
        pinv: &[f64],
        r: Vec<Spectrum>,
        reduction: f64,
        max_dim: usize,
    ) -> (Vec<Spectrum>, usize) {
        let s = r.len();
        let beta = norm(&r);
        let zero = || vec![vec![Complex64::default(); self.len()]; s];
        if beta == 0.0 || max_dim == 0 {
            return (zero(), 0);
        }
        let mut basis: Vec<Vec<Spectrum>> = vec![scale(&r, 1.0 / beta)];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<(f64, f64)> = Vec::new();
        let mut g = vec![beta];
        let mut used = 0;
        while used < max_dim {
            let z = self.apply_pinv(pinv, &basis[used]);
            let phi = self.sweep(pb, &z, false).nu;
            let mut v: Vec<Spectrum> = z
                .iter()
                .zip(&phi)
                .map(|(a, b)| a.iter().zip(b).map(|(u, w)| u - w).collect())
                .collect();
            let mut col = vec![0.0; used + 2];
            for (k, bk) in basis.iter().enumerate() {
                let hk = dot(bk, &v);
                col[k] = hk;
                axpy(&mut v, -hk, bk);
            }
            let hn = norm(&v);
            col[used + 1] = hn;
            for (k, &(c, sn)) in cs.iter().enumerate() {
                let (a, b) = (col[k], col[k + 1]);
                col[k] = c * a + sn * b;
                col[k + 1] = -sn * a + c * b;
            }
            let (a, b) = (col[used], col[used + 1]);
            let d = a.hypot(b);
            let (c, sn) = if d == 0.0 { (1.0, 0.0) } else { (a / d, b / d) };
            col[used] = d;
            col[used + 1] = 0.0;
            cs.push((c, sn));
            let gk = g[used];
            g[used] = c * gk;
            g.push(-sn * gk);
            h.push(col);
            used += 1;
            if g[used].abs() <= reduction * beta || hn == 0.0 || !hn.is_finite() {
                break;
            }
            basis.push(scale(&v, 1.0 / hn));
        }
        // back substitution on the triangular factor
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for j in i + 1..used {
                acc -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
        }
        let mut comb = zero();
        for (yk, bk) in y.iter().zip(&basis) {
            axpy(&mut comb, *yk, bk);
        }
        (self.apply_pinv(pinv, &comb), used)
    }

    fn apply_pinv(&self, pinv: &[f64], v: &[Spectrum]) -> Vec<Spectrum> {
        let s = v.len();
        let n = self.len();
        let mut out = vec![vec![Complex64::default(); n]; s];
        for m in 0..n {
            for i in 0..s {
                let mut acc = Complex64::default();
                for j in 0..s {
                    acc += v[j][m] * pinv[(m * s + i) * s + j];
                }
                out[i][m] = acc;
            }
        }
        out
    }

    fn assemble(&self, sw: Sweep, iterations: usize) -> StageSolution {
        let wrap = |v| Field::from_raw(self.grid, v);
        let y = sw
            .phi
            .into_iter()
            .zip(sw.q)
            .map(|(p, q)| QuadState {
                phi: wrap(p),
                q: wrap(q),
            })
            .collect();
        StageSolution {
            y,
            iterations,
            nu: Vec::new(),
        }
    }

    /// Per-mode inverse of `I − θ ĝ (ℓ + s0 + s1 k²) A`, stored row-major.
    fn preconditioner(&self, theta: f64, a: &[Vec<f64>], s0: f64, s1: f64) -> Vec<f64> {
        let s = a.len();
        let n = self.len();
        let mut out = vec![0.0; n * s * s];
        let mut m = [[0.0f64; 3]; 3];
        for idx in 0..n {
            let mu = -theta * self.g_hat[idx] * (self.l_hat[idx] + s0 + s1 * self.k2[idx]);
            for i in 0..s {
                for j in 0..s {
                    m[i][j] = mu * a[i][j] + if i == j { 1.0 } else { 0.0 };
                }
            }
            let inv = invert_small(&m, s);
            let ok = inv[..s].iter().all(|r| r[..s].iter().all(|v| v.is_finite() && v.abs() < 1e8));
            for i in 0..s {
                for j in 0..s {
                    // a singular block (possible for s = 1 with an indefinite
                    // shift) falls back to the identity
                    out[(idx * s + i) * s + j] = match (ok, i == j) {
                        (true, _) => inv[i][j],
                        (false, true) => 1.0,
                        (false, false) => 0.0,
                    };
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Extra<'a> {
    Point {
        slope: f64,
        q: &'a [f64],
        phi: &'a [f64],
    },
    Flux {
        slope: f64,
        q: &'a [f64],
        dx: &'a [f64],
        dy: &'a [f64],
    },
}

/// Real inner product of Hermitian-symmetric spectra.
fn dot(u: &[Spectrum], v: &[Spectrum]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>())
        .sum()
}

fn norm(u: &[Spectrum]) -> f64 {
    dot(u, u).sqrt()
}

fn scale(u: &[Spectrum], c: f64) -> Vec<Spectrum> {
    u.iter().map(|a| a.iter().map(|x| x * c).collect()).collect()
}

fn axpy(y: &mut [Spectrum], c: f64, x: &[Spectrum]) {
    for (a, b) in y.iter_mut().zip(x) {
        for (u, v) in a.iter_mut().zip(b) {
            *u += v * c;
        }
    }
}

/// Gauss-Jordan inverse of the leading `s × s` block (`s ≤ 3`), partial
/// pivoting.
pub(crate) fn invert_small(m: &[[f64; 3]; 3], s: usize) -> [[f64; 3]; 3] {
    let mut a = *m;
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate().take(s) {
        row[i] = 1.0;
    }
    for col in 0..s {
        let piv = (col..s)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..s {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..s {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..s {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

/// Solves `x = rhs + θ N(frozen) B x` for a single state.
pub fn solve_implicit(
    sys: &QuadSystem,
    frozen: &QuadState,
    theta: f64,
    rhs: &QuadState,
    tol: LinearTolerance,
) -> Result<QuadState> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::param("theta", "must be positive and finite"));
    }
    frozen.check_grid(rhs)?;
    if *frozen.grid() != *sys.grid() {
        return Err(Error::GridMismatch);
    }
    frozen.ensure_finite("frozen state")?;
    let solver = ImplicitSolver::new(sys);
    let term = StageTerm::frozen(sys.coupling_at(&frozen.phi));
    let sol = solver.solve_stages(
        theta,
        &[vec![1.0]],
        std::slice::from_ref(&term),
        std::slice::from_ref(rhs),
        tol.eps * (1.0 + rhs.max_abs()),
        tol.max_iters,
        None,
        false,
    )?;
    Ok(sol.y.into_iter().next().unwrap())
}
