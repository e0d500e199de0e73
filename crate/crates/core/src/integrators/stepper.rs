//! Time steppers.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use super::bdf::{bdf_coeffs, BdfCoeffs};
use super::linear::{
    invert_small, ImplicitSolver, LinearTolerance, Linearization, Spectrum, StageTerm,
};
use super::tableau::{gauss_tableau, ButcherTableau};
use crate::eq::{QuadState, QuadSystem};
use crate::error::{Error, Result};
use crate::grid::Field;

/// The time discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Crank-Nicolson correction with the extrapolated predictor.
    Lcn,
    /// Crank-Nicolson correction with an iterated predictor.
    Icn,
    /// BDF2 correction with the extrapolated predictor.
    Lbdf2,
    /// BDF2 correction with an iterated predictor.
    Ibdf2,
    /// `k`-step BDF with order-`k` extrapolated coefficients, `k` in `1..=6`.
    Bdf(usize),
    /// `s`-stage Gauss collocation, `s` in `1..=3`.
    Gauss(usize),
}

impl Scheme {
    /// Formal order of accuracy.
    pub fn order(&self) -> usize {
        match *self {
            Scheme::Lcn | Scheme::Icn | Scheme::Lbdf2 | Scheme::Ibdf2 => 2,
            Scheme::Bdf(k) => k,
            Scheme::Gauss(s) => 2 * s,
        }
    }

    /// Number of past levels a regular step reads.
    pub fn levels(&self) -> usize {
        match *self {
            Scheme::Lcn | Scheme::Icn | Scheme::Lbdf2 | Scheme::Ibdf2 => 2,
            Scheme::Bdf(k) => k,
            Scheme::Gauss(_) => 1,
        }
    }

    /// Which discrete energy law the scheme satisfies.
    pub fn energy_law(&self) -> EnergyLaw {
        match *self {
            Scheme::Lcn | Scheme::Icn | Scheme::Gauss(_) => EnergyLaw::Quadratized,
            Scheme::Lbdf2 | Scheme::Ibdf2 => EnergyLaw::ModifiedBdf2,
            Scheme::Bdf(_) => EnergyLaw::None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Scheme::Bdf(k) if !(1..=6).contains(&k) => {
                Err(Error::Unsupported(format!("BDF order {k} (supported: 1 to 6)")))
            }
            Scheme::Gauss(s) if !(1..=3).contains(&s) => Err(Error::Unsupported(format!(
                "Gauss collocation with {s} stages (supported: 1, 2, 3)"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Lcn => f.write_str("lcn"),
            Scheme::Icn => f.write_str("icn"),
            Scheme::Lbdf2 => f.write_str("lbdf2"),
            Scheme::Ibdf2 => f.write_str("ibdf2"),
            Scheme::Bdf(k) => write!(f, "bdf{k}"),
            Scheme::Gauss(s) => write!(f, "gauss{s}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `lcn`, `icn`, `lbdf2`, `ibdf2`, `bdf<k>`, `gauss<s>`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownName {
            kind: "scheme",
            name: s.to_string(),
        };
        let scheme = match s {
            "lcn" => Scheme::Lcn,
            "icn" => Scheme::Icn,
            "lbdf2" => Scheme::Lbdf2,
            "ibdf2" => Scheme::Ibdf2,
            _ => {
                if let Some(k) = s.strip_prefix("bdf") {
                    Scheme::Bdf(k.parse().map_err(|_| unknown())?)
                } else if let Some(n) = s.strip_prefix("gauss") {
                    Scheme::Gauss(n.parse().map_err(|_| unknown())?)
                } else {
                    return Err(unknown());
                }
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Discrete energy law a scheme is known to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyLaw {
    /// `½‖Ψ‖²_B − A` is non-increasing.
    Quadratized,
    /// `¼(‖Ψⁿ‖²_B + ‖2Ψⁿ − Ψⁿ⁻¹‖²_B) − A` is non-increasing.
    ModifiedBdf2,
    None,
}

/// How `Icn`/`Ibdf2` compute the predicted state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predictor {
    /// `2Ψⁿ − Ψⁿ⁻¹` (turns the iterated schemes into their linear variants).
    Extrapolation,
    /// Repeated corrector solves with the previous iterate frozen.
    Frozen,
    /// Constant-coefficient part implicit, the rest explicit at the previous
    /// iterate.
    Split,
}

impl Predictor {
    /// Conventional case numbers: 1, 2, 3.
    pub fn from_case(case: u32) -> Result<Self> {
        match case {
            1 => Ok(Predictor::Extrapolation),
            2 => Ok(Predictor::Frozen),
            3 => Ok(Predictor::Split),
            _ => Err(Error::param("predictor", "case must be 1, 2 or 3")),
        }
    }

    pub fn case(&self) -> u32 {
        match self {
            Predictor::Extrapolation => 1,
            Predictor::Frozen => 2,
            Predictor::Split => 3,
        }
    }
}

/// Scheme choice and solver tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    /// Predictor for `Icn`/`Ibdf2`; `Lcn`/`Lbdf2` always extrapolate.
    pub predictor: Predictor,
    /// Maximum predictor iterations `N`.
    pub max_corrector_iters: usize,
    /// Predictor stopping tolerance `ε0` on `‖Ψ_{i+1} − Ψ_i‖∞`.
    pub eps0: f64,
    /// Stage iteration tolerance (see [`Stepper`]).
    pub eps_stage: f64,
    pub max_stage_iters: usize,
    pub linear: LinearTolerance,
}

impl StepperConfig {
    pub fn new(scheme: Scheme, dt: f64) -> Self {
        StepperConfig {
            scheme,
            dt,
            predictor: Predictor::Split,
            max_corrector_iters: 5,
            eps0: 1e-12,
            eps_stage: 1e-12,
            max_stage_iters: 200,
            linear: LinearTolerance::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", "must be positive and finite"));
        }
        for (name, v) in [
            ("eps0", self.eps0),
            ("eps_stage", self.eps_stage),
            ("eps_lin", self.linear.eps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if self.max_corrector_iters == 0 || self.max_stage_iters == 0 || self.linear.max_iters == 0
        {
            return Err(Error::param("max_iters", "iteration limits must be >= 1"));
        }
        Ok(())
    }

    /// The predictor actually used by the configured scheme.
    pub fn effective_predictor(&self) -> Predictor {
        match self.scheme {
            Scheme::Lcn | Scheme::Lbdf2 => Predictor::Extrapolation,
            _ => self.predictor,
        }
    }
}

/// Work counters of the most recent step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub linear_iterations: usize,
    pub predictor_iterations: usize,
    pub stage_iterations: usize,
}

/// Advances a quadratized system in time.
///
/// Two-level schemes obtain their second level with a split-predicted
/// Crank-Nicolson step; `Bdf(k)` for `k ≥ 3` bootstraps with Gauss
/// collocation of `⌈k/2⌉` stages at the same step size.
///
/// Gauss stages are found by Newton iteration on the stage equations,
/// backtracking while the residual grows. Iteration stops when the stage
/// increment `max_i ‖Y_i^{r+1} − Y_i^r‖∞` drops below
/// `eps_stage (1 + ‖Ψⁿ‖∞)` plus a round-off allowance.
pub struct Stepper {
    sys: QuadSystem,
    config: StepperConfig,
    solver: ImplicitSolver,
    tableau: Option<ButcherTableau>,
    bdf: Option<BdfCoeffs>,
    /// Most recent first.
    history: VecDeque<QuadState>,
    /// Last single-stage chemical potential, reused as a warm start.
    warm: Option<Vec<Spectrum>>,
    /// Continuation increment that last succeeded, if the previous Gauss
    /// step needed continuation.
    gauss_increment: Option<f64>,
    steps: usize,
    t0: f64,
    stats: StepStats,
}

impl Stepper {
    pub fn new(sys: QuadSystem, psi0: QuadState, config: StepperConfig) -> Result<Self> {
        config.validate()?;
        if psi0.grid() != sys.grid() {
            return Err(Error::GridMismatch);
        }
        psi0.ensure_finite("initial state")?;
        let (tableau, bdf) = match config.scheme {
            Scheme::Gauss(s) => (Some(gauss_tableau(s)?), None),
            Scheme::Bdf(k) if k >= 3 => (Some(gauss_tableau(k.div_ceil(2))?), Some(bdf_coeffs(k)?)),
            Scheme::Bdf(k) => (None, Some(bdf_coeffs(k)?)),
            _ => (None, None),
        };
        let solver = ImplicitSolver::new(&sys);
        let mut history = VecDeque::with_capacity(config.scheme.levels() + 1);
        history.push_front(psi0);
        Ok(Stepper {
            sys,
            config,
            solver,
            tableau,
            bdf,
            history,
            warm: None,
            gauss_increment: None,
            steps: 0,
            t0: 0.0,
            stats: StepStats::default(),
        })
    }

    /// Sets the time of the initial state (default 0).
    pub fn with_start_time(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn system(&self) -> &QuadSystem {
        &self.sys
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn state(&self) -> &QuadState {
        &self.history[0]
    }

    /// The level before the current one, once at least one step was taken.
    pub fn previous(&self) -> Option<&QuadState> {
        self.history.get(1)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.config.dt
    }

    pub fn last_stats(&self) -> StepStats {
        self.stats
    }

    /// Advances one step. On error the state is left unchanged.
    pub fn step(&mut self) -> Result<()> {
        self.stats = StepStats::default();
        let have = self.history.len();
        let next = match self.config.scheme {
            Scheme::Lcn | Scheme::Icn if have < 2 => self.startup_cn()?,
            Scheme::Lbdf2 | Scheme::Ibdf2 if have < 2 => self.startup_cn()?,
            Scheme::Bdf(2) if have < 2 => self.startup_cn()?,
            Scheme::Bdf(k) if have < k => {
                let t = self.tableau.clone().expect("startup tableau");
                self.step_gauss(&t)?
            }
            Scheme::Lcn | Scheme::Icn => self.step_cn()?,
            Scheme::Lbdf2 | Scheme::Ibdf2 => self.step_bdf2()?,
            Scheme::Bdf(_) => self.step_bdfk()?,
            Scheme::Gauss(_) => {
                let t = self.tableau.clone().expect("gauss tableau");
                self.step_gauss(&t)?
            }
        };
        next.ensure_finite("time step result")?;
        self.history.push_front(next);
        self.history.truncate(self.config.scheme.levels().max(2));
        self.steps += 1;
        Ok(())
    }

    /// Steps until `time() >= t_end` (within a hundredth of a step).
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.time() < t_end - 0.01 * self.config.dt {
            self.step()?;
        }
        Ok(())
    }

    /// Solves `y = rhs + θ N(frozen) B y`.
    fn solve(&mut self, theta: f64, frozen: &QuadState, rhs: &QuadState) -> Result<QuadState> {
        let term = StageTerm::frozen(self.sys.coupling_at(&frozen.phi));
        let tol = self.config.linear;
        let sol = self.solver.solve_stages(
            theta,
            &[vec![1.0]],
            std::slice::from_ref(&term),
            std::slice::from_ref(rhs),
            tol.eps * (1.0 + rhs.max_abs()),
            tol.max_iters,
            self.warm.as_deref(),
            false,
        )?;
        self.stats.linear_iterations += sol.iterations;
        self.warm = Some(sol.nu);
        Ok(sol.y.into_iter().next().unwrap())
    }

    /// `N2(m) B m`.
    fn n2b(&self, m: &QuadState) -> QuadState {
        let c = self.sys.coupling_at(&m.phi);
        let bm = QuadState {
            phi: self.sys.l_symbol().apply_unchecked(&m.phi),
            q: m.q.clone(),
        };
        self.sys.apply_n2_with(&c, &bm)
    }

    /// Crank-Nicolson correction `Ψ^{n+1} = 2y − Ψⁿ` with
    /// `y = Ψⁿ + Δt/2 N((Ψ* + Ψⁿ)/2) B y`.
    fn cn_correct(&mut self, psi_n: &QuadState, predicted: &QuadState) -> Result<QuadState> {
        let mid = QuadState::linear_combination(&[(0.5, predicted), (0.5, psi_n)]);
        let y = self.solve(0.5 * self.config.dt, &mid, psi_n)?;
        Ok(QuadState::linear_combination(&[(2.0, &y), (-1.0, psi_n)]))
    }

    /// Split predictor sweep for CN: `N1` implicit, `N2 B` explicit at `m`.
    fn cn_split(&self, psi_n: &QuadState, m: &QuadState) -> QuadState {
        let theta = 0.5 * self.config.dt;
        let mut rhs = psi_n.clone();
        rhs.axpy(theta, &self.n2b(m));
        let y = self.solver.solve_n1(theta, &rhs);
        QuadState::linear_combination(&[(2.0, &y), (-1.0, psi_n)])
    }

    fn startup_cn(&mut self) -> Result<QuadState> {
        let psi0 = self.history[0].clone();
        let predicted = self.cn_split(&psi0, &psi0);
        self.stats.predictor_iterations = 1;
        self.cn_correct(&psi0, &predicted)
    }

    fn step_cn(&mut self) -> Result<QuadState> {
        let psi_n = self.history[0].clone();
        let psi_nm1 = &self.history[1];
        let mut cur = QuadState::linear_combination(&[(2.0, &psi_n), (-1.0, psi_nm1)]);
        let predictor = self.config.effective_predictor();
        if predictor != Predictor::Extrapolation {
            cur = self.iterate_predictor(cur, |st, m| match predictor {
                Predictor::Frozen => st.cn_correct(&psi_n, m),
                _ => {
                    let mid = QuadState::linear_combination(&[(0.5, m), (0.5, &psi_n)]);
                    Ok(st.cn_split(&psi_n, &mid))
                }
            })?;
        }
        self.cn_correct(&psi_n, &cur)
    }

    fn step_bdf2(&mut self) -> Result<QuadState> {
        let psi_n = self.history[0].clone();
        let psi_nm1 = self.history[1].clone();
        let theta = 2.0 * self.config.dt / 3.0;
        let rhs = QuadState::linear_combination(&[(4.0 / 3.0, &psi_n), (-1.0 / 3.0, &psi_nm1)]);
        let mut cur = QuadState::linear_combination(&[(2.0, &psi_n), (-1.0, &psi_nm1)]);
        let predictor = self.config.effective_predictor();
        if predictor != Predictor::Extrapolation {
            cur = self.iterate_predictor(cur, |st, m| match predictor {
                Predictor::Frozen => st.solve(theta, m, &rhs),
                _ => {
                    let mut r = rhs.clone();
                    r.axpy(theta, &st.n2b(m));
                    Ok(st.solver.solve_n1(theta, &r))
                }
            })?;
        }
        self.solve(theta, &cur, &rhs)
    }

    fn step_bdfk(&mut self) -> Result<QuadState> {
        let c = self.bdf.clone().expect("bdf coefficients");
        let l0 = c.lambda[0];
        let past: Vec<&QuadState> = self.history.iter().take(c.k).collect();
        let rhs_terms: Vec<(f64, &QuadState)> = (1..=c.k)
            .map(|i| (-c.lambda[i] / l0, past[i - 1]))
            .collect();
        let rhs = QuadState::linear_combination(&rhs_terms);
        let ext_terms: Vec<(f64, &QuadState)> =
            (1..=c.k).map(|i| (c.extrap[i - 1], past[i - 1])).collect();
        let frozen = QuadState::linear_combination(&ext_terms);
        self.solve(self.config.dt / l0, &frozen, &rhs)
    }

    /// Runs up to `N` predictor sweeps from `start`. Stops early below `ε0`;
    /// if an increment more than doubles, the sweep is diverging and the
    /// iterate before the growth is returned instead. Milder growth is left
    /// alone: slowly converging sweeps often oscillate by a few percent.
    fn iterate_predictor<F>(&mut self, start: QuadState, mut sweep: F) -> Result<QuadState>
    where
        F: FnMut(&mut Self, &QuadState) -> Result<QuadState>,
    {
        let mut prev: Option<(QuadState, f64)> = None;
        let mut cur = start;
        for i in 0..self.config.max_corrector_iters {
            let next = sweep(self, &cur)?;
            let diff = next.max_abs_diff(&cur);
            if !next.is_finite() || !diff.is_finite() {
                return Ok(prev.map_or(cur, |p| p.0));
            }
            if let Some((before, d)) = &prev {
                if diff > PREDICTOR_GROWTH * *d {
                    return Ok(before.clone());
                }
            }
            self.stats.predictor_iterations = i + 1;
            if diff < self.config.eps0 {
                return Ok(next);
            }
            prev = Some((cur, diff));
            cur = next;
        }
        Ok(cur)
    }

    /// Stage slopes `K(Y_j)` and the residual `F_i = Y_i − Ψⁿ − θ Σ_j a_ij K_j`.
    fn stage_residual(
        &self,
        t: &ButcherTableau,
        theta: f64,
        psi_n: &QuadState,
        y: &[QuadState],
    ) -> (Vec<(Vec<f64>, Vec<f64>)>, Vec<QuadState>, f64) {
        let k: Vec<(Vec<f64>, Vec<f64>)> = y
            .iter()
            .map(|yj| self.solver.slope(&self.sys.coupling_at(&yj.phi), yj))
            .collect();
        let mut worst = 0.0f64;
        let f: Vec<QuadState> = y
            .iter()
            .enumerate()
            .map(|(i, yi)| {
                let mut phi = yi.phi.values().to_vec();
                let mut q = yi.q.values().to_vec();
                for m in 0..phi.len() {
                    let (mut kp, mut kq) = (0.0, 0.0);
                    for (j, (w, z)) in k.iter().enumerate() {
                        kp += t.a[i][j] * w[m];
                        kq += t.a[i][j] * z[m];
                    }
                    phi[m] -= psi_n.phi.values()[m] + theta * kp;
                    q[m] -= psi_n.q.values()[m] + theta * kq;
                    worst = worst.max(phi[m].abs()).max(q[m].abs());
                }
                let g = *psi_n.grid();
                QuadState {
                    phi: Field::from_raw(g, phi),
                    q: Field::from_raw(g, q),
                }
            })
            .collect();
        (k, f, worst)
    }

    /// Newton iteration for `Y_i = Ψⁿ + θ Σ_j a_ij K(Y_j)` from `y`,
    /// backtracking while the residual grows. Gives up early when the
    /// residual stagnates or steps keep being cut back. Returns the stages
    /// and the iteration count.
    fn newton_stages(
        &mut self,
        t: &ButcherTableau,
        theta: f64,
        psi_n: &QuadState,
        mut y: Vec<QuadState>,
    ) -> Result<(Vec<QuadState>, usize)> {
        let target_base = self.config.eps_stage * (1.0 + psi_n.max_abs());
        let lin_max = self.config.linear.max_iters.min(NEWTON_LINEAR_CAP);
        let slope = self.sys.coupling_slope();
        let (mut k, mut f, mut f_norm) = self.stage_residual(t, theta, psi_n, &y);
        let mut norms = vec![f_norm];
        let mut damped = 0;
        let mut last_inc = f64::INFINITY;
        for r in 1..=self.config.max_stage_iters {
            self.stats.stage_iterations += 1;
            let terms: Vec<StageTerm> = y
                .iter()
                .zip(&k)
                .map(|(yj, (w, _))| StageTerm {
                    coupling: self.sys.coupling_at(&yj.phi),
                    lin: Some(Linearization {
                        slope,
                        q: yj.q.values().to_vec(),
                        w: w.clone(),
                    }),
                })
                .collect();
            let rhs: Vec<QuadState> = f.iter().map(|fi| fi.scale(-1.0)).collect();
            let lin_tol = (0.01 * target_base).max(1e-3 * f_norm.min(1.0) * f_norm);
            let sol = self
                .solver
                .solve_stages(theta, &t.a, &terms, &rhs, lin_tol, lin_max, None, true)?;
            self.stats.linear_iterations += sol.iterations;
            let step_norm = sol.y.iter().map(|d| d.max_abs()).fold(0.0, f64::max);
            let k_norm = k
                .iter()
                .flat_map(|(w, z)| w.iter().chain(z))
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let target = target_base + 1e3 * f64::EPSILON * theta * k_norm;

            // backtrack while the residual grows, unless the step is already
            // at the noise level
            let mut alpha = 1.0;
            loop {
                let trial: Vec<QuadState> = y
                    .iter()
                    .zip(&sol.y)
                    .map(|(yi, di)| {
                        let mut v = yi.clone();
                        v.axpy(alpha, di);
                        v
                    })
                    .collect();
                let (k_t, f_t, n_t) = self.stage_residual(t, theta, psi_n, &trial);
                let accept = n_t.is_finite()
                    && (n_t <= (1.0 - 1e-4 * alpha) * f_norm
                        || alpha * step_norm <= target
                        || alpha < 1.0 / 64.0);
                if accept {
                    y = trial;
                    k = k_t;
                    f = f_t;
                    f_norm = n_t;
                    break;
                }
                alpha *= 0.5;
            }
            let prev_inc = std::mem::replace(&mut last_inc, alpha * step_norm);
            if !last_inc.is_finite() {
                break;
            }
            // superlinear contraction: the next increment is below ρ·inc
            let rho = if prev_inc.is_finite() { last_inc / prev_inc } else { 1.0 };
            if alpha == 1.0 && (last_inc <= target || (rho < 0.1 && rho * last_inc <= target)) {
                return Ok((y, r));
            }
            norms.push(f_norm);
            damped = if alpha < 0.25 { damped + 1 } else { 0 };
            let stagnant = r >= 4 && f_norm > 0.5 * norms[r - 4];
            if (damped >= 2 || stagnant) && last_inc > 1e3 * target {
                break;
            }
        }
        Err(Error::StageSolve {
            iterations: self.stats.stage_iterations,
            increment: last_inc,
        })
    }

    /// Gauss collocation step. If Newton from `Ψⁿ` fails, the stage
    /// solution is continued in `θ` from 0 to `Δt` (see [`Self::continue_stages`]).
    fn step_gauss(&mut self, t: &ButcherTableau) -> Result<QuadState> {
        let dt = self.config.dt;
        let psi_n = self.history[0].clone();
        let first = match self.gauss_increment {
            Some(_) => None,
            None => match self.newton_stages(t, dt, &psi_n, self.stage_guess(t)) {
                Ok((y, _)) => return Ok(self.gauss_update(t, &psi_n, &y)),
                Err(e) if e.is_solver_failure() => Some(e),
                Err(e) => return Err(e),
            },
        };
        match self.continue_stages(t, &psi_n) {
            Ok(y) => Ok(self.gauss_update(t, &psi_n, &y)),
            Err(e) => Err(first.unwrap_or(e)),
        }
    }

    /// `Y_i ≈ Ψⁿ + c_i (Ψⁿ − Ψⁿ⁻¹)`, or `Ψⁿ` on the first step.
    fn stage_guess(&self, t: &ButcherTableau) -> Vec<QuadState> {
        let psi_n = &self.history[0];
        match self.history.get(1) {
            Some(prev) => t
                .c
                .iter()
                .map(|&c| QuadState::linear_combination(&[(1.0 + c, psi_n), (-c, prev)]))
                .collect(),
            None => vec![psi_n.clone(); t.stages()],
        }
    }

    /// Continuation of the stage solution along `θ ∈ [0, Δt]`: each level
    /// starts Newton from a linear extrapolation of the previous two; the
    /// increment halves on failure and doubles after an easy solve. The last
    /// increment carries over to the next step.
    fn continue_stages(&mut self, t: &ButcherTableau, psi_n: &QuadState) -> Result<Vec<QuadState>> {
        let dt = self.config.dt;
        let s = t.stages();
        let min_increment = dt * MIN_CONTINUATION_FRACTION;
        let mut inc = self.gauss_increment.map_or(0.25 * dt, |d| 2.0 * d).min(dt);
        let mut prev: Option<(f64, Vec<QuadState>)> = None;
        let mut done = (0.0, vec![psi_n.clone(); s]);
        loop {
            let theta = (done.0 + inc).min(dt);
            let guess: Vec<QuadState> = match &prev {
                Some((tp, yp)) => {
                    let r = (theta - done.0) / (done.0 - tp);
                    done.1
                        .iter()
                        .zip(yp)
                        .map(|(c, p)| QuadState::linear_combination(&[(1.0 + r, c), (-r, p)]))
                        .collect()
                }
                None => done.1.clone(),
            };
            match self.newton_stages(t, theta, psi_n, guess) {
                Ok((y, iters)) => {
                    let step = theta - done.0;
                    prev = Some(std::mem::replace(&mut done, (theta, y)));
                    if theta >= dt {
                        self.gauss_increment = (step < dt).then_some(step);
                        return Ok(done.1);
                    }
                    if iters <= 4 {
                        inc = 2.0 * step;
                    }
                }
                Err(e) if e.is_solver_failure() => {
                    inc = 0.5 * (theta - done.0);
                    if inc < min_increment {
                        self.gauss_increment = None;
                        return Err(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// `Ψⁿ⁺¹ = Ψⁿ + Σ_i b_i Δt k_i` with `Δt k = A⁻¹ (Y − Ψⁿ)`, which keeps the
    /// update consistent with the stage values to round-off.
    fn gauss_update(&self, t: &ButcherTableau, psi_n: &QuadState, y: &[QuadState]) -> QuadState {
        let s = t.stages();
        let mut m = [[0.0f64; 3]; 3];
        for i in 0..s {
            for j in 0..s {
                m[i][j] = t.a[i][j];
            }
        }
        let inv = invert_small(&m, s);
        let mut next = psi_n.clone();
        for (j, yj) in y.iter().enumerate() {
            let d: f64 = (0..s).map(|i| t.b[i] * inv[i][j]).sum();
            let diff = yj.sub(psi_n);
            next.axpy(d, &diff);
        }
        next
    }
}

/// Increment ratio at which a predictor sweep counts as diverging.
const PREDICTOR_GROWTH: f64 = 2.0;
const NEWTON_LINEAR_CAP: usize = 200;
const MIN_CONTINUATION_FRACTION: f64 = 1.0 / 1024.0;
