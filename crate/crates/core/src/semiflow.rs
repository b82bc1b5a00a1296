//! Time integration of `m u_tt + γ u_t + A u = f(x, u)` in `Z₀ = H¹₀ × L²`.
//!
//! The default physical setting is `m = 1`, `γ = α`. The scheme is linearly
//! implicit: Crank–Nicolson on the linear part, the nonlinearity evaluated
//! explicitly at the predicted midpoint `u + (τ/2) v`. It is a one-step map,
//! second-order accurate, and for `f ≡ 0` it is unconditionally stable and
//! dissipates the linear energy exactly like the continuous flow.

use nalgebra::DVector;

pub use crate::state::State;

use crate::banded::BandCholesky;
use crate::discretization::{smallest_eigenvalue, EllipticOperator};
use crate::error::{Error, Result};
use crate::model::NonlinearModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    LinearlyImplicitMidpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Final time `T`.
    pub horizon: f64,
    /// Damping coefficient `γ` (called α in the unit-inertia form).
    pub alpha: f64,
    /// Coefficient `m` of `u_tt`; 1 for the standard damped wave equation.
    pub inertia: f64,
    pub scheme: Scheme,
    /// Trajectories whose energy norm exceeds this are cut off and flagged.
    pub energy_ceiling: f64,
    /// Store every `record_stride`-th step.
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, horizon: f64, alpha: f64) -> Self {
        Self {
            dt,
            horizon,
            alpha,
            inertia: 1.0,
            scheme: Scheme::LinearlyImplicitMidpoint,
            energy_ceiling: 1e6,
            record_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_inertia(mut self, inertia: f64) -> Self {
        self.inertia = inertia;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.inertia > 0.0) {
            return Err(Error::invalid("inertia must be positive"));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::invalid("horizon must be finite and nonnegative"));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record stride must be at least 1"));
        }
        if !(self.energy_ceiling > 0.0) {
            return Err(Error::invalid("energy ceiling must be positive"));
        }
        Ok(())
    }

    /// Number of steps, `round(T / dt)`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Linear part of `x' = -s x + y`, `y' = -κ A x + c x - γ y + g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinearPart {
    pub shift: f64,
    pub kappa: f64,
    pub coupling: f64,
    pub damping: f64,
}

impl LinearPart {
    pub fn wave(inertia: f64, damping: f64) -> Self {
        Self {
            shift: 0.0,
            kappa: 1.0 / inertia,
            coupling: 0.0,
            damping: damping / inertia,
        }
    }

    /// The unit-inertia system written in `R_δ` coordinates `(u, v + δ u)`.
    pub fn shifted(alpha: f64, delta: f64) -> Self {
        Self {
            shift: delta,
            kappa: 1.0,
            coupling: delta * (alpha - delta),
            damping: alpha - delta,
        }
    }
}

/// One Crank–Nicolson step of a [`LinearPart`] with explicit forcing.
#[derive(Debug, Clone)]
pub(crate) struct LinearStepper<'a> {
    op: &'a EllipticOperator,
    lp: LinearPart,
    tau: f64,
    chol: BandCholesky,
    rhs_scale: f64,
}

impl<'a> LinearStepper<'a> {
    pub fn new(op: &'a EllipticOperator, lp: LinearPart, tau: f64) -> Result<Self> {
        let (s, k, c, g) = (lp.shift, lp.kappa, lp.coupling, lp.damping);
        let diag = (1.0 + 0.5 * tau * g) * (1.0 + 0.5 * tau * s) - 0.25 * tau * tau * c;
        let lead = 0.25 * tau * tau * k;
        let sigma = diag / lead;
        let shift = vec![sigma; op.len()];
        let chol = op.to_band(Some(&shift)).cholesky().map_err(|e| {
            Error::Numerical(format!(
                "implicit step matrix not definite ({e}); reduce dt"
            ))
        })?;
        Ok(Self {
            op,
            lp,
            tau,
            chol,
            rhs_scale: 1.0 / lead,
        })
    }

    /// Predicted midpoint of the first component, `x + (τ/2) x'` without forcing.
    pub fn predict_mid(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let h = 0.5 * self.tau;
        x * (1.0 - h * self.lp.shift) + y * h
    }

    /// Advances `(x, y)` in place with forcing `g` added to `y'`.
    pub fn step(&self, x: &mut DVector<f64>, y: &mut DVector<f64>, g: Option<&DVector<f64>>) {
        let LinearPart {
            shift: s,
            kappa: k,
            coupling: c,
            damping: gm,
        } = self.lp;
        let tau = self.tau;
        let h = 0.5 * tau;
        let ax = self.op.apply(x);
        let r1 = &*x * (1.0 - h * s) + &*y * h;
        let mut r2 = (ax * (-k) + &*x * c) * h + &*y * (1.0 - h * gm);
        if let Some(g) = g {
            r2.axpy(tau, g, 1.0);
        }
        let ar1 = self.op.apply(&r1);
        let mut rhs = r2 * (1.0 + h * s) - (ar1 * k - &r1 * c) * h;
        rhs *= self.rhs_scale;
        self.chol.solve_in_place(rhs.as_mut_slice());
        *x = (r1 + &rhs * h) / (1.0 + h * s);
        *y = rhs;
    }
}

/// Base-flow stepper for `m u_tt + γ u_t + A u = f(x, u)`.
#[derive(Debug, Clone)]
pub struct WaveStepper<'a> {
    linear: LinearStepper<'a>,
    model: &'a NonlinearModel,
    inertia: f64,
}

impl<'a> WaveStepper<'a> {
    pub fn new(
        op: &'a EllipticOperator,
        model: &'a NonlinearModel,
        cfg: &IntegratorConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        model.check_grid(op.grid())?;
        let lp = LinearPart::wave(cfg.inertia, cfg.alpha);
        Ok(Self {
            linear: LinearStepper::new(op, lp, cfg.dt)?,
            model,
            inertia: cfg.inertia,
        })
    }

    /// Displacement at which the nonlinearity is sampled for the step from `s`.
    pub fn midpoint_displacement(&self, s: &State) -> DVector<f64> {
        self.linear.predict_mid(&s.u, &s.v)
    }

    pub fn step(&self, s: &mut State) {
        let mid = self.midpoint_displacement(s);
        let g = DVector::from_fn(mid.len(), |i, _| self.model.f(i, mid[i]) / self.inertia);
        self.linear.step(&mut s.u, &mut s.v, Some(&g));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Set when the run was cut off by the energy ceiling.
    pub escaped: bool,
    pub config: IntegratorConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    /// Spacing between stored samples.
    pub fn sample_interval(&self) -> f64 {
        self.config.dt * self.config.record_stride as f64
    }
}

fn coercivity_error(op: &EllipticOperator) -> Error {
    let lambda1 = smallest_eigenvalue(op);
    let (_, vecs) = crate::linalg::symmetric_eigen_ascending(op.to_dense());
    Error::CoercivityViolated {
        lambda1,
        peak_index: vecs.column(0).iamax(),
    }
}

/// Integrates from `u0` over `[0, T]`.
///
/// Stops early (with `escaped = true`) when the energy norm passes the
/// configured ceiling; the last stored state is the first one above it.
pub fn integrate(
    u0: &State,
    op: &EllipticOperator,
    model: &NonlinearModel,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    u0.check_len(op.len())?;
    if !op.is_coercive() {
        return Err(coercivity_error(op));
    }
    if !u0.is_finite() {
        return Err(Error::invalid("initial state is not finite"));
    }
    let stepper = WaveStepper::new(op, model, cfg)?;
    let steps = cfg.steps();
    let mut times = vec![0.0];
    let mut states = vec![u0.clone()];
    let mut s = u0.clone();
    let mut escaped = false;
    for k in 1..=steps {
        stepper.step(&mut s);
        let over = !s.is_finite() || op.energy_norm(&s) > cfg.energy_ceiling;
        if k % cfg.record_stride == 0 || k == steps || over {
            times.push(k as f64 * cfg.dt);
            states.push(s.clone());
        }
        if over {
            escaped = true;
            break;
        }
    }
    Ok(Trajectory {
        times,
        states,
        escaped,
        config: cfg.clone(),
    })
}

/// `E(U) = ½ a(u, u) + ½ ‖v‖² - ∫ F(x, u)`; the `F` term is dropped when the
/// model has no antiderivative.
pub fn energy(s: &State, op: &EllipticOperator, model: &NonlinearModel) -> f64 {
    energy_with_inertia(s, op, model, 1.0)
}

/// Energy with `½ m ‖v‖²` kinetic term.
pub fn energy_with_inertia(
    s: &State,
    op: &EllipticOperator,
    model: &NonlinearModel,
    inertia: f64,
) -> f64 {
    let pot: f64 =
        s.u.iter()
            .enumerate()
            .map(|(i, &u)| model.antiderivative(i, u).unwrap_or(0.0))
            .sum::<f64>()
            * op.grid().cell_volume();
    0.5 * op.a_form(&s.u, &s.u) + 0.5 * inertia * op.l2_inner(&s.v, &s.v) - pot
}

/// Per-interval residuals `|ΔE/Δt + γ ‖v_mid‖²| / (γ ‖v_mid‖²)` of the energy
/// identity, with `v_mid` the average of consecutive stored velocities.
///
/// Meaningful only for stride-1 trajectories.
pub fn energy_rate_residuals(
    traj: &Trajectory,
    op: &EllipticOperator,
    model: &NonlinearModel,
) -> Vec<f64> {
    let m = traj.config.inertia;
    let gamma = traj.config.alpha;
    let e: Vec<f64> = traj
        .states
        .iter()
        .map(|s| energy_with_inertia(s, op, model, m))
        .collect();
    traj.states
        .windows(2)
        .zip(traj.times.windows(2))
        .zip(e.windows(2))
        .map(|((s, t), e)| {
            let vmid = (&s[0].v + &s[1].v) * 0.5;
            let diss = gamma * op.l2_inner(&vmid, &vmid);
            let rate = (e[1] - e[0]) / (t[1] - t[0]);
            (rate + diss).abs() / diss.max(f64::MIN_POSITIVE)
        })
        .collect()
}

/// Direction of the `t = ε^{1/2} s` time change between
/// `ε u_tt + u_t + A u = f` and `ǔ_ss + α ǔ_s + A ǔ = f`, `α = ε^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleDirection {
    /// `(u, u_t) ↦ (ǔ, ǔ_s) = (u, ε^{1/2} u_t)`
    Forward,
    /// `(ǔ, ǔ_s) ↦ (u, u_t) = (ǔ, ε^{-1/2} ǔ_s)`
    Inverse,
}

pub fn rescale(direction: RescaleDirection, s: &State, epsilon: f64) -> Result<State> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let factor = match direction {
        RescaleDirection::Forward => epsilon.sqrt(),
        RescaleDirection::Inverse => 1.0 / epsilon.sqrt(),
    };
    Ok(State {
        u: s.u.clone(),
        v: &s.v * factor,
    })
}

/// `α = ε^{-1/2}`
pub fn alpha_for_epsilon(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    Ok(1.0 / epsilon.sqrt())
}

/// Suprema over a sample of states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SupNorms {
    pub u_linf: f64,
    pub u_lr: f64,
    pub u_h10: f64,
    pub v_l2: f64,
}

impl SupNorms {
    pub fn of(states: &[State], op: &EllipticOperator, r: f64) -> Self {
        let grid = op.grid();
        states.iter().fold(SupNorms::default(), |acc, s| SupNorms {
            u_linf: acc.u_linf.max(s.u.amax()),
            u_lr: acc.u_lr.max(grid.lp_norm(s.u.as_slice(), r)),
            u_h10: acc.u_h10.max(op.h10_norm(&s.u)),
            v_l2: acc.v_l2.max(op.l2_inner(&s.v, &s.v).sqrt()),
        })
    }
}

/// Post-transient samples standing in for an invariant set.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSample {
    pub states: Vec<State>,
    pub times: Vec<f64>,
    pub burn_in: f64,
    pub sup: SupNorms,
}

/// Default burn-in, 50 damping times.
pub fn default_burn_in(alpha: f64) -> f64 {
    50.0 / alpha
}

/// Runs from `u0` for `burn_in` (default `50/α`), then stores `sample_count`
/// states one damping time `1/α` apart (rounded to whole steps).
pub fn sample_invariant_set(
    u0: &State,
    op: &EllipticOperator,
    model: &NonlinearModel,
    cfg: &IntegratorConfig,
    burn_in: Option<f64>,
    sample_count: usize,
) -> Result<InvariantSample> {
    cfg.validate()?;
    u0.check_len(op.len())?;
    if sample_count == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    if !op.is_coercive() {
        return Err(coercivity_error(op));
    }
    let burn_in = burn_in.unwrap_or_else(|| default_burn_in(cfg.alpha));
    let stepper = WaveStepper::new(op, model, cfg)?;
    let burn_steps = (burn_in / cfg.dt).round() as usize;
    let stride = ((1.0 / cfg.alpha) / cfg.dt).round().max(1.0) as usize;
    let mut s = u0.clone();
    let mut states = Vec::with_capacity(sample_count);
    let mut times = Vec::with_capacity(sample_count);
    let total = burn_steps + stride * (sample_count - 1);
    for k in 0..=total {
        if k > 0 {
            stepper.step(&mut s);
        }
        let norm = op.energy_norm(&s);
        if !s.is_finite() || norm > cfg.energy_ceiling {
            return Err(Error::FiniteTimeEscape {
                time: k as f64 * cfg.dt,
                norm,
            });
        }
        if k >= burn_steps && (k - burn_steps).is_multiple_of(stride) {
            states.push(s.clone());
            times.push(k as f64 * cfg.dt);
        }
    }
    let sup = SupNorms::of(&states, op, model.r());
    Ok(InvariantSample {
        states,
        times,
        burn_in,
        sup,
    })
}
