//! Linearized flow, δ-shifted coordinates and d-volume tracking.
//!
//! Tangent directions live in the shifted coordinates `R_δ (h, k) = (h, k + δ h)`
//! and are advanced with the exact derivative of the base time step, so the
//! discrete tangent map is the Jacobian of the discrete semiflow. Volumes are
//! measured in the `Z₀` energy product; periodic modified Gram–Schmidt keeps
//! the frame well conditioned while the QR diagonals accumulate log-volume.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bounds::nu_alpha;
use crate::discretization::EllipticOperator;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{NonlinearModel, WeightPotential};
use crate::semiflow::{LinearPart, LinearStepper, Trajectory, WaveStepper};
use crate::state::State;

/// `R_δ (u, v) = (u, v + δ u)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTransform {
    pub delta: f64,
}

impl ShiftTransform {
    pub fn new(delta: f64) -> Self {
        Self { delta }
    }

    pub fn inverse(&self) -> Self {
        Self { delta: -self.delta }
    }

    /// `R_a ∘ R_b = R_{a+b}`
    pub fn compose(&self, other: &ShiftTransform) -> Self {
        Self {
            delta: self.delta + other.delta,
        }
    }

    pub fn apply(&self, s: &State) -> State {
        State {
            u: s.u.clone(),
            v: &s.v + &s.u * self.delta,
        }
    }
}

pub fn shift(t: &ShiftTransform, s: &State) -> State {
    t.apply(s)
}

/// `δ* = λ₁ α / (α² + 4 λ₁)`
pub fn delta_star(lambda1: f64, alpha: f64) -> Result<f64> {
    if !(lambda1 > 0.0) || !(alpha > 0.0) {
        return Err(Error::invalid(format!(
            "delta* needs lambda1 > 0 and alpha > 0, got ({lambda1}, {alpha})"
        )));
    }
    Ok(lambda1 * alpha / (alpha * alpha + 4.0 * lambda1))
}

/// Gram matrix `⟨Φ_i, Φ_j⟩_{Z₀}`.
pub fn energy_gram(op: &EllipticOperator, dirs: &[State]) -> DMatrix<f64> {
    let d = dirs.len();
    let au: Vec<DVector<f64>> = dirs.iter().map(|s| op.apply(&s.u)).collect();
    let w = op.grid().cell_volume();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let x = w * (au[i].dot(&dirs[j].u) + dirs[i].v.dot(&dirs[j].v));
            g[(i, j)] = x;
            g[(j, i)] = x;
        }
    }
    g
}

/// `½ log det G`, or `None` if the Gram matrix is not positive definite.
pub fn half_log_gram(op: &EllipticOperator, dirs: &[State]) -> Option<f64> {
    let g = energy_gram(op, dirs);
    let chol = g.cholesky()?;
    Some(chol.l().diagonal().iter().map(|x| x.ln()).sum())
}

/// Modified Gram–Schmidt in the energy product. Returns the QR diagonal.
///
/// Fails when a direction loses all but a `1e-14` fraction of its norm to the
/// previous ones.
pub fn orthonormalize(op: &EllipticOperator, dirs: &mut [State]) -> Result<Vec<f64>> {
    let mut diag = Vec::with_capacity(dirs.len());
    for i in 0..dirs.len() {
        let before = op.energy_norm(&dirs[i]);
        for j in 0..i {
            let (head, tail) = dirs.split_at_mut(i);
            let c = op.energy_inner(&tail[0], &head[j])?;
            tail[0].axpy(-c, &head[j]);
        }
        let r = op.energy_norm(&dirs[i]);
        if !(r > 1e-14 * before) || !(r > 0.0) {
            return Err(Error::FrameCollapse { step: 0, diag: r });
        }
        dirs[i].scale_mut(1.0 / r);
        diag.push(r);
    }
    Ok(diag)
}

/// `d` tangent directions with their accumulated log-volume.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    directions: Vec<State>,
    orthonormal: bool,
    log_volume: f64,
}

impl TangentFrame {
    /// Wraps the directions after checking they are nonzero and of equal length.
    pub fn new(directions: Vec<State>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("frame needs at least one direction"));
        }
        let len = directions[0].len();
        for (i, d) in directions.iter().enumerate() {
            d.check_len(len)?;
            if d.max_abs() == 0.0 {
                return Err(Error::invalid(format!("frame direction {i} is zero")));
            }
        }
        Ok(Self {
            directions,
            orthonormal: false,
            log_volume: 0.0,
        })
    }

    /// Energy-orthonormal copy of `directions`; log-volume starts at zero.
    pub fn orthonormal(op: &EllipticOperator, mut directions: Vec<State>) -> Result<Self> {
        Self::new(directions.clone())?;
        for d in &directions {
            d.check_len(op.len())?;
        }
        orthonormalize(op, &mut directions)?;
        Ok(Self {
            directions,
            orthonormal: true,
            log_volume: 0.0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[State] {
        &self.directions
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// `½ log (G(t) / G(0))`
    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    /// Largest deviation of the energy Gram matrix from the identity.
    pub fn orthonormality_defect(&self, op: &EllipticOperator) -> f64 {
        let g = energy_gram(op, &self.directions);
        (g - DMatrix::identity(self.dimension(), self.dimension())).amax()
    }
}

/// Frozen base point for trace evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceContext {
    pub u_tilde: DVector<f64>,
    /// `∂_u f(x, ũ(x))`
    pub slope: DVector<f64>,
    pub delta: f64,
    pub alpha: f64,
    /// Needed only by [`trace_upper_bound`].
    pub lambda1: Option<f64>,
}

impl TraceContext {
    pub fn new(
        model: &NonlinearModel,
        u_tilde: &DVector<f64>,
        alpha: f64,
        delta: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if !(delta > 0.0 && delta < alpha) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, alpha), got {delta}"
            )));
        }
        Ok(Self {
            u_tilde: u_tilde.clone(),
            slope: model.slope_field(u_tilde),
            delta,
            alpha,
            lambda1: None,
        })
    }

    /// Context with `δ = δ*(λ₁, α)`.
    pub fn optimal(
        model: &NonlinearModel,
        u_tilde: &DVector<f64>,
        alpha: f64,
        lambda1: f64,
    ) -> Result<Self> {
        let delta = delta_star(lambda1, alpha)?;
        let mut ctx = Self::new(model, u_tilde, alpha, delta)?;
        ctx.lambda1 = Some(lambda1);
        Ok(ctx)
    }
}

const ORTHONORMAL_TOL: f64 = 1e-10;

fn require_orthonormal(op: &EllipticOperator, frame: &[State]) -> Result<()> {
    let d = frame.len();
    let defect = (energy_gram(op, frame) - DMatrix::identity(d, d)).amax();
    if !(defect <= ORTHONORMAL_TOL) {
        return Err(Error::invalid(format!(
            "frame is not energy-orthonormal (Gram defect {defect:.2e})"
        )));
    }
    Ok(())
}

/// Trace of the reduced operator `B` on the span of an energy-orthonormal
/// frame:
/// `Σ_i -2δ‖φ_i‖²_{H¹₀} - 2(α-δ)‖ψ_i‖² + 2δ(α-δ)⟨φ_i, ψ_i⟩ + 2⟨∂_u f(ũ) φ_i, ψ_i⟩`.
pub fn trace_b(ctx: &TraceContext, op: &EllipticOperator, frame: &[State]) -> Result<f64> {
    require_orthonormal(op, frame)?;
    Ok(trace_b_unchecked(ctx, op, frame))
}

fn trace_b_unchecked(ctx: &TraceContext, op: &EllipticOperator, frame: &[State]) -> f64 {
    let (d, a) = (ctx.delta, ctx.alpha);
    frame
        .iter()
        .map(|s| {
            let slope_phi = s.u.component_mul(&ctx.slope);
            -2.0 * d * op.a_form(&s.u, &s.u) - 2.0 * (a - d) * op.l2_inner(&s.v, &s.v)
                + 2.0 * d * (a - d) * op.l2_inner(&s.u, &s.v)
                + 2.0 * op.l2_inner(&slope_phi, &s.v)
        })
        .sum()
}

/// Trace of `B` over the span of any independent frame: `tr(G⁻¹ B_frame)`.
pub fn trace_b_span(ctx: &TraceContext, op: &EllipticOperator, frame: &[State]) -> Result<f64> {
    let mut dirs = frame.to_vec();
    orthonormalize(op, &mut dirs)?;
    Ok(trace_b_unchecked(ctx, op, &dirs))
}

fn check_delta_star(ctx: &TraceContext) -> Result<f64> {
    let lambda1 = ctx
        .lambda1
        .ok_or_else(|| Error::invalid("trace bound needs lambda1 in the trace context"))?;
    let ds = delta_star(lambda1, ctx.alpha)?;
    if (ctx.delta - ds).abs() > 1e-12 * ds {
        return Err(Error::invalid(format!(
            "trace bound requires delta = delta* = {ds}, context has {}",
            ctx.delta
        )));
    }
    Ok(lambda1)
}

/// `-2 ν_α d + (1/α) Σ ‖∂_u f(ũ) φ_i‖²`, which dominates [`trace_b`] when
/// `δ = δ*`.
pub fn trace_upper_bound(
    ctx: &TraceContext,
    op: &EllipticOperator,
    frame: &[State],
    nu_alpha: f64,
) -> Result<f64> {
    check_delta_star(ctx)?;
    require_orthonormal(op, frame)?;
    Ok(upper_bound_with(ctx, op, frame, nu_alpha, &ctx.slope))
}

/// Same bound with the slope replaced by a dominating weight `W ≥ |∂_u f(ũ)|`.
pub fn trace_upper_bound_weighted(
    ctx: &TraceContext,
    op: &EllipticOperator,
    frame: &[State],
    nu_alpha: f64,
    weight: &WeightPotential,
) -> Result<f64> {
    check_delta_star(ctx)?;
    require_orthonormal(op, frame)?;
    op.grid().check_len(weight.len())?;
    Ok(upper_bound_with(ctx, op, frame, nu_alpha, weight.values()))
}

fn upper_bound_with(
    ctx: &TraceContext,
    op: &EllipticOperator,
    frame: &[State],
    nu_alpha: f64,
    mult: &DVector<f64>,
) -> f64 {
    let sum: f64 = frame
        .iter()
        .map(|s| {
            let wphi = s.u.component_mul(mult);
            op.l2_inner(&wphi, &wphi)
        })
        .sum();
    -2.0 * nu_alpha * frame.len() as f64 + sum / ctx.alpha
}

/// Symmetric matrix of the `B` form and the energy metric on the discrete
/// `Z₀`, coordinates ordered `(u, v)`.
pub fn assemble_b_form(ctx: &TraceContext, op: &EllipticOperator) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = op.len();
    let w = op.grid().cell_volume();
    let (d, a) = (ctx.delta, ctx.alpha);
    let k = op.to_dense() * w;
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&(&k * (-2.0 * d)));
    m.view_mut((0, 0), (n, n)).copy_from(&k);
    for i in 0..n {
        let cross = w * (d * (a - d) + ctx.slope[i]);
        b[(i, n + i)] = cross;
        b[(n + i, i)] = cross;
        b[(n + i, n + i)] = -2.0 * (a - d) * w;
        m[(n + i, n + i)] = w;
    }
    (b, m)
}

/// Eigenvalues of `B` (self-adjoint in the energy metric), descending.
pub fn b_spectrum(ctx: &TraceContext, op: &EllipticOperator) -> Result<DVector<f64>> {
    op.grid().check_len(ctx.slope.len())?;
    let (b, m) = assemble_b_form(ctx, op);
    let (values, _) = linalg::generalized_symmetric_eigen(&b, &m)?;
    let n = values.len();
    Ok(DVector::from_fn(n, |i, _| values[n - 1 - i]))
}

/// Ky Fan maximum: `sup` of `Tr B` over `j`-dimensional subspaces, i.e. the
/// sum of the `j` largest eigenvalues.
pub fn ky_fan_sup(ctx: &TraceContext, op: &EllipticOperator, j: usize) -> Result<f64> {
    if j == 0 || j > 2 * op.len() {
        return Err(Error::invalid(format!(
            "j must lie in 1..={}, got {j}",
            2 * op.len()
        )));
    }
    Ok(b_spectrum(ctx, op)?.rows(0, j).sum())
}

/// All partial Ky Fan sums `p_1, …, p_{2N}` for one base point.
pub fn ky_fan_sums(ctx: &TraceContext, op: &EllipticOperator) -> Result<Vec<f64>> {
    let eigs = b_spectrum(ctx, op)?;
    let mut acc = 0.0;
    Ok(eigs
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect())
}

/// `p_j ≈ max` of the Ky Fan sums over sampled base points.
pub fn trace_exponents(
    model: &NonlinearModel,
    op: &EllipticOperator,
    samples: &[State],
    alpha: f64,
    delta: f64,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("need at least one sampled base point"));
    }
    let sums: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|s| {
            let ctx = TraceContext::new(model, &s.u, alpha, delta)?;
            ky_fan_sums(&ctx, op)
        })
        .collect::<Result<_>>()?;
    let mut p = sums[0].clone();
    for row in &sums[1..] {
        for (a, b) in p.iter_mut().zip(row) {
            *a = a.max(*b);
        }
    }
    Ok(p)
}

/// First `d` with `p_d < 0`.
pub fn first_contracting_dimension(p: &[f64]) -> Option<usize> {
    p.iter().position(|&x| x < 0.0).map(|i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentConfig {
    pub delta: f64,
    /// Re-orthonormalize every this many steps.
    pub qr_interval: usize,
    /// Also record `Tr B` and, when `lambda1` is given, the trace bound.
    pub record_trace: bool,
    pub lambda1: Option<f64>,
}

impl Default for TangentConfig {
    fn default() -> Self {
        Self {
            delta: 0.0,
            qr_interval: 10,
            record_trace: false,
            lambda1: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeSample {
    pub time: f64,
    /// `½ log (G(t) / G(0))`
    pub log_volume: f64,
    pub trace_b: Option<f64>,
    pub trace_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentEvolution {
    pub frame: TangentFrame,
    pub history: Vec<VolumeSample>,
}

fn check_base(base: &Trajectory, op: &EllipticOperator) -> Result<()> {
    if base.config.record_stride != 1 {
        return Err(Error::invalid(
            "tangent evolution needs a stride-1 base trajectory",
        ));
    }
    if base.config.inertia != 1.0 {
        return Err(Error::invalid(
            "tangent evolution needs the unit-inertia form",
        ));
    }
    if base.is_empty() {
        return Err(Error::invalid("empty base trajectory"));
    }
    base.states[0].check_len(op.len())
}

/// Advances directions given in `R_δ` coordinates along every step of `base`.
///
/// With `δ = 0` this is the plain derivative of the discrete semiflow.
pub fn propagate(
    base: &Trajectory,
    directions: &[State],
    op: &EllipticOperator,
    model: &NonlinearModel,
    delta: f64,
) -> Result<Vec<State>> {
    check_base(base, op)?;
    let mut dirs = directions.to_vec();
    let stepper = TangentStepper::new(base, op, model, delta)?;
    for n in 0..base.len() - 1 {
        stepper.step(&base.states[n], &mut dirs);
    }
    Ok(dirs)
}

struct TangentStepper<'a> {
    base_stepper: WaveStepper<'a>,
    linear: LinearStepper<'a>,
    model: &'a NonlinearModel,
}

impl<'a> TangentStepper<'a> {
    fn new(
        base: &Trajectory,
        op: &'a EllipticOperator,
        model: &'a NonlinearModel,
        delta: f64,
    ) -> Result<Self> {
        let cfg = &base.config;
        Ok(Self {
            base_stepper: WaveStepper::new(op, model, cfg)?,
            linear: LinearStepper::new(op, LinearPart::shifted(cfg.alpha, delta), cfg.dt)?,
            model,
        })
    }

    fn step(&self, base_state: &State, dirs: &mut [State]) {
        let umid = self.base_stepper.midpoint_displacement(base_state);
        let slope = self.model.slope_field(&umid);
        for d in dirs.iter_mut() {
            let hmid = self.linear.predict_mid(&d.u, &d.v);
            let g = hmid.component_mul(&slope);
            self.linear.step(&mut d.u, &mut d.v, Some(&g));
        }
    }
}

/// Evolves `frame0` along `base` (shifted coordinates, `δ = cfg.delta`),
/// re-orthonormalizing every `cfg.qr_interval` steps. The history holds one
/// sample per base step.
pub fn evolve_tangent(
    base: &Trajectory,
    frame0: &TangentFrame,
    op: &EllipticOperator,
    model: &NonlinearModel,
    cfg: &TangentConfig,
) -> Result<TangentEvolution> {
    check_base(base, op)?;
    if cfg.qr_interval == 0 {
        return Err(Error::invalid("QR interval must be at least 1"));
    }
    let alpha = base.config.alpha;
    if cfg.record_trace && !(cfg.delta > 0.0 && cfg.delta < alpha) {
        return Err(Error::invalid("trace recording needs delta in (0, alpha)"));
    }
    let mut dirs = frame0.directions.clone();
    let mut log_volume = 0.0;
    // volumes are measured relative to the orthonormalized initial frame
    orthonormalize(op, &mut dirs)?;
    let nu = cfg.lambda1.map(|l| nu_alpha(l, alpha)).transpose()?;
    let stepper = TangentStepper::new(base, op, model, cfg.delta)?;

    let sample = |t: f64, lv: f64, dirs: &[State], base_state: &State| -> Result<VolumeSample> {
        let (mut tb, mut bound) = (None, None);
        if cfg.record_trace {
            let mut on = dirs.to_vec();
            orthonormalize(op, &mut on)?;
            let mut ctx = TraceContext::new(model, &base_state.u, alpha, cfg.delta)?;
            tb = Some(trace_b_unchecked(&ctx, op, &on));
            if let (Some(l), Some(nu)) = (cfg.lambda1, nu) {
                ctx.lambda1 = Some(l);
                if check_delta_star(&ctx).is_ok() {
                    bound = Some(upper_bound_with(&ctx, op, &on, nu, &ctx.slope));
                }
            }
        }
        Ok(VolumeSample {
            time: t,
            log_volume: lv,
            trace_b: tb,
            trace_bound: bound,
        })
    };

    let mut history = Vec::with_capacity(base.len());
    history.push(sample(base.times[0], 0.0, &dirs, &base.states[0])?);
    let mut since_qr = 0;
    for n in 0..base.len() - 1 {
        stepper.step(&base.states[n], &mut dirs);
        since_qr += 1;
        if since_qr == cfg.qr_interval {
            since_qr = 0;
            let diag = orthonormalize(op, &mut dirs).map_err(|e| match e {
                Error::FrameCollapse { diag, .. } => Error::FrameCollapse { step: n + 1, diag },
                other => other,
            })?;
            log_volume += diag.iter().map(|r| r.ln()).sum::<f64>();
        }
        let current = log_volume
            + if since_qr == 0 {
                0.0
            } else {
                half_log_gram(op, &dirs).ok_or(Error::FrameCollapse {
                    step: n + 1,
                    diag: 0.0,
                })?
            };
        history.push(sample(
            base.times[n + 1],
            current,
            &dirs,
            &base.states[n + 1],
        )?);
    }
    if since_qr != 0 {
        let diag = orthonormalize(op, &mut dirs)?;
        log_volume += diag.iter().map(|r| r.ln()).sum::<f64>();
    }
    Ok(TangentEvolution {
        frame: TangentFrame {
            directions: dirs,
            orthonormal: true,
            log_volume,
        },
        history,
    })
}

/// Central differences `(L_{n+1} - L_{n-1}) / (t_{n+1} - t_{n-1})` of the
/// recorded `log G = 2 · log-volume`, paired with the recorded `Tr B` at `t_n`.
pub fn gram_trace_pairs(history: &[VolumeSample]) -> Vec<(f64, f64, f64)> {
    history
        .windows(3)
        .filter_map(|w| {
            let tb = w[1].trace_b?;
            let rate = 2.0 * (w[2].log_volume - w[0].log_volume) / (w[2].time - w[0].time);
            Some((w[1].time, rate, tb))
        })
        .collect()
}
