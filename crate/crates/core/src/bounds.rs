//! Closed-form dimension estimates built from `λ₁`, `α`, `r`, `M_r` and `C̃`.

use crate::discretization::SpatialGrid;
use crate::error::{Error, Result};
use crate::model::NonlinearModel;
use crate::semiflow::{alpha_for_epsilon, rescale, RescaleDirection};
use crate::state::State;

pub use crate::tangent::delta_star;

/// `ν_α = λ₁ α / (√(α² + 4λ₁) (α + √(α² + 4λ₁)))`
pub fn nu_alpha(lambda1: f64, alpha: f64) -> Result<f64> {
    if !(lambda1 > 0.0) || !(alpha > 0.0) {
        return Err(Error::invalid(format!(
            "nu_alpha needs lambda1 > 0 and alpha > 0, got ({lambda1}, {alpha})"
        )));
    }
    let s = (alpha * alpha + 4.0 * lambda1).sqrt();
    Ok(lambda1 * alpha / (s * (alpha + s)))
}

/// Note attached to every report: the formula for `ν_α` tends to `λ₁/2`
/// as `α → ∞`, while the accompanying text claims the limit `λ₁`.
pub const NU_LIMIT_NOTE: &str = "nu_alpha*alpha -> lambda1/2 as alpha -> infinity, not lambda1; \
a large-damping limit of lambda1 is not reached by this nu_alpha";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub lambda1: f64,
    pub alpha: f64,
    pub r: f64,
    pub m_r: f64,
    pub c_tilde: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("alpha", self.alpha),
            ("r", self.r),
            ("M_r", self.m_r),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.r > 2.0) {
            return Err(Error::invalid(format!("r must exceed 2, got {}", self.r)));
        }
        if !(self.c_tilde >= 0.0) || !self.c_tilde.is_finite() {
            return Err(Error::invalid("C~ must be finite and nonnegative"));
        }
        Ok(())
    }

    /// `ν_α α / (M_r^{2/r} C̃²)`
    pub fn ratio(&self) -> Result<f64> {
        self.validate()?;
        let nu = nu_alpha(self.lambda1, self.alpha)?;
        Ok(nu * self.alpha / (self.m_r.powf(2.0 / self.r) * self.c_tilde * self.c_tilde))
    }
}

/// Sample-based estimate of `C̃(I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CTildeEstimate {
    pub value: f64,
    pub base_slope_lr: f64,
    pub sup_linf: f64,
    pub sup_lr: f64,
    pub sample_count: usize,
    pub safety_factor: f64,
}

/// `C̃ = ‖∂_u f(·,0)‖_{L^r} + C (1 + sup ‖u‖_∞) sup ‖u‖_{L^r}`, sups over the
/// sample, times `safety_factor`. A lower estimate of the value over the
/// true invariant set.
pub fn c_tilde(
    model: &NonlinearModel,
    grid: &SpatialGrid,
    sample: &[State],
    safety_factor: f64,
) -> Result<CTildeEstimate> {
    if sample.is_empty() {
        return Err(Error::invalid("C~ needs a nonempty sample"));
    }
    if !(safety_factor > 0.0) {
        return Err(Error::invalid("safety factor must be positive"));
    }
    let r = model.r();
    let base = model.base_slope(grid.len());
    let base_slope_lr = grid.lp_norm(base.as_slice(), r);
    let mut sup_linf = 0.0_f64;
    let mut sup_lr = 0.0_f64;
    for s in sample {
        grid.check_len(s.u.len())?;
        sup_linf = sup_linf.max(s.u.amax());
        sup_lr = sup_lr.max(grid.lp_norm(s.u.as_slice(), r));
    }
    let value =
        safety_factor * (base_slope_lr + model.growth_constant() * (1.0 + sup_linf) * sup_lr);
    Ok(CTildeEstimate {
        value,
        base_slope_lr,
        sup_linf,
        sup_lr,
        sample_count: sample.len(),
        safety_factor,
    })
}

/// Result of the minimal-`d` scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinimalD {
    pub d: u64,
    /// Set when `C̃ = 0`: the condition holds trivially and `d = 1` is reported.
    pub vacuous: bool,
}

/// Largest `d` the scan will try before giving up.
pub const SCAN_LIMIT: u64 = 2_000_000_000;

/// Smallest `d ≥ 1` with `(1/d) Σ_{j≤d} j^{-2/r} ≤ ratio`, by linear scan over
/// exact partial sums.
pub fn minimal_d_for_ratio(r: f64, ratio: f64) -> Result<u64> {
    if !(r > 2.0) {
        return Err(Error::invalid(format!("r must exceed 2, got {r}")));
    }
    if !(ratio > 0.0) {
        return Err(Error::invalid(format!(
            "ratio must be positive, got {ratio}"
        )));
    }
    if ratio >= 1.0 {
        return Ok(1);
    }
    let e = -2.0 / r;
    let mut sum = 0.0_f64;
    let mut d = 0u64;
    while d < SCAN_LIMIT {
        d += 1;
        sum += (d as f64).powf(e);
        if sum <= ratio * d as f64 {
            return Ok(d);
        }
    }
    Err(Error::Numerical(format!(
        "minimal d exceeds the scan limit {SCAN_LIMIT} (ratio {ratio:.3e})"
    )))
}

pub fn minimal_d(inputs: &BoundInputs) -> Result<MinimalD> {
    inputs.validate()?;
    if inputs.c_tilde == 0.0 {
        return Ok(MinimalD {
            d: 1,
            vacuous: true,
        });
    }
    let ratio = inputs.ratio()?;
    if !(ratio > 0.0) {
        return Err(Error::Numerical("nonpositive right-hand side".into()));
    }
    Ok(MinimalD {
        d: minimal_d_for_ratio(inputs.r, ratio)?,
        vacuous: false,
    })
}

/// `(dim_H, dim_F)` bounds: `((r/(r-2)) M_r^{2/r} C̃² / (ν_α α))^{r/2}` and twice it.
pub fn closed_form_bound(inputs: &BoundInputs) -> Result<(f64, f64)> {
    inputs.validate()?;
    let nu = nu_alpha(inputs.lambda1, inputs.alpha)?;
    Ok(closed_form_from_product(
        inputs.r,
        inputs.m_r,
        inputs.c_tilde,
        nu * inputs.alpha,
    ))
}

/// Closed form with `ν_α α` supplied directly.
pub fn closed_form_from_product(r: f64, m_r: f64, c_tilde: f64, nu_alpha_alpha: f64) -> (f64, f64) {
    let base = r / (r - 2.0) * m_r.powf(2.0 / r) * c_tilde * c_tilde / nu_alpha_alpha;
    let h = base.powf(r / 2.0);
    (h, 2.0 * h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionBound {
    pub inputs: BoundInputs,
    pub delta: f64,
    pub nu_alpha: f64,
    pub nu_alpha_alpha: f64,
    pub d_scan: MinimalD,
    pub d_closed_h: f64,
    pub d_closed_f: f64,
    pub limit_note: &'static str,
}

/// Evaluates every quantity of the bound from one set of inputs.
pub fn dimension_bound(inputs: &BoundInputs) -> Result<DimensionBound> {
    inputs.validate()?;
    let nu = nu_alpha(inputs.lambda1, inputs.alpha)?;
    let (h, f) = closed_form_bound(inputs)?;
    Ok(DimensionBound {
        inputs: *inputs,
        delta: delta_star(inputs.lambda1, inputs.alpha)?,
        nu_alpha: nu,
        nu_alpha_alpha: nu * inputs.alpha,
        d_scan: minimal_d(inputs)?,
        d_closed_h: h,
        d_closed_f: f,
        limit_note: NU_LIMIT_NOTE,
    })
}

/// States of the slow-time attractor mapped to the `α = ε^{-1/2}` form:
/// `(u, v) ↦ (u, ε^{1/2} v)`.
pub fn rescaled_samples(samples: &[State], epsilon: f64) -> Result<Vec<State>> {
    samples
        .iter()
        .map(|s| rescale(RescaleDirection::Forward, s, epsilon))
        .collect()
}

/// Bound for `ε u_tt + u_t + A u = f` via its `α = ε^{-1/2}` form, with `C̃`
/// taken from the rescaled attractor.
pub fn epsilon_family_bound(
    epsilon: f64,
    lambda1: f64,
    r: f64,
    m_r: f64,
    c_tilde_rescaled: f64,
) -> Result<DimensionBound> {
    let alpha = alpha_for_epsilon(epsilon)?;
    dimension_bound(&BoundInputs {
        lambda1,
        alpha,
        r,
        m_r,
        c_tilde: c_tilde_rescaled,
    })
}
