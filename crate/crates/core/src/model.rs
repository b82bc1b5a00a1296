//! Nonlinearities `f(x, u)` with their growth data, the weight potential
//! `W(x)` that dominates `|∂_u f(x, ũ(x))|`, and the dissipativity check.

use nalgebra::DVector;

use crate::discretization::{EllipticOperator, SpatialGrid};
use crate::error::{Error, Result};

/// Closed-form nonlinearities shipped with the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `f ≡ 0`
    Zero,
    /// `f(u) = a u - b u³`
    Cubic { a: f64, b: f64 },
    /// `f(x, u) = g(x) u - b u³`, `g` sampled on the grid.
    VariableCubic { g: DVector<f64>, b: f64 },
}

/// A nonlinearity plus the exponent `r > 3` with `∂_u f(·, 0) ∈ L^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearModel {
    kind: Nonlinearity,
    r: f64,
    has_antiderivative: bool,
}

impl NonlinearModel {
    pub fn new(kind: Nonlinearity, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(format!(
                "exponent r must be positive, got {r}"
            )));
        }
        match &kind {
            Nonlinearity::Cubic { a, b } if !(a.is_finite() && b.is_finite()) => {
                return Err(Error::invalid("cubic coefficients must be finite"));
            }
            Nonlinearity::VariableCubic { g, b } => {
                if !b.is_finite() {
                    return Err(Error::invalid("cubic coefficient must be finite"));
                }
                if let Some((index, &value)) = g.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    return Err(Error::NonFinite { index, value });
                }
            }
            _ => {}
        }
        Ok(Self {
            kind,
            r,
            has_antiderivative: true,
        })
    }

    pub fn zero() -> Self {
        Self {
            kind: Nonlinearity::Zero,
            r: 4.0,
            has_antiderivative: true,
        }
    }

    pub fn cubic(a: f64, b: f64, r: f64) -> Result<Self> {
        Self::new(Nonlinearity::Cubic { a, b }, r)
    }

    /// Same model with `F` treated as unavailable.
    pub fn without_antiderivative(mut self) -> Self {
        self.has_antiderivative = false;
        self
    }

    pub fn kind(&self) -> &Nonlinearity {
        &self.kind
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// True when `r > 3`, the regime the dimension estimates need.
    pub fn exponent_admissible(&self) -> bool {
        self.r > 3.0
    }

    /// Checks that a spatially varying coefficient matches the grid.
    pub fn check_grid(&self, grid: &SpatialGrid) -> Result<()> {
        if let Nonlinearity::VariableCubic { g, .. } = &self.kind {
            grid.check_len(g.len())?;
        }
        Ok(())
    }

    #[inline]
    fn linear_coeff(&self, i: usize) -> f64 {
        match &self.kind {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Cubic { a, .. } => *a,
            Nonlinearity::VariableCubic { g, .. } => g[i],
        }
    }

    #[inline]
    fn cubic_coeff(&self) -> f64 {
        match &self.kind {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Cubic { b, .. } | Nonlinearity::VariableCubic { b, .. } => *b,
        }
    }

    /// `f(x_i, u)`
    #[inline]
    pub fn f(&self, i: usize, u: f64) -> f64 {
        self.linear_coeff(i) * u - self.cubic_coeff() * u * u * u
    }

    /// `∂_u f(x_i, u)`
    #[inline]
    pub fn dfu(&self, i: usize, u: f64) -> f64 {
        self.linear_coeff(i) - 3.0 * self.cubic_coeff() * u * u
    }

    /// `∂_uu f(x_i, u)`
    #[inline]
    pub fn dfuu(&self, _i: usize, u: f64) -> f64 {
        -6.0 * self.cubic_coeff() * u
    }

    /// `F(x_i, u) = ∫₀^u f(x_i, s) ds`, if available.
    #[inline]
    pub fn antiderivative(&self, i: usize, u: f64) -> Option<f64> {
        self.has_antiderivative.then(|| {
            let u2 = u * u;
            0.5 * self.linear_coeff(i) * u2 - 0.25 * self.cubic_coeff() * u2 * u2
        })
    }

    /// Growth constant `C` with `|∂_uu f(x, u)| ≤ C (1 + |u|)`.
    pub fn growth_constant(&self) -> f64 {
        6.0 * self.cubic_coeff().abs()
    }

    /// `∂_u f(·, 0)` on the grid.
    pub fn base_slope(&self, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |i, _| self.linear_coeff(i))
    }

    /// Pointwise `∂_u f(x, u(x))`.
    pub fn slope_field(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(u.len(), |i, _| self.dfu(i, u[i]))
    }

    /// Fails with a hypothesis diagnostic if `∂_u f(·, 0)` is negative anywhere.
    pub fn check_base_slope(&self, len: usize) -> Result<()> {
        let base = self.base_slope(len);
        if let Some((i, &value)) = base.iter().enumerate().find(|(_, x)| **x < 0.0) {
            return Err(Error::Hypothesis {
                name: "nonnegative base slope",
                detail: format!(
                    "∂_u f(x, 0) = {value} < 0 at grid index {i}; absorb the negative part into β"
                ),
            });
        }
        Ok(())
    }
}

/// Pointwise `f(x, u(x))`.
pub fn eval_nemitski(model: &NonlinearModel, u: &DVector<f64>) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(u.len());
    for i in 0..u.len() {
        let value = model.f(i, u[i]);
        if !value.is_finite() {
            return Err(Error::NonFinite { index: i, value });
        }
        out[i] = value;
    }
    Ok(out)
}

/// `‖f̂(u)‖_{L²} / (1 + ‖u‖³_{H¹₀})`, the cubic-growth ratio of the Nemitski map.
pub fn nemitski_growth_ratio(
    model: &NonlinearModel,
    op: &EllipticOperator,
    u: &DVector<f64>,
) -> Result<f64> {
    let fu = eval_nemitski(model, u)?;
    let num = op.l2_inner(&fu, &fu).sqrt();
    Ok(num / (1.0 + op.h10_norm(u).powi(3)))
}

/// `W(x) = ∂_u f(x, 0) + C (1 + ‖ũ‖_∞) |ũ(x)| + ε ρ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPotential {
    values: DVector<f64>,
    epsilon: f64,
    rho: DVector<f64>,
}

impl WeightPotential {
    /// Arbitrary weight, for spectral tests and custom fixtures. `epsilon`
    /// records the size of any positivity correction already folded in.
    pub fn from_values(values: DVector<f64>, epsilon: f64) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        if values.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("weight must be nonnegative"));
        }
        let len = values.len();
        Ok(Self {
            values,
            epsilon,
            rho: DVector::zeros(len),
        })
    }

    pub fn constant(len: usize, w: f64) -> Result<Self> {
        Self::from_values(DVector::from_element(len, w), 0.0)
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> &DVector<f64> {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First grid index where `W` vanishes, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.values.iter().position(|&w| w <= 0.0)
    }

    /// `W ↦ c W`
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::invalid("weight scale must be nonnegative"));
        }
        Ok(Self {
            values: &self.values * c,
            epsilon: self.epsilon * c,
            rho: self.rho.clone(),
        })
    }
}

/// Unit-amplitude Gaussian `exp(-|x - x₀|²)` centered in the box.
pub fn gaussian_profile(grid: &SpatialGrid) -> DVector<f64> {
    let c = grid.center();
    grid.sample(|x| {
        let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        (-r2).exp()
    })
}

pub fn build_weight(
    model: &NonlinearModel,
    grid: &SpatialGrid,
    u_tilde: &DVector<f64>,
    epsilon: f64,
) -> Result<WeightPotential> {
    grid.check_len(u_tilde.len())?;
    model.check_grid(grid)?;
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    model.check_base_slope(grid.len())?;
    let base = model.base_slope(grid.len());
    let sup = u_tilde.amax();
    let c = model.growth_constant();
    let rho = gaussian_profile(grid);
    let values = DVector::from_fn(grid.len(), |i, _| {
        base[i] + c * (1.0 + sup) * u_tilde[i].abs() + epsilon * rho[i]
    });
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(WeightPotential {
        values,
        epsilon,
        rho,
    })
}

/// `μ > 0` and `c(x)` of the dissipativity hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeData {
    pub mu: f64,
    pub c: DVector<f64>,
}

impl DissipativeData {
    pub fn new(mu: f64, c: DVector<f64>) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::invalid(format!("mu must be positive, got {mu}")));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("c(x) must be finite"));
        }
        Ok(Self { mu, c })
    }

    pub fn constant(len: usize, mu: f64, c: f64) -> Result<Self> {
        Self::new(mu, DVector::from_element(len, c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityVerdict {
    pub pass: bool,
    /// `max (f u - μ F - c)` over the lattice.
    pub flow_margin: f64,
    /// `max (F - c)` over the lattice.
    pub potential_margin: f64,
    /// Grid index and `u` where the larger margin is attained.
    pub worst: (usize, f64),
}

impl DissipativityVerdict {
    pub fn margin(&self) -> f64 {
        self.flow_margin.max(self.potential_margin)
    }
}

/// Number of `u` samples used by [`check_dissipativity`].
pub const DISSIPATIVITY_U_SAMPLES: usize = 2001;

/// Scans every grid point against `DISSIPATIVITY_U_SAMPLES` equispaced `u`
/// values in `u_range` (endpoints included, plus `u = 0`).
pub fn check_dissipativity(
    model: &NonlinearModel,
    data: &DissipativeData,
    u_range: (f64, f64),
) -> Result<DissipativityVerdict> {
    let (lo, hi) = u_range;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("u range must be a finite interval"));
    }
    if model.antiderivative(0, 0.0).is_none() {
        return Err(Error::AntiderivativeMissing);
    }
    let m = DISSIPATIVITY_U_SAMPLES;
    let mut flow_margin = f64::NEG_INFINITY;
    let mut potential_margin = f64::NEG_INFINITY;
    let mut worst = (0, 0.0);
    let mut worst_value = f64::NEG_INFINITY;
    for (i, &c) in data.c.iter().enumerate() {
        let us = (0..m)
            .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
            .chain(std::iter::once(0.0).filter(|_| lo <= 0.0 && 0.0 <= hi));
        for u in us {
            let big_f = model.antiderivative(i, u).unwrap_or(0.0);
            let flow = model.f(i, u) * u - data.mu * big_f - c;
            let pot = big_f - c;
            flow_margin = flow_margin.max(flow);
            potential_margin = potential_margin.max(pot);
            let local = flow.max(pot);
            if local > worst_value {
                worst_value = local;
                worst = (i, u);
            }
        }
    }
    Ok(DissipativityVerdict {
        pass: flow_margin <= 0.0 && potential_margin <= 0.0,
        flow_margin,
        potential_margin,
        worst,
    })
}
