//! Run configuration, read from a TOML file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_scenario")]
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub grid: GridSpec,
    #[serde(default)]
    pub beta: BetaSpec,
    pub model: ModelSpec,
    pub dynamics: DynamicsSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub tangent: TangentSpec,
    #[serde(default)]
    pub attractor: AttractorSpec,
    #[serde(default)]
    pub spectral: SpectralSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
}

fn default_scenario() -> String {
    "unnamed".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum BetaSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// `amplitude · exp(-|x - centre|²)` around the box centre.
    Gaussian {
        amplitude: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// One value per line, interior points in lexicographic order.
    File {
        path: PathBuf,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
}

fn default_sigma() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// File holding `g(x)` for the variable cubic.
    pub g_path: Option<PathBuf>,
    #[serde(default = "default_r")]
    pub r: f64,
    pub dissipative: Option<DissipativeSpec>,
}

fn default_r() -> f64 {
    4.0
}

/// `zero`: `f ≡ 0`; `cubic`: `a u - b u³`; `variable-cubic`: `g(x) u - b u³`.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Zero,
    Cubic,
    VariableCubic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipativeSpec {
    pub mu: f64,
    pub c: f64,
    #[serde(default = "default_u_range")]
    pub u_range: [f64; 2],
}

fn default_u_range() -> [f64; 2] {
    [-10.0, 10.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub alpha: Option<f64>,
    /// Run `ε u_tt + u_t + A u = f` through its `α = ε^{-1/2}` form.
    pub epsilon: Option<f64>,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "one")]
    pub record_stride: usize,
    #[serde(default = "default_ceiling")]
    pub energy_ceiling: f64,
}

fn one() -> usize {
    1
}

fn default_ceiling() -> f64 {
    1e6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum InitialSpec {
    Zero,
    /// Coefficients of the product-sine modes `Π_k sin(m π (x_k - a_k) / L_k)`.
    Modes {
        #[serde(default)]
        u: Vec<f64>,
        #[serde(default)]
        v: Vec<f64>,
    },
    /// Random coefficients in `[-amplitude, amplitude]` on the first `modes` modes.
    Random {
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    /// Last state of a binary state dump.
    File {
        path: PathBuf,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Random {
            amplitude: 1.0,
            modes: default_modes(),
        }
    }
}

fn default_modes() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentSpec {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_qr")]
    pub qr_interval: usize,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    /// Defaults to the optimal shift.
    pub delta: Option<f64>,
}

impl Default for TangentSpec {
    fn default() -> Self {
        Self {
            d: default_d(),
            qr_interval: default_qr(),
            dt: None,
            horizon: None,
            delta: None,
        }
    }
}

fn default_d() -> usize {
    3
}

fn default_qr() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractorSpec {
    /// Defaults to 50 damping times.
    pub burn_in: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for AttractorSpec {
    fn default() -> Self {
        Self {
            burn_in: None,
            samples: default_samples(),
        }
    }
}

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    #[serde(default = "default_k")]
    pub k: usize,
    /// `ε` of the weight `W = … + ε ρ`.
    #[serde(default = "default_weight_eps")]
    pub epsilon: f64,
    /// `λ̃` values; defaults to just above each computed eigenvalue.
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub dense_check: bool,
    #[serde(default)]
    pub base: SpectralBase,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        Self {
            k: default_k(),
            epsilon: default_weight_eps(),
            sweep: None,
            dense_check: true,
            base: SpectralBase::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralBase {
    #[default]
    Initial,
    Zero,
}

fn default_k() -> usize {
    20
}

fn default_weight_eps() -> f64 {
    0.1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// Defaults to the model exponent.
    pub r: Option<f64>,
    /// Fitted from attractor samples when absent.
    pub m_r: Option<f64>,
    #[serde(default = "unit")]
    pub safety: f64,
    pub lambda1: Option<f64>,
    pub c_tilde: Option<f64>,
    #[serde(default = "default_m_b")]
    pub m_b: f64,
    /// Attractor samples used for the `M_r` fit.
    #[serde(default = "default_fit_samples")]
    pub fit_samples: usize,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            r: None,
            m_r: None,
            safety: 1.0,
            lambda1: None,
            c_tilde: None,
            m_b: default_m_b(),
            fit_samples: default_fit_samples(),
        }
    }
}

fn unit() -> f64 {
    1.0
}

fn default_m_b() -> f64 {
    wavedim::discretization::DEFAULT_M_B
}

fn default_fit_samples() -> usize {
    5
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            ));
        }
        match (cfg.dynamics.alpha, cfg.dynamics.epsilon) {
            (Some(_), Some(_)) => {
                return Err("dynamics: set exactly one of alpha and epsilon".into())
            }
            (None, None) => return Err("dynamics: one of alpha or epsilon is required".into()),
            _ => {}
        }
        let m = &cfg.model;
        let fields = (m.a.is_some(), m.b.is_some(), m.g_path.is_some());
        let ok = match m.kind {
            ModelKind::Zero => fields == (false, false, false),
            ModelKind::Cubic => fields == (true, true, false),
            ModelKind::VariableCubic => fields == (false, true, true),
        };
        if !ok {
            return Err(format!(
                "model: kind {:?} takes {}",
                m.kind,
                match m.kind {
                    ModelKind::Zero => "no coefficients",
                    ModelKind::Cubic => "exactly a and b",
                    ModelKind::VariableCubic => "exactly g_path and b",
                }
            ));
        }
        if cfg.tangent.d == 0 {
            return Err("tangent.d: must be at least 1".into());
        }
        if cfg.attractor.samples == 0 {
            return Err("attractor.samples: must be at least 1".into());
        }
        if cfg.bounds.fit_samples == 0 {
            return Err("bounds.fit_samples: must be at least 1".into());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let BetaSpec::File { path, .. } = &mut self.beta {
            fix(path);
        }
        if let Some(g_path) = &mut self.model.g_path {
            fix(g_path);
        }
        if let InitialSpec::File { path } = &mut self.initial {
            fix(path);
        }
    }
}
