//! Subcommand implementations.

use std::f64::consts::PI;
use std::fmt::{self, Display, Write as _};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wavedim::bounds::{c_tilde, dimension_bound, BoundInputs, CTildeEstimate, DimensionBound};
use wavedim::discretization::{
    estimate_form_bounds, read_field_file, smallest_eigenvalue, EllipticOperator, PotentialField,
    SpatialGrid,
};
use wavedim::export::{
    bound_csv, counting_csv, decode_states, encode_states, spectral_csv, trajectory_csv,
    volume_csv, write_atomic,
};
use wavedim::model::{
    build_weight, check_dissipativity, DissipativeData, NonlinearModel, Nonlinearity,
};
use wavedim::semiflow::{
    energy, integrate, rescale, sample_invariant_set, IntegratorConfig, InvariantSample,
    RescaleDirection,
};
use wavedim::spectral::{
    asymptotic_audit, eigenvalue_sweep, fit_clr_constant, mu_via_operator, solve_weighted,
    WeightedProblem,
};
use wavedim::tangent::{
    delta_star, evolve_tangent, first_contracting_dimension, gram_trace_pairs, trace_exponents,
    TangentConfig, TangentFrame,
};
use wavedim::{Error, State};

use crate::config::{BetaSpec, InitialSpec, ModelKind, RunConfig, SpectralBase};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Hypothesis { name: &'static str, detail: String },
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis { .. } => 3,
            CliError::Lib(e) => match e {
                Error::InvalidInput(_)
                | Error::GridMismatch { .. }
                | Error::AntiderivativeMissing
                | Error::DegenerateWeight { .. } => 2,
                Error::CoercivityViolated { .. } | Error::Hypothesis { .. } => 3,
                Error::Io(_) | Error::Csv(_) => 1,
                _ => 4,
            },
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Hypothesis { name, detail } => {
                write!(f, "hypothesis `{name}` violated: {detail}")
            }
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Plain `key: value` report, also echoed to stdout.
#[derive(Debug, Default)]
pub struct Report {
    text: String,
}

impl Report {
    fn section(&mut self, name: &str) {
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        let _ = writeln!(self.text, "[{name}]");
    }

    fn kv(&mut self, key: &str, value: impl ReportValue) {
        let _ = writeln!(self.text, "{key} = {}", value.render());
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

trait ReportValue {
    fn render(&self) -> String;
}

impl ReportValue for f64 {
    /// Shortest round-trip form; scientific outside `[1e-4, 1e10)`.
    fn render(&self) -> String {
        let a = self.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e10).contains(&a) {
            format!("{self:e}")
        } else {
            format!("{self}")
        }
    }
}

macro_rules! plain_value {
    ($($t:ty),*) => {
        $(impl ReportValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        })*
    };
}

plain_value!(usize, u64, bool, &str, String, &String);

/// Everything a run needs, built from the config.
pub struct Setup {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub grid: SpatialGrid,
    pub op: EllipticOperator,
    pub model: NonlinearModel,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub integrator: IntegratorConfig,
    pub u0: State,
}

fn product_mode(grid: &SpatialGrid, m: usize) -> DVector<f64> {
    let (lo, hi) = (grid.lower().to_vec(), grid.upper().to_vec());
    grid.sample(|x| {
        x.iter()
            .enumerate()
            .map(|(k, xk)| (m as f64 * PI * (xk - lo[k]) / (hi[k] - lo[k])).sin())
            .product()
    })
}

fn mode_sum(grid: &SpatialGrid, coeffs: &[f64]) -> DVector<f64> {
    let mut u = DVector::zeros(grid.len());
    for (m, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            u += product_mode(grid, m + 1) * *c;
        }
    }
    u
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl Setup {
    pub fn build(cfg: RunConfig, out: PathBuf) -> CliResult<Self> {
        let g = &cfg.grid;
        let grid = SpatialGrid::new(&g.lower, &g.upper, &g.points)
            .map_err(|e| CliError::Config(format!("grid: {e}")))?;
        let beta = match &cfg.beta {
            BetaSpec::Zero => PotentialField::zero(&grid),
            BetaSpec::Constant { value, sigma } => PotentialField::constant(&grid, *value, *sigma)?,
            BetaSpec::Gaussian { amplitude, sigma } => {
                let c = grid.center();
                PotentialField::from_fn(&grid, *sigma, |x| {
                    amplitude
                        * (-x
                            .iter()
                            .zip(&c)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>())
                        .exp()
                })?
            }
            BetaSpec::File { path, sigma } => PotentialField::from_file(&grid, path, *sigma)?,
        };
        let op = EllipticOperator::assemble(&grid, &beta)?;
        let m = &cfg.model;
        let kind = match m.kind {
            ModelKind::Zero => Nonlinearity::Zero,
            ModelKind::Cubic => Nonlinearity::Cubic {
                a: m.a.unwrap_or_default(),
                b: m.b.unwrap_or_default(),
            },
            ModelKind::VariableCubic => {
                let path = m.g_path.as_deref().unwrap_or(Path::new(""));
                let values = read_field_file(path)?;
                if values.len() != grid.len() {
                    return Err(CliError::Config(format!(
                        "model.g_path: expected {} values, got {}",
                        grid.len(),
                        values.len()
                    )));
                }
                Nonlinearity::VariableCubic {
                    g: DVector::from_vec(values),
                    b: m.b.unwrap_or_default(),
                }
            }
        };
        let model = NonlinearModel::new(kind, m.r)?;
        model.check_grid(&grid)?;

        let d = &cfg.dynamics;
        let (alpha, epsilon) = match (d.alpha, d.epsilon) {
            (Some(a), None) => (a, None),
            (None, Some(e)) => (wavedim::semiflow::alpha_for_epsilon(e)?, Some(e)),
            _ => {
                return Err(CliError::Config(
                    "dynamics: set exactly one of alpha and epsilon".into(),
                ))
            }
        };
        let mut integrator =
            IntegratorConfig::new(d.dt, d.horizon, alpha).with_stride(d.record_stride);
        integrator.energy_ceiling = d.energy_ceiling;
        integrator
            .validate()
            .map_err(|e| CliError::Config(format!("dynamics: {e}")))?;

        let u0 = match &cfg.initial {
            InitialSpec::Zero => State::zeros(grid.len()),
            InitialSpec::Modes { u, v } => State::new(mode_sum(&grid, u), mode_sum(&grid, v))?,
            InitialSpec::Random { amplitude, modes } => {
                let mut rng = stream(cfg.seed, 1);
                let mut coeffs = || -> Vec<f64> {
                    (0..*modes)
                        .map(|_| rng.random_range(-1.0..=1.0) * amplitude)
                        .collect()
                };
                let cu = coeffs();
                let cv = coeffs();
                State::new(mode_sum(&grid, &cu), mode_sum(&grid, &cv))?
            }
            InitialSpec::File { path } => {
                let bytes = std::fs::read(path).map_err(|e| {
                    CliError::Config(format!("initial.path {}: {e}", path.display()))
                })?;
                let (_, _, states) = decode_states(&bytes)?;
                let last = states
                    .into_iter()
                    .last()
                    .ok_or_else(|| CliError::Config("initial.path: dump holds no states".into()))?;
                last.check_len(grid.len())?;
                last
            }
        };
        // initial data is given for the ε-form; run its α-form
        let u0 = match epsilon {
            Some(e) => rescale(RescaleDirection::Forward, &u0, e)?,
            None => u0,
        };
        Ok(Self {
            cfg,
            out,
            grid,
            op,
            model,
            alpha,
            epsilon,
            integrator,
            u0,
        })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        Ok(write_atomic(&self.out.join(name), bytes)?)
    }

    fn header(&self, report: &mut Report, command: &str) {
        report.section("run");
        report.kv("command", command);
        report.kv("scenario", &self.cfg.scenario);
        report.kv("seed", self.cfg.seed);
        report.kv("grid_points", format!("{:?}", self.grid.points_per_axis()));
        report.kv("alpha", self.alpha);
        if let Some(e) = self.epsilon {
            report.kv("epsilon", e);
            report.kv(
                "time_units",
                "s = t / sqrt(epsilon), velocities scaled by sqrt(epsilon)",
            );
        }
    }

    fn lambda1(&self) -> CliResult<f64> {
        if !self.op.is_coercive() {
            // produces the diagnostic with the minimizing vector
            estimate_form_bounds(&self.op, self.cfg.bounds.m_b)?;
        }
        Ok(smallest_eigenvalue(&self.op))
    }

    fn check_dissipative(&self, report: &mut Report) -> CliResult<()> {
        let diss = self.cfg.model.dissipative.as_ref().ok_or_else(|| {
            CliError::Config("model.dissipative is required for attractor runs".into())
        })?;
        let data = DissipativeData::constant(self.grid.len(), diss.mu, diss.c)?;
        let v = check_dissipativity(&self.model, &data, (diss.u_range[0], diss.u_range[1]))?;
        report.section("dissipativity");
        report.kv("mu", diss.mu);
        report.kv("c", diss.c);
        report.kv("flow_margin", v.flow_margin);
        report.kv("potential_margin", v.potential_margin);
        report.kv("pass", v.pass);
        if !v.pass {
            return Err(CliError::Hypothesis {
                name: "dissipativity",
                detail: format!(
                    "f u - mu F <= c or F <= c fails (flow margin {:e}, potential margin {:e}, worst at grid index {} with u = {})",
                    v.flow_margin, v.potential_margin, v.worst.0, v.worst.1
                ),
            });
        }
        Ok(())
    }

    fn attractor_sample(&self) -> CliResult<InvariantSample> {
        let a = &self.cfg.attractor;
        Ok(sample_invariant_set(
            &self.u0,
            &self.op,
            &self.model,
            &self.integrator,
            a.burn_in,
            a.samples,
        )?)
    }

    fn r(&self) -> f64 {
        self.cfg.bounds.r.unwrap_or(self.model.r())
    }

    /// Largest fitted `M_r` over evenly spaced attractor samples.
    fn fit_m_r(&self, sample: &InvariantSample) -> CliResult<f64> {
        let n = sample.states.len();
        let count = self.cfg.bounds.fit_samples.min(n);
        let picks: Vec<&State> = (0..count).map(|i| &sample.states[i * n / count]).collect();
        let k = self.cfg.spectral.k.min(self.grid.len());
        let r = self.r();
        let fits = picks
            .par_iter()
            .map(|s| {
                let w = build_weight(&self.model, &self.grid, &s.u, self.cfg.spectral.epsilon)?;
                let p = WeightedProblem::new(&self.op, &w)?;
                let rep = solve_weighted(&p, k)?;
                Ok(fit_clr_constant(&p, &eigenvalue_sweep(&rep), r, false)?.m_r)
            })
            .collect::<wavedim::Result<Vec<f64>>>()?;
        Ok(fits.into_iter().fold(0.0, f64::max))
    }
}

fn sup_csv(sample: &InvariantSample, setup: &Setup) -> Vec<u8> {
    let r = setup.model.r();
    let mut s = String::from("index,time,u_linf,u_lr,u_h10,v_l2,energy\n");
    for (i, (t, st)) in sample.times.iter().zip(&sample.states).enumerate() {
        let _ = writeln!(
            s,
            "{i},{t},{},{},{},{},{}",
            st.u.amax(),
            setup.grid.lp_norm(st.u.as_slice(), r),
            setup.op.h10_norm(&st.u),
            setup.op.l2_inner(&st.v, &st.v).sqrt(),
            energy(st, &setup.op, &setup.model)
        );
    }
    s.into_bytes()
}

fn report_attractor(report: &mut Report, sample: &InvariantSample, ct: &CTildeEstimate) {
    report.section("attractor");
    report.kv("burn_in", sample.burn_in);
    report.kv("samples", sample.states.len());
    report.kv("sup_u_linf", sample.sup.u_linf);
    report.kv("sup_u_lr", sample.sup.u_lr);
    report.kv("sup_u_h10", sample.sup.u_h10);
    report.kv("sup_v_l2", sample.sup.v_l2);
    report.kv("c_tilde", ct.value);
    report.kv(
        "c_tilde_note",
        "sample-based estimate (lower estimate of the sup over the invariant set)",
    );
    report.kv("c_tilde_safety", ct.safety_factor);
}

pub fn simulate(setup: &Setup) -> CliResult<Report> {
    let mut report = Report::default();
    setup.header(&mut report, "simulate");
    let traj = integrate(&setup.u0, &setup.op, &setup.model, &setup.integrator)?;
    setup.write(
        "trajectory.csv",
        &trajectory_csv(&traj, &setup.op, &setup.model)?,
    )?;
    let last_t = *traj.times.last().unwrap_or(&0.0);
    setup.write(
        "final_state.bin",
        &encode_states(&setup.grid, &[last_t], std::slice::from_ref(traj.last()))?,
    )?;
    let e: Vec<f64> = traj
        .states
        .iter()
        .map(|s| energy(s, &setup.op, &setup.model))
        .collect();
    report.section("trajectory");
    report.kv("dt", setup.integrator.dt);
    report.kv("records", traj.len());
    report.kv("final_time", last_t);
    report.kv("escaped", traj.escaped);
    report.kv("energy_initial", e[0]);
    report.kv("energy_final", e[e.len() - 1]);
    report.kv(
        "max_energy_increase",
        e.windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max),
    );
    if traj.escaped {
        return Err(Error::FiniteTimeEscape {
            time: last_t,
            norm: setup.op.energy_norm(traj.last()),
        }
        .into());
    }
    Ok(report)
}

pub fn attractor(setup: &Setup) -> CliResult<Report> {
    let mut report = Report::default();
    setup.header(&mut report, "attractor");
    setup.check_dissipative(&mut report)?;
    let sample = setup.attractor_sample()?;
    let ct = c_tilde(
        &setup.model,
        &setup.grid,
        &sample.states,
        setup.cfg.bounds.safety,
    )?;
    setup.write("attractor.csv", &sup_csv(&sample, setup))?;
    report_attractor(&mut report, &sample, &ct);
    Ok(report)
}

pub fn tangent(setup: &Setup) -> CliResult<Report> {
    let mut report = Report::default();
    setup.header(&mut report, "tangent");
    let t = &setup.cfg.tangent;
    let dt = t.dt.unwrap_or(setup.integrator.dt);
    let horizon = t.horizon.unwrap_or(setup.integrator.horizon);
    let mut base_cfg = IntegratorConfig::new(dt, horizon, setup.alpha);
    base_cfg.energy_ceiling = setup.integrator.energy_ceiling;
    let base = integrate(&setup.u0, &setup.op, &setup.model, &base_cfg)?;
    if base.escaped {
        return Err(Error::FiniteTimeEscape {
            time: *base.times.last().unwrap_or(&0.0),
            norm: setup.op.energy_norm(base.last()),
        }
        .into());
    }
    let lambda1 = setup.lambda1()?;
    let delta = match t.delta {
        Some(d) => d,
        None => delta_star(lambda1, setup.alpha)?,
    };
    let n = setup.grid.len();
    let mut rng = stream(setup.cfg.seed, 2);
    let dirs: Vec<State> = (0..t.d)
        .map(|_| {
            State::new(
                DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
                DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            )
        })
        .collect::<wavedim::Result<_>>()?;
    let tcfg = TangentConfig {
        delta,
        qr_interval: t.qr_interval,
        record_trace: true,
        lambda1: Some(lambda1),
    };
    let evo = evolve_tangent(
        &base,
        &TangentFrame::new(dirs)?,
        &setup.op,
        &setup.model,
        &tcfg,
    )?;
    setup.write("volume.csv", &volume_csv(&evo.history)?)?;

    let pairs = gram_trace_pairs(&evo.history);
    let defect = pairs
        .iter()
        .map(|(_, rate, tb)| (rate - tb).abs() / tb.abs())
        .fold(0.0_f64, f64::max);
    let slacks: Vec<f64> = evo
        .history
        .iter()
        .filter_map(|s| Some(s.trace_bound? - s.trace_b?))
        .collect();
    report.section("tangent");
    report.kv("d", t.d);
    report.kv("dt", dt);
    report.kv("horizon", horizon);
    report.kv("qr_interval", t.qr_interval);
    report.kv("lambda1", lambda1);
    report.kv("delta", delta);
    report.kv("final_log_volume", evo.frame.log_volume());
    report.kv("mean_volume_rate", evo.frame.log_volume() / horizon);
    report.kv("max_relative_gram_trace_defect", defect);
    if !slacks.is_empty() {
        report.kv(
            "trace_bound_violations",
            slacks.iter().filter(|s| **s < 0.0).count(),
        );
        report.kv(
            "trace_bound_min_slack",
            slacks.iter().copied().fold(f64::INFINITY, f64::min),
        );
    } else {
        report.kv(
            "trace_bound",
            "not evaluated (delta differs from the optimal shift)",
        );
    }
    Ok(report)
}

pub fn spectral(setup: &Setup) -> CliResult<Report> {
    let mut report = Report::default();
    setup.header(&mut report, "spectral");
    let s = &setup.cfg.spectral;
    let u_tilde = match s.base {
        SpectralBase::Initial => setup.u0.u.clone(),
        SpectralBase::Zero => DVector::zeros(setup.grid.len()),
    };
    let w = build_weight(&setup.model, &setup.grid, &u_tilde, s.epsilon)?;
    let p = WeightedProblem::new(&setup.op, &w)?;
    let k = s.k.min(setup.grid.len());
    let rep = solve_weighted(&p, k)?;
    let sweep = s.sweep.clone().unwrap_or_else(|| eigenvalue_sweep(&rep));
    let r = setup.r();
    let fit = fit_clr_constant(&p, &sweep, r, s.dense_check)?;
    let m_r = setup.cfg.bounds.m_r.unwrap_or(fit.m_r);
    let audit = asymptotic_audit(&rep, m_r, r, &setup.grid, &w)?;
    setup.write("spectral.csv", &spectral_csv(&rep)?)?;
    setup.write("counting.csv", &counting_csv(&fit)?)?;

    report.section("spectral");
    report.kv("k", k);
    report.kv("weight_epsilon", s.epsilon);
    report.kv("lambda_1", rep.lambdas[0]);
    report.kv("lambda_k", rep.lambdas[k - 1]);
    report.kv("r", r);
    report.kv("sweep_points", sweep.len());
    let mismatches = fit
        .rows
        .iter()
        .filter(|row| row.below.is_some_and(|b| b != row.negative))
        .count();
    if s.dense_check {
        report.kv("count_identity_mismatches", mismatches);
    }
    report.kv("fitted_m_r", fit.m_r);
    report.kv("audit_m_r", m_r);
    report.kv(
        "clr_mode",
        if fit.diagnostic {
            "diagnostic (the inequality is asserted only in three dimensions with r > 3)"
        } else {
            "asserted"
        },
    );
    report.kv("asymptotic_pass", audit.pass);
    report.kv("asymptotic_violations", audit.violations);
    report.kv("asymptotic_min_margin", audit.min_margin);
    report.kv(
        "asymptotic_tie_slack",
        wavedim::spectral::ASYMPTOTIC_TIE_SLACK,
    );
    if let Some(slope) = audit.slope {
        report.kv("log_mu_slope", slope);
    }
    if 2 * setup.grid.len() <= 2000 {
        let ops = mu_via_operator(&p, k)?;
        let worst = ops
            .mus
            .iter()
            .zip(&rep.lambdas)
            .map(|(mu, l)| (mu * l - 1.0).abs())
            .fold(0.0_f64, f64::max);
        report.kv("operator_max_mu_lambda_defect", worst);
        report.kv("operator_max_psi", ops.max_psi);
    }
    if mismatches > 0 {
        return Err(Error::Numerical(format!("{mismatches} counting identity mismatches")).into());
    }
    Ok(report)
}

struct BoundRun {
    bound: DimensionBound,
    sample: Option<InvariantSample>,
    fitted: bool,
}

fn compute_bound(setup: &Setup, report: &mut Report, need_sample: bool) -> CliResult<BoundRun> {
    let b = &setup.cfg.bounds;
    let lambda1 = match b.lambda1 {
        Some(l) => l,
        None => setup.lambda1()?,
    };
    let r = setup.r();
    let sample = if need_sample || b.c_tilde.is_none() || b.m_r.is_none() {
        setup.check_dissipative(report)?;
        Some(setup.attractor_sample()?)
    } else {
        None
    };
    let c = match (b.c_tilde, &sample) {
        (Some(c), _) => c,
        (None, Some(s)) => {
            let ct = c_tilde(&setup.model, &setup.grid, &s.states, b.safety)?;
            report_attractor(report, s, &ct);
            setup.write("attractor.csv", &sup_csv(s, setup))?;
            ct.value
        }
        (None, None) => unreachable!(),
    };
    let (m_r, fitted) = match (b.m_r, &sample) {
        (Some(m), _) => (m, false),
        (None, Some(s)) => (setup.fit_m_r(s)?, true),
        (None, None) => unreachable!(),
    };
    let inputs = BoundInputs {
        lambda1,
        alpha: setup.alpha,
        r,
        m_r,
        c_tilde: c,
    };
    let bound = dimension_bound(&inputs)?;
    setup.write("bound.csv", &bound_csv(std::slice::from_ref(&bound))?)?;

    report.section("bound");
    report.kv("lambda1", lambda1);
    report.kv(
        "lambda1_source",
        if b.lambda1.is_some() {
            "configured"
        } else {
            "computed"
        },
    );
    if b.lambda1.is_none() && setup.grid.len() <= 2000 {
        let fb = estimate_form_bounds(&setup.op, b.m_b)?;
        report.kv("form_lambda0", fb.lambda0);
        report.kv("form_upper_lambda0", fb.upper_lambda0);
        report.kv("m_b", fb.m_b);
    }
    report.kv("alpha", setup.alpha);
    report.kv("r", r);
    report.kv("m_r", m_r);
    report.kv(
        "m_r_source",
        if fitted {
            "fitted on attractor samples"
        } else {
            "configured"
        },
    );
    report.kv("c_tilde", c);
    report.kv(
        "c_tilde_source",
        if b.c_tilde.is_some() {
            "configured"
        } else {
            "sample estimate"
        },
    );
    report.kv("delta_star", bound.delta);
    report.kv("nu_alpha", bound.nu_alpha);
    report.kv("nu_alpha_times_alpha", bound.nu_alpha_alpha);
    report.kv("d_scan", bound.d_scan.d);
    if bound.d_scan.vacuous {
        report.kv("d_scan_note", "C~ = 0: the condition holds trivially");
    }
    report.kv("dim_H_bound", bound.d_closed_h);
    report.kv("dim_F_bound", bound.d_closed_f);
    report.kv("nu_limit_note", bound.limit_note);
    Ok(BoundRun {
        bound,
        sample,
        fitted,
    })
}

pub fn bound(setup: &Setup) -> CliResult<Report> {
    let mut report = Report::default();
    setup.header(&mut report, "bound");
    compute_bound(setup, &mut report, false)?;
    Ok(report)
}

pub fn pipeline(setup: &Setup) -> CliResult<Report> {
    let mut report = Report::default();
    setup.header(&mut report, "pipeline");
    let run = compute_bound(setup, &mut report, true)?;
    let sample = run.sample.as_ref().expect("pipeline always samples");
    let delta = delta_star(run.bound.inputs.lambda1, setup.alpha)?;
    let p = trace_exponents(&setup.model, &setup.op, &sample.states, setup.alpha, delta)?;
    let mut csv = String::from("j,p_j\n");
    for (j, x) in p.iter().enumerate() {
        let _ = writeln!(csv, "{},{x}", j + 1);
    }
    setup.write("ky_fan.csv", csv.as_bytes())?;
    let empirical = first_contracting_dimension(&p);
    let analytic = run.bound.d_scan.d;
    report.section("cross-check");
    report.kv("ky_fan_samples", sample.states.len());
    report.kv(
        "empirical_contraction_d",
        empirical.map_or("none".to_string(), |d| d.to_string()),
    );
    report.kv("analytic_d", analytic);
    report.kv("m_r_fitted", run.fitted);
    let holds = empirical.is_some_and(|d| d as u64 <= analytic);
    report.kv("empirical_le_analytic", if holds { "yes" } else { "no" });
    Ok(report)
}

pub fn write_report(setup: &Setup, report: &Report) -> CliResult<()> {
    setup.write("report.txt", report.as_str().as_bytes())
}
