//! CSV tables and the binary state dump.
//!
//! All files are written atomically: the bytes go to a sibling temporary file
//! which is then renamed over the destination.
//!
//! State dump layout (little-endian):
//!
//! ```text
//! magic      8 bytes  b"WDSTATE1"
//! dim        u32
//! per axis   u64 n, f64 lower, f64 upper
//! count      u64      number of stored states
//! per state  f64 time, n_total × f64 u, n_total × f64 v
//! ```

use std::io::Write;
use std::path::Path;

use crate::bounds::DimensionBound;
use crate::discretization::{EllipticOperator, SpatialGrid};
use crate::error::{Error, Result};
use crate::model::NonlinearModel;
use crate::semiflow::{energy_with_inertia, Trajectory};
use crate::spectral::{ClrFit, SpectralReport};
use crate::state::State;
use crate::tangent::VolumeSample;

pub const STATE_DUMP_MAGIC: &[u8; 8] = b"WDSTATE1";

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `time, energy, u_h10, v_l2`
pub fn trajectory_csv(
    traj: &Trajectory,
    op: &EllipticOperator,
    model: &NonlinearModel,
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "energy", "u_h10", "v_l2"])?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let e = energy_with_inertia(s, op, model, traj.config.inertia);
        w.write_record([
            t.to_string(),
            e.to_string(),
            op.h10_norm(&s.u).to_string(),
            op.l2_inner(&s.v, &s.v).sqrt().to_string(),
        ])?;
    }
    finish(w)
}

/// `time, log_volume, trace_b, trace_bound`
pub fn volume_csv(history: &[VolumeSample]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "log_volume", "trace_b", "trace_bound"])?;
    for s in history {
        w.write_record([
            s.time.to_string(),
            s.log_volume.to_string(),
            opt(s.trace_b),
            opt(s.trace_bound),
        ])?;
    }
    finish(w)
}

/// `j, lambda, mu`
pub fn spectral_csv(report: &SpectralReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["j", "lambda", "mu"])?;
    for (j, (l, m)) in report.lambdas.iter().zip(&report.mus).enumerate() {
        w.write_record([(j + 1).to_string(), l.to_string(), m.to_string()])?;
    }
    finish(w)
}

/// `lambda_tilde, N, n, clr_bound, fitted_m_r`, with the bound evaluated at
/// the fitted constant.
pub fn counting_csv(fit: &ClrFit) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda_tilde", "N", "n", "clr_bound", "fitted_m_r"])?;
    for row in &fit.rows {
        w.write_record([
            row.lambda_tilde.to_string(),
            opt(row.below),
            row.negative.to_string(),
            (fit.m_r * row.unit_bound).to_string(),
            fit.m_r.to_string(),
        ])?;
    }
    finish(w)
}

pub const BOUND_CSV_HEADER: [&str; 11] = [
    "lambda1",
    "alpha",
    "delta_star",
    "nu_alpha",
    "nu_alpha_alpha",
    "c_tilde",
    "m_r",
    "r",
    "d_scan",
    "dim_h_bound",
    "dim_f_bound",
];

pub fn bound_csv(bounds: &[DimensionBound]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOUND_CSV_HEADER)?;
    for b in bounds {
        w.write_record([
            b.inputs.lambda1.to_string(),
            b.inputs.alpha.to_string(),
            b.delta.to_string(),
            b.nu_alpha.to_string(),
            b.nu_alpha_alpha.to_string(),
            b.inputs.c_tilde.to_string(),
            b.inputs.m_r.to_string(),
            b.inputs.r.to_string(),
            b.d_scan.d.to_string(),
            b.d_closed_h.to_string(),
            b.d_closed_f.to_string(),
        ])?;
    }
    finish(w)
}

pub fn encode_states(grid: &SpatialGrid, times: &[f64], states: &[State]) -> Result<Vec<u8>> {
    if times.len() != states.len() {
        return Err(Error::invalid("times and states differ in length"));
    }
    let mut out = Vec::new();
    out.extend_from_slice(STATE_DUMP_MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for k in 0..grid.dim() {
        out.extend_from_slice(&(grid.points_per_axis()[k] as u64).to_le_bytes());
        out.extend_from_slice(&grid.lower()[k].to_le_bytes());
        out.extend_from_slice(&grid.upper()[k].to_le_bytes());
    }
    out.extend_from_slice(&(states.len() as u64).to_le_bytes());
    for (t, s) in times.iter().zip(states) {
        grid.check_len(s.len())?;
        out.extend_from_slice(&t.to_le_bytes());
        for x in s.u.iter().chain(s.v.iter()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::invalid("truncated state dump"))?;
        self.pos = end;
        Ok(slice.try_into().expect("slice length checked"))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
}

pub fn decode_states(bytes: &[u8]) -> Result<(SpatialGrid, Vec<f64>, Vec<State>)> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<8>()? != STATE_DUMP_MAGIC {
        return Err(Error::invalid("not a state dump (bad magic)"));
    }
    let dim = u32::from_le_bytes(r.take()?) as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::invalid("state dump: bad dimension"));
    }
    let (mut n, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..dim {
        n.push(r.u64()? as usize);
        lo.push(r.f64()?);
        hi.push(r.f64()?);
    }
    let grid = SpatialGrid::new(&lo, &hi, &n)?;
    let count = r.u64()? as usize;
    let len = grid.len();
    let mut times = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(r.f64()?);
        let mut vals = Vec::with_capacity(2 * len);
        for _ in 0..2 * len {
            vals.push(r.f64()?);
        }
        states.push(State::from_slices(&vals[..len], &vals[len..])?);
    }
    if r.pos != bytes.len() {
        return Err(Error::invalid("trailing bytes after state dump"));
    }
    Ok((grid, times, states))
}
