//! Finite-difference analogues of `A = -Δ + β(x)` with homogeneous Dirichlet
//! conditions on boxes, and the inner products of `Z₀ = H¹₀ × L²`.
//!
//! Interior points are indexed lexicographically with the last axis varying
//! fastest: index = ((i₀ · n₁) + i₁) · n₂ + i₂. All integrals use the midpoint
//! rule with weight `h₀ h₁ ⋯` per point.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::banded::SymmetricBand;
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::State;

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    n: Vec<usize>,
    h: Vec<f64>,
}

impl SpatialGrid {
    /// Box `∏ (lower_k, upper_k)` with `n_k` interior points per axis.
    pub fn new(lower: &[f64], upper: &[f64], n: &[usize]) -> Result<Self> {
        let dim = n.len();
        if !(1..=3).contains(&dim) || lower.len() != dim || upper.len() != dim {
            return Err(Error::invalid(
                "grid needs 1 to 3 axes with matching lower/upper/n lengths",
            ));
        }
        let mut h = Vec::with_capacity(dim);
        for k in 0..dim {
            if n[k] == 0 {
                return Err(Error::invalid(format!(
                    "axis {k}: need at least one interior point"
                )));
            }
            let len = upper[k] - lower[k];
            if !len.is_finite() || len <= 0.0 {
                return Err(Error::invalid(format!(
                    "axis {k}: empty or non-finite interval"
                )));
            }
            h.push(len / (n[k] + 1) as f64);
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            n: n.to_vec(),
            h,
        })
    }

    /// One-dimensional interval `(a, b)`.
    pub fn interval(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(&[a], &[b], &[n])
    }

    /// Cube `(a, b)^dim` with `n` points per axis.
    pub fn cube(dim: usize, a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(&vec![a; dim], &vec![b; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn points_per_axis(&self) -> &[usize] {
        &self.n
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Number of interior points.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of one point.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    /// Index stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let dim = self.dim();
        let mut s = vec![1; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.n[k + 1];
        }
        s
    }

    /// Per-axis integer coordinates of a flat index.
    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let dim = self.dim();
        let mut idx = vec![0; dim];
        for k in (0..dim).rev() {
            idx[k] = index % self.n[k];
            index /= self.n[k];
        }
        idx
    }

    /// Physical coordinates of a flat index.
    pub fn point(&self, index: usize) -> Vec<f64> {
        self.multi_index(index)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lower[k] + (i + 1) as f64 * self.h[k])
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Samples `f` at every interior point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> DVector<f64> {
        DVector::from_iterator(self.len(), (0..self.len()).map(|i| f(&self.point(i))))
    }

    /// Midpoint-rule `∫ f`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.cell_volume() * values.iter().sum::<f64>()
    }

    /// Midpoint-rule `L^p` norm, `p ≥ 1`.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        }
        (self.cell_volume() * values.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.cell_volume() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Potential `β(x)` sampled on the grid, together with the exponent `σ > 3/2`
/// of the uniformly local Lebesgue space it is assumed to live in.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    values: DVector<f64>,
    sigma: f64,
}

impl PotentialField {
    pub fn new(values: DVector<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 1.5) {
            return Err(Error::invalid(format!(
                "sigma must exceed 3/2, got {sigma}"
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values, sigma })
    }

    pub fn constant(grid: &SpatialGrid, c: f64, sigma: f64) -> Result<Self> {
        Self::new(DVector::from_element(grid.len(), c), sigma)
    }

    pub fn zero(grid: &SpatialGrid) -> Self {
        Self {
            values: DVector::zeros(grid.len()),
            sigma: 2.0,
        }
    }

    pub fn from_fn(grid: &SpatialGrid, sigma: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(grid.sample(f), sigma)
    }

    /// Reads one value per line in interior-index order. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_file(grid: &SpatialGrid, path: &Path, sigma: f64) -> Result<Self> {
        let values = read_field_file(path)?;
        grid.check_len(values.len())?;
        Self::new(DVector::from_vec(values), sigma)
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Reads a one-value-per-line scalar field file.
pub fn read_field_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: f64 = line.parse().map_err(|_| {
            Error::invalid(format!(
                "{}:{}: not a number: {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        values.push(x);
    }
    Ok(values)
}

/// Discrete `A = -Δ + β` with the centered second-order stencil.
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: SpatialGrid,
    beta: PotentialField,
    inv_h2: Vec<f64>,
    strides: Vec<usize>,
}

impl EllipticOperator {
    pub fn assemble(grid: &SpatialGrid, beta: &PotentialField) -> Result<Self> {
        grid.check_len(beta.values.len())?;
        if let Some((index, &value)) = beta.values.iter().enumerate().find(|(_, x)| !x.is_finite())
        {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self {
            grid: grid.clone(),
            beta: beta.clone(),
            inv_h2: grid.h.iter().map(|h| 1.0 / (h * h)).collect(),
            strides: grid.strides(),
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn beta(&self) -> &PotentialField {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `out = A u` (or `out += A u` when `accumulate`).
    fn apply_impl(&self, u: &[f64], out: &mut [f64], with_beta: bool) {
        let n = self.len();
        assert!(u.len() == n && out.len() == n);
        let dim = self.grid.dim();
        let mut multi = vec![0usize; dim];
        for i in 0..n {
            let mut acc = if with_beta {
                self.beta.values[i] * u[i]
            } else {
                0.0
            };
            for k in 0..dim {
                let s = self.strides[k];
                let mut lap = 2.0 * u[i];
                if multi[k] > 0 {
                    lap -= u[i - s];
                }
                if multi[k] + 1 < self.grid.n[k] {
                    lap -= u[i + s];
                }
                acc += self.inv_h2[k] * lap;
            }
            out[i] = acc;
            // advance the multi-index, last axis fastest
            for k in (0..dim).rev() {
                multi[k] += 1;
                if multi[k] < self.grid.n[k] {
                    break;
                }
                multi[k] = 0;
            }
        }
    }

    pub fn apply_to(&self, u: &[f64], out: &mut [f64]) {
        self.apply_impl(u, out, true);
    }

    pub fn apply(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        self.apply_impl(u.as_slice(), out.as_mut_slice(), true);
        out
    }

    /// `-Δ u` without the potential.
    pub fn apply_laplacian(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        self.apply_impl(u.as_slice(), out.as_mut_slice(), false);
        out
    }

    /// Bandwidth of the stencil matrix in the lexicographic ordering.
    pub fn bandwidth(&self) -> usize {
        self.strides[0].min(self.len().saturating_sub(1))
    }

    /// `A + diag(shift)` in banded storage.
    pub fn to_band(&self, shift: Option<&[f64]>) -> SymmetricBand {
        let n = self.len();
        let mut band = SymmetricBand::zeros(n, self.bandwidth());
        for i in 0..n {
            let multi = self.grid.multi_index(i);
            let mut diag = self.beta.values[i];
            for k in 0..self.grid.dim() {
                diag += 2.0 * self.inv_h2[k];
                if multi[k] > 0 {
                    band.add(i, i - self.strides[k], -self.inv_h2[k]);
                }
            }
            if let Some(s) = shift {
                diag += s[i];
            }
            band.add(i, i, diag);
        }
        band
    }

    /// Dense matrix of `A` (stencil plus diagonal potential).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let band = self.to_band(None);
        DMatrix::from_fn(self.len(), self.len(), |i, j| band.get(i, j))
    }

    /// Dense matrix of `-Δ` alone.
    pub fn laplacian_dense(&self) -> DMatrix<f64> {
        let mut m = self.to_dense();
        for i in 0..self.len() {
            m[(i, i)] -= self.beta.values[i];
        }
        m
    }

    /// The form `a(u, w) = ⟨A u, w⟩_{L²}`.
    pub fn a_form(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        self.grid.cell_volume() * self.apply(u).dot(w)
    }

    /// `‖u‖_{H¹₀} = a(u, u)^{1/2}`.
    pub fn h10_norm(&self, u: &DVector<f64>) -> f64 {
        self.a_form(u, u).max(0.0).sqrt()
    }

    pub fn l2_inner(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        self.grid.cell_volume() * u.dot(w)
    }

    /// Standard `H¹` norm squared: `‖∇u‖² + ‖u‖²`.
    pub fn h1_norm_sq(&self, u: &DVector<f64>) -> f64 {
        self.grid.cell_volume() * (self.apply_laplacian(u).dot(u) + u.dot(u))
    }

    /// True when `A` is positive definite, checked by a banded Cholesky.
    pub fn is_coercive(&self) -> bool {
        self.to_band(None).cholesky().is_ok()
    }

    /// The `Z₀` inner product `a(u₁, u₂) + ⟨v₁, v₂⟩_{L²}`.
    pub fn energy_inner(&self, a: &State, b: &State) -> Result<f64> {
        a.check_len(self.len())?;
        b.check_len(self.len())?;
        Ok(self.a_form(&a.u, &b.u) + self.l2_inner(&a.v, &b.v))
    }

    pub fn energy_norm(&self, s: &State) -> f64 {
        (self.a_form(&s.u, &s.u) + self.l2_inner(&s.v, &s.v))
            .max(0.0)
            .sqrt()
    }
}

/// Free-function form of [`EllipticOperator::energy_inner`].
pub fn energy_inner(a: &State, b: &State, op: &EllipticOperator) -> Result<f64> {
    op.energy_inner(a, b)
}

/// Default unit-cube Sobolev constant `M_B`.
pub const DEFAULT_M_B: f64 = 2.0;

/// Coercivity and norm-equivalence constants of the form `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormBounds {
    /// Smallest eigenvalue of `A` against the `L²` product.
    pub lambda1: f64,
    /// `λ₀ ‖u‖²_{H¹} ≤ a(u, u)`.
    pub lambda0: f64,
    /// `a(u, u) ≤ Λ₀ ‖u‖²_{H¹}`.
    pub upper_lambda0: f64,
    /// Unit-cube Sobolev embedding constant (configured, not computed).
    pub m_b: f64,
}

pub fn estimate_form_bounds(op: &EllipticOperator, m_b: f64) -> Result<FormBounds> {
    if !(m_b > 0.0) {
        return Err(Error::invalid("M_B must be positive"));
    }
    let a = op.to_dense();
    let (values, vectors) = linalg::symmetric_eigen_ascending(a.clone());
    let lambda1 = values[0];
    if lambda1 <= 0.0 {
        let v = vectors.column(0);
        let peak_index = v.iamax();
        return Err(Error::CoercivityViolated {
            lambda1,
            peak_index,
        });
    }
    let mut h1 = op.laplacian_dense();
    for i in 0..op.len() {
        h1[(i, i)] += 1.0;
    }
    let (pencil, _) = linalg::generalized_symmetric_eigen(&a, &h1)?;
    Ok(FormBounds {
        lambda1,
        lambda0: pencil[0],
        upper_lambda0: pencil[pencil.len() - 1],
        m_b,
    })
}

/// Smallest eigenvalue of `A` only (dense).
pub fn smallest_eigenvalue(op: &EllipticOperator) -> f64 {
    linalg::symmetric_eigenvalues_ascending(op.to_dense())[0]
}

/// Discrete `|ω|_{L^σ_u} = sup_y ‖ω‖_{L^σ(y + [-½, ½]^N)}`.
///
/// Cube centers run over a lattice with stride `min(h_k, 0.5)` per axis,
/// from half a unit outside the box to half a unit beyond it. Each grid point
/// stands for its cell `x ± h/2`, weighted by the fraction of the cell inside
/// the cube, so a constant field returns the constant exactly once a whole
/// unit cube fits inside the box.
pub fn uniform_lebesgue_norm(grid: &SpatialGrid, field: &[f64], sigma: f64) -> Result<f64> {
    grid.check_len(field.len())?;
    if !(sigma >= 1.0) {
        return Err(Error::invalid(format!("sigma must be >= 1, got {sigma}")));
    }
    let dim = grid.dim();
    let powered: Vec<f64> = field.iter().map(|x| x.abs().powf(sigma)).collect();

    // per-axis center lattices
    let centers: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let stride = grid.h[k].min(0.5);
            let start = grid.lower[k] - 0.5;
            let stop = grid.upper[k] + 0.5;
            let count = ((stop - start) / stride).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * stride).collect()
        })
        .collect();

    // overlap weights of each axis cell with each candidate cube, per axis
    let overlaps: Vec<Vec<Vec<(usize, f64)>>> = (0..dim)
        .map(|k| {
            centers[k]
                .iter()
                .map(|&c| {
                    let (lo, hi) = (c - 0.5, c + 0.5);
                    (0..grid.n[k])
                        .filter_map(|i| {
                            let x = grid.lower[k] + (i + 1) as f64 * grid.h[k];
                            let w = ((x + 0.5 * grid.h[k]).min(hi) - (x - 0.5 * grid.h[k]).max(lo))
                                .max(0.0);
                            (w > 0.0).then_some((i, w))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let strides = grid.strides();
    let mut best = 0.0_f64;
    let mut cube = vec![0usize; dim];
    loop {
        let mut total = 0.0;
        accumulate_cube(&overlaps, &cube, &strides, &powered, 0, 0, 1.0, &mut total);
        best = best.max(total);
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(best.powf(1.0 / sigma));
            }
            k -= 1;
            cube[k] += 1;
            if cube[k] < centers[k].len() {
                break;
            }
            cube[k] = 0;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn accumulate_cube(
    overlaps: &[Vec<Vec<(usize, f64)>>],
    cube: &[usize],
    strides: &[usize],
    powered: &[f64],
    axis: usize,
    offset: usize,
    weight: f64,
    total: &mut f64,
) {
    for &(i, w) in &overlaps[axis][cube[axis]] {
        let idx = offset + i * strides[axis];
        if axis + 1 == cube.len() {
            *total += weight * w * powered[idx];
        } else {
            accumulate_cube(
                overlaps,
                cube,
                strides,
                powered,
                axis + 1,
                idx,
                weight * w,
                total,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn three_point_stencil_rows() {
        let grid = SpatialGrid::interval(0.0, PI, 3).unwrap();
        let h = PI / 4.0;
        assert!((grid.spacing()[0] - h).abs() < 1e-15);
        let op = EllipticOperator::assemble(&grid, &PotentialField::zero(&grid)).unwrap();
        let m = op.to_dense() * (h * h);
        let expected =
            DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert!((m - expected).amax() < 1e-12);
    }

    #[test]
    fn lexicographic_order_last_axis_fastest() {
        let grid = SpatialGrid::new(&[0.0, 0.0], &[1.0, 1.0], &[2, 3]).unwrap();
        assert_eq!(grid.multi_index(4), vec![1, 1]);
        assert_eq!(grid.strides(), vec![3, 1]);
        let p = grid.point(1);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_potential() {
        let grid = SpatialGrid::interval(0.0, 1.0, 4).unwrap();
        let mut v = DVector::zeros(4);
        v[2] = f64::NAN;
        assert!(matches!(
            PotentialField::new(v, 2.0),
            Err(Error::NonFinite { index: 2, .. })
        ));
        assert!(PotentialField::constant(&grid, 1.0, 1.2).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpatialGrid::interval(1.0, 0.0, 4).is_err());
        assert!(SpatialGrid::interval(0.0, 1.0, 0).is_err());
        assert!(SpatialGrid::new(&[0.0; 4], &[1.0; 4], &[2; 4]).is_err());
    }

    #[test]
    fn symmetric_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = SpatialGrid::interval(0.0, PI, 32).unwrap();
        let beta = PotentialField::from_fn(&grid, 2.0, |_| 0.0).unwrap();
        let beta =
            PotentialField::new(beta.values().map(|_| rng.random_range(0.0..3.0)), 2.0).unwrap();
        let op = EllipticOperator::assemble(&grid, &beta).unwrap();
        for _ in 0..100 {
            let u = DVector::from_fn(32, |_, _| rng.random_range(-1.0..1.0));
            let w = DVector::from_fn(32, |_, _| rng.random_range(-1.0..1.0));
            let lhs = op.l2_inner(&op.apply(&u), &w);
            let rhs = op.l2_inner(&u, &op.apply(&w));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn stencil_matches_dense_in_2d() {
        let grid = SpatialGrid::new(&[0.0, 0.0], &[1.0, 2.0], &[4, 5]).unwrap();
        let beta = PotentialField::from_fn(&grid, 2.0, |x| x[0] + x[1] * x[1]).unwrap();
        let op = EllipticOperator::assemble(&grid, &beta).unwrap();
        let u = grid.sample(|x| (3.0 * x[0]).sin() * x[1]);
        let dense = op.to_dense() * &u;
        assert!((dense - op.apply(&u)).amax() < 1e-10);
    }

    #[test]
    fn energy_inner_of_first_mode() {
        let n = 200;
        let grid = SpatialGrid::interval(0.0, PI, n).unwrap();
        let op = EllipticOperator::assemble(&grid, &PotentialField::zero(&grid)).unwrap();
        let mut phi = grid.sample(|x| x[0].sin());
        let norm = op.l2_inner(&phi, &phi).sqrt();
        phi /= norm;
        let s = State::new(phi, DVector::zeros(n)).unwrap();
        let e = op.energy_inner(&s, &s).unwrap();
        assert!((e - 1.0).abs() < 1e-4);
        let zero = State::zeros(n);
        assert_eq!(op.energy_inner(&zero, &zero).unwrap(), 0.0);
        assert!(op.energy_inner(&zero, &State::zeros(3)).is_err());
    }

    #[test]
    fn lambda1_limits() {
        let grid = SpatialGrid::interval(0.0, PI, 128).unwrap();
        let op = EllipticOperator::assemble(&grid, &PotentialField::zero(&grid)).unwrap();
        let fb = estimate_form_bounds(&op, 1.0).unwrap();
        assert!((fb.lambda1 - 1.0).abs() < 1e-4);
        let shifted =
            EllipticOperator::assemble(&grid, &PotentialField::constant(&grid, 2.5, 2.0).unwrap())
                .unwrap();
        let fb2 = estimate_form_bounds(&shifted, 1.0).unwrap();
        assert!((fb2.lambda1 - 3.5).abs() < 1e-4);
        assert!(fb2.lambda0 > 0.0 && fb2.lambda0 <= fb2.upper_lambda0);
    }

    #[test]
    fn coercivity_violation_is_reported() {
        let grid = SpatialGrid::interval(0.0, PI, 32).unwrap();
        let op =
            EllipticOperator::assemble(&grid, &PotentialField::constant(&grid, -2.0, 2.0).unwrap())
                .unwrap();
        let err = estimate_form_bounds(&op, 1.0).unwrap_err();
        assert!(err.is_hypothesis_violation());
        assert!(
            matches!(err, Error::CoercivityViolated { peak_index, .. } if (14..18).contains(&peak_index))
        );
        assert!(!op.is_coercive());
    }

    #[test]
    fn uniform_norm_of_constant() {
        let grid = SpatialGrid::interval(0.0, 5.0, 49).unwrap();
        let f = vec![2.0; 49];
        let norm = uniform_lebesgue_norm(&grid, &f, 2.0).unwrap();
        assert!((norm - 2.0).abs() < 1e-12, "{norm}");
        let grid2 = SpatialGrid::cube(2, 0.0, 3.0, 29).unwrap();
        let norm2 = uniform_lebesgue_norm(&grid2, &vec![0.5; grid2.len()], 3.0).unwrap();
        assert!((norm2 - 0.5).abs() < 1e-12, "{norm2}");
    }

    #[test]
    fn uniform_norm_of_compact_support_is_global_norm() {
        let grid = SpatialGrid::interval(0.0, 6.0, 119).unwrap();
        let f: Vec<f64> = (0..119)
            .map(|i| {
                let x = grid.point(i)[0];
                if (2.6..=3.4).contains(&x) {
                    (x - 3.0).cos()
                } else {
                    0.0
                }
            })
            .collect();
        let norm = uniform_lebesgue_norm(&grid, &f, 2.0).unwrap();
        let global = grid.lp_norm(&f, 2.0);
        assert!((norm - global).abs() < 1e-12 * global, "{norm} vs {global}");
    }
}
