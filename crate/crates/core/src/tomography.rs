//! Wigner tomography: exact grids from states, simulated measurements,
//! least-squares density-matrix reconstruction, bootstrap error bars, and
//! quadrature-variance extraction.
//!
//! The Wigner value at β is (2/π)·Tr[ρ·D(2β)·P], using the identity
//! D(β)·P·D(β)† = D(2β)·P, so a single displacement-matrix evaluation per
//! pixel gives the exact kernel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::{displacement_elements, CavityState};
use crate::fsutil::write_atomic;

/// Maximum attainable |W|, 2/π.
pub const WIGNER_BOUND: f64 = 2.0 / std::f64::consts::PI;

/// Centered square grid in phase space: both axes run over
/// −round(extent/spacing)·spacing ..= +round(extent/spacing)·spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    extent: f64,
    spacing: f64,
}

impl GridGeometry {
    pub fn new(extent: f64, spacing: f64) -> Result<Self> {
        if !(extent > 0.0 && spacing > 0.0 && extent >= spacing) {
            return Err(Error::InvalidGrid { extent, spacing });
        }
        Ok(Self { extent, spacing })
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Points per axis, always odd so the origin is a grid point.
    pub fn side(&self) -> usize {
        2 * (self.extent / self.spacing).round() as usize + 1
    }

    pub fn pixels(&self) -> usize {
        self.side() * self.side()
    }

    pub fn min(&self) -> f64 {
        -((self.side() / 2) as f64) * self.spacing
    }

    pub fn axis(&self) -> Vec<f64> {
        let min = self.min();
        (0..self.side()).map(|i| min + i as f64 * self.spacing).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Analytic values; bounded by 2/π.
    Exact,
    /// Scaled and noisy values; unbounded.
    Measured,
}

/// Wigner values sampled on a [`GridGeometry`], stored row-major with the
/// x index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    geometry: GridGeometry,
    values: Vec<f64>,
    kind: GridKind,
}

impl WignerGrid {
    fn new(geometry: GridGeometry, values: Vec<f64>, kind: GridKind) -> Self {
        debug_assert_eq!(values.len(), geometry.pixels());
        if kind == GridKind::Exact {
            debug_assert!(
                values.iter().all(|v| v.abs() <= WIGNER_BOUND + 1e-9),
                "exact Wigner values must stay within ±2/π"
            );
        }
        Self { geometry, values, kind }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.geometry.side() + ip]
    }

    /// Writes a geometry comment line, then one `x,p,w` row per pixel with
    /// LF endings and 17 significant digits.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let kind = match self.kind {
            GridKind::Exact => "Exact",
            GridKind::Measured => "Measured",
        };
        let mut out = String::with_capacity(self.values.len() * 72 + 80);
        let lo = self.geometry.min();
        let hi = -lo;
        let step = self.geometry.spacing;
        out.push_str(&format!(
            "# x:{lo:e}:{hi:e}:{step:e} p:{lo:e}:{hi:e}:{step:e} kind:{kind}\n"
        ));
        let axis = self.geometry.axis();
        for (ix, x) in axis.iter().enumerate() {
            for (ip, p) in axis.iter().enumerate() {
                out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", x, p, self.value(ix, ip)));
            }
        }
        write_atomic(path, &out)
    }
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite
/// within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidDensityMatrix {
                detail: format!("shape {}x{}", m.nrows(), m.ncols()),
            });
        }
        let herm_err = (&m - m.adjoint()).iter().map(|e| e.norm()).fold(0.0, f64::max);
        if herm_err > 1e-10 {
            return Err(Error::InvalidDensityMatrix {
                detail: format!("Hermiticity violated by {herm_err:.2e}"),
            });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix {
                detail: format!("trace {trace} not 1"),
            });
        }
        let min_eig = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eig < -1e-10 {
            return Err(Error::InvalidDensityMatrix {
                detail: format!("negative eigenvalue {min_eig:.2e}"),
            });
        }
        Ok(Self { m })
    }

    pub fn from_pure(state: &CavityState) -> Self {
        let d = state.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = state.amplitudes()[i] * state.amplitudes()[j].conj();
            }
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// Writes one `i,j,re,im` row per entry, row-major, LF endings.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let d = self.dim();
        let mut out = String::with_capacity(d * d * 56);
        for i in 0..d {
            for j in 0..d {
                let e = self.m[(i, j)];
                out.push_str(&format!("{},{},{:.16e},{:.16e}\n", i, j, e.re, e.im));
            }
        }
        write_atomic(path, &out)
    }
}

fn warn_if_grid_tight(geometry: &GridGeometry, n_top: usize) {
    let wanted = 3.0 + (n_top as f64).sqrt();
    if geometry.extent() < wanted {
        log::warn!(
            "grid extent {} below the {:.2} rule of thumb for support up to n={}",
            geometry.extent(),
            wanted,
            n_top
        );
    }
}

/// Exact Wigner function of a pure state on `geometry`.
pub fn wigner_exact(state: &CavityState, geometry: &GridGeometry) -> WignerGrid {
    let dim = state.dim();
    let n_top = state
        .amplitudes()
        .iter()
        .rposition(|a| a.norm_sqr() > 1e-12)
        .unwrap_or(0);
    warn_if_grid_tight(geometry, n_top);
    let axis = geometry.axis();
    let mut values = Vec::with_capacity(geometry.pixels());
    let psi = state.amplitudes();
    for &x in &axis {
        for &p in &axis {
            let t = displacement_elements(C64::new(2.0 * x, 2.0 * p), dim);
            // ⟨ψ|K|ψ⟩ with K[m,n] = T[m,n]·(−1)^n.
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..dim {
                let mut row = C64::new(0.0, 0.0);
                for n in 0..dim {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    row += t[(m, n)] * psi[n] * sign;
                }
                acc += psi[m].conj() * row;
            }
            values.push(WIGNER_BOUND * acc.re);
        }
    }
    WignerGrid::new(*geometry, values, GridKind::Exact)
}

/// Exact Wigner function of a density matrix on `geometry`.
pub fn wigner_exact_rho(rho: &DensityMatrix, geometry: &GridGeometry) -> WignerGrid {
    let dim = rho.dim();
    let n_top = (0..dim)
        .rev()
        .find(|&n| rho.matrix()[(n, n)].re > 1e-12)
        .unwrap_or(0);
    warn_if_grid_tight(geometry, n_top);
    let axis = geometry.axis();
    let mut values = Vec::with_capacity(geometry.pixels());
    for &x in &axis {
        for &p in &axis {
            let t = displacement_elements(C64::new(2.0 * x, 2.0 * p), dim);
            // Tr[ρK] with K[n,m] = T[n,m]·(−1)^m.
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..dim {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                for n in 0..dim {
                    acc += rho.matrix()[(m, n)] * t[(n, m)] * sign;
                }
            }
            values.push(WIGNER_BOUND * acc.re);
        }
    }
    WignerGrid::new(*geometry, values, GridKind::Exact)
}

/// Trapezoidal estimate of ∫∫ W dx dp. Equals 1 for a well-covered exact
/// grid and recovers the scaling of a measured one.
pub fn reduction_factor(grid: &WignerGrid) -> f64 {
    let side = grid.geometry().side();
    let h = grid.geometry().spacing();
    let w1 = |i: usize| if i == 0 || i == side - 1 { 0.5 } else { 1.0 };
    let mut acc = 0.0;
    for ix in 0..side {
        for ip in 0..side {
            acc += w1(ix) * w1(ip) * grid.value(ix, ip);
        }
    }
    acc * h * h
}

/// Scales an exact grid by `r` and adds i.i.d. Gaussian noise of width
/// `noise_sigma`, one independent ChaCha stream per pixel so the result is
/// reproducible and order-independent.
pub fn simulate_measurement(
    exact: &WignerGrid,
    r: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<WignerGrid> {
    assert_eq!(exact.kind(), GridKind::Exact, "measurement needs an exact grid");
    assert!(noise_sigma >= 0.0, "noise width must be nonnegative");
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidR { r });
    }
    let values: Vec<f64> = exact
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &w)| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            let z: f64 = rng.sample(StandardNormal);
            r * w + noise_sigma * z
        })
        .collect();
    Ok(WignerGrid::new(*exact.geometry(), values, GridKind::Measured))
}

/// Precomputed least-squares structure for a fixed grid and reconstruction
/// dimension: the real design matrix over the Hermitian parametrization and
/// the Cholesky factor of its normal matrix.
pub(crate) struct WignerDesign {
    dim: usize,
    design: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl WignerDesign {
    pub(crate) fn new(geometry: &GridGeometry, dim: usize) -> Result<Self> {
        let params = dim * dim;
        let pixels = geometry.pixels();
        if pixels < params {
            return Err(Error::UnderdeterminedGrid { pixels, params, dim });
        }
        let axis = geometry.axis();
        let mut design = DMatrix::zeros(pixels, params);
        let mut row = 0;
        for &x in &axis {
            for &p in &axis {
                let t = displacement_elements(C64::new(2.0 * x, 2.0 * p), dim);
                for d in 0..dim {
                    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                    design[(row, d)] = WIGNER_BOUND * sign * t[(d, d)].re;
                }
                let mut col = dim;
                for m in 0..dim {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    for n in m + 1..dim {
                        let k = t[(n, m)] * sign;
                        design[(row, col)] = 2.0 * WIGNER_BOUND * k.re;
                        design[(row, col + 1)] = -2.0 * WIGNER_BOUND * k.im;
                        col += 2;
                    }
                }
                row += 1;
            }
        }
        let normal = design.transpose() * &design;
        let chol = nalgebra::Cholesky::new(normal).ok_or(Error::SingularDesign)?;
        Ok(Self { dim, design, chol })
    }

    /// Unconstrained least-squares solution as a Hermitian matrix.
    pub(crate) fn solve(&self, values: &[f64]) -> DMatrix<C64> {
        let y = DVector::from_column_slice(values);
        let rhs = self.design.transpose() * y;
        let theta = self.chol.solve(&rhs);
        let dim = self.dim;
        let mut m = DMatrix::zeros(dim, dim);
        for d in 0..dim {
            m[(d, d)] = C64::new(theta[d], 0.0);
        }
        let mut col = dim;
        for i in 0..dim {
            for j in i + 1..dim {
                let e = C64::new(theta[col], theta[col + 1]);
                m[(i, j)] = e;
                m[(j, i)] = e.conj();
                col += 2;
            }
        }
        m
    }

    /// Predicted exact-Wigner values for a Hermitian matrix.
    pub(crate) fn forward(&self, m: &DMatrix<C64>) -> Vec<f64> {
        let dim = self.dim;
        let mut theta = DVector::zeros(dim * dim);
        for d in 0..dim {
            theta[d] = m[(d, d)].re;
        }
        let mut col = dim;
        for i in 0..dim {
            for j in i + 1..dim {
                theta[col] = m[(i, j)].re;
                theta[col + 1] = m[(i, j)].im;
                col += 2;
            }
        }
        (&self.design * theta).iter().copied().collect()
    }
}

/// Nearest density matrix: Hermitize, then project the spectrum onto the
/// unit-trace simplex (water-filling), keeping the eigenbasis.
fn project_to_density(raw: DMatrix<C64>) -> DMatrix<C64> {
    let h = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let dim = h.nrows();
    let se = h.symmetric_eigen();
    let mut lambda: Vec<f64> = se.eigenvalues.iter().copied().collect();
    let mut sorted = lambda.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = (sorted[0] - 1.0).max(0.0);
    for (k, &l) in sorted.iter().enumerate() {
        cum += l;
        let cand = (cum - 1.0) / (k as f64 + 1.0);
        if l - cand > 0.0 {
            theta = cand;
        } else {
            break;
        }
    }
    for l in lambda.iter_mut() {
        *l = (*l - theta).max(0.0);
    }
    let mut out = DMatrix::zeros(dim, dim);
    for (k, &mu) in lambda.iter().enumerate() {
        if mu == 0.0 {
            continue;
        }
        let v = se.eigenvectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += v[i] * v[j].conj() * mu;
            }
        }
    }
    out
}

/// Reconstructs a density matrix from a measured grid: estimates the
/// reduction factor by integration, rescales, solves the linear least
/// squares over Hermitian matrices, and projects onto the physical set.
pub fn reconstruct_density_matrix(measured: &WignerGrid, dim: usize) -> Result<DensityMatrix> {
    let r = reduction_factor(measured);
    if r <= 0.0 {
        return Err(Error::InvalidR { r });
    }
    warn_if_grid_tight(measured.geometry(), dim.saturating_sub(1));
    let design = WignerDesign::new(measured.geometry(), dim)?;
    let scaled: Vec<f64> = measured.values().iter().map(|v| v / r).collect();
    let raw = design.solve(&scaled);
    DensityMatrix::from_matrix(project_to_density(raw))
}

/// Overlap fidelity ⟨ψ|ρ|ψ⟩, clipped to [0, 1] against roundoff.
pub fn fidelity(rho: &DensityMatrix, target: &CavityState) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: rho.dim() });
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            acc += target.amplitudes()[i].conj() * rho.matrix()[(i, j)] * target.amplitudes()[j];
        }
    }
    let f = acc.re;
    debug_assert!((-1e-9..=1.0 + 1e-9).contains(&f), "fidelity {f} out of range");
    Ok(f.clamp(0.0, 1.0))
}

/// Spread of the reduction factor and fidelity under residual resampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapStats {
    pub r_mean: f64,
    pub r_std: f64,
    pub f_mean: f64,
    pub f_std: f64,
}

const MIN_RESAMPLES: usize = 50;

/// Residual bootstrap: fits once, pools the residuals against the fitted
/// forward model, then refits `resamples` synthetic grids built by adding
/// a residual drawn with replacement to each pixel's prediction.
pub fn bootstrap_statistics(
    measured: &WignerGrid,
    target: &CavityState,
    dim: usize,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapStats> {
    if resamples < MIN_RESAMPLES {
        return Err(Error::TooFewResamples { got: resamples, min: MIN_RESAMPLES });
    }
    let r0 = reduction_factor(measured);
    if r0 <= 0.0 {
        return Err(Error::InvalidR { r: r0 });
    }
    let design = WignerDesign::new(measured.geometry(), dim)?;
    let scaled: Vec<f64> = measured.values().iter().map(|v| v / r0).collect();
    let rho0 = project_to_density(design.solve(&scaled));
    let prediction: Vec<f64> = design.forward(&rho0).iter().map(|w| w * r0).collect();
    let residuals: Vec<f64> = measured
        .values()
        .iter()
        .zip(&prediction)
        .map(|(m, p)| m - p)
        .collect();

    let pixels = measured.values().len();
    let mut rs = Vec::with_capacity(resamples);
    let mut fs = Vec::with_capacity(resamples);
    for k in 0..resamples {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let synth: Vec<f64> = prediction
            .iter()
            .map(|p| p + residuals[rng.gen_range(0..pixels)])
            .collect();
        let grid = WignerGrid::new(*measured.geometry(), synth, GridKind::Measured);
        let rk = reduction_factor(&grid);
        if rk <= 0.0 {
            return Err(Error::InvalidR { r: rk });
        }
        let scaled_k: Vec<f64> = grid.values().iter().map(|v| v / rk).collect();
        let rho_k = DensityMatrix::from_matrix(project_to_density(design.solve(&scaled_k)))?;
        rs.push(rk);
        fs.push(fidelity(&rho_k, target)?);
    }

    let stat = |xs: &[f64]| -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    };
    let (r_mean, r_std) = stat(&rs);
    let (f_mean, f_std) = stat(&fs);
    Ok(BootstrapStats { r_mean, r_std, f_mean, f_std })
}

fn bilinear(grid: &WignerGrid, x: f64, p: f64) -> Option<f64> {
    let g = grid.geometry();
    let side = g.side();
    let fx = (x - g.min()) / g.spacing();
    let fp = (p - g.min()) / g.spacing();
    if fx < 0.0 || fp < 0.0 || fx > (side - 1) as f64 || fp > (side - 1) as f64 {
        return None;
    }
    let i0 = (fx.floor() as usize).min(side - 2);
    let j0 = (fp.floor() as usize).min(side - 2);
    let tx = fx - i0 as f64;
    let tp = fp - j0 as f64;
    let v00 = grid.value(i0, j0);
    let v10 = grid.value(i0 + 1, j0);
    let v01 = grid.value(i0, j0 + 1);
    let v11 = grid.value(i0 + 1, j0 + 1);
    Some(v00 * (1.0 - tx) * (1.0 - tp) + v10 * tx * (1.0 - tp) + v01 * (1.0 - tx) * tp + v11 * tx * tp)
}

/// Variance of the quadrature X(angle) = (a·e^{−i·angle} + a†·e^{i·angle})/2,
/// from a Gaussian fit to the rotated marginal of the Wigner grid.
///
/// The grid is resampled in a frame rotated by −angle (bilinear, zero and a
/// warning outside coverage), integrated over the orthogonal axis, and the
/// marginal fitted with A·exp(−(u−μ)²/(2v)) by Gauss–Newton from moment
/// starting values.
pub fn quadrature_variance(grid: &WignerGrid, angle: f64) -> Result<f64> {
    let g = grid.geometry();
    let side = g.side();
    let axis = g.axis();
    let (s, c) = angle.sin_cos();
    let mut outside = 0usize;
    let mut marginal = vec![0.0f64; side];
    for (i, &u) in axis.iter().enumerate() {
        let mut acc = 0.0;
        for &v in &axis {
            let x = u * c - v * s;
            let p = u * s + v * c;
            match bilinear(grid, x, p) {
                Some(w) => acc += w,
                None => outside += 1,
            }
        }
        marginal[i] = acc * g.spacing();
    }
    if outside > 0 {
        log::warn!(
            "{outside} of {} rotated samples fell outside the grid and were zeroed",
            side * side
        );
    }

    // Moment starting values.
    let mass: f64 = marginal.iter().sum::<f64>() * g.spacing();
    if !(mass > 1e-6) {
        return Err(Error::FitDiverged { detail: format!("flat marginal, mass {mass:.2e}") });
    }
    let mean: f64 =
        axis.iter().zip(&marginal).map(|(u, m)| u * m).sum::<f64>() * g.spacing() / mass;
    let var0: f64 = axis
        .iter()
        .zip(&marginal)
        .map(|(u, m)| (u - mean) * (u - mean) * m)
        .sum::<f64>()
        * g.spacing()
        / mass;
    if !(var0 > 0.0) {
        return Err(Error::FitDiverged { detail: format!("nonpositive moment variance {var0:.2e}") });
    }

    let mut a = mass / (2.0 * std::f64::consts::PI * var0).sqrt();
    let mut mu = mean;
    let mut var = var0;
    for iter in 0..60 {
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for (u, m) in axis.iter().zip(&marginal) {
            let du = u - mu;
            let e = (-du * du / (2.0 * var)).exp();
            let resid = a * e - m;
            let j = nalgebra::Vector3::new(e, a * e * du / var, a * e * du * du / (2.0 * var * var));
            jtj += j * j.transpose();
            jtr += j * resid;
        }
        let step = match jtj.try_inverse() {
            Some(inv) => inv * jtr,
            None => {
                return Err(Error::FitDiverged {
                    detail: format!("singular normal matrix at iteration {iter}"),
                })
            }
        };
        a -= step[0];
        mu -= step[1];
        var -= step[2];
        if !var.is_finite() || var <= 0.0 || !a.is_finite() || !mu.is_finite() {
            return Err(Error::FitDiverged {
                detail: format!("parameters left the valid region at iteration {iter}"),
            });
        }
        let scale = a.abs() + mu.abs() + var.abs() + 1e-30;
        if step.norm() < 1e-12 * scale {
            return Ok(var);
        }
    }
    Err(Error::FitDiverged { detail: "no convergence after 60 iterations".to_string() })
}
