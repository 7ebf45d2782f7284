//! Truncated Fock-space algebra for a single cavity mode, plus the joint
//! qubit ⊗ cavity state the conversion protocol evolves.
//!
//! States live on the first `D` number levels |0⟩..|D−1⟩. Operators that mix
//! levels (displacement) are built on a working space of `D + GUARD_BAND`
//! levels and read back on the logical block, so truncation artifacts stay
//! below the tolerances the rest of the crate relies on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest acceptable weight of a coherent state above the truncation cutoff.
pub const TAIL_TOL: f64 = 1e-10;

/// Extra levels appended to the logical space when exponentiating
/// level-mixing generators.
pub const GUARD_BAND: usize = 16;

/// States are kept unit-norm to this absolute tolerance.
pub const NORM_TOL: f64 = 1e-12;

/// Marked-unitary operators satisfy ‖U†U − I‖_max within this bound.
pub const UNITARITY_TOL: f64 = 1e-10;

/// ln(n!) by direct summation; exact to roundoff for every n used here.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Exact (infinite-dimensional) coherent amplitude ⟨n|α⟩ = e^{−|α|²/2} αⁿ/√n!.
///
/// Magnitudes go through logarithms so large n neither overflows nor loses
/// the exponent; the phase is n·arg α.
pub(crate) fn raw_coherent_amplitude(alpha: C64, n: usize) -> C64 {
    let a2 = alpha.norm_sqr();
    if alpha.norm() == 0.0 {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let ln_mag = -0.5 * a2 + n as f64 * alpha.norm().ln() - 0.5 * ln_factorial(n);
    C64::from_polar(ln_mag.exp(), n as f64 * alpha.arg())
}

/// Pure state of the cavity mode on the truncated space.
#[derive(Debug, Clone)]
pub struct CavityState {
    amps: DVector<C64>,
}

impl CavityState {
    /// Normalizes `amps` and wraps them; the zero vector is rejected.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension { got: 0, min: 1 });
        }
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if norm < 1e-15 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amps: v / C64::new(norm, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &CavityState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Pure-state overlap fidelity |⟨self|other⟩|².
    pub fn overlap_fidelity(&self, other: &CavityState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Truncated coherent state |α⟩ with amplitudes cₙ = e^{−|α|²/2} αⁿ/√n!,
/// renormalized on the kept levels.
///
/// The weight left above the cutoff must stay below [`TAIL_TOL`], otherwise
/// the truncated vector misrepresents the state and a `TruncationError` is
/// raised instead.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Result<CavityState> {
    if dim == 0 {
        return Err(Error::InvalidDimension { got: 0, min: 1 });
    }
    let raw: Vec<C64> = (0..dim).map(|n| raw_coherent_amplitude(alpha, n)).collect();
    let kept: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail >= TAIL_TOL {
        return Err(Error::TruncationError { tail, dim, tol: TAIL_TOL });
    }
    CavityState::from_amplitudes(raw)
}

/// Dense operator on the truncated space.
///
/// `unitary` marks operators whose construction guarantees
/// ‖U†U − I‖_max ≤ [`UNITARITY_TOL`]; truncated blocks of larger unitaries
/// (displacement) are deliberately not marked.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: DMatrix<C64>,
    unitary: bool,
}

impl Operator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Self {
        assert!(matrix.is_square(), "operators are square");
        Self { matrix, unitary: false }
    }

    pub(crate) fn unitary_from_matrix(matrix: DMatrix<C64>) -> Self {
        debug_assert!(max_abs(&(matrix.adjoint() * &matrix - DMatrix::identity(matrix.nrows(), matrix.ncols()))) <= UNITARITY_TOL);
        Self { matrix, unitary: true }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), unitary: true }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn is_marked_unitary(&self) -> bool {
        self.unitary
    }
}

/// Lowering operator a with a|n⟩ = √n |n−1⟩. The top level has no image
/// inside the truncated space; that edge is the usual truncation artifact.
pub fn annihilation_operator(dim: usize) -> Operator {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_matrix(m)
}

/// Number operator a†a = diag(0, 1, …, D−1).
pub fn number_operator(dim: usize) -> Operator {
    Operator::from_matrix(DMatrix::from_fn(dim, dim, |i, j| {
        if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) }
    }))
}

/// Photon-number parity P = diag((−1)ⁿ); exactly unitary and Hermitian.
pub fn parity_operator(dim: usize) -> Operator {
    Operator::unitary_from_matrix(DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Displacement operator D(α) = exp(α a† − α* a) on the logical block.
///
/// The generator is exponentiated on `dim + GUARD_BAND` levels so the block
/// that is read back matches the infinite-dimensional matrix elements far
/// from the edge; the returned block itself is not marked unitary because
/// its last columns lose weight to the discarded levels.
pub fn displacement_operator(alpha: C64, dim: usize) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::InvalidDimension { got: 0, min: 1 });
    }
    if alpha.norm() == 0.0 {
        return Ok(Operator::identity(dim));
    }
    let work = dim + GUARD_BAND;
    let gen = displacement_generator(alpha, work);
    let u = expm_antihermitian(&gen);
    Ok(Operator::from_matrix(u.view((0, 0), (dim, dim)).into_owned()))
}

/// α a† − α* a on `dim` levels.
pub(crate) fn displacement_generator(alpha: C64, dim: usize) -> DMatrix<C64> {
    let mut g = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        g[(n, n - 1)] = alpha * s; // a† entry
        g[(n - 1, n)] = -alpha.conj() * s; // −a entry
    }
    g
}

/// exp(G) for anti-Hermitian G via the Hermitian eigenproblem of iG.
///
/// The recomposition V e^{−iλ} V† is exactly unitary up to roundoff, which
/// is what downstream unitarity checks lean on.
pub(crate) fn expm_antihermitian(g: &DMatrix<C64>) -> DMatrix<C64> {
    let h = g.map(|z| C64::new(0.0, 1.0) * z);
    let se = h.symmetric_eigen();
    let dim = g.nrows();
    let mut scaled = se.eigenvectors.clone();
    for j in 0..dim {
        let phase = C64::from_polar(1.0, -se.eigenvalues[j]);
        for i in 0..dim {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * se.eigenvectors.adjoint()
}

/// Matrix exponential by scaling-and-squaring with a [6/6] Padé kernel.
///
/// Independent of the eigendecomposition route above; the two agree to
/// better than 1e−10 in max norm on every generator this crate builds.
pub fn matrix_exponential(m: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = m.nrows();
    assert!(m.is_square(), "matrix exponential needs a square matrix");
    // Scale until the 1-norm is small enough for the Padé kernel.
    let norm = one_norm(m);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = m.map(|z| z / C64::new((2.0f64).powi(s as i32), 0.0));

    // [6/6] Padé of e^x: N(x)/N(−x) with the classic coefficients.
    const COEFF: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let mut power = DMatrix::<C64>::identity(dim, dim);
    let mut num = DMatrix::<C64>::identity(dim, dim) * C64::new(COEFF[0], 0.0);
    let mut den = num.clone();
    for (k, &c) in COEFF.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * C64::new(c, 0.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den += &power * C64::new(sign * c, 0.0);
    }
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is nonsingular for scaled norms");
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Exact matrix elements ⟨m|D(γ)|n⟩ of the displacement operator.
///
/// These are the infinite-dimensional values (associated-Laguerre closed
/// form), free of truncation error, so contractions against states supported
/// on the block are exact. One diagonal offset k = |m − n| shares a single
/// Laguerre recurrence in n.
pub(crate) fn displacement_elements(gamma: C64, dim: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    if gamma.norm() == 0.0 {
        out.fill_diagonal(C64::new(1.0, 0.0));
        return out;
    }
    let x = gamma.norm_sqr();
    let ln_mag = gamma.norm().ln();
    let phi = gamma.arg();
    let lnf: Vec<f64> = {
        let mut v = vec![0.0; dim];
        for n in 2..dim {
            v[n] = v[n - 1] + (n as f64).ln();
        }
        v
    };
    for k in 0..dim {
        // L_j^{(k)}(x) by the three-term recurrence in j.
        let mut l_prev = 0.0_f64;
        let mut l_curr = 1.0_f64;
        for j in 0..dim - k {
            if j > 0 {
                let jf = j as f64;
                let next = ((2.0 * jf - 1.0 + k as f64 - x) * l_curr
                    - (jf - 1.0 + k as f64) * l_prev)
                    / jf;
                l_prev = l_curr;
                l_curr = next;
            }
            let scale = (0.5 * (lnf[j] - lnf[j + k]) + k as f64 * ln_mag - 0.5 * x).exp();
            let upper = C64::from_polar(scale, k as f64 * phi) * l_curr;
            out[(j + k, j)] = upper;
            if k > 0 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                out[(j, j + k)] = C64::from_polar(sign * scale, -(k as f64) * phi) * l_curr;
            }
        }
    }
    out
}

/// ⟨ψ|O|ψ⟩.
pub fn expectation_value(op: &Operator, state: &CavityState) -> Result<C64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: state.dim() });
    }
    let applied = op.matrix() * state.vector();
    Ok(state.vector().dotc(&applied))
}

/// Joint qubit ⊗ cavity pure state; `g`/`e` hold the cavity amplitudes
/// conditioned on the qubit branch.
#[derive(Debug, Clone)]
pub struct JointState {
    g: DVector<C64>,
    e: DVector<C64>,
}

impl JointState {
    /// Normalizes the pair; branch lengths must agree.
    pub fn from_parts(g: Vec<C64>, e: Vec<C64>) -> Result<Self> {
        if g.len() != e.len() {
            return Err(Error::DimensionMismatch { expected: g.len(), got: e.len() });
        }
        if g.is_empty() {
            return Err(Error::InvalidDimension { got: 0, min: 1 });
        }
        let gv = DVector::from_vec(g);
        let ev = DVector::from_vec(e);
        let norm = (gv.norm_squared() + ev.norm_squared()).sqrt();
        if norm < 1e-15 {
            return Err(Error::ZeroNorm);
        }
        let inv = C64::new(1.0 / norm, 0.0);
        Ok(Self { g: gv * inv, e: ev * inv })
    }

    /// |g⟩ ⊗ |α⟩, the protocol's initial state.
    pub fn ground_coherent(alpha: C64, dim: usize) -> Result<Self> {
        let cavity = coherent_amplitudes(alpha, dim)?;
        Ok(Self {
            g: cavity.vector().clone(),
            e: DVector::zeros(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn ground(&self) -> &[C64] {
        self.g.as_slice()
    }

    pub fn excited(&self) -> &[C64] {
        self.e.as_slice()
    }

    pub fn norm(&self) -> f64 {
        (self.g.norm_squared() + self.e.norm_squared()).sqrt()
    }

    /// Weight in the excited branch.
    pub fn excited_population(&self) -> f64 {
        self.e.norm_squared()
    }
}
