//! Dense state vectors and density matrices for m-qubit systems.
//!
//! Qubit ordering is big-endian and 1-based: qubit 1 is the leftmost tensor
//! factor, so the ket `|q1 q2 ... qm>` sits at index `sum_i q_i 2^(m-i)`.
//!
//! A rank-2 state is stored as an orthonormal pair `{phi0, phi1}` together
//! with a Bloch vector `r` expressed in that basis; its density matrix is
//! `sum_ij B_ij |phi_i><phi_j|` with `B = (1 + r.sigma) / 2`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub const PAULI_X: [[C64; 2]; 2] = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: [[C64; 2]; 2] = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: [[C64; 2]; 2] = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// Converts one of the Pauli constants into a matrix.
pub fn pauli(p: &[[C64; 2]; 2]) -> Matrix2<C64> {
    Matrix2::new(p[0][0], p[0][1], p[1][0], p[1][1])
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Parses a computational-basis label such as `"0110"` into its index.
pub fn basis_index(label: &str) -> Option<usize> {
    if label.is_empty() {
        return None;
    }
    label.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

/// An amplitude vector over `m` qubits with no normalization requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    m: usize,
    amps: DVector<C64>,
}

impl Ket {
    pub fn new(m: usize, amps: DVector<C64>) -> Result<Self> {
        if m == 0 || amps.len() != 1usize << m {
            return Err(Error::BadLength { m, len: amps.len() });
        }
        Ok(Ket { m, amps })
    }

    pub fn from_vec(amps: Vec<C64>) -> Result<Self> {
        let m = qubits_for_dim(amps.len()).ok_or(Error::BadLength {
            m: 0,
            len: amps.len(),
        })?;
        Ket::new(m, DVector::from_vec(amps))
    }

    /// Builds a ket from `(label, amplitude)` pairs, e.g. `("0101", 1.0)`.
    pub fn from_terms(m: usize, terms: &[(&str, C64)]) -> Result<Self> {
        let mut amps = DVector::from_element(1usize << m, ZERO);
        for (label, amp) in terms {
            if label.len() != m {
                return Err(Error::BadLength {
                    m,
                    len: label.len(),
                });
            }
            let idx = basis_index(label).ok_or(Error::BadLength {
                m,
                len: label.len(),
            })?;
            amps[idx] += *amp;
        }
        Ket::new(m, amps)
    }

    pub fn zeros(m: usize) -> Self {
        Ket {
            m,
            amps: DVector::from_element(1usize << m, ZERO),
        }
    }

    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn scaled(&self, s: C64) -> Ket {
        Ket {
            m: self.m,
            amps: &self.amps * s,
        }
    }

    /// `a |self> + b |other>`
    pub fn combine(&self, a: C64, other: &Ket, b: C64) -> Ket {
        Ket {
            m: self.m,
            amps: &self.amps * a + &other.amps * b,
        }
    }

    pub fn normalize(&self) -> Result<PureState> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(PureState(self.scaled(C64::from(1.0 / n2.sqrt()))))
    }
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(Ket);

impl PureState {
    /// Wraps an already-normalized ket; fails if the norm is off by more than
    /// the default tolerance.
    pub fn new(ket: Ket) -> Result<Self> {
        let n2 = ket.norm_sqr();
        if (n2 - 1.0).abs() > Tolerances::DEFAULT.norm {
            return Err(Error::NotNormalized(n2));
        }
        Ok(PureState(ket))
    }

    pub fn from_vec(amps: Vec<C64>) -> Result<Self> {
        PureState::new(Ket::from_vec(amps)?)
    }

    /// Computational basis state `|label>`.
    pub fn basis(label: &str) -> Result<Self> {
        let m = label.len();
        Ket::from_terms(m, &[(label, ONE)])?.normalize()
    }

    pub fn qubits(&self) -> usize {
        self.0.m
    }

    pub fn ket(&self) -> &Ket {
        &self.0
    }

    pub fn into_ket(self) -> Ket {
        self.0
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.0.amps
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.inner(&other.0)
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> DensityMatrix {
        let v = &self.0.amps;
        DensityMatrix {
            m: self.0.m,
            matrix: v * v.adjoint(),
        }
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix over `m` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::InvalidDensityMatrix(format!(
                "not square: {rows}x{cols}"
            )));
        }
        let m = qubits_for_dim(rows).ok_or_else(|| {
            Error::InvalidDensityMatrix(format!("dimension {rows} is not a power of two"))
        })?;
        for i in 0..rows {
            for j in i..rows {
                let d = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if d > tol.hermitian {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i},{j}): {d:e}"
                    )));
                }
            }
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.hermitian || tr.im.abs() > tol.hermitian {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let rho = DensityMatrix { m, matrix };
        let min_eig = rho
            .eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol.psd {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    /// Symmetrizes and rescales a matrix that is a density matrix up to
    /// accumulated roundoff, then validates it.
    pub fn from_unnormalized(matrix: DMatrix<C64>) -> Result<Self> {
        let herm = (&matrix + matrix.adjoint()) * C64::from(0.5);
        let tr = herm.trace().re;
        if !(tr > 0.0) {
            return Err(Error::ZeroVector);
        }
        DensityMatrix::new(herm / C64::from(tr))
    }

    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `<psi| rho |psi>`
    pub fn expectation(&self, psi: &Ket) -> f64 {
        psi.amps().dotc(&(&self.matrix * psi.amps())).re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Bloch vector of a rank-2 state in its basis `{phi0, phi1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBloch")]
pub struct BlochVector {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Deserialize)]
struct RawBloch {
    r: f64,
    theta: f64,
    phi: f64,
}

impl TryFrom<RawBloch> for BlochVector {
    type Error = Error;

    fn try_from(b: RawBloch) -> Result<Self> {
        BlochVector::new(b.r, b.theta, b.phi)
    }
}

impl BlochVector {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        if !r.is_finite() || r < 0.0 || r > 1.0 + tol.bloch_radius {
            return Err(Error::InvalidBloch(format!("radius {r} outside [0, 1]")));
        }
        if !theta.is_finite() || !(-1e-12..=std::f64::consts::PI + 1e-12).contains(&theta) {
            return Err(Error::InvalidBloch(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidBloch(format!("azimuth {phi} not finite")));
        }
        Ok(BlochVector {
            r: r.min(1.0),
            theta: theta.clamp(0.0, std::f64::consts::PI),
            phi: phi.rem_euclid(std::f64::consts::TAU),
        })
    }

    pub fn from_cartesian(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r == 0.0 {
            return BlochVector::new(0.0, 0.0, 0.0);
        }
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        BlochVector::new(r, theta, phi)
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }

    /// `B = (1 + r.sigma) / 2`
    pub fn bloch_matrix(&self) -> Matrix2<C64> {
        let [x, y, z] = self.cartesian();
        let id = Matrix2::identity();
        (id + pauli(&PAULI_X) * C64::from(x)
            + pauli(&PAULI_Y) * C64::from(y)
            + pauli(&PAULI_Z) * C64::from(z))
            * C64::from(0.5)
    }

    /// Reads the Bloch vector off a Hermitian unit-trace 2x2 matrix.
    pub fn from_bloch_matrix(b: &Matrix2<C64>) -> Result<Self> {
        let x = 2.0 * b[(0, 1)].re;
        let y = -2.0 * b[(0, 1)].im;
        let z = (b[(0, 0)] - b[(1, 1)]).re;
        BlochVector::from_cartesian([x, y, z])
    }
}

/// Point on the Bloch sphere (unit vector) of `cos(t/2)|0> + sin(t/2) e^{ip}|1>`
/// given its coordinates `(alpha, beta)` in the two-dimensional basis.
pub fn bloch_direction(alpha: C64, beta: C64) -> [f64; 3] {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    let ab = alpha * beta.conj() / n;
    [
        2.0 * ab.re,
        -2.0 * ab.im,
        (alpha.norm_sqr() - beta.norm_sqr()) / n,
    ]
}

/// A rank-2 (or pure, when `r = 1`) state on the span of an orthonormal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTwoState {
    phi0: PureState,
    phi1: PureState,
    bloch: BlochVector,
    degenerate: bool,
}

/// Builds the state `sum_ij B_ij |phi_i><phi_j|`.
pub fn make_rank_two(phi0: PureState, phi1: PureState, bloch: BlochVector) -> Result<RankTwoState> {
    if phi0.qubits() != phi1.qubits() {
        return Err(Error::DimensionMismatch(format!(
            "basis vectors over {} and {} qubits",
            phi0.qubits(),
            phi1.qubits()
        )));
    }
    let overlap = phi0.inner(&phi1).norm();
    if overlap >= Tolerances::DEFAULT.orthogonality {
        return Err(Error::NonOrthogonalBasis(overlap));
    }
    Ok(RankTwoState {
        phi0,
        phi1,
        bloch,
        degenerate: false,
    })
}

impl RankTwoState {
    pub fn phi0(&self) -> &PureState {
        &self.phi0
    }

    pub fn phi1(&self) -> &PureState {
        &self.phi1
    }

    pub fn bloch(&self) -> BlochVector {
        self.bloch
    }

    pub fn qubits(&self) -> usize {
        self.phi0.qubits()
    }

    /// True when produced from a spectrum with (numerically) equal eigenvalues,
    /// in which case the basis was fixed by the lexicographic tie-break.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let b = self.bloch.bloch_matrix();
        let v = [self.phi0.amps(), self.phi1.amps()];
        let dim = v[0].len();
        let mut rho = DMatrix::from_element(dim, dim, ZERO);
        for i in 0..2 {
            for j in 0..2 {
                rho += (v[i] * v[j].adjoint()) * b[(i, j)];
            }
        }
        DensityMatrix {
            m: self.qubits(),
            matrix: rho,
        }
    }

    /// `cos(t/2)|phi0> + sin(t/2) e^{ip}|phi1>`, the pure state at polar
    /// angle `t` and azimuth `p` on this state's Bloch sphere.
    pub fn surface_state(&self, t: f64, p: f64) -> PureState {
        let (s, c) = (t / 2.0).sin_cos();
        let ket = self
            .phi0
            .ket()
            .combine(C64::from(c), self.phi1.ket(), C64::from_polar(s, p));
        PureState(ket)
    }

    /// Unnormalized `|phi0> + w |phi1>`.
    pub fn chart_ket(&self, w: C64) -> Ket {
        self.phi0.ket().combine(ONE, self.phi1.ket(), w)
    }

    /// Coordinates `(<phi0|psi>, <phi1|psi>)` of a ket in this basis.
    pub fn coordinates(&self, psi: &Ket) -> (C64, C64) {
        (self.phi0.ket().inner(psi), self.phi1.ket().inner(psi))
    }

    /// Unit Bloch direction of a pure state lying in this state's range.
    pub fn direction_of(&self, psi: &PureState) -> Result<[f64; 3]> {
        let (a, b) = self.coordinates(psi.ket());
        let weight = a.norm_sqr() + b.norm_sqr();
        if (weight - 1.0).abs() > 1e-8 {
            return Err(Error::CertificateMismatch(weight));
        }
        Ok(bloch_direction(a, b))
    }

    /// Spectral data `(lambda0, lambda1, e0, e1)` with `lambda0 >= lambda1`,
    /// from the closed-form eigendecomposition of the 2x2 Bloch matrix.
    pub fn spectral(&self) -> (f64, f64, PureState, PureState) {
        let BlochVector { r, theta, phi } = self.bloch;
        let e0 = self.surface_state(theta, phi);
        let e1 = self.surface_state(std::f64::consts::PI - theta, phi + std::f64::consts::PI);
        ((1.0 + r) / 2.0, (1.0 - r) / 2.0, e0, e1)
    }

    /// Re-expresses the same density matrix in the basis
    /// `phi'_i = sum_j W_ji phi_j` for a 2x2 unitary `W`.
    pub fn rebased(&self, w: &Matrix2<C64>) -> Result<RankTwoState> {
        let cols = [w.column(0), w.column(1)];
        let new: Vec<PureState> = cols
            .iter()
            .map(|c| {
                self.phi0
                    .ket()
                    .combine(c[0], self.phi1.ket(), c[1])
                    .normalize()
            })
            .collect::<Result<_>>()?;
        let b = w.adjoint() * self.bloch.bloch_matrix() * w;
        let bloch = BlochVector::from_bloch_matrix(&b)?;
        let mut it = new.into_iter();
        let (p0, p1) = (it.next().unwrap(), it.next().unwrap());
        make_rank_two(p0, p1, bloch)
    }
}

/// Traces out qubit `k` (1-based, big-endian) of an m-qubit density matrix.
pub fn partial_trace(rho: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let m = rho.qubits();
    if k == 0 || k > m || m < 2 {
        return Err(Error::IndexOutOfRange { k, m });
    }
    let shift = m - k;
    let low_mask = (1usize << shift) - 1;
    let insert =
        |i: usize, bit: usize| ((i >> shift) << (shift + 1)) | (bit << shift) | (i & low_mask);
    let dim = 1usize << (m - 1);
    let src = rho.matrix();
    let out = DMatrix::from_fn(dim, dim, |i, j| {
        src[(insert(i, 0), insert(j, 0))] + src[(insert(i, 1), insert(j, 1))]
    });
    Ok(DensityMatrix {
        m: m - 1,
        matrix: out,
    })
}

fn fix_phase(v: &mut DVector<C64>) {
    let scale = v.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if let Some(a) = v
        .iter()
        .find(|a| a.norm() > 1e-8 * scale.max(1e-300))
        .copied()
    {
        let phase = a.conj() / a.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Orthonormal basis of the range of `projector` built from its columns in
/// index order: the first basis vector is the projection of the lowest
/// computational basis state with weight in the range.
fn canonical_span_basis(projector: &DMatrix<C64>) -> Result<(DVector<C64>, DVector<C64>)> {
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(2);
    for j in 0..projector.ncols() {
        let mut col: DVector<C64> = projector.column(j).into_owned();
        for b in &basis {
            let c = b.dotc(&col);
            col -= b * c;
        }
        let n2 = col.norm_squared();
        if n2 > 1e-8 {
            basis.push(col / C64::from(n2.sqrt()));
            if basis.len() == 2 {
                let v1 = basis.pop().unwrap();
                let v0 = basis.pop().unwrap();
                return Ok((v0, v1));
            }
        }
    }
    Err(Error::Numerical(
        "could not build a basis of the degenerate eigenspace".into(),
    ))
}

/// Diagonalizes a density matrix of rank at most 2 into a [`RankTwoState`]
/// whose basis is the eigenbasis (so the Bloch vector is `(r, 0, 0)` with
/// `r = lambda0 - lambda1`).
pub fn eigen_decompose_rank2(rho: &DensityMatrix) -> Result<RankTwoState> {
    let tol = Tolerances::DEFAULT;
    let eig = rho.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if order.len() > 2 {
        let third = eig.eigenvalues[order[2]];
        if third >= tol.rank {
            return Err(Error::RankTooHigh(third));
        }
    }
    let l0 = eig.eigenvalues[order[0]].max(0.0);
    let l1 = eig.eigenvalues[order[1]].max(0.0);
    let total = l0 + l1;
    let degenerate = l0 - l1 < tol.degenerate_gap;
    let (mut v0, mut v1) = if degenerate {
        let u0 = eig.eigenvectors.column(order[0]);
        let u1 = eig.eigenvectors.column(order[1]);
        let proj = u0 * u0.adjoint() + u1 * u1.adjoint();
        canonical_span_basis(&proj)?
    } else {
        (
            eig.eigenvectors.column(order[0]).into_owned(),
            eig.eigenvectors.column(order[1]).into_owned(),
        )
    };
    fix_phase(&mut v0);
    fix_phase(&mut v1);
    let m = rho.qubits();
    let phi0 = Ket::new(m, v0)?.normalize()?;
    let phi1 = Ket::new(m, v1)?.normalize()?;
    let r = if degenerate {
        0.0
    } else {
        ((l0 - l1) / total).min(1.0)
    };
    let mut state = make_rank_two(phi0, phi1, BlochVector::new(r, 0.0, 0.0)?)?;
    state.degenerate = degenerate;
    Ok(state)
}

/// The marginal `Tr_k |psi><psi|` as a [`RankTwoState`] in its eigenbasis.
///
/// Same result as [`partial_trace`] followed by [`eigen_decompose_rank2`],
/// but the range comes from the SVD of the `2^(m-1) x 2` reshaped amplitudes,
/// which keeps full relative accuracy in the smaller eigenvector.
pub fn reduced_rank_two(psi: &PureState, k: usize) -> Result<RankTwoState> {
    let m = psi.qubits();
    if k == 0 || k > m || m < 2 {
        return Err(Error::IndexOutOfRange { k, m });
    }
    let shift = m - k;
    let low_mask = (1usize << shift) - 1;
    let insert =
        |i: usize, bit: usize| ((i >> shift) << (shift + 1)) | (bit << shift) | (i & low_mask);
    let amps = psi.amps();
    let reshaped = DMatrix::from_fn(1 << (m - 1), 2, |i, b| amps[insert(i, b)]);
    let svd = reshaped.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::Numerical("SVD did not return vectors".into()))?;
    let (l0, l1) = (
        svd.singular_values[0].powi(2),
        svd.singular_values[1].powi(2),
    );
    let (l0, l1, c0, c1) = if l0 >= l1 {
        (l0, l1, 0, 1)
    } else {
        (l1, l0, 1, 0)
    };
    if l0 - l1 < Tolerances::DEFAULT.degenerate_gap {
        return eigen_decompose_rank2(&partial_trace(&psi.projector(), k)?);
    }
    let mut v0 = u.column(c0).into_owned();
    let mut v1 = u.column(c1).into_owned();
    fix_phase(&mut v0);
    fix_phase(&mut v1);
    let phi0 = Ket::new(m - 1, v0)?.normalize()?;
    let phi1 = Ket::new(m - 1, v1)?.normalize()?;
    let r = ((l0 - l1) / (l0 + l1)).min(1.0);
    make_rank_two(phi0, phi1, BlochVector::new(r, 0.0, 0.0)?)
}

/// `D(rho, tau) = Tr|rho - tau| / 2`.
pub fn trace_distance(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if rho.dim() != tau.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            rho.dim(),
            rho.dim(),
            tau.dim(),
            tau.dim()
        )));
    }
    let diff = rho.matrix() - tau.matrix();
    let herm = (&diff + diff.adjoint()) * C64::from(0.5);
    Ok(0.5
        * herm
            .symmetric_eigenvalues()
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}
