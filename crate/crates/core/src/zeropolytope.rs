//! Zero-polytope analysis of a rank-2 state.
//!
//! For a basis `{phi0, phi1}` of the range and a measure `E = f(|P|)`, the
//! vanishing states are the roots of the univariate polynomial
//! `p(w) = P(|phi0> + w |phi1>) = sum_j c_j w^j`. A state is *one-root* when
//! `p` has a single distinct root `z`; the measure is then a squared distance
//! on the Bloch sphere, `E(|w>) = N |w_bloch - z_bloch|^2` with `N = E(|z'>)/4`,
//! where `|z'>` is the state antipodal to the root.

use nalgebra::{DMatrix, DVector, Matrix2, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::qstate::{bloch_direction, PureState, RankTwoState, C64};
use crate::tolerance::Tolerances;

const INTERPOLATION_NODES: [C64; 5] = [
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(0.0, -1.0),
];

const CHECK_NODES: [C64; 3] = [C64::new(0.5, 0.5), C64::new(-0.7, 0.2), C64::new(0.3, -0.9)];

/// Seed of the fixed probe set used by [`certify`] for the distance-law check.
const LAW_PROBE_SEED: u64 = 0x5eed_0f1a;
const LAW_PROBES: usize = 32;

/// `p(w) = sum_j c_j w^j`, the invariant polynomial on the chart
/// `|phi0> + w |phi1>` of a rank-2 state's range.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPolynomial {
    measure: Measure,
    coefficients: Vec<C64>,
}

impl ZeroPolynomial {
    pub fn from_coefficients(measure: Measure, coefficients: Vec<C64>) -> Self {
        ZeroPolynomial {
            measure,
            coefficients,
        }
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// Declared degree (the measure's polynomial degree).
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn scale(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, w: C64) -> C64 {
        horner(&self.coefficients, w)
    }

    /// Index of the last coefficient above `tol.coefficient * scale`.
    pub fn significant_degree(&self, tol: &Tolerances) -> usize {
        let cut = tol.coefficient * self.scale();
        self.coefficients
            .iter()
            .rposition(|c| c.norm() > cut)
            .unwrap_or(0)
    }
}

fn horner(c: &[C64], w: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &cj| acc * w + cj)
}

/// Taylor coefficients `b_k` of `p` around `w`, together with the magnitude
/// `sum_j |c_j| binom(j,k) |w|^(j-k)` of the terms that produced each one.
fn taylor_at(c: &[C64], w: C64) -> Vec<(C64, f64)> {
    let d = c.len() - 1;
    let mut out = Vec::with_capacity(d + 1);
    let aw = w.norm();
    for k in 0..=d {
        let mut b = C64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (j, cj) in c.iter().enumerate().skip(k) {
            let binom = binomial(j, k);
            b += cj * w.powu((j - k) as u32) * binom;
            mag += cj.norm() * binom * aw.powi((j - k) as i32);
        }
        out.push((b, mag));
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Recovers the coefficients of `P(|phi0> + w |phi1>)` by interpolation on
/// the nodes `0, 1, -1, i, -i` and validates them on three extra nodes.
pub fn build_polynomial(state: &RankTwoState, measure: Measure) -> Result<ZeroPolynomial> {
    build_polynomial_with(state, measure, &Tolerances::DEFAULT)
}

pub fn build_polynomial_with(
    state: &RankTwoState,
    measure: Measure,
    tol: &Tolerances,
) -> Result<ZeroPolynomial> {
    if state.qubits() != measure.qubits() {
        return Err(Error::WrongQubitCount {
            measure: measure.name(),
            expected: measure.qubits(),
            got: state.qubits(),
        });
    }
    let d = measure.poly_degree();
    let p = |w: C64| measure.polynomial(state.chart_ket(w).as_slice());
    let nodes = &INTERPOLATION_NODES[..=d];
    let vander = DMatrix::from_fn(d + 1, d + 1, |i, j| nodes[i].powu(j as u32));
    let rhs = DVector::from_iterator(d + 1, nodes.iter().map(|&w| p(w)));
    let coeffs = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular interpolation system".into()))?;
    let poly = ZeroPolynomial::from_coefficients(measure, coeffs.iter().copied().collect());
    let scale = poly.scale();
    // Below the zero-polynomial floor the coefficients are pure roundoff and
    // the relative check is meaningless; find_roots reports that case.
    if scale >= tol.zero_polynomial {
        let residual = CHECK_NODES
            .iter()
            .map(|&w| (poly.eval(w) - p(w)).norm())
            .fold(0.0, f64::max)
            / scale;
        if residual >= tol.interpolation {
            return Err(Error::InterpolationResidual(residual));
        }
    }
    Ok(poly)
}

/// A distinct root and the number of companion-matrix eigenvalues merged into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

/// All finite roots of the polynomial truncated to its significant degree.
pub fn find_roots(poly: &ZeroPolynomial) -> Result<Vec<Root>> {
    find_roots_with(poly, &Tolerances::DEFAULT)
}

pub fn find_roots_with(poly: &ZeroPolynomial, tol: &Tolerances) -> Result<Vec<Root>> {
    if poly.scale() < tol.zero_polynomial {
        return Err(Error::ZeroPolynomialIdentically);
    }
    let deg = poly.significant_degree(tol);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let c = &poly.coefficients()[..=deg];
    // A single root of full multiplicity is decided algebraically at the
    // mean of the roots; its eigenvalue scatter grows like eps^(1/deg).
    if deg > 1 {
        let mean = -c[deg - 1] / (c[deg] * deg as f64);
        if is_multiple_root(c, mean, deg, tol) {
            return Ok(vec![Root {
                value: mean,
                multiplicity: deg,
            }]);
        }
    }
    let raw = companion_roots(c)?;
    let polished: Vec<C64> = raw.iter().map(|&r| polish_simple_root(c, r)).collect();
    let max_abs = raw.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let base = tol.cluster * (1.0 + max_abs);
    let start = tol.cluster_radius(deg) * (1.0 + max_abs);
    let idx: Vec<usize> = (0..raw.len()).collect();
    let mut roots = Vec::new();
    cluster_into(c, &raw, &polished, &idx, start, base, tol, &mut roots);
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(roots)
}

/// Eigenvalues of the companion matrix of `c_0 + ... + c_d w^d` (`c_d != 0`).
fn companion_roots(c: &[C64]) -> Result<Vec<C64>> {
    let d = c.len() - 1;
    let lead = c[d];
    if d == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    let mut comp = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for i in 1..d {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lead;
    }
    if let Some(ev) = bounded_eigenvalues(comp.clone()) {
        return Ok(ev);
    }
    // The complex Schur iteration can stall on nearly nilpotent companion
    // matrices; a fixed unitary similarity breaks the structure.
    let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let q = g.qr().q();
    bounded_eigenvalues(q.adjoint() * comp * q)
        .ok_or_else(|| Error::Numerical("companion eigenvalue iteration did not converge".into()))
}

fn bounded_eigenvalues(m: DMatrix<C64>) -> Option<Vec<C64>> {
    let d = m.nrows();
    Schur::try_new(m, f64::EPSILON, 200 * d).map(|s| {
        s.eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .copied()
            .collect()
    })
}

/// A few Newton steps; only kept if they reduce `|p|`.
fn polish_simple_root(c: &[C64], r: C64) -> C64 {
    let deriv: Vec<C64> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &cj)| cj * j as f64)
        .collect();
    let mut x = r;
    let mut fx = horner(c, x).norm();
    for _ in 0..3 {
        let dp = horner(&deriv, x);
        if dp.norm() == 0.0 {
            break;
        }
        let next = x - horner(c, x) / dp;
        let fn_ = horner(c, next).norm();
        if !(fn_ < fx) {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

#[allow(clippy::too_many_arguments)]
fn cluster_into(
    c: &[C64],
    raw: &[C64],
    polished: &[C64],
    members: &[usize],
    radius: f64,
    base: f64,
    tol: &Tolerances,
    out: &mut Vec<Root>,
) {
    for group in single_linkage(raw, members, radius) {
        if group.len() == 1 {
            out.push(Root {
                value: polished[group[0]],
                multiplicity: 1,
            });
            continue;
        }
        let centroid = group.iter().map(|&i| raw[i]).sum::<C64>() / group.len() as f64;
        if radius <= base || is_multiple_root(c, centroid, group.len(), tol) {
            out.push(Root {
                value: centroid,
                multiplicity: group.len(),
            });
        } else {
            cluster_into(
                c,
                raw,
                polished,
                &group,
                (radius * 0.1).max(base),
                base,
                tol,
                out,
            );
        }
    }
}

fn single_linkage(points: &[C64], members: &[usize], radius: f64) -> Vec<Vec<usize>> {
    let n = members.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if (points[members[a]] - points[members[b]]).norm() < radius {
                let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                if ra != rb {
                    label[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (i, &member) in members.iter().enumerate().take(n) {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(member),
            None => {
                roots.push(r);
                groups.push(vec![member]);
            }
        }
    }
    groups
}

/// A root of multiplicity `mult` at `w` annihilates the first `mult` Taylor
/// coefficients of `p` around `w`.
///
/// Each coefficient is compared with the magnitude of the terms that form
/// it, plus an absolute floor at the coefficient noise level so that a root
/// at `w = 0` is not judged against roundoff alone.
fn is_multiple_root(c: &[C64], w: C64, mult: usize, tol: &Tolerances) -> bool {
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let floor = tol.coefficient * scale;
    taylor_at(c, w)
        .iter()
        .take(mult)
        .all(|(b, mag)| b.norm() <= tol.multiplicity * mag + floor)
}

/// Result of the zero-polytope analysis of one rank-2 state.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCertificate {
    pub measure: Measure,
    /// Distinct finite roots with multiplicities.
    pub roots: Vec<Root>,
    /// Degree lost because the leading coefficient vanished (`|phi1>` is a root).
    pub roots_at_infinity: usize,
    pub one_root: bool,
    /// The unique root `z` on the chart `|phi0> + z |phi1>` (one-root only).
    pub z: Option<C64>,
    /// `|z> = (|phi0> + z|phi1>) / sqrt(1 + |z|^2)`.
    pub root_state: Option<PureState>,
    /// `|z'>`, proportional to `conj(z)|phi0> - |phi1>`.
    pub antipode_state: Option<PureState>,
    /// `E(|z'>)`, the maximum of the measure on the sphere.
    pub e_antipode: Option<f64>,
    /// `N = E(|z'>) / 4`, coefficient of the squared Bloch distance.
    pub n: Option<f64>,
    /// Largest relative deviation from the distance law over the probe set.
    pub law_residual: Option<f64>,
}

impl RootCertificate {
    /// Number of distinct roots on the projective line (the point at
    /// infinity counts once).
    pub fn cluster_count(&self) -> usize {
        self.roots.len() + usize::from(self.roots_at_infinity > 0)
    }

    /// Unit Bloch vector of the root state in the basis of `state`.
    pub fn root_direction(&self, state: &RankTwoState) -> Result<[f64; 3]> {
        let root = self.root_state.as_ref().ok_or(Error::NotOneRoot)?;
        state.direction_of(root)
    }
}

/// Decides whether `state` is one-root under `measure`.
///
/// The basis pole `|phi1>` must not itself be a root; run [`pole_safe_basis`]
/// first when it may be.
pub fn certify(state: &RankTwoState, measure: Measure) -> Result<RootCertificate> {
    certify_with(state, measure, &Tolerances::DEFAULT)
}

pub fn certify_with(
    state: &RankTwoState,
    measure: Measure,
    tol: &Tolerances,
) -> Result<RootCertificate> {
    let poly = build_polynomial_with(state, measure, tol)?;
    let roots = find_roots_with(&poly, tol)?;
    let d = poly.degree();
    let sig = poly.significant_degree(tol);
    let mut cert = RootCertificate {
        measure,
        roots,
        roots_at_infinity: d - sig,
        one_root: false,
        z: None,
        root_state: None,
        antipode_state: None,
        e_antipode: None,
        n: None,
        law_residual: None,
    };
    if cert.roots_at_infinity > 0 || cert.roots.len() != 1 {
        return Ok(cert);
    }
    // The mean of all roots is exact from the two leading coefficients.
    let c = poly.coefficients();
    let z = -c[d - 1] / (c[d] * d as f64);
    let root_state = state.chart_ket(z).normalize()?;
    let antipode = state
        .phi0()
        .ket()
        .combine(z.conj(), state.phi1().ket(), C64::new(-1.0, 0.0))
        .normalize()?;
    let e_anti = measure.evaluate(&antipode)?;
    cert.z = Some(z);
    cert.root_state = Some(root_state);
    cert.antipode_state = Some(antipode);
    cert.e_antipode = Some(e_anti);
    cert.n = Some(e_anti / 4.0);
    let probes = law_probe_directions(LAW_PROBE_SEED, LAW_PROBES);
    let residual = distance_law_residual(state, &cert, &probes)?;
    cert.law_residual = Some(residual);
    cert.one_root = residual < tol.distance_law;
    Ok(cert)
}

/// Uniform random unit vectors, deterministic in `seed`.
pub fn law_probe_directions(seed: u64, count: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let p: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).max(0.0).sqrt();
            [s * p.cos(), s * p.sin(), z]
        })
        .collect()
}

fn direction_angles(u: &[f64; 3]) -> (f64, f64) {
    (u[2].clamp(-1.0, 1.0).acos(), u[1].atan2(u[0]))
}

/// Largest relative deviation of `E(|u>)` from `N |u - z_bloch|^2` over the
/// given unit probe directions `u` (Bloch coordinates in `state`'s basis).
///
/// Deviations are measured relative to the law value, floored at
/// `1e-2 E(|z'>)`: next to a root of multiplicity `D` the measure is
/// `O(d^2)` while roundoff in the state is not, so unfloored ratios there
/// measure conditioning rather than the law.
pub fn distance_law_residual(
    state: &RankTwoState,
    cert: &RootCertificate,
    probes: &[[f64; 3]],
) -> Result<f64> {
    let n = cert.n.ok_or(Error::NotOneRoot)?;
    let zdir = cert.root_direction(state)?;
    let floor = (4.0 * n * 1e-2).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for u in probes {
        let (t, p) = direction_angles(u);
        let e = cert.measure.evaluate(&state.surface_state(t, p))?;
        let d2: f64 = (0..3).map(|i| (u[i] - zdir[i]).powi(2)).sum();
        let law = n * d2;
        worst = worst.max((e - law).abs() / law.max(floor));
    }
    Ok(worst)
}

/// Same law on the unnormalized chart: `E(|phi0> + w|phi1>) = K |w - z|^2`
/// with `K = E(|z'>) / (1 + |z|^2) = 4N / (1 + |z|^2)`.
pub fn chart_law_residual(
    state: &RankTwoState,
    cert: &RootCertificate,
    probes: &[C64],
) -> Result<f64> {
    let (z, e_anti) = match (cert.z, cert.e_antipode) {
        (Some(z), Some(e)) => (z, e),
        _ => return Err(Error::NotOneRoot),
    };
    let k = e_anti / (1.0 + z.norm_sqr());
    let mut worst = 0.0f64;
    for &w in probes {
        let e = cert.measure.evaluate_unnormalized(&state.chart_ket(w))?;
        let law = k * (w - z).norm_sqr();
        let floor = 1e-3 * k * (1.0 + w.norm_sqr());
        worst = worst.max((e - law).abs() / law.max(floor).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Rotates the basis within the range so that `|phi1>` is not a zero of
/// the measure. The density matrix is unchanged.
///
/// Tries, in order: the current basis, the swapped poles, then seven
/// equator points `(|phi0> + e^{ip}|phi1>)/sqrt 2` with `p = 2 pi j / 7`.
pub fn pole_safe_basis(state: &RankTwoState, measure: Measure) -> Result<RankTwoState> {
    pole_safe_basis_with(state, measure, &Tolerances::DEFAULT)
}

pub fn pole_safe_basis_with(
    state: &RankTwoState,
    measure: Measure,
    tol: &Tolerances,
) -> Result<RankTwoState> {
    if measure.evaluate(state.phi1())? >= tol.pole {
        return Ok(state.clone());
    }
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut attempts = vec![Matrix2::new(zero, one, one, zero)];
    for j in 0..7 {
        let e = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 7.0);
        // columns: new phi0 (antipode of the candidate), new phi1 (candidate)
        attempts.push(Matrix2::new(C64::from(h), C64::from(h), -e * h, e * h));
    }
    for w in attempts {
        let rebased = state.rebased(&w)?;
        if measure.evaluate(rebased.phi1())? >= tol.pole {
            return Ok(rebased);
        }
    }
    Err(Error::EntireRangeVanishes)
}

/// `pole_safe_basis` followed by `certify`: the certification path used by
/// the command line and the class scans.
///
/// When the roots sit outside the unit disk the chart coefficients grow like
/// `|z|^D` and the root loses accuracy, so the analysis is repeated with the
/// poles swapped, which maps the roots inside.
pub fn certify_state(
    state: &RankTwoState,
    measure: Measure,
) -> Result<(RankTwoState, RootCertificate)> {
    let safe = pole_safe_basis(state, measure)?;
    let cert = certify(&safe, measure)?;
    let degree: usize = cert.roots.iter().map(|r| r.multiplicity).sum();
    if cert.roots_at_infinity == 0 && degree > 0 {
        let mean = cert
            .roots
            .iter()
            .map(|r| r.value * r.multiplicity as f64)
            .sum::<C64>()
            / degree as f64;
        if mean.norm() > 1.0 {
            let zero = C64::new(0.0, 0.0);
            let one = C64::new(1.0, 0.0);
            let swapped = safe.rebased(&Matrix2::new(zero, one, one, zero))?;
            if measure.evaluate(swapped.phi1())? >= Tolerances::DEFAULT.pole {
                let cert = certify(&swapped, measure)?;
                return Ok((swapped, cert));
            }
        }
    }
    Ok((safe, cert))
}

/// Bloch direction of `cos(t/2)|phi0> + sin(t/2)e^{ip}|phi1>` with `tan(t/2) = |z|`, `p = arg z`.
pub fn chart_direction(z: C64) -> [f64; 3] {
    bloch_direction(C64::new(1.0, 0.0), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{make_rank_two, BlochVector, Ket};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn rank2(p0: PureState, p1: PureState, r: f64, t: f64, p: f64) -> RankTwoState {
        make_rank_two(p0, p1, BlochVector::new(r, t, p).unwrap()).unwrap()
    }

    fn poly(coeffs: &[C64]) -> ZeroPolynomial {
        ZeroPolynomial::from_coefficients(Measure::SqrtThreeTangle, coeffs.to_vec())
    }

    #[test]
    fn polynomial_of_bell_plane() {
        // psi00 psi11 - psi01 psi10 on |00> + w|11> is exactly w.
        let s = rank2(
            PureState::basis("00").unwrap(),
            PureState::basis("11").unwrap(),
            0.3,
            0.2,
            0.1,
        );
        let p = build_polynomial(&s, Measure::Concurrence).unwrap();
        let cs = p.coefficients();
        assert!(cs[0].norm() < 1e-15);
        assert!((cs[1] - c(1.0)).norm() < 1e-15);
        assert!(cs[2].norm() < 1e-15);
        let roots = find_roots(&p).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].value.norm() < 1e-15);
        assert_eq!(roots[0].multiplicity, 1);
    }

    #[test]
    fn polynomial_of_w_plane_has_double_root() {
        // |00> + w(|01>+|10>)/sqrt2: the polynomial is -w^2/2.
        let p1 = Ket::from_terms(2, &[("01", c(FRAC_1_SQRT_2)), ("10", c(FRAC_1_SQRT_2))])
            .unwrap()
            .normalize()
            .unwrap();
        let s = rank2(PureState::basis("00").unwrap(), p1, 0.5, 1.0, 0.0);
        let p = build_polynomial(&s, Measure::Concurrence).unwrap();
        let cs = p.coefficients();
        assert!(cs[0].norm() < 1e-15 && cs[1].norm() < 1e-15);
        assert!((cs[2] - c(-0.5)).norm() < 1e-15);
        let roots = find_roots(&p).unwrap();
        assert_eq!(
            roots,
            vec![Root {
                value: c(0.0),
                multiplicity: 2
            }]
        );
        let cert = certify(&s, Measure::Concurrence).unwrap();
        assert!(cert.one_root);
        assert_eq!(cert.cluster_count(), 1);
    }

    #[test]
    fn roots_of_constructed_polynomials() {
        let r = find_roots(&poly(&[c(0.0), c(2.0)])).unwrap();
        assert_eq!(
            r,
            vec![Root {
                value: c(0.0),
                multiplicity: 1
            }]
        );

        // (w - 1)^4
        let r = find_roots(&poly(&[c(1.0), c(-4.0), c(6.0), c(-4.0), c(1.0)])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 4);
        assert!((r[0].value - c(1.0)).norm() < 1e-10);

        let r = find_roots(&poly(&[c(-1.0), c(0.0), c(1.0)])).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c(-1.0)).norm() < 1e-14 && r[0].multiplicity == 1);
        assert!((r[1].value - c(1.0)).norm() < 1e-14 && r[1].multiplicity == 1);
    }

    #[test]
    fn quartic_with_complex_fourfold_root() {
        let z = C64::new(0.7, -1.9);
        // (w - z)^4 scaled by a complex factor
        let k = C64::new(0.3, 0.4);
        let coeffs: Vec<C64> = (0..=4)
            .map(|j| k * binomial(4, j) * (-z).powu((4 - j) as u32))
            .collect();
        let r = find_roots(&poly(&coeffs)).unwrap();
        assert_eq!(r.len(), 1, "{r:?}");
        assert_eq!(r[0].multiplicity, 4);
        assert!((r[0].value - z).norm() < 1e-6);
    }

    #[test]
    fn close_distinct_roots_are_not_merged() {
        // (w-1)^2 (w-1.01)^2: two double roots 0.01 apart
        let a = [c(1.0), c(-2.0), c(1.0)];
        let b = [c(1.0201), c(-2.02), c(1.0)];
        let mut prod = vec![c(0.0); 5];
        for i in 0..3 {
            for j in 0..3 {
                prod[i + j] += a[i] * b[j];
            }
        }
        let r = find_roots(&poly(&prod)).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!(r.iter().all(|x| x.multiplicity == 2));
    }

    #[test]
    fn nearly_nilpotent_companion_terminates() {
        let c = [c(4.93e-32), c(0.0), c(1.53e-16), c(0.0), c(0.111)];
        let roots = companion_roots(&c).unwrap();
        assert_eq!(roots.len(), 4);
        assert!(roots.iter().all(|r| r.norm() < 1e-6));
        let p = ZeroPolynomial::from_coefficients(Measure::SqrtThreeTangle, c.to_vec());
        assert_eq!(find_roots(&p).unwrap().len(), 1);
    }

    #[test]
    fn zero_polynomial_is_reported() {
        assert_eq!(
            find_roots(&poly(&[c(0.0), c(1e-14), c(0.0)])),
            Err(Error::ZeroPolynomialIdentically)
        );
    }

    #[test]
    fn two_qubit_family_certifies_at_origin() {
        let g: f64 = 1.1;
        let p1 = Ket::from_terms(
            2,
            &[
                ("01", c((g / 2.0).cos())),
                ("10", C64::from_polar((g / 2.0).sin(), 0.4)),
            ],
        )
        .unwrap()
        .normalize()
        .unwrap();
        let s = rank2(PureState::basis("00").unwrap(), p1, 0.8, 2.0, 1.0);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        assert!(cert.one_root);
        assert!(cert.z.unwrap().norm() < 1e-14);
        assert!(
            (cert
                .root_state
                .as_ref()
                .unwrap()
                .fidelity(&PureState::basis("00").unwrap())
                - 1.0)
                .abs()
                < 1e-14
        );
        assert!((cert.e_antipode.unwrap() - g.sin()).abs() < 1e-14);
        assert!((cert.n.unwrap() - g.sin() / 4.0).abs() < 1e-14);
        let (root, anti) = (cert.root_state.unwrap(), cert.antipode_state.unwrap());
        assert!(root.inner(&anti).norm() < 1e-12);
    }

    #[test]
    fn two_distinct_roots_are_not_one_root() {
        // span{|01>, |10>}: P = -w, roots at 0 and infinity. Use a rotated basis
        // so both roots are finite: phi0 = (|01>+|10>)/sqrt2, phi1 = (|01>-|10>)/sqrt2.
        let h = c(FRAC_1_SQRT_2);
        let p0 = Ket::from_terms(2, &[("01", h), ("10", h)])
            .unwrap()
            .normalize()
            .unwrap();
        let p1 = Ket::from_terms(2, &[("01", h), ("10", -h)])
            .unwrap()
            .normalize()
            .unwrap();
        let s = rank2(p0, p1, 0.4, 0.3, 0.0);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        assert!(!cert.one_root);
        assert_eq!(cert.roots.len(), 2);
        assert!(cert.z.is_none());
    }

    #[test]
    fn pole_safe_basis_cases() {
        let g: f64 = 1.0;
        let zp = Ket::from_terms(2, &[("01", c((g / 2.0).cos())), ("10", c((g / 2.0).sin()))])
            .unwrap()
            .normalize()
            .unwrap();
        // root sits at phi1: poles swapped
        let s = rank2(zp.clone(), PureState::basis("00").unwrap(), 0.6, 1.2, 0.5);
        let safe = pole_safe_basis(&s, Measure::Concurrence).unwrap();
        assert!((safe.phi1().fidelity(&zp) - 1.0).abs() < 1e-14);
        assert!(safe.density_matrix().max_abs_diff(&s.density_matrix()) < 1e-14);

        // both poles entangled: unchanged
        let s2 = rank2(PureState::basis("00").unwrap(), zp, 0.6, 1.2, 0.5);
        assert_eq!(pole_safe_basis(&s2, Measure::Concurrence).unwrap(), s2);

        // product plane
        let s3 = rank2(
            PureState::basis("00").unwrap(),
            PureState::basis("01").unwrap(),
            0.2,
            0.3,
            0.4,
        );
        assert_eq!(
            pole_safe_basis(&s3, Measure::Concurrence),
            Err(Error::EntireRangeVanishes)
        );
    }

    #[test]
    fn both_poles_roots_uses_equator() {
        // span{|01>, |10>}: both poles are product states, the equator is not.
        let s = rank2(
            PureState::basis("01").unwrap(),
            PureState::basis("10").unwrap(),
            0.5,
            PI / 3.0,
            0.2,
        );
        let safe = pole_safe_basis(&s, Measure::Concurrence).unwrap();
        assert!(Measure::Concurrence.evaluate(safe.phi1()).unwrap() > 0.5);
        assert!(safe.density_matrix().max_abs_diff(&s.density_matrix()) < 1e-14);
        let cert = certify(&safe, Measure::Concurrence).unwrap();
        assert!(!cert.one_root);
        assert_eq!(cert.cluster_count(), 2);
    }

    #[test]
    fn mismatched_measure_is_rejected() {
        let s = rank2(
            PureState::basis("00").unwrap(),
            PureState::basis("11").unwrap(),
            0.3,
            0.2,
            0.1,
        );
        assert!(matches!(
            build_polynomial(&s, Measure::SqrtThreeTangle),
            Err(Error::WrongQubitCount { .. })
        ));
    }

    #[test]
    fn chart_direction_matches_surface_state() {
        let z = C64::new(0.3, -1.2);
        let d = chart_direction(z);
        let t = 2.0 * z.norm().atan();
        let p = z.arg();
        let expect = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
        for i in 0..3 {
            assert!((d[i] - expect[i]).abs() < 1e-14);
        }
    }
}
