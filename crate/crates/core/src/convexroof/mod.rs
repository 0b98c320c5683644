//! Convex-roof evaluation.
//!
//! For a one-root state the degree-2 measure is affine on the whole Bloch
//! ball, so every decomposition gives the same average and the roof is
//!
//! ```text
//! E(rho) = (1 - r.z_hat) / 2 * E(|z'>) = D_Tr(rho_c, |z><z|) * E(|z'>)
//! ```
//!
//! where `z_hat` is the Bloch direction of the root and `rho_c` the radial
//! state with Bloch vector `(r.z_hat) z_hat`. [`oracle_minimize`] searches
//! decompositions directly and is used to check that claim independently;
//! [`wootters_mixed_concurrence`] is the classic two-qubit formula.

mod geometry;
mod oracle;
mod wootters;

pub use geometry::{
    random_theorem1_instance, verify_theorem1, SphereGeometry, Theorem1Report, WeightedPoints,
};
pub use oracle::{manifold_gradient_norm, oracle_minimize, OptimizerConfig, OracleStats};
pub use wootters::wootters_mixed_concurrence;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::qstate::{make_rank_two, BlochVector, DensityMatrix, Ket, PureState, RankTwoState, C64};
use crate::tolerance::Tolerances;
use crate::zeropolytope::RootCertificate;

/// A pure-state ensemble `{p_i, |psi_i>}` with `sum p_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.len() != states.len() || weights.is_empty() {
            return Err(Error::InvalidDecomposition(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        if weights.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidDecomposition(
                "weights must be positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDecomposition(format!(
                "weights sum to {total}"
            )));
        }
        Ok(Decomposition { weights, states })
    }

    /// Turns sub-normalized vectors `|psi~_i>` into `p_i = ||psi~_i||^2`,
    /// `|psi_i> = |psi~_i> / sqrt(p_i)`, dropping weights below `drop`.
    pub fn from_subnormalized(kets: &[Ket], drop: f64) -> Result<Self> {
        let mut weights = Vec::with_capacity(kets.len());
        let mut states = Vec::with_capacity(kets.len());
        for k in kets {
            let p = k.norm_sqr();
            if p >= drop {
                weights.push(p);
                states.push(k.normalize()?);
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDecomposition("all elements dropped".into()));
        }
        weights.iter_mut().for_each(|p| *p /= total);
        Decomposition::new(weights, states)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let dim = self.states[0].amps().len();
        let mut rho = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for (p, s) in self.weights.iter().zip(&self.states) {
            rho += s.projector().matrix() * C64::from(*p);
        }
        DensityMatrix::from_unnormalized(rho)
            .expect("a convex mixture of pure states is a density matrix")
    }

    /// Largest entrywise deviation of `sum p_i |psi_i><psi_i|` from `state`.
    pub fn reconstruction_error(&self, state: &RankTwoState) -> f64 {
        self.density_matrix().max_abs_diff(&state.density_matrix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoofMethod {
    ClosedForm,
    Oracle,
}

/// Value of the convex roof together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofResult {
    pub value: f64,
    pub method: RoofMethod,
    pub certificate: Option<RootCertificate>,
    pub oracle: Option<OracleStats>,
}

/// Exact roof of a certified one-root state.
///
/// The certificate may come from any basis of the same range (for example
/// the output of `pole_safe_basis`); the root direction is recomputed in the
/// basis of `state`.
pub fn closed_form(state: &RankTwoState, cert: &RootCertificate) -> Result<RoofResult> {
    if !cert.one_root {
        return Err(Error::NotOneRoot);
    }
    let zdir = cert.root_direction(state)?;
    let e_anti = cert.e_antipode.ok_or(Error::NotOneRoot)?;
    let r = state.bloch().cartesian();
    let along = dot(&r, &zdir);
    Ok(RoofResult {
        value: (0.5 * (1.0 - along) * e_anti).max(0.0),
        method: RoofMethod::ClosedForm,
        certificate: Some(cert.clone()),
        oracle: None,
    })
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// The radial state: Bloch vector `(r.z_hat) z_hat` on the diameter through
/// the root, in the same constant-entanglement plane as `state`.
pub fn radial_state(state: &RankTwoState, cert: &RootCertificate) -> Result<RankTwoState> {
    let zdir = cert.root_direction(state)?;
    let along = dot(&state.bloch().cartesian(), &zdir);
    let c = [along * zdir[0], along * zdir[1], along * zdir[2]];
    make_rank_two(
        state.phi0().clone(),
        state.phi1().clone(),
        BlochVector::from_cartesian(c)?,
    )
}

/// `sum_i p_i E(|psi_i>)`
pub fn average_over_decomposition(dec: &Decomposition, measure: Measure) -> Result<f64> {
    dec.weights
        .iter()
        .zip(&dec.states)
        .map(|(p, s)| measure.evaluate(s).map(|e| p * e))
        .sum()
}

/// Haar-random `n x n` unitary (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`).
pub fn haar_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    q
}

/// Sub-normalized vectors `|psi~_i> = sum_j V_ij sqrt(lambda_j) |e_j>` for a
/// `nu x 2` isometry `V` and the spectral data of `state`.
pub(crate) fn ensemble_from_isometry(v: &DMatrix<C64>, scaled: &[Ket; 2]) -> Vec<Ket> {
    (0..v.nrows())
        .map(|i| scaled[0].combine(v[(i, 0)], &scaled[1], v[(i, 1)]))
        .collect()
}

pub(crate) fn scaled_eigenkets(state: &RankTwoState) -> Result<[Ket; 2]> {
    let (l0, l1, e0, e1) = state.spectral();
    if l1 < Tolerances::DEFAULT.rank_deficient {
        return Err(Error::RankDeficient(l1));
    }
    Ok([
        e0.ket().scaled(C64::from(l0.sqrt())),
        e1.ket().scaled(C64::from(l1.sqrt())),
    ])
}

/// A random decomposition with `nu` elements: the first two columns of a
/// Haar unitary applied to the spectral ensemble. Deterministic in `seed`.
pub fn random_decomposition(state: &RankTwoState, nu: usize, seed: u64) -> Result<Decomposition> {
    if nu < 2 {
        return Err(Error::InvalidDecomposition(format!(
            "need nu >= 2, got {nu}"
        )));
    }
    let scaled = scaled_eigenkets(state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(nu, &mut rng);
    let v = u.columns(0, 2).into_owned();
    let kets = ensemble_from_isometry(&v, &scaled);
    Decomposition::from_subnormalized(&kets, Tolerances::DEFAULT.weight_drop)
}

/// The spectral decomposition itself (the `nu = 2`, identity-isometry case).
pub fn spectral_decomposition(state: &RankTwoState) -> Result<Decomposition> {
    let scaled = scaled_eigenkets(state)?;
    Decomposition::from_subnormalized(&scaled, Tolerances::DEFAULT.weight_drop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{trace_distance, Ket};
    use crate::zeropolytope::certify;
    use std::f64::consts::PI;

    fn two_qubit(gamma: f64, delta: f64, r: f64, theta: f64, phi: f64) -> RankTwoState {
        let p1 = Ket::from_terms(
            2,
            &[
                ("01", C64::from((gamma / 2.0).cos())),
                ("10", C64::from_polar((gamma / 2.0).sin(), delta)),
            ],
        )
        .unwrap()
        .normalize()
        .unwrap();
        make_rank_two(
            PureState::basis("00").unwrap(),
            p1,
            BlochVector::new(r, theta, phi).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn closed_form_at_poles() {
        let s = two_qubit(1.2, 0.3, 1.0, 0.0, 0.0);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        assert!(closed_form(&s, &cert).unwrap().value.abs() < 1e-15);
        let s = two_qubit(1.2, 0.3, 1.0, PI, 0.0);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        assert!((closed_form(&s, &cert).unwrap().value - 1.2f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_two_qubit_formula() {
        let (g, r, t) = (0.9, 0.55, 2.2);
        let s = two_qubit(g, 4.0, r, t, 1.7);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        let v = closed_form(&s, &cert).unwrap().value;
        assert!((v - 0.5 * (1.0 - r * t.cos()) * g.sin()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_requires_one_root() {
        let s = two_qubit(1.0, 0.0, 0.5, 0.5, 0.5);
        let mut cert = certify(&s, Measure::Concurrence).unwrap();
        cert.one_root = false;
        assert_eq!(closed_form(&s, &cert), Err(Error::NotOneRoot));
    }

    #[test]
    fn average_examples() {
        let s = two_qubit(1.0, 0.0, 0.3, 1.0, 0.0);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        let z = cert.root_state.clone().unwrap();
        let zp = cert.antipode_state.clone().unwrap();
        let single = Decomposition::new(vec![1.0], vec![zp.clone()]).unwrap();
        let e = average_over_decomposition(&single, Measure::Concurrence).unwrap();
        assert!((e - 1.0f64.sin()).abs() < 1e-14);
        let half = Decomposition::new(vec![0.5, 0.5], vec![z, zp]).unwrap();
        let e = average_over_decomposition(&half, Measure::Concurrence).unwrap();
        assert!((e - 0.5 * 1.0f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn random_decomposition_reconstructs_state() {
        let s = two_qubit(2.0, 1.0, 0.4, 0.7, 2.5);
        for seed in 0..10 {
            for nu in 2..=6 {
                let d = random_decomposition(&s, nu, seed).unwrap();
                assert!(d.reconstruction_error(&s) < 1e-12);
                assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(
            random_decomposition(&s, 3, 11).unwrap(),
            random_decomposition(&s, 3, 11).unwrap()
        );
        let dec = spectral_decomposition(&s).unwrap();
        assert_eq!(dec.len(), 2);
        assert!(dec.reconstruction_error(&s) < 1e-14);
    }

    #[test]
    fn random_decomposition_rejects_pure_states() {
        let s = two_qubit(2.0, 1.0, 1.0, 0.7, 2.5);
        assert!(matches!(
            random_decomposition(&s, 3, 0),
            Err(Error::RankDeficient(_))
        ));
        assert!(matches!(
            random_decomposition(&two_qubit(2.0, 1.0, 0.5, 0.7, 2.5), 1, 0),
            Err(Error::InvalidDecomposition(_))
        ));
    }

    #[test]
    fn one_root_average_is_decomposition_independent() {
        let s = two_qubit(1.4, 2.0, 0.6, 1.9, 0.8);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        let exact = closed_form(&s, &cert).unwrap().value;
        let vals: Vec<f64> = (0..100)
            .map(|seed| {
                let d = random_decomposition(&s, 2 + (seed as usize % 5), seed).unwrap();
                average_over_decomposition(&d, Measure::Concurrence).unwrap()
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        assert!(var < 1e-16, "variance {var}");
        assert!(vals.iter().all(|v| (v - exact).abs() < 1e-8));
    }

    #[test]
    fn radial_state_and_trace_distance_form() {
        let s = two_qubit(0.8, 0.1, 0.7, 1.1, 3.0);
        let cert = certify(&s, Measure::Concurrence).unwrap();
        let rc = radial_state(&s, &cert).unwrap();
        let e = closed_form(&s, &cert).unwrap().value;
        let ec = closed_form(&rc, &cert).unwrap().value;
        assert!((e - ec).abs() < 1e-10);
        let zproj = cert.root_state.as_ref().unwrap().projector();
        let dtr = trace_distance(&rc.density_matrix(), &zproj).unwrap();
        let zdir = cert.root_direction(&s).unwrap();
        let along = dot(&s.bloch().cartesian(), &zdir);
        assert!((0.5 * (1.0 - along) - dtr).abs() < 1e-10);
        assert!((dtr * cert.e_antipode.unwrap() - e).abs() < 1e-10);
    }
}
