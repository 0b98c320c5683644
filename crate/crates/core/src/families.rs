//! Concrete one-root families: the two-qubit family, the three-qubit family
//! with a generalized W root, and three-qubit marginals of four-qubit SLOCC
//! class generators.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexroof::{closed_form, oracle_minimize, OptimizerConfig};
use crate::error::{Error, Result};
use crate::measures::{apply_slocc, Measure, SloccOperator};
use crate::qstate::{
    make_rank_two, reduced_rank_two, BlochVector, Ket, PureState, RankTwoState, C64,
};
use crate::zeropolytope::certify_state;

/// `|phi0> = |00>`, `|phi1> = cos(gamma/2)|01> + sin(gamma/2) e^{i delta}|10>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitFamily {
    pub gamma: f64,
    pub delta: f64,
    pub bloch: BlochVector,
}

impl TwoQubitFamily {
    /// `1/2 (1 - r cos(theta)) sin(gamma)`
    pub fn concurrence_formula(&self) -> f64 {
        0.5 * (1.0 - self.bloch.r * self.bloch.theta.cos()) * self.gamma.sin()
    }

    /// Uniform draw of `gamma`, `delta` and a Bloch vector uniform in the ball.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        TwoQubitFamily {
            gamma: rng.gen_range(0.0..std::f64::consts::PI),
            delta: rng.gen_range(0.0..std::f64::consts::TAU),
            bloch: random_bloch(rng),
        }
    }
}

pub(crate) fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let r = rng.gen::<f64>().cbrt();
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    BlochVector::new(r, theta, phi).expect("sampled inside the ball")
}

pub fn two_qubit_state(fam: &TwoQubitFamily) -> Result<RankTwoState> {
    let phi1 = PureState::from_vec(vec![
        C64::new(0.0, 0.0),
        C64::from((fam.gamma / 2.0).cos()),
        C64::from_polar((fam.gamma / 2.0).sin(), fam.delta),
        C64::new(0.0, 0.0),
    ])?;
    make_rank_two(PureState::basis("00")?, phi1, fam.bloch)
}

/// `|phi0> = a|001> + b|010> + c|100>` and
/// `|phi1> ~ g|000> + t1|011> + t2|101> + t3|110>` with
/// `t3 = (sqrt(c t1) + sqrt(b t2))^2 / a`, which makes `|phi0>` the only
/// vanishing state of the range.
///
/// `a, b, c` are normalized on construction; `g, t1, t2` may carry any common
/// scale since `|phi1>` is renormalized after `t3` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeQubitFamily {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub g: f64,
    pub t1: f64,
    pub t2: f64,
    pub bloch: BlochVector,
}

impl ThreeQubitFamily {
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        g: f64,
        t1: f64,
        t2: f64,
        bloch: BlochVector,
    ) -> Result<Self> {
        if [a, b, c, g, t1, t2]
            .iter()
            .any(|x| !x.is_finite() || *x < 0.0)
        {
            return Err(Error::DegenerateParameters(
                "amplitudes must be finite and non-negative".into(),
            ));
        }
        let n = (a * a + b * b + c * c).sqrt();
        if n == 0.0 || a / n < 1e-8 {
            return Err(Error::DegenerateParameters(format!(
                "a = {a} is too small to derive t3"
            )));
        }
        if g * g + t1 * t1 + t2 * t2 == 0.0 {
            return Err(Error::DegenerateParameters("g = t1 = t2 = 0".into()));
        }
        Ok(ThreeQubitFamily {
            a: a / n,
            b: b / n,
            c: c / n,
            g,
            t1,
            t2,
            bloch,
        })
    }

    /// `sqrt(c t1) + sqrt(b t2)`
    fn s(&self) -> f64 {
        (self.c * self.t1).sqrt() + (self.b * self.t2).sqrt()
    }

    pub fn t3(&self) -> f64 {
        self.s().powi(2) / self.a
    }

    /// Whether `g >= t_i` holds for all three `t_i`, including the derived `t3`.
    pub fn satisfies_ordering(&self) -> bool {
        self.g >= self.t1 && self.g >= self.t2 && self.g >= self.t3()
    }

    /// Draw with `a, b, c` uniform on the positive octant of the sphere,
    /// `g, t1, t2` in `(0.05, 1)` and the Bloch vector uniform in the ball.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let abc: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
            let gt: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
            let bloch = random_bloch(rng);
            if let Ok(f) = ThreeQubitFamily::new(abc[0], abc[1], abc[2], gt[0], gt[1], gt[2], bloch)
            {
                return f;
            }
        }
    }
}

pub fn three_qubit_state(fam: &ThreeQubitFamily) -> Result<RankTwoState> {
    let z = C64::new(0.0, 0.0);
    let phi0 = Ket::from_terms(
        3,
        &[
            ("001", C64::from(fam.a)),
            ("010", C64::from(fam.b)),
            ("100", C64::from(fam.c)),
        ],
    )?
    .normalize()?;
    let phi1 = Ket::from_terms(
        3,
        &[
            ("000", C64::from(fam.g)),
            ("011", C64::from(fam.t1)),
            ("101", C64::from(fam.t2)),
            ("110", C64::from(fam.t3())),
            ("111", z),
        ],
    )?
    .normalize()?;
    make_rank_two(phi0, phi1, fam.bloch)
}

/// The closed expression for `sqrt(tau)` of the family exactly as it is
/// usually quoted:
///
/// ```text
/// sqrt|g t1 t2 / a^9| |s| |1 - r cos(theta)| |a^4 + (s^4 + a^2 (g^2 + t1^2 + t2^2))^2|
/// ```
///
/// with `s = sqrt(c t1) + sqrt(b t2)`. It does not agree with the roof;
/// see [`sqrt_tangle_reconciled`] for the expression that does.
pub fn sqrt_tangle_formula(fam: &ThreeQubitFamily) -> f64 {
    let (a, s) = (fam.a, fam.s());
    let bracket = s.powi(4) + a * a * (fam.g * fam.g + fam.t1 * fam.t1 + fam.t2 * fam.t2);
    (fam.g * fam.t1 * fam.t2 / a.powi(9)).abs().sqrt()
        * s.abs()
        * (1.0 - fam.bloch.r * fam.bloch.theta.cos()).abs()
        * (a.powi(4) + bracket * bracket).abs()
}

/// `1/2 |1 - r cos(theta)| sqrt(tau)(|phi1>)` written out in the raw
/// amplitudes:
///
/// ```text
/// 2 |1 - r cos(theta)| sqrt(g t1 t2) s a^{3/2} / (s^4 + a^2 (g^2 + t1^2 + t2^2))
/// ```
///
/// It is invariant under a common rescaling of `g, t1, t2`.
pub fn sqrt_tangle_reconciled(fam: &ThreeQubitFamily) -> f64 {
    let (a, s) = (fam.a, fam.s());
    let denom = s.powi(4) + a * a * (fam.g * fam.g + fam.t1 * fam.t1 + fam.t2 * fam.t2);
    2.0 * (1.0 - fam.bloch.r * fam.bloch.theta.cos()).abs()
        * (fam.g * fam.t1 * fam.t2).sqrt()
        * s
        * a.powf(1.5)
        / denom
}

/// Four-qubit classes whose generators are available.
pub const SUPPORTED_CLASSES: [u8; 4] = [4, 5, 7, 8];

/// Qubits `k` whose partial trace of a class-`mu` state is one-root.
pub fn traceable_qubits(mu: u8) -> &'static [usize] {
    match mu {
        4 => &[1, 2, 3, 4],
        5 => &[2, 4],
        7 | 8 => &[2, 3, 4],
        _ => &[],
    }
}

fn parameter_count(mu: u8) -> Result<usize> {
    match mu {
        4 => Ok(2),
        5 => Ok(1),
        7 | 8 => Ok(0),
        _ => Err(Error::UnsupportedClass(mu)),
    }
}

/// Normalized generator `|G_mu>` of four-qubit SLOCC class `mu`.
pub fn generator(mu: u8, params: &[C64]) -> Result<PureState> {
    let expected = parameter_count(mu)?;
    if params.len() != expected {
        return Err(Error::BadClassParameters {
            mu,
            expected,
            got: params.len(),
        });
    }
    if params.iter().any(|p| p.re < 0.0) {
        return Err(Error::PreconditionViolated(
            "class parameters need Re >= 0".into(),
        ));
    }
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let terms: Vec<(&str, C64)> = match mu {
        4 => {
            let (a, b) = (params[0], params[1]);
            let h = i * std::f64::consts::FRAC_1_SQRT_2;
            vec![
                ("0000", a),
                ("1111", a),
                ("0101", (a + b) / 2.0),
                ("1010", (a + b) / 2.0),
                ("0110", (a - b) / 2.0),
                ("1001", (a - b) / 2.0),
                ("0001", h),
                ("0010", h),
                ("0111", h),
                ("1011", h),
            ]
        }
        5 => {
            let a = params[0];
            vec![
                ("0000", a),
                ("0101", a),
                ("1010", a),
                ("1111", a),
                ("0001", i),
                ("0110", one),
                ("1011", -i),
            ]
        }
        7 => vec![("0000", one), ("0101", one), ("1000", one), ("1110", one)],
        8 => vec![("0000", one), ("1011", one), ("1101", one), ("1110", one)],
        _ => unreachable!("checked by parameter_count"),
    };
    Ket::from_terms(4, &terms)?.normalize()
}

/// A class index with its parameters and generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SloccClass {
    pub mu: u8,
    pub params: Vec<C64>,
    pub generator: PureState,
}

impl SloccClass {
    pub fn new(mu: u8, params: Vec<C64>) -> Result<Self> {
        let generator = generator(mu, &params)?;
        Ok(SloccClass {
            mu,
            params,
            generator,
        })
    }

    pub fn traceable(&self) -> &'static [usize] {
        traceable_qubits(self.mu)
    }

    /// Generic parameters: components uniform in `[0, 1) x [-1, 1)`, redrawn
    /// while within `1e-3` of a known degeneracy (`a = 0`, `b = 0`, `a = +-b`).
    pub fn random<R: Rng + ?Sized>(mu: u8, rng: &mut R) -> Result<Self> {
        let count = parameter_count(mu)?;
        loop {
            let params: Vec<C64> = (0..count)
                .map(|_| C64::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let near_zero = params.iter().any(|p| p.norm() < 1e-3);
            let near_equal = count == 2
                && ((params[0] - params[1]).norm() < 1e-3 || (params[0] + params[1]).norm() < 1e-3);
            if !near_zero && !near_equal {
                return SloccClass::new(mu, params);
            }
        }
    }
}

const MAX_SLOCC_ATTEMPTS: usize = 100;
const MAX_SLOCC_CONDITION: f64 = 20.0;

/// Four random `SL(2, C)` factors: complex Gaussian matrices divided by the
/// square root of their determinant, redrawn while the condition number
/// exceeds 20.
pub fn random_slocc(seed: u64, kappa: f64) -> Result<SloccOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::with_capacity(4);
    let mut attempts = 0;
    while factors.len() < 4 {
        attempts += 1;
        if attempts > MAX_SLOCC_ATTEMPTS {
            return Err(Error::SamplingFailed(MAX_SLOCC_ATTEMPTS));
        }
        let m = Matrix2::from_fn(|_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        let det = m.determinant();
        if det.norm() < 1e-12 {
            continue;
        }
        let f = m / det.sqrt();
        let sv = f.singular_values();
        if sv.max() / sv.min() <= MAX_SLOCC_CONDITION {
            factors.push(f);
        }
    }
    SloccOperator::new(factors, kappa)
}

/// `Tr_k[L|G_mu><G_mu|L^H] / Tr(...)` as a rank-2 state in its eigenbasis.
pub fn slocc_marginal(class: &SloccClass, op: &SloccOperator, k: usize) -> Result<RankTwoState> {
    let psi = apply_slocc(op, class.generator.ket())?.normalize()?;
    reduced_rank_two(&psi, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub classes: Vec<u8>,
    pub draws: usize,
    pub seed: u64,
    /// Use `L = 1` instead of a random SLOCC operator per draw.
    pub identity: bool,
    /// Run the oracle on every one-root row.
    pub oracle: Option<OptimizerConfig>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            classes: SUPPORTED_CLASSES.to_vec(),
            draws: 20,
            seed: 0,
            identity: false,
            oracle: None,
        }
    }
}

/// One `(mu, k, draw)` line of a class scan. Certification failures leave
/// `n_root_clusters` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub mu: u8,
    pub k: usize,
    pub seed: u64,
    pub n_root_clusters: Option<usize>,
    pub one_root: bool,
    pub closed_form_value: Option<f64>,
    pub oracle_value: Option<f64>,
    pub abs_diff: Option<f64>,
}

pub const SCAN_HEADER: &str =
    "mu,k,seed,n_root_clusters,one_root,closed_form_value,oracle_value,abs_diff";

impl ScanRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.mu,
            self.k,
            self.seed,
            self.n_root_clusters
                .map(|n| n.to_string())
                .unwrap_or_default(),
            self.one_root,
            opt(self.closed_form_value),
            opt(self.oracle_value),
            opt(self.abs_diff),
        )
    }

    /// Whether the verdict agrees with [`traceable_qubits`].
    pub fn matches_table(&self) -> bool {
        self.one_root == traceable_qubits(self.mu).contains(&self.k)
    }
}

fn draw_seed(base: u64, draw: usize) -> u64 {
    base.wrapping_add(draw as u64)
}

fn scan_row(mu: u8, k: usize, seed: u64, config: &ScanConfig) -> Result<ScanRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mu as u64);
    let class = SloccClass::random(mu, &mut rng)?;
    let op = if config.identity {
        SloccOperator::identity(4)
    } else {
        random_slocc(rng.gen(), 1.0)?
    };
    let state = slocc_marginal(&class, &op, k)?;
    let mut row = ScanRow {
        mu,
        k,
        seed,
        n_root_clusters: None,
        one_root: false,
        closed_form_value: None,
        oracle_value: None,
        abs_diff: None,
    };
    let cert = match certify_state(&state, Measure::SqrtThreeTangle) {
        Ok((_, cert)) => cert,
        Err(Error::EntireRangeVanishes) | Err(Error::ZeroPolynomialIdentically) => return Ok(row),
        Err(e) => return Err(e),
    };
    row.n_root_clusters = Some(cert.cluster_count());
    row.one_root = cert.one_root;
    if cert.one_root {
        row.closed_form_value = Some(closed_form(&state, &cert)?.value);
    }
    if let (Some(cfg), true) = (&config.oracle, cert.one_root) {
        let v = oracle_minimize(&state, Measure::SqrtThreeTangle, cfg)?.value;
        row.oracle_value = Some(v);
        row.abs_diff = row.closed_form_value.map(|c| (c - v).abs());
    }
    Ok(row)
}

/// Certifies the marginals `k = 1..4` of `draws` generic members of each
/// class. Rows come out ordered by class, draw, then `k`.
pub fn class_scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    for &mu in &config.classes {
        parameter_count(mu)?;
    }
    let jobs: Vec<(u8, u64, usize)> = config
        .classes
        .iter()
        .flat_map(|&mu| {
            (0..config.draws)
                .flat_map(move |d| (1..=4).map(move |k| (mu, draw_seed(config.seed, d), k)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(mu, seed, k)| scan_row(mu, k, seed, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::sqrt_three_tangle;
    use crate::zeropolytope::certify;
    use std::f64::consts::PI;

    #[test]
    fn two_qubit_family_examples() {
        let fam = TwoQubitFamily {
            gamma: PI / 2.0,
            delta: 0.0,
            bloch: BlochVector::new(0.0, 0.0, 0.0).unwrap(),
        };
        let s = two_qubit_state(&fam).unwrap();
        let cert = certify(&s, Measure::Concurrence).unwrap();
        assert!(cert.one_root);
        assert!(cert.z.unwrap().norm() < 1e-14);
        assert!((closed_form(&s, &cert).unwrap().value - 0.5).abs() < 1e-14);

        let product = TwoQubitFamily { gamma: 0.0, ..fam };
        let s = two_qubit_state(&product).unwrap();
        assert_eq!(
            certify_state(&s, Measure::Concurrence).unwrap_err(),
            Error::EntireRangeVanishes
        );
    }

    #[test]
    fn three_qubit_root_is_the_w_state() {
        let fam = ThreeQubitFamily::new(
            0.6,
            0.5,
            0.4,
            0.8,
            0.3,
            0.2,
            BlochVector::new(0.5, 1.2, 0.3).unwrap(),
        )
        .unwrap();
        let s = three_qubit_state(&fam).unwrap();
        assert!(sqrt_three_tangle(s.phi0()).unwrap() < 1e-10);
        let cert = certify(&s, Measure::SqrtThreeTangle).unwrap();
        assert!(cert.one_root, "{cert:?}");
        assert!(cert.z.unwrap().norm() < 1e-6);
        let v = closed_form(&s, &cert).unwrap().value;
        assert!((v - sqrt_tangle_reconciled(&fam)).abs() < 1e-9);
        let first = 0.5 * (1.0 - 0.5 * 1.2f64.cos()) * sqrt_three_tangle(s.phi1()).unwrap();
        assert!((v - first).abs() < 1e-9);
    }

    #[test]
    fn literal_formula_edge_cases() {
        let north = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        let fam = ThreeQubitFamily::new(0.6, 0.5, 0.4, 0.8, 0.3, 0.2, north).unwrap();
        assert_eq!(sqrt_tangle_formula(&fam), 0.0);
        assert_eq!(sqrt_tangle_reconciled(&fam), 0.0);
        let flat = ThreeQubitFamily::new(
            0.6,
            0.5,
            0.4,
            1.0,
            0.0,
            0.0,
            BlochVector::new(0.3, 2.0, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(sqrt_tangle_formula(&flat), 0.0);
        assert!(matches!(
            ThreeQubitFamily::new(1e-10, 0.5, 0.4, 0.8, 0.3, 0.2, north),
            Err(Error::DegenerateParameters(_))
        ));
    }

    #[test]
    fn reconciled_formula_is_scale_invariant() {
        let b = BlochVector::new(0.3, 2.0, 1.0).unwrap();
        let f1 = ThreeQubitFamily::new(0.6, 0.5, 0.4, 0.8, 0.3, 0.2, b).unwrap();
        let f2 = ThreeQubitFamily::new(0.6, 0.5, 0.4, 2.4, 0.9, 0.6, b).unwrap();
        assert!((sqrt_tangle_reconciled(&f1) - sqrt_tangle_reconciled(&f2)).abs() < 1e-15);
    }

    #[test]
    fn generators() {
        let g7 = generator(7, &[]).unwrap();
        for (i, a) in g7.amps().iter().enumerate() {
            let expected = if [0b0000, 0b0101, 0b1000, 0b1110].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!((a - C64::from(expected)).norm() < 1e-15);
        }
        let g4 = generator(4, &[C64::from(1.0), C64::from(1.0)]).unwrap();
        assert_eq!(g4.amps()[0b0110], C64::new(0.0, 0.0));
        assert_eq!(g4.amps()[0b1001], C64::new(0.0, 0.0));
        let g8 = generator(8, &[]).unwrap();
        assert!((g8.ket().norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(generator(3, &[]), Err(Error::UnsupportedClass(3)));
        assert_eq!(
            generator(5, &[]),
            Err(Error::BadClassParameters {
                mu: 5,
                expected: 1,
                got: 0
            })
        );
    }

    #[test]
    fn random_slocc_has_unit_determinants() {
        for seed in 0..20 {
            let op = random_slocc(seed, 1.0).unwrap();
            for f in op.factors() {
                assert!((f.determinant() - C64::from(1.0)).norm() < 1e-12);
                assert!((f - Matrix2::identity()).norm() > 1e-3);
            }
        }
        assert_eq!(random_slocc(5, 2.0).unwrap(), random_slocc(5, 2.0).unwrap());
    }

    #[test]
    fn identity_scan_reproduces_class_table() {
        let cfg = ScanConfig {
            draws: 5,
            identity: true,
            ..ScanConfig::default()
        };
        let rows = class_scan(&cfg).unwrap();
        assert_eq!(rows.len(), 4 * 5 * 4);
        for r in &rows {
            assert!(r.matches_table(), "{}", r.to_csv());
        }
    }
}
