//! Pure-state polynomial entanglement measures and SLOCC operators.
//!
//! Both shipped measures are the modulus of an SL(2,C)^m-invariant polynomial
//! `P`, rescaled to homogeneous degree 2 in the amplitudes:
//!
//! * concurrence: `C = 2 |psi00 psi11 - psi01 psi10|` (`P` of degree 2);
//! * square root of the three-tangle: `sqrt(tau) = 2 sqrt|Hdet|`, with
//!   `Hdet = d1 - 2 d2 + 4 d3` the Cayley hyperdeterminant (degree 4) and
//!   `tau = 4 |Hdet|`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{Ket, PureState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Concurrence,
    SqrtThreeTangle,
}

/// Static description of a measure: the invariant `P`, its degree in the
/// amplitudes, and the homogeneous degree `h` of `E` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureDescriptor {
    pub name: &'static str,
    pub h: u32,
    pub poly_degree: usize,
    pub qubits: usize,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::Concurrence, Measure::SqrtThreeTangle];

    pub fn descriptor(self) -> MeasureDescriptor {
        match self {
            Measure::Concurrence => MeasureDescriptor {
                name: "concurrence",
                h: 2,
                poly_degree: 2,
                qubits: 2,
            },
            Measure::SqrtThreeTangle => MeasureDescriptor {
                name: "sqrt_three_tangle",
                h: 2,
                poly_degree: 4,
                qubits: 3,
            },
        }
    }

    pub fn name(self) -> &'static str {
        self.descriptor().name
    }

    pub fn qubits(self) -> usize {
        self.descriptor().qubits
    }

    pub fn poly_degree(self) -> usize {
        self.descriptor().poly_degree
    }

    pub fn homogeneous_degree(self) -> u32 {
        self.descriptor().h
    }

    pub fn check_qubits(self, m: usize) -> Result<()> {
        if m != self.qubits() {
            return Err(Error::WrongQubitCount {
                measure: self.name(),
                expected: self.qubits(),
                got: m,
            });
        }
        Ok(())
    }

    /// The underlying invariant polynomial `P` evaluated on raw amplitudes.
    /// Panics if `amps` has the wrong length; use the checked entry points.
    pub fn polynomial(self, amps: &[C64]) -> C64 {
        match self {
            Measure::Concurrence => amps[0] * amps[3] - amps[1] * amps[2],
            Measure::SqrtThreeTangle => hyperdeterminant(amps),
        }
    }

    /// Measure value from the polynomial value.
    pub fn from_polynomial(self, p: C64) -> f64 {
        match self {
            Measure::Concurrence => 2.0 * p.norm(),
            Measure::SqrtThreeTangle => 2.0 * p.norm().sqrt(),
        }
    }

    /// `E(psi)` on a normalized state.
    pub fn evaluate(self, psi: &PureState) -> Result<f64> {
        self.check_qubits(psi.qubits())?;
        Ok(self.from_polynomial(self.polynomial(psi.ket().as_slice())))
    }

    /// `E(v)` on an unnormalized vector, homogeneous of degree `h` in `v`.
    pub fn evaluate_unnormalized(self, v: &Ket) -> Result<f64> {
        self.check_qubits(v.qubits())?;
        if v.norm_sqr() == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.from_polynomial(self.polynomial(v.as_slice())))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concurrence" => Ok(Measure::Concurrence),
            "sqrt_three_tangle" => Ok(Measure::SqrtThreeTangle),
            other => Err(Error::UnknownMeasure(other.to_string())),
        }
    }
}

/// Cayley hyperdeterminant `d1 - 2 d2 + 4 d3` of a 2x2x2 amplitude array
/// (indices big-endian, `a[4 i + 2 j + k] = a_ijk`).
pub fn hyperdeterminant(a: &[C64]) -> C64 {
    let (a000, a001, a010, a011) = (a[0], a[1], a[2], a[3]);
    let (a100, a101, a110, a111) = (a[4], a[5], a[6], a[7]);
    let sq = |z: C64| z * z;
    let d1 = sq(a000) * sq(a111) + sq(a001) * sq(a110) + sq(a010) * sq(a101) + sq(a100) * sq(a011);
    let d2 = a000 * a111 * a011 * a100
        + a000 * a111 * a101 * a010
        + a000 * a111 * a110 * a001
        + a011 * a100 * a101 * a010
        + a011 * a100 * a110 * a001
        + a101 * a010 * a110 * a001;
    let d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;
    d1 - d2 * 2.0 + d3 * 4.0
}

pub fn concurrence(psi: &PureState) -> Result<f64> {
    Measure::Concurrence.evaluate(psi)
}

/// Three-tangle `tau = 4 |Hdet|` (degree 4; reporting only).
pub fn three_tangle(psi: &PureState) -> Result<f64> {
    Measure::SqrtThreeTangle.check_qubits(psi.qubits())?;
    Ok(4.0 * hyperdeterminant(psi.ket().as_slice()).norm())
}

pub fn sqrt_three_tangle(psi: &PureState) -> Result<f64> {
    Measure::SqrtThreeTangle.evaluate(psi)
}

pub fn evaluate_unnormalized(measure: Measure, v: &Ket) -> Result<f64> {
    measure.evaluate_unnormalized(v)
}

/// `kappa * (L_1 x ... x L_m)` with every `det L_i = 1` and `kappa > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SloccOperator {
    factors: Vec<Matrix2<C64>>,
    kappa: f64,
}

impl SloccOperator {
    pub fn new(factors: Vec<Matrix2<C64>>, kappa: f64) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSlocc("no factors".into()));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidSlocc(format!(
                "kappa {kappa} must be positive"
            )));
        }
        for (i, f) in factors.iter().enumerate() {
            let det = f.determinant();
            if (det - C64::new(1.0, 0.0)).norm() >= 1e-10 {
                return Err(Error::InvalidSlocc(format!(
                    "factor {} has determinant {det}",
                    i + 1
                )));
            }
        }
        Ok(SloccOperator { factors, kappa })
    }

    pub fn identity(m: usize) -> Self {
        SloccOperator {
            factors: vec![Matrix2::identity(); m],
            kappa: 1.0,
        }
    }

    pub fn factors(&self) -> &[Matrix2<C64>] {
        &self.factors
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn qubits(&self) -> usize {
        self.factors.len()
    }

    /// Same local factors with a different scale.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        SloccOperator::new(self.factors.clone(), kappa)
    }
}

/// Applies a single-qubit matrix to qubit `q` (1-based, big-endian).
pub fn apply_local(op: &Matrix2<C64>, q: usize, v: &Ket) -> Result<Ket> {
    let m = v.qubits();
    if q == 0 || q > m {
        return Err(Error::IndexOutOfRange { k: q, m });
    }
    let bit = 1usize << (m - q);
    let mut amps = v.amps().clone();
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = op[(0, 0)] * a0 + op[(0, 1)] * a1;
            amps[i | bit] = op[(1, 0)] * a0 + op[(1, 1)] * a1;
        }
    }
    Ket::new(m, amps)
}

/// `kappa (L_1 x ... x L_m) |psi>`, left unnormalized.
pub fn apply_slocc(op: &SloccOperator, psi: &Ket) -> Result<Ket> {
    if op.qubits() != psi.qubits() {
        return Err(Error::DimensionMismatch(format!(
            "operator acts on {} qubits, state has {}",
            op.qubits(),
            psi.qubits()
        )));
    }
    let mut out = psi.clone();
    for (q, f) in op.factors.iter().enumerate() {
        out = apply_local(f, q + 1, &out)?;
    }
    Ok(out.scaled(C64::from(op.kappa)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ket(m: usize, terms: &[(&str, C64)]) -> Ket {
        Ket::from_terms(m, terms).unwrap()
    }

    fn ghz() -> PureState {
        ket(3, &[("000", c(1.0)), ("111", c(1.0))])
            .normalize()
            .unwrap()
    }

    fn w() -> PureState {
        ket(3, &[("001", c(1.0)), ("010", c(1.0)), ("100", c(1.0))])
            .normalize()
            .unwrap()
    }

    /// Independent hyperdeterminant: `Hdet = -1/2 sum eps eps eps eps eps eps a a a a`
    /// written as a contraction with the 2x2 antisymmetric symbol.
    fn hyperdet_by_contraction(a: &[C64]) -> C64 {
        let eps = |i: usize, j: usize| -> f64 {
            match (i, j) {
                (0, 1) => 1.0,
                (1, 0) => -1.0,
                _ => 0.0,
            }
        };
        let at = |i: usize, j: usize, k: usize| a[4 * i + 2 * j + k];
        let mut sum = C64::new(0.0, 0.0);
        for i1 in 0..2 {
            for i2 in 0..2 {
                for i3 in 0..2 {
                    for j1 in 0..2 {
                        for j2 in 0..2 {
                            for j3 in 0..2 {
                                for k1 in 0..2 {
                                    for k2 in 0..2 {
                                        for k3 in 0..2 {
                                            for l1 in 0..2 {
                                                for l2 in 0..2 {
                                                    for l3 in 0..2 {
                                                        let e = eps(i1, j1)
                                                            * eps(i2, j2)
                                                            * eps(k1, l1)
                                                            * eps(k2, l2)
                                                            * eps(i3, k3)
                                                            * eps(j3, l3);
                                                        if e != 0.0 {
                                                            sum += at(i1, i2, i3)
                                                                * at(j1, j2, j3)
                                                                * at(k1, k2, k3)
                                                                * at(l1, l2, l3)
                                                                * e;
                                                        }
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        sum * -0.5
    }

    #[test]
    fn concurrence_anchors() {
        let bell = ket(2, &[("00", c(1.0)), ("11", c(1.0))])
            .normalize()
            .unwrap();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(concurrence(&PureState::basis("01").unwrap()).unwrap(), 0.0);
        let g = PI / 3.0;
        let psi = ket(
            2,
            &[
                ("01", c((g / 2.0).cos())),
                ("10", C64::from_polar((g / 2.0).sin(), 0.7)),
            ],
        )
        .normalize()
        .unwrap();
        assert!((concurrence(&psi).unwrap() - (PI / 3.0).sin()).abs() < 1e-15);
        assert!(matches!(
            concurrence(&ghz()),
            Err(Error::WrongQubitCount { .. })
        ));
    }

    #[test]
    fn three_tangle_anchors() {
        assert!((three_tangle(&ghz()).unwrap() - 1.0).abs() < 1e-15);
        assert!((sqrt_three_tangle(&ghz()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(three_tangle(&w()).unwrap(), 0.0);
        assert_eq!(sqrt_three_tangle(&w()).unwrap(), 0.0);
        assert_eq!(
            three_tangle(&PureState::basis("000").unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn hyperdeterminant_matches_contraction() {
        let amps: Vec<C64> = (0..8)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3 + 0.2).cos()))
            .collect();
        let direct = hyperdeterminant(&amps);
        let oracle = hyperdet_by_contraction(&amps);
        assert!(
            (direct - oracle).norm() < 1e-13 * oracle.norm().max(1.0),
            "{direct} vs {oracle}"
        );
        // also anchored on GHZ where only d1 survives
        let g = ghz();
        assert!((hyperdet_by_contraction(g.ket().as_slice()).norm() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_homogeneity() {
        let bell = ket(2, &[("00", c(1.0)), ("11", c(1.0))])
            .normalize()
            .unwrap();
        let v = bell.ket().scaled(c(3.0));
        assert!((evaluate_unnormalized(Measure::Concurrence, &v).unwrap() - 9.0).abs() < 1e-13);
        let v = ghz().ket().scaled(c(2.0));
        assert!((evaluate_unnormalized(Measure::SqrtThreeTangle, &v).unwrap() - 4.0).abs() < 1e-13);
        assert!(matches!(
            evaluate_unnormalized(Measure::Concurrence, &Ket::zeros(2)),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn slocc_identity_and_scale() {
        let psi = ghz();
        let id = SloccOperator::identity(3);
        let out = apply_slocc(&id, psi.ket()).unwrap();
        assert_eq!(&out, psi.ket());
        let scaled = apply_slocc(&id.with_kappa(2.0).unwrap(), psi.ket()).unwrap();
        let e = evaluate_unnormalized(Measure::SqrtThreeTangle, &scaled).unwrap();
        assert!((e - 4.0).abs() < 1e-13);
        assert!(matches!(
            apply_slocc(&SloccOperator::identity(2), psi.ket()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn slocc_rejects_bad_factors() {
        let bad = Matrix2::new(c(2.0), c(0.0), c(0.0), c(1.0));
        assert!(matches!(
            SloccOperator::new(vec![bad], 1.0),
            Err(Error::InvalidSlocc(_))
        ));
        assert!(matches!(
            SloccOperator::new(vec![Matrix2::identity()], 0.0),
            Err(Error::InvalidSlocc(_))
        ));
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
            assert_eq!(m.homogeneous_degree(), 2);
        }
        assert!("tangle".parse::<Measure>().is_err());
    }
}
