//! JSON file formats.
//!
//! Complex numbers are `[re, im]`. A pure state is `{"m": 2, "amps": [...]}`,
//! a density matrix a row-major nested array (or `{"m": .., "matrix": ..}`),
//! and a rank-2 state `{"phi0": <pure>, "phi1": <pure>, "bloch": {"r", "theta", "phi"}}`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::convexroof::{Decomposition, OracleStats, RoofResult};
use crate::error::{Error, Result};
use crate::qstate::{
    eigen_decompose_rank2, make_rank_two, BlochVector, DensityMatrix, Ket, PureState, RankTwoState,
    C64,
};
use crate::zeropolytope::RootCertificate;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PureJson {
    m: usize,
    amps: Vec<C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RankTwoJson {
    phi0: PureJson,
    phi1: PureJson,
    bloch: BlochVector,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum DensityJson {
    Rows(Vec<Vec<C64>>),
    Tagged { m: usize, matrix: Vec<Vec<C64>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AnyJson {
    RankTwo(RankTwoJson),
    Pure(PureJson),
    Density(DensityJson),
}

/// Any of the three state formats.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Pure(PureState),
    Density(DensityMatrix),
    RankTwo(RankTwoState),
}

impl StateInput {
    pub fn qubits(&self) -> usize {
        match self {
            StateInput::Pure(p) => p.qubits(),
            StateInput::Density(d) => d.qubits(),
            StateInput::RankTwo(s) => s.qubits(),
        }
    }

    /// Rank-2 view: density matrices are eigen-decomposed; pure states are
    /// rejected since their range has no second direction.
    pub fn into_rank_two(self) -> Result<RankTwoState> {
        match self {
            StateInput::RankTwo(s) => Ok(s),
            StateInput::Density(d) => eigen_decompose_rank2(&d),
            StateInput::Pure(_) => Err(Error::InvalidDensityMatrix(
                "a pure state file has no rank-2 structure; give a density matrix or rank-2 state"
                    .into(),
            )),
        }
    }
}

fn pure_from_json(p: PureJson) -> Result<PureState> {
    let expected = 1usize << p.m;
    if p.amps.len() != expected {
        return Err(Error::BadLength {
            m: p.m,
            len: p.amps.len(),
        });
    }
    PureState::new(Ket::new(p.m, DVector::from_vec(p.amps))?)
}

fn pure_to_json(p: &PureState) -> PureJson {
    PureJson {
        m: p.qubits(),
        amps: p.amps().iter().copied().collect(),
    }
}

fn density_from_rows(rows: Vec<Vec<C64>>) -> Result<DensityMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidDensityMatrix(
            "matrix must be square and non-empty".into(),
        ));
    }
    DensityMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn parse_state(text: &str) -> Result<StateInput> {
    let any: AnyJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("state file: {e}")))?;
    Ok(match any {
        AnyJson::Pure(p) => StateInput::Pure(pure_from_json(p)?),
        AnyJson::RankTwo(r) => StateInput::RankTwo(make_rank_two(
            pure_from_json(r.phi0)?,
            pure_from_json(r.phi1)?,
            r.bloch,
        )?),
        AnyJson::Density(DensityJson::Rows(rows)) => StateInput::Density(density_from_rows(rows)?),
        AnyJson::Density(DensityJson::Tagged { m, matrix }) => {
            let d = density_from_rows(matrix)?;
            if d.qubits() != m {
                return Err(Error::DimensionMismatch(format!(
                    "m = {m} but matrix has {} qubits",
                    d.qubits()
                )));
            }
            StateInput::Density(d)
        }
    })
}

pub fn read_state(path: &Path) -> Result<StateInput> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    parse_state(&text)
}

pub fn pure_state_json(p: &PureState) -> Value {
    serde_json::to_value(pure_to_json(p)).expect("plain data serializes")
}

pub fn rank_two_json(s: &RankTwoState) -> Value {
    serde_json::to_value(RankTwoJson {
        phi0: pure_to_json(s.phi0()),
        phi1: pure_to_json(s.phi1()),
        bloch: s.bloch(),
    })
    .expect("plain data serializes")
}

pub fn density_json(d: &DensityMatrix) -> Value {
    let m = d.matrix();
    let rows: Vec<Vec<C64>> = (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect();
    serde_json::to_value(rows).expect("plain data serializes")
}

/// Rounds to 12 significant digits so that printed reports are stable
/// across platforms.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    json!(round12(x))
}

fn complex(z: C64) -> Value {
    json!([round12(z.re), round12(z.im)])
}

pub fn certificate_json(cert: &RootCertificate, state: Option<&RankTwoState>) -> Value {
    let roots: Vec<Value> = cert
        .roots
        .iter()
        .map(|r| json!([round12(r.value.re), round12(r.value.im), r.multiplicity]))
        .collect();
    let direction = state
        .and_then(|s| cert.root_direction(s).ok())
        .map(|d| json!([round12(d[0]), round12(d[1]), round12(d[2])]));
    json!({
        "measure": cert.measure.name(),
        "one_root": cert.one_root,
        "n_root_clusters": cert.cluster_count(),
        "roots": roots,
        "roots_at_infinity": cert.roots_at_infinity,
        "z": cert.z.map(complex),
        "N": cert.n.map(num),
        "E_antipode": cert.e_antipode.map(num),
        "law_residual": cert.law_residual.map(num),
        "root_direction": direction,
    })
}

fn decomposition_json(d: &Decomposition) -> Value {
    let states: Vec<Value> = d
        .states()
        .iter()
        .map(|s| Value::Array(s.amps().iter().map(|&a| complex(a)).collect()))
        .collect();
    json!({
        "weights": d.weights().iter().map(|&w| round12(w)).collect::<Vec<_>>(),
        "states": states,
    })
}

pub fn oracle_stats_json(stats: &OracleStats) -> Value {
    json!({
        "restarts": stats.restarts,
        "best_nu": stats.best_nu,
        "gradient_norm": num(stats.gradient_norm),
        "max_start_gradient_norm": num(stats.max_start_gradient_norm),
        "evaluations": stats.evaluations,
        "best_decomposition": decomposition_json(&stats.best_decomposition),
    })
}

pub fn roof_json(result: &RoofResult, state: Option<&RankTwoState>) -> Value {
    json!({
        "value": num(result.value),
        "method": result.method,
        "certificate": result.certificate.as_ref().map(|c| certificate_json(c, state)),
        "oracle_stats": result.oracle.as_ref().map(oracle_stats_json),
    })
}
