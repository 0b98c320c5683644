//! Named numerical tolerances.
//!
//! Every threshold used by the state checks, the root certification and the
//! acceptance suite lives here so that tests can refer to them by name.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of a pure state's squared norm from 1.
    pub norm: f64,
    /// Entrywise Hermiticity and unit-trace tolerance for density matrices.
    pub hermitian: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub psd: f64,
    /// Largest `|<phi0|phi1>|` accepted for a rank-2 basis.
    pub orthogonality: f64,
    /// Slack on the Bloch radius bound `r <= 1`.
    pub bloch_radius: f64,
    /// Third eigenvalue above which a matrix is not rank 2.
    pub rank: f64,
    /// Eigenvalue gap below which a rank-2 spectrum is treated as degenerate.
    pub degenerate_gap: f64,
    /// Relative size below which a polynomial coefficient is insignificant.
    pub coefficient: f64,
    /// Absolute size below which every coefficient counts as zero.
    pub zero_polynomial: f64,
    /// Relative interpolation residual at the check nodes.
    pub interpolation: f64,
    /// Base relative radius for clustering companion-matrix roots.
    pub cluster: f64,
    /// Noise level whose `1/D`-th power sets the clustering floor for degree `D`.
    pub cluster_noise: f64,
    /// Relative size of the Taylor coefficients that confirms a multiple root.
    pub multiplicity: f64,
    /// Measure value below which a basis pole counts as a root.
    pub pole: f64,
    /// Relative residual of the distance law required for a one-root verdict.
    pub distance_law: f64,
    /// Decomposition weights below this are dropped.
    pub weight_drop: f64,
    /// Eigenvalue below which a rank-2 state is considered rank deficient.
    pub rank_deficient: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        norm: 1e-12,
        hermitian: 1e-12,
        psd: 1e-10,
        orthogonality: 1e-10,
        bloch_radius: 1e-12,
        rank: 1e-10,
        degenerate_gap: 1e-12,
        coefficient: 1e-12,
        zero_polynomial: 1e-12,
        interpolation: 1e-10,
        cluster: 1e-5,
        cluster_noise: 1e-12,
        multiplicity: 1e-8,
        pole: 1e-10,
        distance_law: 1e-7,
        weight_drop: 1e-14,
        rank_deficient: 1e-12,
    };

    /// Clustering radius (relative) for a polynomial of degree `degree`.
    ///
    /// A root of multiplicity `D` is scattered by roughly `eps^(1/D)` by
    /// coefficient noise `eps`, so the fixed radius is raised to that floor.
    pub fn cluster_radius(&self, degree: usize) -> f64 {
        let floor = self.cluster_noise.powf(1.0 / degree.max(1) as f64);
        self.cluster.max(floor)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
