//! Brute-force convex roof.
//!
//! Decompositions of a rank-2 state are `nu x 2` isometries `V` acting on the
//! scaled spectral ensemble. `V` is the first two columns of
//! `U0 exp(A - A^H)` with `A` a complex `nu x nu` matrix (`2 nu^2` real
//! coordinates) and `U0` a Haar-random starting unitary. The objective is
//! `sum_i E(psi~_i)` on the sub-normalized vectors, which equals the weighted
//! average by homogeneity.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ensemble_from_isometry, haar_unitary, scaled_eigenkets, Decomposition, RoofMethod, RoofResult,
};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::qstate::{Ket, RankTwoState, C64};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Restarts per ensemble size.
    pub restarts: usize,
    pub nu_min: usize,
    pub nu_max: usize,
    /// Simplex diameter at which a local search stops.
    pub step_tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 64,
            nu_min: 2,
            nu_max: 4,
            step_tol: 1e-10,
            max_iters: 500,
            fd_step: 1e-6,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be positive".into()));
        }
        if self.nu_min < 2 || self.nu_max < self.nu_min {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= nu_min <= nu_max, got {}..{}",
                self.nu_min, self.nu_max
            )));
        }
        if !(self.fd_step > 0.0) || !(self.step_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "fd_step and step_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub restarts: usize,
    pub best_nu: usize,
    pub best_decomposition: Decomposition,
    /// Finite-difference gradient norm at the optimum.
    pub gradient_norm: f64,
    /// Largest finite-difference gradient norm over all starting points.
    pub max_start_gradient_norm: f64,
    pub evaluations: usize,
}

/// Objective on the unitary manifold around a base point `U0`.
struct Objective<'a> {
    measure: Measure,
    scaled: &'a [Ket; 2],
    base: DMatrix<C64>,
}

/// `exp(X) v` for an anti-Hermitian `X` by a scaled Taylor series; the
/// step count keeps each partial series well inside its radius.
fn expm_apply(x: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let n = v.len();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| x[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = norm1.ceil().max(1.0) as usize;
    let inv = 1.0 / steps as f64;
    let mut out = v.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); n];
    let mut next = vec![C64::new(0.0, 0.0); n];
    for _ in 0..steps {
        term.copy_from_slice(&out);
        for k in 1..40 {
            for (i, slot) in next.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, t) in term.iter().enumerate() {
                    acc += x[(i, j)] * t;
                }
                *slot = acc * (inv / k as f64);
            }
            std::mem::swap(&mut term, &mut next);
            let size: f64 = term.iter().map(|t| t.norm_sqr()).sum();
            out.iter_mut().zip(&term).for_each(|(o, t)| *o += t);
            if size < 1e-36 {
                break;
            }
        }
    }
    out
}

impl Objective<'_> {
    fn nu(&self) -> usize {
        self.base.nrows()
    }

    fn generator(&self, x: &[f64]) -> DMatrix<C64> {
        let nu = self.nu();
        DMatrix::from_fn(nu, nu, |i, j| {
            let (k, l) = (2 * (i * nu + j), 2 * (j * nu + i));
            C64::new(x[k], x[k + 1]) - C64::new(x[l], -x[l + 1])
        })
    }

    /// First `cols` columns of `U0 exp(A - A^H)`.
    fn columns(&self, x: &[f64], cols: usize) -> DMatrix<C64> {
        let nu = self.nu();
        let gen = self.generator(x);
        let mut e = DMatrix::from_element(nu, cols, C64::new(0.0, 0.0));
        for c in 0..cols {
            let mut unit = vec![C64::new(0.0, 0.0); nu];
            unit[c] = C64::new(1.0, 0.0);
            let col = expm_apply(&gen, &unit);
            e.column_mut(c)
                .iter_mut()
                .zip(col)
                .for_each(|(d, s)| *d = s);
        }
        &self.base * e
    }

    fn unitary(&self, x: &[f64]) -> DMatrix<C64> {
        self.columns(x, self.nu())
    }

    fn value_of(&self, v: &DMatrix<C64>) -> f64 {
        let s0 = self.scaled[0].as_slice();
        let s1 = self.scaled[1].as_slice();
        let mut buf = vec![C64::new(0.0, 0.0); s0.len()];
        (0..v.nrows())
            .map(|i| {
                let (a, b) = (v[(i, 0)], v[(i, 1)]);
                for (k, out) in buf.iter_mut().enumerate() {
                    *out = a * s0[k] + b * s1[k];
                }
                self.measure.from_polynomial(self.measure.polynomial(&buf))
            })
            .sum()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.value_of(&self.columns(x, 2))
    }

    fn dim(&self) -> usize {
        2 * self.nu() * self.nu()
    }

    /// Central-difference gradient norm at the base point.
    fn gradient_norm(&self, h: f64) -> f64 {
        let mut x = vec![0.0; self.dim()];
        let mut sq = 0.0;
        for k in 0..x.len() {
            x[k] = h;
            let fp = self.value(&x);
            x[k] = -h;
            let fm = self.value(&x);
            x[k] = 0.0;
            sq += ((fp - fm) / (2.0 * h)).powi(2);
        }
        sq.sqrt()
    }
}

struct LocalResult {
    value: f64,
    unitary: DMatrix<C64>,
    evaluations: usize,
}

const FLAT_SPREAD: f64 = 1e-15;

/// Nelder-Mead with dimension-adaptive coefficients (Gao and Han, 2012).
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    initial_step: f64,
    step_tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) =
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += initial_step;
        let fx = eval(&x);
        simplex.push((x, fx));
    }
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
    };

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0.clone();
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&best)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        // A simplex whose values agree to roundoff sits on a flat region
        // (always the case for one-root states); shrinking it further only
        // spends evaluations.
        let spread = simplex[n].1 - simplex[0].1;
        if diameter < step_tol || spread <= FLAT_SPREAD * simplex[0].1.abs().max(1.0) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / nf);
        }
        let (worst, f_worst) = simplex[n].clone();
        let (f_best, f_second) = (simplex[0].1, simplex[n - 1].1);

        let xr = combine(&centroid, &worst, -alpha);
        let fr = eval(&xr);
        if fr < f_best {
            let xe = combine(&centroid, &worst, -alpha * beta);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = combine(&centroid, &xr, gamma);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = combine(&centroid, &worst, gamma);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        for v in simplex.iter_mut().skip(1) {
            let xs = combine(&best, &v.0, delta);
            let fs = eval(&xs);
            *v = (xs, fs);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals)
}

fn restart_rng(seed: u64, nu: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((nu as u64) << 32) | restart as u64);
    rng
}

struct RestartOutcome {
    local: LocalResult,
    start_gradient: f64,
}

fn run_restart(
    measure: Measure,
    scaled: &[Ket; 2],
    nu: usize,
    restart: usize,
    config: &OptimizerConfig,
) -> RestartOutcome {
    let mut rng = restart_rng(config.seed, nu, restart);
    let obj = Objective {
        measure,
        scaled,
        base: haar_unitary(nu, &mut rng),
    };
    let start_gradient = obj.gradient_norm(config.fd_step);
    let x0 = vec![0.0; obj.dim()];
    let (x, mut value, mut evaluations) = nelder_mead(
        |x| obj.value(x),
        &x0,
        0.3,
        config.step_tol,
        config.max_iters,
    );
    let mut unitary = obj.unitary(&x);
    // Re-centre once on the local optimum with a fresh simplex; a collapsed
    // simplex in many dimensions often stalls short of the minimum.
    let recentred = Objective {
        measure,
        scaled,
        base: unitary.clone(),
    };
    let (x2, v2, e2) = nelder_mead(
        |x| recentred.value(x),
        &x0,
        0.05,
        config.step_tol,
        config.max_iters,
    );
    evaluations += e2 + 2 * obj.dim();
    if v2 < value {
        value = v2;
        unitary = recentred.unitary(&x2);
    }
    RestartOutcome {
        local: LocalResult {
            value,
            unitary,
            evaluations,
        },
        start_gradient,
    }
}

/// Minimizes the average measure over decompositions with
/// `config.nu_min..=config.nu_max` elements. Restarts run in parallel; the
/// result does not depend on the thread count.
///
/// A state with a vanishing second eigenvalue has only the trivial
/// decomposition and gets the measure of its pure state.
pub fn oracle_minimize(
    state: &RankTwoState,
    measure: Measure,
    config: &OptimizerConfig,
) -> Result<RoofResult> {
    config.validate()?;
    measure.check_qubits(state.qubits())?;
    let scaled = match scaled_eigenkets(state) {
        Ok(s) => s,
        Err(Error::RankDeficient(_)) => return pure_result(state, measure),
        Err(e) => return Err(e),
    };

    let jobs: Vec<(usize, usize)> = (config.nu_min..=config.nu_max)
        .flat_map(|nu| (0..config.restarts).map(move |r| (nu, r)))
        .collect();
    let outcomes: Vec<RestartOutcome> = jobs
        .par_iter()
        .map(|&(nu, r)| run_restart(measure, &scaled, nu, r, config))
        .collect();

    let (best_idx, best) = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.local
                .value
                .total_cmp(&b.1.local.value)
                .then(a.0.cmp(&b.0))
        })
        .expect("at least one restart");
    let best_nu = jobs[best_idx].0;
    let evaluations: usize = outcomes.iter().map(|o| o.local.evaluations).sum();
    let max_start_gradient_norm = outcomes
        .iter()
        .map(|o| o.start_gradient)
        .fold(0.0, f64::max);

    let at_best = Objective {
        measure,
        scaled: &scaled,
        base: best.local.unitary.clone(),
    };
    let gradient_norm = at_best.gradient_norm(config.fd_step);
    let v = best.local.unitary.columns(0, 2).into_owned();
    let kets = ensemble_from_isometry(&v, &scaled);
    let best_decomposition =
        Decomposition::from_subnormalized(&kets, Tolerances::DEFAULT.weight_drop)?;

    Ok(RoofResult {
        value: best.local.value,
        method: RoofMethod::Oracle,
        certificate: None,
        oracle: Some(OracleStats {
            restarts: jobs.len(),
            best_nu,
            best_decomposition,
            gradient_norm,
            max_start_gradient_norm,
            evaluations: evaluations + 2 * at_best.dim(),
        }),
    })
}

fn pure_result(state: &RankTwoState, measure: Measure) -> Result<RoofResult> {
    let (_, _, e0, _) = state.spectral();
    let value = measure.evaluate(&e0)?;
    Ok(RoofResult {
        value,
        method: RoofMethod::Oracle,
        certificate: None,
        oracle: Some(OracleStats {
            restarts: 0,
            best_nu: 1,
            best_decomposition: Decomposition::new(vec![1.0], vec![e0])?,
            gradient_norm: 0.0,
            max_start_gradient_norm: 0.0,
            evaluations: 1,
        }),
    })
}

/// Finite-difference gradient norm of `sum_i E(psi~_i)` at a Haar-random
/// point of the `nu`-element decomposition manifold.
pub fn manifold_gradient_norm(
    state: &RankTwoState,
    measure: Measure,
    nu: usize,
    seed: u64,
    fd_step: f64,
) -> Result<f64> {
    measure.check_qubits(state.qubits())?;
    if nu < 2 {
        return Err(Error::InvalidDecomposition(format!(
            "need nu >= 2, got {nu}"
        )));
    }
    let scaled = scaled_eigenkets(state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obj = Objective {
        measure,
        scaled: &scaled,
        base: haar_unitary(nu, &mut rng),
    };
    Ok(obj.gradient_norm(fd_step))
}
