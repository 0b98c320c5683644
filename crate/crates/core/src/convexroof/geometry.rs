//! Equal-barycenter identity on an n-sphere.
//!
//! Let `{alpha_i, a_i}` be weighted points on a sphere, all at the same
//! distance from a point `z` on the sphere, with barycenter `g`. For any other
//! weighted set `{beta_j, b_j}` on the same sphere with barycenter `g`,
//! `sum_j beta_j |z - b_j|^2 = |z - a_l|^2` for every `l`.
//!
//! [`verify_theorem1`] evaluates this identity together with the two facts
//! it rests on: the Apollonius (parallel-axis) relation
//! `sum alpha_i |z - a_i|^2 = |z - g|^2 + sum alpha_i |g - a_i|^2` and the
//! equality of the weighted second moments `sum alpha_i |a_i|^2 = sum beta_j |b_j|^2`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const PRECONDITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    pub weights: Vec<f64>,
    pub points: Vec<DVector<f64>>,
}

impl WeightedPoints {
    pub fn barycenter(&self) -> DVector<f64> {
        let dim = self.points[0].len();
        self.weights
            .iter()
            .zip(&self.points)
            .fold(DVector::zeros(dim), |acc, (w, p)| acc + p * *w)
    }

    /// `sum_i w_i |x - p_i|^2`
    pub fn moment_about(&self, x: &DVector<f64>) -> f64 {
        self.weights
            .iter()
            .zip(&self.points)
            .map(|(w, p)| w * (x - p).norm_squared())
            .sum()
    }

    fn second_moment(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.points)
            .map(|(w, p)| w * p.norm_squared())
            .sum()
    }
}

/// Sphere `|x - center| = radius` in `R^(n+1)` and the barycenter `g` shared
/// by both point sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGeometry {
    pub center: DVector<f64>,
    pub radius: f64,
    pub barycenter: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Report {
    /// `max_l |sum_j beta_j |z - b_j|^2 - |z - a_l|^2|`
    pub invariance: f64,
    /// Apollonius residual, worst of the two sets.
    pub apollonius: f64,
    /// `|sum alpha_i |a_i|^2 - sum beta_j |b_j|^2|`
    pub second_moment: f64,
}

impl Theorem1Report {
    pub fn max_residual(&self) -> f64 {
        self.invariance.max(self.apollonius).max(self.second_moment)
    }
}

fn check_set(name: &str, set: &WeightedPoints, geom: &SphereGeometry) -> Result<()> {
    if set.points.is_empty() || set.points.len() != set.weights.len() {
        return Err(Error::PreconditionViolated(format!(
            "{name}: empty or mismatched weights"
        )));
    }
    if set.weights.iter().any(|&w| w < 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "{name}: negative weight"
        )));
    }
    let total: f64 = set.weights.iter().sum();
    if (total - 1.0).abs() > PRECONDITION_TOL {
        return Err(Error::PreconditionViolated(format!(
            "{name}: weights sum to {total}"
        )));
    }
    for (i, p) in set.points.iter().enumerate() {
        if p.len() != geom.center.len() {
            return Err(Error::PreconditionViolated(format!(
                "{name}: point {i} has wrong dimension"
            )));
        }
        let off = ((p - &geom.center).norm() - geom.radius).abs();
        if off > PRECONDITION_TOL {
            return Err(Error::PreconditionViolated(format!(
                "{name}: point {i} is {off:e} off the sphere"
            )));
        }
    }
    let g_err = (set.barycenter() - &geom.barycenter).norm();
    if g_err > PRECONDITION_TOL {
        return Err(Error::PreconditionViolated(format!(
            "{name}: barycenter differs from g by {g_err:e}"
        )));
    }
    Ok(())
}

pub fn verify_theorem1(
    geom: &SphereGeometry,
    z: &DVector<f64>,
    set_a: &WeightedPoints,
    set_b: &WeightedPoints,
) -> Result<Theorem1Report> {
    let z_off = ((z - &geom.center).norm() - geom.radius).abs();
    if z_off > PRECONDITION_TOL {
        return Err(Error::PreconditionViolated(format!(
            "z is {z_off:e} off the sphere"
        )));
    }
    check_set("set A", set_a, geom)?;
    check_set("set B", set_b, geom)?;
    let dists: Vec<f64> = set_a
        .points
        .iter()
        .map(|a| (z - a).norm_squared())
        .collect();
    let spread = dists.iter().cloned().fold(f64::MIN, f64::max)
        - dists.iter().cloned().fold(f64::MAX, f64::min);
    if spread > PRECONDITION_TOL {
        return Err(Error::PreconditionViolated(format!(
            "set A is not equidistant from z (spread {spread:e})"
        )));
    }

    let g = &geom.barycenter;
    let lhs = set_b.moment_about(z);
    let invariance = dists.iter().map(|d| (lhs - d).abs()).fold(0.0, f64::max);
    let zg = (z - g).norm_squared();
    let apollonius = [set_a, set_b]
        .iter()
        .map(|s| (s.moment_about(z) - (zg + s.moment_about(g))).abs())
        .fold(0.0, f64::max);
    let second_moment = (set_a.second_moment() - set_b.second_moment()).abs();
    Ok(Theorem1Report {
        invariance,
        apollonius,
        second_moment,
    })
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = gaussian_vector(dim, rng);
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

fn simplex_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Random instance on an `n`-sphere in `R^(n+1)`.
///
/// Set A lies on a random secant hyperplane orthogonal to the diameter
/// through `z`. Set B is built from random chords through the barycenter
/// `g`: each chord's endpoints carry the two weights that put their mean at
/// `g`, so any positive mixture of chords has barycenter `g` as well.
pub fn random_theorem1_instance(
    n: usize,
    seed: u64,
) -> (SphereGeometry, DVector<f64>, WeightedPoints, WeightedPoints) {
    let dim = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = gaussian_vector(dim, &mut rng);
    let radius = rng.gen_range(0.5..2.0);
    let axis = unit_vector(dim, &mut rng);
    let z = &center + &axis * radius;

    let cos_psi: f64 = rng.gen_range(-0.95..0.95);
    let sin_psi = (1.0 - cos_psi * cos_psi).sqrt();
    let k_a = rng.gen_range(2..=6);
    let points_a: Vec<DVector<f64>> = (0..k_a)
        .map(|_| {
            let v = unit_vector(dim, &mut rng);
            let perp = &v - &axis * axis.dot(&v);
            let perp = &perp / perp.norm();
            &center + (&axis * cos_psi + perp * sin_psi) * radius
        })
        .collect();
    let set_a = WeightedPoints {
        weights: simplex_weights(k_a, &mut rng),
        points: points_a,
    };
    let g = set_a.barycenter();

    let k_b = rng.gen_range(1..=5);
    let chord_weights = simplex_weights(k_b, &mut rng);
    let mut weights_b = Vec::new();
    let mut points_b = Vec::new();
    let go = &g - &center;
    for w in chord_weights {
        let d = unit_vector(dim, &mut rng);
        // |g + s d - o|^2 = R^2
        let b = d.dot(&go);
        let c = go.norm_squared() - radius * radius;
        let disc = (b * b - c).sqrt();
        let (s_plus, s_minus) = (-b + disc, -b - disc);
        let t = -s_minus / (s_plus - s_minus);
        points_b.push(&g + &d * s_plus);
        weights_b.push(w * t);
        points_b.push(&g + &d * s_minus);
        weights_b.push(w * (1.0 - t));
    }
    let set_b = WeightedPoints {
        weights: weights_b,
        points: points_b,
    };
    let geom = SphereGeometry {
        center,
        radius,
        barycenter: g,
    };
    (geom, z, set_a, set_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_have_zero_residual() {
        let (geom, z, a, _) = random_theorem1_instance(2, 3);
        let rep = verify_theorem1(&geom, &z, &a, &a).unwrap();
        assert!(rep.invariance < 1e-13);
        assert!(rep.max_residual() < 1e-13);
    }

    #[test]
    fn random_instances_satisfy_identity() {
        for n in [2, 4, 7] {
            for seed in 0..50 {
                let (geom, z, a, b) = random_theorem1_instance(n, seed);
                let rep = verify_theorem1(&geom, &z, &a, &b).unwrap();
                assert!(rep.max_residual() < 1e-10, "n={n} seed={seed}: {rep:?}");
            }
        }
    }

    #[test]
    fn preconditions_are_reported() {
        let (geom, z, a, mut b) = random_theorem1_instance(2, 9);
        b.points[0][0] += 1e-3;
        let err = verify_theorem1(&geom, &z, &a, &b).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(ref m) if m.contains("set B")));

        let (geom, z, mut a, b) = random_theorem1_instance(2, 10);
        a.points[1] = &geom.center + (&z - &geom.center) * -1.0;
        let err = verify_theorem1(&geom, &z, &a, &b).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(_)));

        let (geom, z, a, b) = random_theorem1_instance(2, 11);
        let off = &z * 1.5;
        assert!(verify_theorem1(&geom, &off, &a, &b).is_err());
    }
}
