//! Measure values on the pure states of a rank-2 range, sampled on a
//! `theta x phi` grid over the Bloch sphere.

use serde::{Deserialize, Serialize};

use crate::convexroof::closed_form;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::qstate::RankTwoState;
use crate::zeropolytope::RootCertificate;

/// Which axis the grid's `theta = 0` pole points along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFrame {
    /// Poles at `|phi0>` and `|phi1>`.
    Basis,
    /// Pole at the root direction; rings of constant `theta` are the
    /// equidistant planes.
    Root,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    /// Unit Bloch vector of the point in the state's basis.
    pub direction: [f64; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub frame: GridFrame,
    /// Row-major: `theta` outer, `phi` inner.
    pub points: Vec<GridPoint>,
    /// `r . z_hat`, when one-root.
    pub plane_constant: Option<f64>,
    pub closed_form: Option<f64>,
    pub root_direction: Option<[f64; 3]>,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Right-handed frame `(e1, e2, pole)`.
fn frame_around(pole: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if pole[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let e1 = normalized(cross(helper, pole));
    let e2 = cross(pole, e1);
    (e1, e2)
}

impl BlochGrid {
    /// `theta_i = pi i / (n_theta - 1)` including both poles and
    /// `phi_j = 2 pi j / n_phi`.
    pub fn compute(
        state: &RankTwoState,
        measure: Measure,
        n_theta: usize,
        n_phi: usize,
        frame: GridFrame,
        cert: Option<&RootCertificate>,
    ) -> Result<BlochGrid> {
        if n_theta < 2 || n_phi < 1 {
            return Err(Error::InvalidConfig(format!(
                "grid needs n_theta >= 2 and n_phi >= 1, got {n_theta} x {n_phi}"
            )));
        }
        let one_root = cert.filter(|c| c.one_root);
        let root_direction = one_root.map(|c| c.root_direction(state)).transpose()?;
        let (pole, e1, e2) = match frame {
            GridFrame::Basis => ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            GridFrame::Root => {
                let pole = root_direction.ok_or(Error::NotOneRoot)?;
                let (e1, e2) = frame_around(pole);
                (pole, e1, e2)
            }
        };
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
            for j in 0..n_phi {
                let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                let d: [f64; 3] =
                    std::array::from_fn(|k| ct * pole[k] + st * (cp * e1[k] + sp * e2[k]));
                let t = d[2].clamp(-1.0, 1.0).acos();
                let p = d[1].atan2(d[0]);
                let value = measure.evaluate(&state.surface_state(t, p))?;
                points.push(GridPoint {
                    theta,
                    phi,
                    direction: d,
                    value,
                });
            }
        }
        let plane_constant = root_direction.map(|z| {
            let r = state.bloch().cartesian();
            r[0] * z[0] + r[1] * z[1] + r[2] * z[2]
        });
        let closed = one_root
            .map(|c| closed_form(state, c).map(|r| r.value))
            .transpose()?;
        Ok(BlochGrid {
            n_theta,
            n_phi,
            frame,
            points,
            plane_constant,
            closed_form: closed,
            root_direction,
        })
    }

    pub fn argmin(&self) -> &GridPoint {
        self.points
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("grid is non-empty")
    }

    pub fn argmax(&self) -> &GridPoint {
        self.points
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .expect("grid is non-empty")
    }

    /// Grid point whose direction is closest to `u`.
    pub fn nearest(&self, u: [f64; 3]) -> &GridPoint {
        let dot = |p: &GridPoint| p.direction.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        self.points
            .iter()
            .max_by(|a, b| dot(a).total_cmp(&dot(b)))
            .expect("grid is non-empty")
    }

    /// Largest spread of values within one `theta` ring.
    pub fn max_ring_spread(&self) -> f64 {
        self.points
            .chunks(self.n_phi)
            .map(|ring| {
                let lo = ring.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
                let hi = ring
                    .iter()
                    .map(|p| p.value)
                    .fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// CSV with `#` comment lines for the plane constant and closed form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(c) = self.plane_constant {
            out.push_str(&format!("# plane_constant = {c:.12}\n"));
        }
        if let Some(c) = self.closed_form {
            out.push_str(&format!("# closed_form = {c:.12}\n"));
        }
        if let Some(z) = self.root_direction {
            out.push_str(&format!(
                "# root_direction = {:.12},{:.12},{:.12}\n",
                z[0], z[1], z[2]
            ));
        }
        out.push_str("theta,phi,x,y,z,E\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.12},{:.12},{:.12},{:.12},{:.12},{:.12}\n",
                p.theta, p.phi, p.direction[0], p.direction[1], p.direction[2], p.value
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{two_qubit_state, TwoQubitFamily};
    use crate::qstate::{BlochVector, C64};
    use crate::zeropolytope::certify_state;

    fn sample() -> (RankTwoState, RootCertificate) {
        let fam = TwoQubitFamily {
            gamma: 1.1,
            delta: 0.4,
            bloch: BlochVector::new(0.6, 2.0, 1.0).unwrap(),
        };
        let s = two_qubit_state(&fam).unwrap();
        let (_, cert) = certify_state(&s, Measure::Concurrence).unwrap();
        (s, cert)
    }

    #[test]
    fn root_frame_rings_are_flat() {
        let (s, cert) = sample();
        let g = BlochGrid::compute(
            &s,
            Measure::Concurrence,
            19,
            24,
            GridFrame::Root,
            Some(&cert),
        )
        .unwrap();
        assert!(g.max_ring_spread() < 1e-12);
        assert_eq!(g.argmin().theta, 0.0);
        assert_eq!(g.argmax().theta, std::f64::consts::PI);
        assert!(
            (g.closed_form.unwrap() - 0.5 * (1.0 - 0.6 * 2.0f64.cos()) * 1.1f64.sin()).abs()
                < 1e-12
        );
    }

    #[test]
    fn basis_frame_extremes() {
        let (s, _) = sample();
        // move the root off the pole
        let (c, sn) = (0.8f64.cos(), 0.8f64.sin());
        let w = nalgebra::Matrix2::new(
            C64::from(c),
            C64::from(-sn),
            C64::from_polar(sn, 0.3),
            C64::from_polar(c, 0.3),
        );
        let s = s.rebased(&w).unwrap();
        let (_, cert) = certify_state(&s, Measure::Concurrence).unwrap();
        let g = BlochGrid::compute(
            &s,
            Measure::Concurrence,
            31,
            40,
            GridFrame::Basis,
            Some(&cert),
        )
        .unwrap();
        let z = g.root_direction.unwrap();
        assert!(z[2].abs() < 0.99);
        assert_eq!(g.argmin().direction, g.nearest(z).direction);
        assert_eq!(
            g.argmax().direction,
            g.nearest([-z[0], -z[1], -z[2]]).direction
        );
        let csv = g.to_csv();
        assert!(csv.starts_with("# plane_constant = "));
        assert_eq!(
            csv.lines().filter(|l| !l.starts_with('#')).count(),
            1 + 31 * 40
        );
    }

    #[test]
    fn root_frame_needs_one_root() {
        let (s, _) = sample();
        assert_eq!(
            BlochGrid::compute(&s, Measure::Concurrence, 5, 5, GridFrame::Root, None),
            Err(Error::NotOneRoot)
        );
    }
}
