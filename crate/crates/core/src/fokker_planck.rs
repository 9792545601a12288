//! Averaged Fokker-Planck operator.
//!
//! For constrained h = g / M the flux M L grad(h) contracts against the
//! invariant gradients to M (dh/dy / omega_c^2, 0, dh/dr, dh/dv3), so the
//! operator reduces to a weighted Laplacian in (y, r, v3) with no x3 term.

use rayon::prelude::*;

use crate::grid::{reduced_divergence, ReducedDensity, ReducedGrid};
use crate::kernels::Mat6;
use crate::physics::{maxwellian_rv, PlasmaParams};

/// The constant diffusion matrix acting on gradients with respect to
/// (omega_c x, v).
pub fn l_matrix() -> Mat6 {
    let mut l = [[0.0; 6]; 6];
    l[0][0] = 2.0;
    l[1][1] = 2.0;
    // -E in the upper right block, E in the lower left.
    l[0][4] = -1.0;
    l[1][3] = 1.0;
    l[3][1] = 1.0;
    l[4][0] = -1.0;
    l[3][3] = 1.0;
    l[4][4] = 1.0;
    l[5][5] = 1.0;
    l
}

/// Quadratic form L xi . xi.
pub fn l_quadratic_form(xi: &[f64; 6]) -> f64 {
    let l = l_matrix();
    (0..6).map(|i| (0..6).map(|j| l[i][j] * xi[i] * xi[j]).sum::<f64>()).sum()
}

#[derive(Debug, Clone)]
pub struct FokkerPlanckOperator {
    grid: ReducedGrid,
    maxw: Vec<f64>,
    coef: f64,
    inv_wc2: f64,
}

impl FokkerPlanckOperator {
    pub fn new(grid: &ReducedGrid, params: &PlasmaParams) -> Self {
        let maxw = (0..grid.len())
            .map(|f| {
                let p = grid.point(grid.unindex(f));
                maxwellian_rv(p.r, p.v3, params)
            })
            .collect();
        let wc = params.omega_c();
        FokkerPlanckOperator {
            grid: grid.clone(),
            maxw,
            coef: params.theta / (params.m * params.tau),
            inv_wc2: 1.0 / (wc * wc),
        }
    }

    /// Flux contractions (Phi . grad psi_i), i = 1..5, without the prefactor.
    pub fn fluxes(&self, g: &ReducedDensity) -> [Vec<f64>; 5] {
        let grid = &self.grid;
        let h: Vec<f64> = g.data.iter().zip(&self.maxw).map(|(g, m)| g / m).collect();
        let scale = [self.inv_wc2, self.inv_wc2, 0.0, 1.0, 1.0];
        let mut out: [Vec<f64>; 5] = std::array::from_fn(|_| Vec::new());
        out.par_iter_mut().enumerate().for_each(|(axis, o)| {
            if scale[axis] == 0.0 {
                *o = vec![0.0; grid.len()];
                return;
            }
            let d = grid.derivative(&h, axis);
            *o = d.iter().zip(&self.maxw).map(|(d, m)| scale[axis] * m * d).collect();
        });
        out
    }

    pub fn apply(&self, g: &ReducedDensity) -> Vec<f64> {
        assert_eq!(g.grid.dims(), self.grid.dims(), "density and operator grids differ");
        let div = reduced_divergence(&self.fluxes(g), &self.grid);
        div.into_iter().map(|x| self.coef * x).collect()
    }

    /// Grid inner product of the rate with g / M; never positive.
    pub fn dissipation(&self, g: &ReducedDensity) -> f64 {
        let q = self.apply(g);
        let h: Vec<f64> = g.data.iter().zip(&self.maxw).map(|(g, m)| g / m).collect();
        self.grid.inner(&q, &h)
    }
}

pub fn apply_qfp_avg(g: &ReducedDensity, params: &PlasmaParams) -> Vec<f64> {
    FokkerPlanckOperator::new(&g.grid, params).apply(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{from_invariants, Gyrophase, InvariantCoords};
    use crate::grid::{gradient_from_invariant, GridSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: [usize; 5]) -> ReducedGrid {
        ReducedGrid::new(GridSpec {
            length_y: 10.0,
            length_x3: 2.0,
            r_max: 6.0,
            v_max: 6.0,
            n,
        })
        .unwrap()
    }

    #[test]
    fn l_matrix_examples() {
        let mut xi = [0.0; 6];
        xi[0] = 1.0;
        assert_eq!(l_quadratic_form(&xi), 2.0);
        let mut xi = [0.0; 6];
        xi[2] = 1.0;
        assert_eq!(l_quadratic_form(&xi), 0.0);
        let l = l_matrix();
        for k in 0..6 {
            assert_eq!(l[2][k], 0.0);
            assert_eq!(l[k][2], 0.0);
        }
    }

    #[test]
    fn l_matrix_spectrum() {
        let l = l_matrix();
        let m = nalgebra::SMatrix::<f64, 6, 6>::from_fn(|i, j| 0.5 * (l[i][j] + l[j][i]));
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(ev[0].abs() < 1e-14, "{ev:?}");
        // Only the x3 direction is null.
        assert!(ev[1] > 0.3, "{ev:?}");
        let s5 = 5f64.sqrt();
        let expected = [0.0, (3.0 - s5) / 2.0, (3.0 - s5) / 2.0, 1.0, (3.0 + s5) / 2.0, (3.0 + s5) / 2.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn flux_contractions_match_full_coordinates() {
        // L applied to the chain-rule gradient and contracted with grad psi_i
        // gives the invariant fluxes used by the operator.
        let w = 1.7;
        let d = [0.3, -0.8, 0.45, 1.1, -0.6];
        let inv = InvariantCoords {
            y: [0.2, 0.5],
            x3: 0.0,
            r: 1.3,
            v3: 0.4,
        };
        for &alpha in &[0.0, 0.9, 2.5, 5.0] {
            let p = from_invariants(&inv, Gyrophase::new(alpha), w).unwrap();
            let grad = gradient_from_invariant(d, &p, w);
            let l = l_matrix();
            let flux: Vec<f64> = (0..6).map(|i| (0..6).map(|j| l[i][j] * grad[j]).sum()).collect();
            for (i, expected) in [d[0] / (w * w), d[1] / (w * w), 0.0, d[3], d[4]].iter().enumerate() {
                let gp = crate::geometry::grad_psi(i + 1, &p, w).unwrap();
                // grad_psi is with respect to (x, v); position slots go to omega_c x units.
                let c: f64 = (0..3).map(|k| flux[k] * gp[k] / w).sum::<f64>() + (3..6).map(|k| flux[k] * gp[k]).sum::<f64>();
                assert!((c - expected).abs() < 1e-13, "i = {i}: {c} vs {expected}");
            }
        }
    }

    #[test]
    fn maxwellian_equilibrium_and_mass() {
        let g0 = grid([6, 5, 2, 8, 9]);
        let params = PlasmaParams::default();
        let op = FokkerPlanckOperator::new(&g0, &params);
        let m = ReducedDensity::maxwellian(&g0, &params, 3.0);
        assert!(op.apply(&m).iter().all(|&x| x.abs() <= 1e-12 * 3.0));
        let g = ReducedDensity::from_fn(&g0, |p| {
            maxwellian_rv(p.r, p.v3, &params) * (1.0 + 0.3 * (2.0 * PI * p.y[0] / 10.0).cos()) * (-(p.r - 1.0).powi(2)).exp()
        });
        let q = op.apply(&g);
        let scale = g0.integrate(&q.iter().map(|x| x.abs()).collect::<Vec<_>>());
        assert!(g0.integrate(&q).abs() < 1e-13 * scale);
    }

    #[test]
    fn no_x3_transport() {
        let g0 = grid([4, 4, 3, 6, 7]);
        let params = PlasmaParams::default();
        let op = FokkerPlanckOperator::new(&g0, &params);
        let g = ReducedDensity::from_fn(&g0, |p| maxwellian_rv(p.r, p.v3, &params) * (1.0 + 0.2 * p.y[1].sin()) * (1.0 + 0.1 * p.r));
        let mut h = g.clone();
        let factor = [1.0, 2.5, 0.3];
        for f in 0..g0.len() {
            h.data[f] *= factor[g0.unindex(f)[2]];
        }
        let a = op.apply(&g);
        let b = op.apply(&h);
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for f in 0..g0.len() {
            let k = factor[g0.unindex(f)[2]];
            assert!((b[f] - k * a[f]).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn second_order_on_manufactured_profile() {
        // h = 1 + eps cos(k y1) (1 + r^2/4) v3; analytic rate from the
        // continuous reduced operator.
        let params = PlasmaParams::new(1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let wc = params.omega_c();
        let eps = 0.2;
        let kk = 2.0 * PI / 10.0;
        let rate = |p: &InvariantCoords| {
            let m = maxwellian_rv(p.r, p.v3, &params);
            let (y, r, v) = (p.y[0], p.r, p.v3);
            let s = 1.0 + r * r / 4.0;
            // (1/wc^2) d/dy (M dh/dy)
            let yy = -eps * kk * kk * (kk * y).cos() * s * v * m / (wc * wc);
            // (1/r) d/dr (r M dh/dr), dh/dr = eps cos r v / 2, dM/dr = -r M
            let c = eps * (kk * y).cos() * v / 2.0;
            let rr = (c * (2.0 * r * m - r * r * r * m)) / r;
            // d/dv (M dh/dv), dh/dv = eps cos s
            let vv = -v * m * eps * (kk * y).cos() * s;
            yy + rr + vv
        };
        let err = |n: usize| {
            let g0 = grid([n, 1, 1, n, n]);
            let op = FokkerPlanckOperator::new(&g0, &params);
            let g = ReducedDensity::from_fn(&g0, |p| {
                maxwellian_rv(p.r, p.v3, &params) * (1.0 + eps * (kk * p.y[0]).cos() * (1.0 + p.r * p.r / 4.0) * p.v3)
            });
            let q = op.apply(&g);
            let mut e = 0.0f64;
            for f in 0..g0.len() {
                let i = g0.unindex(f);
                let p = g0.point(i);
                if p.r > 0.5 && p.r < 4.0 && p.v3.abs() < 4.0 {
                    e = e.max((q[f] - rate(&p)).abs());
                }
            }
            e
        };
        let ratio = err(24) / err(48);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn dissipative(seed in 0u64..10_000) {
            use rand::{Rng, SeedableRng};
            let g0 = grid([4, 4, 1, 6, 7]);
            let params = PlasmaParams::default();
            let op = FokkerPlanckOperator::new(&g0, &params);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut g = ReducedDensity::maxwellian(&g0, &params, 1.0);
            for x in g.data.iter_mut() {
                *x *= rng.gen_range(0.1..2.0);
            }
            prop_assert!(op.dissipation(&g) <= 0.0);
        }
    }
}
