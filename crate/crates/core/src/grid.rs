//! Tensor grids in reduced guiding-center coordinates (y1, y2, x3, r, v3),
//! reduced densities, difference stencils and periodic interpolation in y.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{from_invariants, Gyrophase, InvariantCoords, PhasePoint, Vec6};
use crate::gyroaverage::{gyroaverage_scalar, GyroQuadratureConfig};
use crate::physics::{maxwellian_rv, PlasmaParams};

pub const AXIS_NAMES: [&str; 5] = ["y1", "y2", "x3", "r", "v3"];

/// Grid extents and resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Period of the square y box [0, L)^2.
    pub length_y: f64,
    /// Period of the x3 axis.
    pub length_x3: f64,
    pub r_max: f64,
    /// The v3 box is [-v_max, v_max].
    pub v_max: f64,
    /// Node counts in the order (y1, y2, x3, r, v3).
    pub n: [usize; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGrid {
    spec: GridSpec,
    steps: [f64; 5],
    coords: [Vec<f64>; 5],
    r_weights: Vec<f64>,
    strides: [usize; 5],
    len: usize,
}

impl ReducedGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        for (k, &name) in AXIS_NAMES.iter().enumerate() {
            if spec.n[k] == 0 {
                return Err(invalid(format!("grid.n.{name}"), "must be >= 1"));
            }
        }
        if spec.n[3] < 3 {
            return Err(invalid("grid.n.r", "must be >= 3"));
        }
        if spec.n[4] < 3 {
            return Err(invalid("grid.n.v3", "must be >= 3"));
        }
        for (name, v) in [
            ("grid.length_y", spec.length_y),
            ("grid.length_x3", spec.length_x3),
            ("grid.r_max", spec.r_max),
            ("grid.v_max", spec.v_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        let n = spec.n;
        let steps = [
            spec.length_y / n[0] as f64,
            spec.length_y / n[1] as f64,
            spec.length_x3 / n[2] as f64,
            spec.r_max / n[3] as f64,
            2.0 * spec.v_max / n[4] as f64,
        ];
        let coords: [Vec<f64>; 5] = [
            (0..n[0]).map(|i| i as f64 * steps[0]).collect(),
            (0..n[1]).map(|i| i as f64 * steps[1]).collect(),
            (0..n[2]).map(|i| i as f64 * steps[2]).collect(),
            (0..n[3]).map(|i| (i as f64 + 0.5) * steps[3]).collect(),
            (0..n[4]).map(|i| -spec.v_max + (i as f64 + 0.5) * steps[4]).collect(),
        ];
        let h = steps[3];
        let mut r_weights: Vec<f64> = coords[3].iter().map(|r: &f64| h * r).collect();
        // Midpoint r dr leaves an h^2 f(0) / 24 error at the axis; remove it
        // with f(0) ~ (9 f(r0) - f(r1)) / 8 for smooth even f.
        r_weights[0] -= 9.0 * h * h / 192.0;
        r_weights[1] += h * h / 192.0;
        let mut strides = [1usize; 5];
        for k in (0..4).rev() {
            strides[k] = strides[k + 1] * n[k + 1];
        }
        Ok(ReducedGrid {
            spec,
            steps,
            coords,
            r_weights,
            strides,
            len: n.iter().product(),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dims(&self) -> [usize; 5] {
        self.spec.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.steps[axis]
    }

    pub fn coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Quadrature weights for the r dr integral at the r nodes.
    pub fn r_weights(&self) -> &[f64] {
        &self.r_weights
    }

    #[inline]
    pub fn index(&self, i: [usize; 5]) -> usize {
        i[0] * self.strides[0] + i[1] * self.strides[1] + i[2] * self.strides[2] + i[3] * self.strides[3] + i[4]
    }

    #[inline]
    pub fn unindex(&self, mut flat: usize) -> [usize; 5] {
        let mut out = [0; 5];
        for k in 0..5 {
            out[k] = flat / self.strides[k];
            flat %= self.strides[k];
        }
        out
    }

    pub fn point(&self, i: [usize; 5]) -> InvariantCoords {
        InvariantCoords {
            y: [self.coords[0][i[0]], self.coords[1][i[1]]],
            x3: self.coords[2][i[2]],
            r: self.coords[3][i[3]],
            v3: self.coords[4][i[4]],
        }
    }

    /// Measure of the cell around node i for 2 pi r dr dv3 dy dx3.
    #[inline]
    pub fn cell_measure(&self, i: [usize; 5]) -> f64 {
        2.0 * PI * self.r_weights[i[3]] * self.steps[4] * self.steps[0] * self.steps[1] * self.steps[2]
    }

    /// Cell measures for every node, in storage order.
    pub fn measures(&self) -> Vec<f64> {
        (0..self.len).map(|f| self.cell_measure(self.unindex(f))).collect()
    }

    /// Grid inner product sum W a b.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let w = self.measures();
        w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn integrate(&self, a: &[f64]) -> f64 {
        let w = self.measures();
        w.iter().zip(a).map(|(w, a)| w * a).sum()
    }
}

/// A sampled density on a reduced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    pub grid: ReducedGrid,
    pub data: Vec<f64>,
}

impl ReducedDensity {
    pub fn zeros(grid: &ReducedGrid) -> Self {
        ReducedDensity {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &ReducedGrid, f: impl Fn(&InvariantCoords) -> f64) -> Self {
        let data = (0..grid.len()).map(|k| f(&grid.point(grid.unindex(k)))).collect();
        ReducedDensity {
            grid: grid.clone(),
            data,
        }
    }

    /// The global Maxwellian times a constant.
    pub fn maxwellian(grid: &ReducedGrid, params: &PlasmaParams, scale: f64) -> Self {
        ReducedDensity::from_fn(grid, |p| scale * maxwellian_rv(p.r, p.v3, params))
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Difference stencil families along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilKind {
    Periodic,
    /// Cell-centered radius: even reflection at the axis, one-sided at the outer end.
    Radial,
    /// One-sided second order at both ends.
    Bounded,
}

pub const AXIS_STENCILS: [StencilKind; 5] = [
    StencilKind::Periodic,
    StencilKind::Periodic,
    StencilKind::Periodic,
    StencilKind::Radial,
    StencilKind::Bounded,
];

/// Row j of the first-derivative matrix along an axis of n nodes with step h.
/// Returns up to three (column, coefficient) pairs.
#[inline]
pub fn stencil_row(kind: StencilKind, n: usize, j: usize, h: f64) -> ([(usize, f64); 3], usize) {
    let c = 0.5 / h;
    let z = (0usize, 0.0f64);
    match kind {
        StencilKind::Periodic => {
            if n < 3 {
                return ([z; 3], 0);
            }
            let jp = if j + 1 == n { 0 } else { j + 1 };
            let jm = if j == 0 { n - 1 } else { j - 1 };
            ([(jp, c), (jm, -c), z], 2)
        }
        StencilKind::Radial => {
            if j == 0 {
                ([(1, c), (0, -c), z], 2)
            } else if j + 1 == n {
                ([(j, 3.0 * c), (j - 1, -4.0 * c), (j - 2, c)], 3)
            } else {
                ([(j + 1, c), (j - 1, -c), z], 2)
            }
        }
        StencilKind::Bounded => {
            if j == 0 {
                ([(0, -3.0 * c), (1, 4.0 * c), (2, -c)], 3)
            } else if j + 1 == n {
                ([(j, 3.0 * c), (j - 1, -4.0 * c), (j - 2, c)], 3)
            } else {
                ([(j + 1, c), (j - 1, -c), z], 2)
            }
        }
    }
}

impl ReducedGrid {
    /// Partial derivative of `data` along `axis` at node `i`.
    #[inline]
    pub fn derivative_at(&self, data: &[f64], axis: usize, i: [usize; 5]) -> f64 {
        let n = self.spec.n[axis];
        let (row, len) = stencil_row(AXIS_STENCILS[axis], n, i[axis], self.steps[axis]);
        let base = self.index(i) - i[axis] * self.strides[axis];
        row[..len]
            .iter()
            .map(|&(k, c)| c * data[base + k * self.strides[axis]])
            .sum()
    }

    /// The difference matrix along `axis` applied to the whole field.
    pub fn derivative(&self, data: &[f64], axis: usize) -> Vec<f64> {
        (0..self.len)
            .map(|f| self.derivative_at(data, axis, self.unindex(f)))
            .collect()
    }

    /// The transpose of the difference matrix along `axis`.
    pub fn derivative_transpose(&self, data: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        let n = self.spec.n[axis];
        let s = self.strides[axis];
        for f in 0..self.len {
            let i = self.unindex(f);
            let (row, len) = stencil_row(AXIS_STENCILS[axis], n, i[axis], self.steps[axis]);
            let base = f - i[axis] * s;
            for &(k, c) in &row[..len] {
                out[base + k * s] += c * data[f];
            }
        }
        out
    }
}

/// Partial derivatives with respect to (y1, y2, x3, r, v3) at a node.
pub fn invariant_gradient(g: &ReducedDensity, i: [usize; 5]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (axis, o) in out.iter_mut().enumerate() {
        *o = g.grid.derivative_at(&g.data, axis, i);
    }
    out
}

/// Gradient with respect to (omega_c x, v) at the full-coordinate point with
/// gyrophase alpha over node i, built from the invariant derivatives.
pub fn full_gradient(g: &ReducedDensity, i: [usize; 5], alpha: f64, omega_c: f64) -> Result<Vec6> {
    let d = invariant_gradient(g, i);
    let inv = g.grid.point(i);
    let p = from_invariants(&inv, Gyrophase::new(alpha), omega_c)?;
    Ok(gradient_from_invariant(d, &p, omega_c))
}

/// Chain rule for a constrained function with invariant derivatives d.
pub fn gradient_from_invariant(d: [f64; 5], p: &PhasePoint, omega_c: f64) -> Vec6 {
    let a = [d[0] / omega_c, d[1] / omega_c];
    let r = p.v_perp[0].hypot(p.v_perp[1]);
    let (c, s) = if r > 0.0 {
        (p.v_perp[0] / r, p.v_perp[1] / r)
    } else {
        (0.0, 0.0)
    };
    [a[0], a[1], d[2] / omega_c, -a[1] + d[3] * c, a[0] + d[3] * s, d[4]]
}

/// Divergence for per-node flux contractions (Phi . grad psi_i), i = 1..5,
/// defined as the negative adjoint of the difference gradient under the
/// grid measure. For Phi_r = r it returns 2 away from the axis.
pub fn reduced_divergence(flux: &[Vec<f64>; 5], grid: &ReducedGrid) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for (axis, comp) in flux.iter().enumerate() {
        if axis == 3 {
            let weighted: Vec<f64> = (0..grid.len())
                .map(|f| comp[f] * grid.r_weights[grid.unindex(f)[3]])
                .collect();
            let t = grid.derivative_transpose(&weighted, axis);
            for f in 0..grid.len() {
                out[f] -= t[f] / grid.r_weights[grid.unindex(f)[3]];
            }
        } else {
            let t = grid.derivative_transpose(comp, axis);
            for (o, x) in out.iter_mut().zip(&t) {
                *o -= x;
            }
        }
    }
    out
}

/// Samples the gyroaverage of a full-coordinate function on the grid.
pub fn project_initial<F>(f_full: &F, grid: &ReducedGrid, omega_c: f64, cfg: &GyroQuadratureConfig) -> Result<ReducedDensity>
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let mut data = Vec::with_capacity(grid.len());
    for f in 0..grid.len() {
        let inv = grid.point(grid.unindex(f));
        let p = from_invariants(&inv, Gyrophase::new(0.0), omega_c)?;
        data.push(gyroaverage_scalar(f_full, &p, omega_c, cfg)?);
    }
    Ok(ReducedDensity {
        grid: grid.clone(),
        data,
    })
}

/// Periodic interpolation order in the y plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Positivity preserving.
    #[default]
    Bilinear,
    /// Four-point Lagrange per axis.
    Cubic,
}

/// One-dimensional periodic interpolation weights for a shift of `s` cells:
/// value at (i + s) = sum_k w_k g[i + o_k].
pub fn shift_weights(s: f64, kind: Interpolation) -> Vec<(isize, f64)> {
    let base = s.floor();
    let t = s - base;
    let b = base as isize;
    match kind {
        Interpolation::Bilinear => vec![(b, 1.0 - t), (b + 1, t)],
        Interpolation::Cubic => {
            let w_m1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
            let w_0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
            let w_1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
            let w_2 = (t + 1.0) * t * (t - 1.0) / 6.0;
            vec![(b - 1, w_m1), (b, w_0), (b + 1, w_1), (b + 2, w_2)]
        }
    }
}

/// Tensor-product taps (dy1, dy2, weight) for a shift of (s1, s2) cells,
/// with zero weights dropped.
pub fn shift_taps(s: [f64; 2], kind: Interpolation) -> Vec<(isize, isize, f64)> {
    let a = shift_weights(s[0], kind);
    let b = shift_weights(s[1], kind);
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &(o1, w1) in &a {
        for &(o2, w2) in &b {
            let w = w1 * w2;
            if w != 0.0 {
                out.push((o1, o2, w));
            }
        }
    }
    out
}

#[inline]
pub fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Two-dimensional FFT over the (y1, y2) plane, stored y1-major.
#[derive(Clone)]
pub struct PlaneFft {
    n: [usize; 2],
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
}

impl std::fmt::Debug for PlaneFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlaneFft").field("n", &self.n).finish()
    }
}

impl PlaneFft {
    pub fn new(n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::new();
        PlaneFft {
            n: [n1, n2],
            fwd: [planner.plan_fft_forward(n1), planner.plan_fft_forward(n2)],
            inv: [planner.plan_fft_inverse(n1), planner.plan_fft_inverse(n2)],
        }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 2]) {
        let [n1, n2] = self.n;
        for row in data.chunks_exact_mut(n2) {
            plans[1].process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n1];
        for j in 0..n2 {
            for i in 0..n1 {
                col[i] = data[i * n2 + j];
            }
            plans[0].process(&mut col);
            for i in 0..n1 {
                data[i * n2 + j] = col[i];
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Inverse transform including the 1/N factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
        let s = 1.0 / self.len() as f64;
        for x in data.iter_mut() {
            *x *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(n: [usize; 5]) -> ReducedGrid {
        ReducedGrid::new(GridSpec {
            length_y: 8.0,
            length_x3: 2.0,
            r_max: 5.0,
            v_max: 5.0,
            n,
        })
        .unwrap()
    }

    #[test]
    fn constant_and_linear_gradients() {
        let g0 = grid([6, 5, 3, 6, 7]);
        let c = ReducedDensity::from_fn(&g0, |_| 2.0);
        let lin = ReducedDensity::from_fn(&g0, |p| p.y[0]);
        let i = [2, 1, 1, 3, 3];
        assert_eq!(invariant_gradient(&c, i), [0.0; 5]);
        assert_abs_diff_eq!(invariant_gradient(&lin, i)[0], 1.0, epsilon = 1e-14);
        let v = ReducedDensity::from_fn(&g0, |p| 3.0 * p.v3 - 1.0);
        for k in 0..7 {
            assert_abs_diff_eq!(invariant_gradient(&v, [0, 0, 0, 0, k])[4], 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn periodic_gradient_converges_at_second_order() {
        let err = |n: usize| {
            let g0 = grid([n, 1, 1, 3, 3]);
            let l = g0.spec().length_y;
            let g = ReducedDensity::from_fn(&g0, |p| (2.0 * PI * p.y[0] / l).sin());
            (0..n)
                .map(|i| {
                    let y = g0.coords(0)[i];
                    let exact = 2.0 * PI / l * (2.0 * PI * y / l).cos();
                    (invariant_gradient(&g, [i, 0, 0, 1, 1])[0] - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(16) / err(32);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn radial_and_bounded_stencils_converge() {
        let err = |n: usize| {
            let g0 = grid([1, 1, 1, n, n]);
            let g = ReducedDensity::from_fn(&g0, |p| (-(p.r * p.r) / 2.0).exp() * (0.3 * p.v3).sin());
            let mut e = 0.0f64;
            for ir in 0..n {
                for iv in 0..n {
                    let p = g0.point([0, 0, 0, ir, iv]);
                    let d = invariant_gradient(&g, [0, 0, 0, ir, iv]);
                    let dr = -p.r * (-(p.r * p.r) / 2.0).exp() * (0.3 * p.v3).sin();
                    let dv = (-(p.r * p.r) / 2.0).exp() * 0.3 * (0.3 * p.v3).cos();
                    // The axis row is first order, so compare interior-to-axis separately.
                    if ir > 0 {
                        e = e.max((d[3] - dr).abs());
                    }
                    e = e.max((d[4] - dv).abs());
                }
            }
            e
        };
        let ratio = err(20) / err(40);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn full_gradient_examples() {
        let g0 = grid([4, 4, 1, 6, 5]);
        let w = 1.7;
        let g = ReducedDensity::from_fn(&g0, |p| 0.5 * p.r * p.r);
        let i = [1, 2, 0, 3, 2];
        // The stencil is exact for quadratics in the interior.
        for &alpha in &[0.0, 1.1, 4.0] {
            let grad = full_gradient(&g, i, alpha, w).unwrap();
            let p = from_invariants(&g0.point(i), Gyrophase::new(alpha), w).unwrap();
            assert_abs_diff_eq!(grad[3], p.v_perp[0], epsilon = 1e-13);
            assert_abs_diff_eq!(grad[4], p.v_perp[1], epsilon = 1e-13);
            assert_eq!(grad[5], 0.0);
            assert_abs_diff_eq!(grad[0], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(grad[1], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn full_gradient_matches_chain_rule_numerically() {
        // Compare with a finite difference of the lifted analytic function.
        let w = -1.3;
        let f = |p: &InvariantCoords| (0.4 * p.y[0]).sin() * (0.3 * p.y[1]).cos() * (-(p.r * p.r) / 2.0).exp() * (1.0 + 0.1 * p.v3);
        let lifted = crate::gyroaverage::constrained(f, w);
        let d = {
            let p = InvariantCoords {
                y: [0.7, -0.4],
                x3: 0.0,
                r: 1.2,
                v3: 0.3,
            };
            let h = 1e-6;
            let mut out = [0.0; 5];
            for k in 0..5 {
                let mut a = p;
                let mut b = p;
                match k {
                    0 => {
                        a.y[0] += h;
                        b.y[0] -= h
                    }
                    1 => {
                        a.y[1] += h;
                        b.y[1] -= h
                    }
                    2 => {
                        a.x3 += h;
                        b.x3 -= h
                    }
                    3 => {
                        a.r += h;
                        b.r -= h
                    }
                    _ => {
                        a.v3 += h;
                        b.v3 -= h
                    }
                }
                out[k] = (f(&a) - f(&b)) / (2.0 * h);
            }
            (p, out)
        };
        let (inv, dd) = d;
        let pt = from_invariants(&inv, Gyrophase::new(0.9), w).unwrap();
        let grad = gradient_from_invariant(dd, &pt, w);
        let arr = pt.to_array();
        let h = 1e-6;
        for k in 0..6 {
            let mut a = arr;
            let mut b = arr;
            a[k] += h;
            b[k] -= h;
            let mut fd = (lifted(&PhasePoint::from_array(a)) - lifted(&PhasePoint::from_array(b))) / (2.0 * h);
            if k < 3 {
                fd /= w; // position slots in omega_c x units
            }
            assert_abs_diff_eq!(fd, grad[k], epsilon = 1e-8);
        }
    }

    #[test]
    fn divergence_examples() {
        let g0 = grid([3, 3, 1, 10, 4]);
        let zero: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; g0.len()]);
        assert!(reduced_divergence(&zero, &g0).iter().all(|&x| x == 0.0));
        let mut radial: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; g0.len()]);
        radial[3] = (0..g0.len()).map(|f| g0.point(g0.unindex(f)).r).collect();
        let div = reduced_divergence(&radial, &g0);
        // Nodes clear of the corrected axis weights and the outer one-sided rows.
        for f in 0..g0.len() {
            let i = g0.unindex(f);
            if (3..=6).contains(&i[3]) {
                assert_abs_diff_eq!(div[f], 2.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn divergence_is_adjoint_to_gradient() {
        let g0 = grid([6, 5, 2, 8, 9]);
        let h = ReducedDensity::from_fn(&g0, |p| (0.3 * p.y[0]).sin() + p.r * p.r * p.v3 + (PI * p.x3).cos());
        let flux: [Vec<f64>; 5] = std::array::from_fn(|k| {
            (0..g0.len())
                .map(|f| {
                    let p = g0.point(g0.unindex(f));
                    (k as f64 + 1.0) * (p.y[1] * 0.2).cos() * (-(p.r * p.r + p.v3 * p.v3) / 4.0).exp()
                })
                .collect()
        });
        let div = reduced_divergence(&flux, &g0);
        let lhs = g0.inner(&div, &h.data);
        let mut rhs = 0.0;
        for (axis, comp) in flux.iter().enumerate() {
            let d = g0.derivative(&h.data, axis);
            rhs += g0.inner(comp, &d);
        }
        assert_abs_diff_eq!(lhs, -rhs, epsilon = 1e-12 * rhs.abs().max(1.0));
        // Discrete conservation: the divergence integrates to zero.
        let scale = g0.integrate(&div.iter().map(|x| x.abs()).collect::<Vec<_>>());
        assert!(g0.integrate(&div).abs() < 1e-13 * scale, "{}", g0.integrate(&div));
    }

    #[test]
    fn radial_weights_are_fourth_order() {
        let err = |n: usize| {
            let g0 = grid([1, 1, 1, n, 3]);
            let s: f64 = g0
                .coords(3)
                .iter()
                .zip(g0.r_weights())
                .map(|(r, w)| w * (-(r * r)).exp() * (1.0 + r * r))
                .sum();
            // int_0^inf r e^{-r^2}(1 + r^2) dr = 1/2 + 1/2
            (s - 1.0).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 12.0, "{ratio}");
    }

    #[test]
    fn project_initial_examples() {
        let g0 = grid([4, 4, 1, 5, 5]);
        let w = 1.0;
        let cfg = GyroQuadratureConfig::new(16).unwrap();
        let f = crate::gyroaverage::constrained(|p: &InvariantCoords| (-(p.r * p.r)).exp() * (0.2 * p.y[0]).cos(), w);
        let g = project_initial(&f, &g0, w, &cfg).unwrap();
        let direct = ReducedDensity::from_fn(&g0, |p| (-(p.r * p.r)).exp() * (0.2 * p.y[0]).cos());
        for (a, b) in g.data.iter().zip(&direct.data) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        let odd = |p: &PhasePoint| p.v_perp[0] * (-(p.v_perp[0].powi(2) + p.v_perp[1].powi(2))).exp();
        let g = project_initial(&odd, &g0, w, &cfg).unwrap();
        assert!(g.max_abs() < 1e-14);
    }

    #[test]
    fn projection_preserves_mass() {
        // Full-coordinate mass by quadrature over (x, v) in a box versus the
        // reduced mass of the projection.
        let w = 1.0;
        let spec = GridSpec {
            length_y: 20.0,
            length_x3: 1.0,
            r_max: 7.0,
            v_max: 7.0,
            n: [48, 48, 1, 56, 28],
        };
        let g0 = ReducedGrid::new(spec).unwrap();
        let c = [10.0, 10.0];
        let f = |p: &PhasePoint| {
            let dx = p.x_perp[0] - c[0];
            let dy = p.x_perp[1] - c[1];
            (-(dx * dx + dy * dy) / 2.0 - (p.v_perp[0] - 0.3).powi(2) / 2.0 - p.v_perp[1].powi(2) / 2.0 - p.v3 * p.v3 / 2.0).exp()
        };
        let cfg = GyroQuadratureConfig::new(16).unwrap();
        let g = project_initial(&f, &g0, w, &cfg).unwrap();
        let exact = 2.0 * PI * (2.0 * PI).powf(1.5);
        assert!((g.mass() - exact).abs() < 1e-6 * exact, "{} vs {}", g.mass(), exact);
    }

    #[test]
    fn interpolation_weights() {
        for kind in [Interpolation::Bilinear, Interpolation::Cubic] {
            for &s in &[0.0, 0.25, -1.7, 3.5] {
                let w = shift_weights(s, kind);
                let sum: f64 = w.iter().map(|x| x.1).sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-15);
                let first: f64 = w.iter().map(|&(o, x)| x * o as f64).sum();
                assert_abs_diff_eq!(first, s, epsilon = 1e-14);
            }
        }
        let w = shift_weights(2.0, Interpolation::Cubic);
        assert_eq!(w.iter().find(|x| x.0 == 2).unwrap().1, 1.0);
    }

    #[test]
    fn spec_validation() {
        let mut s = *grid([4, 4, 1, 4, 4]).spec();
        s.r_max = -1.0;
        assert_eq!(ReducedGrid::new(s).unwrap_err().to_string(), "grid.r_max: must be > 0");
        let mut s2 = *grid([4, 4, 1, 4, 4]).spec();
        s2.n[4] = 2;
        assert!(ReducedGrid::new(s2).is_err());
    }

    #[test]
    fn plane_fft_round_trip() {
        let fft = PlaneFft::new(4, 3);
        let orig: Vec<Complex64> = (0..12).map(|k| Complex64::new(k as f64, -0.5 * k as f64)).collect();
        let mut x = orig.clone();
        fft.forward(&mut x);
        // DC term is the plain sum.
        assert_abs_diff_eq!(x[0].re, 66.0, epsilon = 1e-12);
        fft.inverse(&mut x);
        for (a, b) in x.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn index_round_trip(a in 0usize..5, b in 0usize..4, c in 0usize..2, d in 0usize..6, e in 0usize..7) {
            let g0 = grid([5, 4, 2, 6, 7]);
            let i = [a, b, c, d, e];
            prop_assert_eq!(g0.unindex(g0.index(i)), i);
        }

        #[test]
        fn cubic_interpolation_exact_for_cubics(s in -3.0f64..3.0, c in proptest::array::uniform4(-1.0f64..1.0)) {
            let poly = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let w = shift_weights(s, Interpolation::Cubic);
            let v: f64 = w.iter().map(|&(o, x)| x * poly(o as f64)).sum();
            prop_assert!((v - poly(s)).abs() < 1e-11);
        }
    }
}
