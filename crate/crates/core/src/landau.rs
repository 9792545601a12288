//! Averaged Fokker-Planck-Landau operator.
//!
//! Along the pair (n, n') with guiding-center offset z, the contraction of
//! each rank-one field xi^i with a constrained gradient depends only on
//! (r, r', v3 - v3', z) and the invariant derivatives at both ends:
//!
//! * i = 1: always 0 (xi^1 is tangent to the fast flow)
//! * i = 2: perp(z^) . (a - a')
//! * i = 3: -sin(phi) (r' b - r b') / |z|
//! * i = 4: [-(r' cos(phi) - r) b - (r cos(phi) - r') b'] u / (|z| D)
//!   + [u z^ . (a - a') - |z| (c - c')] / D
//!
//! with a = (d/dy) / omega_c, b = d/dr, c = d/dv3, u = v3 - v3' and
//! D = sqrt(|z|^2 + u^2). Both the flux factor and the test factor are
//! pre-multiplied by sqrt(sigma chi), which is moved into the quadrature.
//!
//! The discrete operator is the exact adjoint of the discrete weak form
//! B(g, phi) = -(1/2) sum W K s(g) s(phi): unprimed derivatives are grid
//! differences at the node, primed ones are interpolated difference fields.
//! Every test function with vanishing contractions is therefore conserved
//! to roundoff.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{perp, InvariantCoords};
use crate::grid::{shift_taps, wrap, Interpolation, ReducedDensity, ReducedGrid};
use crate::kernels::chi_quadrature;
use crate::physics::{CrossSection, PlasmaParams};

/// How the flux factor of each pair is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// g g' s(ln g) with discrete differences of ln g: the discrete entropy
    /// production is then an exact negative sum of squares.
    #[default]
    Logarithmic,
    /// g' s_unprimed(g) + g s_primed(g): linear in each argument.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FplConfig {
    pub n_phi: usize,
    pub n_alpha: usize,
    pub interpolation: Interpolation,
    pub cross_section: CrossSection,
    pub gradient_mode: GradientMode,
    /// Values below floor * max(g) are clamped before taking logarithms.
    pub floor: f64,
}

impl FplConfig {
    pub fn new(cross_section: CrossSection) -> Self {
        FplConfig {
            n_phi: 12,
            n_alpha: 16,
            interpolation: Interpolation::Bilinear,
            cross_section,
            gradient_mode: GradientMode::Logarithmic,
            floor: 1e-300,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_phi < 2 {
            return Err(invalid("quadrature.n_phi", "must be >= 2"));
        }
        if self.n_alpha < 4 || self.n_alpha % 2 != 0 {
            return Err(invalid("quadrature.n_alpha", "must be even and >= 4"));
        }
        if !(self.floor >= 0.0 && self.floor < 1.0) {
            return Err(invalid("landau.floor", "must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Derivative components used by the contractions, as grid axes.
const COMPONENT_AXES: [usize; 4] = [0, 1, 3, 4];

#[derive(Debug, Clone)]
struct ZNode {
    zhat: [f64; 2],
    l: f64,
    cos_phi: f64,
    sin_phi: f64,
    weight: f64,
    /// Wrapped plane offsets of the interpolation taps at y - z / omega_c.
    taps: Vec<(usize, usize, f64)>,
    /// Exact shift -z / omega_c.
    shift: [f64; 2],
}

/// Contraction coefficients of fields 2..4 against (a1, a2, b, c) at the
/// node (alpha) and at the partner (beta), derivatives taken in y directly.
#[derive(Debug, Clone, Copy)]
pub struct PairCoefficients {
    pub alpha: [[f64; 4]; 3],
    pub beta: [[f64; 4]; 3],
}

/// Coefficients for radii (r, r'), parallel offset u and offset direction.
pub fn pair_coefficients(r: f64, r_p: f64, u: f64, l: f64, zhat: [f64; 2], cos_phi: f64, sin_phi: f64, omega_c: f64) -> PairCoefficients {
    let d = l.hypot(u);
    let p = perp(zhat);
    let iw = 1.0 / omega_c;
    let a2 = [p[0] * iw, p[1] * iw, 0.0, 0.0];
    let b2 = [-p[0] * iw, -p[1] * iw, 0.0, 0.0];
    let a3 = [0.0, 0.0, -sin_phi * r_p / l, 0.0];
    let b3 = [0.0, 0.0, sin_phi * r / l, 0.0];
    let a4 = [
        u * zhat[0] * iw / d,
        u * zhat[1] * iw / d,
        -(r_p * cos_phi - r) * u / (l * d),
        -l / d,
    ];
    let b4 = [
        -u * zhat[0] * iw / d,
        -u * zhat[1] * iw / d,
        -(r * cos_phi - r_p) * u / (l * d),
        l / d,
    ];
    PairCoefficients {
        alpha: [a2, a3, a4],
        beta: [b2, b3, b4],
    }
}

#[inline]
fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Plane-major inputs of one flux evaluation.
struct FluxInputs {
    /// Scalar read at the partner.
    x: Vec<f64>,
    /// Scalar read at the node.
    y: Vec<f64>,
    /// Derivative fields contracted at the node.
    u: [Vec<f64>; 4],
    /// Derivative fields interpolated at the partner.
    v: [Vec<f64>; 4],
    /// Logarithmic mode: both terms carry the product x' y.
    product: bool,
}

#[derive(Debug, Clone)]
pub struct LandauOperator {
    grid: ReducedGrid,
    cfg: FplConfig,
    omega_c: f64,
    /// Per (ir, jr) pair.
    rules: Vec<Vec<ZNode>>,
    chunks: usize,
}

impl LandauOperator {
    pub fn new(grid: &ReducedGrid, params: &PlasmaParams, cfg: &FplConfig) -> Result<Self> {
        cfg.validate()?;
        let [n1, n2, _, n_r, _] = grid.dims();
        let wc = params.omega_c();
        let dy = [grid.step(0), grid.step(1)];
        let rs = grid.coords(3).to_vec();
        let rules = (0..n_r * n_r)
            .into_par_iter()
            .map(|k| -> Result<Vec<ZNode>> {
                let (ir, jr) = (k / n_r, k % n_r);
                let cq = chi_quadrature(rs[ir], rs[jr], cfg.n_phi, cfg.n_alpha)?;
                Ok(cq
                    .nodes
                    .iter()
                    .map(|n| {
                        let shift = [-n.z[0] / wc, -n.z[1] / wc];
                        let taps = shift_taps([shift[0] / dy[0], shift[1] / dy[1]], cfg.interpolation)
                            .into_iter()
                            .map(|(o1, o2, w)| (wrap(o1, n1), wrap(o2, n2), w))
                            .collect();
                        ZNode {
                            zhat: [n.z[0] / n.z_norm, n.z[1] / n.z_norm],
                            l: n.z_norm,
                            cos_phi: n.cos_phi,
                            sin_phi: n.sin_phi,
                            weight: n.weight,
                            taps,
                            shift,
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let [_, _, _, n_r, n_v] = grid.dims();
        Ok(LandauOperator {
            grid: grid.clone(),
            cfg: *cfg,
            omega_c: wc,
            rules,
            chunks: (n_r * n_v).min(16),
        })
    }

    pub fn grid(&self) -> &ReducedGrid {
        &self.grid
    }

    pub fn config(&self) -> &FplConfig {
        &self.cfg
    }

    /// Reorders grid data to [x3, r, v3, y1, y2].
    fn to_planes(&self, data: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let [n1, n2, n3, n_r, n_v] = g.dims();
        let mut out = vec![0.0; data.len()];
        let ny = n1 * n2;
        for k3 in 0..n3 {
            for ir in 0..n_r {
                for iv in 0..n_v {
                    let base = ((k3 * n_r + ir) * n_v + iv) * ny;
                    for i1 in 0..n1 {
                        for i2 in 0..n2 {
                            out[base + i1 * n2 + i2] = data[g.index([i1, i2, k3, ir, iv])];
                        }
                    }
                }
            }
        }
        out
    }

    fn from_planes(&self, planes: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let [n1, n2, n3, n_r, n_v] = g.dims();
        let mut out = vec![0.0; planes.len()];
        let ny = n1 * n2;
        for k3 in 0..n3 {
            for ir in 0..n_r {
                for iv in 0..n_v {
                    let base = ((k3 * n_r + ir) * n_v + iv) * ny;
                    for i1 in 0..n1 {
                        for i2 in 0..n2 {
                            out[g.index([i1, i2, k3, ir, iv])] = planes[base + i1 * n2 + i2];
                        }
                    }
                }
            }
        }
        out
    }

    fn derivative_planes(&self, data: &[f64]) -> [Vec<f64>; 4] {
        let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::new());
        out.par_iter_mut().enumerate().for_each(|(c, o)| {
            *o = self.to_planes(&self.grid.derivative(data, COMPONENT_AXES[c]));
        });
        out
    }

    fn log_values(&self, g: &ReducedDensity) -> Vec<f64> {
        let floor = self.cfg.floor * g.max_abs();
        g.data.iter().map(|&x| x.max(floor).max(f64::MIN_POSITIVE).ln()).collect()
    }

    fn inputs(&self, f: &ReducedDensity, h: &ReducedDensity, mode: GradientMode) -> FluxInputs {
        match mode {
            GradientMode::Direct => FluxInputs {
                x: self.to_planes(&f.data),
                y: self.to_planes(&h.data),
                u: self.derivative_planes(&h.data),
                v: self.derivative_planes(&f.data),
                product: false,
            },
            GradientMode::Logarithmic => {
                let d = self.derivative_planes(&self.log_values(f));
                FluxInputs {
                    x: self.to_planes(&f.data),
                    y: self.to_planes(&f.data),
                    u: d.clone(),
                    v: d,
                    product: true,
                }
            }
        }
    }

    /// Pair weight -(1/2) W_n (2 pi w_r' dv3) without the z-node factor.
    fn pair_weight(&self, ir: usize, jr: usize) -> f64 {
        let g = &self.grid;
        let wn = g.cell_measure([0, 0, 0, ir, 0]);
        -0.5 * wn * 2.0 * PI * g.r_weights()[jr] * g.step(4)
    }

    /// Flux accumulators J_c (plane-major) such that the weak form against
    /// phi equals sum_c <J_c, D_c phi>.
    fn accumulate(&self, inp: &FluxInputs) -> [Vec<f64>; 4] {
        let [n1, n2, n3, n_r, n_v] = self.grid.dims();
        let ny = n1 * n2;
        let len = self.grid.len();
        let rs = self.grid.coords(3);
        let vs = self.grid.coords(4);
        let cs = self.cfg.cross_section;
        let partners: Vec<(usize, usize)> = (0..n_r).flat_map(|j| (0..n_v).map(move |v| (j, v))).collect();
        let per = partners.len().div_ceil(self.chunks);
        let parts: Vec<[Vec<f64>; 4]> = partners
            .par_chunks(per)
            .map(|chunk| {
                let mut jacc: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
                let mut xp = vec![0.0; ny];
                let mut vp = [vec![0.0; ny], vec![0.0; ny], vec![0.0; ny], vec![0.0; ny]];
                for &(jr, jv) in chunk {
                    for k3 in 0..n3 {
                        let pj = ((k3 * n_r + jr) * n_v + jv) * ny;
                        for ir in 0..n_r {
                            let pw = self.pair_weight(ir, jr);
                            for node in &self.rules[ir * n_r + jr] {
                                // Interpolated partner values for every output y.
                                xp.iter_mut().for_each(|x| *x = 0.0);
                                vp.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x = 0.0));
                                for i1 in 0..n1 {
                                    for i2 in 0..n2 {
                                        let y = i1 * n2 + i2;
                                        for &(o1, o2, w) in &node.taps {
                                            let t = pj + ((i1 + o1) % n1) * n2 + (i2 + o2) % n2;
                                            xp[y] += w * inp.x[t];
                                            for c in 0..4 {
                                                vp[c][y] += w * inp.v[c][t];
                                            }
                                        }
                                    }
                                }
                                for iv in 0..n_v {
                                    let u = vs[iv] - vs[jv];
                                    let d = node.l.hypot(u);
                                    let k = pw * node.weight * cs.eval(d);
                                    let pc = pair_coefficients(rs[ir], rs[jr], u, node.l, node.zhat, node.cos_phi, node.sin_phi, self.omega_c);
                                    let pn = ((k3 * n_r + ir) * n_v + iv) * ny;
                                    for i1 in 0..n1 {
                                        for i2 in 0..n2 {
                                            let y = i1 * n2 + i2;
                                            let n = pn + y;
                                            let un = [inp.u[0][n], inp.u[1][n], inp.u[2][n], inp.u[3][n]];
                                            let vv = [vp[0][y], vp[1][y], vp[2][y], vp[3][y]];
                                            let (p1, p2) = if inp.product {
                                                let m = inp.y[n] * xp[y];
                                                (m, m)
                                            } else {
                                                (xp[y], inp.y[n])
                                            };
                                            let mut ja = [0.0; 4];
                                            let mut jb = [0.0; 4];
                                            for i in 0..3 {
                                                let s = k * (p1 * dot4(&pc.alpha[i], &un) + p2 * dot4(&pc.beta[i], &vv));
                                                for c in 0..4 {
                                                    ja[c] += s * pc.alpha[i][c];
                                                    jb[c] += s * pc.beta[i][c];
                                                }
                                            }
                                            for c in 0..4 {
                                                jacc[c][n] += ja[c];
                                            }
                                            for &(o1, o2, w) in &node.taps {
                                                let t = pj + ((i1 + o1) % n1) * n2 + (i2 + o2) % n2;
                                                for c in 0..4 {
                                                    jacc[c][t] += w * jb[c];
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                jacc
            })
            .collect();
        let mut total: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; len]);
        for part in parts {
            for c in 0..4 {
                for (t, p) in total[c].iter_mut().zip(&part[c]) {
                    *t += p;
                }
            }
        }
        total
    }

    fn strong_from_fluxes(&self, j: [Vec<f64>; 4]) -> Vec<f64> {
        let grid = &self.grid;
        let mut out = vec![0.0; grid.len()];
        for (c, jc) in j.iter().enumerate() {
            let t = grid.derivative_transpose(&self.from_planes(jc), COMPONENT_AXES[c]);
            for (o, x) in out.iter_mut().zip(&t) {
                *o += x;
            }
        }
        for (f, o) in out.iter_mut().enumerate() {
            *o /= grid.cell_measure(grid.unindex(f));
        }
        out
    }

    /// Rate Q(g, g) in the configured gradient mode.
    pub fn apply(&self, g: &ReducedDensity) -> Vec<f64> {
        assert_eq!(g.grid.dims(), self.grid.dims(), "density and operator grids differ");
        let inp = self.inputs(g, g, self.cfg.gradient_mode);
        self.strong_from_fluxes(self.accumulate(&inp))
    }

    /// Polarized rate Q(f, h): f is read at the partner in the diffusion
    /// term and differentiated at the partner in the drag term, h the other
    /// way round. Q(g, g) equals `apply` in the direct gradient mode.
    pub fn apply_polarized(&self, f: &ReducedDensity, h: &ReducedDensity) -> Vec<f64> {
        let inp = self.inputs(f, h, GradientMode::Direct);
        self.strong_from_fluxes(self.accumulate(&inp))
    }

    /// Grid inner product <Q(g, g), ln g>; never positive in the logarithmic mode.
    pub fn entropy_production(&self, g: &ReducedDensity) -> f64 {
        let q = self.apply(g);
        self.grid.inner(&q, &self.log_values(g))
    }

    /// Weak form of Q(g, g) against a test function given by its
    /// contraction inputs (d/dy1, d/dy2, d/dr, d/dv3) at arbitrary points.
    /// Partner derivatives are evaluated exactly at y - z / omega_c.
    pub fn weak_form_with_gradient<G>(&self, g: &ReducedDensity, grad_phi: &G) -> f64
    where
        G: Fn(&InvariantCoords) -> [f64; 4] + Sync,
    {
        let inp = self.inputs(g, g, self.cfg.gradient_mode);
        let grid = &self.grid;
        let [n1, n2, n3, n_r, n_v] = grid.dims();
        let ny = n1 * n2;
        let rs = grid.coords(3);
        let vs = grid.coords(4);
        let cs = self.cfg.cross_section;
        let outputs: Vec<(usize, usize, usize)> = (0..n3)
            .flat_map(|k3| (0..n_r).flat_map(move |ir| (0..n_v).map(move |iv| (k3, ir, iv))))
            .collect();
        let partial: Vec<f64> = outputs
            .par_iter()
            .map(|&(k3, ir, iv)| {
                let pn = ((k3 * n_r + ir) * n_v + iv) * ny;
                let mut acc = 0.0;
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        let n = pn + i1 * n2 + i2;
                        let here = grid.point([i1, i2, k3, ir, iv]);
                        let phi_n = grad_phi(&here);
                        let un = [inp.u[0][n], inp.u[1][n], inp.u[2][n], inp.u[3][n]];
                        for jr in 0..n_r {
                            let pw = self.pair_weight(ir, jr);
                            for node in &self.rules[ir * n_r + jr] {
                                let there_y = [here.y[0] + node.shift[0], here.y[1] + node.shift[1]];
                                for jv in 0..n_v {
                                    let pj = ((k3 * n_r + jr) * n_v + jv) * ny;
                                    let mut xp = 0.0;
                                    let mut vv = [0.0; 4];
                                    for &(o1, o2, w) in &node.taps {
                                        let t = pj + ((i1 + o1) % n1) * n2 + (i2 + o2) % n2;
                                        xp += w * inp.x[t];
                                        for c in 0..4 {
                                            vv[c] += w * inp.v[c][t];
                                        }
                                    }
                                    let there = InvariantCoords {
                                        y: there_y,
                                        x3: here.x3,
                                        r: rs[jr],
                                        v3: vs[jv],
                                    };
                                    let phi_p = grad_phi(&there);
                                    let u = vs[iv] - vs[jv];
                                    let k = pw * node.weight * cs.eval(node.l.hypot(u));
                                    let pc = pair_coefficients(rs[ir], rs[jr], u, node.l, node.zhat, node.cos_phi, node.sin_phi, self.omega_c);
                                    let (p1, p2) = if inp.product {
                                        let m = inp.y[n] * xp;
                                        (m, m)
                                    } else {
                                        (xp, inp.y[n])
                                    };
                                    for i in 0..3 {
                                        let s = p1 * dot4(&pc.alpha[i], &un) + p2 * dot4(&pc.beta[i], &vv);
                                        let t = dot4(&pc.alpha[i], &phi_n) + dot4(&pc.beta[i], &phi_p);
                                        acc += k * s * t;
                                    }
                                }
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        partial.iter().sum()
    }
}

/// Contraction inputs of a scalar test function by central differences.
pub fn numerical_gradient<F>(phi: F) -> impl Fn(&InvariantCoords) -> [f64; 4] + Sync
where
    F: Fn(&InvariantCoords) -> f64 + Sync,
{
    move |p: &InvariantCoords| {
        let h = 1e-5;
        let mut out = [0.0; 4];
        for (c, o) in out.iter_mut().enumerate() {
            let mut a = *p;
            let mut b = *p;
            match c {
                0 => {
                    a.y[0] += h;
                    b.y[0] -= h;
                }
                1 => {
                    a.y[1] += h;
                    b.y[1] -= h;
                }
                2 => {
                    a.r += h;
                    b.r -= h;
                }
                _ => {
                    a.v3 += h;
                    b.v3 -= h;
                }
            }
            *o = (phi(&a) - phi(&b)) / (2.0 * h);
        }
        out
    }
}

pub fn apply_qfpl_avg(g: &ReducedDensity, params: &PlasmaParams, cfg: &FplConfig) -> Result<Vec<f64>> {
    Ok(LandauOperator::new(&g.grid, params, cfg)?.apply(g))
}

/// Weak form of the operator against a scalar test function on invariants.
pub fn fpl_weak_form<F>(g: &ReducedDensity, phi: F, params: &PlasmaParams, cfg: &FplConfig) -> Result<f64>
where
    F: Fn(&InvariantCoords) -> f64 + Sync,
{
    let op = LandauOperator::new(&g.grid, params, cfg)?;
    Ok(op.weak_form_with_gradient(g, &numerical_gradient(phi)))
}

/// |<Q(g, g), phi> - weak form(g, phi)|, where the strong side differentiates
/// the sampled phi on the grid and the weak side uses phi itself.
pub fn fpl_weak_vs_strong_check<F>(g: &ReducedDensity, phi: F, params: &PlasmaParams, cfg: &FplConfig) -> Result<f64>
where
    F: Fn(&InvariantCoords) -> f64 + Sync,
{
    let op = LandauOperator::new(&g.grid, params, cfg)?;
    let sampled = ReducedDensity::from_fn(&g.grid, &phi);
    let strong = g.grid.inner(&op.apply(g), &sampled.data);
    let weak = op.weak_form_with_gradient(g, &numerical_gradient(phi));
    Ok((strong - weak).abs())
}

/// Grid functionals conserved by the averaged Landau operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedFunctionals {
    pub mass: f64,
    /// Perpendicular momentum; identically zero on reduced densities.
    pub p_perp: [f64; 2],
    pub p3: f64,
    /// Integral of g |v|^2 / 2.
    pub energy: f64,
    /// Integral of g y (mean Larmor center times mass).
    pub larmor_center: [f64; 2],
    /// Integral of g (|y|^2 - r^2 / omega_c^2).
    pub larmor_power: f64,
}

impl ConservedFunctionals {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.mass,
            self.p_perp[0],
            self.p_perp[1],
            self.p3,
            self.energy,
            self.larmor_center[0],
            self.larmor_center[1],
            self.larmor_power,
        ]
    }
}

/// Functionals of any grid field (a density or a rate).
pub fn conserved_functionals_of(grid: &ReducedGrid, data: &[f64], omega_c: f64) -> ConservedFunctionals {
    let mut out = ConservedFunctionals {
        mass: 0.0,
        p_perp: [0.0; 2],
        p3: 0.0,
        energy: 0.0,
        larmor_center: [0.0; 2],
        larmor_power: 0.0,
    };
    // Gyrophase average of (v1, v2) over a trapezoid rule, per unit r.
    let n_alpha = 16;
    let mean_dir = (0..n_alpha).fold([0.0f64; 2], |acc, j| {
        let a = 2.0 * PI * j as f64 / n_alpha as f64;
        [acc[0] + a.cos() / n_alpha as f64, acc[1] + a.sin() / n_alpha as f64]
    });
    for (f, &g) in data.iter().enumerate() {
        let i = grid.unindex(f);
        let p = grid.point(i);
        let w = grid.cell_measure(i) * g;
        out.mass += w;
        out.p_perp[0] += w * p.r * mean_dir[0];
        out.p_perp[1] += w * p.r * mean_dir[1];
        out.p3 += w * p.v3;
        out.energy += w * 0.5 * (p.r * p.r + p.v3 * p.v3);
        out.larmor_center[0] += w * p.y[0];
        out.larmor_center[1] += w * p.y[1];
        out.larmor_power += w * (p.y[0] * p.y[0] + p.y[1] * p.y[1] - p.r * p.r / (omega_c * omega_c));
    }
    out
}

pub fn fpl_conserved_functionals(g: &ReducedDensity, params: &PlasmaParams) -> ConservedFunctionals {
    conserved_functionals_of(&g.grid, &g.data, params.omega_c())
}
