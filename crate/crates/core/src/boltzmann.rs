//! Averaged relaxation operator on reduced densities.
//!
//! For fixed (r, r', v3 - v3') the gain term is a periodic correlation in the
//! guiding center: g' is read at y - z / omega_c for every chi node z and
//! interpolated from the grid. The interpolation taps of all z nodes are
//! aggregated into one kernel per (r, r', v3 - v3') and applied by FFT.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::{shift_taps, wrap, Interpolation, PlaneFft, ReducedDensity, ReducedGrid};
use crate::kernels::chi_quadrature;
use crate::physics::{maxwellian_rv, CrossSection, PlasmaParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannAvgConfig {
    pub n_phi: usize,
    /// Must be even so that the node set is symmetric under z -> -z.
    pub n_alpha: usize,
    pub interpolation: Interpolation,
    pub cross_section: CrossSection,
}

impl BoltzmannAvgConfig {
    pub fn new(cross_section: CrossSection) -> Self {
        BoltzmannAvgConfig {
            n_phi: 24,
            n_alpha: 32,
            interpolation: Interpolation::Bilinear,
            cross_section,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_phi < 2 {
            return Err(invalid("quadrature.n_phi", "must be >= 2"));
        }
        if self.n_alpha < 4 || self.n_alpha % 2 != 0 {
            return Err(invalid("quadrature.n_alpha", "must be even and >= 4"));
        }
        Ok(())
    }
}

/// Precomputed averaged relaxation operator on one grid.
#[derive(Debug, Clone)]
pub struct BoltzmannOperator {
    grid: ReducedGrid,
    n_r: usize,
    n_v: usize,
    n_y: usize,
    fft: PlaneFft,
    /// Real-space kernels, indexed by [(ir * n_r + jr) * n_dv + dv][offset].
    kernel: Vec<f64>,
    /// Correlation symbols conj(FFT(kernel)), same layout.
    symbol: Vec<Complex64>,
    maxw: Vec<f64>,
    loss_rate: Vec<f64>,
    coef: f64,
    s0_over_tau: f64,
}

impl BoltzmannOperator {
    pub fn new(grid: &ReducedGrid, params: &PlasmaParams, cfg: &BoltzmannAvgConfig) -> Result<Self> {
        cfg.validate()?;
        let [n1, n2, _, n_r, n_v] = grid.dims();
        let n_y = n1 * n2;
        let n_dv = 2 * n_v - 1;
        let wc = params.omega_c();
        let dy = [grid.step(0), grid.step(1)];
        let dv = grid.step(4);
        let rs = grid.coords(3).to_vec();
        let fft = PlaneFft::new(n1, n2);
        let cs = cfg.cross_section;

        let pairs: Vec<(usize, usize)> = (0..n_r).flat_map(|i| (0..n_r).map(move |j| (i, j))).collect();
        let blocks: Vec<(Vec<f64>, Vec<Complex64>)> = pairs
            .par_iter()
            .map(|&(ir, jr)| -> Result<(Vec<f64>, Vec<Complex64>)> {
                let cq = chi_quadrature(rs[ir], rs[jr], cfg.n_phi, cfg.n_alpha)?;
                let mut taps_per_phi = vec![0.0; cfg.n_phi * n_y];
                let mut lengths = Vec::with_capacity(cfg.n_phi);
                for (p, ring) in cq.nodes.chunks(cfg.n_alpha).enumerate() {
                    lengths.push(ring[0].z_norm);
                    let t = &mut taps_per_phi[p * n_y..(p + 1) * n_y];
                    for node in ring {
                        let s = [-node.z[0] / (wc * dy[0]), -node.z[1] / (wc * dy[1])];
                        for (o1, o2, w) in shift_taps(s, cfg.interpolation) {
                            t[wrap(o1, n1) * n2 + wrap(o2, n2)] += node.weight * w;
                        }
                    }
                }
                let mut kern = vec![0.0; n_dv * n_y];
                let mut sym = vec![Complex64::new(0.0, 0.0); n_dv * n_y];
                for d in 0..n_dv {
                    let u = (d as f64 - (n_v - 1) as f64) * dv;
                    let k = &mut kern[d * n_y..(d + 1) * n_y];
                    for (p, &l) in lengths.iter().enumerate() {
                        let sig = cs.eval((l * l + u * u).sqrt());
                        for (kk, t) in k.iter_mut().zip(&taps_per_phi[p * n_y..(p + 1) * n_y]) {
                            *kk += sig * t;
                        }
                    }
                    let s = &mut sym[d * n_y..(d + 1) * n_y];
                    for (sv, &kv) in s.iter_mut().zip(k.iter()) {
                        *sv = Complex64::new(kv, 0.0);
                    }
                    fft.forward(s);
                    for sv in s.iter_mut() {
                        *sv = sv.conj();
                    }
                }
                Ok((kern, sym))
            })
            .collect::<Result<_>>()?;
        let mut kernel = Vec::with_capacity(n_r * n_r * n_dv * n_y);
        let mut symbol = Vec::with_capacity(n_r * n_r * n_dv * n_y);
        for (k, s) in blocks {
            kernel.extend(k);
            symbol.extend(s);
        }

        let vs = grid.coords(4);
        let maxw: Vec<f64> = (0..n_r * n_v)
            .map(|a| maxwellian_rv(rs[a / n_v], vs[a % n_v], params))
            .collect();
        let coef = 2.0 * PI / params.tau;
        let wr = grid.r_weights();
        let mut op = BoltzmannOperator {
            grid: grid.clone(),
            n_r,
            n_v,
            n_y,
            fft,
            kernel,
            symbol,
            maxw,
            loss_rate: vec![0.0; n_r * n_v],
            coef,
            s0_over_tau: cs.big_s0() / params.tau,
        };
        let mut loss_rate = vec![0.0; n_r * n_v];
        for ir in 0..n_r {
            for iv in 0..n_v {
                let mut acc = 0.0;
                for jr in 0..n_r {
                    for jv in 0..n_v {
                        let ksum: f64 = op.kernel_block(ir, jr, iv, jv).iter().sum();
                        acc += wr[jr] * dv * op.maxw[jr * n_v + jv] * ksum;
                    }
                }
                loss_rate[ir * n_v + iv] = coef * acc;
            }
        }
        op.loss_rate = loss_rate;
        Ok(op)
    }

    #[inline]
    fn block_start(&self, ir: usize, jr: usize, iv: usize, jv: usize) -> usize {
        let n_dv = 2 * self.n_v - 1;
        let d = iv + self.n_v - 1 - jv;
        ((ir * self.n_r + jr) * n_dv + d) * self.n_y
    }

    fn kernel_block(&self, ir: usize, jr: usize, iv: usize, jv: usize) -> &[f64] {
        let s = self.block_start(ir, jr, iv, jv);
        &self.kernel[s..s + self.n_y]
    }

    fn symbol_block(&self, ir: usize, jr: usize, iv: usize, jv: usize) -> &[Complex64] {
        let s = self.block_start(ir, jr, iv, jv);
        &self.symbol[s..s + self.n_y]
    }

    pub fn grid(&self) -> &ReducedGrid {
        &self.grid
    }

    /// Maxwellian values at the (r, v3) nodes, r-major.
    pub fn maxwellian_nodes(&self) -> &[f64] {
        &self.maxw
    }

    /// Loss frequencies at the (r, v3) nodes; each is at most S0 / tau.
    pub fn loss_rates(&self) -> &[f64] {
        &self.loss_rate
    }

    pub fn loss_bound(&self) -> f64 {
        self.s0_over_tau
    }

    /// Plane (y1, y2) values of `data` at fixed (x3, r, v3).
    fn plane(&self, data: &[f64], k3: usize, ir: usize, iv: usize) -> Vec<f64> {
        let g = &self.grid;
        let [n1, n2, ..] = g.dims();
        let mut out = Vec::with_capacity(self.n_y);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                out.push(data[g.index([i1, i2, k3, ir, iv])]);
            }
        }
        out
    }

    fn check_shape(&self, g: &ReducedDensity) {
        assert_eq!(g.grid.dims(), self.grid.dims(), "density and operator grids differ");
    }

    pub fn gain(&self, g: &ReducedDensity) -> Vec<f64> {
        self.check_shape(g);
        let grid = &self.grid;
        let [n1, n2, n3, n_r, n_v] = grid.dims();
        let wr = grid.r_weights();
        let dv = grid.step(4);
        let mut out = vec![0.0; grid.len()];
        for k3 in 0..n3 {
            let spectra: Vec<Vec<Complex64>> = (0..n_r * n_v)
                .into_par_iter()
                .map(|a| {
                    let mut s: Vec<Complex64> = self
                        .plane(&g.data, k3, a / n_v, a % n_v)
                        .into_iter()
                        .map(|x| Complex64::new(x, 0.0))
                        .collect();
                    self.fft.forward(&mut s);
                    s
                })
                .collect();
            let planes: Vec<Vec<f64>> = (0..n_r * n_v)
                .into_par_iter()
                .map(|a| {
                    let (ir, iv) = (a / n_v, a % n_v);
                    let mut acc = vec![Complex64::new(0.0, 0.0); self.n_y];
                    for jr in 0..n_r {
                        for jv in 0..n_v {
                            let w = wr[jr] * dv;
                            let sym = self.symbol_block(ir, jr, iv, jv);
                            let gh = &spectra[jr * n_v + jv];
                            for ((a, s), x) in acc.iter_mut().zip(sym).zip(gh) {
                                *a += w * s * x;
                            }
                        }
                    }
                    self.fft.inverse(&mut acc);
                    let m = self.coef * self.maxw[a];
                    acc.into_iter().map(|c| m * c.re).collect()
                })
                .collect();
            for (a, plane) in planes.iter().enumerate() {
                let (ir, iv) = (a / n_v, a % n_v);
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        out[grid.index([i1, i2, k3, ir, iv])] = plane[i1 * n2 + i2];
                    }
                }
            }
        }
        out
    }

    pub fn loss(&self, g: &ReducedDensity) -> Vec<f64> {
        self.check_shape(g);
        let n_v = self.n_v;
        (0..self.grid.len())
            .map(|f| {
                let i = self.grid.unindex(f);
                self.loss_rate[i[3] * n_v + i[4]] * g.data[f]
            })
            .collect()
    }

    pub fn apply(&self, g: &ReducedDensity) -> Vec<f64> {
        let gain = self.gain(g);
        let loss = self.loss(g);
        gain.iter().zip(&loss).map(|(a, b)| a - b).collect()
    }

    /// Grid inner product of the rate of f against h / M.
    pub fn bilinear(&self, f: &ReducedDensity, h: &ReducedDensity) -> f64 {
        let q = self.apply(f);
        let n_v = self.n_v;
        let hm: Vec<f64> = (0..self.grid.len())
            .map(|k| {
                let i = self.grid.unindex(k);
                h.data[k] / self.maxw[i[3] * n_v + i[4]]
            })
            .collect();
        self.grid.inner(&q, &hm)
    }

    /// The non-positive quadratic form
    /// -(1/2) sum W K M M' (g/M - g'/M')^2 evaluated directly over the kernel taps.
    pub fn entropy_production(&self, g: &ReducedDensity) -> f64 {
        self.check_shape(g);
        let grid = &self.grid;
        let [n1, n2, n3, n_r, n_v] = grid.dims();
        let wr = grid.r_weights();
        let dv = grid.step(4);
        // Collected before summing so the result does not depend on thread scheduling.
        let total: f64 = (0..n3 * n_r * n_v)
            .into_par_iter()
            .map(|a| {
                let k3 = a / (n_r * n_v);
                let (ir, iv) = ((a / n_v) % n_r, a % n_v);
                let mi = self.maxw[ir * n_v + iv];
                let wi = grid.cell_measure([0, 0, k3, ir, iv]);
                let hi: Vec<f64> = self.plane(&g.data, k3, ir, iv).iter().map(|x| x / mi).collect();
                let mut acc = 0.0;
                for jr in 0..n_r {
                    for jv in 0..n_v {
                        let mj = self.maxw[jr * n_v + jv];
                        let hj: Vec<f64> = self.plane(&g.data, k3, jr, jv).iter().map(|x| x / mj).collect();
                        let k = self.kernel_block(ir, jr, iv, jv);
                        let mut s = 0.0;
                        for (o, &kv) in k.iter().enumerate() {
                            if kv == 0.0 {
                                continue;
                            }
                            let (o1, o2) = (o / n2, o % n2);
                            for i1 in 0..n1 {
                                for i2 in 0..n2 {
                                    let d = hi[i1 * n2 + i2] - hj[((i1 + o1) % n1) * n2 + (i2 + o2) % n2];
                                    s += kv * d * d;
                                }
                            }
                        }
                        acc += wr[jr] * dv * mi * mj * s;
                    }
                }
                wi * acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        -0.5 * self.coef * total
    }
}

/// Rate of the averaged relaxation operator applied to g.
pub fn apply_qb_avg(g: &ReducedDensity, params: &PlasmaParams, cfg: &BoltzmannAvgConfig) -> Result<Vec<f64>> {
    Ok(BoltzmannOperator::new(&g.grid, params, cfg)?.apply(g))
}

pub fn qb_gain(g: &ReducedDensity, params: &PlasmaParams, cfg: &BoltzmannAvgConfig) -> Result<Vec<f64>> {
    Ok(BoltzmannOperator::new(&g.grid, params, cfg)?.gain(g))
}

pub fn qb_loss(g: &ReducedDensity, params: &PlasmaParams, cfg: &BoltzmannAvgConfig) -> Result<Vec<f64>> {
    Ok(BoltzmannOperator::new(&g.grid, params, cfg)?.loss(g))
}

pub fn qb_entropy_production(g: &ReducedDensity, params: &PlasmaParams, cfg: &BoltzmannAvgConfig) -> Result<f64> {
    Ok(BoltzmannOperator::new(&g.grid, params, cfg)?.entropy_production(g))
}
