//! Closed-form averaged kernels: the Larmor-circle overlap density chi, the
//! averaged cross section, projector averages, the rank-one fields xi^i and
//! the diffusion tensors A+ / A-.
//!
//! Six-vectors use position slots in omega_c x units, matching the gradient
//! with respect to (omega_c x, v).

use std::f64::consts::PI;

use crate::error::{GyroError, Result};
use crate::geometry::{norm2, perp, InvariantCoords, Vec2, Vec6};
use crate::gyroaverage::TensorAverages;
use crate::physics::CrossSection;
use crate::quadrature::GaussLegendre;

pub type Mat3 = [[f64; 3]; 3];
pub type Mat6 = [[f64; 6]; 6];
pub type Vec3 = [f64; 3];

/// Arguments of every averaged kernel: (r, v3) and (r', v3') plus the
/// guiding-center offset z in omega_c x units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub r: f64,
    pub v3: f64,
    pub r_p: f64,
    pub v3_p: f64,
    pub z: Vec2,
}

impl KernelPoint {
    pub fn new(r: f64, v3: f64, r_p: f64, v3_p: f64, z: Vec2) -> Self {
        KernelPoint { r, v3, r_p, v3_p, z }
    }

    pub fn z_norm(&self) -> f64 {
        norm2(self.z)
    }

    /// The same point seen from the primed particle.
    pub fn swapped(&self) -> Self {
        KernelPoint::new(self.r_p, self.v3_p, self.r, self.v3, [-self.z[0], -self.z[1]])
    }

    pub fn in_support(&self) -> bool {
        let l = self.z_norm();
        (self.r - self.r_p).abs() < l && l < self.r + self.r_p
    }
}

/// (|z|^2 - (r - r')^2) ((r + r')^2 - |z|^2), factored for accuracy near the ends.
fn support_product(r: f64, r_p: f64, l: f64) -> f64 {
    let a = (r - r_p).abs();
    let b = r + r_p;
    (l - a) * (l + a) * (b - l) * (b + l)
}

/// Density of the guiding-center offset between two Larmor circles.
pub fn chi(r: f64, r_p: f64, z_norm: f64) -> f64 {
    if !((r - r_p).abs() < z_norm && z_norm < r + r_p) {
        return 0.0;
    }
    let prod = support_product(r, r_p, z_norm);
    if prod <= 0.0 {
        return 0.0;
    }
    1.0 / (PI * PI * prod.sqrt())
}

/// Cosine and sine of the angle phi in (0, pi) with |z|^2 = r^2 + r'^2 - 2 r r' cos phi.
pub fn phi_cos_sin(r: f64, r_p: f64, z_norm: f64) -> Result<(f64, f64)> {
    check_support(r, r_p, z_norm)?;
    let c = ((r * r + r_p * r_p - z_norm * z_norm) / (2.0 * r * r_p)).clamp(-1.0, 1.0);
    let s = (support_product(r, r_p, z_norm).max(0.0)).sqrt() / (2.0 * r * r_p);
    Ok((c, s.min(1.0)))
}

/// Cosine and sine of the angle psi in (0, pi) with r'^2 = r^2 + |z|^2 + 2 r |z| cos psi.
pub fn psi_cos_sin(r: f64, r_p: f64, z_norm: f64) -> Result<(f64, f64)> {
    check_support(r, r_p, z_norm)?;
    let c = ((r_p * r_p - r * r - z_norm * z_norm) / (2.0 * r * z_norm)).clamp(-1.0, 1.0);
    let s = (support_product(r, r_p, z_norm).max(0.0)).sqrt() / (2.0 * r * z_norm);
    Ok((c, s.min(1.0)))
}

fn check_support(r: f64, r_p: f64, z_norm: f64) -> Result<()> {
    if !(r > 0.0 && r_p > 0.0 && (r - r_p).abs() < z_norm && z_norm < r + r_p) {
        return Err(GyroError::domain(
            "kernel angle",
            format!("(r, r', |z|) = ({r}, {r_p}, {z_norm}) outside the open support"),
        ));
    }
    Ok(())
}

pub fn phi_angle(r: f64, r_p: f64, z_norm: f64) -> Result<f64> {
    let (c, s) = phi_cos_sin(r, r_p, z_norm)?;
    Ok(s.atan2(c))
}

pub fn psi_angle(r: f64, r_p: f64, z_norm: f64) -> Result<f64> {
    let (c, s) = psi_cos_sin(r, r_p, z_norm)?;
    Ok(s.atan2(c))
}

/// Averaged cross section: sigma at the reduced relative speed times chi.
pub fn avg_sigma(kp: &KernelPoint, cs: &CrossSection) -> f64 {
    let l = kp.z_norm();
    let x = chi(kp.r, kp.r_p, l);
    if x == 0.0 {
        return 0.0;
    }
    let u = kp.v3 - kp.v3_p;
    cs.eval((l * l + u * u).sqrt()) * x
}

/// Orthogonal projector onto the plane normal to w.
pub fn scatter_matrix(w: Vec3) -> Result<Mat3> {
    let n2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    if n2 == 0.0 || !n2.is_finite() {
        return Err(GyroError::domain("scatter_matrix", "w must be nonzero and finite"));
    }
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = if i == j { 1.0 } else { 0.0 } - w[i] * w[j] / n2;
        }
    }
    Ok(s)
}

/// Shared trigonometry of a kernel point on the support.
#[derive(Debug, Clone, Copy)]
struct Frame {
    l: f64,
    u: f64,
    d: f64,
    cos_phi: f64,
    sin_phi: f64,
    sigma_chi: f64,
}

fn frame(kp: &KernelPoint, cs: &CrossSection) -> Result<Frame> {
    let l = kp.z_norm();
    let (cos_phi, sin_phi) = phi_cos_sin(kp.r, kp.r_p, l)?;
    let u = kp.v3 - kp.v3_p;
    let d = (l * l + u * u).sqrt();
    if d == 0.0 {
        return Err(GyroError::domain("kernel", "singular relative velocity (z = 0 and v3 = v3')"));
    }
    Ok(Frame {
        l,
        u,
        d,
        cos_phi,
        sin_phi,
        sigma_chi: cs.eval(d) * chi(kp.r, kp.r_p, l),
    })
}

/// sigma chi S((perp z, v3' - v3)).
pub fn avg_projection_tensor(kp: &KernelPoint, cs: &CrossSection) -> Result<Mat3> {
    let f = frame(kp, cs)?;
    let pz = perp(kp.z);
    let s = scatter_matrix([pz[0], pz[1], -f.u])?;
    let mut out = s;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= f.sigma_chi;
        }
    }
    Ok(out)
}

/// Integrands of the four averaged projector-vector products, in the order
/// (v_perp, 0), (v'_perp, 0), (perp v_perp, 0), (perp v'_perp, 0).
pub fn avg_vector_kernels(kp: &KernelPoint, cs: &CrossSection) -> Result<[Vec3; 4]> {
    let f = frame(kp, cs)?;
    let (r, rp) = (kp.r, kp.r_p);
    let pz = perp(kp.z);
    let l2 = f.l * f.l;
    let d2 = f.d * f.d;
    let a = r * r - r * rp * f.cos_phi;
    let b = rp * rp - r * rp * f.cos_phi;
    let t = f.u * f.u / l2;
    let sc = f.sigma_chi;
    let k1 = -sc * a / d2;
    let k2 = sc * b / d2;
    let k3 = sc * a / l2;
    let k4 = -sc * b / l2;
    Ok([
        [k1 * t * pz[0], k1 * t * pz[1], k1 * f.u],
        [k2 * t * pz[0], k2 * t * pz[1], k2 * f.u],
        [k3 * kp.z[0], k3 * kp.z[1], 0.0],
        [k4 * kp.z[0], k4 * kp.z[1], 0.0],
    ])
}

/// Integrands of the six averaged scalar projector contractions. Items 2 and 5
/// vanish identically.
pub fn scalar_contractions(kp: &KernelPoint, cs: &CrossSection) -> Result<[f64; 6]> {
    let f = frame(kp, cs)?;
    let (r, rp) = (kp.r, kp.r_p);
    let (c, s) = (f.cos_phi, f.sin_phi);
    let d2 = f.d * f.d;
    let sc = f.sigma_chi;
    Ok([
        sc * (r * r - r * r * (r - rp * c).powi(2) / d2),
        0.0,
        sc * (r * r - r * r * rp * rp * s * s / d2),
        sc * (r * rp * c - r * rp * (r * c - rp) * (r - rp * c) / d2),
        0.0,
        sc * (r * rp * c - r * r * rp * rp * s * s / d2),
    ])
}

/// Geometry of a particle pair in full coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PairGeometry {
    pub v: Vec3,
    pub v_p: Vec3,
    pub kp: KernelPoint,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub sigma_chi: f64,
}

impl PairGeometry {
    pub fn new(xbar: Vec2, v: Vec3, xbar_p: Vec2, v_p: Vec3, omega_c: f64, cs: &CrossSection) -> Result<Self> {
        if omega_c == 0.0 {
            return Err(GyroError::ZeroCyclotronFrequency);
        }
        let pv = perp([v[0], v[1]]);
        let pvp = perp([v_p[0], v_p[1]]);
        let z = [
            omega_c * xbar[0] + pv[0] - omega_c * xbar_p[0] - pvp[0],
            omega_c * xbar[1] + pv[1] - omega_c * xbar_p[1] - pvp[1],
        ];
        let kp = KernelPoint::new(norm2([v[0], v[1]]), v[2], norm2([v_p[0], v_p[1]]), v_p[2], z);
        if kp.r == 0.0 || kp.r_p == 0.0 {
            return Err(GyroError::DegenerateGyration("pair geometry"));
        }
        let f = frame(&kp, cs)?;
        Ok(PairGeometry {
            v,
            v_p,
            kp,
            cos_phi: f.cos_phi,
            sin_phi: f.sin_phi,
            sigma_chi: f.sigma_chi,
        })
    }

    pub fn swapped(&self) -> Self {
        PairGeometry {
            v: self.v_p,
            v_p: self.v,
            kp: self.kp.swapped(),
            ..*self
        }
    }

    fn l(&self) -> f64 {
        self.kp.z_norm()
    }

    fn u(&self) -> f64 {
        self.kp.v3 - self.kp.v3_p
    }

    fn d(&self) -> f64 {
        self.l().hypot(self.u())
    }

    /// ((v,0)/r, (perp v,0)/r): tangent to the fast flow.
    fn gyro_dir(v: Vec3) -> Vec6 {
        let r = norm2([v[0], v[1]]);
        let p = perp([v[0], v[1]]);
        [v[0] / r, v[1] / r, 0.0, p[0] / r, p[1] / r, 0.0]
    }

    /// ((perp v,0)/r, -(v,0)/r)
    fn radial_dir(v: Vec3) -> Vec6 {
        let r = norm2([v[0], v[1]]);
        let p = perp([v[0], v[1]]);
        [p[0] / r, p[1] / r, 0.0, -v[0] / r, -v[1] / r, 0.0]
    }

    /// ((perp z,0)/|z|, 0)
    fn offset_dir(&self) -> Vec6 {
        let pz = perp(self.kp.z);
        let l = self.l();
        [pz[0] / l, pz[1] / l, 0.0, 0.0, 0.0, 0.0]
    }

    /// (u (z,0)/|z|, -|z| e3) / sqrt(|z|^2 + u^2)
    fn parallel_dir(&self) -> Vec6 {
        let (l, u, d) = (self.l(), self.u(), self.d());
        let z = self.kp.z;
        [u * z[0] / (l * d), u * z[1] / (l * d), 0.0, 0.0, 0.0, -l / d]
    }
}

fn axpy(a: f64, x: &Vec6, y: &mut Vec6) {
    for k in 0..6 {
        y[k] += a * x[k];
    }
}

fn scaled(a: f64, x: &Vec6) -> Vec6 {
    let mut y = [0.0; 6];
    axpy(a, x, &mut y);
    y
}

/// Signs pairing each field with its primed counterpart.
pub const XI_SIGNS: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// The four rank-one generating fields at (xbar, v) paired with (xbar', v').
pub fn xi_fields(xbar: Vec2, v: Vec3, xbar_p: Vec2, v_p: Vec3, omega_c: f64, cs: &CrossSection) -> Result<[Vec6; 4]> {
    let g = PairGeometry::new(xbar, v, xbar_p, v_p, omega_c, cs)?;
    Ok(xi_from_geometry(&g))
}

pub fn xi_from_geometry(g: &PairGeometry) -> [Vec6; 4] {
    let (r, rp) = (g.kp.r, g.kp.r_p);
    let (l, u, d) = (g.l(), g.u(), g.d());
    let (c, s) = (g.cos_phi, g.sin_phi);
    let root = g.sigma_chi.sqrt();
    let p = PairGeometry::gyro_dir(g.v);
    let q = PairGeometry::radial_dir(g.v);
    let zd = g.offset_dir();
    let w = g.parallel_dir();

    let xi1 = scaled(root * rp * s * u / (l * d), &p);
    let mut xi2 = scaled((r - rp * c) / l, &p);
    axpy(1.0, &zd, &mut xi2);
    let xi2 = scaled(root, &xi2);
    let xi3 = scaled(root * rp * s / l, &q);
    let mut xi4 = scaled((rp * c - r) * u / (l * d), &q);
    axpy(1.0, &w, &mut xi4);
    let xi4 = scaled(root, &xi4);
    [xi1, xi2, xi3, xi4]
}

fn outer(a: &Vec6, b: &Vec6, coef: f64, m: &mut Mat6) {
    for i in 0..6 {
        for j in 0..6 {
            m[i][j] += coef * a[i] * b[j];
        }
    }
}

/// Gain diffusion tensor A+ assembled term by term (without the sigma chi factor).
pub fn a_plus(xbar: Vec2, v: Vec3, xbar_p: Vec2, v_p: Vec3, omega_c: f64, cs: &CrossSection) -> Result<Mat6> {
    let g = PairGeometry::new(xbar, v, xbar_p, v_p, omega_c, cs)?;
    Ok(a_plus_from_geometry(&g))
}

pub fn a_plus_from_geometry(g: &PairGeometry) -> Mat6 {
    let (r, rp) = (g.kp.r, g.kp.r_p);
    let (l, u, d) = (g.l(), g.u(), g.d());
    let (c, s) = (g.cos_phi, g.sin_phi);
    let p = PairGeometry::gyro_dir(g.v);
    let q = PairGeometry::radial_dir(g.v);
    let zd = g.offset_dir();
    let w = g.parallel_dir();
    let mut m = [[0.0; 6]; 6];

    outer(&p, &p, rp * rp * s * s * u * u / (l * l * d * d), &mut m);
    let mut t2 = zd;
    axpy((r - rp * c) / l, &p, &mut t2);
    outer(&t2, &t2, 1.0, &mut m);
    outer(&q, &q, rp * rp * s * s / (l * l), &mut m);
    let mut t4 = w;
    axpy((rp * c - r) * u / (l * d), &q, &mut t4);
    outer(&t4, &t4, 1.0, &mut m);
    m
}

/// Loss cross tensor A- assembled term by term (without the sigma chi factor).
pub fn a_minus(xbar: Vec2, v: Vec3, xbar_p: Vec2, v_p: Vec3, omega_c: f64, cs: &CrossSection) -> Result<Mat6> {
    let g = PairGeometry::new(xbar, v, xbar_p, v_p, omega_c, cs)?;
    Ok(a_minus_from_geometry(&g))
}

pub fn a_minus_from_geometry(g: &PairGeometry) -> Mat6 {
    let (r, rp) = (g.kp.r, g.kp.r_p);
    let (l, u, d) = (g.l(), g.u(), g.d());
    let (c, s) = (g.cos_phi, g.sin_phi);
    let p = PairGeometry::gyro_dir(g.v);
    let pp = PairGeometry::gyro_dir(g.v_p);
    let q = PairGeometry::radial_dir(g.v);
    let qp = PairGeometry::radial_dir(g.v_p);
    let zd = g.offset_dir();
    let w = g.parallel_dir();
    let mut m = [[0.0; 6]; 6];

    outer(&p, &pp, r * rp * s * s * u * u / (l * l * d * d), &mut m);
    let mut a2 = zd;
    axpy((r - rp * c) / l, &p, &mut a2);
    let mut b2 = zd;
    axpy((r * c - rp) / l, &pp, &mut b2);
    outer(&a2, &b2, 1.0, &mut m);
    outer(&q, &qp, r * rp * s * s / (l * l), &mut m);
    let mut a4 = w;
    axpy((rp * c - r) * u / (l * d), &q, &mut a4);
    let mut b4 = w;
    axpy((rp - r * c) * u / (l * d), &qp, &mut b4);
    outer(&a4, &b4, 1.0, &mut m);
    m
}

/// One node of the chi quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiNode {
    pub z: Vec2,
    pub z_norm: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub weight: f64,
}

/// Quadrature for integrals of F(z) against chi(r, r', z) dz, in the angle
/// variables (phi, alpha) with z = l(phi) e^{i alpha}, which remove both
/// inverse square-root singularities at the ends of the support.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiQuadrature {
    pub r: f64,
    pub r_p: f64,
    pub n_phi: usize,
    pub n_alpha: usize,
    pub nodes: Vec<ChiNode>,
}

impl ChiQuadrature {
    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn integrate(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n.z)).sum()
    }
}

/// Gauss-Legendre rule on (0, pi) shared by every chi quadrature of one size.
pub fn phi_rule(n_phi: usize) -> (Vec<f64>, Vec<f64>) {
    GaussLegendre::new(n_phi).on_interval(0.0, PI)
}

pub fn chi_quadrature(r: f64, r_p: f64, n_phi: usize, n_alpha: usize) -> Result<ChiQuadrature> {
    if !(r > 0.0 && r_p > 0.0) {
        return Err(GyroError::domain("chi_quadrature", format!("r = {r}, r' = {r_p} must be > 0")));
    }
    if n_phi < 2 {
        return Err(crate::error::invalid("quadrature.n_phi", "must be >= 2"));
    }
    if n_alpha < 4 {
        return Err(crate::error::invalid("quadrature.n_alpha", "must be >= 4"));
    }
    let (phis, wphi) = phi_rule(n_phi);
    let wa = 1.0 / (PI * n_alpha as f64);
    let alphas: Vec<(f64, f64)> = (0..n_alpha)
        .map(|j| (2.0 * PI * j as f64 / n_alpha as f64).sin_cos())
        .collect();
    let mut nodes = Vec::with_capacity(n_phi * n_alpha);
    for (&ph, &wp) in phis.iter().zip(&wphi) {
        let (s, c) = ph.sin_cos();
        // l^2 = (r - r')^2 + 4 r r' sin^2(phi/2) avoids cancellation at small phi.
        let h = (0.5 * ph).sin();
        let l = ((r - r_p).powi(2) + 4.0 * r * r_p * h * h).sqrt();
        for &(sa, ca) in &alphas {
            nodes.push(ChiNode {
                z: [l * ca, l * sa],
                z_norm: l,
                cos_phi: c,
                sin_phi: s,
                weight: wp * wa,
            });
        }
    }
    Ok(ChiQuadrature {
        r,
        r_p,
        n_phi,
        n_alpha,
        nodes,
    })
}

/// Independent check of the chi normalization using `chi_fn` itself and the
/// Jacobian of the angle substitution: 2 pi sum_k w_k chi(l_k) r r' sin phi_k.
pub fn chi_normalization_via<F: Fn(f64, f64, f64) -> f64>(chi_fn: F, r: f64, r_p: f64, n_phi: usize) -> f64 {
    let (phis, wphi) = phi_rule(n_phi);
    phis.iter()
        .zip(&wphi)
        .map(|(&ph, &w)| {
            let h = (0.5 * ph).sin();
            let l = ((r - r_p).powi(2) + 4.0 * r * r_p * h * h).sqrt();
            2.0 * PI * w * chi_fn(r, r_p, l) * r * r_p * ph.sin()
        })
        .sum()
}

/// Outer (r', v3') rule for closed-form kernel integrals: Gauss-Legendre on
/// [0, r_max] x [-v_max, v_max], split at the outer point (r, v3) where the
/// projector direction is discontinuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRule {
    pub r_max: f64,
    pub v_max: f64,
    /// Nodes per sub-interval.
    pub n_r: usize,
    pub n_v: usize,
    pub n_phi: usize,
    pub n_alpha: usize,
}

fn split_rule(a: f64, m: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(n);
    let mut out = Vec::with_capacity(2 * n);
    for (lo, hi) in [(a, m), (m, b)] {
        if hi > lo {
            let (x, w) = gl.on_interval(lo, hi);
            out.extend(x.into_iter().zip(w));
        }
    }
    out
}

/// All projector-weighted averages at the invariant point `inv` from the
/// closed-form kernels: 2 pi int r' dr' dv3' int chi(z) K(z) g(y - z / omega_c, r', v3') dz.
/// Vectors follow `PlanarWeight::ALL`, scalars follow `SCALAR_PAIRS`.
pub fn closed_form_averages<G>(g: &G, inv: &InvariantCoords, omega_c: f64, cs: &CrossSection, rule: &KernelRule) -> Result<TensorAverages>
where
    G: Fn(&InvariantCoords) -> f64 + ?Sized,
{
    if omega_c == 0.0 {
        return Err(GyroError::ZeroCyclotronFrequency);
    }
    let (r, v3) = (inv.r, inv.v3);
    let rs = split_rule(0.0, r.min(rule.r_max), rule.r_max, rule.n_r);
    let vs = split_rule(-rule.v_max, v3.clamp(-rule.v_max, rule.v_max), rule.v_max, rule.n_v);
    let mut acc = TensorAverages::default();
    for &(rp, wr) in &rs {
        let cq = chi_quadrature(r, rp, rule.n_phi, rule.n_alpha)?;
        for node in &cq.nodes {
            let x = chi(r, rp, node.z_norm);
            if x == 0.0 {
                continue;
            }
            let y = [inv.y[0] - node.z[0] / omega_c, inv.y[1] - node.z[1] / omega_c];
            for &(vp, wv) in &vs {
                let kp = KernelPoint::new(r, v3, rp, vp, node.z);
                if !kp.in_support() || (node.z_norm == 0.0 && v3 == vp) {
                    continue;
                }
                let gv = g(&InvariantCoords { y, x3: inv.x3, r: rp, v3: vp });
                let w = 2.0 * PI * rp * wr * wv * node.weight / x * gv;
                if w == 0.0 {
                    continue;
                }
                let m = avg_projection_tensor(&kp, cs)?;
                for a in 0..3 {
                    for b in 0..3 {
                        acc.matrix[a][b] += w * m[a][b];
                    }
                }
                let k = avg_vector_kernels(&kp, cs)?;
                for (t, kv) in k.iter().enumerate() {
                    for c in 0..3 {
                        acc.vectors[t][c] += w * kv[c];
                    }
                }
                let sc = scalar_contractions(&kp, cs)?;
                for (t, x) in sc.iter().enumerate() {
                    acc.scalars[t] += w * x;
                }
            }
        }
    }
    Ok(acc)
}
