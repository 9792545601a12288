//! The gyroaverage: mean of a phase-space function over the Larmor circle,
//! plus nested-quadrature oracles for averages of velocity-integral operators.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::{from_invariants, perp, to_invariants, Gyrophase, InvariantCoords, PhasePoint};
use crate::physics::CrossSection;
use crate::quadrature::{circle_nodes, GaussLegendre};

/// Number of uniform trapezoid nodes on the gyrophase circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GyroQuadratureConfig {
    n_alpha: usize,
}

impl GyroQuadratureConfig {
    pub fn new(n_alpha: usize) -> Result<Self> {
        if n_alpha < 4 {
            return Err(invalid("quadrature.n_alpha", "must be >= 4"));
        }
        Ok(GyroQuadratureConfig { n_alpha })
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }
}

impl Default for GyroQuadratureConfig {
    fn default() -> Self {
        GyroQuadratureConfig { n_alpha: 32 }
    }
}

/// Points of the Larmor circle through the invariant coordinates `inv`.
fn circle_points(
    inv: &InvariantCoords,
    omega_c: f64,
    cfg: &GyroQuadratureConfig,
) -> Result<Vec<PhasePoint>> {
    circle_nodes(cfg.n_alpha)
        .map(|a| from_invariants(inv, Gyrophase::new(a), omega_c))
        .collect()
}

pub fn gyroaverage_scalar<F>(u: &F, p: &PhasePoint, omega_c: f64, cfg: &GyroQuadratureConfig) -> Result<f64>
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let (inv, _) = to_invariants(p, omega_c)?;
    let pts = circle_points(&inv, omega_c, cfg)?;
    Ok(pts.iter().map(|q| u(q)).sum::<f64>() / cfg.n_alpha as f64)
}

/// Lifts a reduced density g(y, x3, r, v3) to a full-coordinate function in ker T.
pub fn constrained<G>(g: G, omega_c: f64) -> impl Fn(&PhasePoint) -> f64
where
    G: Fn(&InvariantCoords) -> f64,
{
    move |p: &PhasePoint| {
        let pv = perp(p.v_perp);
        let inv = InvariantCoords {
            y: [p.x_perp[0] + pv[0] / omega_c, p.x_perp[1] + pv[1] / omega_c],
            x3: p.x3,
            r: p.v_perp[0].hypot(p.v_perp[1]),
            v3: p.v3,
        };
        g(&inv)
    }
}

/// Inner velocity quadrature for the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityRule {
    /// Tensor Gauss-Legendre on [-half_width, half_width]^3.
    Box { half_width: f64, n: usize },
    /// Spherical coordinates centered at the outer velocity v: Gauss-Legendre
    /// in the radius and in cos(polar angle), trapezoid in azimuth.
    Centered {
        radius: f64,
        n_rho: usize,
        n_mu: usize,
        n_az: usize,
    },
}

impl VelocityRule {
    /// Box rule wide enough that a Maxwellian of thermal speed `vth` loses
    /// less than 1e-12 of its mass outside it.
    pub fn box_for_thermal_speed(vth: f64, n: usize) -> Self {
        VelocityRule::Box {
            half_width: 7.5 * vth,
            n,
        }
    }

    /// The same rule with every node count doubled.
    pub fn refined(&self) -> Self {
        match *self {
            VelocityRule::Box { half_width, n } => VelocityRule::Box {
                half_width,
                n: 2 * n,
            },
            VelocityRule::Centered {
                radius,
                n_rho,
                n_mu,
                n_az,
            } => VelocityRule::Centered {
                radius,
                n_rho: 2 * n_rho,
                n_mu: 2 * n_mu,
                n_az: 2 * n_az,
            },
        }
    }

    pub fn build(&self) -> Result<VelocityQuadrature> {
        match *self {
            VelocityRule::Box { half_width, n } => {
                if n < 2 || !(half_width > 0.0) {
                    return Err(invalid("quadrature.velocity", "box rule needs n >= 2 and half_width > 0"));
                }
                let (x, w) = GaussLegendre::new(n).on_interval(-half_width, half_width);
                let mut offsets = Vec::with_capacity(n * n * n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            offsets.push(([x[i], x[j], x[k]], w[i] * w[j] * w[k]));
                        }
                    }
                }
                Ok(VelocityQuadrature {
                    offsets,
                    centered: false,
                })
            }
            VelocityRule::Centered {
                radius,
                n_rho,
                n_mu,
                n_az,
            } => {
                if n_rho < 2 || n_mu < 2 || n_az < 4 || !(radius > 0.0) {
                    return Err(invalid(
                        "quadrature.velocity",
                        "centered rule needs n_rho, n_mu >= 2, n_az >= 4 and radius > 0",
                    ));
                }
                let (rho, wr) = GaussLegendre::new(n_rho).on_interval(0.0, radius);
                let gl_mu = GaussLegendre::new(n_mu);
                let wa = 2.0 * PI / n_az as f64;
                let az: Vec<(f64, f64)> = circle_nodes(n_az).map(|a| a.sin_cos()).collect();
                let mut offsets = Vec::with_capacity(n_rho * n_mu * n_az);
                for (&rh, &wrh) in rho.iter().zip(&wr) {
                    for (&mu, &wmu) in gl_mu.nodes.iter().zip(&gl_mu.weights) {
                        let st = (1.0 - mu * mu).sqrt();
                        for &(s, c) in &az {
                            offsets.push((
                                [rh * st * c, rh * st * s, rh * mu],
                                rh * rh * wrh * wmu * wa,
                            ));
                        }
                    }
                }
                Ok(VelocityQuadrature {
                    offsets,
                    centered: true,
                })
            }
        }
    }
}

/// Materialized velocity nodes and weights.
#[derive(Debug, Clone)]
pub struct VelocityQuadrature {
    offsets: Vec<([f64; 3], f64)>,
    centered: bool,
}

impl VelocityQuadrature {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Calls `visit(v', weight)` for every node of the rule attached to v.
    pub fn for_each(&self, v: [f64; 3], mut visit: impl FnMut([f64; 3], f64)) {
        for &(o, w) in &self.offsets {
            if self.centered {
                visit([v[0] + o[0], v[1] + o[1], v[2] + o[2]], w);
            } else {
                visit(o, w);
            }
        }
    }
}

/// Oracle for the gyroaverage of v -> int C(v, v') f(x, v') dv'.
pub fn gyroaverage_integral_operator<C, F>(
    c: &C,
    f: &F,
    p: &PhasePoint,
    omega_c: f64,
    cfg: &GyroQuadratureConfig,
    vq: &VelocityQuadrature,
) -> Result<f64>
where
    C: Fn([f64; 3], [f64; 3]) -> f64 + ?Sized,
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let (inv, _) = to_invariants(p, omega_c)?;
    let mut total = 0.0;
    for q in circle_points(&inv, omega_c, cfg)? {
        let v = q.velocity();
        let mut inner = 0.0;
        vq.for_each(v, |vp, w| {
            let qp = PhasePoint::new(q.x_perp, q.x3, [vp[0], vp[1]], vp[2]);
            inner += w * c(v, vp) * f(&qp);
        });
        total += inner;
    }
    Ok(total / cfg.n_alpha as f64)
}

/// A value together with the change observed when every node count is doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimated<T> {
    pub value: T,
    pub error_estimate: f64,
}

/// Runs the integral-operator oracle at `rule` and at its refinement.
pub fn gyroaverage_integral_operator_estimated<C, F>(
    c: &C,
    f: &F,
    p: &PhasePoint,
    omega_c: f64,
    cfg: &GyroQuadratureConfig,
    rule: &VelocityRule,
) -> Result<Estimated<f64>>
where
    C: Fn([f64; 3], [f64; 3]) -> f64 + ?Sized,
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let coarse = gyroaverage_integral_operator(c, f, p, omega_c, cfg, &rule.build()?)?;
    let fine_cfg = GyroQuadratureConfig::new(2 * cfg.n_alpha)?;
    let fine = gyroaverage_integral_operator(c, f, p, omega_c, &fine_cfg, &rule.refined().build()?)?;
    Ok(Estimated {
        value: fine,
        error_estimate: (fine - coarse).abs(),
    })
}

/// Planar weight vectors (w, 0) that can be contracted with the projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarWeight {
    /// (v_perp, 0)
    Vbar,
    /// (perp v_perp, 0)
    PerpVbar,
    /// (v'_perp, 0)
    VbarPrime,
    /// (perp v'_perp, 0)
    PerpVbarPrime,
}

impl PlanarWeight {
    fn eval(&self, v: [f64; 3], vp: [f64; 3]) -> [f64; 3] {
        match self {
            PlanarWeight::Vbar => [v[0], v[1], 0.0],
            PlanarWeight::PerpVbar => [v[1], -v[0], 0.0],
            PlanarWeight::VbarPrime => [vp[0], vp[1], 0.0],
            PlanarWeight::PerpVbarPrime => [vp[1], -vp[0], 0.0],
        }
    }

    pub const ALL: [PlanarWeight; 4] = [
        PlanarWeight::Vbar,
        PlanarWeight::VbarPrime,
        PlanarWeight::PerpVbar,
        PlanarWeight::PerpVbarPrime,
    ];
}

/// The six weight pairs whose projector contractions have closed forms, in order.
pub const SCALAR_PAIRS: [(PlanarWeight, PlanarWeight); 6] = [
    (PlanarWeight::Vbar, PlanarWeight::Vbar),
    (PlanarWeight::Vbar, PlanarWeight::PerpVbar),
    (PlanarWeight::PerpVbar, PlanarWeight::PerpVbar),
    (PlanarWeight::VbarPrime, PlanarWeight::Vbar),
    (PlanarWeight::VbarPrime, PlanarWeight::PerpVbar),
    (PlanarWeight::PerpVbarPrime, PlanarWeight::PerpVbar),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorVariant {
    /// The projector-weighted average itself (3x3).
    Projection,
    /// Projector applied to one planar weight (3-vector).
    Vector(PlanarWeight),
    /// Projector contracted with two planar weights (scalar).
    Scalar(PlanarWeight, PlanarWeight),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorValue {
    Matrix([[f64; 3]; 3]),
    Vector([f64; 3]),
    Scalar(f64),
}

/// Every projector-weighted average at one point, computed in a single pass.
/// Vectors follow `PlanarWeight::ALL`, scalars follow `SCALAR_PAIRS`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TensorAverages {
    pub matrix: [[f64; 3]; 3],
    pub vectors: [[f64; 3]; 4],
    pub scalars: [f64; 6],
}

impl TensorAverages {
    pub fn get(&self, variant: TensorVariant) -> TensorValue {
        match variant {
            TensorVariant::Projection => TensorValue::Matrix(self.matrix),
            TensorVariant::Vector(w) => {
                let k = PlanarWeight::ALL.iter().position(|x| *x == w).unwrap_or(0);
                TensorValue::Vector(self.vectors[k])
            }
            TensorVariant::Scalar(a, b) => {
                match SCALAR_PAIRS.iter().position(|&(x, y)| x == a && y == b) {
                    Some(k) => TensorValue::Scalar(self.scalars[k]),
                    None => TensorValue::Scalar(f64::NAN),
                }
            }
        }
    }
}

/// Nested-quadrature oracle for all averages of int f(x, v') sigma S(v - v') [w...] dv'.
pub fn gyroaverage_tensor_oracle_all<F>(
    f: &F,
    p: &PhasePoint,
    omega_c: f64,
    cs: &CrossSection,
    cfg: &GyroQuadratureConfig,
    vq: &VelocityQuadrature,
) -> Result<TensorAverages>
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let (inv, _) = to_invariants(p, omega_c)?;
    let mut acc = TensorAverages::default();
    for q in circle_points(&inv, omega_c, cfg)? {
        let v = q.velocity();
        vq.for_each(v, |vp, w| {
            let d = [v[0] - vp[0], v[1] - vp[1], v[2] - vp[2]];
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if d2 == 0.0 {
                return;
            }
            let qp = PhasePoint::new(q.x_perp, q.x3, [vp[0], vp[1]], vp[2]);
            let fw = f(&qp) * w * cs.eval(d2.sqrt());
            if fw == 0.0 {
                return;
            }
            // S(d) a = a - d (d.a)/|d|^2
            let proj = |a: [f64; 3]| -> [f64; 3] {
                let s = (d[0] * a[0] + d[1] * a[1] + d[2] * a[2]) / d2;
                [a[0] - s * d[0], a[1] - s * d[1], a[2] - s * d[2]]
            };
            for i in 0..3 {
                for j in 0..3 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    acc.matrix[i][j] += fw * (id - d[i] * d[j] / d2);
                }
            }
            for (k, pw) in PlanarWeight::ALL.iter().enumerate() {
                let s = proj(pw.eval(v, vp));
                for c in 0..3 {
                    acc.vectors[k][c] += fw * s[c];
                }
            }
            for (k, (a, b)) in SCALAR_PAIRS.iter().enumerate() {
                let sa = proj(a.eval(v, vp));
                let wb = b.eval(v, vp);
                acc.scalars[k] += fw * (sa[0] * wb[0] + sa[1] * wb[1] + sa[2] * wb[2]);
            }
        });
    }
    let n = cfg.n_alpha as f64;
    for row in acc.matrix.iter_mut() {
        for x in row.iter_mut() {
            *x /= n;
        }
    }
    for vec in acc.vectors.iter_mut() {
        for x in vec.iter_mut() {
            *x /= n;
        }
    }
    for x in acc.scalars.iter_mut() {
        *x /= n;
    }
    Ok(acc)
}

pub fn gyroaverage_tensor_oracle<F>(
    f: &F,
    variant: TensorVariant,
    p: &PhasePoint,
    omega_c: f64,
    cs: &CrossSection,
    cfg: &GyroQuadratureConfig,
    vq: &VelocityQuadrature,
) -> Result<TensorValue>
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    Ok(gyroaverage_tensor_oracle_all(f, p, omega_c, cs, cfg, vq)?.get(variant))
}

/// Velocity gradient and Hessian of `f` at `p` by central differences with step `h`.
fn velocity_derivatives<F>(f: &F, p: &PhasePoint, h: f64) -> ([f64; 3], [[f64; 3]; 3])
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let v = p.velocity();
    let at = |d: [f64; 3]| f(&PhasePoint::new(p.x_perp, p.x3, [v[0] + d[0], v[1] + d[1]], v[2] + d[2]));
    let e = |i: usize, s: f64| {
        let mut d = [0.0; 3];
        d[i] = s;
        d
    };
    let add = |a: [f64; 3], b: [f64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let f0 = f(p);
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        let (fp, fm) = (at(e(i, h)), at(e(i, -h)));
        grad[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let s = at(add(e(i, h), e(j, h))) - at(add(e(i, h), e(j, -h))) - at(add(e(i, -h), e(j, h))) + at(add(e(i, -h), e(j, -h)));
            hess[i][j] = s / (4.0 * h * h);
            hess[j][i] = hess[i][j];
        }
    }
    (grad, hess)
}

/// Full-coordinate Landau rate Q(f, f)(x, v) with the velocity divergence expanded:
/// int sigma(|w|) [S(w) : (f' D2 f - Df (x) D'f') - 2 w . (f' Df - f D'f') / |w|^2] dv',
/// w = v - v', S(w) the projector normal to w. Derivatives by central differences.
pub fn fpl_full_rate<F>(f: &F, p: &PhasePoint, cs: &CrossSection, vq: &VelocityQuadrature) -> f64
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let v = p.velocity();
    let f0 = f(p);
    let (g, hess) = velocity_derivatives(f, p, 1e-3);
    let mut total = 0.0;
    vq.for_each(v, |vp, wt| {
        let w = [v[0] - vp[0], v[1] - vp[1], v[2] - vp[2]];
        let w2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        if w2 == 0.0 {
            return;
        }
        let q = PhasePoint::new(p.x_perp, p.x3, [vp[0], vp[1]], vp[2]);
        let fp = f(&q);
        let (gp, _) = velocity_derivatives(f, &q, 1e-5);
        let mut contraction = 0.0;
        let mut drag = 0.0;
        for i in 0..3 {
            drag += w[i] * (fp * g[i] - f0 * gp[i]);
            for j in 0..3 {
                let s = if i == j { 1.0 } else { 0.0 } - w[i] * w[j] / w2;
                contraction += s * (fp * hess[i][j] - g[i] * gp[j]);
            }
        }
        total += wt * cs.eval(w2.sqrt()) * (contraction - 2.0 * drag / w2);
    });
    total
}

/// Oracle for the gyroaverage of the full-coordinate Landau rate at `p`.
pub fn gyroaverage_fpl_oracle<F>(f: &F, p: &PhasePoint, omega_c: f64, cs: &CrossSection, cfg: &GyroQuadratureConfig, vq: &VelocityQuadrature) -> Result<f64>
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    gyroaverage_scalar(&|q: &PhasePoint| fpl_full_rate(f, q, cs, vq), p, omega_c, cfg)
}
