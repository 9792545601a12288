//! Collisionless check of the guiding-center drift: the full fast
//! characteristics at small epsilon against the averaged drift trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{cyclotron_period, flow, from_invariants, to_invariants, Gyrophase, InvariantCoords, PhasePoint};
use crate::physics::{averaged_field_components, PlasmaParams, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub x0: [f64; 3],
    pub v0: [f64; 3],
    pub t_final: f64,
    /// Integrator steps per fast gyration.
    #[serde(default = "default_steps")]
    pub steps_per_period: usize,
    /// Gyrophase nodes for the averaged field.
    #[serde(default = "default_nodes")]
    pub gyro_nodes: usize,
}

fn default_steps() -> usize {
    64
}

fn default_nodes() -> usize {
    64
}

impl DriftConfig {
    pub fn new(x0: [f64; 3], v0: [f64; 3], t_final: f64) -> Self {
        DriftConfig {
            x0,
            v0,
            t_final,
            steps_per_period: default_steps(),
            gyro_nodes: default_nodes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("drift.t_final", "must be > 0"));
        }
        if self.steps_per_period < 8 || self.steps_per_period % 2 != 0 {
            return Err(invalid("drift.steps_per_period", "must be even and >= 8"));
        }
        if self.gyro_nodes < 4 {
            return Err(invalid("drift.gyro_nodes", "must be >= 4"));
        }
        if self.v0[0].hypot(self.v0[1]) == 0.0 {
            return Err(invalid("drift.v0", "perpendicular velocity must be nonzero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftRow {
    pub eps: f64,
    /// Largest distance between the filtered position and the averaged trajectory.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub rows: Vec<DriftRow>,
    /// log(e_k / e_{k+1}) / log(eps_k / eps_{k+1}); NaN when an error is at roundoff level.
    pub orders: Vec<f64>,
}

impl DriftReport {
    /// Smallest defined order; infinite when every order is undefined.
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const YOSHIDA: [f64; 3] = {
    // w1 = 1 / (2 - 2^(1/3)), w0 = -2^(1/3) w1.
    let c = 1.259_921_049_894_873_2;
    let w1 = 1.0 / (2.0 - c);
    [w1, -c * w1, w1]
};

/// Fast characteristics: dx/dt = v / eps in the plane, dx3/dt = v3,
/// dv/dt = (q/m) E + (omega_c / eps) perp(v).
struct FastSystem<'a> {
    pot: &'a Potential,
    qm: f64,
    omega_c: f64,
    eps: f64,
}

impl FastSystem<'_> {
    fn gyrate(&self, t: f64, p: &PhasePoint) -> Result<PhasePoint> {
        let mut q = flow(t / self.eps, p, self.omega_c)?;
        q.x3 += t * p.v3;
        Ok(q)
    }

    fn kick(&self, t: f64, p: &mut PhasePoint) {
        let e = self.pot.efield(p.position());
        p.v_perp[0] += t * self.qm * e[0];
        p.v_perp[1] += t * self.qm * e[1];
        p.v3 += t * self.qm * e[2];
    }

    /// Fourth-order composition of the gyration-exact Strang step.
    fn step(&self, h: f64, p: &PhasePoint) -> Result<PhasePoint> {
        let mut q = *p;
        for w in YOSHIDA {
            let s = w * h;
            q = self.gyrate(0.5 * s, &q)?;
            self.kick(s, &mut q);
            q = self.gyrate(0.5 * s, &q)?;
        }
        Ok(q)
    }
}

/// Right-hand side of the averaged model for (y1, y2, x3, v3) at fixed r.
fn averaged_rhs(s: [f64; 4], r: f64, pot: &Potential, params: &PlasmaParams, nodes: usize) -> Result<[f64; 4]> {
    let inv = InvariantCoords {
        y: [s[0], s[1]],
        x3: s[2],
        r,
        v3: s[3],
    };
    let p = from_invariants(&inv, Gyrophase::new(0.0), params.omega_c())?;
    let (pe, e3) = averaged_field_components(&p, pot, params, nodes)?;
    Ok([pe[0] / params.b, pe[1] / params.b, s[3], params.q / params.m * e3])
}

fn rk4_step(s: [f64; 4], h: f64, r: f64, pot: &Potential, params: &PlasmaParams, nodes: usize) -> Result<[f64; 4]> {
    let add = |a: [f64; 4], k: [f64; 4], c: f64| std::array::from_fn::<f64, 4, _>(|i| a[i] + c * k[i]);
    let k1 = averaged_rhs(s, r, pot, params, nodes)?;
    let k2 = averaged_rhs(add(s, k1, 0.5 * h), r, pot, params, nodes)?;
    let k3 = averaged_rhs(add(s, k2, 0.5 * h), r, pot, params, nodes)?;
    let k4 = averaged_rhs(add(s, k3, h), r, pot, params, nodes)?;
    Ok(std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Averaged guiding-center trajectory sampled every `h` for `n` steps.
pub fn averaged_trajectory(pot: &Potential, params: &PlasmaParams, x0: [f64; 3], v0: [f64; 3], h: f64, n: usize, nodes: usize) -> Result<Vec<[f64; 2]>> {
    let p0 = PhasePoint::new([x0[0], x0[1]], x0[2], [v0[0], v0[1]], v0[2]);
    let (inv, _) = to_invariants(&p0, params.omega_c())?;
    let mut s = [inv.y[0], inv.y[1], inv.x3, inv.v3];
    let mut out = Vec::with_capacity(n + 1);
    out.push([s[0], s[1]]);
    for _ in 0..n {
        s = rk4_step(s, h, inv.r, pot, params, nodes)?;
        out.push([s[0], s[1]]);
    }
    Ok(out)
}

/// Error of the gyro-filtered fast position against the averaged drift for one epsilon.
pub fn drift_error(pot: &Potential, params: &PlasmaParams, eps: f64, cfg: &DriftConfig) -> Result<f64> {
    let wc = params.omega_c();
    let per = cfg.steps_per_period;
    let h = eps * cyclotron_period(wc) / per as f64;
    let n_out = (cfg.t_final / h).floor() as usize;
    let half = per / 2;
    let sys = FastSystem {
        pot,
        qm: params.q / params.m,
        omega_c: wc,
        eps,
    };
    let mut p = PhasePoint::new([cfg.x0[0], cfg.x0[1]], cfg.x0[2], [cfg.v0[0], cfg.v0[1]], cfg.v0[2]);
    let mut xs = Vec::with_capacity(n_out + half + 1);
    xs.push(p.x_perp);
    for _ in 0..n_out + half {
        p = sys.step(h, &p)?;
        xs.push(p.x_perp);
    }
    let avg = averaged_trajectory(pot, params, cfg.x0, cfg.v0, h, n_out, cfg.gyro_nodes)?;
    let mut err = 0.0f64;
    for j in half..=n_out {
        // One-period trapezoid average centred at step j.
        let mut c = [0.0; 2];
        for (k, x) in xs[j - half..=j + half].iter().enumerate() {
            let w = if k == 0 || k == per { 0.5 } else { 1.0 };
            c[0] += w * x[0];
            c[1] += w * x[1];
        }
        let d = [c[0] / per as f64 - avg[j][0], c[1] / per as f64 - avg[j][1]];
        err = err.max(d[0].hypot(d[1]));
    }
    Ok(err)
}

pub fn drift_check(pot: &Potential, params: &PlasmaParams, eps_list: &[f64], cfg: &DriftConfig) -> Result<DriftReport> {
    cfg.validate()?;
    if eps_list.is_empty() {
        return Err(invalid("eps", "list is empty"));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(invalid("eps", "values must be positive"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps", "values must be strictly decreasing"));
    }
    let rows = eps_list
        .iter()
        .map(|&eps| Ok(DriftRow { eps, error: drift_error(pot, params, eps, cfg)? }))
        .collect::<Result<Vec<_>>>()?;
    // Errors below this are integration roundoff, and their ratios carry no order.
    let floor = 1e-12 * (cfg.x0[0].hypot(cfg.x0[1]) + cfg.v0[0].hypot(cfg.v0[1]) / params.omega_c().abs());
    let orders = rows
        .windows(2)
        .map(|w| {
            if w[0].error <= floor || w[1].error <= floor {
                f64::NAN
            } else {
                (w[0].error / w[1].error).ln() / (w[0].eps / w[1].eps).ln()
            }
        })
        .collect();
    Ok(DriftReport { rows, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: [f64; 3] = [1e-1, 5e-2, 2.5e-2];

    #[test]
    fn uniform_field_converges_at_first_order() {
        let params = PlasmaParams::default();
        let pot = Potential::UniformGradient { grad: [0.3, -0.2, 0.1] };
        let cfg = DriftConfig::new([0.1, 0.2, 0.0], [1.0, 0.5, 0.3], 1.0);
        let rep = drift_check(&pot, &params, &EPS, &cfg).unwrap();
        assert!(rep.min_order() >= 1.0 - 1e-6, "{rep:?}");
        // The filtered orbit is offset from the center by eps E / (B omega_c).
        let e = 0.3f64.hypot(0.2);
        let expect = EPS[2] * e / (params.b * params.omega_c());
        assert!((rep.rows[2].error - expect).abs() < 0.1 * expect, "{rep:?} vs {expect}");
    }

    #[test]
    fn zero_field_has_no_error() {
        let params = PlasmaParams::default();
        let cfg = DriftConfig::new([0.1, 0.2, 0.0], [1.0, 0.5, 0.3], 1.0);
        let rep = drift_check(&Potential::Zero, &params, &EPS, &cfg).unwrap();
        for r in &rep.rows {
            assert!(r.error < 1e-13, "{rep:?}");
        }
        assert!(rep.orders.iter().all(|o| o.is_nan()), "{rep:?}");
    }

    #[test]
    fn harmonic_drift_is_a_rotation() {
        let params = PlasmaParams::default();
        let pot = Potential::Harmonic { k_perp: 0.5, k_par: 0.0 };
        let traj = averaged_trajectory(&pot, &params, [1.0, 0.0, 0.0], [0.3, 0.2, 0.0], 0.01, 500, 64).unwrap();
        let r0 = traj[0][0].hypot(traj[0][1]);
        for y in &traj {
            assert!((y[0].hypot(y[1]) - r0).abs() < 1e-9 * r0);
        }
        let end = traj.last().unwrap();
        assert!((end[0] - traj[0][0]).abs() > 0.1);
        let cfg = DriftConfig::new([1.0, 0.0, 0.0], [0.3, 0.2, 0.0], 1.0);
        let rep = drift_check(&pot, &params, &EPS, &cfg).unwrap();
        assert!(rep.rows.windows(2).all(|w| w[1].error < w[0].error), "{rep:?}");
    }

    #[test]
    fn eps_list_must_decrease() {
        let cfg = DriftConfig::new([0.0; 3], [1.0, 0.0, 0.0], 1.0);
        let err = drift_check(&Potential::Zero, &PlasmaParams::default(), &[0.1, 0.2], &cfg).unwrap_err();
        assert_eq!(err.to_string(), "eps: values must be strictly decreasing");
    }
}
