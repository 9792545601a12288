//! Plasma parameters, the Maxwellian, cross sections and analytic potentials.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{perp, PhasePoint};
use crate::gyroaverage::{gyroaverage_scalar, GyroQuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaParams {
    pub q: f64,
    pub m: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub theta: f64,
    pub tau: f64,
}

impl Default for PlasmaParams {
    fn default() -> Self {
        PlasmaParams {
            q: 1.0,
            m: 1.0,
            b: 1.0,
            theta: 1.0,
            tau: 1.0,
        }
    }
}

impl PlasmaParams {
    pub fn new(q: f64, m: f64, b: f64, theta: f64, tau: f64) -> Result<Self> {
        let p = PlasmaParams { q, m, b, theta, tau };
        p.validate("plasma")?;
        Ok(p)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let f = |name: &str| format!("{prefix}.{name}");
        if !(self.q.is_finite() && self.q != 0.0) {
            return Err(invalid(f("q"), "must be nonzero"));
        }
        for (name, v) in [("m", self.m), ("B", self.b), ("theta", self.theta), ("tau", self.tau)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(f(name), "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn omega_c(&self) -> f64 {
        self.q * self.b / self.m
    }

    /// Thermal speed sqrt(theta / m).
    pub fn thermal_speed(&self) -> f64 {
        (self.theta / self.m).sqrt()
    }
}

/// Normalized Maxwellian with zero mean velocity.
pub fn maxwellian(v: [f64; 3], params: &PlasmaParams) -> f64 {
    maxwellian_rv(v[0].hypot(v[1]), v[2], params)
}

/// The Maxwellian written in gyro-invariant variables (r = |v_perp|, v3).
pub fn maxwellian_rv(r: f64, v3: f64, params: &PlasmaParams) -> f64 {
    let a = params.m / params.theta;
    (a / (2.0 * PI)).powf(1.5) * (-0.5 * a * (r * r + v3 * v3)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SigmaFamily {
    Constant { sigma0: f64 },
    PowerLaw { sigma0: f64, gamma: f64, delta: f64 },
}

impl SigmaFamily {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            SigmaFamily::Constant { sigma0 } => sigma0,
            SigmaFamily::PowerLaw {
                sigma0,
                gamma,
                delta,
            } => sigma0 * (s * s + delta * delta).powf(0.5 * gamma),
        }
    }
}

/// A cross-section family together with the bounds it satisfies on the
/// relative-speed range [0, s_max] reachable on the velocity box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    family: SigmaFamily,
    s_max: f64,
    lower: f64,
    upper: f64,
}

impl CrossSection {
    pub fn new(family: SigmaFamily, s_max: f64) -> Result<Self> {
        match family {
            SigmaFamily::Constant { sigma0 } => {
                if !(sigma0.is_finite() && sigma0 > 0.0) {
                    return Err(invalid("cross_section.sigma0", "must be > 0"));
                }
            }
            SigmaFamily::PowerLaw {
                sigma0,
                gamma,
                delta,
            } => {
                if !(sigma0.is_finite() && sigma0 > 0.0) {
                    return Err(invalid("cross_section.sigma0", "must be > 0"));
                }
                if !(gamma.is_finite() && gamma >= 0.0) {
                    return Err(invalid("cross_section.gamma", "must be >= 0"));
                }
                if !(delta.is_finite() && delta >= 0.0) {
                    return Err(invalid("cross_section.delta", "must be >= 0"));
                }
                if gamma > 0.0 && delta == 0.0 {
                    return Err(invalid(
                        "cross_section.delta",
                        "must be > 0 when gamma > 0, otherwise sigma vanishes at zero relative speed",
                    ));
                }
            }
        }
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(invalid("cross_section.s_max", "must be > 0"));
        }
        // Both families are monotone non-decreasing in s.
        let lower = family.eval(0.0);
        let upper = family.eval(s_max);
        if !(lower > 0.0 && upper.is_finite()) {
            return Err(invalid("cross_section", "bounds not attained on the velocity box"));
        }
        Ok(CrossSection {
            family,
            s_max,
            lower,
            upper,
        })
    }

    pub fn constant(sigma0: f64) -> Result<Self> {
        CrossSection::new(SigmaFamily::Constant { sigma0 }, 1.0e6)
    }

    pub fn family(&self) -> SigmaFamily {
        self.family
    }

    /// Lower bound s0 on the configured range.
    pub fn s0(&self) -> f64 {
        self.lower
    }

    /// Upper bound S0 on the configured range.
    pub fn big_s0(&self) -> f64 {
        self.upper
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.family.eval(s)
    }
}

/// Evaluate the cross section at relative speed s.
pub fn sigma_eval(s: f64, cs: &CrossSection) -> f64 {
    cs.eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// phi = grad . x
    UniformGradient { grad: [f64; 3] },
    /// phi = k_perp |x_perp|^2 / 2 + k_par x3^2 / 2
    Harmonic { k_perp: f64, k_par: f64 },
    /// phi = a_perp cos(k_perp . x_perp) + a_par cos(k_par x3)
    Separable {
        a_perp: f64,
        k_perp: [f64; 2],
        a_par: f64,
        k_par: f64,
    },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Zero
    }
}

impl Potential {
    pub fn phi(&self, x: [f64; 3]) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::UniformGradient { grad } => grad[0] * x[0] + grad[1] * x[1] + grad[2] * x[2],
            Potential::Harmonic { k_perp, k_par } => {
                0.5 * k_perp * (x[0] * x[0] + x[1] * x[1]) + 0.5 * k_par * x[2] * x[2]
            }
            Potential::Separable {
                a_perp,
                k_perp,
                a_par,
                k_par,
            } => a_perp * (k_perp[0] * x[0] + k_perp[1] * x[1]).cos() + a_par * (k_par * x[2]).cos(),
        }
    }

    /// The part of the potential that depends on x_perp alone.
    pub fn phi_perp(&self, x: [f64; 2]) -> f64 {
        match *self {
            Potential::Separable { a_perp, k_perp, .. } => {
                a_perp * (k_perp[0] * x[0] + k_perp[1] * x[1]).cos()
            }
            Potential::Harmonic { k_perp, .. } => 0.5 * k_perp * (x[0] * x[0] + x[1] * x[1]),
            Potential::UniformGradient { grad } => grad[0] * x[0] + grad[1] * x[1],
            Potential::Zero => 0.0,
        }
    }

    pub fn efield(&self, x: [f64; 3]) -> [f64; 3] {
        match *self {
            Potential::Zero => [0.0; 3],
            Potential::UniformGradient { grad } => [-grad[0], -grad[1], -grad[2]],
            Potential::Harmonic { k_perp, k_par } => [-k_perp * x[0], -k_perp * x[1], -k_par * x[2]],
            Potential::Separable {
                a_perp,
                k_perp,
                a_par,
                k_par,
            } => {
                let s = (k_perp[0] * x[0] + k_perp[1] * x[1]).sin();
                [
                    a_perp * k_perp[0] * s,
                    a_perp * k_perp[1] * s,
                    a_par * k_par * (k_par * x[2]).sin(),
                ]
            }
        }
    }

    /// Sup norms of the perpendicular and parallel parts, when they are bounded.
    pub fn sup_norms(&self) -> Option<(f64, f64)> {
        match *self {
            Potential::Zero => Some((0.0, 0.0)),
            Potential::Separable { a_perp, a_par, .. } => Some((a_perp.abs(), a_par.abs())),
            _ => None,
        }
    }

    pub fn is_periodic_compatible(&self) -> bool {
        matches!(self, Potential::Zero | Potential::Separable { .. })
    }
}

/// Electric field of the potential at x.
pub fn efield(x: [f64; 3], pot: &Potential) -> [f64; 3] {
    pot.efield(x)
}

/// Gyroaverages of the rotated perpendicular field (E2, -E1) and of E3 along
/// the Larmor circle through p.
pub fn averaged_field_components(
    p: &PhasePoint,
    pot: &Potential,
    params: &PlasmaParams,
    n_nodes: usize,
) -> Result<([f64; 2], f64)> {
    let cfg = GyroQuadratureConfig::new(n_nodes)?;
    let wc = params.omega_c();
    let e1 = gyroaverage_scalar(&|q: &PhasePoint| pot.efield(q.position())[0], p, wc, &cfg)?;
    let e2 = gyroaverage_scalar(&|q: &PhasePoint| pot.efield(q.position())[1], p, wc, &cfg)?;
    let e3 = gyroaverage_scalar(&|q: &PhasePoint| pot.efield(q.position())[2], p, wc, &cfg)?;
    Ok((perp([e1, e2]), e3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::flow;
    use crate::quadrature::GaussHermite;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn maxwellian_at_origin() {
        let p = PlasmaParams::default();
        assert_abs_diff_eq!(maxwellian([0.0; 3], &p), (2.0 * PI).powf(-1.5), epsilon = 1e-15);
        assert_abs_diff_eq!(maxwellian([0.0; 3], &p), 0.0634936359342, epsilon = 1e-12);
    }

    #[test]
    fn maxwellian_has_unit_mass() {
        let p = PlasmaParams::new(1.0, 2.0, 1.0, 0.7, 1.0).unwrap();
        // Substituting v = sqrt(2 theta / m) x turns each axis into exp(-x^2).
        let gh = GaussHermite::new(20);
        let sc = (2.0 * p.theta / p.m).sqrt();
        let mut total = 0.0;
        for (&xi, &wi) in gh.nodes.iter().zip(&gh.weights) {
            for (&xj, &wj) in gh.nodes.iter().zip(&gh.weights) {
                for (&xk, &wk) in gh.nodes.iter().zip(&gh.weights) {
                    let v = [sc * xi, sc * xj, sc * xk];
                    let e = (xi * xi + xj * xj + xk * xk).exp();
                    total += wi * wj * wk * e * maxwellian(v, &p) * sc.powi(3);
                }
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn params_validation_names_field() {
        let err = PlasmaParams::new(1.0, -1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert_eq!(err.to_string(), "plasma.m: must be > 0");
        assert!(PlasmaParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PlasmaParams::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sigma_examples() {
        let c = CrossSection::constant(1.0).unwrap();
        assert_eq!(sigma_eval(3.7, &c), 1.0);
        let pl = CrossSection::new(
            SigmaFamily::PowerLaw {
                sigma0: 1.5,
                gamma: 1.0,
                delta: 1e-3,
            },
            10.0,
        )
        .unwrap();
        assert_abs_diff_eq!(sigma_eval(2.0, &pl), 2.0 * 1.5, epsilon = 1e-6);
        let exact = CrossSection::new(
            SigmaFamily::PowerLaw {
                sigma0: 1.5,
                gamma: 0.0,
                delta: 0.0,
            },
            10.0,
        )
        .unwrap();
        assert_eq!(sigma_eval(2.0, &exact), 1.5);
    }

    #[test]
    fn sigma_bounds_hold_on_box() {
        let cs = CrossSection::new(
            SigmaFamily::PowerLaw {
                sigma0: 0.8,
                gamma: 1.5,
                delta: 0.2,
            },
            12.0,
        )
        .unwrap();
        let n = 2000;
        for i in 0..=n {
            let s = cs.s_max() * i as f64 / n as f64;
            let v = cs.eval(s);
            assert!(v >= cs.s0() && v <= cs.big_s0() * (1.0 + 1e-14));
        }
        assert!(CrossSection::new(
            SigmaFamily::PowerLaw {
                sigma0: 1.0,
                gamma: 1.0,
                delta: 0.0
            },
            1.0
        )
        .is_err());
        assert!(CrossSection::new(SigmaFamily::Constant { sigma0: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn efield_examples() {
        let pot = Potential::UniformGradient {
            grad: [0.0, 2.0, 0.0],
        };
        assert_eq!(efield([1.0, 2.0, 3.0], &pot), [0.0, -2.0, 0.0]);
        let h = Potential::Harmonic {
            k_perp: 1.0,
            k_par: 0.0,
        };
        assert_eq!(efield([1.5, -2.0, 3.0], &h), [-1.5, 2.0, 0.0]);
    }

    fn fd_gradient(pot: &Potential, x: [f64; 3], h: f64) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (k, gk) in g.iter_mut().enumerate() {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            *gk = -(pot.phi(a) - pot.phi(b)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn efield_matches_central_differences() {
        let pots = [
            Potential::UniformGradient {
                grad: [0.3, -1.0, 0.5],
            },
            Potential::Harmonic {
                k_perp: 0.7,
                k_par: 1.3,
            },
            Potential::Separable {
                a_perp: 0.4,
                k_perp: [0.9, -0.3],
                a_par: 0.2,
                k_par: 1.1,
            },
        ];
        let x = [0.3, -0.8, 1.4];
        for pot in &pots {
            let e = efield(x, pot);
            let coarse = fd_gradient(pot, x, 1e-2);
            let fine = fd_gradient(pot, x, 5e-3);
            for k in 0..3 {
                let ec = (coarse[k] - e[k]).abs();
                let ef = (fine[k] - e[k]).abs();
                assert!(ef < 1e-5);
                assert!(ec < 1e-12 || ef < 0.3 * ec);
            }
        }
    }

    #[test]
    fn averaged_field_examples() {
        let params = PlasmaParams::default();
        let p = PhasePoint::new([0.2, 0.4], 0.5, [0.7, -0.3], 0.1);
        let pot = Potential::UniformGradient {
            grad: [0.0, 1.5, 0.0],
        };
        let (ep, e3) = averaged_field_components(&p, &pot, &params, 16).unwrap();
        assert_abs_diff_eq!(ep[0], -1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ep[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e3, 0.0, epsilon = 1e-14);

        let harm = Potential::Harmonic {
            k_perp: 1.0,
            k_par: 1.0,
        };
        let (ep, e3) = averaged_field_components(&p, &harm, &params, 16).unwrap();
        let y = [p.x_perp[0] + p.v_perp[1], p.x_perp[1] - p.v_perp[0]];
        assert_abs_diff_eq!(ep[0], -y[1], epsilon = 1e-13);
        assert_abs_diff_eq!(ep[1], y[0], epsilon = 1e-13);
        assert_abs_diff_eq!(e3, -p.x3, epsilon = 1e-14);

        assert!(averaged_field_components(&p, &harm, &params, 3).is_err());
    }

    proptest! {
        #[test]
        fn maxwellian_is_gyro_invariant(v in proptest::array::uniform3(-3.0f64..3.0), s in -10.0f64..10.0) {
            let params = PlasmaParams::new(-1.0, 1.3, 2.0, 0.8, 1.0).unwrap();
            let p = PhasePoint::new([0.1, 0.2], 0.0, [v[0], v[1]], v[2]);
            let q = flow(s, &p, params.omega_c()).unwrap();
            let a = maxwellian(p.velocity(), &params);
            let b = maxwellian(q.velocity(), &params);
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300) * 10.0);
        }

        #[test]
        fn averaged_field_is_flow_invariant(p in proptest::array::uniform6(-2.0f64..2.0), s in -5.0f64..5.0) {
            let params = PlasmaParams::new(1.0, 1.0, 1.7, 1.0, 1.0).unwrap();
            let pot = Potential::Separable { a_perp: 0.5, k_perp: [1.1, 0.4], a_par: 0.3, k_par: 0.9 };
            let p = PhasePoint::from_array(p);
            let q = flow(s, &p, params.omega_c()).unwrap();
            let (a, a3) = averaged_field_components(&p, &pot, &params, 48).unwrap();
            let (b, b3) = averaged_field_components(&q, &pot, &params, 48).unwrap();
            prop_assert!((a[0] - b[0]).abs() < 1e-12);
            prop_assert!((a[1] - b[1]).abs() < 1e-12);
            prop_assert!((a3 - b3).abs() < 1e-14);
            // E3 depends on x3 alone, so its average is pointwise.
            prop_assert!((a3 - pot.efield(p.position())[2]).abs() < 1e-14);
        }
    }
}
