//! Cyclotron flow in a homogeneous field along e3, its invariants, and the
//! commuting derivations that straighten it.
//!
//! Six-vectors are ordered (x1, x2, x3, v1, v2, v3).

use std::f64::consts::PI;

use crate::error::{GyroError, Result};

pub type Vec2 = [f64; 2];
pub type Vec6 = [f64; 6];

/// The quarter turn w -> (w2, -w1).
#[inline]
pub fn perp(w: Vec2) -> Vec2 {
    [w[1], -w[0]]
}

#[inline]
pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dot6(a: &Vec6, b: &Vec6) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Counter-clockwise rotation R(alpha) applied to w.
pub fn rotate(alpha: f64, w: Vec2) -> Vec2 {
    let (s, c) = alpha.sin_cos();
    [c * w[0] - s * w[1], s * w[0] + c * w[1]]
}

/// A full position-velocity state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub x_perp: Vec2,
    pub x3: f64,
    pub v_perp: Vec2,
    pub v3: f64,
}

impl PhasePoint {
    pub fn new(x_perp: Vec2, x3: f64, v_perp: Vec2, v3: f64) -> Self {
        PhasePoint {
            x_perp,
            x3,
            v_perp,
            v3,
        }
    }

    pub fn from_array(a: Vec6) -> Self {
        PhasePoint::new([a[0], a[1]], a[2], [a[3], a[4]], a[5])
    }

    pub fn to_array(&self) -> Vec6 {
        [
            self.x_perp[0],
            self.x_perp[1],
            self.x3,
            self.v_perp[0],
            self.v_perp[1],
            self.v3,
        ]
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x_perp[0], self.x_perp[1], self.x3]
    }

    pub fn velocity(&self) -> [f64; 3] {
        [self.v_perp[0], self.v_perp[1], self.v3]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }
}

/// Guiding-center coordinates: the flow invariants psi_1..psi_5.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantCoords {
    pub y: Vec2,
    pub x3: f64,
    pub r: f64,
    pub v3: f64,
}

/// Angle of the perpendicular velocity, kept in [0, 2 pi).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gyrophase {
    alpha: f64,
}

impl Gyrophase {
    pub fn new(alpha: f64) -> Self {
        Gyrophase {
            alpha: alpha.rem_euclid(2.0 * PI),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// psi_0 = -alpha / omega_c.
    pub fn psi0(&self, omega_c: f64) -> f64 {
        -self.alpha / omega_c
    }
}

fn check_omega(omega_c: f64) -> Result<()> {
    if omega_c == 0.0 || !omega_c.is_finite() {
        Err(GyroError::ZeroCyclotronFrequency)
    } else {
        Ok(())
    }
}

/// Exact solution of the fast flow after time s, starting from p.
pub fn flow(s: f64, p: &PhasePoint, omega_c: f64) -> Result<PhasePoint> {
    check_omega(omega_c)?;
    let v_s = rotate(-omega_c * s, p.v_perp);
    let a = perp(p.v_perp);
    let b = perp(v_s);
    Ok(PhasePoint {
        x_perp: [
            p.x_perp[0] + (a[0] - b[0]) / omega_c,
            p.x_perp[1] + (a[1] - b[1]) / omega_c,
        ],
        x3: p.x3,
        v_perp: v_s,
        v3: p.v3,
    })
}

/// Cyclotron period 2 pi / |omega_c|.
pub fn cyclotron_period(omega_c: f64) -> f64 {
    2.0 * PI / omega_c.abs()
}

pub fn to_invariants(p: &PhasePoint, omega_c: f64) -> Result<(InvariantCoords, Gyrophase)> {
    check_omega(omega_c)?;
    let pv = perp(p.v_perp);
    let r = norm2(p.v_perp);
    let alpha = if r == 0.0 {
        0.0
    } else {
        p.v_perp[1].atan2(p.v_perp[0])
    };
    Ok((
        InvariantCoords {
            y: [p.x_perp[0] + pv[0] / omega_c, p.x_perp[1] + pv[1] / omega_c],
            x3: p.x3,
            r,
            v3: p.v3,
        },
        Gyrophase::new(alpha),
    ))
}

pub fn from_invariants(inv: &InvariantCoords, g: Gyrophase, omega_c: f64) -> Result<PhasePoint> {
    check_omega(omega_c)?;
    if inv.r < 0.0 || inv.r.is_nan() {
        return Err(GyroError::domain("from_invariants", format!("r = {}", inv.r)));
    }
    let (s, c) = g.alpha().sin_cos();
    let v = [inv.r * c, inv.r * s];
    let pv = perp(v);
    Ok(PhasePoint {
        x_perp: [inv.y[0] - pv[0] / omega_c, inv.y[1] - pv[1] / omega_c],
        x3: inv.x3,
        v_perp: v,
        v3: inv.v3,
    })
}

/// Value of the invariant psi_i at p (psi_0 uses the branch alpha in [0, 2 pi)).
pub fn psi(i: usize, p: &PhasePoint, omega_c: f64) -> Result<f64> {
    let (inv, g) = to_invariants(p, omega_c)?;
    Ok(match i {
        0 => g.psi0(omega_c),
        1 => inv.y[0],
        2 => inv.y[1],
        3 => inv.x3,
        4 => inv.r,
        5 => inv.v3,
        _ => return Err(GyroError::domain("psi", format!("index {i} not in 0..=5"))),
    })
}

/// Coefficients of the derivation b^i . grad_{x,v}.
pub fn b_field(i: usize, p: &PhasePoint, omega_c: f64) -> Result<Vec6> {
    check_omega(omega_c)?;
    let v = p.v_perp;
    let pv = perp(v);
    let out = match i {
        0 => [v[0], v[1], 0.0, omega_c * pv[0], omega_c * pv[1], 0.0],
        1 => [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        2 => [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        3 => [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        4 => {
            let r = norm2(v);
            if r == 0.0 {
                return Err(GyroError::DegenerateGyration("b_field(4)"));
            }
            [
                -pv[0] / (omega_c * r),
                -pv[1] / (omega_c * r),
                0.0,
                v[0] / r,
                v[1] / r,
                0.0,
            ]
        }
        5 => [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        _ => return Err(GyroError::domain("b_field", format!("index {i} not in 0..=5"))),
    };
    Ok(out)
}

/// Exact gradient of psi_i in full coordinates.
pub fn grad_psi(i: usize, p: &PhasePoint, omega_c: f64) -> Result<Vec6> {
    check_omega(omega_c)?;
    let v = p.v_perp;
    let r = norm2(v);
    let out = match i {
        0 => {
            if r == 0.0 {
                return Err(GyroError::DegenerateGyration("grad_psi(0)"));
            }
            let pv = perp(v);
            let s = 1.0 / (omega_c * r * r);
            [0.0, 0.0, 0.0, pv[0] * s, pv[1] * s, 0.0]
        }
        1 => [1.0, 0.0, 0.0, 0.0, 1.0 / omega_c, 0.0],
        2 => [0.0, 1.0, 0.0, -1.0 / omega_c, 0.0, 0.0],
        3 => [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        4 => {
            if r == 0.0 {
                return Err(GyroError::DegenerateGyration("grad_psi(4)"));
            }
            [0.0, 0.0, 0.0, v[0] / r, v[1] / r, 0.0]
        }
        5 => [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        _ => return Err(GyroError::domain("grad_psi", format!("index {i} not in 0..=5"))),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn arb_point(bound: f64) -> impl Strategy<Value = PhasePoint> {
        proptest::array::uniform6(-bound..bound).prop_map(PhasePoint::from_array)
    }

    fn arb_omega() -> impl Strategy<Value = f64> {
        prop_oneof![Just(1.0), Just(-1.0), Just(5.0), Just(-5.0), 0.3f64..4.0]
    }

    #[test]
    fn rotate_examples() {
        assert_eq!(rotate(0.0, [1.0, 0.0]), [1.0, 0.0]);
        let q = rotate(PI / 2.0, [1.0, 0.0]);
        assert_abs_diff_eq!(q[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q[1], 1.0, epsilon = 1e-15);
        let t = rotate(PI / 3.0, [1.0, 0.0]);
        assert_abs_diff_eq!(t[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t[1], 3f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn flow_quarter_period_example() {
        let p = PhasePoint::new([0.0, 0.0], 0.0, [1.0, 0.0], 0.0);
        let q = flow(PI / 2.0, &p, 1.0).unwrap();
        assert_abs_diff_eq!(q.x_perp[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.x_perp[1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.v_perp[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.v_perp[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn flow_solves_the_ode() {
        // Central difference of the flow in s against the vector field b^0.
        let p = PhasePoint::new([0.3, -1.2], 0.7, [0.9, 0.4], -0.2);
        let w = 2.5;
        let s = 0.37;
        let h = 1e-5;
        let a = flow(s + h, &p, w).unwrap().to_array();
        let b = flow(s - h, &p, w).unwrap().to_array();
        let here = flow(s, &p, w).unwrap();
        let field = b_field(0, &here, w).unwrap();
        for k in 0..6 {
            assert_abs_diff_eq!((a[k] - b[k]) / (2.0 * h), field[k], epsilon = 1e-8);
        }
    }

    #[test]
    fn zero_frequency_rejected() {
        let p = PhasePoint::default();
        assert!(matches!(flow(1.0, &p, 0.0), Err(GyroError::ZeroCyclotronFrequency)));
        assert!(to_invariants(&p, 0.0).is_err());
    }

    #[test]
    fn invariant_examples() {
        let p = PhasePoint::new([0.0, 0.0], 0.0, [1.0, 0.0], 0.0);
        let (inv, g) = to_invariants(&p, 1.0).unwrap();
        assert_eq!(inv.y, [0.0, -1.0]);
        assert_eq!(inv.r, 1.0);
        assert_eq!(g.alpha(), 0.0);

        let still = PhasePoint::new([2.0, 3.0], 1.0, [0.0, 0.0], 0.5);
        let (inv0, g0) = to_invariants(&still, 1.0).unwrap();
        assert_eq!(inv0.r, 0.0);
        assert_eq!(g0.alpha(), 0.0);
        let back = from_invariants(&inv0, g0, 1.0).unwrap();
        assert_eq!(back.x_perp, inv0.y);

        let q = from_invariants(&inv, Gyrophase::new(0.0), 1.0).unwrap();
        assert_abs_diff_eq!(q.x_perp[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.x_perp[1], 0.0, epsilon = 1e-15);
        assert_eq!(q.v_perp, [1.0, 0.0]);
    }

    #[test]
    fn b4_example() {
        let p = PhasePoint::new([0.0, 0.0], 0.0, [1.0, 0.0], 0.0);
        let b = b_field(4, &p, 1.0).unwrap();
        assert_eq!(b, [0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let degenerate = PhasePoint::default();
        assert!(matches!(
            b_field(4, &degenerate, 1.0),
            Err(GyroError::DegenerateGyration(_))
        ));
        assert!(grad_psi(0, &degenerate, 1.0).is_err());
        assert!(grad_psi(4, &degenerate, 1.0).is_err());
        assert!(b_field(0, &degenerate, 1.0).is_ok());
    }

    #[test]
    fn grad_psi_examples() {
        let p = PhasePoint::new([0.4, 0.1], 2.0, [0.3, -0.8], 1.0);
        let w = 2.0;
        assert_eq!(grad_psi(1, &p, w).unwrap(), [1.0, 0.0, 0.0, 0.0, 0.5, 0.0]);
        assert_eq!(grad_psi(3, &p, w).unwrap(), [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn grad_psi_matches_finite_differences() {
        let p = PhasePoint::new([0.4, 0.1], 2.0, [0.3, -0.8], 1.0);
        let w = -1.7;
        let h = 1e-6;
        for i in 0..6 {
            let g = grad_psi(i, &p, w).unwrap();
            for k in 0..6 {
                let mut a = p.to_array();
                let mut b = p.to_array();
                a[k] += h;
                b[k] -= h;
                let fd = (psi(i, &PhasePoint::from_array(a), w).unwrap()
                    - psi(i, &PhasePoint::from_array(b), w).unwrap())
                    / (2.0 * h);
                assert_abs_diff_eq!(fd, g[k], epsilon = 1e-7);
            }
        }
    }

    fn divergence(i: usize, p: &PhasePoint, w: f64, h: f64) -> f64 {
        (0..6)
            .map(|k| {
                let mut a = p.to_array();
                let mut b = p.to_array();
                a[k] += h;
                b[k] -= h;
                (b_field(i, &PhasePoint::from_array(a), w).unwrap()[k]
                    - b_field(i, &PhasePoint::from_array(b), w).unwrap()[k])
                    / (2.0 * h)
            })
            .sum()
    }

    #[test]
    fn divergence_of_fields() {
        let p = PhasePoint::new([0.4, 0.1], 2.0, [0.3, -0.8], 1.0);
        let w = 1.3;
        let r = norm2(p.v_perp);
        for i in 0..6 {
            let d = divergence(i, &p, w, 1e-5);
            let expect = if i == 4 { 1.0 / r } else { 0.0 };
            assert_abs_diff_eq!(d, expect, epsilon = 1e-8);
        }
    }

    fn bracket(i: usize, j: usize, p: &PhasePoint, w: f64, h: f64) -> Vec6 {
        let bi = b_field(i, p, w).unwrap();
        let bj = b_field(j, p, w).unwrap();
        let mut out = [0.0; 6];
        for (k, o) in out.iter_mut().enumerate() {
            let dir = |f: &Vec6, idx: usize| -> f64 {
                let mut a = p.to_array();
                let mut b = p.to_array();
                for m in 0..6 {
                    a[m] += h * f[m];
                    b[m] -= h * f[m];
                }
                (b_field(idx, &PhasePoint::from_array(a), w).unwrap()[k]
                    - b_field(idx, &PhasePoint::from_array(b), w).unwrap()[k])
                    / (2.0 * h)
            };
            *o = dir(&bi, j) - dir(&bj, i);
        }
        out
    }

    #[test]
    fn fields_commute_at_second_order() {
        let p = PhasePoint::new([0.4, 0.1], 2.0, [0.3, -0.8], 1.0);
        let w = 1.3;
        for i in 0..6 {
            for j in (i + 1)..6 {
                let coarse = bracket(i, j, &p, w, 1e-3);
                let fine = bracket(i, j, &p, w, 5e-4);
                let nc = coarse.iter().map(|c| c.abs()).fold(0.0, f64::max);
                let nf = fine.iter().map(|c| c.abs()).fold(0.0, f64::max);
                assert!(nf < 1e-6, "[b{i}, b{j}] = {nf}");
                // Either already at round-off, or shrinking like h^2.
                assert!(nc < 1e-9 || nf < 0.3 * nc, "[b{i}, b{j}]: {nc} -> {nf}");
            }
        }
    }

    proptest! {
        #[test]
        fn flow_is_periodic(p in arb_point(10.0), w in arb_omega()) {
            let q = flow(cyclotron_period(w), &p, w).unwrap();
            let (a, b) = (p.to_array(), q.to_array());
            for k in 0..6 {
                prop_assert!((a[k] - b[k]).abs() < 1e-12 * (1.0 + a[k].abs()) * 10.0);
            }
        }

        #[test]
        fn flow_preserves_invariants(p in arb_point(10.0), w in arb_omega(), s in prop_oneof![Just(0.3), Just(1.7), Just(4.9), -5.0f64..5.0]) {
            let (i0, _) = to_invariants(&p, w).unwrap();
            let (i1, _) = to_invariants(&flow(s, &p, w).unwrap(), w).unwrap();
            prop_assert!((i0.y[0] - i1.y[0]).abs() < 1e-12 * 50.0);
            prop_assert!((i0.y[1] - i1.y[1]).abs() < 1e-12 * 50.0);
            prop_assert!((i0.r - i1.r).abs() < 1e-12 * 20.0);
            prop_assert_eq!(i0.x3, i1.x3);
            prop_assert_eq!(i0.v3, i1.v3);
        }

        #[test]
        fn invariant_round_trip(p in arb_point(5.0), w in arb_omega()) {
            let (inv, g) = to_invariants(&p, w).unwrap();
            let q = from_invariants(&inv, g, w).unwrap();
            let (a, b) = (p.to_array(), q.to_array());
            for k in 0..6 {
                prop_assert!((a[k] - b[k]).abs() < 1e-14 * 50.0 * (1.0 + a[k].abs()));
            }
        }

        #[test]
        fn duality_of_fields_and_gradients(p in arb_point(5.0), w in arb_omega()) {
            prop_assume!(norm2(p.v_perp) > 1e-3);
            for i in 0..6 {
                let b = b_field(i, &p, w).unwrap();
                for j in 0..6 {
                    let g = grad_psi(j, &p, w).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot6(&b, &g) - expect).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn fields_resolve_identity(p in arb_point(5.0), w in arb_omega()) {
            prop_assume!(norm2(p.v_perp) > 1e-2);
            let mut m = [[0.0; 6]; 6];
            for i in 0..6 {
                let b = b_field(i, &p, w).unwrap();
                let g = grad_psi(i, &p, w).unwrap();
                for k in 0..6 {
                    for l in 0..6 {
                        m[k][l] += b[k] * g[l];
                    }
                }
            }
            for (k, row) in m.iter().enumerate() {
                for (l, &val) in row.iter().enumerate() {
                    let expect = if k == l { 1.0 } else { 0.0 };
                    prop_assert!((val - expect).abs() < 1e-12);
                }
            }
        }
    }
}
