//! The averaged Landau operator on the grid against the gyroaverage of the
//! full-coordinate operator applied to the constrained density.

use std::f64::consts::PI;

use gyrokin::geometry::{from_invariants, Gyrophase, InvariantCoords};
use gyrokin::grid::{GridSpec, ReducedDensity, ReducedGrid};
use gyrokin::gyroaverage::{constrained, gyroaverage_fpl_oracle, GyroQuadratureConfig, VelocityRule};
use gyrokin::landau::{FplConfig, LandauOperator};
use gyrokin::physics::{CrossSection, PlasmaParams, SigmaFamily};

const L: f64 = 12.0;
const VMAX: f64 = 4.5;

/// Density modulated in y with separate perpendicular and parallel temperatures.
fn density(amp: f64, t_perp: f64) -> impl Fn(&InvariantCoords) -> f64 + Sync + Copy {
    let (t, u) = (0.8, 0.3);
    move |i: &InvariantCoords| {
        let m = 1.0 + amp * (0.3 * (2.0 * PI * i.y[0] / L).cos() + 0.2 * (2.0 * PI * i.y[1] / L).sin());
        m * (-(i.r * i.r) / (2.0 * t_perp) - (i.v3 - u).powi(2) / (2.0 * t)).exp()
    }
}

/// Largest grid-vs-oracle error over the given cells, relative to the largest oracle value.
fn relative_error(n: [usize; 5], amp: f64, t_perp: f64, cells: &[[f64; 4]]) -> f64 {
    let grid = ReducedGrid::new(GridSpec { length_y: L, length_x3: 1.0, r_max: VMAX, v_max: VMAX, n }).unwrap();
    let params = PlasmaParams::default();
    let wc = params.omega_c();
    let cs = CrossSection::new(SigmaFamily::PowerLaw { sigma0: 1.0, gamma: 1.0, delta: 0.5 }, 40.0).unwrap();
    let op = LandauOperator::new(&grid, &params, &FplConfig::new(cs.clone())).unwrap();
    let g = density(amp, t_perp);
    let rate = op.apply(&ReducedDensity::from_fn(&grid, g));

    let f = constrained(g, wc);
    let gc = GyroQuadratureConfig::new(16).unwrap();
    let vq = VelocityRule::Centered { radius: 8.0, n_rho: 32, n_mu: 16, n_az: 24 }.build().unwrap();
    let [n1, n2, _, n_r, n_v] = grid.dims();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    // Cells are given as fractions of each axis, so refinement keeps them in place.
    for c in cells {
        let pick = |frac: f64, len: usize| ((frac * len as f64) as usize).min(len - 1);
        let idx = [pick(c[0], n1), pick(c[1], n2), 0, pick(c[2], n_r), pick(c[3], n_v)];
        let inv = grid.point(idx);
        let p = from_invariants(&inv, Gyrophase::new(0.3), wc).unwrap();
        let o = gyroaverage_fpl_oracle(&f, &p, wc, &cs, &gc, &vq).unwrap();
        worst = worst.max((rate[grid.index(idx)] - o).abs());
        scale = scale.max(o.abs());
    }
    worst / scale
}

const SPOTS: [[f64; 4]; 4] = [[0.25, 0.5, 0.0, 0.25], [0.75, 0.25, 0.25, 0.42], [0.5, 0.75, 0.5, 0.59], [0.0, 0.0, 0.25, 0.75]];

#[test]
fn velocity_terms_converge_to_full_coordinates() {
    // Uniform in y: only the velocity couplings act.
    let coarse = relative_error([1, 1, 1, 12, 16], 0.0, 1.2, &SPOTS);
    let fine = relative_error([1, 1, 1, 24, 32], 0.0, 1.2, &SPOTS);
    println!("velocity refinement: {coarse:.3e} -> {fine:.3e}");
    assert!(fine < 0.6 * coarse && fine < 0.5, "{coarse} -> {fine}");
}

#[test]
fn spatial_terms_converge_to_full_coordinates() {
    // Maxwellian in velocity: only the y couplings act.
    let coarse = relative_error([8, 8, 1, 8, 12], 1.0, 0.8, &SPOTS);
    let fine = relative_error([16, 16, 1, 8, 12], 1.0, 0.8, &SPOTS);
    println!("y refinement: {coarse:.3e} -> {fine:.3e}");
    assert!(fine < 0.8 * coarse && fine < 0.3, "{coarse} -> {fine}");
}

#[test]
#[ignore = "needs grids far beyond desk scale; [8,8,1,16,24] reaches 1.7e-1"]
fn twenty_node_spot_check() {
    let cells: Vec<[f64; 4]> = (0..20)
        .map(|k| {
            let k = k as f64;
            [(0.37 * k).fract(), (0.61 * k + 0.1).fract(), (0.23 * k + 0.05).fract() * 0.8, 0.1 + (0.47 * k).fract() * 0.8]
        })
        .collect();
    let err = relative_error([32, 32, 1, 32, 48], 1.0, 1.2, &cells);
    assert!(err <= 3e-3, "relative error {err:.3e}");
}
