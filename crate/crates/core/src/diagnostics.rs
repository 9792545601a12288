//! Per-tick accounting of the reduced density and its CSV output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::ReducedDensity;
use crate::landau::conserved_functionals_of;
use crate::physics::{maxwellian_rv, PlasmaParams};

/// Column order of the diagnostics table. Frozen; bump the version when it changes.
pub const CSV_HEADER: [&str; 12] = [
    "time",
    "mass",
    "px",
    "py",
    "pz",
    "ekin",
    "entropy",
    "larmor_cx",
    "larmor_cy",
    "larmor_power",
    "entropy_prod",
    "l2m",
];
pub const CSV_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub mass: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    /// Integral of g m |v|^2 / 2.
    pub ekin: f64,
    /// Integral of g ln g.
    pub entropy: f64,
    /// Mass-weighted mean of the Larmor circle center.
    pub larmor_cx: f64,
    pub larmor_cy: f64,
    /// Mass-weighted mean of |y|^2 - r^2 / omega_c^2.
    pub larmor_power: f64,
    /// Integral of rate * (ln g + 1) for the active collision operator.
    pub entropy_prod: f64,
    /// Distance to the global Maxwellian of equal mass in L^2(1/M).
    pub l2m: f64,
}

/// Entropy integrand floor: values at or below zero contribute nothing.
fn g_ln_g(g: f64) -> f64 {
    if g > 0.0 {
        g * g.ln()
    } else {
        0.0
    }
}

impl DiagnosticsRecord {
    /// `rate` is the collision rate at g, when a collision model is active.
    pub fn compute(time: f64, g: &ReducedDensity, params: &PlasmaParams, rate: Option<&[f64]>) -> Self {
        let grid = &g.grid;
        let f = conserved_functionals_of(grid, &g.data, params.omega_c());
        let mass = f.mass;
        let w = grid.measures();
        let maxw: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.point(grid.unindex(i));
                maxwellian_rv(p.r, p.v3, params)
            })
            .collect();
        let m_total: f64 = w.iter().zip(&maxw).map(|(w, m)| w * m).sum();
        let c = mass / m_total;
        let l2m = w
            .iter()
            .zip(&maxw)
            .zip(&g.data)
            .map(|((w, m), g)| w * (g - c * m).powi(2) / m)
            .sum::<f64>()
            .sqrt();
        let entropy = w.iter().zip(&g.data).map(|(w, &g)| w * g_ln_g(g)).sum();
        let entropy_prod = rate.map_or(0.0, |q| {
            w.iter()
                .zip(q)
                .zip(&g.data)
                .map(|((w, q), &g)| if g > 0.0 { w * q * (g.ln() + 1.0) } else { 0.0 })
                .sum()
        });
        let mean = |x: f64| if mass != 0.0 { x / mass } else { 0.0 };
        DiagnosticsRecord {
            time,
            mass,
            px: params.m * f.p_perp[0],
            py: params.m * f.p_perp[1],
            pz: params.m * f.p3,
            ekin: params.m * f.energy,
            entropy,
            larmor_cx: mean(f.larmor_center[0]),
            larmor_cy: mean(f.larmor_center[1]),
            larmor_power: mean(f.larmor_power),
            entropy_prod,
            l2m,
        }
    }

    pub fn values(&self) -> [f64; 12] {
        [
            self.time,
            self.mass,
            self.px,
            self.py,
            self.pz,
            self.ekin,
            self.entropy,
            self.larmor_cx,
            self.larmor_cy,
            self.larmor_power,
            self.entropy_prod,
            self.l2m,
        ]
    }
}

/// Writes the header and one row per record; values use shortest round-trip formatting.
pub fn write_csv<W: Write>(out: W, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.values().iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(crate::error::GyroError::Snapshot(format!("unexpected diagnostics header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let v: Vec<f64> = row
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| crate::error::GyroError::Snapshot(format!("bad value {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        out.push(DiagnosticsRecord {
            time: v[0],
            mass: v[1],
            px: v[2],
            py: v[3],
            pz: v[4],
            ekin: v[5],
            entropy: v[6],
            larmor_cx: v[7],
            larmor_cy: v[8],
            larmor_power: v[9],
            entropy_prod: v[10],
            l2m: v[11],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, ReducedGrid};

    fn grid() -> ReducedGrid {
        ReducedGrid::new(GridSpec {
            length_y: 8.0,
            length_x3: 1.0,
            r_max: 6.0,
            v_max: 6.0,
            n: [4, 4, 1, 12, 13],
        })
        .unwrap()
    }

    #[test]
    fn maxwellian_is_at_zero_distance() {
        let params = PlasmaParams::default();
        let g = ReducedDensity::maxwellian(&grid(), &params, 0.7);
        let d = DiagnosticsRecord::compute(0.0, &g, &params, None);
        assert!(d.l2m < 1e-12 * d.mass.sqrt(), "{}", d.l2m);
        assert!(d.pz.abs() < 1e-15 * d.mass);
        // Kinetic energy density of a unit-temperature Maxwellian: 3/2 per unit mass.
        assert!((d.ekin / d.mass - 1.5).abs() < 2e-3, "{}", d.ekin / d.mass);
        assert_eq!(d.entropy_prod, 0.0);
    }

    #[test]
    fn csv_round_trip_and_header() {
        let params = PlasmaParams::default();
        let g = ReducedDensity::maxwellian(&grid(), &params, 1.0);
        let recs: Vec<_> = (0..3)
            .map(|k| DiagnosticsRecord::compute(k as f64 * 0.1, &g, &params, Some(&vec![0.0; g.data.len()])))
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "time,mass,px,py,pz,ekin,entropy,larmor_cx,larmor_cy,larmor_power,entropy_prod,l2m"
        );
        assert_eq!(read_csv(&buf[..]).unwrap(), recs);
    }
}
