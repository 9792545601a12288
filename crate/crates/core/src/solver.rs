//! Time integration of the guiding-center limit model: E x B drift,
//! parallel streaming and parallel acceleration by finite volumes, plus an
//! averaged collision operator, combined by operator splitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boltzmann::{BoltzmannAvgConfig, BoltzmannOperator};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{invalid, GyroError, Result};
use crate::fokker_planck::FokkerPlanckOperator;
use crate::geometry::{from_invariants, Gyrophase, InvariantCoords, PhasePoint};
use crate::grid::{project_initial, ReducedDensity, ReducedGrid};
use crate::gyroaverage::{gyroaverage_scalar, GyroQuadratureConfig};
use crate::landau::{FplConfig, LandauOperator};
use crate::physics::{averaged_field_components, PlasmaParams, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionModel {
    #[default]
    None,
    Boltzmann,
    FokkerPlanck,
    Landau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    Lie,
    #[default]
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    /// First-order upwind; positivity preserving for Courant sums <= 1.
    #[default]
    Upwind,
    /// Minmod-limited linear reconstruction.
    Muscl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub model: CollisionModel,
    /// Fixed step; when absent the step follows from `cfl`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_final: f64,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default)]
    pub reconstruction: Reconstruction,
    /// Diagnostics are recorded every this many steps (and at the end).
    #[serde(default = "default_cadence")]
    pub output_every: usize,
    /// Gyrophase nodes for the averaged fields.
    #[serde(default = "default_gyro_nodes")]
    pub gyro_nodes: usize,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_cadence() -> usize {
    10
}

fn default_gyro_nodes() -> usize {
    32
}

impl SolverConfig {
    pub fn new(model: CollisionModel, t_final: f64) -> Self {
        SolverConfig {
            model,
            dt: None,
            cfl: default_cfl(),
            t_final,
            splitting: Splitting::Strang,
            reconstruction: Reconstruction::Upwind,
            output_every: default_cadence(),
            gyro_nodes: default_gyro_nodes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(invalid("solver.cfl", "must be in (0, 0.9]"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(invalid("solver.t_final", "must be finite and >= 0"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("solver.dt", "must be > 0"));
            }
        }
        if self.output_every == 0 {
            return Err(invalid("solver.output_every", "must be >= 1"));
        }
        if self.gyro_nodes < 4 {
            return Err(invalid("solver.gyro_nodes", "must be >= 4"));
        }
        Ok(())
    }
}

/// Precomputed transport velocities on cell faces.
#[derive(Debug, Clone)]
pub struct Transport {
    grid: ReducedGrid,
    /// y1 face velocity between i1 and i1 + 1, indexed [(i1 * n2 + i2) * n_r + ir].
    u1: Vec<f64>,
    /// y2 face velocity between i2 and i2 + 1, same layout.
    u2: Vec<f64>,
    /// Parallel acceleration per node, indexed [((i1 * n2 + i2) * n3 + k3) * n_r + ir].
    accel: Vec<f64>,
    reconstruction: Reconstruction,
}

impl Transport {
    pub fn new(grid: &ReducedGrid, pot: &Potential, params: &PlasmaParams, gyro_nodes: usize, reconstruction: Reconstruction) -> Result<Self> {
        if matches!(pot, Potential::Harmonic { .. }) {
            return Err(invalid("potential", "harmonic potential is not periodic on the guiding-center grid"));
        }
        let cfg = GyroQuadratureConfig::new(gyro_nodes)?;
        let wc = params.omega_c();
        let [n1, n2, n3, n_r, _] = grid.dims();
        let (d1, d2) = (grid.step(0), grid.step(1));
        let rs = grid.coords(3).to_vec();
        let phi_perp = |q: &PhasePoint| pot.phi_perp(q.x_perp);
        // Gyroaveraged perpendicular potential at a corner given by real coordinates.
        let corner = |y: [f64; 2], r: f64| -> Result<f64> {
            let p = from_invariants(&InvariantCoords { y, x3: 0.0, r, v3: 0.0 }, Gyrophase::new(0.0), wc)?;
            gyroaverage_scalar(&phi_perp, &p, wc, &cfg)
        };
        let b = params.b;
        let faces: Vec<(f64, f64)> = (0..n1 * n2 * n_r)
            .into_par_iter()
            .map(|k| -> Result<(f64, f64)> {
                let ir = k % n_r;
                let i2 = (k / n_r) % n2;
                let i1 = k / (n_r * n2);
                let (a, c) = ((i1 as f64 + 0.5) * d1, (i2 as f64 + 0.5) * d2);
                let r = rs[ir];
                let pp = corner([a, c], r)?;
                let pm = corner([a, c - d2], r)?;
                let mp = corner([a - d1, c], r)?;
                // Drift (-d phi / d y2, d phi / d y1) / B.
                Ok((-(pp - pm) / (b * d2), (pp - mp) / (b * d1)))
            })
            .collect::<Result<_>>()?;
        let qm = params.q / params.m;
        let accel = (0..n1 * n2 * n3 * n_r)
            .into_par_iter()
            .map(|k| -> Result<f64> {
                let ir = k % n_r;
                let k3 = (k / n_r) % n3;
                let i2 = (k / (n_r * n3)) % n2;
                let i1 = k / (n_r * n3 * n2);
                let inv = grid.point([i1, i2, k3, ir, 0]);
                let p = from_invariants(&inv, Gyrophase::new(0.0), wc)?;
                let (_, e3) = averaged_field_components(&p, pot, params, gyro_nodes)?;
                Ok(qm * e3)
            })
            .collect::<Result<_>>()?;
        Ok(Transport {
            grid: grid.clone(),
            u1: faces.iter().map(|f| f.0).collect(),
            u2: faces.iter().map(|f| f.1).collect(),
            accel,
            reconstruction,
        })
    }

    /// Sum over axes of the largest face speed over the cell size.
    pub fn courant_rate(&self) -> f64 {
        let g = &self.grid;
        let [_, _, n3, _, _] = g.dims();
        let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let stream = if n3 > 1 { g.spec().v_max / g.step(2) } else { 0.0 };
        amax(&self.u1) / g.step(0) + amax(&self.u2) / g.step(1) + stream + amax(&self.accel) / g.step(4)
    }

    /// Largest step with Courant sum at most `cfl`.
    pub fn max_dt(&self, cfl: f64) -> f64 {
        let rate = self.courant_rate();
        if rate == 0.0 {
            f64::INFINITY
        } else {
            cfl / rate
        }
    }

    fn face_speed(&self, axis: usize, i: [usize; 5]) -> f64 {
        let [_, n2, n3, n_r, _] = self.grid.dims();
        match axis {
            0 => self.u1[(i[0] * n2 + i[1]) * n_r + i[3]],
            1 => self.u2[(i[0] * n2 + i[1]) * n_r + i[3]],
            2 => self.grid.coords(4)[i[4]],
            4 => self.accel[((i[0] * n2 + i[1]) * n3 + i[2]) * n_r + i[3]],
            _ => 0.0,
        }
    }

    /// Time derivative of g under the transport.
    pub fn rate(&self, data: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let dims = grid.dims();
        let mut out = vec![0.0; grid.len()];
        for axis in [0usize, 1, 2, 4] {
            let n = dims[axis];
            if n < 2 {
                continue;
            }
            let stride = grid.stride(axis);
            let periodic = axis != 4;
            let h = grid.step(axis);
            let at = |f: usize, i: &[usize; 5], k: isize| -> Option<f64> {
                let j = i[axis] as isize + k;
                if periodic {
                    let jw = j.rem_euclid(n as isize) as usize;
                    Some(data[f - i[axis] * stride + jw * stride])
                } else if j < 0 || j >= n as isize {
                    None
                } else {
                    Some(data[f - i[axis] * stride + j as usize * stride])
                }
            };
            let slope = |f: usize, i: &[usize; 5]| -> f64 {
                match (at(f, i, -1), at(f, i, 1)) {
                    (Some(l), Some(r)) => {
                        let c = data[f];
                        let (a, b) = (c - l, r - c);
                        if a * b <= 0.0 {
                            0.0
                        } else if a.abs() < b.abs() {
                            a
                        } else {
                            b
                        }
                    }
                    _ => 0.0,
                }
            };
            // Flux through the face above each cell.
            let flux: Vec<f64> = (0..grid.len())
                .into_par_iter()
                .map(|f| {
                    let i = grid.unindex(f);
                    if !periodic && i[axis] + 1 == n {
                        return 0.0;
                    }
                    let mut up = i;
                    up[axis] = (i[axis] + 1) % n;
                    let fu = f - i[axis] * stride + up[axis] * stride;
                    let u = self.face_speed(axis, i);
                    let muscl = self.reconstruction == Reconstruction::Muscl;
                    if u >= 0.0 {
                        let s = if muscl { slope(f, &i) } else { 0.0 };
                        u * (data[f] + 0.5 * s)
                    } else {
                        let s = if muscl { slope(fu, &up) } else { 0.0 };
                        u * (data[fu] - 0.5 * s)
                    }
                })
                .collect();
            out.par_iter_mut().enumerate().for_each(|(f, o)| {
                let i = grid.unindex(f);
                let below = if i[axis] > 0 {
                    flux[f - stride]
                } else if periodic {
                    flux[f + (n - 1) * stride]
                } else {
                    0.0
                };
                *o -= (flux[f] - below) / h;
            });
        }
        out
    }
}

/// The active collision operator.
#[derive(Debug, Clone)]
pub enum Collider {
    None,
    Boltzmann(Box<BoltzmannOperator>),
    FokkerPlanck(Box<FokkerPlanckOperator>),
    Landau(Box<LandauOperator>),
}

/// Operator settings per model; only the one matching the model is used.
#[derive(Debug, Clone, Copy)]
pub struct CollisionSettings {
    pub boltzmann: Option<BoltzmannAvgConfig>,
    pub landau: Option<FplConfig>,
}

impl Collider {
    pub fn new(model: CollisionModel, grid: &ReducedGrid, params: &PlasmaParams, settings: &CollisionSettings) -> Result<Self> {
        Ok(match model {
            CollisionModel::None => Collider::None,
            CollisionModel::Boltzmann => {
                let cfg = settings.boltzmann.ok_or_else(|| invalid("collision", "boltzmann model needs a cross section"))?;
                Collider::Boltzmann(Box::new(BoltzmannOperator::new(grid, params, &cfg)?))
            }
            CollisionModel::FokkerPlanck => Collider::FokkerPlanck(Box::new(FokkerPlanckOperator::new(grid, params))),
            CollisionModel::Landau => {
                let cfg = settings.landau.ok_or_else(|| invalid("collision", "landau model needs a cross section"))?;
                Collider::Landau(Box::new(LandauOperator::new(grid, params, &cfg)?))
            }
        })
    }

    pub fn rate(&self, g: &ReducedDensity) -> Option<Vec<f64>> {
        match self {
            Collider::None => None,
            Collider::Boltzmann(op) => Some(op.apply(g)),
            Collider::FokkerPlanck(op) => Some(op.apply(g)),
            Collider::Landau(op) => Some(op.apply(g)),
        }
    }

    /// Explicit stability bound on the collision step, where one is known.
    pub fn dt_bound(&self) -> Option<f64> {
        match self {
            Collider::Boltzmann(op) => Some(0.5 / op.loss_bound()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub density: ReducedDensity,
    pub time: f64,
    pub history: Vec<DiagnosticsRecord>,
}

impl SolverState {
    pub fn new(density: ReducedDensity) -> Self {
        SolverState {
            density,
            time: 0.0,
            history: Vec::new(),
        }
    }
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

fn check_positive(g: &ReducedDensity) -> Result<()> {
    let max = g.max_abs();
    let min = g.min();
    if min < -1e-12 * max {
        return Err(GyroError::NegativeDensity { min, max });
    }
    Ok(())
}

/// One SSP-RK2 step of the transport.
pub fn advect_with(state: &mut SolverState, dt: f64, transport: &Transport, cfl: f64) -> Result<()> {
    let limit = transport.max_dt(cfl);
    if dt > limit * (1.0 + 1e-12) {
        return Err(GyroError::StepTooLarge { dt, limit, which: "transport CFL" });
    }
    let g0 = &state.density.data;
    let g1 = axpy(dt, &transport.rate(g0), g0);
    let g2 = axpy(dt, &transport.rate(&g1), &g1);
    state.density.data = g0.iter().zip(&g2).map(|(a, b)| 0.5 * (a + b)).collect();
    state.time += dt;
    Ok(())
}

/// One transport step with freshly computed drift fields.
pub fn advect_step(state: &mut SolverState, dt: f64, pot: &Potential, params: &PlasmaParams) -> Result<()> {
    let t = Transport::new(&state.density.grid, pot, params, default_gyro_nodes(), Reconstruction::Upwind)?;
    advect_with(state, dt, &t, 0.9)
}

/// One Heun (SSP-RK2) step of the collision operator; the clock is not advanced.
pub fn collide_step(state: &mut SolverState, dt: f64, collider: &Collider) -> Result<()> {
    if let Some(limit) = collider.dt_bound() {
        if dt > limit * (1.0 + 1e-12) {
            return Err(GyroError::StepTooLarge { dt, limit, which: "relaxation loss term" });
        }
    }
    let Some(q0) = collider.rate(&state.density) else {
        return Ok(());
    };
    let g0 = state.density.clone();
    let mut g1 = g0.clone();
    g1.data = axpy(dt, &q0, &g0.data);
    let q1 = collider.rate(&g1).unwrap_or_default();
    let g2 = axpy(dt, &q1, &g1.data);
    state.density.data = g0.data.iter().zip(&g2).map(|(a, b)| 0.5 * (a + b)).collect();
    check_positive(&state.density)
}

/// Everything a run needs besides the initial datum.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub grid: ReducedGrid,
    pub params: PlasmaParams,
    pub potential: Potential,
    pub solver: SolverConfig,
    pub collisions: CollisionSettings,
}

/// Prepared solver: operators built, step size fixed.
#[derive(Debug, Clone)]
pub struct Solver {
    pub setup: RunSetup,
    pub transport: Transport,
    pub collider: Collider,
    pub dt: f64,
    pub n_steps: usize,
}

impl Solver {
    pub fn new(setup: RunSetup) -> Result<Self> {
        setup.solver.validate()?;
        let sc = &setup.solver;
        let transport = Transport::new(&setup.grid, &setup.potential, &setup.params, sc.gyro_nodes, sc.reconstruction)?;
        let collider = Collider::new(sc.model, &setup.grid, &setup.params, &setup.collisions)?;
        // Strang takes half steps of transport.
        let sub = if sc.splitting == Splitting::Strang { 0.5 } else { 1.0 };
        let mut limit = transport.max_dt(sc.cfl) / sub;
        if let Some(b) = collider.dt_bound() {
            limit = limit.min(b);
        }
        let requested = match sc.dt {
            Some(dt) => {
                if dt > limit * (1.0 + 1e-12) {
                    return Err(GyroError::StepTooLarge { dt, limit, which: "solver.dt" });
                }
                dt
            }
            None if limit.is_finite() => limit,
            None => return Err(invalid("solver.dt", "required when neither transport nor collisions limit the step")),
        };
        let n_steps = if sc.t_final == 0.0 { 0 } else { (sc.t_final / requested).ceil().max(1.0) as usize };
        let dt = if n_steps == 0 { 0.0 } else { sc.t_final / n_steps as f64 };
        Ok(Solver {
            setup,
            transport,
            collider,
            dt,
            n_steps,
        })
    }

    pub fn diagnostics(&self, state: &SolverState) -> DiagnosticsRecord {
        let rate = self.collider.rate(&state.density);
        DiagnosticsRecord::compute(state.time, &state.density, &self.setup.params, rate.as_deref())
    }

    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let cfl = self.setup.solver.cfl;
        match self.setup.solver.splitting {
            Splitting::Lie => {
                advect_with(state, self.dt, &self.transport, cfl)?;
                collide_step(state, self.dt, &self.collider)?;
            }
            Splitting::Strang => {
                let t0 = state.time;
                advect_with(state, 0.5 * self.dt, &self.transport, cfl)?;
                collide_step(state, self.dt, &self.collider)?;
                advect_with(state, 0.5 * self.dt, &self.transport, cfl)?;
                state.time = t0 + self.dt;
            }
        }
        Ok(())
    }

    /// Runs to the final time. `observe` sees the state after every recorded tick;
    /// on error the last good state is returned alongside it.
    pub fn run<O>(&self, initial: ReducedDensity, mut observe: O) -> std::result::Result<SolverState, (GyroError, SolverState)>
    where
        O: FnMut(usize, &SolverState) -> Result<()>,
    {
        let mut state = SolverState::new(initial);
        let rec = self.diagnostics(&state);
        state.history.push(rec);
        if let Err(e) = observe(0, &state) {
            return Err((e, state));
        }
        let every = self.setup.solver.output_every;
        for k in 1..=self.n_steps {
            let mut next = state.clone();
            if let Err(e) = self.step(&mut next) {
                return Err((e, state));
            }
            state = next;
            if k % every == 0 || k == self.n_steps {
                let rec = self.diagnostics(&state);
                state.history.push(rec);
                if let Err(e) = observe(k, &state) {
                    return Err((e, state));
                }
            }
        }
        Ok(state)
    }
}

/// Projects a full-coordinate initial datum and runs the limit model.
pub fn run<F>(setup: RunSetup, initial: &F) -> Result<SolverState>
where
    F: Fn(&PhasePoint) -> f64 + ?Sized,
{
    let cfg = GyroQuadratureConfig::new(setup.solver.gyro_nodes)?;
    let g0 = project_initial(initial, &setup.grid, setup.params.omega_c(), &cfg)?;
    let solver = Solver::new(setup)?;
    solver.run(g0, |_, _| Ok(())).map_err(|(e, _)| e)
}
