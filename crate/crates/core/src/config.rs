//! The run configuration document (JSON) and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boltzmann::BoltzmannAvgConfig;
use crate::drift::DriftConfig;
use crate::error::{invalid, Result};
use crate::geometry::PhasePoint;
use crate::grid::{GridSpec, Interpolation, ReducedGrid};
use crate::landau::{FplConfig, GradientMode};
use crate::physics::{maxwellian, CrossSection, PlasmaParams, Potential, SigmaFamily};
use crate::solver::{CollisionModel, CollisionSettings, RunSetup, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionConfig {
    #[serde(flatten)]
    pub sigma: SigmaFamily,
    /// Largest relative speed on which the bounds are enforced; defaults to
    /// the diameter of the velocity box.
    #[serde(default)]
    pub s_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default = "default_n_alpha")]
    pub n_alpha: usize,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default)]
    pub gradient_mode: GradientMode,
    /// Relative positivity floor for logarithms.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_n_phi() -> usize {
    12
}

fn default_n_alpha() -> usize {
    16
}

fn default_floor() -> f64 {
    1e-300
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            n_phi: default_n_phi(),
            n_alpha: default_n_alpha(),
            interpolation: Interpolation::Bilinear,
            gradient_mode: GradientMode::Logarithmic,
            floor: default_floor(),
        }
    }
}

/// Initial datum in full coordinates; the run starts from its gyroaverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// density * M(v)
    Maxwellian { density: f64 },
    /// density * M(v) (1 + amplitude cos(2 pi (m . x_perp) / L))
    Modulated { density: f64, amplitude: f64, mode: [i32; 2] },
    /// density * exp(-|x_perp - center|^2 / (2 width^2)) * Maxwellian of
    /// temperature `temperature` shifted by u3 along the field.
    Bump {
        density: f64,
        center: [f64; 2],
        width: f64,
        temperature: f64,
        #[serde(default)]
        u3: f64,
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Maxwellian { density: 1.0 }
    }
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("initial.{name}"), "must be > 0"))
            }
        };
        match *self {
            InitialCondition::Maxwellian { density } => pos("density", density),
            InitialCondition::Modulated { density, amplitude, .. } => {
                pos("density", density)?;
                if !(amplitude.abs() < 1.0) {
                    return Err(invalid("initial.amplitude", "must satisfy |amplitude| < 1"));
                }
                Ok(())
            }
            InitialCondition::Bump {
                density,
                width,
                temperature,
                u3,
                ..
            } => {
                pos("density", density)?;
                pos("width", width)?;
                pos("temperature", temperature)?;
                if !u3.is_finite() {
                    return Err(invalid("initial.u3", "must be finite"));
                }
                Ok(())
            }
        }
    }

    /// The datum as a function of (x, v).
    pub fn full(&self, params: &PlasmaParams, length_y: f64) -> impl Fn(&PhasePoint) -> f64 {
        let ic = *self;
        let params = *params;
        move |p: &PhasePoint| {
            let v = p.velocity();
            match ic {
                InitialCondition::Maxwellian { density } => density * maxwellian(v, &params),
                InitialCondition::Modulated { density, amplitude, mode } => {
                    let k = 2.0 * std::f64::consts::PI / length_y;
                    let ph = k * (mode[0] as f64 * p.x_perp[0] + mode[1] as f64 * p.x_perp[1]);
                    density * maxwellian(v, &params) * (1.0 + amplitude * ph.cos())
                }
                InitialCondition::Bump {
                    density,
                    center,
                    width,
                    temperature,
                    u3,
                } => {
                    let d = [p.x_perp[0] - center[0], p.x_perp[1] - center[1]];
                    let hot = PlasmaParams { theta: temperature, ..params };
                    density * (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * width * width)).exp() * maxwellian([v[0], v[1], v[2] - u3], &hot)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write a snapshot every this many diagnostics ticks; 0 writes none
    /// besides the final state.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            snapshot_every: 0,
        }
    }
}

fn zero_potential() -> Potential {
    Potential::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plasma: PlasmaParams,
    #[serde(default)]
    pub cross_section: Option<CrossSectionConfig>,
    #[serde(default = "zero_potential")]
    pub potential: Potential,
    pub grid: GridSpec,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub drift: Option<DriftConfig>,
    #[serde(default)]
    pub seed: u64,
}

/// Parses JSON, reporting structural errors with the path of the offending field.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if path == "." { "config".to_owned() } else { path };
        invalid(path, inner.to_string())
    })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Every positivity and consistency constraint, with field paths.
    pub fn validate(&self) -> Result<()> {
        self.plasma.validate("plasma")?;
        ReducedGrid::new(self.grid)?;
        self.solver.validate()?;
        self.initial.validate()?;
        if let Some(d) = &self.drift {
            d.validate()?;
        }
        let q = &self.quadrature;
        if q.n_phi < 2 {
            return Err(invalid("quadrature.n_phi", "must be >= 2"));
        }
        if q.n_alpha < 4 || q.n_alpha % 2 != 0 {
            return Err(invalid("quadrature.n_alpha", "must be even and >= 4"));
        }
        if !(q.floor >= 0.0 && q.floor < 1.0) {
            return Err(invalid("quadrature.floor", "must be in [0, 1)"));
        }
        let cs = self.cross_section()?;
        if matches!(self.solver.model, CollisionModel::Boltzmann | CollisionModel::Landau) && cs.is_none() {
            return Err(invalid("cross_section", "required by the selected collision model"));
        }
        if !self.potential_is_finite() {
            return Err(invalid("potential", "parameters must be finite"));
        }
        Ok(())
    }

    fn potential_is_finite(&self) -> bool {
        match self.potential {
            Potential::Zero => true,
            Potential::UniformGradient { grad } => grad.iter().all(|x| x.is_finite()),
            Potential::Harmonic { k_perp, k_par } => k_perp.is_finite() && k_par.is_finite(),
            Potential::Separable {
                a_perp,
                k_perp,
                a_par,
                k_par,
            } => a_perp.is_finite() && k_perp.iter().all(|x| x.is_finite()) && a_par.is_finite() && k_par.is_finite(),
        }
    }

    pub fn cross_section(&self) -> Result<Option<CrossSection>> {
        let Some(c) = self.cross_section else {
            return Ok(None);
        };
        let s_max = c
            .s_max
            .unwrap_or_else(|| 2.0 * self.grid.r_max.hypot(self.grid.v_max));
        CrossSection::new(c.sigma, s_max).map(Some)
    }

    pub fn run_setup(&self) -> Result<RunSetup> {
        let grid = ReducedGrid::new(self.grid)?;
        let cs = self.cross_section()?;
        let q = &self.quadrature;
        let collisions = CollisionSettings {
            boltzmann: cs.map(|c| BoltzmannAvgConfig {
                n_phi: q.n_phi,
                n_alpha: q.n_alpha,
                interpolation: q.interpolation,
                cross_section: c,
            }),
            landau: cs.map(|c| FplConfig {
                n_phi: q.n_phi,
                n_alpha: q.n_alpha,
                interpolation: q.interpolation,
                cross_section: c,
                gradient_mode: q.gradient_mode,
                floor: q.floor,
            }),
        };
        Ok(RunSetup {
            grid,
            params: self.plasma,
            potential: self.potential,
            solver: self.solver,
            collisions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::{json, Value};

    fn base() -> Value {
        json!({
            "plasma": {"q": 1.0, "m": 1.0, "B": 1.0, "theta": 1.0, "tau": 1.0},
            "cross_section": {"family": "constant", "sigma0": 1.0},
            "grid": {"length_y": 10.0, "length_x3": 1.0, "r_max": 5.0, "v_max": 5.0, "n": [8, 8, 1, 6, 8]},
            "solver": {"model": "boltzmann", "t_final": 1.0, "dt": 0.01},
            "initial": {"kind": "modulated", "density": 1.0, "amplitude": 0.5, "mode": [1, 0]}
        })
    }

    #[test]
    fn base_config_is_valid() {
        let cfg = RunConfig::from_json(&base().to_string()).unwrap();
        assert_eq!(cfg.solver.model, CollisionModel::Boltzmann);
        assert_eq!(cfg.quadrature, QuadratureConfig::default());
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
        cfg.run_setup().unwrap();
    }

    #[test]
    fn structural_errors_name_the_field() {
        let mut v = base();
        v["grid"]["r_max"] = json!("wide");
        let e = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(e.starts_with("grid.r_max:"), "{e}");
        let mut v = base();
        v["solver"]["bogus"] = json!(1);
        let e = RunConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(e.starts_with("solver"), "{e}");
        let mut v = base();
        v["solver"]["model"] = json!("fokker-planck");
        assert!(RunConfig::from_json(&v.to_string()).is_ok());
    }

    /// (pointer into the document, invalid value, expected path prefix)
    fn mutations() -> Vec<(&'static str, Value, &'static str)> {
        vec![
            ("/plasma/m", json!(-1.0), "plasma.m"),
            ("/plasma/B", json!(0.0), "plasma.B"),
            ("/plasma/theta", json!(0.0), "plasma.theta"),
            ("/plasma/tau", json!(-2.0), "plasma.tau"),
            ("/plasma/q", json!(0.0), "plasma.q"),
            ("/grid/r_max", json!(0.0), "grid.r_max"),
            ("/grid/v_max", json!(-1.0), "grid.v_max"),
            ("/grid/length_y", json!(0.0), "grid.length_y"),
            ("/grid/n/3", json!(2), "grid.n.r"),
            ("/grid/n/0", json!(0), "grid.n.y1"),
            ("/solver/cfl", json!(1.5), "solver.cfl"),
            ("/solver/dt", json!(-0.1), "solver.dt"),
            ("/solver/t_final", json!(-1.0), "solver.t_final"),
            ("/solver/output_every", json!(0), "solver.output_every"),
            ("/cross_section/sigma0", json!(-1.0), "cross_section.sigma0"),
            ("/initial/amplitude", json!(1.5), "initial.amplitude"),
            ("/initial/density", json!(0.0), "initial.density"),
            ("/quadrature", json!({"n_alpha": 7}), "quadrature.n_alpha"),
            ("/quadrature", json!({"n_phi": 1}), "quadrature.n_phi"),
        ]
    }

    fn apply(doc: &mut Value, pointer: &str, value: Value) {
        let (parent, key) = pointer.rsplit_once('/').unwrap();
        let target = if parent.is_empty() { &mut *doc } else { doc.pointer_mut(parent).unwrap() };
        match target {
            Value::Array(a) => a[key.parse::<usize>().unwrap()] = value,
            Value::Object(o) => {
                o.insert(key.to_owned(), value);
            }
            _ => panic!("bad pointer {pointer}"),
        }
    }

    proptest! {
        #[test]
        fn every_invalid_mutation_is_rejected_with_its_path(k in 0usize..19, extra in 0usize..19) {
            let muts = mutations();
            let (p, v, path) = muts[k].clone();
            let mut doc = base();
            apply(&mut doc, p, v);
            let e = RunConfig::from_json(&doc.to_string()).unwrap_err().to_string();
            prop_assert!(e.starts_with(path), "{} -> {}", p, e);
            // A second mutation still yields an error naming one of the two fields.
            let (p2, v2, path2) = muts[extra].clone();
            apply(&mut doc, p2, v2);
            let e = RunConfig::from_json(&doc.to_string()).unwrap_err().to_string();
            prop_assert!(e.starts_with(path) || e.starts_with(path2), "{}", e);
        }
    }
}
