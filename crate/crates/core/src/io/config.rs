//! TOML run configuration.
//!
//! Every section is optional and unknown keys are rejected. A document holding
//! only `[fibre]` yields one default profile (linear 1→5 mm over 120°, silver
//! tape). See the README for the full key reference.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::calibration::{self, fit_angle_model, line_of};
use crate::design::{self, Axis, DesignSpace, MountPolicy};
use crate::error::{Error, Result};
use crate::geometry::{MountingConfig, ReflectorProfile, SurfaceFinish};
use crate::optics::FiberSpec;
use crate::shape::{ChainLink, JointChain, Pose2};
use crate::sim::{AngleGrid, NoiseModel, Sensor};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    fibre: RawFibre,
    #[serde(default)]
    mount: RawMount,
    noise: Option<RawNoise>,
    #[serde(default)]
    angles: RawAngles,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    profile: Vec<RawProfile>,
    sweep: Option<RawSweep>,
    chain: Option<RawChain>,
    #[serde(default)]
    link: Vec<RawLink>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFibre {
    diameter_mm: Option<f64>,
    half_divergence_deg: Option<f64>,
    source_flux: Option<f64>,
    coupler_factor: Option<f64>,
    k_v: Option<f64>,
    full_scale_gap_mm: Option<f64>,
    v_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMount {
    standoff_mm: Option<f64>,
    beta_offset_deg: Option<f64>,
    base_radius_mm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigma_v: Option<f64>,
    adc_step_v: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    start_deg: Option<f64>,
    stop_deg: Option<f64>,
    step_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    plot: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    name: String,
    t_min_mm: Option<f64>,
    t_max_mm: Option<f64>,
    alpha_deg: Option<f64>,
    table: Option<Vec<(f64, f64)>>,
    surface: Option<String>,
    reflectance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAxis {
    Fixed(f64),
    Values(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    t_min_mm: Option<RawAxis>,
    t_max_mm: Option<RawAxis>,
    alpha_deg: Option<RawAxis>,
    reflectance: Option<RawAxis>,
    standoff_mm: Option<f64>,
    margin_mm: Option<f64>,
    angle_step_deg: Option<f64>,
    budget: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    base: Option<(f64, f64, f64)>,
    calibration_order: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    length_mm: f64,
    profile: String,
    model: Option<PathBuf>,
}

/// Mounting as configured; the standoff may depend on the profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountSpec {
    /// `None` means `t_max + 1 mm` for each profile.
    pub standoff_mm: Option<f64>,
    pub beta_offset_deg: f64,
    pub base_radius_mm: f64,
}

impl MountSpec {
    pub fn for_profile(&self, profile: &ReflectorProfile) -> Result<MountingConfig> {
        let standoff = self
            .standoff_mm
            .unwrap_or(profile.t_max() + MountingConfig::DEFAULT_MARGIN_MM);
        MountingConfig::new(profile, standoff, self.beta_offset_deg, self.base_radius_mm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub length_mm: f64,
    pub profile: String,
    /// Saved calibration; when absent the link is calibrated from a
    /// noise-free simulation over its full joint span.
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub base: Pose2,
    pub calibration_order: usize,
    pub links: Vec<LinkSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fiber: FiberSpec,
    pub profiles: Vec<ReflectorProfile>,
    pub mount: MountSpec,
    pub noise: Option<NoiseModel>,
    pub angle_start_deg: f64,
    /// `None` means each profile's full joint span.
    pub angle_stop_deg: Option<f64>,
    pub angle_step_deg: f64,
    pub output_dir: PathBuf,
    pub plot: bool,
    pub sweep: DesignSpace,
    pub chain: Option<ChainSpec>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "out";

fn parse_error(text: &str, e: serde_path_to_error::Error<toml::de::Error>) -> Error {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let line = inner.span().map(|s| line_of(text, s.start)).unwrap_or(0);
    let message = if path.is_empty() || path == "." {
        inner.message().to_owned()
    } else {
        format!("`{path}`: {}", inner.message())
    };
    Error::Parse { line, message }
}

fn semantic(context: &str, e: Error) -> Error {
    Error::Config(format!("{context}: {e}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_owned(),
        })?;
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| parse_error(text, e))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&super::read_text(path)?)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let fiber = build_fiber(&raw.fibre).map_err(|e| semantic("fibre", e))?;

        let mut profiles = Vec::new();
        for p in &raw.profile {
            if profiles.iter().any(|q: &ReflectorProfile| q.label() == p.name) {
                return Err(Error::Config(format!("profile `{}` defined twice", p.name)));
            }
            profiles.push(build_profile(p).map_err(|e| semantic(&format!("profile `{}`", p.name), e))?);
        }
        if profiles.is_empty() {
            let p = ReflectorProfile::linear(1.0, 5.0, 120.0, SurfaceFinish::silver_tape())?.with_label("default");
            profiles.push(p);
        }

        let mount = MountSpec {
            standoff_mm: raw.mount.standoff_mm,
            beta_offset_deg: raw.mount.beta_offset_deg.unwrap_or(0.0),
            base_radius_mm: raw
                .mount
                .base_radius_mm
                .unwrap_or(MountingConfig::DEFAULT_BASE_RADIUS_MM),
        };

        let noise = raw
            .noise
            .map(|n| {
                NoiseModel::new(
                    n.sigma_v.unwrap_or(NoiseModel::DEFAULT_SIGMA_V),
                    n.adc_step_v.unwrap_or(NoiseModel::DEFAULT_ADC_STEP),
                    n.seed.unwrap_or(0),
                )
            })
            .transpose()
            .map_err(|e| semantic("noise", e))?;

        let angle_start_deg = raw.angles.start_deg.unwrap_or(0.0);
        let angle_step_deg = raw.angles.step_deg.unwrap_or(AngleGrid::DEFAULT_STEP_DEG);
        let angle_stop_deg = raw.angles.stop_deg;

        let sweep = match &raw.sweep {
            Some(s) => build_sweep(s, fiber).map_err(|e| semantic("sweep", e))?,
            None => DesignSpace::default_grid(fiber),
        };

        let chain = if raw.chain.is_some() || !raw.link.is_empty() {
            let base = raw
                .chain
                .as_ref()
                .and_then(|c| c.base)
                .map(|(x, y, heading_deg)| Pose2 { x, y, heading_deg })
                .unwrap_or_default();
            let calibration_order = raw
                .chain
                .as_ref()
                .and_then(|c| c.calibration_order)
                .unwrap_or(calibration::DEFAULT_ORDER);
            let links = raw
                .link
                .into_iter()
                .map(|l| LinkSpec {
                    length_mm: l.length_mm,
                    profile: l.profile,
                    model: l.model,
                })
                .collect();
            Some(ChainSpec {
                base,
                calibration_order,
                links,
            })
        } else {
            None
        };

        let cfg = Self {
            fiber,
            profiles,
            mount,
            noise,
            angle_start_deg,
            angle_stop_deg,
            angle_step_deg,
            output_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            plot: raw.output.plot.unwrap_or(false),
            sweep,
            chain,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for p in &self.profiles {
            let ctx = format!("profile `{}`", p.label());
            let mount = self.mount.for_profile(p).map_err(|e| semantic(&ctx, e))?;
            self.angle_grid(p, &mount).map_err(|e| semantic(&ctx, e))?;
        }
        if let Some(chain) = &self.chain {
            if chain.links.is_empty() {
                return Err(Error::Config("chain: at least one [[link]] required".into()));
            }
            for (i, l) in chain.links.iter().enumerate() {
                if self.profile(&l.profile).is_none() {
                    return Err(Error::Config(format!("link {i}: undefined profile `{}`", l.profile)));
                }
                if !(l.length_mm > 0.0) {
                    return Err(Error::Config(format!("link {i}: length_mm must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn profile(&self, name: &str) -> Option<&ReflectorProfile> {
        self.profiles.iter().find(|p| p.label() == name)
    }

    /// Angle grid for a mounted profile; must stay inside its joint span.
    pub fn angle_grid(&self, profile: &ReflectorProfile, mount: &MountingConfig) -> Result<AngleGrid> {
        let (lo, hi) = mount.joint_span(profile);
        let stop = self.angle_stop_deg.unwrap_or(hi);
        let grid = AngleGrid::new(self.angle_start_deg, stop, self.angle_step_deg)?;
        for q in [grid.start, grid.stop] {
            if !(lo..=hi).contains(&q) {
                return Err(Error::OutOfSpan {
                    what: "angle grid",
                    value: q,
                    lo,
                    hi,
                });
            }
        }
        Ok(grid)
    }

    pub fn sensor(&self, profile: &ReflectorProfile) -> Result<Sensor> {
        let mount = self.mount.for_profile(profile)?;
        Sensor::new(self.fiber, profile.clone(), mount)
    }

    /// Builds the joint chain. Relative model paths resolve against `base_dir`.
    pub fn build_chain(&self, base_dir: &Path) -> Result<JointChain> {
        let spec = self
            .chain
            .as_ref()
            .ok_or_else(|| Error::Config("no [chain] or [[link]] section".into()))?;
        let links = spec
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                self.build_link(l, spec.calibration_order, base_dir)
                    .map_err(|e| Error::Link {
                        index: i,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        JointChain::new(links, spec.base)
    }

    fn build_link(&self, link: &LinkSpec, order: usize, base_dir: &Path) -> Result<ChainLink> {
        let profile = self.profile(&link.profile).expect("validated");
        let sensor = self.sensor(profile)?;
        let calibration = match &link.model {
            Some(path) => super::load_model(&base_dir.join(path))?,
            None => {
                let grid = self.angle_grid(profile, &sensor.mount)?;
                let curve = sensor.simulate(&grid.values(), None)?;
                fit_angle_model(&curve, order)?
            }
        };
        Ok(ChainLink {
            length_mm: link.length_mm,
            sensor,
            calibration,
        })
    }
}

fn build_fiber(raw: &RawFibre) -> Result<FiberSpec> {
    let mut fiber = FiberSpec {
        diameter: raw.diameter_mm.unwrap_or(FiberSpec::DEFAULT_DIAMETER_MM),
        half_divergence: raw
            .half_divergence_deg
            .unwrap_or(FiberSpec::DEFAULT_HALF_DIVERGENCE_DEG),
        source_flux: raw.source_flux.unwrap_or(1.0),
        coupler_factor: raw.coupler_factor.unwrap_or(FiberSpec::DEFAULT_COUPLER_FACTOR),
        k_v: 1.0,
        v_max: raw.v_max.unwrap_or(FiberSpec::DEFAULT_V_MAX),
    };
    fiber.validate()?;
    match (raw.k_v, raw.full_scale_gap_mm) {
        (Some(_), Some(_)) => {
            return Err(Error::invalid("k_v", "give either k_v or full_scale_gap_mm, not both"));
        }
        (Some(k_v), None) => fiber.k_v = k_v,
        (None, gap) => {
            let gap = gap.unwrap_or(FiberSpec::DEFAULT_FULL_SCALE_GAP_MM);
            if !(gap >= 0.0 && gap.is_finite()) {
                return Err(Error::invalid("full_scale_gap_mm", format!("{gap} must be >= 0")));
            }
            fiber = fiber.scaled_to_full_scale(gap);
        }
    }
    fiber.validate()?;
    Ok(fiber)
}

fn build_surface(raw: &RawProfile) -> Result<SurfaceFinish> {
    let label = raw.surface.as_deref().unwrap_or("silver-tape");
    match (SurfaceFinish::preset(label), raw.reflectance) {
        (_, Some(r)) => SurfaceFinish::new(label, r),
        (Some(preset), None) => Ok(preset),
        (None, None) => Err(Error::invalid(
            "surface",
            format!("`{label}` is not a preset (silver-tape, white-tape, white-resin); set reflectance"),
        )),
    }
}

fn build_profile(raw: &RawProfile) -> Result<ReflectorProfile> {
    let surface = build_surface(raw)?;
    let profile = match &raw.table {
        Some(points) => {
            if raw.t_min_mm.is_some() || raw.t_max_mm.is_some() || raw.alpha_deg.is_some() {
                return Err(Error::invalid(
                    "table",
                    "t_min_mm, t_max_mm and alpha_deg come from the table",
                ));
            }
            ReflectorProfile::table(points.clone(), surface)?
        }
        None => {
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::invalid(name, "missing"));
            ReflectorProfile::linear(
                need(raw.t_min_mm, "t_min_mm")?,
                need(raw.t_max_mm, "t_max_mm")?,
                need(raw.alpha_deg, "alpha_deg")?,
                surface,
            )?
        }
    };
    Ok(profile.with_label(raw.name.clone()))
}

fn build_axis(raw: &Option<RawAxis>, default: Axis) -> Result<Axis> {
    match raw {
        None => Ok(default),
        Some(RawAxis::Fixed(v)) => Ok(Axis::fixed(*v)),
        Some(RawAxis::Values(v)) => Axis::values(v.clone()),
        Some(RawAxis::Range { min, max, count }) => Axis::linspace(*min, *max, *count),
    }
}

fn build_sweep(raw: &RawSweep, fiber: FiberSpec) -> Result<DesignSpace> {
    let defaults = DesignSpace::default_grid(fiber);
    let mount = match (raw.standoff_mm, raw.margin_mm) {
        (Some(_), Some(_)) => return Err(Error::invalid("standoff_mm", "give either standoff_mm or margin_mm")),
        (Some(standoff_mm), None) => MountPolicy::Fixed { standoff_mm },
        (None, Some(margin_mm)) => MountPolicy::AboveTmax { margin_mm },
        (None, None) => MountPolicy::default(),
    };
    let mut space = DesignSpace::new(
        build_axis(&raw.t_min_mm, defaults.t_min.clone())?,
        build_axis(&raw.t_max_mm, defaults.t_max.clone())?,
        build_axis(&raw.alpha_deg, defaults.alpha.clone())?,
        build_axis(&raw.reflectance, defaults.reflectance.clone())?,
        fiber,
        mount,
    )?;
    space.angle_step_deg = raw.angle_step_deg.unwrap_or(AngleGrid::DEFAULT_STEP_DEG);
    space.budget = raw.budget.unwrap_or(design::DEFAULT_BUDGET);
    space.validate()?;
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = RunConfig::parse("[fibre]\ndiameter_mm = 0.9\n").unwrap();
        assert_eq!(cfg.fiber, FiberSpec::default());
        assert_eq!(cfg.profiles.len(), 1);
        assert_eq!(cfg.profiles[0].label(), "default");
        assert_eq!(cfg.profiles[0].t_max(), 5.0);
        assert_eq!(cfg.mount.for_profile(&cfg.profiles[0]).unwrap().standoff, 6.0);
        assert!(cfg.noise.is_none());
        assert_eq!(cfg.angle_step_deg, 1.0);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert!(!cfg.plot);
        assert_eq!(cfg.sweep, DesignSpace::default_grid(FiberSpec::default()));
        assert!(cfg.chain.is_none());
    }

    #[test]
    fn inverted_thickness_names_profile() {
        let text = "[[profile]]\nname = \"B\"\nt_min_mm = 3.0\nt_max_mm = 2.0\nalpha_deg = 120.0\n";
        let err = RunConfig::parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)));
        assert!(msg.contains("profile `B`") && msg.contains("t_max"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let err = RunConfig::parse("[fibre]\ndiametr = 0.9\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{msg}");
        assert!(msg.contains("fibre.diametr"), "{msg}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = RunConfig::parse("[fibre]\ndiameter_mm = 0.9\nv_max = = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn full_document() {
        let text = r#"
[fibre]
diameter_mm = 0.9
half_divergence_deg = 12.0
k_v = 20.0

[mount]
standoff_mm = 6.5
base_radius_mm = 8.0

[noise]
sigma_v = 0.01
seed = 42

[angles]
step_deg = 0.5
stop_deg = 100.0

[output]
dir = "results"
plot = true

[[profile]]
name = "D"
t_min_mm = 1.0
t_max_mm = 5.0
alpha_deg = 120.0

[[profile]]
name = "T"
table = [[0.0, 1.0], [60.0, 2.0], [120.0, 4.0]]
surface = "white-tape"

[sweep]
t_min_mm = 1.0
t_max_mm = { min = 2.0, max = 5.0, count = 4 }
alpha_deg = [120.0, 180.0]
budget = 100

[chain]
base = [0.0, 0.0, 90.0]

[[link]]
length_mm = 30.0
profile = "D"
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.fiber.k_v, 20.0);
        assert_eq!(cfg.fiber.half_divergence, 12.0);
        assert_eq!(cfg.noise.unwrap().seed, 42);
        assert_eq!(cfg.noise.unwrap().adc_step, NoiseModel::DEFAULT_ADC_STEP);
        assert_eq!(cfg.profile("T").unwrap().surface().reflectance(), 0.80);
        assert_eq!(cfg.sweep.t_max.as_slice(), &[2.0, 3.0, 4.0, 5.0]);
        assert_eq!(cfg.sweep.cell_count(), 2 * 4 * 3);
        assert_eq!(cfg.sweep.budget, 100);
        let chain = cfg.build_chain(Path::new(".")).unwrap();
        assert_eq!(chain.base().heading_deg, 90.0);
        assert_eq!(chain.links()[0].calibration.order(), 5);
        let d = cfg.profile("D").unwrap();
        let grid = cfg.angle_grid(d, &cfg.mount.for_profile(d).unwrap()).unwrap();
        assert_eq!(grid.values().len(), 201);
    }

    #[test]
    fn semantic_errors() {
        assert!(RunConfig::parse("[mount]\nstandoff_mm = 4.0\n").is_err());
        assert!(RunConfig::parse("[angles]\nstop_deg = 200.0\n").is_err());
        assert!(RunConfig::parse("[[link]]\nlength_mm = 3.0\nprofile = \"nope\"\n").is_err());
        assert!(RunConfig::parse(
            "[[profile]]\nname = \"x\"\nt_min_mm = 1.0\nt_max_mm = 2.0\nalpha_deg = 90.0\nsurface = \"chrome\"\n"
        )
        .is_err());
        assert!(RunConfig::parse("[fibre]\nk_v = 2.0\nfull_scale_gap_mm = 1.0\n").is_err());
        let dup = "[[profile]]\nname = \"a\"\nt_min_mm = 1.0\nt_max_mm = 2.0\nalpha_deg = 90.0\n";
        assert!(RunConfig::parse(&format!("{dup}{dup}")).is_err());
    }
}
