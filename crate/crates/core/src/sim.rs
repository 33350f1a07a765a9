//! Forward simulation of voltage-vs-joint-angle response curves.
//!
//! Noise, when requested, follows the detector + ADC chain: Gaussian noise is
//! added to the physical voltage, the result is rounded to the nearest ADC
//! step, then clamped to `[0, v_max]`. The noise stream is ChaCha8 seeded with
//! `seed_from_u64`, and normal deviates come from `rand_distr::StandardNormal`,
//! so a seed reproduces the same curve on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{gap_at, MountingConfig, ReflectorProfile, SurfaceFinish};
use crate::optics::{theoretical_voltage, FiberSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Standard deviation of additive Gaussian noise (V).
    pub sigma_v: f64,
    /// ADC quantization step (V); 0 disables quantization.
    pub adc_step: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub const DEFAULT_SIGMA_V: f64 = 0.02;
    /// 10-bit converter over 5 V.
    pub const DEFAULT_ADC_STEP: f64 = 5.0 / 1023.0;

    pub fn new(sigma_v: f64, adc_step: f64, seed: u64) -> Result<Self> {
        if !(sigma_v >= 0.0 && sigma_v.is_finite()) {
            return Err(Error::invalid("sigma_v", format!("{sigma_v} must be >= 0")));
        }
        if !(adc_step >= 0.0 && adc_step.is_finite()) {
            return Err(Error::invalid("adc_step", format!("{adc_step} must be >= 0")));
        }
        Ok(Self {
            sigma_v,
            adc_step,
            seed,
        })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn apply(&self, rng: &mut ChaCha8Rng, v: f64, v_max: f64) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let noisy = v + self.sigma_v * z;
        let quantized = if self.adc_step > 0.0 {
            (noisy / self.adc_step).round() * self.adc_step
        } else {
            noisy
        };
        quantized.clamp(0.0, v_max)
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_v: Self::DEFAULT_SIGMA_V,
            adc_step: Self::DEFAULT_ADC_STEP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub angle_deg: f64,
    pub voltage_v: f64,
}

/// Ordered `(angle, voltage)` samples with free-form `key: value` metadata.
///
/// Angles are strictly increasing and the curve is never empty. Metadata
/// entries with an empty key hold plain comment text.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    samples: Vec<Sample>,
    metadata: Vec<(String, String)>,
}

impl ResponseCurve {
    pub fn new(samples: Vec<Sample>, metadata: Vec<(String, String)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyCurve);
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !s.angle_deg.is_finite() || !s.voltage_v.is_finite())
        {
            return Err(Error::invalid(
                "curve sample",
                format!("non-finite value at sample {i}"),
            ));
        }
        if let Some(i) = samples.windows(2).position(|w| !(w[1].angle_deg > w[0].angle_deg)) {
            return Err(Error::Ordering { index: i + 1 });
        }
        Ok(Self { samples, metadata })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let samples = pairs
            .into_iter()
            .map(|(angle_deg, voltage_v)| Sample { angle_deg, voltage_v })
            .collect();
        Self::new(samples, Vec::new())
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.angle_deg)
    }

    pub fn voltages(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.voltage_v)
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Sets `key`, replacing an existing entry in place.
    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let (key, value) = (key.into(), value.into());
        match self.metadata.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    /// Legend label: profile, then surface, falling back to `curve`.
    pub fn label(&self) -> String {
        match (self.meta("profile"), self.meta("surface")) {
            (Some(p), Some(s)) => format!("{p} ({s})"),
            (Some(p), None) => p.to_owned(),
            (None, Some(s)) => s.to_owned(),
            (None, None) => "curve".to_owned(),
        }
    }

    pub fn angle_span(&self) -> (f64, f64) {
        (
            self.samples[0].angle_deg,
            self.samples[self.samples.len() - 1].angle_deg,
        )
    }

    /// Sub-curve with angles in `[q_lo, q_hi]`.
    pub fn window(&self, q_lo: f64, q_hi: f64) -> Result<Self> {
        let samples: Vec<Sample> = self
            .samples
            .iter()
            .copied()
            .filter(|s| s.angle_deg >= q_lo && s.angle_deg <= q_hi)
            .collect();
        Self::new(samples, self.metadata.clone())
    }

    /// Voltage at `q` by linear interpolation between samples.
    pub fn voltage_at(&self, q: f64) -> Result<f64> {
        let (lo, hi) = self.angle_span();
        if !(lo..=hi).contains(&q) {
            return Err(Error::OutOfSpan {
                what: "curve angle",
                value: q,
                lo,
                hi,
            });
        }
        let i = self.samples.partition_point(|s| s.angle_deg < q);
        let s1 = self.samples[i];
        if s1.angle_deg == q || i == 0 {
            return Ok(s1.voltage_v);
        }
        let s0 = self.samples[i - 1];
        let t = (q - s0.angle_deg) / (s1.angle_deg - s0.angle_deg);
        Ok(s0.voltage_v + t * (s1.voltage_v - s0.voltage_v))
    }
}

/// Evenly spaced angles from `start` to `stop` inclusive.
///
/// When `step` does not divide the interval, `stop` is appended as a final,
/// shorter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AngleGrid {
    pub const DEFAULT_STEP_DEG: f64 = 1.0;

    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("angle step", format!("{step} must be positive")));
        }
        if !(stop >= start && start.is_finite() && stop.is_finite()) {
            return Err(Error::invalid("angle grid", format!("stop {stop} < start {start}")));
        }
        Ok(Self { start, stop, step })
    }

    /// Full joint span of a mounted profile at the default 1° step.
    pub fn for_mount(profile: &ReflectorProfile, mount: &MountingConfig) -> Self {
        let (_, hi) = mount.joint_span(profile);
        Self {
            start: 0.0,
            stop: hi,
            step: Self::DEFAULT_STEP_DEG,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let n = ((span / self.step) + 1e-9).floor() as usize;
        let mut out: Vec<f64> = (0..=n).map(|i| self.start + i as f64 * self.step).collect();
        let tol = 1e-9 * self.step;
        let last = out.last_mut().unwrap();
        if (*last - self.stop).abs() <= tol || *last > self.stop {
            *last = self.stop;
        } else {
            out.push(self.stop);
        }
        out.dedup();
        out
    }
}

/// A fibre facing a mounted reflector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    pub fiber: FiberSpec,
    pub profile: ReflectorProfile,
    pub mount: MountingConfig,
}

impl Sensor {
    pub fn new(fiber: FiberSpec, profile: ReflectorProfile, mount: MountingConfig) -> Result<Self> {
        fiber.validate()?;
        mount.validate_for(&profile)?;
        Ok(Self { fiber, profile, mount })
    }

    /// Sensor with the default mounting for `profile`.
    pub fn with_default_mount(fiber: FiberSpec, profile: ReflectorProfile) -> Result<Self> {
        let mount = MountingConfig::default_for(&profile);
        Self::new(fiber, profile, mount)
    }

    /// Noise-free voltage at joint angle `q`.
    pub fn voltage_at(&self, q: f64) -> Result<f64> {
        let h = gap_at(&self.profile, &self.mount, q)?;
        Ok(theoretical_voltage(&self.fiber, h, self.profile.surface()))
    }

    pub fn joint_span(&self) -> (f64, f64) {
        self.mount.joint_span(&self.profile)
    }

    pub fn default_grid(&self) -> AngleGrid {
        AngleGrid::for_mount(&self.profile, &self.mount)
    }

    pub fn simulate(&self, angles: &[f64], noise: Option<&NoiseModel>) -> Result<ResponseCurve> {
        simulate_response(&self.fiber, &self.profile, &self.mount, angles, noise)
    }
}

pub fn simulate_response(
    fiber: &FiberSpec,
    profile: &ReflectorProfile,
    mount: &MountingConfig,
    angles: &[f64],
    noise: Option<&NoiseModel>,
) -> Result<ResponseCurve> {
    if let Some(i) = angles.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Ordering { index: i + 1 });
    }
    let mut rng = noise.map(NoiseModel::rng);
    let samples = angles
        .iter()
        .map(|&q| {
            let h = gap_at(profile, mount, q)?;
            let mut v = theoretical_voltage(fiber, h, profile.surface());
            if let (Some(model), Some(rng)) = (noise, rng.as_mut()) {
                v = model.apply(rng, v, fiber.v_max);
            }
            Ok(Sample {
                angle_deg: q,
                voltage_v: v,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut metadata = vec![
        ("source".to_owned(), "simulated".to_owned()),
        ("profile".to_owned(), profile.label().to_owned()),
        ("surface".to_owned(), profile.surface().label().to_owned()),
        ("reflectance".to_owned(), profile.surface().reflectance().to_string()),
    ];
    if let Some(n) = noise {
        metadata.push(("noise_sigma_v".to_owned(), n.sigma_v.to_string()));
        metadata.push(("adc_step_v".to_owned(), n.adc_step.to_string()));
        metadata.push(("seed".to_owned(), n.seed.to_string()));
    }
    ResponseCurve::new(samples, metadata)
}

/// One noise-free curve per surface on identical geometry, in input order.
pub fn sweep_surfaces(
    fiber: &FiberSpec,
    profile: &ReflectorProfile,
    mount: &MountingConfig,
    angles: &[f64],
    surfaces: &[SurfaceFinish],
) -> Result<Vec<ResponseCurve>> {
    if surfaces.is_empty() {
        return Err(Error::invalid("surfaces", "at least one surface required"));
    }
    surfaces
        .iter()
        .map(|s| {
            let p = profile.clone().with_surface(s.clone());
            simulate_response(fiber, &p, mount, angles, None)
        })
        .collect()
}
