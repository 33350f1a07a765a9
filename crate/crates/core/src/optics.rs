//! Gaussian light-coupling model and voltage conversion.
//!
//! Light leaves the fibre as a Gaussian beam of width `w(h) = d/2 + 2 h tan θ`
//! (the factor 2 is the round trip to the reflector and back). Peak intensity
//! is normalized so the beam carries `phi_src` at every gap:
//! `I0(h) = 2 phi_src / (π w²)`. Integrating `I0 exp(-2r²/w²) 2πr` over the
//! fibre face `r ∈ [0, d/2]` gives
//!
//! ```text
//! phi_c(h) = phi_src * (1 - exp(-d² / (2 w(h)²)))
//! ```
//!
//! and the detector voltage is `phi_c * R * coupler_factor * k_v`, clamped to
//! `[0, v_max]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::SurfaceFinish;
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec {
    /// Fibre aperture diameter (mm).
    pub diameter: f64,
    /// Transmitting half-divergence angle (deg).
    pub half_divergence: f64,
    /// Source flux, arbitrary fixed power units.
    pub source_flux: f64,
    /// Fraction of returned power that reaches the detector.
    pub coupler_factor: f64,
    /// Volts per power unit.
    pub k_v: f64,
    /// Supply / ADC clamp voltage.
    pub v_max: f64,
}

impl FiberSpec {
    pub const DEFAULT_DIAMETER_MM: f64 = 0.9;
    pub const DEFAULT_HALF_DIVERGENCE_DEG: f64 = 10.0;
    pub const DEFAULT_COUPLER_FACTOR: f64 = 0.5;
    pub const DEFAULT_V_MAX: f64 = 5.0;
    /// Gap at which a perfect reflector produces full-scale output by default.
    pub const DEFAULT_FULL_SCALE_GAP_MM: f64 = 1.0;

    pub fn new(
        diameter: f64,
        half_divergence: f64,
        source_flux: f64,
        coupler_factor: f64,
        k_v: f64,
        v_max: f64,
    ) -> Result<Self> {
        let spec = Self {
            diameter,
            half_divergence,
            source_flux,
            coupler_factor,
            k_v,
            v_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &str, value: f64, rule: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{value} violates {rule}")))
            }
        };
        check(
            self.diameter > 0.0 && self.diameter.is_finite(),
            "diameter",
            self.diameter,
            "d > 0",
        )?;
        check(
            (0.0..90.0).contains(&self.half_divergence),
            "half_divergence",
            self.half_divergence,
            "0 <= theta < 90",
        )?;
        check(
            self.source_flux > 0.0 && self.source_flux.is_finite(),
            "source_flux",
            self.source_flux,
            "phi_src > 0",
        )?;
        check(
            self.coupler_factor > 0.0 && self.coupler_factor <= 1.0,
            "coupler_factor",
            self.coupler_factor,
            "0 < coupler_factor <= 1",
        )?;
        check(self.k_v > 0.0 && self.k_v.is_finite(), "k_v", self.k_v, "k_v > 0")?;
        check(
            self.v_max > 0.0 && self.v_max.is_finite(),
            "v_max",
            self.v_max,
            "v_max > 0",
        )
    }

    /// Returns a copy with `k_v` chosen so that a perfect reflector (R = 1) at
    /// `gap_mm` produces exactly `v_max`.
    pub fn scaled_to_full_scale(mut self, gap_mm: f64) -> Self {
        self.k_v = self.v_max / (coupled_flux(&self, gap_mm) * self.coupler_factor);
        self
    }
}

impl Default for FiberSpec {
    /// 0.9 mm fibre, 10° half-divergence, unit source flux, 50:50 coupler,
    /// 5 V clamp, `k_v` scaled to full scale at a 1 mm gap.
    fn default() -> Self {
        Self {
            diameter: Self::DEFAULT_DIAMETER_MM,
            half_divergence: Self::DEFAULT_HALF_DIVERGENCE_DEG,
            source_flux: 1.0,
            coupler_factor: Self::DEFAULT_COUPLER_FACTOR,
            k_v: 1.0,
            v_max: Self::DEFAULT_V_MAX,
        }
        .scaled_to_full_scale(Self::DEFAULT_FULL_SCALE_GAP_MM)
    }
}

/// Gaussian beam width at the receiving plane for gap `h`.
pub fn gaussian_width(fiber: &FiberSpec, h: f64) -> f64 {
    debug_assert!(h >= 0.0, "negative gap {h}");
    0.5 * fiber.diameter + 2.0 * h * fiber.half_divergence.to_radians().tan()
}

fn peak_intensity(fiber: &FiberSpec, w: f64) -> f64 {
    2.0 * fiber.source_flux / (PI * w * w)
}

/// Flux coupled back into the fibre, closed form.
pub fn coupled_flux(fiber: &FiberSpec, h: f64) -> f64 {
    let w = gaussian_width(fiber, h);
    let d = fiber.diameter;
    -fiber.source_flux * (-(d * d) / (2.0 * w * w)).exp_m1()
}

/// Flux coupled back into the fibre by adaptive quadrature of the radial
/// intensity integral. Independent of [`coupled_flux`]; used as its oracle.
pub fn coupled_flux_quadrature(fiber: &FiberSpec, h: f64, rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
        return Err(Error::invalid("rel_tol", format!("{rel_tol} not in (0, 1e-6]")));
    }
    let w = gaussian_width(fiber, h);
    let i0 = peak_intensity(fiber, w);
    let integrand = |r: f64| i0 * (-2.0 * r * r / (w * w)).exp() * 2.0 * PI * r;
    quadrature::adaptive_simpson(
        integrand,
        0.0,
        0.5 * fiber.diameter,
        rel_tol,
        quadrature::DEFAULT_BUDGET,
    )
}

/// Unclamped detector voltage.
pub fn raw_voltage(fiber: &FiberSpec, h: f64, surface: &SurfaceFinish) -> f64 {
    coupled_flux(fiber, h) * surface.reflectance() * fiber.coupler_factor * fiber.k_v
}

/// Detector voltage for gap `h`, clamped to `[0, v_max]`.
pub fn theoretical_voltage(fiber: &FiberSpec, h: f64, surface: &SurfaceFinish) -> f64 {
    raw_voltage(fiber, h, surface).clamp(0.0, fiber.v_max)
}
