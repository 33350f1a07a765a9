//! Curvature-varying reflector profiles and the mounting geometry that turns
//! a joint angle into a fibre-to-reflector gap.
//!
//! The joint angle indexes the profile angle 1:1, shifted by the mount's
//! `beta_offset`. Angles are in degrees and lengths in millimetres throughout.

use crate::error::{Error, Result};

/// Surface coating of a reflector. `reflectance` is the fraction of incident
/// flux returned by the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFinish {
    label: String,
    reflectance: f64,
}

impl SurfaceFinish {
    pub fn new(label: impl Into<String>, reflectance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectance) {
            return Err(Error::invalid("reflectance", format!("{reflectance} not in [0, 1]")));
        }
        Ok(Self {
            label: label.into(),
            reflectance,
        })
    }

    /// Named presets: `silver-tape` (0.95), `white-tape` (0.80), `white-resin` (0.60).
    ///
    /// The values are nominal; only their ordering is meaningful.
    pub fn preset(label: &str) -> Option<Self> {
        let reflectance = match label {
            "silver-tape" => 0.95,
            "white-tape" => 0.80,
            "white-resin" => 0.60,
            _ => return None,
        };
        Some(Self {
            label: label.to_owned(),
            reflectance,
        })
    }

    pub fn silver_tape() -> Self {
        Self::preset("silver-tape").unwrap()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn reflectance(&self) -> f64 {
        self.reflectance
    }
}

/// How thickness varies between `t_min` at β = 0 and `t_max` at β = α.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Linear,
    /// `(beta_deg, thickness_mm)` pairs, interpolated piecewise-linearly.
    SampledTable(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectorProfile {
    label: String,
    t_min: f64,
    t_max: f64,
    alpha: f64,
    shape: ProfileShape,
    surface: SurfaceFinish,
}

impl ReflectorProfile {
    /// Thickness rising linearly from `t_min` to `t_max` over `alpha` degrees.
    pub fn linear(t_min: f64, t_max: f64, alpha: f64, surface: SurfaceFinish) -> Result<Self> {
        Self::validate_bounds(t_min, t_max, alpha)?;
        Ok(Self {
            label: format!("linear {t_min}-{t_max} mm / {alpha} deg"),
            t_min,
            t_max,
            alpha,
            shape: ProfileShape::Linear,
            surface,
        })
    }

    /// Profile from a sampled table. `t_min`, `t_max` and `alpha` are taken from
    /// the first and last points; every interior thickness must lie between them.
    pub fn table(points: Vec<(f64, f64)>, surface: SurfaceFinish) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("profile table", "needs at least two points"));
        }
        let (beta0, t_min) = points[0];
        let (alpha, t_max) = points[points.len() - 1];
        if beta0 != 0.0 {
            return Err(Error::invalid("profile table", format!("first beta {beta0} must be 0")));
        }
        Self::validate_bounds(t_min, t_max, alpha)?;
        for (i, pair) in points.windows(2).enumerate() {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::invalid(
                    "profile table",
                    format!("beta not strictly increasing at point {}", i + 1),
                ));
            }
        }
        if let Some((i, &(_, t))) = points
            .iter()
            .enumerate()
            .find(|(_, &(_, t))| !(t_min..=t_max).contains(&t))
        {
            return Err(Error::invalid(
                "profile table",
                format!("thickness {t} at point {i} outside [{t_min}, {t_max}]"),
            ));
        }
        Ok(Self {
            label: format!("table {t_min}-{t_max} mm / {alpha} deg"),
            t_min,
            t_max,
            alpha,
            shape: ProfileShape::SampledTable(points),
            surface,
        })
    }

    fn validate_bounds(t_min: f64, t_max: f64, alpha: f64) -> Result<()> {
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(Error::invalid("t_min", format!("{t_min} must be positive")));
        }
        if !(t_max >= t_min && t_max.is_finite()) {
            return Err(Error::invalid("t_max", format!("{t_max} must be >= t_min {t_min}")));
        }
        if !(alpha > 0.0 && alpha <= 360.0) {
            return Err(Error::invalid("alpha", format!("{alpha} not in (0, 360]")));
        }
        Ok(())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_surface(mut self, surface: SurfaceFinish) -> Self {
        self.surface = surface;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }
    pub fn surface(&self) -> &SurfaceFinish {
        &self.surface
    }
}

/// Position of the reflector relative to the fibre tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountingConfig {
    /// Distance from fibre tip to the reflector's zero-thickness base surface.
    pub standoff: f64,
    /// Profile angle the fibre faces at joint angle 0.
    pub beta_offset: f64,
    /// Base circle radius, only used for outline export.
    pub base_radius: f64,
}

impl MountingConfig {
    pub const DEFAULT_MARGIN_MM: f64 = 1.0;
    pub const DEFAULT_BASE_RADIUS_MM: f64 = 10.0;

    /// Mounting for `profile`, validated against it.
    pub fn new(profile: &ReflectorProfile, standoff: f64, beta_offset: f64, base_radius: f64) -> Result<Self> {
        let mount = Self {
            standoff,
            beta_offset,
            base_radius,
        };
        mount.validate_for(profile)?;
        Ok(mount)
    }

    /// Standoff `t_max + 1 mm`, zero offset, default base radius.
    pub fn default_for(profile: &ReflectorProfile) -> Self {
        Self {
            standoff: profile.t_max() + Self::DEFAULT_MARGIN_MM,
            beta_offset: 0.0,
            base_radius: Self::DEFAULT_BASE_RADIUS_MM,
        }
    }

    pub fn validate_for(&self, profile: &ReflectorProfile) -> Result<()> {
        if !(self.standoff > profile.t_max()) {
            return Err(Error::invalid(
                "standoff",
                format!("{} mm must exceed t_max {} mm", self.standoff, profile.t_max()),
            ));
        }
        if !(0.0..profile.alpha()).contains(&self.beta_offset) {
            return Err(Error::invalid(
                "beta_offset",
                format!("{} not in [0, {})", self.beta_offset, profile.alpha()),
            ));
        }
        if !(self.base_radius >= 0.0 && self.base_radius.is_finite()) {
            return Err(Error::invalid(
                "base_radius",
                format!("{} must be >= 0", self.base_radius),
            ));
        }
        Ok(())
    }

    /// Joint-angle interval that keeps the fibre on the profile.
    pub fn joint_span(&self, profile: &ReflectorProfile) -> (f64, f64) {
        (-self.beta_offset, profile.alpha() - self.beta_offset)
    }
}

pub fn thickness_at(profile: &ReflectorProfile, beta: f64) -> Result<f64> {
    if !(0.0..=profile.alpha).contains(&beta) {
        return Err(Error::OutOfSpan {
            what: "profile angle",
            value: beta,
            lo: 0.0,
            hi: profile.alpha,
        });
    }
    let t = match &profile.shape {
        ProfileShape::Linear => profile.t_min + (profile.t_max - profile.t_min) * beta / profile.alpha,
        ProfileShape::SampledTable(points) => {
            // First index whose beta exceeds the query; clamped so the final
            // point falls into the last segment.
            let upper = points.partition_point(|&(b, _)| b <= beta).clamp(1, points.len() - 1);
            let (b0, t0) = points[upper - 1];
            let (b1, t1) = points[upper];
            t0 + (t1 - t0) * (beta - b0) / (b1 - b0)
        }
    };
    Ok(t.clamp(profile.t_min, profile.t_max))
}

/// Fibre-to-reflector gap `h` at joint angle `q`.
pub fn gap_at(profile: &ReflectorProfile, mount: &MountingConfig, q: f64) -> Result<f64> {
    let beta = mount.beta_offset + q;
    let thickness = thickness_at(profile, beta).map_err(|_| {
        let (lo, hi) = mount.joint_span(profile);
        Error::OutOfSpan {
            what: "joint angle",
            value: q,
            lo,
            hi,
        }
    })?;
    let gap = mount.standoff - thickness;
    if gap <= 0.0 {
        return Err(Error::MountingViolation { gap_mm: gap });
    }
    Ok(gap)
}

/// Outer edge of the reflector cross-section at `n_samples` evenly spaced
/// profile angles over `[0, alpha]`.
pub fn export_outline(profile: &ReflectorProfile, mount: &MountingConfig, n_samples: usize) -> Result<Vec<(f64, f64)>> {
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", format!("{n_samples} < 2")));
    }
    let last = (n_samples - 1) as f64;
    (0..n_samples)
        .map(|i| {
            let beta = if i + 1 == n_samples {
                profile.alpha
            } else {
                profile.alpha * i as f64 / last
            };
            let radius = mount.base_radius + thickness_at(profile, beta)?;
            let (sin, cos) = beta.to_radians().sin_cos();
            Ok((radius * cos, radius * sin))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear(t_min: f64, t_max: f64, alpha: f64) -> ReflectorProfile {
        ReflectorProfile::linear(t_min, t_max, alpha, SurfaceFinish::silver_tape()).unwrap()
    }

    fn mount(standoff: f64) -> MountingConfig {
        MountingConfig {
            standoff,
            beta_offset: 0.0,
            base_radius: 10.0,
        }
    }

    #[test]
    fn linear_thickness_endpoints_and_midpoint() {
        let p = linear(1.0, 5.0, 120.0);
        assert_eq!(thickness_at(&p, 0.0).unwrap(), 1.0);
        assert_eq!(thickness_at(&p, 120.0).unwrap(), 5.0);
        assert_eq!(thickness_at(&p, 60.0).unwrap(), 3.0);
    }

    #[test]
    fn thickness_outside_span_names_interval() {
        let p = linear(1.0, 5.0, 120.0);
        let err = thickness_at(&p, 120.5).unwrap_err();
        assert!(matches!(err, Error::OutOfSpan { lo, hi, .. } if lo == 0.0 && hi == 120.0));
        assert!(err.to_string().contains("[0, 120]"));
        assert!(thickness_at(&p, -1.0).is_err());
    }

    #[test]
    fn gap_examples() {
        let p = linear(1.0, 5.0, 120.0);
        assert_eq!(gap_at(&p, &mount(6.0), 0.0).unwrap(), 5.0);
        assert_eq!(gap_at(&p, &mount(6.0), 120.0).unwrap(), 1.0);
        let p180 = linear(1.0, 5.0, 180.0);
        assert!((gap_at(&p180, &mount(6.0), 90.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gap_errors() {
        let p = linear(1.0, 5.0, 120.0);
        let err = gap_at(&p, &mount(6.0), 130.0).unwrap_err();
        assert!(matches!(
            err,
            Error::OutOfSpan {
                what: "joint angle",
                ..
            }
        ));
        // Bypass construction checks to reach the runtime guard.
        let err = gap_at(&p, &mount(4.0), 120.0).unwrap_err();
        assert!(matches!(err, Error::MountingViolation { .. }));
    }

    #[test]
    fn beta_offset_shifts_joint_span() {
        let p = linear(1.0, 5.0, 120.0);
        let m = MountingConfig::new(&p, 6.0, 20.0, 10.0).unwrap();
        assert_eq!(m.joint_span(&p), (-20.0, 100.0));
        assert_eq!(gap_at(&p, &m, 0.0).unwrap(), gap_at(&p, &mount(6.0), 20.0).unwrap());
        assert!(gap_at(&p, &m, 101.0).is_err());
    }

    #[test]
    fn mounting_validation() {
        let p = linear(1.0, 5.0, 120.0);
        assert!(MountingConfig::new(&p, 5.0, 0.0, 10.0).is_err());
        assert!(MountingConfig::new(&p, 6.0, 120.0, 10.0).is_err());
        assert_eq!(MountingConfig::default_for(&p).standoff, 6.0);
    }

    #[test]
    fn profile_validation() {
        let s = SurfaceFinish::silver_tape();
        assert!(ReflectorProfile::linear(2.0, 1.0, 120.0, s.clone()).is_err());
        assert!(ReflectorProfile::linear(0.0, 1.0, 120.0, s.clone()).is_err());
        assert!(ReflectorProfile::linear(1.0, 2.0, 0.0, s.clone()).is_err());
        assert!(ReflectorProfile::linear(1.0, 2.0, 361.0, s.clone()).is_err());
        assert!(ReflectorProfile::table(vec![(0.0, 1.0), (0.0, 2.0)], s.clone()).is_err());
        assert!(ReflectorProfile::table(vec![(5.0, 1.0), (10.0, 2.0)], s.clone()).is_err());
        assert!(ReflectorProfile::table(vec![(0.0, 1.0), (5.0, 3.0), (10.0, 2.0)], s.clone()).is_err());
        assert!(SurfaceFinish::new("x", 1.2).is_err());
    }

    #[test]
    fn table_interpolates_between_samples() {
        let p = ReflectorProfile::table(
            vec![(0.0, 1.0), (30.0, 1.5), (90.0, 4.5), (120.0, 5.0)],
            SurfaceFinish::silver_tape(),
        )
        .unwrap();
        assert_eq!(p.alpha(), 120.0);
        assert_eq!(thickness_at(&p, 30.0).unwrap(), 1.5);
        assert!((thickness_at(&p, 60.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(thickness_at(&p, 120.0).unwrap(), 5.0);
    }

    #[test]
    fn outline_examples() {
        let p = linear(1.0, 5.0, 120.0);
        let pts = export_outline(&p, &mount(6.0), 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].0 - 11.0).abs() < 1e-12 && pts[0].1.abs() < 1e-12);
        let a = 120f64.to_radians();
        assert!((pts[1].0 - 15.0 * a.cos()).abs() < 1e-12);
        assert!((pts[1].1 - 15.0 * a.sin()).abs() < 1e-12);

        let flat = ReflectorProfile::table(vec![(0.0, 1.0), (120.0, 1.0)], SurfaceFinish::silver_tape()).unwrap();
        for (x, y) in export_outline(&flat, &mount(2.0), 2).unwrap() {
            assert!((x.hypot(y) - 11.0).abs() < 1e-12);
        }

        let pts = export_outline(&p, &mount(6.0), 5).unwrap();
        let angles: Vec<f64> = pts.iter().map(|(x, y)| y.atan2(*x)).collect();
        assert!(angles.windows(2).all(|w| w[1] > w[0]));
        assert!(export_outline(&p, &mount(6.0), 1).is_err());
    }

    proptest! {
        #[test]
        fn linear_thickness_monotone(t_min in 0.5f64..3.0, dt in 0.0f64..4.0, alpha in 30.0f64..360.0,
                                     a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let p = linear(t_min, t_min + dt, alpha);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let t_lo = thickness_at(&p, lo * alpha).unwrap();
            let t_hi = thickness_at(&p, hi * alpha).unwrap();
            if dt == 0.0 {
                prop_assert_eq!(t_lo, t_hi);
            } else if hi > lo {
                prop_assert!(t_hi > t_lo);
            }
        }

        #[test]
        fn gap_decreasing_and_standoff_conserved(dt in 0.1f64..4.0, alpha in 30.0f64..360.0,
                                                 a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let p = linear(1.0, 1.0 + dt, alpha);
            let m = MountingConfig::default_for(&p);
            let (q0, q1) = if a < b { (a * alpha, b * alpha) } else { (b * alpha, a * alpha) };
            let h0 = gap_at(&p, &m, q0).unwrap();
            let h1 = gap_at(&p, &m, q1).unwrap();
            if q1 > q0 { prop_assert!(h1 < h0); }
            prop_assert!((h0 + thickness_at(&p, q0).unwrap() - m.standoff).abs() < 1e-12);
        }

        #[test]
        fn two_point_table_matches_linear(t_min in 0.5f64..3.0, dt in 0.0f64..4.0,
                                          alpha in 30.0f64..360.0, u in 0.0f64..1.0) {
            let lin = linear(t_min, t_min + dt, alpha);
            let tab = ReflectorProfile::table(vec![(0.0, t_min), (alpha, t_min + dt)],
                                              SurfaceFinish::silver_tape()).unwrap();
            let beta = u * alpha;
            prop_assert!((thickness_at(&lin, beta).unwrap() - thickness_at(&tab, beta).unwrap()).abs() <= 1e-12);
        }
    }
}
