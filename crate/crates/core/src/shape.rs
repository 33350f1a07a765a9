//! Planar serial chains: per-joint voltages become angles through each link's
//! calibration, and angles compose into a backbone polyline.
//!
//! Joint angles are relative to the previous link and given in degrees.

use crate::calibration::{predict_angle, CalibrationModel};
use crate::error::{Error, Result};
use crate::sim::{NoiseModel, Sensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

impl Pose2 {
    pub const ORIGIN: Pose2 = Pose2 {
        x: 0.0,
        y: 0.0,
        heading_deg: 0.0,
    };
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::ORIGIN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub length_mm: f64,
    pub sensor: Sensor,
    pub calibration: CalibrationModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointChain {
    links: Vec<ChainLink>,
    base: Pose2,
}

impl JointChain {
    pub fn new(links: Vec<ChainLink>, base: Pose2) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::invalid("chain", "at least one link required"));
        }
        if let Some(i) = links
            .iter()
            .position(|l| !(l.length_mm > 0.0 && l.length_mm.is_finite()))
        {
            return Err(Error::invalid(
                "link length",
                format!("link {i} length must be positive"),
            ));
        }
        Ok(Self { links, base })
    }

    pub fn links(&self) -> &[ChainLink] {
        &self.links
    }

    pub fn base(&self) -> Pose2 {
        self.base
    }

    pub fn with_base(mut self, base: Pose2) -> Self {
        self.base = base;
        self
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.length_mm).collect()
    }

    /// Sensor voltages the chain would report at `angles`.
    ///
    /// With noise, link `i` draws from the stream seeded `seed + i`.
    pub fn sensor_voltages(&self, angles: &[f64], noise: Option<&NoiseModel>) -> Result<Vec<f64>> {
        check_arity(self.links.len(), angles.len())?;
        self.links
            .iter()
            .zip(angles)
            .enumerate()
            .map(|(i, (link, &q))| {
                let n = noise.map(|n| n.with_seed(n.seed.wrapping_add(i as u64)));
                let curve = link.sensor.simulate(&[q], n.as_ref()).map_err(|e| at_link(i, e))?;
                Ok(curve.samples()[0].voltage_v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainShape {
    /// Base, every joint, and the tip.
    pub joint_positions: Vec<(f64, f64)>,
    pub tip_pose: Pose2,
    pub angles: Vec<f64>,
}

fn check_arity(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Arity { expected, got });
    }
    Ok(())
}

fn at_link(index: usize, source: Error) -> Error {
    Error::Link {
        index,
        source: Box::new(source),
    }
}

/// Chain composition from a base pose and link lengths.
pub fn compose_planar(base: Pose2, lengths: &[f64], angles: &[f64]) -> Result<ChainShape> {
    check_arity(lengths.len(), angles.len())?;
    let mut heading = base.heading_deg;
    let (mut x, mut y) = (base.x, base.y);
    let mut joint_positions = Vec::with_capacity(lengths.len() + 1);
    joint_positions.push((x, y));
    for (&len, &q) in lengths.iter().zip(angles) {
        heading += q;
        let (sin, cos) = heading.to_radians().sin_cos();
        x += len * cos;
        y += len * sin;
        joint_positions.push((x, y));
    }
    Ok(ChainShape {
        joint_positions,
        tip_pose: Pose2 {
            x,
            y,
            heading_deg: heading,
        },
        angles: angles.to_vec(),
    })
}

pub fn forward_kinematics(chain: &JointChain, angles: &[f64]) -> Result<ChainShape> {
    compose_planar(chain.base, &chain.lengths(), angles)
}

/// Per-link angle estimates; errors carry the failing link index.
pub fn angles_from_voltages(chain: &JointChain, voltages: &[f64]) -> Result<Vec<f64>> {
    check_arity(chain.links.len(), voltages.len())?;
    chain
        .links
        .iter()
        .zip(voltages)
        .enumerate()
        .map(|(i, (link, &v))| predict_angle(&link.calibration, v).map_err(|e| at_link(i, e)))
        .collect()
}

pub fn reconstruct_shape(chain: &JointChain, voltages: &[f64]) -> Result<ChainShape> {
    let angles = angles_from_voltages(chain, voltages)?;
    forward_kinematics(chain, &angles)
}
