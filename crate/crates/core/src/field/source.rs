//! Plane-wave injection on one transverse plane of cells.
//!
//! The plane carries the equivalent surface currents of the incident wave,
//! `J_s = k x H_inc` and `M_s = -k x E_inc`, spread over three cell planes
//! with weights 1/4, 1/2, 1/4 along the normal. Together
//! they radiate the incident wave downstream of the plane and cancel it
//! upstream, so the region behind the plane only sees scattered fields.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::FieldGrid;
use crate::error::{Error, Result};
use crate::physics::{DriveSpec, SI};

/// Temporal envelope applied to the incident wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ramp {
    /// Full amplitude from `t = 0`.
    None,
    /// `(1 - cos(pi t / duration)) / 2` up to `duration`, then 1.
    HalfCosine { duration: f64 },
}

impl Ramp {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Ramp::None => 1.0,
            Ramp::HalfCosine { duration } => {
                if t <= 0.0 {
                    0.0
                } else if t >= duration {
                    1.0
                } else {
                    0.5 * (1.0 - (PI * t / duration).cos())
                }
            }
        }
    }
}

/// A plane of source cells normal to the propagation axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePlane {
    /// Axis normal to the plane (the propagation axis).
    pub axis: usize,
    /// Cell index of the plane along `axis`.
    pub index: usize,
    /// +1 or -1: propagation along the positive or negative axis.
    pub direction: f64,
    pub drive: DriveSpec,
    pub ramp: Ramp,
}

impl SourcePlane {
    /// Builds a plane at `index` for a drive whose propagation vector is a
    /// (signed) coordinate axis.
    pub fn new(drive: DriveSpec, index: usize, ramp: Ramp) -> Result<Self> {
        drive.validate()?;
        let k = drive.propagation;
        let axis = (0..3)
            .find(|&a| (k[a].abs() - 1.0).abs() < 1e-12)
            .ok_or_else(|| {
                Error::config("drive.propagation", "must lie along a coordinate axis")
            })?;
        Ok(Self {
            axis,
            index,
            direction: k[axis].signum(),
            drive,
            ramp,
        })
    }

    /// Checks that the plane and its two neighbours lie strictly inside the
    /// non-PML interior.
    pub fn validate(&self, grid: &FieldGrid) -> Result<()> {
        let (lo, hi) = grid.interior_range(self.axis);
        if self.index < lo + 1 || self.index + 1 >= hi {
            return Err(Error::config(
                "source.plane",
                format!(
                    "plane index {} lies in the absorbing layer (interior is {lo}..{hi})",
                    self.index
                ),
            ));
        }
        Ok(())
    }

    /// Incident scalar waveform at the plane: `A ramp(t) sin(omega t)`.
    pub fn waveform(&self, t: f64) -> f64 {
        self.drive.amplitude * self.ramp.value(t) * (self.drive.frequency * t).sin()
    }

    /// Incident electric field vector at the plane, V/m.
    pub fn e_inc(&self, t: f64) -> [f64; 3] {
        let w = self.waveform(t);
        self.drive.polarization.map(|p| p * w)
    }

    /// Incident magnetic field vector at the plane, A/m.
    pub fn h_inc(&self, t: f64) -> [f64; 3] {
        let w = self.waveform(t) / SI.eta0();
        cross(self.drive.propagation, self.drive.polarization).map(|v| v * w)
    }

    /// Volume electric current density of the plane, A/m^2.
    pub fn electric_current(&self, t: f64, spacing: f64) -> [f64; 3] {
        cross(self.drive.propagation, self.h_inc(t)).map(|v| v / spacing)
    }

    /// Volume magnetic current density of the plane, V/m^2.
    pub fn magnetic_current(&self, t: f64, spacing: f64) -> [f64; 3] {
        cross(self.drive.propagation, self.e_inc(t)).map(|v| -v / spacing)
    }

    /// Visits every cell index on the plane.
    pub fn for_each_cell(&self, grid: &FieldGrid, mut f: impl FnMut(usize)) {
        let dims = grid.dims();
        let (a, b) = match self.axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for j in 0..dims[b] {
            for i in 0..dims[a] {
                let mut cell = [0; 3];
                cell[self.axis] = self.index;
                cell[a] = i;
                cell[b] = j;
                f(grid.index(cell));
            }
        }
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
