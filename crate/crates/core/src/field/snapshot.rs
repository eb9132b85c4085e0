//! Field snapshot files: raw little-endian `f64` values in x-fastest order,
//! one file per component, each with a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::FieldGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldComponent {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
    Jx,
    Jy,
    Jz,
}

impl FieldComponent {
    pub const ALL: [FieldComponent; 9] = [
        Self::Ex,
        Self::Ey,
        Self::Ez,
        Self::Hx,
        Self::Hy,
        Self::Hz,
        Self::Jx,
        Self::Jy,
        Self::Jz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ex => "E_x",
            Self::Ey => "E_y",
            Self::Ez => "E_z",
            Self::Hx => "H_x",
            Self::Hy => "H_y",
            Self::Hz => "H_z",
            Self::Jx => "J_x",
            Self::Jy => "J_y",
            Self::Jz => "J_z",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            Self::Ex | Self::Ey | Self::Ez => "V/m",
            Self::Hx | Self::Hy | Self::Hz => "A/m",
            Self::Jx | Self::Jy | Self::Jz => "A/m^2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s) || c.name().replace('_', "").eq_ignore_ascii_case(s))
    }

    pub fn data(self, grid: &FieldGrid) -> &[f64] {
        match self {
            Self::Ex => &grid.e.x,
            Self::Ey => &grid.e.y,
            Self::Ez => &grid.e.z,
            Self::Hx => &grid.h.x,
            Self::Hy => &grid.h.y,
            Self::Hz => &grid.h.z,
            Self::Jx => &grid.j.x,
            Self::Jy => &grid.j.y,
            Self::Jz => &grid.j.z,
        }
    }
}

/// A grid plane normal to `axis` at cell index `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plane {
    pub axis: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub component: String,
    pub units: String,
    /// Extent of the stored array, fastest axis first.
    pub dims: Vec<usize>,
    /// Cell edge, m.
    pub spacing: f64,
    /// Simulation time, s.
    pub time: f64,
    pub step: u64,
    pub layout: String,
    /// Present for 2D slices: the grid plane the slice was cut from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<Plane>,
}

const LAYOUT: &str = "little-endian f64, x-fastest";

/// Cuts the plane out of a full-grid array. The returned slice is ordered
/// with the lower-numbered remaining axis fastest.
pub fn extract_plane(dims: [usize; 3], data: &[f64], plane: Plane) -> Result<(Vec<f64>, [usize; 2])> {
    if plane.axis > 2 || plane.offset >= dims[plane.axis] {
        return Err(Error::Contract(format!(
            "plane {plane:?} does not intersect a {dims:?} grid"
        )));
    }
    let (a, b) = match plane.axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut out = Vec::with_capacity(dims[a] * dims[b]);
    for j in 0..dims[b] {
        for i in 0..dims[a] {
            let mut c = [0; 3];
            c[plane.axis] = plane.offset;
            c[a] = i;
            c[b] = j;
            out.push(data[c[0] + dims[0] * (c[1] + dims[1] * c[2])]);
        }
    }
    Ok((out, [dims[a], dims[b]]))
}

/// Writes `<dir>/<stem>.bin` and `<dir>/<stem>.json`.
pub fn write_snapshot(dir: &Path, stem: &str, data: &[f64], meta: &SnapshotMeta) -> Result<(PathBuf, PathBuf)> {
    let expected: usize = meta.dims.iter().product();
    if expected != data.len() {
        return Err(Error::Contract(format!(
            "snapshot {stem}: {} values for dims {:?}",
            data.len(),
            meta.dims
        )));
    }
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let mut bytes = Vec::with_capacity(8 * data.len());
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes)?;
    fs::write(&json, serde_json::to_string_pretty(meta)?)?;
    Ok((bin, json))
}

/// Writes one component of the grid, either whole or as a plane slice.
pub fn record_snapshot(
    grid: &FieldGrid,
    component: FieldComponent,
    plane: Option<Plane>,
    time: f64,
    step: u64,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    let full = component.data(grid);
    let (data, dims) = match plane {
        Some(p) => {
            let (d, [a, b]) = extract_plane(grid.dims(), full, p)?;
            (d, vec![a, b])
        }
        None => (full.to_vec(), grid.dims().to_vec()),
    };
    let meta = SnapshotMeta {
        component: component.name().to_string(),
        units: component.units().to_string(),
        dims,
        spacing: grid.spacing(),
        time,
        step,
        layout: LAYOUT.to_string(),
        plane,
    };
    write_snapshot(dir, stem, &data, &meta)
}

/// Reads a snapshot given the path of either its `.bin` or `.json` file.
pub fn read_snapshot(path: &Path) -> Result<(Vec<f64>, SnapshotMeta)> {
    let bin = path.with_extension("bin");
    let json = path.with_extension("json");
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(&json)?).map_err(|e| Error::Parse {
        path: json.clone(),
        message: e.to_string(),
    })?;
    let bytes = fs::read(&bin)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            path: bin,
            message: format!("length {} is not a multiple of 8 at byte {}", bytes.len(), bytes.len() - bytes.len() % 8),
        });
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let expected: usize = meta.dims.iter().product();
    if data.len() != expected {
        return Err(Error::Parse {
            path: bin,
            message: format!("{} values, sidecar dims {:?} imply {expected}", data.len(), meta.dims),
        });
    }
    Ok((data, meta))
}
