//! Point clouds of the Y-shaped mixer, tagged by region and carrying the
//! Dirichlet boundary payloads.

mod csv_io;
mod mixer;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv, CSV_HEADER};
pub use mixer::{generate_mixer, inlet_profile, MixerSpec, Pipe};

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Fluid,
    Wall,
    Inlet,
    Outlet,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Fluid, Region::Wall, Region::Inlet, Region::Outlet];

    pub fn label(self) -> &'static str {
        match self {
            Region::Fluid => "fluid",
            Region::Wall => "wall",
            Region::Inlet => "inlet",
            Region::Outlet => "outlet",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Region::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| format!("unknown region label {s:?}"))
    }
}

/// Region tag with its boundary payload. Inlet points always carry a
/// velocity and outlet points a pressure; fluid and wall points carry none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tag {
    Fluid,
    /// No-slip wall, `v = 0`.
    Wall,
    Inlet { velocity: [f64; 3] },
    Outlet { pressure: f64 },
}

impl Tag {
    pub fn region(&self) -> Region {
        match self {
            Tag::Fluid => Region::Fluid,
            Tag::Wall => Region::Wall,
            Tag::Inlet { .. } => Region::Inlet,
            Tag::Outlet { .. } => Region::Outlet,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    tags: Vec<Tag>,
}

impl PointCloud {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, point: [f64; 3], tag: Tag) {
        self.points.push(point);
        self.tags.push(tag);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], Tag)> + '_ {
        self.points.iter().copied().zip(self.tags.iter().copied())
    }

    pub fn count(&self, region: Region) -> usize {
        self.tags.iter().filter(|t| t.region() == region).count()
    }

    /// Indices of the points in `region`, in cloud order.
    pub fn indices(&self, region: Region) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.tags[i].region() == region).collect()
    }

    /// Sub-cloud made of the given point indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            tags: indices.iter().map(|&i| self.tags[i]).collect(),
        }
    }

    /// Finite coordinates and payloads.
    pub fn validate(&self) -> Result<(), GeometryError> {
        for (i, (p, tag)) in self.iter().enumerate() {
            let payload_ok = match tag {
                Tag::Inlet { velocity } => velocity.iter().all(|v| v.is_finite()),
                Tag::Outlet { pressure } => pressure.is_finite(),
                _ => true,
            };
            if !p.iter().all(|c| c.is_finite()) || !payload_ok {
                return Err(GeometryError::NonFinite { index: i });
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid mixer spec: {field} = {value} {constraint}")]
    InvalidSpec {
        field: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("grid_step {grid_step} is too coarse for pipe radius {radius}: no fluid points were produced")]
    NoFluidPoints { grid_step: f64, radius: f64 },
    #[error("grid too fine: {cells} lattice cells to scan")]
    TooFine { cells: u64 },
    #[error("point at distance {distance} from the centerline lies outside the inlet of radius {radius}")]
    OutsideInlet { distance: f64, radius: f64 },
    #[error("non-finite coordinate or payload at point {index}")]
    NonFinite { index: usize },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("no points")]
    NoPoints,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
