//! Field snapshots and legacy-ASCII VTK output.
//!
//! The VTK file is an unstructured grid of vertex cells, so ParaView and
//! other VTK readers open it as a point cloud:
//!
//! ```text
//! # vtk DataFile Version 3.0
//! <title>
//! ASCII
//! DATASET UNSTRUCTURED_GRID
//! POINTS N double
//! x y z            (N lines)
//! CELLS N 2N
//! 1 i              (N lines)
//! CELL_TYPES N
//! 1                (N lines)
//! POINT_DATA N
//! VECTORS velocity double
//! vx vy vz         (N lines)
//! SCALARS pressure double 1
//! LOOKUP_TABLE default
//! p                (N lines)
//! ```
//!
//! Numbers are printed in shortest round-trip form, so parsing them back
//! recovers the written doubles exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::geometry::PointCloud;
use crate::network::{Checkpoint, NetworkError, PinnModel};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSnapshot {
    pub points: Vec<[f64; 3]>,
    pub velocity: Vec<[f64; 3]>,
    pub pressure: Vec<f64>,
}

impl FieldSnapshot {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of points with a non-finite velocity or pressure.
    pub fn non_finite(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !(self.velocity[i].iter().all(|v| v.is_finite()) && self.pressure[i].is_finite()))
            .collect()
    }
}

/// Evaluate `model` at every point of `cloud`.
pub fn infer_model(model: &PinnModel, cloud: &PointCloud) -> Result<FieldSnapshot, NetworkError> {
    let out = model.predict(cloud.points())?;
    let snapshot = FieldSnapshot {
        points: cloud.points().to_vec(),
        velocity: out.iter().map(|o| [o[0], o[1], o[2]]).collect(),
        pressure: out.iter().map(|o| o[3]).collect(),
    };
    let bad = snapshot.non_finite();
    if !bad.is_empty() {
        log::warn!("{} points have non-finite predictions, first at index {}", bad.len(), bad[0]);
    }
    Ok(snapshot)
}

/// Evaluate a checkpointed model at every point of `cloud`.
pub fn infer(checkpoint: &Checkpoint, cloud: &PointCloud) -> Result<FieldSnapshot, NetworkError> {
    infer_model(&checkpoint.to_model()?, cloud)
}

fn num(v: f64) -> String {
    // VTK readers parse `nan`/`inf` through strtod; Rust prints `NaN`.
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn write_vtk_to<W: Write>(snapshot: &FieldSnapshot, title: &str, writer: W) -> std::io::Result<()> {
    let n = snapshot.len();
    if snapshot.velocity.len() != n || snapshot.pressure.len() != n {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!(
                "snapshot has {n} points, {} velocities and {} pressures",
                snapshot.velocity.len(),
                snapshot.pressure.len()
            ),
        ));
    }
    let mut w = BufWriter::new(writer);
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", if title.is_empty() { "qpinn field" } else { &title })?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for p in &snapshot.points {
        writeln!(w, "{} {} {}", num(p[0]), num(p[1]), num(p[2]))?;
    }
    writeln!(w, "CELLS {n} {}", 2 * n)?;
    for i in 0..n {
        writeln!(w, "1 {i}")?;
    }
    writeln!(w, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(w, "1")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    writeln!(w, "VECTORS velocity double")?;
    for v in &snapshot.velocity {
        writeln!(w, "{} {} {}", num(v[0]), num(v[1]), num(v[2]))?;
    }
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &snapshot.pressure {
        writeln!(w, "{}", num(*p))?;
    }
    w.flush()
}

pub fn write_vtk(snapshot: &FieldSnapshot, path: impl AsRef<Path>) -> std::io::Result<()> {
    write_vtk_to(snapshot, "qpinn field", File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mixer, MixerSpec, Tag};
    use crate::network::{MlpParams, Variant};

    #[test]
    fn zero_model_predicts_zero() {
        let model = PinnModel::classical(MlpParams::zeros(Variant::Classical.mlp_widths()).unwrap()).unwrap();
        let cloud = generate_mixer(&MixerSpec::default().with_grid_step(0.3)).unwrap();
        let snap = infer_model(&model, &cloud).unwrap();
        assert_eq!(snap.len(), cloud.len());
        assert!(snap.velocity.iter().flatten().all(|&v| v == 0.0));
        assert!(snap.pressure.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn inference_is_repeatable() {
        let model = PinnModel::init(3, Variant::Hybrid);
        let ckpt = Checkpoint::from_model(&model, 0, None);
        let mut cloud = PointCloud::new();
        cloud.push([0.1, 0.2, 0.3], Tag::Fluid);
        cloud.push([-0.4, 0.0, 1.0], Tag::Wall);
        assert_eq!(infer(&ckpt, &cloud).unwrap(), infer(&ckpt, &cloud).unwrap());
    }

    #[test]
    fn one_point_layout() {
        let snap = FieldSnapshot {
            points: vec![[0.5, -1.0, 2.0]],
            velocity: vec![[1.0, 0.0, -0.25]],
            pressure: vec![3.5],
        };
        let mut buf = Vec::new();
        write_vtk_to(&snap, "t", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "# vtk DataFile Version 3.0\nt\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 1 double\n0.5 -1.0 2.0\n\
            CELLS 1 2\n1 0\nCELL_TYPES 1\n1\nPOINT_DATA 1\nVECTORS velocity double\n1.0 0.0 -0.25\n\
            SCALARS pressure double 1\nLOOKUP_TABLE default\n3.5\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn misaligned_snapshot_is_rejected() {
        let snap = FieldSnapshot {
            points: vec![[0.0; 3]],
            velocity: vec![],
            pressure: vec![0.0],
        };
        assert!(write_vtk_to(&snap, "", Vec::new()).is_err());
    }
}
