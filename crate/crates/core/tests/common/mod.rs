//! Helpers shared by the integration tests.
#![allow(dead_code)]

use qpinn::geometry::{PointCloud, Tag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fourth-order central difference of `f` along coordinate `i` of `x`.
pub fn fd4(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut y = x.to_vec();
    let mut at = |d: f64| {
        y[i] = x[i] + d;
        let v = f(&y);
        y[i] = x[i];
        v
    };
    let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
    (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Worst entrywise relative error of `g` against `fd`. Entries whose scale
/// is below `1e-4 · max|fd|` are measured against that floor instead.
pub fn worst_gradient_error(g: &[f64], fd: &[f64]) -> (f64, usize) {
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-4 * scale).max(1e-12);
    g.iter()
        .zip(fd)
        .map(|(a, b)| rel_err(*a, *b, floor))
        .enumerate()
        .fold((0.0, 0), |(m, mi), (i, e)| if e > m { (e, i) } else { (m, mi) })
}

/// Small cloud with every tag kind, inside the unit cube.
pub fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cloud = PointCloud::new();
    for i in 0..n {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let tag = match i % 5 {
            0 | 1 => Tag::Fluid,
            2 => Tag::Wall,
            3 => Tag::Inlet {
                velocity: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            },
            _ => Tag::Outlet { pressure: rng.random_range(-1.0..1.0) },
        };
        cloud.push(p, tag);
    }
    cloud
}

/// Contents of a legacy ASCII VTK point-cloud file as written by the export
/// module.
#[derive(Debug, PartialEq)]
pub struct VtkFile {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub velocity: Vec<[f64; 3]>,
    pub pressure: Vec<f64>,
}

fn number(tok: &str) -> Result<f64, String> {
    match tok {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|e| format!("bad number {tok:?}: {e}")),
    }
}

/// Minimal reader for the subset of the legacy format the exporter uses.
pub fn parse_vtk(text: &str) -> Result<VtkFile, String> {
    let mut lines = text.lines();
    let mut next = || lines.next().ok_or_else(|| "unexpected end of file".to_string());
    if !next()?.starts_with("# vtk DataFile Version") {
        return Err("missing version line".into());
    }
    let title = next()?.to_string();
    if next()?.trim() != "ASCII" {
        return Err("not ASCII".into());
    }
    if next()?.trim() != "DATASET UNSTRUCTURED_GRID" {
        return Err("not an unstructured grid".into());
    }
    let header = |line: &str, key: &str, fields: usize| -> Result<Vec<String>, String> {
        let toks: Vec<String> = line.split_whitespace().map(String::from).collect();
        if toks.first().map(String::as_str) != Some(key) || toks.len() != fields {
            return Err(format!("expected {key} header, got {line:?}"));
        }
        Ok(toks)
    };
    let count = |s: &str| s.parse::<usize>().map_err(|e| e.to_string());
    let triple = |line: &str| -> Result<[f64; 3], String> {
        let v: Vec<f64> = line.split_whitespace().map(number).collect::<Result<_, _>>()?;
        v.try_into().map_err(|v: Vec<f64>| format!("expected 3 numbers, got {}", v.len()))
    };

    let h = header(next()?, "POINTS", 3)?;
    let n = count(&h[1])?;
    let points = (0..n).map(|_| triple(next()?)).collect::<Result<Vec<_>, _>>()?;

    let h = header(next()?, "CELLS", 3)?;
    let (nc, size) = (count(&h[1])?, count(&h[2])?);
    let mut cells = Vec::with_capacity(nc);
    let mut seen = 0;
    for _ in 0..nc {
        let ids: Vec<usize> = next()?.split_whitespace().map(count).collect::<Result<_, _>>()?;
        if ids.is_empty() || ids[0] + 1 != ids.len() || ids[1..].iter().any(|&i| i >= n) {
            return Err(format!("bad cell {ids:?}"));
        }
        seen += ids.len();
        cells.push(ids[1..].to_vec());
    }
    if seen != size {
        return Err(format!("CELLS size {size} but {seen} entries"));
    }
    let h = header(next()?, "CELL_TYPES", 2)?;
    let cell_types = (0..count(&h[1])?)
        .map(|_| next()?.trim().parse::<u8>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;

    let h = header(next()?, "POINT_DATA", 2)?;
    if count(&h[1])? != n {
        return Err("POINT_DATA count differs from POINTS".into());
    }
    header(next()?, "VECTORS", 3)?;
    let velocity = (0..n).map(|_| triple(next()?)).collect::<Result<Vec<_>, _>>()?;
    header(next()?, "SCALARS", 4)?;
    header(next()?, "LOOKUP_TABLE", 2)?;
    let pressure = (0..n).map(|_| number(next()?.trim())).collect::<Result<Vec<_>, _>>()?;
    Ok(VtkFile {
        title,
        points,
        cells,
        cell_types,
        velocity,
        pressure,
    })
}
