//! `x,y,z,region,vx,vy,vz,p` point-cloud files.
//!
//! Velocity columns are filled only on inlet rows and the pressure column
//! only on outlet rows. Values are written in shortest round-trip form, so
//! loading a saved cloud reproduces it exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{GeometryError, PointCloud, Region, Tag};

pub const CSV_HEADER: [&str; 8] = ["x", "y", "z", "region", "vx", "vy", "vz", "p"];

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv<W: Write>(cloud: &PointCloud, writer: W) -> Result<(), GeometryError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for (p, tag) in cloud.iter() {
        let (vel, pressure) = match tag {
            Tag::Inlet { velocity } => (velocity.map(num), String::new()),
            Tag::Outlet { pressure } => (Default::default(), num(pressure)),
            _ => (Default::default(), String::new()),
        };
        w.write_record([
            num(p[0]),
            num(p[1]),
            num(p[2]),
            tag.region().label().to_string(),
            vel[0].clone(),
            vel[1].clone(),
            vel[2].clone(),
            pressure,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    write_csv(cloud, File::create(path)?)
}

pub fn read_csv<R: Read>(reader: R) -> Result<PointCloud, GeometryError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(GeometryError::NoPoints);
    }
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(GeometryError::Row {
            line: 1,
            message: format!("expected header {}, got {}", CSV_HEADER.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut cloud = PointCloud::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fail = |message: String| GeometryError::Row { line, message };
        if record.len() != CSV_HEADER.len() {
            return Err(fail(format!("expected {} fields, got {}", CSV_HEADER.len(), record.len())));
        }
        let field = |i: usize| -> Result<Option<f64>, GeometryError> {
            let s = &record[i];
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 = s
                .parse()
                .map_err(|_| fail(format!("column {}: cannot parse {s:?} as a number", CSV_HEADER[i])))?;
            if !v.is_finite() {
                return Err(fail(format!("column {}: non-finite value", CSV_HEADER[i])));
            }
            Ok(Some(v))
        };
        let required = |i: usize| field(i)?.ok_or_else(|| fail(format!("missing {} value", CSV_HEADER[i])));
        let point = [required(0)?, required(1)?, required(2)?];
        let region: Region = record[3].parse().map_err(fail)?;
        let velocity = [field(4)?, field(5)?, field(6)?];
        let pressure = field(7)?;
        let tag = match region {
            Region::Inlet => {
                let [Some(vx), Some(vy), Some(vz)] = velocity else {
                    return Err(fail("inlet row needs vx, vy and vz".into()));
                };
                if pressure.is_some() {
                    return Err(fail("inlet row must leave p empty".into()));
                }
                Tag::Inlet { velocity: [vx, vy, vz] }
            }
            Region::Outlet => {
                let Some(p) = pressure else {
                    return Err(fail("outlet row needs p".into()));
                };
                if velocity.iter().any(Option::is_some) {
                    return Err(fail("outlet row must leave vx, vy, vz empty".into()));
                }
                Tag::Outlet { pressure: p }
            }
            Region::Fluid | Region::Wall => {
                if velocity.iter().any(Option::is_some) || pressure.is_some() {
                    return Err(fail(format!("{region} row must not carry boundary values")));
                }
                if region == Region::Fluid {
                    Tag::Fluid
                } else {
                    Tag::Wall
                }
            }
        };
        cloud.push(point, tag);
    }
    if cloud.is_empty() {
        return Err(GeometryError::NoPoints);
    }
    Ok(cloud)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<PointCloud, GeometryError> {
    read_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_cloud() -> PointCloud {
        let mut c = PointCloud::new();
        for i in 0..100 {
            let x = i as f64 * 0.1 - 3.3;
            let tag = match i % 4 {
                0 => Tag::Fluid,
                1 => Tag::Wall,
                2 => Tag::Inlet { velocity: [0.1 * x, -1.0 / 3.0, 1e-17] },
                _ => Tag::Outlet { pressure: x / 7.0 },
            };
            c.push([x, (x * 1.7).sin(), -x / 3.0], tag);
        }
        c
    }

    #[test]
    fn round_trip_is_exact() {
        let cloud = sample_cloud();
        let mut buf = Vec::new();
        write_csv(&cloud, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), cloud);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        let cloud = sample_cloud();
        save_csv(&cloud, &path).unwrap();
        assert_eq!(load_csv(&path).unwrap(), cloud);
    }

    #[test]
    fn inlet_without_velocity_names_the_row() {
        let text = "x,y,z,region,vx,vy,vz,p\n0,0,0,fluid,,,,\n1,2,3,inlet,,,,\n";
        let err = read_csv(text.as_bytes()).unwrap_err();
        match err {
            GeometryError::Row { line, ref message } => {
                assert_eq!(line, 3);
                assert!(message.contains("vx"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let cases = [
            "x,y,z,region,vx,vy,vz,p\n0,0,0,pipe,,,,\n",
            "x,y,z,region,vx,vy,vz,p\n0,0,0,outlet,,,,\n",
            "x,y,z,region,vx,vy,vz,p\n0,zero,0,fluid,,,,\n",
            "x,y,z,region,vx,vy,vz,p\n0,0,0,wall,1,0,0,\n",
            "x,y,z,region,vx,vy,vz,p\n0,0,0,fluid,,,\n",
            "a,b,c\n1,2,3\n",
        ];
        for text in cases {
            assert!(read_csv(text.as_bytes()).is_err(), "{text:?} accepted");
        }
    }

    #[test]
    fn empty_input_has_no_points() {
        for text in ["", "x,y,z,region,vx,vy,vz,p\n"] {
            let err = read_csv(text.as_bytes()).unwrap_err();
            assert!(matches!(err, GeometryError::NoPoints));
            assert_eq!(err.to_string(), "no points");
        }
    }

    proptest! {
        #[test]
        fn arbitrary_finite_values_round_trip(
            coords in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>(), 0u8..4), 1..40)
        ) {
            let mut cloud = PointCloud::new();
            for (x, y, z, r) in coords {
                let f = |v: f64| if v.is_finite() { v } else { 0.5 };
                let tag = match r {
                    0 => Tag::Fluid,
                    1 => Tag::Wall,
                    2 => Tag::Inlet { velocity: [f(y), f(z), f(x)] },
                    _ => Tag::Outlet { pressure: f(z) },
                };
                cloud.push([f(x), f(y), f(z)], tag);
            }
            let mut buf = Vec::new();
            write_csv(&cloud, &mut buf).unwrap();
            prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), cloud);
        }
    }
}
