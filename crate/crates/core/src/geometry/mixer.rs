//! Static-grid sampling of the Y-shaped mixer.
//!
//! The solid is the union of three capped cylinders meeting at the origin
//! plus a ball of the pipe radius that closes the junction. `z` is the
//! vertical axis: both inlet pipes rise from the junction in the `x–z`
//! plane, the outlet pipe descends along `−z`.

use serde::{Deserialize, Serialize};

use super::{GeometryError, PointCloud, Tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixerSpec {
    /// Angle between the right inlet pipe and the `x` axis, degrees.
    pub alpha: f64,
    pub radius: f64,
    pub inlet_length: f64,
    pub outlet_length: f64,
    pub grid_step: f64,
    /// Peak of the parabolic inlet profile.
    pub v_max: f64,
    /// Fixed outlet pressure.
    pub p_out: f64,
}

impl Default for MixerSpec {
    fn default() -> Self {
        Self {
            alpha: 30.0,
            radius: 0.5,
            inlet_length: 2.0,
            outlet_length: 2.0,
            grid_step: 0.1,
            v_max: 1.0,
            p_out: 0.0,
        }
    }
}

/// Most lattice cells a single generation may scan.
const MAX_LATTICE_CELLS: u64 = 200_000_000;

impl MixerSpec {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_grid_step(mut self, grid_step: f64) -> Self {
        self.grid_step = grid_step;
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let invalid = |field: &'static str, constraint: &'static str, value: f64| {
            Err(GeometryError::InvalidSpec { field, constraint, value })
        };
        if !(self.alpha > 0.0 && self.alpha < 90.0) {
            return invalid("alpha", "must lie in (0, 90) degrees", self.alpha);
        }
        for (field, value) in [
            ("radius", self.radius),
            ("inlet_length", self.inlet_length),
            ("outlet_length", self.outlet_length),
            ("grid_step", self.grid_step),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return invalid(field, "must be positive and finite", value);
            }
        }
        if !self.v_max.is_finite() {
            return invalid("v_max", "must be finite", self.v_max);
        }
        if !self.p_out.is_finite() {
            return invalid("p_out", "must be finite", self.p_out);
        }
        Ok(())
    }

    pub fn right_inlet(&self) -> Pipe {
        let a = self.alpha.to_radians();
        Pipe::new([a.cos(), 0.0, a.sin()], self.inlet_length, self.radius)
    }

    /// Mirror image of the right inlet under `x → −x`.
    pub fn left_inlet(&self) -> Pipe {
        let a = self.alpha.to_radians();
        Pipe::new([-a.cos(), 0.0, a.sin()], self.inlet_length, self.radius)
    }

    pub fn outlet(&self) -> Pipe {
        Pipe::new([0.0, 0.0, -1.0], self.outlet_length, self.radius)
    }

    pub fn inlets(&self) -> [Pipe; 2] {
        [self.left_inlet(), self.right_inlet()]
    }

    /// Signed distance to the solid's surface, negative inside. Exact outside;
    /// inside the overlap of several parts it is the depth within the part
    /// that contains the point most deeply.
    pub fn signed_distance(&self, p: [f64; 3]) -> f64 {
        let ball = norm(p) - self.radius;
        [self.left_inlet(), self.right_inlet(), self.outlet()]
            .iter()
            .map(|pipe| pipe.signed_distance(p))
            .fold(ball, f64::min)
    }

    /// Closed-solid membership test.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let eps = 1e-12 * self.radius.max(1.0);
        self.signed_distance(p) <= eps
    }
}

/// A pipe starting at the junction (origin) and extending `length` along
/// the unit `axis` to its open end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipe {
    pub axis: [f64; 3],
    pub length: f64,
    pub radius: f64,
}

impl Pipe {
    pub fn new(axis: [f64; 3], length: f64, radius: f64) -> Self {
        Self { axis, length, radius }
    }

    /// `(t, d)`: coordinate along the axis and distance from the centerline.
    pub fn local(&self, p: [f64; 3]) -> (f64, f64) {
        let t = dot(p, self.axis);
        let radial = [p[0] - t * self.axis[0], p[1] - t * self.axis[1], p[2] - t * self.axis[2]];
        (t, norm(radial))
    }

    pub fn signed_distance(&self, p: [f64; 3]) -> f64 {
        let (t, d) = self.local(p);
        let dr = d - self.radius;
        let dt = (t - 0.5 * self.length).abs() - 0.5 * self.length;
        let inside = dr.max(dt).min(0.0);
        let outside = dr.max(0.0).hypot(dt.max(0.0));
        inside + outside
    }

    /// Distance from the centerline to the lateral surface, `R − d`.
    pub fn lateral_depth(&self, p: [f64; 3]) -> f64 {
        self.radius - self.local(p).1
    }

    /// Unit vector pointing from the open end into the fluid.
    pub fn inflow_direction(&self) -> [f64; 3] {
        self.axis.map(|a| -a)
    }
}

/// Parabolic inlet velocity `v_max (1 − (d/R)²)` along the pipe's inflow
/// direction, `d` being the distance from the pipe centerline.
pub fn inlet_profile(point: [f64; 3], pipe: &Pipe, v_max: f64) -> Result<[f64; 3], GeometryError> {
    let (_, d) = pipe.local(point);
    let tol = 1e-12 * pipe.radius;
    if d > pipe.radius + tol {
        return Err(GeometryError::OutsideInlet {
            distance: d,
            radius: pipe.radius,
        });
    }
    let r = (d / pipe.radius).min(1.0);
    let speed = v_max * (1.0 - r * r);
    Ok(pipe.inflow_direction().map(|c| speed * c))
}

/// Sample the mixer on the lattice `h·ℤ³` and tag every point inside the
/// closed solid.
///
/// Points in the slab of thickness `h` under an inlet's open end are
/// inlets, likewise for the outlet; other points within `h/2` of the
/// surface are walls, the rest is fluid. A slab of one full grid step always
/// holds at least one lattice layer, whatever the pipe's tilt.
pub fn generate_mixer(spec: &MixerSpec) -> Result<PointCloud, GeometryError> {
    spec.validate()?;
    let h = spec.grid_step;
    let inlets = spec.inlets();
    let outlet = spec.outlet();

    let mut lo = [-spec.radius; 3];
    let mut hi = [spec.radius; 3];
    for pipe in inlets.iter().chain(std::iter::once(&outlet)) {
        for k in 0..3 {
            let end = pipe.axis[k] * pipe.length;
            lo[k] = lo[k].min(end - spec.radius);
            hi[k] = hi[k].max(end + spec.radius);
        }
    }
    let range: [(i64, i64); 3] = std::array::from_fn(|k| ((lo[k] / h).floor() as i64, (hi[k] / h).ceil() as i64));
    let cells: u64 = range.iter().map(|(a, b)| (b - a + 1) as u64).product();
    if cells > MAX_LATTICE_CELLS {
        return Err(GeometryError::TooFine { cells });
    }

    let mut cloud = PointCloud::default();
    for iz in range[2].0..=range[2].1 {
        for iy in range[1].0..=range[1].1 {
            for ix in range[0].0..=range[0].1 {
                let p = [ix as f64 * h, iy as f64 * h, iz as f64 * h];
                if !spec.contains(p) {
                    continue;
                }
                cloud.push(p, classify(spec, &inlets, &outlet, p, h)?);
            }
        }
    }
    if cloud.count(super::Region::Fluid) == 0 {
        return Err(GeometryError::NoFluidPoints {
            grid_step: h,
            radius: spec.radius,
        });
    }
    Ok(cloud)
}

fn classify(spec: &MixerSpec, inlets: &[Pipe; 2], outlet: &Pipe, p: [f64; 3], h: f64) -> Result<Tag, GeometryError> {
    for pipe in inlets {
        let (t, d) = pipe.local(p);
        if d <= pipe.radius && t <= pipe.length && pipe.length - t < h {
            return Ok(Tag::Inlet {
                velocity: inlet_profile(p, pipe, spec.v_max)?,
            });
        }
    }
    let (t, d) = outlet.local(p);
    if d <= outlet.radius && t <= outlet.length && outlet.length - t < h {
        return Ok(Tag::Outlet { pressure: spec.p_out });
    }
    if -spec.signed_distance(p) < 0.5 * h {
        Ok(Tag::Wall)
    } else {
        Ok(Tag::Fluid)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
