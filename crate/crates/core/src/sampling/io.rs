//! Text and binary serialisation of point clouds.
//!
//! Text: a `#`-prefixed header of `key value` lines followed by one point per
//! line, `x_re x_im y_re y_im z_re z_im weight residual tag draw`.
//!
//! Binary (little endian): a 16-byte header `b"SGLC"`, version `u16`,
//! dimension `u16`, count `u64`; then seed `u64`, total draws `u64`,
//! rejected `u64`, region kind `u32`, custom id `u32`, radius `f64`, wedge ε
//! `f64`, parameter count `u32` and parameters `f64`; then `count` records
//! of 8 `f64`, tag `i64`, draw `u32`.

use super::{PointCloud, RegionKind, RegionSpec};
use crate::error::{Error, Result};
use crate::geometry::ComplexPoint3;
use std::fmt::Write as _;

const MAGIC: &[u8; 4] = b"SGLC";
const VERSION: u16 = 1;

fn kind_code(kind: RegionKind) -> (u32, u32) {
    match kind {
        RegionKind::LinkSphere => (0, 0),
        RegionKind::Wedge => (1, 0),
        RegionKind::ThinWedge => (2, 0),
        RegionKind::Ball => (3, 0),
        RegionKind::SliceZ0 => (4, 0),
        RegionKind::HalfSpace => (5, 0),
        RegionKind::Custom(id) => (6, id),
    }
}

fn kind_from_code(code: u32, id: u32) -> Result<RegionKind> {
    Ok(match code {
        0 => RegionKind::LinkSphere,
        1 => RegionKind::Wedge,
        2 => RegionKind::ThinWedge,
        3 => RegionKind::Ball,
        4 => RegionKind::SliceZ0,
        5 => RegionKind::HalfSpace,
        6 => RegionKind::Custom(id),
        other => return Err(Error::Parse { line: 0, message: format!("unknown region code {other}") }),
    })
}

fn kind_name(kind: RegionKind) -> String {
    match kind {
        RegionKind::LinkSphere => "link-sphere".into(),
        RegionKind::Wedge => "wedge".into(),
        RegionKind::ThinWedge => "thin-wedge".into(),
        RegionKind::Ball => "ball".into(),
        RegionKind::SliceZ0 => "slice-z0".into(),
        RegionKind::HalfSpace => "halfspace-test".into(),
        RegionKind::Custom(id) => format!("custom-{id}"),
    }
}

fn kind_from_name(name: &str) -> Option<RegionKind> {
    Some(match name {
        "link-sphere" => RegionKind::LinkSphere,
        "wedge" => RegionKind::Wedge,
        "thin-wedge" => RegionKind::ThinWedge,
        "ball" => RegionKind::Ball,
        "slice-z0" => RegionKind::SliceZ0,
        "halfspace-test" => RegionKind::HalfSpace,
        other => RegionKind::Custom(other.strip_prefix("custom-")?.parse().ok()?),
    })
}

pub fn write_text(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let r = &cloud.region;
    let _ = writeln!(out, "# singlab point cloud v{VERSION}");
    let _ = writeln!(out, "# dimension {}", cloud.dimension);
    let _ = writeln!(out, "# seed {}", cloud.seed);
    let _ = writeln!(out, "# total_draws {}", cloud.total_draws);
    let _ = writeln!(out, "# rejected {}", cloud.rejected_near_branch);
    let params: Vec<String> = r.params.iter().map(|p| format!("{p:?}")).collect();
    let _ = writeln!(out, "# region {} {:?} {:?} {}", kind_name(r.kind), r.radius, r.wedge_eps, params.join(" "));
    for i in 0..cloud.len() {
        let v = cloud.points[i].to_real();
        for c in v {
            let _ = write!(out, "{c:?} ");
        }
        let _ = writeln!(out, "{:?} {:?} {} {}", cloud.weights[i], cloud.residuals[i], cloud.tags[i], cloud.draws[i]);
    }
    out
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn read_text(text: &str) -> Result<PointCloud> {
    let mut dimension = None;
    let mut seed = 0;
    let mut total_draws = 0;
    let mut rejected = 0;
    let mut region = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let fields: Vec<&str> = header.split_whitespace().collect();
            let num = |i: usize| -> Result<&str> { fields.get(i).copied().ok_or_else(|| perr(no, "missing value")) };
            match fields.first().copied() {
                Some("dimension") => dimension = Some(num(1)?.parse().map_err(|_| perr(no, "bad dimension"))?),
                Some("seed") => seed = num(1)?.parse().map_err(|_| perr(no, "bad seed"))?,
                Some("total_draws") => total_draws = num(1)?.parse().map_err(|_| perr(no, "bad draw count"))?,
                Some("rejected") => rejected = num(1)?.parse().map_err(|_| perr(no, "bad rejected count"))?,
                Some("region") => {
                    let kind = kind_from_name(num(1)?).ok_or_else(|| perr(no, "unknown region kind"))?;
                    let reals: Vec<f64> = fields[2..]
                        .iter()
                        .map(|f| f.parse().map_err(|_| perr(no, format!("bad real `{f}`"))))
                        .collect::<Result<_>>()?;
                    if reals.len() < 2 {
                        return Err(perr(no, "region needs radius and wedge parameter"));
                    }
                    region = Some(
                        RegionSpec::new(kind, reals[0], reals[1], reals[2..].to_vec()).map_err(|e| perr(no, e.to_string()))?,
                    );
                }
                _ => {}
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 10 {
            return Err(perr(no, format!("expected 10 columns, found {}", f.len())));
        }
        let mut reals = [0.0; 8];
        for (k, slot) in reals.iter_mut().enumerate() {
            *slot = f[k].parse().map_err(|_| perr(no, format!("bad real `{}`", f[k])))?;
        }
        let tag: i64 = f[8].parse().map_err(|_| perr(no, "bad tag"))?;
        let draw: u32 = f[9].parse().map_err(|_| perr(no, "bad draw index"))?;
        rows.push((reals, tag, draw));
    }
    let dimension = dimension.ok_or_else(|| perr(0, "missing dimension"))?;
    let region = region.ok_or_else(|| perr(0, "missing region"))?;
    let mut cloud = PointCloud::empty(dimension, region, seed, total_draws);
    cloud.rejected_near_branch = rejected;
    for (r, tag, draw) in rows {
        let v: [f64; 6] = std::array::from_fn(|k| r[k]);
        cloud.push(ComplexPoint3::from_real(&v), r[6], r[7], tag, draw);
    }
    Ok(cloud)
}

pub fn write_binary(cloud: &PointCloud) -> Vec<u8> {
    let mut b = Vec::with_capacity(64 + cloud.len() * 76);
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(cloud.dimension as u16).to_le_bytes());
    b.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    b.extend_from_slice(&cloud.seed.to_le_bytes());
    b.extend_from_slice(&(cloud.total_draws as u64).to_le_bytes());
    b.extend_from_slice(&(cloud.rejected_near_branch as u64).to_le_bytes());
    let (code, id) = kind_code(cloud.region.kind);
    b.extend_from_slice(&code.to_le_bytes());
    b.extend_from_slice(&id.to_le_bytes());
    b.extend_from_slice(&cloud.region.radius.to_le_bytes());
    b.extend_from_slice(&cloud.region.wedge_eps.to_le_bytes());
    b.extend_from_slice(&(cloud.region.params.len() as u32).to_le_bytes());
    for p in &cloud.region.params {
        b.extend_from_slice(&p.to_le_bytes());
    }
    for i in 0..cloud.len() {
        for c in cloud.points[i].to_real() {
            b.extend_from_slice(&c.to_le_bytes());
        }
        b.extend_from_slice(&cloud.weights[i].to_le_bytes());
        b.extend_from_slice(&cloud.residuals[i].to_le_bytes());
        b.extend_from_slice(&cloud.tags[i].to_le_bytes());
        b.extend_from_slice(&cloud.draws[i].to_le_bytes());
    }
    b
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| perr(0, format!("truncated cloud at byte {}", self.pos)))?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn read_binary(bytes: &[u8]) -> Result<PointCloud> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(perr(0, "not a point cloud (bad magic)"));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(perr(0, format!("unsupported cloud version {version}")));
    }
    let dimension = r.u16()? as usize;
    let count = r.u64()? as usize;
    let seed = r.u64()?;
    let total_draws = r.u64()? as usize;
    let rejected = r.u64()? as usize;
    let code = r.u32()?;
    let id = r.u32()?;
    let radius = r.f64()?;
    let eps = r.f64()?;
    let nparams = r.u32()? as usize;
    let params = (0..nparams).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let region = RegionSpec::new(kind_from_code(code, id)?, radius, eps, params)?;
    let mut cloud = PointCloud::empty(dimension, region, seed, total_draws);
    cloud.rejected_near_branch = rejected;
    for _ in 0..count {
        let v: [f64; 6] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?];
        let weight = r.f64()?;
        let residual = r.f64()?;
        let tag = r.i64()?;
        let draw = r.u32()?;
        cloud.push(ComplexPoint3::from_real(&v), weight, residual, tag, draw);
    }
    if r.pos != bytes.len() {
        return Err(perr(0, "trailing bytes after cloud"));
    }
    Ok(cloud)
}
