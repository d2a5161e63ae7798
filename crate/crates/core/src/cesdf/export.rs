//! Grid snapshots and z-slice CSV export.
//!
//! Snapshot layout: one ASCII header line
//! `CESDF-SNAPSHOT v1 origin=x,y,z resolution=r dims=nx,ny,nz fields=tsdf,esdf,correction,observed`
//! followed by four little-endian f64 per voxel in x-fastest order.
//! `observed` is stored as 0.0 or 1.0; unknown ESDF values are NaN.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::{MapError, VoxelGrid};

const MAGIC: &str = "CESDF-SNAPSHOT";
const FIELDS: &str = "tsdf,esdf,correction,observed";

pub fn write_snapshot(grid: &VoxelGrid, path: impl AsRef<Path>) -> Result<(), MapError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let o = grid.origin();
    let [nx, ny, nz] = grid.dims();
    writeln!(
        w,
        "{MAGIC} v1 origin={},{},{} resolution={} dims={nx},{ny},{nz} fields={FIELDS}",
        o.x,
        o.y,
        o.z,
        grid.resolution()
    )?;
    for i in 0..grid.len() {
        let obs = if grid.observed()[i] { 1.0 } else { 0.0 };
        for v in [grid.tsdf()[i], grid.esdf()[i], grid.correction()[i], obs] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn header_field<'a>(header: &'a str, key: &str) -> Result<&'a str, MapError> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| MapError::Snapshot(format!("header lacks `{key}`")))
}

fn parse_list<T: std::str::FromStr>(s: &str, n: usize) -> Result<Vec<T>, MapError> {
    let v: Vec<T> = s
        .split(',')
        .map(|x| x.parse::<T>().map_err(|_| MapError::Snapshot(format!("bad value {x:?}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(MapError::Snapshot(format!("expected {n} values in {s:?}")));
    }
    Ok(v)
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<VoxelGrid, MapError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(MAGIC) || toks.next() != Some("v1") {
        return Err(MapError::Snapshot("not a v1 grid snapshot".into()));
    }
    if header_field(&header, "fields")? != FIELDS {
        return Err(MapError::Snapshot("unexpected field list".into()));
    }
    let origin = parse_list::<f64>(header_field(&header, "origin")?, 3)?;
    let resolution: f64 = header_field(&header, "resolution")?
        .parse()
        .map_err(|_| MapError::Snapshot("bad resolution".into()))?;
    let d = parse_list::<usize>(header_field(&header, "dims")?, 3)?;
    let dims = [d[0], d[1], d[2]];
    let n: usize = dims.iter().product();
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != n * 32 {
        return Err(MapError::Snapshot(format!(
            "body has {} bytes, expected {}",
            body.len(),
            n * 32
        )));
    }
    let mut vals = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut tsdf = Vec::with_capacity(n);
    let mut esdf = Vec::with_capacity(n);
    let mut corr = Vec::with_capacity(n);
    let mut obs = Vec::with_capacity(n);
    for _ in 0..n {
        tsdf.push(vals.next().unwrap());
        esdf.push(vals.next().unwrap());
        corr.push(vals.next().unwrap());
        obs.push(vals.next().unwrap() != 0.0);
    }
    Ok(VoxelGrid::from_parts(
        Vector3::new(origin[0], origin[1], origin[2]),
        resolution,
        dims,
        tsdf,
        esdf,
        corr,
        obs,
    ))
}

/// Writes the voxel layer containing map height `z` as CSV with columns
/// `x,y,esdf,correction,certified` (voxel-center coordinates). Unknown
/// cells carry `nan` in the distance columns.
pub fn write_slice_csv(grid: &VoxelGrid, z: f64, out: impl Write) -> Result<usize, MapError> {
    let [nx, ny, nz] = grid.dims();
    let k = ((z - grid.origin().z) / grid.resolution()).floor();
    if !(k >= 0.0 && k < nz as f64) {
        return Err(MapError::OutOfGrid(format!("z = {z} is outside the grid")));
    }
    let k = k as usize;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "esdf", "correction", "certified"])?;
    let mut rows = 0;
    for y in 0..ny {
        for x in 0..nx {
            let i = grid.index(x, y, k);
            let c = grid.center_of(x, y, k);
            let (esdf, cert) = match grid.certified_at(i) {
                Some(cd) => (grid.esdf()[i], cd),
                None => (f64::NAN, f64::NAN),
            };
            w.write_record([
                fmt(c.x),
                fmt(c.y),
                fmt(esdf),
                fmt(grid.correction()[i]),
                fmt(cert),
            ])?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(rows)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6}")
    }
}
