//! Text and binary encodings of profiles and fields.
//!
//! * Profiles: CSV with header `node,re,im`.
//! * Fields, binary: `n` and `extent` as little-endian `f64`, then `n^2`
//!   pairs `(re, im)` of little-endian `f64`, row-major.
//! * Fields, CSV: a `n,extent` header and its values, then `ix,iy,re,im`
//!   and one row per sample in any order.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Measure, RadialGrid, RadialProfile};
use crate::planar_field::PlaneField;

/// Largest `n` accepted by the binary field decoder.
pub const MAX_FIELD_N: usize = 1 << 13;

/// Largest `n` accepted by the CSV field decoder.
pub const MAX_CSV_FIELD_N: usize = 1 << 10;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| parse_err(line, format!("not a number: {:?}", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn profile_to_csv(profile: &RadialProfile) -> String {
    let mut out = String::from("node,re,im\n");
    for (u, s) in profile.grid().nodes().iter().zip(profile.samples()) {
        writeln!(out, "{u},{},{}", s.re, s.im).expect("writing to a String");
    }
    out
}

/// Parses [`profile_to_csv`] output. The header is optional; `#` starts a
/// comment line.
pub fn profile_from_csv(text: &str, measure: Measure) -> Result<RadialProfile> {
    let mut nodes = Vec::new();
    let mut samples = Vec::new();
    for (line, l) in data_lines(text) {
        if nodes.is_empty() && l.replace(' ', "") == "node,re,im" {
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(line, format!("expected 3 columns, found {}", fields.len())));
        }
        nodes.push(parse_f64(fields[0], line)?);
        samples.push(Complex64::new(parse_f64(fields[1], line)?, parse_f64(fields[2], line)?));
    }
    let grid = RadialGrid::from_nodes(nodes, measure)?;
    RadialProfile::new(Arc::new(grid), samples)
}

pub fn field_to_bytes(field: &PlaneField) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * field.samples().len());
    out.extend_from_slice(&(field.n() as f64).to_le_bytes());
    out.extend_from_slice(&field.extent().to_le_bytes());
    for s in field.samples() {
        out.extend_from_slice(&s.re.to_le_bytes());
        out.extend_from_slice(&s.im.to_le_bytes());
    }
    out
}

fn field_size(n: f64, max: usize) -> Result<usize> {
    if !(n.fract() == 0.0 && n >= 2.0 && n <= max as f64) {
        return Err(Error::InvalidField(format!("bad field size {n}")));
    }
    Ok(n as usize)
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<PlaneField> {
    let read = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    if bytes.len() < 16 {
        return Err(Error::InvalidField(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let n = field_size(read(0), MAX_FIELD_N)?;
    let expected = 16 + 16 * n * n;
    if bytes.len() != expected {
        return Err(Error::LengthMismatch { expected, got: bytes.len() });
    }
    let samples = (0..n * n).map(|k| Complex64::new(read(2 + 2 * k), read(3 + 2 * k))).collect();
    PlaneField::new(n, read(1), samples)
}

pub fn field_to_csv(field: &PlaneField) -> String {
    let n = field.n();
    let mut out = format!("n,extent\n{n},{}\nix,iy,re,im\n", field.extent());
    for iy in 0..n {
        for ix in 0..n {
            let s = field.at(ix, iy);
            writeln!(out, "{ix},{iy},{},{}", s.re, s.im).expect("writing to a String");
        }
    }
    out
}

pub fn field_from_csv(text: &str) -> Result<PlaneField> {
    let mut lines = data_lines(text);
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, format!("missing {what}")));
    let (line, header) = next("header")?;
    if header.replace(' ', "") != "n,extent" {
        return Err(parse_err(line, "expected `n,extent`"));
    }
    let (line, dims) = next("dimensions")?;
    let dims: Vec<&str> = dims.split(',').collect();
    if dims.len() != 2 {
        return Err(parse_err(line, "expected `n,extent` values"));
    }
    let n = field_size(parse_f64(dims[0], line)?, MAX_CSV_FIELD_N)?;
    let extent = parse_f64(dims[1], line)?;
    let (line, columns) = next("column header")?;
    if columns.replace(' ', "") != "ix,iy,re,im" {
        return Err(parse_err(line, "expected `ix,iy,re,im`"));
    }
    let mut samples: Vec<Option<Complex64>> = vec![None; n * n];
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(line, format!("expected 4 columns, found {}", fields.len())));
        }
        let index = |s: &str| -> Result<usize> {
            s.trim().parse::<usize>().ok().filter(|&i| i < n).ok_or_else(|| parse_err(line, format!("bad index {s:?}")))
        };
        let (ix, iy) = (index(fields[0])?, index(fields[1])?);
        let slot = &mut samples[iy * n + ix];
        if slot.is_some() {
            return Err(parse_err(line, format!("duplicate sample ({ix}, {iy})")));
        }
        *slot = Some(Complex64::new(parse_f64(fields[2], line)?, parse_f64(fields[3], line)?));
    }
    let samples = samples
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| parse_err(0, "missing samples"))?;
    PlaneField::new(n, extent, samples)
}
