//! Flat binary array export with a JSON sidecar.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic ("TBSN" snapshot cube, "TBRD" range-Doppler map)
//! 4       2     version (1)
//! 6       2     byte-order mark 0xFEFF
//! 8       1     element kind: 0 = f64, 1 = complex f64 (re, im interleaved)
//! 9       3     reserved, zero
//! 12      4     ndim
//! 16      8*nd  dims, outermost first
//! ...           row-major payload of f64 values
//! ```
//!
//! The sidecar `<name>.json` repeats the dims and adds axis names and metadata.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VERSION: u16 = 1;
pub const BYTE_ORDER_MARK: u16 = 0xFEFF;
pub const MAGIC_SNAPSHOTS: [u8; 4] = *b"TBSN";
pub const MAGIC_RANGE_DOPPLER: [u8; 4] = *b"TBRD";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u16,
    pub endianness: String,
    pub element: ElementKind,
    pub dims: Vec<u64>,
    pub dim_names: Vec<String>,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Payload {
    fn len(&self) -> usize {
        match self {
            Payload::Real(v) => v.len(),
            Payload::Complex(v) => v.len(),
        }
    }

    fn kind(&self) -> ElementKind {
        match self {
            Payload::Real(_) => ElementKind::Real,
            Payload::Complex(_) => ElementKind::Complex,
        }
    }
}

pub fn encode(magic: [u8; 4], dims: &[u64], payload: &Payload) -> Result<Vec<u8>> {
    let expect: u64 = dims.iter().product();
    if expect != payload.len() as u64 {
        return Err(Error::Dimension {
            context: "flat binary payload",
            expected: expect as usize,
            got: payload.len(),
        });
    }
    let mut out = Vec::with_capacity(16 + 8 * dims.len() + payload.len() * 16);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&BYTE_ORDER_MARK.to_le_bytes());
    out.push(match payload.kind() {
        ElementKind::Real => 0,
        ElementKind::Complex => 1,
    });
    out.extend_from_slice(&[0, 0, 0]);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    match payload {
        Payload::Real(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        Payload::Complex(v) => v.iter().for_each(|x| {
            out.extend_from_slice(&x.re.to_le_bytes());
            out.extend_from_slice(&x.im.to_le_bytes());
        }),
    }
    Ok(out)
}

fn bad(msg: &str) -> Error {
    Error::domain(format!("malformed flat binary: {msg}"))
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(bad("truncated"));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }
}

pub fn decode(bytes: &[u8]) -> Result<([u8; 4], Vec<u64>, Payload)> {
    let mut cur = Cursor(bytes);
    let mut take = |n: usize| cur.take(n);
    let magic: [u8; 4] = take(4)?.try_into().expect("4 bytes");
    let version = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes"));
    let bom = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes"));
    if version != VERSION {
        return Err(bad("unsupported version"));
    }
    if bom != BYTE_ORDER_MARK {
        return Err(bad("byte-order mark mismatch"));
    }
    let kind = take(4)?[0];
    let ndim = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
    let dims = (0..ndim)
        .map(|_| Ok(u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"))))
        .collect::<Result<Vec<_>>>()?;
    let count: u64 = dims.iter().product();
    let floats = |n: usize, data: &[u8]| -> Vec<f64> {
        data.chunks_exact(8)
            .take(n)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect()
    };
    let payload = match kind {
        0 => Payload::Real(floats(count as usize, take(count as usize * 8)?)),
        1 => {
            let v = floats(2 * count as usize, take(count as usize * 16)?);
            Payload::Complex(v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
        }
        _ => return Err(bad("unknown element kind")),
    };
    if !cur.0.is_empty() {
        return Err(bad("trailing bytes"));
    }
    Ok((magic, dims, payload))
}

/// Writes `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write(
    dir: &Path,
    stem: &str,
    magic: [u8; 4],
    dims: &[u64],
    dim_names: &[&str],
    payload: &Payload,
    metadata: serde_json::Value,
) -> Result<[std::path::PathBuf; 2]> {
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let bytes = encode(magic, dims, payload)?;
    std::fs::File::create(&bin)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| Error::io(&bin, e))?;
    let sidecar = Sidecar {
        format: String::from_utf8_lossy(&magic).into_owned(),
        version: VERSION,
        endianness: "little".into(),
        element: payload.kind(),
        dims: dims.to_vec(),
        dim_names: dim_names.iter().map(|s| s.to_string()).collect(),
        metadata,
    };
    std::fs::write(&json, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&json, e))?;
    Ok([bin, json])
}

pub fn read(path: &Path) -> Result<([u8; 4], Vec<u64>, Payload)> {
    let mut bytes = vec![];
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
