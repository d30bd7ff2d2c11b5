//! Text and binary serialization of grids.
//!
//! Text: a header line `k lower_1 .. lower_k upper_1 .. upper_k res_1 .. res_k`
//! followed by the values in row-major order, whitespace separated.
//!
//! Binary: magic `CLWG`, `u32` version, `u32 k`, then `k` lower bounds,
//! `k` upper bounds (`f64`), `k` resolutions (`u64`) and the values (`f64`),
//! all little-endian.

use std::fmt::Write as _;

use super::{Axis, GridDensity};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CLWG";
const VERSION: u32 = 1;

impl GridDensity {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let k = self.k();
        write!(s, "{k}").unwrap();
        for a in self.axes() {
            write!(s, " {:?}", a.lower).unwrap();
        }
        for a in self.axes() {
            write!(s, " {:?}", a.upper).unwrap();
        }
        for a in self.axes() {
            write!(s, " {}", a.res).unwrap();
        }
        s.push('\n');
        for row in self.values().chunks(self.row_len()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let k: usize = fields
            .first()
            .ok_or_else(|| Error::Parse("missing dimension".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("dimension: {e}")))?;
        if k == 0 || fields.len() != 1 + 3 * k {
            return Err(Error::Parse(format!(
                "header must hold k and 3k fields, got {} fields for k = {k}",
                fields.len()
            )));
        }
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("'{s}': {e}")))
        };
        let mut axes = Vec::with_capacity(k);
        for i in 0..k {
            let res = fields[1 + 2 * k + i]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("resolution: {e}")))?;
            axes.push(Axis::new(float(fields[1 + i])?, float(fields[1 + k + i])?, res)?);
        }
        let values = lines
            .flat_map(|l| l.split_whitespace())
            .map(float)
            .collect::<Result<Vec<f64>>>()?;
        GridDensity::new(axes, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let k = self.k();
        let mut out = Vec::with_capacity(12 + 24 * k + 8 * self.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(k as u32).to_le_bytes());
        for a in self.axes() {
            out.extend_from_slice(&a.lower.to_le_bytes());
        }
        for a in self.axes() {
            out.extend_from_slice(&a.upper.to_le_bytes());
        }
        for a in self.axes() {
            out.extend_from_slice(&(a.res as u64).to_le_bytes());
        }
        for v in self.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(Error::Parse("truncated binary grid".into()));
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        if take(4)? != MAGIC {
            return Err(Error::Parse("bad magic, not a binary grid".into()));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported grid version {version}")));
        }
        let k = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut f64s = |n: usize| -> Result<Vec<f64>> {
            (0..n)
                .map(|_| Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())))
                .collect()
        };
        let lower = f64s(k)?;
        let upper = f64s(k)?;
        let res: Vec<usize> = f64s(k)?
            .into_iter()
            .map(|v| v.to_bits() as usize)
            .collect();
        let axes = (0..k)
            .map(|i| Axis::new(lower[i], upper[i], res[i]))
            .collect::<Result<Vec<_>>>()?;
        let len: usize = res.iter().product();
        let values = f64s(len)?;
        if !cur.is_empty() {
            return Err(Error::Parse("trailing bytes after binary grid".into()));
        }
        GridDensity::new(axes, values)
    }

    /// Reads either format, detecting the binary magic.
    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            GridDensity::from_bytes(&bytes)
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Parse("grid file is neither text nor binary".into()))?;
            GridDensity::from_text(&text)
        }
    }
}
