//! Field container format and CSV interop.
//!
//! Binary layout (little endian): magic `NSK1`, then `u64` kind tag, `u64`
//! component count `L`, `u64 nx`, `u64 ny`, `f64` origin (x, y), `f64` extent
//! (w, h), followed by `nx·ny·L` row-major `f64` values.

use std::io::{Read, Write};
use std::path::Path;

use super::{Field, GridSpec, Kind, Value};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"NSK1";

/// Untyped field as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawField {
    pub spec: GridSpec,
    pub kind: Kind,
    pub components: usize,
    pub data: Vec<f64>,
}

impl RawField {
    pub fn from_field<T: Value>(f: &Field<T>) -> Self {
        let mut data = Vec::with_capacity(f.values.len() * T::WIDTH);
        for v in &f.values {
            v.write(&mut data);
        }
        Self { spec: f.spec, kind: T::KIND, components: T::WIDTH, data }
    }

    /// Reinterprets the data as `Field<T>`; kind and width must match.
    pub fn to_field<T: Value>(&self) -> Result<Field<T>> {
        if self.kind != T::KIND || self.components != T::WIDTH {
            return Err(Error::Format(format!(
                "expected kind {:?} with {} components, found {:?} with {}",
                T::KIND,
                T::WIDTH,
                self.kind,
                self.components
            )));
        }
        let values = self.data.chunks_exact(T::WIDTH).map(T::read).collect();
        Field::new(self.spec, values)
    }

    /// Pointwise Euclidean modulus of the stored components.
    pub fn modulus(&self) -> Field<f64> {
        let values = self
            .data
            .chunks_exact(self.components)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Field { spec: self.spec, values }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(68 + 8 * self.data.len());
        buf.extend_from_slice(MAGIC);
        for v in [self.kind.tag(), self.components as u64, self.spec.nx as u64, self.spec.ny as u64] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.spec.origin[0], self.spec.origin[1], self.spec.extent[0], self.spec.extent[1]] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 68 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing NSK1 header".into()));
        }
        let word = |k: usize| -> [u8; 8] { bytes[4 + 8 * k..12 + 8 * k].try_into().unwrap() };
        let kind = Kind::from_tag(u64::from_le_bytes(word(0)))
            .ok_or_else(|| Error::Format("unknown kind tag".into()))?;
        let components = u64::from_le_bytes(word(1)) as usize;
        let nx = u64::from_le_bytes(word(2)) as usize;
        let ny = u64::from_le_bytes(word(3)) as usize;
        let f = |k: usize| f64::from_le_bytes(word(k));
        let spec = GridSpec::new([f(4), f(5)], [f(6), f(7)], nx, ny)
            .map_err(|e| Error::Format(e.to_string()))?;
        let expected = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(components))
            .ok_or_else(|| Error::Format("size overflow".into()))?;
        let payload = &bytes[68..];
        if components == 0 || payload.len() != 8 * expected {
            return Err(Error::Format(format!(
                "payload has {} bytes, header implies {}",
                payload.len(),
                8 * expected
            )));
        }
        let data: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            let node = k / components;
            return Err(Error::NonFinite { i: node % nx, j: node / nx });
        }
        Ok(Self { spec, kind, components, data })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    /// Writes `x, y, c0, c1, …` rows in storage order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["x".to_string(), "y".to_string()];
        header.extend((0..self.components).map(|c| format!("c{c}")));
        wtr.write_record(&header)?;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let k = (j * self.spec.nx + i) * self.components;
                let mut rec = vec![format!("{:e}", self.spec.x(i)), format!("{:e}", self.spec.y(j))];
                rec.extend(self.data[k..k + self.components].iter().map(|v| format!("{v:e}")));
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`write_csv`](Self::write_csv) (or any CSV whose
    /// points form a complete uniform grid, in any order).
    pub fn read_csv<R: Read>(r: R, kind: Kind) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut rows: Vec<(f64, f64, Vec<f64>)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() < 3 {
                return Err(Error::Format("CSV rows need x, y and at least one component".into()));
            }
            rows.push((vals[0], vals[1], vals[2..].to_vec()));
        }
        if rows.is_empty() {
            return Err(Error::Format("empty CSV".into()));
        }
        let components = rows[0].2.len();
        let axis = |get: &dyn Fn(&(f64, f64, Vec<f64>)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(get).collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
            v
        };
        let xs = axis(&|r| r.0);
        let ys = axis(&|r| r.1);
        let (nx, ny) = (xs.len(), ys.len());
        if nx < 2 || ny < 2 || nx * ny != rows.len() {
            return Err(Error::Format("CSV points do not form a complete grid".into()));
        }
        let h = (xs[nx - 1] - xs[0]) / (nx - 1) as f64;
        let spec = GridSpec::new([xs[0] - 0.5 * h, ys[0] - 0.5 * h], [nx as f64 * h, ny as f64 * h], nx, ny)
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut data = vec![f64::NAN; nx * ny * components];
        for (x, y, c) in rows {
            if c.len() != components {
                return Err(Error::Format("ragged CSV rows".into()));
            }
            let q = spec.to_index([x, y]);
            let (i, j) = (q[0].round(), q[1].round());
            if (q[0] - i).abs() > 1e-6 || (q[1] - j).abs() > 1e-6 {
                return Err(Error::Format("CSV points are not uniformly spaced".into()));
            }
            let k = (j as usize * nx + i as usize) * components;
            data[k..k + components].copy_from_slice(&c);
        }
        if data.iter().any(|v| v.is_nan()) {
            return Err(Error::Format("duplicate CSV points".into()));
        }
        Ok(Self { spec, kind, components, data })
    }
}

pub fn save_field<T: Value>(f: &Field<T>, path: impl AsRef<Path>) -> Result<()> {
    RawField::from_field(f).save(path)
}

pub fn load_field<T: Value>(path: impl AsRef<Path>) -> Result<Field<T>> {
    RawField::load(path)?.to_field()
}
