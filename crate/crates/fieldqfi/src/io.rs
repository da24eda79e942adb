//! CSV formats: Gaussian states, coefficient matrices and the overlap cache.
//!
//! Floats are written with the shortest representation that round-trips, so
//! a read after a write reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use fieldqfi_core::bogoliubov::{BogoliubovMatrices, BogoliubovSeries};
use fieldqfi_core::cavity::{rindler_overlaps, Quadrature, RindlerOverlaps};
use fieldqfi_core::gaussian::GaussianState;
use fieldqfi_core::C64;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn parse(field: &str, what: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Format { path: what.into(), reason: format!("bad number {field:?}") })
}

fn parse_index(field: &str, what: &str) -> Result<usize> {
    field.trim().parse().map_err(|_| Error::Format { path: what.into(), reason: format!("bad index {field:?}") })
}

// ------------------------------------------------------------------ states

/// One row per state: `x1..x2n` then the covariance row-major as `s{i}_{j}`.
pub fn write_states<W: Write>(w: W, states: &[GaussianState]) -> Result<()> {
    let n = states.first().map_or(0, |s| s.n_modes());
    let d = 2 * n;
    let mut out = writer(w);
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    for i in 1..=d {
        for j in 1..=d {
            header.push(format!("s{i}_{j}"));
        }
    }
    out.write_record(&header)?;
    for s in states {
        if s.n_modes() != n {
            return Err(Error::Format { path: "states".into(), reason: "mixed mode counts".into() });
        }
        let mut rec: Vec<String> = s.first_moments().iter().map(|&v| float(v)).collect();
        let c = s.covariance();
        for i in 0..d {
            for j in 0..d {
                rec.push(float(c[(i, j)]));
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_states<R: Read>(r: R) -> Result<Vec<GaussianState>> {
    let mut rdr = csv::Reader::from_reader(r);
    let width = rdr.headers()?.len();
    // width = d + d²
    let d = (1..=64).find(|d| d + d * d == width).ok_or_else(|| Error::Format {
        path: "states".into(),
        reason: format!("{width} columns is not d + d²"),
    })?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec.iter().map(|f| parse(f, "states")).collect::<Result<_>>()?;
        let x = DVector::from_column_slice(&vals[..d]);
        let c = DMatrix::from_row_slice(d, d, &vals[d..]);
        out.push(GaussianState::new(x, c)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------- matrices

/// Rows `matrix,m,n,re,im` with 1-based indices; every entry is written.
pub fn write_matrices<W: Write>(w: W, named: &[(&str, &DMatrix<C64>)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["matrix", "m", "n", "re", "im"])?;
    for (name, m) in named {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                out.write_record([name.to_string(), (i + 1).to_string(), (j + 1).to_string(), float(z.re), float(z.im)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Inverse of `write_matrices`; missing entries are zero and each matrix is
/// square with side equal to its largest index.
pub fn read_matrices<R: Read>(r: R) -> Result<BTreeMap<String, DMatrix<C64>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut entries: BTreeMap<String, Vec<(usize, usize, C64)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Format { path: "matrices".into(), reason: format!("expected 5 columns, got {}", rec.len()) });
        }
        let (m, n) = (parse_index(&rec[1], "matrices.m")?, parse_index(&rec[2], "matrices.n")?);
        if m == 0 || n == 0 {
            return Err(Error::Format { path: "matrices".into(), reason: "indices are 1-based".into() });
        }
        let z = C64::new(parse(&rec[3], "matrices.re")?, parse(&rec[4], "matrices.im")?);
        entries.entry(rec[0].to_string()).or_default().push((m, n, z));
    }
    Ok(entries
        .into_iter()
        .map(|(name, es)| {
            let side = es.iter().map(|&(m, n, _)| m.max(n)).max().unwrap_or(0);
            let mut mat = DMatrix::zeros(side, side);
            for (m, n, z) in es {
                mat[(m - 1, n - 1)] = z;
            }
            (name, mat)
        })
        .collect())
}

fn take(map: &mut BTreeMap<String, DMatrix<C64>>, name: &str) -> Result<DMatrix<C64>> {
    map.remove(name).ok_or_else(|| Error::Format { path: "matrices".into(), reason: format!("missing matrix {name:?}") })
}

pub fn write_series<W: Write>(w: W, s: &BogoliubovSeries) -> Result<()> {
    let g = s.alpha0();
    write_matrices(w, &[("phase", &g), ("alpha1", &s.alpha1), ("alpha2", &s.alpha2), ("beta1", &s.beta1), ("beta2", &s.beta2)])
}

pub fn read_series<R: Read>(r: R) -> Result<BogoliubovSeries> {
    let mut map = read_matrices(r)?;
    let g = take(&mut map, "phase")?;
    let phases = g.diagonal();
    Ok(BogoliubovSeries::new(
        phases,
        take(&mut map, "alpha1")?,
        take(&mut map, "alpha2")?,
        take(&mut map, "beta1")?,
        take(&mut map, "beta2")?,
    )?)
}

pub fn write_channel<W: Write>(w: W, b: &BogoliubovMatrices) -> Result<()> {
    write_matrices(w, &[("alpha", &b.alpha), ("beta", &b.beta)])
}

pub fn read_channel<R: Read>(r: R) -> Result<BogoliubovMatrices> {
    let mut map = read_matrices(r)?;
    Ok(BogoliubovMatrices::new(take(&mut map, "alpha")?, take(&mut map, "beta")?)?)
}

/// An imported file holds either a series (`phase`, `alpha1`, ...) or a
/// finite channel (`alpha`, `beta`).
pub enum Imported {
    Series(BogoliubovSeries),
    Channel(BogoliubovMatrices),
}

pub fn read_imported(path: &Path) -> Result<Imported> {
    let text = fs::read(path)?;
    let map = read_matrices(text.as_slice())?;
    if map.contains_key("phase") {
        Ok(Imported::Series(read_series(text.as_slice())?))
    } else {
        Ok(Imported::Channel(read_channel(text.as_slice())?))
    }
}

// ----------------------------------------------------------- overlap cache

/// Directory of `rindler_overlaps` results keyed by `(h, n_max, order)`.
/// The coefficients are independent of the cavity length.
#[derive(Debug, Clone)]
pub struct OverlapCache {
    pub dir: PathBuf,
}

impl OverlapCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, h: f64, n_max: usize, order: usize) -> PathBuf {
        self.dir.join(format!("overlaps_h{}_n{n_max}_q{order}.csv", float(h)))
    }

    pub fn store(&self, ov: &RindlerOverlaps, order: usize) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(ov.h, ov.n_max(), order);
        let mut buf = Vec::new();
        write_overlaps(&mut buf, ov)?;
        fs::write(&path, buf)?;
        Ok(path)
    }

    pub fn load(&self, length: f64, h: f64, n_max: usize, order: usize) -> Result<Option<RindlerOverlaps>> {
        let path = self.path(h, n_max, order);
        if !path.exists() {
            return Ok(None);
        }
        let mut ov = read_overlaps(fs::File::open(&path)?)?;
        if ov.n_max() != n_max || ov.h.to_bits() != h.to_bits() {
            return Err(Error::Format { path: path.display().to_string(), reason: "cache key mismatch".into() });
        }
        ov.length = length;
        Ok(Some(ov))
    }

    pub fn get_or_compute(&self, length: f64, h: f64, n_max: usize, quad: &Quadrature) -> Result<RindlerOverlaps> {
        if let Some(ov) = self.load(length, h, n_max, quad.order)? {
            return Ok(ov);
        }
        let ov = rindler_overlaps(length, h, n_max, quad)?;
        self.store(&ov, quad.order)?;
        Ok(ov)
    }
}

/// Rows `matrix,m,n,value`; scalar metadata uses `m = n = 0`.
pub fn write_overlaps<W: Write>(w: W, ov: &RindlerOverlaps) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["matrix", "m", "n", "value"])?;
    for (name, v) in [("length", ov.length), ("h", ov.h), ("panels", ov.panels as f64), ("quadrature_change", ov.quadrature_change)] {
        out.write_record([name, "0", "0", &float(v)])?;
    }
    for (name, m) in [("alpha0", &ov.alpha0), ("beta0", &ov.beta0)] {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.write_record([name.to_string(), (i + 1).to_string(), (j + 1).to_string(), float(m[(i, j)])])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_overlaps<R: Read>(r: R) -> Result<RindlerOverlaps> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut meta = BTreeMap::new();
    let mut ents: Vec<(bool, usize, usize, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v = parse(&rec[3], "overlaps.value")?;
        match &rec[0] {
            "alpha0" | "beta0" => {
                let (m, n) = (parse_index(&rec[1], "overlaps.m")?, parse_index(&rec[2], "overlaps.n")?);
                ents.push((&rec[0] == "alpha0", m, n, v));
            }
            other => {
                meta.insert(other.to_string(), v);
            }
        }
    }
    let get = |k: &str| {
        meta.get(k).copied().ok_or_else(|| Error::Format { path: "overlaps".into(), reason: format!("missing {k}") })
    };
    let n = ents.iter().map(|e| e.1.max(e.2)).max().unwrap_or(0);
    let (mut a, mut b) = (DMatrix::zeros(n, n), DMatrix::zeros(n, n));
    for (is_a, m, j, v) in ents {
        if is_a { a[(m - 1, j - 1)] = v } else { b[(m - 1, j - 1)] = v }
    }
    Ok(RindlerOverlaps {
        length: get("length")?,
        h: get("h")?,
        alpha0: a,
        beta0: b,
        panels: get("panels")? as usize,
        quadrature_change: get("quadrature_change")?,
    })
}
