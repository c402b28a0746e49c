//! Output formats: binary snapshot grids, probe tables and PPM rasters.
//!
//! Grid layout (little-endian): `b"TFWV"`, `u32` version 1, `u64 nx, ny, nt`,
//! `f64 x0, x1, y0, y1`, `nt` times, then `nt * ny * nx` cells as `(re, im)`
//! pairs, row-major with x fastest. Masked cells are stored as the quiet NaN
//! `0x7FF8000000000000` with a zero imaginary part.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::pipeline::{FieldKind, SolutionSet};

type C = Complex64;

pub const GRID_MAGIC: &[u8; 4] = b"TFWV";
pub const GRID_VERSION: u32 = 1;
pub const MASK_BITS: u64 = 0x7FF8_0000_0000_0000;
pub const PROBE_HEADER: &str = "t,x,y,re_u,im_u,re_utot,im_utot";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

fn format_err<T>(msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Format(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub times: Vec<f64>,
    /// `cells[(f * ny + j) * nx + i]`; `None` where masked.
    pub cells: Vec<Option<C>>,
}

impl GridFile {
    /// Snapshot frames of a run; `None` if the run had no snapshot grid.
    pub fn from_solution(sol: &SolutionSet, field: FieldKind) -> Option<Self> {
        let snap = sol.snapshot.as_ref()?;
        let mut cells = Vec::with_capacity(snap.times.len() * snap.nx * snap.ny);
        for (f, frame) in sol.frames.iter().enumerate() {
            let t = snap.times[f];
            for (cell, v) in frame.iter().enumerate() {
                cells.push(v.map(|v| match field {
                    FieldKind::Scattered => v.u,
                    FieldKind::Total => v.u + sol.incident(sol.probe_count + cell, t),
                }));
            }
        }
        Some(Self { nx: snap.nx, ny: snap.ny, x0: snap.x0, x1: snap.x1, y0: snap.y0, y1: snap.y1, times: snap.times.clone(), cells })
    }

    pub fn frame(&self, f: usize) -> &[Option<C>] {
        let n = self.nx * self.ny;
        &self.cells[f * n..(f + 1) * n]
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), IoError> {
        if self.cells.len() != self.nx * self.ny * self.times.len() {
            return format_err("cell count does not match nx * ny * nt");
        }
        let mut buf = Vec::with_capacity(64 + 8 * self.times.len() + 16 * self.cells.len());
        buf.extend_from_slice(GRID_MAGIC);
        buf.extend_from_slice(&GRID_VERSION.to_le_bytes());
        for n in [self.nx, self.ny, self.times.len()] {
            buf.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for v in [self.x0, self.x1, self.y0, self.y1].iter().chain(&self.times) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for c in &self.cells {
            let (re, im) = match c {
                Some(c) => (c.re.to_bits(), c.im.to_bits()),
                None => (MASK_BITS, 0),
            };
            buf.extend_from_slice(&re.to_le_bytes());
            buf.extend_from_slice(&im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, IoError> {
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        let mut pos = 0;
        let mut take = |n: usize| -> Result<&[u8], IoError> {
            if pos + n > data.len() {
                return format_err("truncated grid file");
            }
            pos += n;
            Ok(&data[pos - n..pos])
        };
        if take(4)? != GRID_MAGIC {
            return format_err("bad magic");
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != GRID_VERSION {
            return format_err(format!("unsupported version {version}"));
        }
        let mut dims = [0usize; 3];
        for d in &mut dims {
            *d = usize::try_from(u64::from_le_bytes(take(8)?.try_into().unwrap())).map_err(|_| IoError::Format("dimension overflow".into()))?;
        }
        let [nx, ny, nt] = dims;
        let mut f64s = |n: usize| -> Result<Vec<f64>, IoError> {
            (0..n).map(|_| Ok(f64::from_le_bytes(take(8)?.try_into().unwrap()))).collect()
        };
        let bounds = f64s(4)?;
        let times = f64s(nt)?;
        let count = nx.checked_mul(ny).and_then(|v| v.checked_mul(nt)).ok_or_else(|| IoError::Format("dimension overflow".into()))?;
        let expected = count.checked_mul(16).ok_or_else(|| IoError::Format("dimension overflow".into()))?;
        let payload = data.len() - pos;
        if payload != expected {
            return format_err(format!("payload has {payload} bytes, header implies {expected}"));
        }
        let cells = data[pos..]
            .chunks_exact(16)
            .map(|ch| {
                let re = u64::from_le_bytes(ch[..8].try_into().unwrap());
                let im = u64::from_le_bytes(ch[8..].try_into().unwrap());
                if re == MASK_BITS && im == 0 {
                    None
                } else {
                    Some(C::new(f64::from_bits(re), f64::from_bits(im)))
                }
            })
            .collect();
        Ok(Self { nx, ny, x0: bounds[0], x1: bounds[1], y0: bounds[2], y1: bounds[3], times, cells })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u: C,
    pub utot: C,
}

/// Probe rows sorted by probe index, then time. Masked probes are skipped.
pub fn probe_rows(sol: &SolutionSet) -> Vec<ProbeRow> {
    let mut rows = Vec::new();
    for (k, series) in sol.probe_series.iter().enumerate() {
        let x = sol.targets[k];
        for (l, v) in series.iter().enumerate() {
            if let Some(v) = v {
                let t = sol.probe_times[l];
                rows.push(ProbeRow { t, x: x.re, y: x.im, u: v.u, utot: v.u + sol.incident(k, t) });
            }
        }
    }
    rows
}

pub fn write_probes(rows: &[ProbeRow], mut w: impl Write) -> Result<(), IoError> {
    let mut out = String::with_capacity(160 * (rows.len() + 1));
    out.push_str(PROBE_HEADER);
    out.push('\n');
    for r in rows {
        let vals = [r.t, r.x, r.y, r.u.re, r.u.im, r.utot.re, r.utot.im];
        let line: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_probes(r: impl BufRead) -> Result<Vec<ProbeRow>, IoError> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != PROBE_HEADER {
        return format_err("missing probe header");
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Format(format!("line {}: {e}", n + 2)))?;
        if v.len() != 7 {
            return format_err(format!("line {}: expected 7 columns, got {}", n + 2, v.len()));
        }
        rows.push(ProbeRow { t: v[0], x: v[1], y: v[2], u: C::new(v[3], v[4]), utot: C::new(v[5], v[6]) });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMap {
    /// Real part on a blue-white-red scale symmetric about zero.
    Linear,
    /// `log10 |u|` on a blue-to-red scale clipped to `[1e-11, 1e10]`.
    Log,
}

pub const LOG_RANGE: (f64, f64) = (1e-11, 1e10);

fn lerp(a: [f64; 3], b: [f64; 3], s: f64) -> [u8; 3] {
    let mut o = [0u8; 3];
    for k in 0..3 {
        o[k] = (a[k] + (b[k] - a[k]) * s).round().clamp(0.0, 255.0) as u8;
    }
    o
}

/// `s in [-1, 1]`: blue through white to red.
fn diverging(s: f64) -> [u8; 3] {
    let s = s.clamp(-1.0, 1.0);
    if s < 0.0 {
        lerp([255.0, 255.0, 255.0], [40.0, 60.0, 200.0], -s)
    } else {
        lerp([255.0, 255.0, 255.0], [200.0, 30.0, 30.0], s)
    }
}

/// `s in [0, 1]`: deep blue, cyan, yellow, red.
fn sequential(s: f64) -> [u8; 3] {
    let stops = [[10.0, 20.0, 120.0], [0.0, 200.0, 220.0], [250.0, 230.0, 40.0], [190.0, 20.0, 20.0]];
    let x = s.clamp(0.0, 1.0) * 3.0;
    let k = (x.floor() as usize).min(2);
    lerp(stops[k], stops[k + 1], x - k as f64)
}

/// One frame as a binary PPM; the top image row is `y1`, masked cells are black.
pub fn render_ppm(grid: &GridFile, frame: usize, map: ColorMap, mut w: impl Write) -> Result<(), IoError> {
    let cells = grid.frame(frame);
    let scale = cells.iter().flatten().map(|c| c.re.abs()).fold(0.0, f64::max);
    let (lo, hi) = (LOG_RANGE.0.log10(), LOG_RANGE.1.log10());
    let mut out = format!("P6\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let px = match cells[j * grid.nx + i] {
                None => [0, 0, 0],
                Some(c) => match map {
                    ColorMap::Linear => diverging(if scale > 0.0 { c.re / scale } else { 0.0 }),
                    ColorMap::Log => {
                        let m = c.norm();
                        let l = if m > 0.0 { m.log10() } else { lo };
                        sequential((l.clamp(lo, hi) - lo) / (hi - lo))
                    }
                },
            };
            out.extend_from_slice(&px);
        }
    }
    w.write_all(&out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridFile {
        let cells = vec![Some(C::new(1.0, -2.0)), None, Some(C::new(0.0, 0.0)), Some(C::new(-3.5, 1e-300)), None, Some(C::new(5.0, 6.0))];
        GridFile { nx: 3, ny: 1, x0: -1.0, x1: 1.0, y0: 0.0, y1: 0.0, times: vec![0.5, 2.0], cells }
    }

    #[test]
    fn grid_round_trip() {
        let g = grid();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"TFWV");
        assert_eq!(GridFile::read_from(&buf[..]).unwrap(), g);
        assert!(GridFile::read_from(&buf[..buf.len() - 1]).is_err());
        assert!(GridFile::read_from(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn probe_round_trip() {
        let rows = vec![
            ProbeRow { t: 0.1, x: 3.0, y: -1.0, u: C::new(1.0 / 3.0, -2e-17), utot: C::new(std::f64::consts::PI, 0.0) },
            ProbeRow { t: 0.2, x: 3.0, y: -1.0, u: C::new(1e300, -0.0), utot: C::new(5e-324, 1.0) },
        ];
        let mut buf = Vec::new();
        write_probes(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(PROBE_HEADER.as_bytes()));
        assert_eq!(read_probes(&buf[..]).unwrap(), rows);
        assert!(read_probes(&b"a,b\n"[..]).is_err());
    }

    #[test]
    fn zero_grid_is_uniform() {
        let g = GridFile { nx: 4, ny: 2, x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0, times: vec![0.0], cells: vec![Some(C::new(0.0, 0.0)); 8] };
        let mut img = Vec::new();
        render_ppm(&g, 0, ColorMap::Linear, &mut img).unwrap();
        let body = &img[img.len() - 24..];
        assert!(body.chunks(3).all(|p| p == [255, 255, 255]));
    }

    #[test]
    fn log_scale_clips() {
        let cells = vec![Some(C::new(1e-15, 0.0)), Some(C::new(1e-11, 0.0)), Some(C::new(1e10, 0.0)), Some(C::new(1e14, 0.0)), None];
        let g = GridFile { nx: 5, ny: 1, x0: 0.0, x1: 1.0, y0: 0.0, y1: 0.0, times: vec![0.0], cells };
        let mut img = Vec::new();
        render_ppm(&g, 0, ColorMap::Log, &mut img).unwrap();
        let px: Vec<&[u8]> = img[img.len() - 15..].chunks(3).collect();
        assert_eq!(px[0], px[1]);
        assert_eq!(px[2], px[3]);
        assert_ne!(px[0], px[2]);
        assert_eq!(px[4], [0, 0, 0]);
    }
}
