//! File formats: PGM (P2/P5), raw little-endian `f64` grids and the
//! convergence-history CSV.

use std::fmt::Write as _;

use crate::altmin::IterationReport;
use crate::edges::EdgeDescription;
use crate::energy::EnergyBreakdown;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid2D, ScalarField};
use crate::synth::PhantomSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`, decimal samples.
    Ascii,
    /// `P5`, one byte per sample for `maxval < 256`, else two (big endian).
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub format: PgmFormat,
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

fn parse_err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        offset,
        message: message.into(),
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    /// Next decimal token and its byte offset.
    fn number(&mut self, what: &str) -> Result<(u64, usize)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            if start == self.bytes.len() {
                return parse_err(start, format!("unexpected end of data reading {what}"));
            }
            return parse_err(start, format!("expected {what}, found byte 0x{:02x}", self.bytes[start]));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        match text.parse::<u64>() {
            Ok(v) => Ok((v, start)),
            Err(_) => parse_err(start, format!("{what} '{text}' is out of range")),
        }
    }
}

/// Decodes a P2 or P5 stream.
pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage> {
    if bytes.len() < 2 {
        return parse_err(0, "missing magic number");
    }
    let format = match &bytes[..2] {
        b"P2" => PgmFormat::Ascii,
        b"P5" => PgmFormat::Binary,
        _ => return parse_err(0, "magic number must be P2 or P5"),
    };
    let mut c = Cursor { bytes, pos: 2 };
    let (width, width_at) = c.number("width")?;
    let (height, height_at) = c.number("height")?;
    let (width, height) = (width as usize, height as usize);
    if width == 0 {
        return parse_err(width_at, "width must be positive");
    }
    if height == 0 {
        return parse_err(height_at, "height must be positive");
    }
    let (maxval, maxval_at) = c.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return parse_err(maxval_at, format!("maxval must lie in 1..=65535, got {maxval}"));
    }
    let maxval = maxval as u16;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse { offset: width_at, message: "image too large".into() })?;
    let mut pixels = Vec::with_capacity(n);
    match format {
        PgmFormat::Ascii => {
            for _ in 0..n {
                let (p, at) = c.number("pixel")?;
                if p > maxval as u64 {
                    return parse_err(at, format!("pixel {p} exceeds maxval {maxval}"));
                }
                pixels.push(p as u16);
            }
        }
        PgmFormat::Binary => {
            match bytes.get(c.pos) {
                Some(b) if b.is_ascii_whitespace() => c.pos += 1,
                Some(_) => return parse_err(c.pos, "expected one whitespace byte before raster"),
                None => return parse_err(c.pos, "missing raster data"),
            }
            let bpp = if maxval < 256 { 1 } else { 2 };
            let need = n * bpp;
            if bytes.len() - c.pos < need {
                return parse_err(
                    bytes.len(),
                    format!("truncated raster: need {need} bytes, have {}", bytes.len() - c.pos),
                );
            }
            for k in 0..n {
                let at = c.pos + k * bpp;
                let p = if bpp == 1 {
                    bytes[at] as u16
                } else {
                    u16::from_be_bytes([bytes[at], bytes[at + 1]])
                };
                if p > maxval {
                    return parse_err(at, format!("pixel {p} exceeds maxval {maxval}"));
                }
                pixels.push(p);
            }
        }
    }
    Ok(PgmImage {
        format,
        width,
        height,
        maxval,
        pixels,
    })
}

/// Field in `[0, 1]` from a PGM stream, on the unit-domain grid.
pub fn read_pgm(bytes: &[u8]) -> Result<ScalarField> {
    let img = parse_pgm(bytes)?;
    let grid = Grid2D::new(img.width, img.height)?;
    let m = img.maxval as f64;
    ScalarField::new(grid, img.pixels.iter().map(|p| *p as f64 / m).collect())
}

pub fn encode_pgm(img: &PgmImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels.len() * 2 + 32);
    match img.format {
        PgmFormat::Ascii => {
            let mut s = format!("P2\n{} {}\n{}\n", img.width, img.height, img.maxval);
            for row in img.pixels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
            out.extend_from_slice(s.as_bytes());
        }
        PgmFormat::Binary => {
            out.extend_from_slice(format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).as_bytes());
            for p in &img.pixels {
                if img.maxval < 256 {
                    out.push(*p as u8);
                } else {
                    out.extend_from_slice(&p.to_be_bytes());
                }
            }
        }
    }
    out
}

/// Quantizes `f` to `0..=maxval`, rounding half away from zero.
/// Returns the image and the number of samples clamped into `[0, 1]`.
pub fn quantize(f: &ScalarField, maxval: u16, format: PgmFormat) -> Result<(PgmImage, usize)> {
    if maxval == 0 {
        return invalid("maxval must be positive");
    }
    let m = maxval as f64;
    let mut clamped = 0;
    let pixels = f
        .values()
        .iter()
        .map(|x| {
            if !(0.0..=1.0).contains(x) {
                clamped += 1;
            }
            (x.clamp(0.0, 1.0) * m).round() as u16
        })
        .collect();
    let g = f.grid();
    Ok((
        PgmImage {
            format,
            width: g.nx(),
            height: g.ny(),
            maxval,
            pixels,
        },
        clamped,
    ))
}

/// P5 bytes of `f` and the count of clamped samples.
pub fn write_pgm(f: &ScalarField, maxval: u16) -> Result<(Vec<u8>, usize)> {
    let (img, clamped) = quantize(f, maxval, PgmFormat::Binary)?;
    Ok((encode_pgm(&img), clamped))
}

const F64_MAGIC: &[u8; 4] = b"F64G";

/// Raw grid: magic, `nx` and `ny` as little-endian `u32`, four zero bytes,
/// then `nx * ny` little-endian `f64` in row-major order.
pub fn write_f64_grid(f: &ScalarField) -> Result<Vec<u8>> {
    let g = f.grid();
    let (nx, ny) = match (u32::try_from(g.nx()), u32::try_from(g.ny())) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return invalid("grid too large for the raw format"),
    };
    let mut out = Vec::with_capacity(16 + 8 * g.len());
    out.extend_from_slice(F64_MAGIC);
    out.extend_from_slice(&nx.to_le_bytes());
    out.extend_from_slice(&ny.to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn read_f64_grid(bytes: &[u8]) -> Result<ScalarField> {
    if bytes.len() < 16 {
        return parse_err(bytes.len(), "header needs 16 bytes");
    }
    if &bytes[..4] != F64_MAGIC {
        return parse_err(0, "bad magic for raw f64 grid");
    }
    let nx = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if nx == 0 || ny == 0 {
        return parse_err(4, "grid dimensions must be positive");
    }
    let need = 16 + 8 * nx * ny;
    if bytes.len() != need {
        return parse_err(bytes.len().min(need), format!("expected {need} bytes, found {}", bytes.len()));
    }
    let vals = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect::<Vec<_>>();
    if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
        return parse_err(16 + 8 * k, "non-finite sample");
    }
    ScalarField::new(Grid2D::new(nx, ny)?, vals)
}

pub const HISTORY_HEADER: &str = "k,e_k,total,coupled,mm,grad_perturb,fidelity";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub k: usize,
    pub e_k: f64,
    pub breakdown: EnergyBreakdown,
}

pub fn write_history(report: &IterationReport) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for r in &report.records {
        let b = &r.breakdown;
        writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.k, r.e_k, b.total, b.coupled, b.mm, b.grad_perturb, b.fidelity
        )
        .expect("write to string");
    }
    s
}

pub fn read_history(text: &str) -> Result<Vec<HistoryRow>> {
    let mut lines = text.split_inclusive('\n');
    let mut offset = 0;
    let header = lines.next().unwrap_or("");
    if header.trim_end() != HISTORY_HEADER {
        return parse_err(0, "missing history header");
    }
    offset += header.len();
    let mut rows = Vec::new();
    for line in lines {
        let body = line.trim_end();
        if body.is_empty() {
            offset += line.len();
            continue;
        }
        let fields: Vec<&str> = body.split(',').collect();
        if fields.len() != 7 {
            return parse_err(offset, format!("expected 7 fields, found {}", fields.len()));
        }
        let mut col = offset;
        let mut nums = [0.0; 6];
        let k = match fields[0].parse::<usize>() {
            Ok(k) => k,
            Err(_) => return parse_err(col, format!("bad iteration index '{}'", fields[0])),
        };
        col += fields[0].len() + 1;
        for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
            *slot = match f.parse::<f64>() {
                Ok(v) => v,
                Err(_) => return parse_err(col, format!("bad number '{f}'")),
            };
            col += f.len() + 1;
        }
        rows.push(HistoryRow {
            k,
            e_k: nums[0],
            breakdown: EnergyBreakdown {
                total: nums[1],
                coupled: nums[2],
                mm: nums[3],
                grad_perturb: nums[4],
                fidelity: nums[5],
            },
        });
        offset += line.len();
    }
    Ok(rows)
}

/// Plain-text record of a phantom's spec and analytic edge set.
pub fn phantom_sidecar(spec: &PhantomSpec, edges: &EdgeDescription) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind = {}", spec.kind);
    let _ = writeln!(s, "geometry = {:?}", spec.kind);
    let _ = writeln!(s, "size = {} x {}", spec.nx, spec.ny);
    let _ = writeln!(s, "contrast = {}", spec.contrast);
    let _ = writeln!(s, "noise_sigma = {}", spec.noise_sigma);
    let _ = writeln!(s, "seed = {}", spec.seed);
    let _ = writeln!(s, "noise = chacha20 box-muller");
    let _ = writeln!(s, "edges = {edges:?}");
    s
}
