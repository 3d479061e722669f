//! Seeded synthetic phantoms: a vertical step, an elongated ellipse and two
//! overlapping disks, with optional additive Gaussian noise.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::edges::EdgeDescription;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid2D, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhantomKind {
    /// Step across the vertical line `x = edge * width`.
    OneDStructure { edge: f64 },
    /// Ellipse about the domain center with semi-axes `a` (along x) and `b`.
    Ellipse { a: f64, b: f64 },
    /// Union of two disks of radius `radius` whose centers lie
    /// `separation` apart on the horizontal line through the domain center.
    TwoCircles { radius: f64, separation: f64 },
}

impl PhantomKind {
    pub fn name(&self) -> &'static str {
        match self {
            PhantomKind::OneDStructure { .. } => "oned",
            PhantomKind::Ellipse { .. } => "ellipse",
            PhantomKind::TwoCircles { .. } => "circles",
        }
    }
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    /// Parses a kind name into its default geometry.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oned" => Ok(PhantomKind::OneDStructure { edge: 0.5 }),
            "ellipse" => Ok(PhantomKind::Ellipse { a: 0.4, b: 0.08 }),
            "circles" => Ok(PhantomKind::TwoCircles {
                radius: 0.18,
                separation: 0.25,
            }),
            other => invalid(format!("unknown phantom '{other}' (expected oned|ellipse|circles)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub nx: usize,
    pub ny: usize,
    pub contrast: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

pub const DEFAULT_SIZE: usize = 128;
pub const DEFAULT_CONTRAST: f64 = 0.8;
pub const DEFAULT_SIGMA: f64 = 0.1;

impl PhantomSpec {
    /// Default size, contrast and noise for `kind`.
    pub fn new(kind: PhantomKind) -> Self {
        Self {
            kind,
            nx: DEFAULT_SIZE,
            ny: DEFAULT_SIZE,
            contrast: DEFAULT_CONTRAST,
            noise_sigma: DEFAULT_SIGMA,
            seed: 0,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_sigma = 0.0;
        self
    }

    pub fn with_size(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny)
    }

    /// Analytic edge set in domain coordinates.
    pub fn edges(&self) -> Result<EdgeDescription> {
        let grid = self.grid()?;
        let (w, hgt) = grid.extent();
        let (cx, cy) = (0.5 * w, 0.5 * hgt);
        let inside = |lo: f64, hi: f64, max: f64| lo >= 0.0 && hi <= max;
        let positive = |vals: &[f64]| vals.iter().all(|v| *v > 0.0 && v.is_finite());
        match self.kind {
            PhantomKind::OneDStructure { edge } => {
                if !(edge > 0.0 && edge < 1.0) {
                    return invalid(format!("edge fraction must lie in (0, 1), got {edge}"));
                }
                Ok(EdgeDescription::VerticalLine { x: edge * w })
            }
            PhantomKind::Ellipse { a, b } => {
                if !positive(&[a, b]) || !inside(cx - a, cx + a, w) || !inside(cy - b, cy + b, hgt) {
                    return invalid(format!("ellipse ({a}, {b}) does not fit the domain"));
                }
                Ok(EdgeDescription::Ellipse { cx, cy, a, b })
            }
            PhantomKind::TwoCircles { radius, separation } => {
                let off = 0.5 * separation;
                if !positive(&[radius]) || !(separation >= 0.0)
                    || !inside(cx - off - radius, cx + off + radius, w)
                    || !inside(cy - radius, cy + radius, hgt)
                {
                    return invalid(format!(
                        "circles (r={radius}, separation={separation}) do not fit the domain"
                    ));
                }
                Ok(EdgeDescription::CirclePair {
                    c1: (cx - off, cy),
                    c2: (cx + off, cy),
                    r: radius,
                })
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return invalid(format!("contrast must lie in (0, 1], got {}", self.contrast));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return invalid(format!("noise sigma must be nonnegative, got {}", self.noise_sigma));
        }
        Ok(())
    }
}

/// Uniform sample in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `n` standard normal samples by the Box-Muller transform over a ChaCha20
/// stream, so any implementation of both reproduces them exactly.
pub fn standard_normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = 1.0 - unit(&mut rng);
        let u2 = unit(&mut rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        out.push(r * th.cos());
        out.push(r * th.sin());
    }
    out.truncate(n);
    out
}

/// Noiseless piecewise-constant image of the spec.
pub fn clean_image(spec: &PhantomSpec) -> Result<ScalarField> {
    spec.validate()?;
    let grid = spec.grid()?;
    let edges = spec.edges()?;
    let (lo, hi) = (0.5 - 0.5 * spec.contrast, 0.5 + 0.5 * spec.contrast);
    Ok(ScalarField::from_fn(grid, |x, y| {
        if edges.is_inside(x, y) {
            hi
        } else {
            lo
        }
    }))
}

/// Phantom image clamped to `[0, 1]` and its noise-free edge set.
pub fn generate(spec: &PhantomSpec) -> Result<(ScalarField, EdgeDescription)> {
    let clean = clean_image(spec)?;
    let edges = spec.edges()?;
    if spec.noise_sigma == 0.0 {
        return Ok((clean, edges));
    }
    let noise = standard_normals(spec.seed, clean.grid().len());
    let vals = clean
        .values()
        .iter()
        .zip(&noise)
        .map(|(c, z)| (c + spec.noise_sigma * z).clamp(0.0, 1.0))
        .collect();
    Ok((ScalarField::new(*clean.grid(), vals)?, edges))
}
