//! Domain-coloring images: red for real values, blue for positive and green
//! for negative imaginary ones, black for small and white for large magnitude.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;

const FAILED: [u8; 3] = [128, 128, 128];

/// Rectangle of the complex plane; pixel `(0, 0)` sits at `re_min + i im_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(Error::Format(format!("window ({re_min}, {re_max}, {im_min}, {im_max}) must be finite and increasing")));
        }
        Ok(Window { re_min, re_max, im_min, im_max })
    }

    /// Point at the center of pixel `(col, row)` of a `width x height` image.
    pub fn point(&self, col: usize, row: usize, width: usize, height: usize) -> C64 {
        let lerp = |lo: f64, hi: f64, k: usize, n: usize| if n > 1 { lo + (hi - lo) * k as f64 / (n - 1) as f64 } else { 0.5 * (lo + hi) };
        C64::new(lerp(self.re_min, self.re_max, col, width), lerp(self.im_max, self.im_min, row, height))
    }
}

/// Row-major RGB pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ImageBuffer {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Binary `P6` encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

/// Color of one value; `None` for a failed evaluation.
pub fn color(w: Option<C64>) -> [u8; 3] {
    let Some(w) = w.filter(|w| !w.re.is_nan() && !w.im.is_nan()) else {
        return FAILED;
    };
    let mag = w.norm();
    let v = if mag.is_infinite() { 1.0 } else { mag / (1.0 + mag) };
    let theta = if mag.is_infinite() { 0.0 } else { w.arg() };
    let (s, c) = theta.sin_cos();
    let hue = [c.abs(), (-s).max(0.0), s.max(0.0)];
    hue.map(|h| {
        let ch = if v <= 0.5 { h * 2.0 * v } else { h + (1.0 - h) * (2.0 * v - 1.0) };
        (255.0 * ch).round().clamp(0.0, 255.0) as u8
    })
}

pub fn domain_color<F>(f: F, window: Window, width: usize, height: usize) -> Result<ImageBuffer>
where
    F: Fn(C64) -> Option<C64> + Sync,
{
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("image size {width}x{height} must be positive")));
    }
    let rows: Vec<Vec<[u8; 3]>> = (0..height)
        .into_par_iter()
        .map(|row| (0..width).map(|col| color(f(window.point(col, row, width, height)))).collect())
        .collect();
    Ok(ImageBuffer { width, height, pixels: rows.concat() })
}

pub fn write_ppm(img: &ImageBuffer, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&img.to_ppm())?;
    Ok(())
}

/// Largest normalized phase jump `|arg w1 - arg w2| / pi` (wrapped to
/// `[0, 1]`) between horizontally adjacent pixels of each row.
pub fn row_hue_jumps<F>(f: F, window: Window, width: usize, height: usize) -> Vec<f64>
where
    F: Fn(C64) -> Option<C64> + Sync,
{
    (0..height)
        .into_par_iter()
        .map(|row| {
            let phases: Vec<Option<f64>> = (0..width).map(|col| f(window.point(col, row, width, height)).map(|w| w.arg())).collect();
            phases
                .windows(2)
                .filter_map(|p| match (p[0], p[1]) {
                    (Some(a), Some(b)) => {
                        let d = (a - b).rem_euclid(2.0 * PI);
                        Some(d.min(2.0 * PI - d) / PI)
                    }
                    _ => None,
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
