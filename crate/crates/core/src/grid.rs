//! Sampled lines, strips of analyticity and their class arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::segment_integral;
use crate::transforms::{inverse_fourier, TailFit};
use crate::C64;

/// A real number extended by the two infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn rank(self) -> (i8, f64) {
        match self {
            ExtendedReal::NegInf => (-1, 0.0),
            ExtendedReal::Finite(v) => (0, v),
            ExtendedReal::PosInf => (1, 0.0),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, x) = self.rank();
        let (b, y) = other.rank();
        match a.cmp(&b) {
            Ordering::Equal => x.partial_cmp(&y),
            o => Some(o),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => write!(f, "-inf"),
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInf => write!(f, "inf"),
        }
    }
}

/// The class `{a, b}`: Fourier images analytic in the strip `a < Im z < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripClass {
    lower: ExtendedReal,
    upper: ExtendedReal,
}

impl StripClass {
    pub fn new(lower: impl Into<ExtendedReal>, upper: impl Into<ExtendedReal>) -> Result<Self> {
        let (lower, upper) = (lower.into(), upper.into());
        let nan = |e: ExtendedReal| matches!(e, ExtendedReal::Finite(v) if v.is_nan());
        if nan(lower) || nan(upper) || lower.partial_cmp(&upper) != Some(Ordering::Less) {
            return Err(Error::InvalidStrip { lower: lower.to_string(), upper: upper.to_string() });
        }
        Ok(StripClass { lower, upper })
    }

    /// The whole plane, `{-inf, inf}`.
    pub fn full() -> Self {
        StripClass { lower: ExtendedReal::NegInf, upper: ExtendedReal::PosInf }
    }

    pub fn lower(&self) -> ExtendedReal {
        self.lower
    }

    pub fn upper(&self) -> ExtendedReal {
        self.upper
    }

    pub fn contains_line(&self, offset: f64) -> bool {
        let c = ExtendedReal::Finite(offset);
        self.lower < c && c < self.upper
    }
}

impl fmt::Display for StripClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lower, self.upper)
    }
}

/// Strip of the convolution of two functions: the intersection of their strips.
pub fn class_of_convolution(f: StripClass, g: StripClass) -> Result<StripClass> {
    let lower = f.lower.max(g.lower);
    let upper = f.upper.min(g.upper);
    if lower.partial_cmp(&upper) != Some(Ordering::Less) {
        return Err(Error::EmptyStrip { lower: lower.to_string(), upper: upper.to_string() });
    }
    Ok(StripClass { lower, upper })
}

/// Uniform samples of a function along `Im z = offset` at `t_j = -R + j 2R/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGrid {
    offset: f64,
    half_width: f64,
    samples: Vec<C64>,
}

pub(crate) fn check_dyadic(count: usize) -> Result<()> {
    if count < 8 || !count.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("count {count} must be a power of two >= 8")));
    }
    Ok(())
}

impl LineGrid {
    pub fn new(offset: f64, half_width: f64, samples: Vec<C64>) -> Result<Self> {
        check_dyadic(samples.len())?;
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidGrid(format!("offset {offset} must be finite")));
        }
        Ok(LineGrid { offset, half_width, samples })
    }

    /// Samples `f(t + i offset)` on the grid.
    pub fn from_fn(
        offset: f64,
        half_width: f64,
        count: usize,
        f: impl Fn(C64) -> C64,
    ) -> Result<Self> {
        check_dyadic(count)?;
        let h = 2.0 * half_width / count as f64;
        let samples = (0..count).map(|j| f(C64::new(-half_width + j as f64 * h, offset))).collect();
        LineGrid::new(offset, half_width, samples)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.samples.len() as f64
    }

    pub fn abscissa(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count()).map(|j| self.abscissa(j))
    }

    /// Complex points `t_j + i offset`.
    pub fn point(&self, j: usize) -> C64 {
        C64::new(self.abscissa(j), self.offset)
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    /// Same geometry, new values.
    pub fn with_samples(&self, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != self.count() {
            return Err(Error::GridMismatch(format!("{} samples for a grid of {}", samples.len(), self.count())));
        }
        LineGrid::new(self.offset, self.half_width, samples)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        LineGrid { samples: self.samples.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// `f(z, value)` at every node `z`.
    pub fn map_with_point(&self, f: impl Fn(C64, C64) -> C64) -> Self {
        let samples = self.samples.iter().enumerate().map(|(j, &v)| f(self.point(j), v)).collect();
        LineGrid { samples, ..self.clone() }
    }

    pub fn same_geometry(&self, other: &LineGrid) -> bool {
        self.count() == other.count() && self.half_width == other.half_width && self.offset == other.offset
    }

    /// Index of the sample at `t = 0`.
    pub fn center(&self) -> usize {
        self.count() / 2
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `int |F|^2 dx` along the line: corrected trapezoid over the grid plus
    /// the `|k1|^2 / x^2` tails of the fitted decay model.
    pub fn norm_squared(&self) -> f64 {
        let mags: Vec<C64> = self.samples.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        let body = segment_integral(&mags, 0.0, self.spacing(), C64::new(0.0, 0.0)).re;
        let xs: Vec<f64> = self.abscissae().collect();
        let tail = TailFit::fit(&xs, &self.samples);
        let b = xs[xs.len() - 1];
        body + tail.right[0].norm_sqr() / b + tail.left[0].norm_sqr() / self.half_width
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Writes the grid as CSV: a `#` metadata line, the `t,re,im` header,
    /// then one row per sample with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# offset = {:.16e}, half_width = {:.16e}, count = {}",
            self.offset,
            self.half_width,
            self.count()
        )?;
        writeln!(out, "t,re,im")?;
        for (j, v) in self.samples.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.abscissa(j), v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let meta = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
        let meta = meta
            .strip_prefix('#')
            .ok_or_else(|| Error::Format("missing '#' metadata line".into()))?;
        let mut offset = None;
        let mut half_width = None;
        let mut count = None;
        for field in meta.split(',') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad metadata field '{field}'")))?;
            let value = value.trim();
            let bad = |_| Error::Format(format!("bad metadata value '{value}'"));
            match key.trim() {
                "offset" => offset = Some(value.parse::<f64>().map_err(bad)?),
                "half_width" => half_width = Some(value.parse::<f64>().map_err(bad)?),
                "count" => count = Some(value.parse::<usize>().map_err(|_| Error::Format(format!("bad count '{value}'")))?),
                other => return Err(Error::Format(format!("unknown metadata key '{other}'"))),
            }
        }
        let (offset, half_width, count) = match (offset, half_width, count) {
            (Some(o), Some(r), Some(n)) => (o, r, n),
            _ => return Err(Error::Format("metadata needs offset, half_width and count".into())),
        };
        let header = lines.next().ok_or_else(|| Error::Format("missing header".into()))??;
        if header.trim() != "t,re,im" {
            return Err(Error::Format(format!("unexpected header '{header}'")));
        }
        let mut samples = Vec::with_capacity(count);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Format(format!("expected 3 columns in '{line}'")));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}'")));
            let (_, re, im) = (parse(cols[0])?, parse(cols[1])?, parse(cols[2])?);
            samples.push(C64::new(re, im));
        }
        if samples.len() != count {
            return Err(Error::Format(format!("metadata count {count} but {} rows", samples.len())));
        }
        LineGrid::new(offset, half_width, samples)
    }
}

/// Samples `expr` at `t_j + i offset`.
pub fn make_grid(expr: &Expr, offset: f64, half_width: f64, count: usize) -> Result<LineGrid> {
    check_dyadic(count)?;
    if !(half_width > 0.0) {
        return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
    }
    let h = 2.0 * half_width / count as f64;
    let samples = (0..count)
        .map(|j| {
            let t = -half_width + j as f64 * h;
            expr.eval(C64::new(t, offset)).map_err(|source| Error::EvalAt { abscissa: t, source })
        })
        .collect::<Result<Vec<_>>>()?;
    LineGrid::new(offset, half_width, samples)
}

/// Fitted strip together with the RMS residuals of the two log-magnitude fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripEstimate {
    pub strip: StripClass,
    pub residual_lower: f64,
    pub residual_upper: f64,
}

/// Decay rate of `|f|` along one half-line. `None` means faster than any exponential.
fn fit_decay(ts: &[f64], mags: &[f64], noise: f64) -> (Option<f64>, f64) {
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let threshold = (100.0 * noise).max(1e-14 * peak);
    let last = match mags.iter().rposition(|&m| m > threshold) {
        Some(k) if k >= 8 => k,
        _ => return (None, 0.0),
    };
    let t_end = ts[last];
    let window: Vec<(f64, f64)> = ts[..=last]
        .iter()
        .zip(&mags[..=last])
        .filter(|(t, m)| **t >= 0.5 * t_end && **m > 0.0)
        .map(|(t, m)| (*t, m.ln()))
        .collect();
    if window.len() < 4 {
        return (None, 0.0);
    }
    let (slope, intercept) = linear_fit(&window);
    let residual = (window.iter().map(|(t, y)| (y - slope * t - intercept).powi(2)).sum::<f64>()
        / window.len() as f64)
        .sqrt();
    // accelerating decay (Gaussian-like) has a steepening log-slope across the window
    let (b, c) = quadratic_slopes(&window);
    let t0 = window[0].0;
    let s_start = b + 2.0 * c * t0;
    let s_end = b + 2.0 * c * t_end;
    if s_start < 0.0 && s_end / s_start > 1.5 {
        return (None, residual);
    }
    (Some((-slope).max(0.0)), residual)
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mt)
}

/// Least-squares `y = a + b t + c t^2`, returning `(b, c)`.
fn quadratic_slopes(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    // centered monomials for conditioning
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for &(t, y) in pts {
        let u = t - mt;
        let phi = [1.0, u, u * u];
        for a in 0..3 {
            r[a] += phi[a] * y;
            for b in 0..3 {
                m[a][b] += phi[a] * phi[b];
            }
        }
    }
    let coef = solve3(m, r).unwrap_or([0.0; 3]);
    // back to t: b + 2c t with u = t - mt
    (coef[1] - 2.0 * coef[2] * mt, coef[2])
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Some(x)
}

/// Estimates the strip of analyticity from the exponential decay of the
/// inverse transform on both half-lines. Advisory only.
pub fn estimate_strip(grid: &LineGrid) -> StripEstimate {
    let f = inverse_fourier(grid);
    let n = f.count();
    let c = grid.offset();
    let center = n / 2;
    let mags: Vec<f64> = f.samples().iter().map(|v| v.norm()).collect();
    let ts: Vec<f64> = (0..n).map(|j| f.abscissa(j)).collect();
    let t_max = f.half_width();

    let mut far: Vec<f64> = (0..n).filter(|&j| ts[j].abs() >= 0.75 * t_max).map(|j| mags[j]).collect();
    far.sort_by(f64::total_cmp);
    let noise = far.get(far.len() / 2).copied().unwrap_or(0.0);

    let right_t: Vec<f64> = ts[center..].to_vec();
    let right_m: Vec<f64> = mags[center..].to_vec();
    let left_t: Vec<f64> = ts[..=center].iter().rev().map(|t| -t).collect();
    let left_m: Vec<f64> = mags[..=center].iter().rev().copied().collect();

    let (rate_pos, residual_lower) = fit_decay(&right_t, &right_m, noise);
    let (rate_neg, residual_upper) = fit_decay(&left_t, &left_m, noise);
    let lower = match rate_pos {
        Some(r) => ExtendedReal::Finite(c - r),
        None => ExtendedReal::NegInf,
    };
    let upper = match rate_neg {
        Some(r) => ExtendedReal::Finite(c + r),
        None => ExtendedReal::PosInf,
    };
    // a non-decaying side collapses the strip to the line; widen by a hair to stay valid
    let strip = StripClass::new(lower, upper).unwrap_or_else(|_| {
        StripClass::new(c - 1e-12, c + 1e-12).expect("finite offset")
    });
    StripEstimate { strip, residual_lower, residual_upper }
}
