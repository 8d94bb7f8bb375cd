//! Fourier transforms between time grids and line grids, Cauchy-type
//! integrals along a line, Plemelj boundary values and convolution.
//!
//! Truncated data are completed by an algebraic tail model
//! `F(x) ~ k1/x + k2/x^2 + k3/x^3 + k4/x^4` fitted on the outer tenth of each side, whose
//! contribution is added in closed form.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grid::{check_dyadic, LineGrid};
use crate::quad::{fft_plan, segment_integral, segment_transform};
use crate::C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub(crate) fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// Which part of the real axis carries data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Full,
    /// Zero for `t < 0`; the sample at `t = 0` holds the right limit.
    NonNegative,
    /// Zero for `t > 0`; the sample at `t = 0` holds the left limit.
    NonPositive,
}

/// Uniform samples on `t_j = -T + j 2T/N`.
///
/// When produced from a line `Im z = c`, the samples are `e^{-ct} f(t)`
/// where `f` is the transform partner of the function on the real axis;
/// `weight_offset` records `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    half_width: f64,
    samples: Vec<C64>,
    weight_offset: f64,
    support: Support,
}

impl TimeGrid {
    pub fn new(half_width: f64, samples: Vec<C64>, weight_offset: f64, support: Support) -> Result<Self> {
        check_dyadic(samples.len())?;
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        let mut g = TimeGrid { half_width, samples, weight_offset, support };
        g.enforce_support();
        Ok(g)
    }

    pub fn from_fn(half_width: f64, count: usize, support: Support, f: impl Fn(f64) -> C64) -> Result<Self> {
        check_dyadic(count)?;
        let h = 2.0 * half_width / count as f64;
        let samples = (0..count).map(|j| f(-half_width + j as f64 * h)).collect();
        TimeGrid::new(half_width, samples, 0.0, support)
    }

    fn enforce_support(&mut self) {
        let c = self.center();
        match self.support {
            Support::Full => {}
            Support::NonNegative => self.samples[..c].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0)),
            Support::NonPositive => self.samples[c + 1..].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0)),
        }
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

    pub fn center(&self) -> usize {
        self.samples.len() / 2
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn weight_offset(&self) -> f64 {
        self.weight_offset
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn same_geometry(&self, other: &TimeGrid) -> bool {
        self.count() == other.count()
            && self.half_width == other.half_width
            && self.weight_offset == other.weight_offset
    }

    pub fn with_samples(&self, samples: Vec<C64>, support: Support) -> Result<Self> {
        TimeGrid::new(self.half_width, samples, self.weight_offset, support)
    }

    /// Restriction to one half-line. `limit` replaces the sample at `t = 0`.
    pub fn restrict(&self, support: Support, limit: Option<C64>) -> TimeGrid {
        let mut samples = self.samples.clone();
        if let Some(v) = limit {
            let c = self.center();
            samples[c] = v;
        }
        let mut g = TimeGrid { samples, support, ..self.clone() };
        g.enforce_support();
        g
    }

    /// `int |f|^2 dt` with end-corrected weights on each side of `t = 0`.
    pub fn norm_squared(&self) -> f64 {
        let h = self.spacing();
        let c = self.center();
        let mags: Vec<C64> = self.samples.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        let left = if self.support != Support::NonNegative {
            segment_integral(&mags[..=c], 0.0, h, C64::new(0.0, 0.0)).re
        } else {
            0.0
        };
        let right = if self.support != Support::NonPositive {
            segment_integral(&mags[c..], 0.0, h, C64::new(0.0, 0.0)).re
        } else {
            0.0
        };
        left + right
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Fraction of `sum |f_j|^2` carried by nodes with `t < 0` (or `t > 0`).
    pub fn mass_fraction(&self, negative_side: bool) -> f64 {
        let c = self.center();
        let total: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let part: f64 = if negative_side {
            self.samples[..c].iter().map(|v| v.norm_sqr()).sum()
        } else {
            self.samples[c + 1..].iter().map(|v| v.norm_sqr()).sum()
        };
        part / total
    }

    /// `(2 pi)^{-1/2} int f(t) e^{i omega t} dt` over the half-line (or the
    /// whole support) by direct corrected quadrature, for complex `omega`.
    pub fn transform_at(&self, omega: C64) -> C64 {
        let h = self.spacing();
        let c = self.center();
        let mut acc = C64::new(0.0, 0.0);
        if self.support != Support::NonPositive {
            acc += segment_integral(&self.samples[c..], 0.0, h, omega);
        }
        if self.support != Support::NonNegative {
            acc += segment_integral(&self.samples[..=c], -self.half_width, h, omega);
        }
        acc * inv_sqrt_2pi()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# weight_offset = {:.16e}, half_width = {:.16e}, count = {}",
            self.weight_offset,
            self.half_width,
            self.count()
        )?;
        writeln!(out, "t,re,im")?;
        for (j, v) in self.samples.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.abscissa(j), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Algebraic tail model `sum_n k_n/x^n` on both sides of a
/// truncated grid. `k1` is shared: unequal `1/x` coefficients would mean a
/// logarithmic singularity at the origin of the partner function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TailFit {
    pub left: [C64; TAIL_TERMS],
    pub right: [C64; TAIL_TERMS],
}

/// Tails below this fraction of the peak are treated as zero.
const NEGLIGIBLE_TAIL: f64 = 1e-9;

/// Number of inverse powers in the tail model.
pub const TAIL_TERMS: usize = 4;

impl TailFit {
    /// Least-squares fit on the outer 10% of each side.
    pub fn fit(abscissae: &[f64], values: &[C64]) -> TailFit {
        Self::fit_sides(abscissae, values, true, true)
    }

    pub fn fit_sides(abscissae: &[f64], values: &[C64], left: bool, right: bool) -> TailFit {
        let n = values.len();
        let m = (n / 10).max(4).min(n / 2);
        let scale = abscissae[0].abs().max(abscissae[n - 1].abs());
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut out = TailFit::default();
        if scale == 0.0 || !(left || right) {
            return out;
        }
        // unknowns: k1, then (k2, k3) per active side; basis in u = scale/x
        let sides: Vec<(bool, std::ops::Range<usize>)> = [(false, 0..m), (true, n - m..n)]
            .into_iter()
            .filter(|(is_right, _)| if *is_right { right } else { left })
            // a side that has already decayed away only feeds noise into the fit
            .filter(|(_, range)| values[range.clone()].iter().any(|v| v.norm() > NEGLIGIBLE_TAIL * peak))
            .collect();
        if sides.is_empty() {
            return out;
        }
        let per_side = TAIL_TERMS - 1;
        let dim = 1 + per_side * sides.len();
        let mut ata = vec![vec![0.0; dim]; dim];
        let mut atb = vec![C64::new(0.0, 0.0); dim];
        for (slot, (_, range)) in sides.iter().enumerate() {
            for j in range.clone() {
                let x = abscissae[j];
                if x == 0.0 {
                    continue;
                }
                let u = scale / x;
                let mut row = vec![0.0; dim];
                row[0] = u;
                for p in 0..per_side {
                    row[1 + per_side * slot + p] = u.powi(p as i32 + 2);
                }
                for a in 0..dim {
                    atb[a] += values[j] * row[a];
                    for b in 0..dim {
                        ata[a][b] += row[a] * row[b];
                    }
                }
            }
        }
        let Some(coef) = solve_dense(ata, atb) else {
            return out;
        };
        for (slot, (is_right, _)) in sides.iter().enumerate() {
            let mut c = [coef[0] * scale; TAIL_TERMS];
            for p in 0..per_side {
                c[p + 1] = coef[1 + per_side * slot + p] * scale.powi(p as i32 + 2);
            }
            if *is_right {
                out.right = c;
            } else {
                out.left = c;
            }
        }
        out
    }

    /// The `1/x` coefficient; it encodes a jump at the origin.
    pub fn k1(&self) -> C64 {
        if self.right[0] != C64::new(0.0, 0.0) {
            self.right[0]
        } else {
            self.left[0]
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = b.len();
    let norm = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-15 * norm {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            let bc = b[col];
            b[row] -= bc * f;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= x[k] * a[row][k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Exponential integrals `[E_1(z), .., E_4(z)]`.
pub(crate) fn expint(z: C64) -> [C64; TAIL_TERMS] {
    let e1 = if z.norm() < 2.0 {
        let mut sum = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 1..200 {
            term = term * (-z) / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // modified Lentz continued fraction for E_1
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = C64::new(1.0 / tiny, 0.0);
        let mut d = C64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..20_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = C64::new(1.0, 0.0) / (d * an + b);
            c = b + C64::new(an, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    };
    let decay = (-z).exp();
    let mut out = [e1; TAIL_TERMS];
    for n in 1..TAIL_TERMS {
        out[n] = (decay - z * out[n - 1]) / n as f64;
    }
    out
}

/// `int` over the two truncated tails of `sum_n k_n t^{-n} e^{i omega t}`,
/// for tails `(-inf, a]` and `[b, inf)` with `a < 0 < b`.
fn fourier_tail(tail: &TailFit, a: f64, b: f64, omega: f64) -> C64 {
    let big_a = -a;
    if omega == 0.0 {
        // finite part of the shared 1/t term
        let mut acc = tail.right[0] * (-b.ln()) + tail.left[0] * big_a.ln();
        for k in 1..TAIL_TERMS {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            acc += tail.right[k] / (k as f64 * b.powi(k as i32)) + tail.left[k] * sign / (k as f64 * big_a.powi(k as i32));
        }
        return acc;
    }
    let er = expint(C64::new(0.0, -omega * b));
    let el = expint(C64::new(0.0, omega * big_a));
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..TAIL_TERMS {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        acc += tail.right[k] * er[k] / b.powi(k as i32) + tail.left[k] * el[k] * sign / big_a.powi(k as i32);
    }
    acc
}

/// Line-grid image of a time grid: `F(x_k)` with `x_k = k pi / T`,
/// `k = -N/2 .. N/2-1`, on the line `Im z = weight_offset`.
pub fn fourier(f: &TimeGrid) -> LineGrid {
    let n = f.count();
    let h = f.spacing();
    let c = f.center();
    let t_max = f.half_width();
    let mut out = vec![C64::new(0.0, 0.0); n];
    if f.support != Support::NonPositive {
        let right = segment_transform(&f.samples[c..], 0.0, h, n, 1.0);
        out.iter_mut().zip(right).for_each(|(o, v)| *o += v);
    }
    if f.support != Support::NonNegative {
        let left = segment_transform(&f.samples[..=c], -t_max, h, n, 1.0);
        out.iter_mut().zip(left).for_each(|(o, v)| *o += v);
    }
    let ts: Vec<f64> = (0..n).map(|j| f.abscissa(j)).collect();
    let tail = TailFit::fit_sides(&ts, &f.samples, f.support != Support::NonNegative, f.support != Support::NonPositive);
    let r = n as f64 * PI / (2.0 * t_max);
    let dx = PI / t_max;
    let b = ts[n - 1];
    let samples = out
        .into_iter()
        .enumerate()
        .map(|(q, v)| {
            let x = -r + q as f64 * dx;
            (v + fourier_tail(&tail, -t_max, b, x)) * inv_sqrt_2pi()
        })
        .collect();
    LineGrid::new(f.weight_offset, r, samples).expect("dual grid is valid")
}

/// Time grid `f(t_k)`, `t_k = k pi / R`, with the kernel `e^{-ixt}`.
pub fn inverse_fourier(line: &LineGrid) -> TimeGrid {
    inverse_fourier_with_jump(line).0
}

/// Inverse transform together with the jump `f(0+) - f(0-)` implied by the
/// `1/x` decay of the data. The sample at `t = 0` is the midpoint value.
pub fn inverse_fourier_with_jump(line: &LineGrid) -> (TimeGrid, C64) {
    let n = line.count();
    let h = line.spacing();
    let r = line.half_width();
    let raw = segment_transform(line.samples(), -r, h, n, -1.0);
    let xs: Vec<f64> = line.abscissae().collect();
    let tail = TailFit::fit(&xs, line.samples());
    let t_max = n as f64 * PI / (2.0 * r);
    let dt = PI / r;
    let b = xs[n - 1];
    let samples = raw
        .into_iter()
        .enumerate()
        .map(|(q, v)| {
            let t = -t_max + q as f64 * dt;
            (v + fourier_tail(&tail, -r, b, -t)) * inv_sqrt_2pi()
        })
        .collect();
    let jump = C64::new(0.0, -(2.0 * PI).sqrt()) * tail.k1();
    let grid = TimeGrid::new(t_max, samples, line.offset(), Support::Full).expect("dual grid is valid");
    (grid, jump)
}

/// Half-line part of the inverse transform of `line`: `t >= 0` for `plus`,
/// `t <= 0` otherwise, with the one-sided limit stored at `t = 0`.
pub fn half_line_samples(line: &LineGrid, plus: bool) -> TimeGrid {
    let (f, jump) = inverse_fourier_with_jump(line);
    let mid = f.samples()[f.center()];
    if plus {
        f.restrict(Support::NonNegative, Some(mid + jump * 0.5))
    } else {
        f.restrict(Support::NonPositive, Some(mid - jump * 0.5))
    }
}

/// `h(t) = (2 pi)^{-1/2} int f(t - s) g(s) ds`, evaluated through the
/// convolution theorem so that kinks at the origin keep full accuracy.
pub fn convolve(f: &TimeGrid, g: &TimeGrid) -> Result<TimeGrid> {
    if !f.same_geometry(g) {
        return Err(Error::GridMismatch(format!(
            "convolve needs equal grids (T {} vs {}, N {} vs {}, offset {} vs {})",
            f.half_width, g.half_width, f.count(), g.count(), f.weight_offset, g.weight_offset
        )));
    }
    let ff = fourier(f);
    let gg = fourier(g);
    let product: Vec<C64> = ff.samples().iter().zip(gg.samples()).map(|(a, b)| a * b).collect();
    let hh = ff.with_samples(product)?;
    Ok(inverse_fourier(&hh))
}

/// `b^n int_b^inf dt/(t^n (t - z))` as a function of `u = z/b`:
/// `sum_k u^k/(k + n)`.
fn tail_kernel(n: usize, u: C64) -> C64 {
    if u.norm() < 0.5 {
        let mut sum = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        for k in 0..60 {
            sum += p / (k + n) as f64;
            p *= u;
        }
        sum
    } else {
        let mut g = -(C64::new(1.0, 0.0) - u).ln() / u;
        for m in 2..=n {
            g = (g - 1.0 / (m - 1) as f64) / u;
        }
        g
    }
}

/// `int` over the tails of `sum_n k_n t^{-n}/(t - z)`; tails `(-inf, -big_a]`, `[b, inf)`.
fn cauchy_tail(tail: &TailFit, big_a: f64, b: f64, z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..TAIL_TERMS {
        let n = k + 1;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += tail.right[k] * tail_kernel(n, z / b) / b.powi(n as i32)
            + tail.left[k] * tail_kernel(n, -z / big_a) * sign / big_a.powi(n as i32);
    }
    acc
}

/// Heights (in grid steps) of the auxiliary lines used near the contour.
const NEAR_STEPS: [f64; 5] = [8.0, 10.0, 12.0, 14.0, 16.0];

/// Cauchy-type integral `(2 pi i)^{-1} int F(t)/(t - z) dt` along a sampled line,
/// with cached Plemelj boundary values.
///
/// The samples are padded by half a grid on each side with the fitted tail
/// model, so the quadrature cut sits far from every node of interest; the
/// remaining tails are added in closed form.
#[derive(Debug)]
pub struct CauchyIntegral {
    grid: LineGrid,
    /// Padded samples on `ext_start + k h`, `k < ext.len()`.
    ext: Vec<C64>,
    ext_start: f64,
    pad: usize,
    weighted: Vec<C64>,
    tail: TailFit,
    boundary: OnceLock<Boundary>,
}

#[derive(Debug)]
struct Boundary {
    nodes: (Vec<C64>, Vec<C64>),
    padded: (Vec<C64>, Vec<C64>),
}

fn lagrange_eval(nodes: &[f64], values: &[C64], x: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (j, (&xj, &vj)) in nodes.iter().zip(values).enumerate() {
        let mut w = 1.0;
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j {
                w *= (x - xk) / (xj - xk);
            }
        }
        acc += vj * w;
    }
    acc
}

impl TailFit {
    /// Model value at `x` (left coefficients for `x < 0`).
    pub fn value(&self, x: f64) -> C64 {
        let c = if x < 0.0 { &self.left } else { &self.right };
        let u = 1.0 / x;
        c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &k| (acc + k) * u)
    }
}

impl CauchyIntegral {
    pub fn new(grid: &LineGrid) -> Self {
        let h = grid.spacing();
        let n = grid.count();
        let pad = n / 2;
        let xs: Vec<f64> = grid.abscissae().collect();
        let tail = TailFit::fit(&xs, grid.samples());
        let ext_start = -grid.half_width() - pad as f64 * h;
        let len = n + 2 * pad;
        let ext: Vec<C64> = (0..len)
            .map(|k| {
                if k >= pad && k < pad + n {
                    grid.samples()[k - pad]
                } else {
                    tail.value(ext_start + k as f64 * h)
                }
            })
            .collect();
        let weighted = ext
            .iter()
            .enumerate()
            .map(|(j, &v)| if j == 0 || j == len - 1 { v * (0.5 * h) } else { v * h })
            .collect();
        CauchyIntegral { grid: grid.clone(), ext, ext_start, pad, weighted, tail, boundary: OnceLock::new() }
    }

    pub fn grid(&self) -> &LineGrid {
        &self.grid
    }

    pub fn tail(&self) -> &TailFit {
        &self.tail
    }

    fn ext_abscissa(&self, k: usize) -> f64 {
        self.ext_start + k as f64 * self.grid.spacing()
    }

    /// `(A, b)` such that the closed-form tails cover `(-inf, -A]` and `[b, inf)`.
    fn ends(&self) -> (f64, f64) {
        (-self.ext_start, self.ext_abscissa(self.ext.len() - 1))
    }

    /// Trapezoid plus tails, in local coordinates `zeta = x + i (Im z - c)`.
    fn direct(&self, zeta: C64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for (j, &w) in self.weighted.iter().enumerate() {
            sum += w / (C64::new(self.ext_abscissa(j), 0.0) - zeta);
        }
        let (big_a, b) = self.ends();
        (sum + cauchy_tail(&self.tail, big_a, b, zeta)) / C64::new(0.0, 2.0 * PI)
    }

    /// Plemelj boundary values `(F+, F-)` at every node.
    pub fn boundary_values(&self) -> &(Vec<C64>, Vec<C64>) {
        &self.boundary.get_or_init(|| self.compute_boundary()).nodes
    }

    fn compute_boundary(&self) -> Boundary {
        let m_len = self.ext.len();
        let h = self.grid.spacing();
        let f = &self.ext;
        // odd-offset rule: PV_m = sum_{k - m odd} 2 F_k / (k - m), as a convolution
        let len = 2 * m_len;
        let mut a = vec![C64::new(0.0, 0.0); len];
        a[..m_len].copy_from_slice(f);
        let mut k = vec![C64::new(0.0, 0.0); len];
        for e in (1..m_len as i64).step_by(2) {
            k[e as usize] = C64::new(-2.0 / e as f64, 0.0);
            k[(len as i64 - e) as usize] = C64::new(2.0 / e as f64, 0.0);
        }
        let pv = circular_convolution(a, k);
        let last = m_len - 1;
        let mut principal: Vec<C64> = (0..m_len)
            .map(|m| {
                if m == 0 || m == last {
                    return C64::new(0.0, 0.0);
                }
                // cells of width 2h around nodes of opposite parity
                let (k0, k1) = if m % 2 == 0 { (1, last) } else { (0, last - 1) };
                let lower = self.ext_abscissa(k0) - h;
                let upper = self.ext_abscissa(k1) + h;
                pv[m] + cauchy_tail(&self.tail, -lower, upper, C64::new(self.ext_abscissa(m), 0.0))
            })
            .collect();
        let extrapolate = |idx: [usize; 4], at: usize, vals: &[C64]| {
            let nodes: Vec<f64> = idx.iter().map(|&i| self.ext_abscissa(i)).collect();
            let v: Vec<C64> = idx.iter().map(|&i| vals[i]).collect();
            lagrange_eval(&nodes, &v, self.ext_abscissa(at))
        };
        principal[0] = extrapolate([1, 2, 3, 4], 0, &principal);
        principal[last] = extrapolate([last - 4, last - 3, last - 2, last - 1], last, &principal);
        let scale = C64::new(0.0, 2.0 * PI);
        let plus: Vec<C64> = (0..m_len).map(|m| f[m] * 0.5 + principal[m] / scale).collect();
        let minus: Vec<C64> = (0..m_len).map(|m| -f[m] * 0.5 + principal[m] / scale).collect();
        let n = self.grid.count();
        let nodes = (plus[self.pad..self.pad + n].to_vec(), minus[self.pad..self.pad + n].to_vec());
        Boundary { nodes, padded: (plus, minus) }
    }

    /// Boundary value at arbitrary `x` (8-point interpolation of node values).
    pub fn boundary_at(&self, x: f64, from_above: bool) -> C64 {
        let b = self.boundary.get_or_init(|| self.compute_boundary());
        let vals = if from_above { &b.padded.0 } else { &b.padded.1 };
        let m_len = self.ext.len();
        let h = self.grid.spacing();
        let pos = (x - self.ext_start) / h;
        let base = (pos.floor() as i64 - 3).clamp(1, m_len as i64 - 9) as usize;
        let nodes: Vec<f64> = (base..base + 8).map(|j| self.ext_abscissa(j)).collect();
        lagrange_eval(&nodes, &vals[base..base + 8], x)
    }

    /// Value at `z` off the line.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let c = self.grid.offset();
        let y = z.im - c;
        if y == 0.0 {
            return Err(Error::OnLine { re: z.re, im: z.im });
        }
        let h = self.grid.spacing();
        let zeta = C64::new(z.re, y);
        let (big_a, b) = self.ends();
        let near_segment = z.re >= -big_a && z.re <= b;
        if y.abs() >= NEAR_STEPS[0] * h || !near_segment {
            return Ok(self.direct(zeta));
        }
        let sign = y.signum();
        let mut nodes = vec![0.0];
        let mut vals = vec![self.boundary_at(z.re, sign > 0.0)];
        for s in NEAR_STEPS {
            nodes.push(sign * s * h);
            vals.push(self.direct(C64::new(z.re, sign * s * h)));
        }
        Ok(lagrange_eval(&nodes, &vals, y))
    }

    /// Values on the line `Im z = c + y` at the grid abscissae.
    pub fn eval_parallel_line(&self, y: f64) -> Vec<C64> {
        let n = self.grid.count();
        let h = self.grid.spacing();
        if y == 0.0 {
            panic!("eval_parallel_line on the contour; use boundary_values");
        }
        if y.abs() >= NEAR_STEPS[0] * h {
            return self.fast_line(y);
        }
        let sign = y.signum();
        let (plus, minus) = self.boundary_values();
        let base = if sign > 0.0 { plus } else { minus };
        let lines: Vec<Vec<C64>> = NEAR_STEPS.iter().map(|s| self.fast_line(sign * s * h)).collect();
        let mut nodes = vec![0.0];
        nodes.extend(NEAR_STEPS.iter().map(|s| sign * s * h));
        (0..n)
            .map(|m| {
                let mut vals = vec![base[m]];
                vals.extend(lines.iter().map(|l| l[m]));
                lagrange_eval(&nodes, &vals, y)
            })
            .collect()
    }

    fn fast_line(&self, y: f64) -> Vec<C64> {
        let n = self.grid.count();
        let m_len = self.ext.len();
        let h = self.grid.spacing();
        let len = 2 * m_len;
        let mut a = vec![C64::new(0.0, 0.0); len];
        a[..m_len].copy_from_slice(&self.weighted);
        // sum_k a_k / ((k - m) h - i y) = sum_k a_k D(m - k), D(e) = 1/(-e h - i y)
        let mut k = vec![C64::new(0.0, 0.0); len];
        for e in -(m_len as i64 - 1)..m_len as i64 {
            k[e.rem_euclid(len as i64) as usize] = C64::new(1.0, 0.0) / C64::new(-(e as f64) * h, -y);
        }
        let conv = circular_convolution(a, k);
        let (big_a, b) = self.ends();
        let scale = C64::new(0.0, 2.0 * PI);
        (0..n)
            .map(|j| {
                let zeta = C64::new(self.grid.abscissa(j), y);
                (conv[self.pad + j] + cauchy_tail(&self.tail, big_a, b, zeta)) / scale
            })
            .collect()
    }
}

fn circular_convolution(mut a: Vec<C64>, mut b: Vec<C64>) -> Vec<C64> {
    let len = a.len();
    let fwd = fft_plan(len, FftDirection::Forward);
    fwd.process(&mut a);
    fwd.process(&mut b);
    let mut c: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    fft_plan(len, FftDirection::Inverse).process(&mut c);
    let inv = 1.0 / len as f64;
    c.iter_mut().for_each(|v| *v *= inv);
    c
}

/// Cauchy-type integral of the line data at `z`, `Im z != offset`.
pub fn cauchy(line: &LineGrid, z: C64) -> Result<C64> {
    CauchyIntegral::new(line).eval(z)
}

/// Plemelj boundary values `(F+(x), F-(x))` with `F+ - F- = F`.
pub fn plemelj_boundary(line: &LineGrid, x: f64) -> Result<(C64, C64)> {
    let r = line.half_width();
    if !(x > -r && x < r) {
        return Err(Error::OutsideGrid(x));
    }
    let ci = CauchyIntegral::new(line);
    Ok((ci.boundary_at(x, true), ci.boundary_at(x, false)))
}
