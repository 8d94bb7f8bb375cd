//! Half-plane analytic function handles.
//!
//! A handle couples an evaluator with the half-plane on which it is defined.
//! Evaluators are built from sampled line data: on their own side of the
//! source line they are Cauchy-type integrals, on the line they are Plemelj
//! boundary values, and in the thin margin across the line (where the
//! function is still analytic) they are half-line Fourier integrals of the
//! exponentially decaying time samples.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{estimate_strip, ExtendedReal, LineGrid};
use crate::quad::segment_integral;
use crate::transforms::{half_line_samples, inv_sqrt_2pi, CauchyIntegral, TimeGrid};
use crate::C64;

/// Which half-plane a handle lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Analytic above `Im z = boundary_offset`.
    AbovePlus,
    /// Analytic below `Im z = boundary_offset`.
    BelowMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Additive,
    Multiplicative,
}

/// A function that can be evaluated at points of the complex plane.
pub trait Analytic: Send + Sync + fmt::Debug {
    fn eval(&self, z: C64) -> Result<C64>;

    /// Values at `x_j + i offset` for the abscissae of a line grid.
    fn eval_on_line(&self, offset: f64, half_width: f64, count: usize) -> Result<Vec<C64>> {
        let h = 2.0 * half_width / count as f64;
        (0..count)
            .into_par_iter()
            .map(|j| self.eval(C64::new(-half_width + j as f64 * h, offset)))
            .collect()
    }
}

/// Upper cap on fitted decay rates used as analyticity margins.
const MAX_MARGIN_RATE: f64 = 100.0;

/// One half of the additive split of sampled line data.
///
/// `plus` is the image of `f 1_{t>0}`, `minus` of `f 1_{t<0}`, so that
/// `plus + minus = F` on the source line.
pub struct CauchyPart {
    integral: Arc<CauchyIntegral>,
    side: Side,
    time: TimeGrid,
    /// Number of time steps away from `t = 0` carried by the margin route.
    reach: usize,
}

impl fmt::Debug for CauchyPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyPart")
            .field("side", &self.side)
            .field("line", &self.integral.grid().offset())
            .field("reach", &self.reach)
            .finish()
    }
}

impl CauchyPart {
    pub fn new(integral: Arc<CauchyIntegral>, side: Side) -> Self {
        let time = half_line_samples(integral.grid(), side == Side::AbovePlus);
        let reach = significant_reach(&time, side);
        CauchyPart { integral, side, time, reach }
    }

    pub fn integral(&self) -> &Arc<CauchyIntegral> {
        &self.integral
    }

    /// Half-line time samples `(t, e^{-ct} f(t))` with `t >= 0` (plus) or `t <= 0` (minus).
    pub fn time_samples(&self) -> Vec<(f64, C64)> {
        let c = self.time.center();
        let range = match self.side {
            Side::AbovePlus => c..self.time.count(),
            Side::BelowMinus => 0..c + 1,
        };
        range.map(|j| (self.time.abscissa(j), self.time.samples()[j])).collect()
    }

    fn sign(&self) -> f64 {
        match self.side {
            Side::AbovePlus => 1.0,
            Side::BelowMinus => -1.0,
        }
    }

    /// Half-line Fourier integral in local coordinates `omega = z - ic`.
    fn margin_route(&self, omega: C64) -> C64 {
        let h = self.time.spacing();
        let c = self.time.center();
        let s = self.time.samples();
        let v = match self.side {
            Side::AbovePlus => segment_integral(&s[c..=c + self.reach], 0.0, h, omega),
            Side::BelowMinus => segment_integral(&s[c - self.reach..=c], -(self.reach as f64) * h, h, omega),
        };
        v * inv_sqrt_2pi()
    }
}

/// Last offset from `t = 0` where the half-line samples stand above the noise floor.
fn significant_reach(time: &TimeGrid, side: Side) -> usize {
    let c = time.center();
    let s = time.samples();
    let half: Vec<f64> = match side {
        Side::AbovePlus => s[c..].iter().map(|v| v.norm()).collect(),
        Side::BelowMinus => s[..=c].iter().rev().map(|v| v.norm()).collect(),
    };
    let peak = half.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 1.min(half.len() - 1);
    }
    let mut outer: Vec<f64> = half[half.len() * 3 / 4..].to_vec();
    outer.sort_by(f64::total_cmp);
    let noise = outer[outer.len() / 2];
    let floor = (10.0 * noise).max(3e-15 * peak);
    let last = half.iter().rposition(|&v| v > floor).unwrap_or(0);
    (last + 8).clamp(1, half.len() - 1)
}

impl Analytic for CauchyPart {
    fn eval(&self, z: C64) -> Result<C64> {
        let line = self.integral.grid().offset();
        let y = z.im - line;
        let above = self.side == Side::AbovePlus;
        if y == 0.0 {
            let r = self.integral.grid().half_width();
            if z.re.abs() >= r {
                return Ok(self.margin_route(C64::new(z.re, 0.0)));
            }
            return Ok(self.integral.boundary_at(z.re, above) * self.sign());
        }
        if (y > 0.0) == above {
            Ok(self.integral.eval(z)? * self.sign())
        } else {
            Ok(self.margin_route(C64::new(z.re, y)))
        }
    }

    fn eval_on_line(&self, offset: f64, half_width: f64, count: usize) -> Result<Vec<C64>> {
        let grid = self.integral.grid();
        let line = grid.offset();
        let same_nodes = half_width == grid.half_width() && count == grid.count();
        let y = offset - line;
        let own_side = (y > 0.0) == (self.side == Side::AbovePlus);
        if same_nodes && y == 0.0 {
            let (plus, minus) = self.integral.boundary_values();
            return Ok(match self.side {
                Side::AbovePlus => plus.clone(),
                Side::BelowMinus => minus.iter().map(|v| -v).collect(),
            });
        }
        if same_nodes && own_side {
            return Ok(self.integral.eval_parallel_line(y).into_iter().map(|v| v * self.sign()).collect());
        }
        let h = 2.0 * half_width / count as f64;
        (0..count)
            .into_par_iter()
            .map(|j| self.eval(C64::new(-half_width + j as f64 * h, offset)))
            .collect()
    }
}

/// `scale * exp(inner(z))`.
#[derive(Debug)]
pub struct ExpOf {
    pub inner: Arc<dyn Analytic>,
    pub scale: C64,
}

impl Analytic for ExpOf {
    fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.inner.eval(z)?.exp() * self.scale)
    }

    fn eval_on_line(&self, offset: f64, half_width: f64, count: usize) -> Result<Vec<C64>> {
        Ok(self.inner.eval_on_line(offset, half_width, count)?.into_iter().map(|v| v.exp() * self.scale).collect())
    }
}

/// `factor * inner(z) * (z - root)^power`.
#[derive(Debug)]
pub struct Scaled {
    pub inner: Arc<dyn Analytic>,
    pub factor: C64,
    pub root: C64,
    pub power: i32,
}

impl Scaled {
    pub fn constant(inner: Arc<dyn Analytic>, factor: C64) -> Self {
        Scaled { inner, factor, root: C64::new(0.0, 0.0), power: 0 }
    }

    fn weight(&self, z: C64) -> Result<C64> {
        if self.power == 0 {
            return Ok(self.factor);
        }
        let d = z - self.root;
        if d == C64::new(0.0, 0.0) && self.power < 0 {
            return Err(Error::AtPole { re: z.re, im: z.im });
        }
        Ok(self.factor * d.powi(self.power))
    }
}

impl Analytic for Scaled {
    fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.inner.eval(z)? * self.weight(z)?)
    }

    fn eval_on_line(&self, offset: f64, half_width: f64, count: usize) -> Result<Vec<C64>> {
        let values = self.inner.eval_on_line(offset, half_width, count)?;
        let h = 2.0 * half_width / count as f64;
        values
            .into_iter()
            .enumerate()
            .map(|(j, v)| Ok(v * self.weight(C64::new(-half_width + j as f64 * h, offset))?))
            .collect()
    }
}

/// Pointwise combination of several functions.
pub struct Combined {
    pub parts: Vec<Arc<dyn Analytic>>,
    pub op: Box<dyn Fn(&[C64]) -> C64 + Send + Sync>,
    pub label: &'static str,
}

impl fmt::Debug for Combined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Combined").field("label", &self.label).field("parts", &self.parts).finish()
    }
}

impl Analytic for Combined {
    fn eval(&self, z: C64) -> Result<C64> {
        let vals = self.parts.iter().map(|p| p.eval(z)).collect::<Result<Vec<_>>>()?;
        Ok((self.op)(&vals))
    }

    fn eval_on_line(&self, offset: f64, half_width: f64, count: usize) -> Result<Vec<C64>> {
        let columns = self
            .parts
            .iter()
            .map(|p| p.eval_on_line(offset, half_width, count))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..count)
            .map(|j| {
                let vals: Vec<C64> = columns.iter().map(|c| c[j]).collect();
                (self.op)(&vals)
            })
            .collect())
    }
}

/// The identically zero function.
#[derive(Debug, Clone, Copy)]
pub struct Zero;

impl Analytic for Zero {
    fn eval(&self, _z: C64) -> Result<C64> {
        Ok(C64::new(0.0, 0.0))
    }
}

/// A function analytic in a half-plane, with the samples that define it.
#[derive(Debug, Clone)]
pub struct HalfPlaneHandle {
    side: Side,
    boundary_offset: f64,
    /// Line whose samples produced the handle; always inside the domain.
    source_line: f64,
    func: Arc<dyn Analytic>,
    time_samples: Arc<Vec<(f64, C64)>>,
}

impl HalfPlaneHandle {
    pub fn new(side: Side, boundary_offset: f64, source_line: f64, func: Arc<dyn Analytic>, time_samples: Vec<(f64, C64)>) -> Self {
        HalfPlaneHandle { side, boundary_offset, source_line, func, time_samples: Arc::new(time_samples) }
    }

    /// Additive part of the data on `integral`'s line, with its analyticity
    /// margin taken from the fitted decay of the time samples.
    pub fn from_cauchy(integral: Arc<CauchyIntegral>, side: Side) -> Self {
        let line = integral.grid().offset();
        let est = estimate_strip(integral.grid());
        let rate = |e: ExtendedReal, sign: f64| match e {
            ExtendedReal::Finite(v) => (sign * (line - v)).clamp(0.0, MAX_MARGIN_RATE),
            _ => MAX_MARGIN_RATE,
        };
        let boundary = match side {
            Side::AbovePlus => line - 0.9 * rate(est.strip.lower(), 1.0),
            Side::BelowMinus => line + 0.9 * rate(est.strip.upper(), -1.0),
        };
        let part = CauchyPart::new(integral, side);
        let samples = part.time_samples();
        HalfPlaneHandle::new(side, boundary, line, Arc::new(part), samples)
    }

    /// Same function and samples, restricted or widened to a new boundary.
    pub fn with_boundary(&self, boundary_offset: f64) -> Self {
        HalfPlaneHandle { boundary_offset, ..self.clone() }
    }

    /// Same domain, different evaluator.
    pub fn with_func(&self, func: Arc<dyn Analytic>) -> Self {
        HalfPlaneHandle { func, ..self.clone() }
    }

    pub fn zero(side: Side, boundary_offset: f64, source_line: f64) -> Self {
        HalfPlaneHandle::new(side, boundary_offset, source_line, Arc::new(Zero), Vec::new())
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn boundary_offset(&self) -> f64 {
        self.boundary_offset
    }

    pub fn source_line(&self) -> f64 {
        self.source_line
    }

    pub fn func(&self) -> &Arc<dyn Analytic> {
        &self.func
    }

    pub fn time_samples(&self) -> &[(f64, C64)] {
        &self.time_samples
    }

    /// Whether `Im z = y` lies in the handle's domain.
    pub fn contains_height(&self, y: f64) -> bool {
        match self.side {
            Side::AbovePlus => y > self.boundary_offset || y >= self.source_line,
            Side::BelowMinus => y < self.boundary_offset || y <= self.source_line,
        }
    }

    fn check(&self, z: C64) -> Result<()> {
        if self.contains_height(z.im) && z.re.is_finite() && z.im.is_finite() {
            Ok(())
        } else {
            Err(Error::OutsideHalfPlane { re: z.re, im: z.im, boundary: self.boundary_offset })
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        self.check(z)?;
        self.func.eval(z)
    }

    pub fn eval_on_line(&self, offset: f64, half_width: f64, count: usize) -> Result<LineGrid> {
        self.check(C64::new(0.0, offset))?;
        LineGrid::new(offset, half_width, self.func.eval_on_line(offset, half_width, count)?)
    }

    /// Relative `|.|^2` mass of the inverse transform of the handle's values on
    /// a line that falls on the wrong half-line (`t < 0` for plus). A function
    /// analytic and decaying in the handle's half-plane has none.
    pub fn paley_wiener_mass(&self, offset: f64, half_width: f64, count: usize) -> Result<f64> {
        let line = self.eval_on_line(offset, half_width, count)?;
        let g = crate::transforms::inverse_fourier(&line);
        Ok(g.mass_fraction(self.side == Side::AbovePlus))
    }
}

/// Two handles forming an additive or multiplicative decomposition.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub plus: HalfPlaneHandle,
    pub minus: HalfPlaneHandle,
    pub convention: Convention,
}

impl SplitPair {
    /// `plus + minus` or `plus * minus` on a line in both domains.
    pub fn reconstruct(&self, offset: f64, half_width: f64, count: usize) -> Result<LineGrid> {
        let p = self.plus.eval_on_line(offset, half_width, count)?;
        let m = self.minus.eval_on_line(offset, half_width, count)?;
        let combined = p
            .samples()
            .iter()
            .zip(m.samples())
            .map(|(a, b)| match self.convention {
                Convention::Additive => a + b,
                Convention::Multiplicative => a * b,
            })
            .collect();
        p.with_samples(combined)
    }
}

/// Sup-norm distance between two sample vectors; non-finite entries count as infinite.
pub(crate) fn sup_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).norm();
            if d.is_finite() {
                d
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz() -> Arc<CauchyIntegral> {
        let g = LineGrid::from_fn(0.0, 200.0, 1 << 16, |z| C64::new(1.0, 0.0) / (z * z + 1.0)).unwrap();
        Arc::new(CauchyIntegral::new(&g))
    }

    fn exact_plus(z: C64) -> C64 {
        C64::new(0.0, 1.0) / ((z + C64::new(0.0, 1.0)) * 2.0)
    }

    #[test]
    fn plus_handle_in_all_regimes() {
        let plus = HalfPlaneHandle::from_cauchy(lorentz(), Side::AbovePlus);
        assert!(plus.boundary_offset() < -0.8 && plus.boundary_offset() > -1.0, "{}", plus.boundary_offset());
        for &z in &[C64::new(0.0, 0.0), C64::new(1.3, 0.0), C64::new(0.2, 2.0), C64::new(-0.5, -0.3), C64::new(3.0, -0.35)] {
            let got = plus.eval(z).unwrap();
            assert!((got - exact_plus(z)).norm() < 1e-7 * exact_plus(z).norm().max(1.0), "{z}: {got} vs {}", exact_plus(z));
        }
        assert!(matches!(plus.eval(C64::new(0.0, -0.95)), Err(Error::OutsideHalfPlane { .. })));
    }

    #[test]
    fn minus_handle_sums_to_data() {
        let ci = lorentz();
        let plus = HalfPlaneHandle::from_cauchy(ci.clone(), Side::AbovePlus);
        let minus = HalfPlaneHandle::from_cauchy(ci, Side::BelowMinus);
        for &x in &[0.0, 0.7, -4.0] {
            let z = C64::new(x, 0.0);
            let sum = plus.eval(z).unwrap() + minus.eval(z).unwrap();
            assert!((sum - 1.0 / (x * x + 1.0)).norm() < 1e-8);
        }
        let z = C64::new(0.4, 0.3);
        let expect = C64::new(0.0, -1.0) / ((z - C64::new(0.0, 1.0)) * 2.0);
        assert!((minus.eval(z).unwrap() - expect).norm() < 1e-7);
    }

    #[test]
    fn line_evaluation_matches_pointwise() {
        let plus = HalfPlaneHandle::from_cauchy(lorentz(), Side::AbovePlus);
        let line = plus.eval_on_line(0.0, 200.0, 1 << 16).unwrap();
        for j in (1000..64000).step_by(7919) {
            let z = C64::new(line.abscissa(j), 0.0);
            assert!((line.samples()[j] - exact_plus(z)).norm() < 1e-8);
        }
    }

    #[test]
    fn paley_wiener_mass_is_small() {
        let ci = lorentz();
        let plus = HalfPlaneHandle::from_cauchy(ci.clone(), Side::AbovePlus);
        let minus = HalfPlaneHandle::from_cauchy(ci, Side::BelowMinus);
        let mp = plus.paley_wiener_mass(0.0, 200.0, 1 << 16).unwrap();
        let mm = minus.paley_wiener_mass(0.0, 200.0, 1 << 16).unwrap();
        assert!(mp < 1e-8 && mm < 1e-8, "{mp:e} {mm:e}");
    }

    #[test]
    fn scaled_and_exp_combinators() {
        let base: Arc<dyn Analytic> = Arc::new(Zero);
        let e = ExpOf { inner: base.clone(), scale: C64::new(2.0, 0.0) };
        assert_eq!(e.eval(C64::new(1.0, 1.0)).unwrap(), C64::new(2.0, 0.0));
        let s = Scaled { inner: Arc::new(e), factor: C64::new(1.0, 0.0), root: C64::new(0.0, 1.0), power: -1 };
        assert!(matches!(s.eval(C64::new(0.0, 1.0)), Err(Error::AtPole { .. })));
        let v = s.eval(C64::new(0.0, 0.0)).unwrap();
        assert!((v - C64::new(0.0, 2.0)).norm() < 1e-15);
    }
}
