//! Winding numbers and multiplicative factorization `K = K+ K-`.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{LineGrid, StripClass};
use crate::handle::{Analytic, Convention, ExpOf, HalfPlaneHandle, Scaled, SplitPair};
use crate::split::{split_line, split_strip_with_tolerance, AdditiveSplit, DEFAULT_TOLERANCE};
use crate::transforms::solve_dense;
use crate::C64;

/// Samples smaller than this count as zeros of the kernel.
const VANISHING: f64 = 1e-12;
const MAX_INDEX_RESIDUAL: f64 = 0.05;

/// Winding number of `K` along its line with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexReport {
    pub index: i64,
    pub winding: f64,
    pub residual: f64,
    /// `ln K` extrapolated to `-inf` and `+inf` along the line.
    pub log_limits: (C64, C64),
}

/// `c0 + c1/x + c2/x^2` least squares; returns `c0`.
fn fit_limit(xs: &[f64], vals: &[C64]) -> C64 {
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![C64::new(0.0, 0.0); 3];
    for (&x, &v) in xs.iter().zip(vals) {
        let u = scale / x;
        let row = [1.0, u, u * u];
        for a in 0..3 {
            atb[a] += v * row[a];
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    solve_dense(ata, atb).map(|c| c[0]).unwrap_or_else(|| vals[vals.len() - 1])
}

fn check_nonvanishing(k: &LineGrid) -> Result<()> {
    let (j, min_abs) = k
        .samples()
        .iter()
        .map(|v| if v.is_finite() { v.norm() } else { 0.0 })
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, m)| if m < acc.1 { (j, m) } else { acc });
    if min_abs < VANISHING {
        return Err(Error::KernelVanishes { min_abs, abscissa: k.abscissa(j) });
    }
    Ok(())
}

/// Continuous logarithm by nearest-branch continuation from the principal value at `-R`.
pub fn unwrapped_log(k: &LineGrid) -> Result<Vec<C64>> {
    check_nonvanishing(k)?;
    let s = k.samples();
    let mut out = Vec::with_capacity(s.len());
    let mut acc = s[0].ln();
    out.push(acc);
    for w in s.windows(2) {
        acc += (w[1] / w[0]).ln();
        out.push(acc);
    }
    Ok(out)
}

/// Log-limits at both ends of the line, from the outer tenth of `ln K`.
fn log_limits(k: &LineGrid, log: &[C64]) -> (C64, C64) {
    let n = log.len();
    let m = (n / 10).max(4);
    let xs: Vec<f64> = k.abscissae().collect();
    (fit_limit(&xs[..m], &log[..m]), fit_limit(&xs[n - m..], &log[n - m..]))
}

pub fn index_report(k: &LineGrid) -> Result<IndexReport> {
    let log = unwrapped_log(k)?;
    let (left, right) = log_limits(k, &log);
    let winding = (right.im - left.im) / (2.0 * PI);
    let index = winding.round();
    let residual = (winding - index).abs();
    let n = k.count();
    let (ka, kb) = (k.samples()[0], k.samples()[n - 1]);
    if (ka - kb).norm() > 0.1 * kb.norm() {
        warn!("kernel limits differ at the grid ends: K(-R) = {ka}, K(R) = {kb}");
    }
    if residual > MAX_INDEX_RESIDUAL {
        return Err(Error::NonIntegralIndex { winding, residual });
    }
    Ok(IndexReport { index: index as i64, winding, residual, log_limits: (left, right) })
}

/// Winding number of `K` along its line.
pub fn index(k: &LineGrid) -> Result<i64> {
    index_report(k).map(|r| r.index)
}

/// `r(z) = (z - i(c+1)) / (z - i(c-1))`: index one on the line `Im z = c`,
/// equal to `(t - i)/(t + i)` on the real axis.
fn index_one(z: C64, c: f64) -> C64 {
    (z - C64::new(0.0, c + 1.0)) / (z - C64::new(0.0, c - 1.0))
}

/// `K r^{-kappa}`, which has index zero when `kappa = index(K)`.
pub fn normalize_index(k: &LineGrid, kappa: i64) -> LineGrid {
    if kappa == 0 {
        return k.clone();
    }
    let c = k.offset();
    k.map_with_point(|z, v| v * index_one(z, c).powi(-kappa as i32))
}

/// Multiplicative factorization `K = plus * minus`.
#[derive(Debug, Clone)]
pub struct FactorPair {
    pub plus: HalfPlaneHandle,
    pub minus: HalfPlaneHandle,
    /// Constant multiplying `exp(plus part of ln K)` so that `plus -> 1` at `i 10 R`.
    pub normalization: C64,
    pub index_removed: i64,
    /// Additive split of `ln K0` behind the factors.
    pub log_split: AdditiveSplit,
}

impl FactorPair {
    pub fn pair(&self) -> SplitPair {
        SplitPair { plus: self.plus.clone(), minus: self.minus.clone(), convention: Convention::Multiplicative }
    }

    /// Factor values on the line of `k`, which must lie in the common strip.
    /// On the side of a factor's source line that it cannot reach by a Cauchy
    /// integral, that factor is taken as `K` divided by the other one.
    pub fn values_on(&self, k: &LineGrid) -> Result<(Vec<C64>, Vec<C64>)> {
        let (c, r, n) = (k.offset(), k.half_width(), k.count());
        let plus_native = c >= self.plus.source_line();
        let minus_native = c <= self.minus.source_line();
        let div = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x / y).collect::<Vec<_>>();
        match (plus_native, minus_native) {
            (true, true) => Ok((
                self.plus.eval_on_line(c, r, n)?.into_samples(),
                self.minus.eval_on_line(c, r, n)?.into_samples(),
            )),
            (true, false) => {
                let p = self.plus.eval_on_line(c, r, n)?.into_samples();
                Ok((p.clone(), div(k.samples(), &p)))
            }
            _ => {
                let m = self.minus.eval_on_line(c, r, n)?.into_samples();
                Ok((div(k.samples(), &m), m))
            }
        }
    }

    /// `sup |plus minus / K - 1|` on the line of `k`.
    pub fn reconstruction_error(&self, k: &LineGrid) -> Result<f64> {
        let p = self.plus.eval_on_line(k.offset(), k.half_width(), k.count())?;
        let m = self.minus.eval_on_line(k.offset(), k.half_width(), k.count())?;
        Ok(p.samples()
            .iter()
            .zip(m.samples())
            .zip(k.samples())
            .map(|((a, b), kv)| {
                let e = (a * b / kv - 1.0).norm();
                if e.is_finite() {
                    e
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max))
    }

    /// Smallest `|plus|` and `|minus|` on `samples x samples` points of a
    /// box of half side `width` on each factor's side of its source line.
    pub fn zero_free_certificate(&self, width: f64, samples: usize) -> Result<(f64, f64)> {
        let box_min = |handle: &HalfPlaneHandle, dir: f64| -> Result<f64> {
            let points: Vec<C64> = (1..=samples)
                .flat_map(|k| {
                    let y = handle.source_line() + dir * width * k as f64 / samples as f64;
                    (0..samples).map(move |j| C64::new(-width + 2.0 * width * j as f64 / (samples - 1).max(1) as f64, y))
                })
                .collect();
            let values = points.par_iter().map(|&z| handle.eval(z)).collect::<Result<Vec<_>>>()?;
            Ok(values.iter().map(|v| if v.is_finite() { v.norm() } else { 0.0 }).fold(f64::INFINITY, f64::min))
        };
        Ok((box_min(&self.plus, 1.0)?, box_min(&self.minus, -1.0)?))
    }
}

fn exp_pair(log_split: AdditiveSplit, log_constant: C64, top: C64) -> Result<FactorPair> {
    let plus_log = log_split.plus.func().clone();
    let minus_log = log_split.minus.func().clone();
    let normalization = (-plus_log.eval(top)?).exp();
    let plus_fn: Arc<dyn Analytic> = Arc::new(ExpOf { inner: plus_log, scale: normalization });
    let minus_fn: Arc<dyn Analytic> = Arc::new(ExpOf { inner: minus_log, scale: log_constant.exp() / normalization });
    Ok(FactorPair {
        plus: log_split.plus.with_func(plus_fn),
        minus: log_split.minus.with_func(minus_fn),
        normalization,
        index_removed: 0,
        log_split,
    })
}

/// Decaying part of `ln K` and its common limit.
fn decaying_log(k: &LineGrid) -> Result<(LineGrid, C64)> {
    let report = index_report(k)?;
    if report.index != 0 {
        return Err(Error::NonZeroIndex(report.index));
    }
    let log = unwrapped_log(k)?;
    let (left, right) = report.log_limits;
    if (left - right).norm() > 1e-3 {
        warn!("ln K tends to different limits at the two ends: {left} and {right}");
    }
    let limit = left;
    let shifted = log.into_iter().map(|v| v - limit).collect();
    Ok((k.with_samples(shifted)?, limit))
}

fn top_point(k: &LineGrid) -> C64 {
    C64::new(0.0, k.offset() + 10.0 * k.half_width())
}

/// Factorization of an index-zero kernel from its samples on one line.
pub fn factor_line(k: &LineGrid) -> Result<FactorPair> {
    let (log, limit) = decaying_log(k)?;
    exp_pair(split_line(&log), limit, top_point(k))
}

/// Factorization after removing the index with `r(z)^kappa`: the factor
/// `(z - i(c-1))^{-kappa}` joins plus and `(z - i(c+1))^{kappa}` joins minus.
pub fn factor_with_index(k: &LineGrid) -> Result<FactorPair> {
    let kappa = index(k)?;
    let base = factor_line(&normalize_index(k, kappa))?;
    if kappa == 0 {
        return Ok(base);
    }
    let c = k.offset();
    let power = i32::try_from(kappa).map_err(|_| Error::NonZeroIndex(kappa))?;
    let plus_fn: Arc<dyn Analytic> = Arc::new(Scaled {
        inner: base.plus.func().clone(),
        factor: C64::new(1.0, 0.0),
        root: C64::new(0.0, c - 1.0),
        power: -power,
    });
    let minus_fn: Arc<dyn Analytic> = Arc::new(Scaled {
        inner: base.minus.func().clone(),
        factor: C64::new(1.0, 0.0),
        root: C64::new(0.0, c + 1.0),
        power,
    });
    let mut plus = base.plus.with_func(plus_fn);
    let mut minus = base.minus.with_func(minus_fn);
    if kappa > 0 {
        plus = plus.with_boundary(plus.boundary_offset().max(c - 1.0));
    } else {
        minus = minus.with_boundary(minus.boundary_offset().min(c + 1.0));
    }
    Ok(FactorPair { plus, minus, index_removed: kappa, ..base })
}

/// Factorization on a strip from samples on two interior lines.
pub fn factor_strip(on_a: &LineGrid, on_b: &LineGrid, strip: StripClass) -> Result<FactorPair> {
    let ia = index(on_a)?;
    let ib = index(on_b)?;
    if ia != ib {
        return Err(Error::IndexMismatch { lower_index: ia, upper_index: ib });
    }
    if ia != 0 {
        return Err(Error::NonZeroIndex(ia));
    }
    let (log_a, limit) = decaying_log(on_a)?;
    let (log_b, limit_b) = decaying_log(on_b)?;
    // both lines must carry the same branch of ln K
    let turns = ((limit - limit_b).im / (2.0 * PI)).round();
    let shift = limit_b - limit + C64::new(0.0, 2.0 * PI * turns);
    let log_b = log_b.map(|v| v + shift);
    let split = split_strip_with_tolerance(&log_a, &log_b, strip, DEFAULT_TOLERANCE)?;
    exp_pair(split, limit, top_point(on_b))
}

/// Constant `c` with `a.plus = c b.plus` and `a.minus = b.minus / c` on the
/// samples `probe` of the kernel.
pub fn uniqueness_constant(a: &FactorPair, b: &FactorPair, probe: &LineGrid) -> Result<C64> {
    let (ap, am) = a.values_on(probe)?;
    let (bp, bm) = b.values_on(probe)?;
    let (c, cv) = ratio_stats(&ap, &bp);
    if !(cv <= 1e-6) {
        return Err(Error::Inequivalent { cv });
    }
    let (d, cv_minus) = ratio_stats(&am, &bm);
    if !(cv_minus <= 1e-6) || !((c * d - 1.0).norm() <= 1e-6) {
        return Err(Error::Inequivalent { cv: cv_minus.max((c * d - 1.0).norm()) });
    }
    Ok(c)
}

/// Mean and coefficient of variation of `a / b`.
pub fn ratio_stats(a: &[C64], b: &[C64]) -> (C64, f64) {
    let ratios: Vec<C64> = a.iter().zip(b).map(|(x, y)| x / y).collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<C64>() / n;
    let var = ratios.iter().map(|r| (r - mean).norm_sqr()).sum::<f64>() / n;
    (mean, var.sqrt() / mean.norm())
}

/// Line independence: factor the samples on `other` afresh and return
/// `sup |ratio / mean - 1|` of the two plus factors there.
pub fn cross_line_check(pair: &FactorPair, other: &LineGrid) -> Result<f64> {
    let fresh = factor_with_index(other)?;
    let (p, _) = pair.values_on(other)?;
    let (q, _) = fresh.values_on(other)?;
    let (mean, _) = ratio_stats(&p, &q);
    Ok(p.iter()
        .zip(&q)
        .map(|(x, y)| {
            let e = (x / y / mean - 1.0).norm();
            if e.is_finite() {
                e
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max))
}

/// `c + G0(z) + sum_k Gk(1/(z - z_k))` with polynomials `G` without constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalPartSpec {
    pub constant: C64,
    /// `c0_1 .. c0_m`: coefficients of `z, z^2, ..`.
    pub polynomial: Vec<C64>,
    /// `(z_k, [ck_1 .. ck_m])`: coefficients of `w, w^2, ..` with `w = 1/(z - z_k)`.
    pub poles: Vec<(C64, Vec<C64>)>,
}

/// Rational function assembled from principal parts.
#[derive(Debug, Clone)]
pub struct Rational {
    spec: PrincipalPartSpec,
}

fn poly_no_constant(coeffs: &[C64], w: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| (acc + c) * w)
}

pub fn rational_from_principal_parts(spec: PrincipalPartSpec) -> Result<Rational> {
    let finite = |v: &C64| v.is_finite();
    let all_finite = finite(&spec.constant)
        && spec.polynomial.iter().all(finite)
        && spec.poles.iter().all(|(z, cs)| finite(z) && cs.iter().all(finite));
    if !all_finite {
        return Err(Error::Format("principal-part coefficients must be finite".into()));
    }
    for (i, (zi, _)) in spec.poles.iter().enumerate() {
        if spec.poles[..i].iter().any(|(zj, _)| zj == zi) {
            return Err(Error::Format(format!("pole {zi} listed twice")));
        }
    }
    Ok(Rational { spec })
}

impl Analytic for Rational {
    fn eval(&self, z: C64) -> Result<C64> {
        let mut acc = self.spec.constant + poly_no_constant(&self.spec.polynomial, z);
        for (zk, coeffs) in &self.spec.poles {
            if z == *zk {
                return Err(Error::AtPole { re: z.re, im: z.im });
            }
            acc += poly_no_constant(coeffs, C64::new(1.0, 0.0) / (z - zk));
        }
        Ok(acc)
    }
}
