//! Additive splitting `F = plus + minus` on a line and on a strip.

use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::grid::{ExtendedReal, LineGrid, StripClass};
use crate::handle::{sup_distance, Convention, HalfPlaneHandle, Side, SplitPair};
use crate::transforms::CauchyIntegral;
use crate::C64;

/// Default sup-norm tolerance for strip certification.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// `plus` analytic above, `minus` below; `plus + minus = F` on `source_line`.
#[derive(Debug, Clone)]
pub struct AdditiveSplit {
    pub plus: HalfPlaneHandle,
    pub minus: HalfPlaneHandle,
    pub source_line: f64,
}

impl AdditiveSplit {
    pub fn pair(&self) -> SplitPair {
        SplitPair { plus: self.plus.clone(), minus: self.minus.clone(), convention: Convention::Additive }
    }

    /// `plus + minus` at the abscissae of a line grid.
    pub fn reconstruct(&self, offset: f64, half_width: f64, count: usize) -> Result<LineGrid> {
        self.pair().reconstruct(offset, half_width, count)
    }
}

fn warn_if_not_decaying(f: &LineGrid) {
    let n = f.count();
    let peak = f.max_abs();
    let ends = f.samples()[0].norm().max(f.samples()[n - 1].norm());
    if peak > 0.0 && ends > 5e-2 * peak {
        warn!("samples do not decay at the grid ends (|F| at ends = {ends:.3e}, max = {peak:.3e})");
    }
}

/// Split of the data on a single line.
pub fn split_line(f: &LineGrid) -> AdditiveSplit {
    warn_if_not_decaying(f);
    let integral = Arc::new(CauchyIntegral::new(f));
    AdditiveSplit {
        plus: HalfPlaneHandle::from_cauchy(integral.clone(), Side::AbovePlus),
        minus: HalfPlaneHandle::from_cauchy(integral, Side::BelowMinus),
        source_line: f.offset(),
    }
}

/// Split on a strip `a < Im z < b` from samples on two interior lines.
///
/// `plus` is the Cauchy integral over the lower line and `minus` minus the
/// Cauchy integral over the upper line; their sum reproduces the data
/// everywhere in between. Both lines are checked against the reconstruction.
pub fn split_strip(on_a: &LineGrid, on_b: &LineGrid, strip: StripClass) -> Result<AdditiveSplit> {
    split_strip_with_tolerance(on_a, on_b, strip, DEFAULT_TOLERANCE)
}

pub fn split_strip_with_tolerance(on_a: &LineGrid, on_b: &LineGrid, strip: StripClass, tolerance: f64) -> Result<AdditiveSplit> {
    let (lower, upper) = finite_bounds(strip)?;
    let (a, b) = (on_a.offset(), on_b.offset());
    if !(lower < a && a < b && b < upper) {
        return Err(Error::InvalidStrip {
            lower: format!("lines {a} and {b}"),
            upper: format!("must lie inside ({lower}, {upper}) in increasing order"),
        });
    }
    warn_if_not_decaying(on_a);
    warn_if_not_decaying(on_b);
    let plus = HalfPlaneHandle::from_cauchy(Arc::new(CauchyIntegral::new(on_a)), Side::AbovePlus).with_boundary(lower);
    let minus = HalfPlaneHandle::from_cauchy(Arc::new(CauchyIntegral::new(on_b)), Side::BelowMinus).with_boundary(upper);
    let split = AdditiveSplit { plus, minus, source_line: a };
    let discrepancy = cross_line_check(&split, on_a)?.max(cross_line_check(&split, on_b)?);
    if discrepancy.is_nan() || discrepancy > tolerance {
        return Err(Error::CrossLine { discrepancy, tolerance });
    }
    Ok(split)
}

pub(crate) fn finite_bounds(strip: StripClass) -> Result<(f64, f64)> {
    match (strip.lower(), strip.upper()) {
        (ExtendedReal::Finite(l), ExtendedReal::Finite(u)) => Ok((l, u)),
        (l, u) => Err(Error::InvalidStrip { lower: l.to_string(), upper: format!("{u} (strip bounds must be finite)") }),
    }
}

/// Sup-norm discrepancy between `plus + minus` and the samples of `other_line`.
pub fn cross_line_check(split: &AdditiveSplit, other_line: &LineGrid) -> Result<f64> {
    let recon = split.reconstruct(other_line.offset(), other_line.half_width(), other_line.count())?;
    Ok(sup_distance(recon.samples(), other_line.samples()))
}

/// `plus - minus` convention helpers: the Plemelj pair of `F` relates to the
/// split by `F+ = plus` and `F- = -minus` on the line.
pub fn plemelj_pair(split: &AdditiveSplit, x: f64) -> Result<(C64, C64)> {
    let z = C64::new(x, split.source_line);
    Ok((split.plus.eval(z)?, -split.minus.eval(z)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pole(z: C64) -> C64 {
        C64::new(1.0, 0.0) / ((z - C64::new(0.0, 2.0)) * (z + C64::new(0.0, 1.0)))
    }

    fn line(f: impl Fn(C64) -> C64, offset: f64) -> LineGrid {
        LineGrid::from_fn(offset, 200.0, 1 << 16, f).unwrap()
    }

    #[test]
    fn lorentzian_split_at_origin() {
        let s = split_line(&line(|z| C64::new(1.0, 0.0) / (z * z + 1.0), 0.0));
        let p = s.plus.eval(C64::new(0.0, 0.0)).unwrap();
        let m = s.minus.eval(C64::new(0.0, 0.0)).unwrap();
        assert!((p - 0.5).norm() < 1e-8 && (m - 0.5).norm() < 1e-8, "{p} {m}");
    }

    #[test]
    fn zero_splits_to_zero() {
        let s = split_line(&LineGrid::new(0.0, 10.0, vec![C64::new(0.0, 0.0); 256]).unwrap());
        for &z in &[C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(-1.0, -2.0)] {
            if s.plus.contains_height(z.im) {
                assert_eq!(s.plus.eval(z).unwrap(), C64::new(0.0, 0.0));
            }
            if s.minus.contains_height(z.im) {
                assert_eq!(s.minus.eval(z).unwrap(), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn parts_stay_bounded_near_opposite_poles() {
        let s = split_line(&line(two_pole, 0.0));
        // plus has its pole at -i, so it is bounded near 2i; minus the reverse
        let third = C64::new(0.0, 1.0 / 3.0);
        for eps in [1e-2, 1e-3] {
            let zp = C64::new(eps, 2.0);
            let v = s.plus.eval(zp).unwrap();
            let expect = third / (zp + C64::new(0.0, 1.0));
            assert!((v - expect).norm() < 1e-7, "{v} vs {expect}");
            let zm = C64::new(eps, -1.0);
            if s.minus.contains_height(zm.im) {
                let v = s.minus.eval(zm).unwrap();
                let expect = -third / (zm - C64::new(0.0, 2.0));
                assert!(v.norm() < 10.0 && (v - expect).norm() < 1e-4, "{v} vs {expect}");
            }
        }
    }

    #[test]
    fn strip_split_certifies_on_two_lines() {
        let strip = StripClass::new(-1.0, 2.0).unwrap();
        let s = split_strip(&line(two_pole, -0.5), &line(two_pole, 1.5), strip).unwrap();
        let z = C64::new(0.3, 0.2);
        let third = C64::new(0.0, 1.0 / 3.0);
        assert!((s.plus.eval(z).unwrap() - third / (z + C64::new(0.0, 1.0))).norm() < 1e-8);
        assert!((s.minus.eval(z).unwrap() + third / (z - C64::new(0.0, 2.0))).norm() < 1e-8);
        assert!(s.plus.contains_height(-0.99) && !s.plus.contains_height(-1.0));
    }

    #[test]
    fn single_upper_pole_has_no_plus_part() {
        let f = |z: C64| C64::new(1.0, 0.0) / (z - C64::new(0.0, 3.0));
        let strip = StripClass::new(-1.0, 2.0).unwrap();
        let s = split_strip(&line(f, -0.5), &line(f, 1.5), strip).unwrap();
        // analytic below its only pole: the inverse transform lives on t < 0
        for &z in &[C64::new(0.0, 0.0), C64::new(2.0, 1.0)] {
            assert!(s.plus.eval(z).unwrap().norm() < 1e-6);
            assert!((s.minus.eval(z).unwrap() - f(z)).norm() < 1e-6);
        }
    }

    #[test]
    fn cross_line_remark_one() {
        let s = split_line(&line(two_pole, -0.5));
        let d = cross_line_check(&s, &line(two_pole, 0.5)).unwrap();
        assert!(d <= 1e-6, "{d:e}");
        // 1.5 above the source line, 60% of the way to the pole at 2i: continuation
        // from line data loses accuracy like eps^{0.4}
        let d = cross_line_check(&s, &line(two_pole, 1.0)).unwrap();
        assert!(d <= 1e-5, "{d:e}");
        let strip = split_strip(&line(two_pole, -0.5), &line(two_pole, 1.5), StripClass::new(-1.0, 2.0).unwrap()).unwrap();
        let d = cross_line_check(&strip, &line(two_pole, 1.0)).unwrap();
        assert!(d <= 1e-6, "{d:e}");
    }

    #[test]
    fn corrupted_samples_are_detected() {
        let mut g = line(two_pole, -0.5);
        let mut samples = g.samples().to_vec();
        samples[1 << 15] += 1.0;
        g = g.with_samples(samples).unwrap();
        let s = split_line(&g);
        let d = cross_line_check(&s, &line(two_pole, 1.0)).unwrap();
        assert!(d > 1e-3, "{d:e}");
    }

    #[test]
    fn strip_requires_finite_bounds() {
        let strip = StripClass::new(ExtendedReal::NegInf, 2.0).unwrap();
        let g = line(two_pole, -0.5);
        assert!(matches!(split_strip(&g, &line(two_pole, 1.5), strip), Err(Error::InvalidStrip { .. })));
    }
}
