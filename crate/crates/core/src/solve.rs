//! Scalar Wiener-Hopf equations `A Phi+ + Psi- + C = 0`, the half-line
//! convolution equations that produce them, and the additive-data
//! Riemann-Hilbert problem `F+ = D F- + H`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::{factor_line, index_report, FactorPair};
use crate::grid::{estimate_strip, ExtendedReal, LineGrid, StripClass};
use crate::handle::{sup_distance, Analytic, Combined, HalfPlaneHandle, Side};
use crate::quad::corrected_weights;
use crate::split::{split_line, AdditiveSplit};
use crate::transforms::{fourier, half_line_samples, Support, TimeGrid};
use crate::C64;

/// `|A(+-inf) - 1|` above this rejects the kernel.
const LIMIT_TOLERANCE: f64 = 1e-3;

/// Half-line convolution operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Form {
    /// `int_0^inf k(x-y) f(y) dy = g(x)`
    FirstKind,
    /// `f(x) + lambda int_0^inf k(x-y) f(y) dy = g(x)`
    SecondKind(C64),
}

/// Integral equation on `x > 0` with kernel samples on the whole line.
#[derive(Debug, Clone)]
pub struct HalfLineConvProblem {
    pub kernel: TimeGrid,
    rhs: TimeGrid,
    pub form: Form,
}

impl HalfLineConvProblem {
    /// `rhs` is restricted to `x >= 0`.
    pub fn new(kernel: TimeGrid, rhs: TimeGrid, form: Form) -> Result<Self> {
        if !kernel.same_geometry(&rhs) {
            return Err(Error::GridMismatch("kernel and right-hand side need the same time grid".into()));
        }
        let rhs = rhs.restrict(Support::NonNegative, None);
        Ok(HalfLineConvProblem { kernel, rhs, form })
    }

    pub fn rhs(&self) -> &TimeGrid {
        &self.rhs
    }
}

/// Where the equation holds: a strip, or only the line itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WhDomain {
    Line,
    Strip(StripClass),
}

/// `A Phi+ + Psi- + C = 0` on the line of `kernel`.
#[derive(Debug, Clone)]
pub struct WhProblem {
    pub kernel: LineGrid,
    pub forcing: LineGrid,
    pub domain: WhDomain,
    /// Degree bound of the entire function joining the two sides.
    pub growth_degree: u32,
}

/// `A = sqrt(2 pi) K` or `1 + lambda sqrt(2 pi) K`, `C = -G+`; the unknowns
/// are `Phi+ = F+` and `Psi- = -H-` where `h` is the left side on `x < 0`.
pub fn reduce_to_wh(p: &HalfLineConvProblem) -> Result<WhProblem> {
    let root = (2.0 * std::f64::consts::PI).sqrt();
    let k = fourier(&p.kernel);
    let kernel = match p.form {
        Form::FirstKind => k.map(|v| v * root),
        Form::SecondKind(lambda) => k.map(|v| 1.0 + lambda * root * v),
    };
    if let Some(j) = kernel.samples().iter().position(|v| !(v.norm() > 1e-12)) {
        return Err(Error::KernelVanishes { min_abs: kernel.samples()[j].norm(), abscissa: kernel.abscissa(j) });
    }
    let forcing = fourier(&p.rhs).map(|v| -v);
    let kernel_strip = estimate_strip(&k).strip;
    let forcing_lower = if forcing.max_abs() > 0.0 { estimate_strip(&forcing).strip.lower() } else { ExtendedReal::NegInf };
    let domain = StripClass::new(kernel_strip.lower().max(forcing_lower), kernel_strip.upper())
        .map(WhDomain::Strip)
        .unwrap_or(WhDomain::Line);
    Ok(WhProblem { kernel, forcing, domain, growth_degree: 0 })
}

/// Solution handles together with the factorization behind them.
#[derive(Debug, Clone)]
pub struct WhSolution {
    pub phi_plus: HalfPlaneHandle,
    pub psi_minus: HalfPlaneHandle,
    pub factors: FactorPair,
    /// Split of `C / A-`.
    pub forcing_split: AdditiveSplit,
    /// `sup |A Phi+ + Psi- + C|` on the working line.
    pub residual: f64,
}

fn check_domain(domain: WhDomain, line: f64) -> Result<()> {
    if let WhDomain::Strip(s) = domain {
        let c = ExtendedReal::Finite(line);
        if !(s.lower() <= c && c <= s.upper()) {
            return Err(Error::InvalidStrip { lower: s.lower().to_string(), upper: format!("{} (working line {line} outside)", s.upper()) });
        }
    }
    Ok(())
}

fn combine(parts: Vec<Arc<dyn Analytic>>, op: fn(&[C64]) -> C64, label: &'static str) -> Arc<dyn Analytic> {
    Arc::new(Combined { parts, op: Box::new(op), label })
}

/// Factor `A`, split `C / A-`, and close with `J = 0`:
/// `Phi+ = -C+ / A+`, `Psi- = -A- C-`.
pub fn wh_solve(p: &WhProblem) -> Result<WhSolution> {
    if p.growth_degree > 0 {
        return Err(Error::GrowthDegree(p.growth_degree));
    }
    let a = &p.kernel;
    let c = a.offset();
    check_domain(p.domain, c)?;
    if !a.same_geometry(&p.forcing) {
        return Err(Error::GridMismatch("kernel and forcing must share a line grid".into()));
    }
    let (left, right) = index_report(a)?.log_limits;
    let (left, right) = (left.exp(), right.exp());
    if (left - 1.0).norm() > LIMIT_TOLERANCE || (right - 1.0).norm() > LIMIT_TOLERANCE {
        return Err(Error::KernelLimit { left: format!("{left:.6}"), right: format!("{right:.6}") });
    }
    let factors = factor_line(a)?;
    let (r, n) = (a.half_width(), a.count());
    let a_minus = factors.minus.eval_on_line(c, r, n)?;
    let q = p.forcing.with_samples(p.forcing.samples().iter().zip(a_minus.samples()).map(|(x, y)| x / y).collect())?;
    let forcing_split = split_line(&q);

    let phi = combine(
        vec![forcing_split.plus.func().clone(), factors.plus.func().clone()],
        |v| -v[0] / v[1],
        "-C+/A+",
    );
    let psi = combine(
        vec![forcing_split.minus.func().clone(), factors.minus.func().clone()],
        |v| -v[0] * v[1],
        "-A- C-",
    );
    let phi_plus = HalfPlaneHandle::new(
        Side::AbovePlus,
        forcing_split.plus.boundary_offset().max(factors.plus.boundary_offset()),
        c,
        phi,
        Vec::new(),
    );
    let psi_minus = HalfPlaneHandle::new(
        Side::BelowMinus,
        forcing_split.minus.boundary_offset().min(factors.minus.boundary_offset()),
        c,
        psi,
        Vec::new(),
    );

    let phi_line = phi_plus.eval_on_line(c, r, n)?;
    let psi_line = psi_minus.eval_on_line(c, r, n)?;
    let lhs: Vec<C64> = (0..n)
        .map(|j| a.samples()[j] * phi_line.samples()[j] + psi_line.samples()[j] + p.forcing.samples()[j])
        .collect();
    let residual = sup_distance(&lhs, &vec![C64::new(0.0, 0.0); n]);
    Ok(WhSolution { phi_plus, psi_minus, factors, forcing_split, residual })
}

/// Solution of a half-line convolution equation.
#[derive(Debug, Clone)]
pub struct HalfLineSolution {
    /// `f` on `x >= 0`, on the problem's time grid.
    pub f: TimeGrid,
    pub wh: WhSolution,
    /// Relative L2 change of `f` on `x >= 0` against the same solve on every
    /// other sample.
    pub error_estimate: f64,
}

fn recover(p: &HalfLineConvProblem) -> Result<(TimeGrid, WhSolution)> {
    let wh = wh_solve(&reduce_to_wh(p)?)?;
    let k = fourier(&p.kernel);
    let phi = wh.phi_plus.eval_on_line(k.offset(), k.half_width(), k.count())?;
    Ok((half_line_samples(&phi, true), wh))
}

fn decimate(g: &TimeGrid) -> Result<TimeGrid> {
    let samples = g.samples().iter().step_by(2).copied().collect();
    TimeGrid::new(g.half_width(), samples, g.weight_offset(), g.support())
}

/// Relative L2 distance on `x >= 0` between `fine` and `coarse` at the coarse nodes.
fn coarse_difference(fine: &TimeGrid, coarse: &TimeGrid) -> f64 {
    let c = coarse.center();
    let (mut diff, mut norm) = (0.0, 0.0);
    for (j, v) in coarse.samples().iter().enumerate().skip(c) {
        let u = fine.samples()[2 * j];
        diff += (u - v).norm_sqr();
        norm += u.norm_sqr();
    }
    if norm == 0.0 {
        diff.sqrt()
    } else {
        (diff / norm).sqrt()
    }
}

pub fn solve_half_line(p: &HalfLineConvProblem) -> Result<HalfLineSolution> {
    let (f, wh) = recover(p)?;
    let error_estimate = if p.kernel.count() >= 16 {
        let coarse = HalfLineConvProblem::new(decimate(&p.kernel)?, decimate(&p.rhs)?, p.form)?;
        let (fc, _) = recover(&coarse)?;
        coarse_difference(&f, &fc)
    } else {
        f64::NAN
    };
    Ok(HalfLineSolution { f, wh, error_estimate })
}

/// Left side of the equation on `x >= 0` by direct quadrature in `y`, with
/// the segments `[0, x]` and `[x, T]` integrated separately so that a kink of
/// `k` at the origin sits on a segment end.
pub fn forward_apply(p: &HalfLineConvProblem, f: &TimeGrid) -> Result<TimeGrid> {
    if !p.kernel.same_geometry(f) {
        return Err(Error::GridMismatch("forward_apply needs f on the kernel's grid".into()));
    }
    let n = f.count();
    let c = f.center();
    let h = f.spacing();
    let k = p.kernel.samples();
    let fs = f.samples();
    let kernel_at = |d: isize| {
        let idx = c as isize + d;
        if idx >= 0 && (idx as usize) < n {
            k[idx as usize]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let mut out = vec![C64::new(0.0, 0.0); n];
    out[c..].par_iter_mut().enumerate().for_each(|(di, o)| {
        let i = c + di;
        let mut acc = C64::new(0.0, 0.0);
        let left = corrected_weights(i - c + 1, h);
        for (w, j) in left.iter().zip(c..=i) {
            acc += *w * kernel_at(i as isize - j as isize) * fs[j];
        }
        let right = corrected_weights(n - i, h);
        for (w, j) in right.iter().zip(i..n) {
            acc += *w * kernel_at(i as isize - j as isize) * fs[j];
        }
        *o = match p.form {
            Form::FirstKind => acc,
            Form::SecondKind(lambda) => fs[i] + lambda * acc,
        };
    });
    f.with_samples(out, Support::NonNegative)
}

/// Relative L2 distance between two grids on `x >= 0`.
pub fn relative_l2_positive(a: &TimeGrid, b: &TimeGrid) -> f64 {
    let diff = a.restrict(Support::NonNegative, None).with_samples(
        a.samples().iter().zip(b.samples()).map(|(x, y)| x - y).collect(),
        Support::NonNegative,
    );
    let norm = b.restrict(Support::NonNegative, None).l2_norm();
    match diff {
        Ok(d) if norm > 0.0 => d.l2_norm() / norm,
        Ok(d) => d.l2_norm(),
        Err(_) => f64::NAN,
    }
}

/// `F+ = D F- + H` on a line with `D` of index zero.
#[derive(Debug, Clone)]
pub struct RhSolution {
    pub plus: HalfPlaneHandle,
    pub minus: HalfPlaneHandle,
    pub factors: FactorPair,
    /// `sup |F+ - D F- - H|` on the line.
    pub residual: f64,
}

/// Factor `D = D+ D-`, split `H / D+ = Q+ + Q-`; then `F+ = D+ Q+` and
/// `F- = -Q- / D-`.
pub fn rh_solve(d: &LineGrid, h: &LineGrid) -> Result<RhSolution> {
    if !d.same_geometry(h) {
        return Err(Error::GridMismatch("D and H must share a line grid".into()));
    }
    let factors = factor_line(d)?;
    let (c, r, n) = (d.offset(), d.half_width(), d.count());
    let d_plus = factors.plus.eval_on_line(c, r, n)?;
    let q = h.with_samples(h.samples().iter().zip(d_plus.samples()).map(|(x, y)| x / y).collect())?;
    let split = split_line(&q);
    let plus = HalfPlaneHandle::new(
        Side::AbovePlus,
        split.plus.boundary_offset().max(factors.plus.boundary_offset()),
        c,
        combine(vec![split.plus.func().clone(), factors.plus.func().clone()], |v| v[0] * v[1], "D+ Q+"),
        Vec::new(),
    );
    let minus = HalfPlaneHandle::new(
        Side::BelowMinus,
        split.minus.boundary_offset().min(factors.minus.boundary_offset()),
        c,
        combine(vec![split.minus.func().clone(), factors.minus.func().clone()], |v| -v[0] / v[1], "-Q-/D-"),
        Vec::new(),
    );
    let fp = plus.eval_on_line(c, r, n)?;
    let fm = minus.eval_on_line(c, r, n)?;
    let rhs: Vec<C64> = (0..n).map(|j| d.samples()[j] * fm.samples()[j] + h.samples()[j]).collect();
    let residual = sup_distance(fp.samples(), &rhs);
    Ok(RhSolution { plus, minus, factors, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: f64 = 30.0;
    const N: usize = 1 << 12;

    fn real(f: impl Fn(f64) -> f64 + 'static) -> impl Fn(f64) -> C64 {
        move |t| C64::new(f(t), 0.0)
    }

    fn manufactured() -> HalfLineConvProblem {
        let k = TimeGrid::from_fn(T, N, Support::Full, real(|x| (-x.abs()).exp())).unwrap();
        let g = TimeGrid::from_fn(T, N, Support::NonNegative, real(|x| (1.75 + 1.5 * x) * (-x).exp())).unwrap();
        HalfLineConvProblem::new(k, g, Form::SecondKind(C64::new(1.5, 0.0))).unwrap()
    }

    #[test]
    fn second_kind_symbol() {
        let wh = reduce_to_wh(&manufactured()).unwrap();
        let worst = wh
            .kernel
            .abscissae()
            .zip(wh.kernel.samples())
            .map(|(a, v)| (v - (a * a + 4.0) / (a * a + 1.0)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst:e}");
        assert!(matches!(wh.domain, WhDomain::Strip(_)));
    }

    #[test]
    fn zero_rhs_gives_zero_forcing() {
        let p = manufactured();
        let zero = p.rhs().with_samples(vec![C64::new(0.0, 0.0); N], Support::NonNegative).unwrap();
        let p = HalfLineConvProblem::new(p.kernel.clone(), zero, p.form).unwrap();
        let wh = reduce_to_wh(&p).unwrap();
        assert_eq!(wh.forcing.max_abs(), 0.0);
        let s = wh_solve(&wh).unwrap();
        let z = C64::new(0.5, 0.5);
        assert_eq!(s.phi_plus.eval(z).unwrap().norm(), 0.0);
        assert_eq!(s.psi_minus.eval(z.conj()).unwrap().norm(), 0.0);
    }

    #[test]
    fn first_kind_fails_limit_check() {
        let p = HalfLineConvProblem { form: Form::FirstKind, ..manufactured() };
        let wh = reduce_to_wh(&p).unwrap();
        let err = wh_solve(&wh).unwrap_err();
        assert!(matches!(err, Error::KernelLimit { .. }));
        assert!(err.to_string().contains("kernel limit != 1"));
    }

    #[test]
    fn manufactured_second_kind_solution() {
        let p = manufactured();
        let sol = solve_half_line(&p).unwrap();
        let exact = TimeGrid::from_fn(T, N, Support::NonNegative, real(|x| (-x).exp())).unwrap();
        let err = relative_l2_positive(&sol.f, &exact);
        assert!(err <= 1e-3, "{err:e}");
        assert!(sol.wh.residual <= 1e-5, "{:e}", sol.wh.residual);
        let round_trip = relative_l2_positive(&forward_apply(&p, &sol.f).unwrap(), p.rhs());
        assert!(round_trip <= 2.0 * sol.error_estimate, "{round_trip:e} vs {:e}", sol.error_estimate);
    }

    #[test]
    fn unit_kernel_is_a_pure_split() {
        let a = LineGrid::new(0.0, 200.0, vec![C64::new(1.0, 0.0); 1 << 14]).unwrap();
        let forcing = LineGrid::from_fn(0.0, 200.0, 1 << 14, |z| C64::new(1.0, 0.0) / (z * z + 1.0)).unwrap();
        let s = wh_solve(&WhProblem { kernel: a, forcing: forcing.clone(), domain: WhDomain::Line, growth_degree: 0 }).unwrap();
        let split = split_line(&forcing);
        for z in [C64::new(0.2, 0.7), C64::new(-1.0, 2.0)] {
            assert!((s.phi_plus.eval(z).unwrap() + split.plus.eval(z).unwrap()).norm() < 1e-12);
            assert!((s.psi_minus.eval(z.conj()).unwrap() + split.minus.eval(z.conj()).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn growth_degree_is_rejected() {
        let mut wh = reduce_to_wh(&manufactured()).unwrap();
        wh.growth_degree = 1;
        assert!(matches!(wh_solve(&wh), Err(Error::GrowthDegree(1))));
    }

    #[test]
    fn collapsed_strip_still_solves() {
        let i = C64::new(0.0, 1.0);
        let kernel = LineGrid::from_fn(0.0, 200.0, 1 << 16, |t| (t + i) * (t - 2.0 * i) / ((t + 3.0 * i) * (t - i))).unwrap();
        let forcing = LineGrid::from_fn(0.0, 200.0, 1 << 16, |t| C64::new(1.0, 0.0) / ((t + 2.0 * i) * (t - 0.5 * i))).unwrap();
        let s = wh_solve(&WhProblem { kernel, forcing, domain: WhDomain::Line, growth_degree: 0 }).unwrap();
        assert!(s.residual <= 1e-5, "{:e}", s.residual);
    }

    #[test]
    fn forward_apply_exponential() {
        let p = manufactured();
        let p = HalfLineConvProblem { form: Form::FirstKind, ..p };
        let f = TimeGrid::from_fn(T, N, Support::NonNegative, real(|x| (-x).exp())).unwrap();
        let g = forward_apply(&p, &f).unwrap();
        let worst = (f.center()..N)
            .map(|j| {
                let x = g.abscissa(j);
                (g.samples()[j] - (x + 0.5) * (-x).exp()).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst:e}");
        let zero = f.with_samples(vec![C64::new(0.0, 0.0); N], Support::NonNegative).unwrap();
        assert_eq!(forward_apply(&p, &zero).unwrap().samples().iter().map(|v| v.norm()).sum::<f64>(), 0.0);
    }

    #[test]
    fn forward_apply_narrow_gaussian_is_identity() {
        let sigma = 1e-2;
        let (t, n) = (10.0, 1 << 14);
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let k = TimeGrid::from_fn(t, n, Support::Full, real(move |x| norm * (-0.5 * (x / sigma).powi(2)).exp())).unwrap();
        let f = TimeGrid::from_fn(t, n, Support::NonNegative, real(|x| (-x).exp() * (1.0 + x).cos())).unwrap();
        let p = HalfLineConvProblem::new(k, f.clone(), Form::FirstKind).unwrap();
        let g = forward_apply(&p, &f).unwrap();
        let (mut diff, mut total) = (0.0, 0.0);
        for j in f.center()..n {
            if f.abscissa(j) > 3.0 * sigma {
                diff += (g.samples()[j] - f.samples()[j]).norm_sqr();
                total += f.samples()[j].norm_sqr();
            }
        }
        assert!((diff / total).sqrt() <= 1e-2);
    }

    #[test]
    fn riemann_hilbert_with_unit_coefficient_is_a_jump_problem() {
        let d = LineGrid::new(0.0, 200.0, vec![C64::new(1.0, 0.0); 1 << 14]).unwrap();
        let h = LineGrid::from_fn(0.0, 200.0, 1 << 14, |z| C64::new(1.0, 0.0) / (z * z + 1.0)).unwrap();
        let s = rh_solve(&d, &h).unwrap();
        assert!(s.residual < 1e-8, "{:e}", s.residual);
        let z = C64::new(0.0, 0.5);
        let expect = C64::new(0.0, 0.5) / (z + C64::new(0.0, 1.0));
        assert!((s.plus.eval(z).unwrap() - expect).norm() < 1e-8);
    }

    #[test]
    fn riemann_hilbert_rational_coefficient() {
        let i = C64::new(0.0, 1.0);
        let d = LineGrid::from_fn(0.0, 200.0, 1 << 16, |t| (t + i) * (t - 2.0 * i) / ((t + 3.0 * i) * (t - i))).unwrap();
        let h = LineGrid::from_fn(0.0, 200.0, 1 << 16, |t| C64::new(1.0, 0.0) / (t * t + 4.0)).unwrap();
        let s = rh_solve(&d, &h).unwrap();
        assert!(s.residual < 1e-5, "{:e}", s.residual);
    }
}
