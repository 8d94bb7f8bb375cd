//! Endpoint-corrected trapezoid rules for Fourier-type integrals.
//!
//! For `int_a^b f(t) e^{iwt} dt` on nodes `t_j = a + j h` the plain trapezoid
//! sum is exact on the interior up to aliasing; all algebraic error comes from
//! the two endpoints. Writing `f(a + s h) ~ sum_m b_m s^m` from a one-sided
//! stencil, the missing amount at `a` is `h sum_m e_m(wh) b_m` where
//!
//! ```text
//! e_m(theta) = m!/(-i theta)^{m+1} - [m = 0]/2 - Li_{-m}(e^{i theta})
//! ```
//!
//! is the trapezoid error for `s^m e^{i theta s}` on `[0, inf)`. The
//! correction is uniform in `theta`, so the same weights serve every output
//! frequency of an FFT.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rustfft::{FftDirection, FftPlanner};

use crate::C64;

/// Widest one-sided stencil (polynomial degree `STENCIL - 1`).
pub const STENCIL: usize = 7;

const SERIES_TERMS: usize = 72;

/// `zeta(-n)` for `n = 0 .. SERIES_TERMS + STENCIL`.
fn zeta_negative() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let count = SERIES_TERMS + STENCIL + 1;
        let mut out = vec![0.0; count];
        out[0] = -0.5;
        for n in (1..count).step_by(2) {
            // zeta(1 - 2k) = (-1)^k 2 (2k-1)! zeta(2k) / (2 pi)^{2k}
            let k = (n + 1) / 2;
            let zeta_even = match k {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => (1..2000).map(|j| (j as f64).powi(-(2 * k as i32))).sum::<f64>(),
            };
            let mut mag = 2.0 * zeta_even;
            for j in 1..2 * k {
                mag *= j as f64 / (2.0 * PI);
            }
            mag /= 2.0 * PI;
            out[n] = if k % 2 == 0 { mag } else { -mag };
        }
        out
    })
}

/// Coefficients of the Eulerian polynomials `A_m(w)`, `m = 0..=6`.
const EULERIAN: [&[f64]; STENCIL] = [
    &[1.0],
    &[1.0],
    &[1.0, 1.0],
    &[1.0, 4.0, 1.0],
    &[1.0, 11.0, 11.0, 1.0],
    &[1.0, 26.0, 66.0, 26.0, 1.0],
    &[1.0, 57.0, 302.0, 302.0, 57.0, 1.0],
];

/// Trapezoid error `e_m(theta)` for `s^m e^{i theta s}` on the half-line.
pub fn endpoint_error(m: usize, theta: C64) -> C64 {
    assert!(m < STENCIL);
    if theta.norm() <= 1.0 {
        error_series(m, theta)
    } else {
        error_closed(m, theta)
    }
}

fn error_series(m: usize, theta: C64) -> C64 {
    let zeta = zeta_negative();
    let i_theta = C64::new(-theta.im, theta.re);
    {
        let mut sum = C64::new(0.0, 0.0);
        let mut power = C64::new(1.0, 0.0);
        for k in 0..SERIES_TERMS {
            let z = zeta[m + k];
            if z != 0.0 {
                sum += power * z;
            }
            power = power * i_theta / (k + 1) as f64;
        }
        let delta = if m == 0 { 0.5 } else { 0.0 };
        -sum - delta
    }
}

fn error_closed(m: usize, theta: C64) -> C64 {
    let i_theta = C64::new(-theta.im, theta.re);
    {
        let w = i_theta.exp();
        let one = C64::new(1.0, 0.0);
        let poly = EULERIAN[m].iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * w + c);
        let li = w * poly / (one - w).powi(m as i32 + 1);
        let fact: f64 = (1..=m).map(|j| j as f64).product();
        let lead = fact / (-i_theta).powi(m as i32 + 1);
        let delta = if m == 0 { 0.5 } else { 0.0 };
        lead - delta - li
    }
}

/// Monomial coefficients of the Lagrange basis on nodes `0..size`:
/// `L_j(s) = sum_m table[j][m] s^m`.
fn lagrange_table(size: usize) -> &'static [[f64; STENCIL]] {
    static TABLES: OnceLock<Vec<Vec<[f64; STENCIL]>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=STENCIL)
            .map(|n| {
                (0..n)
                    .map(|j| {
                        let mut coef = [0.0; STENCIL];
                        coef[0] = 1.0;
                        let mut deg = 0;
                        for k in (0..n).filter(|&k| k != j) {
                            let scale = 1.0 / (j as f64 - k as f64);
                            // multiply by (s - k) * scale
                            for d in (0..=deg + 1).rev() {
                                let shifted = if d > 0 { coef[d - 1] } else { 0.0 };
                                coef[d] = (shifted - k as f64 * coef[d]) * scale;
                            }
                            deg += 1;
                        }
                        coef
                    })
                    .collect()
            })
            .collect()
    });
    &tables[size]
}

/// Correction weights `c_j(theta)`, `j < size`, for the left end of a
/// half-line: the rule is `h [f_0/2 + sum f_j e^{ij theta}] + h sum c_j f_j`.
pub fn endpoint_weights(theta: C64, size: usize) -> [C64; STENCIL] {
    let size = size.min(STENCIL);
    let table = lagrange_table(size);
    let errors: Vec<C64> = (0..size).map(|m| endpoint_error(m, theta)).collect();
    let mut out = [C64::new(0.0, 0.0); STENCIL];
    for (j, row) in table.iter().enumerate() {
        out[j] = (0..size).map(|m| errors[m] * row[m]).sum();
    }
    out
}

/// Real quadrature weights (including `h`) for `int f dt` over nodes `0..len`,
/// trapezoid plus Gregory-type end corrections.
pub fn corrected_weights(len: usize, h: f64) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    if len == 1 {
        return vec![0.0];
    }
    let mut w = vec![1.0; len];
    w[0] = 0.5;
    w[len - 1] = 0.5;
    let size = len.min(STENCIL);
    let c = endpoint_weights(C64::new(0.0, 0.0), size);
    for j in 0..size {
        w[j] += c[j].re;
        w[len - 1 - j] += c[j].re;
    }
    w.iter().map(|v| v * h).collect()
}

/// `int_{start}^{start + (len-1) h} f(t) e^{i omega t} dt` by direct summation.
pub fn segment_integral(values: &[C64], start: f64, h: f64, omega: C64) -> C64 {
    let len = values.len();
    if len < 2 {
        return C64::new(0.0, 0.0);
    }
    let m = len - 1;
    let theta = omega * h;
    let i = C64::new(0.0, 1.0);
    // absolute phases: a relative recurrence can overflow when Im omega != 0
    let phase_at = |j: usize| (i * omega * (start + j as f64 * h)).exp();
    let step = (i * theta).exp();
    let mut phase = phase_at(0);
    let mut sum = C64::new(0.0, 0.0);
    for (j, &v) in values.iter().enumerate() {
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        if v != C64::new(0.0, 0.0) {
            sum += v * phase * w;
        }
        phase = if (j + 1) % 64 == 0 { phase_at(j + 1) } else { phase * step };
    }
    let size = len.min(STENCIL);
    let left = endpoint_weights(theta, size);
    let right = endpoint_weights(-theta, size);
    let mut corr_left = C64::new(0.0, 0.0);
    let mut corr_right = C64::new(0.0, 0.0);
    for j in 0..size {
        corr_left += left[j] * values[j];
        corr_right += right[j] * values[m - j];
    }
    let edge = |c: C64, p: C64| if c == C64::new(0.0, 0.0) { c } else { c * p };
    h * (sum + edge(corr_left, phase_at(0)) + edge(corr_right, phase_at(m)))
}

pub(crate) fn fft_plan(n: usize, direction: FftDirection) -> Arc<dyn rustfft::Fft<f64>> {
    FftPlanner::new().plan_fft(n, direction)
}

/// Corrected integrals `int f(t) e^{i w_k t} dt` over one segment for all
/// `w_k = sign 2 pi k / (n h)`, `k = -n/2 .. n/2 - 1` (output in that order).
pub fn segment_transform(values: &[C64], start: f64, h: f64, n: usize, sign: f64) -> Vec<C64> {
    let len = values.len();
    assert!(len <= n && n.is_power_of_two());
    if len < 2 {
        return vec![C64::new(0.0, 0.0); n];
    }
    let m = len - 1;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for (j, &v) in values.iter().enumerate() {
        buf[j] = if j == 0 || j == m { v * 0.5 } else { v };
    }
    let direction = if sign > 0.0 { FftDirection::Inverse } else { FftDirection::Forward };
    fft_plan(n, direction).process(&mut buf);
    let size = len.min(STENCIL);
    (0..n)
        .map(|q| {
            let k = q as i64 - (n / 2) as i64;
            let theta = sign * 2.0 * PI * k as f64 / n as f64;
            let omega = theta / h;
            let s = buf[k.rem_euclid(n as i64) as usize];
            let left = endpoint_weights(C64::new(theta, 0.0), size);
            let right = endpoint_weights(C64::new(-theta, 0.0), size);
            let mut corr_left = C64::new(0.0, 0.0);
            let mut corr_right = C64::new(0.0, 0.0);
            for j in 0..size {
                corr_left += left[j] * values[j];
                corr_right += right[j] * values[m - j];
            }
            // theta * m reduced mod 2 pi exactly through k * m mod n
            let end_arg = sign * 2.0 * PI * ((k * m as i64).rem_euclid(n as i64)) as f64 / n as f64;
            let end_phase = C64::from_polar(1.0, end_arg);
            let anchor = C64::from_polar(1.0, omega * start);
            anchor * h * (s + corr_left + end_phase * corr_right)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn zeta_values() {
        let z = zeta_negative();
        assert_eq!(z[0], -0.5);
        assert!((z[1] + 1.0 / 12.0).abs() < 1e-16);
        assert!((z[3] - 1.0 / 120.0).abs() < 1e-17);
        assert!((z[5] + 1.0 / 252.0).abs() < 1e-16);
        assert!((z[11] - 0.021_092_796_092_796_09).abs() < 1e-15);
        assert_eq!(z[2], 0.0);
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for m in 0..STENCIL {
            for &arg in &[0.0, 0.7, 1.9, -2.5] {
                let theta = C64::from_polar(1.0, arg);
                let a = error_series(m, theta);
                let b = error_closed(m, theta);
                assert!(close(a, b, 1e-12), "m={m} arg={arg}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn euler_maclaurin_limit() {
        // e_1(0) = 1/12, e_3(0) = -1/120
        assert!((endpoint_error(1, C64::new(0.0, 0.0)).re - 1.0 / 12.0).abs() < 1e-16);
        assert!((endpoint_error(3, C64::new(0.0, 0.0)).re + 1.0 / 120.0).abs() < 1e-16);
    }

    #[test]
    fn lagrange_table_reproduces_nodes() {
        let t = lagrange_table(STENCIL);
        for (j, row) in t.iter().enumerate() {
            for node in 0..STENCIL {
                let v: f64 = (0..STENCIL).map(|m| row[m] * (node as f64).powi(m as i32)).sum();
                let expect = if node == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-9, "L_{j}({node}) = {v}");
            }
        }
    }

    #[test]
    fn exponential_half_line_is_high_order() {
        // int_0^L e^{-t} e^{i w t} dt = (1 - e^{(iw-1)L})/(1 - iw)
        let h = 0.05;
        let len = 801;
        let values: Vec<C64> = (0..len).map(|j| C64::new((-(j as f64) * h).exp(), 0.0)).collect();
        let l = (len - 1) as f64 * h;
        for &w in &[0.0, 1.0, 7.5, 40.0, 62.0] {
            let omega = C64::new(w, 0.0);
            let iw1 = C64::new(-1.0, w);
            let exact = (C64::new(1.0, 0.0) - (iw1 * l).exp()) / (C64::new(1.0, 0.0) - C64::new(0.0, w));
            let got = segment_integral(&values, 0.0, h, omega);
            assert!((got - exact).norm() < 1e-10, "w={w}: {got} vs {exact}");
        }
    }

    #[test]
    fn fft_path_matches_direct_path() {
        let n = 64;
        let h = 0.3;
        let values: Vec<C64> = (0..40).map(|j| C64::new((0.1 * j as f64).cos(), (0.05 * j as f64).sin())).collect();
        for &sign in &[1.0, -1.0] {
            let fast = segment_transform(&values, -2.0, h, n, sign);
            for (q, v) in fast.iter().enumerate() {
                let k = q as f64 - (n / 2) as f64;
                let omega = C64::new(sign * 2.0 * PI * k / (n as f64 * h), 0.0);
                let slow = segment_integral(&values, -2.0, h, omega);
                assert!((v - slow).norm() < 1e-12, "q={q}: {v} vs {slow}");
            }
        }
    }

    #[test]
    fn gregory_weights_integrate_polynomials() {
        let w = corrected_weights(20, 0.1);
        for p in 0..STENCIL as i32 {
            let s: f64 = w.iter().enumerate().map(|(j, wj)| wj * (j as f64 * 0.1).powi(p)).sum();
            let exact = 1.9f64.powi(p + 1) / (p + 1) as f64;
            assert!((s - exact).abs() < 1e-12, "p={p}: {s} vs {exact}");
        }
    }
}
