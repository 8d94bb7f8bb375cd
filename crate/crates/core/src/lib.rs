//! Numerical Wiener-Hopf and Riemann-Hilbert toolkit for scalar functions.
//!
//! Functions are sampled on horizontal lines `Im z = c` ([`LineGrid`]). From
//! those samples the crate computes
//!
//! * additive splittings `F = F+ + F-` into parts analytic above and below
//!   the line ([`split`]),
//! * multiplicative factorizations `K = K+ K-` with winding-number handling
//!   ([`factor`]),
//! * solutions of scalar Wiener-Hopf equations `A Phi+ + Psi- + C = 0` and of
//!   the half-line convolution equations that produce them ([`solve`]),
//! * domain-coloring images of the results ([`render`]).
//!
//! Fourier conventions: `F(x) = (2 pi)^{-1/2} int f(t) e^{ixt} dt` and
//! `f(t) = (2 pi)^{-1/2} int F(x) e^{-ixt} dx`.

pub mod error;
pub mod expr;
pub mod factor;
pub mod grid;
pub mod handle;
pub mod quad;
pub mod render;
pub mod solve;
pub mod split;
pub mod transforms;

pub use error::{Error, Result};
pub use expr::{Expr, ParseError};
pub use grid::{class_of_convolution, estimate_strip, make_grid, ExtendedReal, LineGrid, StripClass, StripEstimate};
pub use factor::{factor_line, factor_strip, factor_with_index, index, normalize_index, FactorPair};
pub use handle::{Analytic, Convention, HalfPlaneHandle, Side, SplitPair};
pub use render::{domain_color, write_ppm, ImageBuffer, Window};
pub use solve::{forward_apply, reduce_to_wh, rh_solve, wh_solve, Form, HalfLineConvProblem, WhDomain, WhProblem};
pub use split::{split_line, split_strip, AdditiveSplit};
pub use transforms::{Support, TimeGrid};

pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub(crate) type C64 = Complex64;
