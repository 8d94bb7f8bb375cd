use proptest::prelude::*;
use whf_core::expr::{parse, principal_sqrt, Expr};
use whf_core::factor::index;
use whf_core::render::{domain_color, Window};
use whf_core::transforms::fourier;
use whf_core::{class_of_convolution, Complex64 as C64, ExtendedReal, LineGrid, StripClass, Support, TimeGrid};

fn endpoint() -> impl Strategy<Value = ExtendedReal> {
    prop_oneof![
        1 => Just(ExtendedReal::NegInf),
        1 => Just(ExtendedReal::PosInf),
        6 => (-5.0..5.0f64).prop_map(ExtendedReal::Finite),
    ]
}

fn strip() -> impl Strategy<Value = StripClass> {
    (endpoint(), endpoint()).prop_filter_map("empty", |(a, b)| StripClass::new(a, b).ok())
}

fn as_f64(e: ExtendedReal) -> f64 {
    match e {
        ExtendedReal::NegInf => f64::NEG_INFINITY,
        ExtendedReal::PosInf => f64::INFINITY,
        ExtendedReal::Finite(v) => v,
    }
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Variable),
        (0u32..1000).prop_map(|k| Expr::Number(C64::new(k as f64 / 8.0, 0.0))),
        Just(Expr::Number(C64::new(0.0, 1.0))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), -4i32..5).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
            inner.clone().prop_map(|a| Expr::Sqrt(Box::new(a))),
            inner.clone().prop_map(|a| Expr::Exp(Box::new(a))),
            inner.prop_map(|a| Expr::Log(Box::new(a))),
        ]
    })
}

/// Roots off the real axis, at least 0.5 away from it.
fn off_axis_root() -> impl Strategy<Value = C64> {
    (-5.0..5.0f64, 0.5..3.0f64, any::<bool>()).prop_map(|(re, im, up)| C64::new(re, if up { im } else { -im }))
}

/// `prod (t - z_k) / (t - p_k)` with its index `#zeros - #poles` above the axis.
fn rational_kernel() -> impl Strategy<Value = (Vec<C64>, Vec<C64>)> {
    (1usize..4).prop_flat_map(|n| (prop::collection::vec(off_axis_root(), n), prop::collection::vec(off_axis_root(), n)))
}

fn kernel_grid(zeros: &[C64], poles: &[C64]) -> LineGrid {
    LineGrid::from_fn(0.0, 200.0, 1 << 12, |t| {
        zeros.iter().zip(poles).map(|(z, p)| (t - z) / (t - p)).product()
    })
    .unwrap()
}

fn upper_count(roots: &[C64]) -> i64 {
    roots.iter().filter(|r| r.im > 0.0).count() as i64
}

proptest! {
    #[test]
    fn convolution_class_is_the_intersection(f in strip(), g in strip()) {
        let lower = as_f64(f.lower()).max(as_f64(g.lower()));
        let upper = as_f64(f.upper()).min(as_f64(g.upper()));
        match class_of_convolution(f, g) {
            Ok(s) => {
                prop_assert!(lower < upper);
                prop_assert_eq!(as_f64(s.lower()), lower);
                prop_assert_eq!(as_f64(s.upper()), upper);
                prop_assert_eq!(class_of_convolution(g, f).unwrap(), s);
            }
            Err(_) => prop_assert!(lower >= upper),
        }
    }

    #[test]
    fn expression_display_round_trips(e in expr_tree()) {
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(again, e);
    }

    #[test]
    fn principal_sqrt_squares_back(re in -1e3..1e3f64, im in -1e3..1e3f64) {
        let w = C64::new(re, im);
        let s = principal_sqrt(w);
        prop_assert!(s.re >= 0.0);
        prop_assert!((s * s - w).norm() <= 1e-13 * w.norm().max(1.0));
    }

    #[test]
    fn render_is_conjugate_symmetric(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
        let f = |z: C64| {
            let den = z - c;
            (den.norm() > 0.0).then(|| (z * z + a * z + b) / den)
        };
        let img = domain_color(f, Window::new(-4.0, 4.0, -4.0, 4.0).unwrap(), 17, 17).unwrap();
        for row in 0..17 {
            for col in 0..17 {
                let [r, g, bl] = img.pixel(col, row);
                prop_assert_eq!([r, bl, g], img.pixel(col, 16 - row));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_is_linear(
        s1 in 0.5..2.0f64, m1 in -2.0..2.0f64,
        s2 in 0.5..2.0f64, m2 in -2.0..2.0f64,
        a in -2.0..2.0f64, b in -2.0..2.0f64,
    ) {
        let bump = |s: f64, m: f64| move |t: f64| C64::new((-(t - m).powi(2) / (2.0 * s * s)).exp(), 0.0);
        let f = TimeGrid::from_fn(20.0, 512, Support::Full, bump(s1, m1)).unwrap();
        let g = TimeGrid::from_fn(20.0, 512, Support::Full, bump(s2, m2)).unwrap();
        let combo = f.with_samples(
            f.samples().iter().zip(g.samples()).map(|(x, y)| a * x + b * y).collect(),
            Support::Full,
        ).unwrap();
        let (ff, gg, hh) = (fourier(&f), fourier(&g), fourier(&combo));
        for k in 0..512 {
            let expect = a * ff.samples()[k] + b * gg.samples()[k];
            prop_assert!((hh.samples()[k] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn index_is_additive((z1, p1) in rational_kernel(), (z2, p2) in rational_kernel()) {
        let k1 = kernel_grid(&z1, &p1);
        let k2 = kernel_grid(&z2, &p2);
        let product = k1.with_samples(k1.samples().iter().zip(k2.samples()).map(|(x, y)| x * y).collect()).unwrap();
        let (i1, i2) = (index(&k1).unwrap(), index(&k2).unwrap());
        prop_assert_eq!(i1, upper_count(&z1) - upper_count(&p1));
        prop_assert_eq!(i2, upper_count(&z2) - upper_count(&p2));
        prop_assert_eq!(index(&product).unwrap(), i1 + i2);
    }
}
