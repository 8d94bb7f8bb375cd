//! `whf`: splitting, factorization, Wiener-Hopf solves and domain coloring
//! from the command line.

mod report;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use num_complex::Complex64 as C64;
use whf_core::expr::{parse, Expr};
use whf_core::factor::{factor_strip, factor_with_index, index_report, FactorPair};
use whf_core::solve::{forward_apply, reduce_to_wh, relative_l2_positive, rh_solve, solve_half_line, Form, HalfLineConvProblem, WhDomain};
use whf_core::split::{split_line, split_strip_with_tolerance, AdditiveSplit};
use whf_core::{domain_color, estimate_strip, make_grid, write_ppm, HalfPlaneHandle, LineGrid, StripClass, Support, TimeGrid, Window};

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "whf", version, about = "Wiener-Hopf and Riemann-Hilbert factorization of scalar functions")]
struct Cli {
    /// Worker threads [default: hardware count]
    #[arg(long, global = true, env = "WHF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Winding number of K along a line
    Index(KernelArgs),
    /// Additive split F = plus + minus
    Split(SplitArgs),
    /// Multiplicative factorization K = plus * minus
    Factor(FactorArgs),
    /// Half-line convolution equation through its Wiener-Hopf form
    Solve(SolveArgs),
    /// Riemann-Hilbert problem F+ = D F- + H on a line
    RhSolve(RhArgs),
    /// Domain-coloring image as binary PPM
    Render(RenderArgs),
    /// Estimated strip of analyticity of F
    Classify(KernelArgs),
}

/// `R,N`: half width and sample count of a line grid.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GridSpec {
    half_width: f64,
    count: usize,
}

fn pair<A: FromStr, B: FromStr>(s: &str, sep: char) -> Result<(A, B), String> {
    let (a, b) = s.split_once(sep).ok_or_else(|| format!("expected two values separated by '{sep}'"))?;
    let a = a.trim().parse().map_err(|_| format!("invalid value '{a}'"))?;
    let b = b.trim().parse().map_err(|_| format!("invalid value '{b}'"))?;
    Ok((a, b))
}

fn check_count(count: usize) -> Result<usize, String> {
    if count.is_power_of_two() && (8..=1 << 24).contains(&count) {
        Ok(count)
    } else {
        Err(format!("N = {count} must be a power of two in [8, 2^24]"))
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (half_width, count): (f64, usize) = pair(s, ',')?;
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(format!("R = {half_width} must be positive"));
        }
        Ok(GridSpec { half_width, count: check_count(count)? })
    }
}

/// `a,b` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Interval(f64, f64);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b): (f64, f64) = pair(s, ',')?;
        if !(a < b) {
            return Err(format!("{a} must be below {b}"));
        }
        Ok(Interval(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Size(usize, usize);

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h): (usize, usize) = pair(s, 'x')?;
        if w == 0 || h == 0 {
            return Err("image size must be positive".into());
        }
        Ok(Size(w, h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct WindowArg(Window);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| format!("invalid value '{p}'"))).collect::<Result<_, _>>()?;
        if v.len() != 4 {
            return Err("expected re_min,re_max,im_min,im_max".into());
        }
        Window::new(v[0], v[1], v[2], v[3]).map(WindowArg).map_err(|e| e.to_string())
    }
}

fn expression(s: &str) -> Result<Expr, String> {
    parse(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Function of t (or z), e.g. "(t-i)/(t+i)"
    #[arg(long, value_parser = expression)]
    expr: Expr,
    /// Half width and sample count R,N
    #[arg(long, default_value = "200,65536")]
    grid: GridSpec,
    /// Sampling line Im z = LINE
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    line: f64,
}

#[derive(Args, Debug)]
struct StripArgs {
    /// Strip lower,upper; enables the two-line strip construction
    #[arg(long, allow_hyphen_values = true, requires = "lines")]
    strip: Option<Interval>,
    /// The two interior lines a,b used with --strip
    #[arg(long, allow_hyphen_values = true, requires = "strip")]
    lines: Option<Interval>,
    /// Cross-line tolerance for the strip construction
    #[arg(long, default_value = "1e-6")]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    strip: StripArgs,
    /// CSV of plus values on the line
    #[arg(long)]
    out_plus: Option<PathBuf>,
    /// CSV of minus values on the line
    #[arg(long)]
    out_minus: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FactorArgs {
    #[command(flatten)]
    split: SplitArgs,
    /// Remove a nonzero index with ((t-i)/(t+i))^kappa before factoring
    #[arg(long)]
    normalize_index: bool,
    /// Half side of the zero-free certification boxes
    #[arg(long, default_value_t = 2.0)]
    box_width: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Kernel k(x) on the whole line
    #[arg(long, value_parser = expression)]
    kernel_expr: Expr,
    /// Right-hand side g(x) on x > 0
    #[arg(long, value_parser = expression)]
    rhs_expr: Expr,
    /// f + LAMBDA int_0^inf k(x-y) f(y) dy = g
    #[arg(long, allow_hyphen_values = true, conflicts_with = "first_kind", required_unless_present = "first_kind")]
    second_kind: Option<f64>,
    /// int_0^inf k(x-y) f(y) dy = g
    #[arg(long)]
    first_kind: bool,
    /// Time grid T,N on [-T, T)
    #[arg(long, default_value = "30,4096")]
    time: GridSpec,
    /// Frequency grid R,N; overrides --time with T = N pi / (2R)
    #[arg(long)]
    grid: Option<GridSpec>,
    /// CSV of f on the time grid
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RhArgs {
    /// Coefficient D of F+ = D F- + H
    #[arg(long, value_parser = expression)]
    d_expr: Expr,
    /// Forcing H
    #[arg(long, value_parser = expression)]
    h_expr: Expr,
    #[arg(long, default_value = "200,65536")]
    grid: GridSpec,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    line: f64,
    #[arg(long)]
    out_plus: Option<PathBuf>,
    #[arg(long)]
    out_minus: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long, value_parser = expression)]
    expr: Expr,
    /// re_min,re_max,im_min,im_max
    #[arg(long, default_value = "-4,4,-4,4", allow_hyphen_values = true)]
    window: WindowArg,
    /// WIDTHxHEIGHT
    #[arg(long, default_value = "400x400")]
    size: Size,
    #[arg(long)]
    out: PathBuf,
}

type Outcome = Result<Report, whf_core::Error>;

/// Samples of a kernel; evaluation failures (poles) become NaN so that the
/// kernel checks report them.
fn kernel_grid(e: &Expr, line: f64, g: GridSpec) -> whf_core::Result<LineGrid> {
    LineGrid::from_fn(line, g.half_width, g.count, |z| e.eval(z).unwrap_or(C64::new(f64::NAN, f64::NAN)))
}

fn echo(r: &mut Report, g: GridSpec, line: f64) {
    r.put("half_width", g.half_width).put("count", g.count).put("line", line);
}

fn write_line_csv(path: &Option<PathBuf>, handle: &HalfPlaneHandle, line: f64, g: GridSpec) -> whf_core::Result<()> {
    if let Some(p) = path {
        let values = handle.eval_on_line(line, g.half_width, g.count)?;
        values.write_csv(BufWriter::new(File::create(p)?))?;
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn run_index(a: &KernelArgs) -> Outcome {
    let k = kernel_grid(&a.expr, a.line, a.grid)?;
    let ir = index_report(&k)?;
    let mut r = Report::default();
    r.put("expr", &a.expr);
    echo(&mut r, a.grid, a.line);
    r.put("index", ir.index).real("winding", ir.winding).real("residual", ir.residual);
    Ok(r)
}

fn run_classify(a: &KernelArgs) -> Outcome {
    let f = make_grid(&a.expr, a.line, a.grid.half_width, a.grid.count)?;
    let est = estimate_strip(&f);
    let mut r = Report::default();
    r.put("expr", &a.expr);
    echo(&mut r, a.grid, a.line);
    r.put("strip_lower", est.strip.lower())
        .put("strip_upper", est.strip.upper())
        .real("residual_lower", est.residual_lower)
        .real("residual_upper", est.residual_upper);
    Ok(r)
}

fn strip_grids(e: &Expr, s: &StripArgs, g: GridSpec, sample: fn(&Expr, f64, GridSpec) -> whf_core::Result<LineGrid>) -> whf_core::Result<Option<(LineGrid, LineGrid, StripClass)>> {
    match (s.strip, s.lines) {
        (Some(Interval(lo, hi)), Some(Interval(a, b))) => Ok(Some((sample(e, a, g)?, sample(e, b, g)?, StripClass::new(lo, hi)?))),
        _ => Ok(None),
    }
}

fn data_grid(e: &Expr, line: f64, g: GridSpec) -> whf_core::Result<LineGrid> {
    make_grid(e, line, g.half_width, g.count)
}

fn run_split(a: &SplitArgs) -> Outcome {
    let k = &a.kernel;
    let mut r = Report::default();
    r.put("expr", &k.expr);
    echo(&mut r, k.grid, k.line);
    let (split, probe): (AdditiveSplit, LineGrid) = match strip_grids(&k.expr, &a.strip, k.grid, data_grid)? {
        Some((on_a, on_b, strip)) => {
            r.put("strip", strip);
            (split_strip_with_tolerance(&on_a, &on_b, strip, a.strip.tolerance)?, on_a)
        }
        None => {
            let f = data_grid(&k.expr, k.line, k.grid)?;
            (split_line(&f), f)
        }
    };
    let line = probe.offset();
    let recon = whf_core::split::cross_line_check(&split, &probe)?;
    r.real("reconstruction_error", recon)
        .real("plus_boundary", split.plus.boundary_offset())
        .real("minus_boundary", split.minus.boundary_offset())
        .real("plus_pw_mass", split.plus.paley_wiener_mass(line, k.grid.half_width, k.grid.count)?)
        .real("minus_pw_mass", split.minus.paley_wiener_mass(line, k.grid.half_width, k.grid.count)?);
    write_line_csv(&a.out_plus, &split.plus, line, k.grid)?;
    write_line_csv(&a.out_minus, &split.minus, line, k.grid)?;
    Ok(r)
}

fn run_factor(a: &FactorArgs) -> Outcome {
    let k = &a.split.kernel;
    let mut r = Report::default();
    r.put("expr", &k.expr);
    echo(&mut r, k.grid, k.line);
    let (pair, probe): (FactorPair, LineGrid) = match strip_grids(&k.expr, &a.split.strip, k.grid, kernel_grid)? {
        Some((on_a, on_b, strip)) => {
            r.put("strip", strip);
            (factor_strip(&on_a, &on_b, strip)?, on_a)
        }
        None => {
            let kg = kernel_grid(&k.expr, k.line, k.grid)?;
            let ir = index_report(&kg)?;
            if ir.index != 0 && !a.normalize_index {
                return Err(whf_core::Error::NonZeroIndex(ir.index));
            }
            (factor_with_index(&kg)?, kg)
        }
    };
    let line = probe.offset();
    let (g, n) = (k.grid.half_width, k.grid.count);
    let (min_plus, min_minus) = pair.zero_free_certificate(a.box_width, 100)?;
    r.put("index_removed", pair.index_removed)
        .complex("normalization", pair.normalization)
        .real("reconstruction_error", pair.reconstruction_error(&probe)?)
        .real("min_abs_plus", min_plus)
        .real("min_abs_minus", min_minus)
        .real("log_plus_pw_mass", pair.log_split.plus.paley_wiener_mass(line, g, n)?)
        .real("log_minus_pw_mass", pair.log_split.minus.paley_wiener_mass(line, g, n)?);
    write_line_csv(&a.split.out_plus, &pair.plus, line, k.grid)?;
    write_line_csv(&a.split.out_minus, &pair.minus, line, k.grid)?;
    Ok(r)
}

fn run_solve(a: &SolveArgs) -> Outcome {
    let (t, n) = match a.grid {
        Some(g) => (g.count as f64 * std::f64::consts::PI / (2.0 * g.half_width), g.count),
        None => (a.time.half_width, a.time.count),
    };
    let sample = |e: &Expr, support| TimeGrid::from_fn(t, n, support, |x| e.eval(C64::new(x, 0.0)).unwrap_or(C64::new(f64::NAN, f64::NAN)));
    let kernel = sample(&a.kernel_expr, Support::Full)?;
    let rhs = sample(&a.rhs_expr, Support::NonNegative)?;
    let form = match a.second_kind {
        Some(lambda) => Form::SecondKind(C64::new(lambda, 0.0)),
        None => Form::FirstKind,
    };
    let p = HalfLineConvProblem::new(kernel, rhs, form)?;
    let wh = reduce_to_wh(&p)?;
    let mut r = Report::default();
    r.put("kernel_expr", &a.kernel_expr).put("rhs_expr", &a.rhs_expr);
    r.put("form", match form {
        Form::FirstKind => "first-kind".to_string(),
        Form::SecondKind(l) => format!("second-kind {}", l.re),
    });
    r.put("time_half_width", t).put("count", n).put("line_half_width", wh.kernel.half_width());
    r.put("domain", match wh.domain {
        WhDomain::Line => "line".to_string(),
        WhDomain::Strip(s) => s.to_string(),
    });
    let sol = solve_half_line(&p)?;
    let applied = forward_apply(&p, &sol.f)?;
    r.real("functional_residual", sol.wh.residual)
        .real("error_estimate", sol.error_estimate)
        .real("forward_residual", relative_l2_positive(&applied, p.rhs()));
    if let Some(path) = &a.out {
        sol.f.write_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(r)
}

fn run_rh(a: &RhArgs) -> Outcome {
    let d = kernel_grid(&a.d_expr, a.line, a.grid)?;
    let h = data_grid(&a.h_expr, a.line, a.grid)?;
    let sol = rh_solve(&d, &h)?;
    let mut r = Report::default();
    r.put("d_expr", &a.d_expr).put("h_expr", &a.h_expr);
    echo(&mut r, a.grid, a.line);
    r.complex("normalization", sol.factors.normalization).real("residual", sol.residual);
    write_line_csv(&a.out_plus, &sol.plus, a.line, a.grid)?;
    write_line_csv(&a.out_minus, &sol.minus, a.line, a.grid)?;
    Ok(r)
}

fn run_render(a: &RenderArgs) -> Outcome {
    let Size(w, h) = a.size;
    let img = domain_color(|z| a.expr.eval(z).ok(), a.window.0, w, h)?;
    write_ppm(&img, Path::new(&a.out))?;
    let win = a.window.0;
    let mut r = Report::default();
    r.put("expr", &a.expr)
        .put("window", format!("{},{},{},{}", win.re_min, win.re_max, win.im_min, win.im_max))
        .put("size", format!("{w}x{h}"))
        .put("out", a.out.display());
    Ok(r)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Index(a) => run_index(a),
        Command::Split(a) => run_split(a),
        Command::Factor(a) => run_factor(a),
        Command::Solve(a) => run_solve(a),
        Command::RhSolve(a) => run_rh(a),
        Command::Render(a) => run_render(a),
        Command::Classify(a) => run_classify(a),
    };
    // timings go to stderr so the report itself is reproducible
    eprintln!("elapsed_s = {:.3}", start.elapsed().as_secs_f64());
    match outcome {
        Ok(report) => {
            print!("{}", report.render());
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("error = {e}");
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
