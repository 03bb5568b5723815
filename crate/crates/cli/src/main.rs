use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use conewalk::alt::{build_harmonic_alt, eliminate_monomial};
use conewalk::cone::{make_cone, Boundary, ConeSpec};
use conewalk::exit::tau_moment_poly;
use conewalk::harmonic::{construct_harmonic, construct_harmonic_alg1, positivity_check};
use conewalk::io::{
    boundary_to_json, matrix_to_json, moments_from_json, moments_to_json, poly_to_json, read_json_file, scalars_to_json,
    to_canonical_string, walk_from_json,
};
use conewalk::laplace::{build_matrix_for, kernel_dimension, solve_system, triangularize_odd};
use conewalk::lx::{apply_lx, verify_one_step};
use conewalk::selftest::{self_test, Fault};
use conewalk::sim::{sample_exit, Check, SimConfig};
use conewalk::walk::{build_transform, builtin_walk, walk_moments, MomentTable, Walk};
use conewalk::{Backend, BigFloat, BigRational, Error, Poly, Quad, Scalar};

#[derive(Parser)]
#[command(name = "conewalk", version, about = "Discrete harmonic polynomials and exit-time moments for walks in a wedge")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scalar backend: rational, quad:D or float:BITS. Chosen from the angle when omitted.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Descent,
    Alg1,
    Alt,
}

#[derive(Subcommand)]
enum Command {
    /// Discrete harmonic polynomial h = u_m + r_m for the cone K_{pi/m}.
    Harmonic {
        #[arg(long)]
        m: u32,
        /// Moment table file.
        #[arg(long, conflicts_with = "walk")]
        moments: Option<PathBuf>,
        /// Walk file (or builtin:M); its transformed cone must be K_{pi/m}.
        #[arg(long)]
        walk: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Descent)]
        method: Method,
    },
    /// Exit-time moment polynomial G_k = E[tau^k].
    ExitMoments {
        #[arg(long)]
        k: usize,
        #[arg(long, conflicts_with = "b")]
        m: Option<u32>,
        /// Slope tan(alpha) of the second ray.
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        moments: Option<PathBuf>,
        /// Evaluation point `x1,x2` in wedge coordinates.
        #[arg(long)]
        at: Option<String>,
    },
    /// The boundary matrix M_{n,b}.
    Matrix {
        #[arg(long)]
        n: usize,
        /// Slope b, or `vertical` / `half-plane`.
        #[arg(long, conflicts_with = "m")]
        b: Option<String>,
        #[arg(long)]
        m: Option<u32>,
        /// Comma-separated right-hand side to solve against.
        #[arg(long)]
        solve: Option<String>,
    },
    /// Quadrant transform T, angle and pushed-forward moments of a walk.
    Transform {
        #[arg(long)]
        walk: String,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Checks harmonicity, boundary vanishing and positivity for a walk.
    Verify {
        #[arg(long)]
        walk: String,
        /// Quadrant points y with 1 <= y1, y2 <= grid are checked one step.
        #[arg(long, default_value_t = 10)]
        grid: i64,
        /// Radius of the positivity check.
        #[arg(long, default_value_t = 50.0)]
        radius: f64,
    },
    /// Monte Carlo comparison against the exact results.
    Simulate {
        #[arg(long)]
        walk: String,
        #[arg(long, default_value = "1,1")]
        start: String,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: u64,
        /// Comma-separated subset of tau-mean, tau-second, exit-position, harmonicity, tail.
        #[arg(long, default_value = "tau-mean")]
        check: String,
    },
    /// F_{j,k} with Laplacian x1^j x2^k vanishing on both rays of K_{pi/m}.
    AltEliminate {
        #[arg(long)]
        j: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
    },
    /// Runs the invariant suite.
    SelfTest {
        #[arg(long, default_value_t = 256)]
        float_bits: u32,
        /// Deliberately corrupt a table (`u-poly`) to see the suite fail.
        #[arg(long)]
        inject_fault: Option<String>,
    },
}

/// Command outcome: a JSON document and whether its checks passed.
struct Outcome {
    value: Value,
    pass: bool,
}

impl From<Value> for Outcome {
    fn from(value: Value) -> Self {
        Outcome { value, pass: true }
    }
}

type Res<T> = Result<T, Error>;

macro_rules! dispatch {
    ($backend:expr, $f:ident ( $($arg:expr),* )) => {
        match $backend {
            Backend::Rational => $f::<BigRational>($($arg),*),
            Backend::Quadratic(2) => $f::<Quad<2>>($($arg),*),
            Backend::Quadratic(3) => $f::<Quad<3>>($($arg),*),
            Backend::Quadratic(5) => $f::<Quad<5>>($($arg),*),
            Backend::BigFloat(64) => $f::<BigFloat<64>>($($arg),*),
            Backend::BigFloat(128) => $f::<BigFloat<128>>($($arg),*),
            Backend::BigFloat(256) => $f::<BigFloat<256>>($($arg),*),
            Backend::BigFloat(512) => $f::<BigFloat<512>>($($arg),*),
            Backend::BigFloat(1024) => $f::<BigFloat<1024>>($($arg),*),
            other => Err(Error::parse("--backend", format!("unsupported backend `{other}`; use rational, quad:2|3|5 or float:64|128|256|512|1024"))),
        }
    };
}

fn backend_for_m(m: u32) -> Backend {
    match m {
        1 | 2 | 4 => Backend::Rational,
        3 | 6 | 12 => Backend::Quadratic(3),
        8 => Backend::Quadratic(2),
        _ => Backend::BigFloat(256),
    }
}

fn backend_for_walk(w: &Walk) -> Backend {
    [Backend::Rational, Backend::Quadratic(2), Backend::Quadratic(3), Backend::Quadratic(5)]
        .into_iter()
        .find(|b| dispatch!(*b, transform_ok(w)).is_ok())
        .unwrap_or(Backend::BigFloat(256))
}

fn transform_ok<F: Scalar>(w: &Walk) -> Res<()> {
    build_transform::<F>(w).map(|_| ())
}

fn load_walk(spec: &str) -> Res<Walk> {
    if let Some(m) = spec.strip_prefix("builtin:") {
        let m: u32 = m.parse().map_err(|_| Error::parse("--walk", format!("bad built-in `{spec}`")))?;
        return builtin_walk(m).ok_or_else(|| Error::parse("--walk", format!("no built-in walk for m = {m}; have 2, 3, 4, 6")));
    }
    if spec == "simple" {
        return Ok(conewalk::walk::simple_walk());
    }
    walk_from_json(&read_json_file(Path::new(spec))?, spec)
}

fn load_moments<F: Scalar>(path: &Path) -> Res<MomentTable<F>> {
    moments_from_json(&read_json_file(path)?, &path.display().to_string())
}

fn parse_pair<T>(s: &str, what: &str, f: impl Fn(&str) -> Res<T>) -> Res<(T, T)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::parse(what, format!("expected `a,b`, got `{s}`")));
    }
    Ok((f(parts[0])?, f(parts[1])?))
}

fn parse_i64(s: &str, what: &str) -> Res<i64> {
    s.trim().parse().map_err(|_| Error::parse(what, format!("`{s}` is not an integer")))
}

fn parse_backend(common: &Common) -> Res<Option<Backend>> {
    common.backend.as_deref().map(str::parse).transpose()
}

fn header<F: Scalar>() -> Value {
    json!(F::backend().to_string())
}

fn cmd_harmonic<F: Scalar>(m: u32, moments: Option<&Path>, walk: Option<&Walk>, method: Method) -> Res<Outcome> {
    let (cone, mu, transform) = match walk {
        Some(w) => {
            let (tr, mu) = walk_moments::<F>(w, m.max(2) as usize)?;
            if tr.cone.m != Some(m) {
                return Err(Error::Precondition(format!("the walk's wedge has angle {} rather than pi/{m}", tr.cone.alpha)));
            }
            let t = json!([[tr.t[0][0].to_scalar_string(), tr.t[0][1].to_scalar_string()], [tr.t[1][0].to_scalar_string(), tr.t[1][1].to_scalar_string()]]);
            (tr.cone, mu, Some(t))
        }
        None => {
            let cone = make_cone::<F>(m)?;
            let mu = match moments {
                Some(p) => load_moments::<F>(p)?,
                None if m <= 2 => MomentTable::with_higher(2, |_, _| F::zero())?,
                None => return Err(Error::InsufficientMoments { have: 2, need: m as usize }),
            };
            (cone, mu, None)
        }
    };
    let h = match method {
        Method::Descent => construct_harmonic(m, &cone, &mu)?.h,
        Method::Alg1 => construct_harmonic_alg1(m, &cone, &mu)?,
        Method::Alt => build_harmonic_alt(m, &cone, &mu)?,
    };
    let residual = if (mu.order as u32) >= m { apply_lx(&h, &mu)?.output } else { Poly::zero() };
    let boundary_ok = cone.vanishes_on_boundary(&h);
    let residual_ok = residual.is_negligible(h.max_abs_coeff());
    let mut v = json!({
        "backend": header::<F>(),
        "m": m,
        "boundary": boundary_to_json(&cone.boundary),
        "h": poly_to_json(&h),
        "correction": poly_to_json(&(h.clone() - &h.homogeneous_part(m))),
        "residual": poly_to_json(&residual),
        "boundary_ok": boundary_ok,
    });
    if let Some(t) = transform {
        v["transform"] = t;
    }
    Ok(Outcome { value: v, pass: boundary_ok && residual_ok })
}

fn cone_from_args<F: Scalar>(m: Option<u32>, b: Option<&str>) -> Res<ConeSpec<F>> {
    match (m, b) {
        (Some(m), _) => make_cone::<F>(m),
        (None, Some(b)) => ConeSpec::from_slope(F::parse_scalar(b)?),
        (None, None) => Err(Error::parse("arguments", "one of --m or --b is required")),
    }
}

fn cmd_exit<F: Scalar>(k: usize, m: Option<u32>, b: Option<&str>, moments: Option<&Path>, at: Option<&str>) -> Res<Outcome> {
    let cone = cone_from_args::<F>(m, b)?;
    let mu = match moments {
        Some(p) => load_moments::<F>(p)?,
        None => MomentTable::with_higher(2, |_, _| F::zero())?,
    };
    let r = tau_moment_poly(k, &cone, &mu)?;
    let mut v = json!({
        "backend": header::<F>(),
        "k": k,
        "alpha": cone.alpha,
        "boundary": boundary_to_json(&cone.boundary),
        "g": poly_to_json(&r.g),
        "rhs": poly_to_json(&r.rhs),
        "residual": poly_to_json(&r.residual),
    });
    if let Some(at) = at {
        let (x1, x2) = parse_pair(at, "--at", F::parse_scalar)?;
        v["at"] = json!([x1.to_scalar_string(), x2.to_scalar_string()]);
        v["value"] = json!(r.g.eval(&x1, &x2).to_scalar_string());
    }
    let pass = r.residual.is_negligible(r.g.max_abs_coeff());
    Ok(Outcome { value: v, pass })
}

fn cmd_matrix<F: Scalar>(n: usize, b: Option<&str>, m: Option<u32>, solve: Option<&str>) -> Res<Outcome> {
    let boundary = match (b, m) {
        (Some("vertical"), _) => Boundary::Vertical,
        (Some("half-plane"), _) => Boundary::HalfPlane,
        (Some(b), _) => Boundary::Slope(F::parse_scalar(b)?),
        (None, Some(m)) => make_cone::<F>(m)?.boundary,
        (None, None) => return Err(Error::parse("arguments", "one of --b or --m is required")),
    };
    let mat = build_matrix_for(n, &boundary)?;
    let mut v = matrix_to_json(&mat);
    let (dim, kernel) = kernel_dimension(&mat);
    v["kernel_dimension"] = json!(dim);
    if let Some(k) = kernel {
        v["kernel"] = scalars_to_json(&k);
    }
    if let Ok(tri) = triangularize_odd(&mat) {
        v["theta"] = json!(tri.theta().to_scalar_string());
    }
    if let Some(s) = solve {
        let rhs = s.split(',').map(F::parse_scalar).collect::<Res<Vec<F>>>()?;
        v["solution"] = scalars_to_json(&solve_system(&mat, &rhs)?);
    }
    Ok(v.into())
}

fn cmd_transform<F: Scalar>(w: &Walk, order: usize) -> Res<Outcome> {
    let (tr, mu) = walk_moments::<F>(w, order)?;
    let t = &tr.t;
    Ok(json!({
        "backend": header::<F>(),
        "t": [[t[0][0].to_scalar_string(), t[0][1].to_scalar_string()], [t[1][0].to_scalar_string(), t[1][1].to_scalar_string()]],
        "rho": tr.rho,
        "alpha": tr.alpha,
        "m": tr.cone.m,
        "boundary": boundary_to_json(&tr.cone.boundary),
        "moments": moments_to_json(&mu),
    })
    .into())
}

fn cmd_verify<F: Scalar>(w: &Walk, grid: i64, radius: f64) -> Res<Outcome> {
    let tr0 = build_transform::<F>(w)?;
    let m = tr0.cone.m.ok_or_else(|| Error::AngleNotRepresentable(format!("alpha = {} is not pi/m", tr0.cone.alpha)))?;
    let (tr, mu) = walk_moments::<F>(w, m.max(2) as usize)?;
    let res = construct_harmonic(m, &tr.cone, &mu)?;
    let h = &res.h;
    let scale = h.max_abs_coeff() * (grid.max(1) as f64 * 4.0).powi(m as i32);
    let mut failures = Vec::new();
    for y1 in 1..=grid {
        for y2 in 1..=grid {
            let x = tr.apply((y1, y2));
            let d = verify_one_step(h, w, &tr, (&x.0, &x.1));
            if !d.is_negligible(scale) {
                failures.push(json!({"y": [y1, y2], "defect": d.to_scalar_string()}));
            }
        }
    }
    let lx_zero = res.residual.is_negligible(h.max_abs_coeff());
    let (checked, negative) = positivity_check(h, &tr, radius);
    let pass = failures.is_empty() && lx_zero && res.boundary_ok && negative.is_empty();
    Ok(Outcome {
        value: json!({
            "backend": header::<F>(),
            "m": m,
            "h": poly_to_json(h),
            "lx_zero": lx_zero,
            "boundary_ok": res.boundary_ok,
            "one_step_points": grid * grid,
            "one_step_failures": failures,
            "positivity_points": checked,
            "negative_points": negative.iter().map(|p| json!([p.0, p.1])).collect::<Vec<_>>(),
            "pass": pass,
        }),
        pass,
    })
}

fn cmd_alt<F: Scalar>(j: u32, k: u32, m: u32) -> Res<Outcome> {
    let cone = make_cone::<F>(m)?;
    let (f, g, full) = eliminate_monomial(j, k, &cone)?;
    Ok(json!({
        "backend": header::<F>(),
        "j": j,
        "k": k,
        "m": m,
        "f": poly_to_json(&f),
        "g": poly_to_json(&g),
        "F": poly_to_json(&full),
    })
    .into())
}

fn cmd_simulate(walk: Walk, start: &str, paths: u64, seed: u64, max_steps: u64, check: &str) -> Res<Outcome> {
    let start = parse_pair(start, "--start", |s| parse_i64(s, "--start"))?;
    let checks = check.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Res<BTreeSet<Check>>>()?;
    let cfg = SimConfig { walk, start, paths, seed, max_steps, checks };
    let report = sample_exit(&cfg)?;
    let pass = report.all_pass();
    let value = serde_json::to_value(&report).expect("report serializes");
    Ok(Outcome { value, pass })
}

fn cmd_self_test(float_bits: u32, fault: Option<&str>) -> Res<Outcome> {
    let fault = match fault {
        None => None,
        Some("u-poly") => Some(Fault::UPolyTable),
        Some(other) => return Err(Error::parse("--inject-fault", format!("unknown fault `{other}`; use u-poly"))),
    };
    if ![64, 128, 256].contains(&float_bits) {
        return Err(Error::parse("--float-bits", "use 64, 128 or 256"));
    }
    let results = self_test(float_bits, fault);
    for r in &results {
        eprintln!("{} [{}] {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.backend, r.name, r.detail);
    }
    let pass = results.iter().all(|r| r.pass);
    let list: Vec<Value> = results.iter().map(|r| json!({"backend": r.backend, "name": r.name, "pass": r.pass, "detail": r.detail})).collect();
    Ok(Outcome { value: json!({"pass": pass, "properties": list}), pass })
}

fn run(cli: &Cli) -> Res<Outcome> {
    let chosen = parse_backend(&cli.common)?;
    match &cli.command {
        Command::Harmonic { m, moments, walk, method } => {
            let walk = walk.as_deref().map(load_walk).transpose()?;
            let backend = chosen.unwrap_or_else(|| backend_for_m(*m));
            dispatch!(backend, cmd_harmonic(*m, moments.as_deref(), walk.as_ref(), *method))
        }
        Command::ExitMoments { k, m, b, moments, at } => {
            let backend = chosen.unwrap_or_else(|| m.map_or(Backend::Rational, backend_for_m));
            dispatch!(backend, cmd_exit(*k, *m, b.as_deref(), moments.as_deref(), at.as_deref()))
        }
        Command::Matrix { n, b, m, solve } => {
            let backend = chosen.unwrap_or_else(|| m.map_or(Backend::Rational, backend_for_m));
            dispatch!(backend, cmd_matrix(*n, b.as_deref(), *m, solve.as_deref()))
        }
        Command::Transform { walk, order } => {
            let w = load_walk(walk)?;
            let backend = chosen.unwrap_or_else(|| backend_for_walk(&w));
            dispatch!(backend, cmd_transform(&w, *order))
        }
        Command::Verify { walk, grid, radius } => {
            let w = load_walk(walk)?;
            let backend = chosen.unwrap_or_else(|| backend_for_walk(&w));
            dispatch!(backend, cmd_verify(&w, *grid, *radius))
        }
        Command::Simulate { walk, start, paths, seed, max_steps, check } => {
            cmd_simulate(load_walk(walk)?, start, *paths, *seed, *max_steps, check)
        }
        Command::AltEliminate { j, k, m } => {
            let backend = chosen.unwrap_or_else(|| backend_for_m(*m));
            dispatch!(backend, cmd_alt(*j, *k, *m))
        }
        Command::SelfTest { float_bits, inject_fault } => cmd_self_test(*float_bits, inject_fault.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let text = to_canonical_string(&outcome.value, matches!(cli.common.format, Format::Pretty));
            let written = match &cli.common.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("{}", json!({"error": {"code": "io", "message": e}}));
                return ExitCode::from(2);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                log::error!("checks failed");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{}", json!({"error": {"code": e.code(), "message": e.to_string()}}));
            ExitCode::from(2)
        }
    }
}
