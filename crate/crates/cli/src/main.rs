//! `quadconic`: build configurations, check claims, run the Poncelet and
//! pentagram experiments, draw SVGs and serve the JSON protocol.
//!
//! Exit codes: 0 success, 1 a claim failed, 2 bad input or build error,
//! 3 internal error.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quadconic::claims::{exit_code, run_all, summarize, VerificationReport};
use quadconic::config::{Names, QuadConfig};
use quadconic::conic::rational_point_param;
use quadconic::error::Error;
use quadconic::figures::{figure, pentagram_svg, FIGURES};
use quadconic::oracle::resolve_errata;
use quadconic::pentagram::{run_4c_experiment, summarize_experiment};
use quadconic::poncelet::{
    closure_check, conic_sequence, connectivity_test, make_pencil, SequenceRule,
};
use quadconic::projective::HPoint;
use quadconic::protocol::Server;
use quadconic::render::render_scene;
use quadconic::sampler::{batch, random_param, Roles};
use quadconic::scalar::{Backend, Field, Float, Rational, Scalar, Tolerance, EPSILON_ENV};
use quadconic::scene::SceneDocument;

#[derive(Parser)]
#[command(name = "quadconic", version, about = "Quadrilaterals inscribed in conics")]
struct Cli {
    /// Float zero tolerance.
    #[arg(long, global = true, env = EPSILON_ENV)]
    epsilon: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RolesArg {
    Convex,
    M1Inside,
    M2Inside,
    Any,
}

impl From<RolesArg> for Roles {
    fn from(r: RolesArg) -> Self {
        match r {
            RolesArg::Convex => Roles::Convex,
            RolesArg::M1Inside => Roles::M1Inside,
            RolesArg::M2Inside => Roles::M2Inside,
            RolesArg::Any => Roles::Any,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Z,
    Np,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a scene and print the full configuration.
    Construct {
        scene: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check claims on a scene or on sampled configurations.
    Verify {
        scene: Option<PathBuf>,
        /// Comma-separated claim ids or prefixes; `all` for every claim.
        #[arg(long, default_value = "all")]
        claims: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "float")]
        backend: BackendArg,
        #[arg(long, value_enum, default_value = "any")]
        roles: RolesArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tangent chains: on the canonical pencil, or between two conics of a scene.
    Poncelet {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, default_value = "E")]
        outer: String,
        #[arg(long, default_value = "C")]
        inner: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "float")]
        backend: BackendArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The sequence of conics built from a scene.
    Sequence {
        scene: PathBuf,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, value_enum, default_value = "z")]
        rule: RuleArg,
        /// Chain length for the connectivity check between neighbours.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The third-iterate experiment on random inscribed 12-gons.
    Pentagram {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also draw this trial (0-based) to the given SVG file.
        #[arg(long, requires = "svg")]
        trial: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw a scene with a render section, or one of the stock figures.
    Render {
        scene: Option<PathBuf>,
        #[arg(long, conflicts_with = "scene")]
        figure: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Answer protocol requests on stdin/stdout, or on a local TCP port.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
    /// Re-derive the errata table from exact configurations.
    Errata {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        from: u64,
        /// Exit 1 if the result differs from the shipped table.
        #[arg(long)]
        check: bool,
    },
}

/// Failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { 2 } else { 3 };
        Fail(code, format!("{}: {e}", e.code()))
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail(2, e.to_string())
    }
}

type Out = Result<u8, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn scene(path: &Path, eps: Option<f64>) -> Result<SceneDocument, Fail> {
    let mut s = SceneDocument::parse(&read(path)?)?;
    if s.tolerance.is_none() {
        s.tolerance = eps;
    }
    Ok(s)
}

fn emit_text(text: &str, output: &Option<PathBuf>) -> Result<(), Fail> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit(v: &Value, output: &Option<PathBuf>) -> Result<(), Fail> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    emit_text(&s, output)
}

fn tolerance(eps: Option<f64>) -> Tolerance {
    eps.map(Tolerance::new).unwrap_or_else(Tolerance::from_env)
}

fn parse_scalar(s: &str) -> Result<Scalar, Fail> {
    serde_json::from_value(json!(s))
        .or_else(|_| s.parse::<f64>().map(Scalar::Float).map_err(|e| e.to_string()))
        .map_err(|e| Fail(2, format!("bad number {s}: {e}")))
}

fn construct(path: &Path, eps: Option<f64>, output: &Option<PathBuf>) -> Out {
    let s = scene(path, eps)?;
    let v = match s.backend {
        Backend::Exact => s.build::<Rational>()?.to_json(),
        Backend::Float => s.build::<Float>()?.to_json(),
    };
    emit(&v, output)?;
    Ok(0)
}

fn check<F: Field>(cfgs: &[QuadConfig<F>], ids: &[&str], tol: &Tolerance) -> Result<(Value, u8), Fail> {
    let mut trials = Vec::new();
    let mut all: Vec<VerificationReport> = Vec::new();
    for cfg in cfgs {
        let reports = run_all(cfg, ids, tol)?;
        trials.push(json!({ "seed": cfg.fingerprint().seed, "reports": reports }));
        all.extend(reports);
    }
    let code = exit_code(&all) as u8;
    Ok((json!({ "trials": trials, "summary": summarize(&all) }), code))
}

#[allow(clippy::too_many_arguments)]
fn verify(
    path: &Option<PathBuf>,
    claims: &str,
    trials: usize,
    seed: u64,
    backend: Backend,
    roles: Roles,
    eps: Option<f64>,
    output: &Option<PathBuf>,
) -> Out {
    let ids: Vec<&str> = if claims == "all" {
        vec![]
    } else {
        claims.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    };
    let (v, code) = match path {
        Some(p) => {
            let s = scene(p, eps)?;
            let tol = s.tolerance();
            match s.backend {
                Backend::Exact => check(&[s.build::<Rational>()?], &ids, &tol)?,
                Backend::Float => check(&[s.build::<Float>()?], &ids, &tol)?,
            }
        }
        None => match backend {
            Backend::Exact => check(&batch::<Rational>(trials, seed, roles)?, &ids, &Tolerance::default())?,
            Backend::Float => check(&batch::<Float>(trials, seed, roles)?, &ids, &tolerance(eps))?,
        },
    };
    emit(&v, output)?;
    Ok(code)
}

fn pencil_orbits<F: Field>(lambda: &Scalar, mu: &Scalar, starts: usize, seed: u64, tol: &Tolerance) -> Result<Value, Fail> {
    use rand::SeedableRng;
    let pencil = make_pencil(F::from_scalar(lambda)?, F::from_scalar(mu)?)?;
    let par = rational_point_param(&pencil.outer, &HPoint::from_i64(1, 1, 1))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let origin = HPoint::from_i64(0, 0, 1);
    let mut orbits = Vec::new();
    let (mut worst, mut closed, mut centred) = (0.0f64, 0, 0);
    for _ in 0..starts {
        let a = par.point_at_value(random_param::<F>(&mut rng));
        match closure_check(&pencil, &a) {
            Ok(o) => {
                let r = o.closure_residual.to_f64();
                worst = worst.max(r);
                let at_origin = o.diagonal_point.as_ref().is_some_and(|d| d.proj_eq(&origin, tol));
                closed += o.closure_residual.is_zero(tol) as usize;
                centred += at_origin as usize;
                orbits.push(json!({
                    "start": a,
                    "vertices": o.vertices,
                    "closure_residual": o.closure_residual.to_scalar(),
                    "diagonal_point": o.diagonal_point,
                    "diagonal_at_origin": at_origin,
                }));
            }
            Err(e) => orbits.push(json!({ "start": a, "error": e.code() })),
        }
    }
    Ok(json!({
        "pencil": { "lambda": lambda, "mu": mu, "c": pencil.c.to_scalar() },
        "orbits": orbits,
        "closed": closed,
        "diagonal_at_origin": centred,
        "max_closure_residual": worst,
    }))
}

#[allow(clippy::too_many_arguments)]
fn poncelet(
    lambda: &Option<String>,
    mu: &Option<String>,
    scene_path: &Option<PathBuf>,
    outer: &str,
    inner: &str,
    k: usize,
    starts: usize,
    seed: u64,
    backend: Backend,
    eps: Option<f64>,
    output: &Option<PathBuf>,
) -> Out {
    let tol = tolerance(eps);
    if let Some(p) = scene_path {
        let s = scene(p, eps)?;
        let cfg: QuadConfig<Float> = match s.backend {
            Backend::Float => s.build()?,
            Backend::Exact => {
                let e = SceneDocument { backend: Backend::Float, ..s.clone() };
                e.build()?
            }
        };
        let o = cfg.conic(outer).map_err(|m| m.into_error())?;
        let i = cfg.conic(inner).map_err(|m| m.into_error())?;
        let rep = connectivity_test(&o, &i, k, starts, seed, s.tolerance().epsilon)?;
        let code = if rep.connected { 0 } else { 1 };
        emit(&json!({ "outer": outer, "inner": inner, "connectivity": rep }), output)?;
        return Ok(code);
    }
    let (Some(l), Some(m)) = (lambda, mu) else {
        return Err(Fail(2, "give --lambda and --mu, or --scene".into()));
    };
    let (l, m) = (parse_scalar(l)?, parse_scalar(m)?);
    let v = match backend {
        Backend::Exact => pencil_orbits::<Rational>(&l, &m, starts, seed, &Tolerance::default())?,
        Backend::Float => pencil_orbits::<Float>(&l, &m, starts, seed, &tol)?,
    };
    let code = if v["closed"] == json!(starts) { 0 } else { 1 };
    emit(&v, output)?;
    Ok(code)
}

fn sequence(path: &Path, depth: usize, rule: SequenceRule, k: usize, starts: usize, eps: Option<f64>, output: &Option<PathBuf>) -> Out {
    let s = scene(path, eps)?;
    let s = SceneDocument { backend: Backend::Float, ..s };
    let cfg = s.build::<Float>()?;
    let seq = conic_sequence(&cfg, depth, rule)?;
    let tol = s.tolerance().epsilon;
    let mut links = Vec::new();
    let mut all = true;
    for (j, w) in seq.windows(2).enumerate() {
        let rep = connectivity_test(w[1].base_conic(), w[0].base_conic(), k, starts, j as u64, tol)?;
        all &= rep.connected;
        links.push(json!({ "outer": j + 1, "inner": j, "report": rep }));
    }
    let conics: Vec<Value> = seq
        .iter()
        // closure residuals lose accuracy once a generation's condition passes about 1e3
        .map(|c| json!({ "conic": c.base_conic(), "vertices": c.vertices(), "condition": c.condition() }))
        .collect();
    emit(&json!({ "depth": depth, "conics": conics, "connectivity": links }), output)?;
    Ok(if all { 0 } else { 1 })
}

fn pentagram(trials: usize, seed: u64, trial: Option<usize>, svg: &Option<PathBuf>, eps: Option<f64>, output: &Option<PathBuf>) -> Out {
    let reports = run_4c_experiment(trials, seed, &tolerance(eps));
    if let (Some(t), Some(path)) = (trial, svg) {
        let r = reports.get(t).ok_or_else(|| Fail(2, format!("no trial {t}")))?;
        std::fs::write(path, pentagram_svg(&r.conic, r.initial.clone())?)?;
    }
    let summary = summarize_experiment(&reports);
    emit(&json!({ "summary": summary, "trials": reports }), output)?;
    Ok(0)
}

fn render(path: &Option<PathBuf>, fig: &Option<String>, eps: Option<f64>, output: &Option<PathBuf>) -> Out {
    let svg = match (path, fig) {
        (_, Some(f)) => {
            if !FIGURES.contains(&f.as_str()) {
                return Err(Fail(2, format!("unknown figure {f}; one of {}", FIGURES.join(", "))));
            }
            figure(f)?
        }
        (Some(p), None) => {
            let s = scene(p, eps)?;
            let spec = s
                .render
                .clone()
                .ok_or_else(|| Fail(2, "scene has no render section".into()))?;
            match s.backend {
                Backend::Exact => render_scene(&s.build::<Rational>()?, &spec)?,
                Backend::Float => render_scene(&s.build::<Float>()?, &spec)?,
            }
        }
        (None, None) => return Err(Fail(2, "give a scene or --figure".into())),
    };
    emit_text(&svg, output)?;
    Ok(0)
}

fn serve_lines(server: &Server, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", server.handle(&line))?;
        output.flush()?;
    }
    Ok(())
}

fn serve(port: Option<u16>) -> Out {
    let server = Arc::new(Server::new());
    match port {
        None => serve_lines(&server, std::io::stdin().lock(), std::io::stdout().lock())?,
        Some(p) => {
            let listener = TcpListener::bind(("127.0.0.1", p))
                .map_err(|e| Fail(2, format!("port {p}: {e}")))?;
            eprintln!("listening on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                let server = Arc::clone(&server);
                std::thread::spawn(move || {
                    let reader = BufReader::new(stream.try_clone()?);
                    serve_lines(&server, reader, stream)
                });
            }
        }
    }
    Ok(0)
}

fn errata(seeds: u64, from: u64, check: bool) -> Out {
    let list: Vec<u64> = (from..from + seeds).collect();
    let table = resolve_errata(&list)?;
    emit(&serde_json::to_value(&table).expect("serializable"), &None)?;
    if check && &table != quadconic::errata::embedded() {
        eprintln!("derived table differs from the shipped one");
        return Ok(1);
    }
    Ok(0)
}

fn run(cli: Cli) -> Out {
    let eps = cli.epsilon;
    if eps.is_some_and(|e| !(e >= 0.0 && e.is_finite())) {
        return Err(Fail(2, "epsilon must be a nonnegative number".into()));
    }
    if let Some(e) = eps {
        // the sampler reads the variable itself
        std::env::set_var(EPSILON_ENV, e.to_string());
    }
    match &cli.cmd {
        Cmd::Construct { scene, output } => construct(scene, eps, output),
        Cmd::Verify { scene, claims, trials, seed, backend, roles, output } => {
            verify(scene, claims, *trials, *seed, (*backend).into(), (*roles).into(), eps, output)
        }
        Cmd::Poncelet { lambda, mu, scene, outer, inner, k, starts, seed, backend, output } => poncelet(
            lambda, mu, scene, outer, inner, *k, *starts, *seed, (*backend).into(), eps, output,
        ),
        Cmd::Sequence { scene, depth, rule, k, starts, output } => {
            let rule = match rule {
                RuleArg::Z => SequenceRule::Z,
                RuleArg::Np => SequenceRule::NP,
            };
            sequence(scene, *depth, rule, *k, *starts, eps, output)
        }
        Cmd::Pentagram { trials, seed, trial, svg, output } => pentagram(*trials, *seed, *trial, svg, eps, output),
        Cmd::Render { scene, figure, output } => render(scene, figure, eps, output),
        Cmd::Serve { port } => serve(*port),
        Cmd::Errata { seeds, from, check } => errata(*seeds, *from, *check),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(Fail(code, msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
        Err(_) => ExitCode::from(3),
    }
}
