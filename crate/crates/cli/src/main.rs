use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mop_core::curve::Side;
use mop_core::deform::{sign_chart_check, ContourSystem, Deformation};
use mop_core::errorrhp::{assemble_wr, extract_r1, reconstruct_r, solve_rminus, SolveMethod, M3};
use mop_core::harness::{self, AsymptoticReport, Edge, ExperimentConfig, Format};
use mop_core::local::{GlobalParametrix, LocalParametrix};
use mop_core::model::{poly_zeros, solve_mop, ModelDescriptor};
use mop_core::outer::{jump_residual, OuterParametrix};
use mop_core::{Cx, PrecisionContext};
use num_complex::Complex64 as C64;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

/// Numerical steepest descent for multiple Laguerre polynomials.
#[derive(Parser)]
#[command(name = "mop", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated degrees, e.g. 8,16,32,64.
    #[arg(long, global = true, value_delimiter = ',')]
    n_sweep: Option<Vec<usize>>,
    /// Working precision in bits; outranks MOP_PRECISION_BITS and the config.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Svg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact monic P_{n1,n2} from the moment system: residuals and zeros.
    Solve {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long, allow_negative_numbers = true)]
        alpha1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        alpha2: Option<f64>,
    },
    /// Spectral curve diagnostics.
    Curve {
        #[command(subcommand)]
        what: CurveCmd,
    },
    /// Outer parametrix diagnostics.
    Outer {
        #[command(subcommand)]
        what: OuterCmd,
    },
    /// Local parametrix diagnostics.
    Local {
        #[command(subcommand)]
        what: LocalCmd,
    },
    /// Small-norm error problem.
    Error {
        #[command(subcommand)]
        what: ErrorCmd,
    },
    /// Run experiments, write reports and exit non-zero on a failed check.
    Verify {
        #[arg(value_enum)]
        target: Target,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// Edges, monodromy, the two routes to G, density mass and the sign chart.
    Check,
}

#[derive(Subcommand)]
enum OuterCmd {
    /// Jump residuals of N on the conductors and its deviation at infinity.
    Jumps,
}

#[derive(Subcommand)]
enum LocalCmd {
    /// sup |P N^-1 - I| on every disk boundary over the n-sweep.
    Match,
}

#[derive(Subcommand)]
enum ErrorCmd {
    /// Assemble W_R, solve for R_- and report R at the outer probes.
    Solve {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Dense,
    Neumann,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Oracle,
    Outer,
    Edges,
    Regularity,
    Error,
    Zeros,
    All,
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(ns) = &cli.n_sweep {
        cfg.n_sweep = ns.clone();
    }
    cfg.precision_override = cli.precision_bits;
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.display().to_string();
    }
    Ok(cfg)
}

fn deformation(cfg: &ExperimentConfig, n: usize) -> Result<Deformation> {
    let (curve, ratio) = cfg.curve(cfg.bits(n))?;
    let m = cfg.model(n, ratio)?;
    let cs = ContourSystem::for_curve(&curve, &cfg.geometry);
    Ok(Deformation::new(curve, m, cs))
}

fn print(v: &serde_json::Value) {
    // a closed pipe is not an error
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn solve(cfg: &ExperimentConfig, cli: &Cli, n1: usize, n2: usize, a1: Option<f64>, a2: Option<f64>) -> Result<()> {
    let m = ModelDescriptor::new(a1.unwrap_or(cfg.alpha1), a2.unwrap_or(cfg.alpha2), n1, n2)?;
    let bits = cfg.bits(m.n());
    let sol = solve_mop(&m, PrecisionContext::new(bits))?;
    let zeros: Vec<f64> = poly_zeros(&sol.poly)?.iter().map(|z| z.re_f64()).collect();
    print(&json!({
        "n1": n1, "n2": n2, "alpha1": m.alpha1, "alpha2": m.alpha2, "precision_bits": bits,
        "condition": sol.condition, "max_residual": sol.max_residual, "zeros": zeros,
    }));
    if let Some(dir) = &cli.out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("poly-{n1}-{n2}.json"));
        std::fs::write(&path, sol.poly.to_json())?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn curve_check(cfg: &ExperimentConfig) -> Result<()> {
    let d = deformation(cfg, cfg.n_sweep[0])?;
    let c = &d.curve;
    let p = d.prec;
    let z = Cx::new(p, 1.3, 0.7);
    let g_gap = (&c.g_eval(&z, Side::Upper)? - &c.g_path(&z, Side::Upper, 64)?).abs_f64();
    let mass = harness::limit_cdf(c, &[c.x0_f64()])[0];
    let mut edges = vec![json!({ "edge": "x0", "at": c.x0_f64(), "monodromy": c.monodromy(c.x0_f64(), 0.3)? })];
    if let Some(x1) = c.x1_f64() {
        edges.push(json!({ "edge": "-x1", "at": -x1, "monodromy": c.monodromy(-x1, 0.3)? }));
        edges.push(json!({ "edge": "0", "at": 0.0, "monodromy": c.monodromy(0.0, 0.2)? }));
    }
    let sc = sign_chart_check(&d, cfg.sampling.sign, cfg.tolerances.conductor_phi)?;
    print(&json!({
        "preset": cfg.preset, "precision_bits": p, "a": c.a_f64(), "edges": edges,
        "g_routes_gap": g_gap, "density_mass": mass, "sign_chart": sc,
    }));
    Ok(())
}

fn outer_jumps(cfg: &ExperimentConfig) -> Result<()> {
    let d = deformation(cfg, cfg.n_sweep[0])?;
    let n = OuterParametrix::for_deformation(&d)?;
    let eps = 2f64.powf(-0.45 * d.prec as f64);
    let r = jump_residual(&n, &d, cfg.sampling.jumps, eps, false)?;
    let rad = cfg.tolerances.infinity_radius;
    let mut dev: f64 = 0.0;
    for t in [0.25, 0.5, 0.75, -0.25, -0.5, -0.75] {
        dev = dev.max(n.eval(&Cx::from_c64(d.prec, C64::from_polar(rad, t * std::f64::consts::PI)))?.dist_identity());
    }
    print(&json!({ "jumps": r, "radius": rad, "max_deviation_from_identity": dev }));
    Ok(())
}

fn local_match(cfg: &ExperimentConfig) -> Result<()> {
    let mut rows = Vec::new();
    for &n in &cfg.n_sweep {
        let d = deformation(cfg, n)?;
        let outer = OuterParametrix::for_deformation(&d)?;
        let mut disks = serde_json::Map::new();
        for k in &d.cs.disks {
            let sup = LocalParametrix::build(&d, &outer, &k.name, None)?.matching_sup(cfg.sampling.matching)?;
            disks.insert(k.name.clone(), json!(sup));
        }
        rows.push(json!({ "n": n, "matching_sup": disks }));
    }
    print(&json!(rows));
    Ok(())
}

fn error_solve(cfg: &ExperimentConfig, cli: &Cli, n: Option<usize>, method: Method) -> Result<()> {
    let n = n.unwrap_or(cfg.n_sweep[0]);
    let d = deformation(cfg, n)?;
    let g = GlobalParametrix::build(&d, None)?;
    let jd = assemble_wr(&g, &d, &cfg.grid)?;
    let method = match method {
        Method::Auto => SolveMethod::Auto,
        Method::Dense => SolveMethod::Dense,
        Method::Neumann => SolveMethod::Neumann,
    };
    let rm = solve_rminus(&jd, method)?;
    let probes = cfg
        .probes
        .outer
        .iter()
        .map(|z| Ok(json!({ "z": z, "deviation": (reconstruct_r(&rm, &jd, C64::new(z[0], z[1]))? - M3::identity()).norm() })))
        .collect::<Result<Vec<_>>>()?;
    print(&json!({
        "n": n, "summary": jd.summary(), "method": format!("{:?}", rm.method), "iterations": rm.iterations,
        "residual": rm.residual, "contraction": rm.contraction, "r1_norm": extract_r1(&rm, &jd).norm(), "probes": probes,
    }));
    if let Some(dir) = &cli.out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("jumps-{n}.json"));
        std::fs::write(&path, serde_json::to_string(&jd.dump())?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn verify(cfg: &ExperimentConfig, target: Target, format: Format) -> Result<bool> {
    let want = |t: Target| target == t || target == Target::All;
    let mut reports: Vec<AsymptoticReport> = Vec::new();
    if want(Target::Oracle) {
        reports.push(harness::exp_oracle_integrity(cfg)?);
    }
    if want(Target::Outer) {
        reports.push(harness::exp_outer_asymptotics(cfg)?);
    }
    if want(Target::Edges) {
        reports.push(harness::exp_edge_asymptotics(cfg, Edge::Hard)?);
        reports.push(harness::exp_edge_asymptotics(cfg, Edge::Soft)?);
    }
    if want(Target::Regularity) {
        reports.push(harness::exp_regularity_suite(cfg)?);
    }
    if want(Target::Error) {
        reports.push(harness::exp_error_rhp(cfg)?);
    }
    if want(Target::Zeros) {
        reports.push(harness::exp_zero_distribution(cfg)?);
    }
    let dir = PathBuf::from(&cfg.out_dir);
    let mut all = true;
    for r in &reports {
        let path = harness::emit(r, format, &dir)?;
        let gating: Vec<_> = r.checks.iter().filter(|c| c.gating).collect();
        let passed = gating.iter().filter(|c| c.pass).count();
        println!("{} {}: {}/{} checks ({})", r.experiment, if r.pass { "PASS" } else { "FAIL" }, passed, gating.len(), path.display());
        for c in gating.iter().filter(|c| !c.pass) {
            println!("    [{}] {}: {:?}", c.criterion, c.rule, c.values);
        }
        all &= r.pass;
    }
    Ok(all)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = config(&cli)?;
    if cfg.n_sweep.is_empty() {
        bail!("empty n-sweep");
    }
    match &cli.cmd {
        Cmd::Solve { n1, n2, alpha1, alpha2 } => solve(&cfg, &cli, *n1, *n2, *alpha1, *alpha2)?,
        Cmd::Curve { what: CurveCmd::Check } => curve_check(&cfg)?,
        Cmd::Outer { what: OuterCmd::Jumps } => outer_jumps(&cfg)?,
        Cmd::Local { what: LocalCmd::Match } => local_match(&cfg)?,
        Cmd::Error { what: ErrorCmd::Solve { n, method } } => error_solve(&cfg, &cli, *n, *method)?,
        Cmd::Verify { target } => {
            if !verify(&cfg, *target, cli.format.into())? {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}
