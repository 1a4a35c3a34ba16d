use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qslab::disk_bundle::{
    bracket_identity_residual, fiber_integral_residual, flow_commutation_residual, sample_points, seed_ring,
    sgrad_pushforward_residual, BaseFunction, GridSpec, ThetaProfile,
};
use qslab::expr::FieldExpr;
use qslab::group_qm::{brooks_homogenized, brooks_qm, defect_lower_bound, homogenize, GroupWord, WordSampler};
use qslab::harness::{self, ExperimentConfig, Report, Suite};
use qslab::hirzebruch::{classify, verify_class_identities};
use qslab::reeb_median::{build_reeb, median, tau_med};
use qslab::sphere_field::{cap_mask, hamiltonian_flow, io as sphere_io, make_mesh, HamiltonianPath};
use qslab::{Error, Result};

#[derive(Parser)]
#[command(name = "qslab", version, about = "Quasi-states and quasi-morphisms on S² and its disk bundle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Median quasi-state axioms and the bracket inequality report.
    Axioms(SuiteArgs),
    /// Bracket identity for lifted functions.
    Poisson(SuiteArgs),
    /// Fiber integral identity.
    Fiber(SuiteArgs),
    /// Projection of lifted flows.
    Commute(SuiteArgs),
    /// Reduction of quasi-states and quasi-morphisms.
    Reduce(SuiteArgs),
    /// Free-group quasi-morphism lemmas.
    Group(SuiteArgs),
    /// Every suite.
    All(SuiteArgs),
    /// Hirzebruch surface arithmetic; with --k, a single classification.
    Hirzebruch {
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Brooks quasi-morphism of a pattern word.
    GroupQm {
        #[arg(long, default_value = "ab")]
        pattern: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 64)]
        power: u32,
    },
    /// Mesh and field export with a flow energy check.
    Sphere {
        #[arg(long, default_value_t = 4)]
        level: u32,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value = "z")]
        field: String,
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// Median quasi-state of a field.
    Median {
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 4)]
        level: u32,
        /// Area of a cap about the north pole whose quasi-measure is estimated.
        #[arg(long)]
        tau_cap_area: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// A single disk bundle check.
    Bundle {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = GridSpec::default())]
        grid: GridSpec,
        #[arg(long, value_enum)]
        check: BundleCheck,
        #[arg(long, default_value_t = 5)]
        level: u32,
        #[arg(long, default_value = "x*y + z")]
        field: String,
        #[arg(long, default_value = "y - x*z")]
        other: String,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BundleCheck {
    Poisson,
    Fiber,
    Commute,
    Sgrad,
}

#[derive(Args, Default)]
struct SuiteArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Falls back to the config, then QSLAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    bundle_level: Option<u32>,
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    group_pairs: Option<usize>,
    #[arg(long)]
    k_max: Option<i64>,
    /// median | mean | point:x,y,z[,r,phi]
    #[arg(long)]
    zeta: Option<String>,
    /// zero | calabi:x,y,z,area
    #[arg(long)]
    mu: Option<String>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("QSLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("QSLAB_SEED is not an integer: `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> Result<u64> {
    Ok(flag.or(from_config).or(env_seed()?).unwrap_or(ExperimentConfig::default().seed))
}

fn build_config(suite: Suite, a: &SuiteArgs) -> Result<ExperimentConfig> {
    let (mut c, config_seed) = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let raw: Value = serde_json::from_str(&text)?;
            let seed = raw.get("seed").and_then(Value::as_u64);
            (serde_json::from_value::<ExperimentConfig>(raw)?, seed)
        }
        None => (ExperimentConfig::default(), None),
    };
    c.suite = suite;
    c.seed = resolve_seed(a.seed, config_seed)?;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f.clone() { c.$f = v; } )* };
    }
    set!(level, bundle_level, grid, eps, dt, trials, pairs, group_pairs, k_max, zeta, mu);
    c.validate()?;
    Ok(c)
}

/// Writes to stdout, treating a closed pipe as success.
fn print_out(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => print_out(text)?,
    }
    Ok(())
}

fn run_suite(suite: Suite, a: &SuiteArgs) -> Result<bool> {
    let config = build_config(suite, a)?;
    let report: Report = harness::run(&config)?;
    for r in &report.records {
        eprintln!("{} {} = {:.6e} (tolerance {:.1e})", if r.pass { "PASS" } else { "FAIL" }, r.name, r.value, r.tolerance);
    }
    emit(&report.to_json()?, a.out.as_deref())?;
    Ok(report.pass)
}

fn hirzebruch_single(k: i64, as_json: bool) -> Result<bool> {
    let rep = verify_class_identities(k)?;
    if as_json {
        print_out(&serde_json::to_string_pretty(&rep)?)?;
    } else {
        let mut text = format!("k = {k}: {:?}", classify(k)?);
        for i in &rep.identities {
            text.push_str(&format!("\n  {} = {} (expected {})", i.name, i.got, i.expected));
        }
        print_out(&text)?;
    }
    Ok(true)
}

fn group_qm(pattern: &str, trials: usize, max_len: usize, seed: Option<u64>, power: u32) -> Result<bool> {
    let seed = resolve_seed(seed, None)?;
    let p = GroupWord::parse(pattern)?;
    let mu = brooks_qm(&p)?;
    let hom = brooks_homogenized(&p)?;
    let alphabet = p.alphabet_used().max(2);
    let sampled = defect_lower_bound(&mu, &mut WordSampler::new(alphabet, max_len, seed), trials);
    let sampled_h = defect_lower_bound(&hom, &mut WordSampler::new(alphabet, max_len, seed ^ 1), trials);
    let h = homogenize(&mu, &p, power)?;
    let out = json!({
        "pattern": pattern,
        "defect_bound": mu.defect_bound(),
        "sampled_defect": sampled,
        "homogenized_defect_bound": hom.defect_bound(),
        "sampled_homogenized_defect": sampled_h,
        "homogenization": { "power": power, "value": h.value, "error_radius": h.error_radius, "exact": hom.evaluate(&p) },
        "seed": seed,
        "trials": trials,
    });
    print_out(&serde_json::to_string_pretty(&out)?)?;
    Ok(sampled <= mu.defect_bound().unwrap_or(f64::INFINITY)
        && sampled_h <= hom.defect_bound().unwrap_or(f64::INFINITY))
}

fn sphere(level: u32, dt: f64, field: &str, mesh_out: Option<&Path>, field_out: Option<&Path>) -> Result<bool> {
    let mesh = make_mesh(level);
    let expr = FieldExpr::parse(field)?;
    let h = expr.sample(&mesh)?;
    if let Some(p) = mesh_out {
        sphere_io::write_off(&mesh, BufWriter::new(fs::File::create(p)?))?;
    }
    if let Some(p) = field_out {
        sphere_io::write_field_csv(&h, BufWriter::new(fs::File::create(p)?))?;
    }
    let path = HamiltonianPath::autonomous(&h);
    let seeds: Vec<_> = mesh.vertices().iter().step_by((mesh.num_vertices() / 12).max(1)).copied().collect();
    let flow = hamiltonian_flow(&path, &seeds, dt)?;
    let mut drift: f64 = 0.0;
    for (p, q) in seeds.iter().zip(flow.final_positions()) {
        drift = drift.max((h.interpolate(q)? - h.interpolate(*p)?).abs());
    }
    let out = json!({
        "level": level,
        "vertices": mesh.num_vertices(),
        "edges": mesh.num_edges(),
        "euler_characteristic": mesh.euler_characteristic(),
        "mesh_size": mesh.mesh_size(),
        "field": expr.source(),
        "integral": h.integrate(),
        "min": h.min(),
        "max": h.max(),
        "flow": { "dt": dt, "seeds": seeds.len(), "energy_drift": drift },
    });
    print_out(&serde_json::to_string_pretty(&out)?)?;
    Ok(true)
}

fn median_cmd(field: &str, level: u32, tau_cap_area: Option<f64>, report: Option<&Path>) -> Result<bool> {
    let mesh = make_mesh(level);
    let h = FieldExpr::parse(field)?.sample(&mesh)?;
    let graph = build_reeb(&h)?;
    let m = median(&graph);
    let tau = match tau_cap_area {
        Some(a) => Some(tau_med(&mesh, &cap_mask(&mesh, [0.0, 0.0, 1.0], a), 16)?),
        None => None,
    };
    let out = json!({
        "field": field,
        "level": level,
        "zeta_med": m.level,
        "balanced": m.is_balanced(),
        "leaves": graph.leaves(),
        "branch_nodes": graph.branch_nodes(),
        "tau_cap": tau,
    });
    print_out(&serde_json::to_string_pretty(&out)?)?;
    if let Some(p) = report {
        let full = json!({ "summary": out, "reeb": serde_json::from_str::<Value>(&graph.to_json()?)? });
        fs::write(p, serde_json::to_string_pretty(&full)?)?;
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn bundle(
    eps: f64,
    grid: GridSpec,
    check: BundleCheck,
    level: u32,
    field: &str,
    other: &str,
    points: usize,
    dt: f64,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<bool> {
    let seed = resolve_seed(seed, None)?;
    let theta = ThetaProfile::new(eps)?;
    let mesh = make_mesh(level);
    let base = |s: &str| -> Result<BaseFunction> {
        let f = FieldExpr::parse(s)?.compile();
        Ok(BaseFunction::smooth(move |p| f(p, 0.0)))
    };
    let pts = sample_points(points, theta.core_radius(), seed);
    let (name, report, pass) = match check {
        BundleCheck::Poisson => {
            let r = bracket_identity_residual(&base(field)?, &base(other)?, theta, &mesh, &pts, grid.steps())?;
            ("poisson", serde_json::to_value(r)?, r.max_rel_first <= 2e-2)
        }
        BundleCheck::Fiber => {
            let r = fiber_integral_residual(&FieldExpr::parse(field)?.sample(&mesh)?, theta, grid)?;
            ("fiber", serde_json::to_value(r)?, r.residual <= 1e-2)
        }
        BundleCheck::Commute => {
            let path = FieldExpr::parse(field)?.path(&mesh, 1)?;
            let r = flow_commutation_residual(&path, theta, &seed_ring(points, 0.5 * theta.core_radius()), dt)?;
            ("commute", serde_json::to_value(r)?, r.max_distance <= 5e-3 && r.r_conserved)
        }
        BundleCheck::Sgrad => {
            let r = sgrad_pushforward_residual(&base(field)?, theta, &mesh, &pts, grid.steps())?;
            ("sgrad", serde_json::to_value(r)?, r.max_rel <= 2e-2)
        }
    };
    let text = serde_json::to_string_pretty(&json!({
        "check": name,
        "eps": eps,
        "grid": grid.to_string(),
        "level": level,
        "seed": seed,
        "pass": pass,
        "report": report,
    }))?;
    emit(&text, out)?;
    Ok(pass)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Axioms(a) => run_suite(Suite::Axioms, &a),
        Command::Poisson(a) => run_suite(Suite::Poisson, &a),
        Command::Fiber(a) => run_suite(Suite::Fiber, &a),
        Command::Commute(a) => run_suite(Suite::Commute, &a),
        Command::Reduce(a) => run_suite(Suite::Reduce, &a),
        Command::Group(a) => run_suite(Suite::Group, &a),
        Command::All(a) => run_suite(Suite::All, &a),
        Command::Hirzebruch { k: Some(k), json, .. } => hirzebruch_single(k, json),
        Command::Hirzebruch { k: None, suite, .. } => run_suite(Suite::Hirzebruch, &suite),
        Command::GroupQm {
            pattern,
            trials,
            max_len,
            seed,
            power,
        } => group_qm(&pattern, trials, max_len, seed, power),
        Command::Sphere {
            level,
            dt,
            field,
            mesh_out,
            field_out,
        } => sphere(level, dt, &field, mesh_out.as_deref(), field_out.as_deref()),
        Command::Median {
            field,
            level,
            tau_cap_area,
            report,
        } => median_cmd(&field, level, tau_cap_area, report.as_deref()),
        Command::Bundle {
            eps,
            grid,
            check,
            level,
            field,
            other,
            points,
            dt,
            seed,
            out,
        } => bundle(eps, grid, check, level, &field, &other, points, dt, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(cli);
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
