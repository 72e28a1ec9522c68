use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde::Serialize;
use subconc_core::bounds::{self, BoundRow};
use subconc_core::montecarlo::{estimate_tail, sandwich_sweep, McOptions, SandwichRow};
use subconc_core::oracle::{reference_spaces, FiniteSpace, SuiteReport};
use subconc_core::sphere_nets::{self, SphereNet};
use subconc_core::{PriorFamily, PriorPoint};

use crate::config::{self, check_t_grid, parse_list, FamilySpec, FileConfig};
use crate::svg::{self, log10_floored};
use crate::{CliError, Common};

const DEFAULT_OUT: &str = "subconc-out";

fn core_err(context: &str) -> impl Fn(subconc_core::Error) -> CliError + '_ {
    move |e| CliError::config(format!("{context}: {e}"))
}

fn out_dir(common: &Common, file: &FileConfig) -> Result<PathBuf, CliError> {
    let dir = common
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn required_seed(common: &Common, file: &FileConfig) -> Result<u64, CliError> {
    common
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::config("a seed is required (--seed or `seed` in the config)"))
}

fn workers(common: &Common, file: &FileConfig) -> Result<Option<usize>, CliError> {
    match common.workers.or(file.workers) {
        Some(0) => Err(CliError::config("workers must be >= 1")),
        w => Ok(w),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::config(format!("json: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a C,
    seed: Option<u64>,
    workers: Option<usize>,
    wall_time_secs: f64,
    outputs: Vec<String>,
}

fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &str,
    config: &C,
    seed: Option<u64>,
    workers: Option<usize>,
    started: Instant,
    outputs: &[&str],
) -> Result<(), CliError> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        seed,
        workers,
        wall_time_secs: started.elapsed().as_secs_f64(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn list_arg<T: std::str::FromStr>(raw: &Option<String>, name: &str) -> Result<Option<Vec<T>>, CliError> {
    raw.as_deref()
        .map(|s| parse_list(s).map_err(|e| CliError::config(format!("--{name}: {e}"))))
        .transpose()
}

// ---------------------------------------------------------------- bounds

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    /// Almost-sure bound M
    #[arg(long = "m")]
    m: Option<f64>,
    #[arg(long)]
    sigma_sq: Option<f64>,
    /// Comma-separated deviation levels
    #[arg(long)]
    t_grid: Option<String>,
}

#[derive(Serialize)]
struct BoundsConfig {
    n: u64,
    d: usize,
    #[serde(rename = "M")]
    m: f64,
    sigma_sq: f64,
    t_grid: Vec<f64>,
}

pub fn bounds(common: &Common, file: &FileConfig, args: BoundsArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let sec = &file.bounds;
    let m = args.m.or(sec.m).unwrap_or(1.0);
    let cfg = BoundsConfig {
        n: args.n.or(sec.n).unwrap_or(1000),
        d: args.d.or(sec.d).unwrap_or(1),
        m,
        sigma_sq: args.sigma_sq.or(sec.sigma_sq).unwrap_or(0.25),
        t_grid: list_arg(&args.t_grid, "t-grid")?
            .or_else(|| sec.t_grid.clone())
            .unwrap_or_else(|| config::default_t_grid(m)),
    };
    check_t_grid(&cfg.t_grid)?;
    let rows = bounds::sweep(cfg.n, cfg.d, cfg.m, cfg.sigma_sq, &cfg.t_grid).map_err(core_err("bounds"))?;
    let dir = out_dir(common, file)?;
    write_csv(&dir.join("bounds.csv"), &rows)?;
    write_manifest(&dir, "bounds", &cfg, None, None, started, &["bounds.csv"])?;

    let k = cfg.t_grid.len();
    let column = |name: &str| -> Vec<&BoundRow> { rows.iter().filter(|r| r.bound_name == name).collect() };
    let mut problems = Vec::new();
    for name in ["azuma", "bernstein", "dimfree"] {
        if column(name).windows(2).any(|w| w[1].clamped > w[0].clamped) {
            problems.push(format!("{name} clamped values increase in t"));
        }
    }
    for (b, f) in column("bernstein").iter().zip(column("dimfree")) {
        if f.raw > b.raw {
            problems.push(format!("dimfree above bernstein at t = {}", b.t));
        }
    }
    println!("wrote {} rows ({} bounds x {k} t values) to {}", rows.len(), 3, dir.join("bounds.csv").display());
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::invariant(problems.join("; ")))
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Random corner priors added to the aligned and anti-aligned ones
    #[arg(long)]
    random_priors: Option<usize>,
    /// Uniform shift family: shift bound a
    #[arg(long)]
    a: Option<f64>,
    /// Uniform shift family: half-width r
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Serialize)]
struct SimulateConfig {
    family: FamilySpec,
    n: usize,
    t_grid: Vec<f64>,
    replicates: u64,
    random_priors: usize,
}

#[derive(Serialize)]
struct SandwichCsv {
    t: f64,
    n: usize,
    point: f64,
    ci_lo: f64,
    ci_hi: f64,
    exceedances: u64,
    replicates: u64,
    priors_searched: usize,
    argmax_prior: usize,
    azuma: f64,
    bernstein: f64,
    dimfree: f64,
    azuma_log10: f64,
    bernstein_log10: f64,
    dimfree_log10: f64,
    min_upper: f64,
    lower: Option<f64>,
    lower_valid: bool,
    upper_holds: bool,
    upper_certified: bool,
    lower_holds: bool,
}

impl From<&SandwichRow> for SandwichCsv {
    fn from(r: &SandwichRow) -> Self {
        Self {
            t: r.t,
            n: r.mc.n,
            point: r.mc.point,
            ci_lo: r.mc.ci_lo,
            ci_hi: r.mc.ci_hi,
            exceedances: r.mc.exceedances,
            replicates: r.mc.replicates,
            priors_searched: r.mc.priors_searched,
            argmax_prior: r.mc.argmax_prior,
            azuma: r.azuma.clamped,
            bernstein: r.bernstein.clamped,
            dimfree: r.dimfree.clamped,
            azuma_log10: r.azuma.log10_clamped(),
            bernstein_log10: r.bernstein.log10_clamped(),
            dimfree_log10: r.dimfree.log10_clamped(),
            min_upper: r.min_upper(),
            lower: r.lower.map(|l| l.value),
            lower_valid: r.lower.is_some_and(|l| l.valid),
            upper_holds: r.upper_holds(),
            upper_certified: r.mc.ci_hi <= r.min_upper(),
            lower_holds: r.lower_holds(),
        }
    }
}

pub fn simulate(common: &Common, file: &FileConfig, args: SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let seed = required_seed(common, file)?;
    let workers = workers(common, file)?;
    let sec = &file.simulate;
    let family = match (&sec.family, args.a, args.r) {
        (Some(FamilySpec::UniformShift { a, r }), fa, fr) => FamilySpec::UniformShift {
            a: fa.unwrap_or(*a),
            r: fr.unwrap_or(*r),
        },
        (Some(ball @ FamilySpec::BallShift { .. }), None, None) => ball.clone(),
        (Some(FamilySpec::BallShift { .. }), _, _) => {
            return Err(CliError::config("--a/--r only override a uniform_shift family"))
        }
        (None, fa, fr) => FamilySpec::UniformShift {
            a: fa.unwrap_or(1.0),
            r: fr.unwrap_or(0.5),
        },
    };
    let n = args.n.or(sec.n).unwrap_or(1000);
    let fam = family.build(n)?;
    let cfg = SimulateConfig {
        n,
        t_grid: list_arg(&args.t_grid, "t-grid")?
            .or_else(|| sec.t_grid.clone())
            .unwrap_or_else(|| config::default_t_grid(fam.m_bound())),
        replicates: args.replicates.or(sec.replicates).unwrap_or(config::DEFAULT_REPLICATES),
        random_priors: args.random_priors.or(sec.random_priors).unwrap_or(0),
        family,
    };
    check_t_grid(&cfg.t_grid)?;
    let mut opts = McOptions::new(cfg.replicates, seed);
    opts.workers = workers;
    let rows = sandwich_sweep(&fam, n, &cfg.t_grid, cfg.random_priors, &opts).map_err(core_err("simulate"))?;

    let dir = out_dir(common, file)?;
    let csv_rows: Vec<SandwichCsv> = rows.iter().map(SandwichCsv::from).collect();
    write_csv(&dir.join("sandwich.csv"), &csv_rows)?;
    std::fs::write(dir.join("tail.svg"), tail_plot(&rows, n))?;
    write_manifest(&dir, "simulate", &cfg, Some(seed), workers, started, &["sandwich.csv", "tail.svg"])?;

    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !(r.upper_holds() && r.lower_holds()))
        .map(|r| format!("t = {}", r.t))
        .collect();
    println!("{} rows written to {}", rows.len(), dir.join("sandwich.csv").display());
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::invariant(format!("sandwich violated at {}", bad.join(", "))))
    }
}

fn tail_plot(rows: &[SandwichRow], n: usize) -> String {
    let line = |label: &str, color: &'static str, dashed: bool, f: &dyn Fn(&SandwichRow) -> Option<f64>| svg::Series {
        label: label.into(),
        color,
        dashed,
        points: rows.iter().map(|r| (r.t, f(r))).collect(),
    };
    let series = [
        line("Monte Carlo", "black", false, &|r| Some(log10_floored(r.mc.point))),
        line("Azuma", "#d62728", true, &|r| Some(r.azuma.log10_clamped().max(svg::FLOOR.log10()))),
        line("Bernstein", "#1f77b4", true, &|r| Some(r.bernstein.log10_clamped().max(svg::FLOOR.log10()))),
        line("dimension-free", "#2ca02c", true, &|r| Some(r.dimfree.log10_clamped().max(svg::FLOOR.log10()))),
        line("lower bound", "#9467bd", false, &|r| {
            r.lower.filter(|l| l.valid).map(|l| log10_floored(l.value))
        }),
    ];
    let bars = [svg::Bars {
        color: "#555",
        bars: rows
            .iter()
            .map(|r| (r.t, log10_floored(r.mc.ci_lo), log10_floored(r.mc.ci_hi)))
            .collect(),
    }];
    svg::render(&format!("tail of rho(mean), n = {n}"), "t", &series, &bars)
}

// ---------------------------------------------------------------- sharpness

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated sample sizes
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    replicates: Option<u64>,
}

#[derive(Serialize)]
struct SharpnessConfig {
    a: f64,
    sigma: f64,
    n_grid: Vec<usize>,
    replicates: u64,
}

#[derive(Serialize)]
struct SharpnessCsv {
    n: usize,
    t: f64,
    sigma: f64,
    r: f64,
    point: f64,
    ci_lo: f64,
    ci_hi: f64,
    lower: f64,
    valid: bool,
    holds: bool,
}

pub fn sharpness(common: &Common, file: &FileConfig, args: SharpnessArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let seed = required_seed(common, file)?;
    let workers = workers(common, file)?;
    let sec = &file.sharpness;
    let cfg = SharpnessConfig {
        a: args.a.or(sec.a).unwrap_or(1.0),
        sigma: args.sigma.or(sec.sigma).unwrap_or(1.0),
        n_grid: list_arg(&args.n_grid, "n-grid")?
            .or_else(|| sec.n_grid.clone())
            .unwrap_or_else(|| vec![100, 400, 1600]),
        replicates: args.replicates.or(sec.replicates).unwrap_or(config::DEFAULT_REPLICATES),
    };
    if cfg.n_grid.is_empty() || cfg.n_grid.contains(&0) {
        return Err(CliError::config("n grid must be nonempty with n >= 1"));
    }
    if !(cfg.sigma > 0.0) {
        return Err(CliError::config("sigma must be > 0"));
    }
    let r = bounds::sharpness_radius(cfg.sigma);
    let mut opts = McOptions::new(cfg.replicates, seed);
    opts.workers = workers;
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let fam = PriorFamily::uniform_shift(cfg.a, r, n).map_err(core_err("family"))?;
        let t = cfg.sigma / (4.0 * (n as f64).sqrt());
        let est = estimate_tail(&fam, &[PriorPoint::constant(vec![cfg.a], n)], n, t, &opts).map_err(core_err("sharpness"))?;
        let lb = bounds::sharpness_lower_bound(n as u64, cfg.sigma, t).map_err(core_err("sharpness"))?;
        rows.push(SharpnessCsv {
            n,
            t,
            sigma: cfg.sigma,
            r,
            point: est.point,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            lower: lb.value,
            valid: lb.valid,
            holds: !lb.valid || est.ci_hi >= lb.value,
        });
    }
    let dir = out_dir(common, file)?;
    write_csv(&dir.join("sharpness.csv"), &rows)?;
    write_manifest(&dir, "sharpness", &cfg, Some(seed), workers, started, &["sharpness.csv"])?;
    for row in &rows {
        println!(
            "n = {:<6} t = {:.5}  P(mean - a > t) in [{:.4}, {:.4}]  lower bound {:.4}  {}",
            row.n,
            row.t,
            row.ci_lo,
            row.ci_hi,
            row.lower,
            if row.holds { "ok" } else { "VIOLATED" }
        );
    }
    if rows.iter().all(|r| r.holds) {
        Ok(())
    } else {
        Err(CliError::invariant("lower bound above the Monte Carlo upper limit"))
    }
}

// ---------------------------------------------------------------- oracle

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Comma-separated shipped space names or paths to space files
    #[arg(long)]
    spaces: Option<String>,
    #[arg(long)]
    probes: Option<usize>,
}

#[derive(Serialize)]
struct OracleReport {
    all_ok: bool,
    spaces: Vec<SuiteReport>,
}

fn load_space(name: &str, shipped: &[FiniteSpace]) -> Result<FiniteSpace, CliError> {
    if let Some(s) = shipped.iter().find(|s| s.name() == name) {
        return Ok(s.clone());
    }
    let text = std::fs::read_to_string(name).map_err(|e| {
        CliError::config(format!("`{name}` is neither a shipped space nor a readable file: {e}"))
    })?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("space file {name}: {e}")))
}

pub fn oracle(common: &Common, file: &FileConfig, args: OracleArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let shipped = reference_spaces();
    let names: Vec<String> = match args.spaces.as_deref() {
        Some(s) => parse_list(s).map_err(CliError::config)?,
        None => file
            .oracle
            .spaces
            .clone()
            .unwrap_or_else(|| shipped.iter().map(|s| s.name().to_string()).collect()),
    };
    if names.is_empty() {
        return Err(CliError::config("space list is empty"));
    }
    let probes = args.probes.or(file.oracle.probes).unwrap_or(64);
    let seed = common.seed.or(file.seed).unwrap_or(0);
    let spaces = names.iter().map(|n| load_space(n, &shipped)).collect::<Result<Vec<_>, _>>()?;
    let reports = spaces
        .iter()
        .map(|s| s.run_suite(probes, seed).map_err(core_err(s.name())))
        .collect::<Result<Vec<_>, _>>()?;
    let report = OracleReport {
        all_ok: reports.iter().all(|r| r.verdict_ok),
        spaces: reports,
    };
    let dir = out_dir(common, file)?;
    write_json(&dir.join("oracle.json"), &report)?;
    #[derive(Serialize)]
    struct OracleConfig<'a> {
        spaces: &'a [String],
        probes: usize,
    }
    write_manifest(&dir, "oracle", &OracleConfig { spaces: &names, probes }, Some(seed), None, started, &["oracle.json"])?;
    for r in &report.spaces {
        println!(
            "{:<20} independence {:>9.2e} ({})  theta {:>9.2e}  domination {:>9.2e}  moment {:.6} <= {:.6}  {}",
            r.space,
            r.independence.max_discrepancy,
            if r.independence.passed { "independent" } else { "not independent" },
            r.theta.iter().map(|t| t.max_discrepancy).fold(0.0, f64::max),
            r.domination.max_discrepancy,
            r.moment.lhs,
            r.moment.rhs,
            if r.verdict_ok { "as expected" } else { "UNEXPECTED" }
        );
    }
    if report.all_ok {
        Ok(())
    } else {
        Err(CliError::invariant("some space did not produce its expected verdicts"))
    }
}

// ---------------------------------------------------------------- net

#[derive(Args, Debug)]
pub struct NetArgs {
    #[arg(long)]
    d: Option<usize>,
    /// Fresh directions for the covering-radius check
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    transfer_trials: Option<usize>,
}

#[derive(Serialize)]
struct NetConfig {
    d: usize,
    samples: usize,
    transfer_trials: usize,
}

#[derive(Serialize)]
struct NetSummary {
    d: usize,
    size: usize,
    budget: u64,
    within_budget: bool,
    budget_asserted: bool,
    build_radius: f64,
    covering_radius: f64,
    transfer_trials: usize,
    transfer_failures: u64,
}

pub fn net(common: &Common, file: &FileConfig, args: NetArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let sec = &file.net;
    let cfg = NetConfig {
        d: args.d.or(sec.d).unwrap_or(2),
        samples: args.samples.or(sec.samples).unwrap_or(sphere_nets::VERIFY_SAMPLES),
        transfer_trials: args.transfer_trials.or(sec.transfer_trials).unwrap_or(100_000),
    };
    if !(1..=sphere_nets::MAX_NET_DIM).contains(&cfg.d) {
        return Err(CliError::config(format!("d = {} outside 1..={}", cfg.d, sphere_nets::MAX_NET_DIM)));
    }
    if cfg.samples == 0 {
        return Err(CliError::config("samples must be >= 1"));
    }
    let seed = common.seed.or(file.seed).unwrap_or(sphere_nets::DEFAULT_NET_SEED);
    let net: SphereNet = sphere_nets::build_half_net_seeded(cfg.d, seed).map_err(core_err("net"))?;
    let radius = sphere_nets::covering_radius(&net, cfg.samples, seed.wrapping_add(1)).map_err(core_err("net"))?;
    let failures = sphere_nets::covering_transfer_trials(&net, cfg.transfer_trials, 100, 0.05, seed.wrapping_add(2));
    let summary = NetSummary {
        d: cfg.d,
        size: net.len(),
        budget: net.budget(),
        within_budget: net.len() as u64 <= net.budget(),
        budget_asserted: cfg.d <= 4,
        build_radius: net.build_radius,
        covering_radius: radius,
        transfer_trials: cfg.transfer_trials,
        transfer_failures: failures,
    };
    let dir = out_dir(common, file)?;
    let header: Vec<String> = (1..=cfg.d).map(|k| format!("x{k}")).collect();
    std::fs::write(dir.join("net.csv"), header.join(",") + "\n" + &sphere_nets::net_table(&net))?;
    write_json(&dir.join("net.json"), &summary)?;
    write_manifest(&dir, "net", &cfg, Some(seed), None, started, &["net.csv", "net.json"])?;
    println!(
        "d = {}: {} points (budget 5^d = {}), covering radius {:.4} on {} samples, {} transfer failures",
        summary.d, summary.size, summary.budget, radius, cfg.samples, failures
    );
    let mut problems = Vec::new();
    if radius > net.target_radius {
        problems.push(format!("covering radius {radius} above 1/2"));
    }
    if summary.budget_asserted && !summary.within_budget {
        problems.push(format!("size {} above 5^d", summary.size));
    }
    if failures > 0 {
        problems.push(format!("{failures} transfer failures"));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::invariant(problems.join("; ")))
    }
}
