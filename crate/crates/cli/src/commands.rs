use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use rkpair::analyze::{
    dso, error_norms, interpolant_check, metrics, residuals, stability_boundary,
};
use rkpair::bench::{
    boundary_csv, default_atol_grid, family_scan, family_scan_csv, family_scan_plot_script,
    work_precision, work_precision_csv, work_precision_plot_script,
};
use rkpair::derive::{
    construct_bprime_general, construct_family, BPrimeGeneralSpec, CRoot, DeriveError, Family,
};
use rkpair::integrate::{integrate_adaptive, ControllerConfig};
use rkpair::problems::{problem, ProblemId};
use rkpair::scalar::{Mode, Rational, Scalar};
use rkpair::tableau::{builtin, builtin_names, load_path, save_path};
use rkpair::{AnyPair, ButcherPair};

pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
    fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
    fn verification(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn from_derive_error(e: DeriveError) -> Failure {
    match e {
        DeriveError::BracketNoSignChange { .. } | DeriveError::RootFind(_) => {
            Failure::numerical(e.to_string())
        }
        _ => Failure::input(e.to_string()),
    }
}

/// Output directory: `--out` wins, then `RKPAIR_OUT`, then the working dir.
fn out_path(out: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => match std::env::var_os("RKPAIR_OUT") {
            Some(dir) => Path::new(&dir).join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}

fn load_pair(name_or_path: &str) -> Result<AnyPair, Failure> {
    if builtin_names().contains(&name_or_path) {
        return builtin(name_or_path).map_err(|e| Failure::input(e.to_string()));
    }
    let (pair, warnings) =
        load_path(name_or_path).map_err(|e| Failure::input(e.to_string()))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(pair)
}

fn parse_params(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for item in text.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("malformed parameter `{item}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn take<S: Scalar>(map: &BTreeMap<String, String>, key: &str) -> Result<S, Failure> {
    let token = map
        .get(key)
        .ok_or_else(|| Failure::input(format!("missing parameter `{key}`")))?;
    S::parse(token).map_err(|e| Failure::input(format!("parameter `{key}`: {e}")))
}

#[derive(Args)]
pub struct DeriveArgs {
    /// A | Aprime | B | Bprime-c3-0 | Bprime-c3-c2 | C | Bprime
    #[arg(long)]
    family: String,
    /// Comma-separated k=v list, e.g. c2=1/6,c3=7/32,c5=3/4,c6=7/8
    #[arg(long)]
    params: String,
    /// rational (exact, default) or float
    #[arg(long, default_value = "rational")]
    mode: String,
    /// c5 root bracket for the general Bprime derivation, e.g. 0.7,0.85
    #[arg(long)]
    bracket: Option<String>,
    /// Tableau file destination
    #[arg(long)]
    out: Option<PathBuf>,
}

fn family_spec<S: Scalar>(
    family: &str,
    map: &BTreeMap<String, String>,
) -> Result<Family<S>, Failure> {
    match family {
        "A" => Ok(Family::A {
            c2: take(map, "c2")?,
            c3: take(map, "c3")?,
            c5: take(map, "c5")?,
            c6: take(map, "c6")?,
        }),
        "Aprime" => Ok(Family::APrime {
            c2: take(map, "c2")?,
            c3: take(map, "c3")?,
            c4: take(map, "c4")?,
            c5: take(map, "c5")?,
        }),
        "B" => Ok(Family::B {
            c2: take(map, "c2")?,
            c3: take(map, "c3")?,
            c5: take(map, "c5")?,
            c6: take(map, "c6")?,
        }),
        "C" => {
            let root = match map.get("root").map(String::as_str) {
                None | Some("plus") => CRoot::Plus,
                Some("minus") => CRoot::Minus,
                Some(other) => {
                    return Err(Failure::input(format!(
                        "root must be plus or minus, got `{other}`"
                    )))
                }
            };
            Ok(Family::C {
                c2: take(map, "c2")?,
                c3: take(map, "c3")?,
                c5: take(map, "c5")?,
                c6: take(map, "c6")?,
                root,
            })
        }
        "Bprime-c3-0" => Ok(Family::BPrimeC3Zero {
            c2: take(map, "c2")?,
            c4: take(map, "c4")?,
            c5: take(map, "c5")?,
        }),
        "Bprime-c3-c2" => Ok(Family::BPrimeC3EqC2 {
            c2: take(map, "c2")?,
            c5: take(map, "c5")?,
            cp3: map
                .get("cp3")
                .map(|t| S::parse(t))
                .transpose()
                .map_err(|e| Failure::input(e.to_string()))?,
        }),
        other => Err(Failure::input(format!(
            "unknown family `{other}` (expected A, Aprime, B, Bprime-c3-0, Bprime-c3-c2, C, Bprime)"
        ))),
    }
}

fn print_pair_summary<S: Scalar>(pair: &ButcherPair<S>) {
    let norms = error_norms(pair).expect("tree orders in range");
    let m = metrics(pair);
    println!("T6          = {:.5e}", norms.t6);
    println!("T7          = {:.5e}", norms.t7);
    match &m.k6 {
        Some(k6) if S::MODE == Mode::Rational => {
            println!("k6          = {} ({:.6e})", k6.format(), k6.to_f64())
        }
        Some(k6) => println!("k6          = {:.12e}", k6.to_f64()),
        None => println!("k6          = n/a (non-FSAL shape)"),
    }
    println!("max |a_ij|  = {:.5}", m.max_abs_a.to_f64());
    println!("min b_j!=0  = {:.5}", m.min_nonzero_b.to_f64());
}

pub fn derive(args: DeriveArgs) -> CmdResult {
    let map = parse_params(&args.params)?;
    let pair: AnyPair = match (args.family.as_str(), args.mode.as_str()) {
        ("Bprime", _) => {
            let bracket_text = args
                .bracket
                .as_ref()
                .ok_or_else(|| Failure::input("the general Bprime derivation needs --bracket lo,hi"))?;
            let (lo, hi) = bracket_text
                .split_once(',')
                .ok_or_else(|| Failure::input("bracket must be lo,hi"))?;
            let parse = |s: &str| {
                f64::parse(s.trim()).map_err(|e| Failure::input(format!("bracket: {e}")))
            };
            let spec = BPrimeGeneralSpec {
                c2: take(&map, "c2")?,
                c3: take(&map, "c3")?,
                c4: take(&map, "c4")?,
                cp3: take(&map, "cp3")?,
                bracket: (parse(lo)?, parse(hi)?),
            };
            let result = construct_bprime_general(&spec).map_err(from_derive_error)?;
            println!("solved c5   = {:.15}", result.c5);
            println!("residual    = {:.3e}", result.residual);
            AnyPair::Float(result.pair)
        }
        (family, "rational") => {
            let spec = family_spec::<Rational>(family, &map)?;
            AnyPair::Rational(construct_family(&spec).map_err(from_derive_error)?)
        }
        (family, "float") => {
            let spec = family_spec::<f64>(family, &map)?;
            AnyPair::Float(construct_family(&spec).map_err(from_derive_error)?)
        }
        (_, mode) => return Err(Failure::input(format!("unknown mode `{mode}`"))),
    };
    match &pair {
        AnyPair::Rational(p) => print_pair_summary(p),
        AnyPair::Float(p) => print_pair_summary(p),
    }
    let path = out_path(&args.out, &format!("{}.rktab", pair.name()));
    save_path(&pair, &path).map_err(|e| Failure::input(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Registry name or tableau file path
    #[arg(long)]
    pair: String,
    /// Check weight conditions through this order (5, 6, or 7)
    #[arg(long, default_value_t = 5)]
    order: u32,
}

fn verify_pair<S: Scalar>(pair: &ButcherPair<S>, order: u32) -> CmdResult {
    let report = residuals(pair, order)
        .map_err(|e| Failure::input(e.to_string()))?;
    println!("{:37} {:>6} {:>13} {:>13}", "tree", "t!", "b residual", "d residual");
    for e in &report.entries {
        println!(
            "{:37} {:>6} {:>13.3e} {:>13.3e}",
            format!("{}", e.tree),
            e.density,
            e.b_residual.to_f64(),
            e.d_residual.to_f64()
        );
    }
    println!();
    print_pair_summary(pair);
    let d_order = order.saturating_sub(1).min(4);
    if report.satisfied_through(order, d_order) {
        println!("all conditions hold through order {order}");
        Ok(())
    } else {
        let violated = report.violated_trees(order, d_order);
        Err(Failure::verification(format!(
            "{} condition(s) violated through order {order}: {}",
            violated.len(),
            violated
                .iter()
                .map(|e| format!("{}", e.tree))
                .collect::<Vec<_>>()
                .join(" ")
        )))
    }
}

pub fn verify(args: VerifyArgs) -> CmdResult {
    if !(5..=7).contains(&args.order) {
        return Err(Failure::input("order must be 5, 6, or 7"));
    }
    match load_pair(&args.pair)? {
        AnyPair::Rational(p) => verify_pair(&p, args.order),
        AnyPair::Float(p) => verify_pair(&p, args.order),
    }
}

#[derive(Args)]
pub struct ReportArgs {
    /// Registry name or tableau file path
    #[arg(long)]
    pair: String,
}

fn report_pair<S: Scalar>(pair: &ButcherPair<S>) -> CmdResult {
    println!("name        = {}", pair.name);
    println!("family      = {}", pair.family);
    if !pair.source.is_empty() {
        println!("source      = {}", pair.source);
    }
    println!("mode        = {}", S::MODE);
    println!("fsal        = {}", pair.fsal);
    println!("stages      = {} (effective {})", pair.stages(), pair.effective_stages());
    let violations = pair.validate();
    if violations.is_empty() {
        println!("structure   = valid");
    } else {
        for v in &violations {
            println!("violation   : {v}");
        }
    }
    print_pair_summary(pair);
    let d = dso(pair);
    println!("DSO         = {} (5th order), {} (4th order)", d.fifth, d.fourth);
    let fourth = pair.fourth_order_weights();
    println!(
        "b + d       = [{}]",
        fourth
            .iter()
            .map(Scalar::format)
            .collect::<Vec<_>>()
            .join(", ")
    );
    let report = residuals(pair, 5).map_err(|e| Failure::input(e.to_string()))?;
    println!(
        "order check = {}",
        if report.satisfied_through(5, 4) {
            "17 weight + 8 difference conditions hold".to_string()
        } else {
            format!("worst residual {:.3e}", report.worst_abs_residual())
        }
    );
    if pair.interpolant.is_some() {
        let thetas: Vec<S> = (0..=4).map(|k| S::from_ratio(k, 4)).collect();
        let interp = interpolant_check(pair, &thetas)
            .map_err(|e| Failure::input(e.to_string()))?;
        println!(
            "interpolant = worst continuous-condition residual {:.3e}",
            interp.worst_abs_residual()
        );
    }
    Ok(())
}

pub fn report(args: ReportArgs) -> CmdResult {
    match load_pair(&args.pair)? {
        AnyPair::Rational(p) => report_pair(&p),
        AnyPair::Float(p) => report_pair(&p),
    }
}

#[derive(Args)]
pub struct IntegrateArgs {
    /// Registry name or tableau file path
    #[arg(long)]
    pair: String,
    /// A3 | A4 | D5 | PLEI
    #[arg(long)]
    problem: String,
    /// Absolute error tolerance
    #[arg(long)]
    atol: f64,
    /// Trajectory CSV destination
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn integrate(args: IntegrateArgs) -> CmdResult {
    let pair = load_pair(&args.pair)?.to_float();
    let id = ProblemId::parse(&args.problem).map_err(|e| Failure::input(e.to_string()))?;
    let p = problem(id);
    let cfg = ControllerConfig::new(args.atol);
    let stats = integrate_adaptive(&pair, &p, p.t0, p.tend, &p.x0, &cfg)
        .map_err(|e| Failure::numerical(e.to_string()))?;
    let error = p
        .measure_error(&stats)
        .map_err(|e| Failure::numerical(e.to_string()))?;
    println!("accepted    = {}", stats.n_accept);
    println!("rejected    = {}", stats.n_reject);
    println!("rhs evals   = {}", stats.n_rhs);
    println!("error       = {error:.6e}");
    if args.out.is_some() || std::env::var_os("RKPAIR_OUT").is_some() {
        let path = out_path(&args.out, &format!("{}-{}.csv", pair.name, id.name()));
        let mut csv = String::from("t");
        for i in 0..p.x0.len() {
            csv.push_str(&format!(",x{}", i + 1));
        }
        csv.push('\n');
        for (t, x) in &stats.trajectory {
            csv.push_str(&format!("{t}"));
            for v in x {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
        std::fs::write(&path, csv).map_err(|e| Failure::input(e.to_string()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated registry names or tableau paths
    #[arg(long)]
    pairs: String,
    /// A3 | A4 | D5 | PLEI
    #[arg(long)]
    problem: String,
    /// Loosest tolerance of the grid
    #[arg(long, default_value_t = 1e-3)]
    atol_max: f64,
    /// Tightest tolerance of the grid
    #[arg(long, default_value_t = 1e-11)]
    atol_min: f64,
    /// Number of logarithmic grid points
    #[arg(long, default_value_t = 25)]
    atol_points: usize,
    /// CSV destination
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit a gnuplot script here
    #[arg(long)]
    plot: Option<PathBuf>,
}

pub fn bench(args: BenchArgs) -> CmdResult {
    let id = ProblemId::parse(&args.problem).map_err(|e| Failure::input(e.to_string()))?;
    let p = problem(id);
    let mut pairs = Vec::new();
    for name in args.pairs.split(',').filter(|s| !s.is_empty()) {
        pairs.push(load_pair(name.trim())?.to_float());
    }
    if pairs.is_empty() {
        return Err(Failure::input("no pairs given"));
    }
    let grid: Vec<f64> = if args.atol_max == 1e-3 && args.atol_min == 1e-11 && args.atol_points == 25
    {
        default_atol_grid()
    } else {
        if !(args.atol_max > args.atol_min && args.atol_min > 0.0 && args.atol_points >= 2) {
            return Err(Failure::input("need atol_max > atol_min > 0 and at least 2 points"));
        }
        let (lo, hi) = (args.atol_min.log10(), args.atol_max.log10());
        (0..args.atol_points)
            .map(|k| 10f64.powf(hi + (lo - hi) * k as f64 / (args.atol_points - 1) as f64))
            .collect()
    };
    let report = work_precision(&pairs, &p, &grid);
    for flag in &report.monotonicity_flags {
        eprintln!("warning: {flag}");
    }
    let csv = work_precision_csv(&report);
    let path = out_path(&args.out, &format!("bench-{}.csv", id.name()));
    std::fs::write(&path, csv).map_err(|e| Failure::input(e.to_string()))?;
    println!("wrote {} ({} records)", path.display(), report.records.len());
    if let Some(plot) = &args.plot {
        let ids: Vec<String> = pairs.iter().map(|p| p.name.clone()).collect();
        let png = plot.with_extension("png");
        let script = work_precision_plot_script(
            &path.display().to_string(),
            &ids,
            &png.display().to_string(),
        );
        std::fs::write(plot, script).map_err(|e| Failure::input(e.to_string()))?;
        println!("wrote {}", plot.display());
    }
    Ok(())
}

#[derive(Args)]
pub struct ScanArgs {
    /// Second node c2 (rational like 1/5 in rational mode)
    #[arg(long, default_value = "1/5")]
    c2: String,
    /// Fifth node c5
    #[arg(long, default_value = "4/5")]
    c5: String,
    #[arg(long, default_value = "1/100")]
    c3_min: String,
    #[arg(long, default_value = "1")]
    c3_max: String,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// rational (default) or float
    #[arg(long, default_value = "rational")]
    mode: String,
    /// CSV destination
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit a gnuplot script here
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn scan_generic<S: Scalar>(args: &ScanArgs) -> Result<String, Failure> {
    let c2 = S::parse(&args.c2).map_err(|e| Failure::input(format!("c2: {e}")))?;
    let c5 = S::parse(&args.c5).map_err(|e| Failure::input(format!("c5: {e}")))?;
    let lo = S::parse(&args.c3_min).map_err(|e| Failure::input(format!("c3_min: {e}")))?;
    let hi = S::parse(&args.c3_max).map_err(|e| Failure::input(format!("c3_max: {e}")))?;
    if args.steps < 2 {
        return Err(Failure::input("steps must be at least 2"));
    }
    let n = args.steps;
    let grid: Vec<S> = (0..n)
        .map(|k| {
            lo.clone()
                + (hi.clone() - lo.clone()) * S::from_ratio(k as i64, (n - 1) as i64)
        })
        .collect();
    let rows = family_scan(&c2, &c5, &grid);
    Ok(family_scan_csv(&rows))
}

pub fn scan(args: ScanArgs) -> CmdResult {
    let csv = match args.mode.as_str() {
        "rational" => scan_generic::<Rational>(&args)?,
        "float" => scan_generic::<f64>(&args)?,
        other => return Err(Failure::input(format!("unknown mode `{other}`"))),
    };
    let path = out_path(&args.out, "scan.csv");
    std::fs::write(&path, csv).map_err(|e| Failure::input(e.to_string()))?;
    println!("wrote {}", path.display());
    if let Some(plot) = &args.plot {
        let png = plot.with_extension("png");
        let script =
            family_scan_plot_script(&path.display().to_string(), &png.display().to_string());
        std::fs::write(plot, script).map_err(|e| Failure::input(e.to_string()))?;
        println!("wrote {}", plot.display());
    }
    Ok(())
}

#[derive(Args)]
pub struct StabilityArgs {
    /// Registry name or tableau file path
    #[arg(long)]
    pair: String,
    /// Phase grid points per lap of the boundary trace
    #[arg(long, default_value_t = 2048)]
    points: usize,
    /// Boundary CSV destination
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn stability(args: StabilityArgs) -> CmdResult {
    let pair = load_pair(&args.pair)?;
    let poly = match &pair {
        AnyPair::Rational(p) => {
            let poly = rkpair::analyze::stability(p)
                .map_err(|e| Failure::input(e.to_string()))?;
            println!(
                "k6          = {} ({:.6e})",
                poly.k6().format(),
                poly.k6().to_f64()
            );
            poly.to_float()
        }
        AnyPair::Float(p) => {
            let poly = rkpair::analyze::stability(p)
                .map_err(|e| Failure::input(e.to_string()))?;
            println!("k6          = {:.12e}", poly.k6().to_f64());
            poly.to_float()
        }
    };
    let trace = stability_boundary(&poly, args.points);
    if !trace.complete {
        eprintln!("warning: boundary trace incomplete ({} points)", trace.points.len());
    }
    if let Some(x) = trace.real_axis_crossing() {
        println!("real axis   = {x:.6}");
    }
    let path = out_path(&args.out, &format!("stability-{}.csv", pair.name()));
    std::fs::write(&path, boundary_csv(&trace.points))
        .map_err(|e| Failure::input(e.to_string()))?;
    println!("wrote {} ({} points)", path.display(), trace.points.len());
    if trace.complete {
        Ok(())
    } else {
        Err(Failure::numerical("boundary trace did not close"))
    }
}
