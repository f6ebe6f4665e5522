mod config;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use sqcomp::acceptance::{determinism, run_criteria, DEFAULT_SEED};
use sqcomp::analysis::{
    conditional_count_bound_check, em_table, em_table_csv, em_table_long_csv, gap_statistics,
    theorem2_constant, DING_CONSTANT, INTEGRAL_TOLERANCE,
};
use sqcomp::constructors::{
    greedy_complement, quadratic_model, repair_to_complement, GreedyStrategy, Rounding, GREEN_COEFFICIENT,
};
use sqcomp::counting::{
    margin_scan, representation_profile, sum_identity, summary_csv, SummaryRow, THEOREM1_CONSTANT,
};
use sqcomp::lemma::{theorem1_pipeline, verify_lemma, LemmaParameters};
use sqcomp::optimizer::{
    boundary_optimum, optimize_constants, optimize_fixed_delta0, reference_point, results_csv, OptimizationResult,
    TARGET_OBJECTIVE,
};
use sqcomp::report::{csv_string, fmt_f64};
use sqcomp::{coverage_report, ComplementCandidate};

use config::Config;

/// Environment variable naming the directory outputs go to when `--out` is absent.
const OUT_DIR_ENV: &str = "SQCOMP_OUT_DIR";

const EM_RESIDUAL_TOLERANCE: f64 = 1e-7;

#[derive(Parser, Debug)]
#[command(name = "sqcomp", version, about = "Additive complements of the squares: construction, counting and checks")]
struct Cli {
    /// Worker threads for data-parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// key = value file supplying defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (directory for `accept`); standard output if unset.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    emit: Option<Emit>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Csv,
    Text,
}

impl std::str::FromStr for Emit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Emit as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a candidate W and write it as a sequence file.
    Construct(ConstructArgs),
    /// Representation counts, excess and comparison bounds.
    Count(CountArgs),
    /// Integers in [0, N] not of the form s + w.
    Coverage(CoverageArgs),
    /// Check the residue-family inequality on one family.
    Lemma(LemmaArgs),
    /// Split W into residue classes and aggregate the lower bound.
    Pipeline(LemmaArgs),
    /// Maximize (4/pi)sqrt(delta0) - 8 delta over the feasible region.
    Optimize(OptimizeArgs),
    /// Euler-Maclaurin checks and the limiting constants.
    Analyze(AnalyzeArgs),
    /// Gap functional of a sequence and the conditional counting bound.
    Gaps(GapsArgs),
    /// Run the acceptance criteria and write their artifacts.
    Accept(AcceptArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").args(["greedy", "quadratic", "repair"])))]
struct ConstructArgs {
    #[arg(long)]
    greedy: bool,
    #[arg(long)]
    quadratic: bool,
    /// Sequence file to extend until it covers [1, N].
    #[arg(long, value_name = "FILE")]
    repair: Option<PathBuf>,
    #[arg(long)]
    limit: Option<u64>,
    #[arg(long)]
    strategy: Option<GreedyStrategy>,
    #[arg(long)]
    n_max: Option<u64>,
    /// Leading coefficient of the quadratic model.
    #[arg(long)]
    coefficient: Option<f64>,
    #[arg(long)]
    rounding: Option<Rounding>,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Sequence file with W.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Use the greedy complement up to N instead of a file.
    #[arg(long, value_name = "N", conflicts_with = "input")]
    greedy_limit: Option<u64>,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    source: InputArgs,
    #[arg(long)]
    limit: Option<u64>,
    /// Extra N values to report, comma separated.
    #[arg(long, value_delimiter = ',')]
    at: Vec<u64>,
    /// Emit R(n) for every n instead of the summary.
    #[arg(long)]
    counts: bool,
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[command(flatten)]
    source: InputArgs,
    #[arg(long)]
    limit: Option<u64>,
    /// Fail unless [1, N] is fully covered.
    #[arg(long)]
    require_covered: bool,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[command(flatten)]
    source: InputArgs,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long)]
    limit: Option<u64>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[arg(long)]
    grid: Option<u32>,
    #[arg(long)]
    refine: Option<u32>,
    /// Hold delta0 fixed and optimize delta only.
    #[arg(long)]
    fixed_delta0: Option<f64>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Tabulate the Euler-Maclaurin margin for square N.
    #[arg(long)]
    em_check: bool,
    #[arg(long)]
    max_n: Option<u64>,
    /// Largest N for which the quadratures are run.
    #[arg(long)]
    residual_max_n: Option<u64>,
    /// series,x,y layout.
    #[arg(long)]
    long: bool,
}

#[derive(Args, Debug)]
struct GapsArgs {
    #[command(flatten)]
    source: InputArgs,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    long: bool,
    /// Also check the conditional bound on W(x) at this x.
    #[arg(long)]
    x: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args, Debug)]
struct AcceptArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Thread count for the determinism rerun.
    #[arg(long)]
    compare_threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<sqcomp::Error> for Failure {
    fn from(e: sqcomp::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

impl From<&str> for Failure {
    fn from(e: &str) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    cfg: Config,
    out: Option<PathBuf>,
    emit: Emit,
}

impl Ctx {
    /// Writes to `--out`, then `$SQCOMP_OUT_DIR/<name>`, then stdout.
    fn write(&self, default_name: &str, body: &str) -> io::Result<()> {
        match self.destination(default_name) {
            Some(path) => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                fs::write(path, body)
            }
            None => io::stdout().lock().write_all(body.as_bytes()),
        }
    }

    fn destination(&self, default_name: &str) -> Option<PathBuf> {
        if let Some(p) = &self.out {
            return Some(p.clone());
        }
        if let Some(p) = self.cfg.raw("out") {
            return Some(PathBuf::from(p));
        }
        std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name))
    }

    fn ext(&self) -> &'static str {
        match self.emit {
            Emit::Csv => "csv",
            Emit::Text => "txt",
        }
    }

    fn load(&self, source: &InputArgs) -> Result<ComplementCandidate, Failure> {
        let input: Option<PathBuf> = self.cfg.lookup(source.input.clone(), "input")?;
        let greedy = self.cfg.lookup(source.greedy_limit, "greedy-limit")?;
        match (input, greedy) {
            (Some(path), _) => {
                let file = File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                ComplementCandidate::read_from(BufReader::new(file))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
            }
            (None, Some(n)) => Ok(greedy_complement(n, GreedyStrategy::LargestSquare)?),
            (None, None) => Err(Failure::Usage("one of --input or --greedy-limit is required".into())),
        }
    }
}

fn text_block(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(what()))
    }
}

fn construct(ctx: &Ctx, a: &ConstructArgs) -> Outcome {
    let cfg = &ctx.cfg;
    let w = if let Some(path) = cfg.lookup(a.repair.clone(), "repair")? {
        let limit = cfg.lookup(a.limit, "limit")?.ok_or("--limit is required")?;
        let base = ctx.load(&InputArgs { input: Some(path), greedy_limit: None })?;
        let repaired = repair_to_complement(&base, limit)?;
        eprintln!("added {} elements", repaired.len() - base.len());
        repaired
    } else if cfg.flag(a.quadratic, "quadratic")? {
        let n_max = cfg.lookup(a.n_max, "n-max")?.ok_or("--n-max is required")?;
        let c = cfg.pick(a.coefficient, "coefficient", GREEN_COEFFICIENT)?;
        let rounding = cfg.pick(a.rounding, "rounding", Rounding::Ceil)?;
        quadratic_model(n_max, c, rounding)?
    } else if cfg.flag(a.greedy, "greedy")? {
        let limit = cfg.lookup(a.limit, "limit")?.ok_or("--limit is required")?;
        let strategy = cfg.pick(a.strategy, "strategy", GreedyStrategy::LargestSquare)?;
        greedy_complement(limit, strategy)?
    } else {
        return Err(Failure::Usage("one of --greedy, --quadratic or --repair is required".into()));
    };
    let mut buf = Vec::new();
    w.write_to(&mut buf)?;
    ctx.write("w.seq", &String::from_utf8_lossy(&buf))?;
    Ok(())
}

fn count(ctx: &Ctx, a: &CountArgs) -> Outcome {
    let w = ctx.load(&a.source)?;
    let limit = ctx.cfg.lookup(a.limit, "limit")?.ok_or("--limit is required")?;
    let profile = representation_profile(&w, limit)?;
    let identity = sum_identity(&w, limit)?;

    if ctx.cfg.flag(a.counts, "counts")? {
        ctx.write("counts.csv", &profile.write_counts_csv()?)?;
    } else {
        let mut points: Vec<u64> = a.at.iter().copied().filter(|&n| n >= 1 && n <= limit).collect();
        points.push(limit);
        points.sort_unstable();
        points.dedup();
        let rows: Vec<SummaryRow> = points.iter().map(|&n| SummaryRow::from_profile(&w, &profile, n)).collect();
        let body = match ctx.emit {
            Emit::Csv => summary_csv(&rows)?,
            Emit::Text => {
                let scan = margin_scan(&profile);
                let opt = |v: Option<u64>| v.map_or("none".to_string(), |x| x.to_string());
                let last = rows.last().expect("limit row");
                text_block(&[
                    ("label", w.label().to_string()),
                    ("limit", limit.to_string()),
                    ("total", last.total.to_string()),
                    ("excess", last.excess.to_string()),
                    ("margin", fmt_f64(last.margin)),
                    ("excess_ratio", fmt_f64(last.excess_ratio)),
                    ("chen_fang", fmt_f64(last.chen_fang)),
                    ("cilleruelo_ratio", fmt_f64(last.cilleruelo_ratio)),
                    ("first_positive_margin", opt(scan.first_positive)),
                    ("positive_from", opt(scan.positive_from)),
                    ("sum_identity", identity.agrees().to_string()),
                ])
            }
        };
        ctx.write(&format!("count.{}", ctx.ext()), &body)?;
    }
    check(identity.agrees(), || {
        format!(
            "sum identity mismatch: {} / {} / {}",
            identity.via_profile, identity.via_counting_function, identity.via_elements
        )
    })
}

fn coverage(ctx: &Ctx, a: &CoverageArgs) -> Outcome {
    let w = ctx.load(&a.source)?;
    let limit = ctx.cfg.lookup(a.limit, "limit")?.ok_or("--limit is required")?;
    let report = coverage_report(&w, limit)?;
    let body = match ctx.emit {
        Emit::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
        Emit::Text => report.to_toml()?,
    };
    ctx.write(&format!("coverage.{}", ctx.ext()), &body)?;
    let uncovered = report.uncovered_in(1, limit);
    if ctx.cfg.flag(a.require_covered, "require-covered")? {
        check(uncovered.is_empty(), || format!("{} uncovered values in [1, {limit}]", uncovered.len()))?;
    }
    Ok(())
}

fn lemma_params(ctx: &Ctx, a: &LemmaArgs) -> Result<(f64, f64, u64), Failure> {
    let delta = ctx.cfg.pick(a.delta, "delta", 0.022)?;
    let delta0 = ctx.cfg.pick(a.delta0, "delta0", 0.084)?;
    let n = ctx.cfg.lookup(a.limit, "limit")?.ok_or("--limit is required")?;
    Ok((delta, delta0, n))
}

fn lemma(ctx: &Ctx, a: &LemmaArgs) -> Outcome {
    let d = ctx.load(&a.source)?;
    let (delta, delta0, n) = lemma_params(ctx, a)?;
    let params = LemmaParameters::new(delta, delta0, n)?;
    let report = verify_lemma(&d, &params)?;
    let body = match ctx.emit {
        Emit::Csv => csv_string(
            &["d1", "ds", "n_s", "x", "y", "value", "valid"],
            report.witnesses.iter().map(|w| {
                let s = w.solution;
                vec![
                    s.d1.to_string(),
                    s.ds.to_string(),
                    s.n_s.to_string(),
                    s.x.to_string(),
                    s.y.to_string(),
                    w.value.to_string(),
                    w.valid.to_string(),
                ]
            }),
        )?,
        Emit::Text => text_block(&[
            ("N", n.to_string()),
            ("K", params.k().to_string()),
            ("modulus", params.modulus().to_string()),
            ("class_size", report.class_size.to_string()),
            ("lhs", report.lhs.to_string()),
            ("rhs", report.rhs.to_string()),
            ("holds", report.holds.to_string()),
            ("witnesses", report.witnesses.len().to_string()),
            ("degenerate", report.degenerate.to_string()),
            ("witnesses_valid", report.witnesses_valid().to_string()),
        ]),
    };
    ctx.write(&format!("lemma.{}", ctx.ext()), &body)?;
    check(report.holds && report.witnesses_valid(), || {
        format!("lemma check failed: lhs {} < rhs {} or invalid witness", report.lhs, report.rhs)
    })
}

fn pipeline(ctx: &Ctx, a: &LemmaArgs) -> Outcome {
    let w = ctx.load(&a.source)?;
    let (delta, delta0, n) = lemma_params(ctx, a)?;
    let report = theorem1_pipeline(&w, delta, delta0, n)?;
    let body = match ctx.emit {
        Emit::Csv => report.per_class_csv()?,
        Emit::Text => text_block(&[
            ("delta", fmt_f64(report.delta)),
            ("delta0", fmt_f64(report.delta0)),
            ("N", report.n.to_string()),
            ("K", report.k.to_string()),
            ("classes", report.per_class.len().to_string()),
            ("class_surplus", report.class_surplus.to_string()),
            ("lemma_bound", report.lemma_bound.to_string()),
            ("n0", report.n0.to_string()),
            ("n0_flagged", report.n0_flagged.to_string()),
            ("lower_bound", report.lower_bound.to_string()),
            ("measured_excess", report.measured_excess.to_string()),
            ("window_count", report.window_count.to_string()),
            ("window_density", fmt_f64(report.window_density)),
            ("asymptotic_bound", fmt_f64(report.asymptotic_bound)),
            ("chain_holds", report.chain_holds.to_string()),
            ("bound_holds", report.bound_holds.to_string()),
            ("all_classes_hold", report.all_classes_hold.to_string()),
        ]),
    };
    ctx.write(&format!("pipeline.{}", ctx.ext()), &body)?;
    if report.n0_flagged {
        eprintln!("warning: N itself is uncovered; N0 set to N + 1");
    }
    check(report.consistent(), || {
        format!(
            "pipeline inconsistent: lower bound {} vs measured excess {}",
            report.lower_bound, report.measured_excess
        )
    })
}

fn result_text(label: &str, r: &OptimizationResult) -> String {
    text_block(&[
        (&format!("{label}.delta"), fmt_f64(r.delta)),
        (&format!("{label}.delta0"), fmt_f64(r.delta0)),
        (&format!("{label}.objective"), fmt_f64(r.objective)),
        (&format!("{label}.feasible"), r.feasible.to_string()),
        (&format!("{label}.constraint1"), fmt_f64(r.constraint1)),
        (&format!("{label}.constraint2"), fmt_f64(r.constraint2)),
        (&format!("{label}.active1"), r.boundary_active.first.to_string()),
        (&format!("{label}.active2"), r.boundary_active.second.to_string()),
    ])
}

fn optimize(ctx: &Ctx, a: &OptimizeArgs) -> Outcome {
    let grid = ctx.cfg.pick(a.grid, "grid", 2000)?;
    let refine = ctx.cfg.pick(a.refine, "refine", 3)?;
    let fixed: Option<f64> = ctx.cfg.lookup(a.fixed_delta0, "fixed-delta0")?;
    let best = match fixed {
        Some(d0) => optimize_fixed_delta0(d0, grid, refine)?,
        None => optimize_constants(grid, refine)?,
    };
    let body = match ctx.emit {
        Emit::Csv => results_csv(&[best])?,
        Emit::Text => {
            let mut s = result_text("optimum", &best);
            if fixed.is_none() {
                s.push_str(&result_text("boundary", &boundary_optimum()?));
            }
            s.push_str(&result_text("reference", &reference_point()));
            s
        }
    };
    ctx.write(&format!("optimize.{}", ctx.ext()), &body)?;
    check(best.feasible, || "optimum is infeasible".into())?;
    if fixed.is_none() {
        check(best.objective >= TARGET_OBJECTIVE, || {
            format!("objective {} below {TARGET_OBJECTIVE}", fmt_f64(best.objective))
        })?;
    }
    Ok(())
}

fn analyze(ctx: &Ctx, a: &AnalyzeArgs) -> Outcome {
    if !ctx.cfg.flag(a.em_check, "em-check")? {
        let body = match ctx.emit {
            Emit::Csv => csv_string(
                &["c", "constant"],
                [0.0, THEOREM1_CONSTANT].map(|c| vec![fmt_f64(c), fmt_f64(theorem2_constant(c))]),
            )?,
            Emit::Text => text_block(&[
                ("pi_over_4", fmt_f64(DING_CONSTANT)),
                ("gap_constant", fmt_f64(theorem2_constant(THEOREM1_CONSTANT))),
            ]),
        };
        ctx.write(&format!("constants.{}", ctx.ext()), &body)?;
        return Ok(());
    }
    let max_n = ctx.cfg.pick(a.max_n, "max-n", 10_000)?;
    let residual_max_n = ctx.cfg.pick(a.residual_max_n, "residual-max-n", max_n.min(10_000))?;
    let rows = em_table(max_n, residual_max_n)?;
    let long = ctx.cfg.flag(a.long, "long")?;
    let body = match (ctx.emit, long) {
        (Emit::Csv, false) => em_table_csv(&rows)?,
        (Emit::Csv, true) => em_table_long_csv(&rows)?,
        (Emit::Text, _) => {
            let worst_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            let worst_residual = rows.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
            text_block(&[
                ("squares", rows.len().to_string()),
                ("min_margin", fmt_f64(worst_margin)),
                ("max_residual", fmt_f64(worst_residual)),
            ])
        }
    };
    ctx.write(&format!("em.{}", ctx.ext()), &body)?;
    let bad_margin = rows.iter().find(|r| r.margin < 0.0);
    check(bad_margin.is_none(), || format!("negative margin at N = {}", bad_margin.unwrap().n))?;
    let bad_residual = rows.iter().find(|r| r.residual.is_some_and(|x| x > EM_RESIDUAL_TOLERANCE));
    check(bad_residual.is_none(), || format!("identity residual too large at N = {}", bad_residual.unwrap().n))?;
    let bad_integral = rows.iter().find(|r| r.min_integral.is_some_and(|x| x < -INTEGRAL_TOLERANCE));
    check(bad_integral.is_none(), || format!("negative integral at N = {}", bad_integral.unwrap().n))
}

fn gaps(ctx: &Ctx, a: &GapsArgs) -> Outcome {
    let w = ctx.load(&a.source)?;
    let n_max = ctx.cfg.pick(a.n_max, "n-max", w.len())?;
    let stats = gap_statistics(&w, n_max)?;
    let body = match (ctx.emit, ctx.cfg.flag(a.long, "long")?) {
        (Emit::Csv, false) => stats.to_csv()?,
        (Emit::Csv, true) => stats.to_long_csv()?,
        (Emit::Text, _) => text_block(&[
            ("n_max", n_max.to_string()),
            ("max_gap", stats.max().map_or("none".into(), fmt_f64)),
            (
                "first_above_pi_over_4",
                stats.first_reaching(DING_CONSTANT).map_or("none".into(), |n| n.to_string()),
            ),
        ]),
    };
    ctx.write(&format!("gaps.{}", ctx.ext()), &body)?;
    if let Some(x) = ctx.cfg.lookup(a.x, "x")? {
        let gamma = ctx.cfg.pick(a.gamma, "gamma", 1.0)?;
        let sigma = ctx.cfg.pick(a.sigma, "sigma", 0.5)?;
        let r = conditional_count_bound_check(&w, gamma, sigma, x)?;
        eprintln!(
            "W({x}) = {}, bound {}, hypothesis {}, bound holds {}",
            r.count,
            fmt_f64(r.bound),
            r.hypothesis_holds_up_to_x,
            r.bound_holds
        );
        check(r.implication_holds(), || format!("counting bound violated at x = {x}"))?;
    }
    Ok(())
}

fn accept(ctx: &Ctx, a: &AcceptArgs) -> Outcome {
    let seed = ctx.cfg.pick(a.seed, "seed", DEFAULT_SEED)?;
    let compare = ctx.cfg.pick(a.compare_threads, "compare-threads", 4)?;
    let dir = ctx
        .out
        .clone()
        .or_else(|| ctx.cfg.raw("out").map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));

    let mut outcomes = run_criteria(seed)?;
    outcomes.push(determinism(seed, compare, &outcomes)?);

    let mut stdout = io::stdout().lock();
    for o in &outcomes {
        writeln!(stdout, "{}", o.line())?;
        if let Some(dir) = &dir {
            fs::create_dir_all(dir)?;
            for (name, body) in &o.artifacts {
                fs::write(dir.join(name), body)?;
            }
        }
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| format!("C{}", o.id)).collect();
    check(failed.is_empty(), || format!("failed criteria: {}", failed.join(", ")))
}

fn run(cli: Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let threads = cfg.pick(cli.threads, "threads", 1)?;
    if threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let emit = cfg.pick(cli.emit, "emit", Emit::Csv)?;
    let ctx = Ctx { cfg, out: cli.out, emit };

    match &cli.command {
        Command::Construct(a) => construct(&ctx, a),
        Command::Count(a) => count(&ctx, a),
        Command::Coverage(a) => coverage(&ctx, a),
        Command::Lemma(a) => lemma(&ctx, a),
        Command::Pipeline(a) => pipeline(&ctx, a),
        Command::Optimize(a) => optimize(&ctx, a),
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Gaps(a) => gaps(&ctx, a),
        Command::Accept(a) => accept(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("sqcomp: check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("sqcomp: {msg}");
            ExitCode::from(2)
        }
    }
}
