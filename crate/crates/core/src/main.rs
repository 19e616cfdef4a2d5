use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use dedesum::characters::{enumerate_primitive, valid_pairs, CharacterPair};
use dedesum::dedekind::{EvalPolicy, Formula};
use dedesum::lattice::{field_name, image_lattice, ImageMode, ImageOptions, ImageReport, IntegerLattice};
use dedesum::suites::{run_suite, substream, Suite, SuiteConfig, SuiteReport};
use dedesum::{DedekindContext, SL2Matrix};

/// Appends to the cache file happen under this lock; the interrupt handler
/// takes it before exiting so no record is cut in half.
static CACHE_LOCK: Mutex<()> = Mutex::new(());

#[derive(Parser)]
#[command(name = "dedesum", version, about = "Exact newform Dedekind sums and their image lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized suite and sampled image
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    #[arg(long, global = true)]
    csv: bool,
    /// Results cache (JSON lines); DEDESUM_CACHE overrides the default location
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    /// Cross-check every evaluation against the defining formula
    #[arg(long, global = true)]
    paranoid: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List primitive characters of modulus q
    Chars { q: u64 },
    /// Evaluate S(a, c) or S(γ)
    Eval {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(long)]
        c: Option<i64>,
        /// γ as "a,b,c,d"
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["a", "c"])]
        matrix: Option<SL2Matrix>,
        #[arg(long, value_enum, default_value_t = FormulaArg::Floor)]
        formula: FormulaArg,
    },
    /// Run verification suites on one pair or on every pair in conductor ranges
    Verify {
        #[command(flatten)]
        pair: OptionalPairArgs,
        #[command(flatten)]
        ranges: RangeArgs,
        /// Comma-separated suite names (default: all)
        #[arg(long, value_delimiter = ',')]
        suite: Vec<Suite>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        max_r: u64,
    },
    /// Compute the image lattice S(Γ₁(q₁q₂))
    Image {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        image: ImageArgs,
    },
    /// Recompute the four-row image table
    Table {
        /// Compare the rendered markdown with this file
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// Exact images for every valid pair in conductor ranges
    Scan {
        #[command(flatten)]
        ranges: RangeArgs,
        #[command(flatten)]
        image: ImageArgs,
    },
}

#[derive(Args)]
struct PairArgs {
    /// First character, "q.n" (Conrey) or "q:[e,...]"
    #[arg(long)]
    chi1: String,
    #[arg(long)]
    chi2: String,
}

#[derive(Args)]
struct OptionalPairArgs {
    #[arg(long, requires = "chi2", conflicts_with_all = ["q1", "q2"])]
    chi1: Option<String>,
    #[arg(long, requires = "chi1")]
    chi2: Option<String>,
}

#[derive(Args)]
struct RangeArgs {
    /// Conductor range for χ₁, "A..B" (inclusive) or "A"
    #[arg(long)]
    q1: Option<ConductorRange>,
    #[arg(long)]
    q2: Option<ConductorRange>,
    /// Only pairs with q₁q₂ ≤ this bound
    #[arg(long)]
    max_level: Option<u64>,
    #[arg(long)]
    quadratic_only: bool,
    #[arg(long)]
    coprime_only: bool,
    /// Only odd conductors
    #[arg(long)]
    odd_only: bool,
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Random Γ₁ elements in sampled mode
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Sampled mode: skip elements with |c| above this bound
    #[arg(long)]
    max_c: Option<u64>,
    /// Include wall-clock timings in the report (makes output run-dependent)
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Bernoulli,
    Fractional,
    Floor,
}

#[derive(Clone, Copy, Debug)]
struct ConductorRange {
    lo: u64,
    hi: u64,
}

impl FromStr for ConductorRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad conductor range '{s}'"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => (parse(s)?, parse(s)?),
        };
        Ok(ConductorRange { lo, hi })
    }
}

enum Failure {
    /// bad input: exit 2
    Usage(String),
    /// a check failed: exit 1
    Check,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

#[derive(Clone, Copy)]
enum Format {
    Human,
    Json,
    Csv,
}

struct Env {
    seed: u64,
    format: Format,
    policy: EvalPolicy,
    cache: Option<Mutex<Cache>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let _ = ctrlc::set_handler(|| {
        let _guard = CACHE_LOCK.lock();
        eprintln!("interrupted");
        std::process::exit(130);
    });
    let cache = if cli.no_cache {
        None
    } else {
        match Cache::open(&cache_path(cli.cache.clone())) {
            Ok(c) => Some(Mutex::new(c)),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    };
    let env = Env {
        seed: cli.seed,
        format: if cli.json {
            Format::Json
        } else if cli.csv {
            Format::Csv
        } else {
            Format::Human
        },
        policy: EvalPolicy {
            formula: Formula::Floor,
            cross_check: cli.paranoid,
        },
        cache,
    };
    let result = match cli.command {
        Command::Chars { q } => cmd_chars(&env, q),
        Command::Eval {
            pair,
            a,
            c,
            matrix,
            formula,
        } => cmd_eval(&env, &pair, a, c, matrix, formula),
        Command::Verify {
            pair,
            ranges,
            suite,
            samples,
            max_r,
        } => cmd_verify(&env, &pair, &ranges, &suite, samples, max_r),
        Command::Image { pair, image } => cmd_image(&env, &pair, &image),
        Command::Table { golden, timings } => cmd_table(&env, golden.as_deref(), timings),
        Command::Scan { ranges, image } => cmd_scan(&env, &ranges, &image),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn context(env: &Env, chi1: &str, chi2: &str) -> Result<DedekindContext, Failure> {
    Ok(DedekindContext::from_labels(chi1, chi2)?.with_policy(env.policy))
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn cmd_chars(env: &Env, q: u64) -> Outcome {
    if q < 3 {
        return Err(Failure::Usage(format!("no primitive nontrivial character has modulus {q}")));
    }
    let rows: Vec<Value> = enumerate_primitive(q)
        .iter()
        .map(|chi| {
            json!({
                "label": chi.label(),
                "order": chi.order(),
                "parity": if chi.is_even() { "even" } else { "odd" },
                "conductor": chi.conductor(),
                "exponents": chi.exponents(),
            })
        })
        .collect();
    match env.format {
        Format::Json => print_json(&rows),
        Format::Csv => {
            println!("label,order,parity,conductor");
            for r in &rows {
                println!("{},{},{},{}", r["label"].as_str().unwrap(), r["order"], r["parity"].as_str().unwrap(), r["conductor"]);
            }
        }
        Format::Human => {
            println!("{:<10} {:>5}  {:<6} {:>9}", "label", "order", "parity", "conductor");
            for r in &rows {
                println!(
                    "{:<10} {:>5}  {:<6} {:>9}",
                    r["label"].as_str().unwrap(),
                    r["order"].as_u64().unwrap(),
                    r["parity"].as_str().unwrap(),
                    r["conductor"].as_u64().unwrap()
                );
            }
        }
    }
    Ok(())
}

fn cmd_eval(
    env: &Env,
    pair: &PairArgs,
    a: Option<i64>,
    c: Option<i64>,
    matrix: Option<SL2Matrix>,
    formula: FormulaArg,
) -> Outcome {
    let formula = match formula {
        FormulaArg::Bernoulli => Formula::Bernoulli,
        FormulaArg::Fractional => Formula::Fractional,
        FormulaArg::Floor => Formula::Floor,
    };
    let ctx = context(env, &pair.chi1, &pair.chi2)?.with_policy(EvalPolicy {
        formula,
        ..env.policy
    });
    let (a, c, value) = match (matrix, a, c) {
        (Some(g), _, _) => {
            let g = if g.c < 0 { -g } else { g };
            (g.a, g.c, ctx.eval(&g)?)
        }
        (None, Some(a), Some(c)) => (a, c, ctx.eval_sum(a, c)?.value),
        _ => return Err(Failure::Usage("give either --a and --c, or --matrix".into())),
    };
    let approx = value.approx_string(12);
    match env.format {
        Format::Json => print_json(&json!({
            "pair": ctx.pair().label(),
            "a": a,
            "c": c,
            "formula": formula,
            "value": value.to_string(),
            "approx": approx,
        })),
        Format::Csv => {
            println!("pair,a,c,value,approx");
            println!("\"{}\",{a},{c},\"{value}\",\"{approx}\"", ctx.pair().label());
        }
        Format::Human => {
            println!("S[{}]({a}, {c}) = {value}", ctx.pair().label());
            println!("  ≈ {approx}");
        }
    }
    Ok(())
}

/// Valid pairs in the ranges, in (q₁, q₂, χ₁, χ₂) order, after filters.
fn pairs_in_ranges(r: &RangeArgs) -> Result<Vec<CharacterPair>, Failure> {
    let (Some(q1), Some(q2)) = (r.q1, r.q2) else {
        return Err(Failure::Usage("give --chi1/--chi2 or both --q1 and --q2".into()));
    };
    let mut out = Vec::new();
    for a in q1.lo.max(3)..=q1.hi {
        for b in q2.lo.max(3)..=q2.hi {
            if r.max_level.is_some_and(|m| a * b > m)
                || (r.coprime_only && a.gcd(&b) != 1)
                || (r.odd_only && (a % 2 == 0 || b % 2 == 0))
            {
                continue;
            }
            out.extend(
                valid_pairs(a, b)
                    .into_iter()
                    .filter(|p| !r.quadratic_only || p.is_quadratic()),
            );
        }
    }
    Ok(out)
}

fn cmd_verify(
    env: &Env,
    pair: &OptionalPairArgs,
    ranges: &RangeArgs,
    suites: &[Suite],
    samples: usize,
    max_r: u64,
) -> Outcome {
    let contexts: Vec<DedekindContext> = match (&pair.chi1, &pair.chi2) {
        (Some(a), Some(b)) => vec![context(env, a, b)?],
        _ => pairs_in_ranges(ranges)?
            .into_iter()
            .map(|p| DedekindContext::new(p).with_policy(env.policy))
            .collect(),
    };
    let suites: Vec<Suite> = if suites.is_empty() { Suite::ALL.to_vec() } else { suites.to_vec() };
    let cfg = SuiteConfig {
        samples,
        seed: env.seed,
        max_r: max_r.max(1),
        ..Default::default()
    };
    let mut jobs: Vec<(Suite, Option<&DedekindContext>)> = Vec::new();
    for &s in &suites {
        if s.pair_independent() {
            jobs.push((s, None));
        } else {
            jobs.extend(contexts.iter().map(|c| (s, Some(c))));
        }
    }
    let reports: Vec<SuiteReport> = jobs
        .par_iter()
        .map(|&(s, c)| run_suite(s, c, &cfg))
        .collect::<Result<_, _>>()?;
    let passed = reports.iter().all(SuiteReport::passed);
    match env.format {
        Format::Json => print_json(&json!({ "seed": env.seed, "reports": reports, "passed": passed })),
        Format::Csv => {
            println!("suite,pair,checks,failures");
            for r in &reports {
                println!("{},\"{}\",{},{}", r.suite, r.pair.as_deref().unwrap_or(""), r.checks, r.failures);
            }
        }
        Format::Human => {
            for r in &reports {
                println!(
                    "{} {:<13} {:<18} {}/{} checks passed",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.suite.name(),
                    r.pair.as_deref().unwrap_or("-"),
                    r.checks - r.failures,
                    r.checks
                );
                for n in &r.notes {
                    println!("       {n}");
                }
                if let Some(f) = &r.first_failure {
                    println!("       first failure: {f}");
                }
            }
            let ok = reports.iter().filter(|r| r.passed()).count();
            println!("{ok}/{} suites passed", reports.len());
        }
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn image_options(args: &ImageArgs) -> ImageOptions {
    ImageOptions {
        mode: match args.mode {
            ModeArg::Exact => ImageMode::Exact,
            ModeArg::Sampled => ImageMode::Sampled,
        },
        samples: args.samples,
        max_c: args.max_c,
        record_timings: args.timings,
    }
}

/// An image report, possibly served from the cache.
#[derive(Clone)]
struct Computed {
    report: ImageReport,
    cached: bool,
}

impl Computed {
    fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.report).expect("serializable");
        if self.cached {
            v["cached"] = Value::Bool(true);
        }
        v
    }
}

fn compute_image(env: &Env, ctx: &DedekindContext, opts: &ImageOptions) -> Result<Computed, Failure> {
    let label = ctx.pair().label();
    let fp = fingerprint(&match opts.mode {
        ImageMode::Exact => json!({ "mode": "exact" }),
        ImageMode::Sampled => json!({
            "mode": "sampled",
            "samples": opts.samples,
            "seed": env.seed,
            "max_c": opts.max_c,
        }),
    });
    if !opts.record_timings {
        if let Some(cache) = &env.cache {
            let hit = cache.lock().expect("cache").get("image", &label, &fp);
            if let Some(payload) = hit {
                if let Ok(report) = serde_json::from_value::<ImageReport>(payload) {
                    return Ok(Computed { report, cached: true });
                }
            }
        }
    }
    let mut rng = substream(env.seed, &format!("image/{label}"));
    let report = image_lattice(ctx, opts, &mut rng)?;
    if let Some(cache) = &env.cache {
        let mut stored = report.clone();
        stored.timings = None;
        let pass = stored.verdicts.thm16;
        cache.lock().expect("cache").put("image", &label, &fp, pass, &stored)?;
    }
    Ok(Computed { report, cached: false })
}

fn verdict_word(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn print_image_human(c: &Computed) {
    let r = &c.report;
    let g = r.q1.gcd(&r.q2);
    println!("pair        {}{}", r.pair, if c.cached { "  (cached)" } else { "" });
    println!("mode        {}", if r.mode == ImageMode::Exact { "exact" } else { "sampled" });
    println!("field       {} (m = {}, degree {})", field_name(r.field), r.field, r.degree);
    println!("generators  {}{}", r.generators, if r.skipped > 0 { format!(" ({} skipped)", r.skipped) } else { String::new() });
    println!("image       {}", r.image);
    println!("D           {}", r.denominator);
    for (i, row) in r.basis.iter().enumerate() {
        println!("{}[{}]", if i == 0 { "basis       " } else { "            " }, row.join(", "));
    }
    println!("rank        {} / {}", r.rank, r.degree);
    let checks = [
        ("= 2ℤ[ζ_m]".to_string(), r.verdicts.two_conj),
        (format!("⊆ (1/{g})ℤ[ζ_m]"), r.verdicts.thm16),
        ("⊆ ℤ[ζ_m]".to_string(), r.verdicts.integral),
        ("full rank".to_string(), r.verdicts.full_rank),
    ];
    let width = checks.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0).max(11);
    for (label, ok) in checks {
        println!("{label:<width$} {}", verdict_word(ok));
    }
    if r.mode == ImageMode::Sampled {
        println!("note        sampled images are sublattices of the true image");
    }
    if let Some(t) = &r.timings {
        println!(
            "timings     cosets {} ms, evaluation {} ms, lattice {} ms, max |c| {}",
            t.cosets_ms, t.evaluation_ms, t.lattice_ms, t.max_c
        );
    }
}

/// Theorem-level checks an image must pass regardless of conjectures.
fn theorems_hold(r: &ImageReport) -> bool {
    r.verdicts.thm16 && (r.mode == ImageMode::Sampled || r.verdicts.full_rank)
}

fn cmd_image(env: &Env, pair: &PairArgs, args: &ImageArgs) -> Outcome {
    let ctx = context(env, &pair.chi1, &pair.chi2)?;
    let c = compute_image(env, &ctx, &image_options(args))?;
    match env.format {
        Format::Json => print_json(&c.to_json()),
        Format::Csv => {
            println!("{}", SCAN_CSV_HEADER);
            println!("{}", scan_csv_row(&c));
        }
        Format::Human => print_image_human(&c),
    }
    if theorems_hold(&c.report) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

struct TableRow {
    left: (u64, u64),
    right: (u64, u64),
    expected: &'static str,
    m: usize,
}

const TABLE: [TableRow; 4] = [
    TableRow { left: (3, 2), right: (7, 2), expected: "2ℤ", m: 2 },
    TableRow { left: (5, 2), right: (8, 2), expected: "2ℤ", m: 2 },
    TableRow { left: (5, 2), right: (7, 3), expected: "2ℤ[ω]", m: 6 },
    TableRow { left: (5, 4), right: (5, 4), expected: "2ℤ[i]", m: 4 },
];

fn table_pairs(row: &TableRow) -> Vec<CharacterPair> {
    valid_pairs(row.left.0, row.right.0)
        .into_iter()
        .filter(|p| p.chi1.order() == row.left.1 && p.chi2.order() == row.right.1)
        .collect()
}

fn cmd_table(env: &Env, golden: Option<&Path>, timings: bool) -> Outcome {
    let opts = ImageOptions {
        record_timings: timings,
        ..Default::default()
    };
    let jobs: Vec<(usize, CharacterPair)> = TABLE
        .iter()
        .enumerate()
        .flat_map(|(i, row)| table_pairs(row).into_iter().map(move |p| (i, p)))
        .collect();
    let computed: Vec<(usize, Computed)> = jobs
        .par_iter()
        .map(|(i, p)| {
            let ctx = DedekindContext::new(p.clone()).with_policy(env.policy);
            compute_image(env, &ctx, &opts).map(|c| (*i, c))
        })
        .collect::<Result<_, _>>()?;

    let mut all_ok = true;
    let mut md = String::new();
    md.push_str("| χ₁: q₁, order | χ₂: q₂, order | pairs | image | F | rank | expected | match |\n");
    md.push_str("|---|---|---|---|---|---|---|---|\n");
    let mut rows_json = Vec::new();
    for (i, row) in TABLE.iter().enumerate() {
        let reports: Vec<&Computed> = computed.iter().filter(|(j, _)| *j == i).map(|(_, c)| c).collect();
        let expected = IntegerLattice::scaled_ring(&num_rational::BigRational::from_integer(2.into()), row.m);
        let matches = !reports.is_empty()
            && reports.iter().all(|c| c.report.field == row.m && c.report.lattice().equals(&expected));
        all_ok &= matches;
        let mut images: Vec<&str> = reports.iter().map(|c| c.report.image.as_str()).collect();
        images.dedup();
        let image = if images.len() == 1 { images[0].to_string() } else { images.join(" / ") };
        let ranks: Vec<String> = {
            let mut v: Vec<String> = reports.iter().map(|c| format!("{}/{}", c.report.rank, c.report.degree)).collect();
            v.dedup();
            v
        };
        let _ = writeln!(
            md,
            "| {}, {} | {}, {} | {} | {} | {} | {} | {} | {} |",
            row.left.0,
            row.left.1,
            row.right.0,
            row.right.1,
            reports.len(),
            image,
            field_name(row.m),
            ranks.join(" / "),
            row.expected,
            verdict_word(matches)
        );
        rows_json.push(json!({
            "chi1": { "conductor": row.left.0, "order": row.left.1 },
            "chi2": { "conductor": row.right.0, "order": row.right.1 },
            "expected": row.expected,
            "field": field_name(row.m),
            "match": matches,
            "reports": reports.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        }));
    }
    match env.format {
        Format::Json => print_json(&json!({ "rows": rows_json, "reproduced": all_ok })),
        _ => print!("{md}"),
    }
    if let Some(path) = golden {
        let want = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        if want != md {
            eprintln!("table differs from golden file {}", path.display());
            return Err(Failure::Check);
        }
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

const SCAN_CSV_HEADER: &str = "pair,q1,q2,level,m,degree,generators,rank,image,two_conj,thm16,integral,full_rank";

fn scan_csv_row(c: &Computed) -> String {
    let r = &c.report;
    format!(
        "\"{}\",{},{},{},{},{},{},{},\"{}\",{},{},{},{}",
        r.pair,
        r.q1,
        r.q2,
        r.q1 * r.q2,
        r.field,
        r.degree,
        r.generators,
        r.rank,
        r.image,
        r.verdicts.two_conj,
        r.verdicts.thm16,
        r.verdicts.integral,
        r.verdicts.full_rank
    )
}

fn cmd_scan(env: &Env, ranges: &RangeArgs, args: &ImageArgs) -> Outcome {
    let pairs = pairs_in_ranges(ranges)?;
    let opts = image_options(args);
    let results: Vec<(String, Result<Computed, String>)> = pairs
        .par_iter()
        .map(|p| {
            let ctx = DedekindContext::new(p.clone()).with_policy(env.policy);
            let r = compute_image(env, &ctx, &opts).map_err(|e| match e {
                Failure::Usage(m) => m,
                Failure::Check => "check failed".to_string(),
            });
            (p.label(), r)
        })
        .collect();

    let mut entries = Vec::new();
    let mut counterexamples = Vec::new();
    let mut violations = Vec::new();
    let mut errors = Vec::new();
    let (mut checked, mut holds, mut integral) = (0, 0, 0);
    for (label, r) in &results {
        match r {
            Ok(c) => {
                let rep = &c.report;
                // the 2ℤ[ζ_m] conjecture is stated for coprime conductors only
                let conj = (rep.q1.gcd(&rep.q2) == 1).then_some(rep.verdicts.two_conj);
                if let Some(ok) = conj {
                    checked += 1;
                    if ok {
                        holds += 1;
                    } else {
                        counterexamples.push(label.clone());
                    }
                }
                if rep.verdicts.integral {
                    integral += 1;
                }
                if !theorems_hold(rep) {
                    violations.push(label.clone());
                }
                let mut v = c.to_json();
                v["conjecture"] = conj.map_or(Value::Null, Value::Bool);
                entries.push(v);
            }
            Err(e) => {
                errors.push(label.clone());
                entries.push(json!({ "pair": label, "error": e }));
            }
        }
    }
    let summary = json!({
        "pairs": results.len(),
        "errors": errors,
        "conjecture_checked": checked,
        "conjecture_holds": holds,
        "image_integral": integral,
        "counterexamples": counterexamples,
        "theorem_violations": violations,
    });
    match env.format {
        Format::Json => print_json(&json!({ "pairs": entries, "summary": summary })),
        Format::Csv => {
            println!("{SCAN_CSV_HEADER}");
            for (label, r) in &results {
                match r {
                    Ok(c) => println!("{}", scan_csv_row(c)),
                    Err(e) => println!("\"{label}\",,,,,,,,\"error: {e}\",,,,"),
                }
            }
        }
        Format::Human => {
            for (label, r) in &results {
                match r {
                    Ok(c) => {
                        let rep = &c.report;
                        println!(
                            "{:<20} N = {:<5} image {:<10} rank {}/{}  ⊆ ℤ[ζ_m] {:<3}  = 2ℤ[ζ_m] {}{}",
                            label,
                            rep.q1 * rep.q2,
                            rep.image,
                            rep.rank,
                            rep.degree,
                            verdict_word(rep.verdicts.integral),
                            if rep.q1.gcd(&rep.q2) == 1 { verdict_word(rep.verdicts.two_conj) } else { "n/a" },
                            if c.cached { "  (cached)" } else { "" }
                        );
                    }
                    Err(e) => println!("{label:<20} error: {e}"),
                }
            }
            println!(
                "{} pairs; conjecture holds on {holds}/{checked} coprime pairs; {} counterexamples; {} theorem violations; {} errors",
                results.len(),
                counterexamples.len(),
                violations.len(),
                errors.len()
            );
            for c in &counterexamples {
                println!("counterexample: {c}");
            }
        }
    }
    if counterexamples.is_empty() && violations.is_empty() && errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cache_path(flag: Option<PathBuf>) -> PathBuf {
    if let Some(p) = flag {
        return p;
    }
    if let Some(p) = std::env::var_os("DEDESUM_CACHE") {
        return PathBuf::from(p);
    }
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
        .unwrap_or_else(|| PathBuf::from("."));
    base.join("dedesum").join("results.jsonl")
}

fn fingerprint(config: &Value) -> String {
    let canonical = json!({ "config": config, "version": env!("CARGO_PKG_VERSION") });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct ResultRecord {
    timestamp: u64,
    fingerprint: String,
    command: String,
    pair: String,
    pass: bool,
    payload: Value,
}

/// Append-only JSON-lines store keyed by (command, pair, fingerprint).
struct Cache {
    path: PathBuf,
    entries: HashMap<(String, String, String), Value>,
}

impl Cache {
    fn open(path: &Path) -> Result<Self, String> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = fs::File::open(path).map_err(|e| format!("cannot open cache {}: {e}", path.display()))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| format!("cannot read cache {}: {e}", path.display()))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<ResultRecord>(&line) {
                    Ok(r) => {
                        let key = (r.command, r.pair, r.fingerprint);
                        if let Some(old) = entries.get(&key) {
                            if *old != r.payload {
                                eprintln!("warning: cache line {} conflicts with an earlier record for {}", n + 1, key.1);
                            }
                        }
                        entries.insert(key, r.payload);
                    }
                    Err(_) => eprintln!("warning: skipping malformed cache line {}", n + 1),
                }
            }
        }
        Ok(Cache {
            path: path.to_path_buf(),
            entries,
        })
    }

    fn get(&self, command: &str, pair: &str, fp: &str) -> Option<Value> {
        self.entries
            .get(&(command.to_string(), pair.to_string(), fp.to_string()))
            .cloned()
    }

    fn put(&mut self, command: &str, pair: &str, fp: &str, pass: bool, payload: &impl Serialize) -> Result<(), String> {
        let payload = serde_json::to_value(payload).map_err(|e| e.to_string())?;
        let record = ResultRecord {
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            fingerprint: fp.to_string(),
            command: command.to_string(),
            pair: pair.to_string(),
            pass,
            payload: payload.clone(),
        };
        let line = serde_json::to_string(&record).map_err(|e| e.to_string())?;
        {
            let _guard = CACHE_LOCK.lock().map_err(|e| e.to_string())?;
            if let Some(dir) = self.path.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
                }
            }
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| format!("cannot write cache {}: {e}", self.path.display()))?;
            writeln!(f, "{line}").map_err(|e| e.to_string())?;
            f.flush().map_err(|e| e.to_string())?;
        }
        self.entries
            .insert((command.to_string(), pair.to_string(), fp.to_string()), payload);
        Ok(())
    }
}
