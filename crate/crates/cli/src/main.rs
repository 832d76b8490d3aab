//! Command-line front-end: parse a channel, run one computation, emit
//! machine-readable results (CSV or JSON) with a provenance header.
//!
//! Exit codes: 0 success, 2 usage error, 1 computation error.

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fblmac::{
    capacity_region, converse_check, density_table, exact_error, moments, outer_region,
    random_codebook, triple_from_table, BoundMode, DensityKind, DmMac, InputPair, RegionBoundary,
    SweepConfig,
};

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Parser)]
#[command(name = "fblmac", version, about = "Finite-blocklength DM-MAC converse bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    #[value(name = "explicit-exact")]
    ExplicitExact,
    #[value(name = "explicit-be")]
    ExplicitBe,
    #[value(name = "normal")]
    Normal,
}

impl ModeArg {
    fn to_mode(self) -> BoundMode {
        match self {
            ModeArg::ExplicitExact => BoundMode::ExplicitExact,
            ModeArg::ExplicitBe => BoundMode::ExplicitBe,
            ModeArg::Normal => BoundMode::NormalApprox,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Structured,
}

#[derive(Args)]
struct OutputOpts {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Report rates in bits instead of nats (rescales by 1/ln 2 at
    /// output only).
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct InputOpts {
    /// Use uniform input distributions (the default).
    #[arg(long)]
    uniform: bool,
    /// Comma-separated distribution over the first input alphabet.
    #[arg(long)]
    p1: Option<String>,
    /// Comma-separated distribution over the second input alphabet.
    #[arg(long)]
    p2: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Information densities' moments (I, V, T) for one input pair.
    Info {
        #[arg(long)]
        channel: String,
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Bound triple at fixed inputs.
    Bounds {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "explicit-exact")]
        mode: ModeArg,
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Outer-region sweep over the input-distribution grid.
    Region {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "explicit-exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 32)]
        grid: u32,
        #[arg(long, default_value_t = 101)]
        lambdas: usize,
        #[arg(long, default_value_t = 1)]
        u: u8,
        /// Add conservative Lipschitz padding per constraint.
        #[arg(long)]
        pad: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// First-order capacity region sweep.
    Capacity {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 32)]
        grid: u32,
        #[arg(long, default_value_t = 101)]
        lambdas: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Tail-engine oracle battery (exactness, sandwich, soundness).
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Random codebook, exact error enumeration, converse check.
    Simulate {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "explicit-exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 8)]
        grid: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    Usage(String),
    Computation(String),
}

impl From<fblmac::Error> for RunError {
    fn from(e: fblmac::Error) -> Self {
        RunError::Computation(e.to_string())
    }
}

fn check_eps(eps: f64) -> Result<(), RunError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(RunError::Usage(format!(
            "--eps must lie strictly inside (0,1), got {eps}"
        )));
    }
    Ok(())
}

fn load_channel(path: &str) -> Result<DmMac, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Computation(format!("cannot read {path}: {e}")))?;
    Ok(DmMac::from_json(&text)?)
}

fn parse_pmf(text: &str, name: &str) -> Result<Vec<f64>, RunError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| RunError::Usage(format!("bad {name} entry {s:?}: {e}")))
        })
        .collect()
}

fn resolve_inputs(channel: &DmMac, opts: &InputOpts) -> Result<InputPair, RunError> {
    match (&opts.p1, &opts.p2) {
        (None, None) => Ok(InputPair::uniform(channel)),
        (Some(p1), Some(p2)) => {
            if opts.uniform {
                return Err(RunError::Usage(
                    "--uniform conflicts with --p1/--p2".into(),
                ));
            }
            Ok(InputPair::new(parse_pmf(p1, "--p1")?, parse_pmf(p2, "--p2")?)?)
        }
        _ => Err(RunError::Usage(
            "--p1 and --p2 must be given together".into(),
        )),
    }
}

/// Scientific notation with 13 significant digits.
fn num(x: f64) -> String {
    format!("{x:.12e}")
}

struct Report {
    header: Vec<(String, String)>,
    /// CSV column names and rows; the structured format mirrors them.
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    fn render_structured(&self) -> String {
        let mut root = serde_json::Map::new();
        let mut prov = serde_json::Map::new();
        for (k, v) in &self.header {
            prov.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        root.insert("provenance".into(), serde_json::Value::Object(prov));
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    obj.insert(c.clone(), serde_json::Value::String(v.clone()));
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), serde_json::Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(root)).unwrap();
        s.push('\n');
        s
    }

    fn emit(&self, output: &OutputOpts) -> Result<(), RunError> {
        let text = match output.format {
            FormatArg::Csv => self.render_csv(),
            FormatArg::Structured => self.render_structured(),
        };
        match &output.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| RunError::Computation(format!("cannot write {path}: {e}"))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn provenance(entries: &[(&str, String)]) -> Vec<(String, String)> {
    let mut out = vec![("fblmac".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    out.extend(entries.iter().map(|(k, v)| (k.to_string(), v.clone())));
    out
}

fn units(bits: bool) -> &'static str {
    if bits {
        "bits"
    } else {
        "nats"
    }
}

/// Rate-type value (nats per use or total nats): rescaled under --bits.
fn rate(x: f64, bits: bool) -> f64 {
    if bits {
        x / LN2
    } else {
        x
    }
}

fn region_report(
    boundary: &RegionBoundary,
    caps_label: [&str; 3],
    bits: bool,
    extra: &[(&str, String)],
) -> Report {
    let mut header = vec![
        ("subcommand".to_string(), extra[0].1.clone()),
        ("mode".to_string(), boundary.meta.mode.clone()),
        (
            "grid_resolution".to_string(),
            boundary.meta.grid_resolution.to_string(),
        ),
        (
            "lambda_count".to_string(),
            boundary.meta.lambda_count.to_string(),
        ),
        (
            "u_cardinality".to_string(),
            boundary.meta.u_cardinality.to_string(),
        ),
        ("padded".to_string(), boundary.meta.padded.to_string()),
        (
            "infeasible_candidates".to_string(),
            boundary.meta.infeasible_candidates.to_string(),
        ),
        ("units".to_string(), units(bits).to_string()),
    ];
    if let Some(n) = boundary.meta.n {
        header.push(("n".to_string(), n.to_string()));
    }
    if let Some(eps) = boundary.meta.eps {
        header.push(("eps".to_string(), eps.to_string()));
    }
    for (k, v) in &extra[1..] {
        header.push((k.to_string(), v.clone()));
    }
    let mut header_full = provenance(&[]);
    header_full.extend(header);
    Report {
        header: header_full,
        columns: vec![
            "lambda".into(),
            "R1".into(),
            "R2".into(),
            caps_label[0].into(),
            caps_label[1].into(),
            caps_label[2].into(),
        ],
        rows: boundary
            .points
            .iter()
            .map(|p| {
                vec![
                    num(p.lambda),
                    num(rate(p.r1, bits)),
                    num(rate(p.r2, bits)),
                    num(rate(p.bound.0, bits)),
                    num(rate(p.bound.1, bits)),
                    num(rate(p.bound.2, bits)),
                ]
            })
            .collect(),
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Info {
            channel,
            inputs,
            output,
        } => {
            let ch = load_channel(&channel)?;
            let pair = resolve_inputs(&ch, &inputs)?;
            let table = density_table(&ch, &pair)?;
            let bits = output.bits;
            let scale = if bits { LN2 } else { 1.0 };
            let rows = DensityKind::ALL
                .iter()
                .map(|kind| {
                    let m = moments(&table, *kind);
                    vec![
                        kind.label().to_string(),
                        num(m.mean / scale),
                        num(m.variance / (scale * scale)),
                        num(m.third_abs_central / (scale * scale * scale)),
                    ]
                })
                .collect();
            Report {
                header: provenance(&[
                    ("subcommand", "info".into()),
                    ("channel", channel),
                    ("units", units(bits).into()),
                ]),
                columns: vec!["density".into(), "I".into(), "V".into(), "T".into()],
                rows,
            }
            .emit(&output)
        }
        Command::Bounds {
            channel,
            n,
            eps,
            mode,
            inputs,
            output,
        } => {
            check_eps(eps)?;
            if n == 0 {
                return Err(RunError::Usage("--n must be positive".into()));
            }
            let ch = load_channel(&channel)?;
            let pair = resolve_inputs(&ch, &inputs)?;
            let table = density_table(&ch, &pair)?;
            let triple = triple_from_table(&table, n, eps, mode.to_mode())?;
            let bits = output.bits;
            let rows = triple
                .diag
                .iter()
                .zip(["rate1", "rate2", "sum"])
                .zip([triple.b1, triple.b2, triple.b12])
                .map(|((d, label), b)| {
                    vec![
                        label.to_string(),
                        num(rate(b, bits)),
                        num(rate(d.delta, bits)),
                        d.beta.map_or_else(|| "".into(), num),
                        d.gamma.map_or_else(|| "".into(), num),
                        d.threshold.map_or_else(|| "".into(), |t| num(rate(t, bits))),
                        format!("{:?}", d.path),
                    ]
                })
                .collect();
            Report {
                header: provenance(&[
                    ("subcommand", "bounds".into()),
                    ("channel", channel),
                    ("n", n.to_string()),
                    ("eps", eps.to_string()),
                    ("mode", mode.to_mode().label().into()),
                    ("units", units(bits).into()),
                ]),
                columns: [
                    "constraint",
                    "bound",
                    "delta",
                    "beta",
                    "gamma",
                    "threshold",
                    "path",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect(),
                rows,
            }
            .emit(&output)
        }
        Command::Region {
            channel,
            n,
            eps,
            mode,
            grid,
            lambdas,
            u,
            pad,
            output,
        } => {
            check_eps(eps)?;
            if n == 0 {
                return Err(RunError::Usage("--n must be positive".into()));
            }
            if grid < 2 {
                return Err(RunError::Usage("--grid must be at least 2".into()));
            }
            if lambdas < 3 {
                return Err(RunError::Usage("--lambdas must be at least 3".into()));
            }
            if !(1..=3).contains(&u) {
                return Err(RunError::Usage("--u must be 1, 2, or 3".into()));
            }
            let ch = load_channel(&channel)?;
            let cfg = SweepConfig {
                grid_resolution: grid,
                lambda_count: lambdas,
                u_cardinality: u,
                padding: pad,
            };
            let boundary = outer_region(&ch, n, eps, &cfg, mode.to_mode())?;
            region_report(
                &boundary,
                ["b1", "b2", "b12"],
                output.bits,
                &[("subcommand", "region".to_string()), ("channel", channel)],
            )
            .emit(&output)
        }
        Command::Capacity {
            channel,
            grid,
            lambdas,
            output,
        } => {
            if grid < 2 {
                return Err(RunError::Usage("--grid must be at least 2".into()));
            }
            if lambdas < 3 {
                return Err(RunError::Usage("--lambdas must be at least 3".into()));
            }
            let ch = load_channel(&channel)?;
            let boundary = capacity_region(&ch, grid, lambdas)?;
            region_report(
                &boundary,
                ["i1", "i2", "i12"],
                output.bits,
                &[("subcommand", "capacity".to_string()), ("channel", channel)],
            )
            .emit(&output)
        }
        Command::Validate { seed, output } => run_validate(seed, &output),
        Command::Simulate {
            channel,
            n,
            m1,
            m2,
            seed,
            mode,
            grid,
            output,
        } => {
            if n == 0 || m1 == 0 || m2 == 0 {
                return Err(RunError::Usage(
                    "--n, --m1, --m2 must be positive".into(),
                ));
            }
            let ch = load_channel(&channel)?;
            let code = random_codebook(&ch, &InputPair::uniform(&ch), m1, m2, n, seed)?;
            let report = exact_error(&ch, &code)?;
            let bits = output.bits;
            let ln_m1 = (m1 as f64).ln();
            let ln_m2 = (m2 as f64).ln();
            let mut rows = vec![
                vec!["epsilon".to_string(), num(report.epsilon)],
                vec!["ln_m1".to_string(), num(rate(ln_m1, bits))],
                vec!["ln_m2".to_string(), num(rate(ln_m2, bits))],
            ];
            if report.epsilon > 1e-12 && report.epsilon < 1.0 - 1e-12 {
                let verdict =
                    converse_check(ln_m1, ln_m2, report.epsilon, &ch, n, mode.to_mode(), grid)?;
                for (label, c) in [
                    ("rate1", &verdict.rate1),
                    ("rate2", &verdict.rate2),
                    ("sum", &verdict.sum),
                ] {
                    rows.push(vec![
                        format!("bound_{label}"),
                        c.bound.map_or_else(|| "unconstrained".into(), |b| num(rate(b, bits))),
                    ]);
                    rows.push(vec![
                        format!("slack_{label}"),
                        c.slack.map_or_else(|| "".into(), |s| num(rate(s, bits))),
                    ]);
                }
                rows.push(vec![
                    "verdict".to_string(),
                    if verdict.pass { "pass" } else { "fail" }.to_string(),
                ]);
            } else {
                rows.push(vec![
                    "verdict".to_string(),
                    "skipped (epsilon degenerate)".to_string(),
                ]);
            }
            Report {
                header: provenance(&[
                    ("subcommand", "simulate".into()),
                    ("channel", channel),
                    ("n", n.to_string()),
                    ("m1", m1.to_string()),
                    ("m2", m2.to_string()),
                    ("seed", seed.to_string()),
                    ("mode", mode.to_mode().label().into()),
                    ("grid_resolution", grid.to_string()),
                    ("units", units(bits).into()),
                ]),
                columns: vec!["quantity".into(), "value".into()],
                rows,
            }
            .emit(&output)
        }
    }
}

/// Deterministic tail-engine battery: exact sums vs brute force, lattice
/// sandwich, threshold soundness, Monte Carlo coverage.
fn run_validate(seed: u64, output: &OutputOpts) -> Result<(), RunError> {
    use fblmac::rng::SplitMix64;
    use fblmac::{
        cdf, exact_sum_distribution, lattice_sum_distribution, solve_delta, AtomicDistribution,
        Rounding, SolveMode, TailTarget,
    };

    fn random_law(rng: &mut SplitMix64, k: usize) -> AtomicDistribution {
        let values: Vec<f64> = (0..k).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.next_f64() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let probs = raw.iter().map(|p| p / total).collect();
        AtomicDistribution::new(values, probs).expect("valid random law")
    }
    let mut rng = SplitMix64::new(seed);

    let mut failures = 0usize;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut record = |name: &str, pass: bool, detail: String| {
        rows.push(vec![
            name.to_string(),
            if pass { "PASS" } else { "FAIL" }.to_string(),
            detail,
        ]);
    };

    // Exact sums match brute-force sequence enumeration.
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..12 {
        let k = 2 + (rng.next_u64() % 3) as usize;
        let law = random_law(&mut rng, k);
        for n in 1..=5u32 {
            let exact = exact_sum_distribution(&law, n).expect("guard not hit");
            let brute = brute_force_sum(&law, n);
            if exact.values().len() != brute.len() {
                failures += 1;
                continue;
            }
            for (i, (v, p)) in brute.iter().enumerate() {
                worst = worst
                    .max((exact.values()[i] - v).abs())
                    .max((exact.probs()[i] - p).abs());
            }
            checked += 1;
        }
    }
    let pass = worst < 1e-12 && failures == 0;
    if !pass {
        failures += 1;
    }
    record(
        "exact_vs_brute_force",
        pass,
        format!("{checked} laws; worst deviation {worst:.3e}"),
    );

    // Lattice CDFs sandwich the exact CDF.
    let mut sandwich_ok = true;
    let mut points = 0usize;
    for _ in 0..6 {
        let law = random_law(&mut rng, 3);
        let n = 5;
        let exact = exact_sum_distribution(&law, n).unwrap();
        let step = (law.spread() / 64.0).max(1e-6);
        let up = lattice_sum_distribution(&law, n, step, Rounding::Up).unwrap();
        let down = lattice_sum_distribution(&law, n, step, Rounding::Down).unwrap();
        let lo = exact.min_value() - 0.5;
        let hi = exact.max_value() + 0.5;
        for _ in 0..200 {
            let t = lo + rng.next_f64() * (hi - lo);
            if cdf(&up, t) > cdf(&exact, t) + 1e-12 || cdf(&exact, t) > cdf(&down, t) + 1e-12 {
                sandwich_ok = false;
            }
            points += 1;
        }
    }
    if !sandwich_ok {
        failures += 1;
    }
    record(
        "lattice_sandwich",
        sandwich_ok,
        format!("{points} thresholds"),
    );

    // solve_delta soundness in both modes.
    let mut sound = true;
    let mut solved = 0usize;
    for _ in 0..8 {
        let law = random_law(&mut rng, 3);
        let n = 5;
        let mean = law.mean();
        let exact = exact_sum_distribution(&law, n).unwrap();
        for target in [0.1, 0.33, 0.71, 0.95] {
            let tt = TailTarget::new(target, n).unwrap();
            for mode in [
                SolveMode::Exact,
                SolveMode::Lattice {
                    step: (law.spread() / 128.0).max(1e-6),
                },
            ] {
                let sol = solve_delta(&law, mean, tt, mode).unwrap();
                if cdf(&exact, n as f64 * (mean - sol.delta)) < target {
                    sound = false;
                }
                solved += 1;
            }
        }
    }
    if !sound {
        failures += 1;
    }
    record("solve_delta_soundness", sound, format!("{solved} solves"));

    // Monte Carlo estimator coverage on a fixed midrange threshold.
    {
        use fblmac::{density_table, monte_carlo_tail, DensityKind, InputPair, Threshold};
        let ch = DmMac::new(
            2,
            2,
            3,
            vec![
                vec![vec![0.8, 0.15, 0.05], vec![0.1, 0.7, 0.2]],
                vec![vec![0.05, 0.8, 0.15], vec![0.2, 0.1, 0.7]],
            ],
        )
        .expect("fixed kernel");
        let table = density_table(&ch, &InputPair::uniform(&ch)).expect("table");
        let n = 5u32;
        let law = AtomicDistribution::from_table(&table, DensityKind::SumRate).expect("marginal");
        let exact = exact_sum_distribution(&law, n).expect("exact law");
        let t = n as f64 * law.mean();
        let mut covered = 0usize;
        let trials = 20usize;
        for s in 0..trials {
            let mc = monte_carlo_tail(
                &table,
                DensityKind::SumRate,
                n,
                Threshold::Finite(t),
                20_000,
                seed.wrapping_add(s as u64),
            )
            .expect("mc");
            if (mc.estimate - cdf(&exact, t)).abs() <= mc.half_width {
                covered += 1;
            }
        }
        let pass = covered * 10 >= trials * 9;
        if !pass {
            failures += 1;
        }
        record(
            "monte_carlo_coverage",
            pass,
            format!("{covered}/{trials} CIs cover the exact tail"),
        );
    }

    let report = Report {
        header: provenance(&[
            ("subcommand", "validate".into()),
            ("seed", seed.to_string()),
        ]),
        columns: vec!["check".into(), "status".into(), "detail".into()],
        rows,
    };
    report.emit(output)?;
    if failures > 0 {
        return Err(RunError::Computation(format!(
            "{failures} validation check(s) failed"
        )));
    }
    Ok(())
}

/// Brute-force law of the n-fold sum by enumerating all k^n sequences;
/// the independent oracle behind the validate battery.
fn brute_force_sum(law: &fblmac::AtomicDistribution, n: u32) -> Vec<(f64, f64)> {
    let k = law.values().len();
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut idx = vec![0usize; n as usize];
    loop {
        let mut value = 0.0;
        let mut prob = 1.0;
        for &i in &idx {
            value += law.values()[i];
            prob *= law.probs()[i];
        }
        atoms.push((value, prob));
        let mut pos = n as usize;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
        }
        if idx.iter().all(|&v| v == 0) {
            break;
        }
    }
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (v, p) in atoms {
        match merged.last_mut() {
            Some((mv, mp)) if v - *mv <= 1e-12 => *mp += p,
            _ => merged.push((v, p)),
        }
    }
    merged
}
