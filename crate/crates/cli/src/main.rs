use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use zn_thomae::checks::{self, Suite, SuiteConfig};
use zn_thomae::denominators::{
    evaluate, reduce_common, DenominatorContext, EvalMode, Evaluation, ExponentMatrix,
};
use zn_thomae::divisor::{count_divisors, enumerate_divisors, is_valid};
use zn_thomae::ffunc::f_chain;
use zn_thomae::operators::{apply_m, apply_n, apply_n_beta, apply_t, apply_t_hat};
use zn_thomae::orbits::{build_graph, count_family, fit_count_polynomial, m_orbits, CountRow, FamilySpec};
use zn_thomae::{CurveSpec, DivisorKind, LeveledDivisor};

#[derive(Parser, Debug)]
#[command(name = "zn-thomae", version, about = "Branch-point divisors and Thomae denominators on cyclic covers")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites and report every violation.
    Verify {
        /// Restrict curve-based suites to this curve instead of the battery.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Comma-separated suite names, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Largest n in the battery; also scales the f-table ranges.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..))]
        max_n: u32,
        /// Largest number of branch points in the battery.
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
        max_points: u64,
        /// Seed for the random z-value assignments.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List or count the non-special divisors of a curve.
    Enumerate {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_enum, default_value_t = KindArg::Xi)]
        kind: KindArg,
        #[arg(long)]
        count_only: bool,
        /// Only divisors whose support avoids this point.
        #[arg(long)]
        avoid: Option<usize>,
    },
    /// Apply one operator to a divisor.
    Apply {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        /// `Nbeta:B`, `M:K`, `T:Q,R`, `That:Q,R` or `N`.
        #[arg(long)]
        op: String,
    },
    /// Print the table of f for modulus n and step d.
    Ftable {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
    },
    /// Compute a denominator of a divisor as an exponent matrix.
    Denominator {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        /// `h`, `g:BETA` or `q:Q,GAMMA`.
        #[arg(long, default_value = "h")]
        which: String,
        /// Evaluate at the z-values stored in the curve file.
        #[arg(long, value_enum)]
        evaluate: Option<EvalArg>,
        /// Divide out the factor shared by every valid divisor of the curve.
        #[arg(long)]
        reduce: bool,
        /// Refuse curves with more valid divisors than this.
        #[arg(long, default_value_t = 200_000)]
        max_vertices: u64,
    },
    /// Components of the operator graph and M-orbits.
    Orbits {
        #[arg(long)]
        curve: PathBuf,
        /// Two divisor files; prints a word in the generators joining them.
        #[arg(long, num_args = 2, value_names = ["FROM", "TO"])]
        witness: Option<Vec<PathBuf>>,
        /// Refuse curves with more valid divisors than this.
        #[arg(long, default_value_t = 200_000)]
        max_vertices: u64,
    },
    /// Count divisors and orbits along a family of curves.
    Counts {
        #[arg(long)]
        family: PathBuf,
        /// Inclusive range `A..B`.
        #[arg(long)]
        n_range: String,
        /// Fit an exact polynomial to the selected column.
        #[arg(long)]
        fit: bool,
        /// Polynomial degree for the fit; defaults to one less than the number of negative exponents.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, value_enum, default_value_t = Column::Delta)]
        column: Column,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Delta,
    Xi,
}

impl From<KindArg> for DivisorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Delta => DivisorKind::Delta,
            KindArg::Xi => DivisorKind::Xi,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EvalArg {
    Exact,
    Log,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Column {
    Delta,
    Xi,
    Orbits,
}

impl Column {
    fn pick(self, row: &CountRow) -> &BigUint {
        match self {
            Column::Delta => &row.delta_total,
            Column::Xi => &row.xi_total,
            Column::Orbits => &row.m_orbits,
        }
    }
}

/// What a command produced and whether it found invariant violations.
struct Outcome {
    json: Value,
    text: String,
    csv: Option<String>,
    violations: bool,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome { json, text, csv: None, violations: false }
    }
}

struct Inputs(Vec<(String, String, String)>);

impl Inputs {
    fn new() -> Self {
        Inputs(Vec::new())
    }

    fn read(&mut self, role: &str, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.0.push((role.into(), path.display().to_string(), hex::encode(Sha256::digest(&bytes))));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn curve(&mut self, path: &Path) -> Result<CurveSpec> {
        let text = self.read("curve", path)?;
        CurveSpec::from_json_str(&text).with_context(|| format!("invalid curve file {}", path.display()))
    }

    fn divisor(&mut self, role: &str, path: &Path, curve: &CurveSpec) -> Result<LeveledDivisor> {
        let text = self.read(role, path)?;
        let d = LeveledDivisor::from_json_str(&text).with_context(|| format!("invalid divisor file {}", path.display()))?;
        d.check_shape(curve).with_context(|| format!("divisor {} does not fit the curve", path.display()))?;
        Ok(d)
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.0.iter().map(|(role, path, digest)| json!({"role": role, "path": path, "sha256": digest})).collect(),
        )
    }

    fn header(&self) -> String {
        let mut s = format!("# zn-thomae {}\n", env!("CARGO_PKG_VERSION"));
        for (role, path, digest) in &self.0 {
            let _ = writeln!(s, "# {role} {path} sha256={digest}");
        }
        s
    }
}

fn require_xi(d: &LeveledDivisor) -> Result<()> {
    if d.kind() != DivisorKind::Xi {
        bail!("this command needs a divisor of kind xi, got {}", d.kind());
    }
    Ok(())
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("expected two comma-separated values in {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("expected a range A..B, got {s:?}"))?;
    let (a, b): (u32, u32) = (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?);
    if a < 2 || a > b {
        bail!("range {s:?} must satisfy 2 <= A <= B");
    }
    Ok(a..=b)
}

fn run_verify(curve: Option<&Path>, suite: &str, config: SuiteConfig, inputs: &mut Inputs) -> Result<Outcome> {
    let suites = Suite::parse_list(suite).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        anyhow!("unknown suite in {suite:?}; expected `all` or some of {}", names.join(", "))
    })?;
    let curves = curve.map(|p| inputs.curve(p)).transpose()?.map(|c| vec![c]);
    let reports = checks::run_suites(&suites, curves.as_deref(), config);
    let violations = reports.iter().any(|r| !r.passed());
    let mut text = String::new();
    for r in &reports {
        let _ = writeln!(text, "{}", r.summary());
        for f in &r.findings {
            let _ = writeln!(text, "  violation: {f}");
        }
        for n in &r.notes {
            let _ = writeln!(text, "  {n}");
        }
    }
    let json = json!({
        "config": {"max_n": config.max_n, "max_points": config.max_points, "seed": config.seed},
        "suites": reports,
        "passed": !violations,
    });
    Ok(Outcome { json, text, csv: None, violations })
}

fn run_enumerate(curve: &CurveSpec, kind: DivisorKind, count_only: bool, avoid: Option<usize>) -> Result<Outcome> {
    if let Some(a) = avoid {
        if a >= curve.num_points() {
            bail!("point {a} does not exist; the curve has {} points", curve.num_points());
        }
    }
    let count = count_divisors(curve, kind, avoid);
    if count_only {
        let json = json!({"kind": kind, "avoid": avoid, "count": count.to_string()});
        let mut out = Outcome::ok(json, format!("{count}\n"));
        out.csv = Some(format!("count\n{count}\n"));
        return Ok(out);
    }
    let list: Vec<LeveledDivisor> = enumerate_divisors(curve, kind)
        .into_iter()
        .filter(|d| avoid.is_none_or(|a| d.exponent(curve.n(), a) == 0))
        .collect();
    let violations = BigUint::from(list.len()) != count;
    let mut text = String::new();
    let mut csv = String::from("levels,exponents\n");
    for d in &list {
        let _ = writeln!(text, "{}", d.display(curve));
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(csv, "{},{}", join(d.levels()), join(&d.exponents(curve.n())));
    }
    let _ = writeln!(text, "{} divisors", list.len());
    if violations {
        let _ = writeln!(text, "violation: enumeration found {} but the count is {count}", list.len());
    }
    let json = json!({
        "kind": kind,
        "avoid": avoid,
        "count": count.to_string(),
        "divisors": list.iter().map(|d| json!({"levels": d.levels(), "exponents": d.exponents(curve.n()), "display": d.display(curve)})).collect::<Vec<_>>(),
    });
    Ok(Outcome { json, text, csv: Some(csv), violations })
}

fn run_apply(curve: &CurveSpec, d: &LeveledDivisor, op: &str) -> Result<Outcome> {
    let (name, arg) = op.split_once(':').unwrap_or((op, ""));
    let image = match name {
        "Nbeta" => apply_n_beta(curve, d, arg.trim().parse().context("Nbeta needs an integer beta")?)?,
        "M" => apply_m(curve, d, arg.trim().parse().context("M needs an integer k")?)?,
        "N" if arg.is_empty() => apply_n(curve, d)?,
        "T" => {
            let (q, r) = parse_pair(arg)?;
            apply_t(curve, d, q, r)?
        }
        "That" => {
            let (q, r) = parse_pair(arg)?;
            apply_t_hat(curve, d, q, r)?
        }
        _ => bail!("unknown operator {op:?}; expected Nbeta:B, M:K, T:Q,R, That:Q,R or N"),
    };
    let valid = is_valid(curve, &image);
    let text = format!("{} -> {}\n", d.display(curve), image.display(curve));
    let mut out = Outcome::ok(json!({"op": op, "input": d.to_json_value(), "output": image.to_json_value(), "valid": valid}), text);
    if !valid && is_valid(curve, d) {
        out.violations = true;
        out.text.push_str("violation: the image fails the cardinality conditions\n");
    }
    Ok(out)
}

fn run_ftable(n: u32, d: u32) -> Result<Outcome> {
    let t = f_chain(n, d)?;
    let rows: Vec<String> = t.values.iter().enumerate().map(|(l, v)| format!("{l},{v}")).collect();
    let text = format!("{}\nc={}\n", rows.join(";"), t.cmax);
    let mut out = Outcome::ok(json!({"n": n, "d": d, "f": t.values, "c": t.cmax}), text);
    out.csv = Some(t.to_csv());
    Ok(out)
}

fn denominator_of(ctx: &DenominatorContext, xi: &LeveledDivisor, which: &str) -> Result<ExponentMatrix> {
    let (name, arg) = which.split_once(':').unwrap_or((which, ""));
    Ok(match name {
        "h" if arg.is_empty() => ctx.full_denominator(xi),
        "g" => ctx.pmt_denominator(xi, arg.trim().parse().context("g needs an integer beta")?)?,
        "q" => {
            let (q, gamma) = parse_pair(arg)?;
            ctx.pmt_gamma_denominator(xi, q, gamma as u32)?
        }
        _ => bail!("unknown denominator {which:?}; expected h, g:BETA or q:Q,GAMMA"),
    })
}

fn run_denominator(
    curve: &CurveSpec,
    xi: &LeveledDivisor,
    which: &str,
    eval: Option<EvalArg>,
    reduce: bool,
    max_vertices: u64,
) -> Result<Outcome> {
    require_xi(xi)?;
    if !is_valid(curve, xi) {
        bail!("the divisor {} fails the cardinality conditions", xi.display(curve));
    }
    let ctx = DenominatorContext::new(curve);
    let mut m = denominator_of(&ctx, xi, which)?;
    let mut common = None;
    if reduce {
        check_size(curve, max_vertices)?;
        let all = enumerate_divisors(curve, DivisorKind::Xi);
        let mut mats = Vec::with_capacity(all.len());
        let mut own = None;
        for x in &all {
            if let Ok(mat) = denominator_of(&ctx, x, which) {
                if x == xi {
                    own = Some(mats.len());
                }
                mats.push(mat);
            }
        }
        let (minima, reduced) = reduce_common(curve, &mats);
        m = reduced[own.expect("the divisor is valid")].clone();
        common = Some(minima);
    }
    let mut json = m.to_json();
    let mut text = format!("{}\ndegree {}\n", m.display(curve), m.degree());
    if let Some(minima) = &common {
        json["common_factor"] = Value::Array(
            minima.iter().map(|((a, b), v)| json!({"alpha_i": a, "alpha_j": b, "exp_unit": v})).collect(),
        );
        for ((a, b), v) in minima {
            let _ = writeln!(text, "removed class pair ({a},{b}) exponent {v}");
        }
    }
    json["degree"] = json!(m.degree());
    if let Some(e) = eval {
        let mode = if e == EvalArg::Exact { EvalMode::ExactRational } else { EvalMode::LogAbs };
        let value = evaluate(&m, curve, mode)?;
        let (v, line) = match value {
            Evaluation::Exact(q) => (json!({"exact": q.to_string()}), format!("value {q}")),
            Evaluation::LogAbs { log_abs, sign } => {
                (json!({"log_abs": log_abs, "sign": sign}), format!("log|value| {log_abs} sign {sign}"))
            }
        };
        json["value"] = v;
        let _ = writeln!(text, "{line}");
    }
    Ok(Outcome::ok(json, text))
}

fn check_size(curve: &CurveSpec, max_vertices: u64) -> Result<()> {
    let count = count_divisors(curve, DivisorKind::Xi, None);
    if count > BigUint::from(max_vertices) {
        bail!("the curve has {count} valid divisors, above the limit {max_vertices}");
    }
    Ok(())
}

fn run_orbits(curve: &CurveSpec, witness: Option<(LeveledDivisor, LeveledDivisor)>, max_vertices: u64) -> Result<Outcome> {
    check_size(curve, max_vertices)?;
    let graph = build_graph(curve);
    let components = graph.components();
    let orbits = m_orbits(curve, graph.vertices());
    let invalid = graph.invalid_images();
    let mut text = format!(
        "{} vertices, {} edges, {} components, {} M-orbits\n",
        graph.num_vertices(),
        graph.num_edges(),
        components.len(),
        orbits.len()
    );
    for (i, comp) in components.iter().enumerate() {
        let _ = writeln!(text, "component {i}: {} vertices, e.g. {}", comp.len(), graph.vertices()[comp[0]].display(curve));
    }
    for (v, g) in invalid {
        let _ = writeln!(text, "violation: {g} sends {} outside the valid set", graph.vertices()[*v].display(curve));
    }
    let mut json = json!({
        "vertices": graph.num_vertices(),
        "edges": graph.num_edges(),
        "components": components.iter().map(|c| c.iter().map(|&v| graph.vertices()[v].levels().to_vec()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "m_orbits": orbits.len(),
        "invalid_images": invalid.iter().map(|(v, g)| json!({"levels": graph.vertices()[*v].levels(), "generator": g.to_string()})).collect::<Vec<_>>(),
    });
    if let Some((from, to)) = witness {
        require_xi(&from)?;
        require_xi(&to)?;
        let word = graph.witness(&from, &to)?;
        match &word {
            Some(w) => {
                let names: Vec<String> = w.iter().map(ToString::to_string).collect();
                let _ = writeln!(text, "witness: {}", if names.is_empty() { "identity".into() } else { names.join(" ") });
            }
            None => {
                let _ = writeln!(text, "no word joins {} and {}", from.display(curve), to.display(curve));
            }
        }
        json["witness"] = json!(word.map(|w| w.iter().map(ToString::to_string).collect::<Vec<_>>()));
    }
    Ok(Outcome { json, text, csv: None, violations: !invalid.is_empty() })
}

fn run_counts(
    family: FamilySpec,
    range: std::ops::RangeInclusive<u32>,
    fit: bool,
    degree: Option<usize>,
    column: Column,
) -> Result<Outcome> {
    let report = count_family(&family, range, false);
    let mut json = report.to_json();
    let mut text = String::from("n\tdelta\txi\tm_orbits\n");
    let mut csv = String::from("n,delta_total,xi_total,m_orbits\n");
    for r in &report.rows {
        let _ = writeln!(text, "{}\t{}\t{}\t{}", r.n, r.delta_total, r.xi_total, r.m_orbits);
        let _ = writeln!(csv, "{},{},{},{}", r.n, r.delta_total, r.xi_total, r.m_orbits);
    }
    if !report.skipped.is_empty() {
        let _ = writeln!(text, "skipped n = {:?}", report.skipped);
    }
    if fit {
        let degree = degree.unwrap_or(family.q().saturating_sub(1));
        let series: Vec<(i64, BigInt)> = report.series(|r| column.pick(r));
        let f = fit_count_polynomial(&series, degree)?;
        let _ = writeln!(text, "fit: {}", f.display());
        let _ = writeln!(text, "residuals: {}", if f.exact() { "all zero" } else { "nonzero" });
        json["fit"] = json!({
            "column": format!("{column:?}").to_lowercase(),
            "degree": degree,
            "polynomial": f.display(),
            "coefficients": f.coefficients.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "residuals": f.residuals.iter().map(|(n, r)| json!({"n": n, "residual": r.to_string()})).collect::<Vec<_>>(),
            "exact": f.exact(),
        });
    }
    let mut out = Outcome::ok(json, text);
    out.csv = Some(csv);
    Ok(out)
}

fn dispatch(command: Command, inputs: &mut Inputs) -> Result<Outcome> {
    match command {
        Command::Verify { curve, suite, max_n, max_points, seed } => {
            let config = SuiteConfig { max_n, max_points: max_points as usize, seed };
            run_verify(curve.as_deref(), &suite, config, inputs)
        }
        Command::Enumerate { curve, kind, count_only, avoid } => {
            let c = inputs.curve(&curve)?;
            run_enumerate(&c, kind.into(), count_only, avoid)
        }
        Command::Apply { curve, divisor, op } => {
            let c = inputs.curve(&curve)?;
            let d = inputs.divisor("divisor", &divisor, &c)?;
            run_apply(&c, &d, &op)
        }
        Command::Ftable { n, d } => run_ftable(n, d),
        Command::Denominator { curve, divisor, which, evaluate, reduce, max_vertices } => {
            let c = inputs.curve(&curve)?;
            let d = inputs.divisor("divisor", &divisor, &c)?;
            run_denominator(&c, &d, &which, evaluate, reduce, max_vertices)
        }
        Command::Orbits { curve, witness, max_vertices } => {
            let c = inputs.curve(&curve)?;
            let pair = match witness.as_deref() {
                Some([a, b]) => Some((inputs.divisor("from", a, &c)?, inputs.divisor("to", b, &c)?)),
                _ => None,
            };
            run_orbits(&c, pair, max_vertices)
        }
        Command::Counts { family, n_range, fit, degree, column } => {
            let text = inputs.read("family", &family)?;
            let spec: FamilySpec = serde_json::from_str(&text)
                .with_context(|| format!("invalid family file {}", family.display()))?;
            let spec = FamilySpec::new(spec.c, spec.d)?;
            run_counts(spec, parse_range(&n_range)?, fit, degree, column)
        }
    }
}

/// Writes to stdout, tolerating a reader that closed the pipe early.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let name = format!("{:?}", cli.command).split([' ', '{']).next().unwrap_or_default().to_lowercase();
    let mut inputs = Inputs::new();
    let outcome = match dispatch(cli.command, &mut inputs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match cli.format {
        Format::Json => {
            let report = json!({
                "tool": "zn-thomae",
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "inputs": inputs.to_json(),
                "violations": outcome.violations,
                "result": outcome.json,
            });
            emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")));
        }
        Format::Csv => match &outcome.csv {
            Some(csv) => emit(&format!("{}{csv}", inputs.header())),
            None => {
                eprintln!("error: the {name} command has no CSV output");
                return ExitCode::from(1);
            }
        },
        Format::Human => emit(&format!("{}{}", inputs.header(), outcome.text)),
    }
    if outcome.violations {
        eprintln!("invariant violations found");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
