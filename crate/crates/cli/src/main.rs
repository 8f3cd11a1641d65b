//! `padic-haar`: tables, measures, lifts and the verification suite for
//! the p-adic rotation groups.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 budget
//! exceeded.

mod expr;
mod render;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use padic_haar::haar::{CylinderSet, HaarSampler, HaarSpace};
use padic_haar::hensel::{lift_all, lift_tower, DigitChooser, RandomDigits, ZeroDigits};
use padic_haar::integral::compare_measures;
use padic_haar::matrix::MatrixJson;
use padic_haar::padic::decode_digits;
use padic_haar::quotient::{
    brute_force_candidates, brute_force_gtilde, cardano_decompositions, closed_form_order, enumerate, Budget,
    DescriptorJson,
};
use padic_haar::rotation::{cardano_partner, rot2, rot3_axis, Axis, Branch, BranchedParam};
use padic_haar::verify::{self, Status, VerifyOptions};
use padic_haar::{Descriptor, Error, KappaLabel, OddPrime, ResidueInt, ResidueMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use render::{Format, Output, Table};

#[derive(Parser, Debug)]
#[command(name = "padic-haar", version, about = "Exact Haar measure on finite models of p-adic SO(2) and SO(3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value = "pretty", global = true)]
    format: Format,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Cap on brute-force candidate matrices.
    #[arg(long, global = true, env = "PADIC_HAAR_MAX_CANDIDATES")]
    max_candidates: Option<u128>,

    /// Cap on table size (for d = 3, on the number of Cardano triples).
    #[arg(long, global = true, env = "PADIC_HAAR_MAX_TABLE")]
    max_table: Option<u128>,
}

#[derive(Args, Debug, Clone)]
struct Group {
    /// Matrix size, 2 or 3.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Form label for d = 2: -v, p or up.
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<KappaLabel>,
    #[arg(long)]
    p: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form, enumerated and brute-force group orders.
    Orders {
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Restrict d = 2 to one label; all three by default.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<KappaLabel>,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// The finite group at level n as a JSON table.
    Enumerate {
        #[command(flatten)]
        g: Group,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "param")]
        oracle: Oracle,
    },
    /// Haar measure of a set expression over balls.
    Measure {
        #[command(flatten)]
        g: Group,
        /// Default radius level: balls have radius p^-n.
        #[arg(long)]
        n: u32,
        /// `I`, or NAME=DIGITS, or NAME=DIGITS:LEVEL. Repeatable.
        #[arg(long = "ball", required = true)]
        balls: Vec<String>,
        /// Expression over ball names (| - & ! and parentheses); the union
        /// of all balls by default. `G` is the whole group.
        #[arg(long)]
        expr: Option<String>,
    },
    /// Haar-random elements at a level, as digit strings.
    Sample {
        #[command(flatten)]
        g: Group,
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lift a solution to higher levels.
    Lift {
        #[command(flatten)]
        g: Group,
        /// Digit string (level read from its length), inline JSON, or @file.
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        to_level: Option<u32>,
        /// zero, or seed=K for uniform random digits.
        #[arg(long, default_value = "zero")]
        policy: String,
        /// Print every lift one level up instead of a tower.
        #[arg(long)]
        all: bool,
    },
    /// Both Cardano decompositions of an element of SO(3).
    Cardano {
        #[arg(long)]
        p: u64,
        /// Expected level; read from the encoding when omitted.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        element: String,
    },
    /// One rotation matrix from its parameter.
    Rot {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<KappaLabel>,
        /// Rotation axis for d = 3.
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        sigma: i64,
        #[arg(long, default_value = "P")]
        branch: Branch,
    },
    /// Run the verification suite.
    Verify {
        /// Check groups to run; all by default.
        groups: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Restrict grids to these primes.
        #[arg(long = "p", value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        tamper: bool,
    },
    /// Integral against counting measure of coordinate balls.
    CompareIntegral {
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<KappaLabel>,
        #[arg(long = "p", value_delimiter = ',', default_values_t = [3u64, 5, 7])]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Param,
    Brute,
    Both,
}

enum Failure {
    Usage(String),
    Budget(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapacityExceeded { .. } => Failure::Budget(e.to_string()),
            Error::NotOddPrime(_)
            | Error::Parse(_)
            | Error::LabelDimension { .. }
            | Error::DimensionMismatch { .. }
            | Error::ZeroLevel
            | Error::LevelOrder { .. }
            | Error::DescriptorMismatch(..)
            | Error::NotASolutionModPn { .. }
            | Error::NotAGroupElement { .. }
            | Error::InvalidBranchParam(_)
            | Error::PrimeMismatch { .. } => Failure::Usage(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut budget = Budget::default();
    if let Some(c) = cli.max_candidates {
        budget.max_candidates = c;
    }
    if let Some(t) = cli.max_table {
        budget.max_table = t;
    }
    let result = run(&cli.command, &budget).and_then(|out| {
        let text = out.render(cli.format).map_err(Failure::Usage)?;
        match &cli.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(out)
    });
    match result {
        Ok(out) if !out.ok => ExitCode::from(1),
        Ok(out) if out.incomplete => {
            eprintln!("budget exceeded: some checks were skipped");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: &Command, budget: &Budget) -> Res<Output> {
    match cmd {
        Command::Orders { d, kappa, p, n_max } => orders(*d, *kappa, *p, *n_max, budget),
        Command::Enumerate { g, n, oracle } => cmd_enumerate(g, *n, *oracle, budget),
        Command::Measure { g, n, balls, expr } => measure(g, *n, balls, expr.as_deref(), budget),
        Command::Sample { g, level, count, seed } => sample(g, *level, *count, *seed, budget),
        Command::Lift { g, matrix, to_level, policy, all } => lift(g, matrix, *to_level, policy, *all),
        Command::Cardano { p, n, element } => cardano(*p, *n, element, budget),
        Command::Rot { d, kappa, axis, p, n, sigma, branch } => rot(*d, *kappa, *axis, *p, *n, *sigma, *branch),
        Command::Verify { groups, only, primes, seed, tamper } => {
            let mut only = only.clone();
            only.extend(groups.iter().cloned());
            cmd_verify(VerifyOptions { only, primes: primes.clone(), budget: *budget, seed: *seed, tamper: *tamper })
        }
        Command::CompareIntegral { kappa, primes, n_max } => compare_integral(*kappa, primes, *n_max, budget),
    }
}

fn prime(p: u64) -> Res<OddPrime> {
    OddPrime::new(p).map_err(|_| usage(format!("p = {p} is not an odd prime")))
}

fn descriptor(g: &Group) -> Res<Descriptor> {
    let p = prime(g.p)?;
    Ok(Descriptor::new(KappaLabel::for_dim(g.d, g.kappa)?, p))
}

fn descriptor_json(d: Descriptor, n: u32) -> DescriptorJson {
    DescriptorJson { d: d.dim(), kappa: d.label, p: d.p.get(), n }
}

fn level(n: u32) -> Res<u32> {
    if n == 0 {
        return Err(usage("levels start at 1"));
    }
    Ok(n)
}

fn matrix_json(m: &ResidueMatrix) -> Value {
    serde_json::to_value(MatrixJson::from(m)).expect("matrix serializes")
}

/// A digit string (level from its length), inline JSON, or `@file`.
fn parse_matrix(s: &str, p: OddPrime, d: usize) -> Res<ResidueMatrix> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    let text = text.trim();
    if text.starts_with('{') {
        let j: MatrixJson = serde_json::from_str(text).map_err(|e| usage(format!("matrix JSON: {e}")))?;
        if j.p != p.get() || j.d != d {
            return Err(usage(format!("matrix header p={} d={} does not match p={p} d={d}", j.p, j.d)));
        }
        return Ok(ResidueMatrix::try_from(&j)?);
    }
    let digits = decode_digits(text, p)?;
    let cells = d * d;
    if digits.is_empty() || digits.len() % cells != 0 {
        return Err(usage(format!("{} digits do not fill a {d}x{d} matrix", digits.len())));
    }
    Ok(ResidueMatrix::decode(p, (digits.len() / cells) as u32, d, text)?)
}

/// Exact decimal expansion truncated to `places` digits.
fn decimal(r: &num_rational::BigRational, places: usize) -> String {
    let ten = BigInt::from(10);
    let mut int = r.numer() / r.denom();
    let mut rem = r.numer() % r.denom();
    if rem < BigInt::from(0) {
        int -= 1;
        rem += r.denom();
    }
    let mut s = format!("{int}.");
    for _ in 0..places {
        rem *= &ten;
        s += &(&rem / r.denom()).to_string();
        rem %= r.denom();
    }
    s
}

fn orders(d: usize, kappa: Option<KappaLabel>, p: u64, n_max: u32, budget: &Budget) -> Res<Output> {
    let pp = prime(p)?;
    let labels = match (d, kappa) {
        (2, None) => KappaLabel::BINARY.to_vec(),
        _ => vec![KappaLabel::for_dim(d, kappa)?],
    };
    let mut table = Table::new(&["d", "kappa", "p", "n", "formula", "enumerated", "brute", "match"]);
    let mut rows = Vec::new();
    let mut ok = true;
    for label in labels {
        for n in 1..=level(n_max)? {
            let formula = closed_form_order(label, pp, n);
            let t = enumerate(label, pp, n, budget)?;
            let brute = if brute_force_candidates(label.dim(), pp, n) <= budget.max_candidates {
                Some(brute_force_gtilde(label, pp, n, budget)?)
            } else {
                None
            };
            let brute_ok = brute.as_ref().is_none_or(|b| b.same_elements(&t));
            let m = formula == t.order().into() && brute_ok;
            ok &= m;
            let brute_s = brute.as_ref().map(|b| b.order().to_string()).unwrap_or_else(|| "skipped".into());
            table.push(vec![
                label.dim().to_string(),
                label.to_string(),
                p.to_string(),
                n.to_string(),
                formula.to_string(),
                t.order().to_string(),
                brute_s.clone(),
                m.to_string(),
            ]);
            rows.push(json!({
                "d": label.dim(), "kappa": label, "p": p, "n": n,
                "formula_order": formula.to_string(),
                "enumerated_order": t.order(),
                "brute_order": brute.as_ref().map(|b| Value::from(b.order())).unwrap_or(Value::from("skipped")),
                "match": m,
            }));
        }
    }
    Ok(Output {
        json: json!({"schema": "padic-haar/orders/v1", "rows": rows}),
        table: Some(table),
        text: None,
        ok,
        incomplete: false,
    })
}

fn cmd_enumerate(g: &Group, n: u32, oracle: Oracle, budget: &Budget) -> Res<Output> {
    let d = descriptor(g)?;
    let n = level(n)?;
    let param =
        matches!(oracle, Oracle::Param | Oracle::Both).then(|| enumerate(d.label, d.p, n, budget)).transpose()?;
    let brute = matches!(oracle, Oracle::Brute | Oracle::Both)
        .then(|| brute_force_gtilde(d.label, d.p, n, budget))
        .transpose()?;
    let ok = match (&param, &brute) {
        (Some(a), Some(b)) => a.same_elements(b),
        _ => true,
    };
    let t = param.as_ref().or(brute.as_ref()).expect("one oracle ran");
    let mut j = serde_json::to_value(t.to_json()).expect("table serializes");
    if let (Some(a), Some(b)) = (&param, &brute) {
        j["oracles_agree"] = json!(ok);
        j["brute_order"] = json!(b.order());
        j["param_order"] = json!(a.order());
    }
    let mut table = Table::new(&["index", "digits"]);
    for (i, m) in t.elements().iter().enumerate() {
        table.push(vec![i.to_string(), m.encode()]);
    }
    // a table is read back by tools, so JSON is its human form too
    let text = serde_json::to_string_pretty(&j).expect("table serializes") + "\n";
    Ok(Output { json: j, table: Some(table), text: Some(text), ok, incomplete: false })
}

fn measure(g: &Group, n: u32, balls: &[String], expr: Option<&str>, budget: &Budget) -> Res<Output> {
    let d = descriptor(g)?;
    let n = level(n)?;
    // name -> (center, radius level)
    let mut named: BTreeMap<String, (Option<ResidueMatrix>, u32)> = BTreeMap::new();
    let mut order = Vec::new();
    for b in balls {
        let (name, spec) = match b.split_once('=') {
            Some((name, spec)) => (name.trim().to_string(), Some(spec.trim())),
            None => (b.trim().to_string(), None),
        };
        if name == "G" {
            return Err(usage("G is reserved for the whole group"));
        }
        let entry = match spec {
            None if name == "I" => (None, n),
            None => return Err(usage(format!("ball {name:?} needs a center: {name}=DIGITS"))),
            Some(spec) => {
                let (digits, lvl) = match spec.rsplit_once(':') {
                    Some((dg, l)) => (dg, level(l.parse().map_err(|_| usage(format!("bad level in {spec:?}")))?)?),
                    None => (spec, n),
                };
                (Some(parse_matrix(digits, d.p, d.dim())?), lvl)
            }
        };
        order.push(name.clone());
        named.insert(name, entry);
    }
    let expr_text = expr.map(str::to_string).unwrap_or_else(|| order.join(" | "));
    let parsed = expr::parse(&expr_text).map_err(usage)?;
    let mut used = Vec::new();
    parsed.names(&mut used);
    let top = named.values().map(|(_, l)| *l).max().unwrap_or(n).max(n);
    let space = HaarSpace::build(d, top, budget)?;
    let mut sets: BTreeMap<String, CylinderSet> = BTreeMap::new();
    sets.insert("G".into(), space.full(1)?);
    for name in &used {
        if name == "G" {
            continue;
        }
        let (center, lvl) = named.get(name).ok_or_else(|| usage(format!("unknown ball {name:?}")))?;
        let c = match center {
            Some(c) if c.level() < *lvl => {
                return Err(usage(format!("center of {name} is only known to level {}", c.level())));
            }
            Some(c) => c.project(*lvl)?,
            None => ResidueMatrix::identity(d.p, *lvl, d.dim()),
        };
        sets.insert(name.clone(), space.ball(&c, *lvl)?);
    }
    let set = eval(&space, &parsed, &sets)?;
    let set = space.canonical(&set)?;
    let mu = space.measure(&set)?;
    let dec = decimal(&mu, 12);
    let j = json!({
        "schema": "padic-haar/measure/v1",
        "descriptor": descriptor_json(d, set.level),
        "expr": expr_text,
        "measure": mu.to_string(),
        "decimal": dec,
        "set": space.to_json(&set)?,
    });
    Ok(Output { json: j, table: None, text: Some(format!("{mu}\n{dec}\n")), ok: true, incomplete: false })
}

fn eval(space: &HaarSpace, e: &expr::Expr, sets: &BTreeMap<String, CylinderSet>) -> Res<CylinderSet> {
    use expr::Expr::*;
    Ok(match e {
        Name(n) => sets[n].clone(),
        Union(a, b) => space.union(&eval(space, a, sets)?, &eval(space, b, sets)?)?,
        Diff(a, b) => space.difference(&eval(space, a, sets)?, &eval(space, b, sets)?)?,
        Inter(a, b) => space.intersection(&eval(space, a, sets)?, &eval(space, b, sets)?)?,
        Not(a) => space.complement(&eval(space, a, sets)?)?,
    })
}

fn sample(g: &Group, lvl: u32, count: usize, seed: u64, budget: &Budget) -> Res<Output> {
    let d = descriptor(g)?;
    let lvl = level(lvl)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = match HaarSpace::build(d, lvl, budget) {
        Ok(space) => {
            let s = HaarSampler::new(&space)?;
            (0..count).map(|_| s.sample(lvl, &mut rng)).collect::<Result<Vec<_>, _>>()?
        }
        Err(Error::CapacityExceeded { .. }) => {
            let s = HaarSampler::lifting(d, budget)?;
            (0..count).map(|_| s.sample(lvl, &mut rng)).collect::<Result<Vec<_>, _>>()?
        }
        Err(e) => return Err(e.into()),
    };
    let enc: Vec<String> = samples.iter().map(|m| m.encode()).collect();
    let mut table = Table::new(&["index", "digits"]);
    for (i, s) in enc.iter().enumerate() {
        table.push(vec![i.to_string(), s.clone()]);
    }
    let j = json!({
        "schema": "padic-haar/samples/v1",
        "descriptor": descriptor_json(d, lvl),
        "seed": seed,
        "samples": enc,
    });
    let text = enc.join("\n") + "\n";
    Ok(Output { json: j, table: Some(table), text: Some(text), ok: true, incomplete: false })
}

fn chooser(policy: &str) -> Res<Box<dyn DigitChooser>> {
    if policy == "zero" {
        return Ok(Box::new(ZeroDigits));
    }
    match policy.strip_prefix("seed=").map(str::parse::<u64>) {
        Some(Ok(k)) => Ok(Box::new(RandomDigits(ChaCha8Rng::seed_from_u64(k)))),
        _ => Err(usage(format!("policy must be zero or seed=K, got {policy:?}"))),
    }
}

fn lift(g: &Group, matrix: &str, to_level: Option<u32>, policy: &str, all: bool) -> Res<Output> {
    let d = descriptor(g)?;
    let m = parse_matrix(matrix, d.p, d.dim())?;
    let (key, mats) = if all {
        if !d.form().is_special_orthogonal(&m)? {
            return Err(Error::NotASolutionModPn { level: m.level() }.into());
        }
        ("lifts", lift_all(&m, d.label)?)
    } else {
        let target = to_level.unwrap_or(m.level() + 1);
        ("tower", lift_tower(&m, d.label, target, chooser(policy)?.as_mut())?)
    };
    let text: String = mats.iter().map(|x| format!("{}  {x}\n", x.encode())).collect();
    let mut table = Table::new(&["level", "digits"]);
    for x in &mats {
        table.push(vec![x.level().to_string(), x.encode()]);
    }
    let mut j = json!({
        "schema": "padic-haar/lift/v1",
        "descriptor": descriptor_json(d, m.level()),
        "policy": if all { "all" } else { policy },
    });
    j[key] = Value::Array(mats.iter().map(matrix_json).collect());
    Ok(Output { json: j, table: Some(table), text: Some(text), ok: true, incomplete: false })
}

fn cardano(p: u64, n: Option<u32>, element: &str, budget: &Budget) -> Res<Output> {
    let pp = prime(p)?;
    let m = parse_matrix(element, pp, 3)?;
    if let Some(n) = n {
        if n != m.level() {
            return Err(usage(format!("element has level {}, --n is {n}", m.level())));
        }
    }
    let d = Descriptor::new(KappaLabel::Plus, pp);
    if !d.form().is_special_orthogonal(&m)? {
        return Err(Error::NotAGroupElement { level: m.level() }.into());
    }
    let triples = cardano_decompositions(&m, budget)?;
    let partners = triples.len() == 2 && cardano_partner(&triples[0])? == triples[1];
    let ok = triples.len() == 2 && partners;
    let mut table = Table::new(&["xi", "eta", "zeta"]);
    for t in &triples {
        table.push(vec![t.xi.to_string(), t.eta.to_string(), t.zeta.to_string()]);
    }
    let j = json!({
        "schema": "padic-haar/cardano/v1",
        "element": matrix_json(&m),
        "triples": triples.iter().map(|t| json!({
            "xi": t.xi.to_string(), "eta": t.eta.to_string(), "zeta": t.zeta.to_string(),
        })).collect::<Vec<_>>(),
        "count": triples.len(),
        "partners": partners,
    });
    let mut text: String = triples.iter().map(|t| format!("{t}\n")).collect();
    text += &format!("{} decompositions, partners {partners}\n", triples.len());
    Ok(Output { json: j, table: Some(table), text: Some(text), ok, incomplete: false })
}

fn rot(
    d: usize,
    kappa: Option<KappaLabel>,
    axis: Option<Axis>,
    p: u64,
    n: u32,
    sigma: i64,
    branch: Branch,
) -> Res<Output> {
    let pp = prime(p)?;
    let n = level(n)?;
    let prm = BranchedParam::new(ResidueInt::new(pp, n, sigma)?, branch);
    let m = match d {
        2 => {
            if axis.is_some() {
                return Err(usage("--axis applies to d = 3"));
            }
            rot2(KappaLabel::for_dim(2, kappa)?, &prm)?
        }
        3 => {
            if kappa.is_some_and(|k| k != KappaLabel::Plus) {
                return Err(usage("d = 3 takes --axis, not --kappa"));
            }
            rot3_axis(axis.ok_or_else(|| usage("d = 3 needs --axis x, y or z"))?, &prm)?
        }
        _ => return Err(usage(format!("d must be 2 or 3, got {d}"))),
    };
    let mut j = matrix_json(&m);
    j["schema"] = json!("padic-haar/matrix/v1");
    j["param"] = json!(prm.to_string());
    Ok(Output { json: j, table: None, text: Some(format!("{m}\n{}\n", m.encode())), ok: true, incomplete: false })
}

fn cmd_verify(opts: VerifyOptions) -> Res<Output> {
    let report = verify::run(&opts)?;
    let mut table = Table::new(&["group", "name", "claim", "computed", "expected", "status"]);
    let mut text = String::new();
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        };
        table.push(vec![
            c.group.clone(),
            c.name.clone(),
            c.claim.clone(),
            c.computed.clone(),
            c.expected.clone(),
            status.into(),
        ]);
        text += &format!("{:<7} [{}] {}: {}\n", status.to_uppercase(), c.group, c.name, c.computed);
    }
    text += &format!("{} passed, {} failed, {} skipped\n", report.passed, report.failed, report.skipped);
    let ok = report.ok();
    Ok(Output {
        json: serde_json::to_value(&report).expect("report serializes"),
        table: Some(table),
        text: Some(text),
        ok,
        incomplete: report.skipped > 0,
    })
}

fn compare_integral(kappa: Option<KappaLabel>, primes: &[u64], n_max: u32, budget: &Budget) -> Res<Output> {
    let labels = match kappa {
        None => KappaLabel::BINARY.to_vec(),
        Some(k) => vec![KappaLabel::for_dim(2, Some(k))?],
    };
    let mut table = Table::new(&["kappa", "p", "n", "integral_value", "counting_value", "equal"]);
    let mut rows = Vec::new();
    let mut ok = true;
    for &p in primes {
        let pp = prime(p)?;
        for &label in &labels {
            for n in 1..=level(n_max)? {
                let c = compare_measures(label, pp, n, budget)?;
                ok &= c.equal;
                table.push(vec![
                    label.to_string(),
                    p.to_string(),
                    n.to_string(),
                    c.integral_value.clone(),
                    c.counting_value.clone(),
                    c.equal.to_string(),
                ]);
                rows.push(c);
            }
        }
    }
    let j = json!({"schema": "padic-haar/compare-integral/v1", "rows": rows});
    Ok(Output { json: j, table: Some(table), text: None, ok, incomplete: false })
}
