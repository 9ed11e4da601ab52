//! `klmoments`: command-line front end for Kloosterman sums over GF(2^r),
//! GL(2, q) sums, the code C(GL(2, q)) and its moment recursions.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde_json::{json, Map, Value};

use klmoments::code::{
    weight_distribution_dp, weight_distribution_transform, MAX_DP_Q,
};
use klmoments::glgroup::{
    fiber_census_direct, fiber_census_formula, gl2_kloosterman_direct, gl_kloosterman_recursive,
    MAX_ENUMERATION_Q, MAX_RECURSION_DEGREE,
};
use klmoments::kloosterman::{
    kloosterman_m_sum, kloosterman_sum, max_dimension, power_moments, value_census,
};
use klmoments::moments::{generate_moments, MomentKind};
use klmoments::verify::{verify_with, VerifyOptions};
use klmoments::{
    CodeContext, DualWeightTable, FieldElement, FieldParams, KloostermanTable, WeightDistribution,
};

use output::{hex, provenance, write_payload, Cell, Table};

#[derive(Parser, Debug)]
#[command(name = "klmoments", version, about = "Exact Kloosterman sums, C(GL(2,q)) weight distributions and moment recursions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Field degree r (q = 2^r).
    #[arg(long)]
    r: u32,
    /// Irreducible modulus as a hex bitmask (bit i = coefficient of x^i).
    #[arg(long, value_parser = parse_hex)]
    modulus: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (default: machine parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GlMethod {
    Direct,
    Recursive,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FiberMethod {
    Direct,
    Formula,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum WeightMethod {
    Dp,
    Transform,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MomentMode {
    Direct,
    Recursive,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-element inverse, trace and canonical character.
    FieldTable {
        #[command(flatten)]
        common: Common,
    },
    /// K_m(λ; a) for one a or for every a in F_q^*.
    Kloosterman {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, value_parser = parse_hex)]
        a: Option<u32>,
    },
    /// Value census of K(λ; a).
    Census {
        #[command(flatten)]
        common: Common,
        /// Compare multiplicities with Kronecker class numbers.
        #[arg(long)]
        check_class_number: bool,
    },
    /// Kloosterman sum over GL(t, q).
    Glsum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: u32,
        #[arg(long, value_parser = parse_hex)]
        a: u32,
        #[arg(long, value_enum, default_value_t = GlMethod::Recursive)]
        method: GlMethod,
    },
    /// Fiber sizes n(β) of Tr g + Tr g^{-1} over GL(2, q).
    Nbeta {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = FiberMethod::Formula)]
        method: FiberMethod,
    },
    /// Dual codeword weights w(c(a)).
    DualWeights {
        #[command(flatten)]
        common: Common,
    },
    /// Weight distribution C_0..C_N of C(GL(2, q)).
    WeightDist {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = WeightMethod::Transform)]
        method: WeightMethod,
        /// Memoize distributions as JSON files in this directory.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Power moments MK_2^h and MK^{2h}.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        h_max: u32,
        #[arg(long, value_enum, default_value_t = MomentMode::Both)]
        mode: MomentMode,
    },
    /// Run every identity check and print a pass/fail report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        h_max: u32,
        /// Include wall-clock time in the report.
        #[arg(long, conflicts_with = "no_timing")]
        timing: bool,
        /// Omit timing (default).
        #[arg(long)]
        no_timing: bool,
    },
}

fn parse_hex(s: &str) -> Result<u32, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(digits, 16).map_err(|e| format!("invalid hex value `{s}`: {e}"))
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Usage(String),
    Verification(String),
    Io(std::io::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<klmoments::Error> for Failure {
    fn from(e: klmoments::Error) -> Self {
        match e {
            klmoments::Error::InexactDivision(_) => Failure::Verification(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

fn field(common: &Common, max_r: u32) -> Result<FieldParams, Failure> {
    if common.r > max_r {
        return Err(Failure::Usage(format!(
            "r = {} exceeds the limit r <= {max_r} for this command",
            common.r
        )));
    }
    Ok(match common.modulus {
        Some(m) => FieldParams::with_modulus(common.r, m)?,
        None => FieldParams::new(common.r)?,
    })
}

fn element(p: &FieldParams, v: u32) -> Result<FieldElement, Failure> {
    let x = FieldElement(v);
    if !p.contains(x) {
        return Err(Failure::Usage(format!("{} is not an element of GF({})", hex(v), p.q())));
    }
    Ok(x)
}

fn emit(common: &Common, p: &FieldParams, table: &Table, extra: Map<String, Value>) -> Outcome {
    let payload = match common.format {
        Format::Json => table.to_json(provenance(p), extra),
        Format::Csv | Format::Text => table.to_csv(),
    };
    write_payload(common.output.as_deref(), &payload)?;
    Ok(())
}

fn log2_bound(q: u32) -> u32 {
    q.trailing_zeros()
}

fn field_table(common: &Common) -> Outcome {
    let p = field(common, 12)?;
    let rows = p
        .elements()
        .map(|x| {
            let inv = p.inv(x).map(|i| hex(i.value())).unwrap_or_default();
            vec![
                Cell::from(hex(x.value())),
                Cell::from(inv),
                Cell::from(i64::from(p.trace(x))),
                Cell::from(p.canon_char(x)),
            ]
        })
        .collect();
    let table = Table {
        name: "elements",
        columns: vec!["value", "inverse", "trace", "lambda"],
        rows,
    };
    emit(common, &p, &table, Map::new())
}

fn kloosterman(common: &Common, m: u32, a: Option<u32>) -> Outcome {
    let p = field(common, 12)?;
    let cap = max_dimension(p.q());
    if m == 0 || m > cap {
        return Err(Failure::Usage(format!("m must satisfy 1 <= m <= {cap} for q = {}", p.q())));
    }
    if m >= 2 && log2_bound(p.q()) > 8 {
        return Err(Failure::Usage("m >= 2 tables are limited to r <= 8".into()));
    }
    let rows = match a {
        Some(a) => {
            let a = element(&p, a)?;
            let k = if m == 1 { kloosterman_sum(&p, a)? } else { kloosterman_m_sum(&p, m, a)? };
            vec![vec![Cell::from(hex(a.value())), Cell::from(k)]]
        }
        None => KloostermanTable::new(&p, m)?
            .iter()
            .map(|(a, k)| vec![Cell::from(hex(a.value())), Cell::from(k)])
            .collect(),
    };
    let table = Table {
        name: "values",
        columns: vec!["a", "K"],
        rows,
    };
    let mut extra = Map::new();
    extra.insert("m".into(), json!(m));
    emit(common, &p, &table, extra)
}

fn census(common: &Common, check: bool) -> Outcome {
    let p = field(common, 12)?;
    let census = value_census(&p)?;
    let mut columns = vec!["t", "multiplicity"];
    let rows: Vec<Vec<Cell>> = if check {
        columns.extend(["H(t^2-4q)", "matches_4q", "H(t^2-q)", "matches_q"]);
        census
            .class_number_comparison()
            .into_iter()
            .map(|row| {
                let opt = |h: Option<u64>| h.map(Cell::from).unwrap_or(Cell::Text("undefined".into()));
                vec![
                    Cell::from(row.t),
                    Cell::from(row.multiplicity),
                    opt(row.h_t2_minus_4q),
                    Cell::from(row.matches_4q()),
                    opt(row.h_t2_minus_q),
                    Cell::from(row.matches_q()),
                ]
            })
            .collect()
    } else {
        census
            .multiplicity
            .iter()
            .map(|(&t, &n)| vec![Cell::from(t), Cell::from(n)])
            .collect()
    };
    let table = Table {
        name: "census",
        columns,
        rows,
    };
    let mut extra = Map::new();
    extra.insert("range_matches".into(), json!(census.matches_range()));
    emit(common, &p, &table, extra)?;
    let range_ok = census.matches_range();
    let class_ok = !check || census.class_number_comparison().iter().all(|r| r.matches_4q());
    if range_ok && class_ok {
        Ok(())
    } else {
        Err(Failure::Verification("census does not match the predicted range or class numbers".into()))
    }
}

fn glsum(common: &Common, t: u32, a: u32, method: GlMethod) -> Outcome {
    let p = field(common, 12)?;
    let a = element(&p, a)?;
    let direct = |p: &FieldParams| -> Result<BigInt, Failure> {
        if t != 2 {
            return Err(Failure::Usage("direct summation is implemented for t = 2".into()));
        }
        if p.q() > MAX_ENUMERATION_Q {
            return Err(Failure::Usage(format!("direct GL(2, q) enumeration needs q <= {MAX_ENUMERATION_Q}")));
        }
        Ok(BigInt::from(gl2_kloosterman_direct(p, a)?))
    };
    if t > MAX_RECURSION_DEGREE {
        return Err(Failure::Usage(format!("t must be at most {MAX_RECURSION_DEGREE}")));
    }
    let (d, r) = match method {
        GlMethod::Direct => (Some(direct(&p)?), None),
        GlMethod::Recursive => (None, Some(gl_kloosterman_recursive(&p, t, a)?)),
        GlMethod::Both => (Some(direct(&p)?), Some(gl_kloosterman_recursive(&p, t, a)?)),
    };
    let show = |v: &Option<BigInt>| Cell::from(v.as_ref().map(|v| v.to_string()).unwrap_or_default());
    let table = Table {
        name: "sums",
        columns: vec!["t", "a", "direct", "recursive"],
        rows: vec![vec![Cell::from(i64::from(t)), Cell::from(hex(a.value())), show(&d), show(&r)]],
    };
    emit(common, &p, &table, Map::new())?;
    match (d, r) {
        (Some(d), Some(r)) if d != r => Err(Failure::Verification(format!("direct {d} != recursive {r}"))),
        _ => Ok(()),
    }
}

fn nbeta(common: &Common, method: FiberMethod) -> Outcome {
    let needs_direct = matches!(method, FiberMethod::Direct | FiberMethod::Both);
    let p = field(common, if needs_direct { 6 } else { 12 })?;
    if p.q() < 4 {
        return Err(Failure::Usage("q >= 4 required".into()));
    }
    let formula = || -> Result<_, Failure> {
        Ok(fiber_census_formula(&p, &KloostermanTable::new(&p, 1)?))
    };
    let (census, agree) = match method {
        FiberMethod::Direct => (fiber_census_direct(&p)?, true),
        FiberMethod::Formula => (formula()?, true),
        FiberMethod::Both => {
            let d = fiber_census_direct(&p)?;
            let f = formula()?;
            let agree = d == f;
            (d, agree)
        }
    };
    let table = Table {
        name: "fibers",
        columns: vec!["beta", "n"],
        rows: census
            .iter()
            .map(|(b, n)| vec![Cell::from(hex(b.value())), Cell::from(n)])
            .collect(),
    };
    emit(common, &p, &table, Map::new())?;
    if agree {
        Ok(())
    } else {
        Err(Failure::Verification("direct and formula fiber censuses differ".into()))
    }
}

fn dual_weights(common: &Common) -> Outcome {
    let p = field(common, 12)?;
    let ctx = CodeContext::from_formula(p.clone())?;
    let kt = KloostermanTable::new(&p, 1)?;
    let dw = DualWeightTable::from_kloosterman(&ctx, &kt);
    let rows = p
        .elements()
        .map(|a| {
            let k = if a.is_zero() { Cell::Text(String::new()) } else { Cell::from(kt.value(a)) };
            vec![Cell::from(hex(a.value())), k, Cell::from(dw.get(a))]
        })
        .collect();
    let table = Table {
        name: "weights",
        columns: vec!["a", "K", "weight"],
        rows,
    };
    let mut extra = Map::new();
    extra.insert("length".into(), json!(ctx.length()));
    emit(common, &p, &table, extra)
}

fn method_name(m: WeightMethod) -> &'static str {
    match m {
        WeightMethod::Dp => "dp",
        WeightMethod::Transform => "transform",
        WeightMethod::Both => "both",
    }
}

fn cache_path(dir: &Path, p: &FieldParams, method: WeightMethod) -> PathBuf {
    dir.join(format!("weights-r{}-m{:x}-{}.json", p.r(), p.modulus(), method_name(method)))
}

fn read_cache(path: &Path, length: u64) -> Option<WeightDistribution> {
    let text = std::fs::read_to_string(path).ok()?;
    let value: Value = serde_json::from_str(&text).ok()?;
    let freqs = value
        .get("freqs")?
        .as_array()?
        .iter()
        .map(|v| v.as_str()?.parse::<BigUint>().ok())
        .collect::<Option<Vec<_>>>()?;
    let wd = WeightDistribution { length, freqs };
    wd.is_complete().then_some(wd)
}

fn write_cache(path: &Path, p: &FieldParams, method: WeightMethod, wd: &WeightDistribution) -> std::io::Result<()> {
    let mut obj = provenance(p);
    obj.insert("method".into(), json!(method_name(method)));
    obj.insert(
        "freqs".into(),
        Value::Array(wd.freqs.iter().map(|c| json!(c.to_string())).collect()),
    );
    std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
    std::fs::write(path, serde_json::to_string(&Value::Object(obj)).expect("valid json"))
}

fn weight_dist(common: &Common, method: WeightMethod, cache_dir: Option<&Path>) -> Outcome {
    let p = field(common, 4)?;
    let ctx = CodeContext::from_formula(p.clone())?;
    if matches!(method, WeightMethod::Dp | WeightMethod::Both) && p.q() > MAX_DP_Q {
        return Err(Failure::Usage(format!("the DP engine needs q <= {MAX_DP_Q}")));
    }
    let cached = cache_dir.and_then(|d| read_cache(&cache_path(d, &p, method), ctx.length()));
    let wd = match cached {
        Some(wd) => wd,
        None => {
            let transform = || -> Result<WeightDistribution, Failure> {
                let kt = KloostermanTable::new(&p, 1)?;
                let dw = DualWeightTable::from_kloosterman(&ctx, &kt);
                Ok(weight_distribution_transform(&ctx, &dw)?)
            };
            let wd = match method {
                WeightMethod::Dp => weight_distribution_dp(&ctx)?,
                WeightMethod::Transform => transform()?,
                WeightMethod::Both => {
                    let dp = weight_distribution_dp(&ctx)?;
                    if dp != transform()? {
                        return Err(Failure::Verification("DP and transform distributions differ".into()));
                    }
                    dp
                }
            };
            if let Some(dir) = cache_dir {
                write_cache(&cache_path(dir, &p, method), &p, method, &wd)?;
            }
            wd
        }
    };
    let table = Table {
        name: "distribution",
        columns: vec!["j", "C_j"],
        rows: wd
            .freqs
            .iter()
            .enumerate()
            .map(|(j, c)| vec![Cell::from(j as u64), Cell::from(c.to_string())])
            .collect(),
    };
    let mut extra = Map::new();
    extra.insert("length".into(), json!(ctx.length()));
    extra.insert("method".into(), json!(method_name(method)));
    emit(common, &p, &table, extra)
}

fn moments(common: &Common, h_max: u32, mode: MomentMode) -> Outcome {
    let p = field(common, 8)?;
    if h_max == 0 {
        return Err(Failure::Usage("h-max must be at least 1".into()));
    }
    let want_direct = matches!(mode, MomentMode::Direct | MomentMode::Both);
    let want_rec = matches!(mode, MomentMode::Recursive | MomentMode::Both);

    let direct = if want_direct {
        let k1 = KloostermanTable::new(&p, 1)?;
        let k2 = KloostermanTable::new(&p, 2)?;
        let mk2 = power_moments(&k2, h_max);
        let mk: Vec<BigInt> = power_moments(&k1, 2 * h_max).into_iter().step_by(2).collect();
        Some((mk2, mk))
    } else {
        None
    };
    let recursive = if want_rec {
        let ctx = CodeContext::from_formula(p.clone())?;
        let kt = KloostermanTable::new(&p, 1)?;
        let dw = DualWeightTable::from_kloosterman(&ctx, &kt);
        let wd = klmoments::code::weight_distribution_prefix(&ctx, &dw, u64::from(h_max))?;
        let mk2 = generate_moments(MomentKind::TwoDimensional, &ctx, &wd, h_max)?;
        let mk = generate_moments(MomentKind::EvenClassical, &ctx, &wd, h_max)?;
        Some((mk2, mk))
    } else {
        None
    };

    let mut columns = vec!["h"];
    if want_direct {
        columns.extend(["MK_2^h direct", "MK^2h direct"]);
    }
    if want_rec {
        columns.extend(["MK_2^h recursive", "MK^2h recursive"]);
    }
    if want_direct && want_rec {
        columns.push("agree");
    }
    let mut all_agree = true;
    let rows = (0..=h_max as usize)
        .map(|h| {
            let mut row = vec![Cell::from(h as u64)];
            if let Some((mk2, mk)) = &direct {
                row.push(Cell::from(mk2[h].to_string()));
                row.push(Cell::from(mk[h].to_string()));
            }
            if let Some((mk2, mk)) = &recursive {
                row.push(Cell::from(mk2[h].to_string()));
                row.push(Cell::from(mk[h].to_string()));
            }
            if let (Some(d), Some(r)) = (&direct, &recursive) {
                let agree = d.0[h] == r.0[h] && d.1[h] == r.1[h];
                all_agree &= agree;
                row.push(Cell::from(agree));
            }
            row
        })
        .collect();
    let table = Table {
        name: "moments",
        columns,
        rows,
    };
    emit(common, &p, &table, Map::new())?;
    if all_agree {
        Ok(())
    } else {
        Err(Failure::Verification("recursive moments differ from direct moments".into()))
    }
}

fn verify(common: &Common, h_max: u32, timing: bool) -> Outcome {
    if !(2..=6).contains(&common.r) {
        return Err(Failure::Usage(format!("verify needs 2 <= r <= 6, got r = {}", common.r)));
    }
    let opts = VerifyOptions {
        modulus: common.modulus,
        timing,
    };
    let report = verify_with(common.r, h_max, opts)?;
    let payload = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("valid json");
            s.push('\n');
            s
        }
        Format::Text | Format::Csv => report.to_string(),
    };
    write_payload(common.output.as_deref(), &payload)?;
    if report.all_pass() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("failed checks: {names:?}")))
    }
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::FieldTable { common }
        | Command::Kloosterman { common, .. }
        | Command::Census { common, .. }
        | Command::Glsum { common, .. }
        | Command::Nbeta { common, .. }
        | Command::DualWeights { common }
        | Command::WeightDist { common, .. }
        | Command::Moments { common, .. }
        | Command::Verify { common, .. } => common,
    }
}

fn run(cli: Cli) -> Outcome {
    let common = common_of(&cli.command);
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::FieldTable { common } => field_table(common),
        Command::Kloosterman { common, m, a } => kloosterman(common, *m, *a),
        Command::Census { common, check_class_number } => census(common, *check_class_number),
        Command::Glsum { common, t, a, method } => glsum(common, *t, *a, *method),
        Command::Nbeta { common, method } => nbeta(common, *method),
        Command::DualWeights { common } => dual_weights(common),
        Command::WeightDist { common, method, cache_dir } => {
            weight_dist(common, *method, cache_dir.as_deref())
        }
        Command::Moments { common, h_max, mode } => moments(common, *h_max, *mode),
        Command::Verify { common, h_max, timing, no_timing } => {
            verify(common, *h_max, *timing && !*no_timing)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("klmoments: {e}");
            match e {
                Failure::Usage(_) => ExitCode::from(2),
                Failure::Verification(_) | Failure::Io(_) => ExitCode::from(1),
            }
        }
    }
}
