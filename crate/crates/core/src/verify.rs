//! End-to-end verification of every identity for one field.
//!
//! [`verify_all`] runs each check and collects the outcome into a
//! [`RecursionReport`]. Failures are report entries, not errors; only an
//! unsupported configuration is an error.

use std::fmt;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};
use serde::Serialize;

use crate::code::{
    dual_weight_k2, weight_distribution_dp, weight_distribution_prefix,
    weight_distribution_transform, CodeContext, DualWeightTable, WeightDistribution,
};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::glgroup::{
    fiber_census_direct, fiber_census_formula, gl2_kloosterman_direct, gl2_scaled_trace_sum,
    gl_kloosterman_recursive, gl_order,
};
use crate::kloosterman::{
    max_dimension, power_moments, twisted_sum_closed_form, twisted_sum_from_table,
    KloostermanTable, ValueCensus,
};
use crate::moments::{
    even_from_two_dimensional, generate_moments, moment_recursion, pless_both_sides,
    stirling_alternating, MomentKind, StirlingTable,
};

/// Largest degree [`verify_all`] accepts (GL(2, q) enumeration cap).
pub const MAX_VERIFY_DEGREE: u32 = 6;
/// Largest degree at which both weight-distribution engines are compared.
pub const MAX_DP_VERIFY_DEGREE: u32 = 3;
/// Largest degree at which the full weight distribution is built.
pub const MAX_FULL_DISTRIBUTION_DEGREE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported finding that does not gate the run.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Direct and recursive values of both moment sequences at one `h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentRecord {
    pub h: u32,
    pub mk2_direct: String,
    pub mk2_recursive: String,
    pub mk2_generated: String,
    pub mk_even_direct: String,
    pub mk_even_recursive: String,
    pub mk_even_generated: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecursionReport {
    pub q: u32,
    pub r: u32,
    pub modulus: String,
    pub h_max: u32,
    pub checks: Vec<CheckResult>,
    pub records: Vec<MomentRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl RecursionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail) && self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

impl fmt::Display for RecursionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "verify q={} r={} modulus={} h_max={}",
            self.q, self.r, self.modulus, self.h_max
        )?;
        for c in &self.checks {
            writeln!(f, "{} {}: {}", c.status, c.name, c.detail)?;
        }
        writeln!(f, "h,MK_2^h direct,MK_2^h recursive,MK^2h direct,MK^2h recursive,ok")?;
        for r in &self.records {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                r.h,
                r.mk2_direct,
                r.mk2_recursive,
                r.mk_even_direct,
                r.mk_even_recursive,
                if r.pass { "ok" } else { "MISMATCH" }
            )?;
        }
        if let Some(ms) = self.elapsed_ms {
            writeln!(f, "elapsed_ms={ms}")?;
        }
        writeln!(f, "result: {}", if self.all_pass() { "ALL PASS" } else { "FAILURES" })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    pub modulus: Option<u32>,
    pub timing: bool,
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn push(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.0.push(CheckResult {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        });
    }

    fn info(&mut self, name: &str, detail: impl Into<String>) {
        self.0.push(CheckResult {
            name: name.to_string(),
            status: Status::Info,
            detail: detail.into(),
        });
    }

    fn push_result(&mut self, name: &str, outcome: Result<(bool, String)>) {
        match outcome {
            Ok((ok, detail)) => self.push(name, ok, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

fn mismatch_detail(count: usize, total: usize, what: &str) -> String {
    if count == 0 {
        format!("{total} {what} agree")
    } else {
        format!("{count} of {total} {what} disagree")
    }
}

/// Runs the full identity suite for GF(2^r), `2 <= r <= 6`.
pub fn verify_all(r: u32, h_max: u32) -> Result<RecursionReport> {
    verify_with(r, h_max, VerifyOptions::default())
}

pub fn verify_with(r: u32, h_max: u32, opts: VerifyOptions) -> Result<RecursionReport> {
    if !(2..=MAX_VERIFY_DEGREE).contains(&r) {
        return Err(Error::UnsupportedDegree(r));
    }
    if h_max == 0 {
        return Err(Error::MissingData("h_max must be at least 1".into()));
    }
    let start = Instant::now();
    let p = match opts.modulus {
        Some(m) => FieldParams::with_modulus(r, m)?,
        None => FieldParams::new(r)?,
    };
    let q = p.q();
    let qi = i64::from(q);
    let mut checks = Checks(Vec::new());

    field_checks(&p, &mut checks);

    let k1 = KloostermanTable::new(&p, 1)?;
    let k2 = KloostermanTable::new(&p, 2)?;

    let weil = k1.values().iter().all(|&k| k * k <= 4 * qi);
    checks.push("Weil bound |K| <= 2 sqrt(q)", weil, format!("{} values", q - 1));

    let square_bad = k1
        .iter()
        .filter(|&(a, k)| k2.value(a) != k * k - qi)
        .count();
    checks.push(
        "K_2(a) = K(a)^2 - q",
        square_bad == 0,
        mismatch_detail(square_bad, (q - 1) as usize, "values of a"),
    );

    let frob_bad = p
        .nonzero()
        .flat_map(|a| (1..=r).map(move |s| (a, s)))
        .filter(|&(a, s)| {
            let b = p.pow(a, 1u64 << s);
            k1.value(a) != k1.value(b) || k2.value(a) != k2.value(b)
        })
        .count();
    checks.push(
        "K_m(a^(2^s)) = K_m(a), m = 1, 2",
        frob_bad == 0,
        mismatch_detail(frob_bad, ((q - 1) * r) as usize, "pairs (a, s)"),
    );

    let census = ValueCensus::from_table(&k1);
    census_checks(&census, &mut checks);

    twisted_checks(&p, &k1, &k2, &mut checks);
    gl_checks(&p, &k1, &k2, &mut checks);

    let fiber_direct = fiber_census_direct(&p)?;
    let fiber_formula = fiber_census_formula(&p, &k1);
    checks.push(
        "n(beta) by enumeration = closed form",
        fiber_direct == fiber_formula,
        format!("n(0) = {}, N = {}", fiber_direct.get(FieldElement::ZERO), fiber_direct.total()),
    );
    checks.push(
        "n(beta) > 0 for all beta",
        fiber_direct.counts.iter().all(|&n| n > 0),
        format!("min n = {}", fiber_direct.counts.iter().min().copied().unwrap_or(0)),
    );
    checks.push(
        "sum n(beta) beta = 0",
        fiber_direct.weighted_sum().is_zero(),
        format!("sum = {}", fiber_direct.weighted_sum()),
    );
    checks.push(
        "n(beta^2) = n(beta)",
        p.elements().all(|b| fiber_direct.get(b) == fiber_direct.get(p.square(b))),
        format!("{q} elements"),
    );

    let ctx = CodeContext::new(p.clone(), fiber_direct)?;
    let dw = DualWeightTable::from_kloosterman(&ctx, &k1);
    let dw_direct = DualWeightTable::direct(&ctx);
    let dw_bad = p
        .elements()
        .filter(|&a| dw.get(a) != dw_direct.get(a) || dw.get(a) != dual_weight_k2(&ctx, &k2, a))
        .count();
    checks.push(
        "w(c(a)) closed forms = fiber count",
        dw_bad == 0,
        mismatch_detail(dw_bad, q as usize, "dual weights"),
    );
    let injective = p.nonzero().all(|a| dw.get(a) > 0);
    checks.push(
        "a -> c(a) injective (w(c(a)) > 0 for a != 0)",
        injective,
        format!("dim C^perp = {}", ctx.dual_dimension()),
    );

    let wd = distribution_checks(&ctx, &dw, h_max, &mut checks)?;

    let stirling = StirlingTable::new(h_max);
    let stirling_ok = (0..=h_max).all(|h| {
        (0..=h).all(|t| stirling_alternating(h, t).map(|s| s == stirling.get(h, t)).unwrap_or(false))
    });
    checks.push(
        "Stirling recurrence = alternating sum",
        stirling_ok,
        format!("h <= {h_max}"),
    );

    let mut pless_bad = Vec::new();
    for h in 0..=h_max {
        match pless_both_sides(&ctx, &dw, &wd, h) {
            Ok((lhs, rhs)) if lhs == rhs => {}
            _ => pless_bad.push(h),
        }
    }
    checks.push(
        "Pless power moment identity on C^perp",
        pless_bad.is_empty(),
        if pless_bad.is_empty() {
            format!("h = 0..={h_max}")
        } else {
            format!("fails at h = {pless_bad:?}")
        },
    );

    let records = recursion_records(&ctx, &wd, &k1, &k2, h_max, &mut checks);

    Ok(RecursionReport {
        q,
        r,
        modulus: format!("{:#x}", p.modulus()),
        h_max,
        checks: checks.0,
        records,
        elapsed_ms: opts.timing.then(|| start.elapsed().as_millis()),
    })
}

fn field_checks(p: &FieldParams, checks: &mut Checks) {
    let q = u64::from(p.q());
    let inverse_ok = p.nonzero().all(|x| {
        let inv = p.inv_nonzero(x);
        p.mul(x, inv) == FieldElement::ONE && inv == p.pow(x, q - 2)
    });
    let trace_zeros = p.elements().filter(|&x| p.trace(x) == 0).count() as u64;
    let orth = p.elements().all(|a| {
        let s: i64 = p.elements().map(|x| p.canon_char(p.mul(a, x))).sum();
        s == if a.is_zero() { q as i64 } else { 0 }
    });
    checks.push(
        "field sanity",
        inverse_ok && trace_zeros * 2 == q && orth,
        format!("inverses, {trace_zeros} trace-zero elements, character orthogonality"),
    );
}

fn census_checks(census: &ValueCensus, checks: &mut Checks) {
    checks.push(
        "K value range = {t : |t| < 2 sqrt(q), t = -1 mod 4}",
        census.matches_range() && census.total() == u64::from(census.q) - 1,
        format!("{:?}", census.multiplicity),
    );
    let rows = census.class_number_comparison();
    let bad4 = rows.iter().filter(|r| !r.matches_4q()).count();
    checks.push(
        "multiplicity of t = H(t^2 - 4q)",
        bad4 == 0,
        mismatch_detail(bad4, rows.len(), "values of t"),
    );
    let agree_q = rows.iter().filter(|r| r.matches_q()).count();
    let undefined = rows.iter().filter(|r| r.h_t2_minus_q.is_none()).count();
    checks.info(
        "multiplicity of t vs H(t^2 - q)",
        format!(
            "{agree_q} of {} agree, {undefined} with t^2 - q outside the domain of H",
            rows.len()
        ),
    );
}

fn twisted_checks(p: &FieldParams, k1: &KloostermanTable, k2: &KloostermanTable, checks: &mut Checks) {
    let k3 = if max_dimension(p.q()) >= 3 {
        KloostermanTable::new(p, 3).ok()
    } else {
        None
    };
    let tables: Vec<&KloostermanTable> = [Some(k1), Some(k2), k3.as_ref()].into_iter().flatten().collect();
    let outcome = (|| -> Result<(bool, String)> {
        let mut bad = 0usize;
        let mut total = 0usize;
        for table in &tables {
            for beta in p.elements() {
                total += 1;
                let direct = twisted_sum_from_table(p, table, beta);
                if direct != twisted_sum_closed_form(p, table.dimension(), beta)? {
                    bad += 1;
                }
            }
        }
        let mk1: i64 = k1.values().iter().sum();
        let detail = format!(
            "{}, m = 1..={}, MK^1 = {mk1}",
            mismatch_detail(bad, total, "twisted sums"),
            tables.len()
        );
        Ok((bad == 0 && mk1 == 1, detail))
    })();
    checks.push_result("twisted sums sum_a lambda(a beta) K_m(a)", outcome);
}

fn gl_checks(p: &FieldParams, k1: &KloostermanTable, k2: &KloostermanTable, checks: &mut Checks) {
    let q = i64::from(p.q());
    let n2 = BigInt::from(gl_order(q as u64, 2));
    let n3 = BigInt::from(gl_order(q as u64, 3));
    let square_bound = q * q * (q + 3);
    let outcome = (|| -> Result<(bool, String)> {
        let mut closed_bad = 0usize;
        let mut scaled_bad = 0usize;
        let mut bound_bad = 0usize;
        let mut rec_bad = 0usize;
        let mut order_bad = 0usize;
        for (a, k) in k1.iter() {
            let direct = gl2_kloosterman_direct(p, a)?;
            if direct != q * k * k + q * q * (q - 1) || direct != q * k2.value(a) + q * q * q {
                closed_bad += 1;
            }
            let rec2 = gl_kloosterman_recursive(p, 2, a)?;
            if rec2 != BigInt::from(direct) {
                rec_bad += 1;
            }
            let scaled = gl2_scaled_trace_sum(p, a)?;
            let squared = gl2_kloosterman_direct(p, p.square(a))?;
            if scaled != squared {
                scaled_bad += 1;
            }
            if squared.abs() > square_bound {
                bound_bad += 1;
            }
            let rec3 = gl_kloosterman_recursive(p, 3, a)?;
            if rec2.abs() >= n2 || rec3.abs() >= n3 {
                order_bad += 1;
            }
        }
        let total = (q - 1) as usize;
        let ok = closed_bad + scaled_bad + bound_bad + rec_bad + order_bad == 0;
        Ok((
            ok,
            format!(
                "GL(2,q) sum = qK^2 + q^2(q-1) = qK_2 + q^3: {}; recursion t=2: {}; \
                 scaled sum = K_GL(a^2): {}; |K_GL(a^2)| <= q^2(q+3): {}; |K_GL(n)| < |GL(n)|, n=2,3: {}",
                mismatch_detail(closed_bad, total, "a"),
                mismatch_detail(rec_bad, total, "a"),
                mismatch_detail(scaled_bad, total, "a"),
                mismatch_detail(bound_bad, total, "a"),
                mismatch_detail(order_bad, total, "a"),
            ),
        ))
    })();
    checks.push_result("GL(2,q) Kloosterman sums", outcome);
}

fn distribution_checks(
    ctx: &CodeContext,
    dw: &DualWeightTable,
    h_max: u32,
    checks: &mut Checks,
) -> Result<WeightDistribution> {
    let r = ctx.params().r();
    let n = ctx.length();
    let n0 = ctx.fiber().get(FieldElement::ZERO);
    if r > MAX_FULL_DISTRIBUTION_DEGREE {
        let wd = weight_distribution_prefix(ctx, dw, u64::from(h_max))?;
        checks.push(
            "weight distribution prefix (transform)",
            wd.freqs[0] == BigUint::one() && wd.get(1) == Some(&BigUint::from(n0)),
            format!("C_0..C_{h_max}; C_0 = 1, C_1 = n(0) = {n0}"),
        );
        return Ok(wd);
    }
    let wd = weight_distribution_transform(ctx, dw)?;
    if r <= MAX_DP_VERIFY_DEGREE {
        let dp = weight_distribution_dp(ctx)?;
        let bad = dp.freqs.iter().zip(&wd.freqs).filter(|(x, y)| x != y).count();
        checks.push(
            "weight distribution: DP = character transform",
            bad == 0 && dp.freqs.len() == wd.freqs.len(),
            mismatch_detail(bad, wd.freqs.len(), "frequencies"),
        );
    } else {
        checks.info(
            "weight distribution: DP = character transform",
            format!("DP skipped for q = {}, transform only", ctx.q()),
        );
    }
    let expected_total = BigUint::one() << (n - u64::from(r));
    checks.push(
        "sum C_j = 2^(N-r)",
        wd.total() == expected_total,
        format!("N = {n}"),
    );
    checks.push(
        "sum j C_j = N 2^(N-r-1)",
        wd.first_moment() == BigUint::from(n) << (n - u64::from(r) - 1),
        "average weight N/2".to_string(),
    );
    checks.push("C_j = C_(N-j)", wd.is_symmetric(), format!("j = 0..={n}"));
    let last = &wd.freqs[n as usize];
    checks.push(
        "C_0 = C_N = 1, C_1 = n(0)",
        wd.freqs[0] == BigUint::one() && *last == BigUint::one() && wd.freqs[1] == BigUint::from(n0),
        format!("C_1 = {}", wd.freqs[1]),
    );
    Ok(wd)
}

fn recursion_records(
    ctx: &CodeContext,
    wd: &WeightDistribution,
    k1: &KloostermanTable,
    k2: &KloostermanTable,
    h_max: u32,
    checks: &mut Checks,
) -> Vec<MomentRecord> {
    let q = ctx.q();
    let mk2_direct = power_moments(k2, h_max);
    let mk_all = power_moments(k1, 2 * h_max);
    let mk_even_direct: Vec<BigInt> = mk_all.iter().step_by(2).cloned().collect();

    let gen2 = generate_moments(MomentKind::TwoDimensional, ctx, wd, h_max);
    let gen_even = generate_moments(MomentKind::EvenClassical, ctx, wd, h_max);
    let (gen2, gen_even) = match (gen2, gen_even) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            let err = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
            checks.push("moment recursions", false, format!("error: {err}"));
            return Vec::new();
        }
    };

    let bridge_ok = (0..=h_max).all(|h| {
        even_from_two_dimensional(q, &mk2_direct, h) == mk_even_direct[h as usize]
    });
    checks.push(
        "MK^2h = sum_l C(h,l) q^(h-l) MK_2^l",
        bridge_ok,
        format!("h = 0..={h_max}"),
    );

    let mut records = Vec::new();
    for h in 1..=h_max {
        let hu = h as usize;
        let rec2 = moment_recursion(MomentKind::TwoDimensional, ctx, wd, h, &mk2_direct[..hu]);
        let rec_even = moment_recursion(MomentKind::EvenClassical, ctx, wd, h, &mk_even_direct[..hu]);
        let show = |r: &Result<BigInt>| match r {
            Ok(v) => v.to_string(),
            Err(e) => format!("error: {e}"),
        };
        let pass = rec2.as_ref().ok() == Some(&mk2_direct[hu])
            && rec_even.as_ref().ok() == Some(&mk_even_direct[hu])
            && gen2[hu] == mk2_direct[hu]
            && gen_even[hu] == mk_even_direct[hu];
        records.push(MomentRecord {
            h,
            mk2_direct: mk2_direct[hu].to_string(),
            mk2_recursive: show(&rec2),
            mk2_generated: gen2[hu].to_string(),
            mk_even_direct: mk_even_direct[hu].to_string(),
            mk_even_recursive: show(&rec_even),
            mk_even_generated: gen_even[hu].to_string(),
            pass,
        });
    }
    let bad: Vec<u32> = records.iter().filter(|r| !r.pass).map(|r| r.h).collect();
    checks.push(
        "moment recursions reproduce MK_2^h and MK^2h",
        bad.is_empty(),
        if bad.is_empty() {
            format!("h = 1..={h_max}, validation and generation modes")
        } else {
            format!("mismatch at h = {bad:?}")
        },
    );
    let digits = mk_even_direct.last().map(|v| v.to_string().len()).unwrap_or(0);
    checks.info("largest moment MK^(2 h_max)", format!("{digits} decimal digits"));
    records
}
