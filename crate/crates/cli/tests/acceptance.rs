//! Acceptance suite: one PASS/FAIL line per criterion, exact equality,
//! wall-clock budgets enforced.
//!
//! Run with `cargo test -p klmoments-cli --test acceptance -- --nocapture`
//! to see the lines.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use klmoments::code::{
    dual_weight, dual_weight_direct, weight_distribution_dp, weight_distribution_transform,
};
use klmoments::glgroup::{fiber_census_direct, fiber_census_formula, gl2_kloosterman_direct};
use klmoments::kloosterman::{
    kloosterman_range, power_moments, twisted_character_sum, twisted_sum_closed_form,
    twisted_sum_from_table, value_census,
};
use klmoments::moments::{generate_moments, mk2_recursion, mk_even_recursion, pless_both_sides, MomentKind};
use klmoments::{CodeContext, DualWeightTable, FieldElement, FieldParams, KloostermanTable, WeightDistribution};

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome { ok, detail: detail.into() }
    }
}

struct Ledger {
    failed: Vec<u32>,
}

impl Ledger {
    fn record(&mut self, id: u32, title: &str, budget: Duration, elapsed: Duration, outcome: Outcome) {
        let in_time = elapsed <= budget;
        let pass = outcome.ok && in_time;
        println!(
            "criterion {id:>2} {} {title}: {} [{:.2}s / budget {}s]{}",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { " over budget" },
        );
        if !pass {
            self.failed.push(id);
        }
    }

    fn run(&mut self, id: u32, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        self.record(id, title, budget, start.elapsed(), outcome);
    }
}

fn field(r: u32) -> FieldParams {
    FieldParams::new(r).expect("supported degree")
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn k2_identity() -> Outcome {
    let mut checked = 0;
    for r in 2..=6 {
        let p = field(r);
        let q = i64::from(p.q());
        let k1 = KloostermanTable::new(&p, 1).unwrap();
        let k2 = KloostermanTable::new(&p, 2).unwrap();
        for a in p.nonzero() {
            if k2.value(a) != k1.value(a) * k1.value(a) - q {
                return Outcome::new(false, format!("q={q} a={:#x}", a.0));
            }
            checked += 1;
        }
    }
    Outcome::new(true, format!("{checked} pairs (q, a), q = 4..64"))
}

fn gl2_sums() -> Outcome {
    let mut checked = 0;
    for r in 2..=4 {
        let p = field(r);
        let q = i64::from(p.q());
        let k1 = KloostermanTable::new(&p, 1).unwrap();
        let k2 = KloostermanTable::new(&p, 2).unwrap();
        for a in p.nonzero() {
            let direct = gl2_kloosterman_direct(&p, a).unwrap();
            let k = k1.value(a);
            let first = q * k * k + q * q * (q - 1);
            let second = q * k2.value(a) + q * q * q;
            if direct != first || direct != second {
                return Outcome::new(false, format!("q={q} a={:#x}: {direct} vs {first}, {second}", a.0));
            }
            checked += 1;
        }
    }
    Outcome::new(true, format!("{checked} sums over GL(2,q), q = 4, 8, 16"))
}

fn fiber_census() -> Outcome {
    let mut spot = (0, 0);
    for r in 2..=4 {
        let p = field(r);
        let direct = fiber_census_direct(&p).unwrap();
        let formula = fiber_census_formula(&p, &KloostermanTable::new(&p, 1).unwrap());
        if direct != formula {
            return Outcome::new(false, format!("q={} direct != formula", p.q()));
        }
        if r == 2 {
            spot = (direct.get(FieldElement(0)), direct.get(FieldElement(1)));
        }
    }
    Outcome::new(spot == (92, 40), format!("q = 4, 8, 16 agree; q=4 n(0)={} n(1)={}", spot.0, spot.1))
}

fn dual_weights() -> Outcome {
    let mut q4 = Vec::new();
    for r in 2..=4 {
        let p = field(r);
        let ctx = CodeContext::from_formula(p.clone()).unwrap();
        let kt = KloostermanTable::new(&p, 1).unwrap();
        for a in p.elements() {
            let w = dual_weight(&ctx, &kt, a);
            if w != dual_weight_direct(&ctx, a) {
                return Outcome::new(false, format!("q={} a={:#x}", p.q(), a.0));
            }
            if r == 2 {
                q4.push(w);
            }
        }
    }
    Outcome::new(q4 == [0, 48, 64, 64], format!("q = 4, 8, 16 agree; q=4 weights {q4:?}"))
}

fn distribution_checks(ctx: &CodeContext, wd: &WeightDistribution) -> Result<(), String> {
    let n = ctx.length();
    let one = num_bigint::BigUint::from(1u32);
    if wd.total() != one.clone() << (n - u64::from(ctx.params().r())) {
        return Err("sum C_j != 2^(N-r)".into());
    }
    if !wd.is_symmetric() {
        return Err("C_j != C_(N-j)".into());
    }
    if wd.get(0) != Some(&one) || wd.get(n) != Some(&one) {
        return Err("C_0 or C_N != 1".into());
    }
    let n0 = ctx.fiber().get(FieldElement(0));
    if wd.get(1) != Some(&n0.into()) {
        return Err("C_1 != n(0)".into());
    }
    Ok(())
}

struct Prepared {
    ctx: CodeContext,
    dw: DualWeightTable,
    wd: WeightDistribution,
    k1: KloostermanTable,
    k2: KloostermanTable,
}

fn prepare_transform(r: u32) -> Prepared {
    let p = field(r);
    let ctx = CodeContext::from_formula(p.clone()).unwrap();
    let k1 = KloostermanTable::new(&p, 1).unwrap();
    let k2 = KloostermanTable::new(&p, 2).unwrap();
    let dw = DualWeightTable::from_kloosterman(&ctx, &k1);
    let wd = weight_distribution_transform(&ctx, &dw).unwrap();
    Prepared { ctx, dw, wd, k1, k2 }
}

fn dp_vs_transform(r: u32, prepared: &Prepared) -> Outcome {
    let dp = weight_distribution_dp(&prepared.ctx).unwrap();
    if dp != prepared.wd {
        return Outcome::new(false, format!("q={} DP != transform", prepared.ctx.q()));
    }
    match distribution_checks(&prepared.ctx, &dp) {
        Ok(()) => Outcome::new(
            true,
            format!("q={} N={} {} entries agree; total, symmetry, ends, C_1 hold", 1u32 << r, dp.length, dp.freqs.len()),
        ),
        Err(e) => Outcome::new(false, format!("q={}: {e}", prepared.ctx.q())),
    }
}

fn pless(prepared: &[&Prepared]) -> Outcome {
    let mut worked = Vec::new();
    for pr in prepared {
        for h in 0..=10 {
            let (lhs, rhs) = match pless_both_sides(&pr.ctx, &pr.dw, &pr.wd, h) {
                Ok(v) => v,
                Err(e) => return Outcome::new(false, format!("q={} h={h}: {e}", pr.ctx.q())),
            };
            if lhs != rhs {
                return Outcome::new(false, format!("q={} h={h}: {lhs} != {rhs}", pr.ctx.q()));
            }
            if pr.ctx.q() == 4 && (h == 1 || h == 2) {
                worked.push(lhs);
            }
        }
    }
    let expected = [BigInt::from(176), BigInt::from(10496)];
    Outcome::new(
        worked == expected,
        format!("h = 0..10, q = 4, 8; q=4 h=1 -> {}, h=2 -> {}", worked[0], worked[1]),
    )
}

fn recursions(prepared: &[&Prepared]) -> Outcome {
    let mut seeds = Vec::new();
    for pr in prepared {
        let q = pr.ctx.q();
        let mk2 = power_moments(&pr.k2, 10);
        let mk: Vec<BigInt> = power_moments(&pr.k1, 20).into_iter().step_by(2).collect();
        for h in 1..=10u32 {
            let hu = h as usize;
            let v2 = mk2_recursion(&pr.ctx, &pr.wd, h, &mk2[..hu]);
            let ve = mk_even_recursion(&pr.ctx, &pr.wd, h, &mk[..hu]);
            if v2.as_ref().ok() != Some(&mk2[hu]) || ve.as_ref().ok() != Some(&mk[hu]) {
                return Outcome::new(false, format!("q={q} h={h}: validation mode mismatch"));
            }
        }
        let g2 = generate_moments(MomentKind::TwoDimensional, &pr.ctx, &pr.wd, 10).unwrap();
        let ge = generate_moments(MomentKind::EvenClassical, &pr.ctx, &pr.wd, 10).unwrap();
        if g2 != mk2 || ge != mk {
            return Outcome::new(false, format!("q={q}: generation mode mismatch"));
        }
        if q == 4 {
            seeds = vec![mk2[1].clone(), mk[1].clone(), mk[2].clone()];
        }
    }
    let expected = [BigInt::from(-1), BigInt::from(11), BigInt::from(83)];
    Outcome::new(
        seeds == expected,
        format!(
            "h = 1..10, q = 4, 8, 16 (q=16 transform only); q=4 MK_2^1={} MK^2={} MK^4={}",
            seeds[0], seeds[1], seeds[2]
        ),
    )
}

fn census() -> Outcome {
    let mut rows = 0;
    let mut q_reading = 0;
    for r in 2..=8 {
        let p = field(r);
        let c = value_census(&p).unwrap();
        if c.support() != kloosterman_range(p.q()) {
            return Outcome::new(false, format!("q={} support {:?}", p.q(), c.support()));
        }
        for row in c.class_number_comparison() {
            if !row.matches_4q() {
                return Outcome::new(false, format!("q={} t={}: {} vs H={:?}", p.q(), row.t, row.multiplicity, row.h_t2_minus_4q));
            }
            rows += 1;
            q_reading += usize::from(row.matches_q());
        }
    }
    Outcome::new(
        true,
        format!("q = 4..256 support exact, {rows} multiplicities = H(t^2-4q); H(t^2-q) agrees on {q_reading} of {rows} (not asserted)"),
    )
}

fn twisted() -> Outcome {
    let mut checked = 0;
    for r in 2..=4 {
        let p = field(r);
        for m in 1..=3 {
            let table = KloostermanTable::new(&p, m).unwrap();
            for beta in p.elements() {
                let from_table = twisted_sum_from_table(&p, &table, beta);
                let closed = twisted_sum_closed_form(&p, m, beta).unwrap();
                if from_table != closed {
                    return Outcome::new(false, format!("q={} m={m} beta={:#x}", p.q(), beta.0));
                }
                checked += 1;
            }
        }
        let spot = twisted_character_sum(&p, 1, FieldElement(1)).unwrap();
        if spot != twisted_sum_closed_form(&p, 1, FieldElement(1)).unwrap() {
            return Outcome::new(false, format!("q={} direct twisted sum", p.q()));
        }
    }
    Outcome::new(true, format!("{checked} sums, m = 1..3, every beta, q = 4, 8, 16"))
}

fn run_verify(r: u32, threads: Option<u32>) -> (bool, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_klmoments"));
    cmd.args(["verify", "--r", &r.to_string(), "--h-max", "10"]);
    if let Some(t) = threads {
        cmd.args(["--threads", &t.to_string()]);
    }
    let out = cmd.output().expect("spawn klmoments");
    (out.status.code() == Some(0), out.stdout)
}

fn determinism() -> Outcome {
    for r in [2, 3] {
        let runs = [run_verify(r, None), run_verify(r, None), run_verify(r, Some(1)), run_verify(r, Some(2))];
        if let Some(i) = runs.iter().position(|(ok, _)| !ok) {
            return Outcome::new(false, format!("r={r} run {i} exited nonzero"));
        }
        if runs.iter().any(|(_, out)| out != &runs[0].1) {
            return Outcome::new(false, format!("r={r} reports differ"));
        }
    }
    Outcome::new(true, "r = 2, 3 exit 0; 4 runs each (default, repeat, 1 and 2 threads) byte-identical")
}

#[test]
fn acceptance_criteria() {
    let mut ledger = Ledger { failed: Vec::new() };

    ledger.run(1, "K_2 = K^2 - q", secs(5), k2_identity);
    ledger.run(2, "GL(2,q) sums by enumeration", secs(30), gl2_sums);
    ledger.run(3, "fiber census direct = formula", secs(30), fiber_census);
    ledger.run(4, "dual weights", secs(5), dual_weights);

    let q4 = prepare_transform(2);
    ledger.run(5, "weight distribution q=4", secs(10), || dp_vs_transform(2, &q4));
    let q8_start = Instant::now();
    let q8 = prepare_transform(3);
    let q8_outcome = dp_vs_transform(3, &q8);
    ledger.record(5, "weight distribution q=8", secs(600), q8_start.elapsed(), q8_outcome);

    ledger.run(6, "Pless identity", secs(60), || pless(&[&q4, &q8]));

    let q16 = prepare_transform(4);
    ledger.run(7, "moment recursions", secs(60), || recursions(&[&q4, &q8, &q16]));

    ledger.run(8, "value census and class numbers", secs(30), census);
    ledger.run(9, "twisted sums", secs(60), twisted);
    ledger.run(10, "verify determinism", secs(120), determinism);

    assert!(ledger.failed.is_empty(), "failed criteria: {:?}", ledger.failed);
}
