//! The binary code `C(GL(2, q))` and its weight distribution.
//!
//! `C = {u ∈ F_2^N : Σ u_i v_i = 0}` where `v_i = Tr g_i + Tr g_i^{-1}` runs
//! over GL(2, q) in enumeration order. Its dual is the trace code
//! `{c(a) : a ∈ F_q}` with `c(a)_i = tr(a·v_i)`.
//!
//! Coordinates are never materialized. Every quantity depends on them only
//! through the fibers `n(β)` of `v`, so all computations here are grouped
//! by `β`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::glgroup::{fiber_census_direct, fiber_census_formula, gl2_order, FiberCensus};
use crate::kloosterman::KloostermanTable;

/// Largest `q` accepted by [`weight_distribution_dp`].
pub const MAX_DP_Q: u32 = 16;

/// Field, code length and fiber census of `C(GL(2, q))`.
#[derive(Debug, Clone)]
pub struct CodeContext {
    params: FieldParams,
    length: u64,
    fiber: FiberCensus,
}

impl CodeContext {
    /// Rejects `q < 4`: for `q = 2` the trace map onto the dual has a
    /// nontrivial kernel.
    pub fn new(params: FieldParams, fiber: FiberCensus) -> Result<Self> {
        if params.q() < 4 {
            return Err(Error::UnsupportedDegree(params.r()));
        }
        let length = gl2_order(params.q());
        if fiber.q != params.q() || fiber.total() != length {
            return Err(Error::MissingData(format!(
                "fiber census does not partition GL(2, {})",
                params.q()
            )));
        }
        Ok(Self {
            params,
            length,
            fiber,
        })
    }

    /// Context built from the closed-form fiber sizes.
    pub fn from_formula(params: FieldParams) -> Result<Self> {
        let ktable = KloostermanTable::new(&params, 1)?;
        let fiber = fiber_census_formula(&params, &ktable);
        Self::new(params, fiber)
    }

    /// Context built by enumerating GL(2, q) (`q <= 64`).
    pub fn from_enumeration(params: FieldParams) -> Result<Self> {
        let fiber = fiber_census_direct(&params)?;
        Self::new(params, fiber)
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn q(&self) -> u32 {
        self.params.q()
    }

    /// Code length `N = |GL(2, q)|`.
    pub fn length(&self) -> u64 {
        self.length
    }

    /// `dim C^⊥ = r`.
    pub fn dual_dimension(&self) -> u32 {
        self.params.r()
    }

    /// `dim C = N - r`.
    pub fn dimension(&self) -> u64 {
        self.length - u64::from(self.params.r())
    }

    pub fn fiber(&self) -> &FiberCensus {
        &self.fiber
    }
}

/// `w(c(a)) = q(q³ - 2q² + 1 - K(λ; a)²) / 2`, and 0 for `a = 0`.
pub fn dual_weight(ctx: &CodeContext, ktable: &KloostermanTable, a: FieldElement) -> u64 {
    if a.is_zero() {
        return 0;
    }
    assert_eq!(ktable.dimension(), 1);
    let q = i64::from(ctx.q());
    let k = ktable.value(a);
    let twice = q * (q * q * q - 2 * q * q + 1 - k * k);
    let via_k2 = dual_weight_from_k2(q, k * k - q);
    debug_assert_eq!(twice, 2 * via_k2);
    (twice / 2) as u64
}

/// `q(q³ - 2q² - q + 1 - K_2(λ; a)) / 2` for a given 2-dimensional sum value.
fn dual_weight_from_k2(q: i64, k2: i64) -> i64 {
    q * (q * q * q - 2 * q * q - q + 1 - k2) / 2
}

/// Dual weight from a directly summed `K_2(λ; a)` table.
pub fn dual_weight_k2(ctx: &CodeContext, k2table: &KloostermanTable, a: FieldElement) -> u64 {
    if a.is_zero() {
        return 0;
    }
    assert_eq!(k2table.dimension(), 2);
    dual_weight_from_k2(i64::from(ctx.q()), k2table.value(a)) as u64
}

/// Hamming weight of `c(a)` by counting coordinates with `tr(a·v_i) = 1`,
/// grouped by fiber.
pub fn dual_weight_direct(ctx: &CodeContext, a: FieldElement) -> u64 {
    let p = ctx.params();
    ctx.fiber()
        .iter()
        .filter(|&(beta, _)| p.trace(p.mul(a, beta)) == 1)
        .map(|(_, n)| n)
        .sum()
}

/// Weights of the `q` dual codewords, indexed by `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualWeightTable {
    pub weights: Vec<u64>,
}

impl DualWeightTable {
    pub fn from_kloosterman(ctx: &CodeContext, ktable: &KloostermanTable) -> Self {
        let weights = ctx
            .params()
            .elements()
            .map(|a| dual_weight(ctx, ktable, a))
            .collect();
        Self { weights }
    }

    pub fn direct(ctx: &CodeContext) -> Self {
        let weights = ctx
            .params()
            .elements()
            .map(|a| dual_weight_direct(ctx, a))
            .collect();
        Self { weights }
    }

    pub fn get(&self, a: FieldElement) -> u64 {
        self.weights[a.index()]
    }

    /// `weight ↦ number of dual codewords with that weight`.
    pub fn frequencies(&self) -> BTreeMap<u64, u64> {
        let mut freq = BTreeMap::new();
        for &w in &self.weights {
            *freq.entry(w).or_insert(0) += 1;
        }
        freq
    }
}

/// Frequencies `C_0, C_1, ...` of `C(GL(2, q))`. May hold only a prefix
/// `C_0..C_J` when the full table is too large to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    pub length: u64,
    pub freqs: Vec<BigUint>,
}

impl WeightDistribution {
    pub fn is_complete(&self) -> bool {
        self.freqs.len() as u64 == self.length + 1
    }

    pub fn get(&self, j: u64) -> Option<&BigUint> {
        self.freqs.get(usize::try_from(j).ok()?)
    }

    pub fn total(&self) -> BigUint {
        self.freqs.iter().sum()
    }

    /// `C_j = C_{N-j}` for every `j`; false for a prefix.
    pub fn is_symmetric(&self) -> bool {
        self.is_complete() && self.freqs.iter().eq(self.freqs.iter().rev())
    }

    /// `Σ_j j·C_j`.
    pub fn first_moment(&self) -> BigUint {
        self.freqs
            .iter()
            .enumerate()
            .map(|(j, c)| c * BigUint::from(j))
            .sum()
    }
}

/// Weight distribution by dynamic programming over the group algebra of
/// `(F_q, +)`.
///
/// The state is `(weight j, syndrome s) ↦ count`. Coordinates are absorbed
/// one at a time, grouped by fiber in increasing `β`: each of the `n(β)`
/// coordinates with value `β` multiplies the generating function by
/// `1 + x·z^β`. The answer is the `s = 0` slice, which counts exactly the
/// selections with `Σ ν_β = j` and `Σ ν_β β = 0`.
pub fn weight_distribution_dp(ctx: &CodeContext) -> Result<WeightDistribution> {
    let q = ctx.q();
    if q > MAX_DP_Q {
        return Err(Error::IterationCap {
            what: "dynamic-programming weight distribution",
            limit: format!("q <= {MAX_DP_Q}"),
        });
    }
    let len = ctx.length() as usize;
    let mut table: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); len + 1]; q as usize];
    table[0][0] = BigUint::from(1u32);
    let mut reach = 0usize;

    for (beta, count) in ctx.fiber().iter() {
        let shift = beta.index();
        for _ in 0..count {
            reach += 1;
            if shift == 0 {
                table.par_iter_mut().for_each(|row| absorb_same(row, reach));
            } else {
                let mut pairs = pair_rows(&mut table, shift);
                pairs
                    .par_iter_mut()
                    .for_each(|(x, y)| absorb_pair(x, y, reach));
            }
        }
    }
    let freqs = std::mem::take(&mut table[0]);
    Ok(WeightDistribution {
        length: ctx.length(),
        freqs,
    })
}

/// `row ← row·(1 + x)` over weights `0..=reach`.
fn absorb_same(row: &mut [BigUint], reach: usize) {
    for j in (1..=reach).rev() {
        let (lo, hi) = row.split_at_mut(j);
        if !lo[j - 1].is_zero() {
            hi[0] += &lo[j - 1];
        }
    }
}

/// Rows `s` and `s + β`: `(x, y) ← (x + t·y, y + t·x)` with `t` the weight
/// shift. Descending `j` reads only not-yet-updated entries.
fn absorb_pair(x: &mut [BigUint], y: &mut [BigUint], reach: usize) {
    for j in (1..=reach).rev() {
        if !y[j - 1].is_zero() {
            x[j] += &y[j - 1];
        }
        if !x[j - 1].is_zero() {
            y[j] += &x[j - 1];
        }
    }
}

/// Disjoint mutable pairs `(row[s], row[s ^ shift])` for `s < s ^ shift`.
fn pair_rows(table: &mut [Vec<BigUint>], shift: usize) -> Vec<(&mut [BigUint], &mut [BigUint])> {
    let mut slots: Vec<Option<&mut Vec<BigUint>>> = table.iter_mut().map(Some).collect();
    let mut pairs = Vec::with_capacity(slots.len() / 2);
    for s in 0..slots.len() {
        let t = s ^ shift;
        if s < t {
            let x = slots[s].take().expect("row used once");
            let y = slots[t].take().expect("row used once");
            pairs.push((x.as_mut_slice(), y.as_mut_slice()));
        }
    }
    pairs
}

/// Coefficients `[x^j] (1 + x)^P (1 - x)^M` for `j = 0..=j_max`, streamed into
/// `sink(j, coefficient)`.
///
/// `f = (1+x)^P (1-x)^M` satisfies `(1 - x²) f' = ((P - M) - (P + M) x) f`,
/// so `(j+1) c_{j+1} = (P - M) c_j - (P + M - j + 1) c_{j-1}`.
fn krawtchouk_coefficients<F>(plus: u64, minus: u64, j_max: u64, mut sink: F) -> Result<()>
where
    F: FnMut(usize, &BigInt),
{
    let n = plus + minus;
    let diff = BigInt::from(plus) - BigInt::from(minus);
    let mut prev = BigInt::zero();
    let mut cur = BigInt::from(1);
    sink(0, &cur);
    for j in 0..j_max.min(n) {
        let mut next = &diff * &cur;
        if j >= 1 {
            next -= &prev * BigInt::from(n - j + 1);
        }
        let (quot, rem) = next.div_rem(&BigInt::from(j + 1));
        if !rem.is_zero() {
            return Err(Error::InexactDivision("Krawtchouk recurrence"));
        }
        prev = std::mem::replace(&mut cur, quot);
        sink(j as usize + 1, &cur);
    }
    Ok(())
}

/// Weight distribution by inverting code membership through additive
/// characters:
/// `C_j = (1/q) Σ_{a ∈ F_q} [x^j] (1 + x)^(N - w(c(a))) (1 - x)^w(c(a))`.
pub fn weight_distribution_transform(
    ctx: &CodeContext,
    dw: &DualWeightTable,
) -> Result<WeightDistribution> {
    weight_distribution_prefix(ctx, dw, ctx.length())
}

/// `C_0..C_{j_max}` by the character transform.
pub fn weight_distribution_prefix(
    ctx: &CodeContext,
    dw: &DualWeightTable,
    j_max: u64,
) -> Result<WeightDistribution> {
    if dw.weights.len() != ctx.q() as usize {
        return Err(Error::MissingData(
            "dual weight table must cover every a in F_q".into(),
        ));
    }
    let n = ctx.length();
    let top = j_max.min(n);
    // One coefficient row per distinct weight, summed in weight order so the
    // result does not depend on the schedule.
    let groups: Vec<(u64, u64)> = dw.frequencies().into_iter().collect();
    let rows = groups
        .par_iter()
        .map(|&(w, mult)| {
            let mult = BigInt::from(mult);
            let mut row = vec![BigInt::zero(); top as usize + 1];
            krawtchouk_coefficients(n - w, w, top, |j, c| row[j] = c * &mult)?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = vec![BigInt::zero(); top as usize + 1];
    for row in rows {
        for (a, c) in acc.iter_mut().zip(row) {
            *a += c;
        }
    }
    let q = BigInt::from(ctx.q());
    let freqs = acc
        .into_iter()
        .map(|sum| {
            let (quot, rem) = sum.div_rem(&q);
            match (rem.is_zero(), quot.sign()) {
                (true, Sign::Minus) => Err(Error::InexactDivision("negative frequency")),
                (true, _) => Ok(quot.magnitude().clone()),
                (false, _) => Err(Error::InexactDivision("character transform")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightDistribution { length: n, freqs })
}

/// Smallest `j > 0` with `C_j > 0`, if the table reaches it.
pub fn minimum_distance(wd: &WeightDistribution) -> Option<u64> {
    wd.freqs
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, c)| !c.is_zero())
        .and_then(|(j, _)| j.to_u64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn ctx(r: u32) -> CodeContext {
        CodeContext::from_formula(FieldParams::new(r).unwrap()).unwrap()
    }

    #[test]
    fn rejects_q2() {
        let p = FieldParams::prime_field();
        let fiber = fiber_census_direct(&p).unwrap();
        assert!(CodeContext::new(p, fiber).is_err());
    }

    #[test]
    fn dual_weights_q4() {
        let c = ctx(2);
        let kt = KloostermanTable::new(c.params(), 1).unwrap();
        let dw = DualWeightTable::from_kloosterman(&c, &kt);
        assert_eq!(dw.weights, vec![0, 48, 64, 64]);
        assert_eq!(DualWeightTable::direct(&c), dw);
        let k2 = KloostermanTable::new(c.params(), 2).unwrap();
        for a in c.params().elements() {
            assert_eq!(dual_weight_k2(&c, &k2, a), dw.get(a));
        }
    }

    #[test]
    fn krawtchouk_matches_expansion() {
        for (p, m) in [(0u64, 0u64), (5, 0), (0, 4), (7, 3), (3, 9)] {
            let mut got = Vec::new();
            krawtchouk_coefficients(p, m, p + m, |_, c| got.push(c.clone())).unwrap();
            // direct product of binomial rows
            let mut poly = vec![BigInt::one()];
            for sign in std::iter::repeat_n(1, p as usize).chain(std::iter::repeat_n(-1, m as usize)) {
                let mut next = vec![BigInt::zero(); poly.len() + 1];
                for (i, c) in poly.iter().enumerate() {
                    next[i] += c;
                    next[i + 1] += c * BigInt::from(sign);
                }
                poly = next;
            }
            assert_eq!(got, poly, "P = {p}, M = {m}");
        }
    }

    #[test]
    fn q4_distribution_spot_values() {
        let c = ctx(2);
        let dp = weight_distribution_dp(&c).unwrap();
        assert_eq!(dp.freqs.len(), 181);
        assert_eq!(dp.freqs[0], BigUint::one());
        assert_eq!(dp.freqs[1], BigUint::from(92u32));
        assert_eq!(dp.freqs[180], BigUint::one());
        assert!(dp.is_symmetric());
        assert_eq!(dp.total(), BigUint::one() << 178u32);
        assert_eq!(minimum_distance(&dp), Some(1));

        let kt = KloostermanTable::new(c.params(), 1).unwrap();
        let dw = DualWeightTable::from_kloosterman(&c, &kt);
        let tr = weight_distribution_transform(&c, &dw).unwrap();
        assert_eq!(tr, dp);
        let prefix = weight_distribution_prefix(&c, &dw, 5).unwrap();
        assert!(!prefix.is_complete());
        assert_eq!(prefix.freqs[..], dp.freqs[..6]);
    }

    #[test]
    fn dp_guard() {
        assert!(weight_distribution_dp(&ctx(5)).is_err());
    }
}
