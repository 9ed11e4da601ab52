//! Stirling numbers, the Pless power moment identity for `C(GL(2, q))^⊥`,
//! and the recursions that generate power moments of 2-dimensional
//! Kloosterman sums from the weight distribution of `C(GL(2, q))`.
//!
//! Every quantity is an exact integer. The `q^(1-h)` factor of the
//! recursions is handled by computing the scaled sum and dividing with a
//! remainder check, so a wrong input fails loudly instead of rounding.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use crate::code::{CodeContext, DualWeightTable, WeightDistribution};
use crate::error::{Error, Result};

/// `C(n, k)` with `C(n, k) = 0` for `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if k < 0 || n < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from((n - i) as u64);
        acc /= BigUint::from((i + 1) as u64);
    }
    acc
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Triangular table of Stirling numbers of the second kind, `S(h, t)` for
/// `0 <= t <= h <= h_max`, built by `S(h, t) = t·S(h-1, t) + S(h-1, t-1)`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    pub fn new(h_max: u32) -> Self {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for h in 1..=h_max as usize {
            let prev = &rows[h - 1];
            let row = (0..=h)
                .map(|t| {
                    let keep = prev.get(t).map(|s| s * BigUint::from(t)).unwrap_or_default();
                    let new_block = if t >= 1 { prev[t - 1].clone() } else { BigUint::zero() };
                    keep + new_block
                })
                .collect();
            rows.push(row);
        }
        Self { rows }
    }

    pub fn h_max(&self) -> u32 {
        (self.rows.len() - 1) as u32
    }

    /// `S(h, t)`, zero for `t > h`. Panics if `h` exceeds the table.
    pub fn get(&self, h: u32, t: u32) -> BigUint {
        self.rows[h as usize]
            .get(t as usize)
            .cloned()
            .unwrap_or_default()
    }
}

/// `S(h, t)` by the recurrence.
pub fn stirling(h: u32, t: u32) -> BigUint {
    StirlingTable::new(h).get(h, t)
}

/// `S(h, t) = (1/t!) Σ_{j=0..t} (-1)^(t-j) C(t, j) j^h`, with an exact
/// division check.
pub fn stirling_alternating(h: u32, t: u32) -> Result<BigUint> {
    let mut sum = BigInt::zero();
    for j in 0..=t {
        let term = BigInt::from(binomial(t.into(), j.into())) * Pow::pow(BigInt::from(j), h);
        if (t - j).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let (quot, rem) = sum.div_rem(&BigInt::from(factorial(t)));
    if !rem.is_zero() || quot.is_negative() {
        return Err(Error::InexactDivision("Stirling alternating sum"));
    }
    Ok(quot.magnitude().clone())
}

fn frequency(wd: &WeightDistribution, j: u64) -> Result<&BigUint> {
    wd.get(j).ok_or_else(|| {
        Error::MissingData(format!(
            "weight distribution holds C_0..C_{} but C_{j} is needed",
            wd.freqs.len().saturating_sub(1)
        ))
    })
}

/// `Σ_{j=0..min(N,h)} (-1)^j C_j Σ_{t=j..h} t!·S(h,t)·2^(shift-t)·C(N-j, N-t)`
/// for `shift >= h`, so every power of two is integral.
fn dual_side_sum(
    length: u64,
    wd: &WeightDistribution,
    stirling: &StirlingTable,
    h: u32,
    shift: u32,
) -> Result<BigInt> {
    debug_assert!(shift >= h);
    let n = length as i64;
    let mut total = BigInt::zero();
    for j in 0..=u64::from(h).min(length) {
        let c_j = frequency(wd, j)?;
        if c_j.is_zero() {
            continue;
        }
        let mut inner = BigUint::zero();
        for t in j as u32..=h {
            let s = stirling.get(h, t);
            if s.is_zero() {
                continue;
            }
            inner += factorial(t) * s * (BigUint::one() << (shift - t))
                * binomial(n - j as i64, n - i64::from(t));
        }
        let term = BigInt::from(c_j * inner);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Both sides of the Pless power moment identity applied to the binary
/// `[N, r]` code `B = C^⊥` (so `B^⊥ = C`):
///
/// `lhs = Σ_{a ∈ F_q} w(c(a))^h`,
/// `rhs = Σ_j (-1)^j C_j Σ_t t!·S(h,t)·2^(r-t)·C(N-j, N-t)`.
///
/// `rhs` is evaluated scaled by `2^h` and divided back exactly.
pub fn pless_both_sides(
    ctx: &CodeContext,
    dw: &DualWeightTable,
    wd: &WeightDistribution,
    h: u32,
) -> Result<(BigInt, BigInt)> {
    let lhs = dw
        .weights
        .iter()
        .map(|&w| Pow::pow(BigInt::from(w), h))
        .sum::<BigInt>();
    let stirling = StirlingTable::new(h);
    let scaled = dual_side_sum(ctx.length(), wd, &stirling, h, ctx.dual_dimension() + h)?;
    let (rhs, rem) = scaled.div_rem(&(BigInt::one() << h));
    if !rem.is_zero() {
        return Err(Error::InexactDivision("Pless right-hand side"));
    }
    Ok((lhs, rhs))
}

/// Which moment sequence a recursion generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// `MK_2^h = Σ_a K_2(λ; a)^h`, coefficient base `q³ - 2q² - q + 1`.
    TwoDimensional,
    /// `MK^{2h} = Σ_a K(λ; a)^{2h}`, coefficient base `q³ - 2q² + 1`.
    EvenClassical,
}

impl MomentKind {
    pub fn base(self, q: u32) -> BigInt {
        let q = BigInt::from(q);
        let common = &q * &q * &q - BigInt::from(2) * &q * &q + 1;
        match self {
            MomentKind::TwoDimensional => common - q,
            MomentKind::EvenClassical => common,
        }
    }
}

/// One step of the moment recursion:
///
/// `M_h = Σ_{l<h} (-1)^(h+l+1) C(h,l) A^(h-l) M_l
///        + q^(1-h) Σ_j (-1)^(h+j) C_j Σ_t t!·S(h,t)·2^(h-t)·C(N-j, N-t)`
///
/// with `history = [M_0, ..., M_{h-1}]` and `M_0 = q - 1`.
pub fn moment_recursion(
    kind: MomentKind,
    ctx: &CodeContext,
    wd: &WeightDistribution,
    h: u32,
    history: &[BigInt],
) -> Result<BigInt> {
    moment_recursion_with(kind, ctx, wd, &StirlingTable::new(h), h, history)
}

fn moment_recursion_with(
    kind: MomentKind,
    ctx: &CodeContext,
    wd: &WeightDistribution,
    stirling: &StirlingTable,
    h: u32,
    history: &[BigInt],
) -> Result<BigInt> {
    if h == 0 {
        return Err(Error::MissingData("the recursion starts at h = 1".into()));
    }
    if history.len() < h as usize {
        return Err(Error::MissingData(format!(
            "recursion for h = {h} needs {h} lower moments, got {}",
            history.len()
        )));
    }
    let base = kind.base(ctx.q());
    let mut lower = BigInt::zero();
    for (l, m_l) in history.iter().take(h as usize).enumerate() {
        let l = l as u32;
        let term = BigInt::from(binomial(h.into(), l.into())) * Pow::pow(&base, h - l) * m_l;
        if (h + l + 1).is_multiple_of(2) {
            lower += term;
        } else {
            lower -= term;
        }
    }

    let mut dual = dual_side_sum(ctx.length(), wd, stirling, h, h)?;
    if h % 2 == 1 {
        dual = -dual;
    }
    let scale = Pow::pow(BigInt::from(ctx.q()), h - 1);
    let (quot, rem) = dual.div_rem(&scale);
    if !rem.is_zero() {
        return Err(Error::InexactDivision("q^(h-1) scaling of the recursion"));
    }
    Ok(lower + quot)
}

/// `MK_2^h` from the weight distribution and `MK_2^0..MK_2^{h-1}`.
pub fn mk2_recursion(
    ctx: &CodeContext,
    wd: &WeightDistribution,
    h: u32,
    history: &[BigInt],
) -> Result<BigInt> {
    moment_recursion(MomentKind::TwoDimensional, ctx, wd, h, history)
}

/// `MK^{2h}` from the weight distribution and `MK^0, MK^2, ..., MK^{2h-2}`.
pub fn mk_even_recursion(
    ctx: &CodeContext,
    wd: &WeightDistribution,
    h: u32,
    history: &[BigInt],
) -> Result<BigInt> {
    moment_recursion(MomentKind::EvenClassical, ctx, wd, h, history)
}

/// Moments `M_0..M_{h_max}` produced by the recursion alone, seeded with
/// `M_0 = q - 1`.
pub fn generate_moments(
    kind: MomentKind,
    ctx: &CodeContext,
    wd: &WeightDistribution,
    h_max: u32,
) -> Result<Vec<BigInt>> {
    let stirling = StirlingTable::new(h_max);
    let mut moments = vec![BigInt::from(ctx.q() - 1)];
    for h in 1..=h_max {
        let next = moment_recursion_with(kind, ctx, wd, &stirling, h, &moments)?;
        moments.push(next);
    }
    Ok(moments)
}

/// `Σ_{l<=h} C(h, l) q^(h-l) M2_l`: the even classical moment implied by the
/// two-dimensional moments through `K² = K_2 + q`.
pub fn even_from_two_dimensional(q: u32, mk2: &[BigInt], h: u32) -> BigInt {
    let q = BigInt::from(q);
    (0..=h)
        .map(|l| BigInt::from(binomial(h.into(), l.into())) * Pow::pow(&q, h - l) * &mk2[l as usize])
        .sum()
}
