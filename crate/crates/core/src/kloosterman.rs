//! Kloosterman sums over GF(2^r) for the canonical additive character.
//!
//! `K_m(λ; a) = Σ λ(α_1 + ... + α_m + a·(α_1···α_m)^{-1})` with every `α_i`
//! ranging over the nonzero elements. `m = 1` is the classical sum `K(λ; a)`.
//! Any nontrivial character is `ψ(x) = λ(bx)`, so only `λ` is implemented.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use crate::classnum::{kronecker_class_number, reduced_forms};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};

/// Largest `m` the exhaustive `K_m` summation accepts for the given `q`.
pub fn max_dimension(q: u32) -> u32 {
    if q <= 64 {
        3
    } else {
        2
    }
}

/// `K(λ; a)`, an exact integer with `|K| <= 2√q`.
pub fn kloosterman_sum(p: &FieldParams, a: FieldElement) -> Result<i64> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    Ok(p.nonzero()
        .map(|alpha| p.canon_char(alpha + p.mul(a, p.inv_nonzero(alpha))))
        .sum())
}

/// `K_m(λ; a)` by exhaustive iteration over `(F_q^*)^m`.
pub fn kloosterman_m_sum(p: &FieldParams, m: u32, a: FieldElement) -> Result<i64> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let cap = max_dimension(p.q());
    if m == 0 || m > cap {
        return Err(Error::IterationCap {
            what: "Kloosterman dimension m",
            limit: format!("1 <= m <= {cap} for q = {}", p.q()),
        });
    }
    Ok(m_sum_rec(p, m, a, FieldElement::ZERO, FieldElement::ONE))
}

/// Sums over the remaining `depth` coordinates, given the running sum and
/// product of the coordinates already fixed.
fn m_sum_rec(
    p: &FieldParams,
    depth: u32,
    a: FieldElement,
    sum: FieldElement,
    prod: FieldElement,
) -> i64 {
    if depth == 1 {
        // last coordinate: α_m, twist a·(prod·α_m)^{-1}
        let twist = p.mul(a, p.inv_nonzero(prod));
        return p
            .nonzero()
            .map(|alpha| p.canon_char(sum + alpha + p.mul(twist, p.inv_nonzero(alpha))))
            .sum();
    }
    p.nonzero()
        .map(|alpha| m_sum_rec(p, depth - 1, a, sum + alpha, p.mul(prod, alpha)))
        .sum()
}

/// Exact values `K_m(λ; a)` for every `a ∈ F_q^*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KloostermanTable {
    q: u32,
    m: u32,
    values: Vec<i64>,
}

impl KloostermanTable {
    pub fn new(p: &FieldParams, m: u32) -> Result<Self> {
        if m > max_dimension(p.q()) || m == 0 {
            // surface the cap error before spawning work
            kloosterman_m_sum(p, m, FieldElement::ONE)?;
        }
        let values = (1..p.q())
            .into_par_iter()
            .map(|a| {
                let a = FieldElement(a);
                if m == 1 {
                    kloosterman_sum(p, a)
                } else {
                    kloosterman_m_sum(p, m, a)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q: p.q(), m, values })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dimension(&self) -> u32 {
        self.m
    }

    /// `K_m(λ; a)`; panics on `a = 0`.
    pub fn value(&self, a: FieldElement) -> i64 {
        assert!(!a.is_zero(), "Kloosterman sums are indexed by F_q^*");
        self.values[a.index() - 1]
    }

    /// `(a, K_m(λ; a))` in increasing order of `a`.
    pub fn iter(&self) -> impl Iterator<Item = (FieldElement, i64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (FieldElement(i as u32 + 1), v))
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentValue {
    pub h: u32,
    pub value: BigInt,
}

/// `Σ_a K_m(λ; a)^h`, accumulated exactly.
pub fn power_moment(table: &KloostermanTable, h: u32) -> MomentValue {
    let value = table
        .values
        .iter()
        .map(|&k| num_traits::pow(BigInt::from(k), h as usize))
        .fold(BigInt::zero(), |acc, x| acc + x);
    MomentValue { h, value }
}

/// Every moment `h = 0..=h_max` in one pass.
pub fn power_moments(table: &KloostermanTable, h_max: u32) -> Vec<BigInt> {
    let mut moments = vec![BigInt::zero(); h_max as usize + 1];
    for &k in &table.values {
        let k = BigInt::from(k);
        let mut power = BigInt::one();
        for slot in moments.iter_mut() {
            *slot += &power;
            power *= &k;
        }
    }
    moments
}

/// Multiplicity of every value taken by `K(λ; a)` over `a ∈ F_q^*`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueCensus {
    pub q: u32,
    pub multiplicity: BTreeMap<i64, u64>,
}

/// Whether `t` satisfies `|t| < 2√q` and `t ≡ -1 (mod 4)`.
pub fn in_kloosterman_range(q: u32, t: i64) -> bool {
    t * t < 4 * i64::from(q) && t.rem_euclid(4) == 3
}

/// The predicted range `{t : |t| < 2√q, t ≡ -1 mod 4}` in increasing order.
pub fn kloosterman_range(q: u32) -> Vec<i64> {
    let bound = 2 * i64::from(q).isqrt() + 2;
    (-bound..=bound)
        .filter(|&t| in_kloosterman_range(q, t))
        .collect()
}

impl ValueCensus {
    pub fn from_table(table: &KloostermanTable) -> Self {
        assert_eq!(table.dimension(), 1, "the census is over K(λ; a)");
        let mut multiplicity = BTreeMap::new();
        for &k in table.values() {
            *multiplicity.entry(k).or_insert(0) += 1;
        }
        Self {
            q: table.q(),
            multiplicity,
        }
    }

    pub fn total(&self) -> u64 {
        self.multiplicity.values().sum()
    }

    pub fn support(&self) -> Vec<i64> {
        self.multiplicity.keys().copied().collect()
    }

    /// Whether the support is exactly the predicted range.
    pub fn matches_range(&self) -> bool {
        self.support() == kloosterman_range(self.q)
    }

    /// Compare each multiplicity with `H(t² - c·q)` for `c = 4` and `c = 1`.
    pub fn class_number_comparison(&self) -> Vec<ClassNumberRow> {
        let q = i64::from(self.q);
        self.multiplicity
            .iter()
            .map(|(&t, &count)| {
                let h = |d: i64| kronecker_class_number(d).ok();
                ClassNumberRow {
                    t,
                    multiplicity: count,
                    h_t2_minus_4q: h(t * t - 4 * q),
                    h_t2_minus_q: h(t * t - q),
                }
            })
            .collect()
    }
}

/// One line of the census-versus-class-number comparison. `None` marks a
/// discriminant where `H` is undefined (nonnegative or not `0, 1 mod 4`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassNumberRow {
    pub t: i64,
    pub multiplicity: u64,
    pub h_t2_minus_4q: Option<u64>,
    pub h_t2_minus_q: Option<u64>,
}

impl ClassNumberRow {
    pub fn matches_4q(&self) -> bool {
        self.h_t2_minus_4q == Some(self.multiplicity)
    }

    pub fn matches_q(&self) -> bool {
        self.h_t2_minus_q == Some(self.multiplicity)
    }
}

pub fn value_census(p: &FieldParams) -> Result<ValueCensus> {
    let table = KloostermanTable::new(p, 1)?;
    Ok(ValueCensus::from_table(&table))
}

/// `Σ_{a ∈ F_q^*} λ(aβ)·K_m(λ; a)` by direct summation (`-aβ = aβ` here).
pub fn twisted_character_sum(p: &FieldParams, m: u32, beta: FieldElement) -> Result<i64> {
    let table = KloostermanTable::new(p, m)?;
    Ok(twisted_sum_from_table(p, &table, beta))
}

pub fn twisted_sum_from_table(p: &FieldParams, table: &KloostermanTable, beta: FieldElement) -> i64 {
    table
        .iter()
        .map(|(a, k)| p.canon_char(p.mul(a, beta)) * k)
        .sum()
}

/// Closed form of the twisted sum: `q·K_{m-1}(λ; β^{-1}) + (-1)^{m+1}` for
/// `β ≠ 0` and `(-1)^{m+1}` for `β = 0`, with `K_0(λ; x) = λ(x)`.
pub fn twisted_sum_closed_form(p: &FieldParams, m: u32, beta: FieldElement) -> Result<i64> {
    let sign = if m % 2 == 1 { 1 } else { -1 };
    if beta.is_zero() {
        return Ok(sign);
    }
    let binv = p.inv_nonzero(beta);
    let lower = match m {
        0 => return Err(Error::IterationCap {
            what: "Kloosterman dimension m",
            limit: "m >= 1".into(),
        }),
        1 => p.canon_char(binv),
        2 => kloosterman_sum(p, binv)?,
        _ => kloosterman_m_sum(p, m - 1, binv)?,
    };
    Ok(i64::from(p.q()) * lower + sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: u32) -> FieldElement {
        FieldElement(v)
    }

    #[test]
    fn gf4_worked_values() {
        let p = FieldParams::new(2).unwrap();
        assert_eq!(kloosterman_sum(&p, f(1)).unwrap(), 3);
        assert_eq!(kloosterman_sum(&p, f(2)).unwrap(), -1);
        assert_eq!(kloosterman_sum(&p, f(3)).unwrap(), -1);
        assert_eq!(kloosterman_m_sum(&p, 2, f(1)).unwrap(), 5);
        let t1 = KloostermanTable::new(&p, 1).unwrap();
        let t2 = KloostermanTable::new(&p, 2).unwrap();
        assert_eq!(power_moment(&t1, 0).value, BigInt::from(3));
        assert_eq!(power_moment(&t1, 2).value, BigInt::from(11));
        assert_eq!(power_moment(&t2, 1).value, BigInt::from(-1));
        assert_eq!(t2.values(), &[5, -3, -3]);
    }

    #[test]
    fn zero_argument_rejected() {
        let p = FieldParams::new(3).unwrap();
        assert_eq!(kloosterman_sum(&p, f(0)), Err(Error::ZeroArgument));
        assert_eq!(kloosterman_m_sum(&p, 2, f(0)), Err(Error::ZeroArgument));
    }

    #[test]
    fn iteration_cap_enforced() {
        let small = FieldParams::new(6).unwrap();
        let large = FieldParams::new(7).unwrap();
        assert!(matches!(kloosterman_m_sum(&small, 4, f(1)), Err(Error::IterationCap { .. })));
        assert!(matches!(kloosterman_m_sum(&large, 3, f(1)), Err(Error::IterationCap { .. })));
        assert!(matches!(KloostermanTable::new(&large, 3), Err(Error::IterationCap { .. })));
        assert!(kloosterman_m_sum(&large, 2, f(1)).is_ok());
    }

    #[test]
    fn dimension_one_collapses() {
        let p = FieldParams::new(4).unwrap();
        for a in p.nonzero() {
            assert_eq!(kloosterman_m_sum(&p, 1, a).unwrap(), kloosterman_sum(&p, a).unwrap());
        }
    }

    #[test]
    fn censuses_small_fields() {
        let c4 = value_census(&FieldParams::new(2).unwrap()).unwrap();
        assert_eq!(c4.multiplicity, BTreeMap::from([(-1, 2), (3, 1)]));
        let c8 = value_census(&FieldParams::new(3).unwrap()).unwrap();
        assert_eq!(c8.multiplicity, BTreeMap::from([(-5, 1), (-1, 3), (3, 3)]));
        assert_eq!(c8.total(), 7);
    }

    #[test]
    fn range_helper() {
        assert_eq!(kloosterman_range(4), vec![-1, 3]);
        assert_eq!(kloosterman_range(8), vec![-5, -1, 3]);
        assert_eq!(kloosterman_range(16), vec![-5, -1, 3, 7]);
    }

    #[test]
    fn twisted_sum_worked_values() {
        let p = FieldParams::new(2).unwrap();
        assert_eq!(twisted_character_sum(&p, 1, f(1)).unwrap(), 5);
        assert_eq!(twisted_character_sum(&p, 1, f(0)).unwrap(), 1);
        assert_eq!(twisted_character_sum(&p, 2, f(1)).unwrap(), 11);
        assert_eq!(twisted_sum_closed_form(&p, 1, f(1)).unwrap(), 5);
        assert_eq!(twisted_sum_closed_form(&p, 2, f(1)).unwrap(), 11);
    }

    #[test]
    fn moments_batch_agrees_with_single() {
        let p = FieldParams::new(4).unwrap();
        let t = KloostermanTable::new(&p, 1).unwrap();
        let all = power_moments(&t, 8);
        for h in 0..=8 {
            assert_eq!(all[h as usize], power_moment(&t, h).value);
        }
    }
}
