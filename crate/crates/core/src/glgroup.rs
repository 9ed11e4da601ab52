//! The general linear group GL(2, q) over GF(2^r) and Kloosterman sums over
//! GL(t, q).
//!
//! Enumeration order is part of the public contract: matrices `(a, b; c, d)`
//! come out lexicographically by the 4-tuple of bitmask values, singular
//! tuples skipped. This order fixes the coordinate order of the code built
//! in [`crate::code`].

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::kloosterman::{kloosterman_sum, KloostermanTable};

/// Largest `q` for which GL(2, q) is enumerated directly.
pub const MAX_ENUMERATION_Q: u32 = 64;

/// Largest `t` accepted by [`gl_kloosterman_recursive`].
pub const MAX_RECURSION_DEGREE: u32 = 6;

/// `|GL(n, q)| = q^(n choose 2) · Π_{j=1..n} (q^j - 1)`.
pub fn gl_order(q: u64, n: u32) -> BigUint {
    let q = BigUint::from(q);
    let mut order = Pow::pow(&q, n * n.saturating_sub(1) / 2);
    for j in 1..=n {
        order *= Pow::pow(&q, j) - BigUint::one();
    }
    order
}

/// `|GL(2, q)| = q(q - 1)(q² - 1)` as a machine integer.
pub fn gl2_order(q: u32) -> u64 {
    let q = u64::from(q);
    q * (q - 1) * (q * q - 1)
}

/// A 2×2 matrix `(a, b; c, d)` in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GLMatrix {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl GLMatrix {
    pub const fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Self {
        Self { a, b, c, d }
    }

    pub const IDENTITY: GLMatrix =
        GLMatrix::new(FieldElement::ONE, FieldElement::ZERO, FieldElement::ZERO, FieldElement::ONE);

    /// `ad + bc` (characteristic 2).
    pub fn det(&self, p: &FieldParams) -> FieldElement {
        p.mul(self.a, self.d) + p.mul(self.b, self.c)
    }

    pub fn trace(&self) -> FieldElement {
        self.a + self.d
    }

    /// `det^{-1} · (d, b; c, a)`.
    pub fn inverse(&self, p: &FieldParams) -> Result<GLMatrix> {
        let det_inv = p.inv(self.det(p))?;
        Ok(GLMatrix::new(
            p.mul(det_inv, self.d),
            p.mul(det_inv, self.b),
            p.mul(det_inv, self.c),
            p.mul(det_inv, self.a),
        ))
    }

    /// `Tr g^{-1} = Tr g / det g`.
    pub fn inverse_trace(&self, p: &FieldParams) -> Result<FieldElement> {
        let det_inv = p.inv(self.det(p))?;
        Ok(p.mul(det_inv, self.trace()))
    }

    pub fn mul(&self, p: &FieldParams, other: &GLMatrix) -> GLMatrix {
        GLMatrix::new(
            p.mul(self.a, other.a) + p.mul(self.b, other.c),
            p.mul(self.a, other.b) + p.mul(self.b, other.d),
            p.mul(self.c, other.a) + p.mul(self.d, other.c),
            p.mul(self.c, other.b) + p.mul(self.d, other.d),
        )
    }

    pub fn scale(&self, p: &FieldParams, s: FieldElement) -> GLMatrix {
        GLMatrix::new(p.mul(s, self.a), p.mul(s, self.b), p.mul(s, self.c), p.mul(s, self.d))
    }
}

fn check_enumerable(p: &FieldParams) -> Result<()> {
    if p.q() > MAX_ENUMERATION_Q {
        return Err(Error::IterationCap {
            what: "direct GL(2, q) enumeration",
            limit: format!("q <= {MAX_ENUMERATION_Q}"),
        });
    }
    Ok(())
}

/// Invertible matrices whose first entry is `a`, in enumeration order.
fn gl2_with_first_entry(p: &FieldParams, a: FieldElement) -> impl Iterator<Item = GLMatrix> + '_ {
    let q = p.q();
    (0..q).flat_map(move |b| {
        (0..q).flat_map(move |c| {
            (0..q).filter_map(move |d| {
                let g = GLMatrix::new(a, FieldElement(b), FieldElement(c), FieldElement(d));
                (!g.det(p).is_zero()).then_some(g)
            })
        })
    })
}

/// Every element of GL(2, q) exactly once, lexicographic in `(a, b, c, d)`.
pub fn enumerate_gl2(p: &FieldParams) -> Result<impl Iterator<Item = GLMatrix> + '_> {
    check_enumerable(p)?;
    Ok(p.elements().flat_map(move |a| gl2_with_first_entry(p, a)))
}

/// Parallel fold over GL(2, q), split by the first matrix entry. The
/// combination is an exact integer sum so the result is schedule independent.
fn gl2_sum<F>(p: &FieldParams, term: F) -> Result<i64>
where
    F: Fn(&GLMatrix, FieldElement, FieldElement) -> i64 + Sync,
{
    check_enumerable(p)?;
    Ok((0..p.q())
        .into_par_iter()
        .map(|a| {
            gl2_with_first_entry(p, FieldElement(a))
                .map(|g| {
                    let tr = g.trace();
                    let tr_inv = p.mul(p.inv_nonzero(g.det(p)), tr);
                    term(&g, tr, tr_inv)
                })
                .sum::<i64>()
        })
        .sum())
}

/// `K_{GL(2,q)}(λ; a) = Σ_g λ(Tr g + a·Tr g^{-1})` by enumeration.
pub fn gl2_kloosterman_direct(p: &FieldParams, a: FieldElement) -> Result<i64> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    gl2_sum(p, |_, tr, tr_inv| p.canon_char(tr + p.mul(a, tr_inv)))
}

/// `Σ_g λ(a·(Tr g + Tr g^{-1}))` by enumeration; equals
/// `K_{GL(2,q)}(λ; a²)` under `g → a^{-1} g`.
pub fn gl2_scaled_trace_sum(p: &FieldParams, a: FieldElement) -> Result<i64> {
    gl2_sum(p, |_, tr, tr_inv| p.canon_char(p.mul(a, tr + tr_inv)))
}

/// `K_{GL(t,q)}(λ; a)` from
/// `K_t = q^(t-1) K_{t-1} K + q^(2t-2) (q^(t-1) - 1) K_{t-2}`,
/// seeded with `K_0 = 1` and `K_1 = K(λ; a)`.
pub fn gl_kloosterman_recursive(p: &FieldParams, t: u32, a: FieldElement) -> Result<BigInt> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    if t > MAX_RECURSION_DEGREE {
        return Err(Error::IterationCap {
            what: "GL(t, q) recursion degree",
            limit: format!("t <= {MAX_RECURSION_DEGREE}"),
        });
    }
    let k = BigInt::from(kloosterman_sum(p, a)?);
    let q = BigInt::from(p.q());
    let mut prev = BigInt::one();
    if t == 0 {
        return Ok(prev);
    }
    let mut cur = k.clone();
    for s in 2..=t {
        let q_s1 = Pow::pow(&q, s - 1);
        let next = &q_s1 * &cur * &k + Pow::pow(&q, 2 * s - 2) * (&q_s1 - 1) * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// `n(β) = |{g ∈ GL(2, q) : Tr g + Tr g^{-1} = β}|` for every `β`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberCensus {
    pub q: u32,
    pub counts: Vec<u64>,
}

impl FiberCensus {
    pub fn get(&self, beta: FieldElement) -> u64 {
        self.counts[beta.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FieldElement, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(b, &n)| (FieldElement(b as u32), n))
    }

    /// `Σ_β n(β)·β` in F_q (only the parity of `n(β)` matters).
    pub fn weighted_sum(&self) -> FieldElement {
        self.iter()
            .filter(|(_, n)| n % 2 == 1)
            .fold(FieldElement::ZERO, |acc, (b, _)| acc + b)
    }
}

pub fn fiber_census_direct(p: &FieldParams) -> Result<FiberCensus> {
    check_enumerable(p)?;
    let q = p.q() as usize;
    let counts = (0..p.q())
        .into_par_iter()
        .map(|a| {
            let mut local = vec![0u64; q];
            for g in gl2_with_first_entry(p, FieldElement(a)) {
                let tr = g.trace();
                let beta = tr + p.mul(p.inv_nonzero(g.det(p)), tr);
                local[beta.index()] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; q],
            |mut acc, local| {
                acc.iter_mut().zip(local).for_each(|(x, y)| *x += y);
                acc
            },
        );
    Ok(FiberCensus { q: p.q(), counts })
}

/// `n(0) = q(2q² - 2q - 1)`, `n(β) = q(q² - 2q - 1 + K(λ; β^{-1}))`.
pub fn fiber_census_formula(p: &FieldParams, ktable: &KloostermanTable) -> FiberCensus {
    assert_eq!(ktable.dimension(), 1, "fiber formula needs K(λ; a)");
    assert_eq!(ktable.q(), p.q());
    let q = i64::from(p.q());
    let counts = p
        .elements()
        .map(|beta| {
            let n = if beta.is_zero() {
                q * (2 * q * q - 2 * q - 1)
            } else {
                q * (q * q - 2 * q - 1 + ktable.value(p.inv_nonzero(beta)))
            };
            u64::try_from(n).expect("fiber sizes are positive for q >= 4")
        })
        .collect();
    FiberCensus { q: p.q(), counts }
}
