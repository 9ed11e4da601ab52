//! Arithmetic in the binary field GF(2^r).
//!
//! Elements are coefficient bitmasks of residue polynomials modulo an
//! irreducible polynomial of degree `r`; bit `i` is the coefficient of `x^i`.
//! Addition is exclusive-or. Multiplication is carry-less multiplication
//! followed by reduction.
//!
//! The trace `tr(x) = x + x^2 + ... + x^(2^(r-1))` and the canonical additive
//! character `λ(x) = (-1)^tr(x)` do not depend on the choice of modulus, so
//! every quantity computed on top of this module is basis independent.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest supported degree for the field used by the codes and sums.
pub const MIN_DEGREE: u32 = 2;
/// Largest supported degree.
pub const MAX_DEGREE: u32 = 12;

/// Lowest-weight, numerically least irreducible polynomial of each degree
/// `2..=12`.
const DEFAULT_MODULI: [u32; 11] = [
    0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11b, 0x203, 0x409, 0x805, 0x1009,
];

/// An element of GF(2^r), stored as a polynomial-basis bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

// Addition in characteristic 2 is xor.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for FieldElement {
    #[inline]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::LowerHex for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

/// Degree of a nonzero GF(2) polynomial given as a bitmask.
fn poly_degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Remainder of `a` modulo `b` over GF(2). `b` must be nonzero.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Irreducibility by trial division against every polynomial of degree
/// `1..=deg/2`.
pub fn is_irreducible(poly: u32) -> bool {
    if poly < 2 {
        return false;
    }
    let deg = poly_degree(poly);
    let max_div = deg / 2;
    (2u32..(1u32 << (max_div + 1))).all(|d| poly_rem(poly, d) != 0)
}

/// The built-in modulus for degree `r`, if one is shipped.
pub fn default_modulus(r: u32) -> Option<u32> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&r) {
        Some(DEFAULT_MODULI[(r - MIN_DEGREE) as usize])
    } else {
        None
    }
}

/// Carry-less multiplication of two residues followed by reduction.
fn clmul_reduce(r: u32, modulus: u32, mut x: u32, mut y: u32) -> u32 {
    let top = 1u32 << r;
    let mut acc = 0u32;
    while y != 0 {
        if y & 1 == 1 {
            acc ^= x;
        }
        y >>= 1;
        x <<= 1;
        if x & top != 0 {
            x ^= modulus;
        }
    }
    acc
}

/// A binary field GF(2^r) together with its derived lookup tables.
///
/// Immutable after construction; share it by reference.
#[derive(Clone)]
pub struct FieldParams {
    r: u32,
    q: u32,
    modulus: u32,
    inverse: Vec<u32>,
    trace_bits: Vec<u8>,
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldParams")
            .field("r", &self.r)
            .field("q", &self.q)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .finish()
    }
}

impl PartialEq for FieldParams {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.modulus == other.modulus
    }
}

impl Eq for FieldParams {}

impl FieldParams {
    /// GF(2^r) with the built-in modulus, `2 <= r <= 12`.
    pub fn new(r: u32) -> Result<Self> {
        let modulus = default_modulus(r).ok_or(Error::UnsupportedDegree(r))?;
        Self::with_modulus(r, modulus)
    }

    /// GF(2^r) with a caller-supplied modulus, validated for degree and
    /// irreducibility.
    pub fn with_modulus(r: u32, modulus: u32) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&r) {
            return Err(Error::UnsupportedDegree(r));
        }
        Self::build(r, modulus)
    }

    /// The prime field GF(2) (modulus `x`). Only the group enumeration
    /// accepts it; sums and codes need `q >= 4`.
    pub fn prime_field() -> Self {
        Self::build(1, 0b11).expect("x + 1 is irreducible")
    }

    fn build(r: u32, modulus: u32) -> Result<Self> {
        if modulus == 0 || poly_degree(modulus) != r {
            return Err(Error::ModulusDegree { modulus, degree: r });
        }
        if !is_irreducible(modulus) {
            return Err(Error::ReducibleModulus(modulus));
        }
        let q = 1u32 << r;
        let mut params = FieldParams {
            r,
            q,
            modulus,
            inverse: Vec::new(),
            trace_bits: Vec::new(),
        };
        params.trace_bits = (0..q)
            .map(|x| params.trace_by_squaring(FieldElement(x)))
            .collect();
        params.inverse = params.build_inverse_table();
        Ok(params)
    }

    fn build_inverse_table(&self) -> Vec<u32> {
        // Walk the powers of a generator: inv(g^k) = g^(q-1-k).
        let order = (self.q - 1) as usize;
        let mut inverse = vec![0u32; self.q as usize];
        if order == 1 {
            inverse[1] = 1;
            return inverse;
        }
        let generator = (2..self.q)
            .find(|&g| self.multiplicative_order(g) == order)
            .expect("the multiplicative group of a field is cyclic");
        let mut powers = Vec::with_capacity(order);
        let mut acc = 1u32;
        for _ in 0..order {
            powers.push(acc);
            acc = self.mul_raw(acc, generator);
        }
        for (k, &x) in powers.iter().enumerate() {
            inverse[x as usize] = powers[(order - k) % order];
        }
        inverse
    }

    fn multiplicative_order(&self, g: u32) -> usize {
        let mut acc = g;
        let mut k = 1;
        while acc != 1 {
            acc = self.mul_raw(acc, g);
            k += 1;
        }
        k
    }

    #[inline]
    fn mul_raw(&self, x: u32, y: u32) -> u32 {
        clmul_reduce(self.r, self.modulus, x, y)
    }

    fn trace_by_squaring(&self, x: FieldElement) -> u8 {
        let mut acc = x.0;
        let mut frob = x.0;
        for _ in 1..self.r {
            frob = self.mul_raw(frob, frob);
            acc ^= frob;
        }
        debug_assert!(acc <= 1, "trace must land in the prime field");
        acc as u8
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Iterator over all `q` elements in increasing bitmask order.
    pub fn elements(&self) -> impl DoubleEndedIterator<Item = FieldElement> + Clone {
        (0..self.q).map(FieldElement)
    }

    /// Iterator over the `q - 1` nonzero elements.
    pub fn nonzero(&self) -> impl DoubleEndedIterator<Item = FieldElement> + Clone {
        (1..self.q).map(FieldElement)
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        x.0 < self.q
    }

    #[inline]
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        debug_assert!(self.contains(x) && self.contains(y));
        FieldElement(self.mul_raw(x.0, y.0))
    }

    pub fn square(&self, x: FieldElement) -> FieldElement {
        self.mul(x, x)
    }

    pub fn pow(&self, x: FieldElement, mut e: u64) -> FieldElement {
        let mut base = x;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.inv_nonzero(x))
    }

    /// Inverse of an element already known to be nonzero.
    #[inline]
    pub fn inv_nonzero(&self, x: FieldElement) -> FieldElement {
        debug_assert!(!x.is_zero());
        FieldElement(self.inverse[x.index()])
    }

    /// Absolute trace to GF(2), from the table built by repeated squaring.
    #[inline]
    pub fn trace(&self, x: FieldElement) -> u8 {
        self.trace_bits[x.index()]
    }

    /// The canonical additive character `λ(x) = (-1)^tr(x)`.
    #[inline]
    pub fn canon_char(&self, x: FieldElement) -> i64 {
        1 - 2 * i64::from(self.trace(x))
    }
}

/// Product in GF(2^r). Free-function form of [`FieldParams::mul`].
pub fn fmul(p: &FieldParams, x: FieldElement, y: FieldElement) -> FieldElement {
    p.mul(x, y)
}

pub fn finv(p: &FieldParams, x: FieldElement) -> Result<FieldElement> {
    p.inv(x)
}

/// Trace computed directly by summing the `r` Frobenius images.
pub fn trace(p: &FieldParams, x: FieldElement) -> u8 {
    p.trace_by_squaring(x)
}

pub fn canon_char(p: &FieldParams, x: FieldElement) -> i64 {
    1 - 2 * i64::from(trace(p, x))
}
