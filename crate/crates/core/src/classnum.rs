//! Brute-force Kronecker class numbers from reduced binary quadratic forms.
//!
//! Used only as an independent cross-check of the Kloosterman value census.

use num_integer::Integer;

use crate::error::{Error, Result};

/// A positive-definite form `a x² + b xy + c y²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    /// `|b| <= a <= c`, with `b >= 0` whenever `|b| = a` or `a = c`.
    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        if !(b.abs() <= a && a <= c) {
            return false;
        }
        if b.abs() == a || a == c {
            return b >= 0;
        }
        true
    }
}

fn check_discriminant(d: i64) -> Result<()> {
    if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidDiscriminant(d));
    }
    Ok(())
}

/// Every reduced form of discriminant `d` (primitive or not), enumerated over
/// `0 < a <= √(|d|/3)`.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadraticForm>> {
    check_discriminant(d)?;
    let abs = -d;
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= abs {
        for b in -a..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let form = QuadraticForm { a, b, c: num / (4 * a) };
            if form.is_reduced() {
                forms.push(form);
            }
        }
        a += 1;
    }
    Ok(forms)
}

/// Class number of primitive forms of discriminant `d`.
pub fn primitive_class_number(d: i64) -> Result<u64> {
    Ok(reduced_forms(d)?.iter().filter(|f| f.is_primitive()).count() as u64)
}

/// `H(d) = Σ h(d/f²)` over `f` with `f² | d` and `d/f² ≡ 0, 1 (mod 4)`,
/// `h` counting primitive reduced forms.
pub fn kronecker_class_number(d: i64) -> Result<u64> {
    check_discriminant(d)?;
    let mut total = 0;
    let mut f = 1i64;
    while f * f <= -d {
        if d % (f * f) == 0 {
            let e = d / (f * f);
            if matches!(e.rem_euclid(4), 0 | 1) {
                total += primitive_class_number(e)?;
            }
        }
        f += 1;
    }
    Ok(total)
}
