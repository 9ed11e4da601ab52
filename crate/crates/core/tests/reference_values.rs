//! Values frozen from an independent brute-force implementation (plain
//! Python integers, schoolbook polynomial products for the weight
//! distribution).

use num_bigint::{BigInt, BigUint};

use klmoments::code::weight_distribution_transform;
use klmoments::glgroup::fiber_census_formula;
use klmoments::kloosterman::{power_moments, value_census};
use klmoments::moments::{generate_moments, MomentKind};
use klmoments::{CodeContext, DualWeightTable, FieldElement, FieldParams, KloostermanTable};

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn moments_direct(p: &FieldParams, h_max: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    let k1 = KloostermanTable::new(p, 1).unwrap();
    let k2 = KloostermanTable::new(p, 2).unwrap();
    let mk2 = power_moments(&k2, h_max);
    let mk = power_moments(&k1, 2 * h_max).into_iter().step_by(2).collect();
    (mk2, mk)
}

#[test]
fn q8_kloosterman_values() {
    let p = FieldParams::with_modulus(3, 0xb).unwrap();
    let table = KloostermanTable::new(&p, 1).unwrap();
    assert_eq!(table.values(), &[-5, -1, 3, -1, 3, -1, 3]);
    let census: Vec<_> = value_census(&p).unwrap().multiplicity.into_iter().collect();
    assert_eq!(census, vec![(-5, 1), (-1, 3), (3, 3)]);
}

#[test]
fn q16_census() {
    let p = FieldParams::with_modulus(4, 0x13).unwrap();
    let census: Vec<_> = value_census(&p).unwrap().multiplicity.into_iter().collect();
    assert_eq!(census, vec![(-5, 4), (-1, 5), (3, 4), (7, 2)]);
}

#[test]
fn direct_moments_q4_q8_q16() {
    let cases: [(u32, u32, [i64; 6], [i64; 6]); 3] = [
        (2, 0x7, [3, -1, 43, 71, 787, 2639], [3, 11, 83, 731, 6563, 59051]),
        (3, 0xb, [7, -1, 439, 3887, 90727, 1369439], [7, 55, 871, 17815, 410311, 9942775]),
        (
            4,
            0x13,
            [15, -1, 3823, 56543, 2660815, 74642879],
            [15, 239, 7631, 300719, 13118351, 604249199],
        ),
    ];
    for (r, m, mk2, mk) in cases {
        let p = FieldParams::with_modulus(r, m).unwrap();
        let (d2, de) = moments_direct(&p, 5);
        assert_eq!(d2, ints(&mk2), "MK_2 at r={r}");
        assert_eq!(de, ints(&mk), "MK even at r={r}");
    }
}

#[test]
fn fiber_censuses() {
    let q8 = FieldParams::with_modulus(3, 0xb).unwrap();
    let f8 = fiber_census_formula(&q8, &KloostermanTable::new(&q8, 1).unwrap());
    let n8: Vec<u64> = f8.iter().map(|(_, n)| n).collect();
    assert_eq!(n8, [888, 336, 400, 368, 400, 368, 400, 368]);

    let q16 = FieldParams::with_modulus(4, 0x13).unwrap();
    let f16 = fiber_census_formula(&q16, &KloostermanTable::new(&q16, 1).unwrap());
    let n16: Vec<u64> = f16.iter().map(|(_, n)| n).collect();
    assert_eq!(
        n16,
        [7664, 3552, 3488, 3488, 3488, 3488, 3680, 3680, 3616, 3552, 3616, 3552, 3616, 3552, 3552, 3616]
    );
}

#[test]
fn weight_distribution_prefixes() {
    let cases: [(u32, u32, [u64; 6], usize); 2] = [
        (2, 0x7, [1, 92, 5518, 271164, 11108965, 379454864], 53),
        (3, 0xb, [1, 888, 892092, 933655368, 808049409366, 567991964766408], 1060),
    ];
    for (r, m, prefix, max_digits) in cases {
        let p = FieldParams::with_modulus(r, m).unwrap();
        let ctx = CodeContext::from_formula(p.clone()).unwrap();
        let dw = DualWeightTable::from_kloosterman(&ctx, &KloostermanTable::new(&p, 1).unwrap());
        let wd = weight_distribution_transform(&ctx, &dw).unwrap();
        let head: Vec<BigUint> = prefix.iter().map(|&c| BigUint::from(c)).collect();
        assert_eq!(&wd.freqs[..6], head.as_slice());
        let digits = wd.freqs.iter().map(|c| c.to_string().len()).max().unwrap();
        assert_eq!(digits, max_digits);
    }
}

#[test]
fn generated_moments_match_reference_q8() {
    let p = FieldParams::with_modulus(3, 0xb).unwrap();
    let ctx = CodeContext::from_formula(p.clone()).unwrap();
    let dw = DualWeightTable::from_kloosterman(&ctx, &KloostermanTable::new(&p, 1).unwrap());
    let wd = weight_distribution_transform(&ctx, &dw).unwrap();
    let mk2 = generate_moments(MomentKind::TwoDimensional, &ctx, &wd, 5).unwrap();
    let mk = generate_moments(MomentKind::EvenClassical, &ctx, &wd, 5).unwrap();
    assert_eq!(mk2, ints(&[7, -1, 439, 3887, 90727, 1369439]));
    assert_eq!(mk, ints(&[7, 55, 871, 17815, 410311, 9942775]));
}

#[test]
fn census_is_independent_of_the_modulus() {
    // x^4 + x + 1 and x^4 + x^3 + 1 give isomorphic fields; the value census
    // is an isomorphism invariant while individual values move around.
    let a = FieldParams::with_modulus(4, 0x13).unwrap();
    let b = FieldParams::with_modulus(4, 0x19).unwrap();
    assert_eq!(value_census(&a).unwrap(), value_census(&b).unwrap());

    let da: Vec<u64> = {
        let ctx = CodeContext::from_formula(a.clone()).unwrap();
        let dw = DualWeightTable::from_kloosterman(&ctx, &KloostermanTable::new(&a, 1).unwrap());
        dw.frequencies().into_iter().flat_map(|(w, n)| [w, n]).collect()
    };
    let db: Vec<u64> = {
        let ctx = CodeContext::from_formula(b.clone()).unwrap();
        let dw = DualWeightTable::from_kloosterman(&ctx, &KloostermanTable::new(&b, 1).unwrap());
        dw.frequencies().into_iter().flat_map(|(w, n)| [w, n]).collect()
    };
    assert_eq!(da, db);
    assert_eq!(moments_direct(&a, 4), moments_direct(&b, 4));
}

#[test]
fn gl2_over_prime_field() {
    let p = FieldParams::prime_field();
    let count = klmoments::glgroup::enumerate_gl2(&p).unwrap().count();
    assert_eq!(count, 6);
    assert_eq!(p.inv(FieldElement(1)).unwrap(), FieldElement(1));
}
