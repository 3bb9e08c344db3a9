//! Certified rational enclosures of square roots and natural logarithms.
//!
//! Every result is a pair `(lo, hi)` of exact rationals with `lo <= f(r) <= hi`.
//! Rounding is directed by hand: lower bounds are built from floors and upper
//! bounds from ceilings, so no floating point is involved.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rat;
use crate::error::{Error, Result};

pub fn isqrt_floor(n: &BigInt) -> BigInt {
    n.sqrt()
}

pub fn isqrt_ceil(n: &BigInt) -> BigInt {
    let s = n.sqrt();
    if &s * &s == *n {
        s
    } else {
        s + 1
    }
}

/// `ceil(n^(1/k))` for `n >= 0`.
pub fn nth_root_ceil(n: &BigInt, k: u32) -> BigInt {
    let s = n.nth_root(k);
    if s.pow(k) == *n {
        s
    } else {
        s + 1
    }
}

pub(crate) fn ceil_rat(r: &Rat) -> BigInt {
    r.numer().div_ceil(r.denom())
}

/// Enclosure of `√r` with width at most `2^-precision_bits`.
///
/// For `r = a/b` of moderate size the bounds are `isqrt(a·b·4^p) / (b·2^p)`
/// rounded down and up, exact whenever `r` is a rational square. Huge
/// operands use the dyadic grid `floor(√r·2^p) / 2^p` instead, which only
/// needs one short division. Either way intervals are nested as `p` grows.
pub fn sqrt_bounds(r: &Rat, precision_bits: u32) -> Result<(Rat, Rat)> {
    if r.is_negative() {
        return Err(Error::NegativeInput);
    }
    let (a, b) = (r.numer(), r.denom());
    let p = precision_bits as usize;
    if a.bits() + b.bits() <= 8192 {
        // the grid depends on b, so unreduced input is reduced first
        let g = a.gcd(b);
        let (a, b) = (a / &g, b / &g);
        let scaled = (&a * &b) << (2 * p);
        let den = b << p;
        return Ok((Rat::new(isqrt_floor(&scaled), den.clone()), Rat::new(isqrt_ceil(&scaled), den)));
    }
    let (fl, rem) = (a << (2 * p)).div_rem(b);
    let cl = if rem.is_zero() { fl.clone() } else { &fl + 1 };
    let den = BigInt::one() << p;
    let lo = Rat::new(isqrt_floor(&fl), den.clone());
    let hi = Rat::new(isqrt_ceil(&cl), den);
    Ok((lo, hi))
}

/// `2^W · atanh(u/v)` enclosed by integers, for `0 <= u/v < 1/2`.
fn atanh_fixed(u: &BigInt, v: &BigInt, w: usize) -> (BigInt, BigInt) {
    let one = BigInt::one() << w;
    let (u2, v2) = (u * u, v * v);
    let mut p_lo = (&one * u).div_floor(v);
    let mut p_hi = (&one * u).div_ceil(v);
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut j = 0u64;
    loop {
        let d = BigInt::from(2 * j + 1);
        lo += p_lo.div_floor(&d);
        hi += p_hi.div_ceil(&d);
        p_lo = (&p_lo * &u2).div_floor(&v2);
        p_hi = (&p_hi * &u2).div_ceil(&v2);
        j += 1;
        if p_hi <= BigInt::one() {
            break;
        }
    }
    // Remaining terms sum to at most p_hi/(1 - t^2) <= 4/3 · p_hi <= 2 units.
    hi += 2;
    (lo, hi)
}

fn ln_bounds_at(r: &Rat, w: usize) -> (Rat, Rat) {
    let (a, b) = (r.numer(), r.denom());
    // r = 2^e · m with m in [1, 2)
    let mut e = a.bits() as i64 - b.bits() as i64;
    let (mut num, mut den) = (a.clone(), b.clone());
    if e >= 0 {
        den <<= e as usize;
    } else {
        num <<= (-e) as usize;
    }
    if num < den {
        num <<= 1;
        e -= 1;
    }
    // ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3)
    let (t_lo, t_hi) = atanh_fixed(&(&num - &den), &(&num + &den), w);
    let (l2_lo, l2_hi) = atanh_fixed(&BigInt::one(), &BigInt::from(3), w);
    let eb = BigInt::from(e);
    let (e_lo, e_hi) = if e >= 0 { (&eb * &l2_lo, &eb * &l2_hi) } else { (&eb * &l2_hi, &eb * &l2_lo) };
    let scale = BigInt::one() << w;
    let lo = Rat::new((t_lo + e_lo) * 2, scale.clone());
    let hi = Rat::new((t_hi + e_hi) * 2, scale);
    (lo, hi)
}

/// Enclosure of `ln r` for rational `r > 0` with width at most `2^-precision_bits`.
pub fn ln_bounds(r: &Rat, precision_bits: u32) -> Result<(Rat, Rat)> {
    if !r.is_positive() {
        return Err(Error::NonPositiveInput);
    }
    if r.is_one() {
        return Ok((Rat::zero(), Rat::zero()));
    }
    let target = Rat::new(BigInt::one(), BigInt::one() << precision_bits as usize);
    let extra = 64 - (r.numer().bits().max(r.denom().bits()) + 1).leading_zeros() as usize;
    let mut w = precision_bits as usize + extra + 16;
    loop {
        let (lo, hi) = ln_bounds_at(r, w);
        if &hi - &lo <= target {
            return Ok((lo, hi));
        }
        w += 32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;
    use proptest::prelude::*;

    #[test]
    fn sqrt_examples() {
        for p in [0, 4, 64] {
            assert_eq!(sqrt_bounds(&rat(4, 1), p).unwrap(), (rat(2, 1), rat(2, 1)));
            assert_eq!(sqrt_bounds(&rat(1, 4), p).unwrap(), (rat(1, 2), rat(1, 2)));
        }
        let (lo, hi) = sqrt_bounds(&rat(2, 1), 4).unwrap();
        assert!(&lo * &lo <= rat(2, 1) && &hi * &hi >= rat(2, 1));
        assert!(&hi - &lo <= rat(1, 16));
        assert_eq!(sqrt_bounds(&rat(-1, 2), 8), Err(Error::NegativeInput));
        assert_eq!(sqrt_bounds(&rat(0, 1), 8).unwrap(), (rat(0, 1), rat(0, 1)));
    }

    #[test]
    fn root_helpers() {
        assert_eq!(isqrt_ceil(&BigInt::from(10)), BigInt::from(4));
        assert_eq!(isqrt_ceil(&BigInt::from(9)), BigInt::from(3));
        assert_eq!(nth_root_ceil(&BigInt::from(28), 3), BigInt::from(4));
        assert_eq!(nth_root_ceil(&BigInt::from(27), 3), BigInt::from(3));
    }

    #[test]
    fn ln_known_values() {
        assert_eq!(ln_bounds(&rat(1, 1), 64).unwrap(), (rat(0, 1), rat(0, 1)));
        // ln 2 = 0.693147180559945309417232121458...
        let (lo, hi) = ln_bounds(&rat(2, 1), 100).unwrap();
        let ln2_lo = Rat::new(BigInt::from(693147180559945309417232121458u128), BigInt::from(10u128.pow(30)));
        let ln2_hi = &ln2_lo + Rat::new(BigInt::one(), BigInt::from(10u128.pow(30)));
        assert!(lo <= ln2_hi && hi >= ln2_lo);
        assert!(&hi - &lo <= Rat::new(BigInt::one(), BigInt::one() << 100));
        let (lo, hi) = ln_bounds(&rat(1, 2), 100).unwrap();
        assert!(lo <= -&ln2_lo && hi >= -ln2_hi);
        assert_eq!(ln_bounds(&rat(0, 1), 8), Err(Error::NonPositiveInput));
        assert_eq!(ln_bounds(&rat(-3, 1), 8), Err(Error::NonPositiveInput));
    }

    #[test]
    fn sqrt_of_huge_rational() {
        let a = (BigInt::one() << 6000usize) + 12345;
        let b = (BigInt::one() << 5000usize) + 77;
        let r = Rat::new(a, b);
        for p in [0u32, 10, 64] {
            let (lo, hi) = sqrt_bounds(&r, p).unwrap();
            assert!(&lo * &lo <= r && &hi * &hi >= r);
            assert!(&hi - &lo <= Rat::new(BigInt::one(), BigInt::one() << p as usize));
            let (lo2, hi2) = sqrt_bounds(&r, p + 5).unwrap();
            assert!(lo <= lo2 && hi2 <= hi);
        }
    }

    #[test]
    fn ln_of_huge_argument() {
        let r = Rat::from_integer(BigInt::one() << 5000usize);
        let (lo, hi) = ln_bounds(&r, 64).unwrap();
        let f = 5000.0 * std::f64::consts::LN_2;
        assert!(crate::geometry::rat_to_f64(&lo) <= f + 1e-9 && crate::geometry::rat_to_f64(&hi) >= f - 1e-9);
        assert!(&hi - &lo <= Rat::new(BigInt::one(), BigInt::one() << 64usize));
    }

    proptest! {
        #![proptest_config(crate::testcfg::fixed(1000, 0xb0d5))]

        // Refining precision never loosens an enclosure.
        #[test]
        fn sqrt_refinement_is_nested(n in 0u64..1_000_000, d in 1u64..1_000_000, p in 0u32..80) {
            let r = Rat::new(BigInt::from(n), BigInt::from(d));
            let (lo1, hi1) = sqrt_bounds(&r, p).unwrap();
            let (lo2, hi2) = sqrt_bounds(&r, p + 7).unwrap();
            prop_assert!(lo1 <= lo2 && hi2 <= hi1);
            prop_assert!(&lo2 * &lo2 <= r && &hi2 * &hi2 >= r);
            prop_assert!(&hi1 - &lo1 <= Rat::new(BigInt::one(), BigInt::one() << p as usize));
        }

        #[test]
        fn ln_encloses_float_value(n in 1u64..u64::MAX, d in 1u64..1_000_000_000, p in 8u32..120) {
            let r = Rat::new(BigInt::from(n), BigInt::from(d));
            let (lo, hi) = ln_bounds(&r, p).unwrap();
            let f = (n as f64).ln() - (d as f64).ln();
            prop_assert!(crate::geometry::rat_to_f64(&lo) <= f + 1e-9);
            prop_assert!(crate::geometry::rat_to_f64(&hi) >= f - 1e-9);
            prop_assert!(&hi - &lo <= Rat::new(BigInt::one(), BigInt::one() << p as usize));
        }

        // ln(ab) = ln a + ln b must be consistent with the enclosures.
        #[test]
        fn ln_is_additive_within_bounds(a in 1u64..1u64 << 40, b in 1u64..1u64 << 40) {
            let ra = Rat::from_integer(BigInt::from(a));
            let rb = Rat::from_integer(BigInt::from(b));
            let (la, ha) = ln_bounds(&ra, 64).unwrap();
            let (lb, hb) = ln_bounds(&rb, 64).unwrap();
            let (lab, hab) = ln_bounds(&(&ra * &rb), 64).unwrap();
            prop_assert!(&la + &lb <= hab);
            prop_assert!(lab <= &ha + &hb);
        }
    }
}
