#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed, TestCaseError};

use maxsing::builder::{self, CertifiedLimit, FamilyAdapter, FamilySpec, Phi, RunConfig, RunOutcome};
use maxsing::geometry::{dist_sq, ln_bounds, rat, sqrt_bounds, IntVec, Rat};
use maxsing::multilinear::{KLinearMap, WitnessedPoint};
use maxsing::verifier::d_xi;

pub const CASES: u32 = 1000;

pub fn fixed(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_algorithm: RngAlgorithm::ChaCha,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn v(c: &[i64]) -> IntVec {
    IntVec::from_i64s(c)
}

pub fn log3x() -> Phi {
    Phi::LogOverX
}

pub fn pow(p: i64, q: i64) -> Phi {
    Phi::power(rat(p, q)).unwrap()
}

pub fn adapter(spec: FamilySpec) -> FamilyAdapter {
    FamilyAdapter::from_spec(&spec, 0).unwrap()
}

pub fn build(adapter: &FamilyAdapter, phi: Phi, steps: usize) -> RunOutcome {
    builder::run(adapter, &RunConfig::new(phi, steps)).unwrap()
}

fn nonzero(len: usize, r: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-r..=r, len).prop_filter("nonzero", |c| c.iter().any(|x| *x != 0))
}

// dist_sq depends only on the projective classes.
pub fn dist_scale_strategy() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, i64, i64)> {
    (2usize..=6).prop_flat_map(|n| (nonzero(n, 40), nonzero(n, 40), 1i64..=50, -50i64..=-1))
}

pub fn dist_scale_property((x, y, a, b): (Vec<i64>, Vec<i64>, i64, i64)) -> Result<(), TestCaseError> {
    let (xv, yv) = (v(&x), v(&y));
    let base = dist_sq(&xv, &yv).unwrap();
    let scaled = dist_sq(&xv.scale(&BigInt::from(a)), &yv.scale(&BigInt::from(b))).unwrap();
    prop_assert_eq!(&base, &scaled);
    prop_assert_eq!(&base, &dist_sq(&yv, &xv).unwrap());
    prop_assert!(base >= rat(0, 1) && base <= rat(1, 1));
    Ok(())
}

pub type MultilinearCase = (Vec<i64>, Vec<i64>, Vec<i64>, Vec<i64>, i64, i64, usize);
pub type RefinementCase = (i64, i64, u32, Vec<i64>, Vec<i64>, i64);

// A random bilinear map Q^3 x Q^3 -> Q^3 is linear in each slot.
pub fn multilinear_strategy() -> impl Strategy<Value = MultilinearCase> {
    (
        proptest::collection::vec(-4i64..=4, 27),
        proptest::collection::vec(-9i64..=9, 3),
        proptest::collection::vec(-9i64..=9, 3),
        proptest::collection::vec(-9i64..=9, 3),
        -6i64..=6,
        -6i64..=6,
        0usize..2,
    )
}

pub fn multilinear_property((coeffs, u, w, o, a, b, slot): MultilinearCase) -> Result<(), TestCaseError> {
    let mut coeffs = coeffs;
    // keep the images spanning Q^3
    for (t, d) in [(0usize, 0usize), (4, 1), (8, 2)] {
        coeffs[3 * t + d] = 20;
    }
    let images: Vec<Vec<Rat>> = coeffs.chunks(3).map(|c| c.iter().map(|x| rat(*x, 1)).collect()).collect();
    let m = KLinearMap::new(2, 3, 3, images).unwrap();
    let (u, w, o) = (v(&u), v(&w), v(&o));
    let (ab, bb) = (BigInt::from(a), BigInt::from(b));
    let put = |s: IntVec| if slot == 0 { vec![s, o.clone()] } else { vec![o.clone(), s] };
    let lhs = m.evaluate_scaled(&put(u.combine(&ab, &w, &bb))).unwrap();
    let rhs = m.evaluate_scaled(&put(u.clone())).unwrap().combine(&ab, &m.evaluate_scaled(&put(w.clone())).unwrap(), &bb);
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

// Every witnessed point evaluates back to itself; perturbing the point breaks it.
pub fn witness_strategy() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>, Vec<i64>)> {
    (0usize..3, proptest::collection::vec(-7i64..=7, 4), proptest::collection::vec(-7i64..=7, 4), proptest::collection::vec(-7i64..=7, 4))
}

pub fn witness_property((family, a, b, c): (usize, Vec<i64>, Vec<i64>, Vec<i64>)) -> Result<(), TestCaseError> {
    let (map, witness) = match family {
        0 => (KLinearMap::grassmann(4, 2).unwrap(), vec![v(&a), v(&b)]),
        1 => (KLinearMap::prodforms(2, 3).unwrap(), vec![v(&a[..2]), v(&b[..2]), v(&c[..2])]),
        _ => (KLinearMap::grassmann(4, 3).unwrap(), vec![v(&a), v(&b), v(&c)]),
    };
    let Ok(p) = WitnessedPoint::new(&map, witness) else {
        // zero slot or degenerate wedge: no point to certify
        return Ok(());
    };
    prop_assert!(p.is_sound(&map));
    let mut coords = p.point.rep().coords().to_vec();
    coords[0] += 1;
    let bumped = IntVec::new(coords);
    if let Ok(q) = maxsing::geometry::primitive(&bumped) {
        if q != p.point {
            let fake = WitnessedPoint { point: q, witness: p.witness.clone() };
            prop_assert!(!fake.is_sound(&map));
        }
    }
    Ok(())
}

// Raising the precision never widens an enclosure outward.
pub fn refinement_strategy() -> impl Strategy<Value = RefinementCase> {
    (1i64..=1_000_000, 1i64..=1000, 4u32..48, nonzero(4, 30), nonzero(4, 30), 0i64..1000)
}

pub fn refinement_property((num, den, p, rep, x, rn): RefinementCase) -> Result<(), TestCaseError> {
    let r = rat(num, den);
    for f in [sqrt_bounds, ln_bounds] {
        let (lo1, hi1) = f(&r, p).unwrap();
        let (lo2, hi2) = f(&r, p + 8).unwrap();
        prop_assert!(lo1 <= lo2 && lo2 <= hi2 && hi2 <= hi1);
    }
    let lim = CertifiedLimit { representative: v(&rep), radius_sq: rat(rn, 1_000_000) };
    let a = d_xi(&lim, &v(&x), p).unwrap();
    let b = d_xi(&lim, &v(&x), p + 8).unwrap();
    prop_assert!(a.lo <= b.lo && b.lo <= b.hi && b.hi <= a.hi);
    Ok(())
}

// D_ξ(λx) = λ·D_ξ(x): compared on an exact ball, where the value is a
// single real and both enclosures must overlap after scaling.
pub fn primitive_filter_strategy() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, i64)> {
    (nonzero(4, 50), nonzero(4, 30), 2i64..=12)
}

pub fn primitive_filter_property((rep, x, lambda): (Vec<i64>, Vec<i64>, i64)) -> Result<(), TestCaseError> {
    let prec = 48;
    let lim = CertifiedLimit { representative: v(&rep), radius_sq: rat(0, 1) };
    let one = d_xi(&lim, &v(&x), prec).unwrap();
    let many = d_xi(&lim, &v(&x).scale(&BigInt::from(lambda)), prec).unwrap();
    let l = rat(lambda, 1);
    let slack = Rat::new(BigInt::from(2 * lambda + 2), BigInt::from(1) << prec as usize);
    prop_assert!(many.lo <= &one.hi * &l && &one.lo * &l <= many.hi);
    prop_assert!((&many.hi - &one.hi * &l).abs() <= slack);
    prop_assert!((&many.lo - &one.lo * &l).abs() <= slack);
    // so the scaled point is never strictly better
    prop_assert!(many.hi + &slack >= one.lo);
    Ok(())
}
