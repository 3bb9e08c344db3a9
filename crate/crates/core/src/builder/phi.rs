//! Decay functions `φ : [1, ∞) → (0, 1]` with certified bounds.
//!
//! Everything is phrased on squares: for an integer `n = X²` we bound
//! `φ(√n)²`, and the construction's inequality `c / n <= φ(√n)²` is decided
//! either exactly (power laws) or from a certified lower bound (logarithmic).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::bounds::{ceil_rat, nth_root_ceil};
use crate::geometry::{format_rat, ln_bounds, parse_rat, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phi {
    /// `min(1, log(3X) / X)`.
    LogOverX,
    /// `X^(-p)` with `0 < p < 1`.
    PowerLaw(Rat),
}

impl Phi {
    pub fn power(p: Rat) -> Result<Phi> {
        if !p.is_positive() || p >= Rat::one() {
            return Err(Error::InvalidParameters(format!("power-law exponent {} must lie in (0, 1)", format_rat(&p))));
        }
        Ok(Phi::PowerLaw(p))
    }

    fn power_parts(p: &Rat) -> (u32, u32) {
        let a = p.numer().to_u32().expect("exponent numerator fits in u32");
        let q = p.denom().to_u32().expect("exponent denominator fits in u32");
        (a, q)
    }

    /// Certified enclosure of `φ(√n)²` for an integer `n >= 1`, of width at
    /// most `2^-precision_bits`.
    pub fn sq_bounds(&self, n: &BigInt, precision_bits: u32) -> Result<(Rat, Rat)> {
        if n < &BigInt::one() {
            return Err(Error::InvalidParameters("φ is defined on [1, ∞)".into()));
        }
        match self {
            Phi::LogOverX => {
                // φ² = ln(9n)² / (4n), clamped to 1
                let extra = 8 + 2 * (n.bits() as f64).log2().ceil() as u32;
                let (lo, hi) = ln_bounds(&Rat::from_integer(n * 9), precision_bits + extra)?;
                let four_n = Rat::from_integer(n * 4);
                let one = Rat::one();
                let lo = (&lo * &lo / &four_n).min(one.clone());
                let hi = (&hi * &hi / &four_n).min(one);
                Ok((lo, hi))
            }
            Phi::PowerLaw(p) => {
                let (a, q) = Self::power_parts(p);
                // r = n^(a/q) enclosed at scale 2^s; φ² = 1/r
                let m = n.pow(a);
                let s = precision_bits as usize;
                let scaled = &m << (q as usize * s);
                let r_lo = scaled.nth_root(q);
                let r_hi = if r_lo.pow(q) == scaled { r_lo.clone() } else { &r_lo + 1 };
                let den = BigInt::one() << s;
                Ok((Rat::new(den.clone(), r_hi), Rat::new(den, r_lo)))
            }
        }
    }

    /// Sound decision of `c / n <= φ(√n)²`: a `true` answer is a proof.
    /// Exact for power laws.
    pub fn admits(&self, c: &Rat, n: &BigInt, precision_bits: u32) -> Result<bool> {
        if c.is_negative() {
            return Ok(true);
        }
        match self {
            Phi::LogOverX => {
                if c > &Rat::from_integer(n.clone()) {
                    return Ok(false);
                }
                let extra = 8 + (n.bits() as f64).log2().ceil() as u32;
                let (lo, _) = ln_bounds(&Rat::from_integer(n * 9), precision_bits + extra)?;
                Ok(c * Rat::from_integer(BigInt::from(4)) <= &lo * &lo)
            }
            Phi::PowerLaw(p) => {
                // c/n <= n^(-a/q)  ⟺  c^q <= n^(q-a)
                let (a, q) = Self::power_parts(p);
                let lhs = c.numer().pow(q);
                let rhs = n.pow(q - a) * c.denom().pow(q);
                Ok(lhs <= rhs)
            }
        }
    }

    /// Least integer `n >= 1` with `admits(c, n)`. Fails with
    /// `BudgetExhausted` when `n` would need more than `max_bits` bits.
    pub fn min_admissible(&self, c: &Rat, precision_bits: u32, max_bits: u64) -> Result<BigInt> {
        if !c.is_positive() {
            return Ok(BigInt::one());
        }
        match self {
            Phi::PowerLaw(p) => {
                let (a, q) = Self::power_parts(p);
                let est_bits = (q as f64 / (q - a) as f64) * (c.numer().bits() as f64 - c.denom().bits() as f64 + 1.0);
                if est_bits > max_bits as f64 {
                    return Err(budget(est_bits, max_bits));
                }
                let cq = Rat::new(c.numer().pow(q), c.denom().pow(q));
                let n = nth_root_ceil(&ceil_rat(&cq), q - a).max(BigInt::one());
                debug_assert!(self.admits(c, &n, precision_bits)?);
                Ok(n)
            }
            Phi::LogOverX => {
                // need ln(9n) >= 2√c, i.e. n ≈ exp(2√c)/9
                let c_f = crate::geometry::rat_to_f64(c);
                let est_bits = 2.0 * c_f.sqrt() / std::f64::consts::LN_2;
                if !est_bits.is_finite() || est_bits > max_bits as f64 {
                    return Err(budget(est_bits, max_bits));
                }
                let mut lo = BigInt::zero();
                let start_bits = (est_bits as u64).saturating_sub(4).max(1);
                let mut hi = BigInt::one() << start_bits as usize;
                let floor_c = c.numer().div_ceil(c.denom());
                if hi < floor_c {
                    hi = floor_c;
                }
                while !self.admits(c, &hi, precision_bits)? {
                    lo = hi.clone();
                    hi <<= 1;
                    if hi.bits() > max_bits + 1 {
                        return Err(budget(hi.bits() as f64, max_bits));
                    }
                }
                // invariant: admits(hi), !admits(lo) or lo = 0
                while &hi - &lo > BigInt::one() {
                    let mid: BigInt = (&lo + &hi) >> 1;
                    if self.admits(c, &mid, precision_bits)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }
}

fn budget(bits: f64, max_bits: u64) -> Error {
    Error::BudgetExhausted(format!("next norm would need about {bits:.3e} bits, limit is {max_bits}"))
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::LogOverX => write!(f, "log3x"),
            Phi::PowerLaw(p) => write!(f, "pow {}", format_rat(p)),
        }
    }
}

impl FromStr for Phi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Phi> {
        let s = s.trim();
        if s == "log3x" {
            return Ok(Phi::LogOverX);
        }
        let rest = s
            .strip_prefix("pow")
            .map(|r| r.trim_start_matches([':', ' ', '=']))
            .ok_or_else(|| Error::Parse(format!("unknown φ {s:?}; expected \"log3x\" or \"pow p/q\"")))?;
        Phi::power(parse_rat(rest)?)
    }
}

impl serde::Serialize for Phi {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Phi {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
