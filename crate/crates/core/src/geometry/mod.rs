//! Exact rational and integer geometry in projective space.
//!
//! Everything here is exact: distances are handled as squared rationals and
//! square roots only appear as certified intervals (see [`bounds`]).

pub mod bounds;
pub mod linalg;
pub mod wedge;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use bounds::{ln_bounds, sqrt_bounds};
pub use linalg::{rank, Subspace};
pub use wedge::{binomial, subsets, wedge};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => Ok(Rat::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Decimal rendering of a rational truncated toward zero, for human-facing output only.
pub fn rat_to_decimal(r: &Rat, digits: usize) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (a.numer() * &scale) / a.denom();
    let (int, frac) = scaled.div_rem(&scale);
    let mut out = String::new();
    if neg && !scaled.is_zero() {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if digits > 0 {
        let f = frac.to_string();
        out.push('.');
        out.push_str(&"0".repeat(digits - f.len()));
        out.push_str(&f);
    }
    out
}

/// Rough `f64` view for logging and estimates; never used in a decision.
pub fn rat_to_f64(r: &Rat) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let nf = (n >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = (d >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    nf / df
}

/// Integer vector in `Z^dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVec(Vec<BigInt>);

impl IntVec {
    pub fn new(coords: Vec<BigInt>) -> Self {
        IntVec(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        IntVec(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        IntVec(vec![BigInt::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &IntVec) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> BigInt {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn scale(&self, c: &BigInt) -> IntVec {
        IntVec(self.0.iter().map(|a| a * c).collect())
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: &BigInt, other: &IntVec, b: &BigInt) -> IntVec {
        IntVec(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, a| g.gcd(a))
    }

    /// Max-norm of the coordinates.
    pub fn height(&self) -> BigInt {
        self.0.iter().map(|a| a.abs()).max().unwrap_or_default()
    }

    /// ‖self ∧ other‖² by the Lagrange identity.
    pub fn wedge_norm_sq(&self, other: &IntVec) -> BigInt {
        let d = self.dot(other);
        self.norm_sq() * other.norm_sq() - &d * &d
    }

    /// Positive integer multiple of a rational vector with all denominators cleared.
    pub fn from_rats(v: &[Rat]) -> IntVec {
        let l = v.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        IntVec(v.iter().map(|r| r.numer() * (&l / r.denom())).collect())
    }

    pub fn to_rats(&self) -> Vec<Rat> {
        self.0.iter().cloned().map(Rat::from_integer).collect()
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for IntVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|c| c.to_string()))
    }
}

impl<'de> Deserialize<'de> for IntVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| BigInt::from_str(s.trim()).map_err(|_| D::Error::custom(format!("not an integer: {s:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(IntVec)
    }
}

/// A point of `P^n(Q)` held as its canonical primitive integer representative:
/// coordinates with gcd 1 and first nonzero coordinate positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ProjPoint {
    rep: IntVec,
}

impl ProjPoint {
    pub fn rep(&self) -> &IntVec {
        &self.rep
    }

    pub fn into_rep(self) -> IntVec {
        self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn from_rats(v: &[Rat]) -> Result<ProjPoint> {
        primitive(&IntVec::from_rats(v))
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = IntVec::deserialize(d)?;
        let p = primitive(&v).map_err(D::Error::custom)?;
        if p.rep != v {
            return Err(D::Error::custom(format!("point {v} is not in canonical primitive form")));
        }
        Ok(p)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

/// Canonical representative of `[v]`.
pub fn primitive(v: &IntVec) -> Result<ProjPoint> {
    let g = v.content();
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    let lead_neg = v.0.iter().find(|c| !c.is_zero()).map(|c| c.is_negative()).unwrap_or(false);
    let g = if lead_neg { -g } else { g };
    Ok(ProjPoint { rep: IntVec(v.0.iter().map(|c| c / &g).collect()) })
}

fn check_dims(x: &IntVec, y: &IntVec) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok(())
}

/// Squared projective distance `‖x∧y‖² / (‖x‖²‖y‖²)`.
pub fn dist_sq(x: &IntVec, y: &IntVec) -> Result<Rat> {
    check_dims(x, y)?;
    let (nx, ny) = (x.norm_sq(), y.norm_sq());
    if nx.is_zero() || ny.is_zero() {
        return Err(Error::ZeroVector);
    }
    let d = x.dot(y);
    let den = &nx * &ny;
    Ok(Rat::new(&den - &d * &d, den))
}

/// True when `x` and `y` are nonzero and define the same projective point.
pub fn same_point(x: &IntVec, y: &IntVec) -> bool {
    x.dim() == y.dim() && !x.is_zero() && !y.is_zero() && x.wedge_norm_sq(y).is_zero()
}
