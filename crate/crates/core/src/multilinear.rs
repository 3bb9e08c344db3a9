//! k-linear maps `(Q^n)^k -> Q^D`, witnessed points in their image, and the
//! line construction that lowers the witness-level obstruction `k - m`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{binomial, format_rat, parse_rat, primitive, rank, IntVec, ProjPoint, Rat, Subspace};

/// A k-linear map given by the images of all k-tuples of source basis vectors.
///
/// Images are kept as integer vectors over a common positive denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KLinearMap {
    k: usize,
    n: usize,
    target_dim: usize,
    images: Vec<IntVec>,
    denom: BigInt,
}

impl KLinearMap {
    /// `images[t]` is the image of the basis tuple whose base-`n` digits are `t`.
    pub fn new(k: usize, n: usize, target_dim: usize, images: Vec<Vec<Rat>>) -> Result<KLinearMap> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidParameters(format!("k = {k} and n = {n} must be positive")));
        }
        if target_dim < 3 {
            return Err(Error::InvalidParameters(format!("target dimension {target_dim} must be at least 3")));
        }
        let count = n.checked_pow(k as u32).ok_or_else(|| Error::InvalidParameters("n^k overflows".into()))?;
        if images.len() != count {
            return Err(Error::InvalidParameters(format!("expected {count} basis images, got {}", images.len())));
        }
        for im in &images {
            if im.len() != target_dim {
                return Err(Error::DimensionMismatch { expected: target_dim, found: im.len() });
            }
        }
        let denom = images.iter().flatten().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let images: Vec<IntVec> = images
            .iter()
            .map(|im| IntVec::new(im.iter().map(|r| r.numer() * (&denom / r.denom())).collect()))
            .collect();
        if rank(&images)? != target_dim {
            return Err(Error::InvalidParameters("basis images do not span the target space".into()));
        }
        Ok(KLinearMap { k, n, target_dim, images, denom })
    }

    /// `x_1 ∧ … ∧ x_k` on `Q^n`, coordinates in lexicographic subset order.
    pub fn grassmann(n: usize, k: usize) -> Result<KLinearMap> {
        if !(1 <= k && k < n && n >= 3 && binomial(n, k) >= 3) {
            return Err(Error::InvalidParameters(format!("grassmann needs 1 <= k < n, n >= 3, C(n,k) >= 3; got n = {n}, k = {k}")));
        }
        let subs = crate::geometry::subsets(n, k);
        let d = subs.len();
        let images = tuples(n, k)
            .map(|t| {
                let mut im = vec![Rat::zero(); d];
                let mut sorted = t.clone();
                sorted.sort_unstable();
                if sorted.windows(2).all(|w| w[0] != w[1]) {
                    let pos = subs.binary_search(&sorted).expect("sorted subset is listed");
                    let inversions = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).filter(|&(a, b)| t[a] > t[b]).count();
                    im[pos] = if inversions % 2 == 0 { Rat::one() } else { -Rat::one() };
                }
                im
            })
            .collect();
        KLinearMap::new(k, n, d, images)
    }

    /// Products of `k` linear forms in `n` variables, as coefficient vectors
    /// over degree-`k` monomials in degree-lexicographic order (`x1 > … > xn`).
    pub fn prodforms(n: usize, k: usize) -> Result<KLinearMap> {
        if !(n >= 2 && k >= 1 && n + k >= 4) {
            return Err(Error::InvalidParameters(format!("prodforms needs n >= 2, k >= 1, n + k >= 4; got n = {n}, k = {k}")));
        }
        let monos = monomials(n, k);
        let d = monos.len();
        let images = tuples(n, k)
            .map(|t| {
                let mut e = vec![0usize; n];
                for &i in &t {
                    e[i] += 1;
                }
                let pos = monos.iter().position(|m| *m == e).expect("monomial is listed");
                let mut im = vec![Rat::zero(); d];
                im[pos] = Rat::one();
                im
            })
            .collect();
        KLinearMap::new(k, n, d, images)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn source_dim(&self) -> usize {
        self.n
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// Image of the basis tuple `index` as rationals.
    pub fn basis_image(&self, index: &[usize]) -> Vec<Rat> {
        let t = index.iter().fold(0, |acc, &i| acc * self.n + i);
        self.images[t].coords().iter().map(|c| Rat::new(c.clone(), self.denom.clone())).collect()
    }

    fn check_tuple_dims(&self, len: usize, dims: impl Iterator<Item = usize>) -> Result<()> {
        if len != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, found: len });
        }
        for d in dims {
            if d != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: d });
            }
        }
        Ok(())
    }

    /// `denom · φ(x_1, …, x_k)` for integer slots, an exact integer vector.
    pub fn evaluate_scaled(&self, tuple: &[IntVec]) -> Result<IntVec> {
        self.check_tuple_dims(tuple.len(), tuple.iter().map(IntVec::dim))?;
        let mut cur: Vec<IntVec> = self.images.clone();
        for x in tuple {
            let block = cur.len() / self.n;
            let mut next = vec![IntVec::zeros(self.target_dim); block];
            for (i, c) in x.coords().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (r, acc) in next.iter_mut().enumerate() {
                    *acc = acc.combine(&BigInt::one(), &cur[i * block + r], c);
                }
            }
            cur = next;
        }
        Ok(cur.pop().expect("full contraction leaves one vector"))
    }

    pub fn evaluate(&self, tuple: &[Vec<Rat>]) -> Result<Vec<Rat>> {
        self.check_tuple_dims(tuple.len(), tuple.iter().map(Vec::len))?;
        let ints: Vec<IntVec> = tuple.iter().map(|v| IntVec::from_rats(v)).collect();
        let mut den = self.denom.clone();
        for (v, int) in tuple.iter().zip(&ints) {
            // from_rats scales by the lcm of the denominators
            let l = v.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
            den *= l;
            debug_assert_eq!(int.dim(), self.n);
        }
        let out = self.evaluate_scaled(&ints)?;
        Ok(out.coords().iter().map(|c| Rat::new(c.clone(), den.clone())).collect())
    }

    pub fn to_file(&self) -> KLinearMapFile {
        let basis_images = tuples(self.n, self.k)
            .filter_map(|t| {
                let im = self.basis_image(&t);
                if im.iter().all(Zero::is_zero) {
                    None
                } else {
                    Some(BasisImage { index: t, image: im.iter().map(format_rat).collect() })
                }
            })
            .collect();
        KLinearMapFile { k: self.k, n: self.n, d: self.target_dim, basis_images }
    }

    pub fn from_file(f: &KLinearMapFile) -> Result<KLinearMap> {
        if f.k == 0 || f.n == 0 {
            return Err(Error::InvalidParameters("k and n must be positive".into()));
        }
        let count = f.n.checked_pow(f.k as u32).ok_or_else(|| Error::InvalidParameters("n^k overflows".into()))?;
        let mut images = vec![vec![Rat::zero(); f.d]; count];
        let mut seen = HashSet::new();
        for bi in &f.basis_images {
            if bi.index.len() != f.k || bi.index.iter().any(|&i| i >= f.n) {
                return Err(Error::Parse(format!("basis index {:?} is not a {}-tuple over 0..{}", bi.index, f.k, f.n)));
            }
            if !seen.insert(bi.index.clone()) {
                return Err(Error::Parse(format!("basis index {:?} listed twice", bi.index)));
            }
            if bi.image.len() != f.d {
                return Err(Error::DimensionMismatch { expected: f.d, found: bi.image.len() });
            }
            let t = bi.index.iter().fold(0, |acc, &i| acc * f.n + i);
            images[t] = bi.image.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
        }
        KLinearMap::new(f.k, f.n, f.d, images)
    }
}

/// JSON layout of a user-supplied map. Indices are 0-based; omitted tuples map to zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KLinearMapFile {
    pub k: usize,
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub basis_images: Vec<BasisImage>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisImage {
    pub index: Vec<usize>,
    pub image: Vec<String>,
}

/// All k-tuples over `0..n` in lexicographic order.
fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    Product::new(vec![n; k])
}

/// Exponent vectors of degree-`k` monomials, lexicographically descending.
fn monomials(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out
}

/// Odometer over `0..radix[0] × … × 0..radix[r-1]`, last position fastest.
struct Product {
    radix: Vec<usize>,
    cur: Option<Vec<usize>>,
}

impl Product {
    fn new(radix: Vec<usize>) -> Product {
        let cur = if radix.contains(&0) { None } else { Some(vec![0; radix.len()]) };
        Product { radix, cur }
    }
}

impl Iterator for Product {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let cur = self.cur.as_mut().expect("checked above");
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.radix[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// A point of the image together with a witness tuple. Witness slots are
/// stored as primitive integer vectors with canonical sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessedPoint {
    pub point: ProjPoint,
    pub witness: Vec<IntVec>,
}

impl WitnessedPoint {
    pub fn new(map: &KLinearMap, witness: Vec<IntVec>) -> Result<WitnessedPoint> {
        let witness = witness.iter().map(|w| primitive(w).map(ProjPoint::into_rep)).collect::<Result<Vec<_>>>()?;
        let point = primitive(&map.evaluate_scaled(&witness)?)?;
        Ok(WitnessedPoint { point, witness })
    }

    /// Exact witness soundness: the witness evaluates to a nonzero multiple of `point`.
    pub fn is_sound(&self, map: &KLinearMap) -> bool {
        map.evaluate_scaled(&self.witness)
            .ok()
            .and_then(|v| primitive(&v).ok())
            .is_some_and(|p| p == self.point)
    }
}

pub fn shared_count(w1: &[IntVec], w2: &[IntVec]) -> usize {
    w1.iter().zip(w2).filter(|(a, b)| a == b).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutsideSearchBudget {
    pub max_height: u32,
    /// Zero keeps the canonical candidate order; anything else shuffles
    /// candidates within each height shell.
    pub seed: u64,
}

impl Default for OutsideSearchBudget {
    fn default() -> Self {
        OutsideSearchBudget { max_height: 1, seed: 0 }
    }
}

/// Primitive canonical-sign vectors of `Z^n` with max-norm at most
/// `max_height`: by height, then support size, then descending lexicographic
/// order, so `e1, e2, …` come first.
pub fn candidates(n: usize, max_height: u32, seed: u64) -> Vec<IntVec> {
    let mut out = Vec::new();
    for h in 1..=max_height as i64 {
        let mut shell: Vec<Vec<i64>> = Product::new(vec![(2 * h + 1) as usize; n])
            .map(|t| t.iter().map(|&c| c as i64 - h).collect::<Vec<i64>>())
            .filter(|v| {
                let first = v.iter().find(|&&c| c != 0);
                v.iter().map(|c| c.abs()).max() == Some(h)
                    && first.is_some_and(|&c| c > 0)
                    && v.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1
            })
            .collect();
        shell.sort_by(|a, b| {
            let sa = a.iter().filter(|&&c| c != 0).count();
            let sb = b.iter().filter(|&&c| c != 0).count();
            sa.cmp(&sb).then_with(|| b.cmp(a))
        });
        if seed != 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (h as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            shell.shuffle(&mut rng);
        }
        out.extend(shell.iter().map(|v| IntVec::from_i64s(v)));
    }
    out
}

/// Points of the image outside `h`, in search order: decreasing number of
/// slots shared with `anchor`, then replaced-slot subsets in lexicographic
/// order, then candidate tuples with the last replaced slot varying fastest.
/// Each item carries its shared count with the anchor.
pub fn outside_points<'a>(
    map: &'a KLinearMap,
    h: &'a Subspace,
    anchor: &'a WitnessedPoint,
    budget: OutsideSearchBudget,
) -> impl Iterator<Item = (WitnessedPoint, usize)> + 'a {
    let k = map.k();
    let cands = candidates(map.source_dim(), budget.max_height, budget.seed);
    (0..=k).rev().flat_map(move |m| {
        let cands = cands.clone();
        crate::geometry::subsets(k, k - m).into_iter().flat_map(move |slots| {
            let per_slot: Vec<Vec<IntVec>> = slots
                .iter()
                .map(|&s| cands.iter().filter(|c| **c != anchor.witness[s]).cloned().collect())
                .collect();
            let radix = per_slot.iter().map(Vec::len).collect();
            Product::new(radix).filter_map(move |pick| {
                let mut w = anchor.witness.clone();
                for ((&s, list), &p) in slots.iter().zip(&per_slot).zip(&pick) {
                    w[s] = list[p].clone();
                }
                let wp = WitnessedPoint::new(map, w).ok()?;
                if h.contains(wp.point.rep()) {
                    None
                } else {
                    Some((wp, m))
                }
            })
        })
    })
}

/// A point of the image outside `h` sharing as many witness slots with
/// `anchor` as the budget allows.
pub fn find_outside(
    map: &KLinearMap,
    h: &Subspace,
    anchor: &WitnessedPoint,
    budget: OutsideSearchBudget,
) -> Result<(WitnessedPoint, usize)> {
    if !h.is_proper() {
        return Err(Error::PreconditionViolated("subspace is not proper".into()));
    }
    outside_points(map, h, anchor, budget)
        .next()
        .ok_or_else(|| Error::BudgetExhausted(format!("no image point outside H up to height {}", budget.max_height)))
}

/// The line through `x` produced by one application of the slot-replacement
/// argument, with everything needed to certify each of its points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KLine {
    /// Witness of `x`.
    pub anchor: Vec<IntVec>,
    /// Replaced slot `j`.
    pub slot: usize,
    /// Slot `j` of the outside point `β`.
    pub y: IntVec,
    /// Witness of `β`, a point outside `H`.
    pub beta: Vec<IntVec>,
    /// Slots shared by the anchor and `β`.
    pub shared: usize,
    /// `α′`: the anchor with slot `j` replaced by `y`.
    pub z: WitnessedPoint,
}

/// Line witness for `A·x + B·z`, where `x` and `z` are the canonical
/// representatives of the anchor point and `α′`: the anchor witness with
/// slot `j` replaced by `μ·x_j + ν·y`.
pub fn line_slot(map: &KLinearMap, line: &KLine, a: &Rat, b: &Rat) -> Result<IntVec> {
    let gx = signed_content(&map.evaluate_scaled(&line.anchor)?)?;
    let gz = signed_content(&map.evaluate_scaled(&line.z.witness)?)?;
    // φ(anchor) = gx/den · x and φ(α′) = gz/den · z, so μ = A/gx, ν = B/gz up to scale.
    let mu = a * Rat::from_integer(gz);
    let nu = b * Rat::from_integer(gx);
    let ints = IntVec::from_rats(&[mu, nu]);
    let (mu, nu) = (&ints.coords()[0], &ints.coords()[1]);
    Ok(line.anchor[line.slot].combine(mu, &line.y, nu))
}

fn signed_content(v: &IntVec) -> Result<BigInt> {
    let g = v.content();
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    let neg = v.coords().iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    Ok(if neg { -g } else { g })
}

/// Witnessed point `[A·x + B·z]` on the line.
pub fn line_point(map: &KLinearMap, line: &KLine, a: &Rat, b: &Rat) -> Result<WitnessedPoint> {
    let slot = line_slot(map, line, a, b)?;
    let mut w = line.anchor.clone();
    w[line.slot] = slot;
    WitnessedPoint::new(map, w)
}

/// Companion of a line point: `β` with slot `j` replaced by the line point's
/// slot `j`. It shares `shared + 1` slots with the line point. `None` when its
/// image vanishes.
pub fn companion(map: &KLinearMap, line: &KLine, slot_value: &IntVec) -> Option<WitnessedPoint> {
    let mut w = line.beta.clone();
    w[line.slot] = slot_value.clone();
    WitnessedPoint::new(map, w).ok()
}

/// One line step from `x ∈ H`: picks the outside point `β` sharing the most
/// slots with `x`, replaces the first differing slot, and moves on to the next
/// slot or candidate when `α′` is zero or proportional to `x`.
pub fn line_step(map: &KLinearMap, x: &WitnessedPoint, h: &Subspace, budget: OutsideSearchBudget) -> Result<KLine> {
    if !h.contains(x.point.rep()) {
        return Err(Error::PreconditionViolated("line_step needs a point inside H".into()));
    }
    if !h.is_proper() {
        return Err(Error::PreconditionViolated("subspace is not proper".into()));
    }
    let mut any = false;
    for (beta, shared) in outside_points(map, h, x, budget) {
        any = true;
        for slot in (0..map.k()).filter(|&j| beta.witness[j] != x.witness[j]) {
            let mut w = x.witness.clone();
            w[slot] = beta.witness[slot].clone();
            let Ok(z) = WitnessedPoint::new(map, w) else {
                continue;
            };
            if z.point == x.point {
                continue;
            }
            return Ok(KLine {
                anchor: x.witness.clone(),
                slot,
                y: beta.witness[slot].clone(),
                beta: beta.witness.clone(),
                shared,
                z,
            });
        }
    }
    if any {
        Err(Error::DegenerateLine)
    } else {
        Err(Error::BudgetExhausted(format!("no image point outside H up to height {}", budget.max_height)))
    }
}
