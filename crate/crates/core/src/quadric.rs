//! Quadratic forms over `Q` with a certified pair of orthogonal hyperbolic
//! planes, the three-valued score `s_H`, and totally isotropic lines.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{format_rat, parse_rat, primitive, IntVec, ProjPoint, Rat, Subspace};
use crate::multilinear::candidates;

/// `q(x) = xᵀAx` with `A` symmetric; `A = gram / scale` with `gram` integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    gram: Vec<Vec<BigInt>>,
    scale: BigInt,
}

impl QuadraticForm {
    pub fn new(gram: &[Vec<Rat>]) -> Result<QuadraticForm> {
        let n = gram.len();
        if n < 2 {
            return Err(Error::InvalidParameters("quadratic form needs dimension at least 2".into()));
        }
        for row in gram {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidParameters(format!("gram matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        if gram.iter().flatten().all(Zero::is_zero) {
            return Err(Error::InvalidParameters("quadratic form is identically zero".into()));
        }
        let scale = gram.iter().flatten().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let gram = gram
            .iter()
            .map(|row| row.iter().map(|r| r.numer() * (&scale / r.denom())).collect())
            .collect();
        Ok(QuadraticForm { gram, scale })
    }

    /// `x0·x1 + x2·x3` on `Q^4`.
    pub fn split4() -> QuadraticForm {
        let h = Rat::new(BigInt::one(), BigInt::from(2));
        let z = Rat::zero();
        let g = vec![
            vec![z.clone(), h.clone(), z.clone(), z.clone()],
            vec![h.clone(), z.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), z.clone(), h.clone()],
            vec![z.clone(), z.clone(), h, z],
        ];
        QuadraticForm::new(&g).expect("split form is valid")
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> Vec<Vec<Rat>> {
        self.gram.iter().map(|row| row.iter().map(|g| Rat::new(g.clone(), self.scale.clone())).collect()).collect()
    }

    fn check(&self, x: &IntVec) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        Ok(())
    }

    /// `scale · A·x`, the functional `y ↦ scale · b(x, y)`.
    pub fn functional(&self, x: &IntVec) -> Result<IntVec> {
        self.check(x)?;
        Ok(IntVec::new(self.gram.iter().map(|row| row.iter().zip(x.coords()).map(|(g, c)| g * c).sum()).collect()))
    }

    /// `scale · b(x, y)`: same sign and zero set as `b`.
    pub fn bilinear_scaled(&self, x: &IntVec, y: &IntVec) -> Result<BigInt> {
        self.check(y)?;
        Ok(self.functional(x)?.dot(y))
    }

    pub fn bilinear(&self, x: &IntVec, y: &IntVec) -> Result<Rat> {
        Ok(Rat::new(self.bilinear_scaled(x, y)?, self.scale.clone()))
    }

    pub fn q_scaled(&self, x: &IntVec) -> Result<BigInt> {
        self.bilinear_scaled(x, x)
    }

    pub fn q(&self, x: &IntVec) -> Result<Rat> {
        self.bilinear(x, x)
    }

    pub fn on_quadric(&self, p: &ProjPoint) -> Result<bool> {
        Ok(self.q_scaled(p.rep())?.is_zero())
    }

    /// `⟨p⟩⊥ = {x : b(p, x) = 0}`.
    pub fn orth_complement(&self, p: &ProjPoint) -> Result<Subspace> {
        let f = self.functional(p.rep())?;
        if f.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        Subspace::kernel(&f)
    }

    /// The score `s_H(α)`: 0 if `α ∉ H`, 2 if `⟨α⟩⊥ = H`, 1 otherwise.
    pub fn s_h(&self, h: &Subspace, alpha: &ProjPoint) -> Result<u8> {
        if !self.on_quadric(alpha)? {
            return Err(Error::NotOnQuadric);
        }
        if h.ambient_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: h.ambient_dim() });
        }
        if !h.contains(alpha.rep()) {
            return Ok(0);
        }
        Ok(if self.orth_complement(alpha)? == *h { 2 } else { 1 })
    }
}

/// Two orthogonal hyperbolic planes `(u1, v1)` and `(u2, v2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicWitness {
    pub u1: IntVec,
    pub v1: IntVec,
    pub u2: IntVec,
    pub v2: IntVec,
}

impl HyperbolicWitness {
    pub fn standard4() -> HyperbolicWitness {
        HyperbolicWitness { u1: IntVec::unit(4, 0), v1: IntVec::unit(4, 1), u2: IntVec::unit(4, 2), v2: IntVec::unit(4, 3) }
    }

    fn vectors(&self) -> [&IntVec; 4] {
        [&self.u1, &self.v1, &self.u2, &self.v2]
    }

    /// The four totally isotropic planes spanned by one vector of each pair.
    fn isotropic_planes(&self) -> [(&IntVec, &IntVec); 4] {
        [(&self.u1, &self.u2), (&self.u1, &self.v2), (&self.v1, &self.u2), (&self.v1, &self.v2)]
    }
}

pub fn validate_witness(form: &QuadraticForm, w: &HyperbolicWitness) -> Result<bool> {
    let b = |x: &IntVec, y: &IntVec| form.bilinear_scaled(x, y);
    for v in w.vectors() {
        if !b(v, v)?.is_zero() {
            return Ok(false);
        }
    }
    let cross = [(&w.u1, &w.u2), (&w.u1, &w.v2), (&w.v1, &w.u2), (&w.v1, &w.v2)];
    for (x, y) in cross {
        if !b(x, y)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(!b(&w.u1, &w.v1)?.is_zero() && !b(&w.u2, &w.v2)?.is_zero())
}

/// Isotropic vectors orthogonal to `alpha` taken from the witness planes:
/// `b(α,p2)·p1 − b(α,p1)·p2` for each totally isotropic plane `(p1, p2)`,
/// skipping zero results and multiples of `alpha`.
pub fn witness_seeds(form: &QuadraticForm, w: &HyperbolicWitness, alpha: &IntVec) -> Result<Vec<IntVec>> {
    let mut out: Vec<IntVec> = Vec::new();
    for (p1, p2) in w.isotropic_planes() {
        let v = p1.combine(&form.bilinear_scaled(alpha, p2)?, p2, &-form.bilinear_scaled(alpha, p1)?);
        if v.is_zero() || v.wedge_norm_sq(alpha).is_zero() {
            continue;
        }
        let v = primitive(&v)?.into_rep();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

fn combine_basis(basis: &[IntVec], coeffs: &IntVec, dim: usize) -> IntVec {
    let mut v = IntVec::zeros(dim);
    for (b, c) in basis.iter().zip(coeffs.coords()) {
        if !c.is_zero() {
            v = v.combine(&BigInt::one(), b, c);
        }
    }
    v
}

/// First isotropic point of `S` outside `H`, enumerating primitive
/// coefficient vectors over the canonical basis of `S` up to `height`.
pub fn isotropic_in_subspace_outside(form: &QuadraticForm, s: &Subspace, h: &Subspace, height: u32) -> Result<ProjPoint> {
    isotropic_search(form, s, h, height, &[])
}

/// As [`isotropic_in_subspace_outside`], but tries the isotropic `seeds`
/// lying in `S` first, and turns every anisotropic enumerated `v` into the
/// isotropic vector `q(v)·e − 2b(e,v)·v` for each seed `e`.
pub fn isotropic_search(form: &QuadraticForm, s: &Subspace, h: &Subspace, height: u32, seeds: &[IntVec]) -> Result<ProjPoint> {
    if s.ambient_dim() != form.dim() || h.ambient_dim() != form.dim() {
        return Err(Error::DimensionMismatch { expected: form.dim(), found: s.ambient_dim().min(h.ambient_dim()) });
    }
    if h.contains_subspace(s) {
        return Err(Error::PreconditionViolated("S is contained in H".into()));
    }
    let seeds: Vec<&IntVec> = seeds.iter().filter(|e| s.contains(e) && !e.is_zero()).collect();
    let ok = |v: &IntVec| -> Result<bool> { Ok(!v.is_zero() && !h.contains(v) && form.q_scaled(v)?.is_zero()) };
    for e in &seeds {
        if ok(e)? {
            return primitive(e);
        }
    }
    for c in candidates(s.rank(), height, 0) {
        let v = combine_basis(s.basis(), &c, form.dim());
        let qv = form.q_scaled(&v)?;
        if qv.is_zero() {
            if !h.contains(&v) {
                return primitive(&v);
            }
            continue;
        }
        for e in &seeds {
            let u = e.combine(&qv, &v, &(-2 * form.bilinear_scaled(e, &v)?));
            if ok(&u)? {
                return primitive(&u);
            }
        }
    }
    Err(Error::HeightExhausted { height })
}

/// Default cap on the coefficient height used by [`line_in_quadric_through`].
pub const MAX_SEARCH_HEIGHT: u32 = 8;

/// A totally isotropic rational line through `alpha` along which `s_H`
/// strictly drops. Returns the second point `z`.
pub fn line_in_quadric_through(
    form: &QuadraticForm,
    witness: &HyperbolicWitness,
    alpha: &ProjPoint,
    h: &Subspace,
    s: u8,
) -> Result<ProjPoint> {
    if s == 0 || s > 2 {
        return Err(Error::PreconditionViolated(format!("line construction needs s in {{1, 2}}, got {s}")));
    }
    if !form.on_quadric(alpha)? {
        return Err(Error::NotOnQuadric);
    }
    if !h.contains(alpha.rep()) {
        return Err(Error::PreconditionViolated("alpha is not in H".into()));
    }
    let a = alpha.rep();
    let perp = form.orth_complement(alpha)?;
    let fa = form.functional(a)?;
    let seeds = witness_seeds(form, witness, a)?;
    if s == 2 {
        // any isotropic z ⊥ α with ⟨z⟩⊥ ≠ ⟨α⟩⊥; prefer the smallest line height
        let good = |z: &IntVec| -> Result<bool> {
            let fz = form.functional(z)?;
            Ok(!fz.is_zero() && !fz.wedge_norm_sq(&fa).is_zero())
        };
        let mut best: Option<IntVec> = None;
        for z in &seeds {
            if good(z)? && best.as_ref().is_none_or(|b| a.wedge_norm_sq(z) < a.wedge_norm_sq(b)) {
                best = Some(z.clone());
            }
        }
        if let Some(z) = best {
            return primitive(&z);
        }
        // fall back to any isotropic direction of α⊥ off the radical-extended line
        let avoid = Subspace::span(form.dim(), std::slice::from_ref(a))?;
        for height in 1..=MAX_SEARCH_HEIGHT {
            match isotropic_search(form, &perp, &avoid, height, &seeds) {
                Ok(z) if good(z.rep())? => return Ok(z),
                Ok(_) | Err(Error::HeightExhausted { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        return Err(Error::HeightExhausted { height: MAX_SEARCH_HEIGHT });
    }
    let mut all_seeds = seeds;
    for v in witness.vectors() {
        if perp.contains(v) && !v.wedge_norm_sq(a).is_zero() {
            all_seeds.push(v.clone());
        }
    }
    let mut last = Error::HeightExhausted { height: 1 };
    for height in 1..=MAX_SEARCH_HEIGHT {
        match isotropic_search(form, &perp, h, height, &all_seeds) {
            Ok(z) => return Ok(z),
            Err(e @ Error::HeightExhausted { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// JSON layout of a user-supplied form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadricFile {
    pub dim: usize,
    pub gram: Vec<Vec<String>>,
    pub witness: WitnessFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub u1: Vec<String>,
    pub v1: Vec<String>,
    pub u2: Vec<String>,
    pub v2: Vec<String>,
}

/// A form together with its validated witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittForm {
    pub form: QuadraticForm,
    pub witness: HyperbolicWitness,
}

impl WittForm {
    pub fn new(form: QuadraticForm, witness: HyperbolicWitness) -> Result<WittForm> {
        if !validate_witness(&form, &witness)? {
            return Err(Error::InvalidParameters("witness is not a pair of orthogonal hyperbolic planes".into()));
        }
        Ok(WittForm { form, witness })
    }

    pub fn split4() -> WittForm {
        WittForm::new(QuadraticForm::split4(), HyperbolicWitness::standard4()).expect("standard witness is valid")
    }

    pub fn from_file(f: &QuadricFile) -> Result<WittForm> {
        if f.gram.len() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, found: f.gram.len() });
        }
        let gram = f.gram.iter().map(|row| row.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        let form = QuadraticForm::new(&gram)?;
        let vec = |v: &[String]| -> Result<IntVec> {
            let r = v.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?;
            Ok(IntVec::from_rats(&r))
        };
        let w = &f.witness;
        let witness = HyperbolicWitness { u1: vec(&w.u1)?, v1: vec(&w.v1)?, u2: vec(&w.u2)?, v2: vec(&w.v2)? };
        WittForm::new(form, witness)
    }

    pub fn to_file(&self) -> QuadricFile {
        let s = |v: &IntVec| v.coords().iter().map(|c| c.to_string()).collect();
        let w = &self.witness;
        QuadricFile {
            dim: self.form.dim(),
            gram: self.form.gram().iter().map(|row| row.iter().map(format_rat).collect()).collect(),
            witness: WitnessFile { u1: s(&w.u1), v1: s(&w.v1), u2: s(&w.u2), v2: s(&w.v2) },
        }
    }
}
