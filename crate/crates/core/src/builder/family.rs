//! Families of varieties the construction can run on, behind one interface:
//! a start point, membership certificates, and lines along which the
//! obstruction score strictly drops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{primitive, rank, IntVec, ProjPoint, Rat, Subspace};
use crate::multilinear::{self, KLine, KLinearMap, KLinearMapFile, OutsideSearchBudget, WitnessedPoint};
use crate::quadric::{line_in_quadric_through, QuadricFile, WittForm};

/// Serializable description of a family; enough to rebuild the adapter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilySpec {
    Grassmann { n: usize, k: usize },
    Prodforms { n: usize, k: usize },
    Klinear { map: KLinearMapFile },
    Quadric { form: QuadricFile },
}

/// A point of the family, with its witness tuple for k-linear families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub point: ProjPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<IntVec>>,
}

/// Evidence that `s_H` drops from `x_i` to `x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SCertificate {
    /// `β` lies outside `H` and shares `shared` slots with `x_i`; the
    /// companion lies outside `H` and shares `shared + 1` slots with `x_{i+1}`.
    Klinear {
        slot: usize,
        y: IntVec,
        beta: Vec<IntVec>,
        shared: usize,
        companion: Vec<IntVec>,
    },
    /// Exact scores before and after.
    Quadric { s_before: u8, s_after: u8 },
}

/// The line chosen at one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepLine {
    Klinear(KLine),
    Quadric { z: ProjPoint, s: u8 },
}

impl StepLine {
    /// Canonical representative of the second point of the line.
    pub fn z(&self) -> &IntVec {
        match self {
            StepLine::Klinear(l) => l.z.point.rep(),
            StepLine::Quadric { z, .. } => z.rep(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum FamilyAdapter {
    Klinear { spec: FamilySpec, map: KLinearMap, budget: OutsideSearchBudget },
    Quadric { spec: FamilySpec, form: WittForm },
}

/// Start witness for a user map: the first tuple of small vectors (basis
/// vectors first) with a nonzero image that moves along some slot.
fn start_witness(map: &KLinearMap) -> Result<Vec<IntVec>> {
    let (n, k) = (map.source_dim(), map.k());
    let pool = multilinear::candidates(n, 1, 0);
    let moves = |w: &[IntVec], image: &IntVec| {
        (0..k).any(|slot| {
            (0..n).any(|m| {
                let mut t = w.to_vec();
                t[slot] = IntVec::unit(n, m);
                map.evaluate_scaled(&t).is_ok_and(|v| !v.is_zero() && rank(&[image.clone(), v]).is_ok_and(|r| r == 2))
            })
        })
    };
    let mut first_nonzero = None;
    let mut tried = 0usize;
    let mut idx = vec![0usize; k];
    loop {
        let w: Vec<IntVec> = idx.iter().map(|&i| pool[i].clone()).collect();
        if let Ok(image) = map.evaluate_scaled(&w) {
            if !image.is_zero() {
                if moves(&w, &image) {
                    return Ok(w);
                }
                first_nonzero.get_or_insert(w);
            }
        }
        tried += 1;
        // odometer over pool^k, last slot fastest
        let mut p = k;
        loop {
            if p == 0 || tried >= START_SEARCH_LIMIT {
                return first_nonzero.ok_or(Error::ZeroVector);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < pool.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

const START_SEARCH_LIMIT: usize = 20_000;

impl FamilyAdapter {
    pub fn from_spec(spec: &FamilySpec, seed: u64) -> Result<FamilyAdapter> {
        let budget = OutsideSearchBudget { max_height: 1, seed };
        let map = match spec {
            FamilySpec::Grassmann { n, k } => KLinearMap::grassmann(*n, *k)?,
            FamilySpec::Prodforms { n, k } => KLinearMap::prodforms(*n, *k)?,
            FamilySpec::Klinear { map } => KLinearMap::from_file(map)?,
            FamilySpec::Quadric { form } => {
                return Ok(FamilyAdapter::Quadric { spec: spec.clone(), form: WittForm::from_file(form)? });
            }
        };
        Ok(FamilyAdapter::Klinear { spec: spec.clone(), map, budget })
    }

    pub fn split4() -> FamilyAdapter {
        let form = WittForm::split4();
        FamilyAdapter::Quadric { spec: FamilySpec::Quadric { form: form.to_file() }, form }
    }

    pub fn spec(&self) -> &FamilySpec {
        match self {
            FamilyAdapter::Klinear { spec, .. } | FamilyAdapter::Quadric { spec, .. } => spec,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            FamilyAdapter::Klinear { map, .. } => map.target_dim(),
            FamilyAdapter::Quadric { form, .. } => form.form.dim(),
        }
    }

    pub fn map(&self) -> Option<&KLinearMap> {
        match self {
            FamilyAdapter::Klinear { map, .. } => Some(map),
            FamilyAdapter::Quadric { .. } => None,
        }
    }

    pub fn form(&self) -> Option<&WittForm> {
        match self {
            FamilyAdapter::Quadric { form, .. } => Some(form),
            FamilyAdapter::Klinear { .. } => None,
        }
    }

    /// Grassmann `[e1∧…∧ek]`, products `[x1^k]`, other maps the first basis
    /// tuple with nonzero image, quadrics `[u1]`.
    pub fn default_start(&self) -> Result<Member> {
        match self {
            FamilyAdapter::Klinear { spec, map, .. } => {
                let n = map.source_dim();
                let k = map.k();
                let witness: Vec<IntVec> = match spec {
                    FamilySpec::Grassmann { .. } => (0..k).map(|i| IntVec::unit(n, i)).collect(),
                    FamilySpec::Prodforms { .. } => vec![IntVec::unit(n, 0); k],
                    _ => {
                        start_witness(map)?
                    }
                };
                self.member_from_witness(witness)
            }
            FamilyAdapter::Quadric { form, .. } => Ok(Member { point: primitive(&form.witness.u1)?, witness: None }),
        }
    }

    pub fn member_from_witness(&self, witness: Vec<IntVec>) -> Result<Member> {
        let map = self.map().ok_or_else(|| Error::InvalidParameters("quadric points carry no witness".into()))?;
        let wp = WitnessedPoint::new(map, witness)?;
        Ok(Member { point: wp.point, witness: Some(wp.witness) })
    }

    pub fn member_from_point(&self, v: &IntVec) -> Result<Member> {
        let form = self.form().ok_or_else(|| Error::InvalidParameters("k-linear start points need a witness".into()))?;
        let point = primitive(v)?;
        if !form.form.on_quadric(&point)? {
            return Err(Error::NotOnQuadric);
        }
        Ok(Member { point, witness: None })
    }

    /// Exact membership check.
    pub fn is_member(&self, m: &Member) -> bool {
        match (self, &m.witness) {
            (FamilyAdapter::Klinear { map, .. }, Some(w)) => {
                WitnessedPoint { point: m.point.clone(), witness: w.clone() }.is_sound(map)
            }
            (FamilyAdapter::Quadric { form, .. }, None) => form.form.on_quadric(&m.point).unwrap_or(false),
            _ => false,
        }
    }

    pub fn line(&self, x: &Member, h: &Subspace) -> Result<StepLine> {
        match self {
            FamilyAdapter::Klinear { map, budget, .. } => {
                let witness = x.witness.clone().ok_or_else(|| Error::MalformedTrace("k-linear point without witness".into()))?;
                let wp = WitnessedPoint { point: x.point.clone(), witness };
                let mut budget = *budget;
                loop {
                    match multilinear::line_step(map, &wp, h, budget) {
                        Err(Error::BudgetExhausted(_)) | Err(Error::DegenerateLine) if budget.max_height < 3 => {
                            budget.max_height += 1;
                        }
                        other => return other.map(StepLine::Klinear),
                    }
                }
            }
            FamilyAdapter::Quadric { form, .. } => {
                let s = form.form.s_h(h, &x.point)?;
                let z = line_in_quadric_through(&form.form, &form.witness, &x.point, h, s)?;
                Ok(StepLine::Quadric { z, s })
            }
        }
    }

    /// The member `[a·x + b·z]` on `line` with its s-decrease certificate
    /// relative to `h`, or `None` when this particular point carries no
    /// valid certificate.
    pub fn realize(&self, x: &Member, line: &StepLine, h: &Subspace, a: &Rat, b: &Rat) -> Result<Option<(Member, SCertificate)>> {
        match (self, line) {
            (FamilyAdapter::Klinear { map, .. }, StepLine::Klinear(kl)) => {
                let wp = multilinear::line_point(map, kl, a, b)?;
                let Some(comp) = multilinear::companion(map, kl, &wp.witness[kl.slot]) else {
                    return Ok(None);
                };
                if h.contains(comp.point.rep()) {
                    return Ok(None);
                }
                let cert = SCertificate::Klinear {
                    slot: kl.slot,
                    y: kl.y.clone(),
                    beta: kl.beta.clone(),
                    shared: kl.shared,
                    companion: comp.witness,
                };
                Ok(Some((Member { point: wp.point, witness: Some(wp.witness) }, cert)))
            }
            (FamilyAdapter::Quadric { form, .. }, StepLine::Quadric { z, s }) => {
                let v = IntVec::from_rats(&combine_rat(x.point.rep(), a, z.rep(), b));
                let point = primitive(&v)?;
                let after = form.form.s_h(h, &point)?;
                if after >= *s {
                    return Ok(None);
                }
                Ok(Some((Member { point, witness: None }, SCertificate::Quadric { s_before: *s, s_after: after })))
            }
            _ => Err(Error::InvalidParameters("line does not belong to this family".into())),
        }
    }
}

fn combine_rat(x: &IntVec, a: &Rat, z: &IntVec, b: &Rat) -> Vec<Rat> {
    x.coords()
        .iter()
        .zip(z.coords())
        .map(|(xc, zc)| a * Rat::from_integer(xc.clone()) + b * Rat::from_integer(zc.clone()))
        .collect()
}
