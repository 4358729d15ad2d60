//! Regions and state separation.
//!
//! A region `(R, B, F)` is fixed, up to the value at the initial state, by its
//! effect vector `F - B`. Effects compatible with the LTS are exactly the
//! integer vectors orthogonal to the cycle base, so separation questions turn
//! into null-space computations.

use std::collections::HashMap;

use num::Zero;
use thiserror::Error;

use crate::linalg::{in_span, RatMatrix, RatVector};
use crate::lts::{CycleBase, Lts, LtsError, SpanningTree};

/// Integer effect per label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EffectVector(pub Vec<i64>);

impl EffectVector {
    pub fn to_rational(&self) -> RatVector {
        RatVector::from_ints(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

/// A region: token count per state, consumption and production per label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub r: Vec<u64>,
    pub b: Vec<u64>,
    pub f: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegionViolation {
    #[error("edge {edge}: R(source) = {value} is below B(label) = {needed}")]
    Underflow {
        edge: usize,
        value: u64,
        needed: u64,
    },
    #[error("edge {edge}: R(target) does not equal R(source) - B + F")]
    WrongTarget { edge: usize },
    #[error("region dimensions do not match the LTS")]
    Shape,
}

impl Region {
    pub fn effect(&self) -> EffectVector {
        EffectVector(
            self.f
                .iter()
                .zip(&self.b)
                .map(|(&f, &b)| f as i64 - b as i64)
                .collect(),
        )
    }

    /// Checks both defining conditions on every edge.
    pub fn check(&self, lts: &Lts) -> Result<(), RegionViolation> {
        if self.r.len() != lts.num_states()
            || self.b.len() != lts.num_labels()
            || self.f.len() != lts.num_labels()
        {
            return Err(RegionViolation::Shape);
        }
        for (i, e) in lts.edges().iter().enumerate() {
            let (value, needed) = (self.r[e.source], self.b[e.label]);
            if value < needed {
                return Err(RegionViolation::Underflow {
                    edge: i,
                    value,
                    needed,
                });
            }
            if self.r[e.target] != value - needed + self.f[e.label] {
                return Err(RegionViolation::WrongTarget { edge: i });
            }
        }
        Ok(())
    }

    pub fn separates(&self, s: usize, t: usize) -> bool {
        self.r[s] != self.r[t]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("a state separation problem needs two distinct states, got {0} twice")]
    SameState(usize),
    #[error("effect vector has {actual} entries, expected {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("effect vector is inconsistent with the cycle through chord {chord}")]
    CycleInconsistent { chord: usize },
    #[error("not embeddable: states {0} and {1} cannot be separated")]
    NotEmbeddable(String, String),
    #[error(transparent)]
    Lts(#[from] LtsError),
}

/// Outcome of the embeddability decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddabilityReport {
    /// Pairwise distinct signatures, one per state.
    Embeddable { signatures: Vec<RatVector> },
    /// The first colliding pair in state order.
    NotEmbeddable { pair: (usize, usize) },
}

impl EmbeddabilityReport {
    pub fn is_embeddable(&self) -> bool {
        matches!(self, EmbeddabilityReport::Embeddable { .. })
    }
}

/// Spanning tree, cycle base and integer effect basis of one LTS, computed
/// once and shared by all region queries.
#[derive(Clone, Debug)]
pub struct RegionSystem<'a> {
    lts: &'a Lts,
    tree: SpanningTree,
    cycles: CycleBase,
    effects: Vec<EffectVector>,
}

impl<'a> RegionSystem<'a> {
    /// Requires a valid (deterministic, reachable) LTS.
    pub fn new(lts: &'a Lts) -> Self {
        let tree = SpanningTree::new(lts);
        let cycles = CycleBase::new(lts, &tree);
        let effects = cycles
            .basis
            .nullspace_basis()
            .iter()
            .map(|v| {
                EffectVector(
                    v.to_primitive_integers()
                        .iter()
                        .map(|x| i64::try_from(x).expect("effect coefficient exceeds i64"))
                        .collect(),
                )
            })
            .collect();
        RegionSystem {
            lts,
            tree,
            cycles,
            effects,
        }
    }

    pub fn lts(&self) -> &Lts {
        self.lts
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn cycle_base(&self) -> &CycleBase {
        &self.cycles
    }

    /// Integer basis of all effect vectors admitted by the LTS.
    pub fn effect_space(&self) -> &[EffectVector] {
        &self.effects
    }

    /// Dot products of the state's Parikh vector with each effect basis
    /// vector; equal to `R(s) - R(s0)` for the corresponding regions.
    pub fn state_signature(&self, s: usize) -> Result<RatVector, LtsError> {
        let p = self.tree.state_parikh(s)?;
        Ok(RatVector::from_ints(
            &self.effects.iter().map(|e| p.dot(&e.0)).collect::<Vec<_>>(),
        ))
    }

    /// Some effect separating `s` and `t`, or `None` when every region gives
    /// them the same value.
    pub fn ssp_solvable(&self, s: usize, t: usize) -> Result<Option<EffectVector>, RegionError> {
        if s == t {
            return Err(RegionError::SameState(s));
        }
        let diff = self.tree.state_parikh(s)? - self.tree.state_parikh(t)?;
        Ok(self.effects.iter().find(|e| diff.dot(&e.0) != 0).cloned())
    }

    /// Cross-check route for a single pair: the Parikh difference lies in the
    /// cycle span iff no region separates the pair.
    pub fn parikh_difference_in_cycle_span(&self, s: usize, t: usize) -> Result<bool, LtsError> {
        let diff = self.tree.state_parikh(s)? - self.tree.state_parikh(t)?;
        Ok(in_span(&self.cycles.basis, &diff.to_rational()).expect("label dimension"))
    }

    pub fn is_embeddable(&self) -> EmbeddabilityReport {
        let mut seen: HashMap<RatVector, usize> = HashMap::new();
        let mut signatures = Vec::with_capacity(self.lts.num_states());
        for s in 0..self.lts.num_states() {
            let sig = self.state_signature(s).expect("state in range");
            if let Some(&first) = seen.get(&sig) {
                return EmbeddabilityReport::NotEmbeddable { pair: (first, s) };
            }
            seen.insert(sig.clone(), s);
            signatures.push(sig);
        }
        EmbeddabilityReport::Embeddable { signatures }
    }

    /// Shifts the effect so every state value is nonnegative and splits it
    /// into consumption and production.
    pub fn region_from_effect(&self, e: &EffectVector) -> Result<Region, RegionError> {
        if e.0.len() != self.lts.num_labels() {
            return Err(RegionError::Dimension {
                expected: self.lts.num_labels(),
                actual: e.0.len(),
            });
        }
        for chord in self.tree.chords(self.lts) {
            if self.tree.edge_parikh(self.lts, chord)?.dot(&e.0) != 0 {
                return Err(RegionError::CycleInconsistent { chord });
            }
        }
        let offsets: Vec<i64> = (0..self.lts.num_states())
            .map(|s| self.tree.state_parikh(s).map(|p| p.dot(&e.0)))
            .collect::<Result<_, _>>()?;
        let base = offsets.iter().map(|&o| -o).max().unwrap_or(0).max(0);
        let r = offsets.iter().map(|&o| (base + o) as u64).collect();
        let b: Vec<u64> = e.0.iter().map(|&x| (-x).max(0) as u64).collect();
        let f =
            e.0.iter()
                .zip(&b)
                .map(|(&x, &b)| (x + b as i64) as u64)
                .collect();
        Ok(Region { r, b, f })
    }

    /// One region per effect basis vector; together they separate every
    /// pair of states.
    pub fn separating_regions(&self) -> Result<Vec<Region>, RegionError> {
        if let EmbeddabilityReport::NotEmbeddable { pair: (s, t) } = self.is_embeddable() {
            return Err(RegionError::NotEmbeddable(
                self.lts.state_name(s).to_string(),
                self.lts.state_name(t).to_string(),
            ));
        }
        self.effects
            .iter()
            .map(|e| self.region_from_effect(e))
            .collect()
    }
}

pub fn effect_space(lts: &Lts) -> Vec<EffectVector> {
    RegionSystem::new(lts).effects
}

pub fn state_signature(lts: &Lts, basis: &[EffectVector], s: usize) -> Result<RatVector, LtsError> {
    let tree = SpanningTree::new(lts);
    let p = tree.state_parikh(s)?;
    Ok(RatVector::from_ints(
        &basis.iter().map(|e| p.dot(&e.0)).collect::<Vec<_>>(),
    ))
}

pub fn ssp_solvable(lts: &Lts, s: usize, t: usize) -> Result<Option<EffectVector>, RegionError> {
    RegionSystem::new(lts).ssp_solvable(s, t)
}

pub fn is_embeddable(lts: &Lts) -> EmbeddabilityReport {
    RegionSystem::new(lts).is_embeddable()
}

pub fn region_from_effect(lts: &Lts, e: &EffectVector) -> Result<Region, RegionError> {
    RegionSystem::new(lts).region_from_effect(e)
}

pub fn separating_regions(lts: &Lts) -> Result<Vec<Region>, RegionError> {
    RegionSystem::new(lts).separating_regions()
}

/// Basis matrix of an effect list, for span checks in tests and callers.
pub fn effect_matrix(labels: usize, effects: &[EffectVector]) -> RatMatrix {
    let rows: Vec<RatVector> = effects.iter().map(EffectVector::to_rational).collect();
    RatMatrix::from_rows(labels, &rows).expect("effect dimension")
}

/// True iff `e` is an admissible effect, i.e. lies in the span of `effects`.
pub fn effect_in_space(labels: usize, effects: &[EffectVector], e: &EffectVector) -> bool {
    if e.0.len() != labels {
        return false;
    }
    if effects.is_empty() {
        return e.to_rational().0.iter().all(Zero::is_zero);
    }
    in_span(&effect_matrix(labels, effects), &e.to_rational()).expect("effect dimension")
}
