//! Z-covers defined by relative cycles: recurrence, cylinder lifts, the
//! crossing cocycle and strip certificates.
//!
//! The cover `M_w` has sheets indexed by the integers; a path moves from
//! sheet `n` to sheet `n + i(w, path)`. The cocycle of a straight segment is
//! its raw signed crossing count against `w`, with no basepoint correction.

use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::cylinders::{cylinder_decomposition, Cylinder, DecompositionResult};
use crate::flow::{trace, Budget, FlowError};
use crate::numfield::{FieldElement, PlanarVector, Rational};
use crate::surface::{EdgeCrossingWord, EdgeMap, RelativeCycle, SpanIndex, TranslationSurface};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("the cycle is zero in relative homology")]
    ZeroCycle,
    #[error("the cycle has boundary outside the marked set")]
    BoundaryNotInP,
    #[error("edge class {0} does not exist")]
    UnknownEdgeClass(usize),
}

#[derive(Clone, Debug)]
pub struct CoverSpec {
    base: Arc<TranslationSurface>,
    w: RelativeCycle,
    recurrent: bool,
}

impl CoverSpec {
    pub fn base(&self) -> &TranslationSurface {
        &self.base
    }

    pub fn base_arc(&self) -> Arc<TranslationSurface> {
        self.base.clone()
    }

    pub fn w(&self) -> &RelativeCycle {
        &self.w
    }

    pub fn recurrent(&self) -> bool {
        self.recurrent
    }
}

/// Builds the cover for `w`. Every vertex class is marked, so any edge chain
/// has boundary in `P`; the check is kept for chains naming unknown classes.
pub fn make_cover(surface: Arc<TranslationSurface>, w: RelativeCycle) -> Result<CoverSpec, CoverError> {
    if let Some((&c, _)) = w.weights().iter().find(|(&c, _)| c >= surface.num_edge_classes()) {
        return Err(CoverError::UnknownEdgeClass(c));
    }
    let marked = surface.marked_classes();
    let boundary = surface.boundary(&w);
    if boundary.iter().enumerate().any(|(i, &b)| b != 0 && !marked.contains(&i)) {
        return Err(CoverError::BoundaryNotInP);
    }
    if surface.is_trivial_cycle(&w) {
        return Err(CoverError::ZeroCycle);
    }
    let recurrent = surface.holonomy(&w).is_zero();
    Ok(CoverSpec { base: surface, w, recurrent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    ClosedCylinder,
    Strip,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftClass {
    pub kind: LiftKind,
    pub k: i64,
    pub v: PlanarVector,
    pub area: FieldElement,
    pub cylinder: Cylinder,
}

impl LiftClass {
    pub fn is_strip(&self) -> bool {
        self.kind == LiftKind::Strip
    }
}

pub fn lift_class_of_word(cover: &CoverSpec, word: &EdgeCrossingWord) -> i64 {
    cover.base().intersection_number(cover.w(), word)
}

/// `k = i(w, core)`; the cylinder lifts to a strip exactly when `k != 0`.
pub fn classify_cylinder_lift(cover: &CoverSpec, cyl: &Cylinder) -> LiftClass {
    let k = lift_class_of_word(cover, &cyl.core_word);
    LiftClass {
        kind: if k == 0 { LiftKind::ClosedCylinder } else { LiftKind::Strip },
        k,
        v: cyl.hol.clone(),
        area: cyl.area.clone(),
        cylinder: cyl.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleValue {
    pub value: i64,
    /// Set when the cover is not recurrent.
    pub non_recurrent_warning: bool,
}

/// `alpha(x, t)`: signed crossings of the segment `x + s v`, `0 < s <= t`,
/// with `w`.
pub fn cocycle(
    cover: &CoverSpec,
    polygon: usize,
    x: &PlanarVector,
    v: &PlanarVector,
    t: &FieldElement,
) -> Result<CocycleValue, FlowError> {
    let tr = trace(cover.base(), polygon, x, v, &Budget::Time(t.clone()))?.require_complete()?;
    Ok(CocycleValue {
        value: cover.base().intersection_number(cover.w(), &tr.word()),
        non_recurrent_warning: !cover.recurrent(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StripVerdict {
    StripsExist { witness: PlanarVector },
    StripsExistByIndexCriterion,
    InconclusiveAtBound,
}

#[derive(Clone, Debug)]
pub struct StripReport {
    pub witnesses: Vec<(PlanarVector, LiftClass)>,
    pub lifts: Vec<(PlanarVector, Vec<LiftClass>)>,
    pub unresolved_directions: Vec<PlanarVector>,
    pub span_index: SpanIndex,
    pub verdict: StripVerdict,
}

/// Looks for strips in the sampled directions and evaluates the core-curve
/// index criterion over all cores found. The index criterion applies to
/// absolute, holonomy-free `w` that is nonzero in homology; it certifies
/// strips independently of any particular direction. Every bound is a
/// sufficient check only.
pub fn strips_exist_certificate(cover: &CoverSpec, directions: &[PlanarVector], l_max: &Rational) -> StripReport {
    let surface = cover.base();
    let mut witnesses = Vec::new();
    let mut lifts = Vec::new();
    let mut unresolved = Vec::new();
    let mut cores = Vec::new();
    for v in directions {
        match cylinder_decomposition(surface, v, l_max) {
            DecompositionResult::Cylinders(d) => {
                let classes: Vec<LiftClass> = d.cylinders.iter().map(|c| classify_cylinder_lift(cover, c)).collect();
                for lc in &classes {
                    cores.push(lc.cylinder.core_word.clone());
                    if lc.is_strip() {
                        witnesses.push((v.clone(), lc.clone()));
                    }
                }
                lifts.push((v.clone(), classes));
            }
            DecompositionResult::NotPeriodicAtBound { .. } => unresolved.push(v.clone()),
        }
    }
    let span_index = surface.core_curve_span_index(&cores);
    let w = cover.w();
    let index_applies = matches!(span_index, SpanIndex::Finite(_))
        && cover.recurrent()
        && surface.is_absolute(w)
        && !surface.is_null_relative(w);
    let verdict = if index_applies {
        StripVerdict::StripsExistByIndexCriterion
    } else if let Some((v, _)) = witnesses.first() {
        StripVerdict::StripsExist { witness: v.clone() }
    } else {
        StripVerdict::InconclusiveAtBound
    };
    StripReport { witnesses, lifts, unresolved_directions: unresolved, span_index, verdict }
}

/// Whether an affine automorphism with the given edge map lifts to the
/// cover, i.e. maps `w` to `±w` in relative homology. Returns the sign.
pub fn automorphism_lift_sign(cover: &CoverSpec, map: &EdgeMap) -> Option<i8> {
    let s = cover.base();
    let img = s.push_cycle(map, cover.w());
    if s.homologous_relative(&img, cover.w()) {
        Some(1)
    } else if s.homologous_relative(&img, &cover.w().negated()) {
        Some(-1)
    } else {
        None
    }
}

/// Whether the multi-twist acting on cylinder `i` by `multiplicities[i]`
/// full twists lifts to the cover: the class `sum n_i k_i core_i` must pair
/// trivially with every absolute cycle.
pub fn multitwist_lifts(cover: &CoverSpec, cylinders: &[Cylinder], multiplicities: &[i64]) -> bool {
    let s = cover.base();
    let mut acc = vec![0i64; s.num_edge_classes()];
    for (c, &n) in cylinders.iter().zip(multiplicities) {
        let k = lift_class_of_word(cover, &c.core_word);
        let x = s.crossing_vector(&c.core_word);
        for (a, xi) in acc.iter_mut().zip(x) {
            *a += n * k * xi;
        }
    }
    s.cycle_basis().iter().all(|col| {
        let dot: BigInt = col.iter().zip(&acc).map(|(a, b)| a * BigInt::from(*b)).sum();
        dot == BigInt::from(0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{rat, rat_int, Field};
    use crate::surface::{square_torus, EdgeRef};

    fn torus_cover() -> CoverSpec {
        let f = Field::rationals();
        let t = Arc::new(square_torus(&f));
        let bottom = t.edge_class(EdgeRef::new(0, 0)).0;
        make_cover(t, RelativeCycle::from_classes(&[(bottom, 1)])).unwrap()
    }

    #[test]
    fn torus_cover_flags() {
        let c = torus_cover();
        assert!(!c.recurrent());
        let t = c.base_arc();
        assert_eq!(make_cover(t.clone(), RelativeCycle::new()).unwrap_err(), CoverError::ZeroCycle);
        assert_eq!(make_cover(t.clone(), t.polygon_boundary(0)).unwrap_err(), CoverError::ZeroCycle);
    }

    #[test]
    fn torus_cocycle() {
        let c = torus_cover();
        let f = c.base().field().clone();
        let x = PlanarVector::new(f.from_ratio(1, 3), f.from_ratio(2, 7));
        let up = PlanarVector::from_ints(&f, 0, 1);
        assert_eq!(cocycle(&c, 0, &x, &up, &f.zero()).unwrap().value, 0);
        let one = cocycle(&c, 0, &x, &up, &f.one()).unwrap();
        assert_eq!(one.value, 1);
        assert!(one.non_recurrent_warning);
        let right = PlanarVector::from_ints(&f, 1, 0);
        assert_eq!(cocycle(&c, 0, &x, &right, &f.from_i64(5)).unwrap().value, 0);
    }

    #[test]
    fn torus_vertical_cylinder_is_strip() {
        let c = torus_cover();
        let f = c.base().field().clone();
        let up = PlanarVector::from_ints(&f, 0, 1);
        let d = cylinder_decomposition(c.base(), &up, &rat_int(3)).decomposition().unwrap();
        let lc = classify_cylinder_lift(&c, &d.cylinders[0]);
        assert_eq!(lc.kind, LiftKind::Strip);
        assert_eq!(lc.k.abs(), 1);
        let rep = strips_exist_certificate(&c, &[up.clone()], &rat(5, 1));
        assert_eq!(rep.verdict, StripVerdict::StripsExist { witness: up });
    }
}
