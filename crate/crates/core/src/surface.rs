//! Translation surfaces glued from convex polygons, with their vertex
//! classes, edge classes and the chain-level homology needed for covers.
//!
//! Every vertex class is a point of the marked set `P`: cone points are
//! marked automatically and regular corners must be marked explicitly. With
//! that convention `H1(M, P)` is the edge-class lattice modulo polygon
//! boundaries and a straight path in `M \ P` meets edges only transversally
//! at interior points.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::intmat::{self, IntMatrix};
use crate::numfield::{Field, FieldElement, FieldError, Mat2, PlanarVector, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("polygon {0} is not strictly convex and counterclockwise")]
    NonConvexPolygon(usize),
    #[error("edges {0} and {1} are glued but their vectors are not opposite")]
    EdgeVectorMismatch(EdgeRef, EdgeRef),
    #[error("edge {0} is not glued to anything")]
    DanglingEdge(EdgeRef),
    #[error("invalid gluing: {0}")]
    BadGluing(String),
    #[error("no singular or marked point: every cone angle is 2pi and nothing is marked")]
    EmptySingularSet,
    #[error("vertex class {0} has cone angle 2pi but is not marked")]
    UnmarkedCorner(usize),
    #[error("marked vertex class {0} does not exist")]
    InvalidMark(usize),
    #[error("the glued polygons do not form a connected surface")]
    Disconnected,
    #[error("surface has no polygons")]
    NoPolygons,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub polygon: usize,
    pub edge: usize,
}

impl EdgeRef {
    pub fn new(polygon: usize, edge: usize) -> EdgeRef {
        EdgeRef { polygon, edge }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.polygon, self.edge)
    }
}

/// Convex polygon with vertices in counterclockwise order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    vertices: Vec<PlanarVector>,
}

/// Position of a point relative to a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    Edge(usize),
    Vertex(usize),
    Outside,
}

impl Polygon {
    pub fn new(vertices: Vec<PlanarVector>) -> Polygon {
        Polygon { vertices }
    }

    pub fn from_ints(field: &Field, pts: &[(i64, i64)]) -> Polygon {
        Polygon { vertices: pts.iter().map(|&(x, y)| PlanarVector::from_ints(field, x, y)).collect() }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[PlanarVector] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &PlanarVector {
        &self.vertices[i % self.vertices.len()]
    }

    pub fn edge(&self, i: usize) -> PlanarVector {
        let n = self.vertices.len();
        &self.vertices[(i + 1) % n] - &self.vertices[i % n]
    }

    pub fn area(&self) -> FieldElement {
        let n = self.vertices.len();
        let field = self.vertices[0].field().clone();
        let mut twice = field.zero();
        for i in 0..n {
            twice += &self.vertices[i].cross(&self.vertices[(i + 1) % n]);
        }
        twice.scale(&Rational::new(BigInt::one(), BigInt::from(2)))
    }

    pub fn translate(&self, t: &PlanarVector) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|v| v + t).collect() }
    }

    /// Strict convexity (no collinear consecutive edges) and total turning of
    /// exactly one revolution.
    pub fn is_strictly_convex(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let edges: Vec<PlanarVector> = (0..n).map(|i| self.edge(i)).collect();
        if edges.iter().any(|e| e.is_zero()) {
            return false;
        }
        let mut wraps = 0;
        for i in 0..n {
            let a = &edges[i];
            let b = &edges[(i + 1) % n];
            if a.cross(b).sign() <= 0 {
                return false;
            }
            if angle_half(b) < angle_half(a) {
                wraps += 1;
            }
        }
        // a simple convex polygon turns through the reference angle once
        wraps == 1
    }

    pub fn locate(&self, x: &PlanarVector) -> Location {
        let n = self.vertices.len();
        let mut on_edge = None;
        for i in 0..n {
            let s = self.edge(i).cross(&(x - &self.vertices[i])).sign();
            if s < 0 {
                return Location::Outside;
            }
            if s == 0 {
                if let Some(j) = on_edge {
                    // on two edge lines: a vertex
                    let v = if (j + 1) % n == i { i } else { j };
                    return Location::Vertex(v);
                }
                on_edge = Some(i);
            }
        }
        match on_edge {
            None => Location::Interior,
            Some(i) => {
                if x == &self.vertices[i] {
                    Location::Vertex(i)
                } else if x == &self.vertices[(i + 1) % n] {
                    Location::Vertex((i + 1) % n)
                } else {
                    Location::Edge(i)
                }
            }
        }
    }

    pub fn contains_strictly(&self, x: &PlanarVector) -> bool {
        self.locate(x) == Location::Interior
    }
}

/// Half-plane index used for exact angular ordering: 0 for angles in
/// `[0, pi)`, 1 for `[pi, 2pi)`.
fn half(v: &PlanarVector) -> i32 {
    let sy = v.y.sign();
    if sy > 0 || (sy == 0 && v.x.sign() > 0) {
        0
    } else {
        1
    }
}

/// A key that orders nonzero vectors by angle in `[0, 2pi)`.
struct AngleKey<'a>(&'a PlanarVector);

impl PartialEq for AngleKey<'_> {
    fn eq(&self, o: &Self) -> bool {
        self.partial_cmp(o) == Some(std::cmp::Ordering::Equal)
    }
}

impl PartialOrd for AngleKey<'_> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        let (ha, hb) = (half(self.0), half(o.0));
        if ha != hb {
            return Some(ha.cmp(&hb));
        }
        Some(0.cmp(&self.0.cross(o.0).sign()))
    }
}

fn angle_half(v: &PlanarVector) -> AngleKey<'_> {
    AngleKey(v)
}

/// Whether `d` lies in the half-open sector swept counterclockwise from `a`
/// to `b` (the sector is assumed to have angle less than pi).
pub fn in_sector(a: &PlanarVector, b: &PlanarVector, d: &PlanarVector) -> bool {
    let s = a.cross(d).sign();
    let starts = s > 0 || (s == 0 && a.dot(d).sign() > 0);
    starts && d.cross(b).sign() > 0
}

/// Signed crossing of an oriented edge class by a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub class: usize,
    pub sign: i8,
}

pub type EdgeCrossingWord = Vec<Crossing>;

pub fn reverse_word(word: &[Crossing]) -> EdgeCrossingWord {
    word.iter().rev().map(|c| Crossing { class: c.class, sign: -c.sign }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClass {
    pub corners: Vec<(usize, usize)>,
    /// Cone angle is `2 pi * cone_multiple`.
    pub cone_multiple: u32,
    pub marked: bool,
}

impl VertexClass {
    pub fn is_singular(&self) -> bool {
        self.cone_multiple != 1
    }
}

/// Integer 1-chain on edge classes, oriented along each class's canonical
/// representative (the smallest `EdgeRef` of the pair).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RelativeCycle {
    weights: BTreeMap<usize, i64>,
}

impl RelativeCycle {
    pub fn new() -> RelativeCycle {
        RelativeCycle::default()
    }

    pub fn from_classes(pairs: &[(usize, i64)]) -> RelativeCycle {
        let mut w = RelativeCycle::new();
        for &(c, a) in pairs {
            w.add(c, a);
        }
        w
    }

    pub fn add(&mut self, class: usize, weight: i64) {
        let e = self.weights.entry(class).or_insert(0);
        *e += weight;
        if *e == 0 {
            self.weights.remove(&class);
        }
    }

    pub fn weight(&self, class: usize) -> i64 {
        self.weights.get(&class).copied().unwrap_or(0)
    }

    pub fn weights(&self) -> &BTreeMap<usize, i64> {
        &self.weights
    }

    pub fn is_zero_chain(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn plus(&self, o: &RelativeCycle) -> RelativeCycle {
        let mut r = self.clone();
        for (&c, &a) in &o.weights {
            r.add(c, a);
        }
        r
    }

    pub fn negated(&self) -> RelativeCycle {
        RelativeCycle { weights: self.weights.iter().map(|(&c, &a)| (c, -a)).collect() }
    }

    pub fn scaled(&self, k: i64) -> RelativeCycle {
        let mut r = RelativeCycle::new();
        for (&c, &a) in &self.weights {
            r.add(c, a * k);
        }
        r
    }
}

/// Index of a sublattice of `H1(M; Z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanIndex {
    Finite(BigInt),
    Infinite,
}

/// Image of edges under a polygon-permuting affine automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    /// `refs[p][e]` is the image edge of `(p, e)`.
    pub refs: Vec<Vec<EdgeRef>>,
}

#[derive(Clone, Debug)]
pub struct TranslationSurface {
    field: Field,
    polygons: Vec<Polygon>,
    partner: Vec<Vec<EdgeRef>>,
    translation: Vec<Vec<PlanarVector>>,
    corner_class: Vec<Vec<usize>>,
    classes: Vec<VertexClass>,
    edge_class: Vec<Vec<(usize, i8)>>,
    edge_reps: Vec<EdgeRef>,
    genus: usize,
    area: FieldElement,
}

/// Glues polygons by translations and validates the result.
///
/// `marked` lists vertex-class ids to mark in addition to the cone points.
/// Class ids are assigned in order of each class's smallest corner
/// `(polygon, vertex)`.
pub fn build_surface(
    polygons: Vec<Polygon>,
    gluing: &[(EdgeRef, EdgeRef)],
    marked: &[usize],
) -> Result<TranslationSurface, SurfaceError> {
    if polygons.is_empty() {
        return Err(SurfaceError::NoPolygons);
    }
    let field = polygons[0].vertices.first().ok_or(SurfaceError::NonConvexPolygon(0))?.field().clone();
    for (i, p) in polygons.iter().enumerate() {
        if p.vertices.iter().any(|v| v.field() != &field) {
            return Err(SurfaceError::Field(FieldError::FieldMismatch));
        }
        if !p.is_strictly_convex() {
            return Err(SurfaceError::NonConvexPolygon(i));
        }
    }
    let mut partner: Vec<Vec<Option<EdgeRef>>> = polygons.iter().map(|p| vec![None; p.len()]).collect();
    let valid = |r: &EdgeRef| r.polygon < polygons.len() && r.edge < polygons[r.polygon].len();
    for &(a, b) in gluing {
        if !valid(&a) || !valid(&b) {
            return Err(SurfaceError::BadGluing(format!("edge {a} or {b} out of range")));
        }
        if a == b {
            return Err(SurfaceError::BadGluing(format!("edge {a} glued to itself")));
        }
        for (x, y) in [(a, b), (b, a)] {
            match partner[x.polygon][x.edge] {
                Some(prev) if prev != y => {
                    return Err(SurfaceError::BadGluing(format!("edge {x} glued twice")));
                }
                _ => partner[x.polygon][x.edge] = Some(y),
            }
        }
    }
    let mut full: Vec<Vec<EdgeRef>> = Vec::new();
    for (p, row) in partner.iter().enumerate() {
        let mut out = Vec::new();
        for (e, x) in row.iter().enumerate() {
            out.push(x.ok_or(SurfaceError::DanglingEdge(EdgeRef::new(p, e)))?);
        }
        full.push(out);
    }
    let partner = full;
    let mut translation: Vec<Vec<PlanarVector>> = Vec::new();
    for (p, poly) in polygons.iter().enumerate() {
        let mut row = Vec::new();
        for e in 0..poly.len() {
            let q = partner[p][e];
            let u = poly.edge(e);
            let w = polygons[q.polygon].edge(q.edge);
            if !(&u + &w).is_zero() {
                return Err(SurfaceError::EdgeVectorMismatch(EdgeRef::new(p, e), q));
            }
            // start of (p, e) is identified with the end of its partner
            row.push(polygons[q.polygon].vertex(q.edge + 1) - poly.vertex(e));
        }
        translation.push(row);
    }

    // connectivity
    let mut seen = vec![false; polygons.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(p) = queue.pop_front() {
        for q in &partner[p] {
            if !seen[q.polygon] {
                seen[q.polygon] = true;
                queue.push_back(q.polygon);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(SurfaceError::Disconnected);
    }

    // vertex classes: corner (p, i) -> partner of the incoming edge (p, i-1)
    let reference = PlanarVector::from_ints(&field, 1, 0);
    let mut corner_class: Vec<Vec<usize>> = polygons.iter().map(|p| vec![usize::MAX; p.len()]).collect();
    let mut classes: Vec<VertexClass> = Vec::new();
    for p in 0..polygons.len() {
        for i in 0..polygons[p].len() {
            if corner_class[p][i] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut corners = Vec::new();
            let mut hits = 0u32;
            let (mut cp, mut ci) = (p, i);
            loop {
                corner_class[cp][ci] = id;
                corners.push((cp, ci));
                let poly = &polygons[cp];
                let n = poly.len();
                let out_edge = poly.edge(ci);
                let back = -&poly.edge(ci + n - 1);
                if in_sector(&out_edge, &back, &reference) {
                    hits += 1;
                }
                let q = partner[cp][(ci + n - 1) % n];
                (cp, ci) = (q.polygon, q.edge);
                if (cp, ci) == (p, i) {
                    break;
                }
            }
            classes.push(VertexClass { corners, cone_multiple: hits, marked: false });
        }
    }
    for &m in marked {
        let c = classes.get_mut(m).ok_or(SurfaceError::InvalidMark(m))?;
        c.marked = true;
    }
    for c in classes.iter_mut() {
        if c.is_singular() {
            c.marked = true;
        }
    }
    if classes.iter().all(|c| !c.marked) {
        return Err(SurfaceError::EmptySingularSet);
    }
    if let Some(i) = classes.iter().position(|c| !c.marked) {
        return Err(SurfaceError::UnmarkedCorner(i));
    }

    let mut edge_class: Vec<Vec<(usize, i8)>> = polygons.iter().map(|p| vec![(usize::MAX, 0); p.len()]).collect();
    let mut edge_reps = Vec::new();
    for p in 0..polygons.len() {
        for e in 0..polygons[p].len() {
            if edge_class[p][e].0 != usize::MAX {
                continue;
            }
            let q = partner[p][e];
            let id = edge_reps.len();
            edge_reps.push(EdgeRef::new(p, e));
            edge_class[p][e] = (id, 1);
            edge_class[q.polygon][q.edge] = (id, -1);
        }
    }

    let v = classes.len() as i64;
    let e = edge_reps.len() as i64;
    let f = polygons.len() as i64;
    let chi = v - e + f;
    let excess: i64 = classes.iter().map(|c| c.cone_multiple as i64 - 1).sum();
    // Gauss-Bonnet: sum (m - 1) = 2g - 2 = -chi
    if chi % 2 != 0 || excess != -chi || chi > 2 {
        return Err(SurfaceError::BadGluing(format!(
            "Gauss-Bonnet fails: chi = {chi}, total excess {excess} (in units of 2pi)"
        )));
    }
    let genus = ((2 - chi) / 2) as usize;
    let mut area = field.zero();
    for p in &polygons {
        area += &p.area();
    }
    Ok(TranslationSurface {
        field,
        polygons,
        partner,
        translation,
        corner_class,
        classes,
        edge_class,
        edge_reps,
        genus,
        area,
    })
}

impl TranslationSurface {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn polygon(&self, p: usize) -> &Polygon {
        &self.polygons[p]
    }

    pub fn partner(&self, e: EdgeRef) -> EdgeRef {
        self.partner[e.polygon][e.edge]
    }

    /// Translation carrying points of edge `e` onto its partner edge.
    pub fn gluing_translation(&self, e: EdgeRef) -> &PlanarVector {
        &self.translation[e.polygon][e.edge]
    }

    /// All glued pairs, each listed once as (canonical, other).
    pub fn gluing_pairs(&self) -> Vec<(EdgeRef, EdgeRef)> {
        self.edge_reps.iter().map(|&r| (r, self.partner(r))).collect()
    }

    pub fn vertex_classes(&self) -> &[VertexClass] {
        &self.classes
    }

    pub fn corner_class(&self, p: usize, i: usize) -> usize {
        let n = self.polygons[p].len();
        self.corner_class[p][i % n]
    }

    pub fn num_edge_classes(&self) -> usize {
        self.edge_reps.len()
    }

    pub fn edge_class(&self, e: EdgeRef) -> (usize, i8) {
        self.edge_class[e.polygon][e.edge]
    }

    pub fn canonical_edge(&self, class: usize) -> EdgeRef {
        self.edge_reps[class]
    }

    pub fn edge_vector(&self, class: usize) -> PlanarVector {
        let r = self.edge_reps[class];
        self.polygons[r.polygon].edge(r.edge)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn area(&self) -> &FieldElement {
        &self.area
    }

    pub fn marked_classes(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| self.classes[i].marked).collect()
    }

    /// Explicitly marked regular classes (cone points are implied).
    pub fn extra_marks(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| self.classes[i].marked && !self.classes[i].is_singular()).collect()
    }

    /// Cone angles as `(class, k)` meaning an angle of `k pi`.
    pub fn cone_angles(&self) -> Vec<(usize, u32)> {
        self.classes.iter().enumerate().map(|(i, c)| (i, 2 * c.cone_multiple)).collect()
    }

    /// `sum (angle - 2pi)` in units of `pi`, and `2 (2g - 2)` in the same
    /// units; equal for every valid surface.
    pub fn gauss_bonnet(&self) -> (i64, i64) {
        let lhs: i64 = self.cone_angles().iter().map(|&(_, k)| k as i64 - 2).sum();
        (lhs, 2 * (2 * self.genus as i64 - 2))
    }

    /// Corner-angle accumulation computed independently of the class
    /// traversal: the angle sum of each polygon is `(n - 2) pi`.
    pub fn total_corner_angle_pi(&self) -> i64 {
        self.polygons.iter().map(|p| p.len() as i64 - 2).sum()
    }

    // ----- chains ---------------------------------------------------------

    /// Chain from a list of oriented edges with weights.
    pub fn cycle_from_edges(&self, edges: &[(EdgeRef, i64)]) -> RelativeCycle {
        let mut w = RelativeCycle::new();
        for &(r, a) in edges {
            let (c, s) = self.edge_class(r);
            w.add(c, a * s as i64);
        }
        w
    }

    pub fn holonomy(&self, w: &RelativeCycle) -> PlanarVector {
        let mut h = PlanarVector::zero(&self.field);
        for (&c, &a) in w.weights() {
            let e = self.edge_vector(c);
            let a = self.field.from_i64(a);
            h = &h + &e.scale(&a);
        }
        h
    }

    /// Boundary of a chain as a vector over vertex classes.
    pub fn boundary(&self, w: &RelativeCycle) -> Vec<i64> {
        let mut b = vec![0i64; self.classes.len()];
        for (&c, &a) in w.weights() {
            let r = self.edge_reps[c];
            b[self.corner_class(r.polygon, r.edge + 1)] += a;
            b[self.corner_class(r.polygon, r.edge)] -= a;
        }
        b
    }

    pub fn is_absolute(&self, w: &RelativeCycle) -> bool {
        self.boundary(w).iter().all(|&x| x == 0)
    }

    /// Boundary of polygon `p` as a chain.
    pub fn polygon_boundary(&self, p: usize) -> RelativeCycle {
        let edges: Vec<(EdgeRef, i64)> = (0..self.polygons[p].len()).map(|e| (EdgeRef::new(p, e), 1)).collect();
        self.cycle_from_edges(&edges)
    }

    /// Whether `w` vanishes in `H1(M, P; Z)`, i.e. is an integer combination
    /// of polygon boundaries. Solves `phi_p - phi_q = w(c)` over the dual graph.
    pub fn is_null_relative(&self, w: &RelativeCycle) -> bool {
        let mut phi: Vec<Option<i64>> = vec![None; self.polygons.len()];
        phi[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            for e in 0..self.polygons[p].len() {
                let (c, s) = self.edge_class(EdgeRef::new(p, e));
                let q = self.partner[p][e].polygon;
                // coefficient of class c in sum phi * boundary = s*(phi_p - phi_q)
                let target = w.weight(c) * s as i64;
                let want = phi[p].unwrap() - target;
                if q == p {
                    if target != 0 {
                        return false;
                    }
                    continue;
                }
                match phi[q] {
                    None => {
                        phi[q] = Some(want);
                        queue.push_back(q);
                    }
                    Some(v) if v != want => return false,
                    _ => {}
                }
            }
        }
        true
    }

    pub fn homologous_relative(&self, a: &RelativeCycle, b: &RelativeCycle) -> bool {
        self.is_null_relative(&a.plus(&b.negated()))
    }

    /// `i(w, path)`: sum over crossings of sign times the weight of the class.
    pub fn intersection_number(&self, w: &RelativeCycle, word: &[Crossing]) -> i64 {
        word.iter().map(|c| c.sign as i64 * w.weight(c.class)).sum()
    }

    /// Net signed crossing count per edge class.
    pub fn crossing_vector(&self, word: &[Crossing]) -> Vec<i64> {
        let mut v = vec![0i64; self.edge_reps.len()];
        for c in word {
            v[c.class] += c.sign as i64;
        }
        v
    }

    /// `d1` as a matrix (vertex classes by edge classes).
    pub fn boundary_matrix(&self) -> IntMatrix {
        let mut m = vec![vec![0i64; self.edge_reps.len()]; self.classes.len()];
        for c in 0..self.edge_reps.len() {
            let r = self.edge_reps[c];
            m[self.corner_class(r.polygon, r.edge + 1)][c] += 1;
            m[self.corner_class(r.polygon, r.edge)][c] -= 1;
        }
        intmat::from_i64(&m)
    }

    /// Integer basis of the absolute cycles (kernel of `d1`).
    pub fn cycle_basis(&self) -> Vec<Vec<BigInt>> {
        intmat::kernel_basis(&self.boundary_matrix(), self.edge_reps.len())
    }

    /// Index of the subgroup of `H1(M; Z)` spanned by the given closed
    /// curves in `M \ P`, each given by its edge-crossing word.
    ///
    /// By Poincare duality the index equals that of the span of the induced
    /// functionals `w -> i(w, curve)` on `H1(M; Z)`; evaluated on a basis of
    /// absolute edge cycles this is the Smith determinant of `X K`.
    pub fn core_curve_span_index(&self, cores: &[EdgeCrossingWord]) -> SpanIndex {
        let k = self.cycle_basis();
        let x: Vec<Vec<i64>> = cores.iter().map(|w| self.crossing_vector(w)).collect();
        let xm = intmat::from_i64(&x);
        let kt: IntMatrix = if k.is_empty() {
            vec![vec![]; self.edge_reps.len()]
        } else {
            (0..self.edge_reps.len()).map(|i| k.iter().map(|col| col[i].clone()).collect()).collect()
        };
        let prod = intmat::mat_mul(&xm, &kt);
        let inv = intmat::smith_invariants(&prod);
        if inv.len() < 2 * self.genus {
            return SpanIndex::Infinite;
        }
        SpanIndex::Finite(inv.iter().fold(BigInt::one(), |acc, d| acc * d))
    }

    // ----- transformations -------------------------------------------------

    /// Image of the surface under a linear map of positive determinant, with
    /// the same combinatorics.
    pub fn transform(&self, m: &Mat2) -> Result<TranslationSurface, SurfaceError> {
        let polys = self.polygons.iter().map(|p| Polygon::new(p.vertices.iter().map(|v| m.apply(v)).collect())).collect();
        build_surface(polys, &self.gluing_pairs(), &self.extra_marks())
    }

    /// The same surface with coordinates embedded into a larger field; only
    /// rational surfaces can be re-embedded.
    pub fn extend_to(&self, field: &Field) -> Result<TranslationSurface, SurfaceError> {
        let mut polys = Vec::new();
        for p in &self.polygons {
            let vs: Result<Vec<PlanarVector>, FieldError> = p.vertices.iter().map(|v| v.in_field(field)).collect();
            polys.push(Polygon::new(vs?));
        }
        build_surface(polys, &self.gluing_pairs(), &self.extra_marks())
    }

    /// Searches for an affine automorphism with derivative `m` that maps each
    /// polygon onto a translate of a polygon. Returns the induced edge map.
    pub fn polygon_automorphism(&self, m: &Mat2) -> Option<EdgeMap> {
        let np = self.polygons.len();
        let images: Vec<Vec<PlanarVector>> =
            self.polygons.iter().map(|p| (0..p.len()).map(|i| m.apply(&p.edge(i))).collect()).collect();
        let edges: Vec<Vec<PlanarVector>> =
            self.polygons.iter().map(|p| (0..p.len()).map(|i| p.edge(i)).collect()).collect();
        let matches = |p: usize, q: usize, s: usize| -> bool {
            let n = images[p].len();
            n == edges[q].len() && (0..n).all(|i| images[p][i] == edges[q][(i + s) % n])
        };
        let n0 = self.polygons[0].len();
        for q0 in 0..np {
            for s0 in 0..n0 {
                if !matches(0, q0, s0) {
                    continue;
                }
                let mut assign: Vec<Option<(usize, usize)>> = vec![None; np];
                assign[0] = Some((q0, s0));
                let mut queue = VecDeque::from([0usize]);
                let mut ok = true;
                'bfs: while let Some(p) = queue.pop_front() {
                    let (q, s) = assign[p].unwrap();
                    for e in 0..self.polygons[p].len() {
                        let pe = self.partner[p][e];
                        let img = EdgeRef::new(q, (e + s) % self.polygons[q].len());
                        let ip = self.partner(img);
                        let n2 = self.polygons[ip.polygon].len();
                        let want = (ip.polygon, (ip.edge + n2 - pe.edge % n2) % n2);
                        match assign[pe.polygon] {
                            None => {
                                if !matches(pe.polygon, want.0, want.1) {
                                    ok = false;
                                    break 'bfs;
                                }
                                assign[pe.polygon] = Some(want);
                                queue.push_back(pe.polygon);
                            }
                            Some(a) if a != want => {
                                ok = false;
                                break 'bfs;
                            }
                            _ => {}
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let mut used = vec![false; np];
                for a in &assign {
                    let (q, _) = a.unwrap();
                    if used[q] {
                        ok = false;
                    }
                    used[q] = true;
                }
                if !ok {
                    continue;
                }
                let refs = (0..np)
                    .map(|p| {
                        let (q, s) = assign[p].unwrap();
                        (0..self.polygons[p].len()).map(|e| EdgeRef::new(q, (e + s) % self.polygons[q].len())).collect()
                    })
                    .collect();
                return Some(EdgeMap { refs });
            }
        }
        None
    }

    /// Pushes a chain forward along an edge map.
    pub fn push_cycle(&self, map: &EdgeMap, w: &RelativeCycle) -> RelativeCycle {
        let mut out = RelativeCycle::new();
        for (&c, &a) in w.weights() {
            let r = self.edge_reps[c];
            let img = map.refs[r.polygon][r.edge];
            let (c2, s) = self.edge_class(img);
            out.add(c2, a * s as i64);
        }
        out
    }

    /// Point of polygon `p` moved across edge `e` into the partner polygon.
    pub fn cross_edge(&self, e: EdgeRef, x: &PlanarVector) -> (usize, PlanarVector) {
        let q = self.partner(e);
        (q.polygon, x + self.gluing_translation(e))
    }

    /// Sum of polygon areas computed directly (for conservation checks).
    pub fn polygon_area_sum(&self) -> FieldElement {
        let mut a = self.field.zero();
        for p in &self.polygons {
            a += &p.area();
        }
        a
    }

    pub fn max_vertex_norm_f64(&self) -> f64 {
        self.polygons
            .iter()
            .flat_map(|p| p.vertices.iter())
            .map(|v| {
                let (x, y) = v.to_f64();
                (x * x + y * y).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Map from edge to class, for callers that need all edges at once.
    pub fn edge_class_table(&self) -> HashMap<EdgeRef, (usize, i8)> {
        let mut m = HashMap::new();
        for p in 0..self.polygons.len() {
            for e in 0..self.polygons[p].len() {
                m.insert(EdgeRef::new(p, e), self.edge_class[p][e]);
            }
        }
        m
    }

    /// Whether `w` is zero as a chain or as a relative class.
    pub fn is_trivial_cycle(&self, w: &RelativeCycle) -> bool {
        w.is_zero_chain() || self.is_null_relative(w)
    }
}

/// Unit square torus with its corner marked.
pub fn square_torus(field: &Field) -> TranslationSurface {
    let sq = Polygon::from_ints(field, &[(0, 0), (1, 0), (1, 1), (0, 1)]);
    let glue = [(EdgeRef::new(0, 0), EdgeRef::new(0, 2)), (EdgeRef::new(0, 1), EdgeRef::new(0, 3))];
    build_surface(vec![sq], &glue, &[0]).expect("square torus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::rationals()
    }

    #[test]
    fn torus_basics() {
        let t = square_torus(&q());
        assert_eq!(t.genus(), 1);
        assert_eq!(t.vertex_classes().len(), 1);
        assert_eq!(t.cone_angles(), vec![(0, 2)]);
        assert_eq!(t.num_edge_classes(), 2);
        let (l, r) = t.gauss_bonnet();
        assert_eq!(l, r);
        assert_eq!(*t.area(), q().one());
    }

    #[test]
    fn build_errors() {
        let f = q();
        let sq = Polygon::from_ints(&f, &[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let partial = [(EdgeRef::new(0, 0), EdgeRef::new(0, 2))];
        assert_eq!(
            build_surface(vec![sq.clone()], &partial, &[0]).unwrap_err(),
            SurfaceError::DanglingEdge(EdgeRef::new(0, 1))
        );
        let bad = [(EdgeRef::new(0, 0), EdgeRef::new(0, 1)), (EdgeRef::new(0, 2), EdgeRef::new(0, 3))];
        assert!(matches!(build_surface(vec![sq.clone()], &bad, &[0]), Err(SurfaceError::EdgeVectorMismatch(..))));
        let glue = [(EdgeRef::new(0, 0), EdgeRef::new(0, 2)), (EdgeRef::new(0, 1), EdgeRef::new(0, 3))];
        assert_eq!(build_surface(vec![sq.clone()], &glue, &[]).unwrap_err(), SurfaceError::EmptySingularSet);
        let cw = Polygon::from_ints(&f, &[(0, 0), (0, 1), (1, 1), (1, 0)]);
        assert_eq!(build_surface(vec![cw], &glue, &[0]).unwrap_err(), SurfaceError::NonConvexPolygon(0));
        let collinear = Polygon::from_ints(&f, &[(0, 0), (1, 0), (2, 0), (2, 1), (0, 1)]);
        assert!(!collinear.is_strictly_convex());
    }

    #[test]
    fn two_square_torus_needs_both_marks() {
        let f = q();
        let a = Polygon::from_ints(&f, &[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let b = Polygon::from_ints(&f, &[(1, 0), (2, 0), (2, 1), (1, 1)]);
        let glue = [
            (EdgeRef::new(0, 1), EdgeRef::new(1, 3)),
            (EdgeRef::new(1, 1), EdgeRef::new(0, 3)),
            (EdgeRef::new(0, 2), EdgeRef::new(1, 0)),
            (EdgeRef::new(1, 2), EdgeRef::new(0, 0)),
        ];
        assert_eq!(build_surface(vec![a.clone(), b.clone()], &glue, &[0]).unwrap_err(), SurfaceError::UnmarkedCorner(1));
        let s = build_surface(vec![a, b], &glue, &[0, 1]).unwrap();
        assert_eq!(s.genus(), 1);
        assert_eq!(s.vertex_classes().len(), 2);
    }

    #[test]
    fn torus_homology() {
        let t = square_torus(&q());
        let bottom = t.edge_class(EdgeRef::new(0, 0)).0;
        let right = t.edge_class(EdgeRef::new(0, 1)).0;
        let w = RelativeCycle::from_classes(&[(bottom, 1)]);
        assert_eq!(t.holonomy(&w), PlanarVector::from_ints(t.field(), 1, 0));
        // upward crossing of the bottom edge from inside: exits through the top
        // edge (non-canonical ref of the bottom class): right-to-left, +1
        let up = vec![Crossing { class: bottom, sign: 1 }];
        assert_eq!(t.intersection_number(&w, &up), 1);
        assert_eq!(t.intersection_number(&w, &[]), 0);
        assert!(t.is_absolute(&w));
        assert!(!t.is_null_relative(&w));
        assert!(t.is_null_relative(&t.polygon_boundary(0)));
        let both = vec![up.clone(), vec![Crossing { class: right, sign: 1 }]];
        assert_eq!(t.core_curve_span_index(&both), SpanIndex::Finite(BigInt::one()));
        assert_eq!(t.core_curve_span_index(&both[..1]), SpanIndex::Infinite);
        let doubled = vec![vec![up[0], up[0]], vec![Crossing { class: right, sign: 1 }]];
        assert_eq!(t.core_curve_span_index(&doubled), SpanIndex::Finite(BigInt::from(2)));
    }

    #[test]
    fn rotation_of_square_is_automorphism() {
        let t = square_torus(&q());
        let f = t.field().clone();
        let rot = Mat2::from_ints(&f, 0, -1, 1, 0);
        let map = t.polygon_automorphism(&rot).expect("quarter turn preserves the square torus");
        let bottom = t.edge_class(EdgeRef::new(0, 0)).0;
        let w = RelativeCycle::from_classes(&[(bottom, 1)]);
        let img = t.push_cycle(&map, &w);
        assert_eq!(t.holonomy(&img), rot.apply(&t.holonomy(&w)));
        let shear = Mat2::from_ints(&f, 1, 1, 0, 1);
        assert!(t.polygon_automorphism(&shear).is_none());
    }

    #[test]
    fn locate_points() {
        let f = q();
        let sq = Polygon::from_ints(&f, &[(0, 0), (2, 0), (2, 2), (0, 2)]);
        assert_eq!(sq.locate(&PlanarVector::from_ints(&f, 1, 1)), Location::Interior);
        assert_eq!(sq.locate(&PlanarVector::from_ints(&f, 1, 0)), Location::Edge(0));
        assert_eq!(sq.locate(&PlanarVector::from_ints(&f, 2, 2)), Location::Vertex(2));
        assert_eq!(sq.locate(&PlanarVector::from_ints(&f, 0, 0)), Location::Vertex(0));
        assert_eq!(sq.locate(&PlanarVector::from_ints(&f, 3, 1)), Location::Outside);
    }
}
