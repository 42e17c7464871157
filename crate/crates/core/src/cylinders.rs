//! Saddle connections and cylinder decompositions in a fixed direction.
//!
//! Every outgoing separatrix in direction `v` is traced exactly. When all of
//! them end at vertices the direction is completely periodic; each polygon is
//! then cut along the levels `tau = v ∧ x` of its vertices and of the
//! connection segments inside it. The resulting trapezoids are carried to
//! one another by the flow, and the cycles of that map are the cylinders.

use std::collections::{HashMap, HashSet};

use num_traits::Signed;

use crate::flow::{crossing_for_exit, exit_polygon, Exit};
use crate::numfield::{FieldElement, PlanarVector, Rational};
use crate::surface::{EdgeCrossingWord, EdgeRef, TranslationSurface};

/// A direction: exact, or a float pair that only supports diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    Exact(PlanarVector),
    Float { x: f64, y: f64, tolerance: f64 },
}

impl Direction {
    pub fn exact(&self) -> Option<&PlanarVector> {
        match self {
            Direction::Exact(v) => Some(v),
            Direction::Float { .. } => None,
        }
    }

    pub fn angle(&self) -> f64 {
        match self {
            Direction::Exact(v) => {
                let (x, y) = v.to_f64();
                y.atan2(x)
            }
            Direction::Float { x, y, .. } => y.atan2(*x),
        }
    }
}

/// Piece of a connection inside one polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionSegment {
    pub polygon: usize,
    pub tau: FieldElement,
    pub sigma_start: FieldElement,
    pub sigma_end: FieldElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaddleConnection {
    pub start: usize,
    pub end: usize,
    /// Corner the connection leaves from.
    pub start_corner: (usize, usize),
    pub hol: PlanarVector,
    pub word: EdgeCrossingWord,
    pub segments: Vec<ConnectionSegment>,
}

#[derive(Clone, Debug)]
pub struct SeparatrixReport {
    pub connections: Vec<SaddleConnection>,
    pub unresolved: usize,
}

/// Trapezoidal piece of a polygon between two consecutive cut levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub polygon: usize,
    pub tau_lo: FieldElement,
    pub tau_hi: FieldElement,
    pub entry_edge: usize,
    pub exit_edge: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub direction: PlanarVector,
    /// Core holonomy is `s * direction`.
    pub s: FieldElement,
    pub hol: PlanarVector,
    pub circumference_sq: FieldElement,
    pub height_sq: FieldElement,
    pub area: FieldElement,
    /// Transverse width in `tau` units (`height * |direction|`).
    pub dtau: FieldElement,
    pub core_word: EdgeCrossingWord,
    /// A point on the core curve, strictly inside a polygon.
    pub core_point: (usize, PlanarVector),
    pub pieces: Vec<Piece>,
    pub bottom: Vec<usize>,
    pub top: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub direction: PlanarVector,
    pub cylinders: Vec<Cylinder>,
    pub connections: Vec<SaddleConnection>,
}

impl Decomposition {
    pub fn total_area(&self) -> FieldElement {
        let mut a = self.direction.field().zero();
        for c in &self.cylinders {
            a += &c.area;
        }
        a
    }
}

#[derive(Clone, Debug)]
pub enum DecompositionResult {
    Cylinders(Decomposition),
    NotPeriodicAtBound { unresolved: usize },
}

impl DecompositionResult {
    pub fn decomposition(self) -> Option<Decomposition> {
        match self {
            DecompositionResult::Cylinders(d) => Some(d),
            DecompositionResult::NotPeriodicAtBound { .. } => None,
        }
    }
}

fn tau(v: &PlanarVector, x: &PlanarVector) -> FieldElement {
    v.cross(x)
}

fn sigma(v: &PlanarVector, x: &PlanarVector) -> FieldElement {
    v.dot(x)
}

/// Traces every separatrix leaving a vertex in direction `v` for flat length
/// at most `l_max`.
pub fn separatrices(surface: &TranslationSurface, v: &PlanarVector, l_max: &Rational) -> SeparatrixReport {
    let field = surface.field();
    let vv = v.norm_sq();
    let l2 = field.from_rational(l_max * l_max);
    let mut connections = Vec::new();
    let mut unresolved = 0;
    if v.is_zero() || !l_max.is_positive() {
        return SeparatrixReport { connections, unresolved };
    }
    // edges parallel to v are connections already
    for class in 0..surface.num_edge_classes() {
        let r = surface.canonical_edge(class);
        let other = surface.partner(r);
        let u = surface.edge_vector(class);
        if !u.cross(v).is_zero() {
            continue;
        }
        let (fwd, back) = if u.dot(v).is_positive() { (r, other) } else { (other, r) };
        let pf = surface.polygon(fwd.polygon);
        let hol = pf.edge(fwd.edge);
        let len_sq = hol.norm_sq();
        if len_sq > l2 {
            unresolved += 1;
            continue;
        }
        let pb = surface.polygon(back.polygon);
        let a = pf.vertex(fwd.edge);
        let b = pf.vertex(fwd.edge + 1);
        // the partner edge runs the other way: its end is the start of the connection
        let a2 = pb.vertex(back.edge + 1);
        let b2 = pb.vertex(back.edge);
        connections.push(SaddleConnection {
            start: surface.corner_class(fwd.polygon, fwd.edge),
            end: surface.corner_class(fwd.polygon, fwd.edge + 1),
            start_corner: (fwd.polygon, fwd.edge),
            hol,
            word: Vec::new(),
            segments: vec![
                ConnectionSegment { polygon: fwd.polygon, tau: tau(v, a), sigma_start: sigma(v, a), sigma_end: sigma(v, b) },
                ConnectionSegment { polygon: back.polygon, tau: tau(v, a2), sigma_start: sigma(v, a2), sigma_end: sigma(v, b2) },
            ],
        });
    }
    for p in 0..surface.polygons().len() {
        let poly = surface.polygon(p);
        let n = poly.len();
        for i in 0..n {
            let out = poly.edge(i);
            let inc = poly.edge(i + n - 1);
            if out.cross(v).sign() <= 0 || inc.cross(v).sign() <= 0 {
                continue;
            }
            let mut q = p;
            let mut x = poly.vertex(i).clone();
            let mut s_total = field.zero();
            let mut word = Vec::new();
            let mut segments = Vec::new();
            loop {
                let qp = surface.polygon(q);
                let ex = exit_polygon(qp, &x, v);
                let (s, end_point) = match &ex {
                    Exit::Edge { s, point, .. } => (s.clone(), point.clone()),
                    Exit::Vertex { s, vertex } => (s.clone(), qp.vertex(*vertex).clone()),
                };
                s_total += &s;
                if &(&s_total * &s_total) * &vv > l2 {
                    unresolved += 1;
                    break;
                }
                segments.push(ConnectionSegment {
                    polygon: q,
                    tau: tau(v, &x),
                    sigma_start: sigma(v, &x),
                    sigma_end: sigma(v, &end_point),
                });
                match ex {
                    Exit::Vertex { vertex, .. } => {
                        connections.push(SaddleConnection {
                            start: surface.corner_class(p, i),
                            end: surface.corner_class(q, vertex),
                            start_corner: (p, i),
                            hol: v.scale(&s_total),
                            word,
                            segments,
                        });
                        break;
                    }
                    Exit::Edge { edge, point, .. } => {
                        let er = EdgeRef::new(q, edge);
                        word.push(crossing_for_exit(surface, er));
                        let (nq, nx) = surface.cross_edge(er, &point);
                        q = nq;
                        x = nx;
                    }
                }
            }
        }
    }
    SeparatrixReport { connections, unresolved }
}

/// Point where the level line `tau = m` meets edge `i` of `poly`.
fn level_point(poly: &crate::surface::Polygon, i: usize, v: &PlanarVector, m: &FieldElement) -> PlanarVector {
    let a = poly.vertex(i);
    let u = poly.edge(i);
    let lam = &(m - &tau(v, a)) * &v.cross(&u).inverse().expect("edge not parallel to the level lines");
    a + &u.scale(&lam)
}

fn sorted_unique(mut xs: Vec<FieldElement>) -> Vec<FieldElement> {
    xs.sort();
    xs.dedup();
    xs
}

/// Cylinder decomposition in direction `v`, if every separatrix closes up
/// within `l_max`.
pub fn cylinder_decomposition(surface: &TranslationSurface, v: &PlanarVector, l_max: &Rational) -> DecompositionResult {
    let rep = separatrices(surface, v, l_max);
    if rep.unresolved > 0 || v.is_zero() {
        return DecompositionResult::NotPeriodicAtBound { unresolved: rep.unresolved.max(1) };
    }
    let field = surface.field();
    let vv = v.norm_sq();
    let vv_inv = vv.inverse().expect("nonzero direction");
    let np = surface.polygons().len();

    // cut levels per polygon
    let mut levels: Vec<Vec<FieldElement>> = Vec::with_capacity(np);
    for p in 0..np {
        let poly = surface.polygon(p);
        let mut xs: Vec<FieldElement> = poly.vertices().iter().map(|x| tau(v, x)).collect();
        for c in &rep.connections {
            for s in &c.segments {
                if s.polygon == p {
                    xs.push(s.tau.clone());
                }
            }
        }
        levels.push(sorted_unique(xs));
    }

    // pieces and their entry/exit edges
    let mut pieces: Vec<Piece> = Vec::new();
    let mut piece_index: HashMap<(usize, FieldElement), usize> = HashMap::new();
    for p in 0..np {
        let poly = surface.polygon(p);
        let n = poly.len();
        let taus: Vec<FieldElement> = poly.vertices().iter().map(|x| tau(v, x)).collect();
        for k in 0..levels[p].len().saturating_sub(1) {
            let lo = &levels[p][k];
            let hi = &levels[p][k + 1];
            let mut entry = None;
            let mut exit = None;
            for i in 0..n {
                let (ta, tb) = (&taus[i], &taus[(i + 1) % n]);
                if ta <= lo && tb >= hi {
                    exit = Some(i);
                }
                if tb <= lo && ta >= hi {
                    entry = Some(i);
                }
            }
            let piece = Piece {
                polygon: p,
                tau_lo: lo.clone(),
                tau_hi: hi.clone(),
                entry_edge: entry.expect("piece has an entry edge"),
                exit_edge: exit.expect("piece has an exit edge"),
            };
            piece_index.insert((p, lo.clone()), pieces.len());
            pieces.push(piece);
        }
    }

    // flow map on pieces
    let mut next = vec![usize::MAX; pieces.len()];
    for (idx, pc) in pieces.iter().enumerate() {
        let er = EdgeRef::new(pc.polygon, pc.exit_edge);
        let q = surface.partner(er).polygon;
        let shift = tau(v, surface.gluing_translation(er));
        let lo = &pc.tau_lo + &shift;
        let j = *piece_index.get(&(q, lo)).expect("pieces match across the gluing");
        debug_assert_eq!(pieces[j].tau_hi, &pc.tau_hi + &shift);
        next[idx] = j;
    }

    // cycles
    let mut seen = vec![false; pieces.len()];
    let mut cylinders = Vec::new();
    let half = Rational::new(1.into(), 2.into());
    for start in 0..pieces.len() {
        if seen[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            cyc.push(cur);
            cur = next[cur];
        }
        debug_assert_eq!(cur, start, "piece map is a permutation");
        let dtau = &pieces[start].tau_hi - &pieces[start].tau_lo;
        let mut sigma_sum = field.zero();
        let mut word = Vec::new();
        let mut core_point = None;
        let mut bottom = HashSet::new();
        let mut top = HashSet::new();
        let mut cyl_pieces = Vec::new();
        for &idx in &cyc {
            let pc = &pieces[idx];
            let poly = surface.polygon(pc.polygon);
            let mid = (&pc.tau_lo + &pc.tau_hi).scale(&half);
            let a = level_point(poly, pc.entry_edge, v, &mid);
            let b = level_point(poly, pc.exit_edge, v, &mid);
            sigma_sum += &(&sigma(v, &b) - &sigma(v, &a));
            if core_point.is_none() {
                core_point = Some((pc.polygon, (&a + &b).scale(&field.from_rational(half.clone()))));
            }
            word.push(crossing_for_exit(surface, EdgeRef::new(pc.polygon, pc.exit_edge)));
            for (lvl, set) in [(&pc.tau_lo, &mut bottom), (&pc.tau_hi, &mut top)] {
                let s0 = sigma(v, &level_point(poly, pc.entry_edge, v, lvl));
                let s1 = sigma(v, &level_point(poly, pc.exit_edge, v, lvl));
                for (ci, c) in rep.connections.iter().enumerate() {
                    for seg in &c.segments {
                        if seg.polygon == pc.polygon && &seg.tau == lvl && seg.sigma_start < s1 && seg.sigma_end > s0 {
                            set.insert(ci);
                        }
                    }
                }
            }
            cyl_pieces.push(pc.clone());
        }
        let s = &sigma_sum * &vv_inv;
        let hol = v.scale(&s);
        let circumference_sq = hol.norm_sq();
        let height_sq = &(&dtau * &dtau) * &vv_inv;
        let area = &s * &dtau;
        let mut bottom: Vec<usize> = bottom.into_iter().collect();
        let mut top: Vec<usize> = top.into_iter().collect();
        bottom.sort_unstable();
        top.sort_unstable();
        cylinders.push(Cylinder {
            direction: v.clone(),
            s,
            hol,
            circumference_sq,
            height_sq,
            area,
            dtau,
            core_word: word,
            core_point: core_point.expect("nonempty cycle"),
            pieces: cyl_pieces,
            bottom,
            top,
        });
    }
    DecompositionResult::Cylinders(Decomposition { direction: v.clone(), cylinders, connections: rep.connections })
}

/// A verified periodic direction with its decomposition.
#[derive(Clone, Debug)]
pub struct PeriodicDirection {
    pub direction: PlanarVector,
    pub decomposition: Decomposition,
}

#[derive(Clone, Debug)]
pub struct PeriodicDirections {
    pub directions: Vec<PeriodicDirection>,
    /// Candidates whose decomposition did not close within the verification bound.
    pub unverified: Vec<PlanarVector>,
}

/// Representative of `±v` with angle in `[0, pi)`.
pub fn upper_half(v: &PlanarVector) -> PlanarVector {
    let sy = v.y.sign();
    if sy > 0 || (sy == 0 && v.x.sign() > 0) {
        v.clone()
    } else {
        -v
    }
}

/// Projective key for a nonzero vector in the upper half plane.
fn slope_key(v: &PlanarVector) -> (bool, FieldElement) {
    if v.y.is_zero() {
        (true, v.field().zero())
    } else {
        (false, &v.x * &v.y.inverse().expect("nonzero"))
    }
}

/// Holonomies of straight segments between vertices, of length at most
/// `l_max`, found by unfolding polygons along the rays leaving each corner.
/// Contains all saddle-connection holonomies up to that length.
pub fn candidate_holonomies(surface: &TranslationSurface, l_max: &Rational) -> Vec<PlanarVector> {
    let field = surface.field();
    let l2 = field.from_rational(l_max * l_max);
    let lf = num_traits::ToPrimitive::to_f64(l_max).unwrap_or(f64::INFINITY);
    let mut out: HashSet<PlanarVector> = HashSet::new();
    if !l_max.is_positive() {
        return Vec::new();
    }
    for p0 in 0..surface.polygons().len() {
        let poly0 = surface.polygon(p0);
        let n0 = poly0.len();
        for i0 in 0..n0 {
            let origin = poly0.vertex(i0).clone();
            let a0 = poly0.edge(i0);
            let b0 = -&poly0.edge(i0 + n0 - 1);
            // (polygon, offset of the copy relative to the origin, wedge)
            let mut stack = vec![(p0, -&origin, a0, b0)];
            while let Some((q, off, a, b)) = stack.pop() {
                let poly = surface.polygon(q);
                let m = poly.len();
                let pts: Vec<PlanarVector> = poly.vertices().iter().map(|v| v + &off).collect();
                for d in &pts {
                    if !d.is_zero() && a.cross(d).sign() >= 0 && d.cross(&b).sign() >= 0 && d.norm_sq() <= l2 {
                        out.insert(d.clone());
                    }
                }
                for e in 0..m {
                    let (pp, qq) = (&pts[e], &pts[(e + 1) % m]);
                    if pp.cross(qq).sign() <= 0 {
                        continue;
                    }
                    let na = if a.cross(pp).sign() > 0 { pp.clone() } else { a.clone() };
                    let nb = if qq.cross(&b).sign() > 0 { qq.clone() } else { b.clone() };
                    if na.cross(&nb).sign() <= 0 {
                        continue;
                    }
                    if segment_distance(pp.to_f64(), qq.to_f64()) > lf + 1e-9 {
                        continue;
                    }
                    let er = EdgeRef::new(q, e);
                    let nq = surface.partner(er).polygon;
                    let noff = &off - surface.gluing_translation(er);
                    stack.push((nq, noff, na, nb));
                }
            }
        }
    }
    let mut v: Vec<PlanarVector> = out.into_iter().collect();
    v.sort_by(|a, b| a.norm_sq().cmp(&b.norm_sq()).then_with(|| a.x.cmp(&b.x)).then_with(|| a.y.cmp(&b.y)));
    v
}

/// Distance from the origin to the segment `pq`.
fn segment_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let d = (q.0 - p.0, q.1 - p.1);
    let len2 = d.0 * d.0 + d.1 * d.1;
    let t = if len2 > 0.0 { (-(p.0 * d.0 + p.1 * d.1) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 + t * d.0).hypot(p.1 + t * d.1)
}

/// Periodic directions harvested from candidate holonomies of length at most
/// `l_max`, each verified by a decomposition whose separatrices are traced up
/// to `verify_bound`.
pub fn periodic_directions_with_bound(
    surface: &TranslationSurface,
    l_max: &Rational,
    verify_bound: &Rational,
) -> PeriodicDirections {
    let mut reps: Vec<PlanarVector> = Vec::new();
    let mut keys: HashSet<(bool, FieldElement)> = HashSet::new();
    for c in candidate_holonomies(surface, l_max) {
        let u = upper_half(&c);
        if keys.insert(slope_key(&u)) {
            reps.push(u);
        }
    }
    let mut directions = Vec::new();
    let mut unverified = Vec::new();
    for v in reps {
        match cylinder_decomposition(surface, &v, verify_bound) {
            DecompositionResult::Cylinders(d) => directions.push(PeriodicDirection { direction: v, decomposition: d }),
            DecompositionResult::NotPeriodicAtBound { .. } => unverified.push(v),
        }
    }
    PeriodicDirections { directions, unverified }
}

/// Periodic directions up to `l_max`, verified with separatrices of length
/// up to `4 * l_max`.
pub fn periodic_directions(surface: &TranslationSurface, l_max: &Rational) -> PeriodicDirections {
    let bound = l_max * Rational::from_integer(4.into());
    periodic_directions_with_bound(surface, l_max, &bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{rat_int, Field};
    use crate::surface::square_torus;

    #[test]
    fn torus_horizontal() {
        let f = Field::rationals();
        let t = square_torus(&f);
        let v = PlanarVector::from_ints(&f, 1, 0);
        let rep = separatrices(&t, &v, &rat_int(2));
        assert_eq!(rep.connections.len(), 1);
        assert_eq!(rep.unresolved, 0);
        assert_eq!(rep.connections[0].hol, v);
        let d = cylinder_decomposition(&t, &v, &rat_int(2)).decomposition().unwrap();
        assert_eq!(d.cylinders.len(), 1);
        let c = &d.cylinders[0];
        assert_eq!(c.circumference_sq, f.one());
        assert_eq!(c.height_sq, f.one());
        assert_eq!(c.area, f.one());
    }

    #[test]
    fn torus_slope_half() {
        let f = Field::rationals();
        let t = square_torus(&f);
        let v = PlanarVector::from_ints(&f, 2, 1);
        let d = cylinder_decomposition(&t, &v, &rat_int(10)).decomposition().unwrap();
        assert_eq!(d.cylinders.len(), 1);
        let c = &d.cylinders[0];
        assert_eq!(c.circumference_sq, f.from_i64(5));
        // height * circumference = area = 1
        assert_eq!(&c.height_sq * &c.circumference_sq, f.one());
        assert_eq!(c.area, f.one());
    }

    #[test]
    fn torus_irrational_unresolved() {
        let g = Field::new(&[-1, -1, 1], (rat_int(1), rat_int(2))).unwrap();
        let t = square_torus(&g);
        let v = PlanarVector::new(g.one(), g.generator());
        let rep = separatrices(&t, &v, &rat_int(10));
        assert!(rep.connections.is_empty());
        assert!(rep.unresolved > 0);
        assert!(matches!(cylinder_decomposition(&t, &v, &rat_int(10)), DecompositionResult::NotPeriodicAtBound { .. }));
    }

    #[test]
    fn torus_periodic_directions() {
        let f = Field::rationals();
        let t = square_torus(&f);
        let pd = periodic_directions(&t, &rat_int(2));
        let dirs: Vec<PlanarVector> = pd.directions.iter().map(|d| d.direction.clone()).collect();
        for (x, y) in [(1, 0), (0, 1), (1, 1), (-1, 1)] {
            assert!(dirs.contains(&PlanarVector::from_ints(&f, x, y)), "missing ({x},{y})");
        }
        assert!(periodic_directions(&t, &rat_int(0)).directions.is_empty());
        for d in &pd.directions {
            assert_eq!(d.decomposition.total_area(), *t.area());
        }
    }
}
