//! Straight-line flow on surfaces and covers.
//!
//! A direction is a nonzero field vector `v`; the flow parameter `s` is
//! measured in units of `v`, so the point at parameter `s` is `x + s v` and
//! the flat length travelled is `s |v|`. Length budgets are compared through
//! squares and stay exact.

use thiserror::Error;

use crate::cover::CoverSpec;
use crate::numfield::{FieldElement, FieldError, PlanarVector, Rational};
use crate::surface::{Crossing, EdgeCrossingWord, EdgeRef, Location, Polygon, RelativeCycle, TranslationSurface};

pub const DEFAULT_CROSSING_LIMIT: usize = 1_000_000;

/// Tolerance on crossing parameters for float directions.
pub const FLOAT_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("flow hits marked vertex class {vertex_class} at parameter {time}")]
    SingularHit { time: FieldElement, vertex_class: usize },
    #[error("degenerate start: {0}")]
    DegenerateStart(String),
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("crossing budget of {0} exhausted before the requested time")]
    CrossingLimit(usize),
    #[error("transversal is parallel to the flow direction")]
    TransversalParallel,
    #[error("backward orbit {orbit} did not reach the transversal within {crossings} crossings")]
    NoReturnAtBudget { orbit: String, crossings: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Budget {
    /// Flow parameter in units of the direction vector.
    Time(FieldElement),
    /// Flat length; the trace stops at the last crossing at or before it.
    Length(Rational),
    /// Number of edge crossings.
    Crossings(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stop {
    Budget,
    SingularHit { time: FieldElement, vertex_class: usize },
    CrossingLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub polygon: usize,
    pub entry: PlanarVector,
    pub exit: PlanarVector,
    /// Flow parameter at `exit`.
    pub s_exit: FieldElement,
    /// Edge left through and the signed crossing, if the segment ends on an edge.
    pub crossing: Option<(EdgeRef, Crossing)>,
    /// Cover level while on this segment.
    pub level: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub start_polygon: usize,
    pub start: PlanarVector,
    pub start_level: i64,
    pub direction: PlanarVector,
    pub segments: Vec<Segment>,
    pub elapsed: FieldElement,
    pub stop: Stop,
    pub end_polygon: usize,
    pub end: PlanarVector,
    pub end_level: i64,
}

impl Trajectory {
    pub fn word(&self) -> EdgeCrossingWord {
        self.segments.iter().filter_map(|s| s.crossing.map(|c| c.1)).collect()
    }

    pub fn crossings(&self) -> usize {
        self.segments.iter().filter(|s| s.crossing.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.stop == Stop::Budget
    }

    pub fn require_complete(self) -> Result<Trajectory, FlowError> {
        match &self.stop {
            Stop::Budget => Ok(self),
            Stop::SingularHit { time, vertex_class } => {
                Err(FlowError::SingularHit { time: time.clone(), vertex_class: *vertex_class })
            }
            Stop::CrossingLimit => Err(FlowError::CrossingLimit(DEFAULT_CROSSING_LIMIT)),
        }
    }
}

/// Where a ray leaves a convex polygon.
#[derive(Clone, Debug)]
pub(crate) enum Exit {
    Edge { edge: usize, s: FieldElement, point: PlanarVector },
    Vertex { vertex: usize, s: FieldElement },
}

/// Exit of the ray `x + s v`, `s > 0`, from `poly`; `x` must be in the
/// closed polygon with the ray pointing inward.
pub(crate) fn exit_polygon(poly: &Polygon, x: &PlanarVector, v: &PlanarVector) -> Exit {
    if let Some(e) = exit_polygon_fast(poly, x, v) {
        return e;
    }
    let n = poly.len();
    // candidates: edges the ray leaves through, s_i = num_i / den_i with den_i < 0
    let mut best: Vec<(usize, FieldElement, FieldElement)> = Vec::new();
    for i in 0..n {
        let u = poly.edge(i);
        let den = u.cross(v);
        if den.sign() >= 0 {
            continue;
        }
        let num = u.cross(&(poly.vertex(i) - x));
        match best.first() {
            None => best.push((i, num, den)),
            Some((_, bn, bd)) => {
                // num/den vs bn/bd, both denominators negative
                let c = (&(&num * bd) - &(bn * &den)).sign();
                if c < 0 {
                    best.clear();
                    best.push((i, num, den));
                } else if c == 0 {
                    best.push((i, num, den));
                }
            }
        }
    }
    let (i, num, den) = best[0].clone();
    let s = &num * &den.inverse().expect("nonzero denominator");
    if best.len() > 1 {
        let (a, b) = (best[0].0, best[1].0);
        let vertex = if (a + 1) % n == b { b } else { a };
        return Exit::Vertex { vertex, s };
    }
    let point = x + &v.scale(&s);
    if &point == poly.vertex(i) {
        return Exit::Vertex { vertex: i, s };
    }
    if &point == poly.vertex(i + 1) {
        return Exit::Vertex { vertex: (i + 1) % n, s };
    }
    Exit::Edge { edge: i, s, point }
}

/// Guesses the exit edge in floating point and confirms it exactly: an
/// outward edge whose endpoints lie strictly on opposite sides of the line
/// is the exit, through its interior.
fn exit_polygon_fast(poly: &Polygon, x: &PlanarVector, v: &PlanarVector) -> Option<Exit> {
    let n = poly.len();
    let (xf, vf) = (x.to_f64(), v.to_f64());
    let pts: Vec<(f64, f64)> = poly.vertices().iter().map(|p| p.to_f64()).collect();
    let mut best: Option<(usize, f64)> = None;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let u = (q.0 - p.0, q.1 - p.1);
        let den = u.0 * vf.1 - u.1 * vf.0;
        if den >= 0.0 {
            continue;
        }
        let num = u.0 * (p.1 - xf.1) - u.1 * (p.0 - xf.0);
        let s = num / den;
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i, s));
        }
    }
    let (i, _) = best?;
    let u = poly.edge(i);
    let den = u.cross(v);
    if den.sign() >= 0 {
        return None;
    }
    let a = v.cross(&(poly.vertex(i) - x)).sign();
    let b = v.cross(&(poly.vertex(i + 1) - x)).sign();
    if a * b >= 0 {
        return None;
    }
    let num = u.cross(&(poly.vertex(i) - x));
    if num.sign() >= 0 {
        return None;
    }
    let s = &num * &den.inverse().ok()?;
    let point = x + &v.scale(&s);
    Some(Exit::Edge { edge: i, s, point })
}

/// Signed crossing for leaving a polygon through `edge`: the polygon lies to
/// the left of its edge, so leaving through the canonical representative goes
/// left to right.
pub(crate) fn crossing_for_exit(surface: &TranslationSurface, edge: EdgeRef) -> Crossing {
    let (class, canon) = surface.edge_class(edge);
    Crossing { class, sign: -canon }
}

/// Normalizes a start point so that the ray from it points into the polygon.
pub fn normalize_start(
    surface: &TranslationSurface,
    polygon: usize,
    x: &PlanarVector,
    v: &PlanarVector,
) -> Result<(usize, PlanarVector), FlowError> {
    if v.is_zero() {
        return Err(FlowError::ZeroDirection);
    }
    if polygon >= surface.polygons().len() {
        return Err(FlowError::DegenerateStart(format!("no polygon {polygon}")));
    }
    let poly = surface.polygon(polygon);
    match poly.locate(x) {
        Location::Interior => Ok((polygon, x.clone())),
        Location::Outside => Err(FlowError::DegenerateStart("point lies outside its polygon".into())),
        Location::Vertex(_) => Err(FlowError::DegenerateStart("start is a marked point".into())),
        Location::Edge(i) => {
            let s = poly.edge(i).cross(v).sign();
            if s > 0 {
                Ok((polygon, x.clone()))
            } else if s < 0 {
                Ok(surface.cross_edge(EdgeRef::new(polygon, i), x))
            } else {
                Err(FlowError::DegenerateStart("start lies on an edge parallel to the direction".into()))
            }
        }
    }
}

/// Level increment from crossing `class` in direction `v`, computed from the
/// geometry: crossing the canonical edge vector from its right to its left
/// adds the class weight.
fn level_step(surface: &TranslationSurface, w: &RelativeCycle, class: usize, v: &PlanarVector) -> i64 {
    let wt = w.weight(class);
    if wt == 0 {
        return 0;
    }
    let u = surface.edge_vector(class);
    wt * u.cross(v).sign() as i64
}

fn trace_impl(
    surface: &TranslationSurface,
    w: Option<&RelativeCycle>,
    polygon: usize,
    x: &PlanarVector,
    level: i64,
    v: &PlanarVector,
    budget: &Budget,
) -> Result<Trajectory, FlowError> {
    let (mut p, mut cur) = normalize_start(surface, polygon, x, v)?;
    let field = surface.field();
    let zero = field.zero();
    let mut elapsed = zero.clone();
    let mut lvl = level;
    // a start on an edge facing away from v belongs to the sheet across it
    if let (Some(w), Location::Edge(i)) = (w, surface.polygon(polygon).locate(x)) {
        if surface.polygon(polygon).edge(i).cross(v).sign() < 0 {
            let c = crossing_for_exit(surface, EdgeRef::new(polygon, i));
            lvl += c.sign as i64 * w.weight(c.class);
        }
    }
    let mut segments = Vec::new();
    let vv = v.norm_sq();
    let limit = match budget {
        Budget::Crossings(n) => (*n).min(DEFAULT_CROSSING_LIMIT),
        _ => DEFAULT_CROSSING_LIMIT,
    };
    let length_sq = match budget {
        Budget::Length(l) => Some(field.from_rational(l * l)),
        _ => None,
    };
    let mut crossings = 0usize;
    let stop;
    if let Budget::Time(t) = budget {
        if t.sign() < 0 {
            return Err(FlowError::DegenerateStart("negative time budget".into()));
        }
    }
    loop {
        if matches!(budget, Budget::Time(t) if *t == elapsed) {
            stop = Stop::Budget;
            break;
        }
        if crossings >= limit {
            stop = if matches!(budget, Budget::Crossings(n) if *n <= DEFAULT_CROSSING_LIMIT) {
                Stop::Budget
            } else {
                Stop::CrossingLimit
            };
            break;
        }
        let poly = surface.polygon(p);
        let ex = exit_polygon(poly, &cur, v);
        let s_step = match &ex {
            Exit::Edge { s, .. } | Exit::Vertex { s, .. } => s.clone(),
        };
        let s_exit = &elapsed + &s_step;
        if let Budget::Time(t) = budget {
            if s_exit > *t {
                let end = &cur + &v.scale(&(t - &elapsed));
                segments.push(Segment {
                    polygon: p,
                    entry: cur.clone(),
                    exit: end.clone(),
                    s_exit: t.clone(),
                    crossing: None,
                    level: lvl,
                });
                elapsed = t.clone();
                cur = end;
                stop = Stop::Budget;
                break;
            }
        }
        if let Some(l2) = &length_sq {
            if &(&s_exit * &s_exit) * &vv > *l2 {
                stop = Stop::Budget;
                break;
            }
        }
        match ex {
            Exit::Vertex { vertex, .. } => {
                let vertex_class = surface.corner_class(p, vertex);
                segments.push(Segment {
                    polygon: p,
                    entry: cur.clone(),
                    exit: poly.vertex(vertex).clone(),
                    s_exit: s_exit.clone(),
                    crossing: None,
                    level: lvl,
                });
                elapsed = s_exit.clone();
                cur = poly.vertex(vertex).clone();
                stop = Stop::SingularHit { time: s_exit, vertex_class };
                break;
            }
            Exit::Edge { edge, point, .. } => {
                let er = EdgeRef::new(p, edge);
                let c = crossing_for_exit(surface, er);
                segments.push(Segment {
                    polygon: p,
                    entry: cur.clone(),
                    exit: point.clone(),
                    s_exit: s_exit.clone(),
                    crossing: Some((er, c)),
                    level: lvl,
                });
                if let Some(w) = w {
                    lvl += level_step(surface, w, c.class, v);
                }
                let (q, next) = surface.cross_edge(er, &point);
                p = q;
                cur = next;
                elapsed = s_exit;
                crossings += 1;
            }
        }
    }
    Ok(Trajectory {
        start_polygon: polygon,
        start: x.clone(),
        start_level: level,
        direction: v.clone(),
        segments,
        elapsed,
        stop,
        end_polygon: p,
        end: cur,
        end_level: lvl,
    })
}

/// Flow on the base surface.
pub fn trace(
    surface: &TranslationSurface,
    polygon: usize,
    x: &PlanarVector,
    v: &PlanarVector,
    budget: &Budget,
) -> Result<Trajectory, FlowError> {
    trace_impl(surface, None, polygon, x, 0, v, budget)
}

/// A point of the cover: a base point and the index of its sheet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverPoint {
    pub polygon: usize,
    pub point: PlanarVector,
    pub level: i64,
}

/// Flow on the cover; levels are tracked along the way.
pub fn trace_cover(
    cover: &CoverSpec,
    start: &CoverPoint,
    v: &PlanarVector,
    budget: &Budget,
) -> Result<Trajectory, FlowError> {
    trace_impl(cover.base(), Some(cover.w()), start.polygon, &start.point, start.level, v, budget)
}

// ---------------------------------------------------------------------------
// Float directions (diagnostic only).

#[derive(Clone, Debug, PartialEq)]
pub struct FloatSegment {
    pub polygon: usize,
    pub entry: (f64, f64),
    pub exit: (f64, f64),
    pub t_exit: f64,
    pub level: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloatTrajectory {
    pub segments: Vec<FloatSegment>,
    pub elapsed: f64,
    /// Set when two exit parameters were within tolerance, i.e. the path
    /// passed within rounding distance of a vertex.
    pub near_vertex: bool,
    pub approximate: bool,
    pub end_level: i64,
}

/// Unit-speed flow at angle `theta` in floating point. Results are labeled
/// approximate; near-vertex passages stop the trace.
pub fn trace_float(
    surface: &TranslationSurface,
    w: Option<&RelativeCycle>,
    polygon: usize,
    x: (f64, f64),
    theta: f64,
    t_max: f64,
    max_crossings: usize,
) -> FloatTrajectory {
    let (dx, dy) = (theta.cos(), theta.sin());
    let polys: Vec<Vec<(f64, f64)>> = surface.polygons().iter().map(|p| p.vertices().iter().map(|v| v.to_f64()).collect()).collect();
    let mut p = polygon;
    let mut cur = x;
    let mut t = 0.0;
    let mut level = 0i64;
    let mut segments = Vec::new();
    let mut near_vertex = false;
    for _ in 0..max_crossings.max(1) {
        let vs = &polys[p];
        let n = vs.len();
        let mut cands: Vec<(f64, usize)> = Vec::new();
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            let u = (b.0 - a.0, b.1 - a.1);
            let den = u.0 * dy - u.1 * dx;
            if den >= 0.0 {
                continue;
            }
            let num = u.0 * (a.1 - cur.1) - u.1 * (a.0 - cur.0);
            cands.push(((num / den).max(0.0), i));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        if cands.is_empty() {
            near_vertex = true;
            break;
        }
        let (s, edge) = cands[0];
        if cands.len() > 1 && (cands[1].0 - s).abs() <= FLOAT_TOLERANCE * (1.0 + s) {
            near_vertex = true;
        }
        if t + s >= t_max {
            let r = t_max - t;
            let end = (cur.0 + r * dx, cur.1 + r * dy);
            segments.push(FloatSegment { polygon: p, entry: cur, exit: end, t_exit: t_max, level });
            t = t_max;
            break;
        }
        let exit = (cur.0 + s * dx, cur.1 + s * dy);
        segments.push(FloatSegment { polygon: p, entry: cur, exit, t_exit: t + s, level });
        if near_vertex {
            t += s;
            break;
        }
        let er = EdgeRef::new(p, edge);
        let c = crossing_for_exit(surface, er);
        if let Some(w) = w {
            level += c.sign as i64 * w.weight(c.class);
        }
        let tr = surface.gluing_translation(er).to_f64();
        cur = (exit.0 + tr.0, exit.1 + tr.1);
        p = surface.partner(er).polygon;
        t += s;
    }
    FloatTrajectory { segments, elapsed: t, near_vertex, approximate: true, end_level: level }
}

// ---------------------------------------------------------------------------

/// Running maximum of `|level - start level|` at each checkpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeProfile {
    pub checkpoints: Vec<FieldElement>,
    pub max_abs_level: Vec<i64>,
    pub final_level: i64,
    pub crossings: usize,
}

/// Records how far the cover trajectory from `start` wanders in level.
/// Checkpoints are flow parameters in units of `v`, sorted ascending.
pub fn boundedness_probe(
    cover: &CoverSpec,
    start: &CoverPoint,
    v: &PlanarVector,
    checkpoints: &[FieldElement],
) -> Result<ProbeProfile, FlowError> {
    let Some(t_max) = checkpoints.iter().max().cloned() else {
        return Ok(ProbeProfile { checkpoints: vec![], max_abs_level: vec![], final_level: start.level, crossings: 0 });
    };
    let tr = trace_cover(cover, start, v, &Budget::Time(t_max))?.require_complete()?;
    let mut sorted: Vec<FieldElement> = checkpoints.to_vec();
    sorted.sort();
    // (entry parameter, level) for every piece of the path, ending with the
    // state after the last crossing
    let zero = cover.base().field().zero();
    let mut states: Vec<(FieldElement, i64)> = Vec::with_capacity(tr.segments.len() + 1);
    let mut entry = zero;
    for s in &tr.segments {
        states.push((entry, s.level));
        entry = s.s_exit.clone();
    }
    states.push((tr.elapsed.clone(), tr.end_level));
    let mut out = Vec::with_capacity(sorted.len());
    let mut running = 0i64;
    let mut idx = 0usize;
    for cp in &sorted {
        while idx < states.len() && states[idx].0 <= *cp {
            running = running.max((states[idx].1 - start.level).abs());
            idx += 1;
        }
        out.push(running);
    }
    Ok(ProbeProfile { checkpoints: sorted, max_abs_level: out, final_level: tr.end_level, crossings: tr.crossings() })
}

// ---------------------------------------------------------------------------
// First return to a transversal.

/// An open segment `start + lambda (end - start)`, `0 < lambda < 1`, whose
/// interior lies inside one polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transversal {
    pub polygon: usize,
    pub start: PlanarVector,
    pub end: PlanarVector,
}

impl Transversal {
    pub fn point(&self, lambda: &FieldElement) -> PlanarVector {
        &self.start + &(&self.end - &self.start).scale(lambda)
    }
}

/// First arrival on the transversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arrival {
    Hit { lambda: FieldElement, s: FieldElement, level_change: i64, word: EdgeCrossingWord },
    Endpoint,
    Vertex,
    Limit,
}

fn check_transversal(surface: &TranslationSurface, tr: &Transversal, v: &PlanarVector) -> Result<(), FlowError> {
    if v.is_zero() {
        return Err(FlowError::ZeroDirection);
    }
    let d = &tr.end - &tr.start;
    if d.is_zero() || d.cross(v).is_zero() {
        return Err(FlowError::TransversalParallel);
    }
    let poly = surface
        .polygons()
        .get(tr.polygon)
        .ok_or_else(|| FlowError::DegenerateStart(format!("no polygon {}", tr.polygon)))?;
    let half = tr.point(&surface.field().from_ratio(1, 2));
    if poly.locate(&tr.start) == Location::Outside || poly.locate(&tr.end) == Location::Outside || !poly.contains_strictly(&half) {
        return Err(FlowError::DegenerateStart("transversal must cross the polygon interior".into()));
    }
    Ok(())
}

/// Flows from `(polygon, x)` until the path meets the open transversal at a
/// positive parameter. `x` must be in the closed polygon with `v` pointing in.
fn flow_to_transversal(
    surface: &TranslationSurface,
    w: Option<&RelativeCycle>,
    polygon: usize,
    x: &PlanarVector,
    v: &PlanarVector,
    tr: &Transversal,
    limit: usize,
) -> Arrival {
    let d = &tr.end - &tr.start;
    let dv = d.cross(v);
    let field = surface.field();
    let one = field.one();
    let mut p = polygon;
    let mut cur = x.clone();
    let mut elapsed = field.zero();
    let mut level = 0i64;
    let mut word = Vec::new();
    for _ in 0..=limit {
        let poly = surface.polygon(p);
        let ex = exit_polygon(poly, &cur, v);
        let s_step = match &ex {
            Exit::Edge { s, .. } | Exit::Vertex { s, .. } => s.clone(),
        };
        if p == tr.polygon {
            // cur + sigma v = start + lambda d
            let sigma = (&d.cross(&(&tr.start - &cur))).try_div(&dv).expect("not parallel");
            if sigma.is_positive() && sigma <= s_step {
                let lambda = (&(&cur - &tr.start).cross(v)).try_div(&dv).expect("not parallel");
                if lambda.is_zero() || lambda == one {
                    return Arrival::Endpoint;
                }
                if lambda.is_positive() && lambda < one {
                    return Arrival::Hit { lambda, s: &elapsed + &sigma, level_change: level, word };
                }
            }
        }
        match ex {
            Exit::Vertex { .. } => return Arrival::Vertex,
            Exit::Edge { edge, point, .. } => {
                let er = EdgeRef::new(p, edge);
                let c = crossing_for_exit(surface, er);
                if let Some(w) = w {
                    level += level_step(surface, w, c.class, v);
                }
                word.push(c);
                let (q, next) = surface.cross_edge(er, &point);
                p = q;
                cur = next;
                elapsed += &s_step;
            }
        }
    }
    Arrival::Limit
}

/// First-return map to a transversal, decorated with cover displacements.
/// Intervals are measured in the transversal parameter `lambda`, so their
/// lengths sum to 1 (one transversal length).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IetData {
    pub transversal: Transversal,
    pub direction: PlanarVector,
    /// Left endpoints of the intervals, ascending, starting at 0.
    pub starts: Vec<FieldElement>,
    pub lengths: Vec<FieldElement>,
    /// Interval `j` is translated by `shifts[j]` in `lambda`.
    pub shifts: Vec<FieldElement>,
    /// `permutation[j]` is the position of the image of interval `j`.
    pub permutation: Vec<usize>,
    pub displacements: Vec<i64>,
    /// Return times in units of the direction vector.
    pub return_times: Vec<FieldElement>,
}

impl IetData {
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Interval strictly containing `lambda`, if any.
    pub fn interval_of(&self, lambda: &FieldElement) -> Option<usize> {
        let j = self.starts.iter().rposition(|s| s < lambda)?;
        let end = &self.starts[j] + &self.lengths[j];
        (*lambda < end).then_some(j)
    }

    /// One step of the skew product: new parameter and displacement.
    pub fn apply(&self, lambda: &FieldElement) -> Option<(FieldElement, i64)> {
        let j = self.interval_of(lambda)?;
        Some((lambda + &self.shifts[j], self.displacements[j]))
    }
}

fn backward_cut(
    surface: &TranslationSurface,
    polygon: usize,
    x: &PlanarVector,
    back: &PlanarVector,
    tr: &Transversal,
    limit: usize,
    orbit: String,
) -> Result<Option<FieldElement>, FlowError> {
    match flow_to_transversal(surface, None, polygon, x, back, tr, limit) {
        Arrival::Hit { lambda, .. } => Ok(Some(lambda)),
        Arrival::Endpoint | Arrival::Vertex => Ok(None),
        Arrival::Limit => Err(FlowError::NoReturnAtBudget { orbit, crossings: limit }),
    }
}

/// Extracts the first-return IET of the flow in direction `v` to `tr`.
/// Cut points are the first backward hits of every separatrix and of both
/// transversal endpoints. Each interval's translation and displacement come
/// from its midpoint and are checked at its quarter points.
pub fn first_return_iet(
    cover: &CoverSpec,
    tr: &Transversal,
    v: &PlanarVector,
    limit: usize,
) -> Result<IetData, FlowError> {
    let surface = cover.base();
    check_transversal(surface, tr, v)?;
    let field = surface.field();
    let back = -v;
    let mut cuts = vec![field.zero(), field.one()];
    for p in 0..surface.polygons().len() {
        let poly = surface.polygon(p);
        let n = poly.len();
        for i in 0..n {
            let out = poly.edge(i);
            let inc = poly.edge(i + n - 1);
            if out.cross(&back).sign() <= 0 || inc.cross(&back).sign() <= 0 {
                continue;
            }
            if let Some(l) = backward_cut(surface, p, poly.vertex(i), &back, tr, limit, format!("corner {p}.{i}"))? {
                cuts.push(l);
            }
        }
    }
    for (name, e) in [("transversal start", &tr.start), ("transversal end", &tr.end)] {
        match normalize_start(surface, tr.polygon, e, &back) {
            Ok((p, x)) => {
                if let Some(l) = backward_cut(surface, p, &x, &back, tr, limit, name.to_string())? {
                    cuts.push(l);
                }
            }
            Err(FlowError::DegenerateStart(_)) => {}
            Err(e) => return Err(e),
        }
    }
    cuts.sort();
    cuts.dedup();
    let quarter = Rational::new(1.into(), 4.into());
    let half = Rational::new(1.into(), 2.into());
    let three = Rational::new(3.into(), 4.into());
    let mut starts = Vec::new();
    let mut lengths = Vec::new();
    let mut shifts = Vec::new();
    let mut displacements = Vec::new();
    let mut return_times = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let len = b - a;
        let mut seen: Option<(FieldElement, i64, FieldElement)> = None;
        for f in [&half, &quarter, &three] {
            let lam = a + &len.scale(f);
            let x = tr.point(&lam);
            let arr = flow_to_transversal(surface, Some(cover.w()), tr.polygon, &x, v, tr, limit);
            let Arrival::Hit { lambda, s, level_change, .. } = arr else {
                return Err(FlowError::NoReturnAtBudget { orbit: format!("interior point {lam}"), crossings: limit });
            };
            let got = (&lambda - &lam, level_change, s);
            match &seen {
                None => seen = Some(got),
                Some(prev) if *prev == got => {}
                Some(_) => {
                    return Err(FlowError::DegenerateStart(format!("return map not a translation on ({a}, {b})")));
                }
            }
        }
        let (shift, disp, time) = seen.expect("three samples");
        starts.push(a.clone());
        lengths.push(len);
        shifts.push(shift);
        displacements.push(disp);
        return_times.push(time);
    }
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&i, &j| (&starts[i] + &shifts[i]).cmp(&(&starts[j] + &shifts[j])));
    let mut permutation = vec![0; starts.len()];
    for (pos, &j) in order.iter().enumerate() {
        permutation[j] = pos;
    }
    Ok(IetData { transversal: tr.clone(), direction: v.clone(), starts, lengths, shifts, permutation, displacements, return_times })
}

/// Successive hits of the transversal by the cover flow from parameter
/// `lambda`, as `(lambda, level)` pairs; stops early at a singular arrival.
pub fn transversal_hits(
    cover: &CoverSpec,
    tr: &Transversal,
    v: &PlanarVector,
    lambda: &FieldElement,
    count: usize,
    limit: usize,
) -> Result<Vec<(FieldElement, i64)>, FlowError> {
    check_transversal(cover.base(), tr, v)?;
    let mut out = Vec::new();
    let mut lam = lambda.clone();
    let mut level = 0;
    for _ in 0..count {
        let x = tr.point(&lam);
        match flow_to_transversal(cover.base(), Some(cover.w()), tr.polygon, &x, v, tr, limit) {
            Arrival::Hit { lambda, level_change, .. } => {
                level += level_change;
                lam = lambda;
                out.push((lam.clone(), level));
            }
            Arrival::Limit => {
                return Err(FlowError::NoReturnAtBudget { orbit: format!("point {lam}"), crossings: limit })
            }
            Arrival::Endpoint | Arrival::Vertex => break,
        }
    }
    Ok(out)
}
