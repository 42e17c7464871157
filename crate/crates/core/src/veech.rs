//! Finite pieces of Veech groups: enumeration by entry bound, orbit
//! approximation of directions, cusp excursions and strip approximation.

use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;
use thiserror::Error;

use crate::cover::{CoverSpec, LiftClass};
use crate::cylinders::{Decomposition, Direction};
use crate::numfield::{FieldElement, Mat2, PlanarVector, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VeechError {
    #[error("matrix does not have determinant 1")]
    NotUnimodular,
    #[error("no strips supplied")]
    EmptyStripFamily,
    #[error("strips do not share a common k")]
    MixedK,
    #[error("eps must lie strictly between 0 and 1")]
    BadEps,
}

/// A determinant-one matrix with the generator word that produced it.
/// Letters are `i + 1` for generator `i` and `-(i + 1)` for its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub m: Mat2,
    pub word: Vec<i32>,
}

impl GroupElement {
    pub fn new(m: Mat2) -> Result<GroupElement, VeechError> {
        let one = m.field().one();
        if m.det() != one {
            return Err(VeechError::NotUnimodular);
        }
        Ok(GroupElement { m, word: Vec::new() })
    }

    pub fn identity(field: &crate::numfield::Field) -> GroupElement {
        GroupElement { m: Mat2::identity(field), word: Vec::new() }
    }

    /// Generator number `index`, validated.
    pub fn generator(m: Mat2, index: usize) -> Result<GroupElement, VeechError> {
        let mut g = GroupElement::new(m)?;
        g.word = vec![index as i32 + 1];
        Ok(g)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { m: self.m.inverse_sl2(), word: self.word.iter().rev().map(|l| -l).collect() }
    }

    /// `self * other`, with the word freely reduced.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let mut word = self.word.clone();
        for &l in &other.word {
            if word.last() == Some(&-l) {
                word.pop();
            } else {
                word.push(l);
            }
        }
        GroupElement { m: self.m.mul(&other.m), word }
    }

    pub fn apply(&self, v: &PlanarVector) -> PlanarVector {
        self.m.apply(v)
    }

    /// Largest absolute entry, exact.
    pub fn max_abs_entry(&self) -> FieldElement {
        let m = &self.m;
        [&m.a, &m.b, &m.c, &m.d].into_iter().map(|e| e.abs()).max().expect("four entries")
    }
}

/// Float 2x2 matrix `[a, b, c, d]`.
pub type FloatMat = [f64; 4];

pub fn g_t(t: f64) -> FloatMat {
    [t.exp(), 0.0, 0.0, (-t).exp()]
}

pub fn r_theta(theta: f64) -> FloatMat {
    let (s, c) = theta.sin_cos();
    [c, -s, s, c]
}

pub fn float_mul(p: &FloatMat, q: &FloatMat) -> FloatMat {
    [
        p[0] * q[0] + p[1] * q[2],
        p[0] * q[1] + p[1] * q[3],
        p[2] * q[0] + p[3] * q[2],
        p[2] * q[1] + p[3] * q[3],
    ]
}

/// `Im(i.g)` for the right action `z.g = (dz - b)/(-cz + a)`.
pub fn height(g: &FloatMat) -> f64 {
    1.0 / (g[0] * g[0] + g[2] * g[2])
}

/// Enumerated group elements together with the cutoff used.
#[derive(Clone, Debug)]
pub struct GroupSet {
    pub elements: Vec<GroupElement>,
    pub radius: Rational,
    pub projective: bool,
}

fn key(m: &Mat2, projective: bool) -> Mat2 {
    if !projective {
        return m.clone();
    }
    let lead = [&m.a, &m.b, &m.c, &m.d].into_iter().find(|e| !e.is_zero()).expect("invertible");
    if lead.is_negative() {
        m.neg()
    } else {
        m.clone()
    }
}

/// Breadth-first products of the generators and their inverses, keeping
/// elements whose entries are at most `radius` in absolute value. The search
/// only extends elements inside the bound.
pub fn enumerate_group(generators: &[GroupElement], radius: &Rational, projective: bool) -> GroupSet {
    let letters: Vec<GroupElement> = generators.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
    let id = match generators.first() {
        Some(g) => GroupElement::identity(g.m.field()),
        None => GroupElement::identity(&crate::numfield::Field::rationals()),
    };
    let r = id.m.field().from_rational(radius.clone());
    let mut seen = HashSet::new();
    seen.insert(key(&id.m, projective));
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in &letters {
            let h = g.compose(s);
            if h.max_abs_entry() > r {
                continue;
            }
            if seen.insert(key(&h.m, projective)) {
                out.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    GroupSet { elements: out, radius: radius.clone(), projective }
}

/// All distinct products of at most `length` letters.
pub fn enumerate_by_word_length(generators: &[GroupElement], length: usize, projective: bool) -> Vec<GroupElement> {
    let letters: Vec<GroupElement> = generators.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
    let id = match generators.first() {
        Some(g) => GroupElement::identity(g.m.field()),
        None => return vec![GroupElement::identity(&crate::numfield::Field::rationals())],
    };
    let mut seen = HashSet::new();
    seen.insert(key(&id.m, projective));
    let mut out = vec![id.clone()];
    let mut frontier = vec![id];
    for _ in 0..length {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &letters {
                let h = g.compose(s);
                if seen.insert(key(&h.m, projective)) {
                    out.push(h.clone());
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum WitnessValue {
    /// `value^2` as an exact field element.
    ExactSquared(FieldElement),
    Approximate(f64),
}

impl WitnessValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            WitnessValue::ExactSquared(v) => v.to_f64().max(0.0).sqrt(),
            WitnessValue::Approximate(v) => *v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ApproxWitness {
    pub gamma: GroupElement,
    pub image: PlanarVector,
    pub value: WitnessValue,
    pub theta: Direction,
    pub d: Rational,
}

#[derive(Clone, Debug)]
pub struct ApproxCount {
    pub count: usize,
    pub witnesses: Vec<ApproxWitness>,
    pub min_value: Option<f64>,
}

fn rational_f64(q: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

fn float_dir(theta: &Direction) -> (f64, f64) {
    match theta {
        Direction::Exact(u) => {
            let (x, y) = u.to_f64();
            let n = x.hypot(y);
            (x / n, y / n)
        }
        Direction::Float { x, y, .. } => {
            let n = x.hypot(*y);
            (x / n, y / n)
        }
    }
}

/// `(||y|| |e_theta ^ y|)^2` for an exact direction `u`.
pub fn approx_value_sq(u: &PlanarVector, y: &PlanarVector) -> FieldElement {
    let c = u.cross(y);
    let num = &y.norm_sq() * &c.square();
    num.try_div(&u.norm_sq()).expect("nonzero direction")
}

/// Float value `||y|| |e_theta ^ y|`.
pub fn approx_value_f64(e: (f64, f64), y: (f64, f64)) -> f64 {
    y.0.hypot(y.1) * (e.0 * y.1 - e.1 * y.0).abs()
}

/// Counts `gamma` with `||gamma x|| |e_theta ^ gamma x| < d`.
pub fn well_approx_count(x: &PlanarVector, gammas: &[GroupElement], theta: &Direction, d: &Rational) -> ApproxCount {
    let mut witnesses = Vec::new();
    let mut min_value: Option<f64> = None;
    match theta {
        Direction::Exact(u) => {
            let d2 = x.field().from_rational(d * d);
            for g in gammas {
                let y = g.apply(x);
                let v2 = approx_value_sq(u, &y);
                let vf = v2.to_f64().max(0.0).sqrt();
                min_value = Some(min_value.map_or(vf, |m: f64| m.min(vf)));
                if v2 < d2 {
                    witnesses.push(ApproxWitness {
                        gamma: g.clone(),
                        image: y,
                        value: WitnessValue::ExactSquared(v2),
                        theta: theta.clone(),
                        d: d.clone(),
                    });
                }
            }
        }
        Direction::Float { .. } => {
            let e = float_dir(theta);
            let df = rational_f64(d);
            for g in gammas {
                let y = g.apply(x);
                let v = approx_value_f64(e, y.to_f64());
                min_value = Some(min_value.map_or(v, |m: f64| m.min(v)));
                if v < df {
                    witnesses.push(ApproxWitness {
                        gamma: g.clone(),
                        image: y,
                        value: WitnessValue::Approximate(v),
                        theta: theta.clone(),
                        d: d.clone(),
                    });
                }
            }
        }
    }
    ApproxCount { count: witnesses.len(), witnesses, min_value }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuspExcursion {
    pub t: f64,
    pub height: f64,
    /// `abar^2 + cbar^2`, exact when the direction is.
    pub denominator_exact: Option<FieldElement>,
    /// Whether `height > 1/(2d)` was certified (exactly, or in floats with
    /// a relative margin of 1e-9).
    pub certified_above_half_inverse_d: bool,
}

/// Cusp excursion of `g_t r_{theta'} gamma` with `theta' = pi/2 - theta` and
/// `t = log ||gamma x|| - log sqrt(d)`. The height is read off the image
/// column `(abar, cbar) = g_t r_{theta'} gamma x`.
pub fn cusp_excursion(gamma: &GroupElement, theta: &Direction, x: &PlanarVector, d: &Rational) -> CuspExcursion {
    let y = gamma.apply(x);
    let (yx, yy) = y.to_f64();
    let df = rational_f64(d);
    let t = 0.5 * ((yx * yx + yy * yy).ln() - df.ln());
    let th = {
        let (ex, ey) = float_dir(theta);
        ey.atan2(ex)
    };
    let g = float_mul(&g_t(t), &r_theta(std::f64::consts::FRAC_PI_2 - th));
    let col = [g[0] * yx + g[1] * yy, g[2] * yx + g[3] * yy];
    let h = 1.0 / (col[0] * col[0] + col[1] * col[1]);
    match theta {
        Direction::Exact(u) => {
            let n2 = y.norm_sq();
            let u2 = u.norm_sq();
            let c = u.cross(&y);
            let dd = u.dot(&y);
            let dfe = y.field().from_rational(d.clone());
            let a2 = (&(&c.square() * &n2)).try_div(&(&u2 * &dfe)).expect("nonzero");
            let c2 = (&(&dfe * &dd.square())).try_div(&(&u2 * &n2)).expect("nonzero");
            let den = &a2 + &c2;
            let two_d = y.field().from_rational(d * Rational::from_integer(2.into()));
            let cert = den < two_d;
            CuspExcursion { t, height: h, denominator_exact: Some(den), certified_above_half_inverse_d: cert }
        }
        Direction::Float { .. } => {
            let bound = 1.0 / (2.0 * df);
            CuspExcursion { t, height: h, denominator_exact: None, certified_above_half_inverse_d: h > bound * (1.0 + 1e-9) }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApproxVerdict {
    WellApproximated,
    InconclusiveAtBound,
}

#[derive(Clone, Debug)]
pub struct StripApproxReport {
    pub count: usize,
    pub k: i64,
    pub radius: Rational,
    pub min_count: usize,
    pub eps: Rational,
    pub approximate: bool,
    pub verdict: ApproxVerdict,
}

/// Whether a strip with holonomy `v` and area `a` satisfies the strip
/// approximation inequality for `theta`, together with `a >= eps`.
pub fn satisfies_strip_inequality(v: &PlanarVector, a: &FieldElement, theta: &Direction, eps: &Rational) -> bool {
    let f = v.field();
    if *a < f.from_rational(eps.clone()) {
        return false;
    }
    let one_minus = Rational::from_integer(1.into()) - eps;
    match theta {
        Direction::Exact(u) => {
            let lhs = &(&u.cross(v).square() * &v.norm_sq()) * &f.from_i64(4);
            let rhs = (&a.square() * &u.norm_sq()).scale(&(&one_minus * &one_minus));
            lhs <= rhs
        }
        Direction::Float { .. } => {
            let e = float_dir(theta);
            let (vx, vy) = v.to_f64();
            let wedge = (e.0 * vy - e.1 * vx).abs();
            wedge <= rational_f64(&one_minus) * a.to_f64() / (2.0 * vx.hypot(vy))
        }
    }
}

/// Images `gamma v` of a strip family under a finite group set, deduplicated
/// up to sign. Areas and `|k|` are invariant under the action.
#[derive(Clone, Debug)]
pub struct StripOrbit {
    pub k: i64,
    pub radius: Rational,
    /// `(gamma v, area)` pairs.
    pub images: Vec<(PlanarVector, FieldElement)>,
}

impl StripOrbit {
    pub fn new(strips: &[LiftClass], gammas: &GroupSet) -> Result<StripOrbit, VeechError> {
        let strips: Vec<&LiftClass> = strips.iter().filter(|s| s.is_strip()).collect();
        let first = strips.first().ok_or(VeechError::EmptyStripFamily)?;
        if strips.iter().any(|s| s.k.abs() != first.k.abs()) {
            return Err(VeechError::MixedK);
        }
        let mut seen = HashSet::new();
        let mut images = Vec::new();
        for s in &strips {
            for g in &gammas.elements {
                let v = super::cylinders::upper_half(&g.apply(&s.v));
                if seen.insert((v.clone(), s.area.clone())) {
                    images.push((v, s.area.clone()));
                }
            }
        }
        Ok(StripOrbit { k: first.k.abs(), radius: gammas.radius.clone(), images })
    }

    /// Counts images satisfying the strip approximation inequality.
    pub fn verdict(&self, theta: &Direction, eps: &Rational, min_count: usize) -> Result<StripApproxReport, VeechError> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        if *eps <= zero || *eps >= one {
            return Err(VeechError::BadEps);
        }
        let count = match theta {
            Direction::Exact(_) => self.images.iter().filter(|(v, a)| satisfies_strip_inequality(v, a, theta, eps)).count(),
            Direction::Float { .. } => {
                let e = float_dir(theta);
                let om = rational_f64(&(&one - eps));
                let ef = rational_f64(eps);
                self.images
                    .iter()
                    .filter(|(v, a)| {
                        let (vx, vy) = v.to_f64();
                        let af = a.to_f64();
                        af >= ef && (e.0 * vy - e.1 * vx).abs() <= om * af / (2.0 * vx.hypot(vy))
                    })
                    .count()
            }
        };
        let verdict = if count >= min_count { ApproxVerdict::WellApproximated } else { ApproxVerdict::InconclusiveAtBound };
        Ok(StripApproxReport {
            count,
            k: self.k,
            radius: self.radius.clone(),
            min_count,
            eps: eps.clone(),
            approximate: matches!(theta, Direction::Float { .. }),
            verdict,
        })
    }
}

/// Counts images `gamma v` of the supplied strips that satisfy the strip
/// approximation inequality for `theta`.
pub fn strip_approx_verdict(
    _cover: &CoverSpec,
    strips: &[LiftClass],
    gammas: &GroupSet,
    theta: &Direction,
    eps: &Rational,
    min_count: usize,
) -> Result<StripApproxReport, VeechError> {
    StripOrbit::new(strips, gammas)?.verdict(theta, eps, min_count)
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub grid: usize,
    pub excluded_fraction: f64,
    /// `(boxes at scale 2^j, count of boxes meeting the excluded set)`.
    pub box_counts: Vec<(usize, usize)>,
    /// Least-squares slope of `log N` against `log 2^j`; a heuristic only.
    pub slope: Option<f64>,
    /// Per grid direction `theta in [0, pi)`: witness count.
    pub counts: Vec<usize>,
}

/// Marks grid directions in `[0, pi)` with no witness among the orbit points
/// as excluded at this bound.
pub fn theta_exceptional_scan(x: &PlanarVector, gammas: &[GroupElement], d: f64, grid: usize) -> ScanReport {
    assert!(grid.is_power_of_two(), "grid resolution must be a power of two");
    let mut pts: Vec<(f64, f64)> = gammas.iter().map(|g| g.apply(x).to_f64()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    pts.dedup();
    let counts: Vec<usize> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let th = std::f64::consts::PI * j as f64 / grid as f64;
            let e = (th.cos(), th.sin());
            pts.iter().filter(|&&y| approx_value_f64(e, y) < d).count()
        })
        .collect();
    let excluded: Vec<bool> = counts.iter().map(|&c| c == 0).collect();
    let excluded_fraction = excluded.iter().filter(|&&b| b).count() as f64 / grid as f64;
    let levels = grid.trailing_zeros() as usize;
    let mut box_counts = Vec::new();
    for j in 1..=levels {
        let boxes = 1usize << j;
        let per = grid / boxes;
        let hit = (0..boxes).filter(|b| excluded[b * per..(b + 1) * per].iter().any(|&e| e)).count();
        box_counts.push((boxes, hit));
    }
    let pts_fit: Vec<(f64, f64)> =
        box_counts.iter().filter(|(_, n)| *n > 0).map(|&(b, n)| ((b as f64).ln(), (n as f64).ln())).collect();
    let slope = if pts_fit.len() >= 2 {
        let m = pts_fit.len() as f64;
        let sx: f64 = pts_fit.iter().map(|p| p.0).sum();
        let sy: f64 = pts_fit.iter().map(|p| p.1).sum();
        let sxx: f64 = pts_fit.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts_fit.iter().map(|p| p.0 * p.1).sum();
        Some((m * sxy - sx * sy) / (m * sxx - sx * sx))
    } else {
        None
    };
    ScanReport { grid, excluded_fraction, box_counts, slope, counts }
}

/// A multi-twist in a periodic direction: the parabolic fixing the direction
/// and the number of Dehn twists it performs in each cylinder.
#[derive(Clone, Debug)]
pub struct Parabolic {
    pub matrix: Mat2,
    pub multiplicities: Vec<i64>,
}

/// The smallest parabolic acting as an integer Dehn multi-twist on the given
/// decomposition, if the inverse moduli are commensurable.
pub fn parabolic_from_decomposition(dec: &Decomposition) -> Option<Parabolic> {
    let v = &dec.direction;
    let n2 = v.norm_sq();
    // circumference / height = s |v|^2 / dtau
    let inv_moduli: Vec<FieldElement> =
        dec.cylinders.iter().map(|c| (&c.s * &n2).try_div(&c.dtau).expect("positive height")).collect();
    let m0 = inv_moduli.first()?;
    let mut ratios = Vec::new();
    for m in &inv_moduli {
        ratios.push(m.try_div(m0).ok()?.to_rational()?);
    }
    let mut lcm = num_bigint::BigInt::from(1);
    for r in &ratios {
        lcm = num_integer::Integer::lcm(&lcm, r.numer());
    }
    let big_n = Rational::from_integer(lcm);
    let t = m0.scale(&big_n);
    let multiplicities = ratios
        .iter()
        .map(|r| {
            let n = &big_n / r;
            num_traits::ToPrimitive::to_i64(&n.to_integer()).expect("small multiplicity")
        })
        .collect();
    // M p = p + (t/|v|^2) cross(v, p) v
    let f = v.field();
    let k = t.try_div(&n2).expect("nonzero");
    let col = |p: PlanarVector| -> PlanarVector {
        let c = &k * &v.cross(&p);
        &p + &v.scale(&c)
    };
    let e1 = col(PlanarVector::from_ints(f, 1, 0));
    let e2 = col(PlanarVector::from_ints(f, 0, 1));
    Some(Parabolic { matrix: Mat2::new(e1.x, e2.x, e1.y, e2.y), multiplicities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{rat, rat_int, Field};

    fn modular() -> Vec<GroupElement> {
        let q = Field::rationals();
        vec![
            GroupElement::generator(Mat2::from_ints(&q, 1, 1, 0, 1), 0).unwrap(),
            GroupElement::generator(Mat2::from_ints(&q, 1, 0, 1, 1), 1).unwrap(),
        ]
    }

    #[test]
    fn rejects_non_unimodular() {
        let q = Field::rationals();
        assert_eq!(GroupElement::new(Mat2::from_ints(&q, 2, 0, 0, 1)).unwrap_err(), VeechError::NotUnimodular);
    }

    #[test]
    fn small_modular_ball() {
        let q = Field::rationals();
        let set = enumerate_group(&modular(), &rat_int(2), false);
        let has = |a, b, c, d| set.elements.iter().any(|g| g.m == Mat2::from_ints(&q, a, b, c, d));
        assert!(has(1, 0, 0, 1) && has(1, 1, 0, 1) && has(1, 0, 1, 1) && has(1, -1, 0, 1));
        assert!(has(2, 1, 1, 1));
        assert!(set.elements.iter().all(|g| g.m.det() == q.one()));
        assert_eq!(enumerate_group(&[], &rat_int(5), true).elements.len(), 1);
    }

    #[test]
    fn word_reduction() {
        let g = &modular()[0];
        let e = g.compose(&g.inverse());
        assert!(e.m.is_identity());
        assert!(e.word.is_empty());
    }

    #[test]
    fn cusp_height_identity() {
        let q = Field::rationals();
        let id = GroupElement::identity(&q);
        let x = PlanarVector::from_ints(&q, 1, 0);
        let th = Direction::Exact(x.clone());
        let c = cusp_excursion(&id, &th, &x, &rat_int(1));
        assert!(c.t.abs() < 1e-15);
        assert!((c.height - 1.0).abs() < 1e-12);
        assert!((height(&g_t(0.7)) - (-1.4f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn aligned_direction_is_witness() {
        let q = Field::rationals();
        let set = enumerate_group(&modular(), &rat_int(50), false);
        let x = PlanarVector::from_ints(&q, 1, 0);
        let diag = Direction::Exact(PlanarVector::from_ints(&q, 1, 1));
        let c = well_approx_count(&x, &set.elements, &diag, &rat(3, 5));
        assert!(c.count >= 1);
        assert!(c.witnesses.iter().any(|w| w.value == WitnessValue::ExactSquared(q.zero())));
        let c0 = well_approx_count(&x, &set.elements, &diag, &rat_int(0));
        assert_eq!(c0.count, 0);
    }
}
