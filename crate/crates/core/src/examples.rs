//! Shipped example surfaces with their cover cycles and known affine
//! generators. Every builder checks the stated properties before returning.

use std::sync::Arc;

use thiserror::Error;

use crate::cover::{automorphism_lift_sign, classify_cylinder_lift, make_cover, multitwist_lifts, CoverSpec};
use crate::cylinders::{cylinder_decomposition, periodic_directions, Decomposition};
use crate::numfield::{rat_int, Field, FieldElement, Mat2, PlanarVector};
use crate::surface::{build_surface, EdgeRef, Polygon, RelativeCycle, TranslationSurface};
use crate::veech::{parabolic_from_decomposition, GroupElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExampleError {
    #[error("no double n-gon is shipped for n = {0}")]
    UnsupportedN(usize),
    #[error("unknown example {0}")]
    UnknownName(String),
    #[error("build check failed: {0}")]
    Check(String),
}

#[derive(Clone, Debug)]
pub struct ExampleBundle {
    pub name: String,
    pub surface: Arc<TranslationSurface>,
    pub cycles: Vec<(String, RelativeCycle)>,
    pub veech_generators: Vec<GroupElement>,
    /// One label per generator, e.g. "rotation 2pi/8".
    pub generator_names: Vec<String>,
    pub notes: Vec<String>,
}

impl ExampleBundle {
    pub fn cycle(&self, name: &str) -> Option<&RelativeCycle> {
        self.cycles.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// Cover for the first shipped cycle.
    pub fn cover(&self) -> CoverSpec {
        make_cover(self.surface.clone(), self.cycles[0].1.clone()).expect("shipped cycles are valid")
    }
}

pub const NAMES: [&str; 8] =
    ["staircase", "double-octagon", "reg8", "reg10", "reg12", "reg16", "reg20", "wollmilchsau"];

pub fn by_name(name: &str) -> Result<ExampleBundle, ExampleError> {
    match name {
        "staircase" => staircase(),
        "double-octagon" => double_octagon_hw(),
        "wollmilchsau" => wollmilchsau(),
        _ => match name.strip_prefix("reg").and_then(|n| n.parse().ok()) {
            Some(n) => double_ngon(n),
            None => Err(ExampleError::UnknownName(name.to_string())),
        },
    }
}

fn check(cond: bool, what: &str) -> Result<(), ExampleError> {
    if cond {
        Ok(())
    } else {
        Err(ExampleError::Check(what.to_string()))
    }
}

fn glue(pairs: &[((usize, usize), (usize, usize))]) -> Vec<(EdgeRef, EdgeRef)> {
    pairs.iter().map(|&((p, e), (q, f))| (EdgeRef::new(p, e), EdgeRef::new(q, f))).collect()
}

fn polygon_from_edges(start: PlanarVector, edges: &[PlanarVector]) -> Polygon {
    let mut vs = vec![start];
    for e in &edges[..edges.len() - 1] {
        let next = vs.last().unwrap() + e;
        vs.push(next);
    }
    Polygon::new(vs)
}

fn rational_vector(f: &Field, x: i64, y: i64) -> PlanarVector {
    PlanarVector::from_ints(f, x, y)
}

/// Common checks: the cycle has zero holonomy and is nonzero in homology.
fn check_cycle(s: &TranslationSurface, w: &RelativeCycle, name: &str) -> Result<(), ExampleError> {
    check(s.holonomy(w).is_zero(), &format!("{name} has zero holonomy"))?;
    check(!s.is_trivial_cycle(w), &format!("{name} is nonzero in relative homology"))?;
    let (l, r) = s.gauss_bonnet();
    check(l == r, "angle excess matches the genus")
}

/// Parabolic generator of the decomposition in direction `v`, kept only if
/// its multi-twist lifts to the cover.
fn lifted_parabolic(cover: &CoverSpec, v: &PlanarVector) -> Option<(Mat2, Decomposition)> {
    let dec = cylinder_decomposition(cover.base(), v, &rat_int(64)).decomposition()?;
    let p = parabolic_from_decomposition(&dec)?;
    if multitwist_lifts(cover, &dec.cylinders, &p.multiplicities) {
        Some((p.matrix, dec))
    } else {
        None
    }
}

fn direction_has_strip(cover: &CoverSpec, v: &PlanarVector) -> bool {
    match cylinder_decomposition(cover.base(), v, &rat_int(64)).decomposition() {
        Some(d) => d.cylinders.iter().any(|c| classify_cylinder_lift(cover, c).is_strip()),
        None => false,
    }
}

/// Two unit squares side by side, each horizontal and vertical cylinder of
/// length two. The cycle `w` is the bottom of the left square minus the
/// bottom of the right one; its cover is the infinite staircase.
pub fn staircase() -> Result<ExampleBundle, ExampleError> {
    staircase_over(&Field::rationals())
}

/// The staircase base with coordinates in `field`, for irrational exact
/// directions.
pub fn staircase_over(field: &Field) -> Result<ExampleBundle, ExampleError> {
    let f = field;
    let a = Polygon::from_ints(f, &[(0, 0), (1, 0), (1, 1), (0, 1)]);
    let b = Polygon::from_ints(f, &[(1, 0), (2, 0), (2, 1), (1, 1)]);
    // edges: 0 bottom, 1 right, 2 top, 3 left
    let g = glue(&[((0, 1), (1, 3)), ((1, 1), (0, 3)), ((0, 2), (1, 0)), ((1, 2), (0, 0))]);
    let s = build_surface(vec![a, b], &g, &[0, 1]).map_err(|e| ExampleError::Check(e.to_string()))?;
    let w = s.cycle_from_edges(&[(EdgeRef::new(0, 0), 1), (EdgeRef::new(1, 0), -1)]);
    check_cycle(&s, &w, "w")?;
    check(s.genus() == 1, "genus 1")?;
    let s = Arc::new(s);
    let cover = make_cover(s.clone(), w.clone()).map_err(|e| ExampleError::Check(e.to_string()))?;
    check(direction_has_strip(&cover, &rational_vector(f, 1, 1)), "slope 1 carries a strip")?;
    let mut gens = Vec::new();
    let mut names = Vec::new();
    for (v, label) in [(rational_vector(f, 1, 0), "horizontal twist"), (rational_vector(f, 0, 1), "vertical twist")] {
        let (m, _) = lifted_parabolic(&cover, &v).ok_or_else(|| ExampleError::Check(format!("{label} lifts")))?;
        gens.push(GroupElement::generator(m, gens.len()).map_err(|e| ExampleError::Check(e.to_string()))?);
        names.push(label.to_string());
    }
    Ok(ExampleBundle {
        name: "staircase".into(),
        surface: s,
        cycles: vec![("w".into(), w)],
        veech_generators: gens,
        generator_names: names,
        notes: vec![
            "squares A = [0,1]^2 and B = [1,2]x[0,1]; A top glued to B bottom, B top to A bottom".into(),
            "w = bottom(A) - bottom(B), both oriented left to right".into(),
            "horizontal and vertical cylinders lift to closed cylinders; slope +-1 cylinders lift to strips".into(),
        ],
    })
}

fn sqrt2_field() -> Field {
    Field::new(&[-2, 0, 1], (rat_int(1), rat_int(2))).expect("x^2 - 2")
}

/// Two regular octagons of side 2 glued as follows (labels a..g; the unlabelled
/// pair is the right side of A and the left side of B). Edge `k` of either
/// octagon has direction `k * 45` degrees.
///
/// | A edge | label | glued to |
/// |---|---|---|
/// | 0 | b | B 4 |
/// | 1 | e | A 5 |
/// | 2 | - | B 6 |
/// | 3 | d | A 7 |
/// | 4 | c | B 0 |
/// | 6 | a | B 2 |
///
/// and B 1 (f) to B 5, B 3 (g) to B 7. `w0 = (b) - (c)`.
pub fn double_octagon_hw() -> Result<ExampleBundle, ExampleError> {
    let f = sqrt2_field();
    let r = f.generator();
    let two = f.from_i64(2);
    let z = f.zero();
    let edges = vec![
        PlanarVector::new(two.clone(), z.clone()),
        PlanarVector::new(r.clone(), r.clone()),
        PlanarVector::new(z.clone(), two.clone()),
        PlanarVector::new(-&r, r.clone()),
        PlanarVector::new(-&two, z.clone()),
        PlanarVector::new(-&r, -&r),
        PlanarVector::new(z.clone(), -&two),
        PlanarVector::new(r.clone(), -&r),
    ];
    let a = polygon_from_edges(PlanarVector::zero(&f), &edges);
    let b = polygon_from_edges(rational_vector(&f, 8, 0), &edges);
    let g = glue(&[
        ((0, 0), (1, 4)),
        ((0, 1), (0, 5)),
        ((0, 2), (1, 6)),
        ((0, 3), (0, 7)),
        ((0, 4), (1, 0)),
        ((0, 6), (1, 2)),
        ((1, 1), (1, 5)),
        ((1, 3), (1, 7)),
    ]);
    let s = build_surface(vec![a, b], &g, &[]).map_err(|e| ExampleError::Check(e.to_string()))?;
    let w0 = s.cycle_from_edges(&[(EdgeRef::new(0, 0), 1), (EdgeRef::new(1, 0), -1)]);
    check_cycle(&s, &w0, "w0")?;
    let s = Arc::new(s);
    let cover = make_cover(s.clone(), w0.clone()).map_err(|e| ExampleError::Check(e.to_string()))?;
    let diag = rational_vector(&f, 1, 1);
    check(direction_has_strip(&cover, &diag), "slope 1 carries a strip")?;
    let (gens, names) = collect_generators(&cover, &f, 8)?;
    Ok(ExampleBundle {
        name: "double-octagon".into(),
        surface: s,
        cycles: vec![("w0".into(), w0)],
        veech_generators: gens,
        generator_names: names,
        notes: vec![
            "octagons of side 2 with edge k in direction k*45 degrees".into(),
            "w0 = (b) - (c): bottom of A minus bottom of B, both left to right".into(),
            "slope 1: the cylinder through (b) misses (c)".into(),
        ],
    })
}

/// Cosine and sine of `2 pi / n` in the field used for `Reg_n`.
fn ngon_field(n: usize) -> Result<(Field, FieldElement, FieldElement), ExampleError> {
    let half = |e: FieldElement| e.scale(&crate::numfield::rat(1, 2));
    match n {
        8 => {
            let f = sqrt2_field();
            let r = f.generator();
            Ok((f, half(r.clone()), half(r)))
        }
        12 => {
            let f = Field::new(&[-3, 0, 1], (rat_int(1), rat_int(2))).expect("x^2 - 3");
            let r = f.generator();
            Ok((f.clone(), half(r), f.from_ratio(1, 2)))
        }
        10 | 20 => {
            // r = 2 cos 18 degrees
            let f = Field::new(&[5, 0, -5, 0, 1], (crate::numfield::rat(9, 5), rat_int(2))).expect("x^4 - 5x^2 + 5");
            let r = f.generator();
            let r2 = r.square();
            if n == 20 {
                let s = half(&r2 - &f.from_i64(3));
                Ok((f, half(r), s))
            } else {
                let c = half(&r2 - &f.from_i64(2));
                let s = half(&r * &(&r2 - &f.from_i64(3)));
                Ok((f, c, s))
            }
        }
        16 => {
            // r = 2 cos 22.5 degrees
            let f = Field::new(&[2, 0, -4, 0, 1], (crate::numfield::rat(9, 5), crate::numfield::rat(19, 10)))
                .expect("x^4 - 4x^2 + 2");
            let r = f.generator();
            let s = (&r.square() - &f.from_i64(2)).try_div(&(&r * &f.from_i64(2))).expect("r != 0");
            Ok((f, half(r), s))
        }
        _ => Err(ExampleError::UnsupportedN(n)),
    }
}

/// Two regular n-gons of side 1, each side of one glued to the parallel
/// opposite side of the other. Sides are labelled `1..n` counterclockwise,
/// side 1 pointing straight down; polygon edge `k` carries label `k + 1`.
/// `w` is the sum of the odd-labelled sides of the first polygon.
pub fn double_ngon(n: usize) -> Result<ExampleBundle, ExampleError> {
    let (f, c, s) = ngon_field(n)?;
    let rot = Mat2::new(c.clone(), -&s, s.clone(), c.clone());
    check(rot.det() == f.one(), "rotation is exact")?;
    let mut edges = vec![PlanarVector::new(f.zero(), -&f.one())];
    for _ in 1..n {
        let e = rot.apply(edges.last().unwrap());
        edges.push(e);
    }
    let a = polygon_from_edges(PlanarVector::zero(&f), &edges);
    let b = Polygon::new(a.vertices().iter().map(|v| &(-v) + &rational_vector(&f, 2 * n as i64, 0)).collect());
    let pairs: Vec<((usize, usize), (usize, usize))> = (0..n).map(|k| ((0, k), (1, k))).collect();
    let sfc = build_surface(vec![a, b], &glue(&pairs), &[]).map_err(|e| ExampleError::Check(e.to_string()))?;
    let odd: Vec<(EdgeRef, i64)> = (0..n).step_by(2).map(|k| (EdgeRef::new(0, k), 1)).collect();
    let w = sfc.cycle_from_edges(&odd);
    check_cycle(&sfc, &w, "w")?;
    let sfc = Arc::new(sfc);
    let cover = make_cover(sfc.clone(), w.clone()).map_err(|e| ExampleError::Check(e.to_string()))?;
    let (gens, names) = collect_generators(&cover, &f, n)?;
    let mut notes = vec![
        format!("two regular {n}-gons of side 1; label L is the side in direction 270 + (L-1)*360/{n} degrees"),
        "w = sum of the odd-labelled sides of the first polygon".into(),
    ];
    if n % 4 == 0 {
        let t = &s.try_div(&(&f.one() + &c)).expect("cos != -1");
        let v = PlanarVector::new(f.one(), t.clone());
        check(direction_has_strip(&cover, &v), "slope tan(pi/n) carries a strip")?;
        notes.push(format!("slope tan(pi/{n}) carries a strip"));
    } else {
        let v = rational_vector(&f, 1, 0);
        check(direction_has_strip(&cover, &v), "horizontal direction carries a strip")?;
        notes.push("n = 2m + 2: the horizontal direction carries a strip and the twist is taken at slope tan(pi/n)".into());
    }
    Ok(ExampleBundle {
        name: format!("reg{n}"),
        surface: sfc,
        cycles: vec![("w".into(), w)],
        veech_generators: gens,
        generator_names: names,
        notes,
    })
}

/// Rotations by multiples of `2 pi / order` that are automorphisms and lift,
/// then parabolics in the horizontal and `pi / order` directions that lift.
fn collect_generators(
    cover: &CoverSpec,
    f: &Field,
    order: usize,
) -> Result<(Vec<GroupElement>, Vec<String>), ExampleError> {
    let (_, c, s) = match order {
        8 => (f.clone(), f.generator().scale(&crate::numfield::rat(1, 2)), f.generator().scale(&crate::numfield::rat(1, 2))),
        _ => ngon_field(order)?,
    };
    let rot = Mat2::new(c.clone(), -&s, s.clone(), c.clone());
    let mut gens = Vec::new();
    let mut names = Vec::new();
    let mut power = rot.clone();
    for j in 1..order {
        if let Some(map) = cover.base().polygon_automorphism(&power) {
            if automorphism_lift_sign(cover, &map).is_some() {
                gens.push(GroupElement::generator(power.clone(), gens.len()).map_err(|e| ExampleError::Check(e.to_string()))?);
                names.push(format!("rotation {j}*2pi/{order}"));
                break;
            }
        }
        power = power.mul(&rot);
    }
    let half_turn = (&s).try_div(&(&f.one() + &c)).expect("cos != -1");
    for (v, label) in [
        (PlanarVector::from_ints(f, 1, 0), "horizontal twist".to_string()),
        (PlanarVector::new(f.one(), half_turn), format!("twist at slope tan(pi/{order})")),
    ] {
        if let Some((m, _)) = lifted_parabolic(cover, &v) {
            gens.push(GroupElement::generator(m, gens.len()).map_err(|e| ExampleError::Check(e.to_string()))?);
            names.push(label);
        }
    }
    Ok((gens, names))
}

/// Eight unit squares. Horizontally S1..S4 and S5..S8 form two cylinders of
/// length four; going up, S1 -> S8, S2 -> S7, S3 -> S6, S4 -> S5, S5 -> S2,
/// S6 -> S1, S7 -> S4, S8 -> S3. Segment 2 is the top of S3 (= bottom of S6),
/// segment 4 the top of S1 (= bottom of S8); `w1 = (2) - (4)`.
pub fn wollmilchsau() -> Result<ExampleBundle, ExampleError> {
    let f = Field::rationals();
    let pos = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (4, 1), (5, 1), (6, 1)];
    let squares: Vec<Polygon> =
        pos.iter().map(|&(x, y)| Polygon::from_ints(&f, &[(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)])).collect();
    let right = [1, 2, 3, 0, 5, 6, 7, 4];
    let up = [7, 6, 5, 4, 1, 0, 3, 2];
    let mut pairs = Vec::new();
    for i in 0..8 {
        pairs.push(((i, 1), (right[i], 3)));
        pairs.push(((i, 2), (up[i], 0)));
    }
    let s = build_surface(squares, &glue(&pairs), &[]).map_err(|e| ExampleError::Check(e.to_string()))?;
    let w1 = s.cycle_from_edges(&[(EdgeRef::new(5, 0), 1), (EdgeRef::new(7, 0), -1)]);
    check_cycle(&s, &w1, "w1")?;
    check(s.genus() == 3, "genus 3")?;
    let s = Arc::new(s);
    let cover = make_cover(s.clone(), w1.clone()).map_err(|e| ExampleError::Check(e.to_string()))?;
    for pd in periodic_directions(&s, &rat_int(3)).directions {
        for c in &pd.decomposition.cylinders {
            check(!classify_cylinder_lift(&cover, c).is_strip(), "every sampled cylinder lifts to closed cylinders")?;
        }
    }
    let mut gens = Vec::new();
    let mut names = Vec::new();
    for (v, label) in [(rational_vector(&f, 1, 0), "horizontal twist"), (rational_vector(&f, 0, 1), "vertical twist")] {
        if let Some((m, _)) = lifted_parabolic(&cover, &v) {
            gens.push(GroupElement::generator(m, gens.len()).map_err(|e| ExampleError::Check(e.to_string()))?);
            names.push(label.to_string());
        }
    }
    Ok(ExampleBundle {
        name: "wollmilchsau".into(),
        surface: s,
        cycles: vec![("w1".into(), w1)],
        veech_generators: gens,
        generator_names: names,
        notes: vec![
            "eight unit squares in two horizontal cylinders of length four".into(),
            "w1 = segment 2 - segment 4, both oriented left to right".into(),
            "no cylinder in the sampled periodic directions lifts to a strip".into(),
        ],
    })
}
