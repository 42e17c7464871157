use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use flatcover::approx::{admits_rectangle, sigma_prime_measure, stage_quantities};
use flatcover::cover::{classify_cylinder_lift, cocycle, make_cover, strips_exist_certificate, CoverSpec, LiftClass, StripVerdict};
use flatcover::cylinders::{cylinder_decomposition, periodic_directions, DecompositionResult, Direction};
use flatcover::examples::{self, NAMES};
use flatcover::flow::{
    boundedness_probe, first_return_iet, trace_cover, trace_float, Budget, CoverPoint, Stop, Transversal, FLOAT_TOLERANCE,
};
use flatcover::format::{parse_surface, serialize_surface};
use flatcover::numfield::{format_rational, parse_rational, Field, FieldElement, PlanarVector, Rational};
use flatcover::surface::{RelativeCycle, TranslationSurface};
use flatcover::veech::{approx_value_f64, enumerate_group, well_approx_count, ApproxVerdict, GroupElement, StripOrbit};
use rayon::prelude::*;

use crate::report::{dec, exact, sqrt_dec, Report};
use crate::svg;
use crate::{ApproxBounds, Cmd, Dir, ExamplesCmd, Src, Start};

pub enum Status {
    Done,
    Inconclusive,
}

struct Loaded {
    label: String,
    surface: Arc<TranslationSurface>,
    cycles: Vec<(String, RelativeCycle)>,
    generators: Vec<GroupElement>,
}

impl Loaded {
    fn field(&self) -> &Field {
        self.surface.field()
    }

    /// Cover for `--cycle`, or the first cycle on offer.
    fn cover(&self, name: Option<&str>) -> Result<(String, CoverSpec)> {
        let (n, w) = match name {
            Some(n) => self.cycles.iter().find(|(m, _)| m == n).ok_or_else(|| anyhow!("no cycle named {n:?}"))?,
            None => self.cycles.first().ok_or_else(|| anyhow!("the surface defines no cycle; pass --cycle"))?,
        };
        Ok((n.clone(), make_cover(self.surface.clone(), w.clone())?))
    }
}

fn load(arg: &str) -> Result<Loaded> {
    if let Some(name) = arg.strip_prefix("example:") {
        let b = examples::by_name(name)?;
        return Ok(Loaded { label: arg.to_string(), surface: b.surface, cycles: b.cycles, generators: b.veech_generators });
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    let f = parse_surface(&text).with_context(|| format!("parsing {arg}"))?;
    Ok(Loaded { label: arg.to_string(), surface: Arc::new(f.surface), cycles: f.cycles, generators: Vec::new() })
}

fn rational(s: &str, what: &str) -> Result<Rational> {
    parse_rational(s.trim()).ok_or_else(|| anyhow!("bad {what} {s:?}: expected a rational or decimal"))
}

fn vector(field: &Field, s: &str, what: &str) -> Result<PlanarVector> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("bad {what} {s:?}: expected \"a,b\""))?;
    Ok(PlanarVector::new(field.parse(a)?, field.parse(b)?))
}

fn exact_direction(field: &Field, d: &Dir) -> Result<PlanarVector> {
    match (&d.direction, d.theta_deg) {
        (Some(s), None) => {
            let v = vector(field, s, "direction")?;
            if v.is_zero() {
                bail!("direction vector is zero");
            }
            Ok(v)
        }
        (None, Some(_)) => bail!("this command needs an exact --direction"),
        (Some(_), Some(_)) => bail!("pass either --direction or --theta-deg, not both"),
        (None, None) => bail!("missing --direction"),
    }
}

fn any_direction(field: &Field, d: &Dir) -> Result<Direction> {
    match d.theta_deg {
        Some(t) if d.direction.is_none() => {
            let r = t.to_radians();
            Ok(Direction::Float { x: r.cos(), y: r.sin(), tolerance: FLOAT_TOLERANCE })
        }
        _ => Ok(Direction::Exact(exact_direction(field, d)?)),
    }
}

fn echo_direction(r: &mut Report, d: &Dir) {
    match (&d.direction, d.theta_deg) {
        (Some(s), _) => r.set("direction", s),
        (None, Some(t)) => r.set("theta_deg", t),
        _ => {}
    }
}

fn start_point(field: &Field, s: &Start) -> Result<PlanarVector> {
    vector(field, &s.point, "point")
}

fn emit(r: &Report, out: Option<&Path>) -> Result<()> {
    r.emit(out)
}

fn vec_cells(v: &PlanarVector) -> Vec<String> {
    let [x, xd] = exact(&v.x);
    let [y, yd] = exact(&v.y);
    vec![x, xd, y, yd]
}

pub fn run(cmd: Cmd) -> Result<Status> {
    match cmd {
        Cmd::Validate { src, out } => validate(&src, out.out.as_deref()),
        Cmd::Cylinders { src, dir, lmax, out } => cylinders(&src, &dir, &lmax, out.out.as_deref()),
        Cmd::Strips { src, lmax, out } => strips(&src, &lmax, out.out.as_deref()),
        Cmd::Cover { src, out } => cover(&src, out.out.as_deref()),
        Cmd::Cocycle { src, dir, start, time, out } => cocycle_cmd(&src, &dir, &start, &time, out.out.as_deref()),
        Cmd::Simulate { src, dir, start, time, crossings, out } => {
            simulate(&src, &dir, &start, time.as_deref(), crossings, out.out.as_deref())
        }
        Cmd::Iet { src, dir, transversal, crossings, out } => iet(&src, &dir, &transversal, crossings, out.out.as_deref()),
        Cmd::ProbeBounded { src, dir, start, time, checkpoints, out } => {
            probe(&src, &dir, &start, &time, checkpoints, out.out.as_deref())
        }
        Cmd::Approx { src, dir, bounds, out } => approx(&src, &dir, &bounds, out.out.as_deref()),
        Cmd::Scan { src, bounds, grid, out } => scan(&src, &bounds, &grid, out.jobs, out.out.as_deref()),
        Cmd::Admits { src, dir, start, strip, eps, lmax, samples, seed, out } => {
            admits(&src, &dir, &start, &strip, &eps, &lmax, samples, seed, out.out.as_deref())
        }
        Cmd::Examples { cmd: ExamplesCmd::List { out } } => list_examples(out.out.as_deref()),
        Cmd::Examples { cmd: ExamplesCmd::Export { name, out } } => export(&name, out.out.as_deref()),
    }
}

fn header(verb: &str, l: &Loaded) -> Report {
    let mut r = Report::new(verb);
    r.set("surface", &l.label);
    let f = l.field();
    if f.is_rational_field() {
        r.set("field", "Q");
        return r;
    }
    let poly: Vec<String> = f.min_poly().iter().map(|c| c.to_string()).collect();
    let (lo, hi) = f.root_interval();
    r.set("field", format!("[{}] root in [{}, {}]", poly.join(" "), format_rational(lo), format_rational(hi)));
    r
}

fn validate(src: &Src, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let s = &l.surface;
    let mut r = header("validate", &l);
    r.note("genus", s.genus());
    let [a, ad] = exact(s.area());
    r.note("area", a);
    r.note("area_dec", ad);
    r.note("polygons", s.polygons().len());
    r.note("edge_classes", s.num_edge_classes());
    r.note("cycles", l.cycles.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" "));
    r.columns(&["vertex_class", "cone_angle_over_2pi", "corners", "marked"]);
    let marked = s.marked_classes();
    for (i, vc) in s.vertex_classes().iter().enumerate() {
        r.row(vec![i.to_string(), vc.cone_multiple.to_string(), vc.corners.len().to_string(), marked.contains(&i).to_string()]);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

fn cylinders(src: &Src, dir: &Dir, lmax: &str, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let v = exact_direction(l.field(), dir)?;
    let bound = rational(lmax, "--lmax")?;
    let mut r = header("cylinders", &l);
    echo_direction(&mut r, dir);
    r.set("lmax", format_rational(&bound));
    let cover = match &src.cycle {
        Some(n) => Some(l.cover(Some(n))?),
        None => l.cover(None).ok(),
    };
    if let Some((n, _)) = &cover {
        r.set("cycle", n);
    }
    let d = match cylinder_decomposition(&l.surface, &v, &bound) {
        DecompositionResult::Cylinders(d) => d,
        DecompositionResult::NotPeriodicAtBound { unresolved } => {
            r.note("verdict", "not periodic at bound");
            r.note("unresolved_separatrices", unresolved);
            emit(&r, out)?;
            return Ok(Status::Inconclusive);
        }
    };
    r.note("cylinders", d.cylinders.len());
    r.note("saddle_connections", d.connections.len());
    r.note("total_area_matches", &d.total_area() == l.surface.area());
    r.columns(&[
        "cylinder",
        "hol_x",
        "hol_x_dec",
        "hol_y",
        "hol_y_dec",
        "circumference_sq",
        "circumference_dec",
        "height_sq",
        "height_dec",
        "area",
        "area_dec",
        "modulus_dec",
        "k",
    ]);
    for (i, c) in d.cylinders.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(vec_cells(&c.hol));
        row.push(c.circumference_sq.to_string());
        row.push(sqrt_dec(&c.circumference_sq));
        row.push(c.height_sq.to_string());
        row.push(sqrt_dec(&c.height_sq));
        row.extend(exact(&c.area));
        row.push(dec((c.height_sq.to_f64() / c.circumference_sq.to_f64()).sqrt()));
        row.push(match &cover {
            Some((_, cv)) => classify_cylinder_lift(cv, c).k.to_string(),
            None => "-".into(),
        });
        r.row(row);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

fn strips(src: &Src, lmax: &str, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let bound = rational(lmax, "--lmax")?;
    let verify = &bound * Rational::from_integer(4.into());
    let mut r = header("strips", &l);
    r.set("cycle", &name);
    r.set("lmax", format_rational(&bound));
    r.set("verify_bound", format_rational(&verify));
    let pd = periodic_directions(&l.surface, &bound);
    let dirs: Vec<PlanarVector> = pd.directions.iter().map(|d| d.direction.clone()).collect();
    let rep = strips_exist_certificate(&cover, &dirs, &verify);
    r.note("periodic_directions", dirs.len());
    r.note("unverified_directions", pd.unverified.len() + rep.unresolved_directions.len());
    r.note("span_index", format!("{:?}", rep.span_index));
    let status = match &rep.verdict {
        StripVerdict::StripsExist { witness } => {
            r.note("verdict", format!("strips exist, witness direction ({}, {})", witness.x, witness.y));
            Status::Done
        }
        StripVerdict::StripsExistByIndexCriterion => {
            r.note("verdict", "strips exist by the core curve index criterion");
            Status::Done
        }
        StripVerdict::InconclusiveAtBound => {
            r.note("verdict", "no strip found at bound");
            Status::Inconclusive
        }
    };
    r.columns(&["dir_x", "dir_x_dec", "dir_y", "dir_y_dec", "cylinder", "kind", "k", "area", "area_dec"]);
    for (v, lifts) in &rep.lifts {
        for (i, lc) in lifts.iter().enumerate() {
            let mut row = vec_cells(v);
            row.push(i.to_string());
            row.push(if lc.is_strip() { "strip" } else { "closed" }.into());
            row.push(lc.k.to_string());
            row.extend(exact(&lc.area));
            r.row(row);
        }
    }
    emit(&r, out)?;
    Ok(status)
}

fn cover(src: &Src, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let s = cover.base();
    let mut r = header("cover", &l);
    r.set("cycle", &name);
    let h = s.holonomy(cover.w());
    r.note("holonomy", format!("({}, {})", h.x, h.y));
    r.note("recurrent", cover.recurrent());
    r.note("absolute", s.is_absolute(cover.w()));
    r.note("null_in_relative_homology", s.is_null_relative(cover.w()));
    let b: Vec<String> = s.boundary(cover.w()).iter().map(|x| x.to_string()).collect();
    r.note("boundary", b.join(" "));
    r.columns(&["edge_class", "canonical_edge", "weight"]);
    for (&c, &w) in cover.w().weights() {
        r.row(vec![c.to_string(), s.canonical_edge(c).to_string(), w.to_string()]);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

fn cocycle_cmd(src: &Src, dir: &Dir, start: &Start, time: &str, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let v = exact_direction(l.field(), dir)?;
    let x = start_point(l.field(), start)?;
    let t = l.field().parse(time)?;
    let mut r = header("cocycle", &l);
    r.set("cycle", &name);
    echo_direction(&mut r, dir);
    r.set("polygon", start.polygon);
    r.set("point", &start.point);
    r.set("time", &t);
    let c = cocycle(&cover, start.polygon, &x, &v, &t)?;
    if c.non_recurrent_warning {
        r.note("warning", "cover is not recurrent");
    }
    r.columns(&["polygon", "point_x", "point_y", "time", "time_dec", "value"]);
    let [td, tdd] = exact(&t);
    r.row(vec![start.polygon.to_string(), x.x.to_string(), x.y.to_string(), td, tdd, c.value.to_string()]);
    emit(&r, out)?;
    Ok(Status::Done)
}

fn is_svg(out: Option<&Path>) -> bool {
    out.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("svg"))
}

fn simulate(
    src: &Src,
    dir: &Dir,
    start: &Start,
    time: Option<&str>,
    crossings: Option<usize>,
    out: Option<&Path>,
) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let field = l.field();
    let theta = any_direction(field, dir)?;
    let mut r = header("simulate", &l);
    r.set("cycle", &name);
    echo_direction(&mut r, dir);
    r.set("polygon", start.polygon);
    r.set("point", &start.point);
    let svg_out = is_svg(out);
    let mut pieces = Vec::new();
    match &theta {
        Direction::Exact(v) => {
            let x = start_point(field, start)?;
            let budget = match (time, crossings) {
                (Some(t), None) => Budget::Time(field.parse(t)?),
                (None, Some(n)) => Budget::Crossings(n),
                (None, None) => Budget::Crossings(1000),
                (Some(_), Some(_)) => bail!("pass either --time or --crossings, not both"),
            };
            match &budget {
                Budget::Time(t) => r.set("time", t),
                Budget::Crossings(n) => r.set("crossings", n),
                Budget::Length(q) => r.set("length", format_rational(q)),
            }
            let tr = trace_cover(&cover, &CoverPoint { polygon: start.polygon, point: x, level: 0 }, v, &budget)?;
            r.note("segments", tr.segments.len());
            r.note("crossed_edges", tr.crossings());
            r.note("elapsed", &tr.elapsed);
            r.note("end_level", tr.end_level);
            match &tr.stop {
                Stop::Budget => r.note("stop", "budget"),
                Stop::SingularHit { time, vertex_class } => {
                    r.note("stop", format!("hit marked vertex class {vertex_class} at parameter {time}"))
                }
                Stop::CrossingLimit => r.note("stop", "crossing limit"),
            }
            r.columns(&[
                "segment", "polygon", "entry_x", "entry_x_dec", "entry_y", "entry_y_dec", "exit_x", "exit_x_dec", "exit_y",
                "exit_y_dec", "s_exit", "s_exit_dec", "level",
            ]);
            for (i, s) in tr.segments.iter().enumerate() {
                let mut row = vec![i.to_string(), s.polygon.to_string()];
                row.extend(vec_cells(&s.entry));
                row.extend(vec_cells(&s.exit));
                row.extend(exact(&s.s_exit));
                row.push(s.level.to_string());
                r.row(row);
                if svg_out {
                    pieces.push(svg::Piece { from: s.entry.to_f64(), to: s.exit.to_f64(), level: s.level });
                }
            }
        }
        Direction::Float { .. } => {
            let (px, py) = start
                .point
                .split_once(',')
                .ok_or_else(|| anyhow!("bad point {:?}: expected \"x,y\"", start.point))?;
            let x = (field.parse(px)?.to_f64(), field.parse(py)?.to_f64());
            let t_max = match time {
                Some(t) => field.parse(t)?.to_f64(),
                None => 100.0,
            };
            let n = crossings.unwrap_or(100_000);
            r.set("time", t_max);
            r.set("crossings", n);
            let tr = trace_float(&l.surface, Some(cover.w()), start.polygon, x, theta.angle(), t_max, n);
            r.note("approximate", tr.approximate);
            r.note("near_vertex", tr.near_vertex);
            r.note("elapsed", dec(tr.elapsed));
            r.note("end_level", tr.end_level);
            r.columns(&["segment", "polygon", "entry_x", "entry_y", "exit_x", "exit_y", "t_exit", "level"]);
            for (i, s) in tr.segments.iter().enumerate() {
                r.row(vec![
                    i.to_string(),
                    s.polygon.to_string(),
                    dec(s.entry.0),
                    dec(s.entry.1),
                    dec(s.exit.0),
                    dec(s.exit.1),
                    dec(s.t_exit),
                    s.level.to_string(),
                ]);
                if svg_out {
                    pieces.push(svg::Piece { from: s.entry, to: s.exit, level: s.level });
                }
            }
        }
    }
    if svg_out {
        let p = out.expect("svg output path");
        std::fs::write(p, svg::render(&l.surface, &pieces)).with_context(|| format!("writing {}", p.display()))?;
        emit(&r, None)?;
    } else {
        emit(&r, out)?;
    }
    Ok(Status::Done)
}

fn parse_transversal(field: &Field, s: &str) -> Result<Transversal> {
    let mut parts = s.splitn(3, ':');
    let bad = || anyhow!("bad transversal {s:?}: expected \"P:x0,y0:x1,y1\"");
    let p = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let a = vector(field, parts.next().ok_or_else(bad)?, "transversal endpoint")?;
    let b = vector(field, parts.next().ok_or_else(bad)?, "transversal endpoint")?;
    Ok(Transversal { polygon: p, start: a, end: b })
}

fn iet(src: &Src, dir: &Dir, transversal: &str, crossings: usize, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let v = exact_direction(l.field(), dir)?;
    let tr = parse_transversal(l.field(), transversal)?;
    if tr.polygon >= l.surface.polygons().len() {
        bail!("transversal polygon {} does not exist", tr.polygon);
    }
    let mut r = header("iet", &l);
    r.set("cycle", &name);
    echo_direction(&mut r, dir);
    r.set("transversal", transversal);
    r.set("crossings", crossings);
    let data = first_return_iet(&cover, &tr, &v, crossings)?;
    r.note("intervals", data.len());
    let perm: Vec<String> = data.permutation.iter().map(|p| p.to_string()).collect();
    r.note("permutation", perm.join(" "));
    r.columns(&[
        "interval",
        "start",
        "start_dec",
        "length",
        "length_dec",
        "image_start",
        "image_start_dec",
        "displacement",
        "return_time",
        "return_time_dec",
    ]);
    for j in 0..data.len() {
        let mut row = vec![j.to_string()];
        row.extend(exact(&data.starts[j]));
        row.extend(exact(&data.lengths[j]));
        row.extend(exact(&(&data.starts[j] + &data.shifts[j])));
        row.push(data.displacements[j].to_string());
        row.extend(exact(&data.return_times[j]));
        r.row(row);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

fn probe(src: &Src, dir: &Dir, start: &Start, time: &str, checkpoints: usize, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let field = l.field();
    let v = exact_direction(field, dir)?;
    let x = start_point(field, start)?;
    let t = field.parse(time)?;
    if !t.is_positive() {
        bail!("--time must be positive");
    }
    if checkpoints == 0 {
        bail!("--checkpoints must be at least 1");
    }
    let mut r = header("probe-bounded", &l);
    r.set("cycle", &name);
    echo_direction(&mut r, dir);
    r.set("polygon", start.polygon);
    r.set("point", &start.point);
    r.set("time", &t);
    r.set("checkpoints", checkpoints);
    let cps: Vec<FieldElement> =
        (1..=checkpoints).map(|i| t.scale(&Rational::new((i as i64).into(), (checkpoints as i64).into()))).collect();
    let p = boundedness_probe(&cover, &CoverPoint { polygon: start.polygon, point: x, level: 0 }, &v, &cps)?;
    r.note("final_level", p.final_level);
    r.note("crossings", p.crossings);
    r.columns(&["checkpoint", "time", "time_dec", "max_abs_level"]);
    for (i, (c, m)) in p.checkpoints.iter().zip(&p.max_abs_level).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(exact(c));
        row.push(m.to_string());
        r.row(row);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

/// Strips with the least nonzero |k| among periodic directions up to `lmax`.
fn least_k_strips(cover: &CoverSpec, lmax: &Rational) -> Vec<LiftClass> {
    let all: Vec<LiftClass> = periodic_directions(cover.base(), lmax)
        .directions
        .iter()
        .flat_map(|d| d.decomposition.cylinders.iter().map(|c| classify_cylinder_lift(cover, c)))
        .filter(|lc| lc.is_strip())
        .collect();
    let Some(k) = all.iter().map(|lc| lc.k.abs()).min() else {
        return Vec::new();
    };
    all.into_iter().filter(|lc| lc.k.abs() == k).collect()
}

enum Mode {
    Eps(Rational),
    D(Rational),
}

fn mode(b: &ApproxBounds) -> Result<Mode> {
    match (&b.eps, &b.d) {
        (Some(e), None) => Ok(Mode::Eps(rational(e, "--eps")?)),
        (None, Some(d)) => Ok(Mode::D(rational(d, "--d")?)),
        (Some(_), Some(_)) => bail!("pass either --eps or --d, not both"),
        (None, None) => bail!("one of --eps or --d is required"),
    }
}

fn verdict_label(v: &ApproxVerdict) -> &'static str {
    match v {
        ApproxVerdict::WellApproximated => "well-approximated",
        ApproxVerdict::InconclusiveAtBound => "inconclusive",
    }
}

fn check_eps(eps: &Rational) -> Result<()> {
    if *eps <= Rational::from_integer(0.into()) || *eps >= Rational::from_integer(1.into()) {
        bail!("eps must lie strictly between 0 and 1");
    }
    Ok(())
}

/// Strip orbit for `--eps` runs; `None` when no strip turned up.
fn strip_orbit(l: &Loaded, src: &Src, b: &ApproxBounds, r: &mut Report, radius: &Rational) -> Result<Option<StripOrbit>> {
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let lmax = rational(&b.lmax, "--lmax")?;
    r.set("cycle", &name);
    r.set("lmax", format_rational(&lmax));
    let strips = least_k_strips(&cover, &lmax);
    r.note("strips", strips.len());
    if strips.is_empty() {
        r.note("verdict", "no strip found at bound");
        return Ok(None);
    }
    let group = enumerate_group(&l.generators, radius, true);
    r.note("group_elements", group.elements.len());
    let orbit = StripOrbit::new(&strips, &group)?;
    r.note("k", orbit.k);
    r.note("orbit_size", orbit.images.len());
    Ok(Some(orbit))
}

fn approx(src: &Src, dir: &Dir, b: &ApproxBounds, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let field = l.field();
    let theta = any_direction(field, dir)?;
    let radius = rational(&b.radius, "--radius")?;
    let mut r = header("approx", &l);
    echo_direction(&mut r, dir);
    r.set("radius", format_rational(&radius));
    r.set("min_count", b.min_count);
    r.set("generators", l.generators.len());
    let theta_deg = dec(theta.angle().to_degrees());
    match mode(b)? {
        Mode::Eps(eps) => {
            check_eps(&eps)?;
            r.set("eps", format_rational(&eps));
            let Some(orbit) = strip_orbit(&l, src, b, &mut r, &radius)? else {
                emit(&r, out)?;
                return Ok(Status::Inconclusive);
            };
            let rep = orbit.verdict(&theta, &eps, b.min_count)?;
            r.note("approximate", rep.approximate);
            r.columns(&["theta_deg", "count", "min_value", "verdict"]);
            r.row(vec![theta_deg, rep.count.to_string(), "-".into(), verdict_label(&rep.verdict).into()]);
            emit(&r, out)?;
            Ok(match rep.verdict {
                ApproxVerdict::WellApproximated => Status::Done,
                ApproxVerdict::InconclusiveAtBound => Status::Inconclusive,
            })
        }
        Mode::D(d) => {
            r.set("d", format_rational(&d));
            r.set("vector", &b.vector);
            let x = vector(field, &b.vector, "--vector")?;
            let group = enumerate_group(&l.generators, &radius, true);
            r.note("group_elements", group.elements.len());
            let c = well_approx_count(&x, &group.elements, &theta, &d);
            let ok = c.count >= b.min_count;
            r.columns(&["theta_deg", "count", "min_value", "verdict"]);
            r.row(vec![
                theta_deg,
                c.count.to_string(),
                c.min_value.map_or("-".into(), dec),
                if ok { "well-approximated" } else { "inconclusive" }.into(),
            ]);
            emit(&r, out)?;
            Ok(if ok { Status::Done } else { Status::Inconclusive })
        }
    }
}

fn parse_grid(s: &str) -> Result<usize> {
    let n = match s.trim().split_once('^') {
        Some(("2", k)) => {
            let k: u32 = k.trim().parse().map_err(|_| anyhow!("bad --grid {s:?}"))?;
            if k > 24 {
                bail!("--grid exponent {k} is too large");
            }
            1usize << k
        }
        Some(_) => bail!("bad --grid {s:?}: use N or 2^k"),
        None => s.trim().parse().map_err(|_| anyhow!("bad --grid {s:?}"))?,
    };
    if n == 0 || !n.is_power_of_two() {
        bail!("--grid must be a positive power of two");
    }
    Ok(n)
}

fn scan(src: &Src, b: &ApproxBounds, grid: &str, jobs: usize, out: Option<&Path>) -> Result<Status> {
    let l = load(&src.surface)?;
    let field = l.field();
    let grid = parse_grid(grid)?;
    let radius = rational(&b.radius, "--radius")?;
    let mut r = header("scan", &l);
    r.set("grid", grid);
    r.set("radius", format_rational(&radius));
    r.set("min_count", b.min_count);
    r.set("jobs", jobs);
    let angle = |j: usize| std::f64::consts::PI * j as f64 / grid as f64;
    // (count, min value) per grid direction
    let rows: Vec<(usize, Option<f64>)> = match mode(b)? {
        Mode::Eps(eps) => {
            check_eps(&eps)?;
            r.set("eps", format_rational(&eps));
            let Some(orbit) = strip_orbit(&l, src, b, &mut r, &radius)? else {
                emit(&r, out)?;
                return Ok(Status::Inconclusive);
            };
            let counts: Result<Vec<usize>, _> = (0..grid)
                .into_par_iter()
                .map(|j| {
                    let th = angle(j);
                    let dir = Direction::Float { x: th.cos(), y: th.sin(), tolerance: FLOAT_TOLERANCE };
                    orbit.verdict(&dir, &eps, b.min_count).map(|v| v.count)
                })
                .collect();
            counts?.into_iter().map(|c| (c, None)).collect()
        }
        Mode::D(d) => {
            r.set("d", format_rational(&d));
            r.set("vector", &b.vector);
            let x = vector(field, &b.vector, "--vector")?;
            let group = enumerate_group(&l.generators, &radius, true);
            r.note("group_elements", group.elements.len());
            let df = d.to_string().parse::<f64>().unwrap_or_else(|_| {
                let (n, m) = (d.numer().to_string(), d.denom().to_string());
                n.parse::<f64>().unwrap_or(f64::NAN) / m.parse::<f64>().unwrap_or(f64::NAN)
            });
            let mut pts: Vec<(f64, f64)> = group.elements.iter().map(|g| g.apply(&x).to_f64()).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            pts.dedup();
            (0..grid)
                .into_par_iter()
                .map(|j| {
                    let th = angle(j);
                    let e = (th.cos(), th.sin());
                    let mut count = 0;
                    let mut min = f64::INFINITY;
                    for &y in &pts {
                        let v = approx_value_f64(e, y);
                        min = min.min(v);
                        if v < df {
                            count += 1;
                        }
                    }
                    (count, min.is_finite().then_some(min))
                })
                .collect()
        }
    };
    let excluded: Vec<bool> = rows.iter().map(|(c, _)| *c < b.min_count).collect();
    let fraction = excluded.iter().filter(|&&e| e).count() as f64 / grid as f64;
    r.note("approximate", true);
    r.note("excluded_fraction", dec(fraction));
    let mut boxes = Vec::new();
    for k in 1..=grid.trailing_zeros() {
        let n = 1usize << k;
        let per = grid / n;
        let hit = (0..n).filter(|i| excluded[i * per..(i + 1) * per].iter().any(|&e| e)).count();
        boxes.push(format!("{n}:{hit}"));
    }
    r.note("box_counts", boxes.join(" "));
    r.columns(&["theta", "count", "min_value", "verdict"]);
    for (j, (c, m)) in rows.iter().enumerate() {
        r.row(vec![
            dec(angle(j)),
            c.to_string(),
            m.map_or("-".into(), dec),
            if *c >= b.min_count { "well-approximated" } else { "excluded" }.into(),
        ]);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

#[allow(clippy::too_many_arguments)]
fn admits(
    src: &Src,
    dir: &Dir,
    start: &Start,
    strip: &str,
    eps: &str,
    lmax: &str,
    samples: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<Status> {
    let l = load(&src.surface)?;
    let (name, cover) = l.cover(src.cycle.as_deref())?;
    let field = l.field();
    let v = vector(field, strip, "--strip")?;
    if v.is_zero() {
        bail!("strip direction is zero");
    }
    let x = start_point(field, start)?;
    let eps = rational(eps, "--eps")?;
    check_eps(&eps)?;
    let bound = rational(lmax, "--lmax")?;
    let theta = if dir.direction.is_none() && dir.theta_deg.is_none() {
        Direction::Exact(v.clone())
    } else {
        any_direction(field, dir)?
    };
    let mut r = header("admits", &l);
    r.set("cycle", &name);
    r.set("strip", strip);
    echo_direction(&mut r, dir);
    r.set("polygon", start.polygon);
    r.set("point", &start.point);
    r.set("eps", format_rational(&eps));
    r.set("lmax", format_rational(&bound));
    if let Some(n) = samples {
        r.set("samples", n);
        r.set("seed", seed);
    }
    let d = cylinder_decomposition(&l.surface, &v, &bound)
        .decomposition()
        .ok_or_else(|| anyhow!("direction is not periodic at bound {}", format_rational(&bound)))?;
    r.columns(&[
        "cylinder", "k", "area", "area_dec", "h_dec", "eta_dec", "c", "band_fits", "admits", "measure", "sigma", "radius95",
    ]);
    for (i, c) in d.cylinders.iter().enumerate() {
        let lc = classify_cylinder_lift(&cover, c);
        let [a, ad] = exact(&lc.area);
        if !lc.is_strip() {
            let mut row = vec![i.to_string(), "0".into(), a, ad];
            row.extend(std::iter::repeat_n("-".to_string(), 8));
            r.row(row);
            continue;
        }
        let st = stage_quantities(&lc, 0, &eps)?;
        let ok = admits_rectangle(&cover, start.polygon, &x, &lc, &theta, &eps)?;
        let m = match samples {
            Some(n) => Some(sigma_prime_measure(&cover, &lc, &eps, n, seed)?),
            None => None,
        };
        r.row(vec![
            i.to_string(),
            lc.k.to_string(),
            a,
            ad,
            dec(st.h()),
            dec(st.eta()),
            format_rational(&st.c),
            st.band_fits().to_string(),
            ok.to_string(),
            m.as_ref().map_or("-".into(), |m| dec(m.estimate)),
            m.as_ref().map_or("-".into(), |m| dec(m.sigma)),
            m.as_ref().map_or("-".into(), |m| dec(m.radius95)),
        ]);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

fn list_examples(out: Option<&Path>) -> Result<Status> {
    let mut r = Report::new("examples list");
    r.columns(&["name", "genus", "field_degree", "polygons", "cycles", "generators"]);
    for name in NAMES {
        let b = examples::by_name(name)?;
        r.row(vec![
            name.to_string(),
            b.surface.genus().to_string(),
            b.surface.field().degree().to_string(),
            b.surface.polygons().len().to_string(),
            b.cycles.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(" "),
            b.generator_names.join("; "),
        ]);
    }
    emit(&r, out)?;
    Ok(Status::Done)
}

fn export(name: &str, out: Option<&Path>) -> Result<Status> {
    let b = examples::by_name(name)?;
    let text = serialize_surface(&b.surface, &b.cycles);
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(Status::Done)
}
