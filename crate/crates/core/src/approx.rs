//! Stage quantities of an approximating strip, the rectangle test and a
//! Monte Carlo estimate of the band around a cylinder core.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cover::{CoverSpec, LiftClass};
use crate::cylinders::{Cylinder, Direction};
use crate::numfield::{FieldElement, PlanarVector, Rational};
use crate::surface::TranslationSurface;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("eps must lie strictly between 0 and 1")]
    BadEps,
    #[error("the cylinder lifts to closed cylinders (k = 0)")]
    NotAStrip,
}

/// Quantities attached to one strip. Lengths involving `|v|` are kept as
/// exact squares.
#[derive(Clone, Debug)]
pub struct StageData {
    pub strip: LiftClass,
    pub n: usize,
    pub v: PlanarVector,
    pub area: FieldElement,
    pub eps: Rational,
    /// `h^2` with `h = A / (2 |v|)`.
    pub h_sq: FieldElement,
    /// `eta^2` with `eta = eps^2 / (8 |v|)`.
    pub eta_sq: FieldElement,
    /// `c = (1 - eps/2) / (1 - eps)`.
    pub c: Rational,
}

impl StageData {
    pub fn h(&self) -> f64 {
        self.h_sq.to_f64().sqrt()
    }

    pub fn eta(&self) -> f64 {
        self.eta_sq.to_f64().sqrt()
    }

    /// `2 eta <= (eps / 2) h`, decided exactly on squares.
    pub fn band_fits(&self) -> bool {
        let e2 = &self.eps * &self.eps;
        let lhs = self.eta_sq.scale(&Rational::from_integer(16.into()));
        lhs <= self.h_sq.scale(&e2)
    }

    pub fn area_at_least_eps(&self) -> bool {
        self.area >= self.area.field().from_rational(self.eps.clone())
    }
}

fn check_eps(eps: &Rational) -> Result<(), ApproxError> {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if *eps <= zero || *eps >= one {
        Err(ApproxError::BadEps)
    } else {
        Ok(())
    }
}

pub fn dilation(eps: &Rational) -> Rational {
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    (&one - eps / &two) / (&one - eps)
}

pub fn stage_quantities(strip: &LiftClass, n: usize, eps: &Rational) -> Result<StageData, ApproxError> {
    check_eps(eps)?;
    if !strip.is_strip() {
        return Err(ApproxError::NotAStrip);
    }
    let vv = strip.v.norm_sq();
    let four_vv = vv.scale(&Rational::from_integer(4.into()));
    let h_sq = strip.area.square().try_div(&four_vv).expect("nonzero holonomy");
    let e4 = eps * eps * eps * eps;
    let eta_sq = vv.field().from_rational(e4 / Rational::from_integer(64.into())).try_div(&vv).expect("nonzero holonomy");
    Ok(StageData {
        strip: strip.clone(),
        n,
        v: strip.v.clone(),
        area: strip.area.clone(),
        eps: eps.clone(),
        h_sq,
        eta_sq,
        c: dilation(eps),
    })
}

/// Signed offset of `x` from the core line of `cyl`, in units of
/// `|direction|` times length, or `None` when `x` is not strictly inside.
fn core_offset(cyl: &Cylinder, polygon: usize, x: &PlanarVector) -> Option<FieldElement> {
    let t = cyl.direction.cross(x);
    let half = Rational::new(1.into(), 2.into());
    for pc in cyl.pieces.iter().filter(|pc| pc.polygon == polygon) {
        if pc.tau_lo < t && t < pc.tau_hi {
            let mid = (&pc.tau_lo + &pc.tau_hi).scale(&half);
            return Some(&t - &mid);
        }
    }
    None
}

/// Whether the dilate `cR` of the rectangle with sides along `theta`,
/// `theta + pi/2` and opposite corners `x`, `x + v` fits in the cylinder
/// under the strip. With `a = e . v`, `b = e ^ v` the dilate reaches
/// `c |a b| / |v|` to either side of the line through its centre parallel to
/// `v`, which must stay strictly within the half-height.
pub fn admits_rectangle(
    _cover: &CoverSpec,
    polygon: usize,
    x: &PlanarVector,
    strip: &LiftClass,
    theta: &Direction,
    eps: &Rational,
) -> Result<bool, ApproxError> {
    check_eps(eps)?;
    if !strip.is_strip() {
        return Err(ApproxError::NotAStrip);
    }
    let cyl = &strip.cylinder;
    let Some(off) = core_offset(cyl, polygon, x) else {
        return Ok(false);
    };
    let v = &strip.v;
    let c = dilation(eps);
    match theta {
        Direction::Exact(u) => {
            // everything times |v|: |off| * s + c |a b| |v| / |v| < A / 2
            // where off is in tau units of the cylinder direction, v = s dir
            let transverse = (&off * &cyl.s).abs();
            let ab = (&u.dot(v) * &u.cross(v)).abs().try_div(&u.norm_sq()).expect("nonzero direction");
            let lhs = &transverse + &ab.scale(&c);
            let rhs = strip.area.scale(&Rational::new(1.into(), 2.into()));
            Ok(lhs < rhs)
        }
        Direction::Float { x: ex, y: ey, .. } => {
            let n = ex.hypot(*ey);
            let e = (ex / n, ey / n);
            let (vx, vy) = v.to_f64();
            let a = e.0 * vx + e.1 * vy;
            let b = e.0 * vy - e.1 * vx;
            let cf = num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::NAN);
            let transverse = (off.to_f64() * cyl.s.to_f64()).abs();
            Ok(transverse + cf * (a * b).abs() < strip.area.to_f64() / 2.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    /// Estimated area of the band, in the surface's area units.
    pub estimate: f64,
    pub sigma: f64,
    /// Half-width of the binomial 95% interval, `1.96 sigma`.
    pub radius95: f64,
    pub samples: usize,
    pub seed: u64,
}

struct FloatPolys {
    tris: Vec<(usize, [(f64, f64); 3], f64)>,
    total: f64,
}

fn triangulate(surface: &TranslationSurface) -> FloatPolys {
    let mut tris = Vec::new();
    let mut total = 0.0;
    for (p, poly) in surface.polygons().iter().enumerate() {
        let vs: Vec<(f64, f64)> = poly.vertices().iter().map(|v| v.to_f64()).collect();
        for i in 1..vs.len() - 1 {
            let t = [vs[0], vs[i], vs[i + 1]];
            let a = 0.5 * ((t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[1].1 - t[0].1) * (t[2].0 - t[0].0));
            total += a;
            tris.push((p, t, total));
        }
    }
    FloatPolys { tris, total }
}

const BATCH: usize = 4096;

/// Monte Carlo area of the set of points of the cylinder within `eta` of
/// its core curve. Batch `b` draws from stream `b` of a ChaCha8 generator
/// seeded with `seed`, so results do not depend on the thread count.
pub fn band_measure(surface: &TranslationSurface, cyl: &Cylinder, eta: f64, samples: usize, seed: u64) -> MeasureEstimate {
    let fp = triangulate(surface);
    let (dx, dy) = cyl.direction.to_f64();
    let dn = dx.hypot(dy);
    let pieces: Vec<(usize, f64, f64)> =
        cyl.pieces.iter().map(|pc| (pc.polygon, pc.tau_lo.to_f64(), pc.tau_hi.to_f64())).collect();
    let batches = samples.div_ceil(BATCH);
    let hits: usize = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = BATCH.min(samples - b * BATCH);
            let mut count = 0;
            for _ in 0..n {
                let r: f64 = rng.gen::<f64>() * fp.total;
                let k = fp.tris.partition_point(|t| t.2 <= r).min(fp.tris.len() - 1);
                let (p, t, _) = fp.tris[k];
                let (mut u, mut w): (f64, f64) = (rng.gen(), rng.gen());
                if u + w > 1.0 {
                    u = 1.0 - u;
                    w = 1.0 - w;
                }
                let x = t[0].0 + u * (t[1].0 - t[0].0) + w * (t[2].0 - t[0].0);
                let y = t[0].1 + u * (t[1].1 - t[0].1) + w * (t[2].1 - t[0].1);
                let tau = dx * y - dy * x;
                for &(q, lo, hi) in &pieces {
                    if q == p && lo < tau && tau < hi {
                        if (tau - 0.5 * (lo + hi)).abs() < eta * dn {
                            count += 1;
                        }
                        break;
                    }
                }
            }
            count
        })
        .sum();
    let frac = hits as f64 / samples as f64;
    let sigma = fp.total * (frac * (1.0 - frac) / samples as f64).sqrt();
    MeasureEstimate { estimate: frac * fp.total, sigma, radius95: 1.96 * sigma, samples, seed }
}

/// Band of half-width `eta_n` around the core of the strip's cylinder.
pub fn sigma_prime_measure(
    cover: &CoverSpec,
    strip: &LiftClass,
    eps: &Rational,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate, ApproxError> {
    let st = stage_quantities(strip, 0, eps)?;
    Ok(band_measure(cover.base(), &strip.cylinder, st.eta(), samples.max(100), seed))
}
