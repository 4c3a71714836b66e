//! Positivity of divisor classes: nef and ample tests against the curve
//! catalog, exact Zariski decomposition by an active-set method, volumes,
//! and the two thresholds along a ray `L - x Z` (effective threshold and
//! ample threshold).
//!
//! Everything is exact. Ray thresholds are found by walking the chambers of
//! the decomposition: inside a chamber the negative-part coefficients are
//! affine in `x` and the volume is a quadratic, so chamber ends are roots of
//! explicit rational polynomials. A ray that leaves the effective cone
//! through the round part of its boundary has an irrational endpoint; that
//! case is detected exactly and reported as a typed error rather than
//! approximated.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::lattice::{CurveLabel, CurveRole, DivisorClass, ModelError, SurfaceModel};
use crate::rat::Rat;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PositivityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("input class is not pseudoeffective")]
    InputNotPseudoeffective,
    #[error("input class is not ample")]
    NotAmple,
    #[error("threshold is irrational: first zero of {q0} + {q1} x + {q2} x^2 after x = {after}")]
    IrrationalThreshold {
        q0: Rat,
        q1: Rat,
        q2: Rat,
        after: Rat,
    },
    #[error("ray walk is unbounded in a direction without a volume root")]
    UnboundedThreshold,
    #[error("internal invariant violated: {0}")]
    InvariantViolation(&'static str),
}

/// Exact decomposition `D = P + sum a_i Z_i` with `P` nef against the
/// catalog, `P.Z_i = 0`, `a_i > 0` and negative-definite support.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ZariskiDecomposition {
    pub positive_part: DivisorClass,
    pub negative_part: BTreeMap<CurveLabel, Rat>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum ZariskiOutcome {
    Pseudoeffective(ZariskiDecomposition),
    NotPseudoeffective,
}

impl ZariskiOutcome {
    pub fn decomposition(&self) -> Option<&ZariskiDecomposition> {
        match self {
            ZariskiOutcome::Pseudoeffective(z) => Some(z),
            ZariskiOutcome::NotPseudoeffective => None,
        }
    }
}

/// Summary of every positivity predicate for one class.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PositivityReport {
    pub is_pseff: bool,
    pub is_nef: bool,
    pub is_ample: bool,
    pub volume: Rat,
    pub decomposition: Option<ZariskiDecomposition>,
}

/// Endpoint of a threshold computation along a ray.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum ThresholdOutcome {
    Value(Rat),
    /// The ray never leaves the cone being tested.
    Unbounded,
}

/// One chamber of a ray walk: on `[x_lo, x_hi]` the volume of `L - x Z`
/// equals `q0 + q1 x + q2 x^2`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RaySegment {
    pub x_lo: Rat,
    pub x_hi: Rat,
    pub q0: Rat,
    pub q1: Rat,
    pub q2: Rat,
}

impl RaySegment {
    pub fn value_at(&self, x: &Rat) -> Rat {
        &self.q0 + &self.q1 * x + &self.q2 * x.square()
    }

    /// Exact antiderivative difference over the segment.
    pub fn integral(&self) -> Rat {
        let d1 = &self.x_hi - &self.x_lo;
        let d2 = self.x_hi.square() - self.x_lo.square();
        let d3 = &self.x_hi * self.x_hi.square() - &self.x_lo * self.x_lo.square();
        &self.q0 * d1 + &self.q1 * d2 / 2 + &self.q2 * d3 / 3
    }
}

/// Piecewise-quadratic volume data along `L - x Z`, ending at the effective
/// threshold (or unbounded).
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RayWalk {
    pub segments: Vec<RaySegment>,
    pub end: ThresholdOutcome,
}

/// Nef against the catalog: every pairing nonnegative.
pub fn is_nef(model: &SurfaceModel, d: &DivisorClass) -> Result<bool, ModelError> {
    for rec in model.catalog() {
        if model.intersect(d, &rec.cls)?.is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Ample against the catalog: every pairing strictly positive and `D^2 > 0`.
pub fn is_ample(model: &SurfaceModel, d: &DivisorClass) -> Result<bool, ModelError> {
    for rec in model.catalog() {
        if !model.intersect(d, &rec.cls)?.is_positive() {
            return Ok(false);
        }
    }
    Ok(model.intersect(d, d)?.is_positive())
}

/// Solve `gram * x = rhs` exactly; `None` when singular.
fn gauss_solve(gram: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rhs.len();
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row = gram[i].clone();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        let reference = a[col].clone();
        for (row, arow) in a.iter_mut().enumerate() {
            if row != col && !arow[col].is_zero() {
                let factor = arow[col].clone();
                for (k, r) in reference.iter().enumerate().skip(col) {
                    let delta = &factor * r;
                    arow[k] -= &delta;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n].clone()).collect())
}

/// Exact negative-definiteness via alternating leading principal minors.
fn is_negative_definite(gram: &[Vec<Rat>]) -> bool {
    let n = gram.len();
    // Gaussian elimination without pivoting tracks the leading minors as
    // products of pivots; a zero pivot means a singular leading minor.
    let mut a: Vec<Vec<Rat>> = gram.to_vec();
    for col in 0..n {
        // Pivot of the k-th step must keep (-1)^(k+1) * minor_(k+1) > 0,
        // i.e. every pivot of -gram is positive.
        if !(-&a[col][col]).is_positive() {
            return false;
        }
        let reference = a[col].clone();
        for row in (col + 1)..n {
            if !a[row][col].is_zero() {
                let factor = &a[row][col] / &a[col][col];
                for (k, r) in reference.iter().enumerate().skip(col) {
                    let delta = &factor * r;
                    a[row][k] -= &delta;
                }
            }
        }
    }
    true
}

struct Active<'m> {
    model: &'m SurfaceModel,
    indices: Vec<usize>,
}

impl<'m> Active<'m> {
    fn new(model: &'m SurfaceModel) -> Self {
        Active {
            model,
            indices: Vec::new(),
        }
    }

    fn classes(&self) -> Vec<&DivisorClass> {
        self.indices
            .iter()
            .map(|&i| &self.model.catalog()[i].cls)
            .collect()
    }

    fn gram(&self) -> Result<Vec<Vec<Rat>>, ModelError> {
        let cls = self.classes();
        let n = cls.len();
        let mut g = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = self.model.intersect(cls[i], cls[j])?;
            }
        }
        Ok(g)
    }

    fn rhs(&self, d: &DivisorClass) -> Result<Vec<Rat>, ModelError> {
        self.classes()
            .iter()
            .map(|z| self.model.intersect(d, z))
            .collect()
    }
}

/// Zariski decomposition by monotone active-set growth.
///
/// Returns `NotPseudoeffective` when the procedure certifies the class is
/// outside the effective cone: a nef catalog class pairs negatively with the
/// residual, a solved coefficient is negative, the candidate support fails
/// the negative-definiteness test, or the final residual has negative square.
pub fn zariski(model: &SurfaceModel, d: &DivisorClass) -> Result<ZariskiOutcome, PositivityError> {
    model.intersect(d, d)?; // rank check up front
    let mut active = Active::new(model);
    let max_rounds = model.catalog().len() + 2;
    for _ in 0..max_rounds {
        let coeffs = if active.indices.is_empty() {
            Vec::new()
        } else {
            let gram = active.gram()?;
            if !is_negative_definite(&gram) {
                return Ok(ZariskiOutcome::NotPseudoeffective);
            }
            let sol = gauss_solve(&gram, &active.rhs(d)?).ok_or(
                PositivityError::InvariantViolation("singular definite gram"),
            )?;
            if sol.iter().any(Rat::is_negative) {
                return Ok(ZariskiOutcome::NotPseudoeffective);
            }
            sol
        };
        let mut p = d.clone();
        for (&idx, a) in active.indices.iter().zip(&coeffs) {
            p = p.add_scaled(&model.catalog()[idx].cls, &-a);
        }
        let mut violator: Option<usize> = None;
        for (idx, rec) in model.catalog().iter().enumerate() {
            if active.indices.contains(&idx) {
                continue;
            }
            if model.intersect(&p, &rec.cls)?.is_negative() {
                violator = Some(idx);
                break;
            }
        }
        match violator {
            None => {
                if model.intersect(&p, &p)?.is_negative() {
                    return Ok(ZariskiOutcome::NotPseudoeffective);
                }
                let mut negative_part = BTreeMap::new();
                for (&idx, a) in active.indices.iter().zip(&coeffs) {
                    if !a.is_zero() {
                        negative_part.insert(model.catalog()[idx].label, a.clone());
                    }
                }
                return Ok(ZariskiOutcome::Pseudoeffective(ZariskiDecomposition {
                    positive_part: p,
                    negative_part,
                }));
            }
            Some(idx) => {
                // A nonnegative-square catalog class is nef here, so a
                // negative pairing certifies non-effectivity.
                let rec = &model.catalog()[idx];
                if rec.role == CurveRole::NefTest || !rec.self_intersection.is_negative() {
                    return Ok(ZariskiOutcome::NotPseudoeffective);
                }
                active.indices.push(idx);
            }
        }
    }
    Err(PositivityError::InvariantViolation(
        "active set exceeded catalog size",
    ))
}

/// Volume: square of the positive part, `0` off the effective cone.
pub fn volume(model: &SurfaceModel, d: &DivisorClass) -> Result<Rat, PositivityError> {
    match zariski(model, d)? {
        ZariskiOutcome::Pseudoeffective(z) => {
            Ok(model.intersect(&z.positive_part, &z.positive_part)?)
        }
        ZariskiOutcome::NotPseudoeffective => Ok(Rat::zero()),
    }
}

/// All predicates at once.
pub fn report(model: &SurfaceModel, d: &DivisorClass) -> Result<PositivityReport, PositivityError> {
    let outcome = zariski(model, d)?;
    let (is_pseff, volume, decomposition) = match outcome {
        ZariskiOutcome::Pseudoeffective(z) => {
            let v = model.intersect(&z.positive_part, &z.positive_part)?;
            (true, v, Some(z))
        }
        ZariskiOutcome::NotPseudoeffective => (false, Rat::zero(), None),
    };
    Ok(PositivityReport {
        is_pseff,
        is_nef: is_nef(model, d)?,
        is_ample: is_ample(model, d)?,
        volume,
        decomposition,
    })
}

/// Affine form `c0 + c1 x`.
#[derive(Clone, Debug)]
struct Affine {
    c0: Rat,
    c1: Rat,
}

impl Affine {
    fn at(&self, x: &Rat) -> Rat {
        &self.c0 + &self.c1 * x
    }

    fn root(&self) -> Option<Rat> {
        if self.c1.is_zero() {
            None
        } else {
            Some(-&self.c0 / &self.c1)
        }
    }
}

fn quad_at(q: &[Rat; 3], x: &Rat) -> Rat {
    &q[0] + &q[1] * x + &q[2] * x.square()
}

enum NegOnset {
    /// No strictly negative values in the inspected range.
    NoneWithin,
    At(Rat),
    /// The onset lies within range but is an irrational quadratic root.
    Irrational,
}

/// First `t` in `[from, bound]` (bound `None` = unbounded) after which
/// `q0 + q1 t + q2 t^2` takes strictly negative values. Requires the value
/// at `from` to be nonnegative.
fn negativity_onset(q: &[Rat; 3], from: &Rat, bound: Option<&Rat>) -> NegOnset {
    let within = |t: &Rat| -> bool { bound.is_none_or(|b| t <= b) };
    let q2 = &q[2];
    if q2.is_zero() {
        if q[1].is_negative() {
            let t0 = -&q[0] / &q[1];
            let t0 = if &t0 < from { from.clone() } else { t0 };
            if within(&t0) {
                return NegOnset::At(t0);
            }
        }
        return NegOnset::NoneWithin;
    }
    let disc = q[1].square() - &q[0] * q2 * 4;
    if q2.is_positive() {
        // Negative exactly between the two roots.
        if !disc.is_positive() {
            return NegOnset::NoneWithin;
        }
        // Onset = smaller root r1 when r1 >= from; otherwise the value at
        // `from` being nonnegative forces from >= r2 and nothing follows.
        match disc.sqrt_exact() {
            Some(s) => {
                let r1 = (-&q[1] - &s) / (q2 * 2);
                let r2 = (-&q[1] + &s) / (q2 * 2);
                if &r1 >= from && within(&r1) {
                    NegOnset::At(r1)
                } else if &r1 < from && from < &r2 {
                    NegOnset::At(from.clone())
                } else {
                    NegOnset::NoneWithin
                }
            }
            None => {
                // Decide whether the dip (r1, r2) intersects (from, bound]
                // without computing the roots.
                let vertex = -&q[1] / (q2 * 2);
                let dips = match bound {
                    Some(b) => {
                        quad_at(q, b).is_negative()
                            || (&vertex > from && &vertex < b && quad_at(q, &vertex).is_negative())
                    }
                    None => &vertex > from && quad_at(q, &vertex).is_negative(),
                };
                if dips {
                    NegOnset::Irrational
                } else {
                    NegOnset::NoneWithin
                }
            }
        }
    } else {
        // Downward parabola: negative outside [r1, r2]; nonnegative at
        // `from` means from <= r2 and the onset is r2.
        if disc.is_negative() {
            // Everywhere negative contradicts the precondition; treat as
            // immediate onset for robustness.
            return NegOnset::At(from.clone());
        }
        match disc.sqrt_exact() {
            Some(s) => {
                let r2 = (-&q[1] - &s) / (q2 * 2);
                let r2 = if &r2 < from { from.clone() } else { r2 };
                if within(&r2) {
                    NegOnset::At(r2)
                } else {
                    NegOnset::NoneWithin
                }
            }
            None => match bound {
                Some(b) => {
                    if quad_at(q, b).is_negative() {
                        NegOnset::Irrational
                    } else {
                        NegOnset::NoneWithin
                    }
                }
                None => NegOnset::Irrational,
            },
        }
    }
}

#[derive(PartialEq, Eq, Clone, Copy, Debug)]
enum EventKind {
    /// Pairing with a nef catalog class reaches zero: the ray exits the
    /// effective cone here.
    Exit,
    /// A negative curve starts pairing negatively: it joins the support.
    Enter,
    /// An active coefficient would turn negative (monotonicity violation).
    Leave,
}

/// Walk the chambers of `x -> L - x Z` from `x = 0` until the ray leaves the
/// effective cone, recording the volume quadratic on every chamber.
pub fn ray_walk(
    model: &SurfaceModel,
    l: &DivisorClass,
    z: &DivisorClass,
) -> Result<RayWalk, PositivityError> {
    let start = match zariski(model, l)? {
        ZariskiOutcome::Pseudoeffective(d) => d,
        ZariskiOutcome::NotPseudoeffective => return Err(PositivityError::InputNotPseudoeffective),
    };
    let mut active = Active::new(model);
    for (idx, rec) in model.catalog().iter().enumerate() {
        if start.negative_part.contains_key(&rec.label) {
            active.indices.push(idx);
        }
    }

    let mut segments: Vec<RaySegment> = Vec::new();
    let mut x = Rat::zero();
    let max_rounds = model.catalog().len() + 2;
    for _ in 0..max_rounds {
        // Negative-part coefficients are affine in x: a(x) = a0 + x a1.
        let (a0, a1) = if active.indices.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let gram = active.gram()?;
            if !is_negative_definite(&gram) {
                return Err(PositivityError::InvariantViolation(
                    "active support lost negative definiteness",
                ));
            }
            let rhs0 = active.rhs(l)?;
            let rhs1: Vec<Rat> = active.rhs(z)?.into_iter().map(|v| -v).collect();
            let a0 = gauss_solve(&gram, &rhs0).ok_or(PositivityError::InvariantViolation(
                "singular definite gram",
            ))?;
            let a1 = gauss_solve(&gram, &rhs1).ok_or(PositivityError::InvariantViolation(
                "singular definite gram",
            ))?;
            (a0, a1)
        };
        // P(x) = P0 + x P1.
        let mut p0 = l.clone();
        let mut p1 = z.scale(&Rat::int(-1));
        for ((&idx, c0), c1) in active.indices.iter().zip(&a0).zip(&a1) {
            let cls = &model.catalog()[idx].cls;
            p0 = p0.add_scaled(cls, &-c0);
            p1 = p1.add_scaled(cls, &-c1);
        }

        // Pairing and coefficient events.
        let mut best: Option<(Rat, EventKind, usize)> = None;
        let consider = |root: Rat, kind: EventKind, idx: usize, best: &mut Option<_>| {
            let better = match best {
                None => true,
                Some((r, k, i)) => (&root, kind_rank(kind), idx) < (r, kind_rank(*k), *i),
            };
            if better {
                *best = Some((root, kind, idx));
            }
        };
        for (idx, rec) in model.catalog().iter().enumerate() {
            if active.indices.contains(&idx) {
                continue;
            }
            let s = Affine {
                c0: model.intersect(&p0, &rec.cls)?,
                c1: model.intersect(&p1, &rec.cls)?,
            };
            if s.at(&x).is_negative() {
                return Err(PositivityError::InvariantViolation(
                    "negative pairing at chamber start",
                ));
            }
            if s.c1.is_negative() {
                let root = s.root().expect("nonzero slope");
                let root = if root < x { x.clone() } else { root };
                let kind = if rec.role == CurveRole::NefTest || !rec.self_intersection.is_negative()
                {
                    EventKind::Exit
                } else {
                    EventKind::Enter
                };
                consider(root, kind, idx, &mut best);
            }
        }
        for ((&idx, c0), c1) in active.indices.iter().zip(&a0).zip(&a1) {
            if c1.is_negative() {
                let root = -c0 / c1;
                if root >= x {
                    consider(root, EventKind::Leave, idx, &mut best);
                }
            }
        }

        // Volume quadratic on this chamber: V(x) = P(x) . (L - x Z).
        let v0 = model.intersect(&p0, l)?;
        let v1 = model.intersect(&p1, l)? - model.intersect(&p0, z)?;
        let v2 = -model.intersect(&p1, z)?;
        let q = [v0, v1, v2];
        if quad_at(&q, &x).is_negative() {
            return Err(PositivityError::InvariantViolation(
                "negative volume at chamber start",
            ));
        }

        let bound = best.as_ref().map(|(r, _, _)| r.clone());
        match negativity_onset(&q, &x, bound.as_ref()) {
            NegOnset::At(tau) => {
                push_segment(&mut segments, &x, &tau, &q);
                return Ok(RayWalk {
                    segments,
                    end: ThresholdOutcome::Value(tau),
                });
            }
            NegOnset::Irrational => {
                return Err(PositivityError::IrrationalThreshold {
                    q0: q[0].clone(),
                    q1: q[1].clone(),
                    q2: q[2].clone(),
                    after: x,
                });
            }
            NegOnset::NoneWithin => {}
        }
        match best {
            None => {
                return Ok(RayWalk {
                    segments,
                    end: ThresholdOutcome::Unbounded,
                })
            }
            Some((root, EventKind::Exit, _)) => {
                if !quad_at(&q, &root).is_zero() {
                    return Err(PositivityError::InvariantViolation(
                        "exited the effective cone with positive volume",
                    ));
                }
                push_segment(&mut segments, &x, &root, &q);
                return Ok(RayWalk {
                    segments,
                    end: ThresholdOutcome::Value(root),
                });
            }
            Some((_, EventKind::Leave, _)) => {
                return Err(PositivityError::InvariantViolation(
                    "active coefficient left the support along the ray",
                ));
            }
            Some((root, EventKind::Enter, idx)) => {
                push_segment(&mut segments, &x, &root, &q);
                x = root;
                active.indices.push(idx);
            }
        }
    }
    Err(PositivityError::InvariantViolation(
        "ray walk exceeded catalog size",
    ))
}

fn kind_rank(kind: EventKind) -> u8 {
    match kind {
        EventKind::Exit => 0,
        EventKind::Enter => 1,
        EventKind::Leave => 2,
    }
}

fn push_segment(segments: &mut Vec<RaySegment>, lo: &Rat, hi: &Rat, q: &[Rat; 3]) {
    if lo < hi {
        segments.push(RaySegment {
            x_lo: lo.clone(),
            x_hi: hi.clone(),
            q0: q[0].clone(),
            q1: q[1].clone(),
            q2: q[2].clone(),
        });
    }
}

/// Effective threshold `sup { x >= 0 : L - x Z effective }` for an effective
/// `L`, by exact chamber walking.
pub fn pseff_threshold(
    model: &SurfaceModel,
    l: &DivisorClass,
    z: &DivisorClass,
) -> Result<ThresholdOutcome, PositivityError> {
    Ok(ray_walk(model, l, z)?.end)
}

/// Ample threshold `sup { x : L - x Z ample }` for ample `L`: minimum over
/// catalog pairing roots (where the pairing decreases) and the first zero of
/// the square `(L - x Z)^2`.
pub fn seshadri(
    model: &SurfaceModel,
    l: &DivisorClass,
    z: &DivisorClass,
) -> Result<Rat, PositivityError> {
    if !is_ample(model, l)? {
        return Err(PositivityError::NotAmple);
    }
    let mut linear_min: Option<Rat> = None;
    for rec in model.catalog() {
        let den = model.intersect(z, &rec.cls)?;
        if den.is_positive() {
            let root = model.intersect(l, &rec.cls)? / den;
            linear_min = Some(match linear_min {
                None => root,
                Some(m) => m.min(root),
            });
        }
    }
    // (L - x Z)^2 = L^2 - 2 L.Z x + Z^2 x^2.
    let q = [
        model.intersect(l, l)?,
        -model.intersect(l, z)? * 2,
        model.intersect(z, z)?,
    ];
    let zero = Rat::zero();
    match negativity_onset(&q, &zero, linear_min.as_ref()) {
        NegOnset::At(t) => {
            // Square reaches zero at t: ampleness ends there or at the
            // earlier pairing root.
            Ok(match linear_min {
                Some(m) => m.min(t),
                None => t,
            })
        }
        NegOnset::Irrational => Err(PositivityError::IrrationalThreshold {
            q0: q[0].clone(),
            q1: q[1].clone(),
            q2: q[2].clone(),
            after: zero,
        }),
        NegOnset::NoneWithin => {
            // The square may *touch* zero at the boundary of the inspected
            // range without crossing; ample fails from that point on.
            if let Some(m) = linear_min {
                return Ok(m);
            }
            // No pairing root and no square root: the ray stays ample.
            Err(PositivityError::UnboundedThreshold)
        }
    }
}
