//! Local log-canonicity on a smooth surface germ.
//!
//! Two independent routes are provided and fuzz-tested against each other:
//!
//! * *Criteria*: sufficient conditions in terms of local intersection
//!   numbers at a point (`a`, `b`, the multiplicity `m` of the residual
//!   divisor, and its pairings against the two marked curves). They return
//!   `lc` or `inapplicable`, never `not_lc`.
//! * *Oracle*: exact recursion on a cluster of infinitely-near points with
//!   smooth weighted branches. The pair is lifted through point blow-ups
//!   (exceptional coefficient = multiplicity minus one) until every point is
//!   simple normal crossing; this decides log canonicity exactly for such
//!   configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::rat::{rat, Rat};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GermError {
    #[error("branch {0} has an empty path")]
    EmptyPath(usize),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{child}` is not a child of `{parent}`")]
    NotAChild { parent: String, child: String },
    #[error("branch {0} does not start at a root node")]
    PathNotFromRoot(usize),
    #[error("cycle through node `{0}`")]
    CyclicTree(String),
    #[error("branch {0} has a negative coefficient")]
    NegativeCoefficient(usize),
    #[error("no branch with index {0}")]
    BranchIndex(usize),
    #[error("blow-up recursion exceeded the depth cap {cap}")]
    DepthCapExceeded { cap: usize },
    #[error("germ text parse error: {0}")]
    Parse(String),
    #[error("local data out of range: {0}")]
    DataRange(String),
    #[error("boundary parameters a = 1 or b = 1 are outside the two-curve criterion")]
    TheoremBoundary,
}

/// Local numerical data of a pair at a smooth point: coefficients of the two
/// marked curves, multiplicity of the residual divisor, and its local
/// pairings with the marked curves.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LocalData {
    pub a: Rat,
    pub b: Rat,
    pub m: Rat,
    pub b_omega: Rat,
    pub c_omega: Rat,
    pub transversal: bool,
}

impl LocalData {
    pub fn new(
        a: Rat,
        b: Rat,
        m: Rat,
        b_omega: Rat,
        c_omega: Rat,
        transversal: bool,
    ) -> Result<Self, GermError> {
        let unit = |name: &str, v: &Rat| -> Result<(), GermError> {
            if v.is_negative() || *v > Rat::one() {
                Err(GermError::DataRange(format!("{name} = {v} outside [0, 1]")))
            } else {
                Ok(())
            }
        };
        unit("a", &a)?;
        unit("b", &b)?;
        for (name, v) in [("m", &m), ("B.Omega", &b_omega), ("C.Omega", &c_omega)] {
            if v.is_negative() {
                return Err(GermError::DataRange(format!("{name} = {v} negative")));
            }
        }
        Ok(LocalData {
            a,
            b,
            m,
            b_omega,
            c_omega,
            transversal,
        })
    }

    /// Whether the data can come from an actual germ with both marked
    /// curves through the point: the multiplicity is dominated by both
    /// local pairings.
    pub fn geometrically_consistent(&self) -> bool {
        self.m <= self.b_omega && self.m <= self.c_omega
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LcStatus {
    Lc,
    NotLc,
    Inapplicable,
}

/// Three-valued verdict with a textual trace. `inapplicable` carries no
/// information about the pair; the criteria are sufficient conditions only.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LcVerdict {
    pub status: LcStatus,
    pub witness: String,
}

impl LcVerdict {
    fn lc(witness: impl Into<String>) -> Self {
        LcVerdict {
            status: LcStatus::Lc,
            witness: witness.into(),
        }
    }

    fn not_lc(witness: impl Into<String>) -> Self {
        LcVerdict {
            status: LcStatus::NotLc,
            witness: witness.into(),
        }
    }

    fn inapplicable(witness: impl Into<String>) -> Self {
        LcVerdict {
            status: LcStatus::Inapplicable,
            witness: witness.into(),
        }
    }

    pub fn is_lc(&self) -> bool {
        self.status == LcStatus::Lc
    }
}

impl fmt::Display for LcVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.status {
            LcStatus::Lc => "lc",
            LcStatus::NotLc => "not_lc",
            LcStatus::Inapplicable => "inapplicable",
        };
        write!(f, "{s} ({})", self.witness)
    }
}

/// Adjunction criterion for the pair `(S, a C + Omega)`: log canonical at
/// the point when `(C.Omega)_p <= 1`.
pub fn criterion_adjunction(d: &LocalData) -> LcVerdict {
    if d.c_omega <= Rat::one() {
        LcVerdict::lc(format!("C.Omega = {} <= 1", d.c_omega))
    } else {
        LcVerdict::inapplicable(format!("C.Omega = {} > 1", d.c_omega))
    }
}

/// Multiplicity-refined criterion for `(S, a C + Omega)`: log canonical when
/// `m <= 1` and `(C.Omega)_p <= 2 - a`, or `m > 1` and `(C.Omega)_p <= 1`.
pub fn criterion_mult_refined(d: &LocalData) -> LcVerdict {
    if d.m <= Rat::one() {
        let cap = Rat::int(2) - &d.a;
        if d.c_omega <= cap {
            LcVerdict::lc(format!(
                "m <= 1 and C.Omega = {} <= 2 - a = {cap}",
                d.c_omega
            ))
        } else {
            LcVerdict::inapplicable(format!("C.Omega = {} > 2 - a = {cap}", d.c_omega))
        }
    } else if d.c_omega <= Rat::one() {
        LcVerdict::lc(format!("m > 1 and C.Omega = {} <= 1", d.c_omega))
    } else {
        LcVerdict::inapplicable("m > 1 and C.Omega > 1")
    }
}

/// Two-curve criterion for `(S, (1-b) B + a C + Omega)` with `B`, `C`
/// transverse at the point and `a, b` in `[0, 1)`. Log canonical when
/// `m > 1` and `(B.Omega)_p <= 1 - a`, or `m` in `(0, 1]`, one of the side
/// conditions `a + (C.Omega)_p - b <= 1` / `a + m <= 1` holds, and
/// `(B.Omega)_p <= m/(m-b)_+ (1-a) - b` (an empty bound when `m <= b`).
pub fn criterion_two_curves(d: &LocalData) -> Result<LcVerdict, GermError> {
    if d.a == Rat::one() || d.b == Rat::one() {
        return Err(GermError::TheoremBoundary);
    }
    if !d.transversal {
        return Ok(LcVerdict::inapplicable("marked curves are not transverse"));
    }
    if d.m > Rat::one() {
        let cap = Rat::one() - &d.a;
        return Ok(if d.b_omega <= cap {
            LcVerdict::lc(format!(
                "m > 1 and B.Omega = {} <= 1 - a = {cap}",
                d.b_omega
            ))
        } else {
            LcVerdict::inapplicable(format!("B.Omega = {} > 1 - a = {cap}", d.b_omega))
        });
    }
    if d.m.is_zero() {
        return Ok(LcVerdict::inapplicable("m = 0 is outside the stated range"));
    }
    let side = &d.a + &d.c_omega - &d.b <= Rat::one() || &d.a + &d.m <= Rat::one();
    if !side {
        return Ok(LcVerdict::inapplicable(
            "neither a + C.Omega - b <= 1 nor a + m <= 1",
        ));
    }
    if d.m <= d.b {
        return Ok(LcVerdict::lc("m <= b: no bound on B.Omega required"));
    }
    let cap = &d.m / (&d.m - &d.b) * (Rat::one() - &d.a) - &d.b;
    Ok(if d.b_omega <= cap {
        LcVerdict::lc(format!(
            "B.Omega = {} <= m/(m-b)(1-a) - b = {cap}",
            d.b_omega
        ))
    } else {
        LcVerdict::inapplicable(format!("B.Omega = {} > {cap}", d.b_omega))
    })
}

/// Cleaned-up two-curve criterion, valid for `a, b` in `[0, 1]`: replaces
/// the multiplicity by `(C.Omega)_p` in the bound and drops the side
/// conditions.
pub fn criterion_two_curves_clean(d: &LocalData) -> LcVerdict {
    if !d.transversal {
        return LcVerdict::inapplicable("marked curves are not transverse");
    }
    if d.c_omega.is_zero() {
        return LcVerdict::lc("C.Omega = 0");
    }
    if d.m > Rat::one() {
        let cap = Rat::one() - &d.a;
        return if d.b_omega <= cap {
            LcVerdict::lc(format!(
                "m > 1 and B.Omega = {} <= 1 - a = {cap}",
                d.b_omega
            ))
        } else {
            LcVerdict::inapplicable(format!("B.Omega = {} > 1 - a = {cap}", d.b_omega))
        };
    }
    if d.m.is_zero() {
        return LcVerdict::inapplicable("m = 0 with C.Omega > 0 is not a germ datum");
    }
    if d.c_omega <= d.b {
        return LcVerdict::lc("C.Omega <= b: no bound on B.Omega required");
    }
    let cap = &d.c_omega / (&d.c_omega - &d.b) * (Rat::one() - &d.a) - &d.b;
    if d.b_omega <= cap {
        LcVerdict::lc(format!(
            "B.Omega = {} <= C.Omega/(C.Omega-b)(1-a) - b = {cap}",
            d.b_omega
        ))
    } else {
        LcVerdict::inapplicable(format!("B.Omega = {} > {cap}", d.b_omega))
    }
}

/// A smooth branch through a chain of infinitely-near points, with a
/// coefficient. The path starts at a root of the cluster and follows
/// parent-child edges; the branch passes through each of its points with
/// multiplicity one.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GermBranch {
    pub path: Vec<String>,
    pub coefficient: Rat,
}

/// A cluster of infinitely-near points (a forest of named nodes) together
/// with weighted smooth branches.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GermConfiguration {
    /// node -> parent (roots map to `None`).
    parent: BTreeMap<String, Option<String>>,
    branches: Vec<GermBranch>,
}

impl GermConfiguration {
    pub fn new(edges: Vec<(String, String)>, branches: Vec<GermBranch>) -> Result<Self, GermError> {
        let mut parent: BTreeMap<String, Option<String>> = BTreeMap::new();
        for (p, c) in &edges {
            parent.entry(p.clone()).or_insert(None);
            match parent.get(c) {
                Some(Some(existing)) if existing != p => {
                    return Err(GermError::NotAChild {
                        parent: p.clone(),
                        child: c.clone(),
                    })
                }
                _ => {
                    parent.insert(c.clone(), Some(p.clone()));
                }
            }
        }
        // Register isolated path nodes and validate branches.
        for (i, b) in branches.iter().enumerate() {
            if b.path.is_empty() {
                return Err(GermError::EmptyPath(i));
            }
            if b.coefficient.is_negative() {
                return Err(GermError::NegativeCoefficient(i));
            }
            for node in &b.path {
                if !parent.contains_key(node) {
                    if node == &b.path[0] {
                        parent.insert(node.clone(), None);
                    } else {
                        return Err(GermError::UnknownNode(node.clone()));
                    }
                }
            }
        }
        let cfg = GermConfiguration { parent, branches };
        // Acyclicity: walking up from any node must terminate.
        for node in cfg.parent.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = node.clone();
            while let Some(Some(p)) = cfg.parent.get(&cur) {
                if !seen.insert(cur.clone()) {
                    return Err(GermError::CyclicTree(node.clone()));
                }
                cur = p.clone();
            }
        }
        for (i, b) in cfg.branches.iter().enumerate() {
            if cfg.parent[&b.path[0]].is_some() {
                return Err(GermError::PathNotFromRoot(i));
            }
            for pair in b.path.windows(2) {
                if cfg.parent[&pair[1]].as_deref() != Some(pair[0].as_str()) {
                    return Err(GermError::NotAChild {
                        parent: pair[0].clone(),
                        child: pair[1].clone(),
                    });
                }
            }
        }
        Ok(cfg)
    }

    pub fn branches(&self) -> &[GermBranch] {
        &self.branches
    }

    pub fn roots(&self) -> Vec<String> {
        let mut roots: BTreeSet<String> = BTreeSet::new();
        for b in &self.branches {
            roots.insert(b.path[0].clone());
        }
        roots.into_iter().collect()
    }

    /// Edges as (parent, child) pairs in deterministic order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.parent
            .iter()
            .filter_map(|(c, p)| p.as_ref().map(|p| (p.clone(), c.clone())))
            .collect()
    }

    /// Serialize as `edge`/`branch` lines.
    pub fn to_germ_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in self.edges() {
            out.push_str(&format!("edge {p} {c}\n"));
        }
        for b in &self.branches {
            out.push_str(&format!("branch {} {}\n", b.path.join(","), b.coefficient));
        }
        out
    }

    pub fn from_germ_text(text: &str) -> Result<Self, GermError> {
        let mut edges = Vec::new();
        let mut branches = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("edge") => {
                    let p = it
                        .next()
                        .ok_or_else(|| GermError::Parse("edge needs two nodes".into()))?;
                    let c = it
                        .next()
                        .ok_or_else(|| GermError::Parse("edge needs two nodes".into()))?;
                    edges.push((p.to_string(), c.to_string()));
                }
                Some("branch") => {
                    let path = it
                        .next()
                        .ok_or_else(|| GermError::Parse("branch needs a path".into()))?;
                    let coeff = it
                        .next()
                        .ok_or_else(|| GermError::Parse("branch needs a coefficient".into()))?;
                    let coefficient: Rat = coeff
                        .parse()
                        .map_err(|_| GermError::Parse(format!("bad coefficient `{coeff}`")))?;
                    branches.push(GermBranch {
                        path: path.split(',').map(|s| s.trim().to_string()).collect(),
                        coefficient,
                    });
                }
                Some(other) => {
                    return Err(GermError::Parse(format!("unknown directive `{other}`")))
                }
                None => {}
            }
        }
        GermConfiguration::new(edges, branches)
    }
}

/// Local intersection number of two smooth branches: the number of cluster
/// nodes their paths share.
pub fn germ_intersection(cfg: &GermConfiguration, i: usize, j: usize) -> Result<Rat, GermError> {
    let bi = cfg.branches.get(i).ok_or(GermError::BranchIndex(i))?;
    let bj = cfg.branches.get(j).ok_or(GermError::BranchIndex(j))?;
    let set: BTreeSet<&String> = bi.path.iter().collect();
    let shared = bj.path.iter().filter(|n| set.contains(n)).count();
    Ok(Rat::int(shared as i64))
}

/// Result of the exact blow-up recursion.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct OracleRun {
    pub verdict: LcVerdict,
    /// Coefficient of the exceptional curve created over each blown-up node.
    pub exceptional_coeffs: BTreeMap<String, Rat>,
    pub blow_ups: usize,
}

/// Cap sized from the total pairwise intersection, the same quantity that
/// bounds the length of the separating blow-up chain.
pub fn default_depth_cap(cfg: &GermConfiguration) -> usize {
    let n = cfg.branches.len();
    let mut total = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let set: BTreeSet<&String> = cfg.branches[i].path.iter().collect();
            total += cfg.branches[j]
                .path
                .iter()
                .filter(|x| set.contains(x))
                .count();
        }
    }
    4 * total + 8
}

struct OracleCtx {
    cap: usize,
    blow_ups: usize,
    exceptional: BTreeMap<String, Rat>,
}

/// Exact log-canonicity of the weighted germ at every root point, by
/// repeated blow-up until the configuration is simple normal crossing.
pub fn oracle_is_lc(cfg: &GermConfiguration, depth_cap: usize) -> Result<OracleRun, GermError> {
    let mut ctx = OracleCtx {
        cap: depth_cap,
        blow_ups: 0,
        exceptional: BTreeMap::new(),
    };
    let mut failure: Option<String> = None;
    for root in cfg.roots() {
        let members: Vec<(usize, &[String])> = cfg
            .branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.path[0] == root)
            .map(|(i, b)| (i, &b.path[1..]))
            .collect();
        if let Some(w) = check_site(cfg, None, &root, members, &mut ctx)? {
            failure = Some(w);
            break;
        }
    }
    let verdict = match failure {
        Some(w) => LcVerdict::not_lc(w),
        None => LcVerdict::lc(format!(
            "simple normal crossing after {} blow-ups",
            ctx.blow_ups
        )),
    };
    Ok(OracleRun {
        verdict,
        exceptional_coeffs: ctx.exceptional,
        blow_ups: ctx.blow_ups,
    })
}

fn check_site(
    cfg: &GermConfiguration,
    exceptional: Option<&Rat>,
    node: &str,
    members: Vec<(usize, &[String])>,
    ctx: &mut OracleCtx,
) -> Result<Option<String>, GermError> {
    for (idx, _) in &members {
        let c = &cfg.branches[*idx].coefficient;
        if *c > Rat::one() {
            return Ok(Some(format!(
                "branch {idx} has coefficient {c} > 1 at node {node}"
            )));
        }
    }
    let mut mu = exceptional.cloned().unwrap_or_else(Rat::zero);
    for (idx, _) in &members {
        mu += &cfg.branches[*idx].coefficient;
    }
    let n_components = members.len() + usize::from(exceptional.is_some());
    // Two branches are tangent here exactly when they continue to the same
    // infinitely-near point; the exceptional curve is transverse to all.
    let tangent = members.iter().enumerate().any(|(k, (_, rest_i))| {
        members.iter().skip(k + 1).any(
            |(_, rest_j)| matches!((rest_i.first(), rest_j.first()), (Some(a), Some(b)) if a == b),
        )
    });
    if n_components <= 2 && !tangent {
        return Ok(None);
    }
    ctx.blow_ups += 1;
    if ctx.blow_ups > ctx.cap {
        return Err(GermError::DepthCapExceeded { cap: ctx.cap });
    }
    let e_new = mu - 1;
    ctx.exceptional.insert(node.to_string(), e_new.clone());
    if e_new > Rat::one() {
        return Ok(Some(format!(
            "exceptional curve over node {node} has coefficient {e_new} > 1"
        )));
    }
    let mut groups: BTreeMap<&String, Vec<(usize, &[String])>> = BTreeMap::new();
    for (idx, rest) in members {
        if let Some(next) = rest.first() {
            groups.entry(next).or_default().push((idx, &rest[1..]));
        }
        // Branches ending here separate from the exceptional curve at
        // fresh points; their coefficients are already checked.
    }
    for (next, group) in groups {
        if let Some(w) = check_site(cfg, Some(&e_new), next, group, ctx)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// One blow-up of a root point, returned as honest germ configurations:
/// the exceptional coefficient and one configuration per point of the
/// exceptional curve where the transformed boundary meets it. Log
/// canonicity at the root is equivalent to the exceptional coefficient
/// being at most one together with log canonicity of every site.
pub fn blow_up_root(
    cfg: &GermConfiguration,
    root: &str,
) -> Result<(Rat, Vec<GermConfiguration>), GermError> {
    if !cfg.parent.contains_key(root) || cfg.parent[root].is_some() {
        return Err(GermError::UnknownNode(root.to_string()));
    }
    let members: Vec<&GermBranch> = cfg.branches.iter().filter(|b| b.path[0] == root).collect();
    let mu = members
        .iter()
        .fold(Rat::zero(), |acc, b| acc + &b.coefficient);
    let e_new = mu - 1;

    let mut sites = Vec::new();
    let mut by_next: BTreeMap<&String, Vec<&GermBranch>> = BTreeMap::new();
    let mut terminating: Vec<&GermBranch> = Vec::new();
    for b in &members {
        match b.path.get(1) {
            Some(next) => by_next.entry(next).or_default().push(b),
            None => terminating.push(b),
        }
    }
    for (next, group) in by_next {
        // Subtree rooted at `next`, with the exceptional curve appearing as
        // a transverse branch through `next` only.
        let mut edges = Vec::new();
        let mut keep: BTreeSet<&String> = BTreeSet::new();
        keep.insert(next);
        let mut grew = true;
        while grew {
            grew = false;
            for (c, p) in &cfg.parent {
                if let Some(p) = p {
                    if keep.contains(p) && !keep.contains(c) {
                        keep.insert(c);
                        grew = true;
                    }
                }
            }
        }
        for (c, p) in &cfg.parent {
            if let Some(p) = p {
                if keep.contains(c) && keep.contains(p) {
                    edges.push((p.clone(), c.clone()));
                }
            }
        }
        let mut branches: Vec<GermBranch> = group
            .iter()
            .map(|b| GermBranch {
                path: b.path[1..].to_vec(),
                coefficient: b.coefficient.clone(),
            })
            .collect();
        branches.push(GermBranch {
            path: vec![next.clone()],
            coefficient: e_new.clone(),
        });
        sites.push(GermConfiguration::new(edges, branches)?);
    }
    for (k, b) in terminating.iter().enumerate() {
        let fresh = format!("{root}__sep{k}");
        sites.push(GermConfiguration::new(
            Vec::new(),
            vec![
                GermBranch {
                    path: vec![fresh.clone()],
                    coefficient: b.coefficient.clone(),
                },
                GermBranch {
                    path: vec![fresh],
                    coefficient: e_new.clone(),
                },
            ],
        )?);
    }
    Ok((e_new, sites))
}

/// Per-criterion fuzz counts.
#[derive(Clone, Default, PartialEq, Eq, Debug, Serialize)]
pub struct CriterionStats {
    pub lc_claims: u64,
    pub confirmed: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FuzzViolation {
    pub trial: u64,
    pub criterion: String,
    pub germ: String,
    pub data: LocalData,
    pub oracle_witness: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub trials: u64,
    pub adjunction: CriterionStats,
    pub mult_refined: CriterionStats,
    pub two_curves: CriterionStats,
    pub two_curves_clean: CriterionStats,
    pub violations: Vec<FuzzViolation>,
}

impl FuzzReport {
    pub fn sound(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "trials {}: adjunction {}/{}, mult_refined {}/{}, two_curves {}/{}, clean {}/{}, violations {}",
            self.trials,
            self.adjunction.confirmed,
            self.adjunction.lc_claims,
            self.mult_refined.confirmed,
            self.mult_refined.lc_claims,
            self.two_curves.confirmed,
            self.two_curves.lc_claims,
            self.two_curves_clean.confirmed,
            self.two_curves_clean.lc_claims,
            self.violations.len()
        )
    }
}

/// One random trial: a root with transverse marked branches `B`, `C`, a few
/// weighted residual branches, and parameters `a`, `b`.
struct Trial {
    edges: Vec<(String, String)>,
    b_path: Vec<String>,
    c_path: Vec<String>,
    omega: Vec<(Vec<String>, Rat)>,
    a: Rat,
    b: Rat,
}

fn random_trial(rng: &mut ChaCha8Rng) -> Trial {
    let root = "p".to_string();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut counter = 0usize;
    let fresh_child =
        |parent: &str, edges: &mut Vec<(String, String)>, counter: &mut usize| -> String {
            let name = format!("n{}", *counter);
            *counter += 1;
            edges.push((parent.to_string(), name.clone()));
            name
        };

    // Marked branches, transverse to each other: they share only the root.
    let mut b_path = vec![root.clone()];
    if rng.gen_bool(0.35) {
        let q = fresh_child(&root, &mut edges, &mut counter);
        b_path.push(q.clone());
        if rng.gen_bool(0.3) {
            b_path.push(fresh_child(&q, &mut edges, &mut counter));
        }
    }
    let mut c_path = vec![root.clone()];
    if rng.gen_bool(0.35) {
        let q = fresh_child(&root, &mut edges, &mut counter);
        c_path.push(q.clone());
        if rng.gen_bool(0.3) {
            c_path.push(fresh_child(&q, &mut edges, &mut counter));
        }
    }

    let child_names = |edges: &Vec<(String, String)>, node: &str| -> Vec<String> {
        edges
            .iter()
            .filter(|(p, _)| p == node)
            .map(|(_, c)| c.clone())
            .collect()
    };

    let coeff = |rng: &mut ChaCha8Rng| -> Rat {
        let den = rng.gen_range(1..=8i64);
        let num = rng.gen_range(0..=den + den / 2);
        rat(num, den)
    };

    let n_omega = rng.gen_range(0..=3usize);
    let mut omega = Vec::new();
    for _ in 0..n_omega {
        let mut path = vec![root.clone()];
        let mut cur = root.clone();
        for _ in 0..3 {
            if rng.gen_bool(0.45) {
                break;
            }
            let existing = child_names(&edges, &cur);
            let next = if !existing.is_empty() && rng.gen_bool(0.6) {
                existing[rng.gen_range(0..existing.len())].clone()
            } else {
                fresh_child(&cur, &mut edges, &mut counter)
            };
            path.push(next.clone());
            cur = next;
        }
        omega.push((path, coeff(rng)));
    }

    let unit = |rng: &mut ChaCha8Rng| -> Rat {
        let den = rng.gen_range(2..=8i64);
        let num = rng.gen_range(0..=den);
        rat(num, den)
    };
    Trial {
        edges,
        b_path,
        c_path,
        omega,
        a: unit(rng),
        b: unit(rng),
    }
}

fn shared_nodes(a: &[String], b: &[String]) -> usize {
    let set: BTreeSet<&String> = a.iter().collect();
    b.iter().filter(|n| set.contains(n)).count()
}

fn run_trial(trial_no: u64, trial: &Trial, report: &mut FuzzReport) {
    let m = trial.omega.iter().fold(Rat::zero(), |acc, (_, w)| acc + w);
    let b_omega = trial.omega.iter().fold(Rat::zero(), |acc, (p, w)| {
        acc + w * Rat::int(shared_nodes(&trial.b_path, p) as i64)
    });
    let c_omega = trial.omega.iter().fold(Rat::zero(), |acc, (p, w)| {
        acc + w * Rat::int(shared_nodes(&trial.c_path, p) as i64)
    });
    let transversal = shared_nodes(&trial.b_path, &trial.c_path) == 1;
    let data = LocalData::new(
        trial.a.clone(),
        trial.b.clone(),
        m,
        b_omega,
        c_omega,
        transversal,
    )
    .expect("generated data in range");
    debug_assert!(data.geometrically_consistent());

    let pair_without_b = |trial: &Trial| -> GermConfiguration {
        let mut branches = vec![GermBranch {
            path: trial.c_path.clone(),
            coefficient: trial.a.clone(),
        }];
        for (p, w) in &trial.omega {
            branches.push(GermBranch {
                path: p.clone(),
                coefficient: w.clone(),
            });
        }
        GermConfiguration::new(trial.edges.clone(), branches).expect("valid trial germ")
    };
    let pair_with_b = |trial: &Trial| -> GermConfiguration {
        let mut branches = vec![
            GermBranch {
                path: trial.b_path.clone(),
                coefficient: Rat::one() - &trial.b,
            },
            GermBranch {
                path: trial.c_path.clone(),
                coefficient: trial.a.clone(),
            },
        ];
        for (p, w) in &trial.omega {
            branches.push(GermBranch {
                path: p.clone(),
                coefficient: w.clone(),
            });
        }
        GermConfiguration::new(trial.edges.clone(), branches).expect("valid trial germ")
    };

    let confirm = |criterion: &str,
                   verdict: &LcVerdict,
                   cfg: &GermConfiguration,
                   stats_sel: fn(&mut FuzzReport) -> &mut CriterionStats,
                   report: &mut FuzzReport| {
        if !verdict.is_lc() {
            return;
        }
        stats_sel(report).lc_claims += 1;
        let run = oracle_is_lc(cfg, default_depth_cap(cfg)).expect("oracle terminates");
        if run.verdict.is_lc() {
            stats_sel(report).confirmed += 1;
        } else {
            report.violations.push(FuzzViolation {
                trial: trial_no,
                criterion: criterion.to_string(),
                germ: cfg.to_germ_text(),
                data: data.clone(),
                oracle_witness: run.verdict.witness.clone(),
            });
        }
    };

    let no_b = pair_without_b(trial);
    confirm(
        "adjunction",
        &criterion_adjunction(&data),
        &no_b,
        |r| &mut r.adjunction,
        report,
    );
    confirm(
        "mult_refined",
        &criterion_mult_refined(&data),
        &no_b,
        |r| &mut r.mult_refined,
        report,
    );
    let with_b = pair_with_b(trial);
    if let Ok(v) = criterion_two_curves(&data) {
        confirm("two_curves", &v, &with_b, |r| &mut r.two_curves, report);
    }
    confirm(
        "two_curves_clean",
        &criterion_two_curves_clean(&data),
        &with_b,
        |r| &mut r.two_curves_clean,
        report,
    );
}

/// Soundness harness: random germ configurations; every `lc` from a
/// criterion must be confirmed by the blow-up oracle on the matching pair.
/// Per-trial generators are seeded independently, so the report does not
/// depend on the thread count.
pub fn fuzz_criteria(seed: u64, trials: u64, threads: usize) -> FuzzReport {
    let empty = |seed| FuzzReport {
        seed,
        trials: 0,
        adjunction: CriterionStats::default(),
        mult_refined: CriterionStats::default(),
        two_curves: CriterionStats::default(),
        two_curves_clean: CriterionStats::default(),
        violations: Vec::new(),
    };
    let run_range = |lo: u64, hi: u64| -> FuzzReport {
        let mut report = empty(seed);
        for t in lo..hi {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let trial = random_trial(&mut rng);
            run_trial(t, &trial, &mut report);
            report.trials += 1;
        }
        report
    };
    let threads = threads.max(1).min(trials.max(1) as usize);
    if threads == 1 {
        return run_range(0, trials);
    }
    let chunk = trials.div_ceil(threads as u64);
    let mut parts: Vec<FuzzReport> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for k in 0..threads as u64 {
            let lo = k * chunk;
            let hi = (lo + chunk).min(trials);
            if lo >= hi {
                continue;
            }
            let run_range = &run_range;
            handles.push(scope.spawn(move || run_range(lo, hi)));
        }
        for h in handles {
            parts.push(h.join().expect("fuzz worker panicked"));
        }
    });
    let mut total = empty(seed);
    for part in parts {
        total.trials += part.trials;
        total.adjunction.lc_claims += part.adjunction.lc_claims;
        total.adjunction.confirmed += part.adjunction.confirmed;
        total.mult_refined.lc_claims += part.mult_refined.lc_claims;
        total.mult_refined.confirmed += part.mult_refined.confirmed;
        total.two_curves.lc_claims += part.two_curves.lc_claims;
        total.two_curves.confirmed += part.two_curves.confirmed;
        total.two_curves_clean.lc_claims += part.two_curves_clean.lc_claims;
        total.two_curves_clean.confirmed += part.two_curves_clean.confirmed;
        total.violations.extend(part.violations);
    }
    total.violations.sort_by_key(|v| v.trial);
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branch(path: &[&str], num: i64, den: i64) -> GermBranch {
        GermBranch {
            path: path.iter().map(|s| s.to_string()).collect(),
            coefficient: rat(num, den),
        }
    }

    fn single_root(branches: Vec<GermBranch>, edges: &[(&str, &str)]) -> GermConfiguration {
        GermConfiguration::new(
            edges
                .iter()
                .map(|(p, c)| (p.to_string(), c.to_string()))
                .collect(),
            branches,
        )
        .unwrap()
    }

    fn oracle(cfg: &GermConfiguration) -> LcVerdict {
        oracle_is_lc(cfg, default_depth_cap(cfg)).unwrap().verdict
    }

    #[test]
    fn smooth_branch_threshold_is_one() {
        let at = |c: Rat| {
            let cfg = single_root(
                vec![GermBranch {
                    path: vec!["p".into()],
                    coefficient: c,
                }],
                &[],
            );
            oracle(&cfg)
        };
        assert!(at(Rat::one()).is_lc());
        assert!(!at(Rat::one() + rat(1, 1000)).is_lc());
    }

    #[test]
    fn node_threshold_is_one() {
        let at = |c: Rat| {
            let cfg = single_root(
                vec![
                    GermBranch {
                        path: vec!["p".into()],
                        coefficient: c.clone(),
                    },
                    GermBranch {
                        path: vec!["p".into()],
                        coefficient: c,
                    },
                ],
                &[],
            );
            oracle(&cfg)
        };
        assert!(at(Rat::one()).is_lc());
        assert!(!at(Rat::one() + rat(1, 1000)).is_lc());
    }

    #[test]
    fn triple_point_threshold_two_thirds() {
        let at = |c: Rat| {
            let cfg = single_root(
                (0..3)
                    .map(|_| GermBranch {
                        path: vec!["p".into()],
                        coefficient: c.clone(),
                    })
                    .collect(),
                &[],
            );
            oracle(&cfg)
        };
        assert!(at(rat(2, 3)).is_lc());
        assert!(!at(rat(2, 3) + rat(1, 1000)).is_lc());
    }

    #[test]
    fn tacnode_threshold_three_quarters() {
        let at = |c: Rat| {
            let cfg = single_root(
                vec![
                    GermBranch {
                        path: vec!["p".into(), "q".into()],
                        coefficient: c.clone(),
                    },
                    GermBranch {
                        path: vec!["p".into(), "q".into()],
                        coefficient: c,
                    },
                ],
                &[("p", "q")],
            );
            oracle(&cfg)
        };
        assert!(at(rat(3, 4)).is_lc());
        assert!(!at(rat(3, 4) + rat(1, 1000)).is_lc());
        // Exceptional coefficients along the chain: 2c - 1 then 4c - 2.
        let cfg = single_root(
            vec![branch(&["p", "q"], 3, 4), branch(&["p", "q"], 3, 4)],
            &[("p", "q")],
        );
        let run = oracle_is_lc(&cfg, default_depth_cap(&cfg)).unwrap();
        assert_eq!(run.exceptional_coeffs["p"], rat(1, 2));
        assert_eq!(run.exceptional_coeffs["q"], Rat::one());
        assert_eq!(run.blow_ups, 2);
    }

    #[test]
    fn depth_cap_is_a_typed_error() {
        let cfg = single_root(
            vec![branch(&["p", "q"], 3, 4), branch(&["p", "q"], 3, 4)],
            &[("p", "q")],
        );
        assert_eq!(
            oracle_is_lc(&cfg, 1),
            Err(GermError::DepthCapExceeded { cap: 1 })
        );
    }

    #[test]
    fn germ_intersection_counts_shared_nodes() {
        let cfg = single_root(
            vec![
                branch(&["p"], 1, 2),
                branch(&["p"], 1, 2),
                branch(&["p", "q"], 1, 2),
                branch(&["p", "q"], 1, 3),
                branch(&["z"], 1, 1),
            ],
            &[("p", "q")],
        );
        assert_eq!(germ_intersection(&cfg, 0, 1).unwrap(), Rat::one());
        assert_eq!(germ_intersection(&cfg, 2, 3).unwrap(), Rat::int(2));
        assert_eq!(germ_intersection(&cfg, 0, 4).unwrap(), Rat::zero());
        assert_eq!(
            germ_intersection(&cfg, 0, 1).unwrap(),
            germ_intersection(&cfg, 1, 0).unwrap()
        );
        assert!(germ_intersection(&cfg, 0, 9).is_err());
    }

    #[test]
    fn blow_up_transfer_identity() {
        // Verdict equals (exceptional <= 1) and all site verdicts; the
        // pairing with the residual drops by the multiplicity.
        let cases: Vec<GermConfiguration> = vec![
            single_root(
                vec![branch(&["p", "q"], 3, 4), branch(&["p", "q"], 2, 3)],
                &[("p", "q")],
            ),
            single_root(
                vec![
                    branch(&["p"], 1, 1),
                    branch(&["p"], 1, 2),
                    branch(&["p", "q"], 5, 6),
                ],
                &[("p", "q")],
            ),
            single_root(
                vec![
                    branch(&["p", "q", "s"], 5, 6),
                    branch(&["p", "q", "s"], 1, 2),
                    branch(&["p"], 1, 4),
                ],
                &[("p", "q"), ("q", "s")],
            ),
            single_root(vec![branch(&["p"], 9, 8)], &[]),
        ];
        for cfg in cases {
            let direct = oracle(&cfg);
            let (e, sites) = blow_up_root(&cfg, "p").unwrap();
            let lifted = e <= Rat::one() && sites.iter().all(|s| oracle(s).is_lc());
            assert_eq!(direct.is_lc(), lifted, "cfg:\n{}", cfg.to_germ_text());
            // Pairing transfer against the first branch as the smooth
            // reference curve: summing over the residual transforms at the
            // reference's infinitely-near point,
            // (C~ . Omega~) = (C . Omega)_p - mult_p Omega.
            let reference = &cfg.branches()[0];
            let weighted = |a: &GermBranch, b: &GermBranch| -> Rat {
                let set: BTreeSet<&String> = a.path.iter().collect();
                let shared = b.path.iter().filter(|n| set.contains(n)).count();
                &b.coefficient * Rat::int(shared as i64)
            };
            let before: Rat = cfg.branches()[1..]
                .iter()
                .fold(Rat::zero(), |acc, b| acc + weighted(reference, b));
            let mult: Rat = cfg.branches()[1..]
                .iter()
                .fold(Rat::zero(), |acc, b| acc + &b.coefficient);
            if let Some(next) = reference.path.get(1) {
                // Site branches preserve the original order with the
                // exceptional branch appended last, so the reference
                // transform is the first branch of its site.
                let site = sites
                    .iter()
                    .find(|s| s.branches()[0].path.first() == Some(next))
                    .expect("site of the reference transform");
                let ref_here = &site.branches()[0];
                assert_eq!(ref_here.path, reference.path[1..].to_vec());
                let residual = &site.branches()[1..site.branches().len() - 1];
                let after: Rat = residual
                    .iter()
                    .fold(Rat::zero(), |acc, b| acc + weighted(ref_here, b));
                assert_eq!(after, &before - &mult, "cfg:\n{}", cfg.to_germ_text());
            }
            for site in &sites {
                for i in 0..site.branches().len() {
                    for j in (i + 1)..site.branches().len() {
                        let s = germ_intersection(site, i, j).unwrap();
                        assert!(!s.is_negative());
                    }
                }
            }
        }
    }

    #[test]
    fn monotonicity_in_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let trial = random_trial(&mut rng);
            let mut branches: Vec<GermBranch> = vec![GermBranch {
                path: trial.c_path.clone(),
                coefficient: trial.a.clone(),
            }];
            for (p, w) in &trial.omega {
                branches.push(GermBranch {
                    path: p.clone(),
                    coefficient: w.clone(),
                });
            }
            let cfg = GermConfiguration::new(trial.edges.clone(), branches.clone()).unwrap();
            if oracle(&cfg).is_lc() {
                continue;
            }
            // Decreasing any coefficient of an lc configuration keeps lc;
            // contrapositive: raising coefficients of a not-lc one keeps
            // not-lc.
            for i in 0..branches.len() {
                let mut raised = branches.clone();
                raised[i].coefficient = &raised[i].coefficient + rat(1, 7);
                if raised[i].coefficient > Rat::one() {
                    continue;
                }
                let cfg2 = GermConfiguration::new(trial.edges.clone(), raised).unwrap();
                assert!(!oracle(&cfg2).is_lc());
            }
        }
    }

    #[test]
    fn criteria_examples() {
        let d = |a: Rat, b: Rat, m: Rat, bo: Rat, co: Rat| {
            LocalData::new(a, b, m, bo, co, true).unwrap()
        };
        // adjunction
        let v = criterion_adjunction(&d(
            Rat::one(),
            Rat::zero(),
            Rat::one(),
            Rat::one(),
            Rat::one(),
        ));
        assert_eq!(v.status, LcStatus::Lc);
        let v = criterion_adjunction(&d(
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ));
        assert_eq!(v.status, LcStatus::Lc);
        let v = criterion_adjunction(&d(
            Rat::zero(),
            Rat::zero(),
            Rat::one(),
            Rat::one(),
            rat(3, 2),
        ));
        assert_eq!(v.status, LcStatus::Inapplicable);

        // multiplicity-refined
        let v =
            criterion_mult_refined(&d(rat(1, 2), Rat::zero(), Rat::one(), rat(3, 2), rat(3, 2)));
        assert_eq!(v.status, LcStatus::Lc);
        let v = criterion_mult_refined(&d(
            Rat::zero(),
            Rat::zero(),
            Rat::int(2),
            Rat::int(2),
            Rat::one(),
        ));
        assert_eq!(v.status, LcStatus::Lc);
        let v = criterion_mult_refined(&d(
            rat(1, 2),
            Rat::zero(),
            Rat::one(),
            Rat::one(),
            rat(8, 5),
        ));
        assert_eq!(v.status, LcStatus::Inapplicable);

        // two-curve criterion
        let v = criterion_two_curves(&d(
            rat(1, 4),
            Rat::zero(),
            Rat::int(2),
            rat(3, 4),
            Rat::int(2),
        ))
        .unwrap();
        assert_eq!(v.status, LcStatus::Lc);
        let v = criterion_two_curves(&d(rat(1, 2), rat(1, 2), rat(1, 4), Rat::int(5), rat(1, 4)))
            .unwrap();
        assert_eq!(v.status, LcStatus::Lc, "m <= b puts no bound on B.Omega");
        let v = criterion_two_curves(&d(rat(1, 2), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 2)))
            .unwrap();
        assert_eq!(v.status, LcStatus::Lc);
        assert_eq!(
            criterion_two_curves(&d(
                Rat::one(),
                Rat::zero(),
                Rat::one(),
                Rat::one(),
                Rat::one()
            )),
            Err(GermError::TheoremBoundary)
        );

        // cleaned-up criterion
        let v =
            criterion_two_curves_clean(&d(rat(1, 2), Rat::zero(), rat(1, 2), rat(1, 2), rat(1, 2)));
        assert_eq!(v.status, LcStatus::Lc, "b = 0 reduces to B.Omega <= 1 - a");
        let v = criterion_two_curves_clean(&d(
            rat(1, 2),
            rat(1, 4),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ));
        assert_eq!(v.status, LcStatus::Lc, "C.Omega = 0 is trivial");
        let v =
            criterion_two_curves_clean(&d(rat(1, 2), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 2)));
        assert_eq!(v.status, LcStatus::Lc);
    }

    #[test]
    fn criterion_nesting_adjunction_into_mult_refined() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let r = |rng: &mut ChaCha8Rng| {
                let den = rng.gen_range(1..=9i64);
                rat(rng.gen_range(0..=2 * den), den)
            };
            let a = {
                let den = rng.gen_range(1..=9i64);
                rat(rng.gen_range(0..=den), den)
            };
            let m = r(&mut rng);
            let co = &m + r(&mut rng);
            let bo = &m + r(&mut rng);
            let data = LocalData::new(a, Rat::zero(), m, bo, co, true).unwrap();
            if criterion_adjunction(&data).is_lc() {
                assert!(
                    criterion_mult_refined(&data).is_lc(),
                    "refinement must subsume adjunction on {data:?}"
                );
            }
        }
    }

    #[test]
    fn germ_text_round_trip() {
        let cfg = single_root(
            vec![
                branch(&["p", "q"], 3, 4),
                branch(&["p"], 1, 2),
                branch(&["z"], 1, 1),
            ],
            &[("p", "q")],
        );
        let text = cfg.to_germ_text();
        let back = GermConfiguration::from_germ_text(&text).unwrap();
        assert_eq!(cfg, back);
        assert!(GermConfiguration::from_germ_text("branch p,q 1/2").is_err());
        assert!(GermConfiguration::from_germ_text("edge p").is_err());
        assert!(GermConfiguration::from_germ_text("junk p q").is_err());
    }

    #[test]
    fn configuration_validation() {
        assert_eq!(
            GermConfiguration::new(
                vec![("p".into(), "q".into())],
                vec![GermBranch {
                    path: vec!["q".into()],
                    coefficient: Rat::one()
                }]
            ),
            Err(GermError::PathNotFromRoot(0))
        );
        assert!(matches!(
            GermConfiguration::new(
                vec![("p".into(), "q".into()), ("q".into(), "p".into())],
                vec![]
            ),
            Err(GermError::NotAChild { .. }) | Err(GermError::CyclicTree(_))
        ));
        assert_eq!(
            GermConfiguration::new(
                vec![],
                vec![GermBranch {
                    path: vec!["p".into()],
                    coefficient: rat(-1, 2)
                }]
            ),
            Err(GermError::NegativeCoefficient(0))
        );
    }

    #[test]
    fn fuzz_small_run_is_sound_and_thread_invariant() {
        let a = fuzz_criteria(1, 120, 1);
        assert!(a.sound(), "violations: {:?}", a.violations);
        assert!(a.adjunction.lc_claims > 0);
        assert!(a.two_curves_clean.lc_claims > 0);
        let b = fuzz_criteria(1, 120, 4);
        assert_eq!(a, b);
    }

    #[test]
    fn tangential_shape_matches_oracle() {
        // Boundary tangent to a fibre: two branches of contact order two
        // plus a residual branch, with certificate-sized coefficients.
        let cfg = single_root(
            vec![
                branch(&["p", "q"], 99, 100), // boundary curve coefficient 1 - beta + ...
                branch(&["p", "q"], 1, 2),    // fibre with its vanishing order
                branch(&["p"], 1, 100),       // residual
            ],
            &[("p", "q")],
        );
        let run = oracle_is_lc(&cfg, default_depth_cap(&cfg)).unwrap();
        assert!(run.verdict.is_lc());
        // Raising the tangent coefficients beyond the threshold flips it.
        let cfg = single_root(
            vec![
                branch(&["p", "q"], 1, 1),
                branch(&["p", "q"], 1, 1),
                branch(&["p"], 1, 100),
            ],
            &[("p", "q")],
        );
        assert!(!oracle(&cfg).is_lc());
    }
}
