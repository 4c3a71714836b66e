//! Picard lattice of the surfaces under study.
//!
//! The ambient surface is a product of two projective lines carrying a fixed
//! smooth curve `C` of bi-degree (1,2); the models blow up `r` chosen points
//! of `C`. Classes are written over the basis `(f, g, e_i)` where `f` and `g`
//! are the two ruling classes and `e_i` are the exceptional classes of the
//! blown-up points, indexed by labels drawn from `{0, 1, .., r, inf}`. The
//! pairing is `f.g = 1`, `f^2 = g^2 = 0`, `e_i.e_j = -delta_ij` and the two
//! blocks are orthogonal.
//!
//! Each model carries a catalog of the curves relevant to positivity tests:
//! the boundary curve `C`, the exceptional curves `E_i`, the ruling fibres
//! `F_i` through blown-up points, the two tangent fibres `F_0`, `F_inf`, and
//! the ruling classes `f`, `g` used as nef test classes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::rat::{rat, Rat};

/// Label of one of the `r + 2` marked points on the boundary curve.
///
/// Labels `0` and `inf` mark the two points where a ruling fibre is tangent
/// to the boundary curve; labels `1..=r` mark transverse fibre points.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PointLabel {
    Finite(u32),
    Infinity,
}

impl PointLabel {
    pub fn is_tangent_point(self) -> bool {
        matches!(self, PointLabel::Finite(0) | PointLabel::Infinity)
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointLabel::Finite(k) => write!(f, "{k}"),
            PointLabel::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for PointLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "oo" => Ok(PointLabel::Infinity),
            t => t
                .parse::<u32>()
                .map(PointLabel::Finite)
                .map_err(|_| ModelError::BadLabel(s.to_string())),
        }
    }
}

/// Name of a catalog curve or ruling class.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CurveLabel {
    /// Ruling class `f` (fibres of the first projection).
    PiF,
    /// Ruling class `g` (fibres of the second projection).
    PiG,
    /// Proper transform of the boundary curve.
    C,
    /// Exceptional curve over the point with the given label.
    E(PointLabel),
    /// Ruling fibre through the point with the given label (proper transform
    /// when the point is blown up).
    F(PointLabel),
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveLabel::PiF => write!(f, "f"),
            CurveLabel::PiG => write!(f, "g"),
            CurveLabel::C => write!(f, "C"),
            CurveLabel::E(p) => write!(f, "E{p}"),
            CurveLabel::F(p) => write!(f, "F{p}"),
        }
    }
}

impl Serialize for CurveLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Exact class in the Picard lattice: coefficients over `(f, g, e_i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct DivisorClass {
    coeffs: Vec<Rat>,
}

impl DivisorClass {
    pub fn zero(rank: usize) -> Self {
        DivisorClass {
            coeffs: vec![Rat::zero(); rank],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        DivisorClass { coeffs }
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Rat {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        assert_eq!(self.rank(), other.rank(), "lattice rank mismatch");
        DivisorClass {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DivisorClass) -> DivisorClass {
        self.add(&other.scale(&Rat::int(-1)))
    }

    pub fn scale(&self, s: &Rat) -> DivisorClass {
        DivisorClass {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &DivisorClass, s: &Rat) -> DivisorClass {
        self.add(&other.scale(s))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("r = {0} is below the minimum 5 for this family")]
    RankTooSmall(u32),
    #[error("blown-up set has {got} labels, expected exactly r = {want}")]
    WrongBlownCount { got: usize, want: u32 },
    #[error("label `{0}` is outside {{0, 1, .., r, inf}}")]
    LabelOutOfRange(String),
    #[error("bad point label `{0}`")]
    BadLabel(String),
    #[error("beta = {0} is outside the ample range (0, {1})")]
    BetaOutOfRange(Rat, Rat),
    #[error("beta = {0} must be positive")]
    BetaNotPositive(Rat),
    #[error("unknown curve label `{0}`")]
    UnknownCurve(String),
    #[error("class has rank {got}, model has rank {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("model text parse error: {0}")]
    Parse(String),
    #[error("class expression parse error: {0}")]
    ClassParse(String),
}

/// Construction data for one surface in the family.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModelParams {
    pub r: u32,
    pub blown: BTreeSet<PointLabel>,
    pub beta: Rat,
}

impl ModelParams {
    /// Validated parameters: `r >= 5`, exactly `r` labels drawn from
    /// `{0, .., r, inf}`, and `0 < beta < 2/(r-4)`.
    pub fn new(r: u32, blown: BTreeSet<PointLabel>, beta: Rat) -> Result<Self, ModelError> {
        if r < 5 {
            return Err(ModelError::RankTooSmall(r));
        }
        if blown.len() != r as usize {
            return Err(ModelError::WrongBlownCount {
                got: blown.len(),
                want: r,
            });
        }
        for label in &blown {
            if let PointLabel::Finite(k) = label {
                if *k > r {
                    return Err(ModelError::LabelOutOfRange(label.to_string()));
                }
            }
        }
        let cap = rat(2, 1) / Rat::int(i64::from(r) - 4);
        if !beta.is_positive() || beta >= cap {
            return Err(ModelError::BetaOutOfRange(beta, cap));
        }
        Ok(ModelParams { r, blown, beta })
    }

    /// Blown-up set `{1, .., r}`: both tangent points stay on the surface.
    pub fn standard(r: u32, beta: Rat) -> Result<Self, ModelError> {
        let blown = (1..=r).map(PointLabel::Finite).collect();
        ModelParams::new(r, blown, beta)
    }

    /// Blown-up set `{0, 1, .., r-1}`: the tangent point labelled `0` is
    /// blown up and carries an exceptional curve.
    pub fn with_zero(r: u32, beta: Rat) -> Result<Self, ModelError> {
        let blown = (0..r).map(PointLabel::Finite).collect();
        ModelParams::new(r, blown, beta)
    }
}

/// Whether a catalog entry bounds the effective cone or only tests nefness.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CurveRole {
    /// Irreducible curve of negative self-intersection; may appear in the
    /// support of a Zariski negative part.
    Negative,
    /// Nef class used only for pairing tests.
    NefTest,
}

/// One catalog entry: a named curve (or ruling class) with its lattice class,
/// self-intersection, and the local intersection multiplicity against the
/// boundary curve at their meeting point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveRecord {
    pub label: CurveLabel,
    pub cls: DivisorClass,
    pub self_intersection: Rat,
    /// Local intersection multiplicity with `C` at the meeting point: `2`
    /// for an unblown tangent fibre, `1` for a transverse meeting, `0` for
    /// `C` itself.
    pub tangency_to_c: u32,
    pub role: CurveRole,
}

/// Immutable surface model: parameters, curve catalog, and the log
/// anticanonical class. All operations on it are pure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SurfaceModel {
    params: ModelParams,
    blown_order: Vec<PointLabel>,
    catalog: Vec<CurveRecord>,
    anticanonical_log: DivisorClass,
}

impl SurfaceModel {
    /// Blow up the `r` chosen points of the boundary curve.
    pub fn build(params: ModelParams) -> Result<Self, ModelError> {
        Self::assemble(params)
    }

    /// The unblown product of two lines with the bi-degree (1,2) boundary
    /// curve. Accepts any positive `beta`; the catalog holds only the nef
    /// test classes `f`, `g` and the (positive self-intersection) class of
    /// the boundary curve.
    pub fn baseline(beta: Rat) -> Result<Self, ModelError> {
        if !beta.is_positive() {
            return Err(ModelError::BetaNotPositive(beta));
        }
        let params = ModelParams {
            r: 0,
            blown: BTreeSet::new(),
            beta,
        };
        Self::assemble(params)
    }

    fn assemble(params: ModelParams) -> Result<Self, ModelError> {
        let blown_order: Vec<PointLabel> = params.blown.iter().copied().collect();
        let rank = 2 + blown_order.len();
        let slot = |label: PointLabel| -> usize {
            2 + blown_order.iter().position(|l| *l == label).unwrap()
        };

        let basis = |i: usize| -> DivisorClass {
            let mut c = DivisorClass::zero(rank);
            c.coeffs[i] = Rat::one();
            c
        };
        let f = basis(0);
        let g = basis(1);

        // C = f + 2g - sum of the blown-up exceptional classes.
        let mut c_coeffs = vec![Rat::zero(); rank];
        c_coeffs[0] = Rat::one();
        c_coeffs[1] = Rat::int(2);
        for label in &blown_order {
            c_coeffs[slot(*label)] = Rat::int(-1);
        }
        let c_class = DivisorClass::from_coeffs(c_coeffs);

        let c_self = Rat::int(4 - i64::from(params.r));
        let mut catalog = vec![CurveRecord {
            label: CurveLabel::C,
            cls: c_class.clone(),
            self_intersection: c_self.clone(),
            tangency_to_c: 0,
            role: if c_self.is_negative() {
                CurveRole::Negative
            } else {
                CurveRole::NefTest
            },
        }];

        for label in &blown_order {
            let e = basis(slot(*label));
            catalog.push(CurveRecord {
                label: CurveLabel::E(*label),
                cls: e.clone(),
                self_intersection: Rat::int(-1),
                tangency_to_c: 1,
                role: CurveRole::Negative,
            });
            catalog.push(CurveRecord {
                label: CurveLabel::F(*label),
                cls: f.sub(&e),
                self_intersection: Rat::int(-1),
                tangency_to_c: 1,
                role: CurveRole::Negative,
            });
        }

        // Unblown tangent fibres keep the full ruling class and meet C with
        // local multiplicity two.
        if params.r > 0 {
            for label in [PointLabel::Finite(0), PointLabel::Infinity] {
                if !params.blown.contains(&label) {
                    catalog.push(CurveRecord {
                        label: CurveLabel::F(label),
                        cls: f.clone(),
                        self_intersection: Rat::zero(),
                        tangency_to_c: 2,
                        role: CurveRole::NefTest,
                    });
                }
            }
        }

        catalog.push(CurveRecord {
            label: CurveLabel::PiF,
            cls: f.clone(),
            self_intersection: Rat::zero(),
            tangency_to_c: 1,
            role: CurveRole::NefTest,
        });
        catalog.push(CurveRecord {
            label: CurveLabel::PiG,
            cls: g,
            self_intersection: Rat::zero(),
            tangency_to_c: 1,
            role: CurveRole::NefTest,
        });

        let anticanonical_log = f.add_scaled(&c_class, &params.beta);

        Ok(SurfaceModel {
            params,
            blown_order,
            catalog,
            anticanonical_log,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn r(&self) -> u32 {
        self.params.r
    }

    pub fn beta(&self) -> &Rat {
        &self.params.beta
    }

    pub fn rank(&self) -> usize {
        2 + self.blown_order.len()
    }

    pub fn blown_order(&self) -> &[PointLabel] {
        &self.blown_order
    }

    pub fn catalog(&self) -> &[CurveRecord] {
        &self.catalog
    }

    pub fn catalog_entry(&self, label: CurveLabel) -> Option<&CurveRecord> {
        self.catalog.iter().find(|r| r.label == label)
    }

    /// The log anticanonical class `f + beta * C`.
    pub fn neg_k_beta(&self) -> &DivisorClass {
        &self.anticanonical_log
    }

    fn check_rank(&self, d: &DivisorClass) -> Result<(), ModelError> {
        if d.rank() != self.rank() {
            return Err(ModelError::DimensionMismatch {
                got: d.rank(),
                want: self.rank(),
            });
        }
        Ok(())
    }

    /// Exact intersection pairing.
    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Rat, ModelError> {
        self.check_rank(a)?;
        self.check_rank(b)?;
        let mut acc = Rat::zero();
        let mut add_product = |x: &Rat, y: &Rat, negate: bool| {
            if x.is_zero() || y.is_zero() {
                return;
            }
            let p = x * y;
            if negate {
                acc -= &p;
            } else {
                acc += &p;
            }
        };
        add_product(a.coeff(0), b.coeff(1), false);
        add_product(a.coeff(1), b.coeff(0), false);
        for i in 2..self.rank() {
            add_product(a.coeff(i), b.coeff(i), true);
        }
        Ok(acc)
    }

    /// Lattice class of a catalog curve or ruling class.
    pub fn class_of(&self, label: CurveLabel) -> Result<DivisorClass, ModelError> {
        self.catalog_entry(label)
            .map(|r| r.cls.clone())
            .ok_or_else(|| ModelError::UnknownCurve(label.to_string()))
    }

    /// Index of a blown-up label inside the `e`-block, if present.
    pub fn e_slot(&self, label: PointLabel) -> Option<usize> {
        self.blown_order
            .iter()
            .position(|l| *l == label)
            .map(|k| 2 + k)
    }

    /// The same model with its catalog listed in a different order.
    /// Positivity computations must not depend on catalog order; the
    /// property suite exercises them through this.
    pub fn with_catalog_permutation(&self, perm: &[usize]) -> Result<SurfaceModel, ModelError> {
        let n = self.catalog.len();
        let mut seen = vec![false; n];
        for &i in perm {
            if i >= n || seen[i] {
                return Err(ModelError::Parse(format!(
                    "invalid catalog permutation of length {n}"
                )));
            }
            seen[i] = true;
        }
        if perm.len() != n {
            return Err(ModelError::Parse(format!(
                "invalid catalog permutation of length {n}"
            )));
        }
        let mut clone = self.clone();
        clone.catalog = perm.iter().map(|&i| self.catalog[i].clone()).collect();
        Ok(clone)
    }

    /// Parse a class expression over the label algebra, e.g.
    /// `1*f + 1/100*C - 2*e1`. Accepted symbols: `f`, `g`, `C`, `e<label>`,
    /// `E<label>` (blown-up labels only) and `F<label>`.
    pub fn parse_class(&self, input: &str) -> Result<DivisorClass, ModelError> {
        let mut acc = DivisorClass::zero(self.rank());
        let cleaned = input.replace(' ', "");
        if cleaned.is_empty() {
            return Err(ModelError::ClassParse("empty expression".into()));
        }
        // Split into signed terms.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.is_empty() {
                terms.push(cur.clone());
                cur.clear();
            }
            cur.push(ch);
        }
        if !cur.is_empty() {
            terms.push(cur);
        }
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (Rat::int(-1), rest.to_string()),
                None => (Rat::one(), term.trim_start_matches('+').to_string()),
            };
            if body.is_empty() {
                return Err(ModelError::ClassParse(format!(
                    "dangling sign in `{input}`"
                )));
            }
            let (coeff, sym) = match body.split_once('*') {
                Some((c, s)) => {
                    let c: Rat = c
                        .parse()
                        .map_err(|_| ModelError::ClassParse(format!("bad coefficient `{c}`")))?;
                    (c, s.to_string())
                }
                None => (Rat::one(), body),
            };
            let cls = self.symbol_class(&sym)?;
            acc = acc.add_scaled(&cls, &(sign * coeff));
        }
        Ok(acc)
    }

    fn symbol_class(&self, sym: &str) -> Result<DivisorClass, ModelError> {
        match sym {
            "f" => return self.class_of(CurveLabel::PiF),
            "g" => return self.class_of(CurveLabel::PiG),
            "C" => return self.class_of(CurveLabel::C),
            _ => {}
        }
        if let Some(rest) = sym.strip_prefix('e').or_else(|| sym.strip_prefix('E')) {
            let label: PointLabel = rest.parse()?;
            return self.class_of(CurveLabel::E(label));
        }
        if let Some(rest) = sym.strip_prefix('F') {
            let label: PointLabel = rest.parse()?;
            return self.class_of(CurveLabel::F(label));
        }
        Err(ModelError::UnknownCurve(sym.to_string()))
    }

    /// Canonical string form of a class over the basis symbols.
    pub fn class_to_string(&self, d: &DivisorClass) -> String {
        let mut parts = vec![format!("{}*f", d.coeff(0)), format!("{}*g", d.coeff(1))];
        for (k, label) in self.blown_order.iter().enumerate() {
            parts.push(format!("{}*e{}", d.coeff(2 + k), label));
        }
        parts.join(" + ")
    }

    /// Model file serialization: `key = value` lines with keys `r`, `blown`,
    /// `beta`. Lines starting with `#` are comments.
    pub fn to_model_text(&self) -> String {
        let blown: Vec<String> = self.blown_order.iter().map(|l| l.to_string()).collect();
        format!(
            "r = {}\nblown = {}\nbeta = {}\n",
            self.params.r,
            blown.join(","),
            self.params.beta
        )
    }

    pub fn from_model_text(text: &str) -> Result<Self, ModelError> {
        let mut r: Option<u32> = None;
        let mut blown: Option<BTreeSet<PointLabel>> = None;
        let mut beta: Option<Rat> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ModelError::Parse(format!("expected `key = value`: `{line}`")))?;
            match key.trim() {
                "r" => {
                    r = Some(
                        value
                            .trim()
                            .parse()
                            .map_err(|_| ModelError::Parse(format!("bad r `{value}`")))?,
                    )
                }
                "blown" => {
                    let mut set = BTreeSet::new();
                    let v = value.trim();
                    if !v.is_empty() {
                        for item in v.split(',') {
                            set.insert(item.parse::<PointLabel>()?);
                        }
                    }
                    blown = Some(set);
                }
                "beta" => {
                    beta = Some(
                        value
                            .trim()
                            .parse()
                            .map_err(|_| ModelError::Parse(format!("bad beta `{value}`")))?,
                    )
                }
                other => return Err(ModelError::Parse(format!("unknown key `{other}`"))),
            }
        }
        let r = r.ok_or_else(|| ModelError::Parse("missing key `r`".into()))?;
        let blown = blown.ok_or_else(|| ModelError::Parse("missing key `blown`".into()))?;
        let beta = beta.ok_or_else(|| ModelError::Parse("missing key `beta`".into()))?;
        if r == 0 {
            if !blown.is_empty() {
                return Err(ModelError::Parse("r = 0 admits no blown-up points".into()));
            }
            SurfaceModel::baseline(beta)
        } else {
            SurfaceModel::build(ModelParams::new(r, blown, beta)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_r7() -> SurfaceModel {
        SurfaceModel::build(ModelParams::standard(7, rat(1, 100)).unwrap()).unwrap()
    }

    #[test]
    fn c_squared_is_four_minus_r() {
        let m = model_r7();
        let c = m.class_of(CurveLabel::C).unwrap();
        assert_eq!(m.intersect(&c, &c).unwrap(), Rat::int(-3));
    }

    #[test]
    fn anticanonical_square_matches_closed_form() {
        // (f + beta C)^2 = 4 beta - beta^2 (r - 4)
        let m = model_r7();
        let k = m.neg_k_beta();
        assert_eq!(m.intersect(k, k).unwrap(), rat(397, 10000));
        for r in 7..=12 {
            let beta = rat(1, 100);
            let m = SurfaceModel::build(ModelParams::standard(r, beta.clone()).unwrap()).unwrap();
            let k = m.neg_k_beta();
            let expect = &beta * 4 - beta.square() * Rat::int(i64::from(r) - 4);
            assert_eq!(m.intersect(k, k).unwrap(), expect);
        }
    }

    #[test]
    fn anticanonical_decomposition_is_componentwise() {
        let m = model_r7();
        let f = m.class_of(CurveLabel::PiF).unwrap();
        let c = m.class_of(CurveLabel::C).unwrap();
        let residual = m.neg_k_beta().sub(&f).sub(&c.scale(m.beta()));
        assert!(residual.is_zero());
    }

    #[test]
    fn basic_pairings() {
        let m = model_r7();
        let f = m.class_of(CurveLabel::PiF).unwrap();
        let c = m.class_of(CurveLabel::C).unwrap();
        let e1 = m.class_of(CurveLabel::E(PointLabel::Finite(1))).unwrap();
        let f1 = m.class_of(CurveLabel::F(PointLabel::Finite(1))).unwrap();
        assert_eq!(m.intersect(&f, &c).unwrap(), Rat::int(2));
        assert_eq!(m.intersect(&e1, &e1).unwrap(), Rat::int(-1));
        assert_eq!(m.intersect(&e1, &f1).unwrap(), Rat::int(1));
        assert_eq!(m.intersect(&f1, &c).unwrap(), Rat::int(1));
    }

    #[test]
    fn class_of_catalog_entries() {
        let m = model_r7();
        let c = m.class_of(CurveLabel::C).unwrap();
        // f + 2g - sum e_i
        let mut expect = vec![Rat::one(), Rat::int(2)];
        expect.extend(std::iter::repeat_n(Rat::int(-1), 7));
        assert_eq!(c, DivisorClass::from_coeffs(expect));
        assert_eq!(m.class_of(CurveLabel::PiF).unwrap().coeffs()[0], Rat::one());
        let f1 = m.class_of(CurveLabel::F(PointLabel::Finite(1))).unwrap();
        let f = m.class_of(CurveLabel::PiF).unwrap();
        let e1 = m.class_of(CurveLabel::E(PointLabel::Finite(1))).unwrap();
        assert_eq!(f1, f.sub(&e1));
        assert!(m.class_of(CurveLabel::E(PointLabel::Infinity)).is_err());
    }

    #[test]
    fn tangent_fibre_bookkeeping() {
        let std = model_r7();
        let f0 = std
            .catalog_entry(CurveLabel::F(PointLabel::Finite(0)))
            .unwrap();
        assert_eq!(f0.tangency_to_c, 2);
        assert_eq!(f0.self_intersection, Rat::zero());
        assert_eq!(f0.role, CurveRole::NefTest);

        let blown = SurfaceModel::build(ModelParams::with_zero(7, rat(1, 100)).unwrap()).unwrap();
        let f0 = blown
            .catalog_entry(CurveLabel::F(PointLabel::Finite(0)))
            .unwrap();
        assert_eq!(f0.tangency_to_c, 1);
        assert_eq!(f0.self_intersection, Rat::int(-1));
        assert_eq!(f0.role, CurveRole::Negative);
        // E0 exists only in the blown configuration.
        assert!(blown
            .catalog_entry(CurveLabel::E(PointLabel::Finite(0)))
            .is_some());
        assert!(std
            .catalog_entry(CurveLabel::E(PointLabel::Finite(0)))
            .is_none());
        // F7 is unblown in the with-zero configuration and not a catalog curve.
        assert!(blown
            .catalog_entry(CurveLabel::F(PointLabel::Finite(7)))
            .is_none());
        assert!(blown
            .catalog_entry(CurveLabel::F(PointLabel::Infinity))
            .is_some());
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            ModelParams::standard(4, rat(1, 100)),
            Err(ModelError::RankTooSmall(4))
        ));
        let blown: BTreeSet<_> = (1..=6).map(PointLabel::Finite).collect();
        assert!(matches!(
            ModelParams::new(7, blown, rat(1, 100)),
            Err(ModelError::WrongBlownCount { got: 6, want: 7 })
        ));
        // beta at the ample boundary 2/(r-4) is rejected.
        assert!(matches!(
            ModelParams::standard(7, rat(2, 3)),
            Err(ModelError::BetaOutOfRange(..))
        ));
        assert!(ModelParams::standard(7, rat(199, 300)).is_ok());
        let mut blown: BTreeSet<_> = (1..=6).map(PointLabel::Finite).collect();
        blown.insert(PointLabel::Infinity);
        assert!(ModelParams::new(7, blown, rat(1, 100)).is_ok());
        let mut blown: BTreeSet<_> = (1..=6).map(PointLabel::Finite).collect();
        blown.insert(PointLabel::Finite(9));
        assert!(matches!(
            ModelParams::new(7, blown, rat(1, 100)),
            Err(ModelError::LabelOutOfRange(_))
        ));
    }

    #[test]
    fn pairing_symmetry_and_signature() {
        let m = model_r7();
        // Gram of (f+g, f-g, e_1, .., e_r) has leading minors with signs
        // +, -, +, -, ... after the first: one positive direction only.
        let f = m.class_of(CurveLabel::PiF).unwrap();
        let g = m.class_of(CurveLabel::PiG).unwrap();
        let mut basis = vec![f.add(&g), f.sub(&g)];
        for label in m.blown_order() {
            basis.push(m.class_of(CurveLabel::E(*label)).unwrap());
        }
        // Diagonal Gram: 2, -2, -1, ..; leading minors alternate in sign.
        let mut minor = Rat::one();
        for (k, b) in basis.iter().enumerate() {
            minor = minor * m.intersect(b, b).unwrap();
            assert_eq!(minor.is_positive(), k % 2 == 0, "minor {k}");
            for other in &basis[..k] {
                assert!(m.intersect(b, other).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn model_text_round_trip() {
        for m in [
            model_r7(),
            SurfaceModel::build(ModelParams::with_zero(9, rat(1, 256)).unwrap()).unwrap(),
            SurfaceModel::baseline(rat(1, 2)).unwrap(),
        ] {
            let text = m.to_model_text();
            let back = SurfaceModel::from_model_text(&text).unwrap();
            assert_eq!(m, back);
        }
        let with_comment = "# surface\nr = 7\nblown = 1,2,3,4,5,6,7\nbeta = 1/100\n";
        assert_eq!(
            SurfaceModel::from_model_text(with_comment).unwrap(),
            model_r7()
        );
        assert!(SurfaceModel::from_model_text("r = 7\nbeta = 1/100").is_err());
    }

    #[test]
    fn class_expression_parsing() {
        let m = model_r7();
        let d = m.parse_class("1*f + 1/100*C").unwrap();
        assert_eq!(&d, m.neg_k_beta());
        let d = m.parse_class("f+2*g-e1").unwrap();
        let f = m.class_of(CurveLabel::PiF).unwrap();
        let g = m.class_of(CurveLabel::PiG).unwrap();
        let e1 = m.class_of(CurveLabel::E(PointLabel::Finite(1))).unwrap();
        assert_eq!(d, f.add(&g.scale(&Rat::int(2))).sub(&e1));
        assert_eq!(
            m.parse_class("F1").unwrap(),
            m.class_of(CurveLabel::F(PointLabel::Finite(1))).unwrap()
        );
        assert!(m.parse_class("e9").is_err());
        assert!(m.parse_class("2*").is_err());
        assert!(m.parse_class("q").is_err());
    }
}
