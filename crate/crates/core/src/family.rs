//! Explicit bases for the dihedral, dicyclic and semidihedral families and
//! the harness that checks them against the brute-force solvers.
//!
//! Template notation used in labels: `x_i = a^i - a^-i`,
//! `y_t = a^(2t+1) - a^(2n-(2t+1))`; exponents are reduced modulo the order
//! of `a`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraElement, GroupAlgebra};
use crate::derivation::{
    derivation_space, extend_generator_map, inner_derivation_space, inner_span, lifted_generator_space, relator_failures,
    DerivationMatrix, GeneratorAssignment,
};
use crate::group::{Family, FiniteGroup, GroupError};
use crate::linalg::{rank, SubspaceBasis};
use crate::scalar::{Field, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("family checks need characteristic 0 or an odd prime")]
    CharTwoUnsupported,
    #[error("anti-centralizer tag {tag:?} is not available for the {family} family")]
    UnsupportedTag { family: Family, tag: String },
    #[error("group is not a member of the {0} family")]
    FamilyMismatch(Family),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    Regular,
    Modular,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Regular => "REGULAR",
            Regime::Modular => "MODULAR",
        })
    }
}

/// A family instance over a field. The regime is derived, never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub n: usize,
    pub field: FieldSpec,
}

#[derive(Serialize)]
struct SpecDoc<'a> {
    family: &'a str,
    n: usize,
    characteristic: u64,
    field: String,
    group: String,
    regime: Regime,
}

impl Serialize for FamilySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SpecDoc {
            family: self.family.name(),
            n: self.n,
            characteristic: self.field.characteristic(),
            field: self.field.name(),
            group: self.family.group_label(self.n),
            regime: self.regime(),
        }
        .serialize(s)
    }
}

impl FamilySpec {
    pub fn new(family: Family, n: usize, field: FieldSpec) -> Self {
        Self { family, n, field }
    }

    pub fn regime(&self) -> Regime {
        let p = self.field.characteristic();
        if p == 0 || self.n as u64 % p != 0 {
            Regime::Regular
        } else {
            Regime::Modular
        }
    }

    pub fn group(&self, allow_degenerate: bool) -> Result<FiniteGroup, GroupError> {
        FiniteGroup::from_family(self.family, self.n, allow_degenerate)
    }

    pub fn label(&self) -> String {
        format!("{} over {}", self.family.group_label(self.n), self.field)
    }

    /// Dimensions predicted in closed form for this instance.
    pub fn expected_dims(&self) -> Dims {
        let n = self.n;
        let half = n.saturating_sub(1) / 2;
        let inner = match self.family {
            Family::Dihedral => 3 * half,
            Family::Dicyclic => 3 * (n - 1),
            Family::Semidihedral if n % 2 == 0 => 3 * (2 * n - 1),
            Family::Semidihedral => 6 * (n - 1),
        };
        let der = match (self.regime(), self.family) {
            (Regime::Regular, _) => inner,
            (Regime::Modular, Family::Dihedral) => 4 * half,
            (Regime::Modular, Family::Dicyclic) => 4 * (n - 1),
            (Regime::Modular, Family::Semidihedral) if n % 2 == 0 => 4 * (2 * n - 1),
            (Regime::Modular, Family::Semidihedral) => 8 * (n - 1),
        };
        Dims {
            der,
            inner,
            outer: der - inner,
        }
    }

    pub fn expected_class_count(&self) -> usize {
        let n = self.n;
        match self.family {
            Family::Dihedral if n % 2 == 0 => n / 2 + 3,
            Family::Dihedral => (n + 3) / 2,
            Family::Dicyclic => n + 3,
            Family::Semidihedral if n % 2 == 0 => 2 * n + 3,
            Family::Semidihedral => 2 * n + 6,
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub der: usize,
    pub inner: usize,
    pub outer: usize,
}

/// Generator assignments claimed to form a basis, with printable labels.
#[derive(Debug, Clone)]
pub struct ClaimedBasis<F: Field> {
    pub assignments: Vec<GeneratorAssignment<F>>,
    pub labels: Vec<String>,
    pub variant_notes: Vec<String>,
}

impl<F: Field> ClaimedBasis<F> {
    fn new() -> Self {
        Self {
            assignments: Vec::new(),
            labels: Vec::new(),
            variant_notes: Vec::new(),
        }
    }

    fn push(&mut self, label: String, f: GeneratorAssignment<F>) {
        self.labels.push(label);
        self.assignments.push(f);
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Element builders in the `a^i b^j` notation of the family presentations.
struct Templates<'a, F: Field> {
    alg: &'a GroupAlgebra<F>,
    n: usize,
}

impl<'a, F: Field> Templates<'a, F> {
    fn new(alg: &'a GroupAlgebra<F>, family: Family) -> Result<Self, FamilyError> {
        let info = alg.group().family().filter(|i| i.family == family).ok_or(FamilyError::FamilyMismatch(family))?;
        if alg.field().characteristic() == 2 {
            return Err(FamilyError::CharTwoUnsupported);
        }
        Ok(Self { alg, n: info.n })
    }

    fn el(&self, i: i64, j: usize) -> usize {
        self.alg.group().family_element(i, j)
    }

    /// `a^p - a^q`
    fn diff(&self, p: i64, q: i64) -> AlgebraElement<F> {
        self.alg.from_terms(&[(1, self.el(p, 0)), (-1, self.el(q, 0))])
    }

    /// `a^k x`
    fn shift(&self, k: i64, x: &AlgebraElement<F>) -> AlgebraElement<F> {
        self.alg.left_translate(self.el(k, 0), x)
    }

    /// `x b`
    fn tb(&self, x: &AlgebraElement<F>) -> AlgebraElement<F> {
        self.alg.right_translate(x, self.el(0, 1))
    }

    fn zero(&self) -> AlgebraElement<F> {
        self.alg.zero()
    }

    fn pair(&self, fa: AlgebraElement<F>, fb: AlgebraElement<F>) -> GeneratorAssignment<F> {
        GeneratorAssignment { images: vec![fa, fb] }
    }
}

fn regime_of<F: Field>(alg: &GroupAlgebra<F>, n: usize) -> Regime {
    let p = alg.field().characteristic();
    if p == 0 || n as u64 % p != 0 {
        Regime::Regular
    } else {
        Regime::Modular
    }
}

/// The claimed basis of F-derivations of `F D_2n`.
pub fn dihedral_basis<F: Field>(alg: &GroupAlgebra<F>) -> Result<ClaimedBasis<F>, FamilyError> {
    let t = Templates::new(alg, Family::Dihedral)?;
    let n = t.n;
    let range = 1..=((n as i64 - 1) / 2);
    let x = |i: i64| t.diff(i, -i);
    let mut out = ClaimedBasis::new();
    match regime_of(alg, n) {
        Regime::Regular => {
            for i in range.clone() {
                out.push(format!("(x_{i} b, 0)"), t.pair(t.tb(&x(i)), t.zero()));
            }
            for i in range.clone() {
                out.push(format!("(a x_{i} b, x_{i})"), t.pair(t.tb(&t.shift(1, &x(i))), x(i)));
            }
            for i in range {
                out.push(format!("(0, x_{i} b)"), t.pair(t.zero(), t.tb(&x(i))));
            }
        }
        Regime::Modular => {
            for i in range.clone() {
                out.push(format!("(a x_{i}, 0)"), t.pair(t.shift(1, &x(i)), t.zero()));
            }
            for i in range.clone() {
                out.push(format!("(a x_{i}, x_{i} b)"), t.pair(t.shift(1, &x(i)), t.tb(&x(i))));
            }
            for i in range.clone() {
                out.push(format!("(x_{i} b, 0)"), t.pair(t.tb(&x(i)), t.zero()));
            }
            for i in range {
                out.push(format!("(a x_{i} b, x_{i})"), t.pair(t.tb(&t.shift(1, &x(i))), x(i)));
            }
        }
    }
    Ok(out)
}

/// The claimed basis of F-derivations of `F T_4n`.
pub fn dicyclic_basis<F: Field>(alg: &GroupAlgebra<F>) -> Result<ClaimedBasis<F>, FamilyError> {
    let t = Templates::new(alg, Family::Dicyclic)?;
    let n = t.n as i64;
    let range = 1..n;
    let x = |i: i64| t.diff(i, -i);
    let mut out = ClaimedBasis::new();
    match regime_of(alg, t.n) {
        Regime::Regular => {
            for i in range.clone() {
                out.push(format!("(a^{n} x_{i} b, 0)"), t.pair(t.tb(&t.shift(n, &x(i))), t.zero()));
            }
            for i in range.clone() {
                out.push(format!("(a^{} x_{i} b, x_{i})", n + 1), t.pair(t.tb(&t.shift(n + 1, &x(i))), x(i)));
            }
            for i in range {
                out.push(format!("(0, x_{i} b)"), t.pair(t.zero(), t.tb(&x(i))));
            }
        }
        Regime::Modular => {
            for i in range.clone() {
                out.push(format!("(a^{} x_{i}, 0)", n + 1), t.pair(t.shift(n + 1, &x(i)), t.zero()));
            }
            for i in range.clone() {
                out.push(format!("(a x_{i}, x_{i} b)"), t.pair(t.shift(1, &x(i)), t.tb(&x(i))));
            }
            for i in range.clone() {
                out.push(format!("(a^{n} x_{i} b, 0)"), t.pair(t.tb(&t.shift(n, &x(i))), t.zero()));
            }
            for i in range {
                out.push(format!("(a^{} x_{i} b, x_{i})", n + 1), t.pair(t.tb(&t.shift(n + 1, &x(i))), x(i)));
            }
        }
    }
    Ok(out)
}

/// The claimed basis of F-derivations of `F SD_8n`.
///
/// In the regular regime the template `(a y_t b, y_t b)` is tried as
/// printed; when it does not extend, `(a y_t b, y_t)` is tried instead and
/// the outcome is recorded in `variant_notes`.
pub fn semidihedral_basis<F: Field>(alg: &GroupAlgebra<F>) -> Result<ClaimedBasis<F>, FamilyError> {
    let t = Templates::new(alg, Family::Semidihedral)?;
    let n = t.n as i64;
    let s_range = 1..n;
    let t_range = -(n / 2)..(n / 2);
    let x = |s: i64| t.diff(2 * s, -2 * s);
    let y = |k: i64| t.diff(2 * k + 1, 2 * n - (2 * k + 1));
    let mut out = ClaimedBasis::new();
    match regime_of(alg, t.n) {
        Regime::Regular => {
            for s in s_range.clone() {
                out.push(format!("(x_{s} b, 0)"), t.pair(t.tb(&x(s)), t.zero()));
            }
            for k in t_range.clone() {
                out.push(format!("(y_{k} b, 0)"), t.pair(t.tb(&y(k)), t.zero()));
            }
            for s in s_range.clone() {
                out.push(format!("(a x_{s} b, x_{s})"), t.pair(t.tb(&t.shift(1, &x(s))), x(s)));
            }
            let (mut printed, mut stripped, mut neither) = (Vec::new(), Vec::new(), Vec::new());
            for k in t_range.clone() {
                let fa = t.tb(&t.shift(1, &y(k)));
                let as_printed = t.pair(fa.clone(), t.tb(&y(k)));
                if relator_failures(alg, &as_printed).is_empty() {
                    printed.push(k);
                    out.push(format!("(a y_{k} b, y_{k} b)"), as_printed);
                    continue;
                }
                let variant = t.pair(fa, y(k));
                if relator_failures(alg, &variant).is_empty() {
                    stripped.push(k);
                    out.push(format!("(a y_{k} b, y_{k})"), variant);
                } else {
                    neither.push(k);
                    out.push(format!("(a y_{k} b, y_{k} b)"), as_printed);
                }
            }
            let label = t.alg.group().label();
            let list = |v: &[i64]| v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ");
            if !printed.is_empty() {
                out.variant_notes.push(format!(
                    "{label}: template (a y_t b, y_t b) extends as printed for t in {{{}}}",
                    list(&printed)
                ));
            }
            if !stripped.is_empty() {
                out.variant_notes.push(format!(
                    "{label}: template (a y_t b, y_t b) does not extend for t in {{{}}}; the variant (a y_t b, y_t) does and is used",
                    list(&stripped)
                ));
            }
            if !neither.is_empty() {
                out.variant_notes.push(format!(
                    "{label}: neither (a y_t b, y_t b) nor (a y_t b, y_t) extends for t in {{{}}}",
                    list(&neither)
                ));
            }
            for s in s_range {
                out.push(format!("(0, x_{s} b)"), t.pair(t.zero(), t.tb(&x(s))));
            }
            for k in t_range {
                out.push(format!("(0, y_{k} b)"), t.pair(t.zero(), t.tb(&y(k))));
            }
        }
        Regime::Modular => {
            for s in s_range.clone() {
                out.push(format!("(a x_{s}, 0)"), t.pair(t.shift(1, &x(s)), t.zero()));
            }
            for k in t_range.clone() {
                out.push(format!("(a y_{k}, 0)"), t.pair(t.shift(1, &y(k)), t.zero()));
            }
            for s in s_range.clone() {
                out.push(format!("(a x_{s}, x_{s} b)"), t.pair(t.shift(1, &x(s)), t.tb(&x(s))));
            }
            for k in t_range.clone() {
                out.push(format!("(a y_{k}, y_{k} b)"), t.pair(t.shift(1, &y(k)), t.tb(&y(k))));
            }
            for s in s_range.clone() {
                out.push(format!("(x_{s} b, 0)"), t.pair(t.tb(&x(s)), t.zero()));
            }
            for k in t_range.clone() {
                out.push(format!("(y_{k} b, 0)"), t.pair(t.tb(&y(k)), t.zero()));
            }
            for s in s_range {
                out.push(format!("(a x_{s} b, x_{s})"), t.pair(t.tb(&t.shift(1, &x(s))), x(s)));
            }
            for k in t_range {
                out.push(format!("(a y_{k} b, y_{k})"), t.pair(t.tb(&t.shift(1, &y(k))), y(k)));
            }
        }
    }
    Ok(out)
}

/// Dispatches to the constructor matching the group's family.
pub fn family_basis<F: Field>(alg: &GroupAlgebra<F>) -> Result<ClaimedBasis<F>, FamilyError> {
    match alg.group().family().map(|i| i.family) {
        Some(Family::Dihedral) => dihedral_basis(alg),
        Some(Family::Dicyclic) => dicyclic_basis(alg),
        Some(Family::Semidihedral) => semidihedral_basis(alg),
        None => Err(FamilyError::FamilyMismatch(Family::Dihedral)),
    }
}

/// Elements `g` whose inner derivations `d_g` are claimed to form a basis
/// of the inner derivations. Valid in every characteristic.
pub fn family_inner_witnesses(group: &FiniteGroup) -> Result<Vec<usize>, FamilyError> {
    let info = group.family().ok_or(FamilyError::FamilyMismatch(Family::Dihedral))?;
    let n = info.n as i64;
    let e = |i: i64, j: usize| group.family_element(i, j);
    let mut out = Vec::new();
    match info.family {
        Family::Dihedral if n % 2 == 0 => {
            let range = 1..n / 2;
            out.extend(range.clone().map(|i| e(i, 0)));
            out.extend(range.clone().map(|i| e(2 * i, 1)));
            out.extend(range.map(|i| e(2 * i + 1, 1)));
        }
        Family::Dihedral => {
            out.extend((1..=(n - 1) / 2).map(|i| e(i, 0)));
            out.extend((1..n).map(|i| e(i, 1)));
        }
        Family::Dicyclic => {
            out.extend((1..n).map(|i| e(i, 0)));
            out.extend((1..n).map(|i| e(2 * i, 1)));
            out.extend((1..n).map(|i| e(2 * i + 1, 1)));
        }
        Family::Semidihedral if n % 2 == 0 => {
            out.extend((1..n).map(|k| e(2 * k, 0)));
            out.extend((-(n / 2)..n / 2).map(|k| e(2 * k + 1, 0)));
            for k in 1..2 * n {
                out.push(e(2 * k, 1));
                out.push(e(2 * k - 1, 1));
            }
        }
        Family::Semidihedral => {
            out.extend((1..n).map(|k| e(2 * k, 0)));
            out.extend((-((n - 1) / 2)..(n - 1) / 2).map(|k| e(2 * k + 1, 0)));
            for k in 1..n {
                out.extend((0..4).map(|r| e(4 * k + r, 1)));
            }
        }
    }
    Ok(out)
}

/// Tags accepted by [`family_anticentralizer_basis`] for a family.
pub fn anticentralizer_tags(family: Family) -> [&'static str; 2] {
    match family {
        Family::Dicyclic => ["b", "a^{n+1}b"],
        _ => ["b", "ab"],
    }
}

/// The claimed basis of `C(β)` for the tagged element `β`, returned together
/// with `β`.
pub fn family_anticentralizer_basis<F: Field>(
    alg: &GroupAlgebra<F>,
    tag: &str,
) -> Result<(usize, Vec<AlgebraElement<F>>), FamilyError> {
    let info = alg.group().family().ok_or(FamilyError::FamilyMismatch(Family::Dihedral))?;
    let family = info.family;
    let t = Templates::new(alg, family)?;
    let n = t.n as i64;
    let unsupported = || FamilyError::UnsupportedTag {
        family,
        tag: tag.to_string(),
    };
    // the conjugating prefix of the second list: 1 for b, a or a^{n+1} otherwise
    let shift = match (family, tag) {
        (_, "b") => 0,
        (Family::Dicyclic, "a^{n+1}b") => n + 1,
        (Family::Dicyclic, other) if other == alg.group().name(t.el(n + 1, 1)) => n + 1,
        (Family::Dihedral | Family::Semidihedral, "ab") => 1,
        _ => return Err(unsupported()),
    };
    let beta = t.el(shift, 1);
    let mut diffs = Vec::new();
    match family {
        Family::Dihedral => diffs.extend((1..=(n - 1) / 2).map(|i| t.diff(i, -i))),
        Family::Dicyclic => diffs.extend((1..n).map(|i| t.diff(i, -i))),
        Family::Semidihedral => {
            diffs.extend((1..n).map(|s| t.diff(2 * s, -2 * s)));
            diffs.extend((-(n / 2)..n / 2).map(|k| t.diff(2 * k + 1, 2 * n - (2 * k + 1))));
        }
    }
    let mut out = Vec::with_capacity(2 * diffs.len());
    for x in &diffs {
        out.push(x.clone());
        out.push(t.tb(&t.shift(shift, x)));
    }
    Ok((beta, out))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCount {
    pub expected: usize,
    pub computed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub spec: FamilySpec,
    pub expected_dims: Dims,
    pub computed_dims: Dims,
    pub class_count: ClassCount,
    pub checks: Vec<Check>,
    pub variant_notes: Vec<String>,
    pub annotations: Vec<String>,
    /// The claimed derivation basis as `(template, (f(a), f(b)))` strings.
    pub basis: Vec<(String, String)>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    spec: &'a FamilySpec,
    dims: Dims,
    expected_dims: Dims,
    class_count: &'a ClassCount,
    checks: &'a [Check],
    status: Status,
    variant_notes: &'a [String],
    annotations: &'a [String],
}

impl VerificationReport {
    pub fn status(&self) -> Status {
        if self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportDoc {
            spec: &self.spec,
            dims: self.computed_dims,
            expected_dims: self.expected_dims,
            class_count: &self.class_count,
            checks: &self.checks,
            status: self.status(),
            variant_notes: &self.variant_notes,
            annotations: &self.annotations,
        })
        .expect("report serialises")
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }
}

fn eq_detail(computed: usize, expected: usize) -> String {
    format!("computed {computed}, expected {expected}")
}

fn annotations(spec: &FamilySpec) -> Vec<String> {
    let mut out = Vec::new();
    if spec.field.characteristic() > 0 {
        out.push(format!(
            "over {} (and any algebraic extension of it) every derivation is linear, so the space computed here is the whole derivation algebra",
            spec.field
        ));
    }
    match (spec.family, spec.n) {
        (Family::Semidihedral, 1) => out.push("SD_8 is abelian (bab = a); every derivation count degenerates to 0".into()),
        (Family::Dicyclic, 1) => out.push("T_4 is cyclic of order 4; built only because degenerate parameters were allowed".into()),
        _ => {}
    }
    out
}

fn inner_checks<F: Field>(alg: &GroupAlgebra<F>, spec: &FamilySpec, checks: &mut Checks) -> (SubspaceBasis<F>, usize) {
    let g = alg.group();
    let classes = g.conjugacy_classes();
    let expected_r = spec.expected_class_count();
    checks.push(
        "class count",
        classes.class_count == expected_r,
        eq_detail(classes.class_count, expected_r),
    );

    let inner = inner_derivation_space(alg);
    let dim = inner.space.dimension();
    let formula = spec.expected_dims().inner;
    checks.push(
        "inner dimension equals |G| - r",
        dim == g.order() - classes.class_count && dim == formula,
        format!("computed {dim}, |G| - r = {}, formula {formula}", g.order() - classes.class_count),
    );
    checks.push(
        "representative-complement witnesses span inner derivations",
        inner.witnesses.len() == dim && inner_span(alg, &inner.witnesses) == inner.space,
        format!("{} witnesses", inner.witnesses.len()),
    );
    match family_inner_witnesses(g) {
        Ok(listed) => {
            let span = inner_span(alg, &listed);
            checks.push(
                "listed inner witnesses form a basis",
                listed.len() == dim && span == inner.space,
                format!("{} witnesses {}, span dimension {}", listed.len(), g.format_element_list(&listed), span.dimension()),
            );
        }
        Err(e) => checks.push("listed inner witnesses form a basis", false, e.to_string()),
    }
    (inner.space, classes.class_count)
}

fn verify_in<F: Field>(alg: &GroupAlgebra<F>, spec: &FamilySpec) -> VerificationReport {
    let mut checks = Checks(Vec::new());
    let field = alg.field();
    let g = alg.group();
    let n = g.order();
    let expected = spec.expected_dims();

    // class structure and inner derivations
    let (inner_space, r) = inner_checks(alg, spec, &mut checks);

    // anti-centralizers
    for tag in anticentralizer_tags(spec.family) {
        match family_anticentralizer_basis(alg, tag) {
            Ok((beta, claimed)) => {
                let name = g.name(beta).to_string();
                let beta_el = alg.basis(beta);
                let bad: Vec<String> = claimed
                    .iter()
                    .filter(|x| !alg.anticommutes(x, &beta_el))
                    .map(|x| alg.format(x))
                    .collect();
                checks.push(
                    format!("anti-centralizer of {name}: elements anticommute"),
                    bad.is_empty(),
                    if bad.is_empty() {
                        format!("{} elements", claimed.len())
                    } else {
                        format!("fails for {}", bad.join("; "))
                    },
                );
                let claimed_rank = alg.span(&claimed).dimension();
                checks.push(
                    format!("anti-centralizer of {name}: independent"),
                    claimed_rank == claimed.len(),
                    format!("rank {claimed_rank} of {}", claimed.len()),
                );
                let computed = alg.anti_centralizer(&beta_el);
                checks.push(
                    format!("anti-centralizer of {name}: span equals computed"),
                    alg.span(&claimed) == computed,
                    eq_detail(computed.dimension(), claimed.len()),
                );
            }
            Err(e) => checks.push(format!("anti-centralizer {tag}"), false, e.to_string()),
        }
    }

    // center
    let center = alg.center_basis();
    checks.push(
        "center equals span of class sums",
        center == alg.span(&alg.class_sums()) && center.dimension() == r,
        format!("dimension {}", center.dimension()),
    );

    // derivations: brute force against the generator solver
    let der = derivation_space(alg);
    checks.push(
        "derivation dimension formula",
        der.dimension() == expected.der,
        eq_detail(der.dimension(), expected.der),
    );
    match lifted_generator_space(alg) {
        Ok(lifted) => checks.push(
            "generator solver agrees with brute force",
            lifted == der,
            format!("lifted dimension {}", lifted.dimension()),
        ),
        Err(e) => checks.push("generator solver agrees with brute force", false, e.to_string()),
    }

    // the claimed basis
    let mut variant_notes = Vec::new();
    let mut basis = Vec::new();
    match family_basis(alg) {
        Ok(claimed) => {
            variant_notes = claimed.variant_notes.clone();
            basis = claimed
                .labels
                .iter()
                .zip(&claimed.assignments)
                .map(|(l, f)| (l.clone(), f.format(alg)))
                .collect();
            let mut images = Vec::with_capacity(claimed.len());
            let mut failures = Vec::new();
            for (label, f) in claimed.labels.iter().zip(&claimed.assignments) {
                match extend_generator_map(alg, f) {
                    Ok(d) => images.push(d.flatten()),
                    Err(report) => failures.push(format!("{label}: {}", report.describe(alg))),
                }
            }
            checks.push(
                "claimed basis extends to derivations",
                failures.is_empty(),
                if failures.is_empty() {
                    format!("{} assignments", claimed.len())
                } else {
                    format!("{} of {} fail; first {}", failures.len(), claimed.len(), failures[0])
                },
            );
            let image_rank = rank(field, n * n, &images);
            checks.push(
                "claimed basis is independent",
                failures.is_empty() && image_rank == claimed.len(),
                format!("rank {image_rank} of {}", claimed.len()),
            );
            let span = SubspaceBasis::from_spanning(field.clone(), n * n, &images);
            checks.push(
                "claimed basis spans all derivations",
                failures.is_empty() && span == der,
                eq_detail(span.dimension(), der.dimension()),
            );
            if !failures.is_empty() {
                variant_notes.push(sign_correction_note(alg, &claimed, &der));
            }
        }
        Err(e) => checks.push("claimed basis", false, e.to_string()),
    }

    // corroborating: the b-part of d(a) lies in the expected Δ' subspace
    let (holds, detail) = delta_prime_corroboration(alg, spec, &der);
    checks.push("b-part of d(a) in predicted augmentation subspace", holds, detail);

    let computed = Dims {
        der: der.dimension(),
        inner: inner_space.dimension(),
        outer: der.dimension() - inner_space.dimension(),
    };
    checks.push(
        "inner derivations are derivations",
        inner_space.is_subspace_of(field, &der),
        format!("inner {} inside der {}", computed.inner, computed.der),
    );
    let regular = spec.regime() == Regime::Regular;
    checks.push(
        "outer derivations vanish exactly in the regular regime",
        (computed.outer == 0) == regular && computed.outer == expected.outer,
        format!("outer {}, expected {}, regime {}", computed.outer, expected.outer, spec.regime()),
    );

    VerificationReport {
        spec: spec.clone(),
        expected_dims: expected,
        computed_dims: computed,
        class_count: ClassCount {
            expected: spec.expected_class_count(),
            computed: r,
        },
        checks: checks.0,
        variant_notes,
        annotations: annotations(spec),
        basis,
    }
}

/// Diagnostic only: whether negating the first coordinate of each failing
/// assignment (and, failing that, also dropping a trailing `b` from the
/// second) repairs the claimed basis. Never changes a check outcome.
fn sign_correction_note<F: Field>(alg: &GroupAlgebra<F>, claimed: &ClaimedBasis<F>, der: &SubspaceBasis<F>) -> String {
    let n = alg.dim();
    let b = alg.group().family_element(0, 1);
    let mut images = Vec::with_capacity(claimed.len());
    let mut corrected = Vec::new();
    let mut stripped = Vec::new();
    let mut broken = Vec::new();
    for (label, f) in claimed.labels.iter().zip(&claimed.assignments) {
        if let Ok(d) = extend_generator_map(alg, f) {
            images.push(d.flatten());
            continue;
        }
        let negated = GeneratorAssignment {
            images: vec![alg.neg(&f.images[0]), f.images[1].clone()],
        };
        let negated_stripped = GeneratorAssignment {
            images: vec![alg.neg(&f.images[0]), alg.right_translate(&f.images[1], b)],
        };
        if let Ok(d) = extend_generator_map(alg, &negated) {
            corrected.push(label.clone());
            images.push(d.flatten());
        } else if let Ok(d) = extend_generator_map(alg, &negated_stripped) {
            stripped.push(label.clone());
            images.push(d.flatten());
        } else {
            broken.push(label.clone());
        }
    }
    let span = SubspaceBasis::from_spanning(alg.field().clone(), n * n, &images);
    let is_basis = broken.is_empty() && span.dimension() == claimed.len() && &span == der;
    let mut parts = Vec::new();
    if !corrected.is_empty() {
        parts.push(format!("negating the first coordinate repairs {}", corrected.join(", ")));
    }
    if !stripped.is_empty() {
        parts.push(format!(
            "negating the first coordinate and dropping the trailing b of the second repairs {}",
            stripped.join(", ")
        ));
    }
    if !broken.is_empty() {
        parts.push(format!("no repair found for {}", broken.join(", ")));
    }
    format!(
        "{}: {}; the repaired set {} a basis of the derivations",
        alg.group().label(),
        parts.join("; "),
        if is_basis { "is" } else { "is not" }
    )
}

fn delta_prime_corroboration<F: Field>(alg: &GroupAlgebra<F>, spec: &FamilySpec, der: &SubspaceBasis<F>) -> (bool, String) {
    let g = alg.group();
    let a = g.family_element(1, 0);
    let m = spec.family.cyclic_order(spec.n);
    let ambient = g.cyclic_part(a);
    let mut subgroups = vec![g.cyclic_part(g.family_element(2, 0))];
    if spec.family == Family::Semidihedral && spec.n % 2 == 1 {
        subgroups.push(g.cyclic_part(g.family_element(4, 0)));
    }
    let col_a = a * alg.dim();
    let mut bad = 0;
    for v in &der.rows {
        // coefficient of a^i b in d(a), moved to a^i
        let mut beta = alg.zero();
        for i in 0..m {
            beta.coeffs[g.family_element(i as i64, 0)] = v[col_a + g.family_element(i as i64, 1)].clone();
        }
        let inside = subgroups
            .iter()
            .all(|h| alg.in_delta_prime(&beta, &ambient, h).expect("subgroups of <a> are contained in <a>"));
        if !inside {
            bad += 1;
        }
    }
    let names: Vec<&str> = if subgroups.len() == 2 {
        vec!["<a^2>", "<a^4>"]
    } else {
        vec!["<a^2>"]
    };
    (
        bad == 0,
        format!("{} of {} basis derivations outside Δ'({}) within <a>", bad, der.dimension(), names.join(") ∩ Δ'(")),
    )
}

/// Runs every check for a family instance.
pub fn verify_family(spec: &FamilySpec, allow_degenerate: bool) -> Result<VerificationReport, FamilyError> {
    if spec.field.characteristic() == 2 {
        return Err(FamilyError::CharTwoUnsupported);
    }
    let group = Arc::new(spec.group(allow_degenerate)?);
    Ok(crate::with_field!(spec.field, |field| verify_in(&GroupAlgebra::new(group.clone(), field), spec)))
}

/// The inner-derivation checks alone; these hold in every characteristic,
/// including 2.
pub fn verify_inner_only(spec: &FamilySpec, allow_degenerate: bool) -> Result<VerificationReport, FamilyError> {
    let group = Arc::new(spec.group(allow_degenerate)?);
    Ok(crate::with_field!(spec.field, |field| {
        let alg = GroupAlgebra::new(group.clone(), field);
        let mut checks = Checks(Vec::new());
        let (inner, r) = inner_checks(&alg, spec, &mut checks);
        let dims = Dims {
            der: 0,
            inner: inner.dimension(),
            outer: 0,
        };
        let mut expected = spec.expected_dims();
        expected.der = 0;
        expected.outer = 0;
        VerificationReport {
            spec: spec.clone(),
            expected_dims: expected,
            computed_dims: dims,
            class_count: ClassCount {
                expected: spec.expected_class_count(),
                computed: r,
            },
            checks: checks.0,
            variant_notes: Vec::new(),
            annotations: annotations(spec),
            basis: Vec::new(),
        }
    }))
}

/// Extends a claimed assignment; convenience for callers that want the
/// matrix of a specific basis element.
pub fn extend_claimed<F: Field>(alg: &GroupAlgebra<F>, f: &GeneratorAssignment<F>) -> Option<DerivationMatrix<F>> {
    extend_generator_map(alg, f).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{innerness_witness, leibniz_check};
    use crate::scalar::{make_field, PrimeField, Rationals};

    fn alg<F: Field>(family: Family, n: usize, f: F) -> GroupAlgebra<F> {
        GroupAlgebra::new(Arc::new(FiniteGroup::from_family(family, n, false).unwrap()), f)
    }

    fn spec(family: Family, n: usize, c: u64) -> FamilySpec {
        FamilySpec::new(family, n, make_field(c).unwrap())
    }

    #[test]
    fn regime_is_derived() {
        assert_eq!(spec(Family::Dihedral, 3, 0).regime(), Regime::Regular);
        assert_eq!(spec(Family::Dihedral, 3, 3).regime(), Regime::Modular);
        assert_eq!(spec(Family::Dihedral, 4, 3).regime(), Regime::Regular);
        assert_eq!(spec(Family::Dicyclic, 10, 5).regime(), Regime::Modular);
    }

    #[test]
    fn dihedral_basis_examples() {
        let q = alg(Family::Dihedral, 3, Rationals);
        let b = dihedral_basis(&q).unwrap();
        assert_eq!(b.labels, ["(x_1 b, 0)", "(a x_1 b, x_1)", "(0, x_1 b)"]);
        let formatted: Vec<String> = b.assignments.iter().map(|f| f.format(&q)).collect();
        assert_eq!(formatted, ["(ab - a^2b, 0)", "(-b + a^2b, a - a^2)", "(0, ab - a^2b)"]);

        let gf3 = alg(Family::Dihedral, 3, PrimeField::new(3).unwrap());
        let b = dihedral_basis(&gf3).unwrap();
        assert_eq!(b.len(), 4);
        // a(a - a^2) = a^2 - 1 = 2 + a^2 over GF(3)
        assert_eq!(b.assignments[0].format(&gf3), "(2 + a^2, 0)");

        assert_eq!(dihedral_basis(&alg(Family::Dihedral, 4, Rationals)).unwrap().len(), 3);
        let gf2 = alg(Family::Dihedral, 3, PrimeField::new(2).unwrap());
        assert_eq!(dihedral_basis(&gf2).unwrap_err(), FamilyError::CharTwoUnsupported);
        let wrong = alg(Family::Dicyclic, 3, Rationals);
        assert!(matches!(dihedral_basis(&wrong), Err(FamilyError::FamilyMismatch(_))));
    }

    #[test]
    fn dicyclic_basis_examples() {
        assert_eq!(dicyclic_basis(&alg(Family::Dicyclic, 2, Rationals)).unwrap().len(), 3);
        assert_eq!(dicyclic_basis(&alg(Family::Dicyclic, 3, PrimeField::new(3).unwrap())).unwrap().len(), 8);
        assert_eq!(dicyclic_basis(&alg(Family::Dicyclic, 2, PrimeField::new(3).unwrap())).unwrap().len(), 3);
        let q = alg(Family::Dicyclic, 2, Rationals);
        assert_eq!(dicyclic_basis(&q).unwrap().labels[0], "(a^2 x_1 b, 0)");
    }

    #[test]
    fn semidihedral_basis_examples() {
        assert_eq!(semidihedral_basis(&alg(Family::Semidihedral, 2, Rationals)).unwrap().len(), 9);
        assert_eq!(semidihedral_basis(&alg(Family::Semidihedral, 3, Rationals)).unwrap().len(), 12);
        assert_eq!(semidihedral_basis(&alg(Family::Semidihedral, 3, PrimeField::new(3).unwrap())).unwrap().len(), 16);
        assert!(semidihedral_basis(&alg(Family::Semidihedral, 1, Rationals)).unwrap().is_empty());
    }

    #[test]
    fn semidihedral_variant_is_recorded() {
        let b = semidihedral_basis(&alg(Family::Semidihedral, 2, Rationals)).unwrap();
        assert_eq!(b.variant_notes.len(), 1);
        assert!(b.variant_notes[0].contains("neither"), "{}", b.variant_notes[0]);
        let b = semidihedral_basis(&alg(Family::Semidihedral, 3, PrimeField::new(3).unwrap())).unwrap();
        assert!(b.variant_notes.is_empty());
    }

    #[test]
    fn printed_mixed_template_is_not_a_derivation() {
        // (a x_1 b, x_1) on D_6: f~(abab) = 2(a^2 - 1) x_1 b
        let q = alg(Family::Dihedral, 3, Rationals);
        let b = dihedral_basis(&q).unwrap();
        let report = extend_generator_map(&q, &b.assignments[1]).unwrap_err();
        assert_eq!(report.describe(&q), "f~(abab) = 2b - 4ab + 2a^2b");
        let negated = GeneratorAssignment {
            images: vec![q.neg(&b.assignments[1].images[0]), b.assignments[1].images[1].clone()],
        };
        assert!(extend_generator_map(&q, &negated).is_ok());
    }

    #[test]
    fn inner_witness_examples() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let w = family_inner_witnesses(&g).unwrap();
        assert_eq!(g.format_element_list(&w), "{a, ab, a^2b}");
        let g = FiniteGroup::dicyclic(2, false).unwrap();
        let w = family_inner_witnesses(&g).unwrap();
        assert_eq!(g.format_element_list(&w), "{a, a^2b, a^3b}");
        assert_eq!(family_inner_witnesses(&FiniteGroup::semidihedral(2).unwrap()).unwrap().len(), 9);
        let g = FiniteGroup::dihedral(4).unwrap();
        assert_eq!(g.format_element_list(&family_inner_witnesses(&g).unwrap()), "{a, a^2b, a^3b}");
    }

    #[test]
    fn anticentralizer_examples() {
        let d10 = alg(Family::Dihedral, 5, Rationals);
        let (beta, list) = family_anticentralizer_basis(&d10, "b").unwrap();
        assert_eq!(d10.group().name(beta), "b");
        assert_eq!(list.len(), 4);
        assert_eq!(d10.format(&list[1]), "ab - a^4b");

        let t12 = alg(Family::Dicyclic, 3, Rationals);
        let (beta, list) = family_anticentralizer_basis(&t12, "a^{n+1}b").unwrap();
        assert_eq!(t12.group().name(beta), "a^4b");
        assert_eq!(list.len(), 4);
        assert_eq!(family_anticentralizer_basis(&t12, "a^4b").unwrap().0, beta);
        for x in &list {
            assert!(t12.anticommutes(x, &t12.basis(beta)));
        }
        assert!(matches!(
            family_anticentralizer_basis(&t12, "ab"),
            Err(FamilyError::UnsupportedTag { .. })
        ));

        let sd16 = alg(Family::Semidihedral, 2, Rationals);
        assert_eq!(family_anticentralizer_basis(&sd16, "b").unwrap().1.len(), 6);
    }

    /// Everything except the literal claimed-basis checks passes.
    fn assert_only_basis_fails(r: &VerificationReport) {
        for c in &r.checks {
            assert!(c.pass || c.name.starts_with("claimed basis"), "{c:?}");
        }
    }

    #[test]
    fn verify_examples() {
        let r = verify_family(&spec(Family::Dihedral, 3, 0), false).unwrap();
        assert_only_basis_fails(&r);
        assert_eq!(r.computed_dims, Dims { der: 3, inner: 3, outer: 0 });
        assert_eq!(r.status(), Status::Fail);
        assert_eq!(r.first_failure().unwrap().name, "claimed basis extends to derivations");
        assert!(r.variant_notes.iter().any(|n| n.contains("the repaired set is a basis")), "{:?}", r.variant_notes);

        let r = verify_family(&spec(Family::Dihedral, 3, 3), false).unwrap();
        assert_only_basis_fails(&r);
        assert_eq!(r.computed_dims, Dims { der: 4, inner: 3, outer: 1 });

        let r = verify_family(&spec(Family::Semidihedral, 3, 3), false).unwrap();
        assert_only_basis_fails(&r);
        assert_eq!(r.computed_dims, Dims { der: 16, inner: 12, outer: 4 });

        let r = verify_family(&spec(Family::Semidihedral, 1, 0), false).unwrap();
        assert_eq!(r.status(), Status::Pass, "{:?}", r.first_failure());
        assert_eq!(r.computed_dims, Dims { der: 0, inner: 0, outer: 0 });

        assert_eq!(
            verify_family(&spec(Family::Dihedral, 3, 2), false).unwrap_err(),
            FamilyError::CharTwoUnsupported
        );
        assert!(matches!(
            verify_family(&spec(Family::Dicyclic, 1, 0), false),
            Err(FamilyError::Group(GroupError::ParameterTooSmall { .. }))
        ));
    }

    #[test]
    fn inner_only_runs_in_characteristic_two() {
        let r = verify_inner_only(&spec(Family::Semidihedral, 3, 2), false).unwrap();
        assert_eq!(r.status(), Status::Pass, "{:?}", r.first_failure());
        assert_eq!(r.computed_dims.inner, 12);
    }

    #[test]
    fn modular_outer_example_has_no_witness() {
        let gf3 = alg(Family::Dihedral, 3, PrimeField::new(3).unwrap());
        let b = dihedral_basis(&gf3).unwrap();
        let d = extend_generator_map(&gf3, &b.assignments[0]).unwrap();
        assert!(leibniz_check(&gf3, &d));
        assert_eq!(innerness_witness(&gf3, &d).unwrap(), None);
    }

    #[test]
    fn report_json_shape() {
        let r = verify_family(&spec(Family::Dicyclic, 2, 0), false).unwrap();
        let v = r.to_json();
        assert_eq!(v["status"], "FAIL");
        assert_eq!(v["dims"]["der"], 3);
        assert_eq!(v["spec"]["field"], "Q");
        assert_eq!(v["spec"]["regime"], "REGULAR");
        assert_eq!(v["checks"][0]["name"], "class count");
        assert_eq!(v["checks"][0]["pass"], true);
    }
}
