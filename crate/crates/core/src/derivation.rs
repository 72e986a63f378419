//! Derivations of `FG`.
//!
//! Two independent routes to the space of F-linear derivations:
//!
//! * [`derivation_space`] solves the Leibniz identity directly for all
//!   `N x N` matrices (brute force).
//! * [`generator_derivation_space`] solves for generator images whose word
//!   derivatives vanish on every relator, and [`extend_generator_map`]
//!   lifts such an assignment to the whole algebra.
//!
//! Agreement of the two is the central differential test of this crate.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraError, GroupAlgebra};
use crate::group::GroupWord;
use crate::linalg::{solve, sparse_nullspace, SubspaceBasis};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("the group carries no relators")]
    NoRelators,
    #[error("matrix does not satisfy the Leibniz rule")]
    NotADerivation,
    #[error("expected {expected} generator images, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An F-linear map on `FG`; `columns[g]` is the image `d(g)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationMatrix<F: Field> {
    pub columns: Vec<AlgebraElement<F>>,
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    columns: Vec<Vec<Scalar>>,
}

impl<F: Field> DerivationMatrix<F> {
    pub fn zero(alg: &GroupAlgebra<F>) -> Self {
        Self {
            columns: vec![alg.zero(); alg.dim()],
        }
    }

    /// Flattened column by column: entry `g * N + h` is the coefficient of
    /// `h` in `d(g)`.
    pub fn flatten(&self) -> Vec<F::Elem> {
        self.columns.iter().flat_map(|c| c.coeffs.iter().cloned()).collect()
    }

    pub fn from_flat(order: usize, flat: &[F::Elem]) -> Self {
        assert_eq!(flat.len(), order * order);
        Self {
            columns: flat
                .chunks(order)
                .map(|c| AlgebraElement { coeffs: c.to_vec() })
                .collect(),
        }
    }

    pub fn apply(&self, alg: &GroupAlgebra<F>, x: &AlgebraElement<F>) -> AlgebraElement<F> {
        let f = alg.field();
        let mut out = alg.zero();
        for (g, c) in x.coeffs.iter().enumerate() {
            if f.is_zero(c) {
                continue;
            }
            out = alg.add(&out, &alg.scale(c, &self.columns[g]));
        }
        out
    }

    pub fn is_zero(&self, alg: &GroupAlgebra<F>) -> bool {
        self.columns.iter().all(|c| alg.is_zero(c))
    }

    pub fn to_json(&self, alg: &GroupAlgebra<F>) -> serde_json::Value {
        let f = alg.field();
        let doc = MatrixDoc {
            columns: self
                .columns
                .iter()
                .map(|c| c.coeffs.iter().map(|x| f.to_scalar(x)).collect())
                .collect(),
        };
        serde_json::to_value(doc).expect("matrix serialises")
    }

    pub fn from_json(alg: &GroupAlgebra<F>, value: &serde_json::Value) -> Result<Self, AlgebraError> {
        let doc: MatrixDoc = serde_json::from_value(value.clone()).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        if doc.columns.len() != alg.dim() {
            return Err(AlgebraError::GroupMismatch {
                expected: alg.dim(),
                found: doc.columns.len(),
            });
        }
        let f = alg.field();
        let columns = doc
            .columns
            .iter()
            .map(|col| {
                let coeffs = col.iter().map(|s| f.from_scalar(s)).collect::<Result<Vec<_>, _>>()?;
                alg.from_coeffs(coeffs)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { columns })
    }
}

/// Images `f(x)` of the group generators, in generator order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorAssignment<F: Field> {
    pub images: Vec<AlgebraElement<F>>,
}

impl<F: Field> GeneratorAssignment<F> {
    pub fn new(alg: &GroupAlgebra<F>, images: Vec<AlgebraElement<F>>) -> Result<Self, DerivationError> {
        let expected = alg.group().generators().len();
        if images.len() != expected {
            return Err(DerivationError::WrongArity {
                expected,
                found: images.len(),
            });
        }
        for x in &images {
            if x.len() != alg.dim() {
                return Err(AlgebraError::GroupMismatch {
                    expected: alg.dim(),
                    found: x.len(),
                }
                .into());
            }
        }
        Ok(Self { images })
    }

    pub fn zero(alg: &GroupAlgebra<F>) -> Self {
        Self {
            images: vec![alg.zero(); alg.group().generators().len()],
        }
    }

    /// Unknown layout `t * N + h`: all of `f(x_0)` first, then `f(x_1)`, ...
    pub fn flatten(&self) -> Vec<F::Elem> {
        self.images.iter().flat_map(|x| x.coeffs.iter().cloned()).collect()
    }

    pub fn from_flat(order: usize, flat: &[F::Elem]) -> Self {
        Self {
            images: flat
                .chunks(order)
                .map(|c| AlgebraElement { coeffs: c.to_vec() })
                .collect(),
        }
    }

    pub fn format(&self, alg: &GroupAlgebra<F>) -> String {
        let parts: Vec<String> = self.images.iter().map(|x| alg.format(x)).collect();
        format!("({})", parts.join(", "))
    }
}

/// A relator whose word derivative does not vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatorFailure<F: Field> {
    pub relator: GroupWord,
    pub value: AlgebraElement<F>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureReport<F: Field> {
    pub failures: Vec<RelatorFailure<F>>,
}

impl<F: Field> FailureReport<F> {
    pub fn describe(&self, alg: &GroupAlgebra<F>) -> String {
        let parts: Vec<String> = self
            .failures
            .iter()
            .map(|r| format!("f~({}) = {}", r.relator, alg.format(&r.value)))
            .collect();
        parts.join("; ")
    }
}

impl<F: Field> fmt::Display for FailureReport<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} relator(s) with nonzero word derivative", self.failures.len())
    }
}

/// One summand `sign * left * f(x_t) * right` of a word derivative.
struct Term {
    generator: usize,
    negative: bool,
    left: usize,
    right: usize,
}

/// Expands `f~(w)` into summands. A positive letter `x` at position `i`
/// contributes `prefix * f(x) * suffix`; an inverse letter contributes
/// `-prefix * x^-1 f(x) x^-1 * suffix`.
fn word_terms<F: Field>(alg: &GroupAlgebra<F>, word: &GroupWord) -> Vec<Term> {
    let g = alg.group();
    let letter = |&(t, e): &(usize, i8)| {
        let x = g.generators()[t];
        if e > 0 {
            x
        } else {
            g.inv(x)
        }
    };
    let k = word.letters.len();
    let mut suffix = vec![g.identity(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = g.mul(letter(&word.letters[i]), suffix[i + 1]);
    }
    let mut prefix = g.identity();
    let mut terms = Vec::with_capacity(k);
    for i in 0..k {
        let (t, e) = word.letters[i];
        let after = suffix[i + 1];
        if e > 0 {
            terms.push(Term {
                generator: t,
                negative: false,
                left: prefix,
                right: after,
            });
        } else {
            let x_inv = letter(&word.letters[i]);
            terms.push(Term {
                generator: t,
                negative: true,
                left: g.mul(prefix, x_inv),
                right: g.mul(x_inv, after),
            });
        }
        prefix = g.mul(prefix, letter(&word.letters[i]));
    }
    terms
}

/// `f~(w)`, the extension of a generator assignment to free-group words
/// satisfying `f~(vw) = f~(v) w + v f~(w)`.
pub fn word_derivative<F: Field>(alg: &GroupAlgebra<F>, f: &GeneratorAssignment<F>, word: &GroupWord) -> AlgebraElement<F> {
    let field = alg.field();
    let g = alg.group();
    let mut out = alg.zero();
    for term in word_terms(alg, word) {
        let image = &f.images[term.generator];
        for (h, c) in image.coeffs.iter().enumerate() {
            if field.is_zero(c) {
                continue;
            }
            let slot = &mut out.coeffs[g.mul(g.mul(term.left, h), term.right)];
            if term.negative {
                field.sub_assign(slot, c);
            } else {
                field.add_assign(slot, c);
            }
        }
    }
    out
}

/// True iff `d(gh) = d(g) h + g d(h)` for every pair of group elements.
pub fn leibniz_check<F: Field>(alg: &GroupAlgebra<F>, d: &DerivationMatrix<F>) -> bool {
    let g = alg.group();
    let f = alg.field();
    let n = g.order();
    if d.columns.len() != n || d.columns.iter().any(|c| c.len() != n) {
        return false;
    }
    for x in 0..n {
        for y in 0..n {
            let lhs = &d.columns[g.mul(x, y)];
            // (d(x) y + x d(y))_h = d(x)_{h y^-1} + d(y)_{x^-1 h}
            let (x_inv, y_inv) = (g.inv(x), g.inv(y));
            for h in 0..n {
                let rhs = f.add(&d.columns[x].coeffs[g.mul(h, y_inv)], &d.columns[y].coeffs[g.mul(x_inv, h)]);
                if lhs.coeffs[h] != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// All F-linear derivations of `FG`, as flattened [`DerivationMatrix`]
/// vectors (ambient dimension `N^2`).
///
/// Leibniz constraints are imposed only for pairs `(g, x)` with `x` a
/// generator; the remaining pairs follow by induction on word length, and
/// every basis vector is checked against all `N^2` pairs before returning.
pub fn derivation_space<F: Field>(alg: &GroupAlgebra<F>) -> SubspaceBasis<F> {
    let g = alg.group();
    let f = alg.field();
    let n = g.order();
    let unknown = |h: usize, col: usize| col * n + h;
    let one = f.one();
    let mut rows: Vec<Vec<(usize, F::Elem)>> = Vec::with_capacity(n * n * g.generators().len());
    for col in 0..n {
        let col_inv = g.inv(col);
        for &x in g.generators() {
            let x_inv = g.inv(x);
            let gx = g.mul(col, x);
            for h in 0..n {
                // d(gx)_h - d(g)_{h x^-1} - d(x)_{g^-1 h} = 0
                let mut row: BTreeMap<usize, F::Elem> = BTreeMap::new();
                for (u, c) in [
                    (unknown(h, gx), one.clone()),
                    (unknown(g.mul(h, x_inv), col), f.neg(&one)),
                    (unknown(g.mul(col_inv, h), x), f.neg(&one)),
                ] {
                    let slot = row.entry(u).or_insert_with(|| f.zero());
                    f.add_assign(slot, &c);
                }
                rows.push(row.into_iter().filter(|(_, v)| !f.is_zero(v)).collect());
            }
        }
    }
    let space = sparse_nullspace(f, n * n, rows);
    for v in &space.rows {
        assert!(
            leibniz_check(alg, &DerivationMatrix::from_flat(n, v)),
            "generator-restricted Leibniz system produced a non-derivation"
        );
    }
    space
}

/// `d_β : α ↦ αβ - βα`.
pub fn inner_derivation<F: Field>(alg: &GroupAlgebra<F>, beta: &AlgebraElement<F>) -> DerivationMatrix<F> {
    DerivationMatrix {
        columns: (0..alg.dim())
            .map(|g| alg.sub(&alg.left_translate(g, beta), &alg.right_translate(beta, g)))
            .collect(),
    }
}

/// The inner derivations together with the representative-complement basis
/// `{d_g : g in a non-central class, g not its representative}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerDerivations<F: Field> {
    pub space: SubspaceBasis<F>,
    pub witnesses: Vec<usize>,
}

pub fn inner_derivation_space<F: Field>(alg: &GroupAlgebra<F>) -> InnerDerivations<F> {
    let n = alg.dim();
    let images: Vec<Vec<F::Elem>> = (0..n).map(|g| inner_derivation(alg, &alg.basis(g)).flatten()).collect();
    let space = SubspaceBasis::from_spanning(alg.field().clone(), n * n, &images);
    InnerDerivations {
        space,
        witnesses: alg.group().conjugacy_classes().non_representatives(),
    }
}

/// Span of `{d_g : g in elements}`.
pub fn inner_span<F: Field>(alg: &GroupAlgebra<F>, elements: &[usize]) -> SubspaceBasis<F> {
    let n = alg.dim();
    SubspaceBasis::from_spanning(
        alg.field().clone(),
        n * n,
        elements.iter().map(|&g| inner_derivation(alg, &alg.basis(g)).flatten()),
    )
}

/// Assignments `(f(x_1), ..., f(x_k))` that extend to derivations: the
/// kernel of `f ↦ (f~(y))_{y in relators}` (ambient dimension `k N`).
pub fn generator_derivation_space<F: Field>(alg: &GroupAlgebra<F>) -> Result<SubspaceBasis<F>, DerivationError> {
    let g = alg.group();
    if g.relators().is_empty() {
        return Err(DerivationError::NoRelators);
    }
    let f = alg.field();
    let n = g.order();
    let k = g.generators().len();
    // row (relator r, element e) as a map over unknowns t * N + h
    let mut rows: Vec<BTreeMap<usize, F::Elem>> = vec![BTreeMap::new(); g.relators().len() * n];
    for (r, relator) in g.relators().iter().enumerate() {
        for term in word_terms(alg, relator) {
            for h in 0..n {
                let e = g.mul(g.mul(term.left, h), term.right);
                let slot = rows[r * n + e].entry(term.generator * n + h).or_insert_with(|| f.zero());
                if term.negative {
                    f.sub_assign(slot, &f.one());
                } else {
                    f.add_assign(slot, &f.one());
                }
            }
        }
    }
    let rows = rows
        .into_iter()
        .map(|row| row.into_iter().filter(|(_, v)| !f.is_zero(v)).collect::<Vec<_>>());
    Ok(sparse_nullspace(f, k * n, rows))
}

/// Relators with nonzero word derivative under `f`.
pub fn relator_failures<F: Field>(alg: &GroupAlgebra<F>, f: &GeneratorAssignment<F>) -> Vec<RelatorFailure<F>> {
    alg.group()
        .relators()
        .iter()
        .filter_map(|y| {
            let value = word_derivative(alg, f, y);
            (!alg.is_zero(&value)).then(|| RelatorFailure {
                relator: y.clone(),
                value,
            })
        })
        .collect()
}

/// Extends a generator assignment to the unique derivation with those
/// images, or reports the relators whose word derivatives do not vanish.
pub fn extend_generator_map<F: Field>(
    alg: &GroupAlgebra<F>,
    f: &GeneratorAssignment<F>,
) -> Result<DerivationMatrix<F>, FailureReport<F>> {
    let failures = relator_failures(alg, f);
    if !failures.is_empty() {
        return Err(FailureReport { failures });
    }
    let g = alg.group();
    Ok(DerivationMatrix {
        columns: (0..g.order()).map(|x| word_derivative(alg, f, g.normal_word(x))).collect(),
    })
}

/// Lifts every basis vector of [`generator_derivation_space`] and returns
/// the canonical span of the resulting matrices.
pub fn lifted_generator_space<F: Field>(alg: &GroupAlgebra<F>) -> Result<SubspaceBasis<F>, DerivationError> {
    let n = alg.dim();
    let assignments = generator_derivation_space(alg)?;
    let mut lifted = Vec::with_capacity(assignments.dimension());
    for v in &assignments.rows {
        let f = GeneratorAssignment::from_flat(n, v);
        let d = extend_generator_map(alg, &f).expect("kernel vectors kill every relator");
        lifted.push(d.flatten());
    }
    Ok(SubspaceBasis::from_spanning(alg.field().clone(), n * n, &lifted))
}

/// Solves `d_β = D`. Returns the canonical solution (free coordinates set to
/// zero), or `None` when `D` is outer.
pub fn innerness_witness<F: Field>(
    alg: &GroupAlgebra<F>,
    d: &DerivationMatrix<F>,
) -> Result<Option<AlgebraElement<F>>, DerivationError> {
    if !leibniz_check(alg, d) {
        return Err(DerivationError::NotADerivation);
    }
    let g = alg.group();
    let f = alg.field();
    let n = g.order();
    let one = f.one();
    let mut rows = Vec::with_capacity(n * n);
    for x in 0..n {
        let x_inv = g.inv(x);
        for h in 0..n {
            // (xβ - βx)_h = β_{x^-1 h} - β_{h x^-1}
            let (p, q) = (g.mul(x_inv, h), g.mul(h, x_inv));
            let row = if p == q {
                vec![]
            } else {
                vec![(p, one.clone()), (q, f.neg(&one))]
            };
            rows.push((row, d.columns[x].coeffs[h].clone()));
        }
    }
    Ok(solve(f, n, rows).map(|coeffs| AlgebraElement { coeffs }))
}
