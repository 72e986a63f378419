//! The group algebra `FG`: arithmetic and its distinguished subspaces
//! (center, `Δ'(H)`, anti-centralizers).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::FiniteGroup;
use crate::linalg::{sparse_nullspace, SubspaceBasis};
use crate::scalar::{is_negative, Field, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("element has {found} coefficients but the group has order {expected}")]
    GroupMismatch { expected: usize, found: usize },
    #[error(transparent)]
    FieldMismatch(#[from] ScalarError),
    #[error("subgroup H is empty")]
    EmptySubgroup,
    #[error("element {0} of H is not in the ambient set")]
    NotContained(usize),
    #[error("element index {0} is out of range")]
    BadElement(usize),
    #[error("malformed element JSON: {0}")]
    Parse(String),
}

/// `Σ λ_g g`, coefficients indexed by group element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraElement<F: Field> {
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> AlgebraElement<F> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self, field: &F) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&g| !field.is_zero(&self.coeffs[g])).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    coeffs: Vec<Scalar>,
}

/// `FG` for a fixed group and field.
#[derive(Debug, Clone)]
pub struct GroupAlgebra<F: Field> {
    group: Arc<FiniteGroup>,
    field: F,
}

impl<F: Field> GroupAlgebra<F> {
    pub fn new(group: Arc<FiniteGroup>, field: F) -> Self {
        Self { group, field }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    pub fn zero(&self) -> AlgebraElement<F> {
        AlgebraElement {
            coeffs: vec![self.field.zero(); self.dim()],
        }
    }

    pub fn one(&self) -> AlgebraElement<F> {
        self.basis(self.group.identity())
    }

    pub fn basis(&self, g: usize) -> AlgebraElement<F> {
        let mut x = self.zero();
        x.coeffs[g] = self.field.one();
        x
    }

    /// `Σ c_k g_k` from integer coefficients; repeated elements accumulate.
    pub fn from_terms(&self, terms: &[(i64, usize)]) -> AlgebraElement<F> {
        let mut x = self.zero();
        for &(c, g) in terms {
            let c = self.field.from_int(c);
            self.field.add_assign(&mut x.coeffs[g], &c);
        }
        x
    }

    pub fn from_coeffs(&self, coeffs: Vec<F::Elem>) -> Result<AlgebraElement<F>, AlgebraError> {
        self.check(coeffs.len())?;
        Ok(AlgebraElement { coeffs })
    }

    fn check(&self, len: usize) -> Result<(), AlgebraError> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(AlgebraError::GroupMismatch {
                expected: self.dim(),
                found: len,
            })
        }
    }

    pub fn add(&self, x: &AlgebraElement<F>, y: &AlgebraElement<F>) -> AlgebraElement<F> {
        let f = &self.field;
        AlgebraElement {
            coeffs: x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| f.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, x: &AlgebraElement<F>, y: &AlgebraElement<F>) -> AlgebraElement<F> {
        let f = &self.field;
        AlgebraElement {
            coeffs: x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| f.sub(a, b)).collect(),
        }
    }

    pub fn neg(&self, x: &AlgebraElement<F>) -> AlgebraElement<F> {
        AlgebraElement {
            coeffs: x.coeffs.iter().map(|a| self.field.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: &F::Elem, x: &AlgebraElement<F>) -> AlgebraElement<F> {
        AlgebraElement {
            coeffs: x.coeffs.iter().map(|a| self.field.mul(c, a)).collect(),
        }
    }

    pub fn is_zero(&self, x: &AlgebraElement<F>) -> bool {
        x.coeffs.iter().all(|a| self.field.is_zero(a))
    }

    pub fn multiply(&self, x: &AlgebraElement<F>, y: &AlgebraElement<F>) -> Result<AlgebraElement<F>, AlgebraError> {
        self.check(x.len())?;
        self.check(y.len())?;
        Ok(self.mul(x, y))
    }

    /// Convolution product; lengths are assumed to match.
    pub fn mul(&self, x: &AlgebraElement<F>, y: &AlgebraElement<F>) -> AlgebraElement<F> {
        let f = &self.field;
        let g = &*self.group;
        let mut out = self.zero();
        let ys: Vec<usize> = y.support(f);
        for (a, xa) in x.coeffs.iter().enumerate() {
            if f.is_zero(xa) {
                continue;
            }
            for &b in &ys {
                f.add_mul_assign(&mut out.coeffs[g.mul(a, b)], xa, &y.coeffs[b]);
            }
        }
        out
    }

    /// `g · x`
    pub fn left_translate(&self, g: usize, x: &AlgebraElement<F>) -> AlgebraElement<F> {
        let mut out = self.zero();
        for (h, c) in x.coeffs.iter().enumerate() {
            out.coeffs[self.group.mul(g, h)] = c.clone();
        }
        out
    }

    /// `x · g`
    pub fn right_translate(&self, x: &AlgebraElement<F>, g: usize) -> AlgebraElement<F> {
        let mut out = self.zero();
        for (h, c) in x.coeffs.iter().enumerate() {
            out.coeffs[self.group.mul(h, g)] = c.clone();
        }
        out
    }

    /// `g · x · h`
    pub fn translate(&self, g: usize, x: &AlgebraElement<F>, h: usize) -> AlgebraElement<F> {
        let mut out = self.zero();
        for (k, c) in x.coeffs.iter().enumerate() {
            out.coeffs[self.group.mul(self.group.mul(g, k), h)] = c.clone();
        }
        out
    }

    /// `xy - yx`
    pub fn commutator(&self, x: &AlgebraElement<F>, y: &AlgebraElement<F>) -> AlgebraElement<F> {
        self.sub(&self.mul(x, y), &self.mul(y, x))
    }

    pub fn is_central(&self, x: &AlgebraElement<F>) -> bool {
        self.group
            .generators()
            .iter()
            .all(|&g| self.left_translate(g, x) == self.right_translate(x, g))
    }

    pub fn augmentation(&self, x: &AlgebraElement<F>) -> F::Elem {
        let f = &self.field;
        x.coeffs.iter().fold(f.zero(), |acc, c| f.add(&acc, c))
    }

    /// One class sum per conjugacy class, in class order.
    pub fn class_sums(&self) -> Vec<AlgebraElement<F>> {
        self.group
            .conjugacy_classes()
            .classes
            .iter()
            .map(|class| {
                let terms: Vec<(i64, usize)> = class.iter().map(|&g| (1, g)).collect();
                self.from_terms(&terms)
            })
            .collect()
    }

    /// `Z(FG)` computed directly as `{z : zg = gz for every generator g}`.
    pub fn center_basis(&self) -> SubspaceBasis<F> {
        let f = &self.field;
        let g = &*self.group;
        let n = g.order();
        let one = f.one();
        let minus = f.neg(&one);
        let mut rows = Vec::new();
        for &s in g.generators() {
            let s_inv = g.inv(s);
            // (zs - sz)_h = z_{h s^-1} - z_{s^-1 h}
            for h in 0..n {
                let (p, q) = (g.mul(h, s_inv), g.mul(s_inv, h));
                if p != q {
                    rows.push(vec![(p, one.clone()), (q, minus.clone())]);
                }
            }
        }
        sparse_nullspace(f, n, rows)
    }

    pub fn span(&self, elements: &[AlgebraElement<F>]) -> SubspaceBasis<F> {
        SubspaceBasis::from_spanning(self.field.clone(), self.dim(), elements.iter().map(|e| &e.coeffs))
    }

    /// `Δ'(H)` inside the span of `ambient`: elements supported on the
    /// ambient set whose coefficient sums over `H` and over `ambient \ H`
    /// both vanish.
    pub fn delta_prime_basis(&self, ambient: &[usize], subgroup: &[usize]) -> Result<SubspaceBasis<F>, AlgebraError> {
        let n = self.dim();
        if subgroup.is_empty() {
            return Err(AlgebraError::EmptySubgroup);
        }
        if let Some(&g) = ambient.iter().chain(subgroup).find(|&&g| g >= n) {
            return Err(AlgebraError::BadElement(g));
        }
        if let Some(&h) = subgroup.iter().find(|h| !ambient.contains(h)) {
            return Err(AlgebraError::NotContained(h));
        }
        let f = &self.field;
        let mut in_ambient = vec![false; n];
        ambient.iter().for_each(|&g| in_ambient[g] = true);
        let mut in_sub = vec![false; n];
        subgroup.iter().for_each(|&g| in_sub[g] = true);

        let mut rows: Vec<Vec<(usize, F::Elem)>> = Vec::new();
        rows.push((0..n).filter(|&g| in_sub[g]).map(|g| (g, f.one())).collect());
        rows.push((0..n).filter(|&g| in_ambient[g] && !in_sub[g]).map(|g| (g, f.one())).collect());
        rows.extend((0..n).filter(|&g| !in_ambient[g]).map(|g| vec![(g, f.one())]));
        Ok(sparse_nullspace(f, n, rows))
    }

    pub fn in_delta_prime(&self, x: &AlgebraElement<F>, ambient: &[usize], subgroup: &[usize]) -> Result<bool, AlgebraError> {
        Ok(self.delta_prime_basis(ambient, subgroup)?.contains(&self.field, &x.coeffs))
    }

    /// `{α : αβ = -βα}`, the nullspace of `α ↦ αβ + βα`.
    pub fn anti_centralizer(&self, beta: &AlgebraElement<F>) -> SubspaceBasis<F> {
        let f = &self.field;
        let g = &*self.group;
        let n = g.order();
        // row h collects the coefficient of α_a in (αβ + βα)_h
        let mut rows: Vec<BTreeMap<usize, F::Elem>> = vec![BTreeMap::new(); n];
        for s in beta.support(f) {
            let c = &beta.coeffs[s];
            for a in 0..n {
                for h in [g.mul(a, s), g.mul(s, a)] {
                    let slot = rows[h].entry(a).or_insert_with(|| f.zero());
                    f.add_assign(slot, c);
                }
            }
        }
        sparse_nullspace(f, n, rows)
    }

    pub fn anticommutes(&self, alpha: &AlgebraElement<F>, beta: &AlgebraElement<F>) -> bool {
        self.is_zero(&self.add(&self.mul(alpha, beta), &self.mul(beta, alpha)))
    }

    pub fn to_json(&self, x: &AlgebraElement<F>) -> serde_json::Value {
        let doc = ElementDoc {
            coeffs: x.coeffs.iter().map(|c| self.field.to_scalar(c)).collect(),
        };
        serde_json::to_value(doc).expect("element serialises")
    }

    pub fn from_json(&self, value: &serde_json::Value) -> Result<AlgebraElement<F>, AlgebraError> {
        let doc: ElementDoc = serde_json::from_value(value.clone()).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        let coeffs = doc
            .coeffs
            .iter()
            .map(|s| self.field.from_scalar(s))
            .collect::<Result<Vec<_>, _>>()?;
        self.from_coeffs(coeffs)
    }

    /// Human-readable form using the group's element names, e.g. `a - a^2b`.
    pub fn format(&self, x: &AlgebraElement<F>) -> String {
        let mut out = String::new();
        for g in x.support(&self.field) {
            let s = self.field.to_scalar(&x.coeffs[g]);
            let negative = is_negative(&s);
            let magnitude = if negative { self.field.to_scalar(&self.field.neg(&x.coeffs[g])) } else { s };
            let name = self.group.name(g);
            let unit = magnitude.to_string() == "1";
            match (out.is_empty(), negative) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            match (unit, name == "1") {
                (true, _) => out.push_str(name),
                (false, true) => out.push_str(&magnitude.to_string()),
                (false, false) => out.push_str(&format!("{magnitude}{name}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}
