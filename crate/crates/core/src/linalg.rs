//! Exact row reduction over any [`Field`].
//!
//! The systems built by the solvers are large but very sparse (a Leibniz
//! constraint touches three unknowns), so rows are kept sparse and reduced
//! incrementally. [`SubspaceBasis`] is the canonical reduced row-echelon form
//! of a subspace: two subspaces are equal iff their bases are structurally
//! equal.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("row {row} has length {found}, expected {expected}")]
    RaggedInput { row: usize, expected: usize, found: usize },
}

/// Sparse row: `(column, nonzero value)` pairs sorted by column.
pub type SparseRow<E> = Vec<(usize, E)>;

/// Incremental echelon form. Each stored row is normalised (leading entry 1)
/// and has no entries in pivot columns that existed when it was inserted.
#[derive(Debug, Clone)]
pub struct Echelon<F: Field> {
    field: F,
    ncols: usize,
    pivot_of: Vec<Option<usize>>,
    rows: Vec<SparseRow<F::Elem>>,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, ncols: usize) -> Self {
        Self {
            field,
            ncols,
            pivot_of: vec![None; ncols],
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_of[col].is_some()
    }

    /// Reduces `row` against the current pivots; the result has no entries
    /// in pivot columns.
    pub fn reduce(&self, row: impl IntoIterator<Item = (usize, F::Elem)>) -> BTreeMap<usize, F::Elem> {
        let f = &self.field;
        let mut work: BTreeMap<usize, F::Elem> = BTreeMap::new();
        for (c, v) in row {
            debug_assert!(c < self.ncols);
            let slot = work.entry(c).or_insert_with(|| f.zero());
            f.add_assign(slot, &v);
        }
        work.retain(|_, v| !f.is_zero(v));

        let mut cursor = 0;
        loop {
            let next = work
                .range(cursor..)
                .find(|(c, _)| self.pivot_of[**c].is_some())
                .map(|(c, _)| *c);
            let Some(col) = next else { break };
            let coeff = work.remove(&col).unwrap();
            let pivot_row = &self.rows[self.pivot_of[col].unwrap()];
            for (c, v) in &pivot_row[1..] {
                let slot = work.entry(*c).or_insert_with(|| f.zero());
                *slot = f.sub(slot, &f.mul(&coeff, v));
                if f.is_zero(slot) {
                    work.remove(c);
                }
            }
            cursor = col + 1;
        }
        work
    }

    /// Adds a row; returns `true` if it was independent of the rows so far.
    pub fn insert(&mut self, row: impl IntoIterator<Item = (usize, F::Elem)>) -> bool {
        let work = self.reduce(row);
        let Some((&lead, lead_val)) = work.iter().next() else {
            return false;
        };
        let f = &self.field;
        let scale = f.inv(lead_val).expect("leading entry is nonzero");
        let normalised: SparseRow<F::Elem> = work.iter().map(|(c, v)| (*c, f.mul(&scale, v))).collect();
        self.pivot_of[lead] = Some(self.rows.len());
        self.rows.push(normalised);
        true
    }

    pub fn insert_dense(&mut self, row: &[F::Elem]) -> bool {
        let f = self.field.clone();
        self.insert(row.iter().enumerate().filter(|(_, v)| !f.is_zero(v)).map(|(c, v)| (c, v.clone())))
    }

    /// Fully reduced row-echelon form, rows ordered by pivot column.
    pub fn into_rref(self) -> Vec<SparseRow<F::Elem>> {
        let f = &self.field;
        let mut order: Vec<(usize, usize)> = self
            .pivot_of
            .iter()
            .enumerate()
            .filter_map(|(c, r)| r.map(|r| (c, r)))
            .collect();
        let mut reduced: Vec<Option<SparseRow<F::Elem>>> = vec![None; self.rows.len()];
        // rightmost pivot first; by then every pivot to the right is final
        order.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        for &(col, r) in &order {
            let row = &self.rows[r];
            let mut work: BTreeMap<usize, F::Elem> = row[1..].iter().cloned().collect();
            let hits: Vec<usize> = work.keys().copied().filter(|c| self.pivot_of[*c].is_some()).collect();
            for c in hits {
                let Some(coeff) = work.remove(&c) else { continue };
                let other = reduced[self.pivot_of[c].unwrap()].as_ref().unwrap();
                for (k, v) in &other[1..] {
                    let slot = work.entry(*k).or_insert_with(|| f.zero());
                    *slot = f.sub(slot, &f.mul(&coeff, v));
                    if f.is_zero(slot) {
                        work.remove(k);
                    }
                }
            }
            let mut out = Vec::with_capacity(work.len() + 1);
            out.push((col, f.one()));
            out.extend(work);
            reduced[r] = Some(out);
        }
        order.reverse();
        order.into_iter().map(|(_, r)| reduced[r].take().unwrap()).collect()
    }

    /// Basis of `{v : R v = 0}` for the inserted rows.
    pub fn kernel(self) -> SubspaceBasis<F> {
        let field = self.field.clone();
        let ncols = self.ncols;
        let free: Vec<usize> = (0..ncols).filter(|&c| self.pivot_of[c].is_none()).collect();
        let rref = self.into_rref();
        let mut vectors: Vec<Vec<F::Elem>> = free
            .iter()
            .map(|&c| {
                let mut v = vec![field.zero(); ncols];
                v[c] = field.one();
                v
            })
            .collect();
        let slot: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        for row in &rref {
            let pivot = row[0].0;
            for (c, val) in &row[1..] {
                vectors[slot[c]][pivot] = field.neg(val);
            }
        }
        SubspaceBasis::from_spanning(field, ncols, vectors)
    }
}

/// Canonical (reduced row-echelon) basis of a subspace of `F^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceBasis<F: Field> {
    pub ambient_dim: usize,
    pub rows: Vec<Vec<F::Elem>>,
}

impl<F: Field> SubspaceBasis<F> {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            rows: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Canonical basis of the span of `vectors`.
    pub fn from_spanning<I, V>(field: F, ambient_dim: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[F::Elem]>,
    {
        let mut ech = Echelon::new(field.clone(), ambient_dim);
        for v in vectors {
            let v = v.as_ref();
            debug_assert_eq!(v.len(), ambient_dim);
            ech.insert_dense(v);
        }
        Self::from_echelon(ech)
    }

    pub fn from_echelon(ech: Echelon<F>) -> Self {
        let field = ech.field.clone();
        let ambient_dim = ech.ncols;
        let rows = ech
            .into_rref()
            .into_iter()
            .map(|sparse| {
                let mut dense = vec![field.zero(); ambient_dim];
                for (c, v) in sparse {
                    dense[c] = v;
                }
                dense
            })
            .collect();
        Self { ambient_dim, rows }
    }

    pub fn pivots(&self, field: &F) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| r.iter().position(|x| !field.is_zero(x)).expect("basis rows are nonzero"))
            .collect()
    }

    pub fn contains(&self, field: &F, v: &[F::Elem]) -> bool {
        let mut ech = Echelon::new(field.clone(), self.ambient_dim);
        for r in &self.rows {
            ech.insert_dense(r);
        }
        !ech.insert_dense(v)
    }

    pub fn is_subspace_of(&self, field: &F, other: &SubspaceBasis<F>) -> bool {
        self.rows.iter().all(|r| other.contains(field, r))
    }

    pub fn sum(&self, field: &F, other: &SubspaceBasis<F>) -> SubspaceBasis<F> {
        SubspaceBasis::from_spanning(field.clone(), self.ambient_dim, self.rows.iter().chain(&other.rows))
    }
}

/// Rank of a list of dense vectors.
pub fn rank<F: Field>(field: &F, ncols: usize, vectors: &[Vec<F::Elem>]) -> usize {
    let mut ech = Echelon::new(field.clone(), ncols);
    vectors.iter().filter(|v| ech.insert_dense(v)).count()
}

/// Canonical basis of the nullspace of a dense matrix given by rows.
pub fn nullspace<F: Field>(field: &F, ncols: usize, rows: &[Vec<F::Elem>]) -> Result<SubspaceBasis<F>, LinalgError> {
    let mut ech = Echelon::new(field.clone(), ncols);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(LinalgError::RaggedInput {
                row: i,
                expected: ncols,
                found: r.len(),
            });
        }
        ech.insert_dense(r);
    }
    Ok(ech.kernel())
}

/// Nullspace of a sparse system.
pub fn sparse_nullspace<F, I, R>(field: &F, ncols: usize, rows: I) -> SubspaceBasis<F>
where
    F: Field,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = (usize, F::Elem)>,
{
    let mut ech = Echelon::new(field.clone(), ncols);
    for r in rows {
        ech.insert(r);
    }
    ech.kernel()
}

/// Solves `A x = b` for sparse rows `(row, rhs)`. Returns the canonical
/// particular solution (free unknowns set to zero), or `None` when the
/// system is inconsistent.
pub fn solve<F, I, R>(field: &F, ncols: usize, rows: I) -> Option<Vec<F::Elem>>
where
    F: Field,
    I: IntoIterator<Item = (R, F::Elem)>,
    R: IntoIterator<Item = (usize, F::Elem)>,
{
    // augmented column `ncols` sits to the right of every unknown
    let mut ech = Echelon::new(field.clone(), ncols + 1);
    for (row, rhs) in rows {
        let entries = row.into_iter().chain(std::iter::once((ncols, field.neg(&rhs))));
        ech.insert(entries);
    }
    if ech.is_pivot(ncols) {
        return None;
    }
    let mut x = vec![field.zero(); ncols];
    for row in ech.into_rref() {
        let pivot = row[0].0;
        // row: x_pivot + sum(free terms) - rhs = 0, free unknowns are zero
        if let Some((_, v)) = row.iter().find(|(c, _)| *c == ncols) {
            x[pivot] = field.neg(v);
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{PrimeField, Rationals};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        Rationals.from_int(n)
    }

    #[test]
    fn identity_and_zero_matrices() {
        let id: Vec<Vec<BigRational>> = (0..3)
            .map(|i| (0..3).map(|j| q((i == j) as i64)).collect())
            .collect();
        assert_eq!(nullspace(&Rationals, 3, &id).unwrap().dimension(), 0);
        let zero = vec![vec![q(0); 5]; 2];
        let ns = nullspace(&Rationals, 5, &zero).unwrap();
        assert_eq!(ns.dimension(), 5);
        assert_eq!(ns.rows[0], vec![q(1), q(0), q(0), q(0), q(0)]);
    }

    #[test]
    fn gf3_example_matches_exhaustive_search() {
        let f = PrimeField::new(3).unwrap();
        let rows = vec![vec![1u64, 1, 0], vec![0, 1, 1]];
        // oracle: enumerate GF(3)^3
        let mut solutions = vec![];
        for x in 0..3u64 {
            for y in 0..3u64 {
                for z in 0..3u64 {
                    if (x + y) % 3 == 0 && (y + z) % 3 == 0 {
                        solutions.push(vec![x, y, z]);
                    }
                }
            }
        }
        assert_eq!(solutions.len(), 3); // one-dimensional
        let ns = nullspace(&f, 3, &rows).unwrap();
        assert_eq!(ns.dimension(), 1);
        assert_eq!(ns.rows, vec![vec![1, 2, 1]]);
        assert!(solutions.contains(&ns.rows[0]));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![q(1), q(2)], vec![q(1)]];
        assert_eq!(
            nullspace(&Rationals, 2, &rows),
            Err(LinalgError::RaggedInput { row: 1, expected: 2, found: 1 })
        );
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        // x + y = 2, y = 1
        let sol = solve(
            &Rationals,
            2,
            vec![(vec![(0, q(1)), (1, q(1))], q(2)), (vec![(1, q(1))], q(1))],
        )
        .unwrap();
        assert_eq!(sol, vec![q(1), q(1)]);
        // x + y = 1, x + y = 2
        let none = solve(
            &Rationals,
            2,
            vec![(vec![(0, q(1)), (1, q(1))], q(1)), (vec![(0, q(1)), (1, q(1))], q(2))],
        );
        assert!(none.is_none());
        // underdetermined: free unknown set to zero
        let sol = solve(&Rationals, 3, vec![(vec![(0, q(2)), (2, q(4))], q(6))]).unwrap();
        assert_eq!(sol, vec![q(3), q(0), q(0)]);
    }

    fn dense_rows() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3i64..4, c), r))
    }

    proptest! {
        #[test]
        fn kernel_is_annihilated_and_rank_nullity_holds(rows in dense_rows()) {
            let ncols = rows[0].len();
            let rows_q: Vec<Vec<BigRational>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
            let ns = nullspace(&Rationals, ncols, &rows_q).unwrap();
            let r = rank(&Rationals, ncols, &rows_q);
            prop_assert_eq!(r + ns.dimension(), ncols);
            for v in &ns.rows {
                for row in &rows_q {
                    let dot: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                    prop_assert_eq!(dot, q(0));
                }
            }
        }

        #[test]
        fn canonical_form_ignores_order_and_scaling(rows in dense_rows(), k in 1i64..5) {
            let ncols = rows[0].len();
            let f = PrimeField::new(7).unwrap();
            let a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| f.from_int(x)).collect()).collect();
            let mut b: Vec<Vec<u64>> = a.iter().rev().map(|r| r.iter().map(|x| f.mul(x, &f.from_int(k))).collect()).collect();
            // add a redundant combination
            let combo: Vec<u64> = a[0].iter().zip(a.last().unwrap()).map(|(x, y)| f.add(x, y)).collect();
            b.push(combo);
            let sa = SubspaceBasis::from_spanning(f, ncols, &a);
            let sb = SubspaceBasis::from_spanning(f, ncols, &b);
            prop_assert_eq!(sa, sb);
        }
    }
}
