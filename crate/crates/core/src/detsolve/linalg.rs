//! Exact sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::symkernel::Rational;

/// Sparse row: column index to nonzero value.
pub type SparseRow = BTreeMap<usize, Rational>;

/// Reduced row-echelon form: pivot rows keyed by pivot column, each with a
/// unit pivot and zeros in every other pivot column.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rref {
    columns: usize,
    pivots: BTreeMap<usize, SparseRow>,
}

fn axpy(target: &mut SparseRow, k: &Rational, src: &SparseRow) {
    for (c, v) in src {
        let entry = target.entry(*c).or_insert_with(Rational::zero);
        *entry -= k * v;
        if entry.is_zero() {
            target.remove(c);
        }
    }
}

impl Rref {
    pub fn new(columns: usize) -> Self {
        Rref { columns, pivots: BTreeMap::new() }
    }

    pub fn from_rows<'a>(columns: usize, rows: impl IntoIterator<Item = &'a SparseRow>) -> Self {
        let mut r = Rref::new(columns);
        for row in rows {
            r.insert(row.clone());
        }
        r
    }

    /// Adds a row to the spanned space; returns whether the rank grew.
    pub fn insert(&mut self, mut row: SparseRow) -> bool {
        for (p, prow) in &self.pivots {
            if let Some(k) = row.get(p).cloned() {
                axpy(&mut row, &k, prow);
            }
        }
        let Some((&lead, lead_val)) = row.iter().next() else {
            return false;
        };
        let inv = Rational::one() / lead_val;
        for v in row.values_mut() {
            *v *= &inv;
        }
        for prow in self.pivots.values_mut() {
            if let Some(k) = prow.get(&lead).cloned() {
                axpy(prow, &k, &row);
            }
        }
        self.pivots.insert(lead, row);
        true
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn pivot_rows(&self) -> impl Iterator<Item = (usize, &SparseRow)> {
        self.pivots.iter().map(|(c, r)| (*c, r))
    }

    /// One basis vector per free column, with a 1 in that column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        (0..self.columns)
            .filter(|c| !self.pivots.contains_key(c))
            .map(|free| {
                let mut v = vec![Rational::zero(); self.columns];
                v[free] = Rational::one();
                for (p, row) in &self.pivots {
                    if let Some(x) = row.get(&free) {
                        v[*p] = -x.clone();
                    }
                }
                v
            })
            .collect()
    }
}

pub fn dot(row: &SparseRow, v: &[Rational]) -> Rational {
    row.iter().fold(Rational::zero(), |acc, (c, x)| acc + x * &v[*c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::int;

    fn row(entries: &[(usize, i64)]) -> SparseRow {
        entries.iter().map(|&(c, v)| (c, int(v))).collect()
    }

    #[test]
    fn nullspace_examples() {
        let r = Rref::from_rows(2, [&row(&[(0, 1), (1, -1)])]);
        assert_eq!(r.nullspace(), vec![vec![int(1), int(1)]]);
        let id: Vec<SparseRow> = (0..3).map(|i| row(&[(i, 1)])).collect();
        assert!(Rref::from_rows(3, &id).nullspace().is_empty());
        let empty = Rref::new(3).nullspace();
        assert_eq!(empty.len(), 3);
        assert_eq!(empty[1], vec![int(0), int(1), int(0)]);
    }

    #[test]
    fn reduced_form_is_canonical() {
        let a = Rref::from_rows(3, &[row(&[(0, 2), (1, 4)]), row(&[(1, 1), (2, 1)])]);
        let b = Rref::from_rows(3, &[row(&[(1, 3), (2, 3)]), row(&[(0, 1), (2, -2)]), row(&[(0, 1), (1, 1), (2, -1)])]);
        assert_eq!(a, b);
        assert_eq!(a.rank(), 2);
    }
}
