//! Exact integer matrix algebra: row Hermite normal form, unique integer
//! solutions and rank over the rationals.
//!
//! Everything is carried out with [`BigInt`] entries; no step rounds or
//! truncates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix stored in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from row vectors.
    ///
    /// Panics if the rows have different lengths.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            entries.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    /// A `rows x cols` matrix with an explicit row-major entry list.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        IntMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in product");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&r| !a[(r, k)].is_zero()) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// row[target] += factor * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.entries[source * self.cols + c] * factor;
            self.entries[target * self.cols + c] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let e = &mut self.entries[r * self.cols + c];
            *e = -std::mem::take(e);
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        debug_assert!(r < self.rows && c < self.cols);
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.entries[r * self.cols + c]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Row Hermite normal form `H` of a matrix `M` together with the unimodular
/// transform `U` satisfying `U * M = H`.
#[derive(Clone, Debug)]
pub struct Hnf {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Column index of the pivot in each nonzero row of `h`.
    pub pivots: Vec<usize>,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Row-style Hermite normal form: `h` is in row echelon form, every pivot is
/// positive and the entries above a pivot lie in `[0, pivot)`.
pub fn hnf(m: &IntMatrix) -> Hnf {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        // Euclid on the column below `row`.
        loop {
            let smallest = (row..m.rows)
                .filter(|&r| !h[(r, col)].is_zero())
                .min_by(|&a, &b| h[(a, col)].abs().cmp(&h[(b, col)].abs()));
            let Some(p) = smallest else { break };
            h.swap_rows(row, p);
            u.swap_rows(row, p);
            let mut done = true;
            for r in row + 1..m.rows {
                if h[(r, col)].is_zero() {
                    continue;
                }
                let q = -h[(r, col)].div_floor(&h[(row, col)]);
                h.add_row_multiple(r, row, &q);
                u.add_row_multiple(r, row, &q);
                if !h[(r, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(row, col)].is_zero() {
            continue;
        }
        if h[(row, col)].is_negative() {
            h.negate_row(row);
            u.negate_row(row);
        }
        let pivot = h[(row, col)].clone();
        for r in 0..row {
            let q = -h[(r, col)].div_floor(&pivot);
            h.add_row_multiple(r, row, &q);
            u.add_row_multiple(r, row, &q);
        }
        pivots.push(col);
        row += 1;
    }
    Hnf { h, u, pivots }
}

/// Outcome of [`solve_unique`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solve {
    Unique(Vec<BigInt>),
    NoSolution,
    NonUnique,
}

/// Solves `a * x = b` over the integers, reporting whether the integer
/// solution set is empty, a single point, or larger.
pub fn solve_unique(a: &IntMatrix, b: &[BigInt]) -> Solve {
    assert_eq!(a.rows(), b.len(), "right-hand side has the wrong length");
    // U * A^T = H, so A * U^T = H^T and x = U^T y.
    let Hnf { h, u, pivots } = hnf(&a.transpose());
    let mut residual = b.to_vec();
    let mut y = vec![BigInt::zero(); a.cols()];
    for (k, &p) in pivots.iter().enumerate() {
        let (q, rem) = residual[p].div_rem(&h[(k, p)]);
        if !rem.is_zero() {
            return Solve::NoSolution;
        }
        for (c, res) in residual.iter_mut().enumerate().skip(p) {
            let e = &h[(k, c)];
            if !e.is_zero() {
                *res -= e * &q;
            }
        }
        y[k] = q;
    }
    if residual.iter().any(|r| !r.is_zero()) {
        return Solve::NoSolution;
    }
    if pivots.len() < a.cols() {
        return Solve::NonUnique;
    }
    Solve::Unique(u.transpose().mul_vec(&y))
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    hnf(m).rank()
}

/// Inverse of a square matrix over the integers, if it is unimodular.
pub fn unimodular_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    assert_eq!(m.rows(), m.cols(), "inverse of a non-square matrix");
    let n = m.rows();
    let Hnf { h, u, .. } = hnf(m);
    // M is unimodular iff its HNF is the identity; then U = M^{-1}.
    (h == IntMatrix::identity(n)).then_some(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn is_hnf(h: &IntMatrix, pivots: &[usize]) -> bool {
        let mut last: Option<usize> = None;
        for r in 0..h.rows() {
            let lead = (0..h.cols()).find(|&c| !h[(r, c)].is_zero());
            match (lead, r < pivots.len()) {
                (Some(c), true) => {
                    if c != pivots[r] || last.is_some_and(|l| c <= l) || !h[(r, c)].is_positive() {
                        return false;
                    }
                    for above in 0..r {
                        let e = &h[(above, c)];
                        if e.is_negative() || e >= &h[(r, c)] {
                            return false;
                        }
                    }
                    last = Some(c);
                }
                (None, false) => {}
                _ => return false,
            }
        }
        true
    }

    #[test]
    fn hnf_of_identity_is_identity() {
        let id = IntMatrix::identity(2);
        let d = hnf(&id);
        assert_eq!(d.h, id);
        assert_eq!(d.u, id);
    }

    #[test]
    fn hnf_of_column_is_gcd() {
        let m = IntMatrix::from_rows(&[vec![4], vec![6]]);
        let d = hnf(&m);
        assert_eq!(d.h, IntMatrix::from_rows(&[vec![2], vec![0]]));
        assert_eq!(d.u.mul(&m), d.h);
        assert_eq!(d.u.determinant().abs(), BigInt::one());
    }

    #[test]
    fn hnf_of_zero_matrix() {
        let z = IntMatrix::zeros(2, 2);
        let d = hnf(&z);
        assert_eq!(d.h, z);
        assert_eq!(d.u, IntMatrix::identity(2));
        assert_eq!(d.rank(), 0);
    }

    #[test]
    fn hnf_reduces_above_pivots() {
        let m = IntMatrix::from_rows(&[vec![2, 3, 5], vec![0, 7, 1], vec![4, 1, 0]]);
        let d = hnf(&m);
        assert!(is_hnf(&d.h, &d.pivots), "{:?}", d.h);
        assert_eq!(d.u.mul(&m), d.h);
        assert_eq!(d.u.determinant().abs(), BigInt::one());
    }

    #[test]
    fn solve_examples() {
        assert_eq!(
            solve_unique(&IntMatrix::identity(2), &v(&[3, -1])),
            Solve::Unique(v(&[3, -1]))
        );
        assert_eq!(
            solve_unique(&IntMatrix::from_rows(&[vec![2]]), &v(&[3])),
            Solve::NoSolution
        );
        assert_eq!(
            solve_unique(&IntMatrix::from_rows(&[vec![1, 1], vec![0, 2]]), &v(&[3, 4])),
            Solve::Unique(v(&[1, 2]))
        );
    }

    #[test]
    fn solve_detects_kernel_and_inconsistency() {
        let a = IntMatrix::from_rows(&[vec![1, 1]]);
        assert_eq!(solve_unique(&a, &v(&[2])), Solve::NonUnique);
        let a = IntMatrix::from_rows(&[vec![1], vec![1]]);
        assert_eq!(solve_unique(&a, &v(&[1, 2])), Solve::NoSolution);
        assert_eq!(solve_unique(&a, &v(&[2, 2])), Solve::Unique(v(&[2])));
        // no rows at all: the only system with zero unknowns has one solution
        assert_eq!(solve_unique(&IntMatrix::zeros(0, 0), &[]), Solve::Unique(vec![]));
        assert_eq!(solve_unique(&IntMatrix::zeros(0, 1), &[]), Solve::NonUnique);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&IntMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&IntMatrix::identity(3)), 3);
        assert_eq!(rank(&IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]])), 1);
    }

    #[test]
    fn entries_grow_past_machine_words() {
        let big = BigInt::from(u64::MAX) * BigInt::from(u64::MAX);
        let m = IntMatrix::from_entries(2, 1, vec![big.clone(), &big + 1]);
        let d = hnf(&m);
        assert_eq!(d.h[(0, 0)], BigInt::one());
        assert_eq!(d.u.mul(&m), d.h);
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        let inv = unimodular_inverse(&m).unwrap();
        assert_eq!(m.mul(&inv), IntMatrix::identity(2));
        assert!(unimodular_inverse(&IntMatrix::from_rows(&[vec![2]])).is_none());
    }

    #[test]
    fn determinant_small() {
        let m = IntMatrix::from_rows(&[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 9]]);
        assert_eq!(m.determinant(), BigInt::from(-3));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(max: usize) -> impl Strategy<Value = IntMatrix> {
            (0..=max, 0..=max).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-5i64..=5, r * c)
                    .prop_map(move |xs| IntMatrix::from_entries(r, c, xs.into_iter().map(BigInt::from).collect()))
            })
        }

        proptest! {
            #[test]
            fn hnf_is_unimodular_transform(m in matrix(5)) {
                let d = hnf(&m);
                prop_assert_eq!(d.u.mul(&m), d.h.clone());
                prop_assert_eq!(d.u.determinant().abs(), BigInt::one());
                prop_assert!(is_hnf(&d.h, &d.pivots));
            }

            #[test]
            fn rank_is_transpose_invariant(m in matrix(5)) {
                prop_assert_eq!(rank(&m), rank(&m.transpose()));
            }

            #[test]
            fn unique_solutions_solve_the_system(m in matrix(4), xs in proptest::collection::vec(-4i64..=4, 4)) {
                let x: Vec<BigInt> = xs[..m.cols()].iter().map(|&v| BigInt::from(v)).collect();
                let b = m.mul_vec(&x);
                match solve_unique(&m, &b) {
                    Solve::Unique(sol) => prop_assert_eq!(sol, x),
                    Solve::NonUnique => prop_assert!(rank(&m) < m.cols()),
                    Solve::NoSolution => prop_assert!(false, "planted solution missed"),
                }
            }
        }
    }
}
