//! Saturated integer kernel bases via unimodular column reduction.

use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Sparse integer matrix in triplet storage; zeros are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_dense(data: &[Vec<i64>]) -> Self {
        let rows = data.len();
        let cols = data.first().map(|r| r.len()).unwrap_or(0);
        let mut m = IntMatrix::new(rows, cols);
        for (i, row) in data.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols);
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        let cur = self.get(i, j) + v;
        self.set(i, j, cur);
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![BigInt::zero(); self.rows];
        for (&(i, j), v) in &self.entries {
            out[i] += v * &x[j];
        }
        out
    }

    fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (&(i, j), v) in &self.entries {
            d[i][j] = v.clone();
        }
        d
    }
}

/// Basis of `ker_Z(A)`: every basis column solves `A·x = 0`, the columns
/// are independent, and their integer span is the whole integer kernel
/// (saturation comes from tracking a unimodular column transform).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBasis {
    ambient: usize,
    columns: Vec<Vec<BigInt>>,
}

impl KernelBasis {
    pub fn identity(n: usize) -> Self {
        let columns = (0..n)
            .map(|j| {
                let mut c = vec![BigInt::zero(); n];
                c[j] = BigInt::from(1);
                c
            })
            .collect();
        KernelBasis { ambient: n, columns }
    }

    pub fn from_columns(ambient: usize, columns: Vec<Vec<BigInt>>) -> Result<Self> {
        if columns.iter().any(|c| c.len() != ambient) {
            return Err(Error::BadParams("kernel column has wrong length".into()));
        }
        Ok(KernelBasis { ambient, columns })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<BigInt>] {
        &self.columns
    }

    /// `Σ_j a_j · column_j`.
    pub fn combination(&self, coeffs: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(coeffs.len(), self.columns.len());
        let mut out = vec![BigInt::zero(); self.ambient];
        for (c, col) in coeffs.iter().zip(&self.columns) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(col) {
                *o += c * x;
            }
        }
        out
    }
}

/// Computes a saturated basis of `ker_Z(A)` by unimodular column
/// operations: rows are cleared gcd-style to a single pivot each; the
/// columns of the tracked transform that end up over a zero column of
/// the reduced matrix are exactly an integer basis of the kernel.
pub fn kernel_basis(a: &IntMatrix) -> KernelBasis {
    let rows = a.rows();
    let cols = a.cols();
    let mut w = a.to_dense();
    // unimodular transform, tracked column-wise
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| {
            let mut c = vec![BigInt::zero(); cols];
            c[j] = BigInt::from(1);
            c
        })
        .collect();
    let mut active: Vec<usize> = (0..cols).collect();
    for r in 0..rows {
        loop {
            // columns still active with a nonzero entry in row r
            let nz: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&j| !w[r][j].is_zero())
                .collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let pivot = nz[0];
                active.retain(|&j| j != pivot);
                break;
            }
            // reduce everything against the smallest-magnitude entry
            let jmin = nz
                .iter()
                .copied()
                .min_by_key(|&j| w[r][j].abs())
                .unwrap();
            for &j in &nz {
                if j == jmin {
                    continue;
                }
                let q = rounded_div(&w[r][j], &w[r][jmin]);
                if q.is_zero() {
                    continue;
                }
                for i in 0..rows {
                    let s = &q * &w[i][jmin];
                    w[i][j] -= s;
                }
                for i in 0..cols {
                    let s = &q * &u[i][jmin];
                    u[i][j] -= s;
                }
            }
        }
    }
    let columns: Vec<Vec<BigInt>> = active
        .into_iter()
        .map(|j| (0..cols).map(|i| u[i][j].clone()).collect())
        .collect();
    KernelBasis {
        ambient: cols,
        columns,
    }
}

// nearest-integer division keeps entries small during reduction
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let two_r = r.abs() * 2;
    if two_r > b.abs() {
        if a.sign() == b.sign() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_solves(a: &IntMatrix, basis: &KernelBasis) {
        for col in basis.columns() {
            assert!(a.mul_vec(col).iter().all(|x| x.is_zero()));
        }
    }

    /// Independent oracle: rational RREF of A, then an enumeration of all
    /// integer solutions in a coordinate box via the free variables.
    fn box_solutions(a: &IntMatrix, bound: i64) -> Vec<Vec<BigInt>> {
        type Q = Ratio<BigInt>;
        let rows = a.rows();
        let cols = a.cols();
        let mut m: Vec<Vec<Q>> = (0..rows)
            .map(|i| (0..cols).map(|j| Q::from_integer(a.get(i, j))).collect())
            .collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            if let Some(pr) = (row..rows).find(|&i| !m[i][col].is_zero()) {
                m.swap(row, pr);
                let inv = m[row][col].clone();
                for j in 0..cols {
                    m[row][j] = &m[row][j] / &inv;
                }
                for i in 0..rows {
                    if i != row && !m[i][col].is_zero() {
                        let f = m[i][col].clone();
                        for j in 0..cols {
                            let s = &f * &m[row][j];
                            m[i][j] = &m[i][j] - s;
                        }
                    }
                }
                pivots.push((row, col));
                row += 1;
            }
        }
        let free: Vec<usize> = (0..cols)
            .filter(|c| !pivots.iter().any(|&(_, pc)| pc == *c))
            .collect();
        let mut out = Vec::new();
        let mut assign = vec![0i64; free.len()];
        loop {
            let mut x: Vec<Q> = vec![Q::from_integer(BigInt::zero()); cols];
            for (k, &fc) in free.iter().enumerate() {
                x[fc] = Q::from_integer(BigInt::from(assign[k]));
            }
            for &(pr, pc) in pivots.iter().rev() {
                let mut v = Q::from_integer(BigInt::zero());
                for &fc in &free {
                    v += &m[pr][fc] * &x[fc];
                }
                x[pc] = -v;
            }
            let ok = x.iter().all(|q| {
                q.is_integer()
                    && q.to_integer().abs() <= BigInt::from(bound)
            });
            if ok {
                out.push(x.iter().map(|q| q.to_integer()).collect());
            }
            // odometer over the free coordinates
            let mut k = 0;
            loop {
                if k == assign.len() {
                    return out;
                }
                assign[k] += 1;
                if assign[k] <= bound {
                    break;
                }
                assign[k] = -bound;
                k += 1;
            }
        }
    }

    /// Membership of z in the integer span of the basis columns, by
    /// rational solve + integrality check.
    fn in_integer_span(basis: &KernelBasis, z: &[BigInt]) -> bool {
        type Q = Ratio<BigInt>;
        let n = basis.ambient();
        let r = basis.rank();
        // solve B x = z by RREF on [B | z]
        let mut m: Vec<Vec<Q>> = (0..n)
            .map(|i| {
                let mut row: Vec<Q> = basis
                    .columns()
                    .iter()
                    .map(|c| Q::from_integer(c[i].clone()))
                    .collect();
                row.push(Q::from_integer(z[i].clone()));
                row
            })
            .collect();
        let mut row = 0;
        let mut piv = Vec::new();
        for col in 0..r {
            if let Some(pr) = (row..n).find(|&i| !m[i][col].is_zero()) {
                m.swap(row, pr);
                let inv = m[row][col].clone();
                for j in 0..=r {
                    m[row][j] = &m[row][j] / &inv;
                }
                for i in 0..n {
                    if i != row && !m[i][col].is_zero() {
                        let f = m[i][col].clone();
                        for j in 0..=r {
                            let s = &f * &m[row][j];
                            m[i][j] = &m[i][j] - s;
                        }
                    }
                }
                piv.push((row, col));
                row += 1;
            }
        }
        // consistency and integrality
        for i in row..n {
            if !m[i][r].is_zero() {
                return false;
            }
        }
        piv.iter().all(|&(pr, _)| m[pr][r].is_integer())
    }

    #[test]
    fn kernel_of_ones_row() {
        let a = IntMatrix::from_dense(&[vec![1, 1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.rank(), 1);
        assert_solves(&a, &k);
        let c = &k.columns()[0];
        assert_eq!(c[0].abs(), BigInt::from(1));
        assert_eq!(&c[0] + &c[1], BigInt::zero());
    }

    #[test]
    fn kernel_of_zero_matrix_is_identity_span() {
        let a = IntMatrix::new(2, 3);
        let k = kernel_basis(&a);
        assert_eq!(k.rank(), 3);
        assert_solves(&a, &k);
        for j in 0..3 {
            let mut e = vec![BigInt::zero(); 3];
            e[j] = BigInt::from(1);
            assert!(in_integer_span(&k, &e));
        }
    }

    #[test]
    fn random_kernels_are_saturated() {
        let mut rng = StdRng::seed_from_u64(31);
        let mut done = 0;
        while done < 25 {
            let rows = rng.gen_range(1..=3usize);
            let cols = rng.gen_range(2..=5usize);
            let data: Vec<Vec<i64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            let a = IntMatrix::from_dense(&data);
            let k = kernel_basis(&a);
            assert_solves(&a, &k);
            // every box solution must be an integer combination
            for z in box_solutions(&a, 4) {
                assert!(
                    in_integer_span(&k, &z),
                    "solution {z:?} outside span for A={data:?}"
                );
            }
            done += 1;
        }
    }
}
