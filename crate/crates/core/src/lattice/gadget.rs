//! The Hadamard rotation gadget and exact evaluation of rotated block
//! norms.
//!
//! For a block of logical width `n`, the gadget is the first `n` columns
//! of the order-`m` Hadamard matrix, `m = 2^{⌈log n⌉}`, normalized by
//! `1/√m`. After the `m^{½-1/p}` rescale of the constructions, the
//! p-th-power norm of a block vector `v` is `m⁻¹·Σ_i |Σ_j H[i][j]v_j|^p`
//! — and since the sign of `H[i][j]` is `⟨bits i, bits j⟩` over GF(2),
//! that sum collapses to an average over the GF(2) span of the support's
//! column-bit vectors. `m` cancels entirely, so blocks whose width only
//! fits in a big integer are still evaluated exactly.

use crate::{Error, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::abs_pow;

/// Sign of the order-`2^L` Hadamard matrix at `(i, j)`: `+1` iff
/// `popcount(i & j)` is even. Follows from the recursive doubling
/// construction.
pub fn hadamard_sign(i: u64, j: u64) -> i32 {
    if (i & j).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Rotation gadget for a block of logical width `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationGadget {
    n: u64,
    m: u64,
}

impl RotationGadget {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParams("gadget width must be positive".into()));
        }
        let m = n.next_power_of_two();
        Ok(RotationGadget { n, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `Σ_i H[i][a]·H[i][b]`, which must be `m·δ_{ab}` (orthogonality of
    /// the columns, with the `1/m` normalization carried symbolically).
    pub fn column_dot(&self, a: u64, b: u64) -> i64 {
        (0..self.m)
            .map(|i| (hadamard_sign(i, a) * hadamard_sign(i, b)) as i64)
            .sum()
    }

    /// Dense row sums `Σ_j H[i][j]·v_j` for `i < m`; exact, for
    /// desk-scale widths.
    pub fn row_sums(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len() as u64, self.n);
        (0..self.m)
            .map(|i| {
                let mut s = BigInt::zero();
                for (j, vj) in v.iter().enumerate() {
                    if hadamard_sign(i, j as u64) > 0 {
                        s += vj;
                    } else {
                        s -= vj;
                    }
                }
                s
            })
            .collect()
    }

    /// `m⁻¹·Σ_i |Σ_j H[i][j]v_j|^p` by the dense route.
    pub fn norm_pow_over_m_dense(&self, v: &[BigInt], p: u32) -> Rat {
        let sum: BigInt = self.row_sums(v).iter().map(|s| abs_pow(s, p)).sum();
        Rat::new(sum, BigInt::from(self.m))
    }
}

/// `m⁻¹·Σ_i |Σ_j H[i][j]v_j|^p` for a sparse block vector given as
/// (column index, value) pairs, without touching `m`:
/// the sign patterns across the support form the GF(2) span of the
/// columns' bit vectors, each hit equally often.
///
/// Supports up to 63 nonzero entries per block (the pattern space is
/// enumerated).
pub fn block_norm_pow_over_m(cols: &[BigUint], vals: &[BigInt], p: u32) -> Result<Rat> {
    if p <= 2 {
        return Err(Error::BadNormIndex(p as u64));
    }
    let k = cols.len();
    assert_eq!(k, vals.len());
    if k == 0 {
        return Ok(Rat::zero());
    }
    if k > 63 {
        return Err(Error::CapExceeded {
            what: "block support (pattern enumeration)",
            value: k.to_string(),
            cap: "63".into(),
        });
    }
    // basis of the pattern space: one GF(2) vector (packed into u64,
    // coordinate j = bit j) per bit position appearing in some column
    let mut bit_positions: Vec<u64> = Vec::new();
    for c in cols {
        for b in 0..c.bits() {
            if c.bit(b) && !bit_positions.contains(&b) {
                bit_positions.push(b);
            }
        }
    }
    let mut basis: Vec<u64> = Vec::new();
    for &b in &bit_positions {
        let mut v: u64 = 0;
        for (j, c) in cols.iter().enumerate() {
            if c.bit(b) {
                v |= 1 << j;
            }
        }
        // reduce against the current basis
        for &e in &basis {
            let lead = 63 - e.leading_zeros();
            if (v >> lead) & 1 == 1 {
                v ^= e;
            }
        }
        if v != 0 {
            basis.push(v);
            basis.sort_by_key(|x| std::cmp::Reverse(*x));
        }
    }
    let r = basis.len();
    // enumerate the 2^r patterns by Gray-style subset expansion
    let mut total = BigInt::zero();
    for mask in 0u64..(1 << r) {
        let mut pattern: u64 = 0;
        for (bi, &bv) in basis.iter().enumerate() {
            if (mask >> bi) & 1 == 1 {
                pattern ^= bv;
            }
        }
        let mut s = BigInt::zero();
        for (j, v) in vals.iter().enumerate() {
            if (pattern >> j) & 1 == 1 {
                s -= v;
            } else {
                s += v;
            }
        }
        total += abs_pow(&s, p);
    }
    Ok(Rat::new(total, BigInt::from(1u64 << r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn widths_round_up_to_powers_of_two() {
        assert_eq!(RotationGadget::new(1).unwrap().m(), 1);
        assert_eq!(RotationGadget::new(3).unwrap().m(), 4);
        assert_eq!(RotationGadget::new(16).unwrap().m(), 16);
        assert!(RotationGadget::new(0).is_err());
    }

    #[test]
    fn columns_orthogonal_up_to_16() {
        for n in 1..=16u64 {
            let g = RotationGadget::new(n).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let expect = if a == b { g.m() as i64 } else { 0 };
                    assert_eq!(g.column_dot(a, b), expect, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn unit_vectors_cost_exactly_one() {
        for n in [1u64, 3, 5, 17, 64] {
            let g = RotationGadget::new(n).unwrap();
            for i in 0..n {
                let mut v = vec![BigInt::zero(); n as usize];
                v[i as usize] = BigInt::one();
                for p in [3u32, 4, 6] {
                    assert_eq!(g.norm_pow_over_m_dense(&v, p), Rat::one());
                    let sparse = block_norm_pow_over_m(
                        &[BigUint::from(i)],
                        &[BigInt::one()],
                        p,
                    )
                    .unwrap();
                    assert_eq!(sparse, Rat::one());
                }
            }
        }
    }

    #[test]
    fn sparse_pattern_route_matches_dense() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..50 {
            let n = rng.gen_range(1..=20u64);
            let g = RotationGadget::new(n).unwrap();
            let v: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-4..=4i64))).collect();
            let (cols, vals): (Vec<BigUint>, Vec<BigInt>) = v
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(j, x)| (BigUint::from(j as u64), x.clone()))
                .unzip();
            for p in [3u32, 5] {
                let dense = g.norm_pow_over_m_dense(&v, p);
                let sparse = block_norm_pow_over_m(&cols, &vals, p).unwrap();
                assert_eq!(dense, sparse);
            }
        }
    }

    #[test]
    fn norm_tradeoff_inequality_exact() {
        // m^{(1/2-1/p)p}·‖Uv‖_p^p >= ‖v‖_2^p, compared after squaring:
        // (m^{-1}·Σ|row|^p)^2 >= (‖v‖_2^2)^p, with equality on units
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12u64);
            let g = RotationGadget::new(n).unwrap();
            let v: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-5..=5i64))).collect();
            let p = *[3u32, 4, 6].iter().nth(rng.gen_range(0..3)).unwrap();
            let lhs = g.norm_pow_over_m_dense(&v, p);
            let l2sq: BigInt = v.iter().map(|x| x * x).sum();
            let rhs = Rat::from_integer(l2sq.pow(p));
            assert!(&lhs * &lhs >= rhs, "n={n} p={p} v={v:?}");
        }
    }
}
