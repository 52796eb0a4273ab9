//! Integer-kernel lattice bases, the Hadamard rotation gadget, exact
//! ℓp-norm evaluation of block-scaled vectors, and desk-scale SVP/uSVP
//! oracles. No floating point appears anywhere on an accept/reject
//! path: norms are rational p-th powers, and the irrational scale
//! factors of the constructions enter only through those powers.

mod gadget;
mod kernel;
mod svp;

pub use gadget::{block_norm_pow_over_m, hadamard_sign, RotationGadget};
pub use kernel::{kernel_basis, IntMatrix, KernelBasis};
pub use svp::{lambda2_oracle, svp_oracle, SvpOutcome};

use crate::{Error, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// One rotation block of a scaled instance: `n` logical columns pass
/// through a Hadamard gadget and are scaled by a weight whose p-th power
/// is the exact rational `weight_pow`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub id: String,
    pub n: u64,
    pub weight_pow: Rat,
}

/// Kernel basis plus block layout and norm index. The norm of a lattice
/// vector `v` is evaluated exactly as
/// `Σ_blocks weight_pow · m⁻¹ · Σ_rows |row-sum|^p`.
#[derive(Clone, Debug)]
pub struct ScaledKernelInstance {
    p: u32,
    threshold_pow: Rat,
    blocks: Vec<BlockSpec>,
    basis: KernelBasis,
}

impl ScaledKernelInstance {
    pub fn new(
        p: u32,
        threshold_pow: Rat,
        blocks: Vec<BlockSpec>,
        basis: KernelBasis,
    ) -> Result<Self> {
        if p <= 2 {
            return Err(Error::BadNormIndex(p as u64));
        }
        let total: u64 = blocks.iter().map(|b| b.n).sum();
        if total != basis.ambient() as u64 {
            return Err(Error::BadParams(format!(
                "block widths sum to {total} but the basis lives in dimension {}",
                basis.ambient()
            )));
        }
        if blocks.iter().any(|b| b.weight_pow <= Rat::zero()) {
            return Err(Error::BadParams("block weights must be positive".into()));
        }
        Ok(ScaledKernelInstance {
            p,
            threshold_pow,
            blocks,
            basis,
        })
    }

    /// Plain ℓp instance: every coordinate its own width-1 block of
    /// weight 1, threshold^p as given.
    pub fn plain(p: u32, threshold_pow: Rat, basis: KernelBasis) -> Result<Self> {
        let blocks = (0..basis.ambient())
            .map(|i| BlockSpec {
                id: format!("c{i}"),
                n: 1,
                weight_pow: Rat::one(),
            })
            .collect();
        ScaledKernelInstance::new(p, threshold_pow, blocks, basis)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn threshold_pow(&self) -> &Rat {
        &self.threshold_pow
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn basis(&self) -> &KernelBasis {
        &self.basis
    }

    /// Exact `‖·‖_p^p` of a vector in instance layout (concatenated
    /// block coordinates).
    pub fn norm_pow(&self, v: &[BigInt]) -> Result<Rat> {
        if v.len() != self.basis.ambient() {
            return Err(Error::ArityMismatch {
                expected: self.basis.ambient(),
                got: v.len(),
            });
        }
        let mut acc = Rat::zero();
        let mut off = 0usize;
        for block in &self.blocks {
            let n = block.n as usize;
            let mut cols: Vec<BigUint> = Vec::new();
            let mut vals: Vec<BigInt> = Vec::new();
            for j in 0..n {
                if !v[off + j].is_zero() {
                    cols.push(BigUint::from(j as u64));
                    vals.push(v[off + j].clone());
                }
            }
            if !vals.is_empty() {
                acc += &block.weight_pow * block_norm_pow_over_m(&cols, &vals, self.p)?;
            }
            off += n;
        }
        Ok(acc)
    }

    /// Smallest block weight p-th power; the enumeration relaxation
    /// needs it.
    pub fn min_weight_pow(&self) -> Rat {
        self.blocks
            .iter()
            .map(|b| b.weight_pow.clone())
            .min()
            .expect("instances have at least one block")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GapAnswer {
    Yes,
    No,
    Inconclusive,
}

/// Decides the promise problem: YES when `λ1 <= C` (boundary inclusive),
/// NO when `λ1 > γ·C`, Inconclusive inside the gap. Both comparisons are
/// made on exact p-th powers.
pub fn gap_decide(lambda1_pow: &Rat, threshold_pow: &Rat, gamma_pow: &Rat) -> GapAnswer {
    if lambda1_pow <= threshold_pow {
        GapAnswer::Yes
    } else if lambda1_pow > &(gamma_pow * threshold_pow) {
        GapAnswer::No
    } else {
        GapAnswer::Inconclusive
    }
}

/// `|x|^p` for integers, as a `BigInt`.
pub fn abs_pow(x: &BigInt, p: u32) -> BigInt {
    x.abs().pow(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_decide_conventions() {
        let one = Rat::one();
        let gamma_pow = Rat::new(BigInt::from(8), BigInt::one());
        // boundary inclusive on the YES side
        assert_eq!(gap_decide(&one, &one, &gamma_pow), GapAnswer::Yes);
        let big = Rat::new(BigInt::from(9), BigInt::one());
        assert_eq!(gap_decide(&big, &one, &gamma_pow), GapAnswer::No);
        let mid = Rat::new(BigInt::from(5), BigInt::one());
        assert_eq!(gap_decide(&mid, &one, &gamma_pow), GapAnswer::Inconclusive);
        // exactly gamma*C is still not NO (strict inequality there)
        let edge = Rat::new(BigInt::from(8), BigInt::one());
        assert_eq!(gap_decide(&edge, &one, &gamma_pow), GapAnswer::Inconclusive);
    }

    #[test]
    fn plain_instance_norm_is_plain_lp() {
        let basis = KernelBasis::identity(4);
        let inst = ScaledKernelInstance::plain(3, Rat::one(), basis).unwrap();
        let v = vec![
            BigInt::from(1),
            BigInt::from(-2),
            BigInt::from(0),
            BigInt::from(3),
        ];
        // 1 + 8 + 0 + 27
        assert_eq!(
            inst.norm_pow(&v).unwrap(),
            Rat::from_integer(BigInt::from(36))
        );
    }

    #[test]
    fn p_must_exceed_two() {
        let basis = KernelBasis::identity(2);
        assert!(matches!(
            ScaledKernelInstance::plain(2, Rat::one(), basis),
            Err(Error::BadNormIndex(2))
        ));
    }
}
