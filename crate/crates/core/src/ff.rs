//! Exact arithmetic for a prime field `F_q` and its chain of quadratic
//! extensions `F_{q^{2^k}}`.
//!
//! Elements are flattened coefficient vectors over the prime field
//! (length `2^level`), so that the level-`k` subfield of level `k+1` is
//! exactly the prefix with a zero upper half. Each extension step stores
//! a monic quadratic `x^2 + b*x + c` over the previous level, chosen as
//! the lexicographically smallest irreducible one so that towers are
//! reproducible across runs and machines.

use crate::{Error, Result};
use num_bigint::BigUint;

/// Element of some level of a [`Tower`]. Coefficients are reduced mod `q`
/// and the vector length is `2^level`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    level: usize,
    coeffs: Vec<u64>,
}

impl std::fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F[{}]{:?}", self.level, self.coeffs)
    }
}

impl FieldElem {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// If this element lies in the prime subfield, returns its value.
    pub fn prime_value(&self) -> Option<u64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }
}

/// Prime field plus a chain of quadratic extensions.
#[derive(Clone, Debug)]
pub struct Tower {
    q: u64,
    levels: usize,
    /// `irreducibles[k] = (b, c)`: level k+1 is `F[k][x] / (x^2 + b x + c)`.
    irreducibles: Vec<(FieldElem, FieldElem)>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Tower {
    /// Builds the tower `F_q ⊂ F_{q^2} ⊂ … ⊂ F_{q^{2^levels}}`.
    ///
    /// Each quadratic is found by scanning coefficient pairs `(c, b)` in
    /// lexicographic order (constant term first) and keeping the first
    /// one with no root at the previous level.
    pub fn new(q: u64, levels: usize) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let mut tower = Tower {
            q,
            levels: 0,
            irreducibles: Vec::new(),
        };
        for k in 0..levels {
            let quad = tower.smallest_irreducible(k)?;
            tower.irreducibles.push(quad);
            tower.levels = k + 1;
        }
        Ok(tower)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// The stored quadratics, as `(b, c)` pairs for `x^2 + b x + c`.
    pub fn irreducibles(&self) -> &[(FieldElem, FieldElem)] {
        &self.irreducibles
    }

    /// `|F| = q^(2^level)` as a big integer.
    pub fn size(&self, level: usize) -> BigUint {
        BigUint::from(self.q).pow(1u32 << level)
    }

    /// `|F|` when it fits in a `u64`.
    pub fn size_u64(&self, level: usize) -> Option<u64> {
        let mut acc: u64 = 1;
        for _ in 0..(1usize << level) {
            acc = acc.checked_mul(self.q)?;
        }
        Some(acc)
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.levels {
            Err(Error::LevelOutOfRange(level))
        } else {
            Ok(())
        }
    }

    fn coeff_len(level: usize) -> usize {
        1usize << level
    }

    pub fn zero(&self, level: usize) -> FieldElem {
        FieldElem {
            level,
            coeffs: vec![0; Self::coeff_len(level)],
        }
    }

    pub fn one(&self, level: usize) -> FieldElem {
        let mut e = self.zero(level);
        e.coeffs[0] = 1;
        e
    }

    /// Lift of the prime-field value `v` to the given level.
    pub fn from_base(&self, level: usize, v: u64) -> FieldElem {
        let mut e = self.zero(level);
        e.coeffs[0] = v % self.q;
        e
    }

    pub fn from_coeffs(&self, level: usize, coeffs: Vec<u64>) -> Result<FieldElem> {
        self.check_level(level)?;
        if coeffs.len() != Self::coeff_len(level) {
            return Err(Error::BadParams(format!(
                "coefficient vector has length {}, expected {}",
                coeffs.len(),
                Self::coeff_len(level)
            )));
        }
        Ok(FieldElem {
            level,
            coeffs: coeffs.into_iter().map(|c| c % self.q).collect(),
        })
    }

    fn match_levels(&self, a: &FieldElem, b: &FieldElem) -> Result<()> {
        if a.level != b.level {
            return Err(Error::LevelMismatch(a.level, b.level));
        }
        Ok(())
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.match_levels(a, b)?;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + y) % self.q)
            .collect();
        Ok(FieldElem {
            level: a.level,
            coeffs,
        })
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.match_levels(a, b)?;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + self.q - y) % self.q)
            .collect();
        Ok(FieldElem {
            level: a.level,
            coeffs,
        })
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem {
            level: a.level,
            coeffs: a.coeffs.iter().map(|&x| (self.q - x) % self.q).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.match_levels(a, b)?;
        let mut out = vec![0u64; a.coeffs.len()];
        self.mul_slices(a.level, &a.coeffs, &b.coeffs, &mut out);
        Ok(FieldElem {
            level: a.level,
            coeffs: out,
        })
    }

    pub fn mul_base(&self, a: &FieldElem, s: u64) -> FieldElem {
        let s = s % self.q;
        FieldElem {
            level: a.level,
            coeffs: a
                .coeffs
                .iter()
                .map(|&x| ((x as u128 * s as u128) % self.q as u128) as u64)
                .collect(),
        }
    }

    fn mulmod(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.q as u128) as u64
    }

    fn add_slices(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = (x + y) % self.q;
        }
    }

    fn sub_slices(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = (x + self.q - y) % self.q;
        }
    }

    // (a0 + a1 α)(b0 + b1 α) with α^2 = -bα - c:
    //   low  = a0 b0 - a1 b1 c
    //   high = a0 b1 + a1 b0 - a1 b1 b
    fn mul_slices(&self, level: usize, a: &[u64], b: &[u64], out: &mut [u64]) {
        if level == 0 {
            out[0] = self.mulmod(a[0], b[0]);
            return;
        }
        let h = a.len() / 2;
        let (a0, a1) = a.split_at(h);
        let (b0, b1) = b.split_at(h);
        let (bq, cq) = {
            let (bb, cc) = &self.irreducibles[level - 1];
            (bb.coeffs.clone(), cc.coeffs.clone())
        };
        let mut p00 = vec![0; h];
        let mut p01 = vec![0; h];
        let mut p10 = vec![0; h];
        let mut p11 = vec![0; h];
        self.mul_slices(level - 1, a0, b0, &mut p00);
        self.mul_slices(level - 1, a0, b1, &mut p01);
        self.mul_slices(level - 1, a1, b0, &mut p10);
        self.mul_slices(level - 1, a1, b1, &mut p11);
        let mut t = vec![0; h];
        self.mul_slices(level - 1, &p11, &cq, &mut t);
        let (lo, hi) = out.split_at_mut(h);
        self.sub_slices(&p00, &t, lo);
        self.mul_slices(level - 1, &p11, &bq, &mut t);
        let mut s = vec![0; h];
        self.add_slices(&p01, &p10, &mut s);
        self.sub_slices(&s, &t, hi);
    }

    /// Multiplicative inverse via the quadratic-extension norm, with
    /// extended Euclid at the prime level.
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        if a.level == 0 {
            return Ok(FieldElem {
                level: 0,
                coeffs: vec![inv_mod(a.coeffs[0], self.q)],
            });
        }
        let h = a.coeffs.len() / 2;
        let a0 = self.raw(a.level - 1, &a.coeffs[..h]);
        let a1 = self.raw(a.level - 1, &a.coeffs[h..]);
        let (b, c) = self.irreducibles[a.level - 1].clone();
        // norm(a0 + a1 α) = a0^2 - a0 a1 b + a1^2 c, an element one level down
        let norm = self.sub(
            &self.add(
                &self.mul(&a0, &a0)?,
                &self.mul(&self.mul(&a1, &a1)?, &c)?,
            )?,
            &self.mul(&self.mul(&a0, &a1)?, &b)?,
        )?;
        let ninv = self.inv(&norm)?;
        // conj(a) = (a0 - a1 b) - a1 α
        let lo = self.mul(&self.sub(&a0, &self.mul(&a1, &b)?)?, &ninv)?;
        let hi = self.mul(&self.neg(&a1), &ninv)?;
        let mut coeffs = lo.coeffs;
        coeffs.extend(hi.coeffs);
        Ok(FieldElem {
            level: a.level,
            coeffs,
        })
    }

    fn raw(&self, level: usize, coeffs: &[u64]) -> FieldElem {
        FieldElem {
            level,
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn pow(&self, a: &FieldElem, exp: &BigUint) -> FieldElem {
        let mut base = a.clone();
        let mut acc = self.one(a.level);
        let bits = exp.bits();
        for i in 0..bits {
            if exp.bit(i) {
                acc = self.mul(&acc, &base).expect("same level");
            }
            if i + 1 < bits {
                base = self.mul(&base, &base).expect("same level");
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &FieldElem, exp: u64) -> FieldElem {
        self.pow(a, &BigUint::from(exp))
    }

    /// Embeds a level-`k` element into level `k+1` (zero upper half).
    pub fn lift(&self, a: &FieldElem) -> Result<FieldElem> {
        self.check_level(a.level + 1)?;
        let mut coeffs = a.coeffs.clone();
        coeffs.resize(a.coeffs.len() * 2, 0);
        Ok(FieldElem {
            level: a.level + 1,
            coeffs,
        })
    }

    /// Lifts an element all the way to `target` level.
    pub fn lift_to(&self, a: &FieldElem, target: usize) -> Result<FieldElem> {
        let mut e = a.clone();
        while e.level < target {
            e = self.lift(&e)?;
        }
        if e.level != target {
            return Err(Error::LevelMismatch(a.level, target));
        }
        Ok(e)
    }

    /// Returns the level-`k` preimage iff `a` lies in the image of [`Tower::lift`].
    pub fn try_descend(&self, a: &FieldElem) -> Option<FieldElem> {
        if a.level == 0 {
            return None;
        }
        let h = a.coeffs.len() / 2;
        if a.coeffs[h..].iter().all(|&c| c == 0) {
            Some(FieldElem {
                level: a.level - 1,
                coeffs: a.coeffs[..h].to_vec(),
            })
        } else {
            None
        }
    }

    /// All elements of the level, in lexicographic order on the
    /// coefficient vector (first coefficient most significant).
    pub fn enumerate(&self, level: usize) -> Result<ElemIter<'_>> {
        self.check_level(level)?;
        Ok(ElemIter {
            tower: self,
            level,
            next: Some(vec![0; Self::coeff_len(level)]),
        })
    }

    /// Rank of `a` in the [`Tower::enumerate`] order; `None` on overflow.
    pub fn elem_index(&self, a: &FieldElem) -> Option<u64> {
        let mut acc: u64 = 0;
        for &c in &a.coeffs {
            acc = acc.checked_mul(self.q)?.checked_add(c)?;
        }
        Some(acc)
    }

    /// Inverse of [`Tower::elem_index`].
    pub fn elem_from_index(&self, level: usize, mut idx: u64) -> FieldElem {
        let len = Self::coeff_len(level);
        let mut coeffs = vec![0u64; len];
        for i in (0..len).rev() {
            coeffs[i] = idx % self.q;
            idx /= self.q;
        }
        FieldElem { level, coeffs }
    }

    fn smallest_irreducible(&self, level: usize) -> Result<(FieldElem, FieldElem)> {
        // x^2 + b x + c is irreducible over a field iff it has no root there.
        for c in self.enumerate(level)? {
            for b in self.enumerate(level)? {
                if self.quadratic_has_root(level, &b, &c)? {
                    continue;
                }
                return Ok((b, c));
            }
        }
        unreachable!("a monic irreducible quadratic exists over every finite field")
    }

    fn quadratic_has_root(&self, level: usize, b: &FieldElem, c: &FieldElem) -> Result<bool> {
        for x in self.enumerate(level)? {
            let v = self.add(&self.add(&self.mul(&x, &x)?, &self.mul(b, &x)?)?, c)?;
            if v.is_zero() {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // extended Euclid; q prime and a != 0 mod q
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let d = r0 / r1;
        (r0, r1) = (r1, r0 - d * r1);
        (t0, t1) = (t1, t0 - d * t1);
    }
    debug_assert_eq!(r0, 1);
    (t0.rem_euclid(q as i128)) as u64
}

pub struct ElemIter<'a> {
    tower: &'a Tower,
    level: usize,
    next: Option<Vec<u64>>,
}

impl Iterator for ElemIter<'_> {
    type Item = FieldElem;

    fn next(&mut self) -> Option<FieldElem> {
        let cur = self.next.take()?;
        let out = FieldElem {
            level: self.level,
            coeffs: cur.clone(),
        };
        // odometer with the last coefficient least significant
        let mut nxt = cur;
        for i in (0..nxt.len()).rev() {
            nxt[i] += 1;
            if nxt[i] < self.tower.q {
                self.next = Some(nxt);
                return Some(out);
            }
            nxt[i] = 0;
        }
        Some(out)
    }
}
