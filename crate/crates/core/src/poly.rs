//! Multivariate polynomial algebra over tower fields: evaluation, degree
//! tracking, low-degree extension, plane restriction, the power-map
//! embedding, field extension and its reversal, exact Schwartz–Zippel
//! measurement, and the stable enumeration of plane-function families.

use crate::ff::{FieldElem, Tower};
use crate::geometry::AffinePlane;
use crate::{Error, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Deterministic ordinal of a function inside a plane family.
pub type FnIndex = BigUint;

/// Formal multivariate polynomial; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPoly {
    arity: usize,
    level: usize,
    terms: BTreeMap<Vec<u32>, FieldElem>,
}

impl std::fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Poly[t={},lv={}]{{", self.arity, self.level)?;
        for (e, c) in &self.terms {
            write!(f, " {c:?}*x^{e:?}")?;
        }
        write!(f, " }}")
    }
}

impl MultiPoly {
    pub fn zero(arity: usize, level: usize) -> Self {
        MultiPoly {
            arity,
            level,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: FieldElem) -> Self {
        let mut p = MultiPoly::zero(arity, c.level());
        if !c.is_zero() {
            p.terms.insert(vec![0; arity], c);
        }
        p
    }

    pub fn monomial(arity: usize, exps: Vec<u32>, c: FieldElem) -> Self {
        assert_eq!(exps.len(), arity);
        let mut p = MultiPoly::zero(arity, c.level());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The coordinate polynomial `x_i`.
    pub fn var(tower: &Tower, arity: usize, level: usize, i: usize) -> Self {
        let mut exps = vec![0u32; arity];
        exps[i] = 1;
        Self::monomial(arity, exps, tower.one(level))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, FieldElem> {
        &self.terms
    }

    /// Terms sorted graded-lexicographically (degree first, then the
    /// exponent vector), the canonical serialization order.
    pub fn terms_graded_lex(&self) -> Vec<(Vec<u32>, FieldElem)> {
        let mut v: Vec<_> = self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        v.sort_by(|a, b| cmp_graded_lex(&a.0, &b.0));
        v
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn individual_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, tower: &Tower, other: &Self) -> Result<Self> {
        self.compat(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.remove(e) {
                None => {
                    terms.insert(e.clone(), c.clone());
                }
                Some(prev) => {
                    let s = tower.add(&prev, c)?;
                    if !s.is_zero() {
                        terms.insert(e.clone(), s);
                    }
                }
            }
        }
        Ok(MultiPoly {
            arity: self.arity,
            level: self.level,
            terms,
        })
    }

    pub fn sub(&self, tower: &Tower, other: &Self) -> Result<Self> {
        self.add(tower, &other.neg(tower))
    }

    pub fn neg(&self, tower: &Tower) -> Self {
        MultiPoly {
            arity: self.arity,
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), tower.neg(c)))
                .collect(),
        }
    }

    pub fn scale(&self, tower: &Tower, s: &FieldElem) -> Result<Self> {
        if s.is_zero() {
            return Ok(MultiPoly::zero(self.arity, self.level));
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let sc = tower.mul(c, s)?;
            if !sc.is_zero() {
                terms.insert(e.clone(), sc);
            }
        }
        Ok(MultiPoly {
            arity: self.arity,
            level: self.level,
            terms,
        })
    }

    pub fn mul(&self, tower: &Tower, other: &Self) -> Result<Self> {
        self.compat(other)?;
        let mut acc: BTreeMap<Vec<u32>, FieldElem> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = tower.mul(ca, cb)?;
                match acc.remove(&e) {
                    None => {
                        if !c.is_zero() {
                            acc.insert(e, c);
                        }
                    }
                    Some(prev) => {
                        let s = tower.add(&prev, &c)?;
                        if !s.is_zero() {
                            acc.insert(e, s);
                        }
                    }
                }
            }
        }
        Ok(MultiPoly {
            arity: self.arity,
            level: self.level,
            terms: acc,
        })
    }

    /// Reinterprets the polynomial over a wider variable set; the new
    /// trailing variables do not occur.
    pub fn pad_arity(&self, arity: usize) -> MultiPoly {
        assert!(arity >= self.arity);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut ne = e.clone();
                ne.resize(arity, 0);
                (ne, c.clone())
            })
            .collect();
        MultiPoly {
            arity,
            level: self.level,
            terms,
        }
    }

    pub fn eval(&self, tower: &Tower, x: &[FieldElem]) -> Result<FieldElem> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        for xi in x {
            if xi.level() != self.level {
                return Err(Error::LevelMismatch(self.level, xi.level()));
            }
        }
        // per-variable power tables up to the max exponent present
        let mut max_e = vec![0u32; self.arity];
        for e in self.terms.keys() {
            for (m, &ei) in max_e.iter_mut().zip(e) {
                *m = (*m).max(ei);
            }
        }
        let pow_tables: Vec<Vec<FieldElem>> = x
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let mut tbl = Vec::with_capacity(max_e[i] as usize + 1);
                tbl.push(tower.one(self.level));
                for k in 1..=max_e[i] as usize {
                    let nxt = tower.mul(&tbl[k - 1], xi).expect("level");
                    tbl.push(nxt);
                }
                tbl
            })
            .collect();
        let mut acc = tower.zero(self.level);
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = tower.mul(&term, &pow_tables[i][ei as usize])?;
                }
            }
            acc = tower.add(&acc, &term)?;
        }
        Ok(acc)
    }

    fn compat(&self, other: &Self) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }
}

fn cmp_graded_lex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Polynomial on an affine plane, expressed in the plane's canonical
/// `(u, v)` parameterization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanePoly {
    pub plane: AffinePlane,
    pub inner: MultiPoly,
}

impl PlanePoly {
    /// Evaluates at an ambient point, which must lie on the plane.
    pub fn eval_at_point(&self, tower: &Tower, x: &[FieldElem]) -> Result<FieldElem> {
        let (u, v) = self
            .plane
            .coords_of(tower, x)
            .ok_or(Error::BadParams("point not on plane".into()))?;
        self.inner.eval(tower, &[u, v])
    }
}

/// Unique low-degree extension of a total table on the grid `H^t`:
/// agrees with the table on `H^t` and has individual degree < |H|.
///
/// The table is keyed by H-index vectors (position of each coordinate in
/// `h`).
pub fn lde(
    tower: &Tower,
    level: usize,
    t: usize,
    h: &[FieldElem],
    table: &BTreeMap<Vec<usize>, FieldElem>,
) -> Result<MultiPoly> {
    let hsize = h.len();
    if hsize == 0 {
        return Err(Error::EmptySubset);
    }
    // totality check
    let expected = (hsize as u64).checked_pow(t as u32).ok_or(Error::CapExceeded {
        what: "interpolation grid",
        value: format!("{hsize}^{t}"),
        cap: u64::MAX.to_string(),
    })?;
    if table.len() as u64 != expected
        || !table
            .keys()
            .all(|k| k.len() == t && k.iter().all(|&i| i < hsize))
    {
        return Err(Error::TableNotTotal);
    }
    // univariate Lagrange basis polynomials over H, as coefficient vectors
    let basis = lagrange_basis(tower, level, h)?;
    let mut acc = MultiPoly::zero(t, level);
    for (key, value) in table {
        if value.is_zero() {
            continue;
        }
        // tensor product of the per-axis basis polynomials, scaled by value
        let mut partial: Vec<(Vec<u32>, FieldElem)> = vec![(vec![], value.clone())];
        for &j in key {
            let mut next = Vec::with_capacity(partial.len() * hsize);
            for (exps, coeff) in &partial {
                for (e, b) in basis[j].iter().enumerate() {
                    if b.is_zero() {
                        continue;
                    }
                    let mut ne = exps.clone();
                    ne.push(e as u32);
                    next.push((ne, tower.mul(coeff, b)?));
                }
            }
            partial = next;
        }
        for (exps, coeff) in partial {
            let term = MultiPoly::monomial(t, exps, coeff);
            acc = acc.add(tower, &term)?;
        }
    }
    Ok(acc)
}

fn lagrange_basis(tower: &Tower, level: usize, h: &[FieldElem]) -> Result<Vec<Vec<FieldElem>>> {
    let n = h.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        // numerator: prod_{k != j} (x - h_k), denominator: prod (h_j - h_k)
        let mut num = vec![tower.one(level)];
        let mut den = tower.one(level);
        for (k, hk) in h.iter().enumerate() {
            if k == j {
                continue;
            }
            let mut next = vec![tower.zero(level); num.len() + 1];
            for (d, c) in num.iter().enumerate() {
                next[d + 1] = tower.add(&next[d + 1], c)?;
                let s = tower.mul(c, hk)?;
                next[d] = tower.sub(&next[d], &s)?;
            }
            num = next;
            den = tower.mul(&den, &tower.sub(&h[j], hk)?)?;
        }
        let dinv = tower.inv(&den)?;
        for c in num.iter_mut() {
            *c = tower.mul(c, &dinv)?;
        }
        out.push(num);
    }
    Ok(out)
}

/// Restriction of `f` to the plane `P`, in canonical plane coordinates.
/// Total degree never grows; on axis-parallel planes neither does the
/// individual degree.
pub fn restrict_to_plane(tower: &Tower, f: &MultiPoly, plane: &AffinePlane) -> Result<PlanePoly> {
    if f.arity() != plane.arity() {
        return Err(Error::ArityMismatch {
            expected: plane.arity(),
            got: f.arity(),
        });
    }
    if f.level() != plane.level() {
        return Err(Error::LevelMismatch(plane.level(), f.level()));
    }
    let level = f.level();
    // x_i = base_i + u*d1_i + v*d2_i as a bivariate polynomial
    let coords: Vec<MultiPoly> = (0..plane.arity())
        .map(|i| {
            let mut p = MultiPoly::constant(2, plane.base()[i].clone());
            p = p
                .add(
                    tower,
                    &MultiPoly::monomial(2, vec![1, 0], plane.dir1()[i].clone()),
                )
                .expect("level");
            p.add(
                tower,
                &MultiPoly::monomial(2, vec![0, 1], plane.dir2()[i].clone()),
            )
            .expect("level")
        })
        .collect();
    // memoized powers of each coordinate polynomial
    let mut pow_memo: Vec<Vec<MultiPoly>> = coords
        .iter()
        .map(|c| vec![MultiPoly::constant(2, tower.one(level)), c.clone()])
        .collect();
    let mut acc = MultiPoly::zero(2, level);
    for (exps, coeff) in f.terms() {
        let mut term = MultiPoly::constant(2, coeff.clone());
        for (i, &e) in exps.iter().enumerate() {
            while pow_memo[i].len() <= e as usize {
                let last = pow_memo[i].last().unwrap().clone();
                pow_memo[i].push(last.mul(tower, &coords[i])?);
            }
            if e > 0 {
                term = term.mul(tower, &pow_memo[i][e as usize])?;
            }
        }
        acc = acc.add(tower, &term)?;
    }
    Ok(PlanePoly {
        plane: plane.clone(),
        inner: acc,
    })
}

/// Power-map embedding of a point: each coordinate `ξ` becomes
/// `(ξ, ξ^c, …, ξ^{c^{i-1}})`, grouped by source coordinate.
pub fn embed_point(tower: &Tower, x: &[FieldElem], c: u64, i: usize) -> Vec<FieldElem> {
    let mut out = Vec::with_capacity(x.len() * i);
    for xi in x {
        let mut cur = xi.clone();
        for m in 0..i {
            out.push(cur.clone());
            if m + 1 < i {
                cur = tower.pow_u64(&cur, c);
            }
        }
    }
    out
}

/// The monomial bijection behind the embedding: a polynomial with
/// `ideg < c^i` over `k` variables becomes one with `ideg < c` over
/// `i*k` variables, with `f(x) = g(embed_point(x))` everywhere.
pub fn embed_poly(f: &MultiPoly, c: u64, i: usize) -> Result<MultiPoly> {
    if c < 2 || i < 1 {
        return Err(Error::BadParams(format!("embedding needs c >= 2, i >= 1, got c={c}, i={i}")));
    }
    let cap = (c as u128).checked_pow(i as u32).ok_or(Error::BadParams(
        "embedding power overflow".into(),
    ))?;
    if (f.individual_degree() as u128) >= cap {
        return Err(Error::DegreeBound {
            bound: cap.saturating_sub(1) as u64,
            got: f.individual_degree() as u64,
        });
    }
    let mut terms = BTreeMap::new();
    for (exps, coeff) in f.terms() {
        let mut ne = vec![0u32; f.arity() * i];
        for (j, &e) in exps.iter().enumerate() {
            // base-c digits of the exponent, least significant first
            let mut rem = e as u64;
            for m in 0..i {
                ne[j * i + m] = (rem % c) as u32;
                rem /= c;
            }
            debug_assert_eq!(rem, 0);
        }
        terms.insert(ne, coeff.clone());
    }
    Ok(MultiPoly {
        arity: f.arity() * i,
        level: f.level(),
        terms,
    })
}

/// Views a polynomial over the next tower level by lifting every
/// coefficient. Degrees are unchanged and values agree on the subgrid.
pub fn extend_field(tower: &Tower, f: &MultiPoly) -> Result<MultiPoly> {
    let mut terms = BTreeMap::new();
    for (e, c) in f.terms() {
        terms.insert(e.clone(), tower.lift(c)?);
    }
    Ok(MultiPoly {
        arity: f.arity(),
        level: f.level() + 1,
        terms,
    })
}

/// Reverses [`extend_field`]: succeeds iff every coefficient lies in the
/// subfield.
pub fn try_descend_poly(tower: &Tower, f: &MultiPoly) -> Option<MultiPoly> {
    let mut terms = BTreeMap::new();
    for (e, c) in f.terms() {
        terms.insert(e.clone(), tower.try_descend(c)?);
    }
    Some(MultiPoly {
        arity: f.arity(),
        level: f.level() - 1,
        terms,
    })
}

/// Exact agreement fraction `|{x in S^t : f(x) = g(x)}| / |S|^t`,
/// computed exhaustively.
pub fn sz_fraction(tower: &Tower, f: &MultiPoly, g: &MultiPoly, s: &[FieldElem]) -> Result<Rat> {
    if s.is_empty() {
        return Err(Error::EmptySubset);
    }
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            got: g.arity(),
        });
    }
    if f.level() != g.level() {
        return Err(Error::LevelMismatch(f.level(), g.level()));
    }
    let t = f.arity();
    let mut idx = vec![0usize; t];
    let mut agree: u64 = 0;
    let mut total: u64 = 0;
    loop {
        let point: Vec<FieldElem> = idx.iter().map(|&i| s[i].clone()).collect();
        if f.eval(tower, &point)? == g.eval(tower, &point)? {
            agree += 1;
        }
        total += 1;
        // odometer
        let mut k = 0;
        loop {
            if k == t {
                return Ok(Rat::new(BigInt::from(agree), BigInt::from(total)));
            }
            idx[k] += 1;
            if idx[k] < s.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Sampled agreement fraction over `S^t` for fields too large to walk
/// exhaustively. An approximation, never a proof; reports must label it
/// as such.
pub fn sz_fraction_sampled(
    tower: &Tower,
    f: &MultiPoly,
    g: &MultiPoly,
    s: &[FieldElem],
    samples: u64,
    seed: u64,
) -> Result<Rat> {
    if s.is_empty() || samples == 0 {
        return Err(Error::EmptySubset);
    }
    let t = f.arity();
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let mut agree = 0u64;
    for _ in 0..samples {
        let point: Vec<FieldElem> = (0..t)
            .map(|_| s[(next() % s.len() as u64) as usize].clone())
            .collect();
        if f.eval(tower, &point)? == g.eval(tower, &point)? {
            agree += 1;
        }
    }
    Ok(Rat::new(BigInt::from(agree), BigInt::from(samples)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeKind {
    Total,
    Individual,
}

/// Deterministic enumeration of the functions on a plane with bounded
/// degree: monomials in graded-lex order form coefficient slots, and a
/// function's index reads those coefficients as big-endian digits in
/// base |F|.
///
/// Requires `bound < |F|`, which makes polynomial and function
/// representations coincide on the family.
#[derive(Clone, Debug)]
pub struct PlaneFamily {
    level: usize,
    kind: DegreeKind,
    bound: u32,
    monomials: Vec<(u32, u32)>,
    field_size: BigUint,
    field_size_u64: Option<u64>,
}

impl PlaneFamily {
    pub fn new(tower: &Tower, level: usize, kind: DegreeKind, bound: u32) -> Result<Self> {
        let field_size = tower.size(level);
        if BigUint::from(bound) >= field_size {
            return Err(Error::BadParams(format!(
                "family degree bound {bound} must be below the field size {field_size}"
            )));
        }
        let mut monomials = Vec::new();
        for eu in 0..=bound {
            for ev in 0..=bound {
                let ok = match kind {
                    DegreeKind::Total => eu + ev <= bound,
                    DegreeKind::Individual => true,
                };
                if ok {
                    monomials.push((eu, ev));
                }
            }
        }
        monomials.sort_by(|a, b| cmp_graded_lex(&[a.0, a.1], &[b.0, b.1]));
        Ok(PlaneFamily {
            level,
            kind,
            bound,
            monomials,
            field_size_u64: tower.size_u64(level),
            field_size,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn kind(&self) -> DegreeKind {
        self.kind
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Coefficient slots in index order.
    pub fn monomials(&self) -> &[(u32, u32)] {
        &self.monomials
    }

    pub fn count(&self) -> BigUint {
        self.field_size.pow(self.monomials.len() as u32)
    }

    /// Family size as a `u64`, when it fits.
    pub fn count_u64(&self) -> Option<u64> {
        let fs = self.field_size_u64?;
        let mut acc: u64 = 1;
        for _ in 0..self.monomials.len() {
            acc = acc.checked_mul(fs)?;
        }
        Some(acc)
    }

    /// `|F|` at the family's level, when it fits in a `u64`.
    pub fn field_size_u64(&self) -> Option<u64> {
        self.field_size_u64
    }

    fn admits(&self, eu: u32, ev: u32) -> bool {
        match self.kind {
            DegreeKind::Total => eu + ev <= self.bound,
            DegreeKind::Individual => eu.max(ev) <= self.bound,
        }
    }

    /// Index of a bivariate polynomial within the family.
    pub fn index_of(&self, tower: &Tower, inner: &MultiPoly) -> Result<FnIndex> {
        if inner.arity() != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                got: inner.arity(),
            });
        }
        if inner.level() != self.level {
            return Err(Error::LevelMismatch(self.level, inner.level()));
        }
        for e in inner.terms().keys() {
            if !self.admits(e[0], e[1]) {
                return Err(Error::NotInFamily);
            }
        }
        let mut acc = BigUint::zero();
        for &(eu, ev) in &self.monomials {
            let digit = match inner.terms().get(&vec![eu, ev]) {
                Some(c) => tower.elem_index(c).ok_or(Error::CapExceeded {
                    what: "coefficient index",
                    value: "overflow".into(),
                    cap: u64::MAX.to_string(),
                })?,
                None => 0,
            };
            acc = acc * &self.field_size + BigUint::from(digit);
        }
        Ok(acc)
    }

    /// Inverse of [`PlaneFamily::index_of`].
    pub fn poly_at(&self, tower: &Tower, index: &FnIndex) -> Result<MultiPoly> {
        if *index >= self.count() {
            return Err(Error::NotInFamily);
        }
        let mut digits = Vec::with_capacity(self.monomials.len());
        let mut rem = index.clone();
        for _ in 0..self.monomials.len() {
            let (q, r) = rem.div_rem(&self.field_size);
            digits.push(r.to_u64().expect("digit below field size"));
            rem = q;
        }
        digits.reverse();
        let mut terms = BTreeMap::new();
        for (&(eu, ev), &d) in self.monomials.iter().zip(&digits) {
            if d != 0 {
                terms.insert(vec![eu, ev], tower.elem_from_index(self.level, d));
            }
        }
        Ok(MultiPoly {
            arity: 2,
            level: self.level,
            terms,
        })
    }

    /// Streams `(index, polynomial)` pairs for the index range
    /// `[from, to)`, without materializing the family.
    pub fn stream_range<'a>(
        &'a self,
        tower: &'a Tower,
        from: u64,
        to: u64,
    ) -> impl Iterator<Item = (FnIndex, MultiPoly)> + 'a {
        (from..to).map(move |k| {
            let idx = BigUint::from(k);
            let p = self.poly_at(tower, &idx).expect("index in range");
            (idx, p)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, enumerate_planes, parallel_planes};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_poly(
        rng: &mut StdRng,
        tower: &Tower,
        level: usize,
        arity: usize,
        ideg: u32,
        nterms: usize,
    ) -> MultiPoly {
        let size = tower.size_u64(level).unwrap();
        let mut p = MultiPoly::zero(arity, level);
        for _ in 0..nterms {
            let exps: Vec<u32> = (0..arity).map(|_| rng.gen_range(0..=ideg)).collect();
            let c = tower.elem_from_index(level, rng.gen_range(0..size));
            p = p.add(tower, &MultiPoly::monomial(arity, exps, c)).unwrap();
        }
        p
    }

    fn all_points(tower: &Tower, level: usize, t: usize) -> Vec<Vec<FieldElem>> {
        let mut out = vec![vec![]];
        for _ in 0..t {
            let mut next = Vec::new();
            for p in &out {
                for e in tower.enumerate(level).unwrap() {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    // independent oracle: evaluate term by term with repeated
    // multiplication, no power tables
    fn naive_eval(tower: &Tower, f: &MultiPoly, x: &[FieldElem]) -> FieldElem {
        let mut acc = tower.zero(f.level());
        for (e, c) in f.terms() {
            let mut term = c.clone();
            for (i, &ei) in e.iter().enumerate() {
                for _ in 0..ei {
                    term = tower.mul(&term, &x[i]).unwrap();
                }
            }
            acc = tower.add(&acc, &term).unwrap();
        }
        acc
    }

    #[test]
    fn eval_basic_and_against_naive_oracle() {
        let t5 = Tower::new(5, 0).unwrap();
        let x1x2 = MultiPoly::monomial(2, vec![1, 1], t5.one(0));
        let t3 = Tower::new(3, 0).unwrap();
        let x1x2_f3 = MultiPoly::monomial(2, vec![1, 1], t3.one(0));
        let two = t3.from_base(0, 2);
        assert_eq!(
            x1x2_f3.eval(&t3, &[two.clone(), two]).unwrap(),
            t3.one(0)
        );
        let z = MultiPoly::zero(2, 0);
        assert!(z.eval(&t5, &[t5.one(0), t5.one(0)]).unwrap().is_zero());
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let f = rand_poly(&mut rng, &t5, 0, 2, 4, 5);
            let x: Vec<FieldElem> = (0..2)
                .map(|_| t5.elem_from_index(0, rng.gen_range(0..5)))
                .collect();
            assert_eq!(f.eval(&t5, &x).unwrap(), naive_eval(&t5, &f, &x));
        }
        assert!(x1x2.eval(&t5, &[t5.one(0)]).is_err());
    }

    #[test]
    fn lde_through_two_points_is_x() {
        let t5 = Tower::new(5, 0).unwrap();
        let h = vec![t5.from_base(0, 0), t5.from_base(0, 1)];
        let mut table = BTreeMap::new();
        table.insert(vec![0], t5.from_base(0, 0));
        table.insert(vec![1], t5.from_base(0, 1));
        let f = lde(&t5, 0, 1, &h, &table).unwrap();
        assert_eq!(f, MultiPoly::monomial(1, vec![1], t5.one(0)));
    }

    #[test]
    fn lde_constant_table() {
        let t5 = Tower::new(5, 0).unwrap();
        let h = vec![t5.from_base(0, 0), t5.from_base(0, 1), t5.from_base(0, 2)];
        let c = t5.from_base(0, 3);
        let mut table = BTreeMap::new();
        for i in 0..3 {
            for j in 0..3 {
                table.insert(vec![i, j], c.clone());
            }
        }
        let f = lde(&t5, 0, 2, &h, &table).unwrap();
        assert_eq!(f, MultiPoly::constant(2, c));
        assert_eq!(f.individual_degree(), 0);
    }

    #[test]
    fn lde_agrees_and_is_unique_on_f3_grid() {
        let t3 = Tower::new(3, 0).unwrap();
        let h: Vec<FieldElem> = t3.enumerate(0).unwrap().collect();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let mut table = BTreeMap::new();
            for i in 0..3usize {
                for j in 0..3usize {
                    table.insert(vec![i, j], t3.elem_from_index(0, rng.gen_range(0..3)));
                }
            }
            let f = lde(&t3, 0, 2, &h, &table).unwrap();
            assert!(f.individual_degree() <= 2);
            for (key, want) in &table {
                let x: Vec<FieldElem> = key.iter().map(|&i| h[i].clone()).collect();
                assert_eq!(&f.eval(&t3, &x).unwrap(), want);
            }
            // independent second route: iterated univariate interpolation
            // along axis 0 then axis 1, and in the reverse order
            let via_01 = iterated_lde(&t3, &h, &table, [0, 1]);
            let via_10 = iterated_lde(&t3, &h, &table, [1, 0]);
            assert_eq!(f, via_01);
            assert_eq!(f, via_10);
        }
        // partial table is rejected
        let mut partial = BTreeMap::new();
        partial.insert(vec![0usize, 0usize], t3.one(0));
        assert!(matches!(
            lde(&t3, 0, 2, &h, &partial),
            Err(Error::TableNotTotal)
        ));
    }

    // test-only oracle: interpolate one axis at a time
    fn iterated_lde(
        tower: &Tower,
        h: &[FieldElem],
        table: &BTreeMap<Vec<usize>, FieldElem>,
        order: [usize; 2],
    ) -> MultiPoly {
        // univariate interpolation returning coefficients
        let interp1 = |vals: &[FieldElem]| -> Vec<FieldElem> {
            let basis = lagrange_basis(tower, 0, h).unwrap();
            let mut coeffs = vec![tower.zero(0); h.len()];
            for (j, v) in vals.iter().enumerate() {
                for (d, b) in basis[j].iter().enumerate() {
                    let s = tower.mul(v, b).unwrap();
                    coeffs[d] = tower.add(&coeffs[d], &s).unwrap();
                }
            }
            coeffs
        };
        // interpolate along order[0] for each fixed other index, then
        // interpolate the resulting coefficients along order[1]
        let n = h.len();
        let mut poly = MultiPoly::zero(2, 0);
        let mut coeff_rows: Vec<Vec<FieldElem>> = Vec::new();
        for fixed in 0..n {
            let vals: Vec<FieldElem> = (0..n)
                .map(|moving| {
                    let mut key = vec![0usize; 2];
                    key[order[0]] = moving;
                    key[order[1]] = fixed;
                    table[&key].clone()
                })
                .collect();
            coeff_rows.push(interp1(&vals));
        }
        for d0 in 0..n {
            let col: Vec<FieldElem> = coeff_rows.iter().map(|r| r[d0].clone()).collect();
            let c2 = interp1(&col);
            for (d1, c) in c2.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut exps = vec![0u32; 2];
                exps[order[0]] = d0 as u32;
                exps[order[1]] = d1 as u32;
                poly = poly
                    .add(tower, &MultiPoly::monomial(2, exps, c.clone()))
                    .unwrap();
            }
        }
        poly
    }

    #[test]
    fn restriction_axis_parallel_example() {
        let t5 = Tower::new(5, 0).unwrap();
        // f = x1*x2*x3 restricted to the plane x3 = 2
        let f = MultiPoly::monomial(3, vec![1, 1, 1], t5.one(0));
        let par = parallel_planes(&t5, 0, 3).unwrap();
        let plane = par
            .iter()
            .find(|p| {
                p.pivots() == (0, 1) && p.base()[2].prime_value() == Some(2)
            })
            .unwrap();
        let r = restrict_to_plane(&t5, &f, plane).unwrap();
        // 2*u*v
        let expect = MultiPoly::monomial(2, vec![1, 1], t5.from_base(0, 2));
        assert_eq!(r.inner, expect);
        assert_eq!(r.inner.individual_degree(), 1);
        // constants restrict to themselves
        let c = MultiPoly::constant(3, t5.from_base(0, 4));
        assert_eq!(
            restrict_to_plane(&t5, &c, plane).unwrap().inner,
            MultiPoly::constant(2, t5.from_base(0, 4))
        );
    }

    #[test]
    fn restriction_agrees_pointwise_on_random_pairs() {
        let t3 = Tower::new(3, 0).unwrap();
        let planes = enumerate_planes(&t3, 0, 3, 1000).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let f = rand_poly(&mut rng, &t3, 0, 3, 2, 6);
            let plane = &planes[rng.gen_range(0..planes.len())];
            let r = restrict_to_plane(&t3, &f, plane).unwrap();
            assert!(r.inner.total_degree() <= f.total_degree());
            if plane.is_axis_parallel() {
                assert!(r.inner.individual_degree() <= f.individual_degree());
            }
            for u in t3.enumerate(0).unwrap() {
                for v in t3.enumerate(0).unwrap() {
                    let x = plane.point_at(&t3, &u, &v);
                    assert_eq!(
                        f.eval(&t3, &x).unwrap(),
                        r.inner.eval(&t3, &[u.clone(), v.clone()]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn embed_point_examples() {
        let t5 = Tower::new(5, 0).unwrap();
        let three = t5.from_base(0, 3);
        let e = embed_point(&t5, &[three.clone()], 2, 2);
        assert_eq!(e, vec![three.clone(), t5.from_base(0, 4)]);
        // i = 1 is the identity
        assert_eq!(embed_point(&t5, &[three.clone()], 2, 1), vec![three]);
        let zero_one = vec![t5.from_base(0, 0), t5.from_base(0, 1)];
        let e = embed_point(&t5, &zero_one, 2, 3);
        let vals: Vec<Option<u64>> = e.iter().map(|x| x.prime_value()).collect();
        assert_eq!(
            vals,
            vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]
        );
    }

    #[test]
    fn embed_poly_monomial_digit_expansion() {
        let t5 = Tower::new(5, 0).unwrap();
        // x^3 with c=2, i=2: 3 = 1 + 1*2, so x_{0}^1 * x_{1}^1
        let f = MultiPoly::monomial(1, vec![3], t5.one(0));
        let g = embed_poly(&f, 2, 2).unwrap();
        assert_eq!(g, MultiPoly::monomial(2, vec![1, 1], t5.one(0)));
        // constants map to constants
        let c = MultiPoly::constant(1, t5.from_base(0, 4));
        assert_eq!(
            embed_poly(&c, 2, 2).unwrap(),
            MultiPoly::constant(2, t5.from_base(0, 4))
        );
        // degree precondition
        let too_big = MultiPoly::monomial(1, vec![4], t5.one(0));
        assert!(embed_poly(&too_big, 2, 2).is_err());
    }

    #[test]
    fn embedding_identity_exhaustive() {
        let t5 = Tower::new(5, 0).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for arity in [1usize, 2] {
            for _ in 0..25 {
                let f = rand_poly(&mut rng, &t5, 0, arity, 3, 4);
                let g = embed_poly(&f, 2, 2).unwrap();
                assert!(g.individual_degree() < 2);
                for x in all_points(&t5, 0, arity) {
                    let ex = embed_point(&t5, &x, 2, 2);
                    assert_eq!(f.eval(&t5, &x).unwrap(), g.eval(&t5, &ex).unwrap());
                }
            }
        }
    }

    #[test]
    fn extend_and_descend_roundtrip() {
        let t = Tower::new(3, 1).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        assert!(extend_field(&t, &MultiPoly::zero(2, 0)).unwrap().is_zero());
        for _ in 0..100 {
            let f = rand_poly(&mut rng, &t, 0, 2, 2, 5);
            let ext = extend_field(&t, &f).unwrap();
            assert_eq!(ext.total_degree(), f.total_degree());
            assert_eq!(ext.individual_degree(), f.individual_degree());
            assert_eq!(try_descend_poly(&t, &ext), Some(f.clone()));
        }
        // eval commutes with lift on the whole subgrid
        for _ in 0..10 {
            let f = rand_poly(&mut rng, &t, 0, 2, 2, 5);
            let ext = extend_field(&t, &f).unwrap();
            for x in all_points(&t, 0, 2) {
                let lifted: Vec<FieldElem> = x.iter().map(|e| t.lift(e).unwrap()).collect();
                assert_eq!(
                    t.lift(&f.eval(&t, &x).unwrap()).unwrap(),
                    ext.eval(&t, &lifted).unwrap()
                );
            }
        }
    }

    #[test]
    fn non_descendable_poly_and_subfield_fraction() {
        let t = Tower::new(3, 1).unwrap();
        let alpha = t.from_coeffs(1, vec![0, 1]).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        for d in 1..=2u32 {
            for _ in 0..20 {
                // f = extend(g) + alpha * h with h != 0 of total degree <= d
                let g = rand_poly(&mut rng, &t, 0, 2, d, 4);
                let mut h = MultiPoly::zero(2, 0);
                while h.is_zero() || h.total_degree() > d {
                    h = rand_poly(&mut rng, &t, 0, 2, d, 2);
                }
                let f = extend_field(&t, &g)
                    .unwrap()
                    .add(
                        &t,
                        &extend_field(&t, &h).unwrap().scale(&t, &alpha).unwrap(),
                    )
                    .unwrap();
                if f.total_degree() > d {
                    continue;
                }
                assert!(try_descend_poly(&t, &f).is_none());
                // fraction of subgrid points with value in F_3 is <= d/3
                let mut in_subfield = 0u32;
                for x in all_points(&t, 0, 2) {
                    let lifted: Vec<FieldElem> = x.iter().map(|e| t.lift(e).unwrap()).collect();
                    if t.try_descend(&f.eval(&t, &lifted).unwrap()).is_some() {
                        in_subfield += 1;
                    }
                }
                assert!(
                    in_subfield * 3 <= d * 9,
                    "fraction {in_subfield}/9 exceeds {d}/3"
                );
            }
        }
    }

    #[test]
    fn sz_fraction_cases() {
        let t5 = Tower::new(5, 0).unwrap();
        let s: Vec<FieldElem> = t5.enumerate(0).unwrap().collect();
        let x = MultiPoly::monomial(1, vec![1], t5.one(0));
        assert_eq!(
            sz_fraction(&t5, &x, &x, &s).unwrap(),
            Rat::from_integer(BigInt::from(1))
        );
        let zero = MultiPoly::zero(1, 0);
        assert_eq!(
            sz_fraction(&t5, &x, &zero, &s).unwrap(),
            Rat::new(BigInt::from(1), BigInt::from(5))
        );
        assert!(sz_fraction(&t5, &x, &zero, &[]).is_err());
    }

    #[test]
    fn sz_bound_on_random_pairs_over_f7() {
        let t7 = Tower::new(7, 0).unwrap();
        let s: Vec<FieldElem> = t7.enumerate(0).unwrap().collect();
        let mut rng = StdRng::seed_from_u64(13);
        let bound = Rat::new(BigInt::from(2), BigInt::from(7));
        let mut checked = 0;
        while checked < 100 {
            let mut f = MultiPoly::zero(2, 0);
            let mut g = MultiPoly::zero(2, 0);
            while f.total_degree() > 2 || f.is_zero() {
                f = rand_poly(&mut rng, &t7, 0, 2, 2, 3);
            }
            while g.total_degree() > 2 || g == f {
                g = rand_poly(&mut rng, &t7, 0, 2, 2, 3);
            }
            let frac = sz_fraction(&t7, &f, &g, &s).unwrap();
            assert!(frac <= bound, "fraction {frac} above 2/7");
            checked += 1;
        }
    }

    #[test]
    fn family_counts_and_roundtrip() {
        let t3 = Tower::new(3, 0).unwrap();
        let fam = PlaneFamily::new(&t3, 0, DegreeKind::Total, 1).unwrap();
        assert_eq!(fam.count(), BigUint::from(27u32));
        let t5 = Tower::new(5, 0).unwrap();
        let fam5 = PlaneFamily::new(&t5, 0, DegreeKind::Total, 3).unwrap();
        assert_eq!(fam5.count(), BigUint::from(5u64).pow(10));
        // bound must stay below the field size
        assert!(PlaneFamily::new(&t3, 0, DegreeKind::Total, 3).is_err());
        // bijection roundtrip on 1000 sampled indices
        let mut rng = StdRng::seed_from_u64(17);
        let n = fam5.count();
        for _ in 0..1000 {
            let k = BigUint::from(rng.gen_range(0..u64::MAX)) % &n;
            let p = fam5.poly_at(&t5, &k).unwrap();
            assert_eq!(fam5.index_of(&t5, &p).unwrap(), k);
        }
        // enumeration order is stable: index 0 is the zero polynomial,
        // index 1 has the graded-lex-largest monomial as its last digit
        let p0 = fam.poly_at(&t3, &BigUint::zero()).unwrap();
        assert!(p0.is_zero());
    }

    #[test]
    fn family_functions_are_distinct_as_functions() {
        // bound < |F| makes representation <-> function bijective
        let t3 = Tower::new(3, 0).unwrap();
        let fam = PlaneFamily::new(&t3, 0, DegreeKind::Total, 1).unwrap();
        let base = vec![t3.zero(0), t3.zero(0), t3.zero(0)];
        let d1 = vec![t3.one(0), t3.zero(0), t3.zero(0)];
        let d2 = vec![t3.zero(0), t3.one(0), t3.zero(0)];
        let plane = canonicalize(&t3, &base, &d1, &d2).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..27u64 {
            let p = fam.poly_at(&t3, &BigUint::from(k)).unwrap();
            let values: Vec<FieldElem> = plane
                .points(&t3)
                .iter()
                .map(|x| {
                    PlanePoly {
                        plane: plane.clone(),
                        inner: p.clone(),
                    }
                    .eval_at_point(&t3, x)
                    .unwrap()
                })
                .collect();
            assert!(seen.insert(values), "two family members agree everywhere");
        }
    }
}
