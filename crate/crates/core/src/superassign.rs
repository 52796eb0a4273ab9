//! Super-assignments over plane families: sparse integer tables indexed
//! by (plane, function), natural assignments of global polynomials, the
//! three constraint checkers, support statistics, and the exact
//! decomposition routine that recovers an assignment as an integer
//! combination of naturals.

use crate::ff::{FieldElem, Tower};
use crate::geometry::{intersect, AffinePlane, PlaneMeet, PlaneSpace};
use crate::poly::{restrict_to_plane, DegreeKind, FnIndex, MultiPoly, PlaneFamily};
use crate::{Error, Rat, Result};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

/// A plane collection with one shared function family per plane.
/// Planes are stored sorted in canonical order and deduplicated.
pub struct PlaneSet {
    tower: Tower,
    planes: Vec<AffinePlane>,
    family: PlaneFamily,
    covers_all_planes: bool,
}

impl PlaneSet {
    /// Set over the full plane family `PL(F^t)`.
    pub fn full(tower: &Tower, level: usize, t: usize, kind: DegreeKind, bound: u32) -> Result<Self> {
        let space = PlaneSpace::new(tower, level, t)?;
        let planes: Vec<AffinePlane> = space.iter().collect();
        Ok(PlaneSet {
            tower: tower.clone(),
            family: PlaneFamily::new(tower, level, kind, bound)?,
            planes,
            covers_all_planes: true,
        })
    }

    /// Set over an explicit plane collection (sorted, deduplicated).
    pub fn custom(
        tower: &Tower,
        mut planes: Vec<AffinePlane>,
        kind: DegreeKind,
        bound: u32,
    ) -> Result<Self> {
        if planes.is_empty() {
            return Err(Error::EmptySubset);
        }
        let level = planes[0].level();
        planes.sort();
        planes.dedup();
        Ok(PlaneSet {
            tower: tower.clone(),
            family: PlaneFamily::new(tower, level, kind, bound)?,
            planes,
            covers_all_planes: false,
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn planes(&self) -> &[AffinePlane] {
        &self.planes
    }

    pub fn family(&self) -> &PlaneFamily {
        &self.family
    }

    pub fn level(&self) -> usize {
        self.planes[0].level()
    }

    pub fn plane_index(&self, plane: &AffinePlane) -> Option<usize> {
        self.planes.binary_search(plane).ok()
    }
}

/// Sparse integer table over (plane, function-index); zeros are never
/// stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuperAssignment {
    entries: BTreeMap<(usize, FnIndex), BigInt>,
}

impl SuperAssignment {
    pub fn zero() -> Self {
        SuperAssignment::default()
    }

    pub fn entries(&self) -> &BTreeMap<(usize, FnIndex), BigInt> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, plane: usize, f: &FnIndex) -> BigInt {
        self.entries
            .get(&(plane, f.clone()))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, plane: usize, f: FnIndex, v: BigInt) {
        if v.is_zero() {
            self.entries.remove(&(plane, f));
        } else {
            self.entries.insert((plane, f), v);
        }
    }

    pub fn add_scaled(&mut self, other: &SuperAssignment, scale: &BigInt) {
        for ((p, f), v) in &other.entries {
            let cur = self.get(*p, f) + scale * v;
            self.set(*p, f.clone(), cur);
        }
    }

    /// Per-plane nonzero entries, keyed by plane index.
    pub fn by_plane(&self) -> BTreeMap<usize, Vec<(FnIndex, BigInt)>> {
        let mut out: BTreeMap<usize, Vec<(FnIndex, BigInt)>> = BTreeMap::new();
        for ((p, f), v) in &self.entries {
            out.entry(*p).or_default().push((f.clone(), v.clone()));
        }
        out
    }
}

/// `⟨g⟩`: value 1 on each plane's restriction of `g`, zero elsewhere.
/// Fails with [`Error::NotInFamily`] when some restriction does not fit
/// the family bound (a parameter mismatch).
pub fn natural(set: &PlaneSet, g: &MultiPoly) -> Result<SuperAssignment> {
    let tower = &set.tower;
    let indexed: Vec<(usize, FnIndex)> = set
        .planes
        .par_iter()
        .enumerate()
        .map(|(pi, plane)| {
            let r = restrict_to_plane(tower, g, plane)?;
            Ok((pi, set.family.index_of(tower, &r.inner)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut a = SuperAssignment::zero();
    for (pi, idx) in indexed {
        a.set(pi, idx, BigInt::from(1));
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimpleOutcome {
    /// Every plane's entry sum equals this common value.
    Kappa(BigInt),
    /// First plane pair (canonical order) with differing sums.
    Violation { p1: usize, p2: usize },
}

/// Checks that the entry sum is the same on every plane.
pub fn check_simple(set: &PlaneSet, a: &SuperAssignment) -> SimpleOutcome {
    let mut sums = vec![BigInt::zero(); set.planes.len()];
    for ((p, _), v) in &a.entries {
        sums[*p] += v;
    }
    for j in 1..sums.len() {
        if sums[j] != sums[0] {
            return SimpleOutcome::Violation { p1: 0, p2: j };
        }
    }
    SimpleOutcome::Kappa(sums[0].clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyOutcome {
    Ok,
    Violation {
        p1: usize,
        p2: usize,
        point: Vec<FieldElem>,
        value: FieldElem,
    },
}

fn decoded_supports(
    set: &PlaneSet,
    a: &SuperAssignment,
) -> Result<BTreeMap<usize, Vec<(MultiPoly, BigInt)>>> {
    let mut out = BTreeMap::new();
    for (p, fns) in a.by_plane() {
        if p >= set.planes.len() {
            return Err(Error::BadParams(format!("entry on unknown plane {p}")));
        }
        let mut decoded = Vec::with_capacity(fns.len());
        for (idx, v) in fns {
            decoded.push((set.family.poly_at(&set.tower, &idx)?, v));
        }
        out.insert(p, decoded);
    }
    Ok(out)
}

fn partial_sum_at(
    tower: &Tower,
    plane: &AffinePlane,
    support: Option<&Vec<(MultiPoly, BigInt)>>,
    x: &[FieldElem],
    a: &FieldElem,
) -> BigInt {
    let Some(support) = support else {
        return BigInt::zero();
    };
    let (u, v) = plane.coords_of(tower, x).expect("point on plane");
    let mut sum = BigInt::zero();
    for (f, val) in support {
        if &f.eval(tower, &[u.clone(), v.clone()]).expect("level") == a {
            sum += val;
        }
    }
    sum
}

fn consistency_scan(
    set: &PlaneSet,
    a: &SuperAssignment,
    lines_only: bool,
) -> Result<ConsistencyOutcome> {
    let tower = &set.tower;
    let level = set.level();
    let supports = decoded_supports(set, a)?;
    let n = set.planes.len();
    let values: Vec<FieldElem> = tower.enumerate(level)?.collect();
    // plane pairs in lex order; within a pair, shared points in canonical
    // parameter order, then field values in enumeration order
    let outcome = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Option<(usize, usize, Vec<FieldElem>, FieldElem)>> {
            for j in (i + 1)..n {
                let shared: Vec<Vec<FieldElem>> =
                    match intersect(tower, &set.planes[i], &set.planes[j])? {
                        PlaneMeet::Empty | PlaneMeet::SamePlane => continue,
                        PlaneMeet::Point(p) => {
                            if lines_only {
                                continue;
                            }
                            vec![p]
                        }
                        PlaneMeet::Line(l) => l.points(tower),
                    };
                let (si, sj) = (supports.get(&i), supports.get(&j));
                if si.is_none() && sj.is_none() {
                    continue;
                }
                for x in shared {
                    for val in &values {
                        let li = partial_sum_at(tower, &set.planes[i], si, &x, val);
                        let lj = partial_sum_at(tower, &set.planes[j], sj, &x, val);
                        if li != lj {
                            return Ok(Some((i, j, x, val.clone())));
                        }
                    }
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    for hit in outcome.into_iter().flatten() {
        return Ok(ConsistencyOutcome::Violation {
            p1: hit.0,
            p2: hit.1,
            point: hit.2,
            value: hit.3,
        });
    }
    Ok(ConsistencyOutcome::Ok)
}

/// Pointwise consistency across every pair of planes with a nonempty
/// intersection: for each shared point and field value, the partial sums
/// over functions taking that value must agree.
pub fn check_consistency(set: &PlaneSet, a: &SuperAssignment) -> Result<ConsistencyOutcome> {
    consistency_scan(set, a, false)
}

/// Weak Plane-vs-Plane constraints: pointwise consistency across every
/// pair of planes meeting in a line. Requires a set covering all of
/// `PL(F^t)`.
pub fn check_weak_pvp(set: &PlaneSet, a: &SuperAssignment) -> Result<ConsistencyOutcome> {
    if !set.covers_all_planes {
        return Err(Error::BadParams(
            "weak Plane-vs-Plane checking needs the full plane family".into(),
        ));
    }
    consistency_scan(set, a, true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportProfile {
    pub per_plane: Vec<usize>,
    pub max_support: usize,
    pub zero_planes: usize,
    pub plane_count: usize,
}

impl SupportProfile {
    pub fn zero_plane_fraction(&self) -> Rat {
        Rat::new(
            BigInt::from(self.zero_planes as u64),
            BigInt::from(self.plane_count as u64),
        )
    }
}

pub fn support_profile(set: &PlaneSet, a: &SuperAssignment) -> SupportProfile {
    let mut per_plane = vec![0usize; set.planes.len()];
    for ((p, _), _) in &a.entries {
        per_plane[*p] += 1;
    }
    let max_support = per_plane.iter().copied().max().unwrap_or(0);
    let zero_planes = per_plane.iter().filter(|&&c| c == 0).count();
    SupportProfile {
        max_support,
        zero_planes,
        plane_count: set.planes.len(),
        per_plane,
    }
}

/// Report-only check of the zero-plane bound: a nonzero assignment that
/// satisfies the weak PvP constraints with per-plane support at most `s`
/// should vanish on at most a `(d+3)·s/|F|` fraction of the planes,
/// where `d` is the family degree bound.
#[derive(Clone, Debug)]
pub struct ZeroPlaneReport {
    pub max_support: usize,
    pub zero_fraction: Rat,
    pub bound: Rat,
    pub within: bool,
}

pub fn zero_plane_report(set: &PlaneSet, a: &SuperAssignment) -> ZeroPlaneReport {
    let profile = support_profile(set, a);
    let d = set.family.bound() as u64;
    let s = profile.max_support as u64;
    let fsize = set.tower.size(set.level());
    let bound = Rat::new(
        BigInt::from((d + 3) * s),
        BigInt::from(fsize.to_u64().unwrap_or(u64::MAX)),
    );
    let zero_fraction = profile.zero_plane_fraction();
    ZeroPlaneReport {
        max_support: profile.max_support,
        within: zero_fraction <= bound,
        zero_fraction,
        bound,
    }
}

/// Graded-lex comparison of polynomials: term sequences compared in
/// graded-lex monomial order, coefficients by enumeration index.
pub fn cmp_polys_graded(tower: &Tower, a: &MultiPoly, b: &MultiPoly) -> std::cmp::Ordering {
    let ta = a.terms_graded_lex();
    let tb = b.terms_graded_lex();
    for ((ea, ca), (eb, cb)) in ta.iter().zip(tb.iter()) {
        let da: u32 = ea.iter().sum();
        let db: u32 = eb.iter().sum();
        let ord = da
            .cmp(&db)
            .then_with(|| ea.cmp(eb))
            .then_with(|| tower.elem_index(ca).cmp(&tower.elem_index(cb)));
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    ta.len().cmp(&tb.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecomposeOutcome {
    /// `A = Σ aᵢ·⟨gᵢ⟩` exactly, components in graded-lex order on `gᵢ`.
    Components(Vec<(BigInt, MultiPoly)>),
    /// No certificate: the caller treats the input as violating the
    /// decomposition lemma's conclusion at these parameters.
    Fail(String),
}

/// Precomputed restriction structure for one `(tower, t, d, family)`
/// parameter set: the candidate monomial slots and, per plane, the
/// linear restriction map from candidate coefficients to family
/// coefficients together with its kernel basis.
pub struct DecomposeIndex {
    t: usize,
    d: u32,
    cand_count: u64,
    fsize: u64,
    monomial_slots: Vec<Vec<u32>>,
    plane_maps: Vec<RestrictionMap>,
}

/// Dense restriction map of one plane: column `j` is the restriction of
/// the j-th candidate monomial, expressed over the family's monomial
/// slots; `kernel` spans the candidates restricting to zero here.
struct RestrictionMap {
    cols: Vec<Vec<u64>>,
    kernel: Vec<Vec<u64>>,
}

impl DecomposeIndex {
    /// Validates the candidate space `|F|^{(d+1)^t}` against `cap` and
    /// precomputes every plane's restriction map.
    pub fn build(set: &PlaneSet, d: u32, cap: u64) -> Result<Self> {
        let tower = &set.tower;
        let level = set.level();
        let t = set.planes[0].arity();
        let fsize = tower.size_u64(level).ok_or(Error::CapExceeded {
            what: "field size",
            value: tower.size(level).to_string(),
            cap: u64::MAX.to_string(),
        })?;
        // candidate monomial slots, graded-lex
        let mut slots: Vec<Vec<u32>> = Vec::new();
        let mut cur = Some(vec![0u32; t]);
        while let Some(exps) = cur.take() {
            slots.push(exps.clone());
            let mut nxt = exps;
            for k in (0..t).rev() {
                nxt[k] += 1;
                if nxt[k] <= d {
                    cur = Some(nxt);
                    break;
                }
                nxt[k] = 0;
            }
        }
        slots.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| a.cmp(b))
        });
        let m = slots.len();
        let mut cand_count: u64 = 1;
        for _ in 0..m {
            cand_count = cand_count.checked_mul(fsize).ok_or(Error::CapExceeded {
                what: "candidate space",
                value: format!("{fsize}^{m}"),
                cap: cap.to_string(),
            })?;
        }
        if cand_count > cap {
            return Err(Error::CapExceeded {
                what: "candidate space",
                value: cand_count.to_string(),
                cap: cap.to_string(),
            });
        }
        let fam_monomials = set.family.monomials().to_vec();
        let slot_of: HashMap<(u32, u32), usize> = fam_monomials
            .iter()
            .enumerate()
            .map(|(i, &mo)| (mo, i))
            .collect();
        let nfam = fam_monomials.len();
        let sf = SmallFieldTables::new(tower, level)?;
        let plane_maps = set
            .planes
            .par_iter()
            .map(|plane| -> Result<RestrictionMap> {
                let mut cols = Vec::with_capacity(m);
                for exps in &slots {
                    let mono = MultiPoly::monomial(t, exps.clone(), tower.one(level));
                    let r = restrict_to_plane(tower, &mono, plane)?;
                    let mut dense = vec![0u64; nfam];
                    for (e, c) in r.inner.terms() {
                        let slot = *slot_of.get(&(e[0], e[1])).ok_or(Error::NotInFamily)?;
                        dense[slot] = tower.elem_index(c).expect("small field");
                    }
                    cols.push(dense);
                }
                let kernel = kernel_of_map(&sf, &cols, nfam);
                Ok(RestrictionMap { cols, kernel })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DecomposeIndex {
            t,
            d,
            cand_count,
            fsize,
            monomial_slots: slots,
            plane_maps,
        })
    }

    pub fn candidate_count(&self) -> u64 {
        self.cand_count
    }

    pub fn ideg_bound(&self) -> u32 {
        self.d
    }

    fn poly_of_digits(&self, tower: &Tower, level: usize, digits: &[u64]) -> MultiPoly {
        let mut poly = MultiPoly::zero(self.t, level);
        for (slot, &dg) in digits.iter().enumerate() {
            if dg != 0 {
                let mono = MultiPoly::monomial(
                    self.t,
                    self.monomial_slots[slot].clone(),
                    tower.elem_from_index(level, dg),
                );
                poly = poly.add(tower, &mono).expect("level");
            }
        }
        poly
    }
}

/// Kernel basis of the linear map with the given columns, over the
/// field described by `sf`. Vectors are element-index coordinates.
fn kernel_of_map(sf: &SmallFieldTables, cols: &[Vec<u64>], nrows: usize) -> Vec<Vec<u64>> {
    let m = cols.len();
    // row-reduce the nrows x m matrix
    let mut a: Vec<Vec<u64>> = (0..nrows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..m {
        if let Some(pr) = (row..nrows).find(|&i| a[i][col] != 0) {
            a.swap(row, pr);
            let inv = sf.inv(a[row][col]);
            for j in 0..m {
                a[row][j] = sf.mul(a[row][j], inv);
            }
            for i in 0..nrows {
                if i != row && a[i][col] != 0 {
                    let f = a[i][col];
                    for j in 0..m {
                        a[i][j] = sf.sub(a[i][j], sf.mul(f, a[row][j]));
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
    }
    let mut kernel = Vec::new();
    for free in 0..m {
        if pivots.iter().any(|&(_, pc)| pc == free) {
            continue;
        }
        let mut v = vec![0u64; m];
        v[free] = 1;
        for &(pr, pc) in &pivots {
            v[pc] = sf.neg(a[pr][free]);
        }
        kernel.push(v);
    }
    kernel
}

/// Solves `cols · x = rhs` over the field; returns one solution.
fn solve_map(sf: &SmallFieldTables, cols: &[Vec<u64>], rhs: &[u64]) -> Option<Vec<u64>> {
    let m = cols.len();
    let nrows = rhs.len();
    let mut a: Vec<Vec<u64>> = (0..nrows)
        .map(|r| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[r]).collect();
            row.push(rhs[r]);
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..m {
        if let Some(pr) = (row..nrows).find(|&i| a[i][col] != 0) {
            a.swap(row, pr);
            let inv = sf.inv(a[row][col]);
            for j in 0..=m {
                a[row][j] = sf.mul(a[row][j], inv);
            }
            for i in 0..nrows {
                if i != row && a[i][col] != 0 {
                    let f = a[i][col];
                    for j in 0..=m {
                        a[i][j] = sf.sub(a[i][j], sf.mul(f, a[row][j]));
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
    }
    for i in row..nrows {
        if a[i][m] != 0 {
            return None;
        }
    }
    let mut x = vec![0u64; m];
    for &(pr, pc) in &pivots {
        x[pc] = a[pr][m];
    }
    Some(x)
}

/// Addition/multiplication tables on element enumeration indices, for
/// fields small enough to tabulate.
struct SmallFieldTables {
    size: u64,
    add: Vec<u64>,
    mul: Vec<u64>,
    neg: Vec<u64>,
    inv: Vec<u64>,
}

impl SmallFieldTables {
    fn new(tower: &Tower, level: usize) -> Result<Self> {
        let size = tower.size_u64(level).filter(|&s| s <= 512).ok_or(
            Error::CapExceeded {
                what: "field size (operation tables)",
                value: tower.size(level).to_string(),
                cap: "512".into(),
            },
        )?;
        let elems: Vec<FieldElem> = tower.enumerate(level)?.collect();
        let n = size as usize;
        let mut add = vec![0u64; n * n];
        let mut mul = vec![0u64; n * n];
        let mut neg = vec![0u64; n];
        let mut inv = vec![0u64; n];
        for (i, a) in elems.iter().enumerate() {
            neg[i] = tower.elem_index(&tower.neg(a)).unwrap();
            if !a.is_zero() {
                inv[i] = tower.elem_index(&tower.inv(a)?).unwrap();
            }
            for (j, b) in elems.iter().enumerate() {
                add[i * n + j] = tower.elem_index(&tower.add(a, b)?).unwrap();
                mul[i * n + j] = tower.elem_index(&tower.mul(a, b)?).unwrap();
            }
        }
        Ok(SmallFieldTables {
            size,
            add,
            mul,
            neg,
            inv,
        })
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        self.add[(a * self.size + b) as usize]
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.mul[(a * self.size + b) as usize]
    }

    #[inline]
    fn neg(&self, a: u64) -> u64 {
        self.neg[a as usize]
    }

    #[inline]
    fn inv(&self, a: u64) -> u64 {
        self.inv[a as usize]
    }
}

/// Recovers `a` as an integer combination of naturals of global
/// polynomials with `ideg <= d`.
///
/// Every residual entry is pulled back through its plane's restriction
/// map; each candidate in the preimage fiber receives that entry's
/// value as a vote on that plane. A candidate participates with
/// coefficient `w != 0` iff `w` wins a strict majority over all planes
/// (a candidate's vote is 0 on planes where the entry vanished).
/// Distinct components collide on at most deg-many planes each — the
/// planes whose vanishing affine form divides the difference — so at
/// sound parameters the majority is the exact coefficient. The
/// recovered combination is then re-verified: a nonzero final residual
/// is reported as Fail, never as a certificate.
///
/// Precondition (not re-verified here): `a` passes [`check_weak_pvp`].
pub fn decompose(
    set: &PlaneSet,
    index: &DecomposeIndex,
    a: &SuperAssignment,
    k_max: usize,
) -> Result<DecomposeOutcome> {
    let tower = &set.tower;
    let level = set.level();
    let sf = SmallFieldTables::new(tower, level)?;
    let nfam = set.family.monomials().len();
    let plane_count = set.planes.len();
    // digits of a family index, big-endian over family slots
    let decode_family = |f: &FnIndex| -> Vec<u64> {
        let mut digits = vec![0u64; nfam];
        let mut rem = f.clone();
        let fs = FnIndex::from(index.fsize);
        for k in (0..nfam).rev() {
            let (q, r) = num_integer::Integer::div_rem(&rem, &fs);
            digits[k] = r.to_u64().expect("digit below field size");
            rem = q;
        }
        digits
    };
    let mut votes: HashMap<Vec<u64>, HashMap<BigInt, u32>> = HashMap::new();
    for ((p, f), value) in &a.entries {
        let map = &index.plane_maps[*p];
        let rhs = decode_family(f);
        let Some(particular) = solve_map(&sf, &map.cols, &rhs) else {
            // no candidate restricts to this function; the final
            // residual check will reject
            continue;
        };
        // fiber = particular + span(kernel)
        let kdim = map.kernel.len();
        let mut combo = vec![0u64; kdim];
        loop {
            let mut cand = particular.clone();
            for (ci, &c) in combo.iter().enumerate() {
                if c != 0 {
                    for (x, k) in cand.iter_mut().zip(&map.kernel[ci]) {
                        *x = sf.add(*x, sf.mul(c, *k));
                    }
                }
            }
            *votes
                .entry(cand)
                .or_default()
                .entry(value.clone())
                .or_insert(0) += 1;
            let mut kpos = 0;
            loop {
                if kpos == kdim {
                    combo.clear();
                    break;
                }
                combo[kpos] += 1;
                if combo[kpos] < index.fsize {
                    break;
                }
                combo[kpos] = 0;
                kpos += 1;
            }
            if combo.is_empty() {
                break;
            }
        }
    }
    let mut components: Vec<(BigInt, MultiPoly)> = Vec::new();
    for (cand, tally) in votes {
        let voted: u32 = tally.values().sum();
        let zeros = plane_count as u32 - voted;
        let mut best: Option<(BigInt, u32)> = Some((BigInt::zero(), zeros));
        for (val, count) in tally {
            if best.as_ref().map(|(_, c)| count > *c).unwrap_or(true) {
                best = Some((val, count));
            }
        }
        let (winner, count) = best.unwrap();
        if winner.is_zero() || 2 * count <= plane_count as u32 {
            continue;
        }
        components.push((winner, index.poly_of_digits(tower, level, &cand)));
        if components.len() > k_max {
            return Ok(DecomposeOutcome::Fail(format!(
                "more than k_max = {k_max} components"
            )));
        }
    }
    // exact verification: peel and demand a zero residual
    let mut residual = a.clone();
    for (coeff, g) in &components {
        let nat = natural(set, g)?;
        residual.add_scaled(&nat, &(-coeff.clone()));
    }
    if !residual.is_zero() {
        return Ok(DecomposeOutcome::Fail(
            "majority components do not explain the assignment".into(),
        ));
    }
    components.sort_by(|x, y| cmp_polys_graded(tower, &x.1, &y.1));
    Ok(DecomposeOutcome::Components(components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn f5_set() -> PlaneSet {
        let tower = Tower::new(5, 0).unwrap();
        // global candidates have ideg <= 1, so their restrictions have
        // total degree <= 3, and 3 < |F_5| keeps the family valid
        PlaneSet::full(&tower, 0, 3, DegreeKind::Total, 3).unwrap()
    }

    fn rand_multilinear(rng: &mut StdRng, tower: &Tower, t: usize) -> MultiPoly {
        let size = tower.size_u64(0).unwrap();
        let mut p = MultiPoly::zero(t, 0);
        for _ in 0..4 {
            let exps: Vec<u32> = (0..t).map(|_| rng.gen_range(0..=1)).collect();
            let c = tower.elem_from_index(0, rng.gen_range(0..size));
            p = p.add(tower, &MultiPoly::monomial(t, exps, c)).unwrap();
        }
        p
    }

    #[test]
    fn natural_of_constant_hits_constant_function() {
        let tower = Tower::new(5, 0).unwrap();
        let set = PlaneSet::full(&tower, 0, 3, DegreeKind::Total, 1).unwrap();
        let g = MultiPoly::constant(3, tower.from_base(0, 2));
        let a = natural(&set, &g).unwrap();
        let profile = support_profile(&set, &a);
        assert_eq!(profile.max_support, 1);
        assert_eq!(profile.zero_planes, 0);
        assert!(profile.per_plane.iter().all(|&c| c == 1));
        // each entry indexes the constant-2 member of the family
        let expect = set
            .family
            .index_of(&tower, &MultiPoly::constant(2, tower.from_base(0, 2)))
            .unwrap();
        for ((_, f), v) in a.entries() {
            assert_eq!(f, &expect);
            assert_eq!(v, &BigInt::from(1));
        }
    }

    #[test]
    fn naturals_pass_all_checkers() {
        let set = f5_set();
        let tower = set.tower().clone();
        let mut rng = StdRng::seed_from_u64(21);
        let g = rand_multilinear(&mut rng, &tower, 3);
        let a = natural(&set, &g).unwrap();
        assert_eq!(check_simple(&set, &a), SimpleOutcome::Kappa(BigInt::from(1)));
        assert_eq!(check_consistency(&set, &a).unwrap(), ConsistencyOutcome::Ok);
        assert_eq!(check_weak_pvp(&set, &a).unwrap(), ConsistencyOutcome::Ok);
    }

    #[test]
    fn checkers_are_linear() {
        let set = f5_set();
        let tower = set.tower().clone();
        let mut rng = StdRng::seed_from_u64(22);
        let g1 = rand_multilinear(&mut rng, &tower, 3);
        let mut g2 = rand_multilinear(&mut rng, &tower, 3);
        while g2 == g1 {
            g2 = rand_multilinear(&mut rng, &tower, 3);
        }
        let mut a = SuperAssignment::zero();
        a.add_scaled(&natural(&set, &g1).unwrap(), &BigInt::from(2));
        a.add_scaled(&natural(&set, &g2).unwrap(), &BigInt::from(-1));
        // kappa = 2 - 1 = 1
        assert_eq!(check_simple(&set, &a), SimpleOutcome::Kappa(BigInt::from(1)));
        assert_eq!(check_consistency(&set, &a).unwrap(), ConsistencyOutcome::Ok);
        assert_eq!(check_weak_pvp(&set, &a).unwrap(), ConsistencyOutcome::Ok);
        // zero assignment is accepted everywhere
        let z = SuperAssignment::zero();
        assert_eq!(check_simple(&set, &z), SimpleOutcome::Kappa(BigInt::zero()));
        assert_eq!(check_weak_pvp(&set, &z).unwrap(), ConsistencyOutcome::Ok);
    }

    #[test]
    fn zeroed_plane_breaks_simple() {
        let set = f5_set();
        let tower = set.tower().clone();
        let g = MultiPoly::var(&tower, 3, 0, 0);
        let mut a = natural(&set, &g).unwrap();
        let (p, f) = {
            let ((p, f), _) = a.entries().iter().next().unwrap();
            (*p, f.clone())
        };
        a.set(p, f, BigInt::zero());
        assert!(matches!(
            check_simple(&set, &a),
            SimpleOutcome::Violation { .. }
        ));
    }

    #[test]
    fn single_entry_corruption_is_caught() {
        let set = f5_set();
        let tower = set.tower().clone();
        let mut rng = StdRng::seed_from_u64(23);
        let g = rand_multilinear(&mut rng, &tower, 3);
        let a = natural(&set, &g).unwrap();
        // move one entry to a different function on the same plane
        let (p, f, v) = {
            let ((p, f), v) = a.entries().iter().nth(7).unwrap();
            (*p, f.clone(), v.clone())
        };
        let other = if f.is_zero() {
            FnIndex::from(1u32)
        } else {
            FnIndex::zero()
        };
        let mut bad = a.clone();
        bad.set(p, f, BigInt::zero());
        bad.set(p, other, v);
        assert!(matches!(
            check_weak_pvp(&set, &bad).unwrap(),
            ConsistencyOutcome::Violation { .. }
        ));
        assert!(matches!(
            check_consistency(&set, &bad).unwrap(),
            ConsistencyOutcome::Violation { .. }
        ));
    }

    #[test]
    fn support_profile_of_two_naturals() {
        let set = f5_set();
        let tower = set.tower().clone();
        let mut rng = StdRng::seed_from_u64(24);
        let g1 = rand_multilinear(&mut rng, &tower, 3);
        let mut g2 = rand_multilinear(&mut rng, &tower, 3);
        while g2 == g1 {
            g2 = rand_multilinear(&mut rng, &tower, 3);
        }
        let mut a = SuperAssignment::zero();
        a.add_scaled(&natural(&set, &g1).unwrap(), &BigInt::from(1));
        a.add_scaled(&natural(&set, &g2).unwrap(), &BigInt::from(2));
        let profile = support_profile(&set, &a);
        assert_eq!(profile.max_support, 2);
        // support 1 exactly where the restrictions collide
        for (pi, plane) in set.planes().iter().enumerate() {
            let r1 = restrict_to_plane(&tower, &g1, plane).unwrap().inner;
            let r2 = restrict_to_plane(&tower, &g2, plane).unwrap().inner;
            let expect = if r1 == r2 { 1 } else { 2 };
            assert_eq!(profile.per_plane[pi], expect, "plane {pi}");
        }
        // the zero assignment has zero-plane fraction 1
        let z = support_profile(&set, &SuperAssignment::zero());
        assert_eq!(z.zero_plane_fraction(), Rat::from_integer(BigInt::from(1)));
    }

    #[test]
    fn decompose_single_and_zero() {
        let set = f5_set();
        let tower = set.tower().clone();
        let index = DecomposeIndex::build(&set, 1, 1 << 22).unwrap();
        assert_eq!(index.candidate_count(), 5u64.pow(8));
        let g = MultiPoly::var(&tower, 3, 0, 1);
        let mut a = SuperAssignment::zero();
        a.add_scaled(&natural(&set, &g).unwrap(), &BigInt::from(3));
        match decompose(&set, &index, &a, 8).unwrap() {
            DecomposeOutcome::Components(c) => {
                assert_eq!(c.len(), 1);
                assert_eq!(c[0].0, BigInt::from(3));
                assert_eq!(c[0].1, g);
            }
            other => panic!("expected components, got {other:?}"),
        }
        match decompose(&set, &index, &SuperAssignment::zero(), 8).unwrap() {
            DecomposeOutcome::Components(c) => assert!(c.is_empty()),
            other => panic!("expected empty components, got {other:?}"),
        }
    }

    #[test]
    fn decompose_recovers_combinations() {
        let set = f5_set();
        let tower = set.tower().clone();
        let index = DecomposeIndex::build(&set, 1, 1 << 22).unwrap();
        let mut rng = StdRng::seed_from_u64(25);
        for _ in 0..20 {
            let k = rng.gen_range(1..=3usize);
            let mut gs: Vec<MultiPoly> = Vec::new();
            while gs.len() < k {
                let g = rand_multilinear(&mut rng, &tower, 3);
                if !gs.contains(&g) {
                    gs.push(g);
                }
            }
            let mut a = SuperAssignment::zero();
            let mut expect: Vec<(BigInt, MultiPoly)> = Vec::new();
            for g in &gs {
                let mut c = 0i64;
                while c == 0 {
                    c = rng.gen_range(-3..=3);
                }
                a.add_scaled(&natural(&set, g).unwrap(), &BigInt::from(c));
                expect.push((BigInt::from(c), g.clone()));
            }
            expect.sort_by(|x, y| cmp_polys_graded(&tower, &x.1, &y.1));
            match decompose(&set, &index, &a, 8).unwrap() {
                DecomposeOutcome::Components(c) => assert_eq!(c, expect),
                other => panic!("expected components, got {other:?}"),
            }
        }
    }

    #[test]
    fn candidate_space_cap_is_enforced() {
        let set = f5_set();
        assert!(matches!(
            DecomposeIndex::build(&set, 1, 100),
            Err(Error::CapExceeded { .. })
        ));
    }
}
