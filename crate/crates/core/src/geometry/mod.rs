//! Affine lines and planes over `F^t`, canonical forms, deterministic
//! enumeration, and the intersection classifier that underpins both the
//! Plane-vs-Plane graph and the reduction constraint generators.
//!
//! A plane is identified with its point set: the stored representative is
//! canonical (directions in reduced row-echelon form, base point reduced
//! modulo the span), so set equality is representative equality.

mod cayley;
mod pvp;

pub use cayley::{CayleyGraph, MixingWitness};
pub use pvp::{degrees, edge_expansion, edge_expansion_estimate, pvp_edges};

use crate::ff::{FieldElem, Tower};
use crate::{Error, Result};

pub type Point = Vec<FieldElem>;

pub fn point_add(tower: &Tower, a: &[FieldElem], b: &[FieldElem]) -> Point {
    a.iter()
        .zip(b)
        .map(|(x, y)| tower.add(x, y).expect("same level"))
        .collect()
}

pub fn point_sub(tower: &Tower, a: &[FieldElem], b: &[FieldElem]) -> Point {
    a.iter()
        .zip(b)
        .map(|(x, y)| tower.sub(x, y).expect("same level"))
        .collect()
}

pub fn point_scale(tower: &Tower, s: &FieldElem, a: &[FieldElem]) -> Point {
    a.iter()
        .map(|x| tower.mul(s, x).expect("same level"))
        .collect()
}

/// Rank of the point in the little-endian order: coordinate 0 is the
/// least significant digit. This is the order used to pick "smallest"
/// completion directions, so that `e1 < e2 < ... < e_t`.
pub fn point_rank_le(tower: &Tower, p: &[FieldElem]) -> Option<u64> {
    let size = tower.size_u64(p[0].level())?;
    let mut acc: u64 = 0;
    for x in p.iter().rev() {
        acc = acc.checked_mul(size)?.checked_add(tower.elem_index(x)?)?;
    }
    Some(acc)
}

pub fn point_from_rank_le(tower: &Tower, level: usize, t: usize, mut rank: u64) -> Point {
    let size = tower.size_u64(level).expect("desk-scale field");
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        out.push(tower.elem_from_index(level, rank % size));
        rank /= size;
    }
    out
}

/// Two-dimensional affine subspace in canonical form.
///
/// Field order matters: the derived `Ord` compares `(dir1, dir2, base)`,
/// which is the canonical plane order used everywhere (anchors, streams,
/// serialized output).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePlane {
    dir1: Point,
    dir2: Point,
    base: Point,
    pivots: (usize, usize),
}

impl std::fmt::Debug for AffinePlane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Plane{{base:{:?} d1:{:?} d2:{:?}}}",
            self.base, self.dir1, self.dir2
        )
    }
}

impl AffinePlane {
    pub fn base(&self) -> &[FieldElem] {
        &self.base
    }

    pub fn dir1(&self) -> &[FieldElem] {
        &self.dir1
    }

    pub fn dir2(&self) -> &[FieldElem] {
        &self.dir2
    }

    pub fn pivots(&self) -> (usize, usize) {
        self.pivots
    }

    pub fn arity(&self) -> usize {
        self.base.len()
    }

    pub fn level(&self) -> usize {
        self.base[0].level()
    }

    /// Both canonical directions are standard basis vectors.
    pub fn is_axis_parallel(&self) -> bool {
        let unit = |d: &[FieldElem], p: usize| {
            d.iter().enumerate().all(|(i, x)| {
                if i == p {
                    x.prime_value() == Some(1)
                } else {
                    x.is_zero()
                }
            })
        };
        unit(&self.dir1, self.pivots.0) && unit(&self.dir2, self.pivots.1)
    }

    pub fn point_at(&self, tower: &Tower, u: &FieldElem, v: &FieldElem) -> Point {
        let mut p = self.base.clone();
        for i in 0..p.len() {
            let s = tower
                .add(
                    &tower.mul(u, &self.dir1[i]).expect("level"),
                    &tower.mul(v, &self.dir2[i]).expect("level"),
                )
                .expect("level");
            p[i] = tower.add(&p[i], &s).expect("level");
        }
        p
    }

    /// Plane coordinates of `x`, or `None` if `x` is not on the plane.
    /// With RREF directions these are just the pivot entries of `x - base`.
    pub fn coords_of(&self, tower: &Tower, x: &[FieldElem]) -> Option<(FieldElem, FieldElem)> {
        let diff = point_sub(tower, x, &self.base);
        let u = diff[self.pivots.0].clone();
        let v = diff[self.pivots.1].clone();
        for i in 0..diff.len() {
            let s = tower
                .add(
                    &tower.mul(&u, &self.dir1[i]).expect("level"),
                    &tower.mul(&v, &self.dir2[i]).expect("level"),
                )
                .expect("level");
            if s != diff[i] {
                return None;
            }
        }
        Some((u, v))
    }

    pub fn contains(&self, tower: &Tower, x: &[FieldElem]) -> bool {
        self.coords_of(tower, x).is_some()
    }

    /// All `|F|^2` points of the plane, in `(u, v)` enumeration order.
    pub fn points(&self, tower: &Tower) -> Vec<Point> {
        let level = self.level();
        let mut out = Vec::new();
        for u in tower.enumerate(level).expect("level") {
            for v in tower.enumerate(level).expect("level") {
                out.push(self.point_at(tower, &u, &v));
            }
        }
        out
    }
}

/// One-dimensional affine subspace in canonical form (direction has a
/// leading 1 at its pivot, base is zero at the pivot).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineLine {
    dir: Point,
    base: Point,
    pivot: usize,
}

impl AffineLine {
    pub fn dir(&self) -> &[FieldElem] {
        &self.dir
    }

    pub fn base(&self) -> &[FieldElem] {
        &self.base
    }

    pub fn point_at(&self, tower: &Tower, s: &FieldElem) -> Point {
        point_add(tower, &self.base, &point_scale(tower, s, &self.dir))
    }

    pub fn points(&self, tower: &Tower) -> Vec<Point> {
        let level = self.base[0].level();
        tower
            .enumerate(level)
            .expect("level")
            .map(|s| self.point_at(tower, &s))
            .collect()
    }
}

pub fn canonicalize_line(tower: &Tower, base: &[FieldElem], dir: &[FieldElem]) -> Result<AffineLine> {
    let pivot = dir.iter().position(|x| !x.is_zero());
    let Some(pivot) = pivot else {
        return Err(Error::DependentDirections);
    };
    let inv = tower.inv(&dir[pivot])?;
    let dir: Point = point_scale(tower, &inv, dir);
    let shift = point_scale(tower, &base[pivot], &dir);
    let base = point_sub(tower, base, &shift);
    Ok(AffineLine { dir, base, pivot })
}

/// Canonicalizes `(base, d1, d2)` into the unique representative of the
/// plane as a point set. Fails if the directions are dependent.
pub fn canonicalize(
    tower: &Tower,
    base: &[FieldElem],
    d1: &[FieldElem],
    d2: &[FieldElem],
) -> Result<AffinePlane> {
    let t = base.len();
    if d1.len() != t || d2.len() != t {
        return Err(Error::ArityMismatch {
            expected: t,
            got: d1.len().max(d2.len()),
        });
    }
    let mut r0 = d1.to_vec();
    let mut r1 = d2.to_vec();
    // first pivot
    let p1 = (0..t)
        .find(|&j| !r0[j].is_zero() || !r1[j].is_zero())
        .ok_or(Error::DependentDirections)?;
    if r0[p1].is_zero() {
        std::mem::swap(&mut r0, &mut r1);
    }
    let inv = tower.inv(&r0[p1])?;
    r0 = point_scale(tower, &inv, &r0);
    let f = r1[p1].clone();
    r1 = point_sub(tower, &r1, &point_scale(tower, &f, &r0));
    // second pivot
    let p2 = ((p1 + 1)..t)
        .find(|&j| !r1[j].is_zero())
        .ok_or(Error::DependentDirections)?;
    let inv = tower.inv(&r1[p2])?;
    r1 = point_scale(tower, &inv, &r1);
    let f = r0[p2].clone();
    r0 = point_sub(tower, &r0, &point_scale(tower, &f, &r1));
    // reduce base modulo the span: zero it at both pivots
    let mut b = base.to_vec();
    let f = b[p1].clone();
    b = point_sub(tower, &b, &point_scale(tower, &f, &r0));
    let f = b[p2].clone();
    b = point_sub(tower, &b, &point_scale(tower, &f, &r1));
    Ok(AffinePlane {
        dir1: r0,
        dir2: r1,
        base: b,
        pivots: (p1, p2),
    })
}

/// All canonical planes of `F^t` at one tower level, addressable by a
/// dense id without materializing every plane. Planes are ordered by
/// `(dir1, dir2, base)`, matching `AffinePlane`'s `Ord`.
pub struct PlaneSpace {
    tower: Tower,
    level: usize,
    t: usize,
    subspaces: Vec<AffinePlane>,
    field_size: u64,
    coset_size: u64,
}

impl PlaneSpace {
    pub fn new(tower: &Tower, level: usize, t: usize) -> Result<Self> {
        if t < 3 {
            return Err(Error::BadParams(format!(
                "plane enumeration needs ambient dimension >= 3, got {t}"
            )));
        }
        let field_size = tower.size_u64(level).ok_or_else(|| Error::CapExceeded {
            what: "field size",
            value: tower.size(level).to_string(),
            cap: u64::MAX.to_string(),
        })?;
        let mut subspaces = Vec::new();
        // RREF shapes: pivots p1 < p2, free entries after each pivot
        for p1 in 0..t {
            for p2 in (p1 + 1)..t {
                let free0: Vec<usize> = ((p1 + 1)..t).filter(|&j| j != p2).collect();
                let free1: Vec<usize> = ((p2 + 1)..t).collect();
                let n0 = free0.len();
                let n1 = free1.len();
                let total = field_size
                    .checked_pow((n0 + n1) as u32)
                    .expect("desk-scale subspace family");
                for rank in 0..total {
                    let mut digits = Vec::with_capacity(n0 + n1);
                    let mut r = rank;
                    for _ in 0..(n0 + n1) {
                        digits.push(r % field_size);
                        r /= field_size;
                    }
                    digits.reverse();
                    let mut d1: Point = vec![tower.zero(level); t];
                    let mut d2: Point = vec![tower.zero(level); t];
                    d1[p1] = tower.one(level);
                    d2[p2] = tower.one(level);
                    for (k, &j) in free0.iter().enumerate() {
                        d1[j] = tower.elem_from_index(level, digits[k]);
                    }
                    for (k, &j) in free1.iter().enumerate() {
                        d2[j] = tower.elem_from_index(level, digits[n0 + k]);
                    }
                    subspaces.push(AffinePlane {
                        dir1: d1,
                        dir2: d2,
                        base: vec![tower.zero(level); t],
                        pivots: (p1, p2),
                    });
                }
            }
        }
        subspaces.sort();
        let coset_size = field_size
            .checked_pow((t - 2) as u32)
            .expect("desk-scale coset family");
        Ok(PlaneSpace {
            tower: tower.clone(),
            level,
            t,
            subspaces,
            field_size,
            coset_size,
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn arity(&self) -> usize {
        self.t
    }

    pub fn subspace_count(&self) -> u64 {
        self.subspaces.len() as u64
    }

    /// The linear subspaces (base = 0) in canonical order; plane id
    /// `si * coset_size + rank` is the rank-th translate of subspace `si`.
    pub fn subspaces(&self) -> &[AffinePlane] {
        &self.subspaces
    }

    pub fn coset_size(&self) -> u64 {
        self.coset_size
    }

    pub fn count(&self) -> u64 {
        self.subspace_count() * self.coset_size
    }

    pub fn plane(&self, id: u64) -> AffinePlane {
        let sub = &self.subspaces[(id / self.coset_size) as usize];
        let mut rank = id % self.coset_size;
        let mut digits = vec![0u64; self.t - 2];
        for d in digits.iter_mut().rev() {
            *d = rank % self.field_size;
            rank /= self.field_size;
        }
        let mut base = vec![self.tower.zero(self.level); self.t];
        let mut k = 0;
        for j in 0..self.t {
            if j != sub.pivots.0 && j != sub.pivots.1 {
                base[j] = self.tower.elem_from_index(self.level, digits[k]);
                k += 1;
            }
        }
        AffinePlane {
            dir1: sub.dir1.clone(),
            dir2: sub.dir2.clone(),
            base,
            pivots: sub.pivots,
        }
    }

    pub fn id_of(&self, plane: &AffinePlane) -> Option<u64> {
        let probe = AffinePlane {
            dir1: plane.dir1.clone(),
            dir2: plane.dir2.clone(),
            base: vec![self.tower.zero(self.level); self.t],
            pivots: plane.pivots,
        };
        let sub = self.subspaces.binary_search(&probe).ok()?;
        let mut rank = 0u64;
        for j in 0..self.t {
            if j != plane.pivots.0 && j != plane.pivots.1 {
                rank = rank * self.field_size + self.tower.elem_index(&plane.base[j])?;
            }
        }
        Some(sub as u64 * self.coset_size + rank)
    }

    /// Ids of all planes containing `x`, ascending.
    pub fn ids_through(&self, x: &[FieldElem]) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.subspaces.len());
        for (si, sub) in self.subspaces.iter().enumerate() {
            let mut b = x.to_vec();
            let f = b[sub.pivots.0].clone();
            b = point_sub(&self.tower, &b, &point_scale(&self.tower, &f, &sub.dir1));
            let f = b[sub.pivots.1].clone();
            b = point_sub(&self.tower, &b, &point_scale(&self.tower, &f, &sub.dir2));
            let mut rank = 0u64;
            for j in 0..self.t {
                if j != sub.pivots.0 && j != sub.pivots.1 {
                    rank = rank * self.field_size
                        + self.tower.elem_index(&b[j]).expect("desk-scale field");
                }
            }
            out.push(si as u64 * self.coset_size + rank);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = AffinePlane> + '_ {
        (0..self.count()).map(move |id| self.plane(id))
    }
}

/// Every affine 2-subspace of `F^t` exactly once, in canonical order.
/// Errs when the family exceeds `cap`.
pub fn enumerate_planes(tower: &Tower, level: usize, t: usize, cap: u64) -> Result<Vec<AffinePlane>> {
    let space = PlaneSpace::new(tower, level, t)?;
    if space.count() > cap {
        return Err(Error::CapExceeded {
            what: "plane family",
            value: space.count().to_string(),
            cap: cap.to_string(),
        });
    }
    Ok(space.iter().collect())
}

/// The `3|F|` planes of `F^3` parallel to the coordinate axes, grouped by
/// fixed coordinate (axis-major, then the fixed value in field order).
pub fn parallel_planes(tower: &Tower, level: usize, t: usize) -> Result<Vec<AffinePlane>> {
    if t != 3 {
        return Err(Error::ArityMismatch { expected: 3, got: t });
    }
    let mut out = Vec::new();
    for axis in 0..3usize {
        let dirs: Vec<usize> = (0..3).filter(|&j| j != axis).collect();
        for v in tower.enumerate(level)? {
            let mut base = vec![tower.zero(level); 3];
            base[axis] = v;
            let mut d1 = vec![tower.zero(level); 3];
            let mut d2 = vec![tower.zero(level); 3];
            d1[dirs[0]] = tower.one(level);
            d2[dirs[1]] = tower.one(level);
            out.push(AffinePlane {
                dir1: d1,
                dir2: d2,
                base,
                pivots: (dirs[0], dirs[1]),
            });
        }
    }
    Ok(out)
}

fn in_span(tower: &Tower, dirs: &[&[FieldElem]], v: &[FieldElem]) -> bool {
    // small Gaussian elimination: is v a combination of dirs?
    let mut rows: Vec<Point> = dirs.iter().map(|d| d.to_vec()).collect();
    let mut target = v.to_vec();
    let t = v.len();
    let mut col = 0;
    let mut r = 0;
    while r < rows.len() && col < t {
        if let Some(pr) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) {
            rows.swap(r, pr);
            let inv = tower.inv(&rows[r][col]).expect("nonzero");
            rows[r] = point_scale(tower, &inv, &rows[r]);
            for i in 0..rows.len() {
                if i != r && !rows[i][col].is_zero() {
                    let f = rows[i][col].clone();
                    rows[i] = point_sub(tower, &rows[i], &point_scale(tower, &f, &rows[r]));
                }
            }
            if !target[col].is_zero() {
                let f = target[col].clone();
                target = point_sub(tower, &target, &point_scale(tower, &f, &rows[r]));
            }
            r += 1;
        }
        col += 1;
    }
    target.iter().all(|x| x.is_zero())
}

/// Deterministic plane through three points of `F^3`:
/// the unique spanned plane when the points are affinely independent;
/// degenerate inputs are completed by the smallest direction vectors (in
/// little-endian point order) outside the current span. Inputs are
/// sorted first, so the result is invariant under permutations.
pub fn clause_plane(tower: &Tower, points: &[Point; 3]) -> Result<AffinePlane> {
    let level = points[0][0].level();
    let t = points[0].len();
    let mut pts = points.clone();
    pts.sort_by_key(|p| point_rank_le(tower, p).expect("desk-scale field"));
    let d1 = point_sub(tower, &pts[1], &pts[0]);
    let d2 = point_sub(tower, &pts[2], &pts[0]);
    let have1 = !d1.iter().all(|x| x.is_zero());
    let have2 = !d2.iter().all(|x| x.is_zero());
    let mut dirs: Vec<Point> = Vec::new();
    if have1 {
        dirs.push(d1);
    }
    if have2 {
        let dref: Vec<&[FieldElem]> = dirs.iter().map(|d| d.as_slice()).collect();
        if !in_span(tower, &dref, &d2) {
            dirs.push(d2);
        }
    }
    // complete with the smallest directions not already in the span
    let total = tower.size_u64(level).expect("desk-scale field").pow(t as u32);
    let mut rank = 1u64;
    while dirs.len() < 2 {
        if rank >= total {
            return Err(Error::DependentDirections);
        }
        let cand = point_from_rank_le(tower, level, t, rank);
        let dref: Vec<&[FieldElem]> = dirs.iter().map(|d| d.as_slice()).collect();
        if !in_span(tower, &dref, &cand) {
            dirs.push(cand);
        }
        rank += 1;
    }
    let plane = canonicalize(tower, &pts[0], &dirs[0], &dirs[1])?;
    for p in points.iter() {
        debug_assert!(plane.contains(tower, p));
    }
    Ok(plane)
}

/// Exact classification of the intersection of two planes in the same
/// ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaneMeet {
    Empty,
    Point(Point),
    Line(AffineLine),
    SamePlane,
}

pub fn intersect(tower: &Tower, a: &AffinePlane, b: &AffinePlane) -> Result<PlaneMeet> {
    if a.arity() != b.arity() {
        return Err(Error::ArityMismatch {
            expected: a.arity(),
            got: b.arity(),
        });
    }
    if a == b {
        return Ok(PlaneMeet::SamePlane);
    }
    let t = a.arity();
    let level = a.level();
    // solve base_a + u d1a + v d2a = base_b + s d1b + w d2b
    // columns: u v s w | rhs
    let mut m: Vec<Vec<FieldElem>> = (0..t)
        .map(|i| {
            vec![
                a.dir1[i].clone(),
                a.dir2[i].clone(),
                tower.neg(&b.dir1[i]),
                tower.neg(&b.dir2[i]),
                tower.sub(&b.base[i], &a.base[i]).expect("level"),
            ]
        })
        .collect();
    let cols = 4;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if let Some(pr) = (row..t).find(|&i| !m[i][col].is_zero()) {
            m.swap(row, pr);
            let inv = tower.inv(&m[row][col]).expect("nonzero");
            for j in 0..=cols {
                m[row][j] = tower.mul(&m[row][j], &inv).expect("level");
            }
            for i in 0..t {
                if i != row && !m[i][col].is_zero() {
                    let f = m[i][col].clone();
                    for j in 0..=cols {
                        let s = tower.mul(&f, &m[row][j]).expect("level");
                        m[i][j] = tower.sub(&m[i][j], &s).expect("level");
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
    }
    // consistency: a zero row with nonzero rhs means empty intersection
    for i in row..t {
        if !m[i][cols].is_zero() {
            return Ok(PlaneMeet::Empty);
        }
    }
    let rank = pivots.len();
    let free = cols - rank;
    // particular solution: free vars = 0
    let mut sol = vec![tower.zero(level); cols];
    for &(r, c) in &pivots {
        sol[c] = m[r][cols].clone();
    }
    let pu = sol[0].clone();
    let pv = sol[1].clone();
    let base_pt = a.point_at(tower, &pu, &pv);
    match free {
        0 => Ok(PlaneMeet::Point(base_pt)),
        1 => {
            let free_col = (0..cols)
                .find(|c| !pivots.iter().any(|&(_, pc)| pc == *c))
                .expect("one free column");
            let mut null = vec![tower.zero(level); cols];
            null[free_col] = tower.one(level);
            for &(r, c) in &pivots {
                null[c] = tower.neg(&m[r][free_col]);
            }
            let dir = point_add(
                tower,
                &point_scale(tower, &null[0], &a.dir1),
                &point_scale(tower, &null[1], &a.dir2),
            );
            Ok(PlaneMeet::Line(canonicalize_line(tower, &base_pt, &dir)?))
        }
        2 => Ok(PlaneMeet::SamePlane),
        _ => unreachable!("two independent direction pairs leave at most 2 free columns"),
    }
}
