//! The sub-exponential reduction: a 3SAT formula becomes a homogeneous
//! linear system over variables `A_P[f]`, one for every plane `P` in
//! `R = Par(F³) ∪ P_sat` and every function `f` on `P` of total degree
//! at most `3d`. A satisfying assignment's low-degree extension `g`
//! yields the natural assignment `⟨g⟩`, which satisfies every
//! constraint and, after the per-plane Hadamard rotation and the
//! `|R|^{-1/p}` weighting, has ℓp norm exactly 1.
//!
//! Instances are usually handled implicitly: each plane carries
//! `|F|^{binom(3d+2,2)}` variables, so the lattice is only materialized
//! for micro parameter sets under an explicit cap.

use crate::ff::{FieldElem, Tower};
use crate::geometry::{clause_plane, parallel_planes, AffinePlane, Point};
use crate::lattice::{kernel_basis, BlockSpec, IntMatrix, KernelBasis, ScaledKernelInstance};
use crate::poly::{lde, DegreeKind, FnIndex, MultiPoly, PlaneFamily};
use crate::problem::Formula;
use crate::superassign::{
    check_consistency, check_simple, natural, support_profile, ConsistencyOutcome, PlaneSet,
    SimpleOutcome, SuperAssignment,
};
use crate::{rat_string, Error, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubexpParams {
    pub q: u64,
    /// |H|; H is the first `h_size` field elements.
    pub h_size: u64,
    pub p: u32,
    /// Adds the individual-degree and dummy-variable constraints for
    /// the unique-shortest-vector variant.
    pub usvp: bool,
}

impl SubexpParams {
    /// Paper defaults: `|H| = ⌈n^{1/3}⌉`.
    pub fn for_formula(n: usize, q: u64, p: u32, usvp: bool) -> Self {
        let mut h = 1u64;
        while h * h * h < n as u64 {
            h += 1;
        }
        SubexpParams {
            q,
            h_size: h.max(1),
            p,
            usvp,
        }
    }

    pub fn degree(&self) -> u32 {
        (self.h_size - 1) as u32
    }
}

/// One homogeneous row of the intermediate system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `Σ_f A[p1][f] = Σ_f A[p2][f]`
    Simple { p1: usize, p2: usize },
    /// `Σ_{f(x)=a} A[p1][f] = Σ_{f(x)=a} A[p2][f]`
    Consistency {
        p1: usize,
        p2: usize,
        point: Point,
        value: FieldElem,
    },
    /// `A[plane][f] = 0`
    Elim { plane: usize, f: FnIndex },
}

/// Per-class constraint counts; elimination classes are closed-form
/// exact values (they are astronomically large at real parameters).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintCounts {
    pub simple: u64,
    pub consistency: u64,
    pub sat3: BigUint,
    pub usvp_degree: BigUint,
    pub usvp_dummy: BigUint,
}

/// The instantiated reduction: plane family, function family, variable
/// indexing, constraint streams, verification, and materialization.
pub struct SubexpReduction {
    params: SubexpParams,
    tower: Tower,
    formula: Formula,
    h: Vec<FieldElem>,
    set: PlaneSet,
    /// Index into `set.planes()` of each clause's plane.
    clause_plane_idx: Vec<usize>,
    /// Indices of the axis-parallel planes within the set.
    parallel_idx: Vec<usize>,
    var_points: Vec<Point>,
    dummy_points: Vec<Point>,
}

impl SubexpReduction {
    pub fn new(formula: Formula, params: SubexpParams) -> Result<Self> {
        let tower = Tower::new(params.q, 0)?;
        if params.p <= 2 {
            return Err(Error::BadNormIndex(params.p as u64));
        }
        if params.h_size == 0 || params.h_size > params.q {
            return Err(Error::BadParams(format!(
                "need 1 <= |H| <= q, got |H| = {}, q = {}",
                params.h_size, params.q
            )));
        }
        let d = params.degree();
        if 3 * d as u64 >= params.q {
            return Err(Error::BadParams(format!(
                "family degree bound 3d = {} must stay below q = {}",
                3 * d,
                params.q
            )));
        }
        let capacity = params.h_size.pow(3);
        if (formula.num_vars as u64) > capacity {
            return Err(Error::CapExceeded {
                what: "variable capacity |H|^3",
                value: formula.num_vars.to_string(),
                cap: capacity.to_string(),
            });
        }
        let h: Vec<FieldElem> = tower.enumerate(0)?.take(params.h_size as usize).collect();
        // mixed-radix base-|H| variable placement, coordinate 0 least
        // significant
        let point_of = |i: u64| -> Point {
            let hs = params.h_size;
            vec![
                h[(i % hs) as usize].clone(),
                h[((i / hs) % hs) as usize].clone(),
                h[((i / (hs * hs)) % hs) as usize].clone(),
            ]
        };
        let var_points: Vec<Point> = (0..formula.num_vars as u64).map(point_of).collect();
        // uSVP mode pads the mapping to a bijection with H^3; the extra
        // points are pinned to 0 by elimination rows
        let dummy_points: Vec<Point> = if params.usvp {
            (formula.num_vars as u64..capacity).map(point_of).collect()
        } else {
            Vec::new()
        };
        let mut planes = parallel_planes(&tower, 0, 3)?;
        let mut clause_planes = Vec::with_capacity(formula.clauses.len());
        for c in &formula.clauses {
            let [i, j, k] = c.vars();
            let pts = [
                var_points[i].clone(),
                var_points[j].clone(),
                var_points[k].clone(),
            ];
            clause_planes.push(clause_plane(&tower, &pts)?);
        }
        planes.extend(clause_planes.iter().cloned());
        let set = PlaneSet::custom(&tower, planes, DegreeKind::Total, 3 * d)?;
        let clause_plane_idx = clause_planes
            .iter()
            .map(|p| set.plane_index(p).expect("clause plane is in the set"))
            .collect();
        let parallel_idx = parallel_planes(&tower, 0, 3)?
            .iter()
            .map(|p| set.plane_index(p).expect("parallel plane is in the set"))
            .collect();
        Ok(SubexpReduction {
            params,
            tower,
            formula,
            h,
            set,
            clause_plane_idx,
            parallel_idx,
            var_points,
            dummy_points,
        })
    }

    pub fn params(&self) -> &SubexpParams {
        &self.params
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn plane_set(&self) -> &PlaneSet {
        &self.set
    }

    pub fn planes(&self) -> &[AffinePlane] {
        self.set.planes()
    }

    pub fn family(&self) -> &PlaneFamily {
        self.set.family()
    }

    pub fn var_points(&self) -> &[Point] {
        &self.var_points
    }

    pub fn dummy_points(&self) -> &[Point] {
        &self.dummy_points
    }

    /// Total variable count `Σ_P |family|`, closed form.
    pub fn variable_count(&self) -> BigUint {
        BigUint::from(self.planes().len() as u64) * self.family().count()
    }

    /// `|R| · q^{binom(3d+2, 2)}`: the printed closed form, which must
    /// agree with [`SubexpReduction::variable_count`] whenever q > 3d.
    pub fn variable_count_formula(&self) -> BigUint {
        let d3 = 3 * self.params.degree() as u64;
        let exp = (d3 + 2) * (d3 + 1) / 2;
        BigUint::from(self.planes().len() as u64)
            * BigUint::from(self.params.q).pow(exp as u32)
    }

    /// Variable count by actually walking the per-plane function
    /// streams; micro parameters only.
    pub fn variable_count_streamed(&self, cap: u64) -> Result<BigUint> {
        let per_plane = self.family().count_u64().filter(|&c| c <= cap).ok_or(
            Error::CapExceeded {
                what: "per-plane family stream",
                value: self.family().count().to_string(),
                cap: cap.to_string(),
            },
        )?;
        let mut total = BigUint::zero();
        for _ in self.planes() {
            let streamed = self
                .family()
                .stream_range(&self.tower, 0, per_plane)
                .count() as u64;
            total += BigUint::from(streamed);
        }
        Ok(total)
    }

    /// Anchor-paired sum rows, in canonical order (the anchor is the
    /// canonically smallest plane).
    pub fn stream_simple(&self) -> Vec<Constraint> {
        (1..self.planes().len())
            .map(|j| Constraint::Simple { p1: 0, p2: j })
            .collect()
    }

    /// One row per (intersecting pair, shared point, field value), in
    /// canonical (pair, point, value) order.
    pub fn stream_consistency(&self) -> Result<Vec<Constraint>> {
        use crate::geometry::{intersect, PlaneMeet};
        let mut out = Vec::new();
        let planes = self.planes();
        let values: Vec<FieldElem> = self.tower.enumerate(0)?.collect();
        for i in 0..planes.len() {
            for j in (i + 1)..planes.len() {
                let shared: Vec<Point> = match intersect(&self.tower, &planes[i], &planes[j])? {
                    PlaneMeet::Empty | PlaneMeet::SamePlane => continue,
                    PlaneMeet::Point(p) => vec![p],
                    PlaneMeet::Line(l) => l.points(&self.tower),
                };
                for x in shared {
                    for a in &values {
                        out.push(Constraint::Consistency {
                            p1: i,
                            p2: j,
                            point: x.clone(),
                            value: a.clone(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Is the family member `f` killed by the 3SAT rows of `clause`?
    /// True when some value at the clause's variable points is
    /// non-boolean, or the induced boolean triple falsifies the clause.
    pub fn sat3_eliminates(&self, clause: usize, f: &MultiPoly) -> Result<bool> {
        let c = &self.formula.clauses[clause];
        let plane = &self.planes()[self.clause_plane_idx[clause]];
        let mut vals = [false; 3];
        for (slot, var) in c.vars().into_iter().enumerate() {
            let x = &self.var_points[var];
            let (u, v) = plane
                .coords_of(&self.tower, x)
                .expect("clause plane contains its points");
            let value = f.eval(&self.tower, &[u, v])?;
            match value.prime_value() {
                Some(0) => vals[slot] = false,
                Some(1) => vals[slot] = true,
                _ => return Ok(true),
            }
        }
        let satisfied = c
            .lits
            .iter()
            .zip(vals)
            .any(|(&lit, v)| if lit > 0 { v } else { !v });
        Ok(!satisfied)
    }

    /// uSVP extra rows on a parallel plane: individual degree above `d`.
    pub fn usvp_degree_eliminates(&self, f: &MultiPoly) -> bool {
        f.individual_degree() > self.params.degree()
    }

    /// uSVP dummy rows: the value at a padded point must be zero.
    pub fn usvp_dummy_eliminates(
        &self,
        plane: &AffinePlane,
        dummy: &Point,
        f: &MultiPoly,
    ) -> Result<bool> {
        let (u, v) = plane
            .coords_of(&self.tower, dummy)
            .expect("plane contains the dummy point");
        Ok(!f.eval(&self.tower, &[u, v])?.is_zero())
    }

    /// Exact per-class row counts. Elimination counts go through the
    /// rank of the evaluation map: a value combination in the image has
    /// a fiber of size `q^{slots - rank}`.
    pub fn constraint_counts(&self) -> Result<ConstraintCounts> {
        let simple = (self.planes().len() - 1) as u64;
        let consistency = self.stream_consistency()?.len() as u64;
        let fam_count = self.family().count();
        let mut sat3 = BigUint::zero();
        // group clauses by their (deduplicated) plane: a function on a
        // shared plane is killed once even if several clauses kill it
        let mut by_plane: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (ci, &pi) in self.clause_plane_idx.iter().enumerate() {
            by_plane.entry(pi).or_default().push(ci);
        }
        for (&pi, clauses) in &by_plane {
            sat3 += &fam_count - self.kept_count_on_plane(pi, clauses)?;
        }
        let mut usvp_degree = BigUint::zero();
        let mut usvp_dummy = BigUint::zero();
        if self.params.usvp {
            // kept on a parallel plane: ideg <= d within the family
            let d = self.params.degree();
            let kept_slots = self
                .family()
                .monomials()
                .iter()
                .filter(|&&(eu, ev)| eu <= d && ev <= d)
                .count() as u32;
            let per_plane = &fam_count - BigUint::from(self.params.q).pow(kept_slots);
            usvp_degree = per_plane * BigUint::from(self.parallel_idx.len() as u64);
            // single-point evaluation has rank 1 (the constants hit
            // every value), so the zero fiber is fam/q
            let nonzero_per_plane = &fam_count - &fam_count / BigUint::from(self.params.q);
            usvp_dummy = nonzero_per_plane * BigUint::from((3 * self.dummy_points.len()) as u64);
        }
        Ok(ConstraintCounts {
            simple,
            consistency,
            sat3,
            usvp_degree,
            usvp_dummy,
        })
    }

    /// Family members on a plane that survive all the listed clauses'
    /// rows, counted through the linear evaluation map at the distinct
    /// clause points.
    fn kept_count_on_plane(&self, plane_idx: usize, clauses: &[usize]) -> Result<BigUint> {
        let plane = &self.planes()[plane_idx];
        let monomials = self.family().monomials();
        let mut points: Vec<Point> = Vec::new();
        let mut clause_slots: Vec<[usize; 3]> = Vec::new();
        for &ci in clauses {
            let mut slots = [0usize; 3];
            for (k, var) in self.formula.clauses[ci].vars().into_iter().enumerate() {
                let pt = &self.var_points[var];
                let pos = match points.iter().position(|p| p == pt) {
                    Some(pos) => pos,
                    None => {
                        points.push(pt.clone());
                        points.len() - 1
                    }
                };
                slots[k] = pos;
            }
            clause_slots.push(slots);
        }
        // evaluation matrix: rows = points, cols = family monomials
        let rows: Vec<Vec<FieldElem>> = points
            .iter()
            .map(|x| {
                let (u, v) = plane
                    .coords_of(&self.tower, x)
                    .expect("clause plane contains its points");
                monomials
                    .iter()
                    .map(|&(eu, ev)| {
                        self.tower
                            .mul(
                                &self.tower.pow_u64(&u, eu as u64),
                                &self.tower.pow_u64(&v, ev as u64),
                            )
                            .expect("level")
                    })
                    .collect()
            })
            .collect();
        let rank = field_rank(&self.tower, &rows);
        let mut kept = BigUint::zero();
        let fiber = BigUint::from(self.params.q).pow((monomials.len() - rank) as u32);
        let npts = points.len();
        let mut combo = vec![0u8; npts];
        loop {
            let all_ok = clause_slots.iter().enumerate().all(|(k, slots)| {
                let c = &self.formula.clauses[clauses[k]];
                c.lits
                    .iter()
                    .zip(slots)
                    .any(|(&lit, &s)| if lit > 0 { combo[s] == 1 } else { combo[s] == 0 })
            });
            if all_ok {
                let rhs: Vec<FieldElem> = combo
                    .iter()
                    .map(|&b| self.tower.from_base(0, b as u64))
                    .collect();
                if field_system_consistent(&self.tower, &rows, &rhs) {
                    kept += &fiber;
                }
            }
            let mut k = 0;
            loop {
                if k == npts {
                    return Ok(kept);
                }
                combo[k] += 1;
                if combo[k] < 2 {
                    break;
                }
                combo[k] = 0;
                k += 1;
            }
        }
    }

    /// Builds the low-degree witness extension: the table maps each
    /// variable's grid point to its boolean value and everything else
    /// (including uSVP dummies) to zero.
    pub fn witness_poly(&self, assignment: &[bool]) -> Result<MultiPoly> {
        if assignment.len() != self.formula.num_vars {
            return Err(Error::BadParams(format!(
                "witness has {} values for {} variables",
                assignment.len(),
                self.formula.num_vars
            )));
        }
        let hs = self.params.h_size as usize;
        let mut table: BTreeMap<Vec<usize>, FieldElem> = BTreeMap::new();
        for a in 0..hs {
            for b in 0..hs {
                for c in 0..hs {
                    table.insert(vec![a, b, c], self.tower.zero(0));
                }
            }
        }
        for (i, &val) in assignment.iter().enumerate() {
            let hs64 = self.params.h_size;
            let i = i as u64;
            let key = vec![
                (i % hs64) as usize,
                ((i / hs64) % hs64) as usize,
                ((i / (hs64 * hs64)) % hs64) as usize,
            ];
            table.insert(key, self.tower.from_base(0, val as u64));
        }
        lde(&self.tower, 0, 3, &self.h, &table)
    }

    /// Streams every constraint against `⟨g⟩` built from the witness,
    /// without materializing the lattice, and evaluates the exact norm.
    ///
    /// Sum rows are checked by the plane-sum and pointwise partial-sum
    /// scans; an elimination row `A_P[f] = 0` is violated exactly when
    /// an eliminated `f` carries a nonzero entry, so those classes walk
    /// each constrained plane's support against the class predicate.
    pub fn verify_natural(&self, assignment: &[bool]) -> Result<VerifyReport> {
        let g = self.witness_poly(assignment)?;
        let nat = natural(&self.set, &g)?;
        let mut violations: Vec<String> = Vec::new();
        let kappa = match check_simple(&self.set, &nat) {
            SimpleOutcome::Kappa(k) => Some(k),
            SimpleOutcome::Violation { p1, p2 } => {
                violations.push(format!("simple row violated between planes {p1} and {p2}"));
                None
            }
        };
        if let ConsistencyOutcome::Violation {
            p1,
            p2,
            point,
            value,
        } = check_consistency(&self.set, &nat)?
        {
            violations.push(format!(
                "consistency row violated: planes {p1}, {p2} at {point:?} value {value:?}"
            ));
        }
        let by_plane = nat.by_plane();
        let decoded: BTreeMap<usize, Vec<(MultiPoly, BigInt)>> = by_plane
            .iter()
            .map(|(p, fns)| {
                let v = fns
                    .iter()
                    .map(|(idx, val)| Ok((self.family().poly_at(&self.tower, idx)?, val.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Ok((*p, v))
            })
            .collect::<Result<_>>()?;
        for (ci, &pi) in self.clause_plane_idx.iter().enumerate() {
            for (f, _) in decoded.get(&pi).map(|v| v.as_slice()).unwrap_or(&[]) {
                if self.sat3_eliminates(ci, f)? {
                    violations.push(format!("3SAT row violated: clause {ci} on plane {pi}"));
                }
            }
        }
        if self.params.usvp {
            for &pi in &self.parallel_idx {
                let plane = &self.planes()[pi];
                for (f, _) in decoded.get(&pi).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if self.usvp_degree_eliminates(f) {
                        violations.push(format!(
                            "individual-degree row violated on parallel plane {pi}"
                        ));
                    }
                    for (di, dummy) in self.dummy_points.iter().enumerate() {
                        if plane.contains(&self.tower, dummy)
                            && self.usvp_dummy_eliminates(plane, dummy, f)?
                        {
                            violations
                                .push(format!("dummy row violated: dummy {di} on plane {pi}"));
                        }
                    }
                }
            }
        }
        let norm_pow = self.norm_pow(&nat)?;
        let profile = support_profile(&self.set, &nat);
        Ok(VerifyReport {
            all_passed: violations.is_empty(),
            kappa,
            norm_pow,
            violations,
            max_support: profile.max_support,
            counts: self.constraint_counts()?,
        })
    }

    /// Exact block-scaled norm of a sparse assignment over this
    /// reduction's layout: uniform block weight `|R|^{-1/p}`.
    pub fn norm_pow(&self, a: &SuperAssignment) -> Result<Rat> {
        let w_pow = Rat::new(BigInt::one(), BigInt::from(self.planes().len() as u64));
        let mut acc = Rat::zero();
        for (_, fns) in a.by_plane() {
            let (cols, vals): (Vec<FnIndex>, Vec<BigInt>) = fns.into_iter().unzip();
            acc += &w_pow * crate::lattice::block_norm_pow_over_m(&cols, &vals, self.params.p)?;
        }
        Ok(acc)
    }

    /// Diagnostic from the soundness argument's "bad planes" set:
    /// (zero planes, signed-unit planes, anything else). Nothing is
    /// asserted about it.
    pub fn plane_unit_profile(&self, a: &SuperAssignment) -> (usize, usize, usize) {
        let by_plane = a.by_plane();
        let mut zeros = 0;
        let mut units = 0;
        let mut bad = 0;
        for pi in 0..self.planes().len() {
            match by_plane.get(&pi) {
                None => zeros += 1,
                Some(fns) => {
                    if fns.len() == 1 && *fns[0].1.magnitude() == BigUint::one() {
                        units += 1;
                    } else {
                        bad += 1;
                    }
                }
            }
        }
        (zeros, units, bad)
    }

    /// Materializes the full constraint matrix and its kernel. Only
    /// valid when the variable count fits under `cap`; otherwise the
    /// reported error carries the closed-form size.
    pub fn build_instance(&self, cap: u64) -> Result<ScaledKernelInstance> {
        let total = self.variable_count().to_u64().filter(|&t| t <= cap);
        let Some(total) = total else {
            return Err(Error::CapExceeded {
                what: "materialized variable count (size 2^O(n^{2/3} log n))",
                value: self.variable_count().to_string(),
                cap: cap.to_string(),
            });
        };
        let per_plane = self.family().count_u64().expect("fits: total does");
        let planes = self.planes();
        let var_of = |plane: usize, f: u64| -> usize { plane * per_plane as usize + f as usize };
        let mut rows: Vec<Vec<(usize, BigInt)>> = Vec::new();
        for c in self.stream_simple() {
            let Constraint::Simple { p1, p2 } = c else {
                unreachable!()
            };
            let mut row = Vec::with_capacity(2 * per_plane as usize);
            for f in 0..per_plane {
                row.push((var_of(p1, f), BigInt::one()));
            }
            for f in 0..per_plane {
                row.push((var_of(p2, f), -BigInt::one()));
            }
            rows.push(row);
        }
        for c in self.stream_consistency()? {
            let Constraint::Consistency {
                p1,
                p2,
                point,
                value,
            } = c
            else {
                unreachable!()
            };
            let mut row = Vec::new();
            for (pi, sign) in [(p1, 1i64), (p2, -1i64)] {
                let plane = &planes[pi];
                let (u, v) = plane
                    .coords_of(&self.tower, &point)
                    .expect("intersection point is on both planes");
                for (fidx, f) in self.family().stream_range(&self.tower, 0, per_plane) {
                    if f.eval(&self.tower, &[u.clone(), v.clone()])? == value {
                        row.push((var_of(pi, fidx.to_u64().unwrap()), BigInt::from(sign)));
                    }
                }
            }
            rows.push(row);
        }
        // elimination classes, in (3sat, usvp-degree, usvp-dummy) order
        for (ci, &pi) in self.clause_plane_idx.iter().enumerate() {
            for (fidx, f) in self.family().stream_range(&self.tower, 0, per_plane) {
                if self.sat3_eliminates(ci, &f)? {
                    rows.push(vec![(var_of(pi, fidx.to_u64().unwrap()), BigInt::one())]);
                }
            }
        }
        if self.params.usvp {
            for &pi in &self.parallel_idx {
                for (fidx, f) in self.family().stream_range(&self.tower, 0, per_plane) {
                    if self.usvp_degree_eliminates(&f) {
                        rows.push(vec![(var_of(pi, fidx.to_u64().unwrap()), BigInt::one())]);
                    }
                }
            }
            for dummy in &self.dummy_points {
                for &pi in &self.parallel_idx {
                    let plane = &planes[pi];
                    if !plane.contains(&self.tower, dummy) {
                        continue;
                    }
                    for (fidx, f) in self.family().stream_range(&self.tower, 0, per_plane) {
                        if self.usvp_dummy_eliminates(plane, dummy, &f)? {
                            rows.push(vec![(var_of(pi, fidx.to_u64().unwrap()), BigInt::one())]);
                        }
                    }
                }
            }
        }
        let mut matrix = IntMatrix::new(rows.len(), total as usize);
        for (ri, row) in rows.iter().enumerate() {
            for (col, val) in row {
                matrix.add_to(ri, *col, val);
            }
        }
        let kernel: KernelBasis = kernel_basis(&matrix);
        let w_pow = Rat::new(BigInt::one(), BigInt::from(planes.len() as u64));
        let blocks: Vec<BlockSpec> = (0..planes.len())
            .map(|pi| BlockSpec {
                id: format!("plane{pi}"),
                n: per_plane,
                weight_pow: w_pow.clone(),
            })
            .collect();
        ScaledKernelInstance::new(self.params.p, Rat::one(), blocks, kernel)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub all_passed: bool,
    pub kappa: Option<BigInt>,
    pub norm_pow: Rat,
    pub violations: Vec<String>,
    pub max_support: usize,
    pub counts: ConstraintCounts,
}

impl VerifyReport {
    pub fn norm_string(&self) -> String {
        rat_string(&self.norm_pow)
    }
}

fn field_rank(tower: &Tower, rows: &[Vec<FieldElem>]) -> usize {
    let mut m: Vec<Vec<FieldElem>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        if let Some(pr) = (rank..nrows).find(|&i| !m[i][col].is_zero()) {
            m.swap(rank, pr);
            let inv = tower.inv(&m[rank][col]).expect("nonzero pivot");
            for j in 0..ncols {
                m[rank][j] = tower.mul(&m[rank][j], &inv).expect("level");
            }
            for i in 0..nrows {
                if i != rank && !m[i][col].is_zero() {
                    let f = m[i][col].clone();
                    for j in 0..ncols {
                        let s = tower.mul(&f, &m[rank][j]).expect("level");
                        m[i][j] = tower.sub(&m[i][j], &s).expect("level");
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

fn field_system_consistent(tower: &Tower, rows: &[Vec<FieldElem>], rhs: &[FieldElem]) -> bool {
    let mut m: Vec<Vec<FieldElem>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let nrows = m.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        if let Some(pr) = (rank..nrows).find(|&i| !m[i][col].is_zero()) {
            m.swap(rank, pr);
            let inv = tower.inv(&m[rank][col]).expect("nonzero pivot");
            for j in 0..=ncols {
                m[rank][j] = tower.mul(&m[rank][j], &inv).expect("level");
            }
            for i in 0..nrows {
                if i != rank && !m[i][col].is_zero() {
                    let f = m[i][col].clone();
                    for j in 0..=ncols {
                        let s = tower.mul(&f, &m[rank][j]).expect("level");
                        m[i][j] = tower.sub(&m[i][j], &s).expect("level");
                    }
                }
            }
            rank += 1;
        }
    }
    (rank..nrows).all(|i| m[i][ncols].is_zero())
}
