//! Cayley-graph toolbox for the Plane-vs-Plane expansion bound.
//!
//! Vertices are triplets `(s, x1, x2)` of vectors in `F_q^t` (prime q);
//! a step samples `y ∈ F_q^t` and `α, β, γ ∈ F_q` and moves to
//! `(s + αy, x1 + βy, x2 + γy)`. Characters are eigenvectors, with the
//! closed-form eigenvalue `q^{-rank(s; x1; x2)}`. Everything here is
//! counted exactly; no operator is ever materialized as a dense matrix.

use super::{canonicalize, PlaneSpace};
use crate::ff::Tower;
use crate::{Error, Rat, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed};

/// Walk operator on `(F_q^t)^3` for prime `q`.
pub struct CayleyGraph {
    q: u64,
    t: usize,
}

/// Exact ingredients of the weighted expander mixing inequality
/// `|Φ(S) - 1 + |S|/n| <= λ` for one subset.
#[derive(Clone, Debug)]
pub struct MixingWitness {
    pub phi: Rat,
    pub density: Rat,
    pub lambda: Rat,
    pub holds: bool,
}

impl CayleyGraph {
    pub fn new(tower: &Tower, t: usize) -> Result<Self> {
        if t < 3 {
            return Err(Error::BadParams(format!(
                "Cayley toolbox needs t >= 3, got {t}"
            )));
        }
        Ok(CayleyGraph { q: tower.q(), t })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of vertices, `q^{3t}`.
    pub fn vertex_count(&self) -> u64 {
        self.q.pow(3 * self.t as u32)
    }

    /// Number of walk choices from any vertex, `q^{t+3}`.
    pub fn step_count(&self) -> u64 {
        self.q.pow(self.t as u32 + 3)
    }

    /// Coordinate-major rank codec: the triplet is flattened
    /// `s || x1 || x2`, first coordinate most significant.
    pub fn rank_of(&self, triplet: &[u64]) -> u64 {
        debug_assert_eq!(triplet.len(), 3 * self.t);
        triplet.iter().fold(0u64, |acc, &c| acc * self.q + c)
    }

    pub fn triplet_of(&self, mut rank: u64) -> Vec<u64> {
        let n = 3 * self.t;
        let mut out = vec![0u64; n];
        for i in (0..n).rev() {
            out[i] = rank % self.q;
            rank /= self.q;
        }
        out
    }

    /// Rank of the 3×t matrix over F_q whose rows are `s, x1, x2`.
    pub fn span_rank(&self, triplet: &[u64]) -> usize {
        let q = self.q;
        let mut rows: Vec<Vec<u64>> = (0..3)
            .map(|r| triplet[r * self.t..(r + 1) * self.t].to_vec())
            .collect();
        let mut rank = 0;
        for col in 0..self.t {
            if let Some(pr) = (rank..3).find(|&i| rows[i][col] != 0) {
                rows.swap(rank, pr);
                let inv = mod_inv(rows[rank][col], q);
                for j in col..self.t {
                    rows[rank][j] = rows[rank][j] * inv % q;
                }
                for i in 0..3 {
                    if i != rank && rows[i][col] != 0 {
                        let f = rows[i][col];
                        for j in col..self.t {
                            rows[i][j] = (rows[i][j] + (q - f) * rows[rank][j]) % q;
                        }
                    }
                }
                rank += 1;
                if rank == 3 {
                    break;
                }
            }
        }
        rank
    }

    /// Closed-form eigenvalue of the character `χ_x`: `q^{-rank}`.
    pub fn eigenvalue(&self, triplet: &[u64]) -> Rat {
        let r = self.span_rank(triplet);
        Rat::new(BigInt::one(), BigInt::from(self.q.pow(r as u32)))
    }

    /// Largest nontrivial |eigenvalue|: the closed form `q^{-rank}` is
    /// maximized at rank 1, so `λ = 1/q`.
    pub fn lambda(&self) -> Rat {
        Rat::new(BigInt::one(), BigInt::from(self.q))
    }

    fn step_target(&self, v: &[u64], y: &[u64], a: u64, b: u64, c: u64, out: &mut [u64]) {
        let q = self.q;
        let t = self.t;
        for j in 0..t {
            out[j] = (v[j] + a * y[j]) % q;
            out[t + j] = (v[t + j] + b * y[j]) % q;
            out[2 * t + j] = (v[2 * t + j] + c * y[j]) % q;
        }
    }

    /// Walk weight `W[u -> v]`, counted over all `(y, α, β, γ)`.
    pub fn transition_weight(&self, u_rank: u64, v_rank: u64) -> Rat {
        let u = self.triplet_of(u_rank);
        let v = self.triplet_of(v_rank);
        let q = self.q;
        let mut count = 0u64;
        let mut y = vec![0u64; self.t];
        let mut tgt = vec![0u64; 3 * self.t];
        loop {
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        self.step_target(&u, &y, a, b, c, &mut tgt);
                        if tgt == v {
                            count += 1;
                        }
                    }
                }
            }
            if !incr(&mut y, q) {
                break;
            }
        }
        Rat::new(BigInt::from(count), BigInt::from(self.step_count()))
    }

    /// Verifies `W[u -> v] = W[v -> u]` for every supplied pair.
    pub fn check_symmetry(&self, pairs: &[(u64, u64)]) -> Result<()> {
        for &(u, v) in pairs {
            if self.transition_weight(u, v) != self.transition_weight(v, u) {
                return Err(Error::AsymmetricOperator(format!("({u}, {v})")));
            }
        }
        Ok(())
    }

    /// Exact edge expansion of a vertex subset under the walk measure.
    /// `in_s` is indexed by vertex rank.
    pub fn expansion(&self, in_s: &[bool]) -> Result<Rat> {
        assert_eq!(in_s.len(), self.vertex_count() as usize);
        let members: Vec<u64> = (0..self.vertex_count()).filter(|&r| in_s[r as usize]).collect();
        if members.is_empty() {
            return Err(Error::EmptySubset);
        }
        let q = self.q;
        let mut escapes: u64 = 0;
        let mut tgt = vec![0u64; 3 * self.t];
        for &rank in &members {
            let v = self.triplet_of(rank);
            let mut y = vec![0u64; self.t];
            loop {
                for a in 0..q {
                    for b in 0..q {
                        for c in 0..q {
                            self.step_target(&v, &y, a, b, c, &mut tgt);
                            if !in_s[self.rank_of(&tgt) as usize] {
                                escapes += 1;
                            }
                        }
                    }
                }
                if !incr(&mut y, q) {
                    break;
                }
            }
        }
        Ok(Rat::new(
            BigInt::from(escapes),
            BigInt::from(members.len() as u64) * BigInt::from(self.step_count()),
        ))
    }

    /// `S* = {(s, x1, x2) : s + Span(x1, x2) ∈ S}`; triplets with a
    /// dependent pair `(x1, x2)` are excluded. `in_s` is indexed by
    /// plane id in `space`.
    pub fn star_lift(&self, space: &PlaneSpace, in_s: &[bool]) -> Vec<bool> {
        let tower = space.tower().clone();
        let n = self.vertex_count() as usize;
        let mut out = vec![false; n];
        for rank in 0..n as u64 {
            let trip = self.triplet_of(rank);
            if self.span_rank(&pad_base_zero(&trip, self.t)) != 2 {
                continue;
            }
            let to_pt = |off: usize| -> Vec<crate::ff::FieldElem> {
                (0..self.t).map(|j| tower.from_base(0, trip[off + j])).collect()
            };
            let s = to_pt(0);
            let x1 = to_pt(self.t);
            let x2 = to_pt(2 * self.t);
            let Ok(plane) = canonicalize(&tower, &s, &x1, &x2) else {
                continue;
            };
            let id = space.id_of(&plane).expect("plane is in its own space");
            out[rank as usize] = in_s[id as usize];
        }
        out
    }

    /// Mixing inequality `|Φ(S) - 1 + |S|/n| <= λ` with exact Φ.
    pub fn mixing_witness(&self, in_s: &[bool]) -> Result<MixingWitness> {
        let phi = self.expansion(in_s)?;
        let count = in_s.iter().filter(|&&b| b).count();
        let density = Rat::new(BigInt::from(count as u64), BigInt::from(self.vertex_count()));
        let lambda = self.lambda();
        let gap = (phi.clone() - Rat::one() + density.clone()).abs();
        Ok(MixingWitness {
            holds: gap <= lambda,
            phi,
            density,
            lambda,
        })
    }

    /// Verifies, by exhaustive counting over all `(y, α, β, γ)`, that
    /// applying the walk operator to the character `χ_x` at coordinate
    /// `u` reproduces `λ_x · χ_x(u)`.
    ///
    /// The sum `Σ_δ ω^{<x, u+δ>}` is collected as a count vector over
    /// powers of `ω`; in `Z[ω]` (q prime) it equals `q^{t+3-r} ω^{<x,u>}`
    /// iff the counts are that spike plus a constant vector.
    pub fn character_eigen_check(&self, x_rank: u64, u_rank: u64) -> bool {
        let q = self.q;
        let x = self.triplet_of(x_rank);
        let u = self.triplet_of(u_rank);
        let r = self.span_rank(&x) as u32;
        let dot = |a: &[u64], b: &[u64]| -> u64 {
            a.iter().zip(b).map(|(&p, &w)| p * w % q).sum::<u64>() % q
        };
        let mut counts = vec![0u64; q as usize];
        let mut y = vec![0u64; self.t];
        let mut tgt = vec![0u64; 3 * self.t];
        loop {
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        self.step_target(&u, &y, a, b, c, &mut tgt);
                        counts[dot(&x, &tgt) as usize] += 1;
                    }
                }
            }
            if !incr(&mut y, q) {
                break;
            }
        }
        let spike = q.pow(self.t as u32 + 3 - r);
        let base = (self.step_count() - spike) / q;
        let peak = dot(&x, &u) as usize;
        counts
            .iter()
            .enumerate()
            .all(|(i, &cnt)| cnt == base + if i == peak { spike } else { 0 })
    }
}

// span_rank looks at all three rows; for the independence test of
// (x1, x2) we zero out the s row.
fn pad_base_zero(trip: &[u64], t: usize) -> Vec<u64> {
    let mut v = trip.to_vec();
    for c in v.iter_mut().take(t) {
        *c = 0;
    }
    v
}

fn incr(digits: &mut [u64], q: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

fn mod_inv(a: u64, q: u64) -> u64 {
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let d = r0 / r1;
        (r0, r1) = (r1, r0 - d * r1);
        (t0, t1) = (t1, t0 - d * t1);
    }
    (t0.rem_euclid(q as i128)) as u64
}
