//! The Plane-vs-Plane graph: vertices are affine planes, edges connect
//! planes whose intersection is an affine line. Edge expansion is counted
//! exactly as a rational.

use super::{intersect, AffinePlane, PlaneMeet};
use crate::ff::Tower;
use crate::{Error, Rat, Result};
use num_bigint::BigInt;

/// All unordered line-intersecting pairs among `planes`.
pub fn pvp_edges(tower: &Tower, planes: &[AffinePlane]) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for i in 0..planes.len() {
        for j in (i + 1)..planes.len() {
            if let PlaneMeet::Line(_) = intersect(tower, &planes[i], &planes[j])? {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

pub fn degrees(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut deg = vec![0usize; n];
    for &(i, j) in edges {
        deg[i] += 1;
        deg[j] += 1;
    }
    deg
}

/// Exact edge expansion `Φ(S)`: the probability that a random edge
/// leaving a vertex of `S` escapes to the complement.
pub fn edge_expansion(n: usize, edges: &[(usize, usize)], in_s: &[bool]) -> Result<Rat> {
    assert_eq!(in_s.len(), n);
    if !in_s.iter().any(|&b| b) {
        return Err(Error::EmptySubset);
    }
    let mut from_s: u64 = 0;
    let mut escaping: u64 = 0;
    for &(i, j) in edges {
        if in_s[i] {
            from_s += 1;
            if !in_s[j] {
                escaping += 1;
            }
        }
        if in_s[j] {
            from_s += 1;
            if !in_s[i] {
                escaping += 1;
            }
        }
    }
    if from_s == 0 {
        // isolated subset: every (zero) edge escapes vacuously; treat as 1
        // to match the convention that singletons in a loopless graph
        // expand fully. Does not occur on full PvP families.
        return Ok(Rat::from_integer(BigInt::from(1)));
    }
    Ok(Rat::new(BigInt::from(escaping), BigInt::from(from_s)))
}

/// Sampled estimate of `Φ(S)` for plane families too large to
/// enumerate: draws random ordered plane pairs from the space, keeps
/// the line-intersecting ones leaving `S`, and reports the observed
/// escape fraction. An estimate, never a proof.
pub fn edge_expansion_estimate(
    space: &super::PlaneSpace,
    in_s: &dyn Fn(u64) -> bool,
    samples: u64,
    seed: u64,
) -> Result<Rat> {
    if samples == 0 {
        return Err(Error::EmptySubset);
    }
    // simple deterministic splitmix generator; sampling quality is not
    // load-bearing for an estimate
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let tower = space.tower().clone();
    let n = space.count();
    let mut kept = 0u64;
    let mut escaping = 0u64;
    let mut budget = samples.saturating_mul(1000);
    while kept < samples {
        if budget == 0 {
            return Err(Error::CapExceeded {
                what: "edge sampling attempts",
                value: "exhausted".into(),
                cap: (samples * 1000).to_string(),
            });
        }
        budget -= 1;
        let a = next() % n;
        if !in_s(a) {
            continue;
        }
        let b = next() % n;
        if a == b {
            continue;
        }
        let pa = space.plane(a);
        let pb = space.plane(b);
        if let PlaneMeet::Line(_) = intersect(&tower, &pa, &pb)? {
            kept += 1;
            if !in_s(b) {
                escaping += 1;
            }
        }
    }
    Ok(Rat::new(BigInt::from(escaping), BigInt::from(kept)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_planes;
    use num_traits::{One, Zero};

    #[test]
    fn pvp_graph_is_regular_without_self_loops() {
        let tower = Tower::new(3, 0).unwrap();
        let planes = enumerate_planes(&tower, 0, 3, 1000).unwrap();
        assert_eq!(planes.len(), 39);
        let edges = pvp_edges(&tower, &planes).unwrap();
        for &(i, j) in &edges {
            assert_ne!(i, j);
        }
        let deg = degrees(planes.len(), &edges);
        let d0 = deg[0];
        assert!(deg.iter().all(|&d| d == d0), "PvP graph must be regular");
        assert!(d0 > 0);
    }

    #[test]
    fn expansion_extremes() {
        let tower = Tower::new(3, 0).unwrap();
        let planes = enumerate_planes(&tower, 0, 3, 1000).unwrap();
        let edges = pvp_edges(&tower, &planes).unwrap();
        let all = vec![true; planes.len()];
        assert!(edge_expansion(planes.len(), &edges, &all).unwrap().is_zero());
        let mut single = vec![false; planes.len()];
        single[7] = true;
        assert!(edge_expansion(planes.len(), &edges, &single).unwrap().is_one());
        let none = vec![false; planes.len()];
        assert!(matches!(
            edge_expansion(planes.len(), &edges, &none),
            Err(Error::EmptySubset)
        ));
    }
}
