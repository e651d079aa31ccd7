//! Graph-pair instances via the disjoint-union reduction.
//!
//! For graphs `A_1`, `A_2` on `n` vertices, form `A = A_1 ⊔ A_2` on `2n`
//! vertices and the permutation set `Y = Q ∪ σQ`, where `Q = S_n × S_n`
//! preserves the two blocks and `σ` swaps them pointwise. The hiding
//! function maps a permutation to the graph it produces from `A`; its value
//! table is constant exactly on right cosets of `K = Aut(A) ∩ Y`. The pair
//! is isomorphic iff `K` reaches into the swapped half, which a single
//! sampled member reveals through its image of vertex 0.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::oracle::{Family, HidingOracle};

/// Undirected simple edge list, zero-based.
pub type EdgeList = Vec<(usize, usize)>;

#[derive(Debug, Clone)]
pub struct GraphPair {
    n: usize,
    edges_1: EdgeList,
    edges_2: EdgeList,
    /// All permutations of `Y` as flat tables, stride `2n`, `Q` half first
    /// in lexicographic order.
    perms: Vec<u8>,
    oracle: HidingOracle,
}

impl GraphPair {
    pub fn vertices_per_graph(&self) -> usize {
        self.n
    }

    pub fn edges_1(&self) -> &EdgeList {
        &self.edges_1
    }

    pub fn edges_2(&self) -> &EdgeList {
        &self.edges_2
    }

    /// `|Y| = 2 (n!)^2`.
    pub fn y_size(&self) -> usize {
        self.oracle.domain_size()
    }

    pub fn oracle(&self) -> &HidingOracle {
        &self.oracle
    }

    /// The permutation behind register index `j`, as a table on `0..2n`.
    pub fn permutation(&self, j: usize) -> &[u8] {
        let w = 2 * self.n;
        &self.perms[j * w..(j + 1) * w]
    }

    /// True when `π_j` lies in the block-swapping half `σQ`.
    pub fn in_swap_half(&self, j: usize) -> bool {
        (self.permutation(j)[0] as usize) >= self.n
    }

    /// True when `π_j` fixes the union graph, i.e. belongs to `K`.
    pub fn is_automorphism(&self, j: usize) -> bool {
        self.oracle.value(j) == 1
    }

    /// Register indices of `K = Aut(A) ∩ Y`.
    pub fn automorphism_members(&self) -> Vec<usize> {
        (0..self.y_size())
            .filter(|&j| self.is_automorphism(j))
            .collect()
    }

    /// Restriction of a swap-half automorphism to a bijection `A_1 -> A_2`,
    /// zero-based on both sides.
    pub fn witness_from(&self, j: usize) -> Option<Vec<usize>> {
        if !self.is_automorphism(j) || !self.in_swap_half(j) {
            return None;
        }
        Some(
            (0..self.n)
                .map(|v| self.permutation(j)[v] as usize - self.n)
                .collect(),
        )
    }
}

fn validate_edges(n: usize, edges: &EdgeList, which: &str) -> Result<EdgeList> {
    let mut seen = Vec::new();
    for &(u, v) in edges {
        if u == v {
            return Err(Error::InvalidInstance(format!(
                "self-loop ({u},{v}) in {which}"
            )));
        }
        if u >= n || v >= n {
            return Err(Error::InvalidInstance(format!(
                "edge ({u},{v}) outside vertex range of {which} (n = {n})"
            )));
        }
        let e = (u.min(v), u.max(v));
        if !seen.contains(&e) {
            seen.push(e);
        }
    }
    seen.sort_unstable();
    Ok(seen)
}

/// Bit position of the unordered pair `(u, v)` among all pairs of `0..2n`.
fn pair_bit(u: usize, v: usize, two_n: usize) -> u32 {
    let (a, b) = (u.min(v), u.max(v));
    // Pairs enumerated row by row: (0,1), (0,2), ..., (1,2), ...
    (a * (2 * two_n - a - 1) / 2 + (b - a - 1)) as u32
}

fn graph_bits(edges: &[(usize, usize)], two_n: usize) -> u64 {
    edges
        .iter()
        .fold(0u64, |acc, &(u, v)| acc | 1 << pair_bit(u, v, two_n))
}

/// Compile a pair of graphs into a hiding oracle over `Y`.
///
/// Values are dense first-occurrence ids starting at 1, with the identity's
/// image (the union graph itself) pinned to 1 so the automorphism coset sits
/// at the spectrum minimum.
pub fn build_gip(n: usize, edges_1: &EdgeList, edges_2: &EdgeList) -> Result<GraphPair> {
    if n == 0 || n > 5 {
        return Err(Error::InvalidInstance(format!(
            "vertex count {n} outside supported range 1..=5"
        )));
    }
    let edges_1 = validate_edges(n, edges_1, "first graph")?;
    let edges_2 = validate_edges(n, edges_2, "second graph")?;

    let two_n = 2 * n;
    let union_edges: Vec<(usize, usize)> = edges_1
        .iter()
        .copied()
        .chain(edges_2.iter().map(|&(u, v)| (u + n, v + n)))
        .collect();
    let adjacency = graph_bits(&union_edges, two_n);

    let block_perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let factorial = block_perms.len();
    let y_size = 2 * factorial * factorial;

    let mut perms = Vec::with_capacity(y_size * two_n);
    for swap in [false, true] {
        for p in &block_perms {
            for q in &block_perms {
                for v in 0..two_n {
                    let mapped = if v < n { p[v] } else { n + q[v - n] };
                    let mapped = if swap { (mapped + n) % two_n } else { mapped };
                    perms.push(mapped as u8);
                }
            }
        }
    }

    let mut ids: HashMap<u64, u64> = HashMap::new();
    ids.insert(adjacency, 1);
    let mut next_id = 2u64;
    let mut values = Vec::with_capacity(y_size);
    for j in 0..y_size {
        let table = &perms[j * two_n..(j + 1) * two_n];
        let image = union_edges.iter().fold(0u64, |acc, &(u, v)| {
            acc | 1 << pair_bit(table[u] as usize, table[v] as usize, two_n)
        });
        let id = *ids.entry(image).or_insert_with(|| {
            let id = next_id;
            next_id += 1;
            id
        });
        values.push(id);
    }

    let oracle = HidingOracle::new(values, Family::Gip)?;
    Ok(GraphPair {
        n,
        edges_1,
        edges_2,
        perms,
        oracle,
    })
}

/// Exhaustive isomorphism test over all `n!` bijections; returns the first
/// witness in lexicographic order when the graphs are isomorphic.
pub fn brute_iso(n: usize, edges_1: &EdgeList, edges_2: &EdgeList) -> Result<Option<Vec<usize>>> {
    if n > 8 {
        return Err(Error::BudgetExceeded(format!(
            "brute isomorphism limited to n <= 8, got {n}"
        )));
    }
    let edges_1 = validate_edges(n, edges_1, "first graph")?;
    let edges_2 = validate_edges(n, edges_2, "second graph")?;
    if edges_1.len() != edges_2.len() {
        return Ok(None);
    }
    let target = graph_bits(&edges_2, n.max(2));
    for rho in (0..n).permutations(n) {
        let mapped = edges_1
            .iter()
            .fold(0u64, |acc, &(u, v)| acc | 1 << pair_bit(rho[u], rho[v], n.max(2)));
        if mapped == target {
            return Ok(Some(rho));
        }
    }
    Ok(None)
}

/// Check a claimed isomorphism witness.
pub fn is_isomorphism(n: usize, edges_1: &EdgeList, edges_2: &EdgeList, rho: &[usize]) -> bool {
    if rho.len() != n || edges_1.len() != edges_2.len() {
        return false;
    }
    let mut hit = vec![false; n];
    for &x in rho {
        if x >= n || hit[x] {
            return false;
        }
        hit[x] = true;
    }
    let target = graph_bits(edges_2, n.max(2));
    let mapped = edges_1
        .iter()
        .fold(0u64, |acc, &(u, v)| acc | 1 << pair_bit(rho[u], rho[v], n.max(2)));
    mapped == target
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> EdgeList {
        vec![(0, 1)]
    }

    fn path_3() -> EdgeList {
        vec![(0, 1), (1, 2)]
    }

    fn triangle() -> EdgeList {
        vec![(0, 1), (1, 2), (0, 2)]
    }

    #[test]
    fn edge_pair_group_counts() {
        let pair = build_gip(2, &single_edge(), &single_edge()).unwrap();
        assert_eq!(pair.y_size(), 8);
        // Every member of Y fixes the union of two disjoint edges, and the
        // halves split evenly.
        let k = pair.automorphism_members();
        assert_eq!(k.len(), 8);
        let swapped = k.iter().filter(|&&j| pair.in_swap_half(j)).count();
        assert_eq!(swapped, k.len() / 2);
    }

    #[test]
    fn path_vs_triangle_counts() {
        let pair = build_gip(3, &path_3(), &triangle()).unwrap();
        assert_eq!(pair.y_size(), 72);
        let k = pair.automorphism_members();
        // |Aut(P_3)| * |Aut(K_3)| = 2 * 6.
        assert_eq!(k.len(), 12);
        assert!(k.iter().all(|&j| !pair.in_swap_half(j)));
    }

    #[test]
    fn identity_is_always_an_automorphism() {
        let pair = build_gip(3, &path_3(), &triangle()).unwrap();
        assert!(pair.is_automorphism(0));
        assert_eq!(pair.permutation(0), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn values_are_dense_from_one_and_coset_constant() {
        let pair = build_gip(3, &path_3(), &path_3()).unwrap();
        let spec = pair.oracle().spectrum();
        assert_eq!(spec.distinct_values()[0], 1);
        let m = spec.coset_count() as u64;
        assert_eq!(spec.distinct_values(), &(1..=m).collect::<Vec<_>>()[..]);
        assert!(spec.equal_multiplicities());
        assert_eq!(spec.multiplicities()[0], pair.automorphism_members().len());
    }

    #[test]
    fn swap_membership_matches_index_half() {
        let pair = build_gip(2, &single_edge(), &vec![]).unwrap();
        let half = pair.y_size() / 2;
        for j in 0..pair.y_size() {
            assert_eq!(pair.in_swap_half(j), j >= half);
        }
    }

    #[test]
    fn iso_detection_agrees_with_brute_force() {
        let graphs: Vec<EdgeList> = vec![
            vec![],
            single_edge(),
            path_3(),
            triangle(),
            vec![(0, 1), (1, 2), (2, 3)],
            vec![(0, 1), (2, 3)],
            vec![(1, 2), (0, 2)],
        ];
        for g1 in &graphs {
            for g2 in &graphs {
                let n = 4;
                let pair = build_gip(n, g1, g2).unwrap();
                let via_k = pair
                    .automorphism_members()
                    .iter()
                    .any(|&j| pair.in_swap_half(j));
                let brute = brute_iso(n, g1, g2).unwrap();
                assert_eq!(via_k, brute.is_some(), "{g1:?} vs {g2:?}");
                if let Some(rho) = brute {
                    assert!(is_isomorphism(n, g1, g2, &rho));
                    // Isomorphic pairs split K evenly between the halves.
                    let k = pair.automorphism_members();
                    let swapped = k.iter().filter(|&&j| pair.in_swap_half(j)).count();
                    assert_eq!(2 * swapped, k.len());
                }
            }
        }
    }

    #[test]
    fn witnesses_are_valid_isomorphisms() {
        let g1 = path_3();
        let g2 = vec![(1, 2), (0, 2)]; // relabeled path
        let pair = build_gip(3, &g1, &g2).unwrap();
        let member = pair
            .automorphism_members()
            .into_iter()
            .find(|&j| pair.in_swap_half(j))
            .expect("isomorphic pair must have swap-half members");
        let rho = pair.witness_from(member).unwrap();
        assert!(is_isomorphism(3, &g1, &g2, &rho));
    }

    #[test]
    fn equal_graphs_have_identity_witness() {
        let rho = brute_iso(3, &path_3(), &path_3()).unwrap().unwrap();
        assert_eq!(rho, vec![0, 1, 2]);
    }

    #[test]
    fn self_loops_rejected() {
        assert!(build_gip(3, &vec![(1, 1)], &triangle()).is_err());
        assert!(build_gip(2, &vec![(0, 3)], &vec![]).is_err());
    }
}
