//! Shared fixtures for unit tests.

use crate::oracle::{DivisionMode, DivisionSet, Family, HidingOracle, MarkedHierarchy};

/// Hierarchy on `n` states with the given strictly nested marked counts,
/// built from a synthetic depth-encoded oracle.
pub(crate) fn hierarchy_with_counts(n: usize, counts: &[usize]) -> MarkedHierarchy {
    let mut depths = vec![0usize; n];
    for (level, &c) in counts.iter().enumerate() {
        for d in depths.iter_mut().take(c) {
            *d = level + 1;
        }
    }
    let max = *depths.iter().max().unwrap() as u64;
    let oracle = HidingOracle::new(
        depths.iter().map(|&d| max - d as u64).collect(),
        Family::Generic,
    )
    .unwrap();
    let m = counts.len() as u64;
    let thresholds: Vec<u64> = (0..m).map(|i| m - 1 - i).collect();
    let dset = DivisionSet::from_thresholds(thresholds, DivisionMode::Value).unwrap();
    MarkedHierarchy::build(&oracle, &dset).unwrap()
}
