//! Hiding-function oracles, spectra, division sets, and marked hierarchies.
//!
//! An oracle is an explicit table `j -> h_j` over register indices
//! `[0, N)`. Bisection over its value spectrum produces a decreasing
//! threshold list; each threshold marks the states whose value lies at or
//! below it, giving a nested family of marked sets. The partition those sets
//! generate (the "atoms") is the exact invariant subspace used by the
//! spectral and dynamical layers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem family tag carried by oracles and instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Simon,
    Factoring,
    Dlog,
    Dihedral,
    Gip,
    Period,
    Generic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Simon => "simon",
            Family::Factoring => "factoring",
            Family::Dlog => "dlog",
            Family::Dihedral => "dihedral",
            Family::Gip => "gip",
            Family::Period => "period",
            Family::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// Total map from register index to a non-negative integer value.
#[derive(Debug, Clone)]
pub struct HidingOracle {
    values: Vec<u64>,
    family: Family,
}

impl HidingOracle {
    pub fn new(values: Vec<u64>, family: Family) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInstance("oracle table is empty".into()));
        }
        Ok(Self { values, family })
    }

    /// Number of register basis states `N`.
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn value(&self, index: usize) -> u64 {
        self.values[index]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Distinct values with their preimage sizes, ascending.
    pub fn spectrum(&self) -> Spectrum {
        let mut hist: BTreeMap<u64, usize> = BTreeMap::new();
        for &v in &self.values {
            *hist.entry(v).or_insert(0) += 1;
        }
        let (distinct_values, multiplicities) = hist.into_iter().unzip();
        Spectrum {
            distinct_values,
            multiplicities,
        }
    }

    /// `#{ j : h_j <= v }`.
    pub fn marked_count(&self, v: u64) -> usize {
        self.values.iter().filter(|&&h| h <= v).count()
    }

    /// Indices of the minimum-value coset, the preparation target.
    pub fn min_value_coset(&self) -> Vec<usize> {
        let min = *self.values.iter().min().expect("non-empty table");
        (0..self.values.len())
            .filter(|&j| self.values[j] == min)
            .collect()
    }
}

/// Distinct oracle values and coset sizes, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    distinct_values: Vec<u64>,
    multiplicities: Vec<usize>,
}

impl Spectrum {
    pub fn distinct_values(&self) -> &[u64] {
        &self.distinct_values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Number of distinct values `M` (the coset count for exact HSP tables).
    pub fn coset_count(&self) -> usize {
        self.distinct_values.len()
    }

    /// True when every preimage has the same size, i.e. the table is an
    /// exact coset-separating function.
    pub fn equal_multiplicities(&self) -> bool {
        self.multiplicities.windows(2).all(|w| w[0] == w[1])
    }

    /// CSV rendering, one row per distinct value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,multiplicity\n");
        for (v, m) in self.distinct_values.iter().zip(&self.multiplicities) {
            out.push_str(&format!("{v},{m}\n"));
        }
        out
    }
}

/// How the threshold list was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisionMode {
    /// Thresholds are spectrum values at halved ranks, ending at the minimum.
    Rank,
    /// Thresholds are halved integers from a value-range bound, ending at a floor.
    Value,
}

/// Strictly decreasing thresholds `v_1 > v_2 > ... > v_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionSet {
    thresholds: Vec<u64>,
    mode: DivisionMode,
}

impl DivisionSet {
    /// Bisection by rank: `v_i` is the distinct value at rank
    /// `floor(M / 2^i)` (1-indexed), iterated down to rank 1.
    ///
    /// Fails with [`Error::AlreadySolved`] when the spectrum has a single
    /// value: every state is already in the target coset.
    pub fn by_rank(spec: &Spectrum) -> Result<Self> {
        let m_distinct = spec.coset_count();
        if m_distinct < 2 {
            return Err(Error::AlreadySolved);
        }
        let mut thresholds = Vec::new();
        let mut denom: usize = 2;
        loop {
            let rank = m_distinct / denom;
            if rank == 0 {
                break;
            }
            let v = spec.distinct_values()[rank - 1];
            // Keep strictly decreasing; repeated ranks collapse to one entry.
            if thresholds.last().map_or(true, |&last| v < last) {
                thresholds.push(v);
            }
            if rank == 1 {
                break;
            }
            denom = denom.saturating_mul(2);
        }
        Ok(Self {
            thresholds,
            mode: DivisionMode::Rank,
        })
    }

    /// Bisection by value: repeated integer halving of a value-range bound,
    /// `v_1 = floor(start / 2)`, terminating at `floor` (default 1).
    pub fn by_value(start: u64, floor: u64) -> Result<Self> {
        if floor == 0 {
            return Err(Error::InvalidInstance("value-bisection floor must be >= 1".into()));
        }
        if start < floor {
            return Err(Error::InvalidInstance(format!(
                "value-bisection start {start} below floor {floor}"
            )));
        }
        let mut thresholds = Vec::new();
        let mut v = start / 2;
        while v > floor {
            thresholds.push(v);
            v /= 2;
        }
        thresholds.push(floor);
        Ok(Self {
            thresholds,
            mode: DivisionMode::Value,
        })
    }

    /// Explicit threshold list, validated strictly decreasing.
    pub fn from_thresholds(thresholds: Vec<u64>, mode: DivisionMode) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::InvalidInstance("empty threshold list".into()));
        }
        if !thresholds.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::InvalidInstance(
                "thresholds must be strictly decreasing".into(),
            ));
        }
        Ok(Self { thresholds, mode })
    }

    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    pub fn mode(&self) -> DivisionMode {
        self.mode
    }

    /// Step count `m`.
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// One block of the partition generated by the marked sets.
#[derive(Debug, Clone)]
pub struct Atom {
    indices: Vec<usize>,
}

impl Atom {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Nested marked sets `M_1 ⊇ ... ⊇ M_m` plus their atom partition.
///
/// Atoms are ordered deepest-first: `M_m`, then the successive differences
/// `M_i \ M_{i+1}`, then the complement of `M_1`; empty blocks are dropped.
/// Every `M_i` is therefore a prefix of the atom list.
#[derive(Debug, Clone)]
pub struct MarkedHierarchy {
    domain_size: usize,
    thresholds: Vec<u64>,
    counts: Vec<usize>,
    degenerate: Vec<bool>,
    atoms: Vec<Atom>,
    prefix: Vec<usize>,
}

impl MarkedHierarchy {
    /// Apply each threshold of `dset` to `oracle`.
    ///
    /// Steps with `N_i = N_{i-1}` are kept and flagged degenerate. A
    /// threshold below the minimum value is an error.
    pub fn build(oracle: &HidingOracle, dset: &DivisionSet) -> Result<Self> {
        let n = oracle.domain_size();
        let thresholds = dset.thresholds().to_vec();
        let m = thresholds.len();
        if m == 0 {
            return Err(Error::InvalidInstance("empty division set".into()));
        }

        // depth(j) = deepest level whose threshold still admits h_j.
        let mut depth = vec![0usize; n];
        for j in 0..n {
            let h = oracle.value(j);
            depth[j] = thresholds.iter().take_while(|&&v| h <= v).count();
        }

        let mut counts = vec![0usize; m];
        for &d in &depth {
            // index j belongs to every M_i with i <= depth(j)
            for level in counts.iter_mut().take(d) {
                *level += 1;
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(Error::EmptyMarkedSet {
                    threshold: thresholds[i],
                });
            }
        }

        let mut atoms = Vec::new();
        let mut prefix = vec![0usize; m + 1];
        for d in (0..=m).rev() {
            let block: Vec<usize> = (0..n).filter(|&j| depth[j] == d).collect();
            if !block.is_empty() {
                atoms.push(Atom { indices: block });
            }
            if d > 0 {
                prefix[d] = atoms.len();
            }
        }
        prefix[0] = atoms.len();

        let mut degenerate = Vec::with_capacity(m);
        let mut prev = n;
        for &c in &counts {
            degenerate.push(c == prev);
            prev = c;
        }

        Ok(Self {
            domain_size: n,
            thresholds,
            counts,
            degenerate,
            atoms,
            prefix,
        })
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    /// Step count `m`.
    pub fn depth(&self) -> usize {
        self.counts.len()
    }

    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    /// `N_i` for levels `1..=m`; level 0 is the full domain.
    pub fn count(&self, level: usize) -> usize {
        if level == 0 {
            self.domain_size
        } else {
            self.counts[level - 1]
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// True when `N_i = N_{i-1}` (the threshold removed nothing).
    pub fn is_degenerate(&self, level: usize) -> bool {
        level >= 1 && self.degenerate[level - 1]
    }

    /// Atom partition, deepest-first.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of leading atoms whose union is `M_level` (level 0 = all).
    pub fn marked_prefix(&self, level: usize) -> usize {
        self.prefix[level]
    }

    /// Indices of `M_level`, sorted.
    pub fn marked_indices(&self, level: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.atoms[..self.prefix[level]]
            .iter()
            .flat_map(|a| a.indices().iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Per-step shrink ratios `N_i / N_{i-1}`, with `N_0 = N`.
    pub fn ratios(&self) -> Vec<f64> {
        let mut prev = self.domain_size as f64;
        self.counts
            .iter()
            .map(|&c| {
                let r = c as f64 / prev;
                prev = c as f64;
                r
            })
            .collect()
    }
}
