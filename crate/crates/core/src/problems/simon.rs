//! Two-to-one XOR-mask tables.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{Family, HidingOracle};

use super::{assign_values, TargetPolicy};

/// A two-to-one table `h` on `n`-bit inputs with `h_i = h_j` iff `i ^ j = a`.
#[derive(Debug, Clone)]
pub struct SimonInstance {
    n: u32,
    mask: u64,
    oracle: HidingOracle,
}

impl SimonInstance {
    pub fn bits(&self) -> u32 {
        self.n
    }

    /// The planted mask, kept for verification.
    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn oracle(&self) -> &HidingOracle {
        &self.oracle
    }
}

/// Build an instance on `n` bits with mask `a` (drawn from `rng` if absent).
///
/// Pair values are a seed-determined bijection onto `[0, 2^{n-1})`.
pub fn build_simon<R: Rng>(
    n: u32,
    a: Option<u64>,
    policy: TargetPolicy,
    rng: &mut R,
) -> Result<SimonInstance> {
    if !(2..=24).contains(&n) {
        return Err(Error::InvalidInstance(format!(
            "simon width {n} outside supported range 2..=24"
        )));
    }
    let domain = 1u64 << n;
    let mask = match a {
        Some(0) => {
            return Err(Error::InvalidInstance(
                "mask 0 would make the table injective".into(),
            ))
        }
        Some(a) if a < domain => a,
        Some(a) => {
            return Err(Error::InvalidInstance(format!(
                "mask {a} does not fit in {n} bits"
            )))
        }
        None => rng.gen_range(1..domain),
    };

    // Pair representatives in ascending order; the subgroup pair {0, a}
    // is always representative 0.
    let pair_count = (domain / 2) as usize;
    let pair_values = assign_values(pair_count, policy, rng);
    let mut values = vec![0u64; domain as usize];
    let mut pair_index = HashMap::with_capacity(pair_count);
    let mut next = 0usize;
    for x in 0..domain {
        let rep = x.min(x ^ mask);
        let idx = *pair_index.entry(rep).or_insert_with(|| {
            let i = next;
            next += 1;
            i
        });
        values[x as usize] = pair_values[idx];
    }

    let oracle = HidingOracle::new(values, Family::Simon)?;
    Ok(SimonInstance { n, mask, oracle })
}

/// Recover the mask by exhaustive collision scan.
pub fn brute_simon(oracle: &HidingOracle) -> Result<u64> {
    let mut first: HashMap<u64, usize> = HashMap::new();
    for j in 0..oracle.domain_size() {
        let v = oracle.value(j);
        if let Some(&i) = first.get(&v) {
            return Ok((i ^ j) as u64);
        }
        first.insert(v, j);
    }
    Err(Error::BudgetExceeded(
        "no collision found: table is injective".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn two_to_one_structure() {
        let mut rng = stream(7);
        let inst = build_simon(2, Some(3), TargetPolicy::Random, &mut rng).unwrap();
        let o = inst.oracle();
        assert_eq!(o.value(0), o.value(3));
        assert_eq!(o.value(1), o.value(2));
        assert_ne!(o.value(0), o.value(1));
        assert!(o.values().contains(&0));
    }

    #[test]
    fn zero_mask_rejected() {
        let mut rng = stream(0);
        assert!(build_simon(2, Some(0), TargetPolicy::ForceMin, &mut rng).is_err());
    }

    #[test]
    fn collision_law_holds_for_random_instances() {
        for seed in 0..20 {
            let mut rng = stream(seed);
            let n = 2 + (seed % 5) as u32;
            let inst = build_simon(n, None, TargetPolicy::ForceMin, &mut rng).unwrap();
            let o = inst.oracle();
            let a = inst.mask();
            for i in 0..o.domain_size() {
                for j in (i + 1)..o.domain_size() {
                    let same = o.value(i) == o.value(j);
                    assert_eq!(same, (i ^ j) as u64 == a, "seed {seed} i {i} j {j}");
                }
            }
            assert_eq!(brute_simon(o).unwrap(), a);
        }
    }

    #[test]
    fn forced_min_lands_on_subgroup_pair() {
        let mut rng = stream(11);
        let inst = build_simon(4, Some(9), TargetPolicy::ForceMin, &mut rng).unwrap();
        assert_eq!(inst.oracle().value(0), 0);
        assert_eq!(inst.oracle().value(9), 0);
    }
}
