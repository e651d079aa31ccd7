//! Order-two hidden subgroups of the dihedral group.
//!
//! Elements of `D_N` are tuples `(r1, r2)` with `r1` the reflection bit and
//! `r2` the rotation count, encoded as register index `r1 * N + r2`. The
//! hiding function pairs `(0, x)` with `(1, (x + l) mod N)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{Family, HidingOracle};

use super::{assign_values, TargetPolicy};

#[derive(Debug, Clone)]
pub struct DihedralInstance {
    rotations: usize,
    slide: u64,
    oracle: HidingOracle,
}

impl DihedralInstance {
    pub fn rotations(&self) -> usize {
        self.rotations
    }

    /// The planted slide `l`, kept for verification.
    pub fn slide(&self) -> u64 {
        self.slide
    }

    pub fn oracle(&self) -> &HidingOracle {
        &self.oracle
    }

    /// Decode a register index into `(r1, r2)`.
    pub fn coords(&self, index: usize) -> (u8, u64) {
        (
            (index / self.rotations) as u8,
            (index % self.rotations) as u64,
        )
    }
}

/// Build an instance with `rotations = N` and slide `l` (drawn from `rng`
/// if absent). The subgroup coset `{(0,0), (1,l)}` maps to value 0 under the
/// default policy.
pub fn build_dihedral<R: Rng>(
    rotations: usize,
    l: Option<u64>,
    policy: TargetPolicy,
    rng: &mut R,
) -> Result<DihedralInstance> {
    if rotations < 2 || rotations > 1 << 20 {
        return Err(Error::InvalidInstance(format!(
            "rotation count {rotations} outside supported range"
        )));
    }
    let slide = match l {
        Some(l) if (l as usize) < rotations => l,
        Some(l) => {
            return Err(Error::InvalidInstance(format!(
                "slide {l} outside [0, {rotations})"
            )))
        }
        None => rng.gen_range(0..rotations as u64),
    };

    // Coset x = {(0, x), (1, (x + l) mod N)}; coset 0 is the subgroup.
    let coset_values = assign_values(rotations, policy, rng);
    let mut values = vec![0u64; 2 * rotations];
    for x in 0..rotations {
        values[x] = coset_values[x];
        values[rotations + (x + slide as usize) % rotations] = coset_values[x];
    }

    let oracle = HidingOracle::new(values, Family::Dihedral)?;
    Ok(DihedralInstance {
        rotations,
        slide,
        oracle,
    })
}

/// Recover the slide by collision scan: the partner of `(0,0)` is `(1,l)`.
pub fn brute_dihedral(oracle: &HidingOracle) -> Result<u64> {
    let n = oracle.domain_size() / 2;
    let v0 = oracle.value(0);
    for r2 in 0..n {
        if oracle.value(n + r2) == v0 {
            return Ok(r2 as u64);
        }
    }
    Err(Error::BudgetExceeded(
        "no reflected partner for (0,0)".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn subgroup_maps_to_zero() {
        let mut rng = stream(3);
        let inst = build_dihedral(8, Some(3), TargetPolicy::ForceMin, &mut rng).unwrap();
        let zeros: Vec<usize> = (0..16).filter(|&j| inst.oracle().value(j) == 0).collect();
        assert_eq!(zeros, vec![0, 11]);
    }

    #[test]
    fn table_is_two_to_one() {
        for seed in 0..10 {
            let mut rng = stream(seed);
            let n = 4 + (seed as usize % 7);
            let inst = build_dihedral(n, None, TargetPolicy::ForceMin, &mut rng).unwrap();
            let spec = inst.oracle().spectrum();
            assert_eq!(spec.coset_count(), n);
            assert!(spec.multiplicities().iter().all(|&m| m == 2));
            assert_eq!(brute_dihedral(inst.oracle()).unwrap(), inst.slide());
        }
    }

    #[test]
    fn random_policy_still_recoverable() {
        let mut rng = stream(5);
        let inst = build_dihedral(12, Some(7), TargetPolicy::Random, &mut rng).unwrap();
        assert_eq!(brute_dihedral(inst.oracle()).unwrap(), 7);
    }
}
