//! Periodic tables `h_x = id(f(x mod r))` on a power-of-two domain.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{Family, HidingOracle};

use super::{assign_values, TargetPolicy};

#[derive(Debug, Clone)]
pub struct PeriodicInstance {
    period: u64,
    bits: u32,
    oracle: HidingOracle,
}

impl PeriodicInstance {
    /// The planted period, kept for verification.
    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn oracle(&self) -> &HidingOracle {
        &self.oracle
    }

    /// Indices of the ground coset: multiples of the period.
    pub fn period_multiples(&self) -> Vec<usize> {
        (0..self.oracle.domain_size())
            .step_by(self.period as usize)
            .collect()
    }
}

/// Build a periodic table with period `r` over `N = 2^bits` states.
pub fn build_period<R: Rng>(
    r: u64,
    bits: u32,
    policy: TargetPolicy,
    rng: &mut R,
) -> Result<PeriodicInstance> {
    if bits == 0 || bits > 24 {
        return Err(Error::InvalidInstance(format!(
            "domain width {bits} outside supported range"
        )));
    }
    let n = 1u64 << bits;
    if r < 2 || r >= n {
        return Err(Error::InvalidInstance(format!(
            "period {r} outside (1, 2^{bits})"
        )));
    }

    let residue_values = assign_values(r as usize, policy, rng);
    let values: Vec<u64> = (0..n).map(|x| residue_values[(x % r) as usize]).collect();

    let oracle = HidingOracle::new(values, Family::Period)?;
    Ok(PeriodicInstance {
        period: r,
        bits,
        oracle,
    })
}

/// Smallest shift that leaves the table invariant.
pub fn brute_period(oracle: &HidingOracle) -> Result<u64> {
    let n = oracle.domain_size();
    for p in 1..n {
        if (0..n - p).all(|x| oracle.value(x + p) == oracle.value(x)) {
            return Ok(p as u64);
        }
    }
    Err(Error::BudgetExceeded("table has no period below N".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn multiples_share_the_zero_value() {
        let mut rng = stream(2);
        let inst = build_period(4, 4, TargetPolicy::ForceMin, &mut rng).unwrap();
        let o = inst.oracle();
        assert_eq!(o.value(0), 0);
        assert_eq!(o.value(4), 0);
        assert_eq!(o.value(8), 0);
        assert_eq!(o.value(12), 0);
    }

    #[test]
    fn planted_period_is_minimal() {
        for seed in 0..8 {
            let mut rng = stream(seed);
            let r = 2 + seed % 6;
            let inst = build_period(r, 6, TargetPolicy::ForceMin, &mut rng).unwrap();
            assert_eq!(brute_period(inst.oracle()).unwrap(), r);
        }
    }
}
