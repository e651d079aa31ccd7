//! Problem-family compilers and independent brute-force solvers.
//!
//! Each builder turns instance parameters into a [`HidingOracle`] plus the
//! planted answer, kept on the instance for verification only. The brute
//! solvers are deliberately naive exhaustive searches; they are the ground
//! truth every pipeline result is checked against.

mod dihedral;
mod dlog;
mod gip;
mod modular;
mod period;
mod simon;

pub use dihedral::{brute_dihedral, build_dihedral, DihedralInstance};
pub use dlog::{brute_dlog, build_dlog, DlogInstance};
pub use gip::{brute_iso, build_gip, is_isomorphism, EdgeList, GraphPair};
pub use modular::{
    brute_order, build_factoring, gcd, mod_inverse, mod_pow, multiplicative_order,
    FactoringInstance,
};
pub use period::{brute_period, build_period, PeriodicInstance};
pub use simon::{brute_simon, build_simon, SimonInstance};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Where the minimum oracle value (the preparation target) lands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetPolicy {
    /// The distinguished coset (the hidden subgroup) is forced to the
    /// spectrum minimum.
    #[default]
    ForceMin,
    /// Values are a plain random bijection; the search runs to whichever
    /// coset happens to hold the minimum.
    Random,
}

/// Seed-determined bijection from `count` cosets to dense values.
///
/// Under [`TargetPolicy::ForceMin`] coset 0 receives value 0 and the rest a
/// shuffle of `1..count`; under [`TargetPolicy::Random`] all values are
/// shuffled.
pub(crate) fn assign_values<R: Rng>(count: usize, policy: TargetPolicy, rng: &mut R) -> Vec<u64> {
    match policy {
        TargetPolicy::ForceMin => {
            let mut rest: Vec<u64> = (1..count as u64).collect();
            rest.shuffle(rng);
            let mut out = Vec::with_capacity(count);
            out.push(0);
            out.extend(rest);
            out
        }
        TargetPolicy::Random => {
            let mut all: Vec<u64> = (0..count as u64).collect();
            all.shuffle(rng);
            all
        }
    }
}
