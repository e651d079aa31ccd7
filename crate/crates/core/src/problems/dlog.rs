//! Two-variable modular-power tables hiding a discrete logarithm.

use crate::error::{Error, Result};
use crate::oracle::{Family, HidingOracle};

use super::modular::{gcd, mod_pow, multiplicative_order};

/// Table over pairs `(x1, x2)` with `h = b^{x1} a^{x2} mod N` where
/// `b = a^s`. The value is 1 exactly on the line `s*x1 + x2 = 0 (mod r)`.
#[derive(Debug, Clone)]
pub struct DlogInstance {
    modulus: u64,
    base: u64,
    power: u64,
    exponent: u64,
    order: u64,
    range: usize,
    oracle: HidingOracle,
}

impl DlogInstance {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// `b = a^s mod N`, the public power.
    pub fn power(&self) -> u64 {
        self.power
    }

    /// The hidden exponent, kept for verification.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Multiplicative order of the base.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Per-coordinate range `R`; the register has `R^2` states.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn oracle(&self) -> &HidingOracle {
        &self.oracle
    }

    /// Split a register index into `(x1, x2)`.
    pub fn coords(&self, index: usize) -> (u64, u64) {
        ((index / self.range) as u64, (index % self.range) as u64)
    }

    /// Indices on the solution line `s*x1 + x2 = 0 (mod r)`.
    pub fn solution_line(&self) -> Vec<usize> {
        (0..self.oracle.domain_size())
            .filter(|&j| {
                let (x1, x2) = self.coords(j);
                (self.exponent * x1 + x2) % self.order == 0
            })
            .collect()
    }
}

/// Build the table. `range` defaults to the modulus when `None`.
pub fn build_dlog(
    n_mod: u64,
    a: u64,
    s: u64,
    range: Option<usize>,
) -> Result<DlogInstance> {
    if n_mod < 3 || a < 2 || a >= n_mod || gcd(a, n_mod) != 1 {
        return Err(Error::InvalidInstance(format!(
            "dlog base/modulus pair ({a}, {n_mod}) unusable"
        )));
    }
    let order = multiplicative_order(a, n_mod)?;
    if order < 2 {
        return Err(Error::InvalidInstance(format!(
            "base {a} has trivial order mod {n_mod}"
        )));
    }
    if s >= order {
        return Err(Error::InvalidInstance(format!(
            "exponent {s} outside [0, {order})"
        )));
    }
    let range = range.unwrap_or(n_mod as usize);
    if range < 2 || range.saturating_mul(range) > 1 << 22 {
        return Err(Error::InvalidInstance(format!(
            "dlog range {range} outside table budget"
        )));
    }

    let b = mod_pow(a, s, n_mod);
    let mut values = Vec::with_capacity(range * range);
    for x1 in 0..range as u64 {
        let bx = mod_pow(b, x1, n_mod);
        for x2 in 0..range as u64 {
            values.push((bx as u128 * mod_pow(a, x2, n_mod) as u128 % n_mod as u128) as u64);
        }
    }

    let oracle = HidingOracle::new(values, Family::Dlog)?;
    Ok(DlogInstance {
        modulus: n_mod,
        base: a,
        power: b,
        exponent: s,
        order,
        range,
        oracle,
    })
}

/// Discrete log of `b` base `a` mod `n` by exponent scan.
pub fn brute_dlog(n_mod: u64, a: u64, b: u64) -> Result<u64> {
    let order = multiplicative_order(a, n_mod)?;
    let mut x: u64 = 1;
    for s in 0..order {
        if x == b % n_mod {
            return Ok(s);
        }
        x = (x as u128 * a as u128 % n_mod as u128) as u64;
    }
    Err(Error::BudgetExceeded(format!(
        "{b} is not a power of {a} mod {n_mod}"
    )))
}
