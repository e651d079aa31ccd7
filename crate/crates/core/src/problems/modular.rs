//! Modular-power tables for factoring and order-finding, plus the small
//! number-theory kit shared by the other modular families.

use crate::error::{Error, Result};
use crate::oracle::{Family, HidingOracle};

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// `base^exp mod modulus` with 128-bit intermediates.
pub fn mod_pow(base: u64, exp: u64, modulus: u64) -> u64 {
    assert!(modulus > 0);
    let mut result: u128 = 1;
    let mut b: u128 = (base % modulus) as u128;
    let m = modulus as u128;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    result as u64
}

/// Inverse of `a` modulo `m`, when `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Smallest `r >= 1` with `a^r = 1 (mod n)`, by exponent scan.
pub fn multiplicative_order(a: u64, n: u64) -> Result<u64> {
    if n < 2 || gcd(a % n, n) != 1 {
        return Err(Error::InvalidInstance(format!(
            "order undefined: gcd({a}, {n}) != 1"
        )));
    }
    let mut x = a % n;
    for r in 1..n {
        if x == 1 {
            return Ok(r);
        }
        x = (x as u128 * (a % n) as u128 % n as u128) as u64;
    }
    Err(Error::BudgetExceeded(format!(
        "no order found for {a} mod {n}"
    )))
}

/// Table `h_k = a^k mod Z` on `N = 2^(ceil(log2 Z) + pad)` register states.
#[derive(Debug, Clone)]
pub struct FactoringInstance {
    modulus: u64,
    base: u64,
    register_bits: u32,
    order: u64,
    oracle: HidingOracle,
}

impl FactoringInstance {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn register_bits(&self) -> u32 {
        self.register_bits
    }

    /// The true order of the base, kept for verification.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn oracle(&self) -> &HidingOracle {
        &self.oracle
    }

    /// Indices of the ground coset: multiples of the order.
    pub fn order_multiples(&self) -> Vec<usize> {
        (0..self.oracle.domain_size())
            .step_by(self.order as usize)
            .collect()
    }
}

/// Build the modular-power table. `pad` adds register bits beyond
/// `ceil(log2 Z)` so the table holds several full periods.
pub fn build_factoring(z: u64, a: u64, pad: u32) -> Result<FactoringInstance> {
    if z < 3 {
        return Err(Error::InvalidInstance(format!("modulus {z} too small")));
    }
    if !(1 < a && a < z) {
        return Err(Error::InvalidInstance(format!(
            "base {a} outside 1 < a < {z}"
        )));
    }
    let g = gcd(a, z);
    if g != 1 {
        return Err(Error::NonCoprimeBase {
            a,
            modulus: z,
            gcd: g,
        });
    }
    let bits = 64 - (z - 1).leading_zeros();
    let register_bits = bits + pad;
    if register_bits > 26 {
        return Err(Error::InvalidInstance(format!(
            "register width {register_bits} exceeds table budget"
        )));
    }
    let n = 1usize << register_bits;

    let mut values = Vec::with_capacity(n);
    let mut x: u64 = 1;
    let mut order = None;
    for k in 0..n {
        values.push(x);
        if k > 0 && x == 1 && order.is_none() {
            order = Some(k as u64);
        }
        x = (x as u128 * a as u128 % z as u128) as u64;
    }
    let order = match order {
        Some(r) => r,
        // The register always spans at least one period because N >= Z > r.
        None => multiplicative_order(a, z)?,
    };

    let oracle = HidingOracle::new(values, Family::Factoring)?;
    Ok(FactoringInstance {
        modulus: z,
        base: a,
        register_bits,
        order,
        oracle,
    })
}

/// Order of `a` mod `z` by direct scan; the reference answer.
pub fn brute_order(z: u64, a: u64) -> Result<u64> {
    multiplicative_order(a, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod_pow_basics() {
        assert_eq!(mod_pow(2, 10, 1000), 24);
        assert_eq!(mod_pow(7, 0, 13), 1);
        assert_eq!(mod_pow(13, 2, 15), 4);
    }

    #[test]
    fn mod_inverse_basics() {
        assert_eq!(mod_inverse(3, 4), Some(3));
        assert_eq!(mod_inverse(2, 4), None);
        for a in 1..12u64 {
            if gcd(a, 13) == 1 {
                let inv = mod_inverse(a, 13).unwrap();
                assert_eq!(a * inv % 13, 1);
            }
        }
    }

    #[test]
    fn base_two_mod_fifteen() {
        let inst = build_factoring(15, 2, 0).unwrap();
        assert_eq!(inst.order(), 4);
        assert_eq!(inst.oracle().domain_size(), 16);
        assert_eq!(&inst.oracle().values()[..5], &[1, 2, 4, 8, 1]);
        // One full cycle per four states.
        for (k, &v) in inst.oracle().values().iter().enumerate() {
            assert_eq!(v, mod_pow(2, k as u64, 15));
        }
    }

    #[test]
    fn base_fourteen_has_order_two() {
        let inst = build_factoring(15, 14, 1).unwrap();
        assert_eq!(inst.order(), 2);
    }

    #[test]
    fn non_coprime_base_reports_factor() {
        match build_factoring(15, 5, 1) {
            Err(Error::NonCoprimeBase { gcd, .. }) => assert_eq!(gcd, 5),
            other => panic!("expected non-coprime error, got {other:?}"),
        }
    }

    #[test]
    fn ground_coset_is_order_multiples() {
        let inst = build_factoring(15, 2, 1).unwrap();
        let ones: Vec<usize> = (0..inst.oracle().domain_size())
            .filter(|&k| inst.oracle().value(k) == 1)
            .collect();
        assert_eq!(ones, inst.order_multiples());
        assert_eq!(ones, vec![0, 4, 8, 12, 16, 20, 24, 28]);
    }

    #[test]
    fn periodicity_invariant() {
        for &(z, a) in &[(15u64, 2u64), (15, 7), (15, 13), (21, 2), (21, 5)] {
            let inst = build_factoring(z, a, 1).unwrap();
            let r = inst.order() as usize;
            let values = inst.oracle().values();
            assert_eq!(values[0], 1);
            for k in 0..values.len() - r {
                assert_eq!(values[k + r], values[k]);
            }
            assert_eq!(brute_order(z, a).unwrap(), r as u64);
        }
    }
}
