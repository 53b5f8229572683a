//! Prime-field arithmetic.
//!
//! Symbols are plain `u64` residues in `[0, p)`; a [`Field`] value carries the
//! modulus and performs every operation. The field is `Copy`, so matrices and
//! codes simply hold one by value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field symbol, always reduced into `[0, p)`.
pub type Symbol = u64;

/// Default modulus, the Fermat prime 2^16 + 1.
pub const DEFAULT_MODULUS: u64 = 65_537;

/// GF(p) for a prime `p < 2^32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    p: u64,
}

impl Default for Field {
    fn default() -> Self {
        Field { p: DEFAULT_MODULUS }
    }
}

impl Field {
    /// Creates GF(p); `p` must be a prime below 2^32 so products fit in a `u64`.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p >= 1 << 32 || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Field { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary unsigned integer.
    #[inline]
    pub fn elem(&self, v: u64) -> Symbol {
        v % self.p
    }

    /// Maps a signed integer to its residue.
    #[inline]
    pub fn from_i64(&self, v: i64) -> Symbol {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        a * b % self.p
    }

    /// `a * b + c`, the inner step of every dot product.
    #[inline]
    pub fn mul_add(&self, a: Symbol, b: Symbol, c: Symbol) -> Symbol {
        (a * b + c) % self.p
    }

    /// Multiplies by `(-1)^e`.
    #[inline]
    pub fn signed(&self, a: Symbol, odd: bool) -> Symbol {
        if odd {
            self.neg(a)
        } else {
            a
        }
    }

    /// `a^e` by square-and-multiply; `pow(0, 0) = 1`.
    pub fn pow(&self, a: Symbol, mut e: u64) -> Symbol {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a % self.p == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.p - 2))
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn dot(&self, a: &[Symbol], b: &[Symbol]) -> Symbol {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.mul_add(x, y, acc))
    }

    /// `acc += scale * x`, element-wise.
    pub fn axpy(&self, acc: &mut [Symbol], scale: Symbol, x: &[Symbol]) {
        debug_assert_eq!(acc.len(), x.len());
        if scale == 0 {
            return;
        }
        for (a, &v) in acc.iter_mut().zip(x) {
            *a = self.mul_add(scale, v, *a);
        }
    }

    pub fn add_vec(&self, a: &[Symbol], b: &[Symbol]) -> Vec<Symbol> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    /// Horner evaluation of `coeffs[0] + coeffs[1] x + ...`.
    pub fn eval_poly(&self, coeffs: &[Symbol], x: Symbol) -> Symbol {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.mul_add(acc, x, c))
    }
}

fn is_prime(p: u64) -> bool {
    if p < 4 {
        return p >= 2;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut i = 3;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> Field {
        Field::new(p).unwrap()
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(gf(7).inv(3).unwrap(), 5);
        assert_eq!(gf(13).inv(1).unwrap(), 1);
        assert_eq!(gf(65_537).inv(2).unwrap(), 32_769);
        assert!(matches!(gf(7).inv(0), Err(Error::DivisionByZero)));
    }

    #[test]
    fn inverse_matches_exhaustive_search() {
        for p in [2, 3, 5, 7, 11, 13] {
            let f = gf(p);
            for a in 1..p {
                let brute = (1..p).find(|b| a * b % p == 1).unwrap();
                assert_eq!(f.inv(a).unwrap(), brute);
                assert_eq!(f.inv(f.inv(a).unwrap()).unwrap(), a);
            }
        }
    }

    #[test]
    fn pow_examples() {
        let f = gf(7);
        assert_eq!(f.pow(3, 2), 2);
        assert_eq!(f.pow(5, 0), 1);
        assert_eq!(f.pow(0, 0), 1);
        assert_eq!(f.pow(3, 6), 1);
    }

    #[test]
    fn axioms_exhaustive_small_primes() {
        for p in [2, 3, 5, 7, 11, 13] {
            let f = gf(p);
            for a in 0..p {
                assert_eq!(f.add(a, f.neg(a)), 0);
                assert_eq!(f.sub(a, a), 0);
                for b in 0..p {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..p {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(Field::new(15).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(65_537).is_ok());
    }

    #[test]
    fn signed_integers_reduce() {
        let f = gf(7);
        assert_eq!(f.from_i64(-1), 6);
        assert_eq!(f.from_i64(-15), 6);
        assert_eq!(f.eval_poly(&[1, 2, 3], 2), (1 + 4 + 12) % 7);
    }
}
