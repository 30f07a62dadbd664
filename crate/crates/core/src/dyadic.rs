//! Binary expansions and dyadic (carry-free) arithmetic.

use std::fmt;
use std::ops::BitXor;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exclusive upper bound for an [`Index`].
pub const INDEX_LIMIT: u64 = 1 << 63;

/// A non-negative integer viewed through its binary expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Index(u64);

impl Index {
    pub const ZERO: Index = Index(0);

    pub fn new(value: u64) -> Result<Self> {
        if value < INDEX_LIMIT {
            Ok(Index(value))
        } else {
            Err(Error::IndexOverflow(value))
        }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    /// Binary digit `i` (coefficient of `2^i`).
    #[inline]
    pub fn digit(self, i: u32) -> u8 {
        if i >= 64 {
            0
        } else {
            ((self.0 >> i) & 1) as u8
        }
    }

    /// The `m` low binary digits `n_0, ..., n_{m-1}`.
    pub fn digits(self, m: u32) -> Vec<u8> {
        (0..m).map(|i| self.digit(i)).collect()
    }

    /// Reassembles `sum d_i 2^i`. Digits other than 0/1 are read by parity.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let mut value = 0u64;
        for (i, &d) in digits.iter().enumerate() {
            if d & 1 == 1 {
                if i >= 63 {
                    return Err(Error::IndexOverflow(u64::MAX));
                }
                value |= 1 << i;
            }
        }
        Ok(Index(value))
    }

    /// Number of binary digits needed (0 for the value 0).
    pub fn bit_len(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    pub fn dyadic_add(self, other: Index) -> Index {
        Index(dyadic_add(self.0, other.0))
    }

    pub fn is_carry_free(self, other: Index) -> bool {
        is_carry_free(self.0, other.0)
    }
}

impl TryFrom<u64> for Index {
    type Error = Error;

    fn try_from(value: u64) -> Result<Self> {
        Index::new(value)
    }
}

impl From<Index> for u64 {
    fn from(i: Index) -> u64 {
        i.0
    }
}

impl BitXor for Index {
    type Output = Index;

    fn bitxor(self, rhs: Index) -> Index {
        self.dyadic_add(rhs)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Dyadic sum `sum |x_i - y_i| 2^i`, i.e. digit-wise addition mod 2.
#[inline]
pub fn dyadic_add(x: u64, y: u64) -> u64 {
    x ^ y
}

/// `x + y == x ⊕ y`, i.e. the binary supports are disjoint.
#[inline]
pub fn is_carry_free(x: u64, y: u64) -> bool {
    x & y == 0
}

/// Number of carry-free ordered pairs in `[2^n]^2`, counted directly.
pub fn count_carry_free_pairs(n: u32) -> u64 {
    let size = 1u64 << n;
    (0..size)
        .map(|x| (0..size).filter(|&y| is_carry_free(x, y)).count() as u64)
        .sum()
}

/// Reverses the `bits` low bits of `x`.
#[inline]
pub fn reverse_bits(x: u64, bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - bits)
    }
}

/// Parity of the popcount.
#[inline]
pub fn parity(x: u64) -> u64 {
    (x.count_ones() & 1) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dyadic_sum_examples() {
        assert_eq!(dyadic_add(5, 3), 6);
        assert_eq!(dyadic_add(11, 0), 11);
        assert_eq!(dyadic_add(11, 11), 0);
        assert_eq!(Index(5) ^ Index(3), Index(6));
    }

    #[test]
    fn carry_free_examples() {
        assert!(is_carry_free(1, 2));
        assert!(!is_carry_free(1, 1));
        assert!(is_carry_free(5, 2));
    }

    #[test]
    fn carry_free_pairs_are_three_to_the_n() {
        for n in 0..=10 {
            assert_eq!(count_carry_free_pairs(n), 3u64.pow(n), "n = {n}");
        }
    }

    #[test]
    fn index_rejects_large_values() {
        assert!(Index::new(INDEX_LIMIT - 1).is_ok());
        assert_eq!(Index::new(INDEX_LIMIT), Err(Error::IndexOverflow(INDEX_LIMIT)));
        assert!(serde_json::from_str::<Index>("9223372036854775808").is_err());
        assert_eq!(serde_json::from_str::<Index>("6").unwrap(), Index(6));
    }

    #[test]
    fn digits_of_six() {
        assert_eq!(Index(6).digits(4), vec![0, 1, 1, 0]);
        assert_eq!(Index(6).bit_len(), 3);
        assert_eq!(Index(0).bit_len(), 0);
    }

    #[test]
    fn bit_reversal() {
        assert_eq!(reverse_bits(1, 3), 4);
        assert_eq!(reverse_bits(6, 3), 3);
        assert_eq!(reverse_bits(1, 1), 1);
        assert_eq!(reverse_bits(0, 0), 0);
    }

    proptest! {
        #[test]
        fn digits_round_trip(v in 0u64..INDEX_LIMIT) {
            let i = Index::new(v).unwrap();
            prop_assert_eq!(Index::from_digits(&i.digits(63)).unwrap(), i);
        }

        #[test]
        fn dyadic_sum_never_exceeds_ordinary_sum(x in 0u64..1 << 62, y in 0u64..1 << 62) {
            prop_assert!(dyadic_add(x, y) <= x + y);
            prop_assert_eq!(is_carry_free(x, y), dyadic_add(x, y) == x + y);
        }

        #[test]
        fn dyadic_sum_is_abelian_group_law(x: u64, y: u64, z: u64) {
            prop_assert_eq!(dyadic_add(x, y), dyadic_add(y, x));
            prop_assert_eq!(dyadic_add(dyadic_add(x, y), z), dyadic_add(x, dyadic_add(y, z)));
            prop_assert_eq!(dyadic_add(x, x), 0);
        }
    }
}
