//! Exact dyadic times `m / 2^k`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// A positive dyadic rational `m · 2^-k`, kept in canonical form
/// (`m` odd or `k = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicTime {
    m: u64,
    k: u32,
}

impl DyadicTime {
    pub const ONE: DyadicTime = DyadicTime { m: 1, k: 0 };

    pub fn new(m: u64, k: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidTime("numerator must be positive".into()));
        }
        if k > 62 {
            return Err(Error::InvalidTime(format!("exponent {k} exceeds 62")));
        }
        let tz = m.trailing_zeros().min(k);
        Ok(DyadicTime { m: m >> tz, k: k - tz })
    }

    pub fn integer(n: u64) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn numerator(&self) -> u64 {
        self.m
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn value(&self) -> f64 {
        self.m as f64 / (self.k as f64).exp2()
    }

    pub fn half(&self) -> Self {
        if self.k == 0 && self.m.is_multiple_of(2) {
            DyadicTime { m: self.m / 2, k: 0 }
        } else {
            DyadicTime { m: self.m, k: self.k + 1 }
        }
    }

    /// `self / 2^levels`.
    pub fn halved(&self, levels: u32) -> Self {
        (0..levels).fold(*self, |t, _| t.half())
    }

    pub fn double(&self) -> Self {
        if self.k > 0 {
            DyadicTime { m: self.m, k: self.k - 1 }
        } else {
            DyadicTime { m: self.m * 2, k: 0 }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let k = self.k.max(other.k);
        let (sa, sb) = (k - self.k, k - other.k);
        if self.m.leading_zeros() < sa || other.m.leading_zeros() < sb {
            return None;
        }
        DyadicTime::new((self.m << sa).checked_add(other.m << sb)?, k).ok()
    }

    /// `Some(j)` with `self = other · 2^j` when such an integer exists.
    pub fn log2_ratio(&self, other: &Self) -> Option<i64> {
        let split = |t: &Self| {
            let tz = t.m.trailing_zeros();
            (t.m >> tz, tz as i64 - t.k as i64)
        };
        let (oa, ea) = split(self);
        let (ob, eb) = split(other);
        (oa == ob).then_some(ea - eb)
    }

    /// `self = 2^levels · other`, i.e. `other` sits `levels` refinements below `self`.
    pub fn levels_above(&self, other: &Self) -> Option<u32> {
        match self.log2_ratio(other) {
            Some(j) if j >= 0 => Some(j as u32),
            _ => None,
        }
    }
}

impl Add for DyadicTime {
    type Output = DyadicTime;

    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("dyadic time overflow")
    }
}

impl PartialOrd for DyadicTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicTime {
    fn cmp(&self, other: &Self) -> Ordering {
        let k = self.k.max(other.k);
        let a = (self.m as u128) << (k - self.k);
        let b = (other.m as u128) << (k - other.k);
        a.cmp(&b)
    }
}

impl fmt::Display for DyadicTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 0 {
            write!(f, "{}", self.m)
        } else {
            write!(f, "{}/2^{}", self.m, self.k)
        }
    }
}

/// All canonical dyadic times `m / 2^k` in `(0, max]` with exponent at most `max_k`.
pub fn grid(max_k: u32, max: DyadicTime) -> Vec<DyadicTime> {
    let mut out = Vec::new();
    let denom = 1u64 << max_k;
    let mut m = 1u64;
    loop {
        let t = DyadicTime::new(m, max_k).expect("positive numerator");
        if t > max {
            break;
        }
        out.push(t);
        m += 1;
        if m > denom * 64 {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        let t = DyadicTime::new(4, 3).unwrap();
        assert_eq!((t.numerator(), t.exponent()), (1, 1));
        let t = DyadicTime::new(6, 0).unwrap();
        assert_eq!((t.numerator(), t.exponent()), (6, 0));
        assert!(DyadicTime::new(0, 2).is_err());
    }

    #[test]
    fn halving_and_addition_are_exact() {
        let one = DyadicTime::ONE;
        let q = one.half().half();
        assert_eq!(q.value(), 0.25);
        assert_eq!(q + q, one.half());
        assert_eq!(one.half() + one.half(), one);
        assert_eq!(DyadicTime::integer(2).unwrap().half(), one);
        assert_eq!(one.double().half(), one);
        assert_eq!(one.levels_above(&q), Some(2));
        assert_eq!(q.levels_above(&one), None);
        assert_eq!(DyadicTime::integer(2).unwrap().levels_above(&one.half()), Some(2));
        assert_eq!(DyadicTime::integer(3).unwrap().levels_above(&one), None);
    }

    #[test]
    fn grid_enumerates_sorted() {
        let g = grid(2, DyadicTime::ONE);
        let vals: Vec<f64> = g.iter().map(|t| t.value()).collect();
        assert_eq!(vals, vec![0.25, 0.5, 0.75, 1.0]);
    }

    proptest! {
        #[test]
        fn addition_matches_floats(m1 in 1u64..1000, k1 in 0u32..12, m2 in 1u64..1000, k2 in 0u32..12) {
            let a = DyadicTime::new(m1, k1).unwrap();
            let b = DyadicTime::new(m2, k2).unwrap();
            let s = a + b;
            prop_assert_eq!(s.value(), a.value() + b.value());
            prop_assert!(s.numerator() % 2 == 1 || s.exponent() == 0);
            prop_assert_eq!(s.half() + s.half(), s);
        }
    }
}
