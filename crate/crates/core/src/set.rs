//! Bitmask encoding of subsets: element `i` of the ground set is bit `i`.

use crate::error::{Error, Result};

/// Largest ground set supported by the dense tables (2^20 entries).
pub const MAX_N: usize = 20;

pub type Mask = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::GroundSetTooLarge(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> Mask {
        full_mask(self.n)
    }

    pub fn size(&self) -> usize {
        1usize << self.n
    }

    pub fn check_element(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidElement { index: i, n: self.n });
        }
        Ok(())
    }

    pub fn subsets(&self) -> impl Iterator<Item = Mask> {
        0..(1u32 << self.n)
    }
}

#[inline]
pub fn full_mask(n: usize) -> Mask {
    if n == 0 {
        0
    } else {
        (u32::MAX) >> (32 - n)
    }
}

#[inline]
pub fn contains(mask: Mask, i: usize) -> bool {
    mask >> i & 1 == 1
}

#[inline]
pub fn popcount(mask: Mask) -> usize {
    mask.count_ones() as usize
}

/// Elements of `mask` in increasing order.
pub fn elements(mask: Mask) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// All submasks of `mask`, including `0` and `mask` itself, in decreasing order.
pub fn submasks(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

pub fn from_elements(items: &[usize]) -> Mask {
    items.iter().fold(0, |m, &i| m | 1 << i)
}

/// Packs the bits of `mask` selected by `domain` into the low `|domain|` bits.
pub fn compress(mask: Mask, domain: Mask) -> Mask {
    let mut out = 0;
    for (k, i) in elements(domain).enumerate() {
        if contains(mask, i) {
            out |= 1 << k;
        }
    }
    out
}

/// Inverse of [`compress`]: spreads the low bits of `packed` onto `domain`.
pub fn expand(packed: Mask, domain: Mask) -> Mask {
    let mut out = 0;
    for (k, i) in elements(domain).enumerate() {
        if contains(packed, k) {
            out |= 1 << i;
        }
    }
    out
}

/// Human-readable 1-indexed rendering, e.g. `{1,3}`.
pub fn display(mask: Mask) -> String {
    let inner: Vec<String> = elements(mask).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_and_elements() {
        assert_eq!(full_mask(0), 0);
        assert_eq!(full_mask(3), 0b111);
        assert_eq!(full_mask(20), (1 << 20) - 1);
        assert_eq!(elements(0b1011).collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(from_elements(&[0, 2]), 0b101);
        assert_eq!(display(0b101), "{1,3}");
        assert!(GroundSet::new(21).is_err());
        assert!(GroundSet::new(4).unwrap().check_element(4).is_err());
    }

    #[test]
    fn submask_enumeration_is_complete() {
        let subs: Vec<Mask> = submasks(0b1010).collect();
        assert_eq!(subs, vec![0b1010, 0b1000, 0b0010, 0]);
        assert_eq!(submasks(0).count(), 1);
        assert_eq!(submasks(0b11111).count(), 32);
    }

    #[test]
    fn compress_expand_inverse() {
        let domain = 0b1101_0110;
        for packed in 0..(1 << popcount(domain)) {
            assert_eq!(compress(expand(packed, domain), domain), packed);
        }
        assert_eq!(compress(0b0100_0010, domain), 0b1001);
    }
}
