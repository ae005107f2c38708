//! Multiindices with graded ordering.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// An exponent vector with one slot per variable.
///
/// Ordering is graded: lower total order first, then ties are broken so that
/// earlier variables dominate (`(1,0)` precedes `(0,1)`).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Multiindex(SmallVec<[u16; 6]>);

impl Multiindex {
    pub fn zero(slots: usize) -> Multiindex {
        Multiindex(SmallVec::from_elem(0, slots))
    }

    pub fn from_slice(e: &[u16]) -> Multiindex {
        Multiindex(SmallVec::from_slice(e))
    }

    /// The unit multiindex `e_i`.
    pub fn unit(slots: usize, i: usize) -> Multiindex {
        let mut m = Multiindex::zero(slots);
        m.0[i] = 1;
        m
    }

    pub fn slots(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u16) {
        self.0[i] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &Multiindex) -> Multiindex {
        debug_assert_eq!(self.slots(), other.slots());
        Multiindex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn incremented(&self, i: usize) -> Multiindex {
        let mut m = self.clone();
        m.0[i] += 1;
        m
    }

    /// `self - e_i`, or `None` when slot `i` is zero.
    pub fn decremented(&self, i: usize) -> Option<Multiindex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.0[i] -= 1;
        Some(m)
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &Multiindex) -> Option<Multiindex> {
        let mut out = SmallVec::with_capacity(self.slots());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Multiindex(out))
    }

    pub fn divides(&self, other: &Multiindex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `α!` as an integer.
    pub fn factorial(&self) -> u128 {
        self.0
            .iter()
            .map(|&e| (1..=e as u128).product::<u128>())
            .product()
    }

    /// Concatenation of exponent blocks.
    pub fn concat(&self, other: &Multiindex) -> Multiindex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Multiindex(v)
    }

    /// Sub-block `[start, start+len)`.
    pub fn block(&self, start: usize, len: usize) -> Multiindex {
        Multiindex(SmallVec::from_slice(&self.0[start..start + len]))
    }
}

impl Ord for Multiindex {
    fn cmp(&self, other: &Multiindex) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Multiindex {
    fn partial_cmp(&self, other: &Multiindex) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Multiindex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multiindices with `slots` entries and order at most `max_order`, in
/// graded order. The count is `binom(slots + max_order, max_order)`.
pub fn multiindex_enumerate(slots: usize, max_order: u32) -> Vec<Multiindex> {
    let mut out = Vec::new();
    for d in 0..=max_order {
        out.extend(multiindices_of_order(slots, d));
    }
    out
}

/// All multiindices of exactly order `d`, in graded order.
pub fn multiindices_of_order(slots: usize, d: u32) -> Vec<Multiindex> {
    let mut out = Vec::new();
    if slots == 0 {
        if d == 0 {
            out.push(Multiindex::zero(0));
        }
        return out;
    }
    let mut cur = vec![0u16; slots];
    fill(&mut cur, 0, d as u16, &mut out);
    out
}

fn fill(cur: &mut Vec<u16>, pos: usize, left: u16, out: &mut Vec<Multiindex>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(Multiindex::from_slice(cur));
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e;
        fill(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::binom;

    #[test]
    fn enumerate_examples() {
        let a = multiindex_enumerate(1, 2);
        assert_eq!(
            a,
            vec![
                Multiindex::from_slice(&[0]),
                Multiindex::from_slice(&[1]),
                Multiindex::from_slice(&[2])
            ]
        );
        let b = multiindex_enumerate(2, 1);
        assert_eq!(
            b,
            vec![
                Multiindex::from_slice(&[0, 0]),
                Multiindex::from_slice(&[1, 0]),
                Multiindex::from_slice(&[0, 1])
            ]
        );
        assert_eq!(multiindex_enumerate(2, 2).len(), 6);
    }

    #[test]
    fn enumeration_is_sorted_and_counted() {
        for slots in 1..5 {
            for d in 0..5u32 {
                let v = multiindex_enumerate(slots, d);
                assert_eq!(v.len() as u128, binom(slots as u64 + d as u64, d as u64).unwrap());
                assert!(v.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
