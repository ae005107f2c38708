use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::algebra::{binom, Multiindex};
use crate::Error;

/// A jet coordinate `U^i_{l1..lλ}` with sorted indices.
///
/// Components and indices are zero-based; `order() == 0` stands for the base
/// variable `u^i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct JetCoord {
    comp: u8,
    idx: SmallVec<[u8; 8]>,
}

impl JetCoord {
    /// Builds the canonical coordinate, sorting the indices.
    pub fn new(comp: usize, indices: &[usize]) -> JetCoord {
        let mut idx: SmallVec<[u8; 8]> = indices.iter().map(|&i| i as u8).collect();
        idx.sort_unstable();
        JetCoord {
            comp: comp as u8,
            idx,
        }
    }

    /// The coordinate `U^comp_α` for a multiindex `α` over the x's.
    pub fn from_multiindex(comp: usize, alpha: &Multiindex) -> JetCoord {
        let mut idx = SmallVec::new();
        for (k, &e) in alpha.exps().iter().enumerate() {
            for _ in 0..e {
                idx.push(k as u8);
            }
        }
        JetCoord {
            comp: comp as u8,
            idx,
        }
    }

    pub fn comp(&self) -> usize {
        self.comp as usize
    }

    pub fn indices(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.idx.iter().map(|&i| i as usize)
    }

    pub fn index_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn order(&self) -> usize {
        self.idx.len()
    }

    /// The coordinate with one more index `k`.
    pub fn extended(&self, k: usize) -> JetCoord {
        let mut idx = self.idx.clone();
        let pos = idx.partition_point(|&i| (i as usize) <= k);
        idx.insert(pos, k as u8);
        JetCoord {
            comp: self.comp,
            idx,
        }
    }

    /// The coordinate with one index `k` removed, if present.
    pub fn reduced(&self, k: usize) -> Option<JetCoord> {
        let pos = self.idx.iter().position(|&i| i as usize == k)?;
        let mut idx = self.idx.clone();
        idx.remove(pos);
        Some(JetCoord {
            comp: self.comp,
            idx,
        })
    }

    /// Exponent vector over `n` independent variables.
    pub fn multiindex(&self, n: usize) -> Multiindex {
        let mut m = Multiindex::zero(n);
        for &i in &self.idx {
            m.set(i as usize, m.get(i as usize) + 1);
        }
        m
    }

    /// Formats with base-variable names, e.g. `u[x,x]`.
    pub fn fmt_with(&self, xnames: &[String], unames: &[String]) -> String {
        let u = &unames[self.comp()];
        if self.idx.is_empty() {
            return u.clone();
        }
        let xs: Vec<&str> = self.indices().map(|k| xnames[k].as_str()).collect();
        format!("{}[{}]", u, xs.join(","))
    }
}

impl Ord for JetCoord {
    fn cmp(&self, other: &JetCoord) -> Ordering {
        self.idx
            .len()
            .cmp(&other.idx.len())
            .then(self.comp.cmp(&other.comp))
            .then_with(|| self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for JetCoord {
    fn partial_cmp(&self, other: &JetCoord) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for JetCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}_", self.comp + 1)?;
        for i in &self.idx {
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

/// Canonical jet coordinate with range checks (zero-based component and
/// indices).
pub fn canonical_jet(n: usize, m: usize, comp: usize, indices: &[usize]) -> Result<JetCoord, Error> {
    if comp >= m {
        return Err(Error::Domain(format!(
            "component {} out of range 1..{m}",
            comp + 1
        )));
    }
    if let Some(&bad) = indices.iter().find(|&&k| k >= n) {
        return Err(Error::Domain(format!("index {} out of range 1..{n}", bad + 1)));
    }
    Ok(JetCoord::new(comp, indices))
}

/// Dimension `n + m·binom(κ+n, κ)` of the jet space of order `κ`.
pub fn jet_dim(n: usize, m: usize, kappa: usize) -> u128 {
    n as u128 + m as u128 * binom((kappa + n) as u64, kappa as u64).expect("binom")
}

/// All canonical jet coordinates of exactly order `order`.
pub fn coords_of_order(n: usize, m: usize, order: usize) -> Vec<JetCoord> {
    let mut out = Vec::new();
    for comp in 0..m {
        let mut cur = Vec::with_capacity(order);
        push_sorted(n, order, 0, &mut cur, &mut |idx| out.push(JetCoord::new(comp, idx)));
    }
    out
}

fn push_sorted(n: usize, left: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if left == 0 {
        f(cur);
        return;
    }
    for k in start..n {
        cur.push(k);
        push_sorted(n, left - 1, k, cur, f);
        cur.pop();
    }
}

/// All canonical jet coordinates with order in `1..=max_order`.
pub fn coords_up_to(n: usize, m: usize, max_order: usize) -> Vec<JetCoord> {
    (1..=max_order)
        .flat_map(|o| coords_of_order(n, m, o))
        .collect()
}

/// A monomial in jet coordinates of order at least one.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct JetMonomial(SmallVec<[(JetCoord, u16); 3]>);

impl JetMonomial {
    pub fn one() -> JetMonomial {
        JetMonomial(SmallVec::new())
    }

    pub fn coord(c: JetCoord) -> JetMonomial {
        debug_assert!(c.order() >= 1);
        let mut v = SmallVec::new();
        v.push((c, 1));
        JetMonomial(v)
    }

    pub fn from_factors<I: IntoIterator<Item = JetCoord>>(it: I) -> JetMonomial {
        let mut m = JetMonomial::one();
        for c in it {
            m = m.times_coord(&c, 1);
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(JetCoord, u16)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e as u32).sum()
    }

    pub fn max_order(&self) -> usize {
        self.0.iter().map(|(c, _)| c.order()).max().unwrap_or(0)
    }

    pub fn power_of(&self, c: &JetCoord) -> u16 {
        self.0
            .iter()
            .find(|(d, _)| d == c)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn times_coord(&self, c: &JetCoord, e: u16) -> JetMonomial {
        let mut v = self.0.clone();
        match v.binary_search_by(|(d, _)| d.cmp(c)) {
            Ok(p) => v[p].1 += e,
            Err(p) => v.insert(p, (c.clone(), e)),
        }
        JetMonomial(v)
    }

    /// Removes `e` powers of `c`; panics if fewer are present.
    pub fn without(&self, c: &JetCoord, e: u16) -> JetMonomial {
        let mut v = self.0.clone();
        let p = v.binary_search_by(|(d, _)| d.cmp(c)).expect("factor present");
        assert!(v[p].1 >= e);
        v[p].1 -= e;
        if v[p].1 == 0 {
            v.remove(p);
        }
        JetMonomial(v)
    }

    pub fn mul(&self, other: &JetMonomial) -> JetMonomial {
        let mut out = self.clone();
        for (c, e) in &other.0 {
            out = out.times_coord(c, *e);
        }
        out
    }

    pub fn fmt_with(&self, xnames: &[String], unames: &[String]) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|(c, e)| {
                let s = c.fmt_with(xnames, unames);
                if *e == 1 {
                    s
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for JetMonomial {
    fn cmp(&self, other: &JetMonomial) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for JetMonomial {
    fn partial_cmp(&self, other: &JetMonomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for JetMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (c, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{c:?}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization() {
        let c = canonical_jet(2, 1, 0, &[1, 0]).unwrap();
        assert_eq!(c.index_vec(), vec![0, 1]);
        assert_eq!(canonical_jet(3, 2, 1, &[2, 0, 1]).unwrap().index_vec(), vec![0, 1, 2]);
        assert!(canonical_jet(2, 1, 0, &[2]).is_err());
        assert!(canonical_jet(2, 1, 1, &[0]).is_err());
        let again = JetCoord::new(c.comp(), &c.index_vec());
        assert_eq!(again, c);
    }

    #[test]
    fn dimensions() {
        assert_eq!(jet_dim(1, 1, 2), 4);
        assert_eq!(jet_dim(2, 1, 1), 5);
        assert_eq!(jet_dim(2, 2, 2), 14);
        let count = 2 + 2 + coords_up_to(2, 2, 2).len() as u128;
        assert_eq!(count, 14);
        for n in 1..4 {
            for m in 1..3 {
                for o in 1..5 {
                    assert_eq!(
                        coords_of_order(n, m, o).len() as u128,
                        m as u128 * binom((o + n - 1) as u64, o as u64).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn monomial_algebra() {
        let a = JetCoord::new(0, &[0]);
        let b = JetCoord::new(0, &[0, 0]);
        let m = JetMonomial::coord(a.clone()).times_coord(&b, 2).times_coord(&a, 1);
        assert_eq!(m.degree(), 4);
        assert_eq!(m.power_of(&a), 2);
        assert_eq!(m.without(&b, 2), JetMonomial::coord(a.clone()).times_coord(&a, 1));
        assert_eq!(a.extended(0), b);
        assert_eq!(b.reduced(0), Some(a));
    }
}
