//! Exact arithmetic foundation: rationals, multiindices, polynomials and
//! linear algebra over the rationals.

pub mod linalg;
mod multiindex;
mod poly;
mod rat;
pub mod series;

pub use multiindex::{multiindex_enumerate, multiindices_of_order, Multiindex};
pub use poly::{fmt_monomial, fmt_terms, poly_arith, Poly, PolyOp, Vars};
pub use rat::Rat;

use crate::Error;

/// Binomial coefficient `p! / (q! (p-q)!)`.
pub fn binom(p: u64, q: u64) -> Result<u128, Error> {
    if q > p {
        return Err(Error::Domain(format!("binom({p}, {q}): q exceeds p")));
    }
    let q = q.min(p - q);
    let mut acc: u128 = 1;
    for i in 0..q {
        acc = acc
            .checked_mul((p - i) as u128)
            .ok_or_else(|| Error::Resource(format!("binom({p}, {q}) overflows")))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

/// Binomial coefficient as a rational, for use inside formulas.
/// Zero when `q > p`; never overflows.
pub fn binom_rat(p: u64, q: u64) -> Rat {
    if q > p {
        return Rat::zero();
    }
    let q = q.min(p - q);
    let mut acc = Rat::one();
    for i in 0..q {
        acc = &(&acc * &Rat::from(p - i)) * &Rat::new(1, i as i64 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_examples() {
        assert_eq!(binom(4, 2).unwrap(), 6);
        assert_eq!(binom(3, 2).unwrap(), 3);
        assert_eq!(binom(9, 0).unwrap(), 1);
        assert!(binom(2, 3).is_err());
    }
}
