//! Truncated multivariate power series represented as polynomials.

use super::linalg::invert;
use super::{Multiindex, Poly, Rat, Vars};
use crate::Error;

/// `1 / p` to total degree `n`; requires a nonzero constant term.
pub fn recip(p: &Poly, n: u32) -> Result<Poly, Error> {
    let c0 = p.constant_term();
    if c0.is_zero() {
        return Err(Error::Domain("series has no inverse: zero constant term".into()));
    }
    let inv0 = c0.recip()?;
    // 1/p = inv0 · Σ (−t)^k with t = (p − c0)·inv0.
    let mut t = p.clone();
    t.add_term(Multiindex::zero(p.nvars()), &-c0);
    let t = t.scale(&-inv0.clone());
    let one = Poly::one(p.vars());
    let mut acc = one.clone();
    let mut pow = one;
    for _ in 0..n {
        pow = pow.mul_trunc(&t, n);
        if pow.is_zero() {
            break;
        }
        acc.add_scaled(&pow, &Rat::one());
    }
    Ok(acc.scale(&inv0))
}

/// `a / b` as a series to total degree `n`.
pub fn quotient(a: &Poly, b: &Poly, n: u32) -> Result<Poly, Error> {
    Ok(a.truncate(n).mul_trunc(&recip(b, n)?, n))
}

/// Linear part of a list of series: `out[i][j] = ∂f_i/∂v_j (0)`.
pub fn linear_part(f: &[Poly]) -> Vec<Vec<Rat>> {
    f.iter()
        .map(|p| {
            (0..p.nvars())
                .map(|j| p.coeff(&Multiindex::unit(p.nvars(), j)))
                .collect()
        })
        .collect()
}

/// Compositional inverse `g` with `f(g(y)) = y` to degree `n`. The series
/// `f` are in `k` variables, vanish at zero and have an invertible linear
/// part; the result uses the same variables.
pub fn revert(f: &[Poly], n: u32) -> Result<Vec<Poly>, Error> {
    let k = f.len();
    let vars: Vars = match f.first() {
        Some(p) => p.vars().clone(),
        None => return Ok(Vec::new()),
    };
    if vars.len() != k {
        return Err(Error::Domain("reversion needs as many series as variables".into()));
    }
    if f.iter().any(|p| !p.constant_term().is_zero()) {
        return Err(Error::Domain("reversion needs series vanishing at the origin".into()));
    }
    let a = linear_part(f);
    let ainv = invert(&a).ok_or_else(|| {
        Error::Domain("linear part is singular, the series cannot be inverted".into())
    })?;
    let nonlin: Vec<Poly> = f
        .iter()
        .map(|p| {
            let mut q = p.clone();
            for j in 0..k {
                q.add_term(Multiindex::unit(k, j), &-p.coeff(&Multiindex::unit(k, j)));
            }
            q
        })
        .collect();
    let y: Vec<Poly> = (0..k).map(|i| Poly::var(&vars, i)).collect();
    let apply_inv = |v: &[Poly]| -> Vec<Poly> {
        (0..k)
            .map(|i| {
                let mut acc = Poly::zero(&vars);
                for (j, vj) in v.iter().enumerate() {
                    acc.add_scaled(vj, &ainv[i][j]);
                }
                acc
            })
            .collect()
    };
    let mut g = apply_inv(&y);
    for _ in 1..n {
        let rest: Vec<Poly> = nonlin
            .iter()
            .zip(&y)
            .map(|(nl, yi)| yi - &nl.substitute(&g, &vars, Some(n)))
            .collect();
        let next = apply_inv(&rest);
        if next == g {
            break;
        }
        g = next;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recip_and_revert() {
        let v = Vars::new(&["x"]);
        let x = Poly::var(&v, 0);
        let one = Poly::one(&v);
        let p = &one - &x;
        let r = recip(&p, 5).unwrap();
        assert_eq!(r.mul_trunc(&p, 5), one);
        let f = &x + &(&x * &x);
        let g = revert(std::slice::from_ref(&f), 6).unwrap();
        assert_eq!(f.substitute(&g, &v, Some(6)), x);
    }
}
