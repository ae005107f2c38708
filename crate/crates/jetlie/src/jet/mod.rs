//! Jet coordinates, systems of PDEs and their skeletons.

mod coords;

pub use coords::{canonical_jet, coords_of_order, coords_up_to, jet_dim, JetCoord, JetMonomial};

use std::collections::{BTreeMap, BTreeSet};

use crate::prolong::{BaseSpace, JetPoly};
use crate::Error;

/// A completely integrable system `u^j_α = F^j_α(x, u, parametric jets)`.
///
/// The user-supplied equations may determine coordinates of any order up to
/// `κ`; the completion adds every coordinate that follows by total
/// differentiation, and the parametric coordinates are the remaining ones
/// of order below `κ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SystemSpec {
    base: BaseSpace,
    kappa: usize,
    equations: BTreeMap<JetCoord, JetPoly>,
    completed: BTreeMap<JetCoord, JetPoly>,
    parametric: Vec<JetCoord>,
    assume_integrable: bool,
}

impl SystemSpec {
    /// Validates and completes a system.
    pub fn new(
        base: BaseSpace,
        kappa: usize,
        equations: BTreeMap<JetCoord, JetPoly>,
    ) -> Result<SystemSpec, Error> {
        if kappa < 1 {
            return Err(Error::Specification("order must be at least 1".into()));
        }
        let (n, m) = (base.n, base.m);
        for (c, rhs) in &equations {
            if c.comp() >= m || c.indices().any(|k| k >= n) {
                return Err(Error::Domain(format!("coordinate {c:?} out of range")));
            }
            if c.order() == 0 || c.order() > kappa {
                return Err(Error::Specification(format!(
                    "determined coordinate {} must have order in 1..{kappa}",
                    c.fmt_with(base.xnames(), base.unames())
                )));
            }
            if !rhs.is_concrete() {
                return Err(Error::Specification(
                    "right-hand sides may not contain symmetry symbols".into(),
                ));
            }
            if *rhs.base() != base {
                return Err(Error::Specification("right-hand side base mismatch".into()));
            }
        }
        let mut spec = SystemSpec {
            base,
            kappa,
            equations,
            completed: BTreeMap::new(),
            parametric: Vec::new(),
            assume_integrable: true,
        };
        spec.complete()?;
        Ok(spec)
    }

    /// The homogeneous system `u^j_α = 0` for all `|α| = κ`.
    pub fn homogeneous(n: usize, m: usize, kappa: usize) -> Result<SystemSpec, Error> {
        let base = BaseSpace::standard(n, m);
        let eqs = coords_of_order(n, m, kappa)
            .into_iter()
            .map(|c| (c, JetPoly::zero(&base)))
            .collect();
        SystemSpec::new(base, kappa, eqs)
    }

    fn complete(&mut self) -> Result<(), Error> {
        let n = self.base.n;
        let all = coords_up_to(n, self.base.m, self.kappa);
        let user: BTreeSet<JetCoord> = self.equations.keys().cloned().collect();
        // A coordinate is derivable when some index can be removed to reach a
        // determined (user or derivable) coordinate.
        let mut determined: BTreeSet<JetCoord> = user.clone();
        for c in &all {
            if determined.contains(c) {
                continue;
            }
            if (0..n).any(|k| c.reduced(k).is_some_and(|p| determined.contains(&p))) {
                determined.insert(c.clone());
            }
        }
        self.parametric = all
            .iter()
            .filter(|c| !determined.contains(c) && c.order() < self.kappa)
            .cloned()
            .collect();
        if let Some(c) = all
            .iter()
            .find(|c| c.order() == self.kappa && !determined.contains(c))
        {
            return Err(Error::Specification(format!(
                "top-order coordinate {} is not determined by the system",
                c.fmt_with(self.base.xnames(), self.base.unames())
            )));
        }
        let param: BTreeSet<JetCoord> = self.parametric.iter().cloned().collect();
        for (c, rhs) in &self.equations {
            for d in rhs.coords() {
                if d.order() > self.kappa || !param.contains(&d) {
                    return Err(Error::Specification(format!(
                        "right-hand side of {} references non-parametric coordinate {}",
                        c.fmt_with(self.base.xnames(), self.base.unames()),
                        d.fmt_with(self.base.xnames(), self.base.unames())
                    )));
                }
            }
        }
        let mut done: BTreeMap<JetCoord, JetPoly> = self.equations.clone();
        let mut visiting = BTreeSet::new();
        for c in &all {
            if determined.contains(c) {
                self.derive(c, &determined, &mut done, &mut visiting)?;
            }
        }
        self.completed = done;
        Ok(())
    }

    fn derive(
        &self,
        c: &JetCoord,
        determined: &BTreeSet<JetCoord>,
        done: &mut BTreeMap<JetCoord, JetPoly>,
        visiting: &mut BTreeSet<JetCoord>,
    ) -> Result<JetPoly, Error> {
        if let Some(p) = done.get(c) {
            return Ok(p.clone());
        }
        if !visiting.insert(c.clone()) {
            return Err(Error::Specification(format!(
                "cyclic dependence while completing {c:?}"
            )));
        }
        let n = self.base.n;
        let (k, parent) = (0..n)
            .find_map(|k| {
                c.reduced(k)
                    .filter(|p| determined.contains(p))
                    .map(|p| (k, p))
            })
            .expect("derivable coordinate has a determined parent");
        let fp = self.derive(&parent, determined, done, visiting)?;
        let raw = fp.total_derivative(k);
        let mut map = BTreeMap::new();
        for d in raw.coords() {
            if determined.contains(&d) {
                let v = self.derive(&d, determined, done, visiting)?;
                map.insert(d, v);
            }
        }
        let out = raw.substitute(&map)?;
        visiting.remove(c);
        done.insert(c.clone(), out.clone());
        Ok(out)
    }

    pub fn base(&self) -> &BaseSpace {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn m(&self) -> usize {
        self.base.m
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// The equations as supplied.
    pub fn equations(&self) -> &BTreeMap<JetCoord, JetPoly> {
        &self.equations
    }

    /// Every determined coordinate of order at most `κ` with its reduced
    /// right-hand side.
    pub fn completed(&self) -> &BTreeMap<JetCoord, JetPoly> {
        &self.completed
    }

    pub fn parametric(&self) -> &[JetCoord] {
        &self.parametric
    }

    pub fn is_determined(&self, c: &JetCoord) -> bool {
        self.completed.contains_key(c)
    }

    /// True for the form with exactly the top-order coordinates determined.
    pub fn is_full_form(&self) -> bool {
        let top = coords_of_order(self.base.n, self.base.m, self.kappa);
        self.equations.len() == top.len() && top.iter().all(|c| self.equations.contains_key(c))
    }

    /// Every right-hand side is identically zero.
    pub fn is_homogeneous(&self) -> bool {
        self.equations.values().all(|p| p.is_zero())
    }

    pub fn assume_integrable(&self) -> bool {
        self.assume_integrable
    }

    pub fn set_assume_integrable(&mut self, v: bool) {
        self.assume_integrable = v;
    }
}

/// A free coordinate on the skeleton.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum FreeCoord {
    X(usize),
    U(usize),
    Jet(JetCoord),
}

/// The skeleton: the system's equations read as a submanifold of jet space.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub spec: SystemSpec,
    pub free_coords: Vec<FreeCoord>,
}

impl Skeleton {
    /// Replaces every determined coordinate in `expr` by its right-hand side.
    pub fn reduce(&self, expr: &JetPoly) -> Result<JetPoly, Error> {
        let mut map = BTreeMap::new();
        for c in expr.coords() {
            if c.order() > self.spec.kappa {
                return Err(Error::Domain(format!(
                    "coordinate {c:?} exceeds the system order"
                )));
            }
            if let Some(v) = self.spec.completed.get(&c) {
                map.insert(c, v.clone());
            }
        }
        if map.is_empty() {
            return Ok(expr.clone());
        }
        expr.substitute(&map)
    }

    /// Number of free coordinates `n + m + p`.
    pub fn dim(&self) -> usize {
        self.free_coords.len()
    }
}

/// Builds the skeleton of a validated system.
pub fn skeleton_build(spec: &SystemSpec) -> Result<Skeleton, Error> {
    let mut free = Vec::new();
    free.extend((0..spec.n()).map(FreeCoord::X));
    free.extend((0..spec.m()).map(FreeCoord::U));
    free.extend(spec.parametric.iter().cloned().map(FreeCoord::Jet));
    Ok(Skeleton {
        spec: spec.clone(),
        free_coords: free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::binom;

    #[test]
    fn homogeneous_skeleton() {
        let s = SystemSpec::homogeneous(1, 1, 2).unwrap();
        let sk = skeleton_build(&s).unwrap();
        assert_eq!(
            sk.free_coords,
            vec![FreeCoord::X(0), FreeCoord::U(0), FreeCoord::Jet(JetCoord::new(0, &[0]))]
        );
        assert_eq!(s.completed().len(), 1);
        let s = SystemSpec::homogeneous(2, 1, 2).unwrap();
        assert_eq!(s.completed().len(), 3);
        assert!(s.is_full_form());
        for n in 1..4 {
            for m in 1..3 {
                for k in 2..5 {
                    let s = SystemSpec::homogeneous(n, m, k).unwrap();
                    assert_eq!(
                        s.completed().len() as u128,
                        m as u128 * binom((k + n - 1) as u64, k as u64).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn general_form_completion() {
        let base = BaseSpace::standard(2, 1);
        let eqs = BTreeMap::from([
            (JetCoord::new(0, &[1]), JetPoly::zero(&base)),
            (JetCoord::new(0, &[0, 0]), JetPoly::zero(&base)),
        ]);
        let s = SystemSpec::new(base, 2, eqs).unwrap();
        assert_eq!(s.parametric(), &[JetCoord::new(0, &[0])]);
        assert_eq!(s.completed().len(), 4);
        assert!(!s.is_full_form());
        assert_eq!(skeleton_build(&s).unwrap().dim(), 4);
    }

    #[test]
    fn rhs_on_determined_is_rejected() {
        let base = BaseSpace::standard(1, 1);
        let u2 = JetCoord::new(0, &[0, 0]);
        let eqs = BTreeMap::from([(u2.clone(), JetPoly::coord(&base, &u2))]);
        assert!(matches!(
            SystemSpec::new(base, 2, eqs),
            Err(Error::Specification(_))
        ));
    }

    #[test]
    fn undetermined_top_order_is_rejected() {
        let base = BaseSpace::standard(2, 1);
        let eqs = BTreeMap::from([(JetCoord::new(0, &[0, 0]), JetPoly::zero(&base))]);
        assert!(SystemSpec::new(base, 2, eqs).is_err());
    }
}
