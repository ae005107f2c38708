//! Exact sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use super::Rat;

/// A sparse row: column index to nonzero coefficient.
pub type SparseRow = BTreeMap<usize, Rat>;

/// Incremental row echelon form with normalized pivots.
#[derive(Clone, Debug)]
pub struct RowReducer {
    ncols: usize,
    rows: Vec<SparseRow>,
    pivot_of_col: BTreeMap<usize, usize>,
}

fn axpy(row: &mut SparseRow, other: &SparseRow, c: &Rat) {
    for (&k, v) in other {
        let d = v * c;
        use std::collections::btree_map::Entry;
        match row.entry(k) {
            Entry::Vacant(e) => {
                e.insert(d);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &d;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
}

impl RowReducer {
    pub fn new(ncols: usize) -> RowReducer {
        RowReducer {
            ncols,
            rows: Vec::new(),
            pivot_of_col: BTreeMap::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the current pivots.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut from = 0usize;
        loop {
            let hit = row
                .range(from..)
                .find(|(k, _)| self.pivot_of_col.contains_key(k))
                .map(|(k, v)| (*k, v.clone()));
            match hit {
                None => return row,
                Some((k, v)) => {
                    let p = &self.rows[self.pivot_of_col[&k]];
                    axpy(&mut row, p, &(-v));
                    from = k + 1;
                }
            }
        }
    }

    /// Adds a row; returns true if it increased the rank.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let mut r = self.reduce(row);
        let Some((&lead, c)) = r.iter().next() else {
            return false;
        };
        let inv = c.recip().expect("nonzero pivot");
        for v in r.values_mut() {
            *v = &*v * &inv;
        }
        self.pivot_of_col.insert(lead, self.rows.len());
        self.rows.push(r);
        true
    }

    pub fn insert_dense(&mut self, row: &[Rat]) -> bool {
        let r: SparseRow = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i, v.clone()))
            .collect();
        self.insert(r)
    }

    /// True when `row` lies in the span of the inserted rows.
    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    /// Brings the stored rows to reduced row echelon form.
    pub fn to_rref(&mut self) {
        let cols: Vec<usize> = self.pivot_of_col.keys().rev().cloned().collect();
        for c in cols {
            let pi = self.pivot_of_col[&c];
            let prow = self.rows[pi].clone();
            for (j, row) in self.rows.iter_mut().enumerate() {
                if j == pi {
                    continue;
                }
                if let Some(v) = row.get(&c).cloned() {
                    axpy(row, &prow, &(-v));
                }
            }
        }
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivot_of_col.keys().cloned().collect()
    }

    /// Basis of the right nullspace, one vector per free column in ascending
    /// column order.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let mut me = self.clone();
        me.to_rref();
        let mut out = Vec::new();
        for f in 0..self.ncols {
            if me.pivot_of_col.contains_key(&f) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.ncols];
            v[f] = Rat::one();
            for (&pc, &ri) in &me.pivot_of_col {
                if let Some(a) = me.rows[ri].get(&f) {
                    v[pc] = -a;
                }
            }
            out.push(v);
        }
        out
    }

    /// Expresses `row` in the basis of stored rows after bringing them to
    /// RREF; returns coefficients per stored row, or `None` when not in span.
    pub fn coordinates(&mut self, row: &SparseRow) -> Option<Vec<Rat>> {
        self.to_rref();
        let mut rest = row.clone();
        let mut coords = vec![Rat::zero(); self.rows.len()];
        for (&c, &ri) in &self.pivot_of_col {
            if let Some(v) = rest.get(&c).cloned() {
                coords[ri] = v.clone();
                axpy(&mut rest, &self.rows[ri], &(-v));
            }
        }
        if rest.is_empty() {
            Some(coords)
        } else {
            None
        }
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }
}

/// Rank of a dense matrix.
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rr = RowReducer::new(ncols);
    for r in rows {
        rr.insert_dense(r);
    }
    rr.rank()
}

/// Outcome of solving `A x = b`.
#[derive(Clone, Debug)]
pub enum LinearSolution {
    Inconsistent,
    Solved {
        particular: Vec<Rat>,
        nullspace: Vec<Vec<Rat>>,
    },
}

/// Solves the sparse system whose rows are `(a_row, b_value)`.
pub fn solve_affine(ncols: usize, rows: Vec<(SparseRow, Rat)>) -> LinearSolution {
    let mut rr = RowReducer::new(ncols + 1);
    for (mut r, b) in rows {
        if !b.is_zero() {
            r.insert(ncols, b);
        }
        rr.insert(r);
    }
    if rr.pivot_of_col.contains_key(&ncols) {
        return LinearSolution::Inconsistent;
    }
    rr.to_rref();
    let mut particular = vec![Rat::zero(); ncols];
    for (&pc, &ri) in &rr.pivot_of_col {
        if let Some(b) = rr.rows[ri].get(&ncols) {
            particular[pc] = b.clone();
        }
    }
    let mut hom = RowReducer::new(ncols);
    for r in &rr.rows {
        let mut h = r.clone();
        h.remove(&ncols);
        hom.insert(h);
    }
    LinearSolution::Solved {
        particular,
        nullspace: hom.nullspace(),
    }
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip().ok()?;
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pr = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pr.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from_int(x)).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let m = vec![r(&[1, 2, 3]), r(&[2, 4, 6]), r(&[0, 1, 1])];
        assert_eq!(rank(&m), 2);
        let mut rr = RowReducer::new(3);
        for row in &m {
            rr.insert_dense(row);
        }
        let ns = rr.nullspace();
        assert_eq!(ns.len(), 1);
        for row in &m {
            let dot = row
                .iter()
                .zip(&ns[0])
                .fold(Rat::zero(), |acc, (a, b)| acc + a * b);
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn affine_solve() {
        let rows = vec![
            (SparseRow::from([(0, Rat::one()), (1, Rat::one())]), Rat::from_int(3)),
            (SparseRow::from([(0, Rat::one())]), Rat::from_int(1)),
        ];
        match solve_affine(2, rows) {
            LinearSolution::Solved {
                particular,
                nullspace,
            } => {
                assert_eq!(particular, r(&[1, 2]));
                assert!(nullspace.is_empty());
            }
            LinearSolution::Inconsistent => panic!(),
        }
        let bad = vec![
            (SparseRow::from([(0, Rat::one())]), Rat::from_int(1)),
            (SparseRow::from([(0, Rat::one())]), Rat::from_int(2)),
        ];
        assert!(matches!(solve_affine(1, bad), LinearSolution::Inconsistent));
    }

    #[test]
    fn inverse() {
        let m = vec![r(&[2, 1]), r(&[1, 1])];
        let inv = invert(&m).unwrap();
        assert_eq!(inv, vec![r(&[1, -1]), r(&[-1, 2])]);
        assert!(invert(&[r(&[1, 2]), r(&[2, 4])]).is_none());
    }
}
