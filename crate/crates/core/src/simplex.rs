//! Exact linear feasibility: find `x >= 0` with `A x = b`.
//!
//! Phase-1 primal simplex over rationals with Bland's rule, so there is no
//! cycling and no tolerance anywhere.

use crate::rat::Rat;

/// Dense tableau. Column layout: structural variables, then one artificial
/// per constraint, then the right-hand side.
struct Tableau {
    rows: Vec<Vec<Rat>>,
    /// Reduced costs of the phase-1 objective (sum of artificials), with the
    /// negated objective value in the last slot.
    cost: Vec<Rat>,
    basis: Vec<usize>,
    n_struct: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len()
    }

    fn rhs(&self) -> usize {
        self.width() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for &j in &nz {
                row[j] = &row[j] - &(&factor * &pivot_row[j]);
            }
        }
        if !self.cost[c].is_zero() {
            let factor = self.cost[c].clone();
            for &j in &nz {
                self.cost[j] = &self.cost[j] - &(&factor * &pivot_row[j]);
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule until no improving column remains.
    fn optimize(&mut self) {
        let rhs = self.rhs();
        loop {
            let Some(enter) = (0..rhs).find(|&j| self.cost[j].is_negative()) else {
                return;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            // Phase 1 is bounded below by zero, so an entering column always
            // has a positive entry somewhere.
            let (r, _) = leave.expect("phase-1 objective is bounded");
            self.pivot(r, enter);
        }
    }
}

/// Returns some `x >= 0` with `A x = b`, or `None` if none exists.
///
/// `a` is row-major with one row per constraint; every row must have the
/// same length.
pub fn find_feasible(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(a.len(), b.len(), "one right-hand side per constraint");
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");
    if m == 0 {
        return Some(vec![Rat::zero(); n]);
    }

    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, (arow, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut row = vec![Rat::zero(); width];
        for (j, v) in arow.iter().enumerate() {
            row[j] = if flip { -v } else { v.clone() };
        }
        row[n + i] = Rat::one();
        row[n + m] = if flip { -bi } else { bi.clone() };
        rows.push(row);
    }
    // Reduced costs: artificials cost 1; price them out of the objective row.
    let mut cost = vec![Rat::zero(); width];
    for row in &rows {
        for j in 0..n {
            cost[j] -= &row[j];
        }
        cost[n + m] -= &row[n + m];
    }
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), n_struct: n };
    t.optimize();

    let rhs = t.rhs();
    if !t.cost[rhs].is_zero() {
        return None;
    }
    let mut x = vec![Rat::zero(); t.n_struct];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < t.n_struct {
            x[bv] = t.rows[i][rhs].clone();
        }
    }
    Some(x)
}
