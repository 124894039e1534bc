//! Refinement witnesses: given `C` and `D` on the same secrets, find a
//! row-stochastic `R` with `C ; R = D`.
//!
//! The search is one exact linear-feasibility problem over the entries of
//! `R`. Before handing it to the simplex we drop every `R[y][z]` that is
//! forced to zero (some secret reaches `y` under `C` but never reaches `z`
//! under `D`) and split what remains into independent blocks, which keeps
//! composed channels with a few hundred columns tractable.

use crate::channel::Channel;
use crate::error::{QifError, Result};
use crate::rat::Rat;
use crate::simplex::find_feasible;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Returns some `R` with `c.cascade(R) == d`, or `None` if `d` is not a
/// post-processing of `c`.
pub fn refinement_witness(c: &Channel, d: &Channel) -> Result<Option<Channel>> {
    if c.rows() != d.rows() {
        return Err(QifError::ShapeMismatch(format!(
            "refinement: input labels {:?} do not match {:?}",
            c.rows(),
            d.rows()
        )));
    }
    let (nx, ny, nz) = (c.rows().len(), c.cols().len(), d.cols().len());

    let supp_c: Vec<Vec<usize>> =
        (0..ny).map(|y| (0..nx).filter(|&x| c.at(x, y).is_positive()).collect()).collect();
    let d_pos = |x: usize, z: usize| d.at(x, z).is_positive();

    // Candidate variables R[y][z].
    let mut vars: Vec<(usize, usize)> = Vec::new();
    for (y, sy) in supp_c.iter().enumerate() {
        if sy.is_empty() {
            continue;
        }
        for z in 0..nz {
            if sy.iter().all(|&x| d_pos(x, z)) {
                vars.push((y, z));
            }
        }
    }

    // Every reachable output of C needs somewhere to go.
    for (y, sy) in supp_c.iter().enumerate() {
        if !sy.is_empty() && !vars.iter().any(|&(vy, _)| vy == y) {
            return Ok(None);
        }
    }
    // Every positive entry of D needs a contributing variable.
    for x in 0..nx {
        for z in 0..nz {
            if d_pos(x, z) && !vars.iter().any(|&(y, vz)| vz == z && c.at(x, y).is_positive()) {
                return Ok(None);
            }
        }
    }

    // Nodes 0..ny are outputs of C, ny..ny+nz outputs of D.
    let mut uf = UnionFind::new(ny + nz);
    for &(y, z) in &vars {
        uf.union(y, ny + z);
    }

    let mut r = vec![vec![Rat::zero(); nz]; ny];
    for (y, sy) in supp_c.iter().enumerate() {
        if sy.is_empty() {
            // Unreachable output: any stochastic row works.
            r[y][0] = Rat::one();
        }
    }

    let mut roots: Vec<usize> = vars.iter().map(|&(y, _)| uf.find(y)).collect();
    roots.sort_unstable();
    roots.dedup();

    for root in roots {
        let block_vars: Vec<(usize, usize)> =
            vars.iter().copied().filter(|&(y, _)| uf.find(y) == root).collect();
        let mut ys: Vec<usize> = block_vars.iter().map(|&(y, _)| y).collect();
        ys.sort_unstable();
        ys.dedup();
        let mut zs: Vec<usize> = block_vars.iter().map(|&(_, z)| z).collect();
        zs.sort_unstable();
        zs.dedup();

        let mut a: Vec<Vec<Rat>> = Vec::new();
        let mut b: Vec<Rat> = Vec::new();
        for &y in &ys {
            a.push(block_vars.iter().map(|&(vy, _)| if vy == y { Rat::one() } else { Rat::zero() }).collect());
            b.push(Rat::one());
        }
        for x in 0..nx {
            for &z in &zs {
                let row: Vec<Rat> = block_vars
                    .iter()
                    .map(|&(vy, vz)| if vz == z { c.at(x, vy).clone() } else { Rat::zero() })
                    .collect();
                if row.iter().all(Rat::is_zero) {
                    // Checked above: D[x][z] is then zero.
                    continue;
                }
                a.push(row);
                b.push(d.at(x, z).clone());
            }
        }
        let Some(sol) = find_feasible(&a, &b) else {
            return Ok(None);
        };
        for (&(y, z), v) in block_vars.iter().zip(sol) {
            r[y][z] = v;
        }
    }

    let witness = Channel::new(c.cols().to_vec(), d.cols().to_vec(), r)?;
    debug_assert_eq!(&c.cascade(&witness)?, d);
    Ok(Some(witness))
}
