//! Sup distance between families and the rank conditions an
//! `ε`-interleaving in the level direction must satisfy.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::family::PLFamily;
use crate::field::Field;
use crate::module3::{Grid3, ModuleContext};
use crate::rational::Rational;
use crate::simplicial::PrismComplex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StabilityError {
    #[error("families differ in base complex or time breakpoints")]
    MismatchedCombinatorics,
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
}

/// `max |f - g|` over all vertices of the common prism.
pub fn sup_distance(f: &PLFamily, g: &PLFamily) -> Result<Rational, StabilityError> {
    if f.base != g.base || f.time_breakpoints != g.time_breakpoints {
        return Err(StabilityError::MismatchedCombinatorics);
    }
    Ok(f.vertex_values
        .iter()
        .flatten()
        .zip(g.vertex_values.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational::zero))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `rank f(x → x+2ε) ≤ dim g(x+ε)`.
    FToG,
    /// `rank g(x → x+2ε) ≤ dim f(x+ε)`.
    GToF,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::FToG => "f->g",
            Direction::GToF => "g->f",
        }
    }
}

/// One tested inequality at the point `(t_a, t_b, level)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCheck {
    pub a: usize,
    pub b: usize,
    pub level: Rational,
    pub direction: Direction,
    pub lhs_rank: usize,
    pub rhs_dim: usize,
}

impl RankCheck {
    pub fn pass(&self) -> bool {
        self.lhs_rank <= self.rhs_dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationReport {
    pub epsilon: Rational,
    pub degree: usize,
    pub checks: Vec<RankCheck>,
}

impl PerturbationReport {
    pub fn overall(&self) -> bool {
        self.checks.iter().all(RankCheck::pass)
    }

    pub fn violations(&self) -> impl Iterator<Item = &RankCheck> {
        self.checks.iter().filter(|c| !c.pass())
    }
}

/// Checks the rank consequences of an `ε`-interleaving between `H_j` of two
/// families on the same time breakpoints.
///
/// Tested levels are the vertex values of both families and the midpoints
/// between them; `c + ε` and `c + 2ε` are added to the grid so every
/// comparison is exact.
pub fn check_interleaving_necessary(
    pf: &PrismComplex,
    pg: &PrismComplex,
    degree: usize,
    epsilon: &Rational,
    field: Field,
) -> Result<PerturbationReport, StabilityError> {
    if pf.times() != pg.times() {
        return Err(StabilityError::MismatchedCombinatorics);
    }
    if epsilon.is_negative() {
        return Err(StabilityError::NegativeEpsilon);
    }
    let mut tested: BTreeSet<Rational> = BTreeSet::new();
    for p in [pf, pg] {
        tested.extend(Grid3::for_prism(p).levels().iter().cloned());
    }
    let two_eps = epsilon + epsilon;
    let mut all: BTreeSet<Rational> = tested.clone();
    for c in &tested {
        all.insert(c + epsilon);
        all.insert(c + &two_eps);
    }
    let grid = Grid3::with_levels(pf.times().to_vec(), all.into_iter().collect())
        .expect("levels are sorted and distinct");
    let level_index = |c: &Rational| grid.levels().binary_search(c).expect("level inserted");

    let cf = ModuleContext::with_grid(pf, grid.clone(), field);
    let cg = ModuleContext::with_grid(pg, grid.clone(), field);
    let nt = grid.times().len();
    let mut checks = Vec::new();
    for a in 0..nt {
        for b in a..nt {
            let bars_f = cf.level_barcodes(a, b);
            let bars_g = cg.level_barcodes(a, b);
            let empty = Default::default();
            let bf = bars_f.get(degree).unwrap_or(&empty);
            let bg = bars_g.get(degree).unwrap_or(&empty);
            for c in &tested {
                let i0 = level_index(c) as u32;
                let i1 = level_index(&(c + epsilon)) as u32;
                let i2 = level_index(&(c + &two_eps)) as u32;
                for (direction, src, dst) in
                    [(Direction::FToG, bf, bg), (Direction::GToF, bg, bf)]
                {
                    checks.push(RankCheck {
                        a,
                        b,
                        level: c.clone(),
                        direction,
                        lhs_rank: src.rank_between(i0, i2),
                        rhs_dim: dst.betti_at(i1),
                    });
                }
            }
        }
    }
    Ok(PerturbationReport {
        epsilon: epsilon.clone(),
        degree,
        checks,
    })
}
