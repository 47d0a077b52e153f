//! The three-parameter persistence module `(a, b, c) ↦ H_j F(a, b, c)` on a
//! finite grid.

mod decompose;

pub use decompose::{thin_decompose, IntervalSummand, ThinRefusal};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::field::{Field, Matrix};
use crate::homology::{image_barcodes, reduce, Barcode, Filtration, HomologyBasis, ReduceOptions};
use crate::rational::{int, midpoint, Rational};
use crate::simplicial::PrismComplex;

type IntervalBarcodes = BTreeMap<(usize, usize), Vec<Barcode>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModuleError {
    #[error("grid point {0:?} is outside the grid")]
    OutOfGrid(GridPoint),
    #[error("{0:?} and {1:?} are not comparable")]
    Incomparable(GridPoint, GridPoint),
    #[error("grid levels must be strictly increasing and non-empty")]
    BadLevels,
    #[error("Euler characteristic mismatch at {0:?}")]
    EulerMismatch(GridPoint),
}

/// Grid indices: `a <= b` into the time values, `c` into the level values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPoint {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl GridPoint {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        Self { a, b, c }
    }

    /// `self <= other` in the module's order: a wider interval at a higher
    /// level is larger.
    pub fn le(&self, other: &GridPoint) -> bool {
        other.a <= self.a && self.b <= other.b && self.c <= other.c
    }
}

/// The three elementary structure maps leaving a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    ExtendLeft,
    ExtendRight,
    RaiseLevel,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::ExtendLeft, Move::ExtendRight, Move::RaiseLevel];

    pub fn name(self) -> &'static str {
        match self {
            Move::ExtendLeft => "a-1",
            Move::ExtendRight => "b+1",
            Move::RaiseLevel => "c+1",
        }
    }
}

/// Time breakpoints and level values at which the module is sampled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid3 {
    times: Vec<Rational>,
    levels: Vec<Rational>,
}

impl Grid3 {
    /// Distinct vertex values, midpoints between consecutive ones, and one
    /// value beyond each end.
    pub fn for_prism(p: &PrismComplex) -> Self {
        let values = p.distinct_levels();
        let mut levels = Vec::with_capacity(2 * values.len() + 2);
        match (values.first(), values.last()) {
            (Some(lo), Some(hi)) => {
                levels.push(lo - Rational::one());
                for (k, v) in values.iter().enumerate() {
                    if k > 0 {
                        levels.push(midpoint(&values[k - 1], v));
                    }
                    levels.push(v.clone());
                }
                levels.push(hi + Rational::one());
            }
            _ => levels.push(int(0)),
        }
        Self {
            times: p.times().to_vec(),
            levels,
        }
    }

    pub fn with_levels(times: Vec<Rational>, levels: Vec<Rational>) -> Result<Self, ModuleError> {
        if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModuleError::BadLevels);
        }
        Ok(Self { times, levels })
    }

    /// Adds midpoints between consecutive levels.
    pub fn refined(&self) -> Self {
        let mut levels = Vec::with_capacity(2 * self.levels.len());
        for (k, v) in self.levels.iter().enumerate() {
            if k > 0 {
                levels.push(midpoint(&self.levels[k - 1], v));
            }
            levels.push(v.clone());
        }
        Self {
            times: self.times.clone(),
            levels,
        }
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn levels(&self) -> &[Rational] {
        &self.levels
    }

    pub fn contains(&self, x: &GridPoint) -> bool {
        x.a <= x.b && x.b < self.times.len() && x.c < self.levels.len()
    }

    /// Index of the largest level `<= value`, if any.
    pub fn level_below(&self, value: &Rational) -> Option<usize> {
        self.levels.partition_point(|l| l <= value).checked_sub(1)
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        let (nt, nl) = (self.times.len(), self.levels.len());
        (0..nt).flat_map(move |a| {
            (a..nt).flat_map(move |b| (0..nl).map(move |c| GridPoint { a, b, c }))
        })
    }

    pub fn top(&self) -> GridPoint {
        GridPoint {
            a: 0,
            b: self.times.len() - 1,
            c: self.levels.len() - 1,
        }
    }

    pub fn step(&self, x: &GridPoint, mv: Move) -> Option<GridPoint> {
        let y = match mv {
            Move::ExtendLeft => GridPoint {
                a: x.a.checked_sub(1)?,
                ..*x
            },
            Move::ExtendRight => GridPoint { b: x.b + 1, ..*x },
            Move::RaiseLevel => GridPoint { c: x.c + 1, ..*x },
        };
        self.contains(&y).then_some(y)
    }

    /// Points covered by `x` in the order (shrink the interval or lower `c`).
    pub fn lower_neighbors(&self, x: &GridPoint) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(3);
        if x.a < x.b {
            out.push(GridPoint { a: x.a + 1, ..*x });
            out.push(GridPoint { b: x.b - 1, ..*x });
        }
        if x.c > 0 {
            out.push(GridPoint { c: x.c - 1, ..*x });
        }
        out
    }
}

/// Dense storage over the grid, `[a][b - a][c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridArray<T> {
    data: Vec<Vec<Vec<T>>>,
}

impl<T: Clone> GridArray<T> {
    fn filled(grid: &Grid3, value: T) -> Self {
        let nt = grid.times.len();
        let nl = grid.levels.len();
        Self {
            data: (0..nt)
                .map(|a| vec![vec![value.clone(); nl]; nt - a])
                .collect(),
        }
    }

    pub fn get(&self, x: &GridPoint) -> &T {
        &self.data[x.a][x.b - x.a][x.c]
    }

    fn set(&mut self, x: &GridPoint, v: T) {
        self.data[x.a][x.b - x.a][x.c] = v;
    }

    /// Nested rows `[a][b - a][c]`.
    pub fn rows(&self) -> &[Vec<Vec<T>>] {
        &self.data
    }
}

/// `H_j F` sampled on a grid, with elementary structure-map ranks and,
/// optionally, the structure maps themselves in cycle-representative bases.
#[derive(Debug, Clone)]
pub struct Module3 {
    pub degree: usize,
    pub field: Field,
    pub grid: Grid3,
    dims: GridArray<usize>,
    edge_ranks: BTreeMap<(GridPoint, Move), usize>,
    maps: Option<BTreeMap<(GridPoint, Move), Matrix>>,
}

impl Module3 {
    pub fn dim(&self, x: &GridPoint) -> usize {
        *self.dims.get(x)
    }

    pub fn dims(&self) -> &GridArray<usize> {
        &self.dims
    }

    /// Rank of the elementary map out of `x`; `None` when the move leaves
    /// the grid.
    pub fn edge_rank(&self, x: &GridPoint, mv: Move) -> Option<usize> {
        self.grid.step(x, mv)?;
        Some(self.edge_ranks.get(&(*x, mv)).copied().unwrap_or(0))
    }

    /// Nonzero elementary ranks.
    pub fn edge_ranks(&self) -> &BTreeMap<(GridPoint, Move), usize> {
        &self.edge_ranks
    }

    /// Matrix of an elementary map between nonzero spaces, when maps were
    /// requested at construction.
    pub fn edge_map(&self, x: &GridPoint, mv: Move) -> Option<&Matrix> {
        self.maps.as_ref()?.get(&(*x, mv))
    }

    pub fn has_maps(&self) -> bool {
        self.maps.is_some()
    }

    pub fn max_dim(&self) -> usize {
        self.grid.points().map(|x| self.dim(&x)).max().unwrap_or(0)
    }

    pub fn is_thin(&self) -> bool {
        self.max_dim() <= 1
    }
}

/// Betti functions of all degrees together with the Euler function.
#[derive(Debug, Clone)]
pub struct BettiReport {
    pub grid: Grid3,
    pub field: Field,
    pub dims: Vec<GridArray<usize>>,
    pub euler: GridArray<i64>,
}

/// Answer of the indecomposability certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Indecomposability {
    Certified,
    /// Names the point that blocked the certificate.
    Inconclusive { witness: GridPoint },
}

/// Restriction of a module to finitely many points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdiagram {
    pub points: Vec<GridPoint>,
    pub dims: Vec<usize>,
    /// Composite ranks for comparable pairs `(i, j)` with `points[i] <= points[j]`.
    pub ranks: BTreeMap<(usize, usize), usize>,
}

impl Subdiagram {
    pub fn rank(&self, i: usize, j: usize) -> Result<usize, ModuleError> {
        self.ranks
            .get(&(i, j))
            .copied()
            .ok_or(ModuleError::Incomparable(self.points[i], self.points[j]))
    }
}

/// A prism complex with a grid and a coefficient field.
#[derive(Debug, Clone)]
pub struct ModuleContext<'p> {
    prism: &'p PrismComplex,
    grid: Grid3,
    field: Field,
    /// Grid stage at which each distinct vertex value enters.
    stage_of_rank: Vec<u32>,
}

/// Which parts of a module to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    /// Skip the a- and b-direction ranks (dims and c-ranks are always computed).
    pub skip_interval_edges: bool,
    /// Also compute structure-map matrices, needed to split non-thin modules.
    pub maps: bool,
}

impl<'p> ModuleContext<'p> {
    pub fn new(prism: &'p PrismComplex, field: Field) -> Self {
        Self::with_grid(prism, Grid3::for_prism(prism), field)
    }

    /// Uses a custom grid; its times must be the prism's breakpoints.
    pub fn with_grid(prism: &'p PrismComplex, grid: Grid3, field: Field) -> Self {
        assert_eq!(grid.times(), prism.times(), "grid times must match the prism");
        let stage_of_rank = prism
            .distinct_levels()
            .iter()
            .map(|v| grid.levels.partition_point(|l| l < v) as u32)
            .collect();
        Self {
            prism,
            grid,
            field,
            stage_of_rank,
        }
    }

    pub fn prism(&self) -> &'p PrismComplex {
        self.prism
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn stage(&self, simplex: usize) -> u32 {
        self.stage_of_rank[self.prism.simplices()[simplex].level_rank]
    }

    /// Prism indices of `F(a, b, levels[c])`, increasing.
    pub fn sublevel(&self, x: &GridPoint) -> Vec<usize> {
        let c = x.c as u32;
        self.prism
            .slab_indices(x.a, x.b)
            .filter(|&i| self.stage(i) <= c)
            .collect()
    }

    /// Barcodes of the slab over `[a, b]` filtered by grid level.
    pub fn level_barcodes(&self, a: usize, b: usize) -> Vec<Barcode> {
        let n_levels = self.grid.levels.len() as u32;
        let mut cells: Vec<(usize, u32)> = self
            .prism
            .slab_indices(a, b)
            .map(|i| (i, self.stage(i)))
            .filter(|&(_, s)| s < n_levels)
            .collect();
        cells.sort_unstable_by_key(|&(i, s)| (s, i));
        let f = self.filtration(&cells);
        reduce(&f, self.field, ReduceOptions::default()).barcodes()
    }

    fn filtration(&self, cells: &[(usize, u32)]) -> Filtration {
        let mut local: BTreeMap<usize, usize> = BTreeMap::new();
        let mut f = Filtration::default();
        let simplices = self.prism.simplices();
        for (pos, &(i, stage)) in cells.iter().enumerate() {
            let boundary = simplices[i]
                .boundary
                .iter()
                .map(|face| local[face])
                .collect();
            f.push(simplices[i].dim(), boundary, stage, i);
            local.insert(i, pos);
        }
        f
    }

    fn two_stage(&self, inner: &[usize], outer: &[usize]) -> Vec<Barcode> {
        let mut cells: Vec<(usize, u32)> = inner.iter().map(|&i| (i, 0)).collect();
        let mut it = inner.iter().peekable();
        for &i in outer {
            while it.next_if(|&&j| j < i).is_some() {}
            if it.next_if(|&&j| j == i).is_none() {
                cells.push((i, 1));
            }
        }
        let f = self.filtration(&cells);
        reduce(&f, self.field, ReduceOptions::default()).barcodes()
    }

    /// Rank of `H_j F(x) -> H_j F(y)`, computed directly from the inclusion.
    pub fn composite_rank(
        &self,
        x: &GridPoint,
        y: &GridPoint,
        degree: usize,
    ) -> Result<usize, ModuleError> {
        for p in [x, y] {
            if !self.grid.contains(p) {
                return Err(ModuleError::OutOfGrid(*p));
            }
        }
        if !x.le(y) {
            return Err(ModuleError::Incomparable(*x, *y));
        }
        let bars = self.two_stage(&self.sublevel(x), &self.sublevel(y));
        Ok(bars.get(degree).map_or(0, |b| b.rank_between(0, 1)))
    }

    /// `dim H_j F(x)` computed directly.
    pub fn dim_at(&self, x: &GridPoint, degree: usize) -> Result<usize, ModuleError> {
        self.composite_rank(x, x, degree)
    }

    /// Dims of every degree on every grid point, from one level sweep per
    /// interval.
    fn sweep_dims(&self) -> (Vec<GridArray<usize>>, IntervalBarcodes) {
        let nt = self.grid.times.len();
        let nl = self.grid.levels.len();
        let top = self.prism.dim().unwrap_or(0);
        let mut dims = vec![GridArray::filled(&self.grid, 0usize); top + 1];
        let mut sweeps = BTreeMap::new();
        for a in 0..nt {
            for b in a..nt {
                let bars = self.level_barcodes(a, b);
                for (j, barcode) in bars.iter().enumerate() {
                    for c in 0..nl {
                        dims[j].set(&GridPoint { a, b, c }, barcode.betti_at(c as u32));
                    }
                }
                sweeps.insert((a, b), bars);
            }
        }
        (dims, sweeps)
    }

    /// Modules of degrees `0..=max_degree`.
    pub fn build_modules(&self, max_degree: usize, opts: BuildOptions) -> Vec<Module3> {
        let (dims, sweeps) = self.sweep_dims();
        let nl = self.grid.levels.len();
        let zero = GridArray::filled(&self.grid, 0usize);
        let mut modules: Vec<Module3> = (0..=max_degree)
            .map(|j| Module3 {
                degree: j,
                field: self.field,
                grid: self.grid.clone(),
                dims: dims.get(j).cloned().unwrap_or_else(|| zero.clone()),
                edge_ranks: BTreeMap::new(),
                maps: opts.maps.then(BTreeMap::new),
            })
            .collect();

        for ((a, b), bars) in &sweeps {
            for c in 0..nl.saturating_sub(1) {
                let x = GridPoint { a: *a, b: *b, c };
                for m in modules.iter_mut() {
                    let r = bars.get(m.degree).map_or(0, |bc| bc.rank_between(c as u32, c as u32 + 1));
                    if r > 0 {
                        m.edge_ranks.insert((x, Move::RaiseLevel), r);
                    }
                }
            }
        }

        if !opts.skip_interval_edges {
            let nt = self.grid.times.len();
            for a in 0..nt {
                for b in a..nt {
                    for mv in [Move::ExtendLeft, Move::ExtendRight] {
                        self.interval_edges(&mut modules, a, b, mv);
                    }
                }
            }
        }

        if opts.maps {
            for m in modules.iter_mut() {
                self.fill_maps(m);
            }
        }
        modules
    }

    /// Ranks along `mv` from every level over `[a, b]`, from the image
    /// persistence of the smaller slab inside the larger one.
    fn interval_edges(&self, modules: &mut [Module3], a: usize, b: usize, mv: Move) {
        let Some(y0) = self.grid.step(&GridPoint { a, b, c: 0 }, mv) else {
            return;
        };
        let n_levels = self.grid.levels.len() as u32;
        let mut in_x = vec![false; self.prism.simplices().len()];
        for i in self.prism.slab_indices(a, b) {
            in_x[i] = true;
        }
        let mut cells: Vec<(usize, u32)> = self
            .prism
            .slab_indices(y0.a, y0.b)
            .map(|i| (i, self.stage(i)))
            .filter(|&(_, s)| s < n_levels)
            .collect();
        cells.sort_unstable_by_key(|&(i, s)| (s, !in_x[i], i));
        let flags: Vec<bool> = cells.iter().map(|&(i, _)| in_x[i]).collect();
        let bars = image_barcodes(&self.filtration(&cells), &flags, self.field);
        for m in modules.iter_mut() {
            let Some(bc) = bars.get(m.degree) else { continue };
            for c in 0..n_levels {
                let r = bc.betti_at(c);
                if r > 0 {
                    m.edge_ranks.insert((GridPoint { a, b, c: c as usize }, mv), r);
                }
            }
        }
    }

    pub fn build_module(&self, degree: usize, opts: BuildOptions) -> Module3 {
        self.build_modules(degree, opts).pop().expect("one module per degree")
    }

    fn basis(&self, x: &GridPoint, degree: usize) -> HomologyBasis {
        let cells: Vec<(usize, u32)> = self.sublevel(x).into_iter().map(|i| (i, 0)).collect();
        HomologyBasis::new(&self.filtration(&cells), degree, self.field)
    }

    fn fill_maps(&self, m: &mut Module3) {
        let mut bases: BTreeMap<GridPoint, HomologyBasis> = BTreeMap::new();
        let mut maps = BTreeMap::new();
        let points: Vec<GridPoint> = self.grid.points().filter(|x| m.dim(x) > 0).collect();
        for x in &points {
            for mv in Move::ALL {
                let Some(y) = self.grid.step(x, mv) else { continue };
                if m.dim(&y) == 0 {
                    continue;
                }
                for p in [*x, y] {
                    bases.entry(p).or_insert_with(|| self.basis(&p, m.degree));
                }
                let matrix = bases[x]
                    .induced_matrix(&bases[&y])
                    .expect("sublevel sets are nested");
                maps.insert((*x, mv), matrix);
            }
        }
        m.maps = Some(maps);
    }

    /// Betti functions of degrees `0..=max_degree` and the Euler function,
    /// cross-checked against the alternating simplex count.
    pub fn betti_report(&self, max_degree: usize) -> Result<BettiReport, ModuleError> {
        let (dims, _) = self.sweep_dims();
        let mut euler = GridArray::filled(&self.grid, 0i64);
        for x in self.grid.points() {
            let chi: i64 = dims
                .iter()
                .enumerate()
                .map(|(j, d)| if j % 2 == 0 { *d.get(&x) as i64 } else { -(*d.get(&x) as i64) })
                .sum();
            let count: i64 = self
                .sublevel(&x)
                .iter()
                .map(|&i| if self.prism.simplices()[i].dim().is_multiple_of(2) { 1 } else { -1 })
                .sum();
            if chi != count {
                return Err(ModuleError::EulerMismatch(x));
            }
            euler.set(&x, chi);
        }
        let zero = GridArray::filled(&self.grid, 0usize);
        let dims = (0..=max_degree)
            .map(|j| dims.get(j).cloned().unwrap_or_else(|| zero.clone()))
            .collect();
        Ok(BettiReport {
            grid: self.grid.clone(),
            field: self.field,
            dims,
            euler,
        })
    }

    /// Dims at `points` and composite ranks between every comparable pair.
    pub fn finite_subdiagram(
        &self,
        degree: usize,
        points: &[GridPoint],
    ) -> Result<Subdiagram, ModuleError> {
        let mut dims = Vec::with_capacity(points.len());
        for x in points {
            dims.push(self.dim_at(x, degree)?);
        }
        let mut ranks = BTreeMap::new();
        for (i, x) in points.iter().enumerate() {
            for (j, y) in points.iter().enumerate() {
                if x.le(y) {
                    ranks.insert((i, j), self.composite_rank(x, y, degree)?);
                }
            }
        }
        Ok(Subdiagram {
            points: points.to_vec(),
            dims,
            ranks,
        })
    }

    /// Sufficient test for indecomposability: the top point carries a
    /// single class and every minimal support point maps onto it.
    pub fn check_indecomposable_sufficient(&self, m: &Module3) -> Result<Indecomposability, ModuleError> {
        let top = self.grid.top();
        if m.dim(&top) != 1 {
            return Ok(Indecomposability::Inconclusive { witness: top });
        }
        for s in self.grid.points() {
            if m.dim(&s) == 0 {
                continue;
            }
            if self.grid.lower_neighbors(&s).iter().any(|y| m.dim(y) > 0) {
                continue;
            }
            if self.composite_rank(&s, &top, m.degree)? == 0 {
                return Ok(Indecomposability::Inconclusive { witness: s });
            }
        }
        Ok(Indecomposability::Certified)
    }
}
