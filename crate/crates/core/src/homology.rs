//! Simplicial homology over GF(p) by boundary-matrix column reduction.
//!
//! Everything is unreduced homology: two disjoint points have `H_0 = k^2`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Field, Matrix};
use crate::simplicial::{facets, Simplex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomologyError {
    #[error("face {face:?} of {simplex:?} is missing (input is not downward closed)")]
    NotClosed { simplex: Simplex, face: Simplex },
    #[error("simplex {0:?} of the subcomplex is not in the supercomplex")]
    NotContained(Simplex),
    #[error("filtration entry {index} ({simplex:?}) precedes one of its faces or an earlier stage")]
    BadOrder { index: usize, simplex: Simplex },
    #[error("simplex {0:?} appears twice")]
    Duplicate(Simplex),
    #[error("malformed simplex {0:?}")]
    Malformed(Simplex),
}

/// One persistence interval `[birth, death)`; `death == None` never dies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bar {
    pub birth: u32,
    pub death: Option<u32>,
}

impl Bar {
    /// Whether the class is alive at `stage`.
    pub fn is_alive_at(&self, stage: u32) -> bool {
        self.birth <= stage && self.death.is_none_or(|d| stage < d)
    }
}

/// Degree-`j` bars of a staged filtration. Zero-length bars are omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Barcode {
    pub degree: usize,
    pub bars: Vec<Bar>,
}

impl Barcode {
    /// Betti number of the prefix subcomplex made of stages `<= stage`.
    pub fn betti_at(&self, stage: u32) -> usize {
        self.bars.iter().filter(|b| b.is_alive_at(stage)).count()
    }

    /// Rank of the map induced from stage `s` into stage `t >= s`.
    pub fn rank_between(&self, s: u32, t: u32) -> usize {
        self.bars
            .iter()
            .filter(|b| b.birth <= s && b.death.is_none_or(|d| t < d))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Skip columns already known to reduce to zero ("clearing").
    pub clearing: bool,
    /// Keep the change-of-basis columns, needed for cycle representatives.
    pub track_cycles: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self {
            clearing: true,
            track_cycles: false,
        }
    }
}

/// A filtered cell complex in a face-compatible order.
///
/// `boundary[i]` lists the faces of cell `i` (all with smaller index); the
/// face at position `k` carries sign `(-1)^k`.
#[derive(Debug, Clone, Default)]
pub struct Filtration {
    pub(crate) dims: Vec<usize>,
    pub(crate) boundary: Vec<Vec<usize>>,
    pub(crate) stages: Vec<u32>,
    pub(crate) labels: Vec<usize>,
}

impl Filtration {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub(crate) fn push(&mut self, dim: usize, boundary: Vec<usize>, stage: u32, label: usize) {
        debug_assert!(boundary.iter().all(|&f| f < self.dims.len()));
        self.dims.push(dim);
        self.boundary.push(boundary);
        self.stages.push(stage);
        self.labels.push(label);
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.dims.iter().copied().max()
    }

    /// Validates an ordered, staged simplex list.
    pub fn from_staged_simplices(cells: &[(Simplex, u32)]) -> Result<Self, HomologyError> {
        let mut index: BTreeMap<Simplex, usize> = BTreeMap::new();
        let mut out = Filtration::default();
        for (i, (raw, stage)) in cells.iter().enumerate() {
            let s = canonical(raw)?;
            if i > 0 && *stage < out.stages[i - 1] {
                return Err(HomologyError::BadOrder { index: i, simplex: s });
            }
            let mut boundary = Vec::with_capacity(s.len());
            if s.len() > 1 {
                for face in facets(&s) {
                    match index.get(&face) {
                        Some(&f) => boundary.push(f),
                        None => {
                            return Err(HomologyError::BadOrder {
                                index: i,
                                simplex: s.clone(),
                            })
                        }
                    }
                }
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(HomologyError::Duplicate(s));
            }
            out.push(s.len() - 1, boundary, *stage, i);
        }
        Ok(out)
    }
}

fn canonical(raw: &[u32]) -> Result<Simplex, HomologyError> {
    let mut s = raw.to_vec();
    s.sort_unstable();
    if s.is_empty() || s.windows(2).any(|w| w[0] == w[1]) {
        return Err(HomologyError::Malformed(raw.to_vec()));
    }
    Ok(s)
}

/// Sorts a simplex set into `(dim, lex)` order and checks downward closure.
fn closed_sorted(complex: &[Simplex]) -> Result<Vec<Simplex>, HomologyError> {
    let mut cells = complex
        .iter()
        .map(|s| canonical(s))
        .collect::<Result<Vec<_>, _>>()?;
    cells.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    if let Some(w) = cells.windows(2).find(|w| w[0] == w[1]) {
        return Err(HomologyError::Duplicate(w[0].clone()));
    }
    let set: BTreeMap<&[u32], ()> = cells.iter().map(|s| (s.as_slice(), ())).collect();
    for s in &cells {
        if s.len() > 1 {
            if let Some(face) = facets(s).find(|f| !set.contains_key(f.as_slice())) {
                return Err(HomologyError::NotClosed {
                    simplex: s.clone(),
                    face,
                });
            }
        }
    }
    Ok(cells)
}

type Column = Vec<(usize, u32)>;

/// `target -= factor * source` on sorted sparse columns.
fn axpy(target: &mut Column, source: &Column, factor: u32, field: Field) {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        let take_t = j == source.len() || (i < target.len() && target[i].0 < source[j].0);
        let take_s = i == target.len() || (j < source.len() && source[j].0 < target[i].0);
        if take_t {
            out.push(target[i]);
            i += 1;
        } else if take_s {
            out.push((source[j].0, field.neg(field.mul(factor, source[j].1))));
            j += 1;
        } else {
            let v = field.sub(target[i].1, field.mul(factor, source[j].1));
            if v != 0 {
                out.push((target[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    *target = out;
}

/// Result of reducing `D` to `R = D V`.
#[derive(Debug, Clone)]
pub struct Reduction {
    field: Field,
    dims: Vec<usize>,
    stages: Vec<u32>,
    labels: Vec<usize>,
    r: Vec<Column>,
    v: Option<Vec<Column>>,
    low_to_col: Vec<Option<usize>>,
}

/// Reduces the boundary matrix of `filtration`.
pub fn reduce(filtration: &Filtration, field: Field, opts: ReduceOptions) -> Reduction {
    let n = filtration.len();
    let p_minus_1 = field.neg(1);
    let mut r: Vec<Column> = filtration
        .boundary
        .iter()
        .map(|faces| {
            let mut col: Column = faces
                .iter()
                .enumerate()
                .map(|(k, &f)| (f, if k % 2 == 0 { 1 } else { p_minus_1 }))
                .filter(|&(_, c)| c != 0)
                .collect();
            col.sort_unstable_by_key(|e| e.0);
            col
        })
        .collect();
    let mut v: Option<Vec<Column>> = opts
        .track_cycles
        .then(|| (0..n).map(|i| vec![(i, 1)]).collect());
    let mut low_to_col: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];

    let max_dim = filtration.max_dim().unwrap_or(0);
    let order: Vec<usize> = if opts.clearing {
        (1..=max_dim)
            .rev()
            .flat_map(|d| (0..n).filter(move |&i| filtration.dims[i] == d))
            .collect()
    } else {
        (0..n).collect()
    };

    for j in order {
        if cleared[j] {
            continue;
        }
        while let Some(&(low, coeff)) = r[j].last() {
            let Some(k) = low_to_col[low] else { break };
            let factor = field.mul(coeff, field.inv(r[k].last().unwrap().1));
            let pivot_col = core::mem::take(&mut r[k]);
            axpy(&mut r[j], &pivot_col, factor, field);
            r[k] = pivot_col;
            if let Some(v) = v.as_mut() {
                let vk = core::mem::take(&mut v[k]);
                axpy(&mut v[j], &vk, factor, field);
                v[k] = vk;
            }
        }
        if let Some(&(low, _)) = r[j].last() {
            low_to_col[low] = Some(j);
            if opts.clearing {
                cleared[low] = true;
                r[low].clear();
                if let Some(v) = v.as_mut() {
                    v[low] = r[j].clone();
                }
            }
        }
    }
    Reduction {
        field,
        dims: filtration.dims.clone(),
        stages: filtration.stages.clone(),
        labels: filtration.labels.clone(),
        r,
        v,
        low_to_col,
    }
}

impl Reduction {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Whether cell `i` creates a class that is never killed.
    pub fn is_essential(&self, i: usize) -> bool {
        self.r[i].is_empty() && self.low_to_col[i].is_none()
    }

    /// Number of essential classes in each degree `0..=max_dim`.
    pub fn betti_numbers(&self) -> Vec<usize> {
        let mut out = vec![0; self.dims.iter().max().map_or(0, |d| d + 1)];
        for i in 0..self.len() {
            if self.is_essential(i) {
                out[self.dims[i]] += 1;
            }
        }
        out
    }

    pub fn betti(&self, j: usize) -> usize {
        self.betti_numbers().get(j).copied().unwrap_or(0)
    }

    /// Barcodes of all degrees `0..=max_dim`.
    pub fn barcodes(&self) -> Vec<Barcode> {
        let top = self.dims.iter().max().map_or(0, |d| d + 1);
        let mut out: Vec<Barcode> = (0..top)
            .map(|degree| Barcode {
                degree,
                bars: Vec::new(),
            })
            .collect();
        for i in 0..self.len() {
            let d = self.dims[i];
            if let Some(k) = self.low_to_col[i] {
                if self.stages[i] < self.stages[k] {
                    out[d].bars.push(Bar {
                        birth: self.stages[i],
                        death: Some(self.stages[k]),
                    });
                }
            } else if self.r[i].is_empty() {
                out[d].bars.push(Bar {
                    birth: self.stages[i],
                    death: None,
                });
            }
        }
        for b in &mut out {
            b.bars.sort_unstable();
        }
        out
    }
}

/// Barcodes of the images `H_j(L_s) -> H_j(K_s)`, where `K` is `filtration`
/// and `L` is the subcomplex of cells flagged in `in_sub`.
///
/// Rows of the boundary matrix are reordered so cells of `L` come first;
/// a reduced column whose lowest entry is a birth cell of `L` kills that
/// image class.
pub fn image_barcodes(filtration: &Filtration, in_sub: &[bool], field: Field) -> Vec<Barcode> {
    let n = filtration.len();
    let mut sub = Filtration::default();
    let mut sub_pos = vec![usize::MAX; n];
    for i in (0..n).filter(|&i| in_sub[i]) {
        let boundary = filtration.boundary[i].iter().map(|&f| sub_pos[f]).collect();
        sub_pos[i] = sub.len();
        sub.push(filtration.dims[i], boundary, filtration.stages[i], i);
    }
    let births: Vec<usize> = {
        let r = reduce(&sub, field, ReduceOptions::default());
        (0..sub.len())
            .filter(|&k| r.r[k].is_empty())
            .map(|k| sub.labels[k])
            .collect()
    };

    let n_sub = sub.len();
    let mut row = vec![0usize; n];
    let mut next_other = n_sub;
    for i in 0..n {
        row[i] = if in_sub[i] {
            sub_pos[i]
        } else {
            next_other += 1;
            next_other - 1
        };
    }
    let p_minus_1 = field.neg(1);
    let mut low_to_col: Vec<Option<usize>> = vec![None; n];
    let mut cols: Vec<Column> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col: Column = filtration.boundary[j]
            .iter()
            .enumerate()
            .map(|(k, &f)| (row[f], if k % 2 == 0 { 1 } else { p_minus_1 }))
            .filter(|&(_, c)| c != 0)
            .collect();
        col.sort_unstable_by_key(|e| e.0);
        while let Some(&(low, coeff)) = col.last() {
            let Some(k) = low_to_col[low] else { break };
            let pivot: &Column = &cols[k];
            let factor = field.mul(coeff, field.inv(pivot.last().unwrap().1));
            axpy(&mut col, pivot, factor, field);
        }
        if let Some(&(low, _)) = col.last() {
            low_to_col[low] = Some(j);
        }
        cols.push(col);
    }

    let top = filtration.max_dim().map_or(0, |d| d + 1);
    let mut out: Vec<Barcode> = (0..top)
        .map(|degree| Barcode {
            degree,
            bars: Vec::new(),
        })
        .collect();
    for sigma in births {
        let birth = filtration.stages[sigma];
        let death = low_to_col[row[sigma]].map(|t| filtration.stages[t]);
        if death.is_none_or(|d| birth < d) {
            out[filtration.dims[sigma]].bars.push(Bar { birth, death });
        }
    }
    for b in &mut out {
        b.bars.sort_unstable();
    }
    out
}

/// A basis of `H_j` given by essential cycle representatives.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    reduction: Reduction,
    degree: usize,
    essentials: Vec<usize>,
    coordinate: BTreeMap<usize, usize>,
}

impl HomologyBasis {
    /// Requires a single-stage filtration; labels must be increasing.
    pub fn new(filtration: &Filtration, degree: usize, field: Field) -> Self {
        debug_assert!(filtration.labels.windows(2).all(|w| w[0] < w[1]));
        let reduction = reduce(
            filtration,
            field,
            ReduceOptions {
                clearing: true,
                track_cycles: true,
            },
        );
        let essentials: Vec<usize> = (0..reduction.len())
            .filter(|&i| reduction.dims[i] == degree && reduction.is_essential(i))
            .collect();
        let coordinate = essentials.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        Self {
            reduction,
            degree,
            essentials,
            coordinate,
        }
    }

    pub fn dim(&self) -> usize {
        self.essentials.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Cycle representative of basis element `k`, keyed by cell label.
    pub fn representative(&self, k: usize) -> Vec<(usize, u32)> {
        let v = self.reduction.v.as_ref().expect("cycles tracked");
        v[self.essentials[k]]
            .iter()
            .map(|&(i, c)| (self.reduction.labels[i], c))
            .collect()
    }

    fn local(&self, label: usize) -> Option<usize> {
        self.reduction.labels.binary_search(&label).ok()
    }

    /// Coordinates of the class of a cycle given by labelled coefficients.
    ///
    /// Returns `None` if the chain mentions cells outside this complex or is
    /// not a cycle.
    pub fn coordinates(&self, cycle: &[(usize, u32)]) -> Option<Vec<u32>> {
        let field = self.reduction.field;
        let mut z: Column = cycle
            .iter()
            .map(|&(label, c)| self.local(label).map(|i| (i, c)))
            .collect::<Option<_>>()?;
        z.sort_unstable_by_key(|e| e.0);
        let v = self.reduction.v.as_ref().expect("cycles tracked");
        let mut coords = vec![0u32; self.dim()];
        while let Some(&(top, coeff)) = z.last() {
            if let Some(k) = self.reduction.low_to_col[top] {
                let col = &self.reduction.r[k];
                let factor = field.mul(coeff, field.inv(col.last().unwrap().1));
                axpy(&mut z, col, factor, field);
            } else if let Some(&slot) = self.coordinate.get(&top) {
                coords[slot] = coeff;
                axpy(&mut z, &v[top], coeff, field);
            } else {
                return None;
            }
        }
        Some(coords)
    }

    /// Matrix of `H_j(self) -> H_j(target)` for an inclusion of complexes
    /// sharing cell labels.
    pub fn induced_matrix(&self, target: &HomologyBasis) -> Option<Matrix> {
        let mut columns = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            columns.push(target.coordinates(&self.representative(k))?);
        }
        Some(Matrix::from_columns(target.dim(), &columns))
    }
}

/// Builds a single-stage filtration from a downward-closed simplex set.
fn filtration_of(complex: &[Simplex]) -> Result<Filtration, HomologyError> {
    let cells = closed_sorted(complex)?;
    let staged: Vec<(Simplex, u32)> = cells.into_iter().map(|s| (s, 0)).collect();
    Filtration::from_staged_simplices(&staged)
}

/// Dimension of `H_j` of a downward-closed simplex set.
pub fn betti(complex: &[Simplex], j: usize, field: Field) -> Result<usize, HomologyError> {
    let f = filtration_of(complex)?;
    Ok(reduce(&f, field, ReduceOptions::default()).betti(j))
}

/// All Betti numbers `β_0..=β_dim`; empty for the empty complex.
pub fn betti_numbers(complex: &[Simplex], field: Field) -> Result<Vec<usize>, HomologyError> {
    let f = filtration_of(complex)?;
    Ok(reduce(&f, field, ReduceOptions::default()).betti_numbers())
}

/// Rank of `H_j(sub) -> H_j(sup)` induced by inclusion.
pub fn induced_rank(
    sub: &[Simplex],
    sup: &[Simplex],
    j: usize,
    field: Field,
) -> Result<usize, HomologyError> {
    let f = two_stage(sub, sup)?;
    Ok(rank_from_two_stage(&f, j, field))
}

fn two_stage(sub: &[Simplex], sup: &[Simplex]) -> Result<Filtration, HomologyError> {
    let inner = closed_sorted(sub)?;
    let outer = closed_sorted(sup)?;
    let outer_set: BTreeMap<&[u32], ()> = outer.iter().map(|s| (s.as_slice(), ())).collect();
    if let Some(s) = inner.iter().find(|s| !outer_set.contains_key(s.as_slice())) {
        return Err(HomologyError::NotContained(s.clone()));
    }
    let inner_set: BTreeMap<&[u32], ()> = inner.iter().map(|s| (s.as_slice(), ())).collect();
    let mut staged: Vec<(Simplex, u32)> = inner.iter().map(|s| (s.clone(), 0)).collect();
    staged.extend(
        outer
            .iter()
            .filter(|s| !inner_set.contains_key(s.as_slice()))
            .map(|s| (s.clone(), 1)),
    );
    Filtration::from_staged_simplices(&staged)
}

/// Classes born in stage 0 that survive stage 1.
pub(crate) fn rank_from_two_stage(f: &Filtration, j: usize, field: Field) -> usize {
    let red = reduce(f, field, ReduceOptions::default());
    red.barcodes()
        .get(j)
        .map_or(0, |b| b.rank_between(0, 1))
}

/// Persistence barcodes (all degrees) of an ordered, staged simplex list.
pub fn staged_reduce(
    filtration: &[(Simplex, u32)],
    field: Field,
) -> Result<Vec<Barcode>, HomologyError> {
    let f = Filtration::from_staged_simplices(filtration)?;
    Ok(reduce(&f, field, ReduceOptions::default()).barcodes())
}
