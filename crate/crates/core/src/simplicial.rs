//! Finite simplicial complexes, the prism triangulation of `I × X`, and slab
//! sublevel subcomplexes `F(a, b, c)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::rational::Rational;

/// A simplex as a strictly increasing list of vertex ids.
pub type Simplex = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimplicialError {
    #[error("vertex {vertex} out of range for a complex with {n_vertices} vertices")]
    VertexOutOfRange { vertex: u32, n_vertices: usize },
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Simplex),
    #[error("empty simplex")]
    EmptySimplex,
    #[error("simplex {0:?} listed twice")]
    DuplicateSimplex(Simplex),
    #[error("face {face:?} of simplex {simplex:?} is missing (not downward closed)")]
    MissingFace { simplex: Simplex, face: Simplex },
    #[error("time breakpoints must be strictly increasing from 0 to 1")]
    BadBreakpoints,
    #[error("vertex value matrix has shape {found:?}, expected {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("time index {index} out of range ({len} breakpoints)")]
    TimeIndexOutOfRange { index: usize, len: usize },
    #[error("slab start {a} exceeds slab end {b}")]
    InvertedSlab { a: usize, b: usize },
}

/// A finite abstract simplicial complex on the vertices `0..n_vertices`.
///
/// Every vertex id below `n_vertices` is a 0-simplex. Simplices are kept in
/// `(dimension, lexicographic)` order, so faces precede cofaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    n_vertices: usize,
    simplices: Vec<Simplex>,
    index: BTreeMap<Simplex, usize>,
}

impl SimplicialComplex {
    /// Validates a simplex list. Vertices are implicit; every other face of a
    /// listed simplex must be listed too.
    pub fn new<I>(n_vertices: usize, simplices: I) -> Result<Self, SimplicialError>
    where
        I: IntoIterator<Item = Simplex>,
    {
        let mut all: Vec<Simplex> = (0..n_vertices as u32).map(|v| vec![v]).collect();
        let mut seen = BTreeMap::new();
        for mut s in simplices {
            normalize(&mut s, n_vertices)?;
            if s.len() == 1 {
                continue;
            }
            if seen.insert(s.clone(), ()).is_some() {
                return Err(SimplicialError::DuplicateSimplex(s));
            }
            all.push(s);
        }
        for s in seen.keys() {
            for face in facets(s) {
                if face.len() > 1 && !seen.contains_key(&face) {
                    return Err(SimplicialError::MissingFace {
                        simplex: s.clone(),
                        face,
                    });
                }
            }
        }
        Ok(Self::from_sorted(n_vertices, all))
    }

    /// Downward closure of the given simplices.
    pub fn from_maximal<I>(n_vertices: usize, maximal: I) -> Result<Self, SimplicialError>
    where
        I: IntoIterator<Item = Simplex>,
    {
        let mut set = BTreeMap::new();
        for v in 0..n_vertices as u32 {
            set.insert(vec![v], ());
        }
        let mut stack = Vec::new();
        for mut s in maximal {
            normalize(&mut s, n_vertices)?;
            stack.push(s);
        }
        while let Some(s) = stack.pop() {
            if set.insert(s.clone(), ()).is_none() && s.len() > 1 {
                stack.extend(facets(&s));
            }
        }
        Ok(Self::from_sorted(n_vertices, set.into_keys().collect()))
    }

    fn from_sorted(n_vertices: usize, mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            n_vertices,
            simplices,
            index,
        }
    }

    pub fn empty() -> Self {
        Self::from_sorted(0, Vec::new())
    }

    pub fn point() -> Self {
        Self::from_sorted(1, vec![vec![0]])
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges = (1..n as u32).map(|i| vec![i - 1, i]);
        Self::from_maximal(n, edges).expect("path is valid")
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`; requires `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simplicial circle needs at least 3 vertices");
        let edges = (0..n as u32).map(|i| vec![i, (i + 1) % n as u32]);
        Self::from_maximal(n, edges).expect("cycle is valid")
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    #[inline]
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Dimension of the complex, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.last().map(|s| s.len() - 1)
    }

    pub fn index_of(&self, simplex: &[u32]) -> Option<usize> {
        self.index.get(simplex).copied()
    }

    pub fn contains(&self, simplex: &[u32]) -> bool {
        self.index.contains_key(simplex)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .map(|s| if s.len() % 2 == 1 { 1 } else { -1 })
            .sum()
    }

    /// Simplices of dimension at least one, in canonical order.
    pub fn higher_simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(|s| s.len() > 1)
    }

    /// Vertices adjacent to `v`.
    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .simplices
            .iter()
            .filter(|s| s.len() == 2 && s.contains(&v))
            .map(|s| if s[0] == v { s[1] } else { s[0] })
            .collect();
        out.sort_unstable();
        out
    }

    /// Link of a vertex: `{ τ \ {v} : v ∈ τ, τ ≠ {v} }`.
    pub fn link(&self, v: u32) -> Vec<Simplex> {
        self.simplices
            .iter()
            .filter(|s| s.len() > 1 && s.contains(&v))
            .map(|s| s.iter().copied().filter(|&w| w != v).collect())
            .collect()
    }
}

fn normalize(s: &mut Simplex, n_vertices: usize) -> Result<(), SimplicialError> {
    if s.is_empty() {
        return Err(SimplicialError::EmptySimplex);
    }
    s.sort_unstable();
    if let Some(&v) = s.iter().find(|&&v| v as usize >= n_vertices) {
        return Err(SimplicialError::VertexOutOfRange {
            vertex: v,
            n_vertices,
        });
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(SimplicialError::RepeatedVertex(s.clone()));
    }
    Ok(())
}

/// Codimension-one faces; face `i` omits vertex `i`.
pub(crate) fn facets(s: &[u32]) -> impl Iterator<Item = Simplex> + '_ {
    (0..s.len()).map(move |i| {
        s.iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &v)| v)
            .collect()
    })
}

/// A simplex of the prism triangulation with cached bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrismSimplex {
    /// Prism vertex ids `time_index * n_base + base_vertex`, increasing.
    pub vertices: Vec<u32>,
    /// Indices of the codimension-one faces; face `i` omits vertex `i`.
    pub boundary: Vec<usize>,
    pub t_min: usize,
    pub t_max: usize,
    /// Position of the largest vertex value in [`PrismComplex::distinct_levels`].
    pub level_rank: usize,
}

impl PrismSimplex {
    #[inline]
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Staircase triangulation of `I × X` carrying the vertex values of a
/// piecewise-linear family.
#[derive(Debug, Clone)]
pub struct PrismComplex {
    base: SimplicialComplex,
    times: Vec<Rational>,
    values: Vec<Vec<Rational>>,
    simplices: Vec<PrismSimplex>,
    distinct_levels: Vec<Rational>,
    by_start: Vec<Vec<usize>>,
}

impl PrismComplex {
    #[inline]
    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    #[inline]
    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    /// Row `i` holds the fiber values at breakpoint `i`.
    #[inline]
    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    #[inline]
    pub fn simplices(&self) -> &[PrismSimplex] {
        &self.simplices
    }

    /// Sorted distinct vertex values.
    #[inline]
    pub fn distinct_levels(&self) -> &[Rational] {
        &self.distinct_levels
    }

    pub fn n_vertices(&self) -> usize {
        self.times.len() * self.base.n_vertices()
    }

    pub fn vertex(&self, time_index: usize, base_vertex: u32) -> u32 {
        (time_index * self.base.n_vertices()) as u32 + base_vertex
    }

    /// `(time index, base vertex)` of a prism vertex.
    pub fn split_vertex(&self, v: u32) -> (usize, u32) {
        let n = self.base.n_vertices() as u32;
        ((v / n) as usize, v % n)
    }

    pub fn vertex_time(&self, v: u32) -> &Rational {
        &self.times[self.split_vertex(v).0]
    }

    pub fn vertex_level(&self, v: u32) -> &Rational {
        let (t, x) = self.split_vertex(v);
        &self.values[t][x as usize]
    }

    pub fn dim(&self) -> Option<usize> {
        self.simplices.last().map(PrismSimplex::dim)
    }

    pub fn max_level(&self) -> Option<&Rational> {
        self.distinct_levels.last()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .map(|s| if s.dim() % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Simplices whose time indices lie in `[a, b]`, in global order.
    pub(crate) fn slab_indices(&self, a: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
        let mut idx: Vec<usize> = self.by_start[a..=b]
            .iter()
            .flatten()
            .copied()
            .filter(|&i| self.simplices[i].t_max <= b)
            .collect();
        idx.sort_unstable();
        idx.into_iter()
    }

    fn check_slab(&self, a: usize, b: usize) -> Result<(), SimplicialError> {
        let len = self.times.len();
        for index in [a, b] {
            if index >= len {
                return Err(SimplicialError::TimeIndexOutOfRange { index, len });
            }
        }
        if a > b {
            return Err(SimplicialError::InvertedSlab { a, b });
        }
        Ok(())
    }

    /// The full subcomplex over times `[t_a, t_b]` spanned by vertices with
    /// value at most `c`.
    pub fn slab_sublevel(
        &self,
        a: usize,
        b: usize,
        c: &Rational,
    ) -> Result<SlabSubcomplex<'_>, SimplicialError> {
        self.check_slab(a, b)?;
        let rank = self.distinct_levels.partition_point(|l| l <= c);
        let simplices = self
            .slab_indices(a, b)
            .filter(|&i| self.simplices[i].level_rank < rank)
            .collect();
        Ok(SlabSubcomplex {
            parent: self,
            a,
            b,
            c: c.clone(),
            simplices,
        })
    }

    /// The whole slab over `[t_a, t_b]` with no level constraint.
    pub fn slab(&self, a: usize, b: usize) -> Result<SlabSubcomplex<'_>, SimplicialError> {
        self.check_slab(a, b)?;
        let c = self
            .distinct_levels
            .last()
            .cloned()
            .unwrap_or_else(|| Rational::from_integer(0.into()));
        Ok(SlabSubcomplex {
            parent: self,
            a,
            b,
            c,
            simplices: self.slab_indices(a, b).collect(),
        })
    }
}

/// Builds the prism complex over `base` with fiber values `vertex_values[i]`
/// at breakpoint `time_breakpoints[i]`.
pub fn build_prism(
    base: &SimplicialComplex,
    time_breakpoints: &[Rational],
    vertex_values: &[Vec<Rational>],
) -> Result<PrismComplex, SimplicialError> {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if time_breakpoints.len() < 2
        || time_breakpoints[0] != zero
        || *time_breakpoints.last().unwrap() != one
        || time_breakpoints.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(SimplicialError::BadBreakpoints);
    }
    let n = base.n_vertices();
    let rows = time_breakpoints.len();
    let bad_row = vertex_values.iter().find(|r| r.len() != n);
    if vertex_values.len() != rows || bad_row.is_some() {
        return Err(SimplicialError::DimensionMismatch {
            expected: (rows, n),
            found: (vertex_values.len(), bad_row.map_or(n, Vec::len)),
        });
    }

    let mut distinct_levels: Vec<Rational> = vertex_values.iter().flatten().cloned().collect();
    distinct_levels.sort();
    distinct_levels.dedup();

    let mut raw: Vec<Vec<u32>> = Vec::new();
    let vid = |t: usize, v: u32| (t * n) as u32 + v;
    for t in 0..rows {
        for s in base.simplices() {
            raw.push(s.iter().map(|&v| vid(t, v)).collect());
        }
    }
    for t in 0..rows - 1 {
        for s in base.simplices() {
            let r = s.len() - 1;
            for split in 0..r {
                let mut v: Vec<u32> = s[..=split].iter().map(|&w| vid(t, w)).collect();
                v.extend(s[split + 1..].iter().map(|&w| vid(t + 1, w)));
                raw.push(v);
            }
            for split in 0..=r {
                let mut v: Vec<u32> = s[..=split].iter().map(|&w| vid(t, w)).collect();
                v.extend(s[split..].iter().map(|&w| vid(t + 1, w)));
                raw.push(v);
            }
        }
    }
    raw.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let index: BTreeMap<&[u32], usize> = raw
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    let level_rank_of = |v: u32| {
        let value = &vertex_values[v as usize / n][v as usize % n];
        distinct_levels.binary_search(value).expect("value is listed")
    };
    let mut simplices = Vec::with_capacity(raw.len());
    for s in &raw {
        let boundary = if s.len() == 1 {
            Vec::new()
        } else {
            facets(s)
                .map(|f| *index.get(f.as_slice()).expect("prism is closed"))
                .collect()
        };
        simplices.push(PrismSimplex {
            vertices: s.clone(),
            boundary,
            t_min: s[0] as usize / n,
            t_max: *s.last().unwrap() as usize / n,
            level_rank: s.iter().map(|&v| level_rank_of(v)).max().unwrap(),
        });
    }
    let mut by_start = vec![Vec::new(); rows];
    for (i, s) in simplices.iter().enumerate() {
        by_start[s.t_min].push(i);
    }
    Ok(PrismComplex {
        base: base.clone(),
        times: time_breakpoints.to_vec(),
        values: vertex_values.to_vec(),
        simplices,
        distinct_levels,
        by_start,
    })
}

/// `F(a, b, c)` as a set of prism simplex indices.
#[derive(Debug, Clone)]
pub struct SlabSubcomplex<'p> {
    parent: &'p PrismComplex,
    a: usize,
    b: usize,
    c: Rational,
    simplices: Vec<usize>,
}

impl<'p> SlabSubcomplex<'p> {
    pub fn parent(&self) -> &'p PrismComplex {
        self.parent
    }

    pub fn a_index(&self) -> usize {
        self.a
    }

    pub fn b_index(&self) -> usize {
        self.b
    }

    pub fn level(&self) -> &Rational {
        &self.c
    }

    /// Indices into [`PrismComplex::simplices`], increasing.
    pub fn indices(&self) -> &[usize] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn is_subset_of(&self, other: &SlabSubcomplex<'_>) -> bool {
        let mut it = other.simplices.iter().peekable();
        self.simplices.iter().all(|s| {
            while it.next_if(|&&o| o < *s).is_some() {}
            it.next_if(|&&o| o == *s).is_some()
        })
    }

    /// The member simplices as prism vertex lists.
    pub fn to_simplices(&self) -> Vec<Simplex> {
        self.simplices
            .iter()
            .map(|&i| self.parent.simplices[i].vertices.clone())
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .map(|&i| {
                if self.parent.simplices[i].dim().is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            })
            .sum()
    }

    /// Number of simplices per dimension.
    pub fn simplex_counts(&self) -> Vec<usize> {
        let mut counts = Vec::new();
        for &i in &self.simplices {
            let d = self.parent.simplices[i].dim();
            if counts.len() <= d {
                counts.resize(d + 1, 0);
            }
            counts[d] += 1;
        }
        counts
    }
}
