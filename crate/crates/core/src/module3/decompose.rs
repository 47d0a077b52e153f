//! Splitting a module into one-dimensional summands.
//!
//! Thin modules split along the components of their nonzero structure
//! maps. Modules with larger pointwise dimension are split with Fitting
//! decompositions of endomorphisms: regions joined by isomorphisms are
//! contracted to a single vector space, the endomorphism algebra is solved
//! for as a null space, and `φ - λ` for random `φ` and eigenvalues `λ`
//! yields the split `ker (φ-λ)^N ⊕ im (φ-λ)^N`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{GridPoint, Module3, Move};
use crate::field::{Field, Matrix};

/// A summand with one-dimensional spaces on its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSummand {
    pub degree: usize,
    /// Sorted support points.
    pub support: Vec<GridPoint>,
}

impl IntervalSummand {
    /// Whether the support stays below the top grid level.
    pub fn is_bounded(&self, top_level: usize) -> bool {
        self.support.iter().all(|x| x.c < top_level)
    }

    pub fn contains(&self, x: &GridPoint) -> bool {
        self.support.binary_search(x).is_ok()
    }
}

/// The module has a summand that is not one-dimensional.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a sum of one-dimensional summands: dimension {dim} at {witness:?}")]
pub struct ThinRefusal {
    pub witness: GridPoint,
    pub dim: usize,
}

/// Attempts before a non-thin piece is declared indecomposable.
const SPLIT_ATTEMPTS: usize = 48;
const SEED: u64 = 0x5eed_f1b3;

/// Splits `m` into summands of pointwise dimension one.
///
/// A thin module needs only its edge ranks. Otherwise the module must
/// carry its structure maps; without them, or when some summand has
/// dimension at least two somewhere, the refusal names such a point.
pub fn thin_decompose(m: &Module3) -> Result<Vec<IntervalSummand>, ThinRefusal> {
    if m.is_thin() {
        return Ok(thin_components(m));
    }
    if !m.has_maps() {
        let witness = widest_max_point(m, &m.grid.points().collect::<Vec<_>>());
        return Err(ThinRefusal {
            witness,
            dim: m.dim(&witness),
        });
    }
    let quiver = Quiver::contract(m);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut pieces = Vec::new();
    let mut stack = vec![quiver.whole()];
    while let Some(piece) = stack.pop() {
        let parts = quiver.components(&piece);
        if parts.len() > 1 {
            stack.extend(parts);
            continue;
        }
        if piece.dims.iter().all(|&d| d <= 1) {
            pieces.push(piece);
            continue;
        }
        match quiver.split(&piece, m.field, &mut rng) {
            Some((left, right)) => {
                stack.push(left);
                stack.push(right);
            }
            None => {
                let big: Vec<GridPoint> = (0..piece.dims.len())
                    .filter(|&k| piece.dims[k] >= 2)
                    .flat_map(|k| quiver.members[k].iter().copied())
                    .collect();
                let witness = widest_max_point(m, &big);
                let class = quiver.class_of[&witness];
                return Err(ThinRefusal {
                    witness,
                    dim: piece.dims[class],
                });
            }
        }
    }
    let mut out: Vec<IntervalSummand> = pieces
        .into_iter()
        .map(|p| {
            let mut support: Vec<GridPoint> = (0..p.dims.len())
                .filter(|&k| p.dims[k] == 1)
                .flat_map(|k| quiver.members[k].iter().copied())
                .collect();
            support.sort_unstable();
            IntervalSummand {
                degree: m.degree,
                support,
            }
        })
        .collect();
    out.sort_by(|x, y| x.support.cmp(&y.support));
    Ok(out)
}

/// Prefers the widest interval, then the lowest level.
fn widest_max_point(m: &Module3, candidates: &[GridPoint]) -> GridPoint {
    let best = candidates.iter().map(|x| m.dim(x)).max().unwrap_or(0);
    *candidates
        .iter()
        .filter(|x| m.dim(x) == best)
        .min_by_key(|x| (core::cmp::Reverse(x.b - x.a), x.a, x.c))
        .expect("non-empty candidates")
}

fn thin_components(m: &Module3) -> Vec<IntervalSummand> {
    let mut seen: BTreeSet<GridPoint> = BTreeSet::new();
    let mut adjacency: BTreeMap<GridPoint, Vec<GridPoint>> = BTreeMap::new();
    for (&(x, mv), &r) in m.edge_ranks() {
        if r == 0 {
            continue;
        }
        let y = m.grid.step(&x, mv).expect("stored edges stay in the grid");
        adjacency.entry(x).or_default().push(y);
        adjacency.entry(y).or_default().push(x);
    }
    let mut out = Vec::new();
    for start in m.grid.points() {
        if m.dim(&start) == 0 || !seen.insert(start) {
            continue;
        }
        let mut support = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in adjacency.get(&x).into_iter().flatten() {
                if seen.insert(y) {
                    support.push(y);
                    queue.push_back(y);
                }
            }
        }
        support.sort_unstable();
        out.push(IntervalSummand {
            degree: m.degree,
            support,
        });
    }
    out
}

/// A sub-representation of the contracted quiver: a dimension and basis
/// (columns in the class's coordinates) per class, plus restricted arrows.
#[derive(Debug, Clone)]
struct Piece {
    dims: Vec<usize>,
    arrows: Vec<(usize, usize, Matrix)>,
}

/// Classes of points joined by isomorphisms, with every other structure
/// map written in transported bases.
struct Quiver {
    members: Vec<Vec<GridPoint>>,
    class_of: BTreeMap<GridPoint, usize>,
    dims: Vec<usize>,
    arrows: Vec<(usize, usize, Matrix)>,
}

impl Quiver {
    fn contract(m: &Module3) -> Self {
        let field = m.field;
        let maps: Vec<(GridPoint, GridPoint, &Matrix)> = m
            .grid
            .points()
            .flat_map(|x| Move::ALL.into_iter().map(move |mv| (x, mv)))
            .filter_map(|(x, mv)| {
                let y = m.grid.step(&x, mv)?;
                m.edge_map(&x, mv).map(|a| (x, y, a))
            })
            .collect();
        let mut iso_adj: BTreeMap<GridPoint, Vec<(GridPoint, usize)>> = BTreeMap::new();
        let mut inverses: BTreeMap<usize, Matrix> = BTreeMap::new();
        for (k, (x, y, a)) in maps.iter().enumerate() {
            if let Some(inv) = a.inverse(field) {
                iso_adj.entry(*x).or_default().push((*y, k));
                iso_adj.entry(*y).or_default().push((*x, k));
                inverses.insert(k, inv);
            }
        }

        // Transport T_x : V_root -> V_x along a spanning tree of each class.
        let mut class_of: BTreeMap<GridPoint, usize> = BTreeMap::new();
        let mut transport: BTreeMap<GridPoint, Matrix> = BTreeMap::new();
        let mut members: Vec<Vec<GridPoint>> = Vec::new();
        let mut dims = Vec::new();
        let mut tree_edges: BTreeSet<usize> = BTreeSet::new();
        for root in m.grid.points().filter(|x| m.dim(x) > 0) {
            if class_of.contains_key(&root) {
                continue;
            }
            let id = members.len();
            class_of.insert(root, id);
            transport.insert(root, Matrix::identity(m.dim(&root)));
            let mut list = vec![root];
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                for &(y, k) in iso_adj.get(&x).into_iter().flatten() {
                    if class_of.contains_key(&y) {
                        continue;
                    }
                    let (src, _, a) = maps[k];
                    let t = if src == x {
                        a.mul(&transport[&x], field)
                    } else {
                        inverses[&k].mul(&transport[&x], field)
                    };
                    class_of.insert(y, id);
                    transport.insert(y, t);
                    tree_edges.insert(k);
                    list.push(y);
                    queue.push_back(y);
                }
            }
            dims.push(m.dim(&root));
            members.push(list);
        }

        let inv_transport: BTreeMap<GridPoint, Matrix> = transport
            .iter()
            .map(|(x, t)| (*x, t.inverse(field).expect("transport is invertible")))
            .collect();
        let mut seen: BTreeSet<(usize, usize, Matrix)> = BTreeSet::new();
        for (k, (x, y, a)) in maps.iter().enumerate() {
            if tree_edges.contains(&k) {
                continue;
            }
            let arrow = inv_transport[y].mul(&a.mul(&transport[x], field), field);
            let (cx, cy) = (class_of[x], class_of[y]);
            if arrow.is_zero() || (cx == cy && arrow.is_identity()) {
                continue;
            }
            seen.insert((cx, cy, arrow));
        }
        Self {
            members,
            class_of,
            dims,
            arrows: seen.into_iter().collect(),
        }
    }

    fn whole(&self) -> Piece {
        Piece {
            dims: self.dims.clone(),
            arrows: self.arrows.clone(),
        }
    }

    /// Splits a piece along the connected components of its nonzero arrows.
    fn components(&self, piece: &Piece) -> Vec<Piece> {
        let n = piece.dims.len();
        let mut comp = vec![usize::MAX; n];
        let mut adj = vec![Vec::new(); n];
        for (x, y, _) in &piece.arrows {
            adj[*x].push(*y);
            adj[*y].push(*x);
        }
        let mut count = 0;
        for s in 0..n {
            if piece.dims[s] == 0 || comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (0..count)
            .map(|c| Piece {
                dims: (0..n).map(|k| if comp[k] == c { piece.dims[k] } else { 0 }).collect(),
                arrows: piece
                    .arrows
                    .iter()
                    .filter(|(x, _, _)| comp[*x] == c)
                    .cloned()
                    .collect(),
            })
            .collect()
    }

    /// Basis of the endomorphism algebra of a piece; each element is a
    /// matrix per class (empty for classes outside the piece).
    fn endomorphisms(piece: &Piece, field: Field) -> Vec<Vec<Matrix>> {
        let n = piece.dims.len();
        let mut offset = vec![0usize; n + 1];
        for k in 0..n {
            offset[k + 1] = offset[k] + piece.dims[k] * piece.dims[k];
        }
        let unknowns = offset[n];
        let var = |k: usize, i: usize, j: usize| offset[k] + i * piece.dims[k] + j;
        let mut rows: Vec<u32> = Vec::new();
        let mut n_rows = 0;
        for (x, y, a) in &piece.arrows {
            let (dx, dy) = (piece.dims[*x], piece.dims[*y]);
            // (φ_y A - A φ_x)[r][s] = 0
            for r in 0..dy {
                for s in 0..dx {
                    let mut row = vec![0u32; unknowns];
                    for k in 0..dy {
                        let v = var(*y, r, k);
                        row[v] = field.add(row[v], a.get(k, s));
                    }
                    for k in 0..dx {
                        let v = var(*x, k, s);
                        row[v] = field.sub(row[v], a.get(r, k));
                    }
                    rows.extend(row);
                    n_rows += 1;
                }
            }
        }
        let system = Matrix::from_rows(n_rows, unknowns, rows);
        system
            .nullspace(field)
            .into_iter()
            .map(|v| {
                (0..n)
                    .map(|k| {
                        let d = piece.dims[k];
                        Matrix::from_rows(d, d, v[offset[k]..offset[k + 1]].to_vec())
                    })
                    .collect()
            })
            .collect()
    }

    /// Finds a nontrivial Fitting split of a connected piece, if any.
    fn split(&self, piece: &Piece, field: Field, rng: &mut ChaCha8Rng) -> Option<(Piece, Piece)> {
        let basis = Self::endomorphisms(piece, field);
        let p = field.characteristic();
        let n = piece.dims.len();
        let power = *piece.dims.iter().max()? as u32;
        for attempt in 0..SPLIT_ATTEMPTS + basis.len() {
            let phi: Vec<Matrix> = if attempt < basis.len() {
                basis[attempt].clone()
            } else {
                let coeffs: Vec<u32> = basis.iter().map(|_| rng.next_u32() % p).collect();
                (0..n)
                    .map(|k| {
                        let d = piece.dims[k];
                        let mut acc = Matrix::zeros(d, d);
                        for (e, &c) in basis.iter().zip(&coeffs) {
                            if c != 0 {
                                acc = acc.add(&e[k].scale(c, field), field);
                            }
                        }
                        acc
                    })
                    .collect()
            };
            let mut lambdas = BTreeSet::new();
            for (d, m) in piece.dims.iter().zip(&phi) {
                if *d > 0 {
                    lambdas.extend(eigenvalues(m, field, rng));
                }
            }
            for lambda in lambdas {
                let fitting: Vec<Matrix> = (0..n)
                    .map(|k| {
                        let d = piece.dims[k];
                        phi[k]
                            .sub(&Matrix::identity(d).scale(lambda, field), field)
                            .pow(power, field)
                    })
                    .collect();
                let kernels: Vec<Matrix> = (0..n)
                    .map(|k| Matrix::from_columns(piece.dims[k], &fitting[k].nullspace(field)))
                    .collect();
                let images: Vec<Matrix> = fitting.iter().map(|f| f.column_basis(field)).collect();
                let kdim: usize = kernels.iter().map(Matrix::cols).sum();
                let idim: usize = images.iter().map(Matrix::cols).sum();
                if kdim > 0 && idim > 0 {
                    return Some((
                        restrict(piece, &kernels, field),
                        restrict(piece, &images, field),
                    ));
                }
            }
        }
        None
    }
}

/// Restriction of a piece to a submodule given by column bases per class.
fn restrict(piece: &Piece, bases: &[Matrix], field: Field) -> Piece {
    let arrows = piece
        .arrows
        .iter()
        .filter_map(|(x, y, a)| {
            let (bx, by) = (&bases[*x], &bases[*y]);
            if bx.cols() == 0 || by.cols() == 0 {
                return None;
            }
            let image = a.mul(bx, field);
            let r = by.solve(&image, field).expect("submodules are preserved");
            (!r.is_zero()).then_some((*x, *y, r))
        })
        .collect();
    Piece {
        dims: bases.iter().map(Matrix::cols).collect(),
        arrows,
    }
}

/// Eigenvalues of a square matrix lying in the prime field.
fn eigenvalues(a: &Matrix, field: Field, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let d = a.rows();
    if d == 0 {
        return Vec::new();
    }
    let p = field.characteristic();
    let singular_at =
        |l: u32| a.sub(&Matrix::identity(d).scale(l, field), field).rank(field) < d;
    if d == 1 {
        return vec![a.get(0, 0)];
    }
    if p as usize <= 64 || p as usize <= d {
        return (0..p).filter(|&l| singular_at(l)).collect();
    }
    let chi = char_poly(a, field);
    let mut roots = Vec::new();
    poly_roots(&chi, field, rng, &mut roots);
    roots.sort_unstable();
    roots.dedup();
    roots
}

/// `det(x I - A)` by interpolation at `0..=d`, coefficients low to high.
fn char_poly(a: &Matrix, field: Field) -> Vec<u32> {
    let d = a.rows();
    let points: Vec<u32> = (0..=d as u32).collect();
    let values: Vec<u32> = points
        .iter()
        .map(|&x| determinant(&Matrix::identity(d).scale(x, field).sub(a, field), field))
        .collect();
    let mut out = vec![0u32; d + 1];
    for (i, &xi) in points.iter().enumerate() {
        // Lagrange basis polynomial for node i.
        let mut basis = vec![1u32];
        let mut denom = 1u32;
        for (j, &xj) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = poly_mul(&basis, &[field.neg(xj), 1], field);
            denom = field.mul(denom, field.sub(xi, xj));
        }
        let scale = field.mul(values[i], field.inv(denom));
        for (k, &c) in basis.iter().enumerate() {
            out[k] = field.add(out[k], field.mul(c, scale));
        }
    }
    out
}

fn determinant(a: &Matrix, field: Field) -> u32 {
    let n = a.rows();
    let mut m = a.clone();
    let mut det = 1u32;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| m.get(r, col) != 0) else {
            return 0;
        };
        if p != col {
            for j in 0..n {
                let (u, v) = (m.get(p, j), m.get(col, j));
                m.set(p, j, v);
                m.set(col, j, u);
            }
            det = field.neg(det);
        }
        let pivot = m.get(col, col);
        det = field.mul(det, pivot);
        let inv = field.inv(pivot);
        for r in col + 1..n {
            let f = field.mul(m.get(r, col), inv);
            if f == 0 {
                continue;
            }
            for j in col..n {
                let v = field.sub(m.get(r, j), field.mul(f, m.get(col, j)));
                m.set(r, j, v);
            }
        }
    }
    det
}

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_mul(a: &[u32], b: &[u32], field: Field) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = field.add(out[i + j], field.mul(x, y));
        }
    }
    trim(out)
}

fn poly_rem(a: &[u32], m: &[u32], field: Field) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let lead_inv = field.inv(*m.last().expect("nonzero modulus"));
    while r.len() >= m.len() {
        let shift = r.len() - m.len();
        let f = field.mul(*r.last().unwrap(), lead_inv);
        for (k, &c) in m.iter().enumerate() {
            r[shift + k] = field.sub(r[shift + k], field.mul(f, c));
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], field: Field) -> Vec<u32> {
    let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
    while !y.is_empty() {
        let r = poly_rem(&x, &y, field);
        x = y;
        y = r;
    }
    if let Some(&lead) = x.last() {
        let inv = field.inv(lead);
        x.iter_mut().for_each(|c| *c = field.mul(*c, inv));
    }
    x
}

fn poly_pow_mod(base: &[u32], mut e: u64, m: &[u32], field: Field) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut b = poly_rem(base, m, field);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &b, field), m, field);
        }
        b = poly_rem(&poly_mul(&b, &b, field), m, field);
        e >>= 1;
    }
    acc
}

/// Roots in GF(p), p odd, by splitting `gcd(f, x^p - x)`.
fn poly_roots(f: &[u32], field: Field, rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
    let f = trim(f.to_vec());
    if f.len() <= 1 {
        return;
    }
    let p = field.characteristic();
    let mut xp = poly_pow_mod(&[0, 1], p as u64, &f, field);
    if xp.len() < 2 {
        xp.resize(2, 0);
    }
    xp[1] = field.sub(xp[1], 1);
    let g = poly_gcd(&f, &trim(xp), field);
    split_linear(&g, field, rng, out);
}

fn split_linear(g: &[u32], field: Field, rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
    match g.len() {
        0 | 1 => {}
        2 => out.push(field.neg(field.mul(g[0], field.inv(g[1])))),
        _ => {
            let p = field.characteristic();
            loop {
                let delta = rng.next_u32() % p;
                let mut h = poly_pow_mod(&[delta, 1], (p as u64 - 1) / 2, g, field);
                if h.is_empty() {
                    h.push(0);
                }
                h[0] = field.sub(h[0], 1);
                let d = poly_gcd(g, &trim(h), field);
                if d.len() > 1 && d.len() < g.len() {
                    let q = poly_div_exact(g, &d, field);
                    split_linear(&d, field, rng, out);
                    split_linear(&q, field, rng, out);
                    return;
                }
            }
        }
    }
}

fn poly_div_exact(a: &[u32], b: &[u32], field: Field) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let mut q = vec![0u32; r.len() + 1 - b.len()];
    let lead_inv = field.inv(*b.last().unwrap());
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = field.mul(*r.last().unwrap(), lead_inv);
        q[shift] = f;
        for (k, &c) in b.iter().enumerate() {
            r[shift + k] = field.sub(r[shift + k], field.mul(f, c));
        }
        r = trim(r);
    }
    trim(q)
}
