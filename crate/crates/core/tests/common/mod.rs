//! Dense Gaussian elimination oracle for Betti numbers and induced ranks.

#![allow(clippy::needless_range_loop, dead_code)]

use fibermod_core::homology::{betti, induced_rank};
use fibermod_core::Field;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type Simplex = Vec<u32>;

/// Dense column vectors over GF(p), reduced to count independent ones.
pub fn rank(p: u64, columns: &[Vec<u64>]) -> usize {
    let mut rows: Vec<Vec<u64>> = columns.to_vec();
    let width = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..width {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = modpow(rows[r][col], p - 2, p);
        for x in rows[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                for k in 0..width {
                    rows[i][k] = (rows[i][k] + p * p - f * rows[r][k] % p) % p;
                }
            }
        }
        r += 1;
    }
    r
}

pub fn modpow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Null space basis of a matrix given by columns (each of length `height`).
pub fn kernel(p: u64, columns: &[Vec<u64>], height: usize) -> Vec<Vec<u64>> {
    let n = columns.len();
    // Each column carries the combination of inputs it represents.
    let mut work: Vec<(Vec<u64>, Vec<u64>)> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut e = vec![0; n];
            e[i] = 1;
            (c.clone(), e)
        })
        .collect();
    let mut out = Vec::new();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for j in 0..work.len() {
        for &(row, k) in &pivots {
            let f = work[j].0[row];
            if f == 0 {
                continue;
            }
            let inv = modpow(work[k].0[row], p - 2, p);
            let m = f * inv % p;
            let (src_v, src_e) = work[k].clone();
            for t in 0..height {
                work[j].0[t] = (work[j].0[t] + p * p - m * src_v[t] % p) % p;
            }
            for t in 0..n {
                work[j].1[t] = (work[j].1[t] + p * p - m * src_e[t] % p) % p;
            }
        }
        match (0..height).find(|&t| work[j].0[t] != 0) {
            Some(row) => pivots.push((row, j)),
            None => out.push(work[j].1.clone()),
        }
    }
    out
}

pub struct Chains {
    by_dim: Vec<Vec<Simplex>>,
}

impl Chains {
    pub fn new(complex: &[Simplex]) -> Self {
        let mut by_dim: Vec<Vec<Simplex>> = Vec::new();
        for s in complex {
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize(d + 1, Vec::new());
            }
            by_dim[d].push(s.clone());
        }
        for v in &mut by_dim {
            v.sort();
        }
        Self { by_dim }
    }

    pub fn cells(&self, j: usize) -> &[Simplex] {
        self.by_dim.get(j).map_or(&[], Vec::as_slice)
    }

    /// Boundary of each `j`-simplex of `cells` in the `(j-1)`-chains of `self`.
    pub fn boundary_of(&self, p: u64, cells: &[Simplex], j: usize) -> Vec<Vec<u64>> {
        let faces = if j == 0 { &[][..] } else { self.cells(j - 1) };
        cells
            .iter()
            .map(|s| {
                let mut col = vec![0u64; faces.len()];
                if j > 0 {
                    for k in 0..s.len() {
                        let mut f = s.clone();
                        f.remove(k);
                        let row = faces.binary_search(&f).expect("closed");
                        col[row] = if k % 2 == 0 { 1 } else { p - 1 };
                    }
                }
                col
            })
            .collect()
    }

    pub fn betti(&self, p: u64, j: usize) -> usize {
        let dj = self.boundary_of(p, self.cells(j), j);
        let dj1 = self.boundary_of(p, self.cells(j + 1), j + 1);
        self.cells(j).len() - rank(p, &dj) - rank(p, &dj1)
    }
}

/// `dim (Z_j(L) + B_j(K)) - dim B_j(K)` for `L ⊆ K`.
pub fn oracle_induced(p: u64, sub: &[Simplex], sup: &[Simplex], j: usize) -> usize {
    let k = Chains::new(sup);
    let l = Chains::new(sub);
    let height = k.cells(j).len();
    let boundaries = k.boundary_of(p, k.cells(j + 1), j + 1);
    let below = if j == 0 { 0 } else { k.cells(j - 1).len() };
    let z_cols = k.boundary_of(p, l.cells(j), j);
    let cycles: Vec<Vec<u64>> = kernel(p, &z_cols, below)
        .into_iter()
        .map(|coeffs| {
            let mut v = vec![0u64; height];
            for (c, s) in coeffs.iter().zip(l.cells(j)) {
                let row = k.cells(j).binary_search(s).unwrap();
                v[row] = (v[row] + c) % p;
            }
            v
        })
        .collect();
    let mut both = boundaries.clone();
    both.extend(cycles);
    rank(p, &both) - rank(p, &boundaries)
}

pub fn all_down_sets(n: u32) -> Vec<Vec<Simplex>> {
    let masks: Vec<u32> = (0u32..1 << n).collect();
    let mut out = Vec::new();
    let mut chosen = vec![false; 1 << n];
    fn rec(i: usize, masks: &[u32], chosen: &mut Vec<bool>, out: &mut Vec<Vec<Simplex>>) {
        if i == masks.len() {
            let complex = masks
                .iter()
                .filter(|&&m| m != 0 && chosen[m as usize])
                .map(|&m| (0..32).filter(|b| m >> b & 1 == 1).collect())
                .collect();
            out.push(complex);
            return;
        }
        let m = masks[i];
        rec(i + 1, masks, chosen, out);
        let faces_in = (0..32)
            .filter(|b| m >> b & 1 == 1)
            .all(|b| chosen[(m & !(1 << b)) as usize]);
        if m == 0 || faces_in {
            chosen[m as usize] = true;
            rec(i + 1, masks, chosen, out);
            chosen[m as usize] = false;
        }
    }
    rec(0, &masks, &mut chosen, &mut out);
    out
}

pub fn maximal(complex: &[Simplex]) -> Vec<Simplex> {
    complex
        .iter()
        .filter(|s| {
            !complex
                .iter()
                .any(|t| t.len() > s.len() && s.iter().all(|v| t.contains(v)))
        })
        .cloned()
        .collect()
}

/// Subcomplexes used for induced-rank checks: drop one maximal simplex,
/// and restrict to the even vertices.
pub fn subcomplexes(complex: &[Simplex]) -> Vec<Vec<Simplex>> {
    let mut out = Vec::new();
    if let Some(top) = maximal(complex).last() {
        out.push(complex.iter().filter(|s| *s != top).cloned().collect());
    }
    out.push(
        complex
            .iter()
            .filter(|s| s.iter().all(|v| v % 2 == 0))
            .cloned()
            .collect(),
    );
    out.push(complex.to_vec());
    out
}

pub fn check(complex: &[Simplex], fields: &[(u64, Field)]) -> Result<(), String> {
    let top = complex.iter().map(|s| s.len()).max().unwrap_or(0);
    let chains = Chains::new(complex);
    for &(p, field) in fields {
        for j in 0..=top {
            let got = betti(complex, j, field).map_err(|e| e.to_string())?;
            let want = chains.betti(p, j);
            if got != want {
                return Err(format!("betti_{j} over GF({p}) of {complex:?}: {got} vs {want}"));
            }
        }
        for sub in subcomplexes(complex) {
            for j in 0..top.max(1) {
                let got = induced_rank(&sub, complex, j, field).map_err(|e| e.to_string())?;
                let want = oracle_induced(p, &sub, complex, j);
                if got != want {
                    return Err(format!("rank_{j} over GF({p}) of {sub:?} -> {complex:?}: {got} vs {want}"));
                }
            }
        }
    }
    Ok(())
}

pub fn fields() -> Vec<(u64, Field)> {
    vec![(2, Field::GF2), (3, Field::new(3).unwrap())]
}

/// Closures of random simplices, capped at 12 simplices each.
pub fn random_complexes(count: usize, seed: u64) -> Vec<Vec<Simplex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n_vertices = 3 + rng.next_u32() % 6;
        let mut complex: Vec<Simplex> = Vec::new();
        for _ in 0..8 {
            let mask = 1 + rng.next_u32() % ((1 << n_vertices) - 1);
            let s: Simplex = (0..n_vertices).filter(|b| mask >> b & 1 == 1).collect();
            let mut closure: Vec<Simplex> = Vec::new();
            for sub in 1u32..(1 << s.len()) {
                closure.push(
                    (0..s.len())
                        .filter(|i| sub >> i & 1 == 1)
                        .map(|i| s[i])
                        .collect(),
                );
            }
            let mut next = complex.clone();
            next.extend(closure);
            next.sort();
            next.dedup();
            if next.len() > 12 {
                continue;
            }
            complex = next;
        }
        if complex.is_empty() {
            complex.push(vec![0]);
        }
        out.push(complex);
    }
    out
}
