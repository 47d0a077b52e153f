//! Prime fields GF(p) and small dense matrices over them.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("characteristic {0} is too large (must be below 2^16)")]
    TooLarge(u32),
}

/// Coefficient field GF(p) for `p` prime and `p < 2^16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    p: u32,
}

impl Default for Field {
    fn default() -> Self {
        Self::GF2
    }
}

impl Field {
    pub const GF2: Field = Field { p: 2 };

    pub fn new(p: u32) -> Result<Self, FieldError> {
        if p >= 1 << 16 {
            return Err(FieldError::TooLarge(p));
        }
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn characteristic(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero in GF({})", self.p);
        self.pow(a, self.p - 2)
    }

    pub fn from_i64(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }
}

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| self.get(i, j) == u32::from(i == j)))
    }

    pub fn mul(&self, other: &Matrix, field: Field) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.add(out.get(i, j), field.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix, field: Field) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| field.add(a, b))
            .collect();
        Matrix::from_rows(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Matrix, field: Field) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| field.sub(a, b))
            .collect();
        Matrix::from_rows(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: u32, field: Field) -> Matrix {
        let data = self.data.iter().map(|&a| field.mul(a, s)).collect();
        Matrix::from_rows(self.rows, self.cols, data)
    }

    pub fn pow(&self, mut exp: u32, field: Field) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut acc = Matrix::identity(self.rows);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base, field);
            }
            base = base.mul(&base, field);
            exp >>= 1;
        }
        acc
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self, field: Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(p, row);
            let inv = field.inv(self.get(row, col));
            for j in col..self.cols {
                let v = field.mul(self.get(row, j), inv);
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let f = self.get(r, col);
                if f == 0 {
                    continue;
                }
                for j in col..self.cols {
                    let v = field.sub(self.get(r, j), field.mul(f, self.get(row, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, field: Field) -> usize {
        self.clone().rref(field).len()
    }

    /// Basis of the right null space `{x : A x = 0}`, one vector per free column.
    pub fn nullspace(&self, field: Field) -> Vec<Vec<u32>> {
        let mut m = self.clone();
        let pivots = m.rref(field);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = field.neg(m.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Columns forming a basis of the column space.
    pub fn column_basis(&self, field: Field) -> Matrix {
        let pivots = self.clone().rref(field);
        let cols: Vec<Vec<u32>> = pivots.iter().map(|&j| self.column(j)).collect();
        Matrix::from_columns(self.rows, &cols)
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self, field: Field) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let pivots = aug.rref(field);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Some(inv)
    }

    /// Solves `self * X = rhs` for a matrix `self` with independent columns.
    ///
    /// Returns `None` when some column of `rhs` is outside the column space.
    pub fn solve(&self, rhs: &Matrix, field: Field) -> Option<Matrix> {
        assert_eq!(self.rows, rhs.rows);
        let (n, k) = (self.cols, rhs.cols);
        let mut aug = Matrix::zeros(self.rows, n + k);
        for i in 0..self.rows {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            for j in 0..k {
                aug.set(i, n + j, rhs.get(i, j));
            }
        }
        let pivots = aug.rref(field);
        if pivots.iter().any(|&p| p >= n) || pivots.len() < n {
            return None;
        }
        let mut x = Matrix::zeros(n, k);
        for (r, &p) in pivots.iter().enumerate() {
            for j in 0..k {
                x.set(p, j, aug.get(r, n + j));
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_validation() {
        assert!(Field::new(2).is_ok());
        assert!(Field::new(65521).is_ok());
        assert_eq!(Field::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(Field::new(9), Err(FieldError::NotPrime(9)));
        assert_eq!(Field::new(65537), Err(FieldError::TooLarge(65537)));
    }

    #[test]
    fn inverses() {
        let f = Field::new(7).unwrap();
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        assert_eq!(f.from_i64(-1), 6);
    }

    #[test]
    fn rank_and_nullspace() {
        let f = Field::new(3).unwrap();
        // rows (1 1 0), (0 1 1), (1 2 1): third = first + second
        let m = Matrix::from_rows(3, 3, vec![1, 1, 0, 0, 1, 1, 1, 2, 1]);
        assert_eq!(m.rank(f), 2);
        let ns = m.nullspace(f);
        assert_eq!(ns.len(), 1);
        let x = Matrix::from_columns(3, &ns);
        assert!(m.mul(&x, f).is_zero());
        assert!(m.inverse(f).is_none());
    }

    #[test]
    fn inverse_and_solve() {
        let f = Field::new(5).unwrap();
        let m = Matrix::from_rows(2, 2, vec![2, 1, 1, 1]);
        let inv = m.inverse(f).unwrap();
        assert!(m.mul(&inv, f).is_identity());
        let b = Matrix::from_rows(3, 1, vec![1, 2, 3]);
        let basis = Matrix::from_rows(3, 2, vec![1, 0, 0, 1, 1, 1]);
        let x = basis.solve(&b, f);
        // (1,2,3) = 1*(1,0,1) + 2*(0,1,1)
        assert_eq!(x.unwrap(), Matrix::from_rows(2, 1, vec![1, 2]));
        let off = Matrix::from_rows(3, 1, vec![1, 0, 0]);
        assert!(basis.solve(&off, f).is_none());
    }
}
