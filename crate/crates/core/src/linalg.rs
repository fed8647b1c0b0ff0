//! Dense exact linear algebra over the rationals.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` in lowest terms. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a"` or `"a/b"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::contract(alloc::format!("malformed rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::contract(alloc::format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"a/b"` or `"a"` form.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}

/// Solution set of `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub particular: Vec<Rational>,
    /// Canonical basis of `Ker A`, one vector per entry.
    pub nullspace: Vec<Vec<Rational>>,
}

/// Column bases of the image and the kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageKernel {
    pub image: Matrix,
    pub kernel: Matrix,
}

/// Sylvester signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.zero
    }

    pub fn is_positive_definite(&self) -> bool {
        self.negative == 0 && self.zero == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.positive == 0 && self.zero == 0
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// From a flat row-major slice of integers. Panics on a length mismatch.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        Matrix { rows, cols, data: entries.iter().map(|&e| rat(e)).collect() }
    }

    /// From a flat row-major vector. Panics on a length mismatch.
    pub fn from_flat(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        Matrix { rows, cols, data }
    }

    /// `cols` is needed to shape an empty row list.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::contract(alloc::format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix { rows: r, cols, data })
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Result<Self> {
        let mut m = Matrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::contract(alloc::format!(
                    "column {c} has {} entries, expected {rows}",
                    col.len()
                )));
            }
            for (r, v) in col.iter().enumerate() {
                m.data[r * m.cols + c] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn column_vector(v: &[Rational]) -> Self {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn row_vector(v: &[Rational]) -> Self {
        Matrix { rows: 1, cols: v.len(), data: v.to_vec() }
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn checked_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::contract(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.data[r * other.cols + c] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        (0..self.rows)
            .map(|r| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self.get(r, c) == self.get(c, r)))
    }

    /// Side-by-side concatenation; every block must have `rows` rows.
    pub fn hstack(rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for r in 0..rows {
                for c in 0..b.cols {
                    m.data[r * cols + off + c] = b.get(r, c).clone();
                }
            }
            off += b.cols;
        }
        m
    }

    /// Stacked concatenation; every block must have `cols` columns.
    pub fn vstack(cols: usize, blocks: &[&Matrix]) -> Matrix {
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            data.extend(b.data.iter().cloned());
            rows += b.rows;
        }
        Matrix { rows, cols, data }
    }

    pub fn submatrix(&self, rows: core::ops::Range<usize>, cols: core::ops::Range<usize>) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                m.data[i * m.cols + j] = self.get(r, c).clone();
            }
        }
        m
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                m.data[r * idx.len() + j] = self.get(r, c).clone();
            }
        }
        m
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend(self.row(r).iter().cloned());
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        let cols = self.cols;
        for c in 0..cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for k in 0..cols {
                    m.data.swap(p * cols + k, r * cols + k);
                }
            }
            let inv = m.get(r, c).recip();
            for k in c..cols {
                let v = &m.data[r * cols + k] * &inv;
                m.data[r * cols + k] = v;
            }
            let pivot_row: Vec<Rational> = m.row(r)[c..].to_vec();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for (k, pv) in (c..cols).zip(&pivot_row) {
                    if !pv.is_zero() {
                        let v = &m.data[i * cols + k] - &f * pv;
                        m.data[i * cols + k] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// All solutions of `A x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Result<Option<Solution>> {
        if b.len() != self.rows {
            return Err(Error::contract(alloc::format!(
                "right-hand side has {} entries, matrix has {} rows",
                b.len(),
                self.rows
            )));
        }
        let aug = Matrix::hstack(self.rows, &[self, &Matrix::column_vector(b)]);
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut particular = vec![Rational::zero(); self.cols];
        for (k, &p) in pivots.iter().enumerate() {
            particular[p] = red.get(k, self.cols).clone();
        }
        Ok(Some(Solution { particular, nullspace: nullspace_from_rref(&red, &pivots, self.cols) }))
    }

    /// A particular solution of `A X = B`, column by column, with free
    /// variables set to zero.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Option<Matrix>> {
        if b.rows != self.rows {
            return Err(Error::contract("row mismatch in matrix solve"));
        }
        let aug = Matrix::hstack(self.rows, &[self, b]);
        let (red, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return Ok(None);
        }
        let mut x = Matrix::zeros(self.cols, b.cols);
        for (k, &p) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(p, c, red.get(k, self.cols + c).clone());
            }
        }
        Ok(Some(x))
    }

    /// Canonical column bases of `Im A` and `Ker A`.
    pub fn image_kernel(&self) -> ImageKernel {
        ImageKernel { image: self.image(), kernel: self.kernel() }
    }

    /// Column basis of the image in reduced column-echelon form.
    pub fn image(&self) -> Matrix {
        let (red, pivots) = self.transpose().rref();
        let rows: Vec<usize> = (0..pivots.len()).collect();
        red.select_rows(&rows).transpose()
    }

    /// Column basis of the kernel in reduced column-echelon form.
    pub fn kernel(&self) -> Matrix {
        let (red, pivots) = self.rref();
        let vecs = nullspace_from_rref(&red, &pivots, self.cols);
        Matrix::from_columns(self.cols, &vecs).expect("consistent shapes")
    }

    pub fn determinant(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::contract("determinant of a non-square matrix"));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != c {
                for k in 0..n {
                    m.data.swap(p * n + k, c * n + k);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in c + 1..n {
                let f = m.get(i, c) / &piv;
                if f.is_zero() {
                    continue;
                }
                for k in c..n {
                    let v = &m.data[i * n + k] - &f * m.get(c, k);
                    m.data[i * n + k] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Matrix::hstack(n, &[self, &Matrix::identity(n)]);
        let (red, pivots) = aug.rref();
        if pivots.iter().take(n).copied().ne(0..n) {
            return None;
        }
        Some(red.submatrix(0..n, n..2 * n))
    }

    /// Signature by symmetric Gaussian elimination (congruence).
    pub fn signature(&self) -> Result<Signature> {
        if !self.is_symmetric() {
            return Err(Error::contract("signature of a non-symmetric matrix"));
        }
        let n = self.rows;
        let mut a: Vec<Vec<Rational>> = self.to_rows();
        let (mut pos, mut neg) = (0, 0);
        let mut k = 0;
        while k < n {
            if let Some(p) = (k..n).find(|&i| !a[i][i].is_zero()) {
                sym_swap(&mut a, k, p);
            } else if let Some((i, j)) = (k..n)
                .flat_map(|i| (k..n).map(move |j| (i, j)))
                .find(|&(i, j)| i != j && !a[i][j].is_zero())
            {
                // a_ii = a_jj = 0, so adding e_j to e_i gives a_ii = 2 a_ij != 0.
                for c in 0..n {
                    let v = &a[i][c] + &a[j][c];
                    a[i][c] = v;
                }
                for r in 0..n {
                    let v = &a[r][i] + &a[r][j];
                    a[r][i] = v;
                }
                sym_swap(&mut a, k, i);
            } else {
                break;
            }
            let d = a[k][k].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            for i in k + 1..n {
                let f = &a[i][k] / &d;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let v = &a[i][j] - &f * &a[k][j];
                    a[i][j] = v;
                }
            }
            for i in k + 1..n {
                a[i][k] = Rational::zero();
                a[k][i] = Rational::zero();
            }
            k += 1;
        }
        Ok(Signature { positive: pos, negative: neg, zero: n - pos - neg })
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut m = Matrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m.data[(i * other.rows + k) * c + j * other.cols + l] = a * other.get(k, l);
                    }
                }
            }
        }
        m
    }

    /// Square matrix power; `k = 0` is the identity.
    pub fn pow(&self, k: u32) -> Matrix {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

fn sym_swap(a: &mut [Vec<Rational>], i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

fn nullspace_from_rref(red: &Matrix, pivots: &[usize], ncols: usize) -> Vec<Vec<Rational>> {
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let vecs: Vec<Vec<Rational>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = -red.get(k, f).clone();
            }
            v
        })
        .collect();
    if vecs.is_empty() {
        return vecs;
    }
    // Canonicalize: reduced echelon form of the basis rows.
    let m = Matrix::from_rows(vecs, ncols).expect("consistent shapes");
    let (r, p) = m.rref();
    (0..p.len()).map(|i| r.row(i).to_vec()).collect()
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }
}

// Subspace helpers. A subspace of Q^n is a matrix whose columns span it.

/// Canonical basis of the column span.
pub fn span_basis(m: &Matrix) -> Matrix {
    m.image()
}

/// Whether two column spans coincide.
pub fn same_span(a: &Matrix, b: &Matrix) -> bool {
    a.rows() == b.rows() && span_basis(a) == span_basis(b)
}

/// Whether every column of `vecs` lies in the span of `basis`.
pub fn span_contains(basis: &Matrix, vecs: &Matrix) -> bool {
    let both = Matrix::hstack(basis.rows(), &[basis, vecs]);
    both.rank() == basis.rank()
}

/// Canonical basis of the intersection of two column spans.
pub fn intersection(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.rows();
    let joint = Matrix::hstack(n, &[a, &-b]);
    let k = joint.kernel();
    let top = k.submatrix(0..a.cols(), 0..k.cols());
    span_basis(&(a * &top))
}

/// Coordinates of the columns of `v` in a basis with independent columns.
pub fn coordinates(basis: &Matrix, v: &Matrix) -> Option<Matrix> {
    basis.solve_matrix(v).ok().flatten().filter(|x| &(basis * x) == v)
}

/// Standard basis vectors completing an independent column set.
pub fn pivot_complement(basis: &Matrix) -> Matrix {
    let n = basis.rows();
    let (_, pivots) = basis.transpose().rref();
    let cols: Vec<Vec<Rational>> = (0..n)
        .filter(|i| !pivots.contains(i))
        .map(|i| {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            e
        })
        .collect();
    Matrix::from_columns(n, &cols).expect("consistent shapes")
}

/// Rows spanning the linear forms that vanish on the column span.
pub fn annihilator(basis: &Matrix) -> Matrix {
    basis.transpose().kernel().transpose()
}

/// A quotient `Q^n / S` with a chosen section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    /// Canonical basis of `S`.
    pub sub: Matrix,
    /// Columns completing `sub` to a basis; images of the quotient basis.
    pub section: Matrix,
    /// `projection * sub = 0`, `projection * section = I`.
    pub projection: Matrix,
    /// `sub_coords * sub = I`, `sub_coords * section = 0`.
    pub sub_coords: Matrix,
}

impl Quotient {
    pub fn new(ambient: usize, sub: &Matrix) -> Quotient {
        assert_eq!(sub.rows(), ambient, "subspace lives in the wrong ambient space");
        let sub = span_basis(sub);
        let section = pivot_complement(&sub);
        let full = Matrix::hstack(ambient, &[&sub, &section]);
        let inv = full.inverse().expect("basis plus pivot complement is invertible");
        let k = sub.cols();
        Quotient {
            projection: inv.submatrix(k..ambient, 0..ambient),
            sub_coords: inv.submatrix(0..k, 0..ambient),
            sub,
            section,
        }
    }

    pub fn dim(&self) -> usize {
        self.section.cols()
    }
}

/// Affine system `sum_k A_k X_k B_k = C` in unknown matrices `X_k`.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    total: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

/// Handle for an unknown block of a [`LinearSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unknown(usize);

/// Solution of a [`LinearSystem`]: a point plus the dimension of the
/// homogeneous solution space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSolution {
    pub values: Vec<Matrix>,
    pub freedom: usize,
    /// Basis of the homogeneous solutions, one block list per vector.
    pub kernel: Vec<Vec<Matrix>>,
}

impl SystemSolution {
    pub fn get(&self, u: Unknown) -> &Matrix {
        &self.values[u.0]
    }
}

impl LinearSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unknown(&mut self, rows: usize, cols: usize) -> Unknown {
        self.shapes.push((rows, cols));
        self.offsets.push(self.total);
        self.total += rows * cols;
        for r in &mut self.rows {
            r.resize(self.total, Rational::zero());
        }
        Unknown(self.shapes.len() - 1)
    }

    pub fn unknown_count(&self) -> usize {
        self.total
    }

    /// Adds `sum_k left_k * X_k * right_k = rhs`.
    pub fn equation(&mut self, terms: &[(Unknown, &Matrix, &Matrix)], rhs: &Matrix) -> Result<()> {
        let (p, q) = rhs.shape();
        for (u, a, b) in terms {
            let (xr, xc) = self.shapes[u.0];
            if a.rows() != p || a.cols() != xr || b.rows() != xc || b.cols() != q {
                return Err(Error::contract("linear system term has inconsistent shape"));
            }
        }
        for r in 0..p {
            for c in 0..q {
                let mut row = vec![Rational::zero(); self.total];
                for (u, a, b) in terms {
                    let (xr, xc) = self.shapes[u.0];
                    let off = self.offsets[u.0];
                    for i in 0..xr {
                        let ai = a.get(r, i);
                        if ai.is_zero() {
                            continue;
                        }
                        for j in 0..xc {
                            let bj = b.get(j, c);
                            if !bj.is_zero() {
                                row[off + i * xc + j] += ai * bj;
                            }
                        }
                    }
                }
                self.rows.push(row);
                self.rhs.push(rhs.get(r, c).clone());
            }
        }
        Ok(())
    }

    /// Fixes one unknown to a given value.
    pub fn fix(&mut self, u: Unknown, value: &Matrix) -> Result<()> {
        let (r, c) = self.shapes[u.0];
        self.equation(&[(u, &Matrix::identity(r), &Matrix::identity(c))], value)
    }

    pub fn solve(&self) -> Option<SystemSolution> {
        let a = Matrix::from_rows(self.rows.clone(), self.total).expect("rows sized on insert");
        let sol = a.solve(&self.rhs).expect("rhs sized on insert")?;
        let split = |v: &[Rational]| -> Vec<Matrix> {
            self.shapes
                .iter()
                .zip(&self.offsets)
                .map(|(&(r, c), &off)| Matrix::from_flat(r, c, v[off..off + r * c].to_vec()))
                .collect()
        };
        let kernel: Vec<Vec<Matrix>> = sol.nullspace.iter().map(|v| split(v)).collect();
        Some(SystemSolution { values: split(&sol.particular), freedom: kernel.len(), kernel })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[Rational]) -> Vec<Rational> {
        v.to_vec()
    }

    #[test]
    fn solve_identity() {
        let a = Matrix::identity(2);
        let s = a.solve(&[rat(3), frac(1, 2)]).unwrap().unwrap();
        assert_eq!(s.particular, col(&[rat(3), frac(1, 2)]));
        assert!(s.nullspace.is_empty());
    }

    #[test]
    fn solve_one_equation() {
        let a = Matrix::from_i64(1, 2, &[1, 1]);
        let s = a.solve(&[rat(0)]).unwrap().unwrap();
        assert_eq!(s.particular, col(&[rat(0), rat(0)]));
        assert_eq!(s.nullspace, vec![col(&[rat(1), rat(-1)])]);
    }

    #[test]
    fn solve_cycle_laplacian() {
        let a = Matrix::from_i64(2, 2, &[-2, 2, 2, -2]);
        let s = a.solve(&[frac(-1, 2), frac(1, 2)]).unwrap().unwrap();
        assert_eq!(s.particular, col(&[frac(1, 4), rat(0)]));
        assert_eq!(s.nullspace, vec![col(&[rat(1), rat(1)])]);
    }

    #[test]
    fn solve_inconsistent_and_mismatch() {
        let a = Matrix::from_i64(2, 1, &[1, 1]);
        assert_eq!(a.solve(&[rat(0), rat(1)]).unwrap(), None);
        assert!(matches!(a.solve(&[rat(0)]), Err(Error::Contract(_))));
    }

    #[test]
    fn image_kernel_examples() {
        let z = Matrix::zeros(2, 2).image_kernel();
        assert_eq!(z.image.cols(), 0);
        assert_eq!(z.kernel, Matrix::identity(2));

        let m = Matrix::from_i64(2, 2, &[-2, 2, 2, -2]).image_kernel();
        assert_eq!(m.image, Matrix::from_i64(2, 1, &[1, -1]));
        assert_eq!(m.kernel, Matrix::from_i64(2, 1, &[1, 1]));

        let c = Matrix::from_i64(2, 1, &[1, 0]).image_kernel();
        assert_eq!(c.image, Matrix::from_i64(2, 1, &[1, 0]));
        assert_eq!(c.kernel.cols(), 0);
    }

    #[test]
    fn signature_examples() {
        let s = |rows, e: &[i64]| Matrix::from_i64(rows, rows, e).signature().unwrap();
        assert_eq!(s(1, &[1]), Signature { positive: 1, negative: 0, zero: 0 });
        assert_eq!(s(1, &[-2]), Signature { positive: 0, negative: 1, zero: 0 });
        assert_eq!(s(2, &[-2, 2, 2, -2]), Signature { positive: 0, negative: 1, zero: 1 });
        assert_eq!(s(2, &[0, 1, 1, 0]), Signature { positive: 1, negative: 1, zero: 0 });
        assert!(Matrix::from_i64(2, 2, &[0, 1, 2, 0]).signature().is_err());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_i64(2, 2, &[2, 1, 1, 1]);
        assert_eq!(m.determinant().unwrap(), rat(1));
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(2));
        assert_eq!(Matrix::from_i64(2, 2, &[1, 2, 2, 4]).inverse(), None);
        assert_eq!(Matrix::zeros(0, 0).inverse(), Some(Matrix::zeros(0, 0)));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), frac(-1, 2));
        assert_eq!(format_rational(&frac(4, 2)), "2");
        assert_eq!(format_rational(&frac(-3, 2)), "-3/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn quotient_section() {
        let s = Matrix::from_i64(3, 1, &[1, -1, 0]);
        let q = Quotient::new(3, &s);
        assert!((&q.projection * &q.sub).is_zero());
        assert_eq!(&q.projection * &q.section, Matrix::identity(2));
        assert_eq!(&q.sub_coords * &q.sub, Matrix::identity(1));
    }

    #[test]
    fn intersection_of_planes() {
        let a = Matrix::from_i64(3, 2, &[1, 0, 0, 1, 0, 0]);
        let b = Matrix::from_i64(3, 2, &[0, 0, 1, 0, 0, 1]);
        assert_eq!(intersection(&a, &b), Matrix::from_i64(3, 1, &[0, 1, 0]));
    }

    #[test]
    fn linear_system_commutant() {
        // X * A = A * X for A a Jordan block: solutions are polynomials in A.
        let a = Matrix::from_i64(2, 2, &[0, 1, 0, 0]);
        let mut sys = LinearSystem::new();
        let x = sys.unknown(2, 2);
        let i2 = Matrix::identity(2);
        sys.equation(&[(x, &i2, &a), (x, &-&a, &i2)], &Matrix::zeros(2, 2)).unwrap();
        let sol = sys.solve().unwrap();
        assert_eq!(sol.freedom, 2);
        assert!(sol.get(x).is_zero());
    }
}
