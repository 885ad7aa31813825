//! Dense exact matrices.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::Field;

/// Largest square size accepted by the square-matrix operations.
pub const MAX_N: usize = 8;

/// A dense row-major matrix over an exact field.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> Eq for Matrix<F> {}

impl<F: Field> Matrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimMismatch(format!("empty {rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { field, rows, cols, data })
    }

    pub fn from_fn(
        field: F,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> F::Elem,
    ) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { field, rows, cols, data }
    }

    /// Builds a matrix from integer rows via the canonical map `Z → F`.
    pub fn from_i64_rows(field: F, rows: &[&[i64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimMismatch("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| field.from_i64(v)))
            .collect();
        Matrix::new(field, rows.len(), cols, data)
    }

    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let z = field.zero();
        Matrix::from_fn(field, rows, cols, |_, _| z.clone())
    }

    pub fn identity(field: F, n: usize) -> Self {
        Matrix::scalar(field.clone(), n, field.one())
    }

    pub fn scalar(field: F, n: usize, lambda: F::Elem) -> Self {
        let z = field.zero();
        Matrix::from_fn(field, n, n, |i, j| if i == j { lambda.clone() } else { z.clone() })
    }

    /// Inverse of [`Matrix::vec`]: reads `n²` entries row-major.
    pub fn from_vec(field: F, n: usize, v: Vec<F::Elem>) -> Result<Self> {
        Matrix::new(field, n, n, v)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix within [`MAX_N`].
    pub fn square_dim(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::DimMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.rows > MAX_N {
            return Err(Error::TooLarge(self.rows, MAX_N));
        }
        Ok(self.rows)
    }

    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major flattening `(c11, c12, …, c1n, c21, …, cnn)`.
    pub fn vec(&self) -> Vec<F::Elem> {
        self.data.clone()
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&F::Elem, &F::Elem) -> F::Elem) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| op(a, b)).collect();
        Ok(Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| self.field.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| self.field.sub(a, b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut data = vec![f.zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = f.mul(a, &other.data[k * other.cols + j]);
                    let slot = &mut data[i * other.cols + j];
                    *slot = f.add(slot, &t);
                }
            }
        }
        Ok(Matrix { field: f.clone(), rows: self.rows, cols: other.cols, data })
    }

    pub fn mul_vec(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if v.len() != self.cols {
            return Err(Error::DimMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect())
    }

    pub fn scale(&self, lambda: &F::Elem) -> Self {
        let data = self.data.iter().map(|a| self.field.mul(a, lambda)).collect();
        Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.field.clone(), self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Kronecker product: the block matrix `(a_ij · B)`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let (s, t) = (other.rows, other.cols);
        Ok(Matrix::from_fn(self.field.clone(), self.rows * s, self.cols * t, |i, j| {
            self.field
                .mul(self.get(i / s, j / t), other.get(i % s, j % t))
        }))
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.square_dim()?;
        other.square_dim()?;
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.commutator(other)?.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| self.field.is_zero(a))
    }

    /// `self` stacked on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::DimMismatch(format!(
                "cannot stack {} columns on {}",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(self.field.clone(), rows.len(), cols.len(), |i, j| {
            self.get(rows[i], cols[j]).clone()
        })
    }

    pub fn rank(&self) -> usize {
        let mut data = self.data.clone();
        self.field.rank_in_place(&mut data, self.rows, self.cols)
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut data = self.data.clone();
        let pivots = self.field.rref(&mut data, self.rows, self.cols);
        (Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }, pivots)
    }

    /// Nullspace basis read off the reduced echelon form: one vector per free
    /// column, left to right, with a 1 in that column.
    pub fn nullspace_basis(&self) -> Vec<Vec<F::Elem>> {
        let (r, pivots) = self.rref();
        let f = &self.field;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![f.zero(); self.cols];
                v[free] = f.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(row, free));
                }
                v
            })
            .collect()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    pub fn pow(&self, mut e: u32) -> Result<Self> {
        let n = self.square_dim()?;
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.field.clone(), n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `I, A, A², …, A^m` for `m = count − 1`.
    pub fn powers(&self, count: usize) -> Result<Vec<Self>> {
        let n = self.square_dim()?;
        let mut out = Vec::with_capacity(count);
        let mut cur = Matrix::identity(self.field.clone(), n);
        for _ in 0..count {
            let next = cur.mul(self)?;
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// `Σ coeffs[i] · A^i`, coefficients low to high.
    pub fn eval_poly(&self, coeffs: &[F::Elem]) -> Result<Self> {
        let n = self.square_dim()?;
        let f = &self.field;
        let mut acc = Matrix::zeros(f.clone(), n, n);
        for c in coeffs.iter().rev() {
            acc = acc.mul(self)?.add(&Matrix::scalar(f.clone(), n, c.clone()))?;
        }
        Ok(acc)
    }

    /// Minimal polynomial, monic, coefficients low to high: the first linear
    /// dependence in `vec(I), vec(A), vec(A²), …`.
    pub fn min_poly(&self) -> Result<Vec<F::Elem>> {
        let n = self.square_dim()?;
        let f = &self.field;
        let mut flats: Vec<Vec<F::Elem>> = vec![Matrix::identity(f.clone(), n).vec()];
        let mut cur = Matrix::identity(f.clone(), n);
        for d in 1..=n {
            cur = cur.mul(self)?;
            flats.push(cur.vec());
            // columns vec(A^0..A^d)
            let m = Matrix::from_fn(f.clone(), n * n, d + 1, |i, j| flats[j][i].clone());
            if let Some(v) = m.nullspace_basis().into_iter().next() {
                let lead = f.inv(&v[d])?;
                return Ok(v.iter().map(|c| f.mul(c, &lead)).collect());
            }
        }
        unreachable!("Cayley–Hamilton bounds the degree by n")
    }

    /// Inverse from the reduced form of `[A | I]`; `None` when singular.
    pub fn inverse(&self) -> Result<Option<Self>> {
        let n = self.square_dim()?;
        let f = &self.field;
        let aug = Matrix::from_fn(f.clone(), n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                f.one()
            } else {
                f.zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Ok(None);
        }
        Ok(Some(Matrix::from_fn(f.clone(), n, n, |i, j| r.get(i, n + j).clone())))
    }

    /// Determinant by elimination.
    pub fn det(&self) -> Result<F::Elem> {
        if !self.is_square() {
            return Err(Error::DimMismatch("determinant of a non-square matrix".into()));
        }
        let f = &self.field;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = f.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !f.is_zero(&a[i * n + c])) else {
                return Ok(f.zero());
            };
            if p != c {
                for j in 0..n {
                    a.swap(c * n + j, p * n + j);
                }
                det = f.neg(&det);
            }
            let piv = a[c * n + c].clone();
            det = f.mul(&det, &piv);
            let inv = f.inv(&piv)?;
            for i in c + 1..n {
                if f.is_zero(&a[i * n + c]) {
                    continue;
                }
                let factor = f.mul(&a[i * n + c], &inv);
                for j in c..n {
                    let t = f.mul(&factor, &a[c * n + j]);
                    a[i * n + j] = f.sub(&a[i * n + j], &t);
                }
            }
        }
        Ok(det)
    }

    /// `{"field": "<spec>", "rows": [[entry, …], …]}`.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.rows)
            .map(|i| Value::from(self.row(i).iter().map(|a| self.field.elem_to_json(a)).collect::<Vec<_>>()))
            .collect();
        json!({ "field": self.field.to_string(), "rows": rows })
    }

    /// Reads the `rows` array of a matrix object (or a bare array of rows).
    pub fn from_json_rows(field: &F, rows: &Value) -> Result<Self> {
        let rows = rows
            .as_array()
            .ok_or_else(|| Error::Parse("matrix rows must be an array".into()))?;
        let mut data = Vec::new();
        let mut cols = None;
        for r in rows {
            let r = r
                .as_array()
                .ok_or_else(|| Error::Parse("each matrix row must be an array".into()))?;
            if *cols.get_or_insert(r.len()) != r.len() {
                return Err(Error::DimMismatch("ragged rows".into()));
            }
            for e in r {
                data.push(field.elem_from_json(e)?);
            }
        }
        Matrix::new(field.clone(), rows.len(), cols.unwrap_or(0), data)
    }
}

impl<F: Field> fmt::Display for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|a| self.field.fmt_elem(a)).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}
