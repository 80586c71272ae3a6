//! Exact linear algebra over prime fields and the rationals.
//!
//! Everything downstream (stalk kernels, cohomology, Hom complexes) reduces to
//! row reduction of small dense matrices, so a plain row-major `Vec` is enough.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A field with exact arithmetic. Instances carry their own parameters
/// (the modulus for prime fields), so elements stay plain values.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// JSON rendering: integers where possible, `"a/b"` strings otherwise.
    fn to_json(&self, a: &Self::Elem) -> serde_json::Value;
    fn config(&self) -> FieldConfig;

    /// Inverse of [`Field::to_json`]; integers are accepted in every field.
    fn from_json(&self, v: &serde_json::Value) -> Option<Self::Elem> {
        match v {
            serde_json::Value::Number(n) => n.as_i64().map(|i| self.from_i64(i)),
            serde_json::Value::String(s) => s.trim().parse::<i64>().ok().map(|i| self.from_i64(i)),
            _ => None,
        }
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

/// 𝔽_p with a runtime prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn f2() -> Self {
        PrimeField { p: 2 }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // Fermat
        let mut base = *a;
        let mut e = self.p - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Some(acc)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn to_json(&self, a: &u64) -> serde_json::Value {
        serde_json::Value::from(*a)
    }
    fn config(&self) -> FieldConfig {
        if self.p == 2 {
            FieldConfig::F2
        } else {
            FieldConfig::Fp(self.p)
        }
    }
}

/// ℚ with arbitrary precision.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        self.from_i64(rng.gen_range(-2..=2))
    }
    fn to_json(&self, a: &BigRational) -> serde_json::Value {
        if a.is_integer() {
            let n = a.to_integer();
            match i64::try_from(&n) {
                Ok(v) => serde_json::Value::from(v),
                Err(_) => serde_json::Value::from(n.to_string()),
            }
        } else {
            let sign = if a.is_negative() { "-" } else { "" };
            serde_json::Value::from(format!("{sign}{}/{}", a.numer().abs(), a.denom()))
        }
    }
    fn config(&self) -> FieldConfig {
        FieldConfig::Q
    }
    fn from_json(&self, v: &serde_json::Value) -> Option<BigRational> {
        match v {
            serde_json::Value::Number(n) => n.as_i64().map(|i| self.from_i64(i)),
            serde_json::Value::String(s) => s.trim().parse::<BigRational>().ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unrecognised field `{0}` (expected F2, Fp:<p> or Q)")]
    Unrecognised(String),
}

/// Coefficient field selected at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FieldConfig {
    #[default]
    F2,
    Fp(u64),
    Q,
}

impl std::str::FromStr for FieldConfig {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, FieldError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("f2") {
            return Ok(FieldConfig::F2);
        }
        if s.eq_ignore_ascii_case("q") {
            return Ok(FieldConfig::Q);
        }
        if let Some(rest) = s.strip_prefix("Fp:").or_else(|| s.strip_prefix("fp:")) {
            let p: u64 = rest.parse().map_err(|_| FieldError::Unrecognised(s.to_string()))?;
            PrimeField::new(p)?;
            return Ok(if p == 2 { FieldConfig::F2 } else { FieldConfig::Fp(p) });
        }
        Err(FieldError::Unrecognised(s.to_string()))
    }
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldConfig::F2 => write!(f, "F2"),
            FieldConfig::Fp(p) => write!(f, "Fp:{p}"),
            FieldConfig::Q => write!(f, "Q"),
        }
    }
}

/// Dense row-major matrix. Zero-sized shapes are allowed and common
/// (maps into or out of a zero stalk).
#[derive(Clone, PartialEq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.field.to_json(self.get(r, c)))?;
            }
        }
        write!(f, "]")
    }
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        Matrix { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { field: field.clone(), rows, cols, data }
    }

    pub fn from_i64_rows(field: &F, rows: &[Vec<i64>], cols: usize) -> Self {
        let mut m = Self::zeros(field, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols);
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, field.from_i64(*v));
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(field: &F, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Matrix { field: field.clone(), rows, cols, data }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        let cols = self.cols;
        self.data[r * cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| self.field.is_zero(v))
    }

    pub fn column(&self, c: usize) -> Matrix<F> {
        self.select_cols(&[c])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix<F> {
        let mut out = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            out.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        Matrix { field: self.field.clone(), rows: rows.len(), cols: self.cols, data: out }
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix<F> {
        let mut out = Vec::with_capacity(cols.len() * self.rows);
        for r in 0..self.rows {
            for &c in cols {
                out.push(self.get(r, c).clone());
            }
        }
        Matrix { field: self.field.clone(), rows: self.rows, cols: cols.len(), data: out }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<F> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                out.push(self.get(r, c).clone());
            }
        }
        Matrix { field: self.field.clone(), rows: rows.len(), cols: cols.len(), data: out }
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(self.get(r, c).clone());
            }
        }
        Matrix { field: self.field.clone(), rows: self.cols, cols: self.rows, data: out }
    }

    pub fn mul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, b));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.shape(), other.shape(), "matrix sum shape mismatch");
        let data =
            self.data.iter().zip(&other.data).map(|(a, b)| self.field.add(a, b)).collect();
        Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix<F>) -> Matrix<F> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix<F> {
        self.scale(&self.field.neg(&self.field.one()))
    }

    pub fn scale(&self, s: &F::Elem) -> Matrix<F> {
        let data = self.data.iter().map(|a| self.field.mul(a, s)).collect();
        Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
            data.extend_from_slice(&other.data[r * other.cols..(r + 1) * other.cols]);
        }
        Matrix { field: self.field.clone(), rows: self.rows, cols, data }
    }

    /// `[self ; other]`
    pub fn vstack(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block(a: &Matrix<F>, b: &Matrix<F>, c: &Matrix<F>, d: &Matrix<F>) -> Matrix<F> {
        a.hstack(b).vstack(&c.hstack(d))
    }

    /// Row-reduces in place to reduced echelon form and returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| !f.is_zero(self.get(r, col))) else {
                continue;
            };
            if pr != row {
                for c in 0..self.cols {
                    self.data.swap(pr * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in col..self.cols {
                let v = f.mul(self.get(row, c), &inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for c in col..self.cols {
                    let v = f.sub(self.get(r, c), &f.mul(&factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.clone().rref_in_place().len()
    }

    /// Basis of the null space, as the columns of a `cols x k` matrix.
    pub fn kernel(&self) -> Matrix<F> {
        let f = &self.field;
        let mut r = self.clone();
        let pivots = r.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, f.one());
            for (pr, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, f.neg(r.get(pr, fc)));
            }
        }
        out
    }

    /// Indices of a maximal independent subset of columns (leftmost first).
    pub fn independent_columns(&self) -> Vec<usize> {
        if self.rows == 0 {
            return Vec::new();
        }
        self.clone().rref_in_place()
    }

    /// Basis of the column space, using original columns.
    pub fn image(&self) -> Matrix<F> {
        self.select_cols(&self.independent_columns())
    }

    /// Some `x` with `self * x = rhs`, or `None` when inconsistent.
    pub fn solve(&self, rhs: &Matrix<F>) -> Option<Matrix<F>> {
        assert_eq!(self.rows, rhs.rows, "solve shape mismatch");
        let f = &self.field;
        let mut aug = self.hstack(rhs);
        let pivots = aug.rref_in_place();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(f, self.cols, rhs.cols);
        for (pr, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(pc, j, aug.get(pr, self.cols + j).clone());
            }
        }
        Some(x)
    }

    /// Columns of `candidates` that extend the independent columns of `base`
    /// to a basis of `span(base) + span(candidates)`.
    pub fn extend_basis(base: &Matrix<F>, candidates: &Matrix<F>) -> Vec<usize> {
        let joined = base.hstack(candidates);
        joined
            .independent_columns()
            .into_iter()
            .filter(|&c| c >= base.cols)
            .map(|c| c - base.cols)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|r| {
                    serde_json::Value::Array(
                        (0..self.cols).map(|c| self.field.to_json(self.get(r, c))).collect(),
                    )
                })
                .collect(),
        )
    }

    /// Row operation `row[dst] += s * row[src]`.
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, s: &F::Elem) {
        if self.field.is_zero(s) {
            return;
        }
        for c in 0..self.cols {
            let v = self.field.add(self.get(dst, c), &self.field.mul(s, self.get(src, c)));
            self.set(dst, c, v);
        }
    }

    /// Column operation `col[dst] += s * col[src]`.
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, s: &F::Elem) {
        if self.field.is_zero(s) {
            return;
        }
        for r in 0..self.rows {
            let v = self.field.add(self.get(r, dst), &self.field.mul(s, self.get(r, src)));
            self.set(r, dst, v);
        }
    }

    pub fn remove_row(&self, row: usize) -> Matrix<F> {
        let keep: Vec<usize> = (0..self.rows).filter(|&r| r != row).collect();
        self.select_rows(&keep)
    }

    pub fn remove_col(&self, col: usize) -> Matrix<F> {
        let keep: Vec<usize> = (0..self.cols).filter(|&c| c != col).collect();
        self.select_cols(&keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> PrimeField {
        PrimeField::new(3).unwrap()
    }

    #[test]
    fn prime_field_inverse() {
        let f = PrimeField::new(7).unwrap();
        for a in 1..7 {
            let inv = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &inv), 1);
        }
        assert_eq!(f.inv(&0), None);
        assert!(PrimeField::new(9).is_err());
    }

    #[test]
    fn field_config_parsing() {
        assert_eq!("F2".parse::<FieldConfig>().unwrap(), FieldConfig::F2);
        assert_eq!("Fp:5".parse::<FieldConfig>().unwrap(), FieldConfig::Fp(5));
        assert_eq!("Q".parse::<FieldConfig>().unwrap(), FieldConfig::Q);
        assert!("Fp:4".parse::<FieldConfig>().is_err());
        assert!("R".parse::<FieldConfig>().is_err());
    }

    #[test]
    fn kernel_and_rank() {
        let f = f3();
        let m = Matrix::from_i64_rows(&f, &[vec![1, 2, 0], vec![2, 1, 0]], 3);
        // rows are proportional mod 3
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let f = Rationals;
        let a = Matrix::from_i64_rows(&f, &[vec![1, 1], vec![1, -1]], 2);
        let b = Matrix::from_i64_rows(&f, &[vec![3], vec![1]], 1);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        let singular = Matrix::from_i64_rows(&f, &[vec![1, 1], vec![1, 1]], 2);
        assert!(singular.solve(&b).is_none());
    }

    #[test]
    fn rational_json() {
        let f = Rationals;
        let half = f.inv(&f.from_i64(-2)).unwrap();
        assert_eq!(f.to_json(&half), serde_json::json!("-1/2"));
        assert_eq!(f.to_json(&f.from_i64(4)), serde_json::json!(4));
    }

    #[test]
    fn zero_sized_products() {
        let f = PrimeField::f2();
        let a = Matrix::zeros(&f, 2, 0);
        let b = Matrix::zeros(&f, 0, 3);
        let c = a.mul(&b);
        assert_eq!(c.shape(), (2, 3));
        assert!(c.is_zero());
        assert_eq!(Matrix::<PrimeField>::zeros(&f, 0, 4).kernel().cols(), 4);
    }

    #[test]
    fn extend_basis_picks_complement() {
        let f = PrimeField::f2();
        let base = Matrix::from_i64_rows(&f, &[vec![1], vec![0], vec![0]], 1);
        let cand = Matrix::identity(&f, 3);
        assert_eq!(Matrix::extend_basis(&base, &cand), vec![1, 2]);
    }
}
