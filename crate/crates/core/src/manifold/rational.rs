//! Exact rational matrices and polynomials, sized for desk-scale spectra.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Dense matrix over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
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

    pub fn trace(&self) -> Rat {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        RatMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Copy of the `rows x cols` block with upper-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> RatMatrix {
        RatMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Write `src` into this matrix with upper-left corner `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &RatMatrix) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)].clone();
            }
        }
    }

    pub fn scale(&self, s: &Rat) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * s)
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64().unwrap()).collect())
            .collect()
    }

    /// Solve `A x = b` exactly by Gaussian elimination.
    /// Returns `None` when the matrix is singular.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert!(self.is_square());
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut rhs = b.to_vec();
        let idx = |i: usize, j: usize| i * n + j;
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !a[idx(r, col)].is_zero())?;
            if pivot_row != col {
                for j in 0..n {
                    a.swap(idx(col, j), idx(pivot_row, j));
                }
                rhs.swap(col, pivot_row);
            }
            let pivot = a[idx(col, col)].clone();
            for r in col + 1..n {
                if a[idx(r, col)].is_zero() {
                    continue;
                }
                let factor = &a[idx(r, col)] / &pivot;
                for j in col..n {
                    let sub = &factor * &a[idx(col, j)];
                    a[idx(r, j)] -= sub;
                }
                let sub = &factor * &rhs[col];
                rhs[r] -= sub;
            }
        }
        let mut x = vec![Rat::zero(); n];
        for row in (0..n).rev() {
            let mut acc = rhs[row].clone();
            for j in row + 1..n {
                acc -= &a[idx(row, j)] * &x[j];
            }
            x[row] = acc / &a[idx(row, row)];
        }
        Some(x)
    }

    /// Determinant by cofactor expansion; exponential cost, intended as an
    /// independent cross-check for small matrices only.
    pub fn det_cofactor(&self) -> Rat {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return self[(0, 0)].clone();
        }
        let mut det = Rat::zero();
        for j in 0..n {
            if self[(0, j)].is_zero() {
                continue;
            }
            let minor = RatMatrix::from_fn(n - 1, n - 1, |r, c| {
                self[(r + 1, if c < j { c } else { c + 1 })].clone()
            });
            let term = &self[(0, j)] * minor.det_cofactor();
            if j % 2 == 0 {
                det += term;
            } else {
                det -= term;
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Polynomial over the rationals, coefficients stored low to high.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPoly {
    pub coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn new(coeffs: Vec<Rat>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn one() -> Self {
        Self { coeffs: vec![Rat::one()] }
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().is_zero() {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = a * b;
                coeffs[i + j] += prod;
            }
        }
        RatPoly::new(coeffs)
    }

    pub fn pow(&self, e: usize) -> RatPoly {
        let mut out = RatPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Exact Euclidean division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.coeffs.iter().all(|c| c.is_zero()));
        let mut rem = self.coeffs.clone();
        let d = divisor.degree();
        if self.degree() < d {
            return (RatPoly::new(vec![Rat::zero()]), self.clone());
        }
        let mut quot = vec![Rat::zero(); self.degree() - d + 1];
        let lead = divisor.coeffs[d].clone();
        for k in (0..quot.len()).rev() {
            let q = &rem[k + d] / &lead;
            if q.is_zero() {
                continue;
            }
            for j in 0..=d {
                let sub = &q * &divisor.coeffs[j];
                rem[k + j] -= sub;
            }
            quot[k] = q;
        }
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// True when every coefficient is an integer.
    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one() || c.is_zero())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap()).collect()
    }
}

impl std::fmt::Display for RatPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.degree() > 0 {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let mag_str = if mag.is_one() && d > 0 { String::new() } else { mag.to_string() };
            match d {
                0 => write!(f, " {sign} {}", if mag_str.is_empty() { "1".into() } else { mag_str })?,
                1 => write!(f, " {sign} {mag_str}x")?,
                _ => write!(f, " {sign} {mag_str}x^{d}")?,
            }
            first = false;
        }
        Ok(())
    }
}
