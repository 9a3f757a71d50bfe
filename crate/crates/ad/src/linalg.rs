//! Dense vectors and matrices over [`Scalar`].
//!
//! Everything here is composed from the lifted scalar primitives, so any
//! program written against these containers differentiates transparently
//! in either mode. Storage is row-major, shapes are fixed at
//! construction, and there is no implicit broadcasting: mismatched shapes
//! panic with both shapes in the message.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// A dense vector of differentiable scalars.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ADVector {
    elems: Vec<Scalar>,
}

impl ADVector {
    pub fn new(elems: Vec<Scalar>) -> ADVector {
        ADVector { elems }
    }

    pub fn from_f64s(xs: &[f64]) -> ADVector {
        ADVector {
            elems: xs.iter().map(|&v| Scalar::Constant(v)).collect(),
        }
    }

    pub fn zeros(n: usize) -> ADVector {
        ADVector {
            elems: vec![Scalar::ZERO; n],
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.elems
    }

    /// The fully stripped floating point values.
    pub fn values(&self) -> Vec<f64> {
        self.elems.iter().map(Scalar::value).collect()
    }

    pub fn scale(&self, c: &Scalar) -> ADVector {
        ADVector {
            elems: self.elems.iter().map(|e| c * e).collect(),
        }
    }

    pub fn dot(&self, other: &ADVector) -> Scalar {
        check_len("dot", self.len(), other.len());
        self.elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &ADVector) -> ADVector {
        check_len("hadamard", self.len(), other.len());
        ADVector {
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> ADVector {
        ADVector {
            elems: self.elems.iter().map(f).collect(),
        }
    }

    pub fn sum(&self) -> Scalar {
        self.elems.iter().cloned().sum()
    }
}

impl From<Vec<Scalar>> for ADVector {
    fn from(elems: Vec<Scalar>) -> ADVector {
        ADVector { elems }
    }
}

impl From<ADVector> for Vec<Scalar> {
    fn from(v: ADVector) -> Vec<Scalar> {
        v.elems
    }
}

impl FromIterator<Scalar> for ADVector {
    fn from_iter<I: IntoIterator<Item = Scalar>>(iter: I) -> ADVector {
        ADVector {
            elems: iter.into_iter().collect(),
        }
    }
}

impl Index<usize> for ADVector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.elems[i]
    }
}

impl IndexMut<usize> for ADVector {
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.elems[i]
    }
}

fn check_len(op: &str, a: usize, b: usize) {
    assert!(a == b, "{op}: vector lengths differ ({a} vs {b})");
}

impl Add for &ADVector {
    type Output = ADVector;
    fn add(self, rhs: &ADVector) -> ADVector {
        check_len("add", self.len(), rhs.len());
        self.elems
            .iter()
            .zip(&rhs.elems)
            .map(|(a, b)| a + b)
            .collect()
    }
}

impl Sub for &ADVector {
    type Output = ADVector;
    fn sub(self, rhs: &ADVector) -> ADVector {
        check_len("sub", self.len(), rhs.len());
        self.elems
            .iter()
            .zip(&rhs.elems)
            .map(|(a, b)| a - b)
            .collect()
    }
}

impl Neg for &ADVector {
    type Output = ADVector;
    fn neg(self) -> ADVector {
        self.map(|e| -e)
    }
}

/// A dense row-major matrix of differentiable scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct ADMatrix {
    rows: usize,
    cols: usize,
    elems: Vec<Scalar>,
}

impl ADMatrix {
    pub fn new(rows: usize, cols: usize, elems: Vec<Scalar>) -> ADMatrix {
        assert!(
            elems.len() == rows * cols,
            "matrix {rows}x{cols} needs {} elements, got {}",
            rows * cols,
            elems.len()
        );
        ADMatrix { rows, cols, elems }
    }

    pub fn from_rows_f64(rows: &[Vec<f64>]) -> ADMatrix {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut elems = Vec::with_capacity(m * n);
        for r in rows {
            assert!(r.len() == n, "ragged rows: {n} vs {}", r.len());
            elems.extend(r.iter().map(|&v| Scalar::Constant(v)));
        }
        ADMatrix {
            rows: m,
            cols: n,
            elems,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> ADMatrix {
        ADMatrix {
            rows,
            cols,
            elems: vec![Scalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> ADMatrix {
        let mut m = ADMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::ONE;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].value()).collect())
            .collect()
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> ADMatrix {
        ADMatrix {
            rows: self.rows,
            cols: self.cols,
            elems: self.elems.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> ADMatrix {
        let mut elems = Vec::with_capacity(self.elems.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                elems.push(self[(i, j)].clone());
            }
        }
        ADMatrix {
            rows: self.cols,
            cols: self.rows,
            elems,
        }
    }

    pub fn matvec(&self, v: &ADVector) -> ADVector {
        assert!(
            self.cols == v.len(),
            "matvec: matrix {}x{} against vector of length {}",
            self.rows,
            self.cols,
            v.len()
        );
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .sum::<Scalar>()
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &ADMatrix) -> ADMatrix {
        assert!(
            self.cols == rhs.rows,
            "matmul: shapes {}x{} and {}x{} do not chain",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let mut elems = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                elems.push(
                    (0..self.cols)
                        .map(|k| &self[(i, k)] * &rhs[(k, j)])
                        .sum::<Scalar>(),
                );
            }
        }
        ADMatrix {
            rows: self.rows,
            cols: rhs.cols,
            elems,
        }
    }
}

impl Index<(usize, usize)> for ADMatrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of {}x{}", self.rows, self.cols);
        &self.elems[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ADMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of {}x{}", self.rows, self.cols);
        &mut self.elems[i * self.cols + j]
    }
}

impl Mul<&ADVector> for &ADMatrix {
    type Output = ADVector;
    fn mul(self, v: &ADVector) -> ADVector {
        self.matvec(v)
    }
}

impl Mul<&ADMatrix> for &ADMatrix {
    type Output = ADMatrix;
    fn mul(self, rhs: &ADMatrix) -> ADMatrix {
        self.matmul(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_product() {
        let a = ADVector::from_f64s(&[1.0, 2.0, 3.0]);
        let b = ADVector::from_f64s(&[4.0, 5.0, 6.0]);
        assert_eq!(a.dot(&b).value(), 32.0);
    }

    #[test]
    fn dot_of_empty_vectors_is_zero() {
        let a = ADVector::from_f64s(&[]);
        assert_eq!(a.dot(&a).value(), 0.0);
    }

    #[test]
    fn scale_by_zero() {
        let v = ADVector::from_f64s(&[1.0, -2.0]);
        assert_eq!(v.scale(&Scalar::ZERO).values(), vec![0.0, 0.0]);
    }

    #[test]
    fn hadamard_product_and_identity() {
        let a = ADVector::from_f64s(&[1.0, 2.0]);
        let b = ADVector::from_f64s(&[3.0, 4.0]);
        assert_eq!(a.hadamard(&b).values(), vec![3.0, 8.0]);
        let ones = ADVector::from_f64s(&[1.0, 1.0]);
        assert_eq!(a.hadamard(&ones).values(), a.values());
    }

    #[test]
    #[should_panic(expected = "hadamard: vector lengths differ (2 vs 3)")]
    fn hadamard_shape_mismatch_names_both_lengths() {
        let a = ADVector::from_f64s(&[1.0, 2.0]);
        let b = ADVector::from_f64s(&[1.0, 2.0, 3.0]);
        a.hadamard(&b);
    }

    #[test]
    fn map_exp() {
        let v = ADVector::from_f64s(&[0.0, 0.0]);
        assert_eq!(v.map(|e| e.exp()).values(), vec![1.0, 1.0]);
    }

    #[test]
    fn identity_matvec() {
        let v = ADVector::from_f64s(&[1.5, -2.0, 3.0]);
        let i3 = ADMatrix::identity(3);
        assert_eq!(i3.matvec(&v).values(), v.values());
    }

    #[test]
    fn transpose_swaps_entries() {
        let m = ADMatrix::from_rows_f64(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let t = m.transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m[(i, j)].value(), t[(j, i)].value());
            }
        }
        assert_eq!(t.transpose().values(), m.values());
    }

    #[test]
    fn matmul_identity() {
        let a = ADMatrix::from_rows_f64(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(a.matmul(&ADMatrix::identity(2)).values(), a.values());
    }

    #[test]
    #[should_panic(expected = "matmul: shapes 2x2 and 3x1 do not chain")]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = ADMatrix::identity(2);
        let b = ADMatrix::zeros(3, 1);
        a.matmul(&b);
    }

    #[test]
    fn zero_dimensional_cases_are_legal() {
        let e = ADVector::zeros(0);
        assert_eq!((&e + &e).len(), 0);
        let m = ADMatrix::zeros(0, 3);
        assert_eq!(m.transpose().rows(), 3);
        assert_eq!(m.matvec(&ADVector::zeros(3)).len(), 0);
    }
}
