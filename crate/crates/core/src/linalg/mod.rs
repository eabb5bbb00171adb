//! Numerical kernels: compressed sparse rows, direct factorizations with a
//! minimum-degree ordering, dense complex Schur decompositions and the
//! Arnoldi process.

pub mod arnoldi;
pub mod dense;
pub mod factor;
pub mod ordering;
pub mod sparse;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub use arnoldi::{arnoldi, KrylovSchur, KrylovState, RitzPair};
pub use dense::{hessenberg_eig, DenseMatrix, Schur};
pub use factor::{factor_complex, factor_spd, Factorization};
pub use sparse::CsrMatrix;

/// Field element stored in sparse matrices and vectors.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(v: f64) -> Self;
    fn modulus(self) -> f64;
    fn real(self) -> f64;
    fn imag(self) -> f64;
    fn conj(self) -> Self;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(v: f64) -> Self {
        v
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn real(self) -> f64 {
        self
    }
    fn imag(self) -> f64 {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn real(self) -> f64 {
        self.re
    }
    fn imag(self) -> f64 {
        self.im
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter()
        .map(|v| v.modulus() * v.modulus())
        .sum::<f64>()
        .sqrt()
}

/// Hermitian inner product `xᴴy`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
