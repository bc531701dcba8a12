//! Minimal dense complex matrix kernel.
//!
//! The representation spaces here are desk-scale (dimensions up to a few
//! hundred), so a plain row-major `Vec<Complex64>` with naive products is
//! both sufficient and easy to audit. Unitarity defects are measured in the
//! max norm, matching the tolerances used by the test suites.

use crate::qarith::Cplx;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cplx>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Cplx::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cplx::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
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

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Cplx::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Cplx]) -> Vec<Cplx> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mat-vec product");
        let mut out = vec![Cplx::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Cplx::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Scale every entry.
    pub fn scaled(&self, s: Cplx) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `max_ij |self - rhs|`.
    pub fn max_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖ self·self† − I ‖_max`; zero for an exactly unitary matrix.
    pub fn unitarity_defect(&self) -> f64 {
        assert!(self.is_square(), "unitarity defect needs a square matrix");
        self.mul(&self.dagger()).max_diff(&CMatrix::identity(self.rows))
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `max_ij |M - Mᵀ|`; zero for a symmetric matrix.
    pub fn symmetry_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Cplx;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
