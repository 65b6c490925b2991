//! Tridiagonal operators on the battery ladder.
//!
//! Every Kraus operator of the exchange collision couples a level only to
//! itself and its two neighbours, so `M ρ M†` costs `O(d²)` instead of the
//! `O(d³)` of a dense product.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct BandOperator {
    /// `M[n][n]`.
    pub diag: Vec<C64>,
    /// `M[n][n+1]`, length `d - 1`.
    pub upper: Vec<C64>,
    /// `M[n+1][n]`, length `d - 1`.
    pub lower: Vec<C64>,
}

impl BandOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            diag: vec![C64::default(); dim],
            upper: vec![C64::default(); dim - 1],
            lower: vec![C64::default(); dim - 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            diag: self.diag.iter().map(|z| z.conj()).collect(),
            upper: self.lower.iter().map(|z| z.conj()).collect(),
            lower: self.upper.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scaled(mut self, s: C64) -> Self {
        for z in self.diag.iter_mut().chain(&mut self.upper).chain(&mut self.lower) {
            *z *= s;
        }
        self
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for n in 0..d {
            m[(n, n)] = self.diag[n];
        }
        for n in 0..d - 1 {
            m[(n, n + 1)] = self.upper[n];
            m[(n + 1, n)] = self.lower[n];
        }
        m
    }

    fn has_upper(&self) -> bool {
        self.upper.iter().any(|z| *z != C64::default())
    }

    fn has_lower(&self) -> bool {
        self.lower.iter().any(|z| *z != C64::default())
    }

    /// `out += M ρ M†`, with `scratch` reused for the intermediate `M ρ`.
    pub fn sandwich_add(&self, rho: &DMatrix<C64>, scratch: &mut DMatrix<C64>, out: &mut DMatrix<C64>) {
        let d = self.dim();
        debug_assert_eq!(rho.nrows(), d);
        let (up, lo) = (self.has_upper(), self.has_lower());

        // scratch = M ρ, column by column (storage is column-major).
        let src = rho.as_slice();
        let y = scratch.as_mut_slice();
        for j in 0..d {
            let col = &src[j * d..(j + 1) * d];
            let ycol = &mut y[j * d..(j + 1) * d];
            for i in 0..d {
                ycol[i] = self.diag[i] * col[i];
            }
            if up {
                for i in 0..d - 1 {
                    ycol[i] += self.upper[i] * col[i + 1];
                }
            }
            if lo {
                for i in 1..d {
                    ycol[i] += self.lower[i - 1] * col[i - 1];
                }
            }
        }

        // out += (M ρ) M†: column j mixes columns j-1, j, j+1 of M ρ.
        let y = scratch.as_slice();
        let o = out.as_mut_slice();
        for j in 0..d {
            let ocol = &mut o[j * d..(j + 1) * d];
            let a = self.diag[j].conj();
            let yj = &y[j * d..(j + 1) * d];
            for i in 0..d {
                ocol[i] += a * yj[i];
            }
            if up && j + 1 < d {
                let b = self.upper[j].conj();
                let yn = &y[(j + 1) * d..(j + 2) * d];
                for i in 0..d {
                    ocol[i] += b * yn[i];
                }
            }
            if lo && j > 0 {
                let b = self.lower[j - 1].conj();
                let yp = &y[(j - 1) * d..j * d];
                for i in 0..d {
                    ocol[i] += b * yp[i];
                }
            }
        }
    }
}
