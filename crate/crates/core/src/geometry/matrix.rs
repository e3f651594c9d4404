use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense 4×4 complex matrix in row-major layout.
pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A 4×4 Hermitian matrix, trace one, as reconstructed from Bloore coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix4 {
    entries: Mat4,
}

impl DensityMatrix4 {
    pub fn from_entries(entries: Mat4) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.entries[i][i].re).sum()
    }

    pub fn determinant(&self) -> f64 {
        det4(&self.entries).re
    }

    /// Largest |m_ij − conj(m_ji)| over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in i..4 {
                worst = worst.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Partial transpose on the second qubit: each 2×2 block is transposed in place.
    pub fn partial_transpose(&self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (row, out_row) in out.iter_mut().enumerate() {
            let (a, b) = (row / 2, row % 2);
            for (col, slot) in out_row.iter_mut().enumerate() {
                let (c, d) = (col / 2, col % 2);
                *slot = self.entries[2 * a + d][2 * c + b];
            }
        }
        Self { entries: out }
    }

    /// Relabels rows and columns: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.entries[perm[i]][perm[j]];
            }
        }
        Self { entries: out }
    }
}

/// Eigenvalues of a Hermitian 4×4 matrix in nondecreasing order.
///
/// Test oracle only: the pipeline itself never diagonalizes.
pub fn eigen_oracle(m: &DensityMatrix4) -> Result<[f64; 4]> {
    let defect = m.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (asymmetry {defect:e})"
        )));
    }
    let dense = Matrix4::from_fn(|i, j| m.entries[i][j]);
    let eig = dense.symmetric_eigenvalues();
    let mut values = [eig[0], eig[1], eig[2], eig[3]];
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det4(m: &Mat4) -> Complex64 {
    let mut a = *m;
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].norm_sqr().total_cmp(&a[y][col].norm_sqr()))
            .unwrap();
        if a[pivot][col] == ZERO {
            return ZERO;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for row in col + 1..4 {
            let factor = a[row][col] / p;
            if factor == ZERO {
                continue;
            }
            for k in col + 1..4 {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
        }
    }
    det
}

pub fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
