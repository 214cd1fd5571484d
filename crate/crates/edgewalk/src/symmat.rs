//! Dense real symmetric linear algebra: construction, eigendecomposition,
//! rank-one updates, resolvent quadratic forms.
//!
//! Matrices are stored row-major in a flat `Vec<f64>` with exact symmetry
//! (`a[i][j]` and `a[j][i]` are the same bit pattern). The eigensolver is a
//! cyclic Jacobi iteration, which keeps all intermediate matrices symmetric
//! and is fast enough for the dimensions this crate works at.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative off-diagonal norm target for the Jacobi sweep loop.
const JACOBI_TOL: f64 = 1e-12;
/// Sweep cap before the eigensolver reports non-convergence.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Real vector with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("vector must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("vector entries must be finite".into()));
        }
        Ok(Vector { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Vector { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Dense symmetric matrix; `entries[i][j] == entries[j][i]` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be >= 1");
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Empty("diagonal must have dimension >= 1".into()));
        }
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::InvalidMatrix("entries must be finite".into()));
            }
            m.data[i * diag.len() + i] = d;
        }
        Ok(m)
    }

    /// Build from a flat row-major array, enforcing exact symmetry.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("matrix dimension must be >= 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i},{j}) = {} differs from ({j},{i}) = {}",
                        data[i * n + j],
                        data[j * n + i]
                    )));
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    /// Build from a generator evaluated on the upper triangle and mirrored,
    /// so the result is symmetric by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("matrix dimension must be >= 1".into()));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix("entries must be finite".into()));
                }
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {0}x{0}, vector has dimension {1}",
                self.n,
                x.dim()
            )));
        }
        let out = self
            .data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Vector { coords: out })
    }

    /// Entrywise difference; symmetric because both operands are.
    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} from {}x{}",
                other.n, other.n, self.n, self.n
            )));
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("matrix dimension must be >= 1".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        SymMatrix::from_rows(n, data)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        (0..m.n)
            .map(|i| m.data[i * m.n..(i + 1) * m.n].to_vec())
            .collect()
    }
}

/// A + x xᵀ, symmetric by construction.
pub fn rank_one_add(a: &SymMatrix, x: &Vector) -> Result<SymMatrix> {
    let n = a.dim();
    if x.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {n}x{n}, vector has dimension {}",
            x.dim()
        )));
    }
    let xs = x.as_slice();
    let mut data = a.data.clone();
    for i in 0..n {
        for j in i..n {
            let v = data[i * n + j] + xs[i] * xs[j];
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(SymMatrix { n, data })
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix.
/// Eigenvalues are sorted ascending; column `j` of the eigenvector array
/// pairs with `eigenvalues[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Row-major n x n; columns are eigenvectors.
    vectors: Vec<f64>,
}

impl SymmetricSpectrum {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.n - 1]
    }

    /// Entry (i, j) of the eigenvector array: component i of eigenvector j.
    pub fn vector_component(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.n + j]
    }

    /// Coefficients of x in the eigenbasis: (Qᵀ x)_j = <x, psi_j>.
    pub fn eigen_coeffs(&self, x: &Vector) -> Result<Vec<f64>> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "spectrum has dimension {}, vector has dimension {}",
                self.n,
                x.dim()
            )));
        }
        let mut c = vec![0.0; self.n];
        for (&xi, row) in x.as_slice().iter().zip(self.vectors.chunks_exact(self.n)) {
            if xi == 0.0 {
                continue;
            }
            for (cj, q) in c.iter_mut().zip(row) {
                *cj += xi * q;
            }
        }
        Ok(c)
    }

    /// Q diag(lambda) Qᵀ, for residual checks.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += self.eigenvalues[k] * self.vectors[i * n + k] * self.vectors[j * n + k];
                }
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    /// max |(QᵀQ - I)_{ij}|.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += self.vectors[i * n + a] * self.vectors[i * n + b];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// max |(Q diag(lambda) Qᵀ - A)_{ij}|.
    pub fn reconstruction_defect(&self, a: &SymMatrix) -> f64 {
        let rec = self.reconstruct();
        rec.data
            .iter()
            .zip(a.data.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

fn off_diagonal_norm(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m[i * n + j];
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

/// Mutable views of rows p < q of a row-major n x n array.
#[inline]
fn rows_pair_mut(m: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    let (head, tail) = m.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

/// One Jacobi rotation annihilating entry (p, q). The matrix is symmetric, so
/// columns p and q are read from rows p and q (contiguous); a mirror pass
/// restores exact symmetry afterwards. `vt` holds the eigenvector accumulator
/// transposed (row j = eigenvector j) so its update is contiguous too.
#[inline]
fn jacobi_rotate(m: &mut [f64], vt: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e153 {
        // theta^2 would overflow; the small root of t^2 + 2 theta t - 1 = 0
        // is 1/(2 theta) to first order.
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    let new_pp = app - t * apq;
    let new_qq = aqq + t * apq;
    {
        let (row_p, row_q) = rows_pair_mut(m, n, p, q);
        for (a, b) in row_p.iter_mut().zip(row_q.iter_mut()) {
            let akp = *a;
            let akq = *b;
            *a = akp - s * (akq + tau * akp);
            *b = akq + s * (akp - tau * akq);
        }
        row_p[p] = new_pp;
        row_p[q] = 0.0;
        row_q[q] = new_qq;
        row_q[p] = 0.0;
    }
    for k in 0..n {
        if k != p && k != q {
            m[k * n + p] = m[p * n + k];
            m[k * n + q] = m[q * n + k];
        }
    }
    let (v_p, v_q) = rows_pair_mut(vt, n, p, q);
    for (a, b) in v_p.iter_mut().zip(v_q.iter_mut()) {
        let vkp = *a;
        let vkq = *b;
        *a = vkp - s * (vkq + tau * vkp);
        *b = vkq + s * (vkp - tau * vkq);
    }
}

/// Cyclic Jacobi eigendecomposition. Sweeps until the off-diagonal norm
/// drops below `1e-12 * ||A||_F`, with a cap of 100 sweeps.
pub fn eigendecompose(a: &SymMatrix) -> Result<SymmetricSpectrum> {
    let n = a.dim();
    let mut m = a.data.clone();
    // Eigenvector accumulator, stored transposed (row j = eigenvector j).
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }

    let fro = a.frobenius_norm();
    let target = JACOBI_TOL * fro;
    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&m, n);
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                dim: n,
                off_norm: off,
                target,
                sweeps,
            });
        }
        // Entries at or below `skip` can all be left in place: a full sweep
        // of skips leaves the off-diagonal norm at most target/2.
        let skip = target / (2.0 * n as f64);
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                if m[p * n + q].abs() > skip {
                    jacobi_rotate(&mut m, &mut vt, n, p, q);
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).expect("finite eigenvalues"));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = vt[src * n + row];
        }
    }

    Ok(SymmetricSpectrum { n, eigenvalues, vectors })
}

/// Resolvent power in `resolvent_form`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventPower {
    One,
    Two,
}

/// Spectral sum sum_i <x, psi_i>^2 / (lambda_i - shift)^power.
///
/// The sign convention is the lower-side one (lambda - shift); callers on the
/// upper side negate the power-one value to get xᵀ(uI - A)⁻¹x.
pub fn resolvent_form(
    spec: &SymmetricSpectrum,
    shift: f64,
    power: ResolventPower,
    x: &Vector,
) -> Result<f64> {
    if x.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "spectrum has dimension {}, vector has dimension {}",
            spec.dim(),
            x.dim()
        )));
    }
    for &lam in spec.eigenvalues() {
        if (lam - shift).abs() <= 1e-12 * (1.0 + lam.abs()) {
            return Err(Error::NearSingularResolvent { shift, eigenvalue: lam });
        }
    }
    let coeffs = spec.eigen_coeffs(x)?;
    let mut sum = 0.0;
    for (c, &lam) in coeffs.iter().zip(spec.eigenvalues()) {
        let d = lam - shift;
        let term = match power {
            ResolventPower::One => c * c / d,
            ResolventPower::Two => c * c / (d * d),
        };
        sum += term;
    }
    Ok(sum)
}
