//! Gibbs kernel operators K = exp(-C / eps), dense or factorized.
//!
//! A factorized operator stores per-point feature embeddings: X holds one
//! embedding per row for the left measure (n x p), Z likewise for the right
//! measure (m x p), and the implied kernel entry is
//! K_ij = row_i(X)^T row_j(Z), exact by construction. Products K w and K^T u
//! then cost O((n + m) p) instead of O(n m):
//!
//!   K w   = X (Z^T w),    K^T u = Z (X^T u).
//!
//! Dense operators store the matrix itself. Entries that underflow to exact
//! zero when exponentiating are permitted but counted, so callers can refuse
//! kernels that lost positivity.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::linalg::{axpy, dot};
use crate::Result;

/// Complexity label for one application of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostClass {
    /// O(n m) per product (dense storage).
    Quadratic,
    /// O((n + m) p) per product (feature factorization of width p).
    LinearInR,
}

/// Storage backing the operator.
#[derive(Debug, Clone)]
pub enum KernelVariant {
    Dense {
        matrix: Array2<f64>,
        /// Number of entries that are exactly zero (exp underflow).
        zero_entries: usize,
    },
    Factorized {
        /// Left embeddings, one row per support point of mu (n x p).
        xi: Array2<f64>,
        /// Right embeddings, one row per support point of nu (m x p).
        zeta: Array2<f64>,
    },
}

/// A positive kernel exposed through matrix-vector products.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    variant: KernelVariant,
    cost_class: CostClass,
}

impl KernelOperator {
    /// Wraps an explicit kernel matrix.
    ///
    /// Entries must be finite and nonnegative. Exact zeros are accepted but
    /// counted; see [`KernelOperator::zero_entries`].
    pub fn dense(matrix: Array2<f64>) -> Result<Self> {
        let mut zero_entries = 0usize;
        for ((row, col), &value) in matrix.indexed_iter() {
            if !value.is_finite() || value < 0.0 {
                return Err(CoreError::InvalidEntry {
                    context: "kernel matrix",
                    row,
                    col,
                    value,
                });
            }
            if value == 0.0 {
                zero_entries += 1;
            }
        }
        Ok(Self {
            variant: KernelVariant::Dense {
                matrix,
                zero_entries,
            },
            cost_class: CostClass::Quadratic,
        })
    }

    /// Wraps per-point embeddings whose row dot products define the kernel.
    ///
    /// Entries must be finite and nonnegative, and both embeddings must share
    /// a positive width. Positivity of the implied kernel entries is the
    /// caller's responsibility (feature constructions guarantee it by keeping
    /// a strictly positive slot in every embedding).
    pub fn factorized(xi: Array2<f64>, zeta: Array2<f64>) -> Result<Self> {
        if xi.ncols() != zeta.ncols() {
            return Err(CoreError::LengthMismatch {
                context: "embedding widths",
                expected: xi.ncols(),
                got: zeta.ncols(),
            });
        }
        if xi.ncols() == 0 {
            return Err(CoreError::EmptyFeature);
        }
        for (name, mat) in [("left embeddings", &xi), ("right embeddings", &zeta)] {
            for ((row, col), &value) in mat.indexed_iter() {
                if !value.is_finite() || value < 0.0 {
                    return Err(CoreError::InvalidEntry {
                        context: name,
                        row,
                        col,
                        value,
                    });
                }
            }
        }
        Ok(Self {
            variant: KernelVariant::Factorized { xi, zeta },
            cost_class: CostClass::LinearInR,
        })
    }

    /// (n, m): output and input lengths of `matvec`.
    pub fn shape(&self) -> (usize, usize) {
        match &self.variant {
            KernelVariant::Dense { matrix, .. } => matrix.dim(),
            KernelVariant::Factorized { xi, zeta } => (xi.nrows(), zeta.nrows()),
        }
    }

    /// Complexity label of one product.
    pub fn cost_class(&self) -> CostClass {
        self.cost_class
    }

    /// Embedding width p for factorized operators.
    pub fn embedding_width(&self) -> Option<usize> {
        match &self.variant {
            KernelVariant::Dense { .. } => None,
            KernelVariant::Factorized { xi, .. } => Some(xi.ncols()),
        }
    }

    /// Number of exactly zero entries (only dense operators can report a
    /// positive count; factorized kernels are validated through embeddings).
    pub fn zero_entries(&self) -> usize {
        match &self.variant {
            KernelVariant::Dense { zero_entries, .. } => *zero_entries,
            KernelVariant::Factorized { .. } => 0,
        }
    }

    /// Read access to the backing storage.
    pub fn variant(&self) -> &KernelVariant {
        &self.variant
    }

    /// K w.
    ///
    /// # Errors
    /// [`CoreError::LengthMismatch`] when `w` does not have length m.
    pub fn matvec(&self, w: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let (n, m) = self.shape();
        if w.len() != m {
            return Err(CoreError::LengthMismatch {
                context: "matvec input",
                expected: m,
                got: w.len(),
            });
        }
        let w = w.as_standard_layout();
        let w_slice = w.as_slice().expect("standard layout");
        match &self.variant {
            KernelVariant::Dense { matrix, .. } => {
                let mut out = Array1::zeros(n);
                for (i, row) in matrix.rows().into_iter().enumerate() {
                    out[i] = dot(row.as_slice().expect("dense rows are contiguous"), w_slice);
                }
                Ok(out)
            }
            KernelVariant::Factorized { xi, zeta } => {
                let mut t = vec![0.0f64; zeta.ncols()];
                for (j, row) in zeta.rows().into_iter().enumerate() {
                    axpy(w_slice[j], row.as_slice().expect("contiguous"), &mut t);
                }
                let mut out = Array1::zeros(n);
                for (i, row) in xi.rows().into_iter().enumerate() {
                    out[i] = dot(row.as_slice().expect("contiguous"), &t);
                }
                Ok(out)
            }
        }
    }

    /// K^T u.
    ///
    /// # Errors
    /// [`CoreError::LengthMismatch`] when `u` does not have length n.
    pub fn rmatvec(&self, u: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let (n, m) = self.shape();
        if u.len() != n {
            return Err(CoreError::LengthMismatch {
                context: "rmatvec input",
                expected: n,
                got: u.len(),
            });
        }
        let u = u.as_standard_layout();
        let u_slice = u.as_slice().expect("standard layout");
        match &self.variant {
            KernelVariant::Dense { matrix, .. } => {
                let mut out = vec![0.0f64; m];
                for (i, row) in matrix.rows().into_iter().enumerate() {
                    axpy(u_slice[i], row.as_slice().expect("contiguous"), &mut out);
                }
                Ok(Array1::from(out))
            }
            KernelVariant::Factorized { xi, zeta } => {
                let mut s = vec![0.0f64; xi.ncols()];
                for (i, row) in xi.rows().into_iter().enumerate() {
                    axpy(u_slice[i], row.as_slice().expect("contiguous"), &mut s);
                }
                let mut out = Array1::zeros(m);
                for (j, row) in zeta.rows().into_iter().enumerate() {
                    out[j] = dot(row.as_slice().expect("contiguous"), &s);
                }
                Ok(out)
            }
        }
    }

    /// Materializes the full n x m matrix. Intended for small instances,
    /// diagnostics, and oracle tests.
    pub fn materialize(&self) -> Array2<f64> {
        match &self.variant {
            KernelVariant::Dense { matrix, .. } => matrix.clone(),
            KernelVariant::Factorized { xi, zeta } => {
                let (n, m) = (xi.nrows(), zeta.nrows());
                let mut out = Array2::zeros((n, m));
                for i in 0..n {
                    let row = xi.row(i);
                    for j in 0..m {
                        out[[i, j]] = dot(
                            row.as_slice().expect("contiguous"),
                            zeta.row(j).as_slice().expect("contiguous"),
                        );
                    }
                }
                out
            }
        }
    }

    /// Bounds (lo, hi) with lo <= K_ij <= hi for every entry.
    ///
    /// Exact for dense operators. For factorized operators the bounds come
    /// from per-feature extrema, lo = sum_f min_i X_if * min_j Z_jf and
    /// hi likewise with maxima, so they contain but need not attain the true
    /// extremes.
    pub fn entry_bounds(&self) -> (f64, f64) {
        match &self.variant {
            KernelVariant::Dense { matrix, .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &value in matrix.iter() {
                    lo = lo.min(value);
                    hi = hi.max(value);
                }
                (lo, hi)
            }
            KernelVariant::Factorized { xi, zeta } => {
                let p = xi.ncols();
                let mut lo = 0.0;
                let mut hi = 0.0;
                for f in 0..p {
                    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
                    for &value in xi.column(f).iter() {
                        xmin = xmin.min(value);
                        xmax = xmax.max(value);
                    }
                    let (mut zmin, mut zmax) = (f64::INFINITY, f64::NEG_INFINITY);
                    for &value in zeta.column(f).iter() {
                        zmin = zmin.min(value);
                        zmax = zmax.max(value);
                    }
                    lo += xmin * zmin;
                    hi += xmax * zmax;
                }
                (lo, hi)
            }
        }
    }
}

/// Entrywise Gibbs kernel exp(-C / eps) as a dense operator.
///
/// Entries of a nonnegative cost land in (0, 1]; costs large enough that the
/// exponential underflows produce exact zeros, which are counted on the
/// returned operator rather than rejected here.
pub fn gibbs_kernel(cost: ArrayView2<'_, f64>, epsilon: f64) -> Result<KernelOperator> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CoreError::NonPositiveEpsilon(epsilon));
    }
    let matrix = cost.mapv(|c| (-c / epsilon).exp());
    KernelOperator::dense(matrix)
}
