use crate::error::{Error, Result};
use crate::model::{Dataset, FeatureSet, Matrix};
use crate::numerics::QuadCoeffs;
use crate::real::{axpy, dot, norm2, Real};

/// Relative threshold below which a new column is considered dependent on
/// the columns already in the basis.
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of a growing set of columns, i.e. the `Q` factor of a
/// thin QR decomposition together with `R`.
///
/// Columns are orthogonalized by classical Gram-Schmidt applied twice, which
/// keeps `Q` orthonormal to working precision for well-conditioned designs.
#[derive(Debug, Clone)]
pub struct OrthoBasis<T> {
    n: usize,
    q: Vec<Vec<T>>,
    // r[k] holds column k of R, i.e. R[0..=k, k].
    r: Vec<Vec<T>>,
    labels: Vec<usize>,
}

impl<T: Real> OrthoBasis<T> {
    pub fn new(n: usize) -> Self {
        OrthoBasis { n, q: Vec::new(), r: Vec::new(), labels: Vec::new() }
    }

    /// Basis of the columns of `x` indexed by `set`.
    pub fn from_columns(x: &Matrix<T>, set: &[usize]) -> Result<Self> {
        let mut b = OrthoBasis::new(x.nrows());
        for &j in set {
            b.push(x.col(j), j)?;
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Appends a column. `label` is the 0-based feature index reported on
    /// rank deficiency.
    pub fn push(&mut self, col: &[T], label: usize) -> Result<()> {
        assert_eq!(col.len(), self.n);
        let mut v = col.to_vec();
        let mut rcol = vec![T::zero(); self.q.len() + 1];
        for _ in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let c = dot(qk, &v);
                rcol[k] = rcol[k] + c;
                axpy(-c, qk, &mut v);
            }
        }
        let nrm = norm2(&v).sqrt();
        let scale = norm2(col).sqrt().max(self.r.iter().fold(T::zero(), |m, rc| m.max(rc[rc.len() - 1].abs())));
        if !(nrm > T::floor_tol(RANK_TOL) * scale) || self.q.len() >= self.n {
            let mut columns: Vec<usize> = self.labels.iter().chain(std::iter::once(&label)).map(|j| j + 1).collect();
            columns.sort_unstable();
            return Err(Error::RankDeficient { columns });
        }
        for vi in &mut v {
            *vi = *vi / nrm;
        }
        *rcol.last_mut().unwrap() = nrm;
        self.q.push(v);
        self.r.push(rcol);
        self.labels.push(label);
        Ok(())
    }

    /// `v - Q Q^T v`, in place.
    pub fn project_out_in_place(&self, v: &mut [T]) {
        for _ in 0..2 {
            for qk in &self.q {
                let c = dot(qk, v);
                axpy(-c, qk, v);
            }
        }
    }

    pub fn project_out(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        self.project_out_in_place(&mut out);
        out
    }

    /// Least-squares coefficients `R^{-1} Q^T v`, ordered like the pushed
    /// columns.
    pub fn coefficients(&self, v: &[T]) -> Vec<T> {
        let m = self.q.len();
        let qtv: Vec<T> = self.q.iter().map(|qk| dot(qk, v)).collect();
        let mut beta = vec![T::zero(); m];
        for i in (0..m).rev() {
            let mut s = qtv[i];
            for k in (i + 1)..m {
                s = s - self.r[k][i] * beta[k];
            }
            beta[i] = s / self.r[i][i];
        }
        beta
    }
}

/// `(I - P_{X_M}) v`, with `v` returned unchanged for the empty model.
pub fn residual<T: Real>(ds: &Dataset<T>, set: &FeatureSet, v: &[T]) -> Result<Vec<T>> {
    assert_eq!(v.len(), ds.n(), "vector length must match the number of rows");
    let basis = OrthoBasis::from_columns(ds.x(), set.indices())?;
    Ok(basis.project_out(v))
}

/// Ordinary least-squares coefficients of `v` on `X_M`, in the sorted order
/// of `set`.
pub fn least_squares<T: Real>(x: &Matrix<T>, set: &FeatureSet, v: &[T]) -> Result<Vec<T>> {
    OrthoBasis::from_columns(x, set.indices()).map(|b| b.coefficients(v))
}

/// Coefficients of `AIC(M, z)` along `y(z) = a + b z`:
/// `(b^T A b, 2 a^T A b, a^T A a + 2|M|)` with
/// `A = Sigma^{-1} - Sigma^{-1} X_M (X_M^T Sigma^{-1} X_M)^{-1} X_M^T Sigma^{-1}`.
///
/// Evaluated in whitened coordinates, where `A` becomes the orthogonal
/// projector onto the complement of `L^{-1} X_M`.
pub fn aic_quadratic_coeffs<T: Real>(a: &[T], b: &[T], set: &FeatureSet, ds: &Dataset<T>) -> Result<QuadCoeffs<T>> {
    let aw = ds.sigma().whiten(a);
    let bw = ds.sigma().whiten(b);
    let basis = OrthoBasis::from_columns(ds.whitened_x(), set.indices())?;
    Ok(aic_quadratic_whitened(&basis, &aw, &bw))
}

/// [`aic_quadratic_coeffs`] for already-whitened inputs and a prepared basis.
pub(crate) fn aic_quadratic_whitened<T: Real>(basis: &OrthoBasis<T>, aw: &[T], bw: &[T]) -> QuadCoeffs<T> {
    let ra = basis.project_out(aw);
    let rb = basis.project_out(bw);
    let two = T::lit(2.0);
    QuadCoeffs {
        a2: norm2(&rb),
        a1: two * dot(&ra, &rb),
        a0: norm2(&ra) + two * T::from_usize(basis.len()).unwrap(),
    }
}
