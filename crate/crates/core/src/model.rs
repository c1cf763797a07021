//! Domain types: design matrices, covariances, selection records and the
//! one-dimensional region algebra used for truncation sets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::real::{dot, Real};

// ---------------------------------------------------------------------------
// Intervals and regions
// ---------------------------------------------------------------------------

/// Closed interval `[lo, hi]` on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn full() -> Self {
        Interval { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.hi > self.lo)
    }

    pub fn contains(&self, z: T) -> bool {
        self.lo <= z && z <= self.hi
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }
}

/// Finite union of disjoint, non-degenerate, sorted intervals.
///
/// Regions are only ever built through [`Region::normalize`] (or operations
/// that preserve its invariants), so consumers can rely on the ordering.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region<T> {
    intervals: Vec<Interval<T>>,
}

/// Default merge tolerance: `1e-10` times the magnitude of the largest finite
/// endpoint (at least `1e-10`).
pub fn default_merge_tol<T: Real>(raw: &[Interval<T>]) -> T {
    let scale = raw
        .iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .filter(|v| v.is_finite())
        .fold(T::one(), |m, v| m.max(v.abs()));
    T::lit(1e-10) * scale
}

impl<T: Real> Region<T> {
    pub fn empty() -> Self {
        Region { intervals: Vec::new() }
    }

    /// The whole real line.
    pub fn full() -> Self {
        Region { intervals: vec![Interval::full()] }
    }

    pub fn from_interval(lo: T, hi: T) -> Self {
        Self::normalize(vec![Interval::new(lo, hi)], T::zero())
    }

    /// Canonical form of a union of intervals: degenerate pieces dropped,
    /// sorted by lower end, and neighbours closer than `merge_tol` fused.
    pub fn normalize(mut raw: Vec<Interval<T>>, merge_tol: T) -> Self {
        raw.retain(|iv| !iv.is_degenerate());
        raw.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("interval endpoints are not NaN"));
        let mut out: Vec<Interval<T>> = Vec::with_capacity(raw.len());
        for iv in raw {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi + merge_tol => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        Region { intervals: out }
    }

    /// [`Region::normalize`] with [`default_merge_tol`].
    pub fn from_intervals(raw: Vec<Interval<T>>) -> Self {
        let tol = default_merge_tol(&raw);
        Self::normalize(raw, tol)
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, z: T) -> bool {
        self.component_containing(z).is_some()
    }

    /// Membership with every interval widened by `tol` on both sides.
    pub fn contains_with_tol(&self, z: T, tol: T) -> bool {
        self.intervals.iter().any(|iv| iv.lo - tol <= z && z <= iv.hi + tol)
    }

    /// The interval holding `z`, if any.
    pub fn component_containing(&self, z: T) -> Option<Interval<T>> {
        let idx = self.intervals.partition_point(|iv| iv.hi < z);
        self.intervals.get(idx).filter(|iv| iv.lo <= z).copied()
    }

    /// Distance from `z` to the closest finite endpoint (`+inf` when none).
    pub fn distance_to_endpoint(&self, z: T) -> T {
        self.intervals
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .filter(|e| e.is_finite())
            .fold(T::infinity(), |m, e| m.min((z - e).abs()))
    }

    /// Total length; `+inf` if any piece is unbounded.
    pub fn measure(&self) -> T {
        self.intervals.iter().fold(T::zero(), |acc, iv| acc + iv.length())
    }

    /// Exact intersection; endpoints are copied, never recomputed.
    pub fn intersect(&self, other: &Region<T>) -> Region<T> {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if hi > lo {
                out.push(Interval::new(lo, hi));
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Region::normalize(out, T::zero())
    }

    pub fn union(&self, other: &Region<T>) -> Region<T> {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        Region::normalize(raw, T::zero())
    }

    /// Intersection with `[lo, hi]`.
    pub fn restrict(&self, lo: T, hi: T) -> Region<T> {
        self.intersect(&Region::from_interval(lo, hi))
    }
}

impl<T: Real> fmt::Display for Region<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{}, {}]", iv.lo, iv.hi)?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Dense matrices and covariance
// ---------------------------------------------------------------------------

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    /// Builds from column-major storage.
    pub fn from_col_major(nrows: usize, ncols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), nrows * ncols, "storage does not match shape");
        Matrix { nrows, ncols, data }
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for c in columns {
            assert_eq!(c.len(), nrows, "ragged columns");
            data.extend_from_slice(c);
        }
        Matrix { nrows, ncols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.nrows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// `X v`
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![T::zero(); self.nrows];
        for (j, &vj) in v.iter().enumerate() {
            crate::real::axpy(vj, self.col(j), &mut out);
        }
        out
    }

    /// `X^T v`
    pub fn t_mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.ncols).map(|j| dot(self.col(j), v)).collect()
    }

    /// Rows `rows` (in the given order), all columns.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix<T> {
        let mut m = Matrix::zeros(rows.len(), self.ncols);
        for j in 0..self.ncols {
            let src = self.col(j);
            for (dst, &r) in m.col_mut(j).iter_mut().zip(rows) {
                *dst = src[r];
            }
        }
        m
    }

    /// Principal submatrix on `rows` x `rows`.
    pub fn select_square(&self, rows: &[usize]) -> Matrix<T> {
        let mut m = Matrix::zeros(rows.len(), rows.len());
        for (jj, &c) in rows.iter().enumerate() {
            for (ii, &r) in rows.iter().enumerate() {
                m.set(ii, jj, self.get(r, c));
            }
        }
        m
    }

    pub fn column_norms(&self) -> Vec<T> {
        (0..self.ncols).map(|j| dot(self.col(j), self.col(j)).sqrt()).collect()
    }

    /// Scales every column to unit Euclidean length, returning the original
    /// norms. Zero columns are left untouched.
    pub fn normalize_columns(&mut self) -> Vec<T> {
        let norms = self.column_norms();
        for (j, &nrm) in norms.iter().enumerate() {
            if nrm > T::zero() {
                for v in self.col_mut(j) {
                    *v = *v / nrm;
                }
            }
        }
        norms
    }
}

/// Covariance of the response.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance<T> {
    /// `sigma2 * I_n`
    Isotropic { n: usize, sigma2: T },
    /// General symmetric positive definite matrix with its lower Cholesky
    /// factor.
    Dense { matrix: Matrix<T>, chol: Matrix<T> },
}

impl<T: Real> Covariance<T> {
    pub fn isotropic(n: usize, sigma2: T) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::InvalidDataset(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(Covariance::Isotropic { n, sigma2 })
    }

    /// Validates symmetry and positive definiteness (via Cholesky).
    pub fn dense(matrix: Matrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InvalidDataset("covariance must be square".into()));
        }
        let scale = (0..n).fold(T::zero(), |m, i| m.max(matrix.get(i, i).abs()));
        let sym_tol = T::floor_tol(1e-10) * scale.max(T::one());
        for j in 0..n {
            for i in 0..j {
                if (matrix.get(i, j) - matrix.get(j, i)).abs() > sym_tol {
                    return Err(Error::InvalidDataset("covariance is not symmetric".into()));
                }
            }
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = matrix.get(j, j);
            for k in 0..j {
                d = d - l.get(j, k) * l.get(j, k);
            }
            if !(d > T::floor_tol(1e-14) * scale) {
                return Err(Error::InvalidDataset("covariance is not positive definite".into()));
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in (j + 1)..n {
                let mut s = matrix.get(i, j);
                for k in 0..j {
                    s = s - l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(Covariance::Dense { matrix, chol: l })
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Isotropic { n, .. } => *n,
            Covariance::Dense { matrix, .. } => matrix.nrows(),
        }
    }

    /// `Sigma v`
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        match self {
            Covariance::Isotropic { sigma2, .. } => v.iter().map(|&x| x * *sigma2).collect(),
            Covariance::Dense { matrix, .. } => matrix.mul_vec(v),
        }
    }

    /// `v^T Sigma v`
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.apply(v))
    }

    /// `L^{-1} v` where `Sigma = L L^T`, so that `|L^{-1} v|^2 = v^T Sigma^{-1} v`.
    pub fn whiten(&self, v: &[T]) -> Vec<T> {
        match self {
            Covariance::Isotropic { sigma2, .. } => {
                let s = sigma2.sqrt();
                v.iter().map(|&x| x / s).collect()
            }
            Covariance::Dense { chol, .. } => {
                let n = v.len();
                let mut out = v.to_vec();
                for i in 0..n {
                    let mut s = out[i];
                    for k in 0..i {
                        s = s - chol.get(i, k) * out[k];
                    }
                    out[i] = s / chol.get(i, i);
                }
                out
            }
        }
    }

    /// Covariance of the sub-vector indexed by `rows`.
    pub fn restrict(&self, rows: &[usize]) -> Result<Self> {
        match self {
            Covariance::Isotropic { sigma2, .. } => Covariance::isotropic(rows.len(), *sigma2),
            Covariance::Dense { matrix, .. } => Covariance::dense(matrix.select_square(rows)),
        }
    }
}

/// Design, observed response and known noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Matrix<T>,
    y: Vec<T>,
    sigma: Covariance<T>,
    whitened_x: Matrix<T>,
}

impl<T: Real> Dataset<T> {
    /// Validates shapes and the unit-norm column convention.
    pub fn new(x: Matrix<T>, y: Vec<T>, sigma: Covariance<T>) -> Result<Self> {
        let (n, p) = (x.nrows(), x.ncols());
        if n == 0 || p == 0 {
            return Err(Error::InvalidDataset(format!("need n >= 1 and p >= 1, got n={n}, p={p}")));
        }
        if y.len() != n {
            return Err(Error::InvalidDataset(format!("response has length {}, expected {n}", y.len())));
        }
        if sigma.dim() != n {
            return Err(Error::InvalidDataset(format!("covariance is {0}x{0}, expected {n}x{n}", sigma.dim())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("response contains non-finite values".into()));
        }
        let tol = T::floor_tol(1e-8);
        for (j, nrm) in x.column_norms().into_iter().enumerate() {
            if !((nrm - T::one()).abs() <= tol) {
                return Err(Error::InvalidDataset(format!(
                    "column {} has norm {nrm}, columns must have unit length",
                    j + 1
                )));
            }
        }
        let whitened_x = whiten_columns(&x, &sigma);
        Ok(Dataset { x, y, sigma, whitened_x })
    }

    /// Normalizes the columns of `x` first, returning the dataset together
    /// with the original column norms.
    pub fn with_normalized_columns(mut x: Matrix<T>, y: Vec<T>, sigma: Covariance<T>) -> Result<(Self, Vec<T>)> {
        let norms = x.normalize_columns();
        if let Some(j) = norms.iter().position(|&v| !(v > T::zero())) {
            return Err(Error::InvalidDataset(format!("column {} is identically zero", j + 1)));
        }
        Ok((Dataset::new(x, y, sigma)?, norms))
    }

    /// Same design and covariance with a different observed response.
    pub fn with_response(&self, y: Vec<T>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::InvalidDataset("response length mismatch".into()));
        }
        Ok(Dataset { y, ..self.clone() })
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn sigma(&self) -> &Covariance<T> {
        &self.sigma
    }

    /// `L^{-1} X` for `Sigma = L L^T`.
    pub fn whitened_x(&self) -> &Matrix<T> {
        &self.whitened_x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

fn whiten_columns<T: Real>(x: &Matrix<T>, sigma: &Covariance<T>) -> Matrix<T> {
    let cols: Vec<Vec<T>> = (0..x.ncols()).map(|j| sigma.whiten(x.col(j))).collect();
    Matrix::from_columns(&cols)
}

// ---------------------------------------------------------------------------
// Selection records
// ---------------------------------------------------------------------------

/// Sorted set of 0-based feature indices. Displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FeatureSet(Vec<usize>);

impl FeatureSet {
    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        FeatureSet(idx)
    }

    pub fn empty() -> Self {
        FeatureSet(Vec::new())
    }

    /// From 1-based indices.
    pub fn from_one_based(idx: &[usize]) -> Self {
        Self::new(idx.iter().map(|&j| j - 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn with(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&j) {
            v.insert(pos, j);
        }
        FeatureSet(v)
    }

    pub fn without(&self, j: usize) -> Self {
        FeatureSet(self.0.iter().copied().filter(|&i| i != j).collect())
    }

    /// Position of feature `j` inside the sorted set.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.0.binary_search(&j).ok()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&j| j + 1).collect()
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, "}}")
    }
}

/// Sequence of feature sets visited by a stepwise procedure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct History {
    steps: Vec<FeatureSet>,
}

impl History {
    pub fn new(steps: Vec<FeatureSet>) -> Self {
        History { steps }
    }

    /// Forward history from the order in which features entered.
    pub fn from_order(order: &[usize]) -> Self {
        let mut steps = Vec::with_capacity(order.len());
        let mut cur = FeatureSet::empty();
        for &j in order {
            cur = cur.with(j);
            steps.push(cur.clone());
        }
        History { steps }
    }

    pub fn steps(&self) -> &[FeatureSet] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The final set `M_K`.
    pub fn selected(&self) -> Result<&FeatureSet> {
        self.steps.last().ok_or(Error::EmptyHistory)
    }

    /// For a forward history, the feature added at each step.
    pub fn entered(&self) -> Vec<usize> {
        let mut prev = &FeatureSet(Vec::new());
        let mut out = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            if let Some(&j) = s.0.iter().find(|&&j| !prev.contains(j)) {
                out.push(j);
            }
            prev = s;
        }
        out
    }

    /// Forward mode: each set extends the previous one by exactly one index.
    pub fn is_forward(&self) -> bool {
        let mut prev = FeatureSet::empty();
        for s in &self.steps {
            if s.len() != prev.len() + 1 || !prev.0.iter().all(|&j| s.contains(j)) {
                return false;
            }
            prev = s.clone();
        }
        true
    }

    /// Forward-backward mode: consecutive sets differ by exactly one index.
    pub fn is_single_moves(&self) -> bool {
        self.steps.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            let sym = a.0.iter().filter(|&&j| !b.contains(j)).count()
                + b.0.iter().filter(|&&j| !a.contains(j)).count();
            sym == 1
        })
    }
}

/// Entry signs of a forward path, each `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signs(pub Vec<i8>);

impl Signs {
    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// What the inference conditions on beyond the nuisance component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditioningMode {
    /// Selected set only (minimal conditioning).
    SelectedSet,
    /// Selected set and the full history.
    SelectedSetAndHistory,
    /// Selected set and entry signs.
    SelectedSetAndSigns,
    /// History and signs; the classical polytope event.
    HistoryAndSigns,
}

impl ConditioningMode {
    pub const ALL: [ConditioningMode; 4] = [
        ConditioningMode::SelectedSet,
        ConditioningMode::SelectedSetAndHistory,
        ConditioningMode::SelectedSetAndSigns,
        ConditioningMode::HistoryAndSigns,
    ];

    pub fn uses_history(self) -> bool {
        matches!(self, ConditioningMode::SelectedSetAndHistory | ConditioningMode::HistoryAndSigns)
    }

    pub fn uses_signs(self) -> bool {
        matches!(self, ConditioningMode::SelectedSetAndSigns | ConditioningMode::HistoryAndSigns)
    }

    /// Method label used in CLI flags and CSV output.
    pub fn label(self) -> &'static str {
        match self {
            ConditioningMode::SelectedSet => "homotopy",
            ConditioningMode::SelectedSetAndHistory => "homotopy-h",
            ConditioningMode::SelectedSetAndSigns => "homotopy-s",
            ConditioningMode::HistoryAndSigns => "polytope",
        }
    }
}

impl fmt::Display for ConditioningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ConditioningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homotopy" => Ok(ConditioningMode::SelectedSet),
            "homotopy-h" | "quadratic" => Ok(ConditioningMode::SelectedSetAndHistory),
            "homotopy-s" => Ok(ConditioningMode::SelectedSetAndSigns),
            "polytope" => Ok(ConditioningMode::HistoryAndSigns),
            other => Err(Error::InvalidConfig(format!("unknown conditioning mode `{other}`"))),
        }
    }
}
