//! Dense linear-algebra helpers built on nalgebra's SVD.
//!
//! Every subspace is returned as a matrix whose columns form an orthonormal
//! basis. Numerical rank uses the cutoff `max(m, n) * eps * s`, where `s` is
//! the largest singular value or, for the `_ref` variants, the larger of that
//! and a reference scale of the data the matrix was built from. Rank
//! decisions are refused when the last kept and first dropped singular values
//! are within `ambiguity_ratio` of each other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy {
    /// Relative cutoff factor; `None` means `max(m, n) * f64::EPSILON`.
    pub relative: Option<f64>,
    /// Minimum gap ratio between the kept and the dropped singular values.
    pub ambiguity_ratio: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy {
            relative: None,
            ambiguity_ratio: 10.0,
        }
    }
}

impl RankPolicy {
    pub fn cutoff(&self, nrows: usize, ncols: usize, sigma_max: f64) -> f64 {
        let rel = self
            .relative
            .unwrap_or(nrows.max(ncols) as f64 * f64::EPSILON);
        rel * sigma_max
    }
}

/// SVD with a decided numerical rank and a full set of right singular vectors.
#[derive(Debug, Clone)]
pub struct RankedSvd {
    /// Left singular vectors spanning the column space (`nrows x rank`).
    pub range: DMatrix<f64>,
    /// All right singular vectors (`ncols x ncols`), ordered by singular value.
    pub v: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub cutoff: f64,
}

impl RankedSvd {
    pub fn kernel(&self) -> DMatrix<f64> {
        let n = self.v.nrows();
        self.v.columns(self.rank, n - self.rank).into_owned()
    }

    pub fn coimage(&self) -> DMatrix<f64> {
        self.v.columns(0, self.rank).into_owned()
    }
}

fn check_finite(m: &DMatrix<f64>, context: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}

pub fn ranked_svd(m: &DMatrix<f64>, policy: &RankPolicy, context: &str) -> Result<RankedSvd> {
    ranked_svd_ref(m, policy, 0.0, context)
}

/// As [`ranked_svd`], with the cutoff measured against `max(sigma_max, reference)`.
/// Products of exact data whose true value vanishes then come out with rank zero.
pub fn ranked_svd_ref(m: &DMatrix<f64>, policy: &RankPolicy, reference: f64, context: &str) -> Result<RankedSvd> {
    check_finite(m, context)?;
    let (nr, nc) = m.shape();
    if nr == 0 || nc == 0 {
        return Ok(RankedSvd {
            range: DMatrix::zeros(nr, 0),
            v: DMatrix::identity(nc, nc),
            singular_values: Vec::new(),
            rank: 0,
            cutoff: 0.0,
        });
    }
    // Padding with zero rows makes the decomposition return all of V.
    let work = if nr < nc {
        let mut p = DMatrix::zeros(nc, nc);
        p.view_mut((0, 0), (nr, nc)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::input(format!("{context}: SVD failed")))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let cutoff = policy.cutoff(nr, nc, sigma_max.max(reference));
    let rank = sv.iter().take(nr.min(nc)).filter(|&&s| s > cutoff).count();
    if rank > 0 && rank < sv.len() {
        let above = sv[rank - 1];
        let below = sv[rank];
        if below > 0.0 && above < policy.ambiguity_ratio * below {
            return Err(Error::DegenerateRank {
                context: context.to_string(),
                cutoff,
                above,
                below,
            });
        }
    }
    // nalgebra's U can lose accuracy next to a near-zero singular value while V
    // stays accurate, so the range is rebuilt as m V Σ⁻¹ and re-orthonormalised.
    let v = v_t.transpose();
    let range = if rank == 0 {
        DMatrix::zeros(nr, 0)
    } else {
        let mut r = m * v.columns(0, rank);
        for (j, mut c) in r.column_iter_mut().enumerate() {
            c /= sv[j];
        }
        r.qr().q()
    };
    Ok(RankedSvd {
        range,
        v,
        singular_values: sv,
        rank,
        cutoff,
    })
}

pub fn rank(m: &DMatrix<f64>, policy: &RankPolicy, context: &str) -> Result<usize> {
    Ok(ranked_svd(m, policy, context)?.rank)
}

/// Orthonormal basis of `ker m`.
pub fn kernel(m: &DMatrix<f64>, policy: &RankPolicy, context: &str) -> Result<DMatrix<f64>> {
    Ok(ranked_svd(m, policy, context)?.kernel())
}

pub fn kernel_ref(m: &DMatrix<f64>, policy: &RankPolicy, reference: f64, context: &str) -> Result<DMatrix<f64>> {
    Ok(ranked_svd_ref(m, policy, reference, context)?.kernel())
}

pub fn image_ref(m: &DMatrix<f64>, policy: &RankPolicy, reference: f64, context: &str) -> Result<DMatrix<f64>> {
    Ok(ranked_svd_ref(m, policy, reference, context)?.range)
}

/// Orthonormal basis of the column space of `m`.
pub fn image(m: &DMatrix<f64>, policy: &RankPolicy, context: &str) -> Result<DMatrix<f64>> {
    Ok(ranked_svd(m, policy, context)?.range)
}

/// Orthonormal basis of the Euclidean complement of `span(basis)` in `R^n`.
pub fn complement(basis: &DMatrix<f64>, policy: &RankPolicy, context: &str) -> Result<DMatrix<f64>> {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    kernel(&basis.transpose(), policy, context)
}

/// Principal-angle sines below this are treated as zero.
pub const INTERSECTION_SINE: f64 = 1e-9;
const INTERSECTION_BAND: (f64, f64) = (1e-11, 1e-7);

/// Orthonormal basis of `span(a) ∩ span(b)`; both inputs must be orthonormal.
/// Directions of `a` whose principal-angle sine to `b` is below
/// [`INTERSECTION_SINE`] are kept; a sine inside `[1e-11, 1e-7]` is reported as
/// an ambiguous rank.
pub fn intersection(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    _policy: &RankPolicy,
    context: &str,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    check_finite(a, context)?;
    check_finite(b, context)?;
    let residual = a - b * (b.transpose() * a);
    let k = a.ncols();
    let work = if residual.nrows() < k {
        let mut p = DMatrix::zeros(k, k);
        p.view_mut((0, 0), residual.shape()).copy_from(&residual);
        p
    } else {
        residual
    };
    let svd = work.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::input(format!("{context}: SVD failed")))?;
    let mut keep = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate().take(k) {
        if *s > INTERSECTION_BAND.0 && *s < INTERSECTION_BAND.1 {
            return Err(Error::DegenerateRank {
                context: context.to_string(),
                cutoff: INTERSECTION_SINE,
                above: *s,
                below: *s,
            });
        }
        if *s < INTERSECTION_SINE {
            keep.push(v_t.row(i).transpose());
        }
    }
    if keep.is_empty() {
        return Ok(DMatrix::zeros(n, 0));
    }
    let coeffs = columns_of(&keep, k);
    let raw = a * coeffs;
    // re-orthonormalise; the columns are already orthonormal up to rounding
    let q = raw.clone().qr().q();
    Ok(q.columns(0, raw.ncols()).into_owned())
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases. Subspaces of different dimension are at distance 1.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let ra = a - b * (b.transpose() * a);
    let rb = b - a * (a.transpose() * b);
    spectral_norm(&ra).max(spectral_norm(&rb)).min(1.0)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Horizontal concatenation of column blocks with a common row count.
pub fn hstack(blocks: &[DMatrix<f64>], nrows: usize) -> DMatrix<f64> {
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (nrows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation of row blocks with a common column count.
pub fn vstack(blocks: &[DMatrix<f64>], ncols: usize) -> DMatrix<f64> {
    let nrows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), ncols)).copy_from(b);
        r += b.nrows();
    }
    out
}

pub fn columns_of(vectors: &[DVector<f64>], nrows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(nrows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let nr: usize = blocks.iter().map(|b| b.nrows()).sum();
    let nc: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(nr, nc);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Common kernel of `linear` maps and of `elements - I`: the vectors fixed by
/// an algebra (through its generators) and by a set of group elements.
///
/// `reference` is the scale of the data behind `linear` (for instance the norm
/// of the generators before projection); group elements contribute scale 1.
pub fn fixed_subspace(
    dim: usize,
    linear: &[DMatrix<f64>],
    elements: &[DMatrix<f64>],
    reference: f64,
    policy: &RankPolicy,
    context: &str,
) -> Result<DMatrix<f64>> {
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut rows: Vec<DMatrix<f64>> = linear.to_vec();
    rows.extend(elements.iter().map(|e| e - &id));
    if rows.is_empty() {
        return Ok(id);
    }
    let reference = if elements.is_empty() { reference } else { reference.max(1.0) };
    kernel_ref(&vstack(&rows, dim), policy, reference, context)
}

/// Frobenius norm of a family of matrices, used as a reference scale.
pub fn family_scale(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| m.norm()).fold(0.0, f64::max)
}

/// Moore-Penrose pseudo-inverse with the default rank policy.
pub fn pinv(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (nr, nc) = m.shape();
    if nr == 0 || nc == 0 {
        return Ok(DMatrix::zeros(nc, nr));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = nr.max(nc) as f64 * f64::EPSILON * smax;
    svd.pseudo_inverse(tol)
        .map_err(|e| Error::input(format!("pseudo-inverse failed: {e}")))
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn is_skew(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && max_abs(&(m + m.transpose())) <= tol
}

/// Matrix exponential (nalgebra's scaling-and-squaring Padé implementation).
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> RankPolicy {
        RankPolicy::default()
    }

    #[test]
    fn rank_of_diag() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 0.0]));
        assert_eq!(rank(&m, &p(), "t").unwrap(), 2);
    }

    #[test]
    fn ambiguous_rank_is_reported() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-15, 4e-16]));
        let err = rank(&m, &p(), "t").unwrap_err();
        assert!(err.is_degenerate());
    }

    #[test]
    fn wide_matrix_kernel_is_complete() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = kernel(&m, &p(), "t").unwrap();
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-14);
    }

    #[test]
    fn intersection_of_planes() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let i = intersection(&a, &b, &p(), "t").unwrap();
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distance_between_equal_spans() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = DMatrix::from_column_slice(2, 1, &[-1.0, 0.0]);
        assert!(subspace_distance(&a, &b) < 1e-15);
        let c = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!((subspace_distance(&a, &c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs() {
        let m = DMatrix::<f64>::zeros(0, 3);
        assert_eq!(kernel(&m, &p(), "t").unwrap().ncols(), 3);
        let m = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(image(&m, &p(), "t").unwrap().ncols(), 0);
    }
}
