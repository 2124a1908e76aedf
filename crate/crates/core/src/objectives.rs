//! D-, A- and E-optimality of a sensor set.
//!
//! The Fisher information matrix of a measurement matrix `C` (`p x r`) is
//! `C C^T` while `p <= r` and `C^T C` once `p > r`; both forms share their
//! nonzero spectrum, so the indices agree at `p = r`.
//!
//! [`AugmentBase`] prepares a set for one-sensor extensions. While the set
//! is smaller than `r` the Gram matrix grows by a bordering row/column and its
//! Schur complement gives the new determinant and inverse trace. From `r`
//! sensors on, `C^T C` changes by a rank-one term and the determinant lemma
//! plus the Sherman-Morrison identity apply. The minimum eigenvalue is always
//! recomputed with a full symmetric eigensolve.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::model::{measurement_matrix, CandidateMatrix, ObjectiveVector, SensorSet};

/// Relative eigenvalue floor below which an information matrix is treated as
/// singular: `lambda_min < SINGULAR_RTOL * max(1, lambda_max)`.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Which product forms the information matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `C C^T`, used while `p <= r`.
    Gram,
    /// `C^T C`, used once `p > r`.
    Information,
}

impl Regime {
    pub fn for_size(p: usize, r: usize) -> Self {
        if p <= r {
            Regime::Gram
        } else {
            Regime::Information
        }
    }
}

/// An information matrix with its Cholesky factor and derived indices.
#[derive(Debug, Clone)]
pub struct FimState {
    fim: DMatrix<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
    regime: Regime,
    p: usize,
    objectives: ObjectiveVector,
}

impl FimState {
    fn from_fim(fim: DMatrix<f64>, regime: Regime, p: usize) -> Self {
        let (objectives, factor) = summarize(&fim);
        Self {
            fim,
            factor,
            regime,
            p,
            objectives,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.fim
    }

    /// `None` when the matrix is singular.
    pub fn factor(&self) -> Option<&Cholesky<f64, Dyn>> {
        self.factor.as_ref()
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Number of sensors behind this matrix.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn objectives(&self) -> ObjectiveVector {
        self.objectives
    }
}

/// Builds the information matrix of measurement matrix `c` with `r` columns.
pub fn fim(c: &DMatrix<f64>, r: usize) -> Result<FimState> {
    fim_in(c, r, Regime::for_size(c.nrows(), r))
}

/// Like [`fim`] but with the product form forced. Either form is valid at
/// `p = r`; elsewhere the other form is rank deficient.
pub fn fim_in(c: &DMatrix<f64>, r: usize, regime: Regime) -> Result<FimState> {
    let p = c.nrows();
    if p == 0 {
        return Err(Error::InvalidArgument(
            "measurement matrix has no rows".into(),
        ));
    }
    if c.ncols() != r {
        return Err(Error::InvalidArgument(format!(
            "measurement matrix has {} columns, expected {r}",
            c.ncols()
        )));
    }
    for col in 0..r {
        for row in 0..p {
            if !c[(row, col)].is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
    }
    let mut m = match regime {
        Regime::Gram => c * c.transpose(),
        Regime::Information => c.transpose() * c,
    };
    symmetrize(&mut m);
    Ok(FimState::from_fim(m, regime, p))
}

/// Natural log of `det(FIM)`; `-inf` when singular.
pub fn eval_d(state: &FimState) -> f64 {
    state.objectives.log_det
}

/// `tr(FIM^-1)`; `+inf` when singular.
pub fn eval_a(state: &FimState) -> f64 {
    state.objectives.trace_inv
}

/// Smallest eigenvalue of the FIM, clamped at zero.
pub fn eval_e(state: &FimState) -> f64 {
    state.objectives.lambda_min
}

/// All three indices of `set`, computed from scratch.
pub fn eval_all(u: &CandidateMatrix, set: &SensorSet) -> Result<ObjectiveVector> {
    let c = measurement_matrix(u, set)?;
    Ok(fim(&c, u.r())?.objectives())
}

/// Indices of `base ∪ {i}` via the incremental path of `base`.
pub fn eval_augmented(base: &AugmentBase<'_>, i: usize) -> Result<ObjectiveVector> {
    base.evaluate(i)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.symmetric_eigenvalues();
    eig.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn is_singular_spectrum(lo: f64, hi: f64) -> bool {
    !(lo >= SINGULAR_RTOL * hi.max(1.0))
}

fn summarize(m: &DMatrix<f64>) -> (ObjectiveVector, Option<Cholesky<f64, Dyn>>) {
    let (lo, hi) = extreme_eigenvalues(m);
    if is_singular_spectrum(lo, hi) {
        return (ObjectiveVector::SINGULAR, None);
    }
    let Some(chol) = Cholesky::new(m.clone()) else {
        return (ObjectiveVector::SINGULAR, None);
    };
    let l = chol.l_dirty();
    let log_det = 2.0 * (0..m.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
    let trace_inv = inverse_trace(&chol);
    (
        ObjectiveVector {
            log_det,
            trace_inv,
            lambda_min: lo.max(0.0),
        },
        Some(chol),
    )
}

/// `tr(M^-1) = ||L^-1||_F^2` for `M = L L^T`.
fn inverse_trace(chol: &Cholesky<f64, Dyn>) -> f64 {
    let n = chol.l_dirty().nrows();
    let l = chol.l();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("cholesky factor has a positive diagonal");
    linv.norm_squared()
}

enum BaseKind {
    Empty,
    /// `k < r` sensors; the Gram matrix `C C^T` grows by bordering.
    Bordered {
        c: DMatrix<f64>,
        gram: DMatrix<f64>,
        l: DMatrix<f64>,
        log_det: f64,
        trace_inv: f64,
    },
    /// `k >= r` sensors; `C^T C` gets a rank-one update.
    RankOne {
        info: DMatrix<f64>,
        info_inv: DMatrix<f64>,
        log_det: f64,
        trace_inv: f64,
    },
    /// Singular base: extensions are evaluated from scratch.
    Degenerate,
}

/// A sensor set prepared for cheap evaluation of its one-sensor extensions.
pub struct AugmentBase<'a> {
    u: &'a CandidateMatrix,
    set: SensorSet,
    kind: BaseKind,
}

impl<'a> AugmentBase<'a> {
    pub fn new(u: &'a CandidateMatrix, set: SensorSet) -> Result<Self> {
        let k = set.len();
        let r = u.r();
        if k == 0 {
            return Ok(Self {
                u,
                set,
                kind: BaseKind::Empty,
            });
        }
        let c = measurement_matrix(u, &set)?;
        let kind = if k < r {
            let mut gram = &c * c.transpose();
            symmetrize(&mut gram);
            match summarize(&gram) {
                (obj, Some(chol)) => BaseKind::Bordered {
                    l: chol.l(),
                    c,
                    gram,
                    log_det: obj.log_det,
                    trace_inv: obj.trace_inv,
                },
                _ => BaseKind::Degenerate,
            }
        } else {
            let mut info = c.transpose() * &c;
            symmetrize(&mut info);
            match summarize(&info) {
                (obj, Some(chol)) => {
                    let mut info_inv = chol.inverse();
                    symmetrize(&mut info_inv);
                    BaseKind::RankOne {
                        info,
                        info_inv,
                        log_det: obj.log_det,
                        trace_inv: obj.trace_inv,
                    }
                }
                _ => BaseKind::Degenerate,
            }
        };
        Ok(Self { u, set, kind })
    }

    pub fn set(&self) -> &SensorSet {
        &self.set
    }

    /// Information matrix of the base set itself, `None` for the empty set.
    pub fn state(&self) -> Result<Option<FimState>> {
        if self.set.is_empty() {
            return Ok(None);
        }
        let c = measurement_matrix(self.u, &self.set)?;
        fim(&c, self.u.r()).map(Some)
    }

    fn check_candidate(&self, i: usize) -> Result<()> {
        self.u.check_index(i)?;
        if self.set.contains(i) {
            return Err(Error::DuplicateIndex(i));
        }
        Ok(())
    }

    fn recompute(&self, i: usize) -> Result<ObjectiveVector> {
        eval_all(self.u, &self.set.with(i)?)
    }

    /// All three indices of `base ∪ {i}`.
    pub fn evaluate(&self, i: usize) -> Result<ObjectiveVector> {
        self.check_candidate(i)?;
        let u = self.u.row(i);
        match &self.kind {
            BaseKind::Empty => Ok(single_row(u.norm_squared())),
            BaseKind::Bordered {
                c,
                gram,
                l,
                log_det,
                trace_inv,
            } => {
                let (b, cc) = border(c, u);
                let w = forward(l, &b);
                let schur = cc - w.norm_squared();
                let grown = bordered(gram, &b, cc);
                let (lo, hi) = extreme_eigenvalues(&grown);
                if is_singular_spectrum(lo, hi) || schur <= 0.0 {
                    return Ok(ObjectiveVector::SINGULAR);
                }
                let z = backward(l, &w);
                Ok(ObjectiveVector {
                    log_det: log_det + schur.ln(),
                    trace_inv: trace_inv + (1.0 + z.norm_squared()) / schur,
                    lambda_min: lo.max(0.0),
                })
            }
            BaseKind::RankOne {
                info,
                info_inv,
                log_det,
                trace_inv,
            } => {
                let v = info_inv * u;
                let s = 1.0 + u.dot(&v);
                let grown = rank_one(info, u);
                let (lo, hi) = extreme_eigenvalues(&grown);
                if is_singular_spectrum(lo, hi) {
                    return Ok(ObjectiveVector::SINGULAR);
                }
                Ok(ObjectiveVector {
                    log_det: log_det + s.ln(),
                    trace_inv: downdated_trace(*trace_inv, &v, s, || grown.clone()),
                    lambda_min: lo.max(0.0),
                })
            }
            BaseKind::Degenerate => self.recompute(i),
        }
    }

    /// `log det` of `base ∪ {i}` without an eigensolve.
    pub fn log_det(&self, i: usize) -> Result<f64> {
        self.check_candidate(i)?;
        let u = self.u.row(i);
        Ok(match &self.kind {
            BaseKind::Empty => single_row(u.norm_squared()).log_det,
            BaseKind::Bordered { c, l, log_det, .. } => {
                let (b, cc) = border(c, u);
                let schur = cc - forward(l, &b).norm_squared();
                if schur_is_singular(schur, cc) {
                    f64::NEG_INFINITY
                } else {
                    log_det + schur.ln()
                }
            }
            BaseKind::RankOne {
                info_inv, log_det, ..
            } => log_det + (1.0 + u.dot(&(info_inv * u))).ln(),
            BaseKind::Degenerate => self.recompute(i)?.log_det,
        })
    }

    /// `tr(FIM^-1)` of `base ∪ {i}` without an eigensolve.
    pub fn trace_inv(&self, i: usize) -> Result<f64> {
        self.check_candidate(i)?;
        let u = self.u.row(i);
        Ok(match &self.kind {
            BaseKind::Empty => single_row(u.norm_squared()).trace_inv,
            BaseKind::Bordered {
                c, l, trace_inv, ..
            } => {
                let (b, cc) = border(c, u);
                let w = forward(l, &b);
                let schur = cc - w.norm_squared();
                if schur_is_singular(schur, cc) {
                    f64::INFINITY
                } else {
                    trace_inv + (1.0 + backward(l, &w).norm_squared()) / schur
                }
            }
            BaseKind::RankOne {
                info,
                info_inv,
                trace_inv,
                ..
            } => {
                let v = info_inv * u;
                let s = 1.0 + u.dot(&v);
                downdated_trace(*trace_inv, &v, s, || rank_one(info, u))
            }
            BaseKind::Degenerate => self.recompute(i)?.trace_inv,
        })
    }

    /// Minimum eigenvalue of the FIM of `base ∪ {i}`.
    pub fn lambda_min(&self, i: usize) -> Result<f64> {
        self.check_candidate(i)?;
        let u = self.u.row(i);
        let m = match &self.kind {
            BaseKind::Empty => return Ok(single_row(u.norm_squared()).lambda_min),
            BaseKind::Bordered { c, gram, .. } => {
                let (b, cc) = border(c, u);
                bordered(gram, &b, cc)
            }
            BaseKind::RankOne { info, .. } => rank_one(info, u),
            BaseKind::Degenerate => return Ok(self.recompute(i)?.lambda_min),
        };
        let (lo, hi) = extreme_eigenvalues(&m);
        Ok(if is_singular_spectrum(lo, hi) {
            0.0
        } else {
            lo.max(0.0)
        })
    }
}

fn single_row(norm_sq: f64) -> ObjectiveVector {
    if is_singular_spectrum(norm_sq, norm_sq) {
        ObjectiveVector::SINGULAR
    } else {
        ObjectiveVector {
            log_det: norm_sq.ln(),
            trace_inv: 1.0 / norm_sq,
            lambda_min: norm_sq,
        }
    }
}

// Same relative floor as the eigenvalue test, applied to the Schur
// complement against the new diagonal entry.
fn schur_is_singular(schur: f64, diag: f64) -> bool {
    !(schur >= SINGULAR_RTOL * diag.max(1.0))
}

fn border(c: &DMatrix<f64>, u: &DVector<f64>) -> (DVector<f64>, f64) {
    (c * u, u.norm_squared())
}

fn forward(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b)
        .expect("cholesky factor has a positive diagonal")
}

fn backward(l: &DMatrix<f64>, w: &DVector<f64>) -> DVector<f64> {
    l.tr_solve_lower_triangular(w)
        .expect("cholesky factor has a positive diagonal")
}

fn bordered(gram: &DMatrix<f64>, b: &DVector<f64>, corner: f64) -> DMatrix<f64> {
    let k = gram.nrows();
    let mut m = gram.clone().resize(k + 1, k + 1, 0.0);
    for j in 0..k {
        m[(k, j)] = b[j];
        m[(j, k)] = b[j];
    }
    m[(k, k)] = corner;
    m
}

/// Sherman-Morrison trace, refactored from scratch when the subtraction
/// cancels more than four digits of an ill-conditioned base.
fn downdated_trace(
    trace_inv: f64,
    v: &DVector<f64>,
    s: f64,
    grown: impl FnOnce() -> DMatrix<f64>,
) -> f64 {
    let t = trace_inv - v.norm_squared() / s;
    if t > 1e-4 * trace_inv {
        return t;
    }
    match Cholesky::new(grown()) {
        Some(chol) => inverse_trace(&chol),
        None => f64::INFINITY,
    }
}

fn rank_one(info: &DMatrix<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let mut m = info.clone();
    m.ger(1.0, u, u, 1.0);
    m
}
