//! Shared data types: the candidate matrix, sensor sets with their canonical
//! keys, objective vectors and the per-step archive.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The `n x r` sensor-candidate matrix. Row `i` describes how candidate
/// sensor `i` observes the `r` latent variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMatrix {
    entries: DMatrix<f64>,
    rows: Vec<DVector<f64>>,
}

impl CandidateMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "candidate matrix must have at least one row and one column".into(),
            ));
        }
        for col in 0..entries.ncols() {
            for row in 0..entries.nrows() {
                if !entries[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        let rows = (0..entries.nrows())
            .map(|i| entries.row(i).transpose())
            .collect();
        Ok(Self { entries, rows })
    }

    /// Builds a matrix from row slices. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let r = rows.first().map_or(0, |row| row.as_ref().len());
        if let Some(bad) = rows.iter().position(|row| row.as_ref().len() != r) {
            return Err(Error::InvalidArgument(format!(
                "row {bad} has {} columns, expected {r}",
                rows[bad].as_ref().len()
            )));
        }
        Self::new(DMatrix::from_fn(n, r, |i, j| rows[i].as_ref()[j]))
    }

    /// Number of sensor candidates.
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of latent variables.
    pub fn r(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Row `i` as a column vector.
    pub fn row(&self, i: usize) -> &DVector<f64> {
        &self.rows[i]
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n() })
        }
    }
}

/// Order-independent identity of a sensor set: the sorted indices plus a
/// precomputed hash. Equality compares the hash first and falls back to the
/// full sorted sequence, so hash collisions cannot merge distinct sets.
/// Ordering is lexicographic on the sorted indices.
#[derive(Debug, Clone)]
pub struct CanonicalKey {
    hash: u64,
    sorted: Box<[usize]>,
}

impl CanonicalKey {
    fn from_sorted(sorted: Box<[usize]>) -> Self {
        let mut hasher = DefaultHasher::new();
        sorted.hash(&mut hasher);
        Self {
            hash: hasher.finish(),
            sorted,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.sorted
    }

    pub fn hash_value(&self) -> u64 {
        self.hash
    }
}

impl PartialEq for CanonicalKey {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.sorted == other.sorted
    }
}

impl Eq for CanonicalKey {}

impl Hash for CanonicalKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl PartialOrd for CanonicalKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sorted.cmp(&other.sorted)
    }
}

/// Selected sensors in the order they were added.
#[derive(Debug, Clone)]
pub struct SensorSet {
    indices: Vec<usize>,
    key: CanonicalKey,
}

impl SensorSet {
    /// The empty set, the parent of every first-step expansion.
    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            key: CanonicalKey::from_sorted(Box::new([])),
        }
    }

    /// Validates that the indices are distinct and below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.len() > n {
            return Err(Error::TooManySensors {
                p: indices.len(),
                n,
            });
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut sorted = indices.clone().into_boxed_slice();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(Self {
            indices,
            key: CanonicalKey::from_sorted(sorted),
        })
    }

    /// A new set with `index` appended.
    pub fn with(&self, index: usize) -> Result<Self> {
        if self.contains(index) {
            return Err(Error::DuplicateIndex(index));
        }
        let mut indices = Vec::with_capacity(self.indices.len() + 1);
        indices.extend_from_slice(&self.indices);
        indices.push(index);
        let pos = self.key.sorted.partition_point(|&i| i < index);
        let mut sorted = Vec::with_capacity(indices.len());
        sorted.extend_from_slice(&self.key.sorted[..pos]);
        sorted.push(index);
        sorted.extend_from_slice(&self.key.sorted[pos..]);
        Ok(Self {
            indices,
            key: CanonicalKey::from_sorted(sorted.into_boxed_slice()),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn key(&self) -> &CanonicalKey {
        &self.key
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.key.sorted.binary_search(&index).is_ok()
    }
}

impl PartialEq for SensorSet {
    fn eq(&self, other: &Self) -> bool {
        self.indices == other.indices
    }
}

impl Eq for SensorSet {}

/// The canonical key of a sensor set.
pub fn canonicalize(set: &SensorSet) -> CanonicalKey {
    set.key.clone()
}

/// Gathers the rows of `u` named by `set`, in selection order, into the
/// `p x r` measurement matrix.
pub fn measurement_matrix(u: &CandidateMatrix, set: &SensorSet) -> Result<DMatrix<f64>> {
    for &i in set.indices() {
        u.check_index(i)?;
    }
    let rows = set.indices();
    Ok(DMatrix::from_fn(rows.len(), u.r(), |j, k| {
        u.entries()[(rows[j], k)]
    }))
}

/// D-, A- and E-optimality indices of one sensor set.
///
/// `log_det` is the natural log of the determinant of the Fisher information
/// matrix. A singular matrix is stored as `(-inf, +inf, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    pub log_det: f64,
    pub trace_inv: f64,
    pub lambda_min: f64,
}

impl ObjectiveVector {
    pub const SINGULAR: Self = Self {
        log_det: f64::NEG_INFINITY,
        trace_inv: f64::INFINITY,
        lambda_min: 0.0,
    };

    pub fn is_singular(&self) -> bool {
        self.log_det == f64::NEG_INFINITY
    }

    /// Determinant in the raw domain. Overflows to `inf` for large sets.
    pub fn det(&self) -> f64 {
        self.log_det.exp()
    }
}

/// One reserved set and its objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveMember {
    pub set: SensorSet,
    pub objectives: ObjectiveVector,
}

/// The family of sensor sets reserved at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    members: Vec<ArchiveMember>,
    step: usize,
    capacity: usize,
}

impl Archive {
    pub fn new(members: Vec<ArchiveMember>, step: usize, capacity: usize) -> Result<Self> {
        if members.is_empty() || members.len() > capacity {
            return Err(Error::InvalidArgument(format!(
                "archive must hold between 1 and {capacity} members, got {}",
                members.len()
            )));
        }
        if let Some(m) = members.iter().find(|m| m.set.len() != step) {
            return Err(Error::InvalidArgument(format!(
                "archive member has {} sensors at step {step}",
                m.set.len()
            )));
        }
        let mut keys: Vec<&CanonicalKey> = members.iter().map(|m| m.set.key()).collect();
        keys.sort();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "archive holds the set {:?} twice",
                w[0].indices()
            )));
        }
        Ok(Self {
            members,
            step,
            capacity,
        })
    }

    pub fn members(&self) -> &[ArchiveMember] {
        &self.members
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
