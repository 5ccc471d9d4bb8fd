//! Dense complex linear algebra over multipartite tensor-product layouts:
//! pure states, density matrices, partial trace/transpose, trace norm,
//! Schmidt coefficients and party coarse-graining.
//!
//! All operations are pure functions on immutable values. Tolerances follow
//! a reject-don't-repair policy: inputs outside tolerance are errors.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::layout::{PartitionMap, SubsystemLayout};
use crate::{real, to_f64, Scalar};

/// Entrywise Hermiticity tolerance for density-matrix construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as "positive semidefinite".
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Trace-one tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Squared-norm tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity tolerance for spectral inputs (trace norm, eigendecomposition).
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;
/// Squared Schmidt coefficients below this are treated as exact zeros.
pub const SCHMIDT_FLOOR: f64 = 1e-12;

/// Max entrywise deviation of `m` from its own adjoint.
pub fn hermiticity_deviation<T: Scalar>(m: &DMatrix<Complex<T>>) -> T {
    let mut dev = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conjugate()).modulus();
            if d > dev {
                dev = d;
            }
        }
    }
    dev
}

/// Max entrywise modulus of the difference of two matrices.
pub fn max_entry_diff<T: Scalar>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> T {
    let mut dev = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        let d = (*x - *y).modulus();
        if d > dev {
            dev = d;
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues sorted descending together with the matching
/// orthonormal eigenvectors as matrix columns.
pub fn eigendecompose_hermitian<T: Scalar>(
    h: &DMatrix<Complex<T>>,
) -> Result<(Vec<T>, DMatrix<Complex<T>>)> {
    let dev = hermiticity_deviation(h);
    if dev > real(HERMITIAN_INPUT_TOL) {
        return Err(Error::NotHermitian(to_f64(dev)));
    }
    // the machine-epsilon convergence threshold of SymmetricEigen can
    // diverge (non-finite eigenvalues) on large matrices with clustered
    // spectra; retry with looser relative thresholds, then with a diagonal
    // shift (eigenvectors are shift-invariant, eigenvalues shift back)
    let mut eig = None;
    let mut shift = T::zero();
    'outer: for s in [0.0, 1.0] {
        let shifted = if s == 0.0 {
            h.clone()
        } else {
            let mut m = h.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += Complex::from_real(real::<T>(s));
            }
            m
        };
        for mult in [1.0, 250.0, 4000.0] {
            let eps = real::<T>(mult) * T::default_epsilon();
            if let Some(e) = SymmetricEigen::try_new(shifted.clone(), eps, 0) {
                if e.eigenvalues.iter().all(|v| to_f64(*v).is_finite()) {
                    eig = Some(e);
                    shift = real(s);
                    break 'outer;
                }
            }
        }
    }
    let eig = eig.ok_or(Error::EigenConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i] - shift).collect();
    let vectors = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Trace norm of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm<T: Scalar>(h: &DMatrix<Complex<T>>) -> Result<T> {
    let (values, _) = eigendecompose_hermitian(h)?;
    Ok(values.into_iter().fold(T::zero(), |acc, v| acc + v.abs()))
}

/// A normalized pure state over a multipartite layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Scalar> {
    layout: SubsystemLayout,
    amps: DVector<Complex<T>>,
}

impl<T: Scalar> PureState<T> {
    /// Builds a state, checking length and normalization (`NORM_TOL`).
    pub fn new(layout: SubsystemLayout, amps: DVector<Complex<T>>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: amps.len(),
            });
        }
        let norm_sq: T = amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.modulus_squared());
        let dev = (norm_sq - T::one()).abs();
        if dev > real(NORM_TOL) {
            return Err(Error::NotNormalized(to_f64(dev)));
        }
        Ok(Self { layout, amps })
    }

    /// The computational basis state with the given index.
    pub fn basis_state(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let mut amps = DVector::zeros(layout.total_dim());
        amps[index] = Complex::from_real(T::one());
        Self::new(layout, amps)
    }

    /// The all-zero product state `|0…0⟩`.
    pub fn vacuum(layout: SubsystemLayout) -> Result<Self> {
        Self::basis_state(layout, 0)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex<T> {
        self.amps[index]
    }

    /// The rank-one projector `|ψ⟩⟨ψ|` as a raw matrix.
    pub fn projector(&self) -> DMatrix<Complex<T>> {
        let n = self.amps.len();
        DMatrix::from_fn(n, n, |i, j| self.amps[i] * self.amps[j].conjugate())
    }

    /// Regroups parties according to `pmap`; a pure index permutation.
    pub fn merge_parties(&self, pmap: &PartitionMap) -> Result<Self> {
        let (new_layout, map) = regroup_indices(&self.layout, pmap)?;
        let mut amps = DVector::zeros(new_layout.total_dim());
        for (old, &new) in map.iter().enumerate() {
            amps[new] = self.amps[old];
        }
        Self::new(new_layout, amps)
    }

    /// Embeds every party into a (possibly) larger local dimension,
    /// keeping basis labels.
    pub fn embed(&self, dims: &[usize]) -> Result<Self> {
        if dims.len() != self.layout.n_parties()
            || dims
                .iter()
                .zip(self.layout.dims())
                .any(|(&new, &old)| new < old)
        {
            return Err(Error::InvalidEmbedding);
        }
        let new_layout = SubsystemLayout::new(dims.to_vec())?;
        let mut amps = DVector::zeros(new_layout.total_dim());
        for idx in 0..self.layout.total_dim() {
            let digits = self.layout.decode(idx);
            amps[new_layout.encode(&digits)] = self.amps[idx];
        }
        Self::new(new_layout, amps)
    }

    /// Overlap `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(Complex::from_real(T::zero()), |acc, (a, b)| {
                acc + a.conjugate() * *b
            })
    }
}

/// Marginal `tr_{complement}(|ψ⟩⟨ψ|)` on the (sorted) kept parties,
/// as a raw matrix. Internal fast path that skips density-matrix validation.
pub(crate) fn pure_marginal<T: Scalar>(
    psi: &PureState<T>,
    keep_sorted: &[usize],
) -> DMatrix<Complex<T>> {
    let layout = psi.layout();
    let traced = layout.complement(keep_sorted);
    let keep_layout = layout.sub_layout(keep_sorted).expect("valid sub-layout");
    let dk = keep_layout.total_dim();
    let keep_offsets = subset_offsets(layout, keep_sorted);
    let traced_offsets = if traced.is_empty() {
        vec![0usize]
    } else {
        subset_offsets(layout, &traced)
    };
    let mut out = DMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = Complex::from_real(T::zero());
            for &e in &traced_offsets {
                acc += psi.amps[keep_offsets[a] + e] * psi.amps[keep_offsets[b] + e].conjugate();
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Full-index offsets contributed by every multi-index of `parties`
/// (sorted), enumerated in the parties' own mixed-radix order.
fn subset_offsets(layout: &SubsystemLayout, parties: &[usize]) -> Vec<usize> {
    let sub = layout.sub_layout(parties).expect("valid sub-layout");
    (0..sub.total_dim())
        .map(|idx| {
            sub.decode(idx)
                .iter()
                .zip(parties)
                .map(|(&digit, &party)| digit * layout.stride(party))
                .sum()
        })
        .collect()
}

/// Schmidt coefficients of `psi` across `cut | complement`, descending.
///
/// Squared coefficients below [`SCHMIDT_FLOOR`] are dropped, so product
/// states report a single coefficient 1.
pub fn schmidt_coefficients<T: Scalar>(psi: &PureState<T>, cut: &[usize]) -> Result<Vec<T>> {
    let cut = psi.layout().checked_proper_subset(cut)?;
    let marginal = pure_marginal(psi, &cut);
    let (values, _) = eigendecompose_hermitian(&marginal)?;
    Ok(values
        .into_iter()
        .filter(|&v| v > real(SCHMIDT_FLOOR))
        .map(|v| v.sqrt())
        .collect())
}

/// A validated density matrix over a multipartite layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    layout: SubsystemLayout,
    mat: DMatrix<Complex<T>>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Builds a density matrix, rejecting inputs that are not Hermitian
    /// (`HERMITICITY_TOL` entrywise), not trace one (`TRACE_TOL`) or not
    /// positive semidefinite (`EIGENVALUE_FLOOR`).
    pub fn new(layout: SubsystemLayout, mat: DMatrix<Complex<T>>) -> Result<Self> {
        if mat.nrows() != layout.total_dim() || mat.ncols() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: mat.nrows(),
            });
        }
        let herm = hermiticity_deviation(&mat);
        if herm > real(HERMITICITY_TOL) {
            return Err(Error::NotHermitian(to_f64(herm)));
        }
        let trace_dev = (mat.trace().real() - T::one()).abs();
        if trace_dev > real(TRACE_TOL) {
            return Err(Error::TraceNotOne(to_f64(trace_dev)));
        }
        let (values, _) = eigendecompose_hermitian(&mat)?;
        let min = values
            .iter()
            .fold(T::zero(), |acc, &v| if v < acc { v } else { acc });
        if min < real(EIGENVALUE_FLOOR) {
            return Err(Error::NotPositiveSemidefinite(to_f64(min)));
        }
        Ok(Self { layout, mat })
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self {
            layout: psi.layout().clone(),
            mat: psi.projector(),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.mat
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: T) -> usize {
        let eig = SymmetricEigen::new(self.mat.clone());
        eig.eigenvalues.iter().filter(|&&v| v > tol).count()
    }

    /// Traces out the complement of `keep`; the returned layout is the kept
    /// parties in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.layout.checked_subset(keep)?;
        if keep.len() == self.layout.n_parties() {
            return Ok(self.clone());
        }
        let traced = self.layout.complement(&keep);
        let keep_layout = self.layout.sub_layout(&keep)?;
        let dk = keep_layout.total_dim();
        let keep_offsets = subset_offsets(&self.layout, &keep);
        let traced_offsets = subset_offsets(&self.layout, &traced);
        let mut out = DMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = Complex::from_real(T::zero());
                for &e in &traced_offsets {
                    acc += self.mat[(keep_offsets[a] + e, keep_offsets[b] + e)];
                }
                out[(a, b)] = acc;
            }
        }
        Self::new(keep_layout, out)
    }

    /// Partial transposition over `subset` (a non-empty proper subset).
    ///
    /// The result is Hermitian with unchanged trace but generally not
    /// positive, so it is returned as a raw matrix.
    pub fn partial_transpose(&self, subset: &[usize]) -> Result<DMatrix<Complex<T>>> {
        let subset = self.layout.checked_proper_subset(subset)?;
        let d = self.layout.total_dim();
        let mut out = DMatrix::zeros(d, d);
        for r in 0..d {
            let mut dr = self.layout.decode(r);
            for c in 0..d {
                let mut dc = self.layout.decode(c);
                for &p in &subset {
                    let tmp = dr[p];
                    dr[p] = dc[p];
                    dc[p] = tmp;
                }
                out[(r, c)] = self.mat[(self.layout.encode(&dr), self.layout.encode(&dc))];
                // restore the row digits for the next column
                for &p in &subset {
                    let tmp = dr[p];
                    dr[p] = dc[p];
                    dc[p] = tmp;
                }
            }
        }
        Ok(out)
    }

    /// Regroups parties according to `pmap`; a pure index permutation.
    pub fn merge_parties(&self, pmap: &PartitionMap) -> Result<Self> {
        let (new_layout, map) = regroup_indices(&self.layout, pmap)?;
        let d = new_layout.total_dim();
        let mut out = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(map[r], map[c])] = self.mat[(r, c)];
            }
        }
        Self::new(new_layout, out)
    }
}

/// Coarse layout and old-index → new-index permutation for a partition.
fn regroup_indices(
    layout: &SubsystemLayout,
    pmap: &PartitionMap,
) -> Result<(SubsystemLayout, Vec<usize>)> {
    if pmap.n_parties() != layout.n_parties() {
        return Err(Error::InvalidPartition);
    }
    let group_dims: Vec<usize> = pmap
        .groups()
        .iter()
        .map(|g| g.iter().map(|&i| layout.dim(i)).product())
        .collect();
    let new_layout = SubsystemLayout::new(group_dims)?;
    let group_layouts: Vec<SubsystemLayout> = pmap
        .groups()
        .iter()
        .map(|g| layout.sub_layout(g))
        .collect::<Result<_>>()?;
    let mut map = Vec::with_capacity(layout.total_dim());
    for idx in 0..layout.total_dim() {
        let digits = layout.decode(idx);
        let new_digits: Vec<usize> = pmap
            .groups()
            .iter()
            .zip(&group_layouts)
            .map(|(g, gl)| {
                let gd: Vec<usize> = g.iter().map(|&i| digits[i]).collect();
                gl.encode(&gd)
            })
            .collect();
        map.push(new_layout.encode(&new_digits));
    }
    Ok((new_layout, map))
}
