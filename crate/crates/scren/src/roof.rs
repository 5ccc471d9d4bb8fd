//! Convex-roof extension engine: unitary ensemble parameterization and
//! multi-start derivative-free minimization of decomposition-averaged
//! square-root measures.
//!
//! Every pure-state decomposition of a density matrix arises from a
//! unitary mixing of the eigen-ensemble padded with zero vectors, so the
//! roof is minimized over `r×r` unitaries generated as exponentials of
//! anti-Hermitian matrices assembled from `r²` real parameters. The search
//! is a multi-start Nelder-Mead simplex; the result is an upper bound on
//! the true convex roof, exact for decomposition-independent states.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose_hermitian, max_entry_diff, DensityMatrix, PureState};
use crate::measures::{scren_pure, MeasureValue, Method};
use crate::{real, to_f64, Scalar};

/// Eigenvalues below this are dropped from the eigen-ensemble; doubles as
/// the rank tolerance.
pub const EIGEN_WEIGHT_FLOOR: f64 = 1e-12;
/// Ensemble members with squared norm below this are dropped.
pub const MEMBER_WEIGHT_FLOOR: f64 = 1e-14;
/// Pure-measure values in `[VIOLATION_FLOOR, 0)` clamp to zero; values
/// below it are propagated as a violation signal, never silently clamped.
pub const VIOLATION_FLOOR: f64 = -1e-6;
/// Unitarity tolerance for externally supplied mixing matrices.
pub const UNITARY_TOL: f64 = 1e-10;

/// A weighted pure-state ensemble representing a density matrix.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Scalar> {
    members: Vec<(T, PureState<T>)>,
}

impl<T: Scalar> Decomposition<T> {
    pub fn members(&self) -> &[(T, PureState<T>)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weight_sum(&self) -> T {
        self.members
            .iter()
            .fold(T::zero(), |acc, (w, _)| acc + *w)
    }

    /// `Σ_h w_h |ψ_h⟩⟨ψ_h|` as a raw matrix.
    pub fn reconstruction(&self) -> DMatrix<Complex<T>> {
        let dim = self.members[0].1.amplitudes().len();
        let mut out = DMatrix::zeros(dim, dim);
        for (w, psi) in &self.members {
            let amps = psi.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += amps[i] * amps[j].conjugate() * Complex::from_real(*w);
                }
            }
        }
        out
    }
}

/// How the ensemble size `r` is chosen relative to the state rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankPolicy {
    /// A fixed absolute ensemble size.
    Fixed(usize),
    /// `rank + offset`.
    Offset(usize),
    /// Sweep `rank`, `rank + 1`, `rank + 2` and keep the best.
    Sweep,
}

/// Options for [`minimize_roof`].
#[derive(Debug, Clone)]
pub struct RoofOpts<T: Scalar> {
    pub rank_policy: RankPolicy,
    pub starts: usize,
    pub tol: T,
    /// Objective-evaluation budget per start.
    pub max_iter: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for RoofOpts<T> {
    fn default() -> Self {
        Self {
            rank_policy: RankPolicy::Sweep,
            starts: 8,
            tol: real(1e-7),
            max_iter: 2000,
            seed: 0,
        }
    }
}

/// Outcome of a convex-roof minimization.
#[derive(Debug, Clone)]
pub struct RoofResult<T: Scalar> {
    /// The squared best average (the roof value).
    pub value: T,
    pub best: Decomposition<T>,
    /// Optimization runs performed (starts × swept ensemble sizes).
    pub starts: usize,
    pub converged_starts: usize,
    /// Max − min of the per-run best objectives.
    pub spread: T,
    pub evaluations: usize,
    /// Whether the best run terminated by tolerance rather than budget.
    pub converged: bool,
}

/// The canonical starting ensemble: eigenvectors weighted by eigenvalues,
/// with weights below [`EIGEN_WEIGHT_FLOOR`] dropped.
pub fn eigen_ensemble<T: Scalar>(rho: &DensityMatrix<T>) -> Result<Decomposition<T>> {
    let (values, vectors) = eigendecompose_hermitian(rho.matrix())?;
    let mut members = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        if v > real(EIGEN_WEIGHT_FLOOR) {
            let psi = PureState::new(rho.layout().clone(), vectors.column(k).into_owned())?;
            members.push((v, psi));
        }
    }
    Ok(Decomposition { members })
}

/// The ensemble obtained by mixing the (zero-padded) eigen-ensemble with
/// the unitary `u`: member `h` is the normalization of
/// `Σ_l u_{hl} √q_l |e_l⟩`. Members below [`MEMBER_WEIGHT_FLOOR`] are
/// dropped.
pub fn hjw_decomposition<T: Scalar>(
    rho: &DensityMatrix<T>,
    u: &DMatrix<Complex<T>>,
) -> Result<Decomposition<T>> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            got: u.ncols(),
        });
    }
    let gram = u.adjoint() * u;
    let dev = max_entry_diff(&gram, &DMatrix::identity(u.nrows(), u.ncols()));
    if dev > real(UNITARY_TOL) {
        return Err(Error::NotUnitary(to_f64(dev)));
    }
    let base = eigen_ensemble(rho)?;
    if u.nrows() < base.len() {
        return Err(Error::EnsembleTooSmall {
            r: u.nrows(),
            rank: base.len(),
        });
    }
    let scaled = scaled_members(&base);
    mix_ensemble(rho.layout().clone(), &scaled, u)
}

fn scaled_members<T: Scalar>(base: &Decomposition<T>) -> Vec<DVector<Complex<T>>> {
    base.members
        .iter()
        .map(|(w, psi)| psi.amplitudes() * Complex::from_real(w.sqrt()))
        .collect()
}

fn mix_ensemble<T: Scalar>(
    layout: crate::SubsystemLayout,
    scaled: &[DVector<Complex<T>>],
    u: &DMatrix<Complex<T>>,
) -> Result<Decomposition<T>> {
    let dim = scaled[0].len();
    let mut members = Vec::new();
    for h in 0..u.nrows() {
        let mut vec: DVector<Complex<T>> = DVector::zeros(dim);
        for (l, tilde) in scaled.iter().enumerate() {
            let c = u[(h, l)];
            for i in 0..dim {
                vec[i] += c * tilde[i];
            }
        }
        let w: T = vec
            .iter()
            .fold(T::zero(), |acc, a| acc + a.modulus_squared());
        if w >= real(MEMBER_WEIGHT_FLOOR) {
            let inv = Complex::from_real(T::one() / w.sqrt());
            members.push((w, PureState::new(layout.clone(), vec * inv)?));
        }
    }
    Ok(Decomposition { members })
}

/// The decomposition average `Σ_h w_h √(measure(ψ_h))`.
///
/// Measure values in `[VIOLATION_FLOOR, 0)` clamp to zero; anything lower
/// is propagated as [`Error::MeasureViolation`].
pub fn roof_objective<T, F>(dec: &Decomposition<T>, measure: &mut F) -> Result<T>
where
    T: Scalar,
    F: FnMut(&PureState<T>) -> Result<T>,
{
    let mut acc = T::zero();
    for (w, psi) in &dec.members {
        let v = measure(psi)?;
        if v < real(VIOLATION_FLOOR) {
            return Err(Error::MeasureViolation(to_f64(v)));
        }
        let v = if v < T::zero() { T::zero() } else { v };
        acc += *w * v.sqrt();
    }
    Ok(acc)
}

/// Builds an `r×r` unitary from `r²` real parameters as the exponential of
/// an anti-Hermitian matrix: the first `r` parameters are the imaginary
/// diagonal, the remaining `r(r-1)` fill the off-diagonal pairs.
pub fn unitary_from_params<T: Scalar>(theta: &[T], r: usize) -> DMatrix<Complex<T>> {
    debug_assert_eq!(theta.len(), r * r);
    // H = -iA for the anti-Hermitian A the parameters describe; exp(A) = exp(iH).
    let mut h = DMatrix::zeros(r, r);
    for k in 0..r {
        h[(k, k)] = Complex::from_real(theta[k]);
    }
    let mut idx = r;
    for k in 0..r {
        for l in (k + 1)..r {
            let x = theta[idx];
            let y = theta[idx + 1];
            idx += 2;
            h[(k, l)] = Complex::new(y, -x);
            h[(l, k)] = Complex::new(y, x);
        }
    }
    let (values, vectors) = eigendecompose_hermitian(&h).expect("H is Hermitian by construction");
    let phases = DMatrix::from_fn(r, r, |i, j| {
        if i == j {
            Complex::new(values[i].cos(), values[i].sin())
        } else {
            Complex::from_real(T::zero())
        }
    });
    &vectors * phases * vectors.adjoint()
}

/// Haar-distributed random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<T: Scalar, R: Rng>(r: usize, rng: &mut R) -> DMatrix<Complex<T>> {
    let g = DMatrix::from_fn(r, r, |_, _| {
        Complex::new(
            real::<T>(crate::states::standard_normal(rng)),
            real::<T>(crate::states::standard_normal(rng)),
        )
    });
    let qr = g.qr();
    let rmat = qr.r();
    let mut q = qr.q();
    // fix the column phases so the distribution is Haar
    for j in 0..r {
        let d = rmat[(j, j)];
        let m = d.modulus();
        if m > T::zero() {
            let phase = (d / Complex::from_real(m)).conjugate();
            for i in 0..r {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Minimizes the decomposition-averaged square-root measure over the
/// unitary ensemble manifold and returns the squared best average.
///
/// Deterministic for a fixed seed. The result is an upper bound on the
/// true convex roof; for decomposition-independent states the per-start
/// spread collapses below the tolerance.
pub fn minimize_roof<T, F>(
    rho: &DensityMatrix<T>,
    mut measure: F,
    opts: &RoofOpts<T>,
) -> Result<RoofResult<T>>
where
    T: Scalar,
    F: FnMut(&PureState<T>) -> Result<T>,
{
    let base = eigen_ensemble(rho)?;
    let rank = base.len();
    if rank == 1 {
        let value = roof_objective(&base, &mut measure)?;
        return Ok(RoofResult {
            value: value * value,
            best: base,
            starts: 0,
            converged_starts: 0,
            spread: T::zero(),
            evaluations: 1,
            converged: true,
        });
    }
    let r_values: Vec<usize> = match opts.rank_policy {
        RankPolicy::Fixed(r) => {
            if r < rank {
                return Err(Error::EnsembleTooSmall { r, rank });
            }
            vec![r]
        }
        RankPolicy::Offset(k) => vec![rank + k],
        RankPolicy::Sweep => (rank..=rank + 2).collect(),
    };
    let scaled = scaled_members(&base);
    let layout = rho.layout().clone();

    let mut total_evals = 0usize;
    let mut converged_starts = 0usize;
    let mut run_bests: Vec<T> = Vec::new();
    let mut best: Option<(T, usize, Vec<T>, bool)> = None; // (objective, r, theta, converged)

    for &r in &r_values {
        let dim = r * r;
        for start in 0..opts.starts.max(1) {
            let mut theta0 = vec![T::zero(); dim];
            if start > 0 {
                let mut rng =
                    ChaCha20Rng::seed_from_u64(mix_seed(opts.seed, (r as u64) << 32 | start as u64));
                for t in theta0.iter_mut() {
                    *t = real::<T>(rng.gen_range(-1.5..1.5));
                }
            }
            let mut f = |theta: &[T]| -> Result<T> {
                let u = unitary_from_params(theta, r);
                let dec = mix_ensemble(layout.clone(), &scaled, &u)?;
                roof_objective(&dec, &mut measure)
            };
            let outcome = nelder_mead(&mut f, theta0, real(0.5), opts.tol, opts.max_iter)?;
            total_evals += outcome.evals;
            if outcome.converged {
                converged_starts += 1;
            }
            run_bests.push(outcome.value);
            let better = match &best {
                None => true,
                Some((v, ..)) => outcome.value < *v,
            };
            if better {
                best = Some((outcome.value, r, outcome.x, outcome.converged));
            }
        }
    }

    let (value, r, theta, converged) = best.expect("at least one start ran");
    let u = unitary_from_params(&theta, r);
    let best_dec = mix_ensemble(layout, &scaled, &u)?;
    let (lo, hi) = run_bests.iter().fold((value, value), |(lo, hi), &v| {
        (if v < lo { v } else { lo }, if v > hi { v } else { hi })
    });
    Ok(RoofResult {
        value: value * value,
        best: best_dec,
        starts: run_bests.len(),
        converged_starts,
        spread: hi - lo,
        evaluations: total_evals,
        converged,
    })
}

/// SCREN of a mixed state across `cut | rest`, by convex-roof minimization
/// of the pure-state SCREN.
pub fn scren_mixed<T: Scalar>(
    rho: &DensityMatrix<T>,
    cut: &[usize],
    opts: &RoofOpts<T>,
) -> Result<MeasureValue<T>> {
    let result = minimize_roof(rho, |psi| scren_pure(psi, cut).map(|m| m.value), opts)?;
    Ok(MeasureValue::new(
        result.value,
        Method::Optimizer,
        format!(
            "starts={} converged={} spread={:.3e} evals={}",
            result.starts,
            result.converged_starts,
            to_f64(result.spread),
            result.evaluations
        ),
    ))
}

/// Stable seed mixing for deriving per-run and per-term seeds.
pub(crate) fn mix_seed(root: u64, salt: u64) -> u64 {
    let mut z = root ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct NmOutcome<T> {
    x: Vec<T>,
    value: T,
    evals: usize,
    converged: bool,
}

/// Nelder-Mead simplex minimization with a fallible objective.
fn nelder_mead<T, F>(
    f: &mut F,
    x0: Vec<T>,
    step: T,
    tol: T,
    max_evals: usize,
) -> Result<NmOutcome<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    let dim = x0.len();
    let half = real::<T>(0.5);
    let two = real::<T>(2.0);

    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| -> Result<T> {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(dim + 1);
    let v0 = eval(&x0, &mut evals)?;
    simplex.push((x0.clone(), v0));
    for i in 0..dim {
        let mut x = x0.clone();
        x[i] += step;
        let v = eval(&x, &mut evals)?;
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        if simplex[dim].1 - simplex[0].1 <= tol {
            converged = true;
            break;
        }
        if evals >= max_evals {
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![T::zero(); dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += *xi;
            }
        }
        let inv = T::one() / real::<T>(dim as f64);
        for c in centroid.iter_mut() {
            *c *= inv;
        }

        let worst = simplex[dim].clone();
        let reflected: Vec<T> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(&c, &w)| c + (c - w))
            .collect();
        let fr = eval(&reflected, &mut evals)?;

        if fr < simplex[0].1 {
            let expanded: Vec<T> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(&c, &w)| c + two * (c - w))
                .collect();
            let fe = eval(&expanded, &mut evals)?;
            simplex[dim] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let contracted: Vec<T> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(&c, &w)| c + half * (w - c))
                .collect();
            let fc = eval(&contracted, &mut evals)?;
            if fc < worst.1.min(fr) {
                simplex[dim] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (xi, &bi) in vertex.0.iter_mut().zip(&best) {
                        *xi = bi + half * (*xi - bi);
                    }
                    vertex.1 = eval(&vertex.0, &mut evals)?;
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    let (x, value) = simplex.swap_remove(0);
    Ok(NmOutcome {
        x,
        value,
        evals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::SubsystemLayout;
    use crate::states::{
        build_pcs, build_w_state, PcsParams, PcsState, WClassCoefficients,
    };
    use approx::assert_relative_eq;

    fn standard_pcs(p: f64, lam: f64) -> PcsState<f64> {
        PcsState::new(
            WClassCoefficients::standard_w(3).unwrap(),
            PcsParams::new(p, lam).unwrap(),
        )
    }

    fn diag_mixture() -> DensityMatrix<f64> {
        // ½|00⟩⟨00| + ½|11⟩⟨11|: separable, two-member eigen-ensemble
        let layout = SubsystemLayout::uniform(2, 2).unwrap();
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = Complex::new(0.5, 0.0);
        m[(3, 3)] = Complex::new(0.5, 0.0);
        DensityMatrix::new(layout, m).unwrap()
    }

    #[test]
    fn eigen_ensemble_shapes() {
        let layout = SubsystemLayout::uniform(1, 2).unwrap();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex::new(0.5, 0.0);
        m[(1, 1)] = Complex::new(0.5, 0.0);
        let halves = DensityMatrix::new(layout, m).unwrap();
        let dec = eigen_ensemble(&halves).unwrap();
        assert_eq!(dec.len(), 2);
        for (w, _) in dec.members() {
            assert_relative_eq!(*w, 0.5, epsilon = 1e-12);
        }

        let w = build_w_state(&WClassCoefficients::<f64>::standard_w(3).unwrap());
        let pure = DensityMatrix::from_pure(&w);
        assert_eq!(eigen_ensemble(&pure).unwrap().len(), 1);

        let pcs = build_pcs(&standard_pcs(0.5, 0.7));
        assert_eq!(eigen_ensemble(&pcs).unwrap().len(), 2);
    }

    #[test]
    fn hjw_identity_recovers_eigen_ensemble() {
        let rho = build_pcs(&standard_pcs(0.5, 0.7));
        let dec = hjw_decomposition(&rho, &DMatrix::identity(3, 3)).unwrap();
        let base = eigen_ensemble(&rho).unwrap();
        assert_eq!(dec.len(), base.len());
        assert!(max_entry_diff(&dec.reconstruction(), rho.matrix()) < 1e-10);
    }

    #[test]
    fn hjw_reconstructs_for_random_unitaries() {
        let rho = build_pcs(&standard_pcs(0.3, 0.4));
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for r in 2..=4 {
            for _ in 0..20 {
                let u = random_unitary::<f64, _>(r, &mut rng);
                let dec = hjw_decomposition(&rho, &u).unwrap();
                assert!(max_entry_diff(&dec.reconstruction(), rho.matrix()) < 1e-10);
                assert_relative_eq!(dec.weight_sum(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hjw_members_stay_in_the_wclass_span() {
        let pcs = standard_pcs(0.5, 0.7);
        let rho = build_pcs(&pcs);
        let w = build_w_state(pcs.coeffs());
        let vac = PureState::vacuum(w.layout().clone()).unwrap();
        let theta = std::f64::consts::FRAC_PI_3;
        let u = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(theta.cos(), 0.0),
                Complex::new(-theta.sin(), 0.0),
                Complex::new(theta.sin(), 0.0),
                Complex::new(theta.cos(), 0.0),
            ],
        );
        let dec = hjw_decomposition(&rho, &u).unwrap();
        for (_, psi) in dec.members() {
            let cw = w.inner(psi);
            let cv = vac.inner(psi);
            let residual = 1.0 - cw.norm_sqr() - cv.norm_sqr();
            assert!(residual.abs() < 1e-10, "member leaves span: {residual}");
        }
    }

    #[test]
    fn hjw_rejects_bad_unitaries() {
        let rho = build_pcs(&standard_pcs(0.5, 0.7));
        let not_unitary = DMatrix::from_element(2, 2, Complex::new(1.0, 0.0));
        assert!(matches!(
            hjw_decomposition(&rho, &not_unitary),
            Err(Error::NotUnitary(_))
        ));
        assert!(matches!(
            hjw_decomposition(&rho, &DMatrix::identity(1, 1)),
            Err(Error::EnsembleTooSmall { .. })
        ));
    }

    #[test]
    fn unitary_from_params_is_unitary() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for r in 1..=4usize {
            for _ in 0..10 {
                let theta: Vec<f64> = (0..r * r).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let u = unitary_from_params(&theta, r);
                let gram = u.adjoint() * &u;
                assert!(max_entry_diff(&gram, &DMatrix::identity(r, r)) < 1e-12);
            }
        }
        // zero parameters give the identity
        let u = unitary_from_params(&[0.0; 4], 2);
        assert!(max_entry_diff(&u, &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn objective_is_decomposition_independent_on_pcs() {
        // Σ_h p_h √SCREN = 2p√(X₁(1-X₁)) = √2/3 on the standard fixture
        let rho = build_pcs(&standard_pcs(0.5, 0.7));
        let expect = 2.0_f64.sqrt() / 3.0;
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for _ in 0..50 {
            let u = random_unitary::<f64, _>(3, &mut rng);
            let dec = hjw_decomposition(&rho, &u).unwrap();
            let v = roof_objective(&dec, &mut |psi: &PureState<f64>| {
                scren_pure(psi, &[0]).map(|m| m.value)
            })
            .unwrap();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(hi - lo < 1e-9, "spread {}", hi - lo);
        assert_relative_eq!(lo, expect, epsilon = 1e-10);
    }

    #[test]
    fn objective_violation_signal() {
        let rho = diag_mixture();
        let dec = eigen_ensemble(&rho).unwrap();
        let err = roof_objective(&dec, &mut |_: &PureState<f64>| Ok(-1e-3));
        assert!(matches!(err, Err(Error::MeasureViolation(_))));
        // tiny negatives clamp
        let v = roof_objective(&dec, &mut |_: &PureState<f64>| Ok(-1e-9)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn minimize_pure_projector_shortcut() {
        let w = build_w_state(&WClassCoefficients::<f64>::standard_w(3).unwrap());
        let rho = DensityMatrix::from_pure(&w);
        let opts = RoofOpts::default();
        let res = minimize_roof(&rho, |psi| scren_pure(psi, &[0]).map(|m| m.value), &opts).unwrap();
        assert_relative_eq!(res.value, 8.0 / 9.0, epsilon = 1e-10);
        assert_eq!(res.evaluations, 1);
        assert!(res.converged);
    }

    #[test]
    fn minimize_separable_mixture_is_zero() {
        let opts = RoofOpts::default();
        let m = scren_mixed(&diag_mixture(), &[0], &opts).unwrap();
        assert!(m.value < 1e-10, "value {}", m.value);
    }

    #[test]
    fn minimize_matches_pcs_closed_form() {
        let pcs = standard_pcs(0.5, 0.7);
        let rho = build_pcs(&pcs);
        let opts = RoofOpts::default();
        let m = scren_mixed(&rho, &[0], &opts).unwrap();
        assert!((m.value - 2.0 / 9.0).abs() < 1e-4, "value {}", m.value);
    }

    #[test]
    fn minimize_is_deterministic() {
        let rho = build_pcs(&standard_pcs(0.4, 0.6));
        let opts = RoofOpts {
            seed: 99,
            ..RoofOpts::default()
        };
        let run = |opts: &RoofOpts<f64>| {
            minimize_roof(&rho, |psi| scren_pure(psi, &[0]).map(|m| m.value), opts).unwrap()
        };
        let a = run(&opts);
        let b = run(&opts);
        assert_eq!(a.value, b.value);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.spread, b.spread);
    }

    #[test]
    fn minimize_is_monotone_in_ensemble_size() {
        let rho = build_pcs(&standard_pcs(0.6, 0.2));
        let value_at = |r: usize| {
            let opts = RoofOpts {
                rank_policy: RankPolicy::Fixed(r),
                seed: 7,
                ..RoofOpts::default()
            };
            minimize_roof(&rho, |psi| scren_pure(psi, &[0]).map(|m| m.value), &opts)
                .unwrap()
                .value
        };
        let tol = 1e-6;
        let (v2, v3, v4) = (value_at(2), value_at(3), value_at(4));
        assert!(v3 <= v2 + tol);
        assert!(v4 <= v3 + tol);
    }

    #[test]
    fn minimize_rejects_too_small_r() {
        let rho = build_pcs(&standard_pcs(0.5, 0.5));
        let opts = RoofOpts {
            rank_policy: RankPolicy::Fixed(1),
            ..RoofOpts::default()
        };
        assert!(matches!(
            minimize_roof(&rho, |psi| scren_pure(psi, &[0]).map(|m| m.value), &opts),
            Err(Error::EnsembleTooSmall { .. })
        ));
    }
}
