//! Constructors and structure-preserving transformations for generalized
//! W-class states, their coherent and partially coherent superpositions
//! (PCS) with the vacuum, the phase-damping channel, and the symbolic
//! reduction law for tracing parties out of a PCS state.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::layout::{PartitionMap, SubsystemLayout};
use crate::linalg::{DensityMatrix, PureState};
use crate::{real, to_f64, Scalar};

/// Normalization tolerance for W-class coefficient matrices.
pub const COEFF_NORM_TOL: f64 = 1e-12;
/// Reductions keeping less W-class weight than this are rejected as
/// degenerate (the renormalized W-class state would be undefined).
pub const OMEGA_FLOOR: f64 = 1e-14;

/// Coefficient matrix `a_{ij}` of an `n`-qudit generalized W-class state:
/// row `i` is a party, column `j-1` holds the amplitude of level `j` on
/// that party (with all other parties at level 0).
#[derive(Debug, Clone, PartialEq)]
pub struct WClassCoefficients<T: Scalar> {
    a: DMatrix<Complex<T>>,
}

impl<T: Scalar> WClassCoefficients<T> {
    /// Builds a coefficient matrix, checking shape (`n ≥ 2`, `d ≥ 2`) and
    /// the normalization `Σ_{ij} |a_{ij}|² = 1`.
    pub fn new(a: DMatrix<Complex<T>>) -> Result<Self> {
        if a.nrows() < 2 || a.ncols() < 1 {
            return Err(Error::InvalidLayout);
        }
        let norm: T = a
            .iter()
            .fold(T::zero(), |acc, c| acc + c.modulus_squared());
        let dev = (norm - T::one()).abs();
        if dev > real(COEFF_NORM_TOL) {
            return Err(Error::CoefficientsNotNormalized(to_f64(dev)));
        }
        Ok(Self { a })
    }

    /// Uniform real coefficients over all parties and levels.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        if n < 2 || d < 2 {
            return Err(Error::InvalidLayout);
        }
        let amp = (T::one() / real::<T>((n * (d - 1)) as f64)).sqrt();
        Self::new(DMatrix::from_element(n, d - 1, Complex::from_real(amp)))
    }

    /// The standard `n`-qubit W state coefficients (`a_{i1} = 1/√n`).
    pub fn standard_w(n: usize) -> Result<Self> {
        Self::uniform(n, 2)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.a.ncols() + 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.a
    }

    /// Amplitude of level `j` (`1 ≤ j ≤ d-1`) on party `i`.
    pub fn coeff(&self, party: usize, level: usize) -> Complex<T> {
        self.a[(party, level - 1)]
    }

    /// `X_i = Σ_j |a_{ij}|²`, the W-class weight carried by party `i`.
    pub fn party_weight(&self, party: usize) -> T {
        self.a
            .row(party)
            .iter()
            .fold(T::zero(), |acc, c| acc + c.modulus_squared())
    }

    /// Canonical representative of the ray: the largest-modulus entry is
    /// made real positive.
    pub fn canonicalized(&self) -> Self {
        let mut best = Complex::from_real(T::zero());
        for c in self.a.iter() {
            if c.modulus() > best.modulus() {
                best = *c;
            }
        }
        if best.modulus() <= T::zero() {
            return self.clone();
        }
        let phase = best / Complex::from_real(best.modulus());
        Self {
            a: self.a.map(|c| c * phase.conjugate()),
        }
    }

    /// Equality as physical states: up to a single unit-modulus scalar.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: T) -> bool {
        if self.a.shape() != other.a.shape() {
            return false;
        }
        let a = self.canonicalized();
        let b = other.canonicalized();
        a.a.iter()
            .zip(b.a.iter())
            .all(|(x, y)| (*x - *y).modulus() <= tol)
    }
}

/// The `(p, λ)` parameters of a partially coherent superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcsParams<T: Scalar> {
    p: T,
    lam: T,
}

impl<T: Scalar> PcsParams<T> {
    pub fn new(p: T, lam: T) -> Result<Self> {
        check_unit_interval("p", p)?;
        check_unit_interval("lambda", lam)?;
        Ok(Self { p, lam })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn lam(&self) -> T {
        self.lam
    }
}

fn check_unit_interval<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value < T::zero() || value > T::one() {
        return Err(Error::ParamOutOfRange {
            name,
            value: to_f64(value),
        });
    }
    Ok(())
}

/// Symbolic `(coefficients, p, λ)` triple of a partially coherent
/// superposition of a W-class state and the vacuum; materializable to a
/// rank ≤ 2 density matrix with [`build_pcs`].
#[derive(Debug, Clone, PartialEq)]
pub struct PcsState<T: Scalar> {
    coeffs: WClassCoefficients<T>,
    params: PcsParams<T>,
}

impl<T: Scalar> PcsState<T> {
    pub fn new(coeffs: WClassCoefficients<T>, params: PcsParams<T>) -> Self {
        Self { coeffs, params }
    }

    pub fn coeffs(&self) -> &WClassCoefficients<T> {
        &self.coeffs
    }

    pub fn params(&self) -> &PcsParams<T> {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.coeffs.n()
    }

    pub fn d(&self) -> usize {
        self.coeffs.d()
    }

    pub fn layout(&self) -> SubsystemLayout {
        SubsystemLayout::uniform(self.n(), self.d()).expect("valid by construction")
    }
}

/// The generalized W-class state `Σ_{ij} a_{ij} |0…j…0⟩` as a pure state.
pub fn build_w_state<T: Scalar>(coeffs: &WClassCoefficients<T>) -> PureState<T> {
    let layout = SubsystemLayout::uniform(coeffs.n(), coeffs.d()).expect("valid by construction");
    let mut amps = DVector::zeros(layout.total_dim());
    for i in 0..coeffs.n() {
        for j in 1..coeffs.d() {
            amps[j * layout.stride(i)] = coeffs.coeff(i, j);
        }
    }
    PureState::new(layout, amps).expect("normalized by the coefficient invariant")
}

/// The coherent superposition `√p |W⟩ + √(1-p) |0…0⟩`.
///
/// The W-class state has zero vacuum amplitude, so the result is normalized
/// for every `p`.
pub fn build_coherent_superposition<T: Scalar>(
    coeffs: &WClassCoefficients<T>,
    p: T,
) -> Result<PureState<T>> {
    check_unit_interval("p", p)?;
    let w = build_w_state(coeffs);
    let mut amps = w.amplitudes() * Complex::from_real(p.sqrt());
    amps[0] = Complex::from_real((T::one() - p).sqrt());
    PureState::new(w.layout().clone(), amps)
}

/// Materializes a PCS state:
/// `p|W⟩⟨W| + (1-p)|0⟩⟨0| + λ√(p(1-p)) (|W⟩⟨0| + |0⟩⟨W|)`.
pub fn build_pcs<T: Scalar>(pcs: &PcsState<T>) -> DensityMatrix<T> {
    let p = pcs.params().p();
    let lam = pcs.params().lam();
    let w = build_w_state(pcs.coeffs());
    let d = w.layout().total_dim();
    let mut mat = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            mat[(i, j)] = w.amp(i) * w.amp(j).conjugate() * Complex::from_real(p);
        }
    }
    mat[(0, 0)] += Complex::from_real(T::one() - p);
    let coh = lam * (p * (T::one() - p)).sqrt();
    for j in 1..d {
        mat[(0, j)] += w.amp(j).conjugate() * Complex::from_real(coh);
        mat[(j, 0)] += w.amp(j) * Complex::from_real(coh);
    }
    DensityMatrix::new(w.layout().clone(), mat).expect("PCS matrices are valid density matrices")
}

/// Phase damping with coherency parameter `lam`, applied to a pure state.
///
/// Kraus operators: `E₀ = √λ·I`, `E₁ = √(1-λ)(I - |0…0⟩⟨0…0|)`,
/// `E₂ = √(1-λ)|0…0⟩⟨0…0|`. The channel keeps every entry of `|ψ⟩⟨ψ|`
/// except the vacuum cross terms, which are scaled by `λ`.
pub fn phase_damp<T: Scalar>(psi: &PureState<T>, lam: T) -> Result<DensityMatrix<T>> {
    check_unit_interval("lambda", lam)?;
    let mut mat = psi.projector();
    let d = mat.nrows();
    for j in 1..d {
        mat[(0, j)] *= Complex::from_real(lam);
        mat[(j, 0)] *= Complex::from_real(lam);
    }
    DensityMatrix::new(psi.layout().clone(), mat)
}

/// Symbolic partial trace of a PCS state: tracing out `traced` yields
/// another PCS state with the surviving coefficients renormalized by
/// `1/√Ω` and parameters `p' = pΩ`, `λ' = λ√((1-p)/(1-p'))`, where `Ω` is
/// the W-class weight kept.
///
/// At `p = 1` with `Ω < 1` the coherence term vanishes identically and
/// `λ' = 0` is the canonical representative.
pub fn reduce_pcs_symbolic<T: Scalar>(pcs: &PcsState<T>, traced: &[usize]) -> Result<PcsState<T>> {
    if traced.is_empty() {
        return Ok(pcs.clone());
    }
    let layout = pcs.layout();
    let traced = layout.checked_proper_subset(traced)?;
    let kept = layout.complement(&traced);
    if kept.len() < 2 {
        return Err(Error::TooFewParties(2));
    }
    let mut omega = kept
        .iter()
        .fold(T::zero(), |acc, &i| acc + pcs.coeffs().party_weight(i));
    if omega < real(OMEGA_FLOOR) {
        return Err(Error::DegenerateReduction);
    }
    if omega > T::one() {
        omega = T::one();
    }
    let scale = Complex::from_real(T::one() / omega.sqrt());
    let a = DMatrix::from_fn(kept.len(), pcs.d() - 1, |i, j| {
        pcs.coeffs().matrix()[(kept[i], j)] * scale
    });
    let p = pcs.params().p();
    let lam = pcs.params().lam();
    let p_new = p * omega;
    let lam_new = if T::one() - p_new <= T::zero() {
        // p' = 1 forces p = 1, Ω = 1: the state stays pure, keep λ.
        lam
    } else {
        let mut ratio = (T::one() - p) / (T::one() - p_new);
        if ratio > T::one() {
            ratio = T::one();
        }
        lam * ratio.sqrt()
    };
    Ok(PcsState::new(
        WClassCoefficients::new(a)?,
        PcsParams::new(p_new, lam_new)?,
    ))
}

/// Coefficients of the coarse-grained W-class state for a party partition.
///
/// Every merged party is embedded into the uniform local dimension
/// `d^{n_max}` (`n_max` the largest group size); a level `j` excitation on
/// the group member at position `t` (of `k`, counted from the most
/// significant digit) becomes the group level `j·d^{k-1-t}`. Unused labels
/// carry zero coefficients.
pub fn merge_wclass_coeffs<T: Scalar>(
    coeffs: &WClassCoefficients<T>,
    pmap: &PartitionMap,
) -> Result<WClassCoefficients<T>> {
    if pmap.n_parties() != coeffs.n() {
        return Err(Error::InvalidPartition);
    }
    if pmap.n_groups() < 2 {
        return Err(Error::TooFewParties(2));
    }
    let d = coeffs.d();
    let d_max = d.pow(pmap.max_group_len() as u32);
    let mut b = DMatrix::zeros(pmap.n_groups(), d_max - 1);
    for (s, group) in pmap.groups().iter().enumerate() {
        let k = group.len();
        for (t, &party) in group.iter().enumerate() {
            let stride = d.pow((k - 1 - t) as u32);
            for j in 1..d {
                b[(s, j * stride - 1)] = coeffs.coeff(party, j);
            }
        }
    }
    WClassCoefficients::new(b)
}

/// Draws W-class coefficients uniformly from the unit sphere of the
/// `n(d-1)`-dimensional complex coefficient space. Deterministic per seed.
pub fn sample_random_wclass<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<WClassCoefficients<T>> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidLayout);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(n * (d - 1));
    let mut norm_sq = 0.0f64;
    for _ in 0..n * (d - 1) {
        let re = standard_normal(&mut rng);
        let im = standard_normal(&mut rng);
        norm_sq += re * re + im * im;
        raw.push((re, im));
    }
    let inv = 1.0 / norm_sq.sqrt();
    let a = DMatrix::from_fn(n, d - 1, |i, j| {
        let (re, im) = raw[i * (d - 1) + j];
        Complex::new(real::<T>(re * inv), real::<T>(im * inv))
    });
    WClassCoefficients::new(a)
}

/// Uniform PCS parameters, for randomized sweeps. Deterministic per seed.
pub fn sample_random_pcs_params<T: Scalar>(seed: u64) -> PcsParams<T> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let p: f64 = rng.gen();
    let lam: f64 = rng.gen();
    PcsParams::new(real(p), real(lam)).expect("in range")
}

// Box-Muller; avoids a distribution-crate dependency for one sampler.
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_entry_diff;
    use approx::assert_relative_eq;

    fn standard_pcs(p: f64, lam: f64) -> PcsState<f64> {
        PcsState::new(
            WClassCoefficients::standard_w(3).unwrap(),
            PcsParams::new(p, lam).unwrap(),
        )
    }

    #[test]
    fn standard_w_state_amplitudes() {
        let psi = build_w_state(&WClassCoefficients::standard_w(3).unwrap());
        let a = 1.0 / 3.0_f64.sqrt();
        for idx in [0b100, 0b010, 0b001] {
            assert_relative_eq!(psi.amp(idx).re, a, epsilon = 1e-15);
        }
        assert_eq!(psi.amp(0), Complex::new(0.0, 0.0));
        assert_eq!(psi.amp(0b111), Complex::new(0.0, 0.0));
    }

    #[test]
    fn single_coefficient_qutrit_pair() {
        // n=2, d=3, a_{11}=1 → |10⟩
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 0)] = Complex::new(1.0, 0.0);
        let coeffs = WClassCoefficients::new(a).unwrap();
        let psi = build_w_state(&coeffs);
        assert_relative_eq!(psi.amp(3).re, 1.0, epsilon = 1e-15); // |1,0⟩ in base 3
    }

    #[test]
    fn rejects_unnormalized_coefficients() {
        let a = DMatrix::from_element(2, 1, Complex::new(1.0, 0.0));
        assert!(matches!(
            WClassCoefficients::new(a),
            Err(Error::CoefficientsNotNormalized(_))
        ));
    }

    #[test]
    fn coherent_superposition_amplitudes() {
        let coeffs = WClassCoefficients::standard_w(3).unwrap();
        let psi = build_coherent_superposition(&coeffs, 0.5).unwrap();
        let weight1 = 1.0 / 6.0_f64.sqrt();
        for idx in [0b100, 0b010, 0b001] {
            assert_relative_eq!(psi.amp(idx).re, weight1, epsilon = 1e-15);
        }
        assert_relative_eq!(psi.amp(0).re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);

        let w = build_coherent_superposition(&coeffs, 1.0).unwrap();
        assert!(max_entry_diff(&w.projector(), &build_w_state(&coeffs).projector()) < 1e-15);
        let vac = build_coherent_superposition(&coeffs, 0.0).unwrap();
        assert_relative_eq!(vac.amp(0).re, 1.0, epsilon = 1e-15);
        assert!(build_coherent_superposition(&coeffs, 1.5).is_err());
    }

    #[test]
    fn pcs_limits() {
        let coeffs = WClassCoefficients::standard_w(3).unwrap();
        // p = 1: |W⟩⟨W| regardless of λ
        let pure_w = build_pcs(&standard_pcs(1.0, 0.3));
        assert!(max_entry_diff(pure_w.matrix(), &build_w_state(&coeffs).projector()) < 1e-15);
        // λ = 1: projector onto the coherent superposition
        let coherent = build_pcs(&standard_pcs(0.4, 1.0));
        let proj = build_coherent_superposition(&coeffs, 0.4).unwrap().projector();
        assert!(max_entry_diff(coherent.matrix(), &proj) < 1e-12);
        // λ = 0: incoherent mixture
        let mixture = build_pcs(&standard_pcs(0.4, 0.0));
        let mut expect = build_w_state(&coeffs).projector() * Complex::new(0.4, 0.0);
        expect[(0, 0)] += Complex::new(0.6, 0.0);
        assert!(max_entry_diff(mixture.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn pcs_rank_at_most_two() {
        let rho = build_pcs(&standard_pcs(0.5, 0.7));
        assert_eq!(rho.rank(1e-10), 2);
        // intermediate λ spectra sit strictly between the λ=0 and λ=1 ones
        let top = |lam: f64| {
            let r = build_pcs(&standard_pcs(0.5, lam));
            crate::linalg::eigendecompose_hermitian(r.matrix()).unwrap().0[0]
        };
        let (e0, e_mid, e1) = (top(0.0), top(0.5), top(1.0));
        assert!(e0 < e_mid && e_mid < e1);
    }

    #[test]
    fn phase_damp_matches_pcs() {
        let coeffs = WClassCoefficients::standard_w(3).unwrap();
        let psi = build_coherent_superposition(&coeffs, 0.5).unwrap();
        // identity channel at λ = 1
        let id = phase_damp(&psi, 1.0).unwrap();
        assert!(max_entry_diff(id.matrix(), &psi.projector()) < 1e-15);
        // λ = 0.7 reproduces the PCS matrix
        let damped = phase_damp(&psi, 0.7).unwrap();
        let pcs = build_pcs(&standard_pcs(0.5, 0.7));
        assert!(max_entry_diff(damped.matrix(), pcs.matrix()) < 1e-12);
        // λ = 0 reproduces the incoherent mixture
        let damped0 = phase_damp(&psi, 0.0).unwrap();
        let mix = build_pcs(&standard_pcs(0.5, 0.0));
        assert!(max_entry_diff(damped0.matrix(), mix.matrix()) < 1e-12);
        assert!(phase_damp(&psi, -0.1).is_err());
    }

    #[test]
    fn reduction_running_example() {
        // standard W, p = 1/2, λ = 1, trace the last party
        let reduced = reduce_pcs_symbolic(&standard_pcs(0.5, 1.0), &[2]).unwrap();
        assert_relative_eq!(reduced.params().p(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(reduced.params().lam(), 3.0_f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(reduced.n(), 2);
        // materialized reduction equals the numeric partial trace
        let numeric = build_pcs(&standard_pcs(0.5, 1.0))
            .partial_trace(&[0, 1])
            .unwrap();
        assert!(max_entry_diff(build_pcs(&reduced).matrix(), numeric.matrix()) < 1e-12);
    }

    #[test]
    fn reduction_boundaries() {
        let vac = reduce_pcs_symbolic(&standard_pcs(0.0, 0.6), &[2]).unwrap();
        assert_relative_eq!(vac.params().p(), 0.0);
        assert_relative_eq!(vac.params().lam(), 0.6);

        // p = 1 with Ω < 1: λ' = 0 by continuity
        let pure = reduce_pcs_symbolic(&standard_pcs(1.0, 0.9), &[2]).unwrap();
        assert_relative_eq!(pure.params().p(), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(pure.params().lam(), 0.0);
        let numeric = build_pcs(&standard_pcs(1.0, 0.9))
            .partial_trace(&[0, 1])
            .unwrap();
        assert!(max_entry_diff(build_pcs(&pure).matrix(), numeric.matrix()) < 1e-12);
    }

    #[test]
    fn degenerate_reduction_is_an_error() {
        // all W weight on the last party: tracing it out leaves Ω = 0
        let mut a = DMatrix::zeros(3, 1);
        a[(2, 0)] = Complex::new(1.0, 0.0);
        let pcs = PcsState::new(
            WClassCoefficients::new(a).unwrap(),
            PcsParams::new(0.5, 0.5).unwrap(),
        );
        assert!(matches!(
            reduce_pcs_symbolic(&pcs, &[2]),
            Err(Error::DegenerateReduction)
        ));
    }

    #[test]
    fn merged_coefficients_follow_the_relabeling() {
        let coeffs = sample_random_wclass::<f64>(3, 3, 11).unwrap();
        let pmap = PartitionMap::new(vec![vec![0], vec![1, 2]], 3).unwrap();
        let merged = merge_wclass_coeffs(&coeffs, &pmap).unwrap();
        assert_eq!(merged.n(), 2);
        assert_eq!(merged.d(), 9);
        let d = 3;
        for j in 1..d {
            assert_eq!(merged.coeff(1, j), coeffs.coeff(2, j));
            assert_eq!(merged.coeff(1, j * d), coeffs.coeff(1, j));
            assert_eq!(merged.coeff(0, j), coeffs.coeff(0, j));
        }
        // merged amplitudes agree with numerically regrouped ones
        let regrouped = build_w_state(&coeffs).merge_parties(&pmap).unwrap();
        let embedded = regrouped.embed(&[9, 9]).unwrap();
        assert!(
            max_entry_diff(&build_w_state(&merged).projector(), &embedded.projector()) < 1e-12
        );
    }

    #[test]
    fn singleton_partition_keeps_coefficients() {
        let coeffs = sample_random_wclass::<f64>(4, 2, 3).unwrap();
        let merged = merge_wclass_coeffs(&coeffs, &PartitionMap::singletons(4)).unwrap();
        assert_eq!(merged, coeffs);
    }

    #[test]
    fn sampler_is_deterministic_and_normalized() {
        let a = sample_random_wclass::<f64>(3, 3, 42).unwrap();
        let b = sample_random_wclass::<f64>(3, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_random_wclass::<f64>(3, 3, 43).unwrap();
        assert_ne!(a, c);
        let norm: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sampler_party_weights_are_symmetric_on_average() {
        let mean: f64 = (0..100)
            .map(|seed| {
                sample_random_wclass::<f64>(3, 3, seed)
                    .unwrap()
                    .party_weight(0)
            })
            .sum::<f64>()
            / 100.0;
        assert!((mean - 1.0 / 3.0).abs() < 0.05, "mean X_1 = {mean}");
    }

    #[test]
    fn phase_comparison_canonicalizes() {
        let a = sample_random_wclass::<f64>(3, 2, 7).unwrap();
        let rotated = WClassCoefficients::new(
            a.matrix().map(|c| c * Complex::from_polar(1.0, 1.2)),
        )
        .unwrap();
        assert!(a.approx_eq_up_to_phase(&rotated, 1e-12));
        let other = sample_random_wclass::<f64>(3, 2, 8).unwrap();
        assert!(!a.approx_eq_up_to_phase(&other, 1e-6));
    }
}
