//! Monogamy and strong-monogamy machinery: index-vector enumeration,
//! CKW-type SCREN residuals, the recursive multi-party SCREN (pure and
//! mixed), and verification reports.
//!
//! Residual sign convention: `residual ≥ 0` means the inequality holds;
//! reports carry the raw signed residual. "All ordered subsets" of the
//! strong-monogamy sum is read as each subset once, listed ascending: the
//! multi-party terms are permutation-symmetric in the non-focus parties,
//! and per-permutation counting would break the three-party reduction.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{max_entry_diff, DensityMatrix, PureState};
use crate::measures::{
    scren_pcs_one_vs_rest, scren_pcs_pair, scren_pure, MeasureValue, Method,
};
use crate::roof::{mix_seed, minimize_roof, RankPolicy, RoofOpts};
use crate::states::{build_pcs, reduce_pcs_symbolic, PcsState};
use crate::{real, Scalar};

/// One term label of the strong-monogamy sum: the focus party together
/// with `m-1` other parties, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexVector {
    /// Number of parties in the term, including the focus.
    pub m: usize,
    /// The `m-1` non-focus parties, strictly ascending.
    pub parties: Vec<usize>,
}

/// All index vectors at level `m` for an `n`-party state: every
/// `(m-1)`-element subset of the non-focus parties once, in lexicographic
/// order. `C(n-1, m-1)` vectors.
pub fn enumerate_index_vectors(n: usize, focus: usize, m: usize) -> Result<Vec<IndexVector>> {
    if focus >= n {
        return Err(Error::PartyOutOfRange {
            index: focus,
            parties: n,
        });
    }
    if m < 2 || m > n - 1 {
        return Err(Error::LevelOutOfRange { m, n });
    }
    Ok((0..n)
        .filter(|&i| i != focus)
        .combinations(m - 1)
        .map(|parties| IndexVector { m, parties })
        .collect())
}

/// Which inequality or identity a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Ckw,
    StrongMonogamy,
    NscrenZero,
    Reduction,
}

impl Claim {
    pub fn as_str(&self) -> &'static str {
        match self {
            Claim::Ckw => "ckw",
            Claim::StrongMonogamy => "sm",
            Claim::NscrenZero => "nscren_zero",
            Claim::Reduction => "reduction",
        }
    }
}

/// One term of a monogamy sum: the involved parties (focus first), the
/// level `m`, the unexponentiated measure value and how it was computed.
#[derive(Debug, Clone)]
pub struct MonogamyTerm<T: Scalar> {
    pub parties: Vec<usize>,
    pub m: usize,
    pub value: T,
    pub method: Method,
}

impl<T: Scalar> MonogamyTerm<T> {
    /// The term's contribution `value^{m/2}` to the monogamy sum.
    pub fn contribution(&self) -> T {
        let v = if self.value < T::zero() {
            T::zero()
        } else {
            self.value
        };
        v.powf(real(self.m as f64 / 2.0))
    }
}

/// A verification report: `residual = lhs − Σ terms value^{m/2}`.
#[derive(Debug, Clone)]
pub struct MonogamyReport<T: Scalar> {
    pub claim: Claim,
    pub lhs: T,
    pub terms: Vec<MonogamyTerm<T>>,
    pub residual: T,
    pub tolerance: T,
    pub pass: bool,
    pub seed: u64,
}

/// Options shared by the monogamy operations.
#[derive(Debug, Clone)]
pub struct MonogamyOpts<T: Scalar> {
    /// Optimizer options for depth-0 convex roofs.
    pub roof: RoofOpts<T>,
    /// Starts used by nested (depth ≥ 1) roofs; the nested rank policy is
    /// pinned to `r = rank`, which is exact for the decomposition-independent
    /// family and keeps the recursion tractable.
    pub nested_starts: usize,
    /// Disables PCS structural short-circuits so the generic optimizer path
    /// is exercised end to end.
    pub force_generic: bool,
    /// Tolerance for closed-form identities.
    pub closed_tol: T,
    /// Tolerance for optimizer-backed checks.
    pub opt_tol: T,
    /// Tolerance for zero multi-party SCREN checks.
    pub zero_tol: T,
    /// Recursion depth cap for the multi-party SCREN.
    pub max_depth: usize,
}

impl<T: Scalar> Default for MonogamyOpts<T> {
    fn default() -> Self {
        Self {
            roof: RoofOpts::default(),
            nested_starts: 2,
            force_generic: false,
            closed_tol: real(1e-10),
            opt_tol: real(1e-4),
            zero_tol: real(1e-6),
            max_depth: 8,
        }
    }
}

/// A state a monogamy check runs on: a symbolic PCS state (closed forms
/// available) or an arbitrary pure state.
#[derive(Debug, Clone)]
pub enum StateSource<T: Scalar> {
    Pcs(PcsState<T>),
    Pure(PureState<T>),
}

impl<T: Scalar> StateSource<T> {
    pub fn n_parties(&self) -> usize {
        match self {
            StateSource::Pcs(pcs) => pcs.n(),
            StateSource::Pure(psi) => psi.layout().n_parties(),
        }
    }

    fn density(&self) -> DensityMatrix<T> {
        match self {
            StateSource::Pcs(pcs) => build_pcs(pcs),
            StateSource::Pure(psi) => DensityMatrix::from_pure(psi),
        }
    }
}

fn roof_opts_at<T: Scalar>(opts: &MonogamyOpts<T>, depth: usize, salt: u64) -> RoofOpts<T> {
    let mut r = opts.roof.clone();
    r.seed = mix_seed(opts.roof.seed, salt ^ ((depth as u64) << 48));
    if depth > 0 {
        r.starts = opts.nested_starts.max(1);
        r.rank_policy = RankPolicy::Offset(0);
    }
    r
}

fn term_salt(m: usize, parties: &[usize]) -> u64 {
    parties
        .iter()
        .fold(0x243f_6a88_85a3_08d3 ^ m as u64, |acc, &p| {
            mix_seed(acc, p as u64 + 1)
        })
}

/// The raw (unclamped) multi-party SCREN of a pure state:
/// `scren_pure(focus|rest) − Σ_{m=2}^{n-1} Σ_{j⃗} (mixed m-SCREN)^{m/2}`.
fn multiparty_scren_pure_raw<T: Scalar>(
    psi: &PureState<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
    depth: usize,
) -> Result<T> {
    let n = psi.layout().n_parties();
    if n < 3 {
        return Err(Error::TooFewParties(3));
    }
    let mut value = scren_pure(psi, &[focus])?.value;
    let rho = DensityMatrix::from_pure(psi);
    for m in 2..n {
        for iv in enumerate_index_vectors(n, focus, m)? {
            let mut kept = iv.parties.clone();
            kept.push(focus);
            kept.sort_unstable();
            let marginal = rho.partial_trace(&kept)?;
            let fpos = kept.iter().position(|&x| x == focus).expect("focus kept");
            let salt = term_salt(m, &iv.parties);
            let term = multiparty_scren_mixed_raw(&marginal, fpos, opts, depth + 1, salt)?;
            let term = if term < T::zero() { T::zero() } else { term };
            value -= term.powf(real(m as f64 / 2.0));
        }
    }
    Ok(value)
}

fn multiparty_scren_mixed_raw<T: Scalar>(
    rho: &DensityMatrix<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
    depth: usize,
    salt: u64,
) -> Result<T> {
    if depth > opts.max_depth {
        return Err(Error::DepthExhausted);
    }
    let roof = roof_opts_at(opts, depth, salt);
    let n = rho.layout().n_parties();
    let result = if n == 2 {
        minimize_roof(rho, |psi| scren_pure(psi, &[focus]).map(|m| m.value), &roof)?
    } else {
        minimize_roof(
            rho,
            |psi| multiparty_scren_pure_raw(psi, focus, opts, depth + 1),
            &roof,
        )?
    };
    Ok(result.value)
}

/// The `n`-SCREN of a pure state. May be negative in principle (its
/// nonnegativity is the conjecture under test), so the value is returned
/// unclamped; a negative value is flagged in the detail string.
pub fn multiparty_scren_pure<T: Scalar>(
    psi: &PureState<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MeasureValue<T>> {
    let raw = multiparty_scren_pure_raw(psi, focus, opts, 0)?;
    Ok(MeasureValue {
        value: raw,
        method: Method::Optimizer,
        detail: if raw < T::zero() {
            "negative residual".to_string()
        } else {
            "nonnegative".to_string()
        },
    })
}

/// The `n`-SCREN of a mixed state: the convex roof of the square root of
/// the pure `n`-SCREN, squared. Nonnegative by construction; a member
/// value below the violation floor aborts with the violation signal.
pub fn multiparty_scren_mixed<T: Scalar>(
    rho: &DensityMatrix<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MeasureValue<T>> {
    if rho.layout().n_parties() < 3 {
        return Err(Error::TooFewParties(3));
    }
    let value = multiparty_scren_mixed_raw(rho, focus, opts, 0, 0)?;
    Ok(MeasureValue::new(value, Method::Optimizer, "convex roof"))
}

fn one_vs_rest<T: Scalar>(
    source: &StateSource<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MeasureValue<T>> {
    match source {
        StateSource::Pcs(pcs) if !opts.force_generic => scren_pcs_one_vs_rest(pcs, focus),
        StateSource::Pure(psi) => scren_pure(psi, &[focus]),
        _ => {
            let rho = source.density();
            let roof = roof_opts_at(opts, 0, 1);
            let result =
                minimize_roof(&rho, |psi| scren_pure(psi, &[focus]).map(|m| m.value), &roof)?;
            Ok(MeasureValue::new(result.value, Method::Optimizer, "convex roof"))
        }
    }
}

fn pair_term<T: Scalar>(
    source: &StateSource<T>,
    focus: usize,
    other: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MonogamyTerm<T>> {
    let mut parties = vec![focus, other];
    let (value, method) = match source {
        StateSource::Pcs(pcs) if !opts.force_generic => {
            (scren_pcs_pair(pcs, focus, other)?.value, Method::ClosedForm)
        }
        _ => {
            let rho = source.density();
            let mut kept = parties.clone();
            kept.sort_unstable();
            let marginal = rho.partial_trace(&kept)?;
            let fpos = kept.iter().position(|&x| x == focus).expect("focus kept");
            let roof = roof_opts_at(opts, 0, term_salt(2, &[other]));
            let result = minimize_roof(
                &marginal,
                |psi| scren_pure(psi, &[fpos]).map(|m| m.value),
                &roof,
            )?;
            (result.value, Method::Optimizer)
        }
    };
    parties.dedup();
    Ok(MonogamyTerm {
        parties,
        m: 2,
        value,
        method,
    })
}

fn finish_report<T: Scalar>(
    claim: Claim,
    lhs: T,
    terms: Vec<MonogamyTerm<T>>,
    tolerance: T,
    seed: u64,
) -> MonogamyReport<T> {
    let sum = terms
        .iter()
        .fold(T::zero(), |acc, t| acc + t.contribution());
    let residual = lhs - sum;
    MonogamyReport {
        claim,
        lhs,
        terms,
        residual,
        tolerance,
        pass: residual >= -tolerance,
        seed,
    }
}

/// The CKW-type monogamy check: one-vs-rest SCREN against the sum of
/// pairwise SCRENs of the two-party marginals. PCS sources saturate the
/// inequality (residual 0 within tolerance).
pub fn ckw_residual_scren<T: Scalar>(
    source: &StateSource<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MonogamyReport<T>> {
    let n = source.n_parties();
    if n < 3 {
        return Err(Error::TooFewParties(3));
    }
    if focus >= n {
        return Err(Error::PartyOutOfRange {
            index: focus,
            parties: n,
        });
    }
    let lhs = one_vs_rest(source, focus, opts)?;
    let closed = lhs.method == Method::ClosedForm;
    let mut terms = Vec::with_capacity(n - 1);
    for other in (0..n).filter(|&i| i != focus) {
        terms.push(pair_term(source, focus, other, opts)?);
    }
    let tolerance = if closed && terms.iter().all(|t| t.method == Method::ClosedForm) {
        opts.closed_tol
    } else {
        opts.opt_tol
    };
    Ok(finish_report(
        Claim::Ckw,
        lhs.value,
        terms,
        tolerance,
        opts.roof.seed,
    ))
}

/// The strong-monogamy check: one-vs-rest SCREN against the sum over all
/// index vectors of the `m`-party mixed SCRENs raised to `m/2`.
///
/// For PCS sources without `force_generic`, the `m ≥ 3` marginals are PCS
/// states by the reduction law and their multi-party SCREN is zero, so the
/// terms short-circuit to exact zeros.
pub fn strong_monogamy_residual<T: Scalar>(
    source: &StateSource<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MonogamyReport<T>> {
    let n = source.n_parties();
    if n < 3 {
        return Err(Error::TooFewParties(3));
    }
    if focus >= n {
        return Err(Error::PartyOutOfRange {
            index: focus,
            parties: n,
        });
    }
    let lhs = one_vs_rest(source, focus, opts)?;
    let mut all_closed = lhs.method == Method::ClosedForm;
    let mut terms = Vec::new();
    let rho = source.density();
    for m in 2..n {
        for iv in enumerate_index_vectors(n, focus, m)? {
            let term = if m == 2 {
                pair_term(source, focus, iv.parties[0], opts)?
            } else {
                let mut parties = vec![focus];
                parties.extend_from_slice(&iv.parties);
                match source {
                    StateSource::Pcs(_) if !opts.force_generic => MonogamyTerm {
                        parties,
                        m,
                        value: T::zero(),
                        method: Method::ClosedForm,
                    },
                    _ => {
                        let mut kept = parties.clone();
                        kept.sort_unstable();
                        let marginal = rho.partial_trace(&kept)?;
                        let fpos =
                            kept.iter().position(|&x| x == focus).expect("focus kept");
                        let value = multiparty_scren_mixed_raw(
                            &marginal,
                            fpos,
                            opts,
                            1,
                            term_salt(m, &iv.parties),
                        )?;
                        MonogamyTerm {
                            parties,
                            m,
                            value,
                            method: Method::Optimizer,
                        }
                    }
                }
            };
            all_closed = all_closed && term.method == Method::ClosedForm;
            terms.push(term);
        }
    }
    let tolerance = if all_closed {
        opts.closed_tol
    } else {
        opts.opt_tol
    };
    Ok(finish_report(
        Claim::StrongMonogamy,
        lhs.value,
        terms,
        tolerance,
        opts.roof.seed,
    ))
}

/// Report form of the zero multi-party SCREN check (`claim: nscren_zero`):
/// passes when `|n-SCREN| ≤ zero_tol`.
pub fn nscren_zero_report<T: Scalar>(
    source: &StateSource<T>,
    focus: usize,
    opts: &MonogamyOpts<T>,
) -> Result<MonogamyReport<T>> {
    let value = match source {
        StateSource::Pure(psi) => multiparty_scren_pure(psi, focus, opts)?.value,
        StateSource::Pcs(pcs) if !opts.force_generic => {
            // marginal chain of a PCS state stays PCS: zero by structure
            let _ = pcs;
            T::zero()
        }
        StateSource::Pcs(pcs) => {
            multiparty_scren_mixed(&build_pcs(pcs), focus, opts)?.value
        }
    };
    Ok(MonogamyReport {
        claim: Claim::NscrenZero,
        lhs: value,
        terms: Vec::new(),
        residual: value,
        tolerance: opts.zero_tol,
        pass: value.abs() <= opts.zero_tol,
        seed: opts.roof.seed,
    })
}

/// Report form of the reduction-law check (`claim: reduction`): residual is
/// the max entrywise difference between the symbolic reduction and the
/// numeric partial trace.
pub fn reduction_report<T: Scalar>(
    pcs: &PcsState<T>,
    traced: &[usize],
    opts: &MonogamyOpts<T>,
) -> Result<MonogamyReport<T>> {
    let reduced = reduce_pcs_symbolic(pcs, traced)?;
    let layout = pcs.layout();
    let kept = layout.complement(&layout.checked_proper_subset(traced)?);
    let numeric = build_pcs(pcs).partial_trace(&kept)?;
    let diff = max_entry_diff(build_pcs(&reduced).matrix(), numeric.matrix());
    Ok(MonogamyReport {
        claim: Claim::Reduction,
        lhs: T::zero(),
        terms: Vec::new(),
        residual: diff,
        tolerance: opts.closed_tol,
        pass: diff <= opts.closed_tol,
        seed: opts.roof.seed,
    })
}

/// Outcome of one named check inside [`verify_pcs`].
#[derive(Debug, Clone)]
pub struct CheckOutcome<T: Scalar> {
    pub name: &'static str,
    pub residual: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Bundled verification of a PCS state. Sub-operation errors are collected
/// per check, not aborted.
#[derive(Debug, Clone)]
pub struct PcsVerification<T: Scalar> {
    pub checks: Vec<CheckOutcome<T>>,
    pub errors: Vec<(&'static str, Error)>,
}

impl<T: Scalar> PcsVerification<T> {
    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

/// Runs the reduction-law, λ-independence, decomposition-independence,
/// CKW and strong-monogamy checks on one PCS state.
pub fn verify_pcs<T: Scalar>(pcs: &PcsState<T>, opts: &MonogamyOpts<T>) -> PcsVerification<T> {
    use crate::roof::{hjw_decomposition, random_unitary, roof_objective};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    let mut checks = Vec::new();
    let mut errors: Vec<(&'static str, Error)> = Vec::new();
    let n = pcs.n();

    // reduction law: every single-party trace-out, symbolic vs numeric
    if n >= 3 {
        let mut worst = T::zero();
        let mut ok = true;
        for party in 0..n {
            match reduction_report(pcs, &[party], opts) {
                Ok(report) => {
                    if report.residual > worst {
                        worst = report.residual;
                    }
                    // monotonicity of the reduced parameters
                    let reduced = reduce_pcs_symbolic(pcs, &[party]).expect("checked above");
                    ok = ok
                        && reduced.params().p() <= pcs.params().p()
                        && reduced.params().lam() <= pcs.params().lam();
                }
                Err(e) => errors.push(("reduction", e)),
            }
        }
        checks.push(CheckOutcome {
            name: "reduction",
            residual: worst,
            tolerance: opts.closed_tol,
            pass: ok && worst <= opts.closed_tol,
        });
    }

    // λ-independence: closed one-vs-rest SCREN is bit-identical across λ
    {
        let base = scren_pcs_one_vs_rest(pcs, 0).map(|m| m.value);
        let mut worst = T::zero();
        match base {
            Ok(base) => {
                for lam in [0.0, 0.3, 0.7, 1.0] {
                    let other = PcsState::new(
                        pcs.coeffs().clone(),
                        crate::states::PcsParams::new(pcs.params().p(), real(lam))
                            .expect("in range"),
                    );
                    match scren_pcs_one_vs_rest(&other, 0) {
                        Ok(v) => {
                            let d = (v.value - base).abs();
                            if d > worst {
                                worst = d;
                            }
                        }
                        Err(e) => errors.push(("lambda_independence", e)),
                    }
                }
                checks.push(CheckOutcome {
                    name: "lambda_independence",
                    residual: worst,
                    tolerance: opts.closed_tol,
                    pass: worst <= opts.closed_tol,
                });
            }
            Err(e) => errors.push(("lambda_independence", e)),
        }
    }

    // decomposition-independence: roof objective spread over random HJW
    // unitaries across the 1-vs-rest cut
    {
        let rho = build_pcs(pcs);
        let mut rng = ChaCha20Rng::seed_from_u64(mix_seed(opts.roof.seed, 0xdec0));
        let mut lo = T::zero();
        let mut hi = T::zero();
        let mut first = true;
        for _ in 0..20 {
            let rank = match eigen_rank(&rho) {
                Ok(r) => r,
                Err(e) => {
                    errors.push(("decomposition_independence", e));
                    break;
                }
            };
            let u = random_unitary::<T, _>(rank.max(2), &mut rng);
            let value = hjw_decomposition(&rho, &u).and_then(|dec| {
                roof_objective(&dec, &mut |psi: &PureState<T>| {
                    scren_pure(psi, &[0]).map(|m| m.value)
                })
            });
            match value {
                Ok(v) => {
                    if first {
                        lo = v;
                        hi = v;
                        first = false;
                    } else {
                        if v < lo {
                            lo = v;
                        }
                        if v > hi {
                            hi = v;
                        }
                    }
                }
                Err(e) => errors.push(("decomposition_independence", e)),
            }
        }
        if !first {
            let spread_tol = real(1e-9);
            checks.push(CheckOutcome {
                name: "decomposition_independence",
                residual: hi - lo,
                tolerance: spread_tol,
                pass: hi - lo <= spread_tol,
            });
        }
    }

    // CKW and strong-monogamy saturation
    if n >= 3 {
        let source = StateSource::Pcs(pcs.clone());
        match ckw_residual_scren(&source, 0, opts) {
            Ok(report) => checks.push(CheckOutcome {
                name: "ckw",
                residual: report.residual,
                tolerance: report.tolerance,
                pass: report.residual.abs() <= report.tolerance,
            }),
            Err(e) => errors.push(("ckw", e)),
        }
        match strong_monogamy_residual(&source, 0, opts) {
            Ok(report) => checks.push(CheckOutcome {
                name: "sm",
                residual: report.residual,
                tolerance: report.tolerance,
                pass: report.residual.abs() <= report.tolerance,
            }),
            Err(e) => errors.push(("sm", e)),
        }
    }

    PcsVerification { checks, errors }
}

fn eigen_rank<T: Scalar>(rho: &DensityMatrix<T>) -> Result<usize> {
    Ok(crate::roof::eigen_ensemble(rho)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::SubsystemLayout;
    use crate::states::{
        build_coherent_superposition, sample_random_wclass, PcsParams, WClassCoefficients,
    };
    use approx::assert_relative_eq;
    use nalgebra::{Complex, DVector};

    fn standard_pcs(p: f64, lam: f64) -> PcsState<f64> {
        PcsState::new(
            WClassCoefficients::standard_w(3).unwrap(),
            PcsParams::new(p, lam).unwrap(),
        )
    }

    fn ghz3() -> PureState<f64> {
        let layout = SubsystemLayout::uniform(3, 2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = DVector::zeros(8);
        amps[0] = Complex::new(r, 0.0);
        amps[7] = Complex::new(r, 0.0);
        PureState::new(layout, amps).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let vecs = enumerate_index_vectors(4, 0, 2).unwrap();
        assert_eq!(
            vecs.iter().map(|v| v.parties.clone()).collect::<Vec<_>>(),
            vec![vec![1], vec![2], vec![3]]
        );
        let vecs = enumerate_index_vectors(4, 0, 3).unwrap();
        assert_eq!(
            vecs.iter().map(|v| v.parties.clone()).collect::<Vec<_>>(),
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(enumerate_index_vectors(5, 0, 3).unwrap().len(), 6);
        assert!(matches!(
            enumerate_index_vectors(4, 0, 4),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            enumerate_index_vectors(4, 0, 1),
            Err(Error::LevelOutOfRange { .. })
        ));
        // focus never appears
        for v in enumerate_index_vectors(5, 2, 3).unwrap() {
            assert!(!v.parties.contains(&2));
        }
    }

    #[test]
    fn ckw_running_example_closed() {
        let source = StateSource::Pcs(standard_pcs(0.5, 0.7));
        let report = ckw_residual_scren(&source, 0, &MonogamyOpts::default()).unwrap();
        assert_relative_eq!(report.lhs, 2.0 / 9.0, epsilon = 1e-14);
        assert_eq!(report.terms.len(), 2);
        for t in &report.terms {
            assert_relative_eq!(t.value, 1.0 / 9.0, epsilon = 1e-14);
            assert_eq!(t.method, Method::ClosedForm);
        }
        assert!(report.residual.abs() < 1e-14);
        assert!(report.pass);
    }

    #[test]
    fn ckw_vacuum_is_all_zeros() {
        let source = StateSource::Pcs(standard_pcs(0.0, 0.4));
        let report = ckw_residual_scren(&source, 0, &MonogamyOpts::default()).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert!(report.terms.iter().all(|t| t.value == 0.0));
        assert!(report.pass);
    }

    #[test]
    fn ckw_four_party_uniform_closed_and_generic() {
        let pcs: PcsState<f64> = PcsState::new(
            WClassCoefficients::standard_w(4).unwrap(),
            PcsParams::new(1.0, 0.0).unwrap(),
        );
        let source = StateSource::Pcs(pcs);
        let opts = MonogamyOpts::default();
        let report = ckw_residual_scren(&source, 0, &opts).unwrap();
        assert_relative_eq!(report.lhs, 3.0 / 4.0, epsilon = 1e-14);
        for t in &report.terms {
            assert_relative_eq!(t.value, 1.0 / 4.0, epsilon = 1e-14);
        }
        assert!(report.residual.abs() < 1e-12);

        let generic = MonogamyOpts {
            force_generic: true,
            ..MonogamyOpts::default()
        };
        let gr = ckw_residual_scren(&source, 0, &generic).unwrap();
        assert!((gr.lhs - report.lhs).abs() < 1e-4);
        assert!(gr.residual.abs() < 1e-4, "residual {}", gr.residual);
    }

    #[test]
    fn ckw_rejects_small_systems() {
        let layout = SubsystemLayout::uniform(2, 2).unwrap();
        let psi = PureState::<f64>::basis_state(layout, 0).unwrap();
        assert!(matches!(
            ckw_residual_scren(&StateSource::Pure(psi), 0, &MonogamyOpts::default()),
            Err(Error::TooFewParties(3))
        ));
    }

    #[test]
    fn ghz_multiparty_scren_is_one() {
        let opts = MonogamyOpts::default();
        let m = multiparty_scren_pure(&ghz3(), 0, &opts).unwrap();
        assert!((m.value - 1.0).abs() < 1e-6, "value {}", m.value);
    }

    #[test]
    fn coherent_superpositions_have_zero_residual() {
        let opts = MonogamyOpts::default();
        for seed in 0..5u64 {
            let coeffs = sample_random_wclass::<f64>(3, 2, 400 + seed).unwrap();
            let p = 0.1 + 0.2 * seed as f64;
            let psi = build_coherent_superposition(&coeffs, p).unwrap();
            let m = multiparty_scren_pure(&psi, 0, &opts).unwrap();
            assert!(m.value.abs() < 1e-6, "seed {seed}: {}", m.value);
        }
    }

    #[test]
    fn pcs_mixed_multiparty_scren_is_zero() {
        let opts = MonogamyOpts::default();
        let rho = build_pcs(&standard_pcs(0.5, 0.7));
        let m = multiparty_scren_mixed(&rho, 0, &opts).unwrap();
        assert!(m.value.abs() < 1e-6, "value {}", m.value);
        // pure-projector input reduces to the pure measure
        let rho = DensityMatrix::from_pure(&ghz3());
        let m = multiparty_scren_mixed(&rho, 0, &opts).unwrap();
        assert!((m.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sm_four_party_closed_example() {
        let pcs: PcsState<f64> = PcsState::new(
            WClassCoefficients::standard_w(4).unwrap(),
            PcsParams::new(0.5, 0.3).unwrap(),
        );
        let report =
            strong_monogamy_residual(&StateSource::Pcs(pcs), 0, &MonogamyOpts::default()).unwrap();
        assert_relative_eq!(report.lhs, 3.0 / 16.0, epsilon = 1e-14);
        assert_eq!(report.terms.len(), 6);
        let pairs: Vec<_> = report.terms.iter().filter(|t| t.m == 2).collect();
        let triples: Vec<_> = report.terms.iter().filter(|t| t.m == 3).collect();
        assert_eq!(pairs.len(), 3);
        assert_eq!(triples.len(), 3);
        for t in &pairs {
            assert_relative_eq!(t.value, 1.0 / 16.0, epsilon = 1e-14);
        }
        for t in &triples {
            assert_eq!(t.value, 0.0);
        }
        assert!(report.residual.abs() < 1e-12);
        // residual recomputable from the stored fields
        let recomputed: f64 = report.lhs
            - report
                .terms
                .iter()
                .map(MonogamyTerm::contribution)
                .sum::<f64>();
        assert!((recomputed - report.residual).abs() < 1e-15);
    }

    #[test]
    fn sm_three_party_matches_ckw() {
        let source = StateSource::Pcs(standard_pcs(0.5, 0.7));
        let opts = MonogamyOpts::default();
        let sm = strong_monogamy_residual(&source, 0, &opts).unwrap();
        let ckw = ckw_residual_scren(&source, 0, &opts).unwrap();
        assert_eq!(sm.terms.len(), ckw.terms.len());
        assert_relative_eq!(sm.residual, ckw.residual, epsilon = 1e-14);
    }

    #[test]
    fn sm_generic_path_four_party() {
        let pcs = PcsState::new(
            sample_random_wclass::<f64>(4, 2, 77).unwrap(),
            PcsParams::new(0.6, 0.4).unwrap(),
        );
        let opts = MonogamyOpts {
            force_generic: true,
            ..MonogamyOpts::default()
        };
        let report = strong_monogamy_residual(&StateSource::Pcs(pcs), 0, &opts).unwrap();
        assert_eq!(report.terms.len(), 6);
        assert!(report.residual.abs() < 1e-4, "residual {}", report.residual);
        for t in report.terms.iter().filter(|t| t.m == 3) {
            assert_eq!(t.method, Method::Optimizer);
            assert!(t.value.abs() < 1e-6, "m=3 term {}", t.value);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let pcs = PcsState::new(
            sample_random_wclass::<f64>(3, 2, 5).unwrap(),
            PcsParams::new(0.4, 0.8).unwrap(),
        );
        let opts = MonogamyOpts {
            force_generic: true,
            ..MonogamyOpts::default()
        };
        let a = ckw_residual_scren(&StateSource::Pcs(pcs.clone()), 0, &opts).unwrap();
        let b = ckw_residual_scren(&StateSource::Pcs(pcs), 0, &opts).unwrap();
        assert_eq!(a.lhs, b.lhs);
        assert_eq!(a.residual, b.residual);
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert_eq!(x.value, y.value);
        }
    }

    #[test]
    fn nscren_and_reduction_reports() {
        let pcs = standard_pcs(0.5, 0.7);
        let opts = MonogamyOpts::default();
        let z = nscren_zero_report(&StateSource::Pcs(pcs.clone()), 0, &opts).unwrap();
        assert_eq!(z.claim.as_str(), "nscren_zero");
        assert!(z.pass);
        let r = reduction_report(&pcs, &[2], &opts).unwrap();
        assert_eq!(r.claim.as_str(), "reduction");
        assert!(r.pass, "residual {}", r.residual);
    }

    #[test]
    fn verify_pcs_bundle() {
        let opts = MonogamyOpts::default();
        let v = verify_pcs(&standard_pcs(0.5, 0.7), &opts);
        assert!(v.all_pass(), "checks: {:?} errors: {:?}", v.checks, v.errors);
        assert!(v.checks.iter().any(|c| c.name == "reduction"));
        assert!(v.checks.iter().any(|c| c.name == "sm"));
        // boundary cases stay green
        assert!(verify_pcs(&standard_pcs(1.0, 0.0), &opts).all_pass());
        assert!(verify_pcs(&standard_pcs(0.0, 1.0), &opts).all_pass());
    }
}
