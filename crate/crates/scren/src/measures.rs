//! Closed-form and spectral entanglement measures: negativity, pure-state
//! SCREN, the qubit tangle, and the exact SCREN formulas for PCS states.
//!
//! Negativity follows the unnormalized convention `‖ρ^{T_B}‖₁ − 1` (some
//! of the literature divides by `d − 1`). Closed-form operations never
//! invoke the optimizer; cross-validation between routes is a test concern.

use crate::error::{Error, Result};
use crate::linalg::{schmidt_coefficients, trace_norm, DensityMatrix, PureState};
use crate::states::PcsState;
use crate::{to_f64, Scalar};

/// How a measure value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Spectral,
    Optimizer,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Spectral => "spectral",
            Method::Optimizer => "optimizer",
        }
    }
}

/// A nonnegative measure value with provenance and diagnostics.
///
/// Raw values may dip slightly negative from roundoff; they are clamped to
/// zero on construction (values below `-1e-9` indicate a bug upstream).
#[derive(Debug, Clone)]
pub struct MeasureValue<T: Scalar> {
    pub value: T,
    pub method: Method,
    pub detail: String,
}

impl<T: Scalar> MeasureValue<T> {
    pub fn new(raw: T, method: Method, detail: impl Into<String>) -> Self {
        debug_assert!(
            to_f64(raw) >= -1e-9,
            "measure raw value {} below clamp threshold",
            to_f64(raw)
        );
        Self {
            value: if raw < T::zero() { T::zero() } else { raw },
            method,
            detail: detail.into(),
        }
    }
}

/// Pure-state negativity across `cut | complement`, via Schmidt
/// coefficients: `(Σ_i √λ_i)² − 1` over the squared coefficients `λ_i`.
pub fn negativity_pure<T: Scalar>(psi: &PureState<T>, cut: &[usize]) -> Result<MeasureValue<T>> {
    let coeffs = schmidt_coefficients(psi, cut)?;
    let sum = coeffs.into_iter().fold(T::zero(), |acc, c| acc + c);
    Ok(MeasureValue::new(
        sum * sum - T::one(),
        Method::Spectral,
        "schmidt",
    ))
}

/// Pure-state negativity via the trace norm of the partial transpose over
/// the cut complement. Independent route kept for cross-validation against
/// [`negativity_pure`].
pub fn negativity_pure_trace_norm<T: Scalar>(
    psi: &PureState<T>,
    cut: &[usize],
) -> Result<MeasureValue<T>> {
    let cut = psi.layout().checked_proper_subset(cut)?;
    let complement = psi.layout().complement(&cut);
    let rho = DensityMatrix::from_pure(psi);
    let pt = rho.partial_transpose(&complement)?;
    Ok(MeasureValue::new(
        trace_norm(&pt)? - T::one(),
        Method::Spectral,
        "trace_norm",
    ))
}

/// Pure-state SCREN: the squared negativity. For Schmidt-rank-2 cuts this
/// equals `4λ₁λ₂`, coinciding with the tangle.
pub fn scren_pure<T: Scalar>(psi: &PureState<T>, cut: &[usize]) -> Result<MeasureValue<T>> {
    let neg = negativity_pure(psi, cut)?;
    Ok(MeasureValue::new(
        neg.value * neg.value,
        Method::Spectral,
        "schmidt",
    ))
}

/// Pure-state tangle `4·det(ρ_cut)` for a cut whose side is a single qubit.
pub fn tangle_pure_qubit<T: Scalar>(psi: &PureState<T>, cut: &[usize]) -> Result<MeasureValue<T>> {
    let cut = psi.layout().checked_proper_subset(cut)?;
    if cut.len() != 1 || psi.layout().dim(cut[0]) != 2 {
        return Err(Error::NotAQubitCut);
    }
    let marginal = crate::linalg::pure_marginal(psi, &cut);
    let det = (marginal[(0, 0)] * marginal[(1, 1)] - marginal[(0, 1)] * marginal[(1, 0)]).re;
    let four = T::one() + T::one() + T::one() + T::one();
    Ok(MeasureValue::new(four * det, Method::Spectral, "marginal determinant"))
}

fn four_p_sq<T: Scalar>(pcs: &PcsState<T>) -> T {
    let p = pcs.params().p();
    let four = T::one() + T::one() + T::one() + T::one();
    four * p * p
}

/// Closed-form SCREN of a PCS state across `focus | rest`:
/// `4p²·X_focus·Σ_{i≠focus} X_i`. Independent of λ.
pub fn scren_pcs_one_vs_rest<T: Scalar>(
    pcs: &PcsState<T>,
    focus: usize,
) -> Result<MeasureValue<T>> {
    if focus >= pcs.n() {
        return Err(Error::PartyOutOfRange {
            index: focus,
            parties: pcs.n(),
        });
    }
    let rest = (0..pcs.n())
        .filter(|&i| i != focus)
        .fold(T::zero(), |acc, i| acc + pcs.coeffs().party_weight(i));
    Ok(MeasureValue::new(
        four_p_sq(pcs) * pcs.coeffs().party_weight(focus) * rest,
        Method::ClosedForm,
        "pcs one-vs-rest",
    ))
}

/// Closed-form two-party SCREN of the PCS marginal on parties `(i, j)`:
/// `4p²·X_i·X_j`. Symmetric and independent of λ.
pub fn scren_pcs_pair<T: Scalar>(pcs: &PcsState<T>, i: usize, j: usize) -> Result<MeasureValue<T>> {
    if i == j {
        return Err(Error::DuplicateParty);
    }
    for &k in &[i, j] {
        if k >= pcs.n() {
            return Err(Error::PartyOutOfRange {
                index: k,
                parties: pcs.n(),
            });
        }
    }
    Ok(MeasureValue::new(
        four_p_sq(pcs) * pcs.coeffs().party_weight(i) * pcs.coeffs().party_weight(j),
        Method::ClosedForm,
        "pcs pair",
    ))
}
