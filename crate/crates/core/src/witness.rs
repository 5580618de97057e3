//! Steering witnesses, the noisy device-independent payoff, the triple Bell
//! operator and the comparison against the DI entanglement witness.

use core::f64::consts::SQRT_2;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{Behavior, BehaviorError};
use crate::linalg::{kron, kron_all, DenseOperator, LinalgError};
use crate::model::{bell_phi_plus, pauli_matrix, tau_input, ModelError, Outcome};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("expected a {expected}-dimensional density matrix, got dimension {got}")]
    Dimension { expected: usize, got: usize },
    #[error("input is not a density matrix")]
    NotDensity,
    #[error("fidelity {0} outside [0, 1]")]
    Fidelity(f64),
    #[error("{name} = {value} outside [0, 1]")]
    Parameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum WitnessKind {
    #[cfg_attr(feature = "serde", serde(rename = "W_S"))]
    WS,
    #[cfg_attr(feature = "serde", serde(rename = "W_QRS"))]
    WQrs,
    #[cfg_attr(feature = "serde", serde(rename = "W_DI"))]
    WDi,
    #[cfg_attr(feature = "serde", serde(rename = "payoff"))]
    Payoff,
    #[cfg_attr(feature = "serde", serde(rename = "triple_bell"))]
    TripleBell,
    #[cfg_attr(feature = "serde", serde(rename = "bowles"))]
    Bowles,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::WS => "W_S",
            WitnessKind::WQrs => "W_QRS",
            WitnessKind::WDi => "W_DI",
            WitnessKind::Payoff => "payoff",
            WitnessKind::TripleBell => "triple_bell",
            WitnessKind::Bowles => "bowles",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WitnessReport {
    pub kind: WitnessKind,
    pub value: f64,
    pub threshold: f64,
    pub violated: bool,
    pub stderr: Option<f64>,
}

impl WitnessReport {
    pub fn new(kind: WitnessKind, value: f64, threshold: f64) -> Self {
        Self { kind, value, threshold, violated: value > threshold, stderr: None }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    /// Distance above the threshold in units of `stderr`, if one is attached.
    pub fn sigmas(&self) -> Option<f64> {
        self.stderr.map(|s| (self.value - self.threshold) / s)
    }
}

/// Deterministic sign choice for a correlator, ties go to `+1`.
pub fn optimal_sign(correlator: f64) -> f64 {
    if correlator >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn check_two_qubit(rho: &DenseOperator) -> Result<(), WitnessError> {
    if rho.dim() != 4 {
        return Err(WitnessError::Dimension { expected: 4, got: rho.dim() });
    }
    if !rho.is_density() {
        return Err(WitnessError::NotDensity);
    }
    Ok(())
}

fn check_unit(name: &'static str, value: f64) -> Result<(), WitnessError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(WitnessError::Parameter { name, value });
    }
    Ok(())
}

fn check_fidelities(f: [f64; 3]) -> Result<(), WitnessError> {
    for fj in f {
        if !(0.0..=1.0).contains(&fj) {
            return Err(WitnessError::Fidelity(fj));
        }
    }
    Ok(())
}

/// `Tr[(sigma_j x sigma_j) rho]` for `j = 1, 2, 3`.
pub fn pauli_correlators(rho: &DenseOperator) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, slot) in out.iter_mut().enumerate() {
        let s = pauli_matrix(j + 1);
        *slot = rho.trace_product(&kron(&s, &s)).re;
    }
    out
}

/// `W_S = sum_j |<sigma_j x sigma_j>| - sqrt3`.
pub fn w_s_three_pauli(rho: &DenseOperator) -> Result<WitnessReport, WitnessError> {
    check_two_qubit(rho)?;
    let value = pauli_correlators(rho).iter().map(|t| optimal_sign(*t) * t).sum::<f64>() - SQRT_3;
    Ok(WitnessReport::new(WitnessKind::WS, value, 0.0))
}

/// Given `sum_{a,b} a b P(a, Yes, b | j)` and `sum_{a,b} P(a, Yes, b | j)` per
/// setting, returns `sum_j [s_j C_j - P_j / sqrt3]`.
fn yes_weighted(correlators: [f64; 3], yes: [f64; 3]) -> f64 {
    (0..3).map(|j| optimal_sign(correlators[j]) * correlators[j] - yes[j] / SQRT_3).sum()
}

/// Quantum-refereed witness with inputs `tau_{b,j}^T` and Bob's partial BSM.
///
/// Evaluated on `rho_AB x tau^T` (8 dimensions) with `g_{b,j} = b`.
pub fn w_qrs(rho: &DenseOperator) -> Result<WitnessReport, WitnessError> {
    check_two_qubit(rho)?;
    let yes_bb0 = bell_phi_plus(2)?.projector();
    let mut corr = [0.0; 3];
    let mut yes = [0.0; 3];
    for j in 1..=3 {
        for b in Outcome::ALL {
            let state = kron(rho, &tau_input(b, j)?.transpose());
            for a in Outcome::ALL {
                let alice = crate::model::pauli(j)?.projector(a);
                let p = state.trace_product(&kron(&alice, &yes_bb0)).re;
                corr[j - 1] += a.value() * b.value() * p;
                yes[j - 1] += p;
            }
        }
    }
    Ok(WitnessReport::new(WitnessKind::WQrs, yes_weighted(corr, yes), 0.0))
}

/// Device-independent witness on `rho_AB x |Phi+><Phi+|_{B0 C}` with Charlie
/// measuring `sigma_j`. Subsystem order is `A, B, B0, C`.
pub fn w_di(rho: &DenseOperator) -> Result<WitnessReport, WitnessError> {
    check_two_qubit(rho)?;
    let phi = bell_phi_plus(2)?.projector();
    let state = kron(rho, &phi);
    let mut corr = [0.0; 3];
    let mut yes = [0.0; 3];
    for j in 1..=3 {
        let sigma = crate::model::pauli(j)?;
        for a in Outcome::ALL {
            for c in Outcome::ALL {
                let op = kron_all(&[&sigma.projector(a), &phi, &sigma.projector(c)]);
                let p = state.trace_product(&op).re;
                corr[j - 1] += a.value() * c.value() * p;
                yes[j - 1] += p;
            }
        }
    }
    Ok(WitnessReport::new(WitnessKind::WDi, yes_weighted(corr, yes), 0.0))
}

/// Scale of the noisy witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoffScale {
    /// `4 sum_j [...] - sum_j sqrt(1 - f_j)`; the canonical form.
    Canonical,
    /// Canonical value divided by four.
    Quarter,
    /// `W_DI - sum_j sqrt(1 - f_j)` with the unscaled penalty.
    MainText,
}

/// Sum of `sqrt(1 - f_j)`.
pub fn fidelity_penalty(f: [f64; 3]) -> f64 {
    f.iter().map(|fj| (1.0 - fj).max(0.0).sqrt()).sum()
}

/// Canonical noisy DI payoff
/// `4 sum_j [s_j sum_{a,c} a c P(a,Yes,c|j,j) - sum_{a,c} P(a,Yes,c|j,j)/sqrt3] - sum_j sqrt(1 - f_j)`.
pub fn noisy_payoff(beh: &Behavior, f: [f64; 3]) -> Result<WitnessReport, WitnessError> {
    payoff_view(beh, f, PayoffScale::Canonical)
}

pub fn payoff_view(beh: &Behavior, f: [f64; 3], scale: PayoffScale) -> Result<WitnessReport, WitnessError> {
    check_fidelities(f)?;
    beh.validate()?;
    let corr = [beh.yes_correlator(1, 1), beh.yes_correlator(2, 2), beh.yes_correlator(3, 3)];
    let yes = [beh.yes_probability(1, 1), beh.yes_probability(2, 2), beh.yes_probability(3, 3)];
    let w_di = yes_weighted(corr, yes);
    let penalty = fidelity_penalty(f);
    let value = match scale {
        PayoffScale::Canonical => 4.0 * w_di - penalty,
        PayoffScale::Quarter => w_di - penalty / 4.0,
        PayoffScale::MainText => w_di - penalty,
    };
    Ok(WitnessReport::new(WitnessKind::Payoff, value, 0.0))
}

/// Least Werner visibility certified by the noisy witness:
/// `(sqrt3 + sum_j sqrt(1 - f_j)) / 3`.
pub fn noisy_threshold(f: [f64; 3]) -> Result<f64, WitnessError> {
    check_fidelities(f)?;
    Ok((SQRT_3 + fidelity_penalty(f)) / 3.0)
}

/// Common fidelity `f` at which `3v - sqrt3 - 3 sqrt(1 - f) = 0`.
pub fn equal_fidelity_boundary(v: f64) -> Result<f64, WitnessError> {
    check_unit("v", v)?;
    let root = (3.0 * v - SQRT_3) / 3.0;
    if root < 0.0 {
        return Ok(f64::NAN);
    }
    Ok(1.0 - root * root)
}

/// Triple Bell operator and its three CHSH lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleBell {
    pub lines: [f64; 3],
    pub report: WitnessReport,
}

/// Quantum maximum of the triple Bell operator.
pub const TRIPLE_BELL_CAP: f64 = 6.0 * SQRT_2;

/// Per-line CHSH expressions over Bob's six settings:
/// `E11 + E21 + E12 - E22`, `E31 + E41 - E33 + E43`, `E52 + E62 - E53 + E63`.
pub fn chsh_lines(beh: &Behavior) -> [f64; 3] {
    let e = |y, z| beh.correlator(y, z);
    [
        e(1, 1) + e(2, 1) + e(1, 2) - e(2, 2),
        e(3, 1) + e(4, 1) - e(3, 3) + e(4, 3),
        e(5, 2) + e(6, 2) - e(5, 3) + e(6, 3),
    ]
}

/// Sum of the three CHSH lines; the local bound is 2 per line.
pub fn triple_bell(beh: &Behavior) -> Result<TripleBell, WitnessError> {
    beh.validate()?;
    let lines = chsh_lines(beh);
    let report = WitnessReport::new(WitnessKind::TripleBell, lines.iter().sum(), 6.0);
    Ok(TripleBell { lines, report })
}

/// Optimal CHSH value of `werner(v)`: `2 sqrt2 v`.
pub fn chsh_of_werner(v: f64) -> f64 {
    2.0 * SQRT_2 * v
}

/// Optimal CHSH value of an arbitrary two-qubit state: `2 sqrt(t1^2 + t2^2)`
/// with `t1 >= t2` the largest singular values of the correlation matrix.
pub fn optimal_chsh(rho: &DenseOperator) -> Result<f64, WitnessError> {
    check_two_qubit(rho)?;
    let mut t = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            let op = kron(&pauli_matrix(i + 1), &pauli_matrix(j + 1));
            t[i * 3 + j] = rho.trace_product(&op).re;
        }
    }
    let mut tt = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            tt[i * 3 + j] = (0..3).map(|k| t[k * 3 + i] * t[k * 3 + j]).sum();
        }
    }
    let eig = crate::linalg::symmetric_eigen(&tt, 3);
    Ok(2.0 * (eig.values[1].max(0.0) + eig.values[2].max(0.0)).sqrt())
}

/// Both sides of the DI entanglement-witness comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BowlesComparison {
    pub lhs: f64,
    pub rhs: f64,
    pub certified: bool,
}

/// `lhs = ((1 - 3v) eta^2 + 2 eta (1 - eta) + (1 - eta)^2 / 4) / 16`,
/// `rhs = -12 ((2 sqrt(1 - sqrt f) - 2 sqrt f + 2)^2 - 2 sqrt f + 2 sqrt(1 - sqrt f) + 2)`,
/// certified when `lhs <= rhs`.
pub fn bowles_comparison(v: f64, eta: f64, f: f64) -> Result<BowlesComparison, WitnessError> {
    check_unit("v", v)?;
    check_unit("eta", eta)?;
    check_unit("f", f)?;
    let lhs = ((1.0 - 3.0 * v) * eta * eta + 2.0 * eta * (1.0 - eta) + 0.25 * (1.0 - eta) * (1.0 - eta)) / 16.0;
    let rf = f.sqrt();
    let g = (1.0 - rf).max(0.0).sqrt();
    let inner = 2.0 * g - 2.0 * rf + 2.0;
    let rhs = -12.0 * (inner * inner - 2.0 * rf + 2.0 * g + 2.0);
    Ok(BowlesComparison { lhs, rhs, certified: lhs <= rhs })
}

/// Smallest average fidelity certified by [`bowles_comparison`], by bisection.
/// `None` when even `f = 1` does not certify.
pub fn bowles_min_fidelity(v: f64, eta: f64) -> Result<Option<f64>, WitnessError> {
    if !bowles_comparison(v, eta, 1.0)?.certified {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if bowles_comparison(v, eta, lo)?.certified {
        return Ok(Some(0.0));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bowles_comparison(v, eta, mid)?.certified {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
