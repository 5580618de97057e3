//! States, observables, POVMs and wave-plate settings used by the protocol.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use thiserror::Error;

use crate::linalg::{DenseOperator, Ket, LinalgError};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("Pauli index must be 1, 2 or 3, got {0}")]
    PauliIndex(usize),
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("visibility {0} outside [0, 1]")]
    Visibility(f64),
    #[error("CHSH pair needs distinct indices, got ({0}, {1})")]
    ChshPair(usize, usize),
    #[error("observable {0} is not Hermitian")]
    NotHermitian(String),
    #[error("observable {0} does not square to the identity")]
    NotDichotomic(String),
    #[error("POVM elements must be PSD and sum to the identity")]
    InvalidPovm,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Outcome of a dichotomic measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    /// Table slot: `+1 -> 0`, `-1 -> 1`.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

/// Hermitian observable with a setting label.
///
/// Dichotomic observables have outcomes labelled `+1` / `-1` explicitly; the
/// outcome projectors are `(I ± O)/2`, never taken from an eigenvector ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: DenseOperator,
    label: String,
}

impl Observable {
    pub fn new(matrix: DenseOperator, label: impl Into<String>) -> Result<Self, ModelError> {
        let label = label.into();
        if !matrix.is_hermitian() {
            return Err(ModelError::NotHermitian(label));
        }
        Ok(Self { matrix, label })
    }

    /// Hermitian and `O^2 = I` within the spectral tolerance.
    pub fn dichotomic(matrix: DenseOperator, label: impl Into<String>) -> Result<Self, ModelError> {
        let obs = Self::new(matrix, label)?;
        if !obs.is_dichotomic() {
            return Err(ModelError::NotDichotomic(obs.label));
        }
        Ok(obs)
    }

    pub fn matrix(&self) -> &DenseOperator {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_dichotomic(&self) -> bool {
        let sq = &self.matrix * &self.matrix;
        sq.approx_eq(&DenseOperator::identity(self.dim()), tol::SPECTRAL)
    }

    /// Outcome projector `(I + o O)/2`.
    pub fn projector(&self, o: Outcome) -> DenseOperator {
        let id = DenseOperator::identity(self.dim());
        &id.scale_real(0.5) + &self.matrix.scale_real(0.5 * o.value())
    }

    pub fn negated(&self) -> Self {
        Self { matrix: self.matrix.scale_real(-1.0), label: format!("-{}", self.label) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<DenseOperator>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<DenseOperator>, labels: Vec<String>) -> Result<Self, ModelError> {
        let Some(first) = elements.first() else {
            return Err(ModelError::InvalidPovm);
        };
        if labels.len() != elements.len() {
            return Err(ModelError::InvalidPovm);
        }
        let dim = first.dim();
        let mut sum = DenseOperator::zeros(dim);
        for e in &elements {
            if e.dim() != dim || !e.is_psd(tol::SPECTRAL) {
                return Err(ModelError::InvalidPovm);
            }
            sum = &sum + e;
        }
        if !sum.approx_eq(&DenseOperator::identity(dim), tol::SPECTRAL) {
            return Err(ModelError::InvalidPovm);
        }
        Ok(Self { elements, labels })
    }

    pub fn elements(&self) -> &[DenseOperator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `sigma_x`, `sigma_y`, `sigma_z` for `j = 1, 2, 3`.
pub fn pauli(j: usize) -> Result<Observable, ModelError> {
    let (m, label) = match j {
        1 => ([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)], "X"),
        2 => ([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)], "Y"),
        3 => ([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)], "Z"),
        _ => return Err(ModelError::PauliIndex(j)),
    };
    Ok(Observable { matrix: DenseOperator::from_vec(2, m.to_vec())?, label: label.into() })
}

pub(crate) fn pauli_matrix(j: usize) -> DenseOperator {
    pauli(j).expect("index in 1..=3").matrix
}

/// `|Phi+_d> = sum_j |jj> / sqrt(d)`.
pub fn bell_phi_plus(d: usize) -> Result<Ket, ModelError> {
    if d < 2 {
        return Err(ModelError::Dimension(d));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        amps[j * d + j] = c(amp, 0.0);
    }
    Ok(Ket::new(amps))
}

/// `|Psi-> = (|01> - |10>)/sqrt(2)`.
pub fn singlet() -> Ket {
    Ket::from_real(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0])
}

fn check_visibility(v: f64) -> Result<(), ModelError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(ModelError::Visibility(v));
    }
    Ok(())
}

/// `v |Psi-><Psi-| + (1 - v) I/4`.
pub fn werner(v: f64) -> Result<DenseOperator, ModelError> {
    check_visibility(v)?;
    Ok(mixed_with_white_noise(&singlet(), v))
}

/// `w |Phi+><Phi+| + (1 - w) I/4`.
pub fn depolarized_phi_plus(w: f64) -> Result<DenseOperator, ModelError> {
    check_visibility(w)?;
    Ok(mixed_with_white_noise(&bell_phi_plus(2)?, w))
}

fn mixed_with_white_noise(psi: &Ket, v: f64) -> DenseOperator {
    let n = psi.dim();
    &psi.projector().scale_real(v) + &DenseOperator::identity(n).scale_real((1.0 - v) / n as f64)
}

/// Input state `tau_{b,j} = (I + b sigma_j)/2`.
pub fn tau_input(b: Outcome, j: usize) -> Result<DenseOperator, ModelError> {
    Ok(pauli(j)?.projector(b))
}

/// Bob's CHSH pair `((sigma_i + sigma_j)/sqrt2, (sigma_i - sigma_j)/sqrt2)`.
pub fn bob_chsh_observables(i: usize, j: usize) -> Result<(Observable, Observable), ModelError> {
    if i == j {
        return Err(ModelError::ChshPair(i, j));
    }
    let (si, sj) = (pauli(i)?, pauli(j)?);
    let plus = (&si.matrix + &sj.matrix).scale_real(FRAC_1_SQRT_2);
    let minus = (&si.matrix - &sj.matrix).scale_real(FRAC_1_SQRT_2);
    Ok((
        Observable::dichotomic(plus, format!("{}+{}", si.label, sj.label))?,
        Observable::dichotomic(minus, format!("{}-{}", si.label, sj.label))?,
    ))
}

/// Partial Bell-state measurement `{B1, I - B1}` with `B1 = |Phi+_d><Phi+_d|` ("Yes").
pub fn partial_bsm(d: usize) -> Result<Povm, ModelError> {
    let yes = bell_phi_plus(d)?.projector();
    let no = &DenseOperator::identity(d * d) - &yes;
    Povm::new(vec![yes, no], vec!["yes".into(), "no".into()])
}

/// Quarter- then half-wave plate in front of an H/V analyzer. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    pub qwp_deg: f64,
    pub hwp_deg: f64,
}

impl WaveplateSetting {
    pub const fn new(qwp_deg: f64, hwp_deg: f64) -> Self {
        Self { qwp_deg, hwp_deg }
    }
}

/// Quarter-wave plate Jones matrix with fast axis at `theta` (global phase dropped).
pub fn qwp_jones(theta_deg: f64) -> DenseOperator {
    let t = theta_deg.to_radians();
    let (s, co) = t.sin_cos();
    let off = c(1.0, -1.0) * (s * co);
    DenseOperator::from_vec(2, vec![c(co * co, s * s), off, off, c(s * s, co * co)])
        .expect("2x2")
}

/// Half-wave plate Jones matrix `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`.
pub fn hwp_jones(theta_deg: f64) -> DenseOperator {
    let (s2, c2) = (2.0 * theta_deg.to_radians()).sin_cos();
    DenseOperator::from_real(2, &[c2, s2, s2, -c2]).expect("2x2")
}

/// Observable measured by QWP, then HWP, then a polarizing beam splitter
/// (H = +1): `U^dagger sigma_z U` with `U = HWP * QWP`.
pub fn waveplate_observable(s: WaveplateSetting) -> Observable {
    let u = &hwp_jones(s.hwp_deg) * &qwp_jones(s.qwp_deg);
    let m = &(&u.dagger() * &pauli_matrix(3)) * &u;
    Observable {
        matrix: m,
        label: format!("QWP {:.2} / HWP {:.2}", s.qwp_deg, s.hwp_deg),
    }
}

/// One row of the wave-plate table used for the self-testing measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub party: &'static str,
    pub observable: &'static str,
    pub setting: WaveplateSetting,
    /// Target Bloch direction `(x, y, z)` before any `sigma_y` sign convention.
    pub target: [f64; 3],
}

const H: f64 = FRAC_1_SQRT_2;

/// Wave-plate settings for Bob's and Charlie's self-testing measurements.
///
/// The Y+Z row uses a half-wave plate at 11.25 degrees; 11.45 degrees does
/// not produce `(Y+Z)/sqrt2` (see [`YZ_HWP_11_45`]).
pub const WAVEPLATE_TABLE: [TableRow; 9] = [
    TableRow { party: "Bob", observable: "X+Z", setting: WaveplateSetting::new(22.5, 11.25), target: [H, 0.0, H] },
    TableRow { party: "Bob", observable: "X-Z", setting: WaveplateSetting::new(-22.5, -56.25), target: [H, 0.0, -H] },
    TableRow { party: "Bob", observable: "X+Y", setting: WaveplateSetting::new(45.0, 33.75), target: [H, H, 0.0] },
    TableRow { party: "Bob", observable: "X-Y", setting: WaveplateSetting::new(45.0, 11.25), target: [H, -H, 0.0] },
    TableRow { party: "Bob", observable: "Y+Z", setting: WaveplateSetting::new(0.0, 11.25), target: [0.0, H, H] },
    TableRow { party: "Bob", observable: "Y-Z", setting: WaveplateSetting::new(0.0, -56.25), target: [0.0, H, -H] },
    TableRow { party: "Charlie", observable: "X", setting: WaveplateSetting::new(45.0, 22.5), target: [1.0, 0.0, 0.0] },
    TableRow { party: "Charlie", observable: "Z", setting: WaveplateSetting::new(0.0, 0.0), target: [0.0, 0.0, 1.0] },
    TableRow { party: "Charlie", observable: "Y", setting: WaveplateSetting::new(0.0, 22.5), target: [0.0, 1.0, 0.0] },
];

/// Y+Z row with the half-wave plate at 11.45 degrees.
pub const YZ_HWP_11_45: WaveplateSetting = WaveplateSetting::new(0.0, 11.45);

/// `n_x X + s n_y Y + n_z Z` where `s = y_sign`.
pub fn bloch_observable(n: [f64; 3], y_sign: f64) -> DenseOperator {
    let x = pauli_matrix(1).scale_real(n[0]);
    let y = pauli_matrix(2).scale_real(n[1] * y_sign);
    let z = pauli_matrix(3).scale_real(n[2]);
    &(&x + &y) + &z
}

/// Bloch vector `(Tr[O X], Tr[O Y], Tr[O Z]) / 2` of a qubit operator.
pub fn bloch_vector(o: &DenseOperator) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = 0.5 * o.trace_product(&pauli_matrix(j + 1)).re;
    }
    out
}
