//! Swap-circuit isometry: explicit evaluation on a characterized realization
//! and its symbolic expansion over projector words.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::poly::{Poly, Word};
use super::SelftestError;
use crate::linalg::{kron, DenseOperator, Ket};
use crate::model::{bell_phi_plus, pauli_matrix, Observable};
use crate::protocol::{bob_observables, charlie_observables};

fn swap_kraus(x: &DenseOperator, z: &DenseOperator) -> [DenseOperator; 2] {
    let id = DenseOperator::identity(x.dim());
    let k0 = (&id + z).scale_real(0.5);
    let k1 = (x * &(&id - z)).scale_real(0.5);
    [k0, k1]
}

/// `rho_data[(m,k),(n,l)] = Tr[A_mk rho A_nl^dagger]` with
/// `A_mk = (K^B_m x K^C_k)(I x M)`, `K_0 = (I + Z)/2`, `K_1 = X (I - Z)/2`.
///
/// Operators need only be Hermitian; [`swap_rho_data`] additionally checks
/// that they are dichotomic.
pub fn swap_rho_data_operators(
    rho_bc: &DenseOperator,
    xb: &DenseOperator,
    zb: &DenseOperator,
    xc: &DenseOperator,
    zc: &DenseOperator,
    mj: &DenseOperator,
) -> Result<DenseOperator, SelftestError> {
    let (db, dc) = (xb.dim(), xc.dim());
    if zb.dim() != db || zc.dim() != dc || mj.dim() != dc || rho_bc.dim() != db * dc {
        return Err(SelftestError::Dimension { expected: db * dc, got: rho_bc.dim() });
    }
    let kb = swap_kraus(xb, zb);
    let kc = swap_kraus(xc, zc);
    let m_full = kron(&DenseOperator::identity(db), mj);
    let mut a = Vec::with_capacity(4);
    for m in 0..2 {
        for k in 0..2 {
            a.push(&kron(&kb[m], &kc[k]) * &m_full);
        }
    }
    let mut out = DenseOperator::zeros(4);
    for r in 0..4 {
        let left = &a[r] * rho_bc;
        for c in 0..4 {
            out.set(r, c, left.trace_product(&a[c].dagger()));
        }
    }
    Ok(out)
}

/// State of the trusted auxiliaries `B'C'` after the swap circuit.
pub fn swap_rho_data(
    rho_bc: &DenseOperator,
    xb: &Observable,
    zb: &Observable,
    xc: &Observable,
    zc: &Observable,
    mj: &Observable,
) -> Result<DenseOperator, SelftestError> {
    for o in [xb, zb, xc, zc, mj] {
        if !o.is_dichotomic() {
            return Err(SelftestError::NotDichotomic(o.label().into()));
        }
    }
    swap_rho_data_operators(rho_bc, xb.matrix(), zb.matrix(), xc.matrix(), zc.matrix(), mj.matrix())
}

/// `(I x sigma_j)|Phi+>` with the global phase removed, so that the
/// amplitudes are real; `j = 0` is the bare Bell state.
pub fn swap_target(j: usize, y_sign: f64) -> Result<[f64; 4], SelftestError> {
    if j > 3 {
        return Err(SelftestError::Index(j));
    }
    let phi = bell_phi_plus(2)?;
    let m = if j == 0 { DenseOperator::identity(2) } else { pauli_matrix(j) };
    let m = if j == 2 { m.scale_real(y_sign) } else { m };
    let t = kron(&DenseOperator::identity(2), &m).apply(&phi);
    let lead = t
        .amplitudes()
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-12)
        .expect("nonzero ket");
    let phase = lead.conj() / lead.norm();
    let mut out = [0.0; 4];
    for (slot, z) in out.iter_mut().zip(t.amplitudes()) {
        let r = z * phase;
        debug_assert!(r.im.abs() < 1e-12);
        *slot = r.re;
    }
    Ok(out)
}

/// `f_j = <Phi+| sigma_j rho_data sigma_j |Phi+>` on `C'`; `j = 0` uses no Pauli.
pub fn swap_fidelity(rho_data: &DenseOperator, j: usize) -> Result<f64, SelftestError> {
    swap_fidelity_signed(rho_data, j, 1.0)
}

/// [`swap_fidelity`] with `sigma_y` replaced by `y_sign * sigma_y`.
pub fn swap_fidelity_signed(rho_data: &DenseOperator, j: usize, y_sign: f64) -> Result<f64, SelftestError> {
    if rho_data.dim() != 4 {
        return Err(SelftestError::Dimension { expected: 4, got: rho_data.dim() });
    }
    let t = swap_target(j, y_sign)?;
    let ket = Ket::new(t.iter().map(|&x| C64::new(x, 0.0)).collect());
    Ok(rho_data.expectation(&ket).re)
}

/// Trace distance `sqrt(2 (1 - sqrt f))` between the target and a state of fidelity `f`.
pub fn fidelity_to_trace_distance(f: f64) -> Result<f64, SelftestError> {
    if !(0.0..=1.0).contains(&f) {
        return Err(SelftestError::Fidelity(f));
    }
    Ok((2.0 * (1.0 - f.sqrt())).sqrt())
}

/// Inverse of [`fidelity_to_trace_distance`] on `[0, sqrt2]`.
pub fn trace_distance_to_fidelity(t: f64) -> Result<f64, SelftestError> {
    if !(0.0..=core::f64::consts::SQRT_2).contains(&t) {
        return Err(SelftestError::Fidelity(t));
    }
    let s = 1.0 - t * t / 2.0;
    Ok(s * s)
}

/// Bob's swap operators `X_B = (B3 + B4)/sqrt2`, `Z_B = (B4 - B3)/sqrt2`.
pub fn bob_swap_polys() -> (Poly, Poly) {
    let (b3, b4) = (Poly::bob_observable(3), Poly::bob_observable(4));
    (b3.add(&b4).scale(FRAC_1_SQRT_2), b4.add(&b3.scale(-1.0)).scale(FRAC_1_SQRT_2))
}

fn kraus_polys(x: &Poly, z: &Poly) -> [Poly; 2] {
    let id = Poly::constant(1.0);
    [id.add(z).scale(0.5), x.mul(&id.add(&z.scale(-1.0))).scale(0.5)]
}

/// `O_j = sum_{m,k} t_{mk} K^B_m K^C_k M_j`, so that the swap fidelity is `<O_j^dagger O_j>`.
pub fn swap_kernel(j: usize, y_sign: f64) -> Result<Poly, SelftestError> {
    let t = swap_target(j, y_sign)?;
    let (xb, zb) = bob_swap_polys();
    let kb = kraus_polys(&xb, &zb);
    let kc = kraus_polys(&Poly::charlie_observable(1), &Poly::charlie_observable(3));
    let m = if j == 0 { Poly::constant(1.0) } else { Poly::charlie_observable(j as u8) };
    let mut out = Poly::zero();
    for mi in 0..2 {
        for k in 0..2 {
            let coef = t[2 * mi + k];
            if coef != 0.0 {
                out = out.add(&kb[mi].mul(&kc[k]).mul(&m).scale(coef));
            }
        }
    }
    Ok(out)
}

/// `O_j^dagger O_j` collected by moment.
pub fn swap_objective(j: usize, y_sign: f64) -> Result<Poly, SelftestError> {
    let o = swap_kernel(j, y_sign)?;
    Ok(o.adjoint().mul(&o).by_moment())
}

/// Explicit state and observables for Bob's six and Charlie's three settings.
#[derive(Debug, Clone)]
pub struct Realization {
    pub state: DenseOperator,
    pub bob: Vec<DenseOperator>,
    pub charlie: Vec<DenseOperator>,
}

impl Realization {
    pub fn new(state: DenseOperator, bob: Vec<DenseOperator>, charlie: Vec<DenseOperator>) -> Result<Self, SelftestError> {
        if bob.len() != 6 || charlie.len() != 3 {
            return Err(SelftestError::Settings);
        }
        let db = bob[0].dim();
        let dc = charlie[0].dim();
        if bob.iter().any(|b| b.dim() != db) || charlie.iter().any(|c| c.dim() != dc) || state.dim() != db * dc {
            return Err(SelftestError::Dimension { expected: db * dc, got: state.dim() });
        }
        Ok(Self { state, bob, charlie })
    }

    /// `w |Phi+><Phi+| + (1 - w) I/4` with the ideal measurements.
    pub fn depolarized(w: f64) -> Result<Self, SelftestError> {
        let state = crate::model::depolarized_phi_plus(w)?;
        let bob = bob_observables()?.into_iter().map(|o| o.matrix().clone()).collect();
        let charlie = charlie_observables(-1.0)?.into_iter().map(|o| o.matrix().clone()).collect();
        Self::new(state, bob, charlie)
    }

    pub fn ideal() -> Self {
        Self::depolarized(1.0).expect("valid visibility")
    }

    fn projector(o: &DenseOperator) -> DenseOperator {
        (&DenseOperator::identity(o.dim()) + o).scale_real(0.5)
    }

    fn word_operator(ops: &[DenseOperator], letters: &[u8], dim: usize) -> DenseOperator {
        let mut out = DenseOperator::identity(dim);
        for &l in letters {
            out = &out * &Self::projector(&ops[l as usize - 1]);
        }
        out
    }

    /// `Re Tr[rho (B_word x C_word)]`.
    pub fn moment(&self, w: &Word) -> f64 {
        let b = Self::word_operator(&self.bob, &w.bob, self.bob[0].dim());
        let c = Self::word_operator(&self.charlie, &w.charlie, self.charlie[0].dim());
        self.state.trace_product(&kron(&b, &c)).re
    }

    pub fn evaluate(&self, p: &Poly) -> f64 {
        p.evaluate(|w| self.moment(w))
    }

    /// Swap fidelity `f_j` using `X_B = (B3 + B4)/sqrt2`, `Z_B = (B4 - B3)/sqrt2`,
    /// `X_C = C1`, `Z_C = C3`, `M_j = C_j`.
    pub fn swap_fidelity(&self, j: usize) -> Result<f64, SelftestError> {
        let xb = (&self.bob[2] + &self.bob[3]).scale_real(FRAC_1_SQRT_2);
        let zb = (&self.bob[3] - &self.bob[2]).scale_real(FRAC_1_SQRT_2);
        let mj = if j == 0 { DenseOperator::identity(self.charlie[0].dim()) } else { self.charlie[j - 1].clone() };
        let data = swap_rho_data_operators(&self.state, &xb, &zb, &self.charlie[0], &self.charlie[2], &mj)?;
        swap_fidelity(&data, j)
    }
}
