//! Brute-force local-hidden-state search for three dichotomic settings.
//!
//! Each hidden state is written as `omega = (t I + s . sigma) / 2` with
//! `|s| <= t`, so positivity is a second-order cone. The assemblage is fit
//! jointly over the 8 deterministic response tables by accelerated projected
//! gradient; a residual below tolerance is a model, anything else is reported
//! with the best residual found.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::behavior::{BobAnswer, Behavior};
use crate::linalg::{kron, DenseOperator};
use crate::model::{pauli, pauli_matrix, Outcome};

/// Bloch data `(Tr sigma, Tr[sigma X], Tr[sigma Y], Tr[sigma Z])` of
/// `sigma_{a|x}`, indexed `[x - 1][a.index()]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assemblage {
    pub bloch: [[[f64; 4]; 2]; 3],
}

impl Assemblage {
    /// `sigma_{a|x} = Tr_A[(Pi_{a|x} x I) rho]` for Alice measuring `sigma_x`.
    pub fn from_state(rho: &DenseOperator) -> Self {
        assert_eq!(rho.dim(), 4, "two-qubit state expected");
        let mut bloch = [[[0.0; 4]; 2]; 3];
        for x in 1..=3 {
            let alice = pauli(x).expect("index in range");
            for a in Outcome::ALL {
                let proj = alice.projector(a);
                let slot = &mut bloch[x - 1][a.index()];
                slot[0] = rho.trace_product(&kron(&proj, &DenseOperator::identity(2))).re;
                for k in 1..=3 {
                    slot[k] = rho.trace_product(&kron(&proj, &pauli_matrix(k))).re;
                }
            }
        }
        Self { bloch }
    }

    /// Tomographic reconstruction from the "Yes" block with Charlie's
    /// settings as trusted Pauli measurements; `y_sign` is the sign of
    /// Charlie's Y setting.
    pub fn from_behavior(beh: &Behavior, y_sign: f64) -> Self {
        let mut bloch = [[[0.0; 4]; 2]; 3];
        for x in 1..=3 {
            for a in Outcome::ALL {
                let slot = &mut bloch[x - 1][a.index()];
                let mut trace = 0.0;
                for z in 1..=3 {
                    let mut corr = 0.0;
                    for c in Outcome::ALL {
                        let p = beh.p_steering(x, z, a, BobAnswer::Yes, c);
                        trace += p;
                        corr += c.value() * p;
                    }
                    let sign = if z == 2 { y_sign } else { 1.0 };
                    slot[z] = 4.0 * sign * corr;
                }
                slot[0] = 4.0 * trace / 3.0;
            }
        }
        Self { bloch }
    }

    pub fn element(&self, x: usize, a: Outcome) -> DenseOperator {
        bloch_to_operator(&self.bloch[x - 1][a.index()])
    }
}

fn bloch_to_operator(v: &[f64; 4]) -> DenseOperator {
    let mut m = DenseOperator::identity(2).scale_real(v[0]);
    for k in 1..=3 {
        m = &m + &pauli_matrix(k).scale_real(v[k]);
    }
    m.scale_real(0.5)
}

/// Deterministic response table `lambda -> (a_1, a_2, a_3)`.
pub fn strategy(lambda: usize) -> [Outcome; 3] {
    let bit = |k: usize| if (lambda >> k) & 1 == 0 { Outcome::Plus } else { Outcome::Minus };
    [bit(0), bit(1), bit(2)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhsModel {
    pub weights: [f64; 8],
    pub responses: [[Outcome; 3]; 8],
    /// Normalized hidden states; zero-weight entries hold `I/2`.
    pub states: Vec<DenseOperator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhsVerdict {
    pub feasible: bool,
    /// Largest entrywise Bloch residual of the best fit.
    pub residual: f64,
    pub model: Option<LhsModel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhsOptions {
    pub restarts: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for LhsOptions {
    fn default() -> Self {
        Self { restarts: 64, tolerance: 1e-6, max_iterations: 20_000, seed: 0 }
    }
}

type Params = [[f64; 4]; 8];

fn project_cone(v: &mut [f64; 4]) {
    let t = v[0];
    let r = (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
    if r <= t {
        return;
    }
    if r <= -t {
        *v = [0.0; 4];
        return;
    }
    let scale = 0.5 * (t + r);
    v[0] = scale;
    for k in 1..=3 {
        v[k] *= scale / r;
    }
}

fn residuals(params: &Params, target: &Assemblage) -> [[[f64; 4]; 2]; 3] {
    let mut r = target.bloch;
    for row in r.iter_mut() {
        for cell in row.iter_mut() {
            for c in cell.iter_mut() {
                *c = -*c;
            }
        }
    }
    for (lambda, p) in params.iter().enumerate() {
        let resp = strategy(lambda);
        for x in 0..3 {
            let cell = &mut r[x][resp[x].index()];
            for k in 0..4 {
                cell[k] += p[k];
            }
        }
    }
    r
}

fn objective(r: &[[[f64; 4]; 2]; 3]) -> f64 {
    r.iter().flatten().flatten().map(|v| v * v).sum()
}

fn max_abs(r: &[[[f64; 4]; 2]; 3]) -> f64 {
    r.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest eigenvalue of `D^T D` for the 6 x 8 response incidence matrix `D`.
const INCIDENCE_NORM: f64 = 12.0;

const STALL_WINDOW: usize = 1000;

fn fit(start: Params, target: &Assemblage, opts: &LhsOptions) -> (Params, f64) {
    let step = 1.0 / (2.0 * INCIDENCE_NORM);
    let mut x = start;
    let mut y = start;
    let mut t = 1.0f64;
    let mut prev_obj = f64::INFINITY;
    let mut checkpoint = f64::INFINITY;
    for iter in 0..opts.max_iterations {
        if iter % STALL_WINDOW == 0 {
            // a fit stuck well above tolerance has found the cone's best approximation
            if prev_obj.is_finite() && checkpoint - prev_obj < 1e-6 * prev_obj && prev_obj.sqrt() > 100.0 * opts.tolerance {
                break;
            }
            checkpoint = prev_obj;
        }
        let r = residuals(&y, target);
        let mut next = y;
        for (lambda, p) in next.iter_mut().enumerate() {
            let resp = strategy(lambda);
            for x_idx in 0..3 {
                let cell = &r[x_idx][resp[x_idx].index()];
                for k in 0..4 {
                    p[k] -= step * 2.0 * cell[k];
                }
            }
            project_cone(p);
        }
        let rn = residuals(&next, target);
        let obj = objective(&rn);
        if max_abs(&rn) < opts.tolerance {
            return (next, max_abs(&rn));
        }
        if obj > prev_obj {
            // adaptive restart
            t = 1.0;
            y = x;
            prev_obj = objective(&residuals(&x, target));
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        for lambda in 0..8 {
            for k in 0..4 {
                y[lambda][k] = next[lambda][k] + (t - 1.0) / t_next * (next[lambda][k] - x[lambda][k]);
            }
        }
        x = next;
        t = t_next;
        prev_obj = obj;
    }
    let res = max_abs(&residuals(&x, target));
    (x, res)
}

fn random_start(rng: &mut ChaCha8Rng, scale: f64) -> Params {
    let mut p = [[0.0; 4]; 8];
    for v in p.iter_mut() {
        v[0] = rng.random::<f64>() * scale;
        for k in 1..=3 {
            v[k] = (rng.random::<f64>() * 2.0 - 1.0) * scale;
        }
        project_cone(v);
    }
    p
}

/// Searches for an LHS model of `target`; stops at the first restart that
/// reaches the residual tolerance.
pub fn lhs_brute_force(target: &Assemblage, opts: &LhsOptions) -> LhsVerdict {
    let scale = target.bloch.iter().flatten().map(|c| c[0].abs()).fold(0.0, f64::max).max(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Params, f64)> = None;
    for _ in 0..opts.restarts.max(1) {
        let (params, res) = fit(random_start(&mut rng, scale / 4.0), target, opts);
        let better = best.as_ref().map(|(_, b)| res < *b).unwrap_or(true);
        if better {
            best = Some((params, res));
        }
        if res < opts.tolerance {
            break;
        }
    }
    let (params, residual) = best.expect("at least one restart");
    let feasible = residual < opts.tolerance;
    let model = feasible.then(|| to_model(&params));
    LhsVerdict { feasible, residual, model }
}

/// [`lhs_brute_force`] on the assemblage of a two-qubit state.
pub fn lhs_brute_force_state(rho: &DenseOperator, opts: &LhsOptions) -> LhsVerdict {
    lhs_brute_force(&Assemblage::from_state(rho), opts)
}

fn to_model(params: &Params) -> LhsModel {
    let total: f64 = params.iter().map(|p| p[0]).sum();
    let mut weights = [0.0; 8];
    let mut responses = [[Outcome::Plus; 3]; 8];
    let mut states = Vec::with_capacity(8);
    for (lambda, p) in params.iter().enumerate() {
        weights[lambda] = if total > 0.0 { p[0] / total } else { 0.0 };
        responses[lambda] = strategy(lambda);
        let state = if p[0] > 0.0 {
            bloch_to_operator(&[1.0, p[1] / p[0], p[2] / p[0], p[3] / p[0]])
        } else {
            DenseOperator::identity(2).scale_real(0.5)
        };
        states.push(state);
    }
    LhsModel { weights, responses, states }
}

impl LhsModel {
    /// `sum_lambda p(lambda) [a_x(lambda) = a] rho_lambda`.
    pub fn assemblage_element(&self, x: usize, a: Outcome) -> DenseOperator {
        let mut out = DenseOperator::zeros(2);
        for lambda in 0..8 {
            if self.responses[lambda][x - 1] == a {
                out = &out + &self.states[lambda].scale_real(self.weights[lambda]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::werner;

    #[test]
    fn maximally_mixed_is_unsteerable() {
        let rho = DenseOperator::identity(4).scale_real(0.25);
        let verdict = lhs_brute_force_state(&rho, &LhsOptions::default());
        assert!(verdict.feasible);
        let model = verdict.model.unwrap();
        assert!((model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for s in &model.states {
            assert!(s.is_density());
        }
    }

    #[test]
    fn model_reproduces_assemblage() {
        let rho = werner(0.5).unwrap();
        let asm = Assemblage::from_state(&rho);
        let verdict = lhs_brute_force(&asm, &LhsOptions::default());
        assert!(verdict.feasible, "residual {}", verdict.residual);
        let model = verdict.model.unwrap();
        let total: f64 = asm.bloch[0].iter().map(|c| c[0]).sum();
        for x in 1..=3 {
            for a in Outcome::ALL {
                let got = model.assemblage_element(x, a).scale_real(total);
                assert!(got.approx_eq(&asm.element(x, a), 1e-5));
            }
        }
    }

    #[test]
    fn pure_singlet_is_steerable() {
        let verdict = lhs_brute_force_state(&werner(0.99).unwrap(), &LhsOptions { restarts: 4, ..Default::default() });
        assert!(!verdict.feasible);
        assert!(verdict.residual > 1e-3);
    }

    #[test]
    fn incidence_norm_is_top_eigenvalue() {
        let mut dtd = [0.0; 64];
        for l in 0..8 {
            for m in 0..8 {
                dtd[l * 8 + m] = (0..3).filter(|&x| strategy(l)[x] == strategy(m)[x]).count() as f64;
            }
        }
        let eig = crate::linalg::symmetric_eigen(&dtd, 8);
        assert!((eig.values[7] - INCIDENCE_NORM).abs() < 1e-12);
    }

    #[test]
    fn cone_projection_is_idempotent() {
        let mut v = [0.3, 1.0, -0.5, 0.2];
        project_cone(&mut v);
        let once = v;
        project_cone(&mut v);
        for k in 0..4 {
            assert!((once[k] - v[k]).abs() < 1e-15);
        }
        let r = (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
        assert!((r - v[0]).abs() < 1e-12);
    }
}
