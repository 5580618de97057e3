//! Exact and finite-statistics behaviors of the four-photon protocol.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{
    chsh_cell, chsh_setting, steering_cell, steering_cell_labels, steering_setting, Behavior,
    BehaviorError, BobAnswer, ChshTable, SteeringTable, CHSH_SETTINGS, STEERING_SETTINGS,
};
use crate::linalg::{kron, kron_all, DenseOperator};
use crate::model::{
    bell_phi_plus, bob_chsh_observables, depolarized_phi_plus, pauli, singlet, werner, ModelError,
    Observable, Outcome,
};
use crate::witness::{chsh_lines, noisy_payoff, WitnessError, WitnessReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("{name} = {value} outside {range}")]
    Parameter { name: &'static str, value: f64, range: &'static str },
    #[error("{block} setting {setting} has no events")]
    ZeroCounts { block: &'static str, setting: usize },
    #[error("budget must be at least 1 event per setting")]
    Budget,
    #[error("bootstrap needs at least 100 resamples, got {0}")]
    Resamples(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

/// How the Werner visibility of the Alice-Bob pair is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseModel {
    /// The source emits `werner(v)` directly.
    #[default]
    WernerSource,
    /// The source emits the singlet and Alice's outcome is flipped with
    /// probability `(1 - v)/2`.
    AliceFlip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ProtocolConfig {
    /// Werner visibility `v` of the Alice-Bob pair.
    pub visibility: f64,
    pub noise: NoiseModel,
    /// Visibility `w` of the depolarized `|Phi+>` shared by Bob and Charlie.
    pub bc_visibility: f64,
    /// Extra flip probability on Alice's outcomes, on top of the noise model.
    pub alice_flip: f64,
    /// Sign of Charlie's Y setting; `-1` matches the wave-plate table.
    pub charlie_y_sign: f64,
    /// Detection efficiency applied to Bob's "Yes" events.
    pub yes_efficiency: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            visibility: 1.0,
            noise: NoiseModel::WernerSource,
            bc_visibility: 1.0,
            alice_flip: 0.0,
            charlie_y_sign: -1.0,
            yes_efficiency: 1.0,
        }
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<(), ProtocolError> {
    if !(lo..=hi).contains(&value) {
        return Err(ProtocolError::Parameter { name, value, range });
    }
    Ok(())
}

impl ProtocolConfig {
    pub fn with_visibility(visibility: f64) -> Self {
        Self { visibility, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        check_range("visibility", self.visibility, 0.0, 1.0, "[0, 1]")?;
        check_range("bc_visibility", self.bc_visibility, 0.0, 1.0, "[0, 1]")?;
        check_range("alice_flip", self.alice_flip, 0.0, 0.5, "[0, 1/2]")?;
        if self.yes_efficiency <= 0.0 || self.yes_efficiency > 1.0 {
            return Err(ProtocolError::Parameter {
                name: "yes_efficiency",
                value: self.yes_efficiency,
                range: "(0, 1]",
            });
        }
        if self.charlie_y_sign != 1.0 && self.charlie_y_sign != -1.0 {
            return Err(ProtocolError::Parameter { name: "charlie_y_sign", value: self.charlie_y_sign, range: "{-1, 1}" });
        }
        Ok(())
    }
}

/// Charlie's settings `z = 1, 2, 3`: `sigma_x`, `s sigma_y`, `sigma_z`.
pub fn charlie_observables(y_sign: f64) -> Result<[Observable; 3], ModelError> {
    let y = pauli(2)?;
    let y = if y_sign < 0.0 { y.negated() } else { y };
    Ok([pauli(1)?, y, pauli(3)?])
}

/// Bob's six CHSH settings in line order:
/// `(X+Y, X-Y, X-Z, X+Z, Y-Z, Y+Z) / sqrt2`.
pub fn bob_observables() -> Result<[Observable; 6], ModelError> {
    let (xpy, xmy) = bob_chsh_observables(1, 2)?;
    let (xpz, xmz) = bob_chsh_observables(1, 3)?;
    let (ypz, ymz) = bob_chsh_observables(2, 3)?;
    Ok([xpy, xmy, xmz, xpz, ymz, ypz])
}

/// Born-rule behavior of `rho_AB x rho_B0C` (order `A, B, B0, C`).
pub fn exact_behavior(cfg: &ProtocolConfig) -> Result<Behavior, ProtocolError> {
    cfg.validate()?;
    let (rho_ab, flip) = match cfg.noise {
        NoiseModel::WernerSource => (werner(cfg.visibility)?, 0.0),
        NoiseModel::AliceFlip => (singlet().projector(), (1.0 - cfg.visibility) / 2.0),
    };
    let rho_bc = depolarized_phi_plus(cfg.bc_visibility)?;
    let charlie = charlie_observables(cfg.charlie_y_sign)?;
    let state = kron(&rho_ab, &rho_bc);

    let yes = bell_phi_plus(2)?.projector();
    let no = &DenseOperator::identity(4) - &yes;
    let mut steering: SteeringTable = [[0.0; 8]; STEERING_SETTINGS];
    for x in 1..=3 {
        let alice = pauli(x)?;
        for z in 1..=3 {
            let row = &mut steering[steering_setting(x, z)];
            for a in Outcome::ALL {
                for (bob, e) in [(BobAnswer::Yes, &yes), (BobAnswer::No, &no)] {
                    for c in Outcome::ALL {
                        let op = kron_all(&[&alice.projector(a), e, &charlie[z - 1].projector(c)]);
                        row[steering_cell(a, bob, c)] = state.trace_product(&op).re;
                    }
                }
            }
        }
    }

    let bob = bob_observables()?;
    let mut chsh: ChshTable = [[0.0; 4]; CHSH_SETTINGS];
    for (y, by) in bob.iter().enumerate() {
        for (z, cz) in charlie.iter().enumerate() {
            let row = &mut chsh[chsh_setting(y + 1, z + 1)];
            for b in Outcome::ALL {
                for c in Outcome::ALL {
                    let op = kron(&by.projector(b), &cz.projector(c));
                    row[chsh_cell(b, c)] = rho_bc.trace_product(&op).re;
                }
            }
        }
    }

    let mut beh = Behavior { steering, chsh, steering_stderr: None, chsh_stderr: None };
    clean(&mut beh);
    beh.validate()?;
    let total_flip = combine_flips(flip, cfg.alice_flip);
    if total_flip > 0.0 {
        beh = apply_alice_flip(&beh, total_flip)?;
    }
    Ok(beh)
}

/// Two independent flips with probabilities `p` and `q`.
fn combine_flips(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// Clamp round-off negatives to zero.
fn clean(beh: &mut Behavior) {
    for row in beh.steering.iter_mut() {
        for p in row.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
    }
    for row in beh.chsh.iter_mut() {
        for p in row.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
    }
}

/// `P'(a, ...) = (1 - p) P(a, ...) + p P(-a, ...)` on the steering block.
pub fn apply_alice_flip(beh: &Behavior, p_flip: f64) -> Result<Behavior, ProtocolError> {
    check_range("p_flip", p_flip, 0.0, 0.5, "[0, 1/2]")?;
    let mut out = beh.clone();
    for (src, dst) in beh.steering.iter().zip(out.steering.iter_mut()) {
        for (cell, slot) in dst.iter_mut().enumerate() {
            let (a, bob, c) = steering_cell_labels(cell);
            *slot = (1.0 - p_flip) * src[cell] + p_flip * src[steering_cell(a.flipped(), bob, c)];
        }
    }
    out.steering_stderr = None;
    Ok(out)
}

/// Behavior seen after losing "Yes" events with probability `1 - eta`,
/// renormalized over detected events.
pub fn detected_behavior(beh: &Behavior, eta: f64) -> Result<Behavior, ProtocolError> {
    if eta <= 0.0 || eta > 1.0 {
        return Err(ProtocolError::Parameter { name: "yes_efficiency", value: eta, range: "(0, 1]" });
    }
    let mut out = beh.clone();
    for row in out.steering.iter_mut() {
        reweight_yes(row, eta);
    }
    Ok(out)
}

fn reweight_yes(row: &mut [f64; 8], factor: f64) {
    for (cell, p) in row.iter_mut().enumerate() {
        if steering_cell_labels(cell).1 == BobAnswer::Yes {
            *p *= factor;
        }
    }
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        for p in row.iter_mut() {
            *p /= sum;
        }
    }
}

/// Event counts per setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsRecord {
    pub config: Option<ProtocolConfig>,
    pub seed: u64,
    pub steering: [[u64; 8]; STEERING_SETTINGS],
    pub chsh: [[u64; 4]; CHSH_SETTINGS],
}

impl CountsRecord {
    pub fn steering_total(&self, setting: usize) -> u64 {
        self.steering[setting].iter().sum()
    }

    pub fn chsh_total(&self, setting: usize) -> u64 {
        self.chsh[setting].iter().sum()
    }

    pub fn total_events(&self) -> u64 {
        (0..STEERING_SETTINGS).map(|s| self.steering_total(s)).sum::<u64>()
            + (0..CHSH_SETTINGS).map(|s| self.chsh_total(s)).sum::<u64>()
    }

    fn yes_efficiency(&self) -> f64 {
        self.config.map(|c| c.yes_efficiency).unwrap_or(1.0)
    }
}

/// Independent stream for each setting: steering rows use `0..9`, CHSH rows `9..27`.
fn setting_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial<const K: usize>(n: u64, probs: &[f64; K], rng: &mut ChaCha8Rng) -> [u64; K] {
    let mut out = [0u64; K];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k == K - 1 || mass <= p {
            out[k] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, q).expect("probability clamped to [0, 1]").sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= p;
    }
    out
}

/// Fixed budget of `n_per_setting` events for every steering and CHSH setting.
pub fn sample_counts(beh: &Behavior, n_per_setting: u64, seed: u64) -> Result<CountsRecord, ProtocolError> {
    if n_per_setting == 0 {
        return Err(ProtocolError::Budget);
    }
    beh.validate()?;
    let mut steering = [[0u64; 8]; STEERING_SETTINGS];
    for (s, row) in steering.iter_mut().enumerate() {
        *row = multinomial(n_per_setting, &beh.steering[s], &mut setting_rng(seed, s as u64));
    }
    let mut chsh = [[0u64; 4]; CHSH_SETTINGS];
    for (s, row) in chsh.iter_mut().enumerate() {
        let stream = (STEERING_SETTINGS + s) as u64;
        *row = multinomial(n_per_setting, &beh.chsh[s], &mut setting_rng(seed, stream));
    }
    Ok(CountsRecord { config: None, seed, steering, chsh })
}

/// Exact behavior of `cfg`, detection losses on "Yes", then [`sample_counts`].
pub fn simulate_counts(cfg: &ProtocolConfig, n_per_setting: u64, seed: u64) -> Result<CountsRecord, ProtocolError> {
    let beh = detected_behavior(&exact_behavior(cfg)?, cfg.yes_efficiency)?;
    let mut rec = sample_counts(&beh, n_per_setting, seed)?;
    rec.config = Some(*cfg);
    Ok(rec)
}

fn frequencies<const K: usize>(row: &[u64; K]) -> Option<([f64; K], [f64; K])> {
    let n: u64 = row.iter().sum();
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let mut p = [0.0; K];
    let mut se = [0.0; K];
    for k in 0..K {
        p[k] = row[k] as f64 / nf;
        se[k] = (p[k] * (1.0 - p[k]) / nf).sqrt();
    }
    Some((p, se))
}

/// Relative frequencies with binomial standard errors `sqrt(p (1 - p) / n)`.
///
/// "Yes" counts are divided by the recorded detection efficiency before
/// normalizing.
pub fn estimate_behavior(counts: &CountsRecord) -> Result<Behavior, ProtocolError> {
    let eta = counts.yes_efficiency();
    let mut steering = [[0.0; 8]; STEERING_SETTINGS];
    let mut steering_se = [[0.0; 8]; STEERING_SETTINGS];
    for s in 0..STEERING_SETTINGS {
        let (mut p, se) =
            frequencies(&counts.steering[s]).ok_or(ProtocolError::ZeroCounts { block: "steering", setting: s })?;
        if eta < 1.0 {
            reweight_yes(&mut p, 1.0 / eta);
        }
        steering[s] = p;
        steering_se[s] = se;
    }
    let mut chsh = [[0.0; 4]; CHSH_SETTINGS];
    let mut chsh_se = [[0.0; 4]; CHSH_SETTINGS];
    for s in 0..CHSH_SETTINGS {
        let (p, se) = frequencies(&counts.chsh[s]).ok_or(ProtocolError::ZeroCounts { block: "chsh", setting: s })?;
        chsh[s] = p;
        chsh_se[s] = se;
    }
    let mut beh = Behavior::new(steering, chsh)?;
    beh.steering_stderr = Some(steering_se);
    beh.chsh_stderr = Some(chsh_se);
    Ok(beh)
}

fn poisson_resample<const K: usize>(row: &[u64; K], rng: &mut ChaCha8Rng) -> [u64; K] {
    let mut out = [0u64; K];
    for (k, &n) in row.iter().enumerate() {
        if n > 0 {
            let draw: f64 = Poisson::new(n as f64).expect("positive mean").sample(rng);
            out[k] = draw as u64;
        }
    }
    out
}

fn resample(counts: &CountsRecord, rng: &mut ChaCha8Rng) -> CountsRecord {
    let mut out = counts.clone();
    for row in out.steering.iter_mut() {
        *row = poisson_resample(row, rng);
    }
    for row in out.chsh.iter_mut() {
        *row = poisson_resample(row, rng);
    }
    out
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const MIN_RESAMPLES: usize = 100;

/// Poisson bootstrap of the noisy payoff; the report carries the bootstrap
/// mean and standard deviation.
pub fn bootstrap_witness(
    counts: &CountsRecord,
    f: [f64; 3],
    resamples: usize,
    seed: u64,
) -> Result<WitnessReport, ProtocolError> {
    if resamples < MIN_RESAMPLES {
        return Err(ProtocolError::Resamples(resamples));
    }
    // fail early on empty settings or bad fidelities
    noisy_payoff(&estimate_behavior(counts)?, f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let beh = estimate_behavior(&resample(counts, &mut rng))?;
        values.push(noisy_payoff(&beh, f)?.value);
    }
    let (mean, std) = mean_std(&values);
    let kind = crate::witness::WitnessKind::Payoff;
    Ok(WitnessReport::new(kind, mean, 0.0).with_stderr(std))
}

/// Bootstrap mean and standard deviation of the three CHSH lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshEstimate {
    pub lines: [f64; 3],
    pub stderr: [f64; 3],
}

pub fn bootstrap_chsh(counts: &CountsRecord, resamples: usize, seed: u64) -> Result<ChshEstimate, ProtocolError> {
    if resamples < MIN_RESAMPLES {
        return Err(ProtocolError::Resamples(resamples));
    }
    estimate_behavior(counts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_line: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for _ in 0..resamples {
        let lines = chsh_lines(&estimate_behavior(&resample(counts, &mut rng))?);
        for (acc, l) in per_line.iter_mut().zip(lines) {
            acc.push(l);
        }
    }
    let mut lines = [0.0; 3];
    let mut stderr = [0.0; 3];
    for k in 0..3 {
        (lines[k], stderr[k]) = mean_std(&per_line[k]);
    }
    Ok(ChshEstimate { lines, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::chsh_lines;
    use core::f64::consts::SQRT_2;

    const SQRT_3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn ideal_yes_probability_is_a_quarter() {
        let beh = exact_behavior(&ProtocolConfig::default()).unwrap();
        for x in 1..=3 {
            for z in 1..=3 {
                assert!((beh.yes_probability(x, z) - 0.25).abs() < 1e-12);
            }
        }
        for l in chsh_lines(&beh) {
            assert!((l - 2.0 * SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn payoff_matches_closed_form() {
        for v in [0.5, 0.6469, 0.7015, 0.9951] {
            let beh = exact_behavior(&ProtocolConfig::with_visibility(v)).unwrap();
            let got = noisy_payoff(&beh, [1.0; 3]).unwrap().value;
            assert!((got - (3.0 * v - SQRT_3)).abs() < 1e-10);
        }
    }

    #[test]
    fn flip_noise_reproduces_werner() {
        let flipped = exact_behavior(&ProtocolConfig { noise: NoiseModel::AliceFlip, ..ProtocolConfig::with_visibility(0.7) }).unwrap();
        let werner = exact_behavior(&ProtocolConfig::with_visibility(0.7)).unwrap();
        for x in 1..=3 {
            for z in 1..=3 {
                assert!((flipped.yes_correlator(x, z) - werner.yes_correlator(x, z)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flip_extremes() {
        let beh = exact_behavior(&ProtocolConfig::default()).unwrap();
        assert_eq!(apply_alice_flip(&beh, 0.0).unwrap(), beh);
        let mixed = apply_alice_flip(&beh, 0.5).unwrap();
        for j in 1..=3 {
            assert!(mixed.yes_correlator(j, j).abs() < 1e-15);
        }
        assert!(apply_alice_flip(&beh, 0.6).is_err());
    }

    #[test]
    fn one_event_per_setting() {
        let beh = exact_behavior(&ProtocolConfig::default()).unwrap();
        let rec = sample_counts(&beh, 1, 3).unwrap();
        assert!((0..STEERING_SETTINGS).all(|s| rec.steering_total(s) == 1));
        assert!((0..CHSH_SETTINGS).all(|s| rec.chsh_total(s) == 1));
    }

    #[test]
    fn zero_counts_are_an_error() {
        let rec = CountsRecord { config: None, seed: 0, steering: [[0; 8]; 9], chsh: [[1; 4]; 18] };
        assert_eq!(estimate_behavior(&rec).unwrap_err(), ProtocolError::ZeroCounts { block: "steering", setting: 0 });
    }

    #[test]
    fn single_cell_counts_have_zero_stderr() {
        let mut rec = CountsRecord { config: None, seed: 0, steering: [[0; 8]; 9], chsh: [[0; 4]; 18] };
        for row in rec.steering.iter_mut() {
            row[2] = 10;
        }
        for row in rec.chsh.iter_mut() {
            row[1] = 7;
        }
        let beh = estimate_behavior(&rec).unwrap();
        assert_eq!(beh.steering[4][2], 1.0);
        assert_eq!(beh.steering_stderr.unwrap()[4][2], 0.0);
    }

    #[test]
    fn efficiency_correction_is_unbiased_in_expectation() {
        let cfg = ProtocolConfig { yes_efficiency: 0.5, ..ProtocolConfig::with_visibility(0.9) };
        let exact = exact_behavior(&cfg).unwrap();
        let seen = detected_behavior(&exact, 0.5).unwrap();
        let mut restored = seen.clone();
        for row in restored.steering.iter_mut() {
            reweight_yes(row, 2.0);
        }
        for s in 0..STEERING_SETTINGS {
            for k in 0..8 {
                assert!((restored.steering[s][k] - exact.steering[s][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bootstrap_needs_enough_resamples() {
        let beh = exact_behavior(&ProtocolConfig::default()).unwrap();
        let rec = sample_counts(&beh, 100, 1).unwrap();
        assert_eq!(bootstrap_witness(&rec, [1.0; 3], 10, 0).unwrap_err(), ProtocolError::Resamples(10));
    }
}
