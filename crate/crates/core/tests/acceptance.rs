//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.
//!
//! Run with `cargo test -p disteer-core --test acceptance`.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::Instant;

use disteer_core::lhs::{lhs_brute_force_state, LhsOptions};
use disteer_core::linalg::DenseOperator;
use disteer_core::model::{bloch_observable, waveplate_observable, werner, WAVEPLATE_TABLE, YZ_HWP_11_45};
use disteer_core::protocol::{bootstrap_chsh, bootstrap_witness, exact_behavior, simulate_counts, ProtocolConfig};
use disteer_core::selftest::{
    chsh_line_polys, fidelity_lower_bound, FidelityBound, FidelityObjective, Realization, SelftestOptions,
};
use disteer_core::witness::{
    bowles_min_fidelity, equal_fidelity_boundary, noisy_payoff, noisy_threshold, w_di, w_qrs, w_s_three_pauli,
};
use num_complex::Complex64 as C64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const REPORTED_F: [f64; 3] = [0.9931, 0.9897, 0.9979];
const REPORTED_CHSH: [f64; 3] = [2.8241, 2.8211, 2.8189];

enum Outcome {
    Pass(String),
    /// The headline target is missed but the documented fallback holds.
    Fallback(String),
    Fail(String),
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_density(rng: &mut ChaCha8Rng) -> DenseOperator {
    let g: Vec<C64> =
        (0..16).map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let g = DenseOperator::from_vec(4, g).unwrap();
    let rho = &g * &g.dagger();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

fn witness_chain() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let rho = random_density(&mut rng);
        let (di, qrs, s) = (w_di(&rho), w_qrs(&rho), w_s_three_pauli(&rho));
        let (di, qrs, s) = (di.map_err(|e| e.to_string())?, qrs.map_err(|e| e.to_string())?, s.map_err(|e| e.to_string())?);
        worst = worst.max((di.value - qrs.value / 2.0).abs()).max((qrs.value - s.value / 2.0).abs());
    }
    ensure(worst < 1e-10, || format!("chain mismatch {worst:.3e}"))?;
    let mut werner_err: f64 = 0.0;
    for k in 0..=20 {
        let v = k as f64 / 20.0;
        let w = w_s_three_pauli(&werner(v).unwrap()).unwrap().value;
        werner_err = werner_err.max((w - (3.0 * v - SQRT_3)).abs());
    }
    ensure(werner_err < 1e-12, || format!("Werner W_S off by {werner_err:.3e}"))?;
    Ok(format!("chain max {worst:.1e}, Werner max {werner_err:.1e}"))
}

fn thresholds() -> Check {
    let ideal = noisy_threshold([1.0; 3]).unwrap();
    ensure((ideal - 1.0 / SQRT_3).abs() < 1e-9, || format!("ideal threshold {ideal}"))?;
    let t = noisy_threshold(REPORTED_F).unwrap();
    ensure((t - 0.6541).abs() < 5e-4, || format!("threshold {t}"))?;
    let b = equal_fidelity_boundary(0.7).unwrap();
    ensure((b - 0.98496).abs() < 5e-4, || format!("boundary {b}"))?;
    Ok(format!("ideal {ideal:.9}, noisy {t:.6}, boundary(0.7) {b:.6}"))
}

fn payoff() -> Check {
    let beh = exact_behavior(&ProtocolConfig::with_visibility(0.7015)).map_err(|e| e.to_string())?;
    let p = noisy_payoff(&beh, REPORTED_F).unwrap().value;
    ensure((p - 0.1420).abs() < 1e-4, || format!("payoff {p}"))?;
    ensure((p - 0.1189).abs() <= 0.0714, || format!("payoff {p} outside experimental band"))?;
    Ok(format!("payoff {p:.7}"))
}

fn bound(chsh: [f64; 3], objective: FidelityObjective) -> Result<FidelityBound, String> {
    fidelity_lower_bound(chsh, objective, &SelftestOptions::default()).map_err(|e| format!("{chsh:?}: {e}"))
}

/// Relaxation values at the reported CHSH triple for the default basis.
const PINNED: [(FidelityObjective, f64, f64); 4] = [
    (FidelityObjective::Average, 0.94200, 0.9936),
    (FidelityObjective::Single(1), 0.98235, 0.9931),
    (FidelityObjective::Single(2), 0.84807, 0.9897),
    (FidelityObjective::Single(3), 0.99116, 0.9979),
];

fn selftest_sdp() -> Outcome {
    let run = || -> Result<(bool, String), String> {
        let mut segment = Vec::new();
        for k in 0..10 {
            let t = 0.71 + 0.29 * k as f64 / 9.0;
            let c = 2.0 * SQRT_2 * t;
            segment.push(bound([c; 3], FidelityObjective::Average)?.lower_bound);
        }
        let anchor = segment[9];
        ensure((anchor - 1.0).abs() < 1e-3, || format!("anchor {anchor}"))?;
        ensure(segment.windows(2).all(|w| w[1] >= w[0] - 1e-6), || format!("not monotone: {segment:?}"))?;
        let mut in_band = true;
        let mut notes = Vec::new();
        for (objective, pinned, reported) in PINNED {
            let b = bound(REPORTED_CHSH, objective)?;
            ensure((b.relaxation_value - pinned).abs() < 1e-3, || {
                format!("{objective:?} moved: {} vs pinned {pinned}", b.relaxation_value)
            })?;
            ensure(b.lower_bound <= b.relaxation_value + 1e-9, || format!("{objective:?} bound above value"))?;
            in_band &= (b.lower_bound - reported).abs() <= 0.01;
            notes.push(format!("{:.4}/{reported}", b.lower_bound));
        }
        let msg = format!("anchor {anchor:.5}, segment monotone, bound/reported {}", notes.join(" "));
        Ok((in_band, msg))
    };
    match run() {
        Ok((true, msg)) => Outcome::Pass(msg),
        Ok((false, msg)) => Outcome::Fallback(format!("reference band +-0.01 missed; pinned and sound; {msg}")),
        Err(msg) => Outcome::Fail(msg),
    }
}

fn soundness() -> Check {
    let config = Config { cases: 20, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let lines = chsh_line_polys();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let w = (0.9f64..=1.0).new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let r = Realization::depolarized(w).map_err(|e| e.to_string())?;
        let chsh = [0, 1, 2].map(|k| r.evaluate(&lines[k]).min(2.0 * SQRT_2));
        let truth = (1..=3).map(|j| r.swap_fidelity(j).unwrap()).sum::<f64>() / 3.0;
        let b = bound(chsh, FidelityObjective::Average)?.lower_bound;
        ensure(b <= truth + 1e-6, || format!("w={w}: bound {b} exceeds fidelity {truth}"))?;
        worst = worst.max(b - truth);
    }
    Ok(format!("20 realizations, max(bound - fidelity) {worst:.4}"))
}

fn bowles() -> Check {
    let mut notes = Vec::new();
    for (v, floor, reported) in [(0.7, 0.9999, 0.99998), (0.6, 0.99998, 0.99999)] {
        let f = bowles_min_fidelity(v, 1.0).unwrap().ok_or_else(|| format!("v={v} never certifies"))?;
        ensure(f > floor, || format!("v={v}: {f}"))?;
        let ratio = (1.0 - f) / (1.0 - reported);
        ensure((0.1..=10.0).contains(&ratio), || format!("v={v}: 1-f ratio {ratio}"))?;
        notes.push(format!("v={v}: f={f:.7}"));
    }
    Ok(notes.join(", "))
}

fn statistics() -> Check {
    let cfg = ProtocolConfig::with_visibility(0.9951);
    let counts = simulate_counts(&cfg, 1_000_000, 11).map_err(|e| e.to_string())?;
    let est = bootstrap_chsh(&counts, 400, 12).map_err(|e| e.to_string())?;
    ensure(est.stderr.iter().all(|s| (3e-4..=3e-3).contains(s)), || format!("CHSH stderr {:?}", est.stderr))?;
    let mut scaled = Vec::new();
    for (k, n) in [100_000u64, 1_000_000, 10_000_000].into_iter().enumerate() {
        let counts = simulate_counts(&cfg, n, 20 + k as u64).map_err(|e| e.to_string())?;
        let se = bootstrap_witness(&counts, REPORTED_F, 400, 30 + k as u64).map_err(|e| e.to_string())?.stderr.unwrap();
        scaled.push(se * (n as f64).sqrt());
    }
    let mean = scaled.iter().sum::<f64>() / 3.0;
    ensure(scaled.iter().all(|s| (s / mean - 1.0).abs() < 0.2), || format!("stderr*sqrt(n) {scaled:?}"))?;
    Ok(format!("CHSH stderr {:.2e}, stderr*sqrt(n) {:.3}/{:.3}/{:.3}", est.stderr[0], scaled[0], scaled[1], scaled[2]))
}

fn waveplates() -> Check {
    let mut worst: f64 = 0.0;
    for row in WAVEPLATE_TABLE {
        let measured = waveplate_observable(row.setting);
        // rows without a Y component do not depend on the sign
        let d = [1.0, -1.0]
            .map(|s| measured.matrix().max_abs_diff(&bloch_observable(row.target, s)))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        ensure(d < 1e-10, || format!("{} {}: distance {d:.3e}", row.party, row.observable))?;
        worst = worst.max(d);
    }
    let yz = WAVEPLATE_TABLE.iter().find(|r| r.party == "Bob" && r.observable == "Y+Z").unwrap();
    let off = [1.0, -1.0]
        .map(|s| waveplate_observable(YZ_HWP_11_45).matrix().max_abs_diff(&bloch_observable(yz.target, s)))
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    ensure(off > 1e-3, || "HWP at 11.45 degrees unexpectedly matches Y+Z".into())?;
    Ok(format!("{} rows, max distance {worst:.1e}; HWP 11.45 off by {off:.3}", WAVEPLATE_TABLE.len()))
}

fn oracle() -> Check {
    let opts = LhsOptions::default();
    for k in 0..=4 {
        let v = 0.5 + 0.05 * k as f64;
        let rho = werner(v).unwrap();
        let verdict = lhs_brute_force_state(&rho, &opts);
        let steerable = w_s_three_pauli(&rho).unwrap().violated;
        ensure(verdict.feasible != steerable, || format!("v={v}: oracle {} vs witness {steerable}", verdict.feasible))?;
    }
    let (mut lo, mut hi) = (0.5, 0.7);
    for _ in 0..10 {
        let mid = 0.5 * (lo + hi);
        if lhs_brute_force_state(&werner(mid).unwrap(), &opts).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let edge = 0.5 * (lo + hi);
    ensure((edge - 1.0 / SQRT_3).abs() < 0.01, || format!("transition at {edge}"))?;
    Ok(format!("agree on 0.50..0.70, transition {edge:.4}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("witness chain", || witness_chain().into()),
        ("thresholds", || thresholds().into()),
        ("payoff", || payoff().into()),
        ("self-testing SDP", selftest_sdp),
        ("relaxation soundness", || soundness().into()),
        ("Bowles comparison", || bowles().into()),
        ("statistics", || statistics().into()),
        ("wave-plate table", || waveplates().into()),
        ("oracle agreement", || oracle().into()),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str()) && *f != (k + 1).to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(msg) => println!("criterion {}: PASS {name} ({secs:.1}s): {msg}", k + 1),
            Outcome::Fallback(msg) => println!("criterion {}: FAIL (band) {name}, fallback holds ({secs:.1}s): {msg}", k + 1),
            Outcome::Fail(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.1}s): {msg}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

impl From<Check> for Outcome {
    fn from(c: Check) -> Self {
        match c {
            Ok(msg) => Outcome::Pass(msg),
            Err(msg) => Outcome::Fail(msg),
        }
    }
}
