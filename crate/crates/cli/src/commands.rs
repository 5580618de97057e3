use std::fmt::Write as _;
use std::path::Path;

use disteer_core::protocol::{
    bootstrap_chsh, bootstrap_witness, estimate_behavior, exact_behavior, simulate_counts, CountsRecord,
};
use disteer_core::selftest::{
    fidelity_lower_bound, fidelity_to_trace_distance, FidelityBound, FidelityObjective, SelftestOptions,
};
use disteer_core::witness::{chsh_lines, chsh_of_werner, noisy_payoff, noisy_threshold, WitnessReport};
use serde_json::{json, Value};

use crate::config::{check_grid, Format, Settings};
use crate::counts::{counts_from_json, counts_to_json};
use crate::numfmt::{num, nums, opt_num, sig};
use crate::output::{emit, read_to_string};
use crate::CliError;

/// Visibilities of the six experimental points.
pub const DEFAULT_GRID: [f64; 6] = [0.6469, 0.6742, 0.7015, 0.8090, 0.9239, 0.9951];
pub const DEFAULT_RESAMPLES: usize = 200;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

pub fn read_counts(path: &Path) -> Result<CountsRecord, CliError> {
    counts_from_json(&read_to_string(path)?)
}

/// Lower bounds on `f_1, f_2, f_3` and the average, one relaxation each.
#[derive(Debug, Clone)]
pub struct SelftestSummary {
    pub chsh: [f64; 3],
    pub per_setting: [FidelityBound; 3],
    pub average: FidelityBound,
}

impl SelftestSummary {
    pub fn fidelities(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| self.per_setting[j].lower_bound.clamp(0.0, 1.0))
    }
}

pub fn selftest_bounds(chsh: [f64; 3]) -> Result<SelftestSummary, CliError> {
    let opts = SelftestOptions::default();
    let per = |j| fidelity_lower_bound(chsh, FidelityObjective::Single(j), &opts);
    let per_setting = [per(1)?, per(2)?, per(3)?];
    let average = fidelity_lower_bound(chsh, FidelityObjective::Average, &opts)?;
    Ok(SelftestSummary { chsh, per_setting, average })
}

fn fidelity_source(s: &Settings) -> Result<[f64; 3], CliError> {
    match (s.fidelities, s.chsh) {
        (Some(_), Some(_)) => Err(CliError::Input("give either --fidelities or --chsh, not both".into())),
        (Some(f), None) => Ok(f),
        (None, Some(chsh)) => Ok(selftest_bounds(chsh)?.fidelities()),
        (None, None) => Ok([1.0; 3]),
    }
}

pub struct SweepRow {
    pub v: f64,
    pub payoff_ideal: f64,
    pub payoff_noisy: f64,
    pub chsh_value: f64,
    pub stderr: Option<f64>,
}

pub fn sweep_rows(s: &Settings) -> Result<(Vec<SweepRow>, [f64; 3]), CliError> {
    let grid = s.v_grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
    check_grid(&grid)?;
    let f = fidelity_source(s)?;
    let resamples = s.resamples.unwrap_or(DEFAULT_RESAMPLES);
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &v) in grid.iter().enumerate() {
        let cfg = s.protocol(v);
        let exact = exact_behavior(&cfg)?;
        let payoff_ideal = noisy_payoff(&exact, [1.0; 3])?.value;
        let (payoff_noisy, stderr) = match s.budget {
            None => (noisy_payoff(&exact, f)?.value, None),
            Some(0) => return Err(CliError::Input("budget must be positive".into())),
            Some(n) => {
                let seed = s.seed().wrapping_add(i as u64);
                let counts = simulate_counts(&cfg, n, seed)?;
                let point = noisy_payoff(&estimate_behavior(&counts)?, f)?.value;
                let boot = bootstrap_witness(&counts, f, resamples, seed)?;
                (point, boot.stderr)
            }
        };
        rows.push(SweepRow { v, payoff_ideal, payoff_noisy, chsh_value: chsh_of_werner(v), stderr });
    }
    Ok((rows, f))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("v,payoff_ideal,payoff_noisy,chsh_value,stderr\n");
    for r in rows {
        let se = r.stderr.map(sig).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sig(r.v),
            sig(r.payoff_ideal),
            sig(r.payoff_noisy),
            sig(r.chsh_value),
            se
        );
    }
    out
}

pub fn cmd_reproduce_fig3(s: &Settings) -> Result<(), CliError> {
    let (rows, f) = sweep_rows(s)?;
    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json_text(&json!({
            "fidelities": nums(&f),
            "rows": rows.iter().map(|r| json!({
                "v": num(r.v),
                "payoff_ideal": num(r.payoff_ideal),
                "payoff_noisy": num(r.payoff_noisy),
                "chsh_value": num(r.chsh_value),
                "stderr": opt_num(r.stderr),
            })).collect::<Vec<_>>(),
        })),
    };
    emit(s.out.as_deref(), &text)
}

fn bound_json(b: &FidelityBound) -> Value {
    json!({
        "lower_bound": num(b.lower_bound),
        "relaxation_value": num(b.relaxation_value),
        "iterations": b.iterations,
    })
}

pub fn selftest_report(s: &Settings) -> Result<Value, CliError> {
    let (chsh, stderr) = match (s.chsh, &s.from_counts) {
        (Some(_), Some(_)) => return Err(CliError::Input("give either --chsh or --from-counts, not both".into())),
        (Some(c), None) => (c, None),
        (None, Some(path)) => {
            let counts = read_counts(path)?;
            let beh = estimate_behavior(&counts)?;
            let est = bootstrap_chsh(&counts, s.resamples.unwrap_or(DEFAULT_RESAMPLES), s.seed())?;
            (chsh_lines(&beh), Some(est.stderr))
        }
        (None, None) => return Err(CliError::Input("selftest needs --chsh or --from-counts".into())),
    };
    let summary = selftest_bounds(chsh)?;
    let f = summary.fidelities();
    let avg = summary.average.lower_bound.clamp(0.0, 1.0);
    let td = |x: f64| fidelity_to_trace_distance(x).map(num).map_err(CliError::from);
    let b = &summary.per_setting;
    Ok(json!({
        "chsh": nums(&chsh),
        "chsh_stderr": stderr.map_or(Value::Null, |e| nums(&e)),
        "fidelity": {
            "f1": num(f[0]), "f2": num(f[1]), "f3": num(f[2]), "average": num(avg),
        },
        "trace_distance": {
            "f1": td(f[0])?, "f2": td(f[1])?, "f3": td(f[2])?, "average": td(avg)?,
        },
        "threshold": num(noisy_threshold(f)?),
        "relaxation": {
            "basis_size": summary.average.basis_size,
            "moment_count": summary.average.moment_count,
            "f1": bound_json(&b[0]), "f2": bound_json(&b[1]), "f3": bound_json(&b[2]),
            "average": bound_json(&summary.average),
        },
    }))
}

pub fn cmd_selftest(s: &Settings) -> Result<(), CliError> {
    let report = selftest_report(s)?;
    emit(s.out.as_deref(), &to_json_text(&report))
}

pub fn cmd_simulate(s: &Settings) -> Result<(), CliError> {
    let v = s.visibility.ok_or_else(|| CliError::Input("simulate needs --visibility".into()))?;
    let budget = s.budget.unwrap_or(DEFAULT_BUDGET);
    if budget == 0 {
        return Err(CliError::Input("budget must be positive".into()));
    }
    let counts = simulate_counts(&s.protocol(v), budget, s.seed())?;
    emit(s.out.as_deref(), &counts_to_json(&counts))
}

pub fn report_json(r: &WitnessReport) -> Value {
    json!({
        "kind": r.kind.to_string(),
        "value": num(r.value),
        "threshold": num(r.threshold),
        "violated": r.violated,
        "stderr": opt_num(r.stderr),
    })
}

pub fn verify_report(s: &Settings) -> Result<WitnessReport, CliError> {
    let path = s.from_counts.as_ref().ok_or_else(|| CliError::Input("verify needs --from-counts".into()))?;
    let counts = read_counts(path)?;
    let f = match (s.fidelities, s.chsh) {
        (None, None) => return Err(CliError::Input("verify needs --fidelities or --chsh".into())),
        _ => fidelity_source(s)?,
    };
    let point = noisy_payoff(&estimate_behavior(&counts)?, f)?;
    let boot = bootstrap_witness(&counts, f, s.resamples.unwrap_or(DEFAULT_RESAMPLES), s.seed())?;
    Ok(match boot.stderr {
        Some(e) => point.with_stderr(e),
        None => point,
    })
}

pub fn cmd_verify(s: &Settings) -> Result<(), CliError> {
    let report = verify_report(s)?;
    emit(s.out.as_deref(), &to_json_text(&report_json(&report)))
}
