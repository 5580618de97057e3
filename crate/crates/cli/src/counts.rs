//! JSON schemas for counts records and behaviors.
//!
//! ```json
//! {"config": {...}, "seed": 7,
//!  "counts": [{"x": 1, "z": 1, "a": 1, "c": -1, "bob": "yes", "n": 12345}, ...],
//!  "chsh_counts": [{"y": 1, "z": 1, "b": 1, "c": 1, "n": 6789}, ...]}
//! ```

use disteer_core::behavior::{
    chsh_cell, chsh_cell_labels, chsh_labels, chsh_setting, steering_cell, steering_cell_labels, steering_labels,
    steering_setting, Behavior, BobAnswer, ALICE_SETTINGS, BOB_CHSH_SETTINGS, CHARLIE_SETTINGS, CHSH_SETTINGS,
    STEERING_SETTINGS,
};
use disteer_core::model::Outcome;
use disteer_core::protocol::{CountsRecord, ProtocolConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::numfmt::num;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringCount {
    pub x: usize,
    pub z: usize,
    pub a: i64,
    pub c: i64,
    pub bob: String,
    pub n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshCount {
    pub y: usize,
    pub z: usize,
    pub b: i64,
    pub c: i64,
    pub n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFile {
    #[serde(default)]
    pub config: Option<ProtocolConfig>,
    pub seed: u64,
    pub counts: Vec<SteeringCount>,
    pub chsh_counts: Vec<ChshCount>,
}

impl From<&CountsRecord> for CountsFile {
    fn from(r: &CountsRecord) -> Self {
        let mut counts = Vec::with_capacity(STEERING_SETTINGS * 8);
        for (s, cells) in r.steering.iter().enumerate() {
            let (x, z) = steering_labels(s);
            for (cell, &n) in cells.iter().enumerate() {
                let (a, bob, c) = steering_cell_labels(cell);
                counts.push(SteeringCount {
                    x,
                    z,
                    a: a.value() as i64,
                    c: c.value() as i64,
                    bob: bob.as_str().into(),
                    n,
                });
            }
        }
        let mut chsh_counts = Vec::with_capacity(CHSH_SETTINGS * 4);
        for (s, cells) in r.chsh.iter().enumerate() {
            let (y, z) = chsh_labels(s);
            for (cell, &n) in cells.iter().enumerate() {
                let (b, c) = chsh_cell_labels(cell);
                chsh_counts.push(ChshCount { y, z, b: b.value() as i64, c: c.value() as i64, n });
            }
        }
        Self { config: r.config, seed: r.seed, counts, chsh_counts }
    }
}

fn outcome(v: i64, what: &str, at: &str) -> Result<Outcome, CliError> {
    Outcome::from_value(v).ok_or_else(|| CliError::Schema(format!("{at}: {what}={v} is not +1 or -1")))
}

fn setting(v: usize, max: usize, what: &str, at: &str) -> Result<usize, CliError> {
    if (1..=max).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::Schema(format!("{at}: {what}={v} outside 1..={max}")))
    }
}

impl TryFrom<&CountsFile> for CountsRecord {
    type Error = CliError;

    fn try_from(f: &CountsFile) -> Result<Self, CliError> {
        let mut steering = [[0u64; 8]; STEERING_SETTINGS];
        let mut seen_s = [[false; 8]; STEERING_SETTINGS];
        for (i, e) in f.counts.iter().enumerate() {
            let at = format!("counts[{i}]");
            let x = setting(e.x, ALICE_SETTINGS, "x", &at)?;
            let z = setting(e.z, CHARLIE_SETTINGS, "z", &at)?;
            let bob = match e.bob.as_str() {
                "yes" => BobAnswer::Yes,
                "no" => BobAnswer::No,
                other => return Err(CliError::Schema(format!("{at}: bob={other:?} is not \"yes\" or \"no\""))),
            };
            let s = steering_setting(x, z);
            let cell = steering_cell(outcome(e.a, "a", &at)?, bob, outcome(e.c, "c", &at)?);
            if seen_s[s][cell] {
                return Err(CliError::Schema(format!(
                    "{at}: duplicate cell x={x} z={z} a={} c={} bob={}",
                    e.a, e.c, e.bob
                )));
            }
            seen_s[s][cell] = true;
            steering[s][cell] = e.n;
        }
        let mut chsh = [[0u64; 4]; CHSH_SETTINGS];
        let mut seen_c = [[false; 4]; CHSH_SETTINGS];
        for (i, e) in f.chsh_counts.iter().enumerate() {
            let at = format!("chsh_counts[{i}]");
            let y = setting(e.y, BOB_CHSH_SETTINGS, "y", &at)?;
            let z = setting(e.z, CHARLIE_SETTINGS, "z", &at)?;
            let s = chsh_setting(y, z);
            let cell = chsh_cell(outcome(e.b, "b", &at)?, outcome(e.c, "c", &at)?);
            if seen_c[s][cell] {
                return Err(CliError::Schema(format!("{at}: duplicate cell y={y} z={z} b={} c={}", e.b, e.c)));
            }
            seen_c[s][cell] = true;
            chsh[s][cell] = e.n;
        }
        // absent cells count as zero events
        Ok(CountsRecord { config: f.config, seed: f.seed, steering, chsh })
    }
}

pub fn counts_to_json(r: &CountsRecord) -> String {
    let mut s = serde_json::to_string_pretty(&CountsFile::from(r)).expect("counts serialize");
    s.push('\n');
    s
}

pub fn counts_from_json(text: &str) -> Result<CountsRecord, CliError> {
    let f: CountsFile = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    CountsRecord::try_from(&f)
}

/// Behavior with the counts addressing plus `p` and `stderr`.
pub fn behavior_to_json(beh: &Behavior) -> Value {
    let mut steering = Vec::new();
    for s in 0..STEERING_SETTINGS {
        let (x, z) = steering_labels(s);
        for cell in 0..8 {
            let (a, bob, c) = steering_cell_labels(cell);
            let se = beh.steering_stderr.map(|t| t[s][cell]);
            steering.push(json!({
                "x": x, "z": z, "a": a.value() as i64, "c": c.value() as i64, "bob": bob.as_str(),
                "p": num(beh.steering[s][cell]), "stderr": se.map_or(Value::Null, num),
            }));
        }
    }
    let mut chsh = Vec::new();
    for s in 0..CHSH_SETTINGS {
        let (y, z) = chsh_labels(s);
        for cell in 0..4 {
            let (b, c) = chsh_cell_labels(cell);
            let se = beh.chsh_stderr.map(|t| t[s][cell]);
            chsh.push(json!({
                "y": y, "z": z, "b": b.value() as i64, "c": c.value() as i64,
                "p": num(beh.chsh[s][cell]), "stderr": se.map_or(Value::Null, num),
            }));
        }
    }
    json!({ "steering": steering, "chsh": chsh })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record() -> impl Strategy<Value = CountsRecord> {
        (
            any::<u64>(),
            proptest::array::uniform9(proptest::array::uniform8(0u64..1 << 40)),
            proptest::collection::vec(proptest::array::uniform4(0u64..1 << 40), CHSH_SETTINGS),
            proptest::option::of(0.0f64..=1.0),
        )
            .prop_map(|(seed, steering, chsh, v)| CountsRecord {
                config: v.map(ProtocolConfig::with_visibility),
                seed,
                steering,
                chsh: chsh.try_into().unwrap(),
            })
    }

    proptest! {
        #[test]
        fn counts_round_trip(r in record()) {
            prop_assert_eq!(counts_from_json(&counts_to_json(&r)).unwrap(), r);
        }
    }

    #[test]
    fn bad_outcome_names_the_cell() {
        let text = r#"{"seed": 0, "counts": [], "chsh_counts": [{"y": 7, "z": 1, "b": 1, "c": 1, "n": 1}]}"#;
        let err = counts_from_json(text).unwrap_err().to_string();
        assert!(err.contains("chsh_counts[0]") && err.contains("y=7"), "{err}");
    }
}
