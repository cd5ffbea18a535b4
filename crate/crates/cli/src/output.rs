use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;
use wiener_coupling::record::EstimateRecord;

use crate::config::ExperimentConfig;
use crate::outcome::Outcome;
use crate::CliError;

pub const CSV_COLUMNS: [&str; 8] = ["experiment", "param_key", "param_value", "p", "value", "std_error", "n_paths", "seed"];

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// `param_key` is the record name followed by its parameter names, and
/// `param_value` the parameter values, both `;`-separated.
fn row(experiment: &str, r: &EstimateRecord) -> [String; 8] {
    let mut key = r.name.clone();
    let mut values = Vec::with_capacity(r.parameters.len());
    for (k, v) in &r.parameters {
        key.push(';');
        key.push_str(k);
        values.push(format!("{v}"));
    }
    [
        experiment.to_string(),
        key,
        values.join(";"),
        r.p.map(|p| format!("{p}")).unwrap_or_default(),
        format!("{}", r.value),
        format!("{}", r.std_error),
        r.n_paths.to_string(),
        r.seed.to_string(),
    ]
}

/// CSV text of the records, optionally preceded by a `# generated_unix=` line.
pub fn results_csv(experiment: &str, outcome: &Outcome, timestamp: bool) -> Result<String, CliError> {
    let mut head = String::new();
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        head = format!("# generated_unix={secs}\n");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in &outcome.records {
        w.write_record(row(experiment, r)).map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(io)?).map_err(io)?;
    Ok(head + &body)
}

pub fn summary(config: &ExperimentConfig, outcome: &Outcome) -> serde_json::Value {
    json!({
        "experiment": config.experiment,
        "seed": config.seed,
        "config": config,
        "claims": outcome.claims,
        "rate_fits": outcome.rate_fits,
        "pass": outcome.pass(),
    })
}

/// Write `results.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, outcome: &Outcome, timestamp: bool) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Run(format!("cannot create {}: {e}", dir.display())))?;
    std::fs::write(dir.join("results.csv"), results_csv(&config.experiment, outcome, timestamp)?).map_err(io)?;
    let text = serde_json::to_string_pretty(&summary(config, outcome)).map_err(io)?;
    std::fs::write(dir.join("summary.json"), text + "\n").map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Claim;

    fn sample() -> Outcome {
        let mut o = Outcome::default();
        o.records.push(EstimateRecord::new("x", 0.5, 0.01, 10, 3).with("c", 0.25).with("a", 0.0));
        o.claims.push(Claim::within("id", "d", 1.0, 1.0, 0.0));
        o
    }

    #[test]
    fn csv_layout() {
        let text = results_csv("demo", &sample(), false).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1], "demo,x;a;c,0;0.25,,0.5,0.01,10,3");
        assert!(results_csv("demo", &sample(), true).unwrap().starts_with("# generated_unix="));
    }

    #[test]
    fn summary_carries_claim_fields() {
        let v = summary(&ExperimentConfig::new("demo", 3), &sample());
        let claim = &v["claims"][0];
        for key in ["paper_claim_id", "expected_exponent_or_value", "measured", "tolerance", "pass"] {
            assert!(claim.get(key).is_some(), "{key}");
        }
        assert_eq!(v["pass"], true);
    }
}
