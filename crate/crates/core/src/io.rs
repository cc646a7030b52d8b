//! File interfaces: one-column dataset CSVs, release output (per-dataset
//! CSVs plus a JSON manifest and a ledger audit file), simulation results
//! CSV, inference rows, and JSON simulation configs.
//!
//! All numeric output uses the shortest round-trip float formatting, so a
//! rerun with the same seed produces byte-identical files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::budget::BudgetLedger;
use crate::error::Error;
use crate::inference::CombinedInference;
use crate::release::{ReleasePlan, SyntheticRelease};
use crate::sim::{SimConfig, SimResultRow};
use crate::types::{Bounds, Dataset, SufficientStatVector};
use crate::Result;

/// Read a one-column CSV (header row required) into a bounded dataset.
pub fn read_dataset_csv(path: &Path, bounds: Bounds) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = record
            .get(0)
            .ok_or_else(|| Error::InvalidConfig("empty CSV record".into()))?;
        let value: f64 = field.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("could not parse record {:?} as a number", field))
        })?;
        values.push(value);
    }
    Dataset::new(values, bounds)
}

/// Write a dataset as a one-column CSV with a `value` header.
pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = String::with_capacity(data.len() * 12 + 8);
    out.push_str("value\n");
    for v in data.values() {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ReleaseManifest<'a> {
    plan: &'a ReleasePlan,
    per_release_epsilon: f64,
    dataset_files: Vec<String>,
    sanitized_stats: &'a [SufficientStatVector],
    scales: &'a [Vec<f64>],
    ledger: &'a BudgetLedger,
}

/// File names used when a release is written out.
pub fn release_dataset_filename(plan: &ReleasePlan, k: usize, l: usize) -> String {
    if plan.t == 1 {
        format!("synthetic_{:04}.csv", k + 1)
    } else {
        format!("synthetic_k{:04}_l{:04}.csv", k + 1, l + 1)
    }
}

/// Write a release: one CSV per dataset, `manifest.json` with plan and
/// provenance, and `ledger.txt` with the line-oriented budget audit.
pub fn write_release(dir: &Path, release: &SyntheticRelease) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut names = Vec::new();
    for k in 0..release.plan.m {
        for l in 0..release.plan.t {
            let name = release_dataset_filename(&release.plan, k, l);
            let path = dir.join(&name);
            write_dataset_csv(&path, release.dataset(k, l))?;
            names.push(name);
            files.push(path);
        }
    }

    let manifest = ReleaseManifest {
        plan: &release.plan,
        per_release_epsilon: release.per_release_epsilon,
        dataset_files: names,
        sanitized_stats: &release.sanitized_stats,
        scales: &release.scales,
        ledger: &release.ledger,
    };
    let manifest_path = dir.join("manifest.json");
    let mut out = serde_json::to_string_pretty(&manifest)?;
    out.push('\n');
    fs::write(&manifest_path, out)?;
    files.push(manifest_path);

    let ledger_path = dir.join("ledger.txt");
    fs::write(&ledger_path, release.ledger.audit_lines())?;
    files.push(ledger_path);
    Ok(files)
}

/// Exact header of the simulation results CSV.
pub const RESULTS_HEADER: &str =
    "n,bounds_lo,bounds_hi,mechanism,m,epsilon,replicates,bias,mean_varpi,mean_u,emp_var,cp";

/// Render simulation rows as CSV text.
pub fn results_csv(rows: &[SimResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.bounds_lo,
            r.bounds_hi,
            r.mechanism,
            r.m,
            r.epsilon,
            r.replicates,
            r.bias,
            r.mean_varpi,
            r.mean_u,
            r.emp_var,
            r.cp
        ));
    }
    out
}

pub fn write_results_csv(path: &Path, rows: &[SimResultRow]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(results_csv(rows).as_bytes())?;
    Ok(())
}

/// Header of the inference CSV emitted by analyses.
pub const INFERENCE_HEADER: &str = "theta_bar,varpi,b,u,nu,ci_lower,ci_upper,method";

/// One CSV row per analysis; absent fields (single-release `b`, `nu`) stay
/// empty.
pub fn inference_csv_row(inf: &CombinedInference) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{}",
        inf.theta_bar,
        inf.varpi,
        opt(inf.b),
        inf.u,
        opt(inf.nu),
        inf.ci_lower,
        inf.ci_upper,
        inf.method.as_str()
    )
}

/// Load and validate a JSON simulation config.
pub fn read_sim_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path)?;
    let config: SimConfig = serde_json::from_str(&text)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::MechanismSpec;
    use crate::models::GaussianKnownVarianceModel;
    use crate::release::modips_release;
    use crate::rng::RngStream;

    fn tempdir() -> tempfile::TempDir {
        tempfile::tempdir().expect("tempdir")
    }

    #[test]
    fn dataset_csv_round_trip() {
        let dir = tempdir();
        let path = dir.path().join("x.csv");
        let bounds = Bounds::new(-4.0, 4.0).unwrap();
        let data = Dataset::new(vec![0.5, -1.25, 3.0], bounds).unwrap();
        write_dataset_csv(&path, &data).unwrap();
        let back = read_dataset_csv(&path, bounds).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn dataset_csv_bounds_are_enforced_on_read() {
        let dir = tempdir();
        let path = dir.path().join("x.csv");
        fs::write(&path, "value\n9.5\n").unwrap();
        let bounds = Bounds::new(-4.0, 4.0).unwrap();
        assert!(matches!(
            read_dataset_csv(&path, bounds),
            Err(Error::ValueOutOfBounds { .. })
        ));
    }

    #[test]
    fn dataset_csv_rejects_garbage() {
        let dir = tempdir();
        let path = dir.path().join("x.csv");
        fs::write(&path, "value\nabc\n").unwrap();
        let bounds = Bounds::new(-4.0, 4.0).unwrap();
        assert!(read_dataset_csv(&path, bounds).is_err());
    }

    #[test]
    fn release_writes_datasets_manifest_and_ledger() {
        let dir = tempdir();
        let bounds = Bounds::new(-4.0, 4.0).unwrap();
        let model = GaussianKnownVarianceModel::new(1.0, bounds).unwrap();
        let values = crate::models::truncated_normal_draws(
            0.0,
            1.0,
            bounds,
            60,
            &mut RngStream::from_seed(4),
        );
        let data = Dataset::new(values, bounds).unwrap();
        let plan = crate::release::ReleasePlan::new(
            3,
            1,
            1.0,
            MechanismSpec::truncated_laplace(),
            11,
        )
        .unwrap();
        let release = modips_release(&model, &data, &plan).unwrap();
        let files = write_release(dir.path(), &release).unwrap();
        assert_eq!(files.len(), 5); // 3 datasets + manifest + ledger

        let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(manifest.contains("\"per_release_epsilon\""));
        assert!(manifest.contains("synthetic_0001.csv"));
        assert!(manifest.contains("truncated-laplace"));

        let ledger = fs::read_to_string(dir.path().join("ledger.txt")).unwrap();
        assert_eq!(ledger.lines().count(), 3);
        assert!(ledger.starts_with("sanitize[0]\t"));
    }

    #[test]
    fn results_header_is_pinned() {
        assert_eq!(
            RESULTS_HEADER,
            "n,bounds_lo,bounds_hi,mechanism,m,epsilon,replicates,bias,mean_varpi,mean_u,emp_var,cp"
        );
        let rows = vec![SimResultRow {
            n: 100,
            bounds_lo: -4.0,
            bounds_hi: 4.0,
            mechanism: "truncated-laplace".into(),
            m: 5,
            epsilon: 1.0,
            replicates: 10,
            bias: 0.5,
            mean_varpi: 0.25,
            mean_u: 0.5,
            emp_var: 0.75,
            cp: 0.9,
        }];
        let text = results_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RESULTS_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "100,-4,4,truncated-laplace,5,1,10,0.5,0.25,0.5,0.75,0.9"
        );
    }

    #[test]
    fn inference_row_blank_fields_for_single_release() {
        let inf = crate::inference::single_release_inference(0.0, 1.0, 0.95).unwrap();
        let row = inference_csv_row(&inf);
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[2], "");
        assert_eq!(fields[4], "");
        assert_eq!(fields[7], "uncorrected");
    }

    #[test]
    fn sim_config_json_round_trip_with_defaults() {
        let dir = tempdir();
        let path = dir.path().join("sim.json");
        fs::write(
            &path,
            r#"{
                "n_values": [100],
                "bounds_list": [{"lower": -4.0, "upper": 4.0}],
                "m_values": [1, 5],
                "epsilon": 1.0,
                "mechanisms": ["truncated-laplace", "bit-laplace"],
                "seed": 7
            }"#,
        )
        .unwrap();
        let config = read_sim_config(&path).unwrap();
        assert_eq!(config.replicates, 500);
        assert_eq!(config.level, 0.95);
        assert_eq!(config.sigma, 1.0);
        assert_eq!(config.mu, 0.0);
        assert_eq!(config.mechanisms.len(), 2);
    }

    #[test]
    fn sim_config_rejects_invalid_json_values() {
        let dir = tempdir();
        let path = dir.path().join("sim.json");
        fs::write(
            &path,
            r#"{"n_values": [0], "bounds_list": [{"lower": -4.0, "upper": 4.0}],
                "m_values": [1], "epsilon": 1.0, "mechanisms": ["truncated-laplace"]}"#,
        )
        .unwrap();
        assert!(read_sim_config(&path).is_err());
    }
}
