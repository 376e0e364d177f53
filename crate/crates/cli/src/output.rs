use std::path::{Path, PathBuf};

use fps_precoding::EvalResult;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;
use crate::CliError;

pub const CSV_COLUMNS: [&str; 9] = [
    "sweep_var",
    "sweep_value",
    "algorithm",
    "mean_se",
    "std_se",
    "n_realizations",
    "mean_iterations",
    "mean_candidate_set_size",
    "runtime_ms",
];

/// Contents of the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub manifest: RunManifest,
    pub results: Vec<EvalResult>,
}

/// The sidecar sits next to the CSV with a `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// One row per sweep point and algorithm. Reals use shortest round-trip
/// formatting; empty cells mean "not applicable" (candidate sizes for the
/// digital benchmark, runtimes unless timing was requested).
pub fn csv_body(results: &[EvalResult], timing: bool) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in results {
        w.write_record([
            r.sweep_var.clone(),
            r.sweep_value.to_string(),
            r.algorithm_tag.clone(),
            r.mean_se.to_string(),
            r.std_se.to_string(),
            r.n_realizations().to_string(),
            r.mean_iterations.to_string(),
            r.mean_candidate_set_size
                .map(|v| v.to_string())
                .unwrap_or_default(),
            if timing {
                r.runtime_ms.to_string()
            } else {
                String::new()
            },
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn render_csv(manifest: &RunManifest, results: &[EvalResult]) -> Result<String, CliError> {
    let mut out = String::new();
    for line in manifest.header_lines() {
        out.push_str("# ");
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&csv_body(results, manifest.timing)?);
    Ok(out)
}

/// Strips the `# ` header lines.
pub fn strip_header(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn write_outputs(manifest: &RunManifest, results: &[EvalResult]) -> Result<PathBuf, CliError> {
    let csv = render_csv(manifest, results)?;
    std::fs::write(&manifest.output_path, csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", manifest.output_path.display())))?;
    let sidecar = sidecar_path(&manifest.output_path);
    let record = RunRecord {
        manifest: manifest.clone(),
        results: results.to_vec(),
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&sidecar, json)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", sidecar.display())))?;
    Ok(sidecar)
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
