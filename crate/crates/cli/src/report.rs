//! Report assembly and output files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::scenario::Scenario;

pub const TOOLKIT: &str = "cdglue";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    InputError,
    NumericalError,
}

impl Status {
    /// 0 pass, 1 failed check, 2 input error, 3 numerical failure.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::InputError => 2,
            Status::NumericalError => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskError {
    pub message: String,
}

impl From<&cdglue::Error> for TaskError {
    fn from(e: &cdglue::Error) -> Self {
        TaskError { message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub index: usize,
    pub kind: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<TaskError>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub task_seconds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub toolkit: String,
    pub version: String,
    pub scenario: Scenario,
    pub tasks: Vec<TaskOutcome>,
    /// The most severe task status.
    pub status: Status,
    pub exit_code: i32,
    pub timing: Timing,
}

impl Report {
    pub fn new(scenario: Scenario, tasks: Vec<TaskOutcome>, timing: Timing) -> Self {
        let status = tasks.iter().map(|t| t.status).max().unwrap_or(Status::Pass);
        Report {
            toolkit: TOOLKIT.into(),
            version: VERSION.into(),
            scenario,
            tasks,
            status,
            exit_code: status.exit_code(),
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report with the timing block removed; identical across reruns.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    /// CSV tables of every smoothing sweep, keyed by task index.
    pub fn sweep_tables(&self) -> Vec<(usize, String)> {
        self.tasks
            .iter()
            .filter(|t| t.kind == "smooth_sweep")
            .filter_map(|t| {
                let rows = t.result.as_ref()?.get("rows")?.as_array()?;
                let mut csv = String::from("delta,sup_metric_distance,min_bakry_emery_eig,epsilon\n");
                for r in rows {
                    let col = |k: &str| r.get(k).and_then(Value::as_f64).map_or("nan".to_string(), |x| format!("{x:e}"));
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        col("delta"),
                        col("sup_metric_distance"),
                        col("min_bakry_emery_eig"),
                        col("epsilon")
                    ));
                }
                Some((t.index, csv))
            })
            .collect()
    }

    /// Writes `report.json` and one `sweep_<task>.csv` per sweep; returns
    /// the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json() + "\n")?;
        out.push(path);
        for (i, csv) in self.sweep_tables() {
            let path = dir.join(format!("sweep_{i}.csv"));
            std::fs::write(&path, csv)?;
            out.push(path);
        }
        Ok(out)
    }
}
