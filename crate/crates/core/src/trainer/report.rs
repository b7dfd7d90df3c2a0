use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TrainConfig, TrainError};
use crate::network::Variant;
use crate::physics::{read_loss_csv, LossBreakdown};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub epoch: usize,
    pub term: String,
}

/// Summary of one training run. The per-epoch history lives in the run
/// directory's `loss.csv`; `report.json` holds everything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub variant: Variant,
    pub alpha_deg: Option<f64>,
    pub points: usize,
    /// Epochs run in each phase.
    pub adam_epochs: usize,
    pub lbfgs_epochs: usize,
    pub lbfgs_failed_line_searches: usize,
    pub initial: LossBreakdown,
    /// Last finite entry of the history (the initial loss if there is none).
    pub final_loss: LossBreakdown,
    pub duration_secs: f64,
    pub diverged: Option<Divergence>,
    /// File name of the final checkpoint inside the run directory.
    pub final_checkpoint: Option<String>,
    pub config: TrainConfig,
    /// Loss after every epoch.
    #[serde(skip)]
    pub history: Vec<LossBreakdown>,
}

impl RunReport {
    pub fn epochs(&self) -> usize {
        self.history.len()
    }

    /// Read `report.json` and `loss.csv` from a run directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, TrainError> {
        let dir = dir.as_ref();
        let mut report: RunReport = serde_json::from_reader(File::open(dir.join(super::REPORT_FILE))?)
            .map_err(|e| TrainError::Config(format!("{}: {e}", dir.join(super::REPORT_FILE).display())))?;
        let rows = read_loss_csv(File::open(dir.join(super::LOSS_FILE))?)
            .map_err(|e| TrainError::Config(format!("{}: {e}", dir.join(super::LOSS_FILE).display())))?;
        report.history = rows.into_iter().filter(|(epoch, _)| *epoch > 0).map(|(_, l)| l).collect();
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    /// Epoch (1-based; 0 is the initial state) of the loss used for each run.
    pub final_epoch_a: usize,
    pub final_epoch_b: usize,
    pub final_loss_a: f64,
    pub final_loss_b: f64,
    /// `(loss_a − loss_b) / loss_a`; positive when run b ends lower.
    pub relative_difference: f64,
    /// The run's history ends in non-finite values.
    pub truncated_a: bool,
    pub truncated_b: bool,
    /// Total loss per epoch, side by side, padded with `None`.
    #[serde(skip)]
    pub curves: Vec<(usize, Option<f64>, Option<f64>)>,
}

fn last_finite(report: &RunReport) -> (usize, f64, bool) {
    let h = &report.history;
    match h.iter().rposition(|l| l.total.is_finite()) {
        Some(i) => (i + 1, h[i].total, i + 1 < h.len()),
        None => (0, report.initial.total, !h.is_empty()),
    }
}

/// Align two runs' loss curves and compare their final losses.
pub fn compare(a: &RunReport, b: &RunReport) -> ComparisonReport {
    let (ea, la, ta) = last_finite(a);
    let (eb, lb, tb) = last_finite(b);
    let n = a.history.len().max(b.history.len());
    let at = |r: &RunReport, e: usize| -> Option<f64> {
        if e == 0 {
            Some(r.initial.total)
        } else {
            r.history.get(e - 1).map(|l| l.total)
        }
    };
    ComparisonReport {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        final_epoch_a: ea,
        final_epoch_b: eb,
        final_loss_a: la,
        final_loss_b: lb,
        relative_difference: if la == lb { 0.0 } else { (la - lb) / la },
        truncated_a: ta,
        truncated_b: tb,
        curves: (0..=n).map(|e| (e, at(a, e), at(b, e))).collect(),
    }
}

impl ComparisonReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: final loss {:.6e} (epoch {}){}\n{}: final loss {:.6e} (epoch {}){}\nrelative difference (a - b) / a = {:+.2}%",
            self.label_a,
            self.final_loss_a,
            self.final_epoch_a,
            if self.truncated_a { " [truncated: non-finite tail]" } else { "" },
            self.label_b,
            self.final_loss_b,
            self.final_epoch_b,
            if self.truncated_b { " [truncated: non-finite tail]" } else { "" },
            100.0 * self.relative_difference,
        );
        s.push('\n');
        s
    }

    pub fn write_curves_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["epoch", &self.label_a, &self.label_b])?;
        let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for &(e, a, b) in &self.curves {
            w.write_record([e.to_string(), cell(a), cell(b)])?;
        }
        w.flush()?;
        Ok(())
    }
}
