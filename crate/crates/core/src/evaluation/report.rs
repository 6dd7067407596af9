//! Aligned plain-text rendering of an evaluation report.

use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::experiment::EvaluationReport;

const MODEL_WIDTH: usize = 22;

/// One table per demographic (model, F1, accuracy) followed by the cRank
/// table. Scores are printed with four decimals.
pub fn render_text_report(report: &EvaluationReport) -> String {
    let h = &report.header;
    let mut out = String::new();
    let _ = writeln!(out, "Celebrity profiling evaluation");
    let _ = writeln!(out, "seed: {}", h.seed);
    let _ = writeln!(out, "config fingerprint: {}", h.config_fingerprint);
    let _ = writeln!(out, "corpus fingerprint: {}", h.corpus_fingerprint);
    let _ = writeln!(out, "celebrities: {} ({} excluded by preprocessing)", h.n_celebrities, h.n_excluded);
    let _ = writeln!(out, "train/test: {}/{}", h.n_train, h.n_test);
    for s in &h.splits {
        let how = if s.stratified {
            format!("stratified on {}", s.stratified_on.name())
        } else {
            String::from("unstratified fallback")
        };
        let _ = writeln!(out, "split for {}: {how}", s.demographic.name());
    }
    let _ = writeln!(out, "f1: {}, macro averaged", report.config.f1_variant);
    let _ = writeln!(out);

    for &d in &report.config.demographics {
        let _ = writeln!(out, "{}", d.title());
        let _ = writeln!(out, "{:<MODEL_WIDTH$}{:>10}{:>10}", "Model", "F1-Score", "Accuracy");
        for cell in report.cells.iter().filter(|c| c.demographic == d) {
            let _ = writeln!(
                out,
                "{:<MODEL_WIDTH$}{:>10.4}{:>10.4}",
                cell.model.title(),
                cell.metrics.macro_f1,
                cell.metrics.accuracy
            );
        }
        let _ = writeln!(out);
    }

    let _ = write!(out, "cRank\n{:<MODEL_WIDTH$}", "Model");
    for &d in &report.config.demographics {
        let _ = write!(out, "{:>12}", d.title());
    }
    let _ = writeln!(out, "{:>10}", "cRank");
    for entry in &report.cranks {
        let _ = write!(out, "{:<MODEL_WIDTH$}", entry.model.title());
        for (_, f1) in &entry.f1_by_demographic {
            let _ = write!(out, "{f1:>12.4}");
        }
        let _ = writeln!(out, "{:>10.4}", entry.crank);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Config");
    for line in &h.config_lines {
        let _ = writeln!(out, "  {line}");
    }
    out
}
