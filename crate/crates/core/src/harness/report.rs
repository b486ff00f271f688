//! Serialization of grid results: CSV, Markdown, JSON and TREC run files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CellResult, Experiment, GridReport};
use crate::corpus::save_jsonl;
use crate::correct::Method;
use crate::error::HarnessError;
use crate::retrieval::format_run;

pub const CSV_HEADER: &str =
    "condition,method,retriever,mrr,recall@1,recall@5,recall@10,ndcg@10,mrr_relevant,n_queries";

pub fn emit_csv(report: &GridReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        let r = &c.row;
        writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            c.spec.condition,
            c.spec.method.map_or("none", Method::as_str),
            c.spec.retriever,
            r.mrr,
            r.recall_1,
            r.recall_5,
            r.recall_10,
            r.ndcg_10,
            r.mrr_relevant_only,
            r.n_queries
        )
        .expect("write to string");
    }
    out
}

pub fn emit_markdown(report: &GridReport) -> String {
    let mut md = String::new();
    let w = &mut md;
    macro_rules! line {
        ($($arg:tt)*) => { writeln!(w, $($arg)*).expect("write to string") };
    }

    line!("# Retrieval under query correction\n");
    line!(
        "{} queries ({} judged), {} passages, {} vocabulary terms, {} word types.",
        report.n_queries,
        report.n_eval_queries,
        report.n_passages,
        report.vocabulary_size,
        report.word_types
    );
    line!(
        "Depth {}, seed {}, vocabulary min frequency {}.\n",
        report.settings.k,
        report.settings.seed,
        report.settings.min_freq
    );

    if let Some(c) = &report.census {
        line!("## Error census\n");
        line!("| measure | value |\n|---|---|");
        line!("| queries with errors | {:.1}% |", 100.0 * c.query_error_rate);
        line!("| token error rate (mean per query) | {:.2}% |", 100.0 * c.token_error_rate);
        line!("| token error rate (pooled) | {:.2}% |", 100.0 * c.pooled_token_error_rate);
        line!("| errors per affected query | {:.2} |", c.avg_errors_per_affected_query);
        line!("| OOV flags | {} |", c.oov_flags);
        line!("| unmatched share | {:.1}% |", 100.0 * c.unmatched_share);
        if let Some(y) = c.yield_ratio {
            line!("| yield | {:.3} |", y);
        }
        line!("");
        line!("| error type | % of flags |\n|---|---|");
        for (k, v) in &c.breakdown {
            line!("| {k} | {v:.1} |");
        }
        line!("");
    }

    line!("## Retrieval\n");
    line!("| retriever | condition | method | MRR | R@1 | R@5 | R@10 | NDCG@10 |");
    line!("|---|---|---|---|---|---|---|---|");
    for c in &report.cells {
        let r = &c.row;
        line!(
            "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
            c.spec.retriever,
            c.spec.condition.label(),
            c.spec.method.map_or("-", Method::as_str),
            r.mrr,
            r.recall_1,
            r.recall_5,
            r.recall_10,
            r.ndcg_10
        );
    }
    line!("");

    if !report.intervals.is_empty() {
        line!("## MRR change vs. baseline (paired bootstrap, {} resamples)\n", report.settings.bootstrap_resamples);
        line!("| retriever | condition | method | delta | 95% CI |\n|---|---|---|---|---|");
        for d in &report.intervals {
            line!(
                "| {} | {} | {} | {:+.4} | [{:+.4}, {:+.4}] |",
                d.spec.retriever,
                d.spec.condition,
                d.spec.method.map_or("-", Method::as_str),
                d.interval.estimate,
                d.interval.lower,
                d.interval.upper
            );
        }
        line!("");
    }

    if !report.modifications.is_empty() {
        line!("## Query modifications\n");
        line!("| method | queries modified | tokens changed |\n|---|---|---|");
        for m in &report.modifications {
            line!(
                "| {} | {}/{} ({:.1}%) | {} |",
                m.method,
                m.queries_modified,
                m.total_queries,
                pct(m.queries_modified, m.total_queries),
                m.token_changes
            );
        }
        line!("");
    }

    if !report.analyses.is_empty() {
        line!("## Correction outcomes\n");
        line!("| method | sampled | correct fix | partial | unnecessary | synonym |");
        line!("|---|---|---|---|---|---|");
        for a in &report.analyses {
            let p = |c| a.percentages.get(&c).copied().unwrap_or(0.0);
            use super::CorrectionCategory as C;
            line!(
                "| {} | {}/{} | {:.1}% | {:.1}% | {:.1}% | {:.1}% |",
                a.method,
                a.sampled,
                a.total_corrections,
                p(C::CorrectFix),
                p(C::PartialImprovement),
                p(C::UnnecessaryChange),
                p(C::HarmlessSynonym)
            );
        }
    }
    md
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

fn write(path: &Path, content: &str) -> Result<(), HarnessError> {
    fs::write(path, content).map_err(|e| HarnessError::io(path, e))
}

/// Writes `metrics.csv`, `report.md`, `report.json`, `runs/*.run` and
/// `corrections/<method>.jsonl` under `dir`.
pub fn write_outputs(
    dir: &Path,
    exp: &Experiment,
    report: &GridReport,
    cells: &[CellResult],
) -> Result<(), HarnessError> {
    let runs_dir = dir.join("runs");
    let corr_dir = dir.join("corrections");
    for d in [dir, &runs_dir, &corr_dir] {
        fs::create_dir_all(d).map_err(|e| HarnessError::io(d, e))?;
    }
    write(&dir.join("metrics.csv"), &emit_csv(report))?;
    write(&dir.join("report.md"), &emit_markdown(report))?;
    write(&dir.join("report.json"), &serde_json::to_string_pretty(report)?)?;
    for c in cells {
        let tag = c.spec.tag();
        write(&runs_dir.join(format!("{tag}.run")), &format_run(&c.runs, &tag))?;
    }
    for m in &report.modifications {
        let log = exp.corrections(m.method)?.log();
        save_jsonl(&log, &corr_dir.join(format!("{}.jsonl", m.method)))?;
    }
    Ok(())
}
