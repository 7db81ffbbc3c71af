use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{top_confusions, TrialReport};

/// Human-readable text and a machine-readable JSON document for one report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub text: String,
    pub json: String,
}

fn r4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

const TOP_K: usize = 5;

pub fn render_report(report: &TrialReport) -> RenderedReport {
    let cfg = &report.config;
    let cm = &report.pooled;
    let names: Vec<&str> = cm.classes.iter().map(|l| l.name()).collect();
    let subset = match &cfg.subset {
        Some(s) => s.iter().map(|l| l.name()).collect::<Vec<_>>().join(","),
        None => "all".to_string(),
    };

    let mut t = String::new();
    writeln!(
        t,
        "trials {}  seed {}  train fraction {:.4}  subset {}",
        cfg.trials, cfg.seed, cfg.fraction, subset
    )
    .unwrap();
    writeln!(t, "classes: {}", names.join(", ")).unwrap();
    writeln!(
        t,
        "accuracy: mean {:.4}  std {:.4}  min {:.4}  max {:.4}",
        report.mean,
        report.std,
        report.min(),
        report.max()
    )
    .unwrap();
    writeln!(t, "pooled accuracy: {:.4} ({}/{})", cm.accuracy(), cm.correct(), cm.total()).unwrap();
    t.push('\n');
    for (i, a) in report.per_trial.iter().enumerate() {
        writeln!(t, "  trial {i:>3}  {a:.4}").unwrap();
    }

    t.push_str("\nconfusion (rows true, columns predicted)\n");
    let w = names.iter().map(|n| n.len()).max().unwrap_or(0).max(5);
    write!(t, "{:>w$}", "").unwrap();
    for n in &names {
        write!(t, " {n:>w$}").unwrap();
    }
    t.push('\n');
    for (n, row) in names.iter().zip(&cm.counts) {
        write!(t, "{n:>w$}").unwrap();
        for v in row {
            write!(t, " {v:>w$}").unwrap();
        }
        t.push('\n');
    }

    t.push_str("\nper class\n");
    writeln!(t, "{:>w$} {:>9} {:>9} {:>8}", "class", "precision", "recall", "support").unwrap();
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    for (i, n) in names.iter().enumerate() {
        writeln!(
            t,
            "{n:>w$} {:>9} {:>9} {:>8}",
            fmt_opt(cm.precision(i)),
            fmt_opt(cm.recall(i)),
            cm.row_total(i)
        )
        .unwrap();
    }

    let top = top_confusions(cm, TOP_K);
    t.push_str("\nmost frequent confusions\n");
    if top.is_empty() {
        t.push_str("  none\n");
    }
    for (a, b, n) in &top {
        writeln!(t, "  {a} -> {b}: {n}").unwrap();
    }

    let per_class: Vec<Value> = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            json!({
                "label": n,
                "precision": cm.precision(i).map(r4),
                "recall": cm.recall(i).map(r4),
                "support": cm.row_total(i),
            })
        })
        .collect();
    let doc = json!({
        "config": {
            "seed": cfg.seed,
            "fraction": cfg.fraction,
            "subset": cfg.subset.as_ref().map(|s| s.iter().map(|l| l.name()).collect::<Vec<_>>()),
            "trials": cfg.trials,
            "pca_dims": cfg.pca_dims,
        },
        "classes": names,
        "per_trial": report.per_trial.iter().copied().map(r4).collect::<Vec<_>>(),
        "mean": r4(report.mean),
        "std": r4(report.std),
        "min": r4(report.min()),
        "max": r4(report.max()),
        "pooled_accuracy": r4(cm.accuracy()),
        "confusion": cm.counts,
        "per_class": per_class,
        "top_confusions": top
            .iter()
            .map(|(a, b, n)| json!({"true": a.name(), "predicted": b.name(), "count": n}))
            .collect::<Vec<_>>(),
    });
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    RenderedReport { text: t, json }
}
