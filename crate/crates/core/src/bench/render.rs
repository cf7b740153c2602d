use std::fmt::Write;

use super::{BalancePoint, BenchReport, Metric};
use crate::scenario::{Difficulty, LengthClass, ScenarioTag, Structure};

fn scopes() -> Vec<String> {
    std::iter::once("overall".to_string())
        .chain(Difficulty::ALL.iter().map(|d| d.as_str().to_string()))
        .chain(ScenarioTag::grid().iter().map(ScenarioTag::key))
        .collect()
}

fn rank_of(rep: &BenchReport, scope: &str, metric: Metric, model: &str) -> Option<usize> {
    rep.ranks.get(scope)?.get(metric.name())?.get(model).copied()
}

/// Long-format CSV: one row per scope, model and metric. Empty cells mark
/// values that do not exist (empty categories).
pub fn report_csv(rep: &BenchReport) -> String {
    let mut out = String::from("scope,model,metric,value,rank\n");
    for scope in scopes() {
        for m in &rep.models {
            for metric in Metric::ALL {
                let value = m.value(&scope, metric).map(|v| v.to_string()).unwrap_or_default();
                let rank = rank_of(rep, &scope, metric, &m.model).map(|r| r.to_string()).unwrap_or_default();
                writeln!(out, "{scope},{},{metric},{value},{rank}", csv_field(&m.model)).unwrap();
            }
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell(rep: &BenchReport, scope: &str, metric: Metric, model: &str) -> String {
    let Some(model_rep) = rep.models.iter().find(|m| m.model == model) else {
        return "-".into();
    };
    match (model_rep.value(scope, metric), rank_of(rep, scope, metric, model)) {
        (Some(v), Some(1)) => format!("**{v:.3}** (1)"),
        (Some(v), Some(r)) => format!("{v:.3} ({r})"),
        (Some(v), None) => format!("{v:.3}"),
        (None, _) => "-".into(),
    }
}

fn header(out: &mut String, first: &[&str]) {
    let cols: Vec<String> = first
        .iter()
        .map(|s| s.to_string())
        .chain(Metric::ALL.iter().map(|m| {
            let arrow = if m.lower_is_better() { "↓" } else { "↑" };
            format!("{m} {arrow}")
        }))
        .collect();
    writeln!(out, "| {} |", cols.join(" | ")).unwrap();
    writeln!(out, "|{}", "---|".repeat(cols.len())).unwrap();
}

/// Markdown tables: overall scores, scenario counts, one block per
/// structure and length, and the ATT ablation. Cells read `value (rank)`,
/// best in bold.
pub fn tables_markdown(rep: &BenchReport) -> String {
    let mut out = String::new();
    let models: Vec<&str> = rep.models.iter().map(|m| m.model.as_str()).collect();

    out.push_str("## Overall\n\n");
    header(&mut out, &["Model"]);
    for &model in &models {
        let cells: Vec<String> = Metric::ALL.iter().map(|&m| cell(rep, "overall", m, model)).collect();
        writeln!(out, "| {model} | {} |", cells.join(" | ")).unwrap();
    }

    out.push_str("\n## Scenario counts\n\n| Structure | Length | HARD | MIDDLE | EASY |\n|---|---|---|---|---|\n");
    for s in Structure::ALL {
        for l in LengthClass::ALL {
            let counts: Vec<String> = Difficulty::ALL
                .iter()
                .map(|&d| {
                    let key = ScenarioTag { structure: s, difficulty: d, length: l }.key();
                    rep.category_counts.get(&key).copied().unwrap_or(0).to_string()
                })
                .collect();
            writeln!(out, "| {} | {} | {} |", s.as_str(), l.as_str(), counts.join(" | ")).unwrap();
        }
    }

    for s in Structure::ALL {
        for l in LengthClass::ALL {
            writeln!(out, "\n## {} / {}\n", s.as_str(), l.as_str()).unwrap();
            header(&mut out, &["Difficulty", "Model"]);
            for d in Difficulty::ALL {
                let key = ScenarioTag { structure: s, difficulty: d, length: l }.key();
                for &model in &models {
                    let cells: Vec<String> = Metric::ALL.iter().map(|&m| cell(rep, &key, m, model)).collect();
                    writeln!(out, "| {} | {model} | {} |", d.as_str(), cells.join(" | ")).unwrap();
                }
            }
        }
    }

    out.push_str("\n## ATT ablation\n\n| Model | Modes | Boundary | Alignment | Kinematic | ATT |\n|---|---|---|---|---|---|\n");
    for m in &rep.models {
        let a = &m.att_ablation;
        writeln!(
            out,
            "| {} | {} | {:.3} | {:.3} | {:.3} | {:.3} |",
            m.model, a.modes, a.boundary, a.alignment, a.kinematic, a.att
        )
        .unwrap();
    }
    out
}

pub fn balance_csv(points: &[BalancePoint], diversity: Metric) -> String {
    let mut out = format!("model,{diversity},ATT,minFDE\n");
    for p in points {
        writeln!(out, "{},{},{},{}", csv_field(&p.model), p.diversity, p.att, p.min_fde).unwrap();
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Scatter of diversity (x) against ATT (y); circle radius grows with minFDE.
pub fn balance_svg(points: &[BalancePoint], diversity: Metric) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const PAD: f64 = 50.0;
    let x_max = points.iter().map(|p| p.diversity).fold(0.0, f64::max).max(1e-9) * 1.1;
    let f_max = points.iter().map(|p| p.min_fde).fold(0.0, f64::max).max(1e-9);
    let sx = |v: f64| PAD + v / x_max * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - v.clamp(0.0, 1.0) * (H - 2.0 * PAD);
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<path d="M{PAD} {PAD} V{y0} H{x1}" fill="none" stroke="black"/>"#,
        y0 = H - PAD,
        x1 = W - PAD
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{diversity}</text>"#,
        W / 2.0,
        H - 15.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">ATT</text>"#,
        H / 2.0,
        H / 2.0
    )
    .unwrap();
    for p in points {
        let (cx, cy) = (sx(p.diversity), sy(p.att));
        let r = 4.0 + 20.0 * p.min_fde / f_max;
        writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="steelblue" fill-opacity="0.5" stroke="steelblue"/>"#
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{} (minFDE {:.2})</text>"#,
            cx + r + 2.0,
            cy + 4.0,
            xml_escape(&p.model),
            p.min_fde
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
