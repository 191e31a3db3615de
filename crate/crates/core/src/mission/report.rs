use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{MissionReport, ObjectRow};

/// Output files to write next to the JSON report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportFormats {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// Per-object rows followed by one aggregate row.
pub fn rows_csv(report: &MissionReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "command",
        "object",
        "goal",
        "destination",
        "cc_nav",
        "d_nav",
        "sr_man",
        "t_exe",
        "fulfilled",
        "m_overall",
    ];
    w.write_record(header).expect("in-memory write");
    let row = |r: &ObjectRow| {
        vec![
            r.command.to_string(),
            r.object.clone(),
            r.goal.category_or_object.clone(),
            r.goal.destination.clone(),
            r.cc_nav.to_string(),
            format!("{:.3}", r.d_nav),
            format!("{:.3}", r.sr_man),
            format!("{:.3}", r.t_exe),
            r.fulfilled.to_string(),
            format!("{:.3}", r.m_overall),
        ]
    };
    for r in &report.rows {
        w.write_record(row(r)).expect("in-memory write");
    }
    let attempts: u32 = report.rows.iter().map(|r| r.man_attempts).sum();
    let successes: u32 = report.rows.iter().map(|r| r.man_successes).sum();
    w.write_record([
        "all".to_string(),
        "total".to_string(),
        String::new(),
        String::new(),
        report.rows.iter().map(|r| r.cc_nav).sum::<u32>().to_string(),
        format!("{:.3}", report.rows.iter().map(|r| r.d_nav).sum::<f64>()),
        format!(
            "{:.3}",
            if attempts == 0 {
                0.0
            } else {
                successes as f64 / attempts as f64
            }
        ),
        format!("{:.3}", report.rows.iter().map(|r| r.t_exe).sum::<f64>()),
        format!("{}/{}", report.fulfilled(), report.rows.len()),
        format!("{:.3}", report.m_overall),
    ])
    .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Line plot of cumulative m_overall against object index, one polyline
/// per labelled series.
pub fn render_svg(series: &[(String, Vec<f64>)]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(1);
    let cumulative: Vec<Vec<f64>> = series
        .iter()
        .map(|(_, v)| {
            v.iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let top = cumulative.iter().flatten().copied().fold(0.0f64, f64::max).max(1.0);
    let x = |i: usize| pad + (w - 2.0 * pad) * if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
    let y = |v: f64| h - pad - (h - 2.0 * pad) * v / top;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{b}" stroke="black"/>"#,
        b = h - pad,
        r = w - pad
    );
    for i in 0..n {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">obj_{}</text>"#,
            x(i),
            h - pad + 18.0,
            i + 1
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{:.1}">cumulative m_overall (max {top:.1})</text>"#,
        pad - 15.0
    );
    for (k, ((label, _), values)) in series.iter().zip(&cumulative).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.1},{:.1}", x(i), y(*v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{label}</text>"#,
            w - pad - 100.0,
            pad + 15.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

/// Writes whichever of JSON, CSV and SVG `formats` asks for.
pub fn write_report_files(report: &MissionReport, formats: &ReportFormats) -> std::io::Result<()> {
    if let Some(p) = &formats.json {
        write(p, &report.to_json())?;
    }
    if let Some(p) = &formats.csv {
        write(p, &rows_csv(report))?;
    }
    if let Some(p) = &formats.plot {
        let series = vec![(
            report.algorithm.to_string(),
            report.rows.iter().map(|r| r.m_overall).collect(),
        )];
        write(p, &render_svg(&series))?;
    }
    Ok(())
}
