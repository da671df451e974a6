//! Standalone SVG bar charts and plain-text tables for reports.

use std::fmt::Write as _;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, max: f64, ticks: &[f64], fmt: impl Fn(f64) -> String) {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN_BOTTOM
    );
    for &t in ticks {
        let y = MARGIN_TOP + plot_h * (1.0 - t / max);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            WIDTH - MARGIN_RIGHT,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            fmt(t)
        );
    }
}

/// Grouped bars of accuracy in `[0, 1]`: one cluster per group, one bar per
/// series inside it.
pub fn accuracy_chart(title: &str, groups: &[(String, Vec<(String, f64)>)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let ticks: Vec<f64> = (0..=5).map(|i| i as f64 * 0.2).collect();
    y_axis(&mut out, 1.0, &ticks, |t| format!("{:.0}%", t * 100.0));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let slot = plot_w / groups.len().max(1) as f64;
    let mut series: Vec<&str> = Vec::new();
    for (g, (name, bars)) in groups.iter().enumerate() {
        let bar_w = slot * 0.8 / bars.len().max(1) as f64;
        let x0 = MARGIN_LEFT + g as f64 * slot + slot * 0.1;
        for (b, (label, value)) in bars.iter().enumerate() {
            let pos = series.iter().position(|s| s == label).unwrap_or_else(|| {
                series.push(label);
                series.len() - 1
            });
            let h = plot_h * value.clamp(0.0, 1.0);
            let x = x0 + b as f64 * bar_w;
            let y = MARGIN_TOP + plot_h - h;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{h:.2}" fill="{}"><title>{} {}: {:.4}</title></rect>"#,
                bar_w * 0.92,
                PALETTE[pos % PALETTE.len()],
                escape(name),
                escape(label),
                value
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{:.1}</text>"#,
                x + bar_w * 0.46,
                y - 3.0,
                value * 100.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x0 + slot * 0.4,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            escape(name)
        );
    }
    for (i, s) in series.iter().enumerate() {
        let x = MARGIN_LEFT + i as f64 * 120.0;
        let y = HEIGHT - 24.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{y:.2}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 16.0,
            escape(s)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Average p-value per feature with a reference line at 0.05.
pub fn significance_chart(title: &str, features: &[(String, f64)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, 1.0, &[0.0, 0.25, 0.5, 0.75, 1.0], |t| {
        format!("{t:.2}")
    });
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let slot = plot_w / features.len().max(1) as f64;
    let label_every = features.len().div_ceil(12).max(1);
    for (i, (name, p)) in features.iter().enumerate() {
        let h = plot_h * p.clamp(0.0, 1.0);
        let x = MARGIN_LEFT + i as f64 * slot;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{}"><title>{}: {p}</title></rect>"#,
            MARGIN_TOP + plot_h - h,
            (slot * 0.85).max(0.5),
            PALETTE[0],
            escape(name)
        );
        if i % label_every == 0 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" transform="rotate(-45 {:.2} {:.2})" font-size="9">{}</text>"#,
                x + slot / 2.0,
                HEIGHT - MARGIN_BOTTOM + 12.0,
                x + slot / 2.0,
                HEIGHT - MARGIN_BOTTOM + 12.0,
                escape(name.strip_prefix("freq_").unwrap_or(name))
            );
        }
    }
    let y = MARGIN_TOP + plot_h * (1.0 - 0.05);
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="red" stroke-dasharray="4 3"/>"#,
        WIDTH - MARGIN_RIGHT
    );
    out.push_str("</svg>\n");
    out
}

/// Left-aligned text table with a rule under the header.
pub fn text_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(headers.to_vec());
    out.push('\n');
    out.push_str(&line(
        widths
            .iter()
            .map(|&w| "-".repeat(w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    ));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bar_per_model() {
        let bars: Vec<(String, f64)> = ["knn", "svm-linear", "svm-rbf", "dtree"]
            .iter()
            .map(|m| (m.to_string(), 0.9))
            .collect();
        let svg = accuracy_chart("texture FC", &[("texture FC".into(), bars)]);
        assert_eq!(svg.matches("<title>").count(), 4);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn table_alignment() {
        let t = text_table(&["model", "acc"], &[vec!["knn".into(), "1.0000".into()]]);
        assert_eq!(t, "model  acc\n-----  ------\nknn    1.0000\n");
    }

    #[test]
    fn escapes_markup() {
        let svg = significance_chart("a<b", &[("x&y".into(), 0.5)]);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("x&amp;y"));
    }
}
