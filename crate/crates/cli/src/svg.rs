//! Bar chart of a verdict table, one bar per output.

use std::fmt::Write;

use interference::fock::ParticleType;
use interference::suppression::{EventClass, EventVerdict};

const BAR: f64 = 3.0;
const HEIGHT: f64 = 240.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 40.0;
const RIGHT: f64 = 20.0;

fn colour(c: EventClass) -> &'static str {
    match c {
        EventClass::ClassI => "#8c8c8c",
        EventClass::ClassII => "#1f77b4",
        EventClass::ClassIII => "#d62728",
        EventClass::AllowedIV => "#2ca02c",
    }
}

/// Bars ordered by class I, II, III, then the allowed events by increasing probability.
pub fn order_for_plot(rows: &[EventVerdict], t: ParticleType) -> Vec<&EventVerdict> {
    let p = |v: &EventVerdict| v.probability(t).unwrap_or(0.0);
    let mut sorted: Vec<&EventVerdict> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.event_class
            .cmp(&b.event_class)
            .then_with(|| p(a).total_cmp(&p(b)))
    });
    sorted
}

pub fn histogram(rows: &[EventVerdict], t: ParticleType, title: &str) -> String {
    let bars = order_for_plot(rows, t);
    let max = bars
        .iter()
        .filter_map(|v| v.probability(t))
        .fold(0.0_f64, f64::max);
    let scale = if max > 0.0 { HEIGHT / max } else { 0.0 };
    let width = LEFT + RIGHT + BAR * bars.len().max(1) as f64;
    let total_h = TOP + HEIGHT + BOTTOM;
    let base = TOP + HEIGHT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total_h}" viewBox="0 0 {width} {total_h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{total_h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="18" font-family="sans-serif" font-size="13">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(out, r#"<g class="bars">"#);
    for (i, v) in bars.iter().enumerate() {
        let p = v.probability(t).unwrap_or(0.0);
        let h = (p * scale).max(0.0);
        let x = LEFT + BAR * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="{BAR}" height="{h}" fill="{c}"><title>{s} {cls} {p:.6e}</title></rect>"#,
            y = base - h,
            c = colour(v.event_class),
            s = v.s,
            cls = v.event_class,
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{base}" x2="{x2}" y2="{base}" stroke="black"/>"#,
        x2 = width - RIGHT
    );
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="black"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{max:.3e}</text>"#,
        x = LEFT - 4.0,
        y = TOP + 4.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{base}" font-family="sans-serif" font-size="11" text-anchor="end">0</text>"#,
        x = LEFT - 4.0
    );
    for (k, c) in EventClass::ALL.iter().enumerate() {
        let x = LEFT + 90.0 * k as f64;
        let y = base + 24.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{ry}" width="10" height="10" fill="{col}"/><text x="{tx}" y="{y}" font-family="sans-serif" font-size="11">class {c}</text>"#,
            ry = y - 9.0,
            col = colour(*c),
            tx = x + 14.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
