//! Hand-assembled SVG 1.1 figures.
//!
//! All coordinates are printed with two decimals so output is
//! byte-deterministic for identical inputs.

use std::fmt::Write as _;

use crate::config::{Condition, Modality, Style};
use crate::error::{Error, Result};
use crate::experiment::{ConditionSummary, PhiMatrix, SampleRecord};
use crate::infotheory::DensityCurve;

use super::{FigureKind, FigureSpec};

const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

struct Doc {
    body: String,
}

impl Doc {
    fn new(spec: &FigureSpec) -> Self {
        let mut body = String::new();
        let (w, h) = (spec.width_px, spec.height_px);
        let _ = writeln!(body, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#
        );
        let _ = writeln!(body, "<title>{}</title>", esc(&spec.title));
        let _ = writeln!(body, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text class="title" x="{:.2}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
            w as f64 / 2.0,
            esc(&spec.title)
        );
        Doc { body }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.body.push_str(s.as_ref());
        self.body.push('\n');
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Maps a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Scale { lo, hi, px_lo, px_hi }
    }

    fn padded(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64, floor_zero: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        lo -= pad;
        hi += pad;
        if floor_zero && lo < 0.0 {
            lo = 0.0;
        }
        Scale::new(lo, hi, px_lo, px_hi)
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }
}

/// Three decimals without a "-0.000".
fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        fixed3(v)
    }
}

fn plot_area(spec: &FigureSpec) -> (f64, f64, f64, f64) {
    (
        MARGIN_LEFT,
        spec.width_px as f64 - MARGIN_RIGHT,
        MARGIN_TOP,
        spec.height_px as f64 - MARGIN_BOTTOM,
    )
}

fn axes(doc: &mut Doc, spec: &FigureSpec, x: &Scale, y: &Scale, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = plot_area(spec);
    doc.line(format!(
        r##"<rect class="frame" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
        x1 - x0,
        y1 - y0
    ));
    for t in x.ticks(5) {
        let px = x.map(t);
        doc.line(format!(
            r##"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444"/>"##,
            y1 + 5.0
        ));
        doc.line(format!(
            r#"<text class="tick" x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            y1 + 18.0,
            tick_label(t)
        ));
    }
    for t in y.ticks(5) {
        let py = y.map(t);
        doc.line(format!(
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="#444"/>"##,
            x0 - 5.0
        ));
        doc.line(format!(
            r#"<text class="tick" x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick_label(t)
        ));
    }
    doc.line(format!(
        r#"<text class="axis-label" x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{} [{} – {}]</text>"#,
        (x0 + x1) / 2.0,
        y1 + 42.0,
        esc(x_label),
        tick_label(x.lo),
        tick_label(x.hi)
    ));
    let cy = (y0 + y1) / 2.0;
    doc.line(format!(
        r#"<text class="axis-label" x="18" y="{cy:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{} [{} – {}]</text>"#,
        esc(y_label),
        tick_label(y.lo),
        tick_label(y.hi)
    ));
}

fn star_points(cx: f64, cy: f64, outer: f64) -> String {
    let inner = outer * 0.45;
    (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { outer } else { inner };
            let a = std::f64::consts::PI * (i as f64 / 5.0) - std::f64::consts::FRAC_PI_2;
            format!("{:.2},{:.2}", cx + r * a.cos(), cy + r * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn legend(doc: &mut Doc, spec: &FigureSpec, entries: &[(String, String)]) {
    let (_, x1, y0, _) = plot_area(spec);
    let x = x1 - 110.0;
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = y0 + 14.0 + 18.0 * i as f64;
        doc.line(format!(
            r#"<g class="legend-entry"><rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{color}"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text></g>"#,
            y - 10.0,
            x + 18.0,
            y,
            esc(label)
        ));
    }
}

fn modality_legend(doc: &mut Doc, spec: &FigureSpec, modalities: &[Modality]) {
    let entries: Vec<_> = modalities
        .iter()
        .map(|&m| (m.label().to_string(), spec.color(m).to_string()))
        .collect();
    legend(doc, spec, &entries);
}

fn expect_kind(spec: &FigureSpec, kinds: &[FigureKind]) -> Result<()> {
    spec.check()?;
    if kinds.contains(&spec.kind) {
        Ok(())
    } else {
        Err(Error::Domain(format!("figure kind {:?} does not fit this renderer", spec.kind)))
    }
}

/// Per-sample points at 30% opacity plus a star at each condition mean.
pub fn scatter_svg(records: &[SampleRecord], summaries: &[ConditionSummary], spec: &FigureSpec) -> Result<String> {
    expect_kind(spec, &[FigureKind::SampleScatter])?;
    let points: Vec<&SampleRecord> = records.iter().filter(|r| !r.degenerate).collect();
    if points.is_empty() {
        return Err(Error::EmptyInput("scatter needs at least one record"));
    }
    let (x0, x1, y0, y1) = plot_area(spec);
    let xs = Scale::padded(
        points.iter().map(|r| r.tce_abs).chain(summaries.iter().map(|s| s.mean_tce)),
        x0,
        x1,
        true,
    );
    let ys = Scale::padded(
        points.iter().map(|r| r.ce).chain(summaries.iter().map(|s| s.mean_ce)),
        y1,
        y0,
        true,
    );
    let mut doc = Doc::new(spec);
    axes(&mut doc, spec, &xs, &ys, "Trust calibration error (TCE)", "Comprehension efficiency (CE)");
    for r in &points {
        doc.line(format!(
            r#"<circle class="sample-point" cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.3"/>"#,
            xs.map(r.tce_abs),
            ys.map(r.ce),
            spec.color(r.modality)
        ));
    }
    for s in summaries {
        let (cx, cy) = (xs.map(s.mean_tce), ys.map(s.mean_ce));
        doc.line(format!(
            r#"<polygon class="star-marker" points="{}" fill="{}" stroke="black" stroke-width="1"/>"#,
            star_points(cx, cy, 10.0),
            spec.color(s.modality)
        ));
        doc.line(format!(
            r#"<text class="style-label" x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            cx + 12.0,
            cy - 8.0,
            s.style.label()
        ));
    }
    modality_legend(&mut doc, spec, &Modality::ALL);
    Ok(doc.finish())
}

/// One marker per condition at (mean TCE, mean CE), labelled by style and
/// joined per modality in style order.
pub fn mean_tradeoff_svg(summaries: &[ConditionSummary], spec: &FigureSpec) -> Result<String> {
    expect_kind(spec, &[FigureKind::MeanTradeoff])?;
    if summaries.is_empty() {
        return Err(Error::EmptyInput("trade-off plot needs condition summaries"));
    }
    let (x0, x1, y0, y1) = plot_area(spec);
    let xs = Scale::padded(summaries.iter().map(|s| s.mean_tce), x0, x1, true);
    let ys = Scale::padded(summaries.iter().map(|s| s.mean_ce), y1, y0, true);
    let mut doc = Doc::new(spec);
    axes(&mut doc, spec, &xs, &ys, "Mean TCE", "Mean CE");
    for m in Modality::ALL {
        let pts: Vec<String> = Style::ALL
            .iter()
            .filter_map(|&st| summaries.iter().find(|s| s.modality == m && s.style == st))
            .map(|s| format!("{:.2},{:.2}", xs.map(s.mean_tce), ys.map(s.mean_ce)))
            .collect();
        if pts.len() > 1 {
            doc.line(format!(
                r#"<polyline class="modality-path" points="{}" fill="none" stroke="{}" stroke-dasharray="4 3"/>"#,
                pts.join(" "),
                spec.color(m)
            ));
        }
    }
    for s in summaries {
        let (cx, cy) = (xs.map(s.mean_tce), ys.map(s.mean_ce));
        doc.line(format!(
            r#"<circle class="mean-marker" cx="{cx:.2}" cy="{cy:.2}" r="7" fill="{}" stroke="black"/>"#,
            spec.color(s.modality)
        ));
        doc.line(format!(
            r#"<text class="style-label" x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            cx + 10.0,
            cy - 8.0,
            s.style.label()
        ));
    }
    modality_legend(&mut doc, spec, &Modality::ALL);
    Ok(doc.finish())
}

/// A labelled matrix of values for heatmap rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub row_title: String,
    pub col_title: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl HeatmapGrid {
    /// Modality rows × style columns of Φ at the configured weights.
    pub fn from_summaries(summaries: &[ConditionSummary]) -> Self {
        let values = Modality::ALL
            .iter()
            .map(|&m| {
                Style::ALL
                    .iter()
                    .map(|&s| {
                        summaries
                            .iter()
                            .find(|x| x.condition() == Condition { modality: m, style: s })
                            .map(|x| x.phi_default)
                            .unwrap_or(f64::NAN)
                    })
                    .collect()
            })
            .collect();
        HeatmapGrid {
            row_title: "Modality".into(),
            col_title: "Style".into(),
            row_labels: Modality::ALL.iter().map(|m| m.label().to_string()).collect(),
            col_labels: Style::ALL.iter().map(|s| s.label().to_string()).collect(),
            values,
        }
    }

    /// λ₂ rows × condition columns.
    pub fn from_phi_matrix(m: &PhiMatrix) -> Self {
        HeatmapGrid {
            row_title: "λ₂".into(),
            col_title: "Condition".into(),
            row_labels: m.lambda2_values.iter().map(|v| format!("{v:.2}")).collect(),
            col_labels: m.conditions.iter().map(Condition::label).collect(),
            values: m.phi.clone(),
        }
    }
}

/// Sequential scale: linear interpolation through five stops from
/// `#440154` (minimum) to `#fde725` (maximum). A constant matrix maps every
/// cell to the middle stop.
pub fn color_scale(t: f64) -> (u8, u8, u8) {
    const STOPS: [(u8, u8, u8); 5] = [
        (0x44, 0x01, 0x54),
        (0x3b, 0x52, 0x8b),
        (0x21, 0x91, 0x8c),
        (0x5e, 0xc9, 0x62),
        (0xfd, 0xe7, 0x25),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

pub fn heatmap_svg(grid: &HeatmapGrid, spec: &FigureSpec) -> Result<String> {
    expect_kind(spec, &[FigureKind::PhiHeatmap, FigureKind::SweepHeatmap])?;
    let rows = grid.values.len();
    let cols = grid.values.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput("heatmap needs a non-empty matrix"));
    }
    if grid.values.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("heatmap rows differ in length".into()));
    }
    let finite = grid.values.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));

    let left = MARGIN_LEFT + 40.0;
    let right = spec.width_px as f64 - MARGIN_RIGHT - 70.0;
    let top = MARGIN_TOP + 10.0;
    let bottom = spec.height_px as f64 - MARGIN_BOTTOM;
    let cw = (right - left) / cols as f64;
    let ch = (bottom - top) / rows as f64;

    let mut doc = Doc::new(spec);
    doc.line(format!(
        "<!-- color scale: #440154 (min) -> #3b528b -> #21918c -> #5ec962 -> #fde725 (max); min={} max={} -->",
        tick_label(lo),
        tick_label(hi)
    ));
    for (i, row) in grid.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let (r, g, b) = color_scale(t);
            let (x, y) = (left + cw * j as f64, top + ch * i as f64);
            doc.line(format!(
                r##"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="#{r:02x}{g:02x}{b:02x}" stroke="white"/>"##
            ));
            let ink = if t > 0.6 { "black" } else { "white" };
            doc.line(format!(
                r#"<text class="cell-value" x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle" fill="{ink}">{}</text>"#,
                x + cw / 2.0,
                y + ch / 2.0 + 4.0,
                fixed3(v)
            ));
        }
    }
    for (i, label) in grid.row_labels.iter().enumerate() {
        doc.line(format!(
            r#"<text class="row-label" x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            left - 8.0,
            top + ch * (i as f64 + 0.5) + 4.0,
            esc(label)
        ));
    }
    for (j, label) in grid.col_labels.iter().enumerate() {
        doc.line(format!(
            r#"<text class="col-label" x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            left + cw * (j as f64 + 0.5),
            bottom + 18.0,
            esc(label)
        ));
    }
    doc.line(format!(
        r#"<text class="axis-label" x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        bottom + 42.0,
        esc(&grid.col_title)
    ));
    let cy = (top + bottom) / 2.0;
    doc.line(format!(
        r#"<text class="axis-label" x="18" y="{cy:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
        esc(&grid.row_title)
    ));

    // Color bar with annotated extremes.
    let bx = right + 20.0;
    let steps = 20;
    let bh = (bottom - top) / steps as f64;
    for k in 0..steps {
        let t = 1.0 - (k as f64 + 0.5) / steps as f64;
        let (r, g, b) = color_scale(t);
        doc.line(format!(
            r##"<rect class="colorbar" x="{bx:.2}" y="{:.2}" width="14" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            top + bh * k as f64,
            bh + 0.5
        ));
    }
    doc.line(format!(
        r#"<text class="scale-max" x="{:.2}" y="{:.2}" font-size="11">max {}</text>"#,
        bx - 4.0,
        top - 6.0,
        fixed3(hi)
    ));
    doc.line(format!(
        r#"<text class="scale-min" x="{:.2}" y="{:.2}" font-size="11">min {}</text>"#,
        bx - 4.0,
        bottom + 14.0,
        fixed3(lo)
    ));
    Ok(doc.finish())
}

/// One polyline per curve on shared axes, with a legend and the trapezoidal
/// integral of each curve recorded in a comment.
pub fn kde_svg(curves: &[(Modality, DensityCurve)], x_label: &str, spec: &FigureSpec) -> Result<String> {
    expect_kind(spec, &[FigureKind::Kde])?;
    if curves.is_empty() {
        return Err(Error::EmptyInput("kde plot needs at least one curve"));
    }
    let (x0, x1, y0, y1) = plot_area(spec);
    let xs = Scale::padded(curves.iter().flat_map(|(_, c)| c.grid.iter().copied()), x0, x1, false);
    let ys = Scale::padded(
        curves.iter().flat_map(|(_, c)| c.density.iter().copied()).chain([0.0]),
        y1,
        y0,
        true,
    );
    let mut doc = Doc::new(spec);
    for (m, c) in curves {
        doc.line(format!(
            "<!-- integral[{m}]={:.6} bandwidth={:.6} -->",
            c.integral(),
            c.bandwidth
        ));
    }
    axes(&mut doc, spec, &xs, &ys, x_label, "Density");
    for (m, c) in curves {
        let pts: Vec<String> = c
            .grid
            .iter()
            .zip(&c.density)
            .map(|(&x, &d)| format!("{:.2},{:.2}", xs.map(x), ys.map(d)))
            .collect();
        doc.line(format!(
            r#"<polyline class="density" data-modality="{m}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            spec.color(*m)
        ));
    }
    let ms: Vec<Modality> = curves.iter().map(|(m, _)| *m).collect();
    modality_legend(&mut doc, spec, &ms);
    Ok(doc.finish())
}
