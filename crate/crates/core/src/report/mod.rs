//! CSV output and SVG figures.

use std::path::Path;

use crate::config::{ByModality, Modality};
use crate::error::{Error, Result};
use crate::experiment::{PhiMatrix, ResultSet};
use crate::infotheory::DensityCurve;

pub mod csv;
pub mod svg;

pub use self::csv::{
    fmt_sig9, read_samples_csv, write_phi_csv, write_samples_csv, write_summary_csv,
    write_sweep_csv,
};
pub use self::svg::HeatmapGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    MeanTradeoff,
    SampleScatter,
    PhiHeatmap,
    SweepHeatmap,
    Kde,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub title: String,
    pub width_px: u32,
    pub height_px: u32,
    pub color_map: ByModality<String>,
}

impl FigureSpec {
    pub fn new(kind: FigureKind, title: impl Into<String>) -> Self {
        let (width_px, height_px) = match kind {
            FigureKind::SweepHeatmap => (900, 560),
            FigureKind::PhiHeatmap => (640, 360),
            _ => (720, 520),
        };
        FigureSpec {
            kind,
            title: title.into(),
            width_px,
            height_px,
            color_map: ByModality {
                text: "#1f77b4".into(),
                voice: "#d62728".into(),
            },
        }
    }

    pub fn color(&self, m: Modality) -> &str {
        self.color_map.get(m)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.width_px < 100 || self.height_px < 100 {
            return Err(Error::Domain(format!(
                "figure dimensions {}x{} are below 100 px",
                self.width_px, self.height_px
            )));
        }
        Ok(())
    }
}

pub fn render_scatter(rs: &ResultSet, spec: &FigureSpec, path: &Path) -> Result<()> {
    let doc = svg::scatter_svg(&rs.records, &rs.summaries, spec)?;
    csv::write_text(path, &doc)
}

pub fn render_mean_tradeoff(rs: &ResultSet, spec: &FigureSpec, path: &Path) -> Result<()> {
    let doc = svg::mean_tradeoff_svg(&rs.summaries, spec)?;
    csv::write_text(path, &doc)
}

pub fn render_heatmap(grid: &HeatmapGrid, spec: &FigureSpec, path: &Path) -> Result<()> {
    let doc = svg::heatmap_svg(grid, spec)?;
    csv::write_text(path, &doc)
}

pub fn render_sweep_heatmap(m: &PhiMatrix, spec: &FigureSpec, path: &Path) -> Result<()> {
    render_heatmap(&HeatmapGrid::from_phi_matrix(m), spec, path)
}

pub fn render_kde(
    curves: &[(Modality, DensityCurve)],
    x_label: &str,
    spec: &FigureSpec,
    path: &Path,
) -> Result<()> {
    let doc = svg::kde_svg(curves, x_label, spec)?;
    csv::write_text(path, &doc)
}
