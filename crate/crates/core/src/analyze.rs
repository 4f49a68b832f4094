//! One-call analysis pipeline producing the per-image report consumed by
//! the CLI and the provenance layer.

use serde::Serialize;

use crate::boxcount::{
    capacity_dimension_with, log_spaced_grid_sizes, magnitude_box_masses, CapacityDimension,
    DEFAULT_NUM_SCALES,
};
use crate::error::Result;
use crate::image::{scharr_edges, to_gray, GrayImage, RasterImage, DEFAULT_EDGE_THRESHOLD};
use crate::renyi::{default_q_grid, renyi_spectrum, singularity_spectrum, RenyiSpectrum, SingularitySpectrum};
use crate::style::{style_metrics, StyleMetrics};
use crate::turbulence::{turbulence_stats, TurbulenceFeatures};
use crate::wtmm::{default_wtmm_scales, wtmm, WtmmResult};

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub num_scales: usize,
    pub edge_threshold: f64,
    pub q_grid: Vec<f64>,
    pub wtmm_scales: Vec<f64>,
    pub dwt_levels: usize,
    pub include_wtmm: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            num_scales: DEFAULT_NUM_SCALES,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
            q_grid: default_q_grid(),
            wtmm_scales: default_wtmm_scales(),
            dwt_levels: 3,
            include_wtmm: true,
        }
    }
}

/// Full multifractal characterization of one image.
#[derive(Debug, Clone, Serialize)]
pub struct FractalReport {
    pub capacity: CapacityDimension,
    pub renyi: RenyiSpectrum,
    pub singularity: SingularitySpectrum,
    pub wtmm: Option<WtmmResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageAnalysis {
    pub width: usize,
    pub height: usize,
    pub fractal: FractalReport,
    pub turbulence: TurbulenceFeatures,
    pub style: StyleMetrics,
}

pub fn analyze_gray(img: &GrayImage, opts: &AnalysisOptions) -> Result<ImageAnalysis> {
    let capacity = capacity_dimension_with(img, opts.edge_threshold, opts.num_scales)?;
    let edges = scharr_edges(img, opts.edge_threshold)?;
    let extent = img.width.min(img.height);
    // Restrict the moment fits to the same trimmed range the capacity fit
    // uses, so D_0 and the box-count slope coincide by construction.
    let (lo, hi) = capacity.series.fit_range;
    let grid_sizes = &log_spaced_grid_sizes(extent, opts.num_scales)[lo..hi];
    let masses = magnitude_box_masses(&edges, grid_sizes)?;
    let renyi = renyi_spectrum(&masses, &opts.q_grid)?;
    let singularity = singularity_spectrum(&renyi)?;
    let wtmm_result = if opts.include_wtmm {
        Some(wtmm(img, &opts.wtmm_scales, &opts.q_grid)?)
    } else {
        None
    };
    let turbulence = turbulence_stats(img, opts.dwt_levels.min(max_levels(img)))?;
    let style = style_metrics(&img.to_raster());
    Ok(ImageAnalysis {
        width: img.width,
        height: img.height,
        fractal: FractalReport { capacity, renyi, singularity, wtmm: wtmm_result },
        turbulence,
        style,
    })
}

pub fn analyze_raster(img: &RasterImage, opts: &AnalysisOptions) -> Result<ImageAnalysis> {
    let gray = to_gray(img);
    let mut analysis = analyze_gray(&gray, opts)?;
    // Style metrics see the original channels, not the luma projection.
    analysis.style = style_metrics(img);
    Ok(analysis)
}

fn max_levels(img: &GrayImage) -> usize {
    let mut levels = 0;
    let mut size = img.width.min(img.height);
    while size >= 2 {
        levels += 1;
        size /= 2;
    }
    levels.max(1)
}
