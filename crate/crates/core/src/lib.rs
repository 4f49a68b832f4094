//! Numerical core: pixel containers, exact block DCT and Haar DWT,
//! box-counting and moment-spectrum multifractal analysis, turbulence
//! sub-band statistics, and the standalone style metrics.

pub mod analyze;
pub mod boxcount;
pub mod codec;
pub mod dct;
pub mod dwt;
pub mod error;
pub mod image;
pub mod regression;
pub mod renyi;
pub mod style;
pub mod turbulence;
pub mod wtmm;

pub use analyze::{analyze_gray, analyze_raster, AnalysisOptions, FractalReport, ImageAnalysis};
pub use boxcount::{
    box_count, capacity_dimension, capacity_dimension_with, log_spaced_grid_sizes,
    magnitude_box_masses, BoxCountSeries, BoxMassGrid, CapacityDimension, DEFAULT_NUM_SCALES,
};
pub use codec::{read_image, write_png, Codec, JpegCodec, PngCodec};
pub use dct::{dct2, idct2, DctBlock};
pub use dwt::{haar_dwt2, haar_idwt2, DwtLevel, DwtPyramid, Grid};
pub use error::{CoreError, Result};
pub use image::{
    partition_blocks, psnr, psnr_gray, reassemble_blocks, scharr_edges, to_gray, Block, EdgeMap,
    GrayImage, RasterImage, DEFAULT_EDGE_THRESHOLD,
};
pub use regression::{ols, theil_sen_slope, FitLine};
pub use renyi::{
    default_q_grid, renyi_spectrum, singularity_spectrum, RenyiSpectrum, SingularitySpectrum,
};
pub use style::{drip_loss, gram_matrix, style_metrics, texture_loss, tv_loss, StyleLossWeights, StyleMetrics};
pub use turbulence::{
    power_spectrum, turbulence_stats, turbulence_stats_from_pyramid, PowerPyramid,
    TurbulenceFeatures,
};
pub use wtmm::{default_wtmm_scales, mexican_hat_response, modulus_maxima, wtmm, WtmmResult};
