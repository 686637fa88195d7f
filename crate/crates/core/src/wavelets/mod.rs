//! Wavelet tools: discrete decomposition with hard-threshold denoising, and
//! the continuous Morlet transform with cross-wavelet coherence and phase.

mod coherence;
mod cwt;
mod denoise;
mod dwt;
mod filters;

pub use coherence::{
    band_summary, export_coherence, read_coherence, wavelet_coherence, BandSummary, CoherenceGrid,
    CoherenceMap, CoherenceParams, PHASE_CONVENTION,
};
pub use cwt::{cwt_morlet, cwt_morlet_direct, default_scales, morlet, CwtSpectrum, DEFAULT_OMEGA0};
pub use denoise::{
    denoise_report, hard_threshold_denoise, level_threshold, DenoiseReport, LevelThreshold,
    ThresholdParams,
};
pub use dwt::{dwt_decompose, dwt_reconstruct, max_depth, DwtDecomposition};
pub use filters::{WaveletFilterBank, WaveletName};
