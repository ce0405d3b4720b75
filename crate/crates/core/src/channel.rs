//! Tag deployment, large-scale pathloss, Rayleigh channel generation, and
//! Gauss–Markov CSI corruption.
//!
//! Geometry: the reader sits at the origin of an L×L square field; tags are
//! placed uniformly with a 1 m minimum-distance floor (the pathloss model's
//! unit reference distance, below which it diverges). The forward link
//! (tag → reader) is stored column-wise, the backward link (reader → tag)
//! row-wise; in the reciprocal (monostatic) case the backward matrix is
//! exactly the transpose of the forward one, but it is always stored
//! explicitly so the nonreciprocal (bistatic) case is a flag, not a fork.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::complex_gaussian_vector;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Speed of light, m/s, as used by the pathloss constant.
const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Minimum tag–reader distance in meters (unit reference distance).
pub const MIN_TAG_DISTANCE: f64 = 1.0;

/// Forward/backward channel matrices with their large-scale statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// N×M matrix; column k is the tag-k-to-reader channel h_{F,k}.
    pub forward: DMatrix<Complex64>,
    /// M×N matrix; row k is the reader-to-tag-k channel h_{B,k}.
    pub backward: DMatrix<Complex64>,
    /// Per-tag average channel power gains β_k.
    pub betas: Vec<f64>,
    /// Per-tag 2-D coordinates in meters, reader at the origin.
    pub positions: Vec<[f64; 2]>,
}

impl ChannelSet {
    /// Number of reader antennas N.
    pub fn n_antennas(&self) -> usize {
        self.forward.nrows()
    }

    /// Number of tags M.
    pub fn n_tags(&self) -> usize {
        self.forward.ncols()
    }

    /// Forward channel column h_{F,k}.
    pub fn forward_col(&self, k: usize) -> DVector<Complex64> {
        self.forward.column(k).into_owned()
    }

    /// Backward channel row h_{B,k} as a column vector (entry i is the gain
    /// from reader antenna i to tag k).
    pub fn backward_row(&self, k: usize) -> DVector<Complex64> {
        self.backward.row(k).transpose()
    }

    /// True when the backward matrix is exactly the transpose of the
    /// forward matrix, which is how reciprocal (monostatic) channel sets
    /// are constructed; independent bistatic draws never satisfy this.
    pub fn is_reciprocal(&self) -> bool {
        self.backward == self.forward.transpose()
    }

    /// Rescales every channel entry by `noise^{-1/4}` so the model behaves
    /// as if the reader noise power were exactly 1.
    ///
    /// Every SINR in this crate is invariant under (channels, noise) →
    /// (c·channels, c⁴·noise); with c = noise^{-1/4} all optimizer
    /// quantities move to O(1) magnitudes, which keeps line searches far
    /// from the underflow region induced by −170 dBm noise floors.
    pub(crate) fn noise_normalized(&self, noise: f64) -> ChannelSet {
        let c = Complex64::new(noise.powf(-0.25), 0.0);
        ChannelSet {
            forward: &self.forward * c,
            backward: &self.backward * c,
            betas: self.betas.clone(),
            positions: self.positions.clone(),
        }
    }
}

/// Backscattering-coefficient vector α, one entry per tag.
#[derive(Debug, Clone, PartialEq)]
pub struct BCVector {
    /// Reflection coefficients α_k, each within [α_min, α_max].
    pub alphas: Vec<f64>,
}

impl BCVector {
    /// All tags at the same coefficient (e.g. full reflection at α_max).
    pub fn full(value: f64, n_tags: usize) -> Self {
        BCVector {
            alphas: vec![value; n_tags],
        }
    }

    /// Number of tags.
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    /// True when there are no tags (never the case for valid configs).
    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Entry-wise clamp onto [lo, hi].
    pub fn clamped(&self, lo: f64, hi: f64) -> Self {
        BCVector {
            alphas: self.alphas.iter().map(|a| a.clamp(lo, hi)).collect(),
        }
    }
}

/// Average channel power gain ϖ·d^{−ϱ} with ϖ = (c / 4πf)², the gain at
/// the 1 m reference distance.
pub fn pathloss(distance: f64, carrier_freq: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::domain(format!(
            "pathloss distance must be positive, got {distance}"
        )));
    }
    if !(carrier_freq > 0.0) {
        return Err(Error::domain(format!(
            "carrier frequency must be positive, got {carrier_freq}"
        )));
    }
    let reference = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * carrier_freq);
    Ok(reference * reference * distance.powf(-exponent))
}

/// Draws M tag positions uniformly over the L×L square centered on the
/// reader, resampling any point closer than [`MIN_TAG_DISTANCE`].
///
/// For degenerate fields too small to contain any point at the floor
/// distance, the draw falls back (after a bounded number of rejections) to
/// a uniformly-directed point at exactly the floor distance, so `d_k ≥ 1`
/// holds for every output unconditionally.
pub fn generate_deployment<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<[f64; 2]> {
    let half = config.field_length / 2.0;
    let mut positions = Vec::with_capacity(config.n_tags);
    for _ in 0..config.n_tags {
        let mut placed = None;
        for _ in 0..10_000 {
            let x = rng.random_range(-half..=half);
            let y = rng.random_range(-half..=half);
            if (x * x + y * y).sqrt() >= MIN_TAG_DISTANCE {
                placed = Some([x, y]);
                break;
            }
        }
        let p = placed.unwrap_or_else(|| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            [MIN_TAG_DISTANCE * theta.cos(), MIN_TAG_DISTANCE * theta.sin()]
        });
        positions.push(p);
    }
    positions
}

/// Draws a Rayleigh-fading channel set for the given tag positions.
///
/// Column k of the forward matrix is CN(0, β_k I_N) with β_k from the
/// pathloss at tag k's distance; the backward matrix is the exact transpose
/// under reciprocity and an independent draw otherwise.
pub fn generate_channels<R: Rng + ?Sized>(
    config: &SystemConfig,
    positions: &[[f64; 2]],
    rng: &mut R,
) -> Result<ChannelSet> {
    let n = config.n_antennas;
    let m = positions.len();
    let mut betas = Vec::with_capacity(m);
    for p in positions {
        let d = (p[0] * p[0] + p[1] * p[1]).sqrt();
        betas.push(pathloss(d, config.carrier_freq, config.pathloss_exponent)?);
    }
    let forward = rayleigh_matrix(n, &betas, rng);
    let backward = if config.reciprocal {
        forward.transpose()
    } else {
        rayleigh_matrix(n, &betas, rng).transpose()
    };
    Ok(ChannelSet {
        forward,
        backward,
        betas,
        positions: positions.to_vec(),
    })
}

/// N×M matrix whose column k is CN(0, betas[k]·I_N).
fn rayleigh_matrix<R: Rng + ?Sized>(
    n_antennas: usize,
    betas: &[f64],
    rng: &mut R,
) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n_antennas, betas.len());
    for (k, &beta) in betas.iter().enumerate() {
        let col = complex_gaussian_vector(rng, n_antennas) * Complex64::new(beta.sqrt(), 0.0);
        m.set_column(k, &col);
    }
    m
}

/// Gauss–Markov CSI corruption: h̃_k = √(1−η²)·h_k + η·√β_k·z_k with
/// z_k ~ CN(0, I_N) independent of h_k.
///
/// η = 0 returns the input unchanged; η = 1 returns channels statistically
/// independent of the input. The convex mixing preserves per-entry variance
/// for every η. Under reciprocity (detected via [`ChannelSet::is_reciprocal`])
/// the backward matrix mirrors the corrupted forward matrix; otherwise it is
/// corrupted with independent noise.
pub fn corrupt_csi<R: Rng + ?Sized>(
    channels: &ChannelSet,
    eta: f64,
    rng: &mut R,
) -> Result<ChannelSet> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!(
            "csi error must lie in [0, 1], got {eta}"
        )));
    }
    if eta == 0.0 {
        return Ok(channels.clone());
    }
    let reciprocal = channels.is_reciprocal();
    let keep = (1.0 - eta * eta).sqrt();
    let n = channels.n_antennas();
    let corrupt_cols = |m: &DMatrix<Complex64>, rng: &mut R| -> DMatrix<Complex64> {
        let mut out = m.clone() * Complex64::new(keep, 0.0);
        for (k, &beta) in channels.betas.iter().enumerate() {
            let z = complex_gaussian_vector(rng, n) * Complex64::new(eta * beta.sqrt(), 0.0);
            let mixed = out.column(k) + z;
            out.set_column(k, &mixed);
        }
        out
    };
    let forward = corrupt_cols(&channels.forward, rng);
    let backward = if reciprocal {
        forward.transpose()
    } else {
        corrupt_cols(&channels.backward.transpose(), rng).transpose()
    };
    Ok(ChannelSet {
        forward,
        backward,
        betas: channels.betas.clone(),
        positions: channels.positions.clone(),
    })
}
