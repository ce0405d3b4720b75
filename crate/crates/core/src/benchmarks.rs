//! Baseline schemes the adaptive designs are compared against: the
//! per-tag MRT precoder with zero-forcing reception, and the better of
//! the two asymptotic transceivers at full reflection.

use crate::asymptotic::{high_snr_design, low_snr_design};
use crate::channel::{BCVector, ChannelSet};
use crate::combiners::zf_combiner;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::throughput::{Design, Precoder};
use nalgebra::DVector;
use num_complex::Complex64;

/// MRT-ZF baseline: one maximum-ratio precoder per tag with an equal
/// power split, transmitted as their sum; zero-forcing combiner; full
/// reflection. The rate is evaluated with the summed excitation.
pub fn mrt_zf_benchmark(channels: &ChannelSet, config: &SystemConfig) -> Result<Design> {
    let n = channels.n_antennas();
    let m = channels.n_tags();
    let per_tag_power = config.power_budget / m as f64;
    let mut f_sum = DVector::<Complex64>::zeros(n);
    for k in 0..m {
        let h_conj = channels.forward.column(k).conjugate();
        let f_k = Precoder::from_direction(&h_conj, per_tag_power)?;
        f_sum += &f_k.f;
    }
    let (combiner, _) = zf_combiner(channels, config.noise_reader)?;
    let alpha = BCVector::full(config.alpha_max, m);
    Design::evaluated(
        channels,
        Precoder::new(f_sum),
        combiner,
        alpha,
        config.noise_reader,
    )
}

/// Low/high selection baseline: evaluate the low-SNR and high-SNR
/// transceivers, both at full reflection, and keep whichever achieves the
/// larger exact sum throughput.
pub fn low_high_trx(channels: &ChannelSet, config: &SystemConfig) -> Result<Design> {
    let m = channels.n_tags();
    let alpha_full = BCVector::full(config.alpha_max, m);
    let high = high_snr_design(channels, config)?;
    let low = low_snr_design(channels, config)?;
    // Both branches pinned to full reflection; the low design may have
    // selected other corners, so re-evaluate its transceiver at the pin.
    let low_branch = Design::evaluated(
        channels,
        low.precoder,
        low.combiner,
        alpha_full.clone(),
        config.noise_reader,
    )?;
    let high_branch = Design::evaluated(
        channels,
        high.precoder,
        high.combiner,
        alpha_full,
        config.noise_reader,
    )?;
    Ok(if high_branch.sum_rate >= low_branch.sum_rate {
        high_branch
    } else {
        low_branch
    })
}
