//! Asymptotic and joint designs: the high-SNR (zero-forcing + matrix
//! relaxation) and low-SNR (energy beamforming + corner enumeration)
//! closed/semi-closed forms, the weighted warm start between them, the
//! direct-search joint and transceiver-only optimizers, and the single
//! multiantenna-tag closed form.

use crate::channel::{BCVector, ChannelSet};
use crate::combiners::{mmse_combiner, zf_combiner};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::individual::randomize_rank_one;
use crate::linalg::{hermitian_eigen, principal_eigenvector};
use crate::optim::{nelder_mead, pga_psd_maximize};
use crate::throughput::{Design, Precoder, PrecoderMatrix};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

/// RNG stream id for the high-SNR randomization draws.
const HIGH_SNR_RANDOMIZATION_STREAM: u64 = 0x68736e72;
/// Maximum matrix-solve/randomization rounds in the high-SNR design. A
/// round past the first only happens if a rank-one candidate beats the
/// matrix bound, which the follow-up warm-started solve then restores.
const HIGH_SNR_ROUNDS: usize = 4;
/// Tag-count cap for the low-SNR corner enumeration (2^M candidates).
const ENUMERATION_TAG_LIMIT: usize = 20;
/// Inner iteration cap for the matrix-relaxation solver.
const MATRIX_SOLVE_ITERATIONS: usize = 2000;
/// Nelder–Mead iteration cap per restart.
const NM_MAX_ITERATIONS: usize = 600;

/// High-SNR matrix objective data on noise-normalized channels:
/// maximize Σ_k log₂(1 + α_max γ̃_k z_k(F)) over the PSD trace ball.
struct HighSnrProblem {
    n: usize,
    m: usize,
    budget: f64,
    /// α_max · γ̃_k, the per-tag SNR prefactor.
    gain: Vec<f64>,
    b_conj: Vec<DVector<Complex64>>,
    b_outer: Vec<DMatrix<Complex64>>,
}

impl HighSnrProblem {
    fn powers(&self, f: &PrecoderMatrix) -> Vec<f64> {
        self.b_conj
            .iter()
            .map(|b| b.dotc(&(&f.matrix * b)).re.max(0.0))
            .collect()
    }

    fn objective(&self, f: &PrecoderMatrix) -> f64 {
        self.powers(f)
            .iter()
            .zip(&self.gain)
            .map(|(&z, &g)| (1.0 + g * z).log2())
            .sum()
    }

    fn gradient(&self, f: &PrecoderMatrix) -> DMatrix<Complex64> {
        let z = self.powers(f);
        let mut grad = DMatrix::<Complex64>::zeros(self.n, self.n);
        for k in 0..self.m {
            let w = self.gain[k] / ((1.0 + self.gain[k] * z[k]) * LN_2);
            grad += &self.b_outer[k] * Complex64::new(w, 0.0);
        }
        grad
    }

    /// Rank-one objective (the randomization evaluator): the same rate at
    /// F = f fᴴ, written directly on the vector.
    fn rank_one_rate(&self, f: &Precoder) -> f64 {
        self.b_conj
            .iter()
            .zip(&self.gain)
            .map(|(b, &g)| (1.0 + g * b.dotc(&f.f).norm_sqr()).log2())
            .sum()
    }

    /// Multi-start matrix solve: the sum-MRT rank-one start and the
    /// uniform (identity) start, each followed by a restart from its own
    /// principal eigen-direction; best objective wins.
    fn solve(&self, tol: f64) -> Result<(PrecoderMatrix, f64)> {
        let mut inits: Vec<PrecoderMatrix> = Vec::new();
        let mut dir = DVector::<Complex64>::zeros(self.n);
        for b in &self.b_conj {
            dir += b;
        }
        if dir.norm() > 1e-150 {
            inits.push(PrecoderMatrix::from_rank_one(&Precoder::from_direction(
                &dir,
                self.budget,
            )?));
        }
        inits.push(PrecoderMatrix::new(
            DMatrix::identity(self.n, self.n)
                * Complex64::new(self.budget / self.n as f64, 0.0),
        ));
        let mut best: Option<(PrecoderMatrix, f64)> = None;
        for init in inits {
            let (f1, r1) = pga_psd_maximize(
                |f: &PrecoderMatrix| self.objective(f),
                |f: &PrecoderMatrix| self.gradient(f),
                &init,
                self.budget,
                tol,
                MATRIX_SOLVE_ITERATIONS,
            )?;
            // Restart from the dominant eigen-direction of the solution.
            let (_, vectors) = hermitian_eigen(&f1.matrix);
            let top = vectors.column(0).into_owned();
            let restart = PrecoderMatrix::new(
                &top * top.adjoint() * Complex64::new(self.budget, 0.0),
            );
            let (f2, r2) = pga_psd_maximize(
                |f: &PrecoderMatrix| self.objective(f),
                |f: &PrecoderMatrix| self.gradient(f),
                &restart,
                self.budget,
                tol,
                MATRIX_SOLVE_ITERATIONS,
            )?;
            for (f, v) in [(f1, r1.final_value), (f2, r2.final_value)] {
                if best.as_ref().map(|(_, bv)| v > *bv).unwrap_or(true) {
                    best = Some((f, v));
                }
            }
        }
        best.ok_or_else(|| Error::domain("matrix relaxation produced no solution"))
    }
}

/// High-SNR design with its relaxation diagnostics: the matrix objective
/// value and the extracted rank-one rate (the latter never exceeds the
/// former beyond slack, enforced by warm-started re-solves).
pub(crate) fn high_snr_design_full(
    channels: &ChannelSet,
    config: &SystemConfig,
) -> Result<(Design, f64, f64)> {
    let chn = channels.noise_normalized(config.noise_reader);
    let (combiner, gamma) = zf_combiner(&chn, 1.0)?;
    let m = chn.n_tags();
    let problem = HighSnrProblem {
        n: chn.n_antennas(),
        m,
        budget: config.power_budget,
        gain: gamma.iter().map(|&g| config.alpha_max * g).collect(),
        b_conj: (0..m).map(|k| chn.backward_row(k).conjugate()).collect(),
        b_outer: (0..m)
            .map(|k| {
                let b = chn.backward_row(k).conjugate();
                &b * b.adjoint()
            })
            .collect(),
    };
    let tol = (config.tol * 1e-4).max(1e-12);
    let (mut f_mat, mut matrix_value) = problem.solve(tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(HIGH_SNR_RANDOMIZATION_STREAM);
    let mut f_best: Option<(Precoder, f64)> = None;
    for _ in 0..HIGH_SNR_ROUNDS {
        let cand = randomize_rank_one(
            &f_mat,
            |f: &Precoder| problem.rank_one_rate(f),
            config.rand_samples,
            config.power_budget,
            &mut rng,
        )?;
        let cand_value = problem.rank_one_rate(&cand);
        if f_best.as_ref().map(|(_, v)| cand_value > *v).unwrap_or(true) {
            f_best = Some((cand, cand_value));
        }
        let best_value = f_best.as_ref().map(|(_, v)| *v).unwrap();
        if best_value <= matrix_value + 1e-12 {
            break;
        }
        // A rank-one candidate beat the matrix iterate: re-solve from the
        // candidate's outer product. The solver's monotone guarantee puts
        // the matrix value back above the candidate's rate.
        let (f_vec, _) = f_best.as_ref().unwrap();
        let warm = PrecoderMatrix::from_rank_one(f_vec);
        let (f_new, new_value) = {
            let (f, report) = pga_psd_maximize(
                |f: &PrecoderMatrix| problem.objective(f),
                |f: &PrecoderMatrix| problem.gradient(f),
                &warm,
                config.power_budget,
                tol,
                MATRIX_SOLVE_ITERATIONS,
            )?;
            (f, report.final_value)
        };
        if new_value > matrix_value {
            f_mat = f_new;
            matrix_value = new_value;
        }
    }
    let (f_op, rank_one_value) = f_best.ok_or(Error::ZeroVector {
        context: "high-SNR randomization produced no candidate",
        tag: 0,
    })?;
    let alpha = BCVector::full(config.alpha_max, m);
    let design = Design::evaluated(channels, f_op, combiner, alpha, config.noise_reader)?;
    Ok((design, matrix_value, rank_one_value))
}

/// High-SNR joint design: zero-forcing combiner, full reflection, and a
/// precoder extracted from the concave matrix relaxation of the resulting
/// interference-free throughput.
pub fn high_snr_design(channels: &ChannelSet, config: &SystemConfig) -> Result<Design> {
    high_snr_design_full(channels, config).map(|(design, _, _)| design)
}

/// Energy-beamforming precoder: the full budget along the principal
/// eigen-direction of the backward-channel Gram matrix, maximizing the
/// total power delivered to the tags.
pub fn eb_precoder(channels: &ChannelSet, budget: f64) -> Result<Precoder> {
    let gram = channels.backward.adjoint() * &channels.backward;
    let (_, v_max) = principal_eigenvector(&gram);
    Precoder::from_direction(&v_max, budget)
}

/// Low-SNR design: energy-beamforming precoder, MMSE combiner at full
/// reflection, and exhaustive BC selection over every bound corner.
/// Rate ties prefer more full-reflection entries, then the
/// lexicographically greatest vector.
pub fn low_snr_design(channels: &ChannelSet, config: &SystemConfig) -> Result<Design> {
    let m = channels.n_tags();
    if m > ENUMERATION_TAG_LIMIT {
        return Err(Error::EnumerationLimit {
            tags: m,
            limit: ENUMERATION_TAG_LIMIT,
        });
    }
    let f_l = eb_precoder(channels, config.power_budget)?;
    let alpha_full = BCVector::full(config.alpha_max, m);
    let combiner = mmse_combiner(channels, &f_l, &alpha_full, config.noise_reader)?;

    let corner = |mask: usize| -> BCVector {
        BCVector {
            alphas: (0..m)
                .map(|k| {
                    if mask & (1 << k) != 0 {
                        config.alpha_max
                    } else {
                        config.alpha_min
                    }
                })
                .collect(),
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for mask in 0..(1usize << m) {
        let alpha = corner(mask);
        let rate = crate::throughput::sum_throughput(
            channels,
            &f_l,
            &combiner,
            &alpha,
            config.noise_reader,
        )?;
        let take = match &best {
            None => true,
            Some((best_mask, best_rate)) => {
                if rate > *best_rate {
                    true
                } else if rate == *best_rate {
                    let ones = mask.count_ones();
                    let best_ones = best_mask.count_ones();
                    ones > best_ones
                        || (ones == best_ones
                            && corner(mask).alphas > corner(*best_mask).alphas)
                } else {
                    false
                }
            }
        };
        if take {
            best = Some((mask, rate));
        }
    }
    let (mask, _) = best.expect("at least one corner is always evaluated");
    Design::evaluated(channels, f_l, combiner, corner(mask), config.noise_reader)
}

/// Power-sphere combination of the low-SNR and high-SNR precoders with
/// weight w0 on the low-SNR one. Near-perfect cancellation falls back to
/// the high-SNR precoder with a warning.
pub fn weighted_precoder(
    f_l: &Precoder,
    f_h: &Precoder,
    w0: f64,
    budget: f64,
) -> Result<Precoder> {
    if !(0.0..=1.0).contains(&w0) {
        return Err(Error::domain(format!(
            "precoder weight must lie in [0, 1], got {w0}"
        )));
    }
    let combo = &f_l.f * Complex64::new(w0, 0.0) + &f_h.f * Complex64::new(1.0 - w0, 0.0);
    if combo.norm() < 1e-14 {
        log::warn!(
            "weighted precoder direction cancelled (w0 = {w0}); falling back to the high-SNR precoder"
        );
        return Precoder::from_direction(&f_h.f, budget);
    }
    Precoder::from_direction(&combo, budget)
}

/// Angle between two precoder directions: arccos of the clamped real part
/// of their normalized inner product, in [0, π].
pub fn precoder_angle(a: &Precoder, b: &Precoder) -> f64 {
    let denom = a.f.norm() * b.f.norm();
    if denom < 1e-300 {
        return 0.0;
    }
    (a.f.dotc(&b.f).re / denom).clamp(-1.0, 1.0).acos()
}

/// Maps a direct-search coordinate vector onto the feasible set: the first
/// 2N reals are the precoder (renormalized onto the power sphere only when
/// the budget is exceeded), the last M are BC values clamped to the box.
fn decode_point(
    x: &[f64],
    n: usize,
    m: usize,
    config: &SystemConfig,
    pinned_alpha: Option<&BCVector>,
) -> (Precoder, BCVector) {
    let mut f = DVector::<Complex64>::from_iterator(
        n,
        (0..n).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])),
    );
    let norm_sq = f.norm_squared();
    if norm_sq > config.power_budget {
        f.scale_mut((config.power_budget / norm_sq).sqrt());
    }
    let alpha = match pinned_alpha {
        Some(a) => a.clone(),
        None => BCVector {
            alphas: (0..m)
                .map(|k| x[2 * n + k].clamp(config.alpha_min, config.alpha_max))
                .collect(),
        },
    };
    (Precoder::new(f), alpha)
}

/// Exact sum throughput of a decoded point under its own re-derived MMSE
/// combiner; non-viable points map to −∞ so the search avoids them.
fn search_objective(
    channels: &ChannelSet,
    config: &SystemConfig,
    f: &Precoder,
    alpha: &BCVector,
) -> f64 {
    let combiner = match mmse_combiner(channels, f, alpha, config.noise_reader) {
        Ok(g) => g,
        Err(_) => return f64::NEG_INFINITY,
    };
    match crate::throughput::sum_throughput(channels, f, &combiner, alpha, config.noise_reader) {
        Ok(rate) => rate,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Runs the K_0-restart direct search from weighted warm starts and
/// returns every restart's touched-up design.
fn direct_search_candidates(
    channels: &ChannelSet,
    config: &SystemConfig,
    f_l: &Precoder,
    f_h: &Precoder,
    pinned_alpha: Option<&BCVector>,
) -> Result<Vec<Design>> {
    let n = channels.n_antennas();
    let m = channels.n_tags();
    let restarts = config.nm_restarts.max(1);
    let dim = if pinned_alpha.is_some() { 2 * n } else { 2 * n + m };
    let mut scale = vec![0.05 * (config.power_budget / n as f64).sqrt(); 2 * n];
    if pinned_alpha.is_none() {
        // BC coordinates start at the upper bound: explore inward.
        scale.extend(std::iter::repeat(-0.25 * (config.alpha_max - config.alpha_min)).take(m));
    }
    let alpha_start = BCVector::full(config.alpha_max, m);
    let mut designs = Vec::with_capacity(restarts);
    for it in 0..restarts {
        let w0 = if restarts == 1 {
            0.0
        } else {
            it as f64 / (restarts - 1) as f64
        };
        let f_start = weighted_precoder(f_l, f_h, w0, config.power_budget)?;
        let mut x0 = Vec::with_capacity(dim);
        for v in f_start.f.iter() {
            x0.push(v.re);
            x0.push(v.im);
        }
        if pinned_alpha.is_none() {
            x0.extend_from_slice(&alpha_start.alphas);
        }
        let objective = |x: &[f64]| {
            let (f, alpha) = decode_point(x, n, m, config, pinned_alpha);
            search_objective(channels, config, &f, &alpha)
        };
        let (x_best, _) = nelder_mead(objective, &x0, &scale, config.tol, NM_MAX_ITERATIONS)?;
        let (f, alpha) = decode_point(&x_best, n, m, config, pinned_alpha);
        let combiner = mmse_combiner(channels, &f, &alpha, config.noise_reader)?;
        designs.push(Design::evaluated(
            channels,
            f,
            combiner,
            alpha,
            config.noise_reader,
        )?);
    }
    Ok(designs)
}

fn best_design(candidates: Vec<Design>) -> Result<Design> {
    candidates
        .into_iter()
        .reduce(|best, cand| if cand.sum_rate > best.sum_rate { cand } else { best })
        .ok_or_else(|| Error::domain("no candidate designs produced"))
}

/// Joint transceiver-and-BC optimization: direct search over (precoder,
/// BC) from weighted warm starts between the two asymptotic precoders,
/// with the combiner re-derived at every evaluation. The returned design
/// is the best of the search results, both asymptotic designs, and the
/// transceiver-only restriction — so it dominates all of them by
/// construction.
pub fn joint_optimize(channels: &ChannelSet, config: &SystemConfig) -> Result<Design> {
    let (high, _, _) = high_snr_design_full(channels, config)?;
    let low = low_snr_design(channels, config)?;
    let f_l = low.precoder.clone();
    let f_h = high.precoder.clone();
    let mut candidates =
        direct_search_candidates(channels, config, &f_l, &f_h, None)?;
    candidates.push(trx_only_with_anchors(channels, config, &high, &f_l)?);
    candidates.push(high);
    candidates.push(low);
    best_design(candidates)
}

/// Transceiver-only restriction shared by `trx_only_optimize` and the
/// joint optimizer: direct search over the precoder alone at pinned full
/// reflection, compared against the high-SNR design and the
/// energy-beamforming precoder under its adapted combiner.
fn trx_only_with_anchors(
    channels: &ChannelSet,
    config: &SystemConfig,
    high: &Design,
    f_l: &Precoder,
) -> Result<Design> {
    let m = channels.n_tags();
    let alpha_full = BCVector::full(config.alpha_max, m);
    let f_h = high.precoder.clone();
    let mut candidates = direct_search_candidates(
        channels,
        config,
        f_l,
        &f_h,
        Some(&alpha_full),
    )?;
    let g_low = mmse_combiner(channels, f_l, &alpha_full, config.noise_reader)?;
    candidates.push(Design::evaluated(
        channels,
        f_l.clone(),
        g_low,
        alpha_full,
        config.noise_reader,
    )?);
    candidates.push(high.clone());
    best_design(candidates)
}

/// Transceiver-only optimization: identical to the joint optimizer except
/// the BC vector is pinned to full reflection throughout.
pub fn trx_only_optimize(channels: &ChannelSet, config: &SystemConfig) -> Result<Design> {
    let (high, _, _) = high_snr_design_full(channels, config)?;
    let f_l = eb_precoder(channels, config.power_budget)?;
    trx_only_with_anchors(channels, config, &high, &f_l)
}

/// Closed-form design for one multiantenna tag with channel matrix H₀:
/// precoder along the principal eigen-direction of the two-hop Gram
/// matrix, matched-filter combiner on the cascaded channel, and full
/// reflection. Returns (precoder, combiner vector, BC vector, rate).
pub fn single_tag_mimo_design(
    h0: &DMatrix<Complex64>,
    config: &SystemConfig,
) -> Result<(Precoder, DVector<Complex64>, BCVector, f64)> {
    let cascade = h0 * h0.transpose();
    let gram = cascade.adjoint() * &cascade;
    let (lambda_max, v_max) = principal_eigenvector(&gram);
    let f0 = Precoder::new(v_max * Complex64::new(config.power_budget.sqrt(), 0.0));
    let g_raw = &cascade * &f0.f;
    let g0 = if g_raw.norm() > 1e-300 {
        g_raw.unscale(g_raw.norm())
    } else {
        let mut e = DVector::<Complex64>::zeros(h0.nrows());
        e[0] = Complex64::new(1.0, 0.0);
        e
    };
    let m0 = h0.ncols();
    let alpha = BCVector::full(config.alpha_max, m0);
    let rate = (1.0
        + config.alpha_max * config.power_budget * lambda_max / config.noise_reader)
        .log2();
    Ok((f0, g0, alpha, rate))
}
