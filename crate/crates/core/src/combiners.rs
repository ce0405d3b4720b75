//! Closed-form receive beamformers: per-tag SINR-optimal (MMSE/Wiener),
//! interference-nulling zero-forcing (near-optimal at high SNR), and
//! maximum-ratio combining.

use crate::channel::{BCVector, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, solve_hermitian_pd};
use crate::throughput::{CombinerMatrix, Precoder};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Condition-number bound past which a zero-forcing solve is refused.
pub const ZF_CONDITION_LIMIT: f64 = 1e12;

/// MMSE (Wiener) combiner: g_k ∝ A⁻¹ h_{F,k} with
/// A = I_N + (1/σ²) Σ_i α_i |h_{B,i}·f|² h_{F,i} h_{F,i}ᴴ,
/// normalized to unit-norm columns.
///
/// A is the identity plus a PSD update, hence always invertible; each
/// column is obtained by a Hermitian positive-definite solve, never an
/// explicit inverse. This combiner maximizes every tag's SINR.
pub fn mmse_combiner(
    channels: &ChannelSet,
    f: &Precoder,
    alpha: &BCVector,
    noise: f64,
) -> Result<CombinerMatrix> {
    let n = channels.n_antennas();
    let m = channels.n_tags();
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            context: "reflection coefficients vs tags",
            expected: m,
            actual: alpha.len(),
        });
    }
    let mut a = DMatrix::<Complex64>::identity(n, n);
    for i in 0..m {
        let excitation = channels.backward_row(i).dot(&f.f).norm_sqr();
        let weight = Complex64::new(alpha.alphas[i] * excitation / noise, 0.0);
        let h = channels.forward.column(i);
        // Rank-one Hermitian update α_i γ_T,i σ²⁻¹-scaled h h^H.
        a += (&h * h.adjoint()) * weight;
    }
    let mut g = DMatrix::<Complex64>::zeros(n, m);
    for k in 0..m {
        let h = channels.forward_col(k);
        if h.norm() == 0.0 {
            return Err(Error::ZeroVector {
                context: "forward channel column",
                tag: k,
            });
        }
        let x = solve_hermitian_pd(&a, &h).ok_or_else(|| {
            Error::domain("regularized combiner system unexpectedly singular")
        })?;
        let norm = x.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector {
                context: "combiner solve output",
                tag: k,
            });
        }
        g.set_column(k, &(x / Complex64::new(norm, 0.0)));
    }
    Ok(CombinerMatrix::new(g))
}

/// Zero-forcing combiner from the forward-channel pseudo-inverse:
/// G_Z = H(HᴴH)⁻¹, columns returned unit-normalized, plus the per-tag
/// interference-free SNR prefactors γ̃_g,k = 1/(σ² ‖[G_Z]_k‖²).
///
/// Requires N ≥ M and a numerically full-rank channel matrix; the 2-norm
/// condition number (estimated from the Gram spectrum) must stay below
/// [`ZF_CONDITION_LIMIT`], otherwise the solve fails loudly.
pub fn zf_combiner(channels: &ChannelSet, noise: f64) -> Result<(CombinerMatrix, Vec<f64>)> {
    let n = channels.n_antennas();
    let m = channels.n_tags();
    if n < m {
        return Err(Error::DimensionMismatch {
            context: "zero-forcing needs antennas >= tags",
            expected: m,
            actual: n,
        });
    }
    let h = &channels.forward;
    let gram = h.adjoint() * h;
    let (eigs, _) = hermitian_eigen(&gram);
    let lambda_max = eigs.first().copied().unwrap_or(0.0);
    let lambda_min = eigs.last().copied().unwrap_or(0.0);
    let condition = if lambda_min > 0.0 {
        (lambda_max / lambda_min).sqrt()
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition > ZF_CONDITION_LIMIT {
        return Err(Error::RankDeficient {
            condition,
            limit: ZF_CONDITION_LIMIT,
        });
    }
    // G_Z = H (HᴴH)⁻¹, built column-wise via PD solves on the Gram matrix.
    let mut g_raw = DMatrix::<Complex64>::zeros(n, m);
    let identity = DMatrix::<Complex64>::identity(m, m);
    for k in 0..m {
        let e_k = identity.column(k).into_owned();
        let x = solve_hermitian_pd(&gram, &e_k)
            .ok_or_else(|| Error::RankDeficient {
                condition,
                limit: ZF_CONDITION_LIMIT,
            })?;
        g_raw.set_column(k, &(h * x));
    }
    let mut g = DMatrix::<Complex64>::zeros(n, m);
    let mut gamma_tilde = Vec::with_capacity(m);
    for k in 0..m {
        let col = g_raw.column(k);
        let norm_sq = col.norm_squared();
        gamma_tilde.push(1.0 / (noise * norm_sq));
        g.set_column(k, &(col / Complex64::new(norm_sq.sqrt(), 0.0)));
    }
    Ok((CombinerMatrix::new(g), gamma_tilde))
}

/// Maximum-ratio combiner: g_k = h_{F,k}/‖h_{F,k}‖.
pub fn mrc_combiner(channels: &ChannelSet) -> Result<CombinerMatrix> {
    let n = channels.n_antennas();
    let m = channels.n_tags();
    let mut g = DMatrix::<Complex64>::zeros(n, m);
    for k in 0..m {
        let h = channels.forward.column(k);
        let norm = h.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector {
                context: "forward channel column",
                tag: k,
            });
        }
        g.set_column(k, &(h / Complex64::new(norm, 0.0)));
    }
    Ok(CombinerMatrix::new(g))
}
