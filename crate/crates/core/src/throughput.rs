//! Transmit SNR, backscattered SINR, and sum-throughput evaluation.
//!
//! The reader excites all tags with one common precoder `f`; each tag k
//! reflects a fraction α_k of the incident power, and the reader separates
//! the streams with per-tag combiners g_k. Rates are evaluated in linear
//! scale exactly as the model defines them — no dB intermediates.
//!
//! Two interchangeable forms are provided: the vector form in `f`, and the
//! relaxed matrix form in `F` (Hermitian PSD, standing in for f·fᴴ), which
//! the precoder optimizers ascend because the sum rate is concave in `F`.

use crate::channel::{BCVector, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, trace_re};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Common transmit precoder; its squared norm may not exceed the power
/// budget. Maintained by the optimizers rather than checked on every
/// construction (benchmark evaluation legitimately sums per-tag precoders).
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    /// Beamforming vector, one entry per reader antenna.
    pub f: DVector<Complex64>,
}

impl Precoder {
    /// Wraps a raw beamforming vector.
    pub fn new(f: DVector<Complex64>) -> Self {
        Precoder { f }
    }

    /// Unit-direction precoder scaled to carry exactly `power` watts.
    /// Returns an error for a (numerically) zero direction.
    pub fn from_direction(direction: &DVector<Complex64>, power: f64) -> Result<Self> {
        let norm = direction.norm();
        if norm < 1e-150 {
            return Err(Error::domain("cannot scale a zero precoder direction"));
        }
        Ok(Precoder {
            f: direction * Complex64::new(power.sqrt() / norm, 0.0),
        })
    }

    /// Transmit power ‖f‖² currently carried.
    pub fn power(&self) -> f64 {
        self.f.norm_squared()
    }
}

/// Receive combiners, one column per tag; all designed combiners have
/// unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerMatrix {
    /// N×M matrix; column k is g_k.
    pub g: DMatrix<Complex64>,
}

impl CombinerMatrix {
    /// Wraps a raw combiner matrix.
    pub fn new(g: DMatrix<Complex64>) -> Self {
        CombinerMatrix { g }
    }

    /// Combiner for tag k.
    pub fn column(&self, k: usize) -> DVector<Complex64> {
        self.g.column(k).into_owned()
    }

    /// Number of tags served.
    pub fn n_tags(&self) -> usize {
        self.g.ncols()
    }
}

/// Hermitian PSD matrix variable of the relaxed precoder subproblems,
/// standing in for the rank-one outer product f·fᴴ.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderMatrix {
    /// N×N Hermitian matrix.
    pub matrix: DMatrix<Complex64>,
}

/// Hermitian symmetry tolerance for [`PrecoderMatrix`] validation.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalue floor accepted as "positive semidefinite" in validation.
pub const PSD_EIG_TOL: f64 = -1e-10;
/// Relative slack on the trace budget in validation.
pub const TRACE_TOL: f64 = 1e-9;

impl PrecoderMatrix {
    /// Wraps a matrix that is already known to satisfy the invariants
    /// (e.g. produced by the trace-ball projection).
    pub fn new(matrix: DMatrix<Complex64>) -> Self {
        PrecoderMatrix { matrix }
    }

    /// Rank-one lift f·fᴴ of a vector precoder.
    pub fn from_rank_one(precoder: &Precoder) -> Self {
        let f = &precoder.f;
        PrecoderMatrix {
            matrix: f * f.adjoint(),
        }
    }

    /// Checks the documented invariants: Hermitian to 1e−12, eigenvalues
    /// ≥ −1e−10, and trace within the power budget (relative slack 1e−9).
    pub fn validate(&self, budget: f64) -> Result<()> {
        let m = &self.matrix;
        let asym = (m - m.adjoint()).norm();
        if asym > HERMITIAN_TOL * (1.0 + m.norm()) {
            return Err(Error::domain(format!(
                "precoder matrix is not Hermitian: asymmetry {asym:.3e}"
            )));
        }
        let (values, _) = hermitian_eigen(m);
        let min_eig = values.last().copied().unwrap_or(0.0);
        let scale = values.first().copied().unwrap_or(0.0).abs().max(1.0);
        if min_eig < PSD_EIG_TOL * scale {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
            });
        }
        let trace = trace_re(m);
        if trace > budget * (1.0 + TRACE_TOL) {
            return Err(Error::domain(format!(
                "precoder matrix trace {trace:.6e} exceeds budget {budget:.6e}"
            )));
        }
        Ok(())
    }

    /// Real trace (total relaxed transmit power).
    pub fn trace(&self) -> f64 {
        trace_re(&self.matrix)
    }
}

/// A complete transceiver design and its achieved sum throughput.
#[derive(Debug, Clone)]
pub struct Design {
    /// Transmit precoder.
    pub precoder: Precoder,
    /// Receive combiners.
    pub combiner: CombinerMatrix,
    /// Backscattering coefficients.
    pub bc: BCVector,
    /// Sum throughput in bits/s/Hz, always equal to re-evaluating
    /// [`sum_throughput`] on the stored members.
    pub sum_rate: f64,
}

impl Design {
    /// Assembles a design, computing its rate from its own members so the
    /// stored value can never drift from a re-evaluation.
    pub fn evaluated(
        channels: &ChannelSet,
        precoder: Precoder,
        combiner: CombinerMatrix,
        bc: BCVector,
        noise: f64,
    ) -> Result<Self> {
        let sum_rate = sum_throughput(channels, &precoder, &combiner, &bc, noise)?;
        Ok(Design {
            precoder,
            combiner,
            bc,
            sum_rate,
        })
    }
}

fn check_dims(
    channels: &ChannelSet,
    f: Option<&Precoder>,
    g: Option<&CombinerMatrix>,
    alpha: Option<&BCVector>,
) -> Result<()> {
    let n = channels.n_antennas();
    let m = channels.n_tags();
    if let Some(f) = f {
        if f.f.len() != n {
            return Err(Error::DimensionMismatch {
                context: "precoder length vs antennas",
                expected: n,
                actual: f.f.len(),
            });
        }
    }
    if let Some(g) = g {
        if g.g.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "combiner rows vs antennas",
                expected: n,
                actual: g.g.nrows(),
            });
        }
        if g.g.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "combiner columns vs tags",
                expected: m,
                actual: g.g.ncols(),
            });
        }
    }
    if let Some(alpha) = alpha {
        if alpha.len() != m {
            return Err(Error::DimensionMismatch {
                context: "reflection coefficients vs tags",
                expected: m,
                actual: alpha.len(),
            });
        }
    }
    Ok(())
}

/// Effective transmit SNR per tag: γ_T,k = |h_{B,k}·f|² / σ²_wR, the
/// excitation each tag receives relative to reader noise.
pub fn transmit_snr(channels: &ChannelSet, f: &Precoder, noise: f64) -> Result<Vec<f64>> {
    check_dims(channels, Some(f), None, None)?;
    let m = channels.n_tags();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        // Backward (reader-to-tag) row times precoder, no conjugation.
        let gain = channels.backward_row(k).dot(&f.f);
        out.push(gain.norm_sqr() / noise);
    }
    Ok(out)
}

/// Backscattered SINR per tag:
/// γ_R,k = α_k γ_T,k |g_kᴴ h_{F,k}|² / (Σ_{i≠k} α_i γ_T,i |g_kᴴ h_{F,i}|² + ‖g_k‖²).
///
/// Noise enters through the transmit SNRs γ_T and the combiner-norm term,
/// which makes the expression exact for combiners of any norm.
pub fn backscatter_sinr(
    channels: &ChannelSet,
    f: &Precoder,
    g: &CombinerMatrix,
    alpha: &BCVector,
    noise: f64,
) -> Result<Vec<f64>> {
    check_dims(channels, Some(f), Some(g), Some(alpha))?;
    let m = channels.n_tags();
    let gamma_t = transmit_snr(channels, f, noise)?;
    // |g_kᴴ h_{F,i}|² for all pairs.
    let mut cross = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let gk = g.g.column(k);
        if gk.norm() == 0.0 {
            return Err(Error::ZeroVector {
                context: "combiner column",
                tag: k,
            });
        }
        for i in 0..m {
            cross[(k, i)] = gk.dotc(&channels.forward.column(i)).norm_sqr();
        }
    }
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let num = alpha.alphas[k] * gamma_t[k] * cross[(k, k)];
        let mut den = g.g.column(k).norm_squared();
        for i in 0..m {
            if i != k {
                den += alpha.alphas[i] * gamma_t[i] * cross[(k, i)];
            }
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Per-tag throughputs log₂(1 + γ_R,k) in bits/s/Hz.
pub fn per_tag_throughput(
    channels: &ChannelSet,
    f: &Precoder,
    g: &CombinerMatrix,
    alpha: &BCVector,
    noise: f64,
) -> Result<Vec<f64>> {
    Ok(backscatter_sinr(channels, f, g, alpha, noise)?
        .into_iter()
        .map(|s| (1.0 + s).log2())
        .collect())
}

/// Sum throughput Σ_k log₂(1 + γ_R,k) in bits/s/Hz.
pub fn sum_throughput(
    channels: &ChannelSet,
    f: &Precoder,
    g: &CombinerMatrix,
    alpha: &BCVector,
    noise: f64,
) -> Result<f64> {
    Ok(per_tag_throughput(channels, f, g, alpha, noise)?
        .into_iter()
        .sum())
}

/// Relaxed-SINR evaluation with the PSD matrix `F` in place of f·fᴴ:
/// γ̄_R,k = α_k |g_kᴴh_k|² z_k(F) / (Σ_{i≠k} α_i |g_kᴴh_i|² z_i(F) + σ²‖g_k‖²)
/// where z_i(F) = h_{B,i} F h_{B,i}ᴴ is tag i's excitation power under `F`.
///
/// Coincides with [`backscatter_sinr`] whenever `F = f·fᴴ`.
pub fn sinr_sdr_form(
    channels: &ChannelSet,
    big_f: &PrecoderMatrix,
    g: &CombinerMatrix,
    alpha: &BCVector,
    noise: f64,
) -> Result<Vec<f64>> {
    check_dims(channels, None, Some(g), Some(alpha))?;
    let n = channels.n_antennas();
    if big_f.matrix.nrows() != n || big_f.matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "precoder matrix size vs antennas",
            expected: n,
            actual: big_f.matrix.nrows(),
        });
    }
    let scale = big_f.matrix.norm().max(1.0);
    let asym = (&big_f.matrix - big_f.matrix.adjoint()).norm();
    if asym > 1e-10 * scale {
        return Err(Error::domain(format!(
            "precoder matrix is not Hermitian: asymmetry {asym:.3e}"
        )));
    }
    let (values, _) = hermitian_eigen(&big_f.matrix);
    if let Some(&min_eig) = values.last() {
        if min_eig < -1e-8 * scale {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
            });
        }
    }
    let m = channels.n_tags();
    // Excitation powers z_i = b_i F b_iᴴ; real for Hermitian F, clamped at 0
    // against round-off on semidefinite matrices.
    let z: Vec<f64> = (0..m)
        .map(|i| {
            let b = channels.backward.row(i);
            (&b * &big_f.matrix * b.adjoint())[(0, 0)].re.max(0.0)
        })
        .collect();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let gk = g.g.column(k);
        if gk.norm() == 0.0 {
            return Err(Error::ZeroVector {
                context: "combiner column",
                tag: k,
            });
        }
        let cross_kk = gk.dotc(&channels.forward.column(k)).norm_sqr();
        let num = alpha.alphas[k] * cross_kk * z[k];
        let mut den = noise * gk.norm_squared();
        for i in 0..m {
            if i != k {
                let cross = gk.dotc(&channels.forward.column(i)).norm_sqr();
                den += alpha.alphas[i] * cross * z[i];
            }
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Sum throughput of the relaxed matrix form: Σ_k log₂(1 + γ̄_R,k).
pub fn sum_throughput_sdr(
    channels: &ChannelSet,
    big_f: &PrecoderMatrix,
    g: &CombinerMatrix,
    alpha: &BCVector,
    noise: f64,
) -> Result<f64> {
    Ok(sinr_sdr_form(channels, big_f, g, alpha, noise)?
        .into_iter()
        .map(|s| (1.0 + s).log2())
        .sum())
}
