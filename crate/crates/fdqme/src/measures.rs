//! Non-Markovianity measures: spectral (KL divergence per unit Markovian
//! bandwidth) and the abridged BLP trace-distance backflow.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::baths::Bath;
use crate::error::{Error, Result};
use crate::fdme::{FrequencyPropagator, KernelMode};
use crate::grid::{self, trapezoid};
use crate::liouville::{c, devectorize_mat, eigenvalues, pure_state, CMat, VectorizedOperator};
use crate::redfield::Trajectory;
use crate::spectrum::Spectrum;

/// Points where both spectra fall below this fraction of their peaks are
/// dropped from the KL integral.
pub const TAIL_CUTOFF: f64 = 1e-18;

/// Tolerance on the anti-Hermitian part of a state difference.
pub const TRACE_DISTANCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureMethod {
    Spectral,
    Blp,
}

/// How the Markovian bandwidth `Ω_M` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GapMethod {
    /// Smallest nonzero `|Re λ|` of the Markovian Liouvillian.
    #[default]
    Eigen,
    /// Full width at half maximum of the Markovian spectrum.
    Fwhm,
}

impl std::str::FromStr for GapMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Self::Eigen),
            "fwhm" => Ok(Self::Fwhm),
            _ => Err(Error::InvalidParameter {
                name: "gap",
                reason: format!("expected `eigen` or `fwhm`, got `{s}`"),
            }),
        }
    }
}

impl std::fmt::Display for GapMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Eigen => "eigen",
            Self::Fwhm => "fwhm",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    pub method: MeasureMethod,
    pub metadata: BTreeMap<String, String>,
}

impl MeasureResult {
    fn new(value: f64, method: MeasureMethod) -> Self {
        Self {
            value,
            method,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

fn check_normalized(s: &Spectrum) -> Result<()> {
    if (s.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::Grid(format!("spectrum not normalized (area {})", s.norm())));
    }
    Ok(())
}

fn same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let span = (a[a.len() - 1] - a[0]).abs().max(f64::MIN_POSITIVE);
    if let Some(k) = (0..a.len()).find(|&k| (a[k] - b[k]).abs() > 1e-12 * span) {
        return Err(Error::Grid(format!("grids differ at index {k}: {} vs {}", a[k], b[k])));
    }
    Ok(())
}

/// `∫ s log₂(s / s_ref)` by the trapezoid rule on the shared grid.
pub fn kl_divergence(s: &Spectrum, s_ref: &Spectrum) -> Result<f64> {
    same_grid(s.grid(), s_ref.grid())?;
    check_normalized(s)?;
    check_normalized(s_ref)?;
    let (p, q) = (s.values(), s_ref.values());
    let cut_p = TAIL_CUTOFF * s.peak().1;
    let cut_q = TAIL_CUTOFF * s_ref.peak().1;
    let mut integrand = Vec::with_capacity(p.len());
    for (k, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a < cut_p && b < cut_q || a == 0.0 {
            integrand.push(0.0);
        } else if b <= 0.0 {
            return Err(Error::ZeroReference { at: s.grid()[k] });
        } else {
            integrand.push(a * (a / b).log2());
        }
    }
    let kl = trapezoid(s.grid(), &integrand);
    if kl < -1e-9 {
        log::warn!("negative KL divergence {kl:.3e}: grid under-resolves the spectra");
    }
    Ok(kl.max(0.0))
}

/// `N_S = D_KL(s ‖ s_m) / gap`.
pub fn spectral_measure(s: &Spectrum, s_m: &Spectrum, gap: f64) -> Result<MeasureResult> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gap",
            reason: format!("must be positive, got {gap}"),
        });
    }
    let kl = kl_divergence(s, s_m)?;
    let g = s.grid();
    Ok(MeasureResult::new(kl / gap, MeasureMethod::Spectral)
        .with("kl_bits", kl)
        .with("gap", gap)
        .with("grid_points", g.len())
        .with("grid_lo", g[0])
        .with("grid_hi", g[g.len() - 1])
        .with("tail_cutoff", TAIL_CUTOFF))
}

/// Isolated pole of the Markovian `σ₋` spectrum: `(center, half-width)` as
/// offsets from the propagator's reference frequency.
pub fn markov_line(fp: &FrequencyPropagator) -> Result<(f64, f64)> {
    let fm = fp.with_mode(KernelMode::Markov);
    let a = fm.matrix(fm.reference(), c(0.0, 0.0));
    // `a + i x` is singular at `x = i λ` for each eigenvalue `λ` of `a`.
    let poles: Vec<_> = eigenvalues(&CMat::from_fn(4, 4, |i, j| a[(i, j)]))
        .into_iter()
        .map(|l| c(0.0, 1.0) * l)
        .collect();
    poles
        .iter()
        .filter(|x| x.im.abs() > 0.0)
        .min_by(|x, y| x.re.abs().total_cmp(&y.re.abs()))
        .map(|x| (x.re, x.im.abs()))
        .ok_or(Error::NoGap)
}

/// Features of the bath spectrum as `(center, width)` pairs, offsets from the
/// qubit frequency.
fn features(bath: &Bath) -> Vec<(f64, f64)> {
    match bath {
        Bath::Thermal(p) => vec![(-p.delta(), p.kappa())],
        Bath::Squeezed(p) => {
            let b = p.bogoliubov();
            vec![
                (-b.delta_diff, p.kappa()),
                (-b.sigma_sum, p.kappa()),
                (-2.0 * p.delta_q(), p.kappa()),
            ]
        }
    }
}

/// Default frequency grid for `bath`: symmetric, at least
/// [`grid::DEFAULT_POINTS`] uniform points reaching 40κ past the outermost
/// feature, densified around the Markovian line and each bath feature.
pub fn spectral_grid(bath: &Bath) -> Result<Vec<f64>> {
    let fp = FrequencyPropagator::from_bath(bath, KernelMode::Markov);
    let (center, width) = markov_line(&fp)?;
    let feats = features(bath);
    let reach = feats.iter().map(|f| f.0.abs()).fold(center.abs(), f64::max);
    let half = reach + 40.0 * bath.kappa();
    let mut peaks = vec![(center, width)];
    peaks.extend(feats.into_iter().filter(|f| f.0.abs() < half));
    grid::peaked(half, grid::DEFAULT_POINTS + 1, &peaks)
}

/// `Ω_M` for `bath`.
pub fn spectral_gap(bath: &Bath, method: GapMethod) -> Result<f64> {
    let fp = FrequencyPropagator::from_bath(bath, KernelMode::Markov);
    match method {
        GapMethod::Eigen => fp.markov_gap(),
        GapMethod::Fwhm => {
            let (center, width) = markov_line(&fp)?;
            let g = grid::peaked(center.abs() + 200.0 * width, 4097, &[(center, width)])?;
            let ss = fp.steady_state(&pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]))?;
            fp.qubit_spectrum(&ss, &g)?.fwhm()
        }
    }
}

/// Lorentzian of the isolated Markovian line of `fp`, normalized on `grid`.
///
/// For baths whose Markovian generator couples `ρ_ge` to `ρ_eg` the
/// regression spectrum of the Markov mode carries a weak mirror feature that
/// can dip below zero; the bare line is the strictly positive reference.
pub fn markov_reference(fp: &FrequencyPropagator, grid: &[f64]) -> Result<Spectrum> {
    let (center, width) = markov_line(fp)?;
    let vals = grid
        .iter()
        .map(|&x| width / std::f64::consts::PI / ((x - center).powi(2) + width * width))
        .collect();
    Spectrum::new(grid.to_vec(), vals)?.normalized()
}

/// Normalized full spectrum and Markovian reference of `bath` on `grid`.
pub fn spectra_pair(bath: &Bath, grid: &[f64]) -> Result<(Spectrum, Spectrum)> {
    let ground = pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let full = FrequencyPropagator::from_bath(bath, KernelMode::Full);
    let s = full.qubit_spectrum(&full.steady_state(&ground)?, grid)?.normalized()?;
    Ok((s, markov_reference(&full, grid)?))
}

/// `N_S` of `bath` on its default grid.
pub fn bath_spectral_measure(bath: &Bath, gap: GapMethod) -> Result<MeasureResult> {
    let grid = spectral_grid(bath)?;
    let (s, s_m) = spectra_pair(bath, &grid)?;
    Ok(spectral_measure(&s, &s_m, spectral_gap(bath, gap)?)?
        .with("gap_method", gap)
        .with("bath", format!("{bath:?}")))
}

/// `N_S` for each bath of a sweep, in parallel.
pub fn spectral_sweep(baths: &[Bath], gap: GapMethod) -> Result<Vec<MeasureResult>> {
    baths.par_iter().map(|b| bath_spectral_measure(b, gap)).collect()
}

/// `½ Tr |ρ₁ − ρ₂|`.
pub fn trace_distance(rho1: &VectorizedOperator, rho2: &VectorizedOperator) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    let d = devectorize_mat(rho1) - devectorize_mat(rho2);
    let dev = (&d - d.adjoint()).norm();
    if dev > TRACE_DISTANCE_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let h = (&d + d.adjoint()) * c(0.5, 0.0);
    Ok(0.5 * h.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

/// Sum of the positive increments of `D_Tr(ρ₁(t), ρ₂(t))` along a shared
/// time grid.
pub fn blp_measure(traj1: &Trajectory, traj2: &Trajectory) -> Result<MeasureResult> {
    if traj1.times.len() != traj2.times.len() || traj1.states.len() != traj1.times.len() {
        return Err(Error::DimMismatch {
            expected: traj1.times.len(),
            got: traj2.times.len(),
        });
    }
    same_grid(&traj1.times, &traj2.times)?;
    let d = traj1
        .states
        .iter()
        .zip(&traj2.states)
        .map(|(a, b)| trace_distance(a, b))
        .collect::<Result<Vec<_>>>()?;
    let value = d.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum();
    let t = &traj1.times;
    Ok(MeasureResult::new(value, MeasureMethod::Blp)
        .with("time_points", t.len())
        .with("t_start", t[0])
        .with("t_end", t[t.len() - 1]))
}
