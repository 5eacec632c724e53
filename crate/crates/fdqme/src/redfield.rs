//! Time-local Born–Redfield and Born–Markov master equations for a qubit, the
//! Redfield two-time correlator and its approximate spectrum.

use std::f64::consts::PI;

use nalgebra::Vector4;

use crate::baths::{Bath, Mat4, SqueezedBathParams, ThermalBathParams};
use crate::error::{Error, Result};
use crate::fdme::{from_vec4, purity, to_vec4};
use crate::liouville::{
    c, commutator_superop, lindblad_dissipator, sigma_minus, sigma_plus, squeeze_dissipator, CMat, HilbertOperator,
    VectorizedOperator, C64,
};
use crate::ode::{dopri5, OdeOptions};
use crate::spectrum::Spectrum;

type Vec4 = Vector4<C64>;

/// Thermal Redfield rates. The coherence decays at `(2N̄+1)·gamma_eff` and
/// shifts by `(2N̄+1)·delta_eff`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalRates {
    pub delta_eff: f64,
    pub gamma_eff: f64,
}

/// Squeezed Redfield rates: dissipators `γ₋₊𝓓[σ₋] + γ₊₋𝓓[σ₊]`, squeezing
/// terms `γ₋₋𝓢[σ₋] + γ₊₊𝓢[σ₊]` and the shift
/// `−i[δ₊₋σ₊σ₋ − δ₋₊σ₋σ₊, ·]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedRates {
    pub gamma_mp: f64,
    pub gamma_pm: f64,
    pub gamma_pp: C64,
    pub gamma_mm: C64,
    pub delta_pm: f64,
    pub delta_mp: f64,
}

/// `(1 − e^{−zt})/z`, with `t = ∞` giving `1/z`.
fn ramp(z: C64, t: f64) -> C64 {
    if t.is_infinite() {
        C64::new(1.0, 0.0) / z
    } else {
        (C64::new(1.0, 0.0) - (-z * t).exp()) / z
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Rates at time `t`; `t = f64::INFINITY` gives the Markov limit.
pub fn br_rates_thermal(p: &ThermalBathParams, t: f64) -> Result<ThermalRates> {
    check_time(t)?;
    let x = ramp(c(p.kappa(), p.delta()), t) * (p.g() * p.g());
    Ok(ThermalRates {
        delta_eff: -x.im,
        gamma_eff: x.re,
    })
}

pub fn br_rates_squeezed(p: &SqueezedBathParams, t: f64, include_sum: bool) -> Result<SqueezedRates> {
    check_time(t)?;
    let b = p.bogoliubov();
    let (g1, g2, n, m) = (b.g1, b.g2, b.nbar, b.mbar);
    let mc = m.conj();
    let gg = g1 * g2;
    let n2 = 2.0 * n + 1.0;
    let x = ramp(c(p.kappa(), b.delta_diff), t);
    let y = if include_sum {
        ramp(c(p.kappa(), b.sigma_sum), t)
    } else {
        c(0.0, 0.0)
    };
    let down = ((n + 1.0) * g1 * g1 + gg * mc) * x + (n * g2 * g2 + gg * m) * y;
    let up = (n * g1 * g1 + gg * mc) * x + ((n + 1.0) * g2 * g2 + gg * m) * y;
    let gamma_pp = ((2.0 * g2 * g2 * mc + gg * n2) * x + (2.0 * g1 * g1 * m + gg * n2) * y) * 0.5;
    Ok(SqueezedRates {
        gamma_mp: down.re,
        gamma_pm: up.re,
        gamma_pp,
        gamma_mm: gamma_pp.conj(),
        delta_pm: -down.im,
        delta_mp: -up.im,
    })
}

/// `𝓛⁽²⁾_BR(t) = ∫₀ᵗ 𝓚(s) e^{−𝓛_S s} ds` from the kernel; `t = ∞` gives the
/// Born–Markov generator.
pub fn br_generator(bath: &Bath, t: f64, include_sum: bool) -> Result<Mat4> {
    check_time(t)?;
    let t = if t.is_infinite() { None } else { Some(t) };
    Ok(bath.kernel().integrated(&bath.column_freqs(), t, include_sum))
}

fn to_mat4(m: &CMat) -> Mat4 {
    Mat4::from_fn(|i, j| m[(i, j)])
}

/// The same generator assembled from rates, commutators and dissipators.
pub fn br_generator_from_rates(bath: &Bath, t: f64, include_sum: bool) -> Result<Mat4> {
    let sp = HilbertOperator::new(sigma_plus())?;
    let sm = HilbertOperator::new(sigma_minus())?;
    let pe = sigma_plus() * sigma_minus();
    let pg = sigma_minus() * sigma_plus();
    let d_minus = to_mat4(lindblad_dissipator(&sm).mat());
    let d_plus = to_mat4(lindblad_dissipator(&sp).mat());
    let shift = |a: f64, b: f64| -> Result<Mat4> {
        let h = HilbertOperator::hermitian(&pe * c(a, 0.0) - &pg * c(b, 0.0))?;
        Ok(to_mat4(commutator_superop(&h).mat()))
    };
    match bath {
        Bath::Thermal(p) => {
            let r = br_rates_thermal(p, t)?;
            let n = p.nbar();
            Ok(shift(r.delta_eff * (n + 1.0), r.delta_eff * n)?
                + (d_minus * c((n + 1.0) * r.gamma_eff, 0.0) + d_plus * c(n * r.gamma_eff, 0.0)))
        }
        Bath::Squeezed(p) => {
            let r = br_rates_squeezed(p, t, include_sum)?;
            let s_minus = to_mat4(squeeze_dissipator(&sm).mat());
            let s_plus = to_mat4(squeeze_dissipator(&sp).mat());
            Ok(shift(r.delta_pm, r.delta_mp)?
                + d_minus * c(r.gamma_mp, 0.0)
                + d_plus * c(r.gamma_pm, 0.0)
                + s_minus * r.gamma_mm
                + s_plus * r.gamma_pp)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VectorizedOperator>,
}

impl Trajectory {
    pub fn purities(&self) -> Vec<f64> {
        self.states.iter().map(purity).collect()
    }

    /// Largest `|Tr ρ − 1|` along the trajectory.
    pub fn max_trace_error(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.trace() - c(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RedfieldOptions {
    pub include_sum_frequency: bool,
    pub ode: OdeOptions,
}

impl Default for RedfieldOptions {
    fn default() -> Self {
        Self {
            include_sum_frequency: false,
            ode: OdeOptions::default(),
        }
    }
}

/// Integrates `ρ̇ = (𝓛_S + 𝓛⁽²⁾(t))ρ` in the interaction frame of `𝓛_S`;
/// `frozen` evaluates the generator at `t = ∞` throughout.
fn evolve(bath: &Bath, rho0: &VectorizedOperator, t_grid: &[f64], opts: &RedfieldOptions, frozen: bool) -> Result<Trajectory> {
    let r0 = to_vec4(rho0)?;
    if let Some(&t) = t_grid.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::NegativeTime(t));
    }
    let f = bath.column_freqs();
    let kernel = bath.kernel();
    let include = opts.include_sum_frequency;
    let markov = kernel.integrated(&f, None, include);
    let mut y0 = vec![0.0; 8];
    for j in 0..4 {
        y0[2 * j] = r0[j].re;
        y0[2 * j + 1] = r0[j].im;
    }
    // Start at t = 0 so the generator history is right even if the grid does not.
    let mut grid = Vec::with_capacity(t_grid.len() + 1);
    let prepend = t_grid.first().map_or(true, |&t| t > 0.0);
    if prepend {
        grid.push(0.0);
    }
    grid.extend_from_slice(t_grid);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let l = if frozen { markov } else { kernel.integrated(&f, Some(t), include) };
        for i in 0..4 {
            let mut s = c(0.0, 0.0);
            for j in 0..4 {
                let lij = l[(i, j)];
                if lij != c(0.0, 0.0) {
                    s += lij * C64::from_polar(1.0, (f[j] - f[i]) * t) * c(y[2 * j], y[2 * j + 1]);
                }
            }
            dy[2 * i] = s.re;
            dy[2 * i + 1] = s.im;
        }
    };
    let ys = dopri5(rhs, &y0, &grid, &opts.ode)?;
    let skip = usize::from(prepend);
    let states = ys
        .iter()
        .skip(skip)
        .zip(t_grid)
        .map(|(y, &t)| from_vec4(Vec4::from_fn(|j, _| c(y[2 * j], y[2 * j + 1]) * C64::from_polar(1.0, f[j] * t))))
        .collect::<Result<_>>()?;
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
    })
}

pub fn br_evolve(bath: &Bath, rho0: &VectorizedOperator, t_grid: &[f64], opts: &RedfieldOptions) -> Result<Trajectory> {
    evolve(bath, rho0, t_grid, opts, false)
}

pub fn bm_evolve(bath: &Bath, rho0: &VectorizedOperator, t_grid: &[f64], opts: &RedfieldOptions) -> Result<Trajectory> {
    evolve(bath, rho0, t_grid, opts, true)
}

/// `⟨σ₊(t+τ)σ₋(t)⟩ / ⟨σ₊σ₋⟩` in the Redfield steady state.
pub fn br_correlator(p: &ThermalBathParams, tau_grid: &[f64]) -> Result<Vec<C64>> {
    let z = c(p.kappa(), p.delta());
    let a = (2.0 * p.nbar() + 1.0) * p.g() * p.g();
    tau_grid
        .iter()
        .map(|&tau| {
            check_time(tau)?;
            let e = c(0.0, p.omega_q() * tau) - a * tau / z + a * (c(1.0, 0.0) - (-z * tau).exp()) / (z * z);
            Ok(e.exp())
        })
        .collect()
}

/// First-order expansion of the transformed correlator at `δ = ω − ω_q`:
/// central Lorentzian, side Lorentzian and Fano term.
pub fn br_spectrum_value(p: &ThermalBathParams, delta: f64) -> f64 {
    let r = p.effective_rates();
    let (de, ge) = (r.delta_eff, r.gamma_eff);
    let (d, k) = (p.delta(), p.kappa());
    let dk = d * d + k * k;
    let x = delta - de + d;
    let w = ge + k;
    let side = x * x + w * w;
    (ge / ((delta - de).powi(2) + ge * ge) + (de * d - ge * k) / dk * w / side
        + 2.0 * (de * d * ge * k).sqrt() / dk * x / side)
        / PI
}

/// The truncated expansion dips slightly below zero beside the side peak;
/// those values are clipped and the dip is logged.
pub fn br_spectrum(p: &ThermalBathParams, delta_grid: &[f64]) -> Result<Spectrum> {
    let (s, dip) = Spectrum::clipped(delta_grid.to_vec(), delta_grid.iter().map(|&d| br_spectrum_value(p, d)).collect())?;
    if dip < 0.0 {
        log::warn!("first-order Redfield spectrum clipped (min {dip:.3e} of peak)");
    }
    Ok(s)
}

/// Transform of the full correlator, without the first-order expansion:
/// `e^{b(1−e^{−zτ})} = e^b Σₙ (−b)ⁿ e^{−nzτ}/n!` is transformed term by term.
pub fn br_spectrum_exact_value(p: &ThermalBathParams, delta: f64) -> f64 {
    let z = c(p.kappa(), p.delta());
    let a = (2.0 * p.nbar() + 1.0) * p.g() * p.g();
    let rate = a / z;
    let b = a / (z * z);
    let mut coef = b.exp();
    let mut sum = c(0.0, 0.0);
    for n in 0..200 {
        let term = coef / (rate + z * n as f64 + c(0.0, delta));
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
        coef *= -b / (n as f64 + 1.0);
    }
    sum.re / PI
}

pub fn br_spectrum_exact(p: &ThermalBathParams, delta_grid: &[f64]) -> Result<Spectrum> {
    Spectrum::new(delta_grid.to_vec(), delta_grid.iter().map(|&d| br_spectrum_exact_value(p, d)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityReport {
    /// `max_t Tr ρ² − 1`; positive values flag a negative eigenvalue.
    pub max_excess: f64,
    /// First sampled time with `Tr ρ² > 1 + threshold`.
    pub first_crossing: Option<f64>,
    pub purities: Vec<f64>,
}

pub fn purity_report(traj: &Trajectory, threshold: f64) -> PurityReport {
    let purities = traj.purities();
    let max_excess = purities.iter().fold(f64::NEG_INFINITY, |m, &p| m.max(p - 1.0));
    let first_crossing = traj
        .times
        .iter()
        .zip(&purities)
        .find(|(_, &p)| p > 1.0 + threshold)
        .map(|(&t, _)| t);
    PurityReport {
        max_excess,
        first_crossing,
        purities,
    }
}
