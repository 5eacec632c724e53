use std::f64::consts::PI;

use super::{ExpTerm, KernelModel, KernelStructure, Mat4};
use crate::error::{Error, Result};
use crate::liouville::c;

/// Qubit coupled to a cavity held in a thermal state with occupation `N̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalBathParams {
    g: f64,
    omega_q: f64,
    delta: f64,
    kappa: f64,
    nbar: f64,
}

impl ThermalBathParams {
    pub fn new(g: f64, omega_q: f64, omega_c: f64, kappa: f64, nbar: f64) -> Result<Self> {
        Self::with_detuning(g, omega_q, omega_q - omega_c, kappa, nbar)
    }

    /// Same as [`ThermalBathParams::new`] with the detuning `Δ = ω_q − ω_c` given directly.
    pub fn with_detuning(g: f64, omega_q: f64, delta: f64, kappa: f64, nbar: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: format!("must be positive, got {g}"),
            });
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be positive, got {kappa}"),
            });
        }
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: format!("must be non-negative, got {nbar}"),
            });
        }
        if !omega_q.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega_q",
                reason: "frequencies must be finite".into(),
            });
        }
        Ok(Self {
            g,
            omega_q,
            delta,
            kappa,
            nbar,
        })
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn omega_q(&self) -> f64 {
        self.omega_q
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_q - self.delta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn kernel(&self) -> KernelModel {
        let g2 = self.g * self.g;
        let n = self.nbar;
        let d = self.delta;
        let wc = self.omega_c();
        let mut terms = Vec::with_capacity(10);
        let mut push = |row, col, coeff: f64, freq| {
            terms.push(ExpTerm {
                row,
                col,
                coeff: c(coeff, 0.0),
                freq,
                sum_frequency: false,
            })
        };
        for nu in [d, -d] {
            push(0, 0, -n * g2, nu);
            push(3, 0, n * g2, nu);
            push(3, 3, -(n + 1.0) * g2, nu);
            push(0, 3, (n + 1.0) * g2, nu);
        }
        push(1, 1, -(2.0 * n + 1.0) * g2, wc);
        push(2, 2, -(2.0 * n + 1.0) * g2, -wc);
        KernelModel::new(self.kappa, terms, KernelStructure::Thermal)
            .expect("validated parameters give a valid kernel")
    }

    /// Markovian Lamb shift and decay rate, `K₂₂[0] = −γ_eff + iδ_eff`.
    pub fn effective_rates(&self) -> EffectiveRates {
        let s = (2.0 * self.nbar + 1.0) * self.g * self.g / (self.delta.powi(2) + self.kappa.powi(2));
        EffectiveRates {
            delta_eff: s * self.delta,
            gamma_eff: s * self.kappa,
        }
    }
}

/// Constant Lamb shift and decay rate of a Markovian emitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveRates {
    pub delta_eff: f64,
    pub gamma_eff: f64,
}

pub fn thermal_kernel_time(p: &ThermalBathParams, t: f64) -> Result<Mat4> {
    p.kernel().time(t)
}

/// Kernel at `ω = ω_q + δ`.
pub fn thermal_kernel_freq(p: &ThermalBathParams, delta: f64) -> Mat4 {
    p.kernel().freq(p.omega_q(), c(delta, 0.0))
}

/// `(1/π)(−Re k) / ((δ − Im k)² + (Re k)²)`.
pub fn nested_lorentzian(k22: num_complex::Complex64, delta: f64) -> f64 {
    -k22.re / PI / ((delta - k22.im).powi(2) + k22.re * k22.re)
}

/// Normalized thermal emission spectrum with the frequency-dependent `K₂₂[δ]`.
pub fn thermal_closed_spectrum(p: &ThermalBathParams, delta: f64) -> f64 {
    nested_lorentzian(thermal_kernel_freq(p, delta)[(1, 1)], delta)
}

/// The same nested form with the kernel frozen at `δ = 0`.
pub fn thermal_closed_spectrum_frozen(p: &ThermalBathParams, delta: f64) -> f64 {
    nested_lorentzian(thermal_kernel_freq(p, 0.0)[(1, 1)], delta)
}

/// Lorentzian `(1/π) γ / ((δ − δ_eff)² + γ²)`.
pub fn markovian_spectrum(rates: &EffectiveRates, delta: f64) -> Result<f64> {
    let g = rates.gamma_eff;
    if !(g > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma_eff",
            reason: format!("must be positive, got {g}"),
        });
    }
    Ok(g / PI / ((delta - rates.delta_eff).powi(2) + g * g))
}
