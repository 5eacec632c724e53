//! Memory kernels for a qubit coupled to an engineered cavity bath.
//!
//! Every kernel handled here is a finite sum of damped exponentials sharing the
//! cavity decay rate `κ`, so the time-domain kernel, its unilateral transform
//! `K[ω] = ∫₀^∞ e^{−iωt} K(t) dt` and the Born-Redfield integrals all come from
//! one list of [`ExpTerm`]s.

mod squeezed;
mod thermal;

pub use squeezed::{
    bath_matrices, bogoliubov_params, generic_kernel_time, squeezed_closed_spectrum,
    squeezed_closed_spectrum_without_cross_terms, squeezed_kernel_freq, squeezed_kernel_time,
    squeezed_steady_ground_population, BathMatrices, Bogoliubov, SqueezedBathParams,
};
pub use thermal::{
    markovian_spectrum, nested_lorentzian, thermal_closed_spectrum,
    thermal_closed_spectrum_frozen, thermal_kernel_freq, thermal_kernel_time, EffectiveRates,
    ThermalBathParams,
};

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::liouville::{c, C64};

pub type Mat4 = Matrix4<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelStructure {
    Thermal,
    Squeezed,
}

/// One entry `coeff · e^{(−κ + iν) t}` of the kernel matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub row: usize,
    pub col: usize,
    pub coeff: C64,
    pub freq: f64,
    /// Oscillates at the qubit-bath sum frequency in the frame of its column.
    pub sum_frequency: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelModel {
    decay: f64,
    terms: Vec<ExpTerm>,
    structure: KernelStructure,
}

impl KernelModel {
    pub fn new(decay: f64, terms: Vec<ExpTerm>, structure: KernelStructure) -> Result<Self> {
        if !(decay > 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("decay must be positive, got {decay}"),
            });
        }
        if let Some(t) = terms.iter().find(|t| t.row > 3 || t.col > 3) {
            return Err(Error::InvalidParameter {
                name: "terms",
                reason: format!("entry ({}, {}) outside a 4x4 kernel", t.row, t.col),
            });
        }
        Ok(Self {
            decay,
            terms,
            structure,
        })
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn structure(&self) -> KernelStructure {
        self.structure
    }

    /// `K(t)` for `t ≥ 0`.
    pub fn time(&self, t: f64) -> Result<Mat4> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let mut k = Mat4::zeros();
        let env = (-self.decay * t).exp();
        for term in &self.terms {
            k[(term.row, term.col)] += term.coeff * env * C64::from_polar(1.0, term.freq * t);
        }
        Ok(k)
    }

    /// `K[ω]` at `ω = base + offset`.
    ///
    /// Pole distances are formed as `(base − ν) + offset`, so a large carrier
    /// frequency in `base` never swamps a small detuning in `offset`. A complex
    /// offset evaluates the transform off the real axis (`Im ω < 0` is the
    /// convergent side).
    pub fn freq(&self, base: f64, offset: C64) -> Mat4 {
        let mut k = Mat4::zeros();
        for term in &self.terms {
            let den = c(self.decay - offset.im, (base - term.freq) + offset.re);
            k[(term.row, term.col)] += term.coeff / den;
        }
        k
    }

    /// `∫₀ᵗ K(s) e^{−𝓛_S s} ds` for a diagonal system Liouvillian
    /// `𝓛_S = i·diag(column_freqs)`; `t = None` gives the `t → ∞` limit.
    pub fn integrated(&self, column_freqs: &[f64; 4], t: Option<f64>, include_sum: bool) -> Mat4 {
        let mut k = Mat4::zeros();
        for term in self.terms.iter().filter(|x| include_sum || !x.sum_frequency) {
            let z = c(self.decay, column_freqs[term.col] - term.freq);
            let factor = match t {
                None => C64::new(1.0, 0.0),
                Some(t) => C64::new(1.0, 0.0) - (-z * t).exp(),
            };
            k[(term.row, term.col)] += term.coeff * factor / z;
        }
        k
    }

    /// Copy of the kernel with sum-frequency terms removed.
    pub fn without_sum_frequency(&self) -> Self {
        Self {
            decay: self.decay,
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|t| !t.sum_frequency)
                .collect(),
            structure: self.structure,
        }
    }

    /// Largest deviation from the structural symmetries at time `t`.
    pub fn structure_violation(&self, t: f64) -> Result<f64> {
        let k = self.time(t)?;
        let mut dev: f64 = 0.0;
        dev = dev.max((k[(2, 2)] - k[(1, 1)].conj()).norm());
        dev = dev.max((k[(0, 0)] + k[(3, 0)]).norm());
        dev = dev.max((k[(0, 3)] + k[(3, 3)]).norm());
        let allowed: &[(usize, usize)] = match self.structure {
            KernelStructure::Thermal => &[(0, 0), (0, 3), (1, 1), (2, 2), (3, 0), (3, 3)],
            KernelStructure::Squeezed => {
                dev = dev.max((k[(1, 2)] - k[(2, 1)].conj()).norm());
                &[
                    (0, 0),
                    (0, 3),
                    (1, 1),
                    (1, 2),
                    (2, 1),
                    (2, 2),
                    (3, 0),
                    (3, 3),
                ]
            }
        };
        for i in 0..4 {
            for j in 0..4 {
                if !allowed.contains(&(i, j)) {
                    dev = dev.max(k[(i, j)].norm());
                }
            }
        }
        Ok(dev)
    }
}

/// A qubit bath together with the frame it is written in.
#[derive(Clone, Debug, PartialEq)]
pub enum Bath {
    Thermal(ThermalBathParams),
    Squeezed(SqueezedBathParams),
}

impl Bath {
    pub fn kernel(&self) -> KernelModel {
        match self {
            Bath::Thermal(p) => p.kernel(),
            Bath::Squeezed(p) => p.kernel(),
        }
    }

    /// Qubit transition frequency in the working frame: `ω_q` (lab) or `Δ_q`
    /// (frame rotating at half the pump frequency).
    pub fn qubit_frequency(&self) -> f64 {
        match self {
            Bath::Thermal(p) => p.omega_q(),
            Bath::Squeezed(p) => p.delta_q(),
        }
    }

    /// Diagonal of `𝓛_S / i` in the order `(gg, ge, eg, ee)`.
    pub fn column_freqs(&self) -> [f64; 4] {
        let w = self.qubit_frequency();
        [0.0, w, -w, 0.0]
    }

    /// `𝓛⁽⁰⁾ = −i[H_S, ·]` with `H_S = −(w/2) σ_z`.
    pub fn system_liouvillian(&self) -> Mat4 {
        let f = self.column_freqs();
        Mat4::from_diagonal(&nalgebra::Vector4::new(
            c(0.0, f[0]),
            c(0.0, f[1]),
            c(0.0, f[2]),
            c(0.0, f[3]),
        ))
    }

    pub fn kappa(&self) -> f64 {
        match self {
            Bath::Thermal(p) => p.kappa(),
            Bath::Squeezed(p) => p.kappa(),
        }
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Highest interior local maximum of `f` within `center ± 5·width`, scanned
/// at spacing `width/50` and refined by golden section.
pub fn locate_side_peak(f: &dyn Fn(f64) -> f64, center: f64, width: f64) -> Option<f64> {
    let h = width / 50.0;
    let n = 500;
    let xs: Vec<f64> = (0..=n).map(|k| center - 5.0 * width + k as f64 * h).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n {
        if ys[k] > ys[k - 1] && ys[k] >= ys[k + 1] && best.map_or(true, |(_, y)| ys[k] > y) {
            best = Some((k, ys[k]));
        }
    }
    let (k, _) = best?;
    Some(golden_max(f, xs[k - 1], xs[k + 1], 1e-10 * width.max(1.0)))
}

/// Positions of all local maxima of sampled data.
pub fn local_maxima(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    (1..ys.len().saturating_sub(1))
        .filter(|&k| ys[k] > ys[k - 1] && ys[k] >= ys[k + 1])
        .map(|k| xs[k])
        .collect()
}
