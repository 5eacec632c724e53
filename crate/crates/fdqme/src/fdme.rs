//! Frequency-domain master equation for a qubit:
//! `U[ω] = (iω − 𝓛⁽⁰⁾ − 𝓚[ω])⁻¹`, steady states by the final value theorem,
//! steady-state spectra and numerical inversion back to the time domain.

use std::f64::consts::PI;

use nalgebra::Vector4;
use rayon::prelude::*;

use crate::baths::{Bath, KernelModel, Mat4};
use crate::error::{Error, Result};
use crate::liouville::{c, devectorize_mat, vectorize, CMat, CVec, HilbertOperator, VectorizedOperator, C64};
pub use crate::spectrum::Spectrum;

type Vec4 = Vector4<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Rotating at a drive frequency (half the pump for the squeezed bath).
    Rotating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMode {
    /// Frequency-dependent kernel.
    Full,
    /// Kernel frozen at the frequency of the element it acts on, so `U` is the
    /// resolvent of a constant Liouvillian.
    Markov,
}

/// Propagator of a qubit whose free Liouvillian is diagonal,
/// `𝓛⁽⁰⁾ = i·diag(f)` in the `(gg, ge, eg, ee)` basis.
#[derive(Clone, Debug)]
pub struct FrequencyPropagator {
    freqs: [f64; 4],
    kernel: KernelModel,
    mode: KernelMode,
    frame: Frame,
    reference: f64,
    markov: Mat4,
}

impl FrequencyPropagator {
    /// `freqs` is the diagonal of `𝓛⁽⁰⁾/i`; `reference` is the frequency that
    /// spectral grid offsets are measured from.
    pub fn new(freqs: [f64; 4], kernel: KernelModel, mode: KernelMode, frame: Frame, reference: f64) -> Self {
        let mut markov = Mat4::zeros();
        for j in 0..4 {
            let col = kernel.freq(freqs[j], c(0.0, 0.0));
            for i in 0..4 {
                markov[(i, j)] = col[(i, j)];
            }
        }
        Self {
            freqs,
            kernel,
            mode,
            frame,
            reference,
            markov,
        }
    }

    pub fn from_bath(bath: &Bath, mode: KernelMode) -> Self {
        let frame = match bath {
            Bath::Thermal(_) => Frame::Lab,
            Bath::Squeezed(_) => Frame::Rotating,
        };
        Self::new(bath.column_freqs(), bath.kernel(), mode, frame, bath.qubit_frequency())
    }

    pub fn with_mode(&self, mode: KernelMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    pub fn l0(&self) -> Mat4 {
        Mat4::from_diagonal(&Vec4::from_fn(|j, _| c(0.0, self.freqs[j])))
    }

    /// Constant generator `𝓛⁽⁰⁾ + 𝓚_M` of the Markov mode.
    pub fn markov_generator(&self) -> Mat4 {
        self.l0() + self.markov
    }

    /// `iω − 𝓛⁽⁰⁾ − 𝓚[ω]` at `ω = base + offset`.
    pub fn matrix(&self, base: f64, offset: C64) -> Mat4 {
        let k = match self.mode {
            KernelMode::Full => self.kernel.freq(base, offset),
            KernelMode::Markov => self.markov,
        };
        let mut m = -k;
        for j in 0..4 {
            m[(j, j)] += c(0.0, base - self.freqs[j]) + c(0.0, 1.0) * offset;
        }
        m
    }

    /// `U[ω]` at `ω = base + offset`.
    pub fn propagate_at(&self, base: f64, offset: C64) -> Result<Mat4> {
        let omega = base + offset.re;
        let u = self
            .matrix(base, offset)
            .try_inverse()
            .ok_or(Error::Singular { omega })?;
        if u.iter().any(|z| !z.is_finite()) {
            return Err(Error::Singular { omega });
        }
        Ok(u)
    }

    pub fn propagate(&self, omega: f64) -> Result<Mat4> {
        self.propagate_at(omega, c(0.0, 0.0))
    }

    /// Frobenius norm of `M(ω)·U(ω) − I`.
    pub fn residual(&self, omega: f64) -> Result<f64> {
        let u = self.propagate(omega)?;
        Ok((self.matrix(omega, c(0.0, 0.0)) * u - Mat4::identity()).norm())
    }

    fn solve(&self, base: f64, offset: C64, rhs: &Vec4) -> Result<Vec4> {
        let m = self.matrix(base, offset);
        let singular = Error::Singular {
            omega: base + offset.re,
        };
        if let Some(x) = m.lu().solve(rhs).filter(|x| x.iter().all(|z| z.is_finite())) {
            return Ok(x);
        }
        // On a pole of one decoupled block, the others can still be solved
        // when the right-hand side does not touch the singular block.
        let mut x = Vec4::zeros();
        for block in blocks(&m) {
            if block.iter().all(|&i| rhs[i] == c(0.0, 0.0)) {
                continue;
            }
            let n = block.len();
            let sub = CMat::from_fn(n, n, |i, j| m[(block[i], block[j])]);
            let r = CVec::from_fn(n, |i, _| rhs[block[i]]);
            let y = sub
                .lu()
                .solve(&r)
                .filter(|y| y.iter().all(|z| z.is_finite()))
                .ok_or(singular.clone())?;
            for (k, &i) in block.iter().enumerate() {
                x[i] = y[k];
            }
        }
        Ok(x)
    }

    /// Smallest nonzero `|Re λ|` of the Markov generator.
    pub fn markov_gap(&self) -> Result<f64> {
        markov_gap_of(&self.markov_generator())
    }

    /// `lim_{ω→0} iω·U[ω]·ρ₀` by Richardson extrapolation of samples at
    /// `ω ∈ {10⁻³, 10⁻⁴, 10⁻⁵}` times the Markov gap.
    pub fn steady_state(&self, rho0: &VectorizedOperator) -> Result<VectorizedOperator> {
        let r0 = to_vec4(rho0)?;
        let gap = self.markov_gap()?;
        let hs = [1e-3 * gap, 1e-4 * gap, 1e-5 * gap];
        let mut fs = Vec::with_capacity(3);
        for &h in &hs {
            fs.push(self.solve(0.0, c(h, 0.0), &r0)? * c(0.0, h));
        }
        // Neville to h = 0.
        let lin = |a: usize, b: usize| (fs[b] * c(hs[a], 0.0) - fs[a] * c(hs[b], 0.0)) / c(hs[a] - hs[b], 0.0);
        let p01 = lin(0, 1);
        let p12 = lin(1, 2);
        let p012 = (p12 * c(hs[0], 0.0) - p01 * c(hs[2], 0.0)) / c(hs[0] - hs[2], 0.0);
        let spread = (p012 - p12).norm();
        if !(spread < 1e-7) {
            return Err(Error::NonConvergentLimit { spread });
        }
        VectorizedOperator::from_vec(2, CVec::from_iterator(4, p012.iter().copied()))
    }

    /// `⟨⟨O|U[ω]|O·ρ_ss⟩⟩` at `ω = reference + x` for each `x` of `grid`.
    pub fn correlator_transform(
        &self,
        o: &HilbertOperator,
        rho_ss: &VectorizedOperator,
        grid: &[f64],
    ) -> Result<Vec<C64>> {
        if o.dim() != 2 {
            return Err(Error::DimMismatch {
                expected: 2,
                got: o.dim(),
            });
        }
        let rho = devectorize_mat(rho_ss);
        let left = to_vec4(&vectorize(o))?;
        let right = to_vec4(&crate::liouville::vectorize_mat(&(o.mat() * rho)))?;
        grid.par_iter()
            .map(|&x| {
                let u = self.solve(self.reference, c(x, 0.0), &right)?;
                Ok(left.dotc(&u))
            })
            .collect()
    }

    /// `S[ω] = 2 Re ⟨⟨O|U[ω]|O·ρ_ss⟩⟩` on offsets from the reference
    /// frequency; not normalized.
    pub fn emission_spectrum(
        &self,
        o: &HilbertOperator,
        rho_ss: &VectorizedOperator,
        grid: &[f64],
    ) -> Result<Spectrum> {
        crate::grid::validate(grid)?;
        let vals = self
            .correlator_transform(o, rho_ss, grid)?
            .into_iter()
            .map(|z| 2.0 * z.re)
            .collect();
        Spectrum::new(grid.to_vec(), vals)
    }

    /// `σ₋` emission spectrum scaled by `1/(2π ρ_ee)`, the normalization of
    /// the closed-form expressions.
    pub fn qubit_spectrum(&self, rho_ss: &VectorizedOperator, grid: &[f64]) -> Result<Spectrum> {
        let sm = HilbertOperator::new(crate::liouville::sigma_minus())?;
        let ree = rho_ss.vec()[3].re;
        if ree < -ZERO_EXCITATION {
            return Err(Error::InvalidParameter {
                name: "rho_ss",
                reason: format!("negative excited population {ree}"),
            });
        }
        if ree > ZERO_EXCITATION {
            return Ok(self.emission_spectrum(&sm, rho_ss, grid)?.scaled(1.0 / (2.0 * PI * ree)));
        }
        // Zero-temperature limit: `σ₋ρ_ss/ρ_ee → |g⟩⟨e|`.
        let excited = crate::liouville::pure_state(&[c(0.0, 0.0), c(1.0, 0.0)]);
        Ok(self.emission_spectrum(&sm, &excited, grid)?.scaled(1.0 / (2.0 * PI)))
    }

    /// `ρ(t)` by Fourier-series inversion of the Laplace-domain solution.
    ///
    /// The free evolution `e^{𝓛⁽⁰⁾t}ρ₀` is handled exactly; only the remainder
    /// `R(s) = (s − 𝓛⁽⁰⁾ − 𝓚(s))⁻¹ρ₀ − (s − 𝓛⁽⁰⁾)⁻¹ρ₀` is summed, on the line
    /// `Re s = a` with period `P = 4·T`. The number of terms doubles until
    /// successive partial sums agree within `INVERSE_TOL`.
    pub fn inverse_transform(&self, rho0: &VectorizedOperator, t_grid: &[f64]) -> Result<Vec<VectorizedOperator>> {
        let r0 = to_vec4(rho0)?;
        if let Some(&t) = t_grid.iter().find(|t| !(**t >= 0.0)) {
            return Err(Error::NegativeTime(t));
        }
        let t_max = t_grid.iter().fold(0.0f64, |m, &t| m.max(t));
        let free = |t: f64| Vec4::from_fn(|j, _| r0[j] * C64::from_polar(1.0, self.freqs[j] * t));
        if t_max == 0.0 {
            return t_grid.iter().map(|&t| from_vec4(free(t))).collect();
        }
        let period = 4.0 * t_max;
        let a = 28.0 / period;
        let dy = 2.0 * PI / period;
        let remainder = |y: f64| -> Result<Vec4> {
            // s = a + iy  ⇔  ω = y − ia.
            let u = self.solve(0.0, c(y, -a), &r0)?;
            let s = c(a, y);
            Ok(u - Vec4::from_fn(|j, _| r0[j] / (s - c(0.0, self.freqs[j]))))
        };
        let nt = t_grid.len();
        let mut sums: Vec<Vec4> = vec![remainder(0.0)?; nt];
        let mut k_done = 0usize;
        let mut k_target = 256usize;
        let mut prev: Option<Vec<Vec4>> = None;
        loop {
            let block: Vec<(f64, Vec4, Vec4)> = (k_done + 1..=k_target)
                .into_par_iter()
                .map(|k| {
                    let y = k as f64 * dy;
                    Ok((y, remainder(y)?, remainder(-y)?))
                })
                .collect::<Result<_>>()?;
            sums.par_iter_mut().zip(t_grid.par_iter()).for_each(|(acc, &t)| {
                for (y, rp, rm) in &block {
                    let ph = C64::from_polar(1.0, y * t);
                    *acc += rp * ph + rm * ph.conj();
                }
            });
            k_done = k_target;
            let current: Vec<Vec4> = sums
                .iter()
                .zip(t_grid)
                .map(|(s, &t)| s * c((a * t).exp() / period, 0.0))
                .collect();
            if let Some(p) = &prev {
                let est = current
                    .iter()
                    .zip(p)
                    .map(|(x, y)| (x - y).camax())
                    .fold(0.0f64, f64::max);
                log::debug!("inverse transform: {k_done} terms, change {est:.3e}");
                if est < INVERSE_TOL {
                    return current
                        .into_iter()
                        .zip(t_grid)
                        .map(|(r, &t)| from_vec4(r + free(t)))
                        .collect();
                }
                if k_done >= INVERSE_MAX_TERMS {
                    return Err(Error::AccuracyBudget {
                        estimate: est,
                        tolerance: INVERSE_TOL,
                        t_max,
                    });
                }
            }
            prev = Some(current);
            k_target *= 2;
        }
    }
}

/// Connected components of the coupling graph of `m`.
fn blocks(m: &Mat4) -> Vec<Vec<usize>> {
    let mut label = [usize::MAX; 4];
    let mut out = Vec::new();
    for start in 0..4 {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..4 {
                if label[j] == usize::MAX && (m[(i, j)] != c(0.0, 0.0) || m[(j, i)] != c(0.0, 0.0)) {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

pub const INVERSE_TOL: f64 = 1e-6;
/// Excited populations below this are treated as exactly zero.
pub const ZERO_EXCITATION: f64 = 1e-14;
pub const INVERSE_MAX_TERMS: usize = 1 << 21;

pub(crate) fn markov_gap_of(l: &Mat4) -> Result<f64> {
    let ev = crate::liouville::eigenvalues(&CMat::from_fn(4, 4, |i, j| l[(i, j)]));
    let scale = l.norm().max(f64::MIN_POSITIVE);
    ev.iter()
        .map(|z| z.re.abs())
        .filter(|&r| r > 1e-13 * scale)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))))
        .ok_or(Error::NoGap)
}

pub(crate) fn to_vec4(v: &VectorizedOperator) -> Result<Vec4> {
    if v.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            got: v.dim(),
        });
    }
    Ok(Vec4::from_iterator(v.vec().iter().copied()))
}

pub(crate) fn from_vec4(v: Vec4) -> Result<VectorizedOperator> {
    VectorizedOperator::from_vec(2, CVec::from_iterator(4, v.iter().copied()))
}

/// `Tr ρ²`.
pub fn purity(rho: &VectorizedOperator) -> f64 {
    let m = devectorize_mat(rho);
    (&m * &m).trace().re
}

/// Thermal steady state `((N̄+1)/(2N̄+1), 0, 0, N̄/(2N̄+1))`.
pub fn thermal_steady_state(nbar: f64) -> VectorizedOperator {
    let d = 2.0 * nbar + 1.0;
    from_vec4(Vec4::new(c((nbar + 1.0) / d, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(nbar / d, 0.0)))
        .expect("qubit dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::{KernelStructure, ThermalBathParams};
    use crate::liouville::pure_state;

    fn empty_kernel() -> KernelModel {
        KernelModel::new(1.0, vec![], KernelStructure::Thermal).unwrap()
    }

    #[test]
    fn scalar_resolvent() {
        let fp = FrequencyPropagator::new([0.0; 4], empty_kernel(), KernelMode::Full, Frame::Lab, 0.0);
        let u = fp.propagate(2.5).unwrap();
        assert!((u - Mat4::identity() / c(0.0, 2.5)).norm() < 1e-15);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&pure_state(&[c(0.6, 0.0), c(0.0, 0.8)])) - 1.0).abs() < 1e-15);
        let mixed = from_vec4(Vec4::new(c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0))).unwrap();
        assert!((purity(&mixed) - 0.5).abs() < 1e-15);
        assert!((purity(&thermal_steady_state(0.1)) - 122.0 / 144.0).abs() < 1e-15);
    }

    #[test]
    fn free_evolution_needs_no_terms() {
        let fp = FrequencyPropagator::new([0.0, 3.0, -3.0, 0.0], empty_kernel(), KernelMode::Full, Frame::Lab, 3.0);
        let s = 0.5f64.sqrt();
        let rho0 = pure_state(&[c(s, 0.0), c(s, 0.0)]);
        let ts = [0.0, 0.4, 1.7];
        let out = fp.inverse_transform(&rho0, &ts).unwrap();
        for (r, t) in out.iter().zip(ts) {
            assert!((r.vec()[1] - C64::from_polar(0.5, 3.0 * t)).norm() < 1e-12);
        }
    }

    #[test]
    fn markov_gap_is_coherence_decay_on_resonance() {
        let p = ThermalBathParams::with_detuning(1.0, 20.0, 0.0, 10.0, 0.1).unwrap();
        let fp = FrequencyPropagator::from_bath(&Bath::Thermal(p), KernelMode::Full);
        let gap = fp.markov_gap().unwrap();
        assert!((gap - 1.2 / 10.0).abs() < 1e-12);
    }
}
