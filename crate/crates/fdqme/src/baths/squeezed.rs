use std::f64::consts::PI;

use nalgebra::Matrix4;

use super::{ExpTerm, KernelModel, KernelStructure, Mat4};
use crate::error::{Error, Result};
use crate::liouville::{c, sigma_minus, sigma_plus, spost, spre, CMat, C64};

/// Qubit coupled to a two-photon-driven (squeezed) lossy cavity, written in
/// the frame rotating at half the pump frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedBathParams {
    g: f64,
    delta_q: f64,
    delta_c: f64,
    r: f64,
    kappa: f64,
    bogo: Bogoliubov,
}

/// Derived quantities of the Bogoliubov transformation that diagonalizes the
/// driven cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bogoliubov {
    pub zeta: f64,
    /// Effective cavity frequency `Δ̃_c = √(Δ_c² − r²)`.
    pub delta_c_eff: f64,
    pub g1: f64,
    pub g2: f64,
    /// `⟨ã†ã⟩` in the cavity steady state.
    pub nbar: f64,
    /// `⟨ã²⟩` in the cavity steady state.
    pub mbar: C64,
    /// `Δ̃ = Δ_q − Δ̃_c`.
    pub delta_diff: f64,
    /// `Σ̃ = Δ_q + Δ̃_c`.
    pub sigma_sum: f64,
}

impl SqueezedBathParams {
    pub fn new(g: f64, delta_q: f64, delta_c: f64, r: f64, kappa: f64) -> Result<Self> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(g > 0.0 && g.is_finite()) {
            return bad("g", format!("must be positive, got {g}"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return bad("kappa", format!("must be positive, got {kappa}"));
        }
        if !delta_q.is_finite() {
            return bad("delta_q", "must be finite".into());
        }
        if !(delta_c > 0.0 && delta_c.is_finite()) {
            return bad("delta_c", format!("must be positive, got {delta_c}"));
        }
        if !(r >= 0.0) {
            return bad("r", format!("must be non-negative, got {r}"));
        }
        if r >= delta_c.abs() {
            return bad(
                "r",
                format!("squeezing requires r < |delta_c| (r = {r}, delta_c = {delta_c})"),
            );
        }
        let zeta = 0.5 * (r / delta_c).atanh();
        let dce = (delta_c * delta_c - r * r).sqrt();
        let bogo = Bogoliubov {
            zeta,
            delta_c_eff: dce,
            g1: g * zeta.cosh(),
            g2: -g * zeta.sinh(),
            nbar: zeta.sinh().powi(2),
            mbar: c(kappa * (2.0 * zeta).sinh() / 2.0, 0.0) / c(kappa, dce),
            delta_diff: delta_q - dce,
            sigma_sum: delta_q + dce,
        };
        Ok(Self {
            g,
            delta_q,
            delta_c,
            r,
            kappa,
            bogo,
        })
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn delta_q(&self) -> f64 {
        self.delta_q
    }
    pub fn delta_c(&self) -> f64 {
        self.delta_c
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn bogoliubov(&self) -> &Bogoliubov {
        &self.bogo
    }

    pub fn kernel(&self) -> KernelModel {
        let b = &self.bogo;
        let (g1, g2, n, m) = (b.g1, b.g2, b.nbar, b.mbar);
        let mc = m.conj();
        let (w, dd, ss) = (b.delta_c_eff, b.delta_diff, b.sigma_sum);
        let gg = g1 * g2;
        let n1 = n + 1.0;
        let n2 = 2.0 * n + 1.0;
        let mut terms = Vec::with_capacity(24);
        let mut push = |row, col, coeff: C64, freq, sum_frequency| {
            terms.push(ExpTerm {
                row,
                col,
                coeff,
                freq,
                sum_frequency,
            })
        };
        let pop = [
            (dd, gg * m, false),
            (-dd, gg * mc, false),
            (-ss, gg * m, true),
            (ss, gg * mc, true),
        ];
        for (nu, cross, sum) in pop {
            let (w11, w44) = if sum {
                (n1 * g2 * g2, n * g2 * g2)
            } else {
                (n * g1 * g1, n1 * g1 * g1)
            };
            let k11 = -(cross + w11);
            let k44 = -(cross + w44);
            push(0, 0, k11, nu, sum);
            push(3, 0, -k11, nu, sum);
            push(3, 3, k44, nu, sum);
            push(0, 3, -k44, nu, sum);
        }
        push(1, 1, -(2.0 * gg * mc + n2 * g1 * g1), w, false);
        push(1, 1, -(2.0 * gg * m + n2 * g2 * g2), -w, true);
        push(2, 2, -(2.0 * gg * m + n2 * g1 * g1), -w, false);
        push(2, 2, -(2.0 * gg * mc + n2 * g2 * g2), w, true);
        push(2, 1, 2.0 * g1 * g1 * m + gg * n2, -w, true);
        push(2, 1, 2.0 * g2 * g2 * mc + gg * n2, w, false);
        push(1, 2, 2.0 * g1 * g1 * mc + gg * n2, w, true);
        push(1, 2, 2.0 * g2 * g2 * m + gg * n2, -w, false);
        KernelModel::new(self.kappa, terms, KernelStructure::Squeezed)
            .expect("validated parameters give a valid kernel")
    }
}

pub fn bogoliubov_params(p: &SqueezedBathParams) -> Bogoliubov {
    p.bogo
}

pub fn squeezed_kernel_time(p: &SqueezedBathParams, t: f64) -> Result<Mat4> {
    p.kernel().time(t)
}

/// Kernel at `ω = Δ_q + δ`.
pub fn squeezed_kernel_freq(p: &SqueezedBathParams, delta: f64) -> Mat4 {
    p.kernel().freq(p.delta_q, c(delta, 0.0))
}

/// Bath evolution matrix `M`, correlator matrix `T` and coupling matrix `G` of
/// the vector form `𝓥 = −i Σᵀ G A` with
/// `Σ = (σ₊·, σ₋·, ·σ₋, ·σ₊)` and `A = (ã·, ã†·, ·ã†, ·ã)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathMatrices {
    pub m: Matrix4<C64>,
    pub t: Matrix4<C64>,
    pub g: Matrix4<C64>,
}

pub fn bath_matrices(p: &SqueezedBathParams) -> BathMatrices {
    let b = &p.bogo;
    let (n, m, w, k) = (b.nbar, b.mbar, b.delta_c_eff, p.kappa);
    let mc = m.conj();
    let q = c(k, w) * m * 2.0;
    let diag = c((2.0 * n + 1.0) * k, w);
    let nk = c(2.0 * n * k, 0.0);
    let n1k = c(2.0 * (n + 1.0) * k, 0.0);
    let mm = Matrix4::new(
        c(diag.re, w), -q, q, -nk,
        q, c(-diag.re, -w), n1k, -q,
        q, -nk, c(diag.re, -w), -q,
        n1k, -q, q, c(-diag.re, w),
    );
    let nn = c(n, 0.0);
    let n1 = c(n + 1.0, 0.0);
    let tt = Matrix4::new(
        m, n1, nn, m,
        nn, mc, mc, n1,
        nn, mc, mc, n1,
        m, n1, nn, m,
    );
    let (g1, g2) = (c(b.g1, 0.0), c(b.g2, 0.0));
    let z = c(0.0, 0.0);
    let gm = Matrix4::new(
        g1, g2, z, z,
        g2, g1, z, z,
        z, z, -g1, -g2,
        z, z, -g2, -g1,
    );
    BathMatrices {
        m: mm,
        t: tt,
        g: gm,
    }
}

fn to_mat4(m: &CMat) -> Mat4 {
    Mat4::from_fn(|i, j| m[(i, j)])
}

/// Kernel assembled from the bath matrices as
/// `𝓚(t) = −Σᵀ G T (e^{Mt})ᵀ G Σ_I(−t) e^{𝓛_S t}`, with every matrix
/// exponential evaluated numerically. Independent of the closed-form entries.
pub fn generic_kernel_time(p: &SqueezedBathParams, t: f64) -> Result<Mat4> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let bm = bath_matrices(p);
    let emt = (bm.m * c(t, 0.0)).exp();
    let coef = bm.g * bm.t * emt.transpose() * bm.g;
    let sp = sigma_plus();
    let sm = sigma_minus();
    let sig = [spre(&sp), spre(&sm), spost(&sm), spost(&sp)].map(|x| to_mat4(&x));
    let hs = crate::liouville::sigma_z() * c(-p.delta_q / 2.0, 0.0);
    let ls = to_mat4(&crate::liouville::commutator_superop(
        &crate::liouville::HilbertOperator::new(hs).expect("square"),
    )
    .into_mat());
    let els = (ls * c(t, 0.0)).exp();
    let mut k = Mat4::zeros();
    for j in 0..4 {
        for n in 0..4 {
            k -= sig[j] * els * sig[n] * coef[(j, n)];
        }
    }
    Ok(k)
}

fn spectrum_parts(p: &SqueezedBathParams, delta: f64) -> (C64, C64, C64) {
    let k = squeezed_kernel_freq(p, delta);
    // K₂₂ at −ω is the conjugate of the (eg, eg) entry at ω.
    let z = k[(2, 2)].conj();
    let kbar = k[(2, 1)] * k[(1, 2)];
    (k[(1, 1)], z, kbar)
}

fn nested(delta: f64, delta_q: f64, k22: C64, z: C64, kbar: C64) -> f64 {
    let x = delta + 2.0 * delta_q + z.im;
    let den = z.re * z.re + x * x;
    let a = k22.re - (kbar.re * z.re - kbar.im * x) / den;
    let b = delta - k22.im + (kbar.im * z.re + kbar.re * x) / den;
    -a / PI / (a * a + b * b)
}

/// Normalized squeezed-bath emission spectrum at `δ = ω − Δ_q`, including the
/// coherence cross-coupling `K̄₃₂[δ] = 𝓚₃₂[δ]·𝓚*₃₂[δ]`.
pub fn squeezed_closed_spectrum(p: &SqueezedBathParams, delta: f64) -> f64 {
    let (k22, z, kbar) = spectrum_parts(p, delta);
    nested(delta, p.delta_q, k22, z, kbar)
}

/// As [`squeezed_closed_spectrum`] with `K̄₃₂` set to zero.
pub fn squeezed_closed_spectrum_without_cross_terms(p: &SqueezedBathParams, delta: f64) -> f64 {
    let (k22, z, _) = spectrum_parts(p, delta);
    nested(delta, p.delta_q, k22, z, c(0.0, 0.0))
}

/// `⟨g|ρ_ss|g⟩` of the qubit.
pub fn squeezed_steady_ground_population(p: &SqueezedBathParams) -> f64 {
    let b = &p.bogo;
    let (g1, g2, n, m) = (b.g1, b.g2, b.nbar, b.mbar);
    let (k, dd, ss) = (p.kappa, b.delta_diff, b.sigma_sum);
    let k2 = k * k;
    let cross = m.re * k * (2.0 * k2 + dd * dd + ss * ss) + (ss - dd) * m.im * (k2 - ss * dd);
    let a1 = g1 * g1 * (k2 + ss * ss);
    let a2 = g2 * g2 * (k2 + dd * dd);
    let num = k * ((n + 1.0) * a1 + n * a2) + g1 * g2 * cross;
    let den = (2.0 * n + 1.0) * k * (a1 + a2) + 2.0 * g1 * g2 * cross;
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SqueezedBathParams {
        SqueezedBathParams::new(1.0, 2.0, 3.0, 1.4, 0.8).unwrap()
    }

    #[test]
    fn no_squeezing_limit() {
        let p = SqueezedBathParams::new(1.0, 2.0, 5.0, 0.0, 1.0).unwrap();
        let b = p.bogoliubov();
        assert_eq!(b.zeta, 0.0);
        assert_eq!(b.g1, 1.0);
        assert_eq!(b.g2.abs(), 0.0);
        assert_eq!(b.nbar, 0.0);
        assert_eq!(b.mbar.norm(), 0.0);
        assert_eq!(b.delta_c_eff, 5.0);
    }

    #[test]
    fn pythagorean_effective_frequency() {
        let p = SqueezedBathParams::new(1.0, 2.0, 5.0, 3.0, 1.0).unwrap();
        assert!((p.bogoliubov().delta_c_eff - 4.0).abs() < 1e-15);
    }

    #[test]
    fn coupling_identity() {
        for k in 0..50 {
            let r = 4.99 * k as f64 / 50.0;
            let b = *SqueezedBathParams::new(1.7, 2.0, 5.0, r, 1.0).unwrap().bogoliubov();
            assert!((b.g1 * b.g1 - b.g2 * b.g2 - 1.7 * 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn r_at_cavity_detuning_rejected() {
        let e = SqueezedBathParams::new(1.0, 2.0, 3.0, 3.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("r < |delta_c|"));
    }

    #[test]
    fn closed_form_matches_matrix_construction() {
        let p = sample();
        for t in [0.0, 0.13, 0.4, 1.1, 2.3, 5.0] {
            let a = squeezed_kernel_time(&p, t).unwrap();
            let b = generic_kernel_time(&p, t).unwrap();
            assert!((a - b).norm() < 1e-12, "t = {t}: {}", (a - b).norm());
        }
    }

    #[test]
    fn coherence_coupling_at_zero_time() {
        let p = sample();
        let b = p.bogoliubov();
        let k = squeezed_kernel_time(&p, 0.0).unwrap();
        let expect = 2.0 * b.g1 * b.g1 * b.mbar
            + 2.0 * b.g2 * b.g2 * b.mbar.conj()
            + b.g1 * b.g2 * (2.0 * b.nbar + 1.0) * 2.0;
        assert!((k[(2, 1)] - expect).norm() < 1e-14);
        assert!((k[(1, 2)] - expect.conj()).norm() < 1e-14);
    }

    #[test]
    fn structure_holds() {
        let p = sample();
        let k = p.kernel();
        for t in [0.0, 0.7, 3.1] {
            assert!(k.structure_violation(t).unwrap() < 1e-12);
        }
    }

    #[test]
    fn vacuum_correlators_without_squeezing() {
        let p = SqueezedBathParams::new(1.0, 2.0, 3.0, 0.0, 0.8).unwrap();
        let t = bath_matrices(&p).t;
        for i in 0..4 {
            for j in 0..4 {
                let v = t[(i, j)];
                let expect = if (i, j) == (0, 1) || (i, j) == (1, 3) || (i, j) == (2, 3) || (i, j) == (3, 1) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(v, c(expect, 0.0));
            }
        }
    }

    #[test]
    fn ground_population_limits() {
        let p = SqueezedBathParams::new(1.0, 2.0, 3.0, 0.0, 0.8).unwrap();
        assert!((squeezed_steady_ground_population(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_center_magnitude() {
        let p = sample();
        let b = p.bogoliubov();
        let k = squeezed_kernel_freq(&p, -b.delta_diff);
        let first = 2.0 * b.g1 * b.g2 * b.mbar.conj() + b.g1 * b.g1 * (2.0 * b.nbar + 1.0);
        let second = (2.0 * b.g1 * b.g2 * b.mbar + b.g2 * b.g2 * (2.0 * b.nbar + 1.0))
            / c(p.kappa(), -b.delta_diff + b.sigma_sum);
        assert!((k[(1, 1)] + first / p.kappa() + second).norm() < 1e-13);
    }
}
