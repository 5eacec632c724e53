//! Joint qubit ⊗ truncated-cavity Lindblad model, used as ground truth for
//! the reduced descriptions.
//!
//! The thermal model is written in the frame rotating at `ω_q` (exact, since
//! the exchange coupling conserves excitation number), the squeezed model in
//! the pump frame. Spectral grids are offsets from the qubit frequency of the
//! working frame, as for [`crate::fdme::FrequencyPropagator`].

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::baths::Bath;
use crate::error::{Error, Result};
use crate::liouville::{
    c, commutator_superop, destroy, devectorize_mat, identity, lindblad_dissipator, partial_trace_first,
    partial_trace_second, sigma_minus, sigma_z, vectorize_mat, CMat, CVec, HilbertOperator, LiouvilleOperator,
    VectorizedOperator, C64,
};
use crate::spectrum::Spectrum;

pub const MIN_FOCK: usize = 4;
/// Largest allowed population of the top two Fock levels.
pub const TRUNCATION_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct FullModel {
    pub n_fock: usize,
    pub hamiltonian: HilbertOperator,
    pub dissipators: Vec<(f64, HilbertOperator)>,
    pub liouvillian: LiouvilleOperator,
    /// Qubit frequency in the working frame; spectral offsets are measured
    /// from it.
    pub reference: f64,
}

/// 10 Fock levels for thermal baths, 20 for squeezed ones.
pub fn default_n_fock(bath: &Bath) -> usize {
    match bath {
        Bath::Thermal(_) => 10,
        Bath::Squeezed(_) => 20,
    }
}

pub fn build_full_model(bath: &Bath, n_fock: usize) -> Result<FullModel> {
    if n_fock < MIN_FOCK {
        return Err(Error::InvalidParameter {
            name: "n_fock",
            reason: format!("need at least {MIN_FOCK} Fock levels, got {n_fock}"),
        });
    }
    let iq = identity(2);
    let ic = identity(n_fock);
    let a = destroy(n_fock);
    let ad = a.adjoint();
    let num = &ad * &a;
    let sm = sigma_minus();
    let sp = sm.adjoint();
    let joint_a = iq.kronecker(&a);
    let exchange = |g: f64| (sp.kronecker(&a) + sm.kronecker(&ad)) * c(g, 0.0);

    let (h, dissipators, reference) = match bath {
        Bath::Thermal(p) => {
            // ω_c − ω_q = −Δ.
            let h = iq.kronecker(&num) * c(-p.delta(), 0.0) + exchange(p.g());
            let k = p.kappa();
            let d = vec![
                (k * (p.nbar() + 1.0), joint_a.clone()),
                (k * p.nbar(), joint_a.adjoint()),
            ];
            (h, d, 0.0)
        }
        Bath::Squeezed(p) => {
            let a2 = &a * &a;
            let hb = &num * c(p.delta_c(), 0.0) + (&a2 + a2.adjoint()) * c(p.r() / 2.0, 0.0);
            let h = sigma_z().kronecker(&ic) * c(-p.delta_q() / 2.0, 0.0) + iq.kronecker(&hb) + exchange(p.g());
            (h, vec![(p.kappa(), joint_a.clone())], p.delta_q())
        }
    };
    let hamiltonian = HilbertOperator::hermitian(h)?;
    let mut l = commutator_superop(&hamiltonian);
    let mut ops = Vec::with_capacity(dissipators.len());
    for (rate, o) in dissipators {
        if rate == 0.0 {
            continue;
        }
        let o = HilbertOperator::new(o)?;
        l = l + lindblad_dissipator(&o).scaled(c(rate, 0.0));
        ops.push((rate, o));
    }
    Ok(FullModel {
        n_fock,
        hamiltonian,
        dissipators: ops,
        liouvillian: l,
        reference,
    })
}

impl FullModel {
    pub fn dim(&self) -> usize {
        2 * self.n_fock
    }

    /// `𝓛χ = 0` with unit trace, solved on the sector reachable from the
    /// joint ground state. Checks the residual, positivity and the Fock
    /// truncation.
    pub fn steady_state(&self) -> Result<VectorizedOperator> {
        let d = self.dim();
        let l = self.liouvillian.mat();
        let sector = reachable(l, &[0]);
        let trace: Vec<usize> = (0..d).map(|k| k * d + k).collect();
        let pos: Vec<usize> = trace.iter().filter_map(|t| sector.iter().position(|s| s == t)).collect();
        let n = sector.len();
        let mut sub = CMat::from_fn(n, n, |i, j| l[(sector[i], sector[j])]);
        // Replace the first row by the trace functional.
        let row = pos.first().copied().ok_or_else(|| Error::SteadyState("empty population sector".into()))?;
        for j in 0..n {
            sub[(row, j)] = c(0.0, 0.0);
        }
        for &p in &pos {
            sub[(row, p)] = c(1.0, 0.0);
        }
        let mut rhs = CVec::zeros(n);
        rhs[row] = c(1.0, 0.0);
        let x = sub.lu().solve(&rhs).ok_or(Error::Singular { omega: 0.0 })?;
        let mut full = CVec::zeros(d * d);
        for (k, &s) in sector.iter().enumerate() {
            full[s] = x[k];
        }
        let chi = VectorizedOperator::from_vec(d, full)?;

        let res = (l * chi.vec()).norm();
        if !(res < RESIDUAL_TOL) {
            return Err(Error::SteadyState(format!("residual {res:.3e}")));
        }
        let rho = devectorize_mat(&chi);
        let herm = (&rho + rho.adjoint()) * c(0.5, 0.0);
        let min = herm.symmetric_eigenvalues().min();
        if min < -PSD_TOL {
            return Err(Error::SteadyState(format!("negative eigenvalue {min:.3e}")));
        }
        let cav = partial_trace_first(&rho, 2, self.n_fock);
        let top = cav[(self.n_fock - 1, self.n_fock - 1)].re + cav[(self.n_fock - 2, self.n_fock - 2)].re;
        if top > TRUNCATION_TOL {
            return Err(Error::Truncation { population: top });
        }
        Ok(chi)
    }

    pub fn reduced_qubit(&self, chi: &VectorizedOperator) -> VectorizedOperator {
        vectorize_mat(&partial_trace_second(&devectorize_mat(chi), 2, self.n_fock))
    }

    pub fn reduced_cavity(&self, chi: &VectorizedOperator) -> CMat {
        partial_trace_first(&devectorize_mat(chi), 2, self.n_fock)
    }

    /// `2 Re ⟨⟨σ₋|(iω − 𝓛)⁻¹|σ₋χ_ss⟩⟩` at `ω = reference + x`, unnormalized.
    pub fn correlator_spectrum(&self, chi: &VectorizedOperator, grid: &[f64]) -> Result<Vec<f64>> {
        crate::grid::validate(grid)?;
        let d = self.dim();
        let sm = sigma_minus().kronecker(&identity(self.n_fock));
        let src = vectorize_mat(&(&sm * devectorize_mat(chi)));
        let left = vectorize_mat(&sm);
        let seeds: Vec<usize> = (0..d * d).filter(|&k| src.vec()[k] != c(0.0, 0.0)).collect();
        let l = self.liouvillian.mat();
        let sector = reachable(l, &seeds);
        let n = sector.len();
        let sub = CMat::from_fn(n, n, |i, j| l[(sector[i], sector[j])]);
        let (q, h) = sub.hessenberg().unpack();
        let h = RowHessenberg::new(&h);
        let b = q.adjoint() * CVec::from_iterator(n, sector.iter().map(|&s| src.vec()[s]));
        let w = q.adjoint() * CVec::from_iterator(n, sector.iter().map(|&s| left.vec()[s]));
        grid.par_iter()
            .map(|&x| {
                let omega = self.reference + x;
                let y = h.shifted_solve(c(0.0, omega), &b).ok_or(Error::Singular { omega })?;
                Ok(2.0 * w.dotc(&y).re)
            })
            .collect()
    }
}

/// Normalized steady-state `σ₋` emission spectrum of the joint model.
pub fn full_steady_spectrum(m: &FullModel, grid: &[f64]) -> Result<Spectrum> {
    let chi = m.steady_state()?;
    Spectrum::new(grid.to_vec(), m.correlator_spectrum(&chi, grid)?)?.normalized()
}

/// Indices reachable from `seeds` along nonzero entries `m[(i, j)]`, `j → i`.
/// The span of these basis vectors is invariant under `m`.
fn reachable(m: &CMat, seeds: &[usize]) -> Vec<usize> {
    let n = m.nrows();
    let mut seen: BTreeSet<usize> = seeds.iter().copied().collect();
    let mut stack: Vec<usize> = seeds.to_vec();
    while let Some(j) = stack.pop() {
        for i in 0..n {
            if m[(i, j)] != c(0.0, 0.0) && seen.insert(i) {
                stack.push(i);
            }
        }
    }
    seen.into_iter().collect()
}

/// Upper Hessenberg matrix stored row-major, for repeated shifted solves.
struct RowHessenberg {
    n: usize,
    rows: Vec<C64>,
}

impl RowHessenberg {
    fn new(h: &CMat) -> Self {
        let n = h.nrows();
        Self {
            n,
            rows: (0..n * n).map(|k| h[(k / n, k % n)]).collect(),
        }
    }

    /// `(s − H) y = b` by elimination with adjacent-row pivoting.
    fn shifted_solve(&self, s: C64, b: &CVec) -> Option<CVec> {
        let n = self.n;
        let mut a: Vec<C64> = self.rows.iter().map(|&x| -x).collect();
        for k in 0..n {
            a[k * n + k] += s;
        }
        let mut y = b.clone();
        for k in 0..n.saturating_sub(1) {
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let (r0, r1) = (&mut top[k * n..], &mut bottom[..n]);
            if r1[k].norm() > r0[k].norm() {
                r0[k..].swap_with_slice(&mut r1[k..]);
                y.swap_rows(k, k + 1);
            }
            if r0[k] == c(0.0, 0.0) {
                return None;
            }
            let f = r1[k] / r0[k];
            if f != c(0.0, 0.0) {
                for j in k..n {
                    r1[j] -= f * r0[j];
                }
                let v = y[k];
                y[k + 1] -= f * v;
            }
        }
        for k in (0..n).rev() {
            let row = &a[k * n..(k + 1) * n];
            let mut acc = y[k];
            for j in k + 1..n {
                acc -= row[j] * y[j];
            }
            if row[k] == c(0.0, 0.0) || !acc.re.is_finite() {
                return None;
            }
            y[k] = acc / row[k];
        }
        Some(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::ThermalBathParams;

    #[test]
    fn hessenberg_solve_matches_lu() {
        let n = 7;
        let m = CMat::from_fn(n, n, |i, j| c(((i * 3 + j * 5) % 7) as f64 - 3.0, ((i + 2 * j) % 5) as f64 - 2.0));
        let (q, h) = m.clone().hessenberg().unpack();
        let b = CVec::from_fn(n, |i, _| c(i as f64, 1.0));
        let s = c(0.3, 1.7);
        let y = RowHessenberg::new(&h).shifted_solve(s, &(q.adjoint() * &b)).unwrap();
        let mut a = -m;
        for k in 0..n {
            a[(k, k)] += s;
        }
        let x = a.lu().solve(&b).unwrap();
        assert!((q * y - x).norm() < 1e-10);
    }

    #[test]
    fn rejects_small_truncation() {
        let p = ThermalBathParams::with_detuning(1.0, 2e5, 5.0, 10.0, 0.1).unwrap();
        assert!(build_full_model(&Bath::Thermal(p), 3).is_err());
    }
}
