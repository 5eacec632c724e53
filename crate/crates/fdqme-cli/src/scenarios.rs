//! One function per scenario. Each turns a validated configuration into
//! tables and summary values; nothing here touches the filesystem.

use anyhow::{bail, Result};
use rayon::prelude::*;
use toml::Value;

use fdqme::baths::{local_maxima, Bath};
use fdqme::fdme::{purity, FrequencyPropagator, KernelMode};
use fdqme::liouville::{c, pure_state, VectorizedOperator};
use fdqme::measures::{bath_spectral_measure, blp_measure, spectra_pair, spectral_grid, spectral_sweep, GapMethod};
use fdqme::oracle::{build_full_model, default_n_fock, full_steady_spectrum};
use fdqme::redfield::{bm_evolve, br_evolve, br_spectrum_exact, purity_report, RedfieldOptions};
use fdqme::spectrum::Spectrum;
use fdqme::waveguide::{default_grid, waveguide_measure_sweep, waveguide_spectrum, WaveguideParams};

use crate::config::{BathKind, ScenarioConfig, ScenarioKind, System};
use crate::output::{CsvTable, RunOutput};

/// Purity excess counted as a positivity violation.
pub const PURITY_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub gap: GapMethod,
    /// Keep the sum-frequency terms of the Redfield generator.
    pub include_sum_frequency: bool,
}

impl RunOptions {
    fn redfield(&self) -> RedfieldOptions {
        RedfieldOptions {
            include_sum_frequency: self.include_sum_frequency,
            ..RedfieldOptions::default()
        }
    }
}

pub fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    match cfg.scenario {
        ScenarioKind::ThermalSpectrum | ScenarioKind::SqueezedSpectrum => qubit_spectrum(cfg, opts),
        ScenarioKind::WaveguideSpectrum => waveguide(cfg),
        ScenarioKind::MeasureSweep => measure_sweep(cfg, opts),
        ScenarioKind::BlpCompare => blp_compare(cfg, opts),
        ScenarioKind::Positivity => positivity(cfg, opts),
        ScenarioKind::OracleCompare => oracle_compare(cfg),
    }
}

fn bath(cfg: &ScenarioConfig, point: &[(&str, f64)]) -> Result<Bath> {
    match cfg.system(point).map_err(anyhow::Error::msg)? {
        System::Qubit(b) => Ok(b),
        System::Waveguide(_) => bail!("expected a qubit bath"),
    }
}

fn waveguide_params(cfg: &ScenarioConfig, point: &[(&str, f64)]) -> Result<WaveguideParams> {
    match cfg.system(point).map_err(anyhow::Error::msg)? {
        System::Waveguide(p) => Ok(p),
        System::Qubit(_) => bail!("expected waveguide parameters"),
    }
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::Float(x)).collect())
}

fn spectrum_table(name: &str, s: &Spectrum, x: (&str, &str), y: (&str, &str)) -> CsvTable {
    CsvTable::from_columns(name, &[x, y], &[s.grid(), s.values()])
}

const DELTA: (&str, &str) = ("delta", "g");
const DENSITY: (&str, &str) = ("density", "1/g");

fn qubit_spectrum(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    let bath = bath(cfg, &[])?;
    let grid = match &cfg.frequency {
        Some(g) => g.values(),
        None => spectral_grid(&bath)?,
    };
    let (s, s_m) = spectra_pair(&bath, &grid)?;
    let m = bath_spectral_measure(&bath, opts.gap)?;
    let mut out = RunOutput::default();
    out.summary("n_s", m.value);
    out.summary("gap", m.metadata["gap"].parse::<f64>()?);
    out.summary("fd_maxima", floats(&s.local_maxima()));
    out.summary("fd_peak", s.peak().0);
    out.tables.push(spectrum_table("fd", &s, DELTA, DENSITY).note("frame", "offset from the qubit frequency"));
    out.tables.push(spectrum_table("markov", &s_m, DELTA, DENSITY));
    if let Bath::Thermal(p) = &bath {
        let e = p.effective_rates();
        out.summary("delta_eff", e.delta_eff);
        out.summary("gamma_eff", e.gamma_eff);
        let br = br_spectrum_exact(p, &grid)?.normalized()?;
        out.summary("br_maxima", floats(&br.local_maxima()));
        out.tables.push(spectrum_table("br", &br, DELTA, DENSITY));
    }
    Ok(out)
}

fn waveguide(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let p = waveguide_params(cfg, &[])?;
    let grid = match &cfg.frequency {
        Some(g) => g.values(),
        None => default_grid(&p)?,
    };
    let s = waveguide_spectrum(&p, &grid)?;
    let s0 = waveguide_spectrum(&p.with_eta(0.0)?, &grid)?;
    let sweep = waveguide_measure_sweep(&p, &[p.eta()])?;
    let mut out = RunOutput::default();
    out.summary("eta", p.eta());
    out.summary("n_s", sweep.results[0].value);
    out.summary("gap", sweep.gap);
    let x = ("omega", "gamma");
    let y = ("density", "1/gamma");
    out.tables.push(spectrum_table("spectrum", &s, x, y));
    out.tables.push(spectrum_table("markov", &s0, x, y));
    Ok(out)
}

fn unit_of(kind: BathKind, parameter: &str) -> &'static str {
    match (kind, parameter) {
        (_, "nbar" | "beta" | "eta" | "n" | "g") => "",
        (BathKind::Waveguide, "gamma") => "",
        (BathKind::Waveguide, _) => "gamma",
        _ => "g",
    }
}

fn sweep_axis(cfg: &ScenarioConfig) -> Result<(&str, Vec<f64>)> {
    match &cfg.sweep {
        Some(s) => Ok((s.parameter.as_str(), s.grid.values())),
        None => bail!("scenario needs [grid.sweep]"),
    }
}

fn measure_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    let (param, xs) = sweep_axis(cfg)?;
    let kind = cfg.bath_kind();
    let results = if kind == BathKind::Waveguide {
        xs.par_iter()
            .map(|&x| {
                let p = waveguide_params(cfg, &[(param, x)])?;
                Ok(waveguide_measure_sweep(&p, &[p.eta()])?.results.remove(0))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let baths = xs.iter().map(|&x| bath(cfg, &[(param, x)])).collect::<Result<Vec<_>>>()?;
        spectral_sweep(&baths, opts.gap)?
    };
    let meta = |k: &str| -> Result<Vec<f64>> {
        results.iter().map(|r| Ok(r.metadata[k].parse::<f64>()?)).collect()
    };
    let ns: Vec<f64> = results.iter().map(|r| r.value).collect();
    let (kl, gap) = (meta("kl_bits")?, meta("gap")?);
    let mut out = RunOutput::default();
    let k = argmax(&ns);
    out.summary("argmax", xs[k]);
    out.summary("max_n_s", ns[k]);
    out.tables.push(CsvTable::from_columns(
        "measure",
        &[(param, unit_of(kind, param)), ("n_s", ""), ("kl", "bit"), ("gap", unit_of(kind, "kappa"))],
        &[&xs, &ns, &kl, &gap],
    ));
    Ok(out)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

fn ket(a: f64, b: (f64, f64)) -> VectorizedOperator {
    pure_state(&[c(a, 0.0), c(b.0, b.1)])
}

/// Initial state by name; the `sigma_*` names are eigenstates with the
/// given sign.
pub fn initial_state(name: &str) -> Result<VectorizedOperator> {
    let s = 0.5f64.sqrt();
    Ok(match name {
        "ground" => ket(1.0, (0.0, 0.0)),
        "excited" => ket(0.0, (1.0, 0.0)),
        "sigma_x_plus" => ket(s, (s, 0.0)),
        "sigma_x_minus" => ket(s, (-s, 0.0)),
        "sigma_y_plus" => ket(s, (0.0, s)),
        "sigma_y_minus" => ket(s, (0.0, -s)),
        _ => bail!("unknown initial state `{name}`"),
    })
}

fn blp_compare(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    let (param, xs) = sweep_axis(cfg)?;
    let ts = cfg.time.as_ref().map(|t| t.values()).unwrap_or_default();
    let (a, b) = match cfg.text("states") {
        Some("sigma_x") => ("sigma_x_plus", "sigma_x_minus"),
        _ => ("ground", "excited"),
    };
    let (rho_a, rho_b) = (initial_state(a)?, initial_state(b)?);
    let evolve = if cfg.text("dynamics") == Some("bm") { bm_evolve } else { br_evolve };
    let ropts = opts.redfield();
    let rows = xs
        .par_iter()
        .map(|&x| {
            let bath = bath(cfg, &[(param, x)])?;
            let ta = evolve(&bath, &rho_a, &ts, &ropts)?;
            let tb = evolve(&bath, &rho_b, &ts, &ropts)?;
            let blp = blp_measure(&ta, &tb)?.value;
            let ns = bath_spectral_measure(&bath, opts.gap)?.value;
            Ok((blp, ns))
        })
        .collect::<Result<Vec<_>>>()?;
    let (blp, ns): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let mut out = RunOutput::default();
    out.summary("blp_argmax", xs[argmax(&blp)]);
    out.summary("n_s_argmax", xs[argmax(&ns)]);
    out.tables.push(CsvTable::from_columns(
        "blp",
        &[(param, unit_of(cfg.bath_kind(), param)), ("blp", ""), ("n_s", "")],
        &[&xs, &blp, &ns],
    ));
    Ok(out)
}

fn positivity(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    let bath = bath(cfg, &[])?;
    let ts = cfg.time.as_ref().map(|t| t.values()).unwrap_or_default();
    let rho0 = initial_state(cfg.text("initial").unwrap_or("sigma_y_minus"))?;
    let br = br_evolve(&bath, &rho0, &ts, &opts.redfield())?;
    let report = purity_report(&br, PURITY_THRESHOLD);
    let fp = FrequencyPropagator::from_bath(&bath, KernelMode::Full);
    let fd: Vec<f64> = fp.inverse_transform(&rho0, &ts)?.iter().map(purity).collect();
    let fd_max = fd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = RunOutput::default();
    out.summary("br_max_purity", 1.0 + report.max_excess);
    out.summary("fd_max_purity", fd_max);
    out.summary("threshold", PURITY_THRESHOLD);
    if let Some(t) = report.first_crossing {
        out.summary("br_first_crossing", t);
    }
    out.tables.push(CsvTable::from_columns(
        "purity",
        &[("t", "1/g"), ("purity_br", ""), ("purity_fd", "")],
        &[&ts, &report.purities, &fd],
    ));
    Ok(out)
}

fn oracle_compare(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let bath = bath(cfg, &[])?;
    let n_fock = cfg.number("n_fock").map_or_else(|| default_n_fock(&bath), |n| n as usize);
    let grid = match &cfg.frequency {
        Some(g) => g.values(),
        None => bail!("oracle-compare needs [grid.frequency]"),
    };
    let model = build_full_model(&bath, n_fock)?;
    let full = full_steady_spectrum(&model, &grid)?;
    let fp = FrequencyPropagator::from_bath(&bath, KernelMode::Full);
    let ground = pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let fd = fp.qubit_spectrum(&fp.steady_state(&ground)?, &grid)?.normalized()?;
    let sup = full
        .values()
        .iter()
        .zip(fd.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut out = RunOutput::default();
    out.summary("n_fock", n_fock as i64);
    out.summary("sup_difference", sup);
    out.summary("oracle_maxima", floats(&local_maxima(&grid, full.values())));
    out.summary("fd_maxima", floats(&local_maxima(&grid, fd.values())));
    out.tables.push(spectrum_table("oracle", &full, DELTA, DENSITY));
    out.tables.push(spectrum_table("fd", &fd, DELTA, DENSITY));
    Ok(out)
}
