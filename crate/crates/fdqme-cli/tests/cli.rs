use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fdqme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdqme")).args(args).output().unwrap()
}

fn run(dir: &Path, scenario: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{scenario}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![scenario, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fdqme(&args)
}

/// Numeric rows of a CSV written by the tool.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

fn summary(dir: &Path, prefix: &str) -> toml::Table {
    let meta: toml::Table = fs::read_to_string(dir.join(format!("out/{prefix}.meta.toml"))).unwrap().parse().unwrap();
    meta["summary"].as_table().unwrap().clone()
}

const THERMAL: &str = r#"
    [params]
    omega_q = 2e5
    delta = 50.0
    kappa = 10.0
    nbar = 0.1
    [grid.frequency]
    start = -100
    stop = 50
    points = 3001
"#;

#[test]
fn thermal_spectrum_peaks() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "thermal-spectrum", THERMAL, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/thermal-spectrum-fd.csv"));
    assert_eq!(header, ["delta [g]", "density [1/g]"]);
    let (x, y) = (column(&rows, 0), column(&rows, 1));
    let maxima = fdqme::baths::local_maxima(&x, &y);
    assert_eq!(maxima.len(), 2, "{maxima:?}");
    // Side peak near −Δ, dominant line near δ_eff = g²Δ/(κ²+Δ²).
    assert!((maxima[0] + 50.0).abs() < 4.0);
    let delta_eff = 50.0 / (100.0 + 2500.0);
    assert!((maxima[1] - delta_eff).abs() < 0.05);
    let area = fdqme::grid::trapezoid(&x, &y);
    assert!((area - 1.0).abs() < 1e-9);
    for f in ["markov", "br"] {
        assert!(dir.path().join(format!("out/thermal-spectrum-{f}.csv")).exists());
    }
}

#[test]
fn measure_sweep_kappa_slope() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
        [params]
        bath = "thermal"
        omega_q = 2e5
        delta = 5.0
        nbar = 0.1
        [grid.sweep]
        parameter = "kappa"
        start = 20
        stop = 200
        points = 7
        spacing = "log"
    "#;
    let o = run(dir.path(), "measure-sweep", cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/measure-sweep-measure.csv"));
    assert_eq!(header[0], "kappa [g]");
    let (k, ns) = (column(&rows, 0), column(&rows, 1));
    assert!(ns.windows(2).all(|w| w[1] < w[0]), "{ns:?}");
    let slope = (ns[6].ln() - ns[0].ln()) / (k[6].ln() - k[0].ln());
    assert!((slope + 1.0).abs() < 0.1, "{slope}");
}

#[test]
fn positivity_violation_in_br_only() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
        [params]
        delta_q = 200
        delta_c = 120
        r = 115.08
        kappa = 10
        [grid.time]
        start = 0
        stop = 2
        points = 201
    "#;
    let o = run(dir.path(), "positivity", cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/positivity-purity.csv"));
    assert_eq!(header, ["t [1/g]", "purity_br", "purity_fd"]);
    let br = column(&rows, 1).into_iter().fold(f64::MIN, f64::max);
    let fd = column(&rows, 2).into_iter().fold(f64::MIN, f64::max);
    assert!(br > 1.0 + 1e-4, "{br}");
    assert!(fd <= 1.0 + 1e-4, "{fd}");
    let s = summary(dir.path(), "positivity");
    assert_eq!(s["br_max_purity"].as_float().unwrap(), br);
}

#[test]
fn squeezing_limit_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = "[params]\ndelta_q = 200\ndelta_c = 120\nr = 120\nkappa = 10\n";
    let o = run(dir.path(), "squeezed-spectrum", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("squeezing requires r < |delta_c|"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn every_config_error_is_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
        [params]
        omega_q = 2e5
        delta = "fifty"
        kappa = -1
        spin = 0.5
        [grid.frequency]
        start = 1
        stop = -1
        points = 10
        [output]
        format = "hdf5"
    "#;
    let o = run(dir.path(), "thermal-spectrum", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for needle in ["`delta` must be a finite number", "missing key `nbar`", "unknown key `spin`", "start < stop", "hdf5"] {
        assert!(err.contains(needle), "{needle} missing from:\n{err}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
        [params]
        bath = "squeezed"
        delta_q = 200
        delta_c = 320
        kappa = 10
        [grid.sweep]
        parameter = "r"
        start = 0
        stop = 300
        points = 4
    "#;
    let read_all = |p: &Path| {
        let mut v: Vec<_> = fs::read_dir(p)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name(), fs::read(e.path()).unwrap())
            })
            .collect();
        v.sort();
        v
    };
    assert!(run(dir.path(), "measure-sweep", cfg, &["--threads", "1"]).status.success());
    let first = read_all(&dir.path().join("out"));
    fs::remove_dir_all(dir.path().join("out")).unwrap();
    assert!(run(dir.path(), "measure-sweep", cfg, &[]).status.success());
    assert_eq!(first, read_all(&dir.path().join("out")));
    assert_eq!(first.len(), 2);
}

#[test]
fn sidecar_records_options_and_round_trips_config() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "thermal-spectrum", THERMAL, &["--gap", "fwhm", "--include-sum-frequency"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("out/thermal-spectrum.meta.toml")).unwrap();
    let meta: toml::Table = text.parse().unwrap();
    assert_eq!(meta["options"]["gap"].as_str(), Some("fwhm"));
    assert_eq!(meta["options"]["include_sum_frequency"].as_bool(), Some(true));
    assert!(meta["tolerances"]["kl_tail_cutoff"].as_float().unwrap() > 0.0);
    let echo = toml::to_string(&meta["config"]).unwrap();
    let cfg = fdqme_cli::config::parse_config(&echo, fdqme_cli::config::ScenarioKind::ThermalSpectrum).unwrap();
    assert_eq!(cfg.number("delta"), Some(50.0));
    assert!(!text.contains("time"));
}

#[test]
fn oracle_compare_agrees_on_side_peak() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
        [params]
        bath = "thermal"
        omega_q = 2e5
        delta = 100.0
        kappa = 10.0
        nbar = 0.1
        [grid.frequency]
        start = -120
        stop = 20
        points = 1401
    "#;
    let o = run(dir.path(), "oracle-compare", cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path(), "oracle-compare");
    let get = |k: &str| -> Vec<f64> { s[k].as_array().unwrap().iter().map(|v| v.as_float().unwrap()).collect() };
    let (a, b) = (get("oracle_maxima"), get("fd_maxima"));
    assert_eq!(a.len(), b.len());
    assert!((a[0] - b[0]).abs() < 2.0, "{a:?} vs {b:?}");
}

#[test]
fn waveguide_spectrum_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = "[params]\nomega0 = 500\ngamma = 1\nbeta = 0.95\nn = 40\n";
    let o = run(dir.path(), "waveguide-spectrum", cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/waveguide-spectrum-spectrum.csv"));
    assert_eq!(header, ["omega [gamma]", "density [1/gamma]"]);
    let area = fdqme::grid::trapezoid(&column(&rows, 0), &column(&rows, 1));
    assert!((area - 1.0).abs() < 1e-9);
    assert!(summary(dir.path(), "waveguide-spectrum")["n_s"].as_float().unwrap() > 0.0);
}

#[test]
fn blp_vanishes_in_the_markov_limit() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
        [params]
        bath = "thermal"
        omega_q = 2e5
        kappa = 20
        nbar = 0.1
        [grid.time]
        start = 0
        stop = 1.5
        points = 801
        [grid.sweep]
        parameter = "delta"
        start = 0
        stop = 20
        points = 2
    "#;
    let o = run(dir.path(), "blp-compare", cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&dir.path().join("out/blp-compare-blp.csv"));
    assert!(rows[0][1] < 1e-8, "{:?}", rows[0]);
    assert!(rows[0][2] < rows[1][2]);
}

#[test]
fn list_scenarios() {
    let o = fdqme(&["--list-scenarios"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for s in fdqme_cli::config::ScenarioKind::ALL {
        assert!(text.contains(s.tag()));
    }
}

#[test]
fn unknown_gap_method_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "thermal-spectrum", THERMAL, &["--gap", "both"]);
    assert_eq!(o.status.code(), Some(2));
}
