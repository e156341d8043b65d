use std::path::PathBuf;
use std::process::{Command, Output};

use c4bench_core::circuit::NativeCircuit;
use c4bench_core::gottesman::{ideal_distribution, load_corpus};

fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn c4bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c4bench")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as field vectors, header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn zero_noise() -> String {
    manifest_path("configs/zero.json").display().to_string()
}

#[test]
fn gottesman_sampled_run_covers_both_arms() {
    let default = manifest_path("configs/default.json").display().to_string();
    let out = stdout(&c4bench(&["gottesman", "--noise", &default, "--shots", "1050", "--seed", "7"]));
    assert!(out.starts_with("index,prep,arm,shots,retained_fraction,tvd,ci_low,ci_high\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 294);
    assert_eq!(r.iter().filter(|f| f[2] == "logical").count(), 147);
}

/// Smallest t with P(TVD > t) ≤ `tail` for n multinomial draws from the
/// uniform distribution on k of the four outcomes, by exact enumeration.
/// TVD = Σ|k·n_i − n| / (2kn), so the sum is an exact integer key.
fn multinomial_tvd_quantile(n: usize, k: usize, tail: f64) -> f64 {
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let base = ln_fact[n] - n as f64 * (k as f64).ln();
    let mut hist = vec![0.0; 2 * k * n + 1];
    let mut counts = vec![0usize; k];
    fn walk(i: usize, left: usize, counts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if i + 1 == counts.len() {
            counts[i] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            walk(i + 1, left - c, counts, f);
        }
    }
    walk(0, n, &mut counts, &mut |c: &[usize]| {
        let key: usize = c.iter().map(|&x| (k * x).abs_diff(n)).sum();
        hist[key] += (base - c.iter().map(|&x| ln_fact[x]).sum::<f64>()).exp();
    });
    let mut above = 1.0;
    for (key, p) in hist.iter().enumerate() {
        above -= p;
        if above <= tail {
            return key as f64 / (2 * k * n) as f64;
        }
    }
    1.0
}

#[test]
fn gottesman_without_noise_stays_near_ideal() {
    let n = 1050;
    let out = stdout(&c4bench(&["gottesman", "--noise", &zero_noise(), "--shots", "1050", "--seed", "7"]));
    let ideals: Vec<[f64; 4]> = load_corpus().iter().map(ideal_distribution).collect();
    // Per-row bound at a 1e-5 upper tail: with ~100 random rows a false
    // alarm has probability ≈ 1e-3.
    let bounds: Vec<f64> = (0..=4).map(|k| if k == 0 { 0.0 } else { multinomial_tvd_quantile(n, k, 1e-5) }).collect();
    for f in rows(&out) {
        let tvd: f64 = f[5].parse().unwrap();
        let ideal = ideals[f[0].parse::<usize>().unwrap()];
        let support: Vec<f64> = ideal.iter().copied().filter(|&p| p > 1e-12).collect();
        let k = support.len();
        assert!(support.iter().all(|&p| (p - 1.0 / k as f64).abs() < 1e-9), "non-flat ideal {ideal:?}");
        assert!(tvd <= bounds[k] + 1e-9, "{f:?} above {}", bounds[k]);
        assert_eq!(f[4], "1");
    }
}

#[test]
fn tvd_quantile_oracle_sanity() {
    // One outcome: no fluctuation. Two outcomes, n = 4: TVD = |n0 − 2|/4,
    // P(TVD = 0.5) = 2/16, P(TVD ≥ 0.25) = 10/16.
    assert_eq!(multinomial_tvd_quantile(50, 1, 1e-6), 0.0);
    assert_eq!(multinomial_tvd_quantile(4, 2, 0.2), 0.25);
    assert_eq!(multinomial_tvd_quantile(4, 2, 0.1), 0.5);
}

#[test]
fn gottesman_exact_prep00_means_favour_encoding() {
    let o = c4bench(&["gottesman", "--exact"]);
    let out = stdout(&o);
    let mean = |arm: &str| {
        let v: Vec<f64> = rows(&out).iter().filter(|f| f[1] == "PREP_00" && f[2] == arm).map(|f| f[5].parse().unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean("logical") < mean("physical"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PREP_00 mean_tvd logical="));
}

#[test]
fn aim_grid_rows_and_noiseless_errors() {
    let out = stdout(&c4bench(&["aim", "run", "--noise", &zero_noise(), "--exact"]));
    let r = rows(&out);
    assert_eq!(r.len(), 18);
    for f in &r {
        let rel: f64 = f[9].parse().unwrap();
        assert!(rel < 1e-3, "{f:?}");
    }
    let sampled = stdout(&c4bench(&["aim", "--shots", "200", "--seed", "1"]));
    assert_eq!(rows(&sampled).len(), 18);
}

#[test]
fn aim_scan_emits_one_summary_per_point() {
    let out = stdout(&c4bench(&["aim", "--exact", "--scan-gr", "8.6,17.3,25.9,34.5"]));
    let r = rows(&out);
    assert_eq!(r.iter().map(|f| f[0].as_str()).collect::<Vec<_>>(), ["8.6", "17.3", "25.9", "34.5"]);
    assert_eq!(r[0][3], "0");
}

#[test]
fn tomo_reports_four_metrics_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.json");
    let data = data.to_str().unwrap();
    let args = ["tomo", "--seed", "4", "--shots", "500", "--steps", "4000", "--burn-in", "2000", "--save-dataset", data];
    let first = stdout(&c4bench(&args));
    let r = rows(&first);
    let metrics: Vec<&str> = r.iter().map(|f| f[0].as_str()).collect();
    assert_eq!(metrics, ["physical_pair", "zzzz_projected", "zzzz_projected_xxxx_traced", "both_projected"]);
    assert_eq!(first, stdout(&c4bench(&args)));
    // Reconstructing the saved dataset with the same chain seed gives the same table.
    let replay = stdout(&c4bench(&["tomo", "--seed", "4", "--steps", "4000", "--burn-in", "2000", "--dataset", data]));
    assert_eq!(first, replay);
}

#[test]
fn tomo_rejects_a_malformed_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"shots": 10, "counts": {"XXQZ": [1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]}}"#).unwrap();
    let o = c4bench(&["tomo", "--seed", "1", "--dataset", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ftcheck_default_sweep_passes() {
    let o = c4bench(&["ftcheck"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], true);
    let aim: Vec<&serde_json::Value> =
        report["circuits"].as_array().unwrap().iter().filter(|c| c["name"].as_str().unwrap().starts_with("aim/")).collect();
    assert_eq!(aim.len(), 18);
    // The ansatz gadgets are the only places single faults get through.
    assert!(aim.iter().all(|c| !c["violations"].as_array().unwrap().is_empty()));
}

#[test]
fn ftcheck_flags_a_corrupted_template() {
    let bad = manifest_path("tests/fixtures/corrupted_prep00.txt").display().to_string();
    let o = c4bench(&["ftcheck", "--circuit", &bad, "--prep", "PREP_00", "--layers", "CX"]);
    assert_eq!(o.status.code(), Some(3));
    let good = manifest_path("tests/fixtures/prep00_cx.txt").display().to_string();
    let o = c4bench(&["ftcheck", "--circuit", &good, "--prep", "PREP_00", "--layers", "CX"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn invalid_configuration_exits_two() {
    assert_eq!(c4bench(&["gottesman", "--shots", "10"]).status.code(), Some(2));
    assert_eq!(c4bench(&["aim", "--exact", "--set", "gr_overrotation"]).status.code(), Some(2));
    assert_eq!(c4bench(&["aim", "--exact", "--noise", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(c4bench(&["gottesman", "--exact", "--backend", "quantum"]).status.code(), Some(2));
}

#[test]
fn dump_circuit_matches_fixture() {
    let out = stdout(&c4bench(&["dump-circuit", "--prep", "PREP_00", "--layers", "CX"]));
    let fixture = std::fs::read_to_string(manifest_path("tests/fixtures/prep00_cx.txt")).unwrap();
    assert_eq!(out, fixture);
    let c = NativeCircuit::from_text(&out).unwrap();
    assert_eq!(c.n_sites, 5);
    assert!(c.measured);
    let aim = stdout(&c4bench(&["dump-circuit", "--aim", "5,-1", "--basis", "x", "--arm", "physical"]));
    assert_eq!(NativeCircuit::from_text(&aim).unwrap().count_cz(), 3);
}
