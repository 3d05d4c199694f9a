use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvp")).args(args).output().expect("failed to run dvp")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Real parts of a spectrum CSV (`k..., re, im`).
fn spectrum_values(path: &Path) -> Vec<f64> {
    data_rows(path).iter().map(|r| r[r.len() - 2].parse().unwrap()).collect()
}

const EXAMPLE: &str = "m0 = 10 -4; 6 4\nfactors = jy+\ng = tensor_linear(alpha = 1/10)\n";

#[test]
fn pattern_of_scaled_identity() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "m0 = 2 0; 0 2\n");
    let out = dir.path().join("out");
    let o = dvp(&["pattern", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(data_rows(&out.join("pattern.csv")).len(), 4);
    assert_eq!(data_rows(&out.join("genset.csv")).len(), 4);
}

#[test]
fn pattern_of_fine_example_matrix() {
    let dir = TempDir::new().unwrap();
    // J N with J = [[1, 1], [0, 2]]
    let cfg = write_config(dir.path(), "a.cfg", "m = 16 0; 12 8\nvariant = I\n");
    let out = dir.path().join("out");
    let o = dvp(&["pattern", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = data_rows(&out.join("pattern.csv"));
    assert_eq!(rows.len(), 128);
    // unit cube representatives
    for r in &rows {
        for y in &r[4..6] {
            let v: f64 = y.parse().unwrap();
            assert!((0.0..1.0).contains(&v));
        }
    }
    let o = dvp(&["pattern", "--config", &cfg, "--out", out.to_str().unwrap(), "--variant", "S"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("variant: S"));
}

#[test]
fn malformed_matrix_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "m0 = 1 2; 3\n");
    let o = dvp(&["pattern", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m0"));
    let cfg = write_config(dir.path(), "b.cfg", "m0 = 1 1; 1 1\n");
    assert_eq!(dvp(&["pattern", "--config", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(dvp(&["verify", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn dft_agrees_with_naive() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "m0 = 10 -4; 6 4\nbuiltin = random\nseed = 3\n");
    let out = dir.path().join("out");
    let o = dvp(&["dft", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let err: f64 = text.lines().find_map(|l| l.strip_prefix("naive_max_abs_diff: ")).unwrap().parse().unwrap();
    assert!(err < 1e-10);
    assert_eq!(data_rows(&out.join("dft.csv")).len(), 64);
}

#[test]
fn example_spectra_plateau_and_edge() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", EXAMPLE);
    let out = dir.path().join("out");
    let o = dvp(&["build", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    for f in ["phi_0.csv", "phi_1.csv", "psi_0.csv", "twoscale_0.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let phi = spectrum_values(&out.join("phi_0.csv"));
    let max = phi.iter().copied().fold(0.0, f64::max);
    assert!((max - 0.125).abs() < 1e-12);
    // half the plateau on the generating-set boundary
    assert!(phi.iter().any(|v| (v - 0.0625).abs() < 1e-12));
    let header = fs::read_to_string(out.join("twoscale_0.csv")).unwrap();
    assert!(header.starts_with("h1,h2,a_re,a_im,b_re,b_im"));
    assert_eq!(data_rows(&out.join("twoscale_0.csv")).len(), 128);
}

#[test]
fn dirichlet_spectra_are_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "m0 = 4 0; 0 4\nfactors = jx | jd | jy\ng = characteristic\n");
    let out = dir.path().join("out");
    assert!(dvp(&["build", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    for (l, m) in [16.0f64, 32.0, 64.0, 128.0].iter().enumerate() {
        let vals = spectrum_values(&out.join(format!("phi_{l}.csv")));
        assert_eq!(vals.len(), *m as usize);
        for v in vals {
            assert!((v - 1.0 / m.sqrt()).abs() < 1e-15);
        }
    }
}

#[test]
fn one_dimensional_chain() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "m0 = 16\nfactors = 2\ng = tensor_linear(alpha = 1/8)\n");
    let out = dir.path().join("out");
    let o = dvp(&["build", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let phi = data_rows(&out.join("phi_1.csv"));
    // plateau |k| <= 12, ramp to |k| = 19 on M = 32
    assert_eq!(phi.len(), 39);
    assert!(out.join("psi_0.csv").exists());
}

#[test]
fn wavelets_need_a_dyadic_chain() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        "m0 = 4 0; 0 4\nfactors = 3 0; 0 1\ng = tensor_linear(alpha = 1/10)\nwavelets = true\n",
    );
    let o = dvp(&["build", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dyadic"));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = write_config(dir.path(), "ok.cfg", "m0 = 8 0; 0 8\nfactors = jx | jy\ng = tensor_linear(alpha = 1/20)\n");
    let o = dvp(&["verify", "--config", &ok]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("passed: true"));

    let inject = write_config(
        dir.path(),
        "inject.cfg",
        "m0 = 8 0; 0 8\nfactors = jx | jy\ng = tensor_linear(alpha = 1/20)\ninject = mr1:1\n",
    );
    let o = dvp(&["verify", "--config", &inject]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("level.1.mr1_dim_ok: false"));

    let reduction = "m0 = 8 0; 0 8\nfactors = jx | jy\ng = tensor_linear(alpha = 1/10)\nreduction = double\nreduction_factor = jx\n";
    let reported = write_config(dir.path(), "r.cfg", reduction);
    let o = dvp(&["verify", "--config", &reported]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("reduction.holds: false"));
    let required = write_config(dir.path(), "rr.cfg", &format!("{reduction}require_reduction = true\n"));
    assert_eq!(dvp(&["verify", "--config", &required]).status.code(), Some(1));
}

#[test]
fn decompose_roundtrip_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        "m0 = 4 0; 0 4\nfactors = jx | jd | jy\ng = tensor_linear(alpha = 1/10)\nbuiltin = random\nseed = 11\n",
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = dvp(&["decompose", "--config", &cfg, "--out", out.to_str().unwrap(), "--roundtrip"]);
        assert!(o.status.success(), "{o:?}");
        let text = stdout(&o);
        let err: f64 = text.lines().find_map(|l| l.strip_prefix("roundtrip_max_error: ")).unwrap().parse().unwrap();
        assert!(err < 1e-9);
        out
    };
    let a = run("a");
    let b = run("b");
    for f in ["coarse_0.csv", "detail_0.csv", "detail_1.csv", "detail_2.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let partial = dir.path().join("p");
    let o = dvp(&["decompose", "--config", &cfg, "--out", partial.to_str().unwrap(), "--depth", "1"]);
    assert!(o.status.success());
    assert!(partial.join("coarse_2.csv").exists());
    assert!(!partial.join("detail_1.csv").exists());
    assert_eq!(dvp(&["decompose", "--config", &cfg, "--depth", "4"]).status.code(), Some(2));
}

#[test]
fn zero_input_gives_zero_coefficients() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        "m0 = 4 0; 0 4\nfactors = jx | jy\ng = tensor_linear(alpha = 1/10)\nbuiltin = zero\n",
    );
    let out = dir.path().join("out");
    assert!(dvp(&["decompose", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    for f in ["coarse_0.csv", "detail_0.csv", "detail_1.csv"] {
        for r in data_rows(&out.join(f)) {
            let re: f64 = r[r.len() - 2].parse().unwrap();
            let im: f64 = r[r.len() - 1].parse().unwrap();
            assert_eq!((re, im), (0.0, 0.0));
        }
    }
}

#[test]
fn csv_input_size_is_checked() {
    let dir = TempDir::new().unwrap();
    let samples: String = (0..63).map(|i| format!("{}\n", i as f64 / 10.0)).collect();
    fs::write(dir.path().join("s.csv"), format!("value\n{samples}")).unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        "m0 = 4 0; 0 4\nfactors = jx | jy\ng = tensor_linear(alpha = 1/10)\ninput = s.csv\n",
    );
    let o = dvp(&["decompose", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(dir.path().join("s.csv"), format!("value\n{samples}6.3\n")).unwrap();
    let o = dvp(&["decompose", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap(), "--roundtrip"]);
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn pgm_input_and_renders() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        "m0 = 4 4; -4 4\nfactors = jx | jy | jd\ng = tensor_linear(alpha = 1/10)\nbuiltin = boxspline2d\n",
    );
    let out = dir.path().join("out");
    let o = dvp(&["decompose", "--config", &cfg, "--out", out.to_str().unwrap(), "--depth", "2"]);
    assert!(o.status.success(), "{o:?}");
    let pgm = fs::read(out.join("detail_2.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n16 16\n255\n"));
    assert_eq!(pgm.len(), 13 + 256);
    assert!(fs::read_to_string(out.join("detail_2.pgm.txt")).unwrap().contains("max:"));

    // feed the render back in as samples on the same grid
    fs::copy(out.join("detail_2.pgm"), dir.path().join("in.pgm")).unwrap();
    let cfg = write_config(
        dir.path(),
        "b.cfg",
        "m0 = 4 4; -4 4\nfactors = jx | jy | jd\ng = tensor_linear(alpha = 1/10)\ninput = in.pgm\n",
    );
    let o = dvp(&["decompose", "--config", &cfg, "--out", dir.path().join("o2").to_str().unwrap(), "--roundtrip"]);
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn demo_writes_images_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "scale = 8\n");
    let out = dir.path().join("out");
    let o = dvp(&["demo-directional", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{o:?}");
    for f in ["g_N1.pgm", "g_N2.pgm", "g_N1_dirichlet.pgm", "g_N2_dirichlet.pgm", "summary.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("jump_lines: 12"));
    assert!(summary.contains("grid: 64 0; 0 64"));
    let bad = write_config(dir.path(), "b.cfg", "scale = 6\n");
    assert_eq!(dvp(&["demo-directional", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dvp(&["nonsense"]).status.code(), Some(2));
    assert_eq!(dvp(&["pattern"]).status.code(), Some(2));
}
