use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdcshape_cli::commands::{build_source, cmd_scan_ck};
use pdcshape_cli::config::PumpShapeName;
use pdcshape_cli::matrix::read_complex;
use pdcshape_cli::{cmd_jsa, Context, ExperimentConfig, MatrixFile};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pdcshape(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pdcshape"));
    cmd.args(args).env_remove("PDCSHAPE_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn shipped_configs_round_trip_through_normal_form() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        let normal = cfg.to_toml_string();
        let again = ExperimentConfig::from_toml_str(&normal).unwrap();
        assert_eq!(again, cfg, "{}", path.display());
        assert_eq!(again.to_toml_string(), normal, "{}", path.display());
        cfg.resolve().unwrap();
    }
}

#[test]
fn presets_match_shipped_files() {
    let lab = ExperimentConfig::load(&configs_dir().join("lab.toml")).unwrap();
    assert_eq!(lab, ExperimentConfig::lab());
    let ideal = ExperimentConfig::load(&configs_dir().join("ideal.toml")).unwrap();
    assert_eq!(ideal, ExperimentConfig::ideal());
}

#[test]
fn unknown_keys_are_rejected() {
    let text = "[phasematch]\nprofile = \"sinc\"\nangle_deg = 31.0\nbandwidth_thz = 1.0\n\
                [pump]\nshape = \"gaussian\"\nfwhm = 1.3\nfwhm_thz = 1.3\n";
    let err = ExperimentConfig::from_toml_str(text).unwrap_err().to_string();
    assert!(err.contains("fwhm"), "{err}");
}

#[test]
fn negative_fwhm_exits_with_config_code_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs_dir().join("lab.toml"))
        .unwrap()
        .replace("fwhm_thz = 1.3", "fwhm_thz = -1.3");
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, text).unwrap();
    let out = pdcshape(&["jsa", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("pump.fwhm_thz"), "{stderr}");
}

#[test]
fn ideal_preset_reports_unit_schmidt_number() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdcshape(&["jsa", "--preset", "ideal", "--out", dir.path().to_str().unwrap()], &[]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().next().unwrap() == "K = 1.000", "{stdout}");
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdcshape(&["g2", "predict", "--preset", "ideal", "--grid", "256"], &[("PDCSHAPE_OUT", dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("g2_predict.tsv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let ck = configs_dir().join("ck10_pipeline.toml");
    let ck = ck.to_str().unwrap();
    for args in [
        vec!["jsa", "--preset", "lab", "--grid", "256"],
        vec!["pipeline", "--config", ck, "--grid", "256", "--seed", "5"],
        vec!["g2", "simulate", "--preset", "ideal", "--grid", "96", "--seed", "9"],
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out", d.path().to_str().unwrap()]);
            let out = pdcshape(&full, &[]);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let (fa, fb) = (read_dir_bytes(a.path()), read_dir_bytes(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{args:?}");
    }
}

#[test]
fn pipeline_count_matrix_records_its_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let ck = configs_dir().join("ck10_pipeline.toml");
    let out = pdcshape(
        &["pipeline", "--config", ck.to_str().unwrap(), "--grid", "256", "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let counts = MatrixFile::read(&dir.path().join("counts.txt")).unwrap();
    assert_eq!(counts.get("seed"), Some("11"));
    assert_eq!(counts.get_f64("dispersion_ps_per_nm"), Some(-418.0));
    assert_eq!(counts.get_f64("total_counts"), Some(1e6));
    let psf = MatrixFile::read(&dir.path().join("psf.txt")).unwrap();
    assert_eq!(counts.get("psf_sha256"), psf.get("psf_sha256"));
    assert_eq!(counts.values.dim(), (256, 256));
}

#[test]
fn written_jsa_reads_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::lab();
    cfg.grid.points = 96;
    let ctx = Context::new(cfg, dir.path().to_path_buf()).unwrap();
    cmd_jsa(&ctx).unwrap();
    let (meta, values) = read_complex(dir.path(), "jsa").unwrap();
    let src = build_source(&ctx.experiment, &ctx.experiment.pump).unwrap();
    assert_eq!(&values, src.jsa.values());
    let center: f64 = meta.iter().find(|(k, _)| k == "row_center_thz").unwrap().1.parse().unwrap();
    assert_eq!(center, src.jsa.signal_grid().center());
}

/// Number of lobes in the JSI marginal along νs + νi.
fn sum_axis_lobes(jsi: &ndarray::Array2<f64>) -> usize {
    let (n, m) = jsi.dim();
    let mut marginal = vec![0.0; n + m - 1];
    for ((s, i), v) in jsi.indexed_iter() {
        marginal[s + i] += v;
    }
    let max = marginal.iter().copied().fold(0.0, f64::max);
    (1..marginal.len() - 1)
        .filter(|&k| marginal[k] > 0.2 * max && marginal[k] >= marginal[k - 1] && marginal[k] > marginal[k + 1])
        .count()
}

#[test]
fn lab_ck2_jsi_has_three_antidiagonal_lobes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::lab();
    cfg.pump.shape = PumpShapeName::CosineKernel;
    cfg.pump.order = 2;
    let ctx = Context::new(cfg, dir.path().to_path_buf()).unwrap();
    cmd_jsa(&ctx).unwrap();
    let jsi = MatrixFile::read(&dir.path().join("jsi.txt")).unwrap();
    assert_eq!(sum_axis_lobes(&jsi.values), 3);
}

#[test]
fn scan_ck_single_row_and_grid_guard() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Context::new(ExperimentConfig::ideal(), dir.path().to_path_buf()).unwrap();
    let rows = cmd_scan_ck(&ctx, Some(0)).unwrap().rows;
    assert_eq!(rows.len(), 1);
    assert!((rows[0].k_jsa - 1.0).abs() < 1e-6);
    assert_eq!(rows[0].k_theory, 1.0);

    let out = pdcshape(&["scan-ck", "--preset", "ideal", "--n-max", "30", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("resolves orders up to 19"), "{stderr}");
}

#[test]
fn finite_shaper_resolution_lowers_high_order_k() {
    // lab geometry, 10 GHz shaper
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::lab();
    cfg.pump.shaper_resolution_thz = 0.01;
    let ctx = Context::new(cfg, dir.path().to_path_buf()).unwrap();
    let rows = cmd_scan_ck(&ctx, Some(19)).unwrap().rows;
    let last = rows.last().unwrap();
    assert!(last.k_jsa < last.k_theory, "{last:?}");
    let low = &rows[3];
    assert!(
        last.k_jsa / last.k_theory < low.k_jsa / low.k_theory,
        "ratio at n=19 {} vs n=3 {}",
        last.k_jsa / last.k_theory,
        low.k_jsa / low.k_theory
    );
}
