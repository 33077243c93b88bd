//! The subcommands. Each writes its files into the output directory and
//! returns a summary that the binary prints to stdout.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use pdcshape_core::jsa::{apply_filters, build_jsa, jti, pump_grid_for, JointAmplitude};
use pdcshape_core::measurement::{decorrelation_scan, klyshko, simulate_g2, DelayAxis, ScanGeometry, ScanPoint};
use pdcshape_core::pump::{make_pump, pump_time_profile, PumpShape, PumpSpec, SpectralAmplitude};
use pdcshape_core::reconstruction::{run_pipeline, ReconstructionConfig};
use pdcshape_core::schmidt::{g2_from_k, schmidt_decompose, DEFAULT_RANK_THRESHOLD};
use pdcshape_core::{FrequencyGrid, Psf};
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::matrix::{format_value, write_complex, MatrixFile};
use crate::table::{Cell, Table};

/// A resolved configuration bound to an output directory.
pub struct Context {
    pub config: ExperimentConfig,
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    fingerprint: String,
}

impl Context {
    pub fn new(config: ExperimentConfig, out_dir: PathBuf) -> CliResult<Self> {
        let experiment = config.resolve()?;
        fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
        let fingerprint = config.fingerprint();
        Ok(Self { config, experiment, out_dir, fingerprint })
    }

    fn base_meta(&self, command: &str, quantity: &str) -> Vec<(String, String)> {
        vec![
            ("quantity".into(), quantity.into()),
            ("generator".into(), format!("pdcshape {} {command}", env!("CARGO_PKG_VERSION"))),
            ("config_sha256".into(), self.fingerprint.clone()),
            ("seed".into(), self.experiment.seed.to_string()),
        ]
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Writes the normalized configuration next to the outputs.
    fn write_config(&self, files: &mut Vec<PathBuf>) -> CliResult<()> {
        let path = self.path("config.toml");
        fs::write(&path, self.config.to_toml_string()).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
        Ok(())
    }
}

fn push_meta(meta: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    meta.push((key.to_string(), value.to_string()));
}

fn axis_meta(meta: &mut Vec<(String, String)>, which: &str, axis: &str, grid: &FrequencyGrid, unit: &str) {
    push_meta(meta, &format!("{which}_axis"), axis);
    push_meta(meta, &format!("{which}_center_{unit}"), format_value(grid.center()));
    push_meta(meta, &format!("{which}_span_{unit}"), format_value(grid.span()));
}

fn joint_meta(mut meta: Vec<(String, String)>, jsa: &JointAmplitude) -> Vec<(String, String)> {
    axis_meta(&mut meta, "row", "signal frequency", jsa.signal_grid(), "thz");
    axis_meta(&mut meta, "col", "idler frequency", jsa.idler_grid(), "thz");
    meta
}

fn matrix(meta: Vec<(String, String)>, values: Array2<f64>) -> MatrixFile {
    MatrixFile { metadata: meta, values }
}

/// SHA-256 of the PSF kernel in matrix-file form.
pub fn psf_sha256(psf: &Psf) -> String {
    hex::encode(Sha256::digest(MatrixFile::new(psf.kernel().clone()).to_text().as_bytes()))
}

/// Pump amplitude and (filtered) JSA for a pump spec within the configured
/// geometry.
pub struct Source {
    pub pump: SpectralAmplitude,
    pub jsa: JointAmplitude,
    /// Pair transmission through the filters, 1 without filters.
    pub transmission: f64,
}

pub fn build_source(exp: &Experiment, spec: &PumpSpec) -> CliResult<Source> {
    let pg = pump_grid_for(spec, &exp.signal_grid, &exp.idler_grid)?;
    let pump = make_pump(spec, &pg)?;
    let jsa = build_jsa(&pump, &exp.phasematch, &exp.signal_grid, &exp.idler_grid)?;
    let (jsa, transmission) = match &exp.filters {
        Some((fs, fi)) => {
            let f = apply_filters(&jsa, fs, fi)?;
            (f.jsa, f.transmission)
        }
        None => (jsa, 1.0),
    };
    Ok(Source { pump, jsa, transmission })
}

/// Schmidt weights the pump shape produces in the ideal decorrelated
/// geometry, padded with zeros to `len`; `None` where no closed form exists.
pub fn ideal_weights(shape: &PumpShape, len: usize) -> Option<Vec<f64>> {
    let mut w = match shape {
        PumpShape::Gaussian => vec![1.0],
        PumpShape::CosineKernel { order } => vec![1.0 / (order + 1) as f64; order + 1],
        PumpShape::WeightedTimeBins { weights } => {
            let mut w: Vec<f64> = weights.iter().copied().filter(|w| *w > 0.0).collect();
            w.sort_by(|a, b| b.total_cmp(a));
            w
        }
        PumpShape::HermiteGauss { .. } => return None,
    };
    w.resize(len.max(w.len()), 0.0);
    Some(w)
}

fn list_files(f: &mut fmt::Formatter<'_>, files: &[PathBuf]) -> fmt::Result {
    for p in files {
        writeln!(f, "wrote {}", p.display())?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct JsaSummary {
    pub schmidt_number: f64,
    pub rank: usize,
    pub weights: Vec<f64>,
    pub g2_predicted: f64,
    pub filter_transmission: f64,
    pub files: Vec<PathBuf>,
}

impl fmt::Display for JsaSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "K = {:.3}", self.schmidt_number)?;
        writeln!(f, "schmidt_number = {}", self.schmidt_number)?;
        writeln!(f, "rank = {}", self.rank)?;
        writeln!(f, "g2_predicted = {}", self.g2_predicted)?;
        writeln!(f, "filter_transmission = {}", self.filter_transmission)?;
        list_files(f, &self.files)
    }
}

/// Builds the configured JSA and writes it with its JSI, JTI, pump and
/// Schmidt weights.
pub fn cmd_jsa(ctx: &Context) -> CliResult<JsaSummary> {
    let exp = &ctx.experiment;
    let src = build_source(exp, &exp.pump)?;
    let sd = schmidt_decompose(&src.jsa, DEFAULT_RANK_THRESHOLD)?;
    let mut files = Vec::new();
    ctx.write_config(&mut files)?;

    let meta = joint_meta(ctx.base_meta("jsa", "joint spectral amplitude"), &src.jsa);
    let (re, im) = write_complex(&ctx.out_dir, "jsa", &meta, src.jsa.values())?;
    files.extend([re, im]);

    let path = ctx.path("jsi.txt");
    matrix(joint_meta(ctx.base_meta("jsa", "joint spectral intensity"), &src.jsa), src.jsa.intensity())
        .write(&path)?;
    files.push(path);

    let t = jti(&src.jsa);
    let mut meta = ctx.base_meta("jsa", "joint temporal intensity");
    for (which, axis, times) in [("row", "signal time", &t.signal_times), ("col", "idler time", &t.idler_times)] {
        push_meta(&mut meta, &format!("{which}_axis"), axis);
        push_meta(&mut meta, &format!("{which}_first_ps"), format_value(times[0]));
        push_meta(&mut meta, &format!("{which}_step_ps"), format_value(times[1] - times[0]));
    }
    let path = ctx.path("jti.txt");
    matrix(meta, t.values).write(&path)?;
    files.push(path);

    let mut pump_table = Table::new(&["frequency_thz", "re", "im", "intensity"]);
    let g = src.pump.grid();
    for (k, v) in src.pump.values().iter().enumerate() {
        pump_table.push(vec![g.at(k).into(), v.re.into(), v.im.into(), v.norm_sqr().into()]);
    }
    let path = ctx.path("pump.tsv");
    pump_table.write(&path)?;
    files.push(path);

    let profile = pump_time_profile(&src.pump);
    let mut time_table = Table::new(&["time_ps", "re", "im", "intensity", "at_bin_center"]);
    let centers = exp.pump.bin_times();
    let dt_half = profile.time_step() / 2.0;
    for (t, v) in profile.times.iter().zip(&profile.values) {
        let at_bin = centers.iter().any(|c| (c - t).abs() <= dt_half);
        time_table.push(vec![
            (*t).into(),
            v.re.into(),
            v.im.into(),
            v.norm_sqr().into(),
            Cell::Int(at_bin as i64),
        ]);
    }
    let path = ctx.path("pump_time.tsv");
    time_table.write(&path)?;
    files.push(path);

    let ideal = ideal_weights(&exp.pump.shape, sd.weights.len());
    let mut table = Table::new(&["k", "weight", "coefficient", "weight_ideal"]);
    table.meta("schmidt_number", sd.schmidt_number);
    for (k, w) in sd.weights.iter().enumerate() {
        let theory = ideal.as_ref().map_or(f64::NAN, |v| v[k]);
        table.push(vec![(k + 1).into(), (*w).into(), w.sqrt().into(), theory.into()]);
    }
    let path = ctx.path("schmidt.tsv");
    table.write(&path)?;
    files.push(path);

    Ok(JsaSummary {
        schmidt_number: sd.schmidt_number,
        rank: sd.rank,
        weights: sd.weights.clone(),
        g2_predicted: g2_from_k(sd.schmidt_number.max(1.0))?,
        filter_transmission: src.transmission,
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkRow {
    pub n: usize,
    pub k_theory: f64,
    pub k_jsa: f64,
    pub g2_predicted: f64,
    pub g2_theory: f64,
}

#[derive(Debug, Clone)]
pub struct CkSummary {
    pub rows: Vec<CkRow>,
    pub files: Vec<PathBuf>,
}

impl fmt::Display for CkSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# n\tK_theory\tK_jsa\tg2_predicted")?;
        for r in &self.rows {
            writeln!(f, "{}\t{}\t{:.4}\t{:.4}", r.n, r.k_theory, r.k_jsa, r.g2_predicted)?;
        }
        list_files(f, &self.files)
    }
}

/// Highest cosine-kernel order whose spectral peaks (null-to-null width
/// `2/((n+1)Δt)`) still span at least two grid spacings.
pub fn ck_order_limit(spacing_thz: f64, bin_separation_ps: f64) -> usize {
    let fit = (1.0 / (bin_separation_ps * spacing_thz) + 1e-9).floor() as usize;
    fit.saturating_sub(1)
}

/// Schmidt number of cosine-kernel pumps of order 0 through `n_max`.
pub fn cmd_scan_ck(ctx: &Context, n_max: Option<usize>) -> CliResult<CkSummary> {
    let exp = &ctx.experiment;
    let n_max = n_max.unwrap_or(exp.scan.ck_max_order);
    let dt = ctx.config.pump.bin_separation_ps.ok_or_else(|| {
        CliError::key("pump.bin_separation_ps", "is required by scan-ck")
    })?;
    let spacing = exp.signal_grid.spacing().max(exp.idler_grid.spacing());
    let limit = ck_order_limit(spacing, dt);
    if n_max > limit {
        let width = 2.0 / ((n_max + 1) as f64 * dt);
        return Err(CliError::Config(format!(
            "CK order {n_max} has spectral peaks {width:.4} THz wide (null to null), but the \
             frequency grid samples every {spacing:.4} THz and resolves orders up to {limit} only. \
             As with a pulse shaper of limited resolution, the peaks would be smeared and K \
             underestimated; raise `grid.points`, narrow `grid.span_thz` or lower the order"
        )));
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let spec = PumpSpec {
            shape: PumpShape::CosineKernel { order: n },
            bin_separation_ps: dt,
            ..exp.pump.clone()
        };
        let src = build_source(exp, &spec)?;
        let k = schmidt_decompose(&src.jsa, DEFAULT_RANK_THRESHOLD)?.schmidt_number;
        let k_theory = (n + 1) as f64;
        rows.push(CkRow {
            n,
            k_theory,
            k_jsa: k,
            g2_predicted: g2_from_k(k.max(1.0))?,
            g2_theory: g2_from_k(k_theory)?,
        });
    }
    let mut files = Vec::new();
    ctx.write_config(&mut files)?;
    let mut table = Table::new(&["n", "k_theory", "k_jsa", "relative_deviation", "g2_predicted", "g2_theory"]);
    for (k, v) in ctx.base_meta("scan-ck", "Schmidt number per cosine-kernel order") {
        table.meta(&k, v);
    }
    table.meta("bin_separation_ps", dt);
    table.meta("shaper_resolution_thz", exp.pump.shaper_resolution_thz);
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.k_theory.into(),
            r.k_jsa.into(),
            ((r.k_jsa - r.k_theory) / r.k_theory).into(),
            r.g2_predicted.into(),
            r.g2_theory.into(),
        ]);
    }
    let path = ctx.path("scan_ck.tsv");
    table.write(&path)?;
    files.push(path);
    Ok(CkSummary { rows, files })
}

#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub k_expected: usize,
    pub k_truth: f64,
    pub k_raw: f64,
    pub k_deconvolved: f64,
    pub k_pruned: f64,
    /// Largest Schmidt weight beyond `k_expected` after deconvolution.
    pub largest_tail_weight: f64,
    pub weights_truth: Vec<f64>,
    pub weights_raw: Vec<f64>,
    pub weights_deconvolved: Vec<f64>,
    pub recorded_counts: Option<u64>,
    pub psf_sha256: String,
    pub files: Vec<PathBuf>,
}

impl PipelineSummary {
    /// Tail weight relative to the uniform weight `1/k_expected`.
    pub fn edge_ratio(&self) -> f64 {
        self.largest_tail_weight * self.k_expected as f64
    }
}

impl fmt::Display for PipelineSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k_expected = {}", self.k_expected)?;
        writeln!(f, "K_truth = {:.4}", self.k_truth)?;
        writeln!(f, "K_raw = {:.4}", self.k_raw)?;
        writeln!(f, "K_deconvolved = {:.4}", self.k_deconvolved)?;
        writeln!(f, "K_pruned = {:.4}", self.k_pruned)?;
        writeln!(
            f,
            "largest weight beyond k = {}: {:.5} ({:.3} of 1/{})",
            self.k_expected,
            self.largest_tail_weight,
            self.edge_ratio(),
            self.k_expected
        )?;
        if let Some(c) = self.recorded_counts {
            writeln!(f, "recorded_counts = {c}")?;
        }
        writeln!(f, "psf_sha256 = {}", self.psf_sha256)?;
        list_files(f, &self.files)
    }
}

/// Reconstruction settings using the configured pump as the known phase.
pub fn reconstruction_config(exp: &Experiment, src: &Source) -> CliResult<ReconstructionConfig> {
    let rs = &exp.reconstruction;
    // centering on the measured JSI peak shifts the pump argument, so the
    // phase source extends one pump FWHM past the JSA's range on each side
    let pg = src.pump.grid();
    let phase_grid =
        FrequencyGrid::with_max_spacing(pg.center(), pg.span() + 2.0 * exp.pump.fwhm_thz, pg.spacing())?;
    Ok(ReconstructionConfig {
        rl_iterations: rs.rl_iterations,
        rl_floor: rs.rl_floor,
        rl_tolerance: rs.rl_tolerance,
        phase_source: make_pump(&exp.pump, &phase_grid)?,
        center_policy: rs.center_policy,
    })
}

fn delay_meta(meta: &mut Vec<(String, String)>, which: &str, axis: &str, a: &DelayAxis) {
    let g = a.delay_grid();
    push_meta(meta, &format!("{which}_axis"), axis);
    push_meta(meta, &format!("{which}_first_ps"), format_value(g.min()));
    push_meta(meta, &format!("{which}_step_ps"), format_value(g.spacing()));
}

/// Simulates a time-of-flight measurement of the configured state and
/// reconstructs it with and without deconvolution.
pub fn cmd_pipeline(ctx: &Context) -> CliResult<PipelineSummary> {
    let exp = &ctx.experiment;
    let src = build_source(exp, &exp.pump)?;
    let rs = &exp.reconstruction;
    let cfg = reconstruction_config(exp, &src)?;
    let truth = schmidt_decompose(&src.jsa, DEFAULT_RANK_THRESHOLD)?;
    let out = run_pipeline(&src.jsa, &exp.tof, &cfg, rs.k_expected, exp.noise)?;
    let psf_hash = psf_sha256(&exp.tof.psf);

    let mut files = Vec::new();
    ctx.write_config(&mut files)?;

    let mut meta = ctx.base_meta("pipeline", "point-spread function");
    push_meta(&mut meta, "psf_sha256", &psf_hash);
    let path = ctx.path("psf.txt");
    matrix(meta, exp.tof.psf.kernel().clone()).write(&path)?;
    files.push(path);

    let delay_header = |quantity: &str| {
        let mut meta = ctx.base_meta("pipeline", quantity);
        delay_meta(&mut meta, "row", "signal delay", &out.signal_axis);
        delay_meta(&mut meta, "col", "idler delay", &out.idler_axis);
        push_meta(&mut meta, "dispersion_ps_per_nm", format_value(exp.tof.dispersion_ps_per_nm));
        push_meta(&mut meta, "total_counts", format_value(exp.tof.total_counts));
        push_meta(&mut meta, "noise", format!("{:?}", exp.noise).to_lowercase());
        push_meta(&mut meta, "psf_sha256", &psf_hash);
        meta
    };
    for (name, quantity, values) in [
        ("counts.txt", "time-of-flight coincidence counts", &out.measured),
        ("deconvolved.txt", "deconvolved coincidence counts", &out.deconvolved),
    ] {
        let mut meta = delay_header(quantity);
        if name == "deconvolved.txt" {
            push_meta(&mut meta, "rl_iterations", rs.rl_iterations);
        }
        let path = ctx.path(name);
        matrix(meta, values.clone()).write(&path)?;
        files.push(path);
    }
    for (name, quantity, values) in [
        ("jsi_raw.txt", "joint spectral intensity from blurred counts", &out.raw_jsi),
        ("jsi_deconvolved.txt", "joint spectral intensity from deconvolved counts", &out.deconvolved_jsi),
    ] {
        let path = ctx.path(name);
        matrix(joint_meta(ctx.base_meta("pipeline", quantity), &src.jsa), values.clone()).write(&path)?;
        files.push(path);
    }
    for (stem, quantity, jsa) in [
        ("jsa_truth", "true joint spectral amplitude", &src.jsa),
        ("jsa_reconstructed", "reconstructed joint spectral amplitude", &out.reconstruction),
    ] {
        let (re, im) = write_complex(&ctx.out_dir, stem, &joint_meta(ctx.base_meta("pipeline", quantity), jsa), jsa.values())?;
        files.extend([re, im]);
    }
    let t = jti(&out.reconstruction);
    let mut meta = ctx.base_meta("pipeline", "joint temporal intensity of the reconstruction");
    push_meta(&mut meta, "row_first_ps", format_value(t.signal_times[0]));
    push_meta(&mut meta, "col_first_ps", format_value(t.idler_times[0]));
    let path = ctx.path("jti_reconstructed.txt");
    matrix(meta, t.values).write(&path)?;
    files.push(path);

    let len = truth.weights.len().max(out.raw_report.weights.len()).max(out.report.weights.len());
    let rows = len.min(4 * rs.k_expected + 10);
    let get = |w: &[f64], k: usize| w.get(k).copied().unwrap_or(0.0);
    let mut table = Table::new(&["k", "weight_truth", "weight_raw", "weight_deconvolved", "weight_theory"]);
    table.meta("k_expected", rs.k_expected);
    table.meta("schmidt_number_truth", truth.schmidt_number);
    table.meta("schmidt_number_raw", out.raw_report.schmidt_number);
    table.meta("schmidt_number_deconvolved", out.report.schmidt_number);
    table.meta("schmidt_number_pruned", out.report.pruned_schmidt_number);
    for k in 0..rows {
        let theory = if k < rs.k_expected { 1.0 / rs.k_expected as f64 } else { 0.0 };
        table.push(vec![
            (k + 1).into(),
            get(&truth.weights, k).into(),
            get(&out.raw_report.weights, k).into(),
            get(&out.report.weights, k).into(),
            theory.into(),
        ]);
    }
    let path = ctx.path("weights.tsv");
    table.write(&path)?;
    files.push(path);

    Ok(PipelineSummary {
        k_expected: rs.k_expected,
        k_truth: truth.schmidt_number,
        k_raw: out.raw_report.schmidt_number,
        k_deconvolved: out.report.schmidt_number,
        k_pruned: out.report.pruned_schmidt_number,
        largest_tail_weight: out.report.largest_tail_weight(),
        weights_truth: truth.weights.clone(),
        weights_raw: out.raw_report.weights.clone(),
        weights_deconvolved: out.report.weights.clone(),
        recorded_counts: out.record.as_ref().map(|r| r.total()),
        psf_sha256: psf_hash,
        files,
    })
}

#[derive(Debug, Clone)]
pub struct DecorrelationSummary {
    pub best: ScanPoint,
    pub expected_correction_ps2: f64,
    pub points: Vec<ScanPoint>,
    /// Narrower filter FWHM, when filters are configured.
    pub filter_width_thz: Option<f64>,
    pub files: Vec<PathBuf>,
}

impl DecorrelationSummary {
    /// K at the best chirp correction, in FWHM order.
    pub fn k_versus_fwhm(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.chirp_ps2 == self.best.chirp_ps2)
            .map(|p| (p.fwhm_thz, p.schmidt_number))
            .collect()
    }

    /// Spread of K at the best chirp for pump widths at or above the filter
    /// width.
    pub fn saturation_spread(&self) -> Option<f64> {
        let w = self.filter_width_thz?;
        let ks: Vec<f64> = self
            .k_versus_fwhm()
            .into_iter()
            .filter(|(f, _)| *f >= w)
            .map(|(_, k)| k)
            .collect();
        if ks.len() < 2 {
            return None;
        }
        let max = ks.iter().copied().fold(f64::MIN, f64::max);
        let min = ks.iter().copied().fold(f64::MAX, f64::min);
        Some(max - min)
    }
}

impl fmt::Display for DecorrelationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "best_fwhm_thz = {}", self.best.fwhm_thz)?;
        writeln!(f, "best_chirp_correction_ps2 = {}", self.best.chirp_ps2)?;
        writeln!(f, "expected_chirp_correction_ps2 = {}", self.expected_correction_ps2)?;
        writeln!(f, "best_K = {:.5}", self.best.schmidt_number)?;
        writeln!(f, "best_g2 = {:.5}", self.best.g2)?;
        if let (Some(w), Some(s)) = (self.filter_width_thz, self.saturation_spread()) {
            writeln!(f, "K spread for pump FWHM >= filter width {w:.3} THz: {s:.4}")?;
        }
        list_files(f, &self.files)
    }
}

/// Scans Gaussian pump width and chirp correction for the least entangled
/// operating point.
pub fn cmd_scan_decorrelate(ctx: &Context) -> CliResult<DecorrelationSummary> {
    let exp = &ctx.experiment;
    let scan = &exp.scan;
    let (signal_grid, idler_grid) = match ctx.config.grid.span_thz {
        Some(_) => (exp.signal_grid, exp.idler_grid),
        None => {
            let widest = scan.fwhm_thz.iter().copied().fold(exp.phasematch.bandwidth_thz, f64::max);
            let span = 6.0 * widest;
            (
                FrequencyGrid::new(exp.signal_grid.len(), exp.signal_center_thz, span)?,
                FrequencyGrid::new(exp.idler_grid.len(), exp.idler_center_thz, span)?,
            )
        }
    };
    let geometry = ScanGeometry {
        phasematch: exp.phasematch,
        filters: exp.filters,
        pump_center_thz: exp.pump_center_thz,
        setup_chirp_ps2: scan.setup_chirp_ps2,
        signal_grid,
        idler_grid,
    };
    let result = decorrelation_scan(&scan.fwhm_thz, &scan.chirp_ps2, &geometry)?;
    let expected = 0.0 - scan.setup_chirp_ps2;

    let mut files = Vec::new();
    ctx.write_config(&mut files)?;
    let mut table = Table::new(&[
        "fwhm_thz",
        "chirp_correction_ps2",
        "residual_chirp_ps2",
        "schmidt_number",
        "g2",
        "expected_correction_ps2",
    ]);
    for (k, v) in ctx.base_meta("scan-decorrelate", "Schmidt number versus pump width and chirp") {
        table.meta(&k, v);
    }
    table.meta("setup_chirp_ps2", scan.setup_chirp_ps2);
    for p in &result.points {
        table.push(vec![
            p.fwhm_thz.into(),
            p.chirp_ps2.into(),
            (scan.setup_chirp_ps2 + p.chirp_ps2).into(),
            p.schmidt_number.into(),
            p.g2.into(),
            expected.into(),
        ]);
    }
    let path = ctx.path("scan_decorrelate.tsv");
    table.write(&path)?;
    files.push(path);

    Ok(DecorrelationSummary {
        best: result.best,
        expected_correction_ps2: expected,
        points: result.points,
        filter_width_thz: exp.filters.map(|(a, b)| a.fwhm_thz.min(b.fwhm_thz)),
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum G2Mode {
    /// Closed-form values from the Schmidt decomposition.
    Predict,
    /// Monte-Carlo photon-number sampling.
    Simulate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Summary {
    pub mode: G2Mode,
    pub schmidt_number: f64,
    /// Low-gain value `1 + 1/K`.
    pub g2_low_gain: f64,
    /// Exact value for independent thermal modes at the configured gain.
    pub g2_at_gain: f64,
    pub estimate: Option<G2Sample>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Sample {
    pub g2: f64,
    pub stderr: f64,
    pub mean_photons: f64,
    pub pulses: u64,
    pub factorial_moment_sum: u64,
    pub eta_signal: f64,
    pub eta_idler: f64,
}

impl fmt::Display for G2Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "K = {:.5}", self.schmidt_number)?;
        writeln!(f, "g2_low_gain = {:.6}", self.g2_low_gain)?;
        writeln!(f, "g2_at_gain = {:.6}", self.g2_at_gain)?;
        if let Some(s) = &self.estimate {
            writeln!(f, "g2_estimate = {:.6} +/- {:.6}", s.g2, s.stderr)?;
            writeln!(f, "mean_photons = {:.6e}", s.mean_photons)?;
            writeln!(f, "pulses = {}", s.pulses)?;
            writeln!(f, "factorial_moment_sum = {}", s.factorial_moment_sum)?;
            writeln!(f, "klyshko_eta_signal = {:.5}", s.eta_signal)?;
            writeln!(f, "klyshko_eta_idler = {:.5}", s.eta_idler)?;
        }
        list_files(f, &self.files)
    }
}

/// `1 + Σμ²/(Σμ)²` with `μₖ = sinh²(B√λₖ)`.
pub fn thermal_g2(weights: &[f64], gain: f64) -> f64 {
    let mu: Vec<f64> = weights.iter().map(|w| (gain * w.sqrt()).sinh().powi(2)).collect();
    let s: f64 = mu.iter().sum();
    if s > 0.0 {
        1.0 + mu.iter().map(|m| m * m).sum::<f64>() / (s * s)
    } else {
        1.0 + weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Marginal g² of the configured source, predicted or sampled.
pub fn cmd_g2(ctx: &Context, mode: G2Mode) -> CliResult<G2Summary> {
    let exp = &ctx.experiment;
    let src = build_source(exp, &exp.pump)?;
    let sd = schmidt_decompose(&src.jsa, DEFAULT_RANK_THRESHOLD)?;
    let g2_low_gain = g2_from_k(sd.schmidt_number.max(1.0))?;
    let g2_at_gain = thermal_g2(&sd.weights, exp.gain.gain);
    let estimate = match mode {
        G2Mode::Predict => None,
        G2Mode::Simulate => {
            let est = simulate_g2(&sd, &exp.gain)?;
            let kl = klyshko(&exp.gain, exp.gain.pulses)?;
            Some(G2Sample {
                g2: est.g2,
                stderr: est.stderr,
                mean_photons: est.mean_photons,
                pulses: est.pulses,
                factorial_moment_sum: est.factorial_moment_sum,
                eta_signal: kl.eta_signal,
                eta_idler: kl.eta_idler,
            })
        }
    };
    let mut files = Vec::new();
    ctx.write_config(&mut files)?;
    let mut table = Table::new(&["quantity", "value", "stderr", "theory"]);
    for (k, v) in ctx.base_meta("g2", "second-order correlation") {
        table.meta(&k, v);
    }
    table.meta("mode", format!("{mode:?}").to_lowercase());
    table.meta("gain", exp.gain.gain);
    table.push(vec!["schmidt_number".into(), sd.schmidt_number.into(), 0.0.into(), sd.schmidt_number.into()]);
    match &estimate {
        None => {
            table.push(vec!["g2_low_gain".into(), g2_low_gain.into(), 0.0.into(), g2_low_gain.into()]);
            table.push(vec!["g2_at_gain".into(), g2_at_gain.into(), 0.0.into(), g2_at_gain.into()]);
        }
        Some(s) => {
            table.push(vec!["g2".into(), s.g2.into(), s.stderr.into(), g2_at_gain.into()]);
            table.push(vec!["mean_photons".into(), s.mean_photons.into(), f64::NAN.into(), f64::NAN.into()]);
            table.push(vec!["klyshko_eta_signal".into(), s.eta_signal.into(), f64::NAN.into(), exp.gain.eta_signal.into()]);
            table.push(vec!["klyshko_eta_idler".into(), s.eta_idler.into(), f64::NAN.into(), exp.gain.eta_idler.into()]);
        }
    }
    let path = ctx.path(match mode {
        G2Mode::Predict => "g2_predict.tsv",
        G2Mode::Simulate => "g2_simulate.tsv",
    });
    table.write(&path)?;
    files.push(path);
    Ok(G2Summary {
        mode,
        schmidt_number: sd.schmidt_number,
        g2_low_gain,
        g2_at_gain,
        estimate,
        files,
    })
}

/// Output directory precedence: explicit flag, then the configuration, then
/// the environment default, then `pdcshape-out`.
pub fn resolve_out_dir(flag: Option<&Path>, config: &ExperimentConfig, env_default: Option<&str>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.output.directory.as_ref().map(PathBuf::from))
        .or_else(|| env_default.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pdcshape-out"))
}
