use crate::output::{config_hash, override_seed, Envelope, Sink};
use crate::CliError;
use nodal::ensembles::{kernel_convergence_report, read_field_sample, write_field_sample, EnsembleSpec, FieldSample, Frame};
use nodal::estimator::{self, DetScalingConfig, DoubleScalingConfig, KostlanTotalConfig, NuConfig, SandwichAuditConfig};
use nodal::grid::Grid;
use nodal::spectral::{ball_volume, check_spectrum as run_checks, BarrierParams, Rho2Verdict, Rho4Verdict, SpectralMeasure, SpectrumReport};
use nodal::topology::{count_in_ball, count_in_window, default_certificate, nodal_domains, sign_grid, zero_components, Component, ConvexWindow, StabilityCertificate};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub struct Context {
    pub seed: Option<u64>,
    pub sink: Sink,
}

fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Parse a config, applying `--seed` when the config has a seed.
fn load_seeded<T: DeserializeOwned>(ctx: &Context, path: &Path) -> Result<T, CliError> {
    let mut v = load(path)?;
    override_seed(&mut v, ctx.seed);
    Ok(serde_json::from_value(v)?)
}

fn envelope<'a, C: Serialize, R: Serialize>(command: &'a str, config: &'a C, seed: Option<u64>, result: R, warnings: Vec<String>) -> Result<Envelope<'a, C, R>, CliError> {
    Ok(Envelope { command, config_hash: config_hash(config)?, seed, config, result, warnings })
}

#[derive(Serialize, Deserialize)]
struct SpectrumConfig {
    measure: SpectralMeasure,
    #[serde(default)]
    sample_size: Option<usize>,
    #[serde(default)]
    barrier: Option<BarrierParams>,
}

#[derive(Serialize)]
struct Verdicts {
    rho1: &'static str,
    rho2: Rho2Verdict,
    rho3: &'static str,
    rho4: Rho4Verdict,
    required_pass: bool,
}

#[derive(Serialize)]
struct SpectrumResult {
    verdicts: Verdicts,
    report: SpectrumReport,
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

pub fn check_spectrum(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let mut v = load(path)?;
    // a bare measure declaration is accepted as well as {"measure": …}
    if v.get("kind").is_some() {
        v = serde_json::json!({ "measure": v });
    }
    let cfg: SpectrumConfig = serde_json::from_value(v)?;
    let report = run_checks(&cfg.measure, cfg.sample_size, cfg.barrier.clone())?;
    let required = report.required_pass();
    let verdicts = Verdicts {
        rho1: pass(report.rho1.pass),
        rho2: report.rho2.clone(),
        rho3: pass(report.rho3.pass),
        rho4: report.rho4.verdict,
        required_pass: required,
    };
    let env = envelope("check-spectrum", &cfg, None, SpectrumResult { verdicts, report }, Vec::new())?;
    ctx.sink.emit("check_spectrum", &env)?;
    if required {
        Ok(())
    } else {
        Err(CliError::Failed("conditions (ρ1)–(ρ3) do not all hold".into()))
    }
}

/// A grid given explicitly, as a centered cube, or as the unit torus.
#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    Explicit(Grid),
    Centered { halfwidth: f64, spacing: f64 },
    Torus { torus: usize },
}

impl GridSpec {
    fn build(&self, m: usize) -> Result<Grid, CliError> {
        Ok(match self {
            GridSpec::Explicit(g) => {
                let mut checked = Grid::new(g.origin.clone(), g.spacing, g.shape.clone())?;
                checked.periodic = g.periodic;
                if checked.dim() != m {
                    return Err(CliError::Usage(format!("grid dimension must be {m}")));
                }
                checked
            }
            GridSpec::Centered { halfwidth, spacing } => Grid::centered(*halfwidth, *spacing, m)?,
            GridSpec::Torus { torus } => Grid::torus(*torus, m, 1.0)?,
        })
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct Draw {
    ensemble: EnsembleSpec,
    grid: GridSpec,
    #[serde(default)]
    base: Option<Vec<f64>>,
    #[serde(default)]
    scale: Option<f64>,
    #[serde(default)]
    index: u64,
}

impl Draw {
    fn sample(&self, seed: u64) -> Result<FieldSample, CliError> {
        self.ensemble.validate()?;
        let m = self.ensemble.dim();
        let grid = self.grid.build(m)?;
        // the torus is sampled in global coordinates
        let default_scale = if grid.periodic { 1.0 } else { self.ensemble.natural_scale() };
        let frame = Frame { base: self.base.clone().unwrap_or_else(|| vec![0.0; m]), scale: self.scale.unwrap_or(default_scale) };
        Ok(self.ensemble.sample(&grid, &frame, seed, self.index)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SampleConfig {
    #[serde(flatten)]
    draw: Draw,
    #[serde(default)]
    seed: u64,
    /// Stem of the output files.
    #[serde(default = "field_stem")]
    name: String,
}

fn field_stem() -> String {
    "field".into()
}

#[derive(Serialize)]
struct SampleResult {
    binary: PathBuf,
    sidecar: PathBuf,
    points: usize,
    bytes: u64,
    sha256: String,
}

pub fn sample(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: SampleConfig = load_seeded(ctx, path)?;
    let field = cfg.draw.sample(cfg.seed)?;
    ctx.sink.ensure_dir()?;
    let (bin, side) = (ctx.sink.path(&format!("{}.bin", cfg.name)), ctx.sink.path(&format!("{}.json", cfg.name)));
    write_field_sample(&field, &bin, &side)?;
    let raw = std::fs::read(&bin)?;
    let res = SampleResult { points: field.grid.len(), bytes: raw.len() as u64, sha256: hex::encode(Sha256::digest(&raw)), binary: bin, sidecar: side };
    let env = envelope("sample", &cfg, Some(cfg.seed), res, Vec::new())?;
    ctx.sink.emit("sample", &env)
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    binary: PathBuf,
    sidecar: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct BallQuery {
    center: Vec<f64>,
    r: f64,
}

#[derive(Serialize, Deserialize)]
struct CensusConfig {
    /// Read a stored sample …
    #[serde(default)]
    field: Option<FieldFile>,
    /// … or draw one.
    #[serde(default)]
    draw: Option<Draw>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    window: Option<ConvexWindow>,
    /// Count components inside `S(R)` for every listed `R`.
    #[serde(default)]
    radii: Vec<f64>,
    #[serde(default)]
    balls: Vec<BallQuery>,
    #[serde(default)]
    zero_tolerance: f64,
}

#[derive(Serialize)]
struct WindowCount {
    #[serde(rename = "R")]
    big_r: f64,
    count: usize,
}

#[derive(Serialize)]
struct BallCount {
    center: Vec<f64>,
    r: f64,
    n: usize,
    n_star: usize,
}

#[derive(Serialize)]
struct DomainSummary {
    positive: usize,
    negative: usize,
    compact: usize,
    regular: usize,
}

#[derive(Serialize)]
struct CensusResult {
    zero_components: usize,
    mixed_cells: usize,
    window_counts: Vec<WindowCount>,
    balls: Vec<BallCount>,
    domains: DomainSummary,
    certified: bool,
    certificate: Option<StabilityCertificate>,
    components: Vec<Component>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<FieldFile>,
}

pub fn census(ctx: &Context, path: &Path, dump_labels: bool) -> Result<(), CliError> {
    let cfg: CensusConfig = load_seeded(ctx, path)?;
    let field = match (&cfg.field, &cfg.draw) {
        (Some(f), None) => read_field_sample(&f.binary, &f.sidecar)?,
        (None, Some(d)) => d.sample(cfg.seed)?,
        _ => return Err(CliError::Usage("census needs exactly one of \"field\" and \"draw\"".into())),
    };
    let m = field.grid.dim();
    let mut warnings = Vec::new();
    let certificate = if field.gradients.is_some() {
        Some(default_certificate(&field)?)
    } else {
        warnings.push("sample has no gradients; no stability certificate".into());
        None
    };
    let certified = certificate.as_ref().is_some_and(|c| c.certified);
    if !certified {
        warnings.push("census is not certified; counts may depend on the grid".into());
    }
    let sg = sign_grid(&field, cfg.zero_tolerance)?;
    let census = zero_components(&sg);
    let window = cfg.window.clone().unwrap_or_else(|| ConvexWindow::unit_ball(m));
    let window_counts = cfg.radii.iter().map(|&r| Ok(WindowCount { big_r: r, count: count_in_window(&census, &window, r)? })).collect::<Result<_, CliError>>()?;
    let balls = cfg
        .balls
        .iter()
        .map(|b| {
            let (n, n_star) = count_in_ball(&census, &b.center, b.r)?;
            Ok(BallCount { center: b.center.clone(), r: b.r, n, n_star })
        })
        .collect::<Result<_, CliError>>()?;
    let d = nodal_domains(&sg, ball_volume(m));
    let labels = if dump_labels { Some(write_labels(ctx, &census)?) } else { None };
    let res = CensusResult {
        zero_components: census.len(),
        mixed_cells: sg.mixed.iter().filter(|&&x| x).count(),
        window_counts,
        balls,
        domains: DomainSummary { positive: d.positive, negative: d.negative, compact: d.compact, regular: d.regular },
        certified,
        certificate,
        components: census.components.clone(),
        labels,
    };
    let seed = cfg.draw.as_ref().map(|_| cfg.seed);
    let env = envelope("census", &cfg, seed, res, warnings)?;
    ctx.sink.emit("census", &env)
}

/// The component label of every cell (−1 for none) as a field on the grid
/// of cell centers.
fn write_labels(ctx: &Context, census: &nodal::topology::NodalCensus) -> Result<FieldFile, CliError> {
    let g = &census.grid;
    let h = g.spacing;
    let origin = g.origin.iter().map(|o| o + 0.5 * h).collect();
    let cells = Grid::new(origin, h, g.cell_shape())?;
    let values = census.labels.iter().map(|&l| if l == u32::MAX { -1.0 } else { l as f64 }).collect();
    let sample = FieldSample { grid: cells, values, gradients: None, meta: None };
    ctx.sink.ensure_dir()?;
    let f = FieldFile { binary: ctx.sink.path("labels.bin"), sidecar: ctx.sink.path("labels.json") };
    write_field_sample(&sample, &f.binary, &f.sidecar)?;
    Ok(f)
}

#[derive(Serialize)]
struct NuRow {
    #[serde(rename = "R")]
    big_r: f64,
    nu_hat: f64,
    stderr: f64,
    bracket_low: Option<f64>,
    bracket_high: Option<f64>,
    certified_fraction: f64,
}

pub fn estimate_nu(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: NuConfig = load_seeded(ctx, path)?;
    cfg.validate()?;
    eprintln!("estimate-nu: {} samples at spacing {}", cfg.samples, cfg.spacing);
    let est = estimator::estimate_nu(&cfg)?;
    let bracket = est.tightest_bracket().map(|b| (b.bracket_low, b.bracket_high));
    let rows: Vec<NuRow> = est
        .r_trace
        .iter()
        .map(|t| NuRow {
            big_r: t.big_r,
            nu_hat: t.nu_hat,
            stderr: t.stderr,
            bracket_low: bracket.map(|b| b.0),
            bracket_high: bracket.map(|b| b.1),
            certified_fraction: est.certified_fraction,
        })
        .collect();
    ctx.sink.csv("estimate_nu", &rows)?;
    let warnings = est.warnings.clone();
    let env = envelope("estimate-nu", &cfg, Some(cfg.seed), est, warnings)?;
    ctx.sink.emit("estimate_nu", &env)
}

pub fn double_scaling(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: DoubleScalingConfig = load_seeded(ctx, path)?;
    cfg.ensemble.validate()?;
    eprintln!("double-scaling: {} scales × {} samples", cfg.scales.len(), cfg.samples);
    let est = estimator::double_scaling(&cfg)?;
    ctx.sink.csv("double_scaling", &est.table)?;
    let env = envelope("double-scaling", &cfg, Some(cfg.seed), est, Vec::new())?;
    ctx.sink.emit("double_scaling", &env)
}

pub fn kostlan_total(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: KostlanTotalConfig = load_seeded(ctx, path)?;
    eprintln!("kostlan-total: degrees {:?}, {} samples each", cfg.degrees, cfg.samples);
    let est = estimator::total_count_kostlan(&cfg)?;
    ctx.sink.csv("kostlan_total", &est.rows)?;
    let warnings = est.warnings.clone();
    let env = envelope("kostlan-total", &cfg, Some(cfg.seed), est, warnings)?;
    ctx.sink.emit("kostlan_total", &env)
}

pub fn det_scaling(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: DetScalingConfig = load_seeded(ctx, path)?;
    eprintln!("det-scaling: {} paired samples", cfg.samples);
    let res = estimator::det_scaling_test(&cfg)?;
    ctx.sink.csv("det_scaling", std::slice::from_ref(&res))?;
    let env = envelope("det-scaling", &cfg, Some(cfg.seed), res, Vec::new())?;
    ctx.sink.emit("det_scaling", &env)
}

fn default_extent() -> f64 {
    3.0
}

#[derive(Serialize, Deserialize)]
struct KernelConfig {
    ensemble: EnsembleSpec,
    x: Vec<f64>,
    /// Half-width of the probe box `‖u‖∞, ‖v‖∞ ≤ extent`.
    #[serde(default = "default_extent")]
    extent: f64,
    l_sequence: Vec<f64>,
}

#[derive(Serialize)]
struct KernelResult {
    #[serde(flatten)]
    report: nodal::ensembles::ScaledKernelReport,
    strictly_decreasing: bool,
}

#[derive(Serialize)]
struct KernelRow {
    #[serde(rename = "L")]
    l: f64,
    sup_error: f64,
}

pub fn kernel_converge(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: KernelConfig = serde_json::from_value(load(path)?)?;
    cfg.ensemble.validate()?;
    let report = kernel_convergence_report(&cfg.ensemble, &cfg.x, cfg.extent, &cfg.l_sequence)?;
    let rows: Vec<KernelRow> = report.l_sequence.iter().zip(&report.sup_errors).map(|(&l, &e)| KernelRow { l, sup_error: e }).collect();
    ctx.sink.csv("kernel_converge", &rows)?;
    let strictly_decreasing = report.strictly_decreasing();
    let env = envelope("kernel-converge", &cfg, None, KernelResult { report, strictly_decreasing }, Vec::new())?;
    ctx.sink.emit("kernel_converge", &env)
}

#[derive(Serialize)]
struct AuditRow {
    r: f64,
    violations: usize,
    worst_gap: f64,
}

pub fn sandwich_audit(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg: SandwichAuditConfig = load_seeded(ctx, path)?;
    cfg.validate()?;
    eprintln!("sandwich-audit: {} samples, R = {}", cfg.samples, cfg.big_r);
    let audit = estimator::sandwich_audit(&cfg)?;
    let rows: Vec<AuditRow> = audit.rows.iter().map(|r| AuditRow { r: r.r, violations: r.violations, worst_gap: r.worst_gap }).collect();
    ctx.sink.csv("sandwich_audit", &rows)?;
    let violations = audit.violations;
    let env = envelope("sandwich-audit", &cfg, Some(cfg.seed), audit, Vec::new())?;
    ctx.sink.emit("sandwich_audit", &env)?;
    if violations == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{violations} sandwich violations")))
    }
}
