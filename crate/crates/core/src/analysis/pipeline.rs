use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::compare::{comparison_summary, diff_means_ci, ComparisonResult};
use super::distribution::{moran_distribution, MoranDistribution};
use super::select::{select_kernel, KernelSelectionReport};
use crate::epidemic::{incidents_csv, run as run_simulation, tallies_csv, Seeding, TransitionModel};
use crate::error::{Error, Result};
use crate::gp::{fit, parse_kernel, DrawKind, FitOptions, GPModel, ModelFile};
use crate::io::{csv_writer, derive_seed, finish_csv, read_to_string, sha256_hex, write_bytes};
use crate::spatial::{bin_incidents, build_weights, row_standardize, SpatialField, WeightScheme};
use crate::synthpop::{agents_csv, generate_population, generate_zones, places_csv, zones_csv, Population, PopulationConfig, Zone};

pub const DEFAULT_KERNELS: [&str; 3] = [
    "scale(v=1, rbf(l=1))",
    "scale(v=1, matern(nu=1.5,l=1))",
    "scale(v=1, rbf(l=1)*matern(nu=1.5,l=1))",
];

fn default_horizon() -> u32 {
    24
}
fn default_month() -> u32 {
    12
}
fn default_weights() -> String {
    "inverse:1.0".into()
}
fn default_kernels() -> Vec<String> {
    DEFAULT_KERNELS.iter().map(|s| s.to_string()).collect()
}
fn default_draws() -> usize {
    200
}
fn default_draw_kind() -> DrawKind {
    DrawKind::Predictive
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_restarts() -> usize {
    5
}
fn default_level() -> f64 {
    0.95
}

/// Two-condition comparison run. Paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub master_seed: u64,
    pub population: PathBuf,
    #[serde(default = "default_horizon")]
    pub horizon_months: u32,
    /// Zero-based month index whose incidents are analysed.
    #[serde(default = "default_month")]
    pub analysis_month: u32,
    #[serde(default)]
    pub allow_edge_months: bool,
    #[serde(default = "default_weights")]
    pub weights: String,
    #[serde(default)]
    pub row_standardize: bool,
    #[serde(default = "default_kernels")]
    pub kernels: Vec<String>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Moran draws include observation noise unless set to `latent`.
    #[serde(default = "default_draw_kind")]
    pub draw_kind: DrawKind,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub standardize_targets: bool,
    #[serde(default)]
    pub log1p_targets: bool,
    #[serde(default)]
    pub geojson: bool,
    #[serde(default = "default_level")]
    pub level: f64,
    pub conditions: Vec<ConditionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub label: String,
    pub model: PathBuf,
    pub seeding: Seeding,
}

impl PipelineConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(src).map_err(|e| Error::Config(format!("pipeline config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.conditions.len() != 2 {
            return bad(format!(
                "exactly two [[conditions]] are required, found {}",
                self.conditions.len()
            ));
        }
        for c in &self.conditions {
            if c.label.is_empty()
                || !c.label.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
            {
                return bad(format!(
                    "condition label `{}` must be non-empty and use only letters, digits, `_` or `-`",
                    c.label
                ));
            }
        }
        if self.conditions[0].label == self.conditions[1].label {
            return bad(format!("condition labels must differ, both are `{}`", self.conditions[0].label));
        }
        if self.horizon_months == 0 {
            return bad("horizon_months must be at least 1".into());
        }
        if self.analysis_month >= self.horizon_months {
            return bad(format!(
                "analysis_month {} is outside the {}-month horizon (months are numbered from 0)",
                self.analysis_month, self.horizon_months
            ));
        }
        let edge = self.analysis_month == 0 || self.analysis_month + 1 == self.horizon_months;
        if edge && !self.allow_edge_months {
            return bad(format!(
                "analysis_month {} is the first or last simulated month; set allow_edge_months = true to use it anyway",
                self.analysis_month
            ));
        }
        self.weights.parse::<WeightScheme>()?;
        if self.kernels.is_empty() {
            return bad("at least one kernel candidate is required".into());
        }
        for k in &self.kernels {
            parse_kernel(k)?;
        }
        if self.draws < 2 {
            return bad(format!("draws must be at least 2, got {}", self.draws));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        Ok(())
    }

    pub fn edge_month_warning(&self) -> Option<String> {
        let edge = self.analysis_month == 0 || self.analysis_month + 1 == self.horizon_months;
        edge.then(|| {
            format!(
                "warning: analysing edge month {} of a {}-month horizon",
                self.analysis_month, self.horizon_months
            )
        })
    }
}

/// A config with every referenced file read and parsed.
#[derive(Debug, Clone)]
pub struct LoadedPipeline {
    pub config: PipelineConfig,
    pub config_text: String,
    pub population: PopulationConfig,
    pub population_text: String,
    pub models: Vec<TransitionModel>,
    pub model_texts: Vec<String>,
}

impl LoadedPipeline {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        LoadedPipeline::from_parts(&text, base)
            .map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })
    }

    pub fn from_parts(config_text: &str, base: &Path) -> Result<Self> {
        // Validation is left to `run_pipeline` so callers can apply
        // overrides (seed, flags) first.
        let config: PipelineConfig = toml::from_str(config_text)
            .map_err(|e| Error::Config(format!("pipeline config: {e}")))?;
        let pop_path = base.join(&config.population);
        let population_text = read_to_string(&pop_path)?;
        let population = PopulationConfig::from_toml_str(&population_text)
            .map_err(|e| Error::Config(format!("{}: {e}", pop_path.display())))?;
        let mut models = Vec::new();
        let mut model_texts = Vec::new();
        for c in &config.conditions {
            let p = base.join(&c.model);
            let t = read_to_string(&p)?;
            let m = TransitionModel::from_toml_str(&t)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            models.push(m);
            model_texts.push(t);
        }
        Ok(LoadedPipeline {
            config: config.clone(),
            config_text: config_text.to_string(),
            population,
            population_text,
            models,
            model_texts,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config.master_seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub label: String,
    pub field: SpatialField,
    pub ever_infected: usize,
    pub incidents: usize,
    pub selection: KernelSelectionReport,
    pub model: GPModel,
    pub moran: MoranDistribution,
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub master_seed: u64,
    pub conditions: Vec<ConditionReport>,
    pub comparison: ComparisonResult,
    pub artifacts: Vec<Artifact>,
}

impl PipelineReport {
    /// `master_seed` followed by `<sha256>  <file>` per artifact, sorted by
    /// file name.
    pub fn manifest(&self) -> String {
        let mut lines = vec![format!("master_seed={}", self.master_seed)];
        let mut entries: Vec<(&str, String)> = self
            .artifacts
            .iter()
            .map(|a| (a.name.as_str(), sha256_hex(&a.bytes)))
            .collect();
        entries.sort();
        for (name, digest) in entries {
            lines.push(format!("{digest}  {name}"));
        }
        lines.join("\n") + "\n"
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.conditions {
            out.push(format!(
                "condition={} incidents={} ever_infected={} kernel={} lml={} moran_mean={} moran_std={} degenerate_draws={}",
                c.label,
                c.incidents,
                c.ever_infected,
                c.model.kernel(),
                c.model.log_marginal_likelihood(),
                c.moran.mean,
                c.moran.std,
                c.moran.degenerate_draws
            ));
        }
        out.push(comparison_summary(&self.comparison));
        out
    }

    /// Writes every artifact and `manifest.txt` into `dir`, which must exist.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for a in &self.artifacts {
            let p = dir.join(&a.name);
            write_bytes(&p, &a.bytes)?;
            written.push(p);
        }
        let p = dir.join("manifest.txt");
        write_bytes(&p, self.manifest().as_bytes())?;
        written.push(p);
        Ok(written)
    }
}

/// Which stages to keep as artifacts. The acceptance experiments skip the
/// large CSVs to save time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArtifactOptions {
    pub population_csv: bool,
    pub incidents_csv: bool,
}

impl Default for ArtifactOptions {
    fn default() -> Self {
        ArtifactOptions {
            population_csv: true,
            incidents_csv: true,
        }
    }
}

pub fn run_pipeline(p: &LoadedPipeline) -> Result<PipelineReport> {
    run_pipeline_with(p, ArtifactOptions::default())
}

pub fn run_pipeline_with(p: &LoadedPipeline, opts: ArtifactOptions) -> Result<PipelineReport> {
    let cfg = &p.config;
    cfg.validate()?;
    let master = cfg.master_seed;
    let mut artifacts = Vec::new();
    let mut push = |name: String, bytes: Vec<u8>| artifacts.push(Artifact { name, bytes });

    let pc = &p.population;
    let zones = generate_zones(pc.grid_rows, pc.grid_cols, pc.region).map_err(|e| e.in_stage("synthpop"))?;
    let pop = generate_population(pc, &zones, derive_seed(master, "synthpop")).map_err(|e| e.in_stage("synthpop"))?;
    push("zones.csv".into(), zones_csv(&zones));
    if opts.population_csv {
        push("agents.csv".into(), agents_csv(&pop));
        push("places.csv".into(), places_csv(&pop));
    }
    push(
        "pipeline.toml".into(),
        toml::to_string(cfg).expect("config serializes").into_bytes(),
    );
    push("population.toml".into(), p.population_text.clone().into_bytes());

    let scheme: WeightScheme = cfg.weights.parse()?;
    let mut w = build_weights(&zones, scheme).map_err(|e| e.in_stage("weights"))?;
    if cfg.row_standardize {
        w = row_standardize(&w).map_err(|e| e.in_stage("weights"))?;
    }
    let x: Vec<[f64; 2]> = zones.iter().map(|z| z.centroid.to_array()).collect();
    let fit_opts = FitOptions {
        restarts: cfg.restarts,
        seed: derive_seed(master, "fit"),
        standardize_targets: cfg.standardize_targets,
        log1p_targets: cfg.log1p_targets,
        ..FitOptions::default()
    };

    let mut reports = Vec::new();
    let mut fits = FitCache::default();
    for (i, (c, model)) in cfg.conditions.iter().zip(&p.models).enumerate() {
        let stage = |s: &str| format!("{s} [{}]", c.label);
        push(format!("disease_{}.toml", c.label), p.model_texts[i].clone().into_bytes());
        let report = run_condition(cfg, c, model, &pop, &zones, &x, &w, &fit_opts, &mut fits, i, opts, &mut push)
            .map_err(|e| match e {
                Error::Stage { .. } => e,
                other => other.in_stage(stage("condition")),
            })?;
        reports.push(report);
    }

    let comparison = diff_means_ci(&reports[0].moran, &reports[1].moran, cfg.level)?;
    push("comparison.csv".into(), comparison.to_csv());
    Ok(PipelineReport {
        master_seed: master,
        conditions: reports,
        comparison,
        artifacts,
    })
}

/// Selection and fit results keyed by field values. Fitting is a pure
/// function of the field under shared options, so identical fields (as in
/// a control run) reuse the first result.
type FitCache = Vec<(Vec<f64>, KernelSelectionReport, GPModel)>;

#[allow(clippy::too_many_arguments)]
fn run_condition(
    cfg: &PipelineConfig,
    c: &ConditionConfig,
    model: &TransitionModel,
    pop: &Population,
    zones: &[Zone],
    x: &[[f64; 2]],
    w: &crate::spatial::WeightMatrix,
    fit_opts: &FitOptions,
    fits: &mut FitCache,
    index: usize,
    artifacts: ArtifactOptions,
    push: &mut impl FnMut(String, Vec<u8>),
) -> Result<ConditionReport> {
    let label = &c.label;
    let unit = model.step_unit;
    let horizon = unit.steps_for_months(cfg.horizon_months);
    let out = run_simulation(model, pop, &c.seeding, horizon, derive_seed(cfg.master_seed, "simulate"))
        .map_err(|e| e.in_stage(format!("simulate [{label}]")))?;
    let window = unit.month_window(cfg.analysis_month);
    let field = bin_incidents(&out.log, zones, window, label.clone()).map_err(|e| e.in_stage(format!("bin [{label}]")))?;

    let (selection, gp) = match fits.iter().find(|(y, _, _)| *y == field.values) {
        Some((_, selection, gp)) => (selection.clone(), gp.clone()),
        None => {
            let selection = select_kernel(
                &cfg.kernels,
                x,
                &field.values,
                cfg.train_fraction,
                derive_seed(cfg.master_seed, "split"),
                fit_opts,
            )
            .map_err(|e| e.in_stage(format!("select [{label}]")))?;
            let winner = parse_kernel(selection.winner_spec())?;
            let gp = fit(&winner, x, &field.values, fit_opts).map_err(|e| e.in_stage(format!("fit [{label}]")))?;
            fits.push((field.values.clone(), selection.clone(), gp.clone()));
            (selection, gp)
        }
    };
    let moran = moran_distribution(
        &gp,
        zones,
        w,
        cfg.draws,
        derive_seed(cfg.master_seed, &format!("moran:{index}")),
        cfg.draw_kind,
        label,
    )
    .map_err(|e| e.in_stage(format!("moran [{label}]")))?;

    let ids: Vec<usize> = zones.iter().map(|z| z.zone_id).collect();
    let predicted = gp.predict(x);
    if artifacts.incidents_csv {
        push(format!("incidents_{label}.csv"), incidents_csv(&out.log));
    }
    push(format!("tallies_{label}.csv"), tallies_csv(&out.tallies));
    push(format!("field_{label}.csv"), field.to_csv());
    push(format!("kernel_report_{label}.csv"), selection.to_csv());
    push(
        format!("model_{label}.toml"),
        ModelFile::from_model(&gp, &ids, Some(format!("field_{label}.csv")))?
            .to_toml_string()
            .into_bytes(),
    );
    push(format!("posterior_mean_{label}.csv"), posterior_mean_csv(&ids, &predicted));
    push(format!("moran_samples_{label}.csv"), moran.to_csv());
    if cfg.geojson {
        push(format!("zones_{label}.geojson"), zones_geojson(zones, &field, &predicted));
    }
    Ok(ConditionReport {
        label: label.clone(),
        incidents: out.log.records.len(),
        ever_infected: out.ever_infected,
        field,
        selection,
        model: gp,
        moran,
    })
}

fn posterior_mean_csv(ids: &[usize], predicted: &[(f64, f64)]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["zone_id", "mean", "std"]).expect("in-memory write");
    for (id, (m, s)) in ids.iter().zip(predicted) {
        w.write_record([id.to_string(), m.to_string(), s.to_string()])
            .expect("in-memory write");
    }
    finish_csv(w)
}

/// Zone polygons with `count` and `posterior_mean` properties, for
/// choropleth rendering.
pub fn zones_geojson(zones: &[Zone], field: &SpatialField, predicted: &[(f64, f64)]) -> Vec<u8> {
    let features: Vec<serde_json::Value> = zones
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let rings: Vec<Vec<[f64; 2]>> = match &z.polygons {
                Some(polys) => polys
                    .iter()
                    .map(|ring| {
                        let mut r: Vec<[f64; 2]> = ring.iter().map(|p| p.to_array()).collect();
                        if r.first() != r.last() {
                            r.push(r[0]);
                        }
                        r
                    })
                    .collect(),
                None => {
                    let b = &z.bounds;
                    vec![vec![
                        [b.min_x, b.min_y],
                        [b.max_x, b.min_y],
                        [b.max_x, b.max_y],
                        [b.min_x, b.max_y],
                        [b.min_x, b.min_y],
                    ]]
                }
            };
            let coords: Vec<Vec<Vec<[f64; 2]>>> = rings.into_iter().map(|r| vec![r]).collect();
            json!({
                "type": "Feature",
                "geometry": { "type": "MultiPolygon", "coordinates": coords },
                "properties": {
                    "zone_id": z.zone_id,
                    "count": field.values[i],
                    "posterior_mean": predicted[i].0,
                    "posterior_std": predicted[i].1,
                },
            })
        })
        .collect();
    let doc = json!({ "type": "FeatureCollection", "features": features });
    let mut out = serde_json::to_vec_pretty(&doc).expect("json serializes");
    out.push(b'\n');
    out
}

/// Creates `dir` if needed. A non-empty directory is refused unless
/// `force` is set.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        if !dir.is_dir() {
            return Err(Error::Argument(format!("{} exists and is not a directory", dir.display())));
        }
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() && !force {
            return Err(Error::Argument(format!(
                "output directory {} is not empty; pass --force to overwrite",
                dir.display()
            )));
        }
        Ok(())
    } else {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
    }
}
