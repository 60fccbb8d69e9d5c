use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use epigp::analysis::{
    moran_distribution, prepare_output_dir, run_pipeline, LoadedPipeline,
};
use epigp::epidemic::{incidents_csv, read_incidents_csv, run, tallies_csv, Seeding, StepUnit, TransitionModel};
use epigp::gp::{fit, parse_kernel, DrawKind, FitOptions, ModelFile};
use epigp::io::{derive_seed, read_to_string, write_bytes};
use epigp::spatial::{bin_incidents, build_weights, morans_i, row_standardize, SpatialField, WeightMatrix, WeightScheme};
use epigp::synthpop::{
    generate_population, generate_zones, parse_zones_geojson, read_population_dir, read_zones_csv,
    write_population_dir, zones_csv, GeoJsonOptions, PopulationConfig, Zone,
};
use epigp::{Error, Result};

#[derive(Parser)]
#[command(name = "epigp", version, about = "Synthetic-population epidemic simulation, GP emulation and Moran's I comparison")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed; stage seeds are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Allow writing into a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    /// Suppress the summary line.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate zones and a synthetic population.
    Synth {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a disease model over a population directory.
    Simulate {
        /// Directory holding zones.csv, agents.csv and places.csv.
        #[arg(long)]
        population: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Horizon in calendar months.
        #[arg(long, default_value_t = 24)]
        months: u32,
        /// Number of initially infected agents.
        #[arg(long = "seed-count", default_value_t = 10)]
        seed_count: usize,
        /// State the seeded agents start in.
        #[arg(long = "seed-state")]
        seed_state: String,
        /// Restrict seeding to households in these zones (comma separated).
        #[arg(long = "seed-zones", value_delimiter = ',')]
        seed_zones: Option<Vec<usize>>,
    },
    /// Count incidents per zone over one month or step window.
    Bin {
        #[arg(long)]
        incidents: PathBuf,
        #[command(flatten)]
        zones: ZonesArg,
        /// Zero-based calendar month; needs --unit.
        #[arg(long, conflicts_with = "window")]
        month: Option<u32>,
        #[arg(long, value_parser = parse_unit, default_value = "day")]
        unit: StepUnit,
        /// Explicit half-open step window `lo:hi`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(u32, u32)>,
    },
    /// Fit a GP to a field over zone centroids.
    Fit {
        #[arg(long)]
        field: PathBuf,
        #[command(flatten)]
        zones: ZonesArg,
        /// Kernel spec, e.g. "scale(v=1, matern(nu=1.5,l=1.0))".
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Pin the noise variance instead of fitting it.
        #[arg(long = "fixed-noise")]
        fixed_noise: Option<f64>,
        #[arg(long = "standardize-targets")]
        standardize_targets: bool,
        #[arg(long = "log1p-targets")]
        log1p_targets: bool,
    },
    /// Moran's I of a field, or its distribution over GP posterior draws.
    Moran {
        #[arg(long, required_unless_present = "model", conflicts_with = "model")]
        field: Option<PathBuf>,
        /// Fitted model file; draws posterior surfaces at zone centroids.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        zones: ZonesArg,
        #[arg(long, default_value = "inverse:1.0")]
        weights: String,
        #[arg(long = "row-standardize")]
        row_standardize: bool,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        /// `predictive` adds observation noise to each draw; `latent` does not.
        #[arg(long = "draw-kind", default_value = "predictive")]
        draw_kind: DrawKind,
    },
    /// Full two-condition pipeline from a run config.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "allow-edge-months")]
        allow_edge_months: bool,
        #[arg(long = "row-standardize")]
        row_standardize: bool,
        #[arg(long = "standardize-targets")]
        standardize_targets: bool,
        #[arg(long = "log1p-targets")]
        log1p_targets: bool,
        /// Also write zones_<condition>.geojson.
        #[arg(long)]
        geojson: bool,
        /// Overrides the config's `draw_kind`.
        #[arg(long = "draw-kind")]
        draw_kind: Option<DrawKind>,
    },
}

#[derive(Args)]
struct ZonesArg {
    /// zones.csv or a GeoJSON FeatureCollection; defaults to zones.csv next
    /// to the input file.
    #[arg(long)]
    zones: Option<PathBuf>,
    /// Treat GeoJSON lon/lat as planar coordinates scaled by cos(mean lat).
    #[arg(long = "plate-carree")]
    plate_carree: bool,
}

fn parse_unit(s: &str) -> std::result::Result<StepUnit, String> {
    match s {
        "day" => Ok(StepUnit::Day),
        "month" => Ok(StepUnit::Month),
        _ => Err(format!("expected `day` or `month`, got `{s}`")),
    }
}

fn parse_window(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected `lo:hi`")?;
    let lo = a.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(lines) => {
            if !cli.global.quiet {
                for l in lines {
                    println!("{l}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn out_dir(g: &Global) -> Result<&Path> {
    let dir = g
        .out
        .as_deref()
        .ok_or_else(|| Error::Argument("--out is required for this command".into()))?;
    prepare_output_dir(dir, g.force)?;
    Ok(dir)
}

fn load_zones(arg: &ZonesArg, sibling_of: &Path) -> Result<Vec<Zone>> {
    let path = match &arg.zones {
        Some(p) => p.clone(),
        None => sibling_of.parent().unwrap_or(Path::new(".")).join("zones.csv"),
    };
    let text = read_to_string(&path)?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("geojson") || e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_zones_geojson(&text, GeoJsonOptions { plate_carree: arg.plate_carree })
            .map_err(|e| e.in_stage(path.display().to_string()))
    } else {
        read_zones_csv(&path, text.as_bytes())
    }
}

fn read_field(path: &Path) -> Result<SpatialField> {
    SpatialField::from_csv(path, read_to_string(path)?.as_bytes())
}

/// Reorders `field` to follow `zones`; every zone must have a value.
fn align(field: &SpatialField, zones: &[Zone], path: &Path) -> Result<SpatialField> {
    let mut values = Vec::with_capacity(zones.len());
    for z in zones {
        let i = field.zone_ids.iter().position(|id| *id == z.zone_id).ok_or_else(|| {
            Error::Validation(format!("{}: no value for zone {}", path.display(), z.zone_id))
        })?;
        values.push(field.values[i]);
    }
    if field.len() != zones.len() {
        return Err(Error::Validation(format!(
            "{}: {} values for {} zones",
            path.display(),
            field.len(),
            zones.len()
        )));
    }
    SpatialField::new(zones.iter().map(|z| z.zone_id).collect(), values, field.label.clone())
}

fn weights(zones: &[Zone], spec: &str, row_std: bool) -> Result<WeightMatrix> {
    let scheme: WeightScheme = spec.parse()?;
    let w = build_weights(zones, scheme)?;
    if row_std {
        row_standardize(&w)
    } else {
        Ok(w)
    }
}

fn dispatch(cli: &Cli) -> Result<Vec<String>> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(0);
    match &cli.command {
        Command::Synth { config } => {
            let cfg = PopulationConfig::from_toml_str(&read_to_string(config)?)
                .map_err(|e| e.in_stage(config.display().to_string()))?;
            let dir = out_dir(g)?;
            let zones = generate_zones(cfg.grid_rows, cfg.grid_cols, cfg.region)?;
            let pop = generate_population(&cfg, &zones, derive_seed(seed, "synthpop"))?;
            write_population_dir(&pop, dir)?;
            Ok(vec![format!(
                "agents={} households={} places={} zones={} seed={}",
                pop.agents.len(),
                pop.household_count(),
                pop.places.len(),
                pop.zones.len(),
                seed
            )])
        }
        Command::Simulate {
            population,
            model,
            months,
            seed_count,
            seed_state,
            seed_zones,
        } => {
            let m = TransitionModel::from_toml_str(&read_to_string(model)?)
                .map_err(|e| e.in_stage(model.display().to_string()))?;
            let pop = read_population_dir(population)?;
            let dir = out_dir(g)?;
            let seeding = Seeding {
                count: *seed_count,
                state: seed_state.clone(),
                zones: seed_zones.clone(),
            };
            let horizon = m.step_unit.steps_for_months(*months);
            let out = run(&m, &pop, &seeding, horizon, derive_seed(seed, "simulate"))?;
            write_bytes(&dir.join("incidents.csv"), &incidents_csv(&out.log))?;
            write_bytes(&dir.join("tallies.csv"), &tallies_csv(&out.tallies))?;
            write_bytes(&dir.join("zones.csv"), &zones_csv(&pop.zones))?;
            Ok(vec![format!(
                "steps={} incidents={} ever_infected={} agents={}",
                horizon,
                out.log.records.len(),
                out.ever_infected,
                pop.agents.len()
            )])
        }
        Command::Bin {
            incidents,
            zones,
            month,
            unit,
            window,
        } => {
            let log = read_incidents_csv(incidents, read_to_string(incidents)?.as_bytes())?;
            let zs = load_zones(zones, incidents)?;
            let win = match (month, window) {
                (_, Some(w)) => *w,
                (Some(m), None) => unit.month_window(*m),
                (None, None) => {
                    return Err(Error::Argument("one of --month or --window is required".into()))
                }
            };
            let field = bin_incidents(&log, &zs, win, "field")?;
            let dir = out_dir(g)?;
            write_bytes(&dir.join("field.csv"), &field.to_csv())?;
            write_bytes(&dir.join("zones.csv"), &zones_csv(&zs))?;
            Ok(vec![format!(
                "zones={} total={} window={}:{}",
                field.len(),
                field.values.iter().sum::<f64>(),
                win.0,
                win.1
            )])
        }
        Command::Fit {
            field,
            zones,
            kernel,
            restarts,
            fixed_noise,
            standardize_targets,
            log1p_targets,
        } => {
            let k = parse_kernel(kernel)?;
            let f = read_field(field)?;
            let zs = load_zones(zones, field)?;
            let f = align(&f, &zs, field)?;
            let x: Vec<[f64; 2]> = zs.iter().map(|z| z.centroid.to_array()).collect();
            let opts = FitOptions {
                restarts: *restarts,
                seed: derive_seed(seed, "fit"),
                fixed_noise: *fixed_noise,
                standardize_targets: *standardize_targets,
                log1p_targets: *log1p_targets,
                ..FitOptions::default()
            };
            let dir = out_dir(g)?;
            let model = fit(&k, &x, &f.values, &opts)?;
            let file = ModelFile::from_model(&model, &f.zone_ids, Some(field.display().to_string()))?;
            write_bytes(&dir.join("model.toml"), file.to_toml_string().as_bytes())?;
            let mut csv = String::from("zone_id,mean,std\n");
            for (id, (m, s)) in f.zone_ids.iter().zip(model.predict(&x)) {
                csv.push_str(&format!("{id},{m},{s}\n"));
            }
            write_bytes(&dir.join("posterior_mean.csv"), csv.as_bytes())?;
            write_bytes(&dir.join("zones.csv"), &zones_csv(&zs))?;
            Ok(vec![format!(
                "kernel={} noise_variance={} lml={}",
                model.kernel(),
                model.noise_variance(),
                model.log_marginal_likelihood()
            )])
        }
        Command::Moran {
            field,
            model,
            zones,
            weights: spec,
            row_standardize,
            draws,
            draw_kind,
        } => match (field, model) {
            (Some(path), _) => {
                let f = read_field(path)?;
                let zs = load_zones(zones, path)?;
                let f = align(&f, &zs, path)?;
                let w = weights(&zs, spec, *row_standardize)?;
                let r = morans_i(&f, &w)?;
                Ok(vec![format!("I={} n={} W={} weights={}", r.i, r.n, r.w_total, r.scheme)])
            }
            (None, Some(path)) => {
                let file = ModelFile::read(path)?;
                let gp = file.to_model()?;
                let zs = load_zones(zones, path)?;
                let w = weights(&zs, spec, *row_standardize)?;
                let d = moran_distribution(&gp, &zs, &w, *draws, derive_seed(seed, "moran:0"), *draw_kind, "model")?;
                if g.out.is_some() {
                    let dir = out_dir(g)?;
                    write_bytes(&dir.join("moran_samples.csv"), &d.to_csv())?;
                }
                Ok(vec![format!(
                    "I_mean={} I_std={} draws={} degenerate_draws={} weights={}",
                    d.mean,
                    d.std,
                    d.samples.len(),
                    d.degenerate_draws,
                    d.scheme
                )])
            }
            (None, None) => Err(Error::Argument("one of --field or --model is required".into())),
        },
        Command::Compare {
            config,
            allow_edge_months,
            row_standardize,
            standardize_targets,
            log1p_targets,
            geojson,
            draw_kind,
        } => {
            let mut p = LoadedPipeline::load(config)?;
            let c = &mut p.config;
            if let Some(s) = g.seed {
                c.master_seed = s;
            }
            c.allow_edge_months |= *allow_edge_months;
            c.row_standardize |= *row_standardize;
            c.standardize_targets |= *standardize_targets;
            c.log1p_targets |= *log1p_targets;
            c.geojson |= *geojson;
            if let Some(k) = draw_kind {
                c.draw_kind = *k;
            }
            let mut lines = Vec::new();
            if let Some(w) = c.edge_month_warning() {
                eprintln!("{w}");
            }
            let dir = out_dir(g)?;
            let report = run_pipeline(&p)?;
            report.write(dir)?;
            lines.extend(report.summary_lines());
            Ok(lines)
        }
    }
}
