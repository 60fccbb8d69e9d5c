//! Runs every checked-in fuzz corpus input through the same parser the fuzz
//! target drives, so a regression input fails `cargo test` without libFuzzer.

use std::fs;
use std::path::{Path, PathBuf};

use epigp::gp::DrawKind;
use epigp::spatial::WeightScheme;
use epigp::synthpop::{parse_zones_geojson, GeoJsonOptions};

fn inputs(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no corpus inputs for {target}");
    out
}

fn text(target: &str) -> Vec<(PathBuf, String)> {
    inputs(target)
        .into_iter()
        .filter_map(|(p, b)| String::from_utf8(b).ok().map(|s| (p, s)))
        .collect()
}

#[test]
fn kernel_spec() {
    for (p, s) in text("kernel_spec") {
        if let Ok(k) = epigp::gp::parse_kernel(&s) {
            let again = epigp::gp::parse_kernel(&k.to_string())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(k.n_params(), again.n_params());
        }
    }
}

#[test]
fn weight_scheme() {
    for (_, s) in text("weight_scheme") {
        let _ = s.parse::<DrawKind>();
        if let Ok(w) = s.parse::<WeightScheme>() {
            assert_eq!(w.to_string().parse::<WeightScheme>().unwrap(), w);
        }
    }
}

#[test]
fn model_config() {
    for (_, s) in text("model_config") {
        let _ = epigp::epidemic::TransitionModel::from_toml_str(&s);
    }
}

#[test]
fn population_config() {
    for (_, s) in text("population_config") {
        let _ = epigp::synthpop::PopulationConfig::from_toml_str(&s);
    }
}

#[test]
fn pipeline_config() {
    for (_, s) in text("pipeline_config") {
        let _ = epigp::analysis::PipelineConfig::from_toml_str(&s);
    }
}

#[test]
fn model_file() {
    for (_, s) in text("model_file") {
        if let Ok(file) = epigp::gp::ModelFile::from_toml_str(&s) {
            if let Ok(model) = file.to_model() {
                let _ = model.predict_mean(&[[0.0, 0.0]]);
            }
        }
    }
}

#[test]
fn field_csv() {
    for (_, b) in inputs("field_csv") {
        let _ = epigp::spatial::SpatialField::from_csv(Path::new("fuzz.csv"), &b);
    }
}

#[test]
fn incidents_csv() {
    for (_, b) in inputs("incidents_csv") {
        let _ = epigp::epidemic::read_incidents_csv(Path::new("fuzz.csv"), &b);
    }
}

#[test]
fn zones_csv() {
    for (_, b) in inputs("zones_csv") {
        let _ = epigp::synthpop::read_zones_csv(Path::new("zones.csv"), &b);
    }
}

#[test]
fn zones_geojson() {
    for (_, s) in text("zones_geojson") {
        for plate_carree in [false, true] {
            let _ = parse_zones_geojson(&s, GeoJsonOptions { plate_carree });
        }
    }
}

#[test]
fn population_csv() {
    for (_, b) in inputs("population_csv") {
        let mut parts = b.split(|c| *c == b'\x0c');
        let (Some(z), Some(p), Some(a)) = (parts.next(), parts.next(), parts.next()) else {
            continue;
        };
        let _ = epigp::synthpop::parse_population(
            (Path::new("zones.csv"), z),
            (Path::new("places.csv"), p),
            (Path::new("agents.csv"), a),
        );
    }
}
