use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{Agent, GridCell, Place, PlaceKind, Population, Zone};
use crate::error::{Error, Result};
use crate::geometry::{vertex_average, Point, Rect};
use crate::io::{
    csv_error, csv_reader, csv_writer, expect_header, finish_csv, parse_field, read_to_string,
    write_bytes,
};

const ZONES_HEADER: [&str; 9] = [
    "zone_id", "grid_row", "grid_col", "centroid_x", "centroid_y", "min_x", "min_y", "max_x",
    "max_y",
];
const AGENTS_HEADER: [&str; 5] = ["agent_id", "age", "household_id", "daytime_place_id", "zone_id"];
const PLACES_HEADER: [&str; 5] = ["place_id", "kind", "x", "y", "zone_id"];

pub fn zones_csv(zones: &[Zone]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(ZONES_HEADER).expect("in-memory write");
    for z in zones {
        let (row, col) = match z.grid {
            Some(g) => (g.row.to_string(), g.col.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            z.zone_id.to_string(),
            row,
            col,
            z.centroid.x.to_string(),
            z.centroid.y.to_string(),
            z.bounds.min_x.to_string(),
            z.bounds.min_y.to_string(),
            z.bounds.max_x.to_string(),
            z.bounds.max_y.to_string(),
        ])
        .expect("in-memory write");
    }
    finish_csv(w)
}

/// Parses `zones.csv`. Polygon zones round-trip as their bounding rectangle.
pub fn read_zones_csv(path: &Path, data: &[u8]) -> Result<Vec<Zone>> {
    let mut rdr = csv_reader(data);
    expect_header(path, &mut rdr, &ZONES_HEADER)?;
    let mut zones = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, &e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let zone_id: usize = parse_field(path, &rec, 0, "zone_id")?;
        let grid = match (rec.get(1), rec.get(2)) {
            (Some(""), Some("")) => None,
            _ => Some(GridCell {
                row: parse_field(path, &rec, 1, "grid_row")?,
                col: parse_field(path, &rec, 2, "grid_col")?,
            }),
        };
        let mut nums = [0.0f64; 6];
        for (k, v) in nums.iter_mut().enumerate() {
            *v = parse_field(path, &rec, 3 + k, ZONES_HEADER[3 + k])?;
        }
        let centroid = Point::new(nums[0], nums[1]);
        let bounds = Rect::new(nums[2], nums[3], nums[4], nums[5]);
        if !bounds.is_valid() || !centroid.x.is_finite() || !centroid.y.is_finite() {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line,
                msg: "zone bounds must be finite with positive area".into(),
            });
        }
        if zone_id != zones.len() {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line,
                msg: format!("zone ids must be contiguous from 0; expected {}", zones.len()),
            });
        }
        zones.push(Zone {
            zone_id,
            grid,
            centroid,
            bounds,
            polygons: None,
        });
    }
    Ok(zones)
}

pub fn agents_csv(pop: &Population) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(AGENTS_HEADER).expect("in-memory write");
    for a in &pop.agents {
        w.write_record([
            a.agent_id.to_string(),
            a.age.to_string(),
            a.household_id.to_string(),
            a.daytime_place_id.map(|d| d.to_string()).unwrap_or_default(),
            pop.places[a.household_id].zone_id.to_string(),
        ])
        .expect("in-memory write");
    }
    finish_csv(w)
}

pub fn places_csv(pop: &Population) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(PLACES_HEADER).expect("in-memory write");
    for p in &pop.places {
        w.write_record([
            p.place_id.to_string(),
            p.kind.as_str().to_string(),
            p.location.x.to_string(),
            p.location.y.to_string(),
            p.zone_id.to_string(),
        ])
        .expect("in-memory write");
    }
    finish_csv(w)
}

/// Writes `zones.csv`, `agents.csv` and `places.csv` into `dir`.
pub fn write_population_dir(pop: &Population, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [
        ("zones.csv", zones_csv(&pop.zones)),
        ("agents.csv", agents_csv(pop)),
        ("places.csv", places_csv(pop)),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_bytes(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a population written by [`write_population_dir`]. Facility
/// capacities are not part of the CSV schema and are restored as the number
/// of assigned members; the seed is not recorded and reads back as 0.
pub fn read_population_dir(dir: &Path) -> Result<Population> {
    let read = |name: &str| -> Result<(PathBuf, String)> {
        let path = dir.join(name);
        let text = read_to_string(&path)?;
        Ok((path, text))
    };
    let zones = read("zones.csv")?;
    let places = read("places.csv")?;
    let agents = read("agents.csv")?;
    parse_population(
        (&zones.0, zones.1.as_bytes()),
        (&places.0, places.1.as_bytes()),
        (&agents.0, agents.1.as_bytes()),
    )
}

/// Parses the three population CSVs; each argument pairs the path used in
/// error messages with the file contents.
pub fn parse_population(
    zones_csv: (&Path, &[u8]),
    places_csv: (&Path, &[u8]),
    agents_csv: (&Path, &[u8]),
) -> Result<Population> {
    let zones = read_zones_csv(zones_csv.0, zones_csv.1)?;

    let places_path = places_csv.0.to_path_buf();
    let mut rdr = csv_reader(places_csv.1);
    expect_header(&places_path, &mut rdr, &PLACES_HEADER)?;
    let mut places = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&places_path, &e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let place_id: usize = parse_field(&places_path, &rec, 0, "place_id")?;
        let kind_raw: String = parse_field(&places_path, &rec, 1, "kind")?;
        let kind = PlaceKind::parse(&kind_raw).ok_or_else(|| Error::Csv {
            path: places_path.clone(),
            line,
            msg: format!("unknown place kind `{kind_raw}`"),
        })?;
        let x: f64 = parse_field(&places_path, &rec, 2, "x")?;
        let y: f64 = parse_field(&places_path, &rec, 3, "y")?;
        let zone_id: usize = parse_field(&places_path, &rec, 4, "zone_id")?;
        places.push(Place {
            place_id,
            kind,
            location: Point::new(x, y),
            zone_id,
            capacity: None,
        });
    }

    let agents_path = agents_csv.0.to_path_buf();
    let mut rdr = csv_reader(agents_csv.1);
    expect_header(&agents_path, &mut rdr, &AGENTS_HEADER)?;
    let mut agents = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&agents_path, &e))?;
        let daytime = match rec.get(3) {
            Some("") | None => None,
            Some(_) => Some(parse_field(&agents_path, &rec, 3, "daytime_place_id")?),
        };
        agents.push(Agent {
            agent_id: parse_field(&agents_path, &rec, 0, "agent_id")?,
            age: parse_field(&agents_path, &rec, 1, "age")?,
            household_id: parse_field(&agents_path, &rec, 2, "household_id")?,
            daytime_place_id: daytime,
        });
    }

    let mut load = vec![0u32; places.len()];
    for a in &agents {
        if let Some(d) = a.daytime_place_id {
            if let Some(l) = load.get_mut(d) {
                *l += 1;
            }
        }
    }
    for p in &mut places {
        if p.kind != PlaceKind::Household {
            p.capacity = Some(load.get(p.place_id).copied().unwrap_or(0).max(1));
        }
    }

    let pop = Population {
        agents,
        places,
        zones,
        seed: 0,
    };
    pop.validate()?;
    Ok(pop)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GeoJsonOptions {
    /// Scale longitudes by cos(mean latitude) so planar distances are
    /// approximately isotropic (plate carrée correction).
    pub plate_carree: bool,
}

/// Imports zones from a GeoJSON FeatureCollection of Polygon or MultiPolygon
/// features carrying an integer `zone_id` property. Only exterior rings are
/// used; the centroid is the average of the exterior vertices.
pub fn parse_zones_geojson(text: &str, opts: GeoJsonOptions) -> Result<Vec<Zone>> {
    let bad = |msg: String| Error::Config(format!("zone GeoJSON: {msg}"));
    let root: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(bad("top-level object must be a FeatureCollection".into()));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `features` array".into()))?;

    let mut parsed: Vec<(usize, Vec<Vec<Point>>)> = Vec::with_capacity(features.len());
    for (fi, f) in features.iter().enumerate() {
        let zone_id = f
            .get("properties")
            .and_then(|p| p.get("zone_id"))
            .and_then(Value::as_u64)
            .ok_or_else(|| bad(format!("feature {fi} lacks a non-negative integer `zone_id`")))?;
        let geom = f
            .get("geometry")
            .ok_or_else(|| bad(format!("feature {fi} has no geometry")))?;
        let coords = geom
            .get("coordinates")
            .ok_or_else(|| bad(format!("feature {fi} geometry has no coordinates")))?;
        let rings = match geom.get("type").and_then(Value::as_str) {
            Some("Polygon") => vec![exterior_ring(coords).map_err(|m| bad(format!("feature {fi}: {m}")))?],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| bad(format!("feature {fi}: MultiPolygon coordinates must be an array")))?
                .iter()
                .map(exterior_ring)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|m| bad(format!("feature {fi}: {m}")))?,
            other => {
                return Err(bad(format!(
                    "feature {fi}: unsupported geometry type {other:?}"
                )))
            }
        };
        if rings.is_empty() {
            return Err(bad(format!("feature {fi}: empty MultiPolygon")));
        }
        let id = usize::try_from(zone_id).map_err(|_| bad(format!("feature {fi}: zone_id too large")))?;
        parsed.push((id, rings));
    }
    parsed.sort_by_key(|(id, _)| *id);
    for (i, (id, _)) in parsed.iter().enumerate() {
        if *id != i {
            return Err(bad(format!(
                "zone ids must be unique and contiguous from 0; expected {i}, found {id}"
            )));
        }
    }

    if opts.plate_carree {
        let all: Vec<&Point> = parsed.iter().flat_map(|(_, r)| r.iter().flatten()).collect();
        let mean_lat = all.iter().map(|p| p.y).sum::<f64>() / all.len().max(1) as f64;
        let k = mean_lat.to_radians().cos();
        for (_, rings) in &mut parsed {
            for p in rings.iter_mut().flatten() {
                p.x *= k;
            }
        }
    }

    parsed
        .into_iter()
        .map(|(zone_id, rings)| {
            let all: Vec<Point> = rings.iter().flatten().copied().collect();
            let bounds = Rect::bounding(&all).expect("rings are non-empty");
            if !bounds.is_valid() {
                return Err(bad(format!("zone {zone_id} has a degenerate bounding box")));
            }
            let verts: Vec<Point> = rings
                .iter()
                .flat_map(|r| {
                    let closed = r.len() > 1 && r.first() == r.last();
                    r[..r.len() - usize::from(closed)].iter().copied()
                })
                .collect();
            let centroid = vertex_average(&verts).expect("rings are non-empty");
            Ok(Zone {
                zone_id,
                grid: None,
                centroid,
                bounds,
                polygons: Some(rings),
            })
        })
        .collect()
}

fn exterior_ring(polygon: &Value) -> std::result::Result<Vec<Point>, String> {
    let ring = polygon
        .as_array()
        .and_then(|rings| rings.first())
        .and_then(Value::as_array)
        .ok_or("polygon must contain at least one ring")?;
    let pts = ring
        .iter()
        .map(|c| {
            let xy = c.as_array().ok_or("coordinate must be an array")?;
            match (xy.first().and_then(Value::as_f64), xy.get(1).and_then(Value::as_f64)) {
                (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok(Point::new(x, y)),
                _ => Err("coordinate must hold two finite numbers"),
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if pts.len() < 3 {
        return Err("ring needs at least 3 vertices".into());
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthpop::{generate_population, generate_zones, PopulationConfig};

    #[test]
    fn population_round_trips_through_csv() {
        let cfg = PopulationConfig {
            n_agents: 300,
            mean_household_size: 2.5,
            n_schools: 2,
            n_workplaces: 4,
            employment_rate: 0.7,
            grid_rows: 2,
            grid_cols: 2,
            region: Rect::new(0.0, 0.0, 2.0, 2.0),
        };
        let zones = generate_zones(2, 2, cfg.region).unwrap();
        let pop = generate_population(&cfg, &zones, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_population_dir(&pop, dir.path()).unwrap();
        let back = read_population_dir(dir.path()).unwrap();
        assert_eq!(back.agents, pop.agents);
        assert_eq!(back.zones, pop.zones);
        for (a, b) in back.places.iter().zip(&pop.places) {
            assert_eq!(a.location, b.location);
            assert_eq!(a.kind, b.kind);
        }
    }

    #[test]
    fn agents_csv_header_and_blank_daytime() {
        let pop = Population {
            agents: vec![Agent {
                agent_id: 0,
                age: 90,
                household_id: 0,
                daytime_place_id: None,
            }],
            places: vec![Place {
                place_id: 0,
                kind: PlaceKind::Household,
                location: Point::new(0.5, 0.5),
                zone_id: 0,
                capacity: None,
            }],
            zones: generate_zones(1, 1, Rect::unit()).unwrap(),
            seed: 0,
        };
        let text = String::from_utf8(agents_csv(&pop)).unwrap();
        assert_eq!(
            text,
            "agent_id,age,household_id,daytime_place_id,zone_id\n0,90,0,,0\n"
        );
    }

    #[test]
    fn geojson_import_orders_by_zone_id() {
        let gj = r#"{"type":"FeatureCollection","features":[
          {"type":"Feature","properties":{"zone_id":1},
           "geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,1],[1,0]]]}},
          {"type":"Feature","properties":{"zone_id":0},
           "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}
        ]}"#;
        let zones = parse_zones_geojson(gj, GeoJsonOptions::default()).unwrap();
        assert_eq!(zones.len(), 2);
        assert_eq!(zones[0].centroid, Point::new(0.5, 0.5));
        assert_eq!(zones[1].centroid, Point::new(1.5, 0.5));
        assert!(zones[1].contains(&Point::new(1.0, 0.5)));
        assert!(!zones[0].contains(&Point::new(1.0, 0.5)));
    }

    #[test]
    fn geojson_rejects_gaps_in_ids() {
        let gj = r#"{"type":"FeatureCollection","features":[
          {"type":"Feature","properties":{"zone_id":2},
           "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}
        ]}"#;
        assert!(parse_zones_geojson(gj, GeoJsonOptions::default()).is_err());
    }
}
