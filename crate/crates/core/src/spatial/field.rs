use std::path::Path;

use crate::epidemic::IncidentLog;
use crate::error::{Error, Result};
use crate::io::{csv_error, csv_reader, csv_writer, expect_header, finish_csv, parse_field};
use crate::synthpop::Zone;

/// One value per zone: incident counts or a GP surface evaluated at zone
/// centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub zone_ids: Vec<usize>,
    pub values: Vec<f64>,
    pub label: String,
    /// Half-open step window the values summarize, when they come from an
    /// incident log.
    pub time_window: Option<(u32, u32)>,
}

impl SpatialField {
    pub fn new(zone_ids: Vec<usize>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if zone_ids.len() != values.len() {
            return Err(Error::Argument(format!(
                "field has {} zone ids but {} values",
                zone_ids.len(),
                values.len()
            )));
        }
        Ok(SpatialField {
            zone_ids,
            values,
            label: label.into(),
            time_window: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer();
        w.write_record(["zone_id", "value"]).expect("in-memory write");
        for (z, v) in self.zone_ids.iter().zip(&self.values) {
            w.write_record([z.to_string(), v.to_string()])
                .expect("in-memory write");
        }
        finish_csv(w)
    }

    pub fn from_csv(path: &Path, data: &[u8]) -> Result<Self> {
        let mut rdr = csv_reader(data);
        expect_header(path, &mut rdr, &["zone_id", "value"])?;
        let (mut ids, mut vals) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(path, &e))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let id: usize = parse_field(path, &rec, 0, "zone_id")?;
            let v: f64 = parse_field(path, &rec, 1, "value")?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("value `{v}` is not finite"),
                });
            }
            if ids.contains(&id) {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("duplicate zone_id {id}"),
                });
            }
            ids.push(id);
            vals.push(v);
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        SpatialField::new(ids, vals, label)
    }
}

/// Counts incidents with step in `[lo, hi)` per zone. A point on a shared
/// edge belongs to the zone on its right/top; points on the outer right/top
/// boundary of the study region belong to the adjacent edge zone.
pub fn bin_incidents(
    log: &IncidentLog,
    zones: &[Zone],
    window: (u32, u32),
    label: impl Into<String>,
) -> Result<SpatialField> {
    let (lo, hi) = window;
    if lo >= hi {
        return Err(Error::Argument(format!(
            "time window must satisfy lo < hi, got [{lo}, {hi})"
        )));
    }
    if zones.is_empty() {
        return Err(Error::Argument("cannot bin incidents into zero zones".into()));
    }
    let mut values = vec![0.0; zones.len()];
    let mut outside = Vec::new();
    for r in log.records.iter().filter(|r| (lo..hi).contains(&r.step)) {
        let p = &r.location;
        let hit = zones
            .iter()
            .position(|z| z.contains(p))
            .or_else(|| zones.iter().position(|z| z.bounds.contains_closed(p) && z.polygons.is_none()));
        match hit {
            Some(i) => values[i] += 1.0,
            None => outside.push((p.x, p.y)),
        }
    }
    if !outside.is_empty() {
        return Err(Error::OutsideZones { points: outside });
    }
    Ok(SpatialField {
        zone_ids: zones.iter().map(|z| z.zone_id).collect(),
        values,
        label: label.into(),
        time_window: Some(window),
    })
}
