use std::path::Path;

use super::sim::{IncidentLog, IncidentRecord, Tallies};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::io::{csv_error, csv_reader, csv_writer, expect_header, finish_csv, parse_field};

const INCIDENT_HEADER: [&str; 6] = ["step", "agent_id", "state", "x", "y", "zone_id"];

pub fn incidents_csv(log: &IncidentLog) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(INCIDENT_HEADER).expect("in-memory write");
    for r in &log.records {
        w.write_record([
            r.step.to_string(),
            r.agent_id.to_string(),
            r.state.clone(),
            r.location.x.to_string(),
            r.location.y.to_string(),
            r.zone_id.to_string(),
        ])
        .expect("in-memory write");
    }
    finish_csv(w)
}

/// Parses an incident log, requiring records sorted by step.
pub fn read_incidents_csv(path: &Path, data: &[u8]) -> Result<IncidentLog> {
    let mut rdr = csv_reader(data);
    expect_header(path, &mut rdr, &INCIDENT_HEADER)?;
    let mut records: Vec<IncidentRecord> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, &e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let r = IncidentRecord {
            step: parse_field(path, &rec, 0, "step")?,
            agent_id: parse_field(path, &rec, 1, "agent_id")?,
            state: parse_field(path, &rec, 2, "state")?,
            location: Point::new(
                parse_field(path, &rec, 3, "x")?,
                parse_field(path, &rec, 4, "y")?,
            ),
            zone_id: parse_field(path, &rec, 5, "zone_id")?,
        };
        if !(r.location.x.is_finite() && r.location.y.is_finite()) {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line,
                msg: "coordinates must be finite".into(),
            });
        }
        if records.last().is_some_and(|prev| prev.step > r.step) {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                line,
                msg: "records must be sorted by step".into(),
            });
        }
        records.push(r);
    }
    Ok(IncidentLog { records })
}

pub fn tallies_csv(t: &Tallies) -> Vec<u8> {
    let mut w = csv_writer();
    let mut header = vec!["step".to_string()];
    header.extend(t.states.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (step, row) in t.rows.iter().enumerate() {
        let mut rec = vec![step.to_string()];
        rec.extend(row.iter().map(|c| c.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    finish_csv(w)
}
