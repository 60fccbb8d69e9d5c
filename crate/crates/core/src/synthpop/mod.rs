//! Toy geolocated synthetic population: a rectangular grid of zones standing
//! in for postal-code areas, households placed uniformly inside zones, and
//! schools and workplaces that agents attend during the day.

mod config;
mod io;

pub use config::{PopulationConfig, MAX_AGENTS};
pub use io::{
    agents_csv, parse_population, parse_zones_geojson, places_csv, read_population_dir, read_zones_csv,
    write_population_dir, zones_csv, GeoJsonOptions,
};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Point, Rect};

pub const MAX_HOUSEHOLD_SIZE: usize = 8;
pub const SCHOOL_AGE: std::ops::Range<u8> = 5..18;
pub const WORKING_AGE: std::ops::Range<u8> = 18..65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub zone_id: usize,
    /// Present for generated grid zones; imported polygons have none.
    pub grid: Option<GridCell>,
    pub centroid: Point,
    pub bounds: Rect,
    /// Exterior rings for imported polygon zones.
    pub polygons: Option<Vec<Vec<Point>>>,
}

impl Zone {
    /// Half-open membership: left and bottom edges are inside.
    pub fn contains(&self, p: &Point) -> bool {
        match &self.polygons {
            Some(rings) => rings.iter().any(|r| point_in_polygon(r, p)),
            None => self.bounds.contains_half_open(p),
        }
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let b = &self.bounds;
        match &self.polygons {
            None => Point::new(
                rng.random_range(b.min_x..b.max_x),
                rng.random_range(b.min_y..b.max_y),
            ),
            Some(_) => {
                for _ in 0..1000 {
                    let p = Point::new(
                        rng.random_range(b.min_x..b.max_x),
                        rng.random_range(b.min_y..b.max_y),
                    );
                    if self.contains(&p) {
                        return p;
                    }
                }
                self.centroid
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlaceKind {
    Household,
    School,
    Workplace,
}

impl PlaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlaceKind::Household => "household",
            PlaceKind::School => "school",
            PlaceKind::Workplace => "workplace",
        }
    }

    pub fn parse(s: &str) -> Option<PlaceKind> {
        match s {
            "household" => Some(PlaceKind::Household),
            "school" => Some(PlaceKind::School),
            "workplace" => Some(PlaceKind::Workplace),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub place_id: usize,
    pub kind: PlaceKind,
    pub location: Point,
    pub zone_id: usize,
    /// Schools and workplaces only.
    pub capacity: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub agent_id: usize,
    pub age: u8,
    pub household_id: usize,
    pub daytime_place_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<Agent>,
    pub places: Vec<Place>,
    pub zones: Vec<Zone>,
    pub seed: u64,
}

impl Population {
    pub fn household_count(&self) -> usize {
        self.places
            .iter()
            .filter(|p| p.kind == PlaceKind::Household)
            .count()
    }

    pub fn household_of(&self, agent: &Agent) -> &Place {
        &self.places[agent.household_id]
    }

    /// Checks every cross-reference and the spatial placement of places.
    pub fn validate(&self) -> Result<()> {
        for (i, z) in self.zones.iter().enumerate() {
            if z.zone_id != i {
                return Err(Error::Validation(format!(
                    "zone ids must be contiguous from 0; position {i} holds zone {}",
                    z.zone_id
                )));
            }
        }
        let mut members = vec![0usize; self.places.len()];
        for (i, a) in self.agents.iter().enumerate() {
            if a.agent_id != i {
                return Err(Error::Validation(format!(
                    "agent ids must be contiguous from 0; position {i} holds agent {}",
                    a.agent_id
                )));
            }
            match self.places.get(a.household_id) {
                Some(p) if p.kind == PlaceKind::Household => members[a.household_id] += 1,
                _ => {
                    return Err(Error::Validation(format!(
                        "agent {i} references missing household {}",
                        a.household_id
                    )))
                }
            }
            if let Some(d) = a.daytime_place_id {
                match self.places.get(d).map(|p| p.kind) {
                    Some(PlaceKind::School) if SCHOOL_AGE.contains(&a.age) => {}
                    Some(PlaceKind::Workplace) => {}
                    Some(PlaceKind::School) => {
                        return Err(Error::Validation(format!(
                            "agent {i} (age {}) is assigned to a school",
                            a.age
                        )))
                    }
                    _ => {
                        return Err(Error::Validation(format!(
                            "agent {i} references invalid daytime place {d}"
                        )))
                    }
                }
            }
        }
        for (i, p) in self.places.iter().enumerate() {
            if p.place_id != i {
                return Err(Error::Validation(format!(
                    "place ids must be contiguous from 0; position {i} holds place {}",
                    p.place_id
                )));
            }
            let zone = self.zones.get(p.zone_id).ok_or_else(|| {
                Error::Validation(format!("place {i} references missing zone {}", p.zone_id))
            })?;
            if !zone.contains(&p.location) && !zone.bounds.contains_closed(&p.location) {
                return Err(Error::Validation(format!(
                    "place {i} at ({}, {}) lies outside zone {}",
                    p.location.x, p.location.y, p.zone_id
                )));
            }
            if p.kind == PlaceKind::Household && members[i] == 0 {
                return Err(Error::Validation(format!("household {i} has no members")));
            }
        }
        Ok(())
    }
}

/// Tiles `region` with `rows × cols` equal cells, numbered row-major from the
/// bottom-left cell.
pub fn generate_zones(rows: usize, cols: usize, region: Rect) -> Result<Vec<Zone>> {
    if rows == 0 || cols == 0 {
        return Err(Error::Config(format!(
            "zone grid must have positive dimensions, got {rows}x{cols}"
        )));
    }
    if !region.is_valid() {
        return Err(Error::Config(format!(
            "region must be finite with positive area, got {region:?}"
        )));
    }
    // Shared edges are computed once so neighbouring cells agree bit-for-bit.
    let edge = |lo: f64, hi: f64, k: usize, n: usize| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * k as f64 / n as f64
        }
    };
    let xs: Vec<f64> = (0..=cols)
        .map(|c| edge(region.min_x, region.max_x, c, cols))
        .collect();
    let ys: Vec<f64> = (0..=rows)
        .map(|r| edge(region.min_y, region.max_y, r, rows))
        .collect();

    let mut zones = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let bounds = Rect::new(xs[col], ys[row], xs[col + 1], ys[row + 1]);
            zones.push(Zone {
                zone_id: row * cols + col,
                grid: Some(GridCell { row, col }),
                centroid: bounds.center(),
                bounds,
                polygons: None,
            });
        }
    }
    Ok(zones)
}

/// Generates a population over `zones`. Pure in `(config, zones, seed)`.
pub fn generate_population(
    config: &PopulationConfig,
    zones: &[Zone],
    seed: u64,
) -> Result<Population> {
    config.validate()?;
    if zones.is_empty() {
        return Err(Error::Config("population needs at least one zone".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n_agents;

    let mut agents: Vec<Agent> = Vec::with_capacity(n);
    let mut places: Vec<Place> = Vec::new();

    let extra = config.mean_household_size - 1.0;
    let size_dist = if extra > 0.0 {
        Some(Poisson::new(extra).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };

    while agents.len() < n {
        let drawn = size_dist
            .as_ref()
            .map(|d| d.sample(&mut rng) as usize)
            .unwrap_or(0);
        let size = (1 + drawn).min(MAX_HOUSEHOLD_SIZE).min(n - agents.len());
        let zone = &zones[rng.random_range(0..zones.len())];
        let location = zone.sample_point(&mut rng);
        let household_id = places.len();
        places.push(Place {
            place_id: household_id,
            kind: PlaceKind::Household,
            location,
            zone_id: zone.zone_id,
            capacity: None,
        });
        for m in 0..size {
            let age = if m == 0 {
                rng.random_range(18..=85)
            } else {
                rng.random_range(0..=90)
            };
            agents.push(Agent {
                agent_id: agents.len(),
                age,
                household_id,
                daytime_place_id: None,
            });
        }
    }

    // Schools: nearest school with spare capacity.
    let school_age: Vec<usize> = agents
        .iter()
        .filter(|a| SCHOOL_AGE.contains(&a.age))
        .map(|a| a.agent_id)
        .collect();
    if !school_age.is_empty() && config.n_schools == 0 {
        return Err(Error::Config(format!(
            "{} school-age agents but n_schools = 0",
            school_age.len()
        )));
    }
    let school_cap = capacity_for(school_age.len(), config.n_schools);
    let first_school = places.len();
    let school_ids = place_facilities(
        &mut places,
        zones,
        &mut rng,
        PlaceKind::School,
        if n > 0 { config.n_schools } else { 0 },
        school_cap,
    );
    let mut school_load = vec![0u32; school_ids.len()];
    for &aid in &school_age {
        let home = places[agents[aid].household_id].location;
        let best = school_ids
            .iter()
            .enumerate()
            .filter(|(k, _)| school_load[*k] < school_cap)
            .min_by(|(_, &a), (_, &b)| {
                let da = home.distance(&places[a].location);
                let db = home.distance(&places[b].location);
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .map(|(k, &pid)| (k, pid));
        // Total capacity exceeds demand, so a school is always found.
        let (k, pid) = best.ok_or_else(|| Error::Config("school capacity exhausted".into()))?;
        school_load[k] += 1;
        agents[aid].daytime_place_id = Some(pid);
    }
    debug_assert!(school_ids.first().is_none_or(|&s| s == first_school));

    // Workplaces: employment draw per working-age adult, then a uniform
    // workplace choice, probing forward when full.
    let workers: Vec<usize> = agents
        .iter()
        .filter(|a| WORKING_AGE.contains(&a.age))
        .map(|a| a.agent_id)
        .filter(|_| rng.random::<f64>() < config.employment_rate)
        .collect();
    if !workers.is_empty() && config.n_workplaces == 0 {
        return Err(Error::Config(format!(
            "{} employed agents but n_workplaces = 0",
            workers.len()
        )));
    }
    let work_cap = capacity_for(workers.len(), config.n_workplaces);
    let work_ids = place_facilities(
        &mut places,
        zones,
        &mut rng,
        PlaceKind::Workplace,
        if n > 0 { config.n_workplaces } else { 0 },
        work_cap,
    );
    let mut work_load = vec![0u32; work_ids.len()];
    for &aid in &workers {
        let mut k = rng.random_range(0..work_ids.len());
        while work_load[k] >= work_cap {
            k = (k + 1) % work_ids.len();
        }
        work_load[k] += 1;
        agents[aid].daytime_place_id = Some(work_ids[k]);
    }

    Ok(Population {
        agents,
        places,
        zones: zones.to_vec(),
        seed,
    })
}

fn capacity_for(demand: usize, facilities: usize) -> u32 {
    if facilities == 0 {
        return 1;
    }
    let per = (1.2 * demand as f64 / facilities as f64).ceil() as u32;
    per + 1
}

fn place_facilities<R: Rng + ?Sized>(
    places: &mut Vec<Place>,
    zones: &[Zone],
    rng: &mut R,
    kind: PlaceKind,
    count: usize,
    capacity: u32,
) -> Vec<usize> {
    // Distinct zones while there are enough of them, for spatial spread.
    let spread: Vec<usize> = if count <= zones.len() {
        index::sample(rng, zones.len(), count).into_vec()
    } else {
        (0..count).map(|_| rng.random_range(0..zones.len())).collect()
    };
    spread
        .into_iter()
        .map(|zi| {
            let zone = &zones[zi];
            let id = places.len();
            places.push(Place {
                place_id: id,
                kind,
                location: zone.sample_point(rng),
                zone_id: zone.zone_id,
                capacity: Some(capacity),
            });
            id
        })
        .collect()
}
