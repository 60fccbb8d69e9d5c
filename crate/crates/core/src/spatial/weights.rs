use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::io::{csv_writer, finish_csv};
use crate::synthpop::Zone;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContiguityRule {
    /// Cells sharing an edge (at most 4 neighbours).
    VonNeumann,
    /// Cells sharing an edge or a corner (at most 8 neighbours).
    Moore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    InverseDistance { alpha: f64 },
    Contiguity(ContiguityRule),
    KNearest { k: usize },
    FixedDistance { radius: f64 },
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::InverseDistance { alpha } => write!(f, "inverse:{alpha}"),
            WeightScheme::Contiguity(ContiguityRule::VonNeumann) => f.write_str("vonneumann"),
            WeightScheme::Contiguity(ContiguityRule::Moore) => f.write_str("moore"),
            WeightScheme::KNearest { k } => write!(f, "knn:{k}"),
            WeightScheme::FixedDistance { radius } => write!(f, "fixed:{radius}"),
        }
    }
}

/// Parses the CLI form: `inverse:1.0`, `vonneumann`, `moore`, `knn:4`,
/// `fixed:2.5`.
impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |msg: &str| Error::Parse {
            what: "weight scheme",
            pos: 0,
            msg: format!("{msg} in `{s}`; expected inverse:<alpha> | vonneumann | moore | knn:<k> | fixed:<r>"),
        };
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let arg_pos = name.len() + 1;
        let num = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| err("missing argument"))?;
            let v: f64 = a.parse().map_err(|_| Error::Parse {
                what: "weight scheme",
                pos: arg_pos,
                msg: format!("`{a}` is not a number"),
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse {
                    what: "weight scheme",
                    pos: arg_pos,
                    msg: format!("argument must be positive and finite, got {a}"),
                });
            }
            Ok(v)
        };
        match name {
            "inverse" => Ok(WeightScheme::InverseDistance { alpha: num(arg)? }),
            "fixed" => Ok(WeightScheme::FixedDistance { radius: num(arg)? }),
            "knn" => {
                let a = arg.ok_or_else(|| err("missing argument"))?;
                let k: usize = a.parse().map_err(|_| Error::Parse {
                    what: "weight scheme",
                    pos: arg_pos,
                    msg: format!("`{a}` is not a positive integer"),
                })?;
                if k == 0 {
                    return Err(Error::Parse {
                        what: "weight scheme",
                        pos: arg_pos,
                        msg: "k must be at least 1".into(),
                    });
                }
                Ok(WeightScheme::KNearest { k })
            }
            "vonneumann" | "moore" if arg.is_some() => Err(err("unexpected argument")),
            "vonneumann" => Ok(WeightScheme::Contiguity(ContiguityRule::VonNeumann)),
            "moore" => Ok(WeightScheme::Contiguity(ContiguityRule::Moore)),
            _ => Err(err("unknown scheme")),
        }
    }
}

/// Dense spatial weight matrix with zero diagonal, rows and columns in the
/// order of `zone_ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub zone_ids: Vec<usize>,
    pub entries: DMatrix<f64>,
    pub scheme: WeightScheme,
    pub row_standardized: bool,
}

impl WeightMatrix {
    pub fn len(&self) -> usize {
        self.zone_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zone_ids.is_empty()
    }

    /// W, the sum of all weights.
    pub fn total(&self) -> f64 {
        self.entries.sum()
    }

    pub fn neighbours(&self, i: usize) -> usize {
        self.entries.row(i).iter().filter(|&&w| w > 0.0).count()
    }

    pub fn describe(&self) -> String {
        if self.row_standardized {
            format!("{} (row-standardized)", self.scheme)
        } else {
            self.scheme.to_string()
        }
    }

    pub fn scaled(&self, c: f64) -> WeightMatrix {
        WeightMatrix {
            entries: &self.entries * c,
            ..self.clone()
        }
    }

    /// Dense CSV: header `zone_id,<id>...`, one row per zone.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer();
        let mut header = vec!["zone_id".to_string()];
        header.extend(self.zone_ids.iter().map(|z| z.to_string()));
        w.write_record(&header).expect("in-memory write");
        for (i, z) in self.zone_ids.iter().enumerate() {
            let mut rec = vec![z.to_string()];
            rec.extend(self.entries.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        finish_csv(w)
    }
}

fn from_fn(
    zones: &[Zone],
    scheme: WeightScheme,
    mut f: impl FnMut(usize, usize) -> Result<f64>,
) -> Result<WeightMatrix> {
    let n = zones.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = f(i, j)?;
            }
        }
    }
    Ok(WeightMatrix {
        zone_ids: zones.iter().map(|z| z.zone_id).collect(),
        entries: m,
        scheme,
        row_standardized: false,
    })
}

/// `w_ij = d(c_i, c_j)^(-alpha)` between zone centroids.
pub fn inverse_distance_weights(zones: &[Zone], alpha: f64) -> Result<WeightMatrix> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Argument(format!("alpha must be positive, got {alpha}")));
    }
    from_fn(zones, WeightScheme::InverseDistance { alpha }, |i, j| {
        let d = zones[i].centroid.distance(&zones[j].centroid);
        if d == 0.0 {
            return Err(Error::CoincidentCentroids {
                a: zones[i].zone_id,
                b: zones[j].zone_id,
            });
        }
        Ok(d.powf(-alpha))
    })
}

pub fn contiguity_weights(zones: &[Zone], rule: ContiguityRule) -> Result<WeightMatrix> {
    let cells = zones
        .iter()
        .map(|z| {
            z.grid.ok_or_else(|| {
                Error::Argument(format!(
                    "zone {} has no grid position; contiguity weights need grid zones, use a distance-based scheme (inverse, knn, fixed) instead",
                    z.zone_id
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    from_fn(zones, WeightScheme::Contiguity(rule), |i, j| {
        let dr = cells[i].row.abs_diff(cells[j].row);
        let dc = cells[i].col.abs_diff(cells[j].col);
        let adjacent = match rule {
            ContiguityRule::VonNeumann => dr + dc == 1,
            ContiguityRule::Moore => dr.max(dc) == 1,
        };
        Ok(if adjacent { 1.0 } else { 0.0 })
    })
}

/// Binary weights to each zone's `k` nearest centroids, ties broken by lower
/// zone id. The result is generally asymmetric.
pub fn knn_weights(zones: &[Zone], k: usize) -> Result<WeightMatrix> {
    let n = zones.len();
    if k == 0 || k >= n {
        return Err(Error::Argument(format!(
            "k-nearest-neighbour weights need 1 <= k < N, got k = {k}, N = {n}"
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut others: Vec<(f64, usize, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (zones[i].centroid.distance(&zones[j].centroid), zones[j].zone_id, j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, _, j) in others.iter().take(k) {
            m[(i, j)] = 1.0;
        }
    }
    Ok(WeightMatrix {
        zone_ids: zones.iter().map(|z| z.zone_id).collect(),
        entries: m,
        scheme: WeightScheme::KNearest { k },
        row_standardized: false,
    })
}

/// Binary weights between centroids at distance `<= radius`.
pub fn fixed_distance_weights(zones: &[Zone], radius: f64) -> Result<WeightMatrix> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Argument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    from_fn(zones, WeightScheme::FixedDistance { radius }, |i, j| {
        Ok(if zones[i].centroid.distance(&zones[j].centroid) <= radius {
            1.0
        } else {
            0.0
        })
    })
}

pub fn build_weights(zones: &[Zone], scheme: WeightScheme) -> Result<WeightMatrix> {
    match scheme {
        WeightScheme::InverseDistance { alpha } => inverse_distance_weights(zones, alpha),
        WeightScheme::Contiguity(rule) => contiguity_weights(zones, rule),
        WeightScheme::KNearest { k } => knn_weights(zones, k),
        WeightScheme::FixedDistance { radius } => fixed_distance_weights(zones, radius),
    }
}

/// Divides each row by its sum.
pub fn row_standardize(w: &WeightMatrix) -> Result<WeightMatrix> {
    let mut out = w.clone();
    for i in 0..w.len() {
        let s: f64 = w.entries.row(i).sum();
        if s <= 0.0 {
            return Err(Error::IsolatedZone(w.zone_ids[i]));
        }
        for v in out.entries.row_mut(i).iter_mut() {
            *v /= s;
        }
    }
    out.row_standardized = true;
    Ok(out)
}
