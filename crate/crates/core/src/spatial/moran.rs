use nalgebra::DVector;

use super::field::SpatialField;
use super::weights::WeightMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MoranResult {
    pub i: f64,
    pub n: usize,
    pub w_total: f64,
    pub scheme: String,
}

/// Global Moran's I:
///
/// `I = N Σ_i Σ_j w_ij (x_i - x̄)(x_j - x̄) / (W Σ_i (x_i - x̄)²)`
pub fn morans_i(field: &SpatialField, w: &WeightMatrix) -> Result<MoranResult> {
    if field.zone_ids != w.zone_ids {
        return Err(Error::Argument(format!(
            "field `{}` zone order does not match the weight matrix zone order",
            field.label
        )));
    }
    let i = morans_i_values(&field.values, w)?;
    Ok(MoranResult {
        i,
        n: field.len(),
        w_total: w.total(),
        scheme: w.describe(),
    })
}

/// Moran's I of `values`, given in the weight matrix's zone order.
pub fn morans_i_values(values: &[f64], w: &WeightMatrix) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::UndefinedStatistic(format!(
            "need at least 2 zones, got {n}"
        )));
    }
    if n != w.len() {
        return Err(Error::Argument(format!(
            "{n} values but the weight matrix covers {} zones",
            w.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::UndefinedStatistic("field contains non-finite values".into()));
    }
    let total = w.total();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::UndefinedStatistic(format!(
            "sum of weights W = {total}; every zone is isolated under {}",
            w.describe()
        )));
    }
    if is_constant(values) {
        return Err(Error::UndefinedStatistic(
            "field has zero variance (constant values)".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let z = DVector::from_iterator(n, values.iter().map(|v| v - mean));
    let ss = z.norm_squared();
    let lag = &w.entries * &z;
    let cross = z.dot(&lag);
    Ok(n as f64 * cross / (total * ss))
}

/// True when the values have no variance beyond floating-point noise.
pub fn is_constant(values: &[f64]) -> bool {
    let n = values.len();
    if n == 0 {
        return true;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ss == 0.0 || ss <= (1e-14 * scale).powi(2) * n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::spatial::{contiguity_weights, row_standardize, ContiguityRule};
    use crate::synthpop::generate_zones;

    #[test]
    fn constant_field_is_undefined() {
        let z = generate_zones(2, 2, Rect::unit()).unwrap();
        let w = contiguity_weights(&z, ContiguityRule::Moore).unwrap();
        assert!(matches!(
            morans_i_values(&[3.0; 4], &w),
            Err(Error::UndefinedStatistic(_))
        ));
    }

    #[test]
    fn empty_weights_are_undefined() {
        let z = generate_zones(1, 3, Rect::unit()).unwrap();
        let mut w = contiguity_weights(&z, ContiguityRule::Moore).unwrap();
        w.entries.fill(0.0);
        assert!(matches!(
            morans_i_values(&[1.0, 2.0, 3.0], &w),
            Err(Error::UndefinedStatistic(_))
        ));
    }

    #[test]
    fn checkerboard_is_minus_one() {
        let z = generate_zones(4, 4, Rect::unit()).unwrap();
        let w = row_standardize(&contiguity_weights(&z, ContiguityRule::VonNeumann).unwrap()).unwrap();
        let x: Vec<f64> = z
            .iter()
            .map(|z| {
                let g = z.grid.unwrap();
                if (g.row + g.col) % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        assert!((morans_i_values(&x, &w).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_zone_order_rejected() {
        let z = generate_zones(1, 3, Rect::unit()).unwrap();
        let w = contiguity_weights(&z, ContiguityRule::Moore).unwrap();
        let f = SpatialField::new(vec![2, 1, 0], vec![1.0, 2.0, 3.0], "x").unwrap();
        assert!(matches!(morans_i(&f, &w), Err(Error::Argument(_))));
    }
}
