use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

pub const JITTER_START: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-4;

/// Jitter values tried in order: none, then 1e-10 growing tenfold to 1e-4.
pub fn jitter_ladder() -> impl Iterator<Item = f64> {
    std::iter::once(0.0).chain(
        std::iter::successors(Some(JITTER_START), |j| Some(j * 10.0))
            .take_while(|j| *j <= JITTER_MAX * (1.0 + 1e-9)),
    )
}

/// Cholesky factor of `a + jitter·I` for the smallest ladder jitter that
/// succeeds. Returns the factor and the jitter used.
pub fn cholesky_jittered(a: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned { max_jitter: 0.0 });
    }
    for jitter in jitter_ladder() {
        let mut m = a.clone();
        if jitter > 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] += jitter;
            }
        }
        if let Some(c) = Cholesky::new(m) {
            if c.l_dirty().diagonal().iter().all(|d| d.is_finite() && *d > 0.0) {
                return Ok((c, jitter));
            }
        }
    }
    Err(Error::IllConditioned {
        max_jitter: JITTER_MAX,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_values() {
        let v: Vec<f64> = jitter_ladder().collect();
        assert_eq!(v.len(), 8);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 1e-10);
        assert!((v[7] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn positive_definite_needs_no_jitter() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (c, j) = cholesky_jittered(&a).unwrap();
        assert_eq!(j, 0.0);
        assert!((c.l() * c.l().transpose() - a).abs().max() < 1e-14);
    }

    #[test]
    fn singular_gets_jitter() {
        let a = DMatrix::from_element(3, 3, 1.0);
        let (_, j) = cholesky_jittered(&a).unwrap();
        assert!(j > 0.0);
    }

    #[test]
    fn indefinite_fails() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            cholesky_jittered(&a),
            Err(Error::IllConditioned { .. })
        ));
    }
}
