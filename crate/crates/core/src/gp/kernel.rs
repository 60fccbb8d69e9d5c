use std::fmt;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT5: f64 = 2.236_067_977_499_79;

/// Half-integer Matérn smoothness values with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl MaternNu {
    pub fn from_f64(nu: f64) -> Option<MaternNu> {
        if nu == 0.5 {
            Some(MaternNu::Half)
        } else if nu == 1.5 {
            Some(MaternNu::ThreeHalves)
        } else if nu == 2.5 {
            Some(MaternNu::FiveHalves)
        } else {
            None
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            MaternNu::Half => 0.5,
            MaternNu::ThreeHalves => 1.5,
            MaternNu::FiveHalves => 2.5,
        }
    }
}

/// Stationary covariance function as an expression tree. Hyperparameters
/// are stored as natural logs so optimization is unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Rbf {
        log_lengthscale: f64,
    },
    Matern {
        nu: MaternNu,
        log_lengthscale: f64,
    },
    Sum(Box<Kernel>, Box<Kernel>),
    Product(Box<Kernel>, Box<Kernel>),
    Scaled {
        log_variance: f64,
        inner: Box<Kernel>,
    },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v.ln())
    } else {
        Err(Error::Argument(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Kernel {
    pub fn rbf(lengthscale: f64) -> Result<Kernel> {
        Ok(Kernel::Rbf {
            log_lengthscale: positive("lengthscale", lengthscale)?,
        })
    }

    pub fn matern(nu: MaternNu, lengthscale: f64) -> Result<Kernel> {
        Ok(Kernel::Matern {
            nu,
            log_lengthscale: positive("lengthscale", lengthscale)?,
        })
    }

    pub fn scaled(variance: f64, inner: Kernel) -> Result<Kernel> {
        Ok(Kernel::Scaled {
            log_variance: positive("variance", variance)?,
            inner: Box::new(inner),
        })
    }

    pub fn sum(a: Kernel, b: Kernel) -> Kernel {
        Kernel::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: Kernel, b: Kernel) -> Kernel {
        Kernel::Product(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        self.eval_distance(distance(a, b))
    }

    /// Kernel value as a function of Euclidean distance.
    pub fn eval_distance(&self, d: f64) -> f64 {
        match self {
            Kernel::Rbf { log_lengthscale } => {
                let l = log_lengthscale.exp();
                (-(d * d) / (2.0 * l * l)).exp()
            }
            Kernel::Matern {
                nu,
                log_lengthscale,
            } => matern(*nu, d / log_lengthscale.exp()),
            Kernel::Sum(a, b) => a.eval_distance(d) + b.eval_distance(d),
            Kernel::Product(a, b) => a.eval_distance(d) * b.eval_distance(d),
            Kernel::Scaled {
                log_variance,
                inner,
            } => log_variance.exp() * inner.eval_distance(d),
        }
    }

    /// Value and gradient with respect to each log-hyperparameter, in
    /// [`Kernel::params`] order. `grad` must hold `n_params()` slots.
    pub fn eval_with_grad(&self, d: f64, grad: &mut [f64]) -> f64 {
        match self {
            Kernel::Rbf { log_lengthscale } => {
                let l = log_lengthscale.exp();
                let q = d * d / (l * l);
                let k = (-0.5 * q).exp();
                grad[0] = k * q;
                k
            }
            Kernel::Matern {
                nu,
                log_lengthscale,
            } => {
                let u = d / log_lengthscale.exp();
                let (k, dk) = matern_with_grad(*nu, u);
                grad[0] = dk;
                k
            }
            Kernel::Sum(a, b) => {
                let na = a.n_params();
                let (ga, gb) = grad.split_at_mut(na);
                a.eval_with_grad(d, ga) + b.eval_with_grad(d, gb)
            }
            Kernel::Product(a, b) => {
                let na = a.n_params();
                let (ga, gb) = grad.split_at_mut(na);
                let ka = a.eval_with_grad(d, ga);
                let kb = b.eval_with_grad(d, gb);
                ga.iter_mut().for_each(|g| *g *= kb);
                gb.iter_mut().for_each(|g| *g *= ka);
                ka * kb
            }
            Kernel::Scaled {
                log_variance,
                inner,
            } => {
                let v = log_variance.exp();
                let (g0, rest) = grad.split_at_mut(1);
                let k = v * inner.eval_with_grad(d, rest);
                rest.iter_mut().for_each(|g| *g *= v);
                g0[0] = k;
                k
            }
        }
    }

    /// k(x, x): the prior variance of the tree.
    pub fn variance(&self) -> f64 {
        self.eval_distance(0.0)
    }

    pub fn n_params(&self) -> usize {
        match self {
            Kernel::Rbf { .. } | Kernel::Matern { .. } => 1,
            Kernel::Sum(a, b) | Kernel::Product(a, b) => a.n_params() + b.n_params(),
            Kernel::Scaled { inner, .. } => 1 + inner.n_params(),
        }
    }

    /// Log-hyperparameters in pre-order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut Vec<f64>) {
        match self {
            Kernel::Rbf { log_lengthscale } | Kernel::Matern {
                log_lengthscale, ..
            } => out.push(*log_lengthscale),
            Kernel::Sum(a, b) | Kernel::Product(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Kernel::Scaled {
                log_variance,
                inner,
            } => {
                out.push(*log_variance);
                inner.collect_params(out);
            }
        }
    }

    /// Replaces the log-hyperparameters (pre-order). Panics if `params` has
    /// the wrong length.
    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.n_params(), "parameter count mismatch");
        self.assign_params(params);
    }

    pub fn with_params(&self, params: &[f64]) -> Kernel {
        let mut k = self.clone();
        k.set_params(params);
        k
    }

    fn assign_params(&mut self, params: &[f64]) {
        match self {
            Kernel::Rbf { log_lengthscale } | Kernel::Matern {
                log_lengthscale, ..
            } => *log_lengthscale = params[0],
            Kernel::Sum(a, b) | Kernel::Product(a, b) => {
                let na = a.n_params();
                a.assign_params(&params[..na]);
                b.assign_params(&params[na..]);
            }
            Kernel::Scaled {
                log_variance,
                inner,
            } => {
                *log_variance = params[0];
                inner.assign_params(&params[1..]);
            }
        }
    }

    /// Human-readable hyperparameter names in [`Kernel::params`] order.
    pub fn param_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_names("", &mut out);
        out
    }

    fn collect_names(&self, prefix: &str, out: &mut Vec<String>) {
        match self {
            Kernel::Rbf { .. } => out.push(format!("{prefix}rbf.log_l")),
            Kernel::Matern { nu, .. } => out.push(format!("{prefix}matern{}.log_l", nu.as_f64())),
            Kernel::Sum(a, b) | Kernel::Product(a, b) => {
                a.collect_names(&format!("{prefix}0."), out);
                b.collect_names(&format!("{prefix}1."), out);
            }
            Kernel::Scaled { inner, .. } => {
                out.push(format!("{prefix}scale.log_v"));
                inner.collect_names(prefix, out);
            }
        }
    }
}

/// Formats in the kernel spec language; the output parses back to the same
/// tree.
impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Rbf { log_lengthscale } => write!(f, "rbf(l={})", log_lengthscale.exp()),
            Kernel::Matern {
                nu,
                log_lengthscale,
            } => write!(f, "matern(nu={},l={})", nu.as_f64(), log_lengthscale.exp()),
            Kernel::Sum(a, b) => {
                if matches!(**b, Kernel::Sum(..)) {
                    write!(f, "{a}+({b})")
                } else {
                    write!(f, "{a}+{b}")
                }
            }
            Kernel::Product(a, b) => {
                let wrap = |k: &Kernel| matches!(k, Kernel::Sum(..));
                if wrap(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str("*")?;
                if wrap(b) || matches!(**b, Kernel::Product(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Kernel::Scaled {
                log_variance,
                inner,
            } => write!(f, "scale(v={}, {inner})", log_variance.exp()),
        }
    }
}

pub fn distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Matérn correlation at scaled distance `u = d / l`.
fn matern(nu: MaternNu, u: f64) -> f64 {
    match nu {
        MaternNu::Half => (-u).exp(),
        MaternNu::ThreeHalves => {
            let r = SQRT3 * u;
            (1.0 + r) * (-r).exp()
        }
        MaternNu::FiveHalves => {
            let r = SQRT5 * u;
            (1.0 + r + r * r / 3.0) * (-r).exp()
        }
    }
}

/// Matérn value and derivative with respect to log l.
fn matern_with_grad(nu: MaternNu, u: f64) -> (f64, f64) {
    match nu {
        MaternNu::Half => {
            let k = (-u).exp();
            (k, k * u)
        }
        MaternNu::ThreeHalves => {
            let r = SQRT3 * u;
            let e = (-r).exp();
            ((1.0 + r) * e, r * r * e)
        }
        MaternNu::FiveHalves => {
            let r = SQRT5 * u;
            let e = (-r).exp();
            ((1.0 + r + r * r / 3.0) * e, r * r * (1.0 + r) / 3.0 * e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trees() -> Vec<Kernel> {
        let rbf = Kernel::rbf(0.7).unwrap();
        let m32 = Kernel::matern(MaternNu::ThreeHalves, 1.3).unwrap();
        let m12 = Kernel::matern(MaternNu::Half, 0.4).unwrap();
        let m52 = Kernel::matern(MaternNu::FiveHalves, 2.1).unwrap();
        vec![
            rbf.clone(),
            m32.clone(),
            m12.clone(),
            m52.clone(),
            Kernel::sum(rbf.clone(), m32.clone()),
            Kernel::product(rbf.clone(), m32.clone()),
            Kernel::scaled(2.5, Kernel::product(m12, m52)).unwrap(),
            Kernel::sum(
                Kernel::scaled(0.3, rbf).unwrap(),
                Kernel::scaled(1.7, m32).unwrap(),
            ),
        ]
    }

    #[test]
    fn leaves_are_one_at_zero() {
        for nu in [MaternNu::Half, MaternNu::ThreeHalves, MaternNu::FiveHalves] {
            assert_eq!(Kernel::matern(nu, 0.3).unwrap().eval_distance(0.0), 1.0);
        }
        assert_eq!(Kernel::rbf(5.0).unwrap().eval_distance(0.0), 1.0);
    }

    #[test]
    fn reference_values() {
        let l: f64 = 1.7;
        let rbf = Kernel::rbf(l).unwrap();
        assert!((rbf.eval_distance(l * 2f64.sqrt()) - (-1.0f64).exp()).abs() < 1e-15);
        let m = Kernel::matern(MaternNu::ThreeHalves, l).unwrap();
        let v = m.eval_distance(l / 3f64.sqrt());
        assert!((v - 0.735_758_882_342_884_6).abs() < 1e-12, "{v}");
        let p = Kernel::product(
            Kernel::rbf(1.0).unwrap(),
            Kernel::matern(MaternNu::ThreeHalves, 1.0).unwrap(),
        );
        assert_eq!(p.eval_distance(0.0), 1.0);
    }

    #[test]
    fn scaled_variance_at_zero() {
        let k = Kernel::sum(
            Kernel::scaled(2.0, Kernel::rbf(1.0).unwrap()).unwrap(),
            Kernel::scaled(0.5, Kernel::matern(MaternNu::Half, 1.0).unwrap()).unwrap(),
        );
        assert!((k.variance() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for k in trees() {
            let p = k.params();
            for d in [0.0, 0.3, 1.1, 2.9] {
                let mut g = vec![0.0; p.len()];
                let v = k.eval_with_grad(d, &mut g);
                assert!((v - k.eval_distance(d)).abs() < 1e-15);
                for i in 0..p.len() {
                    let h = 1e-6;
                    let mut up = p.clone();
                    up[i] += h;
                    let mut dn = p.clone();
                    dn[i] -= h;
                    let fd = (k.with_params(&up).eval_distance(d)
                        - k.with_params(&dn).eval_distance(d))
                        / (2.0 * h);
                    assert!((fd - g[i]).abs() < 1e-7, "{k} d={d} i={i}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn params_round_trip() {
        for k in trees() {
            let p = k.params();
            assert_eq!(p.len(), k.n_params());
            assert_eq!(k.param_names().len(), p.len());
            assert_eq!(k.with_params(&p), k);
        }
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(Kernel::rbf(0.0).is_err());
        assert!(Kernel::rbf(-1.0).is_err());
        assert!(Kernel::matern(MaternNu::Half, f64::NAN).is_err());
        assert!(Kernel::scaled(0.0, Kernel::rbf(1.0).unwrap()).is_err());
        assert_eq!(MaternNu::from_f64(1.0), None);
    }
}
