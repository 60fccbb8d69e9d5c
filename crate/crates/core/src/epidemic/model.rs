use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepUnit {
    Day,
    Month,
}

impl StepUnit {
    /// Number of steps covering `months` calendar months (365-day years).
    pub fn steps_for_months(self, months: u32) -> u32 {
        match self {
            StepUnit::Month => months,
            StepUnit::Day => months * 365 / 12,
        }
    }

    /// Half-open step window `[lo, hi)` covering calendar month `month`.
    pub fn month_window(self, month: u32) -> (u32, u32) {
        (self.steps_for_months(month), self.steps_for_months(month + 1))
    }

    /// Whether daytime places (schools, workplaces) are open on `step`.
    /// Day-unit models close them two steps out of every seven.
    pub fn is_weekday(self, step: u32) -> bool {
        match self {
            StepUnit::Month => true,
            StepUnit::Day => step % 7 < 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u16);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dwell time in steps, as written in a model file:
/// `{ fixed = 3 }` or `{ uniform = [2, 5] }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Dwell {
    Fixed(u32),
    Uniform([u32; 2]),
}

impl Dwell {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match *self {
            Dwell::Fixed(k) => k,
            Dwell::Uniform([a, b]) => rng.random_range(a..=b),
        }
    }

    fn validate(&self, state: &str) -> Result<()> {
        match *self {
            Dwell::Fixed(k) if k >= 1 => Ok(()),
            Dwell::Uniform([a, b]) if 1 <= a && a <= b => Ok(()),
            _ => Err(Error::Validation(format!(
                "dwell for state `{state}` must satisfy 1 <= a <= b (or fixed k >= 1), got {self:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub from: String,
    pub to: String,
    pub p: f64,
}

/// On-disk form of a disease model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub step_unit: StepUnit,
    pub states: Vec<String>,
    pub initial_state: String,
    pub susceptible_state: String,
    /// State entered by a susceptible agent on exposure.
    pub exposed_state: String,
    #[serde(default)]
    pub transmissible_states: Vec<String>,
    pub transmissibility: f64,
    #[serde(default)]
    pub logged_states: Vec<String>,
    #[serde(default)]
    pub stay_home_when_symptomatic: bool,
    #[serde(default)]
    pub symptomatic_states: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub dwell: BTreeMap<String, Dwell>,
}

/// A validated disease state machine.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    pub name: String,
    pub step_unit: StepUnit,
    states: Vec<String>,
    pub initial: StateId,
    pub susceptible: StateId,
    pub exposed: StateId,
    pub transmissibility: f64,
    pub stay_home_when_symptomatic: bool,
    transmissible: Vec<bool>,
    logged: Vec<bool>,
    symptomatic: Vec<bool>,
    rows: Vec<Vec<(StateId, f64)>>,
    dwell: Vec<Option<Dwell>>,
    config: ModelConfig,
}

impl TransitionModel {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("model config: {e}")))?;
        Self::from_config(cfg)
    }

    pub fn from_config(cfg: ModelConfig) -> Result<Self> {
        if cfg.states.is_empty() {
            return Err(Error::Validation("model declares no states".into()));
        }
        if cfg.states.len() > u16::MAX as usize {
            return Err(Error::Validation("too many states".into()));
        }
        let mut index: HashMap<&str, StateId> = HashMap::new();
        for (i, s) in cfg.states.iter().enumerate() {
            if index.insert(s.as_str(), StateId(i as u16)).is_some() {
                return Err(Error::Validation(format!("duplicate state `{s}`")));
            }
        }
        let lookup = |name: &str, role: &str| {
            index.get(name).copied().ok_or_else(|| {
                Error::Validation(format!("unknown state `{name}` referenced as {role}"))
            })
        };
        let flags = |names: &[String], role: &str| -> Result<Vec<bool>> {
            let mut v = vec![false; cfg.states.len()];
            for n in names {
                v[lookup(n, role)?.index()] = true;
            }
            Ok(v)
        };

        let initial = lookup(&cfg.initial_state, "initial_state")?;
        let susceptible = lookup(&cfg.susceptible_state, "susceptible_state")?;
        let exposed = lookup(&cfg.exposed_state, "exposed_state")?;
        if exposed == susceptible {
            return Err(Error::Validation(
                "exposed_state must differ from susceptible_state".into(),
            ));
        }
        let transmissible = flags(&cfg.transmissible_states, "transmissible state")?;
        let logged = flags(&cfg.logged_states, "logged state")?;
        let symptomatic = flags(&cfg.symptomatic_states, "symptomatic state")?;

        if !(cfg.transmissibility.is_finite() && (0.0..=1.0).contains(&cfg.transmissibility)) {
            return Err(Error::Validation(format!(
                "transmissibility must lie in [0, 1], got {}",
                cfg.transmissibility
            )));
        }

        let n = cfg.states.len();
        let mut rows: Vec<Vec<(StateId, f64)>> = vec![Vec::new(); n];
        for t in &cfg.transitions {
            let from = lookup(&t.from, "transition source")?;
            let to = lookup(&t.to, "transition target")?;
            if !(t.p.is_finite() && (0.0..=1.0).contains(&t.p)) {
                return Err(Error::Validation(format!(
                    "transition {} -> {} has probability {} outside [0, 1]",
                    t.from, t.to, t.p
                )));
            }
            if rows[from.index()].iter().any(|(s, _)| *s == to) {
                return Err(Error::Validation(format!(
                    "duplicate transition {} -> {}",
                    t.from, t.to
                )));
            }
            rows[from.index()].push((to, t.p));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let sum: f64 = row.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Validation(format!(
                    "outgoing probabilities from state `{}` sum to {sum}, expected 1",
                    cfg.states[i]
                )));
            }
        }

        let mut dwell = vec![None; n];
        for (name, d) in &cfg.dwell {
            let id = lookup(name, "dwell entry")?;
            d.validate(name)?;
            dwell[id.index()] = Some(*d);
        }
        if dwell[susceptible.index()].is_some() || !rows[susceptible.index()].is_empty() {
            return Err(Error::Validation(format!(
                "susceptible state `{}` must have no dwell and no outgoing transitions; it is left only via exposure",
                cfg.susceptible_state
            )));
        }
        for i in 0..n {
            match (dwell[i].is_some(), rows[i].is_empty()) {
                (true, true) => {
                    return Err(Error::Validation(format!(
                        "state `{}` has a dwell time but no outgoing transitions",
                        cfg.states[i]
                    )))
                }
                (false, false) => {
                    return Err(Error::Validation(format!(
                        "state `{}` has outgoing transitions but no dwell time",
                        cfg.states[i]
                    )))
                }
                _ => {}
            }
        }

        Ok(TransitionModel {
            name: cfg.name.clone(),
            step_unit: cfg.step_unit,
            states: cfg.states.clone(),
            initial,
            susceptible,
            exposed,
            transmissibility: cfg.transmissibility,
            stay_home_when_symptomatic: cfg.stay_home_when_symptomatic,
            transmissible,
            logged,
            symptomatic,
            rows,
            dwell,
            config: cfg,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id.index()]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u16))
    }

    pub fn is_transmissible(&self, s: StateId) -> bool {
        self.transmissible[s.index()]
    }

    pub fn is_logged(&self, s: StateId) -> bool {
        self.logged[s.index()]
    }

    pub fn is_symptomatic(&self, s: StateId) -> bool {
        self.symptomatic[s.index()]
    }

    /// Terminal states have no outgoing transitions and are never left
    /// (the susceptible state is left via exposure, so it is not terminal).
    pub fn is_terminal(&self, s: StateId) -> bool {
        s != self.susceptible && self.rows[s.index()].is_empty()
    }

    pub fn dwell(&self, s: StateId) -> Option<Dwell> {
        self.dwell[s.index()]
    }

    pub fn transitions_from(&self, s: StateId) -> &[(StateId, f64)] {
        &self.rows[s.index()]
    }

    /// Draws the successor of `s` from its transition row.
    pub(crate) fn next_state<R: Rng + ?Sized>(&self, s: StateId, rng: &mut R) -> StateId {
        let row = &self.rows[s.index()];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(to, p) in row {
            acc += p;
            if u < acc {
                return to;
            }
        }
        // Rounding can leave acc a hair below 1; fall back to the last
        // state with nonzero probability.
        row.iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map(|(to, _)| *to)
            .unwrap_or(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const INF: &str = r#"
name = "INF"
step_unit = "day"
states = ["Susceptible", "Exposed", "InfectedSymptomatic", "InfectedAsymptomatic", "Recovered"]
initial_state = "Susceptible"
susceptible_state = "Susceptible"
exposed_state = "Exposed"
transmissible_states = ["InfectedSymptomatic", "InfectedAsymptomatic"]
transmissibility = 0.05
logged_states = ["InfectedSymptomatic"]

[[transitions]]
from = "Exposed"
to = "InfectedSymptomatic"
p = 0.67

[[transitions]]
from = "Exposed"
to = "InfectedAsymptomatic"
p = 0.33

[[transitions]]
from = "InfectedSymptomatic"
to = "Recovered"
p = 1.0

[[transitions]]
from = "InfectedAsymptomatic"
to = "Recovered"
p = 1.0

[dwell]
Exposed = { fixed = 2 }
InfectedSymptomatic = { uniform = [3, 6] }
InfectedAsymptomatic = { uniform = [2, 4] }
"#;

    #[test]
    fn loads_inf_structure() {
        let m = TransitionModel::from_toml_str(INF).unwrap();
        assert_eq!(m.state_count(), 5);
        assert_eq!(m.step_unit, StepUnit::Day);
        let e = m.state_id("Exposed").unwrap();
        let row = m.transitions_from(e);
        assert_eq!(row.len(), 2);
        assert!(m.is_logged(m.state_id("InfectedSymptomatic").unwrap()));
        assert!(m.is_terminal(m.state_id("Recovered").unwrap()));
        assert!(!m.is_terminal(m.susceptible));
    }

    #[test]
    fn row_sum_error_names_state() {
        let bad = INF.replace("p = 0.33", "p = 0.23");
        match TransitionModel::from_toml_str(&bad) {
            Err(Error::Validation(msg)) => assert!(msg.contains("Exposed"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_state_in_transition() {
        let bad = INF.replace("to = \"Recovered\"\np = 1.0\n\n[[transitions]]", "to = \"Dead\"\np = 1.0\n\n[[transitions]]");
        match TransitionModel::from_toml_str(&bad) {
            Err(Error::Validation(msg)) => assert!(msg.contains("Dead"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn dwell_bounds_checked() {
        let bad = INF.replace("uniform = [3, 6]", "uniform = [6, 3]");
        assert!(TransitionModel::from_toml_str(&bad).is_err());
        let bad = INF.replace("fixed = 2", "fixed = 0");
        assert!(TransitionModel::from_toml_str(&bad).is_err());
    }

    #[test]
    fn susceptible_must_not_dwell() {
        let bad = INF.replace("[dwell]\n", "[dwell]\nSusceptible = { fixed = 1 }\n");
        assert!(TransitionModel::from_toml_str(&bad).is_err());
    }

    #[test]
    fn month_windows() {
        assert_eq!(StepUnit::Month.month_window(12), (12, 13));
        assert_eq!(StepUnit::Day.month_window(12), (365, 395));
        assert_eq!(StepUnit::Day.steps_for_months(24), 730);
    }

    #[test]
    fn next_state_follows_probabilities() {
        use rand::SeedableRng;
        let m = TransitionModel::from_toml_str(INF).unwrap();
        let e = m.state_id("Exposed").unwrap();
        let is = m.state_id("InfectedSymptomatic").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let hits = (0..n).filter(|_| m.next_state(e, &mut rng) == is).count();
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.67).abs() < 0.005, "{frac}");
    }
}
