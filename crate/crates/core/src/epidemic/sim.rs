use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{StateId, TransitionModel};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::synthpop::{PlaceKind, Population};

/// Initial infections: `count` susceptible agents moved to `state`,
/// optionally restricted to agents whose household lies in `zones`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeding {
    pub count: usize,
    pub state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zones: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidentRecord {
    pub step: u32,
    pub agent_id: usize,
    pub state: String,
    pub location: Point,
    pub zone_id: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IncidentLog {
    pub records: Vec<IncidentRecord>,
}

/// Per-step state counts, taken after each step completes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tallies {
    pub states: Vec<String>,
    pub rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub step: u32,
    states: Vec<StateId>,
    remaining: Vec<u32>,
    ever_infected: Vec<bool>,
    exposed_at: Vec<u32>,
    rng: ChaCha8Rng,
}

impl SimState {
    pub fn agent_state(&self, agent: usize) -> StateId {
        self.states[agent]
    }

    pub fn steps_remaining(&self, agent: usize) -> u32 {
        self.remaining[agent]
    }

    pub fn counts(&self, n_states: usize) -> Vec<usize> {
        let mut c = vec![0; n_states];
        for s in &self.states {
            c[s.index()] += 1;
        }
        c
    }

    /// Agents that have ever left the susceptible state.
    pub fn ever_infected(&self) -> usize {
        self.ever_infected.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: IncidentLog,
    pub tallies: Tallies,
    pub ever_infected: usize,
}

/// A disease model bound to a population, with the place membership index
/// precomputed.
pub struct Simulation<'a> {
    model: &'a TransitionModel,
    pop: &'a Population,
    members: Vec<Vec<usize>>,
    daytime_places: Vec<usize>,
    households: Vec<usize>,
}

impl<'a> Simulation<'a> {
    pub fn new(model: &'a TransitionModel, pop: &'a Population) -> Self {
        let mut members = vec![Vec::new(); pop.places.len()];
        for a in &pop.agents {
            members[a.household_id].push(a.agent_id);
            if let Some(d) = a.daytime_place_id {
                members[d].push(a.agent_id);
            }
        }
        let (households, daytime_places) = pop
            .places
            .iter()
            .map(|p| p.place_id)
            .partition(|&id| pop.places[id].kind == PlaceKind::Household);
        Simulation {
            model,
            pop,
            members,
            daytime_places,
            households,
        }
    }

    /// Everyone in the model's initial state, with a sampled dwell if that
    /// state has one.
    pub fn initial_state(&self, seed: u64) -> SimState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.pop.agents.len();
        let init = self.model.initial;
        let remaining = (0..n)
            .map(|_| self.model.dwell(init).map_or(0, |d| d.sample(&mut rng)))
            .collect();
        SimState {
            step: 0,
            states: vec![init; n],
            remaining,
            ever_infected: vec![init != self.model.susceptible; n],
            exposed_at: vec![u32::MAX; n],
            rng,
        }
    }

    /// Moves exactly `k` distinct susceptible agents into `target`.
    pub fn seed_infections(
        &self,
        state: &mut SimState,
        k: usize,
        target: &str,
        zones: Option<&[usize]>,
    ) -> Result<Vec<usize>> {
        let n = self.pop.agents.len();
        if k > n {
            return Err(Error::Argument(format!(
                "cannot seed {k} infections in a population of {n}"
            )));
        }
        let target_id = self.model.state_id(target).ok_or_else(|| {
            Error::Argument(format!("seeding target `{target}` is not a model state"))
        })?;
        if target_id == self.model.susceptible {
            return Err(Error::Argument(format!(
                "seeding target `{target}` is the susceptible state"
            )));
        }
        let candidates: Vec<usize> = self
            .pop
            .agents
            .iter()
            .filter(|a| state.states[a.agent_id] == self.model.susceptible)
            .filter(|a| match zones {
                Some(zs) => zs.contains(&self.pop.places[a.household_id].zone_id),
                None => true,
            })
            .map(|a| a.agent_id)
            .collect();
        if k > candidates.len() {
            return Err(Error::Argument(format!(
                "cannot seed {k} infections: only {} eligible susceptible agents",
                candidates.len()
            )));
        }
        let mut chosen: Vec<usize> = index::sample(&mut state.rng, candidates.len(), k)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        chosen.sort_unstable();
        for &a in &chosen {
            state.states[a] = target_id;
            state.remaining[a] = self
                .model
                .dwell(target_id)
                .map_or(0, |d| d.sample(&mut state.rng));
            state.ever_infected[a] = true;
        }
        Ok(chosen)
    }

    /// Advances one step: place mixing, then dwell-driven progression.
    /// Returns the incidents (entries into logged states) of this step.
    pub fn step(&self, state: &mut SimState) -> Vec<IncidentRecord> {
        let model = self.model;
        let step = state.step;
        let mut records = Vec::new();

        let mut newly_exposed = Vec::new();
        let tau = model.transmissibility;
        if tau > 0.0 {
            let weekday = model.step_unit.is_weekday(step);
            let place_lists: [&[usize]; 2] = if weekday {
                [&self.households, &self.daytime_places]
            } else {
                [&self.households, &[]]
            };
            for (kind_idx, places) in place_lists.iter().enumerate() {
                let daytime = kind_idx == 1;
                for &pid in places.iter() {
                    let present = |a: &usize| {
                        !(daytime
                            && model.stay_home_when_symptomatic
                            && model.is_symptomatic(state.states[*a]))
                    };
                    let m = self.members[pid]
                        .iter()
                        .filter(|a| present(a) && model.is_transmissible(state.states[**a]))
                        .count();
                    if m == 0 {
                        continue;
                    }
                    let p = 1.0 - (1.0 - tau).powi(m as i32);
                    for &a in &self.members[pid] {
                        if state.states[a] == model.susceptible
                            && state.exposed_at[a] != step
                            && present(&a)
                            && state.rng.random::<f64>() < p
                        {
                            state.exposed_at[a] = step;
                            newly_exposed.push(a);
                        }
                    }
                }
            }
        }

        for &a in &newly_exposed {
            let s = model.exposed;
            state.states[a] = s;
            state.remaining[a] = model.dwell(s).map_or(0, |d| d.sample(&mut state.rng));
            state.ever_infected[a] = true;
            if model.is_logged(s) {
                records.push(self.record(step, a, s));
            }
        }

        for a in 0..state.states.len() {
            if state.exposed_at[a] == step || state.remaining[a] == 0 {
                continue;
            }
            state.remaining[a] -= 1;
            if state.remaining[a] > 0 {
                continue;
            }
            let next = model.next_state(state.states[a], &mut state.rng);
            state.states[a] = next;
            state.remaining[a] = model.dwell(next).map_or(0, |d| d.sample(&mut state.rng));
            if model.is_logged(next) {
                records.push(self.record(step, a, next));
            }
        }

        state.step += 1;
        records
    }

    fn record(&self, step: u32, agent: usize, s: StateId) -> IncidentRecord {
        let home = self.pop.household_of(&self.pop.agents[agent]);
        IncidentRecord {
            step,
            agent_id: agent,
            state: self.model.state_name(s).to_string(),
            location: home.location,
            zone_id: home.zone_id,
        }
    }

    /// Seeds, then runs steps `[0, horizon)`. Deterministic in `seed`.
    pub fn run(&self, seeding: &Seeding, horizon: u32, seed: u64) -> Result<RunOutput> {
        if horizon == 0 {
            return Err(Error::Argument("horizon must be at least one step".into()));
        }
        let mut state = self.initial_state(seed);
        self.seed_infections(
            &mut state,
            seeding.count,
            &seeding.state,
            seeding.zones.as_deref(),
        )?;
        let n_states = self.model.state_count();
        let mut log = IncidentLog::default();
        let mut rows = Vec::with_capacity(horizon as usize);
        for _ in 0..horizon {
            log.records.extend(self.step(&mut state));
            rows.push(state.counts(n_states));
        }
        Ok(RunOutput {
            log,
            tallies: Tallies {
                states: self.model.state_names().to_vec(),
                rows,
            },
            ever_infected: state.ever_infected(),
        })
    }
}

/// Convenience wrapper around [`Simulation::run`].
pub fn run(
    model: &TransitionModel,
    pop: &Population,
    seeding: &Seeding,
    horizon: u32,
    seed: u64,
) -> Result<RunOutput> {
    Simulation::new(model, pop).run(seeding, horizon, seed)
}
