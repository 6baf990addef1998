//! SIR transmission over the active relationships.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::growth::Joined;
use crate::model::{Health, NetworkState, PersonId, SimConfig};

/// Per-day intercourse probability as a function of relationship age.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntercourseSchedule {
    pub f_early: f64,
    pub f_late: f64,
    pub switch_at: u64,
}

impl IntercourseSchedule {
    pub fn from_config(config: &SimConfig) -> Self {
        IntercourseSchedule {
            f_early: config.f_early,
            f_late: config.f_late,
            switch_at: config.f_switch,
        }
    }

    pub fn rate(&self, edge_age: u64) -> f64 {
        if edge_age < self.switch_at {
            self.f_early
        } else {
            self.f_late
        }
    }
}

/// Daily probability that a discordant relationship of this age transmits.
pub fn daily_transmission_probability(config: &SimConfig, edge_age: u64) -> f64 {
    IntercourseSchedule::from_config(config).rate(edge_age) * config.beta
}

/// Exponential recovery period with the configured mean, rounded up to whole days.
pub fn sample_recovery_period<R: Rng + ?Sized>(mean_alpha: f64, rng: &mut R) -> u32 {
    let exp = Exp::new(1.0 / mean_alpha).expect("positive mean");
    let draw: f64 = exp.sample(rng);
    (draw.ceil() as u32).max(1)
}

fn infect<R: Rng + ?Sized>(state: &mut NetworkState, id: PersonId, config: &SimConfig, rng: &mut R) {
    let t = state.t;
    let p = &mut state.persons[id];
    p.health = Health::Infectious;
    p.infected_at = Some(t);
    p.recovery_period = Some(sample_recovery_period(config.mean_alpha, rng));
}

/// Makes the joining person infectious when their joining ordinal is a multiple
/// of `seed_interval`. Returns whether a seed was placed.
pub fn seed_infection<R: Rng + ?Sized>(
    state: &mut NetworkState,
    joined: &Joined,
    config: &SimConfig,
    rng: &mut R,
) -> bool {
    if !joined.ordinal.is_multiple_of(config.seed_interval) {
        return false;
    }
    if state.persons[joined.id].health != Health::Susceptible {
        return false;
    }
    infect(state, joined.id, config, rng);
    true
}

/// One day of transmission, evaluated against the start-of-day health states.
/// Returns the newly infected persons in infection order.
pub fn transmission_step<R: Rng + ?Sized>(state: &mut NetworkState, config: &SimConfig, rng: &mut R) -> Vec<PersonId> {
    let t = state.t;
    let schedule = IntercourseSchedule::from_config(config);
    let mut newly = Vec::new();
    for e in state.edges() {
        let hf = state.persons[e.female].health;
        let hm = state.persons[e.male].health;
        let target = match (hf, hm) {
            (Health::Infectious, Health::Susceptible) => e.male,
            (Health::Susceptible, Health::Infectious) => e.female,
            _ => continue,
        };
        let p = schedule.rate(e.age_at(t)) * config.beta;
        if rng.random_bool(p.clamp(0.0, 1.0)) {
            newly.push(target);
        }
    }
    let mut infected = Vec::with_capacity(newly.len());
    for id in newly {
        if state.persons[id].health == Health::Susceptible {
            infect(state, id, config, rng);
            infected.push(id);
        }
    }
    infected
}

/// Moves every infectious person whose recovery period has elapsed to Recovered.
pub fn recovery_step(state: &mut NetworkState) -> usize {
    let t = state.t;
    let mut recovered = 0;
    for p in state.persons.iter_mut().filter(|p| p.health == Health::Infectious) {
        let (Some(since), Some(alpha)) = (p.infected_at, p.recovery_period) else { continue };
        if t - since >= u64::from(alpha) {
            p.health = Health::Recovered;
            recovered += 1;
        }
    }
    recovered
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SirCounts {
    pub susceptible: usize,
    pub infectious: usize,
    pub recovered: usize,
}

impl SirCounts {
    pub fn total(&self) -> usize {
        self.susceptible + self.infectious + self.recovered
    }
}

pub fn sir_counts(state: &NetworkState) -> SirCounts {
    let mut c = SirCounts::default();
    for p in &state.persons {
        match p.health {
            Health::Susceptible => c.susceptible += 1,
            Health::Infectious => c.infectious += 1,
            Health::Recovered => c.recovered += 1,
        }
    }
    c
}
