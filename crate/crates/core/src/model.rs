//! Population and network data model.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic random stream used by every stochastic routine.
///
/// ChaCha8 output is specified independently of platform and word size, so a
/// seed reproduces the same trajectory everywhere.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub type PersonId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    /// +1 for female, -1 for male.
    pub fn sign(self) -> i32 {
        match self {
            Gender::Female => 1,
            Gender::Male => -1,
        }
    }

    pub fn opposite(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Health {
    Susceptible,
    Infectious,
    Recovered,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Person {
    pub id: PersonId,
    /// Age in years, fixed for the whole run.
    pub age: u32,
    pub gender: Gender,
    /// Average relationship duration in days.
    pub avg_rel_duration: u32,
    /// Lifetime sexual partners estimate.
    pub lsp: u32,
    /// Cumulative sexual partners so far.
    pub sp: u32,
    pub health: Health,
    /// Recovery period in days, assigned on infection.
    pub recovery_period: Option<u32>,
    pub infected_at: Option<u64>,
    pub joined: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Primary,
    Secondary,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Primary => "primary",
            EdgeKind::Secondary => "secondary",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeKind> {
        match s {
            "primary" | "Primary" => Some(EdgeKind::Primary),
            "secondary" | "Secondary" => Some(EdgeKind::Secondary),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Relationship {
    pub female: PersonId,
    pub male: PersonId,
    pub formed_at: u64,
    /// Expected duration in days; the edge is active while its age is below this.
    pub duration: u64,
    pub kind: EdgeKind,
}

impl Relationship {
    pub fn age_at(&self, t: u64) -> u64 {
        t.saturating_sub(self.formed_at)
    }

    pub fn expired_at(&self, t: u64) -> bool {
        self.age_at(t) >= self.duration
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Phase1,
    Phase2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeBracket {
    pub lo: u32,
    pub hi: u32,
    pub percent: f64,
}

/// Age brackets with their population share in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgeTable(pub Vec<AgeBracket>);

impl Default for AgeTable {
    fn default() -> Self {
        let rows = [
            (15, 19, 12.3),
            (20, 24, 13.4),
            (25, 29, 15.1),
            (30, 34, 15.8),
            (35, 39, 15.6),
            (40, 44, 14.0),
            (45, 49, 13.8),
        ];
        AgeTable(
            rows.iter()
                .map(|&(lo, hi, percent)| AgeBracket { lo, hi, percent })
                .collect(),
        )
    }
}

impl AgeTable {
    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::range("age_table", "at least one bracket is required"));
        }
        for b in &self.0 {
            if b.lo > b.hi {
                return Err(Error::range(
                    "age_table",
                    format!("bracket [{}, {}] is inverted", b.lo, b.hi),
                ));
            }
            if !(b.percent.is_finite() && b.percent >= 0.0) {
                return Err(Error::range(
                    "age_table",
                    format!("bracket [{}, {}] has a negative share", b.lo, b.hi),
                ));
            }
        }
        let total: f64 = self.0.iter().map(|b| b.percent).sum();
        if (total - 100.0).abs() > 0.1 {
            return Err(Error::range(
                "age_table",
                format!("percentages sum to {total}, expected 100"),
            ));
        }
        Ok(())
    }
}

/// Picks a bracket with the table's probability, then an age uniformly inside it.
pub fn sample_age<R: Rng + ?Sized>(table: &AgeTable, rng: &mut R) -> Result<u32> {
    table.validate()?;
    let total: f64 = table.0.iter().map(|b| b.percent).sum();
    let mut u = rng.random::<f64>() * total;
    let mut chosen = table.0.last().expect("validated non-empty");
    for b in &table.0 {
        if u < b.percent {
            chosen = b;
            break;
        }
        u -= b.percent;
    }
    Ok(rng.random_range(chosen.lo..=chosen.hi))
}

/// The three growth mechanisms, used to configure their order within a day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Introduce,
    Expire,
    Secondary,
}

pub const DEFAULT_ORDER: [Mechanism; 3] = [Mechanism::Introduce, Mechanism::Expire, Mechanism::Secondary];

/// Growth and epidemic parameters for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub population: usize,
    pub timesteps: u64,
    pub m0: usize,
    pub m: usize,
    pub epsilon: f64,
    pub mean_delta: f64,
    pub mean_eta: f64,
    pub age_table: AgeTable,
    pub order: [Mechanism; 3],
    pub beta: f64,
    pub mean_alpha: f64,
    pub f_early: f64,
    pub f_late: f64,
    pub f_switch: u64,
    pub seed_interval: usize,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            population: 3000,
            timesteps: 9000,
            m0: 5,
            m: 2,
            epsilon: 0.5,
            mean_delta: 500.0,
            mean_eta: 3.5,
            age_table: AgeTable::default(),
            order: DEFAULT_ORDER,
            beta: 0.3,
            mean_alpha: 390.0,
            f_early: 0.5,
            f_late: 1.0 / 7.0,
            f_switch: 14,
            seed_interval: 100,
            rng_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population <= 2 * self.m0 {
            return Err(Error::range(
                "population",
                format!("must exceed 2*m0 = {}", 2 * self.m0),
            ));
        }
        if self.m0 == 0 {
            return Err(Error::range("m0", "must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::range("m", "must be at least 1"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::range("epsilon", "must be a positive real"));
        }
        if !(self.mean_delta.is_finite() && self.mean_delta > 0.0) {
            return Err(Error::range("mean_delta", "must be positive"));
        }
        if !(self.mean_eta.is_finite() && self.mean_eta >= 0.0) {
            return Err(Error::range("mean_eta", "must be non-negative"));
        }
        self.age_table.validate()?;
        let mut seen = self.order.to_vec();
        seen.sort_by_key(|m| *m as u8);
        seen.dedup();
        if seen.len() != 3 {
            return Err(Error::range("order", "must list each mechanism exactly once"));
        }
        for (key, v) in [("beta", self.beta), ("f_early", self.f_early), ("f_late", self.f_late)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::range(key, format!("{v} is outside [0, 1]")));
            }
        }
        if !(self.mean_alpha.is_finite() && self.mean_alpha > 0.0) {
            return Err(Error::range("mean_alpha", "must be positive"));
        }
        if self.seed_interval == 0 {
            return Err(Error::range("seed_interval", "must be at least 1"));
        }
        Ok(())
    }
}

/// `round(T / delta)` with halves rounded up, never below 1.
pub fn lifetime_partners(timesteps: u64, delta: u32) -> u32 {
    let delta = u64::from(delta.max(1));
    let lsp = (2 * timesteps + delta) / (2 * delta);
    lsp.clamp(1, u64::from(u32::MAX)) as u32
}

/// Draws the N persons with their static attributes. Nobody has joined yet.
pub fn initialize_population<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Vec<Person>> {
    config.validate()?;
    let poisson = Poisson::new(config.mean_delta)
        .map_err(|e| Error::range("mean_delta", e.to_string()))?;
    let mut persons = Vec::with_capacity(config.population);
    for id in 0..config.population {
        let gender = if rng.random_bool(0.5) { Gender::Female } else { Gender::Male };
        let age = sample_age(&config.age_table, rng)?;
        let draw: f64 = poisson.sample(rng);
        // A zero draw would make lsp infinite.
        let avg_rel_duration = (draw as u32).max(1);
        let lsp = lifetime_partners(config.timesteps, avg_rel_duration);
        let sp = if age < 20 { 0 } else { rng.random_range(0..lsp) };
        persons.push(Person {
            id,
            age,
            gender,
            avg_rel_duration,
            lsp,
            sp,
            health: Health::Susceptible,
            recovery_period: None,
            infected_at: None,
            joined: false,
        });
    }
    Ok(persons)
}

/// The evolving bipartite contact network plus the simulation clock.
#[derive(Clone, Debug)]
pub struct NetworkState {
    pub persons: Vec<Person>,
    edges: Vec<Relationship>,
    neighbors: Vec<Vec<PersonId>>,
    unjoined: Vec<PersonId>,
    pub t: u64,
    pub phase: Phase,
    joined_count: usize,
    formed_count: u64,
    formed_duration_sum: u64,
}

impl NetworkState {
    /// Wraps a population with no edges and nobody joined.
    pub fn new(persons: Vec<Person>) -> Self {
        let n = persons.len();
        let unjoined = persons.iter().filter(|p| !p.joined).map(|p| p.id).collect::<Vec<_>>();
        let joined_count = n - unjoined.len();
        let mut state = NetworkState {
            persons,
            edges: Vec::new(),
            neighbors: vec![Vec::new(); n],
            unjoined,
            t: 0,
            phase: Phase::Phase1,
            joined_count,
            formed_count: 0,
            formed_duration_sum: 0,
        };
        state.refresh_phase();
        state
    }

    pub fn population(&self) -> usize {
        self.persons.len()
    }

    pub fn edges(&self) -> &[Relationship] {
        &self.edges
    }

    /// Current active edge count M.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn joined_count(&self) -> usize {
        self.joined_count
    }

    pub fn unjoined(&self) -> &[PersonId] {
        &self.unjoined
    }

    pub fn degree(&self, id: PersonId) -> usize {
        self.neighbors[id].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, id: PersonId) -> &[PersonId] {
        &self.neighbors[id]
    }

    pub fn has_edge(&self, a: PersonId, b: PersonId) -> bool {
        let (short, other) = if self.neighbors[a].len() <= self.neighbors[b].len() { (a, b) } else { (b, a) };
        self.neighbors[short].contains(&other)
    }

    /// Total number of edges created so far, including expired ones.
    pub fn formed_count(&self) -> u64 {
        self.formed_count
    }

    /// Sum of assigned durations over every edge created so far.
    pub fn formed_duration_sum(&self) -> u64 {
        self.formed_duration_sum
    }

    pub fn mark_joined(&mut self, id: PersonId) {
        if self.persons[id].joined {
            return;
        }
        self.persons[id].joined = true;
        if let Some(pos) = self.unjoined.iter().position(|&u| u == id) {
            self.unjoined.swap_remove(pos);
        }
        self.joined_count += 1;
    }

    /// Inserts an edge between opposite-gender persons and bumps both partner counts.
    ///
    /// Returns the stored relationship, or `None` when the pair is same-gender
    /// or already linked.
    pub fn add_edge(&mut self, a: PersonId, b: PersonId, duration: u64, kind: EdgeKind) -> Option<Relationship> {
        let ga = self.persons[a].gender;
        let gb = self.persons[b].gender;
        if ga == gb || self.has_edge(a, b) {
            return None;
        }
        let (female, male) = if ga == Gender::Female { (a, b) } else { (b, a) };
        let rel = Relationship {
            female,
            male,
            formed_at: self.t,
            duration: duration.max(1),
            kind,
        };
        self.edges.push(rel);
        self.neighbors[female].push(male);
        self.neighbors[male].push(female);
        self.persons[female].sp += 1;
        self.persons[male].sp += 1;
        self.formed_count += 1;
        self.formed_duration_sum += rel.duration;
        Some(rel)
    }

    /// Removes every edge whose age has reached its duration and returns them.
    pub fn remove_expired(&mut self) -> Vec<Relationship> {
        let t = self.t;
        let mut removed = Vec::new();
        let neighbors = &mut self.neighbors;
        self.edges.retain(|e| {
            if e.expired_at(t) {
                detach(&mut neighbors[e.female], e.male);
                detach(&mut neighbors[e.male], e.female);
                removed.push(*e);
                false
            } else {
                true
            }
        });
        removed
    }

    pub fn refresh_phase(&mut self) {
        self.phase = if self.joined_count == self.persons.len() { Phase::Phase2 } else { Phase::Phase1 };
    }

    pub fn is_bipartite(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.persons[e.female].gender != self.persons[e.male].gender)
    }
}

fn detach(list: &mut Vec<PersonId>, id: PersonId) {
    if let Some(pos) = list.iter().position(|&x| x == id) {
        list.swap_remove(pos);
    }
}
