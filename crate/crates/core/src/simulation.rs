//! Day-by-day orchestration of growth and transmission for a single run.

use crate::epidemic::{self, SirCounts};
use crate::error::Result;
use crate::growth::{self, EdgeEvent, SecondaryLinkBudget};
use crate::model::{initialize_population, rng_from_seed, NetworkState, Phase, SimConfig, SimRng};

/// Per-day observables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSeriesRecord {
    pub t: u64,
    pub links: usize,
    pub avg_degree: f64,
    pub susceptible: usize,
    pub infectious: usize,
    pub recovered: usize,
}

/// Tally of per-day invariant checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InvariantAudit {
    pub days_checked: u64,
    pub conservation_violations: u64,
    pub bipartite_violations: u64,
}

impl InvariantAudit {
    pub fn clean(&self) -> bool {
        self.conservation_violations == 0 && self.bipartite_violations == 0
    }
}

pub struct Simulation {
    pub config: SimConfig,
    pub state: NetworkState,
    rng: SimRng,
    budget: SecondaryLinkBudget,
    pub events: Vec<EdgeEvent>,
    pub series: Vec<TimeSeriesRecord>,
    pub audit: InvariantAudit,
    pub seeds: usize,
    phase1_end: Option<u64>,
}

impl Simulation {
    /// Draws the population and the initial couples from `config.rng_seed`.
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_from_seed(config.rng_seed);
        let persons = initialize_population(&config, &mut rng)?;
        let mut state = NetworkState::new(persons);
        let mut events = Vec::new();
        growth::seed_couples(&mut state, &config, &mut rng, &mut events)?;
        Ok(Simulation {
            config,
            state,
            rng,
            budget: SecondaryLinkBudget::default(),
            events,
            series: Vec::new(),
            audit: InvariantAudit::default(),
            seeds: 0,
            phase1_end: None,
        })
    }

    pub fn finished(&self) -> bool {
        self.state.t >= self.config.timesteps
    }

    /// Clock value at which every person had joined, once reached.
    pub fn phase1_end(&self) -> Option<u64> {
        self.phase1_end
    }

    /// Growth, then seeding and transmission, then recovery; records the day and
    /// advances the clock. Returns false once the horizon is reached.
    pub fn step_day(&mut self) -> bool {
        if self.finished() {
            return false;
        }
        let report = growth::run_mechanisms(&mut self.state, &self.config, &mut self.rng, &mut self.budget, &mut self.events);
        if let Some(joined) = &report.joined {
            if epidemic::seed_infection(&mut self.state, joined, &self.config, &mut self.rng) {
                self.seeds += 1;
            }
        }
        epidemic::transmission_step(&mut self.state, &self.config, &mut self.rng);
        epidemic::recovery_step(&mut self.state);

        let counts = epidemic::sir_counts(&self.state);
        self.check_invariants(&counts);
        let n = self.state.population();
        self.series.push(TimeSeriesRecord {
            t: self.state.t,
            links: self.state.edge_count(),
            avg_degree: 2.0 * self.state.edge_count() as f64 / n as f64,
            susceptible: counts.susceptible,
            infectious: counts.infectious,
            recovered: counts.recovered,
        });

        growth::finish_day(&mut self.state);
        if self.phase1_end.is_none() && self.state.phase == Phase::Phase2 {
            self.phase1_end = Some(self.state.t);
        }
        true
    }

    /// Runs to the horizon, calling `at_clock` with the state at every clock value
    /// (including the initial one).
    pub fn run_observed(&mut self, mut at_clock: impl FnMut(&Simulation)) {
        at_clock(self);
        while self.step_day() {
            at_clock(self);
        }
    }

    pub fn run(&mut self) {
        while self.step_day() {}
    }

    fn check_invariants(&mut self, counts: &SirCounts) {
        self.audit.days_checked += 1;
        if counts.total() != self.state.population() {
            self.audit.conservation_violations += 1;
        }
        if !self.state.is_bipartite() {
            self.audit.bipartite_violations += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig { population: 300, timesteps: 1200, seed_interval: 50, ..SimConfig::default() }
    }

    #[test]
    fn zero_length_run_is_a_no_op() {
        let mut sim = Simulation::new(SimConfig { timesteps: 0, ..small() }).unwrap();
        let edges = sim.state.edges().to_vec();
        assert!(!sim.step_day());
        assert_eq!(sim.state.t, 0);
        assert_eq!(sim.state.edges(), &edges[..]);
        assert!(sim.series.is_empty());
    }

    #[test]
    fn one_record_per_day() {
        let mut sim = Simulation::new(small()).unwrap();
        sim.run();
        assert_eq!(sim.series.len(), 1200);
        assert!(sim.series.iter().enumerate().all(|(i, r)| r.t == i as u64));
        assert!(sim.audit.clean());
        assert_eq!(sim.audit.days_checked, 1200);
        assert_eq!(sim.phase1_end(), Some(290));
        // ordinals 50, 100, ..., 300
        assert_eq!(sim.seeds, 6);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let mut a = Simulation::new(small()).unwrap();
        let mut b = Simulation::new(small()).unwrap();
        a.run();
        b.run();
        assert_eq!(a.events, b.events);
        assert_eq!(a.series, b.series);
    }
}
