use proptest::prelude::*;

use seconet::epidemic::{sample_recovery_period, sir_counts};
use seconet::model::{rng_from_seed, Health, SimConfig};
use seconet::Simulation;

fn config(seed: u64) -> SimConfig {
    SimConfig { population: 300, timesteps: 900, mean_delta: 120.0, mean_alpha: 60.0, seed_interval: 20, rng_seed: seed, ..SimConfig::default() }
}

#[test]
fn one_seed_per_interval_of_joiners() {
    let cfg = SimConfig { population: 1000, timesteps: 1000, rng_seed: 3, ..SimConfig::default() };
    let mut sim = Simulation::new(cfg).unwrap();
    sim.run();
    assert!(sim.phase1_end().is_some());
    assert_eq!(sim.seeds, 10);
}

#[test]
fn zero_beta_only_seeds_are_ever_infected() {
    let cfg = SimConfig { beta: 0.0, ..config(11) };
    let mut sim = Simulation::new(cfg).unwrap();
    sim.run();
    let c = sir_counts(&sim.state);
    assert_eq!(c.infectious + c.recovered, sim.seeds);
    assert!(sim.seeds > 0);
}

#[test]
fn recovery_period_mean() {
    let mut rng = rng_from_seed(77);
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| f64::from(sample_recovery_period(390.0, &mut rng))).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    // ceil of an exponential with mean 390 has mean 1 / (1 - exp(-1/390))
    let expected = 1.0 / (1.0 - (-1.0f64 / 390.0).exp());
    let se = 390.0 / (n as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
    assert!(draws.iter().all(|&d| d >= 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn sir_trajectory_invariants(seed in 0u64..10_000, beta in 0.05f64..1.0) {
        let mut sim = Simulation::new(SimConfig { beta, ..config(seed) }).unwrap();
        let n = sim.state.population();
        let mut prev = sir_counts(&sim.state);
        let mut seeds = sim.seeds;
        loop {
            let before: Vec<Health> = sim.state.persons.iter().map(|p| p.health).collect();
            if !sim.step_day() {
                break;
            }
            let t = sim.state.t - 1;
            let seeded_today = sim.seeds > seeds;
            seeds = sim.seeds;
            let c = sir_counts(&sim.state);
            prop_assert_eq!(c.total(), n);
            prop_assert!(c.susceptible <= prev.susceptible);
            prop_assert!(c.recovered >= prev.recovered);
            let mut new_cases = 0;
            for p in &sim.state.persons {
                if before[p.id] != Health::Susceptible || p.health == Health::Susceptible {
                    continue;
                }
                new_cases += 1;
                prop_assert_eq!(p.infected_at, Some(t));
                // a source partner was infectious at the start of the day, or is today's seed
                let has_source = sim.state.neighbors(p.id).iter().any(|&q| {
                    let other = &sim.state.persons[q];
                    before[q] == Health::Infectious || (seeded_today && other.infected_at == Some(t) && before[q] == Health::Susceptible)
                });
                prop_assert!(has_source || seeded_today, "person {} infected at {} without a source", p.id, t);
            }
            prop_assert!(new_cases <= prev.susceptible);
            prev = c;
        }
        prop_assert!(sim.audit.clean());
    }
}
