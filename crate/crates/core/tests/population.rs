use seconet::model::{initialize_population, lifetime_partners, rng_from_seed, sample_age, AgeTable, Gender, SimConfig};

#[test]
fn gender_split_is_even() {
    let config = SimConfig::default();
    for seed in 0..10 {
        let persons = initialize_population(&config, &mut rng_from_seed(seed)).unwrap();
        let females = persons.iter().filter(|p| p.gender == Gender::Female).count();
        let frac = females as f64 / persons.len() as f64;
        assert!((frac - 0.5).abs() <= 0.03, "seed {seed}: {frac}");
    }
}

#[test]
fn age_brackets_follow_table() {
    let table = AgeTable::default();
    let mut rng = rng_from_seed(4);
    let n = 1_000_000;
    let (mut b30, mut b15) = (0usize, 0usize);
    for _ in 0..n {
        let age = sample_age(&table, &mut rng).unwrap();
        assert!((15..=49).contains(&age));
        if (30..=34).contains(&age) {
            b30 += 1;
        }
        if (15..=19).contains(&age) {
            b15 += 1;
        }
    }
    assert!((b30 as f64 / n as f64 - 0.158).abs() <= 0.002);
    assert!((b15 as f64 / n as f64 - 0.123).abs() <= 0.002);
}

#[test]
fn partner_history_and_capacity() {
    assert_eq!(lifetime_partners(9000, 500), 18);
    assert_eq!(lifetime_partners(9000, 7200), 1);
    let config = SimConfig::default();
    for p in initialize_population(&config, &mut rng_from_seed(2)).unwrap() {
        assert!(p.avg_rel_duration >= 1);
        assert!(p.lsp >= 1);
        assert!(p.sp < p.lsp);
        if p.age < 20 {
            assert_eq!(p.sp, 0);
        }
        assert!(!p.joined);
    }
}
