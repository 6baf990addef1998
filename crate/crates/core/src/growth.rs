//! The three growth mechanisms and the daily growth schedule.
//!
//! Mechanism I introduces one not-yet-joined person per day and links it to up
//! to `m` joined partners by fitness-weighted preferential attachment.
//! Mechanism II expires relationships whose age reached their drawn duration.
//! Mechanism III lets female initiators form secondary relationships at a rate
//! sized to replace the links that expire.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::model::{EdgeKind, Gender, Mechanism, NetworkState, Person, PersonId, Phase, Relationship, SimConfig};

/// Attractiveness of `candidate` as a partner for `reference`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FitnessScore(pub f64);

impl FitnessScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn fitness(reference: &Person, candidate: &Person, mean_eta: f64) -> FitnessScore {
    let gender_gap = f64::from((reference.gender.sign() - candidate.gender.sign()).abs());
    if gender_gap == 0.0 {
        return FitnessScore(0.0);
    }
    let age_gap = f64::from(reference.age.abs_diff(candidate.age));
    let lsp_gap = f64::from(reference.lsp.abs_diff(candidate.lsp));
    FitnessScore(mean_eta.max(age_gap) * gender_gap / lsp_gap.max(1.0))
}

/// Draws an index from non-negative weights with the given total.
fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> Option<usize> {
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_positive = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    // rounding left target just above the accumulated sum
    last_positive
}

/// A normalized discrete distribution over person ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedChoice {
    entries: Vec<(PersonId, f64)>,
}

impl WeightedChoice {
    fn from_weights(ids: Vec<PersonId>, weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return WeightedChoice::default();
        }
        let entries = ids
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0)
            .map(|(id, w)| (id, w / total))
            .collect();
        WeightedChoice { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(PersonId, f64)] {
        &self.entries
    }

    pub fn probability(&self, id: PersonId) -> f64 {
        self.entries.iter().find(|e| e.0 == id).map_or(0.0, |e| e.1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<PersonId> {
        let weights: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        pick_weighted(&weights, weights.iter().sum(), rng).map(|i| self.entries[i].0)
    }
}

/// Probability that `reference` picks each candidate, proportional to `(k + epsilon) * fitness`.
pub type AttachmentDistribution = WeightedChoice;

/// Probability that each female initiates the next secondary link.
pub type InitiationDistribution = WeightedChoice;

fn attachment_weight(reference: &Person, candidate: &Person, degree: usize, epsilon: f64, mean_eta: f64) -> f64 {
    let phi = fitness(reference, candidate, mean_eta).value();
    if phi > 0.0 {
        (degree as f64 + epsilon) * phi
    } else {
        0.0
    }
}

pub fn attachment_distribution<'a>(
    reference: &Person,
    candidates: impl IntoIterator<Item = &'a Person>,
    degrees: &[usize],
    epsilon: f64,
    mean_eta: f64,
) -> AttachmentDistribution {
    let (ids, weights): (Vec<_>, Vec<_>) = candidates
        .into_iter()
        .filter(|c| c.id != reference.id)
        .map(|c| (c.id, attachment_weight(reference, c, degrees[c.id], epsilon, mean_eta)))
        .unzip();
    WeightedChoice::from_weights(ids, weights)
}

fn initiation_weight(p: &Person) -> f64 {
    f64::from(p.lsp.saturating_sub(p.sp))
}

/// Weights each female by her remaining partner capacity `max(0, lsp - sp)`.
pub fn initiation_distribution<'a>(females: impl IntoIterator<Item = &'a Person>) -> InitiationDistribution {
    let (ids, weights): (Vec<_>, Vec<_>) = females
        .into_iter()
        .filter(|p| p.gender == Gender::Female)
        .map(|p| (p.id, initiation_weight(p)))
        .unzip();
    WeightedChoice::from_weights(ids, weights)
}

/// Expected relationship duration: exponential with mean `min(delta_a, delta_b)`,
/// rounded up to whole days.
pub fn sample_duration<R: Rng + ?Sized>(a: &Person, b: &Person, rng: &mut R) -> u64 {
    let mean = f64::from(a.avg_rel_duration.min(b.avg_rel_duration).max(1));
    let exp = Exp::new(1.0 / mean).expect("positive rate");
    let draw: f64 = exp.sample(rng);
    (draw.ceil() as u64).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeEventKind {
    Formed,
    Expired,
}

impl EdgeEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeEventKind::Formed => "formed",
            EdgeEventKind::Expired => "expired",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeEvent {
    pub t: u64,
    pub kind: EdgeEventKind,
    pub edge: Relationship,
}

/// Outcome of one Mechanism I call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Joined {
    pub id: PersonId,
    /// 1-based position of this person in the joining order.
    pub ordinal: usize,
    pub partners: Vec<PersonId>,
}

/// Joins `m0` random female/male couples at the current time.
pub fn seed_couples<R: Rng + ?Sized>(
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut R,
    log: &mut Vec<EdgeEvent>,
) -> crate::Result<()> {
    let mut females: Vec<PersonId> = Vec::new();
    let mut males: Vec<PersonId> = Vec::new();
    for p in state.persons.iter().filter(|p| !p.joined) {
        match p.gender {
            Gender::Female => females.push(p.id),
            Gender::Male => males.push(p.id),
        }
    }
    if females.len() < config.m0 || males.len() < config.m0 {
        return Err(crate::Error::Config(format!(
            "population has {} females and {} males, cannot seed {} couples",
            females.len(),
            males.len(),
            config.m0
        )));
    }
    let females = rand::seq::index::sample(rng, females.len(), config.m0)
        .into_iter()
        .map(|i| females[i])
        .collect::<Vec<_>>();
    let males = rand::seq::index::sample(rng, males.len(), config.m0)
        .into_iter()
        .map(|i| males[i])
        .collect::<Vec<_>>();
    for (&f, &m) in females.iter().zip(&males) {
        state.mark_joined(f);
        state.mark_joined(m);
        let duration = sample_duration(&state.persons[f], &state.persons[m], rng);
        if let Some(edge) = state.add_edge(f, m, duration, EdgeKind::Primary) {
            log.push(EdgeEvent { t: state.t, kind: EdgeEventKind::Formed, edge });
        }
    }
    state.refresh_phase();
    Ok(())
}

/// Mechanism I: one uniformly chosen outsider joins and links to up to `m` joined partners.
pub fn mechanism1_introduce_node<R: Rng + ?Sized>(
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut R,
    log: &mut Vec<EdgeEvent>,
) -> Option<Joined> {
    if state.unjoined().is_empty() {
        return None;
    }
    let pick = rng.random_range(0..state.unjoined().len());
    let id = state.unjoined()[pick];
    let reference = state.persons[id].clone();

    let mut ids = Vec::new();
    let mut weights = Vec::new();
    for c in state.persons.iter().filter(|c| c.joined && c.id != id) {
        ids.push(c.id);
        weights.push(attachment_weight(&reference, c, state.degree(c.id), config.epsilon, config.mean_eta));
    }

    state.mark_joined(id);
    let ordinal = state.joined_count();

    let mut partners = Vec::with_capacity(config.m);
    for _ in 0..config.m {
        let total: f64 = weights.iter().sum();
        let Some(i) = pick_weighted(&weights, total, rng) else { break };
        weights[i] = 0.0;
        let partner = ids[i];
        let duration = sample_duration(&state.persons[id], &state.persons[partner], rng);
        if let Some(edge) = state.add_edge(id, partner, duration, EdgeKind::Primary) {
            log.push(EdgeEvent { t: state.t, kind: EdgeEventKind::Formed, edge });
            partners.push(partner);
        }
    }
    Some(Joined { id, ordinal, partners })
}

/// Mechanism II: drops every relationship whose age reached its duration.
pub fn mechanism2_expire_links(state: &mut NetworkState, log: &mut Vec<EdgeEvent>) -> usize {
    let t = state.t;
    let removed = state.remove_expired();
    let n = removed.len();
    log.extend(removed.into_iter().map(|edge| EdgeEvent { t, kind: EdgeEventKind::Expired, edge }));
    n
}

/// Per-day edge removal rate `1 / <Delta>`, with `<Delta>` the mean assigned
/// duration of the relationships formed so far. Falls back to `1 / mean_delta`
/// before any relationship exists.
pub fn theta(state: &NetworkState, config: &SimConfig) -> f64 {
    if state.formed_count() == 0 {
        return 1.0 / config.mean_delta;
    }
    state.formed_count() as f64 / state.formed_duration_sum() as f64
}

/// `1 / mean(Delta)` over the relationships active right now.
///
/// Active relationships over-represent long durations, so this is larger than
/// the assigned mean once the network has churned; kept as a diagnostic.
pub fn theta_active(state: &NetworkState, config: &SimConfig) -> f64 {
    if state.edge_count() == 0 {
        return 1.0 / config.mean_delta;
    }
    let sum: u64 = state.edges().iter().map(|e| e.duration).sum();
    state.edge_count() as f64 / sum as f64
}

/// Network-total number of secondary links due this day.
pub fn secondary_link_quota(state: &NetworkState, config: &SimConfig) -> f64 {
    let theta = theta(state, config);
    match state.phase {
        Phase::Phase1 => (config.m as f64 * state.t as f64 + config.m0 as f64) * theta,
        Phase::Phase2 => state.edge_count() as f64 * theta,
    }
}

/// Carries the fractional part of the secondary-link quota between days.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SecondaryLinkBudget {
    carry: f64,
}

impl SecondaryLinkBudget {
    pub fn carry(&self) -> f64 {
        self.carry
    }

    /// Adds `quota` and takes out the whole links now available.
    pub fn accrue(&mut self, quota: f64) -> usize {
        if quota.is_finite() && quota > 0.0 {
            self.carry += quota;
        }
        // tolerate sums like 100 * 0.01 landing a hair below 1
        let whole = (self.carry + 1e-9).floor();
        self.carry = (self.carry - whole).max(0.0);
        whole as usize
    }
}

/// Mechanism III: forms this day's secondary links, returns how many were created.
///
/// Initiators are drawn from [`initiation_distribution`]. Once every joined
/// female has used up her capacity that law is 0/0, and initiators are drawn
/// uniformly among joined females instead. A quota unit is forfeited when the
/// initiator has no eligible male partner left.
pub fn mechanism3_form_secondary_links<R: Rng + ?Sized>(
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut R,
    budget: &mut SecondaryLinkBudget,
    log: &mut Vec<EdgeEvent>,
) -> usize {
    let due = budget.accrue(secondary_link_quota(state, config));
    if due == 0 {
        return 0;
    }
    let mut female_ids = Vec::new();
    let mut capacity = Vec::new();
    let mut male_ids = Vec::new();
    for p in state.persons.iter().filter(|p| p.joined) {
        match p.gender {
            Gender::Female => {
                female_ids.push(p.id);
                capacity.push(initiation_weight(p));
            }
            Gender::Male => male_ids.push(p.id),
        }
    }
    let uniform = vec![1.0; female_ids.len()];
    let mut male_weights = Vec::with_capacity(male_ids.len());
    let mut formed = 0;
    for _ in 0..due {
        let total: f64 = capacity.iter().sum();
        let pick = if total > 0.0 {
            pick_weighted(&capacity, total, rng)
        } else {
            pick_weighted(&uniform, uniform.len() as f64, rng)
        };
        let Some(fi) = pick else { continue };
        let initiator = female_ids[fi];

        male_weights.clear();
        let reference = &state.persons[initiator];
        let linked = state.neighbors(initiator);
        for &id in &male_ids {
            let w = if linked.contains(&id) {
                0.0
            } else {
                attachment_weight(reference, &state.persons[id], state.degree(id), config.epsilon, config.mean_eta)
            };
            male_weights.push(w);
        }
        let total: f64 = male_weights.iter().sum();
        let Some(mi) = pick_weighted(&male_weights, total, rng) else { continue };
        let partner = male_ids[mi];
        let duration = sample_duration(&state.persons[initiator], &state.persons[partner], rng);
        if let Some(edge) = state.add_edge(initiator, partner, duration, EdgeKind::Secondary) {
            log.push(EdgeEvent { t: state.t, kind: EdgeEventKind::Formed, edge });
            capacity[fi] = initiation_weight(&state.persons[initiator]);
            formed += 1;
        }
    }
    formed
}

/// What happened during one day of growth.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GrowthReport {
    pub joined: Option<Joined>,
    pub expired: usize,
    pub secondary: usize,
}

/// Runs the configured mechanisms for the current day without advancing the clock.
pub fn run_mechanisms<R: Rng + ?Sized>(
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut R,
    budget: &mut SecondaryLinkBudget,
    log: &mut Vec<EdgeEvent>,
) -> GrowthReport {
    let mut report = GrowthReport::default();
    let phase = state.phase;
    for mechanism in config.order {
        match mechanism {
            Mechanism::Introduce if phase == Phase::Phase1 => {
                report.joined = mechanism1_introduce_node(state, config, rng, log);
            }
            Mechanism::Introduce => {}
            Mechanism::Expire => report.expired = mechanism2_expire_links(state, log),
            Mechanism::Secondary => {
                report.secondary = mechanism3_form_secondary_links(state, config, rng, budget, log)
            }
        }
    }
    report
}

/// Closes the day: advances the clock and recomputes the phase.
pub fn finish_day(state: &mut NetworkState) {
    state.t += 1;
    state.refresh_phase();
}

/// One full growth timestep. No-op once `t` reaches the horizon.
pub fn step<R: Rng + ?Sized>(
    state: &mut NetworkState,
    config: &SimConfig,
    rng: &mut R,
    budget: &mut SecondaryLinkBudget,
    log: &mut Vec<EdgeEvent>,
) -> Option<GrowthReport> {
    if state.t >= config.timesteps {
        return None;
    }
    let report = run_mechanisms(state, config, rng, budget, log);
    finish_day(state);
    Some(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rng_from_seed, Health};

    fn person(id: PersonId, gender: Gender, age: u32, lsp: u32, sp: u32, delta: u32) -> Person {
        Person {
            id,
            age,
            gender,
            avg_rel_duration: delta,
            lsp,
            sp,
            health: Health::Susceptible,
            recovery_period: None,
            infected_at: None,
            joined: true,
        }
    }

    #[test]
    fn fitness_values() {
        let f = person(0, Gender::Female, 30, 18, 0, 500);
        let m = person(1, Gender::Male, 32, 18, 0, 500);
        assert!((fitness(&f, &m, 3.5).value() - 7.0).abs() < 1e-12);

        let m2 = person(2, Gender::Male, 40, 23, 0, 500);
        assert!((fitness(&f, &m2, 3.5).value() - 4.0).abs() < 1e-12);

        let f2 = person(3, Gender::Female, 49, 3, 0, 500);
        assert_eq!(fitness(&f, &f2, 3.5).value(), 0.0);
    }

    #[test]
    fn attachment_probabilities() {
        let reference = person(0, Gender::Female, 30, 18, 0, 500);
        let a = person(1, Gender::Male, 30, 18, 0, 500);
        let b = person(2, Gender::Male, 30, 18, 0, 500);
        let degrees = [0, 1, 3];
        let d = attachment_distribution(&reference, [&a, &b], &degrees, 0.5, 3.5);
        assert!((d.probability(1) - 0.3).abs() < 1e-12);
        assert!((d.probability(2) - 0.7).abs() < 1e-12);

        let single = attachment_distribution(&reference, [&a], &degrees, 0.5, 3.5);
        assert_eq!(single.entries(), &[(1, 1.0)]);

        let f = person(3, Gender::Female, 20, 18, 0, 500);
        let empty = attachment_distribution(&reference, [&f], &[0, 0, 0, 0], 0.5, 3.5);
        assert!(empty.is_empty());
        assert_eq!(empty.sample(&mut rng_from_seed(0)), None);
    }

    #[test]
    fn initiation_probabilities() {
        let a = person(0, Gender::Female, 30, 10, 6, 500);
        let b = person(1, Gender::Female, 30, 10, 9, 500);
        let full = person(2, Gender::Female, 30, 10, 12, 500);
        let d = initiation_distribution([&a, &b, &full]);
        assert!((d.probability(0) - 0.8).abs() < 1e-12);
        assert!((d.probability(1) - 0.2).abs() < 1e-12);
        assert_eq!(d.probability(2), 0.0);
    }

    #[test]
    fn duration_floor_and_mean() {
        let mut rng = rng_from_seed(9);
        let one = person(0, Gender::Female, 30, 10, 0, 1);
        for _ in 0..1000 {
            assert!(sample_duration(&one, &one, &mut rng) >= 1);
        }
        let a = person(0, Gender::Female, 30, 10, 0, 500);
        let b = person(1, Gender::Male, 30, 10, 0, 300);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_duration(&a, &b, &mut rng) as f64).sum::<f64>() / n as f64;
        // ceil adds about half a day to the exponential mean
        let se = 300.0 / (n as f64).sqrt();
        assert!((mean - 300.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn budget_accumulates_fractional_quota() {
        let mut budget = SecondaryLinkBudget::default();
        let mut first = None;
        for day in 1..=200 {
            if budget.accrue(0.01) > 0 {
                first = Some(day);
                break;
            }
            assert!(budget.carry() < 1.0);
        }
        assert_eq!(first, Some(100));
        assert!(budget.carry() < 1e-6);

        let mut budget = SecondaryLinkBudget::default();
        assert_eq!(budget.accrue(10.0), 10);
        assert_eq!(budget.accrue(0.0), 0);
        assert_eq!(budget.accrue(2.5), 2);
        assert!((budget.carry() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pick_weighted_skips_zero_weights() {
        let mut rng = rng_from_seed(4);
        for _ in 0..1000 {
            let i = pick_weighted(&[0.0, 2.0, 0.0, 1.0, 0.0], 3.0, &mut rng).unwrap();
            assert!(i == 1 || i == 3);
        }
        assert_eq!(pick_weighted(&[0.0, 0.0], 0.0, &mut rng), None);
    }
}
