mod common;

use gmw_core::metaheuristics::*;
use gmw_core::nn::ParamVector;
use gmw_core::rng::{RngStream, ScriptedDraws, Uniform01};
use proptest::prelude::*;

fn random_pop(rng: &mut RngStream, n: usize, dim: usize) -> Population {
    let mut pop = Population::uniform(n, dim, -1.0, 1.0, rng);
    for ind in &mut pop.individuals {
        ind.fitness = Some(common::sphere(&ind.position));
    }
    pop
}

#[test]
fn hierarchy_matches_full_sort() {
    let mut rng = RngStream::new(1);
    for _ in 0..50 {
        let mut pop = random_pop(&mut rng, 50, 3);
        // inject ties
        let f2 = pop.individuals[2].fitness;
        pop.individuals[40].fitness = f2;
        let mut keyed: Vec<(f64, usize)> = pop
            .individuals
            .iter()
            .enumerate()
            .map(|(i, ind)| (ind.fitness.unwrap(), i))
            .collect();
        keyed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = update_hierarchy(&pop).unwrap();
        assert_eq!(h.leaders(), [keyed[0].1, keyed[1].1, keyed[2].1]);
        let fit = |i: usize| pop.individuals[i].fitness.unwrap();
        assert!(fit(h.alpha) <= fit(h.beta) && fit(h.beta) <= fit(h.delta));
        assert!(h.omegas.iter().all(|&o| fit(h.delta) <= fit(o)));
    }
}

#[test]
fn zero_a_projects_onto_leader_mean() {
    let mut rng = RngStream::new(2);
    let mut pop = random_pop(&mut rng, 9, 40);
    let h = update_hierarchy(&pop).unwrap();
    let before = pop.clone();
    gwo_step(&mut pop, &h, 0.0, &mut rng).unwrap();
    let [a, b, d] = h.leaders().map(|l| before.individuals[l].position.clone());
    for &o in &h.omegas {
        for j in 0..40 {
            let expect = (a[j] + b[j] + d[j]) / 3.0;
            assert_eq!(pop.individuals[o].position[j].to_bits(), expect.to_bits());
        }
    }
    for l in h.leaders() {
        assert_eq!(pop.individuals[l], before.individuals[l]);
    }
}

#[test]
fn leaders_bit_identical_after_step() {
    let mut rng = RngStream::new(3);
    let mut pop = random_pop(&mut rng, 15, 100);
    let h = update_hierarchy(&pop).unwrap();
    let before = pop.clone();
    gwo_step(&mut pop, &h, 1.7, &mut rng).unwrap();
    for l in h.leaders() {
        assert_eq!(pop.individuals[l], before.individuals[l]);
    }
    assert!(h.omegas.iter().all(|&o| pop.individuals[o].fitness.is_none()));
}

#[test]
fn mutation_stays_in_bounds_and_concentrates_with_eta() {
    let mut rng = RngStream::new(4);
    let (lo, hi) = (-1.0, 1.0);
    let p = 0.3;
    let mut spread = Vec::new();
    for eta in [1.0, 20.0, 100.0] {
        let mut sum_abs = 0.0;
        for _ in 0..100_000 {
            let u = rng.next_unit();
            let v = mutate_gene(p, u, eta, lo, hi);
            assert!((lo..=hi).contains(&v));
            sum_abs += (v - p).abs();
        }
        spread.push(sum_abs / 1e5);
    }
    assert!(spread[0] > spread[1] && spread[1] > spread[2], "{spread:?}");
}

#[test]
fn crossover_rate_concentrates() {
    let mut rng = RngStream::new(5);
    let d = 100_000;
    let omega: Vec<f64> = (0..d).map(|i| i as f64).collect();
    let dominant: Vec<f64> = (0..d).map(|i| -(i as f64) - 1.0).collect();
    let mut child = omega.clone();
    crossover_with_dominant(&mut child, &dominant, 0.3, &mut rng).unwrap();
    let from_dom = child.iter().zip(&dominant).filter(|(c, d)| c == d).count();
    let from_omega = child.iter().zip(&omega).filter(|(c, o)| c == o).count();
    assert_eq!(from_dom + from_omega, d);
    let frac = from_dom as f64 / d as f64;
    assert!((frac - 0.3).abs() <= 0.01, "fraction {frac}");
}

fn triggered_state(p_mut: f64) -> GaEventState {
    let mut st = GaEventState::new(GaConfig { p_mut, ..GaConfig::default() }).unwrap();
    st.stall_counter = st.config.patience;
    st
}

#[test]
fn forced_mutation_uses_rank_rates() {
    let mut rng = RngStream::new(6);
    let mut pop = random_pop(&mut rng, 15, 20);
    let h = update_hierarchy(&pop).unwrap();
    let mut st = triggered_state(1.0);
    let report = ga_event(&mut pop, &h, &mut st, &mut rng).unwrap();
    assert_eq!(report.kind, GaEventKind::Mutation);
    assert_eq!(report.rates.len(), 12);
    let worst = *h.omegas.last().unwrap();
    let best = h.omegas[0];
    assert_eq!(report.rates.iter().find(|r| r.0 == worst).unwrap().1, 0.6);
    assert_eq!(report.rates.iter().find(|r| r.0 == best).unwrap().1, 0.1);
    for (k, &(idx, rate)) in report.rates.iter().enumerate() {
        assert_eq!(idx, h.omegas[k]);
        assert!((rate - (0.1 + 0.5 * k as f64 / 11.0)).abs() < 1e-15);
    }
    assert_eq!(st.stall_counter, 0);
}

#[test]
fn forced_crossover_keeps_leaders_and_provenance() {
    let mut rng = RngStream::new(7);
    let mut pop = random_pop(&mut rng, 15, 50);
    let h = update_hierarchy(&pop).unwrap();
    let before = pop.clone();
    let mut st = triggered_state(0.0);
    let report = ga_event(&mut pop, &h, &mut st, &mut rng).unwrap();
    assert_eq!(report.kind, GaEventKind::Crossover);
    for l in h.leaders() {
        assert_eq!(pop.individuals[l].position, before.individuals[l].position);
    }
    for &o in &h.omegas {
        for j in 0..50 {
            let v = pop.individuals[o].position[j];
            let sources = std::iter::once(before.individuals[o].position[j])
                .chain(h.leaders().into_iter().map(|l|before.individuals[l].position[j]));
            assert!(sources.into_iter().any(|s| s.to_bits() == v.to_bits()));
        }
    }
}

#[test]
fn event_kind_frequency_follows_p_mut() {
    let mut rng = RngStream::new(8);
    let base = random_pop(&mut rng, 6, 4);
    let h = update_hierarchy(&base).unwrap();
    let mut mutations = 0;
    for _ in 0..1000 {
        let mut pop = base.clone();
        let mut st = triggered_state(0.7);
        if ga_event(&mut pop, &h, &mut st, &mut rng).unwrap().kind == GaEventKind::Mutation {
            mutations += 1;
        }
    }
    let freq = mutations as f64 / 1000.0;
    assert!((freq - 0.7).abs() <= 0.03, "mutation frequency {freq}");
}

#[test]
fn slpso_improves_sphere() {
    let dim = 30;
    let cfg = SlpsoConfig {
        position_bounds: (-5.0, 5.0),
        velocity_bounds: (-1.0, 1.0),
        ..SlpsoConfig::default()
    };
    let mut at20 = Vec::new();
    let mut at200 = Vec::new();
    for seed in 0..10 {
        let mut rng = RngStream::new(seed);
        let mut st = SlpsoState::new(&cfg, 40, dim).unwrap();
        let mut pop = st.init_swarm(dim, &mut rng);
        let all: Vec<usize> = (0..40).collect();
        pop.evaluate(&all, |x| Ok(sphere(x))).unwrap();
        for step in 1..=200 {
            slpso_step(&mut pop, &mut st, &mut rng).unwrap();
            let stale = pop.stale();
            pop.evaluate(&stale, |x| Ok(sphere(x))).unwrap();
            let best = pop.individuals[pop.best().unwrap()].fitness.unwrap();
            if step == 20 {
                at20.push(best);
            }
            if step == 200 {
                at200.push(best);
            }
        }
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (v[4] + v[5]) / 2.0
    };
    let (m20, m200) = (median(&mut at20), median(&mut at200));
    assert!(m200 < m20, "median after 200 steps {m200} vs 20 steps {m20}");
}

#[test]
fn gwo_sphere_converges() {
    let mut hits = 0;
    for seed in 0..10 {
        let out = gwo_minimize(sphere, 30, (-100.0, 100.0), 30, 500, (2.0, 0.0), seed).unwrap();
        if out.best_fitness <= 1e-2 {
            hits += 1;
        }
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
    assert!(hits >= 9, "{hits}/10 seeds reached 1e-2");
}

#[test]
fn same_seed_same_trajectory() {
    let run = |seed| {
        let mut rng = RngStream::new(seed);
        let mut pop = random_pop(&mut rng, 10, 8);
        let mut st = triggered_state(0.5);
        for t in 0..5 {
            let h = update_hierarchy(&pop).unwrap();
            gwo_step(&mut pop, &h, 2.0 - 0.4 * t as f64, &mut rng).unwrap();
            let stale = pop.stale();
            pop.evaluate(&stale, |x| Ok(sphere(x))).unwrap();
            let h = update_hierarchy(&pop).unwrap();
            st.stall_counter = st.config.patience;
            ga_event(&mut pop, &h, &mut st, &mut rng).unwrap();
            let stale = pop.stale();
            pop.evaluate(&stale, |x| Ok(sphere(x))).unwrap();
        }
        pop
    };
    assert_eq!(run(11), run(11));
    assert_ne!(run(11), run(12));
}

#[test]
fn scripted_mutation_branches() {
    let cfg = GaConfig::default();
    // select (0.0 < rate) then u = 0.5: fixed point
    let mut genes = vec![0.25];
    polynomial_mutation(&mut genes, 1.0, &cfg, &mut ScriptedDraws::new(vec![0.0, 0.5]));
    assert_eq!(genes, vec![0.25]);
}

proptest! {
    #[test]
    fn mutation_closure(p in -3.0f64..3.0, u in 0.0f64..=1.0, eta in 0.0f64..200.0) {
        let cfg = GaConfig { eta_m: eta, ..GaConfig::default() };
        let mut genes = [p];
        polynomial_mutation(&mut genes, 1.0, &cfg, &mut ScriptedDraws::new(vec![0.0, u]));
        prop_assert!((cfg.x_lower..=cfg.x_upper).contains(&genes[0]));
    }

    #[test]
    fn crossover_provenance(seed in any::<u64>(), rate in 0.0f64..=1.0) {
        let mut rng = RngStream::new(seed);
        let omega: Vec<f64> = (0..64).map(|_| rng.uniform(0.0, 1.0)).collect();
        let dom: Vec<f64> = (0..64).map(|_| rng.uniform(2.0, 3.0)).collect();
        let mut child = omega.clone();
        crossover_with_dominant(&mut child, &dom, rate, &mut rng).unwrap();
        for j in 0..64 {
            prop_assert!(child[j] == omega[j] || child[j] == dom[j]);
        }
    }

    #[test]
    fn stall_counter_never_exceeds_patience_after_event(fits in prop::collection::vec(0.0f64..10.0, 1..60)) {
        let mut st = GaEventState::new(GaConfig::default()).unwrap();
        let mut pop = Population::new(vec![Individual { position: ParamVector::zeros(1), fitness: Some(0.0) }; 5]);
        let h = WolfHierarchy::from_ranking(&[0, 1, 2, 3, 4]).unwrap();
        let mut rng = RngStream::new(0);
        for f in fits {
            if st.observe(f) {
                prop_assert_eq!(st.stall_counter, st.config.patience);
                ga_event(&mut pop, &h, &mut st, &mut rng).unwrap();
            }
            prop_assert!(st.stall_counter < st.config.patience);
        }
    }
}
