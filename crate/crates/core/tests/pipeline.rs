use multiplace::benchsuite::benchmark;
use multiplace::experiments::{random_sizes, sample_uniqueness};
use multiplace::explorer::generate;
use multiplace::{ExplorerConfig, MultiPlacementStructure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick_config(seed: u64) -> ExplorerConfig {
    let mut cfg = ExplorerConfig {
        max_outer_iterations: 60,
        rng_seed: seed,
        ..Default::default()
    };
    cfg.inner.iterations = 200;
    cfg
}

#[test]
fn generated_structure_survives_reload() {
    let c = benchmark("two_stage_opamp").unwrap();
    let g = generate(&c.netlist, &quick_config(3)).unwrap();
    let s = g.structure;
    assert!(!s.is_empty());
    assert!(s.check_invariants().is_empty(), "{:?}", s.check_invariants());

    let back = MultiPlacementStructure::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let v = random_sizes(s.netlist(), &mut rng);
        let a = s.instantiate(&v).unwrap();
        let b = back.instantiate(&v).unwrap();
        assert_eq!((a.placement.id, a.is_fallback), (b.placement.id, b.is_fallback));
    }
}

#[test]
fn history_matches_stored_placements() {
    let c = benchmark("circ01").unwrap();
    let g = generate(&c.netlist, &quick_config(5)).unwrap();
    assert_eq!(g.history.len() + g.failed_perturbations, g.iterations);
    for rec in &g.history {
        assert!(rec.report.best_cost <= rec.report.average_cost);
        for id in &rec.store.stored {
            assert!(
                g.structure.placement(*id).is_some()
                    || g.history.iter().any(|r| r.store.removed.contains(id))
            );
        }
    }
    let last = g.history.last().unwrap();
    assert_eq!(last.coverage, g.structure.coverage());
    let fb = g.structure.fallback().unwrap();
    assert!(g.structure.placement(fb.id).is_none());
}

#[test]
fn single_precision_generation_is_sound() {
    let c = benchmark("circ01").unwrap();
    let mut cfg = multiplace::f32::ExplorerConfig {
        max_outer_iterations: 40,
        ..Default::default()
    };
    cfg.inner.iterations = 200;
    let g = generate(&c.netlist, &cfg).unwrap();
    assert!(g.structure.check_invariants().is_empty());
    assert_eq!(sample_uniqueness(&g.structure, 2000, 1).multi_hits, 0);
    let back = multiplace::f32::MultiPlacementStructure::from_json(&g.structure.to_json()).unwrap();
    assert_eq!(back, g.structure);
}

#[test]
fn larger_fixture_stays_unique() {
    let c = benchmark("benchmark24").unwrap();
    let g = generate(&c.netlist, &quick_config(1)).unwrap();
    assert!(g.structure.check_invariants().is_empty());
    assert_eq!(sample_uniqueness(&g.structure, 2000, 4).multi_hits, 0);
}
