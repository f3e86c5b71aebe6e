mod common;

use common::*;
use opacity::automata::{Alphabet, Nfa};
use opacity::moore::{induced_mask, label_transform, LabeledSystem};
use opacity::specs::{build_spec, Mode, OpacityNotion, SecretType};
use opacity::verifier::*;
use opacity::{Error, EventId};

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

fn verify(sys: &LabeledSystem, n: OpacityNotion, m: Option<Method>) -> Verdict {
    verify_state_based(sys, &n, m, &opts()).unwrap()
}

#[test]
fn five_state_cso_every_method() {
    let sys = model("five_state");
    for m in [Method::Forward, Method::Reverse, Method::SecretObserver] {
        let v = verify(&sys, OpacityNotion::cso(), Some(m));
        assert!(v.opaque, "{m}");
        assert!(v.witness.is_none());
    }
}

#[test]
fn five_state_cso_observer_shape() {
    let sys = model("five_state");
    let t = label_transform(&sys);
    let mask = induced_mask(&t.io);
    let spec = build_spec(&t.io, &OpacityNotion::cso());
    let so = SecretObserver::build(&t.nfa, &spec.nfa, &mask, &Default::default()).unwrap();
    assert_eq!(so.dfa.live_states(), 4);
    let live: Vec<_> = (0..so.dfa.num_states() as u32).filter(|&q| Some(q) != so.dfa.dead()).collect();
    for q in live {
        assert_eq!(so.dfa.is_marked(q), q != so.dfa.initial(), "state {q}");
    }
}

#[test]
fn five_state_joint1_k2_witness() {
    let sys = model("five_state");
    for m in [Method::SecretObserver, Method::Forward, Method::Reverse] {
        let v = verify(&sys, OpacityNotion::kstep(2, Mode::Joint, SecretType::One), Some(m));
        assert!(!v.opaque);
        assert_eq!(v.witness.unwrap(), ["σ_init", "σ_o", "σ_o"], "{m}");
    }
}

#[test]
fn five_state_separate2_k2_every_method() {
    let sys = model("five_state");
    assert!(check_observation_extendable(&sys));
    for m in [Method::SecretObserver, Method::Forward, Method::Reverse] {
        let v = verify(&sys, OpacityNotion::kstep(2, Mode::Separate, SecretType::Two), Some(m));
        assert!(v.opaque, "{m}");
        assert!(!v.extended);
    }
    let v = verify_separate_kstep_so(&sys, 2, SecretType::Two, &opts()).unwrap();
    assert_eq!(v.stats.verifier_states, 4);
    let ext = make_observation_extendable(&sys);
    assert!(verify_separate_kstep_so(&ext, 2, SecretType::Two, &opts()).unwrap().opaque);
}

#[test]
fn notion_matrix() {
    // (notion, expected for A1, A2, A3)
    let rows = [
        (Mode::Separate, SecretType::Two, [true, true, true]),
        (Mode::Separate, SecretType::One, [false, true, false]),
        (Mode::Joint, SecretType::Two, [true, false, false]),
        (Mode::Joint, SecretType::One, [false, false, false]),
    ];
    let systems = [model("epochs_a1"), model("epochs_a2"), model("epochs_a3")];
    for (mode, ty, expected) in rows {
        for (sys, want) in systems.iter().zip(expected) {
            for m in [None, Some(Method::Forward), Some(Method::Reverse)] {
                let v = verify(sys, OpacityNotion::kstep(1, mode, ty), m);
                assert_eq!(v.opaque, want, "{} {mode:?} {ty:?} {m:?}", sys.name);
            }
        }
    }
}

#[test]
fn separate_reports_smallest_level() {
    // A3 fails separate type 1 immediately: the initial state is secret.
    let v = verify_separate_kstep_so(&model("epochs_a3"), 1, SecretType::One, &opts()).unwrap();
    assert_eq!(v.violated_level, Some(0));
    assert_eq!(v.witness.unwrap(), ["σ_init"]);
}

#[test]
fn empty_marked_language_is_opaque() {
    let sys = model("five_state");
    let t = label_transform(&sys);
    let mut g = t.nfa.clone();
    for q in 0..g.num_states() as u32 {
        g.set_marked(q, false);
    }
    let mask = induced_mask(&t.io);
    let spec = build_spec(&t.io, &OpacityNotion::kstep(2, Mode::Joint, SecretType::One));
    for m in [Method::Forward, Method::Reverse, Method::SecretObserver] {
        assert!(verify_containment(&g, &spec, &mask, m, &opts()).unwrap().opaque);
    }
}

#[test]
fn secret_observer_rejects_non_universal_spec() {
    let sys = model("five_state");
    let n = OpacityNotion::infinite(Mode::Joint, SecretType::One);
    let err = verify_state_based(&sys, &n, Some(Method::SecretObserver), &opts()).unwrap_err();
    assert!(matches!(err, Error::MethodInapplicable(_)));
    let f = verify(&sys, n, None);
    assert_eq!(f.stats.method, Method::Forward);
    assert_eq!(f.opaque, verify(&sys, n, Some(Method::Reverse)).opaque);
}

#[test]
fn budget_is_reported() {
    let sys = opacity::generators::gen_cyclic(6);
    let o = VerifyOptions { max_states: 100, timeout: None };
    let n = OpacityNotion::kstep(8, Mode::Joint, SecretType::One);
    let err = verify_state_based(&sys, &n, Some(Method::Forward), &o).unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded { limit: 100, .. }));
}

#[test]
fn timeout_is_reported() {
    let sys = opacity::generators::gen_cyclic(6);
    let o = VerifyOptions { max_states: usize::MAX, timeout: Some(std::time::Duration::ZERO) };
    let n = OpacityNotion::kstep(16, Mode::Joint, SecretType::Two);
    let err = verify_state_based(&sys, &n, Some(Method::Forward), &o).unwrap_err();
    assert!(matches!(err, Error::Timeout));
}

#[test]
fn infinite_separate_honors_timeout() {
    // Nine states give K = 512.
    let sys = opacity::generators::gen_grid(3, 0);
    let o = VerifyOptions { max_states: usize::MAX, timeout: Some(std::time::Duration::from_millis(200)) };
    let n = OpacityNotion::infinite(Mode::Separate, SecretType::One);
    let start = std::time::Instant::now();
    for m in [None, Some(Method::Reverse)] {
        match verify_state_based(&sys, &n, m, &o) {
            Ok(_) | Err(Error::Timeout) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(start.elapsed() < std::time::Duration::from_secs(10));
}

#[test]
fn method_names_round_trip() {
    for m in [Method::Forward, Method::Reverse, Method::SecretObserver] {
        assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
    }
    assert!("auto".parse::<Method>().is_err());
}

/// Every method agrees with the bounded oracle on the shared corpus; a
/// witness is always a genuine violation.
#[test]
fn methods_match_oracle() {
    let mut notions = vec![OpacityNotion::cso(), OpacityNotion::iso()];
    for k in 0..=2 {
        notions.extend(ALL_KSTEP.iter().map(|&(m, t)| OpacityNotion::kstep(k, m, t)));
    }
    let mut disagreements = Vec::new();
    for sys in corpus() {
        for n in &notions {
            let oracle = oracle_verdict(&sys, n, 7);
            for m in [Method::Forward, Method::Reverse, Method::SecretObserver] {
                let v = verify(&sys, *n, Some(m));
                // Witnesses of extended systems use the extended alphabet.
                let ok = match (&v.witness, v.extended) {
                    (Some(w), true) => !oracle.opaque && witness_violates(&make_observation_extendable(&sys), n, w),
                    (Some(w), false) => {
                        // Separate witnesses are shortest for one level, not overall:
                        // forward/reverse check level K, the observer the smallest level.
                        let shortest = n.mode == Mode::Joint || n.kind != opacity::specs::NotionKind::KStep;
                        let level_ok = m != Method::SecretObserver || n.mode == Mode::Joint || v.violated_level == oracle.level;
                        witness_violates(&sys, n, w)
                            && (w.len() - 1 > 7
                                || (level_ok
                                    && (!shortest || oracle.witness.as_ref().is_some_and(|o| o.len() == w.len() - 1))))
                    }
                    (None, _) => oracle.opaque,
                };
                if !ok || v.opaque != v.witness.is_none() {
                    disagreements.push(format!("{} {n} k={} {m}: {:?} vs {:?}", sys.name, n.k, v.witness, oracle));
                }
            }
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:#?}");
}

#[test]
fn separate_level_matches_oracle() {
    for sys in corpus().iter().take(60) {
        for ty in [SecretType::One, SecretType::Two] {
            let n = OpacityNotion::kstep(2, Mode::Separate, ty);
            let v = verify_separate_kstep_so(sys, 2, ty, &opts()).unwrap();
            let o = oracle_verdict(sys, &n, 7);
            if v.witness.as_ref().is_some_and(|w| w.len() - 1 <= 7) {
                assert_eq!(v.violated_level, o.level, "{}", sys.name);
            }
        }
    }
}

#[test]
fn implication_lattice_and_monotonicity() {
    let kstep = |sys: &LabeledSystem, k, m, t| verify(sys, OpacityNotion::kstep(k, m, t), None).opaque;
    for sys in corpus() {
        let mut prev: Option<[bool; 4]> = None;
        for k in 0..=3 {
            let j1 = kstep(&sys, k, Mode::Joint, SecretType::One);
            let j2 = kstep(&sys, k, Mode::Joint, SecretType::Two);
            let s1 = kstep(&sys, k, Mode::Separate, SecretType::One);
            let s2 = kstep(&sys, k, Mode::Separate, SecretType::Two);
            assert!(!j1 || s1, "{} K={k}: joint1 ⟹ sep1", sys.name);
            assert!(!s1 || s2, "{} K={k}: sep1 ⟹ sep2", sys.name);
            assert!(!j1 || j2, "{} K={k}: joint1 ⟹ joint2", sys.name);
            assert!(!j2 || s2, "{} K={k}: joint2 ⟹ sep2", sys.name);
            let cur = [j1, j2, s1, s2];
            if let Some(p) = prev {
                for i in 0..4 {
                    assert!(!cur[i] || p[i], "{} K={k}: variant {i} not monotone", sys.name);
                }
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn k0_joint_and_separate_coincide() {
    for sys in corpus().iter().take(80) {
        for ty in [SecretType::One, SecretType::Two] {
            let j = verify(sys, OpacityNotion::kstep(0, Mode::Joint, ty), None).opaque;
            let s = verify_separate_kstep_so(sys, 0, ty, &opts()).unwrap().opaque;
            assert_eq!(j, s, "{}", sys.name);
            if check_observation_extendable(sys) {
                let e = verify_separate_kstep_ext(sys, 0, ty, Method::Reverse, &opts()).unwrap().opaque;
                assert_eq!(j, e, "{}", sys.name);
            }
        }
    }
}

#[test]
fn extendable_systems_agree_across_routes() {
    let mut checked = 0;
    for seed in 0..400u64 {
        let sys = random_system(0xe87 + seed, 5, 3);
        if !check_observation_extendable(&sys) {
            continue;
        }
        checked += 1;
        for k in 0..=2 {
            for ty in [SecretType::One, SecretType::Two] {
                let so = verify_separate_kstep_so(&sys, k, ty, &opts()).unwrap().opaque;
                for m in [Method::Forward, Method::Reverse, Method::SecretObserver] {
                    let e = verify_separate_kstep_ext(&sys, k, ty, m, &opts()).unwrap().opaque;
                    assert_eq!(so, e, "{} K={k} {ty:?} {m}", sys.name);
                }
            }
        }
        if checked == 100 {
            break;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn extension_preserves_separate_verdicts() {
    for sys in corpus().iter().take(100) {
        let ext = make_observation_extendable(sys);
        assert!(check_observation_extendable(&ext));
        for k in 0..=2 {
            for ty in [SecretType::One, SecretType::Two] {
                let a = verify_separate_kstep_so(sys, k, ty, &opts()).unwrap().opaque;
                let b = verify_separate_kstep_so(&ext, k, ty, &opts()).unwrap().opaque;
                assert_eq!(a, b, "{} K={k} {ty:?}", sys.name);
            }
        }
    }
}

#[test]
fn non_extendable_input_is_rejected_or_extended() {
    let alpha = Alphabet::from_names(["a"]).into_shared();
    let mut g = Nfa::new(alpha, 1);
    g.add_initial(0);
    let sys = LabeledSystem::with_secrets(g, &[], &[EventId(0)]);
    assert!(!check_observation_extendable(&sys));
    let err = verify_separate_kstep_ext(&sys, 1, SecretType::Two, Method::Reverse, &opts()).unwrap_err();
    assert!(matches!(err, Error::NotExtendable));
    let v = verify(&sys, OpacityNotion::kstep(1, Mode::Separate, SecretType::Two), Some(Method::Reverse));
    assert!(v.opaque && v.extended);
    let ext = make_observation_extendable(&sys);
    assert!(check_observation_extendable(&ext));
    assert_eq!(ext.automaton.transitions(0).len(), 1);
}

/// Bounded run-extension search for observation extendability.
fn extendable_by_search(sys: &LabeledSystem) -> bool {
    let a = &sys.automaton;
    let n = a.num_states();
    let mut reach = std::collections::BTreeSet::new();
    let mut stack: Vec<u32> = a.initial().to_vec();
    while let Some(q) = stack.pop() {
        if reach.insert(q) {
            stack.extend(a.transitions(q).iter().map(|&(_, t)| t));
        }
    }
    reach.into_iter().all(|x| {
        // Paths of unobservable events of length ≤ n ending in an observable one.
        let mut frontier = vec![x];
        for _ in 0..=n {
            if frontier.iter().any(|&q| a.transitions(q).iter().any(|&(e, _)| sys.is_observable(e))) {
                return true;
            }
            frontier = frontier
                .iter()
                .flat_map(|&q| a.transitions(q).iter().filter(|(e, _)| !sys.is_observable(*e)).map(|&(_, t)| t))
                .collect();
        }
        false
    })
}

#[test]
fn extendability_matches_search() {
    for seed in 0..300 {
        let sys = random_system(0xab + seed, 5, 3);
        assert_eq!(check_observation_extendable(&sys), extendable_by_search(&sys), "{}", sys.name);
    }
}

#[test]
fn infinite_separate_small_cases() {
    let alpha = Alphabet::from_names(["a", "b"]).into_shared();
    let mut g = Nfa::new(alpha, 2);
    g.add_transition(0, EventId(0), 1);
    g.add_transition(1, EventId(1), 0);
    g.add_initial(0);
    let sys = LabeledSystem::with_secrets(g, &[], &[EventId(0), EventId(1)]);
    for ty in [SecretType::One, SecretType::Two] {
        assert!(verify_infinite_separate(&sys, ty, None, &opts()).unwrap().opaque);
    }

    let a1 = model("epochs_a1");
    let inf = verify_infinite_separate(&a1, SecretType::Two, None, &opts()).unwrap();
    let k8 = verify_separate_kstep_so(&a1, 8, SecretType::Two, &opts()).unwrap();
    assert_eq!(inf.opaque, k8.opaque);
}

#[test]
fn infinite_separate_saturates_on_three_states() {
    for seed in 0..40 {
        let sys = random_system(0x3a + seed, 3, 2);
        if sys.num_states() != 3 {
            continue;
        }
        for ty in [SecretType::One, SecretType::Two] {
            let base = verify_separate_kstep_so(&sys, 8, ty, &opts()).unwrap().opaque;
            for k in [9, 12, 16] {
                assert_eq!(verify_separate_kstep_so(&sys, k, ty, &opts()).unwrap().opaque, base, "{}", sys.name);
            }
            assert_eq!(verify_infinite_separate(&sys, ty, None, &opts()).unwrap().opaque, base);
        }
    }
}

#[test]
fn infinite_separate_budget() {
    let sys = opacity::generators::gen_cyclic(21);
    let err = verify_infinite_separate(&sys, SecretType::Two, None, &opts()).unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded { detail: Some(_), .. }));
}

#[test]
fn infinite_joint_matches_oracle_trend() {
    // Joint infinite-step implies joint K-step for every K.
    for sys in corpus().iter().take(80) {
        for ty in [SecretType::One, SecretType::Two] {
            let inf = verify(sys, OpacityNotion::infinite(Mode::Joint, ty), Some(Method::Forward));
            let rev = verify(sys, OpacityNotion::infinite(Mode::Joint, ty), Some(Method::Reverse));
            assert_eq!(inf.opaque, rev.opaque, "{}", sys.name);
            if inf.opaque {
                for k in 0..=3 {
                    assert!(verify(sys, OpacityNotion::kstep(k, Mode::Joint, ty), None).opaque, "{}", sys.name);
                }
            }
        }
    }
}

/// Literal weak/strong definitions over run prefixes: a secret state visited
/// k observations ago must be matched by a nonsecret one at the same
/// observation count (weak), or some run must avoid secrets throughout the
/// last K observations (strong).
#[test]
fn weak_and_strong_equal_literal_definitions() {
    for seed in 0..150 {
        let sys = random_deterministic(0x77 + seed, 5, 3);
        for k in 0..=2usize {
            let o = ObsOracle::new(&sys, k + 1);
            let obs = sys.observable_events();
            let mut weak = true;
            let mut strong = true;
            let mut layer = vec![o.start()];
            for _ in 0..=6 {
                for tails in &layer {
                    for d in 0..=k {
                        let saw_s = tails.iter().any(|t| t.hist[k - d].0);
                        let saw_ns = tails.iter().any(|t| t.hist[k - d].1);
                        if saw_s && !saw_ns {
                            weak = false;
                        }
                    }
                    if !tails.is_empty() && !tails.iter().any(|t| t.hist.iter().all(|h| !h.0)) {
                        strong = false;
                    }
                }
                layer = layer.iter().flat_map(|t| obs.iter().map(|&e| o.step(t, e))).filter(|t| !t.is_empty()).collect();
            }
            let sep2 = verify(&sys, OpacityNotion::kstep(k, Mode::Separate, SecretType::Two), None).opaque;
            let joint1 = verify(&sys, OpacityNotion::kstep(k, Mode::Joint, SecretType::One), None).opaque;
            assert_eq!(sep2, weak, "{} K={k} weak", sys.name);
            assert_eq!(joint1, strong, "{} K={k} strong", sys.name);
        }
    }
}

/// The secret observer's state sets, projected to system states, are the
/// classical observer's estimates.
#[test]
fn cso_observer_projects_to_state_estimates() {
    for sys in corpus().iter().take(100) {
        let t = label_transform(sys);
        let mask = induced_mask(&t.io);
        let spec = build_spec(&t.io, &OpacityNotion::cso());
        let so = SecretObserver::build(&t.nfa, &spec.nfa, &mask, &Default::default()).unwrap();
        let o = ObsOracle::new(sys, 1);
        let out = mask.output();
        let init = out.lookup("σ_init").unwrap();
        let mut stack = vec![(so.dfa.next(so.dfa.initial(), init).unwrap(), Vec::<EventId>::new())];
        let mut seen = std::collections::BTreeSet::new();
        while let Some((q, w)) = stack.pop() {
            if !seen.insert(q) {
                continue;
            }
            let est: std::collections::BTreeSet<u32> = o.run(&w).iter().map(|t| t.x).collect();
            let proj: std::collections::BTreeSet<u32> = so.pairs_of(q).map(|(x, _)| x).collect();
            assert_eq!(est, proj, "{} after {w:?}", sys.name);
            for e in sys.observable_events() {
                if let Some(s) = out.lookup(sys.alphabet().name(e)) {
                    if let Some(n) = so.dfa.next(q, s) {
                        let mut v = w.clone();
                        v.push(e);
                        stack.push((n, v));
                    }
                }
            }
        }
    }
}
