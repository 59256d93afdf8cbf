use super::*;
use crate::alternating::{dnf, traversal_bounds, Membership, StateSet};
use crate::automata::determinize_complete;
use crate::oracle::{in_preimage, language_equal_upto, random_instance, InstanceLimits};
use crate::trees::{enumerate_trees, Tree};

fn sample_mtt() -> Mtt {
    Mtt::parse(
        "alphabet: eps/0, a/1, b/2
         initial: p0
         p0(a(x1)) -> p(x1, eps)
         p(eps, y1) -> b(y1, y1)",
    )
    .unwrap()
}

fn nondet_out() -> Bta {
    Bta::parse(
        "alphabet: eps/0, a/1, b/2
         final: q0
         q0 <- b(q1,q2)
         q1 <- eps
         q2 <- eps",
    )
    .unwrap()
}

/// Deterministic output type and a few sample trees per state.
fn samples(d: &Dbta, max_nodes: usize, per_state: usize) -> Vec<Vec<Tree>> {
    let mut by_state = vec![Vec::new(); d.state_count()];
    for t in enumerate_trees(d.alphabet(), max_nodes) {
        let q = d.run(&t).unwrap();
        if by_state[q].len() < per_state {
            by_state[q].push(t);
        }
    }
    by_state
}

/// Every choice of sample trees for a parameter tuple of types `qs`.
fn param_choices(samples: &[Vec<Tree>], qs: &[usize]) -> Vec<Vec<Tree>> {
    let mut out = vec![Vec::new()];
    for &q in qs {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                samples[q].iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Reference semantics of `⟨p, q̄, q⃗⟩`.
fn holds(m: &Mtt, d: &Dbta, p: ProcId, outs: &StateSet, params: &[Tree], t: &Tree) -> bool {
    m.eval_proc(p, t, params)
        .iter()
        .any(|u| outs.contains(d.run(u).unwrap() as StateId))
}

fn instances(n: u64) -> impl Iterator<Item = (u64, Mtt, Dbta)> {
    (0..n).map(|seed| {
        let inst = random_instance(seed, &InstanceLimits::default());
        let d = determinize_complete(&inst.out_type).dbta;
        (seed, inst.mtt, d)
    })
}

#[test]
fn parameter_and_constructor_examples() {
    let m = Mtt::parse(
        "alphabet: eps/0, a/1, b/2
         initial: p0
         p0(a(x1)) -> p(x1, eps)
         p(eps, y1) -> y1",
    )
    .unwrap();
    let out = nondet_out();
    let ata = infer_basic_unchecked(&m, &out).unwrap();
    let layout = BasicLayout::new(&m, out.state_count()).unwrap();
    let p = m.proc_id("p").unwrap();
    let eps = m.alphabet().eps();
    for q in 0..3 {
        for q1 in 0..3 {
            let phi = ata.phi(layout.id(p, q, &[q1]), eps);
            assert_eq!(phi.is_true(), q == q1);
            assert_eq!(phi.is_false(), q != q1);
        }
    }

    // b(y1, y1) cannot reach q0 from a single parameter type.
    let m = sample_mtt();
    let ata = infer_basic_unchecked(&m, &out).unwrap();
    let p = m.proc_id("p").unwrap();
    let (q0, q1) = (out.state_id("q0").unwrap(), out.state_id("q1").unwrap());
    assert!(ata.phi(layout.id(p, q0, &[q1]), eps).is_false());
}

#[test]
fn layout_roundtrip() {
    let m = sample_mtt();
    let layout = BasicLayout::new(&m, 3).unwrap();
    assert_eq!(layout.state_count(), 3 + 9);
    for x in 0..layout.state_count() as StateId {
        let (p, q, params) = layout.decode(x);
        assert_eq!(layout.id(p, q, &params), x);
    }
}

#[test]
fn nondeterministic_output_gives_empty_language() {
    let m = sample_mtt();
    let ata = infer_basic_unchecked(&m, &nondet_out()).unwrap();
    let mut mem = Membership::new(ata);
    for t in enumerate_trees(m.alphabet(), 7) {
        assert!(!mem.in_language(&t), "{t}");
    }
    // a(eps) ↦ b(eps, eps), which the automaton accepts.
    assert!(in_preimage(&m, &Tree::new("a", vec![Tree::eps()]), &nondet_out()));
}

#[test]
fn basic_matches_preimage() {
    for (seed, m, d) in instances(60) {
        let co = d.complement();
        let ata = infer_basic(&m, &co).unwrap();
        let mut mem = Membership::new(ata);
        for t in enumerate_trees(m.alphabet(), 6) {
            assert_eq!(mem.in_language(&t), in_preimage(&m, &t, co.as_bta()), "seed {seed}, {t}");
        }
    }
}

#[test]
fn basic_states_mean_what_they_say() {
    for (seed, m, d) in instances(30) {
        let ata = infer_basic(&m, &d).unwrap();
        let layout = BasicLayout::new(&m, d.state_count()).unwrap();
        let smp = samples(&d, 4, 2);
        let trees = enumerate_trees(m.alphabet(), 4);
        let mut mem = Membership::new(ata);
        for x in 0..layout.state_count() as StateId {
            let (p, q, qs) = layout.decode(x);
            let outs = StateSet::singleton(q as StateId);
            for params in param_choices(&smp, &qs) {
                for t in &trees {
                    assert_eq!(
                        mem.accepts(x, t),
                        holds(&m, &d, p, &outs, &params, t),
                        "seed {seed}, state {x}, {t}"
                    );
                }
            }
        }
    }
}

#[test]
fn optimized_states_agree_with_semantics() {
    for (seed, m, d) in instances(25) {
        let nq = d.state_count();
        let smp = samples(&d, 4, 1);
        let trees = enumerate_trees(m.alphabet(), 4);
        let reachable = m.reachable_procedures();
        for opts in InferOptions::all_combinations() {
            let mut inf = infer_optimized(&m, &d, opts).unwrap();
            let mut cases = Vec::new();
            for p in 0..m.proc_count() {
                if inf.complement_active() && !reachable.contains(&p) {
                    continue;
                }
                for mask in 1..(1u32 << nq) {
                    let outs: StateSet = (0..nq as StateId).filter(|q| mask >> q & 1 == 1).collect();
                    let mut qs = vec![0; m.proc_arity(p)];
                    loop {
                        if qs.iter().all(|&q| !smp[q].is_empty()) {
                            let x = inf.state_id(InfState {
                                proc: p,
                                outs: outs.clone(),
                                params: qs.iter().map(|&q| q as StateId).collect(),
                            });
                            cases.push((x, p, outs.clone(), param_choices(&smp, &qs)[0].clone()));
                        }
                        if !odometer(&mut qs, nq) {
                            break;
                        }
                    }
                }
            }
            let mut mem = Membership::new(&mut inf);
            for (x, p, outs, params) in &cases {
                for t in &trees {
                    assert_eq!(
                        mem.accepts(*x, t),
                        holds(&m, &d, *p, outs, params, t),
                        "seed {seed}, {opts:?}, {t}"
                    );
                }
            }
        }
    }
}

#[test]
fn plain_singletons_equal_basic() {
    for (seed, m, d) in instances(25) {
        let basic = infer_basic(&m, &d).unwrap();
        let layout = BasicLayout::new(&m, d.state_count()).unwrap();
        let mut inf = infer_optimized(&m, &d, InferOptions::none()).unwrap();
        let ids: Vec<(StateId, StateId)> = (0..layout.state_count() as StateId)
            .map(|x| {
                let (p, q, qs) = layout.decode(x);
                let y = inf.state_id(InfState {
                    proc: p,
                    outs: StateSet::singleton(q as StateId),
                    params: qs.iter().map(|&q| q as StateId).collect(),
                });
                (x, y)
            })
            .collect();
        let mut mb = Membership::new(basic);
        let mut mo = Membership::new(&mut inf);
        for t in enumerate_trees(m.alphabet(), 5) {
            for &(x, y) in &ids {
                assert_eq!(mb.accepts(x, &t), mo.accepts(y, &t), "seed {seed}, {t}");
            }
        }
    }
}

#[test]
fn toggles_preserve_initial_language() {
    for (seed, m, d) in instances(40) {
        let basic = infer_basic(&m, &d.complement()).unwrap();
        for opts in InferOptions::all_combinations() {
            let mut inf = infer_optimized(&m, &d, opts).unwrap();
            let mut b = basic.clone();
            if let Err(t) = language_equal_upto(&mut b, &mut inf, 6) {
                panic!("seed {seed}, {opts:?}, {t}");
            }
        }
    }
}

#[test]
fn complement_rule_is_sound_for_total_deterministic() {
    let mut checked = 0;
    for (seed, m, d) in instances(80) {
        if !m.is_total_deterministic_syntactic() {
            continue;
        }
        checked += 1;
        let nq = d.state_count();
        let all: StateSet = (0..nq as StateId).collect();
        let mut inf = infer_optimized(&m, &d, InferOptions::none()).unwrap();
        let mut pairs = Vec::new();
        for p in m.reachable_procedures() {
            for mask in 1..(1u32 << nq) - 1 {
                let outs: StateSet = (0..nq as StateId).filter(|q| mask >> q & 1 == 1).collect();
                let co: StateSet = all.iter().filter(|&q| !outs.contains(q)).collect();
                let params = vec![0; m.proc_arity(p)];
                let a = inf.state_id(InfState {
                    proc: p,
                    outs,
                    params: params.clone(),
                });
                let b = inf.state_id(InfState { proc: p, outs: co, params });
                pairs.push((a, b));
            }
        }
        let mut mem = Membership::new(&mut inf);
        for t in enumerate_trees(m.alphabet(), 5) {
            for &(a, b) in &pairs {
                assert_ne!(mem.accepts(a, &t), mem.accepts(b, &t), "seed {seed}, {t}");
            }
        }
    }
    assert!(checked >= 10);
}

#[test]
fn copied_parameter_gives_two_disjuncts() {
    // Q = {0, 1, 2}: eps ↦ 0, a cycles. `p` only copies y1, and `r`
    // produces trees of every type.
    let d = Dbta::try_from(
        Bta::parse(
            "alphabet: eps/0, a/1
             states: s0, s1, s2
             final: s0
             s0 <- eps
             s1 <- a(s0)
             s2 <- a(s1)
             s0 <- a(s2)",
        )
        .unwrap(),
    )
    .unwrap();
    let m = Mtt::parse(
        "alphabet: eps/0, a/1
         initial: p0
         p0(eps) -> eps
         p0(a(x1)) -> p(x1, r(x1))
         p(eps, y1) -> y1
         p(a(x1), y1) -> p(x1, y1)
         r(eps) -> eps
         r(eps) -> a(eps)
         r(eps) -> a(a(eps))
         r(a(x1)) -> r(x1)",
    )
    .unwrap();
    let p0 = m.proc_id("p0").unwrap();
    let a = m.alphabet().id("a").unwrap();
    let qbar = StateSet::singleton(0);
    let count = |opts: InferOptions| {
        let mut inf = infer_optimized(&m, &d, opts).unwrap();
        let phi = inf.inf_body(p0, a, 0, &qbar, &[]);
        dnf(&phi, 1).len()
    };
    assert_eq!(count(InferOptions::default()), 2);
    assert_eq!(count(InferOptions::none()), 3);
}

#[test]
fn traversal_bounded_by_copy_bound() {
    for (seed, m, d) in instances(60) {
        let per_proc = m.copy_bounds();
        let ata = infer_basic(&m, &d).unwrap();
        let layout = BasicLayout::new(&m, d.state_count()).unwrap();
        let tb = traversal_bounds(&ata);
        for (x, &b) in tb.per_state.iter().enumerate() {
            let (p, _, _) = layout.decode(x as StateId);
            assert!(b <= per_proc[p], "seed {seed}, state {x}");
        }
        let mut inf = infer_optimized(&m, &d, InferOptions::default()).unwrap();
        let mat = crate::alternating::materialize(&mut inf);
        let tb = traversal_bounds(&mat.ata);
        assert!(tb.initial <= m.copy_bound(), "seed {seed}");
    }
}

#[test]
fn alphabet_mismatch_is_an_error() {
    let m = sample_mtt();
    let out = Bta::parse("alphabet: eps/0\nfinal: q\nq <- eps").unwrap();
    assert!(matches!(infer_basic_unchecked(&m, &out), Err(Error::AlphabetMismatch(_))));
}
