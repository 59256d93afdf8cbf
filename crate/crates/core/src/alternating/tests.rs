use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::automata::determinize_complete;
use crate::oracle::{random_ata, random_formula};
use crate::trees::{enumerate_trees, parse_tree};
use crate::Bound;

fn abc() -> RankedAlphabet {
    RankedAlphabet::parse("eps/0, a/1, b/2").unwrap()
}

fn sample_bta() -> Bta {
    Bta::parse(
        "alphabet: eps/0, a/1, b/2
         final: q0
         q0 <- b(q1,q2)
         q1 <- eps
         q2 <- eps",
    )
    .unwrap()
}

fn member_states(a: &Ata, t: &Tree) -> Vec<StateId> {
    let mut m = Membership::new(a.clone());
    (0..a.state_count() as StateId)
        .filter(|&x| m.accepts(x, t))
        .collect()
}

#[test]
fn acceptance_examples() {
    let al = abc();
    let all = Ata::parse("initial: X\nstate X: eps(0) -> T\nstate X: a(1) -> T\nstate X: b(2) -> T").unwrap();
    for t in enumerate_trees(&al, 5) {
        assert!(ata_accepts(all.clone(), 0, &t));
    }
    let m = bta_to_ata(&sample_bta());
    let q0 = sample_bta().state_id("q0").unwrap() as StateId;
    assert!(ata_accepts(m.clone(), q0, &parse_tree("b(eps,eps)", &al).unwrap()));
    let none = Ata::parse("alphabet: eps/0\ninitial: X\nstate X: eps(0) -> F").unwrap();
    assert!(!ata_accepts(none, 0, &Tree::eps()));
}

#[test]
fn bta_embedding_formulas() {
    let m = sample_bta();
    let a = bta_to_ata(&m);
    let al = m.alphabet();
    let id = |n: &str| m.state_id(n).unwrap() as StateId;
    assert!(a.phi(id("q1"), al.eps()).is_true());
    let names = |x: StateId| a.label(x).to_string();
    assert_eq!(
        a.phi(id("q0"), al.id("b").unwrap()).display(&names).to_string(),
        "(d 1 q1 & d 2 q2)"
    );
    assert!(a.phi(id("q0"), al.id("a").unwrap()).is_false());
    for t in enumerate_trees(al, 6) {
        let expected: Vec<StateId> = m.accepts(&t).into_iter().map(|q| q as StateId).collect();
        assert_eq!(member_states(&a, &t), expected);
    }
}

#[test]
fn dnf_is_sound() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let small: Vec<Tree> = enumerate_trees(&al, 4);
    for _ in 0..40 {
        let ata = random_ata(&mut rng, &al, 3, true);
        let mut m = Membership::new(ata);
        let mut f = FormulaFactory::default();
        for arity in 0..=2usize {
            let phi = random_formula(&mut rng, &mut f, arity, 3, 3, true);
            let d = dnf(&phi, arity);
            let tuples: Vec<Vec<Tree>> = match arity {
                0 => vec![vec![]],
                1 => small.iter().map(|t| vec![t.clone()]).collect(),
                _ => small
                    .iter()
                    .flat_map(|l| small.iter().map(move |r| vec![l.clone(), r.clone()]))
                    .collect(),
            };
            for kids in tuples {
                let direct = phi.eval(&mut |i, x| m.accepts(x, &kids[i - 1]));
                let via = d
                    .iter()
                    .any(|tuple| tuple.iter().zip(&kids).all(|(p, t)| m.accepts_pair(p, t)));
                assert_eq!(direct, via, "{phi:?} on {kids:?}");
            }
        }
    }
}

#[test]
fn intersection_is_conjunction() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let a = random_ata(&mut rng, &al, 3, true);
        let b = random_ata(&mut rng, &al, 2, true);
        let i = intersect(&a, &b).unwrap();
        let (mut ma, mut mb, mut mi) = (
            Membership::new(a.clone()),
            Membership::new(b.clone()),
            Membership::new(i.clone()),
        );
        for t in enumerate_trees(&al, 5) {
            assert_eq!(mi.in_language(&t), ma.in_language(&t) && mb.in_language(&t));
        }
        let ba = traversal_bounds(&push_negation(&a)).initial;
        let bb = traversal_bounds(&push_negation(&b)).initial;
        let bi = traversal_bounds(&push_negation(&i)).initial;
        assert!(bi <= ba + bb);
    }
    let other = RankedAlphabet::parse("c/1").unwrap();
    let c = random_ata(&mut rng, &other, 1, false);
    let a = random_ata(&mut rng, &al, 1, false);
    assert!(matches!(intersect(&a, &c), Err(Error::AlphabetMismatch(_))));
}

#[test]
fn intersection_with_universal_and_empty() {
    let al = abc();
    let m = bta_to_ata(&sample_bta());
    let all = bta_to_ata(&Bta::universal(&al));
    let empty = Ata::new(al.clone(), vec![], vec![], vec![]).unwrap();
    let i1 = intersect(&m, &all).unwrap();
    let i2 = intersect(&m, &empty).unwrap();
    let (mut mm, mut m1, mut m2) = (Membership::new(m), Membership::new(i1), Membership::new(i2));
    for t in enumerate_trees(&al, 5) {
        assert_eq!(m1.in_language(&t), mm.in_language(&t));
        assert!(!m2.in_language(&t));
    }
}

#[test]
fn determinization_preserves_language() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let a = random_ata(&mut rng, &al, 3, false);
        let d = determinize_ata(&a).unwrap();
        let mut m = Membership::new(a.clone());
        for t in enumerate_trees(&al, 7) {
            assert_eq!(d.dbta.in_language(&t), m.in_language(&t), "{t}");
            assert_eq!(d.dbta.as_bta().accepts(&t).len(), 1);
        }
    }
    let neg = random_ata(&mut rng, &al, 3, true);
    if neg.has_negation() {
        assert!(matches!(determinize_ata(&neg), Err(Error::NegationUnsupported)));
    }
}

#[test]
fn determinization_edge_cases() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a = random_ata(&mut rng, &al, 2, false).with_initial(vec![]).unwrap();
    let d = determinize_ata(&a).unwrap();
    assert_eq!(d.dbta.finals().count(), 0);

    let dbta = determinize_complete(&sample_bta()).dbta;
    let back = determinize_ata(&bta_to_ata(dbta.as_bta())).unwrap();
    for t in enumerate_trees(&al, 6) {
        assert_eq!(back.dbta.in_language(&t), dbta.in_language(&t));
    }
}

#[test]
fn dual_states() {
    let a = Ata::parse(
        "alphabet: eps/0, a/1
         initial: X
         state X: eps(0) -> T
         state X: a(1) -> F",
    )
    .unwrap();
    let p = push_negation(&a);
    assert!(!p.has_negation());
    let not_x = 1;
    assert_eq!(p.label(not_x), "~X");
    let mut m = Membership::new(p);
    for t in enumerate_trees(a.alphabet(), 5) {
        assert_eq!(m.accepts(not_x, &t), t.label() == "a");
    }
}

#[test]
fn push_negation_preserves_languages() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..30 {
        let a = random_ata(&mut rng, &al, 3, true);
        let p = push_negation(&a);
        assert!(!p.has_negation());
        let n = a.state_count() as StateId;
        let (mut ma, mut mp) = (Membership::new(a.clone()), Membership::new(p));
        for t in enumerate_trees(&al, 5) {
            for x in 0..n {
                let inx = ma.accepts(x, &t);
                assert_eq!(mp.accepts(x, &t), inx);
                assert_eq!(mp.accepts(n + x, &t), !inx);
            }
        }
    }
}

#[test]
fn trimming_keeps_language() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let a = random_ata(&mut rng, &al, 3, true);
        let t = push_negation(&a).trim();
        assert!(t.state_count() <= 2 * a.state_count());
        let (mut ma, mut mt) = (Membership::new(a), Membership::new(t));
        for tree in enumerate_trees(&al, 5) {
            assert_eq!(ma.in_language(&tree), mt.in_language(&tree));
        }
    }
}

#[test]
fn traversal_bound_examples() {
    let b = traversal_bounds(&bta_to_ata(&sample_bta()));
    assert!(b.per_state.iter().all(|&x| x <= Bound::Finite(1)));
    assert!(b.is_bounded_by(1));
    // The default factory collapses `φ ∧ φ`; build the doubled conjunction
    // with the DNF-preserving one.
    let al = RankedAlphabet::parse("a/1").unwrap();
    let mut f = FormulaFactory::new(Simplify::DnfPreserving);
    let x = f.atom(1, 0);
    let xx = f.and(x.clone(), x.clone());
    let mut table = vec![vec![f.bottom(); al.len()]];
    table[0][al.id("a").unwrap().index()] = xx;
    let doubling = Ata::new(al.clone(), vec!["X".into()], vec![0], table).unwrap();
    assert_eq!(traversal_bounds(&doubling).initial, Bound::Infinite);
    let mut table = vec![vec![f.bottom(); al.len()]];
    table[0][al.id("a").unwrap().index()] = f.or(x.clone(), x);
    let either = Ata::new(al, vec!["X".into()], vec![0], table).unwrap();
    assert_eq!(traversal_bounds(&either).initial, Bound::Finite(1));
}

#[test]
fn monotonicity_of_state_sets() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let a = random_ata(&mut rng, &al, 3, false);
    let mut m = Membership::new(a);
    for _ in 0..20 {
        let big: StateSet = (0..3).filter(|_| rng.gen_bool(0.6)).collect();
        let small: StateSet = big.iter().filter(|_| rng.gen_bool(0.5)).collect();
        for t in enumerate_trees(&al, 5) {
            let in_big = m.accepts_pair(&StateSetPair::positive(big.clone()), &t);
            if in_big {
                assert!(m.accepts_pair(&StateSetPair::positive(small.clone()), &t));
            }
        }
    }
}

#[test]
fn text_roundtrip() {
    let al = abc();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..10 {
        let a = random_ata(&mut rng, &al, 3, true);
        let b = Ata::parse(&a.to_string()).unwrap();
        let (mut ma, mut mb) = (Membership::new(a), Membership::new(b));
        for t in enumerate_trees(&al, 4) {
            assert_eq!(ma.in_language(&t), mb.in_language(&t));
        }
    }
    assert!(matches!(
        Ata::parse("state X: eps(0) -> d 1 X"),
        Err(Error::Syntax { .. })
    ));
    assert!(matches!(
        Ata::parse("state X: a(1) -> (d 1 X &"),
        Err(Error::Syntax { .. })
    ));
}

#[test]
fn accepts_rejects_foreign_symbols() {
    let a = bta_to_ata(&Bta::universal(&abc()));
    assert!(!ata_accepts(a.clone(), 0, &Tree::leaf("zzz")));
    assert!(ata_accepts(a, 0, &Tree::eps()));
}
