use proptest::prelude::*;
use situskit::filters::{subset, Filter};
use situskit::simplex::{
    all_preorders, compose_lists, corepresented_by_preorder, coproduct, initial, quotient, set_corepresented, shift,
    shift_nat, terminal, weakly_increasing_lists, FinPreorder, LevelEquivalence, Morphism, ViolationKind,
};

fn ab() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

#[test]
fn corepresented_carriers() {
    let c3 = corepresented_by_preorder(&FinPreorder::chain(3), 2, None).unwrap();
    assert_eq!(c3.size(2), 6);
    let s2 = set_corepresented(ab(), 2).unwrap();
    assert_eq!(s2.size(2), 4);
    let ab_ = s2.index_of(2, &[0, 1]).unwrap();
    let aa = s2.index_of(2, &[0, 0]).unwrap();
    assert_eq!(s2.face(2, &[1, 1])[ab_], aa);
}

#[test]
fn list_counts_and_composition_rule() {
    assert_eq!(weakly_increasing_lists(2, 3).len(), 6);
    assert_eq!(weakly_increasing_lists(3, 2).len(), 4);
    assert_eq!(compose_lists(&[1, 3, 3], &[2, 3]), vec![3, 3]);
}

#[test]
fn every_small_preorder_gives_a_valid_object() {
    for n in 0..=4 {
        for p in all_preorders(n) {
            let x = corepresented_by_preorder(&p, 3, None).unwrap();
            assert!(x.validate().is_empty(), "{:?}", p);
        }
    }
    assert_eq!(all_preorders(3).len(), 29);
    assert_eq!(all_preorders(4).len(), 355);
}

#[test]
fn corrupted_filter_reports_one_violation() {
    let x = set_corepresented(ab(), 2).unwrap();
    let aa = x.index_of(2, &[0, 0]).unwrap();
    let bad = x
        .with_filters(vec![Filter::antidiscrete(2), Filter::principal(4, subset(4, [aa])).unwrap()])
        .unwrap();
    let v = bad.validate();
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].kind, ViolationKind::Continuity);
    assert_eq!((v[0].level, v[0].face.clone()), (1, vec![1, 1]));
    assert!(v[0].witness.contains("(b)"));
    let supplied = corepresented_by_preorder(
        &FinPreorder::set(ab()),
        2,
        Some(vec![Filter::antidiscrete(2), Filter::principal(4, subset(4, [aa])).unwrap()]),
    );
    assert!(supplied.is_err());
}

#[test]
fn shift_examples() {
    let x = set_corepresented(ab(), 3).unwrap();
    let s = shift(&x).unwrap();
    assert_eq!(s.size(1), 4);
    assert!(s.validate().is_empty());
    let (src, tgt, nat) = shift_nat(&x).unwrap();
    nat.check(&src, &tgt).unwrap();
    let i = src.index_of(1, &[0, 1]).unwrap();
    assert_eq!(tgt.simplices(1)[nat.level(1)[i]], vec![0]);
    let t = shift(&terminal(3)).unwrap();
    assert!((1..=2).all(|n| t.size(n) == 1));
    assert!(shift(&terminal(1)).is_err());
}

#[test]
fn terminal_and_initial() {
    assert_eq!(terminal(3).size(3), 1);
    assert_eq!(initial(3).size(1), 0);
    assert!(initial(2).validate().is_empty());
}

#[test]
fn quotient_examples() {
    let x = set_corepresented(ab(), 3).unwrap();
    let (q, p) = quotient(&x, &LevelEquivalence::identity(&x)).unwrap();
    assert!((1..=3).all(|n| q.size(n) == x.size(n)));
    p.check(&x, &q).unwrap();
    let (t, p) = quotient(&x, &LevelEquivalence::total(&x)).unwrap();
    assert!((1..=3).all(|n| t.size(n) == 1));
    p.check(&x, &t).unwrap();
    // identify only (a,b) with (b,a): faces [1] separate them
    let e = LevelEquivalence::by_key(&x, |n, i| {
        let mut t = x.simplices(n)[i].clone();
        if n == 2 {
            t.sort();
        }
        t
    });
    assert!(quotient(&x, &e).is_err());
}

#[test]
fn coproduct_of_chains() {
    let a = corepresented_by_preorder(&FinPreorder::chain(2), 2, None).unwrap();
    let b = corepresented_by_preorder(&FinPreorder::chain(1), 2, None).unwrap();
    let c = coproduct(&[&a, &b]).unwrap();
    assert_eq!(c.size(1), 3);
    assert_eq!(c.size(2), 4);
    assert!(c.validate().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quotients_by_vertex_maps_factor(vmap in proptest::collection::vec(0usize..2, 3)) {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let x = set_corepresented(labels, 3).unwrap();
        let y = set_corepresented(vec!["u".into(), "v".into()], 3).unwrap();
        let e = LevelEquivalence::by_key(&x, |n, i| x.simplices(n)[i].iter().map(|&v| vmap[v as usize]).collect::<Vec<_>>());
        let (q, proj) = quotient(&x, &e).unwrap();
        prop_assert!(q.validate().is_empty());
        proj.check(&x, &q).unwrap();
        let g = Morphism::from_vertex_map(&x, &y, &vmap).unwrap();
        // g is constant on classes, so it factors through the projection
        let h = Morphism::new((1..=3).map(|n| {
            (0..q.size(n)).map(|c| {
                let i = (0..x.size(n)).find(|&i| e.class(n, i) == c).unwrap();
                g.level(n)[i]
            }).collect()
        }).collect());
        h.check(&q, &y).unwrap();
        prop_assert_eq!(proj.then(&h), g);
    }

    #[test]
    fn shift_nat_is_a_morphism(k in 1usize..4, depth in 2usize..5) {
        let x = corepresented_by_preorder(&FinPreorder::chain(k), depth, None).unwrap();
        let (s, t, nat) = shift_nat(&x).unwrap();
        prop_assert!(s.validate().is_empty());
        prop_assert!(nat.check(&s, &t).is_ok());
    }
}
