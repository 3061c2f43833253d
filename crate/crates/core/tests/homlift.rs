use situskit::filters::{subset, Filter};
use situskit::homlift::{
    exists_surjection, has_lift, hom_set, hom_set_levelwise, hom_set_vertex, lifting_property, right_negation,
    Arrow, LiftingInstance,
};
use situskit::simplex::{
    all_preorders, corepresented_by_preorder, initial, set_corepresented, terminal, FinPreorder, Morphism,
};
use situskit::Guard;

fn chain(n: usize, depth: usize) -> situskit::simplex::Situs {
    corepresented_by_preorder(&FinPreorder::chain(n), depth, None).unwrap()
}

#[test]
fn hom_examples() {
    let g = Guard::default();
    let c2 = chain(2, 3);
    assert_eq!(hom_set(&c2, &c2, &g).unwrap().len(), 3);
    assert_eq!(hom_set(&initial(3), &c2, &g).unwrap().len(), 1);
    assert_eq!(hom_set(&c2, &terminal(3), &g).unwrap().len(), 1);
    assert_eq!(hom_set(&c2, &initial(3), &g).unwrap().len(), 0);
}

#[test]
fn vertex_and_levelwise_enumerations_agree() {
    let ps: Vec<FinPreorder> = (0..=3).flat_map(all_preorders).collect();
    let objs: Vec<_> = ps.iter().map(|p| corepresented_by_preorder(p, 3, None).unwrap()).collect();
    for x in &objs {
        for y in &objs {
            assert_eq!(hom_set_vertex(x, y).unwrap(), hom_set_levelwise(x, y).unwrap());
        }
    }
}

#[test]
fn levelwise_respects_filters() {
    // identity on {a,b} with a filter pinned at (a) on the source only
    let x = set_corepresented(vec!["a".into(), "b".into()], 2).unwrap();
    let pinned = x
        .with_filters(vec![
            Filter::principal(2, subset(2, [0])).unwrap(),
            Filter::principal(4, subset(4, [0])).unwrap(),
        ])
        .unwrap()
        .checked()
        .unwrap();
    let a = hom_set_vertex(&x, &pinned).unwrap();
    let b = hom_set_levelwise(&x, &pinned).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 1);
}

#[test]
fn trivial_lifting_instances() {
    let g = Guard::default();
    let c2 = chain(2, 2);
    let s2 = set_corepresented(vec!["1".into(), "2".into()], 2).unwrap();
    let t = terminal(2);
    let inc = Arrow::new(&c2, &s2, Morphism::from_vertex_map(&c2, &s2, &[0, 1]).unwrap()).unwrap();
    let to_t = Arrow::to_terminal(&s2, &t).unwrap();
    // i identity
    let inst = LiftingInstance { i: Arrow::identity(&c2), p: Arrow::to_terminal(&c2, &t).unwrap() };
    assert!(lifting_property(&inst, &g).unwrap().holds);
    // p identity
    let inst = LiftingInstance { i: inc.clone(), p: Arrow::identity(&s2) };
    assert!(lifting_property(&inst, &g).unwrap().holds);
    // X terminal
    let inst = LiftingInstance { i: inc.clone(), p: Arrow::identity(&t) };
    assert!(lifting_property(&inst, &g).unwrap().holds);
    // the identity of the chain does not extend over the set: (2,1) has no image
    let inst = LiftingInstance { i: inc.clone(), p: Arrow::to_terminal(&c2, &t).unwrap() };
    let out = lifting_property(&inst, &g).unwrap();
    assert!(!out.holds);
    assert_eq!(out.witness.unwrap().f, Morphism::identity(&c2));
    assert!(right_negation(&[], &to_t, &g).unwrap());
}

#[test]
fn has_lift_checks_the_square() {
    let g = Guard::default();
    let c2 = chain(2, 2);
    let t = terminal(2);
    let inst = LiftingInstance { i: Arrow::identity(&c2), p: Arrow::to_terminal(&c2, &t).unwrap() };
    let f = Morphism::identity(&c2);
    let gm = Morphism::to_terminal(&c2);
    assert_eq!(has_lift(&inst, &f, &gm, &g).unwrap(), Some(f.clone()));
    let swap = Morphism::from_vertex_map(&c2, &c2, &[0, 0]).unwrap();
    assert!(has_lift(&inst, &swap, &gm, &g).unwrap().is_some());
    let inst2 = LiftingInstance { i: Arrow::identity(&c2), p: Arrow::identity(&c2) };
    assert!(has_lift(&inst2, &f, &swap, &g).is_err());
}

#[test]
fn retracts_and_composites_keep_lifting() {
    let g = Guard::default();
    let t = terminal(2);
    let c2 = chain(2, 2);
    let s2 = set_corepresented(vec!["1".into(), "2".into()], 2).unwrap();
    let s1 = set_corepresented(vec!["1".into()], 2).unwrap();
    // p = s2 -> t lifts against i = c2 -> s2 (any map from c2 extends)
    let i = Arrow::new(&c2, &s2, Morphism::from_vertex_map(&c2, &s2, &[0, 1]).unwrap()).unwrap();
    let p = Arrow::to_terminal(&s2, &t).unwrap();
    assert!(lifting_property(&LiftingInstance { i: i.clone(), p: p.clone() }, &g).unwrap().holds);
    // a retract of i: the identity of the one-point chain
    let r = Arrow::identity(&s1);
    assert!(lifting_property(&LiftingInstance { i: r, p: p.clone() }, &g).unwrap().holds);
    // p∘q with q = s2 -> s2 the identity
    let q = Arrow::identity(&s2);
    let pq = q.then(&p).unwrap();
    assert!(lifting_property(&LiftingInstance { i, p: pq }, &g).unwrap().holds);
}

#[test]
fn surjections() {
    let g = Guard::default();
    let c3 = chain(3, 3);
    let c2 = chain(2, 3);
    assert!(exists_surjection(&c3, &terminal(3), &g).unwrap().is_some());
    assert!(exists_surjection(&c2, &c3, &g).unwrap().is_none());
    let m = exists_surjection(&c3, &c2, &g).unwrap().unwrap();
    m.check(&c3, &c2).unwrap();
}
