use proptest::prelude::*;
use situskit::fostruct::{binary_structures, compile, eval, FinStructure, Formula};
use situskit::indisc::{
    em_formula, indiscernible_by, is_extendable, is_indiscernible, EmFormulaSpec, EmVariant, IndiscKind, Sigma,
};
use situskit::simplex::all_tuples;
use situskit::Guard;

/// Index tuples of length `r` into `0..k`: increasing, or injective for order kinds.
fn index_tuples(k: usize, r: usize, order: bool) -> Vec<Vec<usize>> {
    all_tuples(k, r)
        .into_iter()
        .map(|t| t.into_iter().map(|v| v as usize).collect::<Vec<_>>())
        .filter(|t| {
            (0..r).all(|a| (a + 1..r).all(|b| if order { t[a] != t[b] } else { t[a] < t[b] }))
        })
        .collect()
}

/// Plain indiscernibility of a sequence: all index tuples agree, optionally only distinct-valued ones.
fn plain(class: &dyn Fn(&[u32]) -> u32, r: usize, seq: &[u32], order: bool, distinct_only: bool) -> bool {
    let vals: Vec<Vec<u32>> = index_tuples(seq.len(), r, order)
        .iter()
        .map(|t| t.iter().map(|&i| seq[i]).collect::<Vec<u32>>())
        .filter(|v| !distinct_only || (0..v.len()).all(|a| (a + 1..v.len()).all(|b| v[a] != v[b])))
        .collect();
    vals.windows(2).all(|w| class(&w[0]) == class(&w[1]))
}

/// Literal reading: enumerate the qualifying subsequences and test each one.
fn oracle(class: &dyn Fn(&[u32]) -> u32, r: usize, seq: &[u32], kind: IndiscKind) -> bool {
    use IndiscKind::*;
    let order = kind.is_order();
    match kind {
        Sequence | OrderIndiscernible => plain(class, r, seq, order, true),
        _ => (0u32..1 << seq.len()).all(|mask| {
            let sub: Vec<u32> = (0..seq.len()).filter(|i| mask >> i & 1 == 1).map(|i| seq[i]).collect();
            let qualifies = if matches!(kind, WithRepetitions | OrderWithRepetitions) {
                (0..sub.len()).all(|a| (a + 1..sub.len()).all(|b| sub[a] != sub[b]))
            } else {
                sub.windows(2).all(|w| w[0] != w[1])
            };
            !qualifies || plain(class, r, &sub, order, false)
        }),
    }
}

fn eq3() -> FinStructure {
    FinStructure::with_size(3)
}

#[test]
fn indiscernibility_examples() {
    let m = FinStructure::with_size(2);
    let abab = [0, 1, 0, 1];
    for text in ["x = y", "x = x", "~(x = y)", "x = z | y = z"] {
        let phi = Formula::parse(text).unwrap();
        assert!(is_indiscernible(&m, &phi, &abab, IndiscKind::WithRepetitions).unwrap(), "{text}");
    }
    let phi = Formula::parse("x = y").unwrap();
    assert!(!is_indiscernible(&m, &phi, &abab, IndiscKind::ConsecutiveRepetitions).unwrap());
    let c = FinStructure::chain(4);
    let le = Formula::parse("x <= y").unwrap();
    assert!(is_indiscernible(&c, &le, &[0, 1, 2, 3], IndiscKind::Sequence).unwrap());
    assert!(!is_indiscernible(&c, &le, &[0, 1, 2, 3], IndiscKind::OrderIndiscernible).unwrap());
    for kind in IndiscKind::ALL {
        assert!(is_indiscernible(&c, &le, &[2, 2, 2], kind).unwrap());
    }
    assert!(is_indiscernible(&c, &le, &[5], IndiscKind::Sequence).is_err());
}

#[test]
fn em_formula_examples() {
    let m = eq3();
    let phi = Formula::parse("x = y").unwrap();
    let two = em_formula(&EmFormulaSpec { phi: phi.clone(), width: 2, variant: EmVariant::Em }).unwrap();
    assert_eq!(two.arity(), 2);
    for t in all_tuples(3, 2) {
        assert!(eval(&m, &two, &t).unwrap());
    }
    let three = em_formula(&EmFormulaSpec { phi, width: 3, variant: EmVariant::Em }).unwrap();
    assert!(eval(&m, &three, &[0, 1, 2]).unwrap());
    let p = Formula::with_vars(Formula::parse("x = p | y = p").unwrap().expr, vec!["x".into(), "y".into(), "p".into()])
        .unwrap();
    let one = em_formula(&EmFormulaSpec { phi: p.clone(), width: 2, variant: EmVariant::EmOnePrime }).unwrap();
    assert_eq!(one.arity(), 3);
    for t in all_tuples(3, 3) {
        assert!(eval(&m, &one, &t).unwrap());
    }
    let bad = Formula::parse("x = x").unwrap();
    assert!(em_formula(&EmFormulaSpec { phi: bad, width: 2, variant: EmVariant::EmOnePrime }).is_err());
    assert!(em_formula(&EmFormulaSpec { phi: p, width: 0, variant: EmVariant::Em }).is_err());
}

#[test]
fn em_formulas_agree_with_the_predicates() {
    let phis: Vec<Formula> = ["R(x,y)", "R(x,x)", "x = y", "exists z. (R(x,z) & R(z,y))", "R(x,y) <-> R(y,x)"]
        .iter()
        .map(|t| Formula::parse(t).unwrap())
        .collect();
    let mut models = binary_structures(1);
    models.extend(binary_structures(2));
    models.extend(binary_structures(3));
    for m in &models {
        for phi in &phis {
            let c = compile(m, phi).unwrap();
            for n in 1..=3 {
                let em = compile(m, &em_formula(&EmFormulaSpec { phi: phi.clone(), width: n, variant: EmVariant::Em }).unwrap()).unwrap();
                let emp = compile(m, &em_formula(&EmFormulaSpec { phi: phi.clone(), width: n, variant: EmVariant::EmPrime }).unwrap()).unwrap();
                for t in all_tuples(m.size(), n) {
                    let class = |x: &[u32]| u32::from(c.eval(m, x));
                    assert_eq!(em.eval(m, &t), indiscernible_by(class, phi.arity(), &t, IndiscKind::WithRepetitions));
                    assert_eq!(emp.eval(m, &t), indiscernible_by(class, phi.arity(), &t, IndiscKind::ConsecutiveRepetitions));
                }
            }
        }
    }
}

#[test]
fn em_one_prime_fixes_the_parameter() {
    let phi = Formula::with_vars(Formula::parse("R(x,p)").unwrap().expr, vec!["x".into(), "p".into()]).unwrap();
    let spec = EmFormulaSpec { phi: phi.clone(), width: 3, variant: EmVariant::EmOnePrime };
    for m in binary_structures(2).iter().chain(binary_structures(3).iter().step_by(5)) {
        let em = compile(m, &em_formula(&spec).unwrap()).unwrap();
        let c = compile(m, &phi).unwrap();
        for t in all_tuples(m.size(), 3) {
            for p in 0..m.size() as u32 {
                let class = |x: &[u32]| u32::from(c.eval(m, &[x[0], p]));
                let mut args = t.clone();
                args.push(p);
                assert_eq!(em.eval(m, &args), indiscernible_by(class, 1, &t, IndiscKind::ConsecutiveRepetitions));
            }
        }
    }
}

#[test]
fn extendability_examples() {
    let g = Guard::default();
    let m = FinStructure::with_size(4);
    let eq = [Formula::parse("x = y").unwrap()];
    assert!(is_extendable(&m, &eq, &[0, 1], 3, IndiscKind::WithRepetitions, &g).unwrap());
    assert!(!is_extendable(&m, &eq, &[0, 1], 5, IndiscKind::WithRepetitions, &g).unwrap());
    let c = FinStructure::chain(3);
    let le = [Formula::parse("x <= y").unwrap()];
    // a decreasing pair is a legal length-2 sequence; three values expose the order
    assert!(is_extendable(&c, &le, &[2, 0], 2, IndiscKind::WithRepetitions, &g).unwrap());
    assert!(!is_extendable(&c, &le, &[2, 0], 2, IndiscKind::OrderWithRepetitions, &g).unwrap());
    assert!(!is_extendable(&c, &le, &[2, 0, 1], 2, IndiscKind::WithRepetitions, &g).unwrap());
    assert!(is_extendable(&c, &le, &[2, 0], 3, IndiscKind::WithRepetitions, &g).unwrap());
    assert!(is_extendable(&c, &le, &[0, 2], 3, IndiscKind::WithRepetitions, &g).unwrap());
    assert!(is_extendable(&c, &le, &[1, 1], 1, IndiscKind::Sequence, &g).unwrap());
}

#[test]
fn type_cutoffs_are_indiscernibility_tests() {
    let c = FinStructure::chain(4);
    let sigma = Sigma::cutoff(&c, &[], 0, 2);
    assert_eq!(sigma.len(), 2);
    assert!(situskit::indisc::sigma_indiscernible(&sigma, &[0, 1, 3], IndiscKind::Sequence));
    assert!(!situskit::indisc::sigma_indiscernible(&sigma, &[0, 3, 1], IndiscKind::Sequence));
    let over = Sigma::cutoff(&c, &[1], 0, 1);
    assert!(!situskit::indisc::sigma_indiscernible(&over, &[0, 2], IndiscKind::Sequence));
    assert_eq!(Sigma::cutoff_over_each(&c, 1, 2).len(), 8);
}

fn arb_model() -> impl Strategy<Value = FinStructure> {
    (1..=3usize).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let mut m = FinStructure::with_size(n);
            let tuples: Vec<Vec<u32>> =
                all_tuples(n, 2).into_iter().zip(&bits).filter(|(_, b)| **b).map(|(t, _)| t).collect();
            m.add_relation("R", 2, &tuples).unwrap();
            m
        })
    })
}

fn arb_phi() -> impl Strategy<Value = Formula> {
    prop::sample::select(vec!["R(x,y)", "R(x,x)", "x = y", "R(y,x) & ~R(x,y)", "R(x,y) | R(y,z)", "exists w. R(x,w)"])
        .prop_map(|t| Formula::parse(t).unwrap())
}

fn arb_kind() -> impl Strategy<Value = IndiscKind> {
    prop::sample::select(IndiscKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn predicate_matches_literal_oracle(m in arb_model(), phi in arb_phi(), kind in arb_kind(), raw in proptest::collection::vec(0u32..3, 0..6)) {
        let seq: Vec<u32> = raw.into_iter().map(|v| v % m.size() as u32).collect();
        let c = compile(&m, &phi).unwrap();
        let class = |x: &[u32]| u32::from(c.eval(&m, x));
        prop_assert_eq!(indiscernible_by(class, phi.arity(), &seq, kind), oracle(&class, phi.arity(), &seq, kind));
    }

    #[test]
    fn order_kinds_imply_plain_kinds(m in arb_model(), phi in arb_phi(), raw in proptest::collection::vec(0u32..3, 0..6)) {
        let seq: Vec<u32> = raw.into_iter().map(|v| v % m.size() as u32).collect();
        for (strong, weak) in [
            (IndiscKind::OrderWithRepetitions, IndiscKind::WithRepetitions),
            (IndiscKind::OrderIndiscernible, IndiscKind::Sequence),
            (IndiscKind::OrderConsecutiveRepetitions, IndiscKind::ConsecutiveRepetitions),
            (IndiscKind::ConsecutiveRepetitions, IndiscKind::WithRepetitions),
        ] {
            if is_indiscernible(&m, &phi, &seq, strong).unwrap() {
                prop_assert!(is_indiscernible(&m, &phi, &seq, weak).unwrap());
            }
        }
    }

    #[test]
    fn faces_stay_indiscernible(m in arb_model(), phi in arb_phi(), kind in arb_kind(), raw in proptest::collection::vec(0u32..3, 0..6), keep in any::<u8>()) {
        let seq: Vec<u32> = raw.into_iter().map(|v| v % m.size() as u32).collect();
        if is_indiscernible(&m, &phi, &seq, kind).unwrap() {
            let face: Vec<u32> = seq.iter().enumerate().filter(|(i, _)| keep >> i & 1 == 1).map(|(_, v)| *v).collect();
            prop_assert!(is_indiscernible(&m, &phi, &face, kind).unwrap());
        }
    }

    #[test]
    fn extendability_matches_arbitrary_insertions(m in arb_model(), phi in arb_phi(), kind in arb_kind(), raw in proptest::collection::vec(0u32..3, 0..3), n in 1usize..4) {
        let seq: Vec<u32> = raw.into_iter().map(|v| v % m.size() as u32).collect();
        let g = Guard::default();
        let fast = is_extendable(&m, std::slice::from_ref(&phi), &seq, n, kind, &g).unwrap();
        // oracle: insert up to n arbitrary values anywhere
        let c = compile(&m, &phi).unwrap();
        let class = |x: &[u32]| u32::from(c.eval(&m, x));
        let mut found = false;
        for extra in 0..=n {
            for vals in all_tuples(m.size(), extra) {
                for slots in all_tuples(seq.len() + extra, extra) {
                    let mut s = seq.clone();
                    for (v, &p) in vals.iter().zip(&slots) {
                        let p = (p as usize).min(s.len());
                        s.insert(p, *v);
                    }
                    let mut d = s.clone();
                    d.sort_unstable();
                    d.dedup();
                    if d.len() >= n && oracle(&class, phi.arity(), &s, kind) {
                        found = true;
                    }
                }
            }
        }
        prop_assert_eq!(fast, found);
    }
}
