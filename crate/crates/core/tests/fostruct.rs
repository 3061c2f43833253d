use proptest::prelude::*;
use situskit::fostruct::{
    automorphisms, binary_structures, equivalence_structure, eval, type_orbits, unary_function_structures, Expr,
    FinStructure, Formula, Term, TypeTable,
};
use situskit::simplex::all_tuples;
use situskit::Guard;

fn pure(n: usize) -> FinStructure {
    FinStructure::with_size(n)
}

#[test]
fn eval_examples() {
    let m = pure(3);
    assert!(eval(&m, &Formula::parse("x = x").unwrap(), &[1]).unwrap());
    let c = FinStructure::chain(3);
    let le = Formula::parse("x <= y").unwrap();
    assert!(eval(&c, &le, &[0, 2]).unwrap());
    assert!(!eval(&c, &le, &[2, 0]).unwrap());
    let mut e = pure(3);
    e.add_relation("R", 2, &[]).unwrap();
    let phi = Formula::parse("exists y. R(x,y)").unwrap();
    assert!((0..3).all(|a| !eval(&e, &phi, &[a]).unwrap()));
    assert!(eval(&c, &le, &[0]).is_err());
    assert!(eval(&c, &Formula::parse("S(x)").unwrap(), &[0]).is_err());
    assert!(eval(&e, &Formula::parse("R(x)").unwrap(), &[0]).is_err());
}

#[test]
fn parser_round_trips_and_reports_positions() {
    let texts = [
        "forall x. exists y. (x <= y & ~(y = x))",
        "(R(x,y) -> f(x) = y) <-> x != @b",
        "~~true | false",
        "x E y & forall z. z E x",
    ];
    for t in texts {
        let f = Formula::parse(t).unwrap();
        let again = Formula::parse(&f.to_string()).unwrap();
        assert_eq!(f.expr, again.expr, "{t}");
    }
    assert_eq!(Formula::parse("x <= y & y <= z").unwrap().vars, vec!["x", "y", "z"]);
    match Formula::parse("forall x x = x") {
        Err(situskit::Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 10)),
        other => panic!("{other:?}"),
    }
    assert!(Formula::parse("x = ").is_err());
    assert!(Formula::parse("x = y)").is_err());
}

#[test]
fn parameters_and_constants() {
    let mut m = FinStructure::chain(3);
    m.add_constant("top", 2).unwrap();
    let phi = Formula::parse_in("x <= top & @1 <= x", m.signature()).unwrap();
    assert_eq!(phi.vars, vec!["x"]);
    assert!((0..3).all(|a| eval(&m, &phi, &[a]).unwrap()));
    assert!(eval(&m, &Formula::parse("x = @9").unwrap(), &[0]).is_err());
}

#[test]
fn automorphism_examples() {
    let g = Guard::default();
    assert_eq!(automorphisms(&pure(3), &g).unwrap().len(), 6);
    assert_eq!(automorphisms(&FinStructure::chain(3), &g).unwrap().len(), 1);
    assert_eq!(automorphisms(&equivalence_structure(&[2, 2]), &g).unwrap().len(), 8);
    assert!(automorphisms(&pure(9), &g).is_err());
}

#[test]
fn orbit_examples() {
    let g = Guard::default();
    let count = |v: Vec<usize>| v.iter().max().map_or(0, |m| m + 1);
    assert_eq!(count(type_orbits(&pure(3), &[], 1, &g).unwrap()), 1);
    assert_eq!(type_orbits(&pure(3), &[0], 1, &g).unwrap(), vec![0, 1, 1]);
    assert_eq!(count(type_orbits(&FinStructure::chain(3), &[], 1, &g).unwrap()), 3);
}

#[test]
fn automorphisms_form_a_group() {
    let g = Guard::default();
    for m in binary_structures(3).iter().step_by(7).chain(unary_function_structures(3).iter()) {
        let auts = automorphisms(m, &g).unwrap();
        assert!(auts.contains(&vec![0, 1, 2]));
        for a in &auts {
            let mut inv = vec![0u32; 3];
            for (i, &v) in a.iter().enumerate() {
                inv[v as usize] = i as u32;
            }
            assert!(auts.contains(&inv));
            for b in &auts {
                let ab: Vec<u32> = a.iter().map(|&v| b[v as usize]).collect();
                assert!(auts.contains(&ab));
            }
        }
    }
}

#[test]
fn alpha_equivalent_formulas_agree() {
    let pairs = [
        ("exists y. R(x,y)", "exists z. R(x,z)"),
        ("forall y. exists z. (R(y,z) & R(x,y))", "forall u. exists v. (R(u,v) & R(x,u))"),
        ("exists x. R(x,y)", "exists w. R(w,y)"),
    ];
    for m in binary_structures(2) {
        for (a, b) in pairs {
            let (fa, fb) = (Formula::parse(a).unwrap(), Formula::parse(b).unwrap());
            for t in 0..2 {
                assert_eq!(eval(&m, &fa, &[t]).unwrap(), eval(&m, &fb, &[t]).unwrap());
            }
        }
    }
}

#[test]
fn shadowed_variables_use_the_inner_binding() {
    let c = FinStructure::chain(3);
    let phi = Formula::parse("x <= @1 & exists x. @3 <= x").unwrap();
    assert!(eval(&c, &phi, &[0]).unwrap());
    assert!(!eval(&c, &phi, &[2]).unwrap());
}

/// Random quantifier-free formula over x, y, u, v.
fn arb_qf() -> BoxedStrategy<Expr> {
    let vars = ["x", "y", "u", "v"];
    let atom = (0..4usize, 0..4usize, 0..3u8).prop_map(move |(a, b, k)| {
        let (ta, tb) = (Term::Var(vars[a].into()), Term::Var(vars[b].into()));
        match k {
            0 => Expr::Eq(ta, tb),
            1 => Expr::Rel("R".into(), vec![ta, tb]),
            _ => Expr::Eq(Term::App("f".into(), Box::new(ta)), tb),
        }
    });
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::or(a, b)),
        ]
    })
    .boxed()
}

fn quant(universal: bool, v: &str, body: Expr) -> Expr {
    if universal {
        Expr::Forall(v.into(), Box::new(body))
    } else {
        Expr::Exists(v.into(), Box::new(body))
    }
}

/// `Q u. Q' v. (A op B)`: a binary formula in x, y of quantifier depth ≤ 2.
fn arb_depth2() -> impl Strategy<Value = Formula> {
    (arb_qf(), arb_qf(), any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(a, b, q1, q2, conj)| {
        let body = if conj { Expr::and(a, b) } else { Expr::or(a, b) };
        let mid = quant(q2, "v", body);
        Formula::with_vars(quant(q1, "u", mid), vec!["x".into(), "y".into()]).unwrap()
    })
}

fn arb_structure() -> impl Strategy<Value = FinStructure> {
    (1..=3usize).prop_flat_map(|n| {
        (Just(n), proptest::collection::vec(any::<bool>(), n * n), proptest::collection::vec(0..n as u32, n)).prop_map(
            |(n, bits, table)| {
                let mut m = FinStructure::with_size(n);
                let tuples: Vec<Vec<u32>> =
                    all_tuples(n, 2).into_iter().zip(&bits).filter(|(_, b)| **b).map(|(t, _)| t).collect();
                m.add_relation("R", 2, &tuples).unwrap();
                m.add_function("f", table).unwrap();
                m
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn orbits_and_types_refine_formulas(m in arb_structure(), phi in arb_depth2()) {
        let g = Guard::default();
        let orbits = type_orbits(&m, &[], 2, &g).unwrap();
        let mut types = TypeTable::new(&m);
        let pairs = all_tuples(m.size(), 2);
        let truth: Vec<bool> = pairs.iter().map(|t| eval(&m, &phi, t).unwrap()).collect();
        for a in 0..pairs.len() {
            for b in 0..pairs.len() {
                let same_type = types.type_of(2, &pairs[a]) == types.type_of(2, &pairs[b]);
                if orbits[a] == orbits[b] {
                    prop_assert!(same_type);
                }
                if same_type {
                    prop_assert_eq!(truth[a], truth[b]);
                }
            }
        }
    }

    #[test]
    fn display_round_trips(phi in arb_depth2()) {
        let again = Formula::parse(&phi.to_string()).unwrap();
        prop_assert_eq!(again.expr, phi.expr);
    }
}
