use proptest::prelude::*;
use situskit::filters::elements;
use situskit::ramsey::*;
use situskit::simplex::{set_corepresented, weakly_increasing_lists, Situs};
use situskit::{Error, Guard};

fn atoms(n: usize, depth: usize) -> Situs {
    set_corepresented((0..n).map(situskit::fostruct::default_name).collect(), depth).unwrap()
}

fn idx(x: &Situs, n: usize, t: &[u32]) -> usize {
    x.index_of(n, t).unwrap()
}

fn distinct(t: &[u32]) -> bool {
    (0..t.len()).all(|i| (i + 1..t.len()).all(|j| t[i] != t[j]))
}

#[test]
fn hereditary_nondegeneracy_examples() {
    let x = atoms(3, 3);
    assert!(is_hereditarily_nondegenerate(&x, 3, idx(&x, 3, &[0, 1, 2])).unwrap());
    assert!(!is_hereditarily_nondegenerate(&x, 3, idx(&x, 3, &[0, 0, 1])).unwrap());
    assert!(!is_hereditarily_nondegenerate(&x, 3, idx(&x, 3, &[0, 1, 0])).unwrap());
    assert!((0..3).all(|v| is_hereditarily_nondegenerate(&x, 1, v).unwrap()));
    assert!(matches!(is_hereditarily_nondegenerate(&x, 4, 0), Err(Error::Domain(_))));
}

#[test]
fn tuple_nondegeneracy_is_distinct_coordinates() {
    for n in 1..=4 {
        let x = atoms(n, 3);
        let nd = Nondegeneracy::new(&x);
        for m in 1..=3 {
            for (i, t) in x.simplices(m).iter().enumerate() {
                assert_eq!(nd.get(m, i), distinct(t), "{t:?}");
            }
        }
    }
}

#[test]
fn constant_coloring_makes_everything_homogeneous() {
    let x = atoms(3, 3);
    let c = Coloring::constant(&x, 2).unwrap();
    for m in 2..=3 {
        assert_eq!(homogeneous_simplices(&x, &c, m).unwrap().count_ones(..), x.size(m));
    }
    assert!(matches!(homogeneous_simplices(&x, &c, 1), Err(Error::Precondition(_))));
}

#[test]
fn coloring_constructor_checks_totality() {
    let x = atoms(2, 2);
    assert!(Coloring::new(&x, 2, vec![0; 3], 1).is_err());
    assert!(Coloring::new(&x, 2, vec![0, 1, 2, 0], 2).is_err());
    assert!(Coloring::new(&x, 3, vec![], 1).is_err());
    assert!(Coloring::new(&x, 2, vec![0, 1, 1, 0], 2).is_ok());
}

#[test]
fn six_atoms_always_have_a_homogeneous_triangle() {
    let r = ramsey_sweep(6, 2, 3, &Guard::default()).unwrap();
    assert_eq!(r.colorings_checked, 1 << 15);
    assert!(r.always_homogeneous);
    assert!(r.counterexample.is_none());
}

#[test]
fn five_atoms_admit_the_pentagon() {
    let r = ramsey_sweep(5, 2, 3, &Guard::default()).unwrap();
    assert!(!r.always_homogeneous);
    let colors = r.counterexample.unwrap();
    let es = edges(5);
    // each color class is a 5-cycle: every vertex has degree 2 in it
    for v in 0..5 {
        let red = es.iter().zip(&colors).filter(|((a, b), &c)| (*a == v || *b == v) && c == 0).count();
        assert_eq!(red, 2);
    }
    let x = atoms(5, 3);
    let c = Coloring::from_edges(&x, |a, b| colors[es.iter().position(|&e| e == (a, b)).unwrap()], 2).unwrap();
    let hom = homogeneous_simplices(&x, &c, 3).unwrap();
    let nd = Nondegeneracy::new(&x);
    assert!(elements(&hom).into_iter().all(|i| !nd.get(3, i)));
}

#[test]
fn ramsey_sweep_guards() {
    assert!(matches!(ramsey_sweep(9, 2, 3, &Guard::default()), Err(Error::Resource { .. })));
    assert!(ramsey_sweep(3, 0, 3, &Guard::default()).is_err());
    let r = ramsey_sweep(3, 2, 3, &Guard::default()).unwrap();
    assert!(!r.always_homogeneous);
    assert!(ramsey_sweep(2, 1, 2, &Guard::default()).unwrap().always_homogeneous);
}

#[test]
fn constant_coloring_quotient_counts_patterns() {
    let x = atoms(3, 3);
    let c = Coloring::constant(&x, 2).unwrap();
    let q = coloring_quotient(&x, &c).unwrap();
    assert_eq!(q.class_counts(), [1, 2, 5]);
    assert!(q.target.validate().is_empty());
    assert!(q.map.is_continuous(&q.source, &q.target));
    assert!(q.pullback_matches().unwrap());
}

#[test]
fn injective_coloring_separates_pairs() {
    let x = atoms(3, 3);
    let es = edges(3);
    let c = Coloring::from_edges(&x, |a, b| es.iter().position(|&e| e == (a, b)).unwrap(), 3).unwrap();
    let q = coloring_quotient(&x, &c).unwrap();
    let pairs: Vec<usize> = (0..x.size(2)).filter(|&i| distinct(&x.simplices(2)[i])).collect();
    for &a in &pairs {
        for &b in &pairs {
            let (ta, tb) = (&x.simplices(2)[a], &x.simplices(2)[b]);
            let same_edge = ta.iter().min() == tb.iter().min() && ta.iter().max() == tb.iter().max();
            assert_eq!(q.map.level(2)[a] == q.map.level(2)[b], same_edge);
        }
    }
}

#[test]
fn pullback_equals_neighbourhood_filter_exhaustively() {
    for n in 1..=3 {
        let x = atoms(n, 3);
        let es = edges(n);
        for code in 0..(1usize << es.len()) {
            let c = Coloring::from_edges(&x, |a, b| (code >> es.iter().position(|&e| e == (a, b)).unwrap()) & 1, 2).unwrap();
            let q = coloring_quotient(&x, &c).unwrap();
            assert!(q.pullback_matches().unwrap());
            assert!(q.source.validate().is_empty());
        }
    }
}

#[test]
fn homogeneity_is_face_hereditary_exhaustively() {
    for n in 1..=3 {
        let x = atoms(n, 3);
        let size = x.size(2);
        for code in 0..(1usize << size) {
            let c = Coloring::new(&x, 2, (0..size).map(|i| (code >> i) & 1).collect(), 2).unwrap();
            let hom3 = homogeneous_simplices(&x, &c, 3).unwrap();
            let hom2 = homogeneous_simplices(&x, &c, 2).unwrap();
            for i in elements(&hom3) {
                for l in weakly_increasing_lists(2, 3) {
                    assert!(hom2.contains(x.face(3, &l)[i]));
                }
            }
        }
    }
}

fn random_quotient(n: usize, colors: &[usize], level: usize) -> ColoringQuotient {
    let x = atoms(n, 3);
    let k = x.size(level);
    let c = Coloring::new(&x, level, (0..k).map(|i| colors[i % colors.len()]).collect(), 3).unwrap();
    coloring_quotient(&x, &c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quotient_morphism_is_valid_and_continuous(n in 1usize..=4, level in 1usize..=3, colors in proptest::collection::vec(0usize..3, 1..20)) {
        let q = random_quotient(n, &colors, level);
        prop_assert!(q.source.validate().is_empty());
        prop_assert!(q.target.validate().is_empty());
        prop_assert!(q.map.is_valid(&q.source, &q.target));
        prop_assert!(q.map.is_continuous(&q.source, &q.target));
        prop_assert!(q.pullback_matches().unwrap());
    }

    #[test]
    fn homogeneous_faces_stay_homogeneous(n in 1usize..=4, colors in proptest::collection::vec(0usize..3, 1..20)) {
        let x = atoms(n, 3);
        let k = x.size(2);
        let c = Coloring::new(&x, 2, (0..k).map(|i| colors[i % colors.len()]).collect(), 3).unwrap();
        let hom3 = homogeneous_simplices(&x, &c, 3).unwrap();
        let hom2 = homogeneous_simplices(&x, &c, 2).unwrap();
        for i in elements(&hom3) {
            for l in weakly_increasing_lists(2, 3) {
                prop_assert!(hom2.contains(x.face(3, &l)[i]));
            }
        }
    }
}
