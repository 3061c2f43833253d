#![allow(dead_code)]

use situskit::fostruct::{automorphisms, equivalence_structure, FinStructure};
use situskit::Guard;
use std::collections::HashSet;

/// One non-dividing instance: structure, `A`, `a`, `b`, sequence length.
pub struct NdInstance {
    pub m: FinStructure,
    pub shape: Vec<usize>,
    pub a_set: Vec<u32>,
    pub a: u32,
    pub b: u32,
    pub len: usize,
}

/// Equivalence structures on at most 4 elements with `|A| ≤ 1`, every `(A, a, b)`
/// up to automorphism, and sequence lengths 2 and 3.
pub fn non_dividing_suite(guard: &Guard) -> Vec<NdInstance> {
    let shapes: Vec<Vec<usize>> =
        vec![vec![1, 1], vec![2], vec![2, 1], vec![1, 1, 1], vec![3], vec![2, 2], vec![3, 1], vec![2, 1, 1]];
    let mut out = Vec::new();
    for shape in shapes {
        let m = equivalence_structure(&shape);
        let n = m.size() as u32;
        let auts = automorphisms(&m, guard).unwrap();
        let mut seen = HashSet::new();
        let choices: Vec<Vec<u32>> = std::iter::once(vec![]).chain((0..n).map(|x| vec![x])).collect();
        for a_set in choices {
            for a in 0..n {
                for b in 0..n {
                    let key = auts
                        .iter()
                        .map(|s| {
                            let mut k: Vec<u32> = a_set.iter().map(|&x| s[x as usize]).collect();
                            k.push(s[a as usize]);
                            k.push(s[b as usize]);
                            k
                        })
                        .min()
                        .unwrap();
                    if !seen.insert(key) {
                        continue;
                    }
                    for len in [2, 3] {
                        out.push(NdInstance { m: m.clone(), shape: shape.clone(), a_set: a_set.clone(), a, b, len });
                    }
                }
            }
        }
    }
    out
}

/// The (2,2) tree witness: elements 0..3 are branch witnesses, 4 and 5 the
/// level-one parameters, 6 the root parameter; `R(x, y)` says `x` solves `y`.
pub fn tree_witness_structure() -> FinStructure {
    let solutions: [&[u32]; 7] = [&[0], &[1], &[2], &[3], &[0, 1], &[2, 3], &[0, 1, 2, 3]];
    let mut tuples = Vec::new();
    for (y, xs) in solutions.iter().enumerate() {
        for &x in *xs {
            tuples.push(vec![x, y as u32]);
        }
    }
    let mut m = FinStructure::with_size(7);
    m.add_relation("R", 2, &tuples).unwrap();
    m
}
